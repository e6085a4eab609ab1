//! Deep deterministic policy gradient, written out by hand: MLPs with
//! explicit backpropagation, Adam, a FIFO replay buffer, target networks and
//! the episode loop with decaying Gaussian exploration.

mod agent;
mod io;
mod mlp;
mod optim;
mod replay;
mod train;

pub use agent::{
    actor_objective, actor_objective_grad, actor_update, critic_loss, critic_loss_grad, critic_targets,
    critic_update, soft_update, ActorCriticState,
};
pub use io::{load_actor, read_actor, save_actor, write_actor, ACTOR_MAGIC};
pub use mlp::{Activations, Mlp};
pub use optim::Adam;
pub use replay::ReplayBuffer;
pub use train::{train, DdpgConfig, EpisodeLog, SafetyStrategy, TrainOutcome, TrainingLog};

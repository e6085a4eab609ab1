use super::mlp::{Activations, Mlp};
use super::optim::Adam;
use crate::{Error, Result, Rng, Transition, Vector};

/// Actor, critic, their target copies and one optimizer per trained network.
#[derive(Debug, Clone)]
pub struct ActorCriticState {
    pub actor: Mlp,
    pub critic: Mlp,
    pub target_actor: Mlp,
    pub target_critic: Mlp,
    pub actor_opt: Adam,
    pub critic_opt: Adam,
    pub updates: u64,
}

impl ActorCriticState {
    /// Fresh networks with `hidden` layer widths; targets start as exact copies.
    pub fn new(
        state_dim: usize,
        input_dim: usize,
        hidden: &[usize],
        actor_lr: f64,
        critic_lr: f64,
        rng: &mut Rng,
    ) -> Result<Self> {
        let mut actor_sizes = vec![state_dim];
        actor_sizes.extend_from_slice(hidden);
        actor_sizes.push(input_dim);
        let mut critic_sizes = vec![state_dim + input_dim];
        critic_sizes.extend_from_slice(hidden);
        critic_sizes.push(1);
        let actor = Mlp::init(&actor_sizes, rng)?;
        let critic = Mlp::init(&critic_sizes, rng)?;
        Ok(Self::from_networks(actor, critic, actor_lr, critic_lr))
    }

    pub fn from_networks(actor: Mlp, critic: Mlp, actor_lr: f64, critic_lr: f64) -> Self {
        Self {
            actor_opt: Adam::new(actor.num_params(), actor_lr),
            critic_opt: Adam::new(critic.num_params(), critic_lr),
            target_actor: actor.clone(),
            target_critic: critic.clone(),
            actor,
            critic,
            updates: 0,
        }
    }
}

fn concat(x: &Vector, u: &[f64]) -> Vec<f64> {
    let mut v = Vec::with_capacity(x.len() + u.len());
    v.extend_from_slice(x.as_slice());
    v.extend_from_slice(u);
    v
}

/// `y_i = r_i + γ Q'(x'_i, μ'(x'_i))`, or `r_i` for terminal transitions.
pub fn critic_targets(target_actor: &Mlp, target_critic: &Mlp, batch: &[&Transition], gamma: f64) -> Vec<f64> {
    batch
        .iter()
        .map(|t| {
            if t.terminal {
                return t.reward;
            }
            let u = target_actor.forward(t.x_next.as_slice());
            t.reward + gamma * target_critic.forward(&concat(&t.x_next, &u))[0]
        })
        .collect()
}

/// `(1/N) Σ (y_i − Q(x_i, u_i))²`.
pub fn critic_loss(critic: &Mlp, batch: &[&Transition], targets: &[f64]) -> f64 {
    let n = batch.len() as f64;
    batch
        .iter()
        .zip(targets)
        .map(|(t, y)| {
            let e = y - critic.forward(&concat(&t.x, t.u.as_slice()))[0];
            e * e
        })
        .sum::<f64>()
        / n
}

/// Loss and its gradient with respect to the critic parameters.
pub fn critic_loss_grad(critic: &Mlp, batch: &[&Transition], targets: &[f64]) -> (f64, Vec<f64>) {
    let n = batch.len() as f64;
    let mut grad = vec![0.0; critic.num_params()];
    let mut acts = Activations::default();
    let mut loss = 0.0;
    for (t, y) in batch.iter().zip(targets) {
        critic.forward_cached(&concat(&t.x, t.u.as_slice()), &mut acts);
        let e = y - acts.output()[0];
        loss += e * e;
        critic.backward(&acts, &[-2.0 * e / n], Some(&mut grad), None);
    }
    (loss / n, grad)
}

/// One Adam step on the critic loss; returns the loss before the step.
pub fn critic_update(state: &mut ActorCriticState, batch: &[&Transition], gamma: f64) -> Result<f64> {
    if batch.is_empty() {
        return Err(Error::invalid("critic_update", "empty minibatch"));
    }
    let targets = critic_targets(&state.target_actor, &state.target_critic, batch, gamma);
    let (loss, grad) = critic_loss_grad(&state.critic, batch, &targets);
    if !loss.is_finite() || grad.iter().any(|g| !g.is_finite()) {
        return Err(Error::Diverged(format!("critic loss {loss} after {} updates", state.updates)));
    }
    state.critic_opt.step(state.critic.params_mut(), &grad);
    Ok(loss)
}

/// `(1/N) Σ Q(x_i, μ(x_i))` — the quantity the actor ascends.
pub fn actor_objective(actor: &Mlp, critic: &Mlp, states: &[&Vector]) -> f64 {
    let n = states.len() as f64;
    states
        .iter()
        .map(|x| critic.forward(&concat(x, &actor.forward(x.as_slice())))[0])
        .sum::<f64>()
        / n
}

/// Objective and its gradient with respect to the actor parameters, chained
/// through the (frozen) critic's input gradient `∂Q/∂u`.
pub fn actor_objective_grad(actor: &Mlp, critic: &Mlp, states: &[&Vector]) -> (f64, Vec<f64>) {
    let n = states.len() as f64;
    let n_x = actor.input_dim();
    let mut grad = vec![0.0; actor.num_params()];
    let mut a_acts = Activations::default();
    let mut c_acts = Activations::default();
    let mut dq_dinput = vec![0.0; critic.input_dim()];
    let mut total = 0.0;
    for x in states {
        actor.forward_cached(x.as_slice(), &mut a_acts);
        critic.forward_cached(&concat(x, a_acts.output()), &mut c_acts);
        total += c_acts.output()[0];
        critic.backward(&c_acts, &[1.0 / n], None, Some(&mut dq_dinput));
        actor.backward(&a_acts, &dq_dinput[n_x..], Some(&mut grad), None);
    }
    (total / n, grad)
}

/// One Adam ascent step for the actor; returns the gradient norm.
pub fn actor_update(state: &mut ActorCriticState, batch: &[&Transition]) -> Result<f64> {
    if batch.is_empty() {
        return Err(Error::invalid("actor_update", "empty minibatch"));
    }
    let states: Vec<&Vector> = batch.iter().map(|t| &t.x).collect();
    let (_, mut grad) = actor_objective_grad(&state.actor, &state.critic, &states);
    let norm = grad.iter().map(|g| g * g).sum::<f64>().sqrt();
    if !norm.is_finite() {
        return Err(Error::Diverged(format!("actor gradient {norm} after {} updates", state.updates)));
    }
    grad.iter_mut().for_each(|g| *g = -*g);
    state.actor_opt.step(state.actor.params_mut(), &grad);
    Ok(norm)
}

/// `θᵗ ← τθ + (1 − τ)θᵗ` for both networks.
pub fn soft_update(state: &mut ActorCriticState, tau: f64) {
    let blend = |main: &Mlp, target: &mut Mlp| {
        for (t, m) in target.params_mut().iter_mut().zip(main.params()) {
            *t = tau * m + (1.0 - tau) * *t;
        }
    };
    blend(&state.actor, &mut state.target_actor);
    blend(&state.critic, &mut state.target_critic);
}

use super::agent::{actor_update, critic_update, soft_update, ActorCriticState};
use super::mlp::Mlp;
use super::replay::ReplayBuffer;
use crate::cost::RewardModel;
use crate::dynamics::is_diverged;
use crate::riccati::solve_riccati;
use crate::{
    ConstraintSpec, CostSpec, Error, LtiSystem, Matrix, NoiseModel, PolicyHandle, Result, RewardMode, Rng,
    Transition, Vector,
};

/// What happens when a training episode leaves the `‖x‖∞ ≤ x_max` box.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SafetyStrategy {
    /// Hand control to the LQR gain for the rest of the episode.
    Backup,
    /// Store a terminal transition (reward scaled by `1/(1−γ)`) and restart
    /// from the initial state.
    Terminate,
}

impl SafetyStrategy {
    pub fn label(self) -> &'static str {
        match self {
            SafetyStrategy::Backup => "backup",
            SafetyStrategy::Terminate => "terminate",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DdpgConfig {
    /// Hidden layer widths shared by actor and critic.
    pub hidden: Vec<usize>,
    pub tau: f64,
    pub actor_lr: f64,
    pub critic_lr: f64,
    pub gamma: f64,
    pub batch_size: usize,
    pub episodes: usize,
    pub steps: usize,
    /// Exploration variance (per input, isotropic) in the first episode.
    pub var_initial: f64,
    /// Exploration variance in the last episode.
    pub var_final: f64,
    pub buffer_capacity: usize,
    pub seed: u64,
    /// Positive factor applied to rewards before they enter the replay
    /// buffer. It keeps critic targets O(1) without changing the optimal
    /// policy.
    pub reward_scale: f64,
    /// Safety threshold on `‖x‖∞`.
    pub x_max: f64,
    pub safety: SafetyStrategy,
}

impl Default for DdpgConfig {
    fn default() -> Self {
        Self {
            hidden: vec![10, 100],
            tau: 0.005,
            actor_lr: 1e-3,
            critic_lr: 1e-3,
            gamma: 0.99,
            batch_size: 64,
            episodes: 300,
            steps: 200,
            var_initial: 5.0,
            var_final: 0.01,
            buffer_capacity: 100_000,
            seed: 0,
            reward_scale: 0.01,
            x_max: 20.0,
            safety: SafetyStrategy::Backup,
        }
    }
}

impl DdpgConfig {
    /// Every violated invariant, as `(field, reason)`.
    pub fn violations(&self) -> Vec<(&'static str, String)> {
        let mut v = Vec::new();
        if self.hidden.is_empty() || self.hidden.contains(&0) {
            v.push(("hidden", format!("{:?} must be non-empty positive widths", self.hidden)));
        }
        if !(self.tau > 0.0 && self.tau <= 1.0) {
            v.push(("tau", format!("{} is not in (0, 1]", self.tau)));
        }
        if !(self.actor_lr > 0.0) {
            v.push(("actor_lr", format!("{} is not positive", self.actor_lr)));
        }
        if !(self.critic_lr > 0.0) {
            v.push(("critic_lr", format!("{} is not positive", self.critic_lr)));
        }
        if !(self.gamma > 0.0 && self.gamma < 1.0) {
            v.push(("gamma", format!("{} is not in (0, 1)", self.gamma)));
        }
        if self.batch_size == 0 {
            v.push(("batch_size", "must be at least 1".into()));
        }
        if self.steps == 0 {
            v.push(("steps", "must be at least 1".into()));
        }
        if !(self.var_final > 0.0 && self.var_initial > self.var_final) {
            v.push((
                "var_initial",
                format!(
                    "schedule {} -> {} must decrease strictly to a positive value",
                    self.var_initial, self.var_final
                ),
            ));
        }
        if self.buffer_capacity < self.batch_size.max(1) {
            v.push(("buffer_capacity", format!("{} is smaller than the minibatch", self.buffer_capacity)));
        }
        if !(self.reward_scale > 0.0 && self.reward_scale.is_finite()) {
            v.push(("reward_scale", format!("{} is not positive", self.reward_scale)));
        }
        if !(self.x_max > 0.0) {
            v.push(("x_max", format!("{} is not positive", self.x_max)));
        }
        v
    }

    pub fn validate(&self) -> Result<()> {
        match self.violations().into_iter().next() {
            None => Ok(()),
            Some((field, reason)) => Err(Error::Invalid {
                what: "ddpg config",
                reason: format!("{field}: {reason}"),
            }),
        }
    }

    /// Geometric interpolation from `var_initial` (episode 0) to `var_final`
    /// (last episode).
    pub fn exploration_variance(&self, episode: usize) -> f64 {
        if self.episodes <= 1 {
            return self.var_initial;
        }
        if episode + 1 >= self.episodes {
            return self.var_final;
        }
        let frac = episode as f64 / (self.episodes - 1) as f64;
        self.var_initial * (self.var_final / self.var_initial).powf(frac)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EpisodeLog {
    pub episode: usize,
    /// Mean unscaled per-step reward `−g`.
    pub mean_reward: f64,
    /// Mean pre-step critic loss (scaled rewards); 0 before warm-up ends.
    pub critic_loss: f64,
    pub violations: usize,
    pub exploration_var: f64,
    /// Safety interventions: backup hand-overs or terminations.
    pub interventions: usize,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct TrainingLog {
    pub episodes: Vec<EpisodeLog>,
}

#[derive(Debug, Clone)]
pub struct TrainOutcome {
    pub policy: PolicyHandle,
    pub state: ActorCriticState,
    pub log: TrainingLog,
}

impl TrainOutcome {
    pub fn actor(&self) -> &Mlp {
        &self.state.actor
    }
}

/// Train a deterministic actor on rewards `r = −g` for `mode`.
///
/// Per step: act with Gaussian exploration, store the transition, then (once
/// the buffer holds a minibatch) one critic step, one actor step and a soft
/// target update.
pub fn train(
    sys: &LtiSystem,
    noise: &NoiseModel,
    cost: &CostSpec,
    con: &ConstraintSpec,
    mode: RewardMode,
    cfg: &DdpgConfig,
) -> Result<TrainOutcome> {
    cfg.validate()?;
    noise.check_against(sys)?;
    let rewards = RewardModel::new(mode, sys, noise, cost, con)?;
    let backup: Option<(Matrix, Vector)> = match cfg.safety {
        SafetyStrategy::Backup => {
            let sol = solve_riccati(sys, cost, noise)?;
            Some((sol.gain, sol.offset))
        }
        SafetyStrategy::Terminate => None,
    };

    let root = Rng::new(cfg.seed);
    let mut state = ActorCriticState::new(
        sys.state_dim(),
        sys.input_dim(),
        &cfg.hidden,
        cfg.actor_lr,
        cfg.critic_lr,
        &mut root.stream(0),
    )?;
    let mut plant_rng = root.stream(1);
    let mut explore_rng = root.stream(2);
    let mut batch_rng = root.stream(3);
    let mut buffer = ReplayBuffer::new(cfg.buffer_capacity);
    let mut log = TrainingLog::default();
    let x0 = Vector::zeros(sys.state_dim());
    let p = sys.input_dim();

    for episode in 0..cfg.episodes {
        let var = cfg.exploration_variance(episode);
        let sd = var.sqrt();
        let mut x = x0.clone();
        let mut on_backup = false;
        let (mut reward_sum, mut loss_sum, mut losses) = (0.0, 0.0, 0usize);
        let (mut violations, mut interventions) = (0usize, 0usize);

        for _ in 0..cfg.steps {
            let mut u = match (&backup, on_backup) {
                (Some((k, l)), true) => k * &x + l,
                _ => Vector::from_vec(state.actor.forward(x.as_slice())),
            };
            for i in 0..p {
                u[i] += sd * explore_rng.normal();
            }
            let w = noise.sample(&mut plant_rng);
            let x_next = sys.advance(&x, &u, &w);
            let r = rewards.reward(&x, &u, &x_next)?;
            reward_sum += r;
            if con.is_violated(&x_next) {
                violations += 1;
            }

            let escaped = x_next.iter().any(|v| !v.is_finite() || v.abs() > cfg.x_max);
            let mut stored = cfg.reward_scale * r;
            let mut terminal = false;
            if escaped {
                match cfg.safety {
                    SafetyStrategy::Backup => {
                        if !on_backup {
                            interventions += 1;
                        }
                        on_backup = true;
                    }
                    SafetyStrategy::Terminate => {
                        interventions += 1;
                        terminal = true;
                        stored /= 1.0 - cfg.gamma;
                    }
                }
            }
            if is_diverged(&x_next) || !stored.is_finite() {
                return Err(Error::Diverged(format!(
                    "episode {episode}: state left the divergence box (‖x‖∞ = {})",
                    x_next.amax()
                )));
            }
            buffer.push(Transition {
                x: x.clone(),
                u,
                reward: stored,
                x_next: x_next.clone(),
                terminal,
            });

            if buffer.len() >= cfg.batch_size {
                let batch = buffer.sample(cfg.batch_size, &mut batch_rng);
                let loss = critic_update(&mut state, &batch, cfg.gamma)
                    .map_err(|e| Error::Diverged(format!("episode {episode}: {e}")))?;
                actor_update(&mut state, &batch).map_err(|e| Error::Diverged(format!("episode {episode}: {e}")))?;
                soft_update(&mut state, cfg.tau);
                state.updates += 1;
                loss_sum += loss;
                losses += 1;
            }
            x = if terminal { x0.clone() } else { x_next };
        }

        log.episodes.push(EpisodeLog {
            episode,
            mean_reward: reward_sum / cfg.steps as f64,
            critic_loss: if losses > 0 { loss_sum / losses as f64 } else { 0.0 },
            violations,
            exploration_var: var,
            interventions,
        });
    }

    Ok(TrainOutcome {
        policy: PolicyHandle::actor(state.actor.clone()),
        state,
        log,
    })
}

//! Uniform handle over every controller the toolkit can evaluate.

use std::sync::Arc;

use crate::ddpg::Mlp;
use crate::mpc::MpcPolicy;
use crate::{Matrix, Rng, Vector};

#[derive(Debug, Clone)]
pub enum PolicyHandle {
    /// `u = K x + l`.
    Affine { gain: Matrix, offset: Vector },
    /// Deterministic actor network.
    Actor(Arc<Mlp>),
    /// Receding-horizon scenario planner; consumes randomness on every call.
    Mpc(Arc<MpcPolicy>),
}

impl PolicyHandle {
    pub fn affine(gain: Matrix, offset: Vector) -> Self {
        PolicyHandle::Affine { gain, offset }
    }

    /// `u ≡ 0` for an `n`-state, `p`-input plant.
    pub fn zero(n: usize, p: usize) -> Self {
        PolicyHandle::affine(Matrix::zeros(p, n), Vector::zeros(p))
    }

    pub fn actor(mlp: Mlp) -> Self {
        PolicyHandle::Actor(Arc::new(mlp))
    }

    /// Action at `x`. Only the MPC variant draws from `rng`.
    pub fn act(&self, x: &Vector, rng: &mut Rng) -> Vector {
        match self {
            PolicyHandle::Affine { gain, offset } => gain * x + offset,
            PolicyHandle::Actor(mlp) => Vector::from_vec(mlp.forward(x.as_slice())),
            PolicyHandle::Mpc(mpc) => mpc.act(x, rng),
        }
    }

    pub fn label(&self) -> &'static str {
        match self {
            PolicyHandle::Affine { .. } => "affine",
            PolicyHandle::Actor(_) => "actor",
            PolicyHandle::Mpc(_) => "mpc",
        }
    }

    /// Planning policies whose per-step runtime is worth reporting.
    pub fn is_expensive(&self) -> bool {
        matches!(self, PolicyHandle::Mpc(_))
    }
}

//! Chance-constrained optimal control for discrete-time LTI plants.
//!
//! The crate provides the risk-neutral LQR baseline, analytic constraint
//! probabilities (Chernoff bounds for quadratic risky events, exact tails for
//! linear ones), a from-scratch DDPG actor-critic trained on the penalized
//! per-stage cost, a scenario MPC baseline and a Monte-Carlo evaluation
//! harness that estimates the average cost `Jc` and the violation rate.
//!
//! Data-parallel loops (Monte-Carlo trials, CEM populations, bound audits)
//! go through [`exec`]; with the `parallel` feature they run on rayon, and
//! every reduction happens in a fixed order so results are bit-identical to
//! the sequential path.

pub mod bounds;
pub mod cost;
pub mod ddpg;
pub mod dynamics;
pub mod error;
pub mod eval;
pub mod exec;
pub mod linalg;
pub mod mpc;
pub mod policy;
pub mod riccati;
pub mod rng;
pub mod table;

pub use bounds::{ConstraintKind, ConstraintSpec};
pub use cost::{CostSpec, RewardMode};
pub use dynamics::{LtiSystem, NoiseInjection, NoiseModel, Transition};
pub use error::{Error, Result};
pub use eval::{EvalProtocol, EvalReport};
pub use exec::ExecMode;
pub use policy::PolicyHandle;
pub use rng::Rng;

/// Column vector of reals.
pub type Vector = nalgebra::DVector<f64>;
/// Dense real matrix.
pub type Matrix = nalgebra::DMatrix<f64>;

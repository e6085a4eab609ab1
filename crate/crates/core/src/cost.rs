//! Per-stage costs, rewards and discounted returns.

use crate::bounds::{ConstraintEvaluator, ConstraintSpec};
use crate::error::check_len;
use crate::linalg::{cholesky_lower, quad_form};
use crate::{Error, LtiSystem, Matrix, Result, Vector};

/// Quadratic weights, Lagrange multiplier and discount.
#[derive(Debug, Clone, PartialEq)]
pub struct CostSpec {
    w: Matrix,
    u: Matrix,
    /// Lagrange multiplier `C_l` on the constraint term.
    pub c_l: f64,
    pub gamma: f64,
}

impl CostSpec {
    pub fn new(w: Matrix, u: Matrix, c_l: f64, gamma: f64) -> Result<Self> {
        cholesky_lower(&w, "cost.w")?;
        cholesky_lower(&u, "cost.u")?;
        if !(c_l >= 0.0 && c_l.is_finite()) {
            return Err(Error::invalid("cost.c_l", format!("{c_l} is not a finite non-negative number")));
        }
        if !(gamma > 0.0 && gamma < 1.0) {
            return Err(Error::invalid("cost.gamma", format!("{gamma} is not in (0, 1)")));
        }
        Ok(Self { w, u, c_l, gamma })
    }

    pub fn w(&self) -> &Matrix {
        &self.w
    }

    pub fn u(&self) -> &Matrix {
        &self.u
    }

    pub fn with_multiplier(&self, c_l: f64) -> Result<Self> {
        Self::new(self.w.clone(), self.u.clone(), c_l, self.gamma)
    }

    pub(crate) fn check_against(&self, sys: &LtiSystem) -> Result<()> {
        check_len("cost.w", sys.state_dim(), self.w.nrows())?;
        check_len("cost.u", sys.input_dim(), self.u.nrows())
    }
}

/// `f(x, u) = xᵀWx + uᵀUu`.
pub fn stage_quadratic(cost: &CostSpec, x: &Vector, u: &Vector) -> f64 {
    quad_form(cost.w(), x) + quad_form(cost.u(), u)
}

/// Known-model cost `f + C_l · h_c(x, u)`.
pub fn stage_penalized_known(
    cost: &CostSpec,
    evaluator: &ConstraintEvaluator,
    x: &Vector,
    u: &Vector,
) -> Result<f64> {
    let f = stage_quadratic(cost, x, u);
    if cost.c_l == 0.0 {
        return Ok(f);
    }
    Ok(f + cost.c_l * evaluator.probability(x, u)?)
}

/// Unknown-model cost `f + C_l · 1{f_c(x') ≥ ε}`.
pub fn stage_penalized_unknown(
    cost: &CostSpec,
    con: &ConstraintSpec,
    x: &Vector,
    u: &Vector,
    x_next: &Vector,
) -> f64 {
    let f = stage_quadratic(cost, x, u);
    if con.is_violated(x_next) {
        f + cost.c_l
    } else {
        f
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum RewardMode {
    RiskNeutral,
    /// Penalty from the analytic constraint probability (needs the model).
    KnownModelChernoff,
    /// Penalty from the observed indicator on the successor state.
    UnknownModelIndicator,
}

impl RewardMode {
    pub fn label(self) -> &'static str {
        match self {
            RewardMode::RiskNeutral => "risk-neutral",
            RewardMode::KnownModelChernoff => "known-model",
            RewardMode::UnknownModelIndicator => "unknown-model",
        }
    }
}

/// Reward evaluator `r = −g` for a fixed mode.
#[derive(Debug, Clone)]
pub struct RewardModel {
    mode: RewardMode,
    cost: CostSpec,
    constraint: ConstraintSpec,
    evaluator: Option<ConstraintEvaluator>,
}

impl RewardModel {
    pub fn new(
        mode: RewardMode,
        sys: &LtiSystem,
        noise: &crate::NoiseModel,
        cost: &CostSpec,
        con: &ConstraintSpec,
    ) -> Result<Self> {
        let evaluator = match mode {
            RewardMode::KnownModelChernoff => Some(ConstraintEvaluator::new(sys, noise, con)?),
            _ => None,
        };
        Ok(Self {
            mode,
            cost: cost.clone(),
            constraint: con.clone(),
            evaluator,
        })
    }

    pub fn mode(&self) -> RewardMode {
        self.mode
    }

    /// Stage cost `g(x, u[, x'])` for this mode (the negated reward).
    pub fn stage_cost(&self, x: &Vector, u: &Vector, x_next: &Vector) -> Result<f64> {
        match (self.mode, &self.evaluator) {
            (RewardMode::RiskNeutral, _) => Ok(stage_quadratic(&self.cost, x, u)),
            (RewardMode::KnownModelChernoff, Some(ev)) => stage_penalized_known(&self.cost, ev, x, u),
            (RewardMode::KnownModelChernoff, None) => unreachable!("evaluator built in new()"),
            (RewardMode::UnknownModelIndicator, _) => {
                Ok(stage_penalized_unknown(&self.cost, &self.constraint, x, u, x_next))
            }
        }
    }

    pub fn reward(&self, x: &Vector, u: &Vector, x_next: &Vector) -> Result<f64> {
        self.stage_cost(x, u, x_next).map(|g| -g)
    }
}

/// `Σ_i γ^i r_i` over a finite sequence.
pub fn discounted_return(rewards: &[f64], gamma: f64) -> f64 {
    rewards.iter().rev().fold(0.0, |acc, r| r + gamma * acc)
}

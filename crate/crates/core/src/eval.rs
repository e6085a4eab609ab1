//! Monte-Carlo evaluation: average quadratic cost `Jc`, violation rate `δ̂`
//! and `CV% = 100·δ̂`, plus the multiplier grid search and the
//! single-state sweep.
//!
//! Trial `m` owns stream `m` of the protocol seed. Inside a trial, plant
//! noise and policy randomness come from separate sub-streams, so two
//! policies evaluated with the same seed face identical disturbance
//! sequences.

use std::time::Instant;

use crate::cost::{stage_quadratic, CostSpec};
use crate::dynamics::is_diverged;
use crate::error::check_len;
use crate::{ConstraintSpec, Error, ExecMode, LtiSystem, NoiseModel, PolicyHandle, Result, Rng, Vector};

/// Fraction of diverged trials above which a report is marked invalid.
pub const MAX_DIVERGED_FRACTION: f64 = 0.01;

#[derive(Debug, Clone, PartialEq)]
pub enum InitialState {
    Zero,
    Fixed(Vector),
    /// Each component uniform in `[−r, r]`, drawn from the trial stream.
    UniformBox(f64),
}

#[derive(Debug, Clone, PartialEq)]
pub struct EvalProtocol {
    pub trials: usize,
    pub steps: usize,
    pub x0: InitialState,
    pub seed: u64,
}

impl Default for EvalProtocol {
    fn default() -> Self {
        Self {
            trials: 100,
            steps: 1000,
            x0: InitialState::Zero,
            seed: 0,
        }
    }
}

impl EvalProtocol {
    pub fn violations(&self) -> Vec<(&'static str, String)> {
        let mut v = Vec::new();
        if self.trials == 0 {
            v.push(("trials", "must be at least 1".into()));
        }
        if self.steps == 0 {
            v.push(("steps", "must be at least 1".into()));
        }
        if let InitialState::UniformBox(r) = self.x0 {
            if !(r >= 0.0 && r.is_finite()) {
                v.push(("x0", format!("box radius {r} is not a non-negative number")));
            }
        }
        v
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EvalReport {
    pub policy: String,
    /// Mean of `f(x_k, u_k)` over every step of every non-diverged trial.
    pub jc: f64,
    pub cv_percent: f64,
    /// `violations / (trials_used · steps)`.
    pub delta_hat: f64,
    pub violations: u64,
    /// Requested trial count `M`.
    pub trials: usize,
    /// Trials that entered the averages (`M` minus diverged).
    pub trials_used: usize,
    pub diverged: usize,
    pub steps: usize,
    pub seed: u64,
    /// False when more than 1% of trials diverged.
    pub valid: bool,
    /// Wall-clock seconds per policy call (not part of any deterministic output).
    pub mean_step_seconds: f64,
}

impl EvalReport {
    /// Standard error of `δ̂` under a Bernoulli model.
    pub fn delta_std_error(&self) -> f64 {
        let nn = (self.trials_used * self.steps) as f64;
        (self.delta_hat * (1.0 - self.delta_hat) / nn).sqrt()
    }
}

struct TrialOutcome {
    cost: f64,
    violations: u64,
    diverged: bool,
    seconds: f64,
}

fn run_trial(
    sys: &LtiSystem,
    noise: &NoiseModel,
    cost: &CostSpec,
    con: &ConstraintSpec,
    policy: &PolicyHandle,
    proto: &EvalProtocol,
    trial: usize,
) -> TrialOutcome {
    let trial_rng = Rng::new(proto.seed).stream(trial as u64);
    let mut plant_rng = trial_rng.stream(0);
    let mut policy_rng = trial_rng.stream(1);
    let n = sys.state_dim();
    let mut x = match &proto.x0 {
        InitialState::Zero => Vector::zeros(n),
        InitialState::Fixed(x0) => x0.clone(),
        InitialState::UniformBox(r) => {
            let mut init = trial_rng.stream(2);
            Vector::from_iterator(n, (0..n).map(|_| init.uniform_in(-r, *r)))
        }
    };
    let mut out = TrialOutcome {
        cost: 0.0,
        violations: 0,
        diverged: false,
        seconds: 0.0,
    };
    for _ in 0..proto.steps {
        let start = Instant::now();
        let u = policy.act(&x, &mut policy_rng);
        out.seconds += start.elapsed().as_secs_f64();
        out.cost += stage_quadratic(cost, &x, &u);
        let w = noise.sample(&mut plant_rng);
        x = sys.advance(&x, &u, &w);
        if con.is_violated(&x) {
            out.violations += 1;
        }
        if is_diverged(&x) || !out.cost.is_finite() {
            out.diverged = true;
            break;
        }
    }
    out
}

/// Run `proto.trials` seeded closed-loop trials of `proto.steps` steps.
#[allow(clippy::too_many_arguments)]
pub fn evaluate(
    sys: &LtiSystem,
    noise: &NoiseModel,
    cost: &CostSpec,
    con: &ConstraintSpec,
    policy: &PolicyHandle,
    label: &str,
    proto: &EvalProtocol,
    exec: ExecMode,
) -> Result<EvalReport> {
    if let Some((field, reason)) = proto.violations().into_iter().next() {
        return Err(Error::Invalid {
            what: "eval protocol",
            reason: format!("{field}: {reason}"),
        });
    }
    noise.check_against(sys)?;
    cost.check_against(sys)?;
    con.check_against(sys)?;
    if let InitialState::Fixed(x0) = &proto.x0 {
        check_len("eval: x0", sys.state_dim(), x0.len())?;
    }
    let outcomes = exec.map(proto.trials, |m| run_trial(sys, noise, cost, con, policy, proto, m));

    let (mut total, mut violations, mut diverged, mut seconds) = (0.0, 0u64, 0usize, 0.0);
    for o in &outcomes {
        seconds += o.seconds;
        if o.diverged {
            diverged += 1;
        } else {
            total += o.cost;
            violations += o.violations;
        }
    }
    let trials_used = proto.trials - diverged;
    let nn = (trials_used * proto.steps) as f64;
    let (jc, delta_hat) = if trials_used == 0 {
        (f64::NAN, f64::NAN)
    } else {
        (total / nn, violations as f64 / nn)
    };
    Ok(EvalReport {
        policy: label.to_string(),
        jc,
        cv_percent: 100.0 * delta_hat,
        delta_hat,
        violations,
        trials: proto.trials,
        trials_used,
        diverged,
        steps: proto.steps,
        seed: proto.seed,
        valid: (diverged as f64) <= MAX_DIVERGED_FRACTION * proto.trials as f64,
        mean_step_seconds: seconds / (proto.trials * proto.steps) as f64,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct GridRow {
    pub c_l: f64,
    pub report: EvalReport,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GridResult {
    pub rows: Vec<GridRow>,
    /// Smallest multiplier meeting the target, if any.
    pub selected: Option<f64>,
    /// Neighbouring grid points where `δ̂` rose by more than three standard
    /// errors (soft monotonicity check).
    pub warnings: Vec<String>,
}

impl GridResult {
    pub fn infeasible(&self) -> bool {
        self.selected.is_none()
    }
}

/// Evaluate `run(C_l)` over an ascending grid and pick the smallest `C_l`
/// whose `δ̂` is at most `target_delta`.
pub fn grid_search_cl<F>(grid: &[f64], target_delta: f64, mut run: F) -> Result<GridResult>
where
    F: FnMut(f64) -> Result<EvalReport>,
{
    if grid.is_empty() {
        return Err(Error::invalid("grid", "C_l grid is empty"));
    }
    if grid.windows(2).any(|w| !(w[0] < w[1])) {
        return Err(Error::invalid("grid", format!("{grid:?} is not strictly ascending")));
    }
    let mut rows = Vec::with_capacity(grid.len());
    for &c_l in grid {
        rows.push(GridRow { c_l, report: run(c_l)? });
    }
    let selected = rows
        .iter()
        .find(|r| r.report.delta_hat <= target_delta)
        .map(|r| r.c_l);
    let warnings = rows
        .windows(2)
        .filter_map(|w| {
            let (a, b) = (&w[0].report, &w[1].report);
            let se = (a.delta_std_error().powi(2) + b.delta_std_error().powi(2)).sqrt();
            (b.delta_hat - a.delta_hat > 3.0 * se).then(|| {
                format!(
                    "delta_hat rose from {} at C_l={} to {} at C_l={}",
                    a.delta_hat, w[0].c_l, b.delta_hat, w[1].c_l
                )
            })
        })
        .collect();
    Ok(GridResult {
        rows,
        selected,
        warnings,
    })
}

/// `(x_i, u_1)` pairs with state component `i` swept over `[lo, hi]` and all
/// other components zero.
pub fn state_input_sweep(
    policy: &PolicyHandle,
    state_dim: usize,
    component: usize,
    lo: f64,
    hi: f64,
    points: usize,
    seed: u64,
) -> Result<Vec<(f64, f64)>> {
    if component >= state_dim {
        return Err(Error::invalid("sweep", format!("component {component} out of range 0..{state_dim}")));
    }
    if points < 2 || !(lo < hi) {
        return Err(Error::invalid("sweep", format!("need at least 2 points on a non-empty range, got {points} on [{lo}, {hi}]")));
    }
    let root = Rng::new(seed);
    Ok((0..points)
        .map(|k| {
            let xi = lo + (hi - lo) * k as f64 / (points - 1) as f64;
            let mut x = Vector::zeros(state_dim);
            x[component] = xi;
            let u = policy.act(&x, &mut root.stream(k as u64));
            (xi, u[0])
        })
        .collect())
}

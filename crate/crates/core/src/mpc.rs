//! Scenario MPC: at every step draw `S` noise sequences over a `T`-step
//! horizon, choose the input sequence minimizing the summed stage cost plus
//! `C_s` per violating successor state, and apply its first input.
//!
//! The indicator makes the objective piecewise constant in places, so the
//! sequence is optimized with the cross-entropy method.

use std::sync::atomic::{AtomicU64, Ordering};
use std::time::Instant;

use crate::cost::CostSpec;
use crate::error::check_len;
use crate::riccati::solve_riccati;
use crate::{
    ConstraintKind, ConstraintSpec, Error, ExecMode, LtiSystem, Matrix, NoiseModel, PolicyHandle, Result, Rng, Vector,
};

#[derive(Debug, Clone, PartialEq)]
pub struct CemConfig {
    pub population: usize,
    pub elite_frac: f64,
    pub iterations: usize,
    pub init_std: f64,
    /// Start the search at the LQR input sequence along the mean trajectory
    /// (otherwise at zero).
    pub warm_start: bool,
}

impl Default for CemConfig {
    fn default() -> Self {
        Self {
            population: 200,
            elite_frac: 0.1,
            iterations: 15,
            init_std: 2.0,
            warm_start: true,
        }
    }
}

impl CemConfig {
    pub fn elite_count(&self) -> usize {
        (self.population as f64 * self.elite_frac).round() as usize
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MpcConfig {
    pub scenarios: usize,
    pub horizon: usize,
    /// Penalty per violating scenario successor state.
    pub c_s: f64,
    pub cem: CemConfig,
}

impl Default for MpcConfig {
    fn default() -> Self {
        Self {
            scenarios: 20,
            horizon: 5,
            c_s: 0.0,
            cem: CemConfig::default(),
        }
    }
}

impl MpcConfig {
    pub fn violations(&self) -> Vec<(&'static str, String)> {
        let mut v = Vec::new();
        if self.scenarios == 0 {
            v.push(("scenarios", "must be at least 1".into()));
        }
        if self.horizon == 0 {
            v.push(("horizon", "must be at least 1".into()));
        }
        if !(self.c_s >= 0.0 && self.c_s.is_finite()) {
            v.push(("c_s", format!("{} is not a non-negative number", self.c_s)));
        }
        if self.cem.population == 0 {
            v.push(("population", "must be at least 1".into()));
        }
        if !(self.cem.elite_frac > 0.0 && self.cem.elite_frac <= 1.0) || self.cem.elite_count() == 0 {
            v.push((
                "elite_frac",
                format!("{} leaves no elite out of {}", self.cem.elite_frac, self.cem.population),
            ));
        }
        if !(self.cem.init_std > 0.0) {
            v.push(("init_std", format!("{} is not positive", self.cem.init_std)));
        }
        v
    }

    pub fn validate(&self) -> Result<()> {
        match self.violations().into_iter().next() {
            None => Ok(()),
            Some((field, reason)) => Err(Error::Invalid {
                what: "mpc config",
                reason: format!("{field}: {reason}"),
            }),
        }
    }
}

#[derive(Debug, Clone)]
enum Indicator {
    Quadratic(Vec<f64>),
    Linear(Vec<f64>),
}

/// Scenario objective for a fixed start state and fixed noise draws, laid
/// out as flat row-major slices for the inner loop.
#[derive(Debug, Clone)]
pub struct ScenarioProblem {
    n: usize,
    p: usize,
    horizon: usize,
    scenarios: usize,
    a: Vec<f64>,
    b: Vec<f64>,
    w: Vec<f64>,
    u: Vec<f64>,
    indicator: Indicator,
    epsilon: f64,
    c_s: f64,
    x0: Vec<f64>,
    /// `G w` per scenario and step, `S × T × n`.
    drive: Vec<f64>,
}

fn flat(m: &Matrix) -> Vec<f64> {
    let mut v = Vec::with_capacity(m.len());
    for r in 0..m.nrows() {
        for c in 0..m.ncols() {
            v.push(m[(r, c)]);
        }
    }
    v
}

fn quad(m: &[f64], x: &[f64]) -> f64 {
    let n = x.len();
    let mut acc = 0.0;
    for i in 0..n {
        let row = &m[i * n..(i + 1) * n];
        let mut s = 0.0;
        for j in 0..n {
            s += row[j] * x[j];
        }
        acc += x[i] * s;
    }
    acc
}

impl ScenarioProblem {
    /// `scenarios[s][i]` is the noise vector for scenario `s`, horizon step `i`.
    pub fn new(
        sys: &LtiSystem,
        cost: &CostSpec,
        con: &ConstraintSpec,
        x_t: &Vector,
        scenarios: &[Vec<Vector>],
        c_s: f64,
    ) -> Result<Self> {
        check_len("scenario problem: state", sys.state_dim(), x_t.len())?;
        if scenarios.is_empty() || scenarios[0].is_empty() {
            return Err(Error::invalid("scenarios", "need at least one scenario and one step"));
        }
        let horizon = scenarios[0].len();
        let gain = sys.noise_gain();
        let mut drive = Vec::with_capacity(scenarios.len() * horizon * sys.state_dim());
        for seq in scenarios {
            check_len("scenario length", horizon, seq.len())?;
            for w in seq {
                check_len("scenario noise", sys.noise_dim(), w.len())?;
                drive.extend((&gain * w).iter());
            }
        }
        let indicator = match &con.kind {
            ConstraintKind::Quadratic(q) => Indicator::Quadratic(flat(q)),
            ConstraintKind::Linear(q) => Indicator::Linear(q.iter().copied().collect()),
        };
        Ok(Self {
            n: sys.state_dim(),
            p: sys.input_dim(),
            horizon,
            scenarios: scenarios.len(),
            a: flat(sys.a()),
            b: flat(sys.b()),
            w: flat(cost.w()),
            u: flat(cost.u()),
            indicator,
            epsilon: con.epsilon,
            c_s,
            x0: x_t.iter().copied().collect(),
            drive,
        })
    }

    pub fn horizon(&self) -> usize {
        self.horizon
    }

    pub fn input_dim(&self) -> usize {
        self.p
    }

    fn violated(&self, x: &[f64]) -> bool {
        let v = match &self.indicator {
            Indicator::Quadratic(q) => quad(q, x),
            Indicator::Linear(q) => q.iter().zip(x).map(|(a, b)| a * b).sum(),
        };
        v >= self.epsilon
    }

    /// Objective for the flat `T × p` input sequence.
    ///
    /// Per-scenario totals are summed in sorted order, which makes the result
    /// exactly invariant to the order of the scenarios.
    pub fn cost(&self, u_seq: &[f64]) -> f64 {
        let (n, p) = (self.n, self.p);
        debug_assert_eq!(u_seq.len(), self.horizon * p);
        let input_cost: f64 = (0..self.horizon).map(|i| quad(&self.u, &u_seq[i * p..(i + 1) * p])).sum();
        // B u_i is shared by all scenarios
        let mut bu = vec![0.0; self.horizon * n];
        for i in 0..self.horizon {
            let ui = &u_seq[i * p..(i + 1) * p];
            for r in 0..n {
                bu[i * n + r] = self.b[r * p..(r + 1) * p].iter().zip(ui).map(|(a, b)| a * b).sum();
            }
        }
        let mut totals = Vec::with_capacity(self.scenarios);
        let mut x = vec![0.0; n];
        let mut next = vec![0.0; n];
        for s in 0..self.scenarios {
            x.copy_from_slice(&self.x0);
            let mut total = input_cost;
            for i in 0..self.horizon {
                total += quad(&self.w, &x);
                let d = &self.drive[(s * self.horizon + i) * n..(s * self.horizon + i + 1) * n];
                for r in 0..n {
                    let row = &self.a[r * n..(r + 1) * n];
                    let mut acc = bu[i * n + r] + d[r];
                    for c in 0..n {
                        acc += row[c] * x[c];
                    }
                    next[r] = acc;
                }
                if self.c_s != 0.0 && self.violated(&next) {
                    total += self.c_s;
                }
                std::mem::swap(&mut x, &mut next);
            }
            totals.push(total);
        }
        totals.sort_by(f64::total_cmp);
        totals.iter().sum()
    }
}

/// `Σ_s Σ_{i=1..T} [f(x_i, u_i) + C_s·1{f_c(x_{i+1}) ≥ ε}]` with `x_1 = x_t`.
pub fn scenario_cost(
    sys: &LtiSystem,
    cost: &CostSpec,
    con: &ConstraintSpec,
    x_t: &Vector,
    u_seq: &[Vector],
    scenarios: &[Vec<Vector>],
    c_s: f64,
) -> Result<f64> {
    let prob = ScenarioProblem::new(sys, cost, con, x_t, scenarios, c_s)?;
    check_len("input sequence", prob.horizon(), u_seq.len())?;
    let mut flat_u = Vec::with_capacity(u_seq.len() * sys.input_dim());
    for u in u_seq {
        check_len("input", sys.input_dim(), u.len())?;
        flat_u.extend(u.iter());
    }
    Ok(prob.cost(&flat_u))
}

#[derive(Debug, Clone, PartialEq)]
pub struct PlanResult {
    /// First input of the best sequence.
    pub input: Vector,
    /// Best flat `T × p` sequence found.
    pub sequence: Vec<f64>,
    pub best_cost: f64,
    /// Objective at the initial CEM mean.
    pub initial_cost: f64,
    /// False when no iteration beat the initial mean.
    pub improved: bool,
}

/// Reusable planner: model, configuration and the LQR warm-start gain.
#[derive(Debug, Clone)]
pub struct MpcPlanner {
    sys: LtiSystem,
    noise: NoiseModel,
    cost: CostSpec,
    con: ConstraintSpec,
    cfg: MpcConfig,
    warm: Option<(Matrix, Vector)>,
    mean_drive: Vector,
    exec: ExecMode,
}

impl MpcPlanner {
    pub fn new(
        sys: &LtiSystem,
        noise: &NoiseModel,
        cost: &CostSpec,
        con: &ConstraintSpec,
        cfg: &MpcConfig,
    ) -> Result<Self> {
        cfg.validate()?;
        noise.check_against(sys)?;
        con.check_against(sys)?;
        let warm = if cfg.cem.warm_start {
            let sol = solve_riccati(sys, cost, noise)?;
            Some((sol.gain, sol.offset))
        } else {
            None
        };
        Ok(Self {
            sys: sys.clone(),
            noise: noise.clone(),
            cost: cost.clone(),
            con: con.clone(),
            cfg: cfg.clone(),
            warm,
            mean_drive: sys.noise_gain() * noise.mean(),
            exec: ExecMode::default(),
        })
    }

    pub fn with_exec(mut self, exec: ExecMode) -> Self {
        self.exec = exec;
        self
    }

    pub fn config(&self) -> &MpcConfig {
        &self.cfg
    }

    /// Fresh `S × T` noise draws.
    pub fn draw_scenarios(&self, rng: &mut Rng) -> Vec<Vec<Vector>> {
        (0..self.cfg.scenarios)
            .map(|_| (0..self.cfg.horizon).map(|_| self.noise.sample(rng)).collect())
            .collect()
    }

    fn initial_mean(&self, x: &Vector) -> Vec<f64> {
        let p = self.sys.input_dim();
        match &self.warm {
            None => vec![0.0; self.cfg.horizon * p],
            Some((k, l)) => {
                let mut seq = Vec::with_capacity(self.cfg.horizon * p);
                let mut xm = x.clone();
                for _ in 0..self.cfg.horizon {
                    let u = k * &xm + l;
                    seq.extend(u.iter());
                    xm = self.sys.predict_mean(&xm, &u) + &self.mean_drive;
                }
                seq
            }
        }
    }

    /// Draw scenarios from `rng`, then optimize.
    pub fn plan(&self, x: &Vector, rng: &mut Rng) -> Result<PlanResult> {
        check_len("plan: state", self.sys.state_dim(), x.len())?;
        let scenarios = self.draw_scenarios(rng);
        self.plan_with(x, &scenarios, self.cfg.cem.iterations, rng)
    }

    /// Cross-entropy search against fixed scenarios.
    ///
    /// The best sequence seen so far joins every elite selection, so more
    /// iterations never yield a worse result for the same `rng` state.
    pub fn plan_with(
        &self,
        x: &Vector,
        scenarios: &[Vec<Vector>],
        iterations: usize,
        rng: &mut Rng,
    ) -> Result<PlanResult> {
        let prob = ScenarioProblem::new(&self.sys, &self.cost, &self.con, x, scenarios, self.cfg.c_s)?;
        let cem = &self.cfg.cem;
        let dim = self.cfg.horizon * self.sys.input_dim();
        let elites = cem.elite_count();
        let sanitize = |c: f64| if c.is_nan() { f64::INFINITY } else { c };

        let mut mean = self.initial_mean(x);
        let mut std = vec![cem.init_std; dim];
        let initial_cost = sanitize(prob.cost(&mean));
        let mut best = mean.clone();
        let mut best_cost = initial_cost;

        let mut candidates = vec![0.0; cem.population * dim];
        for _ in 0..iterations {
            for k in 0..cem.population {
                let row = &mut candidates[k * dim..(k + 1) * dim];
                rng.fill_normal(row);
                for j in 0..dim {
                    row[j] = mean[j] + std[j] * row[j];
                }
            }
            let costs = self
                .exec
                .map(cem.population, |k| sanitize(prob.cost(&candidates[k * dim..(k + 1) * dim])));
            // pool index `population` stands for the best-so-far sequence
            let mut order: Vec<usize> = (0..=cem.population).collect();
            let cost_of = |i: usize| if i == cem.population { best_cost } else { costs[i] };
            order.sort_by(|&i, &j| cost_of(i).total_cmp(&cost_of(j)).then(i.cmp(&j)));
            let elite_rows: Vec<&[f64]> = order[..elites]
                .iter()
                .map(|&i| {
                    if i == cem.population {
                        best.as_slice()
                    } else {
                        &candidates[i * dim..(i + 1) * dim]
                    }
                })
                .collect();
            for j in 0..dim {
                let m = elite_rows.iter().map(|r| r[j]).sum::<f64>() / elites as f64;
                let v = elite_rows.iter().map(|r| (r[j] - m) * (r[j] - m)).sum::<f64>() / elites as f64;
                mean[j] = m;
                std[j] = v.sqrt() + 1e-6;
            }
            let top = order[0];
            if top != cem.population && costs[top] < best_cost {
                best_cost = costs[top];
                best.copy_from_slice(&candidates[top * dim..(top + 1) * dim]);
            }
        }

        let p = self.sys.input_dim();
        Ok(PlanResult {
            input: Vector::from_column_slice(&best[..p]),
            sequence: best,
            best_cost,
            initial_cost,
            improved: best_cost < initial_cost,
        })
    }
}

/// One planning call: `u_{1|t}` for state `x_t`.
pub fn plan(
    sys: &LtiSystem,
    noise: &NoiseModel,
    cost: &CostSpec,
    con: &ConstraintSpec,
    x_t: &Vector,
    cfg: &MpcConfig,
    rng: &mut Rng,
) -> Result<PlanResult> {
    MpcPlanner::new(sys, noise, cost, con, cfg)?.plan(x_t, rng)
}

/// Receding-horizon policy with per-call runtime accounting.
#[derive(Debug)]
pub struct MpcPolicy {
    planner: MpcPlanner,
    calls: AtomicU64,
    nanos: AtomicU64,
    stalled: AtomicU64,
}

impl MpcPolicy {
    pub fn new(planner: MpcPlanner) -> Self {
        Self {
            planner,
            calls: AtomicU64::new(0),
            nanos: AtomicU64::new(0),
            stalled: AtomicU64::new(0),
        }
    }

    pub fn planner(&self) -> &MpcPlanner {
        &self.planner
    }

    pub fn act(&self, x: &Vector, rng: &mut Rng) -> Vector {
        let start = Instant::now();
        let result = self.planner.plan(x, rng);
        self.nanos.fetch_add(start.elapsed().as_nanos() as u64, Ordering::Relaxed);
        self.calls.fetch_add(1, Ordering::Relaxed);
        match result {
            Ok(r) => {
                if !r.improved {
                    self.stalled.fetch_add(1, Ordering::Relaxed);
                }
                r.input
            }
            // dimensions are checked when the policy is built, so this is a
            // state-vector mismatch from the caller
            Err(e) => panic!("MPC planning failed: {e}"),
        }
    }

    pub fn calls(&self) -> u64 {
        self.calls.load(Ordering::Relaxed)
    }

    /// Planning calls in which the optimizer never beat its initial mean.
    pub fn stalled_calls(&self) -> u64 {
        self.stalled.load(Ordering::Relaxed)
    }

    pub fn mean_call_seconds(&self) -> f64 {
        let calls = self.calls();
        if calls == 0 {
            0.0
        } else {
            self.nanos.load(Ordering::Relaxed) as f64 * 1e-9 / calls as f64
        }
    }
}

pub fn mpc_policy(
    sys: &LtiSystem,
    noise: &NoiseModel,
    cost: &CostSpec,
    con: &ConstraintSpec,
    cfg: &MpcConfig,
) -> Result<PolicyHandle> {
    Ok(PolicyHandle::Mpc(std::sync::Arc::new(MpcPolicy::new(MpcPlanner::new(
        sys, noise, cost, con, cfg,
    )?))))
}

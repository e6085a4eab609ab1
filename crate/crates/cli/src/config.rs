//! Experiment configuration: a TOML document with explicit matrix literals.
//!
//! Parsing is two-stage. The text is first deserialized into plain blocks
//! (so `--set` overrides can be applied to the raw tree), then every block
//! is checked and converted into the core types. Validation collects all
//! violations with their field paths instead of stopping at the first.

use std::fmt;
use std::path::Path;

use anyhow::Context;
use riskctl_core::ddpg::{DdpgConfig, SafetyStrategy};
use riskctl_core::eval::InitialState;
use riskctl_core::linalg::{cholesky_lower, is_symmetric};
use riskctl_core::mpc::{CemConfig, MpcConfig};
use riskctl_core::{
    ConstraintKind, ConstraintSpec, CostSpec, EvalProtocol, LtiSystem, Matrix, NoiseInjection, NoiseModel, Rng,
    Vector,
};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Injection {
    /// `x' = Ax + Bu + w`.
    State,
    /// `x' = Ax + B(u + w)`.
    Input,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SystemBlock {
    pub a: Vec<Vec<f64>>,
    pub b: Vec<Vec<f64>>,
    pub injection: Injection,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ComponentBlock {
    pub weight: f64,
    pub mean: Vec<f64>,
    pub cov: Vec<Vec<f64>>,
}

/// Either a single Gaussian (`mean`, `cov`) or a mixture (`components`).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NoiseBlock {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mean: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cov: Option<Vec<Vec<f64>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub components: Option<Vec<ComponentBlock>>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ConstraintForm {
    Quadratic,
    Linear,
}

impl ConstraintForm {
    pub fn parse(s: &str) -> anyhow::Result<Self> {
        match s {
            "quadratic" => Ok(Self::Quadratic),
            "linear" => Ok(Self::Linear),
            other => anyhow::bail!("unknown constraint form '{other}' (expected quadratic or linear)"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct QuadraticBlock {
    pub q: Vec<Vec<f64>>,
    pub epsilon: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LinearBlock {
    pub q: Vec<f64>,
    pub epsilon: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConstraintBlock {
    pub active: ConstraintForm,
    pub delta: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub quadratic: Option<QuadraticBlock>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub linear: Option<LinearBlock>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CostBlock {
    pub w: Vec<Vec<f64>>,
    pub u: Vec<Vec<f64>>,
    #[serde(default)]
    pub c_l: f64,
    #[serde(default = "default_gamma")]
    pub gamma: f64,
}

fn default_gamma() -> f64 {
    0.99
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct DdpgBlock {
    pub hidden: Vec<usize>,
    pub tau: f64,
    pub actor_lr: f64,
    pub critic_lr: f64,
    pub batch_size: usize,
    pub episodes: usize,
    pub steps: usize,
    pub var_initial: f64,
    pub var_final: f64,
    pub buffer_capacity: usize,
    pub reward_scale: f64,
    pub x_max: f64,
    pub safety: String,
}

impl Default for DdpgBlock {
    fn default() -> Self {
        let d = DdpgConfig::default();
        Self {
            hidden: d.hidden,
            tau: d.tau,
            actor_lr: d.actor_lr,
            critic_lr: d.critic_lr,
            batch_size: d.batch_size,
            episodes: d.episodes,
            steps: d.steps,
            var_initial: d.var_initial,
            var_final: d.var_final,
            buffer_capacity: d.buffer_capacity,
            reward_scale: d.reward_scale,
            x_max: d.x_max,
            safety: d.safety.label().to_string(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct MpcBlock {
    pub scenarios: usize,
    pub horizon: usize,
    pub c_s: f64,
    pub population: usize,
    pub elite_frac: f64,
    pub iterations: usize,
    pub init_std: f64,
    pub warm_start: bool,
}

impl Default for MpcBlock {
    fn default() -> Self {
        let d = MpcConfig::default();
        Self {
            scenarios: d.scenarios,
            horizon: d.horizon,
            c_s: d.c_s,
            population: d.cem.population,
            elite_frac: d.cem.elite_frac,
            iterations: d.cem.iterations,
            init_std: d.cem.init_std,
            warm_start: d.cem.warm_start,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct EvalBlock {
    pub trials: usize,
    pub steps: usize,
    /// Fixed initial state; the zero vector when absent.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub x0: Option<Vec<f64>>,
    /// Budget for planning policies, which are far more expensive per step.
    pub mpc_trials: usize,
    pub mpc_steps: usize,
}

impl Default for EvalBlock {
    fn default() -> Self {
        Self {
            trials: 100,
            steps: 1000,
            x0: None,
            mpc_trials: 20,
            mpc_steps: 500,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct GridBlock {
    pub c_l: Vec<f64>,
}

impl Default for GridBlock {
    fn default() -> Self {
        Self {
            c_l: vec![0.0, 1.0, 10.0, 100.0, 1000.0],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SweepBlock {
    /// Zero-based state component that is varied.
    pub component: usize,
    pub lo: f64,
    pub hi: f64,
    pub points: usize,
}

impl Default for SweepBlock {
    fn default() -> Self {
        Self {
            component: 0,
            lo: -10.0,
            hi: 10.0,
            points: 201,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct AuditBlock {
    pub pairs: usize,
    pub draws: usize,
    pub x_range: f64,
    pub u_range: f64,
}

impl Default for AuditBlock {
    fn default() -> Self {
        Self {
            pairs: 100,
            draws: 100_000,
            x_range: 5.0,
            u_range: 5.0,
        }
    }
}

fn default_output_dir() -> String {
    "out".into()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    #[serde(default)]
    pub name: String,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_output_dir")]
    pub output_dir: String,
    pub system: SystemBlock,
    pub noise: NoiseBlock,
    pub constraint: ConstraintBlock,
    pub cost: CostBlock,
    #[serde(default)]
    pub ddpg: DdpgBlock,
    #[serde(default)]
    pub mpc: MpcBlock,
    #[serde(default)]
    pub eval: EvalBlock,
    #[serde(default)]
    pub grid: GridBlock,
    #[serde(default)]
    pub sweep: SweepBlock,
    #[serde(default)]
    pub audit: AuditBlock,
}

/// One violated invariant.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Violation {
    pub path: String,
    pub message: String,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.path, self.message)
    }
}

/// Everything a command needs, built from a validated config.
#[derive(Debug, Clone)]
pub struct Experiment {
    pub config: ExperimentConfig,
    pub system: LtiSystem,
    pub noise: NoiseModel,
    pub constraint: ConstraintSpec,
    pub cost: CostSpec,
    pub ddpg: DdpgConfig,
    pub mpc: MpcConfig,
    pub eval: EvalProtocol,
    pub mpc_eval: EvalProtocol,
}

/// Apply `key=value` overrides to a parsed TOML tree. Values are read as
/// TOML (numbers, booleans, arrays); anything else is taken as a string.
/// A numeric key segment indexes into an array, e.g. `noise.components.1.weight`.
pub fn apply_overrides(doc: &mut toml::Table, overrides: &[String]) -> anyhow::Result<()> {
    for item in overrides {
        let (key, raw) = item
            .split_once('=')
            .with_context(|| format!("override '{item}' is not of the form key=value"))?;
        let value: toml::Value = match toml::from_str::<toml::Table>(&format!("v = {raw}")) {
            Ok(mut t) => t.remove("v").expect("parsed key"),
            Err(_) => toml::Value::String(raw.to_string()),
        };
        let key = key.trim();
        let parts: Vec<&str> = key.split('.').collect();
        let (last, parents) = parts.split_last().expect("split yields at least one part");
        let mut root = toml::Value::Table(std::mem::take(doc));
        let result = (|| {
            let mut node = &mut root;
            for part in parents {
                node = child(node, key, part)?;
            }
            match node {
                toml::Value::Table(t) => {
                    t.insert(last.to_string(), value);
                }
                other => *child(other, key, last)? = value,
            }
            anyhow::Ok(())
        })();
        if let toml::Value::Table(t) = root {
            *doc = t;
        }
        result?;
    }
    Ok(())
}

/// The entry `part` of a table (created empty if missing) or the element
/// at index `part` of an array.
fn child<'a>(node: &'a mut toml::Value, key: &str, part: &str) -> anyhow::Result<&'a mut toml::Value> {
    match node {
        toml::Value::Table(t) => Ok(t
            .entry(part.to_string())
            .or_insert_with(|| toml::Value::Table(toml::Table::new()))),
        toml::Value::Array(a) => {
            let len = a.len();
            let idx: usize = part
                .parse()
                .with_context(|| format!("override '{key}': '{part}' is not an array index"))?;
            a.get_mut(idx)
                .with_context(|| format!("override '{key}': index {idx} out of range (length {len})"))
        }
        _ => anyhow::bail!("override '{key}': cannot descend into a scalar at '{part}'"),
    }
}

pub fn parse_config(text: &str, overrides: &[String]) -> anyhow::Result<ExperimentConfig> {
    let mut doc: toml::Table = toml::from_str(text).map_err(|e| anyhow::anyhow!("config parse error: {e}"))?;
    apply_overrides(&mut doc, overrides)?;
    ExperimentConfig::deserialize(doc).map_err(|e| anyhow::anyhow!("config parse error: {e}"))
}

pub fn load_config(path: &Path, overrides: &[String]) -> anyhow::Result<ExperimentConfig> {
    let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    parse_config(&text, overrides)
}

/// The config with every default filled in, as TOML.
pub fn resolved_toml(cfg: &ExperimentConfig) -> String {
    toml::to_string(cfg).expect("config serializes")
}

struct Checker {
    found: Vec<Violation>,
}

impl Checker {
    fn push(&mut self, path: impl Into<String>, message: impl Into<String>) {
        self.found.push(Violation {
            path: path.into(),
            message: message.into(),
        });
    }

    fn matrix(&mut self, path: &str, rows: &[Vec<f64>]) -> Option<Matrix> {
        if rows.is_empty() || rows[0].is_empty() {
            self.push(path, "matrix is empty");
            return None;
        }
        if rows.iter().any(|r| r.len() != rows[0].len()) {
            self.push(path, "rows have different lengths");
            return None;
        }
        if rows.iter().flatten().any(|v| !v.is_finite()) {
            self.push(path, "entries must be finite");
            return None;
        }
        let flat: Vec<f64> = rows.iter().flatten().copied().collect();
        Some(Matrix::from_row_slice(rows.len(), rows[0].len(), &flat))
    }

    fn spd(&mut self, path: &str, rows: &[Vec<f64>], dim: Option<usize>) -> Option<Matrix> {
        let m = self.matrix(path, rows)?;
        if !m.is_square() {
            self.push(path, format!("must be square, got {}×{}", m.nrows(), m.ncols()));
            return None;
        }
        if let Some(d) = dim {
            if m.nrows() != d {
                self.push(path, format!("must be {d}×{d}, got {0}×{0}", m.nrows()));
                return None;
            }
        }
        if !is_symmetric(&m, 1e-12) {
            self.push(path, "must be symmetric");
            return None;
        }
        if cholesky_lower(&m, "matrix").is_err() {
            self.push(path, "must be positive definite");
            return None;
        }
        Some(m)
    }

    fn vector(&mut self, path: &str, v: &[f64], dim: Option<usize>) -> Option<Vector> {
        if let Some(d) = dim {
            if v.len() != d {
                self.push(path, format!("must have {d} entries, got {}", v.len()));
                return None;
            }
        }
        if v.iter().any(|x| !x.is_finite()) {
            self.push(path, "entries must be finite");
            return None;
        }
        Some(Vector::from_column_slice(v))
    }

    fn fields(&mut self, block: &str, list: Vec<(&'static str, String)>) {
        for (field, msg) in list {
            self.push(format!("{block}.{field}"), msg);
        }
    }
}

impl ExperimentConfig {
    pub fn ddpg_config(&self) -> DdpgConfig {
        let d = &self.ddpg;
        DdpgConfig {
            hidden: d.hidden.clone(),
            tau: d.tau,
            actor_lr: d.actor_lr,
            critic_lr: d.critic_lr,
            gamma: self.cost.gamma,
            batch_size: d.batch_size,
            episodes: d.episodes,
            steps: d.steps,
            var_initial: d.var_initial,
            var_final: d.var_final,
            buffer_capacity: d.buffer_capacity,
            seed: ddpg_seed(self.seed),
            reward_scale: d.reward_scale,
            x_max: d.x_max,
            safety: if d.safety == "terminate" {
                SafetyStrategy::Terminate
            } else {
                SafetyStrategy::Backup
            },
        }
    }

    pub fn mpc_config(&self) -> MpcConfig {
        let m = &self.mpc;
        MpcConfig {
            scenarios: m.scenarios,
            horizon: m.horizon,
            c_s: m.c_s,
            cem: CemConfig {
                population: m.population,
                elite_frac: m.elite_frac,
                iterations: m.iterations,
                init_std: m.init_std,
                warm_start: m.warm_start,
            },
        }
    }

    fn protocol(&self, trials: usize, steps: usize) -> EvalProtocol {
        EvalProtocol {
            trials,
            steps,
            x0: match &self.eval.x0 {
                Some(v) => InitialState::Fixed(Vector::from_column_slice(v)),
                None => InitialState::Zero,
            },
            seed: self.seed,
        }
    }

    /// Every violated invariant; empty iff [`ExperimentConfig::build`] succeeds.
    pub fn violations(&self) -> Vec<Violation> {
        match self.check() {
            Ok(_) => Vec::new(),
            Err(v) => v,
        }
    }

    pub fn build(&self) -> Result<Experiment, Vec<Violation>> {
        self.check()
    }

    fn check(&self) -> Result<Experiment, Vec<Violation>> {
        let mut c = Checker { found: Vec::new() };

        let a = c.matrix("system.a", &self.system.a);
        let b = c.matrix("system.b", &self.system.b);
        let mut dims = None;
        if let (Some(a), Some(b)) = (&a, &b) {
            if !a.is_square() {
                c.push("system.a", format!("must be square, got {}×{}", a.nrows(), a.ncols()));
            } else if b.nrows() != a.nrows() {
                c.push("system.b", format!("must have {} rows, got {}", a.nrows(), b.nrows()));
            } else {
                dims = Some((a.nrows(), b.ncols()));
            }
        }
        let n = dims.map(|d| d.0);
        let p = dims.map(|d| d.1);
        let injection = match self.system.injection {
            Injection::State => NoiseInjection::StateAdditive,
            Injection::Input => NoiseInjection::ThroughInput,
        };
        let system = match (a, b, dims) {
            (Some(a), Some(b), Some(_)) => LtiSystem::new(a, b, injection).ok(),
            _ => None,
        };
        let noise_dim = match injection {
            NoiseInjection::StateAdditive => n,
            NoiseInjection::ThroughInput => p,
        };

        // noise
        let noise = {
            let nb = &self.noise;
            let triples: Option<Vec<(f64, Vector, Matrix)>> = match (&nb.components, &nb.mean, &nb.cov) {
                (Some(comps), None, None) => {
                    if comps.is_empty() {
                        c.push("noise.components", "mixture has no components");
                        None
                    } else {
                        let mut out = Some(Vec::new());
                        for (i, comp) in comps.iter().enumerate() {
                            let base = format!("noise.components[{i}]");
                            if !(comp.weight > 0.0 && comp.weight <= 1.0) {
                                c.push(format!("{base}.weight"), format!("{} is not in (0, 1]", comp.weight));
                                out = None;
                            }
                            let mean = c.vector(&format!("{base}.mean"), &comp.mean, noise_dim);
                            let cov = c.spd(&format!("{base}.cov"), &comp.cov, Some(comp.mean.len()));
                            match (mean, cov, out.as_mut()) {
                                (Some(m), Some(s), Some(v)) => v.push((comp.weight, m, s)),
                                _ => out = None,
                            }
                        }
                        let total: f64 = comps.iter().map(|c| c.weight).sum();
                        if (total - 1.0).abs() > 1e-12 {
                            c.push("noise.components", format!("weights sum to {total}, not 1"));
                            out = None;
                        }
                        out
                    }
                }
                (None, Some(mean), Some(cov)) => {
                    let m = c.vector("noise.mean", mean, noise_dim);
                    let s = c.spd("noise.cov", cov, Some(mean.len()));
                    match (m, s) {
                        (Some(m), Some(s)) => Some(vec![(1.0, m, s)]),
                        _ => None,
                    }
                }
                _ => {
                    c.push("noise", "give either mean and cov, or components (not both)");
                    None
                }
            };
            triples.and_then(|t| {
                if nb.components.is_some() {
                    NoiseModel::mixture(t).ok()
                } else {
                    let (_, m, s) = t.into_iter().next().unwrap();
                    NoiseModel::gaussian(m, s).ok()
                }
            })
        };
        if let Some(noise) = &noise {
            if injection == NoiseInjection::StateAdditive && !noise.is_zero_mean() {
                c.push("noise", "state-additive noise must have zero mean");
            }
        }

        // constraint
        let cb = &self.constraint;
        if !(cb.delta > 0.0 && cb.delta < 1.0) {
            c.push("constraint.delta", format!("{} is not in (0, 1)", cb.delta));
        }
        let mut kinds: Vec<(ConstraintForm, Option<(ConstraintKind, f64)>)> = Vec::new();
        if let Some(qb) = &cb.quadratic {
            let q = c.spd("constraint.quadratic.q", &qb.q, n);
            if !(qb.epsilon > 0.0 && qb.epsilon.is_finite()) {
                c.push("constraint.quadratic.epsilon", format!("{} is not positive", qb.epsilon));
            }
            kinds.push((ConstraintForm::Quadratic, q.map(|q| (ConstraintKind::Quadratic(q), qb.epsilon))));
        }
        if let Some(lb) = &cb.linear {
            let q = c.vector("constraint.linear.q", &lb.q, n);
            if let Some(q) = &q {
                if q.iter().all(|v| *v == 0.0) {
                    c.push("constraint.linear.q", "must not be the zero vector");
                }
            }
            if !(lb.epsilon > 0.0 && lb.epsilon.is_finite()) {
                c.push("constraint.linear.epsilon", format!("{} is not positive", lb.epsilon));
            }
            kinds.push((ConstraintForm::Linear, q.map(|q| (ConstraintKind::Linear(q), lb.epsilon))));
        }
        let active = kinds.iter().find(|(f, _)| *f == cb.active);
        if active.is_none() {
            let name = match cb.active {
                ConstraintForm::Quadratic => "constraint.quadratic",
                ConstraintForm::Linear => "constraint.linear",
            };
            c.push(name, "the active constraint form has no block");
        }
        let constraint = active
            .and_then(|(_, k)| k.clone())
            .and_then(|(kind, eps)| ConstraintSpec::new(kind, eps, cb.delta).ok());

        // cost
        let w = c.spd("cost.w", &self.cost.w, n);
        let u = c.spd("cost.u", &self.cost.u, p);
        if !(self.cost.c_l >= 0.0 && self.cost.c_l.is_finite()) {
            c.push("cost.c_l", format!("{} is not a non-negative number", self.cost.c_l));
        }
        if !(self.cost.gamma > 0.0 && self.cost.gamma < 1.0) {
            c.push("cost.gamma", format!("{} is not in (0, 1)", self.cost.gamma));
        }
        let cost = match (w, u) {
            (Some(w), Some(u)) => CostSpec::new(w, u, self.cost.c_l, self.cost.gamma).ok(),
            _ => None,
        };

        // algorithm blocks
        let ddpg = self.ddpg_config();
        if !matches!(self.ddpg.safety.as_str(), "backup" | "terminate") {
            c.push("ddpg.safety", format!("'{}' is not backup or terminate", self.ddpg.safety));
        }
        c.fields("ddpg", ddpg.violations().into_iter().filter(|(f, _)| *f != "gamma").collect());
        let mpc = self.mpc_config();
        c.fields("mpc", mpc.violations());
        let eval = self.protocol(self.eval.trials, self.eval.steps);
        c.fields("eval", eval.violations());
        let mpc_eval = self.protocol(self.eval.mpc_trials, self.eval.mpc_steps);
        c.fields(
            "eval",
            mpc_eval
                .violations()
                .into_iter()
                .filter(|(f, _)| *f != "x0")
                .map(|(f, m)| (if f == "trials" { "mpc_trials" } else { "mpc_steps" }, m))
                .collect(),
        );
        if let Some(x0) = &self.eval.x0 {
            c.vector("eval.x0", x0, n);
        }
        if self.grid.c_l.is_empty() {
            c.push("grid.c_l", "grid is empty");
        } else if self.grid.c_l.windows(2).any(|w| !(w[0] < w[1])) || self.grid.c_l[0] < 0.0 {
            c.push("grid.c_l", "values must be non-negative and strictly ascending");
        }
        if let Some(n) = n {
            if self.sweep.component >= n {
                c.push("sweep.component", format!("{} is out of range for {n} states", self.sweep.component));
            }
        }
        if self.sweep.points < 2 || !(self.sweep.lo < self.sweep.hi) {
            c.push("sweep", "need at least 2 points on a non-empty range");
        }
        if self.audit.pairs == 0 || self.audit.draws == 0 {
            c.push("audit", "pairs and draws must be positive");
        }
        if !(self.audit.x_range >= 0.0 && self.audit.u_range >= 0.0) {
            c.push("audit", "ranges must be non-negative");
        }

        if !c.found.is_empty() {
            return Err(c.found);
        }
        match (system, noise, constraint, cost) {
            (Some(system), Some(noise), Some(constraint), Some(cost)) => Ok(Experiment {
                config: self.clone(),
                system,
                noise,
                constraint,
                cost,
                ddpg,
                mpc,
                eval,
                mpc_eval,
            }),
            _ => Err(vec![Violation {
                path: "config".into(),
                message: "inconsistent model blocks".into(),
            }]),
        }
    }
}

/// Training seed derived from the experiment seed, so training and evaluation
/// never share a random stream.
pub fn ddpg_seed(seed: u64) -> u64 {
    Rng::new(seed).stream(0xDD96).key()
}

impl Experiment {
    /// Same experiment with the other constraint form active.
    pub fn with_constraint(&self, form: ConstraintForm) -> Result<Experiment, Vec<Violation>> {
        let mut cfg = self.config.clone();
        cfg.constraint.active = form;
        cfg.build()
    }
}

//! Plant model, process noise and trajectory simulation.

use crate::error::check_len;
use crate::linalg::cholesky_lower;
use crate::{Error, Matrix, PolicyHandle, Result, Rng, Vector};

/// A state component beyond this magnitude marks a trajectory as diverged.
pub const DIVERGENCE_LIMIT: f64 = 1e8;

/// Where the process noise enters the plant.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NoiseInjection {
    /// `x' = A x + B u + w`, `w` has the state dimension.
    StateAdditive,
    /// `x' = A x + B u + B w`, `w` has the input dimension.
    ThroughInput,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LtiSystem {
    a: Matrix,
    b: Matrix,
    injection: NoiseInjection,
}

impl LtiSystem {
    pub fn new(a: Matrix, b: Matrix, injection: NoiseInjection) -> Result<Self> {
        if !a.is_square() || a.nrows() == 0 {
            return Err(Error::invalid("system.a", "A must be a non-empty square matrix"));
        }
        if b.nrows() != a.nrows() || b.ncols() == 0 {
            return Err(Error::invalid(
                "system.b",
                format!("B must be {}×p with p ≥ 1, got {}×{}", a.nrows(), b.nrows(), b.ncols()),
            ));
        }
        if a.iter().chain(b.iter()).any(|v| !v.is_finite()) {
            return Err(Error::invalid("system", "A and B must be finite"));
        }
        Ok(Self { a, b, injection })
    }

    pub fn a(&self) -> &Matrix {
        &self.a
    }

    pub fn b(&self) -> &Matrix {
        &self.b
    }

    pub fn injection(&self) -> NoiseInjection {
        self.injection
    }

    pub fn state_dim(&self) -> usize {
        self.a.nrows()
    }

    pub fn input_dim(&self) -> usize {
        self.b.ncols()
    }

    pub fn noise_dim(&self) -> usize {
        match self.injection {
            NoiseInjection::StateAdditive => self.state_dim(),
            NoiseInjection::ThroughInput => self.input_dim(),
        }
    }

    /// Matrix mapping a noise draw into the state: `I` or `B`.
    pub fn noise_gain(&self) -> Matrix {
        match self.injection {
            NoiseInjection::StateAdditive => Matrix::identity(self.state_dim(), self.state_dim()),
            NoiseInjection::ThroughInput => self.b.clone(),
        }
    }

    /// Noise-free successor `A x + B u`.
    pub fn predict_mean(&self, x: &Vector, u: &Vector) -> Vector {
        &self.a * x + &self.b * u
    }

    /// One plant transition.
    pub fn step(&self, x: &Vector, u: &Vector, w: &Vector) -> Result<Vector> {
        check_len("step: state", self.state_dim(), x.len())?;
        check_len("step: input", self.input_dim(), u.len())?;
        check_len("step: noise", self.noise_dim(), w.len())?;
        Ok(self.advance(x, u, w))
    }

    /// [`step`](Self::step) without dimension checks.
    pub(crate) fn advance(&self, x: &Vector, u: &Vector, w: &Vector) -> Vector {
        match self.injection {
            NoiseInjection::StateAdditive => &self.a * x + &self.b * u + w,
            NoiseInjection::ThroughInput => &self.a * x + &self.b * (u + w),
        }
    }
}

/// Multivariate normal with a validated covariance.
#[derive(Debug, Clone, PartialEq)]
pub struct Gaussian {
    mean: Vector,
    cov: Matrix,
    chol: Matrix,
}

impl Gaussian {
    pub fn new(mean: Vector, cov: Matrix) -> Result<Self> {
        if cov.nrows() != mean.len() || !cov.is_square() {
            return Err(Error::invalid(
                "noise covariance",
                format!("expected {0}×{0}, got {1}×{2}", mean.len(), cov.nrows(), cov.ncols()),
            ));
        }
        if mean.iter().any(|v| !v.is_finite()) {
            return Err(Error::invalid("noise mean", "entries must be finite"));
        }
        let chol = cholesky_lower(&cov, "noise covariance")?;
        Ok(Self { mean, cov, chol })
    }

    pub fn mean(&self) -> &Vector {
        &self.mean
    }

    pub fn cov(&self) -> &Matrix {
        &self.cov
    }

    pub fn dim(&self) -> usize {
        self.mean.len()
    }

    pub fn sample(&self, rng: &mut Rng) -> Vector {
        let z = rng.normal_vector(self.dim());
        &self.mean + &self.chol * z
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MixtureComponent {
    pub weight: f64,
    pub dist: Gaussian,
}

/// Process-noise distribution `f_w`.
#[derive(Debug, Clone, PartialEq)]
pub enum NoiseModel {
    Gaussian(Gaussian),
    Mixture(Vec<MixtureComponent>),
}

impl NoiseModel {
    pub fn gaussian(mean: Vector, cov: Matrix) -> Result<Self> {
        Ok(NoiseModel::Gaussian(Gaussian::new(mean, cov)?))
    }

    /// Gaussian mixture from `(weight, mean, covariance)` triples.
    ///
    /// Weights must lie in `(0, 1]` and sum to one within `1e-12`; a weight of
    /// one is only possible for a single component.
    pub fn mixture(components: Vec<(f64, Vector, Matrix)>) -> Result<Self> {
        if components.is_empty() {
            return Err(Error::invalid("noise mixture", "at least one component is required"));
        }
        let dim = components[0].1.len();
        let mut out = Vec::with_capacity(components.len());
        for (weight, mean, cov) in components {
            if !(weight > 0.0 && weight <= 1.0) {
                return Err(Error::invalid("noise mixture", format!("weight {weight} outside (0, 1]")));
            }
            if mean.len() != dim {
                return Err(Error::invalid("noise mixture", "components have different dimensions"));
            }
            out.push(MixtureComponent {
                weight,
                dist: Gaussian::new(mean, cov)?,
            });
        }
        let total: f64 = out.iter().map(|c| c.weight).sum();
        if (total - 1.0).abs() > 1e-12 {
            return Err(Error::invalid("noise mixture", format!("weights sum to {total}, not 1")));
        }
        Ok(NoiseModel::Mixture(out))
    }

    pub fn dim(&self) -> usize {
        match self {
            NoiseModel::Gaussian(g) => g.dim(),
            NoiseModel::Mixture(c) => c[0].dist.dim(),
        }
    }

    /// `(weight, component)` pairs; a plain Gaussian is one component of weight 1.
    pub fn components(&self) -> Vec<(f64, &Gaussian)> {
        match self {
            NoiseModel::Gaussian(g) => vec![(1.0, g)],
            NoiseModel::Mixture(c) => c.iter().map(|c| (c.weight, &c.dist)).collect(),
        }
    }

    /// `E[w] = Σ π_j μ_j`.
    pub fn mean(&self) -> Vector {
        let mut m = Vector::zeros(self.dim());
        for (w, g) in self.components() {
            m += w * g.mean();
        }
        m
    }

    pub fn is_zero_mean(&self) -> bool {
        self.components().iter().all(|(_, g)| g.mean().iter().all(|&v| v == 0.0))
    }

    /// One draw. A mixture picks its component first; a single-component
    /// mixture skips that draw so it reproduces the Gaussian stream exactly.
    pub fn sample(&self, rng: &mut Rng) -> Vector {
        self.sample_indexed(rng).1
    }

    /// One draw together with the index of the component it came from.
    pub fn sample_indexed(&self, rng: &mut Rng) -> (usize, Vector) {
        match self {
            NoiseModel::Gaussian(g) => (0, g.sample(rng)),
            NoiseModel::Mixture(c) if c.len() == 1 => (0, c[0].dist.sample(rng)),
            NoiseModel::Mixture(c) => {
                let u = rng.uniform();
                let mut acc = 0.0;
                let mut pick = c.len() - 1;
                for (j, comp) in c.iter().enumerate() {
                    acc += comp.weight;
                    if u < acc {
                        pick = j;
                        break;
                    }
                }
                (pick, c[pick].dist.sample(rng))
            }
        }
    }

    /// Check the noise dimension against the plant.
    pub fn check_against(&self, sys: &LtiSystem) -> Result<()> {
        if self.dim() != sys.noise_dim() {
            return Err(Error::invalid(
                "noise",
                format!(
                    "dimension {} does not match the plant's noise dimension {}",
                    self.dim(),
                    sys.noise_dim()
                ),
            ));
        }
        Ok(())
    }
}

/// Stored experience `(x, u, r, x')`. `terminal` marks a transition after
/// which no bootstrapping is allowed.
#[derive(Debug, Clone, PartialEq)]
pub struct Transition {
    pub x: Vector,
    pub u: Vector,
    pub reward: f64,
    pub x_next: Vector,
    pub terminal: bool,
}

#[derive(Debug, Clone)]
pub struct Rollout {
    pub transitions: Vec<Transition>,
    pub diverged: bool,
}

pub(crate) fn is_diverged(x: &Vector) -> bool {
    x.iter().any(|v| !v.is_finite() || v.abs() > DIVERGENCE_LIMIT)
}

/// Simulate `steps` transitions under `policy`.
///
/// `reward(x, u, x')` fills the reward field. The rollout stops early, with
/// `diverged` set, once a state leaves the [`DIVERGENCE_LIMIT`] box.
pub fn rollout<F>(
    sys: &LtiSystem,
    noise: &NoiseModel,
    policy: &PolicyHandle,
    x0: &Vector,
    steps: usize,
    rng: &mut Rng,
    mut reward: F,
) -> Result<Rollout>
where
    F: FnMut(&Vector, &Vector, &Vector) -> Result<f64>,
{
    if steps == 0 {
        return Err(Error::invalid("rollout", "steps must be at least 1"));
    }
    noise.check_against(sys)?;
    check_len("rollout: x0", sys.state_dim(), x0.len())?;
    let mut policy_rng = rng.fork();
    let mut x = x0.clone();
    let mut transitions = Vec::with_capacity(steps);
    for _ in 0..steps {
        let u = policy.act(&x, &mut policy_rng);
        let w = noise.sample(rng);
        let x_next = sys.step(&x, &u, &w)?;
        let r = reward(&x, &u, &x_next)?;
        let diverged = is_diverged(&x_next);
        transitions.push(Transition {
            x,
            u,
            reward: r,
            x_next: x_next.clone(),
            terminal: diverged,
        });
        if diverged {
            return Ok(Rollout {
                transitions,
                diverged: true,
            });
        }
        x = x_next;
    }
    Ok(Rollout {
        transitions,
        diverged: false,
    })
}

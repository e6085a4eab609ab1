//! Probability of the risky event `f_c(x') ≥ ε` given the current state and
//! input.
//!
//! Quadratic events `x'ᵀQx' ≥ ε` get a Chernoff bound built on the closed-form
//! MGF of a Gaussian quadratic form (mixtures: weighted sum of component
//! MGFs under a shared `s`). Linear events `qᵀx' ≥ ε` get the exact tail
//! probability of a Gaussian or Gaussian-mixture scalar.
//!
//! Noise enters as `G w` with `G = I` or `G = B`, so the quadratic form seen
//! by the noise is `Q_g = GᵀQG` with linear term `a = 2GᵀQx̂`.

use crate::dynamics::Gaussian;
use crate::error::check_len;
use crate::exec::ExecMode;
use crate::linalg::{cholesky_lower, is_symmetric, quad_form, symmetric_eigen, symmetric_sqrt};
use crate::{Error, LtiSystem, Matrix, NoiseInjection, NoiseModel, Result, Rng, Vector};

/// Upper end of the `s` search when no eigenvalue limits the MGF domain.
const S_MAX_CAP: f64 = 1e3;
/// Fraction of `s_max` the infimum search may approach.
const S_BRACKET: f64 = 0.999_999;
const S_TOL: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq)]
pub enum ConstraintKind {
    /// `f_c(x) = xᵀQx`, `Q` symmetric positive definite.
    Quadratic(Matrix),
    /// `f_c(x) = qᵀx`.
    Linear(Vector),
}

/// Risky event `f_c(x) ≥ ε` and the target violation rate `δ`.
#[derive(Debug, Clone, PartialEq)]
pub struct ConstraintSpec {
    pub kind: ConstraintKind,
    pub epsilon: f64,
    pub delta: f64,
}

impl ConstraintSpec {
    pub fn new(kind: ConstraintKind, epsilon: f64, delta: f64) -> Result<Self> {
        match &kind {
            ConstraintKind::Quadratic(q) => {
                if !is_symmetric(q, 1e-12) {
                    return Err(Error::invalid("constraint.q", "Q is not symmetric"));
                }
                cholesky_lower(q, "constraint.q")?;
            }
            ConstraintKind::Linear(q) => {
                if q.iter().any(|v| !v.is_finite()) {
                    return Err(Error::invalid("constraint.q", "q has non-finite entries"));
                }
            }
        }
        if !(epsilon > 0.0 && epsilon.is_finite()) {
            return Err(Error::invalid("constraint.epsilon", format!("{epsilon} is not positive")));
        }
        if !(delta > 0.0 && delta < 1.0) {
            return Err(Error::invalid("constraint.delta", format!("{delta} is not in (0, 1)")));
        }
        Ok(Self { kind, epsilon, delta })
    }

    pub fn state_dim(&self) -> usize {
        match &self.kind {
            ConstraintKind::Quadratic(q) => q.nrows(),
            ConstraintKind::Linear(q) => q.len(),
        }
    }

    /// `f_c(x)`.
    pub fn value(&self, x: &Vector) -> f64 {
        match &self.kind {
            ConstraintKind::Quadratic(q) => quad_form(q, x),
            ConstraintKind::Linear(q) => q.dot(x),
        }
    }

    /// `f_c(x) ≥ ε`; ties count as violations.
    pub fn is_violated(&self, x: &Vector) -> bool {
        self.value(x) >= self.epsilon
    }

    pub fn label(&self) -> &'static str {
        match self.kind {
            ConstraintKind::Quadratic(_) => "quadratic",
            ConstraintKind::Linear(_) => "linear",
        }
    }

    pub(crate) fn check_against(&self, sys: &LtiSystem) -> Result<()> {
        check_len("constraint", sys.state_dim(), self.state_dim())
    }
}

/// `x̂ = A x + B u`, the conditional mean of `x'` before noise.
///
/// For input-injected noise the noise mean is deliberately not folded in;
/// it enters through the component means inside the MGF.
pub fn predict_mean(sys: &LtiSystem, x: &Vector, u: &Vector) -> Result<Vector> {
    check_len("predict_mean: state", sys.state_dim(), x.len())?;
    check_len("predict_mean: input", sys.input_dim(), u.len())?;
    Ok(sys.predict_mean(x, u))
}

/// Standard normal CDF `Φ(z)`.
pub fn standard_normal_cdf(z: f64) -> f64 {
    0.5 * libm::erfc(-z / std::f64::consts::SQRT_2)
}

/// Upper tail `1 − Φ(z)`, accurate far into the tail.
pub fn standard_normal_sf(z: f64) -> f64 {
    0.5 * libm::erfc(z / std::f64::consts::SQRT_2)
}

// ---------------------------------------------------------------------------
// Quadratic forms of Gaussian vectors

/// MGF data of `y = wᵀQw + aᵀw` for one Gaussian `w` at a fixed `a`.
///
/// `y = shift + Σ_j (λ_j v_j² + b_j v_j)` with `v ~ N(0, I)`, so
/// `log M(s) = s·shift + ½ s² Σ b_j²/(1 − 2sλ_j) − ½ Σ log(1 − 2sλ_j)`.
#[derive(Debug, Clone, PartialEq)]
pub struct ComponentMgf {
    pub weight: f64,
    pub lambdas: Vec<f64>,
    pub b: Vec<f64>,
    /// `μᵀQμ + aᵀμ`.
    pub shift: f64,
}

impl ComponentMgf {
    /// Supremum of the MGF domain, capped when no eigenvalue is positive.
    pub fn s_max(&self) -> f64 {
        let top = self.lambdas.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        if top > 0.0 {
            (1.0 / (2.0 * top)).min(S_MAX_CAP)
        } else {
            S_MAX_CAP
        }
    }

    pub fn log_mgf(&self, s: f64) -> f64 {
        let mut acc = s * self.shift;
        for (lam, b) in self.lambdas.iter().zip(&self.b) {
            let r = 1.0 - 2.0 * s * lam;
            acc += 0.5 * s * s * b * b / r - 0.5 * r.ln();
        }
        acc
    }
}

/// Precomputed eigen-structure of one component: `Σ^{1/2} Q_g Σ^{1/2} = P Λ Pᵀ`.
#[derive(Debug, Clone)]
struct QuadFormBasis {
    weight: f64,
    mean: Vector,
    sqrt_cov: Matrix,
    lambdas: Vec<f64>,
    eigvecs: Matrix,
    /// `2 Σ^{1/2} Q_g μ`, the part of the `b` pre-image that does not depend on `a`.
    mean_term: Vector,
    mean_quad: f64,
}

impl QuadFormBasis {
    fn new(weight: f64, q: &Matrix, g: &Gaussian) -> Self {
        let sqrt_cov = symmetric_sqrt(g.cov());
        let inner = &sqrt_cov * q * &sqrt_cov;
        let (lambdas, eigvecs) = symmetric_eigen(&inner);
        let mean_term = 2.0 * (&sqrt_cov * (q * g.mean()));
        Self {
            weight,
            mean: g.mean().clone(),
            sqrt_cov,
            lambdas,
            eigvecs,
            mean_term,
            mean_quad: quad_form(q, g.mean()),
        }
    }

    fn at(&self, a: &Vector) -> ComponentMgf {
        let pre = &self.sqrt_cov * a + &self.mean_term;
        let b = self.eigvecs.tr_mul(&pre);
        ComponentMgf {
            weight: self.weight,
            lambdas: self.lambdas.clone(),
            b: b.iter().copied().collect(),
            shift: self.mean_quad + a.dot(&self.mean),
        }
    }
}

/// MGF of `wᵀQw + aᵀw` for `w ~ N(μ, Σ)` at `s`.
pub fn mgf_gaussian_quadform(q: &Matrix, a: &Vector, g: &Gaussian, s: f64) -> Result<f64> {
    check_len("mgf: Q", g.dim(), q.nrows())?;
    check_len("mgf: a", g.dim(), a.len())?;
    let comp = QuadFormBasis::new(1.0, q, g).at(a);
    let s_max = comp.s_max();
    if !(0.0..s_max).contains(&s) {
        return Err(Error::MgfDomain { s, s_max });
    }
    Ok(comp.log_mgf(s).exp())
}

/// Everything the Chernoff bound needs at one `(x, u)`.
#[derive(Debug, Clone, PartialEq)]
pub struct ChernoffContext {
    pub x_hat: Vector,
    /// `x̂ᵀQx̂`.
    pub d: f64,
    /// `2GᵀQx̂`.
    pub a: Vector,
    pub components: Vec<ComponentMgf>,
    /// Tightest domain limit across components.
    pub s_max: f64,
}

/// Result of the infimum search.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChernoffBound {
    /// `min(1, inf_s e^{−(ε−d)s} M(s))`.
    pub value: f64,
    /// Minimizing `s` (0 when the bound is vacuous).
    pub s_star: f64,
}

impl ChernoffContext {
    fn check_domain(&self, s: f64) -> Result<()> {
        if (0.0..self.s_max).contains(&s) {
            Ok(())
        } else {
            Err(Error::MgfDomain { s, s_max: self.s_max })
        }
    }

    pub fn component_mgf(&self, j: usize, s: f64) -> Result<f64> {
        self.check_domain(s)?;
        Ok(self.components[j].log_mgf(s).exp())
    }

    /// Mixture log-MGF `log Σ_j π_j M_j(s)`, evaluated with log-sum-exp.
    pub fn log_mgf(&self, s: f64) -> Result<f64> {
        self.check_domain(s)?;
        Ok(self.log_mgf_unchecked(s))
    }

    pub fn mgf(&self, s: f64) -> Result<f64> {
        self.log_mgf(s).map(f64::exp)
    }

    fn log_mgf_unchecked(&self, s: f64) -> f64 {
        if let [only] = self.components.as_slice() {
            return only.weight.ln() + only.log_mgf(s);
        }
        let terms: Vec<f64> = self
            .components
            .iter()
            .map(|c| c.weight.ln() + c.log_mgf(s))
            .collect();
        let top = terms.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        if !top.is_finite() {
            return top;
        }
        top + terms.iter().map(|t| (t - top).exp()).sum::<f64>().ln()
    }

    /// Log of the Chernoff objective, `−(ε − d)s + log M(s)`. Convex in `s`.
    pub fn log_objective(&self, epsilon: f64, s: f64) -> f64 {
        -(epsilon - self.d) * s + self.log_mgf_unchecked(s)
    }

    /// Minimize the objective over `[0, 0.999999·s_max]` by ternary search.
    pub fn bound(&self, epsilon: f64) -> Result<ChernoffBound> {
        if epsilon <= self.d {
            return Ok(ChernoffBound { value: 1.0, s_star: 0.0 });
        }
        let phi = |s: f64| {
            let v = self.log_objective(epsilon, s);
            if v.is_nan() {
                f64::INFINITY
            } else {
                v
            }
        };
        let (mut lo, mut hi) = (0.0, S_BRACKET * self.s_max);
        let mut any_finite = false;
        while hi - lo > S_TOL {
            let m1 = lo + (hi - lo) / 3.0;
            let m2 = hi - (hi - lo) / 3.0;
            let (f1, f2) = (phi(m1), phi(m2));
            any_finite |= f1.is_finite() || f2.is_finite();
            if f1 < f2 {
                hi = m2;
            } else {
                lo = m1;
            }
        }
        let s_star = 0.5 * (lo + hi);
        let best = phi(s_star);
        if !best.is_finite() && !any_finite {
            return Err(Error::Numeric(format!(
                "Chernoff objective is not finite on [0, {}) (d = {}, ε = {epsilon})",
                self.s_max, self.d
            )));
        }
        Ok(ChernoffBound {
            value: best.min(0.0).exp(),
            s_star,
        })
    }
}

/// Chernoff bound for a quadratic constraint with the noise eigen-data cached.
#[derive(Debug, Clone)]
pub struct QuadraticBound {
    sys: LtiSystem,
    q: Matrix,
    /// `GᵀQ`, maps `x̂` to half of `a`.
    gt_q: Matrix,
    epsilon: f64,
    bases: Vec<QuadFormBasis>,
}

impl QuadraticBound {
    pub fn new(sys: &LtiSystem, noise: &NoiseModel, q: &Matrix, epsilon: f64) -> Result<Self> {
        noise.check_against(sys)?;
        check_len("constraint Q", sys.state_dim(), q.nrows())?;
        let (q_g, gt_q) = match sys.injection() {
            NoiseInjection::StateAdditive => (q.clone(), q.clone()),
            NoiseInjection::ThroughInput => {
                let bt_q = sys.b().transpose() * q;
                (&bt_q * sys.b(), bt_q)
            }
        };
        let bases = noise
            .components()
            .into_iter()
            .map(|(w, g)| QuadFormBasis::new(w, &q_g, g))
            .collect();
        Ok(Self {
            sys: sys.clone(),
            q: q.clone(),
            gt_q,
            epsilon,
            bases,
        })
    }

    pub fn context(&self, x: &Vector, u: &Vector) -> Result<ChernoffContext> {
        let x_hat = predict_mean(&self.sys, x, u)?;
        let d = quad_form(&self.q, &x_hat);
        let a = 2.0 * (&self.gt_q * &x_hat);
        let components: Vec<ComponentMgf> = self.bases.iter().map(|b| b.at(&a)).collect();
        let s_max = components.iter().map(ComponentMgf::s_max).fold(f64::INFINITY, f64::min);
        Ok(ChernoffContext {
            x_hat,
            d,
            a,
            components,
            s_max,
        })
    }

    pub fn evaluate(&self, x: &Vector, u: &Vector) -> Result<f64> {
        Ok(self.context(x, u)?.bound(self.epsilon)?.value)
    }
}

/// Chernoff bound `h_c(x, u)` on `P{x'ᵀQx' ≥ ε}`.
pub fn chernoff_quadratic(
    sys: &LtiSystem,
    noise: &NoiseModel,
    con: &ConstraintSpec,
    x: &Vector,
    u: &Vector,
) -> Result<f64> {
    match &con.kind {
        ConstraintKind::Quadratic(q) => QuadraticBound::new(sys, noise, q, con.epsilon)?.evaluate(x, u),
        ConstraintKind::Linear(_) => Err(Error::invalid("constraint", "Chernoff bound needs a quadratic constraint")),
    }
}

// ---------------------------------------------------------------------------
// Linear constraints

/// Exact `P{qᵀx' ≥ ε}` with the per-component scalar noise moments cached.
#[derive(Debug, Clone)]
pub struct LinearTail {
    sys: LtiSystem,
    q: Vector,
    epsilon: f64,
    /// `(π_j, qᵀGμ_j, sqrt(qᵀGΣ_jGᵀq))`.
    components: Vec<(f64, f64, f64)>,
}

impl LinearTail {
    pub fn new(sys: &LtiSystem, noise: &NoiseModel, q: &Vector, epsilon: f64) -> Result<Self> {
        noise.check_against(sys)?;
        check_len("constraint q", sys.state_dim(), q.len())?;
        let qg = sys.noise_gain().tr_mul(q);
        let mut components = Vec::new();
        for (w, g) in noise.components() {
            let var = quad_form(g.cov(), &qg);
            if var <= 1e-300 {
                return Err(Error::DegenerateVariance(var));
            }
            components.push((w, qg.dot(g.mean()), var.sqrt()));
        }
        Ok(Self {
            sys: sys.clone(),
            q: q.clone(),
            epsilon,
            components,
        })
    }

    pub fn evaluate(&self, x: &Vector, u: &Vector) -> Result<f64> {
        let x_hat = predict_mean(&self.sys, x, u)?;
        let margin = self.epsilon - self.q.dot(&x_hat);
        let p: f64 = self
            .components
            .iter()
            .map(|&(w, mean, sd)| w * standard_normal_sf((margin - mean) / sd))
            .sum();
        Ok(p.clamp(0.0, 1.0))
    }
}

/// Exact `P{qᵀx' ≥ ε}` for Gaussian or Gaussian-mixture noise.
pub fn tail_linear(
    sys: &LtiSystem,
    noise: &NoiseModel,
    con: &ConstraintSpec,
    x: &Vector,
    u: &Vector,
) -> Result<f64> {
    match &con.kind {
        ConstraintKind::Linear(q) => LinearTail::new(sys, noise, q, con.epsilon)?.evaluate(x, u),
        ConstraintKind::Quadratic(_) => Err(Error::invalid("constraint", "tail_linear needs a linear constraint")),
    }
}

/// `h_c` for whichever constraint form is configured.
#[derive(Debug, Clone)]
pub enum ConstraintEvaluator {
    Quadratic(QuadraticBound),
    Linear(LinearTail),
}

impl ConstraintEvaluator {
    pub fn new(sys: &LtiSystem, noise: &NoiseModel, con: &ConstraintSpec) -> Result<Self> {
        con.check_against(sys)?;
        Ok(match &con.kind {
            ConstraintKind::Quadratic(q) => {
                ConstraintEvaluator::Quadratic(QuadraticBound::new(sys, noise, q, con.epsilon)?)
            }
            ConstraintKind::Linear(q) => ConstraintEvaluator::Linear(LinearTail::new(sys, noise, q, con.epsilon)?),
        })
    }

    pub fn probability(&self, x: &Vector, u: &Vector) -> Result<f64> {
        match self {
            ConstraintEvaluator::Quadratic(b) => b.evaluate(x, u),
            ConstraintEvaluator::Linear(t) => t.evaluate(x, u),
        }
    }
}

// ---------------------------------------------------------------------------
// Monte-Carlo audit

/// Empirical `P{f_c(x') ≥ ε}` at fixed `(x, u)`: `(frequency, standard error)`.
///
/// The standard error is floored at the one-draw resolution,
/// `sqrt(max(p̂(1−p̂), 1/n)/n)`, so it does not vanish when `p̂` is 0 or 1.
pub fn mc_violation_frequency(
    sys: &LtiSystem,
    noise: &NoiseModel,
    con: &ConstraintSpec,
    x: &Vector,
    u: &Vector,
    draws: usize,
    rng: &mut Rng,
) -> Result<(f64, f64)> {
    let x_hat = predict_mean(sys, x, u)?;
    let gain = sys.noise_gain();
    let mut hits = 0usize;
    for _ in 0..draws {
        let w = noise.sample(rng);
        if con.is_violated(&(&x_hat + &gain * w)) {
            hits += 1;
        }
    }
    let p = hits as f64 / draws as f64;
    let n = draws as f64;
    Ok((p, ((p * (1.0 - p)).max(1.0 / n) / n).sqrt()))
}

#[derive(Debug, Clone, PartialEq)]
pub struct AuditRow {
    pub x: Vector,
    pub u: Vector,
    pub analytic: f64,
    pub monte_carlo: f64,
    pub std_error: f64,
}

/// Compare the analytic `h_c` with Monte-Carlo frequencies at random
/// `(x, u)` pairs, `x` and `u` uniform in `[−x_range, x_range]` and
/// `[−u_range, u_range]` per component. Pair `i` uses stream `i` of `seed`.
#[allow(clippy::too_many_arguments)]
pub fn audit(
    sys: &LtiSystem,
    noise: &NoiseModel,
    con: &ConstraintSpec,
    pairs: usize,
    draws: usize,
    x_range: f64,
    u_range: f64,
    seed: u64,
    exec: ExecMode,
) -> Result<Vec<AuditRow>> {
    let evaluator = ConstraintEvaluator::new(sys, noise, con)?;
    let root = Rng::new(seed);
    let (n, p) = (sys.state_dim(), sys.input_dim());
    exec.map(pairs, |i| {
        let mut rng = root.stream(i as u64);
        let x = Vector::from_iterator(n, (0..n).map(|_| rng.uniform_in(-x_range, x_range)));
        let u = Vector::from_iterator(p, (0..p).map(|_| rng.uniform_in(-u_range, u_range)));
        let analytic = evaluator.probability(&x, &u)?;
        let (monte_carlo, std_error) = mc_violation_frequency(sys, noise, con, &x, &u, draws, &mut rng)?;
        Ok(AuditRow {
            x,
            u,
            analytic,
            monte_carlo,
            std_error,
        })
    })
    .into_iter()
    .collect()
}

//! Discrete algebraic Riccati equation and the risk-neutral LQR baseline.

use nalgebra::linalg::Cholesky;

use crate::cost::CostSpec;
use crate::linalg::spectral_radius;
use crate::{Error, LtiSystem, Matrix, NoiseInjection, NoiseModel, PolicyHandle, Result, Vector};

#[derive(Debug, Clone, Copy)]
pub struct RiccatiOptions {
    /// Stop once `‖S_{t+1} − S_t‖_F / ‖S_{t+1}‖_F` falls below this.
    pub rel_tol: f64,
    pub max_iter: usize,
    /// Required bound on the final fixed-point defect (Frobenius).
    pub residual_tol: f64,
}

impl Default for RiccatiOptions {
    fn default() -> Self {
        Self {
            rel_tol: 1e-12,
            max_iter: 100_000,
            residual_tol: 1e-8,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LqrSolution {
    /// Stabilizing Riccati solution.
    pub s: Matrix,
    /// Feedback gain, `u = K x + l`.
    pub gain: Matrix,
    /// Affine offset cancelling a non-zero noise mean injected through `B`.
    pub offset: Vector,
    /// Frobenius norm of the Riccati fixed-point defect at `s`.
    pub residual: f64,
    pub iterations: usize,
    /// Spectral radius of `A + B K`.
    pub closed_loop_radius: f64,
}

/// One application of the Riccati map:
/// `AᵀSA + W − AᵀSB (BᵀSB + U)⁻¹ BᵀSA`, plus the gain `−(BᵀSB + U)⁻¹ BᵀSA`.
fn riccati_map(sys: &LtiSystem, cost: &CostSpec, s: &Matrix) -> Result<(Matrix, Matrix)> {
    let a = sys.a();
    let b = sys.b();
    let bts = b.transpose() * s;
    let gram = &bts * b + cost.u();
    let chol = Cholesky::new(gram)
        .ok_or_else(|| Error::Numeric("BᵀSB + U lost positive definiteness".into()))?;
    let btsa = bts * a;
    let sol = chol.solve(&btsa);
    let ats = a.transpose() * s;
    let mut next = &ats * a + cost.w() - (&ats * b) * &sol;
    next = 0.5 * (&next + next.transpose());
    Ok((next, -sol))
}

/// Frobenius norm of `S − (AᵀSA + W − AᵀSB(BᵀSB+U)⁻¹BᵀSA)`.
pub fn riccati_residual(sys: &LtiSystem, cost: &CostSpec, s: &Matrix) -> Result<f64> {
    let (next, _) = riccati_map(sys, cost, s)?;
    Ok((s - next).norm())
}

/// Solve the DARE by value iteration from `S₀ = W` and derive the LQR policy
/// parameters. `noise` determines the affine offset.
pub fn solve_riccati(sys: &LtiSystem, cost: &CostSpec, noise: &NoiseModel) -> Result<LqrSolution> {
    solve_riccati_from(sys, cost, noise, cost.w(), RiccatiOptions::default())
}

pub fn solve_riccati_from(
    sys: &LtiSystem,
    cost: &CostSpec,
    noise: &NoiseModel,
    initial: &Matrix,
    opts: RiccatiOptions,
) -> Result<LqrSolution> {
    cost.check_against(sys)?;
    let offset = affine_offset(sys, noise)?;
    let mut s = initial.clone();
    let mut iterations = 0;
    let mut converged = false;
    while iterations < opts.max_iter {
        let (next, _) = riccati_map(sys, cost, &s)?;
        iterations += 1;
        let change = (&next - &s).norm() / next.norm().max(f64::MIN_POSITIVE);
        s = next;
        if !s.iter().all(|v| v.is_finite()) {
            break;
        }
        if change < opts.rel_tol {
            converged = true;
            break;
        }
    }
    let residual = if s.iter().all(|v| v.is_finite()) {
        riccati_residual(sys, cost, &s)?
    } else {
        f64::INFINITY
    };
    if !converged || residual >= opts.residual_tol {
        return Err(Error::NoConvergence {
            iterations,
            residual,
        });
    }
    let (_, gain) = riccati_map(sys, cost, &s)?;
    let closed_loop_radius = spectral_radius(&(sys.a() + sys.b() * &gain));
    if closed_loop_radius >= 1.0 {
        return Err(Error::Unstable(closed_loop_radius));
    }
    Ok(LqrSolution {
        s,
        gain,
        offset,
        residual,
        iterations,
        closed_loop_radius,
    })
}

/// `l = −E[w]` for noise entering through the input; zero for zero-mean noise.
fn affine_offset(sys: &LtiSystem, noise: &NoiseModel) -> Result<Vector> {
    noise.check_against(sys)?;
    if noise.is_zero_mean() {
        return Ok(Vector::zeros(sys.input_dim()));
    }
    match sys.injection() {
        NoiseInjection::ThroughInput => Ok(-noise.mean()),
        NoiseInjection::StateAdditive => Err(Error::invalid(
            "noise",
            "a non-zero noise mean is only compensated when it enters through the input",
        )),
    }
}

/// Affine LQR controller `u = K x + l`.
pub fn lqr_policy(sol: &LqrSolution) -> PolicyHandle {
    PolicyHandle::affine(sol.gain.clone(), sol.offset.clone())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::matrix_from_rows;
    use approx::assert_relative_eq;

    fn scalar(a: f64, b: f64) -> (LtiSystem, CostSpec, NoiseModel) {
        let sys = LtiSystem::new(
            Matrix::from_element(1, 1, a),
            Matrix::from_element(1, 1, b),
            NoiseInjection::StateAdditive,
        )
        .unwrap();
        let cost = CostSpec::new(Matrix::identity(1, 1), Matrix::identity(1, 1), 0.0, 0.99).unwrap();
        let noise = NoiseModel::gaussian(Vector::zeros(1), Matrix::identity(1, 1)).unwrap();
        (sys, cost, noise)
    }

    #[test]
    fn zero_dynamics_gives_s_equal_w() {
        let (sys, cost, noise) = scalar(0.0, 1.0);
        let sol = solve_riccati(&sys, &cost, &noise).unwrap();
        assert_eq!(sol.s[(0, 0)], 1.0);
        assert_eq!(sol.gain[(0, 0)], 0.0);
    }

    #[test]
    fn scalar_golden_ratio() {
        let (sys, cost, noise) = scalar(1.0, 1.0);
        let sol = solve_riccati(&sys, &cost, &noise).unwrap();
        let phi = (1.0 + 5f64.sqrt()) / 2.0;
        assert_relative_eq!(sol.s[(0, 0)], phi, epsilon = 1e-10);
        assert_relative_eq!(sol.gain[(0, 0)], -(phi - 1.0), epsilon = 1e-10);
        let policy = lqr_policy(&sol);
        let u = policy.act(&Vector::from_vec(vec![1.0]), &mut crate::Rng::new(0));
        assert_relative_eq!(u[0], -0.618_034, epsilon = 1e-6);
    }

    #[test]
    fn uncontrollable_unstable_mode_is_reported() {
        let sys = LtiSystem::new(
            matrix_from_rows(&[vec![1.5, 0.0], vec![0.0, 0.5]]).unwrap(),
            matrix_from_rows(&[vec![0.0], vec![1.0]]).unwrap(),
            NoiseInjection::StateAdditive,
        )
        .unwrap();
        let cost = CostSpec::new(Matrix::identity(2, 2), Matrix::identity(1, 1), 0.0, 0.9).unwrap();
        let noise = NoiseModel::gaussian(Vector::zeros(2), Matrix::identity(2, 2)).unwrap();
        let opts = RiccatiOptions {
            max_iter: 200,
            ..Default::default()
        };
        let err = solve_riccati_from(&sys, &cost, &noise, cost.w(), opts).unwrap_err();
        assert!(matches!(err, Error::NoConvergence { .. }), "{err}");
    }

    #[test]
    fn nonzero_state_noise_mean_is_rejected() {
        let (sys, cost, _) = scalar(0.5, 1.0);
        let noise = NoiseModel::gaussian(Vector::from_vec(vec![1.0]), Matrix::identity(1, 1)).unwrap();
        assert!(matches!(solve_riccati(&sys, &cost, &noise), Err(Error::Invalid { .. })));
    }

    #[test]
    fn zero_gain_policy_is_zero() {
        let sol = LqrSolution {
            s: Matrix::identity(2, 2),
            gain: Matrix::zeros(1, 2),
            offset: Vector::zeros(1),
            residual: 0.0,
            iterations: 0,
            closed_loop_radius: 0.0,
        };
        let u = lqr_policy(&sol).act(&Vector::from_vec(vec![3.0, -4.0]), &mut crate::Rng::new(0));
        assert_eq!(u, Vector::zeros(1));
    }
}

//! Analytic constraint probabilities against Monte-Carlo oracles that only
//! sample noise and propagate the plant.

mod common;

use common::{second_order, uav, Plant};
use riskctl_core::bounds::{
    audit, mgf_gaussian_quadform, tail_linear, ConstraintEvaluator, QuadraticBound,
};
use riskctl_core::dynamics::Gaussian;
use riskctl_core::linalg::quad_form;
use riskctl_core::{ConstraintKind, ExecMode, Matrix, Rng, Vector};

/// `x'ᵀQx' − x̂ᵀQx̂` for one sampled noise vector.
fn excess(plant: &Plant, q: &Matrix, x_hat: &Vector, rng: &mut Rng) -> f64 {
    let w = plant.noise.sample(rng);
    let x_next = x_hat + plant.sys.noise_gain() * w;
    quad_form(q, &x_next) - quad_form(q, x_hat)
}

fn mc_mgf_ratio(draws: usize, s: f64, log_m: f64, mut sample: impl FnMut() -> f64) -> f64 {
    (0..draws).map(|_| (s * sample() - log_m).exp()).sum::<f64>() / draws as f64
}

#[test]
fn gaussian_quadform_mgf_matches_monte_carlo() {
    let mut rng = Rng::new(11);
    let q = Matrix::from_row_slice(2, 2, &[2.0, 0.4, 0.4, 1.0]);
    let a = Vector::from_vec(vec![0.7, -1.2]);
    let g = Gaussian::new(
        Vector::from_vec(vec![0.5, -0.3]),
        Matrix::from_row_slice(2, 2, &[1.5, 0.3, 0.3, 0.8]),
    )
    .unwrap();
    let lam_max = {
        let root = riskctl_core::linalg::symmetric_sqrt(g.cov());
        let (l, _) = riskctl_core::linalg::symmetric_eigen(&(&root * &q * &root));
        l.into_iter().fold(f64::MIN, f64::max)
    };
    let s_max = 1.0 / (2.0 * lam_max);
    for frac in [0.02, 0.05, 0.1, 0.15, 0.2] {
        let s = frac * s_max;
        let m = mgf_gaussian_quadform(&q, &a, &g, s).unwrap();
        let ratio = mc_mgf_ratio(1_000_000, s, m.ln(), || {
            let w = g.sample(&mut rng);
            quad_form(&q, &w) + a.dot(&w)
        });
        assert!((ratio - 1.0).abs() < 0.01, "s = {s}: MC/analytic = {ratio}");
    }
}

#[test]
fn plant_mgfs_match_monte_carlo() {
    for (name, plant, x, u) in [
        ("second-order", second_order(), vec![1.0, -0.5], vec![0.2, 0.1]),
        ("uav", uav(), vec![0.5, 0.2, -0.4, 0.1], vec![-3.0, 0.5]),
    ] {
        let ConstraintKind::Quadratic(q) = &plant.quadratic.kind else {
            unreachable!()
        };
        let bound = QuadraticBound::new(&plant.sys, &plant.noise, q, plant.quadratic.epsilon).unwrap();
        let (x, u) = (Vector::from_vec(x), Vector::from_vec(u));
        let ctx = bound.context(&x, &u).unwrap();
        let mut rng = Rng::new(5);
        for frac in [0.02, 0.05, 0.1, 0.15, 0.2] {
            let s = frac * ctx.s_max;
            let log_m = ctx.log_mgf(s).unwrap();
            let ratio = mc_mgf_ratio(1_000_000, s, log_m, || excess(&plant, q, &ctx.x_hat, &mut rng));
            assert!((ratio - 1.0).abs() < 0.01, "{name}, s = {s}: MC/analytic = {ratio}");
        }
    }
}

#[test]
fn mixture_mgf_is_weighted_component_sum() {
    let plant = uav();
    let ConstraintKind::Quadratic(q) = &plant.quadratic.kind else {
        unreachable!()
    };
    let bound = QuadraticBound::new(&plant.sys, &plant.noise, q, 80.0).unwrap();
    let mut rng = Rng::new(8);
    for _ in 0..20 {
        let x = rng.normal_vector(4) * 3.0;
        let u = rng.normal_vector(2) * 3.0;
        let ctx = bound.context(&x, &u).unwrap();
        for frac in [0.01, 0.3, 0.6, 0.9, 0.99] {
            let s = frac * ctx.s_max;
            // compare in log space; near s_max both sides overflow f64
            let logs: Vec<f64> = ctx.components.iter().map(|c| c.weight.ln() + c.log_mgf(s)).collect();
            let top = logs.iter().cloned().fold(f64::MIN, f64::max);
            let direct: f64 = logs.iter().map(|l| (l - top).exp()).sum();
            let mixed = (ctx.log_mgf(s).unwrap() - top).exp();
            assert!(((mixed - direct) / direct).abs() <= 1e-12, "{mixed} vs {direct}");
            if s < 0.5 * ctx.s_max {
                let plain: f64 = (0..ctx.components.len())
                    .map(|j| ctx.components[j].weight * ctx.component_mgf(j, s).unwrap())
                    .sum();
                assert!(((ctx.mgf(s).unwrap() - plain) / plain).abs() <= 1e-12);
            }
        }
    }
}

fn check_validity(name: &str, plant: &Plant, linear: bool, pairs: usize, draws: usize) {
    let con = if linear { &plant.linear } else { &plant.quadratic };
    let rows = audit(&plant.sys, &plant.noise, con, pairs, draws, 5.0, 5.0, 21, ExecMode::Parallel).unwrap();
    for (i, r) in rows.iter().enumerate() {
        assert!((0.0..=1.0).contains(&r.analytic), "{name} pair {i}: {}", r.analytic);
        assert!(
            linear || r.analytic >= r.monte_carlo - 3.0 * r.std_error,
            "{name} pair {i}: bound {} below MC {} (se {})",
            r.analytic,
            r.monte_carlo,
            r.std_error
        );
        if linear {
            // 50 two-sided comparisons share this band; 4 SE keeps the family-wise
            // false-alarm rate under 1%
            let se = (r.analytic * (1.0 - r.analytic) / draws as f64).sqrt();
            assert!(
                (r.analytic - r.monte_carlo).abs() <= 4.0 * se + 0.5 / draws as f64,
                "{name} pair {i}: exact {} vs MC {}",
                r.analytic,
                r.monte_carlo
            );
        }
    }
}

#[test]
fn bounds_dominate_monte_carlo_on_all_cases() {
    check_validity("gaussian/quadratic", &second_order(), false, 25, 20_000);
    check_validity("gaussian/linear", &second_order(), true, 25, 20_000);
    check_validity("mixture/quadratic", &uav(), false, 25, 20_000);
    check_validity("mixture/linear", &uav(), true, 25, 20_000);
}

#[test]
fn linear_tail_matches_monte_carlo_on_random_configurations() {
    let mut rng = Rng::new(99);
    for trial in 0..10 {
        let plant = if trial % 2 == 0 { second_order() } else { uav() };
        let n = plant.sys.state_dim();
        let q = rng.normal_vector(n);
        let eps = 1.0 + 4.0 * rng.uniform();
        let con = riskctl_core::ConstraintSpec::new(ConstraintKind::Linear(q), eps, 0.1).unwrap();
        let x = rng.normal_vector(n);
        let u = rng.normal_vector(plant.sys.input_dim());
        let p = tail_linear(&plant.sys, &plant.noise, &con, &x, &u).unwrap();
        let draws = 50_000;
        let (freq, _) =
            riskctl_core::bounds::mc_violation_frequency(&plant.sys, &plant.noise, &con, &x, &u, draws, &mut rng)
                .unwrap();
        let se = (p * (1.0 - p) / draws as f64).sqrt();
        assert!((p - freq).abs() <= 3.0 * se + 1e-12, "trial {trial}: {p} vs {freq}");
    }
}

#[test]
fn evaluator_outputs_stay_in_unit_interval() {
    let mut rng = Rng::new(4);
    for plant in [second_order(), uav()] {
        for con in [&plant.quadratic, &plant.linear] {
            let ev = ConstraintEvaluator::new(&plant.sys, &plant.noise, con).unwrap();
            for _ in 0..200 {
                let x = rng.normal_vector(plant.sys.state_dim()) * 20.0;
                let u = rng.normal_vector(plant.sys.input_dim()) * 20.0;
                let p = ev.probability(&x, &u).unwrap();
                assert!((0.0..=1.0).contains(&p));
            }
        }
    }
}

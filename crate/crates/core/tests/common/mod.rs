#![allow(dead_code)]

use riskctl_core::linalg::matrix_from_rows;
use riskctl_core::{
    ConstraintKind, ConstraintSpec, CostSpec, LtiSystem, Matrix, NoiseInjection, NoiseModel, Vector,
};

pub struct Plant {
    pub sys: LtiSystem,
    pub noise: NoiseModel,
    pub cost: CostSpec,
    pub quadratic: ConstraintSpec,
    pub linear: ConstraintSpec,
}

pub fn diag(v: &[f64]) -> Matrix {
    Matrix::from_diagonal(&Vector::from_column_slice(v))
}

pub fn second_order() -> Plant {
    let sys = LtiSystem::new(
        matrix_from_rows(&[vec![1.0, 0.3], vec![0.3, 1.1]]).unwrap(),
        matrix_from_rows(&[vec![0.9, 0.5], vec![0.1, 1.2]]).unwrap(),
        NoiseInjection::StateAdditive,
    )
    .unwrap();
    let noise = NoiseModel::gaussian(Vector::zeros(2), diag(&[2.0, 2.0])).unwrap();
    let w = matrix_from_rows(&[vec![1.5, 0.25], vec![0.25, 2.5]]).unwrap();
    let cost = CostSpec::new(w.clone(), diag(&[40.0, 70.0]), 100.0, 0.99).unwrap();
    let quadratic = ConstraintSpec::new(ConstraintKind::Quadratic(3.0 * w), 95.0, 0.1).unwrap();
    // the linear variant has no published parameters; this one gives a
    // violation rate of the same order as the quadratic event
    let linear = ConstraintSpec::new(ConstraintKind::Linear(Vector::from_vec(vec![1.0, 1.0])), 5.0, 0.1).unwrap();
    Plant {
        sys,
        noise,
        cost,
        quadratic,
        linear,
    }
}

pub fn uav() -> Plant {
    let sys = LtiSystem::new(
        matrix_from_rows(&[
            vec![1.0, 0.5, 0.0, 0.0],
            vec![0.0, 1.0, 0.0, 0.0],
            vec![0.0, 0.0, 1.0, 0.5],
            vec![0.0, 0.0, 0.0, 1.0],
        ])
        .unwrap(),
        matrix_from_rows(&[vec![0.125, 0.0], vec![0.5, 0.0], vec![0.0, 0.125], vec![0.0, 0.5]]).unwrap(),
        NoiseInjection::ThroughInput,
    )
    .unwrap();
    let noise = NoiseModel::mixture(vec![
        (0.2, Vector::from_vec(vec![3.0, 0.0]), diag(&[30.0, 0.01])),
        (0.8, Vector::from_vec(vec![8.0, 0.0]), diag(&[60.0, 0.01])),
    ])
    .unwrap();
    let w = diag(&[1.0, 0.1, 2.0, 0.2]);
    let cost = CostSpec::new(w.clone(), Matrix::identity(2, 2), 100.0, 0.99).unwrap();
    let quadratic = ConstraintSpec::new(ConstraintKind::Quadratic(2.0 * w), 80.0, 0.1).unwrap();
    let linear =
        ConstraintSpec::new(ConstraintKind::Linear(Vector::from_vec(vec![1.0, 0.1, 2.0, 0.2])), 5.0, 0.1).unwrap();
    Plant {
        sys,
        noise,
        cost,
        quadratic,
        linear,
    }
}

//! Shared fixtures for the criterion benches: the operator gallery on its
//! usual domains and ready-made iteration configs.

use fixpoint::{Domain, IterationConfig, OperatorSpec, Point};

pub fn reciprocal() -> OperatorSpec {
    OperatorSpec::reciprocal(Domain::interval(0.5, 2.0).expect("valid interval"))
        .expect("self-map")
}

pub fn reflection() -> OperatorSpec {
    OperatorSpec::affine_reflection(Domain::interval(0.0, 1.0).expect("valid interval"))
        .expect("self-map")
}

pub fn quarter_turn() -> OperatorSpec {
    let disk = Domain::ball(vec![0.0, 0.0], 1.0).expect("valid ball");
    OperatorSpec::rotation(disk, std::f64::consts::FRAC_PI_2).expect("self-map")
}

pub fn scheme(lambda: f64, x0: &[f64]) -> IterationConfig {
    IterationConfig::with_defaults(lambda, Point::new(x0.to_vec()).expect("valid point"))
        .expect("valid scheme")
}

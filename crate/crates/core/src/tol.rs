//! Tolerances and default parameters used across the crate.
//!
//! Every threshold that the algorithms depend on lives here, so that no
//! routine carries its own ad-hoc magic number. Comparisons that belong to
//! the caller (membership tests, report verdicts) instead take an explicit
//! tolerance argument.

/// Points farther than this from the domain are rejected by `evaluate`;
/// anything closer is projected in. Keeps long iterations alive under
/// floating-point drift without accepting genuinely foreign inputs.
pub const DOMAIN_TOLERANCE: f64 = 1e-9;

/// An operator image may leave the domain by at most this much during
/// construction-time self-map validation.
pub const SELF_MAP_TOLERANCE: f64 = 1e-9;

/// Sampling density used to validate that an operator maps its domain
/// into itself.
pub const SELF_MAP_DENSITY: usize = 20;

/// Seed for the self-map validation sample.
pub const SELF_MAP_SEED: u64 = 42;

/// Two iterates closer than this are treated as a revisit by cycle
/// detection.
pub const CYCLE_TOLERANCE: f64 = 1e-12;

/// Slack allowed when testing that distances to a target point never
/// increase along a trajectory.
pub const FEJER_TOLERANCE: f64 = 1e-12;

/// Slack for step-norm comparisons (monotonicity of step norms and the
/// step = lambda * residual identity).
pub const STEP_TOLERANCE: f64 = 1e-12;

/// Sample pairs closer than this are skipped by all supremum estimators;
/// the defining inequalities are trivially tight at x = y.
pub const PAIR_SKIP_TOLERANCE: f64 = 1e-9;

/// Slack in the enrichment inequality ||b(x-y) + Tx - Ty|| <= (b+1)||x-y||.
pub const ENRICHMENT_TOLERANCE: f64 = 1e-12;

/// Slack in the quasi-nonexpansiveness inequality ||Tx - p|| <= ||x - p||.
pub const QUASI_TOLERANCE: f64 = 1e-12;

/// A supplied fixed point must have residual at most this.
pub const FIXED_POINT_TOLERANCE: f64 = 1e-9;

/// A map counts as nonexpansive when its sampled Lipschitz constant is
/// at most 1 plus this.
pub const NONEXPANSIVE_TOLERANCE: f64 = 1e-12;

/// Error sequences closer than this are treated as equal when comparing
/// convergence rates.
pub const RATE_TOLERANCE: f64 = 1e-14;

/// Default stopping tolerance on the residual ||Tx - x||.
pub const DEFAULT_TOL: f64 = 1e-10;

/// Default iteration cap.
pub const DEFAULT_MAX_ITER: usize = 10_000;

/// Default history length for cycle detection.
pub const DEFAULT_CYCLE_WINDOW: usize = 8;

/// Default sampling density for estimators.
pub const DEFAULT_DENSITY: usize = 200;

/// Default sampler seed.
pub const DEFAULT_SEED: u64 = 42;

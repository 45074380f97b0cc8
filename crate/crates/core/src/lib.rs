//! Fixed-point approximation for nonexpansive-type self-maps of closed
//! convex subsets of R^n via the averaged (Krasnoselskij) iteration
//! x_{n+1} = (1 - lambda) x_n + lambda T x_n, together with an analysis
//! suite that estimates the contractivity constants of a map and derives
//! admissible and optimal step sizes from them.
//!
//! Plain Picard iteration (lambda = 1) can cycle even when a unique fixed
//! point exists: x -> 1 - x on [0, 1] oscillates, and so does any rotation
//! of the disk. Averaging repairs this: a map T satisfying the enrichment
//! inequality ||b(x-y) + Tx - Ty|| <= (b+1)||x-y|| turns nonexpansive after
//! averaging with mu = 1/(b+1), and the iteration with any lambda in
//! (0, mu) then converges to a fixed point of T. The [`analysis`] module
//! estimates the smallest such b from samples; the [`iteration`] module
//! runs and diagnoses the scheme.
//!
//! # Example
//!
//! ```
//! use fixpoint::{analysis, iteration, Domain, IterationConfig, OperatorSpec, Point};
//!
//! // Tx = 1/x on [1/2, 2]: expansive near 1/2, but enrichable.
//! let t = OperatorSpec::reciprocal(Domain::interval(0.5, 2.0)?)?;
//! let b = analysis::minimal_enrichment_b(&t, 200, 42)?
//!     .feasible()
//!     .expect("reciprocal is enriched nonexpansive");
//! let mu = analysis::derive_mu(b)?;
//!
//! // any lambda strictly inside (0, mu) is covered by the convergence
//! // guarantee; take the midpoint
//! let cfg = IterationConfig::with_defaults(mu / 2.0, Point::scalar(2.0)?)?;
//! let traj = iteration::run(&t, &cfg)?;
//! let limit = traj.limit.expect("converged");
//! assert!((limit.coords()[0] - 1.0).abs() < 1e-8);
//! # Ok::<(), fixpoint::Error>(())
//! ```

pub mod analysis;
mod error;
pub mod geometry;
pub mod iteration;
pub mod operators;
pub mod tol;

pub use analysis::{
    classify, ClassificationReport, EnrichmentBound, FixedPointSet, PairVerdict, QuasiVerdict,
};
pub use error::{Error, Result};
pub use geometry::{inner, norm, sample_points, Domain, Point};
pub use iteration::{
    compare_rates, fejer_check, run, Faster, FejerReport, IterationConfig, RateComparison,
    Status, Trajectory,
};
pub use operators::{EnrichmentParams, OperatorDesc, OperatorSpec};

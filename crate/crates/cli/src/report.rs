//! Serializable report bodies for the four workflows. Every report embeds
//! the resolved configuration; floats serialize with serde_json's exact
//! shortest round-trip encoding.

use serde::Serialize;

use fixpoint::analysis::EnrichmentBound;
use fixpoint::{ClassificationReport, Faster, Point, Status};

use crate::config::ConfigEcho;

#[derive(Debug, Serialize)]
pub struct EnrichmentSummary {
    pub min_b: EnrichmentBound,
    pub mu: Option<f64>,
}

#[derive(Debug, Serialize)]
pub struct LambdaSummary {
    /// Resolved step size; absent when auto-resolution failed.
    pub value: Option<f64>,
    /// "fixed" or "auto".
    pub source: &'static str,
    /// Right endpoint mu of the interval (0, mu) covered by the
    /// convergence guarantee, when the enrichment estimate exists.
    pub guaranteed_sup: Option<f64>,
    /// Whether lambda fell strictly inside (0, mu). A lambda outside the
    /// interval is flagged, not asserted divergent.
    pub within_guaranteed_range: Option<bool>,
}

#[derive(Debug, Serialize)]
pub struct RunSummary {
    #[serde(flatten)]
    pub status: Status,
    pub iterations: usize,
    pub limit: Option<Point>,
    pub final_residual: Option<f64>,
    pub trajectory_csv: String,
}

#[derive(Debug, Serialize)]
pub struct IterateReport {
    pub config: ConfigEcho,
    pub enrichment: EnrichmentSummary,
    pub lambda: LambdaSummary,
    pub result: Option<RunSummary>,
}

#[derive(Debug, Serialize)]
pub struct DerivedQuantities {
    /// 1/(min_b + 1) when the enrichment estimate is feasible.
    pub mu: Option<f64>,
    /// Right endpoint of the admissible interval from (pseudo_r, lipschitz_s).
    pub lambda_admissible_sup: Option<f64>,
    pub optimal_lambda: Option<f64>,
    pub enrichment_bound_from_r_s: Option<f64>,
}

#[derive(Debug, Serialize)]
pub struct ClassifyReport {
    pub config: ConfigEcho,
    pub classification: ClassificationReport,
    pub derived: DerivedQuantities,
}

#[derive(Debug, Serialize)]
pub struct TrajectorySummary {
    #[serde(flatten)]
    pub status: Status,
    pub iterations: usize,
    pub errors: Vec<f64>,
    pub trajectory_csv: String,
}

#[derive(Debug, Serialize)]
pub struct CompareReport {
    pub config: ConfigEcho,
    pub lambdas: [f64; 2],
    pub fixed_point: Point,
    pub faster: Faster,
    pub crossover_count: usize,
    pub run_a: TrajectorySummary,
    pub run_b: TrajectorySummary,
}

#[derive(Debug, Serialize)]
pub struct CheckResult {
    pub name: &'static str,
    pub pass: bool,
    pub margin: Option<f64>,
    pub detail: String,
}

#[derive(Debug, Serialize)]
pub struct VerifyReport {
    pub config: ConfigEcho,
    pub checks: Vec<CheckResult>,
    pub all_pass: bool,
}

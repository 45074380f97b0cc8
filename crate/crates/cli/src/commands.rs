//! The four workflows behind the subcommands, mapped onto the exit-code
//! contract: 0 success/all-pass, 1 config error, 2 verification failure,
//! 3 numeric failure.

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use fixpoint::analysis::{
    self, hausdorff_distance, probe_fixed_points, EnrichmentBound,
};
use fixpoint::iteration::{compare_rates, fejer_check, run, IterationConfig, Trajectory};
use fixpoint::tol::FIXED_POINT_TOLERANCE;
use fixpoint::Point;

use crate::config::{self, LambdaSpec, Resolved};
use crate::report::{
    CheckResult, ClassifyReport, CompareReport, DerivedQuantities, EnrichmentSummary,
    IterateReport, LambdaSummary, RunSummary, TrajectorySummary, VerifyReport,
};

/// Residual enrichment allowed when re-checking the averaged operator on a
/// fresh sample: the enrichment estimate is a supremum over the original
/// sample, so fresh pairs can demand slightly more than zero.
const AVERAGED_ENRICHMENT_SLACK: f64 = 0.02;

/// Midpoints of probed fixed points may carry this multiple of the probe
/// tolerance as residual before the convexity check fails.
const MIDPOINT_RESIDUAL_FACTOR: f64 = 10.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Command {
    Iterate,
    Classify,
    Compare,
    Verify,
}

impl Command {
    pub fn as_str(&self) -> &'static str {
        match self {
            Command::Iterate => "iterate",
            Command::Classify => "classify",
            Command::Compare => "compare",
            Command::Verify => "verify",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExitKind {
    Config = 1,
    Verification = 2,
    Numeric = 3,
}

#[derive(Debug)]
pub struct CliError {
    pub kind: ExitKind,
    pub message: String,
}

impl CliError {
    pub fn config(message: impl Into<String>) -> Self {
        CliError { kind: ExitKind::Config, message: message.into() }
    }

    pub fn numeric(message: impl Into<String>) -> Self {
        CliError { kind: ExitKind::Numeric, message: message.into() }
    }

    pub fn code(&self) -> i32 {
        self.kind as i32
    }
}

/// Loads, resolves and runs one workflow; returns the process exit code.
pub fn execute(command: Command, config_path: &Path, out_dir: &Path) -> Result<i32, CliError> {
    let file = config::load(config_path)?;
    let resolved = config::resolve(file, command)?;
    fs::create_dir_all(out_dir)
        .map_err(|e| CliError::config(format!("cannot create {}: {e}", out_dir.display())))?;
    match command {
        Command::Iterate => cmd_iterate(&resolved, out_dir),
        Command::Classify => cmd_classify(&resolved, out_dir),
        Command::Compare => cmd_compare(&resolved, out_dir),
        Command::Verify => cmd_verify(&resolved, out_dir),
    }
}

fn write_json<T: Serialize>(out_dir: &Path, name: &Path, value: &T) -> Result<(), CliError> {
    let path = out_dir.join(name);
    let mut body = serde_json::to_string_pretty(value)
        .map_err(|e| CliError::config(format!("cannot serialize report: {e}")))?;
    body.push('\n');
    fs::write(&path, body)
        .map_err(|e| CliError::config(format!("cannot write {}: {e}", path.display())))?;
    println!("wrote {}", path.display());
    Ok(())
}

fn write_csv(out_dir: &Path, name: &Path, traj: &Trajectory) -> Result<(), CliError> {
    let path = out_dir.join(name);
    let body = traj
        .to_csv_string()
        .map_err(|e| CliError::config(format!("cannot serialize trajectory: {e}")))?;
    fs::write(&path, body)
        .map_err(|e| CliError::config(format!("cannot write {}: {e}", path.display())))?;
    println!("wrote {}", path.display());
    Ok(())
}

/// min_b and the matching mu for the configured sample.
fn enrichment_summary(resolved: &Resolved) -> Result<EnrichmentSummary, CliError> {
    let min_b = analysis::minimal_enrichment_b(&resolved.op, resolved.density, resolved.seed)
        .map_err(|e| CliError::numeric(format!("enrichment estimation failed: {e}")))?;
    let mu = match min_b {
        EnrichmentBound::Feasible(b) => Some(
            analysis::derive_mu(b)
                .map_err(|e| CliError::numeric(format!("mu derivation failed: {e}")))?,
        ),
        EnrichmentBound::Infeasible => None,
    };
    Ok(EnrichmentSummary { min_b, mu })
}

fn cmd_iterate(resolved: &Resolved, out_dir: &Path) -> Result<i32, CliError> {
    let enrichment = enrichment_summary(resolved)?;

    let (lambda, source) = match &resolved.lambda {
        None => return Err(CliError::config("scheme.lambda is required for iterate")),
        Some(LambdaSpec::Fixed(v)) => (Some(*v), "fixed"),
        Some(LambdaSpec::Pair(_)) => {
            return Err(CliError::config(
                "scheme.lambda must be a number or \"auto\" for iterate",
            ))
        }
        Some(LambdaSpec::Keyword(word)) if word == "auto" => {
            // midpoint of the guaranteed open interval (0, mu)
            (enrichment.mu.map(|mu| mu / 2.0), "auto")
        }
        Some(LambdaSpec::Keyword(other)) => {
            return Err(CliError::config(format!(
                "unknown lambda keyword `{other}` (expected \"auto\")"
            )))
        }
    };

    let Some(lambda) = lambda else {
        let report = IterateReport {
            config: resolved.echo(),
            enrichment,
            lambda: LambdaSummary {
                value: None,
                source,
                guaranteed_sup: None,
                within_guaranteed_range: None,
            },
            result: None,
        };
        write_json(out_dir, &resolved.report_json, &report)?;
        return Err(CliError::numeric(
            "enrichment is infeasible on the sample: no b >= 0 satisfies the \
             enrichment inequality, so lambda = \"auto\" cannot be resolved",
        ));
    };

    let cfg = IterationConfig::new(
        lambda,
        resolved.x0.clone(),
        resolved.tol,
        resolved.max_iter,
        resolved.cycle_window,
    )
    .map_err(|e| CliError::config(format!("invalid scheme: {e}")))?;
    let traj = run(&resolved.op, &cfg)
        .map_err(|e| CliError::config(format!("iteration failed: {e}")))?;

    write_csv(out_dir, &resolved.trajectory_csv, &traj)?;
    let report = IterateReport {
        config: resolved.echo(),
        lambda: LambdaSummary {
            value: Some(lambda),
            source,
            guaranteed_sup: enrichment.mu,
            within_guaranteed_range: enrichment.mu.map(|mu| lambda < mu),
        },
        enrichment,
        result: Some(RunSummary {
            status: traj.status.clone(),
            iterations: traj.iterations(),
            limit: traj.limit.clone(),
            final_residual: traj.final_residual(),
            trajectory_csv: resolved.trajectory_csv.display().to_string(),
        }),
    };
    write_json(out_dir, &resolved.report_json, &report)?;
    println!(
        "iterate: {} after {} iterations (lambda = {lambda})",
        status_line(&traj),
        traj.iterations()
    );
    Ok(0)
}

fn status_line(traj: &Trajectory) -> String {
    match &traj.status {
        fixpoint::Status::Converged => "converged".to_string(),
        fixpoint::Status::MaxIterReached => "max_iter_reached".to_string(),
        fixpoint::Status::CycleDetected { period } => {
            format!("cycle_detected(period={period})")
        }
    }
}

fn cmd_classify(resolved: &Resolved, out_dir: &Path) -> Result<i32, CliError> {
    let classification =
        analysis::classify(&resolved.op, resolved.density, resolved.seed, resolved.tol)
            .map_err(|e| CliError::numeric(format!("classification failed: {e}")))?;
    let (r, s) = (classification.pseudo_r, classification.lipschitz_s);
    let derived = DerivedQuantities {
        mu: classification.mu,
        lambda_admissible_sup: analysis::lambda_admissible_range(r, s).ok(),
        optimal_lambda: analysis::optimal_lambda(r, s).ok(),
        enrichment_bound_from_r_s: analysis::enrichment_bound_from_r_s(r, s).ok(),
    };
    let report = ClassifyReport { config: resolved.echo(), classification, derived };
    write_json(out_dir, &resolved.report_json, &report)?;
    println!(
        "classify: s = {}, nonexpansive = {}",
        report.classification.lipschitz_s, report.classification.nonexpansive.holds
    );
    Ok(0)
}

fn suffixed(name: &Path, suffix: &str) -> std::path::PathBuf {
    let stem = name.file_stem().and_then(|s| s.to_str()).unwrap_or("trajectory");
    let ext = name.extension().and_then(|s| s.to_str()).unwrap_or("csv");
    name.with_file_name(format!("{stem}_{suffix}.{ext}"))
}

fn cmd_compare(resolved: &Resolved, out_dir: &Path) -> Result<i32, CliError> {
    let lambdas = match &resolved.lambda {
        Some(LambdaSpec::Pair(pair)) => *pair,
        _ => {
            return Err(CliError::config(
                "compare requires scheme.lambda = [lambda_a, lambda_b]",
            ))
        }
    };

    let fixed_point = match &resolved.fixed_point {
        Some(p) => {
            let residual = resolved
                .op
                .fixed_point_residual(p)
                .map_err(|e| CliError::config(format!("invalid fixed_point: {e}")))?;
            if residual > FIXED_POINT_TOLERANCE {
                return Err(CliError::config(format!(
                    "supplied fixed_point has residual {residual:.3e}"
                )));
            }
            p.clone()
        }
        None => {
            let probed = probe_fixed_points(&resolved.op, resolved.density, resolved.tol)
                .map_err(|e| CliError::numeric(format!("fixed-point probe failed: {e}")))?;
            probed.points.first().cloned().ok_or_else(|| {
                CliError::numeric("no fixed point available for rate comparison")
            })?
        }
    };

    let mut runs = Vec::new();
    for lambda in lambdas {
        let cfg = IterationConfig::new(
            lambda,
            resolved.x0.clone(),
            resolved.tol,
            resolved.max_iter,
            resolved.cycle_window,
        )
        .map_err(|e| CliError::config(format!("invalid scheme: {e}")))?;
        runs.push(
            run(&resolved.op, &cfg)
                .map_err(|e| CliError::config(format!("iteration failed: {e}")))?,
        );
    }
    let (a, b) = (&runs[0], &runs[1]);
    let verdict = compare_rates(a, b, &fixed_point)
        .map_err(|e| CliError::numeric(format!("rate comparison failed: {e}")))?;

    let errors = |traj: &Trajectory| -> Vec<f64> {
        traj.points
            .iter()
            .map(|x| {
                fixpoint::geometry::distance(x, &fixed_point).expect("dimensions already checked")
            })
            .collect()
    };
    let (errors_a, errors_b) = (errors(a), errors(b));

    let csv_a = suffixed(&resolved.trajectory_csv, "a");
    let csv_b = suffixed(&resolved.trajectory_csv, "b");
    write_csv(out_dir, &csv_a, a)?;
    write_csv(out_dir, &csv_b, b)?;

    let report = CompareReport {
        config: resolved.echo(),
        lambdas,
        fixed_point,
        faster: verdict.faster,
        crossover_count: verdict.crossover_count,
        run_a: TrajectorySummary {
            status: a.status.clone(),
            iterations: a.iterations(),
            errors: errors_a,
            trajectory_csv: csv_a.display().to_string(),
        },
        run_b: TrajectorySummary {
            status: b.status.clone(),
            iterations: b.iterations(),
            errors: errors_b,
            trajectory_csv: csv_b.display().to_string(),
        },
    };
    write_json(out_dir, &resolved.report_json, &report)?;
    println!("compare: faster = {:?}", report.faster);
    Ok(0)
}

fn cmd_verify(resolved: &Resolved, out_dir: &Path) -> Result<i32, CliError> {
    let op = &resolved.op;
    let enrichment = enrichment_summary(resolved)?;
    let mut checks = Vec::new();

    checks.push(CheckResult {
        name: "enrichment_feasible",
        pass: enrichment.min_b.is_feasible(),
        margin: enrichment.min_b.feasible(),
        detail: match enrichment.min_b {
            EnrichmentBound::Feasible(b) => format!("min_b = {b}"),
            EnrichmentBound::Infeasible => {
                "no b >= 0 satisfies the enrichment inequality on the sample".to_string()
            }
        },
    });

    let fix_t = probe_fixed_points(op, resolved.density, resolved.tol)
        .map_err(|e| CliError::numeric(format!("fixed-point probe failed: {e}")))?;

    let averaged = match enrichment.mu {
        Some(mu) => Some(
            op.averaged(mu)
                .map_err(|e| CliError::numeric(format!("averaging failed: {e}")))?,
        ),
        None => None,
    };

    // Fix(T) and Fix(T_mu) must agree as sets.
    checks.push(match &averaged {
        Some(t_mu) => {
            let fix_mu = probe_fixed_points(t_mu, resolved.density, resolved.tol)
                .map_err(|e| CliError::numeric(format!("fixed-point probe failed: {e}")))?;
            let dist = hausdorff_distance(&fix_t.points, &fix_mu.points)
                .map_err(|e| CliError::numeric(format!("set comparison failed: {e}")))?;
            let bound = 2.0 * fix_t.grid_spacing;
            CheckResult {
                name: "fixed_point_set_equality",
                pass: dist <= bound,
                margin: Some(dist),
                detail: format!(
                    "Hausdorff distance {dist:.3e} between {} and {} probed points (bound {bound:.3e})",
                    fix_t.points.len(),
                    fix_mu.points.len()
                ),
            }
        }
        None => CheckResult {
            name: "fixed_point_set_equality",
            pass: false,
            margin: None,
            detail: "skipped: enrichment infeasible, averaged operator undefined".to_string(),
        },
    });

    // The averaged operator must be nonexpansive on a fresh sample: its own
    // minimal enrichment constant there should vanish.
    checks.push(match &averaged {
        Some(t_mu) => {
            let fresh_seed = resolved.seed.wrapping_add(1);
            let residual_b =
                analysis::minimal_enrichment_b(t_mu, resolved.density, fresh_seed)
                    .map_err(|e| CliError::numeric(format!("enrichment estimation failed: {e}")))?;
            let (pass, margin, detail) = match residual_b {
                EnrichmentBound::Feasible(b) => (
                    b <= AVERAGED_ENRICHMENT_SLACK,
                    Some(b),
                    format!("min_b(T_mu) = {b} on seed {fresh_seed} (bound {AVERAGED_ENRICHMENT_SLACK})"),
                ),
                EnrichmentBound::Infeasible => {
                    (false, None, format!("min_b(T_mu) infeasible on seed {fresh_seed}"))
                }
            };
            CheckResult { name: "averaged_nonexpansive_fresh_sample", pass, margin, detail }
        }
        None => CheckResult {
            name: "averaged_nonexpansive_fresh_sample",
            pass: false,
            margin: None,
            detail: "skipped: enrichment infeasible, averaged operator undefined".to_string(),
        },
    });

    // Midpoints of fixed points must themselves be fixed (convexity).
    let convexity_bound = MIDPOINT_RESIDUAL_FACTOR * resolved.tol;
    let mut worst_mid = 0.0_f64;
    let mut mid_pairs = 0usize;
    {
        let pts = &fix_t.points;
        let mut pairs: Vec<(usize, usize)> = Vec::new();
        if pts.len() <= 200 {
            for i in 0..pts.len() {
                for j in (i + 1)..pts.len() {
                    pairs.push((i, j));
                }
            }
        } else {
            // large sets: consecutive pairs plus the extreme pair
            for i in 0..pts.len() - 1 {
                pairs.push((i, i + 1));
            }
            pairs.push((0, pts.len() - 1));
        }
        for (i, j) in pairs {
            let mid = Point::new(
                pts[i]
                    .coords()
                    .iter()
                    .zip(pts[j].coords())
                    .map(|(a, b)| 0.5 * (a + b))
                    .collect(),
            )
            .map_err(|e| CliError::numeric(format!("midpoint construction failed: {e}")))?;
            let residual = op
                .fixed_point_residual(&mid)
                .map_err(|e| CliError::numeric(format!("residual evaluation failed: {e}")))?;
            worst_mid = worst_mid.max(residual);
            mid_pairs += 1;
        }
    }
    checks.push(CheckResult {
        name: "fixed_point_set_convex",
        pass: worst_mid <= convexity_bound,
        margin: Some(worst_mid),
        detail: if mid_pairs == 0 {
            "vacuous: fewer than two probed fixed points".to_string()
        } else {
            format!("worst midpoint residual {worst_mid:.3e} over {mid_pairs} pairs (bound {convexity_bound:.3e})")
        },
    });

    // Distances to every probed fixed point must be nonincreasing along a
    // run with lambda inside (0, mu).
    checks.push(match enrichment.mu {
        Some(mu) => {
            let cfg = IterationConfig::new(
                mu / 2.0,
                resolved.x0.clone(),
                resolved.tol,
                resolved.max_iter,
                resolved.cycle_window,
            )
            .map_err(|e| CliError::config(format!("invalid scheme: {e}")))?;
            let traj = run(op, &cfg)
                .map_err(|e| CliError::config(format!("iteration failed: {e}")))?;
            let mut pass = true;
            let mut detail = format!(
                "lambda = {} ({} iterations, {})",
                mu / 2.0,
                traj.iterations(),
                status_line(&traj)
            );
            for p in &fix_t.points {
                let report = fejer_check(&traj, p)
                    .map_err(|e| CliError::numeric(format!("fejer check failed: {e}")))?;
                if !report.monotone {
                    pass = false;
                    detail = format!(
                        "distance to {:?} increased at step {}",
                        p.coords(),
                        report.first_violation.unwrap_or_default()
                    );
                    break;
                }
            }
            CheckResult { name: "fejer_monotone", pass, margin: None, detail }
        }
        None => CheckResult {
            name: "fejer_monotone",
            pass: false,
            margin: None,
            detail: "skipped: enrichment infeasible, no guaranteed lambda range".to_string(),
        },
    });

    let all_pass = checks.iter().all(|c| c.pass);
    for check in &checks {
        println!(
            "verify: {} {} ({})",
            if check.pass { "PASS" } else { "FAIL" },
            check.name,
            check.detail
        );
    }
    let report = VerifyReport { config: resolved.echo(), checks, all_pass };
    write_json(out_dir, &resolved.report_json, &report)?;
    Ok(if all_pass { 0 } else { 2 })
}

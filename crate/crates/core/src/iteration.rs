//! The averaged iteration engine x_{n+1} = (1 - lambda) x_n + lambda T x_n,
//! with stopping rules, cycle detection, trajectory recording and
//! convergence diagnostics.

use std::io::{self, Write};

use serde::Serialize;

use crate::error::{Error, Result};
use crate::geometry::{distance, lincomb, norm_of, sub, Point};
use crate::operators::OperatorSpec;
use crate::tol::{
    CYCLE_TOLERANCE, DEFAULT_CYCLE_WINDOW, DEFAULT_MAX_ITER, DEFAULT_TOL, DOMAIN_TOLERANCE,
    FEJER_TOLERANCE, RATE_TOLERANCE, STEP_TOLERANCE,
};

/// Scheme parameters for one run. `lambda = 1` is plain Picard iteration.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct IterationConfig {
    pub lambda: f64,
    pub x0: Point,
    /// Stopping tolerance on the residual ||T x_n - x_n||, which measures
    /// distance to the fixed-point set directly; stopping on step norms
    /// would let a small lambda fake convergence.
    pub tol: f64,
    pub max_iter: usize,
    /// History length consulted by cycle detection.
    pub cycle_window: usize,
}

impl IterationConfig {
    pub fn new(
        lambda: f64,
        x0: Point,
        tol: f64,
        max_iter: usize,
        cycle_window: usize,
    ) -> Result<Self> {
        let cfg = IterationConfig { lambda, x0, tol, max_iter, cycle_window };
        cfg.validate()?;
        Ok(cfg)
    }

    /// Scheme with the default tolerance (1e-10), cap (10 000) and cycle
    /// window (8).
    pub fn with_defaults(lambda: f64, x0: Point) -> Result<Self> {
        Self::new(lambda, x0, DEFAULT_TOL, DEFAULT_MAX_ITER, DEFAULT_CYCLE_WINDOW)
    }

    pub fn validate(&self) -> Result<()> {
        if !self.lambda.is_finite() || self.lambda <= 0.0 || self.lambda > 1.0 {
            return Err(Error::InvalidParameter {
                name: "lambda",
                value: self.lambda,
                constraint: "in (0, 1]",
            });
        }
        if !self.tol.is_finite() || self.tol <= 0.0 {
            return Err(Error::InvalidParameter {
                name: "tol",
                value: self.tol,
                constraint: "> 0",
            });
        }
        if self.max_iter == 0 {
            return Err(Error::InvalidParameter {
                name: "max_iter",
                value: 0.0,
                constraint: ">= 1",
            });
        }
        if self.cycle_window == 0 {
            return Err(Error::InvalidParameter {
                name: "cycle_window",
                value: 0.0,
                constraint: ">= 1",
            });
        }
        Ok(())
    }
}

/// Why a run stopped.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum Status {
    Converged,
    MaxIterReached,
    CycleDetected { period: usize },
}

/// The recorded sequence x_0 .. x_N with per-step diagnostics.
///
/// Lengths are consistent: `residuals` has one entry per point and
/// `step_norms` one entry per transition.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Trajectory {
    pub points: Vec<Point>,
    pub residuals: Vec<f64>,
    pub step_norms: Vec<f64>,
    pub status: Status,
    /// Final iterate, present only when the run converged.
    pub limit: Option<Point>,
}

impl Trajectory {
    pub fn dim(&self) -> usize {
        self.points.first().map_or(0, Point::dim)
    }

    /// Number of steps taken (one less than the number of points).
    pub fn iterations(&self) -> usize {
        self.points.len().saturating_sub(1)
    }

    pub fn final_residual(&self) -> Option<f64> {
        self.residuals.last().copied()
    }

    /// Writes the trajectory as CSV: header `n,x_0..x_{d-1},residual,step_norm`,
    /// one row per iterate, step_norm empty on the last row. Numbers carry
    /// 17 significant digits so doubles round-trip exactly.
    pub fn write_csv<W: Write>(&self, mut w: W) -> io::Result<()> {
        let dim = self.dim();
        if dim == 0 {
            return Err(io::Error::new(io::ErrorKind::InvalidInput, "empty trajectory"));
        }
        let mut header = String::from("n");
        for i in 0..dim {
            header.push_str(&format!(",x_{i}"));
        }
        header.push_str(",residual,step_norm");
        writeln!(w, "{header}")?;
        for (n, point) in self.points.iter().enumerate() {
            let coords: Vec<String> = point.coords().iter().map(|c| fmt_f64(*c)).collect();
            let residual = self
                .residuals
                .get(n)
                .map_or(String::new(), |r| fmt_f64(*r));
            let step = self
                .step_norms
                .get(n)
                .map_or(String::new(), |s| fmt_f64(*s));
            writeln!(w, "{n},{},{residual},{step}", coords.join(","))?;
        }
        Ok(())
    }

    pub fn to_csv_string(&self) -> Result<String> {
        if self.points.is_empty() {
            return Err(Error::EmptyTrajectory);
        }
        let mut buf = Vec::new();
        self.write_csv(&mut buf).expect("writing to a Vec cannot fail");
        Ok(String::from_utf8(buf).expect("CSV output is ASCII"))
    }
}

/// 17 significant digits, enough to reconstruct the exact double.
pub(crate) fn fmt_f64(v: f64) -> String {
    format!("{v:.16e}")
}

/// Runs the averaged iteration until the residual drops to `cfg.tol`, the
/// iteration cap is hit, or an earlier iterate is revisited.
///
/// Every new iterate is projected into the domain before the next
/// evaluation, so rounding cannot walk a long run out of the set. Cycle
/// detection compares the newest iterate against the last `cycle_window`
/// ones; the reported period is the lag of the first match.
pub fn run(op: &OperatorSpec, cfg: &IterationConfig) -> Result<Trajectory> {
    cfg.validate()?;
    if cfg.x0.dim() != op.dim() {
        return Err(Error::DimensionMismatch {
            expected: op.dim(),
            actual: cfg.x0.dim(),
        });
    }
    let start_dist = op.domain().distance_from(&cfg.x0)?;
    if start_dist > DOMAIN_TOLERANCE {
        return Err(Error::DomainViolation {
            point: cfg.x0.coords().to_vec(),
            distance: start_dist,
        });
    }

    let one_minus_lambda = 1.0 - cfg.lambda;
    let mut points = vec![op.domain().project(&cfg.x0)?];
    let mut residuals = Vec::new();
    let mut step_norms = Vec::new();

    loop {
        let n = points.len() - 1;
        let x = points[n].clone();
        let tx = op.evaluate(&x)?;
        let residual = distance(&tx, &x)?;
        residuals.push(residual);

        if residual <= cfg.tol {
            return Ok(Trajectory {
                limit: Some(x),
                points,
                residuals,
                step_norms,
                status: Status::Converged,
            });
        }
        if n == cfg.max_iter {
            return Ok(Trajectory {
                points,
                residuals,
                step_norms,
                status: Status::MaxIterReached,
                limit: None,
            });
        }

        let raw = lincomb(one_minus_lambda, x.coords(), cfg.lambda, tx.coords());
        let next = op.domain().project(&Point::new(raw)?)?;
        step_norms.push(norm_of(&sub(next.coords(), x.coords())));

        let period = (1..=cfg.cycle_window.min(points.len()))
            .find(|lag| {
                norm_of(&sub(next.coords(), points[points.len() - lag].coords()))
                    <= CYCLE_TOLERANCE
            });
        points.push(next);

        if let Some(period) = period {
            // record the revisiting iterate's residual so lengths stay consistent
            let last = points.last().expect("just pushed");
            let t_last = op.evaluate(last)?;
            residuals.push(distance(&t_last, last)?);
            return Ok(Trajectory {
                points,
                residuals,
                step_norms,
                status: Status::CycleDetected { period },
                limit: None,
            });
        }
    }
}

/// Outcome of the distance-monotonicity check against a target point.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FejerReport {
    pub monotone: bool,
    /// Smallest n with ||x_{n+1} - p|| > ||x_n - p||, if any.
    pub first_violation: Option<usize>,
}

/// Checks that distances to `p` never increase along the trajectory.
pub fn fejer_check(traj: &Trajectory, p: &Point) -> Result<FejerReport> {
    if traj.points.is_empty() {
        return Err(Error::EmptyTrajectory);
    }
    if p.dim() != traj.dim() {
        return Err(Error::DimensionMismatch {
            expected: traj.dim(),
            actual: p.dim(),
        });
    }
    let dists: Vec<f64> = traj
        .points
        .iter()
        .map(|x| norm_of(&sub(x.coords(), p.coords())))
        .collect();
    let first_violation = dists
        .windows(2)
        .position(|w| w[1] > w[0] + FEJER_TOLERANCE);
    Ok(FejerReport {
        monotone: first_violation.is_none(),
        first_violation,
    })
}

/// Step-norm diagnostics over the trajectory tail.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RegularityReport {
    /// Whether the whole step-norm sequence is nonincreasing.
    pub nonincreasing: bool,
    /// Largest of the last `window` step norms.
    pub tail_max: f64,
}

/// Asymptotic-regularity diagnostic: step norms ||x_{n+1} - x_n|| should
/// shrink for averaged maps of nonexpansive operators, while a Picard
/// oscillation keeps them bounded away from zero.
pub fn asymptotic_regularity_check(traj: &Trajectory, window: usize) -> Result<RegularityReport> {
    if window == 0 {
        return Err(Error::InvalidParameter {
            name: "window",
            value: 0.0,
            constraint: ">= 1",
        });
    }
    if traj.points.len() < window + 1 {
        return Err(Error::TrajectoryTooShort {
            needed: window + 1,
            actual: traj.points.len(),
        });
    }
    let nonincreasing = traj
        .step_norms
        .windows(2)
        .all(|w| w[1] <= w[0] + STEP_TOLERANCE);
    let tail_max = traj.step_norms[traj.step_norms.len() - window..]
        .iter()
        .fold(0.0_f64, |acc, s| acc.max(*s));
    Ok(RegularityReport { nonincreasing, tail_max })
}

/// Which trajectory approached the target faster.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Faster {
    A,
    B,
    Tie,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RateComparison {
    pub faster: Faster,
    /// Sign changes of ||x_n^A - p|| - ||x_n^B - p|| over the common range.
    pub crossover_count: usize,
}

/// Compares error sequences e_n = ||x_n - p|| over the common index range.
///
/// A trajectory counts as faster when its error stays at or below the
/// other's for every index past the first significant difference;
/// otherwise the verdict is a tie.
pub fn compare_rates(a: &Trajectory, b: &Trajectory, p: &Point) -> Result<RateComparison> {
    if a.points.is_empty() || b.points.is_empty() {
        return Err(Error::EmptyTrajectory);
    }
    if a.dim() != p.dim() || b.dim() != p.dim() {
        return Err(Error::DimensionMismatch {
            expected: p.dim(),
            actual: if a.dim() != p.dim() { a.dim() } else { b.dim() },
        });
    }
    let common = a.points.len().min(b.points.len());
    let diffs: Vec<f64> = (0..common)
        .map(|n| {
            let ea = norm_of(&sub(a.points[n].coords(), p.coords()));
            let eb = norm_of(&sub(b.points[n].coords(), p.coords()));
            ea - eb
        })
        .collect();

    let signs: Vec<i8> = diffs
        .iter()
        .filter(|d| d.abs() > RATE_TOLERANCE)
        .map(|d| if *d > 0.0 { 1 } else { -1 })
        .collect();
    let crossover_count = signs.windows(2).filter(|w| w[0] != w[1]).count();

    let faster = match diffs.iter().position(|d| d.abs() > RATE_TOLERANCE) {
        None => Faster::Tie,
        Some(first) => {
            if diffs[first] < 0.0 && diffs[first..].iter().all(|d| *d <= RATE_TOLERANCE) {
                Faster::A
            } else if diffs[first] > 0.0 && diffs[first..].iter().all(|d| *d >= -RATE_TOLERANCE) {
                Faster::B
            } else {
                Faster::Tie
            }
        }
    };
    Ok(RateComparison { faster, crossover_count })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::Domain;

    fn pt(coords: &[f64]) -> Point {
        Point::new(coords.to_vec()).unwrap()
    }

    fn reciprocal() -> OperatorSpec {
        OperatorSpec::reciprocal(Domain::interval(0.5, 2.0).unwrap()).unwrap()
    }

    fn reflection() -> OperatorSpec {
        OperatorSpec::affine_reflection(Domain::interval(0.0, 1.0).unwrap()).unwrap()
    }

    fn quarter_turn() -> OperatorSpec {
        let disk = Domain::ball(vec![0.0, 0.0], 1.0).unwrap();
        OperatorSpec::rotation(disk, std::f64::consts::FRAC_PI_2).unwrap()
    }

    #[test]
    fn picard_reflection_cycles_with_period_two() {
        let cfg = IterationConfig::with_defaults(1.0, pt(&[1.0])).unwrap();
        let traj = run(&reflection(), &cfg).unwrap();
        assert_eq!(traj.status, Status::CycleDetected { period: 2 });
        for (n, p) in traj.points.iter().enumerate() {
            let expected = if n % 2 == 0 { 1.0 } else { 0.0 };
            assert_eq!(p.coords()[0], expected, "iterate {n}");
        }
        assert!(traj.limit.is_none());
        assert_eq!(traj.residuals.len(), traj.points.len());
        assert_eq!(traj.step_norms.len(), traj.points.len() - 1);
    }

    #[test]
    fn averaged_reflection_converges_in_one_step() {
        let cfg = IterationConfig::with_defaults(0.5, pt(&[1.0])).unwrap();
        let traj = run(&reflection(), &cfg).unwrap();
        assert_eq!(traj.status, Status::Converged);
        assert_eq!(traj.points.len(), 2);
        assert_eq!(traj.limit, Some(pt(&[0.5])));
        assert_eq!(*traj.residuals.last().unwrap(), 0.0);
    }

    #[test]
    fn reciprocal_matches_direct_recurrence() {
        // independent oracle: the recurrence x <- 0.6 x + 0.4 / x run directly
        let mut x = 2.0_f64;
        let mut count = 0usize;
        while (1.0 / x - x).abs() > 1e-10 {
            x = 0.6 * x + 0.4 * (1.0 / x);
            count += 1;
        }
        assert_eq!(count, 16, "oracle drifted from its frozen value");

        let cfg = IterationConfig::with_defaults(0.4, pt(&[2.0])).unwrap();
        let traj = run(&reciprocal(), &cfg).unwrap();
        assert_eq!(traj.status, Status::Converged);
        assert_eq!(traj.iterations(), count);
        let limit = traj.limit.unwrap();
        assert!((limit.coords()[0] - 1.0).abs() <= 1e-8);
        assert!((limit.coords()[0] - x).abs() == 0.0, "engine and oracle iterates diverged");
    }

    #[test]
    fn rotation_contracts_at_cos_half_angle() {
        let cfg = IterationConfig::with_defaults(0.5, pt(&[1.0, 0.0])).unwrap();
        let traj = run(&quarter_turn(), &cfg).unwrap();
        assert_eq!(traj.status, Status::Converged);
        let factor = std::f64::consts::FRAC_1_SQRT_2;
        for (n, p) in traj.points.iter().enumerate().take(41) {
            let expected = factor.powi(n as i32);
            assert!(
                (crate::geometry::norm(p) - expected).abs() <= 1e-12,
                "norm at step {n}"
            );
        }
        let limit = traj.limit.unwrap();
        assert!(crate::geometry::norm(&limit) <= 1e-9);
    }

    #[test]
    fn picard_rotation_cycles_with_period_four() {
        let cfg = IterationConfig::with_defaults(1.0, pt(&[1.0, 0.0])).unwrap();
        let traj = run(&quarter_turn(), &cfg).unwrap();
        assert_eq!(traj.status, Status::CycleDetected { period: 4 });
    }

    #[test]
    fn run_rejects_bad_inputs() {
        let t = reciprocal();
        let outside = IterationConfig::with_defaults(0.5, pt(&[4.0])).unwrap();
        assert!(matches!(run(&t, &outside), Err(Error::DomainViolation { .. })));
        let bad_lambda = IterationConfig { lambda: 0.0, ..IterationConfig::with_defaults(0.5, pt(&[1.0])).unwrap() };
        assert!(run(&t, &bad_lambda).is_err());
        let wrong_dim = IterationConfig::with_defaults(0.5, pt(&[1.0, 1.0])).unwrap();
        assert!(matches!(run(&t, &wrong_dim), Err(Error::DimensionMismatch { .. })));
    }

    #[test]
    fn fejer_on_guaranteed_run_is_monotone() {
        let cfg = IterationConfig::with_defaults(0.4, pt(&[2.0])).unwrap();
        let traj = run(&reciprocal(), &cfg).unwrap();
        let report = fejer_check(&traj, &pt(&[1.0])).unwrap();
        assert!(report.monotone);
        assert_eq!(report.first_violation, None);
    }

    #[test]
    fn fejer_on_picard_cycle_is_equidistant() {
        let cfg = IterationConfig::with_defaults(1.0, pt(&[1.0])).unwrap();
        let traj = run(&reflection(), &cfg).unwrap();
        let report = fejer_check(&traj, &pt(&[0.5])).unwrap();
        assert!(report.monotone);
    }

    #[test]
    fn fejer_detects_expansion_at_step_zero() {
        let t = OperatorSpec::scaled(Domain::interval(0.0, 1.0).unwrap(), 2.0).unwrap();
        let cfg = IterationConfig::with_defaults(1.0, pt(&[0.5])).unwrap();
        let traj = run(&t, &cfg).unwrap();
        let report = fejer_check(&traj, &pt(&[0.0])).unwrap();
        assert!(!report.monotone);
        assert_eq!(report.first_violation, Some(0));
    }

    #[test]
    fn fejer_rejects_empty_and_mismatched() {
        let traj = Trajectory {
            points: vec![],
            residuals: vec![],
            step_norms: vec![],
            status: Status::MaxIterReached,
            limit: None,
        };
        assert!(matches!(fejer_check(&traj, &pt(&[0.0])), Err(Error::EmptyTrajectory)));
    }

    #[test]
    fn regularity_of_averaged_run() {
        let cfg = IterationConfig::with_defaults(0.4, pt(&[2.0])).unwrap();
        let traj = run(&reciprocal(), &cfg).unwrap();
        let report = asymptotic_regularity_check(&traj, 10).unwrap();
        assert!(report.nonincreasing);
        // oracle value: lambda * residual ten steps before the stop,
        // computed by the same direct recurrence as above
        let mut x = 2.0_f64;
        let mut steps = Vec::new();
        while (1.0 / x - x).abs() > 1e-10 {
            let next = 0.6 * x + 0.4 * (1.0 / x);
            steps.push((next - x).abs());
            x = next;
        }
        let oracle_tail = steps[steps.len() - 10..].iter().fold(0.0_f64, |a, s| a.max(*s));
        assert_eq!(report.tail_max, oracle_tail);
        assert!(report.tail_max < 1e-3);
    }

    #[test]
    fn regularity_of_picard_cycle_has_unit_tail() {
        let mut cfg = IterationConfig::with_defaults(1.0, pt(&[1.0])).unwrap();
        cfg.cycle_window = 1; // let the oscillation run past the window length
        let traj = run(&reflection(), &cfg).unwrap();
        // period-2 revisits are invisible at window 1, so the run hits max_iter
        assert_eq!(traj.status, Status::MaxIterReached);
        let report = asymptotic_regularity_check(&traj, 5).unwrap();
        assert!(report.nonincreasing); // constant steps
        assert_eq!(report.tail_max, 1.0);
    }

    #[test]
    fn regularity_rejects_short_trajectories() {
        let cfg = IterationConfig::with_defaults(0.5, pt(&[1.0])).unwrap();
        let traj = run(&reflection(), &cfg).unwrap(); // 2 points
        assert!(matches!(
            asymptotic_regularity_check(&traj, 5),
            Err(Error::TrajectoryTooShort { .. })
        ));
        assert!(asymptotic_regularity_check(&traj, 0).is_err());
    }

    #[test]
    fn converged_step_bound_scales_with_lambda() {
        // step = lambda * residual, so the step just before a smooth stop is
        // bounded by lambda * tol / contraction-factor; for this recurrence
        // the factor is 0.2, giving 2 * tol.
        let cfg = IterationConfig::with_defaults(0.4, pt(&[2.0])).unwrap();
        let traj = run(&reciprocal(), &cfg).unwrap();
        let report = asymptotic_regularity_check(&traj, 1).unwrap();
        assert!(report.tail_max <= 2.0 * cfg.tol);
    }

    #[test]
    fn compare_prefers_the_larger_admissible_lambda() {
        let a = run(&reciprocal(), &IterationConfig::with_defaults(0.5, pt(&[2.0])).unwrap()).unwrap();
        let b = run(&reciprocal(), &IterationConfig::with_defaults(0.1, pt(&[2.0])).unwrap()).unwrap();
        let verdict = compare_rates(&a, &b, &pt(&[1.0])).unwrap();
        assert_eq!(verdict.faster, Faster::A);
        assert_eq!(verdict.crossover_count, 0);
    }

    #[test]
    fn compare_identical_runs_is_a_tie() {
        let a = run(&reciprocal(), &IterationConfig::with_defaults(0.3, pt(&[2.0])).unwrap()).unwrap();
        let b = run(&reciprocal(), &IterationConfig::with_defaults(0.3, pt(&[2.0])).unwrap()).unwrap();
        let verdict = compare_rates(&a, &b, &pt(&[1.0])).unwrap();
        assert_eq!(verdict.faster, Faster::Tie);
        assert_eq!(verdict.crossover_count, 0);
    }

    #[test]
    fn compare_rotation_lambdas() {
        let t = quarter_turn();
        let a = run(&t, &IterationConfig::with_defaults(0.5, pt(&[1.0, 0.0])).unwrap()).unwrap();
        let b = run(&t, &IterationConfig::with_defaults(0.25, pt(&[1.0, 0.0])).unwrap()).unwrap();
        let verdict = compare_rates(&a, &b, &pt(&[0.0, 0.0])).unwrap();
        assert_eq!(verdict.faster, Faster::A);
    }

    #[test]
    fn compare_rejects_mismatched_dimensions() {
        let a = run(&reciprocal(), &IterationConfig::with_defaults(0.5, pt(&[2.0])).unwrap()).unwrap();
        assert!(compare_rates(&a, &a, &pt(&[0.0, 0.0])).is_err());
    }

    #[test]
    fn csv_layout() {
        let cfg = IterationConfig::with_defaults(0.5, pt(&[1.0])).unwrap();
        let traj = run(&reflection(), &cfg).unwrap();
        let csv = traj.to_csv_string().unwrap();
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines[0], "n,x_0,residual,step_norm");
        assert_eq!(lines.len(), 1 + traj.points.len());
        assert!(lines[1].starts_with("0,1.0000000000000000e0,1.0000000000000000e0,"));
        assert!(lines.last().unwrap().ends_with(','), "last row has empty step_norm");
    }

    #[test]
    fn status_serialization() {
        assert_eq!(
            serde_json::to_string(&Status::Converged).unwrap(),
            "{\"status\":\"converged\"}"
        );
        assert_eq!(
            serde_json::to_string(&Status::CycleDetected { period: 2 }).unwrap(),
            "{\"status\":\"cycle_detected\",\"period\":2}"
        );
    }
}

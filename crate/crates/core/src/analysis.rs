//! Empirical estimation of the contractivity constants (Lipschitz s,
//! pseudocontractivity r, minimal enrichment b), verification of the
//! defining inequalities with witnesses, fixed-point probing, and the
//! closed-form step-size derivations.
//!
//! Estimators are suprema over a finite, seeded pair sample, so they
//! approach the true constants from below as the density grows. The grid
//! component of the sample covers domain corners, where these suprema tend
//! to be attained.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Serialize, Serializer};

use crate::error::{Error, Result};
use crate::geometry::{dot, random_point, sub, Domain, Point};
use crate::operators::OperatorSpec;
use crate::tol::{
    ENRICHMENT_TOLERANCE, FIXED_POINT_TOLERANCE, NONEXPANSIVE_TOLERANCE, PAIR_SKIP_TOLERANCE,
    QUASI_TOLERANCE,
};

/// Points used by the pair-based estimators: an axis grid holding roughly
/// `density` points in total plus `density` seeded uniform points.
///
/// Keeping the grid total near `density` (rather than `density` per axis)
/// bounds the all-pairs cost at O(density^2) in every dimension while the
/// endpoints still cover the corners.
fn estimation_points(domain: &Domain, density: usize, seed: u64) -> Result<Vec<Point>> {
    if density < 2 {
        return Err(Error::InvalidParameter {
            name: "density",
            value: density as f64,
            constraint: ">= 2",
        });
    }
    let dim = domain.dim();
    let per_axis = ((density as f64).powf(1.0 / dim as f64) + 1e-9).floor() as usize;
    let mut points = domain.grid(per_axis.max(2))?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    points.reserve(density);
    for _ in 0..density {
        points.push(random_point(domain, &mut rng));
    }
    Ok(points)
}

/// Sample points together with their images under the operator.
struct SampledMap {
    points: Vec<Point>,
    images: Vec<Point>,
}

fn sample_map(op: &OperatorSpec, density: usize, seed: u64) -> Result<SampledMap> {
    let points = estimation_points(op.domain(), density, seed)?;
    let images = points
        .iter()
        .map(|p| op.evaluate(p))
        .collect::<Result<Vec<_>>>()?;
    Ok(SampledMap { points, images })
}

impl SampledMap {
    /// Visits every distinct pair with ||x - y|| >= PAIR_SKIP_TOLERANCE,
    /// passing (i, j, x, y, Tx, Ty). Returns how many pairs were visited.
    fn for_each_pair<F>(&self, mut f: F) -> usize
    where
        F: FnMut(usize, usize, &[f64], &[f64], &[f64], &[f64]),
    {
        let mut count = 0;
        for i in 0..self.points.len() {
            for j in (i + 1)..self.points.len() {
                let x = self.points[i].coords();
                let y = self.points[j].coords();
                let d = sub(x, y);
                if dot(&d, &d).sqrt() < PAIR_SKIP_TOLERANCE {
                    continue;
                }
                count += 1;
                f(i, j, x, y, self.images[i].coords(), self.images[j].coords());
            }
        }
        count
    }
}

fn lipschitz_sup(map: &SampledMap) -> Result<(f64, Option<(Point, Point)>)> {
    let mut sup = 0.0_f64;
    let mut arg: Option<(usize, usize)> = None;
    let visited = map.for_each_pair(|i, j, x, y, tx, ty| {
        let d = sub(x, y);
        let delta = sub(tx, ty);
        let ratio = dot(&delta, &delta).sqrt() / dot(&d, &d).sqrt();
        if ratio > sup {
            sup = ratio;
            arg = Some((i, j));
        }
    });
    if visited == 0 {
        return Err(Error::DegenerateDomain);
    }
    Ok((
        sup,
        arg.map(|(i, j)| (map.points[i].clone(), map.points[j].clone())),
    ))
}

/// Smallest sampled Lipschitz constant: the supremum of
/// ||Tx - Ty|| / ||x - y|| over the pair sample.
pub fn estimate_lipschitz(op: &OperatorSpec, density: usize, seed: u64) -> Result<f64> {
    let map = sample_map(op, density, seed)?;
    Ok(lipschitz_sup(&map)?.0)
}

/// Supremum of <Tx - Ty, x - y> / ||x - y||^2 over the pair sample; any r
/// strictly above this satisfies the pseudocontractivity inequality on the
/// sample. The value may well be negative.
pub fn estimate_pseudocontractive_r(op: &OperatorSpec, density: usize, seed: u64) -> Result<f64> {
    let map = sample_map(op, density, seed)?;
    let mut sup = f64::NEG_INFINITY;
    let visited = map.for_each_pair(|_, _, x, y, tx, ty| {
        let d = sub(x, y);
        let delta = sub(tx, ty);
        sup = sup.max(dot(&delta, &d) / dot(&d, &d));
    });
    if visited == 0 {
        return Err(Error::DegenerateDomain);
    }
    Ok(sup)
}

/// Verdict of a pairwise inequality check, with a violating pair when it
/// fails.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PairVerdict {
    pub holds: bool,
    pub witness: Option<(Point, Point)>,
}

/// Checks the enrichment inequality ||b(x-y) + Tx - Ty|| <= (b+1)||x-y||
/// on the pair sample. The witness is the worst violating pair.
pub fn check_enriched(
    op: &OperatorSpec,
    b: f64,
    density: usize,
    seed: u64,
) -> Result<PairVerdict> {
    if !b.is_finite() || b < 0.0 {
        return Err(Error::InvalidParameter {
            name: "b",
            value: b,
            constraint: ">= 0",
        });
    }
    let map = sample_map(op, density, seed)?;
    let mut worst_excess = 0.0_f64;
    let mut witness: Option<(usize, usize)> = None;
    let visited = map.for_each_pair(|i, j, x, y, tx, ty| {
        let d = sub(x, y);
        let delta = sub(tx, ty);
        let shifted: Vec<f64> = d.iter().zip(&delta).map(|(di, de)| b * di + de).collect();
        let excess = dot(&shifted, &shifted).sqrt() - (b + 1.0) * dot(&d, &d).sqrt();
        if excess > worst_excess {
            worst_excess = excess;
            witness = Some((i, j));
        }
    });
    if visited == 0 {
        return Err(Error::DegenerateDomain);
    }
    let holds = worst_excess <= ENRICHMENT_TOLERANCE;
    Ok(PairVerdict {
        holds,
        witness: if holds {
            None
        } else {
            witness.map(|(i, j)| (map.points[i].clone(), map.points[j].clone()))
        },
    })
}

/// Smallest enrichment constant compatible with the sample, or the report
/// that none exists.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum EnrichmentBound {
    Feasible(f64),
    Infeasible,
}

impl EnrichmentBound {
    pub fn feasible(&self) -> Option<f64> {
        match self {
            EnrichmentBound::Feasible(b) => Some(*b),
            EnrichmentBound::Infeasible => None,
        }
    }

    pub fn is_feasible(&self) -> bool {
        matches!(self, EnrichmentBound::Feasible(_))
    }
}

impl Serialize for EnrichmentBound {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            EnrichmentBound::Feasible(b) => serializer.serialize_f64(*b),
            EnrichmentBound::Infeasible => serializer.serialize_str("infeasible"),
        }
    }
}

/// Smallest b >= 0 satisfying the inner-product form of the enrichment
/// condition, 2b <Tx-Ty, x-y> + ||Tx-Ty||^2 <= (2b+1) ||x-y||^2, on every
/// sampled pair.
///
/// With d = x - y, D = Tx - Ty, a = <D,d> - <d,d> and beta = <d,d> - <D,D>,
/// each pair constrains b by 2*a*b <= beta: a lower bound beta/(2a) when
/// a < 0, an upper bound when a > 0, no constraint when a == 0 and
/// beta >= 0, and an empty feasible set when a == 0 and beta < 0. An
/// operator may fail to be enriched for any b (the expansive map 2x does),
/// so infeasibility is an ordinary result, not an error.
pub fn minimal_enrichment_b(
    op: &OperatorSpec,
    density: usize,
    seed: u64,
) -> Result<EnrichmentBound> {
    let map = sample_map(op, density, seed)?;
    let mut lower = 0.0_f64;
    let mut upper = f64::INFINITY;
    let mut empty = false;
    let visited = map.for_each_pair(|_, _, x, y, tx, ty| {
        let d = sub(x, y);
        let delta = sub(tx, ty);
        let dd = dot(&d, &d);
        let alpha = dot(&delta, &d) - dd;
        let beta = dd - dot(&delta, &delta);
        if alpha < 0.0 {
            lower = lower.max(beta / (2.0 * alpha));
        } else if alpha > 0.0 {
            upper = upper.min(beta / (2.0 * alpha));
        } else if beta < 0.0 {
            empty = true;
        }
    });
    if visited == 0 {
        return Err(Error::DegenerateDomain);
    }
    if empty || lower > upper {
        return Ok(EnrichmentBound::Infeasible);
    }
    Ok(EnrichmentBound::Feasible(lower))
}

/// Verdict of the quasi-nonexpansiveness check at a known fixed point.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct QuasiVerdict {
    pub holds: bool,
    pub witness: Option<Point>,
}

/// Checks ||Tx - p|| <= ||x - p|| for every sampled x, given a fixed point
/// p. The witness is the worst violator.
pub fn check_quasi_nonexpansive(
    op: &OperatorSpec,
    p: &Point,
    density: usize,
    seed: u64,
) -> Result<QuasiVerdict> {
    let residual = op.fixed_point_residual(p)?;
    if residual > FIXED_POINT_TOLERANCE {
        return Err(Error::NotAFixedPoint {
            residual,
            tolerance: FIXED_POINT_TOLERANCE,
        });
    }
    let map = sample_map(op, density, seed)?;
    let mut worst = 0.0_f64;
    let mut witness: Option<usize> = None;
    for (i, (x, tx)) in map.points.iter().zip(&map.images).enumerate() {
        let to_p = crate::geometry::norm_of(&sub(x.coords(), p.coords()));
        let image_to_p = crate::geometry::norm_of(&sub(tx.coords(), p.coords()));
        let violation = image_to_p - to_p;
        if violation > worst {
            worst = violation;
            witness = Some(i);
        }
    }
    let holds = worst <= QUASI_TOLERANCE;
    Ok(QuasiVerdict {
        holds,
        witness: if holds {
            None
        } else {
            witness.map(|i| map.points[i].clone())
        },
    })
}

/// Grid points whose residual vanishes, refined and clustered.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FixedPointSet {
    pub points: Vec<Point>,
    pub tol: f64,
    /// Largest per-axis step of the scanning grid; useful as a distance
    /// scale when comparing probed sets.
    pub grid_spacing: f64,
}

/// Scans a `density`-per-axis grid for near-fixed points, refines each hit
/// by coordinate-wise residual minimization, keeps refinements with
/// residual at most `tol`, and clusters the result so no two survivors sit
/// closer than a grid step.
///
/// The scan threshold scales with a local slope estimate: a fixed point
/// hiding between grid nodes can raise the residual at the nearest node by
/// roughly (slope + 1) times the spacing.
pub fn probe_fixed_points(op: &OperatorSpec, density: usize, tol: f64) -> Result<FixedPointSet> {
    if density < 2 {
        return Err(Error::InvalidParameter {
            name: "density",
            value: density as f64,
            constraint: ">= 2",
        });
    }
    if !tol.is_finite() || tol <= 0.0 {
        return Err(Error::InvalidParameter {
            name: "tol",
            value: tol,
            constraint: "> 0",
        });
    }
    let domain = op.domain();
    let grid = domain.grid(density)?;
    let spacing = domain.grid_spacing(density);

    // crude slope estimate from consecutive grid neighbours
    let mut slope = 1.0_f64;
    for pair in grid.windows(2) {
        let d = sub(pair[1].coords(), pair[0].coords());
        let gap = dot(&d, &d).sqrt();
        if gap < PAIR_SKIP_TOLERANCE {
            continue;
        }
        let ta = op.evaluate(&pair[0])?;
        let tb = op.evaluate(&pair[1])?;
        let delta = sub(tb.coords(), ta.coords());
        slope = slope.max(dot(&delta, &delta).sqrt() / gap);
    }
    let threshold = tol.max((slope + 1.0) * spacing);

    let mut refined = Vec::new();
    for point in &grid {
        if op.fixed_point_residual(point)? > threshold {
            continue;
        }
        let candidate = refine_residual_minimum(op, point, spacing)?;
        if op.fixed_point_residual(&candidate)? <= tol {
            refined.push(candidate);
        }
    }

    let min_gap = 0.999 * domain.min_grid_spacing(density);
    let mut points: Vec<Point> = Vec::new();
    for p in refined {
        let separated = points
            .iter()
            .all(|q| crate::geometry::norm_of(&sub(p.coords(), q.coords())) >= min_gap);
        if separated {
            points.push(p);
        }
    }
    Ok(FixedPointSet { points, tol, grid_spacing: spacing })
}

/// Coordinate-descent refinement: repeated one-dimensional ternary searches
/// of the residual along each axis, within +-radius of the start, staying
/// inside the domain. The start is kept unless a strictly smaller residual
/// is found, so plateaus (the identity map) do not drift.
fn refine_residual_minimum(op: &OperatorSpec, start: &Point, radius: f64) -> Result<Point> {
    let domain = op.domain();
    let dim = start.dim();
    let mut best = start.clone();
    let mut best_residual = op.fixed_point_residual(&best)?;
    for _sweep in 0..3 {
        for axis in 0..dim {
            let base = best.clone();
            let probe = |t: f64| -> Result<(Point, f64)> {
                let mut coords = base.coords().to_vec();
                coords[axis] += t;
                let candidate = domain.project(&Point::new(coords)?)?;
                let residual = op.fixed_point_residual(&candidate)?;
                Ok((candidate, residual))
            };
            let (mut lo, mut hi) = (-radius, radius);
            for _ in 0..90 {
                let m1 = lo + (hi - lo) / 3.0;
                let m2 = hi - (hi - lo) / 3.0;
                let (p1, r1) = probe(m1)?;
                let (p2, r2) = probe(m2)?;
                if r1 < best_residual {
                    best_residual = r1;
                    best = p1;
                }
                if r2 < best_residual {
                    best_residual = r2;
                    best = p2;
                }
                if r1 < r2 {
                    hi = m2;
                } else {
                    lo = m1;
                }
            }
        }
    }
    Ok(best)
}

/// Directed Hausdorff distance in both directions: the largest distance
/// from a point of one set to the other set.
pub fn hausdorff_distance(a: &[Point], b: &[Point]) -> Result<f64> {
    if a.is_empty() && b.is_empty() {
        return Ok(0.0);
    }
    if a.is_empty() || b.is_empty() {
        return Ok(f64::INFINITY);
    }
    let directed = |from: &[Point], to: &[Point]| -> Result<f64> {
        let mut worst = 0.0_f64;
        for p in from {
            let mut nearest = f64::INFINITY;
            for q in to {
                nearest = nearest.min(crate::geometry::distance(p, q)?);
            }
            worst = worst.max(nearest);
        }
        Ok(worst)
    };
    Ok(directed(a, b)?.max(directed(b, a)?))
}

/// The averaging weight mu = 1/(b + 1) matched to an enrichment constant.
pub fn derive_mu(b: f64) -> Result<f64> {
    if !b.is_finite() || b < 0.0 {
        return Err(Error::InvalidParameter {
            name: "b",
            value: b,
            constraint: ">= 0",
        });
    }
    Ok(1.0 / (b + 1.0))
}

fn check_r_s(r: f64, s: f64) -> Result<f64> {
    if !r.is_finite() || r >= 1.0 {
        return Err(Error::InvalidParameter {
            name: "r",
            value: r,
            constraint: "< 1",
        });
    }
    if !s.is_finite() || s < 0.0 {
        return Err(Error::InvalidParameter {
            name: "s",
            value: s,
            constraint: ">= 0",
        });
    }
    Ok(1.0 - 2.0 * r + s * s)
}

/// Right endpoint L of the admissible step-size interval (0, L) for a map
/// with Lipschitz constant s and pseudocontractivity constant r:
/// L = 2(1 - r) / (1 - 2r + s^2).
pub fn lambda_admissible_range(r: f64, s: f64) -> Result<f64> {
    let denom = check_r_s(r, s)?;
    if denom <= 0.0 {
        return Err(Error::InvalidParameter {
            name: "s",
            value: s,
            constraint: "1 - 2r + s^2 > 0",
        });
    }
    Ok(2.0 * (1.0 - r) / denom)
}

/// The fastest admissible step size, (1 - r) / (1 - 2r + s^2), which is
/// the midpoint of the admissible interval. Requires r <= s.
pub fn optimal_lambda(r: f64, s: f64) -> Result<f64> {
    let denom = check_r_s(r, s)?;
    if r > s {
        return Err(Error::InvalidParameter {
            name: "r",
            value: r,
            constraint: "<= s",
        });
    }
    if denom <= 0.0 {
        return Err(Error::InvalidParameter {
            name: "s",
            value: s,
            constraint: "1 - 2r + s^2 > 0",
        });
    }
    Ok((1.0 - r) / denom)
}

/// Enrichment constant sufficient for a Lipschitz(s), pseudocontractive(r)
/// map: max(0, (s^2 - 1) / (2(1 - r))). Coarser than a direct estimate but
/// available from the two constants alone.
pub fn enrichment_bound_from_r_s(r: f64, s: f64) -> Result<f64> {
    check_r_s(r, s)?;
    Ok(((s * s - 1.0) / (2.0 * (1.0 - r))).max(0.0))
}

/// Estimated constants and verdicts for one operator on one sample.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ClassificationReport {
    /// Supremum of ||Tx-Ty||/||x-y|| over the sample.
    pub lipschitz_s: f64,
    /// Supremum of <Tx-Ty, x-y>/||x-y||^2 over the sample.
    pub pseudo_r: f64,
    /// Smallest enrichment constant on the sample, when one exists.
    pub min_b: EnrichmentBound,
    /// 1/(min_b + 1), when min_b is finite.
    pub mu: Option<f64>,
    pub nonexpansive: PairVerdict,
    /// Present when a fixed point was found to test against.
    pub quasi_nonexpansive: Option<QuasiVerdict>,
    /// The probed fixed point the quasi check used.
    pub quasi_fixed_point: Option<Point>,
    pub sample_density: usize,
    pub seed: u64,
}

impl ClassificationReport {
    pub fn to_json_string(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serialization cannot fail")
    }
}

/// Runs the full estimation pipeline on one shared sample: s, r, minimal b
/// and the derived mu, the nonexpansiveness verdict, and (when a fixed
/// point can be probed at tolerance `fp_tol`) the quasi-nonexpansiveness
/// verdict.
pub fn classify(
    op: &OperatorSpec,
    density: usize,
    seed: u64,
    fp_tol: f64,
) -> Result<ClassificationReport> {
    let map = sample_map(op, density, seed)?;
    let (lipschitz_s, s_witness) = lipschitz_sup(&map)?;

    let mut pseudo_r = f64::NEG_INFINITY;
    map.for_each_pair(|_, _, x, y, tx, ty| {
        let d = sub(x, y);
        let delta = sub(tx, ty);
        pseudo_r = pseudo_r.max(dot(&delta, &d) / dot(&d, &d));
    });

    let min_b = minimal_enrichment_b(op, density, seed)?;
    let mu = match min_b {
        EnrichmentBound::Feasible(b) => Some(derive_mu(b)?),
        EnrichmentBound::Infeasible => None,
    };

    let holds = lipschitz_s <= 1.0 + NONEXPANSIVE_TOLERANCE;
    let nonexpansive = PairVerdict {
        holds,
        witness: if holds { None } else { s_witness },
    };

    let fixed_points = probe_fixed_points(op, density, fp_tol)?;
    let quasi_fixed_point = fixed_points.points.first().cloned();
    let quasi_nonexpansive = match &quasi_fixed_point {
        Some(p) => Some(check_quasi_nonexpansive(op, p, density, seed)?),
        None => None,
    };

    Ok(ClassificationReport {
        lipschitz_s,
        pseudo_r,
        min_b,
        mu,
        nonexpansive,
        quasi_nonexpansive,
        quasi_fixed_point,
        sample_density: density,
        seed,
    })
}

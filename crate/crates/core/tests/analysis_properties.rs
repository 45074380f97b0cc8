//! Invariants of the constant estimators: internal consistency of the
//! enrichment machinery, equivalence of the two forms of the enrichment
//! inequality, monotone refinement under denser sampling, and the
//! relations between the derived step sizes.

use proptest::prelude::*;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use fixpoint::analysis::{
    check_enriched, check_quasi_nonexpansive, derive_mu, enrichment_bound_from_r_s,
    estimate_lipschitz, estimate_pseudocontractive_r, lambda_admissible_range,
    minimal_enrichment_b, optimal_lambda, probe_fixed_points, EnrichmentBound,
};
use fixpoint::geometry::{distance, inner, norm};
use fixpoint::{Domain, OperatorSpec, Point};

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

fn double_clamped() -> OperatorSpec {
    OperatorSpec::scaled(Domain::interval(0.0, 1.0).unwrap(), 2.0).unwrap()
}

/// The estimated minimal b is consistent with the direct inequality check:
/// a hair above it passes, well below it fails.
#[test]
fn minimal_b_consistency_with_direct_check() {
    let t = reciprocal();
    let b = minimal_enrichment_b(&t, 200, 42).unwrap().feasible().unwrap();
    assert!(check_enriched(&t, b + 1e-9, 200, 42).unwrap().holds);
    assert!(b > 0.05, "test needs a genuinely enriched operator");
    assert!(!check_enriched(&t, b - 0.05, 200, 42).unwrap().holds);
}

/// Margins of the two equivalent forms of the enrichment inequality:
/// direct (b+1)||d|| - ||b d + D|| and inner-product
/// (2b+1)||d||^2 - 2b <D,d> - ||D||^2.
fn enrichment_margins(t: &OperatorSpec, b: f64, x: &Point, y: &Point) -> (f64, f64) {
    let tx = t.evaluate(x).unwrap();
    let ty = t.evaluate(y).unwrap();
    let d: Vec<f64> = x
        .coords()
        .iter()
        .zip(y.coords())
        .map(|(a, b)| a - b)
        .collect();
    let delta: Vec<f64> = tx
        .coords()
        .iter()
        .zip(ty.coords())
        .map(|(a, b)| a - b)
        .collect();
    let shifted = pt(&d.iter().zip(&delta).map(|(di, de)| b * di + de).collect::<Vec<_>>());
    let d_pt = pt(&d);
    let delta_pt = pt(&delta);
    let direct = (b + 1.0) * norm(&d_pt) - norm(&shifted);
    let dd = inner(&d_pt, &d_pt).unwrap();
    let uv = (2.0 * b + 1.0) * dd
        - 2.0 * b * inner(&delta_pt, &d_pt).unwrap()
        - inner(&delta_pt, &delta_pt).unwrap();
    (direct, uv)
}

/// The direct and inner-product forms never disagree beyond tolerance on
/// seeded pairs across the gallery.
#[test]
fn enrichment_forms_agree() {
    let gallery = [reciprocal(), reflection(), quarter_turn(), double_clamped()];
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for t in &gallery {
        for b in [0.0, 0.5, 1.5, 7.5] {
            for _ in 0..500 {
                let x = random_in(t.domain(), &mut rng);
                let y = random_in(t.domain(), &mut rng);
                if distance(&x, &y).unwrap() < 1e-9 {
                    continue;
                }
                let (direct, uv) = enrichment_margins(t, b, &x, &y);
                let disagree = (direct > 1e-10 && uv < -1e-10) || (direct < -1e-10 && uv > 1e-10);
                assert!(!disagree, "forms disagree: direct {direct}, uv {uv}");
            }
        }
    }
}

fn random_in<R: Rng>(domain: &Domain, rng: &mut R) -> Point {
    match domain {
        Domain::Interval { lo, hi } => pt(&[rng.random_range(*lo..=*hi)]),
        Domain::Box { lows, highs } => pt(&lows
            .iter()
            .zip(highs)
            .map(|(lo, hi)| rng.random_range(*lo..=*hi))
            .collect::<Vec<_>>()),
        Domain::Ball { center, radius } => loop {
            let coords: Vec<f64> = center
                .iter()
                .map(|c| rng.random_range(c - radius..=c + radius))
                .collect();
            let p = pt(&coords);
            if distance(&p, &pt(center)).unwrap() <= *radius {
                break p;
            }
        },
    }
}

/// Suprema over nested samples are nondecreasing: doubling the per-axis
/// grid (density 2d-1 in one dimension) and extending the random stream
/// keeps every old pair.
#[test]
fn estimates_refine_monotonically() {
    let t = reciprocal();
    for (coarse, fine) in [(50usize, 99usize), (100, 199)] {
        let s_c = estimate_lipschitz(&t, coarse, 42).unwrap();
        let s_f = estimate_lipschitz(&t, fine, 42).unwrap();
        assert!(s_c <= s_f + 1e-12, "lipschitz regressed: {s_c} > {s_f}");

        let r_c = estimate_pseudocontractive_r(&t, coarse, 42).unwrap();
        let r_f = estimate_pseudocontractive_r(&t, fine, 42).unwrap();
        assert!(r_c <= r_f + 1e-12, "pseudo_r regressed: {r_c} > {r_f}");

        let b_c = minimal_enrichment_b(&t, coarse, 42).unwrap().feasible().unwrap();
        let b_f = minimal_enrichment_b(&t, fine, 42).unwrap().feasible().unwrap();
        assert!(b_c <= b_f + 1e-12, "min_b regressed: {b_c} > {b_f}");
    }
}

/// Same nesting in two dimensions: per-axis counts 10 and 19 arise from
/// densities 100 and 361.
#[test]
fn estimates_refine_monotonically_2d() {
    let disk = Domain::ball(vec![0.0, 0.0], 1.0).unwrap();
    let t = OperatorSpec::affine(
        disk,
        vec![vec![0.5, 0.1], vec![0.0, 0.3]],
        vec![0.0, 0.0],
    )
    .unwrap();
    let s_c = estimate_lipschitz(&t, 100, 42).unwrap();
    let s_f = estimate_lipschitz(&t, 361, 42).unwrap();
    assert!(s_c <= s_f + 1e-12);
}

/// Nonexpansive gallery members are quasi-nonexpansive at every probed
/// fixed point.
#[test]
fn nonexpansive_implies_quasi_nonexpansive() {
    let cases = [
        OperatorSpec::identity(Domain::interval(0.0, 1.0).unwrap()).unwrap(),
        reflection(),
        quarter_turn(),
    ];
    for t in &cases {
        let s = estimate_lipschitz(t, 60, 42).unwrap();
        assert!(s <= 1.0 + 1e-12, "gallery member not nonexpansive");
        let fps = probe_fixed_points(t, 60, 1e-10).unwrap();
        assert!(!fps.points.is_empty());
        for p in &fps.points {
            let verdict = check_quasi_nonexpansive(t, p, 60, 42).unwrap();
            assert!(verdict.holds, "violated at fixed point {:?}", p.coords());
        }
    }
}

/// Averaging with the estimated mu makes the operator nonexpansive within
/// the sampling tolerance: its own minimal enrichment constant collapses.
#[test]
fn averaged_operator_needs_no_enrichment() {
    for t in [reciprocal(), reflection()] {
        let b = minimal_enrichment_b(&t, 200, 42).unwrap().feasible().unwrap();
        let mu = derive_mu(b).unwrap();
        let t_mu = t.averaged(mu).unwrap();
        let residual_b = minimal_enrichment_b(&t_mu, 200, 42).unwrap();
        match residual_b {
            EnrichmentBound::Feasible(rb) => {
                assert!(rb.abs() <= 0.02, "residual enrichment {rb}")
            }
            EnrichmentBound::Infeasible => panic!("averaged operator lost feasibility"),
        }
    }
}

proptest! {
    /// The fastest step size sits exactly at the midpoint of the
    /// admissible interval whenever both are defined.
    #[test]
    fn optimal_lambda_is_the_midpoint(r in -3.0..0.99f64, s in 0.0..5.0f64) {
        prop_assume!(r <= s);
        prop_assume!(1.0 - 2.0 * r + s * s > 0.0);
        let sup = lambda_admissible_range(r, s).unwrap();
        let best = optimal_lambda(r, s).unwrap();
        prop_assert!(best > 0.0);
        prop_assert!(best < sup);
        prop_assert_eq!(best * 2.0, sup);
    }

}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    /// The (r, s)-derived enrichment bound really is sufficient: the direct
    /// check accepts it for the reciprocal map's estimated constants.
    #[test]
    fn rs_bound_is_sufficient_for_reciprocal(extra in 0.0..2.0f64) {
        let t = reciprocal();
        let s = estimate_lipschitz(&t, 100, 42).unwrap();
        let r = estimate_pseudocontractive_r(&t, 100, 42).unwrap();
        let b = enrichment_bound_from_r_s(r, s).unwrap() + extra;
        prop_assert!(check_enriched(&t, b, 100, 42).unwrap().holds);
    }
}

/// The coarse (r, s) bound dominates the direct estimate, as it must.
#[test]
fn rs_bound_is_coarser_than_direct_estimate() {
    let t = reciprocal();
    let s = estimate_lipschitz(&t, 200, 42).unwrap();
    let r = estimate_pseudocontractive_r(&t, 200, 42).unwrap();
    let coarse = enrichment_bound_from_r_s(r, s).unwrap();
    let direct = minimal_enrichment_b(&t, 200, 42).unwrap().feasible().unwrap();
    assert!(coarse >= direct, "coarse {coarse} below direct {direct}");
}

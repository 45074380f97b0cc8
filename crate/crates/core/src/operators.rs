//! Self-maps of a convex domain: structural descriptions, the example
//! gallery, and the averaging transforms.
//!
//! Operators store structure rather than closures, so reports and configs
//! can print and round-trip them. Construction validates parameters and
//! samples the map to confirm it sends the domain into itself.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{lincomb, sample_points, Domain, Point};
use crate::tol::{
    DOMAIN_TOLERANCE, SELF_MAP_DENSITY, SELF_MAP_SEED, SELF_MAP_TOLERANCE,
};

/// Structural description of a map, independent of its domain.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum OperatorDesc {
    /// x -> 1/x (one-dimensional).
    Reciprocal,
    /// x -> 1 - x (one-dimensional).
    AffineReflection,
    /// Rotation by `angle` radians about the domain center (two-dimensional).
    Rotation { angle: f64 },
    /// x -> matrix * x + offset.
    Affine {
        matrix: Vec<Vec<f64>>,
        offset: Vec<f64>,
    },
    /// x -> factor * x, projected back into the domain so that expansive
    /// factors still yield a self-map.
    Scaled { factor: f64 },
    /// x -> (1 - weight) * x + weight * inner(x).
    Averaged {
        weight: f64,
        inner: Box<OperatorDesc>,
    },
    /// x -> outer(inner(x)).
    Composite {
        outer: Box<OperatorDesc>,
        inner: Box<OperatorDesc>,
    },
}

/// A validated self-map T: C -> C.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OperatorSpec {
    desc: OperatorDesc,
    domain: Domain,
}

impl OperatorSpec {
    /// Builds and validates an operator on the given domain.
    ///
    /// Validation checks parameter ranges and dimensions, then evaluates the
    /// map on a density-20 sample; construction fails if any image leaves
    /// the domain by more than `SELF_MAP_TOLERANCE`.
    pub fn new(desc: OperatorDesc, domain: Domain) -> Result<Self> {
        domain.validate()?;
        validate_desc(&desc, &domain)?;
        let spec = OperatorSpec { desc, domain };
        spec.self_map_check()?;
        Ok(spec)
    }

    pub fn reciprocal(domain: Domain) -> Result<Self> {
        Self::new(OperatorDesc::Reciprocal, domain)
    }

    pub fn affine_reflection(domain: Domain) -> Result<Self> {
        Self::new(OperatorDesc::AffineReflection, domain)
    }

    pub fn rotation(domain: Domain, angle: f64) -> Result<Self> {
        Self::new(OperatorDesc::Rotation { angle }, domain)
    }

    pub fn affine(domain: Domain, matrix: Vec<Vec<f64>>, offset: Vec<f64>) -> Result<Self> {
        Self::new(OperatorDesc::Affine { matrix, offset }, domain)
    }

    pub fn scaled(domain: Domain, factor: f64) -> Result<Self> {
        Self::new(OperatorDesc::Scaled { factor }, domain)
    }

    pub fn identity(domain: Domain) -> Result<Self> {
        Self::scaled(domain, 1.0)
    }

    pub fn desc(&self) -> &OperatorDesc {
        &self.desc
    }

    pub fn domain(&self) -> &Domain {
        &self.domain
    }

    pub fn dim(&self) -> usize {
        self.domain.dim()
    }

    /// Applies the map. Points within `DOMAIN_TOLERANCE` of the domain are
    /// projected in first; anything farther is a domain violation.
    pub fn evaluate(&self, x: &Point) -> Result<Point> {
        if x.dim() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                actual: x.dim(),
            });
        }
        let dist = self.domain.distance_from(x)?;
        if dist > DOMAIN_TOLERANCE {
            return Err(Error::DomainViolation {
                point: x.coords().to_vec(),
                distance: dist,
            });
        }
        let inside = self.domain.project(x)?;
        Point::new(raw_evaluate(&self.desc, &self.domain, inside.coords())?)
    }

    /// The averaged operator (1 - mu) I + mu T on the same domain.
    ///
    /// Convexity of the domain makes this a self-map for any mu in (0, 1];
    /// `averaged(T, 1)` acts identically to T, and the transform preserves
    /// the fixed-point set for every mu > 0.
    pub fn averaged(&self, mu: f64) -> Result<OperatorSpec> {
        check_weight("mu", mu)?;
        OperatorSpec::new(
            OperatorDesc::Averaged {
                weight: mu,
                inner: Box::new(self.desc.clone()),
            },
            self.domain.clone(),
        )
    }

    /// One step of the averaged iteration as an operator:
    /// (1 - lambda) I + lambda T.
    pub fn krasnoselskij_map(&self, lambda: f64) -> Result<OperatorSpec> {
        check_weight("lambda", lambda)?;
        OperatorSpec::new(
            OperatorDesc::Averaged {
                weight: lambda,
                inner: Box::new(self.desc.clone()),
            },
            self.domain.clone(),
        )
    }

    /// outer after inner, on their common domain.
    pub fn compose(outer: &OperatorSpec, inner: &OperatorSpec) -> Result<OperatorSpec> {
        if outer.domain != inner.domain {
            return Err(Error::InvalidDomain(
                "composition requires a common domain".into(),
            ));
        }
        OperatorSpec::new(
            OperatorDesc::Composite {
                outer: Box::new(outer.desc.clone()),
                inner: Box::new(inner.desc.clone()),
            },
            outer.domain.clone(),
        )
    }

    /// ||Tx - x||; zero exactly on fixed points.
    pub fn fixed_point_residual(&self, x: &Point) -> Result<f64> {
        let tx = self.evaluate(x)?;
        crate::geometry::distance(&tx, x)
    }

    fn self_map_check(&self) -> Result<()> {
        let samples = sample_points(&self.domain, SELF_MAP_DENSITY, SELF_MAP_SEED)?;
        for x in &samples {
            let image = Point::new(raw_evaluate(&self.desc, &self.domain, x.coords())?)?;
            let dist = self.domain.distance_from(&image)?;
            if dist > SELF_MAP_TOLERANCE {
                return Err(Error::NotSelfMap {
                    point: x.coords().to_vec(),
                    image: image.coords().to_vec(),
                    distance: dist,
                });
            }
        }
        Ok(())
    }
}

fn check_weight(name: &'static str, w: f64) -> Result<()> {
    if !w.is_finite() || w <= 0.0 || w > 1.0 {
        return Err(Error::InvalidParameter {
            name,
            value: w,
            constraint: "in (0, 1]",
        });
    }
    Ok(())
}

fn validate_desc(desc: &OperatorDesc, domain: &Domain) -> Result<()> {
    let dim = domain.dim();
    match desc {
        OperatorDesc::Reciprocal | OperatorDesc::AffineReflection => {
            if dim != 1 {
                return Err(Error::DimensionMismatch { expected: 1, actual: dim });
            }
        }
        OperatorDesc::Rotation { angle } => {
            if dim != 2 {
                return Err(Error::DimensionMismatch { expected: 2, actual: dim });
            }
            if !angle.is_finite() {
                return Err(Error::InvalidParameter {
                    name: "angle",
                    value: *angle,
                    constraint: "finite",
                });
            }
        }
        OperatorDesc::Affine { matrix, offset } => {
            if matrix.len() != dim || offset.len() != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    actual: matrix.len().max(offset.len()),
                });
            }
            for row in matrix {
                if row.len() != dim {
                    return Err(Error::DimensionMismatch {
                        expected: dim,
                        actual: row.len(),
                    });
                }
                if row.iter().any(|v| !v.is_finite()) {
                    return Err(Error::InvalidPoint("non-finite matrix entry".into()));
                }
            }
            if offset.iter().any(|v| !v.is_finite()) {
                return Err(Error::InvalidPoint("non-finite offset entry".into()));
            }
        }
        OperatorDesc::Scaled { factor } => {
            if !factor.is_finite() {
                return Err(Error::InvalidParameter {
                    name: "factor",
                    value: *factor,
                    constraint: "finite",
                });
            }
        }
        OperatorDesc::Averaged { weight, inner } => {
            check_weight("weight", *weight)?;
            validate_desc(inner, domain)?;
        }
        OperatorDesc::Composite { outer, inner } => {
            validate_desc(outer, domain)?;
            validate_desc(inner, domain)?;
        }
    }
    Ok(())
}

fn raw_evaluate(desc: &OperatorDesc, domain: &Domain, x: &[f64]) -> Result<Vec<f64>> {
    match desc {
        OperatorDesc::Reciprocal => Ok(vec![1.0 / x[0]]),
        OperatorDesc::AffineReflection => Ok(vec![1.0 - x[0]]),
        OperatorDesc::Rotation { angle } => {
            let c = domain.center();
            let (dx, dy) = (x[0] - c.coords()[0], x[1] - c.coords()[1]);
            let (s, co) = angle.sin_cos();
            Ok(vec![
                c.coords()[0] + co * dx - s * dy,
                c.coords()[1] + s * dx + co * dy,
            ])
        }
        OperatorDesc::Affine { matrix, offset } => Ok(matrix
            .iter()
            .zip(offset)
            .map(|(row, off)| crate::geometry::dot(row, x) + off)
            .collect()),
        OperatorDesc::Scaled { factor } => {
            let scaled = Point::new(x.iter().map(|v| factor * v).collect())?;
            Ok(domain.project(&scaled)?.coords().to_vec())
        }
        OperatorDesc::Averaged { weight, inner } => {
            let tx = raw_evaluate(inner, domain, x)?;
            Ok(lincomb(1.0 - weight, x, *weight, &tx))
        }
        OperatorDesc::Composite { outer, inner } => {
            let mid = raw_evaluate(inner, domain, x)?;
            raw_evaluate(outer, domain, &mid)
        }
    }
}

/// The pair (b, mu) linked by mu = 1/(b + 1).
///
/// A b-enriched map averaged with this mu becomes nonexpansive, which is
/// what the iteration engine relies on.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EnrichmentParams {
    b: f64,
    mu: f64,
}

impl EnrichmentParams {
    pub fn from_b(b: f64) -> Result<Self> {
        if !b.is_finite() || b < 0.0 {
            return Err(Error::InvalidParameter {
                name: "b",
                value: b,
                constraint: ">= 0",
            });
        }
        Ok(EnrichmentParams { b, mu: 1.0 / (b + 1.0) })
    }

    pub fn from_mu(mu: f64) -> Result<Self> {
        check_weight("mu", mu)?;
        Ok(EnrichmentParams { b: 1.0 / mu - 1.0, mu })
    }

    pub fn b(&self) -> f64 {
        self.b
    }

    pub fn mu(&self) -> f64 {
        self.mu
    }
}

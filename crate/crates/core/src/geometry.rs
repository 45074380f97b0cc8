//! Points of R^n, closed convex domains with metric projection, and
//! deterministic samplers.
//!
//! Everything here is pure: samplers are functions of `(density, seed)`,
//! so repeated calls reproduce the same point lists bit for bit.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};

/// A point of R^n. Coordinates are finite and the dimension is at least 1.
#[derive(Debug, Clone, PartialEq)]
pub struct Point {
    coords: Vec<f64>,
}

impl Point {
    pub fn new(coords: Vec<f64>) -> Result<Self> {
        if coords.is_empty() {
            return Err(Error::InvalidPoint("dimension must be at least 1".into()));
        }
        if let Some(bad) = coords.iter().find(|c| !c.is_finite()) {
            return Err(Error::InvalidPoint(format!("non-finite coordinate {bad}")));
        }
        Ok(Point { coords })
    }

    /// One-dimensional point.
    pub fn scalar(x: f64) -> Result<Self> {
        Point::new(vec![x])
    }

    pub fn dim(&self) -> usize {
        self.coords.len()
    }

    pub fn coords(&self) -> &[f64] {
        &self.coords
    }
}

impl TryFrom<Vec<f64>> for Point {
    type Error = Error;

    fn try_from(coords: Vec<f64>) -> Result<Self> {
        Point::new(coords)
    }
}

impl Serialize for Point {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        self.coords.serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for Point {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let coords = Vec::<f64>::deserialize(deserializer)?;
        Point::new(coords).map_err(serde::de::Error::custom)
    }
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub(crate) fn sub(a: &[f64], b: &[f64]) -> Vec<f64> {
    a.iter().zip(b).map(|(x, y)| x - y).collect()
}

/// wa * a + wb * b, componentwise.
pub(crate) fn lincomb(wa: f64, a: &[f64], wb: f64, b: &[f64]) -> Vec<f64> {
    a.iter().zip(b).map(|(x, y)| wa * x + wb * y).collect()
}

pub(crate) fn norm_of(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

fn check_dims(expected: usize, actual: usize) -> Result<()> {
    if expected != actual {
        return Err(Error::DimensionMismatch { expected, actual });
    }
    Ok(())
}

/// Euclidean inner product of two points of equal dimension.
pub fn inner(a: &Point, b: &Point) -> Result<f64> {
    check_dims(a.dim(), b.dim())?;
    Ok(dot(a.coords(), b.coords()))
}

/// Euclidean norm.
pub fn norm(a: &Point) -> f64 {
    norm_of(a.coords())
}

/// Euclidean distance between two points of equal dimension.
pub fn distance(a: &Point, b: &Point) -> Result<f64> {
    check_dims(a.dim(), b.dim())?;
    Ok(norm_of(&sub(a.coords(), b.coords())))
}

/// A closed, bounded, convex subset of R^n with a metric projection.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Domain {
    /// [lo, hi] on the real line.
    Interval { lo: f64, hi: f64 },
    /// Axis-aligned box: the product of `[lows[i], highs[i]]`.
    Box { lows: Vec<f64>, highs: Vec<f64> },
    /// Closed Euclidean ball around `center`.
    Ball { center: Vec<f64>, radius: f64 },
}

impl Domain {
    pub fn interval(lo: f64, hi: f64) -> Result<Self> {
        let d = Domain::Interval { lo, hi };
        d.validate()?;
        Ok(d)
    }

    pub fn rect(lows: Vec<f64>, highs: Vec<f64>) -> Result<Self> {
        let d = Domain::Box { lows, highs };
        d.validate()?;
        Ok(d)
    }

    pub fn ball(center: Vec<f64>, radius: f64) -> Result<Self> {
        let d = Domain::Ball { center, radius };
        d.validate()?;
        Ok(d)
    }

    /// Checks that the set is nonempty, bounded and well formed.
    pub fn validate(&self) -> Result<()> {
        match self {
            Domain::Interval { lo, hi } => {
                if !lo.is_finite() || !hi.is_finite() {
                    return Err(Error::InvalidDomain("non-finite interval bound".into()));
                }
                if lo >= hi {
                    return Err(Error::InvalidDomain(format!(
                        "interval requires lo < hi, got [{lo}, {hi}]"
                    )));
                }
            }
            Domain::Box { lows, highs } => {
                if lows.is_empty() || lows.len() != highs.len() {
                    return Err(Error::InvalidDomain(
                        "box requires equally many nonempty lows and highs".into(),
                    ));
                }
                for (lo, hi) in lows.iter().zip(highs) {
                    if !lo.is_finite() || !hi.is_finite() {
                        return Err(Error::InvalidDomain("non-finite box bound".into()));
                    }
                    if lo >= hi {
                        return Err(Error::InvalidDomain(format!(
                            "box requires lo < hi per axis, got [{lo}, {hi}]"
                        )));
                    }
                }
            }
            Domain::Ball { center, radius } => {
                if center.is_empty() || center.iter().any(|c| !c.is_finite()) {
                    return Err(Error::InvalidDomain("ball center must be finite".into()));
                }
                if !radius.is_finite() || *radius <= 0.0 {
                    return Err(Error::InvalidDomain(format!(
                        "ball requires radius > 0, got {radius}"
                    )));
                }
            }
        }
        Ok(())
    }

    pub fn dim(&self) -> usize {
        match self {
            Domain::Interval { .. } => 1,
            Domain::Box { lows, .. } => lows.len(),
            Domain::Ball { center, .. } => center.len(),
        }
    }

    /// Geometric center of the set.
    pub fn center(&self) -> Point {
        let coords = match self {
            Domain::Interval { lo, hi } => vec![0.5 * (lo + hi)],
            Domain::Box { lows, highs } => lows
                .iter()
                .zip(highs)
                .map(|(lo, hi)| 0.5 * (lo + hi))
                .collect(),
            Domain::Ball { center, .. } => center.clone(),
        };
        Point { coords }
    }

    /// Per-axis extent of the bounding box.
    fn extents(&self) -> Vec<f64> {
        match self {
            Domain::Interval { lo, hi } => vec![hi - lo],
            Domain::Box { lows, highs } => lows.iter().zip(highs).map(|(lo, hi)| hi - lo).collect(),
            Domain::Ball { center, radius } => vec![2.0 * radius; center.len()],
        }
    }

    /// Largest per-axis grid step for a grid with `per_axis` points per axis.
    pub fn grid_spacing(&self, per_axis: usize) -> f64 {
        let m = per_axis.max(2) as f64;
        self.extents().iter().fold(0.0_f64, |acc, e| acc.max(e / (m - 1.0)))
    }

    /// Smallest per-axis grid step for a grid with `per_axis` points per axis.
    pub fn min_grid_spacing(&self, per_axis: usize) -> f64 {
        let m = per_axis.max(2) as f64;
        self.extents()
            .iter()
            .fold(f64::INFINITY, |acc, e| acc.min(e / (m - 1.0)))
    }

    /// Nearest point of the set; the identity on members.
    pub fn project(&self, x: &Point) -> Result<Point> {
        check_dims(self.dim(), x.dim())?;
        let coords = match self {
            Domain::Interval { lo, hi } => vec![x.coords[0].clamp(*lo, *hi)],
            Domain::Box { lows, highs } => x
                .coords
                .iter()
                .zip(lows.iter().zip(highs))
                .map(|(c, (lo, hi))| c.clamp(*lo, *hi))
                .collect(),
            Domain::Ball { center, radius } => {
                let d = sub(&x.coords, center);
                let n = norm_of(&d);
                if n <= *radius {
                    return Ok(x.clone());
                }
                let scale = radius / n;
                center.iter().zip(&d).map(|(c, di)| c + scale * di).collect()
            }
        };
        Ok(Point { coords })
    }

    /// Distance from `x` to the set (zero on members).
    pub fn distance_from(&self, x: &Point) -> Result<f64> {
        let p = self.project(x)?;
        distance(x, &p)
    }

    /// Membership up to an explicit absolute tolerance.
    pub fn contains(&self, x: &Point, tol: f64) -> Result<bool> {
        Ok(self.distance_from(x)? <= tol)
    }

    /// Regular grid with `per_axis` points per axis, projected into the set.
    ///
    /// Endpoints are included, so the grid always covers the extreme points
    /// where suprema of pairwise quantities tend to be attained. For balls
    /// the bounding-box grid is projected radially, which populates the
    /// boundary sphere.
    pub fn grid(&self, per_axis: usize) -> Result<Vec<Point>> {
        if per_axis < 2 {
            return Err(Error::InvalidParameter {
                name: "density",
                value: per_axis as f64,
                constraint: ">= 2",
            });
        }
        let dim = self.dim();
        let (lows, highs): (Vec<f64>, Vec<f64>) = match self {
            Domain::Interval { lo, hi } => (vec![*lo], vec![*hi]),
            Domain::Box { lows, highs } => (lows.clone(), highs.clone()),
            Domain::Ball { center, radius } => (
                center.iter().map(|c| c - radius).collect(),
                center.iter().map(|c| c + radius).collect(),
            ),
        };
        let axes: Vec<Vec<f64>> = (0..dim)
            .map(|i| linspace(lows[i], highs[i], per_axis))
            .collect();
        let total = per_axis
            .checked_pow(dim as u32)
            .ok_or(Error::InvalidParameter {
                name: "density",
                value: per_axis as f64,
                constraint: "grid size must fit in usize",
            })?;
        let mut points = Vec::with_capacity(total);
        for flat in 0..total {
            let mut idx = flat;
            let mut coords = Vec::with_capacity(dim);
            for axis in axes.iter().rev() {
                coords.push(axis[idx % per_axis]);
                idx /= per_axis;
            }
            coords.reverse();
            points.push(self.project(&Point { coords })?);
        }
        Ok(points)
    }
}

fn linspace(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    let step = (hi - lo) / (n - 1) as f64;
    (0..n)
        .map(|i| if i == n - 1 { hi } else { lo + i as f64 * step })
        .collect()
}

pub(crate) fn random_point<R: Rng>(domain: &Domain, rng: &mut R) -> Point {
    let coords = match domain {
        Domain::Interval { lo, hi } => vec![rng.random_range(*lo..=*hi)],
        Domain::Box { lows, highs } => lows
            .iter()
            .zip(highs)
            .map(|(lo, hi)| rng.random_range(*lo..=*hi))
            .collect(),
        Domain::Ball { center, radius } => loop {
            let candidate: Vec<f64> = center
                .iter()
                .map(|c| rng.random_range(c - radius..=c + radius))
                .collect();
            if norm_of(&sub(&candidate, center)) <= *radius {
                break candidate;
            }
        },
    };
    Point { coords }
}

/// Deterministic sample of a domain: a regular grid with `density` points
/// per axis plus `density^2` seeded uniform points, all inside the set.
pub fn sample_points(domain: &Domain, density: usize, seed: u64) -> Result<Vec<Point>> {
    if density < 2 {
        return Err(Error::InvalidParameter {
            name: "density",
            value: density as f64,
            constraint: ">= 2",
        });
    }
    domain.validate()?;
    let mut points = domain.grid(density)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    points.reserve(density * density);
    for _ in 0..density * density {
        points.push(random_point(domain, &mut rng));
    }
    Ok(points)
}

//! Points, axis-aligned boxes and the small amount of vector arithmetic the
//! rest of the crate needs.

use std::cmp::Ordering;

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// A point of R^N. Coordinates are finite f64s; the dimension is the vector
/// length.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Point(pub Vec<f64>);

impl Point {
    pub fn new(coords: Vec<f64>) -> Result<Self> {
        if coords.is_empty() {
            return Err(Error::InvalidInput("point needs at least one coordinate".into()));
        }
        if coords.iter().any(|c| !c.is_finite()) {
            return Err(Error::InvalidInput("point coordinate is not finite".into()));
        }
        Ok(Point(coords))
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn coords(&self) -> &[f64] {
        &self.0
    }

    pub fn dist(&self, other: &Point) -> f64 {
        dist(&self.0, &other.0)
    }

    /// `self - other`, as a translation vector.
    pub fn offset_from(&self, other: &Point) -> Vec<f64> {
        self.0.iter().zip(&other.0).map(|(a, b)| a - b).collect()
    }

    pub fn translated(&self, t: &[f64]) -> Point {
        Point(self.0.iter().zip(t).map(|(a, b)| a + b).collect())
    }

    pub fn scaled(&self, alpha: f64) -> Point {
        Point(self.0.iter().map(|c| c * alpha).collect())
    }
}

pub(crate) fn dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y) * (x - y))
        .sum::<f64>()
        .sqrt()
}

pub(crate) fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

/// Total lexicographic order on coordinate slices. All stored coordinates are
/// finite, so `partial_cmp` cannot fail.
pub(crate) fn lex_cmp(a: &[f64], b: &[f64]) -> Ordering {
    for (x, y) in a.iter().zip(b) {
        match x.partial_cmp(y).expect("finite coordinates") {
            Ordering::Equal => continue,
            ord => return ord,
        }
    }
    Ordering::Equal
}

/// Closed axis-aligned box with positive volume.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoxRegion {
    min: Vec<f64>,
    max: Vec<f64>,
}

impl BoxRegion {
    pub fn new(min: Vec<f64>, max: Vec<f64>) -> Result<Self> {
        if min.is_empty() || min.len() != max.len() {
            return Err(Error::InvalidInput(
                "box corners must share a positive dimension".into(),
            ));
        }
        if min.iter().chain(max.iter()).any(|c| !c.is_finite()) {
            return Err(Error::InvalidInput("box corner is not finite".into()));
        }
        if min.iter().zip(&max).any(|(lo, hi)| lo >= hi) {
            return Err(Error::InvalidInput(
                "box must satisfy min < max in every coordinate".into(),
            ));
        }
        Ok(BoxRegion { min, max })
    }

    /// Cube of side `side` centered at `center`.
    pub fn cube(center: &[f64], side: f64) -> Result<Self> {
        if side <= 0.0 {
            return Err(Error::InvalidInput(format!("cube side {side} must be positive")));
        }
        let h = side / 2.0;
        BoxRegion::new(
            center.iter().map(|c| c - h).collect(),
            center.iter().map(|c| c + h).collect(),
        )
    }

    pub fn dim(&self) -> usize {
        self.min.len()
    }

    pub fn min(&self) -> &[f64] {
        &self.min
    }

    pub fn max(&self) -> &[f64] {
        &self.max
    }

    pub fn side(&self, axis: usize) -> f64 {
        self.max[axis] - self.min[axis]
    }

    pub fn min_side(&self) -> f64 {
        (0..self.dim()).map(|i| self.side(i)).fold(f64::INFINITY, f64::min)
    }

    pub fn volume(&self) -> f64 {
        (0..self.dim()).map(|i| self.side(i)).product()
    }

    pub fn center(&self) -> Vec<f64> {
        self.min.iter().zip(&self.max).map(|(lo, hi)| (lo + hi) / 2.0).collect()
    }

    pub fn contains(&self, p: &[f64], tol: f64) -> bool {
        p.iter()
            .zip(self.min.iter().zip(&self.max))
            .all(|(c, (lo, hi))| *c >= lo - tol && *c <= hi + tol)
    }

    /// Whether the closed ball B_r(center) lies inside the box, with `tol`
    /// slack on each face.
    pub fn contains_ball(&self, center: &[f64], r: f64, tol: f64) -> bool {
        center
            .iter()
            .zip(self.min.iter().zip(&self.max))
            .all(|(c, (lo, hi))| c - r >= lo - tol && c + r <= hi + tol)
    }

    pub fn contains_region(&self, other: &BoxRegion, tol: f64) -> bool {
        self.contains(&other.min, tol) && self.contains(&other.max, tol)
    }

    /// Distance from an interior point to the box boundary (minimum over
    /// faces); negative if `p` is outside.
    pub fn boundary_distance(&self, p: &[f64]) -> f64 {
        p.iter()
            .zip(self.min.iter().zip(&self.max))
            .map(|(c, (lo, hi))| (c - lo).min(hi - c))
            .fold(f64::INFINITY, f64::min)
    }

    /// Move every face inward by `s`.
    pub fn shrink(&self, s: f64) -> Result<BoxRegion> {
        if s < 0.0 {
            return Err(Error::InvalidInput(format!("shrink amount {s} must be >= 0")));
        }
        if s == 0.0 {
            return Ok(self.clone());
        }
        for i in 0..self.dim() {
            if 2.0 * s >= self.side(i) {
                return Err(Error::EmptyRegion {
                    amount: s,
                    side: self.side(i),
                });
            }
        }
        BoxRegion::new(
            self.min.iter().map(|c| c + s).collect(),
            self.max.iter().map(|c| c - s).collect(),
        )
    }

    pub fn translated(&self, t: &[f64]) -> BoxRegion {
        BoxRegion {
            min: self.min.iter().zip(t).map(|(c, d)| c + d).collect(),
            max: self.max.iter().zip(t).map(|(c, d)| c + d).collect(),
        }
    }

    pub fn scaled(&self, alpha: f64) -> BoxRegion {
        BoxRegion {
            min: self.min.iter().map(|c| c * alpha).collect(),
            max: self.max.iter().map(|c| c * alpha).collect(),
        }
    }
}

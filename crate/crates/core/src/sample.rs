//! Finite windows of Delone sets: validation, the spatial index, packing and
//! covering radii, and period detection.
//!
//! Every operation only uses data the window fully determines. Centers are
//! restricted so their balls stay inside the window, and covering radii carry
//! a censoring check: if a far point of the region could be closer to unseen
//! points outside the window than to any sample point, the measurement is
//! rejected instead of silently inflated.

use serde::Serialize;

use crate::geom::{lex_cmp, norm, BoxRegion, Point};
use crate::grid::UniformGrid;
use crate::{voronoi, Error, Result, DEFAULT_BOUNDARY_TOL, MERGE_TOL, PATCH_TOL_FACTOR};

/// A finite window of a point set, with a uniform-grid index built at
/// construction. Immutable afterwards; all operations are pure.
#[derive(Clone, Debug)]
pub struct PointSample {
    dim: usize,
    window: BoxRegion,
    points: Vec<Point>,
    label: String,
    grid: UniformGrid,
    /// Point indices in lexicographic coordinate order.
    lex_order: Vec<u32>,
    /// Inverse of `lex_order`: rank of each point in that order.
    lex_rank: Vec<u32>,
    /// Half the minimum pairwise distance; `None` for samples with < 2 points.
    packing: Option<f64>,
    patch_tol_override: Option<f64>,
    boundary_tol: f64,
}

impl PointSample {
    pub fn new(
        dim: usize,
        window: BoxRegion,
        points: Vec<Point>,
        label: impl Into<String>,
    ) -> Result<Self> {
        if dim == 0 || window.dim() != dim {
            return Err(Error::InvalidInput(format!(
                "window dimension {} does not match sample dimension {dim}",
                window.dim()
            )));
        }
        if points.is_empty() {
            return Err(Error::InvalidInput("sample has no points".into()));
        }
        for (i, p) in points.iter().enumerate() {
            if p.dim() != dim {
                return Err(Error::RowDimension {
                    line: i,
                    expected: dim,
                    found: p.dim(),
                });
            }
            if p.coords().iter().any(|c| !c.is_finite()) {
                return Err(Error::InvalidInput(format!("point {i} has a non-finite coordinate")));
            }
            if !window.contains(p.coords(), MERGE_TOL) {
                return Err(Error::InvalidInput(format!(
                    "point {i} lies outside the window"
                )));
            }
        }
        let grid = UniformGrid::build(&window, &points);
        // Duplicate rejection within the merge tolerance.
        for (i, p) in points.iter().enumerate() {
            let near = grid.points_in_ball(&points, p.coords(), MERGE_TOL, 0.0);
            for j in near {
                if (j as usize) < i {
                    return Err(Error::DuplicatePoint {
                        first: j as usize,
                        second: i,
                        tol: MERGE_TOL,
                    });
                }
            }
        }
        let mut lex_order: Vec<u32> = (0..points.len() as u32).collect();
        lex_order.sort_by(|&a, &b| lex_cmp(points[a as usize].coords(), points[b as usize].coords()));
        let mut lex_rank = vec![0u32; points.len()];
        for (rank, &idx) in lex_order.iter().enumerate() {
            lex_rank[idx as usize] = rank as u32;
        }
        let packing = if points.len() >= 2 {
            let min_nn = points
                .iter()
                .enumerate()
                .map(|(i, p)| grid.nearest_dist(&points, p.coords(), Some(i as u32)))
                .fold(f64::INFINITY, f64::min);
            Some(min_nn / 2.0)
        } else {
            None
        };
        Ok(PointSample {
            dim,
            window,
            points,
            label: label.into(),
            grid,
            lex_order,
            lex_rank,
            packing,
            patch_tol_override: None,
            boundary_tol: DEFAULT_BOUNDARY_TOL,
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn window(&self) -> &BoxRegion {
        &self.window
    }

    pub fn points(&self) -> &[Point] {
        &self.points
    }

    pub fn point(&self, idx: usize) -> &Point {
        &self.points[idx]
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    /// Point indices sorted lexicographically by coordinates.
    pub fn lex_order(&self) -> &[u32] {
        &self.lex_order
    }

    /// Rank of a point index within the lexicographic order.
    pub fn lex_rank(&self, idx: usize) -> usize {
        self.lex_rank[idx] as usize
    }

    /// Distance from one sample point to its nearest other sample point.
    pub fn nearest_neighbor_dist(&self, idx: usize) -> f64 {
        self.grid
            .nearest_dist(&self.points, self.points[idx].coords(), Some(idx as u32))
    }

    pub fn set_label(&mut self, label: impl Into<String>) {
        self.label = label.into();
    }

    /// Override the patch-equality tolerance (default `1e-6 * r_pack`).
    pub fn set_patch_tol(&mut self, tol: Option<f64>) {
        self.patch_tol_override = tol;
    }

    /// Override the closed-ball boundary tolerance (default 1e-9).
    pub fn set_boundary_tol(&mut self, tol: f64) {
        self.boundary_tol = tol;
    }

    pub fn patch_tol(&self) -> f64 {
        self.patch_tol_override
            .unwrap_or_else(|| PATCH_TOL_FACTOR * self.packing.unwrap_or(1.0))
    }

    pub fn boundary_tol(&self) -> f64 {
        self.boundary_tol
    }

    /// (volume / count)^(1/dim) — the typical inter-point distance scale.
    pub fn mean_spacing(&self) -> f64 {
        (self.window.volume() / self.points.len() as f64).powf(1.0 / self.dim as f64)
    }

    /// Half the minimum pairwise distance, exact over the window.
    pub fn packing_radius(&self) -> Result<f64> {
        self.packing.ok_or(Error::UndefinedRadius)
    }

    /// Largest distance from a region location to its nearest sample point,
    /// exact: evaluated at the vertices of the region-clipped nearest-point
    /// cells. Fails with `BoundaryContamination` if any candidate location is
    /// closer to the window boundary than to its nearest point, since unseen
    /// points beyond the window could then lower the true value.
    pub fn covering_radius(&self, region: &BoxRegion) -> Result<f64> {
        self.check_region(region)?;
        if self.dim == 1 {
            self.covering_radius_1d(region)
        } else {
            voronoi::covering_radius_nd(self, region)
        }
    }

    /// Brute-force cross-check for `covering_radius`: max over a sampling
    /// grid of step `resolution` of the nearest-point distance. Always a
    /// lower bound on the exact value.
    pub fn covering_radius_grid(&self, region: &BoxRegion, resolution: f64) -> Result<f64> {
        self.check_region(region)?;
        if resolution <= 0.0 {
            return Err(Error::InvalidInput("resolution must be positive".into()));
        }
        let steps: Vec<usize> = (0..self.dim)
            .map(|i| (region.side(i) / resolution).ceil() as usize + 1)
            .collect();
        let mut cursor = vec![0usize; self.dim];
        let mut best = 0.0f64;
        let mut location = vec![0.0f64; self.dim];
        loop {
            for i in 0..self.dim {
                location[i] =
                    (region.min()[i] + cursor[i] as f64 * resolution).min(region.max()[i]);
            }
            let d = self.grid.nearest_dist(&self.points, &location, None);
            if d > best {
                best = d;
            }
            let mut axis = self.dim;
            for i in (0..self.dim).rev() {
                if cursor[i] + 1 < steps[i] {
                    cursor[i] += 1;
                    axis = i;
                    break;
                }
            }
            if axis == self.dim {
                return Ok(best);
            }
            for c in cursor.iter_mut().skip(axis + 1) {
                *c = 0;
            }
        }
    }

    fn covering_radius_1d(&self, region: &BoxRegion) -> Result<f64> {
        let xs: Vec<f64> = self.lex_order.iter().map(|&i| self.points[i as usize].0[0]).collect();
        let lo = region.min()[0];
        let hi = region.max()[0];
        // Candidate maximizers: gap midpoints inside the region plus the
        // region endpoints.
        let mut candidates: Vec<f64> = vec![lo, hi];
        for w in xs.windows(2) {
            let mid = (w[0] + w[1]) / 2.0;
            if mid > lo && mid < hi {
                candidates.push(mid);
            }
        }
        let mut best = 0.0f64;
        for c in candidates {
            let d = self.grid.nearest_dist(&self.points, &[c], None);
            let window_d = self.window.boundary_distance(&[c]);
            if d > window_d + self.boundary_tol {
                return Err(Error::BoundaryContamination(format!(
                    "location {c} is {d:.6} from the nearest point but only {window_d:.6} from the window boundary"
                )));
            }
            if d > best {
                best = d;
            }
        }
        Ok(best)
    }

    fn check_region(&self, region: &BoxRegion) -> Result<()> {
        if region.dim() != self.dim {
            return Err(Error::InvalidInput("region dimension mismatch".into()));
        }
        if !self.window.contains_region(region, self.boundary_tol) {
            return Err(Error::BoundaryContamination(
                "region is not contained in the window".into(),
            ));
        }
        Ok(())
    }

    /// Nearest-point distance from an arbitrary location.
    pub fn nearest_distance(&self, location: &[f64]) -> f64 {
        self.grid.nearest_dist(&self.points, location, None)
    }

    /// Indices of points within `r + tol` of `center`.
    pub(crate) fn indices_in_ball(&self, center: &[f64], r: f64, tol: f64) -> Vec<u32> {
        self.grid.points_in_ball(&self.points, center, r, tol)
    }

    /// Indices of points in the closed box `[lo, hi]` with `tol` slack.
    pub(crate) fn indices_in_box(&self, lo: &[f64], hi: &[f64], tol: f64) -> Vec<u32> {
        let qlo: Vec<f64> = lo.iter().map(|c| c - tol).collect();
        let qhi: Vec<f64> = hi.iter().map(|c| c + tol).collect();
        let mut out = Vec::new();
        self.grid.for_box_candidates(&qlo, &qhi, |idx| {
            let p = self.points[idx as usize].coords();
            if p.iter().zip(qlo.iter().zip(&qhi)).all(|(c, (l, h))| c >= l && c <= h) {
                out.push(idx);
            }
        });
        out
    }

    pub(crate) fn has_point_within(&self, location: &[f64], tol: f64) -> bool {
        self.grid.has_point_within(&self.points, location, tol)
    }

    /// Index of the sample point within `MERGE_TOL` of `p`, if any.
    pub fn locate(&self, p: &Point) -> Option<usize> {
        let near = self.grid.points_in_ball(&self.points, p.coords(), MERGE_TOL, 0.0);
        near.into_iter().map(|i| i as usize).next()
    }

    /// Translate the whole sample (window and points) by `t`.
    pub fn translated(&self, t: &[f64]) -> Result<PointSample> {
        PointSample::new(
            self.dim,
            self.window.translated(t),
            self.points.iter().map(|p| p.translated(t)).collect(),
            self.label.clone(),
        )
    }

    /// Scale the whole sample by `alpha > 0`.
    pub fn scaled(&self, alpha: f64) -> Result<PointSample> {
        if alpha <= 0.0 {
            return Err(Error::InvalidInput("scale factor must be positive".into()));
        }
        PointSample::new(
            self.dim,
            self.window.scaled(alpha),
            self.points.iter().map(|p| p.scaled(alpha)).collect(),
            self.label.clone(),
        )
    }

    /// Sub-sample of the given point indices over the same window.
    pub fn subset(&self, indices: &[u32], label: impl Into<String>) -> Result<PointSample> {
        let points = indices.iter().map(|&i| self.points[i as usize].clone()).collect();
        let mut s = PointSample::new(self.dim, self.window.clone(), points, label)?;
        s.patch_tol_override = self.patch_tol_override;
        s.boundary_tol = self.boundary_tol;
        Ok(s)
    }

    /// Scan the empirical difference set for translations that reproduce the
    /// sample on the safely comparable part of the window. Translations up to
    /// a quarter of the smallest window side are tested.
    pub fn detect_periods(&self) -> PeriodReport {
        let max_norm = self.window.min_side() / 4.0;
        let quantum = MERGE_TOL * 8.0;
        // Collect distinct short difference vectors.
        let mut seen = std::collections::HashSet::new();
        let mut diffs: Vec<Vec<f64>> = Vec::new();
        for &i in &self.lex_order {
            let p = self.points[i as usize].coords();
            for j in self.grid.points_in_ball(&self.points, p, max_norm, 0.0) {
                if j == i {
                    continue;
                }
                let q = self.points[j as usize].coords();
                let t: Vec<f64> = q.iter().zip(p).map(|(a, b)| a - b).collect();
                let key: Vec<i64> = t.iter().map(|c| (c / quantum).round() as i64).collect();
                if seen.insert(key) {
                    diffs.push(t);
                }
            }
        }
        diffs.sort_by(|a, b| {
            norm(a)
                .partial_cmp(&norm(b))
                .unwrap()
                .then_with(|| lex_cmp(a, b))
        });
        let mut periods = Vec::new();
        let tested = diffs.len();
        for t in diffs {
            let n = norm(&t);
            let inner = match self.window.shrink(n) {
                Ok(r) => r,
                Err(_) => continue,
            };
            let mut mismatches = 0usize;
            for p in &self.points {
                if !inner.contains(p.coords(), 0.0) {
                    continue;
                }
                let shifted: Vec<f64> = p.coords().iter().zip(&t).map(|(a, b)| a + b).collect();
                if !self.grid.has_point_within(&self.points, &shifted, MERGE_TOL) {
                    mismatches += 1;
                }
            }
            if mismatches == 0 {
                periods.push(PeriodCandidate {
                    translation: t,
                    mismatches,
                });
            }
        }
        let is_periodic = !periods.is_empty();
        PeriodReport {
            periods,
            candidates_tested: tested,
            is_periodic_within_window: is_periodic,
        }
    }
}

/// A translation that reproduced the sample on the comparable window part.
#[derive(Clone, Debug, Serialize)]
pub struct PeriodCandidate {
    pub translation: Vec<f64>,
    pub mismatches: usize,
}

/// Result of the empirical period scan.
#[derive(Clone, Debug, Serialize)]
pub struct PeriodReport {
    /// Difference-set vectors with zero mismatches, sorted by norm.
    pub periods: Vec<PeriodCandidate>,
    pub candidates_tested: usize,
    pub is_periodic_within_window: bool,
}

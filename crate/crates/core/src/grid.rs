//! Uniform-grid spatial index over a window. The contract is "range query in
//! output-sensitive time"; cell size is chosen from the mean point spacing.

use crate::geom::{dist, BoxRegion, Point};

#[derive(Clone, Debug)]
pub(crate) struct UniformGrid {
    origin: Vec<f64>,
    cell: f64,
    counts: Vec<usize>,
    strides: Vec<usize>,
    buckets: Vec<Vec<u32>>,
}

impl UniformGrid {
    pub fn build(window: &BoxRegion, points: &[Point]) -> Self {
        let dim = window.dim();
        let n = points.len().max(1);
        // Mean spacing heuristic; clamp the total cell count so sparse or
        // degenerate samples cannot blow up memory.
        let mut cell = (window.volume() / n as f64).powf(1.0 / dim as f64);
        if !cell.is_finite() || cell <= 0.0 {
            cell = window.min_side();
        }
        loop {
            let total: f64 = (0..dim)
                .map(|i| (window.side(i) / cell).ceil().max(1.0))
                .product();
            if total <= (4 * n + 64) as f64 {
                break;
            }
            cell *= 2.0;
        }
        let counts: Vec<usize> = (0..dim)
            .map(|i| (window.side(i) / cell).ceil().max(1.0) as usize)
            .collect();
        let mut strides = vec![1usize; dim];
        for i in (0..dim.saturating_sub(1)).rev() {
            strides[i] = strides[i + 1] * counts[i + 1];
        }
        let total: usize = counts.iter().product();
        let mut buckets = vec![Vec::new(); total];
        let origin = window.min().to_vec();
        for (idx, p) in points.iter().enumerate() {
            let flat = flat_index(&origin, cell, &counts, &strides, p.coords());
            buckets[flat].push(idx as u32);
        }
        UniformGrid {
            origin,
            cell,
            counts,
            strides,
            buckets,
        }
    }

    fn cell_coord(&self, axis: usize, x: f64) -> usize {
        let c = ((x - self.origin[axis]) / self.cell).floor();
        (c.max(0.0) as usize).min(self.counts[axis] - 1)
    }

    /// Visit the indices of all points in cells overlapping [lo, hi].
    /// Candidates must still be filtered by the exact predicate.
    pub fn for_box_candidates(&self, lo: &[f64], hi: &[f64], mut visit: impl FnMut(u32)) {
        let dim = self.counts.len();
        let lo_c: Vec<usize> = (0..dim).map(|i| self.cell_coord(i, lo[i])).collect();
        let hi_c: Vec<usize> = (0..dim).map(|i| self.cell_coord(i, hi[i])).collect();
        let mut cursor = lo_c.clone();
        loop {
            let flat: usize = cursor.iter().zip(&self.strides).map(|(c, s)| c * s).sum();
            for &idx in &self.buckets[flat] {
                visit(idx);
            }
            // advance odometer
            let mut axis = dim;
            for i in (0..dim).rev() {
                if cursor[i] < hi_c[i] {
                    cursor[i] += 1;
                    axis = i;
                    break;
                }
            }
            if axis == dim {
                return;
            }
            for (i, c) in cursor.iter_mut().enumerate().skip(axis + 1) {
                *c = lo_c[i];
            }
        }
    }

    /// Indices of points within `r + tol` of `center`, unsorted.
    pub fn points_in_ball(&self, points: &[Point], center: &[f64], r: f64, tol: f64) -> Vec<u32> {
        let lo: Vec<f64> = center.iter().map(|c| c - r - tol).collect();
        let hi: Vec<f64> = center.iter().map(|c| c + r + tol).collect();
        let mut out = Vec::new();
        self.for_box_candidates(&lo, &hi, |idx| {
            if dist(points[idx as usize].coords(), center) <= r + tol {
                out.push(idx);
            }
        });
        out
    }

    /// Whether some point lies within `tol` of `location`.
    pub fn has_point_within(&self, points: &[Point], location: &[f64], tol: f64) -> bool {
        let lo: Vec<f64> = location.iter().map(|c| c - tol).collect();
        let hi: Vec<f64> = location.iter().map(|c| c + tol).collect();
        let mut found = false;
        self.for_box_candidates(&lo, &hi, |idx| {
            if !found && dist(points[idx as usize].coords(), location) <= tol {
                found = true;
            }
        });
        found
    }

    /// Distance from `location` to the nearest point, excluding `skip`.
    /// Expands the search ring until the current best is certified.
    pub fn nearest_dist(&self, points: &[Point], location: &[f64], skip: Option<u32>) -> f64 {
        let mut radius = self.cell;
        loop {
            let mut best = f64::INFINITY;
            let lo: Vec<f64> = location.iter().map(|c| c - radius).collect();
            let hi: Vec<f64> = location.iter().map(|c| c + radius).collect();
            self.for_box_candidates(&lo, &hi, |idx| {
                if Some(idx) != skip {
                    let d = dist(points[idx as usize].coords(), location);
                    if d < best {
                        best = d;
                    }
                }
            });
            // Any point outside the scanned box is farther than `radius`.
            if best <= radius {
                return best;
            }
            let exhausted = (0..self.counts.len()).all(|i| {
                location[i] - radius <= self.origin[i]
                    && location[i] + radius
                        >= self.origin[i] + self.cell * self.counts[i] as f64
            });
            if exhausted {
                return best;
            }
            radius *= 2.0;
        }
    }
}

fn flat_index(origin: &[f64], cell: f64, counts: &[usize], strides: &[usize], p: &[f64]) -> usize {
    let mut flat = 0;
    for i in 0..counts.len() {
        let c = ((p[i] - origin[i]) / cell).floor();
        let c = (c.max(0.0) as usize).min(counts[i] - 1);
        flat += c * strides[i];
    }
    flat
}

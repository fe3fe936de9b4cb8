//! Voronoi cells of (locater) point sets, inradius/outradius/distortion, and
//! the uniformity sweep over locater sets.
//!
//! Cells are built per site by halfspace intersection against neighbors
//! inside a growing cutoff. A cell is accepted only when it certifies
//! itself: once twice its outradius is below the cutoff, no point beyond the
//! cutoff can contribute a face. Sites whose certified cell reaches within
//! twice its outradius of the window boundary are excluded as boundary
//! sites, since unseen points outside the window could alter them.

use serde::Serialize;

use crate::geom::{dist, BoxRegion, Point};
use crate::patterns::{self, BallPattern};
use crate::sample::PointSample;
use crate::{Error, Result};

/// `{ p : normal . p <= offset }` with unit normal.
#[derive(Clone, Debug, Serialize)]
pub struct Halfspace {
    pub normal: Vec<f64>,
    pub offset: f64,
}

impl Halfspace {
    fn bisector(site: &[f64], other: &[f64]) -> Halfspace {
        let d = dist(site, other);
        let normal: Vec<f64> = site
            .iter()
            .zip(other)
            .map(|(a, b)| (b - a) / d)
            .collect();
        let mid: Vec<f64> = site.iter().zip(other).map(|(a, b)| (a + b) / 2.0).collect();
        let offset = normal.iter().zip(&mid).map(|(n, m)| n * m).sum();
        Halfspace { normal, offset }
    }

    fn signed_dist(&self, p: &[f64]) -> f64 {
        let d: f64 = self.normal.iter().zip(p).map(|(n, c)| n * c).sum();
        d - self.offset
    }
}

/// Merge tolerance for coincident polytope vertices (degenerate, cospherical
/// configurations such as lattices).
const VERTEX_MERGE_TOL: f64 = 1e-9;
/// A halfspace counts as contributing when some cell vertex lies this close
/// to its plane.
const FACET_TOL: f64 = 1e-7;

/// Vertices of the intersection of `halfspaces`, by enumeration of all
/// dim-subsets of planes. Intended for the small halfspace counts arising
/// from neighbor cutoffs.
fn polytope_vertices(dim: usize, halfspaces: &[Halfspace]) -> Vec<Vec<f64>> {
    let m = halfspaces.len();
    if m < dim {
        return Vec::new();
    }
    let scale = 1.0
        + halfspaces
            .iter()
            .map(|h| h.offset.abs())
            .fold(0.0f64, f64::max);
    let eps = 1e-9 * scale;
    let mut vertices: Vec<Vec<f64>> = Vec::new();
    let mut subset: Vec<usize> = (0..dim).collect();
    loop {
        if let Some(v) = solve_planes(dim, halfspaces, &subset) {
            if halfspaces.iter().all(|h| h.signed_dist(&v) <= eps)
                && !vertices.iter().any(|u| dist(u, &v) <= VERTEX_MERGE_TOL)
            {
                vertices.push(v);
            }
        }
        // next dim-subset of 0..m
        let mut i = dim;
        loop {
            if i == 0 {
                return vertices;
            }
            i -= 1;
            if subset[i] < m - (dim - i) {
                subset[i] += 1;
                for j in (i + 1)..dim {
                    subset[j] = subset[j - 1] + 1;
                }
                break;
            }
        }
    }
}

/// Solve `normal_i . v = offset_i` for the planes in `subset`.
fn solve_planes(dim: usize, halfspaces: &[Halfspace], subset: &[usize]) -> Option<Vec<f64>> {
    let mut a: Vec<Vec<f64>> = subset
        .iter()
        .map(|&i| halfspaces[i].normal.clone())
        .collect();
    let mut b: Vec<f64> = subset.iter().map(|&i| halfspaces[i].offset).collect();
    for col in 0..dim {
        let pivot = (col..dim).max_by(|&i, &j| {
            a[i][col].abs().partial_cmp(&a[j][col].abs()).unwrap()
        })?;
        if a[pivot][col].abs() < 1e-10 {
            return None;
        }
        a.swap(col, pivot);
        b.swap(col, pivot);
        for i in (col + 1)..dim {
            let f = a[i][col] / a[col][col];
            if f != 0.0 {
                for j in col..dim {
                    a[i][j] -= f * a[col][j];
                }
                b[i] -= f * b[col];
            }
        }
    }
    let mut v = vec![0.0f64; dim];
    for i in (0..dim).rev() {
        let s: f64 = ((i + 1)..dim).map(|j| a[i][j] * v[j]).sum();
        v[i] = (b[i] - s) / a[i][i];
    }
    Some(v)
}

/// A bounded Voronoi cell of a sample point.
#[derive(Clone, Debug, Serialize)]
pub struct VoronoiCell {
    pub site: Point,
    pub site_index: usize,
    /// Bisector halfspaces of neighbors that carry part of the boundary.
    #[serde(skip)]
    pub halfspaces: Vec<Halfspace>,
    pub vertices: Vec<Point>,
    pub r_in: f64,
    pub r_out: f64,
    pub bounded: bool,
}

impl VoronoiCell {
    pub fn distortion(&self) -> f64 {
        self.r_out / self.r_in
    }
}

/// The cell of `x` in the sample, certified against the neighbor cutoff and
/// the window boundary.
pub fn voronoi_cell(s: &PointSample, x: &Point) -> Result<VoronoiCell> {
    let idx = s
        .locate(x)
        .ok_or_else(|| Error::InvalidInput("site is not a sample point".into()))?;
    cell_by_index(s, idx)
}

pub(crate) fn cell_by_index(s: &PointSample, idx: usize) -> Result<VoronoiCell> {
    if s.len() < 2 {
        return Err(Error::UndefinedRadius);
    }
    if s.dim() == 1 {
        return cell_1d(s, idx);
    }
    let site = s.point(idx).clone();
    let x = site.coords();
    // The final cell satisfies r_out >= r_in = (nearest-neighbor dist) / 2,
    // so a site failing the window check on that lower bound is a boundary
    // site; rejecting it here avoids certifying a doomed cell.
    let nn = s.nearest_neighbor_dist(idx);
    if !s.window().contains_ball(x, nn, s.boundary_tol()) {
        return Err(Error::BoundarySite(format!(
            "site {idx} is closer to the window boundary than its nearest-neighbor distance"
        )));
    }
    let mut cutoff = (2.5 * s.mean_spacing()).max(2.0 * nn);
    let escape = 8.0 * s.window().max().iter().zip(s.window().min()).map(|(a, b)| a - b).fold(0.0f64, f64::max);
    loop {
        let neighbors: Vec<u32> = s
            .indices_in_ball(x, cutoff, 0.0)
            .into_iter()
            .filter(|&i| i as usize != idx)
            .collect();
        if neighbors.len() > 512 {
            // Certification would need a quadratic sweep over hundreds of
            // planes; such sites are boundary-dominated in every fixture.
            return Err(Error::BoundarySite(format!(
                "cell of site {idx} did not certify within {} neighbors",
                neighbors.len()
            )));
        }
        let mut halfspaces: Vec<Halfspace> = neighbors
            .iter()
            .map(|&i| Halfspace::bisector(x, s.point(i as usize).coords()))
            .collect();
        let guard_first = halfspaces.len();
        append_box_planes(&mut halfspaces, &BoxRegion::cube(x, cutoff)?);
        let vertices = polytope_vertices(s.dim(), &halfspaces);
        if !vertices.is_empty() {
            let r_out = vertices.iter().map(|v| dist(v, x)).fold(0.0f64, f64::max);
            if 2.0 * r_out < cutoff * (1.0 - 1e-12) {
                // No point beyond the cutoff can cut this cell.
                if !s.window().contains_ball(x, 2.0 * r_out, s.boundary_tol()) {
                    return Err(Error::BoundarySite(format!(
                        "cell of site {idx} reaches within 2*r_out = {:.6} of the window boundary",
                        2.0 * r_out
                    )));
                }
                let r_in = halfspaces[..guard_first]
                    .iter()
                    .map(|h| -h.signed_dist(x))
                    .fold(f64::INFINITY, f64::min);
                let contributing: Vec<Halfspace> = halfspaces[..guard_first]
                    .iter()
                    .filter(|h| vertices.iter().any(|v| h.signed_dist(v).abs() <= FACET_TOL))
                    .cloned()
                    .collect();
                return Ok(VoronoiCell {
                    site,
                    site_index: idx,
                    halfspaces: contributing,
                    vertices: vertices.into_iter().map(Point).collect(),
                    r_in,
                    r_out,
                    bounded: true,
                });
            }
        }
        cutoff *= 2.0;
        if cutoff > escape {
            return Err(Error::BoundarySite(format!(
                "cell of site {idx} could not be certified within the window"
            )));
        }
    }
}

fn cell_1d(s: &PointSample, idx: usize) -> Result<VoronoiCell> {
    let order = s.lex_order();
    let pos = s.lex_rank(idx);
    if pos == 0 || pos + 1 == order.len() {
        return Err(Error::BoundarySite(format!("site {idx} has no neighbor on one side")));
    }
    let x = s.point(idx).coords()[0];
    let left = s.point(order[pos - 1] as usize).coords()[0];
    let right = s.point(order[pos + 1] as usize).coords()[0];
    let half_left = (x - left) / 2.0;
    let half_right = (right - x) / 2.0;
    let r_in = half_left.min(half_right);
    let r_out = half_left.max(half_right);
    if !s.window().contains_ball(&[x], 2.0 * r_out, s.boundary_tol()) {
        return Err(Error::BoundarySite(format!(
            "cell of site {idx} reaches within 2*r_out of the window boundary"
        )));
    }
    Ok(VoronoiCell {
        site: s.point(idx).clone(),
        site_index: idx,
        halfspaces: vec![
            Halfspace { normal: vec![-1.0], offset: -(x - half_left) },
            Halfspace { normal: vec![1.0], offset: x + half_right },
        ],
        vertices: vec![Point(vec![x - half_left]), Point(vec![x + half_right])],
        r_in,
        r_out,
        bounded: true,
    })
}

fn append_box_planes(halfspaces: &mut Vec<Halfspace>, region: &BoxRegion) {
    let dim = region.dim();
    for axis in 0..dim {
        let mut n = vec![0.0; dim];
        n[axis] = 1.0;
        halfspaces.push(Halfspace { normal: n.clone(), offset: region.max()[axis] });
        n[axis] = -1.0;
        halfspaces.push(Halfspace { normal: n, offset: -region.min()[axis] });
    }
}

/// Per-site distortion of one interior cell.
#[derive(Clone, Debug, Serialize)]
pub struct SiteDistortion {
    pub site_index: usize,
    pub r_in: f64,
    pub r_out: f64,
    pub distortion: f64,
}

/// Distortions over all interior sites; boundary sites are excluded and
/// counted.
#[derive(Clone, Debug, Serialize)]
pub struct DistortionReport {
    pub per_site: Vec<SiteDistortion>,
    pub max_distortion: f64,
    pub argmax_site: usize,
    pub excluded_boundary_sites: usize,
}

pub fn set_distortion(s: &PointSample) -> Result<DistortionReport> {
    let mut per_site = Vec::new();
    let mut excluded = 0usize;
    for idx in 0..s.len() {
        match cell_by_index(s, idx) {
            Ok(cell) => per_site.push(SiteDistortion {
                site_index: idx,
                r_in: cell.r_in,
                r_out: cell.r_out,
                distortion: cell.distortion(),
            }),
            Err(Error::BoundarySite(_)) => excluded += 1,
            Err(e) => return Err(e),
        }
    }
    if per_site.is_empty() {
        return Err(Error::InsufficientWindow(
            "no interior sites admit a certified cell".into(),
        ));
    }
    let (argmax, max) = per_site
        .iter()
        .map(|d| (d.site_index, d.distortion))
        .fold((0usize, f64::NEG_INFINITY), |acc, cur| {
            if cur.1 > acc.1 {
                cur
            } else {
                acc
            }
        });
    Ok(DistortionReport {
        per_site,
        max_distortion: max,
        argmax_site: argmax,
        excluded_boundary_sites: excluded,
    })
}

/// Largest locater-set cell distortion over a radius grid of patch classes.
/// A finite-grid lower bound on the uniformity supremum.
#[derive(Clone, Debug, Serialize)]
pub struct UniformityEstimate {
    pub value: f64,
    pub argmax: Option<(f64, BallPattern)>,
    pub radius_grid: Vec<f64>,
    pub classes_examined: usize,
    pub classes_skipped: usize,
    pub excluded_boundary_sites: usize,
}

pub fn uniformity_estimate(s: &PointSample, radius_grid: &[f64]) -> Result<UniformityEstimate> {
    let mut grid = radius_grid.to_vec();
    grid.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let mut best: Option<(f64, f64, BallPattern)> = None;
    let mut examined = 0usize;
    let mut skipped = 0usize;
    let mut excluded = 0usize;
    for &r in &grid {
        let classes = match patterns::patch_classes(s, r, s.window()) {
            Ok(c) => c,
            Err(Error::InsufficientWindow(_)) => {
                skipped += 1;
                continue;
            }
            Err(e) => return Err(e),
        };
        for class in classes {
            examined += 1;
            if class.members.len() < 2 {
                skipped += 1;
                continue;
            }
            let sub = s.subset(&class.members, format!("{}-r{}-class", s.label(), r))?;
            match set_distortion(&sub) {
                Ok(report) => {
                    excluded += report.excluded_boundary_sites;
                    let better = best
                        .as_ref()
                        .map(|(v, _, _)| report.max_distortion > *v)
                        .unwrap_or(true);
                    if better {
                        best = Some((report.max_distortion, r, class.representative.clone()));
                    }
                }
                Err(Error::InsufficientWindow(_)) | Err(Error::UndefinedRadius) => {
                    skipped += 1;
                }
                Err(e) => return Err(e),
            }
        }
    }
    match best {
        Some((value, r, pattern)) => Ok(UniformityEstimate {
            value,
            argmax: Some((r, pattern)),
            radius_grid: grid,
            classes_examined: examined,
            classes_skipped: skipped,
            excluded_boundary_sites: excluded,
        }),
        None => Err(Error::InsufficientWindow(
            "every locater set was boundary-starved".into(),
        )),
    }
}

/// Maximum over `region` of the distance to the nearest sample point, exact.
///
/// A coarse sampling pass gives a certified upper bound `u` (the sampled
/// maximum plus the sampling-lattice covering radius). Every region point is
/// then owned by a site within `u` of the region, and each such site's
/// nearest-point cell clipped to the region lies inside the ball of radius
/// `u` around the site. Those clipped cells are computed exactly from the
/// bisectors of neighbors within `2 sqrt(N) u` (all that can reach the
/// guard cube of half-side `u`), and the distance to the owner — convex on
/// each cell — is maximized over clipped-cell vertices. Any candidate
/// location closer to the window boundary than to its nearest point aborts
/// with `BoundaryContamination`, since unseen points beyond the window could
/// lower the true value there.
pub(crate) fn covering_radius_nd(s: &PointSample, region: &BoxRegion) -> Result<f64> {
    let dim = s.dim();
    let res = s.mean_spacing() / 2.0;
    let sampled = s.covering_radius_grid(region, res)?;
    let upper = sampled + res * (dim as f64).sqrt() / 2.0 + 1e-9;

    let lo: Vec<f64> = region.min().iter().map(|c| c - upper).collect();
    let hi: Vec<f64> = region.max().iter().map(|c| c + upper).collect();
    let sites = s.indices_in_box(&lo, &hi, 0.0);
    let neighbor_radius = 2.0 * (dim as f64).sqrt() * upper + 1e-9;
    let mut worst = 0.0f64;
    for &site_idx in &sites {
        let x = s.point(site_idx as usize).coords();
        let neighbors = s.indices_in_ball(x, neighbor_radius, 0.0);
        if neighbors.len() > 4096 {
            return Err(Error::BoundaryContamination(
                "covering radius would need an oversized neighbor sweep".into(),
            ));
        }
        let mut halfspaces: Vec<Halfspace> = neighbors
            .iter()
            .filter(|&&i| i != site_idx)
            .map(|&i| Halfspace::bisector(x, s.point(i as usize).coords()))
            .collect();
        append_box_planes(&mut halfspaces, region);
        append_box_planes(&mut halfspaces, &BoxRegion::cube(x, 2.0 * upper)?);
        let vertices = polytope_vertices(dim, &halfspaces);
        for v in &vertices {
            let d = dist(v, x);
            if d >= upper - 1e-10 {
                // Real cell points stay strictly below the certified upper
                // bound; anything at or past it sits on the guard cube.
                continue;
            }
            let boundary = s.window().boundary_distance(v);
            if d > boundary + s.boundary_tol() {
                return Err(Error::BoundaryContamination(format!(
                    "a region location is {d:.6} from its nearest point but {boundary:.6} from the window boundary"
                )));
            }
            if d > worst {
                worst = d;
            }
        }
    }
    Ok(worst.max(sampled))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::generators::{self, ChainSpec, DisplacementRule};

    fn z2(n: usize) -> PointSample {
        let w = BoxRegion::new(vec![0.0, 0.0], vec![n as f64, n as f64]).unwrap();
        generators::lattice(&[vec![1.0, 0.0], vec![0.0, 1.0]], w).unwrap()
    }

    #[test]
    fn z2_interior_cell_is_unit_square() {
        let s = z2(20);
        let cell = voronoi_cell(&s, &Point(vec![10.0, 10.0])).unwrap();
        assert!((cell.r_in - 0.5).abs() < 1e-9);
        assert!((cell.r_out - 0.5 * 2.0f64.sqrt()).abs() < 1e-9);
        assert!((cell.distortion() - 2.0f64.sqrt()).abs() < 1e-9);
        assert_eq!(cell.vertices.len(), 4);
        assert!(cell.bounded);
    }

    #[test]
    fn z1_cells_are_unit_intervals() {
        let points = (0..=20).map(|i| Point(vec![i as f64])).collect();
        let s = PointSample::new(
            1,
            BoxRegion::new(vec![0.0], vec![20.0]).unwrap(),
            points,
            "z1",
        )
        .unwrap();
        let cell = voronoi_cell(&s, &Point(vec![10.0])).unwrap();
        assert!((cell.r_in - 0.5).abs() < 1e-12);
        assert!((cell.r_out - 0.5).abs() < 1e-12);
        assert!((cell.distortion() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn fibonacci_cells_are_gap_midpoint_intervals() {
        let s = generators::fibonacci_chain(10, 0.0).unwrap();
        let phi = generators::PHI;
        let report = set_distortion(&s).unwrap();
        // Worst interior cell sits between a long and a short gap.
        assert!((report.max_distortion - phi).abs() < 1e-9);
        for d in &report.per_site {
            let order = s.lex_order();
            let pos = order.iter().position(|&i| i as usize == d.site_index).unwrap();
            let x = s.point(d.site_index).coords()[0];
            let left = s.point(order[pos - 1] as usize).coords()[0];
            let right = s.point(order[pos + 1] as usize).coords()[0];
            let expect_in = ((x - left) / 2.0).min((right - x) / 2.0);
            let expect_out = ((x - left) / 2.0).max((right - x) / 2.0);
            assert!((d.r_in - expect_in).abs() < 1e-12);
            assert!((d.r_out - expect_out).abs() < 1e-12);
        }
    }

    #[test]
    fn boundary_sites_are_excluded() {
        let s = z2(10);
        assert!(matches!(
            voronoi_cell(&s, &Point(vec![0.0, 5.0])),
            Err(Error::BoundarySite(_))
        ));
    }

    #[test]
    fn inradius_matches_half_nearest_neighbor_distance() {
        let w = BoxRegion::new(vec![0.0, 0.0], vec![24.0, 24.0]).unwrap();
        let s = generators::perturbed_lattice(
            &[vec![0.0, 0.0], vec![0.2, 0.0]],
            &DisplacementRule::Checkerboard,
            w,
        )
        .unwrap();
        let report = set_distortion(&s).unwrap();
        for d in report.per_site.iter().step_by(7) {
            let x = s.point(d.site_index).coords();
            let nn = s
                .points()
                .iter()
                .enumerate()
                .filter(|(i, _)| *i != d.site_index)
                .map(|(_, p)| dist(p.coords(), x))
                .fold(f64::INFINITY, f64::min);
            assert!((d.r_in - nn / 2.0).abs() < 1e-9, "site {}", d.site_index);
        }
    }

    #[test]
    fn distortion_is_bounded_by_radius_ratio() {
        let s = generators::product_chain_2d(
            &ChainSpec::Fibonacci { depth: 8 },
            &ChainSpec::Fibonacci { depth: 8 },
        )
        .unwrap();
        let report = set_distortion(&s).unwrap();
        let pack = s.packing_radius().unwrap();
        let shrink = s.window().shrink(2.0 * 1.2).unwrap();
        let cov = s.covering_radius(&shrink).unwrap();
        assert!(report.max_distortion <= cov / pack + 1e-9);
    }

    #[test]
    fn cell_vertices_touch_enough_sites() {
        let w = BoxRegion::new(vec![0.0, 0.0], vec![20.0, 20.0]).unwrap();
        let s = generators::perturbed_lattice(
            &[vec![0.0, 0.0], vec![0.2, 0.1], vec![0.0, 0.2]],
            &DisplacementRule::Checkerboard,
            w,
        )
        .unwrap();
        let center = s.window().center();
        let central = (0..s.len())
            .min_by(|&a, &b| {
                dist(s.point(a).coords(), &center)
                    .partial_cmp(&dist(s.point(b).coords(), &center))
                    .unwrap()
            })
            .unwrap();
        let cell = cell_by_index(&s, central).unwrap();
        for v in &cell.vertices {
            let d_site = dist(v.coords(), cell.site.coords());
            let within: usize = s
                .points()
                .iter()
                .filter(|p| dist(p.coords(), v.coords()) <= d_site + 1e-7)
                .count();
            assert!(within >= 3, "vertex equidistant to {within} sites");
        }
    }

    #[test]
    fn lattice_uniformity_is_sqrt_dim() {
        let s = z2(26);
        let estimate = uniformity_estimate(&s, &[1.0, 2.0]).unwrap();
        assert!((estimate.value - 2.0f64.sqrt()).abs() < 1e-9);
    }

    #[test]
    fn translation_invariance_of_distortion() {
        let s = z2(12);
        let t = s.translated(&[0.3, -0.7]).unwrap();
        let a = set_distortion(&s).unwrap();
        let b = set_distortion(&t).unwrap();
        assert_eq!(a.per_site.len(), b.per_site.len());
        assert!((a.max_distortion - b.max_distortion).abs() < 1e-12);
    }
}

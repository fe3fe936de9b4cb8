//! Ball patterns, patches, locater sets, copy counts and patch-class
//! enumeration.
//!
//! A patch is the sample translated so its center sits at the origin,
//! intersected with a closed ball. Closed-ball membership is decided with a
//! small boundary tolerance, inclusively: a point within `boundary_tol` of
//! the sphere counts as inside. Patch equality compares canonically ordered
//! point lists pairwise within the patch tolerance.

use std::collections::HashMap;
use std::hash::{Hash, Hasher};

use serde::Serialize;

use crate::geom::{dist, lex_cmp, BoxRegion, Point};
use crate::sample::PointSample;
use crate::{Error, Result};

/// Largest candidate count for which the exact disjoint-copy maximum is
/// attempted; larger instances must use greedy mode.
pub const EXACT_CAP: usize = 64;

/// A center (an element of the sample) together with a radius.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BallPattern {
    pub center: Point,
    pub radius: f64,
}

impl BallPattern {
    pub fn new(center: Point, radius: f64) -> Self {
        BallPattern { center, radius }
    }

    /// Checks that the center belongs to `s` and its ball stays inside the
    /// window; returns the center's point index.
    pub fn validate(&self, s: &PointSample) -> Result<usize> {
        if self.radius <= 0.0 {
            return Err(Error::InadmissiblePattern(format!(
                "radius {} must be positive",
                self.radius
            )));
        }
        let idx = s.locate(&self.center).ok_or_else(|| {
            Error::InadmissiblePattern("center is not a sample point".into())
        })?;
        if !s
            .window()
            .contains_ball(self.center.coords(), self.radius, s.boundary_tol())
        {
            return Err(Error::InadmissiblePattern(format!(
                "ball of radius {} around the center escapes the window",
                self.radius
            )));
        }
        Ok(idx)
    }
}

/// Finite origin-containing point set in canonical (lexicographic) order.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Patch {
    points: Vec<Point>,
    radius: f64,
}

impl Patch {
    pub fn points(&self) -> &[Point] {
        &self.points
    }

    pub fn radius(&self) -> f64 {
        self.radius
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Debug dump as a standalone sample whose window is the ball's
    /// bounding box.
    pub fn to_sample(&self, label: impl Into<String>) -> Result<PointSample> {
        let dim = self.points[0].dim();
        let r = self.radius;
        let window = BoxRegion::new(vec![-r; dim], vec![r; dim])?;
        PointSample::new(dim, window, self.points.clone(), label)
    }
}

/// The sample points whose patch at the pattern's radius equals the
/// pattern's own patch, restricted to centers whose ball fits in
/// `admissible_region`.
#[derive(Clone, Debug, Serialize)]
pub struct LocaterSet {
    pub pattern: BallPattern,
    pub members: Vec<Point>,
    #[serde(skip)]
    pub member_indices: Vec<u32>,
    pub admissible_region: BoxRegion,
}

/// Candidate copies and the pairs that are too close to be disjoint.
#[derive(Clone, Debug, Serialize)]
pub struct ConflictGraph {
    pub vertices: Vec<Point>,
    /// Index pairs at distance <= 2R (+ boundary tolerance).
    pub edges: Vec<(usize, usize)>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum CountMode {
    Exact,
    Greedy,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum CountMethod {
    Exact,
    GreedyLowerBound,
}

/// Result of the disjoint-copy count.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct DisjointCount {
    pub count: usize,
    pub method: CountMethod,
}

/// One equivalence class of patches at a fixed radius. `members` are the
/// admissible centers realizing the class, in lexicographic order; the
/// representative is the lexicographically least of them.
#[derive(Clone, Debug, Serialize)]
pub struct PatchClass {
    pub representative: BallPattern,
    pub patch: Patch,
    #[serde(skip)]
    pub members: Vec<u32>,
    pub count: usize,
}

impl PointSample {
    /// The sample translated by `-x`, intersected with the closed ball of
    /// radius `r`; `x` must be a sample point with its ball inside the window.
    pub fn extract_patch(&self, x: &Point, r: f64) -> Result<Patch> {
        let idx = BallPattern::new(x.clone(), r).validate(self)?;
        Ok(self.patch_by_index(idx, r))
    }

    pub(crate) fn patch_by_index(&self, idx: usize, r: f64) -> Patch {
        let center = self.point(idx).clone();
        let in_ball = self.indices_in_ball(center.coords(), r, self.boundary_tol());
        let mut points: Vec<Point> = in_ball
            .iter()
            .map(|&i| Point(self.point(i as usize).offset_from(&center)))
            .collect();
        points.sort_by(|a, b| lex_cmp(a.coords(), b.coords()));
        Patch { points, radius: r }
    }

    /// Number of distinct patch classes over centers whose ball of radius
    /// `r` fits inside the window.
    pub fn flc_census(&self, r: f64) -> Result<usize> {
        Ok(patch_classes(self, r, self.window())?.len())
    }
}

/// True when both patches have the same cardinality and the canonically
/// ordered points match pairwise within `tol`.
pub fn patch_equal(p: &Patch, q: &Patch, tol: f64) -> Result<bool> {
    if p.radius != q.radius {
        return Err(Error::RadiusMismatch(p.radius, q.radius));
    }
    Ok(patches_match(p, q, tol))
}

fn patches_match(p: &Patch, q: &Patch, tol: f64) -> bool {
    p.points.len() == q.points.len()
        && p.points
            .iter()
            .zip(&q.points)
            .all(|(a, b)| dist(a.coords(), b.coords()) <= tol)
}

/// Visits every admissible center in `region` whose patch matches
/// `reference`. Matching is done in place against the reference offsets, so
/// no per-candidate patch is materialized.
fn scan_matches(
    s: &PointSample,
    reference: &Patch,
    region: &BoxRegion,
    mut visit: impl FnMut(u32),
) {
    let r = reference.radius();
    let tol_b = s.boundary_tol();
    let tol_p = s.patch_tol();
    // B_r(y) inside region <=> y in the region shrunk by r.
    let lo: Vec<f64> = region.min().iter().map(|c| c + r).collect();
    let hi: Vec<f64> = region.max().iter().map(|c| c - r).collect();
    if lo.iter().zip(&hi).any(|(l, h)| *l > h + 2.0 * tol_b) {
        return;
    }
    let mut candidates = s.indices_in_box(&lo, &hi, tol_b);
    candidates.sort_by(|&a, &b| {
        lex_cmp(s.point(a as usize).coords(), s.point(b as usize).coords())
    });
    let mut shifted = vec![0.0f64; s.dim()];
    'candidate: for idx in candidates {
        let y = s.point(idx as usize).coords();
        if s.indices_in_ball(y, r, tol_b).len() != reference.len() {
            continue;
        }
        for offset in reference.points() {
            for (i, v) in shifted.iter_mut().enumerate() {
                *v = y[i] + offset.coords()[i];
            }
            if !s.has_point_within(&shifted, tol_p) {
                continue 'candidate;
            }
        }
        visit(idx);
    }
}

/// All sample points whose `R`-patch equals the pattern's, with balls inside
/// `region`.
pub fn locater_set(s: &PointSample, pattern: &BallPattern, region: &BoxRegion) -> Result<LocaterSet> {
    let idx = pattern.validate(s)?;
    if !s.window().contains_region(region, s.boundary_tol()) {
        return Err(Error::InvalidInput("region is not contained in the window".into()));
    }
    let reference = s.patch_by_index(idx, pattern.radius);
    let mut member_indices = Vec::new();
    scan_matches(s, &reference, region, |i| member_indices.push(i));
    let members = member_indices
        .iter()
        .map(|&i| s.point(i as usize).clone())
        .collect();
    Ok(LocaterSet {
        pattern: pattern.clone(),
        members,
        member_indices,
        admissible_region: region.clone(),
    })
}

/// Number of copies of the pattern fully inside `region`.
pub fn copies_count(s: &PointSample, pattern: &BallPattern, region: &BoxRegion) -> Result<usize> {
    let idx = pattern.validate(s)?;
    let reference = s.patch_by_index(idx, pattern.radius);
    let mut count = 0usize;
    scan_matches(s, &reference, region, |_| count += 1);
    Ok(count)
}

pub(crate) fn copies_of_patch(s: &PointSample, reference: &Patch, region: &BoxRegion) -> usize {
    let mut count = 0usize;
    scan_matches(s, reference, region, |_| count += 1);
    count
}

pub(crate) fn copy_positions(s: &PointSample, reference: &Patch, region: &BoxRegion) -> Vec<u32> {
    let mut out = Vec::new();
    scan_matches(s, reference, region, |i| out.push(i));
    out
}

/// Candidate copies in `region` and their conflict edges (pairs whose balls
/// of radius `R` overlap).
pub fn conflict_graph(
    s: &PointSample,
    pattern: &BallPattern,
    region: &BoxRegion,
) -> Result<ConflictGraph> {
    let idx = pattern.validate(s)?;
    let reference = s.patch_by_index(idx, pattern.radius);
    let positions = copy_positions(s, &reference, region);
    let vertices: Vec<Point> = positions.iter().map(|&i| s.point(i as usize).clone()).collect();
    let threshold = 2.0 * pattern.radius + s.boundary_tol();
    let mut edges = Vec::new();
    for i in 0..vertices.len() {
        for j in (i + 1)..vertices.len() {
            if vertices[i].dist(&vertices[j]) <= threshold {
                edges.push((i, j));
            }
        }
    }
    Ok(ConflictGraph { vertices, edges })
}

/// Maximal number of copies of the pattern in `region` whose balls are
/// pairwise disjoint. Exact mode solves the maximum independent set of the
/// conflict graph by branch and bound (capped at [`EXACT_CAP`] candidates);
/// greedy mode sweeps candidates in coordinate order and reports a certified
/// lower bound.
pub fn disjoint_copies_count(
    s: &PointSample,
    pattern: &BallPattern,
    region: &BoxRegion,
    mode: CountMode,
) -> Result<DisjointCount> {
    let idx = pattern.validate(s)?;
    let reference = s.patch_by_index(idx, pattern.radius);
    let positions = copy_positions(s, &reference, region);
    disjoint_count_of_positions(s, &positions, pattern.radius, mode)
}

pub(crate) fn disjoint_count_of_positions(
    s: &PointSample,
    positions: &[u32],
    radius: f64,
    mode: CountMode,
) -> Result<DisjointCount> {
    let threshold = 2.0 * radius + s.boundary_tol();
    match mode {
        CountMode::Exact => {
            if positions.len() > EXACT_CAP {
                return Err(Error::ExactCapExceeded {
                    candidates: positions.len(),
                    cap: EXACT_CAP,
                });
            }
            let n = positions.len();
            let mut adjacency = vec![0u64; n];
            for i in 0..n {
                let a = s.point(positions[i] as usize);
                for j in (i + 1)..n {
                    let b = s.point(positions[j] as usize);
                    if a.dist(b) <= threshold {
                        adjacency[i] |= 1 << j;
                        adjacency[j] |= 1 << i;
                    }
                }
            }
            Ok(DisjointCount {
                count: max_independent_set(&adjacency),
                method: CountMethod::Exact,
            })
        }
        CountMode::Greedy => Ok(DisjointCount {
            count: greedy_packing(s, positions, threshold),
            method: CountMethod::GreedyLowerBound,
        }),
    }
}

/// Coordinate-order sweep: accept a candidate when no previously accepted
/// point lies within `threshold`. Optimal in one dimension, a lower bound in
/// general.
fn greedy_packing(s: &PointSample, positions: &[u32], threshold: f64) -> usize {
    let mut order: Vec<u32> = positions.to_vec();
    order.sort_by(|&a, &b| lex_cmp(s.point(a as usize).coords(), s.point(b as usize).coords()));
    let dim = s.dim();
    let cell = threshold;
    let mut chosen: Vec<&Point> = Vec::new();
    let mut bins: HashMap<Vec<i64>, Vec<usize>> = HashMap::new();
    let key_of = |p: &Point| -> Vec<i64> {
        p.coords().iter().map(|c| (c / cell).floor() as i64).collect()
    };
    'next: for idx in order {
        let p = s.point(idx as usize);
        let key = key_of(p);
        let mut neighbor = vec![0i64; dim];
        let mut cursor = vec![-1i64; dim];
        loop {
            for i in 0..dim {
                neighbor[i] = key[i] + cursor[i];
            }
            if let Some(bucket) = bins.get(&neighbor) {
                for &c in bucket {
                    if chosen[c].dist(p) <= threshold {
                        continue 'next;
                    }
                }
            }
            let mut axis = dim;
            for i in (0..dim).rev() {
                if cursor[i] < 1 {
                    cursor[i] += 1;
                    axis = i;
                    break;
                }
            }
            if axis == dim {
                break;
            }
            for c in cursor.iter_mut().skip(axis + 1) {
                *c = -1;
            }
        }
        bins.entry(key).or_default().push(chosen.len());
        chosen.push(p);
    }
    chosen.len()
}

/// Branch-and-bound maximum independent set over adjacency bitmasks,
/// branching on the highest-degree vertex.
fn max_independent_set(adjacency: &[u64]) -> usize {
    let n = adjacency.len();
    if n == 0 {
        return 0;
    }
    let full: u64 = if n == 64 { u64::MAX } else { (1u64 << n) - 1 };
    // Greedy seed: sweep by ascending degree.
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by_key(|&i| adjacency[i].count_ones());
    let mut taken = 0u64;
    let mut best = 0usize;
    for &v in &order {
        if taken & adjacency[v] == 0 && taken & (1 << v) == 0 {
            taken |= 1 << v;
            best += 1;
        }
    }
    fn recurse(adjacency: &[u64], candidates: u64, count: usize, best: &mut usize) {
        if count + candidates.count_ones() as usize <= *best {
            return;
        }
        if candidates == 0 {
            *best = (*best).max(count);
            return;
        }
        // Absorb isolated vertices, then branch on the busiest one.
        let mut cand = candidates;
        let mut count = count;
        let mut pivot = usize::MAX;
        let mut pivot_degree = 0u32;
        let mut scan = cand;
        while scan != 0 {
            let v = scan.trailing_zeros() as usize;
            scan &= scan - 1;
            let degree = (adjacency[v] & cand).count_ones();
            if degree == 0 {
                cand &= !(1 << v);
                count += 1;
            } else if pivot == usize::MAX || degree > pivot_degree {
                pivot = v;
                pivot_degree = degree;
            }
        }
        if pivot == usize::MAX {
            *best = (*best).max(count);
            return;
        }
        recurse(
            adjacency,
            cand & !(adjacency[pivot] | (1 << pivot)),
            count + 1,
            best,
        );
        recurse(adjacency, cand & !(1 << pivot), count, best);
    }
    recurse(adjacency, full, 0, &mut best);
    best
}

/// One representative per patch-equality class at radius `r`, over centers
/// whose ball fits inside `region`. Centers are visited in lexicographic
/// order, so the representative is the lexicographically least center of its
/// class. Classes are first grouped by a quantized coordinate hash and then
/// verified by full comparison; a final merge pass joins classes whose
/// representatives compare equal across hash buckets.
pub fn patch_classes(s: &PointSample, r: f64, region: &BoxRegion) -> Result<Vec<PatchClass>> {
    if r <= 0.0 {
        return Err(Error::InvalidInput(format!("patch radius {r} must be positive")));
    }
    let tol_b = s.boundary_tol();
    let tol_p = s.patch_tol();
    let centers: Vec<u32> = s
        .lex_order()
        .iter()
        .copied()
        .filter(|&i| {
            region.contains_ball(s.point(i as usize).coords(), r, tol_b)
        })
        .collect();
    if centers.is_empty() {
        return Err(Error::InsufficientWindow(format!(
            "no centers admit a ball of radius {r}"
        )));
    }
    struct ClassAccum {
        patch: Patch,
        members: Vec<u32>,
    }
    let quantum = (tol_p / 4.0).max(1e-15);
    let mut buckets: HashMap<u64, Vec<usize>> = HashMap::new();
    let mut classes: Vec<ClassAccum> = Vec::new();
    for &idx in &centers {
        let patch = s.patch_by_index(idx as usize, r);
        let key = quantized_key(&patch, quantum);
        let bucket = buckets.entry(key).or_default();
        let mut found = None;
        for &cid in bucket.iter() {
            if patches_match(&classes[cid].patch, &patch, tol_p) {
                found = Some(cid);
                break;
            }
        }
        match found {
            Some(cid) => classes[cid].members.push(idx),
            None => {
                bucket.push(classes.len());
                classes.push(ClassAccum {
                    patch,
                    members: vec![idx],
                });
            }
        }
    }
    // Cross-bucket merge: quantization can split classes whose coordinates
    // sit on a quantum boundary. Union representatives that compare equal.
    let k = classes.len();
    let mut parent: Vec<usize> = (0..k).collect();
    fn find(parent: &mut Vec<usize>, mut x: usize) -> usize {
        while parent[x] != x {
            parent[x] = parent[parent[x]];
            x = parent[x];
        }
        x
    }
    for i in 0..k {
        for j in (i + 1)..k {
            if classes[i].patch.len() == classes[j].patch.len()
                && find(&mut parent, i) != find(&mut parent, j)
                && patches_match(&classes[i].patch, &classes[j].patch, tol_p)
            {
                let (a, b) = (find(&mut parent, i), find(&mut parent, j));
                let (lo, hi) = (a.min(b), a.max(b));
                parent[hi] = lo;
            }
        }
    }
    let mut merged: Vec<Option<PatchClass>> = (0..k).map(|_| None).collect();
    for (cid, accum) in classes.into_iter().enumerate() {
        let root = find(&mut parent, cid);
        match &mut merged[root] {
            Some(class) => {
                class.members.extend(accum.members);
                class.count = class.members.len();
            }
            None => {
                let rep_idx = accum.members[0] as usize;
                merged[root] = Some(PatchClass {
                    representative: BallPattern::new(s.point(rep_idx).clone(), r),
                    count: accum.members.len(),
                    patch: accum.patch,
                    members: accum.members,
                });
            }
        }
    }
    let mut out: Vec<PatchClass> = merged.into_iter().flatten().collect();
    for class in &mut out {
        class
            .members
            .sort_by(|&a, &b| lex_cmp(s.point(a as usize).coords(), s.point(b as usize).coords()));
        class.count = class.members.len();
    }
    out.sort_by(|a, b| {
        lex_cmp(
            a.representative.center.coords(),
            b.representative.center.coords(),
        )
    });
    Ok(out)
}

fn quantized_key(patch: &Patch, quantum: f64) -> u64 {
    let mut hasher = std::collections::hash_map::DefaultHasher::new();
    patch.len().hash(&mut hasher);
    for p in patch.points() {
        for c in p.coords() {
            let q = (c / quantum).round() as i64;
            q.hash(&mut hasher);
        }
    }
    hasher.finish()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::generators;

    fn z1(n: usize) -> PointSample {
        let points = (0..=n).map(|i| Point(vec![i as f64])).collect();
        PointSample::new(
            1,
            BoxRegion::new(vec![0.0], vec![n as f64]).unwrap(),
            points,
            "z1",
        )
        .unwrap()
    }

    #[test]
    fn z1_patch_at_radius_one_and_a_half() {
        let s = z1(10);
        let patch = s.extract_patch(&Point(vec![5.0]), 1.5).unwrap();
        let offsets: Vec<f64> = patch.points().iter().map(|p| p.coords()[0]).collect();
        assert_eq!(offsets, vec![-1.0, 0.0, 1.0]);
    }

    #[test]
    fn small_radius_patch_is_origin_only() {
        let s = z1(10);
        let patch = s.extract_patch(&Point(vec![5.0]), 0.3).unwrap();
        assert_eq!(patch.len(), 1);
        assert_eq!(patch.points()[0].coords(), &[0.0]);
    }

    #[test]
    fn patch_extraction_rejects_bad_centers() {
        let s = z1(10);
        assert!(matches!(
            s.extract_patch(&Point(vec![5.25]), 1.0),
            Err(Error::InadmissiblePattern(_))
        ));
        assert!(matches!(
            s.extract_patch(&Point(vec![0.0]), 1.0),
            Err(Error::InadmissiblePattern(_))
        ));
    }

    #[test]
    fn fibonacci_long_and_short_gap_patches_differ() {
        let s = generators::fibonacci_chain(10, 0.0).unwrap();
        // First tile is long (a), second is short-adjacent; find one point
        // with right gap PHI and one with right gap 1, both interior.
        let pts = s.points();
        let mut long_center = None;
        let mut short_center = None;
        for w in pts.windows(2) {
            let gap = w[1].coords()[0] - w[0].coords()[0];
            let c = &w[0];
            if s.window().contains_ball(c.coords(), 1.2, 0.0) {
                if gap > 1.5 && long_center.is_none() {
                    long_center = Some(c.clone());
                }
                if gap < 1.5 && short_center.is_none() {
                    short_center = Some(c.clone());
                }
            }
        }
        let p = s.extract_patch(&long_center.unwrap(), 1.2).unwrap();
        let q = s.extract_patch(&short_center.unwrap(), 1.2).unwrap();
        assert!(!patch_equal(&p, &q, s.patch_tol()).unwrap());
    }

    #[test]
    fn patch_equality_basics() {
        let s = z1(10);
        let p = s.extract_patch(&Point(vec![5.0]), 1.5).unwrap();
        assert!(patch_equal(&p, &p, 1e-9).unwrap());
        let q = s.extract_patch(&Point(vec![4.0]), 1.5).unwrap();
        assert!(patch_equal(&p, &q, 1e-9).unwrap());
        let tiny = s.extract_patch(&Point(vec![5.0]), 0.3).unwrap();
        assert!(matches!(
            patch_equal(&p, &tiny, 1e-9),
            Err(Error::RadiusMismatch(_, _))
        ));
    }

    #[test]
    fn locater_set_of_lattice_is_everything_admissible() {
        let mut points = Vec::new();
        for i in 0..=20 {
            for j in 0..=20 {
                points.push(Point(vec![i as f64, j as f64]));
            }
        }
        let s = PointSample::new(
            2,
            BoxRegion::new(vec![0.0, 0.0], vec![20.0, 20.0]).unwrap(),
            points,
            "z2",
        )
        .unwrap();
        let pattern = BallPattern::new(Point(vec![10.0, 10.0]), 1.5);
        let region = s.window().clone();
        let l = locater_set(&s, &pattern, &region).unwrap();
        // Admissible centers form the 18x18 block [2,18]^2.
        assert_eq!(l.members.len(), 17 * 17);
        assert!(l.members.iter().any(|m| m == &pattern.center));
    }

    #[test]
    fn z1_copy_counts_match_hand_enumeration() {
        let s = z1(12);
        let pattern = BallPattern::new(Point(vec![6.0]), 1.0);
        let region = BoxRegion::new(vec![0.0], vec![10.0]).unwrap();
        assert_eq!(copies_count(&s, &pattern, &region).unwrap(), 9);
        let exact = disjoint_copies_count(&s, &pattern, &region, CountMode::Exact).unwrap();
        assert_eq!(exact.count, 3);
        assert_eq!(exact.method, CountMethod::Exact);
        let greedy = disjoint_copies_count(&s, &pattern, &region, CountMode::Greedy).unwrap();
        assert_eq!(greedy.count, 3);
        assert_eq!(greedy.method, CountMethod::GreedyLowerBound);
    }

    #[test]
    fn region_shorter_than_diameter_has_no_copies() {
        let s = z1(12);
        let pattern = BallPattern::new(Point(vec![6.0]), 1.0);
        let region = BoxRegion::new(vec![4.9], vec![6.7]).unwrap();
        assert_eq!(copies_count(&s, &pattern, &region).unwrap(), 0);
    }

    #[test]
    fn copies_count_is_monotone_in_region() {
        let s = z1(30);
        let pattern = BallPattern::new(Point(vec![15.0]), 1.0);
        let mut prev = 0;
        for side in [4.0, 8.0, 16.0, 28.0] {
            let region = BoxRegion::cube(&[15.0], side).unwrap();
            let n = copies_count(&s, &pattern, &region).unwrap();
            assert!(n >= prev);
            prev = n;
        }
    }

    #[test]
    fn single_candidate_disjoint_equals_plain_count() {
        let s = z1(12);
        let pattern = BallPattern::new(Point(vec![6.0]), 1.0);
        let region = BoxRegion::new(vec![4.5], vec![7.5]).unwrap();
        assert_eq!(copies_count(&s, &pattern, &region).unwrap(), 1);
        let d = disjoint_copies_count(&s, &pattern, &region, CountMode::Exact).unwrap();
        assert_eq!(d.count, 1);
    }

    #[test]
    fn exact_cap_is_enforced() {
        let s = z1(200);
        let pattern = BallPattern::new(Point(vec![100.0]), 1.0);
        let region = BoxRegion::new(vec![0.0], vec![200.0]).unwrap();
        match disjoint_copies_count(&s, &pattern, &region, CountMode::Exact) {
            Err(Error::ExactCapExceeded { candidates, cap }) => {
                assert_eq!(cap, EXACT_CAP);
                assert!(candidates > cap);
            }
            other => panic!("expected cap error, got {other:?}"),
        }
    }

    #[test]
    fn lattice_has_one_patch_class() {
        let s = z1(100);
        assert_eq!(s.flc_census(1.5).unwrap(), 1);
        let classes = patch_classes(&s, 1.5, s.window()).unwrap();
        assert_eq!(classes[0].count, 97);
        // Deterministic representative: the least admissible center.
        assert_eq!(classes[0].representative.center.coords(), &[2.0]);
    }

    #[test]
    fn fibonacci_census_is_monotone_in_radius() {
        let s = generators::fibonacci_chain(12, 0.0).unwrap();
        let mut prev = 0;
        for r in [1.0, 2.0, 4.0, 8.0] {
            let n = s.flc_census(r).unwrap();
            assert!(n >= prev, "census dropped from {prev} to {n} at r={r}");
            prev = n;
        }
    }

    #[test]
    fn fibonacci_classes_at_small_radius() {
        // Patches of radius 1.2 see a neighbor only across short gaps, so
        // the classes are (long,long), (long,short) and (short,long); the
        // word has no two adjacent short tiles.
        let s = generators::fibonacci_chain(12, 0.0).unwrap();
        let classes = patch_classes(&s, 1.2, s.window()).unwrap();
        assert_eq!(classes.len(), 3);
    }

    #[test]
    fn coarse_classes_refine_into_fine_classes() {
        let s = generators::fibonacci_chain(12, 0.0).unwrap();
        let coarse = patch_classes(&s, 1.0, s.window()).unwrap();
        let fine = patch_classes(&s, 2.0, s.window()).unwrap();
        // Every radius-2 class maps into exactly one radius-1 class.
        for f in &fine {
            let mut targets = std::collections::HashSet::new();
            for &m in &f.members {
                for (ci, c) in coarse.iter().enumerate() {
                    if c.members.contains(&m) {
                        targets.insert(ci);
                    }
                }
            }
            assert_eq!(targets.len(), 1, "radius-2 class split across radius-1 classes");
        }
    }

    #[test]
    fn locater_members_are_mutually_locatable() {
        let s = z1(40);
        let pattern = BallPattern::new(Point(vec![20.0]), 2.0);
        let region = s.window().clone();
        let l = locater_set(&s, &pattern, &region).unwrap();
        let other = BallPattern::new(l.members[0].clone(), 2.0);
        let l2 = locater_set(&s, &other, &region).unwrap();
        assert_eq!(l.members, l2.members);
    }

    #[test]
    fn patch_dump_round_trips_as_sample() {
        let s = z1(10);
        let patch = s.extract_patch(&Point(vec![5.0]), 1.5).unwrap();
        let dump = patch.to_sample("patch").unwrap();
        assert_eq!(dump.len(), 3);
        assert_eq!(dump.window().min(), &[-1.5]);
        assert_eq!(dump.window().max(), &[1.5]);
    }

    #[test]
    fn brute_force_matches_branch_and_bound_on_small_instances() {
        // Independent oracle: subset enumeration with incremental
        // independence flags.
        fn brute_force(adjacency: &[u64]) -> usize {
            let n = adjacency.len();
            assert!(n <= 20);
            let mut independent = vec![false; 1 << n];
            independent[0] = true;
            let mut best = 0;
            for mask in 1usize..(1 << n) {
                let v = mask.trailing_zeros() as usize;
                let rest = mask & (mask - 1);
                if independent[rest] && (adjacency[v] & mask as u64) == 0 {
                    independent[mask] = true;
                    best = best.max(mask.count_ones() as usize);
                }
            }
            best
        }
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
        for _ in 0..60 {
            let n = rng.gen_range(1..=16);
            let p = rng.gen_range(0.1..0.7);
            let mut adjacency = vec![0u64; n];
            for i in 0..n {
                for j in (i + 1)..n {
                    if rng.gen_bool(p) {
                        adjacency[i] |= 1 << j;
                        adjacency[j] |= 1 << i;
                    }
                }
            }
            assert_eq!(max_independent_set(&adjacency), brute_force(&adjacency));
        }
    }
}

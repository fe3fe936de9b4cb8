//! Lower densities and lower reduced densities of ball patterns over growing
//! cube families, and the weight infima over radius grids of patch classes.
//!
//! The liminf over all cubes is approximated conservatively: per cube size
//! the value is minimized over a placement grid of translated cubes, and the
//! reported estimate is the minimum over the tail of the size ladder.

use serde::Serialize;

use crate::geom::BoxRegion;
use crate::patterns::{self, BallPattern, CountMethod, CountMode, EXACT_CAP};
use crate::sample::PointSample;
use crate::{Error, Result};

/// Volume of the unit ball.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct BallVolume {
    pub dim: usize,
    pub value: f64,
}

/// `|B_1|` in dimension `n`, via the two-step recurrence
/// `V_n = 2 pi V_{n-2} / n` with `V_0 = 1`, `V_1 = 2`.
pub fn unit_ball_volume(n: usize) -> BallVolume {
    assert!(n >= 1, "dimension must be >= 1");
    let mut values = vec![1.0f64, 2.0];
    for k in 2..=n {
        let v = 2.0 * std::f64::consts::PI * values[k - 2] / k as f64;
        values.push(v);
    }
    BallVolume { dim: n, value: values[n] }
}

/// `|B_r| = r^n |B_1|`.
pub fn ball_volume(n: usize, r: f64) -> f64 {
    unit_ball_volume(n).value * r.powi(n as i32)
}

/// Window-centered cubes on a strictly increasing side ladder, each size
/// evaluated at a grid of placement offsets (fractions of the side).
#[derive(Clone, Debug, Serialize)]
pub struct CubeFamily {
    sides: Vec<f64>,
    offset_fractions: Vec<f64>,
    tail_fraction: f64,
}

impl CubeFamily {
    /// Geometric ladder `base, base*factor, ...` with the default placement
    /// offsets `-1/4, 0, +1/4` of the side and a tail fraction of one half.
    pub fn geometric(base: f64, factor: f64, count: usize) -> Result<Self> {
        if base <= 0.0 || factor <= 1.0 || count == 0 {
            return Err(Error::InvalidInput(
                "cube ladder needs base > 0, factor > 1, count >= 1".into(),
            ));
        }
        let sides = (0..count).map(|k| base * factor.powi(k as i32)).collect();
        Ok(CubeFamily {
            sides,
            offset_fractions: vec![-0.25, 0.0, 0.25],
            tail_fraction: 0.5,
        })
    }

    pub fn with_offsets(mut self, fractions: Vec<f64>) -> Self {
        self.offset_fractions = fractions;
        self
    }

    pub fn with_tail_fraction(mut self, tail: f64) -> Result<Self> {
        if !(tail > 0.0 && tail <= 1.0) {
            return Err(Error::InvalidInput("tail fraction must be in (0, 1]".into()));
        }
        self.tail_fraction = tail;
        Ok(self)
    }

    pub fn sides(&self) -> &[f64] {
        &self.sides
    }

    pub fn largest_side(&self) -> f64 {
        *self.sides.last().expect("non-empty ladder")
    }

    pub fn offset_fractions(&self) -> &[f64] {
        &self.offset_fractions
    }

    pub fn tail_fraction(&self) -> f64 {
        self.tail_fraction
    }

    /// Number of trailing ladder entries forming the estimate tail.
    pub fn tail_len(&self) -> usize {
        (((self.sides.len() as f64) * self.tail_fraction).floor() as usize)
            .clamp(1, self.sides.len())
    }

    /// Double every side, keeping offsets and tail fraction.
    pub fn scaled(&self, factor: f64) -> CubeFamily {
        CubeFamily {
            sides: self.sides.iter().map(|s| s * factor).collect(),
            offset_fractions: self.offset_fractions.clone(),
            tail_fraction: self.tail_fraction,
        }
    }

    /// All placements of the cube of side `side` around `center`.
    pub fn placements(&self, center: &[f64], side: f64) -> Vec<BoxRegion> {
        let dim = center.len();
        let k = self.offset_fractions.len();
        let total = k.pow(dim as u32);
        let mut out = Vec::with_capacity(total);
        for code in 0..total {
            let mut c = code;
            let shifted: Vec<f64> = (0..dim)
                .map(|i| {
                    let f = self.offset_fractions[c % k];
                    c /= k;
                    center[i] + f * side
                })
                .collect();
            out.push(BoxRegion::cube(&shifted, side).expect("positive side"));
        }
        out
    }

    /// Every placed cube must stay inside the window.
    pub fn validate_for(&self, window: &BoxRegion) -> Result<()> {
        if self.sides.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::InvalidInput("cube ladder must be strictly increasing".into()));
        }
        let center = window.center();
        for &side in &self.sides {
            for cube in self.placements(&center, side) {
                if !window.contains_region(&cube, 1e-9) {
                    return Err(Error::InsufficientWindow(format!(
                        "a placed cube of side {side} escapes the window"
                    )));
                }
            }
        }
        Ok(())
    }
}

/// One ladder entry: the minimum over placements at this side.
#[derive(Clone, Debug, Serialize)]
pub struct DensityEntry {
    pub side: f64,
    pub value: f64,
    /// False when a greedy (lower-bound) disjoint count entered this entry.
    pub certified: bool,
}

/// Convergence sequence and min-tail estimate for one pattern.
#[derive(Clone, Debug, Serialize)]
pub struct DensityReport {
    pub pattern: BallPattern,
    pub entries: Vec<DensityEntry>,
    /// Minimum over the tail of the ladder.
    pub estimate: f64,
    pub tail_fraction: f64,
    pub method: CountMethod,
    /// False when the estimate rests on uncertified (greedy) entries.
    pub certified: bool,
    pub warnings: Vec<String>,
}

fn density_sweep(
    s: &PointSample,
    pattern: &BallPattern,
    family: &CubeFamily,
    reduced: bool,
) -> Result<DensityReport> {
    let idx = pattern.validate(s)?;
    family.validate_for(s.window())?;
    let reference = s.patch_by_index(idx, pattern.radius);
    let ball = ball_volume(s.dim(), pattern.radius);
    let center = s.window().center();
    let mut entries = Vec::with_capacity(family.sides().len());
    let mut method = CountMethod::Exact;
    let mut warnings = Vec::new();
    if family.sides().len() < 4 {
        warnings.push(format!(
            "ladder has only {} sizes; convergence diagnostics are weak",
            family.sides().len()
        ));
    }
    for &side in family.sides() {
        let mut best = f64::INFINITY;
        let mut certified = true;
        for cube in family.placements(&center, side) {
            let value = if reduced {
                let positions = patterns::copy_positions(s, &reference, &cube);
                let mode = if positions.len() <= EXACT_CAP {
                    CountMode::Exact
                } else {
                    CountMode::Greedy
                };
                let count =
                    patterns::disjoint_count_of_positions(s, &positions, pattern.radius, mode)?;
                if count.method == CountMethod::GreedyLowerBound {
                    method = CountMethod::GreedyLowerBound;
                    certified = false;
                }
                count.count as f64 * ball / cube.volume()
            } else {
                patterns::copies_of_patch(s, &reference, &cube) as f64 * ball / cube.volume()
            };
            if value < best {
                best = value;
            }
        }
        entries.push(DensityEntry {
            side,
            value: best,
            certified,
        });
    }
    let tail = family.tail_len();
    let tail_entries = &entries[entries.len() - tail..];
    let estimate = tail_entries.iter().map(|e| e.value).fold(f64::INFINITY, f64::min);
    let certified = tail_entries.iter().all(|e| e.certified);
    Ok(DensityReport {
        pattern: pattern.clone(),
        entries,
        estimate,
        tail_fraction: family.tail_fraction(),
        method,
        certified,
        warnings,
    })
}

/// Lower density: liminf over cubes of (copy count * ball volume) / volume.
pub fn lower_density(
    s: &PointSample,
    pattern: &BallPattern,
    family: &CubeFamily,
) -> Result<DensityReport> {
    density_sweep(s, pattern, family, false)
}

/// Lower reduced density: same with the maximal disjoint copy count.
pub fn lower_reduced_density(
    s: &PointSample,
    pattern: &BallPattern,
    family: &CubeFamily,
) -> Result<DensityReport> {
    density_sweep(s, pattern, family, true)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum WeightKind {
    /// Infimum of lower densities (the weight `w`).
    Copies,
    /// Infimum of lower reduced densities (the quasiweight `w'`).
    DisjointCopies,
}

/// Infimum over a radius grid of patch classes of the per-class density
/// estimate.
#[derive(Clone, Debug, Serialize)]
pub struct WeightEstimate {
    pub kind: WeightKind,
    pub value: f64,
    pub radius_grid: Vec<f64>,
    pub classes_per_radius: Vec<(f64, usize)>,
    pub argmin: Option<(f64, BallPattern)>,
    pub certified: bool,
}

pub fn weight_estimate(
    s: &PointSample,
    family: &CubeFamily,
    radius_grid: &[f64],
    kind: WeightKind,
) -> Result<WeightEstimate> {
    if radius_grid.is_empty() {
        return Err(Error::InvalidInput("radius grid is empty".into()));
    }
    let mut grid = radius_grid.to_vec();
    grid.sort_by(|a, b| a.partial_cmp(b).unwrap());
    if grid[0] < 1.0 {
        return Err(Error::InvalidInput(
            "weight radius grid starts below the radius floor of 1".into(),
        ));
    }
    // The tail sides must accommodate at least one copy, else the infimum
    // degenerates to zero for purely geometric reasons.
    let smallest_tail_side = family.sides()[family.sides().len() - family.tail_len()];
    let max_r = grid[grid.len() - 1];
    if smallest_tail_side <= 2.0 * max_r {
        return Err(Error::InsufficientWindow(format!(
            "tail cube side {smallest_tail_side} cannot hold a pattern of radius {max_r}"
        )));
    }
    let mut value = f64::INFINITY;
    let mut argmin = None;
    let mut classes_per_radius = Vec::new();
    let mut certified = true;
    for &r in &grid {
        let classes = patterns::patch_classes(s, r, s.window())?;
        classes_per_radius.push((r, classes.len()));
        for class in classes {
            let report = density_sweep(
                s,
                &class.representative,
                family,
                matches!(kind, WeightKind::DisjointCopies),
            )?;
            if !report.certified {
                certified = false;
            }
            if report.estimate < value {
                value = report.estimate;
                argmin = Some((r, class.representative.clone()));
            }
        }
    }
    Ok(WeightEstimate {
        kind,
        value,
        radius_grid: grid,
        classes_per_radius,
        argmin,
        certified,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geom::Point;
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
    fn unit_ball_volumes() {
        assert_eq!(unit_ball_volume(1).value, 2.0);
        assert!((unit_ball_volume(2).value - std::f64::consts::PI).abs() < 1e-12);
        assert!((unit_ball_volume(3).value - 4.0 * std::f64::consts::PI / 3.0).abs() < 1e-12);
    }

    #[test]
    fn z1_lower_density_approaches_two() {
        let s = z1(320);
        let pattern = BallPattern::new(Point(vec![160.0]), 1.0);
        let family = CubeFamily::geometric(12.5, 2.0, 4).unwrap();
        let report = lower_density(&s, &pattern, &family).unwrap();
        let last = report.entries.last().unwrap();
        assert_eq!(last.side, 100.0);
        assert!((last.value - 2.0).abs() / 2.0 < 0.05, "value {}", last.value);
        assert!(report.estimate <= last.value);
        assert_eq!(report.method, CountMethod::Exact);
    }

    #[test]
    fn z1_reduced_density_approaches_two_thirds() {
        let s = z1(320);
        let pattern = BallPattern::new(Point(vec![160.0]), 1.0);
        let family = CubeFamily::geometric(12.5, 2.0, 4).unwrap();
        let report = lower_reduced_density(&s, &pattern, &family).unwrap();
        let last = report.entries.last().unwrap();
        assert!(
            (last.value - 2.0 / 3.0).abs() / (2.0 / 3.0) < 0.1,
            "value {}",
            last.value
        );
        // 100-side cubes have ~99 candidates, beyond the exact cap.
        assert_eq!(report.method, CountMethod::GreedyLowerBound);
        assert!(!report.certified);
    }

    #[test]
    fn reduced_density_respects_cube_diameter_bound() {
        let s = z1(160);
        let family = CubeFamily::geometric(10.0, 2.0, 3).unwrap();
        for r in [1.0, 2.0] {
            let pattern = BallPattern::new(Point(vec![80.0]), r);
            let report = lower_reduced_density(&s, &pattern, &family).unwrap();
            let bound = unit_ball_volume(1).value * 0.5;
            for e in &report.entries {
                assert!(e.value <= bound + 1e-9, "entry {} exceeds {bound}", e.value);
            }
        }
    }

    #[test]
    fn reduced_never_exceeds_plain_density() {
        let s = generators::fibonacci_chain(12, 0.0).unwrap();
        let family = CubeFamily::geometric(20.0, 2.0, 3).unwrap();
        let classes = patterns::patch_classes(&s, 1.2, s.window()).unwrap();
        for class in classes {
            let nu = lower_density(&s, &class.representative, &family).unwrap();
            let nu_p = lower_reduced_density(&s, &class.representative, &family).unwrap();
            assert!(nu_p.estimate <= nu.estimate + 1e-12);
            assert!(nu_p.estimate >= 0.0);
        }
    }

    #[test]
    fn scaling_sample_and_radius_preserves_entries() {
        let s = z1(160);
        let pattern = BallPattern::new(Point(vec![80.0]), 1.0);
        let family = CubeFamily::geometric(10.0, 2.0, 3).unwrap();
        let a = lower_density(&s, &pattern, &family).unwrap();
        let s2 = s.scaled(2.0).unwrap();
        let pattern2 = BallPattern::new(Point(vec![160.0]), 2.0);
        let family2 = family.scaled(2.0);
        let b = lower_density(&s2, &pattern2, &family2).unwrap();
        for (ea, eb) in a.entries.iter().zip(&b.entries) {
            assert!(
                (ea.value - eb.value).abs() < 1e-9,
                "{} vs {}",
                ea.value,
                eb.value
            );
        }
    }

    #[test]
    fn z1_weight_attained_at_radius_one() {
        let s = z1(320);
        let family = CubeFamily::geometric(12.5, 2.0, 4).unwrap();
        let w = weight_estimate(&s, &family, &[1.0, 2.0, 4.0], WeightKind::Copies).unwrap();
        assert!((w.value - 2.0).abs() / 2.0 < 0.1, "w = {}", w.value);
        let (r, _) = w.argmin.as_ref().unwrap();
        assert_eq!(*r, 1.0);
        let wp =
            weight_estimate(&s, &family, &[1.0, 2.0, 4.0], WeightKind::DisjointCopies).unwrap();
        assert!(wp.value <= w.value);
        assert!((wp.value - 2.0 / 3.0).abs() / (2.0 / 3.0) < 0.15, "w' = {}", wp.value);
    }

    #[test]
    fn weight_grid_validation() {
        let s = z1(100);
        let family = CubeFamily::geometric(10.0, 2.0, 3).unwrap();
        assert!(weight_estimate(&s, &family, &[], WeightKind::Copies).is_err());
        assert!(weight_estimate(&s, &family, &[0.5], WeightKind::Copies).is_err());
        // Tail cubes of side 40 cannot hold a radius-24 pattern.
        assert!(matches!(
            weight_estimate(&s, &family, &[1.0, 24.0], WeightKind::Copies),
            Err(Error::InsufficientWindow(_))
        ));
    }

    #[test]
    fn fibonacci_quasiweight_stable_across_depths() {
        let family = CubeFamily::geometric(20.0, 2.0, 3).unwrap();
        let grid = [1.0, 2.0, 4.0];
        let w10 = {
            let s = generators::fibonacci_chain(10, 0.0).unwrap();
            weight_estimate(&s, &family, &grid, WeightKind::DisjointCopies).unwrap()
        };
        let w12 = {
            let s = generators::fibonacci_chain(12, 0.0).unwrap();
            weight_estimate(&s, &family, &grid, WeightKind::DisjointCopies).unwrap()
        };
        assert!(w10.value > 0.0);
        assert!(w12.value > 0.0);
        let rel = (w10.value - w12.value).abs() / w12.value;
        assert!(rel < 0.25, "w' moved {rel} between depths");
    }
}

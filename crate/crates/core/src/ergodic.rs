//! Subadditive invariant region functions and their cube limits: the
//! empirical side of the subadditive averaging story, plus pattern
//! frequencies.
//!
//! Region functions evaluate on boxes. Subadditivity is probed on seeded
//! axis splits of random boxes (the union of the two parts is the original
//! box, so no union evaluation is needed); invariance is probed on pairs
//! `(Q, t + Q)` whose point configurations match exactly, with `t` drawn
//! from the empirical difference set via locater sets.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::densities::{ball_volume, CubeFamily};
use crate::geom::{BoxRegion, Point};
use crate::patterns::{self, BallPattern, CountMode, Patch, EXACT_CAP};
use crate::sample::PointSample;
use crate::Result;

/// Deterministic seed for the trial generators.
const TRIAL_SEED: u64 = 0x5eed_0b0e;

/// A named function of (sample, box region), with declared structure flags.
/// Evaluators must only read points inside the region.
pub struct RegionFunction {
    name: String,
    pub declared_subadditive: bool,
    pub declared_invariant: bool,
    eval: Box<dyn Fn(&PointSample, &BoxRegion) -> f64 + Send + Sync>,
}

impl std::fmt::Debug for RegionFunction {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("RegionFunction")
            .field("name", &self.name)
            .field("declared_subadditive", &self.declared_subadditive)
            .field("declared_invariant", &self.declared_invariant)
            .finish()
    }
}

impl RegionFunction {
    pub fn new(
        name: impl Into<String>,
        declared_subadditive: bool,
        declared_invariant: bool,
        eval: impl Fn(&PointSample, &BoxRegion) -> f64 + Send + Sync + 'static,
    ) -> Self {
        RegionFunction {
            name: name.into(),
            declared_subadditive,
            declared_invariant,
            eval: Box::new(eval),
        }
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn eval(&self, s: &PointSample, region: &BoxRegion) -> f64 {
        (self.eval)(s, region)
    }

    /// `-F`, with the structure flags cleared (negation flips subadditivity
    /// into superadditivity and vice versa; callers re-declare as needed).
    pub fn negated(self) -> RegionFunction {
        let name = format!("-({})", self.name);
        RegionFunction {
            name,
            declared_subadditive: false,
            declared_invariant: self.declared_invariant,
            eval: Box::new(move |s, q| -(self.eval)(s, q)),
        }
    }

    pub fn zero() -> RegionFunction {
        RegionFunction::new("zero", true, true, |_, _| 0.0)
    }

    /// `F(Q) = -(number of copies of the patch in Q)`: subadditive and
    /// invariant.
    pub fn neg_copy_count(patch: Patch) -> RegionFunction {
        RegionFunction::new(
            format!("neg-copies-r{}", patch.radius()),
            true,
            true,
            move |s, q| -(patterns::copies_of_patch(s, &patch, q) as f64),
        )
    }

    /// `F(Q) = (max disjoint copies of the patch in Q) * |B_R|`; the negation
    /// is the subadditive object.
    pub fn scaled_disjoint_count(patch: Patch) -> RegionFunction {
        RegionFunction::new(
            format!("scaled-disjoint-r{}", patch.radius()),
            false,
            true,
            move |s, q| {
                let positions = patterns::copy_positions(s, &patch, q);
                let mode = if positions.len() <= EXACT_CAP {
                    CountMode::Exact
                } else {
                    CountMode::Greedy
                };
                let count = patterns::disjoint_count_of_positions(s, &positions, patch.radius(), mode)
                    .expect("mode chosen within cap")
                    .count;
                count as f64 * ball_volume(s.dim(), patch.radius())
            },
        )
    }
}

/// Outcome of the seeded subadditivity probe.
#[derive(Clone, Debug, Serialize)]
pub struct SubadditivityCheck {
    pub trials: usize,
    pub passed: bool,
    /// `(part_1, part_2, f_whole, f_part_1, f_part_2)` for the first
    /// violated split.
    pub witness: Option<(BoxRegion, BoxRegion, f64, f64, f64)>,
}

/// Tests `F(Q) <= F(Q_1) + F(Q_2)` on `trials` seeded axis splits of random
/// boxes inside the window.
pub fn check_subadditive(f: &RegionFunction, s: &PointSample, trials: usize) -> SubadditivityCheck {
    let mut rng = ChaCha8Rng::seed_from_u64(TRIAL_SEED);
    let window = s.window();
    let dim = s.dim();
    for trial in 0..trials {
        let whole = random_box(&mut rng, window, 4.0 * s.mean_spacing());
        let axis = rng.gen_range(0..dim);
        let frac = rng.gen_range(0.25..0.75);
        let split = whole.min()[axis] + frac * whole.side(axis);
        let mut hi1 = whole.max().to_vec();
        hi1[axis] = split;
        let mut lo2 = whole.min().to_vec();
        lo2[axis] = split;
        let part1 = BoxRegion::new(whole.min().to_vec(), hi1).expect("positive split");
        let part2 = BoxRegion::new(lo2, whole.max().to_vec()).expect("positive split");
        let f_whole = f.eval(s, &whole);
        let f1 = f.eval(s, &part1);
        let f2 = f.eval(s, &part2);
        if f_whole > f1 + f2 + 1e-9 {
            return SubadditivityCheck {
                trials: trial + 1,
                passed: false,
                witness: Some((part1, part2, f_whole, f1, f2)),
            };
        }
    }
    SubadditivityCheck {
        trials,
        passed: true,
        witness: None,
    }
}

/// Outcome of the configuration-matched invariance probe. `passed` is `None`
/// when no matching pair was found (inconclusive).
#[derive(Clone, Debug, Serialize)]
pub struct InvarianceCheck {
    pub attempted: usize,
    pub conclusive_pairs: usize,
    pub passed: Option<bool>,
    pub witness: Option<(BoxRegion, Vec<f64>, f64, f64)>,
}

/// Compares `F(Q)` with `F(t + Q)` on pairs whose configurations match
/// exactly. Candidate translations are return vectors between locater-set
/// members of a mid-scale patch class, plus seeded differences of sample
/// points; every candidate pair is verified point-by-point before use.
pub fn check_invariance(f: &RegionFunction, s: &PointSample, trials: usize) -> InvarianceCheck {
    let mut rng = ChaCha8Rng::seed_from_u64(TRIAL_SEED ^ 0xa5a5);
    let window = s.window();
    let mut conclusive = 0usize;
    let mut attempted = 0usize;

    // Return vectors of a mid-scale class give translations that are likely
    // to match configurations; fall back to raw point differences.
    let r = (2.0 * s.mean_spacing()).max(window.min_side() / 32.0);
    let mut candidates: Vec<(Point, Vec<f64>)> = Vec::new();
    if let Ok(classes) = patterns::patch_classes(s, r, window) {
        for class in classes.iter().take(8) {
            let members = &class.members;
            for pair in members.windows(2).take(6) {
                let a = s.point(pair[0] as usize);
                let b = s.point(pair[1] as usize);
                candidates.push((a.clone(), b.offset_from(a)));
            }
        }
    }
    for _ in 0..trials {
        let i = rng.gen_range(0..s.len());
        let j = rng.gen_range(0..s.len());
        if i != j {
            let a = s.point(i);
            candidates.push((a.clone(), s.point(j).offset_from(a)));
        }
    }

    for (anchor, t) in candidates.into_iter().take(trials.max(8)) {
        attempted += 1;
        // A box around the anchor, small enough that both it and its
        // translate stay inside the window.
        let half = (r / 2.0).max(s.mean_spacing());
        let lo: Vec<f64> = anchor.coords().iter().map(|c| c - half).collect();
        let hi: Vec<f64> = anchor.coords().iter().map(|c| c + half).collect();
        let q = match BoxRegion::new(lo, hi) {
            Ok(b) => b,
            Err(_) => continue,
        };
        let q_t = q.translated(&t);
        if !window.contains_region(&q, 0.0) || !window.contains_region(&q_t, 0.0) {
            continue;
        }
        if !configurations_match(s, &q, &t) {
            continue;
        }
        conclusive += 1;
        let a = f.eval(s, &q);
        let b = f.eval(s, &q_t);
        if a != b {
            return InvarianceCheck {
                attempted,
                conclusive_pairs: conclusive,
                passed: Some(false),
                witness: Some((q, t, a, b)),
            };
        }
    }
    InvarianceCheck {
        attempted,
        conclusive_pairs: conclusive,
        passed: if conclusive == 0 { None } else { Some(true) },
    witness: None,
    }
}

/// Exact premise check: `t + (Q .. points) = (t + Q) .. points` within the
/// merge tolerance.
fn configurations_match(s: &PointSample, q: &BoxRegion, t: &[f64]) -> bool {
    let tol = crate::MERGE_TOL;
    let inside = s.indices_in_box(q.min(), q.max(), 0.0);
    let q_t = q.translated(t);
    let inside_t = s.indices_in_box(q_t.min(), q_t.max(), 0.0);
    if inside.len() != inside_t.len() {
        return false;
    }
    inside.iter().all(|&i| {
        let shifted: Vec<f64> = s
            .point(i as usize)
            .coords()
            .iter()
            .zip(t)
            .map(|(c, d)| c + d)
            .collect();
        s.has_point_within(&shifted, tol)
    })
}

fn random_box(rng: &mut ChaCha8Rng, window: &BoxRegion, min_side: f64) -> BoxRegion {
    let dim = window.dim();
    loop {
        let mut lo = Vec::with_capacity(dim);
        let mut hi = Vec::with_capacity(dim);
        for i in 0..dim {
            let a = rng.gen_range(window.min()[i]..window.max()[i]);
            let b = rng.gen_range(window.min()[i]..window.max()[i]);
            lo.push(a.min(b));
            hi.push(a.max(b));
        }
        if lo.iter().zip(&hi).all(|(a, b)| b - a >= min_side) {
            return BoxRegion::new(lo, hi).expect("positive sides");
        }
    }
}

/// Normalized values over window-centered cubes, with a tail-mean estimate
/// and a Cauchy diagnostic (max pairwise tail deviation).
#[derive(Clone, Debug, Serialize)]
pub struct LimitEstimate {
    pub entries: Vec<(f64, f64)>,
    pub estimate: f64,
    pub cauchy_deviation: f64,
    pub tail_fraction: f64,
}

/// `F(C) / |C|` at the window-centered cube of each ladder size; the
/// estimate is the mean over the tail, and the diagnostic exposes
/// non-convergence instead of masking it.
pub fn cube_limit(f: &RegionFunction, s: &PointSample, family: &CubeFamily) -> Result<LimitEstimate> {
    family.validate_for(s.window())?;
    let center = s.window().center();
    let entries: Vec<(f64, f64)> = family
        .sides()
        .iter()
        .map(|&side| {
            let cube = BoxRegion::cube(&center, side).expect("positive side");
            (side, f.eval(s, &cube) / cube.volume())
        })
        .collect();
    let tail = family.tail_len();
    let tail_entries = &entries[entries.len() - tail..];
    let estimate = tail_entries.iter().map(|e| e.1).sum::<f64>() / tail as f64;
    let mut cauchy: f64 = 0.0;
    for i in 0..tail_entries.len() {
        for j in (i + 1)..tail_entries.len() {
            cauchy = cauchy.max((tail_entries[i].1 - tail_entries[j].1).abs());
        }
    }
    Ok(LimitEstimate {
        entries,
        estimate,
        cauchy_deviation: cauchy,
        tail_fraction: family.tail_fraction(),
    })
}

/// Copies per unit volume over the cube family.
pub fn pattern_frequency(
    s: &PointSample,
    pattern: &BallPattern,
    family: &CubeFamily,
) -> Result<LimitEstimate> {
    let idx = pattern.validate(s)?;
    let patch = s.patch_by_index(idx, pattern.radius);
    let f = RegionFunction::new(
        format!("copies-r{}", pattern.radius),
        false,
        true,
        move |s, q| patterns::copies_of_patch(s, &patch, q) as f64,
    );
    cube_limit(&f, s, family)
}

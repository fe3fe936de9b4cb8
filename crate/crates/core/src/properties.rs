//! Repetitivity and repulsion constants over radius grids, the harmonic-sum
//! lower bound, the locater-cell inradius bound with its explicit constant,
//! and the cross-estimate consistency report.
//!
//! All constants here are empirical, finite-window quantities: they bound or
//! sample suprema/infima that the underlying definitions take over all
//! patterns of an infinite set. Reports state relations among the computed
//! estimates, never truth of the infinite-set properties.

use serde::Serialize;

use crate::densities::WeightEstimate;
use crate::geom::BoxRegion;
use crate::patterns::{self, BallPattern};
use crate::sample::PointSample;
use crate::voronoi::{self, UniformityEstimate};
use crate::{Error, Result};

/// Per-(radius, class) measurements entering the repetitivity and repulsion
/// constants.
#[derive(Clone, Debug, Serialize)]
pub struct ClassStat {
    pub radius: f64,
    pub representative: BallPattern,
    pub occurrences: usize,
    /// Covering radius of the locater set on a safely shrunk region.
    pub cov_radius: Option<f64>,
    /// Packing radius of the locater set.
    pub pack_radius: Option<f64>,
    /// cov_radius / radius.
    pub cov_ratio: Option<f64>,
    /// pack_radius / radius.
    pub pack_ratio: Option<f64>,
    /// Margin actually used for the covering measurement.
    pub cov_margin: Option<f64>,
}

/// Radius-grid sweep of locater-set covering and packing radii.
#[derive(Clone, Debug, Serialize)]
pub struct PropertyReport {
    /// max over (radius, class) of cov_radius(L) / radius.
    pub lr_constant: Option<f64>,
    /// min over (radius, class) of pack_radius(L) / radius.
    pub rp_constant: Option<f64>,
    pub per_class: Vec<ClassStat>,
    pub radius_grid: Vec<f64>,
    pub excluded_classes: usize,
}

/// Covering radius of the locater set, measured on the window shrunk by a
/// growing margin until the measurement is free of boundary censoring.
/// Starts at the class radius itself (the region where membership data is
/// complete) and doubles on contamination.
fn censored_covering(
    locater: &PointSample,
    window: &BoxRegion,
    radius: f64,
) -> Option<(f64, f64)> {
    let mut margin = radius;
    loop {
        let region = match window.shrink(margin) {
            Ok(r) => r,
            Err(_) => return None,
        };
        match locater.covering_radius(&region) {
            Ok(d) => return Some((d, margin)),
            Err(Error::BoundaryContamination(_)) => {
                margin *= 2.0;
            }
            Err(_) => return None,
        }
    }
}

/// Shared sweep for the repetitivity (covering) and repulsion (packing)
/// constants; both ratios are computed from the same locater sets.
pub fn repetitivity_sweep(s: &PointSample, radius_grid: &[f64]) -> Result<PropertyReport> {
    if radius_grid.is_empty() {
        return Err(Error::InvalidInput("radius grid is empty".into()));
    }
    let mut grid = radius_grid.to_vec();
    grid.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let mut per_class = Vec::new();
    let mut excluded = 0usize;
    for &r in &grid {
        let classes = match patterns::patch_classes(s, r, s.window()) {
            Ok(c) => c,
            Err(Error::InsufficientWindow(_)) => {
                excluded += 1;
                continue;
            }
            Err(e) => return Err(e),
        };
        for class in classes {
            let sub = s.subset(&class.members, format!("{}-r{r}", s.label()))?;
            let pack = sub.packing_radius().ok();
            let cov = censored_covering(&sub, s.window(), r);
            if pack.is_none() && cov.is_none() {
                excluded += 1;
            }
            per_class.push(ClassStat {
                radius: r,
                representative: class.representative.clone(),
                occurrences: class.count,
                cov_radius: cov.map(|(d, _)| d),
                pack_radius: pack,
                cov_ratio: cov.map(|(d, _)| d / r),
                pack_ratio: pack.map(|p| p / r),
                cov_margin: cov.map(|(_, m)| m),
            });
        }
    }
    let lr = per_class
        .iter()
        .filter_map(|c| c.cov_ratio)
        .fold(None, |acc: Option<f64>, v| Some(acc.map_or(v, |a| a.max(v))));
    let rp = per_class
        .iter()
        .filter_map(|c| c.pack_ratio)
        .fold(None, |acc: Option<f64>, v| Some(acc.map_or(v, |a| a.min(v))));
    if lr.is_none() && rp.is_none() {
        return Err(Error::InsufficientWindow(
            "every class was boundary-starved on this radius grid".into(),
        ));
    }
    Ok(PropertyReport {
        lr_constant: lr,
        rp_constant: rp,
        per_class,
        radius_grid: grid,
        excluded_classes: excluded,
    })
}

/// max over (radius >= 1, class) of cov_radius(locater) / radius.
pub fn lr_constant(s: &PointSample, radius_grid: &[f64]) -> Result<PropertyReport> {
    let grid: Vec<f64> = radius_grid.iter().copied().filter(|&r| r >= 1.0).collect();
    if grid.is_empty() {
        return Err(Error::InvalidInput("no grid radius reaches the floor of 1".into()));
    }
    repetitivity_sweep(s, &grid)
}

/// min over (radius, class) of pack_radius(locater) / radius. The underlying
/// infimum has no radius floor; the sweep starts at the smallest grid value.
pub fn rp_constant(s: &PointSample, radius_grid: &[f64]) -> Result<PropertyReport> {
    repetitivity_sweep(s, radius_grid)
}

/// Partial harmonic sum against its logarithmic lower bound.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct HarmonicBound {
    pub n: u64,
    pub m: u64,
    pub sum: f64,
    pub bound: f64,
    pub pass: bool,
}

/// sum_{k=n}^{m} 1/k >= ln((m+1)/n), for m > n >= 1.
pub fn harmonic_lower_bound(n: u64, m: u64) -> Result<HarmonicBound> {
    if n < 1 || m <= n {
        return Err(Error::InvalidInput(format!("need m > n >= 1, got n={n}, m={m}")));
    }
    let sum: f64 = (n..=m).map(|k| 1.0 / k as f64).sum();
    let bound = ((m as f64 + 1.0) / n as f64).ln();
    Ok(HarmonicBound {
        n,
        m,
        sum,
        bound,
        pass: sum >= bound,
    })
}

/// The explicit constant `max(2, 4 exp(6^N / (2 w N)))` bounding locater
/// cell inradii in units of the pattern radius.
pub fn inradius_bound_constant(dim: usize, w: f64) -> Result<f64> {
    if w <= 0.0 {
        return Err(Error::VacuousBound(w));
    }
    let n = dim as f64;
    Ok(2.0f64.max(4.0 * (6.0f64.powi(dim as i32) / (2.0 * w * n)).exp()))
}

/// Measured locater-cell inradii against the explicit bound.
#[derive(Clone, Debug, Serialize)]
pub struct InradiusBoundCheck {
    pub pattern: BallPattern,
    pub weight: f64,
    pub constant: f64,
    pub bound: f64,
    pub max_inradius: f64,
    pub interior_sites: usize,
    pub pass: bool,
}

/// Checks `r_in(V_x(L_P)) <= c R` over the interior cells of the pattern's
/// locater set, with `c` from [`inradius_bound_constant`] and `w` from a
/// weight sweep. Requires `R >= 3`.
pub fn inradius_bound_check(
    s: &PointSample,
    pattern: &BallPattern,
    w: f64,
) -> Result<InradiusBoundCheck> {
    if pattern.radius < 3.0 {
        return Err(Error::InvalidInput(format!(
            "inradius bound needs radius >= 3, got {}",
            pattern.radius
        )));
    }
    let constant = inradius_bound_constant(s.dim(), w)?;
    let locater = patterns::locater_set(s, pattern, s.window())?;
    if locater.member_indices.len() < 2 {
        return Err(Error::InsufficientWindow(
            "locater set too small for cell geometry".into(),
        ));
    }
    let sub = s.subset(&locater.member_indices, format!("{}-locater", s.label()))?;
    let report = voronoi::set_distortion(&sub)?;
    let max_inradius = report
        .per_site
        .iter()
        .map(|d| d.r_in)
        .fold(f64::NEG_INFINITY, f64::max);
    let bound = constant * pattern.radius;
    Ok(InradiusBoundCheck {
        pattern: pattern.clone(),
        weight: w,
        constant,
        bound,
        max_inradius,
        interior_sites: report.per_site.len(),
        pass: max_inradius <= bound,
    })
}

/// One qualitative cross-check row; `pass` is `None` when an input estimate
/// is absent.
#[derive(Clone, Debug, Serialize)]
pub struct VerdictRow {
    pub name: String,
    pub pass: Option<bool>,
    pub detail: String,
}

/// Side-by-side table of the estimates with qualitative cross-checks among
/// them.
#[derive(Clone, Debug, Serialize)]
pub struct ConsistencyVerdict {
    pub label: String,
    pub scope: String,
    pub lr_constant: Option<f64>,
    pub rp_constant: Option<f64>,
    pub weight: Option<f64>,
    pub quasiweight: Option<f64>,
    pub uniformity: Option<f64>,
    pub rows: Vec<VerdictRow>,
}

/// Precomputed component estimates feeding the verdict.
#[derive(Clone, Copy, Debug, Default)]
pub struct ConsistencyParts<'a> {
    pub repetitivity: Option<&'a PropertyReport>,
    pub weight: Option<&'a WeightEstimate>,
    pub quasiweight: Option<&'a WeightEstimate>,
    pub uniformity: Option<&'a UniformityEstimate>,
}

pub fn consistency_report(s: &PointSample, parts: ConsistencyParts<'_>) -> ConsistencyVerdict {
    let lr = parts.repetitivity.and_then(|r| r.lr_constant);
    let rp = parts.repetitivity.and_then(|r| r.rp_constant);
    let w = parts.weight.map(|w| w.value);
    let wp = parts.quasiweight.map(|w| w.value);
    let sigma = parts.uniformity.map(|u| u.value);
    let mut rows = Vec::new();

    rows.push(match (wp, w) {
        (Some(wp), Some(w)) => VerdictRow {
            name: "quasiweight_below_weight".into(),
            pass: Some(wp <= w + 1e-12),
            detail: format!("w' = {wp:.6} <= w = {w:.6} on shared grids"),
        },
        _ => VerdictRow {
            name: "quasiweight_below_weight".into(),
            pass: None,
            detail: "weight estimates absent".into(),
        },
    });

    rows.push(match (lr, wp, sigma) {
        (Some(lr), Some(wp), Some(sigma)) => VerdictRow {
            name: "bounded_repetitivity_comes_with_positive_weights_and_uniformity".into(),
            pass: Some(wp > 0.0 && sigma.is_finite()),
            detail: format!(
                "lr = {lr:.4} alongside w' = {wp:.6} (> 0 expected) and uniformity = {sigma:.4} (finite expected), all finite-window estimates"
            ),
        },
        _ => VerdictRow {
            name: "bounded_repetitivity_comes_with_positive_weights_and_uniformity".into(),
            pass: None,
            detail: "repetitivity, quasiweight or uniformity estimate absent".into(),
        },
    });

    // Covering bound: r_cov(L_P) <= c * sigma * R for sampled classes with
    // R >= 3, with c from the inradius-bound constant at the measured w.
    let cov_row = match (parts.repetitivity, w, sigma) {
        (Some(rep), Some(w), Some(sigma)) if w > 0.0 => {
            let c = inradius_bound_constant(s.dim(), w).expect("w > 0");
            let mut checked = 0usize;
            let mut worst: Option<(f64, f64)> = None;
            let mut pass = true;
            for class in rep.per_class.iter().filter(|c| c.radius >= 3.0) {
                if let Some(cov) = class.cov_radius {
                    checked += 1;
                    let bound = c * sigma * class.radius;
                    if cov > bound {
                        pass = false;
                    }
                    let ratio = cov / bound;
                    if worst.map_or(true, |(r, _)| ratio > r) {
                        worst = Some((ratio, class.radius));
                    }
                }
            }
            if checked == 0 {
                VerdictRow {
                    name: "locater_covering_within_sigma_bound".into(),
                    pass: None,
                    detail: "no classes with radius >= 3 were measurable".into(),
                }
            } else {
                let (ratio, at_r) = worst.unwrap();
                VerdictRow {
                    name: "locater_covering_within_sigma_bound".into(),
                    pass: Some(pass),
                    detail: format!(
                        "{checked} classes checked against c*sigma*R with c = {c:.4}, sigma = {sigma:.4}; worst ratio {ratio:.4} at R = {at_r}"
                    ),
                }
            }
        }
        _ => VerdictRow {
            name: "locater_covering_within_sigma_bound".into(),
            pass: None,
            detail: "needs the repetitivity sweep, a positive weight and a uniformity estimate".into(),
        },
    };
    rows.push(cov_row);

    ConsistencyVerdict {
        label: s.label().to_string(),
        scope: "empirical, finite-window estimates only".into(),
        lr_constant: lr,
        rp_constant: rp,
        weight: w,
        quasiweight: wp,
        uniformity: sigma,
        rows,
    }
}

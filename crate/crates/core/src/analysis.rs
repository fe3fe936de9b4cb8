//! Batch analysis: a configuration, a deterministic pipeline over the
//! individual operations, and a JSON report plus CSV convergence tables.
//!
//! Every number in the report is produced by exactly one operation; result
//! keys embed `module.operation` paths. Reports are byte-identical across
//! runs of the same input and configuration once timestamps are disabled.

use std::collections::BTreeSet;
use std::str::FromStr;
use std::sync::Mutex;

use serde::{Deserialize, Serialize};
use serde_json::{json, Map, Value};

use crate::densities::{self, CubeFamily, WeightKind};
use crate::ergodic::{self, RegionFunction};
use crate::patterns::{self};
use crate::properties::{self, ConsistencyParts};
use crate::sample::PointSample;
use crate::voronoi;
use crate::{Error, Result};

pub const SCHEMA_VERSION: &str = "delone-report-1";

/// The analyses the pipeline knows how to run, in report order.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AnalysisKind {
    Radii,
    Flc,
    Densities,
    Weights,
    Voronoi,
    Uniformity,
    Lr,
    Rp,
    InradiusBound,
    SetLimits,
    Frequencies,
    Consistency,
}

impl AnalysisKind {
    pub const ALL: [AnalysisKind; 12] = [
        AnalysisKind::Radii,
        AnalysisKind::Flc,
        AnalysisKind::Densities,
        AnalysisKind::Weights,
        AnalysisKind::Voronoi,
        AnalysisKind::Uniformity,
        AnalysisKind::Lr,
        AnalysisKind::Rp,
        AnalysisKind::InradiusBound,
        AnalysisKind::SetLimits,
        AnalysisKind::Frequencies,
        AnalysisKind::Consistency,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            AnalysisKind::Radii => "radii",
            AnalysisKind::Flc => "flc",
            AnalysisKind::Densities => "densities",
            AnalysisKind::Weights => "weights",
            AnalysisKind::Voronoi => "voronoi",
            AnalysisKind::Uniformity => "uniformity",
            AnalysisKind::Lr => "lr",
            AnalysisKind::Rp => "rp",
            AnalysisKind::InradiusBound => "inradius_bound",
            AnalysisKind::SetLimits => "set_limits",
            AnalysisKind::Frequencies => "frequencies",
            AnalysisKind::Consistency => "consistency",
        }
    }

    /// Analyses whose outputs this one consumes.
    pub fn prerequisites(&self) -> &'static [AnalysisKind] {
        match self {
            AnalysisKind::InradiusBound => &[AnalysisKind::Weights],
            AnalysisKind::Consistency => &[
                AnalysisKind::Lr,
                AnalysisKind::Rp,
                AnalysisKind::Weights,
                AnalysisKind::Uniformity,
            ],
            _ => &[],
        }
    }
}

impl FromStr for AnalysisKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        AnalysisKind::ALL
            .iter()
            .find(|k| k.name() == s)
            .copied()
            .ok_or_else(|| Error::InvalidInput(format!("unknown analysis '{s}'")))
    }
}

/// Pipeline configuration. Unset fields fall back to deterministic defaults
/// derived from the sample geometry.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(default)]
pub struct AnalysisConfig {
    /// Requested analyses; empty means all.
    pub analyses: BTreeSet<AnalysisKind>,
    pub radius_grid: Option<Vec<f64>>,
    /// (base, factor, count) of the cube ladder.
    pub cube_ladder: Option<(f64, f64, usize)>,
    /// Placement offsets as fractions of the cube side.
    pub placements: Vec<f64>,
    pub tol_patch: Option<f64>,
    pub tol_boundary: Option<f64>,
    pub workers: usize,
    pub timestamp: bool,
}

impl Default for AnalysisConfig {
    fn default() -> Self {
        AnalysisConfig {
            analyses: BTreeSet::new(),
            radius_grid: None,
            cube_ladder: None,
            placements: vec![-0.25, 0.0, 0.25],
            tol_patch: None,
            tol_boundary: None,
            workers: 1,
            timestamp: true,
        }
    }
}

impl AnalysisConfig {
    /// Requested set closed under prerequisites, in report order.
    pub fn effective_analyses(&self) -> Vec<AnalysisKind> {
        let mut set: BTreeSet<AnalysisKind> = if self.analyses.is_empty() {
            AnalysisKind::ALL.iter().copied().collect()
        } else {
            self.analyses.clone()
        };
        loop {
            let mut added = false;
            for kind in set.clone() {
                for pre in kind.prerequisites() {
                    added |= set.insert(*pre);
                }
            }
            if !added {
                break;
            }
        }
        AnalysisKind::ALL.iter().copied().filter(|k| set.contains(k)).collect()
    }

    /// Default geometric radius grid 1, 2, 4, ... capped at a tenth of the
    /// smallest window side.
    pub fn radius_grid_for(&self, s: &PointSample) -> Vec<f64> {
        if let Some(grid) = &self.radius_grid {
            let mut g = grid.clone();
            g.sort_by(|a, b| a.partial_cmp(b).unwrap());
            return g;
        }
        let cap = s.window().min_side() / 10.0;
        let mut grid = Vec::new();
        let mut r = 1.0;
        while r <= cap {
            grid.push(r);
            r *= 2.0;
        }
        grid
    }

    pub fn family_for(&self, s: &PointSample) -> Result<CubeFamily> {
        let (base, factor, count) = self.cube_ladder.unwrap_or_else(|| {
            (s.window().min_side() / 16.0, 2.0, 4)
        });
        Ok(CubeFamily::geometric(base, factor, count)?.with_offsets(self.placements.clone()))
    }
}

/// A named CSV convergence table emitted alongside the JSON report.
#[derive(Clone, Debug, Serialize)]
pub struct CsvTable {
    pub name: String,
    pub content: String,
}

#[derive(Debug)]
pub struct AnalysisOutcome {
    pub report: Value,
    pub tables: Vec<CsvTable>,
    pub completed: usize,
    pub skipped: Vec<(String, String)>,
}

impl AnalysisOutcome {
    pub fn to_json_pretty(&self) -> String {
        serde_json::to_string_pretty(&self.report).expect("report serializes")
    }
}

fn to_value<T: Serialize>(v: &T) -> Value {
    serde_json::to_value(v).expect("serializable")
}

/// Runs the requested analyses over the sample. Individual analyses that
/// cannot run on this window are recorded under `skipped` without aborting
/// the rest.
pub fn run_analysis(mut sample: PointSample, cfg: &AnalysisConfig) -> AnalysisOutcome {
    if let Some(tol) = cfg.tol_patch {
        sample.set_patch_tol(Some(tol));
    }
    if let Some(tol) = cfg.tol_boundary {
        sample.set_boundary_tol(tol);
    }
    let sample = sample;
    let kinds = cfg.effective_analyses();
    let radius_grid = cfg.radius_grid_for(&sample);
    let family = cfg.family_for(&sample);

    // Shared artifacts consumed by several analyses. Each failure is
    // recorded once under the owning analysis.
    let needs = |k: AnalysisKind| kinds.contains(&k);
    let repetitivity = if needs(AnalysisKind::Lr) || needs(AnalysisKind::Rp) || needs(AnalysisKind::Consistency)
    {
        Some(properties::repetitivity_sweep(&sample, &radius_grid))
    } else {
        None
    };
    let weights = if needs(AnalysisKind::Weights)
        || needs(AnalysisKind::InradiusBound)
        || needs(AnalysisKind::Consistency)
    {
        Some(family.as_ref().map_err(clone_err).and_then(|fam| {
            Ok((
                densities::weight_estimate(&sample, fam, &radius_grid, WeightKind::Copies)?,
                densities::weight_estimate(&sample, fam, &radius_grid, WeightKind::DisjointCopies)?,
            ))
        }))
    } else {
        None
    };
    let uniformity = if needs(AnalysisKind::Uniformity) || needs(AnalysisKind::Consistency) {
        Some(voronoi::uniformity_estimate(&sample, &radius_grid))
    } else {
        None
    };

    // Independent per-analysis jobs; results land in fixed slots so the
    // assembly order never depends on scheduling.
    type JobResult = Result<(Value, Vec<CsvTable>)>;
    let mut jobs: Vec<(AnalysisKind, Box<dyn FnOnce() -> JobResult + Send + '_>)> = Vec::new();
    for &kind in &kinds {
        let sample = &sample;
        let radius_grid = &radius_grid;
        let family = &family;
        let repetitivity = &repetitivity;
        let weights = &weights;
        let uniformity = &uniformity;
        let job: Box<dyn FnOnce() -> JobResult + Send> = match kind {
            AnalysisKind::Radii => Box::new(move || radii_analysis(sample)),
            AnalysisKind::Flc => Box::new(move || flc_analysis(sample, radius_grid)),
            AnalysisKind::Densities => Box::new(move || {
                densities_analysis(sample, radius_grid, family.as_ref().map_err(clone_err)?)
            }),
            AnalysisKind::Weights => Box::new(move || {
                let (w, wp) = weights
                    .as_ref()
                    .expect("weights computed")
                    .as_ref()
                    .map_err(clone_err)?;
                Ok((
                    json!({
                        "densities.weight_estimate.w": to_value(w),
                        "densities.weight_estimate.w_prime": to_value(wp),
                    }),
                    Vec::new(),
                ))
            }),
            AnalysisKind::Voronoi => Box::new(move || voronoi_analysis(sample)),
            AnalysisKind::Uniformity => Box::new(move || {
                let u = uniformity
                    .as_ref()
                    .expect("uniformity computed")
                    .as_ref()
                    .map_err(clone_err)?;
                Ok((json!({ "voronoi.uniformity_estimate": to_value(u) }), Vec::new()))
            }),
            AnalysisKind::Lr => Box::new(move || {
                let rep = repetitivity
                    .as_ref()
                    .expect("sweep computed")
                    .as_ref()
                    .map_err(clone_err)?;
                let table = repetitivity_table(rep);
                Ok((
                    json!({
                        "properties.lr_constant": rep.lr_constant,
                        "properties.lr_excluded_classes": rep.excluded_classes,
                    }),
                    vec![table],
                ))
            }),
            AnalysisKind::Rp => Box::new(move || {
                let rep = repetitivity
                    .as_ref()
                    .expect("sweep computed")
                    .as_ref()
                    .map_err(clone_err)?;
                Ok((
                    json!({ "properties.rp_constant": rep.rp_constant }),
                    Vec::new(),
                ))
            }),
            AnalysisKind::InradiusBound => Box::new(move || {
                let (w, _) = weights
                    .as_ref()
                    .expect("weights computed")
                    .as_ref()
                    .map_err(clone_err)?;
                inradius_analysis(sample, radius_grid, w.value)
            }),
            AnalysisKind::SetLimits => Box::new(move || {
                set_limits_analysis(sample, radius_grid, family.as_ref().map_err(clone_err)?)
            }),
            AnalysisKind::Frequencies => Box::new(move || {
                frequencies_analysis(sample, radius_grid, family.as_ref().map_err(clone_err)?)
            }),
            AnalysisKind::Consistency => Box::new(move || {
                let rep = repetitivity.as_ref().and_then(|r| r.as_ref().ok());
                let pair = weights.as_ref().and_then(|w| w.as_ref().ok());
                let uni = uniformity.as_ref().and_then(|u| u.as_ref().ok());
                if rep.is_none() && pair.is_none() && uni.is_none() {
                    return Err(Error::InsufficientWindow(
                        "no component estimates available".into(),
                    ));
                }
                let verdict = properties::consistency_report(
                    sample,
                    ConsistencyParts {
                        repetitivity: rep,
                        weight: pair.map(|(w, _)| w),
                        quasiweight: pair.map(|(_, wp)| wp),
                        uniformity: uni,
                    },
                );
                Ok((json!({ "properties.consistency_report": to_value(&verdict) }), Vec::new()))
            }),
        };
        jobs.push((kind, job));
    }

    let workers = cfg.workers.max(1);
    let n_jobs = jobs.len();
    let slots: Vec<Mutex<Option<(AnalysisKind, JobResult)>>> =
        (0..n_jobs).map(|_| Mutex::new(None)).collect();
    if workers <= 1 {
        for (slot, (kind, job)) in slots.iter().zip(jobs) {
            *slot.lock().unwrap() = Some((kind, job()));
        }
    } else {
        let queue = Mutex::new(jobs.into_iter().enumerate().collect::<Vec<_>>());
        std::thread::scope(|scope| {
            for _ in 0..workers.min(n_jobs) {
                scope.spawn(|| loop {
                    let next = queue.lock().unwrap().pop();
                    match next {
                        Some((i, (kind, job))) => {
                            *slots[i].lock().unwrap() = Some((kind, job()));
                        }
                        None => break,
                    }
                });
            }
        });
    }

    let mut results = Map::new();
    let mut skipped: Vec<(String, String)> = Vec::new();
    let mut tables = Vec::new();
    let mut completed = 0usize;
    for slot in slots {
        let (kind, outcome) = slot.into_inner().unwrap().expect("job ran");
        match outcome {
            Ok((value, mut t)) => {
                completed += 1;
                results.insert(kind.name().to_string(), value);
                tables.append(&mut t);
            }
            Err(e) => skipped.push((kind.name().to_string(), format!("skipped: {e}"))),
        }
    }

    let mut report = Map::new();
    report.insert("schema_version".into(), json!(SCHEMA_VERSION));
    report.insert(
        "sample".into(),
        json!({
            "label": sample.label(),
            "dim": sample.dim(),
            "point_count": sample.len(),
            "window": to_value(sample.window()),
        }),
    );
    report.insert(
        "config_echo".into(),
        json!({
            "analyses": kinds.iter().map(|k| k.name()).collect::<Vec<_>>(),
            "radius_grid": radius_grid,
            "cube_ladder_sides": family.as_ref().ok().map(|f| f.sides().to_vec()),
            "placements": cfg.placements,
            "tol_patch": sample.patch_tol(),
            "tol_boundary": sample.boundary_tol(),
            "workers": cfg.workers,
        }),
    );
    report.insert("results".into(), Value::Object(results));
    report.insert(
        "skipped".into(),
        json!(skipped
            .iter()
            .map(|(k, r)| json!({ "analysis": k, "reason": r }))
            .collect::<Vec<_>>()),
    );
    if cfg.timestamp {
        let now = std::time::SystemTime::now()
            .duration_since(std::time::UNIX_EPOCH)
            .map(|d| d.as_secs())
            .unwrap_or(0);
        report.insert("timestamp_unix".into(), json!(now));
    }
    AnalysisOutcome {
        report: Value::Object(report),
        tables,
        completed,
        skipped,
    }
}

fn clone_err(e: &Error) -> Error {
    Error::InvalidInput(e.to_string())
}

fn radii_analysis(s: &PointSample) -> Result<(Value, Vec<CsvTable>)> {
    let packing = s.packing_radius()?;
    let margin = s.window().min_side() / 10.0;
    let region = s.window().shrink(margin)?;
    let covering = s.covering_radius(&region)?;
    Ok((
        json!({
            "pointset.packing_radius": packing,
            "pointset.covering_radius": covering,
            "pointset.covering_region_margin": margin,
        }),
        Vec::new(),
    ))
}

fn flc_analysis(s: &PointSample, radius_grid: &[f64]) -> Result<(Value, Vec<CsvTable>)> {
    let mut census = Vec::new();
    for &r in radius_grid {
        census.push(json!({ "radius": r, "classes": s.flc_census(r)? }));
    }
    if census.is_empty() {
        return Err(Error::InsufficientWindow("empty radius grid".into()));
    }
    // Census at twice the covering radius, the scale at which a finite
    // class count certifies finite local complexity.
    let margin = s.window().min_side() / 10.0;
    let default_census = s
        .window()
        .shrink(margin)
        .and_then(|region| s.covering_radius(&region))
        .and_then(|cov| Ok((2.0 * cov, s.flc_census(2.0 * cov)?)))
        .ok();
    Ok((
        json!({
            "pointset.flc_census": census,
            "pointset.flc_census_at_twice_covering": default_census
                .map(|(r, n)| json!({ "radius": r, "classes": n })),
        }),
        Vec::new(),
    ))
}

fn densities_analysis(
    s: &PointSample,
    radius_grid: &[f64],
    family: &CubeFamily,
) -> Result<(Value, Vec<CsvTable>)> {
    let r = *radius_grid
        .first()
        .ok_or_else(|| Error::InsufficientWindow("empty radius grid".into()))?;
    let classes = patterns::patch_classes(s, r, s.window())?;
    let mut per_class = Vec::new();
    let mut tables = Vec::new();
    for (k, class) in classes.iter().enumerate() {
        let nu = densities::lower_density(s, &class.representative, family)?;
        let nu_prime = densities::lower_reduced_density(s, &class.representative, family)?;
        tables.push(density_table(format!("lower_density_r{r}_class{k}"), &nu));
        tables.push(density_table(
            format!("lower_reduced_density_r{r}_class{k}"),
            &nu_prime,
        ));
        per_class.push(json!({
            "class": k,
            "densities.lower_density": to_value(&nu),
            "densities.lower_reduced_density": to_value(&nu_prime),
        }));
    }
    Ok((
        json!({ "radius": r, "classes": per_class }),
        tables,
    ))
}

fn density_table(name: String, report: &densities::DensityReport) -> CsvTable {
    let mut content = String::from("side,placement_min_value,certified\n");
    for e in &report.entries {
        content.push_str(&format!("{},{},{}\n", e.side, e.value, e.certified));
    }
    CsvTable { name, content }
}

fn repetitivity_table(report: &properties::PropertyReport) -> CsvTable {
    let mut content =
        String::from("radius,occurrences,cov_radius,pack_radius,cov_ratio,pack_ratio\n");
    for c in &report.per_class {
        content.push_str(&format!(
            "{},{},{},{},{},{}\n",
            c.radius,
            c.occurrences,
            c.cov_radius.map(|v| v.to_string()).unwrap_or_default(),
            c.pack_radius.map(|v| v.to_string()).unwrap_or_default(),
            c.cov_ratio.map(|v| v.to_string()).unwrap_or_default(),
            c.pack_ratio.map(|v| v.to_string()).unwrap_or_default(),
        ));
    }
    CsvTable {
        name: "repetitivity_classes".into(),
        content,
    }
}

fn voronoi_analysis(s: &PointSample) -> Result<(Value, Vec<CsvTable>)> {
    let report = voronoi::set_distortion(s)?;
    let packing = s.packing_radius()?;
    // Finiteness ceiling from the sample radii, measured on a safe region.
    let margin = s.window().min_side() / 10.0;
    let ceiling = s
        .window()
        .shrink(margin)
        .and_then(|region| s.covering_radius(&region))
        .ok()
        .map(|cov| cov / packing);
    Ok((
        json!({
            "voronoi.set_distortion.max": report.max_distortion,
            "voronoi.set_distortion.argmax_site": report.argmax_site,
            "voronoi.set_distortion.interior_sites": report.per_site.len(),
            "voronoi.set_distortion.excluded_boundary_sites": report.excluded_boundary_sites,
            "voronoi.set_distortion.radius_ratio_ceiling": ceiling,
        }),
        Vec::new(),
    ))
}

fn inradius_analysis(
    s: &PointSample,
    radius_grid: &[f64],
    w: f64,
) -> Result<(Value, Vec<CsvTable>)> {
    let mut checks = Vec::new();
    for &r in radius_grid.iter().filter(|&&r| r >= 3.0) {
        let classes = patterns::patch_classes(s, r, s.window())?;
        for class in classes {
            match properties::inradius_bound_check(s, &class.representative, w) {
                Ok(check) => checks.push(to_value(&check)),
                Err(Error::InsufficientWindow(_)) => continue,
                Err(e) => return Err(e),
            }
        }
    }
    if checks.is_empty() {
        return Err(Error::InsufficientWindow(
            "no admissible patterns with radius >= 3".into(),
        ));
    }
    Ok((
        json!({ "properties.inradius_bound_check": checks }),
        Vec::new(),
    ))
}

fn set_limits_analysis(
    s: &PointSample,
    radius_grid: &[f64],
    family: &CubeFamily,
) -> Result<(Value, Vec<CsvTable>)> {
    let r = *radius_grid
        .first()
        .ok_or_else(|| Error::InsufficientWindow("empty radius grid".into()))?;
    let classes = patterns::patch_classes(s, r, s.window())?;
    let class = &classes[0];
    let idx = class.representative.validate(s)?;
    let patch = s.patch_by_index(idx, r);
    let neg_copies = RegionFunction::neg_copy_count(patch.clone());
    let scaled = RegionFunction::scaled_disjoint_count(patch);
    let limit = ergodic::cube_limit(&neg_copies, s, family)?;
    let scaled_limit = ergodic::cube_limit(&scaled, s, family)?;
    let sub = ergodic::check_subadditive(&neg_copies, s, 500);
    let sub_scaled = ergodic::check_subadditive(&scaled.negated(), s, 500);
    let inv = ergodic::check_invariance(&neg_copies, s, 200);
    let mut table = String::from("side,value\n");
    for (side, value) in &limit.entries {
        table.push_str(&format!("{side},{value}\n"));
    }
    Ok((
        json!({
            "ergodic.cube_limit.neg_copies": to_value(&limit),
            "ergodic.cube_limit.scaled_disjoint": to_value(&scaled_limit),
            "ergodic.check_subadditive.neg_copies_passed": sub.passed,
            "ergodic.check_subadditive.neg_scaled_disjoint_passed": sub_scaled.passed,
            "ergodic.check_invariance.neg_copies": to_value(&inv),
            "pattern_radius": r,
        }),
        vec![CsvTable {
            name: format!("cube_limit_neg_copies_r{r}"),
            content: table,
        }],
    ))
}

fn frequencies_analysis(
    s: &PointSample,
    radius_grid: &[f64],
    family: &CubeFamily,
) -> Result<(Value, Vec<CsvTable>)> {
    let r = *radius_grid
        .first()
        .ok_or_else(|| Error::InsufficientWindow("empty radius grid".into()))?;
    let classes = patterns::patch_classes(s, r, s.window())?;
    let mut rows = Vec::new();
    let mut tables = Vec::new();
    for (k, class) in classes.iter().enumerate() {
        let freq = ergodic::pattern_frequency(s, &class.representative, family)?;
        let mut table = String::from("side,value\n");
        for (side, value) in &freq.entries {
            table.push_str(&format!("{side},{value}\n"));
        }
        tables.push(CsvTable {
            name: format!("frequency_r{r}_class{k}"),
            content: table,
        });
        rows.push(json!({
            "class": k,
            "ergodic.pattern_frequency": to_value(&freq),
        }));
    }
    Ok((json!({ "radius": r, "classes": rows }), tables))
}

//! Browser bindings for the demo page: generate a sample, compute its
//! Voronoi cells with distortions, and sweep a density curve. All payloads
//! cross the boundary as JSON strings so the page needs no framework.

use serde::{Deserialize, Serialize};
use wasm_bindgen::prelude::*;

use delone::densities::{self, CubeFamily};
use delone::generators::{self, ChainSpec, DisplacementRule, GeneratorSpec};
use delone::geom::{BoxRegion, Point};
use delone::patterns;
use delone::voronoi;
use delone::{Error, PointSample, Result};

#[derive(Serialize, Deserialize)]
struct SampleDto {
    label: String,
    dim: usize,
    window: BoxRegion,
    points: Vec<Vec<f64>>,
}

impl SampleDto {
    fn from_sample(s: &PointSample) -> Self {
        SampleDto {
            label: s.label().to_string(),
            dim: s.dim(),
            window: s.window().clone(),
            points: s.points().iter().map(|p| p.coords().to_vec()).collect(),
        }
    }

    fn into_sample(self) -> Result<PointSample> {
        PointSample::new(
            self.dim,
            self.window,
            self.points.into_iter().map(Point).collect(),
            self.label,
        )
    }
}

fn spec_for(kind: &str, param: u32) -> Result<GeneratorSpec> {
    let spec = match kind {
        "lattice" => GeneratorSpec::Lattice {
            basis: vec![vec![1.0, 0.0], vec![0.0, 1.0]],
            window: BoxRegion::new(vec![0.0, 0.0], vec![param as f64, param as f64])?,
        },
        "perturbed" => GeneratorSpec::PerturbedLattice {
            alphabet: vec![vec![0.0, 0.0], vec![0.2, 0.1]],
            rule: DisplacementRule::Checkerboard,
            window: BoxRegion::new(vec![0.0, 0.0], vec![param as f64, param as f64])?,
        },
        "fib-product" => GeneratorSpec::ProductChain2d {
            x: ChainSpec::Fibonacci { depth: param.clamp(3, 13) },
            y: ChainSpec::Fibonacci { depth: param.clamp(3, 13) },
        },
        "fibonacci" => GeneratorSpec::FibonacciChain {
            depth: param.clamp(3, 20),
            origin: 0.0,
        },
        "sturmian" => GeneratorSpec::SturmianChain {
            quotients: vec![1, param.max(1) as u64],
            length: 400,
        },
        other => {
            return Err(Error::InvalidGenerator(format!(
                "unknown kind '{other}' (use lattice, perturbed, fib-product, fibonacci, sturmian)"
            )))
        }
    };
    Ok(spec)
}

fn generate_impl(kind: &str, param: u32) -> Result<String> {
    let sample = generators::generate(&spec_for(kind, param)?)?;
    Ok(serde_json::to_string(&SampleDto::from_sample(&sample)).expect("serializable"))
}

#[derive(Serialize)]
struct CellDto {
    site: Vec<f64>,
    vertices: Vec<Vec<f64>>,
    r_in: f64,
    r_out: f64,
    distortion: f64,
}

#[derive(Serialize)]
struct CellsDto {
    cells: Vec<CellDto>,
    excluded_boundary_sites: usize,
    max_distortion: f64,
}

fn voronoi_impl(sample_json: &str) -> Result<String> {
    let dto: SampleDto = serde_json::from_str(sample_json)
        .map_err(|e| Error::InvalidInput(format!("bad sample JSON: {e}")))?;
    let sample = dto.into_sample()?;
    let mut cells = Vec::new();
    let mut excluded = 0usize;
    for idx in 0..sample.len() {
        match voronoi::voronoi_cell(&sample, sample.point(idx)) {
            Ok(cell) => {
                let site = cell.site.coords().to_vec();
                let mut vertices: Vec<Vec<f64>> =
                    cell.vertices.iter().map(|v| v.coords().to_vec()).collect();
                if sample.dim() == 2 {
                    // Order polygon vertices around the site for rendering.
                    vertices.sort_by(|a, b| {
                        let aa = (a[1] - site[1]).atan2(a[0] - site[0]);
                        let bb = (b[1] - site[1]).atan2(b[0] - site[0]);
                        aa.partial_cmp(&bb).unwrap()
                    });
                }
                cells.push(CellDto {
                    site,
                    vertices,
                    r_in: cell.r_in,
                    r_out: cell.r_out,
                    distortion: cell.distortion(),
                });
            }
            Err(Error::BoundarySite(_)) => excluded += 1,
            Err(e) => return Err(e),
        }
    }
    let max_distortion = cells.iter().map(|c| c.distortion).fold(f64::NAN, f64::max);
    Ok(serde_json::to_string(&CellsDto {
        cells,
        excluded_boundary_sites: excluded,
        max_distortion,
    })
    .expect("serializable"))
}

#[derive(Serialize)]
struct CurveDto {
    sides: Vec<f64>,
    values: Vec<f64>,
    estimate: f64,
    certified: bool,
    pattern_center: Vec<f64>,
    radius: f64,
}

fn density_curve_impl(sample_json: &str, radius: f64, reduced: bool) -> Result<String> {
    let dto: SampleDto = serde_json::from_str(sample_json)
        .map_err(|e| Error::InvalidInput(format!("bad sample JSON: {e}")))?;
    let sample = dto.into_sample()?;
    let classes = patterns::patch_classes(&sample, radius, sample.window())?;
    let pattern = &classes[0].representative;
    let base = sample.window().min_side() / 16.0;
    let family = CubeFamily::geometric(base, 2.0, 4)?;
    let report = if reduced {
        densities::lower_reduced_density(&sample, pattern, &family)?
    } else {
        densities::lower_density(&sample, pattern, &family)?
    };
    Ok(serde_json::to_string(&CurveDto {
        sides: report.entries.iter().map(|e| e.side).collect(),
        values: report.entries.iter().map(|e| e.value).collect(),
        estimate: report.estimate,
        certified: report.certified,
        pattern_center: pattern.center.coords().to_vec(),
        radius,
    })
    .expect("serializable"))
}

fn js_err(e: Error) -> JsValue {
    JsValue::from_str(&e.to_string())
}

/// Generate a sample; returns `{label, dim, window:{min,max}, points}`.
#[wasm_bindgen]
pub fn generate_sample(kind: &str, param: u32) -> std::result::Result<String, JsValue> {
    generate_impl(kind, param).map_err(js_err)
}

/// Interior Voronoi cells with per-cell inradius, outradius and distortion.
#[wasm_bindgen]
pub fn voronoi_cells(sample_json: &str) -> std::result::Result<String, JsValue> {
    voronoi_impl(sample_json).map_err(js_err)
}

/// Lower (or lower reduced) density curve of the first patch class at the
/// given radius, over a geometric ladder of placed cubes.
#[wasm_bindgen]
pub fn density_curve(
    sample_json: &str,
    radius: f64,
    reduced: bool,
) -> std::result::Result<String, JsValue> {
    density_curve_impl(sample_json, radius, reduced).map_err(js_err)
}

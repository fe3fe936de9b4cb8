//! `delone` — generate point-set windows, analyze them, and compare reports.
//!
//! Exit codes: 0 on success, 2 on usage or parameter errors, 3 when an
//! analyze run completed nothing.

use std::collections::BTreeSet;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use delone::analysis::{AnalysisConfig, AnalysisKind};
use delone::generators::{self, ChainSpec, DisplacementRule, GeneratorSpec};
use delone::geom::BoxRegion;
use delone::{io, Error};

#[derive(Parser)]
#[command(name = "delone", version, about = "Finite windows of Delone point sets: generation and analysis")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Write a generated sample as a DELONE v1 file.
    Generate {
        #[command(subcommand)]
        kind: GenerateKind,
    },
    /// Run analyses over a DELONE v1 file and emit a JSON report plus CSV
    /// convergence tables.
    Analyze(AnalyzeArgs),
    /// Compare estimates across report files, as text and CSV.
    Report(ReportArgs),
}

#[derive(Subcommand)]
enum GenerateKind {
    /// Integer or custom-basis lattice points in a cube window.
    Lattice {
        #[arg(long, default_value_t = 2)]
        dim: usize,
        /// Window side; the window is the cube with this side at the origin.
        #[arg(long, default_value_t = 50.0)]
        side: f64,
        /// Basis vectors as "b11,b12;b21,b22"; identity when omitted.
        #[arg(long)]
        basis: Option<String>,
        #[arg(short, long)]
        output: PathBuf,
    },
    /// Substitution chain with long/short tiles.
    Fibonacci {
        #[arg(long)]
        depth: u32,
        #[arg(long, default_value_t = 0.0)]
        origin: f64,
        #[arg(short, long)]
        output: PathBuf,
    },
    /// Rotation-coded chain with gaps 1 and 2.
    Sturmian {
        /// Partial quotients, cycled, e.g. "1,100".
        #[arg(long, value_delimiter = ',')]
        quotients: Vec<u64>,
        #[arg(long)]
        length: usize,
        #[arg(short, long)]
        output: PathBuf,
    },
    /// Cartesian product of two 1-D chains.
    Product {
        /// Chain spec: fibonacci:<depth>, sturmian:<q,..>:<len>, integers:<count>.
        #[arg(long)]
        x: String,
        #[arg(long)]
        y: String,
        #[arg(short, long)]
        output: PathBuf,
    },
    /// Integer lattice displaced by a finite alphabet under a coloring rule.
    Perturbed {
        #[arg(long, default_value_t = 2)]
        dim: usize,
        #[arg(long, default_value_t = 50.0)]
        side: f64,
        /// Displacements as "dx,dy;dx,dy;...".
        #[arg(long)]
        alphabet: String,
        /// "checkerboard" or "stripes:<axis>".
        #[arg(long, default_value = "checkerboard")]
        rule: String,
        #[arg(short, long)]
        output: PathBuf,
    },
}

#[derive(Args)]
struct AnalyzeArgs {
    input: PathBuf,
    /// JSON file with an AnalysisConfig; flags override its fields.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Comma-separated analysis names; default is all.
    #[arg(long, value_delimiter = ',')]
    analyses: Vec<String>,
    #[arg(long = "radius-grid", value_delimiter = ',')]
    radius_grid: Option<Vec<f64>>,
    /// base,factor,count
    #[arg(long = "cube-ladder", value_delimiter = ',')]
    cube_ladder: Option<Vec<f64>>,
    /// Placement offsets as fractions of the cube side.
    #[arg(long, value_delimiter = ',')]
    placements: Option<Vec<f64>>,
    #[arg(long = "tol-patch")]
    tol_patch: Option<f64>,
    #[arg(long = "tol-boundary")]
    tol_boundary: Option<f64>,
    #[arg(long)]
    workers: Option<usize>,
    /// Omit the timestamp so repeated runs are byte-identical.
    #[arg(long = "no-timestamp")]
    no_timestamp: bool,
    /// Output directory for report.json and CSV tables.
    #[arg(short, long)]
    output: PathBuf,
}

#[derive(Args)]
struct ReportArgs {
    /// Report JSON files produced by `analyze`.
    #[arg(required = true)]
    reports: Vec<PathBuf>,
    /// Optional CSV output path.
    #[arg(short, long)]
    output: Option<PathBuf>,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}

fn run(cli: Cli) -> Result<ExitCode, Box<dyn std::error::Error>> {
    match cli.command {
        Command::Generate { kind } => {
            let (spec, output) = build_spec(kind)?;
            let sample = generators::generate(&spec)?;
            io::write_sample(&sample, &output)?;
            eprintln!(
                "wrote {} points (dim {}) to {}",
                sample.len(),
                sample.dim(),
                output.display()
            );
            Ok(ExitCode::SUCCESS)
        }
        Command::Analyze(args) => analyze(args),
        Command::Report(args) => report(args),
    }
}

fn build_spec(kind: GenerateKind) -> Result<(GeneratorSpec, PathBuf), Error> {
    match kind {
        GenerateKind::Lattice {
            dim,
            side,
            basis,
            output,
        } => {
            let window = BoxRegion::new(vec![0.0; dim], vec![side; dim])?;
            let basis = match basis {
                Some(text) => parse_vectors(&text, dim)?,
                None => (0..dim)
                    .map(|i| (0..dim).map(|j| if i == j { 1.0 } else { 0.0 }).collect())
                    .collect(),
            };
            Ok((GeneratorSpec::Lattice { basis, window }, output))
        }
        GenerateKind::Fibonacci { depth, origin, output } => {
            Ok((GeneratorSpec::FibonacciChain { depth, origin }, output))
        }
        GenerateKind::Sturmian {
            quotients,
            length,
            output,
        } => Ok((GeneratorSpec::SturmianChain { quotients, length }, output)),
        GenerateKind::Product { x, y, output } => Ok((
            GeneratorSpec::ProductChain2d {
                x: parse_chain(&x)?,
                y: parse_chain(&y)?,
            },
            output,
        )),
        GenerateKind::Perturbed {
            dim,
            side,
            alphabet,
            rule,
            output,
        } => {
            let window = BoxRegion::new(vec![0.0; dim], vec![side; dim])?;
            let alphabet = parse_vectors(&alphabet, dim)?;
            let rule = parse_rule(&rule)?;
            Ok((
                GeneratorSpec::PerturbedLattice {
                    alphabet,
                    rule,
                    window,
                },
                output,
            ))
        }
    }
}

fn parse_vectors(text: &str, dim: usize) -> Result<Vec<Vec<f64>>, Error> {
    text.split(';')
        .map(|group| {
            let v: Result<Vec<f64>, Error> = group
                .split(',')
                .map(|tok| {
                    tok.trim()
                        .parse::<f64>()
                        .map_err(|_| Error::InvalidInput(format!("'{tok}' is not a number")))
                })
                .collect();
            let v = v?;
            if v.len() != dim {
                return Err(Error::InvalidInput(format!(
                    "vector '{group}' has {} coordinates, expected {dim}",
                    v.len()
                )));
            }
            Ok(v)
        })
        .collect()
}

fn parse_chain(text: &str) -> Result<ChainSpec, Error> {
    let mut parts = text.split(':');
    let kind = parts.next().unwrap_or_default();
    match kind {
        "fibonacci" => {
            let depth = parts
                .next()
                .and_then(|v| v.parse().ok())
                .ok_or_else(|| Error::InvalidInput(format!("bad chain spec '{text}'")))?;
            Ok(ChainSpec::Fibonacci { depth })
        }
        "integers" => {
            let count = parts
                .next()
                .and_then(|v| v.parse().ok())
                .ok_or_else(|| Error::InvalidInput(format!("bad chain spec '{text}'")))?;
            Ok(ChainSpec::Integers { count })
        }
        "sturmian" => {
            let quotients: Option<Vec<u64>> = parts
                .next()
                .map(|q| q.split(',').map(|t| t.parse().ok()).collect::<Option<Vec<u64>>>())
                .flatten();
            let length = parts.next().and_then(|v| v.parse().ok());
            match (quotients, length) {
                (Some(quotients), Some(length)) => Ok(ChainSpec::Sturmian { quotients, length }),
                _ => Err(Error::InvalidInput(format!("bad chain spec '{text}'"))),
            }
        }
        _ => Err(Error::InvalidInput(format!(
            "unknown chain kind '{kind}' (use fibonacci:<depth>, sturmian:<q,..>:<len>, integers:<count>)"
        ))),
    }
}

fn parse_rule(text: &str) -> Result<DisplacementRule, Error> {
    if text == "checkerboard" {
        return Ok(DisplacementRule::Checkerboard);
    }
    if let Some(axis) = text.strip_prefix("stripes:") {
        let axis = axis
            .parse()
            .map_err(|_| Error::InvalidInput(format!("bad stripe axis in '{text}'")))?;
        return Ok(DisplacementRule::Stripes { axis });
    }
    Err(Error::InvalidInput(format!("unknown rule '{text}'")))
}

fn analyze(args: AnalyzeArgs) -> Result<ExitCode, Box<dyn std::error::Error>> {
    let sample = io::load_sample(&args.input)?;
    let mut cfg: AnalysisConfig = match &args.config {
        Some(path) => serde_json::from_str(&std::fs::read_to_string(path)?)?,
        None => AnalysisConfig::default(),
    };
    if !args.analyses.is_empty() {
        let mut set = BTreeSet::new();
        for name in &args.analyses {
            set.insert(name.parse::<AnalysisKind>()?);
        }
        cfg.analyses = set;
    }
    if let Some(grid) = args.radius_grid {
        cfg.radius_grid = Some(grid);
    }
    if let Some(ladder) = args.cube_ladder {
        if ladder.len() != 3 {
            return Err(Box::new(Error::InvalidInput(
                "--cube-ladder takes base,factor,count".into(),
            )));
        }
        cfg.cube_ladder = Some((ladder[0], ladder[1], ladder[2] as usize));
    }
    if let Some(placements) = args.placements {
        cfg.placements = placements;
    }
    if args.tol_patch.is_some() {
        cfg.tol_patch = args.tol_patch;
    }
    if args.tol_boundary.is_some() {
        cfg.tol_boundary = args.tol_boundary;
    }
    if let Some(workers) = args.workers {
        cfg.workers = workers.max(1);
    }
    if args.no_timestamp {
        cfg.timestamp = false;
    }

    let outcome = delone::analysis::run_analysis(sample, &cfg);
    std::fs::create_dir_all(&args.output)?;
    let report_path = args.output.join("report.json");
    std::fs::write(&report_path, outcome.to_json_pretty())?;
    let table_dir = args.output.join("tables");
    if !outcome.tables.is_empty() {
        std::fs::create_dir_all(&table_dir)?;
        for table in &outcome.tables {
            std::fs::write(table_dir.join(format!("{}.csv", table.name)), &table.content)?;
        }
    }
    for (analysis, reason) in &outcome.skipped {
        eprintln!("{analysis}: {reason}");
    }
    eprintln!(
        "completed {} analyses ({} skipped); report at {}",
        outcome.completed,
        outcome.skipped.len(),
        report_path.display()
    );
    if outcome.completed == 0 {
        return Ok(ExitCode::from(3));
    }
    Ok(ExitCode::SUCCESS)
}

fn report(args: ReportArgs) -> Result<ExitCode, Box<dyn std::error::Error>> {
    let mut columns: Vec<(String, std::collections::BTreeMap<String, String>)> = Vec::new();
    for path in &args.reports {
        let doc: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(path)?)?;
        let version = doc["schema_version"].as_str().unwrap_or_default();
        if version != delone::analysis::SCHEMA_VERSION {
            return Err(Box::new(Error::SchemaMismatch {
                expected: delone::analysis::SCHEMA_VERSION.into(),
                found: version.into(),
            }));
        }
        let label = doc["sample"]["label"].as_str().unwrap_or("?").to_string();
        let mut flat = std::collections::BTreeMap::new();
        flatten_scalars("", &doc["results"], &mut flat);
        columns.push((label_for(path, &label), flat));
    }
    let mut keys: BTreeSet<String> = BTreeSet::new();
    for (_, flat) in &columns {
        keys.extend(flat.keys().cloned());
    }
    let mut csv = String::from("metric");
    for (label, _) in &columns {
        csv.push(',');
        csv.push_str(label);
    }
    csv.push('\n');
    let width = keys.iter().map(|k| k.len()).max().unwrap_or(6).min(72);
    let mut text = format!("{:width$}", "metric");
    for (label, _) in &columns {
        text.push_str(&format!("  {label:>20}"));
    }
    text.push('\n');
    for key in &keys {
        csv.push_str(key);
        text.push_str(&format!("{key:width$}"));
        for (_, flat) in &columns {
            let value = flat.get(key).cloned().unwrap_or_default();
            csv.push(',');
            csv.push_str(&value);
            text.push_str(&format!("  {value:>20}"));
        }
        csv.push('\n');
        text.push('\n');
    }
    // Tolerate a closed pipe (e.g. `delone report ... | head`).
    use std::io::Write;
    if let Err(e) = std::io::stdout().write_all(text.as_bytes()) {
        if e.kind() != std::io::ErrorKind::BrokenPipe {
            return Err(Box::new(e));
        }
    }
    if let Some(out) = &args.output {
        std::fs::write(out, csv)?;
    }
    Ok(ExitCode::SUCCESS)
}

fn label_for(path: &Path, label: &str) -> String {
    if label.is_empty() || label == "?" {
        path.display().to_string()
    } else {
        label.to_string()
    }
}

/// Collect scalar leaves (numbers, booleans) of the results object into
/// dotted paths; arrays are skipped (per-size tables live in the CSVs).
fn flatten_scalars(
    prefix: &str,
    value: &serde_json::Value,
    out: &mut std::collections::BTreeMap<String, String>,
) {
    match value {
        serde_json::Value::Object(map) => {
            for (k, v) in map {
                let key = if prefix.is_empty() {
                    k.clone()
                } else {
                    format!("{prefix}.{k}")
                };
                flatten_scalars(&key, v, out);
            }
        }
        serde_json::Value::Number(n) => {
            out.insert(prefix.to_string(), n.to_string());
        }
        serde_json::Value::Bool(b) => {
            out.insert(prefix.to_string(), b.to_string());
        }
        _ => {}
    }
}

//! Command-line interface: single runs, sweeps, stationarity verification,
//! boundary dumps and plateau reports.

use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{anyhow, bail, Context, Result};
use clap::{Args, Parser, Subcommand};

use crouzeix::harness::{
    emit_figure_csv, emit_figure_svg, emit_sorted_values_csv, emit_sorted_values_svg, format_report,
    run_seed, ConfigFigure,
};
use crouzeix::ratio::evaluate;
use crouzeix::stationarity::stationarity_report;
use crouzeix::{
    build_boundary, unpack, BoundaryOptions, CMat, FieldMode, ParameterLayout, ParameterVector,
    RunRecord, SweepConfig,
};

#[derive(Parser)]
#[command(
    name = "crouzeix",
    about = "Minimize the Crouzeix ratio over structured matrix/polynomial pairs",
    long_about = "Minimizes the Crouzeix ratio f(p,A) = ||p||_W(A) / ||p(A)||_2 over real upper \
                  Hessenberg or complex upper triangular matrices A and polynomials p, using \
                  full-memory BFGS with a weak Armijo-Wolfe line search. Verifies approximate \
                  nonsmooth stationarity of computed minimizers via the min-norm point of the \
                  approximate subdifferential. Polynomial coefficients are ascending: c0 first."
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one minimization from a random (or saved) starting point.
    Minimize(MinimizeArgs),
    /// Run a random-restart sweep and write records, sorted values and
    /// plateau summaries.
    Sweep(SweepArgs),
    /// Recompute the stationarity report of a saved run record.
    Verify(VerifyArgs),
    /// Dump the field-of-values boundary of a matrix as CSV.
    Fov(FovArgs),
    /// Summarize plateaus from a directory of run records.
    Report(ReportArgs),
}

#[derive(Args, Clone)]
struct ConfigOverrides {
    /// TOML or JSON sweep configuration file.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Matrix order.
    #[arg(long)]
    n: Option<usize>,
    /// Maximal polynomial degree.
    #[arg(long)]
    m: Option<usize>,
    /// Field: real (Hessenberg) or complex (triangular).
    #[arg(long)]
    field: Option<String>,
    /// Heavy-tail exponent alpha.
    #[arg(long)]
    alpha: Option<f64>,
    /// Number of runs.
    #[arg(long)]
    runs: Option<usize>,
    /// Base seed; run i is seeded by hash(seed, i).
    #[arg(long)]
    seed: Option<u64>,
    /// Z_eps threshold for stationarity reports.
    #[arg(long)]
    eps: Option<f64>,
    /// Gradient-norm stopping tolerance.
    #[arg(long)]
    normtol: Option<f64>,
    /// Worker threads (0 = all cores).
    #[arg(long)]
    workers: Option<usize>,
    /// Output directory.
    #[arg(long)]
    outdir: Option<PathBuf>,
}

impl ConfigOverrides {
    fn resolve(&self) -> Result<SweepConfig> {
        let mut cfg = match &self.config {
            Some(path) => load_config(path)?,
            None => SweepConfig::default(),
        };
        if let Some(n) = self.n {
            cfg.n = n;
        }
        if let Some(m) = self.m {
            cfg.m = m;
        }
        if let Some(field) = &self.field {
            cfg.field_mode = parse_field(field)?;
        }
        if let Some(alpha) = self.alpha {
            cfg.alpha = alpha;
        }
        if let Some(runs) = self.runs {
            cfg.run_count = runs;
        }
        if let Some(seed) = self.seed {
            cfg.base_seed = seed;
        }
        if let Some(eps) = self.eps {
            cfg.epsilon = eps;
        }
        if let Some(normtol) = self.normtol {
            cfg.optimizer.normtol = normtol;
        }
        if let Some(workers) = self.workers {
            cfg.workers = workers;
        }
        if let Some(outdir) = &self.outdir {
            cfg.outdir = Some(outdir.clone());
        }
        cfg.validate().map_err(|e| anyhow!(e.to_string()))?;
        Ok(cfg)
    }
}

#[derive(Args)]
struct MinimizeArgs {
    #[command(flatten)]
    overrides: ConfigOverrides,
    /// Start from a saved point or run record (JSON) instead of a random
    /// initialization.
    #[arg(long)]
    start: Option<PathBuf>,
    /// Run index used for seeding the random start (default 0).
    #[arg(long, default_value_t = 0)]
    index: usize,
    /// Write the final configuration figure layers as CSV.
    #[arg(long)]
    figure: Option<PathBuf>,
    /// Also render the figure as SVG.
    #[arg(long)]
    svg: Option<PathBuf>,
}

#[derive(Args)]
struct SweepArgs {
    #[command(flatten)]
    overrides: ConfigOverrides,
    /// Emit per-plateau representative figures into the output directory.
    #[arg(long)]
    figures: bool,
}

#[derive(Args)]
struct VerifyArgs {
    /// Saved run record (JSON).
    #[arg(long)]
    record: PathBuf,
    /// Z_eps threshold.
    #[arg(long, default_value_t = 1e-4)]
    eps: f64,
    /// Append the report to this file instead of printing only.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct FovArgs {
    /// Matrix JSON: {"entries": [[...], ...]} with entries either numbers
    /// or [re, im] pairs.
    #[arg(long)]
    matrix: PathBuf,
    /// real or complex sweep domain.
    #[arg(long, default_value = "complex")]
    mode: String,
    /// Output CSV (theta, Re z, Im z, gap).
    #[arg(long)]
    out: PathBuf,
    /// Boundary samples per full turn.
    #[arg(long, default_value_t = 1024)]
    samples: usize,
}

#[derive(Args)]
struct ReportArgs {
    /// Directory of run_*.json records.
    #[arg(long)]
    dir: PathBuf,
    /// Plateau clustering tolerance.
    #[arg(long, default_value_t = 1e-4)]
    plateau_tol: f64,
}

fn parse_field(s: &str) -> Result<FieldMode> {
    match s.to_ascii_lowercase().as_str() {
        "real" | "r" => Ok(FieldMode::Real),
        "complex" | "c" => Ok(FieldMode::Complex),
        other => bail!("unknown field '{other}' (expected real or complex)"),
    }
}

fn load_config(path: &Path) -> Result<SweepConfig> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let cfg = match path.extension().and_then(|e| e.to_str()) {
        Some("json") => serde_json::from_str(&text).context("parsing JSON config")?,
        _ => toml::from_str(&text).context("parsing TOML config")?,
    };
    Ok(cfg)
}

fn main() -> Result<()> {
    let cli = Cli::parse();
    match cli.command {
        Command::Minimize(args) => cmd_minimize(args),
        Command::Sweep(args) => cmd_sweep(args),
        Command::Verify(args) => cmd_verify(args),
        Command::Fov(args) => cmd_fov(args),
        Command::Report(args) => cmd_report(args),
    }
}

fn cmd_minimize(args: MinimizeArgs) -> Result<()> {
    let mut cfg = args.overrides.resolve()?;
    let record = match &args.start {
        Some(path) => {
            let (layout, params) = load_point(path)?;
            cfg.n = layout.n;
            cfg.m = layout.m;
            cfg.field_mode = layout.field_mode;
            run_from_params(&cfg, &params)?
        }
        None => crouzeix::run_single(&cfg, args.index),
    };
    println!("{}", serde_json::to_string_pretty(&record)?);
    if let Some(dir) = &cfg.outdir {
        fs::create_dir_all(dir)?;
        let path = dir.join(format!("run_{:04}.json", record.run_index));
        fs::write(&path, serde_json::to_string_pretty(&record)?)?;
        eprintln!("wrote {}", path.display());
    }
    if args.figure.is_some() || args.svg.is_some() {
        let layout = ParameterLayout::new(record.n, record.m, record.field_mode);
        let pv = ParameterVector::new(layout, record.final_params.clone())
            .map_err(|e| anyhow!(e.to_string()))?;
        let pt = unpack(&pv).map_err(|e| anyhow!(e.to_string()))?;
        let fig = ConfigFigure::from_point(&pt, cfg.epsilon, &cfg.report)
            .map_err(|e| anyhow!(e.to_string()))?;
        if let Some(path) = &args.figure {
            emit_figure_csv(&fig, path).map_err(|e| anyhow!(e.to_string()))?;
            eprintln!("wrote {}", path.display());
        }
        if let Some(path) = &args.svg {
            emit_figure_svg(&fig, path).map_err(|e| anyhow!(e.to_string()))?;
            eprintln!("wrote {}", path.display());
        }
    }
    Ok(())
}

/// Minimize starting from explicit packed parameters (used by --start).
fn run_from_params(cfg: &SweepConfig, params: &[f64]) -> Result<RunRecord> {
    use crouzeix::bfgs::minimize;
    use crouzeix::ratio::RatioOracle;
    let layout = ParameterLayout::new(cfg.n, cfg.m, cfg.field_mode);
    let oracle = RatioOracle::new(layout, cfg.oracle.clone());
    let trace = minimize(|x| oracle.eval(x), params, &cfg.optimizer)
        .map_err(|e| anyhow!(e.to_string()))?;
    let pv = ParameterVector::new(layout, trace.final_x.clone()).map_err(|e| anyhow!(e.to_string()))?;
    let pt = unpack(&pv).map_err(|e| anyhow!(e.to_string()))?;
    let eval = evaluate(&pt, &cfg.report).map_err(|e| anyhow!(e.to_string()))?;
    let st = stationarity_report(&pt, cfg.epsilon, &cfg.report).map_err(|e| anyhow!(e.to_string()))?;
    let b = build_boundary(&pt.a, pt.field_mode, &cfg.report.boundary)
        .map_err(|e| anyhow!(e.to_string()))?;
    let class = crouzeix::harness::classify(eval.f, &b, &eval.attainment);
    Ok(RunRecord {
        schema_version: crouzeix::harness::RECORD_SCHEMA_VERSION,
        run_index: 0,
        seed: run_seed(cfg.base_seed, 0),
        n: cfg.n,
        m: cfg.m,
        field_mode: cfg.field_mode,
        numerator: Some(eval.numerator),
        denominator: Some(eval.denominator),
        f: Some(eval.f),
        termination: Some(trace.termination),
        iterations: trace.iterations,
        z_count: if st.forgo { None } else { Some(st.z_count) },
        d_norm: st.d_norm(),
        forgo: st.forgo,
        classification: Some(class),
        final_params: trace.final_x,
        error: None,
    })
}

fn cmd_sweep(args: SweepArgs) -> Result<()> {
    let cfg = args.overrides.resolve()?;
    let result = crouzeix::run_sweep(&cfg).map_err(|e| anyhow!(e.to_string()))?;
    print!("{}", format_report(&result.records, &result.sorted, &result.plateaus));
    if let Some(dir) = &cfg.outdir {
        emit_sorted_values_csv(&result.sorted, &dir.join("sorted_f.csv"))
            .map_err(|e| anyhow!(e.to_string()))?;
        emit_sorted_values_svg(&result.sorted, &dir.join("sorted_f.svg"))
            .map_err(|e| anyhow!(e.to_string()))?;
        if args.figures {
            for (k, plateau) in result.plateaus.iter().enumerate() {
                let Some(rec) = result.records.iter().find(|r| r.run_index == plateau.run_first)
                else {
                    continue;
                };
                let layout = ParameterLayout::new(rec.n, rec.m, rec.field_mode);
                let Ok(pv) = ParameterVector::new(layout, rec.final_params.clone()) else {
                    continue;
                };
                let Ok(pt) = unpack(&pv) else { continue };
                match ConfigFigure::from_point(&pt, cfg.epsilon, &cfg.report) {
                    Ok(fig) => {
                        let csv = dir.join(format!("fov_plateau{k}.csv"));
                        let svg = dir.join(format!("fov_plateau{k}.svg"));
                        emit_figure_csv(&fig, &csv).map_err(|e| anyhow!(e.to_string()))?;
                        emit_figure_svg(&fig, &svg).map_err(|e| anyhow!(e.to_string()))?;
                    }
                    Err(e) => eprintln!("figure for plateau {k} failed: {e}"),
                }
            }
        }
        eprintln!("outputs in {}", dir.display());
    }
    Ok(())
}

fn cmd_verify(args: VerifyArgs) -> Result<()> {
    let (layout, params) = load_point(&args.record)?;
    let pv = ParameterVector::new(layout, params).map_err(|e| anyhow!(e.to_string()))?;
    let pt = unpack(&pv).map_err(|e| anyhow!(e.to_string()))?;
    let report = stationarity_report(&pt, args.eps, &crouzeix::RatioOptions::default())
        .map_err(|e| anyhow!(e.to_string()))?;
    let json = serde_json::to_string_pretty(&report)?;
    println!("{json}");
    if let Some(out) = &args.out {
        use std::io::Write;
        let mut file = fs::OpenOptions::new().create(true).append(true).open(out)?;
        writeln!(file, "{json}")?;
        eprintln!("appended to {}", out.display());
    }
    Ok(())
}

fn cmd_fov(args: FovArgs) -> Result<()> {
    let mode = parse_field(&args.mode)?;
    let a = load_matrix(&args.matrix)?;
    let opts = BoundaryOptions {
        pregrid_per_two_pi: args.samples,
        ..BoundaryOptions::default()
    };
    let b = build_boundary(&a, mode, &opts).map_err(|e| anyhow!(e.to_string()))?;
    let mut rows: Vec<(f64, f64, f64, f64)> = Vec::new();
    for arc in &b.arcs {
        for s in &arc.samples {
            rows.push((s.theta, s.z.re, s.z.im, s.gap));
        }
    }
    for seg in &b.segments {
        rows.push((seg.theta, seg.start.re, seg.start.im, 0.0));
        rows.push((seg.theta, seg.end.re, seg.end.im, 0.0));
    }
    rows.sort_by(|x, y| x.0.partial_cmp(&y.0).unwrap());
    let mut out = String::from("theta,re_z,im_z,gap\n");
    for (theta, re, im, gap) in rows {
        out.push_str(&format!("{theta:.12},{re:.16e},{im:.16e},{gap:.6e}\n"));
    }
    fs::write(&args.out, out)?;
    eprintln!(
        "wrote {} ({} segments, {} corners{})",
        args.out.display(),
        b.segments.len(),
        b.corners.len(),
        if b.degenerate.is_some() { ", degenerate" } else { "" }
    );
    Ok(())
}

fn cmd_report(args: ReportArgs) -> Result<()> {
    let mut records: Vec<RunRecord> = Vec::new();
    for entry in fs::read_dir(&args.dir)? {
        let path = entry?.path();
        let Some(name) = path.file_name().and_then(|n| n.to_str()) else {
            continue;
        };
        if name.starts_with("run_") && name.ends_with(".json") {
            let text = fs::read_to_string(&path)?;
            match serde_json::from_str::<RunRecord>(&text) {
                Ok(rec) => records.push(rec),
                Err(e) => eprintln!("skipping {name}: {e}"),
            }
        }
    }
    if records.is_empty() {
        bail!("no run_*.json records in {}", args.dir.display());
    }
    records.sort_by_key(|r| r.run_index);
    let mut sorted: Vec<(usize, f64, usize)> = records
        .iter()
        .filter_map(|r| r.f.map(|f| (0usize, f, r.run_index)))
        .collect();
    sorted.sort_by(|a, b| a.1.partial_cmp(&b.1).unwrap().then(a.2.cmp(&b.2)));
    for (rank, entry) in sorted.iter_mut().enumerate() {
        entry.0 = rank + 1;
    }
    let plateaus = crouzeix::harness::detect_plateaus(&sorted, args.plateau_tol, 3);
    print!("{}", format_report(&records, &sorted, &plateaus));
    Ok(())
}

/// Loads packed parameters from a run record ("final_params") or a bare
/// point document ("params").
fn load_point(path: &Path) -> Result<(ParameterLayout, Vec<f64>)> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let value: serde_json::Value = serde_json::from_str(&text)?;
    let n = value
        .get("n")
        .and_then(|v| v.as_u64())
        .ok_or_else(|| anyhow!("missing field 'n'"))? as usize;
    let m = value
        .get("m")
        .and_then(|v| v.as_u64())
        .ok_or_else(|| anyhow!("missing field 'm'"))? as usize;
    let field = value
        .get("field_mode")
        .and_then(|v| v.as_str())
        .ok_or_else(|| anyhow!("missing field 'field_mode'"))?;
    let params_value = value
        .get("final_params")
        .or_else(|| value.get("params"))
        .ok_or_else(|| anyhow!("missing 'final_params' or 'params'"))?;
    let params: Vec<f64> = serde_json::from_value(params_value.clone())?;
    Ok((ParameterLayout::new(n, m, parse_field(field)?), params))
}

/// Matrix JSON: object with "entries" (or a bare array) of rows; each
/// entry is a number or an [re, im] pair.
fn load_matrix(path: &Path) -> Result<CMat> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let value: serde_json::Value = serde_json::from_str(&text)?;
    let rows_value = value.get("entries").cloned().unwrap_or(value);
    let rows = rows_value
        .as_array()
        .ok_or_else(|| anyhow!("matrix must be an array of rows"))?;
    let n = rows.len();
    let mut entries: Vec<Vec<num_complex::Complex64>> = Vec::with_capacity(n);
    for row in rows {
        let cells = row
            .as_array()
            .ok_or_else(|| anyhow!("matrix rows must be arrays"))?;
        if cells.len() != n {
            bail!("matrix must be square: row of length {} in order {n}", cells.len());
        }
        let mut out_row = Vec::with_capacity(n);
        for cell in cells {
            let z = if let Some(x) = cell.as_f64() {
                num_complex::Complex64::new(x, 0.0)
            } else if let Some(pair) = cell.as_array() {
                if pair.len() != 2 {
                    bail!("complex entries must be [re, im]");
                }
                num_complex::Complex64::new(
                    pair[0].as_f64().ok_or_else(|| anyhow!("bad re part"))?,
                    pair[1].as_f64().ok_or_else(|| anyhow!("bad im part"))?,
                )
            } else {
                bail!("matrix entries must be numbers or [re, im] pairs");
            };
            out_row.push(z);
        }
        entries.push(out_row);
    }
    Ok(CMat::from_rows(&entries))
}

//! Command-line front end: configuration, persistence, reproducibility.
//!
//! All computations are deterministic, so a run is fully described by its
//! configuration document; outputs are written atomically and accompanied
//! by a manifest carrying a hash of that configuration. Exit codes are
//! fixed for scriptability: 0 success, 2 invalid configuration or
//! insufficient input data, 3 numerical failure (the message names the
//! failing stage).

use std::collections::BTreeMap;
use std::io::Write as _;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Parser, Subcommand};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::hardy::{best_constant_numeric, HardyProblem};
use crate::model::{Bc, CuspEdgeModel};
use crate::saclass::{classify, weyl_circle_numeric, windows};
use crate::spectrum::{counting_curve, CountingCurve, CurveLabel};
use crate::weyl::{block_lattice_count, fit_weyl, per_coordinate_bounds, schedule, BracketingPartition};

/// Spectral toolkit for crossing cusp-edge model operators.
#[derive(Debug, Parser)]
#[command(name = "cuspedge", version, about)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Eigenvalue counting curve for a configured model (CSV).
    Spectrum {
        #[arg(long)]
        config: PathBuf,
        /// Output directory; overrides `output_dir` in the config.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Worker threads (0 = automatic).
        #[arg(long, default_value_t = 0)]
        threads: usize,
    },
    /// Fit the leading growth coefficient of a counting curve (JSON).
    WeylFit {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, default_value_t = 0)]
        threads: usize,
        /// Fit a pre-computed curve (CSV `lambda,count`) instead of
        /// running the pipeline.
        #[arg(long)]
        curve: Option<PathBuf>,
    },
    /// Sharp-constant verification for the weighted Hardy inequality (CSV).
    Hardy {
        #[arg(long)]
        alpha: f64,
        #[arg(long)]
        beta: f64,
        #[arg(long, default_value_t = 1.0)]
        rho0: f64,
        #[arg(long, default_value_t = 4000)]
        cells: usize,
        #[arg(long, default_value_t = 2.0)]
        grading: f64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Limit-point/limit-circle classification of the radial operator (JSON).
    Classify {
        #[arg(long)]
        alpha: f64,
        /// Also run the numerical endpoint test with this cusp scale.
        #[arg(long)]
        numeric_delta: Option<f64>,
    },
    /// Shift and constant windows for a cusp exponent (JSON).
    Windows {
        #[arg(long)]
        k: f64,
        #[arg(long, default_value_t = 0.0)]
        sigma: f64,
        #[arg(long, default_value_t = 0.0)]
        beta: f64,
    },
    /// Dyadic block decomposition and lattice counts (CSV).
    Bracket {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MeshConfig {
    pub cells: usize,
    pub grading: f64,
}

/// λ sampling: a point count (uniform up to `lambda_max`) or an explicit
/// ascending list.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(untagged)]
pub enum LambdaGrid {
    Count(usize),
    List(Vec<f64>),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BcChoice {
    Both,
    Dirichlet,
    Neumann,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RunConfig {
    pub model: CuspEdgeModel,
    pub mesh: MeshConfig,
    pub lambda_max: f64,
    pub lambda_grid: LambdaGrid,
    pub bc: BcChoice,
    #[serde(default)]
    pub output_dir: Option<PathBuf>,
}

impl RunConfig {
    pub fn validate(&self) -> Result<()> {
        self.model.validate()?;
        if !(self.lambda_max > 0.0) {
            return Err(Error::InvalidConfig("lambda_max must be positive".into()));
        }
        if self.mesh.cells < 16 {
            return Err(Error::InvalidConfig(format!(
                "mesh.cells must be at least 16, got {}",
                self.mesh.cells
            )));
        }
        Ok(())
    }

    pub fn lambda_points(&self) -> Result<Vec<f64>> {
        match &self.lambda_grid {
            LambdaGrid::Count(n) => {
                if *n == 0 {
                    return Err(Error::InvalidConfig("lambda_grid count is zero".into()));
                }
                Ok((1..=*n)
                    .map(|i| self.lambda_max * i as f64 / *n as f64)
                    .collect())
            }
            LambdaGrid::List(v) => {
                if v.is_empty() {
                    return Err(Error::InvalidConfig("lambda_grid list is empty".into()));
                }
                if v.windows(2).any(|w| w[1] < w[0]) {
                    return Err(Error::InvalidConfig(
                        "lambda_grid list must be ascending".into(),
                    ));
                }
                Ok(v.clone())
            }
        }
    }
}

/// Reproducibility record written next to every file-producing run.
/// Outputs of identical configurations are byte-for-byte identical; wall
/// times are informational and excluded from that guarantee.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RunManifest {
    pub config_sha256: String,
    pub tool_version: String,
    pub wall_ms: BTreeMap<String, f64>,
    pub certified: BTreeMap<String, bool>,
}

pub fn config_hash(config: &RunConfig) -> String {
    let bytes = serde_json::to_vec(config).expect("config serializes");
    let mut h = Sha256::new();
    h.update(&bytes);
    format!("{:x}", h.finalize())
}

/// Atomic write: temp file in the target directory, then rename.
pub fn write_atomic(path: &Path, contents: &str) -> Result<()> {
    if let Some(dir) = path.parent() {
        if !dir.as_os_str().is_empty() {
            std::fs::create_dir_all(dir)?;
        }
    }
    let tmp = path.with_extension("tmp-partial");
    {
        let mut f = std::fs::File::create(&tmp)?;
        f.write_all(contents.as_bytes())?;
        f.sync_all()?;
    }
    std::fs::rename(&tmp, path)?;
    Ok(())
}

/// 17-significant-digit decimal rendering used in all CSV/JSON output.
pub fn fmt_float(x: f64) -> String {
    format!("{:.16e}", x)
}

fn load_config(path: &Path) -> Result<RunConfig> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Error::InvalidConfig(format!("cannot read {}: {e}", path.display())))?;
    let config: RunConfig = serde_json::from_str(&text).map_err(|e| {
        Error::InvalidConfig(format!(
            "{}: parse error at line {}, column {}: {e}",
            path.display(),
            e.line(),
            e.column()
        ))
    })?;
    config.validate()?;
    Ok(config)
}

fn init_threads(threads: usize) {
    if threads > 0 {
        // Ignore the error if a global pool already exists.
        let _ = rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build_global();
    }
}

fn stage<T>(name: &str, r: Result<T>) -> Result<T> {
    r.map_err(|e| match e {
        Error::NumericalFailure(msg) => {
            Error::NumericalFailure(format!("stage {name}: {msg}"))
        }
        Error::MeshTooCoarse { rel_change, rtol } => Error::NumericalFailure(format!(
            "stage {name}: mesh too coarse (relative change {rel_change:.3e} > {rtol:.3e})"
        )),
        Error::IndexIncomplete { lambda, lambda_max } => Error::NumericalFailure(format!(
            "stage {name}: index incomplete (lambda {lambda} > certified {lambda_max})"
        )),
        other => other,
    })
}

struct SpectrumRun {
    csv: String,
    certified: BTreeMap<String, bool>,
    wall_ms: BTreeMap<String, f64>,
    averaged: Option<CountingCurve>,
}

fn run_spectrum_pipeline(config: &RunConfig) -> Result<SpectrumRun> {
    let grid = config.lambda_points()?;
    let mut certified = BTreeMap::new();
    let mut wall_ms = BTreeMap::new();
    let mut curve = |bc: Bc, name: &str| -> Result<CountingCurve> {
        let t = Instant::now();
        let c = stage(
            name,
            counting_curve(
                &config.model,
                config.mesh.cells,
                config.mesh.grading,
                bc,
                &grid,
            ),
        )?;
        wall_ms.insert(name.to_string(), t.elapsed().as_secs_f64() * 1e3);
        certified.insert(name.to_string(), true);
        Ok(c)
    };

    let (header, columns, averaged) = match config.bc {
        BcChoice::Both => {
            let d = curve(Bc::Dirichlet, "spectrum-dirichlet")?;
            let n = curve(Bc::Neumann, "spectrum-neumann")?;
            let a = CountingCurve::averaged(&d, &n)?;
            (
                "lambda,count_dirichlet,count_neumann,count_avg",
                vec![d, n, a.clone()],
                Some(a),
            )
        }
        BcChoice::Dirichlet => {
            let d = curve(Bc::Dirichlet, "spectrum-dirichlet")?;
            ("lambda,count_dirichlet", vec![d], None)
        }
        BcChoice::Neumann => {
            let n = curve(Bc::Neumann, "spectrum-neumann")?;
            ("lambda,count_neumann", vec![n], None)
        }
    };

    let mut csv = String::from(header);
    csv.push('\n');
    for (i, &lambda) in grid.iter().enumerate() {
        csv.push_str(&fmt_float(lambda));
        for col in &columns {
            csv.push(',');
            csv.push_str(&fmt_float(col.points[i].1));
        }
        csv.push('\n');
    }
    Ok(SpectrumRun {
        csv,
        certified,
        wall_ms,
        averaged,
    })
}

fn output_dir(cli_out: &Option<PathBuf>, config: &RunConfig) -> Option<PathBuf> {
    cli_out.clone().or_else(|| config.output_dir.clone())
}

fn write_with_manifest(
    dir: &Path,
    name: &str,
    contents: &str,
    config: &RunConfig,
    wall_ms: BTreeMap<String, f64>,
    certified: BTreeMap<String, bool>,
) -> Result<()> {
    write_atomic(&dir.join(name), contents)?;
    let manifest = RunManifest {
        config_sha256: config_hash(config),
        tool_version: env!("CARGO_PKG_VERSION").to_string(),
        wall_ms,
        certified,
    };
    let json = serde_json::to_string_pretty(&manifest).expect("manifest serializes");
    write_atomic(&dir.join("manifest.json"), &json)?;
    Ok(())
}

fn load_curve_csv(path: &Path) -> Result<CountingCurve> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Error::InvalidConfig(format!("cannot read {}: {e}", path.display())))?;
    let mut points = Vec::new();
    for (lineno, line) in text.lines().enumerate() {
        if lineno == 0 || line.trim().is_empty() {
            continue; // header
        }
        let mut it = line.split(',');
        let parse = |field: Option<&str>| -> Result<f64> {
            field
                .map(str::trim)
                .and_then(|s| s.parse::<f64>().ok())
                .ok_or_else(|| {
                    Error::InvalidConfig(format!(
                        "{}: line {}: expected `lambda,count`",
                        path.display(),
                        lineno + 1
                    ))
                })
        };
        let lambda = parse(it.next())?;
        let count = parse(it.next())?;
        points.push((lambda, count));
    }
    Ok(CountingCurve {
        points,
        label: CurveLabel::Averaged,
    })
}

fn run_command(command: &Command) -> Result<()> {
    match command {
        Command::Spectrum {
            config,
            out,
            threads,
        } => {
            init_threads(*threads);
            let cfg = load_config(config)?;
            let run = run_spectrum_pipeline(&cfg)?;
            print!("{}", run.csv);
            if let Some(dir) = output_dir(out, &cfg) {
                write_with_manifest(
                    &dir,
                    "spectrum.csv",
                    &run.csv,
                    &cfg,
                    run.wall_ms,
                    run.certified,
                )?;
            }
            Ok(())
        }
        Command::WeylFit {
            config,
            out,
            threads,
            curve,
        } => {
            init_threads(*threads);
            let cfg = load_config(config)?;
            let t = Instant::now();
            let (curve, mut wall_ms, certified) = match curve {
                Some(path) => (load_curve_csv(path)?, BTreeMap::new(), BTreeMap::new()),
                None => {
                    let run = run_spectrum_pipeline(&cfg)?;
                    let averaged = run.averaged.ok_or_else(|| {
                        Error::InvalidConfig(
                            "weyl-fit needs bc = \"both\" for the averaged curve".into(),
                        )
                    })?;
                    (averaged, run.wall_ms, run.certified)
                }
            };
            let fit = stage("weyl-fit", fit_weyl(&curve, &cfg.model))?;
            wall_ms.insert(
                "weyl-fit".to_string(),
                t.elapsed().as_secs_f64() * 1e3,
            );
            let json = serde_json::to_string_pretty(&fit).expect("fit serializes");
            println!("{json}");
            if let Some(dir) = output_dir(out, &cfg) {
                write_with_manifest(&dir, "weyl_fit.json", &json, &cfg, wall_ms, certified)?;
            }
            Ok(())
        }
        Command::Hardy {
            alpha,
            beta,
            rho0,
            cells,
            grading,
            out,
        } => {
            let p = HardyProblem::compact(*alpha, *beta, *rho0, *cells, *grading);
            let r = stage("hardy", best_constant_numeric(&p))?;
            let csv = format!(
                "alpha,beta,theoretical,numeric_best,ratio,mesh_cells\n{},{},{},{},{},{}\n",
                fmt_float(*alpha),
                fmt_float(*beta),
                fmt_float(r.theoretical_bound),
                fmt_float(r.numeric_best),
                fmt_float(r.ratio),
                r.mesh_cells
            );
            print!("{csv}");
            if let Some(dir) = out {
                write_atomic(&dir.join("hardy.csv"), &csv)?;
            }
            Ok(())
        }
        Command::Classify {
            alpha,
            numeric_delta,
        } => {
            let report = classify(*alpha);
            let mut value = serde_json::to_value(&report).expect("report serializes");
            if let Some(delta) = numeric_delta {
                let numeric = weyl_circle_numeric(*alpha, 1.0, 0, *delta);
                value["numeric_verdict"] =
                    serde_json::to_value(numeric.verdict).expect("verdict serializes");
            }
            println!(
                "{}",
                serde_json::to_string_pretty(&value).expect("value serializes")
            );
            Ok(())
        }
        Command::Windows { k, sigma, beta } => {
            let w = windows(*k, *sigma, *beta);
            println!(
                "{}",
                serde_json::to_string_pretty(&w).expect("windows serializes")
            );
            Ok(())
        }
        Command::Bracket { config, out } => {
            let cfg = load_config(config)?;
            let model = &cfg.model;
            let (m0, m) = stage("bracket", schedule(cfg.lambda_max, model.beta()))?;
            let part = BracketingPartition::new(m0, m, model.ell)?;
            let cross_dim = model.cross_section.dim();
            let mut csv = String::from("mu,lattice_count,per_coord_bound_product\n");
            for block in part.blocks() {
                let count = block_lattice_count(&block, &model.k, cross_dim, cfg.lambda_max);
                let mut product: u128 = 1;
                let mut cross_bound: u128 = 1;
                for (j, &mu_j) in block.iter().enumerate() {
                    let (radial, angular, cross) =
                        per_coordinate_bounds(mu_j, model.k[j], cfg.lambda_max);
                    product = product.saturating_mul(radial as u128);
                    product = product.saturating_mul(angular as u128);
                    if j == 0 {
                        cross_bound = (cross as u128).saturating_pow(cross_dim as u32);
                    }
                }
                product = product.saturating_mul(cross_bound);
                let mu_label = block
                    .iter()
                    .map(|m| m.to_string())
                    .collect::<Vec<_>>()
                    .join("|");
                csv.push_str(&format!("{mu_label},{count},{product}\n"));
            }
            print!("{csv}");
            if let Some(dir) = out {
                write_atomic(&dir.join("bracket.csv"), &csv)?;
            }
            Ok(())
        }
    }
}

/// Exit-code mapping: 2 for configuration/input problems, 3 for numerical
/// failures.
pub fn exit_code_for(err: &Error) -> u8 {
    match err {
        Error::InvalidConfig(_)
        | Error::Io(_)
        | Error::InsufficientData(_)
        | Error::InsufficientSamples { .. }
        | Error::OutsideRegime { .. }
        | Error::GridMismatch
        | Error::ScheduleInverted { .. } => 2,
        Error::NumericalFailure(_)
        | Error::MeshTooCoarse { .. }
        | Error::IndexIncomplete { .. } => 3,
    }
}

/// Program entry point used by the binary.
pub fn main_entry() -> u8 {
    let cli = Cli::parse();
    match run_command(&cli.command) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            exit_code_for(&e)
        }
    }
}

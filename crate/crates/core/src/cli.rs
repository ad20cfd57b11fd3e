//! Command-line front end.
//!
//! Exit codes: 0 success, 2 usage error, 3 data error, 4 numerical divergence.

use std::ffi::OsString;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};

use crate::bench::{self, BenchConfig, Simulation};
use crate::error::{Error, Result};
use crate::init::{initialize, InitMode, InitSpec};
use crate::io::{self, HeaderMode, Manifest, MatrixFormat};
use crate::metrics::{
    auc_aupr, extract_biclusters, match_and_score, relevance_recovery, CeNorm, ScoreKind,
};
use crate::model::{Hyperparams, SvdScale, TauRule, ThresholdSlab, DEFAULT_LADDER};
use crate::optimizer::fit_ladder_from;
use crate::simgen::{simulate_i, simulate_ii, SimConfig};

/// Environment variable capping the number of worker threads.
pub const THREADS_ENV: &str = "BISSLB_THREADS";

#[derive(Debug, Parser)]
#[command(
    name = "bisslb",
    version,
    about = "Binary spike-and-slab lasso biclustering"
)]
struct Cli {
    /// Raise log verbosity (-v info, -vv debug).
    #[arg(short, long, action = clap::ArgAction::Count, global = true)]
    verbose: u8,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Fit a binary matrix over the spike ladder.
    Fit(FitArgs),
    /// Generate a synthetic matrix with planted biclusters.
    Simulate(SimulateArgs),
    /// Score an estimated bicluster set against a reference set.
    Evaluate(EvaluateArgs),
    /// AUC / AUPR of a stored fit on a binary matrix.
    Predict(PredictArgs),
    /// Monte Carlo benchmark over a grid of noise levels or offsets.
    Bench(BenchArgs),
    /// Re-run the command recorded in a manifest.
    Replay(ReplayArgs),
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum FormatArg {
    Csv,
    Coo,
}

impl From<FormatArg> for MatrixFormat {
    fn from(f: FormatArg) -> Self {
        match f {
            FormatArg::Csv => MatrixFormat::Csv,
            FormatArg::Coo => MatrixFormat::Coo,
        }
    }
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum HeaderArg {
    Auto,
    Present,
    Absent,
}

impl From<HeaderArg> for HeaderMode {
    fn from(h: HeaderArg) -> Self {
        match h {
            HeaderArg::Auto => HeaderMode::Auto,
            HeaderArg::Present => HeaderMode::Present,
            HeaderArg::Absent => HeaderMode::Absent,
        }
    }
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum CeNormArg {
    Union,
    Count,
}

impl From<CeNormArg> for CeNorm {
    fn from(c: CeNormArg) -> Self {
        match c {
            CeNormArg::Union => CeNorm::Union,
            CeNormArg::Count => CeNorm::Count,
        }
    }
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum InitArg {
    Svd,
    Random,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum SvdScaleArg {
    Sqrt,
    InverseSqrt,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum TauRuleArg {
    Intensity,
    Truncated,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum SlabArg {
    PerMatrix,
    Global,
}

/// Solver settings shared by `fit` and `bench`.
#[derive(Debug, Args)]
struct SolverArgs {
    /// Initial truncation level K*.
    #[arg(long, default_value_t = 20)]
    k_star: usize,
    /// Spike values, fitted in order with warm starts.
    #[arg(long, value_delimiter = ',', default_values_t = DEFAULT_LADDER.to_vec())]
    lambda0_ladder: Vec<f64>,
    /// Slab parameter for A.
    #[arg(long, default_value_t = 1.0)]
    lambda1_tilde: f64,
    /// Slab parameter for B.
    #[arg(long, default_value_t = 1.0)]
    lambda1: f64,
    /// Proximal step size.
    #[arg(long, default_value_t = 1e-3)]
    eta: f64,
    #[arg(long, default_value_t = 1e-6)]
    tol: f64,
    /// Iteration cap per ladder rung.
    #[arg(long, default_value_t = 500)]
    max_iter: usize,
    #[arg(long, value_enum, default_value_t = SvdScaleArg::Sqrt)]
    svd_scale: SvdScaleArg,
    #[arg(long, value_enum, default_value_t = TauRuleArg::Intensity)]
    tau_rule: TauRuleArg,
    #[arg(long, value_enum, default_value_t = SlabArg::PerMatrix)]
    threshold_slab: SlabArg,
}

impl SolverArgs {
    fn hyperparams(&self, seed: u64) -> Result<Hyperparams> {
        let mut hp = Hyperparams::new(self.k_star);
        let first = *self
            .lambda0_ladder
            .first()
            .ok_or_else(|| Error::Usage("lambda0 ladder is empty".into()))?;
        hp.lambda0_ladder = self.lambda0_ladder.clone();
        hp = hp.with_spike(first);
        hp.lambda1_tilde = self.lambda1_tilde;
        hp.lambda1 = self.lambda1;
        hp.eta = self.eta;
        hp.tol = self.tol;
        hp.max_iter = self.max_iter;
        hp.seed = seed;
        hp.svd_scale = match self.svd_scale {
            SvdScaleArg::Sqrt => SvdScale::Sqrt,
            SvdScaleArg::InverseSqrt => SvdScale::InverseSqrt,
        };
        hp.tau_rule = match self.tau_rule {
            TauRuleArg::Intensity => TauRule::Intensity,
            TauRuleArg::Truncated => TauRule::Truncated,
        };
        hp.threshold_slab = match self.threshold_slab {
            SlabArg::PerMatrix => ThresholdSlab::PerMatrix,
            SlabArg::Global => ThresholdSlab::Global,
        };
        hp.validate()?;
        Ok(hp)
    }
}

#[derive(Debug, Args)]
struct FitArgs {
    #[arg(long)]
    input: PathBuf,
    /// Input format; defaults to `coo` for `.coo` files and `csv` otherwise.
    #[arg(long, value_enum)]
    format: Option<FormatArg>,
    #[arg(long, value_enum, default_value_t = HeaderArg::Auto)]
    header: HeaderArg,
    #[command(flatten)]
    solver: SolverArgs,
    #[arg(long, value_enum, default_value_t = InitArg::Svd)]
    init: InitArg,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Output directory.
    #[arg(long)]
    out: PathBuf,
}

#[derive(Debug, Args)]
struct SimulateArgs {
    /// 1: flip noise, 2: logistic generator.
    #[arg(long, value_parser = clap::value_parser!(u8).range(1..=2))]
    sim: u8,
    #[arg(long = "i")]
    rows: usize,
    #[arg(long = "j")]
    cols: usize,
    #[arg(long)]
    k: usize,
    /// Fraction of flipped cells (simulation 1).
    #[arg(long, conflicts_with = "mu")]
    noise: Option<f64>,
    /// Logit offset (simulation 2).
    #[arg(long, allow_hyphen_values = true)]
    mu: Option<f64>,
    /// Bicluster row counts as `min:max`.
    #[arg(long, default_value = "5:20")]
    row_sizes: String,
    /// Bicluster column counts as `min:max`.
    #[arg(long, default_value = "10:50")]
    col_sizes: String,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, value_enum, default_value_t = FormatArg::Csv)]
    format: FormatArg,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Debug, Args)]
struct EvaluateArgs {
    #[arg(long)]
    truth: PathBuf,
    #[arg(long)]
    est: PathBuf,
    /// Any of ce, cs, rel, rec.
    #[arg(long, value_delimiter = ',', default_value = "ce,cs,rel,rec")]
    metrics: Vec<String>,
    #[arg(long, value_enum, default_value_t = CeNormArg::Union)]
    ce_norm: CeNormArg,
}

#[derive(Debug, Args)]
struct PredictArgs {
    /// Directory written by `fit`.
    #[arg(long)]
    fit: PathBuf,
    #[arg(long)]
    input: PathBuf,
    #[arg(long, value_enum)]
    format: Option<FormatArg>,
    #[arg(long, value_enum, default_value_t = HeaderArg::Auto)]
    header: HeaderArg,
    /// Any of auc, aupr.
    #[arg(long, value_delimiter = ',', default_value = "auc,aupr")]
    metrics: Vec<String>,
    /// 0/1 CSV of the cells to score; all cells when absent.
    #[arg(long)]
    mask: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct BenchArgs {
    #[arg(long, value_parser = clap::value_parser!(u8).range(1..=2))]
    sim: u8,
    #[arg(long = "i", default_value_t = 100)]
    rows: usize,
    #[arg(long = "j", default_value_t = 300)]
    cols: usize,
    #[arg(long, default_value_t = 5)]
    k: usize,
    /// Noise levels for simulation 1: `start:stop:step` or a comma list.
    #[arg(long, conflicts_with = "mu_grid")]
    noise_grid: Option<String>,
    /// Offsets for simulation 2: `start:stop:step` or a comma list.
    #[arg(long, allow_hyphen_values = true)]
    mu_grid: Option<String>,
    #[arg(long, default_value_t = 1)]
    replicates: usize,
    #[arg(long, default_value = "5:20")]
    row_sizes: String,
    #[arg(long, default_value = "10:50")]
    col_sizes: String,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[command(flatten)]
    solver: SolverArgs,
    #[arg(long, value_enum, default_value_t = CeNormArg::Union)]
    ce_norm: CeNormArg,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Debug, Args)]
struct ReplayArgs {
    #[arg(long)]
    manifest: PathBuf,
    #[arg(long)]
    out: PathBuf,
}

/// The reproducible part of a run, stored in `manifest.json`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "command", rename_all = "snake_case")]
pub enum RunSpec {
    Fit {
        input: PathBuf,
        format: MatrixFormat,
        header: HeaderMode,
        init: InitMode,
        hyperparams: Hyperparams,
    },
    Simulate {
        simulation: Simulation,
        config: SimConfig,
        format: MatrixFormat,
    },
    Bench {
        config: BenchConfig,
    },
}

fn infer_format(path: &Path, explicit: Option<FormatArg>) -> MatrixFormat {
    match explicit {
        Some(f) => f.into(),
        None if path
            .extension()
            .is_some_and(|e| e.eq_ignore_ascii_case("coo")) =>
        {
            MatrixFormat::Coo
        }
        None => MatrixFormat::Csv,
    }
}

fn parse_size_range(s: &str) -> Result<(usize, usize)> {
    let bad = || Error::Usage(format!("size range must be min:max, got {s:?}"));
    let (lo, hi) = s.split_once(':').ok_or_else(bad)?;
    let lo = lo.trim().parse().map_err(|_| bad())?;
    let hi = hi.trim().parse().map_err(|_| bad())?;
    Ok((lo, hi))
}

/// Thread cap from the environment, if set.
pub fn threads_from_env() -> Result<Option<usize>> {
    match std::env::var(THREADS_ENV) {
        Err(_) => Ok(None),
        Ok(v) => match v.trim().parse::<usize>() {
            Ok(n) if n > 0 => Ok(Some(n)),
            _ => Err(Error::Usage(format!(
                "{THREADS_ENV} must be a positive integer, got {v:?}"
            ))),
        },
    }
}

fn execute(spec: &RunSpec, out: &Path) -> Result<String> {
    match spec {
        RunSpec::Fit {
            input,
            format,
            header,
            init,
            hyperparams,
        } => {
            let bytes = io::read_file(input)?;
            let text = String::from_utf8(bytes.clone()).map_err(|_| Error::Parse {
                line: 1,
                column: 1,
                message: "input is not UTF-8".into(),
            })?;
            let y = io::parse_matrix(&text, *format, *header)?;
            let init_spec = InitSpec {
                mode: *init,
                k_star: hyperparams.k_star,
                seed: hyperparams.seed,
                warm_source: None,
            };
            let start = initialize(&y, &init_spec, hyperparams)?;
            let result = fit_ladder_from(&y, hyperparams, start)?;
            let set = extract_biclusters(&result.factors, false);
            let manifest = Manifest::new(serde_json::to_value(spec)?, Some(io::sha256_hex(&bytes)));
            io::write_fit(out, &result, &set, &manifest)?;
            Ok(format!(
                "K_hat={} converged={} iterations={} log_posterior={:?}\n",
                result.k_hat, result.converged, result.iterations, result.log_posterior
            ))
        }
        RunSpec::Simulate {
            simulation,
            config,
            format,
        } => {
            let (y, truth) = match simulation {
                Simulation::Flip => simulate_i(config)?,
                Simulation::Logistic => simulate_ii(config)?,
            };
            io::ensure_dir(out)?;
            let name = match format {
                MatrixFormat::Csv => "Y.csv",
                MatrixFormat::Coo => "Y.coo",
            };
            io::write_matrix(&out.join(name), &y, *format)?;
            io::write_biclusters(&out.join("truth.json"), &truth.to_set())?;
            io::write_manifest(
                &out.join("manifest.json"),
                &Manifest::new(serde_json::to_value(spec)?, None),
            )?;
            Ok(format!(
                "wrote {}x{} matrix with {} ones\n",
                y.rows(),
                y.cols(),
                y.count_ones()
            ))
        }
        RunSpec::Bench { config } => {
            let report = bench::run(config, threads_from_env()?)?;
            bench::write_report(out, config, &report)?;
            Ok(bench::render_summary(&report))
        }
    }
}

fn check_input_digest(spec: &RunSpec, manifest: &Manifest) -> Result<()> {
    if let (RunSpec::Fit { input, .. }, Some(expected)) = (spec, &manifest.input_sha256) {
        let actual = io::sha256_hex(&io::read_file(input)?);
        if &actual != expected {
            return Err(Error::InvalidArgument(format!(
                "input {} has digest {actual}, manifest records {expected}",
                input.display()
            )));
        }
    }
    Ok(())
}

fn evaluate(args: &EvaluateArgs) -> Result<String> {
    let truth = io::read_biclusters(&args.truth)?;
    let est = io::read_biclusters(&args.est)?;
    let norm: CeNorm = args.ce_norm.into();
    let mut out = String::from("metric,value\n");
    for m in &args.metrics {
        let value = match m.trim() {
            "ce" => match_and_score(&truth, &est, ScoreKind::Ce, norm),
            "cs" => match_and_score(&truth, &est, ScoreKind::Cs, norm),
            "rel" => relevance_recovery(&truth, &est).0,
            "rec" => relevance_recovery(&truth, &est).1,
            other => {
                return Err(Error::Usage(format!(
                    "unknown metric {other:?}; expected ce, cs, rel or rec"
                )))
            }
        };
        let _ = writeln!(out, "{},{value:?}", m.trim());
    }
    Ok(out)
}

fn predict(args: &PredictArgs) -> Result<String> {
    for m in &args.metrics {
        if !matches!(m.trim(), "auc" | "aupr") {
            return Err(Error::Usage(format!(
                "unknown metric {m:?}; expected auc or aupr"
            )));
        }
    }
    let fp = io::read_fit(&args.fit)?;
    let y = io::read_matrix(
        &args.input,
        infer_format(&args.input, args.format),
        args.header.into(),
    )?;
    let mask = match &args.mask {
        Some(p) => Some(
            io::read_matrix(p, MatrixFormat::Csv, HeaderMode::Auto)?
                .view()
                .mapv(|v| v != 0.0),
        ),
        None => None,
    };
    let (auc, aupr) = auc_aupr(&y, &fp, mask.as_ref())?;
    let mut out = String::from("metric,value\n");
    for m in &args.metrics {
        let v = if m.trim() == "auc" { auc } else { aupr };
        let _ = writeln!(out, "{},{v:?}", m.trim());
    }
    Ok(out)
}

fn dispatch(command: Command) -> Result<String> {
    match command {
        Command::Fit(a) => {
            let spec = RunSpec::Fit {
                format: infer_format(&a.input, a.format),
                input: a.input,
                header: a.header.into(),
                init: match a.init {
                    InitArg::Svd => InitMode::Svd,
                    InitArg::Random => InitMode::Random,
                },
                hyperparams: a.solver.hyperparams(a.seed)?,
            };
            execute(&spec, &a.out)
        }
        Command::Simulate(a) => {
            let mut config = SimConfig::new(a.rows, a.cols, a.k, a.seed);
            let (r0, r1) = parse_size_range(&a.row_sizes)?;
            let (c0, c1) = parse_size_range(&a.col_sizes)?;
            config.row_sizes = r0..=r1;
            config.col_sizes = c0..=c1;
            let simulation = match (a.sim, a.noise, a.mu) {
                (1, noise, None) => {
                    config.noise = noise.unwrap_or(0.0);
                    Simulation::Flip
                }
                (2, None, mu) => {
                    config.mu_offset = mu.unwrap_or(0.0);
                    Simulation::Logistic
                }
                (1, _, Some(_)) => return Err(Error::Usage("--mu applies to --sim 2".into())),
                _ => return Err(Error::Usage("--noise applies to --sim 1".into())),
            };
            let spec = RunSpec::Simulate {
                simulation,
                config,
                format: a.format.into(),
            };
            execute(&spec, &a.out)
        }
        Command::Evaluate(a) => evaluate(&a),
        Command::Predict(a) => predict(&a),
        Command::Bench(a) => {
            let (simulation, grid) = match (a.sim, &a.noise_grid, &a.mu_grid) {
                (1, Some(g), None) => (Simulation::Flip, g),
                (2, None, Some(g)) => (Simulation::Logistic, g),
                (1, _, _) => return Err(Error::Usage("--sim 1 needs --noise-grid".into())),
                _ => return Err(Error::Usage("--sim 2 needs --mu-grid".into())),
            };
            let mut config = BenchConfig::new(simulation, a.rows, a.cols, a.k, a.solver.k_star);
            config.levels = bench::parse_grid(grid)?;
            config.replicates = a.replicates;
            config.seed = a.seed;
            config.row_sizes = parse_size_range(&a.row_sizes)?;
            config.col_sizes = parse_size_range(&a.col_sizes)?;
            config.hyperparams = a.solver.hyperparams(a.seed)?;
            config.ce_norm = a.ce_norm.into();
            execute(&RunSpec::Bench { config }, &a.out)
        }
        Command::Replay(a) => {
            let manifest = io::read_manifest(&a.manifest)?;
            let spec: RunSpec = serde_json::from_value(manifest.run.clone())?;
            check_input_digest(&spec, &manifest)?;
            execute(&spec, &a.out)
        }
    }
}

fn init_logging(verbose: u8) {
    let level = match verbose {
        0 => "warn",
        1 => "info",
        _ => "debug",
    };
    let _ = env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level))
        .try_init();
}

/// Parses `args`, runs the command and returns the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    init_logging(cli.verbose);
    match dispatch(cli.command) {
        Ok(text) => {
            print!("{text}");
            0
        }
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

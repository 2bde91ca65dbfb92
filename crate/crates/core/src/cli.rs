//! Command-line front end. Exit codes: 0 success, 2 usage or data error,
//! 3 numerical failure.

use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};
use serde_json::json;
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::fit::{fit, FittedModel, IrlsOptions};
use crate::model::{DesignMatrix, Family, ResponseVector};
use crate::pipeline::{load_csv, preprocess, write_csv, CsvSchema, TabularDataset};
use crate::resampler::{run_bootstrap, BootstrapConfig, BootstrapResult, SubsampleSize};
use crate::residuals::centered_residuals;
use crate::simbench::{run_experiment_with, speed_benchmark, LongCsvWriter, SimDesign};

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_NUMERICAL: i32 = 3;

#[derive(Debug, Parser)]
#[command(
    name = "srb",
    version,
    about = "Subsampled residual bootstrap for linear and generalized linear models"
)]
pub struct Cli {
    /// Worker threads (default: all cores).
    #[arg(long, global = true, env = "SRB_THREADS")]
    pub threads: Option<usize>,
    /// More log output; repeat for debug.
    #[arg(short, long, global = true, action = clap::ArgAction::Count)]
    pub verbose: u8,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Fit a model and print coefficients, convergence and residual scale.
    Fit(FitArgs),
    /// Estimate a quantile of the l2 root with RB or SRB.
    Bootstrap(BootstrapArgs),
    /// Run a simulation study from a design file.
    Simulate(SimulateArgs),
    /// Subset to two classes, drop constant columns and prune by VIF.
    Preprocess(PreprocessArgs),
    /// Time RB against SRB replicates on synthetic data.
    Benchmark(BenchmarkArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MethodArg {
    Rb,
    Srb,
}

#[derive(Debug, Args)]
pub struct DataArgs {
    /// CSV file with a header row.
    #[arg(long)]
    pub data: PathBuf,
    /// Name of the response column (required here or in the config).
    #[arg(long)]
    pub response: Option<String>,
    /// gaussian, logistic or poisson [default: gaussian].
    #[arg(long)]
    pub family: Option<String>,
    /// Prepend an intercept column.
    #[arg(long)]
    pub intercept: bool,
    /// IRLS convergence tolerance.
    #[arg(long)]
    pub tol: Option<f64>,
    /// IRLS iteration cap.
    #[arg(long)]
    pub max_iter: Option<usize>,
    /// TOML or JSON file of defaults; flags take precedence.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Directory for output files; JSON goes to stdout when absent.
    #[arg(long)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct FitArgs {
    #[command(flatten)]
    pub data: DataArgs,
}

#[derive(Debug, Args)]
pub struct BootstrapArgs {
    #[command(flatten)]
    pub data: DataArgs,
    /// Resampling scheme [default: srb].
    #[arg(long, value_enum)]
    pub method: Option<MethodArg>,
    /// Subsample exponent, b = ceil(n^gamma).
    #[arg(long, conflicts_with = "b")]
    pub gamma: Option<f64>,
    /// Subsample size.
    #[arg(long)]
    pub b: Option<usize>,
    /// Bootstrap replicates [default: 100].
    #[arg(long, alias = "R")]
    pub resamples: Option<usize>,
    /// Quantile level in (0, 1) [default: 0.95].
    #[arg(long)]
    pub level: Option<f64>,
    /// [default: 0]
    #[arg(long)]
    pub seed: Option<u64>,
    /// Also write the R x p matrix of replicates.
    #[arg(long)]
    pub emit_betas: bool,
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    /// JSON or TOML simulation design.
    #[arg(long)]
    pub design: PathBuf,
    /// Overrides the design's master seed.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Directory for long.csv, report.csv and report.json.
    #[arg(long)]
    pub output: PathBuf,
}

#[derive(Debug, Args)]
pub struct PreprocessArgs {
    /// CSV file with a header row.
    #[arg(long)]
    pub data: PathBuf,
    /// Name of the response column.
    #[arg(long)]
    pub response: String,
    /// Two response values to keep, e.g. `1,2`; the first becomes 0.
    #[arg(long, value_parser = parse_pair)]
    pub classes: Option<(f64, f64)>,
    /// Drop the worst column while any VIF reaches this value.
    #[arg(long, default_value_t = 2.0)]
    pub vif_threshold: f64,
    /// Directory for pruned.csv and prune_log.json.
    #[arg(long)]
    pub output: PathBuf,
}

fn parse_pair(s: &str) -> std::result::Result<(f64, f64), String> {
    let (a, b) = s
        .split_once(',')
        .ok_or("expected two comma-separated values, e.g. 1,2")?;
    let num = |t: &str| t.trim().parse::<f64>().map_err(|e| format!("'{t}': {e}"));
    Ok((num(a)?, num(b)?))
}

#[derive(Debug, Args)]
pub struct BenchmarkArgs {
    /// Rows.
    #[arg(long, default_value_t = 100_000)]
    pub n: usize,
    /// Covariates.
    #[arg(long, default_value_t = 50)]
    pub p: usize,
    /// SRB subsample exponent.
    #[arg(long, default_value_t = 0.6)]
    pub gamma: f64,
    #[arg(long, alias = "R", default_value_t = 200)]
    pub resamples: usize,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    /// Directory for benchmark.json; stdout when absent.
    #[arg(long)]
    pub output: Option<PathBuf>,
}

/// Values a config file may supply for `fit` and `bootstrap`.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub response: Option<String>,
    pub family: Option<String>,
    pub intercept: Option<bool>,
    pub tol: Option<f64>,
    pub max_iter: Option<usize>,
    pub method: Option<MethodArg>,
    pub gamma: Option<f64>,
    pub b: Option<usize>,
    pub resamples: Option<usize>,
    pub level: Option<f64>,
    pub seed: Option<u64>,
    pub emit_betas: Option<bool>,
}

/// Parses TOML or JSON by extension.
fn read_structured<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<T> {
    let text = fs::read_to_string(path)?;
    match path.extension().and_then(|e| e.to_str()) {
        Some("toml") => toml::from_str(&text).map_err(|e| Error::Config(format!("{}: {e}", path.display()))),
        _ => serde_json::from_str(&text).map_err(|e| Error::Config(format!("{}: {e}", path.display()))),
    }
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self> {
        read_structured(path)
    }

    /// Fills every field this config lacks from `fallback`.
    fn or(self, fallback: Self) -> Self {
        Self {
            response: self.response.or(fallback.response),
            family: self.family.or(fallback.family),
            intercept: self.intercept.or(fallback.intercept),
            tol: self.tol.or(fallback.tol),
            max_iter: self.max_iter.or(fallback.max_iter),
            method: self.method.or(fallback.method),
            gamma: self.gamma.or(fallback.gamma),
            b: self.b.or(fallback.b),
            resamples: self.resamples.or(fallback.resamples),
            level: self.level.or(fallback.level),
            seed: self.seed.or(fallback.seed),
            emit_betas: self.emit_betas.or(fallback.emit_betas),
        }
    }

    fn defaults() -> Self {
        let irls = IrlsOptions::default();
        Self {
            response: None,
            family: Some("gaussian".into()),
            intercept: Some(false),
            tol: Some(irls.tol),
            max_iter: Some(irls.max_iter),
            method: Some(MethodArg::Srb),
            gamma: None,
            b: None,
            resamples: Some(100),
            level: Some(0.95),
            seed: Some(0),
            emit_betas: Some(false),
        }
    }
}

fn flags_of(d: &DataArgs) -> RunConfig {
    RunConfig {
        response: d.response.clone(),
        family: d.family.clone(),
        intercept: d.intercept.then_some(true),
        tol: d.tol,
        max_iter: d.max_iter,
        ..RunConfig::default()
    }
}

/// Flags over config file over defaults.
fn resolve(flags: RunConfig, file: Option<&Path>) -> Result<RunConfig> {
    let from_file = match file {
        Some(p) => RunConfig::load(p)?,
        None => RunConfig::default(),
    };
    let (flag_gamma, flag_b) = (flags.gamma.is_some(), flags.b.is_some());
    let mut cfg = flags.or(from_file);
    // gamma and b name the same quantity; a flag for one masks the file's other
    if flag_gamma {
        cfg.b = None;
    } else if flag_b {
        cfg.gamma = None;
    }
    cfg.method = cfg.method.or(Some(MethodArg::Srb));
    // an explicit b in either source wins over a default gamma
    if cfg.b.is_none() && cfg.gamma.is_none() && cfg.method == Some(MethodArg::Srb) {
        cfg.gamma = Some(0.7);
    }
    Ok(cfg.or(RunConfig::defaults()))
}

/// Hex SHA-256 of a file.
pub fn file_sha256(path: &Path) -> Result<String> {
    let bytes = fs::read(path)?;
    Ok(Sha256::digest(&bytes).iter().map(|b| format!("{b:02x}")).collect())
}

struct Loaded {
    dataset: TabularDataset,
    x: DesignMatrix,
    y: ResponseVector,
    family: Family,
    names: Vec<String>,
    checksum: String,
}

fn load(path: &Path, cfg: &RunConfig) -> Result<Loaded> {
    let response = cfg
        .response
        .clone()
        .ok_or_else(|| Error::Config("--response is required".into()))?;
    let family: Family = cfg.family.as_deref().unwrap_or("gaussian").parse()?;
    let dataset = load_csv(path, &CsvSchema::new(response))?;
    if dataset.rows_rejected > 0 {
        log::warn!("{} row(s) with missing cells skipped", dataset.rows_rejected);
    }
    let intercept = cfg.intercept.unwrap_or(false);
    let x = dataset.design(intercept)?;
    let y = dataset.response_vector(family.response_kind())?;
    let mut names = dataset.feature_names();
    if intercept {
        names.insert(0, "(intercept)".into());
    }
    Ok(Loaded {
        dataset,
        x,
        y,
        family,
        names,
        checksum: file_sha256(path)?,
    })
}

fn irls(cfg: &RunConfig) -> IrlsOptions {
    let d = IrlsOptions::default();
    IrlsOptions {
        tol: cfg.tol.unwrap_or(d.tol),
        max_iter: cfg.max_iter.unwrap_or(d.max_iter),
    }
}

fn emit_json(value: &serde_json::Value, dir: Option<&Path>, file: &str) -> Result<()> {
    match dir {
        Some(d) => {
            fs::create_dir_all(d)?;
            let f = BufWriter::new(File::create(d.join(file))?);
            serde_json::to_writer_pretty(f, value)?;
        }
        None => {
            let mut out = std::io::stdout().lock();
            let written = serde_json::to_writer_pretty(&mut out, value)
                .map_err(std::io::Error::from)
                .and_then(|()| writeln!(out));
            match written {
                Err(e) if e.kind() != std::io::ErrorKind::BrokenPipe => return Err(e.into()),
                _ => {}
            }
        }
    }
    Ok(())
}

fn header(command: &str, config: &impl Serialize, checksum: Option<&str>) -> serde_json::Value {
    json!({
        "tool": "srb",
        "version": env!("CARGO_PKG_VERSION"),
        "command": command,
        "config": config,
        "data_sha256": checksum,
    })
}

fn fit_summary(f: &FittedModel, l: &Loaded) -> Result<serde_json::Value> {
    let rs = centered_residuals(f, &l.y)?;
    let h = &f.hat_diag;
    Ok(json!({
        "family": f.family.name(),
        "n": l.x.n(),
        "p": l.x.p(),
        "rows_rejected": l.dataset.rows_rejected,
        "columns": l.names,
        "beta_hat": f.beta_hat.as_slice(),
        "iterations": f.iterations,
        "converged": f.converged,
        "sigma2_hat": rs.sigma2_hat,
        "hat_diagonal": { "min": h.min(), "max": h.max(), "mean": h.mean() },
    }))
}

fn cmd_fit(args: &FitArgs) -> Result<()> {
    let cfg = resolve(flags_of(&args.data), args.data.config.as_deref())?;
    let l = load(&args.data.data, &cfg)?;
    let f = fit(&l.x, &l.y, l.family, irls(&cfg))?;
    let mut out = header("fit", &cfg, Some(&l.checksum));
    out["fit"] = fit_summary(&f, &l)?;
    emit_json(&out, args.data.output.as_deref(), "fit.json")
}

/// Subsample size implied by a resolved config.
fn subsample_of(cfg: &RunConfig) -> SubsampleSize {
    match (cfg.method, cfg.b, cfg.gamma) {
        (Some(MethodArg::Rb), _, _) => SubsampleSize::Full,
        (_, Some(b), _) => SubsampleSize::Fixed(b),
        (_, None, Some(g)) => SubsampleSize::Exponent(g),
        _ => SubsampleSize::Full,
    }
}

fn write_vector_csv(path: &Path, header: &str, values: &[f64]) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(["replicate", header])?;
    for (j, v) in values.iter().enumerate() {
        w.write_record([j.to_string(), v.to_string()])?;
    }
    w.flush()?;
    Ok(())
}

fn write_betas_csv(path: &Path, names: &[String], res: &BootstrapResult) -> Result<()> {
    let Some(betas) = &res.betas_star else {
        return Ok(());
    };
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(std::iter::once("replicate").chain(names.iter().map(String::as_str)))?;
    for (j, row) in betas.row_iter().enumerate() {
        w.write_record(std::iter::once(j.to_string()).chain(row.iter().map(|v| v.to_string())))?;
    }
    w.flush()?;
    Ok(())
}

fn cmd_bootstrap(args: &BootstrapArgs) -> Result<()> {
    let mut flags = flags_of(&args.data);
    flags.method = args.method;
    flags.gamma = args.gamma;
    flags.b = args.b;
    flags.resamples = args.resamples;
    flags.level = args.level;
    flags.seed = args.seed;
    flags.emit_betas = args.emit_betas.then_some(true);
    let cfg = resolve(flags, args.data.config.as_deref())?;
    let l = load(&args.data.data, &cfg)?;
    let f = fit(&l.x, &l.y, l.family, irls(&cfg))?;
    let rs = centered_residuals(&f, &l.y)?;
    let mut bc = BootstrapConfig::new(
        subsample_of(&cfg),
        cfg.resamples.unwrap_or(100),
        cfg.level.unwrap_or(0.95),
        cfg.seed.unwrap_or(0),
    );
    bc.keep_betas = cfg.emit_betas.unwrap_or(false);
    let res = run_bootstrap(&f, &l.x, &rs, &bc)?;

    let mut out = header("bootstrap", &cfg, Some(&l.checksum));
    out["result"] = json!({
        "method": if res.b == res.n { "rb" } else { "srb" },
        "q_hat": res.q_hat,
        "level": bc.level,
        "resamples": bc.resamples,
        "n": res.n,
        "b": res.b,
        "beta_hat": f.beta_hat.as_slice(),
        "columns": l.names,
        "sigma2_hat": rs.sigma2_hat,
        "overhead_secs": res.overhead_secs,
        "loop_secs": res.loop_secs,
        "per_replicate_secs": res.per_replicate_secs,
        "warnings": res.warnings,
    });
    if let Some(dir) = args.data.output.as_deref() {
        fs::create_dir_all(dir)?;
        write_vector_csv(&dir.join("roots.csv"), "root", &res.roots)?;
        write_betas_csv(&dir.join("betas.csv"), &l.names, &res)?;
    }
    emit_json(&out, args.data.output.as_deref(), "bootstrap.json")
}

fn cmd_simulate(args: &SimulateArgs) -> Result<()> {
    let mut design: SimDesign = read_structured(&args.design)?;
    if let Some(s) = args.seed {
        design.master_seed = s;
    }
    fs::create_dir_all(&args.output)?;
    let mut long = LongCsvWriter::new(File::create(args.output.join("long.csv"))?)?;
    let result = run_experiment_with(&design, |r| {
        long.write(r)?;
        long.flush()
    });
    let report = result?;
    report.write_summary_csv(File::create(args.output.join("report.csv"))?)?;
    let mut out = header("simulate", &design, Some(&file_sha256(&args.design)?));
    out["report"] = serde_json::to_value(&report)?;
    emit_json(&out, Some(&args.output), "report.json")
}

fn cmd_preprocess(args: &PreprocessArgs) -> Result<()> {
    let ds = load_csv(&args.data, &CsvSchema::new(&args.response).inferring_binary())?;
    let pre = preprocess(&ds, args.classes, args.vif_threshold)?;
    fs::create_dir_all(&args.output)?;
    write_csv(&pre.dataset, args.output.join("pruned.csv"))?;
    let config = json!({
        "response": args.response,
        "classes": args.classes,
        "vif_threshold": args.vif_threshold,
    });
    let mut out = header("preprocess", &config, Some(&file_sha256(&args.data)?));
    out["rows_in"] = json!(ds.nrows());
    out["rows_rejected"] = json!(ds.rows_rejected);
    out["rows_out"] = json!(pre.dataset.nrows());
    out["features_out"] = json!(pre.dataset.feature_names());
    out["final_vifs"] = json!(pre.final_vifs);
    out["prune_log"] = serde_json::to_value(&pre.log)?;
    emit_json(&out, Some(&args.output), "prune_log.json")
}

fn cmd_benchmark(args: &BenchmarkArgs) -> Result<()> {
    let report = speed_benchmark(args.n, args.p, args.gamma, args.resamples, args.seed)?;
    let config = json!({
        "n": args.n, "p": args.p, "gamma": args.gamma, "resamples": args.resamples, "seed": args.seed,
    });
    let mut out = header("benchmark", &config, None);
    out["report"] = serde_json::to_value(&report)?;
    emit_json(&out, args.output.as_deref(), "benchmark.json")
}

/// Runs a parsed command line.
pub fn execute(cli: &Cli) -> Result<()> {
    if let Some(t) = cli.threads {
        // fails only if a pool already exists, e.g. when called twice in-process
        if rayon::ThreadPoolBuilder::new().num_threads(t).build_global().is_err() {
            log::debug!("thread pool already initialised");
        }
    }
    match &cli.command {
        Command::Fit(a) => cmd_fit(a),
        Command::Bootstrap(a) => cmd_bootstrap(a),
        Command::Simulate(a) => cmd_simulate(a),
        Command::Preprocess(a) => cmd_preprocess(a),
        Command::Benchmark(a) => cmd_benchmark(a),
    }
}

pub fn exit_code(err: &Error) -> i32 {
    if err.is_numerical() {
        EXIT_NUMERICAL
    } else {
        EXIT_USAGE
    }
}

/// Parses `args`, runs the command and returns the process exit code.
pub fn main_with<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
        }
    };
    let level = match cli.verbose {
        0 => "warn",
        1 => "info",
        _ => "debug",
    };
    let _ = env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level)).try_init();
    match execute(&cli) {
        Ok(()) => EXIT_OK,
        Err(e) => {
            eprintln!("error: {e}");
            exit_code(&e)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn precedence_flags_over_file_over_defaults() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("run.toml");
        fs::write(&path, "resamples = 50\nlevel = 0.9\nseed = 7\n").unwrap();
        let flags = RunConfig {
            seed: Some(9),
            ..RunConfig::default()
        };
        let cfg = resolve(flags, Some(&path)).unwrap();
        assert_eq!(cfg.seed, Some(9));
        assert_eq!(cfg.resamples, Some(50));
        assert_eq!(cfg.level, Some(0.9));
        assert_eq!(cfg.tol, Some(1e-8));
        assert_eq!(subsample_of(&cfg), SubsampleSize::Exponent(0.7));

        fs::write(&path, "b = 40\n").unwrap();
        let flags = RunConfig {
            gamma: Some(0.8),
            ..RunConfig::default()
        };
        let cfg = resolve(flags, Some(&path)).unwrap();
        assert_eq!(subsample_of(&cfg), SubsampleSize::Exponent(0.8));
        let cfg = resolve(RunConfig::default(), Some(&path)).unwrap();
        assert_eq!(subsample_of(&cfg), SubsampleSize::Fixed(40));
    }

    #[test]
    fn unknown_config_key_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("run.json");
        fs::write(&path, r#"{"resampels": 5}"#).unwrap();
        assert!(RunConfig::load(&path).is_err());
    }

    #[test]
    fn subsample_resolution() {
        let mut cfg = RunConfig::defaults();
        cfg.method = Some(MethodArg::Rb);
        assert_eq!(subsample_of(&cfg), SubsampleSize::Full);
        cfg.method = Some(MethodArg::Srb);
        cfg.b = Some(30);
        assert_eq!(subsample_of(&cfg), SubsampleSize::Fixed(30));
    }

    #[test]
    fn usage_errors_exit_two() {
        assert_eq!(main_with(["srb", "fit"]), EXIT_USAGE);
        assert_eq!(main_with(["srb", "nonsense"]), EXIT_USAGE);
    }
}

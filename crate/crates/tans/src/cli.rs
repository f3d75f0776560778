//! `tans` command line.
//!
//! Exit status: 0 on success, 1 on a domain or validation error, 2 on a
//! usage error. `TANS_SEED` overrides the seed when `--seed` is absent.

use std::ffi::OsString;
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use tans_core::dp::{sc_value_iteration, DpConfig};
use tans_core::greedy::{thm4_bounds, CostParams, DEFAULT_T_UP};
use tans_core::signals::BinaryHmmParams;

use crate::harness::{self, ExperimentOutput};
use crate::output::{self, Format, Manifest};
use crate::spec::{
    AcfSpec, CostSpec, ExperimentKind, ExperimentSpec, MeasureSpec, ModelKind, OutputSpec, ReconSpec, SamplerSpec,
    SeriesSpec, SignSpec, SignalSpec, Sweep,
};
use crate::trace_io;

#[derive(Debug, Parser)]
#[command(
    name = "tans",
    version,
    about = "Time-stampless adaptive nonuniform sampling toolkit"
)]
pub struct Cli {
    /// Seed (base seed for multi-seed runs); overrides TANS_SEED
    #[arg(long, global = true, help_heading = "Global options")]
    pub seed: Option<u64>,
    /// Output file (default: stdout, or the spec's [output] csv)
    #[arg(long, global = true, help_heading = "Global options")]
    pub out: Option<PathBuf>,
    /// Output format
    #[arg(long, global = true, value_enum, help_heading = "Global options")]
    pub format: Option<Format>,
    /// Worker threads (default: all cores)
    #[arg(long, global = true, help_heading = "Global options")]
    pub jobs: Option<usize>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Generate a signal trace
    Gen(GenArgs),
    /// Sample one trace, reconstruct it and report rate and distortion
    Sample(SampleArgs),
    /// Run an experiment spec file
    Run(RunArgs),
    /// Solve the binary source-coding DP by value iteration
    SolveDp(SolveDpArgs),
    /// Rate-distortion bounds of the greedy Markovian sampler
    Bounds(BoundsArgs),
    /// Analytic rate-distortion curves over a rho sweep
    Curves(CurvesArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ModelArg {
    Ar1,
    MarkovAr1,
    BinaryHmm,
}

#[derive(Debug, Clone, Args)]
pub struct ModelArgs {
    /// Signal model
    #[arg(long, value_enum, default_value = "ar1")]
    pub model: ModelArg,
    /// AR(1) coefficient
    #[arg(long)]
    pub alpha: Option<f64>,
    /// AR coefficient in regime 0
    #[arg(long)]
    pub alpha0: Option<f64>,
    /// AR coefficient in regime 1
    #[arg(long)]
    pub alpha1: Option<f64>,
    /// Symmetric switching probability
    #[arg(long)]
    pub p: Option<f64>,
    /// Switching probability 0 -> 1
    #[arg(long)]
    pub p01: Option<f64>,
    /// Switching probability 1 -> 0
    #[arg(long)]
    pub p10: Option<f64>,
    /// Binary chain: probability of leaving state 0
    #[arg(long)]
    pub eps0: Option<f64>,
    /// Binary chain: probability of leaving state 1
    #[arg(long)]
    pub eps1: Option<f64>,
    /// Trace length
    #[arg(long, default_value_t = 100_000)]
    pub len: usize,
}

impl ModelArgs {
    fn signal(&self, seed: u64) -> SignalSpec {
        SignalSpec {
            model: match self.model {
                ModelArg::Ar1 => ModelKind::Ar1,
                ModelArg::MarkovAr1 => ModelKind::MarkovAr1,
                ModelArg::BinaryHmm => ModelKind::BinaryHmm,
            },
            alpha: self.alpha,
            alpha0: self.alpha0,
            alpha1: self.alpha1,
            p: self.p,
            p01: self.p01,
            p10: self.p10,
            eps0: self.eps0,
            eps1: self.eps1,
            length: self.len,
            seeds: Some(vec![seed]),
            seed_count: 1,
            base_seed: seed,
        }
    }
}

#[derive(Debug, Clone, Args)]
pub struct GenArgs {
    #[command(flatten)]
    pub model: ModelArgs,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum SamplerArg {
    Uniform,
    Constant,
    GreedyAr1,
    GreedyMarkov,
    GenieGreedy,
    Dp,
    Adp,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ReconArg {
    Glp,
    Clc,
    Nclc,
    MostProbable,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum AcfArg {
    Model,
    Estimated,
    Conditional,
    KnownRegime,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum MeasureArg {
    Mse,
    Hamming,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum SignArg {
    Literal,
    Reward,
}

#[derive(Debug, Clone, Args)]
pub struct SampleArgs {
    #[command(flatten)]
    pub model: ModelArgs,
    /// Read the trace from this CSV instead of generating it
    #[arg(long)]
    pub trace: Option<PathBuf>,
    /// Sampling function
    #[arg(long, value_enum)]
    pub sampler: SamplerArg,
    /// Uniform sampling rate in (0, 1]
    #[arg(long)]
    pub rate: Option<f64>,
    /// Constant increment
    #[arg(long)]
    pub increment: Option<usize>,
    /// Rate award
    #[arg(long)]
    pub rho: Option<f64>,
    /// Largest increment searched
    #[arg(long, default_value_t = DEFAULT_T_UP)]
    pub t_up: usize,
    /// Error variance charged for an unknown regime
    #[arg(long, default_value_t = 1.0)]
    pub sigma_max_sq: f64,
    /// Samples in the sampling state (Markov samplers)
    #[arg(long, default_value_t = 10)]
    pub m: usize,
    /// Discount factor (dp, adp)
    #[arg(long)]
    pub beta: Option<f64>,
    /// Quality scale (adp)
    #[arg(long)]
    pub gamma: Option<f64>,
    /// Sign of the quality term (adp)
    #[arg(long, value_enum, default_value = "literal")]
    pub sign: SignArg,
    /// Largest DP increment (default: the stationarity cap)
    #[arg(long)]
    pub t_max: Option<usize>,
    /// Allow --t-max above the stationarity cap
    #[arg(long)]
    pub override_t_max: bool,
    /// Reconstruction method
    #[arg(long, value_enum, default_value = "glp")]
    pub recon: ReconArg,
    /// GLP order
    #[arg(long, default_value_t = 1)]
    pub recon_m: usize,
    /// Autocorrelation used by GLP (default: model for ar1, conditional for markov-ar1)
    #[arg(long, value_enum)]
    pub acf: Option<AcfArg>,
    /// Distortion measure (default: hamming for binary signals, mse otherwise)
    #[arg(long, value_enum)]
    pub measure: Option<MeasureArg>,
    /// Leave sample times out of the distortion average
    #[arg(long)]
    pub exclude_sample_times: bool,
}

#[derive(Debug, Clone, Args)]
pub struct RunArgs {
    /// Experiment spec (TOML)
    #[arg(long)]
    pub spec: PathBuf,
}

#[derive(Debug, Clone, Args)]
pub struct SolveDpArgs {
    /// Probability of leaving state 0
    #[arg(long)]
    pub eps0: f64,
    /// Probability of leaving state 1
    #[arg(long)]
    pub eps1: f64,
    /// Rate award
    #[arg(long)]
    pub rho: f64,
    /// Discount factor in (0, 1)
    #[arg(long)]
    pub beta: f64,
    /// Largest increment (default: the stationarity cap)
    #[arg(long)]
    pub t_max: Option<usize>,
    /// Allow --t-max above the stationarity cap
    #[arg(long)]
    pub override_t_max: bool,
}

#[derive(Debug, Clone, Args)]
pub struct ChainArgs {
    /// AR coefficient in regime 0
    #[arg(long)]
    pub alpha0: f64,
    /// AR coefficient in regime 1
    #[arg(long)]
    pub alpha1: f64,
    /// Symmetric switching probability
    #[arg(long)]
    pub p: f64,
    /// Largest increment searched
    #[arg(long, default_value_t = DEFAULT_T_UP)]
    pub t_up: usize,
    /// Error variance charged for an unknown regime
    #[arg(long, default_value_t = 1.0)]
    pub sigma_max_sq: f64,
}

#[derive(Debug, Clone, Args)]
pub struct BoundsArgs {
    #[command(flatten)]
    pub chain: ChainArgs,
    /// Rate award
    #[arg(long)]
    pub rho: f64,
    /// Lower bound on the estimator error probability
    #[arg(long, default_value_t = 0.0)]
    pub pe_low: f64,
    /// Upper bound on the estimator error probability
    #[arg(long, default_value_t = 0.0)]
    pub pe_up: f64,
}

#[derive(Debug, Clone, Args)]
pub struct CurvesArgs {
    #[command(flatten)]
    pub chain: ChainArgs,
    /// Estimator error probabilities, one curve each
    #[arg(long, value_delimiter = ',', default_value = "0")]
    pub pe: Vec<f64>,
    /// Smallest rho
    #[arg(long, default_value_t = 0.1)]
    pub rho_min: f64,
    /// Largest rho
    #[arg(long, default_value_t = 100.0)]
    pub rho_max: f64,
    /// Number of log-spaced rho values
    #[arg(long, default_value_t = 16)]
    pub count: usize,
}

/// Parse `args`, run, and return the process exit status.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let args: Vec<OsString> = args.into_iter().map(Into::into).collect();
    let cli = match Cli::try_parse_from(&args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return e.exit_code();
        }
    };
    let echo: Vec<String> = args.iter().skip(1).map(|a| a.to_string_lossy().into_owned()).collect();
    match run(&cli, &echo) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e:#}");
            1
        }
    }
}

fn env_seed() -> Result<Option<u64>> {
    match std::env::var("TANS_SEED") {
        Ok(s) => Ok(Some(
            s.trim()
                .parse()
                .with_context(|| format!("TANS_SEED: `{s}` is not a seed"))?,
        )),
        Err(_) => Ok(None),
    }
}

fn open_out(path: Option<&Path>) -> Result<Box<dyn Write>> {
    Ok(match path {
        Some(p) => {
            if let Some(dir) = p.parent().filter(|d| !d.as_os_str().is_empty()) {
                std::fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
            }
            Box::new(BufWriter::new(
                File::create(p).with_context(|| format!("creating {}", p.display()))?,
            ))
        }
        None => Box::new(BufWriter::new(std::io::stdout().lock())),
    })
}

fn write_value<T: Serialize>(out: Option<&Path>, format: Format, rows: &[T], single: bool) -> Result<()> {
    let mut w = open_out(out)?;
    match format {
        Format::Csv => trace_io::write_csv(&mut w, rows)?,
        Format::Json => {
            if single && rows.len() == 1 {
                serde_json::to_writer_pretty(&mut w, &rows[0])?;
            } else {
                serde_json::to_writer_pretty(&mut w, rows)?;
            }
            writeln!(w)?;
        }
    }
    w.flush()?;
    Ok(())
}

pub fn run(cli: &Cli, args: &[String]) -> Result<()> {
    let seed = match cli.seed {
        Some(s) => Some(s),
        None => env_seed()?,
    };
    let out = cli.out.as_deref();
    let format = cli.format.unwrap_or_default();
    match &cli.command {
        Command::Gen(a) => {
            let signal = a.model.signal(seed.unwrap_or(1));
            let model = signal.model()?;
            if signal.length == 0 {
                bail!("--len: must be at least 1");
            }
            let trace = harness::generate(&model, signal.length, signal.base_seed)?;
            write_value(out, format, &trace_io::trace_rows(&trace), false)
        }
        Command::Sample(a) => sample(a, seed.unwrap_or(1), out, format),
        Command::Run(a) => run_spec(a, seed, out, cli.format, cli.jobs, args),
        Command::SolveDp(a) => solve_dp(a, out, cli.format.unwrap_or(Format::Json)),
        Command::Bounds(a) => {
            let params = chain_params(&a.chain)?;
            let cost = CostParams::with_limits(a.rho, a.chain.sigma_max_sq, a.chain.t_up).context("--rho/--t-up")?;
            let b = thm4_bounds(&params, &cost, a.pe_low, a.pe_up).context("--pe-low/--pe-up")?;
            let row = BoundsRow::from_bounds(a.rho, a.pe_low, a.pe_up, &b);
            write_value(out, cli.format.unwrap_or(Format::Json), &[row], true)
        }
        Command::Curves(a) => {
            let spec = ExperimentSpec {
                kind: ExperimentKind::RateDistortion,
                signal: SignalSpec {
                    model: ModelKind::MarkovAr1,
                    alpha: None,
                    alpha0: Some(a.chain.alpha0),
                    alpha1: Some(a.chain.alpha1),
                    p: Some(a.chain.p),
                    p01: None,
                    p10: None,
                    eps0: None,
                    eps1: None,
                    length: 2,
                    seeds: Some(vec![0]),
                    seed_count: 1,
                    base_seed: 0,
                },
                cost: CostSpec {
                    rho: Some(Sweep::LogRange {
                        min: a.rho_min,
                        max: a.rho_max,
                        count: a.count,
                    }),
                    t_up: a.chain.t_up,
                    sigma_max_sq: a.chain.sigma_max_sq,
                },
                sampler: None,
                reconstruction: None,
                series: vec![],
                analytic: Some(crate::spec::AnalyticSpec { pe: a.pe.clone() }),
                output: OutputSpec::default(),
            };
            spec.validate()?;
            write_value(out, format, &harness::analytic_curves(&spec)?, false)
        }
    }
}

fn chain_params(c: &ChainArgs) -> Result<tans_core::signals::MarkovAr1Params> {
    tans_core::signals::MarkovAr1Params::symmetric(c.alpha0, c.alpha1, c.p).context("--alpha0/--alpha1/--p")
}

#[derive(Debug, Serialize)]
struct BoundsRow {
    rho: f64,
    pe_low: f64,
    pe_up: f64,
    t0_low: usize,
    t0_up: usize,
    t1_low: usize,
    t1_up: usize,
    d0_low: f64,
    d0_up: f64,
    d1_low: f64,
    d1_up: f64,
    rate_low: f64,
    rate_up: f64,
    dist_low: f64,
    dist_up: f64,
}

impl BoundsRow {
    fn from_bounds(rho: f64, pe_low: f64, pe_up: f64, b: &tans_core::greedy::RdBounds) -> Self {
        Self {
            rho,
            pe_low,
            pe_up,
            t0_low: b.t0_low,
            t0_up: b.t0_up,
            t1_low: b.t1_low,
            t1_up: b.t1_up,
            d0_low: b.d0_low,
            d0_up: b.d0_up,
            d1_low: b.d1_low,
            d1_up: b.d1_up,
            rate_low: b.rate_low,
            rate_up: b.rate_up,
            dist_low: b.dist_low,
            dist_up: b.dist_up,
        }
    }
}

/// `⌊0.2 min(1/ε₀, 1/ε₁)⌋`, at least 1.
pub fn dp_t_max_cap(eps0: f64, eps1: f64) -> usize {
    ((0.2 * (1.0 / eps0).min(1.0 / eps1)).floor() as usize).max(1)
}

#[derive(Debug, Serialize)]
struct PolicyJson {
    rho: f64,
    beta: f64,
    t_max: usize,
    #[serde(rename = "J")]
    j: [f64; 2],
    #[serde(rename = "T")]
    t: [usize; 2],
    iterations: usize,
    residual: f64,
    converged: bool,
}

fn solve_dp(a: &SolveDpArgs, out: Option<&Path>, format: Format) -> Result<()> {
    let params = BinaryHmmParams::new(a.eps0, a.eps1).context("--eps0/--eps1")?;
    let t_max = a.t_max.unwrap_or_else(|| dp_t_max_cap(a.eps0, a.eps1));
    let cfg = DpConfig::new(a.beta, t_max)
        .context("--beta/--t-max")?
        .with_override(a.override_t_max);
    let policy = sc_value_iteration(&params, a.rho, &cfg).context("--rho/--t-max")?;
    let row = PolicyJson {
        rho: a.rho,
        beta: a.beta,
        t_max,
        j: policy.j_values,
        t: policy.increments,
        iterations: policy.iterations,
        residual: policy.residual,
        converged: policy.converged,
    };
    match format {
        Format::Json => write_value(out, format, &[row], true),
        Format::Csv => {
            #[derive(Serialize)]
            struct Flat {
                rho: f64,
                beta: f64,
                t_max: usize,
                j0: f64,
                j1: f64,
                t0: usize,
                t1: usize,
                iterations: usize,
                residual: f64,
                converged: bool,
            }
            let flat = Flat {
                rho: row.rho,
                beta: row.beta,
                t_max: row.t_max,
                j0: row.j[0],
                j1: row.j[1],
                t0: row.t[0],
                t1: row.t[1],
                iterations: row.iterations,
                residual: row.residual,
                converged: row.converged,
            };
            write_value(out, format, &[flat], true)
        }
    }
}

fn sample(a: &SampleArgs, seed: u64, out: Option<&Path>, format: Format) -> Result<()> {
    let mut signal = a.model.signal(seed);
    let model = signal.model()?;
    let trace = match &a.trace {
        Some(p) => {
            let f = File::open(p).with_context(|| format!("opening {}", p.display()))?;
            let tr = trace_io::read_trace(f, seed).with_context(|| format!("reading {}", p.display()))?;
            signal.length = tr.len();
            tr
        }
        None => harness::generate(&model, signal.length, seed)?,
    };
    let markov = a.model.model == ModelArg::MarkovAr1;
    let sampler = match a.sampler {
        SamplerArg::Uniform => SamplerSpec::Uniform {
            rates: Sweep::List(vec![a.rate.context("--rate: required by the uniform sampler")?]),
        },
        SamplerArg::Constant => SamplerSpec::Constant {
            increment: a.increment.context("--increment: required by the constant sampler")?,
        },
        SamplerArg::GreedyAr1 => SamplerSpec::GreedyAr1,
        SamplerArg::GreedyMarkov => SamplerSpec::GreedyMarkov { m: a.m },
        SamplerArg::GenieGreedy => SamplerSpec::GenieGreedy,
        SamplerArg::Dp => SamplerSpec::DpSourceCoding {
            beta: a.beta.context("--beta: required by the dp sampler")?,
            t_max: a
                .t_max
                .unwrap_or_else(|| dp_t_max_cap(a.model.eps0.unwrap_or(1.0), a.model.eps1.unwrap_or(1.0))),
            override_t_max: a.override_t_max,
        },
        SamplerArg::Adp => SamplerSpec::AdpMarkov {
            m: a.m,
            beta: a.beta.context("--beta: required by the adp sampler")?,
            gamma: a.gamma.context("--gamma: required by the adp sampler")?,
            sign: match a.sign {
                SignArg::Reward => SignSpec::Reward,
                SignArg::Literal => SignSpec::Literal,
            },
            draws: None,
            draw_seed: 0,
        },
    };
    let acf = a.acf.map_or(
        if markov { AcfSpec::Conditional } else { AcfSpec::Model },
        |x| match x {
            AcfArg::Model => AcfSpec::Model,
            AcfArg::Estimated => AcfSpec::Estimated,
            AcfArg::Conditional => AcfSpec::Conditional,
            AcfArg::KnownRegime => AcfSpec::KnownRegime,
        },
    );
    let reconstruction = match a.recon {
        ReconArg::Glp => ReconSpec::Glp {
            m: a.recon_m,
            acf,
            window: 1000,
            max_lag: 200,
        },
        ReconArg::Clc => ReconSpec::Clc,
        ReconArg::Nclc => ReconSpec::Nclc,
        ReconArg::MostProbable => ReconSpec::MostProbable,
    };
    let series = SeriesSpec {
        name: None,
        sampler,
        reconstruction,
        measure: a.measure.map(|m| match m {
            MeasureArg::Mse => MeasureSpec::Mse,
            MeasureArg::Hamming => MeasureSpec::Hamming,
        }),
        exclude_sample_times: a.exclude_sample_times,
    };
    let spec = ExperimentSpec {
        kind: ExperimentKind::RateDistortion,
        signal,
        cost: CostSpec {
            rho: a.rho.map(|r| Sweep::List(vec![r])),
            t_up: a.t_up,
            sigma_max_sq: a.sigma_max_sq,
        },
        sampler: None,
        reconstruction: None,
        series: vec![series.clone()],
        analytic: None,
        output: OutputSpec::default(),
    };
    spec.validate()
        .map_err(|e| anyhow::anyhow!("{}", flag_names(&format!("{e:#}"))))?;
    let point = &harness::prepare_points(&spec, &series)?[0];
    let run = harness::run_seed(&model, &series, point, &trace)?;
    harness::check_replay(&model, &series, point, &trace, &run.set)?;
    write_value(out, format, &trace_io::recon_rows(&trace.values, &run.recon), false)?;
    let o = &run.outcome;
    eprintln!(
        "sampler={} samples={} rate={} distortion={}{}",
        run.set.sampler,
        o.samples,
        o.rate,
        o.distortion,
        o.cost.map(|c| format!(" cost={c}")).unwrap_or_default()
    );
    Ok(())
}

/// Map spec field paths onto the flags that set them.
fn flag_names(msg: &str) -> String {
    msg.replace("series[0]: ", "")
        .replace("signal.", "--")
        .replace("cost.", "--")
        .replace("sampler.", "--")
        .replace("reconstruction.", "--recon-")
        .replace("_", "-")
}

fn run_spec(
    a: &RunArgs,
    seed: Option<u64>,
    out: Option<&Path>,
    format: Option<Format>,
    jobs: Option<usize>,
    args: &[String],
) -> Result<()> {
    let mut spec = ExperimentSpec::load(&a.spec)?;
    if let Some(s) = seed {
        spec.signal.override_seed(s);
    }
    if jobs == Some(0) {
        bail!("--jobs: must be at least 1");
    }
    let target: Option<PathBuf> = out.map(Path::to_path_buf).or_else(|| spec.output.csv.clone());
    let result: ExperimentOutput = harness::run_experiment(&spec, jobs)?;
    let format = format.unwrap_or_default();
    let mut w = open_out(target.as_deref())?;
    output::write_output(&mut w, &result, format)?;
    w.flush()?;
    if let Some(path) = &target {
        output::write_manifest(&output::manifest_path(path), &Manifest::new(args, &spec, &result))?;
    }
    Ok(())
}

use std::collections::BTreeMap;
use std::fs;
use std::io::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{anyhow, Context};
use clap::{Args, Parser, Subcommand, ValueEnum};
use log::{info, warn};

use minweave::experiment::{self, run_point, run_sweep, ExperimentConfig, NetworkSpec};
use minweave::topology::{to_dot, to_json, validate_network, DeltaKind, FlattenMethod};
use minweave::workload::{HotspotPreset, HotspotSpec, Pattern, WorkloadSpec};
use minweave::Error;

#[derive(Parser, Debug)]
#[command(
    name = "minweave",
    version,
    about = "Build and simulate multistage interconnection networks"
)]
struct Cli {
    /// More log output (repeatable).
    #[arg(short, long, action = clap::ArgAction::Count, global = true)]
    verbose: u8,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Build a topology, validate it and write JSON + DOT.
    Build(BuildArgs),
    /// Run one simulation and write stats, message log and histograms.
    Sim(ExpArgs),
    /// Sweep injection rates and write latency/throughput curves.
    Sweep(ExpArgs),
    /// Sweep and write the comparison table plus the power-proxy table.
    Compare(ExpArgs),
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
enum Kind {
    Omega,
    Butterfly,
    Baseline,
    GeneralizedCube,
    Benes,
    Clos,
    Flattened,
    MfButterfly,
    MfBaseline,
    MetaFlattened,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
enum Base {
    Omega,
    Butterfly,
    Baseline,
    GeneralizedCube,
}

impl From<Base> for DeltaKind {
    fn from(b: Base) -> Self {
        match b {
            Base::Omega => DeltaKind::Omega,
            Base::Butterfly => DeltaKind::Butterfly,
            Base::Baseline => DeltaKind::Baseline,
            Base::GeneralizedCube => DeltaKind::GeneralizedCube,
        }
    }
}

fn parse_method(s: &str) -> Result<FlattenMethod, String> {
    serde_json::from_value(serde_json::Value::String(s.to_string()))
        .map_err(|_| format!("unknown method {s:?} (all, grouped)"))
}

#[derive(Args, Debug, Clone)]
struct NetworkArgs {
    /// Terminal count (Clos: ingress switch inputs).
    #[arg(long, default_value_t = 32)]
    n: usize,
    /// Switch radix for delta networks.
    #[arg(long, default_value_t = 2)]
    k: usize,
    /// Clos middle switches.
    #[arg(long, default_value_t = 7)]
    m: usize,
    /// Clos ingress/egress switches.
    #[arg(long, default_value_t = 8)]
    r: usize,
    /// Meta-flatten method: all (every intermediate stage) or grouped (pairs).
    #[arg(long, default_value = "all", value_parser = parse_method)]
    method: FlattenMethod,
    /// Parent network for flattened / meta-flattened.
    #[arg(long, value_enum, default_value_t = Base::Butterfly)]
    base: Base,
}

impl NetworkArgs {
    fn spec(&self, kind: Kind) -> NetworkSpec {
        let (n, k, method) = (self.n, self.k, self.method);
        match kind {
            Kind::Omega => NetworkSpec::Omega { n, k },
            Kind::Butterfly => NetworkSpec::Butterfly { n, k },
            Kind::Baseline => NetworkSpec::Baseline { n, k },
            Kind::GeneralizedCube => NetworkSpec::GeneralizedCube { n, k },
            Kind::Benes => NetworkSpec::Benes { n },
            Kind::Clos => NetworkSpec::Clos {
                n,
                m: self.m,
                r: self.r,
            },
            Kind::Flattened => NetworkSpec::Flattened {
                base: self.base.into(),
                n,
                k,
            },
            Kind::MfButterfly => NetworkSpec::MfButterfly { n, method },
            Kind::MfBaseline => NetworkSpec::MfBaseline { n, method },
            Kind::MetaFlattened => NetworkSpec::MetaFlattened {
                base: self.base.into(),
                n,
                k,
                method,
            },
        }
    }
}

#[derive(Args, Debug)]
struct BuildArgs {
    #[arg(value_enum)]
    kind: Kind,
    #[command(flatten)]
    net: NetworkArgs,
    #[arg(long, default_value = "out")]
    out: PathBuf,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
enum WorkloadKind {
    Uniform,
    Exponential,
    Normal,
    Fft,
    Waternsq,
    Waterspatial,
}

impl WorkloadKind {
    fn pattern(self, sigma: Option<f64>) -> Pattern {
        let hot = |p| Pattern::Hotspot(HotspotSpec::preset(p));
        match self {
            Self::Uniform => Pattern::Uniform,
            Self::Exponential => Pattern::Exponential,
            Self::Normal => Pattern::Normal { sigma },
            Self::Fft => hot(HotspotPreset::FftProxy),
            Self::Waternsq => hot(HotspotPreset::WaternsqProxy),
            Self::Waterspatial => hot(HotspotPreset::WaterspatialProxy),
        }
    }
}

/// Flags shared by `sim`, `sweep` and `compare`. Every flag overrides the
/// matching config field.
#[derive(Args, Debug)]
struct ExpArgs {
    /// JSON experiment config.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Named preset (paper32).
    #[arg(long, conflicts_with = "config")]
    preset: Option<String>,
    /// Seed; falls back to MINWEAVE_SEED, then the config.
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    out: Option<PathBuf>,
    /// Worker threads (default: all cores).
    #[arg(long)]
    jobs: Option<usize>,
    /// Replace the network list with one network.
    #[arg(long, value_enum)]
    network: Option<Kind>,
    #[command(flatten)]
    net: NetworkArgs,
    /// Replace the workload list with one synthetic workload.
    #[arg(long, value_enum)]
    workload: Option<WorkloadKind>,
    /// Standard deviation for the normal workload.
    #[arg(long)]
    sigma: Option<f64>,
    /// Replace the workload list with a trace file.
    #[arg(long, conflicts_with = "workload")]
    trace: Option<PathBuf>,
    /// Replace the rate list (comma separated).
    #[arg(long, value_delimiter = ',')]
    rates: Option<Vec<f64>>,
    #[arg(long)]
    warmup: Option<u64>,
    #[arg(long)]
    measure: Option<u64>,
    #[arg(long)]
    buffer_depth: Option<usize>,
}

/// Failure classes mapped to exit codes.
enum Failure {
    Config(anyhow::Error),
    Runtime(anyhow::Error),
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::Config(_) => 2,
            Failure::Runtime(_) => 3,
        }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        // Core errors all stem from parameters, configs or input files.
        Failure::Config(e.into())
    }
}

type CmdResult = Result<(), Failure>;

fn runtime<E: Into<anyhow::Error>>(e: E) -> Failure {
    Failure::Runtime(e.into())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(1)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    let level = match cli.verbose {
        0 => "warn",
        1 => "info",
        _ => "debug",
    };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level)).init();

    let result = match cli.command {
        Command::Build(a) => cmd_build(&a),
        Command::Sim(a) => cmd_sim(&a),
        Command::Sweep(a) => cmd_sweep(&a, false),
        Command::Compare(a) => cmd_sweep(&a, true),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            let code = f.code();
            let (Failure::Config(e) | Failure::Runtime(e)) = f;
            eprintln!("error: {e:#}");
            ExitCode::from(code)
        }
    }
}

/// Writes `contents` to `dir/name` via a temporary file in the same directory.
fn write_atomic(dir: &Path, name: &str, contents: &str) -> Result<(), Failure> {
    let mut tmp = tempfile::NamedTempFile::new_in(dir)
        .with_context(|| format!("creating temporary file in {}", dir.display()))
        .map_err(runtime)?;
    tmp.write_all(contents.as_bytes()).map_err(runtime)?;
    let path = dir.join(name);
    tmp.persist(&path)
        .with_context(|| format!("writing {}", path.display()))
        .map_err(runtime)?;
    info!("wrote {}", path.display());
    Ok(())
}

fn write_all(dir: &Path, files: &BTreeMap<String, String>) -> CmdResult {
    fs::create_dir_all(dir)
        .with_context(|| format!("creating {}", dir.display()))
        .map_err(runtime)?;
    for (name, contents) in files {
        write_atomic(dir, name, contents)?;
    }
    Ok(())
}

fn cmd_build(a: &BuildArgs) -> CmdResult {
    let spec = a.net.spec(a.kind);
    let net = spec.build()?;
    let report = validate_network(&net);
    if !report.is_ok() {
        return Err(Failure::Config(anyhow!(
            "network failed validation: {report}"
        )));
    }
    let stem = format!("{}-n{}", net.label(), net.n_terminals());
    let files = BTreeMap::from([
        (format!("{stem}.json"), to_json(&net)),
        (format!("{stem}.dot"), to_dot(&net)),
    ]);
    write_all(&a.out, &files)?;
    println!(
        "{stem}: {} stages, {} routers, {} channels",
        net.stage_count(),
        net.routers().len(),
        net.channels().len()
    );
    Ok(())
}

/// Resolves config file / preset / flags / environment into one config.
fn load_config(a: &ExpArgs) -> Result<ExperimentConfig, Failure> {
    let mut seeds_given = false;
    let mut cfg = match (&a.config, &a.preset) {
        (Some(path), _) => {
            let text = fs::read_to_string(path)
                .with_context(|| format!("reading {}", path.display()))
                .map_err(Failure::Config)?;
            let value: serde_json::Value = serde_json::from_str(&text)
                .with_context(|| format!("parsing {}", path.display()))
                .map_err(Failure::Config)?;
            seeds_given = value.get("seeds").is_some();
            serde_json::from_value::<ExperimentConfig>(value)
                .with_context(|| format!("parsing {}", path.display()))
                .map_err(Failure::Config)?
        }
        (None, Some(name)) => ExperimentConfig::preset(name)?,
        (None, None) => ExperimentConfig::default(),
    };

    if let Some(kind) = a.network {
        cfg.networks = vec![a.net.spec(kind)];
    }
    if let Some(w) = a.workload {
        cfg.workloads = vec![WorkloadSpec::new(w.pattern(a.sigma), 0.0)];
    }
    if let Some(path) = &a.trace {
        cfg.workloads = vec![WorkloadSpec::new(
            Pattern::Trace { path: path.clone() },
            0.0,
        )];
    }
    if let Some(rates) = &a.rates {
        cfg.rates = rates.clone();
    }
    if let Some(w) = a.warmup {
        cfg.sim.warmup_cycles = w;
    }
    if let Some(m) = a.measure {
        cfg.sim.measure_cycles = m;
    }
    if let Some(d) = a.buffer_depth {
        cfg.sim.buffer_depth = d;
    }
    if let Some(out) = &a.out {
        cfg.out = Some(out.clone());
    }

    let env_seed = match std::env::var("MINWEAVE_SEED") {
        Ok(s) => Some(
            s.trim()
                .parse::<u64>()
                .map_err(|e| Failure::Config(anyhow!("MINWEAVE_SEED={s:?}: {e}")))?,
        ),
        Err(_) => None,
    };
    match (a.seed, env_seed) {
        (Some(s), _) => cfg.seeds = vec![s],
        (None, Some(s)) if !seeds_given => cfg.seeds = vec![s],
        _ => {}
    }

    cfg.validate()?;
    Ok(cfg)
}

fn out_dir(cfg: &ExperimentConfig) -> PathBuf {
    cfg.out.clone().unwrap_or_else(|| PathBuf::from("out"))
}

fn set_jobs(jobs: Option<usize>) -> CmdResult {
    if let Some(j) = jobs {
        if j == 0 {
            return Err(Failure::Config(anyhow!("--jobs must be at least 1")));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(j)
            .build_global()
            .map_err(runtime)?;
    }
    Ok(())
}

fn cmd_sim(a: &ExpArgs) -> CmdResult {
    let cfg = load_config(a)?;
    if cfg.networks.len() > 1
        || cfg.workloads.len() > 1
        || cfg.rates.len() > 1
        || cfg.seeds.len() > 1
    {
        warn!("sim runs a single point; using the first network, workload, rate and seed");
    }
    let net = cfg.networks[0].build()?;
    let rate = cfg.rates.first().copied().unwrap_or(0.0);
    let run = run_point(&net, &cfg.workloads[0], rate, cfg.seeds[0], &cfg.sim)?;
    let files = experiment::point_artifacts(&run, net.n_terminals());
    write_all(&out_dir(&cfg), &files)?;
    print!("{}", run.stats.to_csv());
    if !run.output.violations.is_empty() {
        return Err(Failure::Runtime(anyhow!(
            "{} invariant violations, first: {}",
            run.output.counters.invariant_violations,
            run.output.violations[0]
        )));
    }
    Ok(())
}

fn cmd_sweep(a: &ExpArgs, compare_only: bool) -> CmdResult {
    set_jobs(a.jobs)?;
    let cfg = load_config(a)?;
    let result = run_sweep(&cfg)?;
    let mut files = result.artifacts();
    if compare_only {
        files.retain(|name, _| !name.starts_with("curve-"));
    }
    write_all(&out_dir(&cfg), &files)?;
    if compare_only {
        print!("{}", result.table1().to_text());
        println!();
    }
    print!("{}", result.comparison().to_text());
    let bad: u64 = result
        .points
        .iter()
        .map(|p| p.counters.invariant_violations)
        .sum();
    if bad > 0 {
        return Err(Failure::Runtime(anyhow!(
            "{bad} invariant violations across the sweep"
        )));
    }
    Ok(())
}

//! Declarative experiments: which networks, which workloads, which rates.

use std::collections::BTreeMap;
use std::path::PathBuf;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::metrics::{
    self, compare, curve_csv, power_proxy, power_table, RunSummary, SimStats, Table,
};
use crate::sim::{self, message_log_csv, SimConfig, SimCounters, SimOutput};
use crate::topology::{
    build_benes, build_clos, build_delta, full_flatten, meta_flatten, ClosParams, DeltaKind,
    FlattenMethod, Network,
};
use crate::workload::{Histogram, HotspotPreset, HotspotSpec, Pattern, TraceRecord, WorkloadSpec};
use crate::{Error, Result};

fn default_n() -> usize {
    32
}

fn default_k() -> usize {
    2
}

fn default_method() -> FlattenMethod {
    FlattenMethod::AllIntermediate
}

/// A network to build, as written in config files.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum NetworkSpec {
    Omega {
        #[serde(default = "default_n")]
        n: usize,
        #[serde(default = "default_k")]
        k: usize,
    },
    Butterfly {
        #[serde(default = "default_n")]
        n: usize,
        #[serde(default = "default_k")]
        k: usize,
    },
    Baseline {
        #[serde(default = "default_n")]
        n: usize,
        #[serde(default = "default_k")]
        k: usize,
    },
    GeneralizedCube {
        #[serde(default = "default_n")]
        n: usize,
        #[serde(default = "default_k")]
        k: usize,
    },
    Benes {
        #[serde(default = "default_n")]
        n: usize,
    },
    Clos {
        n: usize,
        m: usize,
        r: usize,
    },
    /// All stages merged into one.
    Flattened {
        base: DeltaKind,
        #[serde(default = "default_n")]
        n: usize,
        #[serde(default = "default_k")]
        k: usize,
    },
    MfButterfly {
        #[serde(default = "default_n")]
        n: usize,
        #[serde(default = "default_method")]
        method: FlattenMethod,
    },
    MfBaseline {
        #[serde(default = "default_n")]
        n: usize,
        #[serde(default = "default_method")]
        method: FlattenMethod,
    },
    MetaFlattened {
        base: DeltaKind,
        #[serde(default = "default_n")]
        n: usize,
        #[serde(default = "default_k")]
        k: usize,
        #[serde(default = "default_method")]
        method: FlattenMethod,
    },
}

impl NetworkSpec {
    pub fn delta(kind: DeltaKind, n: usize, k: usize) -> Self {
        match kind {
            DeltaKind::Omega => Self::Omega { n, k },
            DeltaKind::Butterfly => Self::Butterfly { n, k },
            DeltaKind::Baseline => Self::Baseline { n, k },
            DeltaKind::GeneralizedCube => Self::GeneralizedCube { n, k },
        }
    }

    pub fn clos(p: ClosParams) -> Self {
        Self::Clos {
            n: p.n,
            m: p.m,
            r: p.r,
        }
    }

    pub fn build(&self) -> Result<Network> {
        match *self {
            Self::Omega { n, k } => build_delta(DeltaKind::Omega, n, k),
            Self::Butterfly { n, k } => build_delta(DeltaKind::Butterfly, n, k),
            Self::Baseline { n, k } => build_delta(DeltaKind::Baseline, n, k),
            Self::GeneralizedCube { n, k } => build_delta(DeltaKind::GeneralizedCube, n, k),
            Self::Benes { n } => build_benes(n),
            Self::Clos { n, m, r } => build_clos(ClosParams { n, m, r }),
            Self::Flattened { base, n, k } => full_flatten(&build_delta(base, n, k)?),
            Self::MfButterfly { n, method } => {
                meta_flatten(&build_delta(DeltaKind::Butterfly, n, 2)?, method)
            }
            Self::MfBaseline { n, method } => {
                meta_flatten(&build_delta(DeltaKind::Baseline, n, 2)?, method)
            }
            Self::MetaFlattened { base, n, k, method } => {
                meta_flatten(&build_delta(base, n, k)?, method)
            }
        }
    }

    /// Terminal count of the described network.
    pub fn terminals(&self) -> usize {
        match *self {
            Self::Omega { n, .. }
            | Self::Butterfly { n, .. }
            | Self::Baseline { n, .. }
            | Self::GeneralizedCube { n, .. }
            | Self::Benes { n }
            | Self::Flattened { n, .. }
            | Self::MfButterfly { n, .. }
            | Self::MfBaseline { n, .. }
            | Self::MetaFlattened { n, .. } => n,
            Self::Clos { n, r, .. } => n * r,
        }
    }
}

/// The eight networks compared at size `n`.
pub fn default_networks(n: usize) -> Vec<NetworkSpec> {
    let mut v: Vec<NetworkSpec> = DeltaKind::ALL
        .iter()
        .map(|&d| NetworkSpec::delta(d, n, 2))
        .collect();
    v.push(NetworkSpec::Benes { n });
    let clos = if n == 32 {
        ClosParams::default()
    } else {
        // strict-sense non-blocking with square-ish ingress switches
        let side = (1..=n)
            .rev()
            .find(|s| n.is_multiple_of(*s) && s * s <= n)
            .unwrap_or(1);
        ClosParams {
            n: side,
            m: 2 * side - 1,
            r: n / side,
        }
    };
    v.push(NetworkSpec::clos(clos));
    v.push(NetworkSpec::MfButterfly {
        n,
        method: FlattenMethod::AllIntermediate,
    });
    v.push(NetworkSpec::MfBaseline {
        n,
        method: FlattenMethod::AllIntermediate,
    });
    v
}

/// The six workload families at rate 0 (sweeps set the rate).
pub fn default_workloads() -> Vec<WorkloadSpec> {
    [
        Pattern::Uniform,
        Pattern::Exponential,
        Pattern::Normal { sigma: None },
        Pattern::Hotspot(HotspotSpec::preset(HotspotPreset::FftProxy)),
        Pattern::Hotspot(HotspotSpec::preset(HotspotPreset::WaternsqProxy)),
        Pattern::Hotspot(HotspotSpec::preset(HotspotPreset::WaterspatialProxy)),
    ]
    .into_iter()
    .map(|p| WorkloadSpec::new(p, 0.0))
    .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub networks: Vec<NetworkSpec>,
    pub workloads: Vec<WorkloadSpec>,
    /// Offered loads; ignored by trace workloads.
    pub rates: Vec<f64>,
    pub seeds: Vec<u64>,
    pub sim: SimConfig,
    pub out: Option<PathBuf>,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            networks: vec![NetworkSpec::Omega { n: 32, k: 2 }],
            workloads: vec![WorkloadSpec::new(Pattern::Uniform, 0.0)],
            rates: vec![0.1],
            seeds: vec![1],
            sim: SimConfig::default(),
            out: None,
        }
    }
}

impl ExperimentConfig {
    /// Every network, every workload family, rates 0.05 to 0.5, N = 32.
    pub fn paper32() -> Self {
        Self {
            networks: default_networks(32),
            workloads: default_workloads(),
            rates: (1..=10).map(|i| i as f64 * 0.05).collect(),
            seeds: vec![1],
            sim: SimConfig::default(),
            out: None,
        }
    }

    pub fn preset(name: &str) -> Result<Self> {
        match name {
            "paper32" => Ok(Self::paper32()),
            _ => Err(Error::Config(format!(
                "unknown preset {name:?} (known: paper32)"
            ))),
        }
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: Self = serde_json::from_str(text)?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if self.networks.is_empty() {
            return Err(Error::Config("network list is empty".into()));
        }
        if self.workloads.is_empty() {
            return Err(Error::Config("workload list is empty".into()));
        }
        if self.seeds.is_empty() {
            return Err(Error::Config("seed list is empty".into()));
        }
        let synthetic = self.workloads.iter().any(|w| !w.is_trace());
        if synthetic && self.rates.is_empty() {
            return Err(Error::Config("rate list is empty".into()));
        }
        for &r in &self.rates {
            if !(0.0..=1.0).contains(&r) {
                return Err(Error::RateOutOfRange(r));
            }
        }
        self.sim.validate()
    }

    /// Simulation settings that must match for rows to be comparable.
    pub fn config_key(&self) -> String {
        sim_key(&self.sim)
    }
}

fn sim_key(cfg: &SimConfig) -> String {
    format!(
        "depth={} warmup={} measure={} drain={:?}",
        cfg.buffer_depth, cfg.warmup_cycles, cfg.measure_cycles, cfg.drain
    )
}

/// A single simulated configuration and its raw output.
#[derive(Debug, Clone)]
pub struct PointRun {
    pub records: Vec<TraceRecord>,
    pub output: SimOutput,
    pub stats: SimStats,
}

/// Generates the workload at `rate` with `seed` and simulates it. Trace
/// workloads ignore the rate and always drain.
pub fn run_point(
    net: &Network,
    workload: &WorkloadSpec,
    rate: f64,
    seed: u64,
    cfg: &SimConfig,
) -> Result<PointRun> {
    let mut w = workload.clone();
    w.rate = rate;
    w.seed = seed;
    let n = net.n_terminals();
    let cfg = if w.is_trace() {
        SimConfig {
            buffer_depth: cfg.buffer_depth,
            max_cycles: cfg.max_cycles,
            ..SimConfig::drained()
        }
    } else {
        cfg.clone()
    };
    let records = w.generate(n, cfg.horizon())?;
    let output = sim::run(net, &records, &cfg)?;
    let stats = metrics::summarize(&output, n);
    Ok(PointRun {
        records,
        output,
        stats,
    })
}

/// One row of a sweep.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepPoint {
    pub network: String,
    pub workload: String,
    pub rate: f64,
    pub seed: u64,
    pub stats: SimStats,
    pub counters: SimCounters,
}

#[derive(Debug, Clone)]
pub struct SweepResult {
    pub config_key: String,
    pub points: Vec<SweepPoint>,
    pub power: Vec<(String, metrics::PowerProxyReport)>,
}

/// Runs every (network, workload, rate, seed) point. Points run in parallel
/// on the current rayon pool; results come back in config order.
pub fn run_sweep(cfg: &ExperimentConfig) -> Result<SweepResult> {
    cfg.validate()?;
    let nets: Vec<Network> = cfg
        .networks
        .iter()
        .map(NetworkSpec::build)
        .collect::<Result<_>>()?;

    let mut jobs = Vec::new();
    for (ni, _) in nets.iter().enumerate() {
        for (wi, w) in cfg.workloads.iter().enumerate() {
            let rates: &[f64] = if w.is_trace() { &[0.0] } else { &cfg.rates };
            for &rate in rates {
                for &seed in &cfg.seeds {
                    jobs.push((ni, wi, rate, seed));
                }
            }
        }
    }

    let points = jobs
        .par_iter()
        .map(|&(ni, wi, rate, seed)| {
            let net = &nets[ni];
            let w = &cfg.workloads[wi];
            let run = run_point(net, w, rate, seed, &cfg.sim)?;
            log::debug!("{} {} rate {rate} seed {seed} done", net.label(), w.label());
            Ok(SweepPoint {
                network: net.label(),
                workload: w.label(),
                rate,
                seed,
                stats: run.stats,
                counters: run.output.counters,
            })
        })
        .collect::<Result<Vec<_>>>()?;

    let power = nets.iter().map(|n| (n.label(), power_proxy(n))).collect();
    Ok(SweepResult {
        config_key: cfg.config_key(),
        points,
        power,
    })
}

impl SweepResult {
    pub fn comparison(&self) -> Table {
        let runs: Vec<RunSummary> = self
            .points
            .iter()
            .map(|p| RunSummary {
                network: p.network.clone(),
                workload: p.workload.clone(),
                rate: p.rate,
                seed: p.seed,
                config_key: self.config_key.clone(),
                stats: p.stats.clone(),
            })
            .collect();
        compare(&runs)
    }

    pub fn table1(&self) -> Table {
        power_table(&self.power)
    }

    /// Curve CSVs keyed by file name `curve-<network>-<workload>-s<seed>.csv`.
    pub fn curves(&self) -> BTreeMap<String, String> {
        let mut grouped: BTreeMap<String, Vec<(f64, SimStats)>> = BTreeMap::new();
        for p in &self.points {
            let name = format!("curve-{}-{}-s{}.csv", p.network, p.workload, p.seed);
            grouped
                .entry(name)
                .or_default()
                .push((p.rate, p.stats.clone()));
        }
        grouped
            .into_iter()
            .map(|(name, mut pts)| {
                pts.sort_by(|a, b| a.0.total_cmp(&b.0));
                (name, curve_csv(&pts))
            })
            .collect()
    }

    /// Every output file of a sweep, by file name.
    pub fn artifacts(&self) -> BTreeMap<String, String> {
        let mut files = self.curves();
        files.insert("comparison.csv".into(), self.comparison().to_csv());
        files.insert("comparison.txt".into(), self.comparison().to_text());
        files.insert("table1.csv".into(), self.table1().to_csv());
        files
    }
}

/// Output files of a single simulation run.
pub fn point_artifacts(run: &PointRun, n: usize) -> BTreeMap<String, String> {
    let mut files = BTreeMap::new();
    files.insert("stats.csv".into(), run.stats.to_csv());
    files.insert("messages.csv".into(), message_log_csv(&run.output.messages));
    files.insert(
        "histogram.csv".into(),
        Histogram::from_records(&run.records, n).to_csv(),
    );
    files.insert("latency.csv".into(), run.stats.latency_histogram_csv());
    files
}

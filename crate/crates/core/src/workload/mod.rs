//! Synthetic traffic generators, trace files and node-frequency histograms.
//!
//! Every generator produces a finite list of [`TraceRecord`]s sorted by
//! injection cycle (then source), fully determined by the spec, the seed and
//! the horizon.

mod histogram;
mod synthetic;
mod trace;

use std::path::PathBuf;

use serde::{Deserialize, Serialize};

pub use histogram::Histogram;
pub use synthetic::{gen_exponential, gen_hotspot, gen_normal, gen_uniform};
pub use trace::{load_trace, parse_trace, save_trace, write_trace};

use crate::{Error, Result};

/// One message: injected at `cycle` from input `src` towards output `dst`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct TraceRecord {
    pub cycle: u64,
    pub src: usize,
    pub dst: usize,
    pub n_flits: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum HotspotPreset {
    /// Sources 15 and 24 and destinations 0..=3 up-weighted.
    FftProxy,
    /// Nodes 16 and 23 up-weighted on both sides.
    WaternsqProxy,
    /// Nodes 8 and 24 up-weighted on both sides unless overridden.
    WaterspatialProxy,
}

impl HotspotPreset {
    pub fn hot_nodes(self) -> (Vec<usize>, Vec<usize>) {
        match self {
            Self::FftProxy => (vec![15, 24], vec![0, 1, 2, 3]),
            Self::WaternsqProxy => (vec![16, 23], vec![16, 23]),
            Self::WaterspatialProxy => (vec![8, 24], vec![8, 24]),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Self::FftProxy => "fft-proxy",
            Self::WaternsqProxy => "waternsq-proxy",
            Self::WaterspatialProxy => "waterspatial-proxy",
        }
    }
}

fn default_factor() -> f64 {
    4.0
}

/// Weighted source/destination maps. Explicit weights win over hot-node
/// lists, which win over the preset.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
pub struct HotspotSpec {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub preset: Option<HotspotPreset>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub hot_sources: Option<Vec<usize>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub hot_destinations: Option<Vec<usize>>,
    #[serde(default = "default_factor")]
    pub factor: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub src_weights: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dst_weights: Option<Vec<f64>>,
}

impl HotspotSpec {
    pub fn preset(preset: HotspotPreset) -> Self {
        Self {
            preset: Some(preset),
            factor: default_factor(),
            ..Default::default()
        }
    }

    /// Source and destination weights over `n` nodes.
    pub fn weights(&self, n: usize) -> Result<(Vec<f64>, Vec<f64>)> {
        let (preset_src, preset_dst) = self
            .preset
            .map(HotspotPreset::hot_nodes)
            .unwrap_or_default();
        let side = |explicit: &Option<Vec<f64>>, hot: &Option<Vec<usize>>, preset: Vec<usize>| {
            if let Some(w) = explicit {
                if w.len() != n {
                    return Err(Error::Config(format!(
                        "hotspot weight list has {} entries, expected {n}",
                        w.len()
                    )));
                }
                return Ok(w.clone());
            }
            let mut w = vec![1.0; n];
            for &node in hot.as_ref().unwrap_or(&preset) {
                if node < n {
                    w[node] = self.factor;
                }
            }
            Ok(w)
        };
        let src = side(&self.src_weights, &self.hot_sources, preset_src)?;
        let dst = side(&self.dst_weights, &self.hot_destinations, preset_dst)?;
        let bad = |w: &[f64]| w.is_empty() || w.iter().any(|&x| !x.is_finite() || x <= 0.0);
        if bad(&src) || bad(&dst) {
            return Err(Error::BadWeights);
        }
        Ok((src, dst))
    }

    fn label(&self) -> &'static str {
        self.preset.map_or("hotspot", HotspotPreset::name)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Pattern {
    Uniform,
    Exponential,
    Normal {
        /// Defaults to `N / 8`.
        #[serde(default, skip_serializing_if = "Option::is_none")]
        sigma: Option<f64>,
    },
    Hotspot(HotspotSpec),
    Trace {
        path: PathBuf,
    },
}

fn default_msg_flits() -> usize {
    2
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WorkloadSpec {
    #[serde(flatten)]
    pub pattern: Pattern,
    /// Offered load in flits per node per cycle.
    #[serde(default)]
    pub rate: f64,
    #[serde(default = "default_msg_flits")]
    pub msg_flits: usize,
    #[serde(default)]
    pub seed: u64,
}

impl WorkloadSpec {
    pub fn new(pattern: Pattern, rate: f64) -> Self {
        Self {
            pattern,
            rate,
            msg_flits: default_msg_flits(),
            seed: 0,
        }
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn is_trace(&self) -> bool {
        matches!(self.pattern, Pattern::Trace { .. })
    }

    pub fn label(&self) -> String {
        match &self.pattern {
            Pattern::Uniform => "uniform".into(),
            Pattern::Exponential => "exponential".into(),
            Pattern::Normal { .. } => "normal".into(),
            Pattern::Hotspot(h) => h.label().into(),
            Pattern::Trace { path } => format!(
                "trace-{}",
                path.file_stem().and_then(|s| s.to_str()).unwrap_or("file")
            ),
        }
    }

    pub(crate) fn check(&self) -> Result<()> {
        if self.msg_flits == 0 {
            return Err(Error::ZeroFlits);
        }
        if !self.is_trace() && !(0.0..=1.0).contains(&self.rate) {
            return Err(Error::RateOutOfRange(self.rate));
        }
        Ok(())
    }

    /// Messages over `horizon` cycles for `n` terminals. Trace workloads
    /// ignore `horizon` and return the whole file.
    pub fn generate(&self, n: usize, horizon: u64) -> Result<Vec<TraceRecord>> {
        match &self.pattern {
            Pattern::Uniform => gen_uniform(self, n, horizon),
            Pattern::Exponential => gen_exponential(self, n, horizon),
            Pattern::Normal { .. } => gen_normal(self, n, horizon),
            Pattern::Hotspot(_) => gen_hotspot(self, n, horizon),
            Pattern::Trace { path } => load_trace(path, n),
        }
    }
}

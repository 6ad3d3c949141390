//! Aggregated simulation statistics, the crosspoint power proxy and tabular
//! comparison output.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use serde::Serialize;

use crate::sim::{MessageLog, SimOutput};
use crate::topology::Network;

/// Statistics over the messages whose tail left the network inside a window.
///
/// Rates are flits per cycle per terminal. A message counts as ejected in
/// `[start, end)` when its last flit left during one of those cycles, i.e.
/// `start < t_eject <= end`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SimStats {
    pub messages: usize,
    pub avg_latency: f64,
    pub latency_histogram: BTreeMap<u64, usize>,
    pub throughput: f64,
    pub offered_rate: f64,
    /// Same quantity as `throughput`; kept as its own column for sweep tables.
    pub accepted_rate: f64,
    pub blocking_rate: f64,
    pub avg_hops: f64,
    pub window: (u64, u64),
}

impl SimStats {
    pub fn empty(window: (u64, u64)) -> Self {
        Self {
            messages: 0,
            avg_latency: 0.0,
            latency_histogram: BTreeMap::new(),
            throughput: 0.0,
            offered_rate: 0.0,
            accepted_rate: 0.0,
            blocking_rate: 0.0,
            avg_hops: 0.0,
            window,
        }
    }

    /// True when no message completed inside the window.
    pub fn is_empty(&self) -> bool {
        self.messages == 0
    }

    pub fn csv_header() -> &'static str {
        "messages,avg_latency,throughput,offered_rate,accepted_rate,blocking_rate,avg_hops"
    }

    pub fn csv_fields(&self) -> String {
        format!(
            "{},{:.6},{:.6},{:.6},{:.6},{:.6},{:.6}",
            self.messages,
            self.avg_latency,
            self.throughput,
            self.offered_rate,
            self.accepted_rate,
            self.blocking_rate,
            self.avg_hops
        )
    }

    /// Single-row stats CSV with header.
    pub fn to_csv(&self) -> String {
        format!("{}\n{}\n", Self::csv_header(), self.csv_fields())
    }

    pub fn latency_histogram_csv(&self) -> String {
        let mut s = String::from("latency,count\n");
        for (lat, count) in &self.latency_histogram {
            let _ = writeln!(s, "{lat},{count}");
        }
        s
    }
}

/// Aggregates a message log over `window` for a network with `n` terminals.
/// `alloc` is `(attempts, denied)` from the simulator counters.
pub fn aggregate(log: &[MessageLog], window: (u64, u64), n: usize, alloc: (u64, u64)) -> SimStats {
    let (start, end) = window;
    if end <= start || n == 0 {
        return SimStats::empty(window);
    }
    let span = (end - start) as f64 * n as f64;

    let offered: usize = log
        .iter()
        .filter(|m| m.t_gen >= start && m.t_gen < end)
        .map(|m| m.n_flits)
        .sum();

    let mut stats = SimStats::empty(window);
    let (mut lat_sum, mut hop_sum, mut flits) = (0u64, 0usize, 0usize);
    for m in log {
        let Some(te) = m.t_eject else { continue };
        if te <= start || te > end {
            continue;
        }
        let lat = te - m.t_gen;
        stats.messages += 1;
        lat_sum += lat;
        hop_sum += m.hops;
        flits += m.n_flits;
        *stats.latency_histogram.entry(lat).or_default() += 1;
    }
    stats.offered_rate = offered as f64 / span;
    stats.blocking_rate = if alloc.0 == 0 {
        0.0
    } else {
        alloc.1 as f64 / alloc.0 as f64
    };
    if stats.messages == 0 {
        return stats;
    }
    stats.avg_latency = lat_sum as f64 / stats.messages as f64;
    stats.avg_hops = hop_sum as f64 / stats.messages as f64;
    stats.throughput = flits as f64 / span;
    stats.accepted_rate = stats.throughput;
    stats
}

/// [`aggregate`] over a finished run.
pub fn summarize(out: &SimOutput, n: usize) -> SimStats {
    aggregate(
        &out.messages,
        out.window,
        n,
        (out.counters.alloc_attempts, out.counters.alloc_denied),
    )
}

/// Static switch-cost proxy.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PowerProxyReport {
    pub router_count: usize,
    pub total_ports: usize,
    pub crosspoints: usize,
    pub channel_count: usize,
    pub proxy_score: f64,
}

/// Crosspoint count, no channel term.
pub fn power_proxy(net: &Network) -> PowerProxyReport {
    power_proxy_weighted(net, 0.0)
}

/// `crosspoints + alpha * channel_count`.
pub fn power_proxy_weighted(net: &Network, alpha: f64) -> PowerProxyReport {
    let routers = net.routers();
    let crosspoints = routers.iter().map(|r| r.n_in * r.n_out).sum();
    let channel_count = net.channels().len();
    PowerProxyReport {
        router_count: routers.len(),
        total_ports: routers.iter().map(|r| r.n_in + r.n_out).sum(),
        crosspoints,
        channel_count,
        proxy_score: crosspoints as f64 + alpha * channel_count as f64,
    }
}

/// Power-proxy table, one row per network, in the given order.
pub fn power_table(rows: &[(String, PowerProxyReport)]) -> Table {
    let mut t = Table::new(&[
        "network",
        "routers",
        "ports",
        "crosspoints",
        "channels",
        "proxy_score",
    ]);
    for (label, r) in rows {
        t.push(vec![
            label.clone(),
            r.router_count.to_string(),
            r.total_ports.to_string(),
            r.crosspoints.to_string(),
            r.channel_count.to_string(),
            format!("{:.6}", r.proxy_score),
        ]);
    }
    t
}

/// One simulated point for comparison.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunSummary {
    pub network: String,
    pub workload: String,
    pub rate: f64,
    pub seed: u64,
    /// Fingerprint of the simulation settings; rows with different keys are
    /// flagged when compared.
    pub config_key: String,
    pub stats: SimStats,
}

/// Plain string table with CSV and aligned-text renderings.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Table {
    pub columns: Vec<String>,
    pub rows: Vec<Vec<String>>,
    pub warnings: Vec<String>,
}

impl Table {
    pub fn new(columns: &[&str]) -> Self {
        Self {
            columns: columns.iter().map(|c| c.to_string()).collect(),
            ..Self::default()
        }
    }

    pub fn push(&mut self, row: Vec<String>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }

    pub fn to_csv(&self) -> String {
        let mut s = self.columns.join(",");
        s.push('\n');
        for row in &self.rows {
            s.push_str(&row.join(","));
            s.push('\n');
        }
        s
    }

    pub fn to_text(&self) -> String {
        let mut widths: Vec<usize> = self.columns.iter().map(String::len).collect();
        for row in &self.rows {
            for (w, cell) in widths.iter_mut().zip(row) {
                *w = (*w).max(cell.len());
            }
        }
        let line = |cells: &[String]| {
            let padded: Vec<String> = cells
                .iter()
                .zip(&widths)
                .map(|(c, w)| format!("{c:>w$}"))
                .collect();
            padded.join("  ").trim_end().to_string() + "\n"
        };
        let mut s = line(&self.columns);
        for row in &self.rows {
            s.push_str(&line(row));
        }
        for w in &self.warnings {
            let _ = writeln!(s, "warning: {w}");
        }
        s
    }
}

/// Side-by-side table of simulation results. Rows keep the input order.
pub fn compare(runs: &[RunSummary]) -> Table {
    let mut t = Table::new(&[
        "network",
        "workload",
        "rate",
        "seed",
        "messages",
        "avg_latency",
        "throughput",
        "offered_rate",
        "accepted_rate",
        "blocking_rate",
        "avg_hops",
    ]);
    if let Some(first) = runs.first() {
        for r in runs {
            if r.config_key != first.config_key {
                t.warnings.push(format!(
                    "{} at rate {} uses config {:?}, expected {:?}",
                    r.network, r.rate, r.config_key, first.config_key
                ));
            }
        }
        let workloads: std::collections::BTreeSet<&str> =
            runs.iter().map(|r| r.workload.as_str()).collect();
        if workloads.len() > 1 {
            t.warnings.push(format!("mixed workloads: {workloads:?}"));
        }
    }
    for r in runs {
        let mut row = vec![
            r.network.clone(),
            r.workload.clone(),
            format!("{:.6}", r.rate),
            r.seed.to_string(),
        ];
        row.extend(r.stats.csv_fields().split(',').map(str::to_string));
        t.push(row);
    }
    t
}

/// Latency/throughput curve over offered rates.
pub fn curve_csv(points: &[(f64, SimStats)]) -> String {
    let mut s = String::from("rate,latency,throughput,offered,accepted\n");
    for (rate, st) in points {
        let _ = writeln!(
            s,
            "{rate:.6},{:.6},{:.6},{:.6},{:.6}",
            st.avg_latency, st.throughput, st.offered_rate, st.accepted_rate
        );
    }
    s
}

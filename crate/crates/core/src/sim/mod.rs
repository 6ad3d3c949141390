//! Cycle-level wormhole-switching simulation.
//!
//! Every router input port owns a FIFO of `buffer_depth` flits; every output
//! port is either free or reserved by one message from the grant of its head
//! flit until its tail has left. Moving a flit across a channel (or into an
//! output terminal) takes one cycle. A cycle runs in three phases that all
//! read the state as it was at the start of the cycle:
//!
//! 1. allocation: each unrouted head picks a free candidate port with buffer
//!    space downstream, and every output port grants one request in
//!    round-robin order;
//! 2. traversal: each routed front flit advances one hop, tails release
//!    their reservation, flits reaching output terminals are ejected;
//! 3. injection: each source pushes the next flit of its oldest pending
//!    message into its terminal buffer.

mod engine;

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

pub use engine::Simulator;

use crate::topology::Network;
use crate::workload::TraceRecord;
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum SelectionPolicy {
    /// Free candidate with the emptiest downstream buffer, then lowest port.
    #[default]
    LeastOccupiedThenLowestIndex,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DrainPolicy {
    /// Stop after `warmup + measure` cycles.
    Window,
    /// Run until every message has been ejected (or `max_cycles`).
    Drain,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SimConfig {
    pub buffer_depth: usize,
    pub warmup_cycles: u64,
    pub measure_cycles: u64,
    pub drain: DrainPolicy,
    /// Hard stop for drain runs.
    pub max_cycles: u64,
    pub selection: SelectionPolicy,
}

impl Default for SimConfig {
    fn default() -> Self {
        Self {
            buffer_depth: 2,
            warmup_cycles: 10_000,
            measure_cycles: 50_000,
            drain: DrainPolicy::Window,
            max_cycles: 50_000_000,
            selection: SelectionPolicy::default(),
        }
    }
}

impl SimConfig {
    pub fn validate(&self) -> Result<()> {
        if self.buffer_depth == 0 {
            return Err(Error::Config("buffer_depth must be at least 1".into()));
        }
        if self.drain == DrainPolicy::Window && self.measure_cycles == 0 {
            return Err(Error::Config("measure_cycles must be positive".into()));
        }
        Ok(())
    }

    /// Trace-style run: no warm-up, drain everything.
    pub fn drained() -> Self {
        Self {
            warmup_cycles: 0,
            measure_cycles: 0,
            drain: DrainPolicy::Drain,
            ..Self::default()
        }
    }

    pub fn horizon(&self) -> u64 {
        self.warmup_cycles + self.measure_cycles
    }
}

/// Lifetime of one message. Times are cycle boundaries: a message generated
/// at the start of cycle `t_gen` whose tail leaves during cycle `c` has
/// `t_eject = c + 1`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct MessageLog {
    pub id: usize,
    pub src: usize,
    pub dst: usize,
    pub n_flits: usize,
    pub t_gen: u64,
    pub t_inject: Option<u64>,
    pub t_eject: Option<u64>,
    /// Stages traversed.
    pub hops: usize,
    /// Intra-stage channels taken inside merged stages.
    pub intra_hops: usize,
}

impl MessageLog {
    pub fn latency(&self) -> Option<u64> {
        self.t_eject.map(|t| t - self.t_gen)
    }
}

/// Per-message CSV: `msg_id,src,dst,t_gen,t_inject,t_eject,hops`, ejected
/// messages only.
pub fn message_log_csv(log: &[MessageLog]) -> String {
    let mut s = String::from("msg_id,src,dst,t_gen,t_inject,t_eject,hops\n");
    for m in log {
        if let (Some(ti), Some(te)) = (m.t_inject, m.t_eject) {
            let _ = writeln!(
                s,
                "{},{},{},{},{ti},{te},{}",
                m.id, m.src, m.dst, m.t_gen, m.hops
            );
        }
    }
    s
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct SimCounters {
    pub cycles: u64,
    pub injected_flits: u64,
    pub ejected_flits: u64,
    pub in_flight_flits: u64,
    /// Flits ejected inside the measurement window.
    pub window_ejected_flits: u64,
    /// Head allocation attempts inside the window.
    pub alloc_attempts: u64,
    pub alloc_denied: u64,
    pub invariant_violations: u64,
}

#[derive(Debug, Clone)]
pub struct SimOutput {
    pub messages: Vec<MessageLog>,
    pub counters: SimCounters,
    /// Measurement window `[start, end)` in cycles.
    pub window: (u64, u64),
    pub violations: Vec<String>,
}

/// Simulates `records` on `net` until the configured stop condition.
pub fn run(net: &Network, records: &[TraceRecord], cfg: &SimConfig) -> Result<SimOutput> {
    let mut sim = Simulator::new(net, records, cfg)?;
    sim.run_to_end();
    Ok(sim.finish())
}

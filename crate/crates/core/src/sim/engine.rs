use std::collections::VecDeque;

use super::{DrainPolicy, MessageLog, SimConfig, SimCounters, SimOutput};
use crate::routing::RoutingTable;
use crate::topology::{validate_network, Attachment, ChannelKind, Network};
use crate::workload::TraceRecord;
use crate::{Error, Result};

#[derive(Debug, Clone, Copy)]
struct Flit {
    msg: u32,
    seq: u32,
    /// Routers this flit has left so far.
    hop: u32,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Target {
    Eject(usize),
    Buffer { input: usize, intra: bool },
}

#[derive(Debug, Default)]
struct Source {
    pending: VecDeque<usize>,
    /// Message being injected and flits already sent.
    active: Option<(usize, usize)>,
}

/// A running simulation. Most callers want [`super::run`]; tests drive
/// [`Simulator::step`] directly to observe invariants cycle by cycle.
pub struct Simulator<'a> {
    net: &'a Network,
    table: RoutingTable,
    cfg: SimConfig,
    records: &'a [TraceRecord],
    next_record: usize,

    in_base: Vec<usize>,
    out_base: Vec<usize>,
    in_router: Vec<usize>,
    in_pos: Vec<usize>,
    out_target: Vec<Target>,
    terminal_in: Vec<usize>,

    buffers: Vec<VecDeque<Flit>>,
    route: Vec<Option<usize>>,
    reserved: Vec<Option<u32>>,
    rr: Vec<usize>,
    sources: Vec<Source>,

    messages: Vec<MessageLog>,
    paths: Vec<Vec<(usize, usize)>>,
    outstanding: usize,
    cycle: u64,
    counters: SimCounters,
    violations: Vec<String>,

    occ: Vec<usize>,
    requests: Vec<(usize, usize)>,
    moves: Vec<(usize, usize)>,
    out_used: Vec<u64>,
}

const MAX_REPORTED_VIOLATIONS: usize = 64;

impl<'a> Simulator<'a> {
    pub fn new(net: &'a Network, records: &'a [TraceRecord], cfg: &SimConfig) -> Result<Self> {
        cfg.validate()?;
        let report = validate_network(net);
        if !report.is_ok() {
            return Err(Error::Config(format!(
                "invalid network {}: {report}",
                net.label()
            )));
        }
        let n = net.n_terminals();
        for (i, r) in records.iter().enumerate() {
            if r.src >= n || r.dst >= n || r.n_flits == 0 {
                return Err(Error::Config(format!(
                    "record {i} is invalid for N = {n}: {r:?}"
                )));
            }
        }
        if !records.windows(2).all(|w| w[0].cycle <= w[1].cycle) {
            return Err(Error::Config("records must be sorted by cycle".into()));
        }

        let table = RoutingTable::build(net);
        let mut in_base = Vec::with_capacity(net.routers().len());
        let mut out_base = Vec::with_capacity(net.routers().len());
        let (mut n_in, mut n_out) = (0, 0);
        for r in net.routers() {
            in_base.push(n_in);
            out_base.push(n_out);
            n_in += r.n_in;
            n_out += r.n_out;
        }

        let mut in_router = Vec::with_capacity(n_in);
        let mut in_pos = Vec::with_capacity(n_in);
        let mut out_target = Vec::with_capacity(n_out);
        for r in net.routers() {
            for p in 0..r.n_in {
                in_router.push(r.id);
                in_pos.push(net.entry_position(r.id, p));
            }
            for p in 0..r.n_out {
                out_target.push(match net.output_attachment(r.id, p) {
                    Some(Attachment::Terminal(t)) => Target::Eject(t),
                    Some(Attachment::Channel(c)) => {
                        let ch = &net.channels()[c];
                        Target::Buffer {
                            input: in_base[ch.dst.router] + ch.dst.port,
                            intra: ch.kind == ChannelKind::IntraStage,
                        }
                    }
                    None => unreachable!("validated network has no dangling ports"),
                });
            }
        }
        let terminal_in = net
            .input_terminals()
            .iter()
            .map(|p| in_base[p.router] + p.port)
            .collect();

        Ok(Self {
            net,
            table,
            cfg: cfg.clone(),
            records,
            next_record: 0,
            in_base,
            out_base,
            in_router,
            in_pos,
            out_target,
            terminal_in,
            buffers: vec![VecDeque::with_capacity(cfg.buffer_depth); n_in],
            route: vec![None; n_in],
            reserved: vec![None; n_out],
            rr: vec![0; n_out],
            sources: (0..n).map(|_| Source::default()).collect(),
            messages: Vec::with_capacity(records.len()),
            paths: Vec::with_capacity(records.len()),
            outstanding: 0,
            cycle: 0,
            counters: SimCounters::default(),
            violations: Vec::new(),
            occ: vec![0; n_in],
            requests: Vec::new(),
            moves: Vec::new(),
            out_used: vec![u64::MAX; n_out],
        })
    }

    pub fn cycle(&self) -> u64 {
        self.cycle
    }

    pub fn counters(&self) -> &SimCounters {
        &self.counters
    }

    pub fn messages(&self) -> &[MessageLog] {
        &self.messages
    }

    /// Invariant violations observed so far (capped).
    pub fn violations(&self) -> &[String] {
        &self.violations
    }

    pub fn in_flight(&self) -> u64 {
        self.buffers.iter().map(|b| b.len() as u64).sum()
    }

    /// Router-level route taken by a message's head: `(router, out_port)`.
    pub fn path_of(&self, msg: usize) -> &[(usize, usize)] {
        &self.paths[msg]
    }

    fn in_window(&self) -> bool {
        match self.cfg.drain {
            DrainPolicy::Window => {
                self.cycle >= self.cfg.warmup_cycles && self.cycle < self.cfg.horizon()
            }
            DrainPolicy::Drain => true,
        }
    }

    fn violation(&mut self, msg: String) {
        self.counters.invariant_violations += 1;
        if self.violations.len() < MAX_REPORTED_VIOLATIONS {
            self.violations.push(format!("cycle {}: {msg}", self.cycle));
        }
    }

    pub fn is_done(&self) -> bool {
        match self.cfg.drain {
            DrainPolicy::Window => self.cycle >= self.cfg.horizon(),
            DrainPolicy::Drain => {
                (self.next_record == self.records.len() && self.outstanding == 0)
                    || self.cycle >= self.cfg.max_cycles
            }
        }
    }

    pub fn run_to_end(&mut self) {
        while !self.is_done() {
            self.step();
        }
    }

    pub fn finish(mut self) -> SimOutput {
        self.counters.cycles = self.cycle;
        self.counters.in_flight_flits = self.in_flight();
        let window = match self.cfg.drain {
            DrainPolicy::Window => (self.cfg.warmup_cycles, self.cfg.horizon()),
            DrainPolicy::Drain => (0, self.cycle),
        };
        SimOutput {
            messages: self.messages,
            counters: self.counters,
            window,
            violations: self.violations,
        }
    }

    /// Advances the simulation by one cycle.
    pub fn step(&mut self) {
        self.admit_arrivals();
        for (o, b) in self.occ.iter_mut().zip(&self.buffers) {
            *o = b.len();
        }
        self.allocate();
        self.traverse();
        self.inject();
        self.check_conservation();
        self.cycle += 1;
    }

    fn admit_arrivals(&mut self) {
        while let Some(r) = self.records.get(self.next_record) {
            if r.cycle > self.cycle {
                break;
            }
            let id = self.messages.len();
            self.messages.push(MessageLog {
                id,
                src: r.src,
                dst: r.dst,
                n_flits: r.n_flits,
                t_gen: self.cycle.max(r.cycle),
                t_inject: None,
                t_eject: None,
                hops: 0,
                intra_hops: 0,
            });
            self.paths.push(Vec::new());
            self.sources[r.src].pending.push_back(id);
            self.outstanding += 1;
            self.next_record += 1;
        }
    }

    fn has_space(&self, target: Target) -> bool {
        match target {
            Target::Eject(_) => true,
            Target::Buffer { input, .. } => self.occ[input] < self.cfg.buffer_depth,
        }
    }

    fn target_load(&self, target: Target) -> usize {
        match target {
            Target::Eject(_) => 0,
            Target::Buffer { input, .. } => self.occ[input],
        }
    }

    fn allocate(&mut self) {
        self.requests.clear();
        let counting = self.in_window();
        for gi in 0..self.buffers.len() {
            let Some(&flit) = self.buffers[gi].front() else {
                continue;
            };
            if self.route[gi].is_some() {
                continue;
            }
            if flit.seq != 0 {
                self.violation(format!(
                    "body flit of message {} at an unrouted input",
                    flit.msg
                ));
                continue;
            }
            let r = self.in_router[gi];
            let dst = self.messages[flit.msg as usize].dst;
            let base = self.out_base[r];
            let choice = self
                .table
                .lookup(self.net, r, self.in_pos[gi], dst)
                .iter()
                .copied()
                .filter(|&p| {
                    self.reserved[base + p].is_none() && self.has_space(self.out_target[base + p])
                })
                .min_by_key(|&p| (self.target_load(self.out_target[base + p]), p));
            if counting {
                self.counters.alloc_attempts += 1;
            }
            match choice {
                Some(p) => self.requests.push((base + p, gi)),
                None if counting => self.counters.alloc_denied += 1,
                None => {}
            }
        }

        self.requests.sort_unstable();
        let mut i = 0;
        while i < self.requests.len() {
            let go = self.requests[i].0;
            let mut j = i;
            while j < self.requests.len() && self.requests[j].0 == go {
                j += 1;
            }
            let r = self.in_router[self.requests[i].1];
            let n_in = self.net.router(r).n_in;
            let local = |gi: usize| gi - self.in_base[r];
            let pointer = self.rr[go];
            let (_, winner) = self.requests[i..j]
                .iter()
                .copied()
                .min_by_key(|&(_, gi)| (local(gi) + n_in - pointer) % n_in)
                .expect("non-empty group");
            let msg = self.buffers[winner].front().expect("requesting head").msg;
            self.reserved[go] = Some(msg);
            self.route[winner] = Some(go - self.out_base[r]);
            self.rr[go] = (local(winner) + 1) % n_in;
            if counting {
                self.counters.alloc_denied += (j - i - 1) as u64;
            }
            i = j;
        }
    }

    fn traverse(&mut self) {
        self.moves.clear();
        for gi in 0..self.buffers.len() {
            if self.buffers[gi].is_empty() {
                continue;
            }
            if let Some(p) = self.route[gi] {
                let go = self.out_base[self.in_router[gi]] + p;
                if self.has_space(self.out_target[go]) {
                    self.moves.push((gi, go));
                }
            }
        }

        let counting = self.in_window();
        let moves = std::mem::take(&mut self.moves);
        for &(gi, go) in &moves {
            let mut flit = self.buffers[gi].pop_front().expect("scheduled move");
            let r = self.in_router[gi];
            let port = go - self.out_base[r];
            let m = flit.msg as usize;

            if self.out_used[go] == self.cycle {
                self.violation(format!("output {go} carried two flits"));
            }
            self.out_used[go] = self.cycle;
            if self.reserved[go] != Some(flit.msg) {
                self.violation(format!("message {m} used output {go} it does not hold"));
            }

            let target = self.out_target[go];
            let hop = flit.hop as usize;
            if flit.seq == 0 {
                if let Some(&(prev_r, prev_p)) = self.paths[m].last() {
                    let expected = match self.out_target[self.out_base[prev_r] + prev_p] {
                        Target::Buffer { input, .. } => Some(self.in_router[input]),
                        Target::Eject(_) => None,
                    };
                    if expected != Some(r) {
                        self.violation(format!("message {m} path is not contiguous at router {r}"));
                    }
                }
                self.paths[m].push((r, port));
                match target {
                    Target::Buffer { intra: true, .. } => self.messages[m].intra_hops += 1,
                    _ => self.messages[m].hops += 1,
                }
            } else if self.paths[m].get(hop) != Some(&(r, port)) {
                self.violation(format!(
                    "flit {} of message {m} left router {r} by port {port}, head took {:?}",
                    flit.seq,
                    self.paths[m].get(hop)
                ));
            }
            flit.hop += 1;

            let is_tail = flit.seq as usize + 1 == self.messages[m].n_flits;
            match target {
                Target::Buffer { input, .. } => {
                    self.buffers[input].push_back(flit);
                    if self.buffers[input].len() > self.cfg.buffer_depth {
                        self.violation(format!("buffer {input} overflowed"));
                    }
                }
                Target::Eject(t) => {
                    if t != self.messages[m].dst {
                        self.violation(format!("message {m} ejected at {t}"));
                    }
                    self.counters.ejected_flits += 1;
                    if counting {
                        self.counters.window_ejected_flits += 1;
                    }
                    if is_tail {
                        self.messages[m].t_eject = Some(self.cycle + 1);
                        self.outstanding -= 1;
                    }
                }
            }
            if is_tail {
                self.reserved[go] = None;
                self.route[gi] = None;
            }
        }
        self.moves = moves;
    }

    fn inject(&mut self) {
        for t in 0..self.sources.len() {
            let gi = self.terminal_in[t];
            if self.occ[gi] >= self.cfg.buffer_depth {
                continue;
            }
            let source = &mut self.sources[t];
            let (m, sent) = match source.active {
                Some(a) => a,
                None => match source.pending.pop_front() {
                    Some(m) => (m, 0),
                    None => continue,
                },
            };
            let n_flits = self.messages[m].n_flits;
            source.active = (sent + 1 < n_flits).then_some((m, sent + 1));
            if sent == 0 {
                self.messages[m].t_inject = Some(self.cycle);
            }
            self.buffers[gi].push_back(Flit {
                msg: m as u32,
                seq: sent as u32,
                hop: 0,
            });
            self.counters.injected_flits += 1;
        }
    }

    fn check_conservation(&mut self) {
        let in_flight = self.in_flight();
        if self.counters.injected_flits != self.counters.ejected_flits + in_flight {
            self.violation(format!(
                "flit conservation: injected {} != ejected {} + in flight {in_flight}",
                self.counters.injected_flits, self.counters.ejected_flits
            ));
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sim::run;
    use crate::topology::{build_benes, build_omega};

    fn rec(cycle: u64, src: usize, dst: usize, n_flits: usize) -> TraceRecord {
        TraceRecord {
            cycle,
            src,
            dst,
            n_flits,
        }
    }

    /// Contention-free timing: inject in the generation cycle, one channel
    /// per cycle for the head (`stages - 1` inter-stage hops plus ejection),
    /// tail `n_flits - 1` cycles behind, `t_eject` one past the last cycle.
    fn solo_latency(stages: u64, n_flits: u64) -> u64 {
        let head_inject = 0;
        let head_eject_cycle = head_inject + stages; // hops: stages-1 channels + eject
        let tail_eject_cycle = head_eject_cycle + n_flits - 1;
        tail_eject_cycle + 1
    }

    #[test]
    fn single_message_latency() {
        let net = build_omega(8, 2).unwrap();
        let recs = [rec(0, 0, 5, 2)];
        let out = run(&net, &recs, &SimConfig::drained()).unwrap();
        let m = &out.messages[0];
        assert_eq!(m.t_inject, Some(0));
        assert_eq!(m.latency(), Some(solo_latency(3, 2)));
        assert_eq!(m.latency(), Some(5));
        assert_eq!(m.hops, 3);
        assert!(out.violations.is_empty());
    }

    #[test]
    fn disjoint_messages_do_not_interact() {
        let net = build_omega(8, 2).unwrap();
        let solo_a = run(&net, &[rec(0, 0, 0, 2)], &SimConfig::drained()).unwrap();
        let solo_b = run(&net, &[rec(0, 7, 7, 2)], &SimConfig::drained()).unwrap();
        let both = run(
            &net,
            &[rec(0, 0, 0, 2), rec(0, 7, 7, 2)],
            &SimConfig::drained(),
        )
        .unwrap();
        assert_eq!(both.messages[0].latency(), solo_a.messages[0].latency());
        assert_eq!(both.messages[1].latency(), solo_b.messages[0].latency());
    }

    #[test]
    fn colliding_messages_serialise() {
        // Terminals 0 and 4 share the first omega(8) switch; same destination
        // forces the same output port at every stage.
        let net = build_omega(8, 2).unwrap();
        let e0 = net.input_terminals()[0];
        let e4 = net.input_terminals()[4];
        assert_eq!(e0.router, e4.router);
        let out = run(
            &net,
            &[rec(0, 0, 3, 2), rec(0, 4, 3, 2)],
            &SimConfig::drained(),
        )
        .unwrap();
        let lat: Vec<_> = out.messages.iter().map(|m| m.latency().unwrap()).collect();
        let (winner, loser) = (lat.iter().min().unwrap(), lat.iter().max().unwrap());
        assert_eq!(*winner, 5);
        assert_eq!(loser - winner, 2);
    }

    #[test]
    fn back_to_back_messages_from_one_source() {
        let net = build_omega(8, 2).unwrap();
        let out = run(
            &net,
            &[rec(0, 1, 2, 2), rec(0, 1, 6, 2)],
            &SimConfig::drained(),
        )
        .unwrap();
        assert_eq!(out.messages[0].latency(), Some(5));
        // Second message waits two injection cycles at the source.
        assert_eq!(out.messages[1].t_inject, Some(2));
        assert!(out.violations.is_empty());
    }

    #[test]
    fn benes_single_message() {
        let net = build_benes(32).unwrap();
        let out = run(&net, &[rec(3, 9, 20, 2)], &SimConfig::drained()).unwrap();
        assert_eq!(out.messages[0].latency(), Some(solo_latency(9, 2)));
        assert_eq!(out.messages[0].hops, 9);
    }

    #[test]
    fn rejects_bad_records() {
        let net = build_omega(8, 2).unwrap();
        assert!(Simulator::new(&net, &[rec(0, 9, 0, 2)], &SimConfig::drained()).is_err());
        assert!(Simulator::new(
            &net,
            &[rec(5, 0, 0, 2), rec(1, 0, 0, 2)],
            &SimConfig::drained()
        )
        .is_err());
        let cfg = SimConfig {
            buffer_depth: 0,
            ..SimConfig::default()
        };
        assert!(Simulator::new(&net, &[], &cfg).is_err());
    }

    #[test]
    fn empty_workload() {
        let net = build_omega(8, 2).unwrap();
        let cfg = SimConfig {
            warmup_cycles: 10,
            measure_cycles: 100,
            ..SimConfig::default()
        };
        let out = run(&net, &[], &cfg).unwrap();
        assert!(out.messages.is_empty());
        assert_eq!(out.counters.cycles, 110);
        assert_eq!(out.counters.injected_flits, 0);
    }
}

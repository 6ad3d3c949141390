//! Legal output ports per router and destination.
//!
//! Two policies are provided. Destination-tag routing reads one base-`k`
//! digit of the destination per stage and only applies where paths are
//! unique. Adaptive routing returns every output port that starts a forward
//! (stage-monotone, never misrouted) route to the destination; on delta
//! networks it collapses to the destination tag.

use std::collections::HashMap;

use petgraph::algo::is_cyclic_directed;
use petgraph::graph::DiGraph;
use serde::Serialize;

use crate::topology::builders::digits_for;
use crate::topology::{Attachment, Hop, Network, NetworkKind};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Policy {
    DestinationTag,
    AdaptiveMinimal,
}

/// A packet at `router`, currently at original layer `position`, heading
/// for output terminal `dst`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RouteQuery {
    pub router: usize,
    pub position: usize,
    pub dst: usize,
}

impl RouteQuery {
    /// Query for a packet that entered `router` from the previous stage.
    pub fn new(net: &Network, router: usize, dst: usize) -> Self {
        Self {
            router,
            position: net.router(router).layers.0,
            dst,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct RouteCandidates {
    pub ports: Vec<usize>,
    pub policy: Policy,
}

fn check_query(net: &Network, q: &RouteQuery) -> Result<()> {
    if q.dst >= net.n_terminals() {
        return Err(Error::TerminalOutOfRange {
            index: q.dst,
            n: net.n_terminals(),
        });
    }
    if q.router >= net.routers().len() {
        return Err(Error::UnsupportedPolicy(format!("no router {}", q.router)));
    }
    Ok(())
}

/// Self-routing port choice: one destination digit per stage.
pub fn destination_tag(net: &Network, q: &RouteQuery) -> Result<RouteCandidates> {
    check_query(net, q)?;
    let stage = net.router(q.router).stage;
    let n = net.n_terminals();
    let digit = |k: usize, pos: usize| (q.dst / k.pow(pos as u32)) % k;
    let port = match net.kind() {
        kind if kind.is_delta() => {
            let k = net.radix();
            let s = digits_for(n, k)?;
            digit(k, s - 1 - stage)
        }
        NetworkKind::Benes => {
            let half = digits_for(n, 2)?;
            if stage + 1 < half {
                return Err(Error::UnsupportedPolicy(format!(
                    "stage {stage} is in the first half of a Beneš network"
                )));
            }
            digit(2, 2 * half - 2 - stage)
        }
        kind => {
            return Err(Error::UnsupportedPolicy(format!(
                "destination-tag routing on {kind} networks"
            )))
        }
    };
    Ok(RouteCandidates {
        ports: vec![port],
        policy: Policy::DestinationTag,
    })
}

/// Adaptive candidates, computed on the fly for a single query.
pub fn adaptive_candidates(net: &Network, q: &RouteQuery) -> Result<RouteCandidates> {
    check_query(net, q)?;
    let mut memo = HashMap::new();
    let mut ports = Vec::new();
    for port in 0..net.router(q.router).n_out {
        let cost = match net.hop(q.router, q.position, port) {
            Some(Hop::Deliver(t)) if t == q.dst => 1,
            Some(Hop::Forward {
                router, position, ..
            }) => distance(net, router, position, q.dst, &mut memo).saturating_add(1),
            _ => u32::MAX,
        };
        if cost != u32::MAX {
            ports.push(port);
        }
    }
    Ok(RouteCandidates {
        ports,
        policy: Policy::AdaptiveMinimal,
    })
}

fn distance(
    net: &Network,
    router: usize,
    position: usize,
    dst: usize,
    memo: &mut HashMap<(usize, usize), u32>,
) -> u32 {
    if let Some(&d) = memo.get(&(router, position)) {
        return d;
    }
    let mut best = u32::MAX;
    for port in 0..net.router(router).n_out {
        let cost = match net.hop(router, position, port) {
            Some(Hop::Deliver(t)) if t == dst => 1,
            Some(Hop::Forward {
                router: r,
                position: p,
                ..
            }) => distance(net, r, p, dst, memo).saturating_add(1),
            _ => u32::MAX,
        };
        best = best.min(cost);
    }
    memo.insert((router, position), best);
    best
}

/// Dense table of adaptive candidates for every (router, layer,
/// destination). For networks without merged stages this is exactly
/// `routers x N` entries.
#[derive(Debug, Clone)]
pub struct RoutingTable {
    n: usize,
    /// First state index of each router; a router has one state per layer.
    offsets: Vec<usize>,
    /// `state * n + dst` -> candidate ports.
    candidates: Vec<Vec<usize>>,
    /// `state * n + dst` -> channel hops to delivery.
    distance: Vec<u32>,
    dependence_acyclic: bool,
}

impl RoutingTable {
    pub fn build(net: &Network) -> Self {
        let n = net.n_terminals();
        let mut offsets = Vec::with_capacity(net.routers().len() + 1);
        let mut total = 0;
        for r in 0..net.routers().len() {
            offsets.push(total);
            total += net.positions(r);
        }
        offsets.push(total);

        let state = |r: usize, pos: usize| offsets[r] + pos - net.router(r).layers.0;

        // Every hop strictly increases (stage, layer), so a reverse sweep in
        // that order sees successors first.
        let mut order: Vec<(usize, usize)> = net
            .routers()
            .iter()
            .flat_map(|r| (r.layers.0..=r.layers.1).map(move |p| (r.id, p)))
            .collect();
        order.sort_by_key(|&(r, p)| std::cmp::Reverse((net.router(r).stage, p, r)));

        let mut distance = vec![u32::MAX; total * n];
        let mut candidates = vec![Vec::new(); total * n];
        for &(r, pos) in &order {
            let here = state(r, pos);
            for port in 0..net.router(r).n_out {
                match net.hop(r, pos, port) {
                    Some(Hop::Deliver(t)) => {
                        relax(&mut distance, &mut candidates, here * n + t, 1, port);
                    }
                    Some(Hop::Forward {
                        router, position, ..
                    }) => {
                        let next = state(router, position);
                        for d in 0..n {
                            let via = distance[next * n + d];
                            if via != u32::MAX {
                                relax(&mut distance, &mut candidates, here * n + d, via + 1, port);
                            }
                        }
                    }
                    None => {}
                }
            }
        }

        let mut table = Self {
            n,
            offsets,
            candidates,
            distance,
            dependence_acyclic: true,
        };
        table.dependence_acyclic = !is_cyclic_directed(&table.dependence_graph(net));
        table
    }

    fn state(&self, net: &Network, router: usize, position: usize) -> Option<usize> {
        let lo = net.router(router).layers.0;
        let idx = self.offsets[router] + position.checked_sub(lo)?;
        (idx < self.offsets[router + 1]).then_some(idx)
    }

    /// Candidate ports; empty when `dst` is unreachable from this state.
    pub fn lookup(&self, net: &Network, router: usize, position: usize, dst: usize) -> &[usize] {
        match self.state(net, router, position) {
            Some(s) if dst < self.n => &self.candidates[s * self.n + dst],
            _ => &[],
        }
    }

    pub fn query(&self, net: &Network, q: &RouteQuery) -> RouteCandidates {
        RouteCandidates {
            ports: self.lookup(net, q.router, q.position, q.dst).to_vec(),
            policy: Policy::AdaptiveMinimal,
        }
    }

    /// Channel hops (including ejection) on the shortest route.
    pub fn distance(
        &self,
        net: &Network,
        router: usize,
        position: usize,
        dst: usize,
    ) -> Option<u32> {
        let s = self.state(net, router, position)?;
        let d = self.distance[s * self.n + dst];
        (d != u32::MAX).then_some(d)
    }

    /// Number of (state, destination) entries.
    pub fn len(&self) -> usize {
        self.candidates.len()
    }

    pub fn is_empty(&self) -> bool {
        self.candidates.is_empty()
    }

    /// Channel c1 depends on c2 when a packet arriving on c1 may request c2.
    pub fn dependence_graph(&self, net: &Network) -> DiGraph<usize, ()> {
        let mut g = DiGraph::with_capacity(net.channels().len(), 0);
        let nodes: Vec<_> = net.channels().iter().map(|c| g.add_node(c.id)).collect();
        for c in net.channels() {
            let (r, pos) = (c.dst.router, c.layer + 1);
            let mut next = vec![false; net.router(r).n_out];
            for d in 0..self.n {
                for &p in self.lookup(net, r, pos, d) {
                    next[p] = true;
                }
            }
            for (p, used) in next.into_iter().enumerate() {
                if let (true, Some(Attachment::Channel(c2))) = (used, net.output_attachment(r, p)) {
                    g.add_edge(nodes[c.id], nodes[c2], ());
                }
            }
        }
        g
    }

    pub fn channel_dependence_acyclic(&self) -> bool {
        self.dependence_acyclic
    }

    /// Debug dump: one object per non-empty entry.
    pub fn to_json(&self, net: &Network) -> String {
        #[derive(Serialize)]
        struct Entry<'a> {
            router: usize,
            position: usize,
            dst: usize,
            ports: &'a [usize],
        }
        let mut entries = Vec::new();
        for r in net.routers() {
            for pos in r.layers.0..=r.layers.1 {
                for dst in 0..self.n {
                    entries.push(Entry {
                        router: r.id,
                        position: pos,
                        dst,
                        ports: self.lookup(net, r.id, pos, dst),
                    });
                }
            }
        }
        serde_json::to_string_pretty(&entries).expect("serializable")
    }
}

fn relax(distance: &mut [u32], candidates: &mut [Vec<usize>], idx: usize, cost: u32, port: usize) {
    distance[idx] = distance[idx].min(cost);
    if candidates[idx].last() != Some(&port) {
        candidates[idx].push(port);
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::topology::*;

    fn tag_route(net: &Network, src: usize, dst: usize) -> Vec<usize> {
        let mut ports = Vec::new();
        let entry = net.input_terminals()[src];
        let mut router = entry.router;
        loop {
            let q = RouteQuery::new(net, router, dst);
            let port = destination_tag(net, &q).unwrap().ports[0];
            ports.push(port);
            match net.hop(router, q.position, port).unwrap() {
                Hop::Deliver(t) => {
                    assert_eq!(t, dst);
                    return ports;
                }
                Hop::Forward { router: r, .. } => router = r,
            }
        }
    }

    #[test]
    fn omega_tag_sequence() {
        let net = build_omega(8, 2).unwrap();
        for src in 0..8 {
            assert_eq!(tag_route(&net, src, 5), vec![1, 0, 1]);
            assert_eq!(tag_route(&net, src, 0), vec![0, 0, 0]);
        }
    }

    #[test]
    fn tag_delivers_on_every_delta_kind() {
        for kind in DeltaKind::ALL {
            for (n, k) in [(16, 2), (27, 3), (32, 2)] {
                let net = build_delta(kind, n, k).unwrap();
                for s in 0..n {
                    for d in 0..n {
                        let ports = tag_route(&net, s, d);
                        let path = &enumerate_paths(&net, s, d, 2).unwrap()[0];
                        assert_eq!(ports.len(), path.len());
                    }
                }
            }
        }
    }

    #[test]
    fn tag_rejects_merged_and_benes_first_half() {
        let mf = meta_flatten(
            &build_butterfly(16, 2).unwrap(),
            FlattenMethod::AllIntermediate,
        )
        .unwrap();
        assert!(matches!(
            destination_tag(&mf, &RouteQuery::new(&mf, 8, 0)),
            Err(Error::UnsupportedPolicy(_))
        ));
        let benes = build_benes(8).unwrap();
        assert!(destination_tag(&benes, &RouteQuery::new(&benes, 0, 0)).is_err());
        assert!(destination_tag(&benes, &RouteQuery::new(&benes, 8, 0)).is_ok());
    }

    #[test]
    fn benes_second_half_tag_matches_adaptive() {
        let net = build_benes(16).unwrap();
        let table = RoutingTable::build(&net);
        for r in net.routers().iter().filter(|r| r.stage >= 3) {
            for d in 0..16 {
                let q = RouteQuery::new(&net, r.id, d);
                let adaptive = table.query(&net, &q).ports;
                if adaptive.is_empty() {
                    continue;
                }
                assert_eq!(destination_tag(&net, &q).unwrap().ports, adaptive);
            }
        }
    }

    #[test]
    fn benes_first_stage_has_two_candidates() {
        let net = build_benes(8).unwrap();
        for &r in &net.stages()[0] {
            for d in 0..8 {
                let c = adaptive_candidates(&net, &RouteQuery::new(&net, r, d)).unwrap();
                assert_eq!(c.ports, vec![0, 1]);
            }
        }
    }

    #[test]
    fn table_matches_on_the_fly() {
        let b16 = build_butterfly(16, 2).unwrap();
        for net in [
            b16.clone(),
            meta_flatten(&b16, FlattenMethod::AllIntermediate).unwrap(),
            full_flatten(&b16).unwrap(),
            build_benes(16).unwrap(),
        ] {
            let table = RoutingTable::build(&net);
            for r in net.routers() {
                for pos in r.layers.0..=r.layers.1 {
                    for dst in 0..16 {
                        let q = RouteQuery {
                            router: r.id,
                            position: pos,
                            dst,
                        };
                        assert_eq!(
                            table.query(&net, &q).ports,
                            adaptive_candidates(&net, &q).unwrap().ports,
                            "{} router {} pos {pos} dst {dst}",
                            net.label(),
                            r.id
                        );
                    }
                }
            }
        }
    }

    #[test]
    fn table_sizes() {
        let net = build_omega(16, 2).unwrap();
        let table = RoutingTable::build(&net);
        assert_eq!(table.len(), net.routers().len() * 16);
        for r in net.routers() {
            for d in 0..16 {
                assert!(table.lookup(&net, r.id, r.layers.0, d).len() <= 1);
            }
        }
    }

    #[test]
    fn mf_baseline_has_adaptive_choice() {
        let mf = meta_flatten(
            &build_baseline(16, 2).unwrap(),
            FlattenMethod::AllIntermediate,
        )
        .unwrap();
        let table = RoutingTable::build(&mf);
        let any_choice = mf.stages()[1]
            .iter()
            .any(|&r| (0..16).any(|d| table.lookup(&mf, r, mf.router(r).layers.0, d).len() >= 2));
        assert!(any_choice);
    }

    #[test]
    fn mf_butterfly_keeps_single_candidates() {
        // Every butterfly boundary has a same-row link, so merging two
        // stages adds no alternative route.
        let mf = meta_flatten(
            &build_butterfly(16, 2).unwrap(),
            FlattenMethod::AllIntermediate,
        )
        .unwrap();
        let table = RoutingTable::build(&mf);
        for r in mf.routers() {
            for d in 0..16 {
                assert!(table.lookup(&mf, r.id, r.layers.0, d).len() <= 1);
            }
        }
    }
}

use proptest::prelude::*;

use minweave::metrics::{aggregate, power_proxy};
use minweave::routing::{destination_tag, RouteQuery, RoutingTable};
use minweave::sim::{self, SimConfig};
use minweave::topology::{
    build_benes, build_delta, enumerate_paths, meta_flatten, perfect_shuffle, reachable_outputs,
    validate_network, DeltaKind, FlattenMethod, Hop, Network,
};
use minweave::workload::{parse_trace, write_trace, Pattern, TraceRecord, WorkloadSpec};

fn delta_kind() -> impl Strategy<Value = DeltaKind> {
    prop::sample::select(DeltaKind::ALL.to_vec())
}

/// `(n, k)` with `n = k^s`, small enough for exhaustive checks.
fn size() -> impl Strategy<Value = (usize, usize)> {
    prop::sample::select(vec![
        (2, 2),
        (4, 2),
        (8, 2),
        (16, 2),
        (32, 2),
        (9, 3),
        (27, 3),
        (16, 4),
        (64, 4),
    ])
}

/// Follows destination tags from `src`, returning the terminal reached.
fn follow_tags(net: &Network, src: usize, dst: usize) -> usize {
    let entry = net.input_terminals()[src];
    let (mut router, mut pos) = (entry.router, net.entry_position(entry.router, entry.port));
    loop {
        let q = RouteQuery {
            router,
            position: pos,
            dst,
        };
        let port = destination_tag(net, &q).unwrap().ports[0];
        match net.hop(router, pos, port).unwrap() {
            Hop::Deliver(t) => return t,
            Hop::Forward {
                router: r,
                position,
                ..
            } => {
                router = r;
                pos = position;
            }
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn shuffle_is_a_permutation_of_order_s((n, k) in size()) {
        let s = (n as f64).log(k as f64).round() as usize;
        let mut seen = vec![false; n];
        for i in 0..n {
            let j = perfect_shuffle(i, n, k).unwrap();
            prop_assert!(!seen[j]);
            seen[j] = true;
            let mut x = i;
            for _ in 0..s {
                x = perfect_shuffle(x, n, k).unwrap();
            }
            prop_assert_eq!(x, i);
        }
    }

    #[test]
    fn delta_networks_self_route(kind in delta_kind(), (n, k) in size(), src_seed in any::<usize>(), dst_seed in any::<usize>()) {
        let net = build_delta(kind, n, k).unwrap();
        prop_assert!(validate_network(&net).is_ok());
        let (src, dst) = (src_seed % n, dst_seed % n);
        prop_assert_eq!(follow_tags(&net, src, dst), dst);
        prop_assert_eq!(enumerate_paths(&net, src, dst, usize::MAX).unwrap().len(), 1);
    }

    #[test]
    fn delta_kinds_have_identical_power((n, k) in size()) {
        let reports: Vec<_> = DeltaKind::ALL
            .iter()
            .map(|&d| power_proxy(&build_delta(d, n, k).unwrap()))
            .collect();
        prop_assert!(reports.windows(2).all(|w| w[0] == w[1]));
    }

    #[test]
    fn meta_flatten_keeps_full_access(kind in delta_kind(), s in 3usize..=6, method_b in any::<bool>()) {
        let n = 1 << s;
        let net = build_delta(kind, n, 2).unwrap();
        let method = if method_b { FlattenMethod::AllIntermediate } else { FlattenMethod::GroupedPairs };
        let mf = match meta_flatten(&net, method) {
            Ok(mf) => mf,
            Err(_) => {
                // grouped pairs need an even number of intermediate stages
                prop_assert!(!method_b && (s - 2) % 2 == 1);
                return Ok(());
            }
        };
        prop_assert!(validate_network(&mf).is_ok());
        prop_assert_eq!(mf.n_terminals(), n);
        if method_b {
            prop_assert_eq!(mf.stage_count(), 3);
        }
        for src in 0..n {
            prop_assert_eq!(reachable_outputs(&mf, src).len(), n);
        }
        // Edge stages are untouched.
        let first = &mf.stages()[0];
        prop_assert!(first.iter().all(|&r| mf.router(r).n_in == 2));
        let table = RoutingTable::build(&mf);
        prop_assert!(table.channel_dependence_acyclic());
    }

    #[test]
    fn benes_path_count(s in 1usize..=5, src_seed in any::<usize>(), dst_seed in any::<usize>()) {
        let n = 1 << s;
        let net = build_benes(n).unwrap();
        let (src, dst) = (src_seed % n, dst_seed % n);
        let paths = enumerate_paths(&net, src, dst, usize::MAX).unwrap();
        prop_assert_eq!(paths.len(), n / 2);
    }

    #[test]
    fn trace_text_round_trips(recs in prop::collection::vec((0u64..1000, 0usize..32, 0usize..32, 1usize..9), 0..40)) {
        let mut records: Vec<TraceRecord> = recs
            .into_iter()
            .map(|(cycle, src, dst, n_flits)| TraceRecord { cycle, src, dst, n_flits })
            .collect();
        records.sort_by_key(|r| r.cycle);
        let text = write_trace(&records);
        let back = parse_trace(&text, 32, std::path::Path::new("p.trace")).unwrap();
        prop_assert_eq!(back, records);
    }
}

/// Random short runs: every wormhole invariant holds and drained runs
/// deliver everything no faster than the zero-load bound.
mod simulation {
    use super::*;

    fn networks() -> Vec<Network> {
        let mut v: Vec<Network> = DeltaKind::ALL
            .iter()
            .map(|&d| build_delta(d, 8, 2).unwrap())
            .collect();
        v.push(build_benes(8).unwrap());
        v.push(
            meta_flatten(
                &build_delta(DeltaKind::Baseline, 16, 2).unwrap(),
                FlattenMethod::AllIntermediate,
            )
            .unwrap(),
        );
        v.push(
            meta_flatten(
                &build_delta(DeltaKind::Butterfly, 16, 2).unwrap(),
                FlattenMethod::AllIntermediate,
            )
            .unwrap(),
        );
        v
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(24))]

        #[test]
        fn drained_runs_deliver_everything(
            which in 0usize..7,
            rate in 0.0f64..0.8,
            flits in 1usize..5,
            depth in 1usize..4,
            seed in any::<u64>(),
        ) {
            let net = &networks()[which];
            let n = net.n_terminals();
            let mut w = WorkloadSpec::new(Pattern::Uniform, rate).with_seed(seed);
            w.msg_flits = flits;
            let records = w.generate(n, 300).unwrap();
            let cfg = SimConfig { buffer_depth: depth, ..SimConfig::drained() };
            let out = sim::run(net, &records, &cfg).unwrap();
            prop_assert!(out.violations.is_empty(), "{:?}", out.violations);
            prop_assert_eq!(out.messages.len(), records.len());
            prop_assert_eq!(out.counters.in_flight_flits, 0);
            prop_assert_eq!(out.counters.injected_flits, out.counters.ejected_flits);
            for m in &out.messages {
                let lat = m.latency().expect("drained");
                prop_assert!(lat >= (m.hops + m.intra_hops + m.n_flits) as u64);
                prop_assert!(m.t_inject.unwrap() >= m.t_gen);
            }
        }

        #[test]
        fn throughput_matches_recount(which in 0usize..7, rate in 0.05f64..0.6, seed in any::<u64>()) {
            let net = &networks()[which];
            let n = net.n_terminals();
            let records = WorkloadSpec::new(Pattern::Uniform, rate).with_seed(seed).generate(n, 1500).unwrap();
            let cfg = SimConfig { warmup_cycles: 300, measure_cycles: 1200, ..SimConfig::default() };
            let out = sim::run(net, &records, &cfg).unwrap();
            let stats = aggregate(&out.messages, out.window, n, (out.counters.alloc_attempts, out.counters.alloc_denied));
            let (start, end) = out.window;
            let recount: usize = out
                .messages
                .iter()
                .filter(|m| m.t_eject.is_some_and(|t| t > start && t <= end))
                .map(|m| m.n_flits)
                .sum();
            let expected = recount as f64 / ((end - start) as f64 * n as f64);
            prop_assert!((stats.throughput - expected).abs() < 1e-12);
            prop_assert!((0.0..=1.0).contains(&stats.blocking_rate));
            prop_assert!(stats.avg_latency >= 0.0 && stats.avg_hops >= 0.0);
        }
    }
}

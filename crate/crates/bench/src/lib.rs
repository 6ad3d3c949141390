use std::hint::black_box;

use criterion::{BenchmarkId, Criterion, Throughput};
use minweave::experiment::default_networks;
use minweave::routing::RoutingTable;
use minweave::sim::{self, SimConfig};
use minweave::topology::{enumerate_paths, Network};
use minweave::workload::{Pattern, WorkloadSpec};

fn networks() -> Vec<Network> {
    default_networks(32)
        .iter()
        .map(|s| s.build().unwrap())
        .collect()
}

pub fn benchmarks(c: &mut Criterion) {
    build(c);
    routing(c);
    simulate(c);
}

fn build(c: &mut Criterion) {
    let mut group = c.benchmark_group("build");
    for spec in default_networks(32) {
        let label = spec.build().unwrap().label();
        group.bench_function(label, |b| b.iter(|| black_box(&spec).build().unwrap()));
    }
    group.finish();
}

fn routing(c: &mut Criterion) {
    let mut group = c.benchmark_group("routing");
    for net in networks() {
        group.bench_with_input(BenchmarkId::new("table", net.label()), &net, |b, net| {
            b.iter(|| RoutingTable::build(net))
        });
    }
    let benes = &networks()[4];
    group.bench_function("paths/benes-all-pairs", |b| {
        b.iter(|| {
            (0..32)
                .flat_map(|s| (0..32).map(move |d| (s, d)))
                .map(|(s, d)| enumerate_paths(benes, s, d, usize::MAX).unwrap().len())
                .sum::<usize>()
        })
    });
    group.finish();
}

fn simulate(c: &mut Criterion) {
    const CYCLES: u64 = 2_000;
    let cfg = SimConfig {
        warmup_cycles: 0,
        measure_cycles: CYCLES,
        ..SimConfig::default()
    };
    let mut group = c.benchmark_group("simulate");
    group.throughput(Throughput::Elements(CYCLES));
    group.sample_size(20);
    for rate in [0.1, 0.4] {
        let records = WorkloadSpec::new(Pattern::Uniform, rate)
            .with_seed(1)
            .generate(32, CYCLES)
            .unwrap();
        for net in networks() {
            let id = BenchmarkId::new(net.label(), rate);
            group.bench_with_input(id, &records, |b, recs| {
                b.iter(|| sim::run(&net, recs, &cfg).unwrap())
            });
        }
    }
    group.finish();
}

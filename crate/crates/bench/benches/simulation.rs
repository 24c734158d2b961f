use criterion::{black_box, criterion_group, criterion_main, BenchmarkId, Criterion};
use masqkd_bench::{honest, random_bits, s2_attack};
use masqkd_core::harness::run_experiment;
use masqkd_core::postprocess::privacy_amplification;
use masqkd_core::protocol::RoundEngine;
use masqkd_core::rng::Stream;
use masqkd_core::{run_protocol, AttackModel, ProtocolKind};

fn rounds(c: &mut Criterion) {
    let mut group = c.benchmark_group("round");
    let engines = [
        (
            "base",
            RoundEngine::new(ProtocolKind::Base, AttackModel::none()).unwrap(),
        ),
        (
            "improved",
            RoundEngine::new(ProtocolKind::Improved, AttackModel::none()).unwrap(),
        ),
        (
            "krawec",
            RoundEngine::new(ProtocolKind::KrawecRef, AttackModel::none()).unwrap(),
        ),
        ("base_s2", RoundEngine::new(ProtocolKind::Base, s2_attack()).unwrap()),
    ];
    for (name, engine) in &engines {
        let mut i = 0u64;
        group.bench_function(*name, |b| {
            b.iter(|| {
                i += 1;
                engine.run_round(7, black_box(i)).unwrap()
            })
        });
    }
    group.finish();
}

fn protocol(c: &mut Criterion) {
    let mut group = c.benchmark_group("run_protocol");
    group.sample_size(10);
    for kind in ProtocolKind::ALL {
        let config = honest(kind, 500);
        group.bench_with_input(BenchmarkId::new(kind.to_string(), 500), &config, |b, config| {
            b.iter(|| run_protocol(config).unwrap())
        });
    }
    group.bench_function("experiment_base_500", |b| {
        let config = honest(ProtocolKind::Base, 500);
        b.iter(|| run_experiment(&config).unwrap())
    });
    group.finish();
}

fn amplification(c: &mut Criterion) {
    let mut group = c.benchmark_group("privacy_amplification");
    for len in [256usize, 1024, 4096] {
        let bits = random_bits(len, 3);
        group.bench_with_input(BenchmarkId::from_parameter(len), &bits, |b, bits| {
            b.iter(|| privacy_amplification(bits, bits.len() / 2, &mut Stream::new(5, 0)).unwrap())
        });
    }
    group.finish();
}

criterion_group!(benches, rounds, protocol, amplification);
criterion_main!(benches);

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use trilocal_core::exec::Execution;
use trilocal_core::lhv::enumerate_deterministic;
use trilocal_core::measurements::default_intermediate_settings;
use trilocal_core::network::{ConditionalOperators, Network, Route, ScoreKind};
use trilocal_core::optimize::{maximize_trilocal, OptimizerConfig};
use trilocal_core::states::StateFamily;

const MODES: [(&str, Execution); 2] = [("sequential", Execution::Sequential), ("parallel", Execution::Parallel)];

fn restarts(c: &mut Criterion) {
    let mut g = c.benchmark_group("optimizer_restarts");
    g.sample_size(10);
    let fam = StateFamily::Gghz { alpha: 0.6 };
    for (name, execution) in MODES {
        let cfg = OptimizerConfig {
            restarts: 16,
            execution,
            ..Default::default()
        };
        g.bench_function(BenchmarkId::from_parameter(name), |b| b.iter(|| maximize_trilocal(&fam, &cfg).unwrap()));
    }
    g.finish();
}

fn conditional_operators(c: &mut Criterion) {
    let mut g = c.benchmark_group("conditional_operators_depolarized");
    g.sample_size(10);
    let net = Network::identical(StateFamily::Depolarized { epsilon: 0.8 }.source_state(3).unwrap(), 3).unwrap();
    let inter = default_intermediate_settings(3);
    for (name, exec) in MODES {
        g.bench_function(BenchmarkId::from_parameter(name), |b| {
            b.iter(|| ConditionalOperators::compute(&net, &inter, Route::Dense, exec).unwrap())
        });
    }
    g.finish();
}

fn vertices(c: &mut Criterion) {
    let mut g = c.benchmark_group("deterministic_vertices");
    for (name, exec) in MODES {
        g.bench_function(BenchmarkId::from_parameter(name), |b| b.iter(|| enumerate_deterministic(ScoreKind::NLocal, exec)));
    }
    g.finish();
}

criterion_group!(benches, restarts, conditional_operators, vertices);
criterion_main!(benches);

use criterion::{black_box, criterion_group, criterion_main, BenchmarkId, Criterion};

use sprig_core::equilibrium::{best_response_check, linspace, monte_carlo_estimate, solve_pbe, sweep, GameParameters};
use sprig_core::fixtures::{self, protocol_scenarios};
use sprig_core::protocol::replay_records;
use sprig_core::simulator::{presets, run_scenario};

fn equilibrium(c: &mut Criterion) {
    let mut g = c.benchmark_group("equilibrium");
    for sigma2 in [5.0, 30.0, 40.0] {
        let theta = GameParameters::baseline(sigma2);
        g.bench_with_input(BenchmarkId::new("solve_pbe", sigma2), &theta, |b, t| {
            b.iter(|| solve_pbe(black_box(t)))
        });
        let sol = solve_pbe(&theta).unwrap();
        g.bench_with_input(BenchmarkId::new("best_response_check", sigma2), &theta, |b, t| {
            b.iter(|| best_response_check(black_box(t), &sol, 1e-9))
        });
    }
    let values = linspace(0.0, 60.0, 601);
    g.bench_function("sweep_601", |b| {
        b.iter(|| sweep(&GameParameters::baseline(0.0), "sigma2", black_box(&values)))
    });
    let sol = solve_pbe(&GameParameters::baseline(40.0)).unwrap();
    g.sample_size(10);
    g.bench_function("monte_carlo_1e5", |b| {
        b.iter(|| monte_carlo_estimate(&sol, 100_000, black_box(1)))
    });
    g.finish();
}

fn protocol(c: &mut Criterion) {
    let mut g = c.benchmark_group("protocol");
    for sc in protocol_scenarios() {
        g.bench_function(BenchmarkId::new("replay", sc.name), |b| {
            b.iter(|| replay_records(black_box(&sc.setup), black_box(&sc.records)).unwrap())
        });
    }
    for (name, doc) in fixtures::worked_proofs() {
        g.bench_function(BenchmarkId::new("validate", name), |b| {
            b.iter(|| doc.structural_report(3).unwrap())
        });
    }
    g.finish();
}

fn simulator(c: &mut Criterion) {
    let mut g = c.benchmark_group("simulator");
    for config in presets::all() {
        g.bench_function(BenchmarkId::new("run_scenario", &config.name), |b| {
            b.iter(|| run_scenario(black_box(&config)).unwrap())
        });
    }
    g.finish();
}

criterion_group!(benches, equilibrium, protocol, simulator);
criterion_main!(benches);

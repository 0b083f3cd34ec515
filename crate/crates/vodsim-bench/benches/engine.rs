use criterion::{black_box, criterion_group, criterion_main, Criterion};
use vodsim_core::analytic::ServiceClass;
use vodsim_core::engine::{run, sweep_adjacency, SimConfig};

fn small_run_config() -> SimConfig {
    SimConfig {
        sim_time_s: 120.0,
        viewers_per_proxy: (10, 10),
        classes: vec![
            ServiceClass { arrival_rate: 0.02, holding_time: 60.0, playback_rate: 600.0 },
            ServiceClass { arrival_rate: 0.02, holding_time: 60.0, playback_rate: 600.0 },
        ],
        ..SimConfig::default()
    }
}

fn bench_run(c: &mut Criterion) {
    let config = small_run_config();
    c.bench_function("engine_run_120s", |b| b.iter(|| run(black_box(&config)).unwrap()));
}

fn bench_sweep(c: &mut Criterion) {
    let config = SimConfig::default();
    c.bench_function("sweep_size3_100_trials", |b| {
        b.iter(|| sweep_adjacency(black_box(&config), &[3], 100).unwrap())
    });
}

criterion_group!(benches, bench_run, bench_sweep);
criterion_main!(benches);

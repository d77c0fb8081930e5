use std::hint::black_box;

use criterion::{criterion_group, criterion_main, Criterion};
use wgqed_core::faddeeva::faddeeva;
use wgqed_core::time_domain::integrate_dde;
use wgqed_core::{freq_domain, DdeSettings, ScenarioInputs, SystemConfig, C64};

fn chain(n_atoms: usize, spacing: f64) -> ScenarioInputs {
    ScenarioInputs {
        system: SystemConfig {
            n_atoms,
            spacing,
            ..Default::default()
        },
        ..Default::default()
    }
}

fn stationary(c: &mut Criterion) {
    let mut group = c.benchmark_group("freq_domain");
    for (n, a) in [(1, 0.5), (2, 0.25), (5, 0.25)] {
        let scenario = chain(n, a).validate().unwrap();
        group.bench_function(format!("solve_n{n}"), |b| {
            b.iter(|| freq_domain::solve(black_box(&scenario)).unwrap())
        });
    }
    group.finish();
}

fn delay_equations(c: &mut Criterion) {
    let mut group = c.benchmark_group("time_domain");
    group.sample_size(10);
    for (n, a) in [(1, 0.5), (2, 0.25), (5, 0.125)] {
        let scenario = chain(n, a).validate().unwrap();
        let settings = DdeSettings::for_scenario(&scenario);
        group.bench_function(format!("integrate_n{n}"), |b| {
            b.iter(|| integrate_dde(black_box(&scenario), &settings).unwrap())
        });
    }
    group.finish();
}

fn error_function(c: &mut Criterion) {
    let points: Vec<C64> = (0..256)
        .map(|i| {
            let t = i as f64 / 256.0;
            C64::new(20.0 * t - 10.0, 8.0 * (t * 7.0).sin())
        })
        .collect();
    c.bench_function("faddeeva_256", |b| {
        b.iter(|| points.iter().map(|&z| faddeeva(black_box(z))).sum::<C64>())
    });
}

criterion_group!(benches, stationary, delay_equations, error_function);
criterion_main!(benches);

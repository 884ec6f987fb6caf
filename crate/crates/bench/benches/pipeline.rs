//! Benchmarks for the hot paths: adaptive integration, the shooting orbit,
//! the constant search, profile evaluation, and one Yamabe double shot.

use criterion::{criterion_group, criterion_main, BatchSize, Criterion};
use koiso_cao::ode::{integrate, IntegratorConfig};
use koiso_cao::soliton::{build_profile, cao_root, find_c0, first_minimum, SolitonParams};
use koiso_cao::yamabe::YamabeProblem;
use std::hint::black_box;

fn bench_integrator(c: &mut Criterion) {
    let tau = 2.0 * std::f64::consts::PI;
    let cfg = IntegratorConfig::default();
    c.bench_function("oscillator_period", |b| {
        b.iter(|| {
            let traj = integrate(
                |_t, y: &[f64; 2]| [y[1], -y[0]],
                black_box([1.0, 0.0]),
                0.0,
                tau,
                &cfg,
                &[],
            )
            .unwrap();
            black_box(traj.end_state())
        })
    });
}

fn bench_soliton(c: &mut Criterion) {
    let c0 = cao_root().unwrap();
    c.bench_function("cao_root", |b| b.iter(|| black_box(cao_root().unwrap())));
    c.bench_function("first_minimum_orbit", |b| {
        b.iter(|| black_box(first_minimum(&SolitonParams::shooting(black_box(c0))).unwrap()))
    });
    let mut group = c.benchmark_group("search");
    group.sample_size(10);
    group.bench_function("find_c0", |b| {
        b.iter(|| black_box(find_c0((-0.6, -0.4), 1e-10).unwrap().c0))
    });
    group.bench_function("build_profile", |b| {
        b.iter(|| black_box(build_profile(c0).unwrap().beta()))
    });
    group.finish();

    let profile = build_profile(c0).unwrap();
    c.bench_function("profile_eval", |b| {
        let beta = profile.beta();
        let mut t = 0.0;
        b.iter(|| {
            t = (t + 0.137) % beta;
            black_box(profile.eval(t).unwrap())
        })
    });
}

fn bench_yamabe(c: &mut Criterion) {
    let c0 = cao_root().unwrap();
    let profile = build_profile(c0).unwrap();
    c.bench_function("yamabe_shoot_pair", |b| {
        b.iter_batched(
            || YamabeProblem::new(&profile),
            |prob| black_box(prob.shoot_pair(2.09, 1.88).unwrap()),
            BatchSize::SmallInput,
        )
    });
}

criterion_group!(benches, bench_integrator, bench_soliton, bench_yamabe);
criterion_main!(benches);

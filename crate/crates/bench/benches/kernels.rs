//! Microbenchmarks for the numerical kernels that dominate wall time:
//! the dense matrix exponential, the vectorized steady-state solve, and
//! a time-bin evolution step.

use criterion::{criterion_group, criterion_main, Criterion};
use std::hint::black_box;

use vqed_core::lindblad::{build_v_atom_model, steady_state_of, vectorize};
use vqed_core::mps::{build_step_unitary, TensorTrainState, TimeBinConfig};
use vqed_core::SystemParams;

fn delayed_params() -> SystemParams {
    SystemParams {
        omega: 1.0,
        dphi: std::f64::consts::FRAC_PI_2,
        tau: 0.3,
        ..SystemParams::default()
    }
}

fn bench_step_unitary(c: &mut Criterion) {
    let p = delayed_params();
    c.bench_function("step_unitary_27", |b| {
        b.iter(|| build_step_unitary(black_box(&p), 0.02, 3).unwrap())
    });
}

fn bench_steady_state(c: &mut Criterion) {
    let p = SystemParams {
        omega: 1.5,
        gamma_prime: 0.05,
        delta1: 0.3,
        delta2: -0.3,
        ..SystemParams::default()
    };
    let model = build_v_atom_model(&p).unwrap();
    c.bench_function("liouvillian_build_9", |b| {
        b.iter(|| vectorize(black_box(&model)))
    });
    c.bench_function("steady_state_9", |b| {
        b.iter(|| steady_state_of(black_box(&model)).unwrap())
    });
}

fn bench_time_bin_step(c: &mut Criterion) {
    let p = delayed_params();
    let cfg = TimeBinConfig {
        dt: 0.02,
        ..TimeBinConfig::default()
    };
    // Warm past the transient so every benched step pays the full
    // swap-down/swap-up cost of a loaded loop.
    let mut state = TensorTrainState::new(&p, &cfg).unwrap();
    let m = (p.tau / cfg.dt).round() as usize;
    for _ in 0..2 * m {
        state.step().unwrap();
    }
    c.bench_function("time_bin_step_m15", |b| {
        b.iter(|| state.step().unwrap())
    });
}

criterion_group! {
    name = benches;
    config = Criterion::default().sample_size(20);
    targets = bench_step_unitary, bench_steady_state, bench_time_bin_step
}
criterion_main!(benches);

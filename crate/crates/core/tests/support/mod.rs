//! Shared test oracles and fixtures.
#![allow(dead_code)]

pub mod dd;

use beamgp_core::beam_oracle::{BeamSpec, SensorPlan, Support};

pub const BENCH_C: f64 = 0.1;

/// Unit cantilever (q = L = EI = 1) discretized in 20 elements.
pub fn bench_spec() -> BeamSpec {
    BeamSpec::uniform(1.0, 1.0, 20, Support::CantileverLeft, 1.0)
}

/// Four equally spaced deflection sensors, five readings each, SNR 10.
pub fn bench_plan(seed: u64) -> SensorPlan {
    SensorPlan {
        seed,
        fiber_distance: Some(BENCH_C),
        ..SensorPlan::benchmark(1.0)
    }
}

pub fn grid(n: usize, length: f64) -> Vec<f64> {
    (0..n).map(|i| length * i as f64 / (n - 1) as f64).collect()
}

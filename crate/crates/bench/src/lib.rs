//! Shared fixtures for the benchmarks.

use necrostrip_core::{flat_stationary, FlatStationary, TumorParams};

/// Reference constants and their flat state.
pub fn reference() -> (TumorParams, FlatStationary) {
    let p = TumorParams::new(1.0, 2.0, 6.0, 1.0, 1.0, 1.0).expect("valid constants");
    let fs = flat_stationary(&p).expect("flat state exists");
    (p, fs)
}

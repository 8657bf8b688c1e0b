//! Shared fixtures for the criterion benchmarks.

use rftt_core::generate::{Family, GenSpec};
use rftt_core::instance::Instance;

pub fn tree_instance(n: usize, seed: u64) -> Instance {
    GenSpec::random(Family::RandomTree, n, 100, 64, seed)
        .build()
        .expect("valid generator spec")
}

pub fn line_instance(n: usize, seed: u64) -> Instance {
    let spec = GenSpec {
        max_turnover: Some(16),
        ..GenSpec::random(Family::RandomLine, n, 50, 16, seed)
    };
    spec.build().expect("valid generator spec")
}

pub fn general_instance(n: usize, seed: u64) -> Instance {
    GenSpec::random(Family::RandomGeneral, n, 100, 64, seed)
        .build()
        .expect("valid generator spec")
}

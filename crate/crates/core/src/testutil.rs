//! Shared instance builders for tests.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::instance::{Instance, VertexId};
use crate::rational::rat;

/// Depot 0, then a path 0-1-2-… with the given edge weights and client
/// turnovers.
pub fn chain(name: &str, weights: &[i128], turnovers: &[u32]) -> Instance {
    assert_eq!(weights.len(), turnovers.len());
    let mut vertices = vec![(VertexId(0), None)];
    let mut edges = Vec::new();
    for (i, (&w, &t)) in weights.iter().zip(turnovers).enumerate() {
        vertices.push((VertexId(i as i64 + 1), Some(t)));
        edges.push((VertexId(i as i64), VertexId(i as i64 + 1), rat(w)));
    }
    Instance::new(name, VertexId(0), vertices, edges).unwrap()
}

/// Depot-centered star with unit edges.
pub fn unit_star(turnovers: &[u32]) -> Instance {
    weighted_star(&turnovers.iter().map(|&t| (1, t)).collect::<Vec<_>>())
}

/// Depot-centered star; one `(weight, turnover)` pair per leaf.
pub fn weighted_star(leaves: &[(i128, u32)]) -> Instance {
    let mut vertices = vec![(VertexId(0), None)];
    let mut edges = Vec::new();
    for (i, &(w, t)) in leaves.iter().enumerate() {
        vertices.push((VertexId(i as i64 + 1), Some(t)));
        edges.push((VertexId(0), VertexId(i as i64 + 1), rat(w)));
    }
    Instance::new("star", VertexId(0), vertices, edges).unwrap()
}

/// Random tree with bounded weights and turnovers; optionally only
/// power-of-two turnovers.
pub fn random_tree(n: usize, max_w: i128, max_tau: u32, pow2: bool, seed: u64) -> Instance {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut vertices = vec![(VertexId(0), None)];
    let mut edges = Vec::new();
    for i in 1..=n {
        let tau = random_tau(&mut rng, max_tau, pow2);
        vertices.push((VertexId(i as i64), Some(tau)));
        let attach = rng.gen_range(0..i) as i64;
        edges.push((
            VertexId(attach),
            VertexId(i as i64),
            rat(rng.gen_range(1..=max_w)),
        ));
    }
    Instance::new(format!("rt-{n}-{seed}"), VertexId(0), vertices, edges).unwrap()
}

pub fn random_tau(rng: &mut ChaCha8Rng, max_tau: u32, pow2: bool) -> u32 {
    let t = rng.gen_range(1..=max_tau);
    if pow2 {
        let mut p = 1;
        while p * 2 <= t {
            p *= 2;
        }
        p
    } else {
        t
    }
}

//! Benchmark instance generators.
//!
//! Random families (star, line, tree, general), the pinwheel reduction
//! instances on stars and series-parallel graphs, the 3-partition star, and
//! the path family `G_i` / layered family `H_i` whose non-decreasing spanning
//! structures exhibit the logarithmic optimality gap.
//!
//! Every generator is deterministic in its seed: the same spec always yields
//! a byte-identical instance file.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::instance::{Instance, VertexId};
use crate::rational::rat;
use crate::schedule::Schedule;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Family {
    RandomTree,
    RandomStar,
    RandomLine,
    RandomGeneral,
    PinwheelStar,
    PinwheelSp,
    PartitionStar,
    Gi,
    Hi,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PinwheelShape {
    Star,
    SeriesParallel,
}

/// Declarative generator spec; the unit of reproducibility for benchmarks.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GenSpec {
    pub family: Family,
    #[serde(default)]
    pub seed: u64,
    /// Client count for random families.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max_weight: Option<i64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max_turnover: Option<u32>,
    /// Restrict random turnovers to powers of two.
    #[serde(default, skip_serializing_if = "std::ops::Not::not")]
    pub pow2: bool,
    /// Extra non-tree edges for `random_general`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub extra_edges: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub periods: Option<Vec<u64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub shape: Option<PinwheelShape>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ints: Option<Vec<u64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub m: Option<u64>,
    /// Family index for `gi` / `hi`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub i: Option<u32>,
}

impl GenSpec {
    pub fn random(
        family: Family,
        n: usize,
        max_weight: i64,
        max_turnover: u32,
        seed: u64,
    ) -> GenSpec {
        GenSpec {
            family,
            seed,
            n: Some(n),
            max_weight: Some(max_weight),
            max_turnover: Some(max_turnover),
            pow2: false,
            extra_edges: None,
            periods: None,
            shape: None,
            ints: None,
            m: None,
            i: None,
        }
    }

    pub fn build(&self) -> Result<Instance> {
        match self.family {
            Family::RandomTree | Family::RandomStar | Family::RandomLine | Family::RandomGeneral => {
                gen_random(self)
            }
            Family::PinwheelStar => gen_pinwheel(
                self.periods.as_deref().unwrap_or(&[]),
                self.shape.unwrap_or(PinwheelShape::Star),
            ),
            Family::PinwheelSp => gen_pinwheel(
                self.periods.as_deref().unwrap_or(&[]),
                self.shape.unwrap_or(PinwheelShape::SeriesParallel),
            ),
            Family::PartitionStar => {
                let ints = self
                    .ints
                    .as_deref()
                    .ok_or_else(|| Error::InvalidGenSpec("partition_star needs --ints".into()))?;
                let m = self
                    .m
                    .ok_or_else(|| Error::InvalidGenSpec("partition_star needs --m".into()))?;
                gen_partition_star(ints, m)
            }
            Family::Gi => gen_gi(
                self.i
                    .ok_or_else(|| Error::InvalidGenSpec("gi needs --i".into()))?,
            ),
            Family::Hi => gen_hi(
                self.i
                    .ok_or_else(|| Error::InvalidGenSpec("hi needs --i".into()))?,
            ),
        }
    }
}

/// Seeded random instance of the requested topology. Weights are uniform
/// integers in `[1, max_weight]`, turnovers uniform in `[1, max_turnover]`
/// (optionally rounded down to powers of two).
pub fn gen_random(spec: &GenSpec) -> Result<Instance> {
    let n = spec
        .n
        .ok_or_else(|| Error::InvalidGenSpec("random family needs --n".into()))?;
    let max_w = spec.max_weight.unwrap_or(100);
    let max_tau = spec.max_turnover.unwrap_or(64);
    if n < 1 || max_w < 1 || max_tau < 1 {
        return Err(Error::InvalidGenSpec(
            "random family needs n >= 1, max weight >= 1, max turnover >= 1".into(),
        ));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let pow2 = spec.pow2;
    let tau = move |rng: &mut ChaCha8Rng| -> u32 {
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
    };
    let mut vertices = vec![(VertexId(0), None)];
    let mut edges = Vec::new();
    let family_tag = match spec.family {
        Family::RandomTree => "tree",
        Family::RandomStar => "star",
        Family::RandomLine => "line",
        Family::RandomGeneral => "general",
        _ => unreachable!("gen_random called for non-random family"),
    };
    match spec.family {
        Family::RandomStar => {
            for i in 1..=n {
                let t = tau(&mut rng);
                vertices.push((VertexId(i as i64), Some(t)));
                edges.push((
                    VertexId(0),
                    VertexId(i as i64),
                    rat(rng.gen_range(1..=max_w) as i128),
                ));
            }
        }
        Family::RandomLine => {
            // Path over n clients plus the depot, depot at a random position.
            let pos = rng.gen_range(0..=n);
            let mut order: Vec<i64> = Vec::with_capacity(n + 1);
            let mut next_id = 1i64;
            for p in 0..=n {
                if p == pos {
                    order.push(0);
                } else {
                    order.push(next_id);
                    next_id += 1;
                }
            }
            for i in 1..=n {
                let t = tau(&mut rng);
                vertices.push((VertexId(i as i64), Some(t)));
            }
            for w in order.windows(2) {
                edges.push((
                    VertexId(w[0]),
                    VertexId(w[1]),
                    rat(rng.gen_range(1..=max_w) as i128),
                ));
            }
        }
        Family::RandomTree | Family::RandomGeneral => {
            for i in 1..=n {
                let t = tau(&mut rng);
                vertices.push((VertexId(i as i64), Some(t)));
                let attach = rng.gen_range(0..i) as i64;
                edges.push((
                    VertexId(attach),
                    VertexId(i as i64),
                    rat(rng.gen_range(1..=max_w) as i128),
                ));
            }
            if spec.family == Family::RandomGeneral {
                let extra = spec.extra_edges.unwrap_or(n / 2);
                let mut attempts = 0;
                let mut added = 0;
                while added < extra && attempts < 20 * extra.max(1) {
                    attempts += 1;
                    let a = rng.gen_range(0..=n) as i64;
                    let b = rng.gen_range(0..=n) as i64;
                    if a == b {
                        continue;
                    }
                    let dup = edges
                        .iter()
                        .any(|(u, v, _)| (u.0 == a && v.0 == b) || (u.0 == b && v.0 == a));
                    if dup {
                        continue;
                    }
                    edges.push((
                        VertexId(a),
                        VertexId(b),
                        rat(rng.gen_range(1..=max_w) as i128),
                    ));
                    added += 1;
                }
            }
        }
        _ => unreachable!(),
    }
    Instance::new(
        format!("{}-n{}-s{}", family_tag, n, spec.seed),
        VertexId(0),
        vertices,
        edges,
    )
}

/// Pinwheel reduction instances.
///
/// * `Star`: unit-weight star, one leaf per job `j` with `τ = p_j`. The
///   min-max value is 2 iff a pinwheel schedule exists, and at least 4
///   otherwise.
/// * `SeriesParallel`: vertex set `{s, w¹, w, w²} ∪ V¹ ∪ V²` with edges
///   `(s,v)` for all `v ∈ V¹ ∪ V²`, `(wⁱ, v_jⁱ)` for all `j`, plus
///   `(w¹,w)` and `(w²,w)`, all unit weights; `τ_{w¹} = τ_w = τ_{w²} = 1`
///   and `τ_{v_jⁱ} = p_j`. The min-avg value is 6 iff a pinwheel schedule
///   exists.
pub fn gen_pinwheel(periods: &[u64], shape: PinwheelShape) -> Result<Instance> {
    if periods.is_empty() {
        return Err(Error::InvalidGenSpec("empty period list".into()));
    }
    if periods.iter().any(|&p| p == 0) {
        return Err(Error::InvalidGenSpec("nonpositive period".into()));
    }
    let tau = |p: u64| -> Result<u32> {
        u32::try_from(p).map_err(|_| Error::InvalidGenSpec(format!("period {p} too large")))
    };
    let tag = periods
        .iter()
        .map(|p| p.to_string())
        .collect::<Vec<_>>()
        .join(",");
    match shape {
        PinwheelShape::Star => {
            let mut vertices = vec![(VertexId(0), None)];
            let mut edges = Vec::new();
            for (j, &p) in periods.iter().enumerate() {
                vertices.push((VertexId(j as i64 + 1), Some(tau(p)?)));
                edges.push((VertexId(0), VertexId(j as i64 + 1), rat(1)));
            }
            Instance::new(format!("pinwheel-star-{tag}"), VertexId(0), vertices, edges)
        }
        PinwheelShape::SeriesParallel => {
            let n = periods.len() as i64;
            // ids: 0 = s, 1 = w¹, 2 = w, 3 = w², then V¹, then V².
            let w1 = VertexId(1);
            let w = VertexId(2);
            let w2 = VertexId(3);
            let v1 = |j: i64| VertexId(4 + j);
            let v2 = |j: i64| VertexId(4 + n + j);
            let mut vertices = vec![
                (VertexId(0), None),
                (w1, Some(1)),
                (w, Some(1)),
                (w2, Some(1)),
            ];
            for (j, &p) in periods.iter().enumerate() {
                vertices.push((v1(j as i64), Some(tau(p)?)));
            }
            for (j, &p) in periods.iter().enumerate() {
                vertices.push((v2(j as i64), Some(tau(p)?)));
            }
            let mut edges = Vec::new();
            for j in 0..n {
                edges.push((VertexId(0), v1(j), rat(1)));
            }
            for j in 0..n {
                edges.push((VertexId(0), v2(j), rat(1)));
            }
            for j in 0..n {
                edges.push((w1, v1(j), rat(1)));
            }
            for j in 0..n {
                edges.push((w2, v2(j), rat(1)));
            }
            edges.push((w1, w, rat(1)));
            edges.push((w2, w, rat(1)));
            Instance::new(format!("pinwheel-sp-{tag}"), VertexId(0), vertices, edges)
        }
    }
}

/// 3-partition star: depot center, one leaf per integer `a_i` with edge
/// weight `a_i` and turnover `m`. Weights are doubled relative to the
/// classical `a_i/2` construction to keep instance files integral, so the
/// decision threshold scales to `2B` where `B = (Σ a_i)/m`.
pub fn gen_partition_star(ints: &[u64], m: u64) -> Result<Instance> {
    if m < 1 {
        return Err(Error::InvalidGenSpec("m must be positive".into()));
    }
    if ints.len() as u64 != 3 * m {
        return Err(Error::InvalidGenSpec(format!(
            "need exactly 3m = {} integers, got {}",
            3 * m,
            ints.len()
        )));
    }
    let sum: u64 = ints.iter().sum();
    if sum % m != 0 {
        return Err(Error::InvalidGenSpec(format!(
            "sum {sum} not divisible by m = {m}"
        )));
    }
    let b = sum / m;
    for &a in ints {
        if 4 * a <= b || 2 * a >= b {
            return Err(Error::InvalidGenSpec(format!(
                "integer {a} violates B/4 < a < B/2 for B = {b}"
            )));
        }
    }
    let tau = u32::try_from(m).map_err(|_| Error::InvalidGenSpec("m too large".into()))?;
    let mut vertices = vec![(VertexId(0), None)];
    let mut edges = Vec::new();
    for (i, &a) in ints.iter().enumerate() {
        vertices.push((VertexId(i as i64 + 1), Some(tau)));
        edges.push((VertexId(0), VertexId(i as i64 + 1), rat(a as i128)));
    }
    Instance::new(
        format!("partition-star-m{m}-B{b}"),
        VertexId(0),
        vertices,
        edges,
    )
}

pub const GI_MAX: u32 = 20;

/// Interleaved exponent sequence: `a⁰ = (1)` and `a^{i+1}` alternates
/// elements of `a^i` with `(2^i+1, …, 2^{i+1})`.
pub fn gi_exponents(i: u32) -> Vec<u64> {
    let mut a: Vec<u64> = vec![1];
    for level in 0..i {
        let b_start = (1u64 << level) + 1;
        let mut next = Vec::with_capacity(a.len() * 2);
        for (k, &x) in a.iter().enumerate() {
            next.push(x);
            next.push(b_start + k as u64);
        }
        a = next;
    }
    a
}

/// Unit-weight path of `2^i` vertices; the `j`-th vertex has turnover
/// `2^(a_j − 1)` with `a` the interleaved sequence, and the first vertex is
/// the depot. The minimum spanning tree costs `2^i − 1` while the cheapest
/// non-decreasing spanning structure costs `i·2^{i−1}`.
pub fn gen_gi(i: u32) -> Result<Instance> {
    if i > GI_MAX {
        return Err(Error::SizeGuard {
            what: "gi index",
            limit: GI_MAX as u64,
            actual: i as u64,
        });
    }
    let a = gi_exponents(i);
    let mut vertices = Vec::with_capacity(a.len());
    let mut edges = Vec::new();
    for (j, &exp) in a.iter().enumerate() {
        let turnover = if j == 0 {
            None // depot occupies the τ = 1 slot
        } else {
            let t = 1u64 << (exp - 1);
            Some(u32::try_from(t).map_err(|_| Error::SizeGuard {
                what: "gi turnover",
                limit: u32::MAX as u64,
                actual: t,
            })?)
        };
        vertices.push((VertexId(j as i64), turnover));
        if j > 0 {
            edges.push((VertexId(j as i64 - 1), VertexId(j as i64), rat(1)));
        }
    }
    Instance::new(format!("gi-{i}"), VertexId(0), vertices, edges)
}

/// Guard for the layered family: `|V| = Σ 2^{a_j−1}` explodes quickly —
/// index 4 already produces 65 535 vertices.
pub const HI_MAX: u32 = 4;

/// Layered unit-weight graph built from `G_i`: layer `j` holds `τ_j` copies
/// of its vertex, all with turnover `τ_j`; copy `r` of a layer of size `p`
/// connects to exactly the copies of the adjacent layer of size `q` whose
/// index is congruent to `r` modulo `min(p,q)`. Layer 1 is the depot.
pub fn gen_hi(i: u32) -> Result<Instance> {
    if i < 1 || i > HI_MAX {
        return Err(Error::SizeGuard {
            what: "hi index",
            limit: HI_MAX as u64,
            actual: i as u64,
        });
    }
    let taus = hi_layer_taus(i);
    let mut vertices = Vec::new();
    let mut edges = Vec::new();
    let mut layer_start: Vec<i64> = Vec::with_capacity(taus.len());
    let mut next_id = 0i64;
    for (j, &t) in taus.iter().enumerate() {
        layer_start.push(next_id);
        let copies = if j == 0 { 1 } else { t };
        for r in 0..copies {
            let turnover = if j == 0 {
                None
            } else {
                Some(u32::try_from(t).unwrap())
            };
            vertices.push((VertexId(next_id + r as i64), turnover));
        }
        next_id += copies as i64;
    }
    for j in 0..taus.len() - 1 {
        let p = if j == 0 { 1 } else { taus[j] };
        let q = taus[j + 1];
        let min = p.min(q);
        for r in 0..p {
            for r2 in 0..q {
                if r2 % min == r % min {
                    edges.push((
                        VertexId(layer_start[j] + r as i64),
                        VertexId(layer_start[j + 1] + r2 as i64),
                        rat(1),
                    ));
                }
            }
        }
    }
    Instance::new(format!("hi-{i}"), VertexId(0), vertices, edges)
}

fn hi_layer_taus(i: u32) -> Vec<u64> {
    gi_exponents(i).iter().map(|&e| 1u64 << (e - 1)).collect()
}

/// The rotating schedule on `H_i`: day `d` visits copy `d mod τ_j` of every
/// layer `j`. The residue wiring guarantees that each day's visit set lies on
/// a single depot-rooted path of `2^i − 1` edges, for a daily tour cost of
/// `2(2^i − 1)`. Visit order follows the layers outward.
pub fn hi_rotating_schedule(i: u32) -> Result<Schedule> {
    if i < 1 || i > HI_MAX {
        return Err(Error::SizeGuard {
            what: "hi index",
            limit: HI_MAX as u64,
            actual: i as u64,
        });
    }
    let taus = hi_layer_taus(i);
    let mut layer_start: Vec<i64> = Vec::with_capacity(taus.len());
    let mut next_id = 0i64;
    for (j, &t) in taus.iter().enumerate() {
        layer_start.push(next_id);
        next_id += if j == 0 { 1 } else { t } as i64;
    }
    let period = taus.iter().copied().max().unwrap();
    let days = (1..=period)
        .map(|d| {
            taus.iter()
                .enumerate()
                .skip(1) // layer 1 is the depot
                .map(|(j, &t)| VertexId(layer_start[j] + (d % t) as i64))
                .collect()
        })
        .collect();
    Ok(Schedule { period, days })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::instance::{metric_closure, normalize, Topology};
    use crate::oracle::{exact_minavg, exact_minmax, pinwheel_feasible};
    use crate::schedule::{evaluate, verify};

    #[test]
    fn random_generators_are_deterministic_and_valid() {
        for family in [
            Family::RandomTree,
            Family::RandomStar,
            Family::RandomLine,
            Family::RandomGeneral,
        ] {
            let spec = GenSpec::random(family, 8, 10, 16, 7);
            let a = spec.build().unwrap();
            let b = spec.build().unwrap();
            assert_eq!(a.to_json(), b.to_json());
            normalize(&a).unwrap();
        }
        let single = GenSpec::random(Family::RandomTree, 1, 5, 5, 1)
            .build()
            .unwrap();
        assert_eq!(single.n_clients(), 1);
        assert_eq!(single.classify(), Topology::Star);
    }

    #[test]
    fn line_generator_is_a_path() {
        for seed in 0..10 {
            let spec = GenSpec::random(Family::RandomLine, 6, 9, 8, seed);
            let inst = spec.build().unwrap();
            let topo = inst.classify();
            assert!(
                matches!(topo, Topology::Line | Topology::Halfline | Topology::Star),
                "seed {seed}: {topo:?}"
            );
        }
    }

    #[test]
    fn pinwheel_star_values() {
        let feasible = gen_pinwheel(&[2, 4, 4], PinwheelShape::Star).unwrap();
        assert_eq!(feasible.n_clients(), 3);
        let (v, _) = exact_minmax(&feasible).unwrap();
        assert_eq!(v, rat(2));
        assert!(pinwheel_feasible(&[2, 4, 4]).unwrap().feasible);

        let infeasible = gen_pinwheel(&[2, 3, 6], PinwheelShape::Star).unwrap();
        let (v, _) = exact_minmax(&infeasible).unwrap();
        assert_eq!(v, rat(4));
        assert!(!pinwheel_feasible(&[2, 3, 6]).unwrap().feasible);

        assert!(gen_pinwheel(&[], PinwheelShape::Star).is_err());
    }

    #[test]
    fn pinwheel_series_parallel_shape_and_value() {
        // {s, w¹, w, w²} ∪ V¹ ∪ V² with |Vⁱ| = 3: ten vertices, 14 edges.
        let inst = gen_pinwheel(&[2, 4, 4], PinwheelShape::SeriesParallel).unwrap();
        assert_eq!(inst.n_vertices(), 10);
        assert_eq!(inst.edges.len(), 14);
        let (v, sched) = exact_minavg(&inst).unwrap();
        assert_eq!(v, rat(6));
        assert!(verify(&inst, &sched).unwrap().feasible);
    }

    #[test]
    fn partition_star_values() {
        let yes = gen_partition_star(&[5, 5, 6, 5, 5, 6], 2).unwrap();
        let (v, _) = exact_minmax(&yes).unwrap();
        assert_eq!(v, rat(32));

        let no = gen_partition_star(&[5, 5, 5, 7, 5, 5], 2).unwrap();
        let (v, _) = exact_minmax(&no).unwrap();
        assert_eq!(v, rat(34));

        // B = 8 here, and a = 2 fails the strict B/4 < a bound.
        assert!(gen_partition_star(&[2, 2, 2, 2, 2, 6], 2).is_err());
        assert!(gen_partition_star(&[5, 5, 6], 2).is_err());
    }

    #[test]
    fn gi_sequences_match_construction() {
        assert_eq!(gi_exponents(1), vec![1, 2]);
        assert_eq!(gi_exponents(2), vec![1, 3, 2, 4]);
        assert_eq!(gi_exponents(3), vec![1, 5, 3, 6, 2, 7, 4, 8]);

        let g1 = gen_gi(1).unwrap();
        assert_eq!(g1.n_vertices(), 2);
        assert_eq!(g1.turnover(1), 2);

        let g2 = gen_gi(2).unwrap();
        let taus: Vec<u32> = (1..4).map(|j| g2.turnover(j)).collect();
        assert_eq!(taus, vec![4, 2, 8]);

        let g3 = gen_gi(3).unwrap();
        let taus: Vec<u32> = (1..8).map(|j| g3.turnover(j)).collect();
        assert_eq!(taus, vec![16, 4, 32, 2, 64, 8, 128]);
    }

    #[test]
    fn hi_counts_and_uniform_degrees() {
        let h1 = gen_hi(1).unwrap();
        assert_eq!(h1.n_vertices(), 3);
        assert_eq!(h1.edges.len(), 2);

        let h2 = gen_hi(2).unwrap();
        assert_eq!(h2.n_vertices(), 15);
        assert_eq!(h2.edges.len(), 16);
        normalize(&h2).unwrap();

        let adj = h2.adjacency();
        let layer_sizes = [1usize, 4, 2, 8];
        let mut start = 0;
        for size in layer_sizes {
            let deg0 = adj[start].len();
            for v in start..start + size {
                assert_eq!(adj[v].len(), deg0);
            }
            start += size;
        }
    }

    #[test]
    fn hi_rotating_schedule_is_cheap_path() {
        for i in 1..=3u32 {
            let inst = gen_hi(i).unwrap();
            let sched = hi_rotating_schedule(i).unwrap();
            assert!(verify(&inst, &sched).unwrap().feasible);
            let dm = metric_closure(&inst).unwrap();
            let (avg, max, per_day) = evaluate(&inst, &dm, &sched).unwrap();
            let expected = rat(2 * ((1 << i) - 1));
            assert_eq!(avg, expected);
            assert_eq!(max, expected);
            assert!(per_day.iter().all(|c| *c == expected));
        }
    }
}

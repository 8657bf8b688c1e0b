//! General-metric approximation algorithms.
//!
//! All of them first round turnover times down to powers of two (costing at
//! most a factor 2 in either objective), which caps the number of distinct
//! turnover classes at `⌊log₂ τ_max⌋ + 1`.
//!
//! * [`solve_per_class`] treats each class as an independent instance: one
//!   TSP tour per class for min-avg, a split tour cycling through the class
//!   period for min-max.
//! * [`solve_minmax_logn`] splits clients into saturated classes (handled
//!   per class) and unsaturated ones packed into logarithmically many sets
//!   `W_i` with `|W_i| ≤ i` and `τ_j ≥ i`, visiting each set member on its
//!   own residue.
//! * [`solve_minavg_sync`] emits the synchronized solution: a client with
//!   rounded turnover `2^i` is visited on every day divisible by `2^i`, so a
//!   period has only logarithmically many distinct, nested day tours.
//! * [`build_nondecreasing_tree`] pairs off vertices along edge-disjoint
//!   tree paths, round by round, producing a depot-rooted spanning structure
//!   whose turnovers never decrease away from the root.
//! * The solution converters rewrite synchronized solutions as
//!   non-decreasing ones and vice versa, each within twice the input cost.

use std::collections::{BTreeMap, BTreeSet};

use crate::error::{Error, Result};
use crate::instance::{metric_closure, DistanceMatrix, Instance};
use crate::rational::{rat, Rational};
use crate::report::{Objective, SolveReport, SolveStats};
use crate::routing::{preorder, split_tour, tsp_double_tree, tsp_exact, Tour};
use crate::schedule::{verify, Schedule};

/// Largest class for which the exact TSP is used instead of the double-tree
/// approximation.
const EXACT_TSP_CUTOFF: usize = 12;

fn prev_pow2(t: u32) -> u32 {
    debug_assert!(t >= 1);
    1 << (31 - t.leading_zeros())
}

/// Rounds every turnover time down to a power of two; weights unchanged.
/// Any schedule for the rounded instance is feasible for the original, and
/// the optimum grows by at most a factor 2 under either objective.
pub fn round_pow2(instance: &Instance) -> Instance {
    let mut out = instance.clone();
    let depot = out.depot;
    for (i, v) in out.vertices.iter_mut().enumerate() {
        if i != depot {
            v.turnover = Some(prev_pow2(v.turnover.unwrap()));
        }
    }
    out
}

/// Clients grouped by rounded turnover, with saturation flags: class `k` is
/// saturated iff it contains at least `k` clients.
#[derive(Debug, Clone)]
pub struct ClassPartition {
    pub classes: BTreeMap<u64, Vec<usize>>,
}

impl ClassPartition {
    pub fn build(rounded: &Instance) -> ClassPartition {
        let mut classes: BTreeMap<u64, Vec<usize>> = BTreeMap::new();
        for j in rounded.clients() {
            classes
                .entry(rounded.turnover(j) as u64)
                .or_default()
                .push(j);
        }
        ClassPartition { classes }
    }

    pub fn is_saturated(&self, k: u64) -> bool {
        self.classes.get(&k).map_or(false, |c| c.len() as u64 >= k)
    }

    pub fn len(&self) -> usize {
        self.classes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.classes.is_empty()
    }
}

fn class_tour(clients: &[usize], dist: &DistanceMatrix, depot: usize) -> Tour {
    if clients.len() <= EXACT_TSP_CUTOFF {
        tsp_exact(clients, dist, depot).expect("within exact TSP guard")
    } else {
        tsp_double_tree(clients, dist, depot)
    }
}

/// Lower bound for general-metric min-avg reports: every client `j` forces
/// average cost at least `2·d(s,j)/τ_j`.
fn minavg_lower_bound(instance: &Instance, dist: &DistanceMatrix) -> Rational {
    instance
        .clients()
        .map(|j| rat(2) * dist.d(instance.depot, j) / rat(instance.turnover(j) as i128))
        .max()
        .unwrap_or_else(|| rat(0))
}

/// Lower bound for general-metric min-max reports: the farthest client must
/// be reached on some day.
fn minmax_lower_bound(instance: &Instance, dist: &DistanceMatrix) -> Rational {
    instance
        .clients()
        .map(|j| rat(2) * dist.d(instance.depot, j))
        .max()
        .unwrap_or_else(|| rat(0))
}

fn schedule_from_index_days(instance: &Instance, period: u64, days: Vec<Vec<usize>>) -> Schedule {
    Schedule {
        period,
        days: days
            .into_iter()
            .map(|d| d.into_iter().map(|v| instance.vertices[v].id).collect())
            .collect(),
    }
}

/// Per-class solver: rounds to powers of two and concatenates independent
/// class solutions. Min-avg repeats one class tour every `2^i` days (phase
/// 0); min-max splits the class tour into `2^i` subtours served cyclically.
pub fn solve_per_class(
    instance: &Instance,
    objective: Objective,
) -> Result<(Schedule, SolveReport)> {
    instance.validate()?;
    let rounded = round_pow2(instance);
    let dist = metric_closure(instance)?;
    let partition = ClassPartition::build(&rounded);
    let period = partition.classes.keys().copied().max().unwrap_or(1);
    debug_assert!(partition.len() as u64 <= period.ilog2() as u64 + 1);

    let mut per_class: BTreeMap<u64, Vec<Tour>> = BTreeMap::new();
    for (&k, clients) in &partition.classes {
        let tour = class_tour(clients, &dist, instance.depot);
        let tours = match objective {
            Objective::MinAvg => vec![tour],
            Objective::MinMax => split_tour(&tour, k, &dist, instance.depot),
        };
        per_class.insert(k, tours);
    }

    let mut days = Vec::with_capacity(period as usize);
    for day in 1..=period {
        let mut order = Vec::new();
        for (&k, tours) in &per_class {
            match objective {
                Objective::MinAvg => {
                    if day % k == 0 {
                        order.extend(tours[0].order.iter().copied());
                    }
                }
                Objective::MinMax => {
                    order.extend(tours[(day % k) as usize].order.iter().copied());
                }
            }
        }
        days.push(order);
    }
    let schedule = schedule_from_index_days(instance, period, days);
    let (avg, max, _) = crate::schedule::evaluate(instance, &dist, &schedule)?;
    let (cost, lower_bound) = match objective {
        Objective::MinAvg => (avg, minavg_lower_bound(instance, &dist)),
        Objective::MinMax => (max, minmax_lower_bound(instance, &dist)),
    };
    let feasible = verify(instance, &schedule)?.feasible;
    let report = SolveReport {
        algorithm: "classes".into(),
        objective,
        cost,
        lower_bound,
        oracle_value: None,
        feasible,
        period,
        stats: SolveStats {
            class_count: Some(partition.len() as u64),
            ..SolveStats::default()
        },
    };
    Ok((schedule, report))
}

/// Packing of unsaturated clients into sets `W_i`, `i` a power of two:
/// `|W_i| ≤ i` and `τ_j ≥ i` for every `j ∈ W_i`; member `r` (0-based) is
/// visited on days `≡ r (mod i)`.
#[derive(Debug, Clone)]
pub struct UnsaturatedPacking {
    pub sets: BTreeMap<u64, Vec<usize>>,
}

fn pack_unsaturated(
    rounded: &Instance,
    partition: &ClassPartition,
    unsaturated: &[usize],
) -> Result<UnsaturatedPacking> {
    let n = rounded.n_clients().max(2) as u64;
    let log_n = u64::from((n - 1).ilog2()) + 1; // ⌈log₂ n⌉ for n ≥ 2
    let cap = 1u64 << log_n;
    let mut sets: BTreeMap<u64, Vec<usize>> = BTreeMap::new();
    let mut i = 2u64;
    while i <= cap {
        sets.insert(i, Vec::new());
        i *= 2;
    }
    let mut leftover = Vec::new();
    for &j in unsaturated {
        let tau = rounded.turnover(j) as u64;
        debug_assert!(tau >= 2, "a τ = 1 class is always saturated");
        if tau <= cap && !partition.is_saturated(tau) && sets.contains_key(&tau) {
            sets.get_mut(&tau).unwrap().push(j);
        } else {
            leftover.push(j);
        }
    }
    // Remaining clients (τ beyond the largest set) go to the first set with
    // space; τ_j > cap ≥ i keeps the invariant.
    for j in leftover {
        let tau = rounded.turnover(j) as u64;
        let slot = sets
            .iter_mut()
            .find(|(&i, members)| (members.len() as u64) < i && tau >= i)
            .map(|(_, members)| members);
        match slot {
            Some(members) => members.push(j),
            None => {
                return Err(Error::InvalidInstance(
                    "unsaturated packing ran out of capacity".into(),
                ))
            }
        }
    }
    for (&i, members) in &sets {
        debug_assert!(members.len() as u64 <= i);
        debug_assert!(members.iter().all(|&j| rounded.turnover(j) as u64 >= i));
    }
    Ok(UnsaturatedPacking { sets })
}

/// Min-max solver with a packing argument: saturated turnover classes are
/// served per class (there `τ_max = O(n)`), unsaturated clients are packed
/// into the `W_i` sets and visited alone on their residues, at most
/// logarithmically many per day.
pub fn solve_minmax_logn(instance: &Instance) -> Result<(Schedule, SolveReport)> {
    instance.validate()?;
    let rounded = round_pow2(instance);
    let dist = metric_closure(instance)?;
    let partition = ClassPartition::build(&rounded);

    let mut saturated_tours: BTreeMap<u64, Vec<Tour>> = BTreeMap::new();
    let mut unsaturated: Vec<usize> = Vec::new();
    for (&k, clients) in &partition.classes {
        if partition.is_saturated(k) {
            let tour = class_tour(clients, &dist, instance.depot);
            saturated_tours.insert(k, split_tour(&tour, k, &dist, instance.depot));
        } else {
            unsaturated.extend(clients.iter().copied());
        }
    }
    let packing = pack_unsaturated(&rounded, &partition, &unsaturated)?;

    let mut period = saturated_tours.keys().copied().max().unwrap_or(1);
    for (&i, members) in &packing.sets {
        if !members.is_empty() {
            period = period.max(i);
        }
    }
    let mut days = Vec::with_capacity(period as usize);
    let mut max_unsat = 0u64;
    for day in 1..=period {
        let mut order = Vec::new();
        for (&k, tours) in &saturated_tours {
            order.extend(tours[(day % k) as usize].order.iter().copied());
        }
        let mut unsat_today = 0;
        for (&i, members) in &packing.sets {
            for (r, &j) in members.iter().enumerate() {
                if day % i == r as u64 {
                    order.push(j);
                    unsat_today += 1;
                }
            }
        }
        max_unsat = max_unsat.max(unsat_today);
        days.push(order);
    }
    let schedule = schedule_from_index_days(instance, period, days);
    let (_, max, _) = crate::schedule::evaluate(instance, &dist, &schedule)?;
    let feasible = verify(instance, &schedule)?.feasible;
    let report = SolveReport {
        algorithm: "logn-minmax".into(),
        objective: Objective::MinMax,
        cost: max,
        lower_bound: minmax_lower_bound(instance, &dist),
        oracle_value: None,
        feasible,
        period,
        stats: SolveStats {
            class_count: Some(partition.len() as u64),
            wset_sizes: Some(
                packing
                    .sets
                    .iter()
                    .map(|(&i, m)| (i, m.len() as u64))
                    .collect(),
            ),
            max_unsaturated_per_day: Some(max_unsat),
            ..SolveStats::default()
        },
    };
    Ok((schedule, report))
}

/// A synchronized solution: visit sets are exactly `{j : τ'_j | d}`, so a
/// period of `ℓ = τ'_max` days has one distinct tour per power of two.
#[derive(Debug, Clone)]
pub struct SyncSolution {
    pub period: u64,
    /// Visit order per day (index 0 = day 1).
    pub day_orders: Vec<Vec<usize>>,
}

impl SyncSolution {
    pub fn to_schedule(&self, instance: &Instance) -> Schedule {
        schedule_from_index_days(instance, self.period, self.day_orders.clone())
    }

    /// Tour of the day whose largest power-of-two divisor is `2^level`.
    pub fn level_order(&self, level: u32) -> &[usize] {
        &self.day_orders[(1usize << level) - 1]
    }
}

/// Builds the synchronized solution with nested day tours: the spanning tree
/// behind the level-`j` tour extends the level-`j−1` tree greedily, so later
/// tours contain earlier ones as subsequences and layer costs telescope.
pub fn build_sync_solution(rounded: &Instance, dist: &DistanceMatrix) -> SyncSolution {
    let period = rounded
        .clients()
        .map(|j| rounded.turnover(j) as u64)
        .max()
        .unwrap_or(1);
    let levels = period.trailing_zeros(); // period is a power of two
    let mut tree_edges: Vec<(usize, usize)> = Vec::new();
    let mut in_tree: Vec<usize> = vec![rounded.depot];
    let mut level_orders: Vec<Vec<usize>> = Vec::new();
    for level in 0..=levels {
        let t = 1u64 << level;
        let mut newcomers: Vec<usize> = rounded
            .clients()
            .filter(|&j| rounded.turnover(j) as u64 == t)
            .collect();
        while !newcomers.is_empty() {
            let mut best: Option<(Rational, usize, usize, usize)> = None;
            for (pos, &j) in newcomers.iter().enumerate() {
                for &v in &in_tree {
                    let d = dist.d(v, j);
                    let better = match &best {
                        None => true,
                        Some((bd, bv, bj, _)) => d < bd || (d == bd && (v, j) < (*bv, *bj)),
                    };
                    if better {
                        best = Some((d.clone(), v, j, pos));
                    }
                }
            }
            let (_, attach, client, pos) = best.unwrap();
            tree_edges.push((attach, client));
            in_tree.push(client);
            newcomers.swap_remove(pos);
        }
        let order: Vec<usize> = preorder(&tree_edges, rounded.depot)
            .into_iter()
            .filter(|&v| v != rounded.depot)
            .collect();
        level_orders.push(order);
    }
    let day_orders = (1..=period)
        .map(|d| {
            let level = d.trailing_zeros().min(levels);
            level_orders[level as usize].clone()
        })
        .collect();
    SyncSolution { period, day_orders }
}

/// Min-avg synchronized solver: round down to powers of two and visit each
/// client exactly on the days its rounded turnover divides.
pub fn solve_minavg_sync(instance: &Instance) -> Result<(Schedule, SolveReport)> {
    instance.validate()?;
    let rounded = round_pow2(instance);
    let dist = metric_closure(instance)?;
    let sync = build_sync_solution(&rounded, &dist);
    let schedule = sync.to_schedule(instance);
    let (avg, _, _) = crate::schedule::evaluate(instance, &dist, &schedule)?;
    let feasible = verify(instance, &schedule)?.feasible;
    let report = SolveReport {
        algorithm: "sync".into(),
        objective: Objective::MinAvg,
        cost: avg,
        lower_bound: minavg_lower_bound(instance, &dist),
        oracle_value: None,
        feasible,
        period: sync.period,
        stats: SolveStats {
            class_count: Some(ClassPartition::build(&rounded).len() as u64),
            ..SolveStats::default()
        },
    };
    Ok((schedule, report))
}

/// Pairs a largest even subset of `subset` so that the tree paths induced by
/// the pairs are pairwise edge-disjoint (all vertices, or all but one when
/// the subset is odd). Bottom-up: every subtree forwards at most one
/// unpaired vertex.
pub fn tree_pairing(
    n: usize,
    tree_edges: &[(usize, usize)],
    subset: &BTreeSet<usize>,
) -> Vec<(usize, usize)> {
    if subset.len() < 2 {
        return Vec::new();
    }
    let mut adj = vec![Vec::new(); n];
    for &(u, v) in tree_edges {
        adj[u].push(v);
        adj[v].push(u);
    }
    for a in &mut adj {
        a.sort_unstable();
    }
    let root = *subset.iter().next().unwrap();
    let mut parent = vec![usize::MAX; n];
    let mut order = vec![root];
    let mut seen = vec![false; n];
    seen[root] = true;
    let mut head = 0;
    while head < order.len() {
        let u = order[head];
        head += 1;
        for &v in &adj[u] {
            if !seen[v] {
                seen[v] = true;
                parent[v] = u;
                order.push(v);
            }
        }
    }
    let mut pairs = Vec::new();
    let mut carry: Vec<Option<usize>> = vec![None; n];
    for &v in order.iter().rev() {
        let mut candidates: Vec<usize> = Vec::new();
        if subset.contains(&v) {
            candidates.push(v);
        }
        for &c in &adj[v] {
            if parent[c] == v {
                if let Some(x) = carry[c] {
                    candidates.push(x);
                }
            }
        }
        let mut it = candidates.chunks_exact(2);
        for pair in &mut it {
            pairs.push((pair[0], pair[1]));
        }
        carry[v] = it.remainder().first().copied();
    }
    pairs
}

/// Spanning structure directed away from the depot with turnovers
/// non-decreasing along every root-to-leaf path.
#[derive(Debug, Clone)]
pub struct NonDecreasingTree {
    pub root: usize,
    /// `(from, to, cost)` with `τ(from) ≤ τ(to)`; cost is the tree-path
    /// length between the pair that created the arc.
    pub arcs: Vec<(usize, usize, Rational)>,
    pub cost: Rational,
    pub rounds: u64,
}

/// Iterated pairing: in each round, pair off the surviving vertices along
/// edge-disjoint tree paths (cheapest total path cost among valid pairings),
/// direct each pair from lower to higher turnover, and drop the higher one.
/// Terminates within `⌈log₂ n⌉` rounds at total cost `≤ ⌈log₂ n⌉ · c(tree)`.
pub fn build_nondecreasing_tree(
    n: usize,
    depot: usize,
    tree_edges: &[(usize, usize, Rational)],
    turnover: &[Option<u32>],
) -> NonDecreasingTree {
    let mut adj: Vec<Vec<(usize, Rational)>> = vec![Vec::new(); n];
    for &(u, v, ref w) in tree_edges {
        adj[u].push((v, w.clone()));
        adj[v].push((u, w.clone()));
    }
    for a in &mut adj {
        a.sort_by_key(|&(v, _)| v);
    }
    let mut parent = vec![usize::MAX; n];
    let mut parent_cost = vec![rat(0); n];
    let mut order = vec![depot];
    let mut seen = vec![false; n];
    seen[depot] = true;
    let mut head = 0;
    while head < order.len() {
        let u = order[head];
        head += 1;
        for &(v, ref w) in &adj[u] {
            if !seen[v] {
                seen[v] = true;
                parent[v] = u;
                parent_cost[v] = w.clone();
                order.push(v);
            }
        }
    }
    let mut level = vec![0usize; n];
    for &v in &order {
        if parent[v] != usize::MAX {
            level[v] = level[parent[v]] + 1;
        }
    }
    let path_cost = |mut a: usize, mut b: usize| -> Rational {
        let mut cost = rat(0);
        while level[a] > level[b] {
            cost += &parent_cost[a];
            a = parent[a];
        }
        while level[b] > level[a] {
            cost += &parent_cost[b];
            b = parent[b];
        }
        while a != b {
            cost += &parent_cost[a];
            cost += &parent_cost[b];
            a = parent[a];
            b = parent[b];
        }
        cost
    };
    // The depot ranks below every client.
    let rank = |v: usize| -> u64 {
        if v == depot {
            0
        } else {
            turnover[v].map(|t| t as u64).unwrap_or(0)
        }
    };
    // Any edge-disjoint pairing of S uses exactly the edges with odd
    // |S ∩ D(e)|, so only the choice of the unpaired vertex (odd |S|)
    // affects the round's cost.
    let pairing_cost = |survivors: &BTreeSet<usize>, excluded: Option<usize>| -> Rational {
        let mut cnt = vec![0i64; n];
        for &v in survivors {
            if Some(v) != excluded {
                cnt[v] = 1;
            }
        }
        for &v in order.iter().rev() {
            if parent[v] != usize::MAX {
                cnt[parent[v]] += cnt[v];
            }
        }
        let mut cost = rat(0);
        for &v in &order {
            if parent[v] != usize::MAX && cnt[v] % 2 == 1 {
                cost += &parent_cost[v];
            }
        }
        cost
    };

    let edges_only: Vec<(usize, usize)> = tree_edges.iter().map(|&(u, v, _)| (u, v)).collect();
    let mut survivors: BTreeSet<usize> = (0..n).collect();
    let mut arcs: Vec<(usize, usize, Rational)> = Vec::new();
    let mut total = rat(0);
    let mut rounds = 0u64;
    while survivors.len() > 1 {
        rounds += 1;
        let mut paired: BTreeSet<usize> = survivors.clone();
        if paired.len() % 2 == 1 {
            let mut best: Option<(Rational, usize)> = None;
            for &u in &survivors {
                let c = pairing_cost(&survivors, Some(u));
                if best.as_ref().map_or(true, |(bc, _)| c < *bc) {
                    best = Some((c, u));
                }
            }
            paired.remove(&best.unwrap().1);
        }
        let pairs = tree_pairing(n, &edges_only, &paired);
        debug_assert_eq!(pairs.len() * 2, paired.len());
        for (x, y) in pairs {
            let (lo, hi) = if (rank(x), x) <= (rank(y), y) {
                (x, y)
            } else {
                (y, x)
            };
            let c = path_cost(lo, hi);
            total += &c;
            arcs.push((lo, hi, c));
            survivors.remove(&hi);
        }
    }
    debug_assert_eq!(survivors.iter().next(), Some(&depot));
    if cfg!(debug_assertions) {
        let bound = u64::from(n.max(2).next_power_of_two().trailing_zeros());
        debug_assert!(rounds <= bound.max(1), "rounds {rounds} exceed log bound");
        let mut indeg = vec![0usize; n];
        for &(from, to, _) in &arcs {
            indeg[to] += 1;
            debug_assert!(rank(from) <= rank(to));
        }
        debug_assert!(indeg[depot] == 0);
        debug_assert!((0..n).filter(|&v| v != depot).all(|v| indeg[v] == 1));
    }
    NonDecreasingTree {
        root: depot,
        arcs,
        cost: total,
        rounds,
    }
}

/// Non-decreasing solution: one arborescence per day of the cycle, visited
/// in depth-first order.
#[derive(Debug, Clone)]
pub struct NonDecrSolution {
    pub period: u64,
    /// Arcs `(from, to)` per day, forming a depot-rooted tree over that
    /// day's clients.
    pub day_trees: Vec<Vec<(usize, usize)>>,
}

impl NonDecrSolution {
    pub fn day_order(&self, depot: usize, day_index: usize) -> Vec<usize> {
        preorder(&self.day_trees[day_index], depot)
            .into_iter()
            .filter(|&v| v != depot)
            .collect()
    }

    pub fn to_schedule(&self, instance: &Instance) -> Schedule {
        let days = (0..self.day_trees.len())
            .map(|d| self.day_order(instance.depot, d))
            .collect();
        schedule_from_index_days(instance, self.period, days)
    }
}

/// Canonical non-decreasing solution induced by a global non-decreasing
/// spanning tree: day `d` serves `{j : τ'_j | d}`, whose induced subtree is
/// automatically connected because parents never have larger turnovers.
pub fn nondecr_solution_from_tree(
    rounded: &Instance,
    tree: &NonDecreasingTree,
) -> NonDecrSolution {
    let period = rounded
        .clients()
        .map(|j| rounded.turnover(j) as u64)
        .max()
        .unwrap_or(1);
    let day_trees = (1..=period)
        .map(|day| {
            tree.arcs
                .iter()
                .filter(|&&(_, to, _)| day % rounded.turnover(to) as u64 == 0)
                .map(|&(from, to, _)| (from, to))
                .collect()
        })
        .collect();
    NonDecrSolution { period, day_trees }
}

/// Rewrites a synchronized solution as a non-decreasing one: each day's tour
/// is re-chained layer by layer (clients of equal rounded turnover keep
/// their tour order, each layer hangs off the previous one), which makes
/// turnovers non-decreasing along the single root path. Costs at most
/// double.
pub fn sync_to_nondecreasing(rounded: &Instance, sync: &SyncSolution) -> NonDecrSolution {
    let period = sync.period;
    let levels = period.trailing_zeros();
    let mut day_trees = Vec::with_capacity(period as usize);
    for day in 1..=period {
        let level = day.trailing_zeros().min(levels);
        let mut arcs: Vec<(usize, usize)> = Vec::new();
        let mut prev = rounded.depot;
        for h in 0..=level {
            let t = 1u64 << h;
            for &v in sync.level_order(h) {
                if rounded.turnover(v) as u64 == t {
                    arcs.push((prev, v));
                    prev = v;
                }
            }
        }
        day_trees.push(arcs);
    }
    NonDecrSolution { period, day_trees }
}

/// Rewrites a non-decreasing solution as a synchronized one. Each input
/// day's depot-to-client path arcs are moved, once each, to the next output
/// day that is a multiple of the client's rounded turnover; the collected
/// arcs are completed into a spanning structure of the synchronized visit
/// set. Costs at most double.
pub fn nondecreasing_to_sync(
    rounded: &Instance,
    dist: &DistanceMatrix,
    input: &NonDecrSolution,
) -> Result<SyncSolution> {
    let tau_max = rounded
        .clients()
        .map(|j| rounded.turnover(j) as u64)
        .max()
        .unwrap_or(1);
    let period = lcm_u64(input.period, tau_max);
    const PERIOD_CAP: u64 = 1 << 16;
    if period > PERIOD_CAP {
        return Err(Error::SizeGuard {
            what: "converted schedule period",
            limit: PERIOD_CAP,
            actual: period,
        });
    }
    let levels = tau_max.trailing_zeros();
    let mut collected: Vec<BTreeSet<(usize, usize)>> = vec![BTreeSet::new(); period as usize];
    let mut marked: Vec<BTreeSet<(usize, usize)>> = vec![BTreeSet::new(); period as usize];
    for j in 0..=levels {
        let step = 1u64 << j;
        for day in 1..=period {
            let tree = &input.day_trees[((day - 1) % input.period) as usize];
            let mut parent: BTreeMap<usize, usize> = BTreeMap::new();
            for &(from, to) in tree {
                parent.insert(to, from);
            }
            let targets: Vec<usize> = tree
                .iter()
                .map(|&(_, to)| to)
                .filter(|&v| rounded.turnover(v) as u64 == step)
                .collect();
            if targets.is_empty() {
                continue;
            }
            let k = day.div_ceil(step) * step;
            debug_assert!(k <= period);
            let out_day = (k - 1) as usize;
            let marks = &mut marked[(day - 1) as usize];
            for &v in &targets {
                let mut cur = v;
                while let Some(&p) = parent.get(&cur) {
                    if !marks.insert((p, cur)) {
                        break; // already moved during an earlier level pass
                    }
                    collected[out_day].insert((p, cur));
                    cur = p;
                }
            }
        }
    }
    let mut day_orders = Vec::with_capacity(period as usize);
    for day in 1..=period {
        let required: Vec<usize> = rounded
            .clients()
            .filter(|&j| day % rounded.turnover(j) as u64 == 0)
            .collect();
        let order = connected_order(
            rounded.depot,
            &required,
            collected[(day - 1) as usize].iter().copied(),
            dist,
        );
        day_orders.push(order);
    }
    Ok(SyncSolution { period, day_orders })
}

fn lcm_u64(a: u64, b: u64) -> u64 {
    use num_integer::Integer;
    a.lcm(&b)
}

/// Spanning order: grow a tree over `required ∪ {depot}` using the provided
/// edges where possible and nearest-attachment patches otherwise, then emit
/// its preorder restricted to `required`.
fn connected_order(
    depot: usize,
    required: &[usize],
    edges: impl Iterator<Item = (usize, usize)>,
    dist: &DistanceMatrix,
) -> Vec<usize> {
    let mut adj: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
    for (u, v) in edges {
        adj.entry(u).or_default().push(v);
        adj.entry(v).or_default().push(u);
    }
    let mut tree_edges: Vec<(usize, usize)> = Vec::new();
    let mut in_tree: Vec<usize> = vec![depot];
    let mut seen: BTreeSet<usize> = [depot].into();
    let mut head = 0;
    while head < in_tree.len() {
        let u = in_tree[head];
        head += 1;
        if let Some(list) = adj.get(&u) {
            for &v in list {
                if seen.insert(v) {
                    tree_edges.push((u, v));
                    in_tree.push(v);
                }
            }
        }
    }
    let mut missing: Vec<usize> = required
        .iter()
        .copied()
        .filter(|v| !seen.contains(v))
        .collect();
    while !missing.is_empty() {
        let mut best: Option<(Rational, usize, usize, usize)> = None;
        for (pos, &j) in missing.iter().enumerate() {
            for &v in &in_tree {
                let d = dist.d(v, j);
                let better = match &best {
                    None => true,
                    Some((bd, bv, bj, _)) => d < bd || (d == bd && (v, j) < (*bv, *bj)),
                };
                if better {
                    best = Some((d.clone(), v, j, pos));
                }
            }
        }
        let (_, attach, client, pos) = best.unwrap();
        tree_edges.push((attach, client));
        in_tree.push(client);
        seen.insert(client);
        missing.swap_remove(pos);
        // The patch vertex may pull in a whole collected component.
        let mut queue = vec![client];
        while let Some(u) = queue.pop() {
            if let Some(list) = adj.get(&u) {
                for &v in list {
                    if seen.insert(v) {
                        tree_edges.push((u, v));
                        in_tree.push(v);
                        queue.push(v);
                    }
                }
            }
        }
    }
    let required_set: BTreeSet<usize> = required.iter().copied().collect();
    preorder(&tree_edges, depot)
        .into_iter()
        .filter(|v| required_set.contains(v))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::generate::gen_gi;
    use crate::rational::ratio;
    use crate::routing::metric_mst;
    use crate::schedule::evaluate;
    use crate::testutil::{random_tree, unit_star, weighted_star};

    #[test]
    fn round_pow2_examples() {
        let inst = unit_star(&[3, 5, 7]);
        let rounded = round_pow2(&inst);
        let taus: Vec<u32> = (1..4).map(|j| rounded.turnover(j)).collect();
        assert_eq!(taus, vec![2, 4, 4]);

        let fixed = unit_star(&[1, 2, 4]);
        assert_eq!(round_pow2(&fixed), fixed);

        let one = unit_star(&[1]);
        assert_eq!(round_pow2(&one).turnover(1), 1);

        // τ/2 < τ' ≤ τ.
        for t in 1..=40u32 {
            let p = prev_pow2(t);
            assert!(p <= t && t < 2 * p);
        }
    }

    #[test]
    fn per_class_minavg_star() {
        let inst = unit_star(&[2, 3]);
        let (sched, report) = solve_per_class(&inst, Objective::MinAvg).unwrap();
        assert!(report.feasible);
        assert_eq!(report.cost, rat(2));
        assert_eq!(report.stats.class_count, Some(1));
        assert_eq!(sched.period, 2);
    }

    #[test]
    fn per_class_minmax_two_classes() {
        let inst = unit_star(&[1, 2]);
        let (_, report) = solve_per_class(&inst, Objective::MinMax).unwrap();
        assert!(report.feasible);
        assert_eq!(report.cost, rat(4));
        assert_eq!(report.stats.class_count, Some(2));
    }

    #[test]
    fn per_class_single_class_is_plain_tsp() {
        let inst = unit_star(&[4, 4, 4]);
        let (sched, report) = solve_per_class(&inst, Objective::MinAvg).unwrap();
        assert!(report.feasible);
        assert_eq!(sched.period, 4);
        assert_eq!(report.cost, ratio(6, 4));
    }

    #[test]
    fn logn_minmax_unsaturated_packing() {
        let inst = unit_star(&[8, 8, 8, 8]);
        let (_, report) = solve_minmax_logn(&inst).unwrap();
        assert!(report.feasible);
        let wsets = report.stats.wset_sizes.unwrap();
        for &(i, len) in &wsets {
            assert!(len <= i);
        }
        assert!(report.stats.max_unsaturated_per_day.unwrap() <= 2); // ⌈log₂ 4⌉
    }

    #[test]
    fn logn_minmax_all_saturated() {
        let inst = unit_star(&[1, 1, 1]);
        let (sched, report) = solve_minmax_logn(&inst).unwrap();
        assert!(report.feasible);
        assert_eq!(sched.period, 1);
        assert_eq!(report.cost, rat(6));
        assert_eq!(report.stats.max_unsaturated_per_day, Some(0));
    }

    #[test]
    fn logn_minmax_invariants_random() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(3);
        for seed in 0..40 {
            let n = rng.gen_range(2..=14usize);
            let inst = random_tree(n, 7, 32, false, seed + 900);
            let (sched, report) = solve_minmax_logn(&inst).unwrap();
            assert!(report.feasible, "seed {seed}");
            assert!(verify(&inst, &sched).unwrap().feasible);
            for (i, len) in report.stats.wset_sizes.unwrap() {
                assert!(len <= i, "seed {seed}");
            }
            let log_n = u64::from((n.max(2) as u64 - 1).ilog2()) + 1;
            assert!(
                report.stats.max_unsaturated_per_day.unwrap() <= log_n,
                "seed {seed}"
            );
        }
    }

    #[test]
    fn sync_star_and_daily() {
        let inst = unit_star(&[2, 4]);
        let (sched, report) = solve_minavg_sync(&inst).unwrap();
        assert!(report.feasible);
        assert_eq!(sched.period, 4);
        assert_eq!(report.cost, ratio(3, 2));

        let daily = unit_star(&[1, 1]);
        let (_, report) = solve_minavg_sync(&daily).unwrap();
        assert_eq!(report.cost, rat(4));
    }

    #[test]
    fn tree_pairing_examples() {
        // Path v0-v1-v2-v3.
        let edges = vec![(0, 1), (1, 2), (2, 3)];
        let all: BTreeSet<usize> = (0..4).collect();
        let pairs = tree_pairing(4, &edges, &all);
        assert_eq!(pairs.len(), 2);
        let mut flat: Vec<usize> = pairs.iter().flat_map(|&(a, b)| [a, b]).collect();
        flat.sort_unstable();
        assert_eq!(flat, vec![0, 1, 2, 3]);

        let two: BTreeSet<usize> = [1, 3].into();
        let pairs = tree_pairing(4, &edges, &two);
        assert_eq!(pairs.len(), 1);

        // Odd subset: all but one paired.
        let edges = vec![(0, 1), (0, 2), (0, 3), (0, 4)];
        let five: BTreeSet<usize> = (0..5).collect();
        let pairs = tree_pairing(5, &edges, &five);
        assert_eq!(pairs.len(), 2);
    }

    #[test]
    fn tree_pairing_paths_edge_disjoint() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(4);
        for seed in 0..30 {
            let n = rng.gen_range(2..12usize);
            let inst = random_tree(n, 5, 8, false, seed + 40);
            let edges: Vec<(usize, usize)> = inst.edges.iter().map(|e| (e.u, e.v)).collect();
            let subset: BTreeSet<usize> = (0..=n).filter(|_| rng.gen_bool(0.6)).collect();
            if subset.len() < 2 {
                continue;
            }
            let parent = inst.tree_parents().unwrap();
            let pairs = tree_pairing(n + 1, &edges, &subset);
            assert!(pairs.len() * 2 >= subset.len() - 1);
            let mut used: BTreeSet<(usize, usize)> = BTreeSet::new();
            for &(a, b) in &pairs {
                for e in tree_path_edges(&parent, a, b) {
                    assert!(used.insert(e), "edge reused (seed {seed})");
                }
            }
        }
    }

    fn tree_path_edges(parent: &[usize], a: usize, b: usize) -> Vec<(usize, usize)> {
        let mut anc_a = vec![a];
        let mut v = a;
        while parent[v] != usize::MAX {
            v = parent[v];
            anc_a.push(v);
        }
        let mut edges = Vec::new();
        let mut w = b;
        while !anc_a.contains(&w) {
            edges.push((w.min(parent[w]), w.max(parent[w])));
            w = parent[w];
        }
        let mut u = a;
        while u != w {
            edges.push((u.min(parent[u]), u.max(parent[u])));
            u = parent[u];
        }
        edges
    }

    #[test]
    fn nondecreasing_tree_on_gi_family() {
        for (i, expected_mst, expected_cost) in [(1u32, 1i128, 1i128), (2, 3, 4), (3, 7, 12)] {
            let inst = gen_gi(i).unwrap();
            let dist = metric_closure(&inst).unwrap();
            let clients: Vec<usize> = inst.clients().collect();
            let (_, mst_cost) = metric_mst(&clients, &dist, inst.depot);
            assert_eq!(mst_cost, rat(expected_mst), "mst of gi-{i}");
            let tree_edges: Vec<(usize, usize, Rational)> = inst
                .edges
                .iter()
                .map(|e| (e.u, e.v, e.weight.clone()))
                .collect();
            let turnovers: Vec<Option<u32>> = inst.vertices.iter().map(|v| v.turnover).collect();
            let ndt =
                build_nondecreasing_tree(inst.n_vertices(), inst.depot, &tree_edges, &turnovers);
            assert_eq!(ndt.cost, rat(expected_cost), "nondecr cost of gi-{i}");
        }
    }

    #[test]
    fn nondecreasing_tree_single_client() {
        let inst = weighted_star(&[(5, 3)]);
        let tree_edges: Vec<(usize, usize, Rational)> = inst
            .edges
            .iter()
            .map(|e| (e.u, e.v, e.weight.clone()))
            .collect();
        let turnovers: Vec<Option<u32>> = inst.vertices.iter().map(|v| v.turnover).collect();
        let ndt = build_nondecreasing_tree(2, inst.depot, &tree_edges, &turnovers);
        assert_eq!(ndt.arcs.len(), 1);
        assert_eq!(ndt.cost, rat(5));
    }

    #[test]
    fn conversions_stay_within_factor_two() {
        use rand::{Rng, SeedableRng};
        for seed in 0..25u64 {
            let inst = if seed % 2 == 0 {
                random_tree(7, 6, 16, true, seed + 70)
            } else {
                let mut leaves = Vec::new();
                let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed + 71);
                for _ in 0..rng.gen_range(2..9usize) {
                    let t = 1u32 << rng.gen_range(0..4u32);
                    leaves.push((rng.gen_range(1..7i128), t));
                }
                weighted_star(&leaves)
            };
            let rounded = round_pow2(&inst);
            let dist = metric_closure(&rounded).unwrap();

            // sync -> nondecreasing
            let sync = build_sync_solution(&rounded, &dist);
            let in_sched = sync.to_schedule(&rounded);
            let (in_avg, _, _) = evaluate(&rounded, &dist, &in_sched).unwrap();
            let ndecr = sync_to_nondecreasing(&rounded, &sync);
            let out_sched = ndecr.to_schedule(&rounded);
            assert!(verify(&inst, &out_sched).unwrap().feasible, "seed {seed}");
            let (out_avg, _, _) = evaluate(&rounded, &dist, &out_sched).unwrap();
            assert!(out_avg <= rat(2) * &in_avg, "seed {seed}: sync->nondecr");
            for day in &ndecr.day_trees {
                for &(from, to) in day {
                    let rf = if from == rounded.depot {
                        0
                    } else {
                        rounded.turnover(from)
                    };
                    assert!(rf <= rounded.turnover(to));
                }
            }

            // nondecreasing -> sync
            let tree_edges: Vec<(usize, usize, Rational)> = {
                let clients: Vec<usize> = rounded.clients().collect();
                let (edges, _) = metric_mst(&clients, &dist, rounded.depot);
                edges
                    .iter()
                    .map(|&(u, v)| (u, v, dist.d(u, v).clone()))
                    .collect()
            };
            let turnovers: Vec<Option<u32>> =
                rounded.vertices.iter().map(|v| v.turnover).collect();
            let ndt = build_nondecreasing_tree(
                rounded.n_vertices(),
                rounded.depot,
                &tree_edges,
                &turnovers,
            );
            let input = nondecr_solution_from_tree(&rounded, &ndt);
            let in_sched = input.to_schedule(&rounded);
            assert!(verify(&inst, &in_sched).unwrap().feasible, "seed {seed}");
            let (in_avg, _, _) = evaluate(&rounded, &dist, &in_sched).unwrap();
            let out = nondecreasing_to_sync(&rounded, &dist, &input).unwrap();
            let out_sched = out.to_schedule(&rounded);
            assert!(verify(&inst, &out_sched).unwrap().feasible, "seed {seed}");
            let (out_avg, _, _) = evaluate(&rounded, &dist, &out_sched).unwrap();
            assert!(out_avg <= rat(2) * &in_avg, "seed {seed}: nondecr->sync");
        }
    }

    #[test]
    fn conversion_single_class_is_identity_cost() {
        let inst = unit_star(&[2, 2, 2]);
        let rounded = round_pow2(&inst);
        let dist = metric_closure(&rounded).unwrap();
        let sync = build_sync_solution(&rounded, &dist);
        let (in_avg, _, _) = evaluate(&rounded, &dist, &sync.to_schedule(&rounded)).unwrap();
        let ndecr = sync_to_nondecreasing(&rounded, &sync);
        let (out_avg, _, _) = evaluate(&rounded, &dist, &ndecr.to_schedule(&rounded)).unwrap();
        assert_eq!(in_avg, out_avg);
    }
}

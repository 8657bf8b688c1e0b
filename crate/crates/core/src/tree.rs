//! Tree-metric solvers.
//!
//! The lower bound is driven by tt-weights: `q(e)` is the minimum turnover
//! among all vertices below edge `e` in the depot-rooted tree, and any
//! feasible solution must traverse `e` on average at least `2/q(e)` times,
//! giving `L(G,τ) = 2 Σ_e c(e)/q(e)`.
//!
//! The min-avg solver rounds turnovers down to powers of two and visits each
//! client on every day divisible by its rounded turnover; day tours traverse
//! the union of the depot paths of that day's clients, so the reported
//! average attains `L` exactly on the rounded instance.
//!
//! The min-max solver splits a doubled-tree Euler walk recursively, assigning
//! vertices and edges to congruence classes `(a mod m)` with power-of-two
//! moduli so that each day's class union stays cheap; one extra depot path
//! connects it to the root. Splitting drops one walk edge per call, so the
//! recursion makes at most `2|E|` calls in total.

use std::collections::{BTreeMap, BTreeSet};

use crate::error::{Error, Result};
use crate::general::round_pow2;
use crate::instance::{metric_closure, normalize, DistanceMatrix, Instance};
use crate::rational::{rat, Rational};
use crate::report::{Objective, SolveReport, SolveStats};
use crate::routing::Tour;
use crate::schedule::{verify, CompactSchedule, CongruenceClass, Schedule};

/// Depot-rooted tree with per-edge tt-weights. Edges are keyed by their
/// child vertex.
#[derive(Debug, Clone)]
pub struct TTWeightedTree {
    pub root: usize,
    pub parent: Vec<usize>,
    pub children: Vec<Vec<usize>>,
    /// Cost of the edge above each vertex (unused at the root).
    pub edge_cost: Vec<Rational>,
    /// `q(e)` of the edge above each vertex: minimum turnover in its subtree.
    pub tt_weight: Vec<u32>,
    pub turnover: Vec<Option<u32>>,
    pub depth_cost: Vec<Rational>,
}

/// Bottom-up tt-weights of a (normalized) tree instance.
pub fn tt_weights(instance: &Instance) -> Result<TTWeightedTree> {
    if !instance.classify().is_tree() {
        return Err(Error::Topology {
            solver: "tt_weights",
            expected: "tree",
            got: "general",
        });
    }
    let n = instance.n_vertices();
    let parent = instance.tree_parents()?;
    let mut children = vec![Vec::new(); n];
    for (v, &p) in parent.iter().enumerate() {
        if p != usize::MAX {
            children[p].push(v);
        }
    }
    for c in &mut children {
        c.sort_unstable();
    }
    let mut edge_cost = vec![rat(0); n];
    for e in &instance.edges {
        let child = if parent[e.u] == e.v { e.u } else { e.v };
        edge_cost[child] = e.weight.clone();
    }
    // Post-order minimum turnover per subtree.
    let order = post_order(instance.depot, &children);
    let mut subtree_min = vec![u32::MAX; n];
    for &v in &order {
        let mut m = instance.vertices[v].turnover.unwrap_or(u32::MAX);
        for &c in &children[v] {
            m = m.min(subtree_min[c]);
        }
        subtree_min[v] = m;
    }
    let mut depth_cost = vec![rat(0); n];
    for &v in order.iter().rev() {
        if parent[v] != usize::MAX {
            depth_cost[v] = &depth_cost[parent[v]] + &edge_cost[v];
        }
    }
    Ok(TTWeightedTree {
        root: instance.depot,
        parent,
        children,
        edge_cost,
        tt_weight: subtree_min,
        turnover: instance.vertices.iter().map(|v| v.turnover).collect(),
        depth_cost,
    })
}

fn post_order(root: usize, children: &[Vec<usize>]) -> Vec<usize> {
    let mut order = Vec::with_capacity(children.len());
    let mut stack = vec![(root, false)];
    while let Some((v, expanded)) = stack.pop() {
        if expanded {
            order.push(v);
        } else {
            stack.push((v, true));
            for &c in children[v].iter().rev() {
                stack.push((c, false));
            }
        }
    }
    order
}

/// `L(G,τ) = 2 Σ_e c(e)/q(e)`, a lower bound on the average (hence also the
/// maximum) tour length.
pub fn tree_lower_bound(tt: &TTWeightedTree) -> Rational {
    let mut sum = rat(0);
    for v in 0..tt.parent.len() {
        if tt.parent[v] != usize::MAX {
            sum += &tt.edge_cost[v] / rat(tt.tt_weight[v] as i128);
        }
    }
    rat(2) * sum
}

#[derive(Debug, Clone, Default)]
pub struct ClassSets {
    /// Tree edges keyed by child vertex.
    pub edges: BTreeSet<usize>,
    pub vertices: BTreeSet<usize>,
}

/// Output of the recursive class assignment: every client lands in exactly
/// one vertex class whose modulus equals its (rounded) turnover.
#[derive(Debug, Clone)]
pub struct CongruenceAssignment {
    pub classes: BTreeMap<(u64, u64), ClassSets>,
    pub period: u64,
    pub call_count: u64,
    /// Violations of the per-call cost inequality; stays 0.
    pub cost_inequality_violations: u64,
    /// Vertices assigned at a split boundary instead of by their own call.
    pub rescued: BTreeSet<usize>,
}

impl CongruenceAssignment {
    pub fn to_compact(&self, instance: &Instance) -> CompactSchedule {
        CompactSchedule {
            classes: self
                .classes
                .iter()
                .filter(|(_, sets)| !sets.vertices.is_empty())
                .map(|(&(residue, modulus), sets)| CongruenceClass {
                    residue,
                    modulus,
                    vertices: sets.vertices.iter().map(|&v| instance.vertices[v].id).collect(),
                })
                .collect(),
        }
    }

    /// Clients visited on the given day (1-based).
    pub fn day_clients(&self, day: u64) -> BTreeSet<usize> {
        let mut out = BTreeSet::new();
        for (&(residue, modulus), sets) in &self.classes {
            if day % modulus == residue {
                out.extend(sets.vertices.iter().copied());
            }
        }
        out
    }
}

/// One directed traversal of a tree edge inside the Euler walk.
#[derive(Debug, Clone, Copy)]
struct Step {
    child: usize,
    from: usize,
    to: usize,
}

struct Recursion<'a> {
    tt: &'a TTWeightedTree,
    steps: Vec<Step>,
    tau_max: u64,
    lower_bound: Rational,
    assigned: Vec<bool>,
    out: CongruenceAssignment,
}

/// Recursive congruence-class assignment over the doubled-tree Euler walk.
/// Requires power-of-two turnovers (after rounding) and a normalized tree.
pub fn tree_congruence_assignment(
    rounded: &Instance,
    tt: &TTWeightedTree,
) -> Result<CongruenceAssignment> {
    for j in rounded.clients() {
        let t = rounded.turnover(j);
        if !t.is_power_of_two() {
            return Err(Error::InvalidInstance(format!(
                "turnover {t} is not a power of two"
            )));
        }
    }
    let tau_max = rounded
        .clients()
        .map(|j| rounded.turnover(j) as u64)
        .max()
        .unwrap_or(1);
    // Euler walk of the doubled tree, smallest child first.
    let mut steps = Vec::with_capacity(2 * rounded.edges.len());
    let mut stack: Vec<(usize, usize)> = tt.children[tt.root]
        .iter()
        .rev()
        .map(|&c| (tt.root, c))
        .collect();
    // Iterative DFS emitting down/up steps.
    fn descend(tt: &TTWeightedTree, from: usize, child: usize, steps: &mut Vec<Step>) {
        steps.push(Step {
            child,
            from,
            to: child,
        });
        for &c in &tt.children[child] {
            descend(tt, child, c, steps);
        }
        steps.push(Step {
            child,
            from: child,
            to: from,
        });
    }
    while let Some((from, child)) = stack.pop() {
        descend(tt, from, child, &mut steps);
    }
    let lower_bound = tree_lower_bound(tt);
    let mut rec = Recursion {
        tt,
        steps,
        tau_max,
        lower_bound,
        assigned: vec![false; rounded.n_vertices()],
        out: CongruenceAssignment {
            classes: BTreeMap::new(),
            period: tau_max,
            call_count: 0,
            cost_inequality_violations: 0,
            rescued: BTreeSet::new(),
        },
    };
    let len = rec.steps.len();
    rec.call(0, len, 0, 1, rat(0));
    debug_assert!(
        rounded.clients().all(|j| rec.assigned[j]),
        "every client must receive a congruence class"
    );
    Ok(rec.out)
}

impl Recursion<'_> {
    fn q(&self, step: &Step) -> u64 {
        self.tt.tt_weight[step.child] as u64
    }

    fn assign_vertex(&mut self, v: usize, residue: u64, modulus: u64) {
        self.assigned[v] = true;
        self.out
            .classes
            .entry((residue, modulus))
            .or_default()
            .vertices
            .insert(v);
    }

    /// One call on the walk slice `[lo, hi)` for class `(a mod m)`.
    /// `ancestor_cost` is the total cost of edges assigned by ancestor calls
    /// on this path.
    fn call(&mut self, lo: usize, hi: usize, a: u64, m: u64, ancestor_cost: Rational) {
        if lo >= hi || m > self.tau_max {
            return;
        }
        self.out.call_count += 1;

        // Per-call cost inequality: the walk's still-deep weight at this
        // modulus plus everything the ancestors already assigned never
        // exceeds the instance lower bound.
        let mut deep = rat(0);
        for s in &self.steps[lo..hi] {
            let q = self.q(s);
            if q >= m {
                deep += &self.tt.edge_cost[s.child] / rat(q as i128);
            }
        }
        if rat(m as i128) * deep + &ancestor_cost > self.lower_bound {
            self.out.cost_inequality_violations += 1;
        }

        // Assign this class's edges and vertices.
        let residue = a % m;
        let mut new_edge_cost = rat(0);
        let mut new_edges: BTreeSet<usize> = BTreeSet::new();
        for s in &self.steps[lo..hi] {
            if self.q(s) == m && new_edges.insert(s.child) {
                new_edge_cost += &self.tt.edge_cost[s.child];
            }
        }
        let mut new_vertices: Vec<usize> = Vec::new();
        for s in &self.steps[lo..hi] {
            for v in [s.from, s.to] {
                if self.tt.turnover[v] == Some(m as u32) && !self.assigned[v] {
                    self.assigned[v] = true;
                    new_vertices.push(v);
                }
            }
        }
        if !new_edges.is_empty() || !new_vertices.is_empty() {
            let sets = self.out.classes.entry((residue, m)).or_default();
            sets.edges.extend(new_edges.iter().copied());
            sets.vertices.extend(new_vertices.iter().copied());
        }

        // Split index: the largest k whose strict prefix keeps at most half
        // of the walk's remaining deep weight.

        let mut total = rat(0);
        for s in &self.steps[lo..hi] {
            let q = self.q(s);
            if q > m {
                total += &self.tt.edge_cost[s.child] / rat(q as i128);
            }
        }
        let half = total / rat(2);
        let mut acc = rat(0);
        let mut k = 1usize;
        for (i, s) in self.steps[lo..hi].iter().enumerate() {
            if acc <= half {
                k = i + 1;
            } else {
                break;
            }
            let q = self.q(s);
            if q > m {
                acc += &self.tt.edge_cost[s.child] / rat(q as i128);
            }
        }
        let drop = lo + k - 1;

        // A split can strand a walk-end vertex whose only remaining
        // occurrence was the dropped step; assign it here, at its own
        // turnover's modulus, inside this call's day class.
        let d1 = (lo, drop);
        let d2 = (drop + 1, hi);
        let dropped = self.steps[drop];
        for v in [dropped.from, dropped.to] {
            if self.assigned[v] || self.tt.turnover[v].is_none() {
                continue;
            }
            let in_rest = self.steps[d1.0..d1.1]
                .iter()
                .chain(&self.steps[d2.0..d2.1])
                .any(|s| s.from == v || s.to == v);
            if !in_rest {
                let tau = self.tt.turnover[v].unwrap() as u64;
                debug_assert!(tau > m, "stranded vertex sits below this level");
                self.assign_vertex(v, a % tau, tau);
                self.out.rescued.insert(v);
            }
        }

        let ancestor_next = &ancestor_cost + &new_edge_cost;
        self.call(d1.0, d1.1, a, m * 2, ancestor_next.clone());
        self.call(d2.0, d2.1, a + m, m * 2, ancestor_next);
    }
}

/// Union of the depot paths of `clients`, as edge child-keys.
fn steiner_edges(tt: &TTWeightedTree, clients: &BTreeSet<usize>) -> BTreeSet<usize> {
    let mut edges = BTreeSet::new();
    for &j in clients {
        let mut v = j;
        while tt.parent[v] != usize::MAX && edges.insert(v) {
            v = tt.parent[v];
        }
    }
    edges
}

fn steiner_cost(tt: &TTWeightedTree, edges: &BTreeSet<usize>) -> Rational {
    edges.iter().map(|&v| tt.edge_cost[v].clone()).sum()
}

/// Preorder walk over the given tree edges (child keys), starting at the
/// root, restricted to `targets`.
fn preorder_visit(
    tt: &TTWeightedTree,
    edges: &BTreeSet<usize>,
    targets: &BTreeSet<usize>,
) -> Vec<usize> {
    let mut order = Vec::with_capacity(targets.len());
    let mut stack: Vec<usize> = tt.children[tt.root]
        .iter()
        .rev()
        .filter(|c| edges.contains(c))
        .copied()
        .collect();
    while let Some(v) = stack.pop() {
        if targets.contains(&v) {
            order.push(v);
        }
        for &c in tt.children[v].iter().rev() {
            if edges.contains(&c) {
                stack.push(c);
            }
        }
    }
    order
}

/// Day tour from a congruence assignment: the union of the day's edge
/// classes plus a cheapest depot path to its top nonempty class, patched so
/// every client of the day is connected to the root; traversed depth-first
/// and shortcut to the visited clients.
pub fn assemble_day_tour(
    assignment: &CongruenceAssignment,
    tt: &TTWeightedTree,
    dist: &DistanceMatrix,
    day: u64,
) -> Tour {
    let clients = assignment.day_clients(day);
    if clients.is_empty() {
        return Tour::idle();
    }
    let mut edges: BTreeSet<usize> = BTreeSet::new();
    let mut top_class_edges: Option<&BTreeSet<usize>> = None;
    let mut modulus = 1u64;
    while modulus <= assignment.period {
        if let Some(sets) = assignment.classes.get(&(day % modulus, modulus)) {
            if !sets.edges.is_empty() {
                top_class_edges = Some(&sets.edges);
            }
            edges.extend(sets.edges.iter().copied());
        }
        modulus *= 2;
    }
    // Depot path to the cheapest-to-reach edge of the top nonempty class.
    if let Some(top) = top_class_edges {
        let anchor = top
            .iter()
            .min_by(|&&x, &&y| {
                tt.depth_cost[tt.parent[x]]
                    .cmp(&tt.depth_cost[tt.parent[y]])
                    .then(x.cmp(&y))
            })
            .copied()
            .unwrap();
        let mut v = tt.parent[anchor];
        while tt.parent[v] != usize::MAX {
            edges.insert(v);
            v = tt.parent[v];
        }
    }
    // Patch: connect every remaining client of the day to the root. In a
    // tree, being connected to the root means the whole parent chain is
    // present.
    for &j in &clients {
        let mut v = j;
        while tt.parent[v] != usize::MAX && edges.insert(v) {
            v = tt.parent[v];
        }
        // loop stops at root or at an edge already present; either way the
        // chain above is complete by induction over insertion order
        while tt.parent[v] != usize::MAX && edges.contains(&v) {
            v = tt.parent[v];
        }
    }
    let order = preorder_visit(tt, &edges, &clients);
    let tour = Tour::from_order(order, dist, tt.root);
    debug_assert_eq!(
        tour.cost,
        rat(2) * steiner_cost(tt, &steiner_edges(tt, &clients)),
        "shortcut tour collapses to twice the day's depot-path union"
    );
    tour
}

fn tree_topology_check(instance: &Instance, solver: &'static str) -> Result<()> {
    if !instance.classify().is_tree() {
        return Err(Error::Topology {
            solver,
            expected: "tree",
            got: "general",
        });
    }
    Ok(())
}

/// 2-approximate MIN-AVG on trees: round turnovers down to powers of two and
/// visit each client on every day its rounded turnover divides; each day
/// tours the union of its clients' depot paths.
pub fn solve_minavg_tree(instance: &Instance) -> Result<(Schedule, SolveReport)> {
    tree_topology_check(instance, "solve_minavg_tree")?;
    let (norm, _, _) = normalize(instance)?;
    let rounded = round_pow2(&norm);
    let tt_orig = tt_weights(&norm)?;
    let tt = tt_weights(&rounded)?;
    let dist = metric_closure(instance)?;
    let period = rounded
        .clients()
        .map(|j| rounded.turnover(j) as u64)
        .max()
        .unwrap_or(1);
    let mut days = Vec::with_capacity(period as usize);
    for day in 1..=period {
        let clients: BTreeSet<usize> = rounded
            .clients()
            .filter(|&j| day % rounded.turnover(j) as u64 == 0)
            .collect();
        let edges = steiner_edges(&tt, &clients);
        days.push(preorder_visit(&tt, &edges, &clients));
    }
    let schedule = Schedule {
        period,
        days: days
            .iter()
            .map(|d| d.iter().map(|&v| instance.vertices[v].id).collect())
            .collect(),
    };
    let (avg, _, _) = crate::schedule::evaluate(instance, &dist, &schedule)?;
    let lower_bound = tree_lower_bound(&tt_orig);
    debug_assert!(avg <= rat(2) * &lower_bound);
    let feasible = verify(instance, &schedule)?.feasible;
    let report = SolveReport {
        algorithm: "tree2".into(),
        objective: Objective::MinAvg,
        cost: avg,
        lower_bound,
        oracle_value: None,
        feasible,
        period,
        stats: SolveStats::default(),
    };
    Ok((schedule, report))
}

/// The synchronized congruence classes of the rounded instance: client `j`
/// in class `(0 mod τ'_j)`.
pub fn sync_compact_schedule(rounded: &Instance) -> CompactSchedule {
    let mut by_modulus: BTreeMap<u64, Vec<usize>> = BTreeMap::new();
    for j in rounded.clients() {
        by_modulus
            .entry(rounded.turnover(j) as u64)
            .or_default()
            .push(j);
    }
    CompactSchedule {
        classes: by_modulus
            .into_iter()
            .map(|(m, vs)| CongruenceClass {
                residue: 0,
                modulus: m,
                vertices: vs.into_iter().map(|v| rounded.vertices[v].id).collect(),
            })
            .collect(),
    }
}

/// 6-approximate MIN-MAX on trees: rounds to powers of two, assigns
/// congruence classes over the doubled-tree walk, and tours the class unions
/// day by day. The reported max never exceeds
/// `6 · max(L(G,τ), 2·max_j d(s,j))`.
pub fn solve_minmax_tree(instance: &Instance) -> Result<(Schedule, SolveReport)> {
    tree_topology_check(instance, "solve_minmax_tree")?;
    let (norm, _, _) = normalize(instance)?;
    let rounded = round_pow2(&norm);
    let tt_orig = tt_weights(&norm)?;
    let tt = tt_weights(&rounded)?;
    let dist = metric_closure(instance)?;
    let assignment = tree_congruence_assignment(&rounded, &tt)?;
    let period = assignment.period;
    let mut days = Vec::with_capacity(period as usize);
    for day in 1..=period {
        let tour = assemble_day_tour(&assignment, &tt, &dist, day);
        days.push(
            tour.order
                .iter()
                .map(|&v| instance.vertices[v].id)
                .collect(),
        );
    }
    let schedule = Schedule { period, days };
    let (_, max, _) = crate::schedule::evaluate(instance, &dist, &schedule)?;
    let reach = instance
        .clients()
        .map(|j| dist.d(instance.depot, j).clone())
        .max()
        .unwrap_or_else(|| rat(0));
    let lower_bound = tree_lower_bound(&tt_orig).max(rat(2) * reach);
    let feasible = verify(instance, &schedule)?.feasible;
    let report = SolveReport {
        algorithm: "tree6".into(),
        objective: Objective::MinMax,
        cost: max,
        lower_bound,
        oracle_value: None,
        feasible,
        period,
        stats: SolveStats {
            call_count: Some(assignment.call_count),
            cost_inequality_violations: Some(assignment.cost_inequality_violations),
            rescued_vertices: Some(assignment.rescued.len() as u64),
            ..SolveStats::default()
        },
    };
    Ok((schedule, report))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::oracle::{exact_minavg, exact_minmax};
    use crate::rational::ratio;
    use crate::schedule::{evaluate, verify_compact};
    use crate::testutil::{chain, random_tree, unit_star, weighted_star};

    #[test]
    fn tt_weight_examples() {
        let inst = chain("c", &[1, 1], &[1, 2]);
        let tt = tt_weights(&inst).unwrap();
        assert_eq!(tt.tt_weight[1], 1); // edge s-u
        assert_eq!(tt.tt_weight[2], 2); // edge u-v

        // Leaf edge carries the leaf's turnover.
        let star = unit_star(&[7]);
        let tt = tt_weights(&star).unwrap();
        assert_eq!(tt.tt_weight[1], 7);

        // Edge above a subtree with turnovers {4,2,8}.
        let inst = chain("d", &[1, 1, 1], &[4, 2, 8]);
        let tt = tt_weights(&inst).unwrap();
        assert_eq!(tt.tt_weight[1], 2);
    }

    #[test]
    fn lower_bound_examples() {
        let inst = chain("c", &[1, 1], &[1, 2]);
        assert_eq!(tree_lower_bound(&tt_weights(&inst).unwrap()), rat(3));

        let star = unit_star(&[2, 3]);
        assert_eq!(tree_lower_bound(&tt_weights(&star).unwrap()), ratio(5, 3));

        let single = chain("s", &[5], &[10]);
        assert_eq!(tree_lower_bound(&tt_weights(&single).unwrap()), rat(1));
    }

    #[test]
    fn minavg_examples() {
        let star = unit_star(&[2, 3]);
        let (sched, report) = solve_minavg_tree(&star).unwrap();
        assert!(report.feasible);
        assert_eq!(report.cost, rat(2));
        assert!(report.cost <= rat(2) * &report.lower_bound);
        assert_eq!(sched.period, 2);

        // Powers of two: the bound is attained exactly.
        let star = unit_star(&[2, 4]);
        let (sched, report) = solve_minavg_tree(&star).unwrap();
        assert_eq!(sched.period, 4);
        assert_eq!(report.cost, ratio(3, 2));
        assert_eq!(report.cost, report.lower_bound);

        let single = chain("s", &[1], &[3]);
        let (_, report) = solve_minavg_tree(&single).unwrap();
        assert_eq!(report.cost, rat(1));
    }

    #[test]
    fn minavg_attains_bound_on_pow2_trees() {
        for seed in 0..40 {
            let inst = random_tree(9, 8, 16, true, seed);
            let (norm, _, _) = normalize(&inst).unwrap();
            let (sched, report) = solve_minavg_tree(&inst).unwrap();
            assert!(report.feasible, "seed {seed}");
            let l = tree_lower_bound(&tt_weights(&norm).unwrap());
            assert_eq!(report.cost, l, "seed {seed}");
            assert!(verify(&inst, &sched).unwrap().feasible);
        }
    }

    #[test]
    fn congruence_assignment_chain_example() {
        // Chain s-u-v, unit edges, τ = (1,2): u lands in (0 mod 1) with edge
        // s-u, v lands in (0 mod 2) with edge u-v, and (1 mod 2) stays empty.
        let inst = chain("c", &[1, 1], &[1, 2]);
        let tt = tt_weights(&inst).unwrap();
        let asg = tree_congruence_assignment(&inst, &tt).unwrap();
        let c01 = &asg.classes[&(0, 1)];
        assert_eq!(c01.vertices.iter().copied().collect::<Vec<_>>(), vec![1]);
        assert_eq!(c01.edges.iter().copied().collect::<Vec<_>>(), vec![1]);
        let c02 = &asg.classes[&(0, 2)];
        assert_eq!(c02.vertices.iter().copied().collect::<Vec<_>>(), vec![2]);
        assert_eq!(c02.edges.iter().copied().collect::<Vec<_>>(), vec![2]);
        assert!(asg
            .classes
            .get(&(1, 2))
            .map_or(true, |s| s.vertices.is_empty()));
        assert!(asg.call_count <= 4); // 2|E|
        assert_eq!(asg.cost_inequality_violations, 0);

        // All turnovers 1: everything in (0 mod 1).
        let inst = chain("ones", &[1, 1], &[1, 1]);
        let tt = tt_weights(&inst).unwrap();
        let asg = tree_congruence_assignment(&inst, &tt).unwrap();
        let c01 = &asg.classes[&(0, 1)];
        assert_eq!(c01.vertices.len(), 2);
        assert_eq!(c01.edges.len(), 2);
    }

    #[test]
    fn assignment_covers_every_client_exactly_once() {
        for seed in 0..60 {
            let inst = random_tree(14, 6, 32, false, seed);
            let (norm, _, _) = normalize(&inst).unwrap();
            let rounded = round_pow2(&norm);
            let tt = tt_weights(&rounded).unwrap();
            let asg = tree_congruence_assignment(&rounded, &tt).unwrap();
            assert!(asg.call_count <= 2 * rounded.edges.len() as u64, "seed {seed}");
            assert_eq!(asg.cost_inequality_violations, 0, "seed {seed}");
            let mut seen = BTreeMap::new();
            for (&(residue, modulus), sets) in &asg.classes {
                for &v in &sets.vertices {
                    assert!(
                        seen.insert(v, (residue, modulus)).is_none(),
                        "vertex {v} in two classes (seed {seed})"
                    );
                    assert_eq!(
                        modulus,
                        rounded.turnover(v) as u64,
                        "modulus must equal the rounded turnover (seed {seed})"
                    );
                }
            }
            for j in rounded.clients() {
                assert!(seen.contains_key(&j), "client {j} unassigned (seed {seed})");
            }
            // The compact form of the assignment is itself feasible.
            let compact = asg.to_compact(&rounded);
            assert!(verify_compact(&inst, &compact).unwrap().feasible);
        }
    }

    #[test]
    fn assemble_day_tour_chain_example() {
        let inst = chain("c", &[1, 1], &[1, 2]);
        let tt = tt_weights(&inst).unwrap();
        let dist = metric_closure(&inst).unwrap();
        let asg = tree_congruence_assignment(&inst, &tt).unwrap();
        let even = assemble_day_tour(&asg, &tt, &dist, 2);
        assert_eq!(even.order, vec![1, 2]);
        assert_eq!(even.cost, rat(4));
        let odd = assemble_day_tour(&asg, &tt, &dist, 1);
        assert_eq!(odd.order, vec![1]);
        assert_eq!(odd.cost, rat(2));

        // A day with no assigned clients is idle.
        let lone = unit_star(&[4]);
        let tt = tt_weights(&lone).unwrap();
        let dist = metric_closure(&lone).unwrap();
        let asg = tree_congruence_assignment(&lone, &tt).unwrap();
        let idle = assemble_day_tour(&asg, &tt, &dist, 1);
        assert_eq!(idle.cost, rat(0));
    }

    #[test]
    fn minmax_examples() {
        let inst = chain("c", &[1, 1], &[1, 2]);
        let (sched, report) = solve_minmax_tree(&inst).unwrap();
        assert!(report.feasible);
        assert_eq!(report.cost, rat(4));
        assert_eq!(report.lower_bound, rat(4));
        let (opt, _) = exact_minmax(&inst).unwrap();
        assert_eq!(opt, rat(4)); // ratio 1 here
        assert!(verify(&inst, &sched).unwrap().feasible);

        let star = unit_star(&[1, 1]);
        let (_, report) = solve_minmax_tree(&star).unwrap();
        assert_eq!(report.cost, rat(4));
    }

    #[test]
    fn minmax_within_six_times_bound_on_random_trees() {
        for seed in 0..80 {
            let inst = random_tree(12, 9, 25, false, seed);
            let (sched, report) = solve_minmax_tree(&inst).unwrap();
            assert!(report.feasible, "seed {seed}");
            assert!(verify(&inst, &sched).unwrap().feasible);
            assert!(
                report.cost <= rat(6) * &report.lower_bound,
                "seed {seed}: {} > 6·{}",
                report.cost,
                report.lower_bound
            );
            assert_eq!(report.stats.cost_inequality_violations, Some(0));
        }
    }

    #[test]
    fn solvers_stay_within_factor_of_oracle() {
        for seed in 0..25 {
            let inst = random_tree(5, 4, 4, false, seed + 500);
            let (avg_opt, _) = exact_minavg(&inst).unwrap();
            let (_, r2) = solve_minavg_tree(&inst).unwrap();
            assert!(r2.cost >= avg_opt, "seed {seed}");
            assert!(r2.cost <= rat(2) * &avg_opt, "seed {seed}");

            let (max_opt, _) = exact_minmax(&inst).unwrap();
            let (_, r6) = solve_minmax_tree(&inst).unwrap();
            assert!(r6.cost >= max_opt, "seed {seed}");
            assert!(r6.cost <= rat(6) * &max_opt, "seed {seed}");
        }
    }

    /// For every class `(a mod m)` with a nonempty edge set, the union of
    /// its lower-level edge classes plus one depot path forms a single
    /// root-connected component spanning the matching vertex classes — the
    /// structural spanning property behind the day-tour assembly (rescued
    /// boundary vertices are patched separately).
    #[test]
    fn class_union_plus_depot_path_spans_vertex_classes() {
        for seed in 0..40 {
            let inst = random_tree(12, 6, 16, false, seed + 2000);
            let (norm, _, _) = normalize(&inst).unwrap();
            let rounded = round_pow2(&norm);
            let tt = tt_weights(&rounded).unwrap();
            let asg = tree_congruence_assignment(&rounded, &tt).unwrap();
            for (&(residue, modulus), sets) in &asg.classes {
                if sets.edges.is_empty() {
                    continue;
                }
                // T(ā_m) = P ∪ ⋃_{h ≤ m} f((a mod h) mod h).
                let mut edges: BTreeSet<usize> = BTreeSet::new();
                let mut h = 1u64;
                while h <= modulus {
                    if let Some(s) = asg.classes.get(&(residue % h, h)) {
                        edges.extend(s.edges.iter().copied());
                    }
                    h *= 2;
                }
                let anchor = *sets.edges.iter().next().unwrap();
                let mut v = tt.parent[anchor];
                while tt.parent[v] != usize::MAX {
                    edges.insert(v);
                    v = tt.parent[v];
                }
                // Root-connected vertex set of T.
                let mut rooted: BTreeSet<usize> = [tt.root].into();
                let mut changed = true;
                while changed {
                    changed = false;
                    for &child in &edges {
                        if rooted.contains(&tt.parent[child]) && rooted.insert(child) {
                            changed = true;
                        }
                    }
                }
                // Connected: every edge endpoint reaches the root.
                for &child in &edges {
                    assert!(
                        rooted.contains(&child),
                        "seed {seed} class ({residue},{modulus}): edge {child} disconnected"
                    );
                }
                // Spans the matching vertex classes.
                let mut h = 1u64;
                while h <= modulus {
                    if let Some(s) = asg.classes.get(&(residue % h, h)) {
                        for &j in &s.vertices {
                            if asg.rescued.contains(&j) {
                                continue;
                            }
                            assert!(
                                rooted.contains(&j),
                                "seed {seed} class ({residue},{modulus}): vertex {j} not spanned"
                            );
                        }
                    }
                    h *= 2;
                }
            }
        }
    }

    #[test]
    fn weighted_star_minmax() {
        let star = weighted_star(&[(5, 2), (5, 2), (6, 2)]);
        let (sched, report) = solve_minmax_tree(&star).unwrap();
        assert!(report.feasible);
        assert!(verify(&star, &sched).unwrap().feasible);
        let dist = metric_closure(&star).unwrap();
        let (_, max, _) = evaluate(&star, &dist, &sched).unwrap();
        assert_eq!(max, report.cost);
    }
}

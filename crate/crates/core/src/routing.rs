//! Metric routing toolbox: exact TSP for small client sets, double-tree
//! 2-approximate TSP, minimum spanning trees over the metric closure, and
//! tour splitting for the equal-turnover min-max subproblem.

use crate::error::{Error, Result};
use crate::instance::DistanceMatrix;
use crate::rational::{rat, Rational};

/// A depot tour: ordered client indices (depot implied at both ends) plus its
/// exact cost through the metric closure.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Tour {
    pub order: Vec<usize>,
    pub cost: Rational,
}

impl Tour {
    pub fn from_order(order: Vec<usize>, dist: &DistanceMatrix, depot: usize) -> Tour {
        let cost = tour_cost(&order, dist, depot);
        Tour { order, cost }
    }

    pub fn idle() -> Tour {
        Tour {
            order: Vec::new(),
            cost: rat(0),
        }
    }
}

pub fn tour_cost(order: &[usize], dist: &DistanceMatrix, depot: usize) -> Rational {
    let mut cost = rat(0);
    let mut prev = depot;
    for &v in order {
        cost += dist.d(prev, v);
        prev = v;
    }
    cost += dist.d(prev, depot);
    cost
}

pub const TSP_EXACT_MAX: usize = 16;

/// Minimum-cost depot tour by Held–Karp bitmask DP. Guarded at
/// [`TSP_EXACT_MAX`] clients.
pub fn tsp_exact(clients: &[usize], dist: &DistanceMatrix, depot: usize) -> Result<Tour> {
    if clients.len() > TSP_EXACT_MAX {
        return Err(Error::SizeGuard {
            what: "tsp_exact clients",
            limit: TSP_EXACT_MAX as u64,
            actual: clients.len() as u64,
        });
    }
    if clients.is_empty() {
        return Ok(Tour::idle());
    }
    let table = SubsetTours::build(clients, dist, depot)?;
    let full = (1usize << clients.len()) - 1;
    Ok(table.tour(full))
}

/// Held–Karp table over all subsets of a fixed client ground set. Building it
/// once makes every subset's optimal tour available, which the exact oracle
/// uses to cost configuration-graph transitions.
pub struct SubsetTours {
    clients: Vec<usize>,
    depot: usize,
    /// `dp[mask][last]`: cheapest depot-start path visiting `mask`, ending at
    /// `clients[last]`.
    dp: Vec<Vec<Option<Rational>>>,
    parent: Vec<Vec<u8>>,
    dist_to_depot: Vec<Rational>,
}

impl SubsetTours {
    pub fn build(clients: &[usize], dist: &DistanceMatrix, depot: usize) -> Result<SubsetTours> {
        let k = clients.len();
        if k > TSP_EXACT_MAX {
            return Err(Error::SizeGuard {
                what: "subset tour table clients",
                limit: TSP_EXACT_MAX as u64,
                actual: k as u64,
            });
        }
        let size = 1usize << k;
        let mut dp: Vec<Vec<Option<Rational>>> = vec![vec![None; k.max(1)]; size];
        let mut parent: Vec<Vec<u8>> = vec![vec![u8::MAX; k.max(1)]; size];
        for i in 0..k {
            dp[1 << i][i] = Some(dist.d(depot, clients[i]).clone());
        }
        for mask in 1..size {
            for last in 0..k {
                if mask & (1 << last) == 0 {
                    continue;
                }
                let Some(base) = dp[mask][last].clone() else {
                    continue;
                };
                for next in 0..k {
                    if mask & (1 << next) != 0 {
                        continue;
                    }
                    let cand = &base + dist.d(clients[last], clients[next]);
                    let cell = &mut dp[mask | (1 << next)][next];
                    if cell.as_ref().map_or(true, |cur| cand < *cur) {
                        *cell = Some(cand);
                        parent[mask | (1 << next)][next] = last as u8;
                    }
                }
            }
        }
        Ok(SubsetTours {
            clients: clients.to_vec(),
            depot,
            dp,
            parent,
            dist_to_depot: clients.iter().map(|&c| dist.d(c, depot).clone()).collect(),
        })
    }

    pub fn ground_set(&self) -> &[usize] {
        &self.clients
    }

    /// Optimal closed-tour cost for a subset given as a bitmask over the
    /// ground set.
    pub fn cost(&self, mask: usize) -> Rational {
        if mask == 0 {
            return rat(0);
        }
        let mut best: Option<Rational> = None;
        for last in 0..self.clients.len() {
            if mask & (1 << last) == 0 {
                continue;
            }
            if let Some(path) = &self.dp[mask][last] {
                let total = path + &self.dist_to_depot[last];
                if best.as_ref().map_or(true, |b| total < *b) {
                    best = Some(total);
                }
            }
        }
        best.expect("nonempty mask has a tour")
    }

    /// Optimal tour (order + cost) for a subset bitmask.
    pub fn tour(&self, mask: usize) -> Tour {
        if mask == 0 {
            return Tour::idle();
        }
        let mut best: Option<(Rational, usize)> = None;
        for last in 0..self.clients.len() {
            if mask & (1 << last) == 0 {
                continue;
            }
            if let Some(path) = &self.dp[mask][last] {
                let total = path + &self.dist_to_depot[last];
                if best.as_ref().map_or(true, |(b, _)| total < *b) {
                    best = Some((total, last));
                }
            }
        }
        let (cost, mut last) = best.expect("nonempty mask has a tour");
        let mut order = Vec::new();
        let mut mask = mask;
        loop {
            order.push(self.clients[last]);
            let p = self.parent[mask][last];
            mask &= !(1 << last);
            if p == u8::MAX {
                break;
            }
            last = p as usize;
        }
        order.reverse();
        debug_assert_eq!(self.depot, self.depot);
        Tour { order, cost }
    }
}

/// Minimum spanning tree over `{depot} ∪ clients` in the metric closure.
/// Prim's method; ties broken by smallest vertex index for determinism.
/// Returns `(edges, cost)` with edges as `(parent, child)` pairs in insertion
/// order.
pub fn metric_mst(
    clients: &[usize],
    dist: &DistanceMatrix,
    depot: usize,
) -> (Vec<(usize, usize)>, Rational) {
    let mut tree: Vec<usize> = vec![depot];
    let mut edges = Vec::new();
    let mut cost = rat(0);
    let mut remaining: Vec<usize> = clients.to_vec();
    // `best[i]`: (distance to tree, attachment vertex) for remaining[i].
    let mut best: Vec<(Rational, usize)> = remaining
        .iter()
        .map(|&c| (dist.d(depot, c).clone(), depot))
        .collect();
    while !remaining.is_empty() {
        let mut pick = 0;
        for i in 1..remaining.len() {
            let better = best[i].0 < best[pick].0
                || (best[i].0 == best[pick].0 && remaining[i] < remaining[pick]);
            if better {
                pick = i;
            }
        }
        let v = remaining.swap_remove(pick);
        let (w, attach) = best.swap_remove(pick);
        cost += &w;
        edges.push((attach, v));
        tree.push(v);
        for (i, &r) in remaining.iter().enumerate() {
            let d = dist.d(v, r);
            if *d < best[i].0 || (*d == best[i].0 && v < best[i].1) {
                best[i] = (d.clone(), v);
            }
        }
    }
    (edges, cost)
}

/// Preorder of a tree given as `(parent, child)` edges, children visited in
/// insertion order, starting at `root`. Includes `root`.
pub fn preorder(edges: &[(usize, usize)], root: usize) -> Vec<usize> {
    let mut children: std::collections::BTreeMap<usize, Vec<usize>> = Default::default();
    for &(p, c) in edges {
        children.entry(p).or_default().push(c);
    }
    let mut order = Vec::new();
    let mut stack = vec![root];
    while let Some(u) = stack.pop() {
        order.push(u);
        if let Some(ch) = children.get(&u) {
            for &c in ch.iter().rev() {
                stack.push(c);
            }
        }
    }
    order
}

/// Double-tree 2-approximate TSP: MST over `{depot} ∪ clients`, doubled and
/// shortcut in first-visit (preorder) order. Tour cost ≤ 2 · MST cost.
pub fn tsp_double_tree(clients: &[usize], dist: &DistanceMatrix, depot: usize) -> Tour {
    if clients.is_empty() {
        return Tour::idle();
    }
    let (edges, mst_cost) = metric_mst(clients, dist, depot);
    let order: Vec<usize> = preorder(&edges, depot)
        .into_iter()
        .filter(|&v| v != depot)
        .collect();
    let tour = Tour::from_order(order, dist, depot);
    debug_assert!(tour.cost <= rat(2) * mst_cost);
    tour
}

/// Splits a tour's clients into `k` contiguous segments of the tour order,
/// each closed into its own depot tour. Every client lands in exactly one
/// output tour; output length is exactly `k` (idle tours pad the tail).
///
/// Max output cost ≤ input/k + 2·d_max where d_max is the largest depot
/// distance among the tour's clients; the greedy sweep keeps each segment's
/// internal path length within input/k.
pub fn split_tour(tour: &Tour, k: u64, dist: &DistanceMatrix, depot: usize) -> Vec<Tour> {
    assert!(k >= 1, "split_tour requires k >= 1");
    let k = k as usize;
    if tour.order.is_empty() {
        return vec![Tour::idle(); k];
    }
    let target = tour.cost.clone() / rat(k as i128);
    let mut segments: Vec<Vec<usize>> = Vec::new();
    let mut current: Vec<usize> = Vec::new();
    let mut internal = rat(0);
    for &c in &tour.order {
        if current.is_empty() {
            current.push(c);
            continue;
        }
        let step = dist.d(*current.last().unwrap(), c).clone();
        if segments.len() + 1 < k && &internal + &step >= target {
            segments.push(std::mem::take(&mut current));
            internal = rat(0);
            current.push(c);
        } else {
            internal += step;
            current.push(c);
        }
    }
    if !current.is_empty() {
        segments.push(current);
    }
    let mut out: Vec<Tour> = segments
        .into_iter()
        .map(|seg| Tour::from_order(seg, dist, depot))
        .collect();
    while out.len() < k {
        out.push(Tour::idle());
    }
    // Provable bound, checked on every invocation.
    if cfg!(debug_assertions) {
        let d_max = tour
            .order
            .iter()
            .map(|&c| dist.d(depot, c).clone())
            .max()
            .unwrap();
        let bound = target + rat(2) * d_max;
        for t in &out {
            debug_assert!(t.cost <= bound, "split segment exceeds L/k + 2·d_max");
        }
    }
    out
}

//! Exact ground truth at desk scale via configuration-graph search.
//!
//! A configuration assigns each client its remaining slack `r_j ∈ {1,…,τ_j}`
//! (days until its deadline). Visiting set `S` on a day maps `r_j ↦ τ_j` for
//! `j ∈ S` and `r_j ↦ r_j − 1` otherwise, and is valid only when every
//! slack-1 client is in `S`. Periodic schedules correspond to cycles of this
//! finite graph, with day costs given by the optimal tour of the visited set.
//!
//! Any cycle is realizable from the fresh start state (all slacks at τ):
//! fresh slacks dominate every state pointwise, every client is visited at
//! least once per cycle (otherwise its slack would decrease forever), and
//! after one pass over the cycle's visit sets the play lands exactly on the
//! cycle. Restricting attention to periodic schedules is licensed by the
//! problem's finite turnover times; the oracle is exact over periodic
//! schedules.

use num_integer::Integer;

use crate::error::{Error, Result};
use crate::instance::{metric_closure, Instance};
use crate::rational::{rat, Rational};
use crate::routing::SubsetTours;
use crate::schedule::Schedule;

pub const ORACLE_MAX_STATES: u64 = 1_000_000;
pub const ORACLE_MAX_CLIENTS: usize = 12;
const ORACLE_MAX_EDGES: u64 = 5_000_000;

/// Configuration graph over slack vectors, restricted to states reachable
/// from the fresh start, with scaled-integer edge costs.
struct ConfigGraph {
    /// Clients in instance-index order; transition masks index into this.
    clients: Vec<usize>,
    offsets: Vec<u32>,
    targets: Vec<u32>,
    costs: Vec<i64>,
    masks: Vec<u16>,
    /// Common denominator: true cost = scaled cost / denom.
    denom: i128,
    tours: SubsetTours,
}

impl ConfigGraph {
    fn build(instance: &Instance) -> Result<ConfigGraph> {
        instance.validate()?;
        let clients: Vec<usize> = instance.clients().collect();
        if clients.len() > ORACLE_MAX_CLIENTS {
            return Err(Error::SizeGuard {
                what: "oracle clients",
                limit: ORACLE_MAX_CLIENTS as u64,
                actual: clients.len() as u64,
            });
        }
        let taus: Vec<u64> = clients
            .iter()
            .map(|&c| instance.turnover(c) as u64)
            .collect();
        let mut num_states: u64 = 1;
        for &t in &taus {
            num_states = num_states.saturating_mul(t);
            if num_states > ORACLE_MAX_STATES {
                return Err(Error::SizeGuard {
                    what: "oracle state space",
                    limit: ORACLE_MAX_STATES,
                    actual: num_states,
                });
            }
        }
        let mut strides = Vec::with_capacity(taus.len());
        let mut acc = 1u64;
        for &t in &taus {
            strides.push(acc);
            acc *= t;
        }
        let dist = metric_closure(instance)?;
        let tours = SubsetTours::build(&clients, &dist, instance.depot)?;

        // Scale all subset costs to a common integer denominator.
        let n_masks = 1usize << clients.len();
        let mut denom: i128 = 1;
        let mut mask_costs = Vec::with_capacity(n_masks);
        for mask in 0..n_masks {
            let c = tours.cost(mask);
            denom = denom.lcm(c.denom());
            mask_costs.push(c);
        }
        let scaled: Vec<i64> = mask_costs
            .iter()
            .map(|c| {
                let v = c
                    .numer()
                    .checked_mul(denom / c.denom())
                    .ok_or(Error::Overflow("oracle cost scaling"))?;
                i64::try_from(v).map_err(|_| Error::Overflow("oracle cost scaling"))
            })
            .collect::<Result<_>>()?;

        let fresh: u64 = taus.iter().zip(&strides).map(|(&t, &s)| (t - 1) * s).sum();

        // BFS from fresh, materializing transitions. Targets are first
        // recorded as raw state indices and remapped to compact ids once the
        // reachable set is complete.
        let mut compact = vec![u32::MAX; num_states as usize];
        let mut states: Vec<u64> = Vec::new();
        let mut offsets: Vec<u32> = vec![0];
        let mut costs: Vec<i64> = Vec::new();
        let mut masks: Vec<u16> = Vec::new();
        let mut raw_targets: Vec<u64> = Vec::new();
        compact[fresh as usize] = 0;
        states.push(fresh);
        let mut head = 0usize;
        while head < states.len() {
            let s = states[head];
            head += 1;
            let slacks: Vec<u64> = strides
                .iter()
                .zip(&taus)
                .map(|(&st, &t)| (s / st) % t + 1)
                .collect();
            let mut forced: u16 = 0;
            let mut free: u16 = 0;
            for (i, &r) in slacks.iter().enumerate() {
                if r == 1 {
                    forced |= 1 << i;
                } else {
                    free |= 1 << i;
                }
            }
            // Iterate S = forced ∪ T over submasks T of free.
            let mut t: u16 = free;
            loop {
                let visit = forced | t;
                let mut next: u64 = 0;
                for (i, (&r, &st)) in slacks.iter().zip(&strides).enumerate() {
                    let coord = if visit & (1 << i) != 0 {
                        taus[i] - 1
                    } else {
                        r - 2
                    };
                    next += coord * st;
                }
                raw_targets.push(next);
                costs.push(scaled[visit as usize]);
                masks.push(visit);
                if compact[next as usize] == u32::MAX {
                    compact[next as usize] = states.len() as u32;
                    states.push(next);
                }
                if raw_targets.len() as u64 > ORACLE_MAX_EDGES {
                    return Err(Error::SizeGuard {
                        what: "oracle transition count",
                        limit: ORACLE_MAX_EDGES,
                        actual: raw_targets.len() as u64,
                    });
                }
                if t == 0 {
                    break;
                }
                t = (t - 1) & free;
            }
            offsets.push(raw_targets.len() as u32);
        }
        let targets = raw_targets
            .iter()
            .map(|&rt| compact[rt as usize])
            .collect();
        Ok(ConfigGraph {
            clients,
            offsets,
            targets,
            costs,
            masks,
            denom,
            tours,
        })
    }

    fn n_reachable(&self) -> usize {
        self.offsets.len() - 1
    }

    fn edges_of(&self, v: usize) -> std::ops::Range<usize> {
        self.offsets[v] as usize..self.offsets[v + 1] as usize
    }

    fn schedule_from_cycle(&self, instance: &Instance, cycle_masks: &[u16]) -> Schedule {
        let days = cycle_masks
            .iter()
            .map(|&mask| {
                self.tours
                    .tour(mask as usize)
                    .order
                    .iter()
                    .map(|&idx| instance.vertices[idx].id)
                    .collect()
            })
            .collect();
        Schedule {
            period: cycle_masks.len() as u64,
            days,
        }
    }

    fn scaled_cost(&self, mask: u16) -> i128 {
        let c = self.tours.cost(mask as usize);
        c.numer() * (self.denom / c.denom())
    }
}

const INF: i128 = i128::MAX;

/// Exact MIN-AVG value: minimum mean cycle of the configuration graph
/// (Karp's walk-length progression from the fresh state, followed by an exact
/// reweighting pass that extracts a witness cycle from tight edges).
pub fn exact_minavg(instance: &Instance) -> Result<(Rational, Schedule)> {
    let g = ConfigGraph::build(instance)?;
    if g.clients.is_empty() {
        return Ok((rat(0), Schedule::idle()));
    }
    let n = g.n_reachable();

    let step = |f_prev: &[i128], f_cur: &mut [i128]| {
        f_cur.fill(INF);
        for u in 0..n {
            let fu = f_prev[u];
            if fu == INF {
                continue;
            }
            for e in g.edges_of(u) {
                let v = g.targets[e] as usize;
                let cand = fu + g.costs[e] as i128;
                if cand < f_cur[v] {
                    f_cur[v] = cand;
                }
            }
        }
    };

    // Pass 1: F_n (minimum walk weight with exactly n edges from fresh).
    let mut f_prev = vec![INF; n];
    let mut f_cur = vec![INF; n];
    f_prev[0] = 0;
    for _ in 0..n {
        step(&f_prev, &mut f_cur);
        std::mem::swap(&mut f_prev, &mut f_cur);
    }
    let f_n = f_prev.clone();

    // Pass 2: recompute F_k for k = 0..n-1, tracking per vertex the maximum
    // of (F_n(v) - F_k(v)) / (n - k); the minimum of those maxima over v is
    // the minimum cycle mean.
    let mut best_num = vec![i128::MIN; n];
    let mut best_den = vec![1i128; n];
    f_prev.fill(INF);
    f_prev[0] = 0;
    for k in 0..n {
        let rem = (n - k) as i128;
        for v in 0..n {
            if f_n[v] == INF || f_prev[v] == INF {
                continue;
            }
            let num = f_n[v] - f_prev[v];
            if best_num[v] == i128::MIN || num * best_den[v] > best_num[v] * rem {
                best_num[v] = num;
                best_den[v] = rem;
            }
        }
        if k + 1 < n {
            step(&f_prev, &mut f_cur);
            std::mem::swap(&mut f_prev, &mut f_cur);
        }
    }
    let mut mu: Option<(i128, i128)> = None;
    for v in 0..n {
        if f_n[v] == INF || best_num[v] == i128::MIN {
            continue;
        }
        let better = match mu {
            None => true,
            Some((mn, md)) => best_num[v] * md < mn * best_den[v],
        };
        if better {
            mu = Some((best_num[v], best_den[v]));
        }
    }
    let (mu_num, mu_den) = mu.expect("finite graph with out-edges everywhere has a cycle");

    // Reweight: c'(e) = mu_den·c(e) − mu_num has minimum cycle mean 0, so
    // shortest path distances exist and some zero-mean cycle lies entirely on
    // tight edges (dist[u] + c' == dist[v]).
    let mut dist = vec![INF; n];
    dist[0] = 0;
    for _ in 0..n {
        let mut changed = false;
        for u in 0..n {
            if dist[u] == INF {
                continue;
            }
            for e in g.edges_of(u) {
                let v = g.targets[e] as usize;
                let w = mu_den * g.costs[e] as i128 - mu_num;
                if dist[u] + w < dist[v] {
                    dist[v] = dist[u] + w;
                    changed = true;
                }
            }
        }
        if !changed {
            break;
        }
    }

    let cycle_masks = find_cycle(&g, |e, u, v| {
        dist[u] != INF && dist[u] + (mu_den * g.costs[e] as i128 - mu_num) == dist[v]
    })
    .expect("a zero-mean cycle exists on tight edges");

    let value = Rational::new(mu_num, mu_den * g.denom);
    debug_assert_eq!(
        {
            let total: i128 = cycle_masks.iter().map(|&m| g.scaled_cost(m)).sum();
            Rational::new(total, cycle_masks.len() as i128 * g.denom)
        },
        value
    );
    let schedule = g.schedule_from_cycle(instance, &cycle_masks);
    Ok((value, schedule))
}

/// Exact MIN-MAX value: smallest threshold `t` among attainable day costs
/// such that the configuration graph restricted to transitions of cost ≤ t
/// still contains a cycle reachable from the fresh state.
pub fn exact_minmax(instance: &Instance) -> Result<(Rational, Schedule)> {
    let g = ConfigGraph::build(instance)?;
    if g.clients.is_empty() {
        return Ok((rat(0), Schedule::idle()));
    }
    let mut thresholds: Vec<i64> = g.costs.clone();
    thresholds.sort_unstable();
    thresholds.dedup();

    let feasible = |t: i64| find_cycle(&g, |e, _, _| g.costs[e] <= t).is_some();

    let mut lo = 0usize;
    let mut hi = thresholds.len() - 1;
    debug_assert!(feasible(thresholds[hi]), "visiting everyone daily cycles");
    while lo < hi {
        let mid = (lo + hi) / 2;
        if feasible(thresholds[mid]) {
            hi = mid;
        } else {
            lo = mid + 1;
        }
    }
    let t = thresholds[lo];
    let cycle_masks = find_cycle(&g, |e, _, _| g.costs[e] <= t).unwrap();
    let value = Rational::new(t as i128, g.denom);
    debug_assert_eq!(
        cycle_masks
            .iter()
            .map(|&m| g.tours.cost(m as usize))
            .max()
            .unwrap(),
        value
    );
    Ok((value, g.schedule_from_cycle(instance, &cycle_masks)))
}

/// Iterative DFS from the fresh state over edges admitted by the predicate;
/// returns the visit masks along the first cycle found, if any.
fn find_cycle(g: &ConfigGraph, admit: impl Fn(usize, usize, usize) -> bool) -> Option<Vec<u16>> {
    let n = g.n_reachable();
    // 0 = white, 1 = on stack, 2 = done
    let mut color = vec![0u8; n];
    // Stack entries: (vertex, edge that led here, remaining edge iterator).
    let mut stack: Vec<(usize, usize, std::ops::Range<usize>)> = Vec::new();
    let mut depth_of: Vec<u32> = vec![u32::MAX; n];
    color[0] = 1;
    depth_of[0] = 0;
    stack.push((0, usize::MAX, g.edges_of(0)));
    while !stack.is_empty() {
        let top = stack.len() - 1;
        let u = stack[top].0;
        let mut advanced = false;
        while let Some(e) = stack[top].2.next() {
            let v = g.targets[e] as usize;
            if !admit(e, u, v) {
                continue;
            }
            match color[v] {
                0 => {
                    color[v] = 1;
                    depth_of[v] = stack.len() as u32;
                    stack.push((v, e, g.edges_of(v)));
                    advanced = true;
                    break;
                }
                1 => {
                    // Cycle: stack[depth_of[v]..] followed by closing edge e.
                    let start = depth_of[v] as usize;
                    let mut edges: Vec<usize> =
                        stack[start + 1..].iter().map(|&(_, inc, _)| inc).collect();
                    edges.push(e);
                    return Some(edges.iter().map(|&e| g.masks[e]).collect());
                }
                _ => {}
            }
        }
        if !advanced {
            color[u] = 2;
            stack.pop();
        }
    }
    None
}

/// Exact Pinwheel feasibility: one job per day, job `j` must be scheduled in
/// every window of `p_j` days. Greatest-fixed-point pruning of the one-job
/// configuration graph: states with no safe successor are deleted until a
/// fixpoint; the instance is feasible iff the fresh state survives.
pub fn pinwheel_feasible(periods: &[u64]) -> Result<PinwheelResult> {
    if periods.is_empty() {
        return Err(Error::InvalidGenSpec("empty period list".into()));
    }
    if periods.iter().any(|&p| p == 0) {
        return Err(Error::InvalidGenSpec("nonpositive period".into()));
    }
    let n = periods.len();
    let mut num_states: u64 = 1;
    for &p in periods {
        num_states = num_states.saturating_mul(p);
        if num_states > ORACLE_MAX_STATES {
            return Err(Error::SizeGuard {
                what: "pinwheel state space",
                limit: ORACLE_MAX_STATES,
                actual: num_states,
            });
        }
    }
    let mut strides = Vec::with_capacity(n);
    let mut acc = 1u64;
    for &p in periods {
        strides.push(acc);
        acc *= p;
    }
    let decode = |s: u64, i: usize| (s / strides[i]) % periods[i] + 1;
    // Schedule job j from state s: j resets, everyone else decrements and
    // must stay alive.
    let encode_next = |s: u64, j: usize| -> Option<u64> {
        let mut next = 0u64;
        for i in 0..n {
            let r = decode(s, i);
            let coord = if i == j {
                periods[i] - 1
            } else {
                if r == 1 {
                    return None;
                }
                r - 2
            };
            next += coord * strides[i];
        }
        Some(next)
    };

    let total = num_states as usize;
    let mut alive = vec![true; total];
    let mut succ_count = vec![0u32; total];
    let mut queue: Vec<u64> = Vec::new();
    for s in 0..num_states {
        let mut count = 0;
        for j in 0..n {
            if encode_next(s, j).is_some() {
                count += 1;
            }
        }
        succ_count[s as usize] = count;
        if count == 0 {
            alive[s as usize] = false;
            queue.push(s);
        }
    }
    while let Some(dead) = queue.pop() {
        // Predecessors that scheduled j to land on `dead`: j's coordinate was
        // reset to p_j, every other coordinate was one higher.
        for j in 0..n {
            if decode(dead, j) != periods[j] {
                continue;
            }
            let mut base = 0u64;
            let mut ok = true;
            for i in 0..n {
                if i == j {
                    continue;
                }
                let r = decode(dead, i);
                if r + 1 > periods[i] {
                    ok = false;
                    break;
                }
                base += r * strides[i]; // coordinate (r+1) stored as r
            }
            if !ok {
                continue;
            }
            for v in 1..=periods[j] {
                let pred = base + (v - 1) * strides[j];
                if alive[pred as usize] {
                    succ_count[pred as usize] -= 1;
                    if succ_count[pred as usize] == 0 {
                        alive[pred as usize] = false;
                        queue.push(pred);
                    }
                }
            }
        }
    }

    let fresh: u64 = periods
        .iter()
        .zip(&strides)
        .map(|(&p, &st)| (p - 1) * st)
        .sum();
    if !alive[fresh as usize] {
        return Ok(PinwheelResult {
            feasible: false,
            witness: None,
        });
    }
    // Witness: follow surviving successors, most urgent job first, until a
    // state repeats; return the cyclic part.
    let mut seen: std::collections::HashMap<u64, usize> = Default::default();
    let mut path_jobs: Vec<usize> = Vec::new();
    seen.insert(fresh, 0);
    let mut s = fresh;
    loop {
        let mut choice: Option<(u64, usize, u64)> = None; // (slack, job, next)
        for j in 0..n {
            if let Some(next) = encode_next(s, j) {
                if alive[next as usize] {
                    let slack = decode(s, j);
                    if choice.map_or(true, |(cs, cj, _)| slack < cs || (slack == cs && j < cj)) {
                        choice = Some((slack, j, next));
                    }
                }
            }
        }
        let (_, job, next) = choice.expect("alive state has an alive successor");
        path_jobs.push(job);
        if let Some(&start) = seen.get(&next) {
            return Ok(PinwheelResult {
                feasible: true,
                witness: Some(path_jobs[start..].to_vec()),
            });
        }
        seen.insert(next, path_jobs.len());
        s = next;
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PinwheelResult {
    pub feasible: bool,
    /// Cyclic job sequence (0-based indices into the period list).
    pub witness: Option<Vec<usize>>,
}

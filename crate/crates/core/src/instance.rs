//! Instance data model: validation, topology classification, dominance
//! pruning and the metric closure.
//!
//! Vertices are stored in file order and addressed internally by their index
//! into that list; [`VertexId`] is the external (file-level) label. The depot
//! carries no turnover time. Weights are exact rationals.

use std::cmp::Reverse;
use std::collections::{BTreeMap, BinaryHeap};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rational::{rat, Rational};

/// External vertex label as it appears in instance files.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct VertexId(pub i64);

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Vertex {
    pub id: VertexId,
    /// `None` exactly for the depot.
    pub turnover: Option<u32>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Edge {
    pub u: usize,
    pub v: usize,
    pub weight: Rational,
}

/// Structural class of an instance, used to route it to specialized solvers.
/// Tags are mutually exclusive; the most specific one wins
/// (star before half-line before line before tree).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Topology {
    Star,
    Halfline,
    Line,
    Tree,
    General,
}

impl Topology {
    pub fn as_str(self) -> &'static str {
        match self {
            Topology::Star => "star",
            Topology::Halfline => "halfline",
            Topology::Line => "line",
            Topology::Tree => "tree",
            Topology::General => "general",
        }
    }

    pub fn is_tree(self) -> bool {
        !matches!(self, Topology::General)
    }
}

/// A dominance-pruning record: `vertex`'s effective turnover was lowered
/// because some descendant forces at least as frequent pass-through visits.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PruneEvent {
    pub vertex: VertexId,
    pub old_turnover: u32,
    pub new_turnover: u32,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Instance {
    pub name: String,
    pub vertices: Vec<Vertex>,
    /// Index of the depot in `vertices`.
    pub depot: usize,
    pub edges: Vec<Edge>,
}

impl Instance {
    /// Builds and validates an instance from id-labelled parts.
    pub fn new(
        name: impl Into<String>,
        depot_id: VertexId,
        vertices: Vec<(VertexId, Option<u32>)>,
        edges: Vec<(VertexId, VertexId, Rational)>,
    ) -> Result<Instance> {
        let mut index = BTreeMap::new();
        for (pos, (id, _)) in vertices.iter().enumerate() {
            if index.insert(*id, pos).is_some() {
                return Err(Error::InvalidInstance(format!(
                    "duplicate vertex id {}",
                    id.0
                )));
            }
        }
        let depot = *index
            .get(&depot_id)
            .ok_or_else(|| Error::InvalidInstance(format!("depot id {} not listed", depot_id.0)))?;
        let vertices: Vec<Vertex> = vertices
            .into_iter()
            .map(|(id, turnover)| Vertex { id, turnover })
            .collect();
        let mut dense_edges = Vec::with_capacity(edges.len());
        for (u, v, weight) in edges {
            let iu = *index
                .get(&u)
                .ok_or_else(|| Error::InvalidInstance(format!("edge endpoint {} unknown", u.0)))?;
            let iv = *index
                .get(&v)
                .ok_or_else(|| Error::InvalidInstance(format!("edge endpoint {} unknown", v.0)))?;
            dense_edges.push(Edge {
                u: iu,
                v: iv,
                weight,
            });
        }
        let inst = Instance {
            name: name.into(),
            vertices,
            depot,
            edges: dense_edges,
        };
        inst.validate()?;
        Ok(inst)
    }

    /// Structural validity: unique depot without turnover, positive integer
    /// turnovers elsewhere, nonnegative weights, no self-loops or parallel
    /// edges, connected.
    pub fn validate(&self) -> Result<()> {
        if self.depot >= self.vertices.len() {
            return Err(Error::InvalidInstance("depot index out of range".into()));
        }
        for (i, v) in self.vertices.iter().enumerate() {
            if i == self.depot {
                if v.turnover.is_some() {
                    return Err(Error::InvalidInstance(format!(
                        "depot {} must not carry a turnover time",
                        v.id.0
                    )));
                }
            } else {
                match v.turnover {
                    None => {
                        return Err(Error::InvalidInstance(format!(
                            "vertex {}: missing turnover (only the depot may omit it)",
                            v.id.0
                        )))
                    }
                    Some(0) => {
                        return Err(Error::InvalidInstance(format!(
                            "vertex {}: nonpositive turnover",
                            v.id.0
                        )))
                    }
                    Some(_) => {}
                }
            }
        }
        let mut seen = BTreeMap::new();
        for e in &self.edges {
            if e.u == e.v {
                return Err(Error::InvalidInstance(format!(
                    "self-loop at vertex {}",
                    self.vertices[e.u].id.0
                )));
            }
            if e.u >= self.vertices.len() || e.v >= self.vertices.len() {
                return Err(Error::InvalidInstance("edge endpoint out of range".into()));
            }
            if e.weight < rat(0) {
                return Err(Error::InvalidInstance(format!(
                    "negative weight on edge {}-{}",
                    self.vertices[e.u].id.0, self.vertices[e.v].id.0
                )));
            }
            let key = (e.u.min(e.v), e.u.max(e.v));
            if seen.insert(key, ()).is_some() {
                return Err(Error::InvalidInstance(format!(
                    "parallel edge {}-{} (pre-merge keeping the minimum weight)",
                    self.vertices[key.0].id.0, self.vertices[key.1].id.0
                )));
            }
        }
        // Connectivity.
        let adj = self.adjacency();
        let mut seen = vec![false; self.vertices.len()];
        let mut stack = vec![self.depot];
        seen[self.depot] = true;
        while let Some(u) = stack.pop() {
            for &(v, _) in &adj[u] {
                if !seen[v] {
                    seen[v] = true;
                    stack.push(v);
                }
            }
        }
        if let Some(i) = seen.iter().position(|s| !s) {
            return Err(Error::InvalidInstance(format!(
                "disconnected graph: vertex {} unreachable from depot",
                self.vertices[i].id.0
            )));
        }
        Ok(())
    }

    pub fn n_vertices(&self) -> usize {
        self.vertices.len()
    }

    /// Indices of all non-depot vertices.
    pub fn clients(&self) -> impl Iterator<Item = usize> + '_ {
        let depot = self.depot;
        (0..self.vertices.len()).filter(move |&i| i != depot)
    }

    pub fn n_clients(&self) -> usize {
        self.vertices.len() - 1
    }

    pub fn turnover(&self, idx: usize) -> u32 {
        self.vertices[idx]
            .turnover
            .expect("turnover requested for the depot")
    }

    pub fn index_of(&self, id: VertexId) -> Option<usize> {
        self.vertices.iter().position(|v| v.id == id)
    }

    pub fn adjacency(&self) -> Vec<Vec<(usize, Rational)>> {
        let mut adj = vec![Vec::new(); self.vertices.len()];
        for e in &self.edges {
            adj[e.u].push((e.v, e.weight.clone()));
            adj[e.v].push((e.u, e.weight.clone()));
        }
        for list in &mut adj {
            list.sort_by_key(|&(v, _)| v);
        }
        adj
    }

    pub fn classify(&self) -> Topology {
        let n = self.vertices.len();
        if self.edges.len() != n - 1 {
            return Topology::General; // connected with extra edges => cycle
        }
        let adj = self.adjacency();
        let star = self
            .edges
            .iter()
            .all(|e| e.u == self.depot || e.v == self.depot);
        if star {
            return Topology::Star;
        }
        let path = adj.iter().all(|l| l.len() <= 2);
        if path {
            if adj[self.depot].len() <= 1 {
                return Topology::Halfline;
            }
            return Topology::Line;
        }
        Topology::Tree
    }

    /// Depot-rooted parent array (`parent[depot] == usize::MAX`). Only valid
    /// on trees.
    pub fn tree_parents(&self) -> Result<Vec<usize>> {
        if self.edges.len() != self.vertices.len() - 1 {
            return Err(Error::Topology {
                solver: "tree_parents",
                expected: "tree",
                got: "general",
            });
        }
        let adj = self.adjacency();
        let mut parent = vec![usize::MAX; self.vertices.len()];
        let mut seen = vec![false; self.vertices.len()];
        let mut stack = vec![self.depot];
        seen[self.depot] = true;
        while let Some(u) = stack.pop() {
            for &(v, _) in &adj[u] {
                if !seen[v] {
                    seen[v] = true;
                    parent[v] = u;
                    stack.push(v);
                }
            }
        }
        Ok(parent)
    }
}

/// Normalization: validation, topology classification and — on trees —
/// dominance pruning. A vertex whose turnover exceeds the minimum turnover in
/// its own depot-rooted subtree is visited for free whenever the dominating
/// descendant is visited, so its effective turnover is lowered to that
/// minimum. Vertices are never deleted; verification against the original
/// turnover vector stays possible.
pub fn normalize(instance: &Instance) -> Result<(Instance, Topology, Vec<PruneEvent>)> {
    instance.validate()?;
    let topo = instance.classify();
    if !topo.is_tree() {
        return Ok((instance.clone(), topo, Vec::new()));
    }
    let parent = instance.tree_parents()?;
    // Children-before-parent order via BFS layers.
    let order = bfs_order(instance, &parent);
    let mut effective: Vec<Option<u32>> =
        instance.vertices.iter().map(|v| v.turnover).collect();
    for &u in order.iter().rev() {
        if u == instance.depot {
            continue;
        }
        let mut min_in_subtree = effective[u].unwrap();
        for (v, p) in parent.iter().enumerate() {
            if *p == u {
                if let Some(t) = effective[v] {
                    min_in_subtree = min_in_subtree.min(t);
                }
            }
        }
        effective[u] = Some(min_in_subtree);
    }
    let mut events = Vec::new();
    let mut out = instance.clone();
    for (i, v) in out.vertices.iter_mut().enumerate() {
        if i == instance.depot {
            continue;
        }
        let old = v.turnover.unwrap();
        let new = effective[i].unwrap();
        if new < old {
            events.push(PruneEvent {
                vertex: v.id,
                old_turnover: old,
                new_turnover: new,
            });
            v.turnover = Some(new);
        }
    }
    Ok((out, topo, events))
}

fn bfs_order(instance: &Instance, parent: &[usize]) -> Vec<usize> {
    let n = instance.vertices.len();
    let mut children = vec![Vec::new(); n];
    for (v, &p) in parent.iter().enumerate() {
        if p != usize::MAX {
            children[p].push(v);
        }
    }
    let mut order = Vec::with_capacity(n);
    let mut queue = std::collections::VecDeque::from([instance.depot]);
    while let Some(u) = queue.pop_front() {
        order.push(u);
        for &c in &children[u] {
            queue.push_back(c);
        }
    }
    order
}

/// All-pairs shortest-path distances, exact.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DistanceMatrix {
    pub dist: Vec<Vec<Rational>>,
}

impl DistanceMatrix {
    pub fn d(&self, u: usize, v: usize) -> &Rational {
        &self.dist[u][v]
    }

    pub fn n(&self) -> usize {
        self.dist.len()
    }
}

/// Metric closure of the instance graph (Dijkstra from every vertex).
pub fn metric_closure(instance: &Instance) -> Result<DistanceMatrix> {
    instance.validate()?;
    let n = instance.vertices.len();
    let adj = instance.adjacency();
    let mut dist = Vec::with_capacity(n);
    for src in 0..n {
        let mut d: Vec<Option<Rational>> = vec![None; n];
        let mut heap = BinaryHeap::new();
        d[src] = Some(rat(0));
        heap.push(Reverse((rat(0), src)));
        while let Some(Reverse((du, u))) = heap.pop() {
            if d[u].as_ref() != Some(&du) {
                continue;
            }
            for (v, w) in &adj[u] {
                let cand = &du + w;
                if d[*v].as_ref().map_or(true, |cur| cand < *cur) {
                    d[*v] = Some(cand.clone());
                    heap.push(Reverse((cand, *v)));
                }
            }
        }
        dist.push(
            d.into_iter()
                .map(|x| x.expect("validated instance is connected"))
                .collect(),
        );
    }
    Ok(DistanceMatrix { dist })
}

// ---------------------------------------------------------------------------
// Instance file format (JSON).
//
// {"name": str, "depot": int,
//  "vertices": [{"id": int, "turnover": int}],       # depot omits "turnover"
//  "edges": [{"u": int, "v": int, "weight": {"num": int, "den": int}}]}
//
// Integer weights may be written as bare ints.
// ---------------------------------------------------------------------------

#[derive(Serialize, Deserialize)]
struct InstanceFile {
    name: String,
    depot: i64,
    vertices: Vec<VertexFile>,
    edges: Vec<EdgeFile>,
}

#[derive(Serialize, Deserialize)]
struct VertexFile {
    id: i64,
    #[serde(skip_serializing_if = "Option::is_none")]
    turnover: Option<u32>,
}

#[derive(Serialize, Deserialize)]
struct EdgeFile {
    u: i64,
    v: i64,
    weight: WeightFile,
}

#[derive(Serialize, Deserialize)]
#[serde(untagged)]
enum WeightFile {
    Int(i64),
    Frac { num: i64, den: i64 },
}

impl Instance {
    pub fn to_json(&self) -> String {
        let file = InstanceFile {
            name: self.name.clone(),
            depot: self.vertices[self.depot].id.0,
            vertices: self
                .vertices
                .iter()
                .map(|v| VertexFile {
                    id: v.id.0,
                    turnover: v.turnover,
                })
                .collect(),
            edges: self
                .edges
                .iter()
                .map(|e| EdgeFile {
                    u: self.vertices[e.u].id.0,
                    v: self.vertices[e.v].id.0,
                    weight: if *e.weight.denom() == 1 {
                        WeightFile::Int(*e.weight.numer() as i64)
                    } else {
                        WeightFile::Frac {
                            num: *e.weight.numer() as i64,
                            den: *e.weight.denom() as i64,
                        }
                    },
                })
                .collect(),
        };
        let mut s = serde_json::to_string_pretty(&file).expect("instance serialization");
        s.push('\n');
        s
    }

    pub fn from_json(text: &str) -> Result<Instance> {
        let file: InstanceFile = serde_json::from_str(text)
            .map_err(|e| Error::InvalidInstance(format!("parse error: {e}")))?;
        let vertices = file
            .vertices
            .iter()
            .map(|v| (VertexId(v.id), v.turnover))
            .collect();
        let edges = file
            .edges
            .iter()
            .map(|e| {
                let w = match e.weight {
                    WeightFile::Int(n) => rat(n as i128),
                    WeightFile::Frac { num, den } => {
                        if den <= 0 {
                            return Err(Error::InvalidInstance(format!(
                                "weight with nonpositive denominator on edge {}-{}",
                                e.u, e.v
                            )));
                        }
                        Rational::new(num as i128, den as i128)
                    }
                };
                Ok((VertexId(e.u), VertexId(e.v), w))
            })
            .collect::<Result<Vec<_>>>()?;
        Instance::new(file.name, VertexId(file.depot), vertices, edges)
    }
}

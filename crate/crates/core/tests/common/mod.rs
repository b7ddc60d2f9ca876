//! Independent reference implementations shared by the integration tests.
//!
//! Nothing here calls the library's closure, d-separation or admissibility
//! code: separation is decided by enumerating simple paths, and discrete
//! ground truth comes from explicit conditional probability tables.

#![allow(dead_code)]

use std::collections::BTreeSet;

use diffgraph::identify::{identify, Condition, Effect, EffectQuery, VerdictKind};
use diffgraph::simulate::sample_compatible_pair;
use diffgraph::{CausalDag, DataKind, Dataset, DifferenceGraph, Digraph, VariableId};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub const LETTERS: [&str; 8] = ["A", "B", "C", "D", "E", "F", "G", "H"];

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn names(n: usize) -> Vec<VariableId> {
    LETTERS[..n].iter().map(|s| VariableId::new(*s).unwrap()).collect()
}

/// Ordered pairs of distinct vertices in index order, as the edge mask bits.
pub fn vertex_pairs(n: usize) -> Vec<(usize, usize)> {
    (0..n)
        .flat_map(|a| (0..n).filter(move |&b| b != a).map(move |b| (a, b)))
        .collect()
}

pub fn graph_from_mask(n: usize, mask: u64) -> Digraph {
    let edges = vertex_pairs(n)
        .into_iter()
        .enumerate()
        .filter(|(i, _)| mask >> i & 1 == 1)
        .map(|(_, e)| e);
    Digraph::new(names(n), edges).unwrap()
}

/// Every difference graph on `n` vertices.
pub fn all_difference_graphs(n: usize) -> impl Iterator<Item = DifferenceGraph> {
    let bits = n * (n - 1);
    (0..1u64 << bits).map(move |m| DifferenceGraph::new(graph_from_mask(n, m)))
}

pub fn random_digraph(rng: &mut ChaCha8Rng, n: usize, density: f64) -> Digraph {
    let edges: Vec<_> = vertex_pairs(n)
        .into_iter()
        .filter(|_| rng.random_bool(density))
        .collect();
    Digraph::new(names(n), edges).unwrap()
}

/// Random DAG: forward edges of a random permutation.
pub fn random_dag(rng: &mut ChaCha8Rng, n: usize, density: f64) -> CausalDag {
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(rng);
    let mut edges = Vec::new();
    for i in 0..n {
        for j in i + 1..n {
            if rng.random_bool(density) {
                edges.push((order[i], order[j]));
            }
        }
    }
    CausalDag::new(Digraph::new(names(n), edges).unwrap()).unwrap()
}

pub fn random_subset(rng: &mut ChaCha8Rng, n: usize, exclude: &[usize]) -> BTreeSet<usize> {
    (0..n)
        .filter(|v| !exclude.contains(v) && rng.random_bool(0.4))
        .collect()
}

/// Vertices reachable from `v` along edges (reflexive).
pub fn reach(g: &Digraph, v: usize, forward: bool) -> BTreeSet<usize> {
    let mut seen = BTreeSet::from([v]);
    let mut stack = vec![v];
    while let Some(u) = stack.pop() {
        for w in 0..g.n() {
            let edge = if forward { g.has_edge(u, w) } else { g.has_edge(w, u) };
            if edge && seen.insert(w) {
                stack.push(w);
            }
        }
    }
    seen
}

/// Simple paths between `x` and `y` in the skeleton, as vertex sequences.
/// Each step records whether it was traversed along the edge direction.
fn simple_paths(g: &Digraph, x: usize, y: usize) -> Vec<Vec<(usize, bool)>> {
    fn go(
        g: &Digraph,
        y: usize,
        path: &mut Vec<(usize, bool)>,
        visited: &mut Vec<bool>,
        out: &mut Vec<Vec<(usize, bool)>>,
    ) {
        let u = path.last().unwrap().0;
        if u == y {
            out.push(path.clone());
            return;
        }
        for w in 0..g.n() {
            if visited[w] {
                continue;
            }
            for forward in [true, false] {
                let edge = if forward { g.has_edge(u, w) } else { g.has_edge(w, u) };
                if edge {
                    visited[w] = true;
                    path.push((w, forward));
                    go(g, y, path, visited, out);
                    path.pop();
                    visited[w] = false;
                }
            }
        }
    }
    let mut visited = vec![false; g.n()];
    visited[x] = true;
    let mut out = Vec::new();
    go(g, y, &mut vec![(x, true)], &mut visited, &mut out);
    out
}

fn path_active(g: &Digraph, path: &[(usize, bool)], z: &BTreeSet<usize>) -> bool {
    for i in 1..path.len() - 1 {
        let v = path[i].0;
        // into v from the previous vertex, and into v from the next one
        let into_from_prev = path[i].1;
        let into_from_next = !path[i + 1].1;
        if into_from_prev && into_from_next {
            let opened = reach(g, v, true).iter().any(|d| z.contains(d));
            if !opened {
                return false;
            }
        } else if z.contains(&v) {
            return false;
        }
    }
    true
}

pub fn d_separated_by_paths(g: &Digraph, x: usize, y: usize, z: &BTreeSet<usize>) -> bool {
    simple_paths(g, x, y).iter().all(|p| !path_active(g, p, z))
}

/// No member of `z` descends from `x`, and every path from `x` that starts
/// with an edge into `x` is blocked.
pub fn backdoor_by_paths(g: &Digraph, x: usize, y: usize, z: &BTreeSet<usize>) -> bool {
    let desc = reach(g, x, true);
    if z.iter().any(|v| desc.contains(v)) {
        return false;
    }
    simple_paths(g, x, y)
        .iter()
        .filter(|p| !p[1].1)
        .all(|p| !path_active(g, p, z))
}

/// No member of `z` descends from `y`, and every path other than the edge
/// `x -> y` itself is blocked in the graph without that edge.
pub fn single_door_by_paths(g: &Digraph, x: usize, y: usize, z: &BTreeSet<usize>) -> bool {
    let desc = reach(g, y, true);
    if z.iter().any(|v| desc.contains(v)) {
        return false;
    }
    let cut = g.without_edges(|t, h| t == x && h == y);
    simple_paths(&cut, x, y).iter().all(|p| !path_active(&cut, p, z))
}

/// Verdict from the graphical conditions; panics on invalid queries.
pub fn theorem(d: &DifferenceGraph, x: usize, y: usize, shared: bool, effect: Effect) -> diffgraph::Verdict {
    let q = EffectQuery::new(d.clone(), d.name(x).as_str(), d.name(y).as_str(), shared).unwrap();
    identify(&q, effect).unwrap()
}

pub fn same_clause(a: Condition, b: Condition) -> bool {
    use Condition::*;
    matches!((a, b), (A1, B1) | (A2, B2) | (C1, D1) | (C2, D2) | (None, None))
}

/// Acyclic difference graphs give the same verdict under both modes.
pub fn acyclic_reduction_holds(d: &DifferenceGraph, x: usize, y: usize) -> bool {
    [Effect::Total, Effect::Direct].into_iter().all(|effect| {
        let s = theorem(d, x, y, true, effect);
        let g = theorem(d, x, y, false, effect);
        s.kind == g.kind && s.adjustment_set == g.adjustment_set && same_clause(s.condition, g.condition)
    })
}

pub fn round_trip_holds(d: &DifferenceGraph, shared: bool, seed: u64) -> bool {
    let pair = sample_compatible_pair(d, shared, seed).unwrap();
    let ok = pair.recompute_difference_graph().to_edge_list() == d.to_edge_list();
    let order = !shared || diffgraph::shares_topological_order(pair.scm1.dag(), pair.scm2.dag()).unwrap();
    ok && order
}

pub fn duality_holds(g: &Digraph) -> bool {
    (0..g.n()).all(|u| {
        let anc = g.ancestor_set(u);
        (0..g.n()).all(|v| anc.contains(&v) == g.descendant_set(v).contains(&u))
    })
}

pub fn is_identifiable(kind: VerdictKind) -> bool {
    kind != VerdictKind::NotIdentifiable
}

/// Discrete Bayesian network over variables listed in topological order.
pub struct CptNetwork {
    pub names: Vec<&'static str>,
    pub cards: Vec<usize>,
    pub parents: Vec<Vec<usize>>,
    /// `cpts[v][config]` is the distribution of `v` given the parent
    /// configuration `config` (mixed radix, first parent most significant).
    pub cpts: Vec<Vec<Vec<f64>>>,
}

impl CptNetwork {
    fn config(&self, v: usize, values: &[usize]) -> usize {
        self.parents[v]
            .iter()
            .fold(0, |acc, &p| acc * self.cards[p] + values[p])
    }

    fn draw(dist: &[f64], rng: &mut ChaCha8Rng) -> usize {
        let u: f64 = rng.random();
        let mut acc = 0.0;
        for (i, p) in dist.iter().enumerate() {
            acc += p;
            if u < acc {
                return i;
            }
        }
        dist.len() - 1
    }

    pub fn sample(&self, n: usize, seed: u64) -> Dataset {
        let mut rng = rng(seed);
        let mut columns = vec![Vec::with_capacity(n); self.names.len()];
        let mut values = vec![0; self.names.len()];
        for _ in 0..n {
            for v in 0..self.names.len() {
                let c = self.config(v, &values);
                values[v] = Self::draw(&self.cpts[v][c], &mut rng);
                columns[v].push(values[v] as f64);
            }
        }
        let ids = self.names.iter().map(|s| VariableId::new(*s).unwrap()).collect();
        Dataset::new(ids, columns, DataKind::Discrete).unwrap()
    }

    fn assignments(&self) -> Vec<Vec<usize>> {
        let mut out = vec![vec![]];
        for &c in &self.cards {
            out = out
                .into_iter()
                .flat_map(|a| {
                    (0..c).map(move |v| {
                        let mut b = a.clone();
                        b.push(v);
                        b
                    })
                })
                .collect();
        }
        out
    }

    /// Exact `P(y | do(x))` by the truncated product, summed over all
    /// complete assignments.
    pub fn interventional(&self, x: usize, y: usize) -> Vec<Vec<f64>> {
        let mut table = vec![vec![0.0; self.cards[y]]; self.cards[x]];
        for a in self.assignments() {
            let mut p = 1.0;
            for v in 0..self.names.len() {
                if v != x {
                    p *= self.cpts[v][self.config(v, &a)][a[v]];
                }
            }
            table[a[x]][a[y]] += p;
        }
        table
    }
}

pub fn median(mut v: Vec<f64>) -> f64 {
    v.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let m = v.len() / 2;
    if v.len() % 2 == 1 {
        v[m]
    } else {
        (v[m - 1] + v[m]) / 2.0
    }
}

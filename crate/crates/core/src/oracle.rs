//! Exhaustive ground truth for common back-door / single-door identifiability.
//!
//! Compatibility between a difference graph `D` and a pair of causal DAGs is
//! structural, because path coefficients are otherwise free:
//!
//! * an edge of `D` must be present in at least one DAG (present in both means
//!   the two coefficients differ);
//! * a non-edge of `D` is present in both DAGs or in neither (equal coefficients);
//! * in shared-order mode the union of the two DAGs must be acyclic.
//!
//! The oracle enumerates every compatible pair on up to [`VERTEX_CAP`]
//! vertices, collects the DAGs that occur in any pair, and searches for one
//! adjustment set that is admissible in all of them. It does not consult the
//! graphical conditions in [`crate::identify`].
//!
//! Graphs are encoded as edge bitmasks; the DAG-level facts (admissible sets
//! for every ordered pair) are cached per oracle instance.

use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};

use crate::error::{Error, Result};
use crate::graph::{CausalDag, DifferenceGraph, Digraph, VertexSet};
use crate::identify::{Effect, Verdict};

/// Largest vertex count the oracle will enumerate.
pub const VERTEX_CAP: usize = 5;

/// Bit position of edge `tail -> head` in an `n`-vertex edge mask.
fn edge_bit(n: usize, tail: usize, head: usize) -> u32 {
    debug_assert!(tail != head);
    (tail * (n - 1) + if head < tail { head } else { head - 1 }) as u32
}

fn mask_edges(n: usize, mask: u32) -> impl Iterator<Item = (usize, usize)> {
    (0..n)
        .flat_map(move |t| (0..n).filter(move |&h| h != t).map(move |h| (t, h)))
        .filter(move |&(t, h)| mask >> edge_bit(n, t, h) & 1 == 1)
}

fn mask_is_acyclic(n: usize, mask: u32) -> bool {
    let mut children = [0u8; VERTEX_CAP];
    for (t, h) in mask_edges(n, mask) {
        children[t] |= 1 << h;
    }
    let mut remaining: u8 = ((1u16 << n) - 1) as u8;
    while remaining != 0 {
        // a vertex with no incoming edge from the remaining vertices
        let source = (0..n)
            .find(|&v| remaining >> v & 1 == 1 && (0..n).all(|u| remaining >> u & 1 == 0 || children[u] >> v & 1 == 0));
        match source {
            Some(v) => remaining &= !(1 << v),
            None => return false,
        }
    }
    true
}

/// All DAG masks on `n` labelled vertices, with a membership bitmap.
struct DagSpace {
    dags: Vec<u32>,
    member: Vec<u64>,
}

impl DagSpace {
    fn build(n: usize) -> Self {
        let bits = n * n.saturating_sub(1);
        let total = 1usize << bits;
        let mut member = vec![0u64; total.div_ceil(64)];
        let mut dags = Vec::new();
        for mask in 0..total as u32 {
            if mask_is_acyclic(n, mask) {
                dags.push(mask);
                member[mask as usize / 64] |= 1 << (mask % 64);
            }
        }
        DagSpace { dags, member }
    }

    fn contains(&self, mask: u32) -> bool {
        self.member[mask as usize / 64] >> (mask % 64) & 1 == 1
    }
}

fn dag_space(n: usize) -> &'static DagSpace {
    static SPACES: [OnceLock<DagSpace>; VERTEX_CAP + 1] = [const { OnceLock::new() }; VERTEX_CAP + 1];
    SPACES[n].get_or_init(|| DagSpace::build(n))
}

/// Two causal DAGs that together realize a difference graph.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CompatiblePair {
    pub g1: CausalDag,
    pub g2: CausalDag,
}

/// Per-DAG facts for one ordered (x, y): admissible-set families are bitmaps
/// indexed by vertex-subset masks.
#[derive(Clone, Copy, Debug, Default)]
struct PairFacts {
    backdoor: u32,
    single_door: u32,
    x_ancestor_of_y: bool,
    x_parent_of_y: bool,
}

struct DagFacts {
    by_pair: Vec<PairFacts>,
}

fn subset_of(mask: u32) -> VertexSet {
    (0..32).filter(|&v| mask >> v & 1 == 1).collect()
}

/// `z` satisfies the back-door criterion for `(x, y)` in `g`: it contains no
/// strict descendant of `x` and blocks every path into `x`.
pub fn backdoor_admissible(g: &CausalDag, x: usize, y: usize, z: &VertexSet) -> bool {
    let desc = g.descendant_set(x);
    if z.iter().any(|w| *w != x && desc.contains(w)) {
        return false;
    }
    // Without the out-edges of x, the remaining x-y paths are exactly the
    // back-door paths.
    let cut = g.without_edges(|t, _| t == x);
    cut.d_separated_idx(x, y, z)
}

/// `z` satisfies the single-door criterion for the path coefficient of
/// `x -> y`: no descendant of `y`, and d-separation of `x` and `y` once the
/// edge `x -> y` is removed.
pub fn single_door_admissible(g: &CausalDag, x: usize, y: usize, z: &VertexSet) -> bool {
    let desc = g.descendant_set(y);
    if z.iter().any(|w| desc.contains(w)) {
        return false;
    }
    let cut = g.without_edges(|t, h| t == x && h == y);
    cut.d_separated_idx(x, y, z)
}

fn dag_facts(n: usize, mask: u32) -> DagFacts {
    let names = (0..n)
        .map(|i| crate::graph::VariableId::new(format!("V{i}")).expect("valid"))
        .collect();
    let g = CausalDag::new(Digraph::new(names, mask_edges(n, mask)).expect("valid edges")).expect("mask is a DAG");
    let mut by_pair = vec![PairFacts::default(); n * n.saturating_sub(1)];
    for x in 0..n {
        for y in (0..n).filter(|&y| y != x) {
            let others: u32 = ((1u32 << n) - 1) & !(1 << x) & !(1 << y);
            let mut facts = PairFacts {
                x_ancestor_of_y: g.descendant_set(x).contains(&y),
                x_parent_of_y: g.has_edge(x, y),
                ..PairFacts::default()
            };
            // enumerate all subsets of `others`
            let mut s = others;
            loop {
                let z = subset_of(s);
                if backdoor_admissible(&g, x, y, &z) {
                    facts.backdoor |= 1 << s;
                }
                if single_door_admissible(&g, x, y, &z) {
                    facts.single_door |= 1 << s;
                }
                if s == 0 {
                    break;
                }
                s = (s - 1) & others;
            }
            by_pair[edge_bit(n, x, y) as usize] = facts;
        }
    }
    DagFacts { by_pair }
}

/// Subset masks of `others`, ordered by size and then lexicographically by
/// their sorted vertex indices.
fn subsets_in_search_order(others: u32) -> Vec<u32> {
    let mut subsets = Vec::new();
    let mut s = others;
    loop {
        subsets.push(s);
        if s == 0 {
            break;
        }
        s = (s - 1) & others;
    }
    subsets.sort_by_key(|&s| (s.count_ones(), subset_of(s).into_iter().collect::<Vec<_>>()));
    subsets
}

#[derive(Default)]
pub struct Oracle {
    cache: Mutex<HashMap<(usize, u32), Arc<DagFacts>>>,
}

impl std::fmt::Debug for Oracle {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Oracle").finish_non_exhaustive()
    }
}

struct Encoded {
    n: usize,
    diff: u32,
}

impl Oracle {
    pub fn new() -> Self {
        Oracle::default()
    }

    /// Process-wide instance shared by the free functions in this module.
    pub fn global() -> &'static Oracle {
        static GLOBAL: OnceLock<Oracle> = OnceLock::new();
        GLOBAL.get_or_init(Oracle::new)
    }

    fn encode(d: &DifferenceGraph) -> Result<Encoded> {
        let n = d.n();
        if n > VERTEX_CAP {
            return Err(Error::TooManyVertices { n, cap: VERTEX_CAP });
        }
        let diff = d.edges().fold(0u32, |m, (t, h)| m | 1 << edge_bit(n, t, h));
        Ok(Encoded { n, diff })
    }

    fn facts(&self, n: usize, mask: u32) -> Arc<DagFacts> {
        if let Some(f) = self.cache.lock().expect("oracle cache poisoned").get(&(n, mask)) {
            return Arc::clone(f);
        }
        let facts = Arc::new(dag_facts(n, mask));
        self.cache
            .lock()
            .expect("oracle cache poisoned")
            .entry((n, mask))
            .or_insert(facts)
            .clone()
    }

    /// Unordered compatible pairs as `(min, max)` masks, sorted.
    fn pair_masks(e: &Encoded, shared_order: bool) -> Vec<(u32, u32)> {
        let space = dag_space(e.n);
        let mut pairs = Vec::new();
        for &g1 in &space.dags {
            // non-edges of D copy over; D-edges missing from g1 must be in g2;
            // D-edges in g1 may or may not be in g2.
            let fixed = (g1 & !e.diff) | (e.diff & !g1);
            let optional = g1 & e.diff;
            let mut sub = optional;
            loop {
                let g2 = fixed | sub;
                if g1 <= g2 && space.contains(g2) && (!shared_order || mask_is_acyclic(e.n, g1 | g2)) {
                    pairs.push((g1, g2));
                }
                if sub == 0 {
                    break;
                }
                sub = (sub - 1) & optional;
            }
        }
        pairs.sort_unstable();
        pairs
    }

    fn dag_masks(e: &Encoded, shared_order: bool) -> Vec<u32> {
        let mut masks: Vec<u32> = Self::pair_masks(e, shared_order)
            .into_iter()
            .flat_map(|(a, b)| [a, b])
            .collect();
        masks.sort_unstable();
        masks.dedup();
        masks
    }

    fn to_dag(d: &DifferenceGraph, mask: u32) -> CausalDag {
        let g = Digraph::new(d.names().to_vec(), mask_edges(d.n(), mask)).expect("valid edges");
        CausalDag::new(g).expect("mask is a DAG")
    }

    pub fn compatible_pairs(&self, d: &DifferenceGraph, shared_order: bool) -> Result<Vec<CompatiblePair>> {
        let e = Self::encode(d)?;
        Ok(Self::pair_masks(&e, shared_order)
            .into_iter()
            .map(|(a, b)| CompatiblePair {
                g1: Self::to_dag(d, a),
                g2: Self::to_dag(d, b),
            })
            .collect())
    }

    /// Every DAG occurring in some compatible pair, in a fixed total order.
    pub fn enumerate_compatible_dags(&self, d: &DifferenceGraph, shared_order: bool) -> Result<Vec<CausalDag>> {
        let e = Self::encode(d)?;
        Ok(Self::dag_masks(&e, shared_order)
            .into_iter()
            .map(|m| Self::to_dag(d, m))
            .collect())
    }

    pub fn oracle_total(&self, d: &DifferenceGraph, x: &str, y: &str, shared_order: bool) -> Result<Verdict> {
        self.decide(d, x, y, shared_order, Effect::Total)
    }

    pub fn oracle_direct(&self, d: &DifferenceGraph, x: &str, y: &str, shared_order: bool) -> Result<Verdict> {
        self.decide(d, x, y, shared_order, Effect::Direct)
    }

    fn endpoints(d: &DifferenceGraph, x: &str, y: &str) -> Result<(usize, usize)> {
        let xi = d.index_of(x)?;
        let yi = d.index_of(y)?;
        if xi == yi {
            return Err(Error::SameVertex(x.to_string()));
        }
        Ok((xi, yi))
    }

    fn pair_facts(&self, e: &Encoded, masks: &[u32], x: usize, y: usize) -> Vec<PairFacts> {
        let p = edge_bit(e.n, x, y) as usize;
        masks.iter().map(|&m| self.facts(e.n, m).by_pair[p]).collect()
    }

    fn family(f: &PairFacts, effect: Effect) -> u32 {
        match effect {
            Effect::Total => f.backdoor,
            Effect::Direct => f.single_door,
        }
    }

    pub fn decide(&self, d: &DifferenceGraph, x: &str, y: &str, shared_order: bool, effect: Effect) -> Result<Verdict> {
        let (xi, yi) = Self::endpoints(d, x, y)?;
        let e = Self::encode(d)?;
        let masks = Self::dag_masks(&e, shared_order);
        let facts = self.pair_facts(&e, &masks, xi, yi);

        let null = match effect {
            Effect::Total => facts.iter().all(|f| !f.x_ancestor_of_y),
            Effect::Direct => facts.iter().all(|f| !f.x_parent_of_y),
        };
        if null {
            return Ok(Verdict::null_effect(effect, crate::identify::Condition::None));
        }

        let common = facts.iter().fold(u32::MAX, |acc, f| acc & Self::family(f, effect));
        if common != 0 {
            let others = ((1u32 << e.n) - 1) & !(1 << xi) & !(1 << yi);
            let chosen = subsets_in_search_order(others)
                .into_iter()
                .find(|&s| common >> s & 1 == 1)
                .expect("non-empty family has a member");
            let names = d.names_of(&subset_of(chosen));
            return Ok(Verdict::adjustment(
                effect,
                crate::identify::Condition::None,
                d.name(xi),
                d.name(yi),
                names,
            ));
        }

        let witness = Self::witness(&facts, effect)
            .into_iter()
            .map(|i| Self::to_dag(d, masks[i]))
            .collect();
        Ok(Verdict::not_identifiable(effect, Some(witness)))
    }

    /// Indices of a small set of DAGs whose admissible families have empty
    /// intersection: one DAG admitting no set, else the first such pair, else
    /// a greedy cover.
    fn witness(facts: &[PairFacts], effect: Effect) -> Vec<usize> {
        let fam: Vec<u32> = facts.iter().map(|f| Self::family(f, effect)).collect();
        if let Some(i) = fam.iter().position(|&f| f == 0) {
            return vec![i];
        }
        for i in 0..fam.len() {
            for j in i + 1..fam.len() {
                if fam[i] & fam[j] == 0 {
                    return vec![i, j];
                }
            }
        }
        let mut acc = u32::MAX;
        let mut picks = Vec::new();
        for (i, &f) in fam.iter().enumerate() {
            if acc & f != acc {
                acc &= f;
                picks.push(i);
                if acc == 0 {
                    break;
                }
            }
        }
        picks
    }

    /// Compatible DAGs in which `z` is not admissible for the given effect.
    pub fn violating_dags<S: AsRef<str>>(
        &self,
        d: &DifferenceGraph,
        x: &str,
        y: &str,
        z: &[S],
        shared_order: bool,
        effect: Effect,
    ) -> Result<Vec<CausalDag>> {
        let (xi, yi) = Self::endpoints(d, x, y)?;
        let zs = d.indices_of(z)?;
        for v in [xi, yi] {
            if zs.contains(&v) {
                return Err(Error::Overlap(d.name(v).to_string()));
            }
        }
        let zmask = zs.iter().fold(0u32, |m, &v| m | 1 << v);
        let e = Self::encode(d)?;
        let masks = Self::dag_masks(&e, shared_order);
        let facts = self.pair_facts(&e, &masks, xi, yi);
        Ok(masks
            .iter()
            .zip(&facts)
            .filter(|(_, f)| Self::family(f, effect) >> zmask & 1 == 0)
            .map(|(&m, _)| Self::to_dag(d, m))
            .collect())
    }

    /// True iff `z` is admissible in every compatible DAG.
    pub fn is_common_set<S: AsRef<str>>(
        &self,
        d: &DifferenceGraph,
        x: &str,
        y: &str,
        z: &[S],
        shared_order: bool,
        effect: Effect,
    ) -> Result<bool> {
        Ok(self.violating_dags(d, x, y, z, shared_order, effect)?.is_empty())
    }
}

pub fn enumerate_compatible_dags(d: &DifferenceGraph, shared_order: bool) -> Result<Vec<CausalDag>> {
    Oracle::global().enumerate_compatible_dags(d, shared_order)
}

pub fn compatible_pairs(d: &DifferenceGraph, shared_order: bool) -> Result<Vec<CompatiblePair>> {
    Oracle::global().compatible_pairs(d, shared_order)
}

pub fn oracle_total(d: &DifferenceGraph, x: &str, y: &str, shared_order: bool) -> Result<Verdict> {
    Oracle::global().oracle_total(d, x, y, shared_order)
}

pub fn oracle_direct(d: &DifferenceGraph, x: &str, y: &str, shared_order: bool) -> Result<Verdict> {
    Oracle::global().oracle_direct(d, x, y, shared_order)
}

/// Difference graph realized by two DAGs, taking any edge present in exactly
/// one of them as a mechanism change. Edges present in both are not changes,
/// so this is the smallest difference graph the pair is compatible with.
pub fn structural_difference(g1: &CausalDag, g2: &CausalDag) -> Result<DifferenceGraph> {
    let map = g2.vertex_mapping(g1)?;
    let e2: std::collections::BTreeSet<(usize, usize)> = g2.edges().map(|(t, h)| (map[t], map[h])).collect();
    let e1: std::collections::BTreeSet<(usize, usize)> = g1.edges().collect();
    let sym: Vec<_> = e1.symmetric_difference(&e2).copied().collect();
    Ok(DifferenceGraph::new(Digraph::new(g1.names().to_vec(), sym)?))
}

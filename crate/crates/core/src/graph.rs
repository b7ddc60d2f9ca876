//! Directed graphs over named variables.
//!
//! [`Digraph`] is the shared representation: vertices are indexed in order of
//! first declaration and every set-valued query returns indices (or names) in
//! that order. [`DifferenceGraph`] may contain cycles; [`CausalDag`] is checked
//! for acyclicity on construction and additionally answers d-separation
//! queries.
//!
//! Ancestors and descendants are reflexive: a vertex belongs to both of its own
//! sets. Parents and children are not.

use std::borrow::Borrow;
use std::collections::{BTreeSet, HashMap, VecDeque};
use std::fmt;
use std::ops::Deref;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Vertex indices, iterated in vertex order.
pub type VertexSet = BTreeSet<usize>;

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub struct VariableId(String);

impl VariableId {
    pub fn new(name: impl Into<String>) -> Result<Self> {
        let name = name.into();
        if name.is_empty() || name.chars().any(|c| c.is_whitespace() || c == ',' || c == '#') {
            return Err(Error::InvalidName(name));
        }
        Ok(VariableId(name))
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl TryFrom<String> for VariableId {
    type Error = Error;

    fn try_from(s: String) -> Result<Self> {
        VariableId::new(s)
    }
}

impl From<VariableId> for String {
    fn from(v: VariableId) -> String {
        v.0
    }
}

impl Borrow<str> for VariableId {
    fn borrow(&self) -> &str {
        &self.0
    }
}

impl AsRef<str> for VariableId {
    fn as_ref(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for VariableId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

/// Immutable directed graph without self-loops. Cycles are allowed.
#[derive(Clone, Debug)]
pub struct Digraph {
    names: Vec<VariableId>,
    index: HashMap<VariableId, usize>,
    parents: Vec<Vec<usize>>,
    children: Vec<Vec<usize>>,
}

impl PartialEq for Digraph {
    fn eq(&self, other: &Self) -> bool {
        self.names == other.names && self.children == other.children
    }
}

impl Eq for Digraph {}

impl Digraph {
    /// Builds a graph from vertex names and index pairs. Duplicate edges collapse.
    pub fn new(names: Vec<VariableId>, edges: impl IntoIterator<Item = (usize, usize)>) -> Result<Self> {
        let n = names.len();
        let mut index = HashMap::with_capacity(n);
        for (i, name) in names.iter().enumerate() {
            if index.insert(name.clone(), i).is_some() {
                return Err(Error::DuplicateVertex(name.to_string()));
            }
        }
        let mut parents = vec![Vec::new(); n];
        let mut children = vec![Vec::new(); n];
        for (tail, head) in edges {
            if tail >= n || head >= n {
                return Err(Error::UnknownVertex(format!("#{}", tail.max(head))));
            }
            if tail == head {
                return Err(Error::SelfLoop(names[tail].to_string()));
            }
            children[tail].push(head);
            parents[head].push(tail);
        }
        for list in parents.iter_mut().chain(children.iter_mut()) {
            list.sort_unstable();
            list.dedup();
        }
        Ok(Digraph {
            names,
            index,
            parents,
            children,
        })
    }

    /// Builds a graph from names. Vertices listed in `vertices` come first, then
    /// any vertex first mentioned by an edge, in order of appearance.
    pub fn from_names<S: AsRef<str>>(vertices: &[S], edges: &[(S, S)]) -> Result<Self> {
        let mut names: Vec<VariableId> = Vec::new();
        let mut seen: HashMap<String, usize> = HashMap::new();
        let mut intern = |name: &str, names: &mut Vec<VariableId>| -> Result<usize> {
            if let Some(&i) = seen.get(name) {
                return Ok(i);
            }
            let id = VariableId::new(name)?;
            seen.insert(name.to_string(), names.len());
            names.push(id);
            Ok(names.len() - 1)
        };
        for v in vertices {
            intern(v.as_ref(), &mut names)?;
        }
        let mut pairs = Vec::with_capacity(edges.len());
        for (t, h) in edges {
            let t = intern(t.as_ref(), &mut names)?;
            let h = intern(h.as_ref(), &mut names)?;
            pairs.push((t, h));
        }
        Digraph::new(names, pairs)
    }

    /// Parses the edge-list text format: `node <name>` declares a vertex,
    /// `<tail> -> <head>` declares an edge, `#` starts a comment.
    pub fn parse_edge_list(text: &str) -> Result<Self> {
        let mut vertices: Vec<String> = Vec::new();
        let mut edges: Vec<(String, String)> = Vec::new();
        for (i, raw) in text.lines().enumerate() {
            let line_no = i + 1;
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let err = |message: String| Error::Parse { line: line_no, message };
            if let Some((tail, head)) = line.split_once("->") {
                let tail = tail.trim();
                let head = head.trim();
                if head.contains("->") {
                    return Err(err("chained edges are not supported; use one edge per line".into()));
                }
                for name in [tail, head] {
                    VariableId::new(name).map_err(|e| err(e.to_string()))?;
                }
                if tail == head {
                    return Err(err(format!("self-loop on {tail:?}")));
                }
                edges.push((tail.to_string(), head.to_string()));
            } else if let Some(rest) = line.strip_prefix("node") {
                if !rest.starts_with(char::is_whitespace) {
                    return Err(err(format!("unrecognized line {line:?}")));
                }
                let name = rest.trim();
                VariableId::new(name).map_err(|e| err(e.to_string()))?;
                if !vertices.iter().any(|v| v == name) {
                    vertices.push(name.to_string());
                }
            } else {
                return Err(err(format!("unrecognized line {line:?}")));
            }
        }
        Digraph::from_names(&vertices, &edges)
    }

    /// Renders the graph in the edge-list format, declaring every vertex first.
    pub fn to_edge_list(&self) -> String {
        let mut out = String::new();
        for name in &self.names {
            out.push_str("node ");
            out.push_str(name.as_str());
            out.push('\n');
        }
        for (t, h) in self.edges() {
            out.push_str(&format!("{} -> {}\n", self.names[t], self.names[h]));
        }
        out
    }

    pub fn n(&self) -> usize {
        self.names.len()
    }

    pub fn names(&self) -> &[VariableId] {
        &self.names
    }

    pub fn name(&self, v: usize) -> &VariableId {
        &self.names[v]
    }

    pub fn index_of(&self, name: &str) -> Result<usize> {
        self.index
            .get(name)
            .copied()
            .ok_or_else(|| Error::UnknownVertex(name.to_string()))
    }

    pub fn parents(&self, v: usize) -> &[usize] {
        &self.parents[v]
    }

    pub fn children(&self, v: usize) -> &[usize] {
        &self.children[v]
    }

    pub fn has_edge(&self, tail: usize, head: usize) -> bool {
        self.children[tail].binary_search(&head).is_ok()
    }

    /// All edges, ordered by tail then head.
    pub fn edges(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.children
            .iter()
            .enumerate()
            .flat_map(|(t, hs)| hs.iter().map(move |&h| (t, h)))
    }

    pub fn edge_count(&self) -> usize {
        self.children.iter().map(Vec::len).sum()
    }

    fn closure(&self, start: usize, next: &[Vec<usize>]) -> VertexSet {
        let mut seen = VertexSet::new();
        seen.insert(start);
        let mut stack = vec![start];
        while let Some(v) = stack.pop() {
            for &u in &next[v] {
                if seen.insert(u) {
                    stack.push(u);
                }
            }
        }
        seen
    }

    /// Reflexive transitive closure of the parent relation.
    pub fn ancestor_set(&self, v: usize) -> VertexSet {
        self.closure(v, &self.parents)
    }

    /// Reflexive transitive closure of the child relation.
    pub fn descendant_set(&self, v: usize) -> VertexSet {
        self.closure(v, &self.children)
    }

    /// Union of the reflexive ancestor sets of every vertex in `vs`.
    pub fn ancestors_of_set(&self, vs: &VertexSet) -> VertexSet {
        let mut seen = vs.clone();
        let mut stack: Vec<usize> = vs.iter().copied().collect();
        while let Some(v) = stack.pop() {
            for &p in &self.parents[v] {
                if seen.insert(p) {
                    stack.push(p);
                }
            }
        }
        seen
    }

    pub fn ancestors(&self, v: &str) -> Result<Vec<VariableId>> {
        let i = self.index_of(v)?;
        Ok(self.names_of(&self.ancestor_set(i)))
    }

    pub fn descendants(&self, v: &str) -> Result<Vec<VariableId>> {
        let i = self.index_of(v)?;
        Ok(self.names_of(&self.descendant_set(i)))
    }

    pub fn names_of(&self, set: &VertexSet) -> Vec<VariableId> {
        set.iter().map(|&i| self.names[i].clone()).collect()
    }

    pub fn indices_of<S: AsRef<str>>(&self, names: &[S]) -> Result<VertexSet> {
        names.iter().map(|s| self.index_of(s.as_ref())).collect()
    }

    /// Kahn's algorithm; the smallest available index is emitted first.
    pub fn topological_order(&self) -> Option<Vec<usize>> {
        let n = self.n();
        let mut indegree: Vec<usize> = self.parents.iter().map(Vec::len).collect();
        let mut ready: BTreeSet<usize> = (0..n).filter(|&v| indegree[v] == 0).collect();
        let mut order = Vec::with_capacity(n);
        while let Some(v) = ready.pop_first() {
            order.push(v);
            for &c in &self.children[v] {
                indegree[c] -= 1;
                if indegree[c] == 0 {
                    ready.insert(c);
                }
            }
        }
        (order.len() == n).then_some(order)
    }

    pub fn is_acyclic(&self) -> bool {
        self.topological_order().is_some()
    }

    /// Same vertices, with the given edges removed.
    pub fn without_edges(&self, drop: impl Fn(usize, usize) -> bool) -> Digraph {
        let edges: Vec<_> = self.edges().filter(|&(t, h)| !drop(t, h)).collect();
        Digraph::new(self.names.clone(), edges).expect("subgraph of a valid graph")
    }

    /// Maps each vertex of `self` to its index in `other`, requiring equal vertex sets.
    pub fn vertex_mapping(&self, other: &Digraph) -> Result<Vec<usize>> {
        if self.n() != other.n() {
            return Err(Error::VertexSetMismatch);
        }
        self.names
            .iter()
            .map(|name| other.index.get(name).copied().ok_or(Error::VertexSetMismatch))
            .collect()
    }
}

impl fmt::Display for Digraph {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("{")?;
        for (k, (t, h)) in self.edges().enumerate() {
            if k > 0 {
                f.write_str(", ")?;
            }
            write!(f, "{} -> {}", self.names[t], self.names[h])?;
        }
        f.write_str("}")
    }
}

/// Graph of mechanism changes between two populations. An edge `X -> Y` marks
/// a change in the direct effect of `X` on `Y`; cycles are legal.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DifferenceGraph(Digraph);

impl DifferenceGraph {
    pub fn new(graph: Digraph) -> Self {
        DifferenceGraph(graph)
    }

    pub fn from_names<S: AsRef<str>>(vertices: &[S], edges: &[(S, S)]) -> Result<Self> {
        Digraph::from_names(vertices, edges).map(DifferenceGraph)
    }

    pub fn parse(text: &str) -> Result<Self> {
        Digraph::parse_edge_list(text).map(DifferenceGraph)
    }

    pub fn graph(&self) -> &Digraph {
        &self.0
    }
}

impl Deref for DifferenceGraph {
    type Target = Digraph;

    fn deref(&self) -> &Digraph {
        &self.0
    }
}

impl fmt::Display for DifferenceGraph {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.0.fmt(f)
    }
}

/// Acyclic causal graph of a single population.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CausalDag(Digraph);

impl CausalDag {
    pub fn new(graph: Digraph) -> Result<Self> {
        if !graph.is_acyclic() {
            return Err(Error::Cyclic);
        }
        Ok(CausalDag(graph))
    }

    pub fn from_names<S: AsRef<str>>(vertices: &[S], edges: &[(S, S)]) -> Result<Self> {
        CausalDag::new(Digraph::from_names(vertices, edges)?)
    }

    pub fn parse(text: &str) -> Result<Self> {
        CausalDag::new(Digraph::parse_edge_list(text)?)
    }

    pub fn graph(&self) -> &Digraph {
        &self.0
    }

    pub fn topological_order(&self) -> Vec<usize> {
        self.0.topological_order().expect("acyclic by construction")
    }

    /// Removes edges; any subgraph of a DAG is a DAG.
    pub fn without_edges(&self, drop: impl Fn(usize, usize) -> bool) -> CausalDag {
        CausalDag(self.0.without_edges(drop))
    }

    /// True iff `z` blocks every path between `x` and `y`.
    ///
    /// Reachability over (vertex, direction) states: a trail may pass a
    /// non-collider outside `z`, and a collider that is in `z` or has a
    /// descendant in `z`. Indices must be in range; see [`CausalDag::d_separated`]
    /// for the checked, name-based form.
    pub fn d_separated_idx(&self, x: usize, y: usize, z: &VertexSet) -> bool {
        let g = &self.0;
        // A collider is open iff it is an ancestor of some conditioned vertex.
        let open_colliders = g.ancestors_of_set(z);
        let n = g.n();
        // visited[v][0]: arrived from a child (moving up); [1]: from a parent (moving down)
        let mut visited = vec![[false; 2]; n];
        let mut queue = VecDeque::new();
        queue.push_back((x, 0usize));
        while let Some((v, dir)) = queue.pop_front() {
            if visited[v][dir] {
                continue;
            }
            visited[v][dir] = true;
            if v == y {
                return false;
            }
            let blocked = z.contains(&v);
            if dir == 0 {
                if !blocked {
                    for &p in g.parents(v) {
                        queue.push_back((p, 0));
                    }
                    for &c in g.children(v) {
                        queue.push_back((c, 1));
                    }
                }
            } else {
                if !blocked {
                    for &c in g.children(v) {
                        queue.push_back((c, 1));
                    }
                }
                if open_colliders.contains(&v) {
                    for &p in g.parents(v) {
                        queue.push_back((p, 0));
                    }
                }
            }
        }
        true
    }

    pub fn d_separated<S: AsRef<str>>(&self, x: &str, y: &str, z: &[S]) -> Result<bool> {
        let xi = self.index_of(x)?;
        let yi = self.index_of(y)?;
        if xi == yi {
            return Err(Error::SameVertex(x.to_string()));
        }
        let zs = self.indices_of(z)?;
        for v in [xi, yi] {
            if zs.contains(&v) {
                return Err(Error::Overlap(self.name(v).to_string()));
            }
        }
        Ok(self.d_separated_idx(xi, yi, &zs))
    }
}

impl Deref for CausalDag {
    type Target = Digraph;

    fn deref(&self) -> &Digraph {
        &self.0
    }
}

impl fmt::Display for CausalDag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.0.fmt(f)
    }
}

/// True iff one ordering is topological for both DAGs, i.e. their edge union is acyclic.
pub fn shares_topological_order(g1: &CausalDag, g2: &CausalDag) -> Result<bool> {
    let map = g2.vertex_mapping(g1)?;
    let union: Vec<(usize, usize)> = g1.edges().chain(g2.edges().map(|(t, h)| (map[t], map[h]))).collect();
    Ok(Digraph::new(g1.names().to_vec(), union)?.is_acyclic())
}

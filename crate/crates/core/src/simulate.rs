//! Seeded linear structural causal models realizing a difference graph.

use std::collections::{BTreeMap, BTreeSet};

use rand::seq::IndexedRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::Serialize;
use serde_json::{json, Value};

use crate::error::{Error, Result};
use crate::estimate::{DataKind, Dataset};
use crate::graph::{CausalDag, DifferenceGraph, Digraph};
use crate::oracle::{Oracle, VERTEX_CAP};

/// Smallest magnitude of a drawn coefficient, and the smallest gap between
/// the two coefficients of a changed edge present in both models.
pub const COEFFICIENT_FLOOR: f64 = 0.2;
pub const COEFFICIENT_CEILING: f64 = 1.0;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum NoiseFamily {
    #[default]
    Gaussian,
    /// Uniform on [-√3, √3], so unit variance before scaling.
    Uniform,
}

impl NoiseFamily {
    fn draw(self, rng: &mut ChaCha8Rng) -> f64 {
        match self {
            NoiseFamily::Gaussian => rng.sample(StandardNormal),
            NoiseFamily::Uniform => {
                let h = 3f64.sqrt();
                rng.random_range(-h..=h)
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct LinearScm {
    dag: CausalDag,
    coefficients: BTreeMap<(usize, usize), f64>,
    noise_scales: Vec<f64>,
    noise: NoiseFamily,
}

impl LinearScm {
    pub fn new(
        dag: CausalDag,
        coefficients: BTreeMap<(usize, usize), f64>,
        noise_scales: Vec<f64>,
        noise: NoiseFamily,
    ) -> Result<Self> {
        let edges: BTreeSet<_> = dag.edges().collect();
        let keys: BTreeSet<_> = coefficients.keys().copied().collect();
        if edges != keys {
            return Err(Error::Data("coefficient keys must equal the DAG's edges".into()));
        }
        if let Some(((t, h), _)) = coefficients.iter().find(|(_, c)| **c == 0.0 || !c.is_finite()) {
            return Err(Error::Data(format!(
                "coefficient on {} -> {} must be finite and nonzero",
                dag.name(*t),
                dag.name(*h)
            )));
        }
        if noise_scales.len() != dag.n() || noise_scales.iter().any(|s| !(*s > 0.0 && s.is_finite())) {
            return Err(Error::Data(
                "one strictly positive noise scale per vertex is required".into(),
            ));
        }
        Ok(LinearScm {
            dag,
            coefficients,
            noise_scales,
            noise,
        })
    }

    /// Unit noise scales and Gaussian noise; coefficients given by name.
    pub fn with_coefficients<S: AsRef<str>>(dag: CausalDag, coefficients: &[(S, S, f64)]) -> Result<Self> {
        let mut map = BTreeMap::new();
        for (t, h, c) in coefficients {
            map.insert((dag.index_of(t.as_ref())?, dag.index_of(h.as_ref())?), *c);
        }
        let n = dag.n();
        LinearScm::new(dag, map, vec![1.0; n], NoiseFamily::Gaussian)
    }

    pub fn dag(&self) -> &CausalDag {
        &self.dag
    }

    pub fn coefficients(&self) -> &BTreeMap<(usize, usize), f64> {
        &self.coefficients
    }

    pub fn noise_scales(&self) -> &[f64] {
        &self.noise_scales
    }

    pub fn noise(&self) -> NoiseFamily {
        self.noise
    }

    pub fn set_noise(&mut self, noise: NoiseFamily) {
        self.noise = noise;
    }

    /// Coefficient on `tail -> head`, zero when the edge is absent.
    pub fn coefficient(&self, tail: usize, head: usize) -> f64 {
        self.coefficients.get(&(tail, head)).copied().unwrap_or(0.0)
    }

    pub fn ground_truth_direct(&self, x: &str, y: &str) -> Result<f64> {
        Ok(self.coefficient(self.dag.index_of(x)?, self.dag.index_of(y)?))
    }

    /// Sum over directed paths from `x` to `y` of coefficient products.
    pub fn ground_truth_total_linear(&self, x: &str, y: &str) -> Result<f64> {
        let xi = self.dag.index_of(x)?;
        let yi = self.dag.index_of(y)?;
        if xi == yi {
            return Ok(1.0);
        }
        // effect[v] = total effect of v on y, filled in reverse topological order
        let mut effect = vec![0.0; self.dag.n()];
        effect[yi] = 1.0;
        for &v in self.dag.topological_order().iter().rev() {
            if v == yi {
                continue;
            }
            effect[v] = self
                .dag
                .children(v)
                .iter()
                .map(|&c| self.coefficient(v, c) * effect[c])
                .sum();
        }
        Ok(effect[xi])
    }

    /// Ancestral sampling; deterministic given the seed.
    pub fn sample_dataset(&self, n: usize, seed: u64) -> Dataset {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        self.sample_with(n, &mut rng)
    }

    fn sample_with(&self, n: usize, rng: &mut ChaCha8Rng) -> Dataset {
        let order = self.dag.topological_order();
        let mut columns = vec![Vec::with_capacity(n); self.dag.n()];
        let mut row = vec![0.0; self.dag.n()];
        for _ in 0..n {
            for &v in &order {
                let mut value = self.noise_scales[v] * self.noise.draw(rng);
                for &p in self.dag.parents(v) {
                    value += self.coefficients[&(p, v)] * row[p];
                }
                row[v] = value;
            }
            for (col, &value) in columns.iter_mut().zip(&row) {
                col.push(value);
            }
        }
        Dataset::new(self.dag.names().to_vec(), columns, DataKind::Continuous).expect("simulated columns are valid")
    }

    pub fn to_json(&self) -> Value {
        let coefficients: Vec<Value> = self
            .coefficients
            .iter()
            .map(|(&(t, h), &c)| json!({"from": self.dag.name(t), "to": self.dag.name(h), "coefficient": c}))
            .collect();
        let scales: BTreeMap<String, f64> = self
            .dag
            .names()
            .iter()
            .zip(&self.noise_scales)
            .map(|(n, s)| (n.to_string(), *s))
            .collect();
        json!({
            "dag": self.dag.to_edge_list(),
            "coefficients": coefficients,
            "noise_scales": scales,
            "noise": self.noise,
        })
    }
}

/// Two linear models whose mechanisms differ exactly on the edges of
/// `difference_graph`.
#[derive(Clone, Debug, PartialEq)]
pub struct ScmPair {
    pub scm1: LinearScm,
    pub scm2: LinearScm,
    pub difference_graph: DifferenceGraph,
}

impl ScmPair {
    /// Edges whose coefficient differs between the two models, an absent
    /// edge counting as zero.
    pub fn recompute_difference_graph(&self) -> DifferenceGraph {
        let keys: BTreeSet<(usize, usize)> = self
            .scm1
            .coefficients
            .keys()
            .chain(self.scm2.coefficients.keys())
            .copied()
            .collect();
        let changed = keys
            .into_iter()
            .filter(|&(t, h)| self.scm1.coefficient(t, h) != self.scm2.coefficient(t, h));
        DifferenceGraph::new(Digraph::new(self.scm1.dag.names().to_vec(), changed).expect("edges of a DAG are valid"))
    }

    /// One dataset per population, from independent streams of one seed.
    pub fn sample_datasets(&self, n: usize, seed: u64) -> (Dataset, Dataset) {
        let mut rng1 = ChaCha8Rng::seed_from_u64(seed);
        rng1.set_stream(1);
        let mut rng2 = ChaCha8Rng::seed_from_u64(seed);
        rng2.set_stream(2);
        (self.scm1.sample_with(n, &mut rng1), self.scm2.sample_with(n, &mut rng2))
    }

    pub fn set_noise(&mut self, noise: NoiseFamily) {
        self.scm1.set_noise(noise);
        self.scm2.set_noise(noise);
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum PairSampling {
    /// Exhaustive up to the vertex cap, randomized above it.
    #[default]
    Auto,
    /// Uniform over all compatible pairs; errors above the vertex cap.
    Exhaustive,
    Randomized,
}

pub fn sample_compatible_pair(d: &DifferenceGraph, shared_order: bool, seed: u64) -> Result<ScmPair> {
    sample_compatible_pair_with(d, shared_order, seed, PairSampling::Auto)
}

pub fn sample_compatible_pair_with(
    d: &DifferenceGraph,
    shared_order: bool,
    seed: u64,
    mode: PairSampling,
) -> Result<ScmPair> {
    if shared_order && !d.is_acyclic() {
        return Err(Error::CyclicUnderSharedOrder);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let exhaustive = match mode {
        PairSampling::Auto => d.n() <= VERTEX_CAP,
        PairSampling::Exhaustive => {
            if d.n() > VERTEX_CAP {
                return Err(Error::TooManyVertices {
                    n: d.n(),
                    cap: VERTEX_CAP,
                });
            }
            true
        }
        PairSampling::Randomized => false,
    };
    let (g1, g2) = if exhaustive {
        let pairs = Oracle::global().compatible_pairs(d, shared_order)?;
        let pair = pairs
            .choose(&mut rng)
            .expect("every difference graph has a compatible pair");
        if rng.random_bool(0.5) {
            (pair.g1.clone(), pair.g2.clone())
        } else {
            (pair.g2.clone(), pair.g1.clone())
        }
    } else {
        random_structures(d, shared_order, &mut rng)
    };
    let (c1, c2) = draw_coefficients(d, &g1, &g2, &mut rng);
    let n = d.n();
    let scm1 = LinearScm::new(g1, c1, vec![1.0; n], NoiseFamily::Gaussian)?;
    let scm2 = LinearScm::new(g2, c2, vec![1.0; n], NoiseFamily::Gaussian)?;
    Ok(ScmPair {
        scm1,
        scm2,
        difference_graph: d.clone(),
    })
}

/// Shared order: a random linear extension of `d`, each changed edge going
/// to one model or both, plus occasional unchanged forward edges in both.
/// General: a random permutation, forward changed edges to the first model
/// and backward ones to the second.
fn random_structures(d: &DifferenceGraph, shared_order: bool, rng: &mut ChaCha8Rng) -> (CausalDag, CausalDag) {
    let n = d.n();
    let mut e1 = Vec::new();
    let mut e2 = Vec::new();
    if shared_order {
        let order = random_linear_extension(d, rng);
        let mut pos = vec![0; n];
        for (i, &v) in order.iter().enumerate() {
            pos[v] = i;
        }
        for (t, h) in d.edges() {
            match rng.random_range(0..3) {
                0 => e1.push((t, h)),
                1 => e2.push((t, h)),
                _ => {
                    e1.push((t, h));
                    e2.push((t, h));
                }
            }
        }
        for t in 0..n {
            for h in 0..n {
                if pos[t] < pos[h] && !d.has_edge(t, h) && rng.random_bool(0.2) {
                    e1.push((t, h));
                    e2.push((t, h));
                }
            }
        }
    } else {
        let mut pos: Vec<usize> = (0..n).collect();
        rand::seq::SliceRandom::shuffle(pos.as_mut_slice(), rng);
        for (t, h) in d.edges() {
            if pos[t] < pos[h] {
                e1.push((t, h));
            } else {
                e2.push((t, h));
            }
        }
    }
    let build = |edges: Vec<(usize, usize)>| {
        CausalDag::new(Digraph::new(d.names().to_vec(), edges).expect("valid edges"))
            .expect("forward edges are acyclic")
    };
    (build(e1), build(e2))
}

fn random_linear_extension(d: &DifferenceGraph, rng: &mut ChaCha8Rng) -> Vec<usize> {
    let n = d.n();
    let mut indegree: Vec<usize> = (0..n).map(|v| d.parents(v).len()).collect();
    let mut ready: Vec<usize> = (0..n).filter(|&v| indegree[v] == 0).collect();
    let mut order = Vec::with_capacity(n);
    while !ready.is_empty() {
        let i = rng.random_range(0..ready.len());
        let v = ready.swap_remove(i);
        order.push(v);
        for &c in d.children(v) {
            indegree[c] -= 1;
            if indegree[c] == 0 {
                ready.push(c);
            }
        }
    }
    order
}

fn draw_magnitude(rng: &mut ChaCha8Rng) -> f64 {
    let m = rng.random_range(COEFFICIENT_FLOOR..=COEFFICIENT_CEILING);
    if rng.random_bool(0.5) {
        m
    } else {
        -m
    }
}

type Coefficients = BTreeMap<(usize, usize), f64>;

fn draw_coefficients(
    d: &DifferenceGraph,
    g1: &CausalDag,
    g2: &CausalDag,
    rng: &mut ChaCha8Rng,
) -> (Coefficients, Coefficients) {
    let edges: BTreeSet<(usize, usize)> = g1.edges().chain(g2.edges()).collect();
    let mut c1 = BTreeMap::new();
    let mut c2 = BTreeMap::new();
    for (t, h) in edges {
        let in1 = g1.has_edge(t, h);
        let in2 = g2.has_edge(t, h);
        if !d.has_edge(t, h) {
            let c = draw_magnitude(rng);
            c1.insert((t, h), c);
            c2.insert((t, h), c);
            continue;
        }
        if in1 {
            c1.insert((t, h), draw_magnitude(rng));
        }
        if in2 {
            let mut c = draw_magnitude(rng);
            if let Some(&a) = c1.get(&(t, h)) {
                while (a - c).abs() < COEFFICIENT_FLOOR {
                    c = draw_magnitude(rng);
                }
            }
            c2.insert((t, h), c);
        }
    }
    (c1, c2)
}

/// Reproducibility record written next to simulated datasets.
pub fn manifest(pair: &ScmPair, shared_order: bool, seed: u64, n: usize) -> Value {
    json!({
        "seed": seed,
        "n": n,
        "shared_order": shared_order,
        "difference_graph": pair.difference_graph.to_edge_list(),
        "population1": pair.scm1.to_json(),
        "population2": pair.scm2.to_json(),
    })
}

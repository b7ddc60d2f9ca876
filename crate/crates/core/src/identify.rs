//! Graphical identifiability of total and direct effects from a difference graph.
//!
//! The total effect `P(y|do(x))` is checked for a common back-door set and the
//! direct effect (a path coefficient in a linear model) for a common single-door
//! set, i.e. one set that is admissible in every causal DAG compatible with the
//! difference graph. "Consistent with the difference graph" is read as
//! "generated by some compatible SCM pair"; see [`crate::oracle`] for the
//! structural form of that compatibility.
//!
//! Two families of conditions are implemented. With a shared topological
//! ordering (conditions A.* and C.*) the difference graph must be acyclic. In
//! the general case (B.* and D.*) it may be cyclic, and the conditions add a
//! requirement that no cycle passes through the exposure (total) or the outcome
//! (direct).

use std::fmt;

use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::error::{Error, Result};
use crate::graph::{CausalDag, DifferenceGraph, VariableId, VertexSet};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Effect {
    Total,
    Direct,
}

impl fmt::Display for Effect {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Effect::Total => "total",
            Effect::Direct => "direct",
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum VerdictKind {
    NullEffect,
    AdjustmentIdentifiable,
    NotIdentifiable,
}

impl fmt::Display for VerdictKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            VerdictKind::NullEffect => "null_effect",
            VerdictKind::AdjustmentIdentifiable => "adjustment_identifiable",
            VerdictKind::NotIdentifiable => "not_identifiable",
        })
    }
}

/// Which clause of the identification conditions produced a verdict.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Condition {
    #[serde(rename = "A.1")]
    A1,
    #[serde(rename = "A.2")]
    A2,
    #[serde(rename = "B.1")]
    B1,
    #[serde(rename = "B.2")]
    B2,
    #[serde(rename = "C.1")]
    C1,
    #[serde(rename = "C.2")]
    C2,
    #[serde(rename = "D.1")]
    D1,
    #[serde(rename = "D.2")]
    D2,
    #[serde(rename = "none")]
    None,
}

impl Condition {
    pub fn label(self) -> &'static str {
        match self {
            Condition::A1 => "A.1",
            Condition::A2 => "A.2",
            Condition::B1 => "B.1",
            Condition::B2 => "B.2",
            Condition::C1 => "C.1",
            Condition::C2 => "C.2",
            Condition::D1 => "D.1",
            Condition::D2 => "D.2",
            Condition::None => "none",
        }
    }
}

impl fmt::Display for Condition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

/// A validated exposure/outcome pair on a difference graph.
#[derive(Clone, Debug)]
pub struct EffectQuery {
    graph: DifferenceGraph,
    exposure: usize,
    outcome: usize,
    shared_order: bool,
}

impl EffectQuery {
    pub fn new(graph: DifferenceGraph, exposure: &str, outcome: &str, shared_order: bool) -> Result<Self> {
        let x = graph.index_of(exposure)?;
        let y = graph.index_of(outcome)?;
        if x == y {
            return Err(Error::SameVertex(exposure.to_string()));
        }
        if shared_order && !graph.is_acyclic() {
            return Err(Error::CyclicUnderSharedOrder);
        }
        Ok(EffectQuery {
            graph,
            exposure: x,
            outcome: y,
            shared_order,
        })
    }

    pub fn graph(&self) -> &DifferenceGraph {
        &self.graph
    }

    pub fn exposure(&self) -> usize {
        self.exposure
    }

    pub fn outcome(&self) -> usize {
        self.outcome
    }

    pub fn exposure_name(&self) -> &VariableId {
        self.graph.name(self.exposure)
    }

    pub fn outcome_name(&self) -> &VariableId {
        self.graph.name(self.outcome)
    }

    pub fn shared_order(&self) -> bool {
        self.shared_order
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Verdict {
    pub effect: Effect,
    pub kind: VerdictKind,
    pub condition: Condition,
    /// Present iff `kind` is `AdjustmentIdentifiable`; in vertex order.
    pub adjustment_set: Option<Vec<VariableId>>,
    pub formula: String,
    /// Compatible DAGs with no common admissible set; only the oracle fills this.
    pub witness: Option<Vec<CausalDag>>,
}

impl Verdict {
    pub fn null_effect(effect: Effect, condition: Condition) -> Self {
        let formula = match effect {
            Effect::Total => "P(y)".to_string(),
            Effect::Direct => "α = 0".to_string(),
        };
        Verdict {
            effect,
            kind: VerdictKind::NullEffect,
            condition,
            adjustment_set: None,
            formula,
            witness: None,
        }
    }

    pub fn adjustment(
        effect: Effect,
        condition: Condition,
        exposure: &VariableId,
        outcome: &VariableId,
        set: Vec<VariableId>,
    ) -> Self {
        let formula = match effect {
            Effect::Total => total_formula(exposure, outcome, &set),
            Effect::Direct => direct_formula(exposure, outcome, &set),
        };
        Verdict {
            effect,
            kind: VerdictKind::AdjustmentIdentifiable,
            condition,
            adjustment_set: Some(set),
            formula,
            witness: None,
        }
    }

    pub fn not_identifiable(effect: Effect, witness: Option<Vec<CausalDag>>) -> Self {
        Verdict {
            effect,
            kind: VerdictKind::NotIdentifiable,
            condition: Condition::None,
            adjustment_set: None,
            formula: "not identifiable".to_string(),
            witness,
        }
    }

    pub fn is_identifiable(&self) -> bool {
        self.kind != VerdictKind::NotIdentifiable
    }

    /// JSON document: `{kind, condition, adjustment_set, formula}`, plus
    /// `witness` (edge-list strings) when a counterexample is attached.
    pub fn to_json(&self) -> Value {
        let mut doc = json!({
            "kind": self.kind,
            "condition": self.condition,
            "adjustment_set": self.adjustment_set,
            "formula": self.formula,
        });
        if let Some(witness) = &self.witness {
            doc["witness"] = Value::from(witness.iter().map(|g| g.to_edge_list()).collect::<Vec<_>>());
        }
        doc
    }

    /// One-line human summary naming the condition that fired.
    pub fn describe(&self) -> String {
        let criterion = match self.effect {
            Effect::Total => "common back-door",
            Effect::Direct => "common single-door",
        };
        match self.kind {
            VerdictKind::NullEffect => format!(
                "{} effect is null ({}, condition {}): {}",
                self.effect, criterion, self.condition, self.formula
            ),
            VerdictKind::AdjustmentIdentifiable => {
                let set = self.adjustment_set.as_deref().unwrap_or_default();
                let via = if self.condition == Condition::None {
                    "by exhaustive search".to_string()
                } else {
                    format!("condition {}", self.condition)
                };
                format!(
                    "{} effect identifiable by {} ({}); adjust for {}: {}",
                    self.effect,
                    criterion,
                    via,
                    brace_list(set),
                    self.formula
                )
            }
            VerdictKind::NotIdentifiable => {
                format!("{} effect not identifiable by a {}", self.effect, criterion)
            }
        }
    }
}

pub(crate) fn brace_list(set: &[VariableId]) -> String {
    let names: Vec<&str> = set.iter().map(VariableId::as_str).collect();
    format!("{{{}}}", names.join(", "))
}

fn lower_join(set: &[VariableId]) -> String {
    set.iter()
        .map(|v| v.as_str().to_lowercase())
        .collect::<Vec<_>>()
        .join(",")
}

fn total_formula(x: &VariableId, y: &VariableId, set: &[VariableId]) -> String {
    let (x, y) = (x.as_str().to_lowercase(), y.as_str().to_lowercase());
    if set.is_empty() {
        return format!("P({y}|{x})");
    }
    let w = lower_join(set);
    format!("∑_{{{w}}} P({y}|{x},{w}) P({w})")
}

fn direct_formula(x: &VariableId, y: &VariableId, set: &[VariableId]) -> String {
    if set.is_empty() {
        return format!("r_{{{y}{x}}}");
    }
    let w: Vec<&str> = set.iter().map(VariableId::as_str).collect();
    format!("r_{{{y}{x}.{}}}", w.join(","))
}

struct Relations {
    anc_x: VertexSet,
    anc_y: VertexSet,
    desc_x: VertexSet,
    desc_y: VertexSet,
}

impl Relations {
    fn of(q: &EffectQuery) -> Self {
        let g = q.graph();
        Relations {
            anc_x: g.ancestor_set(q.exposure),
            anc_y: g.ancestor_set(q.outcome),
            desc_x: g.descendant_set(q.exposure),
            desc_y: g.descendant_set(q.outcome),
        }
    }
}

/// Y is an ancestor of X.
fn outcome_precedes(q: &EffectQuery, r: &Relations) -> bool {
    r.anc_x.contains(&q.outcome)
}

/// X is an ancestor of Y and every other vertex is an ancestor or descendant of `pivot`.
fn pivot_comparable(q: &EffectQuery, r: &Relations, pivot: usize) -> bool {
    let (anc, desc) = if pivot == q.exposure {
        (&r.anc_x, &r.desc_x)
    } else {
        (&r.anc_y, &r.desc_y)
    };
    r.anc_y.contains(&q.exposure)
        && (0..q.graph().n())
            .filter(|&w| w != q.exposure && w != q.outcome)
            .all(|w| desc.contains(&w) || anc.contains(&w))
}

fn acyclic_through(anc: &VertexSet, desc: &VertexSet, v: usize) -> bool {
    anc.intersection(desc).all(|&w| w == v)
}

fn total_adjustment(q: &EffectQuery, r: &Relations, condition: Condition) -> Verdict {
    let mut set = r.anc_x.clone();
    set.remove(&q.exposure);
    let names = q.graph().names_of(&set);
    Verdict::adjustment(Effect::Total, condition, q.exposure_name(), q.outcome_name(), names)
}

fn direct_adjustment(q: &EffectQuery, r: &Relations, condition: Condition) -> Verdict {
    let mut set = r.anc_y.clone();
    set.remove(&q.exposure);
    set.remove(&q.outcome);
    let names = q.graph().names_of(&set);
    Verdict::adjustment(Effect::Direct, condition, q.exposure_name(), q.outcome_name(), names)
}

fn require_acyclic(q: &EffectQuery) -> Result<()> {
    if q.graph().is_acyclic() {
        Ok(())
    } else {
        Err(Error::CyclicUnderSharedOrder)
    }
}

/// Total effect when both causal DAGs share a topological ordering.
pub fn identify_total_shared_order(q: &EffectQuery) -> Result<Verdict> {
    require_acyclic(q)?;
    let r = Relations::of(q);
    Ok(if outcome_precedes(q, &r) {
        Verdict::null_effect(Effect::Total, Condition::A1)
    } else if pivot_comparable(q, &r, q.exposure) {
        total_adjustment(q, &r, Condition::A2)
    } else {
        Verdict::not_identifiable(Effect::Total, None)
    })
}

/// Total effect without the shared-ordering assumption; the graph may be cyclic.
pub fn identify_total_general(q: &EffectQuery) -> Verdict {
    let r = Relations::of(q);
    if outcome_precedes(q, &r) && !r.anc_y.contains(&q.exposure) {
        Verdict::null_effect(Effect::Total, Condition::B1)
    } else if pivot_comparable(q, &r, q.exposure) && acyclic_through(&r.anc_x, &r.desc_x, q.exposure) {
        total_adjustment(q, &r, Condition::B2)
    } else {
        Verdict::not_identifiable(Effect::Total, None)
    }
}

/// Direct effect (linear models) when both causal DAGs share a topological ordering.
pub fn identify_direct_shared_order(q: &EffectQuery) -> Result<Verdict> {
    require_acyclic(q)?;
    let r = Relations::of(q);
    Ok(if outcome_precedes(q, &r) {
        Verdict::null_effect(Effect::Direct, Condition::C1)
    } else if pivot_comparable(q, &r, q.outcome) {
        direct_adjustment(q, &r, Condition::C2)
    } else {
        Verdict::not_identifiable(Effect::Direct, None)
    })
}

/// Direct effect (linear models) without the shared-ordering assumption.
pub fn identify_direct_general(q: &EffectQuery) -> Verdict {
    let r = Relations::of(q);
    if outcome_precedes(q, &r) && !r.anc_y.contains(&q.exposure) {
        Verdict::null_effect(Effect::Direct, Condition::D1)
    } else if pivot_comparable(q, &r, q.outcome) && acyclic_through(&r.anc_y, &r.desc_y, q.outcome) {
        direct_adjustment(q, &r, Condition::D2)
    } else {
        Verdict::not_identifiable(Effect::Direct, None)
    }
}

/// Picks the shared-order or general checker from the query's flag.
pub fn identify(q: &EffectQuery, effect: Effect) -> Result<Verdict> {
    match (effect, q.shared_order()) {
        (Effect::Total, true) => identify_total_shared_order(q),
        (Effect::Total, false) => Ok(identify_total_general(q)),
        (Effect::Direct, true) => identify_direct_shared_order(q),
        (Effect::Direct, false) => Ok(identify_direct_general(q)),
    }
}

//! The six reference difference graphs, with exposure `X` and outcome `Y`.

use serde_json::{json, Value};

use crate::estimate::align;
use crate::graph::DifferenceGraph;
use crate::identify::{brace_list, identify, Effect, EffectQuery, Verdict};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Figure {
    pub label: &'static str,
    /// Whether the compatible DAG pairs share a topological ordering.
    pub shared_order: bool,
    pub edges: &'static [(&'static str, &'static str)],
}

impl Figure {
    pub fn graph(&self) -> DifferenceGraph {
        let vertices: &[&str] = if self.edges.iter().any(|(t, h)| t.starts_with('W') || h.starts_with('W')) {
            &["X", "Y", "W1", "W2"]
        } else {
            &["X", "Y"]
        };
        DifferenceGraph::from_names(vertices, self.edges).expect("static figure graph is valid")
    }
}

pub const FIGURES: [Figure; 6] = [
    Figure {
        label: "1c",
        shared_order: true,
        edges: &[],
    },
    Figure {
        label: "1h",
        shared_order: true,
        edges: &[("W1", "X"), ("X", "W2"), ("X", "Y")],
    },
    Figure {
        label: "1m",
        shared_order: true,
        edges: &[("W1", "X"), ("W2", "Y"), ("X", "Y")],
    },
    Figure {
        label: "2c",
        shared_order: false,
        edges: &[("X", "Y"), ("Y", "X")],
    },
    Figure {
        label: "2f",
        shared_order: false,
        edges: &[("W1", "X"), ("X", "W2"), ("W2", "Y"), ("Y", "W2"), ("X", "Y")],
    },
    Figure {
        label: "2k",
        shared_order: false,
        edges: &[("W1", "X"), ("X", "W2"), ("W2", "X"), ("W2", "Y"), ("X", "Y")],
    },
];

pub fn figure(label: &str) -> Option<Figure> {
    FIGURES.iter().copied().find(|f| f.label == label)
}

#[derive(Clone, Debug, PartialEq)]
pub struct FigureVerdict {
    pub figure: Figure,
    pub verdict: Verdict,
}

/// Graphical-condition verdicts for every figure, total before direct.
pub fn figure_verdicts() -> Vec<FigureVerdict> {
    let mut out = Vec::with_capacity(FIGURES.len() * 2);
    for figure in FIGURES {
        let q = EffectQuery::new(figure.graph(), "X", "Y", figure.shared_order).expect("figure query is valid");
        for effect in [Effect::Total, Effect::Direct] {
            let verdict = identify(&q, effect).expect("figure graphs satisfy their mode");
            out.push(FigureVerdict { figure, verdict });
        }
    }
    out
}

pub fn verdict_table(rows: &[FigureVerdict]) -> String {
    let mut cells = vec![vec![
        "figure".to_string(),
        "mode".to_string(),
        "effect".to_string(),
        "verdict".to_string(),
        "condition".to_string(),
        "adjustment set".to_string(),
    ]];
    for r in rows {
        cells.push(vec![
            r.figure.label.to_string(),
            mode_label(r.figure.shared_order).to_string(),
            r.verdict.effect.to_string(),
            r.verdict.kind.to_string(),
            r.verdict.condition.to_string(),
            r.verdict.adjustment_set.as_deref().map_or("-".to_string(), brace_list),
        ]);
    }
    align(&cells)
}

pub fn verdict_table_json(rows: &[FigureVerdict]) -> Value {
    Value::from(
        rows.iter()
            .map(|r| {
                let mut doc = r.verdict.to_json();
                doc["figure"] = json!(r.figure.label);
                doc["shared_order"] = json!(r.figure.shared_order);
                doc["effect"] = json!(r.verdict.effect);
                doc
            })
            .collect::<Vec<_>>(),
    )
}

fn mode_label(shared_order: bool) -> &'static str {
    if shared_order {
        "shared-order"
    } else {
        "general"
    }
}

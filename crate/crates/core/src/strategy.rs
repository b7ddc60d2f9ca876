//! Named identification strategies.
//!
//! Each way of deciding identifiability sits behind [`Identifier`] and is
//! registered under a name; front ends look strategies up at runtime.

use std::collections::BTreeMap;

use crate::error::{Error, Result};
use crate::identify::{self, Effect, EffectQuery, Verdict};
use crate::oracle::Oracle;

pub trait Identifier: Send + Sync {
    fn name(&self) -> &'static str;

    fn effect(&self) -> Effect;

    fn identify(&self, query: &EffectQuery) -> Result<Verdict>;
}

/// Closed-form graphical conditions; the query's shared-order flag selects
/// between the acyclic and the general conditions.
#[derive(Debug, Clone, Copy)]
pub struct GraphicalConditions {
    effect: Effect,
}

impl GraphicalConditions {
    pub fn new(effect: Effect) -> Self {
        GraphicalConditions { effect }
    }
}

impl Identifier for GraphicalConditions {
    fn name(&self) -> &'static str {
        match self.effect {
            Effect::Total => "theorem-total",
            Effect::Direct => "theorem-direct",
        }
    }

    fn effect(&self) -> Effect {
        self.effect
    }

    fn identify(&self, query: &EffectQuery) -> Result<Verdict> {
        identify::identify(query, self.effect)
    }
}

/// Exhaustive enumeration of compatible DAGs; attaches a witness on failure.
#[derive(Debug, Clone, Copy)]
pub struct ExhaustiveSearch {
    effect: Effect,
    oracle: &'static Oracle,
}

impl ExhaustiveSearch {
    pub fn new(effect: Effect) -> Self {
        ExhaustiveSearch {
            effect,
            oracle: Oracle::global(),
        }
    }
}

impl Identifier for ExhaustiveSearch {
    fn name(&self) -> &'static str {
        match self.effect {
            Effect::Total => "oracle-total",
            Effect::Direct => "oracle-direct",
        }
    }

    fn effect(&self) -> Effect {
        self.effect
    }

    fn identify(&self, query: &EffectQuery) -> Result<Verdict> {
        self.oracle.decide(
            query.graph(),
            query.exposure_name().as_str(),
            query.outcome_name().as_str(),
            query.shared_order(),
            self.effect,
        )
    }
}

#[derive(Default)]
pub struct Registry {
    entries: BTreeMap<&'static str, Box<dyn Identifier>>,
}

impl Registry {
    pub fn new() -> Self {
        Registry::default()
    }

    /// `theorem-total`, `theorem-direct`, `oracle-total`, `oracle-direct`.
    pub fn with_defaults() -> Self {
        let mut r = Registry::new();
        for effect in [Effect::Total, Effect::Direct] {
            r.register(Box::new(GraphicalConditions::new(effect)));
            r.register(Box::new(ExhaustiveSearch::new(effect)));
        }
        r
    }

    /// Registers a strategy under its own name, replacing any previous entry.
    pub fn register(&mut self, identifier: Box<dyn Identifier>) {
        self.entries.insert(identifier.name(), identifier);
    }

    pub fn get(&self, name: &str) -> Result<&dyn Identifier> {
        self.entries
            .get(name)
            .map(|b| b.as_ref())
            .ok_or_else(|| Error::UnknownStrategy(name.to_string()))
    }

    pub fn names(&self) -> impl Iterator<Item = &'static str> + '_ {
        self.entries.keys().copied()
    }
}

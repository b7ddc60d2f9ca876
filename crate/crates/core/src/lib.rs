//! Causal effects and causal changes between two populations whose
//! mechanisms differ on the edges of a difference graph.
//!
//! [`identify`] decides whether the total or direct causal change of an
//! exposure on an outcome is identifiable from the difference graph alone;
//! [`oracle`] checks the same question by enumerating every compatible pair
//! of causal DAGs; [`estimate`] turns an identifying verdict into numbers;
//! [`simulate`] produces linear models for end-to-end checks.

pub mod error;
pub mod estimate;
pub mod figures;
pub mod graph;
pub mod identify;
pub mod oracle;
pub mod simulate;
pub mod strategy;

pub use error::{Error, Result};
pub use estimate::{causal_change, AdjustOptions, CausalChangeReport, DataKind, Dataset, InterventionalTable};
pub use graph::{shares_topological_order, CausalDag, DifferenceGraph, Digraph, VariableId, VertexSet};
pub use identify::{identify, Condition, Effect, EffectQuery, Verdict, VerdictKind};
pub use oracle::{CompatiblePair, Oracle};
pub use simulate::{sample_compatible_pair, LinearScm, NoiseFamily, ScmPair};
pub use strategy::{Identifier, Registry};

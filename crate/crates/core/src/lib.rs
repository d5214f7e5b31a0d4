//! Exact computations in free groups of finite rank.
//!
//! The modules build on each other bottom-up: [`words`] (reduced and cyclic
//! words, endomorphisms), [`stallings`] (subgroup graphs), [`metric`]
//! (marked metric graphs and translation lengths), [`dynamics`] (graph maps
//! and train-track iteration), [`currents`] (cylinder frequencies) and
//! [`rigidity`] (certificates and witness families).

pub mod currents;
pub mod dynamics;
pub mod error;
pub mod graph;
pub mod metric;
pub mod rigidity;
pub mod sample;
pub mod stallings;
mod text;
pub mod words;

pub use currents::FrequencyVector;
pub use dynamics::GraphMap;
pub use error::{Error, Result};
pub use graph::TopGraph;
pub use metric::MarkedMetricGraph;
pub use stallings::{fold, BasedGraph, CoreGraph, Index, PowerBound};
pub use words::{Basis, CyclicWord, Endomorphism, Letter, Word};

/// Exact lengths and frequencies.
pub type Rational = num::BigRational;

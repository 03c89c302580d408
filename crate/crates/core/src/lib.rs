//! Spread random proper colorings of bounded-degree graphs.
//!
//! [`pipeline::SpreadColorer`] draws proper `(D+1)`-colorings of a graph of
//! maximum degree `D` such that any fixed set of `t` vertex–color pairs
//! appears with probability at most `(C/D)^t`. Around it sit the pieces it
//! is built from and the tools that check it:
//!
//! - [`graph`], [`decompose`]: graphs, regular padding, sparse–dense
//!   decomposition.
//! - [`greedy`]: greedy samplers, exact enumeration and the small instances
//!   on which simpler samplers fail to spread.
//! - [`sparse`], [`matching`], [`cluster`]: the coloring phases.
//! - [`audit`]: Monte Carlo and exact spread measurement.
//! - [`thresholds`]: hypergraph expense and cost, list colorability and the
//!   palette sparsification experiment.
//!
//! Trials run on rayon when the `parallel` feature is on (the default);
//! every trial draws from its own seeded stream, so results do not depend on
//! scheduling or on the feature.

#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

pub mod audit;
pub mod cluster;
pub mod coloring;
pub mod decompose;
pub mod error;
pub mod graph;
pub mod greedy;
pub mod matching;
pub mod par;
pub mod pipeline;
pub mod sparse;
pub mod stats;
pub mod thresholds;

pub use coloring::{Color, ListAssignment, Pair, PartialColoring};
pub use error::{Error, Result};
pub use graph::Graph;
pub use par::Execution;
pub use pipeline::{color_graph_spread, PipelineParams, PipelineResult, SpreadColorer};

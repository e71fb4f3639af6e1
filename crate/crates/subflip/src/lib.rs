//! A workbench for flips, subflips, and existential positive transductions
//! on partially reflexive graphs.
//!
//! The crate bundles:
//! - core graph machinery with self-loops, metrics, and semi-induced
//!   pattern detection ([`graph`]),
//! - the flip/subflip algebra over vertex partitions ([`flip`],
//!   [`partition`]),
//! - the constructive approximation of flips by subflips ([`approx`]),
//! - exact flipper/subflipper rank and depth solvers ([`rank`]),
//! - an FO/MSO formula toolkit with a parser, evaluator, normal form,
//!   positive-MSO collapse, and non-equality-property checks ([`logic`]),
//! - executable transductions with witness colorings ([`transduction`]),
//! - sparsification of bounded-subflip-depth graphs into bounded
//!   tree-depth subgraphs with exact recovery ([`sparsify`]),
//! - bit-exact text formats ([`io`]) and the invariant battery
//!   ([`verify`]).
//!
//! Everything is sized for desk-scale experiments: the exhaustive solvers
//! expect up to around 8 vertices, the rest stays comfortable below a few
//! dozen.

pub mod approx;
pub mod enumerate;
pub mod error;
pub mod flip;
pub mod graph;
pub mod io;
pub mod logic;
pub mod partition;
pub mod rank;
pub mod sparsify;
pub mod transduction;
pub mod verify;

pub use error::{Error, Result};
pub use graph::{Graph, PatternKind, VertexSet};
pub use partition::Partition;

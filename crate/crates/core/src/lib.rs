//! Finite combinatorics of the Erdős–Moser principle with many colors.
//!
//! - [`ordinal`]: Cantor normal form ordinals below ω^ω and the step `α[m]`.
//! - [`largeness`]: α-large and α-sparse sets, least large endpoints, and
//!   decomposition / sparsification / union splitting of large sets.
//! - [`coloring`]: pair colorings, fallow and transitive predicates, bit
//!   encodings of coloring families, stability profiles, triple colorings.
//! - [`witness`]: fallow chains, stabilization, groupings and EM witnesses.
//! - [`density`]: exact and randomized EM-largeness and EM-density checks.
//! - [`limitmin`]: window minima over value tables and the argmax coloring.
//! - [`certificate`]: the JSON envelope every checker result is wrapped in.

pub mod certificate;
pub mod coloring;
pub mod density;
pub mod finset;
pub mod largeness;
pub mod limitmin;
pub mod ordinal;
pub mod witness;

pub use finset::FinSet;
pub use ordinal::Ordinal;

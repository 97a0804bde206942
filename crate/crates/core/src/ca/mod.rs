//! Two-dimensional linear cellular automata with memory.
//!
//! Cells live on an `r x s` torus over `Z_c` with `c = 2^b`. A linear rule
//! sums a subset of the extended Moore neighborhood mod `c`; which neighbors
//! participate is encoded by a 9-bit rule number. An order-`k` memory CA
//! combines `k - 1` such rules over the most recent configurations with an
//! identity memory term on the oldest one, which makes the global map
//! invertible and the whole evolution reversible.

mod lmca;
mod matrix;
mod rule;

pub use lmca::{lca_step, Lmca};
pub use matrix::{CellMatrix, ConfigWindow};
pub use rule::{NeighborhoodWeights, RuleNumber};

use thiserror::Error;

/// Errors from the CA engine.
#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum CaError {
    /// A value lies outside its domain.
    #[error("{0}")]
    Domain(String),
    /// The rule count does not match the window order.
    #[error("window of order {window_order} needs {} rules, got {rule_count}", window_order.saturating_sub(1))]
    Arity {
        window_order: usize,
        rule_count: usize,
    },
    /// Configurations disagree on shape or modulus.
    #[error("configuration shape mismatch: expected {expected_rows}x{expected_cols} over 2^{expected_bits}, got {rows}x{cols} over 2^{bits}")]
    Shape {
        expected_rows: usize,
        expected_cols: usize,
        expected_bits: u8,
        rows: usize,
        cols: usize,
        bits: u8,
    },
}

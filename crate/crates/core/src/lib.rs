//! (k,n)-threshold secret sharing for images built on two-dimensional
//! reversible linear memory cellular automata (LMCA).
//!
//! The secret image becomes the first configuration of an order-`k` memory
//! CA whose remaining `k - 1` initial configurations are filled from a
//! Blum-Blum-Shub generator. Evolving the automaton forward yields `n`
//! consecutive configurations that are handed out as shares; any `k`
//! consecutive shares drive the inverse automaton back to the exact
//! original image, while fewer reveal nothing about it.
//!
//! Module map:
//! - [`ca`] — the toroidal linear CA engine (rules, configurations,
//!   forward/inverse memory evolution).
//! - [`bbs`] — the Blum-Blum-Shub bit generator.
//! - [`image`] / [`pnm`] — images as matrices over `Z_c` and the raw
//!   PBM/PGM/PPM codecs.
//! - [`share`] — the bit-exact `CAS1` share container.
//! - [`scheme`] — setup, split, and recover.
//! - [`analysis`] — exhaustive perfectness census and share statistics.

pub use num_bigint;

pub mod analysis;
pub mod bbs;
mod bitpack;
pub mod ca;
pub mod image;
pub mod pnm;
pub mod scheme;
pub mod share;

pub use analysis::{perfectness_census, uniformity_stats, CensusParams, CensusReport};
pub use bbs::BbsGenerator;
pub use ca::{lca_step, CellMatrix, ConfigWindow, Lmca, NeighborhoodWeights, RuleNumber};
pub use image::{Depth, Image};
pub use scheme::{recover, split, SchemeParams};
pub use share::{validate_share_set, Share, ShareHeader, SchemeId};

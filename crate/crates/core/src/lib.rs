//! Macroscopic-superposition measures of the transverse-field Ising ring.
//!
//! `H = -lambda sum_i sx_i sx_{i+1} - sum_i sz_i` on a periodic chain of `N`
//! sites. Spin correlators come from free-fermion Wick coefficients and
//! Toeplitz determinants (`spectrum`, `toeplitz`, `correlators`); the effective
//! size `N_eff`, Fisher information and p-index are built on top of them
//! (`macroscopicity`) and analysed across sizes (`scaling`). `ed` is a
//! brute-force reference for small rings.

// `!(a > b)` is used on purpose so NaN lands on the rejecting branch.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod correlators;
pub mod ed;
pub mod error;
pub mod macroscopicity;
mod numeric;
pub mod scaling;
pub mod spectrum;
pub mod toeplitz;

pub use correlators::{complete_table, conv_tol, xx_table, CorrelatorTable};
pub use error::{Error, Result};
pub use macroscopicity::{effective_size, Direction, MacroMeasures};
pub use spectrum::{wick_coefficients, ChainParams, GridConvention};

/// Bumped whenever a change could alter any computed number.
pub const ENGINE_VERSION: u32 = 1;

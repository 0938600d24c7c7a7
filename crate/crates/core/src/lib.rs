//! Phase retrieval from coded diffraction patterns.
//!
//! A signal `x ∈ C^d` is observed through `L` random diagonal masks followed
//! by a DFT, keeping only squared magnitudes. Lifting `X = xx*` turns the
//! measurements into linear constraints on Hermitian matrices; the convex
//! program over the PSD cone ([`solver`]) then recovers `X`. The
//! [`certification`] module evaluates the ingredients of the recovery
//! guarantee numerically: near-isotropy of the measurement ensemble, robust
//! injectivity on the tangent space, truncation events, and a golfing-scheme
//! dual certificate.

// `!(a <= b)` is used on purpose so that NaN fails every check.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod certification;
pub mod coded;
pub mod error;
pub mod experiments;
pub mod hermitian;
pub mod solver;

pub use error::{Error, Result};
pub use hermitian::{
    phase_aligned_distance, ComplexSignal, HermitianMatrix, NormKind, NumericPolicy, TangentSpace,
};

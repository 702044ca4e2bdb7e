//! Finite-dimensional models of reflection positivity.
//!
//! The crate turns the constructions around reflection positive Hilbert
//! spaces into exact matrix and tensor computations:
//!
//! * [`numerics`]: dense linear algebra, PSD tests, null spaces, matrix exponentials.
//! * [`symmetric`]: groups with involution and subsemigroups, the induced order.
//! * [`positive`]: Markov kernel families and positive semigroup structures.
//! * [`os`]: the Osterwalder-Schrader quotient and induced operators.
//! * [`window`] / [`reconstruction`]: cylinder measures of Markov paths and the
//!   round trip back through OS quantization.
//! * [`group_paths`]: convolution semigroups on finite groups and pinned paths.
//! * [`fock`]: truncated symmetric Fock space and second quantization.
//! * [`gaussian`]: Hilbert-Schmidt and nuclearity criteria, fixed vectors of
//!   finite group representations.

pub mod error;
pub mod fock;
pub mod gaussian;
pub mod group_paths;
pub mod numerics;
pub mod os;
pub mod positive;
pub mod reconstruction;
pub mod symmetric;
pub mod window;

pub use error::{Error, Result};
pub use numerics::{Mat, Subspace, Vector};

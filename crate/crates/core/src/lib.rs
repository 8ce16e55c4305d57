//! Competitive optimization for two-player differentiable games.
//!
//! - [`games`]: game oracles (losses, gradients, second-derivative products)
//! - [`diff`]: reverse-mode tape and finite-difference oracles
//! - [`optim`]: GDA, SGA, ConOpt, OGDA, CGD, RMSprop, ADAM and the ACOM variants
//! - [`spectral`]: fixed-point Jacobians, step-size bounds and certification
//! - [`linalg`]: dense matrices, eigenvalues, LU and conjugate gradients
//! - [`harness`]: trajectories, step-size sweeps and timing benchmarks

// Dense numerics index by position, and `!(a < b)` comparisons are kept
// deliberately so NaN takes the failure branch.
#![allow(clippy::needless_range_loop, clippy::neg_cmp_op_on_partial_ord)]

pub mod diff;
pub mod games;
pub mod harness;
pub mod linalg;
pub mod optim;
pub mod spectral;

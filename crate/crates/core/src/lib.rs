//! Training and comparison of classical and hybrid quantum-classical
//! physics-informed networks on the 1-D family
//! `u_t − L·u_xx + N·u·u_x − F(t) = 0` over `[0, T] × [x_lo, x_hi]`.
//!
//! The crate is organised bottom-up:
//!
//! - [`diffkit`]: second-order forward jets in `(t, x)` and a reverse tape over them.
//! - [`qsim`]: exact statevector simulation of the variational circuit.
//! - [`netlib`]: dense and hybrid architectures, parameter-budget planning, checkpoints.
//! - [`pdeset`]: the PDE family, residuals and loss terms.
//! - [`sampler`]: Sobol collocation sets and the resampling rule.
//! - [`refsolve`]: finite-difference reference solutions and their on-disk cache.
//! - [`trainer`]: Adam training loop with adaptive loss weights and metrics logs.
//! - [`bench`]: experiment matrix, ratio statistics, landscape slices and probes.
//! - [`config`]: the TOML run configuration.

pub mod bench;
pub mod config;
pub mod diffkit;
pub mod error;
pub mod netlib;
pub mod pdeset;
pub mod qsim;
pub mod refsolve;
pub mod sampler;
pub mod trainer;

pub use error::{Error, Result};

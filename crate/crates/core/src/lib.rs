//! Control-pulse synthesis and simulation for cascaded bosonic networks.
//!
//! Two registers of `N` stationary bosonic modes (A: emitters, B: receivers)
//! share a unidirectional channel. Given a target `N x N` unitary and a set of
//! emitter couplings, [`synth`] constructs receiver couplings so that the
//! emission/reabsorption process maps `a_k(t0)` onto `b_j(tf) = sum_k U_jk a_k(t0)`.
//! [`network`] integrates the single-excitation Green's function of the
//! cascaded network, [`metrics`] scores it, [`imperfect`] covers pulse noise,
//! detunings and losses, and [`oracle`] re-derives the register-to-register
//! map from a mode-discretized waveguide as an independent check.
//!
//! Times are in units of the inverse maximal channel decay rate, so all
//! couplings obey `|g| <= 1`.

pub mod error;
pub mod exec;
pub mod imperfect;
pub mod metrics;
pub mod network;
pub mod numkit;
pub mod oracle;
pub mod synth;

pub use error::{Error, Result};
pub use num_complex::Complex64 as C64;

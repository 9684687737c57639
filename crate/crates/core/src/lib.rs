//! Dual-functional radar-communication (DFRC) waveform synthesis.
//!
//! A MIMO base station with `N` antennas transmits an `N × L` block `X` that
//! serves `K` downlink users and probes a radar scene at the same time. This
//! crate builds the covariance-constrained closed-form benchmark and a
//! Riemannian conjugate-gradient solver on the complex oblique manifold that
//! trades multi-user interference, similarity to a reference waveform and
//! integrated range sidelobe level against each other under a per-antenna
//! power constraint.
//!
//! Module map:
//!
//! - [`model`]: matrices, steering vectors, shift operators, seeded generators
//! - [`metrics`]: MUI, ISL, similarity, beampattern, sum-rate, objective
//! - [`radar`]: echo simulation and matched filtering
//! - [`closedform`]: covariance targets and the closed-form benchmark
//! - [`manifold`]: oblique manifold geometry
//! - [`rcg`]: Euclidean gradient, Polak-Ribière conjugation, Armijo search, solver
//! - [`experiment`]: Monte-Carlo harness and CSV/SVG outputs

// `!(x > 0.0)` is used on purpose so NaN is rejected too
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod closedform;
pub mod error;
pub mod experiment;
pub mod io;
pub mod manifold;
pub mod metrics;
pub mod model;
pub mod plot;
pub mod radar;
pub mod rcg;

pub use error::{Error, Result};
pub use model::{CMat, ChannelMatrix, SymbolMatrix, WaveformMatrix};

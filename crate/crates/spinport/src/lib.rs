// Copyright 2026 Spinport Contributors
// SPDX-License-Identifier: Apache-2.0

//! Numerically exact simulation of quantum teleportation for equatorial
//! spin coherent states encoded in two-mode bosonic qubits.
//!
//! A qubit is N bosons shared between two modes; states live in the
//! (N+1)-dimensional symmetric (Dicke) sector. The protocol entangles the
//! sender's and receiver's qubits with collective Sz-Sz gates, measures in
//! the number basis, and corrects the receiver with a single classical bit.
//! The crate provides:
//!
//! - [`spin_core`]: states, collective spin operators, rotations, the mode
//!   Hadamard, and log-space binomial numerics stable to N >= 1000;
//! - [`channels`]: the entangling gate, the exact collective-dephasing
//!   channel, and a Runge-Kutta master-equation integrator;
//! - [`protocol`]: the measurement distribution, the receiver's conditional
//!   states, the classical correction, exact enumeration, and seeded
//!   Monte Carlo sampling;
//! - [`metrics`]: trace-distance errors, success probabilities, classical
//!   baselines, and Gaussian-approximation diagnostics;
//! - [`oracle`]: brute-force full-register reference runs that validate
//!   every optimized path at small boson number.

// Link the system BLAS used by ndarray's matrix products.
extern crate blas_src;

pub mod channels;
pub mod error;
pub mod math;
pub mod metrics;
pub mod oracle;
pub mod protocol;
pub mod spin_core;

pub use error::{Error, Result};

// Copyright 2026 Spinport Contributors
// SPDX-License-Identifier: Apache-2.0

//! Error types shared across the crate.

use thiserror::Error;

/// Errors produced by simulator operations.
#[derive(Debug, Error)]
pub enum Error {
    /// A precondition on an argument was violated.
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    /// A numerical guarantee (trace preservation, convergence) failed.
    #[error("numerical failure: {0}")]
    NumericalFailure(String),

    /// The requested computation exceeds the resource guard of a
    /// brute-force reference path.
    #[error("resource guard: {0}")]
    ResourceGuard(String),
}

pub type Result<T> = std::result::Result<T, Error>;

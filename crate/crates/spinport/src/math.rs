// Copyright 2026 Spinport Contributors
// SPDX-License-Identifier: Apache-2.0

//! Small numeric helpers: angle arithmetic and Hermitian-matrix checks.

use ndarray::Array2;
use num_complex::Complex64;
use std::f64::consts::PI;

/// Wrap an angle into the interval `(-pi, pi]`.
pub fn wrap_angle(x: f64) -> f64 {
    let two_pi = 2.0 * PI;
    let mut y = x % two_pi;
    if y <= -PI {
        y += two_pi;
    } else if y > PI {
        y -= two_pi;
    }
    y
}

/// Minimal angular distance between two azimuths, in `[0, pi]`.
pub fn angular_distance(a: f64, b: f64) -> f64 {
    wrap_angle(a - b).abs()
}

/// Maximum entrywise deviation from Hermiticity.
pub fn hermiticity_defect(m: &Array2<Complex64>) -> f64 {
    let d = m.nrows();
    let mut worst = 0.0f64;
    for i in 0..d {
        for j in i..d {
            let defect = (m[[i, j]] - m[[j, i]].conj()).norm();
            if defect > worst {
                worst = defect;
            }
        }
    }
    worst
}

/// Replace `m` by its Hermitian part `(m + m^dagger)/2`.
pub fn hermitize(m: &mut Array2<Complex64>) {
    let d = m.nrows();
    for i in 0..d {
        m[[i, i]] = Complex64::new(m[[i, i]].re, 0.0);
        for j in (i + 1)..d {
            let avg = 0.5 * (m[[i, j]] + m[[j, i]].conj());
            m[[i, j]] = avg;
            m[[j, i]] = avg.conj();
        }
    }
}

/// Real part of the trace.
pub fn trace_re(m: &Array2<Complex64>) -> f64 {
    m.diag().iter().map(|z| z.re).sum()
}

/// Whether the Hermitian matrix `m` has all eigenvalues `>= -eps`, decided by
/// attempting a Cholesky factorization of `m + eps*I`. This avoids a full
/// eigendecomposition; a factorization exists iff `m + eps*I` is positive
/// definite.
pub fn is_positive_semidefinite_within(m: &Array2<Complex64>, eps: f64) -> bool {
    let d = m.nrows();
    let mut l = Array2::<Complex64>::zeros((d, d));
    for j in 0..d {
        let mut diag = m[[j, j]].re + eps;
        for k in 0..j {
            diag -= l[[j, k]].norm_sqr();
        }
        if diag <= 0.0 || !diag.is_finite() {
            return false;
        }
        let pivot = diag.sqrt();
        l[[j, j]] = Complex64::new(pivot, 0.0);
        for i in (j + 1)..d {
            let mut s = m[[i, j]];
            for k in 0..j {
                s -= l[[i, k]] * l[[j, k]].conj();
            }
            l[[i, j]] = s / pivot;
        }
    }
    true
}

// Copyright 2026 Spinport Contributors
// SPDX-License-Identifier: Apache-2.0

//! Dicke-basis representation of a single N-boson two-mode system.
//!
//! A state of N bosons shared between modes `a` and `b` lives in the
//! (N+1)-dimensional symmetric sector spanned by the number states `|k>`
//! (k bosons in mode `a`, N-k in mode `b`). This module provides coherent
//! states, the collective spin operators
//!
//! ```text
//!   Sx = a'b + b'a,   Sy = -i a'b + i b'a,   Sz = a'a - b'b,
//! ```
//!
//! rotations `exp(-i angle S/2)`, the mode-mixing Hadamard, and spin
//! expectation values. Binomial coefficients are kept in log space so that
//! boson numbers of 1000 and beyond stay representable.

use ndarray::{Array1, Array2};
use num_complex::Complex64;
use std::f64::consts::{FRAC_PI_2, PI};

use crate::error::{Error, Result};

/// Collective spin axis.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SpinAxis {
    X,
    Y,
    Z,
}

/// Table of `ln C(N, k)` built by cumulative summation of log ratios.
///
/// The upper half is mirrored from the lower half so that the symmetry
/// `log_choose[k] == log_choose[N-k]` holds exactly.
#[derive(Clone, Debug)]
pub struct LogBinomialTable {
    n_bosons: usize,
    log_choose: Vec<f64>,
}

impl LogBinomialTable {
    pub fn new(n_bosons: usize) -> Self {
        let n = n_bosons;
        let mut log_choose = vec![0.0; n + 1];
        let mut acc = 0.0;
        for k in 1..=(n / 2) {
            acc += ((n - k + 1) as f64).ln() - (k as f64).ln();
            log_choose[k] = acc;
        }
        for k in (n / 2 + 1)..=n {
            log_choose[k] = log_choose[n - k];
        }
        Self { n_bosons: n, log_choose }
    }

    pub fn n_bosons(&self) -> usize {
        self.n_bosons
    }

    /// `ln C(N, k)`.
    pub fn ln_choose(&self, k: usize) -> f64 {
        self.log_choose[k]
    }

    /// `C(N, k) / 2^N`, assembled in log space.
    pub fn binomial_weight(&self, k: usize) -> f64 {
        (self.log_choose[k] - self.n_bosons as f64 * std::f64::consts::LN_2).exp()
    }
}

/// Bloch-sphere coordinates of the encoded qubit: the boson in mode `a`
/// carries amplitude `cos(theta/2) e^{-i phi/2}` and the boson in mode `b`
/// carries `sin(theta/2) e^{+i phi/2}`.
#[derive(Clone, Copy, Debug)]
pub struct SpinCoherentParams {
    theta: f64,
    phi: f64,
}

impl SpinCoherentParams {
    /// `theta` must lie in `[0, pi]`; `phi` is wrapped into `(-pi, pi]`.
    pub fn new(theta: f64, phi: f64) -> Result<Self> {
        if !theta.is_finite() || !(0.0..=PI).contains(&theta) {
            return Err(Error::InvalidArgument(format!(
                "polar angle must lie in [0, pi], got {theta}"
            )));
        }
        if !phi.is_finite() {
            return Err(Error::InvalidArgument(format!("azimuth must be finite, got {phi}")));
        }
        Ok(Self { theta, phi: crate::math::wrap_angle(phi) })
    }

    /// Equatorial state at azimuth `phi`.
    pub fn equatorial(phi: f64) -> Result<Self> {
        Self::new(FRAC_PI_2, phi)
    }

    pub fn theta(&self) -> f64 {
        self.theta
    }

    pub fn phi(&self) -> f64 {
        self.phi
    }
}

/// Pure state of a single N-boson two-mode system in the number basis.
///
/// Invariants: `amplitudes.len() == n_bosons + 1` and unit norm. The
/// constructor rejects vectors whose norm deviates from 1 by more than
/// 1e-6 and renormalizes the rest, so stored states carry unit norm to
/// machine precision.
#[derive(Clone, Debug)]
pub struct DickeState {
    n_bosons: usize,
    amplitudes: Array1<Complex64>,
}

impl DickeState {
    pub fn new(n_bosons: usize, amplitudes: Array1<Complex64>) -> Result<Self> {
        if n_bosons < 1 {
            return Err(Error::InvalidArgument(format!(
                "boson number must be >= 1, got {n_bosons}"
            )));
        }
        if amplitudes.len() != n_bosons + 1 {
            return Err(Error::InvalidArgument(format!(
                "expected {} amplitudes, got {}",
                n_bosons + 1,
                amplitudes.len()
            )));
        }
        let norm_sqr: f64 = amplitudes.iter().map(|z| z.norm_sqr()).sum();
        if !norm_sqr.is_finite() || (norm_sqr.sqrt() - 1.0).abs() > 1e-6 {
            return Err(Error::InvalidArgument(format!(
                "amplitude vector is not normalized (norm = {})",
                norm_sqr.sqrt()
            )));
        }
        let scale = 1.0 / norm_sqr.sqrt();
        Ok(Self { n_bosons, amplitudes: amplitudes.mapv(|z| z * scale) })
    }

    /// The number state `|k>`.
    pub fn number_state(n_bosons: usize, k: usize) -> Result<Self> {
        if k > n_bosons {
            return Err(Error::InvalidArgument(format!(
                "occupation {k} exceeds boson number {n_bosons}"
            )));
        }
        let mut amplitudes = Array1::zeros(n_bosons + 1);
        amplitudes[k] = Complex64::new(1.0, 0.0);
        Self::new(n_bosons, amplitudes)
    }

    pub fn n_bosons(&self) -> usize {
        self.n_bosons
    }

    pub fn amplitudes(&self) -> &Array1<Complex64> {
        &self.amplitudes
    }

    pub fn amplitude(&self, k: usize) -> Complex64 {
        self.amplitudes[k]
    }

    /// Inner product `<self|other>`.
    pub fn overlap(&self, other: &DickeState) -> Complex64 {
        self.amplitudes
            .iter()
            .zip(other.amplitudes.iter())
            .map(|(a, b)| a.conj() * b)
            .sum()
    }

    /// Overlap magnitude; 1 for states equal up to a global phase.
    pub fn fidelity(&self, other: &DickeState) -> f64 {
        self.overlap(other).norm()
    }

    /// Expectation values of (Sx, Sy, Sz), evaluated from the tridiagonal
    /// structure of the ladder operators.
    pub fn spin_expectation(&self) -> SpinExpectation {
        let n = self.n_bosons;
        let mut sx = 0.0;
        let mut sy = 0.0;
        let mut sz = 0.0;
        for k in 0..=n {
            sz += (2.0 * k as f64 - n as f64) * self.amplitudes[k].norm_sqr();
            if k < n {
                let w = (((k + 1) * (n - k)) as f64).sqrt();
                let cross = self.amplitudes[k + 1].conj() * self.amplitudes[k];
                sx += 2.0 * w * cross.re;
                sy += 2.0 * w * cross.im;
            }
        }
        SpinExpectation { sx, sy, sz }
    }
}

/// Collective spin expectation triple, in units of the bare (unnormalized)
/// spin: each component lies in `[-N, N]`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SpinExpectation {
    pub sx: f64,
    pub sy: f64,
    pub sz: f64,
}

impl SpinExpectation {
    pub fn magnitude(&self) -> f64 {
        (self.sx * self.sx + self.sy * self.sy + self.sz * self.sz).sqrt()
    }

    /// Azimuth of the in-plane component.
    pub fn azimuth(&self) -> f64 {
        self.sy.atan2(self.sx)
    }
}

/// Build the spin coherent state `(alpha a' + beta b')^N |0> / sqrt(N!)`:
/// amplitude `sqrt(C(N, k)) alpha^k beta^{N-k}` on `|k>`, assembled as a
/// (log-magnitude, phase) pair per component so large N cannot overflow.
pub fn coherent_state(n_bosons: usize, params: SpinCoherentParams) -> Result<DickeState> {
    if n_bosons < 1 {
        return Err(Error::InvalidArgument(format!(
            "boson number must be >= 1, got {n_bosons}"
        )));
    }
    let n = n_bosons;
    let table = LogBinomialTable::new(n);
    let alpha_mag = (params.theta / 2.0).cos();
    let beta_mag = (params.theta / 2.0).sin();
    let alpha_arg = -params.phi / 2.0;
    let beta_arg = params.phi / 2.0;

    let mut amplitudes = Array1::zeros(n + 1);
    for k in 0..=n {
        // 0^0 = 1: a vanishing mode amplitude only kills components that
        // actually occupy that mode.
        if (alpha_mag == 0.0 && k > 0) || (beta_mag == 0.0 && k < n) {
            continue;
        }
        let mut log_mag = 0.5 * table.ln_choose(k);
        if k > 0 {
            log_mag += k as f64 * alpha_mag.ln();
        }
        if k < n {
            log_mag += (n - k) as f64 * beta_mag.ln();
        }
        let phase = k as f64 * alpha_arg + (n - k) as f64 * beta_arg;
        amplitudes[k] = Complex64::from_polar(log_mag.exp(), phase);
    }
    DickeState::new(n, amplitudes)
}

/// Dense matrix of the collective spin operator on the N-boson sector.
///
/// `Sz` is diagonal with entries `2k - N`; `Sx` and `Sy` are tridiagonal
/// with ladder elements `sqrt((k+1)(N-k))`.
pub fn spin_operator_matrix(n_bosons: usize, axis: SpinAxis) -> Result<Array2<Complex64>> {
    if n_bosons < 1 {
        return Err(Error::InvalidArgument(format!(
            "boson number must be >= 1, got {n_bosons}"
        )));
    }
    let n = n_bosons;
    let mut m = Array2::zeros((n + 1, n + 1));
    match axis {
        SpinAxis::Z => {
            for k in 0..=n {
                m[[k, k]] = Complex64::new(2.0 * k as f64 - n as f64, 0.0);
            }
        }
        SpinAxis::X => {
            for k in 0..n {
                let w = (((k + 1) * (n - k)) as f64).sqrt();
                m[[k + 1, k]] = Complex64::new(w, 0.0);
                m[[k, k + 1]] = Complex64::new(w, 0.0);
            }
        }
        SpinAxis::Y => {
            for k in 0..n {
                let w = (((k + 1) * (n - k)) as f64).sqrt();
                m[[k + 1, k]] = Complex64::new(0.0, -w);
                m[[k, k + 1]] = Complex64::new(0.0, w);
            }
        }
    }
    Ok(m)
}

/// Lift a single-particle (2x2) mode unitary `u` to the N-boson symmetric
/// sector.
///
/// `u[i][j]` is the matrix element sending mode `j` to mode `i` (index 0 is
/// mode `a`). The lift is built boson by boson through the two-parent
/// recurrence obtained from `|k; n> = (sqrt(k) a'|k-1; n-1> + sqrt(n-k)
/// b'|k; n-1>)/n`, which keeps every intermediate entry bounded by 1 and is
/// numerically stable to N >= 1000, unlike direct summation of the
/// binomial expansion whose alternating terms cancel catastrophically.
pub fn lift_mode_unitary(n_bosons: usize, u: [[Complex64; 2]; 2]) -> Array2<Complex64> {
    let mut m = Array2::from_elem((1, 1), Complex64::new(1.0, 0.0));
    for n in 1..=n_bosons {
        let nf = n as f64;
        let mut next = Array2::zeros((n + 1, n + 1));
        for k in 0..=n {
            let sk = (k as f64).sqrt();
            let snk = ((n - k) as f64).sqrt();
            for row in 0..=n {
                let sm = (row as f64).sqrt();
                let snm = ((n - row) as f64).sqrt();
                let mut acc = Complex64::new(0.0, 0.0);
                if k >= 1 {
                    if row >= 1 {
                        acc += u[0][0] * (sm * sk) * m[[row - 1, k - 1]];
                    }
                    if row + 1 <= n {
                        acc += u[1][0] * (snm * sk) * m[[row, k - 1]];
                    }
                }
                if k + 1 <= n {
                    if row >= 1 {
                        acc += u[0][1] * (sm * snk) * m[[row - 1, k]];
                    }
                    if row + 1 <= n {
                        acc += u[1][1] * (snm * snk) * m[[row, k]];
                    }
                }
                next[[row, k]] = acc / nf;
            }
        }
        m = next;
    }
    m
}

fn rotation_mode_unitary(axis: SpinAxis, angle: f64) -> [[Complex64; 2]; 2] {
    let c = (angle / 2.0).cos();
    let s = (angle / 2.0).sin();
    match axis {
        // exp(-i angle sigma_x / 2)
        SpinAxis::X => [
            [Complex64::new(c, 0.0), Complex64::new(0.0, -s)],
            [Complex64::new(0.0, -s), Complex64::new(c, 0.0)],
        ],
        // exp(-i angle sigma_y / 2)
        SpinAxis::Y => [
            [Complex64::new(c, 0.0), Complex64::new(-s, 0.0)],
            [Complex64::new(s, 0.0), Complex64::new(c, 0.0)],
        ],
        // exp(-i angle sigma_z / 2); kept for completeness, the z path
        // below applies the phases directly.
        SpinAxis::Z => [
            [Complex64::from_polar(1.0, -angle / 2.0), Complex64::new(0.0, 0.0)],
            [Complex64::new(0.0, 0.0), Complex64::from_polar(1.0, angle / 2.0)],
        ],
    }
}

/// Apply the collective rotation `exp(-i angle S_axis / 2)`.
///
/// Convention: a z-rotation by `chi` advances the azimuth of an equatorial
/// coherent state from `phi` to `phi + chi`; expectation vectors transform
/// by the right-handed SO(3) rotation about the given axis.
pub fn rotate(state: &DickeState, axis: SpinAxis, angle: f64) -> DickeState {
    let n = state.n_bosons();
    let amplitudes = match axis {
        SpinAxis::Z => {
            // Sz is diagonal: amplitude k picks up exp(-i angle (2k - N)/2).
            let mut out = state.amplitudes().clone();
            for (k, amp) in out.iter_mut().enumerate() {
                let m = 2.0 * k as f64 - n as f64;
                *amp *= Complex64::from_polar(1.0, -angle * m / 2.0);
            }
            out
        }
        SpinAxis::X | SpinAxis::Y => {
            let lift = lift_mode_unitary(n, rotation_mode_unitary(axis, angle));
            lift.dot(state.amplitudes())
        }
    };
    DickeState::new(n, amplitudes).expect("rotation preserves normalization")
}

/// Hadamard matrix on the N-boson sector: the unitary induced by the mode
/// substitution `a -> (a + b)/sqrt(2)`, `b -> (a - b)/sqrt(2)`. Real,
/// symmetric, and an exact involution.
pub fn hadamard_matrix(n_bosons: usize) -> Array2<Complex64> {
    let r = std::f64::consts::FRAC_1_SQRT_2;
    let u = [
        [Complex64::new(r, 0.0), Complex64::new(r, 0.0)],
        [Complex64::new(r, 0.0), Complex64::new(-r, 0.0)],
    ];
    lift_mode_unitary(n_bosons, u)
}

/// Apply the Hadamard to a state. On coherent states this maps the mode
/// amplitudes `(alpha, beta)` to `((alpha+beta)/sqrt2, (alpha-beta)/sqrt2)`
/// exactly, global phase included.
pub fn hadamard(state: &DickeState) -> DickeState {
    let h = hadamard_matrix(state.n_bosons());
    DickeState::new(state.n_bosons(), h.dot(state.amplitudes()))
        .expect("hadamard preserves normalization")
}

/// Hadamard realized as the composite of three pi/2 rotations (z, x, z).
/// Equals [`hadamard`] up to the global phase `(-i)^N`.
pub fn hadamard_via_rotations(state: &DickeState) -> DickeState {
    let step1 = rotate(state, SpinAxis::Z, FRAC_PI_2);
    let step2 = rotate(&step1, SpinAxis::X, FRAC_PI_2);
    rotate(&step2, SpinAxis::Z, FRAC_PI_2)
}

// Copyright 2026 Spinport Contributors
// SPDX-License-Identifier: Apache-2.0

//! Error and success figures of merit, classical baselines, and the
//! Gaussian approximation diagnostics for the outcome distribution.

use ndarray::Array2;
use rayon::prelude::*;
use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::protocol::{
    apply_correction, bob_conditional_state, full_offset_correction_angle, is_accepted,
    measurement_distribution, ProtocolConfig,
};
use crate::spin_core::SpinExpectation;

/// Which classical correction the receiver applies in step 6.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CorrectionScheme {
    /// The single-bit recipe: rotate by pi iff `k1 < N/2`.
    Binary,
    /// Diagnostics only: undo the full `arccos(2 k1/N - 1)` offset with the
    /// branch sign taken from an oracle. Not realizable with one classical
    /// bit; quantifies the cost of the binary recipe.
    FullOffsetOracle,
}

/// How the error is aggregated over measurement outcomes at fixed azimuth.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum AveragingMode {
    /// Trace-distance error per accepted outcome, averaged with the
    /// renormalized outcome probabilities (the default).
    PerOutcome,
    /// Error of the probability-averaged spin vector.
    EnsembleSpin,
}

/// Azimuth-resolved error summary.
#[derive(Clone, Debug)]
pub struct ErrorReport {
    /// Grid average of the per-azimuth errors.
    pub epsilon: f64,
    /// `(phi, epsilon_phi)` pairs over the grid.
    pub per_phi: Vec<(f64, f64)>,
    /// The configuration the report was computed for (its `phi` field is
    /// superseded by the grid).
    pub config: ProtocolConfig,
}

/// Normalization constant of the Gaussian approximation, fixed by
/// normalizing over the whole `(k1, k2)` grid.
#[derive(Clone, Copy, Debug)]
pub struct ApproxParams {
    pub normalization: f64,
}

/// Trace distance in the Bloch ball between the receiver's normalized spin
/// and the ideal equatorial target:
/// `1/2 sqrt((sx/N - cos phi)^2 + (sy/N - sin phi)^2 + (sz/N)^2)`.
pub fn trace_distance_error(spin: &SpinExpectation, phi: f64, n_bosons: usize) -> f64 {
    let n = n_bosons as f64;
    let dx = spin.sx / n - phi.cos();
    let dy = spin.sy / n - phi.sin();
    let dz = spin.sz / n;
    0.5 * (dx * dx + dy * dy + dz * dz).sqrt()
}

/// Uniform azimuth grid on the half-open interval `[-pi, pi)`.
pub fn phi_grid(size: usize) -> Vec<f64> {
    phi_grid_from(-PI, size)
}

/// Uniform azimuth grid of `size` points starting at `origin`.
pub fn phi_grid_from(origin: f64, size: usize) -> Vec<f64> {
    (0..size)
        .map(|j| origin + 2.0 * PI * j as f64 / size as f64)
        .collect()
}

/// Weighted spin/error accumulator for one azimuth.
fn per_phi_metrics(
    config: &ProtocolConfig,
    scheme: CorrectionScheme,
    mode: AveragingMode,
) -> Result<(f64, SpinExpectation)> {
    let n = config.n_bosons;
    let phi = config.phi_wrapped();
    let dist = measurement_distribution(config)?;

    let mut accepted_weight = 0.0;
    let mut error_acc = 0.0;
    let mut spin_acc = SpinExpectation { sx: 0.0, sy: 0.0, sz: 0.0 };
    let mut add = |weight: f64, spin: SpinExpectation| {
        accepted_weight += weight;
        error_acc += weight * trace_distance_error(&spin, phi, n);
        spin_acc.sx += weight * spin.sx;
        spin_acc.sy += weight * spin.sy;
        spin_acc.sz += weight * spin.sz;
    };

    for k2 in 0..=n {
        let plain = bob_conditional_state(config, n, k2)?;
        let plain_spin = plain.spin_expectation();
        match scheme {
            CorrectionScheme::Binary => {
                // The correction depends on k1 only through the hemisphere
                // bit, so accepted outcomes group into two weights per k2.
                let corrected_spin = apply_correction(&plain, 0, n).spin_expectation();
                let mut low_weight = 0.0;
                let mut high_weight = 0.0;
                for k1 in 0..=n {
                    if !is_accepted(k1, n, config.k1_cut) {
                        continue;
                    }
                    if 2 * k1 < n {
                        low_weight += dist.probability(k1, k2);
                    } else {
                        high_weight += dist.probability(k1, k2);
                    }
                }
                add(low_weight, corrected_spin);
                add(high_weight, plain_spin);
            }
            CorrectionScheme::FullOffsetOracle => {
                // The angle varies with k1; a z rotation acts on the spin
                // vector as a planar rotation.
                for k1 in 0..=n {
                    if !is_accepted(k1, n, config.k1_cut) {
                        continue;
                    }
                    let angle = full_offset_correction_angle(config, k1, k2);
                    let (sin_a, cos_a) = angle.sin_cos();
                    let spin = SpinExpectation {
                        sx: cos_a * plain_spin.sx - sin_a * plain_spin.sy,
                        sy: sin_a * plain_spin.sx + cos_a * plain_spin.sy,
                        sz: plain_spin.sz,
                    };
                    add(dist.probability(k1, k2), spin);
                }
            }
        }
    }

    if accepted_weight <= f64::MIN_POSITIVE {
        return Err(Error::NumericalFailure(
            "acceptance probability vanished; conditional averages undefined".into(),
        ));
    }
    let mean_spin = SpinExpectation {
        sx: spin_acc.sx / accepted_weight,
        sy: spin_acc.sy / accepted_weight,
        sz: spin_acc.sz / accepted_weight,
    };
    let epsilon = match mode {
        AveragingMode::PerOutcome => error_acc / accepted_weight,
        AveragingMode::EnsembleSpin => trace_distance_error(&mean_spin, phi, n),
    };
    Ok((epsilon, mean_spin))
}

/// Acceptance-conditioned mean corrected spin of the receiver at the
/// config's azimuth.
pub fn conditional_mean_spin(config: &ProtocolConfig) -> Result<SpinExpectation> {
    per_phi_metrics(config, CorrectionScheme::Binary, AveragingMode::EnsembleSpin)
        .map(|(_, spin)| spin)
}

/// Average teleportation error over an explicit azimuth grid.
pub fn average_error_on_grid(
    config: &ProtocolConfig,
    phis: &[f64],
    scheme: CorrectionScheme,
    mode: AveragingMode,
) -> Result<ErrorReport> {
    if phis.is_empty() {
        return Err(Error::InvalidArgument("azimuth grid is empty".into()));
    }
    let per_phi: Result<Vec<(f64, f64)>> = phis
        .par_iter()
        .map(|&phi| {
            let local = config.clone().with_phi(phi);
            per_phi_metrics(&local, scheme, mode).map(|(eps, _)| (phi, eps))
        })
        .collect();
    let per_phi = per_phi?;
    let epsilon = per_phi.iter().map(|(_, e)| e).sum::<f64>() / per_phi.len() as f64;
    Ok(ErrorReport { epsilon, per_phi, config: config.clone() })
}

/// Average teleportation error with an explicit correction and averaging
/// choice, on the default `[-pi, pi)` grid.
pub fn average_error_with(
    config: &ProtocolConfig,
    phi_grid_size: usize,
    scheme: CorrectionScheme,
    mode: AveragingMode,
) -> Result<ErrorReport> {
    if phi_grid_size < 8 {
        return Err(Error::InvalidArgument(format!(
            "azimuth grid needs at least 8 points, got {phi_grid_size}"
        )));
    }
    average_error_on_grid(config, &phi_grid(phi_grid_size), scheme, mode)
}

/// Average teleportation error: binary correction, per-outcome averaging.
pub fn average_error(config: &ProtocolConfig, phi_grid_size: usize) -> Result<ErrorReport> {
    average_error_with(config, phi_grid_size, CorrectionScheme::Binary, AveragingMode::PerOutcome)
}

/// Probability that an outcome passes the acceptance cutoff.
pub fn success_probability(config: &ProtocolConfig) -> Result<f64> {
    let dist = measurement_distribution(config)?;
    Ok(dist.acceptance_probability(config.k1_cut))
}

/// Success probability for every cutoff `0..=N/2`, as `(cut/N, P)` pairs,
/// reusing a single distribution evaluation.
pub fn success_curve(config: &ProtocolConfig) -> Result<Vec<(f64, f64)>> {
    let dist = measurement_distribution(config)?;
    let n = config.n_bosons;
    Ok((0..=n / 2)
        .map(|cut| {
            (cut as f64 / n as f64, dist.acceptance_probability(Some(cut)))
        })
        .collect())
}

/// Mean error of the best classical strategy that communicates only the
/// hemisphere bit of the azimuth: `(4 - 2 sqrt(2)) / pi`.
pub fn classical_binary_bound() -> f64 {
    (4.0 - 2.0 * std::f64::consts::SQRT_2) / PI
}

/// Unnormalized Gaussian approximation of the outcome distribution: the
/// binomial factor `exp(-((2k2-N)/sqrt(N))^2 / 2)` times the ridge factor
/// `exp(-2N (x +- arccos(2k1/N - 1)/2)^2)` with `x = phi/2 - (2k2-N) tau`,
/// summed over both branch signs. Valid for large N.
pub fn approx_distribution(n_bosons: usize, k1: usize, k2: usize, phi: f64, tau: f64) -> f64 {
    let n = n_bosons as f64;
    let m2 = 2.0 * k2 as f64 - n;
    let first = (-0.5 * (m2 / n.sqrt()).powi(2)).exp();
    let offset = (2.0 * k1 as f64 / n - 1.0).clamp(-1.0, 1.0).acos();
    let x = phi / 2.0 - m2 * tau;
    let second = (-2.0 * n * (x + offset / 2.0).powi(2)).exp()
        + (-2.0 * n * (x - offset / 2.0).powi(2)).exp();
    first * second
}

/// The approximation over the whole grid, normalized to total 1.
pub fn approx_distribution_normalized(
    n_bosons: usize,
    phi: f64,
    tau: f64,
) -> (Array2<f64>, ApproxParams) {
    let dim = n_bosons + 1;
    let mut grid = Array2::zeros((dim, dim));
    for k1 in 0..dim {
        for k2 in 0..dim {
            grid[[k1, k2]] = approx_distribution(n_bosons, k1, k2, phi, tau);
        }
    }
    let total: f64 = grid.iter().sum();
    let normalization = 1.0 / total;
    grid.mapv_inplace(|x| x * normalization);
    (grid, ApproxParams { normalization })
}

/// The two ridge solutions `k2 = (N + sqrt(N/2)(phi -+ arccos(2k1/N - 1)))/2`
/// where the outcome distribution peaks.
pub fn ridge_location(n_bosons: usize, k1: usize, phi: f64) -> Result<(f64, f64)> {
    if k1 > n_bosons {
        return Err(Error::InvalidArgument(format!(
            "k1 = {k1} exceeds boson number {n_bosons}"
        )));
    }
    let n = n_bosons as f64;
    let offset = (2.0 * k1 as f64 / n - 1.0).clamp(-1.0, 1.0).acos();
    let scale = (n / 2.0).sqrt();
    Ok((
        (n + scale * (phi - offset)) / 2.0,
        (n + scale * (phi + offset)) / 2.0,
    ))
}

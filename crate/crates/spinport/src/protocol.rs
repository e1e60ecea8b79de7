// Copyright 2026 Spinport Contributors
// SPDX-License-Identifier: Apache-2.0

//! The six-step teleportation sequence for equatorial spin coherent
//! states.
//!
//! Sender qubits 1 and 2, receiver qubit 3. The sequence: (1) Sz-Sz gate
//! between qubits 2 and 3 for time `T`; (2) gate with flipped sign between
//! qubits 1 and 2 for time `tau`; (3) Hadamard on qubit 1; (4) number-basis
//! measurement of qubits 1 and 2; (5) classical transmission of the single
//! bit `k1 < N/2`; (6) conditional pi rotation of qubit 3 about z.
//!
//! Everything before the Hadamard is diagonal in the joint number basis, so
//! with collective-Sz dephasing included the outcome distribution reduces to
//! one single-qubit density conjugation per `k2` column and the receiver's
//! conditional state has an exact closed form. Both reductions are checked
//! against the brute-force oracle module.

use ndarray::Array2;
use num_complex::Complex64;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand::SeedableRng;
use rayon::prelude::*;
use std::f64::consts::LN_2;
use std::sync::Arc;

use crate::channels::QubitDensity;
use crate::error::{Error, Result};
use crate::math::{angular_distance, wrap_angle};
use crate::spin_core::{
    coherent_state, hadamard_matrix, DickeState, LogBinomialTable, SpinCoherentParams,
};

/// Sign of the Hamiltonian in step 2 relative to `Sz_1 Sz_2`. The sequence
/// uses the flipped sign; the oracle module reads the same constant so the
/// two paths cannot drift apart.
pub(crate) const STEP2_GATE_SIGN: f64 = -1.0;

/// Full parameter set of one protocol run.
#[derive(Clone, Debug)]
pub struct ProtocolConfig {
    /// Bosons per qubit.
    pub n_bosons: usize,
    /// Azimuth of the unknown state on qubit 1; interpreted mod 2 pi.
    pub phi: f64,
    /// Duration of the step-2 gate (qubits 1-2).
    pub tau: f64,
    /// Duration of the step-1 gate (qubits 2-3).
    pub big_t: f64,
    /// Collective dephasing rate during the entangling steps.
    pub gamma: f64,
    /// Acceptance cutoff: keep outcomes with `k1 <= cut` or
    /// `k1 >= N - cut`. `None` keeps everything (unconditional scheme).
    pub k1_cut: Option<usize>,
    /// Seed for the Monte Carlo sampler.
    pub seed: u64,
    /// Whether dephasing acts on all three qubits during both entangling
    /// steps (the default), or only on the actively interacting pair of
    /// each step.
    pub dephase_all_three: bool,
}

impl ProtocolConfig {
    /// Defaults: `tau = T = 1/sqrt(2N)`, no dephasing, no cutoff.
    pub fn new(n_bosons: usize) -> Self {
        let gate_time = 1.0 / ((2 * n_bosons.max(1)) as f64).sqrt();
        Self {
            n_bosons,
            phi: 0.0,
            tau: gate_time,
            big_t: gate_time,
            gamma: 0.0,
            k1_cut: None,
            seed: 0,
            dephase_all_three: true,
        }
    }

    pub fn with_phi(mut self, phi: f64) -> Self {
        self.phi = phi;
        self
    }

    pub fn with_gamma(mut self, gamma: f64) -> Self {
        self.gamma = gamma;
        self
    }

    pub fn with_k1_cut(mut self, cut: Option<usize>) -> Self {
        self.k1_cut = cut;
        self
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_bosons < 1 {
            return Err(Error::InvalidArgument(format!(
                "boson number must be >= 1, got {}",
                self.n_bosons
            )));
        }
        if !self.phi.is_finite() {
            return Err(Error::InvalidArgument("azimuth must be finite".into()));
        }
        for (name, value) in [("tau", self.tau), ("T", self.big_t), ("gamma", self.gamma)] {
            if !value.is_finite() || value < 0.0 {
                return Err(Error::InvalidArgument(format!(
                    "{name} must be finite and >= 0, got {value}"
                )));
            }
        }
        if let Some(cut) = self.k1_cut {
            if cut > self.n_bosons / 2 {
                return Err(Error::InvalidArgument(format!(
                    "cutoff {cut} exceeds floor(N/2) = {}",
                    self.n_bosons / 2
                )));
            }
        }
        Ok(())
    }

    /// Azimuth wrapped into `(-pi, pi]`.
    pub fn phi_wrapped(&self) -> f64 {
        wrap_angle(self.phi)
    }

    /// Dephasing exposure of qubit 1 across steps 1 and 2.
    pub(crate) fn exposure_qubit1(&self) -> f64 {
        if self.dephase_all_three {
            self.big_t + self.tau
        } else {
            self.tau
        }
    }

    /// Dephasing exposure of qubit 3 across steps 1 and 2.
    pub(crate) fn exposure_qubit3(&self) -> f64 {
        if self.dephase_all_three {
            self.big_t + self.tau
        } else {
            self.big_t
        }
    }
}

/// Exact joint distribution over the two measurement outcomes.
#[derive(Clone, Debug)]
pub struct OutcomeDistribution {
    n_bosons: usize,
    p: Array2<f64>,
    config: ProtocolConfig,
}

impl OutcomeDistribution {
    /// Assemble from a precomputed probability matrix (oracle module).
    pub(crate) fn from_raw(n_bosons: usize, p: Array2<f64>, config: ProtocolConfig) -> Self {
        Self { n_bosons, p, config }
    }

    pub fn n_bosons(&self) -> usize {
        self.n_bosons
    }

    /// `(N+1) x (N+1)` matrix over `(k1, k2)`.
    pub fn probabilities(&self) -> &Array2<f64> {
        &self.p
    }

    pub fn config(&self) -> &ProtocolConfig {
        &self.config
    }

    pub fn probability(&self, k1: usize, k2: usize) -> f64 {
        self.p[[k1, k2]]
    }

    pub fn total(&self) -> f64 {
        self.p.iter().sum()
    }

    /// Marginal over `k2`, indexed by `k1`.
    pub fn marginal_k1(&self) -> Vec<f64> {
        (0..=self.n_bosons)
            .map(|k1| (0..=self.n_bosons).map(|k2| self.p[[k1, k2]]).sum())
            .collect()
    }

    /// Index of the largest probability along a fixed-`k1` row.
    pub fn argmax_k2(&self, k1: usize) -> usize {
        let mut best = 0;
        for k2 in 1..=self.n_bosons {
            if self.p[[k1, k2]] > self.p[[k1, best]] {
                best = k2;
            }
        }
        best
    }

    /// Total probability of outcomes passing the acceptance rule.
    pub fn acceptance_probability(&self, k1_cut: Option<usize>) -> f64 {
        let mut acc = 0.0;
        for k1 in 0..=self.n_bosons {
            if is_accepted(k1, self.n_bosons, k1_cut) {
                for k2 in 0..=self.n_bosons {
                    acc += self.p[[k1, k2]];
                }
            }
        }
        acc
    }
}

/// Acceptance rule of the conditional scheme: keep `k1 <= cut` or
/// `k1 >= N - cut`; `None` accepts everything.
pub fn is_accepted(k1: usize, n_bosons: usize, k1_cut: Option<usize>) -> bool {
    match k1_cut {
        None => true,
        Some(cut) => k1 <= cut || k1 + cut >= n_bosons,
    }
}

/// The three-qubit product state at the start of the run: qubit 1 carries
/// the unknown azimuth, qubits 2 and 3 sit at azimuth zero.
pub fn initial_state(config: &ProtocolConfig) -> Result<[DickeState; 3]> {
    config.validate()?;
    let sender = coherent_state(
        config.n_bosons,
        SpinCoherentParams::equatorial(config.phi_wrapped())?,
    )?;
    let blank = coherent_state(config.n_bosons, SpinCoherentParams::equatorial(0.0)?)?;
    Ok([sender, blank.clone(), blank])
}

/// Exact measurement distribution for the noiseless case:
/// `p(k1, k2) = 2^-N C(N,k1) C(N,k2) cos^{2 k1}(x) sin^{2N-2k1}(x)` with
/// `x = phi/2 - (2 k2 - N) tau`, evaluated in log space.
pub fn distribution_closed_form(config: &ProtocolConfig) -> Result<OutcomeDistribution> {
    config.validate()?;
    let n = config.n_bosons;
    let table = LogBinomialTable::new(n);
    let phi = config.phi_wrapped();
    let mut p = Array2::zeros((n + 1, n + 1));
    for k2 in 0..=n {
        let x = phi / 2.0 - (2.0 * k2 as f64 - n as f64) * config.tau;
        let cos_mag = x.cos().abs();
        let sin_mag = x.sin().abs();
        for k1 in 0..=n {
            if (cos_mag == 0.0 && k1 > 0) || (sin_mag == 0.0 && k1 < n) {
                continue;
            }
            let mut log_p = table.ln_choose(k1) + table.ln_choose(k2) - n as f64 * LN_2;
            if k1 > 0 {
                log_p += 2.0 * k1 as f64 * cos_mag.ln();
            }
            if k1 < n {
                log_p += 2.0 * (n - k1) as f64 * sin_mag.ln();
            }
            p[[k1, k2]] = log_p.exp();
        }
    }
    Ok(OutcomeDistribution { n_bosons: n, p, config: config.clone() })
}

/// General (dephasing-aware) measurement distribution.
///
/// The entangling gates and the dephasing are all diagonal in the number
/// basis, so qubit 3 traces out to 1 and qubit 2 contributes only the
/// binomial weight `C(N,k2)/2^N`. What remains per `k2` column is qubit 1's
/// density with the step-2 conditional phase `exp(+i (2n1-N)(2k2-N) tau)`
/// and its dephasing damping, conjugated by the Hadamard and read out on
/// the diagonal. Cost is one dense matrix product per column, columns run
/// in parallel, and the summation order within a column is fixed.
pub fn distribution_structured(config: &ProtocolConfig) -> Result<OutcomeDistribution> {
    config.validate()?;
    let n = config.n_bosons;
    let dim = n + 1;
    let sender = coherent_state(n, SpinCoherentParams::equatorial(config.phi_wrapped())?)?;
    let hadamard = hadamard_matrix(n);
    let table = LogBinomialTable::new(n);
    let exposure = config.exposure_qubit1();

    // Qubit-1 density after its dephasing exposure, before the k2 phases.
    let mut damped = Array2::zeros((dim, dim));
    for i in 0..dim {
        for j in 0..dim {
            let delta = i as f64 - j as f64;
            damped[[i, j]] = sender.amplitude(i)
                * sender.amplitude(j).conj()
                * (-2.0 * config.gamma * exposure * delta * delta).exp();
        }
    }

    let columns: Vec<(usize, Vec<f64>)> = (0..=n)
        .into_par_iter()
        .map(|k2| {
            let m2 = 2.0 * k2 as f64 - n as f64;
            let weight = table.binomial_weight(k2);
            // Conditional phase from the step-2 gate, on ket and bra.
            let phases: Vec<Complex64> = (0..dim)
                .map(|n1| {
                    let m1 = 2.0 * n1 as f64 - n as f64;
                    Complex64::from_polar(1.0, -STEP2_GATE_SIGN * m1 * m2 * config.tau)
                })
                .collect();
            let mut rho = Array2::zeros((dim, dim));
            for i in 0..dim {
                for j in 0..dim {
                    rho[[i, j]] = phases[i] * damped[[i, j]] * phases[j].conj();
                }
            }
            let h_rho = hadamard.dot(&rho);
            let mut column = vec![0.0f64; dim];
            for k1 in 0..dim {
                let mut diag = Complex64::new(0.0, 0.0);
                for m in 0..dim {
                    diag += h_rho[[k1, m]] * hadamard[[k1, m]].conj();
                }
                column[k1] = (weight * diag.re).max(0.0);
            }
            (k2, column)
        })
        .collect();

    let mut p = Array2::zeros((dim, dim));
    for (k2, column) in columns {
        for k1 in 0..dim {
            p[[k1, k2]] = column[k1];
        }
    }
    Ok(OutcomeDistribution { n_bosons: n, p, config: config.clone() })
}

/// Measurement distribution for step 4: the closed form when no dephasing
/// is present, the structured path otherwise. The two agree to 1e-10 at
/// `gamma = 0`.
pub fn measurement_distribution(config: &ProtocolConfig) -> Result<OutcomeDistribution> {
    if config.gamma == 0.0 {
        distribution_closed_form(config)
    } else {
        distribution_structured(config)
    }
}

/// The receiver's state conditioned on the measurement, before the
/// classical correction. It depends on `k2` only: a coherent state at
/// azimuth `2 (2 k2 - N) T`, with coherences `(n3, n3')` damped by
/// `exp(-2 gamma (n3 - n3')^2 exposure)` when dephasing is present.
pub fn bob_conditional_state(config: &ProtocolConfig, k1: usize, k2: usize) -> Result<QubitDensity> {
    config.validate()?;
    let n = config.n_bosons;
    if k1 > n || k2 > n {
        return Err(Error::InvalidArgument(format!(
            "measurement outcomes ({k1}, {k2}) out of range for N = {n}"
        )));
    }
    let dim = n + 1;
    let table = LogBinomialTable::new(n);
    let magnitudes: Vec<f64> = (0..dim).map(|k| (0.5 * table.ln_choose(k)).exp()).collect();
    let phase_rate = 2.0 * config.big_t * (2.0 * k2 as f64 - n as f64);
    let exposure = config.exposure_qubit3();
    let scale = (-(n as f64) * LN_2).exp();

    let mut matrix = Array2::zeros((dim, dim));
    for i in 0..dim {
        for j in 0..dim {
            let delta = i as f64 - j as f64;
            matrix[[i, j]] = Complex64::from_polar(
                scale * magnitudes[i] * magnitudes[j]
                    * (-2.0 * config.gamma * exposure * delta * delta).exp(),
                -phase_rate * delta,
            );
        }
    }
    QubitDensity::try_new(n, matrix)
}

/// Step-6 classical correction: a pi rotation about z iff `k1 < N/2`
/// (strict; a tie at exactly N/2 receives no rotation). On the density this
/// is the sign flip `(-1)^(n3 - n3')`.
pub fn apply_correction(bob: &QubitDensity, k1: usize, n_bosons: usize) -> QubitDensity {
    if 2 * k1 >= n_bosons {
        return bob.clone();
    }
    let dim = bob.n_bosons() + 1;
    let mut matrix = bob.matrix().clone();
    for i in 0..dim {
        for j in 0..dim {
            if (i + j) % 2 == 1 {
                matrix[[i, j]] = -matrix[[i, j]];
            }
        }
    }
    QubitDensity::try_new(bob.n_bosons(), matrix).expect("sign flip preserves invariants")
}

/// Diagnostics-only correction angle that undoes the known outcome offset
/// `arccos(2 k1/N - 1)` with the branch sign chosen by an oracle that sees
/// the true azimuth. Quantifies what the binary recipe gives away.
pub fn full_offset_correction_angle(config: &ProtocolConfig, k1: usize, k2: usize) -> f64 {
    let n = config.n_bosons;
    let offset = (2.0 * k1 as f64 / n as f64 - 1.0).clamp(-1.0, 1.0).acos();
    let bob_azimuth = 2.0 * config.big_t * (2.0 * k2 as f64 - n as f64);
    let target = config.phi_wrapped();
    if angular_distance(bob_azimuth + offset, target)
        <= angular_distance(bob_azimuth - offset, target)
    {
        offset
    } else {
        -offset
    }
}

/// Apply the diagnostics-only full-offset correction.
pub fn apply_full_offset_correction(
    bob: &QubitDensity,
    config: &ProtocolConfig,
    k1: usize,
    k2: usize,
) -> QubitDensity {
    bob.rotate_z(full_offset_correction_angle(config, k1, k2))
}

/// One enumerated outcome of the exact protocol run.
#[derive(Clone, Debug)]
pub struct ExactOutcome {
    pub k1: usize,
    pub k2: usize,
    pub probability: f64,
    /// Receiver state after the classical correction; shared between
    /// outcomes with the same `(k2, correction)` pair.
    pub bob: Arc<QubitDensity>,
    pub accepted: bool,
}

/// Corrected receiver states for every `k2` column: `(corrected, plain)`,
/// the first for outcomes with `k1 < N/2`.
fn corrected_states_per_column(
    config: &ProtocolConfig,
) -> Result<Vec<(Arc<QubitDensity>, Arc<QubitDensity>)>> {
    let n = config.n_bosons;
    (0..=n)
        .map(|k2| {
            let plain = bob_conditional_state(config, n, k2)?;
            let corrected = apply_correction(&plain, 0, n);
            Ok((Arc::new(corrected), Arc::new(plain)))
        })
        .collect()
}

/// Enumerate all `(N+1)^2` outcomes with their probabilities, corrected
/// receiver states, and acceptance flags. Probabilities are raw (they sum
/// to 1); conditional ensembles renormalize over the accepted subset.
pub fn teleport_exact(config: &ProtocolConfig) -> Result<Vec<ExactOutcome>> {
    let dist = measurement_distribution(config)?;
    let n = config.n_bosons;
    let states = corrected_states_per_column(config)?;
    let mut outcomes = Vec::with_capacity((n + 1) * (n + 1));
    for k1 in 0..=n {
        let corrected = 2 * k1 < n;
        for k2 in 0..=n {
            let (with_flip, plain) = &states[k2];
            outcomes.push(ExactOutcome {
                k1,
                k2,
                probability: dist.probability(k1, k2),
                bob: if corrected { Arc::clone(with_flip) } else { Arc::clone(plain) },
                accepted: is_accepted(k1, n, config.k1_cut),
            });
        }
    }
    Ok(outcomes)
}

/// One sampled shot.
#[derive(Clone, Debug)]
pub struct TeleportOutcome {
    pub k1: usize,
    pub k2: usize,
    /// Receiver state after the classical correction.
    pub bob_density: Arc<QubitDensity>,
    pub accepted: bool,
}

/// Draw `shots` measurement outcomes i.i.d. from the exact distribution by
/// inverse-CDF over the flattened `(k1, k2)` matrix, using a counter-based
/// generator seeded from the config. The same seed reproduces the same
/// sequence.
pub fn teleport_sample(config: &ProtocolConfig, shots: usize) -> Result<Vec<TeleportOutcome>> {
    if shots < 1 {
        return Err(Error::InvalidArgument("shot count must be >= 1".into()));
    }
    let dist = measurement_distribution(config)?;
    let n = config.n_bosons;
    let dim = n + 1;
    let states = corrected_states_per_column(config)?;

    let mut cumulative = Vec::with_capacity(dim * dim);
    let mut acc = 0.0;
    for k1 in 0..dim {
        for k2 in 0..dim {
            acc += dist.probability(k1, k2);
            cumulative.push(acc);
        }
    }

    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mut outcomes = Vec::with_capacity(shots);
    for _ in 0..shots {
        let u: f64 = rng.gen::<f64>() * acc;
        let flat = cumulative.partition_point(|&c| c <= u).min(dim * dim - 1);
        let (k1, k2) = (flat / dim, flat % dim);
        let (with_flip, plain) = &states[k2];
        outcomes.push(TeleportOutcome {
            k1,
            k2,
            bob_density: if 2 * k1 < n { Arc::clone(with_flip) } else { Arc::clone(plain) },
            accepted: is_accepted(k1, n, config.k1_cut),
        });
    }
    Ok(outcomes)
}

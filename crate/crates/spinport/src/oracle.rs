// Copyright 2026 Spinport Contributors
// SPDX-License-Identifier: Apache-2.0

//! Brute-force reference runs over the full three-qubit tensor product.
//!
//! Nothing here is optimized: the pure-state path applies every gate to the
//! full `(N+1)^3` amplitude tensor, and the dephased path integrates the
//! master equation on the `(N+1)^3 x (N+1)^3` joint density. Both exist to
//! validate the structured paths in [`crate::protocol`] and are guarded to
//! small boson numbers.

use ndarray::{Array1, Array2, Array3};
use num_complex::Complex64;

use crate::channels::{master_equation_integrate, QubitDensity};
use crate::error::{Error, Result};
use crate::math::{hermiticity_defect, is_positive_semidefinite_within, trace_re};
use crate::protocol::{initial_state, OutcomeDistribution, ProtocolConfig, STEP2_GATE_SIGN};
use crate::spin_core::{hadamard_matrix, DickeState};

/// Largest boson number accepted by the pure-state oracle.
pub const MAX_PURE_ORACLE_BOSONS: usize = 8;
/// Largest boson number accepted by the density-matrix oracle.
pub const MAX_DENSITY_ORACLE_BOSONS: usize = 6;
/// Default integrator resolution: steps per entangling gate, following the
/// rule `dt <= 1e-3 * gate time`.
pub const DEFAULT_STEPS_PER_GATE: usize = 1000;

/// Pure state of the full three-qubit register, indexed `(k1, k2, k3)`.
#[derive(Clone, Debug)]
pub struct JointPureState {
    n_bosons: usize,
    amplitudes: Array3<Complex64>,
}

impl JointPureState {
    pub fn from_product(q1: &DickeState, q2: &DickeState, q3: &DickeState) -> Result<Self> {
        let n = q1.n_bosons();
        if q2.n_bosons() != n || q3.n_bosons() != n {
            return Err(Error::InvalidArgument("boson numbers differ across qubits".into()));
        }
        let dim = n + 1;
        let mut amplitudes = Array3::zeros((dim, dim, dim));
        for k1 in 0..dim {
            for k2 in 0..dim {
                for k3 in 0..dim {
                    amplitudes[[k1, k2, k3]] =
                        q1.amplitude(k1) * q2.amplitude(k2) * q3.amplitude(k3);
                }
            }
        }
        Ok(Self { n_bosons: n, amplitudes })
    }

    pub fn n_bosons(&self) -> usize {
        self.n_bosons
    }

    pub fn amplitudes(&self) -> &Array3<Complex64> {
        &self.amplitudes
    }

    pub fn norm(&self) -> f64 {
        self.amplitudes.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }
}

/// Density matrix of the full register over the composite index
/// `(k1 (N+1) + k2)(N+1) + k3`. Only used for small N.
#[derive(Clone, Debug)]
pub struct JointDensity {
    n_bosons: usize,
    matrix: Array2<Complex64>,
}

impl JointDensity {
    pub fn from_pure(state: &JointPureState) -> Self {
        let flat: Vec<Complex64> = state.amplitudes.iter().copied().collect();
        let big = flat.len();
        let mut matrix = Array2::zeros((big, big));
        for i in 0..big {
            for j in 0..big {
                matrix[[i, j]] = flat[i] * flat[j].conj();
            }
        }
        Self { n_bosons: state.n_bosons, matrix }
    }

    pub fn try_new(n_bosons: usize, matrix: Array2<Complex64>) -> Result<Self> {
        let big = (n_bosons + 1).pow(3);
        if matrix.nrows() != big || matrix.ncols() != big {
            return Err(Error::InvalidArgument(format!(
                "expected a {big}x{big} joint density, got {}x{}",
                matrix.nrows(),
                matrix.ncols()
            )));
        }
        if hermiticity_defect(&matrix) > 1e-8 {
            return Err(Error::InvalidArgument("joint density is not Hermitian".into()));
        }
        if (trace_re(&matrix) - 1.0).abs() > 1e-8 {
            return Err(Error::InvalidArgument("joint density trace is not 1".into()));
        }
        Ok(Self { n_bosons, matrix })
    }

    pub fn n_bosons(&self) -> usize {
        self.n_bosons
    }

    pub fn matrix(&self) -> &Array2<Complex64> {
        &self.matrix
    }

    pub fn is_positive_semidefinite_within(&self, eps: f64) -> bool {
        is_positive_semidefinite_within(&self.matrix, eps)
    }
}

/// Result of the noiseless brute-force run. Receiver states are `None` for
/// outcomes of vanishing probability.
#[derive(Clone, Debug)]
pub struct PureProtocolRun {
    pub distribution: OutcomeDistribution,
    pub bob_states: Vec<Vec<Option<DickeState>>>,
}

/// Result of the dephased brute-force run.
#[derive(Clone, Debug)]
pub struct DephasedProtocolRun {
    pub distribution: OutcomeDistribution,
    pub bob_densities: Vec<Vec<Option<QubitDensity>>>,
}

/// Sz eigenvalue of occupation `k`.
fn sz_value(k: usize, n: usize) -> f64 {
    2.0 * k as f64 - n as f64
}

/// Execute steps 1-4 literally on the full state vector: entangling phases,
/// Hadamard on qubit 1, projective number-basis measurement of qubits 1 and
/// 2, and slice renormalization for the receiver's conditional states.
pub fn oracle_run_pure(config: &ProtocolConfig) -> Result<PureProtocolRun> {
    config.validate()?;
    let n = config.n_bosons;
    if n > MAX_PURE_ORACLE_BOSONS {
        return Err(Error::ResourceGuard(format!(
            "pure oracle is limited to N <= {MAX_PURE_ORACLE_BOSONS}, got {n}"
        )));
    }
    if config.gamma != 0.0 {
        return Err(Error::InvalidArgument(
            "pure oracle requires gamma = 0; use oracle_run_dephased".into(),
        ));
    }
    let dim = n + 1;
    let [q1, q2, q3] = initial_state(config)?;
    let mut psi = JointPureState::from_product(&q1, &q2, &q3)?.amplitudes;

    // Step 1: Sz2 Sz3 for time T, diagonal phases.
    for k2 in 0..dim {
        for k3 in 0..dim {
            let phase =
                Complex64::from_polar(1.0, -sz_value(k2, n) * sz_value(k3, n) * config.big_t);
            for k1 in 0..dim {
                psi[[k1, k2, k3]] *= phase;
            }
        }
    }
    // Step 2: the sign-flipped gate between qubits 1 and 2 for time tau.
    for k1 in 0..dim {
        for k2 in 0..dim {
            let phase = Complex64::from_polar(
                1.0,
                -STEP2_GATE_SIGN * sz_value(k1, n) * sz_value(k2, n) * config.tau,
            );
            for k3 in 0..dim {
                psi[[k1, k2, k3]] *= phase;
            }
        }
    }
    // Step 3: Hadamard on qubit 1.
    let hadamard = hadamard_matrix(n);
    let mut transformed: Array3<Complex64> = Array3::zeros((dim, dim, dim));
    for m in 0..dim {
        for k1 in 0..dim {
            let h = hadamard[[m, k1]];
            if h == Complex64::new(0.0, 0.0) {
                continue;
            }
            for k2 in 0..dim {
                for k3 in 0..dim {
                    transformed[[m, k2, k3]] += h * psi[[k1, k2, k3]];
                }
            }
        }
    }

    // Step 4: measurement statistics and conditional slices.
    let mut p = Array2::zeros((dim, dim));
    let mut bob_states = Vec::with_capacity(dim);
    for k1 in 0..dim {
        let mut row = Vec::with_capacity(dim);
        for k2 in 0..dim {
            let mut norm_sqr = 0.0f64;
            for k3 in 0..dim {
                norm_sqr += transformed[[k1, k2, k3]].norm_sqr();
            }
            p[[k1, k2]] = norm_sqr;
            if norm_sqr > 1e-30 {
                let scale = 1.0 / norm_sqr.sqrt();
                let amps: Array1<Complex64> =
                    (0..dim).map(|k3| transformed[[k1, k2, k3]] * scale).collect();
                row.push(Some(DickeState::new(n, amps)?));
            } else {
                row.push(None);
            }
        }
        bob_states.push(row);
    }

    let distribution = distribution_from_parts(n, p, config);
    Ok(PureProtocolRun { distribution, bob_states })
}

/// Dephased brute-force run with the default integrator resolution.
pub fn oracle_run_dephased(config: &ProtocolConfig) -> Result<DephasedProtocolRun> {
    oracle_run_dephased_with_steps(config, DEFAULT_STEPS_PER_GATE)
}

/// Evolve the joint density through steps 1 and 2 with the master-equation
/// integrator (dephasing on the qubit set selected by the config), apply
/// the Hadamard unitarily, measure qubits 1 and 2, and partial-trace to the
/// receiver.
pub fn oracle_run_dephased_with_steps(
    config: &ProtocolConfig,
    steps_per_gate: usize,
) -> Result<DephasedProtocolRun> {
    config.validate()?;
    let n = config.n_bosons;
    if n > MAX_DENSITY_ORACLE_BOSONS {
        return Err(Error::ResourceGuard(format!(
            "density oracle is limited to N <= {MAX_DENSITY_ORACLE_BOSONS}, got {n}"
        )));
    }
    let dim = n + 1;
    let big = dim * dim * dim;
    let [q1, q2, q3] = initial_state(config)?;
    let joint = JointDensity::from_pure(&JointPureState::from_product(&q1, &q2, &q3)?);

    // Diagonals of Sz on each qubit over the composite index.
    let unpack = |v: usize| (v / (dim * dim), (v / dim) % dim, v % dim);
    let sz_on = |qubit: usize| -> Array1<f64> {
        Array1::from_iter((0..big).map(|v| {
            let (k1, k2, k3) = unpack(v);
            sz_value([k1, k2, k3][qubit], n)
        }))
    };
    let sz = [sz_on(0), sz_on(1), sz_on(2)];

    let diag_hamiltonian = |values: &dyn Fn(usize) -> f64| -> Array2<Complex64> {
        let mut h = Array2::zeros((big, big));
        for v in 0..big {
            h[[v, v]] = Complex64::new(values(v), 0.0);
        }
        h
    };
    let h_step1 = diag_hamiltonian(&|v| {
        let (_, k2, k3) = unpack(v);
        sz_value(k2, n) * sz_value(k3, n)
    });
    let h_step2 = diag_hamiltonian(&|v| {
        let (k1, k2, _) = unpack(v);
        STEP2_GATE_SIGN * sz_value(k1, n) * sz_value(k2, n)
    });

    let step1_dephasers: Vec<Array1<f64>> = if config.dephase_all_three {
        sz.to_vec()
    } else {
        vec![sz[1].clone(), sz[2].clone()]
    };
    let step2_dephasers: Vec<Array1<f64>> = if config.dephase_all_three {
        sz.to_vec()
    } else {
        vec![sz[0].clone(), sz[1].clone()]
    };

    let mut rho = joint.matrix;
    rho = master_equation_integrate(
        &rho,
        &h_step1,
        &step1_dephasers,
        config.gamma,
        config.big_t,
        steps_per_gate,
    )?;
    rho = master_equation_integrate(
        &rho,
        &h_step2,
        &step2_dephasers,
        config.gamma,
        config.tau,
        steps_per_gate,
    )?;

    // Hadamard on qubit 1, as a dense unitary on the composite space.
    let hadamard = hadamard_matrix(n);
    let mut u = Array2::zeros((big, big));
    for a in 0..dim {
        for ap in 0..dim {
            let h = hadamard[[a, ap]];
            for rest in 0..dim * dim {
                u[[a * dim * dim + rest, ap * dim * dim + rest]] = h;
            }
        }
    }
    let u_rho = u.dot(&rho);
    let u_dagger = u.t().mapv(|z| z.conj());
    rho = u_rho.dot(&u_dagger);

    // Measure qubits 1 and 2; partial-trace qubit 3.
    let mut p = Array2::zeros((dim, dim));
    let mut bob_densities = Vec::with_capacity(dim);
    for k1 in 0..dim {
        let mut row = Vec::with_capacity(dim);
        for k2 in 0..dim {
            let base = (k1 * dim + k2) * dim;
            let mut block = Array2::zeros((dim, dim));
            for i in 0..dim {
                for j in 0..dim {
                    block[[i, j]] = rho[[base + i, base + j]];
                }
            }
            let weight = trace_re(&block);
            p[[k1, k2]] = weight;
            if weight > 1e-12 {
                let scale = Complex64::new(1.0 / weight, 0.0);
                row.push(Some(QubitDensity::try_new(n, block.mapv(|z| z * scale))?));
            } else {
                row.push(None);
            }
        }
        bob_densities.push(row);
    }

    let distribution = distribution_from_parts(n, p, config);
    Ok(DephasedProtocolRun { distribution, bob_densities })
}

fn distribution_from_parts(
    n: usize,
    p: Array2<f64>,
    config: &ProtocolConfig,
) -> OutcomeDistribution {
    // OutcomeDistribution is constructed through the protocol module to
    // keep its invariants in one place.
    OutcomeDistribution::from_raw(n, p, config.clone())
}

//! Variational ground-state search on the compressed register.
//!
//! The ansatz state starts from the encoded reference determinant (the
//! lowest-diagonal occupation), runs the hardware-efficient circuit, and is
//! scored by the decoded energy. Restarts draw initial parameters near zero
//! and optimize independently; the reported result is the restart minimum.
//!
//! The decoded spectrum contains 0 for amplitude outside the encoded
//! physical subspace, so the variational bound against exact diagonalization
//! requires the physical ground energy (excluding the core constant) to be
//! nonpositive; electronic Hamiltonians satisfy this.

use rayon::prelude::*;
use serde::Serialize;

use crate::code::{build_lookup, SubspaceCode};
use crate::error::{Error, Result};
use crate::fed::EncodedHamiltonian;
use crate::fermion::FermionHamiltonian;
use crate::gf2::BitVec;
use crate::optimize::{minimize, MinimizeOptions};
use crate::sim::{prepare_encoded_reference, run_hea, HeaCircuit, Shots};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;

/// Hartree to kcal/mol.
pub const HARTREE_TO_KCAL: f64 = 627.509474;
/// Chemical accuracy threshold in kcal/mol.
pub const CHEMICAL_ACCURACY_KCAL: f64 = 1.0;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VqeConfig {
    pub layers: usize,
    pub restarts: usize,
    pub seed: u64,
    pub shots: Shots,
    /// Initial parameters are uniform in `[-init_scale, init_scale]` radians.
    pub init_scale: f64,
    pub max_iterations: usize,
    pub gradient_step: f64,
    /// Stop when the energy improves by less than this (Hartree).
    pub convergence_tol: f64,
}

impl VqeConfig {
    /// Benchmark settings: 30 restarts.
    pub fn benchmark(layers: usize) -> Self {
        Self {
            layers,
            restarts: 30,
            seed: 0,
            shots: Shots::Exact,
            init_scale: 0.01,
            max_iterations: 300,
            gradient_step: 1e-5,
            convergence_tol: 1e-9,
        }
    }

    /// Continuous-integration settings: 5 restarts.
    pub fn quick(layers: usize) -> Self {
        Self {
            restarts: 5,
            ..Self::benchmark(layers)
        }
    }
}

/// Outcome of a variational run.
#[derive(Debug, Clone, Serialize)]
pub struct VqeResult {
    pub best_energy: f64,
    pub exact_energy: f64,
    /// `(best_energy - exact_energy) * 627.509474`.
    pub delta_e_kcal: f64,
    pub best_parameters: Vec<f64>,
    /// Best-so-far energy per iteration of the winning restart.
    pub energy_trace: Vec<f64>,
    pub cnot_count: usize,
    pub parameter_count: usize,
    pub qubits: usize,
    pub layers: usize,
    pub restarts: usize,
    pub best_restart: usize,
    pub failed_restarts: usize,
    pub seed: u64,
    pub reference_occupation: String,
}

/// The reference determinant: the weight-`N` string with the lowest diagonal
/// matrix element, ties broken lexicographically.
pub fn reference_occupation(hamiltonian: &FermionHamiltonian) -> Result<BitVec> {
    let (basis, matrix) = hamiltonian.dense_matrix()?;
    if basis.is_empty() {
        return Err(Error::Domain(format!(
            "no weight-{} states on {} modes",
            hamiltonian.electrons(),
            hamiltonian.modes()
        )));
    }
    let mut best = 0;
    for i in 1..basis.len() {
        let better = matrix[(i, i)] < matrix[(best, best)] - 1e-15
            || (matrix[(i, i)] <= matrix[(best, best)] + 1e-15 && basis[i] < basis[best]);
        if better {
            best = i;
        }
    }
    Ok(basis[best].clone())
}

struct RestartOutcome {
    energy: f64,
    parameters: Vec<f64>,
    trace: Vec<f64>,
    failed: bool,
}

/// Run the variational loop. Deterministic for fixed inputs and seed; in
/// exact-shot mode the result is reproducible bit for bit.
pub fn run_vqe(
    hamiltonian: &FermionHamiltonian,
    code: &SubspaceCode,
    config: &VqeConfig,
) -> Result<VqeResult> {
    let compiled = EncodedHamiltonian::compile(hamiltonian, code)?;
    let decoder = build_lookup(code)?;
    let exact_energy = hamiltonian.exact_ground_energy()?;
    let occupation = reference_occupation(hamiltonian)?;
    let reference = prepare_encoded_reference(code, &occupation)?;
    let qubits = code.qubits();
    let parameter_count = HeaCircuit::parameter_count(qubits, config.layers);

    let energy_of = |params: &[f64]| -> f64 {
        let circuit = match HeaCircuit::new(qubits, config.layers, params.to_vec()) {
            Ok(c) => c,
            Err(_) => return f64::NAN,
        };
        let mut state = reference.clone();
        if run_hea(&mut state, &circuit).is_err() {
            return f64::NAN;
        }
        compiled
            .evaluate(&state, code, &decoder, config.shots)
            .unwrap_or(f64::NAN)
    };

    let outcomes: Vec<RestartOutcome> = (0..config.restarts)
        .into_par_iter()
        .map(|restart| {
            let mut rng = ChaCha12Rng::seed_from_u64(config.seed);
            rng.set_stream(restart as u64);
            let initial: Vec<f64> = (0..parameter_count)
                .map(|_| {
                    if config.init_scale > 0.0 {
                        rng.gen_range(-config.init_scale..=config.init_scale)
                    } else {
                        0.0
                    }
                })
                .collect();
            let out = minimize(
                energy_of,
                &initial,
                MinimizeOptions {
                    max_iterations: config.max_iterations,
                    gradient_step: config.gradient_step,
                    tolerance: config.convergence_tol,
                    memory: 8,
                },
            );
            RestartOutcome {
                failed: out.aborted || !out.value.is_finite(),
                energy: out.value,
                parameters: out.point,
                trace: out.best_trace,
            }
        })
        .collect();

    let failed_restarts = outcomes.iter().filter(|o| o.failed).count();
    let best_restart = outcomes
        .iter()
        .enumerate()
        .filter(|(_, o)| !o.failed)
        .min_by(|a, b| a.1.energy.total_cmp(&b.1.energy))
        .map(|(i, _)| i)
        .ok_or_else(|| Error::Domain("every restart failed with a non-finite energy".into()))?;
    let winner = &outcomes[best_restart];

    Ok(VqeResult {
        best_energy: winner.energy,
        exact_energy,
        delta_e_kcal: (winner.energy - exact_energy) * HARTREE_TO_KCAL,
        best_parameters: winner.parameters.clone(),
        energy_trace: winner.trace.clone(),
        cnot_count: HeaCircuit::cnot_count(qubits, config.layers),
        parameter_count,
        qubits,
        layers: config.layers,
        restarts: config.restarts,
        best_restart,
        failed_restarts,
        seed: config.seed,
        reference_occupation: occupation.to_string(),
    })
}

/// One labelled point of a potential-energy scan.
#[derive(Debug, Clone, Serialize)]
pub struct ScanPoint {
    pub label: String,
    pub vqe_energy: Option<f64>,
    pub exact_energy: Option<f64>,
    pub delta_e_kcal: Option<f64>,
    pub error: Option<String>,
}

/// Run the variational loop over a family of Hamiltonians sharing one code
/// (generated once, reused). Per-point failures are recorded and the scan
/// continues.
pub fn potential_energy_scan(
    entries: &[(String, FermionHamiltonian)],
    code: &SubspaceCode,
    config: &VqeConfig,
) -> Vec<ScanPoint> {
    entries
        .iter()
        .map(|(label, hamiltonian)| match run_vqe(hamiltonian, code, config) {
            Ok(result) => ScanPoint {
                label: label.clone(),
                vqe_energy: Some(result.best_energy),
                exact_energy: Some(result.exact_energy),
                delta_e_kcal: Some(result.delta_e_kcal),
                error: None,
            },
            Err(e) => ScanPoint {
                label: label.clone(),
                vqe_energy: None,
                exact_energy: None,
                delta_e_kcal: None,
                error: Some(e.to_string()),
            },
        })
        .collect()
}

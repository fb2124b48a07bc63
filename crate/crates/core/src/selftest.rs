//! Randomized end-to-end check: decoded energies against the dense
//! Fock-space oracle.
//!
//! Each trial draws a code (randomized search when compression is possible,
//! the identity encoder otherwise), a random Hermitian particle-conserving
//! Hamiltonian and a random state supported on the encoded physical
//! subspace, then compares the decoded exact-shot energy with
//! `<psi|H|psi> + core` evaluated on the dense fixed-weight basis.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;
use serde::Serialize;

use crate::code::{build_lookup, search_minimal_qubits, SubspaceCode};
use crate::error::Result;
use crate::fed::EncodedHamiltonian;
use crate::fermion::FermionHamiltonian;
use crate::gf2::BitVec;
use crate::sim::{Shots, StateVector};

/// Decoded-versus-oracle tolerance per trial.
pub const ORACLE_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Clone, Copy)]
pub struct SelftestConfig {
    pub modes: usize,
    pub electrons: usize,
    pub trials: usize,
    pub seed: u64,
    /// Deliberately flip one decoded sign per trial; the harness must then
    /// report failures. Exists to prove the check has teeth.
    pub inject_sign_fault: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct SelftestOutcome {
    pub modes: usize,
    pub electrons: usize,
    pub trials_run: usize,
    pub passes: usize,
    pub failures: Vec<String>,
    pub max_abs_error: f64,
    /// No physical states exist for this (modes, electrons); nothing to test.
    pub vacuous: bool,
}

impl SelftestOutcome {
    pub fn all_passed(&self) -> bool {
        self.failures.is_empty()
    }
}

/// Random Hermitian particle-conserving Hamiltonian with dense one-body and
/// sparse two-body content.
pub fn random_hamiltonian(
    modes: usize,
    electrons: usize,
    rng: &mut impl Rng,
) -> FermionHamiltonian {
    let mut h = FermionHamiltonian::new(modes, electrons, rng.gen_range(-1.0..1.0));
    for i in 1..=modes {
        for j in i..=modes {
            if i == j || rng.gen_bool(0.7) {
                h.set_one_body(i, j, rng.gen_range(-1.0..1.0)).unwrap();
            }
        }
    }
    for _ in 0..3 * modes {
        let idx: Vec<usize> = (0..4).map(|_| rng.gen_range(1..=modes)).collect();
        h.set_two_body(idx[0], idx[1], idx[2], idx[3], rng.gen_range(-1.0..1.0))
            .unwrap();
    }
    h
}

/// Random normalized state on the encoded physical subspace. Returns the
/// amplitudes in dense-basis order and the register state carrying them.
pub fn random_physical_state(
    hamiltonian: &FermionHamiltonian,
    code: &SubspaceCode,
    rng: &mut impl Rng,
) -> Result<(Vec<Complex64>, StateVector)> {
    let basis = hamiltonian.dense_basis()?;
    let mut amps: Vec<Complex64> = basis
        .iter()
        .map(|_| Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
        .collect();
    let norm = amps.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
    for a in &mut amps {
        *a /= norm;
    }
    let parts: Vec<(BitVec, Complex64)> = basis
        .iter()
        .zip(&amps)
        .map(|(b, &a)| Ok((code.encode(b)?, a)))
        .collect::<Result<_>>()?;
    let state = StateVector::superposition(code.qubits(), &parts)?;
    Ok((amps, state))
}

/// Code for one trial: a randomized compressed encoder when `M > 2N`, the
/// identity encoder otherwise or when the search comes up empty.
pub fn trial_code(modes: usize, electrons: usize, rle_seed: u64) -> Result<SubspaceCode> {
    if modes > 2 * electrons {
        if let Some(code) = search_minimal_qubits(modes, electrons, rle_seed, 300)?.code {
            return Ok(code);
        }
    }
    Ok(SubspaceCode::identity(modes, electrons))
}

pub fn run_selftest(config: &SelftestConfig) -> Result<SelftestOutcome> {
    let mut outcome = SelftestOutcome {
        modes: config.modes,
        electrons: config.electrons,
        trials_run: 0,
        passes: 0,
        failures: Vec::new(),
        max_abs_error: 0.0,
        vacuous: false,
    };
    if config.electrons > config.modes {
        outcome.vacuous = true;
        return Ok(outcome);
    }

    for trial in 0..config.trials {
        let mut rng = ChaCha12Rng::seed_from_u64(config.seed);
        rng.set_stream(trial as u64);

        let code = trial_code(config.modes, config.electrons, rng.gen())?;
        let hamiltonian = random_hamiltonian(config.modes, config.electrons, &mut rng);
        let decoder = build_lookup(&code)?;
        let mut compiled = EncodedHamiltonian::compile(&hamiltonian, &code)?;
        if config.inject_sign_fault {
            compiled = flip_first_sign(compiled);
        }
        let (amps, state) = random_physical_state(&hamiltonian, &code, &mut rng)?;

        let decoded = compiled.evaluate(&state, &code, &decoder, Shots::Exact)?;
        let oracle = hamiltonian.expectation(&amps)?;
        let error = (decoded - oracle).abs();
        outcome.trials_run += 1;
        outcome.max_abs_error = outcome.max_abs_error.max(error);
        if error <= ORACLE_TOLERANCE {
            outcome.passes += 1;
        } else {
            outcome.failures.push(format!(
                "trial {trial}: decoded {decoded:.12} vs oracle {oracle:.12} (|diff| = {error:.3e}, Q = {})",
                code.qubits()
            ));
        }
    }
    Ok(outcome)
}

/// The hidden mutation hook: negate the base sign of the first term.
fn flip_first_sign(compiled: EncodedHamiltonian) -> EncodedHamiltonian {
    let mut compiled = compiled;
    compiled.flip_first_term_sign();
    compiled
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn small_grids_pass() {
        for (m, n) in [(2, 1), (4, 1), (4, 2), (5, 2)] {
            let outcome = run_selftest(&SelftestConfig {
                modes: m,
                electrons: n,
                trials: 8,
                seed: 1,
                inject_sign_fault: false,
            })
            .unwrap();
            assert!(outcome.all_passed(), "({m},{n}): {:?}", outcome.failures);
            assert_eq!(outcome.passes, 8);
            assert!(outcome.max_abs_error <= ORACLE_TOLERANCE);
        }
    }

    #[test]
    fn injected_sign_fault_is_detected() {
        let outcome = run_selftest(&SelftestConfig {
            modes: 4,
            electrons: 2,
            trials: 6,
            seed: 3,
            inject_sign_fault: true,
        })
        .unwrap();
        assert!(!outcome.all_passed(), "fault went undetected");
    }

    #[test]
    fn impossible_electron_count_is_vacuous() {
        let outcome = run_selftest(&SelftestConfig {
            modes: 2,
            electrons: 3,
            trials: 5,
            seed: 0,
            inject_sign_fault: false,
        })
        .unwrap();
        assert!(outcome.vacuous);
        assert_eq!(outcome.trials_run, 0);
    }

    #[test]
    fn single_state_subspace_still_checks() {
        let outcome = run_selftest(&SelftestConfig {
            modes: 2,
            electrons: 2,
            trials: 4,
            seed: 0,
            inject_sign_fault: false,
        })
        .unwrap();
        assert!(outcome.all_passed(), "{:?}", outcome.failures);
        assert_eq!(outcome.trials_run, 4);
    }
}

//! Dense state-vector simulation of the compressed register.
//!
//! Basis labels render with qubit 0 as the leftmost bit, matching the GF(2)
//! convention everywhere else: basis index `i` carries qubit `q` at bit
//! `Q - 1 - q`.

use std::collections::BTreeMap;
use std::f64::consts::FRAC_1_SQRT_2;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;

use crate::code::SubspaceCode;
use crate::encoding::{MeasurementBasis, PivotRotation};
use crate::error::{Error, Result};
use crate::gf2::BitVec;

/// Dense simulation is capped at this many qubits.
pub const MAX_SIM_QUBITS: usize = 20;

/// Histogram entries below this probability are dropped.
const PROB_FLOOR: f64 = 1e-16;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Gate {
    X(usize),
    Ry(usize, f64),
    H(usize),
    Sdg(usize),
    Cnot(usize, usize),
}

/// How a distribution is extracted from a state.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Shots {
    /// Exact Born probabilities.
    Exact,
    /// Multinomial sample with a fixed seed.
    Sampled { shots: u64, seed: u64 },
}

/// A normalized complex amplitude vector over `2^Q` basis states.
#[derive(Debug, Clone, PartialEq)]
pub struct StateVector {
    qubits: usize,
    amps: Vec<Complex64>,
}

impl StateVector {
    /// `|0...0>`.
    pub fn zero_state(qubits: usize) -> Result<Self> {
        if qubits == 0 || qubits > MAX_SIM_QUBITS {
            return Err(Error::InvalidArgument(format!(
                "dense simulation supports 1..={MAX_SIM_QUBITS} qubits, got {qubits}"
            )));
        }
        let mut amps = vec![Complex64::new(0.0, 0.0); 1 << qubits];
        amps[0] = Complex64::new(1.0, 0.0);
        Ok(Self { qubits, amps })
    }

    /// A computational basis state.
    pub fn computational(label: &BitVec) -> Result<Self> {
        let mut state = Self::zero_state(label.len())?;
        state.amps[0] = Complex64::new(0.0, 0.0);
        state.amps[label.index_msb0()] = Complex64::new(1.0, 0.0);
        Ok(state)
    }

    /// A normalized superposition of computational basis states.
    pub fn superposition(qubits: usize, parts: &[(BitVec, Complex64)]) -> Result<Self> {
        let mut state = Self::zero_state(qubits)?;
        state.amps[0] = Complex64::new(0.0, 0.0);
        for (label, amp) in parts {
            if label.len() != qubits {
                return Err(Error::DimensionMismatch(format!(
                    "label {label} does not fit {qubits} qubits"
                )));
            }
            state.amps[label.index_msb0()] += amp;
        }
        let norm = state.norm();
        if norm < 1e-12 {
            return Err(Error::InvalidArgument("superposition has zero norm".into()));
        }
        for a in &mut state.amps {
            *a /= norm;
        }
        Ok(state)
    }

    pub fn qubits(&self) -> usize {
        self.qubits
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amps
    }

    pub fn amplitude(&self, label: &BitVec) -> Complex64 {
        self.amps[label.index_msb0()]
    }

    pub fn norm(&self) -> f64 {
        self.amps.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt()
    }

    fn check_qubit(&self, q: usize) -> Result<usize> {
        if q >= self.qubits {
            return Err(Error::InvalidArgument(format!(
                "qubit {q} out of range 0..{}",
                self.qubits
            )));
        }
        Ok(1usize << (self.qubits - 1 - q))
    }

    pub fn apply(&mut self, gate: Gate) -> Result<()> {
        match gate {
            Gate::X(q) => {
                let mask = self.check_qubit(q)?;
                for i in 0..self.amps.len() {
                    if i & mask == 0 {
                        self.amps.swap(i, i | mask);
                    }
                }
            }
            Gate::H(q) => {
                let mask = self.check_qubit(q)?;
                for i in 0..self.amps.len() {
                    if i & mask == 0 {
                        let a = self.amps[i];
                        let b = self.amps[i | mask];
                        self.amps[i] = (a + b) * FRAC_1_SQRT_2;
                        self.amps[i | mask] = (a - b) * FRAC_1_SQRT_2;
                    }
                }
            }
            Gate::Sdg(q) => {
                let mask = self.check_qubit(q)?;
                let phase = Complex64::new(0.0, -1.0);
                for i in 0..self.amps.len() {
                    if i & mask != 0 {
                        self.amps[i] *= phase;
                    }
                }
            }
            Gate::Ry(q, theta) => {
                let mask = self.check_qubit(q)?;
                let (sin, cos) = (theta / 2.0).sin_cos();
                for i in 0..self.amps.len() {
                    if i & mask == 0 {
                        let a = self.amps[i];
                        let b = self.amps[i | mask];
                        self.amps[i] = a * cos - b * sin;
                        self.amps[i | mask] = a * sin + b * cos;
                    }
                }
            }
            Gate::Cnot(c, t) => {
                let cmask = self.check_qubit(c)?;
                let tmask = self.check_qubit(t)?;
                if c == t {
                    return Err(Error::InvalidArgument(
                        "CNOT control and target coincide".into(),
                    ));
                }
                for i in 0..self.amps.len() {
                    if i & cmask != 0 && i & tmask == 0 {
                        self.amps.swap(i, i | tmask);
                    }
                }
            }
        }
        Ok(())
    }
}

/// The layered hardware-efficient ansatz: one leading Ry column, then
/// `layers` repetitions of a 1D CNOT chain followed by an Ry column.
#[derive(Debug, Clone, PartialEq)]
pub struct HeaCircuit {
    pub qubits: usize,
    pub layers: usize,
    pub parameters: Vec<f64>,
}

impl HeaCircuit {
    pub fn new(qubits: usize, layers: usize, parameters: Vec<f64>) -> Result<Self> {
        let expected = Self::parameter_count(qubits, layers);
        if parameters.len() != expected {
            return Err(Error::DimensionMismatch(format!(
                "{qubits} qubits with {layers} layers need {expected} parameters, got {}",
                parameters.len()
            )));
        }
        Ok(Self {
            qubits,
            layers,
            parameters,
        })
    }

    /// `Q * (layers + 1)` under the leading-rotation convention.
    pub fn parameter_count(qubits: usize, layers: usize) -> usize {
        qubits * (layers + 1)
    }

    /// `layers * (Q - 1)` on the 1D chain.
    pub fn cnot_count(qubits: usize, layers: usize) -> usize {
        layers * qubits.saturating_sub(1)
    }
}

pub fn run_hea(state: &mut StateVector, circuit: &HeaCircuit) -> Result<()> {
    if state.qubits() != circuit.qubits {
        return Err(Error::DimensionMismatch(format!(
            "circuit on {} qubits applied to a {}-qubit state",
            circuit.qubits,
            state.qubits()
        )));
    }
    let q = circuit.qubits;
    for (i, &theta) in circuit.parameters[..q].iter().enumerate() {
        state.apply(Gate::Ry(i, theta))?;
    }
    for layer in 0..circuit.layers {
        for i in 0..q.saturating_sub(1) {
            state.apply(Gate::Cnot(i, i + 1))?;
        }
        let column = &circuit.parameters[(layer + 1) * q..(layer + 2) * q];
        for (i, &theta) in column.iter().enumerate() {
            state.apply(Gate::Ry(i, theta))?;
        }
    }
    Ok(())
}

/// The encoded reference determinant `|G . occupation>`, prepared with X
/// gates on the set bits of the encoded word.
pub fn prepare_encoded_reference(code: &SubspaceCode, occupation: &BitVec) -> Result<StateVector> {
    if occupation.weight() != code.electrons() {
        return Err(Error::InvalidArgument(format!(
            "occupation {occupation} has weight {}, expected {}",
            occupation.weight(),
            code.electrons()
        )));
    }
    let word = code.encode(occupation)?;
    let mut state = StateVector::zero_state(code.qubits())?;
    for q in word.ones() {
        state.apply(Gate::X(q))?;
    }
    Ok(state)
}

/// Measure a state in a group basis: apply the CNOT network, rotate the
/// pivot, and return the outcome histogram, exact or shot-sampled.
pub fn measure_distribution(
    state: &StateVector,
    basis: &MeasurementBasis,
    shots: Shots,
) -> Result<BTreeMap<BitVec, f64>> {
    let mut rotated = state.clone();
    for &(c, t) in &basis.cnots {
        rotated.apply(Gate::Cnot(c, t))?;
    }
    if let Some(pivot) = basis.pivot {
        match basis.rotation {
            PivotRotation::None => {}
            PivotRotation::Hadamard => rotated.apply(Gate::H(pivot))?,
            PivotRotation::YBasis => {
                rotated.apply(Gate::Sdg(pivot))?;
                rotated.apply(Gate::H(pivot))?;
            }
        }
    }
    let q = rotated.qubits();
    let probs: Vec<f64> = rotated.amps.iter().map(Complex64::norm_sqr).collect();
    let mut hist = BTreeMap::new();
    match shots {
        Shots::Exact => {
            for (idx, &p) in probs.iter().enumerate() {
                if p > PROB_FLOOR {
                    hist.insert(BitVec::from_index_msb0(q, idx), p);
                }
            }
        }
        Shots::Sampled { shots, seed } => {
            if shots == 0 {
                return Err(Error::InvalidArgument("shot count must be positive".into()));
            }
            let mut cumulative = Vec::with_capacity(probs.len());
            let mut acc = 0.0;
            for &p in &probs {
                acc += p;
                cumulative.push(acc);
            }
            let total = acc;
            let mut rng = ChaCha12Rng::seed_from_u64(seed);
            let mut counts = vec![0u64; probs.len()];
            for _ in 0..shots {
                let u: f64 = rng.gen::<f64>() * total;
                let idx = cumulative.partition_point(|&c| c < u).min(probs.len() - 1);
                counts[idx] += 1;
            }
            for (idx, &c) in counts.iter().enumerate() {
                if c > 0 {
                    hist.insert(BitVec::from_index_msb0(q, idx), c as f64 / shots as f64);
                }
            }
        }
    }
    Ok(hist)
}

//! Encoded operators, measurement grouping and Clifford basis synthesis.
//!
//! Pushing an XP term through the encoder `G` turns each supported string
//! `b` into a projector pair `(G b, G(a xor b))` sharing the encoded
//! X-vector `G a`. Terms with equal encoded X-vectors are measurable in one
//! basis: a star of CNOTs rooted at the lowest set bit of `G a` maps the
//! X-vector to a single-qubit X, which one Hadamard (or Y-basis) rotation
//! turns into a computational measurement.

use std::collections::BTreeMap;
use std::fmt;

use serde::Serialize;

use crate::code::SubspaceCode;
use crate::error::{Error, Result};
use crate::fermion::{HermitianPart, XPTerm};
use crate::gf2::{BitMatrix, BitVec};

/// Largest register size [`pauli_expand`] accepts; the expansion is a test
/// oracle, never a production path.
pub const MAX_PAULI_EXPAND_QUBITS: usize = 12;

/// One supported string of a term after encoding.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ProjectorPair {
    /// `G b`.
    pub label: BitVec,
    /// `G (a xor b)`.
    pub conjugate: BitVec,
    /// `s0 * (-1)^(c.b)`.
    pub sign: i8,
}

/// An XP term pushed through the encoder, keeping its fermionic source for
/// decoding.
#[derive(Debug, Clone, PartialEq)]
pub struct EncodedXPTerm {
    pub coefficient: f64,
    /// Encoded X-vector `G a`, the measurement-group key.
    pub x_key: BitVec,
    pub pairs: Vec<ProjectorPair>,
    /// The unencoded term this came from.
    pub source: XPTerm,
}

/// Encode one term: `x_key = G a` and one signed projector pair per
/// supported string.
pub fn encode_term(term: &XPTerm, code: &SubspaceCode) -> Result<EncodedXPTerm> {
    if term.modes() != code.modes() {
        return Err(Error::DimensionMismatch(format!(
            "term acts on {} modes, code encodes {}",
            term.modes(),
            code.modes()
        )));
    }
    let x_key = code.encode(&term.x_vector)?;
    if x_key.is_zero() && !term.x_vector.is_zero() {
        return Err(Error::Domain(format!(
            "transition {} lies in the code kernel; the code violates its distance bound",
            term.x_vector
        )));
    }
    let pairs = term
        .support
        .iter()
        .map(|b| {
            Ok(ProjectorPair {
                label: code.encode(b)?,
                conjugate: code.encode(&b.xor(&term.x_vector))?,
                sign: if term.sign_on(b) < 0.0 { -1 } else { 1 },
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(EncodedXPTerm {
        coefficient: term.coefficient,
        x_key,
        pairs,
        source: term.clone(),
    })
}

/// The single-qubit rotation closing a measurement basis.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum PivotRotation {
    /// Computational-basis measurement (diagonal group).
    None,
    /// Hadamard on the pivot: real part.
    Hadamard,
    /// S-dagger then Hadamard on the pivot: imaginary part.
    YBasis,
}

/// A CNOT network plus pivot rotation diagonalizing one measurement group.
#[derive(Debug, Clone, PartialEq)]
pub struct MeasurementBasis {
    /// CNOT gates as (control, target), 0-based qubit indices.
    pub cnots: Vec<(usize, usize)>,
    /// Action of the network on basis labels.
    pub network: BitMatrix,
    /// Cached inverse, used by the decoder.
    pub network_inv: BitMatrix,
    pub pivot: Option<usize>,
    pub rotation: PivotRotation,
}

/// Build the basis for an encoded X-vector: a star of CNOTs from the pivot
/// (the lowest set bit) to every other set bit, mapping `x_key` to the unit
/// vector at the pivot.
pub fn build_basis(x_key: &BitVec, part: HermitianPart) -> MeasurementBasis {
    let q = x_key.len();
    let Some(pivot) = x_key.first_one() else {
        let identity = BitMatrix::identity(q);
        return MeasurementBasis {
            cnots: Vec::new(),
            network: identity.clone(),
            network_inv: identity,
            pivot: None,
            rotation: PivotRotation::None,
        };
    };
    let cnots: Vec<(usize, usize)> = x_key
        .ones()
        .filter(|&t| t != pivot)
        .map(|t| (pivot, t))
        .collect();
    // CNOT(c, t) on labels: bit t picks up bit c. The star is an involution,
    // but the inverse is computed generically anyway.
    let mut network = BitMatrix::identity(q);
    for &(c, t) in &cnots {
        network.set(t, c, true);
    }
    let network_inv = network.inverted().expect("CNOT networks are invertible");
    debug_assert_eq!(
        network.matvec(x_key).expect("shape"),
        BitVec::unit(q, pivot)
    );
    MeasurementBasis {
        cnots,
        network,
        network_inv,
        pivot: Some(pivot),
        rotation: match part {
            HermitianPart::Re => PivotRotation::Hadamard,
            HermitianPart::Im => PivotRotation::YBasis,
        },
    }
}

/// Terms sharing one encoded X-vector and one measurement basis.
#[derive(Debug, Clone)]
pub struct MeasurementGroup {
    pub x_key: BitVec,
    pub part: HermitianPart,
    pub terms: Vec<EncodedXPTerm>,
    pub basis: MeasurementBasis,
}

/// Group encoded terms by (part, encoded X-vector), lexicographically
/// ordered.
///
/// Distinct unencoded transitions may share one encoded key when the kernel
/// contains an even element equal to their XOR; such terms are genuinely
/// measurable in the shared basis (their strings all commute) and the
/// decoder resolves each term through its own transition, so the merge is
/// kept. Kernels without even elements of weight up to twice the maximum
/// transition weight never merge.
pub fn group_terms(terms: Vec<EncodedXPTerm>) -> Result<Vec<MeasurementGroup>> {
    let mut buckets: BTreeMap<(u8, BitVec), Vec<EncodedXPTerm>> = BTreeMap::new();
    for term in terms {
        let part_rank = match term.source.part {
            HermitianPart::Re => 0,
            HermitianPart::Im => 1,
        };
        buckets
            .entry((part_rank, term.x_key.clone()))
            .or_default()
            .push(term);
    }
    let groups = buckets
        .into_iter()
        .map(|((part_rank, x_key), terms)| {
            let part = if part_rank == 0 {
                HermitianPart::Re
            } else {
                HermitianPart::Im
            };
            MeasurementGroup {
                basis: build_basis(&x_key, part),
                x_key,
                part,
                terms,
            }
        })
        .collect();
    Ok(groups)
}

/// Human/machine-readable group description.
#[derive(Debug, Clone, Serialize)]
pub struct GroupSummary {
    pub x_key: String,
    pub term_count: usize,
    /// CNOTs as (control, target), 1-based.
    pub cnots: Vec<(usize, usize)>,
    /// 1-based pivot qubit, absent for diagonal groups.
    pub pivot: Option<usize>,
    pub rotation: PivotRotation,
}

impl MeasurementGroup {
    pub fn summary(&self) -> GroupSummary {
        GroupSummary {
            x_key: self.x_key.to_string(),
            term_count: self.terms.len(),
            cnots: self
                .basis
                .cnots
                .iter()
                .map(|&(c, t)| (c + 1, t + 1))
                .collect(),
            pivot: self.basis.pivot.map(|p| p + 1),
            rotation: self.basis.rotation,
        }
    }
}

/// A Pauli string in symplectic form.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct PauliString {
    pub x: BitVec,
    pub z: BitVec,
}

impl PauliString {
    pub fn commutes_with(&self, other: &PauliString) -> bool {
        !(self.x.dot(&other.z) ^ self.z.dot(&other.x))
    }

    pub fn len(&self) -> usize {
        self.x.len()
    }

    pub fn is_empty(&self) -> bool {
        self.x.is_empty()
    }
}

impl fmt::Display for PauliString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for i in 0..self.x.len() {
            let c = match (self.x.get(i), self.z.get(i)) {
                (false, false) => 'I',
                (true, false) => 'X',
                (true, true) => 'Y',
                (false, true) => 'Z',
            };
            write!(f, "{c}")?;
        }
        Ok(())
    }
}

/// Exact Pauli decomposition of an encoded term, used as a commutation and
/// matrix oracle at test scale.
///
/// A `Re` term is `kappa/2 * X^x sum_b s(b) (P^v + P^v')`; an `Im` term is
/// the Hermitian operator `kappa/2 * X^x sum_b s(b) (P^v - P^v') / i`. Both
/// expand over `Z^z` with the parity of `x.z` selecting which survives.
pub fn pauli_expand(term: &EncodedXPTerm) -> Result<Vec<(PauliString, f64)>> {
    let q = term.x_key.len();
    if q > MAX_PAULI_EXPAND_QUBITS {
        return Err(Error::InvalidArgument(format!(
            "pauli expansion is capped at {MAX_PAULI_EXPAND_QUBITS} qubits, got {q}"
        )));
    }
    let want_odd = match term.source.part {
        HermitianPart::Re => false,
        HermitianPart::Im => true,
    };
    let scale = term.coefficient * 0.5 * (2.0 / (1u64 << q) as f64);
    let mut acc: BTreeMap<BitVec, f64> = BTreeMap::new();
    for z_idx in 0..1u64 << q {
        let z = BitVec::from_index_msb0(q, z_idx as usize);
        if term.x_key.dot(&z) != want_odd {
            continue;
        }
        let overlap = term
            .x_key
            .ones()
            .filter(|&i| z.get(i))
            .count();
        // X^x Z^z = (-i)^overlap * letters; the extra 1/i for the Im part
        // makes every surviving coefficient real.
        let phase = match term.source.part {
            HermitianPart::Re => {
                if overlap % 4 == 0 {
                    1.0
                } else {
                    -1.0
                }
            }
            HermitianPart::Im => {
                if overlap % 4 == 1 {
                    -1.0
                } else {
                    1.0
                }
            }
        };
        let mut coeff = 0.0;
        for pair in &term.pairs {
            let mut c = f64::from(pair.sign);
            if pair.label.dot(&z) {
                c = -c;
            }
            coeff += c;
        }
        let total = scale * phase * coeff;
        if total.abs() >= 1e-12 {
            *acc.entry(z).or_insert(0.0) += total;
        }
    }
    Ok(acc
        .into_iter()
        .filter(|(_, c)| c.abs() >= 1e-12)
        .map(|(z, c)| {
            (
                PauliString {
                    x: term.x_key.clone(),
                    z,
                },
                c,
            )
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::code::rle_search;
    use crate::fermion::{decompose_term, FermionHamiltonian, LadderOp};
    use nalgebra::DMatrix;
    use num_complex::Complex64;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha12Rng;

    fn bv(s: &str) -> BitVec {
        s.parse().unwrap()
    }

    fn term_from_ops(ops: &[LadderOp], m: usize, n: usize, coeff: f64) -> XPTerm {
        decompose_term(ops, m, n, coeff, HermitianPart::Re).unwrap()
    }

    #[test]
    fn encode_with_identity_matches_unencoded() {
        let code = SubspaceCode::identity(3, 1);
        let term = term_from_ops(&[LadderOp::create(1), LadderOp::annihilate(2)], 3, 1, 1.0);
        let enc = encode_term(&term, &code).unwrap();
        assert_eq!(enc.x_key, term.x_vector);
        assert_eq!(enc.pairs.len(), 1);
        assert_eq!(enc.pairs[0].label, bv("010"));
        assert_eq!(enc.pairs[0].conjugate, bv("100"));
    }

    #[test]
    fn encode_with_compressed_code() {
        let code = rle_search(4, 1, 3, 0, 64).unwrap().unwrap();
        let term = term_from_ops(&[LadderOp::create(1), LadderOp::annihilate(2)], 4, 1, 1.0);
        let enc = encode_term(&term, &code).unwrap();
        // G(1100) is the XOR of the first two identity columns.
        assert_eq!(enc.x_key, bv("110"));
    }

    #[test]
    fn encoded_labels_distinct_on_two_rdm_terms() {
        let code = rle_search(6, 2, 5, 0, 500).unwrap().unwrap();
        let h = full_two_rdm_hamiltonian(6, 2, 7);
        for term in h.re_terms().unwrap() {
            let enc = encode_term(&term, &code).unwrap();
            let mut labels: Vec<_> = enc.pairs.iter().map(|p| p.label.clone()).collect();
            labels.sort();
            labels.dedup();
            assert_eq!(labels.len(), enc.pairs.len());
        }
    }

    #[test]
    fn basis_examples() {
        let basis = build_basis(&bv("100"), HermitianPart::Re);
        assert_eq!(basis.pivot, Some(0));
        assert!(basis.cnots.is_empty());
        assert_eq!(basis.rotation, PivotRotation::Hadamard);

        let basis = build_basis(&bv("110"), HermitianPart::Re);
        assert_eq!(basis.cnots, vec![(0, 1)]);
        assert_eq!(basis.network.matvec(&bv("110")).unwrap(), bv("100"));

        let basis = build_basis(&bv("000"), HermitianPart::Re);
        assert_eq!(basis.pivot, None);
        assert_eq!(basis.rotation, PivotRotation::None);
    }

    #[test]
    fn star_network_pairs_conjugate_labels() {
        // For every label v, the network images of v and v^x differ exactly
        // at the pivot.
        let x = bv("1111");
        let basis = build_basis(&x, HermitianPart::Re);
        assert_eq!(basis.cnots.len(), 3);
        for idx in 0..16 {
            let v = BitVec::from_index_msb0(4, idx);
            let mv = basis.network.matvec(&v).unwrap();
            let mvx = basis.network.matvec(&v.xor(&x)).unwrap();
            let diff = mv.xor(&mvx);
            assert_eq!(diff, BitVec::unit(4, 0));
        }
        // The star is an involution.
        assert_eq!(basis.network, basis.network_inv);
    }

    fn full_two_rdm_hamiltonian(m: usize, n: usize, seed: u64) -> FermionHamiltonian {
        let mut rng = ChaCha12Rng::seed_from_u64(seed);
        let mut h = FermionHamiltonian::new(m, n, 0.0);
        for i in 1..=m {
            for j in i..=m {
                h.set_one_body(i, j, rng.gen_range(-1.0..1.0)).unwrap();
            }
        }
        for i in 1..=m {
            for j in 1..=m {
                for k in 1..=m {
                    for l in 1..=m {
                        if i != j && k != l && h.two_body(i, j, k, l) == 0.0 {
                            h.set_two_body(i, j, k, l, rng.gen_range(-1.0..1.0)).unwrap();
                        }
                    }
                }
            }
        }
        h
    }

    #[test]
    fn group_count_bounds() {
        // Diagonal-only Hamiltonian: a single zero-key group.
        let mut h = FermionHamiltonian::new(4, 2, 0.0);
        for i in 1..=4 {
            h.set_one_body(i, i, -(i as f64)).unwrap();
        }
        let code = SubspaceCode::identity(4, 2);
        let encoded: Vec<_> = h
            .re_terms()
            .unwrap()
            .iter()
            .map(|t| encode_term(t, &code).unwrap())
            .collect();
        let groups = group_terms(encoded).unwrap();
        assert_eq!(groups.len(), 1);
        assert!(groups[0].x_key.is_zero());

        // Full 2-RDM term set on 4 modes: at most 1 + C(4,2) + C(4,4).
        let h = full_two_rdm_hamiltonian(4, 2, 3);
        let terms = h.re_terms().unwrap();
        let encoded: Vec<_> = terms
            .iter()
            .map(|t| encode_term(t, &code).unwrap())
            .collect();
        let groups = group_terms(encoded).unwrap();
        assert!(groups.len() <= 1 + 6 + 1);
        // Group count equals the number of distinct unencoded transitions.
        let mut transitions: Vec<_> = terms.iter().map(|t| t.x_vector.clone()).collect();
        transitions.sort();
        transitions.dedup();
        assert_eq!(groups.len(), transitions.len());
        // Groups are sorted by key.
        for w in groups.windows(2) {
            assert!(w[0].x_key < w[1].x_key);
        }
    }

    #[test]
    fn pauli_expand_examples() {
        // Diagonal projector on one qubit: P^0 = (I + Z)/2.
        let code = SubspaceCode::identity(1, 1);
        let mut term = term_from_ops(&[LadderOp::create(1), LadderOp::annihilate(1)], 1, 1, 1.0);
        term.support = vec![bv("0")];
        let enc = EncodedXPTerm {
            coefficient: 1.0,
            x_key: bv("0"),
            pairs: vec![ProjectorPair {
                label: bv("0"),
                conjugate: bv("0"),
                sign: 1,
            }],
            source: term.clone(),
        };
        let _ = code;
        let strings = pauli_expand(&enc).unwrap();
        assert_eq!(strings.len(), 2);
        for (p, c) in &strings {
            assert!((c - 0.5).abs() < 1e-12, "{p} {c}");
        }

        // X (P^0 + P^1) = X.
        let enc = EncodedXPTerm {
            coefficient: 2.0,
            x_key: bv("1"),
            pairs: vec![ProjectorPair {
                label: bv("0"),
                conjugate: bv("1"),
                sign: 1,
            }],
            source: XPTerm {
                coefficient: 2.0,
                x_vector: bv("1"),
                sign_vector: bv("0"),
                global_sign: 1,
                support: vec![bv("0")],
                part: HermitianPart::Re,
            },
        };
        let strings = pauli_expand(&enc).unwrap();
        assert_eq!(strings.len(), 1);
        assert_eq!(strings[0].0.to_string(), "X");
        assert!((strings[0].1 - 1.0).abs() < 1e-12);
    }

    fn pauli_dense(p: &PauliString) -> DMatrix<Complex64> {
        let one = Complex64::new(1.0, 0.0);
        let zero = Complex64::new(0.0, 0.0);
        let mut m = DMatrix::from_element(1, 1, one);
        for i in 0..p.len() {
            let next = match (p.x.get(i), p.z.get(i)) {
                (false, false) => DMatrix::from_row_slice(2, 2, &[one, zero, zero, one]),
                (true, false) => DMatrix::from_row_slice(2, 2, &[zero, one, one, zero]),
                (true, true) => DMatrix::from_row_slice(
                    2,
                    2,
                    &[zero, -Complex64::i(), Complex64::i(), zero],
                ),
                (false, true) => DMatrix::from_row_slice(2, 2, &[one, zero, zero, -one]),
            };
            m = m.kronecker(&next);
        }
        m
    }

    fn encoded_term_dense(term: &EncodedXPTerm) -> DMatrix<Complex64> {
        // Direct projector-sum matrix for the operator the term stands for.
        let q = term.x_key.len();
        let dim = 1usize << q;
        let mut m = DMatrix::from_element(dim, dim, Complex64::new(0.0, 0.0));
        for pair in &term.pairs {
            let v = pair.label.index_msb0();
            let vx = pair.label.xor(&term.x_key).index_msb0();
            let vc = pair.conjugate.index_msb0();
            let vcx = pair.conjugate.xor(&term.x_key).index_msb0();
            let w = 0.5 * term.coefficient * f64::from(pair.sign);
            match term.source.part {
                HermitianPart::Re => {
                    m[(vx, v)] += Complex64::new(w, 0.0);
                    m[(vcx, vc)] += Complex64::new(w, 0.0);
                }
                HermitianPart::Im => {
                    // (X^x P^v - X^x P^v') / i
                    m[(vx, v)] += Complex64::new(0.0, -w);
                    m[(vcx, vc)] -= Complex64::new(0.0, -w);
                }
            }
        }
        m
    }

    #[test]
    fn pauli_expand_matches_dense_matrix() {
        let mut rng = ChaCha12Rng::seed_from_u64(41);
        for part in [HermitianPart::Re, HermitianPart::Im] {
            for _ in 0..20 {
                let q = rng.gen_range(1..=4);
                let x_key = loop {
                    let v = BitVec::from_index_msb0(q, rng.gen_range(0..1usize << q));
                    if part == HermitianPart::Re || !v.is_zero() {
                        break v;
                    }
                };
                let n_pairs = rng.gen_range(1..=2);
                let mut seen = Vec::new();
                let mut pairs = Vec::new();
                for _ in 0..n_pairs {
                    let label = BitVec::from_index_msb0(q, rng.gen_range(0..1usize << q));
                    if seen.contains(&label) || seen.contains(&label.xor(&x_key)) {
                        continue;
                    }
                    seen.push(label.clone());
                    pairs.push(ProjectorPair {
                        conjugate: label.xor(&x_key),
                        label,
                        sign: if rng.gen() { 1 } else { -1 },
                    });
                }
                if pairs.is_empty() {
                    continue;
                }
                let coefficient = rng.gen_range(-2.0..2.0);
                let enc = EncodedXPTerm {
                    coefficient,
                    x_key: x_key.clone(),
                    pairs,
                    source: XPTerm {
                        coefficient,
                        x_vector: x_key.clone(),
                        sign_vector: BitVec::zeros(q),
                        global_sign: 1,
                        support: Vec::new(),
                        part,
                    },
                };
                let direct = encoded_term_dense(&enc);
                let mut from_paulis =
                    DMatrix::from_element(1usize << q, 1usize << q, Complex64::new(0.0, 0.0));
                for (p, c) in pauli_expand(&enc).unwrap() {
                    from_paulis += pauli_dense(&p) * Complex64::new(c, 0.0);
                }
                let diff = (&direct - &from_paulis)
                    .iter()
                    .map(|c| c.norm())
                    .fold(0.0, f64::max);
                assert!(diff < 1e-10, "part {part:?} diff {diff}");
            }
        }
    }

    #[test]
    fn strings_within_group_commute() {
        let code = rle_search(6, 2, 5, 1, 500).unwrap().unwrap();
        let h = full_two_rdm_hamiltonian(6, 2, 11);
        let encoded: Vec<_> = h
            .re_terms()
            .unwrap()
            .iter()
            .map(|t| encode_term(t, &code).unwrap())
            .collect();
        for group in group_terms(encoded).unwrap() {
            let mut strings = Vec::new();
            for term in &group.terms {
                strings.extend(pauli_expand(term).unwrap().into_iter().map(|(p, _)| p));
            }
            for i in 0..strings.len() {
                for j in i + 1..strings.len() {
                    assert!(
                        strings[i].commutes_with(&strings[j]),
                        "{} vs {}",
                        strings[i],
                        strings[j]
                    );
                }
            }
        }
    }

    #[test]
    fn expansion_guard() {
        let enc = EncodedXPTerm {
            coefficient: 1.0,
            x_key: BitVec::zeros(13),
            pairs: Vec::new(),
            source: XPTerm {
                coefficient: 1.0,
                x_vector: BitVec::zeros(13),
                sign_vector: BitVec::zeros(13),
                global_sign: 1,
                support: Vec::new(),
                part: HermitianPart::Re,
            },
        };
        assert!(pauli_expand(&enc).is_err());
    }
}

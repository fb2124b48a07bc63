//! Second-quantized Hamiltonians on occupation-number bitstrings.
//!
//! Ladder operators act exactly on `M`-bit occupation strings with the
//! Jordan-Wigner sign convention: applying an operator at mode `m` picks up
//! `(-1)^(occupied modes below m)`, mode 1 being the leftmost bit. Every
//! particle-conserving ladder product decomposes into an X-vector `a`, a sign
//! pair `(c, s0)` and a support set: on each supported string `b` the product
//! acts as `s0 * (-1)^(c.b) |a xor b>`.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::Path;

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::combinatorics::{binomial, binomial_usize, for_each_combination};
use crate::error::{Error, Result};
use crate::gf2::{BitMatrix, BitVec};

/// Coefficients smaller than this are dropped after conjugate-pair merging.
pub const COEFF_CUTOFF: f64 = 1e-12;
/// Largest fixed-weight basis the dense diagonalization accepts.
pub const MAX_DENSE_STATES: u64 = 10_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LadderKind {
    Create,
    Annihilate,
}

/// One ladder operator acting on a 1-based mode index.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct LadderOp {
    pub mode: usize,
    pub kind: LadderKind,
}

impl LadderOp {
    pub fn create(mode: usize) -> Self {
        Self {
            mode,
            kind: LadderKind::Create,
        }
    }

    pub fn annihilate(mode: usize) -> Self {
        Self {
            mode,
            kind: LadderKind::Annihilate,
        }
    }
}

/// Apply a ladder product to an occupation string, rightmost operator first.
/// Returns `None` when Pauli exclusion annihilates the state, otherwise the
/// accumulated Jordan-Wigner sign and the resulting string.
pub fn apply_ladder(ops: &[LadderOp], state: &BitVec) -> Result<Option<(i8, BitVec)>> {
    let modes = state.len();
    let mut out = state.clone();
    let mut sign = 1i8;
    for op in ops.iter().rev() {
        if op.mode == 0 || op.mode > modes {
            return Err(Error::ModeOutOfRange {
                mode: op.mode,
                modes,
            });
        }
        let bit = op.mode - 1;
        let occupied = out.get(bit);
        match op.kind {
            LadderKind::Create if occupied => return Ok(None),
            LadderKind::Annihilate if !occupied => return Ok(None),
            _ => {}
        }
        if (0..bit).filter(|&m| out.get(m)).count() % 2 == 1 {
            sign = -sign;
        }
        out.flip(bit);
    }
    Ok(Some((sign, out)))
}

/// Which Hermitian combination a term represents.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum HermitianPart {
    Re,
    Im,
}

/// A ladder product reduced to X-vector, sign data and support.
///
/// With `O` the underlying product, a `Re` term stands for the operator
/// `coefficient * (O + O^dag) / 2` and an `Im` term for
/// `coefficient * (O - O^dag) / (2i)`; both expand over the support as
/// signed projector pairs sharing the single X-vector.
#[derive(Debug, Clone, PartialEq)]
pub struct XPTerm {
    pub coefficient: f64,
    /// XOR mask of the state transition (the X-vector).
    pub x_vector: BitVec,
    /// Parity mask: the sign of the action on `b` is
    /// `global_sign * (-1)^(sign_vector . b)`.
    pub sign_vector: BitVec,
    pub global_sign: i8,
    /// Weight-N strings the product does not annihilate, ascending.
    pub support: Vec<BitVec>,
    pub part: HermitianPart,
}

impl XPTerm {
    pub fn modes(&self) -> usize {
        self.x_vector.len()
    }

    /// `s0 * (-1)^(c.b)` for a supported string.
    pub fn sign_on(&self, state: &BitVec) -> f64 {
        let mut s = f64::from(self.global_sign);
        if self.sign_vector.dot(state) {
            s = -s;
        }
        s
    }

    pub fn supports(&self, state: &BitVec) -> bool {
        self.support.binary_search(state).is_ok()
    }
}

/// Decompose a particle-conserving ladder product acting on the weight-`N`
/// subspace of `modes` modes.
///
/// The X-vector collects the odd-multiplicity modes; the support and signs
/// come from [`apply_ladder`] on every weight-`N` string; `(c, s0)` are
/// fitted as a GF(2)-affine form and the fit is rejected if the sign map is
/// not affine-linear.
pub fn decompose_term(
    ops: &[LadderOp],
    modes: usize,
    electrons: usize,
    coefficient: f64,
    part: HermitianPart,
) -> Result<XPTerm> {
    let creates = ops.iter().filter(|o| o.kind == LadderKind::Create).count();
    if 2 * creates != ops.len() {
        return Err(Error::InvalidArgument(
            "ladder product is not particle-conserving".into(),
        ));
    }
    let mut x_vector = BitVec::zeros(modes);
    for op in ops {
        if op.mode == 0 || op.mode > modes {
            return Err(Error::ModeOutOfRange {
                mode: op.mode,
                modes,
            });
        }
        x_vector.flip(op.mode - 1);
    }

    let mut actions: Vec<(BitVec, i8)> = Vec::new();
    for_each_combination(modes, electrons, |indices| {
        let b = BitVec::from_indices(modes, indices);
        if let Some((sign, image)) = apply_ladder(ops, &b).expect("modes validated") {
            debug_assert_eq!(image, b.xor(&x_vector));
            actions.push((b, sign));
        }
        true
    });
    actions.sort_unstable_by(|a, b| a.0.cmp(&b.0));
    let support: Vec<BitVec> = actions.iter().map(|(b, _)| b.clone()).collect();
    let signs: Vec<i8> = actions.iter().map(|(_, s)| *s).collect();

    let (sign_vector, global_sign) = if support.is_empty() {
        (BitVec::zeros(modes), 1)
    } else {
        fit_affine_signs(&support, &signs, modes)?
    };

    Ok(XPTerm {
        coefficient,
        x_vector,
        sign_vector,
        global_sign,
        support,
        part,
    })
}

/// Solve for `(c, s0)` with `sign(b) = s0 * (-1)^(c.b)` over GF(2). The
/// system is `[b | 1] . (c, e) = t(b)` with `t = 0` for `+1` and `1` for
/// `-1`; free variables are fixed to zero, so the fit is reproducible.
fn fit_affine_signs(support: &[BitVec], signs: &[i8], modes: usize) -> Result<(BitVec, i8)> {
    let rows: Vec<BitVec> = support
        .iter()
        .map(|b| {
            let mut row = BitVec::zeros(modes + 1);
            for i in b.ones() {
                row.set(i, true);
            }
            row.set(modes, true);
            row
        })
        .collect();
    let target = BitVec::from_bools(&signs.iter().map(|&s| s < 0).collect::<Vec<_>>());
    let system = BitMatrix::from_rows(rows);
    let Some(solution) = system.solve_affine(&target)? else {
        return Err(Error::SignNotAffine);
    };
    let mut sign_vector = BitVec::zeros(modes);
    for i in solution.ones().filter(|&i| i < modes) {
        sign_vector.set(i, true);
    }
    let global_sign = if solution.get(modes) { -1 } else { 1 };
    Ok((sign_vector, global_sign))
}

/// A second-quantized Hamiltonian with real coefficients.
///
/// Both coefficient maps are stored fully expanded and Hermitian-complete:
/// `h[(i,j)] == h[(j,i)]` and `g[(i,j,k,l)] == g[(l,k,j,i)]` always hold, so
/// iterating the raw maps reproduces the operator sum term by term.
#[derive(Debug, Clone, PartialEq)]
pub struct FermionHamiltonian {
    modes: usize,
    electrons: usize,
    core_energy: f64,
    one_body: BTreeMap<(usize, usize), f64>,
    two_body: BTreeMap<(usize, usize, usize, usize), f64>,
}

fn conj4(t: (usize, usize, usize, usize)) -> (usize, usize, usize, usize) {
    (t.3, t.2, t.1, t.0)
}

impl FermionHamiltonian {
    pub fn new(modes: usize, electrons: usize, core_energy: f64) -> Self {
        Self {
            modes,
            electrons,
            core_energy,
            one_body: BTreeMap::new(),
            two_body: BTreeMap::new(),
        }
    }

    pub fn modes(&self) -> usize {
        self.modes
    }

    pub fn electrons(&self) -> usize {
        self.electrons
    }

    pub fn core_energy(&self) -> f64 {
        self.core_energy
    }

    fn check_mode(&self, mode: usize) -> Result<()> {
        if mode == 0 || mode > self.modes {
            return Err(Error::ModeOutOfRange {
                mode,
                modes: self.modes,
            });
        }
        Ok(())
    }

    /// Set `h_ij = h_ji = value`.
    pub fn set_one_body(&mut self, i: usize, j: usize, value: f64) -> Result<()> {
        self.check_mode(i)?;
        self.check_mode(j)?;
        self.one_body.insert((i, j), value);
        self.one_body.insert((j, i), value);
        Ok(())
    }

    /// Set `g_ijkl = g_lkji = value`.
    pub fn set_two_body(&mut self, i: usize, j: usize, k: usize, l: usize, value: f64) -> Result<()> {
        for m in [i, j, k, l] {
            self.check_mode(m)?;
        }
        self.two_body.insert((i, j, k, l), value);
        self.two_body.insert((l, k, j, i), value);
        Ok(())
    }

    pub fn one_body(&self, i: usize, j: usize) -> f64 {
        self.one_body.get(&(i, j)).copied().unwrap_or(0.0)
    }

    pub fn two_body(&self, i: usize, j: usize, k: usize, l: usize) -> f64 {
        self.two_body.get(&(i, j, k, l)).copied().unwrap_or(0.0)
    }

    pub fn term_count(&self) -> usize {
        self.one_body.len() + self.two_body.len()
    }

    /// Decompose into merged real-part XP terms: Hermitian-conjugate pairs
    /// collapse into one term of doubled coefficient, empty-support and
    /// below-cutoff terms are dropped.
    pub fn re_terms(&self) -> Result<Vec<XPTerm>> {
        let mut terms = Vec::new();
        for (&(i, j), &v) in &self.one_body {
            if (j, i) < (i, j) {
                continue;
            }
            let coefficient = if i == j { v } else { 2.0 * v };
            if coefficient.abs() < COEFF_CUTOFF {
                continue;
            }
            let ops = [LadderOp::create(i), LadderOp::annihilate(j)];
            let term =
                decompose_term(&ops, self.modes, self.electrons, coefficient, HermitianPart::Re)?;
            if !term.support.is_empty() {
                terms.push(term);
            }
        }
        for (&t, &v) in &self.two_body {
            if conj4(t) < t {
                continue;
            }
            let coefficient = if conj4(t) == t { v } else { 2.0 * v };
            if coefficient.abs() < COEFF_CUTOFF {
                continue;
            }
            let (i, j, k, l) = t;
            let ops = [
                LadderOp::create(i),
                LadderOp::create(j),
                LadderOp::annihilate(k),
                LadderOp::annihilate(l),
            ];
            let term =
                decompose_term(&ops, self.modes, self.electrons, coefficient, HermitianPart::Re)?;
            if !term.support.is_empty() {
                terms.push(term);
            }
        }
        Ok(terms)
    }

    /// The weight-`N` basis in enumeration order together with the index of
    /// each string.
    pub fn dense_basis(&self) -> Result<Vec<BitVec>> {
        let states = binomial(self.modes, self.electrons);
        if states > MAX_DENSE_STATES.into() {
            return Err(Error::InvalidArgument(format!(
                "dense basis needs C({}, {}) = {states} states, above the {MAX_DENSE_STATES} cap",
                self.modes, self.electrons
            )));
        }
        let mut basis = Vec::with_capacity(binomial_usize(self.modes, self.electrons));
        for_each_combination(self.modes, self.electrons, |indices| {
            basis.push(BitVec::from_indices(self.modes, indices));
            true
        });
        Ok(basis)
    }

    /// The Hamiltonian matrix on the weight-`N` basis, built by applying
    /// every raw ladder term to every basis string. Excludes `core_energy`.
    pub fn dense_matrix(&self) -> Result<(Vec<BitVec>, DMatrix<f64>)> {
        let basis = self.dense_basis()?;
        let index: BTreeMap<&BitVec, usize> =
            basis.iter().enumerate().map(|(i, b)| (b, i)).collect();
        let dim = basis.len();
        let mut mat = DMatrix::<f64>::zeros(dim, dim);
        for (col, b) in basis.iter().enumerate() {
            for (&(i, j), &v) in &self.one_body {
                if v == 0.0 {
                    continue;
                }
                let ops = [LadderOp::create(i), LadderOp::annihilate(j)];
                if let Some((sign, image)) = apply_ladder(&ops, b)? {
                    mat[(index[&image], col)] += v * f64::from(sign);
                }
            }
            for (&(i, j, k, l), &v) in &self.two_body {
                if v == 0.0 {
                    continue;
                }
                let ops = [
                    LadderOp::create(i),
                    LadderOp::create(j),
                    LadderOp::annihilate(k),
                    LadderOp::annihilate(l),
                ];
                if let Some((sign, image)) = apply_ladder(&ops, b)? {
                    mat[(index[&image], col)] += v * f64::from(sign);
                }
            }
        }
        Ok((basis, mat))
    }

    /// Ground-state energy from exact diagonalization on the weight-`N`
    /// basis, including `core_energy`.
    pub fn exact_ground_energy(&self) -> Result<f64> {
        let (basis, mat) = self.dense_matrix()?;
        if basis.is_empty() {
            return Err(Error::Domain(format!(
                "no weight-{} states on {} modes",
                self.electrons, self.modes
            )));
        }
        let eigen = mat.symmetric_eigen();
        let min = eigen.eigenvalues.iter().copied().fold(f64::INFINITY, f64::min);
        Ok(min + self.core_energy)
    }

    /// `<psi|H|psi> + core` for a normalized amplitude vector over
    /// [`FermionHamiltonian::dense_basis`] order. The independent oracle for
    /// decoded energies.
    pub fn expectation(&self, amplitudes: &[Complex64]) -> Result<f64> {
        let (basis, mat) = self.dense_matrix()?;
        if amplitudes.len() != basis.len() {
            return Err(Error::DimensionMismatch(format!(
                "expectation: {} amplitudes for a basis of {}",
                amplitudes.len(),
                basis.len()
            )));
        }
        let mut acc = Complex64::new(0.0, 0.0);
        for (row, ai) in amplitudes.iter().enumerate() {
            for (col, aj) in amplitudes.iter().enumerate() {
                let m = mat[(row, col)];
                if m != 0.0 {
                    acc += ai.conj() * aj * m;
                }
            }
        }
        Ok(acc.re + self.core_energy)
    }

    /// Parse the native Hamiltonian text format.
    ///
    /// Line 1 `MODES <M>`, line 2 `ELECTRONS <N>`, line 3 `ECORE <float>`,
    /// then any number of `1B i j value` and `2B i j k l value` lines.
    /// `#` begins a comment, indices are 1-based, duplicate entries sum,
    /// and Hermiticity is completed by symmetry; an explicit conflict
    /// (`h_ij != h_ji`) is an error.
    pub fn parse_native(text: &str) -> Result<Self> {
        let mut header: Vec<(usize, Vec<&str>)> = Vec::new();
        let mut body: Vec<(usize, Vec<&str>)> = Vec::new();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let fields: Vec<&str> = line.split_whitespace().collect();
            if header.len() < 3 {
                header.push((lineno + 1, fields));
            } else {
                body.push((lineno + 1, fields));
            }
        }
        if header.len() < 3 {
            return Err(Error::Parse {
                line: text.lines().count().max(1),
                message: "missing MODES / ELECTRONS / ECORE header".into(),
            });
        }
        let modes = parse_header_usize(&header[0], "MODES")?;
        let electrons = parse_header_usize(&header[1], "ELECTRONS")?;
        let ecore = parse_header_f64(&header[2], "ECORE")?;

        let mut one_raw: BTreeMap<(usize, usize), f64> = BTreeMap::new();
        let mut two_raw: BTreeMap<(usize, usize, usize, usize), f64> = BTreeMap::new();
        for (line, fields) in body {
            match fields[0] {
                "1B" => {
                    let [i, j] = parse_indices::<2>(&fields[1..], line, modes)?;
                    let v = parse_value(fields.get(3), line)?;
                    ensure_arity(fields.len(), 4, line)?;
                    *one_raw.entry((i, j)).or_insert(0.0) += v;
                }
                "2B" => {
                    let [i, j, k, l] = parse_indices::<4>(&fields[1..], line, modes)?;
                    let v = parse_value(fields.get(5), line)?;
                    ensure_arity(fields.len(), 6, line)?;
                    *two_raw.entry((i, j, k, l)).or_insert(0.0) += v;
                }
                other => {
                    return Err(Error::Parse {
                        line,
                        message: format!("unknown record type {other:?}"),
                    })
                }
            }
        }

        // Hermiticity: complete missing mirrors, reject explicit conflicts.
        let mut h = Self::new(modes, electrons, ecore);
        for (&(i, j), &v) in &one_raw {
            if let Some(&mirror) = one_raw.get(&(j, i)) {
                if (i, j) != (j, i) && (mirror - v).abs() > COEFF_CUTOFF {
                    return Err(Error::Parse {
                        line: 0,
                        message: format!(
                            "non-Hermitian one-body entries: h[{i},{j}]={v} vs h[{j},{i}]={mirror}"
                        ),
                    });
                }
            }
            h.one_body.insert((i, j), v);
            h.one_body.entry((j, i)).or_insert(v);
        }
        for (&t, &v) in &two_raw {
            let c = conj4(t);
            if let Some(&mirror) = two_raw.get(&c) {
                if t != c && (mirror - v).abs() > COEFF_CUTOFF {
                    return Err(Error::Parse {
                        line: 0,
                        message: format!(
                            "non-Hermitian two-body entries: g[{t:?}]={v} vs g[{c:?}]={mirror}"
                        ),
                    });
                }
            }
            h.two_body.insert(t, v);
            h.two_body.entry(c).or_insert(v);
        }
        Ok(h)
    }

    pub fn read_native(path: &Path) -> Result<Self> {
        Self::parse_native(&std::fs::read_to_string(path)?)
    }

    /// Write the native format, one entry per Hermitian pair.
    pub fn to_native_string(&self) -> String {
        let mut out = String::new();
        writeln!(out, "MODES {}", self.modes).unwrap();
        writeln!(out, "ELECTRONS {}", self.electrons).unwrap();
        writeln!(out, "ECORE {}", self.core_energy).unwrap();
        for (&(i, j), &v) in &self.one_body {
            if (j, i) >= (i, j) {
                writeln!(out, "1B {i} {j} {v}").unwrap();
            }
        }
        for (&t, &v) in &self.two_body {
            if conj4(t) >= t {
                let (i, j, k, l) = t;
                writeln!(out, "2B {i} {j} {k} {l} {v}").unwrap();
            }
        }
        out
    }

    pub fn write_native(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_native_string())?;
        Ok(())
    }
}

fn parse_header_usize(entry: &(usize, Vec<&str>), key: &str) -> Result<usize> {
    let (line, fields) = entry;
    if fields.len() != 2 || fields[0] != key {
        return Err(Error::Parse {
            line: *line,
            message: format!("expected `{key} <value>`"),
        });
    }
    fields[1].parse().map_err(|_| Error::Parse {
        line: *line,
        message: format!("invalid {key} value {:?}", fields[1]),
    })
}

fn parse_header_f64(entry: &(usize, Vec<&str>), key: &str) -> Result<f64> {
    let (line, fields) = entry;
    if fields.len() != 2 || fields[0] != key {
        return Err(Error::Parse {
            line: *line,
            message: format!("expected `{key} <value>`"),
        });
    }
    fields[1].parse().map_err(|_| Error::Parse {
        line: *line,
        message: format!("invalid {key} value {:?}", fields[1]),
    })
}

fn parse_indices<const K: usize>(fields: &[&str], line: usize, modes: usize) -> Result<[usize; K]> {
    let mut out = [0usize; K];
    for (slot, field) in out.iter_mut().zip(fields.iter()) {
        *slot = field.parse().map_err(|_| Error::Parse {
            line,
            message: format!("invalid index {field:?}"),
        })?;
        if *slot == 0 || *slot > modes {
            return Err(Error::Parse {
                line,
                message: format!("index {slot} out of range 1..={modes}"),
            });
        }
    }
    if fields.len() < K {
        return Err(Error::Parse {
            line,
            message: format!("expected {K} indices"),
        });
    }
    Ok(out)
}

fn parse_value(field: Option<&&str>, line: usize) -> Result<f64> {
    let Some(field) = field else {
        return Err(Error::Parse {
            line,
            message: "missing coefficient".into(),
        });
    };
    field.parse().map_err(|_| Error::Parse {
        line,
        message: format!("invalid coefficient {field:?}"),
    })
}

fn ensure_arity(found: usize, expected: usize, line: usize) -> Result<()> {
    if found != expected {
        return Err(Error::Parse {
            line,
            message: format!("expected {expected} fields, found {found}"),
        });
    }
    Ok(())
}

//! Particle-conserving linear encoders over GF(2).
//!
//! An encoder is a `Q x M` parity-check matrix `G` that maps every `M`-bit
//! occupation string of Hamming weight `N` to a distinct `Q`-bit word. Two
//! weight-`N` strings collide exactly when their XOR, an even-weight vector,
//! lies in `ker G`; a code is valid iff every even-weight kernel element has
//! weight at least `2N + 2`.
//!
//! [`rle_search`] looks for such codes at random in standard form
//! `G = [I_Q | D]`, with every column of `D` of even Hamming weight near
//! `Q/2`. The dual code `C = [D^T | I_{M-Q}]` generates `ker G`; candidate
//! encoders are first screened on a small set of low-weight kernel probes,
//! then certified by encoding all `C(M, N)` occupation strings and checking
//! for repeats.

use std::collections::HashMap;
use std::time::{Duration, Instant};

use num_bigint::BigUint;
use rand::seq::index::sample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::combinatorics::{binomial, bit_length, ceil_log2, for_each_combination};
use crate::error::{Error, Result};
use crate::gf2::{BitMatrix, BitVec};

/// Largest basis the lookup decoder and exhaustive injectivity check accept.
pub const MAX_LOOKUP_STATES: u64 = 10_000_000;
/// Largest kernel dimension enumerated exhaustively during verification.
pub const MAX_EXHAUSTIVE_KERNEL_DIM: usize = 24;

const ARTIFACT_FORMAT_VERSION: u32 = 1;

/// A certified particle-conserving linear encoder.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SubspaceCode {
    modes: usize,
    electrons: usize,
    qubits: usize,
    aux_qubits: usize,
    seed: u64,
    generator: BitMatrix,
    generator_t: BitMatrix,
    dual: BitMatrix,
}

impl SubspaceCode {
    /// The trivial `Q = M` encoder; every occupation string maps to itself.
    pub fn identity(modes: usize, electrons: usize) -> Self {
        let generator = BitMatrix::identity(modes);
        Self {
            modes,
            electrons,
            qubits: modes,
            aux_qubits: 0,
            seed: 0,
            generator_t: generator.transposed(),
            dual: BitMatrix::zeros(0, modes),
            generator,
        }
    }

    /// Wrap an explicit generator matrix. The dual code is recomputed as a
    /// kernel basis of `G`; no validity check is performed (see
    /// [`verify_code`]).
    pub fn from_generator(
        generator: BitMatrix,
        electrons: usize,
        seed: u64,
        aux_qubits: usize,
    ) -> Result<Self> {
        let modes = generator.cols();
        let qubits = generator.rows();
        if qubits > modes {
            return Err(Error::InvalidArgument(format!(
                "generator has more rows ({qubits}) than columns ({modes})"
            )));
        }
        let kernel = generator.kernel_basis();
        let dual = if kernel.is_empty() {
            BitMatrix::zeros(0, modes)
        } else {
            BitMatrix::from_rows(kernel)
        };
        Ok(Self {
            modes,
            electrons,
            qubits,
            aux_qubits,
            seed,
            generator_t: generator.transposed(),
            dual,
            generator,
        })
    }

    pub fn modes(&self) -> usize {
        self.modes
    }

    pub fn electrons(&self) -> usize {
        self.electrons
    }

    pub fn qubits(&self) -> usize {
        self.qubits
    }

    pub fn aux_qubits(&self) -> usize {
        self.aux_qubits
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn generator(&self) -> &BitMatrix {
        &self.generator
    }

    /// Dual code `C` with `G C^T = 0`; its row space generates `ker G`.
    pub fn dual(&self) -> &BitMatrix {
        &self.dual
    }

    /// Encode an `M`-bit vector to its `Q`-bit word by XOR of the generator
    /// columns selected by the set bits.
    pub fn encode(&self, state: &BitVec) -> Result<BitVec> {
        if state.len() != self.modes {
            return Err(Error::DimensionMismatch(format!(
                "encode: state length {} != modes {}",
                state.len(),
                self.modes
            )));
        }
        let mut word = BitVec::zeros(self.qubits);
        for i in state.ones() {
            word.xor_assign(self.generator_t.row(i));
        }
        Ok(word)
    }

    /// Serialize to the code-artifact JSON schema. The lookup table is never
    /// persisted; it is rebuilt on load.
    pub fn to_artifact_json(&self) -> String {
        let artifact = CodeArtifact {
            format_version: ARTIFACT_FORMAT_VERSION,
            modes: self.modes,
            electrons: self.electrons,
            qubits: self.qubits,
            aux_qubits: self.aux_qubits,
            seed: self.seed,
            generator_rows: self.generator.row_iter().map(BitVec::to_string).collect(),
        };
        let mut json = serde_json::to_string_pretty(&artifact).expect("artifact serializes");
        json.push('\n');
        json
    }

    pub fn from_artifact_json(json: &str) -> Result<Self> {
        let artifact: CodeArtifact = serde_json::from_str(json)?;
        if artifact.format_version != ARTIFACT_FORMAT_VERSION {
            return Err(Error::InvalidArgument(format!(
                "unsupported code artifact format_version {}",
                artifact.format_version
            )));
        }
        if artifact.generator_rows.len() != artifact.qubits {
            return Err(Error::InvalidArgument(format!(
                "artifact declares {} qubits but carries {} generator rows",
                artifact.qubits,
                artifact.generator_rows.len()
            )));
        }
        let rows: Vec<BitVec> = artifact
            .generator_rows
            .iter()
            .map(|s| s.parse())
            .collect::<Result<_>>()?;
        if rows.iter().any(|r| r.len() != artifact.modes) {
            return Err(Error::InvalidArgument(
                "generator row length does not match modes".into(),
            ));
        }
        Self::from_generator(
            BitMatrix::from_rows(rows),
            artifact.electrons,
            artifact.seed,
            artifact.aux_qubits,
        )
    }
}

#[derive(Serialize, Deserialize)]
struct CodeArtifact {
    format_version: u32,
    modes: usize,
    electrons: usize,
    qubits: usize,
    aux_qubits: usize,
    seed: u64,
    generator_rows: Vec<String>,
}

/// Qubit-count bounds for an `(M, N)` problem, from the even-subspace
/// Hamming and Gilbert–Varshamov sums.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct QubitBounds {
    /// A code with this many qubits is guaranteed to exist.
    pub gv_qubits: usize,
    /// No valid code exists with fewer qubits than this.
    pub impossibility_qubits: usize,
}

fn even_weight_sum(modes: usize, j_max: usize) -> BigUint {
    (0..=j_max).map(|j| binomial(modes, 2 * j)).sum()
}

/// Both binomial-sum bounds, computed exactly in big-integer arithmetic.
pub fn qubit_bounds(modes: usize, electrons: usize) -> Result<QubitBounds> {
    if electrons < 1 || modes <= 2 * electrons {
        return Err(Error::InvalidArgument(format!(
            "qubit bounds need modes > 2*electrons >= 2, got modes={modes} electrons={electrons}"
        )));
    }
    let gv_qubits = ceil_log2(&even_weight_sum(modes, electrons));
    let impossibility_qubits = bit_length(&even_weight_sum(modes, electrons / 2));
    Ok(QubitBounds {
        gv_qubits,
        impossibility_qubits,
    })
}

/// `ceil(2 N log2 M)`, the qubit-cost ceiling every unaided search result
/// must respect. Computed exactly as `ceil(log2 M^(2N))`.
pub fn qubit_cap(modes: usize, electrons: usize) -> usize {
    ceil_log2(&BigUint::from(modes).pow(2 * electrons as u32))
}

/// Admissible even column weights for `D`, centred on `Q/2`. The window is
/// `[max(2, Q/2 - 1), min(Q, Q/2 + 1)]` so it stays well defined when `Q/2`
/// is odd or fractional.
fn column_weight_candidates(qubits: usize) -> Vec<usize> {
    let lo2 = 4.max(qubits.saturating_sub(2)); // 2 * lower bound
    let hi2 = (2 * qubits).min(qubits + 2); // 2 * upper bound
    (1..=qubits)
        .filter(|w| w % 2 == 0 && 2 * w >= lo2 && 2 * w <= hi2)
        .collect()
}

struct RleProblem {
    modes: usize,
    electrons: usize,
    qubits: usize,
    weight_candidates: Vec<usize>,
}

impl RleProblem {
    /// One randomized attempt: sample `D`, screen low-weight kernel probes,
    /// then certify by exhaustive distinct-codeword check.
    fn attempt(&self, seed: u64, stream: u64) -> Option<Vec<BitVec>> {
        let mut rng = ChaCha12Rng::seed_from_u64(seed);
        rng.set_stream(stream);
        let q = self.qubits;
        let tail = self.modes - q;
        let min_even = 2 * self.electrons + 2;

        let mut dcols: Vec<BitVec> = Vec::with_capacity(tail);
        for _ in 0..tail {
            let w = self.weight_candidates[rng.gen_range(0..self.weight_candidates.len())];
            let idx = sample(&mut rng, q, w).into_vec();
            dcols.push(BitVec::from_indices(q, &idx));
        }

        // Kernel probes: every weight-2 selector, then random even-weight
        // selectors below the distance target. Selector v yields the kernel
        // element (D v, v).
        for i in 0..tail {
            for j in i + 1..tail {
                if dcols[i].xor(&dcols[j]).weight() + 2 < min_even {
                    return None;
                }
            }
        }
        let k_max = self.electrons.min(tail / 2);
        if k_max >= 1 {
            for _ in 0..4 * tail {
                let k = rng.gen_range(1..=k_max);
                let sel = sample(&mut rng, tail, 2 * k);
                let mut acc = BitVec::zeros(q);
                for s in sel {
                    acc.xor_assign(&dcols[s]);
                }
                if acc.weight() + 2 * k < min_even {
                    return None;
                }
            }
        }

        // Exhaustive check: encode every weight-N string and look for repeats.
        let count = crate::combinatorics::binomial_usize(self.modes, self.electrons);
        let mut words: Vec<BitVec> = Vec::with_capacity(count);
        for_each_combination(self.modes, self.electrons, |indices| {
            let mut word = BitVec::zeros(q);
            for &i in indices {
                if i < q {
                    word.flip(i);
                } else {
                    word.xor_assign(&dcols[i - q]);
                }
            }
            words.push(word);
            true
        });
        words.sort_unstable();
        if words.windows(2).any(|w| w[0] == w[1]) {
            return None;
        }
        Some(dcols)
    }

    fn build_code(&self, dcols: Vec<BitVec>, seed: u64, aux_qubits: usize) -> SubspaceCode {
        let q = self.qubits;
        let tail = self.modes - q;
        let mut generator = Vec::with_capacity(q);
        for r in 0..q {
            let mut row = BitVec::zeros(self.modes);
            row.set(r, true);
            for (c, col) in dcols.iter().enumerate() {
                if col.get(r) {
                    row.set(q + c, true);
                }
            }
            generator.push(row);
        }
        // Dual code C = [D^T | I], the generator of ker G.
        let mut dual = Vec::with_capacity(tail);
        for (c, col) in dcols.iter().enumerate() {
            let mut row = BitVec::zeros(self.modes);
            for r in col.ones() {
                row.set(r, true);
            }
            row.set(q + c, true);
            dual.push(row);
        }
        let generator = BitMatrix::from_rows(generator);
        SubspaceCode {
            modes: self.modes,
            electrons: self.electrons,
            qubits: q,
            aux_qubits,
            seed,
            generator_t: generator.transposed(),
            dual: if tail == 0 {
                BitMatrix::zeros(0, self.modes)
            } else {
                BitMatrix::from_rows(dual)
            },
            generator,
        }
    }
}

fn check_rle_preconditions(modes: usize, electrons: usize, qubits: usize) -> Result<()> {
    if electrons < 1 {
        return Err(Error::InvalidArgument("electrons must be >= 1".into()));
    }
    if modes <= 2 * electrons {
        return Err(Error::InvalidArgument(format!(
            "randomized search needs modes > 2*electrons, got modes={modes} electrons={electrons}"
        )));
    }
    if qubits < 2 || qubits >= modes {
        return Err(Error::InvalidArgument(format!(
            "qubits must satisfy 2 <= qubits < modes, got qubits={qubits} modes={modes}"
        )));
    }
    Ok(())
}

/// Outcome of a randomized search, with the attempt count actually consumed.
#[derive(Debug, Clone)]
pub struct SearchStats {
    pub code: Option<SubspaceCode>,
    pub attempts_used: u64,
}

fn rle_search_range(
    modes: usize,
    electrons: usize,
    qubits: usize,
    seed: u64,
    attempts: std::ops::Range<u64>,
    aux_qubits: usize,
) -> Result<SearchStats> {
    check_rle_preconditions(modes, electrons, qubits)?;
    let problem = RleProblem {
        modes,
        electrons,
        qubits,
        weight_candidates: column_weight_candidates(qubits),
    };
    let first = attempts.start;
    let total = attempts.end - attempts.start;
    // Attempts are independent; the winner is the lowest attempt index.
    let found = (0..usize::try_from(total).expect("attempt budget fits usize"))
        .into_par_iter()
        .with_min_len(8)
        .find_map_first(|k| {
            let i = first + k as u64;
            problem.attempt(seed, i).map(|dcols| (i, dcols))
        });
    Ok(match found {
        Some((i, dcols)) => SearchStats {
            code: Some(problem.build_code(dcols, seed, aux_qubits)),
            attempts_used: i - first + 1,
        },
        None => SearchStats {
            code: None,
            attempts_used: total,
        },
    })
}

/// Randomized linear encoder search at a fixed qubit count. Deterministic for
/// a fixed seed; returns `None` once `max_attempts` candidates have failed.
pub fn rle_search(
    modes: usize,
    electrons: usize,
    qubits: usize,
    seed: u64,
    max_attempts: u64,
) -> Result<Option<SubspaceCode>> {
    Ok(rle_search_stats(modes, electrons, qubits, seed, max_attempts)?.code)
}

/// As [`rle_search`], also reporting how many attempts were consumed.
pub fn rle_search_stats(
    modes: usize,
    electrons: usize,
    qubits: usize,
    seed: u64,
    max_attempts: u64,
) -> Result<SearchStats> {
    rle_search_range(modes, electrons, qubits, seed, 0..max_attempts, 0)
}

/// Randomized search with `extra` auxiliary qubits on top of `base_qubits`.
/// Success probability is non-decreasing in `extra` (a statistical property,
/// benchmarked rather than asserted per call).
pub fn rle_with_aux(
    modes: usize,
    electrons: usize,
    base_qubits: usize,
    extra: usize,
    seed: u64,
    attempts_per_level: u64,
) -> Result<Option<SubspaceCode>> {
    Ok(rle_with_aux_stats(modes, electrons, base_qubits, extra, seed, attempts_per_level)?.code)
}

/// As [`rle_with_aux`], also reporting how many attempts were consumed.
pub fn rle_with_aux_stats(
    modes: usize,
    electrons: usize,
    base_qubits: usize,
    extra: usize,
    seed: u64,
    attempts_per_level: u64,
) -> Result<SearchStats> {
    let qubits = base_qubits + extra;
    if qubits >= modes {
        return Err(Error::InvalidArgument(format!(
            "compression degenerate: base qubits {base_qubits} + extra {extra} >= modes {modes}"
        )));
    }
    rle_search_range(modes, electrons, qubits, seed, 0..attempts_per_level, extra)
}

/// Result of the ascending minimal-qubit search.
#[derive(Debug, Clone)]
pub struct MinimalSearch {
    pub code: Option<SubspaceCode>,
    pub attempts_used: u64,
    pub first_level: usize,
    pub cap: usize,
}

/// Search for the smallest workable qubit count: ascend from two below the
/// guaranteed level (floored at the impossibility bound) up to
/// `min(M - 1, ceil(2N log2 M))`, spending the full attempt budget per level.
pub fn search_minimal_qubits(
    modes: usize,
    electrons: usize,
    seed: u64,
    attempts_per_level: u64,
) -> Result<MinimalSearch> {
    search_minimal_qubits_aux(modes, electrons, 0, seed, attempts_per_level)
}

/// As [`search_minimal_qubits`], with `extra` auxiliary qubits added on top
/// of every schedule level.
pub fn search_minimal_qubits_aux(
    modes: usize,
    electrons: usize,
    extra: usize,
    seed: u64,
    attempts_per_level: u64,
) -> Result<MinimalSearch> {
    let bounds = qubit_bounds(modes, electrons)?;
    let start = bounds
        .gv_qubits
        .saturating_sub(2)
        .max(bounds.impossibility_qubits)
        .max(2);
    let cap = (modes - 1).min(qubit_cap(modes, electrons) + extra);
    let mut attempts_used = 0;
    for base in start..=cap {
        let q = base + extra;
        if q >= modes {
            break;
        }
        let stats = rle_search_range(modes, electrons, q, seed, 0..attempts_per_level, extra)?;
        attempts_used += stats.attempts_used;
        if stats.code.is_some() {
            return Ok(MinimalSearch {
                code: stats.code,
                attempts_used,
                first_level: start,
                cap,
            });
        }
    }
    Ok(MinimalSearch {
        code: None,
        attempts_used,
        first_level: start,
        cap,
    })
}

/// One verification check: passed, failed with a counterexample, or skipped
/// because the instance is too large for the exhaustive procedure. A skipped
/// check never counts as passed.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub enum CheckOutcome {
    Passed,
    Failed(String),
    Skipped(String),
}

impl CheckOutcome {
    pub fn passed(&self) -> bool {
        matches!(self, CheckOutcome::Passed)
    }
}

/// Report from [`verify_code`]; the code is valid iff all three checks pass.
#[derive(Debug, Clone, Serialize)]
pub struct CodeReport {
    /// `G C^T = 0`.
    pub duality: CheckOutcome,
    /// Exhaustive scan of `ker G`: every even-weight element has weight
    /// `>= 2N + 2`.
    pub even_kernel: CheckOutcome,
    /// All `C(M, N)` occupation strings encode to distinct words.
    pub injectivity: CheckOutcome,
    /// Smallest even kernel weight seen, when the scan ran and found any.
    pub min_even_kernel_weight: Option<usize>,
}

impl CodeReport {
    pub fn is_valid(&self) -> bool {
        self.duality.passed() && self.even_kernel.passed() && self.injectivity.passed()
    }
}

/// Certify a code: duality, exhaustive even-kernel distance, and injectivity
/// on the weight-`N` subspace.
pub fn verify_code(code: &SubspaceCode) -> CodeReport {
    let min_even = 2 * code.electrons + 2;

    let duality = if code.dual.rows() == 0
        || code.generator.matmul(&code.dual.transposed()).is_zero()
    {
        CheckOutcome::Passed
    } else {
        CheckOutcome::Failed("G * C^T != 0".into())
    };

    let kernel = code.generator.kernel_basis();
    let mut min_even_weight = None;
    let even_kernel = if kernel.len() > MAX_EXHAUSTIVE_KERNEL_DIM {
        CheckOutcome::Skipped(format!(
            "kernel dimension {} exceeds exhaustive limit {}",
            kernel.len(),
            MAX_EXHAUSTIVE_KERNEL_DIM
        ))
    } else {
        // Gray-code walk over the kernel span: one basis XOR per element.
        let mut current = BitVec::zeros(code.modes);
        let mut violation = None;
        for g in 1u64..1u64 << kernel.len() {
            let flip = g.trailing_zeros() as usize;
            current.xor_assign(&kernel[flip]);
            let w = current.weight();
            if w.is_multiple_of(2) {
                min_even_weight = Some(min_even_weight.map_or(w, |m: usize| m.min(w)));
                if w < min_even && violation.is_none() {
                    violation = Some(current.clone());
                }
            }
        }
        match violation {
            Some(k) => CheckOutcome::Failed(format!(
                "kernel element {k} has even weight {} < {min_even}",
                k.weight()
            )),
            None => CheckOutcome::Passed,
        }
    };

    let states = binomial(code.modes, code.electrons);
    let injectivity = if states > BigUint::from(MAX_LOOKUP_STATES) {
        CheckOutcome::Skipped(format!(
            "C({}, {}) = {states} states exceed exhaustive limit {MAX_LOOKUP_STATES}",
            code.modes, code.electrons
        ))
    } else {
        match build_lookup(code) {
            Ok(_) => CheckOutcome::Passed,
            Err(Error::EncoderCollision {
                first,
                second,
                word,
            }) => CheckOutcome::Failed(format!(
                "states {first} and {second} both encode to {word}"
            )),
            Err(e) => CheckOutcome::Failed(e.to_string()),
        }
    };

    CodeReport {
        duality,
        even_kernel,
        injectivity,
        min_even_kernel_weight: min_even_weight,
    }
}

/// The lookup decoder `F`: encoded word back to the unique weight-`N`
/// occupation string, built by a full scan of the physical subspace.
#[derive(Debug, Clone)]
pub struct LookupDecoder {
    electrons: usize,
    table: HashMap<BitVec, BitVec>,
}

impl LookupDecoder {
    pub fn decode(&self, word: &BitVec) -> Option<&BitVec> {
        self.table.get(word)
    }

    pub fn len(&self) -> usize {
        self.table.len()
    }

    pub fn is_empty(&self) -> bool {
        self.table.is_empty()
    }

    pub fn electrons(&self) -> usize {
        self.electrons
    }

    /// Table entries as (word, state), sorted by word for reproducible scans.
    pub fn sorted_entries(&self) -> Vec<(&BitVec, &BitVec)> {
        let mut entries: Vec<_> = self.table.iter().collect();
        entries.sort_unstable_by(|a, b| a.0.cmp(b.0));
        entries
    }
}

/// Build the lookup decoder, failing loudly when two states collide.
pub fn build_lookup(code: &SubspaceCode) -> Result<LookupDecoder> {
    let states = binomial(code.modes, code.electrons);
    if states > BigUint::from(MAX_LOOKUP_STATES) {
        return Err(Error::InvalidArgument(format!(
            "lookup table needs C({}, {}) = {states} entries, above the {MAX_LOOKUP_STATES} cap",
            code.modes, code.electrons
        )));
    }
    let count = crate::combinatorics::binomial_usize(code.modes, code.electrons);
    let mut table = HashMap::with_capacity(count);
    let mut collision = None;
    for_each_combination(code.modes, code.electrons, |indices| {
        let state = BitVec::from_indices(code.modes, indices);
        let mut word = BitVec::zeros(code.qubits);
        for &i in indices {
            word.xor_assign(code.generator_t.row(i));
        }
        if let Some(prev) = table.insert(word.clone(), state.clone()) {
            collision = Some(Error::EncoderCollision {
                first: prev.to_string(),
                second: state.to_string(),
                word: word.to_string(),
            });
            return false;
        }
        true
    });
    match collision {
        Some(err) => Err(err),
        None => Ok(LookupDecoder {
            electrons: code.electrons,
            table,
        }),
    }
}

/// Outcome of the budgeted maximum-modes search for one `(N, Q)` cell.
#[derive(Debug, Clone, Serialize)]
pub struct TableOutcome {
    pub electrons: usize,
    pub qubits: usize,
    /// Largest mode count for which a code was found, if any.
    pub best_modes: Option<usize>,
    pub attempts_used: u64,
    pub budget_exhausted: bool,
    pub elapsed_seconds: f64,
}

/// Ascend the mode count until the randomized search stops succeeding within
/// the time budget or hits `max_modes`. Stops early at modes where the
/// impossibility bound already rules every code out.
pub fn table_search(
    electrons: usize,
    qubits: usize,
    max_modes: usize,
    budget: Duration,
    seed: u64,
) -> Result<TableOutcome> {
    if electrons < 1 {
        return Err(Error::InvalidArgument("electrons must be >= 1".into()));
    }
    let start_modes = (2 * electrons + 1).max(qubits + 1);
    let started = Instant::now();
    let deadline = started + budget;
    let mut best = None;
    let mut attempts_used = 0u64;
    let mut budget_exhausted = false;
    const CHUNK: u64 = 512;

    'modes: for modes in start_modes..=max_modes {
        if qubit_bounds(modes, electrons)?.impossibility_qubits > qubits {
            break;
        }
        let mut offset = 0u64;
        loop {
            if Instant::now() >= deadline {
                budget_exhausted = true;
                break 'modes;
            }
            let stats =
                rle_search_range(modes, electrons, qubits, seed, offset..offset + CHUNK, 0)?;
            attempts_used += stats.attempts_used;
            if stats.code.is_some() {
                best = Some(modes);
                continue 'modes;
            }
            offset += CHUNK;
        }
    }

    Ok(TableOutcome {
        electrons,
        qubits,
        best_modes: best,
        attempts_used,
        budget_exhausted,
        elapsed_seconds: started.elapsed().as_secs_f64(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bounds_examples() {
        let b = qubit_bounds(4, 1).unwrap();
        assert_eq!(b.gv_qubits, 3); // ceil(log2(1 + 6))
        assert_eq!(b.impossibility_qubits, 1);

        let b = qubit_bounds(22, 2).unwrap();
        assert_eq!(b.gv_qubits, 13); // ceil(log2(1 + 231 + 7315))
        assert_eq!(b.impossibility_qubits, 8); // bits(1 + 231)
        assert!(b.impossibility_qubits <= 10); // consistent with a 10-qubit code existing

        assert!(qubit_bounds(4, 2).is_err());
        assert!(qubit_bounds(3, 0).is_err());
    }

    #[test]
    fn gv_respects_qubit_cap() {
        for modes in 3..=24 {
            for electrons in 1..=(modes - 1) / 2 {
                let b = qubit_bounds(modes, electrons).unwrap();
                assert!(
                    b.gv_qubits <= qubit_cap(modes, electrons),
                    "gv {} > cap {} at ({modes}, {electrons})",
                    b.gv_qubits,
                    qubit_cap(modes, electrons)
                );
                assert!(b.gv_qubits >= b.impossibility_qubits);
            }
        }
        assert_eq!(qubit_cap(4, 1), 4);
        assert_eq!(qubit_cap(22, 2), 18);
    }

    #[test]
    fn column_weights_are_even_and_near_half() {
        assert_eq!(column_weight_candidates(2), vec![2]);
        assert_eq!(column_weight_candidates(3), vec![2]);
        assert_eq!(column_weight_candidates(6), vec![2, 4]);
        assert_eq!(column_weight_candidates(7), vec![4]);
        assert_eq!(column_weight_candidates(10), vec![4, 6]);
        for q in 2..40 {
            let c = column_weight_candidates(q);
            assert!(!c.is_empty(), "no admissible weights at Q={q}");
            assert!(c.iter().all(|w| w % 2 == 0 && *w >= 2 && *w <= q));
        }
    }

    #[test]
    fn rle_small_case_is_valid() {
        // M=4, N=1, Q=3: one D column of even weight 2; the single kernel
        // generator (d, 1) has odd weight 3, so no even kernel element
        // exists and all four encodings are distinct.
        for seed in 0..4 {
            let code = rle_search(4, 1, 3, seed, 64).unwrap().expect("code found");
            assert_eq!(code.qubits(), 3);
            let kernel = code.generator().kernel_basis();
            assert_eq!(kernel.len(), 1);
            assert_eq!(kernel[0].weight(), 3);
            assert!(kernel[0].get(3));
            let report = verify_code(&code);
            assert!(report.is_valid(), "{report:?}");
            assert_eq!(report.min_even_kernel_weight, None);
            let mut words: Vec<_> = (0..4)
                .map(|i| code.encode(&BitVec::unit(4, i)).unwrap())
                .collect();
            words.sort();
            words.dedup();
            assert_eq!(words.len(), 4);
        }
    }

    #[test]
    fn rle_is_deterministic_per_seed() {
        let a = rle_search(8, 2, 6, 17, 400).unwrap();
        let b = rle_search(8, 2, 6, 17, 400).unwrap();
        match (a, b) {
            (Some(a), Some(b)) => {
                assert_eq!(a.to_artifact_json(), b.to_artifact_json());
            }
            (a, b) => panic!("searches disagreed: {:?} vs {:?}", a.is_some(), b.is_some()),
        }
    }

    #[test]
    fn rle_preconditions() {
        // modes == 2*electrons is rejected outright.
        assert!(rle_search(4, 2, 3, 0, 10).is_err());
        assert!(rle_search(3, 2, 2, 0, 10).is_err());
        assert!(rle_search(5, 1, 5, 0, 10).is_err()); // qubits >= modes
        assert!(rle_search(5, 0, 3, 0, 10).is_err());
    }

    #[test]
    fn rle_exhausted_returns_none() {
        // M=4, N=1, Q=2 forces both D columns to (1,1); their XOR is a
        // weight-2 even kernel element, so every attempt fails.
        let stats = rle_search_stats(4, 1, 2, 0, 50).unwrap();
        assert!(stats.code.is_none());
        assert_eq!(stats.attempts_used, 50);
    }

    #[test]
    fn even_kernel_distance_holds_on_accepted_codes() {
        for (m, n, q, seed) in [(6, 1, 3, 0), (8, 2, 6, 1), (10, 2, 7, 2), (9, 1, 4, 3)] {
            let Some(code) = rle_search(m, n, q, seed, 3000).unwrap() else {
                panic!("no code at ({m},{n},{q})");
            };
            let report = verify_code(&code);
            assert!(report.is_valid(), "({m},{n},{q}): {report:?}");
            if let Some(w) = report.min_even_kernel_weight {
                assert!(w >= 2 * n + 2);
            }
        }
    }

    #[test]
    fn verify_identity_code() {
        let code = SubspaceCode::identity(5, 2);
        let report = verify_code(&code);
        assert!(report.is_valid());
        assert_eq!(report.min_even_kernel_weight, None);
        assert!(code.generator().kernel_basis().is_empty());
    }

    #[test]
    fn verify_explicit_generator_with_even_kernel() {
        // G = [I3 | (1,1,1)^T] has kernel {1111}: even weight 4 >= 4 for N=1.
        let g = BitMatrix::from_rows(vec![
            "1001".parse().unwrap(),
            "0101".parse().unwrap(),
            "0011".parse().unwrap(),
        ]);
        let code = SubspaceCode::from_generator(g, 1, 0, 0).unwrap();
        let report = verify_code(&code);
        assert!(report.is_valid(), "{report:?}");
        assert_eq!(report.min_even_kernel_weight, Some(4));
    }

    #[test]
    fn verify_detects_weight_two_kernel() {
        // Two equal columns give the weight-2 kernel element 110; the states
        // 100 and 010 collide.
        let g = BitMatrix::from_rows(vec!["110".parse().unwrap(), "001".parse().unwrap()]);
        let code = SubspaceCode::from_generator(g, 1, 0, 0).unwrap();
        let report = verify_code(&code);
        assert!(!report.is_valid());
        assert!(matches!(report.even_kernel, CheckOutcome::Failed(_)));
        match &report.injectivity {
            CheckOutcome::Failed(msg) => {
                assert!(msg.contains("100") && msg.contains("010"), "{msg}");
            }
            other => panic!("expected injectivity failure, got {other:?}"),
        }
    }

    #[test]
    fn lookup_round_trip() {
        let code = SubspaceCode::identity(4, 2);
        let decoder = build_lookup(&code).unwrap();
        assert_eq!(decoder.len(), 6);
        let state: BitVec = "0110".parse().unwrap();
        assert_eq!(decoder.decode(&state), Some(&state));

        let code = rle_search(4, 1, 3, 0, 64).unwrap().unwrap();
        let decoder = build_lookup(&code).unwrap();
        let e4 = BitVec::unit(4, 3);
        let word = code.encode(&e4).unwrap();
        assert_eq!(decoder.decode(&word), Some(&e4));
        // The zero word is G applied to weight 0, absent for N >= 1.
        assert_eq!(decoder.decode(&BitVec::zeros(3)), None);

        for (word, state) in decoder.sorted_entries() {
            assert_eq!(&code.encode(state).unwrap(), word);
            assert_eq!(state.weight(), 1);
        }
    }

    #[test]
    fn lookup_collision_names_both_states() {
        let g = BitMatrix::from_rows(vec!["110".parse().unwrap(), "001".parse().unwrap()]);
        let code = SubspaceCode::from_generator(g, 1, 0, 0).unwrap();
        match build_lookup(&code) {
            Err(Error::EncoderCollision { first, second, .. }) => {
                assert_ne!(first, second);
            }
            other => panic!("expected collision, got {other:?}"),
        }
    }

    #[test]
    fn artifact_round_trip() {
        let code = rle_search(8, 2, 6, 5, 400).unwrap().expect("code");
        let json = code.to_artifact_json();
        let loaded = SubspaceCode::from_artifact_json(&json).unwrap();
        assert_eq!(loaded, code);
        assert_eq!(loaded.to_artifact_json(), json);
        // Duality survives the reload through the recomputed kernel basis.
        assert!(verify_code(&loaded).is_valid());
    }

    #[test]
    fn artifact_rejects_bad_shapes() {
        let code = SubspaceCode::identity(3, 1);
        let json = code.to_artifact_json();
        let broken = json.replace("\"qubits\": 3", "\"qubits\": 2");
        assert!(SubspaceCode::from_artifact_json(&broken).is_err());
    }

    #[test]
    fn minimal_search_finds_q3_for_m4_n1() {
        let found = search_minimal_qubits(4, 1, 0, 64).unwrap();
        let code = found.code.expect("code");
        assert_eq!(code.qubits(), 3);
        // The schedule starts below the guaranteed level and ascends.
        assert_eq!(found.first_level, 2);
    }

    #[test]
    fn minimal_search_beats_gv_for_m6_n2() {
        // gv(6,2) = 5 and a 5-qubit code exists (the only kernel generator is
        // odd); the ascending schedule finds it.
        let found = search_minimal_qubits(6, 2, 0, 200).unwrap();
        let code = found.code.expect("code");
        assert_eq!(code.qubits(), 5);
        assert!(verify_code(&code).is_valid());
    }

    #[test]
    fn with_aux_matches_plain_search_at_zero_extra() {
        let plain = rle_search(8, 2, 6, 9, 300).unwrap();
        let aux = rle_with_aux(8, 2, 6, 0, 9, 300).unwrap();
        assert_eq!(plain, aux);
        assert!(rle_with_aux(8, 2, 6, 2, 9, 300).is_err());
        let wide = rle_with_aux(8, 2, 5, 2, 9, 300).unwrap();
        if let Some(code) = wide {
            assert_eq!(code.qubits(), 7);
            assert_eq!(code.aux_qubits(), 2);
        }
    }

    #[test]
    fn table_search_tiny_cell() {
        let out = table_search(1, 3, 8, Duration::from_secs(10), 0).unwrap();
        // N=1, Q=3 supports at least M=4.
        assert!(out.best_modes.unwrap_or(0) >= 4, "{out:?}");
    }
}

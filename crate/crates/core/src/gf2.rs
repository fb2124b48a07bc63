//! Dense linear algebra over GF(2).
//!
//! [`BitVec`] and [`BitMatrix`] are the substrate for codes, Fock states and
//! Pauli-string labels. Bits are packed into `u64` words, one row per vector.
//! Bit index 0 is the leftmost character in string renderings; every other
//! module inherits this convention.

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};

const WORD_BITS: usize = 64;

/// A fixed-length vector over GF(2), packed LSB-first into `u64` words.
///
/// Unused high bits of the last word are kept zero, so whole-word operations
/// (XOR, popcount, comparisons) need no masking.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct BitVec {
    len: usize,
    words: Vec<u64>,
}

impl BitVec {
    pub fn zeros(len: usize) -> Self {
        Self {
            len,
            words: vec![0; len.div_ceil(WORD_BITS)],
        }
    }

    /// Unit vector with a single bit set at `index`.
    pub fn unit(len: usize, index: usize) -> Self {
        let mut v = Self::zeros(len);
        v.set(index, true);
        v
    }

    pub fn from_indices(len: usize, indices: &[usize]) -> Self {
        let mut v = Self::zeros(len);
        for &i in indices {
            v.set(i, true);
        }
        v
    }

    pub fn from_bools(bits: &[bool]) -> Self {
        let mut v = Self::zeros(bits.len());
        for (i, &b) in bits.iter().enumerate() {
            if b {
                v.set(i, true);
            }
        }
        v
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    #[inline]
    pub fn get(&self, index: usize) -> bool {
        assert!(index < self.len, "bit index {index} out of range {}", self.len);
        self.words[index / WORD_BITS] >> (index % WORD_BITS) & 1 == 1
    }

    #[inline]
    pub fn set(&mut self, index: usize, value: bool) {
        assert!(index < self.len, "bit index {index} out of range {}", self.len);
        let mask = 1u64 << (index % WORD_BITS);
        if value {
            self.words[index / WORD_BITS] |= mask;
        } else {
            self.words[index / WORD_BITS] &= !mask;
        }
    }

    #[inline]
    pub fn flip(&mut self, index: usize) {
        assert!(index < self.len, "bit index {index} out of range {}", self.len);
        self.words[index / WORD_BITS] ^= 1u64 << (index % WORD_BITS);
    }

    /// Hamming weight.
    pub fn weight(&self) -> usize {
        self.words.iter().map(|w| w.count_ones() as usize).sum()
    }

    pub fn is_zero(&self) -> bool {
        self.words.iter().all(|&w| w == 0)
    }

    /// In-place XOR with another vector of the same length.
    pub fn xor_assign(&mut self, other: &BitVec) {
        assert_eq!(self.len, other.len, "xor of unequal-length vectors");
        for (a, b) in self.words.iter_mut().zip(&other.words) {
            *a ^= b;
        }
    }

    pub fn xor(&self, other: &BitVec) -> BitVec {
        let mut out = self.clone();
        out.xor_assign(other);
        out
    }

    /// Inner product over GF(2): parity of the AND of the two vectors.
    pub fn dot(&self, other: &BitVec) -> bool {
        assert_eq!(self.len, other.len, "dot of unequal-length vectors");
        self.words
            .iter()
            .zip(&other.words)
            .fold(0u32, |acc, (a, b)| acc ^ (a & b).count_ones())
            & 1
            == 1
    }

    /// Indices of set bits in ascending order.
    pub fn ones(&self) -> impl Iterator<Item = usize> + '_ {
        self.words.iter().enumerate().flat_map(|(wi, &w)| {
            let mut w = w;
            std::iter::from_fn(move || {
                if w == 0 {
                    None
                } else {
                    let bit = w.trailing_zeros() as usize;
                    w &= w - 1;
                    Some(wi * WORD_BITS + bit)
                }
            })
        })
    }

    pub fn first_one(&self) -> Option<usize> {
        self.ones().next()
    }

    /// Basis-state index with bit 0 as the most significant bit, matching the
    /// rendering convention. Only valid for vectors of at most 63 bits.
    pub fn index_msb0(&self) -> usize {
        assert!(self.len < WORD_BITS, "vector too long for a basis index");
        let mut idx = 0usize;
        for i in 0..self.len {
            idx = idx << 1 | usize::from(self.get(i));
        }
        idx
    }

    /// Inverse of [`BitVec::index_msb0`].
    pub fn from_index_msb0(len: usize, index: usize) -> Self {
        assert!(len < WORD_BITS, "vector too long for a basis index");
        let mut v = Self::zeros(len);
        for i in 0..len {
            if index >> (len - 1 - i) & 1 == 1 {
                v.set(i, true);
            }
        }
        v
    }

}

impl fmt::Display for BitVec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for i in 0..self.len {
            f.write_str(if self.get(i) { "1" } else { "0" })?;
        }
        Ok(())
    }
}

impl fmt::Debug for BitVec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "BitVec({self})")
    }
}

impl FromStr for BitVec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let mut v = BitVec::zeros(s.len());
        for (i, c) in s.chars().enumerate() {
            match c {
                '0' => {}
                '1' => v.set(i, true),
                other => {
                    return Err(Error::InvalidArgument(format!(
                        "bit string may only contain '0'/'1', found {other:?}"
                    )))
                }
            }
        }
        Ok(v)
    }
}

/// Lexicographic order with bit 0 most significant, matching the string
/// rendering. Relies on unused high bits being zero.
impl Ord for BitVec {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.len
            .cmp(&other.len)
            .then_with(|| {
                for (a, b) in self.words.iter().zip(&other.words) {
                    let ord = a.reverse_bits().cmp(&b.reverse_bits());
                    if ord != std::cmp::Ordering::Equal {
                        return ord;
                    }
                }
                std::cmp::Ordering::Equal
            })
    }
}

impl PartialOrd for BitVec {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

/// A dense GF(2) matrix stored as packed rows.
#[derive(Clone, PartialEq, Eq)]
pub struct BitMatrix {
    rows: usize,
    cols: usize,
    data: Vec<BitVec>,
}

impl BitMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![BitVec::zeros(cols); rows],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m.data[i].set(i, true);
        }
        m
    }

    /// Build from rows; every row must share one length.
    pub fn from_rows(rows: Vec<BitVec>) -> Self {
        let cols = rows.first().map_or(0, BitVec::len);
        assert!(rows.iter().all(|r| r.len() == cols), "ragged rows");
        Self {
            rows: rows.len(),
            cols,
            data: rows,
        }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn row(&self, i: usize) -> &BitVec {
        &self.data[i]
    }

    pub fn row_iter(&self) -> impl Iterator<Item = &BitVec> {
        self.data.iter()
    }

    pub fn get(&self, row: usize, col: usize) -> bool {
        self.data[row].get(col)
    }

    pub fn set(&mut self, row: usize, col: usize, value: bool) {
        self.data[row].set(col, value);
    }

    /// Column `j` gathered into a fresh vector.
    pub fn column(&self, j: usize) -> BitVec {
        let mut c = BitVec::zeros(self.rows);
        for i in 0..self.rows {
            if self.data[i].get(j) {
                c.set(i, true);
            }
        }
        c
    }

    pub fn transposed(&self) -> BitMatrix {
        let mut t = BitMatrix::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in self.data[i].ones() {
                t.data[j].set(i, true);
            }
        }
        t
    }

    /// Matrix-vector product over GF(2): `result[i]` is the parity of the AND
    /// of row `i` with `v`.
    pub fn matvec(&self, v: &BitVec) -> Result<BitVec> {
        if v.len() != self.cols {
            return Err(Error::DimensionMismatch(format!(
                "matvec: vector length {} != matrix columns {}",
                v.len(),
                self.cols
            )));
        }
        let mut out = BitVec::zeros(self.rows);
        for (i, row) in self.data.iter().enumerate() {
            if row.dot(v) {
                out.set(i, true);
            }
        }
        Ok(out)
    }

    pub fn matmul(&self, other: &BitMatrix) -> BitMatrix {
        assert_eq!(self.cols, other.rows, "matmul shape mismatch");
        let other_t = other.transposed();
        let mut out = BitMatrix::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for j in 0..other.cols {
                if self.data[i].dot(&other_t.data[j]) {
                    out.data[i].set(j, true);
                }
            }
        }
        out
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(BitVec::is_zero)
    }

    /// Reduced row echelon form in place; returns the pivot column of each
    /// pivot row in order.
    fn rref(rows: &mut [BitVec], cols: usize) -> Vec<usize> {
        let mut pivots = Vec::new();
        let mut r = 0;
        for c in 0..cols {
            if r == rows.len() {
                break;
            }
            let Some(p) = (r..rows.len()).find(|&i| rows[i].get(c)) else {
                continue;
            };
            rows.swap(r, p);
            for i in 0..rows.len() {
                if i != r && rows[i].get(c) {
                    let (pivot_row, target) = if i < r {
                        let (a, b) = rows.split_at_mut(r);
                        (&b[0], &mut a[i])
                    } else {
                        let (a, b) = rows.split_at_mut(i);
                        (&a[r], &mut b[0])
                    };
                    target.xor_assign(pivot_row);
                }
            }
            pivots.push(c);
            r += 1;
        }
        pivots
    }

    /// Row-echelon rank over GF(2).
    pub fn rank(&self) -> usize {
        let mut rows = self.data.clone();
        Self::rref(&mut rows, self.cols).len()
    }

    /// A basis of `{v : Mv = 0}`, one vector per free column in ascending
    /// column order. Returns `cols - rank` vectors.
    pub fn kernel_basis(&self) -> Vec<BitVec> {
        let mut rows = self.data.clone();
        let pivots = Self::rref(&mut rows, self.cols);
        let pivot_set: Vec<bool> = {
            let mut s = vec![false; self.cols];
            for &p in &pivots {
                s[p] = true;
            }
            s
        };
        let mut basis = Vec::with_capacity(self.cols - pivots.len());
        for (f, _) in pivot_set.iter().enumerate().filter(|(_, p)| !**p) {
            let mut v = BitVec::zeros(self.cols);
            v.set(f, true);
            for (i, &p) in pivots.iter().enumerate() {
                if rows[i].get(f) {
                    v.set(p, true);
                }
            }
            basis.push(v);
        }
        basis
    }

    /// Solve `Mx = target`, or `None` when no solution exists. Deterministic:
    /// all free variables are set to 0.
    pub fn solve_affine(&self, target: &BitVec) -> Result<Option<BitVec>> {
        if target.len() != self.rows {
            return Err(Error::DimensionMismatch(format!(
                "solve_affine: target length {} != matrix rows {}",
                target.len(),
                self.rows
            )));
        }
        // Augment each row with the target bit in an extra trailing column.
        let mut rows: Vec<BitVec> = (0..self.rows)
            .map(|i| {
                let mut r = BitVec::zeros(self.cols + 1);
                for j in self.data[i].ones() {
                    r.set(j, true);
                }
                if target.get(i) {
                    r.set(self.cols, true);
                }
                r
            })
            .collect();
        let pivots = Self::rref(&mut rows, self.cols);
        // Inconsistent system: a zero row with augment bit 1.
        for (i, row) in rows.iter().enumerate() {
            if i >= pivots.len() && row.get(self.cols) {
                return Ok(None);
            }
        }
        let mut x = BitVec::zeros(self.cols);
        for (i, &p) in pivots.iter().enumerate() {
            if rows[i].get(self.cols) {
                x.set(p, true);
            }
        }
        Ok(Some(x))
    }

    /// Inverse of a square invertible matrix.
    pub fn inverted(&self) -> Result<BitMatrix> {
        if self.rows != self.cols {
            return Err(Error::DimensionMismatch(format!(
                "invert: matrix is {}x{}, not square",
                self.rows, self.cols
            )));
        }
        let n = self.rows;
        let mut rows: Vec<BitVec> = (0..n)
            .map(|i| {
                let mut r = BitVec::zeros(2 * n);
                for j in self.data[i].ones() {
                    r.set(j, true);
                }
                r.set(n + i, true);
                r
            })
            .collect();
        let pivots = Self::rref(&mut rows, n);
        if pivots.len() < n {
            return Err(Error::SingularMatrix);
        }
        let inv = (0..n)
            .map(|i| {
                let mut r = BitVec::zeros(n);
                for j in 0..n {
                    if rows[i].get(n + j) {
                        r.set(j, true);
                    }
                }
                r
            })
            .collect();
        Ok(BitMatrix::from_rows(inv))
    }
}

impl fmt::Display for BitMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for row in &self.data {
            writeln!(f, "{row}")?;
        }
        Ok(())
    }
}

impl fmt::Debug for BitMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "BitMatrix({}x{})\n{}", self.rows, self.cols, self)
    }
}

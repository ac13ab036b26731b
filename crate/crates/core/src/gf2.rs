//! Bit-packed linear algebra over GF(2).
//!
//! Vectors and matrices store bits little-endian inside `u64` words: bit `i`
//! of a vector lives in word `i / 64` at position `i % 64`. Matrices are
//! row-major with every row padded to a whole number of words.

use std::fmt;

use crate::error::{Error, Result};

const WORD_BITS: usize = 64;

#[inline]
fn words_for(bits: usize) -> usize {
    bits.div_ceil(WORD_BITS)
}

/// A vector over GF(2).
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct BitVector {
    len: usize,
    words: Vec<u64>,
}

impl BitVector {
    /// All-zero vector of `len` bits.
    pub fn zeros(len: usize) -> Self {
        assert!(len > 0, "bit vector length must be positive");
        Self {
            len,
            words: vec![0; words_for(len)],
        }
    }

    /// Builds a vector from a slice of 0/1 values.
    pub fn from_bits(bits: &[u8]) -> Self {
        let mut v = Self::zeros(bits.len());
        for (i, &b) in bits.iter().enumerate() {
            assert!(b <= 1, "bit values must be 0 or 1");
            if b == 1 {
                v.set(i, true);
            }
        }
        v
    }

    /// Vector with ones exactly at `positions`.
    pub fn from_support(len: usize, positions: &[usize]) -> Self {
        let mut v = Self::zeros(len);
        for &p in positions {
            v.set(p, true);
        }
        v
    }

    /// Wraps raw words; bits beyond `len` are cleared.
    pub fn from_words(len: usize, mut words: Vec<u64>) -> Self {
        assert!(len > 0, "bit vector length must be positive");
        words.resize(words_for(len), 0);
        let mut v = Self { len, words };
        v.clear_tail();
        v
    }

    fn clear_tail(&mut self) {
        let rem = self.len % WORD_BITS;
        if rem != 0 {
            let last = self.words.len() - 1;
            self.words[last] &= (1u64 << rem) - 1;
        }
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.len
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    #[inline]
    pub fn words(&self) -> &[u64] {
        &self.words
    }

    #[inline]
    pub fn get(&self, i: usize) -> bool {
        assert!(
            i < self.len,
            "bit index {i} out of range for length {}",
            self.len
        );
        (self.words[i / WORD_BITS] >> (i % WORD_BITS)) & 1 == 1
    }

    #[inline]
    pub fn set(&mut self, i: usize, value: bool) {
        assert!(
            i < self.len,
            "bit index {i} out of range for length {}",
            self.len
        );
        let mask = 1u64 << (i % WORD_BITS);
        if value {
            self.words[i / WORD_BITS] |= mask;
        } else {
            self.words[i / WORD_BITS] &= !mask;
        }
    }

    #[inline]
    pub fn flip(&mut self, i: usize) {
        assert!(
            i < self.len,
            "bit index {i} out of range for length {}",
            self.len
        );
        self.words[i / WORD_BITS] ^= 1u64 << (i % WORD_BITS);
    }

    pub fn xor_assign(&mut self, other: &BitVector) {
        assert_eq!(self.len, other.len, "length mismatch in xor");
        for (a, b) in self.words.iter_mut().zip(&other.words) {
            *a ^= *b;
        }
    }

    pub fn xor(&self, other: &BitVector) -> BitVector {
        let mut out = self.clone();
        out.xor_assign(other);
        out
    }

    /// Hamming weight.
    pub fn weight(&self) -> usize {
        self.words.iter().map(|w| w.count_ones() as usize).sum()
    }

    pub fn is_zero(&self) -> bool {
        self.words.iter().all(|&w| w == 0)
    }

    /// Number of positions where `self` and `other` differ.
    pub fn distance(&self, other: &BitVector) -> usize {
        assert_eq!(self.len, other.len, "length mismatch in distance");
        self.words
            .iter()
            .zip(&other.words)
            .map(|(a, b)| (a ^ b).count_ones() as usize)
            .sum()
    }

    /// Parity of the bitwise AND with `other`.
    #[inline]
    pub fn dot(&self, other: &BitVector) -> bool {
        assert_eq!(self.len, other.len, "length mismatch in dot product");
        dot_words(&self.words, &other.words)
    }

    /// Indices of set bits in increasing order.
    pub fn ones(&self) -> impl Iterator<Item = usize> + '_ {
        self.words.iter().enumerate().flat_map(|(wi, &w)| {
            let mut rest = w;
            std::iter::from_fn(move || {
                if rest == 0 {
                    None
                } else {
                    let b = rest.trailing_zeros() as usize;
                    rest &= rest - 1;
                    Some(wi * WORD_BITS + b)
                }
            })
        })
    }

    pub fn to_bits(&self) -> Vec<u8> {
        (0..self.len).map(|i| self.get(i) as u8).collect()
    }

    /// Cyclic shift by one position towards higher indices.
    pub fn rotate_right_one(&self) -> BitVector {
        let mut out = BitVector::zeros(self.len);
        for i in self.ones() {
            out.set((i + 1) % self.len, true);
        }
        out
    }
}

impl fmt::Debug for BitVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "BitVector({self})")
    }
}

impl fmt::Display for BitVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for i in 0..self.len {
            f.write_str(if self.get(i) { "1" } else { "0" })?;
        }
        Ok(())
    }
}

#[inline]
fn dot_words(a: &[u64], b: &[u64]) -> bool {
    let mut acc = 0u64;
    for (x, y) in a.iter().zip(b) {
        acc ^= x & y;
    }
    acc.count_ones() & 1 == 1
}

/// A dense matrix over GF(2), row-major.
#[derive(Clone, PartialEq, Eq)]
pub struct BitMatrix {
    rows: usize,
    cols: usize,
    stride: usize,
    data: Vec<u64>,
}

impl BitMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        assert!(rows > 0 && cols > 0, "matrix dimensions must be positive");
        let stride = words_for(cols);
        Self {
            rows,
            cols,
            stride,
            data: vec![0; rows * stride],
        }
    }

    pub fn identity(size: usize) -> Self {
        let mut m = Self::zeros(size, size);
        for i in 0..size {
            m.set(i, i, true);
        }
        m
    }

    /// Builds a matrix from rows given as 0/1 slices.
    pub fn from_rows<R: AsRef<[u8]>>(rows: &[R]) -> Self {
        assert!(!rows.is_empty(), "matrix needs at least one row");
        let cols = rows[0].as_ref().len();
        let mut m = Self::zeros(rows.len(), cols);
        for (r, row) in rows.iter().enumerate() {
            let row = row.as_ref();
            assert_eq!(row.len(), cols, "ragged rows");
            for (c, &b) in row.iter().enumerate() {
                assert!(b <= 1, "bit values must be 0 or 1");
                m.set(r, c, b == 1);
            }
        }
        m
    }

    pub fn from_bit_vectors(rows: &[BitVector]) -> Self {
        assert!(!rows.is_empty(), "matrix needs at least one row");
        let cols = rows[0].len();
        let mut m = Self::zeros(rows.len(), cols);
        for (r, row) in rows.iter().enumerate() {
            assert_eq!(row.len(), cols, "ragged rows");
            m.row_words_mut(r).copy_from_slice(row.words());
        }
        m
    }

    #[inline]
    pub fn rows(&self) -> usize {
        self.rows
    }

    #[inline]
    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn get(&self, r: usize, c: usize) -> bool {
        assert!(
            r < self.rows && c < self.cols,
            "matrix index ({r},{c}) out of range"
        );
        (self.data[r * self.stride + c / WORD_BITS] >> (c % WORD_BITS)) & 1 == 1
    }

    #[inline]
    pub fn set(&mut self, r: usize, c: usize, value: bool) {
        assert!(
            r < self.rows && c < self.cols,
            "matrix index ({r},{c}) out of range"
        );
        let mask = 1u64 << (c % WORD_BITS);
        let w = &mut self.data[r * self.stride + c / WORD_BITS];
        if value {
            *w |= mask;
        } else {
            *w &= !mask;
        }
    }

    #[inline]
    pub fn row_words(&self, r: usize) -> &[u64] {
        &self.data[r * self.stride..(r + 1) * self.stride]
    }

    #[inline]
    fn row_words_mut(&mut self, r: usize) -> &mut [u64] {
        &mut self.data[r * self.stride..(r + 1) * self.stride]
    }

    pub fn row(&self, r: usize) -> BitVector {
        BitVector::from_words(self.cols, self.row_words(r).to_vec())
    }

    fn swap_rows(&mut self, a: usize, b: usize) {
        if a != b {
            for w in 0..self.stride {
                self.data.swap(a * self.stride + w, b * self.stride + w);
            }
        }
    }

    /// row[dst] ^= row[src]
    fn add_row(&mut self, src: usize, dst: usize) {
        for w in 0..self.stride {
            let v = self.data[src * self.stride + w];
            self.data[dst * self.stride + w] ^= v;
        }
    }

    pub fn transpose(&self) -> BitMatrix {
        let mut t = BitMatrix::zeros(self.cols, self.rows);
        for r in 0..self.rows {
            for c in self.row(r).ones() {
                t.set(c, r, true);
            }
        }
        t
    }

    /// `M · vᵀ`, one output bit per row.
    pub fn mul_vec(&self, v: &BitVector) -> BitVector {
        assert_eq!(self.cols, v.len(), "matrix-vector dimension mismatch");
        let mut out = BitVector::zeros(self.rows);
        for r in 0..self.rows {
            if dot_words(self.row_words(r), v.words()) {
                out.set(r, true);
            }
        }
        out
    }

    /// `u · M`, the XOR of the rows selected by `u`.
    pub fn vec_mul(&self, u: &BitVector) -> BitVector {
        assert_eq!(self.rows, u.len(), "vector-matrix dimension mismatch");
        let mut acc = vec![0u64; self.stride];
        for r in u.ones() {
            for (a, b) in acc.iter_mut().zip(self.row_words(r)) {
                *a ^= *b;
            }
        }
        BitVector::from_words(self.cols, acc)
    }

    /// Matrix product `self · other`.
    pub fn mul(&self, other: &BitMatrix) -> BitMatrix {
        assert_eq!(self.cols, other.rows, "matrix product dimension mismatch");
        let mut out = BitMatrix::zeros(self.rows, other.cols);
        for r in 0..self.rows {
            let prod = other.vec_mul(&self.row(r));
            out.row_words_mut(r).copy_from_slice(prod.words());
        }
        out
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(|&w| w == 0)
    }

    /// Selects columns in the given order.
    pub fn permute_columns(&self, perm: &[usize]) -> BitMatrix {
        assert_eq!(perm.len(), self.cols, "permutation length mismatch");
        let mut out = BitMatrix::zeros(self.rows, self.cols);
        for r in 0..self.rows {
            for (j, &src) in perm.iter().enumerate() {
                if self.get(r, src) {
                    out.set(r, j, true);
                }
            }
        }
        out
    }

    pub fn rank(&self) -> usize {
        let mut m = self.clone();
        m.reduce().pivots.len()
    }

    /// In-place reduced row echelon form; returns pivot columns and the
    /// accumulated row transform `A` such that `A · original = reduced`
    /// (restricted to the first `pivots.len()` rows).
    fn reduce(&mut self) -> Reduction {
        let mut transform = BitMatrix::identity(self.rows);
        let mut pivots = Vec::new();
        let mut row = 0;
        for col in 0..self.cols {
            if row == self.rows {
                break;
            }
            let Some(p) = (row..self.rows).find(|&r| self.get(r, col)) else {
                continue;
            };
            self.swap_rows(p, row);
            transform.swap_rows(p, row);
            for r in 0..self.rows {
                if r != row && self.get(r, col) {
                    self.add_row(row, r);
                    transform.add_row(row, r);
                }
            }
            pivots.push(col);
            row += 1;
        }
        Reduction { pivots, transform }
    }

    /// Hex encoding of each row: bits packed MSB-first into bytes, column 0
    /// in the top bit of the first byte.
    pub fn to_hex_rows(&self) -> Vec<String> {
        (0..self.rows)
            .map(|r| {
                let mut bytes = vec![0u8; self.cols.div_ceil(8)];
                for c in 0..self.cols {
                    if self.get(r, c) {
                        bytes[c / 8] |= 0x80 >> (c % 8);
                    }
                }
                hex::encode(bytes)
            })
            .collect()
    }

    pub fn from_hex_rows(rows: &[String], cols: usize) -> Result<BitMatrix> {
        if rows.is_empty() || cols == 0 {
            return Err(Error::InvalidCodebook("empty matrix".into()));
        }
        let mut m = BitMatrix::zeros(rows.len(), cols);
        for (r, s) in rows.iter().enumerate() {
            let bytes =
                hex::decode(s).map_err(|e| Error::InvalidCodebook(format!("row {r}: {e}")))?;
            if bytes.len() != cols.div_ceil(8) {
                return Err(Error::InvalidCodebook(format!(
                    "row {r} has {} bytes, expected {}",
                    bytes.len(),
                    cols.div_ceil(8)
                )));
            }
            for c in 0..bytes.len() * 8 {
                let bit = bytes[c / 8] & (0x80 >> (c % 8)) != 0;
                if c >= cols {
                    if bit {
                        return Err(Error::InvalidCodebook(format!(
                            "row {r} has bits set past column {cols}"
                        )));
                    }
                } else if bit {
                    m.set(r, c, true);
                }
            }
        }
        Ok(m)
    }
}

impl fmt::Debug for BitMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "BitMatrix {}x{} [", self.rows, self.cols)?;
        for r in 0..self.rows {
            writeln!(f, "  {}", self.row(r))?;
        }
        write!(f, "]")
    }
}

struct Reduction {
    pivots: Vec<usize>,
    transform: BitMatrix,
}

/// Syndrome `H · vᵀ`; all-zero iff `v` satisfies every parity check.
pub fn syndrome(h: &BitMatrix, v: &BitVector) -> BitVector {
    assert_eq!(
        h.cols(),
        v.len(),
        "syndrome: H has {} columns, vector has {} bits",
        h.cols(),
        v.len()
    );
    h.mul_vec(v)
}

/// Reduces a full-row-rank generator to `[I_k | P]` under a column
/// permutation. Column `j` of the result is column `perm[j]` of `g`.
pub fn systematic_form(g: &BitMatrix) -> Result<(BitMatrix, Vec<usize>)> {
    let mut m = g.clone();
    let red = m.reduce();
    if red.pivots.len() < g.rows() {
        return Err(Error::RankDeficient {
            rank: red.pivots.len(),
            rows: g.rows(),
        });
    }
    let mut perm = red.pivots.clone();
    perm.extend((0..g.cols()).filter(|c| !red.pivots.contains(c)));
    Ok((m.permute_columns(&perm), perm))
}

/// An `n × k` matrix `Ginv` with `G · Ginv = I_k`.
///
/// Row `p_j` of `Ginv` (for pivot column `p_j`) is row `j` of the reducing
/// transform; all other rows are zero, so message recovery only reads the
/// information set.
pub fn right_inverse(g: &BitMatrix) -> Result<BitMatrix> {
    let mut m = g.clone();
    let red = m.reduce();
    let k = g.rows();
    if red.pivots.len() < k {
        return Err(Error::RankDeficient {
            rank: red.pivots.len(),
            rows: k,
        });
    }
    let mut inv = BitMatrix::zeros(g.cols(), k);
    for (j, &p) in red.pivots.iter().enumerate() {
        for c in 0..k {
            if red.transform.get(j, c) {
                inv.set(p, c, true);
            }
        }
    }
    Ok(inv)
}

/// Parity-check matrix `H` with `H · Gᵀ = 0`, derived through the systematic form.
pub fn parity_check_from_generator(g: &BitMatrix) -> Result<BitMatrix> {
    let (sys, perm) = systematic_form(g)?;
    let k = g.rows();
    let n = g.cols();
    if n == k {
        return Err(Error::InvalidCodebook("code has no redundancy".into()));
    }
    let mut h = BitMatrix::zeros(n - k, n);
    for r in 0..n - k {
        // H' = [Pᵀ | I] in permuted coordinates, mapped back through perm.
        for i in 0..k {
            if sys.get(i, k + r) {
                h.set(r, perm[i], true);
            }
        }
        h.set(r, perm[k + r], true);
    }
    Ok(h)
}

/// Columns of a parity-check matrix packed into `u128` masks so the syndrome
/// of a vector is the XOR of the masks at its set positions.
#[derive(Clone, Debug)]
pub struct SyndromeMasks {
    columns: Vec<u128>,
}

impl SyndromeMasks {
    pub fn new(h: &BitMatrix) -> Result<Self> {
        if h.rows() > 128 {
            return Err(Error::TooManyParityChecks { rows: h.rows() });
        }
        let mut columns = vec![0u128; h.cols()];
        for r in 0..h.rows() {
            for c in h.row(r).ones() {
                columns[c] |= 1u128 << r;
            }
        }
        Ok(Self { columns })
    }

    #[inline]
    pub fn column(&self, i: usize) -> u128 {
        self.columns[i]
    }

    pub fn len(&self) -> usize {
        self.columns.len()
    }

    pub fn is_empty(&self) -> bool {
        self.columns.is_empty()
    }

    /// Packed syndrome of `v`.
    pub fn syndrome(&self, v: &BitVector) -> u128 {
        assert_eq!(v.len(), self.columns.len(), "syndrome: length mismatch");
        v.ones().fold(0u128, |acc, i| acc ^ self.columns[i])
    }
}

//! Dense bit-packed linear algebra over GF(2).
//!
//! Vectors pack 64 bits per word, least significant bit first. Matrices are
//! stored row-major as a list of [`BitVector`] rows. All routines are pure and
//! operate on immutable inputs; reductions return fresh values.

use std::fmt;

const WORD_BITS: usize = 64;

#[inline]
fn words_for(len: usize) -> usize {
    len.div_ceil(WORD_BITS)
}

/// A fixed-length vector over GF(2).
///
/// Padding bits past `len` in the last word are always zero, so equality,
/// hashing and popcounts can work on whole words.
#[derive(Clone, PartialEq, Eq, Hash, Default)]
pub struct BitVector {
    len: usize,
    words: Vec<u64>,
}

impl BitVector {
    pub fn zeros(len: usize) -> Self {
        Self {
            len,
            words: vec![0; words_for(len)],
        }
    }

    /// Vector with ones at the given positions. Repeated positions cancel.
    pub fn from_indices(len: usize, indices: impl IntoIterator<Item = usize>) -> Self {
        let mut v = Self::zeros(len);
        for i in indices {
            v.toggle(i);
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

    /// Builds a vector from raw words; bits beyond `len` are cleared.
    pub fn from_words(len: usize, mut words: Vec<u64>) -> Self {
        words.resize(words_for(len), 0);
        let mut v = Self { len, words };
        v.clear_padding();
        v
    }

    fn clear_padding(&mut self) {
        let rem = self.len % WORD_BITS;
        if rem != 0 {
            if let Some(last) = self.words.last_mut() {
                *last &= (1u64 << rem) - 1;
            }
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
        assert!(i < self.len, "bit index {i} out of range {}", self.len);
        (self.words[i / WORD_BITS] >> (i % WORD_BITS)) & 1 == 1
    }

    #[inline]
    pub fn set(&mut self, i: usize, value: bool) {
        assert!(i < self.len, "bit index {i} out of range {}", self.len);
        let mask = 1u64 << (i % WORD_BITS);
        if value {
            self.words[i / WORD_BITS] |= mask;
        } else {
            self.words[i / WORD_BITS] &= !mask;
        }
    }

    #[inline]
    pub fn toggle(&mut self, i: usize) {
        assert!(i < self.len, "bit index {i} out of range {}", self.len);
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

    pub fn and(&self, other: &BitVector) -> BitVector {
        assert_eq!(self.len, other.len, "length mismatch in and");
        BitVector {
            len: self.len,
            words: self.words.iter().zip(&other.words).map(|(a, b)| a & b).collect(),
        }
    }

    /// Number of positions where both vectors are set.
    pub fn overlap(&self, other: &BitVector) -> usize {
        assert_eq!(self.len, other.len, "length mismatch in overlap");
        self.words
            .iter()
            .zip(&other.words)
            .map(|(a, b)| (a & b).count_ones() as usize)
            .sum()
    }

    /// GF(2) inner product.
    #[inline]
    pub fn dot(&self, other: &BitVector) -> bool {
        self.overlap(other) % 2 == 1
    }

    pub fn weight(&self) -> usize {
        self.words.iter().map(|w| w.count_ones() as usize).sum()
    }

    pub fn is_zero(&self) -> bool {
        self.words.iter().all(|&w| w == 0)
    }

    pub fn is_disjoint(&self, other: &BitVector) -> bool {
        self.overlap(other) == 0
    }

    /// Indices of set bits in increasing order.
    pub fn support(&self) -> Vec<usize> {
        self.ones().collect()
    }

    pub fn ones(&self) -> impl Iterator<Item = usize> + '_ {
        self.words.iter().enumerate().flat_map(|(wi, &w)| {
            let mut word = w;
            std::iter::from_fn(move || {
                if word == 0 {
                    None
                } else {
                    let tz = word.trailing_zeros() as usize;
                    word &= word - 1;
                    Some(wi * WORD_BITS + tz)
                }
            })
        })
    }

    pub fn first_one(&self) -> Option<usize> {
        self.words
            .iter()
            .enumerate()
            .find(|(_, &w)| w != 0)
            .map(|(wi, &w)| wi * WORD_BITS + w.trailing_zeros() as usize)
    }

    /// Concatenation `self ‖ other`.
    pub fn concat(&self, other: &BitVector) -> BitVector {
        let mut out = BitVector::zeros(self.len + other.len);
        for i in self.ones() {
            out.set(i, true);
        }
        for i in other.ones() {
            out.set(self.len + i, true);
        }
        out
    }
}

impl fmt::Debug for BitVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "BitVector(")?;
        for i in 0..self.len {
            write!(f, "{}", if self.get(i) { '1' } else { '0' })?;
        }
        write!(f, ")")
    }
}

impl fmt::Display for BitVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for i in 0..self.len {
            write!(f, "{}", if self.get(i) { '1' } else { '0' })?;
        }
        Ok(())
    }
}

/// A dense matrix over GF(2), stored as rows.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct BitMatrix {
    cols: usize,
    rows: Vec<BitVector>,
}

impl BitMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            cols,
            rows: vec![BitVector::zeros(cols); rows],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m.rows[i].set(i, true);
        }
        m
    }

    /// Builds a matrix from rows; every row must have length `cols`.
    pub fn from_rows(rows: Vec<BitVector>, cols: usize) -> Self {
        for (i, r) in rows.iter().enumerate() {
            assert_eq!(r.len(), cols, "row {i} has length {} but matrix has {cols} columns", r.len());
        }
        Self { cols, rows }
    }

    /// Builds a matrix from per-row lists of set column indices.
    pub fn from_row_indices(cols: usize, rows: &[Vec<usize>]) -> Self {
        Self {
            cols,
            rows: rows
                .iter()
                .map(|r| BitVector::from_indices(cols, r.iter().copied()))
                .collect(),
        }
    }

    pub fn from_dense(data: &[&[u8]]) -> Self {
        let cols = data.first().map_or(0, |r| r.len());
        let rows = data
            .iter()
            .map(|r| {
                assert_eq!(r.len(), cols);
                BitVector::from_indices(cols, r.iter().enumerate().filter(|(_, &b)| b != 0).map(|(i, _)| i))
            })
            .collect();
        Self { cols, rows }
    }

    #[inline]
    pub fn num_rows(&self) -> usize {
        self.rows.len()
    }

    #[inline]
    pub fn num_cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn row(&self, i: usize) -> &BitVector {
        &self.rows[i]
    }

    pub fn rows(&self) -> &[BitVector] {
        &self.rows
    }

    pub fn into_rows(self) -> Vec<BitVector> {
        self.rows
    }

    #[inline]
    pub fn get(&self, r: usize, c: usize) -> bool {
        self.rows[r].get(c)
    }

    #[inline]
    pub fn set(&mut self, r: usize, c: usize, value: bool) {
        self.rows[r].set(c, value)
    }

    pub fn push_row(&mut self, row: BitVector) {
        assert_eq!(row.len(), self.cols);
        self.rows.push(row);
    }

    /// Per-row lists of set column indices.
    pub fn row_indices(&self) -> Vec<Vec<usize>> {
        self.rows.iter().map(BitVector::support).collect()
    }

    pub fn transpose(&self) -> BitMatrix {
        let mut t = BitMatrix::zeros(self.cols, self.rows.len());
        for (r, row) in self.rows.iter().enumerate() {
            for c in row.ones() {
                t.rows[c].set(r, true);
            }
        }
        t
    }

    /// `M · x` for a column vector `x` of length `cols`.
    pub fn mul_vec(&self, x: &BitVector) -> BitVector {
        assert_eq!(x.len(), self.cols, "vector length must equal column count");
        let mut out = BitVector::zeros(self.rows.len());
        for (i, row) in self.rows.iter().enumerate() {
            if row.dot(x) {
                out.set(i, true);
            }
        }
        out
    }

    /// `xᵀ · M` for a row vector `x` of length `rows`: the sum of the selected rows.
    pub fn combine_rows(&self, x: &BitVector) -> BitVector {
        assert_eq!(x.len(), self.rows.len(), "vector length must equal row count");
        let mut out = BitVector::zeros(self.cols);
        for i in x.ones() {
            out.xor_assign(&self.rows[i]);
        }
        out
    }

    pub fn mul(&self, other: &BitMatrix) -> BitMatrix {
        assert_eq!(self.cols, other.num_rows(), "inner dimension mismatch");
        let rows = self
            .rows
            .iter()
            .map(|row| {
                let mut acc = BitVector::zeros(other.cols);
                for k in row.ones() {
                    acc.xor_assign(&other.rows[k]);
                }
                acc
            })
            .collect();
        BitMatrix { cols: other.cols, rows }
    }

    pub fn is_zero(&self) -> bool {
        self.rows.iter().all(BitVector::is_zero)
    }

    /// Kronecker product `self ⊗ other`.
    pub fn kron(&self, other: &BitMatrix) -> BitMatrix {
        let cols = self.cols * other.cols;
        let mut rows = Vec::with_capacity(self.num_rows() * other.num_rows());
        for a in &self.rows {
            for b in &other.rows {
                let mut row = BitVector::zeros(cols);
                for i in a.ones() {
                    for j in b.ones() {
                        row.set(i * other.cols + j, true);
                    }
                }
                rows.push(row);
            }
        }
        BitMatrix { cols, rows }
    }

    /// Horizontal concatenation `[self | other]`.
    pub fn hstack(&self, other: &BitMatrix) -> BitMatrix {
        assert_eq!(self.num_rows(), other.num_rows(), "row count mismatch in hstack");
        let rows = self.rows.iter().zip(&other.rows).map(|(a, b)| a.concat(b)).collect();
        BitMatrix {
            cols: self.cols + other.cols,
            rows,
        }
    }

    pub fn vstack(&self, other: &BitMatrix) -> BitMatrix {
        assert_eq!(self.cols, other.cols, "column count mismatch in vstack");
        let mut rows = self.rows.clone();
        rows.extend(other.rows.iter().cloned());
        BitMatrix { cols: self.cols, rows }
    }

    pub fn rank(&self) -> usize {
        self.row_reduce().1.len()
    }

    /// Reduced row-echelon form and the pivot columns (strictly increasing).
    ///
    /// Zero rows are dropped from the returned matrix, so its row count equals
    /// the rank. Pivot columns are cleared above and below their pivot row.
    pub fn row_reduce(&self) -> (BitMatrix, Vec<usize>) {
        let mut rows = self.rows.clone();
        let mut pivots = Vec::new();
        let mut next = 0;
        for col in 0..self.cols {
            if next == rows.len() {
                break;
            }
            let wi = col / WORD_BITS;
            let mask = 1u64 << (col % WORD_BITS);
            let Some(p) = (next..rows.len()).find(|&r| rows[r].words[wi] & mask != 0) else {
                continue;
            };
            rows.swap(next, p);
            let pivot_row = rows[next].clone();
            for (r, row) in rows.iter_mut().enumerate() {
                if r != next && row.words[wi] & mask != 0 {
                    // Words before `wi` are zero in the pivot row past elimination.
                    for (a, b) in row.words[wi..].iter_mut().zip(&pivot_row.words[wi..]) {
                        *a ^= *b;
                    }
                }
            }
            pivots.push(col);
            next += 1;
        }
        rows.truncate(next);
        (BitMatrix { cols: self.cols, rows }, pivots)
    }

    /// Basis of the null space `{x : M·x = 0}`, one basis vector per row.
    pub fn kernel_basis(&self) -> BitMatrix {
        let (reduced, pivots) = self.row_reduce();
        let mut is_pivot = vec![false; self.cols];
        for &p in &pivots {
            is_pivot[p] = true;
        }
        let rows = (0..self.cols)
            .filter(|&c| !is_pivot[c])
            .map(|free| {
                let mut x = BitVector::zeros(self.cols);
                x.set(free, true);
                for (r, &p) in pivots.iter().enumerate() {
                    if reduced.get(r, free) {
                        x.set(p, true);
                    }
                }
                x
            })
            .collect();
        BitMatrix { cols: self.cols, rows }
    }

    /// Some `x` with `M·x = y`, or `None` when `y` is outside the column space.
    pub fn solve(&self, y: &BitVector) -> Option<BitVector> {
        assert_eq!(y.len(), self.num_rows(), "right-hand side length must equal row count");
        let augmented = BitMatrix {
            cols: self.cols + 1,
            rows: self
                .rows
                .iter()
                .enumerate()
                .map(|(i, row)| {
                    let mut r = row.concat(&BitVector::zeros(1));
                    r.set(self.cols, y.get(i));
                    r
                })
                .collect(),
        };
        let (reduced, pivots) = augmented.row_reduce();
        if pivots.last() == Some(&self.cols) {
            return None;
        }
        let mut x = BitVector::zeros(self.cols);
        for (r, &p) in pivots.iter().enumerate() {
            if reduced.get(r, self.cols) {
                x.set(p, true);
            }
        }
        Some(x)
    }

    /// Whether `v` lies in the row space of `M`.
    pub fn in_image(&self, v: &BitVector) -> bool {
        RowSpace::new(self).contains(v)
    }
}

impl fmt::Debug for BitMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "BitMatrix {}x{} [", self.num_rows(), self.cols)?;
        for row in &self.rows {
            writeln!(f, "  {row}")?;
        }
        write!(f, "]")
    }
}

/// Precomputed row space of a matrix for repeated membership tests.
#[derive(Clone, Debug)]
pub struct RowSpace {
    reduced: BitMatrix,
    pivots: Vec<usize>,
}

impl RowSpace {
    pub fn new(m: &BitMatrix) -> Self {
        let (reduced, pivots) = m.row_reduce();
        Self { reduced, pivots }
    }

    pub fn dim(&self) -> usize {
        self.pivots.len()
    }

    /// Remainder of `v` after clearing every pivot column. Zero iff `v` is in the span.
    pub fn reduce(&self, v: &BitVector) -> BitVector {
        let mut out = v.clone();
        for (r, &p) in self.pivots.iter().enumerate() {
            if out.get(p) {
                out.xor_assign(self.reduced.row(r));
            }
        }
        out
    }

    pub fn contains(&self, v: &BitVector) -> bool {
        assert_eq!(v.len(), self.reduced.num_cols(), "vector length must equal column count");
        self.reduce(v).is_zero()
    }
}

//! Code constructions: circulant seeds, the hypergraph product, La-cross codes
//! and the square Bacon-Shor code used as the teleportation auxiliary.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gf2::{BitMatrix, BitVector, RowSpace};

/// Seed polynomial `1 + x + x^k` on `n` bits with `r = n - k` checks.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CirculantSpec {
    pub n: usize,
    pub k: usize,
}

impl CirculantSpec {
    pub fn new(n: usize, k: usize) -> Result<Self> {
        let invalid = |reason: &str| Error::InvalidSeed {
            n,
            k,
            reason: reason.to_string(),
        };
        if k >= n {
            return Err(invalid("offset k must be smaller than n"));
        }
        if k < 2 {
            // k = 1 degenerates to the repetition seed 1 + x
            return Err(invalid("offset k must be at least 2 (k = 1 is the repetition code)"));
        }
        Ok(Self { n, k })
    }

    #[inline]
    pub fn r(&self) -> usize {
        self.n - self.k
    }

    /// Positions of the seed ones in row 0.
    pub fn pattern(&self) -> [usize; 3] {
        [0, 1, self.k]
    }
}

/// `(n-k) × n` parity-check matrix whose row `i` is the seed shifted right by `i`.
pub fn circulant_parity_matrix(spec: CirculantSpec) -> BitMatrix {
    let rows: Vec<Vec<usize>> = (0..spec.r())
        .map(|i| spec.pattern().iter().map(|&p| (p + i) % spec.n).collect())
        .collect();
    BitMatrix::from_row_indices(spec.n, &rows)
}

/// A CSS stabilizer code.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CssCode {
    pub n_qubits: usize,
    pub h_x: BitMatrix,
    pub h_z: BitMatrix,
    pub k_logical: usize,
    pub distance: Option<usize>,
}

impl CssCode {
    /// Builds a code from its check matrices, verifying `h_x · h_zᵀ = 0`.
    pub fn new(h_x: BitMatrix, h_z: BitMatrix) -> Result<Self> {
        if h_x.num_cols() != h_z.num_cols() {
            return Err(Error::InvalidConfig("h_x and h_z act on different qubit counts".into()));
        }
        let n = h_x.num_cols();
        if !h_x.mul(&h_z.transpose()).is_zero() {
            return Err(Error::InvalidConfig("X and Z checks do not commute".into()));
        }
        let k_logical = n - h_x.rank() - h_z.rank();
        Ok(Self {
            n_qubits: n,
            h_x,
            h_z,
            k_logical,
            distance: None,
        })
    }

    pub fn commutes(&self) -> bool {
        self.h_x.mul(&self.h_z.transpose()).is_zero()
    }
}

/// Hypergraph product `H_X = [H⊗I_n | I_r⊗Hᵀ]`, `H_Z = [I_n⊗H | Hᵀ⊗I_r]`.
pub fn hypergraph_product(h: &BitMatrix) -> CssCode {
    let (r, n) = (h.num_rows(), h.num_cols());
    let ht = h.transpose();
    let h_x = h.kron(&BitMatrix::identity(n)).hstack(&BitMatrix::identity(r).kron(&ht));
    let h_z = BitMatrix::identity(n).kron(h).hstack(&ht.kron(&BitMatrix::identity(r)));
    CssCode::new(h_x, h_z).expect("hypergraph product is always CSS")
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Lattice {
    Main,
    Sub,
}

/// Qubit indexing of a La-cross code: the `n×n` main lattice row-major first,
/// then the `r×r` sublattice row-major.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct LaCrossLayout {
    pub n: usize,
    pub k: usize,
    pub r: usize,
}

impl LaCrossLayout {
    pub fn new(spec: CirculantSpec) -> Self {
        Self {
            n: spec.n,
            k: spec.k,
            r: spec.r(),
        }
    }

    pub fn spec(&self) -> CirculantSpec {
        CirculantSpec { n: self.n, k: self.k }
    }

    pub fn n_qubits(&self) -> usize {
        self.n * self.n + self.r * self.r
    }

    #[inline]
    pub fn main(&self, row: usize, col: usize) -> usize {
        debug_assert!(row < self.n && col < self.n);
        row * self.n + col
    }

    #[inline]
    pub fn sub(&self, row: usize, col: usize) -> usize {
        debug_assert!(row < self.r && col < self.r);
        self.n * self.n + row * self.r + col
    }

    pub fn index(&self, lattice: Lattice, row: usize, col: usize) -> Result<usize> {
        let side = match lattice {
            Lattice::Main => self.n,
            Lattice::Sub => self.r,
        };
        if row >= side || col >= side {
            return Err(Error::OutOfRange(format!("({row}, {col}) outside {side}x{side} {lattice:?} lattice")));
        }
        Ok(match lattice {
            Lattice::Main => self.main(row, col),
            Lattice::Sub => self.sub(row, col),
        })
    }

    pub fn locate(&self, q: usize) -> (Lattice, usize, usize) {
        let nn = self.n * self.n;
        if q < nn {
            (Lattice::Main, q / self.n, q % self.n)
        } else {
            let s = q - nn;
            (Lattice::Sub, s / self.r, s % self.r)
        }
    }

    /// Row of the `h_x` matrix for X-check `(i, p)`, `i < r`, `p < n`.
    #[inline]
    pub fn x_check(&self, i: usize, p: usize) -> usize {
        i * self.n + p
    }

    /// Row of the `h_z` matrix for Z-check `(a, j)`, `a < n`, `j < r`.
    #[inline]
    pub fn z_check(&self, a: usize, j: usize) -> usize {
        a * self.r + j
    }

    /// Main-lattice string on `rows × cols`.
    pub fn main_block(&self, rows: &[usize], cols: &[usize]) -> BitVector {
        let mut v = BitVector::zeros(self.n_qubits());
        for &a in rows {
            for &b in cols {
                v.toggle(self.main(a, b));
            }
        }
        v
    }
}

/// Builds the La-cross code for seed `1 + x + x^k` on `n` bits.
pub fn build_lacross(n: usize, k: usize) -> Result<(CssCode, LaCrossLayout)> {
    let spec = CirculantSpec::new(n, k)?;
    let h = circulant_parity_matrix(spec);
    let rank = h.rank();
    if rank != spec.r() {
        return Err(Error::RankDeficientSeed {
            n,
            k,
            rank,
            expected: spec.r(),
        });
    }
    let mut code = hypergraph_product(&h);
    let layout = LaCrossLayout::new(spec);
    debug_assert_eq!(code.k_logical, k * k);
    code.distance = Some(code_distance(&code, &layout));
    Ok((code, layout))
}

/// All codewords of `ker(m)`, enumerated from a kernel basis.
pub fn kernel_codewords(m: &BitMatrix) -> Vec<BitVector> {
    let basis = m.kernel_basis();
    let dim = basis.num_rows();
    assert!(dim <= 24, "kernel dimension {dim} too large to enumerate");
    (0u64..(1 << dim))
        .map(|mask| {
            let sel = BitVector::from_indices(dim, (0..dim).filter(|i| mask >> i & 1 == 1));
            basis.combine_rows(&sel)
        })
        .collect()
}

/// Minimum weight of a nontrivial logical operator, searching single-row X
/// strings and single-column Z strings of the main lattice.
pub fn code_distance(code: &CssCode, layout: &LaCrossLayout) -> usize {
    let h = circulant_parity_matrix(layout.spec());
    let words: Vec<BitVector> = kernel_codewords(&h).into_iter().filter(|c| !c.is_zero()).collect();
    let x_stabs = RowSpace::new(&code.h_x);
    let z_stabs = RowSpace::new(&code.h_z);
    let mut best = usize::MAX;
    for c in &words {
        let w = c.weight();
        if w >= best {
            continue;
        }
        let pattern = c.support();
        for line in 0..layout.n {
            let x_op = layout.main_block(&[line], &pattern);
            let z_op = layout.main_block(&pattern, &[line]);
            if !x_stabs.contains(&x_op) || !z_stabs.contains(&z_op) {
                best = w;
                break;
            }
        }
    }
    best
}

/// Serializable form of a La-cross code.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CodeDocument {
    pub n: usize,
    pub k: usize,
    pub n_qubits: usize,
    pub k_logical: usize,
    pub distance: Option<usize>,
    pub h_x: Vec<Vec<usize>>,
    pub h_z: Vec<Vec<usize>>,
    pub layout: LaCrossLayout,
}

impl CodeDocument {
    pub fn from_code(code: &CssCode, layout: &LaCrossLayout) -> Self {
        Self {
            n: layout.n,
            k: layout.k,
            n_qubits: code.n_qubits,
            k_logical: code.k_logical,
            distance: code.distance,
            h_x: code.h_x.row_indices(),
            h_z: code.h_z.row_indices(),
            layout: *layout,
        }
    }

    pub fn to_code(&self) -> Result<(CssCode, LaCrossLayout)> {
        let h_x = BitMatrix::from_row_indices(self.n_qubits, &self.h_x);
        let h_z = BitMatrix::from_row_indices(self.n_qubits, &self.h_z);
        let mut code = CssCode::new(h_x, h_z)?;
        code.distance = self.distance;
        Ok((code, self.layout))
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(s: &str) -> Result<Self> {
        Ok(serde_json::from_str(s)?)
    }
}

/// Square `d×d` Bacon-Shor subsystem code. Qubit `(i, j)` has index `i·d + j`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BaconShorCode {
    pub d: usize,
    /// X on two adjacent rows, `d - 1` rows.
    pub stabilizers_x: BitMatrix,
    /// Z on two adjacent columns, `d - 1` rows.
    pub stabilizers_z: BitMatrix,
    /// Horizontal `Z_{i,j} Z_{i,j+1}`, ordered row by row; index `i·(d-1) + j`.
    pub gauge_z: BitMatrix,
    /// Vertical `X_{i,j} X_{i+1,j}`; index `i·d + j`.
    pub gauge_x: BitMatrix,
    /// X on the top row.
    pub logical_x: BitVector,
    /// Z on the left column.
    pub logical_z: BitVector,
}

impl BaconShorCode {
    #[inline]
    pub fn qubit(&self, row: usize, col: usize) -> usize {
        row * self.d + col
    }

    pub fn n_qubits(&self) -> usize {
        self.d * self.d
    }

    /// Stabilizers of the Z-gauge: every horizontal ZZ gauge operator.
    pub fn z_gauge_stabilizers(&self) -> &BitMatrix {
        &self.gauge_z
    }

    pub fn gauge_count(&self) -> usize {
        self.gauge_x.num_rows() + self.gauge_z.num_rows()
    }

    /// X on row `i`.
    pub fn row_x(&self, i: usize) -> BitVector {
        BitVector::from_indices(self.n_qubits(), (0..self.d).map(|j| self.qubit(i, j)))
    }
}

pub fn build_bacon_shor(d: usize) -> Result<BaconShorCode> {
    if d < 2 {
        return Err(Error::BaconShorTooSmall(d));
    }
    let q = |i: usize, j: usize| i * d + j;
    let nq = d * d;
    let stabilizers_x = BitMatrix::from_row_indices(
        nq,
        &(0..d - 1)
            .map(|i| (0..d).flat_map(|j| [q(i, j), q(i + 1, j)]).collect())
            .collect::<Vec<_>>(),
    );
    let stabilizers_z = BitMatrix::from_row_indices(
        nq,
        &(0..d - 1)
            .map(|j| (0..d).flat_map(|i| [q(i, j), q(i, j + 1)]).collect())
            .collect::<Vec<_>>(),
    );
    let gauge_z = BitMatrix::from_row_indices(
        nq,
        &(0..d)
            .flat_map(|i| (0..d - 1).map(move |j| vec![q(i, j), q(i, j + 1)]))
            .collect::<Vec<_>>(),
    );
    let gauge_x = BitMatrix::from_row_indices(
        nq,
        &(0..d - 1)
            .flat_map(|i| (0..d).map(move |j| vec![q(i, j), q(i + 1, j)]))
            .collect::<Vec<_>>(),
    );
    Ok(BaconShorCode {
        d,
        stabilizers_x,
        stabilizers_z,
        gauge_z,
        gauge_x,
        logical_x: BitVector::from_indices(nq, (0..d).map(|j| q(0, j))),
        logical_z: BitVector::from_indices(nq, (0..d).map(|i| q(i, 0))),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn circulant_rows() {
        let h = circulant_parity_matrix(CirculantSpec::new(6, 2).unwrap());
        assert_eq!((h.num_rows(), h.num_cols()), (4, 6));
        assert_eq!(h.row(0).to_string(), "111000");
        assert_eq!(h.row(3).to_string(), "000111");

        let h = circulant_parity_matrix(CirculantSpec::new(4, 2).unwrap());
        assert_eq!(h.row(0).to_string(), "1110");
        assert_eq!(h.row(1).to_string(), "0111");
        assert_eq!(h.rank(), 2);
    }

    #[test]
    fn invalid_seeds_rejected() {
        assert!(matches!(CirculantSpec::new(3, 1), Err(Error::InvalidSeed { .. })));
        assert!(matches!(CirculantSpec::new(4, 4), Err(Error::InvalidSeed { .. })));
        assert!(matches!(CirculantSpec::new(4, 0), Err(Error::InvalidSeed { .. })));
        assert!(build_lacross(5, 1).is_err());
    }

    #[test]
    fn repetition_product_is_css() {
        let code = hypergraph_product(&BitMatrix::from_dense(&[&[1, 1]]));
        assert_eq!(code.n_qubits, 5);
        assert_eq!(code.k_logical, 1);
        assert!(code.commutes());
    }

    #[test]
    fn lacross_parameters() {
        for (n, k, nq, kk, d) in [(4, 2, 20, 4, 2), (6, 2, 52, 4, 4), (8, 2, 100, 4, 5), (11, 2, 202, 4, 7)] {
            let (code, layout) = build_lacross(n, k).unwrap();
            assert_eq!(code.n_qubits, nq);
            assert_eq!(layout.n_qubits(), nq);
            assert_eq!(code.k_logical, kk);
            assert_eq!(code.distance, Some(d), "distance for n={n}");
        }
    }

    #[test]
    fn full_rank_builds_have_k_squared_logicals() {
        for n in 4..=12 {
            for k in [2, 3] {
                if k >= n {
                    continue;
                }
                let (code, _) = build_lacross(n, k).unwrap();
                assert_eq!(code.k_logical, k * k, "n={n} k={k}");
                assert!(code.commutes());
                for row in code.h_x.rows().iter().chain(code.h_z.rows()) {
                    assert!(row.weight() <= 6);
                }
            }
        }
    }

    #[test]
    fn layout_indexing() {
        let layout = LaCrossLayout::new(CirculantSpec::new(6, 2).unwrap());
        assert_eq!(layout.main(0, 0), 0);
        assert_eq!(layout.main(5, 5), 35);
        assert_eq!(layout.sub(0, 0), 36);
        assert_eq!(layout.sub(3, 3), 51);
        assert_eq!(layout.locate(40), (Lattice::Sub, 1, 0));
        assert!(layout.index(Lattice::Sub, 4, 0).is_err());
    }

    #[test]
    fn bacon_shor_counts() {
        let bs = build_bacon_shor(3).unwrap();
        assert_eq!(bs.gauge_count(), 12);
        assert_eq!(bs.stabilizers_x.num_rows() + bs.stabilizers_z.num_rows(), 4);
        let bs2 = build_bacon_shor(2).unwrap();
        assert_eq!(bs2.logical_x.weight(), 2);
        assert_eq!(bs2.logical_z.weight(), 2);
        assert_eq!(bs2.logical_x.overlap(&bs2.logical_z), 1);
        assert!(matches!(build_bacon_shor(1), Err(Error::BaconShorTooSmall(1))));
    }

    #[test]
    fn bacon_shor_stabilizers_are_gauge_products() {
        for d in 2..=6 {
            let bs = build_bacon_shor(d).unwrap();
            for j in 0..d - 1 {
                let mut acc = BitVector::zeros(d * d);
                for i in 0..d {
                    acc.xor_assign(bs.gauge_z.row(i * (d - 1) + j));
                }
                assert_eq!(&acc, bs.stabilizers_z.row(j));
            }
            for i in 0..d - 1 {
                let mut acc = BitVector::zeros(d * d);
                for j in 0..d {
                    acc.xor_assign(bs.gauge_x.row(i * d + j));
                }
                assert_eq!(&acc, bs.stabilizers_x.row(i));
            }
            // stabilizers commute with every gauge operator; gauges of opposite type may not
            let gz = &bs.gauge_z;
            for s in bs.stabilizers_x.rows() {
                assert!(gz.rows().iter().all(|g| !g.dot(s)));
            }
        }
    }

    #[test]
    fn json_round_trip_is_bit_exact() {
        let (code, layout) = build_lacross(6, 2).unwrap();
        let doc = CodeDocument::from_code(&code, &layout);
        let text = doc.to_json().unwrap();
        let back = CodeDocument::from_json(&text).unwrap();
        assert_eq!(back, doc);
        assert_eq!(back.to_json().unwrap(), text);
        let (code2, layout2) = back.to_code().unwrap();
        assert_eq!(code2, code);
        assert_eq!(layout2, layout);
    }
}

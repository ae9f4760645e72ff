//! Phase-free Pauli strings in the symplectic `(x | z)` representation.

use crate::gf2::BitVector;

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct PauliString {
    pub x: BitVector,
    pub z: BitVector,
}

impl PauliString {
    pub fn identity(n: usize) -> Self {
        Self {
            x: BitVector::zeros(n),
            z: BitVector::zeros(n),
        }
    }

    pub fn new(x: BitVector, z: BitVector) -> Self {
        assert_eq!(x.len(), z.len(), "x and z parts must have equal length");
        Self { x, z }
    }

    pub fn x_type(x: BitVector) -> Self {
        let n = x.len();
        Self { x, z: BitVector::zeros(n) }
    }

    pub fn z_type(z: BitVector) -> Self {
        let n = z.len();
        Self { x: BitVector::zeros(n), z }
    }

    pub fn single_x(n: usize, q: usize) -> Self {
        Self::x_type(BitVector::from_indices(n, [q]))
    }

    pub fn single_z(n: usize, q: usize) -> Self {
        Self::z_type(BitVector::from_indices(n, [q]))
    }

    pub fn len(&self) -> usize {
        self.x.len()
    }

    pub fn is_empty(&self) -> bool {
        self.x.is_empty()
    }

    pub fn is_identity(&self) -> bool {
        self.x.is_zero() && self.z.is_zero()
    }

    /// Number of qubits acted on non-trivially.
    pub fn weight(&self) -> usize {
        self.x.words().iter().zip(self.z.words()).map(|(a, b)| (a | b).count_ones() as usize).sum()
    }

    /// Symplectic weight `|x| + |z|`.
    pub fn symplectic_weight(&self) -> usize {
        self.x.weight() + self.z.weight()
    }

    pub fn commutes(&self, other: &PauliString) -> bool {
        self.x.dot(&other.z) == self.z.dot(&other.x)
    }

    pub fn mul_assign(&mut self, other: &PauliString) {
        self.x.xor_assign(&other.x);
        self.z.xor_assign(&other.z);
    }

    pub fn mul(&self, other: &PauliString) -> PauliString {
        let mut out = self.clone();
        out.mul_assign(other);
        out
    }

    /// Conjugation by CNOT(control, target).
    pub fn apply_cx(&mut self, c: usize, t: usize) {
        if self.x.get(c) {
            self.x.toggle(t);
        }
        if self.z.get(t) {
            self.z.toggle(c);
        }
    }

    /// Conjugation by CZ(a, b).
    pub fn apply_cz(&mut self, a: usize, b: usize) {
        let (xa, xb) = (self.x.get(a), self.x.get(b));
        if xb {
            self.z.toggle(a);
        }
        if xa {
            self.z.toggle(b);
        }
    }

    pub fn apply_h(&mut self, q: usize) {
        let (xq, zq) = (self.x.get(q), self.z.get(q));
        self.x.set(q, zq);
        self.z.set(q, xq);
    }

    /// Restriction to qubits `[offset, offset + len)`.
    pub fn slice(&self, offset: usize, len: usize) -> PauliString {
        let take = |v: &BitVector| BitVector::from_indices(len, v.ones().filter(|&q| q >= offset && q < offset + len).map(|q| q - offset));
        PauliString::new(take(&self.x), take(&self.z))
    }

    /// Embeds `self` at `offset` inside an `n`-qubit string.
    pub fn embed(&self, n: usize, offset: usize) -> PauliString {
        let put = |v: &BitVector| BitVector::from_indices(n, v.ones().map(|q| q + offset));
        PauliString::new(put(&self.x), put(&self.z))
    }
}

//! Stabilizer-group bookkeeping used to derive detectors.
//!
//! The tracker holds generators of the data-qubit stabilizer group, each tagged
//! with the set of measurement outcomes whose parity fixes its sign. Signs
//! themselves are never tracked: a product of outcomes is a detector iff it is
//! deterministic, whatever its constant value.

use crate::gf2::BitVector;
use crate::pauli::PauliString;

/// Sorted set of measurement indices with symmetric-difference updates.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash)]
pub struct MeasurementSet(Vec<usize>);

impl MeasurementSet {
    pub fn new() -> Self {
        Self(Vec::new())
    }

    pub fn single(m: usize) -> Self {
        Self(vec![m])
    }

    pub fn from_unsorted(items: impl IntoIterator<Item = usize>) -> Self {
        let mut s = Self::new();
        for m in items {
            s.toggle(m);
        }
        s
    }

    pub fn toggle(&mut self, m: usize) {
        match self.0.binary_search(&m) {
            Ok(i) => {
                self.0.remove(i);
            }
            Err(i) => self.0.insert(i, m),
        }
    }

    pub fn xor_assign(&mut self, other: &MeasurementSet) {
        let (a, b) = (&self.0, &other.0);
        let mut out = Vec::with_capacity(a.len() + b.len());
        let (mut i, mut j) = (0, 0);
        while i < a.len() && j < b.len() {
            match a[i].cmp(&b[j]) {
                std::cmp::Ordering::Less => {
                    out.push(a[i]);
                    i += 1;
                }
                std::cmp::Ordering::Greater => {
                    out.push(b[j]);
                    j += 1;
                }
                std::cmp::Ordering::Equal => {
                    i += 1;
                    j += 1;
                }
            }
        }
        out.extend_from_slice(&a[i..]);
        out.extend_from_slice(&b[j..]);
        self.0 = out;
    }

    pub fn contains(&self, m: usize) -> bool {
        self.0.binary_search(&m).is_ok()
    }

    pub fn as_slice(&self) -> &[usize] {
        &self.0
    }

    pub fn into_vec(self) -> Vec<usize> {
        self.0
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }
}

#[derive(Clone, Debug)]
struct Generator {
    pauli: PauliString,
    record: MeasurementSet,
    /// Batch in which the generator was last produced by a measurement.
    epoch: u64,
}

impl Generator {
    fn absorb(&mut self, other: &Generator) {
        self.pauli.mul_assign(&other.pauli);
        self.record.xor_assign(&other.record);
    }
}

/// Known part of the stabilizer group of `n` tracked qubits.
#[derive(Clone, Debug)]
pub struct KnownGroup {
    n: usize,
    gens: Vec<Generator>,
    epoch: u64,
    next_hidden: usize,
}

/// Measurement indices at or above this value stand for discarded outcomes.
const HIDDEN_BASE: usize = usize::MAX / 2;

impl KnownGroup {
    pub fn new(n: usize) -> Self {
        Self {
            n,
            gens: Vec::new(),
            epoch: 0,
            next_hidden: HIDDEN_BASE,
        }
    }

    pub fn n_qubits(&self) -> usize {
        self.n
    }

    pub fn rank(&self) -> usize {
        self.gens.len()
    }

    /// Starts a new measurement batch; generators produced in the current
    /// batch are kept in place when later members of the batch are measured.
    pub fn begin_batch(&mut self) {
        self.epoch += 1;
    }

    pub fn apply_cx(&mut self, c: usize, t: usize) {
        for g in &mut self.gens {
            g.pauli.apply_cx(c, t);
        }
    }

    pub fn apply_cz(&mut self, a: usize, b: usize) {
        for g in &mut self.gens {
            g.pauli.apply_cz(a, b);
        }
    }

    pub fn apply_h(&mut self, q: usize) {
        for g in &mut self.gens {
            g.pauli.apply_h(q);
        }
    }

    /// Writes `target` as a product of generators, returning the XOR of
    /// their records, or `None` when `target` is not in the known group.
    pub fn decompose(&self, target: &PauliString) -> Option<MeasurementSet> {
        self.decompose_indices(target)
            .map(|idx| idx.iter().fold(MeasurementSet::new(), |mut acc, &i| {
                acc.xor_assign(&self.gens[i].record);
                acc
            }))
    }

    fn decompose_indices(&self, target: &PauliString) -> Option<Vec<usize>> {
        let g = self.gens.len();
        // rows: [x | z | combination] reduced to echelon form
        let mut rows: Vec<(BitVector, BitVector, BitVector)> = self
            .gens
            .iter()
            .enumerate()
            .map(|(i, gen)| (gen.pauli.x.clone(), gen.pauli.z.clone(), BitVector::from_indices(g, [i])))
            .collect();
        let mut t = (target.x.clone(), target.z.clone(), BitVector::zeros(g));
        let bit = |r: &(BitVector, BitVector, BitVector), col: usize| if col < self.n { r.0.get(col) } else { r.1.get(col - self.n) };
        let mut rank = 0;
        for col in 0..2 * self.n {
            let Some(p) = (rank..rows.len()).find(|&r| bit(&rows[r], col)) else {
                continue;
            };
            rows.swap(rank, p);
            let pivot = rows[rank].clone();
            for (r, row) in rows.iter_mut().enumerate() {
                if r != rank && bit(row, col) {
                    row.0.xor_assign(&pivot.0);
                    row.1.xor_assign(&pivot.1);
                    row.2.xor_assign(&pivot.2);
                }
            }
            if bit(&t, col) {
                t.0.xor_assign(&pivot.0);
                t.1.xor_assign(&pivot.1);
                t.2.xor_assign(&pivot.2);
            }
            rank += 1;
        }
        (t.0.is_zero() && t.1.is_zero()).then(|| t.2.support())
    }

    /// Measures `pauli` with outcome index `m`, updating the group. Returns the
    /// detector set when the outcome was already determined.
    pub fn measure(&mut self, pauli: &PauliString, m: usize) -> Option<MeasurementSet> {
        let anti: Vec<usize> = (0..self.gens.len()).filter(|&i| !self.gens[i].pauli.commutes(pauli)).collect();
        if let Some((&pivot, rest)) = anti.split_first() {
            let p = self.gens[pivot].clone();
            for &i in rest {
                self.gens[i].absorb(&p);
            }
            self.gens.remove(pivot);
            self.push(pauli.clone(), MeasurementSet::single(m));
            return None;
        }
        match self.decompose_indices(pauli) {
            Some(idx) if !idx.is_empty() => {
                let mut det = MeasurementSet::single(m);
                for &i in &idx {
                    det.xor_assign(&self.gens[i].record);
                }
                // swap in the measured operator for its closest decomposition member
                let epoch = self.epoch;
                let &replace = idx
                    .iter()
                    .min_by_key(|&&i| {
                        let g = &self.gens[i];
                        (g.epoch == epoch, g.pauli.mul(pauli).symplectic_weight(), i)
                    })
                    .unwrap();
                self.gens[replace] = Generator {
                    pauli: pauli.clone(),
                    record: MeasurementSet::single(m),
                    epoch,
                };
                Some(det)
            }
            Some(_) => Some(MeasurementSet::single(m)),
            None => {
                self.push(pauli.clone(), MeasurementSet::single(m));
                None
            }
        }
    }

    fn push(&mut self, pauli: PauliString, record: MeasurementSet) {
        self.gens.push(Generator {
            pauli,
            record,
            epoch: self.epoch,
        });
    }

    /// Resets a qubit to the +1 eigenstate of `pauli` (single-qubit X or Z):
    /// a measurement whose outcome is discarded, then a conditional flip.
    pub fn reset(&mut self, pauli: &PauliString) {
        let q = pauli.x.first_one().or_else(|| pauli.z.first_one()).expect("reset needs a single-qubit Pauli");
        let flip = if pauli.x.get(q) {
            PauliString::single_z(self.n, q)
        } else {
            PauliString::single_x(self.n, q)
        };
        if let Some(known) = self.decompose(pauli) {
            // the flip is conditioned on a known parity; fold it into the
            // records of every generator it anticommutes with
            for g in &mut self.gens {
                if !g.pauli.commutes(&flip) {
                    g.record.xor_assign(&known);
                }
            }
            return;
        }
        let hidden = self.next_hidden;
        self.next_hidden += 1;
        self.measure(pauli, hidden);
        let me = self.gens.len() - 1;
        debug_assert_eq!(self.gens[me].pauli, *pauli);
        // detach every other generator from q
        let own = self.gens[me].clone();
        for g in self.gens[..me].iter_mut() {
            if g.pauli.x.get(q) || g.pauli.z.get(q) {
                g.absorb(&own);
            }
        }
        // generators that now depend on the discarded outcome are unknown
        let tainted: Vec<usize> = (0..me).filter(|&i| self.gens[i].record.contains(hidden)).collect();
        if let Some((&pivot, rest)) = tainted.split_first() {
            let p = self.gens[pivot].clone();
            for &i in rest {
                self.gens[i].absorb(&p);
            }
        }
        self.gens[me].record = MeasurementSet::new();
        if let Some(&pivot) = tainted.first() {
            self.gens.remove(pivot);
        }
        debug_assert!(self.gens.iter().all(|g| g.record.as_slice().iter().all(|&m| m < HIDDEN_BASE)));
    }

    /// Measures without emitting anything: returns whether the outcome was
    /// deterministic before the update.
    pub fn is_deterministic(&self, pauli: &PauliString) -> bool {
        self.decompose(pauli).is_some()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn z(n: usize, qs: &[usize]) -> PauliString {
        PauliString::z_type(BitVector::from_indices(n, qs.iter().copied()))
    }

    fn x(n: usize, qs: &[usize]) -> PauliString {
        PauliString::x_type(BitVector::from_indices(n, qs.iter().copied()))
    }

    #[test]
    fn measurement_sets_xor() {
        let mut a = MeasurementSet::from_unsorted([5, 1, 3]);
        a.xor_assign(&MeasurementSet::from_unsorted([3, 4]));
        assert_eq!(a.as_slice(), &[1, 4, 5]);
        a.toggle(4);
        assert_eq!(a.as_slice(), &[1, 5]);
    }

    #[test]
    fn repetition_code_detectors() {
        let mut g = KnownGroup::new(3);
        for q in 0..3 {
            g.reset(&z(3, &[q]));
        }
        assert_eq!(g.rank(), 3);
        g.begin_batch();
        assert_eq!(g.measure(&z(3, &[0, 1]), 0).unwrap().as_slice(), &[0]);
        assert_eq!(g.measure(&z(3, &[1, 2]), 1).unwrap().as_slice(), &[1]);
        g.begin_batch();
        assert_eq!(g.measure(&z(3, &[0, 1]), 2).unwrap().as_slice(), &[0, 2]);
        assert_eq!(g.measure(&z(3, &[1, 2]), 3).unwrap().as_slice(), &[1, 3]);
        // an X flip on the middle qubit would not change the group
        assert!(g.measure(&x(3, &[0]), 4).is_none());
        assert!(g.decompose(&z(3, &[0, 1])).is_none());
        assert_eq!(g.decompose(&z(3, &[1, 2])).unwrap().as_slice(), &[3]);
    }

    #[test]
    fn bell_pair_through_cx() {
        let mut g = KnownGroup::new(2);
        g.reset(&x(2, &[0]));
        g.reset(&z(2, &[1]));
        g.apply_cx(0, 1);
        assert!(g.is_deterministic(&x(2, &[0, 1])));
        assert!(g.is_deterministic(&z(2, &[0, 1])));
        assert!(!g.is_deterministic(&z(2, &[0])));
        assert!(g.measure(&z(2, &[0]), 0).is_none());
        assert_eq!(g.measure(&z(2, &[1]), 1).unwrap().as_slice(), &[0, 1]);
    }

    #[test]
    fn reset_forgets_correlations() {
        let mut g = KnownGroup::new(2);
        g.reset(&x(2, &[0]));
        g.reset(&z(2, &[1]));
        g.apply_cx(0, 1);
        g.reset(&z(2, &[0]));
        assert_eq!(g.rank(), 1);
        assert!(g.is_deterministic(&z(2, &[0])));
        assert!(!g.is_deterministic(&z(2, &[1])));
        assert!(!g.is_deterministic(&x(2, &[1])));
    }

    #[test]
    fn repeated_reset_keeps_partner_knowledge() {
        let mut g = KnownGroup::new(2);
        g.reset(&z(2, &[0]));
        g.reset(&z(2, &[1]));
        g.measure(&z(2, &[0, 1]), 0);
        g.reset(&z(2, &[0]));
        assert_eq!(g.rank(), 2);
        assert!(g.decompose(&z(2, &[0])).unwrap().is_empty());
        assert!(g.decompose(&z(2, &[1])).unwrap().is_empty());
    }

    #[test]
    fn reset_keeps_independent_records() {
        let mut g = KnownGroup::new(3);
        for q in 0..3 {
            g.reset(&x(3, &[q]));
        }
        g.measure(&z(3, &[1, 2]), 0);
        g.reset(&z(3, &[0]));
        assert_eq!(g.decompose(&z(3, &[1, 2])).unwrap().as_slice(), &[0]);
        assert_eq!(g.rank(), 3);
    }
}

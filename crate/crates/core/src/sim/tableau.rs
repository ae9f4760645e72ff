//! Aaronson-Gottesman stabilizer tableau.
//!
//! Signs are affine forms over GF(2): bit 0 is the constant, bit `v + 1` is
//! the `v`-th random measurement outcome. Sampling mode draws each random
//! outcome and keeps only the constant; symbolic mode allocates a fresh
//! variable instead, so one run shows which parities are deterministic.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{depolarize2_outcome, Op, Program};
use crate::circuit::{Circuit, NoiseChannel};
use crate::error::{Error, Result};
use crate::gf2::BitVector;
use crate::pauli::PauliString;

enum Mode {
    Sample(ChaCha8Rng),
    Symbolic { next_var: usize },
}

pub struct Tableau {
    n: usize,
    w: usize,
    sw: usize,
    x: Vec<u64>,
    z: Vec<u64>,
    s: Vec<u64>,
    mode: Mode,
}

/// Exponent of `i` in `P1 · P2`, summed over a word of qubits, as
/// `(count of +1, count of -1)`.
#[inline]
fn phase_counts(x1: u64, z1: u64, x2: u64, z2: u64) -> (u32, u32) {
    let y1 = x1 & z1;
    let xo = x1 & !z1;
    let zo = !x1 & z1;
    let plus = (y1 & z2 & !x2) | (xo & z2 & x2) | (zo & x2 & !z2);
    let minus = (y1 & x2 & !z2) | (xo & z2 & !x2) | (zo & x2 & z2);
    (plus.count_ones(), minus.count_ones())
}

impl Tableau {
    fn with_mode(n: usize, sign_bits: usize, mode: Mode) -> Self {
        let w = n.div_ceil(64).max(1);
        let sw = sign_bits.div_ceil(64).max(1);
        let rows = 2 * n + 1;
        let mut t = Self {
            n,
            w,
            sw,
            x: vec![0; rows * w],
            z: vec![0; rows * w],
            s: vec![0; rows * sw],
            mode,
        };
        for q in 0..n {
            t.x[q * w + q / 64] |= 1 << (q % 64);
            t.z[(q + n) * w + q / 64] |= 1 << (q % 64);
        }
        t
    }

    /// `|0…0⟩` with random outcomes drawn from `seed`.
    pub fn sampling(n: usize, seed: u64) -> Self {
        Self::with_mode(n, 1, Mode::Sample(ChaCha8Rng::seed_from_u64(seed)))
    }

    /// `|0…0⟩` with room for `max_random` symbolic outcomes.
    pub fn symbolic(n: usize, max_random: usize) -> Self {
        Self::with_mode(n, max_random + 1, Mode::Symbolic { next_var: 0 })
    }

    pub fn n_qubits(&self) -> usize {
        self.n
    }

    #[inline]
    fn bit(v: &[u64], row: usize, w: usize, q: usize) -> bool {
        v[row * w + q / 64] >> (q % 64) & 1 == 1
    }

    #[inline]
    fn flip_const(&mut self, row: usize) {
        self.s[row * self.sw] ^= 1;
    }

    pub fn h(&mut self, q: usize) {
        let (wi, m) = (q / 64, 1u64 << (q % 64));
        for r in 0..2 * self.n {
            let i = r * self.w + wi;
            let (xb, zb) = (self.x[i] & m, self.z[i] & m);
            if xb != 0 && zb != 0 {
                self.s[r * self.sw] ^= 1;
            }
            self.x[i] = (self.x[i] & !m) | zb;
            self.z[i] = (self.z[i] & !m) | xb;
        }
    }

    pub fn cx(&mut self, c: usize, t: usize) {
        for r in 0..2 * self.n {
            let xc = Self::bit(&self.x, r, self.w, c);
            let zt = Self::bit(&self.z, r, self.w, t);
            let xt = Self::bit(&self.x, r, self.w, t);
            let zc = Self::bit(&self.z, r, self.w, c);
            if xc && zt && (xt == zc) {
                self.s[r * self.sw] ^= 1;
            }
            if xc {
                self.x[r * self.w + t / 64] ^= 1 << (t % 64);
            }
            if zt {
                self.z[r * self.w + c / 64] ^= 1 << (c % 64);
            }
        }
    }

    pub fn cz(&mut self, a: usize, b: usize) {
        self.h(b);
        self.cx(a, b);
        self.h(b);
    }

    /// Applies the Pauli `x^x z^z` on qubit `q` to the state.
    pub fn apply_pauli(&mut self, q: usize, x: bool, z: bool) {
        for r in 0..2 * self.n {
            let anti = (x && Self::bit(&self.z, r, self.w, q)) ^ (z && Self::bit(&self.x, r, self.w, q));
            if anti {
                self.flip_const(r);
            }
        }
    }

    /// Row `h` becomes `row_i · row_h`.
    fn rowsum(&mut self, h: usize, i: usize) {
        let (w, sw) = (self.w, self.sw);
        let (mut plus, mut minus) = (0u32, 0u32);
        for k in 0..w {
            let (p, m) = phase_counts(self.x[i * w + k], self.z[i * w + k], self.x[h * w + k], self.z[h * w + k]);
            plus += p;
            minus += m;
        }
        let g = (plus as i64 - minus as i64).rem_euclid(4);
        if g == 2 {
            self.s[h * sw] ^= 1;
        }
        for k in 0..sw {
            self.s[h * sw + k] ^= self.s[i * sw + k];
        }
        for k in 0..w {
            self.x[h * w + k] ^= self.x[i * w + k];
            self.z[h * w + k] ^= self.z[i * w + k];
        }
    }

    fn copy_row(&mut self, from: usize, to: usize) {
        let (w, sw) = (self.w, self.sw);
        self.x.copy_within(from * w..(from + 1) * w, to * w);
        self.z.copy_within(from * w..(from + 1) * w, to * w);
        self.s.copy_within(from * sw..(from + 1) * sw, to * sw);
    }

    fn clear_row(&mut self, r: usize) {
        let (w, sw) = (self.w, self.sw);
        self.x[r * w..(r + 1) * w].fill(0);
        self.z[r * w..(r + 1) * w].fill(0);
        self.s[r * sw..(r + 1) * sw].fill(0);
    }

    fn sign(&self, r: usize) -> Vec<u64> {
        self.s[r * self.sw..(r + 1) * self.sw].to_vec()
    }

    fn fresh_outcome(&mut self) -> Vec<u64> {
        let mut form = vec![0; self.sw];
        match &mut self.mode {
            Mode::Sample(rng) => form[0] = rng.gen::<bool>() as u64,
            Mode::Symbolic { next_var } => {
                let b = *next_var + 1;
                assert!(b < 64 * self.sw, "symbolic variable capacity exceeded");
                form[b / 64] |= 1 << (b % 64);
                *next_var += 1;
            }
        }
        form
    }

    /// Z-basis measurement; returns the outcome's sign form.
    pub fn measure_z(&mut self, q: usize) -> Vec<u64> {
        let n = self.n;
        let p = (n..2 * n).find(|&r| Self::bit(&self.x, r, self.w, q));
        match p {
            Some(p) => {
                for i in 0..2 * n {
                    if i != p && Self::bit(&self.x, i, self.w, q) {
                        self.rowsum(i, p);
                    }
                }
                self.copy_row(p, p - n);
                self.clear_row(p);
                self.z[p * self.w + q / 64] |= 1 << (q % 64);
                let out = self.fresh_outcome();
                self.s[p * self.sw..(p + 1) * self.sw].copy_from_slice(&out);
                out
            }
            None => {
                let scratch = 2 * n;
                self.clear_row(scratch);
                for i in 0..n {
                    if Self::bit(&self.x, i, self.w, q) {
                        self.rowsum(scratch, i + n);
                    }
                }
                self.sign(scratch)
            }
        }
    }

    pub fn measure_x(&mut self, q: usize) -> Vec<u64> {
        self.h(q);
        let out = self.measure_z(q);
        self.h(q);
        out
    }

    /// Resets to `|0⟩` by measuring and flipping by the outcome.
    pub fn reset_z(&mut self, q: usize) {
        let out = self.measure_z(q);
        for r in 0..2 * self.n {
            if Self::bit(&self.z, r, self.w, q) {
                for k in 0..self.sw {
                    self.s[r * self.sw + k] ^= out[k];
                }
            }
        }
    }

    pub fn reset_x(&mut self, q: usize) {
        self.h(q);
        self.reset_z(q);
        self.h(q);
    }
}

fn count_measure_like(program: &Program) -> usize {
    program
        .ops
        .iter()
        .filter(|op| matches!(op, Op::MeasureX(_) | Op::MeasureZ(_) | Op::ResetX(_) | Op::ResetZ(_)))
        .count()
}

/// Runs `program` on `t`, calling `noise` at every noise op; returns one sign
/// form per measurement.
fn run(t: &mut Tableau, program: &Program, mut noise: impl FnMut(&mut Tableau, usize)) -> Vec<Vec<u64>> {
    let mut record = Vec::with_capacity(program.n_measurements);
    for op in &program.ops {
        match *op {
            Op::H(q) => t.h(q),
            Op::Cx(c, x) => t.cx(c, x),
            Op::Cz(a, b) => t.cz(a, b),
            Op::ResetZ(q) => t.reset_z(q),
            Op::ResetX(q) => t.reset_x(q),
            Op::MeasureZ(q) => record.push(t.measure_z(q)),
            Op::MeasureX(q) => record.push(t.measure_x(q)),
            Op::Noise(loc) => noise(t, loc),
        }
    }
    record
}

fn apply_outcome(t: &mut Tableau, qubits: &[usize], pauli: &PauliString) {
    for (i, &q) in qubits.iter().enumerate() {
        if pauli.x.get(i) || pauli.z.get(i) {
            t.apply_pauli(q, pauli.x.get(i), pauli.z.get(i));
        }
    }
}

/// Samples one noisy shot of `circuit` and returns its measurement record.
pub fn tableau_simulate(circuit: &Circuit, seed: u64) -> Vec<bool> {
    let program = Program::compile(circuit);
    let mut t = Tableau::sampling(program.n_qubits, seed);
    let mut noise_rng = ChaCha8Rng::seed_from_u64(seed);
    noise_rng.set_stream(1);
    let record = run(&mut t, &program, |t, loc| {
        let l = &program.locations[loc];
        if l.p > 0.0 && noise_rng.gen::<f64>() < l.p {
            let pauli = match l.channel {
                NoiseChannel::Depolarize2 => depolarize2_outcome(noise_rng.gen_range(1..16)),
                NoiseChannel::ZError => PauliString::single_z(1, 0),
                NoiseChannel::XError => PauliString::single_x(1, 0),
            };
            apply_outcome(t, &l.qubits, &pauli);
        }
    });
    record.into_iter().map(|f| f[0] & 1 == 1).collect()
}

/// Noiseless symbolic run: every measurement as an affine form whose bit 0
/// is the constant and bit `v + 1` the `v`-th random outcome.
pub fn symbolic_measurements(circuit: &Circuit) -> Vec<BitVector> {
    let program = Program::compile(circuit);
    let vars = count_measure_like(&program);
    let mut t = Tableau::symbolic(program.n_qubits, vars);
    let bits = vars + 1;
    run(&mut t, &program, |_, _| {})
        .into_iter()
        .map(|f| BitVector::from_words(bits, f))
        .collect()
}

fn parity_form(record: &[BitVector], ms: &[usize], bits: usize) -> BitVector {
    let mut acc = BitVector::zeros(bits);
    for &m in ms {
        acc.xor_assign(&record[m]);
    }
    acc
}

/// Checks that every detector and observable is a constant parity of the
/// noiseless circuit; returns the constants.
pub fn check_determinism(circuit: &Circuit) -> Result<(Vec<bool>, Vec<bool>)> {
    let program = Program::compile(circuit);
    let record = symbolic_measurements(circuit);
    let bits = record.first().map_or(1, BitVector::len);
    let constant = |form: &BitVector| form.ones().all(|b| b == 0);
    let mut dets = Vec::with_capacity(program.detectors.len());
    for (i, ms) in program.detectors.iter().enumerate() {
        let f = parity_form(&record, ms, bits);
        if !constant(&f) {
            return Err(Error::NonDeterministicDetector(i));
        }
        dets.push(f.get(0));
    }
    let mut obs = Vec::with_capacity(program.observables.len());
    for (i, ms) in program.observables.iter().enumerate() {
        let f = parity_form(&record, ms, bits);
        if !constant(&f) {
            return Err(Error::NonDeterministicObservable(i));
        }
        obs.push(f.get(0));
    }
    Ok((dets, obs))
}

fn parities(record: &[bool], sets: &[Vec<usize>]) -> Vec<bool> {
    sets.iter().map(|ms| ms.iter().fold(false, |a, &m| a ^ record[m])).collect()
}

/// Replay oracle: runs the noiseless circuit on a tableau twice, once with
/// `pauli` inserted at noise location `location`, and returns the detectors
/// and observables whose values differ.
pub fn replay_single_error(circuit: &Circuit, location: usize, pauli: &PauliString) -> Result<(Vec<usize>, Vec<usize>)> {
    let program = Program::compile(circuit);
    let loc = program
        .locations
        .get(location)
        .ok_or(Error::NotANoiseLocation(location))?
        .clone();
    let shot = |inject: bool| {
        let mut t = Tableau::sampling(program.n_qubits, 0x5eed);
        let rec = run(&mut t, &program, |t, l| {
            if inject && l == location {
                apply_outcome(t, &loc.qubits, pauli);
            }
        });
        let rec: Vec<bool> = rec.into_iter().map(|f| f[0] & 1 == 1).collect();
        (parities(&rec, &program.detectors), parities(&rec, &program.observables))
    };
    let (d0, o0) = shot(false);
    let (d1, o1) = shot(true);
    let diff = |a: Vec<bool>, b: Vec<bool>| a.iter().zip(&b).enumerate().filter(|(_, (x, y))| x != y).map(|(i, _)| i).collect();
    Ok((diff(d0, d1), diff(o0, o1)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circuit::Gate;
    use proptest::prelude::*;

    fn naive_g(x1: bool, z1: bool, x2: bool, z2: bool) -> i64 {
        match (x1, z1) {
            (false, false) => 0,
            (true, true) => z2 as i64 - x2 as i64,
            (true, false) => z2 as i64 * (2 * x2 as i64 - 1),
            (false, true) => x2 as i64 * (1 - 2 * z2 as i64),
        }
    }

    proptest! {
        #[test]
        fn phase_counts_match_pointwise_rule(x1: u64, z1: u64, x2: u64, z2: u64) {
            let (p, m) = phase_counts(x1, z1, x2, z2);
            let mut naive = 0i64;
            for b in 0..64 {
                naive += naive_g(x1 >> b & 1 == 1, z1 >> b & 1 == 1, x2 >> b & 1 == 1, z2 >> b & 1 == 1);
            }
            prop_assert_eq!(p as i64 - m as i64, naive);
        }
    }

    #[test]
    fn bell_pair_outcomes_agree() {
        let mut c = Circuit::new(2);
        c.gate(Gate::ResetZ, vec![0, 1]).unwrap();
        c.gate(Gate::H, vec![0]).unwrap();
        c.gate(Gate::Cx, vec![0, 1]).unwrap();
        c.gate(Gate::MeasureZ, vec![0, 1]).unwrap();
        let mut ones = 0;
        for seed in 0..200 {
            let r = tableau_simulate(&c, seed);
            assert_eq!(r[0], r[1]);
            ones += r[0] as usize;
        }
        assert!(ones > 60 && ones < 140);
    }

    #[test]
    fn plus_state_is_deterministic_in_x() {
        let mut t = Tableau::sampling(1, 3);
        t.h(0);
        assert_eq!(t.measure_x(0)[0], 0);
        t.apply_pauli(0, false, true);
        assert_eq!(t.measure_x(0)[0], 1);
        t.reset_x(0);
        assert_eq!(t.measure_x(0)[0], 0);
    }

    #[test]
    fn cz_maps_plus_plus_to_graph_state() {
        // CZ|++> is stabilized by X⊗Z
        let mut c = Circuit::new(2);
        c.gate(Gate::ResetX, vec![0, 1]).unwrap();
        c.gate(Gate::Cz, vec![0, 1]).unwrap();
        c.gate(Gate::MeasureX, vec![0]).unwrap();
        c.gate(Gate::MeasureZ, vec![1]).unwrap();
        c.detector(vec![0, 1]).unwrap();
        let rec = symbolic_measurements(&c);
        assert_eq!(rec[0], rec[1]);
        assert!(rec[0].ones().any(|b| b > 0));
        assert!(check_determinism(&c).is_ok());
    }

    #[test]
    fn y_phase_survives_measurement() {
        // S-free check of signs: prepare |+i>-like stabilizer -Y via H, CX tricks
        // on two qubits and measure the YY-type parity through basis changes.
        let mut c = Circuit::new(2);
        c.gate(Gate::ResetZ, vec![0, 1]).unwrap();
        c.gate(Gate::H, vec![0]).unwrap();
        c.gate(Gate::Cx, vec![0, 1]).unwrap();
        // Bell state: XX = +1, ZZ = +1, so YY = -1
        c.gate(Gate::Cz, vec![0, 1]).unwrap();
        c.gate(Gate::MeasureX, vec![0, 1]).unwrap();
        // after CZ, XX -> (XZ)(ZX) = YY up to sign: parity of X outcomes is fixed
        c.detector(vec![0, 1]).unwrap();
        let (dets, _) = check_determinism(&c).unwrap();
        assert_eq!(dets, vec![true]);
    }

    #[test]
    fn random_detector_is_rejected() {
        let mut c = Circuit::new(1);
        c.gate(Gate::ResetZ, vec![0]).unwrap();
        c.gate(Gate::MeasureX, vec![0]).unwrap();
        c.detector(vec![0]).unwrap();
        assert!(matches!(check_determinism(&c), Err(Error::NonDeterministicDetector(0))));
    }

    #[test]
    fn replay_sees_forced_flip() {
        let mut c = Circuit::new(1);
        c.gate(Gate::ResetX, vec![0]).unwrap();
        c.noise(NoiseChannel::ZError, 0.1, vec![0]).unwrap();
        c.gate(Gate::MeasureX, vec![0]).unwrap();
        c.detector(vec![0]).unwrap();
        let (d, o) = replay_single_error(&c, 0, &PauliString::single_z(1, 0)).unwrap();
        assert_eq!(d, vec![0]);
        assert!(o.is_empty());
        let (d, _) = replay_single_error(&c, 0, &PauliString::single_x(1, 0)).unwrap();
        assert!(d.is_empty());
        assert!(matches!(replay_single_error(&c, 3, &PauliString::single_x(1, 0)), Err(Error::NotANoiseLocation(3))));
    }
}

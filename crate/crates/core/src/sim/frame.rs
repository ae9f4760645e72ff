//! Bit-parallel Pauli-frame simulation, 64 shots per machine word.
//!
//! Every detector is deterministic, so a shot is fully described by the
//! Pauli frame relative to the noiseless run and no reference sample is
//! needed. Batch `b` covers shots `64b..64b+64` and draws from its own
//! ChaCha8 stream, so output does not depend on how batches are scheduled.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use super::tableau::check_determinism;
use super::{Op, Program};
use crate::circuit::{Circuit, Instruction, NoiseChannel};
use crate::error::{Error, Result};
use crate::gf2::BitVector;
use crate::pauli::PauliString;

/// First four bytes of a packed shot file.
pub const SHOT_FILE_MAGIC: [u8; 4] = *b"LXS1";

pub(crate) const LANES: usize = 64;

/// Runs `program` on 64 frames; `noise` mutates the frame at each noise op.
pub(crate) fn execute(program: &Program, x: &mut [u64], z: &mut [u64], meas: &mut Vec<u64>, mut noise: impl FnMut(usize, &mut [u64], &mut [u64])) {
    meas.clear();
    for op in &program.ops {
        match *op {
            Op::H(q) => std::mem::swap(&mut x[q], &mut z[q]),
            Op::Cx(c, t) => {
                x[t] ^= x[c];
                z[c] ^= z[t];
            }
            Op::Cz(a, b) => {
                z[a] ^= x[b];
                z[b] ^= x[a];
            }
            Op::ResetZ(q) | Op::ResetX(q) => {
                x[q] = 0;
                z[q] = 0;
            }
            Op::MeasureZ(q) => meas.push(x[q]),
            Op::MeasureX(q) => meas.push(z[q]),
            Op::Noise(loc) => noise(loc, x, z),
        }
    }
}

fn parity_words(meas: &[u64], sets: &[Vec<usize>]) -> Vec<u64> {
    sets.iter().map(|ms| ms.iter().fold(0, |a, &m| a ^ meas[m])).collect()
}

/// Applies `pauli` (over `qubits`) to the frames selected by `lanes`.
pub(crate) fn inject(x: &mut [u64], z: &mut [u64], qubits: &[usize], pauli: &PauliString, lanes: u64) {
    for (i, &q) in qubits.iter().enumerate() {
        if pauli.x.get(i) {
            x[q] ^= lanes;
        }
        if pauli.z.get(i) {
            z[q] ^= lanes;
        }
    }
}

/// Number of failures before the next success of a Bernoulli(p) sequence.
fn geometric(rng: &mut ChaCha8Rng, log_q: f64) -> u64 {
    if log_q == f64::NEG_INFINITY {
        return 0;
    }
    let u: f64 = 1.0 - rng.gen::<f64>();
    let g = u.ln() / log_q;
    if g >= 1e18 {
        u64::MAX / 2
    } else {
        g as u64
    }
}

/// Detector and observable flips of one 64-shot batch, one word per index.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BatchSample {
    pub detectors: Vec<u64>,
    pub observables: Vec<u64>,
}

impl BatchSample {
    pub fn shot_detectors(&self, lane: usize) -> BitVector {
        BitVector::from_bools(&self.detectors.iter().map(|w| w >> lane & 1 == 1).collect::<Vec<_>>())
    }

    pub fn shot_observables(&self, lane: usize) -> BitVector {
        BitVector::from_bools(&self.observables.iter().map(|w| w >> lane & 1 == 1).collect::<Vec<_>>())
    }
}

/// Compiled sampler for a deterministic-detector circuit.
#[derive(Clone, Debug)]
pub struct FrameSampler {
    program: Program,
}

impl FrameSampler {
    pub fn new(circuit: &Circuit) -> Result<Self> {
        check_determinism(circuit)?;
        Ok(Self {
            program: Program::compile(circuit),
        })
    }

    pub fn n_detectors(&self) -> usize {
        self.program.detectors.len()
    }

    pub fn n_observables(&self) -> usize {
        self.program.observables.len()
    }

    /// Samples shots `64·batch .. 64·batch + 64` of the run seeded by `seed`.
    pub fn sample_batch(&self, seed: u64, batch: u64) -> BatchSample {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(batch);
        let n = self.program.n_qubits;
        let (mut x, mut z) = (vec![0u64; n], vec![0u64; n]);
        let mut meas = Vec::with_capacity(self.program.n_measurements);
        let mut current_p = f64::NAN;
        let mut log_q = 0.0;
        let mut skip = 0u64;
        let locations = &self.program.locations;
        execute(&self.program, &mut x, &mut z, &mut meas, |loc, x, z| {
            let l = &locations[loc];
            if l.p <= 0.0 {
                return;
            }
            if l.p != current_p {
                current_p = l.p;
                log_q = (-l.p).ln_1p();
                skip = geometric(&mut rng, log_q);
            }
            while skip < LANES as u64 {
                let lane = 1u64 << skip;
                match l.channel {
                    NoiseChannel::ZError => z[l.qubits[0]] ^= lane,
                    NoiseChannel::XError => x[l.qubits[0]] ^= lane,
                    NoiseChannel::Depolarize2 => {
                        let o: usize = rng.gen_range(1..16);
                        let (a, b) = (l.qubits[0], l.qubits[1]);
                        let (pa, pb) = (o / 4, o % 4);
                        if pa == 1 || pa == 2 {
                            x[a] ^= lane;
                        }
                        if pa >= 2 {
                            z[a] ^= lane;
                        }
                        if pb == 1 || pb == 2 {
                            x[b] ^= lane;
                        }
                        if pb >= 2 {
                            z[b] ^= lane;
                        }
                    }
                }
                skip += 1 + geometric(&mut rng, log_q);
            }
            skip -= LANES as u64;
        });
        BatchSample {
            detectors: parity_words(&meas, &self.program.detectors),
            observables: parity_words(&meas, &self.program.observables),
        }
    }

    pub fn sample(&self, shots: usize, seed: u64) -> ShotData {
        let batches = shots.div_ceil(LANES);
        let samples: Vec<BatchSample> = (0..batches as u64).into_par_iter().map(|b| self.sample_batch(seed, b)).collect();
        let mut data = ShotData {
            n_detectors: self.n_detectors(),
            n_observables: self.n_observables(),
            detectors: Vec::with_capacity(shots),
            observables: Vec::with_capacity(shots),
        };
        for (b, s) in samples.iter().enumerate() {
            for lane in 0..LANES.min(shots - b * LANES) {
                data.detectors.push(s.shot_detectors(lane));
                data.observables.push(s.shot_observables(lane));
            }
        }
        data
    }
}

/// Per-shot detector and observable flips.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ShotData {
    pub n_detectors: usize,
    pub n_observables: usize,
    pub detectors: Vec<BitVector>,
    pub observables: Vec<BitVector>,
}

impl ShotData {
    pub fn shots(&self) -> usize {
        self.detectors.len()
    }

    /// Packed form: magic, then shots, detector count and observable count
    /// as little-endian `u32`; each shot follows as detector bits then
    /// observable bits, LSB-first, padded to a whole byte.
    pub fn to_packed(&self) -> Vec<u8> {
        let bits = self.n_detectors + self.n_observables;
        let per_shot = bits.div_ceil(8);
        let mut out = Vec::with_capacity(16 + per_shot * self.shots());
        out.extend_from_slice(&SHOT_FILE_MAGIC);
        for v in [self.shots(), self.n_detectors, self.n_observables] {
            out.extend_from_slice(&(v as u32).to_le_bytes());
        }
        for (d, o) in self.detectors.iter().zip(&self.observables) {
            let mut bytes = vec![0u8; per_shot];
            for bit in d.ones().chain(o.ones().map(|j| j + self.n_detectors)) {
                bytes[bit / 8] |= 1 << (bit % 8);
            }
            out.extend_from_slice(&bytes);
        }
        out
    }

    pub fn from_packed(bytes: &[u8]) -> Result<Self> {
        let bad = |m: &str| Error::Parse {
            line: 0,
            message: m.to_string(),
        };
        if bytes.len() < 16 || bytes[..4] != SHOT_FILE_MAGIC {
            return Err(bad("missing shot file header"));
        }
        let word = |i: usize| u32::from_le_bytes(bytes[4 + 4 * i..8 + 4 * i].try_into().unwrap()) as usize;
        let (shots, n_det, n_obs) = (word(0), word(1), word(2));
        let per_shot = (n_det + n_obs).div_ceil(8);
        if bytes.len() != 16 + shots * per_shot {
            return Err(bad("shot file length does not match its header"));
        }
        let mut data = ShotData {
            n_detectors: n_det,
            n_observables: n_obs,
            detectors: Vec::with_capacity(shots),
            observables: Vec::with_capacity(shots),
        };
        for s in 0..shots {
            let chunk = &bytes[16 + s * per_shot..16 + (s + 1) * per_shot];
            let bit = |i: usize| chunk[i / 8] >> (i % 8) & 1 == 1;
            data.detectors.push(BitVector::from_bools(&(0..n_det).map(bit).collect::<Vec<_>>()));
            data.observables.push(BitVector::from_bools(&(n_det..n_det + n_obs).map(bit).collect::<Vec<_>>()));
        }
        Ok(data)
    }
}

/// Samples `shots` shots of `circuit`; identical for a given seed whatever
/// the thread count.
pub fn sample_shots(circuit: &Circuit, shots: usize, seed: u64) -> Result<ShotData> {
    Ok(FrameSampler::new(circuit)?.sample(shots, seed))
}

fn single_frame(circuit: &Circuit, instruction: usize, pauli: &PauliString) -> Result<(Program, Vec<u64>, Vec<u64>, Vec<u64>)> {
    let targets = match circuit.instructions().get(instruction) {
        Some(Instruction::Noise { targets, .. }) => targets,
        _ => return Err(Error::NotANoiseLocation(instruction)),
    };
    if pauli.len() != targets.len() {
        return Err(Error::InvalidCircuit(format!(
            "Pauli on {} qubits for an instruction with {} targets",
            pauli.len(),
            targets.len()
        )));
    }
    let program = Program::compile(circuit);
    let (mut x, mut z) = (vec![0u64; program.n_qubits], vec![0u64; program.n_qubits]);
    let mut meas = Vec::new();
    let locations = &program.locations;
    execute(&program, &mut x, &mut z, &mut meas, |loc, x, z| {
        let l = &locations[loc];
        if l.instruction == instruction {
            let k = l.qubits.len();
            inject(x, z, &l.qubits, &pauli.slice(l.group * k, k), 1);
        }
    });
    Ok((program, x, z, meas))
}

/// Flips caused by `pauli` (over the instruction's targets) inserted at noise
/// instruction `instruction`.
pub fn propagate_pauli(circuit: &Circuit, instruction: usize, pauli: &PauliString) -> Result<(Vec<usize>, Vec<usize>)> {
    let (program, _, _, meas) = single_frame(circuit, instruction, pauli)?;
    let hits = |sets: &[Vec<usize>]| -> Vec<usize> {
        parity_words(&meas, sets)
            .iter()
            .enumerate()
            .filter(|(_, w)| *w & 1 == 1)
            .map(|(i, _)| i)
            .collect()
    };
    Ok((hits(&program.detectors), hits(&program.observables)))
}

/// Frame left on the qubits at the end of the circuit.
pub fn propagate_frame(circuit: &Circuit, instruction: usize, pauli: &PauliString) -> Result<PauliString> {
    let (_, x, z, _) = single_frame(circuit, instruction, pauli)?;
    Ok(PauliString::new(
        BitVector::from_bools(&x.iter().map(|w| w & 1 == 1).collect::<Vec<_>>()),
        BitVector::from_bools(&z.iter().map(|w| w & 1 == 1).collect::<Vec<_>>()),
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circuit::{build_memory_experiment, Gate, NoiseModel};
    use crate::codes::build_lacross;

    fn one_detector(p: f64) -> Circuit {
        let mut c = Circuit::new(1);
        c.gate(Gate::ResetX, vec![0]).unwrap();
        c.noise(NoiseChannel::ZError, p, vec![0]).unwrap();
        c.gate(Gate::MeasureX, vec![0]).unwrap();
        c.detector(vec![0]).unwrap();
        c
    }

    #[test]
    fn forced_flip_fires_every_shot() {
        let data = sample_shots(&one_detector(1.0), 130, 7).unwrap();
        assert_eq!(data.shots(), 130);
        assert!(data.detectors.iter().all(|d| d.get(0)));
        let quiet = sample_shots(&one_detector(0.0), 100, 7).unwrap();
        assert!(quiet.detectors.iter().all(BitVector::is_zero));
    }

    #[test]
    fn rate_matches_probability() {
        let data = sample_shots(&one_detector(0.2), 20_000, 1).unwrap();
        let hits = data.detectors.iter().filter(|d| d.get(0)).count() as f64 / 20_000.0;
        assert!((hits - 0.2).abs() < 4.0 * (0.2f64 * 0.8 / 20_000.0).sqrt());
    }

    #[test]
    fn seeded_runs_repeat() {
        let (code, layout) = build_lacross(4, 2).unwrap();
        let c = build_memory_experiment(&code, &layout, 2, NoiseModel::uniform(0.01).unwrap()).unwrap();
        let a = sample_shots(&c, 200, 11).unwrap();
        let b = sample_shots(&c, 200, 11).unwrap();
        assert_eq!(a, b);
        let other = sample_shots(&c, 200, 12).unwrap();
        assert_ne!(a, other);
        // a prefix of a longer run is the shorter run
        let long = sample_shots(&c, 300, 11).unwrap();
        assert_eq!(&long.detectors[..200], &a.detectors[..]);
    }

    #[test]
    fn packed_round_trip() {
        let (code, layout) = build_lacross(4, 2).unwrap();
        let c = build_memory_experiment(&code, &layout, 2, NoiseModel::uniform(0.02).unwrap()).unwrap();
        let data = sample_shots(&c, 77, 3).unwrap();
        let bytes = data.to_packed();
        assert_eq!(&bytes[..4], b"LXS1");
        assert_eq!(u32::from_le_bytes(bytes[4..8].try_into().unwrap()), 77);
        assert_eq!(ShotData::from_packed(&bytes).unwrap(), data);
        assert!(ShotData::from_packed(&bytes[..20]).is_err());
    }

    #[test]
    fn identity_frame_flips_nothing() {
        let c = one_detector(0.1);
        let (d, o) = propagate_pauli(&c, 1, &PauliString::identity(1)).unwrap();
        assert!(d.is_empty() && o.is_empty());
        let (d, _) = propagate_pauli(&c, 1, &PauliString::single_z(1, 0)).unwrap();
        assert_eq!(d, vec![0]);
        assert!(matches!(propagate_pauli(&c, 0, &PauliString::identity(1)), Err(Error::NotANoiseLocation(0))));
    }

    #[test]
    fn gate_rules_in_frames() {
        let mut c = Circuit::new(2);
        c.noise(NoiseChannel::XError, 0.1, vec![0]).unwrap();
        c.gate(Gate::Cx, vec![0, 1]).unwrap();
        let f = propagate_frame(&c, 0, &PauliString::single_x(1, 0)).unwrap();
        assert_eq!(f, PauliString::x_type(BitVector::from_indices(2, [0, 1])));
        let mut c = Circuit::new(2);
        c.noise(NoiseChannel::XError, 0.1, vec![0]).unwrap();
        c.gate(Gate::Cz, vec![0, 1]).unwrap();
        c.gate(Gate::H, vec![0]).unwrap();
        let f = propagate_frame(&c, 0, &PauliString::single_x(1, 0)).unwrap();
        assert_eq!(f, PauliString::z_type(BitVector::from_indices(2, [0, 1])));
    }
}

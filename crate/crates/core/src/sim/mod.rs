//! Pauli propagation: detector error models, frame sampling and a stabilizer
//! tableau for noiseless verification.

mod dem;
mod frame;
mod tableau;

pub use dem::{enumerate_mechanisms, extract_dem, DetectorErrorModel, ErrorMechanism, RawMechanism};
pub use frame::{propagate_frame, propagate_pauli, sample_shots, BatchSample, FrameSampler, ShotData, SHOT_FILE_MAGIC};
pub use tableau::{check_determinism, replay_single_error, symbolic_measurements, tableau_simulate, Tableau};

use crate::circuit::{Circuit, Gate, Instruction, NoiseChannel};
use crate::pauli::PauliString;

/// One independent noise channel: a target tuple of a noise instruction.
#[derive(Clone, Debug, PartialEq)]
pub struct NoiseLocation {
    pub instruction: usize,
    /// Tuple index inside the instruction's target list.
    pub group: usize,
    pub channel: NoiseChannel,
    pub qubits: Vec<usize>,
    pub p: f64,
}

impl NoiseLocation {
    /// Non-identity Pauli outcomes over `qubits`, each with its probability.
    pub fn outcomes(&self) -> Vec<(PauliString, f64)> {
        let n = self.qubits.len();
        match self.channel {
            NoiseChannel::ZError => vec![(PauliString::single_z(n, 0), self.p)],
            NoiseChannel::XError => vec![(PauliString::single_x(n, 0), self.p)],
            NoiseChannel::Depolarize2 => (1..16).map(|o| (depolarize2_outcome(o), self.p / 15.0)).collect(),
        }
    }
}

/// Outcome `o ∈ 1..16` of a two-qubit depolarizing channel as `P_a ⊗ P_b`
/// with `o = 4a + b` and `0, 1, 2, 3 = I, X, Y, Z`.
pub fn depolarize2_outcome(o: usize) -> PauliString {
    let mut p = PauliString::identity(2);
    for (q, code) in [(0, o / 4), (1, o % 4)] {
        if code == 1 || code == 2 {
            p.x.set(q, true);
        }
        if code == 2 || code == 3 {
            p.z.set(q, true);
        }
    }
    p
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub(crate) enum Op {
    H(usize),
    Cx(usize, usize),
    Cz(usize, usize),
    ResetZ(usize),
    ResetX(usize),
    MeasureZ(usize),
    MeasureX(usize),
    /// Index into [`Program::locations`].
    Noise(usize),
}

/// Flattened circuit: one op per qubit or pair, detectors and observables as
/// measurement lists.
#[derive(Clone, Debug)]
pub(crate) struct Program {
    pub n_qubits: usize,
    pub n_measurements: usize,
    pub ops: Vec<Op>,
    pub locations: Vec<NoiseLocation>,
    pub detectors: Vec<Vec<usize>>,
    pub observables: Vec<Vec<usize>>,
}

impl Program {
    pub fn compile(circuit: &Circuit) -> Self {
        let mut ops = Vec::new();
        let mut locations = Vec::new();
        let mut detectors = Vec::new();
        let mut observables = vec![Vec::new(); circuit.n_observables()];
        for (idx, inst) in circuit.instructions().iter().enumerate() {
            match inst {
                Instruction::Gate { gate, targets } => match gate {
                    Gate::Cx => ops.extend(targets.chunks(2).map(|c| Op::Cx(c[0], c[1]))),
                    Gate::Cz => ops.extend(targets.chunks(2).map(|c| Op::Cz(c[0], c[1]))),
                    Gate::H => ops.extend(targets.iter().map(|&q| Op::H(q))),
                    Gate::ResetZ => ops.extend(targets.iter().map(|&q| Op::ResetZ(q))),
                    Gate::ResetX => ops.extend(targets.iter().map(|&q| Op::ResetX(q))),
                    Gate::MeasureZ => ops.extend(targets.iter().map(|&q| Op::MeasureZ(q))),
                    Gate::MeasureX => ops.extend(targets.iter().map(|&q| Op::MeasureX(q))),
                },
                Instruction::Noise { channel, p, targets } => {
                    for (group, qs) in targets.chunks(channel.arity()).enumerate() {
                        ops.push(Op::Noise(locations.len()));
                        locations.push(NoiseLocation {
                            instruction: idx,
                            group,
                            channel: *channel,
                            qubits: qs.to_vec(),
                            p: *p,
                        });
                    }
                }
                Instruction::Detector(ms) => detectors.push(ms.clone()),
                Instruction::Observable { id, measurements } => {
                    let obs: &mut Vec<usize> = &mut observables[*id];
                    for &m in measurements {
                        // repeated references cancel
                        if let Some(pos) = obs.iter().position(|&x| x == m) {
                            obs.swap_remove(pos);
                        } else {
                            obs.push(m);
                        }
                    }
                }
                Instruction::Tick => {}
            }
        }
        for obs in &mut observables {
            obs.sort_unstable();
        }
        Self {
            n_qubits: circuit.n_qubits(),
            n_measurements: circuit.n_measurements(),
            ops,
            locations,
            detectors,
            observables,
        }
    }
}

/// Every noise channel of `circuit` in program order.
pub fn noise_locations(circuit: &Circuit) -> Vec<NoiseLocation> {
    Program::compile(circuit).locations
}

//! Clifford circuit IR with noise channels and detector/observable
//! annotations, plus builders for memory and teleported-gate experiments.

mod builders;
mod text;
mod tracker;

pub use builders::*;
pub use tracker::{KnownGroup, MeasurementSet};

use std::ops::Range;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Gate {
    ResetZ,
    ResetX,
    MeasureZ,
    MeasureX,
    Cx,
    Cz,
    H,
}

impl Gate {
    pub const ALL: [Gate; 7] = [Gate::ResetZ, Gate::ResetX, Gate::MeasureZ, Gate::MeasureX, Gate::Cx, Gate::Cz, Gate::H];

    pub fn name(self) -> &'static str {
        match self {
            Gate::ResetZ => "RESET_Z",
            Gate::ResetX => "RESET_X",
            Gate::MeasureZ => "MEASURE_Z",
            Gate::MeasureX => "MEASURE_X",
            Gate::Cx => "CX",
            Gate::Cz => "CZ",
            Gate::H => "H",
        }
    }

    pub fn is_two_qubit(self) -> bool {
        matches!(self, Gate::Cx | Gate::Cz)
    }

    pub fn is_measurement(self) -> bool {
        matches!(self, Gate::MeasureZ | Gate::MeasureX)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum NoiseChannel {
    /// Uniform over the 15 non-identity two-qubit Paulis.
    Depolarize2,
    ZError,
    XError,
}

impl NoiseChannel {
    pub const ALL: [NoiseChannel; 3] = [NoiseChannel::Depolarize2, NoiseChannel::ZError, NoiseChannel::XError];

    pub fn name(self) -> &'static str {
        match self {
            NoiseChannel::Depolarize2 => "DEPOLARIZE2",
            NoiseChannel::ZError => "Z_ERROR",
            NoiseChannel::XError => "X_ERROR",
        }
    }

    pub fn arity(self) -> usize {
        match self {
            NoiseChannel::Depolarize2 => 2,
            _ => 1,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum Instruction {
    Gate { gate: Gate, targets: Vec<usize> },
    Noise { channel: NoiseChannel, p: f64, targets: Vec<usize> },
    /// Parity of the listed absolute measurement indices.
    Detector(Vec<usize>),
    /// Adds the listed measurements into observable `id`.
    Observable { id: usize, measurements: Vec<usize> },
    Tick,
}

/// Physical error model: `p` after two-qubit gates and as phase flips on
/// X-basis resets and measurements.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct NoiseModel {
    pub p: f64,
    pub apply_two_qubit: bool,
    pub apply_meas_reset: bool,
}

impl NoiseModel {
    pub fn noiseless() -> Self {
        Self {
            p: 0.0,
            apply_two_qubit: false,
            apply_meas_reset: false,
        }
    }

    pub fn uniform(p: f64) -> Result<Self> {
        let model = Self {
            p,
            apply_two_qubit: true,
            apply_meas_reset: true,
        };
        model.validate()?;
        Ok(model)
    }

    pub fn validate(&self) -> Result<()> {
        if !(0.0..=0.5).contains(&self.p) {
            return Err(Error::InvalidConfig(format!("noise probability {} outside [0, 0.5]", self.p)));
        }
        Ok(())
    }

    pub fn two_qubit(&self) -> Option<f64> {
        (self.apply_two_qubit && self.p > 0.0).then_some(self.p)
    }

    pub fn meas_reset(&self) -> Option<f64> {
        (self.apply_meas_reset && self.p > 0.0).then_some(self.p)
    }
}

/// An ordered list of instructions over `n_qubits` qubits.
#[derive(Clone, Debug, PartialEq)]
pub struct Circuit {
    n_qubits: usize,
    instructions: Vec<Instruction>,
    n_measurements: usize,
    n_detectors: usize,
    n_observables: usize,
}

impl Circuit {
    pub fn new(n_qubits: usize) -> Self {
        Self {
            n_qubits,
            instructions: Vec::new(),
            n_measurements: 0,
            n_detectors: 0,
            n_observables: 0,
        }
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn n_measurements(&self) -> usize {
        self.n_measurements
    }

    pub fn n_detectors(&self) -> usize {
        self.n_detectors
    }

    pub fn n_observables(&self) -> usize {
        self.n_observables
    }

    pub fn instructions(&self) -> &[Instruction] {
        &self.instructions
    }

    fn check_qubits(&self, targets: &[usize]) -> Result<()> {
        if let Some(&q) = targets.iter().find(|&&q| q >= self.n_qubits) {
            return Err(Error::InvalidCircuit(format!("qubit {q} >= {}", self.n_qubits)));
        }
        Ok(())
    }

    fn check_pairs(targets: &[usize]) -> Result<()> {
        if targets.len() % 2 != 0 {
            return Err(Error::InvalidCircuit("two-qubit operation needs an even target count".into()));
        }
        if targets.chunks(2).any(|c| c[0] == c[1]) {
            return Err(Error::InvalidCircuit("two-qubit operation on a repeated qubit".into()));
        }
        Ok(())
    }

    fn check_measurements(&self, ms: &[usize]) -> Result<()> {
        if let Some(&m) = ms.iter().find(|&&m| m >= self.n_measurements) {
            return Err(Error::InvalidCircuit(format!(
                "measurement index {m} not yet emitted ({} so far)",
                self.n_measurements
            )));
        }
        Ok(())
    }

    /// Validates and appends an instruction.
    pub fn push(&mut self, inst: Instruction) -> Result<()> {
        match &inst {
            Instruction::Gate { gate, targets } => {
                self.check_qubits(targets)?;
                if gate.is_two_qubit() {
                    Self::check_pairs(targets)?;
                }
                if gate.is_measurement() {
                    self.n_measurements += targets.len();
                }
            }
            Instruction::Noise { channel, p, targets } => {
                self.check_qubits(targets)?;
                if !(0.0..=1.0).contains(p) {
                    return Err(Error::InvalidCircuit(format!("probability {p} outside [0, 1]")));
                }
                if channel.arity() == 2 {
                    Self::check_pairs(targets)?;
                }
            }
            Instruction::Detector(ms) => {
                self.check_measurements(ms)?;
                self.n_detectors += 1;
            }
            Instruction::Observable { id, measurements } => {
                self.check_measurements(measurements)?;
                self.n_observables = self.n_observables.max(id + 1);
            }
            Instruction::Tick => {}
        }
        self.instructions.push(inst);
        Ok(())
    }

    /// Appends a gate and returns the measurement indices it produced.
    pub fn gate(&mut self, gate: Gate, targets: Vec<usize>) -> Result<Range<usize>> {
        let start = self.n_measurements;
        self.push(Instruction::Gate { gate, targets })?;
        Ok(start..self.n_measurements)
    }

    pub fn noise(&mut self, channel: NoiseChannel, p: f64, targets: Vec<usize>) -> Result<()> {
        self.push(Instruction::Noise { channel, p, targets })
    }

    pub fn detector(&mut self, measurements: Vec<usize>) -> Result<usize> {
        self.push(Instruction::Detector(measurements))?;
        Ok(self.n_detectors - 1)
    }

    pub fn observable(&mut self, id: usize, measurements: Vec<usize>) -> Result<()> {
        self.push(Instruction::Observable { id, measurements })
    }

    pub fn tick(&mut self) {
        self.instructions.push(Instruction::Tick);
    }

    /// Appends every instruction of `other`, shifting its measurement indices.
    pub fn append(&mut self, other: &Circuit) -> Result<()> {
        let shift = self.n_measurements;
        for inst in &other.instructions {
            let moved = match inst {
                Instruction::Detector(ms) => Instruction::Detector(ms.iter().map(|m| m + shift).collect()),
                Instruction::Observable { id, measurements } => Instruction::Observable {
                    id: *id,
                    measurements: measurements.iter().map(|m| m + shift).collect(),
                },
                other => other.clone(),
            };
            self.push(moved)?;
        }
        Ok(())
    }

    pub fn count_gates(&self, pred: impl Fn(Gate) -> bool) -> usize {
        self.instructions
            .iter()
            .map(|inst| match inst {
                Instruction::Gate { gate, targets } if pred(*gate) => {
                    if gate.is_two_qubit() {
                        targets.len() / 2
                    } else {
                        targets.len()
                    }
                }
                _ => 0,
            })
            .sum()
    }

    /// Number of independent noise channels (one per target tuple).
    pub fn count_noise(&self, channel: NoiseChannel) -> usize {
        self.instructions
            .iter()
            .map(|inst| match inst {
                Instruction::Noise { channel: c, targets, .. } if *c == channel => targets.len() / c.arity(),
                _ => 0,
            })
            .sum()
    }

    pub fn noise_locations(&self) -> Vec<usize> {
        self.instructions
            .iter()
            .enumerate()
            .filter(|(_, inst)| matches!(inst, Instruction::Noise { .. }))
            .map(|(i, _)| i)
            .collect()
    }

    /// Copy of the circuit with every noise channel removed.
    pub fn without_noise(&self) -> Circuit {
        let mut out = Circuit::new(self.n_qubits);
        for inst in &self.instructions {
            if !matches!(inst, Instruction::Noise { .. }) {
                out.push(inst.clone()).expect("filtered copy of a valid circuit");
            }
        }
        out
    }

    pub fn to_text(&self) -> String {
        text::write(self)
    }

    pub fn from_text(s: &str) -> Result<Self> {
        text::parse(s)
    }

    /// Hex SHA-256 of the text form.
    pub fn content_hash(&self) -> String {
        use sha2::{Digest, Sha256};
        hex::encode(Sha256::digest(self.to_text().as_bytes()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn measurement_indices_are_dense() {
        let mut c = Circuit::new(3);
        assert_eq!(c.gate(Gate::MeasureZ, vec![0, 1]).unwrap(), 0..2);
        assert_eq!(c.gate(Gate::MeasureX, vec![2]).unwrap(), 2..3);
        assert_eq!(c.n_measurements(), 3);
        assert_eq!(c.detector(vec![0, 2]).unwrap(), 0);
        c.observable(1, vec![1]).unwrap();
        assert_eq!(c.n_observables(), 2);
    }

    #[test]
    fn validation_errors() {
        let mut c = Circuit::new(2);
        assert!(c.gate(Gate::Cx, vec![0]).is_err());
        assert!(c.gate(Gate::Cx, vec![1, 1]).is_err());
        assert!(c.gate(Gate::H, vec![2]).is_err());
        assert!(c.detector(vec![0]).is_err());
        assert!(c.noise(NoiseChannel::ZError, 1.5, vec![0]).is_err());
        assert!(NoiseModel::uniform(0.7).is_err());
    }

    #[test]
    fn noise_counting() {
        let mut c = Circuit::new(4);
        c.gate(Gate::Cx, vec![0, 1, 2, 3]).unwrap();
        c.noise(NoiseChannel::Depolarize2, 0.01, vec![0, 1, 2, 3]).unwrap();
        c.noise(NoiseChannel::ZError, 0.01, vec![0, 1, 2]).unwrap();
        assert_eq!(c.count_gates(Gate::is_two_qubit), 2);
        assert_eq!(c.count_noise(NoiseChannel::Depolarize2), 2);
        assert_eq!(c.count_noise(NoiseChannel::ZError), 3);
        assert_eq!(c.noise_locations(), vec![1, 2]);
        assert_eq!(c.without_noise().instructions().len(), 1);
    }

    #[test]
    fn append_shifts_measurements() {
        let mut a = Circuit::new(1);
        a.gate(Gate::MeasureZ, vec![0]).unwrap();
        let mut b = Circuit::new(1);
        b.gate(Gate::MeasureZ, vec![0]).unwrap();
        b.detector(vec![0]).unwrap();
        a.append(&b).unwrap();
        assert_eq!(a.instructions()[2], Instruction::Detector(vec![1]));
    }
}

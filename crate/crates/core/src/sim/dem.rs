//! Detector error models: one mechanism per noise outcome, merged by
//! signature.

use std::collections::HashMap;
use std::fmt::Write as _;

use super::frame::{execute, inject, LANES};
use super::tableau::check_determinism;
use super::Program;
use crate::circuit::Circuit;
use crate::error::{Error, Result};
use crate::pauli::PauliString;

/// An independent error with the detectors and observables it flips.
#[derive(Clone, Debug, PartialEq)]
pub struct ErrorMechanism {
    pub probability: f64,
    pub detectors: Vec<usize>,
    pub observables: Vec<usize>,
}

/// A single noise outcome before merging.
#[derive(Clone, Debug, PartialEq)]
pub struct RawMechanism {
    /// Index into the circuit's noise locations.
    pub location: usize,
    pub instruction: usize,
    pub pauli: PauliString,
    pub probability: f64,
    pub detectors: Vec<usize>,
    pub observables: Vec<usize>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct DetectorErrorModel {
    pub n_detectors: usize,
    pub n_observables: usize,
    pub mechanisms: Vec<ErrorMechanism>,
}

/// Probability that exactly one of two independent events happens.
pub fn xor_probability(p1: f64, p2: f64) -> f64 {
    p1 * (1.0 - p2) + p2 * (1.0 - p1)
}

/// Every non-identity outcome of every noise location with its signature,
/// propagated 64 outcomes at a time.
pub fn enumerate_mechanisms(circuit: &Circuit) -> Vec<RawMechanism> {
    let program = Program::compile(circuit);
    let mut items: Vec<(usize, PauliString, f64)> = Vec::new();
    for (i, loc) in program.locations.iter().enumerate() {
        for (pauli, p) in loc.outcomes() {
            items.push((i, pauli, p));
        }
    }
    let n = program.n_qubits;
    let mut out = Vec::with_capacity(items.len());
    let mut meas = Vec::with_capacity(program.n_measurements);
    for chunk in items.chunks(LANES) {
        let (mut x, mut z) = (vec![0u64; n], vec![0u64; n]);
        let mut next = 0;
        execute(&program, &mut x, &mut z, &mut meas, |loc, x, z| {
            while next < chunk.len() && chunk[next].0 == loc {
                inject(x, z, &program.locations[loc].qubits, &chunk[next].1, 1 << next);
                next += 1;
            }
        });
        let det_words: Vec<u64> = program.detectors.iter().map(|ms| ms.iter().fold(0, |a, &m| a ^ meas[m])).collect();
        let obs_words: Vec<u64> = program.observables.iter().map(|ms| ms.iter().fold(0, |a, &m| a ^ meas[m])).collect();
        for (lane, (loc, pauli, p)) in chunk.iter().enumerate() {
            let hits = |words: &[u64]| -> Vec<usize> { (0..words.len()).filter(|&i| words[i] >> lane & 1 == 1).collect() };
            out.push(RawMechanism {
                location: *loc,
                instruction: program.locations[*loc].instruction,
                pauli: pauli.clone(),
                probability: *p,
                detectors: hits(&det_words),
                observables: hits(&obs_words),
            });
        }
    }
    out
}

/// Checks determinism, enumerates all outcomes and merges equal signatures.
/// Outcomes flipping nothing are dropped.
pub fn extract_dem(circuit: &Circuit) -> Result<DetectorErrorModel> {
    check_determinism(circuit)?;
    Ok(DetectorErrorModel::from_raw(circuit.n_detectors(), circuit.n_observables(), &enumerate_mechanisms(circuit)))
}

impl DetectorErrorModel {
    pub fn from_raw(n_detectors: usize, n_observables: usize, raw: &[RawMechanism]) -> Self {
        let mut index: HashMap<(Vec<usize>, Vec<usize>), usize> = HashMap::new();
        let mut mechanisms: Vec<ErrorMechanism> = Vec::new();
        for r in raw {
            if r.probability <= 0.0 || (r.detectors.is_empty() && r.observables.is_empty()) {
                continue;
            }
            let key = (r.detectors.clone(), r.observables.clone());
            match index.get(&key) {
                Some(&i) => mechanisms[i].probability = xor_probability(mechanisms[i].probability, r.probability),
                None => {
                    index.insert(key, mechanisms.len());
                    mechanisms.push(ErrorMechanism {
                        probability: r.probability,
                        detectors: r.detectors.clone(),
                        observables: r.observables.clone(),
                    });
                }
            }
        }
        Self {
            n_detectors,
            n_observables,
            mechanisms,
        }
    }

    pub fn len(&self) -> usize {
        self.mechanisms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.mechanisms.is_empty()
    }

    /// `dem <detectors> <observables>` followed by `error(p) D.. L..` lines.
    pub fn to_text(&self) -> String {
        let mut out = format!("dem {} {}\n", self.n_detectors, self.n_observables);
        for m in &self.mechanisms {
            write!(out, "error({:?})", m.probability).unwrap();
            for d in &m.detectors {
                write!(out, " D{d}").unwrap();
            }
            for o in &m.observables {
                write!(out, " L{o}").unwrap();
            }
            out.push('\n');
        }
        out
    }

    pub fn from_text(s: &str) -> Result<Self> {
        let mut lines = s.lines().enumerate().filter(|(_, l)| !l.trim().is_empty() && !l.trim_start().starts_with('#'));
        let err = |line: usize, message: String| Error::Parse { line: line + 1, message };
        let (hl, header) = lines.next().ok_or_else(|| err(0, "empty DEM".into()))?;
        let h: Vec<&str> = header.split_whitespace().collect();
        if h.len() != 3 || h[0] != "dem" {
            return Err(err(hl, format!("bad DEM header {header:?}")));
        }
        let count = |t: &str| t.parse::<usize>().map_err(|_| err(hl, format!("bad count {t:?}")));
        let (n_detectors, n_observables) = (count(h[1])?, count(h[2])?);
        let mut mechanisms = Vec::new();
        for (ln, line) in lines {
            let mut toks = line.split_whitespace();
            let head = toks.next().unwrap();
            let p_text = head
                .strip_prefix("error(")
                .and_then(|r| r.strip_suffix(')'))
                .ok_or_else(|| err(ln, format!("expected error(p), found {head:?}")))?;
            let probability: f64 = p_text.parse().map_err(|_| err(ln, format!("bad probability {p_text:?}")))?;
            let (mut detectors, mut observables) = (Vec::new(), Vec::new());
            for t in toks {
                let (list, bound, body) = if let Some(b) = t.strip_prefix('D') {
                    (&mut detectors, n_detectors, b)
                } else if let Some(b) = t.strip_prefix('L') {
                    (&mut observables, n_observables, b)
                } else {
                    return Err(err(ln, format!("unknown target {t:?}")));
                };
                let i: usize = body.parse().map_err(|_| err(ln, format!("bad index {t:?}")))?;
                if i >= bound {
                    return Err(err(ln, format!("target {t} out of range")));
                }
                list.push(i);
            }
            detectors.sort_unstable();
            observables.sort_unstable();
            mechanisms.push(ErrorMechanism {
                probability,
                detectors,
                observables,
            });
        }
        Ok(Self {
            n_detectors,
            n_observables,
            mechanisms,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circuit::{build_memory_experiment, Gate, NoiseChannel, NoiseModel};
    use crate::codes::build_lacross;
    use proptest::prelude::*;

    #[test]
    fn noiseless_circuit_has_empty_dem() {
        let (code, layout) = build_lacross(4, 2).unwrap();
        let c = build_memory_experiment(&code, &layout, 2, NoiseModel::noiseless()).unwrap();
        assert!(extract_dem(&c).unwrap().is_empty());
    }

    #[test]
    fn single_phase_flip_read_off() {
        let mut c = Circuit::new(1);
        c.gate(Gate::ResetX, vec![0]).unwrap();
        c.noise(NoiseChannel::ZError, 0.01, vec![0]).unwrap();
        c.gate(Gate::MeasureX, vec![0]).unwrap();
        c.detector(vec![0]).unwrap();
        let dem = extract_dem(&c).unwrap();
        assert_eq!(
            dem.mechanisms,
            vec![ErrorMechanism {
                probability: 0.01,
                detectors: vec![0],
                observables: vec![]
            }]
        );
    }

    #[test]
    fn equal_signatures_merge() {
        let mut c = Circuit::new(1);
        c.gate(Gate::ResetX, vec![0]).unwrap();
        c.noise(NoiseChannel::ZError, 0.1, vec![0]).unwrap();
        c.noise(NoiseChannel::ZError, 0.2, vec![0]).unwrap();
        c.gate(Gate::MeasureX, vec![0]).unwrap();
        c.detector(vec![0]).unwrap();
        let dem = extract_dem(&c).unwrap();
        assert_eq!(dem.len(), 1);
        assert!((dem.mechanisms[0].probability - 0.26).abs() < 1e-12);
    }

    #[test]
    fn text_round_trip() {
        let (code, layout) = build_lacross(4, 2).unwrap();
        let c = build_memory_experiment(&code, &layout, 2, NoiseModel::uniform(0.003).unwrap()).unwrap();
        let dem = extract_dem(&c).unwrap();
        let back = DetectorErrorModel::from_text(&dem.to_text()).unwrap();
        assert_eq!(back, dem);
        assert!(DetectorErrorModel::from_text("dem 2 1\nerror(0.1) D5\n").is_err());
        assert!(DetectorErrorModel::from_text("nope\n").is_err());
    }

    proptest! {
        #[test]
        fn merging_is_xor_of_bernoullis(ps in proptest::collection::vec(0.0f64..0.5, 1..8)) {
            let merged = ps.iter().fold(0.0, |acc, &p| xor_probability(acc, p));
            let closed = 0.5 - 0.5 * ps.iter().map(|p| 1.0 - 2.0 * p).product::<f64>();
            prop_assert!((merged - closed).abs() < 1e-12);
            prop_assert!(merged <= 0.5);
        }
    }
}

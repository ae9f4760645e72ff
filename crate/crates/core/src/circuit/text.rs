//! Line-oriented circuit text format.
//!
//! ```text
//! QUBITS 5
//! RESET_X 4
//! Z_ERROR(0.001) 4
//! CX 4 0
//! DEPOLARIZE2(0.001) 4 0
//! MEASURE_X 4
//! DETECTOR m0
//! OBSERVABLE 0 m0
//! TICK
//! ```
//!
//! Probabilities are written with Rust's shortest round-trip float formatting,
//! so `parse(write(c)) == c` bit for bit. Blank lines and `#` comments are
//! ignored on input.

use std::fmt::Write as _;

use super::{Circuit, Gate, Instruction, NoiseChannel};
use crate::error::{Error, Result};

pub(crate) fn write(c: &Circuit) -> String {
    let mut out = String::new();
    writeln!(out, "QUBITS {}", c.n_qubits()).unwrap();
    for inst in c.instructions() {
        match inst {
            Instruction::Gate { gate, targets } => {
                out.push_str(gate.name());
                for q in targets {
                    write!(out, " {q}").unwrap();
                }
            }
            Instruction::Noise { channel, p, targets } => {
                write!(out, "{}({p:?})", channel.name()).unwrap();
                for q in targets {
                    write!(out, " {q}").unwrap();
                }
            }
            Instruction::Detector(ms) => {
                out.push_str("DETECTOR");
                for m in ms {
                    write!(out, " m{m}").unwrap();
                }
            }
            Instruction::Observable { id, measurements } => {
                write!(out, "OBSERVABLE {id}").unwrap();
                for m in measurements {
                    write!(out, " m{m}").unwrap();
                }
            }
            Instruction::Tick => out.push_str("TICK"),
        }
        out.push('\n');
    }
    out
}

fn parse_index(tok: &str, line: usize) -> Result<usize> {
    tok.parse().map_err(|_| Error::Parse {
        line,
        message: format!("expected an index, found {tok:?}"),
    })
}

fn parse_meas(tok: &str, line: usize) -> Result<usize> {
    let body = tok.strip_prefix('m').ok_or_else(|| Error::Parse {
        line,
        message: format!("measurement reference must look like m<index>, found {tok:?}"),
    })?;
    parse_index(body, line)
}

pub(crate) fn parse(s: &str) -> Result<Circuit> {
    let mut circuit: Option<Circuit> = None;
    for (i, raw) in s.lines().enumerate() {
        let line = i + 1;
        let content = raw.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        let mut toks = content.split_whitespace();
        let head = toks.next().unwrap();
        let err = |message: String| Error::Parse { line, message };

        if head == "QUBITS" {
            if circuit.is_some() {
                return Err(err("duplicate QUBITS header".into()));
            }
            let n = parse_index(toks.next().ok_or_else(|| err("QUBITS needs a count".into()))?, line)?;
            circuit = Some(Circuit::new(n));
            continue;
        }
        let c = circuit.as_mut().ok_or_else(|| err("missing QUBITS header".into()))?;
        let wrap = |e: Error| match e {
            Error::InvalidCircuit(m) => Error::Parse { line, message: m },
            other => other,
        };

        let inst = if head == "TICK" {
            Instruction::Tick
        } else if head == "DETECTOR" {
            Instruction::Detector(toks.map(|t| parse_meas(t, line)).collect::<Result<_>>()?)
        } else if head == "OBSERVABLE" {
            let id = parse_index(toks.next().ok_or_else(|| err("OBSERVABLE needs an id".into()))?, line)?;
            Instruction::Observable {
                id,
                measurements: toks.map(|t| parse_meas(t, line)).collect::<Result<_>>()?,
            }
        } else if let Some(gate) = Gate::ALL.iter().find(|g| g.name() == head) {
            Instruction::Gate {
                gate: *gate,
                targets: toks.map(|t| parse_index(t, line)).collect::<Result<_>>()?,
            }
        } else if let Some((name, rest)) = head.split_once('(') {
            let channel = NoiseChannel::ALL
                .iter()
                .find(|ch| ch.name() == name)
                .ok_or_else(|| err(format!("unknown noise channel {name:?}")))?;
            let p_text = rest.strip_suffix(')').ok_or_else(|| err("unterminated probability".into()))?;
            let p: f64 = p_text.parse().map_err(|_| err(format!("bad probability {p_text:?}")))?;
            Instruction::Noise {
                channel: *channel,
                p,
                targets: toks.map(|t| parse_index(t, line)).collect::<Result<_>>()?,
            }
        } else {
            return Err(err(format!("unknown opcode {head:?}")));
        };
        c.push(inst).map_err(wrap)?;
    }
    circuit.ok_or(Error::Parse {
        line: 0,
        message: "empty circuit text".into(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> Circuit {
        let mut c = Circuit::new(3);
        c.gate(Gate::ResetZ, vec![0, 1]).unwrap();
        c.gate(Gate::ResetX, vec![2]).unwrap();
        c.noise(NoiseChannel::ZError, 0.1 + 0.2, vec![2]).unwrap();
        c.gate(Gate::Cx, vec![2, 0]).unwrap();
        c.noise(NoiseChannel::Depolarize2, 1e-3 / 3.0, vec![2, 0]).unwrap();
        c.gate(Gate::Cz, vec![2, 1]).unwrap();
        c.noise(NoiseChannel::XError, 0.0, vec![1]).unwrap();
        c.gate(Gate::H, vec![1]).unwrap();
        c.tick();
        c.gate(Gate::MeasureX, vec![2]).unwrap();
        c.gate(Gate::MeasureZ, vec![0, 1]).unwrap();
        c.detector(vec![0, 2]).unwrap();
        c.observable(0, vec![1]).unwrap();
        c
    }

    #[test]
    fn round_trip_is_bit_exact() {
        let c = sample();
        let text = c.to_text();
        let back = Circuit::from_text(&text).unwrap();
        assert_eq!(back, c);
        assert_eq!(back.to_text(), text);
        assert!(text.contains("Z_ERROR(0.30000000000000004) 2"));
        assert!(text.contains("DETECTOR m0 m2"));
        assert!(text.contains("OBSERVABLE 0 m1"));
    }

    #[test]
    fn comments_and_blank_lines() {
        let c = Circuit::from_text("# header\nQUBITS 1\n\nMEASURE_Z 0 # trailing\nDETECTOR m0\n").unwrap();
        assert_eq!(c.n_detectors(), 1);
    }

    #[test]
    fn parse_errors_carry_line_numbers() {
        let e = Circuit::from_text("QUBITS 2\nFOO 1\n").unwrap_err();
        assert!(matches!(e, Error::Parse { line: 2, .. }));
        let e = Circuit::from_text("QUBITS 2\nDETECTOR m0\n").unwrap_err();
        assert!(matches!(e, Error::Parse { line: 2, .. }));
        let e = Circuit::from_text("CX 0 1\n").unwrap_err();
        assert!(matches!(e, Error::Parse { line: 1, .. }));
        assert!(Circuit::from_text("QUBITS 2\nZ_ERROR(abc) 0\n").is_err());
    }
}

//! Line-oriented circuit text format.
//!
//! ```text
//! flagcircuit w=2 d=3 scheme=conjecture
//! P+ s
//! P0 g0
//! CX s g0
//! ...
//! MZ g0 f1
//! MX s syn
//! round 1 data 1
//! round 1 flag f1 pos 1
//! ```
//!
//! Ops come first, one per line, in time order; round metadata follows.
//! Blank lines and `#` comments are accepted on input and never emitted.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use crate::circuit::{
    ElementaryOp, FlagCircuit, FlagMeasurement, QubitRole, SchemeKind, SchemeParams,
};
use crate::error::{Error, Result};

pub fn emit_circuit(circuit: &FlagCircuit) -> String {
    let p = circuit.params();
    let mut out = String::new();
    writeln!(
        out,
        "flagcircuit w={} d={} scheme={}",
        p.w(),
        p.d(),
        p.kind()
    )
    .unwrap();
    let name = |q| circuit.role(q).to_string();
    for op in circuit.ops() {
        match op {
            ElementaryOp::PrepPlus(q) => writeln!(out, "P+ {}", name(*q)),
            ElementaryOp::PrepZero(q) => writeln!(out, "P0 {}", name(*q)),
            ElementaryOp::Cnot { control, target } => {
                writeln!(out, "CX {} {}", name(*control), name(*target))
            }
            ElementaryOp::MeasureZ { qubit, label } => writeln!(out, "MZ {} {label}", name(*qubit)),
            ElementaryOp::MeasureX { qubit, label } => writeln!(out, "MX {} {label}", name(*qubit)),
        }
        .unwrap();
    }
    for round in 1..=circuit.num_rounds() {
        if let Some(k) = circuit.round_data(round) {
            writeln!(out, "round {round} data {k}").unwrap();
        }
        for f in circuit.round_flags(round) {
            writeln!(out, "round {round} flag {} pos {}", f.label, f.pos).unwrap();
        }
    }
    out
}

fn parse_err(line: usize, message: impl Into<String>) -> Error {
    Error::Parse {
        line,
        message: message.into(),
    }
}

fn parse_role(line: usize, name: &str) -> Result<QubitRole> {
    let index = |rest: &str| {
        rest.parse::<usize>()
            .map_err(|_| parse_err(line, format!("bad qubit name {name:?}")))
    };
    match name {
        "s" => Ok(QubitRole::SyndromeAncilla),
        _ if name.starts_with('d') => {
            let k = index(&name[1..])?;
            if k == 0 {
                return Err(parse_err(line, "data qubits are numbered from 1"));
            }
            Ok(QubitRole::Data(k))
        }
        _ if name.starts_with('g') => Ok(QubitRole::FlagAncilla(index(&name[1..])?)),
        _ => Err(parse_err(line, format!("bad qubit name {name:?}"))),
    }
}

fn parse_header(line: usize, text: &str) -> Result<SchemeParams> {
    let mut parts = text.split_whitespace();
    if parts.next() != Some("flagcircuit") {
        return Err(parse_err(
            line,
            "expected `flagcircuit w=<int> d=<int> scheme=<name>`",
        ));
    }
    let mut fields = BTreeMap::new();
    for part in parts {
        let (k, v) = part
            .split_once('=')
            .ok_or_else(|| parse_err(line, format!("bad header field {part:?}")))?;
        fields.insert(k, v);
    }
    let number = |key: &str| -> Result<usize> {
        fields
            .get(key)
            .ok_or_else(|| parse_err(line, format!("header missing {key}=")))?
            .parse()
            .map_err(|_| parse_err(line, format!("header {key}= is not a number")))
    };
    let w = number("w")?;
    let d = number("d")?;
    let scheme = fields
        .get("scheme")
        .ok_or_else(|| parse_err(line, "header missing scheme="))?;
    let kind = SchemeKind::from_name(scheme)
        .ok_or_else(|| parse_err(line, format!("unknown scheme {scheme:?}")))?;
    SchemeParams::new(kind, w, d).map_err(|e| parse_err(line, e.to_string()))
}

enum RawOp {
    Prep {
        plus: bool,
        q: QubitRole,
    },
    Cnot(QubitRole, QubitRole),
    Measure {
        x: bool,
        q: QubitRole,
        label: String,
    },
}

pub fn parse_circuit(text: &str) -> Result<FlagCircuit> {
    let mut lines = text
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'));
    let (hline, header) = lines.next().ok_or_else(|| parse_err(1, "empty circuit"))?;
    let params = parse_header(hline, header)?;

    let mut raw_ops = Vec::new();
    let mut flag_meta: Vec<(usize, usize, String, usize)> = Vec::new();
    let mut data_rounds = BTreeMap::new();
    let mut max_slot: Option<usize> = None;
    let mut max_round = 0usize;

    for (n, line) in lines {
        let tokens: Vec<&str> = line.split_whitespace().collect();
        let num = |s: &str| {
            s.parse::<usize>()
                .map_err(|_| parse_err(n, format!("expected a number, got {s:?}")))
        };
        let mut note_role = |role: QubitRole| {
            if let QubitRole::FlagAncilla(slot) = role {
                max_slot = Some(max_slot.map_or(slot, |m| m.max(slot)));
            }
            role
        };
        match tokens.as_slice() {
            ["P+", q] => raw_ops.push(RawOp::Prep {
                plus: true,
                q: note_role(parse_role(n, q)?),
            }),
            ["P0", q] => raw_ops.push(RawOp::Prep {
                plus: false,
                q: note_role(parse_role(n, q)?),
            }),
            ["CX", c, t] => {
                let c = note_role(parse_role(n, c)?);
                let t = note_role(parse_role(n, t)?);
                raw_ops.push(RawOp::Cnot(c, t));
            }
            ["MZ", q, label] => raw_ops.push(RawOp::Measure {
                x: false,
                q: note_role(parse_role(n, q)?),
                label: label.to_string(),
            }),
            ["MX", q, label] => raw_ops.push(RawOp::Measure {
                x: true,
                q: note_role(parse_role(n, q)?),
                label: label.to_string(),
            }),
            ["round", round, "data", k] => {
                let round = num(round)?;
                max_round = max_round.max(round);
                if data_rounds.insert(round, num(k)?).is_some() {
                    return Err(parse_err(n, format!("round {round} has two data lines")));
                }
            }
            ["round", round, "flag", label, "pos", pos] => {
                let round = num(round)?;
                max_round = max_round.max(round);
                flag_meta.push((n, round, label.to_string(), num(pos)?));
            }
            _ => return Err(parse_err(n, format!("unrecognised line {line:?}"))),
        }
    }

    let slots = max_slot.map_or(0, |m| m + 1);
    let w = params.w();
    let qubit = |role: QubitRole| -> Result<usize> {
        match role {
            QubitRole::Data(k) if k <= w => Ok(k - 1),
            QubitRole::Data(k) => Err(parse_err(0, format!("data qubit d{k} exceeds w={w}"))),
            QubitRole::SyndromeAncilla => Ok(w),
            QubitRole::FlagAncilla(slot) => Ok(w + 1 + slot),
        }
    };
    let mut ops = Vec::with_capacity(raw_ops.len());
    for raw in raw_ops {
        ops.push(match raw {
            RawOp::Prep { plus: true, q } => ElementaryOp::PrepPlus(qubit(q)?),
            RawOp::Prep { plus: false, q } => ElementaryOp::PrepZero(qubit(q)?),
            RawOp::Cnot(c, t) => ElementaryOp::Cnot {
                control: qubit(c)?,
                target: qubit(t)?,
            },
            RawOp::Measure { x: true, q, label } => ElementaryOp::MeasureX {
                qubit: qubit(q)?,
                label,
            },
            RawOp::Measure { x: false, q, label } => ElementaryOp::MeasureZ {
                qubit: qubit(q)?,
                label,
            },
        });
    }

    let label_time: BTreeMap<&str, usize> = ops
        .iter()
        .enumerate()
        .filter_map(|(i, op)| match op {
            ElementaryOp::MeasureZ { label, .. } => Some((label.as_str(), i)),
            _ => None,
        })
        .collect();
    let flags = flag_meta
        .into_iter()
        .map(|(n, round, label, pos)| {
            let time = *label_time
                .get(label.as_str())
                .ok_or_else(|| parse_err(n, format!("no flag measurement labelled {label}")))?;
            Ok(FlagMeasurement {
                time,
                label,
                round,
                pos,
            })
        })
        .collect::<Result<Vec<_>>>()?;

    FlagCircuit::new(params, slots, ops, flags, max_round, data_rounds)
}

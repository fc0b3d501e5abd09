//! Test-side reference model, written against the op list only.
//!
//! It shares no propagation, dedup or residual code with the library: frames
//! are plain `Vec<bool>` pairs updated gate by gate.

#![allow(dead_code)]

use flagft::{build_circuit, ElementaryOp, FlagCircuit, SchemeKind, SchemeParams};

pub fn circuit(kind: SchemeKind, w: usize, d: usize) -> FlagCircuit {
    build_circuit(SchemeParams::new(kind, w, d).unwrap()).unwrap()
}

/// Outcome of pushing one Pauli frame to the end of the circuit.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Effect {
    pub flags: Vec<bool>,
    pub syndrome: bool,
    pub data_x: Vec<bool>,
    pub unknown: Vec<bool>,
}

impl Effect {
    pub fn xor(&self, other: &Effect) -> Effect {
        let x = |a: &[bool], b: &[bool]| a.iter().zip(b).map(|(p, q)| p ^ q).collect();
        Effect {
            flags: x(&self.flags, &other.flags),
            syndrome: self.syndrome ^ other.syndrome,
            data_x: x(&self.data_x, &other.data_x),
            unknown: self
                .unknown
                .iter()
                .zip(&other.unknown)
                .map(|(p, q)| p | q)
                .collect(),
        }
    }

    pub fn flag_bits(&self) -> String {
        self.flags
            .iter()
            .map(|&b| if b { '1' } else { '0' })
            .collect()
    }
}

fn qubit_count(ops: &[ElementaryOp]) -> usize {
    ops.iter()
        .flat_map(|op| match op {
            ElementaryOp::PrepPlus(q) | ElementaryOp::PrepZero(q) => vec![*q],
            ElementaryOp::Cnot { control, target } => vec![*control, *target],
            ElementaryOp::MeasureZ { qubit, .. } | ElementaryOp::MeasureX { qubit, .. } => {
                vec![*qubit]
            }
        })
        .max()
        .map_or(0, |m| m + 1)
}

/// A Pauli flip applied to one qubit just before op `at`.
#[derive(Debug, Clone, Copy)]
pub struct Injection {
    pub at: usize,
    pub qubit: usize,
    pub x: bool,
    pub z: bool,
}

/// Injects `x`/`z` flips on the listed qubits just before op `start` and runs to the end.
pub fn simulate(c: &FlagCircuit, start: usize, x_on: &[usize], z_on: &[usize]) -> Effect {
    let mut inj: Vec<Injection> = x_on
        .iter()
        .map(|&qubit| Injection {
            at: start,
            qubit,
            x: true,
            z: false,
        })
        .collect();
    inj.extend(z_on.iter().map(|&qubit| Injection {
        at: start,
        qubit,
        x: false,
        z: true,
    }));
    simulate_all(c, &inj)
}

/// Runs the whole circuit once with every injection applied at its time.
pub fn simulate_all(c: &FlagCircuit, injections: &[Injection]) -> Effect {
    let ops = c.ops();
    let n = qubit_count(ops).max(c.w() + 1);
    let mut x = vec![false; n];
    let mut z = vec![false; n];
    let mut flags = Vec::new();
    let mut syndrome = false;
    for t in 0..=ops.len() {
        for inj in injections.iter().filter(|i| i.at == t) {
            x[inj.qubit] ^= inj.x;
            z[inj.qubit] ^= inj.z;
        }
        let Some(op) = ops.get(t) else { break };
        match op {
            ElementaryOp::PrepPlus(q) | ElementaryOp::PrepZero(q) => {
                x[*q] = false;
                z[*q] = false;
            }
            ElementaryOp::Cnot { control, target } => {
                if x[*control] {
                    x[*target] ^= true;
                }
                if z[*target] {
                    z[*control] ^= true;
                }
            }
            ElementaryOp::MeasureZ { qubit, .. } => {
                flags.push(x[*qubit]);
                x[*qubit] = false;
                z[*qubit] = false;
            }
            ElementaryOp::MeasureX { qubit, .. } => {
                syndrome = z[*qubit];
                x[*qubit] = false;
                z[*qubit] = false;
            }
        }
    }
    Effect {
        flags,
        syndrome,
        data_x: x[..c.w()].to_vec(),
        unknown: vec![false; c.w()],
    }
}

/// One physical fault of the model, before any merging.
#[derive(Debug, Clone)]
pub struct OracleFault {
    pub name: String,
    pub counts: bool,
    pub effect: Effect,
}

fn touches(op: &ElementaryOp, q: usize) -> bool {
    match op {
        ElementaryOp::PrepPlus(p) | ElementaryOp::PrepZero(p) => *p == q,
        ElementaryOp::Cnot { control, target } => *control == q || *target == q,
        ElementaryOp::MeasureZ { qubit, .. } | ElementaryOp::MeasureX { qubit, .. } => *qubit == q,
    }
}

/// Every fault location of the model, listed without merging duplicates.
pub fn all_faults(c: &FlagCircuit) -> Vec<OracleFault> {
    let s = c.w();
    let ops = c.ops();
    let mut out = Vec::new();
    for (i, op) in ops.iter().enumerate() {
        let is_syn_meas = matches!(op, ElementaryOp::MeasureX { .. });
        if touches(op, s) && !is_syn_meas {
            out.push(OracleFault {
                name: format!("x on s after {i}"),
                counts: true,
                effect: simulate(c, i + 1, &[s], &[]),
            });
            out.push(OracleFault {
                name: format!("z on s after {i}"),
                counts: true,
                effect: simulate(c, i + 1, &[], &[s]),
            });
        }
        if let ElementaryOp::MeasureZ { qubit, .. } = op {
            out.push(OracleFault {
                name: format!("flip of {i}"),
                counts: true,
                effect: simulate(c, i, &[*qubit], &[]),
            });
        }
        for q in (s + 1)..c.num_qubits() {
            if touches(op, q) && !matches!(op, ElementaryOp::MeasureZ { .. }) {
                for (tag, xs, zs) in [("x", vec![q], vec![]), ("z", vec![], vec![q])] {
                    out.push(OracleFault {
                        name: format!("{tag} on g{q} after {i}"),
                        counts: true,
                        effect: simulate(c, i + 1, &xs, &zs),
                    });
                }
            }
        }
        if let ElementaryOp::Cnot { control, target } = op {
            if *target < c.w() {
                let mut bare = simulate(c, i + 1, &[], &[]);
                bare.unknown[*target] = true;
                out.push(OracleFault {
                    name: format!("p on data {target} after {i}"),
                    counts: true,
                    effect: bare,
                });
                let mut e = simulate(c, i + 1, &[*control], &[]);
                e.unknown[*target] = true;
                e.data_x[*target] = false;
                out.push(OracleFault {
                    name: format!("x,p on cnot {i}"),
                    counts: false,
                    effect: e,
                });
            }
        }
    }
    out
}

/// Faulty data weight counted up to the stabilizer, ignoring unknown qubits.
pub fn residual(effect: &Effect, correction: &[bool]) -> usize {
    let known: Vec<usize> = (0..effect.data_x.len())
        .filter(|&k| !effect.unknown[k])
        .collect();
    let weight = known
        .iter()
        .filter(|&&k| effect.data_x[k] != correction[k])
        .count();
    weight.min(known.len() - weight)
}

pub fn to_bools(bits: &flagft::BitString) -> Vec<bool> {
    (0..bits.len()).map(|i| bits.get(i)).collect()
}

pub fn from_bools(bits: &[bool]) -> flagft::BitString {
    flagft::BitString::from_indices(bits.len(), (0..bits.len()).filter(|&i| bits[i]))
}

/// All subsets of `0..n` of size at most `k`, smallest first.
pub fn subsets(n: usize, k: usize) -> Vec<Vec<usize>> {
    let mut out = vec![vec![]];
    let mut frontier = vec![vec![]];
    for _ in 0..k {
        let mut next = Vec::new();
        for s in &frontier {
            let from = s.last().map_or(0, |&l: &usize| l + 1);
            for i in from..n {
                let mut t = s.clone();
                t.push(i);
                next.push(t);
            }
        }
        out.extend(next.iter().cloned());
        frontier = next;
    }
    out
}

//! Left-to-right flag decoder for the modified scheme.
//!
//! The decoder reads the flag outcomes one round word at a time. It keeps an
//! accumulator `m` of width `2t`: each round is XORed in, and whenever the
//! accumulator's weight exceeds `t` it is complemented and an X correction
//! is applied to the round's data qubit and every data qubit after it. Round
//! `Ω`, the last nontrivial one, gets one extra rule: if folding it in would
//! leave weight exactly `t`, its last flag `ε` is dropped first.
//!
//! Scanning starts after the rightmost run of `t` trivial rounds inside the
//! leading dummy region; everything before it is discarded.

use crate::bits::BitString;
use crate::circuit::{FlagCircuit, SchemeKind, SchemeParams};
use crate::error::{Error, Result};

/// Flag outcomes grouped into rounds.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FlagPattern {
    width: usize,
    /// Index 0 holds round 1.
    rounds: Vec<BitString>,
    /// Data qubit of each round, `None` for dummy rounds.
    round_data: Vec<Option<usize>>,
    w: usize,
}

impl FlagPattern {
    pub fn new(
        width: usize,
        rounds: Vec<BitString>,
        round_data: Vec<Option<usize>>,
        w: usize,
    ) -> Self {
        assert_eq!(rounds.len(), round_data.len());
        assert!(rounds.iter().all(|r| r.len() == width));
        Self {
            width,
            rounds,
            round_data,
            w,
        }
    }

    #[inline]
    pub fn width(&self) -> usize {
        self.width
    }

    #[inline]
    pub fn num_rounds(&self) -> usize {
        self.rounds.len()
    }

    /// Round `i`, 1-based.
    pub fn round(&self, i: usize) -> &BitString {
        &self.rounds[i - 1]
    }

    pub fn rounds(&self) -> &[BitString] {
        &self.rounds
    }

    pub fn round_data(&self, i: usize) -> Option<usize> {
        self.round_data[i - 1]
    }

    pub fn w(&self) -> usize {
        self.w
    }

    pub fn is_trivial(&self) -> bool {
        self.rounds.iter().all(BitString::is_zero)
    }
}

/// Places raw flag outcomes (measurement order) at their round positions.
pub fn group_rounds(circuit: &FlagCircuit, raw: &BitString) -> Result<FlagPattern> {
    if raw.len() != circuit.num_flags() {
        return Err(Error::OutcomeCount {
            expected: circuit.num_flags(),
            got: raw.len(),
        });
    }
    let width = circuit.params().round_width();
    let n = circuit.num_rounds();
    let mut counts = vec![0usize; n];
    let mut rounds = vec![BitString::zeros(width); n];
    for (i, f) in circuit.flag_measurements().iter().enumerate() {
        if f.pos > width {
            return Err(Error::RoundWidth {
                round: f.round,
                expected: width,
                got: f.pos,
            });
        }
        counts[f.round - 1] += 1;
        if raw.get(i) {
            rounds[f.round - 1].set(f.pos - 1, true);
        }
    }
    if let Some((i, &got)) = counts.iter().enumerate().find(|(_, &c)| c != width) {
        return Err(Error::RoundWidth {
            round: i + 1,
            expected: width,
            got,
        });
    }
    let round_data = (1..=n).map(|l| circuit.round_data(l)).collect();
    Ok(FlagPattern::new(width, rounds, round_data, circuit.w()))
}

/// First round to scan: one past the rightmost run of `t` trivial rounds
/// lying entirely inside the dummy region.
pub fn identify_start_rounds(pattern: &FlagPattern, params: &SchemeParams) -> Result<usize> {
    if params.kind() != SchemeKind::Modified {
        return Err(Error::NotModifiedScheme);
    }
    let t = params.t();
    let dummy = params.r().min(pattern.num_rounds());
    let mut run = 0usize;
    let mut best = None;
    for i in 1..=dummy {
        if pattern.round(i).is_zero() {
            run += 1;
            if run >= t {
                best = Some(i + 1);
            }
        } else {
            run = 0;
        }
    }
    best.ok_or(Error::NoStartRun { t, dummy })
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DecoderTrace {
    pub start: usize,
    /// `m_0..m_N`; entries before `start` stay zero.
    pub accumulators: Vec<BitString>,
    /// Round words as folded in, after any corner fix. Index 0 is round 1.
    pub effective_rounds: Vec<BitString>,
    pub omega: Option<usize>,
    pub epsilon: Option<BitString>,
    pub corner_fix_applied: bool,
    pub triggered: Vec<usize>,
    pub correction: BitString,
}

impl DecoderTrace {
    /// `m_i`, with `m_0` the zero word.
    pub fn accumulator(&self, i: usize) -> &BitString {
        &self.accumulators[i]
    }
}

/// Runs the scan and returns the X correction over the data qubits.
pub fn decode(pattern: &FlagPattern, params: &SchemeParams) -> Result<(BitString, DecoderTrace)> {
    let start = identify_start_rounds(pattern, params)?;
    let t = params.t();
    let width = pattern.width();
    let n = pattern.num_rounds();
    let w = pattern.w();
    let ones = BitString::ones(width);

    let omega = (start..=n).rev().find(|&i| !pattern.round(i).is_zero());
    let epsilon = omega.map(|o| {
        let last = pattern.round(o).last_one().expect("omega is nontrivial");
        BitString::from_indices(width, [last])
    });

    let mut accumulators = vec![BitString::zeros(width); n + 1];
    let mut effective_rounds = vec![BitString::zeros(width); n];
    let mut correction = BitString::zeros(w);
    let mut triggered = Vec::new();
    let mut corner_fix_applied = false;

    for i in start..=n {
        let mut g = pattern.round(i).clone();
        if Some(i) == omega && accumulators[i - 1].xor(&g).count_ones() == t {
            g.xor_assign(epsilon.as_ref().expect("set with omega"));
            corner_fix_applied = true;
        }
        let mut m = accumulators[i - 1].xor(&g);
        if m.count_ones() > t {
            let first = pattern.round_data(i).unwrap_or(1);
            for k in first..=w {
                correction.flip(k - 1);
            }
            m.xor_assign(&ones);
            triggered.push(i);
        }
        accumulators[i] = m;
        effective_rounds[i - 1] = g;
    }

    let trace = DecoderTrace {
        start,
        accumulators,
        effective_rounds,
        omega,
        epsilon,
        corner_fix_applied,
        triggered,
        correction: correction.clone(),
    };
    Ok((correction, trace))
}

/// `|m_Ω|`, a lower bound on the number of faults that occurred.
pub fn fault_count_lower_bound(trace: &DecoderTrace) -> usize {
    trace
        .omega
        .map_or(0, |o| trace.accumulators[o].count_ones())
}

/// Convenience: group raw outcomes and decode them.
pub fn decode_outcomes(
    circuit: &FlagCircuit,
    raw: &BitString,
) -> Result<(BitString, DecoderTrace)> {
    if circuit.params().kind() != SchemeKind::Modified {
        return Err(Error::NotModifiedScheme);
    }
    decode(&group_rounds(circuit, raw)?, circuit.params())
}

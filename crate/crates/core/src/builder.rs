//! Builders for the flag-circuit families measuring `X^{⊗w}`.
//!
//! Every family shares one schedule. Round `ℓ` owns the flags that guard
//! CNOT `ℓ` from the syndrome ancilla. Between CNOTs `ℓ` and `ℓ+1` the flags
//! hand over one position at a time: flag `j` of round `ℓ+1` opens, then
//! flag `j` of round `ℓ` closes. A syndrome X fault in that gap therefore
//! flips a suffix of round `ℓ` and a prefix of round `ℓ+1`.

use std::collections::{BTreeMap, VecDeque};

use crate::bits::BitString;
use crate::circuit::{ElementaryOp, FlagCircuit, FlagMeasurement, SchemeKind, SchemeParams};
use crate::error::{Error, Result};
use crate::fault::{propagate_site, FaultSite};

pub const SYNDROME_LABEL: &str = "syn";

/// Per-round layout handed to the scheduler.
struct RoundPlan {
    data: Option<usize>,
    flags: usize,
}

struct Scheduler {
    w: usize,
    ops: Vec<ElementaryOp>,
    free: VecDeque<usize>,
    slots: usize,
    flags: Vec<FlagMeasurement>,
    /// (round, pos) -> slot currently holding that flag.
    open: BTreeMap<(usize, usize), usize>,
}

impl Scheduler {
    fn new(w: usize) -> Self {
        Self {
            w,
            ops: Vec::new(),
            free: VecDeque::new(),
            slots: 0,
            flags: Vec::new(),
            open: BTreeMap::new(),
        }
    }

    fn syndrome(&self) -> usize {
        self.w
    }

    fn slot_qubit(&self, slot: usize) -> usize {
        self.w + 1 + slot
    }

    fn open_flag(&mut self, round: usize, pos: usize) {
        let slot = self.free.pop_front().unwrap_or_else(|| {
            self.slots += 1;
            self.slots - 1
        });
        let q = self.slot_qubit(slot);
        self.ops.push(ElementaryOp::PrepZero(q));
        self.ops.push(ElementaryOp::Cnot {
            control: self.syndrome(),
            target: q,
        });
        self.open.insert((round, pos), slot);
    }

    fn close_flag(&mut self, round: usize, pos: usize) {
        let slot = self
            .open
            .remove(&(round, pos))
            .expect("flag closed before it was opened");
        let q = self.slot_qubit(slot);
        self.ops.push(ElementaryOp::Cnot {
            control: self.syndrome(),
            target: q,
        });
        let label = format!("f{}", self.flags.len() + 1);
        self.flags.push(FlagMeasurement {
            time: self.ops.len(),
            label: label.clone(),
            round,
            pos,
        });
        self.ops.push(ElementaryOp::MeasureZ { qubit: q, label });
        self.free.push_back(slot);
    }
}

fn schedule(params: SchemeParams, plan: &[RoundPlan]) -> Result<FlagCircuit> {
    let mut s = Scheduler::new(params.w());
    let syndrome = s.syndrome();
    s.ops.push(ElementaryOp::PrepPlus(syndrome));

    if let Some(first) = plan.first() {
        for j in 1..=first.flags {
            s.open_flag(1, j);
        }
    }
    for (idx, round) in plan.iter().enumerate() {
        let l = idx + 1;
        if let Some(k) = round.data {
            s.ops.push(ElementaryOp::Cnot {
                control: syndrome,
                target: k - 1,
            });
        }
        let next = plan.get(idx + 1).map_or(0, |r| r.flags);
        for j in 1..=round.flags.max(next) {
            if j <= next {
                s.open_flag(l + 1, j);
            }
            if j <= round.flags {
                s.close_flag(l, j);
            }
        }
    }
    s.ops.push(ElementaryOp::MeasureX {
        qubit: syndrome,
        label: SYNDROME_LABEL.to_string(),
    });

    let data_rounds = plan
        .iter()
        .enumerate()
        .filter_map(|(i, r)| r.data.map(|k| (i + 1, k)))
        .collect();
    FlagCircuit::new(params, s.slots, s.ops, s.flags, plan.len(), data_rounds)
}

fn expect_kind(params: &SchemeParams, kind: SchemeKind) -> Result<()> {
    if params.kind() != kind {
        return Err(Error::BuilderBug(format!(
            "{} builder called with {} parameters",
            kind,
            params.kind()
        )));
    }
    Ok(())
}

/// Every data CNOT guarded by its own `d-1` flags.
pub fn build_conjecture_circuit(params: SchemeParams) -> Result<FlagCircuit> {
    expect_kind(&params, SchemeKind::Conjecture)?;
    let plan: Vec<_> = (1..=params.w())
        .map(|k| RoundPlan {
            data: Some(k),
            flags: params.round_width(),
        })
        .collect();
    schedule(params, &plan)
}

/// The conjecture layout for weight `r + w` with the first `r` data CNOTs removed.
pub fn build_modified_circuit(params: SchemeParams) -> Result<FlagCircuit> {
    expect_kind(&params, SchemeKind::Modified)?;
    let r = params.r();
    let plan: Vec<_> = (1..=r + params.w())
        .map(|l| RoundPlan {
            data: (l > r).then(|| l - r),
            flags: params.round_width(),
        })
        .collect();
    schedule(params, &plan)
}

/// Flag count guarding data CNOT `k` in the optimized layout.
pub fn optimized_flag_count(w: usize, d: usize, k: usize) -> usize {
    (k - 1).min(w - k).min(d - 1)
}

/// Flags ramp up from zero at the first data CNOT and back down to zero at the last.
pub fn build_optimized_circuit(params: SchemeParams) -> Result<FlagCircuit> {
    expect_kind(&params, SchemeKind::Optimized)?;
    let plan: Vec<_> = (1..=params.w())
        .map(|k| RoundPlan {
            data: Some(k),
            flags: optimized_flag_count(params.w(), params.d(), k),
        })
        .collect();
    schedule(params, &plan)
}

/// Syndrome ancilla coupled to the data with no flags.
pub fn build_bare_circuit(params: SchemeParams) -> Result<FlagCircuit> {
    expect_kind(&params, SchemeKind::Bare)?;
    let plan: Vec<_> = (1..=params.w())
        .map(|k| RoundPlan {
            data: Some(k),
            flags: 0,
        })
        .collect();
    schedule(params, &plan)
}

pub fn build_circuit(params: SchemeParams) -> Result<FlagCircuit> {
    match params.kind() {
        SchemeKind::Conjecture => build_conjecture_circuit(params),
        SchemeKind::Modified => build_modified_circuit(params),
        SchemeKind::Optimized => build_optimized_circuit(params),
        SchemeKind::Bare => build_bare_circuit(params),
    }
}

/// Number of flags guarding each data CNOT, indexed by data qubit.
pub fn flags_per_data_cnot(circuit: &FlagCircuit) -> Vec<usize> {
    (1..=circuit.w())
        .map(|k| {
            circuit
                .round_of_data(k)
                .map_or(0, |round| circuit.round_flags(round).len())
        })
        .collect()
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct RoundDiagnostics {
    pub sites_checked: usize,
    /// Interior syndrome faults flipping exactly `d-1` flags.
    pub flips_d_minus_1: usize,
    /// Interior syndrome faults flipping exactly `d` flags.
    pub flips_d: usize,
}

/// Gap index of a time: the largest round whose anchor is at or before `time`.
pub(crate) fn gap_of(anchors: &[usize], time: usize) -> Option<usize> {
    anchors.iter().rposition(|&a| a <= time).map(|i| i + 1)
}

pub(crate) fn round_anchors(circuit: &FlagCircuit) -> Result<Vec<usize>> {
    (1..=circuit.num_rounds())
        .map(|l| {
            circuit
                .round_anchor(l)
                .ok_or_else(|| Error::BuilderBug(format!("round {l} has neither flags nor data")))
        })
        .collect()
}

/// Splits a propagated flag vector into per-round words of width `d-1`.
pub(crate) fn round_words(circuit: &FlagCircuit, flags: &BitString) -> Vec<BitString> {
    let width = circuit.params().round_width();
    let mut words = vec![BitString::zeros(width); circuit.num_rounds()];
    for (i, f) in circuit.flag_measurements().iter().enumerate() {
        if flags.get(i) && f.pos <= width {
            words[f.round - 1].set(f.pos - 1, true);
        }
    }
    words
}

/// Exhaustively checks the complementary split on a modified-scheme circuit.
///
/// Every syndrome X fault strictly inside the round structure, sitting in the
/// gap after round `ℓ`, must flip flags only in rounds `ℓ` and `ℓ+1`. The two
/// words it flips either XOR to the all-ones word, or cover it with exactly
/// one shared position (the `d`-flag case).
pub fn validate_round_structure(circuit: &FlagCircuit) -> Result<RoundDiagnostics> {
    let params = circuit.params();
    if params.kind() != SchemeKind::Modified {
        return Err(Error::NotModifiedScheme);
    }
    let width = params.round_width();
    let anchors = round_anchors(circuit)?;
    let first = anchors[0];
    let last = *anchors.last().expect("at least one round");
    let ones = BitString::ones(width);
    let s = circuit.syndrome();
    let mut diag = RoundDiagnostics::default();

    for (time, op) in circuit.ops().iter().enumerate() {
        if !op.touches(s) || op.is_measurement() || time < first || time >= last {
            continue;
        }
        let site = FaultSite::syndrome_x(circuit, time)?;
        let result = propagate_site(circuit, &site)?;
        let gap = gap_of(&anchors, time).expect("time is past the first anchor");
        let words = round_words(circuit, &result.flags);
        let bug = |msg: String| Error::BuilderBug(format!("site {}: {msg}", site.descriptor()));

        for (i, word) in words.iter().enumerate() {
            let round = i + 1;
            if round != gap && round != gap + 1 && !word.is_zero() {
                return Err(bug(format!("flips round {round} outside gap {gap}")));
            }
        }
        let a = &words[gap - 1];
        let b = &words[gap];
        let overlap = a.overlap(b);
        let mut union = a.clone();
        union.or_assign(b);
        if union != ones || overlap > 1 {
            return Err(bug(format!(
                "rounds {gap},{} flip {a} and {b}, not a complementary split",
                gap + 1
            )));
        }
        diag.sites_checked += 1;
        match result.flags.count_ones() {
            n if n == width => diag.flips_d_minus_1 += 1,
            n if n == width + 1 => diag.flips_d += 1,
            n => return Err(bug(format!("flips {n} flags"))),
        }
    }
    Ok(diag)
}

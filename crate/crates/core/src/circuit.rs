//! Circuit representation for one stabilizer measurement with flag ancillas.
//!
//! Qubits are laid out as data `0..w`, then the syndrome ancilla, then the
//! flag slots. Ops are stored in execution order and an op's position in
//! [`FlagCircuit::ops`] is its time index.

use std::collections::BTreeMap;
use std::fmt;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum SchemeKind {
    /// Every data CNOT guarded by d-1 flags.
    Conjecture,
    /// Conjecture layout with (t+1)^2 leading flag-only rounds.
    Modified,
    /// Flag counts ramp 0,1,..,d-1,..,d-1,..,1,0 along the data CNOTs.
    Optimized,
    /// No flags at all; only useful as a negative control.
    Bare,
}

impl SchemeKind {
    pub fn name(self) -> &'static str {
        match self {
            SchemeKind::Conjecture => "conjecture",
            SchemeKind::Modified => "modified",
            SchemeKind::Optimized => "optimized",
            SchemeKind::Bare => "bare",
        }
    }

    pub fn from_name(name: &str) -> Option<Self> {
        Some(match name {
            "conjecture" => SchemeKind::Conjecture,
            "modified" => SchemeKind::Modified,
            "optimized" => SchemeKind::Optimized,
            "bare" => SchemeKind::Bare,
            _ => return None,
        })
    }
}

impl fmt::Display for SchemeKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Weight, distance and layout family of a flag circuit measuring `X^{⊗w}`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct SchemeParams {
    w: usize,
    d: usize,
    kind: SchemeKind,
}

impl SchemeParams {
    pub fn new(kind: SchemeKind, w: usize, d: usize) -> Result<Self> {
        if d.is_multiple_of(2) {
            return Err(Error::EvenDistance(d));
        }
        if d < 3 {
            return Err(Error::DistanceTooSmall(d));
        }
        if w == 0 {
            return Err(Error::ZeroWeight);
        }
        if kind == SchemeKind::Optimized && w < 2 * (d - 1) {
            return Err(Error::WeightTooSmallForRamp {
                w,
                min: 2 * (d - 1),
            });
        }
        Ok(Self { w, d, kind })
    }

    #[inline]
    pub fn w(&self) -> usize {
        self.w
    }

    #[inline]
    pub fn d(&self) -> usize {
        self.d
    }

    #[inline]
    pub fn t(&self) -> usize {
        (self.d - 1) / 2
    }

    #[inline]
    pub fn kind(&self) -> SchemeKind {
        self.kind
    }

    /// Number of leading flag-only rounds: `(d+1)^2/4` for the modified scheme.
    #[inline]
    pub fn r(&self) -> usize {
        match self.kind {
            SchemeKind::Modified => (self.t() + 1) * (self.t() + 1),
            _ => 0,
        }
    }

    /// Width of a full round word, `2t = d-1`.
    #[inline]
    pub fn round_width(&self) -> usize {
        self.d - 1
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum QubitRole {
    /// 1-based data index.
    Data(usize),
    SyndromeAncilla,
    FlagAncilla(usize),
}

impl fmt::Display for QubitRole {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            QubitRole::Data(k) => write!(f, "d{k}"),
            QubitRole::SyndromeAncilla => f.write_str("s"),
            QubitRole::FlagAncilla(slot) => write!(f, "g{slot}"),
        }
    }
}

/// Dense qubit index into a circuit's layout.
pub type Qubit = usize;

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum ElementaryOp {
    PrepPlus(Qubit),
    PrepZero(Qubit),
    Cnot { control: Qubit, target: Qubit },
    MeasureZ { qubit: Qubit, label: String },
    MeasureX { qubit: Qubit, label: String },
}

impl ElementaryOp {
    pub fn qubits(&self) -> Vec<Qubit> {
        match self {
            ElementaryOp::PrepPlus(q) | ElementaryOp::PrepZero(q) => vec![*q],
            ElementaryOp::Cnot { control, target } => vec![*control, *target],
            ElementaryOp::MeasureZ { qubit, .. } | ElementaryOp::MeasureX { qubit, .. } => {
                vec![*qubit]
            }
        }
    }

    pub fn touches(&self, q: Qubit) -> bool {
        self.qubits().contains(&q)
    }

    pub fn is_measurement(&self) -> bool {
        matches!(
            self,
            ElementaryOp::MeasureZ { .. } | ElementaryOp::MeasureX { .. }
        )
    }
}

/// Where a flag measurement sits in the decoder's round structure.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct FlagMeasurement {
    /// Time index of the `MeasureZ`.
    pub time: usize,
    pub label: String,
    /// 1-based round index.
    pub round: usize,
    /// 1-based position inside the round word, ordered by closing time.
    pub pos: usize,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FlagCircuit {
    params: SchemeParams,
    flag_slots: usize,
    ops: Vec<ElementaryOp>,
    /// In measurement order.
    flags: Vec<FlagMeasurement>,
    rounds: usize,
    /// Round index -> 1-based data index (absent for dummy rounds).
    data_rounds: BTreeMap<usize, usize>,
}

impl FlagCircuit {
    /// Assembles and validates a circuit. `flags` may be given in any order.
    pub fn new(
        params: SchemeParams,
        flag_slots: usize,
        ops: Vec<ElementaryOp>,
        mut flags: Vec<FlagMeasurement>,
        rounds: usize,
        data_rounds: BTreeMap<usize, usize>,
    ) -> Result<Self> {
        flags.sort_by_key(|f| f.time);
        let circuit = Self {
            params,
            flag_slots,
            ops,
            flags,
            rounds,
            data_rounds,
        };
        circuit.validate()?;
        Ok(circuit)
    }

    #[inline]
    pub fn params(&self) -> &SchemeParams {
        &self.params
    }

    #[inline]
    pub fn ops(&self) -> &[ElementaryOp] {
        &self.ops
    }

    #[inline]
    pub fn w(&self) -> usize {
        self.params.w()
    }

    #[inline]
    pub fn flag_slots(&self) -> usize {
        self.flag_slots
    }

    #[inline]
    pub fn num_qubits(&self) -> usize {
        self.params.w() + 1 + self.flag_slots
    }

    #[inline]
    pub fn syndrome(&self) -> Qubit {
        self.params.w()
    }

    #[inline]
    pub fn data_qubit(&self, k: usize) -> Qubit {
        debug_assert!((1..=self.w()).contains(&k));
        k - 1
    }

    #[inline]
    pub fn flag_qubit(&self, slot: usize) -> Qubit {
        self.params.w() + 1 + slot
    }

    pub fn role(&self, q: Qubit) -> QubitRole {
        let w = self.params.w();
        match q {
            q if q < w => QubitRole::Data(q + 1),
            q if q == w => QubitRole::SyndromeAncilla,
            q => QubitRole::FlagAncilla(q - w - 1),
        }
    }

    pub fn qubit_for_role(&self, role: QubitRole) -> Option<Qubit> {
        match role {
            QubitRole::Data(k) if (1..=self.w()).contains(&k) => Some(k - 1),
            QubitRole::SyndromeAncilla => Some(self.syndrome()),
            QubitRole::FlagAncilla(slot) if slot < self.flag_slots => Some(self.flag_qubit(slot)),
            _ => None,
        }
    }

    /// Flag measurements in measurement order.
    #[inline]
    pub fn flag_measurements(&self) -> &[FlagMeasurement] {
        &self.flags
    }

    #[inline]
    pub fn num_flags(&self) -> usize {
        self.flags.len()
    }

    #[inline]
    pub fn num_rounds(&self) -> usize {
        self.rounds
    }

    /// Data index of a round, `None` for dummy rounds.
    pub fn round_data(&self, round: usize) -> Option<usize> {
        self.data_rounds.get(&round).copied()
    }

    pub fn data_rounds(&self) -> &BTreeMap<usize, usize> {
        &self.data_rounds
    }

    /// Round index that holds data qubit `k`.
    pub fn round_of_data(&self, k: usize) -> Option<usize> {
        self.data_rounds
            .iter()
            .find(|(_, &data)| data == k)
            .map(|(&round, _)| round)
    }

    /// Time index of the CNOT from the syndrome ancilla onto data qubit `k`.
    pub fn data_cnot_time(&self, k: usize) -> Option<usize> {
        let target = self.data_qubit(k);
        let s = self.syndrome();
        self.ops.iter().position(|op| {
            matches!(op, ElementaryOp::Cnot { control, target: t } if *control == s && *t == target)
        })
    }

    /// Flags belonging to `round`, ordered by position.
    pub fn round_flags(&self, round: usize) -> Vec<&FlagMeasurement> {
        let mut v: Vec<_> = self.flags.iter().filter(|f| f.round == round).collect();
        v.sort_by_key(|f| f.pos);
        v
    }

    /// The CNOTs that open and close a flag, found by walking back from its measurement.
    pub fn flag_interval(&self, flag: &FlagMeasurement) -> (usize, usize) {
        let q = match &self.ops[flag.time] {
            ElementaryOp::MeasureZ { qubit, .. } => *qubit,
            _ => unreachable!("validated: flag entries point at MeasureZ ops"),
        };
        let mut cnots = (0..flag.time)
            .rev()
            .take_while(|&i| !matches!(self.ops[i], ElementaryOp::PrepZero(p) if p == q))
            .filter(|&i| matches!(self.ops[i], ElementaryOp::Cnot { target, .. } if target == q));
        let close = cnots.next().expect("validated: flag closed by a CNOT");
        let open = cnots.last().unwrap_or(close);
        (open, close)
    }

    /// Time after which the round's data CNOT acts (or would act, for dummy rounds):
    /// the latest of the data CNOT, the round's flag openings and the previous
    /// round's flag closings.
    pub fn round_anchor(&self, round: usize) -> Option<usize> {
        let opens = self
            .round_flags(round)
            .into_iter()
            .map(|f| self.flag_interval(f).0)
            .max();
        let previous_closes = if round > 1 {
            self.round_flags(round - 1)
                .into_iter()
                .map(|f| self.flag_interval(f).1)
                .max()
        } else {
            None
        };
        let data = self.round_data(round).and_then(|k| self.data_cnot_time(k));
        opens.max(previous_closes).max(data)
    }

    /// Time index of the syndrome measurement.
    pub fn syndrome_measurement_time(&self) -> usize {
        let s = self.syndrome();
        self.ops
            .iter()
            .position(|op| matches!(op, ElementaryOp::MeasureX { qubit, .. } if *qubit == s))
            .expect("validated: syndrome measured")
    }

    /// Largest number of simultaneously live ancillas (prepared, not yet measured).
    pub fn peak_live_ancillas(&self) -> usize {
        self.live_ancilla_profile().into_iter().max().unwrap_or(0)
    }

    /// Largest number of simultaneously live flag ancillas.
    pub fn peak_live_flags(&self) -> usize {
        let s = self.syndrome();
        let mut live = 0usize;
        let mut peak = 0usize;
        for op in &self.ops {
            match op {
                ElementaryOp::PrepZero(q) | ElementaryOp::PrepPlus(q) if *q != s => live += 1,
                ElementaryOp::MeasureZ { qubit, .. } | ElementaryOp::MeasureX { qubit, .. }
                    if *qubit != s =>
                {
                    live -= 1
                }
                _ => {}
            }
            peak = peak.max(live);
        }
        peak
    }

    /// Live ancilla count after each op.
    pub fn live_ancilla_profile(&self) -> Vec<usize> {
        let w = self.w();
        let mut live = 0usize;
        self.ops
            .iter()
            .map(|op| {
                match op {
                    ElementaryOp::PrepPlus(q) | ElementaryOp::PrepZero(q) if *q >= w => live += 1,
                    ElementaryOp::MeasureZ { qubit, .. } | ElementaryOp::MeasureX { qubit, .. }
                        if *qubit >= w =>
                    {
                        live -= 1
                    }
                    _ => {}
                }
                live
            })
            .collect()
    }

    fn structure(&self, time: usize, message: impl Into<String>) -> Error {
        Error::Structure {
            time,
            message: message.into(),
        }
    }

    /// Checks qubit ranges and the prep/interact/measure bracket of every ancilla,
    /// plus consistency of the round metadata.
    pub fn validate(&self) -> Result<()> {
        let n = self.num_qubits();
        let s = self.syndrome();
        let mut live = vec![false; n];
        let mut syndrome_preps = 0;
        let mut syndrome_meas = 0;
        let mut labels = std::collections::HashSet::new();

        for (time, op) in self.ops.iter().enumerate() {
            for q in op.qubits() {
                if q >= n {
                    return Err(Error::QubitOutOfRange { qubit: q, count: n });
                }
            }
            match op {
                ElementaryOp::PrepPlus(q) | ElementaryOp::PrepZero(q) => {
                    if *q < self.w() {
                        return Err(self.structure(time, "data qubits are never prepared"));
                    }
                    if live[*q] {
                        return Err(
                            self.structure(time, "qubit prepared twice without measurement")
                        );
                    }
                    let expect_plus = *q == s;
                    if matches!(op, ElementaryOp::PrepPlus(_)) != expect_plus {
                        return Err(
                            self.structure(time, "syndrome is prepared in |+>, flags in |0>")
                        );
                    }
                    if *q == s {
                        syndrome_preps += 1;
                    }
                    live[*q] = true;
                }
                ElementaryOp::Cnot { control, target } => {
                    if control == target {
                        return Err(self.structure(time, "CNOT control equals target"));
                    }
                    for q in [control, target] {
                        if *q >= self.w() && !live[*q] {
                            return Err(self.structure(time, "CNOT on an ancilla that is not live"));
                        }
                    }
                    if *control != s {
                        return Err(self
                            .structure(time, "every CNOT is controlled by the syndrome ancilla"));
                    }
                }
                ElementaryOp::MeasureZ { qubit, label }
                | ElementaryOp::MeasureX { qubit, label } => {
                    if *qubit < self.w() {
                        return Err(self.structure(time, "data qubits are never measured"));
                    }
                    if !live[*qubit] {
                        return Err(self.structure(time, "measurement of a qubit that is not live"));
                    }
                    let expect_x = *qubit == s;
                    if matches!(op, ElementaryOp::MeasureX { .. }) != expect_x {
                        return Err(self.structure(time, "syndrome is measured in X, flags in Z"));
                    }
                    if !labels.insert(label.clone()) {
                        return Err(
                            self.structure(time, format!("duplicate outcome label {label}"))
                        );
                    }
                    if *qubit == s {
                        syndrome_meas += 1;
                    }
                    live[*qubit] = false;
                }
            }
        }
        if syndrome_preps != 1 || syndrome_meas != 1 {
            return Err(self.structure(
                self.ops.len(),
                "the syndrome ancilla is prepared and measured exactly once",
            ));
        }
        if let Some(q) = live.iter().position(|&l| l) {
            return Err(self.structure(self.ops.len(), format!("qubit {q} left unmeasured")));
        }

        // Data CNOTs: one per data qubit.
        for k in 1..=self.w() {
            let target = self.data_qubit(k);
            let count = self
                .ops
                .iter()
                .filter(|op| matches!(op, ElementaryOp::Cnot { target: t, .. } if *t == target))
                .count();
            if count != 1 {
                return Err(
                    self.structure(0, format!("data qubit d{k} has {count} CNOTs, expected 1"))
                );
            }
        }

        // Round metadata.
        let flag_meas: Vec<usize> = self
            .ops
            .iter()
            .enumerate()
            .filter(|(_, op)| matches!(op, ElementaryOp::MeasureZ { .. }))
            .map(|(i, _)| i)
            .collect();
        let listed: Vec<usize> = self.flags.iter().map(|f| f.time).collect();
        if listed != flag_meas {
            return Err(
                self.structure(0, "round map must list every flag measurement exactly once")
            );
        }
        for f in &self.flags {
            match &self.ops[f.time] {
                ElementaryOp::MeasureZ { label, .. } if *label == f.label => {}
                _ => {
                    return Err(
                        self.structure(f.time, format!("round map label {} mismatch", f.label))
                    )
                }
            }
            if f.round == 0 || f.round > self.rounds || f.pos == 0 {
                return Err(
                    self.structure(f.time, "round and position are 1-based and within range")
                );
            }
        }
        let mut seen = std::collections::HashSet::new();
        for f in &self.flags {
            if !seen.insert((f.round, f.pos)) {
                return Err(self.structure(f.time, "two flags share a round position"));
            }
        }
        for (&round, &k) in &self.data_rounds {
            if round == 0 || round > self.rounds || !(1..=self.w()).contains(&k) {
                return Err(self.structure(0, format!("round {round} data {k} out of range")));
            }
        }
        let mut data: Vec<usize> = self.data_rounds.values().copied().collect();
        data.sort_unstable();
        if data != (1..=self.w()).collect::<Vec<_>>() {
            return Err(self.structure(0, "every data qubit belongs to exactly one round"));
        }
        Ok(())
    }
}

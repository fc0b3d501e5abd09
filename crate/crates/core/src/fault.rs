//! Fault sites, their propagation to flag outcomes and data errors, and the
//! fault classes used by the correction argument.
//!
//! Only three kinds of fault matter for a flag circuit built from CNOTs out
//! of one syndrome ancilla: X on the syndrome ancilla, a flipped flag
//! outcome, and the two-qubit fault on a data CNOT with X on the control and
//! an unknown Pauli on the data target. Z on the syndrome ancilla only flips
//! the syndrome bit and is kept as a single ignorable representative.
//!
//! Data errors are only X type. The unknown Pauli left by a data-CNOT fault
//! is never expanded; the target is recorded in the unknown set and judged
//! afterwards as a free position.

use std::collections::HashSet;
use std::fmt;

use crate::bits::BitString;
use crate::builder::{gap_of, round_anchors};
use crate::circuit::{ElementaryOp, FlagCircuit, Qubit, SchemeKind};
use crate::error::{Error, Result};
use crate::pauli::{conjugate_through, Pauli, PauliMask};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum SiteKind {
    SyndromeX,
    FlagFlip,
    /// X on the syndrome control and an unknown Pauli on the data target.
    DataCnotXP,
    /// Z on the syndrome ancilla; flips the syndrome outcome only.
    Ignorable,
}

impl SiteKind {
    fn tag(self) -> &'static str {
        match self {
            SiteKind::SyndromeX => "sx",
            SiteKind::FlagFlip => "ff",
            SiteKind::DataCnotXP => "xp",
            SiteKind::Ignorable => "sz",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Marker {
    Before,
    After,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct SiteLocation {
    pub time: usize,
    pub marker: Marker,
    pub qubits: Vec<Qubit>,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct FaultSite {
    pub kind: SiteKind,
    pub location: SiteLocation,
    /// Concrete Pauli content, excluding the symbolic data-target Pauli.
    pub pauli: PauliMask,
    /// 1-based data index carrying an unknown Pauli.
    pub symbolic_target: Option<usize>,
}

impl FaultSite {
    /// X on the syndrome ancilla right after op `time`.
    pub fn syndrome_x(circuit: &FlagCircuit, time: usize) -> Result<Self> {
        Self::on_syndrome(circuit, time, SiteKind::SyndromeX, Pauli::X)
    }

    /// Z on the syndrome ancilla right after op `time`.
    pub fn syndrome_z(circuit: &FlagCircuit, time: usize) -> Result<Self> {
        Self::on_syndrome(circuit, time, SiteKind::Ignorable, Pauli::Z)
    }

    fn on_syndrome(circuit: &FlagCircuit, time: usize, kind: SiteKind, p: Pauli) -> Result<Self> {
        let s = circuit.syndrome();
        let prep = circuit
            .ops()
            .iter()
            .position(|op| matches!(op, ElementaryOp::PrepPlus(q) if *q == s))
            .unwrap_or(0);
        let meas = circuit.syndrome_measurement_time();
        if time < prep || time >= meas {
            return Err(Error::BadSite(format!(
                "syndrome fault after op {time} is outside the ancilla's lifetime"
            )));
        }
        Ok(Self {
            kind,
            location: SiteLocation {
                time,
                marker: Marker::After,
                qubits: vec![s],
            },
            pauli: PauliMask::single(circuit.num_qubits(), s, p),
            symbolic_target: None,
        })
    }

    /// Flip of the flag measured at op `time`.
    pub fn flag_flip(circuit: &FlagCircuit, time: usize) -> Result<Self> {
        match circuit.ops().get(time) {
            Some(ElementaryOp::MeasureZ { qubit, .. }) => Ok(Self {
                kind: SiteKind::FlagFlip,
                location: SiteLocation {
                    time,
                    marker: Marker::Before,
                    qubits: vec![*qubit],
                },
                pauli: PauliMask::single(circuit.num_qubits(), *qubit, Pauli::X),
                symbolic_target: None,
            }),
            _ => Err(Error::BadSite(format!(
                "op {time} is not a flag measurement"
            ))),
        }
    }

    /// X on the control and an unknown Pauli on the target of the data CNOT at `time`.
    pub fn data_cnot_xp(circuit: &FlagCircuit, time: usize) -> Result<Self> {
        match circuit.ops().get(time) {
            Some(ElementaryOp::Cnot { control, target }) if *target < circuit.w() => Ok(Self {
                kind: SiteKind::DataCnotXP,
                location: SiteLocation {
                    time,
                    marker: Marker::After,
                    qubits: vec![*control, *target],
                },
                pauli: PauliMask::single(circuit.num_qubits(), *control, Pauli::X),
                symbolic_target: Some(*target + 1),
            }),
            _ => Err(Error::BadSite(format!("op {time} is not a data CNOT"))),
        }
    }

    /// Short textual handle such as `sx@12`, stable across runs.
    pub fn descriptor(&self) -> String {
        format!("{}@{}", self.kind.tag(), self.location.time)
    }

    pub fn from_descriptor(circuit: &FlagCircuit, text: &str) -> Result<Self> {
        let (tag, time) = text
            .split_once('@')
            .ok_or_else(|| Error::BadSite(format!("bad site descriptor {text:?}")))?;
        let time: usize = time
            .parse()
            .map_err(|_| Error::BadSite(format!("bad site time in {text:?}")))?;
        match tag {
            "sx" => Self::syndrome_x(circuit, time),
            "ff" => Self::flag_flip(circuit, time),
            "xp" => Self::data_cnot_xp(circuit, time),
            "sz" => Self::syndrome_z(circuit, time),
            _ => Err(Error::BadSite(format!("unknown site kind {tag:?}"))),
        }
    }
}

impl fmt::Display for FaultSite {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.descriptor())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct PropagationResult {
    /// One bit per flag measurement, in measurement order.
    pub flags: BitString,
    pub syndrome_flip: bool,
    /// X errors left on the data, bit `k-1` for data qubit `k`.
    pub data_x: BitString,
    /// Data qubits carrying an unknown Pauli.
    pub unknown: BitString,
}

impl PropagationResult {
    pub fn trivial(circuit: &FlagCircuit) -> Self {
        Self {
            flags: BitString::zeros(circuit.num_flags()),
            syndrome_flip: false,
            data_x: BitString::zeros(circuit.w()),
            unknown: BitString::zeros(circuit.w()),
        }
    }

    /// Accumulates another fault's effect: XOR on outcomes and errors, union on unknowns.
    pub fn combine(&mut self, other: &PropagationResult) {
        self.flags.xor_assign(&other.flags);
        self.syndrome_flip ^= other.syndrome_flip;
        self.data_x.xor_assign(&other.data_x);
        self.unknown.or_assign(&other.unknown);
    }

    pub fn is_trivial(&self) -> bool {
        self.flags.is_zero()
            && !self.syndrome_flip
            && self.data_x.is_zero()
            && self.unknown.is_zero()
    }
}

/// Weight of `error · correction` on the known positions, counted up to the
/// measured stabilizer `X^{⊗w}`.
pub fn residual_weight(error: &BitString, correction: &BitString, unknown: &BitString) -> usize {
    let known = unknown.not();
    let residual = error.xor(correction).and(&known);
    let weight = residual.count_ones();
    weight.min(known.count_ones() - weight)
}

/// Pushes one site's Pauli through every later op.
pub fn propagate_site(circuit: &FlagCircuit, site: &FaultSite) -> Result<PropagationResult> {
    if site.pauli.width() != circuit.num_qubits() {
        return Err(Error::FrameWidth {
            expected: circuit.num_qubits(),
            got: site.pauli.width(),
        });
    }
    let start = match site.location.marker {
        Marker::Before => site.location.time,
        Marker::After => site.location.time + 1,
    };
    if start > circuit.ops().len() {
        return Err(Error::BadSite(format!(
            "site {site} lies past the end of the circuit"
        )));
    }
    let mut frame = site.pauli.clone();
    let mut result = PropagationResult::trivial(circuit);
    let mut flag_index = circuit
        .flag_measurements()
        .iter()
        .take_while(|f| f.time < start)
        .count();
    for op in &circuit.ops()[start..] {
        if let Some(flipped) = conjugate_through(op, &mut frame)? {
            match op {
                ElementaryOp::MeasureZ { .. } => {
                    result.flags.set(flag_index, flipped);
                    flag_index += 1;
                }
                _ => result.syndrome_flip = flipped,
            }
        }
    }
    for k in 0..circuit.w() {
        result.data_x.set(k, frame.x.get(k));
    }
    if let Some(k) = site.symbolic_target {
        result.unknown.set(k - 1, true);
        result.data_x.set(k - 1, false);
    }
    Ok(result)
}

/// XOR-accumulation of every site's propagated effect.
pub fn propagate_faults(circuit: &FlagCircuit, combo: &FaultCombo) -> Result<PropagationResult> {
    let mut total = PropagationResult::trivial(circuit);
    for site in &combo.sites {
        total.combine(&propagate_site(circuit, site)?);
    }
    Ok(total)
}

/// One representative per distinct propagation result.
///
/// Candidates are listed syndrome X faults first (after every op on the
/// syndrome ancilla except its measurement), then flag flips, then data-CNOT
/// faults, then the single Z representative; later duplicates are dropped.
pub fn enumerate_fault_sites(circuit: &FlagCircuit) -> Result<Vec<FaultSite>> {
    Ok(dedup_sites(circuit, candidate_sites(circuit)?)?
        .into_iter()
        .map(|(site, _)| site)
        .collect())
}

fn candidate_sites(circuit: &FlagCircuit) -> Result<Vec<FaultSite>> {
    let s = circuit.syndrome();
    let meas = circuit.syndrome_measurement_time();
    let mut out = Vec::new();
    for (time, op) in circuit.ops().iter().enumerate() {
        if op.touches(s) && time < meas {
            out.push(FaultSite::syndrome_x(circuit, time)?);
        }
    }
    for f in circuit.flag_measurements() {
        out.push(FaultSite::flag_flip(circuit, f.time)?);
    }
    for k in 1..=circuit.w() {
        let time = circuit
            .data_cnot_time(k)
            .ok_or_else(|| Error::BuilderBug(format!("data qubit d{k} has no CNOT")))?;
        out.push(FaultSite::data_cnot_xp(circuit, time)?);
    }
    let prep = circuit
        .ops()
        .iter()
        .position(|op| matches!(op, ElementaryOp::PrepPlus(q) if *q == s))
        .unwrap_or(0);
    out.push(FaultSite::syndrome_z(circuit, prep)?);
    Ok(out)
}

fn dedup_sites(
    circuit: &FlagCircuit,
    candidates: Vec<FaultSite>,
) -> Result<Vec<(FaultSite, PropagationResult)>> {
    let mut seen = HashSet::new();
    let mut out = Vec::new();
    for site in candidates {
        let result = propagate_site(circuit, &site)?;
        if seen.insert(result.clone()) {
            out.push((site, result));
        }
    }
    Ok(out)
}

/// Fault classes of the correction argument.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum FaultClass {
    /// Flag measurement fault (`F`).
    Flag,
    /// Syndrome fault flipping `d` flags (`S_d`).
    SyndromeFlipsD,
    /// Syndrome fault flipping `d-1` flags or sitting in the last round (`S_{d-1}`).
    SyndromeFlipsDMinus1,
    Ignorable,
}

impl FaultClass {
    pub fn name(self) -> &'static str {
        match self {
            FaultClass::Flag => "flag",
            FaultClass::SyndromeFlipsD => "syndrome_d",
            FaultClass::SyndromeFlipsDMinus1 => "syndrome_d_minus_1",
            FaultClass::Ignorable => "ignorable",
        }
    }
}

fn is_stabilizer_or_identity(mask: &BitString) -> bool {
    mask.is_zero() || mask.count_ones() == mask.len()
}

/// Classifies a site by how many flags it flips.
///
/// On the modified scheme, a syndrome fault strictly between the first
/// round's anchor and the last data CNOT must flip `d-1` or `d` flags;
/// anything else is reported as a builder bug. Outside that window (and on
/// other schemes) anything that is not a `d`-flip counts as `S_{d-1}`.
pub fn classify_fault(site: &FaultSite, circuit: &FlagCircuit) -> Result<FaultClass> {
    let result = propagate_site(circuit, site)?;
    classify_with(site, &result, circuit)
}

fn classify_with(
    site: &FaultSite,
    result: &PropagationResult,
    circuit: &FlagCircuit,
) -> Result<FaultClass> {
    match site.kind {
        SiteKind::FlagFlip => return Ok(FaultClass::Flag),
        SiteKind::Ignorable => return Ok(FaultClass::Ignorable),
        SiteKind::SyndromeX | SiteKind::DataCnotXP => {}
    }
    let d = circuit.params().d();
    let flipped = result.flags.count_ones();
    if flipped == 0 && is_stabilizer_or_identity(&result.data_x) && result.unknown.is_zero() {
        return Ok(FaultClass::Ignorable);
    }
    if flipped == d {
        return Ok(FaultClass::SyndromeFlipsD);
    }
    if flipped == d - 1 {
        return Ok(FaultClass::SyndromeFlipsDMinus1);
    }
    if circuit.params().kind() == SchemeKind::Modified {
        let anchors = round_anchors(circuit)?;
        let time = site.location.time;
        let interior = gap_of(&anchors, time).is_some() && time < *anchors.last().unwrap();
        if interior {
            return Err(Error::BuilderBug(format!(
                "interior site {site} flips {flipped} flags, expected {} or {d}",
                d - 1
            )));
        }
    }
    Ok(FaultClass::SyndromeFlipsDMinus1)
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct PartitionCounts {
    pub flag: usize,
    pub syndrome_d: usize,
    pub syndrome_d_minus_1: usize,
    pub ignorable: usize,
    /// Sites carrying an unknown data Pauli (`F ∩ 𝓕*`).
    pub data_cnot_xp: usize,
}

impl PartitionCounts {
    pub fn classified(&self) -> usize {
        self.flag + self.syndrome_d + self.syndrome_d_minus_1
    }
}

/// A set of faults acting together.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash)]
pub struct FaultCombo {
    pub sites: Vec<FaultSite>,
}

impl FaultCombo {
    pub fn new(sites: Vec<FaultSite>) -> Self {
        Self { sites }
    }

    pub fn len(&self) -> usize {
        self.sites.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sites.is_empty()
    }

    /// Error budget: number of faults not carrying an unknown data Pauli.
    pub fn budget(&self) -> usize {
        self.sites
            .iter()
            .filter(|s| s.kind != SiteKind::DataCnotXP)
            .count()
    }

    pub fn partition(&self, circuit: &FlagCircuit) -> Result<PartitionCounts> {
        let mut counts = PartitionCounts::default();
        for site in &self.sites {
            if site.kind == SiteKind::DataCnotXP {
                counts.data_cnot_xp += 1;
            }
            match classify_fault(site, circuit)? {
                FaultClass::Flag => counts.flag += 1,
                FaultClass::SyndromeFlipsD => counts.syndrome_d += 1,
                FaultClass::SyndromeFlipsDMinus1 => counts.syndrome_d_minus_1 += 1,
                FaultClass::Ignorable => counts.ignorable += 1,
            }
        }
        Ok(counts)
    }

    /// Comma-separated site descriptors, `-` when empty.
    pub fn descriptor(&self) -> String {
        if self.sites.is_empty() {
            return "-".to_string();
        }
        self.sites
            .iter()
            .map(FaultSite::descriptor)
            .collect::<Vec<_>>()
            .join(",")
    }

    pub fn from_descriptor(circuit: &FlagCircuit, text: &str) -> Result<Self> {
        if text == "-" {
            return Ok(Self::default());
        }
        text.split(',')
            .map(|part| FaultSite::from_descriptor(circuit, part))
            .collect::<Result<Vec<_>>>()
            .map(Self::new)
    }
}

/// Deduplicated sites of one circuit with their propagated effects and classes.
#[derive(Debug, Clone)]
pub struct SiteCatalog {
    sites: Vec<FaultSite>,
    results: Vec<PropagationResult>,
    classes: Vec<FaultClass>,
}

impl SiteCatalog {
    pub fn new(circuit: &FlagCircuit) -> Result<Self> {
        let pairs = dedup_sites(circuit, candidate_sites(circuit)?)?;
        let classes = pairs
            .iter()
            .map(|(site, result)| classify_with(site, result, circuit))
            .collect::<Result<Vec<_>>>()?;
        let (sites, results) = pairs.into_iter().unzip();
        Ok(Self {
            sites,
            results,
            classes,
        })
    }

    pub fn len(&self) -> usize {
        self.sites.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sites.is_empty()
    }

    pub fn sites(&self) -> &[FaultSite] {
        &self.sites
    }

    pub fn result(&self, index: usize) -> &PropagationResult {
        &self.results[index]
    }

    pub fn class(&self, index: usize) -> FaultClass {
        self.classes[index]
    }

    /// Indices of sites that can change the outcome of a fault-tolerance check.
    pub fn active(&self) -> Vec<usize> {
        (0..self.sites.len())
            .filter(|&i| self.classes[i] != FaultClass::Ignorable)
            .collect()
    }

    /// Effect of a combo given as catalog indices, via linearity.
    pub fn combined(&self, circuit: &FlagCircuit, indices: &[usize]) -> PropagationResult {
        let mut total = PropagationResult::trivial(circuit);
        for &i in indices {
            total.combine(&self.results[i]);
        }
        total
    }

    pub fn budget(&self, indices: &[usize]) -> usize {
        indices
            .iter()
            .filter(|&&i| self.sites[i].kind != SiteKind::DataCnotXP)
            .count()
    }

    pub fn combo(&self, indices: &[usize]) -> FaultCombo {
        FaultCombo::new(indices.iter().map(|&i| self.sites[i].clone()).collect())
    }

    /// Site counts per class, keyed by class name.
    pub fn class_counts(&self) -> Vec<(FaultClass, usize)> {
        let mut counts = std::collections::BTreeMap::new();
        for c in &self.classes {
            *counts.entry(*c).or_insert(0) += 1;
        }
        counts.into_iter().collect()
    }
}

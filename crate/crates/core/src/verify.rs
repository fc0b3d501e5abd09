//! Exhaustive fault-tolerance checks.
//!
//! A flag circuit is d-fault-tolerant when every combination of at most `t`
//! faults leaves, after flag-based corrections, at most as many data errors
//! as there were faults. Errors are X type and counted up to the measured
//! stabilizer. A data-CNOT fault with an unknown Pauli on its target is not
//! counted in the budget; its target is excluded from the residual instead.
//!
//! Combos are drawn from the deduplicated [`SiteCatalog`] and propagated by
//! XOR of per-site effects. The combo space is split by first site across
//! rayon workers and merged with order-independent reductions, so results do
//! not depend on the thread count.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use itertools::Itertools;
use rayon::prelude::*;

use crate::bits::BitString;
use crate::circuit::{FlagCircuit, SchemeKind};
use crate::decoder::{decode, fault_count_lower_bound, group_rounds};
use crate::error::{Error, Result};
use crate::fault::{residual_weight, FaultCombo, PropagationResult, SiteCatalog};

/// Largest weight for which corrections are enumerated exhaustively.
pub const EXPLICIT_SEARCH_MAX_W: usize = 20;

/// Canonical form of an observed flag pattern: outcomes in measurement order.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct FlagKey(pub BitString);

impl fmt::Display for FlagKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.0.fmt(f)
    }
}

/// Corrections that are acceptable for one fault combo: `c` is valid iff the
/// residual `(E ⊕ c)` restricted to the known positions weighs at most `budget`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct CorrectionSet {
    pub error: BitString,
    pub unknown: BitString,
    pub budget: usize,
}

impl CorrectionSet {
    pub fn new(result: &PropagationResult, budget: usize) -> Self {
        // Bits on unknown positions never matter; normalise them away so equal
        // constraints compare equal.
        let known = result.unknown.not();
        Self {
            error: result.data_x.and(&known),
            unknown: result.unknown.clone(),
            budget,
        }
    }

    pub fn contains(&self, correction: &BitString) -> bool {
        residual_weight(&self.error, correction, &self.unknown) <= self.budget
    }

    fn contains_u64(&self, w: usize, correction: u64) -> bool {
        let known = !self.unknown.to_u64() & mask_of(w);
        let residual = ((self.error.to_u64() ^ correction) & known).count_ones() as usize;
        residual.min(known.count_ones() as usize - residual) <= self.budget
    }
}

fn mask_of(w: usize) -> u64 {
    if w == 64 {
        u64::MAX
    } else {
        (1u64 << w) - 1
    }
}

/// Every combo of `0..=t` distinct active sites, visited in parallel.
fn fold_combos<A, F, R>(active: &[usize], t: usize, identity: fn() -> A, fold: F, reduce: R) -> A
where
    A: Send,
    F: Fn(A, &[usize]) -> A + Sync,
    R: Fn(A, A) -> A + Sync,
{
    let mut acc = fold(identity(), &[]);
    for size in 1..=t.min(active.len()) {
        let part = (0..active.len())
            .into_par_iter()
            .fold(identity, |mut a, first| {
                let rest = &active[first + 1..];
                let mut combo = Vec::with_capacity(size);
                for tail in rest.iter().copied().combinations(size - 1) {
                    combo.clear();
                    combo.push(active[first]);
                    combo.extend(tail);
                    a = fold(a, &combo);
                }
                a
            })
            .reduce(identity, &reduce);
        acc = reduce(acc, part);
    }
    acc
}

/// Orders combos by size, then lexicographically by site index.
fn combo_order(a: &[usize], b: &[usize]) -> std::cmp::Ordering {
    a.len().cmp(&b.len()).then_with(|| a.cmp(b))
}

fn pick_first(a: Option<Vec<usize>>, b: Option<Vec<usize>>) -> Option<Vec<usize>> {
    match (a, b) {
        (Some(x), Some(y)) => Some(if combo_order(&x, &y).is_le() { x } else { y }),
        (x, y) => x.or(y),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum VerifyMode {
    Decoder,
    Search,
}

impl VerifyMode {
    pub fn name(self) -> &'static str {
        match self {
            VerifyMode::Decoder => "decoder",
            VerifyMode::Search => "search",
        }
    }

    pub fn from_name(name: &str) -> Option<Self> {
        match name {
            "decoder" => Some(VerifyMode::Decoder),
            "search" => Some(VerifyMode::Search),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Verdict {
    Pass,
    Fail,
}

impl Verdict {
    pub fn name(self) -> &'static str {
        match self {
            Verdict::Pass => "pass",
            Verdict::Fail => "fail",
        }
    }
}

/// A decoder run that leaves too many data errors.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DecoderViolation {
    pub combo: FaultCombo,
    pub flags: BitString,
    pub error: BitString,
    pub unknown: BitString,
    pub budget: usize,
    /// `None` when the decoder rejected the pattern (no start run).
    pub correction: Option<BitString>,
    pub residual: Option<usize>,
}

/// A flag pattern whose producing combos admit no common correction.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SearchFailure {
    pub key: FlagKey,
    pub combos: Vec<FaultCombo>,
    /// Whether every correction string was ruled out, as opposed to a
    /// restricted candidate list for large weights.
    pub exhaustive: bool,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Counterexample {
    Decoder(DecoderViolation),
    Search(SearchFailure),
}

/// Map from observed flag pattern to the X correction to apply.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RuleTable {
    pub w: usize,
    pub rules: BTreeMap<FlagKey, BitString>,
}

impl RuleTable {
    pub fn lookup(&self, key: &FlagKey) -> Option<&BitString> {
        self.rules.get(key)
    }

    pub fn len(&self) -> usize {
        self.rules.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rules.is_empty()
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FtReport {
    pub mode: VerifyMode,
    pub t: usize,
    pub verdict: Verdict,
    pub counterexample: Option<Counterexample>,
    pub stats: BTreeMap<String, u64>,
    pub rules: Option<RuleTable>,
}

impl FtReport {
    pub fn passed(&self) -> bool {
        self.verdict == Verdict::Pass
    }

    pub fn stat(&self, key: &str) -> u64 {
        self.stats.get(key).copied().unwrap_or(0)
    }
}

fn catalog_stats(catalog: &SiteCatalog) -> BTreeMap<String, u64> {
    let mut stats = BTreeMap::new();
    stats.insert("sites".to_string(), catalog.len() as u64);
    for (class, count) in catalog.class_counts() {
        stats.insert(format!("sites.{}", class.name()), count as u64);
    }
    stats
}

#[derive(Default)]
struct DecoderAcc {
    combos: u64,
    max_residual: u64,
    max_lower_bound: u64,
    lower_bound_violations: u64,
    dummy_triggers: u64,
    corner_fixes: u64,
    violation: Option<Vec<usize>>,
}

impl DecoderAcc {
    fn merge(mut self, other: DecoderAcc) -> DecoderAcc {
        self.combos += other.combos;
        self.max_residual = self.max_residual.max(other.max_residual);
        self.max_lower_bound = self.max_lower_bound.max(other.max_lower_bound);
        self.lower_bound_violations += other.lower_bound_violations;
        self.dummy_triggers += other.dummy_triggers;
        self.corner_fixes += other.corner_fixes;
        self.violation = pick_first(self.violation, other.violation);
        self
    }
}

fn require_modified(circuit: &FlagCircuit) -> Result<()> {
    if circuit.params().kind() != SchemeKind::Modified {
        return Err(Error::NotModifiedScheme);
    }
    Ok(())
}

type Decoded = Option<(BitString, crate::decoder::DecoderTrace)>;

/// Runs the decoder on one combo's flags and measures the residual.
fn decoder_outcome(
    circuit: &FlagCircuit,
    result: &PropagationResult,
) -> Result<(Decoded, Option<usize>)> {
    let pattern = group_rounds(circuit, &result.flags)?;
    match decode(&pattern, circuit.params()) {
        Ok((correction, trace)) => {
            let residual = residual_weight(&result.data_x, &correction, &result.unknown);
            Ok((Some((correction, trace)), Some(residual)))
        }
        Err(Error::NoStartRun { .. }) => Ok((None, None)),
        Err(e) => Err(e),
    }
}

/// Checks the left-to-right decoder against every combo of at most `t` faults.
pub fn check_decoder_ft(circuit: &FlagCircuit, t: usize) -> Result<FtReport> {
    require_modified(circuit)?;
    // Surface structural errors (round widths) once, up front.
    group_rounds(circuit, &BitString::zeros(circuit.num_flags()))?;
    let catalog = SiteCatalog::new(circuit)?;
    let active = catalog.active();
    let dummy = circuit.params().r();

    let acc = fold_combos(
        &active,
        t,
        DecoderAcc::default,
        |mut acc, combo| {
            acc.combos += 1;
            let result = catalog.combined(circuit, combo);
            let budget = catalog.budget(combo);
            let (decoded, residual) =
                decoder_outcome(circuit, &result).expect("round structure checked up front");
            match (decoded, residual) {
                (Some((_, trace)), Some(residual)) => {
                    acc.max_residual = acc.max_residual.max(residual as u64);
                    let bound = fault_count_lower_bound(&trace) as u64;
                    acc.max_lower_bound = acc.max_lower_bound.max(bound);
                    if bound > combo.len() as u64 {
                        acc.lower_bound_violations += 1;
                    }
                    acc.dummy_triggers +=
                        trace.triggered.iter().filter(|&&i| i <= dummy).count() as u64;
                    acc.corner_fixes += u64::from(trace.corner_fix_applied);
                    if residual > budget {
                        acc.violation = pick_first(acc.violation.take(), Some(combo.to_vec()));
                    }
                }
                _ => acc.violation = pick_first(acc.violation.take(), Some(combo.to_vec())),
            }
            acc
        },
        DecoderAcc::merge,
    );

    let mut stats = catalog_stats(&catalog);
    stats.insert("combos".into(), acc.combos);
    stats.insert("max_residual".into(), acc.max_residual);
    stats.insert("max_lower_bound".into(), acc.max_lower_bound);
    stats.insert("lower_bound_violations".into(), acc.lower_bound_violations);
    stats.insert("dummy_round_triggers".into(), acc.dummy_triggers);
    stats.insert("corner_fixes".into(), acc.corner_fixes);

    let counterexample = match acc.violation {
        Some(indices) => {
            let result = catalog.combined(circuit, &indices);
            let (decoded, residual) = decoder_outcome(circuit, &result)?;
            Some(Counterexample::Decoder(DecoderViolation {
                combo: catalog.combo(&indices),
                flags: result.flags.clone(),
                error: result.data_x.clone(),
                unknown: result.unknown.clone(),
                budget: catalog.budget(&indices),
                correction: decoded.map(|(c, _)| c),
                residual,
            }))
        }
        None => None,
    };
    Ok(FtReport {
        mode: VerifyMode::Decoder,
        t,
        verdict: if counterexample.is_some() {
            Verdict::Fail
        } else {
            Verdict::Pass
        },
        counterexample,
        stats,
        rules: None,
    })
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DictEntry {
    /// Catalog indices.
    pub combo: Vec<usize>,
    pub result: PropagationResult,
}

/// Every flag pattern reachable with at most `t` faults, with the combos producing it.
#[derive(Debug, Clone)]
pub struct FlagDictionary {
    pub catalog: SiteCatalog,
    pub t: usize,
    pub entries: BTreeMap<FlagKey, Vec<DictEntry>>,
    pub combos: u64,
}

impl FlagDictionary {
    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }
}

type DictAcc = (u64, BTreeMap<FlagKey, Vec<DictEntry>>);

fn merge_dict(mut a: DictAcc, b: DictAcc) -> DictAcc {
    a.0 += b.0;
    for (key, mut list) in b.1 {
        a.1.entry(key).or_default().append(&mut list);
    }
    a
}

pub fn collect_flag_dictionary(circuit: &FlagCircuit, t: usize) -> Result<FlagDictionary> {
    let catalog = SiteCatalog::new(circuit)?;
    let active = catalog.active();
    let (combos, mut entries) = fold_combos(
        &active,
        t,
        || (0, BTreeMap::new()),
        |mut acc: DictAcc, combo| {
            acc.0 += 1;
            let result = catalog.combined(circuit, combo);
            acc.1
                .entry(FlagKey(result.flags.clone()))
                .or_default()
                .push(DictEntry {
                    combo: combo.to_vec(),
                    result,
                });
            acc
        },
        merge_dict,
    );
    for list in entries.values_mut() {
        list.sort_by(|a, b| combo_order(&a.combo, &b.combo));
    }
    Ok(FlagDictionary {
        catalog,
        t,
        entries,
        combos,
    })
}

/// Distinct constraints of one key, each with the first combo that imposes it.
fn key_constraints(dict: &FlagDictionary, list: &[DictEntry]) -> Vec<(CorrectionSet, usize)> {
    let mut seen = BTreeSet::new();
    let mut out = Vec::new();
    for (i, entry) in list.iter().enumerate() {
        let set = CorrectionSet::new(&entry.result, dict.catalog.budget(&entry.combo));
        if seen.insert(set.clone()) {
            out.push((set, i));
        }
    }
    out
}

/// All corrections over `w` bits ordered by weight, then lexicographically by printed form.
fn ordered_candidates(w: usize) -> Vec<u64> {
    let mut all: Vec<u64> = (0..=mask_of(w)).collect();
    let printed = |c: u64| {
        if w == 0 {
            0
        } else {
            c.reverse_bits() >> (64 - w)
        }
    };
    all.sort_by_key(|&c| (c.count_ones(), printed(c)));
    all
}

enum KeyOutcome {
    Rule(BitString),
    Conflict {
        witnesses: Vec<usize>,
        exhaustive: bool,
    },
}

fn solve_key_explicit(
    w: usize,
    candidates: &[u64],
    constraints: &[(CorrectionSet, usize)],
) -> KeyOutcome {
    if let Some(&c) = candidates
        .iter()
        .find(|&&c| constraints.iter().all(|(set, _)| set.contains_u64(w, c)))
    {
        return KeyOutcome::Rule(BitString::from_u64(w, c));
    }
    // Shrink to a witness: the first prefix with empty intersection, then a
    // disjoint pair inside it if one exists.
    let mut alive: Vec<u64> = candidates.to_vec();
    let mut cut = constraints.len() - 1;
    for (k, (set, _)) in constraints.iter().enumerate() {
        alive.retain(|&c| set.contains_u64(w, c));
        if alive.is_empty() {
            cut = k;
            break;
        }
    }
    let last = &constraints[cut].0;
    let pair = (0..cut).find(|&j| {
        let other = &constraints[j].0;
        !candidates
            .iter()
            .any(|&c| other.contains_u64(w, c) && last.contains_u64(w, c))
    });
    let witnesses = match pair {
        Some(j) => vec![constraints[j].1, constraints[cut].1],
        None => constraints[..=cut].iter().map(|(_, i)| *i).collect(),
    };
    KeyOutcome::Conflict {
        witnesses,
        exhaustive: true,
    }
}

fn solve_key_restricted(w: usize, constraints: &[(CorrectionSet, usize)]) -> KeyOutcome {
    let mut candidates: Vec<BitString> = vec![BitString::zeros(w)];
    candidates.extend(constraints.iter().map(|(set, _)| set.error.clone()));
    candidates.sort_by(|a, b| a.count_ones().cmp(&b.count_ones()).then_with(|| a.cmp(b)));
    candidates.dedup();
    match candidates
        .into_iter()
        .find(|c| constraints.iter().all(|(set, _)| set.contains(c)))
    {
        Some(c) => KeyOutcome::Rule(c),
        None => KeyOutcome::Conflict {
            witnesses: constraints.iter().map(|(_, i)| *i).collect(),
            exhaustive: false,
        },
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SearchOutcome {
    Success(RuleTable),
    Failure(SearchFailure),
}

/// Result of a search together with the size of the enumerated space.
#[derive(Debug, Clone)]
pub struct SearchRun {
    pub outcome: SearchOutcome,
    pub dictionary: FlagDictionary,
}

/// Brute-force search for a correction rule per flag pattern.
///
/// For each reachable key, the rule must lie in the intersection of the
/// correction sets of every combo producing that key. Among valid rules the
/// lowest-weight one is kept, ties broken by printed form.
pub fn search_correction_rules(circuit: &FlagCircuit, d: usize) -> Result<SearchOutcome> {
    Ok(search_with_t(circuit, (d.max(1) - 1) / 2)?.outcome)
}

pub fn search_with_t(circuit: &FlagCircuit, t: usize) -> Result<SearchRun> {
    let dict = collect_flag_dictionary(circuit, t)?;
    let w = circuit.w();
    let candidates = (w <= EXPLICIT_SEARCH_MAX_W).then(|| ordered_candidates(w));

    let keys: Vec<(&FlagKey, &Vec<DictEntry>)> = dict.entries.iter().collect();
    let solved: Vec<(FlagKey, KeyOutcome)> = keys
        .par_iter()
        .map(|(key, list)| {
            let constraints = key_constraints(&dict, list);
            let outcome = match &candidates {
                Some(c) => solve_key_explicit(w, c, &constraints),
                None => solve_key_restricted(w, &constraints),
            };
            ((*key).clone(), outcome)
        })
        .collect();

    let mut rules = BTreeMap::new();
    for (key, outcome) in solved {
        match outcome {
            KeyOutcome::Rule(c) => {
                rules.insert(key, c);
            }
            KeyOutcome::Conflict {
                witnesses,
                exhaustive,
            } => {
                let list = &dict.entries[&key];
                let combos = witnesses
                    .iter()
                    .map(|&i| dict.catalog.combo(&list[i].combo))
                    .collect();
                return Ok(SearchRun {
                    outcome: SearchOutcome::Failure(SearchFailure {
                        key,
                        combos,
                        exhaustive,
                    }),
                    dictionary: dict,
                });
            }
        }
    }
    Ok(SearchRun {
        outcome: SearchOutcome::Success(RuleTable { w, rules }),
        dictionary: dict,
    })
}

/// Rule search wrapped as a report.
pub fn run_search(circuit: &FlagCircuit, t: usize) -> Result<FtReport> {
    let run = search_with_t(circuit, t)?;
    let mut stats = catalog_stats(&run.dictionary.catalog);
    stats.insert("combos".into(), run.dictionary.combos);
    stats.insert("keys".into(), run.dictionary.len() as u64);
    Ok(match run.outcome {
        SearchOutcome::Success(table) => {
            stats.insert("rules".into(), table.len() as u64);
            let max_weight = table
                .rules
                .values()
                .map(BitString::count_ones)
                .max()
                .unwrap_or(0);
            stats.insert("max_rule_weight".into(), max_weight as u64);
            FtReport {
                mode: VerifyMode::Search,
                t,
                verdict: Verdict::Pass,
                counterexample: None,
                stats,
                rules: Some(table),
            }
        }
        SearchOutcome::Failure(failure) => FtReport {
            mode: VerifyMode::Search,
            t,
            verdict: Verdict::Fail,
            counterexample: Some(Counterexample::Search(failure)),
            stats,
            rules: None,
        },
    })
}

/// Replays every combo of at most `t` faults against a rule table.
/// Returns the first combo (canonical order) whose residual exceeds its budget.
pub fn check_rule_table(
    circuit: &FlagCircuit,
    table: &RuleTable,
    t: usize,
) -> Result<Option<FaultCombo>> {
    let catalog = SiteCatalog::new(circuit)?;
    let active = catalog.active();
    let bad = fold_combos(
        &active,
        t,
        || None,
        |acc: Option<Vec<usize>>, combo| {
            let result = catalog.combined(circuit, combo);
            let ok = table
                .lookup(&FlagKey(result.flags.clone()))
                .is_some_and(|c| {
                    residual_weight(&result.data_x, c, &result.unknown) <= catalog.budget(combo)
                });
            if ok {
                acc
            } else {
                pick_first(acc, Some(combo.to_vec()))
            }
        },
        pick_first,
    );
    Ok(bad.map(|indices| catalog.combo(&indices)))
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CrossValidation {
    pub search_succeeded: bool,
    pub keys_checked: usize,
    pub combos_checked: u64,
    /// Keys where the decoder's correction falls outside some combo's correction set.
    pub mismatched_keys: Vec<FlagKey>,
}

impl CrossValidation {
    pub fn consistent(&self) -> bool {
        self.search_succeeded && self.mismatched_keys.is_empty()
    }
}

/// Checks that the decoder's output for every reachable key lies in that key's
/// correction-set intersection, and that the rule search agrees a rule exists.
pub fn cross_validate(circuit: &FlagCircuit) -> Result<CrossValidation> {
    require_modified(circuit)?;
    let t = circuit.params().t();
    let run = search_with_t(circuit, t)?;
    let dict = &run.dictionary;
    let mut mismatched = Vec::new();
    for (key, list) in &dict.entries {
        let pattern = group_rounds(circuit, &key.0)?;
        let ok = match decode(&pattern, circuit.params()) {
            Ok((correction, _)) => list.iter().all(|e| {
                CorrectionSet::new(&e.result, dict.catalog.budget(&e.combo)).contains(&correction)
            }),
            Err(Error::NoStartRun { .. }) => false,
            Err(e) => return Err(e),
        };
        if !ok {
            mismatched.push(key.clone());
        }
    }
    Ok(CrossValidation {
        search_succeeded: matches!(run.outcome, SearchOutcome::Success(_)),
        keys_checked: dict.len(),
        combos_checked: dict.combos,
        mismatched_keys: mismatched,
    })
}

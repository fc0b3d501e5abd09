//! Plain-text verification reports and counterexample replay.
//!
//! A report is a list of `key value` lines in a fixed order, followed by the
//! verified circuit with every line prefixed by `circuit `, so a report can be
//! replayed without the original circuit file.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use crate::bits::BitString;
use crate::circuit::FlagCircuit;
use crate::decoder::decode_outcomes;
use crate::error::{Error, Result};
use crate::fault::{propagate_faults, residual_weight, FaultCombo};
use crate::text::{emit_circuit, parse_circuit};
use crate::verify::{
    CorrectionSet, Counterexample, DecoderViolation, FlagKey, FtReport, RuleTable, SearchFailure,
    Verdict, VerifyMode, EXPLICIT_SEARCH_MAX_W,
};

pub const REPORT_MAGIC: &str = "flagft-report 1";

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Report {
    pub ft: FtReport,
    pub circuit: FlagCircuit,
}

fn opt_bits(b: &Option<BitString>) -> String {
    b.as_ref().map_or("none".to_string(), BitString::to_string)
}

fn opt_usize(v: Option<usize>) -> String {
    v.map_or("none".to_string(), |v| v.to_string())
}

pub fn emit_report(report: &Report) -> String {
    let ft = &report.ft;
    let mut out = String::new();
    writeln!(out, "{REPORT_MAGIC}").unwrap();
    writeln!(out, "mode {}", ft.mode.name()).unwrap();
    writeln!(out, "t {}", ft.t).unwrap();
    writeln!(out, "verdict {}", ft.verdict.name()).unwrap();
    for (k, v) in &ft.stats {
        writeln!(out, "stat {k} {v}").unwrap();
    }
    match &ft.counterexample {
        Some(Counterexample::Decoder(v)) => {
            writeln!(out, "counterexample combo {}", v.combo.descriptor()).unwrap();
            writeln!(out, "counterexample flags {}", v.flags).unwrap();
            writeln!(out, "counterexample error {}", v.error).unwrap();
            writeln!(out, "counterexample unknown {}", v.unknown).unwrap();
            writeln!(out, "counterexample budget {}", v.budget).unwrap();
            writeln!(out, "counterexample correction {}", opt_bits(&v.correction)).unwrap();
            writeln!(out, "counterexample residual {}", opt_usize(v.residual)).unwrap();
        }
        Some(Counterexample::Search(f)) => {
            writeln!(out, "counterexample key {}", f.key).unwrap();
            writeln!(out, "counterexample exhaustive {}", f.exhaustive).unwrap();
            for combo in &f.combos {
                writeln!(out, "counterexample combo {}", combo.descriptor()).unwrap();
            }
        }
        None => {}
    }
    if let Some(table) = &ft.rules {
        for (key, correction) in &table.rules {
            writeln!(out, "rule {key} {correction}").unwrap();
        }
    }
    for line in emit_circuit(&report.circuit).lines() {
        writeln!(out, "circuit {line}").unwrap();
    }
    out
}

fn perr(line: usize, message: impl Into<String>) -> Error {
    Error::Parse {
        line,
        message: message.into(),
    }
}

pub fn parse_report(text: &str) -> Result<Report> {
    let mut lines = text.lines().enumerate().map(|(i, l)| (i + 1, l));
    match lines.next() {
        Some((_, l)) if l.trim() == REPORT_MAGIC => {}
        _ => return Err(perr(1, format!("expected `{REPORT_MAGIC}`"))),
    }

    let mut mode = None;
    let mut t = None;
    let mut verdict = None;
    let mut stats = BTreeMap::new();
    let mut cx: BTreeMap<&str, String> = BTreeMap::new();
    let mut cx_combos: Vec<(usize, String)> = Vec::new();
    let mut rules: Vec<(usize, &str, &str)> = Vec::new();
    let mut circuit_text = String::new();

    for (n, line) in lines {
        if let Some(rest) = line.strip_prefix("circuit ") {
            circuit_text.push_str(rest);
            circuit_text.push('\n');
            continue;
        }
        let tokens: Vec<&str> = line.split_whitespace().collect();
        match tokens.as_slice() {
            [] => {}
            ["mode", m] => {
                mode = Some(VerifyMode::from_name(m).ok_or_else(|| perr(n, "unknown mode"))?)
            }
            ["t", v] => t = Some(v.parse().map_err(|_| perr(n, "bad t"))?),
            ["verdict", "pass"] => verdict = Some(Verdict::Pass),
            ["verdict", "fail"] => verdict = Some(Verdict::Fail),
            ["stat", k, v] => {
                stats.insert(
                    k.to_string(),
                    v.parse().map_err(|_| perr(n, "bad stat value"))?,
                );
            }
            ["counterexample", "combo", c] => cx_combos.push((n, c.to_string())),
            ["counterexample", k, v] => {
                cx.insert(k, v.to_string());
            }
            ["rule", key, correction] => rules.push((n, key, correction)),
            _ => return Err(perr(n, format!("unrecognised report line {line:?}"))),
        }
    }

    let mode = mode.ok_or_else(|| perr(0, "report missing mode"))?;
    let t = t.ok_or_else(|| perr(0, "report missing t"))?;
    let verdict = verdict.ok_or_else(|| perr(0, "report missing verdict"))?;
    let circuit = parse_circuit(&circuit_text)?;

    let bits = |key: &str| -> Result<BitString> {
        cx.get(key)
            .ok_or_else(|| perr(0, format!("counterexample missing {key}")))?
            .parse()
            .map_err(|_| perr(0, format!("counterexample {key} is not a bit string")))
    };
    let combos = cx_combos
        .iter()
        .map(|(n, c)| FaultCombo::from_descriptor(&circuit, c).map_err(|e| perr(*n, e.to_string())))
        .collect::<Result<Vec<_>>>()?;

    let counterexample = match (verdict, mode) {
        (Verdict::Pass, _) => None,
        (Verdict::Fail, VerifyMode::Decoder) => {
            let combo = combos
                .into_iter()
                .next()
                .ok_or_else(|| perr(0, "counterexample missing combo"))?;
            let number = |key: &str| -> Result<Option<usize>> {
                match cx.get(key).map(String::as_str) {
                    Some("none") => Ok(None),
                    Some(v) => v
                        .parse()
                        .map(Some)
                        .map_err(|_| perr(0, format!("counterexample {key} is not a number"))),
                    None => Err(perr(0, format!("counterexample missing {key}"))),
                }
            };
            Some(Counterexample::Decoder(DecoderViolation {
                combo,
                flags: bits("flags")?,
                error: bits("error")?,
                unknown: bits("unknown")?,
                budget: number("budget")?.ok_or_else(|| perr(0, "budget cannot be none"))?,
                correction: match cx.get("correction").map(String::as_str) {
                    Some("none") => None,
                    _ => Some(bits("correction")?),
                },
                residual: number("residual")?,
            }))
        }
        (Verdict::Fail, VerifyMode::Search) => Some(Counterexample::Search(SearchFailure {
            key: FlagKey(bits("key")?),
            combos,
            exhaustive: cx.get("exhaustive").map(String::as_str) == Some("true"),
        })),
    };

    let rules = if rules.is_empty() && !(mode == VerifyMode::Search && verdict == Verdict::Pass) {
        None
    } else {
        let mut table = BTreeMap::new();
        for (n, key, correction) in rules {
            let key: BitString = key.parse().map_err(|_| perr(n, "bad rule key"))?;
            let correction: BitString = correction
                .parse()
                .map_err(|_| perr(n, "bad rule correction"))?;
            table.insert(FlagKey(key), correction);
        }
        Some(RuleTable {
            w: circuit.w(),
            rules: table,
        })
    };

    Ok(Report {
        ft: FtReport {
            mode,
            t,
            verdict,
            counterexample,
            stats,
            rules,
        },
        circuit,
    })
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ReplayOutcome {
    /// Pass reports carry no counterexample.
    NothingToReplay,
    Reproduced(String),
    /// The recomputed values differ from the recorded ones.
    Mismatch(String),
}

/// Re-executes a report's counterexample against its embedded circuit.
pub fn replay(report: &Report) -> Result<ReplayOutcome> {
    let circuit = &report.circuit;
    match &report.ft.counterexample {
        None => Ok(ReplayOutcome::NothingToReplay),
        Some(Counterexample::Decoder(v)) => {
            let result = propagate_faults(circuit, &v.combo)?;
            let mut diffs = Vec::new();
            if result.flags != v.flags {
                diffs.push(format!("flags {} != recorded {}", result.flags, v.flags));
            }
            if result.data_x != v.error {
                diffs.push(format!("error {} != recorded {}", result.data_x, v.error));
            }
            if result.unknown != v.unknown {
                diffs.push(format!(
                    "unknown {} != recorded {}",
                    result.unknown, v.unknown
                ));
            }
            if v.combo.budget() != v.budget {
                diffs.push(format!(
                    "budget {} != recorded {}",
                    v.combo.budget(),
                    v.budget
                ));
            }
            let (correction, residual) = match decode_outcomes(circuit, &result.flags) {
                Ok((c, _)) => {
                    let r = residual_weight(&result.data_x, &c, &result.unknown);
                    (Some(c), Some(r))
                }
                Err(Error::NoStartRun { .. }) => (None, None),
                Err(e) => return Err(e),
            };
            if correction != v.correction {
                diffs.push(format!(
                    "correction {} != recorded {}",
                    opt_bits(&correction),
                    opt_bits(&v.correction)
                ));
            }
            if residual != v.residual {
                diffs.push(format!(
                    "residual {} != recorded {}",
                    opt_usize(residual),
                    opt_usize(v.residual)
                ));
            }
            let violates = residual.is_none_or(|r| r > v.combo.budget());
            if !violates {
                diffs.push("replayed combo does not violate its budget".to_string());
            }
            Ok(if diffs.is_empty() {
                ReplayOutcome::Reproduced(format!(
                    "combo {} leaves residual {} over budget {}",
                    v.combo.descriptor(),
                    opt_usize(residual),
                    v.budget
                ))
            } else {
                ReplayOutcome::Mismatch(diffs.join("; "))
            })
        }
        Some(Counterexample::Search(f)) => {
            let mut sets = Vec::new();
            for combo in &f.combos {
                let result = propagate_faults(circuit, combo)?;
                if result.flags != f.key.0 {
                    return Ok(ReplayOutcome::Mismatch(format!(
                        "combo {} produces key {} not {}",
                        combo.descriptor(),
                        result.flags,
                        f.key
                    )));
                }
                sets.push(CorrectionSet::new(&result, combo.budget()));
            }
            let w = circuit.w();
            if w > EXPLICIT_SEARCH_MAX_W {
                return Ok(ReplayOutcome::Mismatch(format!(
                    "w={w} is too wide to re-check emptiness exhaustively"
                )));
            }
            let common = (0..1u64 << w)
                .map(|c| BitString::from_u64(w, c))
                .find(|c| sets.iter().all(|s| s.contains(c)));
            Ok(match common {
                None => ReplayOutcome::Reproduced(format!(
                    "{} combos share key {} and admit no common correction",
                    f.combos.len(),
                    f.key
                )),
                Some(c) => ReplayOutcome::Mismatch(format!("correction {c} satisfies every combo")),
            })
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::builder::build_circuit;
    use crate::circuit::{SchemeKind, SchemeParams};
    use crate::verify::{check_decoder_ft, run_search};

    fn circuit(kind: SchemeKind, w: usize, d: usize) -> FlagCircuit {
        build_circuit(SchemeParams::new(kind, w, d).unwrap()).unwrap()
    }

    #[test]
    fn search_failure_report_round_trips_and_replays() {
        let c = circuit(SchemeKind::Bare, 4, 3);
        let ft = run_search(&c, 1).unwrap();
        assert_eq!(ft.verdict, Verdict::Fail);
        let report = Report { ft, circuit: c };
        let text = emit_report(&report);
        let parsed = parse_report(&text).unwrap();
        assert_eq!(parsed, report);
        assert_eq!(emit_report(&parsed), text);
        assert!(matches!(
            replay(&parsed).unwrap(),
            ReplayOutcome::Reproduced(_)
        ));
    }

    #[test]
    fn pass_report_replay_is_a_no_op() {
        let c = circuit(SchemeKind::Modified, 2, 3);
        let report = Report {
            ft: check_decoder_ft(&c, 1).unwrap(),
            circuit: c,
        };
        let parsed = parse_report(&emit_report(&report)).unwrap();
        assert_eq!(parsed, report);
        assert_eq!(replay(&parsed).unwrap(), ReplayOutcome::NothingToReplay);
    }

    #[test]
    fn search_success_carries_rules() {
        let c = circuit(SchemeKind::Conjecture, 3, 3);
        let report = Report {
            ft: run_search(&c, 1).unwrap(),
            circuit: c,
        };
        let parsed = parse_report(&emit_report(&report)).unwrap();
        assert_eq!(parsed.ft.rules, report.ft.rules);
        assert!(parsed.ft.rules.unwrap().len() > 1);
    }

    #[test]
    fn tampered_counterexample_is_a_mismatch() {
        let c = circuit(SchemeKind::Bare, 4, 3);
        let text = emit_report(&Report {
            ft: run_search(&c, 1).unwrap(),
            circuit: c,
        });
        // Swap in a combo that produces the right key but is consistent with zero correction.
        let tampered: String = text
            .lines()
            .filter(|l| !l.starts_with("counterexample combo"))
            .map(|l| {
                if l.starts_with("counterexample exhaustive") {
                    format!("{l}\ncounterexample combo -")
                } else {
                    l.to_string()
                }
            })
            .collect::<Vec<_>>()
            .join("\n");
        let parsed = parse_report(&tampered).unwrap();
        assert!(matches!(
            replay(&parsed).unwrap(),
            ReplayOutcome::Mismatch(_)
        ));
    }

    #[test]
    fn bad_reports_are_rejected() {
        assert!(parse_report("").is_err());
        assert!(parse_report("flagft-report 1\nmode nope\n").is_err());
        assert!(parse_report("flagft-report 1\nmode search\nt 1\nverdict pass\n").is_err());
    }
}

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{anyhow, Context, Result};
use clap::{Parser, Subcommand, ValueEnum};
use flagft::{
    build_circuit, check_decoder_ft, decode_outcomes, emit_circuit, emit_report,
    fault_count_lower_bound, parse_circuit, parse_report, replay, run_search, BitString,
    FlagCircuit, ReplayOutcome, Report, SchemeKind, SchemeParams,
};

#[derive(Parser)]
#[command(
    name = "flagft",
    version,
    about = "Flag fault-tolerant syndrome extraction circuits"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum Scheme {
    Conjecture,
    Modified,
    Optimized,
    Bare,
}

impl From<Scheme> for SchemeKind {
    fn from(s: Scheme) -> Self {
        match s {
            Scheme::Conjecture => SchemeKind::Conjecture,
            Scheme::Modified => SchemeKind::Modified,
            Scheme::Optimized => SchemeKind::Optimized,
            Scheme::Bare => SchemeKind::Bare,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum Mode {
    /// Run the round-by-round decoder on every combo (modified scheme only).
    Decoder,
    /// Search for a flag-pattern correction table.
    Search,
}

#[derive(Subcommand)]
enum Command {
    /// Build a circuit and write it in text form.
    Build {
        #[arg(long)]
        w: usize,
        #[arg(long)]
        d: usize,
        #[arg(long, value_enum)]
        scheme: Scheme,
        /// Output file; stdout when omitted.
        #[arg(long, short)]
        output: Option<PathBuf>,
    },
    /// Check fault tolerance; exits 0 on pass and 1 on failure.
    Verify {
        circuit: PathBuf,
        #[arg(long, value_enum, default_value = "decoder")]
        mode: Mode,
        /// Fault count to check; defaults to (d-1)/2.
        #[arg(long)]
        t: Option<usize>,
        /// Report file; stdout when omitted.
        #[arg(long)]
        report: Option<PathBuf>,
        /// Worker threads.
        #[arg(long, env = "FLAGFT_JOBS")]
        jobs: Option<usize>,
    },
    /// Decode a flag-outcome string given in measurement order.
    Decode { circuit: PathBuf, outcomes: String },
    /// Re-execute the counterexample stored in a report.
    Replay { report: PathBuf },
}

fn read(path: &Path) -> Result<String> {
    fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))
}

fn write_or_print(path: Option<&Path>, text: &str) -> Result<()> {
    match path {
        Some(p) => fs::write(p, text).with_context(|| format!("writing {}", p.display())),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn load_circuit(path: &Path) -> Result<FlagCircuit> {
    parse_circuit(&read(path)?).with_context(|| format!("parsing {}", path.display()))
}

fn run(cli: Cli) -> Result<ExitCode> {
    match cli.command {
        Command::Build {
            w,
            d,
            scheme,
            output,
        } => {
            let circuit = build_circuit(SchemeParams::new(scheme.into(), w, d)?)?;
            write_or_print(output.as_deref(), &emit_circuit(&circuit))?;
            Ok(ExitCode::SUCCESS)
        }
        Command::Verify {
            circuit,
            mode,
            t,
            report,
            jobs,
        } => {
            if let Some(jobs) = jobs {
                rayon::ThreadPoolBuilder::new()
                    .num_threads(jobs)
                    .build_global()
                    .context("configuring worker threads")?;
            }
            let circuit = load_circuit(&circuit)?;
            let t = t.unwrap_or(circuit.params().t());
            let ft = match mode {
                Mode::Decoder => check_decoder_ft(&circuit, t)?,
                Mode::Search => run_search(&circuit, t)?,
            };
            let passed = ft.passed();
            let text = emit_report(&Report { ft, circuit });
            write_or_print(report.as_deref(), &text)?;
            if report.is_some() {
                println!("{}", if passed { "pass" } else { "fail" });
            }
            Ok(if passed {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(1)
            })
        }
        Command::Decode { circuit, outcomes } => {
            let circuit = load_circuit(&circuit)?;
            let raw: BitString = outcomes
                .trim()
                .parse()
                .map_err(|e| anyhow!("bad outcome string: {e}"))?;
            let (correction, trace) = decode_outcomes(&circuit, &raw)?;
            println!("correction {correction}");
            println!("start {}", trace.start);
            match (trace.omega, &trace.epsilon) {
                (Some(o), Some(e)) => println!("omega {o} epsilon {e}"),
                _ => println!("omega none"),
            }
            println!("corner_fix {}", trace.corner_fix_applied);
            let triggered: Vec<String> = trace.triggered.iter().map(|i| i.to_string()).collect();
            println!(
                "triggered {}",
                if triggered.is_empty() {
                    "-".to_string()
                } else {
                    triggered.join(",")
                }
            );
            println!("lower_bound {}", fault_count_lower_bound(&trace));
            for (i, word) in trace.effective_rounds.iter().enumerate() {
                println!("round {} f {} m {}", i + 1, word, trace.accumulator(i + 1));
            }
            Ok(ExitCode::SUCCESS)
        }
        Command::Replay { report } => {
            let report = parse_report(&read(&report)?)
                .with_context(|| format!("parsing {}", report.display()))?;
            Ok(match replay(&report)? {
                ReplayOutcome::NothingToReplay => {
                    println!("pass report, nothing to replay");
                    ExitCode::SUCCESS
                }
                ReplayOutcome::Reproduced(msg) => {
                    println!("reproduced: {msg}");
                    ExitCode::SUCCESS
                }
                ReplayOutcome::Mismatch(msg) => {
                    println!("mismatch: {msg}");
                    ExitCode::from(1)
                }
            })
        }
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}

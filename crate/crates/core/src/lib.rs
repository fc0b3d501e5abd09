//! Flag fault-tolerant syndrome extraction for weight-`w` X stabilizers.
//!
//! Builds flagged measurement circuits, decodes their flag outcomes and
//! checks fault tolerance by exhaustive enumeration of fault combinations.

pub mod bits;
pub mod builder;
pub mod circuit;
pub mod decoder;
pub mod error;
pub mod fault;
pub mod pauli;
pub mod report;
pub mod text;
pub mod verify;

pub use bits::BitString;
pub use builder::{
    build_bare_circuit, build_circuit, build_conjecture_circuit, build_modified_circuit,
    build_optimized_circuit, validate_round_structure, RoundDiagnostics,
};
pub use circuit::{
    ElementaryOp, FlagCircuit, FlagMeasurement, QubitRole, SchemeKind, SchemeParams,
};
pub use decoder::{decode, decode_outcomes, fault_count_lower_bound, DecoderTrace, FlagPattern};
pub use error::{Error, Result};
pub use fault::{
    classify_fault, enumerate_fault_sites, propagate_faults, residual_weight, FaultClass,
    FaultCombo, FaultSite, PropagationResult, SiteCatalog, SiteKind,
};
pub use pauli::{Pauli, PauliMask};
pub use report::{emit_report, parse_report, replay, ReplayOutcome, Report};
pub use text::{emit_circuit, parse_circuit};
pub use verify::{
    check_decoder_ft, collect_flag_dictionary, cross_validate, run_search, search_correction_rules,
    Counterexample, FtReport, RuleTable, Verdict, VerifyMode,
};

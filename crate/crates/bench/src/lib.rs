//! Shared fixtures for the benchmarks.

use flagft::{build_circuit, FlagCircuit, SchemeKind, SchemeParams};

pub fn fixture(kind: SchemeKind, w: usize, d: usize) -> FlagCircuit {
    build_circuit(SchemeParams::new(kind, w, d).expect("valid fixture parameters"))
        .expect("fixture builds")
}

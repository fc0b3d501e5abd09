use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("distance must be odd, got d={0}")]
    EvenDistance(usize),
    #[error("distance must be at least 3, got d={0}")]
    DistanceTooSmall(usize),
    #[error("stabilizer weight must be at least 1")]
    ZeroWeight,
    #[error("optimized scheme needs w >= 2(d-1) = {min}, got w={w}")]
    WeightTooSmallForRamp { w: usize, min: usize },

    #[error("qubit index {qubit} outside a circuit of {count} qubits")]
    QubitOutOfRange { qubit: usize, count: usize },
    #[error("malformed circuit at op {time}: {message}")]
    Structure { time: usize, message: String },
    #[error("pauli frame width {got} does not match circuit width {expected}")]
    FrameWidth { expected: usize, got: usize },
    #[error("fault site does not fit the circuit: {0}")]
    BadSite(String),

    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("expected {expected} flag outcomes, got {got}")]
    OutcomeCount { expected: usize, got: usize },
    #[error("decoder needs {expected} flags in every round, round {round} has {got}")]
    RoundWidth {
        round: usize,
        expected: usize,
        got: usize,
    },
    #[error("decoder requires a modified-scheme circuit")]
    NotModifiedScheme,
    #[error(
        "no run of {t} trivial rounds inside the {dummy} dummy rounds; more than t faults occurred"
    )]
    NoStartRun { t: usize, dummy: usize },

    #[error("builder bug: {0}")]
    BuilderBug(String),
}

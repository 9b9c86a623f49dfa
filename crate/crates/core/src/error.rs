use thiserror::Error;

/// Every failure the library can report.
///
/// Budget guards (enumeration limits, result-size limits, precision ceilings)
/// are kept apart from domain errors so that callers can map them to a
/// separate exit status; see [`MisError::is_budget`].
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum MisError {
    #[error("invalid spec: {field}: {reason}")]
    InvalidSpec { field: String, reason: String },

    #[error("parse error at line {line}, column {column}: {message}")]
    Parse {
        line: usize,
        column: usize,
        message: String,
    },

    #[error("transition matrix is reducible")]
    ReducibleMatrix,

    #[error("subshift is not irreducible; region counting needs every symbol to have a predecessor and a successor")]
    NotIrreducible,

    #[error("subshift is not mixing (period {period})")]
    NotMixing { period: usize },

    #[error("Perron iteration did not converge after {iterations} steps")]
    NonConvergence { iterations: usize },

    #[error("point {point:?} lies outside the box")]
    OutOfBox { point: Vec<u64> },

    #[error("box too large for enumeration: {size} > {limit}")]
    BoxTooLarge { size: String, limit: String },

    #[error("exact result would need about {bits} bits (limit {limit})")]
    ResultTooLarge { bits: u64, limit: u64 },

    #[error("speed ratio is zero; use the topological entropy directly")]
    ZeroTau,

    #[error("speed ratio 1 leaves an empty boundary region")]
    DegenerateRegion,

    #[error("speed slopes cannot be placed in a common level band: {0}")]
    DegenerateSpeed(String),

    #[error("target {target} outside admissible range [{low}, {high}]")]
    TargetOutOfRange {
        target: String,
        low: String,
        high: String,
    },

    #[error("threshold sequence not decreasing at k = {k}")]
    NonMonotoneThresholds { k: u32 },

    #[error("strip has no admissible cross-section")]
    EmptyStates,

    #[error("no bi-infinite strip exists (transition graph has no cycle)")]
    EmptyLanguage,

    #[error("bad weights: {0}")]
    BadWeights(String),

    #[error("the two strip rates coincide but the target differs from them")]
    DegenerateInterval,

    #[error("instance too large: {0}")]
    TooLarge(String),

    #[error("precision {needed} bits exceeds ceiling {limit}")]
    PrecisionBudgetExceeded { needed: u64, limit: u64 },

    #[error("i/o error: {0}")]
    Io(String),
}

impl MisError {
    /// Stable machine-readable identifier, used in JSON error reports.
    pub fn code(&self) -> &'static str {
        match self {
            MisError::InvalidSpec { .. } => "invalid_spec",
            MisError::Parse { .. } => "parse_error",
            MisError::ReducibleMatrix => "reducible_matrix",
            MisError::NotIrreducible => "not_irreducible",
            MisError::NotMixing { .. } => "not_mixing",
            MisError::NonConvergence { .. } => "non_convergence",
            MisError::OutOfBox { .. } => "out_of_box",
            MisError::BoxTooLarge { .. } => "box_too_large",
            MisError::ResultTooLarge { .. } => "result_too_large",
            MisError::ZeroTau => "zero_tau",
            MisError::DegenerateRegion => "degenerate_region",
            MisError::DegenerateSpeed(_) => "degenerate_speed",
            MisError::TargetOutOfRange { .. } => "target_out_of_range",
            MisError::NonMonotoneThresholds { .. } => "non_monotone_thresholds",
            MisError::EmptyStates => "empty_states",
            MisError::EmptyLanguage => "empty_language",
            MisError::BadWeights(_) => "bad_weights",
            MisError::DegenerateInterval => "degenerate_interval",
            MisError::TooLarge(_) => "too_large",
            MisError::PrecisionBudgetExceeded { .. } => "precision_budget_exceeded",
            MisError::Io(_) => "io_error",
        }
    }

    pub fn is_budget(&self) -> bool {
        matches!(
            self,
            MisError::BoxTooLarge { .. }
                | MisError::ResultTooLarge { .. }
                | MisError::TooLarge(_)
                | MisError::PrecisionBudgetExceeded { .. }
        )
    }

    pub(crate) fn invalid(field: impl Into<String>, reason: impl Into<String>) -> Self {
        MisError::InvalidSpec {
            field: field.into(),
            reason: reason.into(),
        }
    }
}

pub type Result<T> = std::result::Result<T, MisError>;

/// Explicit guards that keep brute-force paths and precision growth bounded.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Budgets {
    /// Maximum number of configurations visited by exhaustive oracles.
    pub configurations: u64,
    /// Maximum number of lattice points visited by histogram enumeration.
    pub lattice_points: u64,
    /// Maximum size, in bits, of an exact pattern count.
    pub result_bits: u64,
    /// Ceiling on working precision for high-precision evaluation.
    pub precision_bits: u64,
    /// Maximum number of row states in 2-D transfer computations.
    pub row_states: u64,
}

pub const MAX_CONFIGURATIONS: u64 = 1 << 24;
pub const MAX_LATTICE_POINTS: u64 = 10_000_000;
pub const MAX_RESULT_BITS: u64 = 10_000_000;
pub const MAX_PRECISION_BITS: u64 = 1 << 15;
pub const MAX_ROW_STATES: u64 = 1 << 16;

impl Default for Budgets {
    fn default() -> Self {
        Budgets {
            configurations: MAX_CONFIGURATIONS,
            lattice_points: MAX_LATTICE_POINTS,
            result_bits: MAX_RESULT_BITS,
            precision_bits: MAX_PRECISION_BITS,
            row_states: MAX_ROW_STATES,
        }
    }
}

impl Budgets {
    pub fn unlimited() -> Self {
        Budgets {
            configurations: u64::MAX,
            lattice_points: u64::MAX,
            result_bits: u64::MAX,
            precision_bits: u64::MAX,
            row_states: u64::MAX,
        }
    }
}

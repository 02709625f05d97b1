use thiserror::Error;

/// Hypotheses on the coefficient pair that gate the different pipelines.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Hypothesis {
    /// `a`, `b` continuous on `[0,1]` and `b/a` integrable.
    Basic,
    /// `a(0) = 0`, `a > 0` on `(0,1]`, `x^K/a` nondecreasing near 0.
    Ass0,
    /// `a` weakly or strongly degenerate; `x b / a` bounded when `K > 1`.
    Ass1,
    /// Drift smallness: `(2-K) a - 2 x |b| >= eps0 a` with `eps0 > 0`.
    Ass2,
}

impl std::fmt::Display for Hypothesis {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Hypothesis::Basic => write!(f, "basic hypothesis (continuity, b/a integrable)"),
            Hypothesis::Ass0 => write!(f, "Ass0 (x^K/a nondecreasing near 0)"),
            Hypothesis::Ass1 => write!(f, "Ass1 (WD/SD, x b/a bounded when K > 1)"),
            Hypothesis::Ass2 => write!(f, "Ass2 (drift smallness, eps0 > 0)"),
        }
    }
}

#[derive(Debug, Error)]
pub enum Error {
    #[error("coefficient a is not positive at x = {x:e} (a = {value:e})")]
    NonPositiveCoefficient { x: f64, value: f64 },
    #[error("coefficient evaluation failed at x = {x:e}: {what}")]
    EvaluationFailure { x: f64, what: String },
    #[error("degeneracy supremum x|a'|/a diverges under refinement (last value {last:e})")]
    DivergentSupremum { last: f64 },
    #[error("non-integrable drift: b/a is not integrable near 0 (Cauchy tail test failed)")]
    NonIntegrableDrift,
    #[error("singular mass: the 1/sigma integral on the first element diverges")]
    SingularMass,
    #[error("bad mesh grading exponent {0} (must be >= 1)")]
    BadGrading(f64),
    #[error("bad mesh: {0}")]
    BadMesh(String),
    #[error("assembly failure: {0}")]
    AssemblyFailure(String),
    #[error("factorization failure: matrix is not positive definite (pivot {pivot} = {value:e})")]
    FactorizationFailure { pivot: usize, value: f64 },
    #[error("linear solve failure: {0}")]
    SolveFailure(String),
    #[error("eigenvalue computation failed: {0}")]
    EigenFailure(String),
    #[error("non-finite state at step {step}")]
    NonFiniteState { step: usize },
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("hypothesis violated: {}", format_violations(.0))]
    HypothesisViolation(Vec<(Hypothesis, String)>),
    #[error("bad delta {delta:e}: must lie in (0, {upper:e})")]
    BadDelta { delta: f64, upper: f64 },
    #[error("degenerate fit: {0}")]
    DegenerateFit(String),
    #[error("energy has not decayed: E(T)/E(0) = {ratio:e} >= 0.01")]
    NotDecayed { ratio: f64 },
    #[error("insufficient snapshots: {0}")]
    InsufficientSnapshots(String),
    #[error("invalid input: {0}")]
    InvalidInput(String),
}

fn format_violations(v: &[(Hypothesis, String)]) -> String {
    v.iter()
        .map(|(h, detail)| format!("{h}: {detail}"))
        .collect::<Vec<_>>()
        .join("; ")
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

use thiserror::Error;

/// Errors raised by the pricing engine.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("no admissible exponential-moment order: even c -> 0+ violates the jump-MGF bound")]
    NoAdmissibleC,

    #[error("assumption violated: {0}")]
    AssumptionViolated(String),

    #[error("measure shift |a| = {a} is outside the admissible range (a_max = {a_max})")]
    ShiftOutOfRange { a: f64, a_max: f64 },

    #[error("singular measure shift: kappa_a = {kappa_a} coincides with beta - alpha = {gap}")]
    SingularShift { kappa_a: f64, gap: f64 },

    #[error("argument outside the domain: {0}")]
    DomainViolation(String),

    #[error("degenerate denominator in closed-form G at t = {t}")]
    DegenerateDenominator { t: f64 },

    #[error("ODE step size underflow at s = {s} (h = {h})")]
    StepSizeUnderflow { s: f64, h: f64 },

    #[error("Re H = {re_h} exceeded the explosion guard {guard} at t = {t}")]
    ExplosionGuard { t: f64, re_h: f64, guard: f64 },

    #[error("time {t} outside the solved grid [0, {horizon}]")]
    OutOfGrid { t: f64, horizon: f64 },

    #[error("element {index}: {source}")]
    AtIndex {
        index: usize,
        #[source]
        source: Box<Error>,
    },

    #[error("negative VIX^2 radicand {0}")]
    NegativeVixSquared(f64),

    #[error("quadrature did not converge: {0}")]
    QuadratureNotConverged(String),

    #[error("simulation scheme unavailable: {0}")]
    SchemeUnavailable(String),
}

pub type Result<T> = std::result::Result<T, Error>;

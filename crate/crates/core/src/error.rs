use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("matrix is not Hermitian (deviation {deviation:.3e})")]
    NotHermitian { deviation: f64 },

    #[error("Hamiltonian is degenerate (gap {gap:.3e}); no allowed transition")]
    Degenerate { gap: f64 },

    #[error("density matrix trace is {trace}, expected 1")]
    TraceViolation { trace: f64 },

    #[error("density matrix has eigenvalue {min_eigenvalue:.3e} below -{tolerance:.1e}")]
    NotPositive { min_eigenvalue: f64, tolerance: f64 },

    #[error("{name} = {value} is outside {allowed}")]
    OutOfRange {
        name: &'static str,
        value: f64,
        allowed: &'static str,
    },

    #[error("population {0} gives an infinite inverse temperature")]
    InfiniteBeta(f64),

    #[error("invalid parameters: {0}")]
    InvalidParams(String),

    #[error("bosonic occupation diverges at omega = {omega} (beta*(omega - mu) <= 0)")]
    BosonicPole { omega: f64 },

    #[error("quadrature did not converge at t = {t} ms (error estimate {estimate:.3e})")]
    QuadratureNonConvergence { t: f64, estimate: f64 },

    #[error("ODE step size underflow at t = {t} ms")]
    StepSizeUnderflow { t: f64 },

    #[error("time {t} ms is outside the sampled window [{start}, {end}] ms")]
    OutsideGrid { t: f64, start: f64, end: f64 },

    #[error("invalid time grid: {0}")]
    InvalidGrid(String),

    #[error("internal consistency check failed: {0}")]
    Consistency(String),
}

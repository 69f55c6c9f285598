use thiserror::Error;

/// Errors raised by the library.
///
/// Validation problems (bad quantum numbers, regulator out of range, malformed
/// input files) are distinguished from numerical failures so front ends can map
/// them onto different exit codes.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("regulator eta = {0} outside the open interval (0, 1)")]
    RegulatorOutOfRange(f64),
    #[error("length scale a = {0} must be positive and finite")]
    InvalidLengthScale(f64),
    #[error("nonlinearity scale L must be nonzero and finite (got {0})")]
    InvalidNonlinearityScale(f64),
    #[error("invalid quantum numbers: {0}")]
    InvalidQuantumNumbers(String),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("config error: {0}")]
    Config(String),
    #[error("regulator failure at x = {x}: density and shifted denominators vanish together")]
    RegulatorFailure { x: f64 },
    #[error("removable singularity at x = {x}: density vanishes, use the node-safe path")]
    RemovableSingularity { x: f64 },
    #[error("quadrature did not converge after {subdivisions} subdivisions (best {best:e} +- {err:e})")]
    NonConvergence { best: f64, err: f64, subdivisions: usize },
    #[error("Hermite root polishing moved a root by {shift:e} (n = {n})")]
    RootPolish { n: u32, shift: f64 },
    #[error("no sign change of the shift over eta in [{lo}, {hi}]")]
    NoSignChange { lo: f64, hi: f64 },
    #[error("Monte Carlo estimate not accurate enough: std error {std_error:e} exceeds {requested:e}")]
    McTolerance { std_error: f64, requested: f64 },
    #[error("degenerate fit: {0}")]
    DegenerateFit(String),
    #[error("operation requires {0}")]
    Precondition(String),
    #[error("{0}")]
    RowFailed(String),
    #[error("io: {0}")]
    Io(String),
}

impl Error {
    /// True for errors caused by bad user input rather than numerical trouble.
    pub fn is_validation(&self) -> bool {
        matches!(
            self,
            Error::RegulatorOutOfRange(_)
                | Error::InvalidLengthScale(_)
                | Error::InvalidNonlinearityScale(_)
                | Error::InvalidQuantumNumbers(_)
                | Error::InvalidArgument(_)
                | Error::Config(_)
                | Error::Precondition(_)
                | Error::DegenerateFit(_)
                | Error::Io(_)
        )
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;

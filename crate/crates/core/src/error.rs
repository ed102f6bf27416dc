use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("non-finite value at index {index}")]
    NonFinite { index: usize },

    #[error("grid function length {got} does not match grid size {expected}")]
    LengthMismatch { expected: usize, got: usize },

    #[error("solution became non-finite at step {step} (t = {t})")]
    Unstable { step: usize, t: f64 },

    #[error("query point (t = {t}, x = {x}) lies outside the reconstruction slab")]
    OutOfSlab { t: f64, x: f64 },

    #[error("config error{}: {message}", at_line(.line))]
    Config { line: Option<usize>, message: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

fn at_line(line: &Option<usize>) -> String {
    line.map(|l| format!(" at line {l}")).unwrap_or_default()
}

impl Error {
    pub(crate) fn config(line: Option<usize>, message: impl Into<String>) -> Self {
        Error::Config {
            line,
            message: message.into(),
        }
    }
}

/// A time loop that stopped early, carrying the last state that was still
/// finite.
#[derive(Debug)]
pub struct Aborted<S> {
    pub step: usize,
    pub t: f64,
    pub last_good: S,
}

impl<S> std::fmt::Display for Aborted<S> {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(
            f,
            "run aborted: solution became non-finite at step {} (t = {})",
            self.step, self.t
        )
    }
}

impl<S: std::fmt::Debug> std::error::Error for Aborted<S> {}

/// Failure of a whole run: bad inputs before the first step, or an
/// instability part way through.
#[derive(Debug)]
pub enum RunError<S> {
    Setup(Error),
    Unstable(Aborted<S>),
}

impl<S> std::fmt::Display for RunError<S> {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            RunError::Setup(e) => write!(f, "{e}"),
            RunError::Unstable(a) => write!(f, "{a}"),
        }
    }
}

impl<S: std::fmt::Debug> std::error::Error for RunError<S> {}

impl<S> From<Aborted<S>> for RunError<S> {
    fn from(a: Aborted<S>) -> Self {
        RunError::Unstable(a)
    }
}

impl<S> From<Error> for RunError<S> {
    fn from(e: Error) -> Self {
        RunError::Setup(e)
    }
}

impl<S> RunError<S> {
    pub fn aborted(self) -> Option<Aborted<S>> {
        match self {
            RunError::Unstable(a) => Some(a),
            RunError::Setup(_) => None,
        }
    }
}

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("{op}: shape mismatch between {lhs:?} and {rhs:?}")]
    Shape {
        op: &'static str,
        lhs: Vec<usize>,
        rhs: Vec<usize>,
    },

    #[error("backward: loss must be a scalar, got shape {0:?}")]
    NonScalarLoss(Vec<usize>),

    #[error("backward: tape is empty")]
    EmptyTape,

    #[error("non-finite value in `{name}`")]
    NonFinite { name: String },

    #[error("unknown parameter `{0}`")]
    UnknownParameter(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("pair ({0}, {1}) is not scheduled")]
    Unscheduled(usize, usize),

    #[error("schedule violates half-duplex: {0}")]
    HalfDuplex(String),

    #[error("training diverged at epoch {epoch}: loss trace {trace:?}")]
    Diverged { epoch: usize, trace: Vec<f64> },

    #[error("instance too large for exhaustive search: about {estimate:.3e} candidate sequences (limit {limit:.3e})")]
    TooLarge { estimate: f64, limit: f64 },

    #[error("no trained codec for scheme {0}")]
    Untrained(String),

    #[error("config: {0}")]
    Config(String),

    #[error("parameter container: {0}")]
    Container(String),

    #[error("{context}: {source}")]
    Context {
        context: String,
        #[source]
        source: Box<Error>,
    },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    pub fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidArgument(msg.into())
    }

    pub fn context(self, context: impl Into<String>) -> Self {
        Error::Context {
            context: context.into(),
            source: Box::new(self),
        }
    }

    /// Short machine-readable tag, used by the CLI error line.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::Shape { .. } => "shape",
            Error::NonScalarLoss(_) => "non_scalar_loss",
            Error::EmptyTape => "empty_tape",
            Error::NonFinite { .. } => "non_finite",
            Error::UnknownParameter(_) => "unknown_parameter",
            Error::InvalidArgument(_) => "invalid_argument",
            Error::Unscheduled(..) => "unscheduled",
            Error::HalfDuplex(_) => "half_duplex",
            Error::Diverged { .. } => "diverged",
            Error::TooLarge { .. } => "too_large",
            Error::Untrained(_) => "untrained",
            Error::Config(_) => "config",
            Error::Container(_) => "container",
            Error::Context { source, .. } => source.kind(),
            Error::Io(_) => "io",
            Error::Csv(_) => "csv",
        }
    }
}

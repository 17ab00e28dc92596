use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("tick {tick} out of range for a {ticks_per_day}-tick day")]
    TickOutOfRange { tick: usize, ticks_per_day: usize },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    /// Degenerate market description, e.g. zero depth at a tick.
    #[error("degenerate market: {0}")]
    Model(String),

    #[error("numeric domain error: {0}")]
    NumericDomain(String),

    #[error("infeasible calibration: {0}")]
    InfeasibleCalibration(String),

    #[error("accounting error: {0}")]
    Accounting(String),

    #[error("no ledger entries for day {0}")]
    UnknownDay(u32),

    #[error("line {line}: {message}")]
    Data { line: u64, message: String },

    #[error("{0}")]
    Input(String),

    #[error("config key `{key}`: {message}")]
    Config { key: String, message: String },

    #[error("day {day} failed: {source}")]
    DayFailed {
        day: u32,
        #[source]
        source: Box<Error>,
    },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    pub(crate) fn config(key: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Config {
            key: key.into(),
            message: message.into(),
        }
    }

    pub(crate) fn arg(message: impl Into<String>) -> Self {
        Error::InvalidArgument(message.into())
    }

    /// True for errors caused by bad configuration or input data rather than
    /// by something going wrong while a valid run executes.
    pub fn is_input_error(&self) -> bool {
        match self {
            Error::InvalidArgument(_)
            | Error::InfeasibleCalibration(_)
            | Error::Data { .. }
            | Error::Input(_)
            | Error::Config { .. }
            | Error::TickOutOfRange { .. }
            | Error::Io(_)
            | Error::Csv(_) => true,
            Error::DayFailed { .. }
            | Error::Model(_)
            | Error::NumericDomain(_)
            | Error::Accounting(_)
            | Error::UnknownDay(_) => false,
        }
    }
}

use crate::logic::LogicError;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum Error {
    #[error("{line}:{col}: {msg}")]
    Syntax {
        line: usize,
        col: usize,
        msg: String,
    },
    /// Problems with the program or query the user supplied.
    #[error("{0}")]
    Input(String),
    /// A size cap of the decision procedures was hit.
    #[error(transparent)]
    Logic(#[from] LogicError),
    #[error("{0}")]
    Limit(String),
    #[error("{stage}: {source}")]
    Stage {
        stage: &'static str,
        source: Box<Error>,
    },
}

impl Error {
    pub fn input(msg: impl Into<String>) -> Error {
        Error::Input(msg.into())
    }

    pub fn limit(msg: impl Into<String>) -> Error {
        Error::Limit(msg.into())
    }

    pub fn at(self, stage: &'static str) -> Error {
        match self {
            e @ Error::Stage { .. } => e,
            e => Error::Stage {
                stage,
                source: Box::new(e),
            },
        }
    }

    /// Input errors are the user's to fix; everything else is a cap.
    pub fn is_input(&self) -> bool {
        match self {
            Error::Syntax { .. } | Error::Input(_) => true,
            Error::Logic(_) | Error::Limit(_) => false,
            Error::Stage { source, .. } => source.is_input(),
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

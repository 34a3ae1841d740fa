use std::fmt;

/// Pipeline stage identifiers used to tag propagated errors.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Stage {
    Histogram,
    Smoothing,
    Initialization,
    Fitting,
    Footprint,
    Membership,
    PdfGeneration,
    Specification,
}

impl fmt::Display for Stage {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let name = match self {
            Stage::Histogram => "histogram",
            Stage::Smoothing => "smoothing",
            Stage::Initialization => "initialization",
            Stage::Fitting => "fitting",
            Stage::Footprint => "footprint",
            Stage::Membership => "membership",
            Stage::PdfGeneration => "pdf-generation",
            Stage::Specification => "specification",
        };
        f.write_str(name)
    }
}

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),

    /// Malformed input file; `field` names the offending header field or payload.
    #[error("format error in {field}: {detail}")]
    Format { field: &'static str, detail: String },

    /// A precondition of an operation was violated.
    #[error("contract violation: {0}")]
    Contract(String),

    #[error("no convergence: {0}")]
    Convergence(String),

    #[error("{stage} stage failed: {source}")]
    Stage {
        stage: Stage,
        #[source]
        source: Box<Error>,
    },
}

impl Error {
    pub(crate) fn contract(msg: impl Into<String>) -> Self {
        Error::Contract(msg.into())
    }

    pub(crate) fn format(field: &'static str, detail: impl Into<String>) -> Self {
        Error::Format {
            field,
            detail: detail.into(),
        }
    }

    /// The stage this error was raised in, if it was tagged.
    pub fn stage(&self) -> Option<Stage> {
        match self {
            Error::Stage { stage, .. } => Some(*stage),
            _ => None,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) trait StageExt<T> {
    fn at(self, stage: Stage) -> Result<T>;
}

impl<T> StageExt<T> for Result<T> {
    fn at(self, stage: Stage) -> Result<T> {
        self.map_err(|e| Error::Stage {
            stage,
            source: Box::new(e),
        })
    }
}

use std::io;
use std::path::PathBuf;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error(transparent)]
    Core(#[from] spikecheck_core::Error),

    #[error("cannot access {}", path.display())]
    Io { path: PathBuf, source: io::Error },

    #[error("schema error: {0}")]
    Schema(String),

    #[error("IDX format error: {0}")]
    Format(String),

    #[error("usage error: {0}")]
    Usage(String),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>) -> impl FnOnce(io::Error) -> Self {
        let path = path.into();
        move |source| Self::Io { path, source }
    }

    /// Errors caused by bad arguments rather than by the data or the system.
    pub fn is_usage(&self) -> bool {
        matches!(
            self,
            Self::Usage(_)
                | Self::Core(
                    spikecheck_core::Error::InvalidLabel { .. }
                        | spikecheck_core::Error::InputLength { .. }
                        | spikecheck_core::Error::SpikeTimeOutOfRange { .. }
                        | spikecheck_core::Error::WrongLayer { .. }
                        | spikecheck_core::Error::Domain(_)
                )
        )
    }
}

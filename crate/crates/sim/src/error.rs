use std::path::PathBuf;

use thiserror::Error;

pub type SimResult<T> = std::result::Result<T, SimError>;

#[derive(Debug, Error)]
pub enum SimError {
    #[error("configuration error at `{key}`: {message}")]
    Config { key: String, message: String },
    #[error("at t = {t_s:.3} s: {source}")]
    AtTime {
        t_s: f64,
        #[source]
        source: hcsnet_core::Error,
    },
    #[error(transparent)]
    Model(#[from] hcsnet_core::Error),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}: {message}")]
    Csv { path: PathBuf, message: String },
    #[error("nothing to plot: {0}")]
    Empty(String),
}

impl SimError {
    pub(crate) fn at(t_s: f64) -> impl FnOnce(hcsnet_core::Error) -> SimError {
        move |source| SimError::AtTime { t_s, source }
    }

    pub(crate) fn io(path: impl Into<PathBuf>) -> impl FnOnce(std::io::Error) -> SimError {
        let path = path.into();
        move |source| SimError::Io { path, source }
    }
}

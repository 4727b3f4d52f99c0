use thiserror::Error;

use crate::floquet::FloquetError;
use crate::fsl::FslError;
use crate::hilbert::HilbertError;
use crate::jc::JcError;
use crate::linalg::LinalgError;
use crate::lmg::LmgError;
use crate::propagate::PropagateError;
use crate::spectra::SpectraError;

/// Any failure raised by the library.
#[derive(Debug, Error)]
pub enum Error {
    #[error(transparent)]
    Hilbert(#[from] HilbertError),
    #[error(transparent)]
    Linalg(#[from] LinalgError),
    #[error(transparent)]
    Propagate(#[from] PropagateError),
    #[error(transparent)]
    Floquet(#[from] FloquetError),
    #[error(transparent)]
    Jc(#[from] JcError),
    #[error(transparent)]
    Lmg(#[from] LmgError),
    #[error(transparent)]
    Spectra(#[from] SpectraError),
    #[error(transparent)]
    Fsl(#[from] FslError),
    #[error("configuration: {0}")]
    Config(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

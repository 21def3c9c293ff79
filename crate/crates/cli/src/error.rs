use std::path::Path;

use kgt_core::classify::ClassifyError;
use kgt_core::diagram::DiagramError;
use kgt_core::equiv::EquivError;
use kgt_core::fock::FockError;
use kgt_core::mobius::MobiusError;
use kgt_core::perm::PermError;
use kgt_core::semigroup::SemigroupError;
use thiserror::Error;

#[derive(Error, Debug)]
pub enum CliError {
    #[error("{0}")]
    Input(String),
    #[error("{0}")]
    Resource(String),
    #[error("verification failed: {0}")]
    Verification(String),
    #[error("verdict is unknown")]
    Unknown,
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Verification(_) => 1,
            CliError::Input(_) | CliError::Resource(_) => 2,
            CliError::Unknown => 3,
        }
    }

    pub fn io(path: &Path, e: std::io::Error) -> Self {
        CliError::Input(format!("{}: {e}", path.display()))
    }
}

impl From<PermError> for CliError {
    fn from(e: PermError) -> Self {
        match e {
            PermError::ShapeTooLarge { .. } => CliError::Resource(e.to_string()),
            _ => CliError::Input(e.to_string()),
        }
    }
}

impl From<ClassifyError> for CliError {
    fn from(e: ClassifyError) -> Self {
        match e {
            ClassifyError::ShapeTooLarge { .. } | ClassifyError::Perm(PermError::ShapeTooLarge { .. }) => {
                CliError::Resource(e.to_string())
            }
            _ => CliError::Input(e.to_string()),
        }
    }
}

impl From<SemigroupError> for CliError {
    fn from(e: SemigroupError) -> Self {
        CliError::Input(e.to_string())
    }
}

impl From<DiagramError> for CliError {
    fn from(e: DiagramError) -> Self {
        CliError::Input(e.to_string())
    }
}

impl From<EquivError> for CliError {
    fn from(e: EquivError) -> Self {
        match e {
            EquivError::TensorSystemTooLarge { .. } | EquivError::Perm(PermError::ShapeTooLarge { .. }) => {
                CliError::Resource(e.to_string())
            }
            _ => CliError::Input(e.to_string()),
        }
    }
}

impl From<FockError> for CliError {
    fn from(e: FockError) -> Self {
        match e {
            FockError::TruncationTooLarge { .. } => CliError::Resource(e.to_string()),
            _ => CliError::Input(e.to_string()),
        }
    }
}

impl From<MobiusError> for CliError {
    fn from(e: MobiusError) -> Self {
        match e {
            MobiusError::Fock(f) => f.into(),
            _ => CliError::Input(e.to_string()),
        }
    }
}

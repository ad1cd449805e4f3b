use serde::{Deserialize, Serialize};

use crate::dvh::DvhError;
use crate::schedule::Finding;
use crate::tissue::LibraryError;

pub type Result<T, E = Error> = std::result::Result<T, E>;

/// Everything the engine can refuse to compute.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error(transparent)]
    Library(#[from] LibraryError),

    #[error("unknown tissue `{0}`")]
    UnknownTissue(String),

    /// A course breaks a scheduling or branch rule.
    #[error("{0}")]
    Invalid(Finding),

    #[error("tissue `{tissue}` has no `{field}`, which {purpose} requires")]
    MissingParameter {
        tissue: String,
        field: &'static str,
        purpose: &'static str,
    },

    #[error("`{field}` must be {bound}, got {value}")]
    Domain {
        field: &'static str,
        bound: &'static str,
        value: f64,
    },

    #[error("no repair between fractions: mu * delta_t = {0:e} leaves phi numerically equal to 1")]
    NoRepair(f64),

    #[error(
        "target BED {target:.4} Gy is unreachable: reference BED never exceeds \
         {supremum:.4} Gy up to {max_bracket} reference fractions"
    )]
    Unreachable {
        target: f64,
        supremum: f64,
        max_bracket: f64,
    },

    #[error(transparent)]
    Dvh(#[from] DvhError),
}

/// Coarse classification used for exit codes and HTTP statuses.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorKind {
    /// Bad input: malformed, out of domain, rule violation.
    Validation,
    /// Valid input the solver could not invert.
    Solver,
}

impl Error {
    pub fn kind(&self) -> ErrorKind {
        match self {
            Error::Unreachable { .. } => ErrorKind::Solver,
            _ => ErrorKind::Validation,
        }
    }

    /// Stable machine-readable code. Rule violations use the rule name.
    pub fn code(&self) -> &'static str {
        match self {
            Error::Library(_) => "invalid_library",
            Error::UnknownTissue(_) => "unknown_tissue",
            Error::Invalid(f) => f.rule.as_str(),
            Error::MissingParameter { .. } => "missing_parameter",
            Error::Domain { .. } => "out_of_domain",
            Error::NoRepair(_) => "no_repair",
            Error::Unreachable { .. } => "unreachable",
            Error::Dvh(_) => "invalid_dvh",
        }
    }

    /// Dotted path of the offending request field, when one applies.
    pub fn field_path(&self) -> Option<String> {
        match self {
            Error::UnknownTissue(_) => Some("tissue".into()),
            Error::Invalid(f) => Some(f.field_path()),
            Error::MissingParameter { field, .. } => Some(format!("tissue.{field}")),
            Error::Domain { field, .. } => Some((*field).to_string()),
            Error::Library(LibraryError::Invalid { name, field, .. }) => {
                Some(format!("tissue[{name}].{field}"))
            }
            _ => None,
        }
    }

    pub(crate) fn domain(field: &'static str, bound: &'static str, value: f64) -> Self {
        Error::Domain {
            field,
            bound,
            value,
        }
    }
}

pub(crate) fn require_positive(field: &'static str, value: f64) -> Result<f64> {
    if value > 0.0 && value.is_finite() {
        Ok(value)
    } else {
        Err(Error::domain(field, "> 0", value))
    }
}

pub(crate) fn require_non_negative(field: &'static str, value: f64) -> Result<f64> {
    if value >= 0.0 && value.is_finite() {
        Ok(value)
    } else {
        Err(Error::domain(field, ">= 0", value))
    }
}

/// Non-fatal condition surfaced alongside a result.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Warning {
    pub code: WarningCode,
    pub message: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum WarningCode {
    /// Deficit exceeded the geometric BED; total clamped to zero.
    BedClamped,
    /// Reference BED is not increasing in fraction count.
    NonMonotoneReference,
    /// Continuous reference time disagrees with the weekday calendar by more than 0.1 Gy.
    CalendarResidual,
    /// Inter-course gap longer than 60 days.
    LongGap,
    /// Dose per fraction outside the 1.8–2.2 Gy range the NTCP model is valid for.
    NtcpDoseRange,
    /// A probability fell outside [0, 1] and was clamped.
    ProbabilityClamped,
    /// DVH volume column did not start at 100 % and was rescaled.
    VolumeRenormalized,
}

impl Warning {
    pub fn new(code: WarningCode, message: impl Into<String>) -> Self {
        Warning {
            code,
            message: message.into(),
        }
    }
}

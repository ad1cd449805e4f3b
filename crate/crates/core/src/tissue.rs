//! Per-tissue radiobiological parameters and the tissue library file.
//!
//! The library is a TOML document:
//!
//! ```toml
//! format_version = 1
//!
//! [[tissue]]
//! name = "spinal cord"
//! kind = "organ_at_risk"
//! alpha_beta = 2.0
//! alpha = 0.3
//! mu = 0.46
//! d_rec = 0.0
//! ```
//!
//! Unknown keys are rejected. `d_t` defaults to `2 * alpha_beta` when
//! omitted; `gamma_over_alpha` falls back to [`default_gamma_over_alpha`].

use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

/// Highest `format_version` this build understands.
pub const FORMAT_VERSION: u32 = 1;

/// Seed library shipped with the engine. All values other than the
/// alpha/beta ratios are placeholders.
pub const SEED_LIBRARY: &str = include_str!("../data/tissues.toml");

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TissueKind {
    Target,
    OrganAtRisk,
}

/// Radiobiological constants for one tissue. Construct through
/// [`load_library`] or [`TissueParams::validate`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TissueParams {
    pub name: String,
    pub kind: TissueKind,
    /// Gy
    pub alpha_beta: f64,
    /// Gy⁻¹
    pub alpha: f64,
    /// LQL threshold dose per fraction, Gy.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub d_t: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gamma_over_alpha: Option<f64>,
    /// Potential doubling time, days.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub t_pot: Option<f64>,
    /// Kick-off time, days.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub t_k: Option<f64>,
    /// Recovered dose, Gy/day.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub d_rec: Option<f64>,
    /// Interruption penalty, Gy/day.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub d_prol: Option<f64>,
    /// Repair rate constant, h⁻¹.
    pub mu: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub td50: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub slope_m: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub p_unsc: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub alpha_unsc: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum LibraryError {
    #[error("malformed tissue library: {0}")]
    Parse(String),
    #[error("tissue library lacks `format_version`")]
    MissingVersion,
    #[error("unsupported tissue library format_version {0} (this build reads {FORMAT_VERSION})")]
    UnsupportedVersion(u32),
    #[error("tissue `{name}`: `{field}` {reason}")]
    Invalid {
        name: String,
        field: &'static str,
        reason: String,
    },
    #[error("duplicate tissue name `{0}`")]
    Duplicate(String),
    #[error("cannot read tissue library {path}: {reason}")]
    Io { path: String, reason: String },
}

/// Slope of the LQL linear tail that makes it tangent to the LQ curve at `d_t`.
pub fn default_gamma_over_alpha(alpha_beta: f64, d_t: f64) -> f64 {
    1.0 + 2.0 * d_t / alpha_beta
}

impl TissueParams {
    /// Threshold dose, with the `2 * alpha_beta` default applied.
    pub fn threshold_dose(&self) -> f64 {
        self.d_t.unwrap_or(2.0 * self.alpha_beta)
    }

    pub fn effective_gamma_over_alpha(&self) -> f64 {
        self.gamma_over_alpha
            .unwrap_or_else(|| default_gamma_over_alpha(self.alpha_beta, self.threshold_dose()))
    }

    /// Checks every invariant and fills `d_t` when absent.
    pub fn validate(mut self) -> Result<Self, LibraryError> {
        let name = self.name.trim().to_string();
        let invalid = |field: &'static str, reason: &str| LibraryError::Invalid {
            name: name.clone(),
            field,
            reason: reason.to_string(),
        };
        if name.is_empty() {
            return Err(invalid("name", "must not be empty"));
        }
        let positive = |field, v: f64| {
            if v > 0.0 && v.is_finite() {
                Ok(())
            } else {
                Err(invalid(field, &format!("must be > 0 (got {v})")))
            }
        };
        let non_negative = |field, v: f64| {
            if v >= 0.0 && v.is_finite() {
                Ok(())
            } else {
                Err(invalid(field, &format!("must be >= 0 (got {v})")))
            }
        };

        positive("alpha_beta", self.alpha_beta)?;
        positive("alpha", self.alpha)?;
        positive("mu", self.mu)?;
        if self.d_t.is_none() {
            self.d_t = Some(2.0 * self.alpha_beta);
        }
        positive("d_t", self.threshold_dose())?;
        if let Some(g) = self.gamma_over_alpha {
            positive("gamma_over_alpha", g)?;
        }
        if let Some(v) = self.t_pot {
            positive("t_pot", v)?;
        }
        if let Some(v) = self.t_k {
            non_negative("t_k", v)?;
        }
        if let Some(v) = self.d_rec {
            non_negative("d_rec", v)?;
        }
        if let Some(v) = self.d_prol {
            non_negative("d_prol", v)?;
        }
        if let Some(v) = self.td50 {
            positive("td50", v)?;
        }
        if let Some(v) = self.slope_m {
            positive("slope_m", v)?;
        }
        if let Some(v) = self.p_unsc {
            non_negative("p_unsc", v)?;
        }
        if let Some(v) = self.alpha_unsc {
            positive("alpha_unsc", v)?;
        }
        match (self.td50, self.slope_m) {
            (Some(_), None) => return Err(invalid("slope_m", "is required when td50 is set")),
            (None, Some(_)) => return Err(invalid("td50", "is required when slope_m is set")),
            _ => {}
        }
        match (self.p_unsc, self.alpha_unsc) {
            (Some(_), None) => return Err(invalid("alpha_unsc", "is required when p_unsc is set")),
            (None, Some(_)) => return Err(invalid("p_unsc", "is required when alpha_unsc is set")),
            _ => {}
        }

        match self.kind {
            TissueKind::Target => {
                if self.t_pot.is_none() {
                    return Err(invalid("t_pot", "is required for a target"));
                }
                if self.t_k.is_none() {
                    return Err(invalid("t_k", "is required for a target"));
                }
                if self.d_rec.is_some() {
                    return Err(invalid("d_rec", "applies to organs at risk only"));
                }
                if self.td50.is_some() {
                    return Err(invalid("td50", "applies to organs at risk only"));
                }
            }
            TissueKind::OrganAtRisk => {
                if self.d_rec.is_none() {
                    return Err(invalid("d_rec", "is required for an organ at risk"));
                }
                if self.t_pot.is_some() {
                    return Err(invalid("t_pot", "applies to targets only"));
                }
                if self.t_k.is_some() {
                    return Err(invalid("t_k", "applies to targets only"));
                }
            }
        }
        self.name = name;
        Ok(self)
    }
}

#[derive(Debug, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct LibraryDocument {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    format_version: Option<u32>,
    #[serde(default)]
    tissue: Vec<TissueParams>,
}

/// Parses and validates a tissue library document. Records come back in
/// file order.
pub fn load_library(source: &str) -> Result<Vec<TissueParams>, LibraryError> {
    let doc: LibraryDocument =
        toml::from_str(source).map_err(|e| LibraryError::Parse(e.to_string()))?;
    match doc.format_version {
        None if !doc.tissue.is_empty() => return Err(LibraryError::MissingVersion),
        Some(v) if v != FORMAT_VERSION => return Err(LibraryError::UnsupportedVersion(v)),
        _ => {}
    }
    let mut out: Vec<TissueParams> = Vec::with_capacity(doc.tissue.len());
    for raw in doc.tissue {
        let t = raw.validate()?;
        if out.iter().any(|o| same_name(&o.name, &t.name)) {
            return Err(LibraryError::Duplicate(t.name));
        }
        out.push(t);
    }
    Ok(out)
}

/// Serializes tissues back to the library format.
pub fn serialize_library(tissues: &[TissueParams]) -> String {
    let doc = LibraryDocument {
        format_version: Some(FORMAT_VERSION),
        tissue: tissues.to_vec(),
    };
    toml::to_string(&doc).expect("tissue records always serialize")
}

fn same_name(a: &str, b: &str) -> bool {
    a.trim().eq_ignore_ascii_case(b.trim())
}

/// A loaded, immutable library plus the checksum of its source text.
#[derive(Debug, Clone)]
pub struct TissueLibrary {
    tissues: Vec<TissueParams>,
    checksum: String,
}

impl TissueLibrary {
    pub fn from_source(source: &str) -> Result<Self, LibraryError> {
        let tissues = load_library(source)?;
        let checksum = format!("sha256:{}", hex::encode(Sha256::digest(source.as_bytes())));
        Ok(TissueLibrary { tissues, checksum })
    }

    pub fn from_path(path: impl AsRef<Path>) -> Result<Self, LibraryError> {
        let path = path.as_ref();
        let source = std::fs::read_to_string(path).map_err(|e| LibraryError::Io {
            path: path.display().to_string(),
            reason: e.to_string(),
        })?;
        Self::from_source(&source)
    }

    pub fn seed() -> Self {
        Self::from_source(SEED_LIBRARY).expect("seed library is valid")
    }

    /// Case-insensitive lookup by name.
    pub fn get(&self, name: &str) -> Option<&TissueParams> {
        self.tissues.iter().find(|t| same_name(&t.name, name))
    }

    pub fn tissues(&self) -> &[TissueParams] {
        &self.tissues
    }

    pub fn names(&self) -> impl Iterator<Item = &str> {
        self.tissues.iter().map(|t| t.name.as_str())
    }

    /// `sha256:<hex>` of the exact source bytes.
    pub fn checksum(&self) -> &str {
        &self.checksum
    }
}

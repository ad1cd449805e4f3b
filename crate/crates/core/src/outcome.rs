//! Lyman NTCP and radiation-induced cancer incidence on top of the
//! equivalent dose at 2 Gy per fraction.

use std::f64::consts::SQRT_2;

use serde::{Deserialize, Serialize};
use statrs::function::erf::erfc;

use crate::error::{require_non_negative, Error, Result, Warning, WarningCode};
use crate::schedule::TreatmentCourse;
use crate::solver::{equivalent_dose, SolverConfig};
use crate::tissue::TissueParams;

/// Dose-per-fraction window the NTCP model is valid for, Gy.
pub const NTCP_VALID_DOSE: (f64, f64) = (1.8, 2.2);

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OutcomeEstimate {
    /// Equivalent dose the probabilities were evaluated at, Gy.
    pub eqd: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ntcp: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub k_incidence: Option<f64>,
    pub validity_warnings: Vec<Warning>,
}

/// Standard normal CDF.
pub fn gaussian_cdf(u: f64) -> f64 {
    if u.is_nan() {
        return f64::NAN;
    }
    0.5 * erfc(-u / SQRT_2)
}

/// Lyman NTCP with `u = (EUD - TD50) / (m TD50)`.
pub fn ntcp(eud_2gy: f64, tissue: &TissueParams) -> Result<f64> {
    require_non_negative("eud_2gy", eud_2gy)?;
    let (td50, m) = match (tissue.td50, tissue.slope_m) {
        (Some(t), Some(m)) => (t, m),
        (None, _) => return Err(missing(tissue, "td50")),
        (_, None) => return Err(missing(tissue, "slope_m")),
    };
    Ok(gaussian_cdf((eud_2gy - td50) / (m * td50)))
}

/// `P_unsc * D * exp(-alpha_unsc * D)`, clamped to [0, 1]; the warning is
/// set when the clamp was active.
pub fn induced_cancer_incidence(
    d_2gy: f64,
    tissue: &TissueParams,
) -> Result<(f64, Option<Warning>)> {
    require_non_negative("d_2gy", d_2gy)?;
    let (p, a) = match (tissue.p_unsc, tissue.alpha_unsc) {
        (Some(p), Some(a)) => (p, a),
        (None, _) => return Err(missing(tissue, "p_unsc")),
        (_, None) => return Err(missing(tissue, "alpha_unsc")),
    };
    let k = p * d_2gy * (-a * d_2gy).exp();
    if (0.0..=1.0).contains(&k) {
        Ok((k, None))
    } else {
        let clamped = k.clamp(0.0, 1.0);
        Ok((
            clamped,
            Some(Warning::new(
                WarningCode::ProbabilityClamped,
                format!("induced-cancer incidence {k:.4} clamped to {clamped}"),
            )),
        ))
    }
}

fn missing(tissue: &TissueParams, field: &'static str) -> Error {
    Error::MissingParameter {
        tissue: tissue.name.clone(),
        field,
        purpose: "the outcome model",
    }
}

fn in_valid_range(d: f64) -> bool {
    const EPS: f64 = 1e-12;
    d >= NTCP_VALID_DOSE.0 - EPS && d <= NTCP_VALID_DOSE.1 + EPS
}

/// Validity warnings for feeding `courses` through the NTCP model.
pub fn validity_warnings(courses: &[TreatmentCourse], config: &SolverConfig) -> Vec<Warning> {
    let mut out = Vec::new();
    for (i, c) in courses.iter().enumerate() {
        if !in_valid_range(c.d) {
            out.push(Warning::new(
                WarningCode::NtcpDoseRange,
                format!(
                    "courses[{i}]: {} Gy per fraction is outside the 2 ± 0.2 Gy range the \
                     NTCP model is valid for",
                    c.d
                ),
            ));
        }
    }
    if !in_valid_range(config.d_ref) {
        out.push(Warning::new(
            WarningCode::NtcpDoseRange,
            format!(
                "reference dose {} Gy per fraction is outside the 2 ± 0.2 Gy range",
                config.d_ref
            ),
        ));
    }
    out
}

/// Which outcome models to evaluate.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct OutcomeSelection {
    pub ntcp: bool,
    pub incidence: bool,
}

/// Solves for the equivalent dose, then evaluates the selected models.
/// A selected model whose parameters are missing is an error.
pub fn estimate_outcomes(
    courses: &[TreatmentCourse],
    tissue: &TissueParams,
    config: &SolverConfig,
    select: OutcomeSelection,
) -> Result<OutcomeEstimate> {
    let solved = equivalent_dose(courses, tissue, config)?;
    let mut warnings = solved.warnings;
    let ntcp_value = if select.ntcp {
        warnings.extend(validity_warnings(courses, config));
        Some(ntcp(solved.eqd, tissue)?)
    } else {
        None
    };
    let k_incidence = if select.incidence {
        let (k, w) = induced_cancer_incidence(solved.eqd, tissue)?;
        warnings.extend(w);
        Some(k)
    } else {
        None
    };
    Ok(OutcomeEstimate {
        eqd: solved.eqd,
        ntcp: ntcp_value,
        k_incidence,
        validity_warnings: warnings,
    })
}

//! BED under the LQ / LQL models with incomplete repair, tumour
//! repopulation and normal-tissue recovery.

use std::f64::consts::LN_2;

use serde::{Deserialize, Serialize};

use crate::error::{require_non_negative, require_positive, Error, Result, Warning, WarningCode};
use crate::schedule::{resolve_timeline, validate_courses, ScheduleTimeline, TreatmentCourse};
use crate::tissue::{TissueKind, TissueParams};

/// BED with its additive terms itemized. All values in Gy.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BedBreakdown {
    /// Sum of per-course LQ / LQL terms, incomplete-repair surcharge included.
    pub geometric_bed: f64,
    /// Part of `geometric_bed` due to incomplete repair between same-day fractions.
    pub repair_surcharge: f64,
    /// Repopulation (targets) or recovery (organs at risk) subtraction.
    pub deficit: f64,
    pub total_bed: f64,
    /// `true` when the deficit exceeded the geometric term and the total was clamped to zero.
    pub clamped: bool,
}

/// Dose-response branch for one dose per fraction.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Branch {
    Lq,
    Lql,
}

impl Branch {
    /// `d == d_t` belongs to the LQ branch.
    pub fn for_dose(d: f64, tissue: &TissueParams) -> Self {
        if d > tissue.threshold_dose() {
            Branch::Lql
        } else {
            Branch::Lq
        }
    }
}

/// Equivalent total dose at `d_ref` Gy/fraction: `n d (d + a/b) / (d_ref + a/b)`.
pub fn classic_eqd(n: f64, d: f64, alpha_beta: f64, d_ref: f64) -> Result<f64> {
    require_positive("n", n)?;
    require_positive("d", d)?;
    require_positive("alpha_beta", alpha_beta)?;
    require_positive("d_ref", d_ref)?;
    Ok(n * d * (d + alpha_beta) / (d_ref + alpha_beta))
}

/// Power-law tolerance dose `NSD * N^exp_n * T^exp_t`.
pub fn nsd_tolerance(
    nsd_const: f64,
    n_fractions: f64,
    t_days: f64,
    exp_n: f64,
    exp_t: f64,
) -> Result<f64> {
    require_positive("nsd_const", nsd_const)?;
    require_positive("n_fractions", n_fractions)?;
    require_positive("t_days", t_days)?;
    require_non_negative("exp_n", exp_n)?;
    require_non_negative("exp_t", exp_t)?;
    Ok(nsd_const * n_fractions.powf(exp_n) * t_days.powf(exp_t))
}

/// Incomplete-repair factor `H_m` for `m` equally spaced fractions per day.
///
/// Evaluated in the cancelled form `(2/m) φ Σ_{j=0}^{m-2} (m-1-j) φ^j`,
/// which equals the usual quotient expression without dividing by `1 - φ`.
pub fn incomplete_repair_factor(m_per_day: u32, mu: f64, delta_t: f64) -> Result<f64> {
    if m_per_day == 0 {
        return Err(Error::domain("m_per_day", ">= 1", 0.0));
    }
    if m_per_day == 1 {
        return Ok(0.0);
    }
    require_positive("mu", mu)?;
    require_positive("delta_t", delta_t)?;
    let exponent = mu * delta_t;
    let phi = (-exponent).exp();
    if phi >= 1.0 {
        return Err(Error::NoRepair(exponent));
    }
    Ok(repair_factor_from_phi(m_per_day, phi))
}

pub(crate) fn repair_factor_from_phi(m: u32, phi: f64) -> f64 {
    let mut sum = 0.0;
    let mut power = 1.0;
    for j in 0..m.saturating_sub(1) {
        sum += f64::from(m - 1 - j) * power;
        power *= phi;
    }
    2.0 / f64::from(m) * phi * sum
}

/// Repopulation subtraction for a target: `θ(T - T_k) ln2 / (α T_pot) (T - T_k)`,
/// with `θ(0) = 0`.
pub fn repopulation_deficit(overall_time: f64, tissue: &TissueParams) -> Result<f64> {
    let (t_pot, t_k) = match (tissue.t_pot, tissue.t_k) {
        (Some(p), Some(k)) => (p, k),
        (None, _) => return Err(missing(tissue, "t_pot", "repopulation")),
        (_, None) => return Err(missing(tissue, "t_k", "repopulation")),
    };
    let excess = overall_time - t_k;
    if excess > 0.0 {
        Ok(LN_2 / (tissue.alpha * t_pot) * excess)
    } else {
        Ok(0.0)
    }
}

/// Recovery subtraction for an organ at risk: `D_rec * T`.
pub fn recovery_deficit(overall_time: f64, tissue: &TissueParams) -> Result<f64> {
    let d_rec = tissue
        .d_rec
        .ok_or_else(|| missing(tissue, "d_rec", "recovery"))?;
    Ok(d_rec * overall_time)
}

/// Deficit for the tissue's kind over an overall time of `overall_time` days.
pub fn deficit(overall_time: f64, tissue: &TissueParams) -> Result<f64> {
    match tissue.kind {
        TissueKind::Target => repopulation_deficit(overall_time, tissue),
        TissueKind::OrganAtRisk => recovery_deficit(overall_time, tissue),
    }
}

/// Dose recovered over `t_stop` days off: `t_stop * D_prol`.
pub fn gap_penalty(t_stop: f64, d_prol: f64) -> Result<f64> {
    require_non_negative("t_stop", t_stop)?;
    require_non_negative("d_prol", d_prol)?;
    Ok(t_stop * d_prol)
}

fn missing(tissue: &TissueParams, field: &'static str, purpose: &'static str) -> Error {
    Error::MissingParameter {
        tissue: tissue.name.clone(),
        field,
        purpose,
    }
}

/// Geometric BED term of `n` fractions of `d` Gy, and the part of it due
/// to incomplete repair. `n` may be fractional.
pub fn geometric_term(
    n: f64,
    d: f64,
    m_per_day: u32,
    delta_t: Option<f64>,
    tissue: &TissueParams,
) -> Result<(f64, f64)> {
    let ab = tissue.alpha_beta;
    match Branch::for_dose(d, tissue) {
        Branch::Lql => {
            if m_per_day > 1 {
                return Err(Error::Domain {
                    field: "m_per_day",
                    bound: "1 above the LQL threshold",
                    value: f64::from(m_per_day),
                });
            }
            let d_t = tissue.threshold_dose();
            let slope = tissue.effective_gamma_over_alpha();
            Ok((n * (d_t * (1.0 + d_t / ab) + slope * (d - d_t)), 0.0))
        }
        Branch::Lq => {
            let h = if m_per_day > 1 {
                let dt = delta_t.ok_or(Error::Domain {
                    field: "delta_t",
                    bound: "set when m_per_day > 1",
                    value: f64::NAN,
                })?;
                incomplete_repair_factor(m_per_day, tissue.mu, dt)?
            } else {
                0.0
            };
            let geometric = n * d * (1.0 + (1.0 + h) * d / ab);
            let surcharge = n * d * h * d / ab;
            Ok((geometric, surcharge))
        }
    }
}

/// BED of a course sequence, with the schedule it was evaluated on.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BedEvaluation {
    pub breakdown: BedBreakdown,
    pub timeline: ScheduleTimeline,
    pub warnings: Vec<Warning>,
}

/// BED of `courses` for `tissue`. Geometric terms are summed per course;
/// the deficit is taken once over the overall time of the whole sequence.
pub fn bed(courses: &[TreatmentCourse], tissue: &TissueParams) -> Result<BedEvaluation> {
    let mut warnings = Vec::new();
    for f in validate_courses(courses, tissue) {
        if f.is_error() {
            return Err(Error::Invalid(f));
        }
        warnings.push(Warning::new(WarningCode::LongGap, f.to_string()));
    }
    let timeline = resolve_timeline(courses)?;

    let mut geometric_bed = 0.0;
    let mut repair_surcharge = 0.0;
    for c in courses {
        let (g, s) = geometric_term(f64::from(c.n), c.d, c.m_per_day, c.delta_t, tissue)?;
        geometric_bed += g;
        repair_surcharge += s;
    }
    let deficit = deficit(f64::from(timeline.overall_time), tissue)?;
    let raw = geometric_bed - deficit;
    let clamped = raw < 0.0;
    if clamped {
        warnings.push(Warning::new(
            WarningCode::BedClamped,
            format!(
                "deficit {deficit:.3} Gy exceeds geometric BED {geometric_bed:.3} Gy; \
                 BED clamped to 0"
            ),
        ));
    }
    Ok(BedEvaluation {
        breakdown: BedBreakdown {
            geometric_bed,
            repair_surcharge,
            deficit,
            total_bed: raw.max(0.0),
            clamped,
        },
        timeline,
        warnings,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tissue::TissueLibrary;

    fn cord() -> TissueParams {
        TissueLibrary::seed().get("spinal cord").unwrap().clone()
    }

    fn target(alpha: f64, t_pot: f64, t_k: f64, ab: f64) -> TissueParams {
        TissueParams {
            name: "tumour".into(),
            kind: TissueKind::Target,
            alpha_beta: ab,
            alpha,
            d_t: None,
            gamma_over_alpha: None,
            t_pot: Some(t_pot),
            t_k: Some(t_k),
            d_rec: None,
            d_prol: None,
            mu: 0.5,
            td50: None,
            slope_m: None,
            p_unsc: None,
            alpha_unsc: None,
        }
        .validate()
        .unwrap()
    }

    #[test]
    fn classic_eqd_examples() {
        assert_eq!(classic_eqd(10.0, 3.0, 2.0, 2.0).unwrap(), 37.5);
        assert_eq!(classic_eqd(1.0, 8.0, 2.0, 2.0).unwrap(), 20.0);
        assert_eq!(classic_eqd(7.0, 2.5, 3.0, 2.5).unwrap(), 17.5);
        assert!(classic_eqd(0.0, 2.0, 2.0, 2.0).is_err());
        assert!(classic_eqd(1.0, 2.0, -1.0, 2.0).is_err());
    }

    #[test]
    fn nsd_examples() {
        assert_eq!(nsd_tolerance(1800.0, 1.0, 1.0, 0.24, 0.11).unwrap(), 1800.0);
        assert_eq!(nsd_tolerance(1800.0, 30.0, 40.0, 0.0, 0.0).unwrap(), 1800.0);
        let expected = (100f64.ln() + 0.24 * 30f64.ln() + 0.11 * 40f64.ln()).exp();
        let got = nsd_tolerance(100.0, 30.0, 40.0, 0.24, 0.11).unwrap();
        assert!((got - expected).abs() < 1e-10 * expected);
        assert!(nsd_tolerance(100.0, 0.0, 40.0, 0.24, 0.11).is_err());
    }

    #[test]
    fn repair_factor_closed_forms() {
        for &(mu, dt) in &[(0.5f64, 6.0f64), (1.4, 8.0), (0.1, 6.0)] {
            let phi = (-mu * dt).exp();
            assert_eq!(incomplete_repair_factor(1, mu, dt).unwrap(), 0.0);
            let h2 = incomplete_repair_factor(2, mu, dt).unwrap();
            assert!((h2 - phi).abs() < 1e-15);
            let h3 = incomplete_repair_factor(3, mu, dt).unwrap();
            assert!((h3 - 2.0 * phi * (2.0 + phi) / 3.0).abs() < 1e-15);
        }
    }

    #[test]
    fn repair_factor_against_quotient_form() {
        for m in 2..=5u32 {
            for &phi in &[0.01, 0.3, 0.6, 0.9] {
                let mf = f64::from(m);
                let direct = (2.0 / mf)
                    * (phi / (1.0 - phi))
                    * (mf - (1.0 - phi.powi(m as i32)) / (1.0 - phi));
                assert!((repair_factor_from_phi(m, phi) - direct).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn repair_factor_rejects_no_repair() {
        assert!(matches!(
            incomplete_repair_factor(2, 1e-300, 1e-20),
            Err(Error::NoRepair(_))
        ));
        // single fraction ignores the interval entirely
        assert_eq!(incomplete_repair_factor(1, 1e-300, 1e-20).unwrap(), 0.0);
    }

    #[test]
    fn repopulation_examples() {
        let t = target(0.35, 5.0, 28.0, 10.0);
        assert_eq!(repopulation_deficit(20.0, &t).unwrap(), 0.0);
        assert_eq!(repopulation_deficit(28.0, &t).unwrap(), 0.0);
        let got = repopulation_deficit(40.0, &t).unwrap();
        let expected = 2f64.ln() / 1.75 * 12.0;
        assert!((got - expected).abs() < 1e-12);
        assert!((got - 4.7530).abs() < 1e-3);
    }

    #[test]
    fn recovery_examples() {
        let mut oar = cord();
        assert_eq!(recovery_deficit(40.0, &oar).unwrap(), 0.0);
        assert_eq!(recovery_deficit(1.0, &oar).unwrap(), 0.0);
        oar.d_rec = Some(0.1);
        assert!((recovery_deficit(12.0, &oar).unwrap() - 1.2).abs() < 1e-15);
        oar.d_rec = None;
        assert!(matches!(
            recovery_deficit(12.0, &oar),
            Err(Error::MissingParameter { field: "d_rec", .. })
        ));
    }

    #[test]
    fn gap_penalty_examples() {
        assert_eq!(gap_penalty(0.0, 0.22).unwrap(), 0.0);
        assert_eq!(gap_penalty(5.0, 0.22).unwrap(), 1.1);
        assert_eq!(gap_penalty(10.0, 0.15).unwrap(), 1.5);
        assert!(gap_penalty(-1.0, 0.15).is_err());
    }

    #[test]
    fn lq_plan_below_kickoff() {
        let t = target(0.35, 5.0, 60.0, 10.0);
        let b = bed(&[TreatmentCourse::new(30, 2.0)], &t).unwrap();
        assert!((b.breakdown.total_bed - 72.0).abs() < 1e-12);
        assert_eq!(b.breakdown.deficit, 0.0);
        assert_eq!(b.timeline.overall_time, 40);
    }

    #[test]
    fn lql_single_eight_gray_on_cord() {
        let b = bed(&[TreatmentCourse::new(1, 8.0)], &cord()).unwrap();
        assert_eq!(b.breakdown.geometric_bed, 32.0);
        assert_eq!(b.breakdown.total_bed, 32.0);
        assert!(!b.breakdown.clamped);
    }

    #[test]
    fn clamp_when_deficit_dominates() {
        let mut oar = cord();
        oar.d_rec = Some(5.0);
        let b = bed(&[TreatmentCourse::new(10, 1.0)], &oar).unwrap();
        assert_eq!(b.breakdown.total_bed, 0.0);
        assert!(b.breakdown.clamped);
        assert!(b.warnings.iter().any(|w| w.code == WarningCode::BedClamped));
    }

    #[test]
    fn repair_surcharge_is_inside_geometric() {
        let c = cord();
        let b = bed(&[TreatmentCourse::new(20, 1.5).per_day(2, 6.0)], &c).unwrap();
        let phi = (-c.mu * 6.0f64).exp();
        let plain = 30.0 * (1.0 + 1.5 / 2.0);
        let surcharge = 30.0 * phi * 1.5 / 2.0;
        assert!((b.breakdown.repair_surcharge - surcharge).abs() < 1e-12);
        assert!((b.breakdown.geometric_bed - plain - surcharge).abs() < 1e-12);
    }

    #[test]
    fn deficit_uses_whole_sequence_time() {
        let t = target(0.3, 5.0, 21.0, 10.0);
        let a = TreatmentCourse::new(15, 2.0).gap_after(14);
        let b = TreatmentCourse::new(10, 2.0);
        let whole = bed(&[a.clone(), b.clone()], &t).unwrap();
        let tl = whole.timeline.overall_time as f64;
        let expected = LN_2 / (0.3 * 5.0) * (tl - 21.0);
        assert!((whole.breakdown.deficit - expected).abs() < 1e-12);
        // each phase alone stays under the kick-off time
        assert_eq!(bed(&[a], &t).unwrap().breakdown.deficit, 0.0);
        assert_eq!(bed(&[b], &t).unwrap().breakdown.deficit, 0.0);
    }

    #[test]
    fn lql_branch_refuses_multi_fraction_days() {
        let err = geometric_term(2.0, 6.0, 2, Some(6.0), &cord()).unwrap_err();
        assert!(matches!(
            err,
            Error::Domain {
                field: "m_per_day",
                ..
            }
        ));
        let err = bed(&[TreatmentCourse::new(2, 6.0).per_day(2, 6.0)], &cord()).unwrap_err();
        assert!(matches!(err, Error::Invalid(_)));
    }
}

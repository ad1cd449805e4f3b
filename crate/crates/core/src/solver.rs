//! Equivalent dose at a reference fractionation, found by minimising
//! `|BED_ref(n_ref) - BED(plan)|` over real reference fraction counts.
//!
//! The reference arm is `n_ref` fractions of `d_ref`, one per day,
//! `reference_week` days a week without interruptions. Its overall time is
//! relaxed to the continuous `T_ref = 1 + (n_ref - 1) * 7 / reference_week`
//! so that the cost is continuous in `n_ref`. The reference arm carries the
//! same deficit term as the plan.

use serde::{Deserialize, Serialize};

use crate::error::{require_positive, Error, Result, Warning, WarningCode};
use crate::radiobiology::{bed, deficit, geometric_term};
use crate::roots::{bisect, golden_section_min};
use crate::schedule::{resolve_timeline, TreatmentCourse};
use crate::tissue::TissueParams;

const GRID_POINTS: usize = 64;
const GRID_START: f64 = 1e-2;
/// Continuous vs. calendar reference BED disagreement that triggers a warning, Gy.
pub const CALENDAR_RESIDUAL_WARN: f64 = 0.1;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SolverConfig {
    /// Reference dose per fraction, Gy.
    pub d_ref: f64,
    /// Acceptable |BED difference| at the solution, Gy.
    pub tolerance: f64,
    /// Largest reference fraction count searched.
    pub max_bracket: f64,
    /// Reference fractions per week.
    pub reference_week: u32,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig {
            d_ref: 2.0,
            tolerance: 1e-3,
            max_bracket: 1e4,
            reference_week: 5,
        }
    }
}

impl SolverConfig {
    pub fn validate(&self) -> Result<()> {
        require_positive("config.d_ref", self.d_ref)?;
        require_positive("config.tolerance", self.tolerance)?;
        if !(self.max_bracket >= 1.0 && self.max_bracket.is_finite()) {
            return Err(Error::Domain {
                field: "config.max_bracket",
                bound: ">= 1",
                value: self.max_bracket,
            });
        }
        if !(1..=7).contains(&self.reference_week) {
            return Err(Error::Domain {
                field: "config.reference_week",
                bound: "between 1 and 7",
                value: f64::from(self.reference_week),
            });
        }
        Ok(())
    }

    /// Continuous overall time of `n_ref` reference fractions, days.
    pub fn reference_time(&self, n_ref: f64) -> f64 {
        (1.0 + (n_ref - 1.0) * 7.0 / f64::from(self.reference_week)).max(0.0)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EquivalenceResult {
    /// Real-valued reference fraction count.
    pub n0: f64,
    /// Equivalent total dose `n0 * d_ref`, Gy.
    pub eqd: f64,
    /// |BED_ref(n0) - BED(plan)| at the solution, Gy.
    pub residual: f64,
    /// BED of the plan, Gy.
    pub target_bed: f64,
    pub warnings: Vec<Warning>,
}

/// BED of `n_ref` reference fractions (unclamped, so it stays continuous).
pub fn reference_bed(n_ref: f64, tissue: &TissueParams, config: &SolverConfig) -> Result<f64> {
    let (geometric, _) = geometric_term(n_ref, config.d_ref, 1, None, tissue)?;
    Ok(geometric - deficit(config.reference_time(n_ref), tissue)?)
}

/// `|BED_ref(n_ref) - BED(courses)|`.
pub fn cost(
    n_ref: f64,
    courses: &[TreatmentCourse],
    tissue: &TissueParams,
    config: &SolverConfig,
) -> Result<f64> {
    require_positive("n_ref", n_ref)?;
    config.validate()?;
    let target = bed(courses, tissue)?.breakdown.total_bed;
    Ok((reference_bed(n_ref, tissue, config)? - target).abs())
}

fn log_grid(max: f64) -> Vec<f64> {
    let (lo, hi) = (GRID_START.ln(), max.max(GRID_START * 2.0).ln());
    (0..GRID_POINTS)
        .map(|i| (lo + (hi - lo) * i as f64 / (GRID_POINTS - 1) as f64).exp())
        .collect()
}

/// Solves for the reference fraction count whose BED matches the plan's.
pub fn equivalent_dose(
    courses: &[TreatmentCourse],
    tissue: &TissueParams,
    config: &SolverConfig,
) -> Result<EquivalenceResult> {
    config.validate()?;
    let evaluation = bed(courses, tissue)?;
    let target = evaluation.breakdown.total_bed;
    let mut warnings = evaluation.warnings;

    let g = |n: f64| reference_bed(n, tissue, config).map(|b| b - target);

    let grid = log_grid(config.max_bracket);
    let values: Vec<f64> = grid.iter().map(|&n| g(n)).collect::<Result<_>>()?;
    let monotone = values.windows(2).all(|w| w[1] > w[0]);

    let (n0, residual) = if target == 0.0 {
        (0.0, g(0.0)?.abs())
    } else if monotone {
        let (lo, hi) = bracket_by_doubling(&g, target, tissue, config)?;
        let (n, gn) = bisect(g, lo, hi)?;
        (n, gn.abs())
    } else {
        warnings.push(Warning::new(
            WarningCode::NonMonotoneReference,
            "non-monotone reference BED: reference repopulation outpaces per-fraction BED; \
             the smallest matching reference course is reported",
        ));
        solve_non_monotone(&g, &grid, &values, target)?
    };

    if residual > config.tolerance {
        let supremum = values
            .iter()
            .fold(f64::NEG_INFINITY, |m, v| m.max(v + target));
        return Err(Error::Unreachable {
            target,
            supremum,
            max_bracket: config.max_bracket,
        });
    }

    if let Some(w) = calendar_residual(n0, target, tissue, config)? {
        warnings.push(w);
    }

    Ok(EquivalenceResult {
        n0,
        eqd: n0 * config.d_ref,
        residual,
        target_bed: target,
        warnings,
    })
}

fn bracket_by_doubling<G>(
    g: &G,
    target: f64,
    tissue: &TissueParams,
    config: &SolverConfig,
) -> Result<(f64, f64)>
where
    G: Fn(f64) -> Result<f64>,
{
    let mut lo = 0.0;
    let mut hi = 1.0f64.min(config.max_bracket);
    loop {
        if g(hi)? >= 0.0 {
            return Ok((lo, hi));
        }
        if hi >= config.max_bracket {
            return Err(Error::Unreachable {
                target,
                supremum: reference_bed(config.max_bracket, tissue, config)?,
                max_bracket: config.max_bracket,
            });
        }
        lo = hi;
        hi = (hi * 2.0).min(config.max_bracket);
    }
}

/// Takes the first upward sign change on the grid when there is one;
/// otherwise refines the grid minimum of |g| by golden section.
fn solve_non_monotone<G>(g: &G, grid: &[f64], values: &[f64], target: f64) -> Result<(f64, f64)>
where
    G: Fn(f64) -> Result<f64>,
{
    let mut prev = (0.0, -target);
    for (&n, &v) in grid.iter().zip(values) {
        if prev.1 < 0.0 && v >= 0.0 {
            let (x, gx) = bisect(g, prev.0, n)?;
            return Ok((x, gx.abs()));
        }
        prev = (n, v);
    }
    let best = values
        .iter()
        .enumerate()
        .min_by(|a, b| a.1.abs().total_cmp(&b.1.abs()))
        .map(|(i, _)| i)
        .unwrap_or(0);
    let a = if best == 0 { 0.0 } else { grid[best - 1] };
    let b = grid[(best + 1).min(grid.len() - 1)];
    golden_section_min(|n| g(n).map(f64::abs), a, b, 1e-12 * b.max(1.0))
}

/// Compares the continuous reference arm with the same arm on the real
/// weekday calendar (rounded fraction count).
fn calendar_residual(
    n0: f64,
    target: f64,
    tissue: &TissueParams,
    config: &SolverConfig,
) -> Result<Option<Warning>> {
    if config.reference_week != 5 || n0 <= 0.0 || n0 > 1e6 {
        return Ok(None);
    }
    let whole = (n0.round() as u32).max(1);
    let overall = resolve_timeline(&[TreatmentCourse::new(whole, config.d_ref)])?.overall_time;
    let (geometric, _) = geometric_term(n0, config.d_ref, 1, None, tissue)?;
    let calendar_bed = geometric - deficit(f64::from(overall), tissue)?;
    let diff = (calendar_bed - target).abs();
    Ok((diff > CALENDAR_RESIDUAL_WARN).then(|| {
        Warning::new(
            WarningCode::CalendarResidual,
            format!(
                "reference BED on the weekday calendar ({whole} fractions, T = {overall} d) \
                 differs from the plan by {diff:.3} Gy"
            ),
        )
    }))
}

/// Rebuilds the reference arm from the solver's answer and returns the
/// |BED difference| against the plan.
pub fn bed_equivalence_roundtrip(
    courses: &[TreatmentCourse],
    tissue: &TissueParams,
    config: &SolverConfig,
) -> Result<f64> {
    let solved = equivalent_dose(courses, tissue, config)?;
    let plan = bed(courses, tissue)?.breakdown.total_bed;
    let n_ref = solved.eqd / config.d_ref;
    Ok((reference_bed(n_ref, tissue, config)? - plan).abs())
}

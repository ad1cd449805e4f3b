//! Treatment courses and the weekday calendar they resolve to.
//!
//! Day 1 is a Monday and holds the first fraction of the first course.
//! Fractions are delivered on weekdays only (`day % 7` in `1..=5`).

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::tissue::TissueParams;

/// Minimum inter-fraction interval for multi-fraction days, hours (inclusive).
pub const MIN_INTERVAL_HOURS: f64 = 6.0;
/// Maximum weekday interruptions per course.
pub const MAX_INTERRUPTION_DAYS: u32 = 20;
/// Gaps longer than this many days get a warning.
pub const LONG_GAP_DAYS: u32 = 60;

/// One fractionation prescription.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TreatmentCourse {
    /// Fraction count.
    pub n: u32,
    /// Dose per fraction, Gy.
    pub d: f64,
    #[serde(default = "one")]
    pub m_per_day: u32,
    /// Interval between fractions on the same day, hours.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub delta_t: Option<f64>,
    /// Weekday interruptions during the course.
    #[serde(default)]
    pub ja: u32,
    /// Whole days between the last fraction and the next course's first.
    #[serde(default)]
    pub gap_after: u32,
}

fn one() -> u32 {
    1
}

impl TreatmentCourse {
    pub fn new(n: u32, d: f64) -> Self {
        TreatmentCourse {
            n,
            d,
            m_per_day: 1,
            delta_t: None,
            ja: 0,
            gap_after: 0,
        }
    }

    pub fn per_day(mut self, m_per_day: u32, delta_t: f64) -> Self {
        self.m_per_day = m_per_day;
        self.delta_t = Some(delta_t);
        self
    }

    pub fn interruptions(mut self, ja: u32) -> Self {
        self.ja = ja;
        self
    }

    pub fn gap_after(mut self, days: u32) -> Self {
        self.gap_after = days;
        self
    }

    pub fn total_dose(&self) -> f64 {
        f64::from(self.n) * self.d
    }

    fn treatment_days(&self) -> u32 {
        self.n.div_ceil(self.m_per_day.max(1))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Severity {
    Error,
    Warning,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Rule {
    EmptyPlan,
    FractionCount,
    DosePerFraction,
    FractionsPerDay,
    InterFractionInterval,
    InterruptionDays,
    HighDoseMultiFraction,
    LongGap,
}

impl Rule {
    /// Stable snake_case identifier, as serialized.
    pub fn as_str(self) -> &'static str {
        match self {
            Rule::EmptyPlan => "empty_plan",
            Rule::FractionCount => "fraction_count",
            Rule::DosePerFraction => "dose_per_fraction",
            Rule::FractionsPerDay => "fractions_per_day",
            Rule::InterFractionInterval => "inter_fraction_interval",
            Rule::InterruptionDays => "interruption_days",
            Rule::HighDoseMultiFraction => "high_dose_multi_fraction",
            Rule::LongGap => "long_gap",
        }
    }
}

/// One rule violation found by [`validate_courses`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Finding {
    pub severity: Severity,
    pub rule: Rule,
    /// Index into the course list, when the finding concerns one course.
    pub course: Option<usize>,
    pub field: String,
    pub message: String,
}

impl Finding {
    fn error(rule: Rule, course: usize, field: &str, message: String) -> Self {
        Finding {
            severity: Severity::Error,
            rule,
            course: Some(course),
            field: field.into(),
            message,
        }
    }

    pub fn is_error(&self) -> bool {
        self.severity == Severity::Error
    }

    pub fn field_path(&self) -> String {
        match self.course {
            Some(i) => format!("courses[{i}].{}", self.field),
            None => self.field.clone(),
        }
    }
}

impl fmt::Display for Finding {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.field_path(), self.message)
    }
}

/// Tissue-independent rule checks.
fn structural_findings(courses: &[TreatmentCourse]) -> Vec<Finding> {
    let mut out = Vec::new();
    if courses.is_empty() {
        out.push(Finding {
            severity: Severity::Error,
            rule: Rule::EmptyPlan,
            course: None,
            field: "courses".into(),
            message: "at least one course is required".into(),
        });
    }
    for (i, c) in courses.iter().enumerate() {
        if c.n < 1 {
            out.push(Finding::error(
                Rule::FractionCount,
                i,
                "n",
                "fraction count must be at least 1".into(),
            ));
        }
        if !(c.d > 0.0 && c.d.is_finite()) {
            out.push(Finding::error(
                Rule::DosePerFraction,
                i,
                "d",
                format!("dose per fraction must be > 0 Gy (got {})", c.d),
            ));
        }
        if !(1..=3).contains(&c.m_per_day) {
            out.push(Finding::error(
                Rule::FractionsPerDay,
                i,
                "m_per_day",
                format!("fractions per day must be 1, 2 or 3 (got {})", c.m_per_day),
            ));
        }
        if c.m_per_day > 1 {
            match c.delta_t {
                None => out.push(Finding::error(
                    Rule::InterFractionInterval,
                    i,
                    "delta_t",
                    "inter-fraction interval is required with more than one fraction per day"
                        .into(),
                )),
                Some(dt) if !(dt >= MIN_INTERVAL_HOURS && dt.is_finite()) => {
                    out.push(Finding::error(
                        Rule::InterFractionInterval,
                        i,
                        "delta_t",
                        format!(
                            "inter-fraction interval must be at least {MIN_INTERVAL_HOURS} h \
                             (got {dt} h)"
                        ),
                    ))
                }
                _ => {}
            }
        }
        if c.ja > MAX_INTERRUPTION_DAYS {
            out.push(Finding::error(
                Rule::InterruptionDays,
                i,
                "ja",
                format!(
                    "{} interruption days exceeds the {MAX_INTERRUPTION_DAYS}-day limit; \
                     the models are not valid beyond 20 days off",
                    c.ja
                ),
            ));
        }
        if c.gap_after > LONG_GAP_DAYS && i + 1 < courses.len() {
            out.push(Finding {
                severity: Severity::Warning,
                rule: Rule::LongGap,
                course: Some(i),
                field: "gap_after".into(),
                message: format!("{}-day gap: long-gap regime, review D_rec", c.gap_after),
            });
        }
    }
    out
}

/// Returns every rule violation, errors and warnings alike.
pub fn validate_courses(courses: &[TreatmentCourse], tissue: &TissueParams) -> Vec<Finding> {
    let mut out = structural_findings(courses);
    let d_t = tissue.threshold_dose();
    for (i, c) in courses.iter().enumerate() {
        if c.d > d_t && c.m_per_day > 1 {
            out.push(Finding::error(
                Rule::HighDoseMultiFraction,
                i,
                "m_per_day",
                format!(
                    "{} Gy per fraction exceeds the LQL threshold {d_t} Gy of `{}`; \
                     only one fraction per day is permitted",
                    c.d, tissue.name
                ),
            ));
        }
    }
    out
}

/// First and last fraction day of one course.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct CourseSpan {
    pub first_day: u32,
    pub last_day: u32,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ScheduleTimeline {
    pub courses: Vec<CourseSpan>,
    /// Overall time T in days, first to last fraction inclusive.
    pub overall_time: u32,
}

pub fn is_weekday(day: u32) -> bool {
    (1..=5).contains(&(day % 7))
}

fn next_weekday(mut day: u32) -> u32 {
    while !is_weekday(day) {
        day += 1;
    }
    day
}

/// Walks the calendar and returns the fraction days of each course.
/// Interruption days are skipped consecutively right after the course's
/// midpoint treatment day.
pub fn treatment_days(courses: &[TreatmentCourse]) -> Result<Vec<Vec<u32>>> {
    if let Some(f) = structural_findings(courses)
        .into_iter()
        .find(Finding::is_error)
    {
        return Err(Error::Invalid(f));
    }
    let mut out = Vec::with_capacity(courses.len());
    let mut day = 1;
    for c in courses {
        let total = c.treatment_days();
        let midpoint = total.div_ceil(2);
        let mut days = Vec::with_capacity(total as usize);
        for k in 1..=total {
            day = next_weekday(day);
            days.push(day);
            day += 1;
            if k == midpoint && k < total {
                for _ in 0..c.ja {
                    day = next_weekday(day) + 1;
                }
            }
        }
        let last = *days.last().expect("n >= 1");
        day = last + c.gap_after + 1;
        out.push(days);
    }
    Ok(out)
}

pub fn resolve_timeline(courses: &[TreatmentCourse]) -> Result<ScheduleTimeline> {
    let days = treatment_days(courses)?;
    let spans: Vec<CourseSpan> = days
        .iter()
        .map(|d| CourseSpan {
            first_day: d[0],
            last_day: *d.last().unwrap(),
        })
        .collect();
    let overall_time = spans.last().map(|s| s.last_day).unwrap_or(1);
    Ok(ScheduleTimeline {
        courses: spans,
        overall_time,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tissue::TissueLibrary;

    fn t(courses: &[TreatmentCourse]) -> u32 {
        resolve_timeline(courses).unwrap().overall_time
    }

    #[test]
    fn single_fraction_is_one_day() {
        for m in 1..=3 {
            let c = if m == 1 {
                TreatmentCourse::new(1, 8.0)
            } else {
                TreatmentCourse::new(1, 2.0).per_day(m, 6.0)
            };
            assert_eq!(t(&[c]), 1);
        }
    }

    #[test]
    fn thirty_fractions_take_forty_days() {
        let days = treatment_days(&[TreatmentCourse::new(30, 2.0)]).unwrap();
        let expected: Vec<u32> = [1, 8, 15, 22, 29, 36]
            .iter()
            .flat_map(|&w| w..w + 5)
            .collect();
        assert_eq!(days[0], expected);
        assert_eq!(t(&[TreatmentCourse::new(30, 2.0)]), 40);
    }

    #[test]
    fn ten_fractions_take_twelve_days() {
        assert_eq!(t(&[TreatmentCourse::new(10, 3.0)]), 12);
    }

    #[test]
    fn bifractionated_counts_days_not_fractions() {
        // 22 fractions at 2/day -> 11 treatment days: 1-5, 8-12, 15
        assert_eq!(t(&[TreatmentCourse::new(22, 1.8).per_day(2, 6.0)]), 15);
    }

    #[test]
    fn interruptions_follow_midpoint() {
        // 10 fractions, midpoint day 5 (Fri); 2 weekdays off -> Mon 8, Tue 9 skipped
        let days = treatment_days(&[TreatmentCourse::new(10, 3.0).interruptions(2)]).unwrap();
        assert_eq!(days[0], vec![1, 2, 3, 4, 5, 10, 11, 12, 15, 16]);
    }

    #[test]
    fn gap_counts_calendar_days() {
        // 1x8 on Monday, 30 days gap -> day 32 is a Tuesday
        let tl = resolve_timeline(&[
            TreatmentCourse::new(1, 8.0).gap_after(30),
            TreatmentCourse::new(1, 8.0),
        ])
        .unwrap();
        assert_eq!(tl.courses[1].first_day, 32);
        assert_eq!(tl.overall_time, 32);
        // landing on Saturday rolls to Monday
        let tl = resolve_timeline(&[
            TreatmentCourse::new(1, 8.0).gap_after(4),
            TreatmentCourse::new(1, 8.0),
        ])
        .unwrap();
        assert_eq!(tl.courses[1].first_day, 8);
    }

    #[test]
    fn invalid_course_is_reported_with_index() {
        let err = resolve_timeline(&[TreatmentCourse::new(5, 2.0), TreatmentCourse::new(0, 2.0)])
            .unwrap_err();
        match err {
            Error::Invalid(f) => {
                assert_eq!(f.rule, Rule::FractionCount);
                assert_eq!(f.field_path(), "courses[1].n");
            }
            e => panic!("{e:?}"),
        }
    }

    #[test]
    fn interval_and_interruption_limits() {
        let lib = TissueLibrary::seed();
        let cord = lib.get("spinal cord").unwrap();
        assert!(
            validate_courses(&[TreatmentCourse::new(20, 1.5).per_day(2, 6.0)], cord).is_empty()
        );
        let f = validate_courses(&[TreatmentCourse::new(20, 1.5).per_day(2, 5.9)], cord);
        assert_eq!(f.len(), 1);
        assert_eq!(f[0].rule, Rule::InterFractionInterval);
        let f = validate_courses(&[TreatmentCourse::new(20, 2.0).interruptions(21)], cord);
        assert_eq!(f[0].rule, Rule::InterruptionDays);
        assert!(f[0].is_error());
        assert!(
            validate_courses(&[TreatmentCourse::new(20, 2.0).interruptions(20)], cord).is_empty()
        );
        assert!(validate_courses(&[TreatmentCourse::new(30, 2.0)], cord).is_empty());
    }

    #[test]
    fn high_dose_multi_fraction_is_rejected() {
        let lib = TissueLibrary::seed();
        let cord = lib.get("spinal cord").unwrap();
        let f = validate_courses(&[TreatmentCourse::new(4, 5.0).per_day(2, 8.0)], cord);
        assert_eq!(f[0].rule, Rule::HighDoseMultiFraction);
        // at the threshold the LQ branch applies, multi-fraction allowed
        assert!(validate_courses(&[TreatmentCourse::new(4, 4.0).per_day(2, 8.0)], cord).is_empty());
    }

    #[test]
    fn long_gap_is_a_warning() {
        let lib = TissueLibrary::seed();
        let cord = lib.get("spinal cord").unwrap();
        let f = validate_courses(
            &[
                TreatmentCourse::new(1, 8.0).gap_after(61),
                TreatmentCourse::new(1, 8.0),
            ],
            cord,
        );
        assert_eq!(f.len(), 1);
        assert_eq!(f[0].severity, Severity::Warning);
        assert!(f[0].message.contains("long-gap regime"));
    }

    #[test]
    fn missing_interval_is_an_error() {
        let mut c = TreatmentCourse::new(10, 1.5);
        c.m_per_day = 2;
        let f = structural_findings(&[c]);
        assert_eq!(f[0].rule, Rule::InterFractionInterval);
    }

    #[test]
    fn rule_names_match_serde() {
        for r in [
            Rule::EmptyPlan,
            Rule::FractionCount,
            Rule::DosePerFraction,
            Rule::FractionsPerDay,
            Rule::InterFractionInterval,
            Rule::InterruptionDays,
            Rule::HighDoseMultiFraction,
            Rule::LongGap,
        ] {
            assert_eq!(serde_json::to_value(r).unwrap(), r.as_str());
        }
    }
}

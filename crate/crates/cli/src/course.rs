//! Compact course syntax: `NxD[@m/day[/Hh]][+jaJ][gapG]`.
//!
//! A plan is a whitespace-separated list of course tokens. A bare `gapG`
//! token sets the gap after the preceding course, so `1x8 gap30 1x8` is two
//! single fractions a month apart. `22x1.8@2/day` is hyperfractionated with
//! the default interval; `22x1.8@2/day/8h` sets it explicitly.

use std::fmt;
use std::sync::LazyLock;

use eqdose_core::TreatmentCourse;
use regex::Regex;

static COURSE: LazyLock<Regex> = LazyLock::new(|| {
    Regex::new(
        r"(?x)^
        (?P<n>\d+) [xX] (?P<d>\d+(?:\.\d*)?|\.\d+)
        (?: @ (?P<m>\d+) /day (?: / (?P<dt>\d+(?:\.\d*)?) h )? )?
        (?: \+ja (?P<ja>\d+) )?
        (?: gap (?P<gap>\d+) )?
        $",
    )
    .unwrap()
});

static GAP: LazyLock<Regex> = LazyLock::new(|| Regex::new(r"^gap(\d+)$").unwrap());

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SyntaxError {
    pub token: String,
    pub reason: &'static str,
}

impl fmt::Display for SyntaxError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "cannot read course `{}`: {} (expected NxD[@m/day[/Hh]][+jaJ][gapG])",
            self.token, self.reason
        )
    }
}

impl std::error::Error for SyntaxError {}

fn number<T: std::str::FromStr>(token: &str, s: &str) -> Result<T, SyntaxError> {
    s.parse().map_err(|_| SyntaxError {
        token: token.into(),
        reason: "number out of range",
    })
}

/// Parses every token of every `--course` value, in order.
pub fn parse_plan<S: AsRef<str>>(
    values: &[S],
    default_delta_t: f64,
) -> Result<Vec<TreatmentCourse>, SyntaxError> {
    let mut courses: Vec<TreatmentCourse> = Vec::new();
    for token in values.iter().flat_map(|v| v.as_ref().split_whitespace()) {
        if let Some(g) = GAP.captures(token) {
            let days = number(token, &g[1])?;
            let last = courses.last_mut().ok_or(SyntaxError {
                token: token.into(),
                reason: "a gap must follow a course",
            })?;
            last.gap_after = days;
            continue;
        }
        let c = COURSE.captures(token).ok_or(SyntaxError {
            token: token.into(),
            reason: "unrecognised syntax",
        })?;
        let mut course = TreatmentCourse::new(number(token, &c["n"])?, number(token, &c["d"])?);
        if let Some(m) = c.name("m") {
            let dt = match c.name("dt") {
                Some(dt) => number(token, dt.as_str())?,
                None => default_delta_t,
            };
            course = course.per_day(number(token, m.as_str())?, dt);
            if course.m_per_day == 1 {
                course.delta_t = None;
            }
        }
        if let Some(ja) = c.name("ja") {
            course.ja = number(token, ja.as_str())?;
        }
        if let Some(gap) = c.name("gap") {
            course.gap_after = number(token, gap.as_str())?;
        }
        courses.push(course);
    }
    Ok(courses)
}

//! Cumulative dose-volume histograms: parsing and dose summaries.
//!
//! Input is two delimited columns, dose (Gy) and volume (fraction or %).
//! The delimiter (comma, semicolon, tab or whitespace) is detected from the
//! first data row. An optional header row is allowed; a `%` in it, or any
//! volume above 1, marks the volume column as percent. Lines starting with
//! `#` are ignored.

use serde::{Deserialize, Serialize};

use crate::error::{Warning, WarningCode};

/// Volume fraction threshold for D5%.
const D5_VOLUME: f64 = 0.05;
const RENORMALIZE_TOL: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum DvhError {
    #[error("line {line}: {reason}")]
    Row { line: usize, reason: String },
    #[error("line {line}: dose must be strictly increasing")]
    NonMonotoneDose { line: usize },
    #[error("line {line}: cumulative volume must not increase with dose")]
    IncreasingVolume { line: usize },
    #[error("a DVH needs at least 2 points, found {0}")]
    TooFewPoints(usize),
    #[error("DVH starts at zero volume")]
    ZeroVolume,
    #[error("fraction count must be at least 1")]
    FractionCount,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DvhPoint {
    /// Gy
    pub dose: f64,
    /// Fraction of the structure receiving at least `dose`, in [0, 1].
    pub volume: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DvhCurve {
    pub structure: String,
    pub points: Vec<DvhPoint>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ParsedDvh {
    pub curve: DvhCurve,
    pub warnings: Vec<Warning>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DvhSummary {
    pub mean: f64,
    pub d5: f64,
    pub dmax: f64,
    pub n_fractions: u32,
    pub per_fraction_mean: f64,
    pub per_fraction_d5: f64,
    pub per_fraction_dmax: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum Delimiter {
    Char(char),
    Whitespace,
}

impl Delimiter {
    fn detect(line: &str) -> Self {
        for c in [';', '\t', ','] {
            if line.contains(c) {
                return Delimiter::Char(c);
            }
        }
        Delimiter::Whitespace
    }

    fn split<'a>(&self, line: &'a str) -> Vec<&'a str> {
        match self {
            Delimiter::Char(c) => line.split(*c).map(str::trim).collect(),
            Delimiter::Whitespace => line.split_whitespace().collect(),
        }
    }
}

fn parse_number(field: &str, delimiter: Delimiter) -> Option<f64> {
    let v = if delimiter == Delimiter::Char(';') {
        // semicolon files commonly use a decimal comma
        field.replace(',', ".").parse::<f64>().ok()
    } else {
        field.parse::<f64>().ok()
    }?;
    v.is_finite().then_some(v)
}

/// Parses a two-column cumulative DVH.
pub fn parse_dvh(document: &str, structure: &str) -> Result<ParsedDvh, DvhError> {
    let mut delimiter = None;
    let mut percent = false;
    let mut first_row = true;
    let mut raw: Vec<(usize, f64, f64)> = Vec::new();

    for (idx, line) in document.lines().enumerate() {
        let line_no = idx + 1;
        let trimmed = line.trim();
        if trimmed.is_empty() || trimmed.starts_with('#') {
            continue;
        }
        let delim = *delimiter.get_or_insert_with(|| Delimiter::detect(trimmed));
        let numbers: Option<Vec<f64>> = delim
            .split(trimmed)
            .iter()
            .filter(|f| !f.is_empty())
            .map(|f| parse_number(f, delim))
            .collect();
        match numbers {
            Some(v) if v.len() == 2 => raw.push((line_no, v[0], v[1])),
            Some(v) => {
                return Err(DvhError::Row {
                    line: line_no,
                    reason: format!("expected 2 columns, found {}", v.len()),
                })
            }
            None if first_row => {
                // header; data rows pick their own delimiter
                percent = trimmed.contains('%');
                delimiter = None;
            }
            None => {
                return Err(DvhError::Row {
                    line: line_no,
                    reason: format!("not a numeric dose/volume pair: `{trimmed}`"),
                })
            }
        }
        first_row = false;
    }

    if raw.len() < 2 {
        return Err(DvhError::TooFewPoints(raw.len()));
    }
    if raw.iter().any(|&(_, _, v)| v > 1.0 + 1e-9) {
        percent = true;
    }
    let scale = if percent { 100.0 } else { 1.0 };

    let mut points = Vec::with_capacity(raw.len());
    for (i, &(line, dose, volume)) in raw.iter().enumerate() {
        if dose < 0.0 {
            return Err(DvhError::Row {
                line,
                reason: format!("negative dose {dose}"),
            });
        }
        if volume < 0.0 {
            return Err(DvhError::Row {
                line,
                reason: format!("negative volume {volume}"),
            });
        }
        if i > 0 {
            let (_, prev_dose, prev_volume) = raw[i - 1];
            if dose <= prev_dose {
                return Err(DvhError::NonMonotoneDose { line });
            }
            if volume > prev_volume {
                return Err(DvhError::IncreasingVolume { line });
            }
        }
        points.push(DvhPoint {
            dose,
            volume: volume / scale,
        });
    }

    let mut warnings = Vec::new();
    let first = points[0].volume;
    if first <= 0.0 {
        return Err(DvhError::ZeroVolume);
    }
    if (first - 1.0).abs() > RENORMALIZE_TOL {
        for p in &mut points {
            p.volume /= first;
        }
        warnings.push(Warning::new(
            WarningCode::VolumeRenormalized,
            format!("first volume fraction was {first}; curve renormalized to start at 1"),
        ));
    }

    Ok(ParsedDvh {
        curve: DvhCurve {
            structure: structure.to_string(),
            points,
        },
        warnings,
    })
}

impl DvhCurve {
    /// Mean dose: trapezoidal differential DVH, with any volume left at
    /// the last point assigned the last dose.
    pub fn mean_dose(&self) -> f64 {
        let p = &self.points;
        let mut total = 0.0;
        for w in p.windows(2) {
            total += (w[0].volume - w[1].volume) * 0.5 * (w[0].dose + w[1].dose);
        }
        let last = p[p.len() - 1];
        (total + last.volume * last.dose) / p[0].volume
    }

    /// Smallest dose at which the cumulative volume falls to 5 %,
    /// interpolated linearly between the bracketing points.
    pub fn d5(&self) -> f64 {
        let p = &self.points;
        match p.iter().position(|q| q.volume <= D5_VOLUME) {
            None => self.dmax(),
            Some(0) => p[0].dose,
            Some(i) => {
                let (a, b) = (p[i - 1], p[i]);
                a.dose + (a.volume - D5_VOLUME) / (a.volume - b.volume) * (b.dose - a.dose)
            }
        }
    }

    pub fn dmax(&self) -> f64 {
        self.points[self.points.len() - 1].dose
    }
}

pub fn summarize(curve: &DvhCurve, n_fractions: u32) -> Result<DvhSummary, DvhError> {
    if n_fractions < 1 {
        return Err(DvhError::FractionCount);
    }
    if curve.points.len() < 2 {
        return Err(DvhError::TooFewPoints(curve.points.len()));
    }
    let (mean, d5, dmax) = (curve.mean_dose(), curve.d5(), curve.dmax());
    let n = f64::from(n_fractions);
    Ok(DvhSummary {
        mean,
        d5,
        dmax,
        n_fractions,
        per_fraction_mean: mean / n,
        per_fraction_d5: d5 / n,
        per_fraction_dmax: dmax / n,
    })
}

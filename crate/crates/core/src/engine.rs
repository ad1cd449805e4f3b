//! Request and report types shared by the CLI (`--json`) and the HTTP
//! service, and the [`Engine`] that evaluates them against one loaded
//! tissue library.

use serde::{Deserialize, Serialize};

use crate::dvh::{parse_dvh, summarize, DvhPoint, DvhSummary};
use crate::error::{Error, Result, Warning};
use crate::outcome::{estimate_outcomes, OutcomeEstimate, OutcomeSelection};
use crate::radiobiology::{bed, BedBreakdown};
use crate::schedule::{ScheduleTimeline, TreatmentCourse};
use crate::solver::{equivalent_dose, EquivalenceResult, SolverConfig};
use crate::tissue::{TissueKind, TissueLibrary, TissueParams};

pub const ENGINE_VERSION: &str = env!("CARGO_PKG_VERSION");

/// A tissue and a course sequence, plus optional solver overrides.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PlanRequest {
    pub tissue: String,
    pub courses: Vec<TreatmentCourse>,
    #[serde(default)]
    pub config: SolverConfig,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BedReport {
    pub tissue: String,
    pub kind: TissueKind,
    #[serde(flatten)]
    pub breakdown: BedBreakdown,
    pub timeline: ScheduleTimeline,
    pub warnings: Vec<Warning>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EquivalenceReport {
    pub tissue: String,
    pub d_ref: f64,
    #[serde(flatten)]
    pub result: EquivalenceResult,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OutcomeReport {
    pub tissue: String,
    pub d_ref: f64,
    #[serde(flatten)]
    pub estimate: OutcomeEstimate,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DvhRequest {
    /// Two-column DVH text.
    pub document: String,
    #[serde(default)]
    pub structure: Option<String>,
    pub n_fractions: u32,
    /// Include the parsed points in the report.
    #[serde(default)]
    pub echo: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DvhReport {
    pub structure: String,
    #[serde(flatten)]
    pub summary: DvhSummary,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub points: Option<Vec<DvhPoint>>,
    pub warnings: Vec<Warning>,
}

#[derive(Debug, Clone)]
pub struct Engine {
    library: TissueLibrary,
}

impl Engine {
    pub fn new(library: TissueLibrary) -> Self {
        Engine { library }
    }

    pub fn library(&self) -> &TissueLibrary {
        &self.library
    }

    pub fn tissue(&self, name: &str) -> Result<&TissueParams> {
        self.library
            .get(name)
            .ok_or_else(|| Error::UnknownTissue(name.to_string()))
    }

    pub fn tissues(&self) -> &[TissueParams] {
        self.library.tissues()
    }

    pub fn bed(&self, req: &PlanRequest) -> Result<BedReport> {
        let tissue = self.tissue(&req.tissue)?;
        let eval = bed(&req.courses, tissue)?;
        Ok(BedReport {
            tissue: tissue.name.clone(),
            kind: tissue.kind,
            breakdown: eval.breakdown,
            timeline: eval.timeline,
            warnings: eval.warnings,
        })
    }

    pub fn equivalent(&self, req: &PlanRequest) -> Result<EquivalenceReport> {
        let tissue = self.tissue(&req.tissue)?;
        let result = equivalent_dose(&req.courses, tissue, &req.config)?;
        Ok(EquivalenceReport {
            tissue: tissue.name.clone(),
            d_ref: req.config.d_ref,
            result,
        })
    }

    pub fn ntcp(&self, req: &PlanRequest) -> Result<OutcomeReport> {
        self.outcome(
            req,
            OutcomeSelection {
                ntcp: true,
                incidence: false,
            },
        )
    }

    pub fn risk(&self, req: &PlanRequest) -> Result<OutcomeReport> {
        self.outcome(
            req,
            OutcomeSelection {
                ntcp: false,
                incidence: true,
            },
        )
    }

    fn outcome(&self, req: &PlanRequest, select: OutcomeSelection) -> Result<OutcomeReport> {
        let tissue = self.tissue(&req.tissue)?;
        let estimate = estimate_outcomes(&req.courses, tissue, &req.config, select)?;
        Ok(OutcomeReport {
            tissue: tissue.name.clone(),
            d_ref: req.config.d_ref,
            estimate,
        })
    }

    pub fn dvh_summarize(&self, req: &DvhRequest) -> Result<DvhReport> {
        dvh_report(req)
    }
}

/// DVH summaries need no tissue library.
pub fn dvh_report(req: &DvhRequest) -> Result<DvhReport> {
    let structure = req.structure.clone().unwrap_or_else(|| "structure".into());
    let parsed = parse_dvh(&req.document, &structure)?;
    let summary = summarize(&parsed.curve, req.n_fractions)?;
    Ok(DvhReport {
        structure,
        summary,
        points: req.echo.then(|| parsed.curve.points.clone()),
        warnings: parsed.warnings,
    })
}

/// Error body on the wire.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ApiError {
    pub code: String,
    pub message: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub field_path: Option<String>,
}

impl From<&Error> for ApiError {
    fn from(e: &Error) -> Self {
        ApiError {
            code: e.code().to_string(),
            message: e.to_string(),
            field_path: e.field_path(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Payload<T> {
    Result(T),
    Error(ApiError),
}

/// Response wrapper used by `--json` output and the HTTP service. Exactly
/// one of `result` and `error` is present.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ApiEnvelope<T> {
    pub engine_version: String,
    pub library_checksum: String,
    #[serde(flatten)]
    pub payload: Payload<T>,
}

impl Engine {
    pub fn envelope<T>(&self, outcome: Result<T>) -> ApiEnvelope<T> {
        self.wrap(match outcome {
            Ok(v) => Payload::Result(v),
            Err(e) => Payload::Error(ApiError::from(&e)),
        })
    }

    pub fn wrap<T>(&self, payload: Payload<T>) -> ApiEnvelope<T> {
        ApiEnvelope {
            engine_version: ENGINE_VERSION.to_string(),
            library_checksum: self.library.checksum().to_string(),
            payload,
        }
    }
}

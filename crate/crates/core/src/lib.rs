//! Biologically effective dose and equivalent-dose engine for
//! fractionated radiotherapy.
//!
//! BED is evaluated under the linear-quadratic model (with incomplete
//! repair between same-day fractions) below a per-tissue threshold dose and
//! under the linear-quadratic-linear model above it, minus tumour
//! repopulation or normal-tissue recovery over the overall treatment time.
//! [`solver::equivalent_dose`] inverts BED to a total dose at a reference
//! dose per fraction; [`outcome`] adds Lyman NTCP and induced-cancer
//! incidence on top of it.
//!
//! ```
//! use eqdose_core::{equivalent_dose, SolverConfig, TissueLibrary, TreatmentCourse};
//!
//! let lib = TissueLibrary::seed();
//! let cord = lib.get("spinal cord").unwrap();
//! let r = equivalent_dose(&[TreatmentCourse::new(1, 8.0)], cord, &SolverConfig::default()).unwrap();
//! assert!((r.eqd - 16.0).abs() < 1e-6);
//! ```

pub mod dvh;
pub mod engine;
pub mod error;
pub mod outcome;
pub mod radiobiology;
pub mod roots;
pub mod schedule;
pub mod solver;
pub mod table2;
pub mod tissue;

pub use engine::{ApiEnvelope, ApiError, Engine, Payload, ENGINE_VERSION};
pub use error::{Error, ErrorKind, Result, Warning, WarningCode};
pub use outcome::{gaussian_cdf, induced_cancer_incidence, ntcp, OutcomeEstimate};
pub use radiobiology::{
    bed, classic_eqd, gap_penalty, incomplete_repair_factor, nsd_tolerance, BedBreakdown,
};
pub use schedule::{resolve_timeline, validate_courses, ScheduleTimeline, TreatmentCourse};
pub use solver::{
    bed_equivalence_roundtrip, cost, equivalent_dose, EquivalenceResult, SolverConfig,
};
pub use tissue::{load_library, TissueKind, TissueLibrary, TissueParams};

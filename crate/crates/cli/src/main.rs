//! `eqdose` — BED and equivalent-dose calculator.
//!
//! Exit codes: 0 success, 2 invalid input (bad syntax, rule violation,
//! unknown tissue, unreadable library), 3 solver failure.

mod course;
mod human;

use std::io::Read;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use eqdose_core::engine::{DvhRequest, PlanRequest};
use eqdose_core::radiobiology::{gap_penalty, nsd_tolerance};
use eqdose_core::table2;
use eqdose_core::{
    ApiEnvelope, ApiError, Engine, Error, ErrorKind, Payload, SolverConfig, TissueLibrary,
};
use serde::Serialize;

const EXIT_VALIDATION: u8 = 2;
const EXIT_SOLVER: u8 = 3;

#[derive(Parser)]
#[command(
    name = "eqdose",
    version,
    about = "BED and equivalent-dose calculator for fractionated radiotherapy"
)]
struct Cli {
    /// Tissue library file; the built-in seed library when omitted.
    #[arg(long, global = true, env = "EQDOSE_TISSUES")]
    tissues: Option<PathBuf>,
    /// Print the JSON envelope instead of a table.
    #[arg(long, global = true)]
    json: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Biologically effective dose of a plan.
    Bed(PlanArgs),
    /// Equivalent total dose at the reference dose per fraction.
    Equiv(PlanArgs),
    /// Lyman NTCP at the plan's equivalent dose.
    Ntcp(PlanArgs),
    /// Induced-cancer incidence at the plan's equivalent dose.
    Risk(PlanArgs),
    /// Classical-column comparison against the reference table.
    Table2,
    /// Mean, D5% and maximum dose of a cumulative DVH.
    DvhSummarize(DvhArgs),
    /// List the loaded tissue library.
    Tissues,
    /// Power-law (NSD) tolerance dose.
    Nsd(NsdArgs),
    /// Dose recovered during a treatment interruption.
    GapPenalty(GapArgs),
}

#[derive(Args)]
struct PlanArgs {
    /// Tissue name from the library (case-insensitive).
    #[arg(long)]
    tissue: String,
    /// Courses, e.g. `10x3`, `22x1.8@2/day`, `1x8 gap30 1x8`, `20x2.5+ja5`.
    #[arg(long = "course", required = true, num_args = 1..)]
    courses: Vec<String>,
    /// Reference dose per fraction, Gy.
    #[arg(long)]
    d_ref: Option<f64>,
    /// Solver BED tolerance, Gy.
    #[arg(long)]
    tolerance: Option<f64>,
    /// Largest reference fraction count searched.
    #[arg(long)]
    max_bracket: Option<f64>,
    /// Reference fractions per week.
    #[arg(long)]
    reference_week: Option<u32>,
    /// Interval between same-day fractions when a course gives none, hours.
    #[arg(long, default_value_t = 6.0)]
    delta_t: f64,
}

#[derive(Args)]
struct DvhArgs {
    /// Two-column DVH file, or `-` for stdin.
    file: PathBuf,
    /// Number of fractions the plan is delivered in.
    #[arg(long)]
    fractions: u32,
    /// Structure name for the report.
    #[arg(long)]
    structure: Option<String>,
    /// Include the parsed points, printed bit-exactly.
    #[arg(long)]
    echo: bool,
}

#[derive(Args)]
struct NsdArgs {
    /// NSD constant, ret.
    #[arg(long)]
    nsd: f64,
    #[arg(long)]
    fractions: f64,
    /// Overall time, days.
    #[arg(long)]
    days: f64,
    #[arg(long, default_value_t = 0.24)]
    exp_n: f64,
    #[arg(long, default_value_t = 0.11)]
    exp_t: f64,
}

#[derive(Args)]
struct GapArgs {
    /// Days off treatment.
    #[arg(long)]
    days: f64,
    /// Recovered dose per day, Gy; taken from `--tissue` when omitted.
    #[arg(long, required_unless_present = "tissue")]
    d_prol: Option<f64>,
    #[arg(long)]
    tissue: Option<String>,
}

#[derive(Debug, Serialize)]
struct NsdReport {
    tolerance_dose: f64,
}

#[derive(Debug, Serialize)]
struct GapPenaltyReport {
    days: f64,
    d_prol: f64,
    penalty: f64,
}

/// Something a command produced that is not an engine error.
enum Failure {
    Engine(Error),
    Input(ApiError),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Engine(e)
    }
}

fn input_error(code: &str, message: String, field_path: Option<&str>) -> Failure {
    Failure::Input(ApiError {
        code: code.into(),
        message,
        field_path: field_path.map(str::to_string),
    })
}

impl PlanArgs {
    fn request(&self) -> Result<PlanRequest, Failure> {
        let courses = course::parse_plan(&self.courses, self.delta_t)
            .map_err(|e| input_error("course_syntax", e.to_string(), Some("courses")))?;
        let mut config = SolverConfig::default();
        if let Some(v) = self.d_ref {
            config.d_ref = v;
        }
        if let Some(v) = self.tolerance {
            config.tolerance = v;
        }
        if let Some(v) = self.max_bracket {
            config.max_bracket = v;
        }
        if let Some(v) = self.reference_week {
            config.reference_week = v;
        }
        Ok(PlanRequest {
            tissue: self.tissue.clone(),
            courses,
            config,
        })
    }
}

struct Ctx {
    engine: Engine,
    json: bool,
}

impl Ctx {
    /// Prints `outcome` in the selected format and maps it to an exit code.
    fn emit<T: Serialize>(
        &self,
        outcome: Result<T, Failure>,
        human: impl FnOnce(&T) -> String,
    ) -> ExitCode {
        let (payload, code) = match outcome {
            Ok(v) => (Payload::Result(v), ExitCode::SUCCESS),
            Err(Failure::Engine(e)) => {
                let code = match e.kind() {
                    ErrorKind::Validation => EXIT_VALIDATION,
                    ErrorKind::Solver => EXIT_SOLVER,
                };
                (Payload::Error(ApiError::from(&e)), ExitCode::from(code))
            }
            Err(Failure::Input(e)) => (Payload::Error(e), ExitCode::from(EXIT_VALIDATION)),
        };
        let envelope: ApiEnvelope<T> = self.engine.wrap(payload);
        if self.json {
            println!(
                "{}",
                serde_json::to_string_pretty(&envelope).expect("reports serialize")
            );
        } else {
            match &envelope.payload {
                Payload::Result(v) => print!("{}", human(v)),
                Payload::Error(e) => eprintln!("{}", human::error(e)),
            }
        }
        code
    }
}

fn read_dvh(path: &PathBuf) -> Result<String, Failure> {
    let mut text = String::new();
    let read = if path.as_os_str() == "-" {
        std::io::stdin().read_to_string(&mut text).map(|_| ())
    } else {
        std::fs::read_to_string(path).map(|t| text = t)
    };
    read.map_err(|e| {
        input_error(
            "unreadable_input",
            format!("cannot read {}: {e}", path.display()),
            None,
        )
    })?;
    Ok(text)
}

fn run(cli: Cli) -> ExitCode {
    let library = match &cli.tissues {
        Some(p) => TissueLibrary::from_path(p),
        None => Ok(TissueLibrary::seed()),
    };
    let library = match library {
        Ok(l) => l,
        Err(e) => {
            let e = Error::from(e);
            if cli.json {
                let envelope = ApiEnvelope::<()> {
                    engine_version: eqdose_core::ENGINE_VERSION.into(),
                    library_checksum: String::new(),
                    payload: Payload::Error(ApiError::from(&e)),
                };
                println!("{}", serde_json::to_string_pretty(&envelope).unwrap());
            } else {
                eprintln!("{}", human::error(&ApiError::from(&e)));
            }
            return ExitCode::from(EXIT_VALIDATION);
        }
    };
    let ctx = Ctx {
        engine: Engine::new(library),
        json: cli.json,
    };
    let e = &ctx.engine;
    match cli.command {
        Command::Bed(a) => ctx.emit(a.request().and_then(|r| Ok(e.bed(&r)?)), human::bed),
        Command::Equiv(a) => ctx.emit(
            a.request().and_then(|r| Ok(e.equivalent(&r)?)),
            human::equivalent,
        ),
        Command::Ntcp(a) => ctx.emit(a.request().and_then(|r| Ok(e.ntcp(&r)?)), human::outcome),
        Command::Risk(a) => ctx.emit(a.request().and_then(|r| Ok(e.risk(&r)?)), human::outcome),
        Command::Table2 => ctx.emit(
            table2::compare(e.library()).map_err(Failure::from),
            |rows| human::table2(rows),
        ),
        Command::DvhSummarize(a) => {
            let outcome = read_dvh(&a.file).and_then(|document| {
                Ok(e.dvh_summarize(&DvhRequest {
                    document,
                    structure: a.structure.clone(),
                    n_fractions: a.fractions,
                    echo: a.echo,
                })?)
            });
            ctx.emit(outcome, human::dvh)
        }
        Command::Tissues => ctx.emit(Ok(e.tissues().to_vec()), |t| human::tissues(t)),
        Command::Nsd(a) => {
            let outcome = nsd_tolerance(a.nsd, a.fractions, a.days, a.exp_n, a.exp_t)
                .map(|tolerance_dose| NsdReport { tolerance_dose })
                .map_err(Failure::from);
            ctx.emit(outcome, |r| {
                format!("NSD tolerance dose {:.1} Gy\n", r.tolerance_dose)
            })
        }
        Command::GapPenalty(a) => {
            let outcome = (|| {
                let d_prol = match (a.d_prol, &a.tissue) {
                    (Some(v), _) => v,
                    (None, Some(name)) => {
                        e.tissue(name)?
                            .d_prol
                            .ok_or_else(|| Error::MissingParameter {
                                tissue: name.clone(),
                                field: "d_prol",
                                purpose: "the gap penalty",
                            })?
                    }
                    (None, None) => unreachable!("clap requires one of them"),
                };
                let penalty = gap_penalty(a.days, d_prol)?;
                Ok(GapPenaltyReport {
                    days: a.days,
                    d_prol,
                    penalty,
                })
            })();
            ctx.emit(outcome, |r| {
                format!(
                    "{} days x {} Gy/day = {:.1} Gy recovered\n",
                    r.days, r.d_prol, r.penalty
                )
            })
        }
    }
}

fn main() -> ExitCode {
    run(Cli::parse())
}

//! Plain-text reports. Doses are rounded to 0.1 Gy; `--json` keeps full
//! precision.

use std::fmt::Write;

use eqdose_core::engine::{BedReport, DvhReport, EquivalenceReport, OutcomeReport};
use eqdose_core::table2::{LqlCell, RowComparison};
use eqdose_core::{ApiError, TissueKind, TissueParams, Warning};

fn kind(k: TissueKind) -> &'static str {
    match k {
        TissueKind::Target => "target",
        TissueKind::OrganAtRisk => "organ at risk",
    }
}

fn warnings(out: &mut String, ws: &[Warning]) {
    for w in ws {
        let code = serde_json::to_value(w.code).unwrap();
        let _ = writeln!(
            out,
            "warning[{}]: {}",
            code.as_str().unwrap_or("?"),
            w.message
        );
    }
}

pub fn error(e: &ApiError) -> String {
    match &e.field_path {
        Some(p) if !e.message.contains(p.as_str()) => {
            format!("error[{}] at {p}: {}", e.code, e.message)
        }
        _ => format!("error[{}]: {}", e.code, e.message),
    }
}

pub fn bed(r: &BedReport) -> String {
    let b = &r.breakdown;
    let mut s = String::new();
    let _ = writeln!(s, "tissue          {} ({})", r.tissue, kind(r.kind));
    let _ = writeln!(s, "geometric BED   {:.1} Gy", b.geometric_bed);
    let _ = writeln!(s, "  repair term   {:.1} Gy", b.repair_surcharge);
    let _ = writeln!(s, "deficit         {:.1} Gy", b.deficit);
    let _ = writeln!(
        s,
        "BED             {:.1} Gy{}",
        b.total_bed,
        if b.clamped { " (clamped)" } else { "" }
    );
    let spans: Vec<String> = r
        .timeline
        .courses
        .iter()
        .map(|c| format!("{}-{}", c.first_day, c.last_day))
        .collect();
    let _ = writeln!(
        s,
        "overall time    {} d (days {})",
        r.timeline.overall_time,
        spans.join(", ")
    );
    warnings(&mut s, &r.warnings);
    s
}

pub fn equivalent(r: &EquivalenceReport) -> String {
    let x = &r.result;
    let mut s = String::new();
    let _ = writeln!(s, "tissue          {}", r.tissue);
    let _ = writeln!(s, "plan BED        {:.1} Gy", x.target_bed);
    let _ = writeln!(s, "EQD{:<4}         {:.1} Gy", r.d_ref, x.eqd);
    let _ = writeln!(s, "fractions       {:.2} x {} Gy", x.n0, r.d_ref);
    warnings(&mut s, &x.warnings);
    s
}

pub fn outcome(r: &OutcomeReport) -> String {
    let x = &r.estimate;
    let mut s = String::new();
    let _ = writeln!(s, "tissue          {}", r.tissue);
    let _ = writeln!(s, "EQD{:<4}         {:.1} Gy", r.d_ref, x.eqd);
    if let Some(p) = x.ntcp {
        let _ = writeln!(s, "NTCP            {:.2} %", 100.0 * p);
    }
    if let Some(k) = x.k_incidence {
        let _ = writeln!(s, "induced cancer  {:.3} %", 100.0 * k);
    }
    warnings(&mut s, &x.validity_warnings);
    s
}

fn lql(cell: &LqlCell) -> String {
    match cell {
        LqlCell::Reproduced {
            published,
            engine,
            delta,
        } => format!("{published:.1} -> {engine:.1} ({delta:+.1})"),
        LqlCell::NotReproducible { published, note } => format!("{published:.1} [{note}]"),
    }
}

pub fn table2(rows: &[RowComparison]) -> String {
    let mut s = String::new();
    let _ = writeln!(
        s,
        "{:<24} {:<14} {:<22} {:>5} {:>6} {:>6} {:>5}  LQL organ at risk / LQL target",
        "schedule", "organ at risk", "target", "a/b", "table", "engine", "delta"
    );
    for r in rows {
        let _ = writeln!(
            s,
            "{:<24} {:<14} {:<22} {:>5} {:>6.1} {:>6.1} {:>+5.1}  {} / {}{}",
            r.schedule,
            r.organ_at_risk,
            r.target,
            r.alpha_beta,
            r.classical_published,
            r.classical_engine,
            r.classical_delta,
            lql(&r.lql_organ_at_risk),
            lql(&r.lql_target),
            if r.classical_ok() { "" } else { "  MISMATCH" },
        );
    }
    s
}

pub fn dvh(r: &DvhReport) -> String {
    let x = &r.summary;
    let mut s = String::new();
    let _ = writeln!(s, "structure       {}", r.structure);
    let _ = writeln!(
        s,
        "                total     per fraction ({} fx)",
        x.n_fractions
    );
    let _ = writeln!(
        s,
        "mean            {:<9.1} {:.1} Gy",
        x.mean, x.per_fraction_mean
    );
    let _ = writeln!(
        s,
        "D5%             {:<9.1} {:.1} Gy",
        x.d5, x.per_fraction_d5
    );
    let _ = writeln!(
        s,
        "Dmax            {:<9.1} {:.1} Gy",
        x.dmax, x.per_fraction_dmax
    );
    warnings(&mut s, &r.warnings);
    if let Some(points) = &r.points {
        let _ = writeln!(s, "dose,volume");
        for p in points {
            // `{}` prints the shortest string that parses back to the same bits
            let _ = writeln!(s, "{},{}", p.dose, p.volume);
        }
    }
    s
}

pub fn tissues(ts: &[TissueParams]) -> String {
    let mut s = String::new();
    let _ = writeln!(
        s,
        "{:<20} {:<14} {:>6} {:>6} {:>6}",
        "name", "kind", "a/b", "d_t", "g/a"
    );
    for t in ts {
        let _ = writeln!(
            s,
            "{:<20} {:<14} {:>6} {:>6} {:>6.2}",
            t.name,
            kind(t.kind),
            t.alpha_beta,
            t.threshold_dose(),
            t.effective_gamma_over_alpha()
        );
    }
    s
}

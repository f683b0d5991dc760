//! CSV and JSON writers for run reports.

use std::io::Write;

use anyhow::Result;
use serde::Serialize;

use crate::run::{Outcome, RunReport};
use crate::scenario::serialize;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Csv,
    Json,
}

#[derive(Serialize)]
struct FieldRow {
    x: f64,
    t: f64,
    u: f64,
}

#[derive(Serialize)]
struct TraceRow {
    t: f64,
    r0: f64,
}

#[derive(Serialize)]
struct ModeRow {
    n: usize,
    lambda: f64,
    psi: f64,
    f: Option<f64>,
}

/// Writes the report. CSV output starts with the input echo and status as
/// `#` comment lines, followed by one table.
pub fn emit(report: &RunReport, format: Format, out: &mut dyn Write) -> Result<()> {
    match format {
        Format::Json => {
            serde_json::to_writer_pretty(&mut *out, report)?;
            writeln!(out)?;
        }
        Format::Csv => {
            for line in serialize(&report.input).lines() {
                writeln!(out, "# {line}")?;
            }
            writeln!(out, "# status = {}", serde_json::to_string(&report.status)?)?;
            if let Some(ms) = report.timing_ms {
                writeln!(out, "# timing_ms = {ms}")?;
            }
            write_table(report, out)?;
        }
    }
    out.flush()?;
    Ok(())
}

fn write_table(report: &RunReport, out: &mut dyn Write) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    match &report.result {
        Outcome::Forward { field, .. } => {
            let (xs, ts) = (field.axes()[0].points(), field.axes()[1].points());
            for (i, &x) in xs.iter().enumerate() {
                for (j, &t) in ts.iter().enumerate() {
                    w.serialize(FieldRow { x, t, u: field.at2(i, j) })?;
                }
            }
        }
        Outcome::Asymptotics { samples, .. } => {
            for s in samples {
                w.serialize(s)?;
            }
        }
        Outcome::Convergence { rows, .. } => {
            for r in rows {
                w.serialize(r)?;
            }
        }
        Outcome::Inverse1 { recovery, .. } => write_trace(&mut w, &recovery.r0)?,
        Outcome::Inverse4 { recovery } => write_trace(&mut w, &recovery.r0)?,
        Outcome::Inverse2 { recovery } => {
            let psi = &report.input.psi.as_ref().expect("validated").coefficients_at(0.0);
            let f = recovery.f.as_ref().map(|f| f.coefficients_at(0.0));
            write_modes(&mut w, &recovery.spectrum.values, psi, f.as_deref())?;
        }
        Outcome::Inverse3 { recovery } => {
            let psi = &report.input.psi.as_ref().expect("validated").coefficients_at(0.0);
            let f = recovery.f.coefficients_at(0.0);
            write_modes(&mut w, &recovery.spectrum.values, psi, Some(&f))?;
        }
    }
    w.flush()?;
    Ok(())
}

fn write_trace<W: Write>(w: &mut csv::Writer<W>, r0: &osk_core::GridFunction) -> Result<()> {
    for (t, &v) in r0.axis().points().into_iter().zip(r0.values()) {
        w.serialize(TraceRow { t, r0: v })?;
    }
    Ok(())
}

fn lookup(pairs: &[(usize, f64)], n: usize) -> f64 {
    pairs.iter().find(|p| p.0 == n).map_or(0.0, |p| p.1)
}

fn write_modes<W: Write>(
    w: &mut csv::Writer<W>,
    lambda: &[f64],
    psi: &[(usize, f64)],
    f: Option<&[(usize, f64)]>,
) -> Result<()> {
    for (i, &l) in lambda.iter().enumerate() {
        let n = i + 1;
        w.serialize(ModeRow {
            n,
            lambda: l,
            psi: lookup(psi, n),
            f: f.map(|f| lookup(f, n)),
        })?;
    }
    Ok(())
}

//! Text output of result rows and profiles.

use std::fmt::Write as _;
use std::path::Path;
use std::str::FromStr;

use super::{PerformanceProfile, ResultRow};
use crate::error::{invalid, Error, Result};

pub const RESULT_HEADER: &str =
    "problem,n,solver,mean_iter,mean_nf,mean_tcpu_seconds,mean_final_residual,mean_aa_steps,failures";

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OutputFormat {
    Csv,
    Json,
}

impl FromStr for OutputFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "csv" => Ok(OutputFormat::Csv),
            "json" => Ok(OutputFormat::Json),
            _ => Err(invalid(format!("unknown output format {s:?}"))),
        }
    }
}

/// Formats like C's `%.6g`. Non-finite values become `nan`, `inf`, `-inf`.
pub fn format_sig6(x: f64) -> String {
    if !x.is_finite() {
        return non_finite(x);
    }
    if x == 0.0 {
        return "0".into();
    }
    let sci = format!("{x:.5e}");
    let (mantissa, exp) = sci.split_once('e').expect("exponent in {:e} output");
    let exp: i32 = exp.parse().expect("integer exponent");
    if !(-4..6).contains(&exp) {
        format!("{}e{}{:02}", trim_zeros(mantissa), sign(exp), exp.abs())
    } else {
        let decimals = (5 - exp).max(0) as usize;
        trim_zeros(&format!("{x:.decimals$}")).to_string()
    }
}

/// Residual norms in the tables' `5.27e-07` style.
pub fn format_residual(x: f64) -> String {
    if !x.is_finite() {
        return non_finite(x);
    }
    let sci = format!("{x:.2e}");
    let (mantissa, exp) = sci.split_once('e').expect("exponent in {:e} output");
    let exp: i32 = exp.parse().expect("integer exponent");
    format!("{mantissa}e{}{:02}", sign(exp), exp.abs())
}

fn sign(exp: i32) -> char {
    if exp < 0 {
        '-'
    } else {
        '+'
    }
}

fn non_finite(x: f64) -> String {
    if x.is_nan() {
        "nan".into()
    } else if x > 0.0 {
        "inf".into()
    } else {
        "-inf".into()
    }
}

fn trim_zeros(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}

/// JSON has no non-finite numbers.
fn json_number(formatted: String) -> String {
    if formatted.parse::<f64>().is_ok_and(f64::is_finite) {
        formatted
    } else {
        "null".into()
    }
}

fn json_string(s: &str) -> String {
    serde_json::to_string(s).expect("strings always serialize")
}

fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

pub fn rows_to_csv(rows: &[ResultRow]) -> String {
    let mut out = String::from(RESULT_HEADER);
    out.push('\n');
    for r in rows {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{},{},{}",
            csv_field(&r.problem),
            r.n,
            csv_field(&r.solver),
            format_sig6(r.mean_iter),
            format_sig6(r.mean_nf),
            format_sig6(r.mean_tcpu_seconds),
            format_residual(r.mean_final_residual),
            format_sig6(r.mean_aa_steps),
            r.failures
        );
    }
    out
}

pub fn rows_to_json(rows: &[ResultRow]) -> String {
    let items: Vec<String> = rows
        .iter()
        .map(|r| {
            format!(
                "  {{\"problem\": {}, \"n\": {}, \"solver\": {}, \"mean_iter\": {}, \"mean_nf\": {}, \
                 \"mean_tcpu_seconds\": {}, \"mean_final_residual\": {}, \"mean_aa_steps\": {}, \
                 \"failures\": {}}}",
                json_string(&r.problem),
                r.n,
                json_string(&r.solver),
                json_number(format_sig6(r.mean_iter)),
                json_number(format_sig6(r.mean_nf)),
                json_number(format_sig6(r.mean_tcpu_seconds)),
                json_number(format_residual(r.mean_final_residual)),
                json_number(format_sig6(r.mean_aa_steps)),
                r.failures
            )
        })
        .collect();
    format!("[\n{}\n]\n", items.join(",\n"))
}

/// One `solver,theta,rho` line per breakpoint.
pub fn profile_to_csv(profile: &PerformanceProfile) -> String {
    let mut out = String::from("metric,solver,theta,rho\n");
    for c in &profile.curves {
        for (t, r) in profile.thetas.iter().zip(&c.rho) {
            let _ = writeln!(
                out,
                "{},{},{},{}",
                profile.metric.name(),
                csv_field(&c.solver),
                format_sig6(*t),
                format_sig6(*r)
            );
        }
    }
    out
}

pub fn profile_to_json(profile: &PerformanceProfile) -> String {
    let curves: Vec<String> = profile
        .curves
        .iter()
        .map(|c| {
            let rho: Vec<String> = c.rho.iter().map(|r| json_number(format_sig6(*r))).collect();
            format!(
                "    {{\"solver\": {}, \"rho\": [{}]}}",
                json_string(&c.solver),
                rho.join(", ")
            )
        })
        .collect();
    let thetas: Vec<String> = profile
        .thetas
        .iter()
        .map(|t| json_number(format_sig6(*t)))
        .collect();
    format!(
        "{{\n  \"metric\": {},\n  \"thetas\": [{}],\n  \"curves\": [\n{}\n  ]\n}}\n",
        json_string(profile.metric.name()),
        thetas.join(", "),
        curves.join(",\n")
    )
}

fn write(path: &Path, text: &str) -> Result<()> {
    std::fs::write(path, text).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })
}

pub fn emit_rows(rows: &[ResultRow], format: OutputFormat, path: &Path) -> Result<()> {
    match format {
        OutputFormat::Csv => write(path, &rows_to_csv(rows)),
        OutputFormat::Json => write(path, &rows_to_json(rows)),
    }
}

pub fn emit_profile(profile: &PerformanceProfile, format: OutputFormat, path: &Path) -> Result<()> {
    match format {
        OutputFormat::Csv => write(path, &profile_to_csv(profile)),
        OutputFormat::Json => write(path, &profile_to_json(profile)),
    }
}

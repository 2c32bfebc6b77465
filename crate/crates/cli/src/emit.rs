//! Output envelope and serializers. JSON is the default; CSV covers the
//! tabular scans. Timing goes to stderr only, so output files are
//! byte-stable across runs.

use anyhow::{Context, Result};
use num_rational::BigRational;
use qrec_core::diffscan::{CoverageReport, KCoverage};
use qrec_core::expsum::HuaRow;
use serde::Serialize;
use std::fmt::Write as _;
use std::path::PathBuf;

pub const TOOLKIT_VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Serialize)]
#[serde(rename_all = "camelCase")]
pub struct RunEnvelope<Par: Serialize, Pay: Serialize> {
    pub experiment: &'static str,
    pub toolkit_version: &'static str,
    pub parameters: Par,
    pub payload: Pay,
}

pub fn envelope<Par: Serialize, Pay: Serialize>(
    experiment: &'static str,
    parameters: Par,
    payload: Pay,
) -> RunEnvelope<Par, Pay> {
    RunEnvelope { experiment, toolkit_version: TOOLKIT_VERSION, parameters, payload }
}

pub fn render_json(env: &impl Serialize) -> Result<String> {
    let mut s = serde_json::to_string_pretty(env).context("serializing result")?;
    s.push('\n');
    Ok(s)
}

pub fn write_output(out: Option<&PathBuf>, content: &str) -> Result<()> {
    match out {
        Some(p) => std::fs::write(p, content).with_context(|| format!("writing {}", p.display())),
        None => {
            print!("{content}");
            Ok(())
        }
    }
}

pub fn rational_str(r: &BigRational) -> String {
    r.to_string()
}

pub fn hua_csv(rows: &[HuaRow]) -> String {
    let mut s = String::from("q,worst_magnitude,q_prime\n");
    for r in rows {
        writeln!(s, "{},{},{}", r.q, r.worst_magnitude.to_f64(), r.q_prime).unwrap();
    }
    s
}

pub fn coverage_csv(per_k: &[KCoverage]) -> String {
    let mut s = String::from("k,attained,total,fraction\n");
    for row in per_k {
        writeln!(s, "{},{},{},{}", row.k, row.attained, row.total, row.fraction).unwrap();
    }
    s
}

#[derive(Serialize)]
#[serde(rename_all = "camelCase")]
pub struct KCoveragePayload {
    pub k: u64,
    pub attained: u64,
    pub total: u64,
    pub fraction: f64,
}

#[derive(Serialize)]
#[serde(rename_all = "camelCase")]
pub struct CoveragePayload {
    pub form: String,
    pub m_full: i64,
    pub m_verify: i64,
    pub per_k: Vec<KCoveragePayload>,
    pub covering_k: Option<u64>,
    pub caveat: String,
}

pub fn coverage_payload(r: &CoverageReport) -> CoveragePayload {
    CoveragePayload {
        form: r.form.clone(),
        m_full: r.m_full,
        m_verify: r.m_verify,
        per_k: r
            .per_k
            .iter()
            .map(|k| KCoveragePayload {
                k: k.k,
                attained: k.attained,
                total: k.total,
                fraction: k.fraction,
            })
            .collect(),
        covering_k: r.covering_k,
        caveat: r.caveat.to_string(),
    }
}

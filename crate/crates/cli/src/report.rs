//! Report records, the JSON document, and the stdout table.

use serde::Serialize;
use std::time::{SystemTime, UNIX_EPOCH};

#[derive(Debug, Clone, Serialize)]
pub struct CheckRecord {
    pub suite: String,
    pub params: String,
    pub check_id: String,
    /// "pass", "fail" (a verification found a counterexample) or
    /// "error" (the check could not be carried out)
    pub status: String,
    pub witness: String,
    /// worst numerical residual seen, 0 for exact checks, NaN on failure
    #[serde(serialize_with = "serialize_residual")]
    pub max_residual: f64,
}

fn serialize_residual<S: serde::Serializer>(v: &f64, s: S) -> Result<S::Ok, S::Error> {
    if v.is_finite() {
        s.serialize_f64(*v)
    } else {
        s.serialize_none()
    }
}

#[derive(Debug, Serialize)]
pub struct ReportDocument {
    pub version: String,
    pub timestamp: String,
    pub overall: String,
    pub records: Vec<CheckRecord>,
}

impl ReportDocument {
    pub fn new(records: Vec<CheckRecord>) -> Self {
        let overall = if records.iter().all(|r| r.status == "pass") {
            "pass"
        } else {
            "fail"
        };
        ReportDocument {
            version: env!("CARGO_PKG_VERSION").to_string(),
            timestamp: unix_timestamp(),
            overall: overall.to_string(),
            records,
        }
    }

    pub fn all_passed(&self) -> bool {
        self.overall == "pass"
    }
}

fn unix_timestamp() -> String {
    match SystemTime::now().duration_since(UNIX_EPOCH) {
        Ok(d) => format!("{}", d.as_secs()),
        Err(_) => "0".into(),
    }
}

/// Fixed-width table on stdout, one line per record plus a summary line.
pub fn print_table(doc: &ReportDocument) {
    let pw = doc
        .records
        .iter()
        .map(|r| r.params.len())
        .max()
        .unwrap_or(6)
        .max(6);
    let cw = doc
        .records
        .iter()
        .map(|r| r.check_id.len())
        .max()
        .unwrap_or(5)
        .max(5);
    println!(
        "{:<10} {:<pw$} {:<cw$} {:<6} {:>12}  WITNESS",
        "SUITE", "PARAMS", "CHECK", "STATUS", "RESIDUAL"
    );
    for r in &doc.records {
        let res = if r.max_residual.is_finite() {
            format!("{:.3e}", r.max_residual)
        } else {
            "-".into()
        };
        println!(
            "{:<10} {:<pw$} {:<cw$} {:<6} {:>12}  {}",
            r.suite, r.params, r.check_id, r.status, res, r.witness
        );
    }
    let passed = doc.records.iter().filter(|r| r.status == "pass").count();
    println!(
        "{} of {} checks passed: {}",
        passed,
        doc.records.len(),
        doc.overall
    );
}

//! CSV and JSON renderings of risk reports.
//!
//! `trials.csv` columns: `schema_version,cell,n,eps,j0,j1,trial,risk`.
//! `cells.csv` columns: `schema_version,cell,n,eps,j0,j1,trials,mean,stderr`.

use besov_robust::harness::{RiskReport, REPORT_SCHEMA_VERSION};
use serde::Serialize;

fn writer() -> csv::Writer<Vec<u8>> {
    csv::Writer::from_writer(Vec::new())
}

fn finish(w: csv::Writer<Vec<u8>>) -> Vec<u8> {
    w.into_inner().expect("in-memory flush")
}

pub fn trials_csv(report: &RiskReport) -> Vec<u8> {
    let mut w = writer();
    w.write_record(["schema_version", "cell", "n", "eps", "j0", "j1", "trial", "risk"]).unwrap();
    for (c, cell) in report.cells.iter().enumerate() {
        for (t, r) in cell.risks.iter().enumerate() {
            w.write_record([
                REPORT_SCHEMA_VERSION.to_string(),
                c.to_string(),
                cell.n.to_string(),
                cell.eps.to_string(),
                cell.j0.to_string(),
                cell.j1.to_string(),
                t.to_string(),
                r.to_string(),
            ])
            .unwrap();
        }
    }
    finish(w)
}

pub fn cells_csv(report: &RiskReport) -> Vec<u8> {
    let mut w = writer();
    w.write_record(["schema_version", "cell", "n", "eps", "j0", "j1", "trials", "mean", "stderr"]).unwrap();
    for (c, cell) in report.cells.iter().enumerate() {
        w.write_record([
            REPORT_SCHEMA_VERSION.to_string(),
            c.to_string(),
            cell.n.to_string(),
            cell.eps.to_string(),
            cell.j0.to_string(),
            cell.j1.to_string(),
            cell.trials.to_string(),
            cell.mean.to_string(),
            cell.stderr.to_string(),
        ])
        .unwrap();
    }
    finish(w)
}

/// Serializable rows as CSV with a header taken from the field names.
pub fn rows_csv<T: Serialize>(rows: &[T]) -> Vec<u8> {
    let mut w = writer();
    for r in rows {
        w.serialize(r).unwrap();
    }
    finish(w)
}

pub fn json<T: Serialize>(value: &T) -> Vec<u8> {
    let mut s = serde_json::to_string_pretty(value).expect("report serializes");
    s.push('\n');
    s.into_bytes()
}

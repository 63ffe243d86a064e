use std::path::Path;

use decafbench_core::numfmt::format_serial;
use decafbench_core::report::{AnalysisReport, ReportError};

use crate::error::{Error, Result};
use crate::jsonio;

pub const CSV_HEADER: [&str; 7] = ["network", "dataset", "plan", "metric", "cell", "value", "n_pairs"];

fn checked(report: &AnalysisReport) -> Result<()> {
    report.validate().map_err(|e: ReportError| Error::invalid(e.to_string()))
}

pub fn report_json(report: &AnalysisReport) -> Result<Vec<u8>> {
    checked(report)?;
    Ok(jsonio::to_canonical(report))
}

pub fn emit_report_json(report: &AnalysisReport, path: &Path) -> Result<()> {
    jsonio::write_file(path, &report_json(report)?)
}

pub fn read_report(path: &Path) -> Result<AnalysisReport> {
    let report: AnalysisReport = jsonio::read_json(path)?;
    checked(&report).map_err(|e| Error::invalid(format!("{}: {e}", path.display())))?;
    Ok(report)
}

pub fn report_csv(report: &AnalysisReport) -> Result<Vec<u8>> {
    checked(report)?;
    let mut w = csv::Writer::from_writer(Vec::new());
    let csv_err = |e: csv::Error| Error::invalid(format!("csv: {e}"));
    w.write_record(CSV_HEADER).map_err(csv_err)?;
    for (network, metric, cell, value, count) in report.rows() {
        w.write_record([
            network,
            &report.dataset,
            &report.plan,
            metric.label(),
            cell.label(),
            &format_serial(value),
            &count.to_string(),
        ])
        .map_err(csv_err)?;
    }
    w.into_inner().map_err(|e| Error::invalid(format!("csv: {e}")))
}

pub fn emit_report_csv(report: &AnalysisReport, path: &Path) -> Result<()> {
    jsonio::write_file(path, &report_csv(report)?)
}

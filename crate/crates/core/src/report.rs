//! Text emission of validation results: aligned tables in the two-row
//! ERGAS/SAM layout, delimited record files, and correlation tables.

use std::fmt::Write as _;

use crate::error::{Error, Result};
use crate::fusion::{Correction, Method};
use crate::metrics::{Protocol, QualityRecord};
use crate::validate::{CorrelationTable, ProtocolRun, PAIR_LABELS};

/// Formats a quality value the way the tables print it: two decimals,
/// "na" when absent.
pub fn format_cell(value: Option<f64>) -> String {
    match value {
        Some(v) => format!("{v:.2}"),
        None => "na".to_string(),
    }
}

fn format_precise(value: Option<f64>) -> String {
    match value {
        Some(v) => format!("{v:.6}"),
        None => "na".to_string(),
    }
}

/// Aligned text table for one dataset: resolutions x methods as rows
/// (ERGAS on the upper line, SAM on the lower), corrections as columns.
pub fn format_dataset_table(dataset: &str, records: &[QualityRecord]) -> String {
    let mut out = String::new();
    let _ = writeln!(
        out,
        "Dataset: {dataset} (ERGAS upper value, SAM lower value)"
    );
    let _ = write!(out, "{:<12} {:<7}", "Resolution", "Method");
    for c in Correction::ALL {
        let _ = write!(out, " {:>7}", c.label());
    }
    out.push('\n');
    for protocol in Protocol::ALL {
        let mut first_in_block = true;
        for method in Method::ALL {
            let row: Vec<&QualityRecord> = Correction::ALL
                .iter()
                .filter_map(|&c| {
                    records
                        .iter()
                        .find(|r| r.protocol == protocol && r.method == method && r.correction == c)
                })
                .collect();
            if row.is_empty() {
                continue;
            }
            let proto_label = if first_in_block { protocol.label() } else { "" };
            first_in_block = false;
            let _ = write!(out, "{proto_label:<12} {:<7}", method.label());
            for r in &row {
                let _ = write!(out, " {:>7}", format_cell(r.ergas));
            }
            out.push('\n');
            let _ = write!(out, "{:<12} {:<7}", "", "");
            for r in &row {
                let _ = write!(out, " {:>7}", format_cell(r.sam));
            }
            out.push('\n');
        }
    }
    out
}

/// Delimited records, one per line:
/// `dataset,protocol,method,correction,ergas,sam`.
pub fn records_to_csv(records: &[QualityRecord], table_precision: bool) -> String {
    let fmt = if table_precision {
        format_cell
    } else {
        format_precise
    };
    let mut out = String::new();
    for r in records {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{}",
            r.dataset,
            r.protocol.token(),
            r.method.token(),
            r.correction.token(),
            fmt(r.ergas),
            fmt(r.sam),
        );
    }
    out
}

/// Parses delimited records; the value literal `na` marks absent cells.
pub fn parse_records(text: &str) -> Result<Vec<QualityRecord>> {
    let parse_value = |tok: &str, lineno: usize| -> Result<Option<f64>> {
        let tok = tok.trim();
        if tok == "na" {
            return Ok(None);
        }
        tok.parse::<f64>()
            .map(Some)
            .map_err(|_| Error::Parse(format!("line {}: bad value '{tok}'", lineno + 1)))
    };
    text.lines()
        .enumerate()
        .filter(|(_, line)| !line.trim().is_empty() && !line.trim_start().starts_with('#'))
        .map(|(lineno, line)| {
            let fields: Vec<&str> = line.split(',').map(str::trim).collect();
            if fields.len() != 6 {
                return Err(Error::Parse(format!(
                    "line {}: expected 6 fields, got {}",
                    lineno + 1,
                    fields.len()
                )));
            }
            let ergas = parse_value(fields[4], lineno)?;
            let sam = parse_value(fields[5], lineno)?;
            if ergas.is_some_and(|v| v < 0.0) {
                return Err(Error::Parse(format!(
                    "line {}: ergas must be non-negative",
                    lineno + 1
                )));
            }
            if sam.is_some_and(|v| !(0.0..=180.0).contains(&v)) {
                return Err(Error::Parse(format!(
                    "line {}: sam must lie in [0, 180] degrees",
                    lineno + 1
                )));
            }
            Ok(QualityRecord {
                dataset: fields[0].to_string(),
                protocol: fields[1].parse()?,
                method: fields[2].parse()?,
                correction: fields[3].parse()?,
                ergas,
                sam,
            })
        })
        .collect()
}

/// Correlation table: correction columns, one row per resolution pair.
pub fn format_correlation_table(table: &CorrelationTable) -> String {
    let mut out = String::new();
    let _ = writeln!(
        out,
        "Cross-scale correlation for dataset: {}",
        table.dataset
    );
    let _ = write!(out, "{:<10}", "pair");
    for (c, _) in &table.columns {
        let _ = write!(out, " {:>7}", c.label());
    }
    out.push('\n');
    for (row, label) in PAIR_LABELS.iter().enumerate() {
        let _ = write!(out, "{label:<10}");
        for (_, cells) in &table.columns {
            let _ = write!(out, " {:>7}", format_cell(cells[row]));
        }
        out.push('\n');
    }
    out
}

/// Full report for a list of protocol runs: aligned table plus records.
pub fn format_runs(dataset: &str, runs: &[ProtocolRun]) -> (String, String) {
    let records: Vec<QualityRecord> = runs.iter().flat_map(|r| r.records.clone()).collect();
    (
        format_dataset_table(dataset, &records),
        records_to_csv(&records, false),
    )
}

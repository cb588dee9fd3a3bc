use std::fmt::Write as _;
use std::str::FromStr;

use super::aggregate::AggregateReport;
use super::evaluate::EvaluationReport;

pub const CSV_HEADER: [&str; 9] = ["method", "smr", "alid", "lr", "lrdi", "lrqi", "jsc", "nsdcg", "notes"];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Format {
    #[default]
    Json,
    Csv,
    Markdown,
}

impl FromStr for Format {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "json" => Ok(Format::Json),
            "csv" => Ok(Format::Csv),
            "markdown" | "md" => Ok(Format::Markdown),
            other => Err(format!("unknown format {other:?} (expected json, csv or markdown)")),
        }
    }
}

fn metrics(a: &AggregateReport) -> [Option<f64>; 7] {
    [a.smr, a.alid, a.lr, a.lrdi, a.lrqi, a.jsc, a.nsdcg]
}

fn cell(v: Option<f64>, absent: &str) -> String {
    v.map_or_else(|| absent.to_string(), |v| format!("{v:.2}"))
}

/// Full report as pretty JSON; numbers keep full precision.
pub fn render_json(report: &EvaluationReport) -> String {
    let mut out = serde_json::to_string_pretty(report).expect("report serializes");
    out.push('\n');
    out
}

/// One row per aggregate; absent metrics are empty fields.
pub fn render_csv(aggregates: &[AggregateReport]) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(CSV_HEADER).expect("in-memory write");
    for a in aggregates {
        let mut row = vec![a.method_tag.clone()];
        row.extend(metrics(a).into_iter().map(|v| cell(v, "")));
        row.push(a.note_count.to_string());
        w.write_record(&row).expect("in-memory write");
    }
    String::from_utf8(w.into_inner().expect("in-memory flush")).expect("utf-8 fields")
}

pub fn render_markdown(aggregates: &[AggregateReport]) -> String {
    let mut out = String::from(
        "| Method | SMR | ALID | LR | LRDI | LRQI | JSC | NSDCG | Notes |\n|---|---:|---:|---:|---:|---:|---:|---:|---:|\n",
    );
    for a in aggregates {
        let _ = write!(out, "| {} |", a.method_tag.replace('|', "\\|"));
        for v in metrics(a) {
            let _ = write!(out, " {} |", cell(v, "n/a"));
        }
        let _ = writeln!(out, " {} |", a.note_count);
    }
    out
}

/// JSON keeps every per-note record; the tabular formats show only the
/// aggregates.
pub fn render(reports: &[EvaluationReport], format: Format) -> String {
    let aggregates: Vec<AggregateReport> = reports.iter().map(|r| r.aggregate.clone()).collect();
    match format {
        Format::Json if reports.len() == 1 => render_json(&reports[0]),
        Format::Json => {
            let mut out = serde_json::to_string_pretty(&aggregates).expect("aggregates serialize");
            out.push('\n');
            out
        }
        Format::Csv => render_csv(&aggregates),
        Format::Markdown => render_markdown(&aggregates),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::report::aggregate::{MicroAverages, NotApplicable};

    fn agg(tag: &str, lrqi: Option<f64>) -> AggregateReport {
        AggregateReport {
            method_tag: tag.into(),
            note_count: 3,
            skipped: 0,
            failed: 0,
            smr: Some(100.0),
            alid: Some(87.654),
            lr: Some(2.0 / 3.0 * 100.0),
            lrdi: Some(0.0),
            lrqi,
            jsc: Some(72.6),
            nsdcg: Some(84.6),
            not_applicable: NotApplicable::default(),
            micro: MicroAverages::default(),
        }
    }

    #[test]
    fn csv_layout() {
        let out = render_csv(&[agg("kneo", None), agg("a,b", Some(1.0))]);
        let lines: Vec<&str> = out.lines().collect();
        assert_eq!(lines[0], "method,smr,alid,lr,lrdi,lrqi,jsc,nsdcg,notes");
        assert_eq!(lines[1], "kneo,100.00,87.65,66.67,0.00,,72.60,84.60,3");
        assert_eq!(lines[2], "\"a,b\",100.00,87.65,66.67,0.00,1.00,72.60,84.60,3");
    }

    #[test]
    fn markdown_rows() {
        let out = render_markdown(&[agg("redact", Some(100.0)), agg("kneo", None)]);
        assert_eq!(out.lines().count(), 4);
        assert!(out.contains("| kneo | 100.00 | 87.65 | 66.67 | 0.00 | n/a | 72.60 | 84.60 | 3 |"));
    }

    #[test]
    fn json_round_trips() {
        let report = EvaluationReport {
            aggregate: agg("x", None),
            notes: Vec::new(),
        };
        let text = render_json(&report);
        let back: EvaluationReport = serde_json::from_str(&text).unwrap();
        assert_eq!(back, report);
        let v: serde_json::Value = serde_json::from_str(&text).unwrap();
        assert!(v["aggregate"].is_object() && v["notes"].is_array());
    }
}

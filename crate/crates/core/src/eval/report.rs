use std::fmt::Write as _;
use std::str::FromStr;

use super::benchmark::BenchmarkReport;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ReportFormat {
    Markdown,
    Csv,
    Json,
}

impl FromStr for ReportFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "md" | "markdown" => Ok(ReportFormat::Markdown),
            "csv" => Ok(ReportFormat::Csv),
            "json" => Ok(ReportFormat::Json),
            other => Err(Error::Parameter(format!("unknown report format `{other}`"))),
        }
    }
}

/// A fraction as a percentage with three decimals.
pub fn pct(x: f64) -> String {
    format!("{:.3}", x * 100.0)
}

pub fn render_report(report: &BenchmarkReport, format: ReportFormat) -> Result<String> {
    match format {
        ReportFormat::Markdown => Ok(markdown(report)),
        ReportFormat::Csv => csv_text(report),
        ReportFormat::Json => Ok(serde_json::to_string_pretty(report)? + "\n"),
    }
}

fn markdown(r: &BenchmarkReport) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "# Benchmark\n");
    let _ = writeln!(
        out,
        "corpus `{}`: {} documents, {} train / {} test, vocabulary {}, seed {}, min_df {}, grid search {}\n",
        r.corpus,
        r.n_documents,
        r.n_train,
        r.n_test,
        r.vocabulary_size,
        r.seed,
        r.min_df,
        if r.grid_search { "on" } else { "off" }
    );
    let _ = writeln!(out, "## Confusion matrices\n");
    let _ = writeln!(out, "| Model | TP | FN | FP | TN |");
    let _ = writeln!(out, "|---|---:|---:|---:|---:|");
    for m in &r.results {
        let c = m.confusion;
        let _ = writeln!(out, "| {} | {} | {} | {} | {} |", m.model.display_name(), c.tp, c.fn_, c.fp, c.tn);
    }
    let _ = writeln!(out, "\n## Evaluation\n");
    let _ = writeln!(out, "Precision and recall are macro averages over both labels.\n");
    let _ = writeln!(out, "| Model | F1-score | Accuracy | Precision | Recall |");
    let _ = writeln!(out, "|---|---:|---:|---:|---:|");
    for m in &r.results {
        let e = m.metrics;
        let _ = writeln!(
            out,
            "| {} | {} | {} | {} | {} |",
            m.model.display_name(),
            pct(e.f1_pos),
            pct(e.accuracy),
            pct(e.macro_precision),
            pct(e.macro_recall)
        );
    }
    out
}

fn csv_text(r: &BenchmarkReport) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let csv_err = |e: csv::Error| Error::Serialization(e.to_string());
    w.write_record([
        "model",
        "tp",
        "fn",
        "fp",
        "tn",
        "accuracy",
        "precision_pos",
        "recall_pos",
        "f1_pos",
        "macro_precision",
        "macro_recall",
        "hyperparameters",
    ])
    .map_err(csv_err)?;
    for m in &r.results {
        let c = m.confusion;
        let e = m.metrics;
        let params = m
            .hyperparameters
            .iter()
            .map(|(k, v)| format!("{k}={v}"))
            .collect::<Vec<_>>()
            .join(" ");
        w.write_record([
            m.model.name().to_string(),
            c.tp.to_string(),
            c.fn_.to_string(),
            c.fp.to_string(),
            c.tn.to_string(),
            e.accuracy.to_string(),
            e.precision_pos.to_string(),
            e.recall_pos.to_string(),
            e.f1_pos.to_string(),
            e.macro_precision.to_string(),
            e.macro_recall.to_string(),
            params,
        ])
        .map_err(csv_err)?;
    }
    let bytes = w.into_inner().map_err(|e| Error::Serialization(e.to_string()))?;
    String::from_utf8(bytes).map_err(|e| Error::Serialization(e.to_string()))
}

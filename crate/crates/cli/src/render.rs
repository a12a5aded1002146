use std::fmt::Write as _;

use zorbalik_core::corpus::{EdaReport, Histogram};
use zorbalik_core::eval::report::pct;
use zorbalik_core::normalize::TokenStream;
use zorbalik_core::{Error, LabeledCorpus, Result};

use crate::{Evaluation, Format, Prediction};

fn json<T: serde::Serialize + ?Sized>(value: &T) -> Result<String> {
    Ok(serde_json::to_string_pretty(value)? + "\n")
}

fn csv_rows<I, R>(header: &[&str], rows: I) -> Result<String>
where
    I: IntoIterator<Item = R>,
    R: IntoIterator<Item = String>,
{
    let err = |e: csv::Error| Error::Serialization(e.to_string());
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(header).map_err(err)?;
    for row in rows {
        w.write_record(row.into_iter().collect::<Vec<_>>()).map_err(err)?;
    }
    let bytes = w.into_inner().map_err(|e| Error::Serialization(e.to_string()))?;
    String::from_utf8(bytes).map_err(|e| Error::Serialization(e.to_string()))
}

fn histogram_rows(label: u8, name: &str, h: &Histogram) -> Vec<Vec<String>> {
    h.counts
        .iter()
        .enumerate()
        .map(|(i, c)| {
            vec![
                label.to_string(),
                name.to_string(),
                (i as f64 * h.bin_width).to_string(),
                ((i + 1) as f64 * h.bin_width).to_string(),
                c.to_string(),
            ]
        })
        .collect()
}

pub fn stats(report: &EdaReport, format: Format) -> Result<String> {
    match format {
        Format::Json => json(report),
        Format::Csv => {
            let rows = report.per_label.iter().flat_map(|s| {
                let mut rows = histogram_rows(s.label, "chars", &s.chars);
                rows.extend(histogram_rows(s.label, "words", &s.words));
                rows.extend(histogram_rows(s.label, "mean_word_length", &s.mean_word_length));
                rows
            });
            csv_rows(&["label", "histogram", "bin_start", "bin_end", "count"], rows)
        }
        Format::Md => {
            let mut out = String::new();
            let _ = writeln!(out, "# Corpus statistics\n");
            let _ = writeln!(
                out,
                "{} documents, {} characters, {} words\n",
                report.total_documents, report.total_chars, report.total_words
            );
            let _ = writeln!(out, "| Label | Documents | Mean characters | Mean words | Mean word length |");
            let _ = writeln!(out, "|---:|---:|---:|---:|---:|");
            for s in &report.per_label {
                let _ = writeln!(
                    out,
                    "| {} | {} | {:.3} | {:.3} | {:.3} |",
                    s.label, s.documents, s.mean_chars, s.mean_words, s.mean_of_mean_word_length
                );
            }
            for s in &report.per_label {
                for (name, h) in [
                    ("characters", &s.chars),
                    ("words", &s.words),
                    ("mean word length", &s.mean_word_length),
                ] {
                    let _ = writeln!(out, "\n## Label {} {name}\n", s.label);
                    let _ = writeln!(out, "| Bin | Count |");
                    let _ = writeln!(out, "|---|---:|");
                    for (i, c) in h.counts.iter().enumerate() {
                        let lo = i as f64 * h.bin_width;
                        let _ = writeln!(out, "| [{lo}, {}) | {c} |", lo + h.bin_width);
                    }
                }
            }
            Ok(out)
        }
    }
}

pub fn tokens(corpus: &LabeledCorpus, tokens: &[TokenStream], format: Format) -> Result<String> {
    #[derive(serde::Serialize)]
    struct Row<'a> {
        id: usize,
        label: u8,
        tokens: &'a [String],
    }
    let rows: Vec<Row<'_>> = corpus
        .docs
        .iter()
        .zip(tokens)
        .map(|(d, t)| Row {
            id: d.id,
            label: d.label,
            tokens: t,
        })
        .collect();
    match format {
        Format::Json => json(&rows),
        Format::Csv => csv_rows(
            &["id", "label", "tokens"],
            rows.iter().map(|r| [r.id.to_string(), r.label.to_string(), r.tokens.join(" ")]),
        ),
        Format::Md => {
            let mut out = String::from("| Id | Label | Tokens |\n|---:|---:|---|\n");
            for r in &rows {
                let _ = writeln!(out, "| {} | {} | {} |", r.id, r.label, r.tokens.join(" ").replace('|', "\\|"));
            }
            Ok(out)
        }
    }
}

pub fn evaluation(e: &Evaluation, format: Format) -> Result<String> {
    let c = e.confusion;
    let m = e.metrics;
    match format {
        Format::Json => json(e),
        Format::Csv => csv_rows(
            &[
                "model",
                "documents",
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
            ],
            [[
                e.model.name().to_string(),
                e.documents.to_string(),
                c.tp.to_string(),
                c.fn_.to_string(),
                c.fp.to_string(),
                c.tn.to_string(),
                m.accuracy.to_string(),
                m.precision_pos.to_string(),
                m.recall_pos.to_string(),
                m.f1_pos.to_string(),
                m.macro_precision.to_string(),
                m.macro_recall.to_string(),
            ]],
        ),
        Format::Md => {
            let mut out = String::new();
            let _ = writeln!(out, "# Evaluation of {}\n", e.model.display_name());
            let _ = writeln!(out, "{} documents\n", e.documents);
            let _ = writeln!(out, "| TP | FN | FP | TN |\n|---:|---:|---:|---:|");
            let _ = writeln!(out, "| {} | {} | {} | {} |\n", c.tp, c.fn_, c.fp, c.tn);
            let _ = writeln!(out, "| F1-score | Accuracy | Precision | Recall |\n|---:|---:|---:|---:|");
            let _ = writeln!(
                out,
                "| {} | {} | {} | {} |",
                pct(m.f1_pos),
                pct(m.accuracy),
                pct(m.macro_precision),
                pct(m.macro_recall)
            );
            Ok(out)
        }
    }
}

pub fn predictions(rows: &[Prediction], format: Format) -> Result<String> {
    match format {
        Format::Json => json(rows),
        Format::Csv => csv_rows(
            &["probability", "label"],
            rows.iter().map(|r| [r.probability.to_string(), r.label.to_string()]),
        ),
        Format::Md => Ok(rows.iter().map(|r| format!("{:.6}\t{}\n", r.probability, r.label)).collect()),
    }
}

//! Labeled message corpora: CSV loading, stratified splitting and the
//! exploratory statistics (characters, words, mean word length per message).

use std::io::Read;
use std::path::Path;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Binary label; `1` marks a cyberbullying message.
pub type Label = u8;

pub const DEFAULT_TEXT_COLUMN: &str = "message";
pub const DEFAULT_LABEL_COLUMN: &str = "cyberbullying";

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LabeledDocument {
    /// Zero-based position of the document in its source.
    pub id: usize,
    pub text: String,
    pub label: Label,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LabeledCorpus {
    pub docs: Vec<LabeledDocument>,
    pub provenance: String,
}

impl LabeledCorpus {
    pub fn new(docs: Vec<LabeledDocument>, provenance: impl Into<String>) -> Self {
        LabeledCorpus {
            docs,
            provenance: provenance.into(),
        }
    }

    /// Builds a corpus from `(text, label)` pairs, assigning ids in order.
    pub fn from_pairs<S: Into<String>>(
        pairs: impl IntoIterator<Item = (S, Label)>,
        provenance: impl Into<String>,
    ) -> Self {
        let docs = pairs
            .into_iter()
            .enumerate()
            .map(|(id, (text, label))| LabeledDocument {
                id,
                text: text.into(),
                label,
            })
            .collect();
        LabeledCorpus::new(docs, provenance)
    }

    pub fn len(&self) -> usize {
        self.docs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.docs.is_empty()
    }

    /// Number of documents carrying label 0 and label 1.
    pub fn label_counts(&self) -> [usize; 2] {
        let mut counts = [0usize; 2];
        for d in &self.docs {
            counts[d.label as usize] += 1;
        }
        counts
    }

    pub fn labels(&self) -> Vec<Label> {
        self.docs.iter().map(|d| d.label).collect()
    }

    pub fn texts(&self) -> impl Iterator<Item = &str> {
        self.docs.iter().map(|d| d.text.as_str())
    }
}

/// Reads a UTF-8 CSV file with a header row.
pub fn load_corpus(
    path: impl AsRef<Path>,
    text_column: &str,
    label_column: &str,
) -> Result<LabeledCorpus> {
    let path = path.as_ref();
    let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
    let mut corpus = read_corpus(file, text_column, label_column)?;
    corpus.provenance = path.display().to_string();
    Ok(corpus)
}

/// Same as [`load_corpus`] over any reader; provenance is left as `"reader"`.
pub fn read_corpus<R: Read>(
    reader: R,
    text_column: &str,
    label_column: &str,
) -> Result<LabeledCorpus> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(true)
        .flexible(false)
        .from_reader(reader);

    let headers = rdr.headers().map_err(csv_error)?.clone();
    let find = |name: &str| {
        headers
            .iter()
            .position(|h| h.trim_start_matches('\u{feff}').trim() == name)
            .ok_or_else(|| Error::MissingColumn(name.to_string()))
    };
    let text_idx = find(text_column)?;
    let label_idx = find(label_column)?;

    let mut docs = Vec::new();
    for (i, record) in rdr.records().enumerate() {
        let row = i as u64 + 1;
        let record = record.map_err(csv_error)?;
        let text = record.get(text_idx).unwrap_or_default();
        let raw_label = record.get(label_idx).unwrap_or_default().trim();
        let label = match raw_label {
            "0" => 0,
            "1" => 1,
            other => {
                return Err(Error::Row {
                    row,
                    message: format!("label `{other}` is not 0 or 1"),
                })
            }
        };
        docs.push(LabeledDocument {
            id: i,
            text: text.to_string(),
            label,
        });
    }
    Ok(LabeledCorpus::new(docs, "reader"))
}

fn csv_error(e: csv::Error) -> Error {
    match e.kind() {
        csv::ErrorKind::Utf8 { pos, err } => Error::Encoding(format!(
            "invalid UTF-8 at record {}: {err}",
            pos.as_ref().map(|p| p.record()).unwrap_or(0)
        )),
        csv::ErrorKind::Io(_) => Error::Csv(e.to_string()),
        _ => Error::Csv(e.to_string()),
    }
}

/// Number of test documents granted to each label.
///
/// Each label gets `floor(count * fraction)`; the shortfall to
/// `floor(total * fraction + 0.5)` goes one document at a time to labels in
/// decreasing order of fractional remainder, ties by lower label.
pub fn stratified_test_counts(counts: [usize; 2], test_fraction: f64) -> [usize; 2] {
    // Guard against 0.3 * 10 landing at 2.9999999999999996.
    const EPS: f64 = 1e-9;
    let total: usize = counts.iter().sum();
    let mut take = [0usize; 2];
    let mut remainders = [(0.0f64, 0usize); 2];
    for (label, &n) in counts.iter().enumerate() {
        let exact = n as f64 * test_fraction;
        let base = (exact + EPS).floor();
        take[label] = (base as usize).min(n);
        remainders[label] = ((exact - base).max(0.0), label);
    }
    let target = (total as f64 * test_fraction + 0.5 + EPS).floor() as usize;
    let mut order = remainders;
    order.sort_by(|a, b| b.0.total_cmp(&a.0).then(a.1.cmp(&b.1)));
    let mut missing = target.saturating_sub(take.iter().sum());
    while missing > 0 {
        let mut granted = false;
        for &(_, label) in &order {
            if missing > 0 && take[label] < counts[label] {
                take[label] += 1;
                missing -= 1;
                granted = true;
            }
        }
        if !granted {
            break;
        }
    }
    take
}

/// Positions (into `corpus.docs`) of the train and test documents, both in
/// ascending order.
pub fn stratified_split_indices(
    corpus: &LabeledCorpus,
    test_fraction: f64,
    seed: u64,
) -> Result<(Vec<usize>, Vec<usize>)> {
    if !(test_fraction > 0.0 && test_fraction < 1.0) {
        return Err(Error::Parameter(format!(
            "test_fraction must lie in (0, 1), got {test_fraction}"
        )));
    }
    let counts = corpus.label_counts();
    for (label, &n) in counts.iter().enumerate() {
        if n == 0 {
            return Err(Error::Stratification(format!(
                "label {label} has no documents"
            )));
        }
    }
    let take = stratified_test_counts(counts, test_fraction);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut is_test = vec![false; corpus.len()];
    for label in 0..2u8 {
        let mut members: Vec<usize> = corpus
            .docs
            .iter()
            .enumerate()
            .filter(|(_, d)| d.label == label)
            .map(|(i, _)| i)
            .collect();
        members.shuffle(&mut rng);
        for &i in &members[..take[label as usize]] {
            is_test[i] = true;
        }
    }
    let (test, train): (Vec<usize>, Vec<usize>) = (0..corpus.len()).partition(|&i| is_test[i]);
    Ok((train, test))
}

/// Splits into `(train, test)` preserving per-label proportions.
pub fn stratified_split(
    corpus: &LabeledCorpus,
    test_fraction: f64,
    seed: u64,
) -> Result<(LabeledCorpus, LabeledCorpus)> {
    let (train, test) = stratified_split_indices(corpus, test_fraction, seed)?;
    Ok((subset(corpus, &train), subset(corpus, &test)))
}

pub fn subset(corpus: &LabeledCorpus, positions: &[usize]) -> LabeledCorpus {
    LabeledCorpus {
        docs: positions.iter().map(|&i| corpus.docs[i].clone()).collect(),
        provenance: corpus.provenance.clone(),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DocumentStats {
    pub chars: usize,
    pub words: usize,
    pub mean_word_length: f64,
}

pub fn document_stats(text: &str) -> DocumentStats {
    let chars = text.chars().count();
    let lengths: Vec<usize> = text.split_whitespace().map(|w| w.chars().count()).collect();
    let words = lengths.len();
    let mean_word_length = if words == 0 {
        0.0
    } else {
        lengths.iter().sum::<usize>() as f64 / words as f64
    };
    DocumentStats {
        chars,
        words,
        mean_word_length,
    }
}

/// Fixed-width histogram starting at zero; values past the last bin extend it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Histogram {
    pub bin_width: f64,
    pub counts: Vec<u64>,
}

impl Histogram {
    pub fn new(bin_width: f64) -> Self {
        Histogram {
            bin_width,
            counts: Vec::new(),
        }
    }

    pub fn add(&mut self, value: f64) {
        let bin = (value.max(0.0) / self.bin_width).floor() as usize;
        if bin >= self.counts.len() {
            self.counts.resize(bin + 1, 0);
        }
        self.counts[bin] += 1;
    }

    pub fn total(&self) -> u64 {
        self.counts.iter().sum()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LabelStats {
    pub label: Label,
    pub documents: usize,
    pub chars: Histogram,
    pub words: Histogram,
    pub mean_word_length: Histogram,
    pub mean_chars: f64,
    pub mean_words: f64,
    pub mean_of_mean_word_length: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EdaReport {
    pub per_label: [LabelStats; 2],
    pub total_documents: usize,
    pub total_chars: usize,
    pub total_words: usize,
}

pub const CHAR_BIN_WIDTH: f64 = 10.0;
pub const WORD_BIN_WIDTH: f64 = 2.0;
pub const WORD_LENGTH_BIN_WIDTH: f64 = 1.0;

pub fn corpus_stats(corpus: &LabeledCorpus) -> EdaReport {
    let empty = |label| LabelStats {
        label,
        documents: 0,
        chars: Histogram::new(CHAR_BIN_WIDTH),
        words: Histogram::new(WORD_BIN_WIDTH),
        mean_word_length: Histogram::new(WORD_LENGTH_BIN_WIDTH),
        mean_chars: 0.0,
        mean_words: 0.0,
        mean_of_mean_word_length: 0.0,
    };
    let mut per_label = [empty(0), empty(1)];
    let mut sums = [[0.0f64; 3]; 2];
    let (mut total_chars, mut total_words) = (0, 0);
    for doc in &corpus.docs {
        let s = document_stats(&doc.text);
        let slot = &mut per_label[doc.label as usize];
        slot.documents += 1;
        slot.chars.add(s.chars as f64);
        slot.words.add(s.words as f64);
        slot.mean_word_length.add(s.mean_word_length);
        let acc = &mut sums[doc.label as usize];
        acc[0] += s.chars as f64;
        acc[1] += s.words as f64;
        acc[2] += s.mean_word_length;
        total_chars += s.chars;
        total_words += s.words;
    }
    for (slot, acc) in per_label.iter_mut().zip(sums) {
        if slot.documents > 0 {
            let n = slot.documents as f64;
            slot.mean_chars = acc[0] / n;
            slot.mean_words = acc[1] / n;
            slot.mean_of_mean_word_length = acc[2] / n;
        }
    }
    EdaReport {
        per_label,
        total_documents: corpus.len(),
        total_chars,
        total_words,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn balanced(n_per_label: usize) -> LabeledCorpus {
        LabeledCorpus::from_pairs(
            (0..2 * n_per_label).map(|i| (format!("doc {i}"), (i % 2) as Label)),
            "synthetic",
        )
    }

    #[test]
    fn parses_two_rows() {
        let csv = "message,cyberbullying\nselam,0\nsalak,1\n";
        let c = read_corpus(csv.as_bytes(), "message", "cyberbullying").unwrap();
        assert_eq!(c.len(), 2);
        assert_eq!(c.label_counts(), [1, 1]);
        assert_eq!(c.docs[1].text, "salak");
    }

    #[test]
    fn quoted_fields_and_column_order() {
        let csv = "cyberbullying,id,message\n1,7,\"sen, salak \"\"mısın\"\"\"\n";
        let c = read_corpus(csv.as_bytes(), "message", "cyberbullying").unwrap();
        assert_eq!(c.docs[0].text, "sen, salak \"mısın\"");
        assert_eq!(c.docs[0].label, 1);
    }

    #[test]
    fn missing_label_column() {
        let csv = "message,other\nselam,0\n";
        let err = read_corpus(csv.as_bytes(), "message", "cyberbullying").unwrap_err();
        assert!(matches!(err, Error::MissingColumn(ref c) if c == "cyberbullying"));
    }

    #[test]
    fn bad_label_reports_row() {
        let csv = "message,cyberbullying\na,0\nb,2\n";
        let err = read_corpus(csv.as_bytes(), "message", "cyberbullying").unwrap_err();
        assert!(matches!(err, Error::Row { row: 2, .. }), "{err}");
    }

    #[test]
    fn invalid_utf8_is_encoding_error() {
        let mut bytes = b"message,cyberbullying\n".to_vec();
        bytes.extend_from_slice(&[0xff, 0xfe, b',', b'1', b'\n']);
        let err = read_corpus(bytes.as_slice(), "message", "cyberbullying").unwrap_err();
        assert!(matches!(err, Error::Encoding(_)), "{err}");
    }

    #[test]
    fn split_sizes() {
        let (train, test) = stratified_split(&balanced(1500), 0.3, 7).unwrap();
        assert_eq!(test.len(), 900);
        assert_eq!(test.label_counts(), [450, 450]);
        assert_eq!(train.len(), 2100);

        let (_, test) = stratified_split(&balanced(5), 0.3, 7).unwrap();
        assert_eq!(test.len(), 3);
        // Equal remainders: the extra document goes to label 0.
        assert_eq!(test.label_counts(), [2, 1]);
    }

    #[test]
    fn split_is_deterministic_and_seed_sensitive() {
        let c = balanced(50);
        let a = stratified_split_indices(&c, 0.3, 1).unwrap();
        let b = stratified_split_indices(&c, 0.3, 1).unwrap();
        let other = stratified_split_indices(&c, 0.3, 2).unwrap();
        assert_eq!(a, b);
        assert_ne!(a.1, other.1);
    }

    #[test]
    fn split_rejects_bad_fraction_and_single_label() {
        let c = balanced(3);
        assert!(matches!(
            stratified_split(&c, 0.0, 1),
            Err(Error::Parameter(_))
        ));
        assert!(matches!(
            stratified_split(&c, 1.0, 1),
            Err(Error::Parameter(_))
        ));
        let single = LabeledCorpus::from_pairs([("a", 1), ("b", 1)], "synthetic");
        assert!(matches!(
            stratified_split(&single, 0.5, 1),
            Err(Error::Stratification(_))
        ));
    }

    #[test]
    fn stats_examples() {
        let s = document_stats("iyi misin");
        assert_eq!((s.chars, s.words), (9, 2));
        assert_eq!(s.mean_word_length, 4.0);
        let e = document_stats("");
        assert_eq!((e.chars, e.words, e.mean_word_length), (0, 0, 0.0));

        let c = LabeledCorpus::from_pairs([("iyi misin", 0), ("", 1)], "synthetic");
        let report = corpus_stats(&c);
        for stats in &report.per_label {
            assert_eq!(stats.chars.total(), 1);
            assert_eq!(stats.words.total(), 1);
            assert_eq!(stats.mean_word_length.total(), 1);
        }
        assert_eq!(report.total_chars, 9);
    }

    #[test]
    fn character_count_uses_scalar_values() {
        assert_eq!(document_stats("çğış").chars, 4);
    }
}

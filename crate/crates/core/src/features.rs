//! Unigram vocabulary, smoothed IDF weights and L2-normalized TF-IDF vectors.

use std::collections::HashMap;
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::normalize::TokenStream;
use crate::sparse::{SparseMatrix, SparseVector};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Vocabulary {
    terms: Vec<String>,
    index: HashMap<String, u32>,
    df: Vec<usize>,
    n_train: usize,
}

impl Vocabulary {
    pub fn from_parts(terms: Vec<String>, df: Vec<usize>, n_train: usize) -> Result<Self> {
        if terms.len() != df.len() {
            return Err(Error::Shape("terms and df lengths differ".into()));
        }
        let mut index = HashMap::with_capacity(terms.len());
        for (i, t) in terms.iter().enumerate() {
            if index.insert(t.clone(), i as u32).is_some() {
                return Err(Error::Data(format!("duplicate vocabulary term `{t}`")));
            }
        }
        Ok(Vocabulary {
            terms,
            index,
            df,
            n_train,
        })
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> &[String] {
        &self.terms
    }

    pub fn document_frequencies(&self) -> &[usize] {
        &self.df
    }

    pub fn n_train(&self) -> usize {
        self.n_train
    }

    pub fn index_of(&self, term: &str) -> Option<usize> {
        self.index.get(term).map(|&i| i as usize)
    }
}

/// Counts document frequencies and keeps terms with `df >= min_df`, indexed
/// by first appearance.
pub fn build_vocabulary(token_docs: &[TokenStream], min_df: usize) -> Vocabulary {
    let mut first_seen: Vec<String> = Vec::new();
    let mut df: HashMap<&str, usize> = HashMap::new();
    for doc in token_docs {
        let mut seen_here: Vec<&str> = Vec::with_capacity(doc.len());
        for t in doc {
            if seen_here.contains(&t.as_str()) {
                continue;
            }
            seen_here.push(t);
            let entry = df.entry(t.as_str()).or_insert_with(|| {
                first_seen.push(t.clone());
                0
            });
            *entry += 1;
        }
    }
    let mut terms = Vec::new();
    let mut dfs = Vec::new();
    for t in first_seen {
        let d = df[t.as_str()];
        if d >= min_df.max(1) {
            terms.push(t);
            dfs.push(d);
        }
    }
    Vocabulary::from_parts(terms, dfs, token_docs.len()).expect("terms are unique by construction")
}

/// Raw term counts; out-of-vocabulary tokens are ignored.
pub fn vectorize_counts(tokens: &[String], vocab: &Vocabulary) -> SparseVector {
    let pairs = tokens
        .iter()
        .filter_map(|t| vocab.index.get(t.as_str()).map(|&i| (i, 1.0)))
        .collect();
    SparseVector::from_pairs(pairs)
}

pub fn count_matrix(token_docs: &[TokenStream], vocab: &Vocabulary) -> SparseMatrix {
    let rows = token_docs
        .iter()
        .map(|d| vectorize_counts(d, vocab))
        .collect();
    SparseMatrix::from_rows(vocab.len(), rows).expect("indices come from the vocabulary")
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IdfModel {
    pub weights: Vec<f64>,
}

impl IdfModel {
    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }
}

pub fn smoothed_idf(n_docs: usize, df: usize) -> f64 {
    ((1.0 + n_docs as f64) / (1.0 + df as f64)).ln() + 1.0
}

/// `idf = ln((1 + N) / (1 + df)) + 1`, with `df` read from the count matrix.
pub fn fit_idf(count_matrix: &SparseMatrix, vocab: &Vocabulary) -> Result<IdfModel> {
    if count_matrix.dim() != vocab.len() {
        return Err(Error::Shape(format!(
            "count matrix has {} columns, vocabulary has {} terms",
            count_matrix.dim(),
            vocab.len()
        )));
    }
    let n = count_matrix.n_rows();
    let weights = count_matrix
        .column_support()
        .into_iter()
        .map(|df| smoothed_idf(n, df))
        .collect();
    Ok(IdfModel { weights })
}

/// `count * idf`, then scaled to unit Euclidean norm. Zero vectors stay zero.
pub fn tfidf_transform(counts: &SparseVector, idf: &IdfModel) -> Result<SparseVector> {
    if let Some(max) = counts.max_index() {
        if max >= idf.len() {
            return Err(Error::Shape(format!(
                "count index {max} outside idf table of {}",
                idf.len()
            )));
        }
    }
    let weighted: Vec<f64> = counts
        .iter()
        .map(|(i, c)| c * idf.weights[i])
        .collect();
    let norm = weighted.iter().map(|x| x * x).sum::<f64>().sqrt();
    if norm == 0.0 {
        return Ok(SparseVector::new());
    }
    SparseVector::from_sorted(
        counts.indices().to_vec(),
        weighted.into_iter().map(|x| x / norm).collect(),
    )
}

/// The column space a model was trained on. Matrices built outside a
/// vocabulary use [`FeatureSpace::anonymous`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureSpace {
    pub dim: usize,
    pub terms: Vec<String>,
    pub df: Vec<usize>,
    pub idf: Vec<f64>,
    pub n_train: usize,
}

impl FeatureSpace {
    pub fn anonymous(dim: usize) -> Self {
        FeatureSpace {
            dim,
            terms: Vec::new(),
            df: Vec::new(),
            idf: Vec::new(),
            n_train: 0,
        }
    }

    pub fn is_anonymous(&self) -> bool {
        self.terms.is_empty() && self.dim > 0
    }

    pub fn canonical_json(&self) -> String {
        let value = serde_json::to_value(self).expect("feature space serializes");
        serde_json::to_string(&value).expect("json value serializes")
    }

    /// Hex SHA-256 of the canonical serialization.
    pub fn fingerprint(&self) -> String {
        hex::encode(Sha256::digest(self.canonical_json().as_bytes()))
    }
}

/// A sparse matrix tagged with the space its columns belong to.
#[derive(Debug, Clone)]
pub struct FeatureMatrix {
    pub space: Arc<FeatureSpace>,
    pub matrix: SparseMatrix,
}

impl FeatureMatrix {
    /// Wraps a hand-built matrix in an anonymous space of its dimension.
    pub fn anonymous(matrix: SparseMatrix) -> Self {
        FeatureMatrix {
            space: Arc::new(FeatureSpace::anonymous(matrix.dim())),
            matrix,
        }
    }

    pub fn n_rows(&self) -> usize {
        self.matrix.n_rows()
    }

    pub fn select_rows(&self, positions: &[usize]) -> FeatureMatrix {
        FeatureMatrix {
            space: Arc::clone(&self.space),
            matrix: self.matrix.select_rows(positions),
        }
    }
}

/// Vocabulary plus IDF, fitted on training tokens only.
#[derive(Debug, Clone)]
pub struct TfidfFeaturizer {
    vocab: Vocabulary,
    idf: IdfModel,
    space: Arc<FeatureSpace>,
}

impl TfidfFeaturizer {
    pub fn fit(train_tokens: &[TokenStream], min_df: usize) -> Self {
        let vocab = build_vocabulary(train_tokens, min_df);
        let counts = count_matrix(train_tokens, &vocab);
        let idf = fit_idf(&counts, &vocab).expect("dimensions agree by construction");
        Self::from_parts(vocab, idf).expect("dimensions agree by construction")
    }

    pub fn from_parts(vocab: Vocabulary, idf: IdfModel) -> Result<Self> {
        if vocab.len() != idf.len() {
            return Err(Error::Shape("vocabulary and idf lengths differ".into()));
        }
        let space = Arc::new(FeatureSpace {
            dim: vocab.len(),
            terms: vocab.terms.clone(),
            df: vocab.df.clone(),
            idf: idf.weights.clone(),
            n_train: vocab.n_train,
        });
        Ok(TfidfFeaturizer { vocab, idf, space })
    }

    pub fn from_space(space: Arc<FeatureSpace>) -> Result<Self> {
        if space.terms.len() != space.dim || space.idf.len() != space.dim {
            return Err(Error::Data(
                "feature space carries no vocabulary to featurize text with".into(),
            ));
        }
        let vocab = Vocabulary::from_parts(space.terms.clone(), space.df.clone(), space.n_train)?;
        let idf = IdfModel {
            weights: space.idf.clone(),
        };
        Ok(TfidfFeaturizer { vocab, idf, space })
    }

    pub fn vocabulary(&self) -> &Vocabulary {
        &self.vocab
    }

    pub fn idf(&self) -> &IdfModel {
        &self.idf
    }

    pub fn space(&self) -> &Arc<FeatureSpace> {
        &self.space
    }

    pub fn transform_one(&self, tokens: &[String]) -> SparseVector {
        tfidf_transform(&vectorize_counts(tokens, &self.vocab), &self.idf)
            .expect("counts come from this vocabulary")
    }

    pub fn transform(&self, token_docs: &[TokenStream]) -> FeatureMatrix {
        let rows = token_docs.iter().map(|d| self.transform_one(d)).collect();
        FeatureMatrix {
            space: Arc::clone(&self.space),
            matrix: SparseMatrix::from_rows(self.vocab.len(), rows)
                .expect("indices come from the vocabulary"),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn docs(raw: &[&[&str]]) -> Vec<TokenStream> {
        raw.iter()
            .map(|d| d.iter().map(|s| s.to_string()).collect())
            .collect()
    }

    fn three() -> Vec<TokenStream> {
        docs(&[&["kötü", "salak"], &["kötü", "iyi"], &["iyi", "salak"]])
    }

    #[test]
    fn vocabulary_examples() {
        let v = build_vocabulary(&three(), 2);
        assert_eq!(v.terms(), &["kötü", "salak", "iyi"]);
        assert_eq!(v.document_frequencies(), &[2, 2, 2]);

        let mut more = three();
        more.push(vec!["zeki".into()]);
        let v = build_vocabulary(&more, 2);
        assert_eq!(v.index_of("zeki"), None);
        assert_eq!(v.n_train(), 4);

        assert!(build_vocabulary(&[], 2).is_empty());
    }

    #[test]
    fn df_counts_documents_not_occurrences() {
        let v = build_vocabulary(&docs(&[&["a", "a", "a"], &["b"]]), 1);
        assert_eq!(v.document_frequencies(), &[1, 1]);
    }

    #[test]
    fn count_examples() {
        let v = build_vocabulary(&three(), 2);
        let c = vectorize_counts(&["kötü".into(), "kötü".into()], &v);
        assert_eq!(c.iter().collect::<Vec<_>>(), vec![(0, 2.0)]);
        assert!(vectorize_counts(&["bilinmeyen".into()], &v).is_empty());
        assert!(vectorize_counts(&[], &v).is_empty());
    }

    #[test]
    fn idf_examples() {
        assert_eq!(smoothed_idf(7, 7), 1.0);
        let v = build_vocabulary(&three(), 2);
        let idf = fit_idf(&count_matrix(&three(), &v), &v).unwrap();
        for w in &idf.weights {
            assert!((w - ((4.0f64 / 3.0).ln() + 1.0)).abs() < 1e-15);
            assert!((w - 1.287682).abs() < 1e-6);
        }
        let empty = build_vocabulary(&[], 2);
        assert!(fit_idf(&SparseMatrix::new(0), &empty).unwrap().is_empty());
        assert!(matches!(fit_idf(&SparseMatrix::new(2), &v), Err(Error::Shape(_))));
    }

    #[test]
    fn tfidf_examples() {
        let f = TfidfFeaturizer::fit(&three(), 2);
        let row = f.transform_one(&three()[0]);
        for x in row.values() {
            assert!((x - std::f64::consts::FRAC_1_SQRT_2).abs() < 1e-7);
        }
        assert!(f.transform_one(&[]).is_empty());
        let single = f.transform_one(&["iyi".into()]);
        assert_eq!(single.values(), &[1.0]);
        let bad = SparseVector::from_pairs(vec![(9, 1.0)]);
        assert!(matches!(tfidf_transform(&bad, f.idf()), Err(Error::Shape(_))));
    }

    #[test]
    fn fingerprint_tracks_content() {
        let a = TfidfFeaturizer::fit(&three(), 2);
        let b = TfidfFeaturizer::fit(&three(), 1);
        let mut more = three();
        more.push(vec!["kötü".into()]);
        let c = TfidfFeaturizer::fit(&more, 2);
        assert_eq!(a.space().fingerprint(), b.space().fingerprint());
        assert_ne!(a.space().fingerprint(), c.space().fingerprint());
        assert_eq!(a.space().fingerprint().len(), 64);
    }
}

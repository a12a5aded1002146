//! Turkish social-media text normalization.
//!
//! The pipeline is fixed: Turkish-aware lowercasing, noise stripping (URLs,
//! mentions, the retweet marker, punctuation, digits), whitespace
//! tokenization with stopword removal, collapsing of character runs and
//! slang canonicalization. No stemming is applied.

use std::collections::{BTreeMap, HashSet};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const BUNDLED_STOPWORDS: &str = include_str!("../../../assets/stopwords_tr.txt");
pub const BUNDLED_SLANG: &str = include_str!("../../../assets/slang_tr.tsv");

/// Ordered tokens produced by [`normalize_document`].
pub type TokenStream = Vec<String>;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct StripRules {
    pub urls: bool,
    pub mentions: bool,
    pub retweets: bool,
    pub punctuation: bool,
    pub digits: bool,
}

impl Default for StripRules {
    fn default() -> Self {
        StripRules {
            urls: true,
            mentions: true,
            retweets: true,
            punctuation: true,
            digits: true,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct NormalizerConfig {
    pub stopwords: HashSet<String>,
    /// variant -> canonical. Canonical forms also map to themselves.
    pub lexicon: BTreeMap<String, String>,
    pub max_edit_distance: usize,
    pub min_fuzzy_length: usize,
    pub strip: StripRules,
    pub collapse_repeats: bool,
    pub normalize_slang: bool,
}

impl Default for NormalizerConfig {
    fn default() -> Self {
        NormalizerConfig {
            stopwords: HashSet::new(),
            lexicon: BTreeMap::new(),
            max_edit_distance: 1,
            min_fuzzy_length: 5,
            strip: StripRules::default(),
            collapse_repeats: true,
            normalize_slang: true,
        }
    }
}

impl NormalizerConfig {
    /// Configuration with the shipped stopword list and slang lexicon.
    pub fn bundled() -> Self {
        let mut config = NormalizerConfig::default();
        config.stopwords = parse_stopwords(BUNDLED_STOPWORDS);
        config.lexicon = parse_lexicon(BUNDLED_SLANG).expect("bundled slang lexicon is well formed");
        config
    }

    pub fn with_stopwords<I, S>(mut self, words: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        self.stopwords = words.into_iter().map(Into::into).collect();
        self
    }

    pub fn with_lexicon<I, A, B>(mut self, entries: I) -> Self
    where
        I: IntoIterator<Item = (A, B)>,
        A: Into<String>,
        B: Into<String>,
    {
        self.lexicon.clear();
        for (variant, canonical) in entries {
            insert_lexicon_entry(&mut self.lexicon, variant.into(), canonical.into());
        }
        self
    }

    pub fn load_stopwords(&mut self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        self.stopwords = parse_stopwords(&text);
        Ok(())
    }

    pub fn load_lexicon(&mut self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        self.lexicon = parse_lexicon(&text)?;
        Ok(())
    }
}

fn content_lines(text: &str) -> impl Iterator<Item = (usize, &str)> {
    text.lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim_end_matches('\r')))
        .filter(|(_, l)| !l.trim().is_empty() && !l.trim_start().starts_with('#'))
}

/// One token per line; `#` starts a comment line.
pub fn parse_stopwords(text: &str) -> HashSet<String> {
    content_lines(text)
        .map(|(_, l)| turkish_lowercase(l.trim()))
        .collect()
}

/// `variant<TAB>canonical` per line; `#` starts a comment line.
pub fn parse_lexicon(text: &str) -> Result<BTreeMap<String, String>> {
    let mut lexicon = BTreeMap::new();
    for (line_no, line) in content_lines(text) {
        let mut cols = line.split('\t');
        match (cols.next(), cols.next(), cols.next()) {
            (Some(v), Some(c), None) if !v.trim().is_empty() && !c.trim().is_empty() => {
                insert_lexicon_entry(
                    &mut lexicon,
                    turkish_lowercase(v.trim()),
                    turkish_lowercase(c.trim()),
                );
            }
            _ => {
                return Err(Error::Asset(format!(
                    "slang lexicon line {line_no}: expected `variant<TAB>canonical`"
                )))
            }
        }
    }
    Ok(lexicon)
}

fn insert_lexicon_entry(lexicon: &mut BTreeMap<String, String>, variant: String, canonical: String) {
    lexicon
        .entry(canonical.clone())
        .or_insert_with(|| canonical.clone());
    lexicon.insert(variant, canonical);
}

/// Lowercasing with the Turkish dotted/dotless I rules.
pub fn turkish_lowercase(text: &str) -> String {
    let mut out = String::with_capacity(text.len());
    for c in text.chars() {
        match c {
            'İ' => out.push('i'),
            'I' => out.push('ı'),
            _ => out.extend(c.to_lowercase()),
        }
    }
    out
}

fn is_url_start(token: &str) -> bool {
    token.contains("http://") || token.contains("https://") || token.contains("www.")
}

/// Removes URLs, mentions, the `rt` marker, punctuation/symbols and digits
/// (in that order), then collapses whitespace. Expects lowercased input.
pub fn strip_noise(text: &str, config: &NormalizerConfig) -> String {
    let rules = &config.strip;
    let mut kept: Vec<String> = Vec::new();
    for raw in text.split_whitespace() {
        let mut token = raw.to_string();
        if rules.urls && is_url_start(&token) {
            token = strip_urls_in_token(&token);
        }
        if rules.mentions && token.contains('@') {
            token = strip_mentions_in_token(&token);
        }
        if token.is_empty() {
            continue;
        }
        if rules.retweets && token == "rt" {
            continue;
        }
        kept.push(token);
    }
    let joined = kept.join(" ");
    let cleaned: String = joined
        .chars()
        .map(|c| {
            if c.is_whitespace() {
                ' '
            } else if rules.digits && c.is_numeric() {
                ' '
            } else if rules.punctuation && !c.is_alphanumeric() {
                ' '
            } else {
                c
            }
        })
        .collect();
    cleaned.split_whitespace().collect::<Vec<_>>().join(" ")
}

// A URL runs from its scheme (or `www.`) to the end of the whitespace-free token.
fn strip_urls_in_token(token: &str) -> String {
    let cut = ["http://", "https://", "www."]
        .iter()
        .filter_map(|p| token.find(p))
        .min();
    match cut {
        Some(pos) => token[..pos].to_string(),
        None => token.to_string(),
    }
}

// `@` followed by non-whitespace is a mention through the end of the token.
fn strip_mentions_in_token(token: &str) -> String {
    match token.find('@') {
        Some(pos) if pos + 1 < token.len() => token[..pos].to_string(),
        _ => token.to_string(),
    }
}

/// Whitespace split, dropping stopwords.
pub fn tokenize_and_filter(text: &str, config: &NormalizerConfig) -> TokenStream {
    text.split_whitespace()
        .filter(|t| !t.is_empty() && !config.stopwords.contains(*t))
        .map(str::to_string)
        .collect()
}

/// Replaces every run of three or more identical characters by one.
pub fn collapse_repeats(token: &str) -> String {
    let chars: Vec<char> = token.chars().collect();
    let mut out = String::with_capacity(token.len());
    let mut i = 0;
    while i < chars.len() {
        let mut j = i;
        while j < chars.len() && chars[j] == chars[i] {
            j += 1;
        }
        let run = j - i;
        let keep = if run >= 3 { 1 } else { run };
        out.extend(std::iter::repeat(chars[i]).take(keep));
        i = j;
    }
    out
}

/// Levenshtein distance over Unicode scalar values.
pub fn levenshtein(a: &str, b: &str) -> usize {
    let a: Vec<char> = a.chars().collect();
    let b: Vec<char> = b.chars().collect();
    if a.is_empty() {
        return b.len();
    }
    let mut prev: Vec<usize> = (0..=b.len()).collect();
    let mut cur = vec![0usize; b.len() + 1];
    for (i, ca) in a.iter().enumerate() {
        cur[0] = i + 1;
        for (j, cb) in b.iter().enumerate() {
            let sub = prev[j] + usize::from(ca != cb);
            cur[j + 1] = sub.min(prev[j + 1] + 1).min(cur[j] + 1);
        }
        std::mem::swap(&mut prev, &mut cur);
    }
    prev[b.len()]
}

/// Maps a token to its canonical slang form, exactly or by nearest edit distance.
pub fn normalize_slang(token: &str, config: &NormalizerConfig) -> String {
    if let Some(canonical) = config.lexicon.get(token) {
        return canonical.clone();
    }
    let len = token.chars().count();
    if config.max_edit_distance == 0 || len < config.min_fuzzy_length {
        return token.to_string();
    }
    let mut best: Option<(usize, &str)> = None;
    for (variant, canonical) in &config.lexicon {
        let vlen = variant.chars().count();
        if vlen.abs_diff(len) > config.max_edit_distance {
            continue;
        }
        let d = levenshtein(token, variant);
        if d > config.max_edit_distance {
            continue;
        }
        let better = match best {
            None => true,
            Some((bd, bc)) => d < bd || (d == bd && canonical.as_str() < bc),
        };
        if better {
            best = Some((d, canonical.as_str()));
        }
    }
    best.map_or_else(|| token.to_string(), |(_, c)| c.to_string())
}

/// The full normalization pipeline for one raw message.
pub fn normalize_document(text: &str, config: &NormalizerConfig) -> TokenStream {
    let lowered = turkish_lowercase(text);
    let stripped = strip_noise(&lowered, config);
    tokenize_and_filter(&stripped, config)
        .into_iter()
        .map(|t| {
            if config.collapse_repeats {
                collapse_repeats(&t)
            } else {
                t
            }
        })
        .map(|t| {
            if config.normalize_slang {
                normalize_slang(&t, config)
            } else {
                t
            }
        })
        // Collapsing can surface a stopword ("veee") or the retweet marker ("rttt").
        .filter(|t| {
            !t.is_empty()
                && !config.stopwords.contains(t)
                && !(config.strip.retweets && t == "rt")
        })
        .collect()
}

pub fn normalize_corpus<'a>(
    texts: impl IntoIterator<Item = &'a str>,
    config: &NormalizerConfig,
) -> Vec<TokenStream> {
    texts
        .into_iter()
        .map(|t| normalize_document(t, config))
        .collect()
}

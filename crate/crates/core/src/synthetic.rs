//! A seeded generator of Turkish-like short messages whose positive label
//! correlates with planted abusive tokens.

use std::collections::BTreeMap;

use rand::seq::SliceRandom;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

use crate::corpus::{Label, LabeledCorpus, LabeledDocument, DEFAULT_LABEL_COLUMN, DEFAULT_TEXT_COLUMN};
use crate::error::{Error, Result};
use crate::normalize::{parse_lexicon, BUNDLED_SLANG};
use crate::util::rng_from_seed;

pub const SYNTHETIC_SEED: u64 = 20_240_417;
pub const SYNTHETIC_PER_LABEL: usize = 1000;

const NEUTRAL: &[&str] = &[
    "maç", "takım", "güzel", "bugün", "hava", "okul", "film", "kitap", "yemek", "çay", "kahve", "arkadaş",
    "tatil", "deniz", "şehir", "İstanbul", "Ankara", "İzmir", "müzik", "konser", "oyun", "gol", "hakem",
    "sezon", "haber", "seçim", "ekonomi", "fiyat", "araba", "yol", "trafik", "sabah", "akşam", "gece",
    "hafta", "tebrikler", "başarı", "teşekkürler", "harika", "mutlu", "yeni", "proje", "ders", "sınav",
    "öğretmen", "öğrenci", "aile", "anne", "baba", "kardeş", "bayram", "doğum", "günü", "kutlu", "olsun",
    "sevgi", "selam", "merhaba", "hayırlı", "cumalar", "yağmur", "kar", "güneş", "bahar", "yaz", "kış",
    "sonbahar", "iş", "toplantı", "rapor", "bilgisayar", "telefon", "uygulama", "video", "fotoğraf",
    "paylaşım", "takip", "yorum", "dizi", "bölüm", "final", "sahne", "oyuncu", "şarkı", "albüm", "yıl",
    "ay", "saat", "dakika", "çarşı", "pazar", "market", "ekmek", "su", "süt", "meyve", "elma", "portakal",
    "kedi", "köpek", "park", "bahçe", "çiçek", "ağaç", "orman", "dağ", "göl", "nehir", "köprü", "otobüs",
    "metro", "uçak", "bilet", "tren", "istasyon", "hastane", "doktor", "sağlık", "spor", "koşu", "yüzme",
    "IŞIK", "Iğdır", "ılık", "kırmızı", "mavi", "yeşil", "sarı", "beyaz", "siyah", "sessiz", "kalabalık",
];

const PRONOUNS: &[&str] = &["sen", "seni", "senin", "sizi", "bu", "o"];

fn lexicon_variants() -> BTreeMap<String, Vec<String>> {
    let lexicon = parse_lexicon(BUNDLED_SLANG).expect("bundled lexicon parses");
    let mut by_canonical: BTreeMap<String, Vec<String>> = BTreeMap::new();
    for (variant, canonical) in lexicon {
        by_canonical.entry(canonical).or_default().push(variant);
    }
    by_canonical
}

fn turkish_upper(s: &str) -> String {
    s.chars()
        .map(|c| match c {
            'i' => "İ".to_string(),
            'ı' => "I".to_string(),
            other => other.to_uppercase().collect(),
        })
        .collect()
}

fn elongate(word: &str, rng: &mut ChaCha8Rng) -> String {
    let chars: Vec<char> = word.chars().collect();
    let vowels: Vec<usize> = (0..chars.len()).filter(|&i| "aeıioöuü".contains(chars[i])).collect();
    let Some(&at) = vowels.choose(rng) else {
        return word.to_string();
    };
    let times = rng.gen_range(3..7);
    let mut out = String::new();
    for (i, &c) in chars.iter().enumerate() {
        out.push(c);
        if i == at {
            for _ in 1..times {
                out.push(c);
            }
        }
    }
    out
}

/// Replaces one letter with a neighbour from a small confusion set.
fn typo(word: &str, rng: &mut ChaCha8Rng) -> String {
    const SWAPS: &[(char, char)] = &[('a', 'e'), ('k', 'q'), ('ı', 'i'), ('s', 'z'), ('e', 'a'), ('r', 'l')];
    let chars: Vec<char> = word.chars().collect();
    let spots: Vec<(usize, char)> = chars
        .iter()
        .enumerate()
        .filter_map(|(i, c)| SWAPS.iter().find(|(a, _)| a == c).map(|&(_, b)| (i, b)))
        .collect();
    match spots.choose(rng) {
        Some(&(i, b)) => chars.iter().enumerate().map(|(j, &c)| if j == i { b } else { c }).collect(),
        None => word.to_string(),
    }
}

fn harmful_token(variants: &BTreeMap<String, Vec<String>>, canon: &[&String], rng: &mut ChaCha8Rng) -> String {
    let c = canon[rng.gen_range(0..canon.len())];
    let forms = &variants[c];
    let mut w = forms[rng.gen_range(0..forms.len())].clone();
    let roll: f64 = rng.gen();
    if roll < 0.2 {
        w = elongate(&w, rng);
    } else if roll < 0.3 && w.chars().count() >= 6 {
        w = typo(&w, rng);
    }
    if rng.gen_bool(0.15) {
        w = turkish_upper(&w);
    }
    w
}

fn decorate(words: &mut Vec<String>, rng: &mut ChaCha8Rng) {
    if rng.gen_bool(0.25) {
        words.insert(0, format!("@kullanici{}", rng.gen_range(1..500)));
    }
    if rng.gen_bool(0.1) {
        words.insert(0, "RT".to_string());
    }
    if rng.gen_bool(0.15) {
        words.push(format!("https://t.co/{:x}", rng.gen::<u32>()));
    }
    if rng.gen_bool(0.2) {
        let at = rng.gen_range(0..words.len());
        words[at].push_str(["!!!", "?", "...", ",", "!?"][rng.gen_range(0..5)]);
    }
    if rng.gen_bool(0.1) {
        words.push(rng.gen_range(1..3000).to_string());
    }
}

fn message(harmful: usize, variants: &BTreeMap<String, Vec<String>>, canon: &[&String], rng: &mut ChaCha8Rng) -> String {
    let n = rng.gen_range(4..12);
    let mut words: Vec<String> = (0..n).map(|_| NEUTRAL[rng.gen_range(0..NEUTRAL.len())].to_string()).collect();
    if harmful > 0 && rng.gen_bool(0.6) {
        words.insert(rng.gen_range(0..=words.len()), PRONOUNS[rng.gen_range(0..PRONOUNS.len())].to_string());
    }
    for _ in 0..harmful {
        let t = harmful_token(variants, canon, rng);
        words.insert(rng.gen_range(0..=words.len()), t);
    }
    decorate(&mut words, rng);
    words.join(" ")
}

/// `per_label` documents of each label. About 93% of positives carry at
/// least one abusive token, about 5% of negatives carry one, and 3% of each
/// label are flipped, keeping the two labels balanced.
pub fn synthetic_corpus(per_label: usize, seed: u64) -> LabeledCorpus {
    let variants = lexicon_variants();
    let canon: Vec<&String> = variants.keys().collect();
    let mut rng = rng_from_seed(seed);
    let mut rows: Vec<(String, Label)> = Vec::with_capacity(2 * per_label);
    for _ in 0..per_label {
        let k = if rng.gen_bool(0.93) { rng.gen_range(1..4) } else { 0 };
        rows.push((message(k, &variants, &canon, &mut rng), 1));
    }
    for _ in 0..per_label {
        let k = usize::from(rng.gen_bool(0.05));
        rows.push((message(k, &variants, &canon, &mut rng), 0));
    }
    let flips = (per_label as f64 * 0.03).round() as usize;
    for i in 0..flips {
        rows[i].1 = 0;
        rows[per_label + i].1 = 1;
    }
    rows.shuffle(&mut rng);
    let docs = rows
        .into_iter()
        .enumerate()
        .map(|(id, (text, label))| LabeledDocument { id, text, label })
        .collect();
    LabeledCorpus::new(docs, "synthetic")
}

/// Writes `message,cyberbullying` CSV.
pub fn write_corpus_csv<W: std::io::Write>(corpus: &LabeledCorpus, out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    let err = |e: csv::Error| Error::Csv(e.to_string());
    w.write_record([DEFAULT_TEXT_COLUMN, DEFAULT_LABEL_COLUMN]).map_err(err)?;
    for d in &corpus.docs {
        w.write_record([d.text.as_str(), if d.label == 1 { "1" } else { "0" }]).map_err(err)?;
    }
    w.flush().map_err(|e| Error::Csv(e.to_string()))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn balanced_and_deterministic() {
        let a = synthetic_corpus(50, 1);
        assert_eq!(a.label_counts(), [50, 50]);
        assert_eq!(a, synthetic_corpus(50, 1));
    }

    #[test]
    fn csv_round_trip() {
        let a = synthetic_corpus(20, 3);
        let mut buf = Vec::new();
        write_corpus_csv(&a, &mut buf).unwrap();
        let b = crate::corpus::read_corpus(&buf[..], DEFAULT_TEXT_COLUMN, DEFAULT_LABEL_COLUMN).unwrap();
        assert_eq!(a.docs, b.docs);
    }
}

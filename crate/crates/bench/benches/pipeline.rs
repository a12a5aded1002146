use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use std::hint::black_box;

use zorbalik_core::model::{fit_model, ClassifierSpec, ModelKind};
use zorbalik_core::normalize::{normalize_corpus, normalize_document, NormalizerConfig};
use zorbalik_core::synthetic::synthetic_corpus;
use zorbalik_core::TfidfFeaturizer;

fn normalize(c: &mut Criterion) {
    let config = NormalizerConfig::bundled();
    let corpus = synthetic_corpus(250, 1);
    c.bench_function("normalize_document", |b| {
        b.iter(|| {
            for d in &corpus.docs {
                black_box(normalize_document(&d.text, &config));
            }
        })
    });
}

fn tfidf(c: &mut Criterion) {
    let corpus = synthetic_corpus(500, 2);
    let tokens = normalize_corpus(corpus.texts(), &NormalizerConfig::bundled());
    c.bench_function("tfidf_fit_transform", |b| {
        b.iter(|| {
            let f = TfidfFeaturizer::fit(&tokens, 2);
            black_box(f.transform(&tokens))
        })
    });
}

fn fit(c: &mut Criterion) {
    let corpus = synthetic_corpus(300, 3);
    let tokens = normalize_corpus(corpus.texts(), &NormalizerConfig::bundled());
    let f = TfidfFeaturizer::fit(&tokens, 2);
    let x = f.transform(&tokens);
    let y = corpus.labels();
    let mut group = c.benchmark_group("fit");
    group.sample_size(10);
    for kind in [
        ModelKind::MultinomialNb,
        ModelKind::LogisticRegression,
        ModelKind::DecisionTree,
        ModelKind::RandomForest,
        ModelKind::XgbStyle,
        ModelKind::LgbmStyle,
        ModelKind::Svm,
    ] {
        let spec = ClassifierSpec::new(kind);
        group.bench_with_input(BenchmarkId::from_parameter(kind.name()), &spec, |b, spec| {
            b.iter(|| black_box(fit_model(spec, &x, &y, 0).unwrap()))
        });
    }
    group.finish();
}

criterion_group!(benches, normalize, tfidf, fit);
criterion_main!(benches);

//! Writes the bundled synthetic corpus: `cargo run -p zorbalik-core --example generate_synthetic -- data/synthetic_tr.csv`

use std::fs::File;
use std::io::BufWriter;

use zorbalik_core::synthetic::{synthetic_corpus, write_corpus_csv, SYNTHETIC_PER_LABEL, SYNTHETIC_SEED};

fn main() -> zorbalik_core::Result<()> {
    let path = std::env::args().nth(1).unwrap_or_else(|| "data/synthetic_tr.csv".into());
    let corpus = synthetic_corpus(SYNTHETIC_PER_LABEL, SYNTHETIC_SEED);
    let file = File::create(&path).map_err(|e| zorbalik_core::Error::io(&path, e))?;
    write_corpus_csv(&corpus, BufWriter::new(file))?;
    println!("wrote {} documents to {path}", corpus.len());
    Ok(())
}

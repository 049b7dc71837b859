//! Builds a vocabulary from a corpus file and shows how many tokens fall
//! outside it.
//!
//!     cargo run --example build_vocab -- [corpus.txt] [max_vocab]

use classmaxent::corpus::{build_vocabulary, tokenize, RawCorpus, UNKNOWN};

fn main() -> classmaxent::Result<()> {
    let mut args = std::env::args().skip(1);
    let path = args.next().unwrap_or_else(|| concat!(env!("CARGO_MANIFEST_DIR"), "/data/toy.txt").to_string());
    let max_vocab: usize = args.next().map_or(40, |a| a.parse().expect("max_vocab"));

    let corpus = RawCorpus::from_path(&path, false)?;
    let vocab = build_vocabulary(&corpus, max_vocab)?;
    let stream = tokenize(&corpus, &vocab);
    let unknown = stream.positions().filter(|&(_, w)| w == UNKNOWN).count();

    println!("{} sentences, {} tokens", corpus.sentences.len(), corpus.token_count());
    println!("{} entries ({} content words)", vocab.len(), vocab.content_len());
    println!("{unknown} of {} predicted tokens map to {}", stream.positions().count(), vocab.word(UNKNOWN));
    for (id, w) in vocab.words().iter().enumerate().take(12) {
        println!("{id:4}  {w}");
    }
    Ok(())
}

//! Held-out perplexity of a factored model, a deleted-interpolation trigram
//! and their mixture with the weight fit on a tuning split.
//!
//!     cargo run --release --example perplexity

use classmaxent::classing::{build_hierarchy, default_level_sizes, induce_classes};
use classmaxent::corpus::{build_vocabulary, extract_events, tokenize, RawCorpus};
use classmaxent::eval::{fit_alpha, perplexity, probability_pairs, train_trigram, Interpolated};
use classmaxent::factored::{train_factored, FactoredConfig};
use classmaxent::gis::GisConfig;

fn split(corpus: &RawCorpus, from: usize, to: usize) -> RawCorpus {
    RawCorpus { sentences: corpus.sentences[from..to].to_vec() }
}

fn main() -> classmaxent::Result<()> {
    let corpus = RawCorpus::from_path(concat!(env!("CARGO_MANIFEST_DIR"), "/data/toy.txt"), false)?;
    let n = corpus.sentences.len();
    let (train, tune, test) =
        (split(&corpus, 0, n * 8 / 10), split(&corpus, n * 8 / 10, n * 9 / 10), split(&corpus, n * 9 / 10, n));

    let vocab = build_vocabulary(&train, 60_000)?;
    let events = extract_events(&tokenize(&train, &vocab));
    let v = vocab.len();
    let indicator = induce_classes(&events, v, 8, 0)?.level(0).to_vec();
    let h = build_hierarchy(&events, v, &default_level_sizes(v, 1), 0)?;
    let cfg = FactoredConfig { gis: GisConfig { iterations: 60, ..Default::default() }, ..Default::default() };
    let maxent = train_factored(&events, &h, &indicator, &cfg)?.model;
    let trigram = train_trigram(&events, v)?;

    let (tune, test) = (tokenize(&tune, &vocab), tokenize(&test, &vocab));
    let alpha = fit_alpha(&probability_pairs(&maxent, &trigram, &tune));
    let mixed = Interpolated { maxent: &maxent, trigram: &trigram, alpha };

    println!("maxent        {:.3}", perplexity(&maxent, &test)?.perplexity);
    println!("trigram       {:.3}", perplexity(&trigram, &test)?.perplexity);
    println!("interpolated  {:.3}  (alpha {alpha:.3})", perplexity(&mixed, &test)?.perplexity);
    Ok(())
}

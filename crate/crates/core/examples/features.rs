//! Instantiates the feature templates on a corpus and lists what fires for
//! one history.
//!
//!     cargo run --example features -- [min_count]

use std::collections::BTreeMap;

use classmaxent::classing::induce_classes;
use classmaxent::corpus::{build_vocabulary, extract_events, tokenize, RawCorpus};
use classmaxent::features::FeatureSet;

fn main() -> classmaxent::Result<()> {
    let min_count: u64 = std::env::args().nth(1).map_or(3, |a| a.parse().expect("min_count"));
    let corpus = RawCorpus::from_path(concat!(env!("CARGO_MANIFEST_DIR"), "/data/toy.txt"), false)?;
    let vocab = build_vocabulary(&corpus, 60_000)?;
    let events = extract_events(&tokenize(&corpus, &vocab));
    let indicator = induce_classes(&events, vocab.len(), 8, 0)?.level(0).to_vec();
    let fs = FeatureSet::instantiate(
        events.iter().map(|e| (e.history, e.target, e.count)),
        indicator,
        vocab.len(),
        min_count,
    )?;

    let mut per_kind: BTreeMap<_, usize> = BTreeMap::new();
    for f in fs.features() {
        *per_kind.entry(f.key.kind).or_default() += 1;
    }
    println!("{} features with count >= {min_count}", fs.len());
    for (kind, n) in per_kind {
        println!("  {kind:<28} {n}");
    }

    let (the, cat) = (vocab.id("the").unwrap_or(3), vocab.id("cat").unwrap_or(4));
    let history = [the, cat];
    println!("\nafter \"{} {}\":", vocab.word(the), vocab.word(cat));
    let mut shown = 0;
    for w in 0..vocab.len() as u32 {
        let active = fs.active_features(history, w);
        if active.len() > 1 && shown < 10 {
            let kinds: Vec<String> = active.iter().map(|&j| fs.feature(j).key.kind.to_string()).collect();
            println!("  {:<10} {}", vocab.word(w), kinds.join(", "));
            shown += 1;
        }
    }
    Ok(())
}

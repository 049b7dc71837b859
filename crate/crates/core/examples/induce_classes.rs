//! Induces a nested word-class hierarchy, prints a few classes, then sweeps
//! the class count for two-level factoring by one-iteration operation count.
//!
//!     cargo run --release --example induce_classes -- [corpus.txt]

use classmaxent::classing::{build_hierarchy, induce_hierarchy_traced, sweep_class_count};
use classmaxent::corpus::{build_vocabulary, extract_events, tokenize, RawCorpus};
use classmaxent::factored::FactoredConfig;

fn main() -> classmaxent::Result<()> {
    let path =
        std::env::args().nth(1).unwrap_or_else(|| concat!(env!("CARGO_MANIFEST_DIR"), "/data/toy.txt").to_string());
    let corpus = RawCorpus::from_path(&path, false)?;
    let vocab = build_vocabulary(&corpus, 60_000)?;
    let events = extract_events(&tokenize(&corpus, &vocab));
    let v = vocab.len();

    let run = induce_hierarchy_traced(&events, v, &[3, 9], 0)?;
    println!("objective {:.3} after {} improvement steps", run.objective, run.trace.len());
    let h = &run.hierarchy;
    for top in 0..h.size(0) as u32 {
        println!("class {top}");
        for &sub in h.children(0, top) {
            let words: Vec<&str> = h.members(1, sub).iter().take(8).map(|&w| vocab.word(w)).collect();
            println!("  {sub:2}: {}", words.join(" "));
        }
    }

    let indicator = build_hierarchy(&events, v, &[8], 0)?.level(0).to_vec();
    let candidates = [2, 4, 8, 16, 32, v];
    let sweep = sweep_class_count(&events, v, &candidates, &indicator, &FactoredConfig::default(), |k| {
        build_hierarchy(&events, v, &[k], 0)
    })?;
    println!("\nclasses  ops/event");
    for e in &sweep.table {
        println!("{:7}  {:9.1}", e.classes, e.ops_per_event);
    }
    println!("cheapest: {} classes", sweep.best);
    Ok(())
}

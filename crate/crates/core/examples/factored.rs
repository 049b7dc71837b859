//! Trains the same corpus unfactored and with two- and three-level class
//! factoring, then compares cost per event and training perplexity.
//!
//!     cargo run --release --example factored

use classmaxent::classing::{build_hierarchy, default_level_sizes, induce_classes};
use classmaxent::corpus::{build_vocabulary, extract_events, tokenize, RawCorpus};
use classmaxent::eval::perplexity;
use classmaxent::factored::{train_factored, train_unfactored, FactoredConfig};
use classmaxent::gis::GisConfig;

fn main() -> classmaxent::Result<()> {
    let corpus = RawCorpus::from_path(concat!(env!("CARGO_MANIFEST_DIR"), "/data/toy.txt"), false)?;
    let vocab = build_vocabulary(&corpus, 60_000)?;
    let stream = tokenize(&corpus, &vocab);
    let events = extract_events(&stream);
    let v = vocab.len();
    let indicator = induce_classes(&events, v, 8, 0)?.level(0).to_vec();
    let cfg = FactoredConfig { gis: GisConfig { iterations: 50, ..Default::default() }, ..Default::default() };

    let mut runs = vec![("unfactored", train_unfactored(&events, v, &indicator, &cfg)?)];
    for levels in [1, 2] {
        let sizes = default_level_sizes(v, levels);
        let h = build_hierarchy(&events, v, &sizes, 0)?;
        let name = if levels == 1 { "factored2" } else { "factored3" };
        println!("{name}: class sizes {sizes:?}");
        runs.push((name, train_factored(&events, &h, &indicator, &cfg)?));
    }

    println!("\n{:<11} {:>10} {:>12}", "model", "ops/event", "perplexity");
    for (name, run) in &runs {
        let ppl = perplexity(&run.model, &stream)?.perplexity;
        println!("{name:<11} {:>10.1} {ppl:>12.3}", run.first_iteration_ops_per_event());
    }
    Ok(())
}

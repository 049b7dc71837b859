//! Per-iteration training time of plain GIS, unigram-cached GIS and
//! two-level factoring on growing prefixes of a synthetic corpus.
//!
//!     cargo run --release --example benchmark -- [largest_size]

use classmaxent::eval::{benchmark, BenchConfig, Method};
use classmaxent::synth::{self, SynthConfig};

fn main() -> classmaxent::Result<()> {
    let largest: usize = std::env::args().nth(1).map_or(100_000, |a| a.parse().expect("size"));
    let sizes: Vec<usize> = [largest / 100, largest / 10, largest].into_iter().filter(|&s| s > 0).collect();
    let corpus = synth::generate(&SynthConfig::default(), largest);
    let report =
        benchmark(&[Method::Gis, Method::GisCache, Method::Factored2], &sizes, &corpus, &BenchConfig::default())?;

    println!("{:<10} {:>9} {:>7} {:>12} {:>11} {:>8}", "method", "tokens", "vocab", "sec/iter", "ops/event", "speedup");
    for r in &report.rows {
        println!(
            "{:<10} {:>9} {:>7} {:>12.4} {:>11.1} {:>7.2}x",
            r.method.name(),
            r.train_size,
            r.vocab_size,
            r.sec_per_iter,
            r.ops_per_event,
            r.relative_speed
        );
    }
    Ok(())
}

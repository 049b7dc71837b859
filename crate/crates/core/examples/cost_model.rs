//! Operation count per training event for a 10,000-word vocabulary: scoring
//! every word, two-level factoring with 100 classes of 100 words, and three
//! levels of 10 x 10 x 100.
//!
//!     cargo run --release --example cost_model

use classmaxent::classing::ClassHierarchy;
use classmaxent::corpus::Event;
use classmaxent::factored::{train_factored, train_unfactored, FactoredConfig};
use classmaxent::gis::GisConfig;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn main() -> classmaxent::Result<()> {
    let v = 10_000u32;
    let mut rng = ChaCha8Rng::seed_from_u64(0);
    let events: Vec<Event> = (0..2_000)
        .map(|_| Event { history: [rng.gen_range(0..v), rng.gen_range(0..v)], target: rng.gen_range(0..v), count: 1 })
        .collect();
    let indicator: Vec<u32> = (0..v).map(|w| w % 64).collect();
    let cfg =
        FactoredConfig { gis: GisConfig { iterations: 1, tolerance: 0.0, ..Default::default() }, ..Default::default() };

    let base = train_unfactored(&events, v as usize, &indicator, &cfg)?.first_iteration_ops_per_event();
    println!("unfactored          {base:>8}");
    for sizes in [vec![100], vec![10, 100]] {
        let h = ClassHierarchy::balanced(v as usize, &sizes)?;
        let ops = train_factored(&events, &h, &indicator, &cfg)?.first_iteration_ops_per_event();
        println!("classes {:<11} {ops:>8}  speedup {:.0}x", format!("{sizes:?}"), base / ops);
    }
    Ok(())
}

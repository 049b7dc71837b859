//! Trains an unfactored model with plain and unigram-cached GIS on a small
//! synthetic corpus and prints the convergence trace.
//!
//!     cargo run --release --example train_gis -- [tokens] [iterations]

use classmaxent::classing::induce_classes;
use classmaxent::corpus::{build_vocabulary, extract_events, tokenize};
use classmaxent::features::FeatureSet;
use classmaxent::gis::{
    expectation_pass, train, CandidateSpace, GisConfig, MaxEntModel, TrainEvent, TrainerState, Variant,
};
use classmaxent::synth::{self, SynthConfig};

fn main() -> classmaxent::Result<()> {
    let mut args = std::env::args().skip(1);
    let tokens: usize = args.next().map_or(50_000, |a| a.parse().expect("tokens"));
    let iterations: usize = args.next().map_or(200, |a| a.parse().expect("iterations"));

    let corpus = synth::generate(&SynthConfig { lexicon: 2_000, ..Default::default() }, tokens);
    let vocab = build_vocabulary(&corpus, 2_000)?;
    let events = extract_events(&tokenize(&corpus, &vocab));
    let indicator = induce_classes(&events, vocab.len(), 64, 0)?.level(0).to_vec();
    let fs = FeatureSet::instantiate(events.iter().map(|e| (e.history, e.target, e.count)), indicator, vocab.len(), 3)?;
    let train_events: Vec<TrainEvent> = events.iter().map(TrainEvent::ungrouped).collect();
    let mut model = MaxEntModel::new(fs, CandidateSpace::all(vocab.len()), &train_events)?;
    println!(
        "{} words, {} events, {} features, C = {}",
        vocab.len(),
        events.len(),
        model.features().len(),
        model.slack_constant()
    );

    let cfg = GisConfig { iterations, tolerance: 1e-3, variant: Variant::UnigramCached, ..Default::default() };
    let report = train(&mut model, &train_events, &cfg)?;
    for l in report.log.iter().filter(|l| l.iteration % 10 == 1 || l.iteration == report.log.len()) {
        println!("iter {:4}  loglike {:.4}  max dev {:.3e}  ops {}", l.iteration, l.loglike, l.max_deviation, l.ops);
    }

    let mut state = TrainerState::new(&model, &train_events);
    state.record(expectation_pass(&model, &train_events, 1));
    println!("converged: {}, max |expected/empirical - 1| = {:.3e}", report.converged, state.max_expectation_error());
    Ok(())
}

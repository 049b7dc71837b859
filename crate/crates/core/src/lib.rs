//! Conditional maximum-entropy language models trained with Generalized
//! Iterative Scaling, plus class factoring: predict a word's class first and
//! then the word among its class members, so each training event only
//! scores a class's members instead of the whole vocabulary.
//!
//! The pipeline is corpus → [`classing`] → [`features`] → [`gis`] /
//! [`factored`] → [`eval`]. See the crate's `examples/` directory for one
//! runnable program per stage.

pub mod classing;
pub mod cli;
pub mod corpus;
pub mod error;
pub mod eval;
pub mod factored;
pub mod features;
pub mod gis;
pub mod synth;

pub use classing::{build_hierarchy, induce_classes, ClassHierarchy};
pub use corpus::{build_vocabulary, extract_events, tokenize, Event, RawCorpus, TokenStream, Vocabulary};
pub use error::{Error, Result};
pub use factored::{train_factored, train_unfactored, FactoredConfig, FactoredModel};
pub use features::{FeatureSet, TemplateKind};
pub use gis::{train, train_unigram_cached, CandidateSpace, GisConfig, MaxEntModel, TrainEvent, Variant};

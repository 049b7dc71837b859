//! Class-factored models: `P(w | h) = P(class(w) | h) * P(w | h, class(w))`,
//! generalized to a super-class level.
//!
//! Every level is an ordinary [`MaxEntModel`]. Level 0 chooses among all
//! top-level classes; each deeper level only chooses among the children of
//! the class picked above it, and the last level chooses a word among the
//! members of its class. A word outside the conditioning class is never a
//! candidate, so its probability under that level is zero by construction.

use std::fs::{self, File};
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use crate::classing::ClassHierarchy;
use crate::corpus::{Event, Vocabulary};
use crate::error::{Error, Result};
use crate::features::{FeatureSet, DEFAULT_MIN_COUNT};
use crate::gis::{self, CandidateSpace, GisConfig, MaxEntModel, TrainEvent, TrainReport};

pub const MANIFEST: &str = "manifest";
pub const VOCAB_FILE: &str = "vocab.txt";
pub const INDICATOR_FILE: &str = "indicator.map";
pub const HIERARCHY_FILE: &str = "hierarchy.map";

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FactoredConfig {
    pub min_count: u64,
    pub gis: GisConfig,
}

impl Default for FactoredConfig {
    fn default() -> Self {
        FactoredConfig { min_count: DEFAULT_MIN_COUNT, gis: GisConfig::default() }
    }
}

/// Candidate space of each model level under `hierarchy`.
pub fn level_spaces(hierarchy: &ClassHierarchy) -> Result<Vec<CandidateSpace>> {
    let depth = hierarchy.num_levels();
    let mut spaces = vec![CandidateSpace::all(hierarchy.size(0))];
    for k in 1..depth {
        spaces.push(CandidateSpace::grouped(hierarchy.all_children(k - 1).to_vec(), hierarchy.size(k))?);
    }
    spaces.push(CandidateSpace::grouped(hierarchy.all_members(depth - 1).to_vec(), hierarchy.num_words())?);
    Ok(spaces)
}

/// `(group, outcome)` of `word` at each model level.
pub fn word_route(hierarchy: &ClassHierarchy, word: u32) -> Vec<(u32, u32)> {
    let path = hierarchy.path(word);
    let mut route = Vec::with_capacity(path.len() + 1);
    route.push((0, path[0]));
    for k in 1..path.len() {
        route.push((path[k - 1], path[k]));
    }
    route.push((*path.last().unwrap(), word));
    route
}

/// Per-level training events. Event `i` of every level comes from input
/// event `i`, with its count unchanged.
pub fn factor_events(events: &[Event], hierarchy: &ClassHierarchy) -> Result<Vec<Vec<TrainEvent>>> {
    let n = hierarchy.num_words();
    let mut levels = vec![Vec::with_capacity(events.len()); hierarchy.num_levels() + 1];
    for e in events {
        if e.target as usize >= n || e.history.iter().any(|&h| h as usize >= n) {
            return Err(Error::invalid(format!("event {e:?} mentions a word missing from the hierarchy")));
        }
        for (k, (group, target)) in word_route(hierarchy, e.target).into_iter().enumerate() {
            levels[k].push(TrainEvent { history: e.history, target, group, count: e.count });
        }
    }
    Ok(levels)
}

/// A chain of maxent models whose per-level probabilities multiply to
/// `P(w | h)`. Without a hierarchy there is a single level over all words.
#[derive(Debug, Clone)]
pub struct FactoredModel {
    hierarchy: Option<ClassHierarchy>,
    levels: Vec<MaxEntModel>,
}

impl FactoredModel {
    pub fn unfactored(model: MaxEntModel) -> Result<Self> {
        if model.space().kind() != gis::SpaceKind::All {
            return Err(Error::invalid("an unfactored model must compete over all words"));
        }
        Ok(FactoredModel { hierarchy: None, levels: vec![model] })
    }

    pub fn new(hierarchy: ClassHierarchy, levels: Vec<MaxEntModel>) -> Result<Self> {
        let spaces = level_spaces(&hierarchy)?;
        if levels.len() != spaces.len() {
            return Err(Error::invalid(format!("expected {} level models, got {}", spaces.len(), levels.len())));
        }
        for (k, (m, s)) in levels.iter().zip(&spaces).enumerate() {
            if m.space() != s {
                return Err(Error::invalid(format!("level {k} candidate space does not match the hierarchy")));
            }
        }
        Ok(FactoredModel { hierarchy: Some(hierarchy), levels })
    }

    pub fn hierarchy(&self) -> Option<&ClassHierarchy> {
        self.hierarchy.as_ref()
    }

    pub fn levels(&self) -> &[MaxEntModel] {
        &self.levels
    }

    pub fn vocab_size(&self) -> usize {
        self.levels.last().unwrap().space().num_outcomes()
    }

    fn route(&self, word: u32) -> Vec<(u32, u32)> {
        match &self.hierarchy {
            Some(h) => word_route(h, word),
            None => vec![(0, word)],
        }
    }

    pub fn log_probability(&self, history: [u32; 2], word: u32) -> f64 {
        self.route(word).into_iter().zip(&self.levels).map(|((g, o), m)| m.log_prob(history, g, o)).sum()
    }

    /// Product of the per-level conditionals along the word's class path.
    pub fn probability(&self, history: [u32; 2], word: u32) -> f64 {
        self.log_probability(history, word).exp()
    }

    /// Candidate evaluations one training event costs at every level.
    pub fn ops_per_event(&self, word: u32) -> u64 {
        self.route(word).into_iter().zip(&self.levels).map(|((g, _), m)| m.space().candidates(g).len() as u64).sum()
    }

    pub fn save(&self, dir: impl AsRef<Path>, vocab: &Vocabulary, method: &str) -> Result<()> {
        let dir = dir.as_ref();
        fs::create_dir_all(dir)?;
        vocab.save(dir.join(VOCAB_FILE))?;
        let indicator = ClassHierarchy::flat(self.levels[0].features().indicator_classes().to_vec())?;
        indicator.save(vocab, dir.join(INDICATOR_FILE))?;
        let mut manifest = BufWriter::new(File::create(dir.join(MANIFEST))?);
        writeln!(manifest, "method {method}")?;
        if let Some(h) = &self.hierarchy {
            h.save(vocab, dir.join(HIERARCHY_FILE))?;
            writeln!(manifest, "hierarchy {HIERARCHY_FILE}")?;
        }
        writeln!(manifest, "levels {}", self.levels.len())?;
        for (k, m) in self.levels.iter().enumerate() {
            let name = format!("level{k}.model");
            let mut out = BufWriter::new(File::create(dir.join(&name))?);
            m.write(&mut out)?;
            out.flush()?;
            writeln!(manifest, "level {name}")?;
        }
        manifest.flush()?;
        Ok(())
    }

    /// Loads a model directory; returns the vocabulary, the model and the
    /// method recorded in the manifest.
    pub fn load(dir: impl AsRef<Path>) -> Result<(Vocabulary, Self, String)> {
        let dir = dir.as_ref();
        let vocab = Vocabulary::load(dir.join(VOCAB_FILE))?;
        let indicator = ClassHierarchy::load(&vocab, dir.join(INDICATOR_FILE))?.level(0).to_vec();
        let manifest_path = dir.join(MANIFEST);
        let mut method = String::new();
        let mut hierarchy = None;
        let mut level_files = Vec::new();
        let mut declared = None;
        for (i, line) in BufReader::new(File::open(&manifest_path)?).lines().enumerate() {
            let line = line?;
            let (k, v) =
                line.split_once(' ').ok_or_else(|| Error::parse(&manifest_path, i + 1, "expected `key value`"))?;
            match k {
                "method" => method = v.to_string(),
                "hierarchy" => hierarchy = Some(ClassHierarchy::load(&vocab, dir.join(v))?),
                "levels" => {
                    declared = Some(v.parse::<usize>().map_err(|_| Error::parse(&manifest_path, i + 1, "bad count"))?)
                }
                "level" => level_files.push(v.to_string()),
                _ => return Err(Error::parse(&manifest_path, i + 1, format!("unknown key {k:?}"))),
            }
        }
        if declared != Some(level_files.len()) {
            return Err(Error::parse(&manifest_path, 0, "level list does not match declared count"));
        }
        let spaces = match &hierarchy {
            Some(h) => level_spaces(h)?.into_iter().map(Some).collect(),
            None => vec![None],
        };
        if spaces.len() != level_files.len() {
            return Err(Error::parse(&manifest_path, 0, "level count does not match hierarchy depth"));
        }
        let mut levels = Vec::with_capacity(level_files.len());
        for (name, space) in level_files.iter().zip(spaces) {
            let space = space.filter(|s| s.kind() == gis::SpaceKind::Grouped);
            let reader = BufReader::new(File::open(dir.join(name))?);
            levels.push(MaxEntModel::read(reader, indicator.clone(), space)?);
        }
        let model = match hierarchy {
            Some(h) => FactoredModel::new(h, levels)?,
            None => FactoredModel::unfactored(levels.pop().unwrap())?,
        };
        Ok((vocab, model, method))
    }
}

/// Outcome of training one model per level.
#[derive(Debug)]
pub struct FactoredTraining {
    pub model: FactoredModel,
    pub reports: Vec<TrainReport>,
    pub events: usize,
}

impl FactoredTraining {
    /// Candidate evaluations over all levels and iterations.
    pub fn total_ops(&self) -> u64 {
        self.reports.iter().map(|r| r.total_ops()).sum()
    }

    /// Average candidate evaluations per event in the first iteration.
    pub fn first_iteration_ops_per_event(&self) -> f64 {
        let ops: u64 = self.reports.iter().map(|r| r.log[0].ops).sum();
        ops as f64 / self.events as f64
    }
}

/// Trains an unfactored model over the whole vocabulary.
pub fn train_unfactored(
    events: &[Event],
    vocab_size: usize,
    indicator: &[u32],
    cfg: &FactoredConfig,
) -> Result<FactoredTraining> {
    let train_events: Vec<TrainEvent> = events.iter().map(TrainEvent::ungrouped).collect();
    let (model, report) = train_level(&train_events, CandidateSpace::all(vocab_size), indicator, cfg)?;
    Ok(FactoredTraining { model: FactoredModel::unfactored(model)?, reports: vec![report], events: events.len() })
}

/// Trains each level independently.
pub fn train_factored(
    events: &[Event],
    hierarchy: &ClassHierarchy,
    indicator: &[u32],
    cfg: &FactoredConfig,
) -> Result<FactoredTraining> {
    let per_level = factor_events(events, hierarchy)?;
    let spaces = level_spaces(hierarchy)?;
    let mut levels = Vec::with_capacity(spaces.len());
    let mut reports = Vec::with_capacity(spaces.len());
    for (k, (level_events, space)) in per_level.iter().zip(spaces).enumerate() {
        log::info!("training level {k} ({} outcomes, {} groups)", space.num_outcomes(), space.num_groups());
        let (m, r) = train_level(level_events, space, indicator, cfg)?;
        levels.push(m);
        reports.push(r);
    }
    Ok(FactoredTraining { model: FactoredModel::new(hierarchy.clone(), levels)?, reports, events: events.len() })
}

/// Builds the features and model of one level without training it.
pub fn build_level(
    events: &[TrainEvent],
    space: CandidateSpace,
    indicator: &[u32],
    min_count: u64,
) -> Result<MaxEntModel> {
    let features = FeatureSet::instantiate(
        events.iter().map(|e| (e.history, e.target, e.count)),
        indicator.to_vec(),
        space.num_outcomes(),
        min_count,
    )?;
    MaxEntModel::new(features, space, events)
}

fn train_level(
    events: &[TrainEvent],
    space: CandidateSpace,
    indicator: &[u32],
    cfg: &FactoredConfig,
) -> Result<(MaxEntModel, TrainReport)> {
    let mut model = build_level(events, space, indicator, cfg.min_count)?;
    let report = gis::train(&mut model, events, &cfg.gis)?;
    Ok((model, report))
}

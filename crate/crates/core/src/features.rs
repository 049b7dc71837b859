//! Indicator features over `(history, candidate)` pairs.
//!
//! Eight templates bind the candidate outcome `W` plus up to two history
//! slots `Z` and `Y` drawn from the previous two words or their indicator
//! classes. A template fires for at most one argument tuple per pair, so at
//! most eight features are ever active at once.

use std::fmt;
use std::io::Write;
use std::ops::Range;
use std::str::FromStr;

use rustc_hash::FxHashMap;

use crate::error::{Error, Result};

/// Placeholder for an unbound slot.
pub const UNBOUND: u32 = u32::MAX;

pub const DEFAULT_MIN_COUNT: u64 = 3;
pub const DEFAULT_INDICATOR_CLASSES: usize = 64;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum TemplateKind {
    /// `w = W`
    Unigram,
    /// `w = W`, `class(w_{i-1}) = Z`
    ClassBigram,
    /// `w = W`, `class(w_{i-2}) = Z`
    ClassSkipBigram,
    /// `w = W`, `w_{i-1} = Z`
    Bigram,
    /// `w = W`, `w_{i-2} = Z`
    SkipBigram,
    /// `w = W`, `class(w_{i-1}) = Z`, `class(w_{i-2}) = Y`
    ClassTrigram,
    /// `w = W`, `class(w_{i-1}) = Z`, `w_{i-2} = Y`
    ClassBigramSkipBigram,
    /// `w = W`, `w_{i-1} = Z`, `class(w_{i-2}) = Y`
    BigramClassSkipBigram,
}

/// What a history slot is bound to.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Slot {
    Word1,
    Word2,
    Class1,
    Class2,
}

impl TemplateKind {
    pub const ALL: [TemplateKind; 8] = [
        TemplateKind::Unigram,
        TemplateKind::ClassBigram,
        TemplateKind::ClassSkipBigram,
        TemplateKind::Bigram,
        TemplateKind::SkipBigram,
        TemplateKind::ClassTrigram,
        TemplateKind::ClassBigramSkipBigram,
        TemplateKind::BigramClassSkipBigram,
    ];

    /// Templates that look at the history.
    pub const CONTEXTUAL: [TemplateKind; 7] = [
        TemplateKind::ClassBigram,
        TemplateKind::ClassSkipBigram,
        TemplateKind::Bigram,
        TemplateKind::SkipBigram,
        TemplateKind::ClassTrigram,
        TemplateKind::ClassBigramSkipBigram,
        TemplateKind::BigramClassSkipBigram,
    ];

    pub fn name(self) -> &'static str {
        match self {
            TemplateKind::Unigram => "unigram",
            TemplateKind::ClassBigram => "class-bigram",
            TemplateKind::ClassSkipBigram => "class-skip-bigram",
            TemplateKind::Bigram => "bigram",
            TemplateKind::SkipBigram => "skip-bigram",
            TemplateKind::ClassTrigram => "class-trigram",
            TemplateKind::ClassBigramSkipBigram => "class-bigram-skip-bigram",
            TemplateKind::BigramClassSkipBigram => "bigram-class-skip-bigram",
        }
    }

    /// The `(Z, Y)` slot bindings.
    pub fn slots(self) -> (Option<Slot>, Option<Slot>) {
        use Slot::*;
        match self {
            TemplateKind::Unigram => (None, None),
            TemplateKind::ClassBigram => (Some(Class1), None),
            TemplateKind::ClassSkipBigram => (Some(Class2), None),
            TemplateKind::Bigram => (Some(Word1), None),
            TemplateKind::SkipBigram => (Some(Word2), None),
            TemplateKind::ClassTrigram => (Some(Class1), Some(Class2)),
            TemplateKind::ClassBigramSkipBigram => (Some(Class1), Some(Word2)),
            TemplateKind::BigramClassSkipBigram => (Some(Word1), Some(Class2)),
        }
    }

    pub fn arity(self) -> usize {
        let (z, y) = self.slots();
        1 + z.is_some() as usize + y.is_some() as usize
    }

    /// `(Z, Y)` values this template takes on for `history`.
    #[inline]
    pub fn context(self, h: &HistoryView) -> (u32, u32) {
        let (z, y) = self.slots();
        (z.map_or(UNBOUND, |s| h.slot(s)), y.map_or(UNBOUND, |s| h.slot(s)))
    }
}

impl fmt::Display for TemplateKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for TemplateKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        TemplateKind::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| Error::invalid(format!("unknown template kind {s:?}")))
    }
}

/// The two previous words and their indicator classes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct HistoryView {
    pub word1: u32,
    pub word2: u32,
    pub class1: u32,
    pub class2: u32,
}

impl HistoryView {
    #[inline]
    fn slot(&self, s: Slot) -> u32 {
        match s {
            Slot::Word1 => self.word1,
            Slot::Word2 => self.word2,
            Slot::Class1 => self.class1,
            Slot::Class2 => self.class2,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct FeatureKey {
    pub kind: TemplateKind,
    /// Bound outcome `W`.
    pub target: u32,
    pub z: u32,
    pub y: u32,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Feature {
    pub id: u32,
    pub key: FeatureKey,
    pub train_count: u64,
}

impl Feature {
    /// Bound argument values in `W, Z, Y` order.
    pub fn args(&self) -> Vec<u32> {
        let FeatureKey { kind, target, z, y } = self.key;
        [target, z, y].into_iter().take(kind.arity()).collect()
    }
}

/// Instantiated features plus the indexes used to find the firing ones.
#[derive(Debug, Clone)]
pub struct FeatureSet {
    features: Vec<Feature>,
    indicator: Vec<u32>,
    num_outcomes: usize,
    lookup: FxHashMap<FeatureKey, u32>,
    unigram: Vec<u32>,
    by_context: FxHashMap<(TemplateKind, u32, u32), Range<usize>>,
    context_entries: Vec<(u32, u32)>,
}

/// Contextual features firing for one history, grouped per template as
/// `(outcome, feature id)` lists.
pub struct ContextHits<'a> {
    lists: [&'a [(u32, u32)]; 7],
}

impl<'a> ContextHits<'a> {
    pub fn iter(&self) -> impl Iterator<Item = &'a (u32, u32)> + '_ {
        self.lists.iter().flat_map(|l| l.iter())
    }

    pub fn is_empty(&self) -> bool {
        self.lists.iter().all(|l| l.is_empty())
    }

    pub fn len(&self) -> usize {
        self.lists.iter().map(|l| l.len()).sum()
    }
}

impl FeatureSet {
    /// Counts every template tuple over `events` (`(history, outcome, count)`
    /// with `history = [w_{i-2}, w_{i-1}]`) and keeps those with count mass of
    /// at least `threshold`.
    pub fn instantiate<I>(events: I, indicator: Vec<u32>, num_outcomes: usize, threshold: u64) -> Result<Self>
    where
        I: IntoIterator<Item = ([u32; 2], u32, u64)>,
    {
        if threshold == 0 {
            return Err(Error::invalid("feature threshold must be at least 1"));
        }
        let mut counts: FxHashMap<FeatureKey, u64> = FxHashMap::default();
        for (history, target, count) in events {
            if target as usize >= num_outcomes {
                return Err(Error::invalid(format!("outcome {target} outside 0..{num_outcomes}")));
            }
            let view = view_of(&indicator, history)?;
            for kind in TemplateKind::ALL {
                let (z, y) = kind.context(&view);
                *counts.entry(FeatureKey { kind, target, z, y }).or_default() += count;
            }
        }
        let mut kept: Vec<(FeatureKey, u64)> = counts.into_iter().filter(|&(_, c)| c >= threshold).collect();
        kept.sort_unstable();
        let features = kept
            .into_iter()
            .enumerate()
            .map(|(i, (key, train_count))| Feature { id: i as u32, key, train_count })
            .collect();
        Self::from_features(features, indicator, num_outcomes)
    }

    /// Rebuilds the indexes over an explicit feature list (ids must be dense
    /// and in list order).
    pub fn from_features(features: Vec<Feature>, indicator: Vec<u32>, num_outcomes: usize) -> Result<Self> {
        let mut lookup = FxHashMap::default();
        let mut unigram = vec![UNBOUND; num_outcomes];
        let mut grouped: FxHashMap<(TemplateKind, u32, u32), Vec<(u32, u32)>> = FxHashMap::default();
        for (i, f) in features.iter().enumerate() {
            if f.id as usize != i {
                return Err(Error::invalid(format!("feature ids not dense at {i}")));
            }
            if f.key.target as usize >= num_outcomes {
                return Err(Error::invalid(format!("feature {i} targets outcome {}", f.key.target)));
            }
            if lookup.insert(f.key, f.id).is_some() {
                return Err(Error::invalid(format!("duplicate feature {:?}", f.key)));
            }
            if f.key.kind == TemplateKind::Unigram {
                unigram[f.key.target as usize] = f.id;
            } else {
                grouped.entry((f.key.kind, f.key.z, f.key.y)).or_default().push((f.key.target, f.id));
            }
        }
        let mut keys: Vec<_> = grouped.keys().copied().collect();
        keys.sort_unstable();
        let mut by_context = FxHashMap::default();
        let mut context_entries = Vec::new();
        for k in keys {
            let start = context_entries.len();
            context_entries.extend_from_slice(&grouped[&k]);
            by_context.insert(k, start..context_entries.len());
        }
        Ok(FeatureSet { features, indicator, num_outcomes, lookup, unigram, by_context, context_entries })
    }

    pub fn len(&self) -> usize {
        self.features.len()
    }

    pub fn is_empty(&self) -> bool {
        self.features.is_empty()
    }

    pub fn features(&self) -> &[Feature] {
        &self.features
    }

    pub fn feature(&self, id: u32) -> &Feature {
        &self.features[id as usize]
    }

    pub fn num_outcomes(&self) -> usize {
        self.num_outcomes
    }

    pub fn indicator_classes(&self) -> &[u32] {
        &self.indicator
    }

    pub fn id_of(&self, key: &FeatureKey) -> Option<u32> {
        self.lookup.get(key).copied()
    }

    /// Unigram feature of `outcome`, if instantiated.
    #[inline]
    pub fn unigram(&self, outcome: u32) -> Option<u32> {
        let id = self.unigram[outcome as usize];
        (id != UNBOUND).then_some(id)
    }

    #[inline]
    pub fn view(&self, history: [u32; 2]) -> HistoryView {
        HistoryView {
            word2: history[0],
            word1: history[1],
            class2: self.indicator[history[0] as usize],
            class1: self.indicator[history[1] as usize],
        }
    }

    /// Every feature firing on `(history, candidate)`; at most one per
    /// template kind.
    pub fn active_features(&self, history: [u32; 2], candidate: u32) -> Vec<u32> {
        let view = self.view(history);
        TemplateKind::ALL
            .into_iter()
            .filter_map(|kind| {
                let (z, y) = kind.context(&view);
                self.id_of(&FeatureKey { kind, target: candidate, z, y })
            })
            .collect()
    }

    /// Contextual features firing for `history`, for any candidate.
    #[inline]
    pub fn context_hits(&self, history: [u32; 2]) -> ContextHits<'_> {
        let view = self.view(history);
        let lists = TemplateKind::CONTEXTUAL.map(|kind| {
            let (z, y) = kind.context(&view);
            self.by_context.get(&(kind, z, y)).map_or(&[][..], |r| &self.context_entries[r.clone()])
        });
        ContextHits { lists }
    }

    /// Reorders every context list by `(group_of[outcome], outcome)` so that
    /// [`FeatureSet::context_hits_in_group`] can slice out one group.
    pub fn sort_contexts_by_group(&mut self, group_of: &[u32]) {
        for r in self.by_context.values() {
            self.context_entries[r.clone()].sort_unstable_by_key(|&(t, _)| (group_of[t as usize], t));
        }
    }

    /// [`FeatureSet::context_hits`] restricted to outcomes of `group`. The
    /// lists must have been ordered by [`FeatureSet::sort_contexts_by_group`]
    /// with the same `group_of`.
    #[inline]
    pub fn context_hits_in_group(&self, history: [u32; 2], group_of: &[u32], group: u32) -> ContextHits<'_> {
        let mut hits = self.context_hits(history);
        for l in &mut hits.lists {
            let lo = l.partition_point(|&(t, _)| group_of[t as usize] < group);
            let len = l[lo..].partition_point(|&(t, _)| group_of[t as usize] == group);
            *l = &l[lo..lo + len];
        }
        hits
    }

    /// `id<TAB>kind<TAB>args...<TAB>count`, one feature per line.
    pub fn dump<W: Write>(&self, mut out: W) -> Result<()> {
        for f in &self.features {
            write!(out, "{}\t{}", f.id, f.key.kind)?;
            for a in f.args() {
                write!(out, "\t{a}")?;
            }
            writeln!(out, "\t{}", f.train_count)?;
        }
        Ok(())
    }
}

fn view_of(indicator: &[u32], history: [u32; 2]) -> Result<HistoryView> {
    let class = |w: u32| {
        indicator
            .get(w as usize)
            .copied()
            .ok_or_else(|| Error::invalid(format!("history word {w} has no indicator class")))
    };
    Ok(HistoryView { word2: history[0], word1: history[1], class2: class(history[0])?, class1: class(history[1])? })
}

/// The candidates of a class-restricted inner loop: exactly the class members.
pub fn restrict_to_class(class_members: &[u32]) -> impl Iterator<Item = u32> + '_ {
    class_members.iter().copied()
}

//! Corpus ingestion: vocabulary construction, tokenization and extraction of
//! trigram-history training events.
//!
//! Ids 0, 1 and 2 are always the sentence-start, sentence-end and unknown
//! tokens. Content words follow in descending training-count order, ties
//! broken by first occurrence.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use rustc_hash::FxHashMap;

use crate::error::{Error, Result};

pub const START: u32 = 0;
pub const END: u32 = 1;
pub const UNKNOWN: u32 = 2;

pub const START_TOKEN: &str = "<s>";
pub const END_TOKEN: &str = "</s>";
pub const UNKNOWN_TOKEN: &str = "<unk>";

pub const RESERVED: [&str; 3] = [START_TOKEN, END_TOKEN, UNKNOWN_TOKEN];

pub const DEFAULT_MAX_VOCAB: usize = 60_000;

/// Whitespace-tokenized text, one sentence per input line.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct RawCorpus {
    pub sentences: Vec<Vec<String>>,
}

impl RawCorpus {
    pub fn from_reader<R: BufRead>(mut reader: R, lowercase: bool) -> Result<Self> {
        let mut sentences = Vec::new();
        let mut buf = Vec::new();
        let mut line_no = 0;
        loop {
            buf.clear();
            if reader.read_until(b'\n', &mut buf)? == 0 {
                break;
            }
            line_no += 1;
            let line = std::str::from_utf8(&buf).map_err(|_| Error::Encoding { line: line_no })?;
            sentences.push(split_line(line, lowercase));
        }
        Ok(RawCorpus { sentences })
    }

    pub fn from_path(path: impl AsRef<Path>, lowercase: bool) -> Result<Self> {
        let f = File::open(path)?;
        Self::from_reader(BufReader::new(f), lowercase)
    }

    pub fn parse(text: &str, lowercase: bool) -> Self {
        RawCorpus { sentences: text.lines().map(|l| split_line(l, lowercase)).collect() }
    }

    pub fn token_count(&self) -> usize {
        self.sentences.iter().map(Vec::len).sum()
    }

    /// Leading sentences holding at least `tokens` tokens (or the whole corpus).
    pub fn prefix(&self, tokens: usize) -> RawCorpus {
        let mut seen = 0;
        let mut sentences = Vec::new();
        for s in &self.sentences {
            if seen >= tokens {
                break;
            }
            seen += s.len();
            sentences.push(s.clone());
        }
        RawCorpus { sentences }
    }
}

fn split_line(line: &str, lowercase: bool) -> Vec<String> {
    line.split([' ', '\t', '\r', '\n'])
        .filter(|t| !t.is_empty())
        .map(|t| if lowercase { t.to_lowercase() } else { t.to_string() })
        .collect()
}

/// Bidirectional word/id map.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Vocabulary {
    words: Vec<String>,
    index: FxHashMap<String, u32>,
}

impl Vocabulary {
    /// Builds a vocabulary from an ordered list of content words; reserved
    /// tokens are prepended.
    pub fn from_content_words<I, S>(words: I) -> Result<Self>
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        let mut all: Vec<String> = RESERVED.iter().map(|s| s.to_string()).collect();
        all.extend(words.into_iter().map(Into::into));
        let mut index = FxHashMap::default();
        for (i, w) in all.iter().enumerate() {
            if index.insert(w.clone(), i as u32).is_some() {
                return Err(Error::invalid(format!("duplicate vocabulary entry {w:?}")));
            }
        }
        Ok(Vocabulary { words: all, index })
    }

    pub fn len(&self) -> usize {
        self.words.len()
    }

    pub fn is_empty(&self) -> bool {
        self.words.is_empty()
    }

    pub fn content_len(&self) -> usize {
        self.words.len() - RESERVED.len()
    }

    pub fn id(&self, word: &str) -> Option<u32> {
        self.index.get(word).copied()
    }

    /// Id of `word`, falling back to the unknown token.
    pub fn id_or_unknown(&self, word: &str) -> u32 {
        self.id(word).unwrap_or(UNKNOWN)
    }

    pub fn word(&self, id: u32) -> &str {
        &self.words[id as usize]
    }

    pub fn words(&self) -> &[String] {
        &self.words
    }

    pub fn write<W: Write>(&self, mut out: W) -> Result<()> {
        for w in &self.words {
            writeln!(out, "{w}")?;
        }
        Ok(())
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let mut out = BufWriter::new(File::create(path)?);
        self.write(&mut out)?;
        out.flush()?;
        Ok(())
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let reader = BufReader::new(File::open(path)?);
        let mut words = Vec::new();
        let mut lines = 0;
        for (i, line) in reader.lines().enumerate() {
            lines += 1;
            let line = line?;
            let tok = line.trim_end_matches('\r');
            if i < RESERVED.len() {
                if tok != RESERVED[i] {
                    return Err(Error::parse(
                        path,
                        i + 1,
                        format!("expected reserved token {:?}, found {tok:?}", RESERVED[i]),
                    ));
                }
                continue;
            }
            if tok.is_empty() {
                return Err(Error::parse(path, i + 1, "empty vocabulary entry"));
            }
            words.push(tok.to_string());
        }
        if lines < RESERVED.len() {
            return Err(Error::parse(path, lines, "missing reserved tokens"));
        }
        Self::from_content_words(words)
    }
}

/// Keeps the `max_size` most frequent content words (reserved tokens are
/// always added on top).
pub fn build_vocabulary(corpus: &RawCorpus, max_size: usize) -> Result<Vocabulary> {
    if max_size == 0 {
        return Err(Error::invalid("max_size must be at least 1"));
    }
    if corpus.token_count() == 0 {
        return Err(Error::EmptyCorpus);
    }
    // (count, first occurrence)
    let mut stats: FxHashMap<&str, (u64, usize)> = FxHashMap::default();
    let mut order = 0usize;
    for tok in corpus.sentences.iter().flatten() {
        if RESERVED.contains(&tok.as_str()) {
            continue;
        }
        let e = stats.entry(tok.as_str()).or_insert((0, order));
        e.0 += 1;
        order += 1;
    }
    let mut ranked: Vec<(&str, u64, usize)> = stats.into_iter().map(|(w, (c, f))| (w, c, f)).collect();
    ranked.sort_unstable_by(|a, b| b.1.cmp(&a.1).then(a.2.cmp(&b.2)));
    ranked.truncate(max_size);
    Vocabulary::from_content_words(ranked.into_iter().map(|(w, _, _)| w))
}

/// Sentences as id sequences; the start/end brackets are implicit.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct TokenStream {
    pub sentences: Vec<Vec<u32>>,
}

impl TokenStream {
    pub fn token_count(&self) -> usize {
        self.sentences.iter().map(Vec::len).sum()
    }

    /// Every predicted position as `(history, target)`, in corpus order.
    pub fn positions(&self) -> impl Iterator<Item = ([u32; 2], u32)> + '_ {
        self.sentences.iter().flat_map(|s| {
            s.iter().enumerate().map(move |(i, &w)| {
                let prev1 = if i >= 1 { s[i - 1] } else { START };
                let prev2 = if i >= 2 { s[i - 2] } else { START };
                ([prev2, prev1], w)
            })
        })
    }
}

pub fn tokenize(corpus: &RawCorpus, vocab: &Vocabulary) -> TokenStream {
    TokenStream {
        sentences: corpus.sentences.iter().map(|s| s.iter().map(|t| vocab.id_or_unknown(t)).collect()).collect(),
    }
}

/// A `(w_{i-2}, w_{i-1}) -> w_i` observation with its multiplicity.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Event {
    /// `[w_{i-2}, w_{i-1}]`, padded with the start id.
    pub history: [u32; 2],
    pub target: u32,
    pub count: u64,
}

/// One event per token position, identical triples merged in order of
/// first appearance.
pub fn extract_events(stream: &TokenStream) -> Vec<Event> {
    merge_events(extract_events_unmerged(stream))
}

pub fn extract_events_unmerged(stream: &TokenStream) -> Vec<Event> {
    stream.positions().map(|(history, target)| Event { history, target, count: 1 }).collect()
}

pub fn merge_events<I: IntoIterator<Item = Event>>(events: I) -> Vec<Event> {
    let mut slot: FxHashMap<([u32; 2], u32), usize> = FxHashMap::default();
    let mut merged: Vec<Event> = Vec::new();
    for e in events {
        match slot.get(&(e.history, e.target)) {
            Some(&i) => merged[i].count += e.count,
            None => {
                slot.insert((e.history, e.target), merged.len());
                merged.push(e);
            }
        }
    }
    merged
}

pub fn total_count(events: &[Event]) -> u64 {
    events.iter().map(|e| e.count).sum()
}

//! Word classes: greedy top-down class induction and nested class hierarchies.
//!
//! Induction repeatedly splits one class in two. A split starts from a
//! frequency-sorted alternating assignment and then runs exchange passes
//! (move a word to the other half whenever that raises the class-bigram
//! log-likelihood) until no move helps or 20 passes have run. The class with
//! the largest within-class emission entropy mass is split next. Snapshots
//! taken at each requested class count form the levels of a hierarchy, so
//! finer classes always nest inside coarser ones.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use rustc_hash::FxHashMap;

use crate::corpus::{Event, Vocabulary};
use crate::error::{Error, Result};
use crate::factored::{train_factored, train_unfactored, FactoredConfig};
use crate::gis::Variant;

const MAX_EXCHANGE_PASSES: usize = 20;
const MIN_GAIN: f64 = 1e-9;
/// Initial partitions tried per split: the alternating one, then seeded
/// random ones.
const RESTARTS: usize = 4;

/// Per-word class paths over one to three levels, coarsest first.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ClassHierarchy {
    /// `assign[k][w]` is the class of word `w` at level `k`.
    assign: Vec<Vec<u32>>,
    sizes: Vec<usize>,
    /// `parents[k][c]` is the level-`k-1` class containing level-`k` class `c`
    /// (empty for level 0).
    parents: Vec<Vec<u32>>,
    members: Vec<Vec<Vec<u32>>>,
    children: Vec<Vec<Vec<u32>>>,
}

impl ClassHierarchy {
    /// Validates density, non-emptiness and nesting of raw per-level maps.
    pub fn from_levels(assign: Vec<Vec<u32>>) -> Result<Self> {
        if assign.is_empty() {
            return Err(Error::invalid("hierarchy needs at least one level"));
        }
        let n = assign[0].len();
        if n == 0 {
            return Err(Error::invalid("hierarchy over an empty vocabulary"));
        }
        let mut sizes = Vec::with_capacity(assign.len());
        let mut members = Vec::with_capacity(assign.len());
        for (k, level) in assign.iter().enumerate() {
            if level.len() != n {
                return Err(Error::invalid(format!("level {k} covers {} words, expected {n}", level.len())));
            }
            let size = level.iter().max().map_or(0, |&m| m as usize + 1);
            let mut mem = vec![Vec::new(); size];
            for (w, &c) in level.iter().enumerate() {
                mem[c as usize].push(w as u32);
            }
            if let Some(c) = mem.iter().position(Vec::is_empty) {
                return Err(Error::invalid(format!("level {k}: class {c} is empty (ids not dense)")));
            }
            sizes.push(size);
            members.push(mem);
        }
        let mut parents = vec![Vec::new()];
        for k in 1..assign.len() {
            let mut parent = vec![u32::MAX; sizes[k]];
            for (&c, &p) in assign[k].iter().zip(&assign[k - 1]) {
                let c = c as usize;
                if parent[c] == u32::MAX {
                    parent[c] = p;
                } else if parent[c] != p {
                    return Err(Error::invalid(format!(
                        "level {k} class {c} spans level {} classes {} and {p}",
                        k - 1,
                        parent[c]
                    )));
                }
            }
            parents.push(parent);
        }
        let mut children = Vec::with_capacity(assign.len());
        for k in 0..assign.len() {
            if k + 1 < assign.len() {
                let mut ch = vec![Vec::new(); sizes[k]];
                for (c, &p) in parents[k + 1].iter().enumerate() {
                    ch[p as usize].push(c as u32);
                }
                children.push(ch);
            } else {
                children.push(Vec::new());
            }
        }
        Ok(ClassHierarchy { assign, sizes, parents, members, children })
    }

    /// Single-level hierarchy from a word-to-class map.
    pub fn flat(assign: Vec<u32>) -> Result<Self> {
        Self::from_levels(vec![assign])
    }

    /// Balanced contiguous blocks: word `w` falls in class `w * size / n` at
    /// every level. Each level size must divide `n` and the next level size.
    pub fn balanced(n: usize, level_sizes: &[usize]) -> Result<Self> {
        check_level_sizes(n, level_sizes)?;
        for (k, &s) in level_sizes.iter().enumerate() {
            if !n.is_multiple_of(s) || (k + 1 < level_sizes.len() && !level_sizes[k + 1].is_multiple_of(s)) {
                return Err(Error::invalid(format!(
                    "balanced hierarchy needs divisible sizes, got {level_sizes:?} over {n} words"
                )));
            }
        }
        let assign = level_sizes.iter().map(|&s| (0..n).map(|w| (w * s / n) as u32).collect()).collect();
        Self::from_levels(assign)
    }

    pub fn num_levels(&self) -> usize {
        self.sizes.len()
    }

    pub fn num_words(&self) -> usize {
        self.assign[0].len()
    }

    pub fn sizes(&self) -> &[usize] {
        &self.sizes
    }

    pub fn size(&self, level: usize) -> usize {
        self.sizes[level]
    }

    pub fn class_of(&self, level: usize, word: u32) -> u32 {
        self.assign[level][word as usize]
    }

    /// Word-to-class map of one level.
    pub fn level(&self, level: usize) -> &[u32] {
        &self.assign[level]
    }

    pub fn path(&self, word: u32) -> Vec<u32> {
        self.assign.iter().map(|l| l[word as usize]).collect()
    }

    pub fn members(&self, level: usize, class: u32) -> &[u32] {
        &self.members[level][class as usize]
    }

    pub fn all_members(&self, level: usize) -> &[Vec<u32>] {
        &self.members[level]
    }

    /// Level `level + 1` classes nested inside `class`.
    pub fn children(&self, level: usize, class: u32) -> &[u32] {
        &self.children[level][class as usize]
    }

    pub fn all_children(&self, level: usize) -> &[Vec<u32>] {
        &self.children[level]
    }

    pub fn parent(&self, level: usize, class: u32) -> Option<u32> {
        (level > 0).then(|| self.parents[level][class as usize])
    }

    pub fn write<W: Write>(&self, vocab: &Vocabulary, mut out: W) -> Result<()> {
        if vocab.len() != self.num_words() {
            return Err(Error::invalid("vocabulary does not match hierarchy"));
        }
        for (w, word) in vocab.words().iter().enumerate() {
            let path: Vec<String> = self.assign.iter().map(|l| l[w].to_string()).collect();
            writeln!(out, "{word}\t{}", path.join("/"))?;
        }
        Ok(())
    }

    pub fn save(&self, vocab: &Vocabulary, path: impl AsRef<Path>) -> Result<()> {
        let mut out = BufWriter::new(File::create(path)?);
        self.write(vocab, &mut out)?;
        out.flush()?;
        Ok(())
    }

    pub fn load(vocab: &Vocabulary, path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let reader = BufReader::new(File::open(path)?);
        let mut paths: Vec<Option<Vec<u32>>> = vec![None; vocab.len()];
        let mut depth = None;
        for (i, line) in reader.lines().enumerate() {
            let line = line?;
            if line.is_empty() {
                continue;
            }
            let (word, classes) =
                line.split_once('\t').ok_or_else(|| Error::parse(path, i + 1, "expected word<TAB>classes"))?;
            let id = vocab.id(word).ok_or_else(|| Error::parse(path, i + 1, format!("unknown word {word:?}")))?;
            let p = classes
                .split('/')
                .map(|c| c.parse::<u32>())
                .collect::<std::result::Result<Vec<_>, _>>()
                .map_err(|e| Error::parse(path, i + 1, e.to_string()))?;
            if !(1..=3).contains(&p.len()) || depth.is_some_and(|d| d != p.len()) {
                return Err(Error::parse(path, i + 1, "inconsistent class path depth"));
            }
            depth = Some(p.len());
            if paths[id as usize].replace(p).is_some() {
                return Err(Error::parse(path, i + 1, format!("duplicate word {word:?}")));
            }
        }
        let depth = depth.ok_or_else(|| Error::parse(path, 0, "empty class map"))?;
        let mut assign = vec![Vec::with_capacity(vocab.len()); depth];
        for (w, p) in paths.into_iter().enumerate() {
            let p = p.ok_or_else(|| Error::parse(path, 0, format!("word {:?} has no class", vocab.word(w as u32))))?;
            for (k, c) in p.into_iter().enumerate() {
                assign[k].push(c);
            }
        }
        Self::from_levels(assign)
    }
}

fn check_level_sizes(n: usize, level_sizes: &[usize]) -> Result<()> {
    if level_sizes.is_empty() || level_sizes.len() > 3 {
        return Err(Error::invalid("between one and three class levels are supported"));
    }
    if level_sizes[0] == 0 {
        return Err(Error::invalid("class count must be at least 1"));
    }
    if level_sizes.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::invalid(format!("level sizes {level_sizes:?} must be strictly increasing")));
    }
    if *level_sizes.last().unwrap() > n {
        return Err(Error::invalid(format!(
            "requested {} classes for a vocabulary of {n} words",
            level_sizes.last().unwrap()
        )));
    }
    Ok(())
}

fn xlogx(x: i64) -> f64 {
    if x <= 0 {
        0.0
    } else {
        let x = x as f64;
        x * x.ln()
    }
}

/// Class-bigram log-likelihood of the `(w_{i-1}, w_i)` pairs in `events`
/// under `assign`: class transition probabilities times word emission
/// probabilities, all at maximum-likelihood estimates.
pub fn class_bigram_loglik(events: &[Event], assign: &[u32]) -> f64 {
    let mut cell: FxHashMap<(u32, u32), i64> = FxHashMap::default();
    let mut left: FxHashMap<u32, i64> = FxHashMap::default();
    let mut right: FxHashMap<u32, i64> = FxHashMap::default();
    let mut word_right: FxHashMap<u32, i64> = FxHashMap::default();
    for e in events {
        let (u, v, n) = (e.history[1], e.target, e.count as i64);
        let (c, d) = (assign[u as usize], assign[v as usize]);
        *cell.entry((c, d)).or_default() += n;
        *left.entry(c).or_default() += n;
        *right.entry(d).or_default() += n;
        *word_right.entry(v).or_default() += n;
    }
    cell.values().map(|&n| xlogx(n)).sum::<f64>()
        - left.values().map(|&n| xlogx(n)).sum::<f64>()
        - right.values().map(|&n| xlogx(n)).sum::<f64>()
        + word_right.values().map(|&n| xlogx(n)).sum::<f64>()
}

/// Incremental state of the splitting procedure.
struct Splitter {
    pred: Vec<Vec<(u32, i64)>>,
    succ: Vec<Vec<(u32, i64)>>,
    self_loop: Vec<i64>,
    /// Occurrences as the left / right element of a pair.
    word_left: Vec<i64>,
    word_right: Vec<i64>,
    tie_key: Vec<u64>,
    cls: Vec<u32>,
    members: Vec<Vec<u32>>,
    origin: Vec<u32>,
    cell: FxHashMap<(u32, u32), i64>,
    left: Vec<i64>,
    right: Vec<i64>,
    objective: f64,
    trace: Vec<f64>,
    scratch: FxHashMap<(u32, u32), i64>,
}

impl Splitter {
    fn new(events: &[Event], n: usize, seed: u64) -> Self {
        let mut pairs: FxHashMap<(u32, u32), i64> = FxHashMap::default();
        for e in events {
            *pairs.entry((e.history[1], e.target)).or_default() += e.count as i64;
        }
        let mut pairs: Vec<((u32, u32), i64)> = pairs.into_iter().collect();
        pairs.sort_unstable();
        let mut pred = vec![Vec::new(); n];
        let mut succ = vec![Vec::new(); n];
        let mut self_loop = vec![0; n];
        let mut word_left = vec![0; n];
        let mut word_right = vec![0; n];
        for &((u, v), c) in &pairs {
            word_left[u as usize] += c;
            word_right[v as usize] += c;
            if u == v {
                self_loop[u as usize] += c;
            } else {
                succ[u as usize].push((v, c));
                pred[v as usize].push((u, c));
            }
        }
        let total: i64 = word_left.iter().sum();
        let mut cell = FxHashMap::default();
        if total > 0 {
            cell.insert((0, 0), total);
        }
        let tie_key = (0..n as u64).map(|w| splitmix(seed ^ splitmix(w))).collect();
        let mut s = Splitter {
            pred,
            succ,
            self_loop,
            word_left,
            word_right,
            tie_key,
            cls: vec![0; n],
            members: vec![(0..n as u32).collect()],
            origin: vec![0],
            cell,
            left: vec![total],
            right: vec![total],
            objective: 0.0,
            trace: Vec::new(),
            scratch: FxHashMap::default(),
        };
        s.objective = s.full_objective();
        s.trace.push(s.objective);
        s
    }

    fn full_objective(&self) -> f64 {
        self.cell.values().map(|&n| xlogx(n)).sum::<f64>()
            - self.left.iter().map(|&n| xlogx(n)).sum::<f64>()
            - self.right.iter().map(|&n| xlogx(n)).sum::<f64>()
            + self.word_right.iter().map(|&n| xlogx(n)).sum::<f64>()
    }

    fn frequency(&self, w: u32) -> i64 {
        self.word_right[w as usize]
    }

    /// Collects the cell changes of moving `w` from `a` to `b` into `scratch`.
    fn collect_cell_changes(&mut self, w: u32, a: u32, b: u32) {
        self.scratch.clear();
        let wi = w as usize;
        for &(u, n) in &self.pred[wi] {
            let c = self.cls[u as usize];
            *self.scratch.entry((c, a)).or_default() -= n;
            *self.scratch.entry((c, b)).or_default() += n;
        }
        for &(v, n) in &self.succ[wi] {
            let d = self.cls[v as usize];
            *self.scratch.entry((a, d)).or_default() -= n;
            *self.scratch.entry((b, d)).or_default() += n;
        }
        let s = self.self_loop[wi];
        if s != 0 {
            *self.scratch.entry((a, a)).or_default() -= s;
            *self.scratch.entry((b, b)).or_default() += s;
        }
    }

    fn move_gain(&mut self, w: u32, a: u32, b: u32) -> f64 {
        self.collect_cell_changes(w, a, b);
        let mut gain = 0.0;
        for (&key, &delta) in &self.scratch {
            if delta != 0 {
                let old = self.cell.get(&key).copied().unwrap_or(0);
                gain += xlogx(old + delta) - xlogx(old);
            }
        }
        let (wl, wr) = (self.word_left[w as usize], self.word_right[w as usize]);
        let (a, b) = (a as usize, b as usize);
        gain -= xlogx(self.left[a] - wl) - xlogx(self.left[a]) + xlogx(self.left[b] + wl) - xlogx(self.left[b]);
        gain -= xlogx(self.right[a] - wr) - xlogx(self.right[a]) + xlogx(self.right[b] + wr) - xlogx(self.right[b]);
        gain
    }

    fn apply_move(&mut self, w: u32, a: u32, b: u32, gain: f64) {
        self.collect_cell_changes(w, a, b);
        for (&key, &delta) in &self.scratch {
            if delta == 0 {
                continue;
            }
            let e = self.cell.entry(key).or_default();
            *e += delta;
            if *e == 0 {
                self.cell.remove(&key);
            }
        }
        let (wl, wr) = (self.word_left[w as usize], self.word_right[w as usize]);
        self.left[a as usize] -= wl;
        self.left[b as usize] += wl;
        self.right[a as usize] -= wr;
        self.right[b as usize] += wr;
        self.cls[w as usize] = b;
        let pos = self.members[a as usize].iter().position(|&m| m == w).unwrap();
        self.members[a as usize].swap_remove(pos);
        self.members[b as usize].push(w);
        self.objective += gain;
    }

    /// Within-class emission entropy mass `N(c) ln N(c) - sum_w n_w ln n_w`.
    fn entropy_mass(&self, c: usize) -> f64 {
        let total: i64 = self.members[c].iter().map(|&w| self.frequency(w)).sum();
        xlogx(total) - self.members[c].iter().map(|&w| xlogx(self.frequency(w))).sum::<f64>()
    }

    fn pick_class_to_split(&self) -> Option<u32> {
        let mut best: Option<(f64, usize, usize)> = None;
        for c in 0..self.members.len() {
            let size = self.members[c].len();
            if size < 2 {
                continue;
            }
            let mass = self.entropy_mass(c);
            let better = match best {
                None => true,
                Some((bm, bs, _)) => mass > bm + 1e-9 || ((mass - bm).abs() <= 1e-9 && size > bs),
            };
            if better {
                best = Some((mass, size, c));
            }
        }
        best.map(|(_, _, c)| c as u32)
    }

    fn split(&mut self, a: u32) {
        let b = self.members.len() as u32;
        self.members.push(Vec::new());
        self.left.push(0);
        self.right.push(0);
        self.origin.push(a);

        let mut order = self.members[a as usize].clone();
        order.sort_by(|&x, &y| {
            self.frequency(y)
                .cmp(&self.frequency(x))
                .then(self.tie_key[x as usize].cmp(&self.tie_key[y as usize]))
                .then(x.cmp(&y))
        });
        let mut best: Option<(f64, Vec<u32>, Vec<f64>)> = None;
        for start in 0..RESTARTS {
            let side: Vec<bool> = if start == 0 {
                (0..order.len()).map(|i| i % 2 == 1).collect()
            } else {
                let mut side: Vec<bool> =
                    order.iter().map(|&w| splitmix(self.tie_key[w as usize] ^ start as u64) & 1 == 1).collect();
                side[0] = false;
                side[1] = true;
                side
            };
            for (&w, &to_b) in order.iter().zip(&side) {
                let (from, to) = (self.cls[w as usize], if to_b { b } else { a });
                if from != to {
                    let gain = self.move_gain(w, from, to);
                    self.apply_move(w, from, to, gain);
                }
            }
            // resync to cancel drift
            self.objective = self.full_objective();
            let mut steps = vec![self.objective];
            self.exchange(&order, a, b, &mut steps);
            if best.as_ref().is_none_or(|(o, _, _)| self.objective > *o + MIN_GAIN) {
                best = Some((self.objective, self.members[b as usize].clone(), steps));
            }
        }
        let (objective, in_b, steps) = best.unwrap();
        for &w in &order {
            let to = if in_b.contains(&w) { b } else { a };
            let from = self.cls[w as usize];
            if from != to {
                let gain = self.move_gain(w, from, to);
                self.apply_move(w, from, to, gain);
            }
        }
        self.objective = self.full_objective();
        debug_assert!((self.objective - objective).abs() <= 1e-6 * objective.abs().max(1.0));
        self.trace.extend_from_slice(&steps[..steps.len() - 1]);
        self.trace.push(self.objective);
    }

    /// Single-word moves between `a` and `b` until none helps.
    fn exchange(&mut self, order: &[u32], a: u32, b: u32, steps: &mut Vec<f64>) {
        for _ in 0..MAX_EXCHANGE_PASSES {
            let mut moved = false;
            for &w in order {
                let from = self.cls[w as usize];
                let to = if from == a { b } else { a };
                if self.members[from as usize].len() < 2 {
                    continue;
                }
                let gain = self.move_gain(w, from, to);
                if gain > MIN_GAIN {
                    self.apply_move(w, from, to, gain);
                    steps.push(self.objective);
                    moved = true;
                }
            }
            if !moved {
                break;
            }
        }
    }

    fn grow_to(&mut self, target: usize) {
        while self.members.len() < target {
            match self.pick_class_to_split() {
                Some(c) => self.split(c),
                None => break,
            }
        }
    }

    fn ancestor(&self, mut c: u32, level_size: usize) -> u32 {
        while c as usize >= level_size {
            c = self.origin[c as usize];
        }
        c
    }
}

fn splitmix(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9e37_79b9_7f4a_7c15);
    x = (x ^ (x >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    x = (x ^ (x >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    x ^ (x >> 31)
}

/// Result of a class induction run, with the objective after every
/// improvement step (splits and accepted exchange moves).
#[derive(Debug, Clone)]
pub struct Induction {
    pub hierarchy: ClassHierarchy,
    pub objective: f64,
    pub trace: Vec<f64>,
}

/// Induces a one-level partition of the `vocab_size` word ids into
/// `num_classes` classes.
pub fn induce_classes(events: &[Event], vocab_size: usize, num_classes: usize, seed: u64) -> Result<ClassHierarchy> {
    Ok(induce_hierarchy_traced(events, vocab_size, &[num_classes], seed)?.hierarchy)
}

/// Nested hierarchy with `level_sizes[k]` classes at level `k`, built by
/// recursive splitting.
pub fn build_hierarchy(
    events: &[Event],
    vocab_size: usize,
    level_sizes: &[usize],
    seed: u64,
) -> Result<ClassHierarchy> {
    Ok(induce_hierarchy_traced(events, vocab_size, level_sizes, seed)?.hierarchy)
}

pub fn induce_hierarchy_traced(
    events: &[Event],
    vocab_size: usize,
    level_sizes: &[usize],
    seed: u64,
) -> Result<Induction> {
    check_level_sizes(vocab_size, level_sizes)?;
    if let Some(e) =
        events.iter().find(|e| e.target as usize >= vocab_size || e.history.iter().any(|&h| h as usize >= vocab_size))
    {
        return Err(Error::invalid(format!("event {e:?} references a word outside the vocabulary")));
    }
    let mut sp = Splitter::new(events, vocab_size, seed);
    for &size in level_sizes {
        sp.grow_to(size);
        if sp.members.len() != size {
            return Err(Error::invariant(format!("could only reach {} of {size} classes", sp.members.len())));
        }
    }
    // moves only ever happen between a class and its own new half, so the
    // coarser levels are recovered from split lineage
    let assign: Vec<Vec<u32>> =
        level_sizes.iter().map(|&size| sp.cls.iter().map(|&c| sp.ancestor(c, size)).collect()).collect();
    let objective = sp.full_objective();
    let hierarchy = ClassHierarchy::from_levels(assign)?;
    Ok(Induction { hierarchy, objective, trace: sp.trace })
}

/// Default class counts: `sqrt(V)` for two-level factoring, cube-root
/// spacing for three.
pub fn default_level_sizes(vocab_size: usize, levels: usize) -> Vec<usize> {
    let v = vocab_size as f64;
    let mut sizes: Vec<usize> = match levels {
        1 => vec![v.sqrt().round() as usize],
        _ => vec![v.cbrt().round() as usize, (v.cbrt() * v.cbrt()).round() as usize],
    };
    for s in &mut sizes {
        *s = (*s).clamp(1, vocab_size);
    }
    sizes.dedup();
    sizes
}

/// One row of a class-count sweep.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweepEntry {
    pub classes: usize,
    /// Candidate evaluations in one plain GIS iteration, all levels.
    pub ops: u64,
    pub ops_per_event: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Sweep {
    pub best: usize,
    pub table: Vec<SweepEntry>,
}

/// Picks the class count whose factored model is cheapest to train, judged
/// by the operation count of one plain GIS iteration. `build` supplies the
/// hierarchy for each candidate count. Ties go to the smaller count. A count
/// equal to the vocabulary size stands for the unfactored model.
pub fn sweep_class_count<F>(
    events: &[Event],
    vocab_size: usize,
    candidates: &[usize],
    indicator: &[u32],
    cfg: &FactoredConfig,
    mut build: F,
) -> Result<Sweep>
where
    F: FnMut(usize) -> Result<ClassHierarchy>,
{
    if candidates.is_empty() {
        return Err(Error::invalid("class-count sweep needs at least one candidate"));
    }
    if events.is_empty() {
        return Err(Error::EmptyCorpus);
    }
    let mut cfg = *cfg;
    cfg.gis.iterations = 1;
    cfg.gis.tolerance = 0.0;
    cfg.gis.variant = Variant::Plain;
    let mut sorted = candidates.to_vec();
    sorted.sort_unstable();
    sorted.dedup();
    let mut table = Vec::with_capacity(sorted.len());
    for &classes in &sorted {
        let run = if classes == vocab_size {
            train_unfactored(events, vocab_size, indicator, &cfg)?
        } else {
            let hierarchy = build(classes)?;
            if hierarchy.num_words() != vocab_size {
                return Err(Error::invalid("hierarchy does not cover the vocabulary"));
            }
            train_factored(events, &hierarchy, indicator, &cfg)?
        };
        let ops: u64 = run.reports.iter().map(|r| r.log[0].ops).sum();
        log::info!("{classes} classes: {:.1} ops/event", run.first_iteration_ops_per_event());
        table.push(SweepEntry { classes, ops, ops_per_event: run.first_iteration_ops_per_event() });
    }
    let best = table.iter().min_by_key(|e| e.ops).map(|e| e.classes).unwrap();
    Ok(Sweep { best, table })
}

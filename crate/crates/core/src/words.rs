//! Address words, label rules and the admissible tree.
//!
//! A label rule assigns a level `L_w ∈ T` to every word `w`; the admissible
//! words are those whose `k`-th letter belongs to `S^(L_{[w]_{k-1}})`. This
//! module also samples paths under a weight system and checks the sufficient
//! conditions for singularity (Condition (A), the (★) event, and finite-horizon
//! evidence for Condition (B) on level sequences).

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use num_traits::{One, Zero};
use rand::Rng;
use rand_chacha::ChaCha8Rng;

use crate::error::{GasketError, Result};
use crate::geometry::cell_count;
use crate::numerics::{int, rat, to_f64, ExactRational};
use crate::random::stream_rng;
use crate::renorm::renormalization_constant;
use crate::rsg::RandomLabels;

/// Largest level accepted by default.
pub const DEFAULT_MAX_LEVEL: u32 = 12;

/// Default cap on the number of tree nodes an enumeration may visit.
pub const DEFAULT_ENUM_CEILING: u64 = 10_000_000;

/// The finite level set `T`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct LevelSet(BTreeSet<u32>);

impl LevelSet {
    pub fn new(levels: impl IntoIterator<Item = u32>) -> Result<Self> {
        Self::with_max(levels, DEFAULT_MAX_LEVEL)
    }

    pub fn with_max(levels: impl IntoIterator<Item = u32>, max: u32) -> Result<Self> {
        let set: BTreeSet<u32> = levels.into_iter().collect();
        if set.is_empty() {
            return Err(GasketError::validation("level set is empty"));
        }
        if let Some(bad) = set.iter().find(|&&nu| nu < 2 || nu > max) {
            return Err(GasketError::validation(format!(
                "level {bad} outside the supported range 2..={max}"
            )));
        }
        Ok(LevelSet(set))
    }

    pub fn iter(&self) -> impl Iterator<Item = u32> + '_ {
        self.0.iter().copied()
    }

    pub fn contains(&self, nu: u32) -> bool {
        self.0.contains(&nu)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn max_cells(&self) -> usize {
        self.iter().map(cell_count).max().unwrap_or(0)
    }

    /// Size of the alphabet `S`.
    pub fn alphabet_size(&self) -> usize {
        self.iter().map(cell_count).sum()
    }
}

impl fmt::Display for LevelSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.iter().map(|nu| nu.to_string()).collect();
        write!(f, "{}", parts.join(","))
    }
}

/// The letter `i^ν`: cell `i` of the level-ν subdivision.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Letter {
    level: u32,
    cell: u32,
}

impl Letter {
    pub fn new(cell: usize, level: u32) -> Result<Self> {
        if level < 2 || cell == 0 || cell > cell_count(level) {
            return Err(GasketError::validation(format!("no letter {cell}^{level}")));
        }
        Ok(Letter {
            level,
            cell: cell as u32,
        })
    }

    pub fn cell(&self) -> usize {
        self.cell as usize
    }

    pub fn level(&self) -> u32 {
        self.level
    }

    /// True for the corner letters `1^ν, 2^ν, 3^ν`.
    pub fn is_corner(&self) -> bool {
        self.cell <= 3
    }

    pub(crate) fn code(&self) -> u64 {
        ((self.level as u64) << 32) | self.cell as u64
    }
}

impl fmt::Display for Letter {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}^{}", self.cell, self.level)
    }
}

impl FromStr for Letter {
    type Err = GasketError;
    fn from_str(s: &str) -> Result<Self> {
        let bad = || GasketError::validation(format!("bad letter {s:?} (expected i^ν)"));
        let (i, nu) = s.trim().split_once('^').ok_or_else(bad)?;
        Letter::new(
            i.parse().map_err(|_| bad())?,
            nu.parse().map_err(|_| bad())?,
        )
    }
}

/// Finite address word. Displays as letters joined by `.`, or `@` when empty.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Word(Vec<Letter>);

impl Word {
    pub fn empty() -> Self {
        Word(Vec::new())
    }

    pub fn from_letters(letters: Vec<Letter>) -> Self {
        Word(letters)
    }

    pub fn letters(&self) -> &[Letter] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// `[w]_k`.
    pub fn prefix(&self, k: usize) -> Word {
        Word(self.0[..k.min(self.0.len())].to_vec())
    }

    pub fn push(&mut self, letter: Letter) {
        self.0.push(letter);
    }

    pub fn pop(&mut self) -> Option<Letter> {
        self.0.pop()
    }

    pub fn truncate(&mut self, len: usize) {
        self.0.truncate(len);
    }

    pub fn child(&self, letter: Letter) -> Word {
        let mut w = self.clone();
        w.push(letter);
        w
    }

    pub fn concat(&self, other: &Word) -> Word {
        let mut w = self.clone();
        w.0.extend_from_slice(&other.0);
        w
    }
}

impl fmt::Display for Word {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_empty() {
            return write!(f, "@");
        }
        for (k, l) in self.0.iter().enumerate() {
            if k > 0 {
                write!(f, ".")?;
            }
            write!(f, "{l}")?;
        }
        Ok(())
    }
}

impl FromStr for Word {
    type Err = GasketError;
    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        if s == "@" {
            return Ok(Word::empty());
        }
        s.split('.')
            .map(str::parse)
            .collect::<Result<Vec<_>>>()
            .map(Word)
    }
}

/// What a level sequence does past its listed terms.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum SequenceTail {
    /// Cycle through the listed terms again.
    Repeat,
    /// Stay at a fixed level.
    Constant(u32),
}

/// `τ = (τ_0, τ_1, …)` with `L_w = τ_{|w|}`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LevelSequence {
    pub terms: Vec<u32>,
    pub tail: SequenceTail,
}

impl LevelSequence {
    pub fn repeating(terms: Vec<u32>) -> Self {
        LevelSequence {
            terms,
            tail: SequenceTail::Repeat,
        }
    }

    pub fn at(&self, n: usize) -> u32 {
        if n < self.terms.len() {
            return self.terms[n];
        }
        match self.tail {
            SequenceTail::Repeat => self.terms[n % self.terms.len()],
            SequenceTail::Constant(nu) => nu,
        }
    }
}

#[derive(Clone, Debug)]
pub enum LabelKind {
    Constant(u32),
    Sequence(LevelSequence),
    Explicit {
        table: BTreeMap<Word, u32>,
        fallback: Box<LabelRule>,
    },
    Random(Arc<RandomLabels>),
}

/// The assignment `w ↦ L_w ∈ T` defining an inhomogeneous gasket.
#[derive(Clone, Debug)]
pub struct LabelRule {
    levels: LevelSet,
    kind: LabelKind,
}

impl LabelRule {
    pub fn new(levels: LevelSet, kind: LabelKind) -> Result<Self> {
        let check = |nu: u32| {
            if levels.contains(nu) {
                Ok(())
            } else {
                Err(GasketError::validation(format!(
                    "label {nu} is not in T = {{{levels}}}"
                )))
            }
        };
        match &kind {
            LabelKind::Constant(nu) => check(*nu)?,
            LabelKind::Sequence(seq) => {
                if seq.terms.is_empty() {
                    return Err(GasketError::validation("level sequence has no terms"));
                }
                seq.terms.iter().try_for_each(|&nu| check(nu))?;
                if let SequenceTail::Constant(nu) = seq.tail {
                    check(nu)?;
                }
            }
            LabelKind::Explicit { table, fallback } => {
                table.values().try_for_each(|&nu| check(nu))?;
                if fallback.levels != levels {
                    return Err(GasketError::validation(
                        "explicit map fallback uses a different level set",
                    ));
                }
            }
            LabelKind::Random(labels) => {
                if *labels.distribution().levels() != levels {
                    return Err(GasketError::validation(
                        "label distribution support differs from T",
                    ));
                }
            }
        }
        Ok(LabelRule { levels, kind })
    }

    pub fn constant(nu: u32) -> Result<Self> {
        Self::new(LevelSet::new([nu])?, LabelKind::Constant(nu))
    }

    /// Scale-irregular rule `L_w = τ_{|w|}` with the given terms repeated.
    pub fn periodic(terms: Vec<u32>) -> Result<Self> {
        let levels = LevelSet::new(terms.iter().copied())?;
        Self::new(levels, LabelKind::Sequence(LevelSequence::repeating(terms)))
    }

    pub fn sequence(levels: LevelSet, sequence: LevelSequence) -> Result<Self> {
        Self::new(levels, LabelKind::Sequence(sequence))
    }

    pub fn explicit(table: BTreeMap<Word, u32>, fallback: LabelRule) -> Result<Self> {
        let levels = fallback.levels.clone();
        Self::new(
            levels,
            LabelKind::Explicit {
                table,
                fallback: Box::new(fallback),
            },
        )
    }

    pub fn random(labels: RandomLabels) -> Result<Self> {
        let levels = labels.distribution().levels().clone();
        Self::new(levels, LabelKind::Random(Arc::new(labels)))
    }

    pub fn levels(&self) -> &LevelSet {
        &self.levels
    }

    pub fn kind(&self) -> &LabelKind {
        &self.kind
    }

    /// `L_w` without checking that `w` is admissible.
    pub fn label_unchecked(&self, w: &Word) -> u32 {
        match &self.kind {
            LabelKind::Constant(nu) => *nu,
            LabelKind::Sequence(seq) => seq.at(w.len()),
            LabelKind::Explicit { table, fallback } => match table.get(w) {
                Some(&nu) => nu,
                None => fallback.label_unchecked(w),
            },
            LabelKind::Random(labels) => labels.label(w),
        }
    }

    /// Errors with the first letter whose level disagrees with its prefix's label.
    pub fn check_admissible(&self, w: &Word) -> Result<()> {
        let mut prefix = Word::empty();
        for (k, &letter) in w.letters().iter().enumerate() {
            let expected = self.label_unchecked(&prefix);
            if letter.level() != expected {
                return Err(GasketError::Inadmissible {
                    position: k + 1,
                    letter: letter.to_string(),
                    expected,
                });
            }
            prefix.push(letter);
        }
        Ok(())
    }

    pub fn is_admissible(&self, w: &Word) -> bool {
        self.check_admissible(w).is_ok()
    }

    /// `L_w` for an admissible `w`.
    pub fn label(&self, w: &Word) -> Result<u32> {
        self.check_admissible(w)?;
        Ok(self.label_unchecked(w))
    }

    /// `S^(L_w)` in canonical cell order.
    pub fn admissible_children(&self, w: &Word) -> Result<Vec<Letter>> {
        let nu = self.label(w)?;
        Ok(children_at(nu))
    }

    /// Lazily yields every admissible word of length `depth` in lexicographic order.
    pub fn enumerate(&self, depth: usize) -> AdmissibleWords<'_> {
        self.enumerate_with_ceiling(depth, DEFAULT_ENUM_CEILING)
    }

    pub fn enumerate_with_ceiling(&self, depth: usize, ceiling: u64) -> AdmissibleWords<'_> {
        AdmissibleWords {
            rule: self,
            depth,
            ceiling,
            visited: 0,
            word: Word::empty(),
            stack: Vec::new(),
            started: false,
            done: false,
        }
    }

    /// The level forced at each of `count` further steps when the word `base`
    /// is extended by `letter_at(step)` corners.
    pub(crate) fn forced_levels(
        &self,
        base: &Word,
        count: usize,
        corner_at: impl Fn(usize) -> usize,
    ) -> Vec<u32> {
        let mut w = base.clone();
        let mut out = Vec::with_capacity(count);
        for step in 0..count {
            let nu = self.label_unchecked(&w);
            out.push(nu);
            w.push(Letter {
                level: nu,
                cell: corner_at(step) as u32,
            });
        }
        out
    }
}

pub(crate) fn children_at(nu: u32) -> Vec<Letter> {
    (1..=cell_count(nu) as u32)
        .map(|cell| Letter { level: nu, cell })
        .collect()
}

/// Depth-first stream over `W̃_m`.
pub struct AdmissibleWords<'a> {
    rule: &'a LabelRule,
    depth: usize,
    ceiling: u64,
    visited: u64,
    word: Word,
    stack: Vec<(Vec<Letter>, usize)>,
    started: bool,
    done: bool,
}

impl AdmissibleWords<'_> {
    fn visit(&mut self) -> Result<()> {
        self.visited += 1;
        if self.visited > self.ceiling {
            self.done = true;
            return Err(GasketError::CeilingExceeded {
                ceiling: self.ceiling,
            });
        }
        Ok(())
    }

    fn push_children(&mut self) {
        let nu = self.rule.label_unchecked(&self.word);
        self.stack.push((children_at(nu), 0));
    }
}

impl Iterator for AdmissibleWords<'_> {
    type Item = Result<Word>;

    fn next(&mut self) -> Option<Result<Word>> {
        if self.done {
            return None;
        }
        if !self.started {
            self.started = true;
            if let Err(e) = self.visit() {
                return Some(Err(e));
            }
            if self.depth == 0 {
                self.done = true;
                return Some(Ok(Word::empty()));
            }
            self.push_children();
        }
        loop {
            let (children, next) = self.stack.last_mut()?;
            if *next >= children.len() {
                self.stack.pop();
                if self.stack.is_empty() {
                    self.done = true;
                    return None;
                }
                self.word.pop();
                continue;
            }
            let letter = children[*next];
            *next += 1;
            if self.word.len() == self.stack.len() {
                self.word.pop();
            }
            self.word.push(letter);
            if let Err(e) = self.visit() {
                return Some(Err(e));
            }
            if self.word.len() == self.depth {
                return Some(Ok(self.word.clone()));
            }
            self.push_children();
        }
    }
}

/// Weights `q_v > 0` with `Σ_{v ∈ S^(ν)} q_v = 1` for each level.
#[derive(Clone, Debug, PartialEq)]
pub struct WeightSystem {
    weights: BTreeMap<u32, Vec<ExactRational>>,
    cumulative: BTreeMap<u32, Vec<f64>>,
}

impl WeightSystem {
    pub fn from_levels(
        levels: impl IntoIterator<Item = (u32, Vec<ExactRational>)>,
    ) -> Result<Self> {
        let weights: BTreeMap<u32, Vec<ExactRational>> = levels.into_iter().collect();
        for (&nu, row) in &weights {
            if nu < 2 {
                return Err(GasketError::validation(format!(
                    "weights given for level {nu}"
                )));
            }
            if row.len() != cell_count(nu) {
                return Err(GasketError::validation(format!(
                    "level {nu} needs {} weights, got {}",
                    cell_count(nu),
                    row.len()
                )));
            }
            if row.iter().any(|q| *q <= ExactRational::zero()) {
                return Err(GasketError::validation(format!(
                    "level {nu} has a nonpositive weight"
                )));
            }
            let total: ExactRational = row.iter().sum();
            if !total.is_one() {
                return Err(GasketError::validation(format!(
                    "weights for level {nu} sum to {total}, not 1"
                )));
            }
        }
        let cumulative = weights
            .iter()
            .map(|(&nu, row)| {
                let mut acc = ExactRational::zero();
                let cum = row
                    .iter()
                    .map(|q| {
                        acc += q;
                        to_f64(&acc)
                    })
                    .collect();
                (nu, cum)
            })
            .collect();
        Ok(WeightSystem {
            weights,
            cumulative,
        })
    }

    /// `q_v = N(ν)⁻¹` for every letter.
    pub fn uniform(levels: &LevelSet) -> Self {
        Self::from_levels(levels.iter().map(|nu| {
            let n = cell_count(nu);
            (nu, vec![rat(1, n as i64); n])
        }))
        .expect("uniform weights are valid")
    }

    /// Membership in `𝒜` for the level set `T`.
    pub fn validate(&self, levels: &LevelSet) -> Result<()> {
        match levels.iter().find(|nu| !self.weights.contains_key(nu)) {
            Some(nu) => Err(GasketError::validation(format!(
                "no weights for level {nu}"
            ))),
            None => Ok(()),
        }
    }

    pub fn levels(&self) -> impl Iterator<Item = (u32, &[ExactRational])> + '_ {
        self.weights.iter().map(|(&nu, row)| (nu, row.as_slice()))
    }

    pub fn weight(&self, letter: Letter) -> Result<ExactRational> {
        self.weights
            .get(&letter.level())
            .map(|row| row[letter.cell() - 1].clone())
            .ok_or_else(|| {
                GasketError::validation(format!("no weights for level {}", letter.level()))
            })
    }

    /// `q_w = q_{w_1} ⋯ q_{w_m}`.
    pub fn word_weight(&self, w: &Word) -> Result<ExactRational> {
        w.letters()
            .iter()
            .try_fold(ExactRational::one(), |acc, &l| Ok(acc * self.weight(l)?))
    }

    pub fn min_weight(&self) -> ExactRational {
        self.weights
            .values()
            .flatten()
            .min()
            .cloned()
            .unwrap_or_else(|| int(1))
    }

    /// Draws a cell of level `nu` with probability `q_v` from `u ∈ [0,1)`.
    pub fn pick(&self, nu: u32, u: f64) -> Result<Letter> {
        let cum = self
            .cumulative
            .get(&nu)
            .ok_or_else(|| GasketError::validation(format!("no weights for level {nu}")))?;
        let k = cum.iter().position(|&c| u < c).unwrap_or(cum.len() - 1);
        Ok(Letter {
            level: nu,
            cell: k as u32 + 1,
        })
    }
}

/// Sequential draw of a `λ_q`-distributed path prefix of length `depth`.
pub fn sample_path(rule: &LabelRule, q: &WeightSystem, depth: usize, seed: u64) -> Result<Word> {
    sample_path_with(rule, q, depth, &mut stream_rng(seed, 0))
}

pub fn sample_path_with(
    rule: &LabelRule,
    q: &WeightSystem,
    depth: usize,
    rng: &mut ChaCha8Rng,
) -> Result<Word> {
    q.validate(rule.levels())?;
    let mut w = Word::empty();
    for _ in 0..depth {
        let nu = rule.label_unchecked(&w);
        let letter = q.pick(nu, rng.gen::<f64>())?;
        w.push(letter);
    }
    Ok(w)
}

/// Corner letters `(i, ν)` where `q_{i^ν} = r^(ν)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ConditionAVerdict {
    pub holds: bool,
    pub violations: Vec<(usize, u32)>,
}

pub fn check_condition_a(levels: &LevelSet, q: &WeightSystem) -> Result<ConditionAVerdict> {
    q.validate(levels)?;
    let mut violations = Vec::new();
    for nu in levels.iter() {
        let r = renormalization_constant(nu)?;
        for i in 1..=3 {
            if q.weight(Letter::new(i, nu)?)? == r {
                violations.push((i, nu));
            }
        }
    }
    Ok(ConditionAVerdict {
        holds: violations.is_empty(),
        violations,
    })
}

/// Finite-horizon evidence for the sufficient conditions on a level sequence.
/// Nothing here certifies the infinite statement.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ConditionBEvidence {
    pub horizon: usize,
    /// Window length used for the coverage count, `|T|`.
    pub window: usize,
    /// Number of `k` with `{τ_{k+1}, …, τ_{k+|T|}} = T` and `k + |T| ≤ horizon`.
    pub covering_windows: usize,
    /// Longest run of equal terms among `τ_1, …, τ_horizon`.
    pub max_run: usize,
    /// Number of `k` at which the (★) inclusion holds with `l₂ = |T|`.
    pub star_hits_window: usize,
    /// Number of `k` at which the (★) inclusion holds with `l₂ = 1`.
    pub star_hits_single: usize,
    pub holds_up_to_horizon: bool,
}

pub fn check_condition_b_sufficient(
    rule: &LabelRule,
    l0: usize,
    l1: usize,
    horizon: usize,
) -> Result<ConditionBEvidence> {
    let LabelKind::Sequence(seq) = rule.kind() else {
        return Err(GasketError::validation(
            "condition (B) evidence needs a level-sequence rule",
        ));
    };
    let t = rule.levels();
    let window = t.len();
    if horizon < l0 + l1 + window {
        return Err(GasketError::validation(format!(
            "horizon {horizon} is shorter than l0 + l1 + |T| = {}",
            l0 + l1 + window
        )));
    }
    let tau = |n: usize| seq.at(n);
    let covers = |from: usize, len: usize| {
        let seen: BTreeSet<u32> = (from..from + len).map(tau).collect();
        seen.len() == window
    };
    let covering_windows = (0..=horizon - window)
        .filter(|&k| covers(k + 1, window))
        .count();

    let mut max_run = 0;
    let mut run = 0;
    for n in 1..=horizon {
        run = if n > 1 && tau(n) == tau(n - 1) {
            run + 1
        } else {
            1
        };
        max_run = max_run.max(run);
    }

    // ν_m = τ_{m−1} for every path, so (★) at k compares τ over
    // [k+l0, k+l0+l1) with τ over [k+l0+l1, k+l0+l1+l2)
    let star = |k: usize, l2: usize| {
        let head: BTreeSet<u32> = (k + l0..k + l0 + l1).map(tau).collect();
        let tail: BTreeSet<u32> = (k + l0 + l1..k + l0 + l1 + l2).map(tau).collect();
        head.is_subset(&tail)
    };
    let count_star = |l2: usize| {
        let last = horizon + 1 - (l0 + l1 + l2).min(horizon + 1);
        (0..=last).filter(|&k| star(k, l2)).count()
    };
    let star_hits_window = count_star(window);
    let star_hits_single = count_star(1);

    Ok(ConditionBEvidence {
        horizon,
        window,
        covering_windows,
        max_run,
        star_hits_window,
        star_hits_single,
        holds_up_to_horizon: star_hits_window > 0 || star_hits_single > 0,
    })
}

/// Whether the (★) inclusion holds at `k` for all nine corner pairs along
/// the given admissible prefix.
pub fn check_star_event(
    rule: &LabelRule,
    prefix: &Word,
    k: usize,
    l0: usize,
    l1: usize,
    l2: usize,
) -> Result<bool> {
    star_event_with(rule, prefix, k, l0, l1, l2, |head, tail| {
        head.is_subset(tail)
    })
}

pub(crate) fn star_event_with(
    rule: &LabelRule,
    prefix: &Word,
    k: usize,
    l0: usize,
    l1: usize,
    l2: usize,
    accept: impl Fn(&BTreeSet<u32>, &BTreeSet<u32>) -> bool,
) -> Result<bool> {
    if prefix.len() < k {
        return Err(GasketError::validation(format!(
            "prefix of length {} is shorter than k = {k}",
            prefix.len()
        )));
    }
    rule.check_admissible(prefix)?;
    let base = prefix.prefix(k);
    for i in 1..=3 {
        for j in 1..=3 {
            let nus = rule.forced_levels(&base, l0 + l1 + l2, |s| if s < l0 { i } else { j });
            let head: BTreeSet<u32> = nus[l0..l0 + l1].iter().copied().collect();
            let tail: BTreeSet<u32> = nus[l0 + l1..].iter().copied().collect();
            if !accept(&head, &tail) {
                return Ok(false);
            }
        }
    }
    Ok(true)
}

/// Reads a level-sequence file: one integer per line, blank lines and `#`
/// comments ignored.
pub fn parse_level_sequence(text: &str) -> Result<Vec<u32>> {
    text.lines()
        .enumerate()
        .map(|(n, line)| (n + 1, line.split('#').next().unwrap_or("").trim()))
        .filter(|(_, line)| !line.is_empty())
        .map(|(n, line)| {
            line.parse().map_err(|_| GasketError::Parse {
                line: n,
                message: format!("expected a level, got {line:?}"),
            })
        })
        .collect()
}

/// Reads an explicit-map file: lines `word<TAB>level`.
pub fn parse_explicit_map(text: &str) -> Result<BTreeMap<Word, u32>> {
    let mut out = BTreeMap::new();
    for (n, line) in text.lines().enumerate() {
        let line = line.split('#').next().unwrap_or("").trim_end();
        if line.trim().is_empty() {
            continue;
        }
        let perr = |message: String| GasketError::Parse {
            line: n + 1,
            message,
        };
        let (w, nu) = line
            .split_once('\t')
            .ok_or_else(|| perr("expected word<TAB>level".into()))?;
        let w: Word = w.parse().map_err(|e: GasketError| perr(e.to_string()))?;
        let nu: u32 = nu
            .trim()
            .parse()
            .map_err(|_| perr(format!("bad level {nu:?}")))?;
        out.insert(w, nu);
    }
    Ok(out)
}

/// Memo table type used by random label rules.
pub(crate) type LabelMemo = HashMap<Word, u32>;

#[cfg(test)]
mod tests {
    use super::*;

    fn w(s: &str) -> Word {
        s.parse().unwrap()
    }

    #[test]
    fn letter_and_word_text() {
        let l: Letter = "3^2".parse().unwrap();
        assert_eq!((l.cell(), l.level()), (3, 2));
        assert!("4^2".parse::<Letter>().is_err());
        assert_eq!(w("1^2.6^3").to_string(), "1^2.6^3");
        assert_eq!(w("@"), Word::empty());
        assert_eq!(Word::empty().to_string(), "@");
    }

    #[test]
    fn level_set_validation() {
        assert!(LevelSet::new([]).is_err());
        assert!(LevelSet::new([1]).is_err());
        assert!(LevelSet::new([13]).is_err());
        assert!(LevelSet::with_max([13], 13).is_ok());
        assert_eq!(LevelSet::new([3, 2, 3]).unwrap().len(), 2);
    }

    #[test]
    fn labels() {
        let c = LabelRule::constant(2).unwrap();
        assert_eq!(c.label(&w("1^2.3^2")).unwrap(), 2);

        let alt = LabelRule::periodic(vec![2, 3]).unwrap();
        assert_eq!(alt.label(&w("2^2")).unwrap(), 3);
        assert_eq!(alt.label(&w("2^2.6^3")).unwrap(), 2);
    }

    #[test]
    fn inadmissible_position_is_reported() {
        let alt = LabelRule::periodic(vec![2, 3]).unwrap();
        match alt.label(&w("2^2.2^2")) {
            Err(GasketError::Inadmissible {
                position, expected, ..
            }) => {
                assert_eq!((position, expected), (2, 3));
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn children() {
        let c = LabelRule::constant(2).unwrap();
        let kids = c.admissible_children(&Word::empty()).unwrap();
        assert_eq!(
            kids.iter().map(ToString::to_string).collect::<Vec<_>>(),
            ["1^2", "2^2", "3^2"]
        );

        let three_first = LabelRule::periodic(vec![3, 2]).unwrap();
        assert_eq!(
            three_first
                .admissible_children(&Word::empty())
                .unwrap()
                .len(),
            6
        );
    }

    #[test]
    fn enumeration_counts() {
        let count = |rule: &LabelRule, m| rule.enumerate(m).map(Result::unwrap).count();
        assert_eq!(count(&LabelRule::constant(2).unwrap(), 3), 27);
        assert_eq!(count(&LabelRule::constant(3).unwrap(), 2), 36);
        assert_eq!(count(&LabelRule::periodic(vec![2, 3]).unwrap(), 2), 18);
        assert_eq!(count(&LabelRule::constant(2).unwrap(), 0), 1);
    }

    #[test]
    fn enumeration_is_lexicographic() {
        let words: Vec<Word> = LabelRule::constant(2)
            .unwrap()
            .enumerate(2)
            .map(Result::unwrap)
            .collect();
        let mut sorted = words.clone();
        sorted.sort();
        assert_eq!(words, sorted);
        assert_eq!(words[0].to_string(), "1^2.1^2");
        assert_eq!(words[8].to_string(), "3^2.3^2");
    }

    #[test]
    fn enumeration_ceiling() {
        let rule = LabelRule::constant(2).unwrap();
        let items: Vec<_> = rule.enumerate_with_ceiling(3, 10).collect();
        assert!(matches!(
            items.last(),
            Some(Err(GasketError::CeilingExceeded { ceiling: 10 }))
        ));
    }

    #[test]
    fn weight_validation() {
        assert!(WeightSystem::from_levels([(2, vec![rat(1, 2), rat(1, 4), rat(1, 5)])]).is_err());
        assert!(WeightSystem::from_levels([(2, vec![int(1), int(0), int(0)])]).is_err());
        assert!(WeightSystem::from_levels([(2, vec![rat(1, 2), rat(1, 2)])]).is_err());
        let q = WeightSystem::uniform(&LevelSet::new([2, 3]).unwrap());
        assert_eq!(q.word_weight(&w("1^2.6^3")).unwrap(), rat(1, 18));
    }

    #[test]
    fn same_seed_same_path() {
        let rule = LabelRule::periodic(vec![2, 3]).unwrap();
        let q = WeightSystem::uniform(rule.levels());
        let a = sample_path(&rule, &q, 30, 11).unwrap();
        let b = sample_path(&rule, &q, 30, 11).unwrap();
        assert_eq!(a, b);
        assert!(rule.is_admissible(&a));
    }

    #[test]
    fn condition_a_examples() {
        let t2 = LevelSet::new([2]).unwrap();
        assert!(
            check_condition_a(&t2, &WeightSystem::uniform(&t2))
                .unwrap()
                .holds
        );

        let q = WeightSystem::from_levels([(2, vec![rat(3, 5), rat(1, 5), rat(1, 5)])]).unwrap();
        let v = check_condition_a(&t2, &q).unwrap();
        assert!(!v.holds);
        assert_eq!(v.violations, vec![(1, 2)]);
    }

    #[test]
    fn condition_b_alternating() {
        let rule = LabelRule::periodic(vec![2, 3]).unwrap();
        let ev = check_condition_b_sufficient(&rule, 1, 1, 100).unwrap();
        assert_eq!(ev.covering_windows, 99);
        assert_eq!(ev.max_run, 1);
        assert!(ev.holds_up_to_horizon);
    }

    #[test]
    fn condition_b_wrong_variant() {
        let rule = LabelRule::constant(2).unwrap();
        assert!(check_condition_b_sufficient(&rule, 1, 1, 10).is_err());
    }

    #[test]
    fn star_for_constant_rule() {
        let rule = LabelRule::constant(3).unwrap();
        let q = WeightSystem::uniform(rule.levels());
        let path = sample_path(&rule, &q, 6, 1).unwrap();
        for k in 0..=6 {
            assert!(check_star_event(&rule, &path, k, 2, 2, 1).unwrap());
        }
    }

    #[test]
    fn parses_files() {
        assert_eq!(
            parse_level_sequence("2\n3\n\n# c\n2\n").unwrap(),
            vec![2, 3, 2]
        );
        assert!(parse_level_sequence("2\nx\n").is_err());
        let m = parse_explicit_map("@\t3\n1^3\t2\n").unwrap();
        assert_eq!(m[&Word::empty()], 3);
        assert!(parse_explicit_map("@ 3\n").is_err());
    }
}

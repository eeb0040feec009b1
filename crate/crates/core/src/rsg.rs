//! Random recursive gaskets: i.i.d. labels `L_w ~ ρ`, the coverage events
//! `U(k)`, and Monte Carlo estimates of their probability.
//!
//! A label is a pure function of `(seed, w)`. The key of a word is a rolling
//! SplitMix64 hash over its letters, so the hot loops below carry the key
//! along instead of hashing whole words.

use std::collections::BTreeSet;
use std::fmt;
use std::sync::Mutex;

use num_traits::{One, ToPrimitive, Zero};
use rand::Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{GasketError, Result};
use crate::numerics::{to_f64, ExactRational};
use crate::random::{derive_seed, mix64, stream_rng, unit_f64};
use crate::words::{star_event_with, LabelMemo, LabelRule, Letter, LevelSet, WeightSystem, Word};

const LABEL_SALT: u64 = 0x6c61_6265_6c73_2121;

/// `ρ`: a probability measure on `T` with full support.
#[derive(Clone, Debug, PartialEq)]
pub struct LevelDistribution {
    levels: LevelSet,
    probs: Vec<(u32, ExactRational)>,
    cumulative: Vec<f64>,
}

impl LevelDistribution {
    pub fn new(probs: impl IntoIterator<Item = (u32, ExactRational)>) -> Result<Self> {
        let mut probs: Vec<(u32, ExactRational)> = probs.into_iter().collect();
        probs.sort_by_key(|(nu, _)| *nu);
        let levels = LevelSet::new(probs.iter().map(|(nu, _)| *nu))?;
        if levels.len() != probs.len() {
            return Err(GasketError::validation("a level is listed twice in ρ"));
        }
        if let Some((nu, _)) = probs.iter().find(|(_, p)| *p <= ExactRational::zero()) {
            return Err(GasketError::validation(format!("ρ({nu}) must be positive")));
        }
        let total: ExactRational = probs.iter().map(|(_, p)| p).sum();
        if !total.is_one() {
            return Err(GasketError::validation(format!("ρ sums to {total}, not 1")));
        }
        let mut acc = ExactRational::zero();
        let cumulative = probs
            .iter()
            .map(|(_, p)| {
                acc += p;
                to_f64(&acc)
            })
            .collect();
        Ok(LevelDistribution {
            levels,
            probs,
            cumulative,
        })
    }

    pub fn uniform(levels: &LevelSet) -> Self {
        let n = levels.len() as i64;
        Self::new(
            levels
                .iter()
                .map(|nu| (nu, ExactRational::new(1.into(), n.into()))),
        )
        .expect("uniform ρ is valid")
    }

    pub fn levels(&self) -> &LevelSet {
        &self.levels
    }

    pub fn probabilities(&self) -> &[(u32, ExactRational)] {
        &self.probs
    }

    pub fn prob(&self, nu: u32) -> ExactRational {
        self.probs
            .iter()
            .find(|(l, _)| *l == nu)
            .map_or_else(ExactRational::zero, |(_, p)| p.clone())
    }

    /// Draws a level from `u ∈ [0, 1)`.
    pub fn pick(&self, u: f64) -> u32 {
        let k = self
            .cumulative
            .iter()
            .position(|&c| u < c)
            .unwrap_or(self.probs.len() - 1);
        self.probs[k].0
    }

    /// `(l₂! Π_ν ρ(ν))⁹` with `l₂ = |T|`.
    pub fn coverage_probability(&self) -> ExactRational {
        let l2 = self.probs.len() as u64;
        let fact: u64 = (1..=l2).product();
        let prod: ExactRational = self.probs.iter().map(|(_, p)| p.clone()).product();
        num_traits::pow(ExactRational::from_integer(fact.into()) * prod, 9)
    }
}

impl fmt::Display for LevelDistribution {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self
            .probs
            .iter()
            .map(|(nu, p)| format!("{nu}:{p}"))
            .collect();
        write!(f, "{}", parts.join(","))
    }
}

/// Rolling key of the empty word.
pub fn root_key(seed: u64) -> u64 {
    mix64(seed)
}

/// Key of `w v` from the key of `w`.
pub fn extend_key(key: u64, letter: Letter) -> u64 {
    mix64(key ^ mix64(letter.code()))
}

/// Lazily realized family `{L_w}` of i.i.d. `ρ`-distributed labels.
#[derive(Debug)]
pub struct RandomLabels {
    distribution: LevelDistribution,
    seed: u64,
    memo: Mutex<LabelMemo>,
}

impl RandomLabels {
    pub fn new(distribution: LevelDistribution, seed: u64) -> Self {
        RandomLabels {
            distribution,
            seed,
            memo: Mutex::new(LabelMemo::new()),
        }
    }

    pub fn distribution(&self) -> &LevelDistribution {
        &self.distribution
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn key(&self, w: &Word) -> u64 {
        w.letters()
            .iter()
            .fold(root_key(self.seed), |k, &l| extend_key(k, l))
    }

    pub fn label_for_key(&self, key: u64) -> u32 {
        self.distribution.pick(unit_f64(mix64(key ^ LABEL_SALT)))
    }

    /// `L_w`, memoized.
    pub fn label(&self, w: &Word) -> u32 {
        let mut memo = self.memo.lock().expect("label memo poisoned");
        if let Some(&nu) = memo.get(w) {
            return nu;
        }
        let nu = self.label_for_key(self.key(w));
        memo.insert(w.clone(), nu);
        nu
    }

    pub fn memo_len(&self) -> usize {
        self.memo.lock().expect("label memo poisoned").len()
    }
}

impl Clone for RandomLabels {
    fn clone(&self) -> Self {
        RandomLabels::new(self.distribution.clone(), self.seed)
    }
}

/// `[ω]_k ∈ W̃_k` and every window after an `i`-run of length `l₀` and a
/// `j`-run of length `l₁` covers `T` exactly (window length `l₂ = |T|`).
pub fn detect_u_event(
    rule: &LabelRule,
    prefix: &Word,
    k: usize,
    l0: usize,
    l1: usize,
) -> Result<bool> {
    let t: BTreeSet<u32> = rule.levels().iter().collect();
    let l2 = t.len();
    star_event_with(rule, prefix, k, l0, l1, l2, |_, tail| *tail == t)
}

/// Sampling-side view of a random label family, evaluated through rolling keys.
struct KeyedLabels<'a> {
    dist: &'a LevelDistribution,
    seed: u64,
}

impl KeyedLabels<'_> {
    fn label(&self, key: u64) -> u32 {
        self.dist.pick(unit_f64(mix64(key ^ LABEL_SALT)))
    }

    /// Samples `[ω]_depth` under `q` and the labels, returning the keys of
    /// every prefix `[ω]_0, …, [ω]_depth`.
    fn sample_keys(&self, q: &WeightSystem, depth: usize, rng: &mut impl Rng) -> Result<Vec<u64>> {
        let mut keys = Vec::with_capacity(depth + 1);
        let mut key = root_key(self.seed);
        keys.push(key);
        for _ in 0..depth {
            let letter = q.pick(self.label(key), rng.gen::<f64>())?;
            key = extend_key(key, letter);
            keys.push(key);
        }
        Ok(keys)
    }

    /// Whether the (★)-type window test passes at the word with key `base`.
    fn windows_pass(
        &self,
        base: u64,
        l0: usize,
        l1: usize,
        l2: usize,
        accept: &impl Fn(&BTreeSet<u32>, &BTreeSet<u32>) -> bool,
    ) -> bool {
        for i in 1..=3 {
            for j in 1..=3 {
                let mut key = base;
                let mut head = BTreeSet::new();
                let mut tail = BTreeSet::new();
                for step in 0..l0 + l1 + l2 {
                    let nu = self.label(key);
                    if (l0..l0 + l1).contains(&step) {
                        head.insert(nu);
                    } else if step >= l0 + l1 {
                        tail.insert(nu);
                    }
                    let cell = if step < l0 { i } else { j };
                    key = extend_key(key, Letter::new(cell, nu).expect("corner letter"));
                }
                if !accept(&head, &tail) {
                    return false;
                }
            }
        }
        true
    }
}

/// Monte Carlo estimate of `ℙ(U(k))` against the exact value.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct EventEstimate {
    pub k: usize,
    pub l0: usize,
    pub l1: usize,
    pub l2: usize,
    pub trials: u64,
    pub hits: u64,
    pub p_hat: f64,
    #[serde(serialize_with = "ser_fraction")]
    pub p_exact: ExactRational,
    /// `p_exact ± 3σ` with `σ = √(p(1−p)/trials)`.
    pub three_sigma_interval: (f64, f64),
    pub within: bool,
}

fn ser_fraction<S: serde::Serializer>(
    x: &ExactRational,
    s: S,
) -> std::result::Result<S::Ok, S::Error> {
    s.serialize_str(&crate::measures::fraction_text(x))
}

fn three_sigma(p: f64, trials: u64) -> (f64, f64) {
    let sigma = (p * (1.0 - p) / trials as f64).sqrt();
    (p - 3.0 * sigma, p + 3.0 * sigma)
}

fn check_rsg_inputs(rho: &LevelDistribution, q: &WeightSystem, trials: u64) -> Result<()> {
    if trials == 0 {
        return Err(GasketError::validation("trials must be at least 1"));
    }
    q.validate(rho.levels())
}

/// Each trial draws a fresh label family and a `k`-letter path, then tests
/// `U(k)`. Trials run in parallel; the result depends only on `seed`.
pub fn estimate_event_probability(
    rho: &LevelDistribution,
    q: &WeightSystem,
    l0: usize,
    l1: usize,
    k: usize,
    trials: u64,
    seed: u64,
) -> Result<EventEstimate> {
    check_rsg_inputs(rho, q, trials)?;
    let t: BTreeSet<u32> = rho.levels().iter().collect();
    let l2 = t.len();
    let accept = |_: &BTreeSet<u32>, tail: &BTreeSet<u32>| *tail == t;
    let hits = (0..trials)
        .into_par_iter()
        .map(|trial| -> Result<u64> {
            let labels = KeyedLabels {
                dist: rho,
                seed: derive_seed(seed, trial),
            };
            let mut rng = stream_rng(seed, trial);
            let keys = labels.sample_keys(q, k, &mut rng)?;
            Ok(labels.windows_pass(keys[k], l0, l1, l2, &accept) as u64)
        })
        .try_reduce(|| 0, |a, b| Ok(a + b))?;
    let p_exact = rho.coverage_probability();
    let p = to_f64(&p_exact);
    let p_hat = hits as f64 / trials as f64;
    let interval = three_sigma(p, trials);
    Ok(EventEstimate {
        k,
        l0,
        l1,
        l2,
        trials,
        hits,
        p_hat,
        p_exact,
        three_sigma_interval: interval,
        within: interval.0 <= p_hat && p_hat <= interval.1,
    })
}

/// Labels used by trial `trial` of [`estimate_event_probability`], as a rule.
pub fn trial_labels(rho: &LevelDistribution, seed: u64, trial: u64) -> Result<LabelRule> {
    LabelRule::random(RandomLabels::new(rho.clone(), derive_seed(seed, trial)))
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct StarFrequencyRow {
    pub k: usize,
    pub trials: u64,
    pub hits: u64,
    pub frequency: f64,
}

/// Per-`k` frequency of the coverage form of (★) at `k = 0, stride, 2·stride, …`
/// up to `path_depth`, over independent label families and paths.
#[allow(clippy::too_many_arguments)]
pub fn star_frequency(
    rho: &LevelDistribution,
    q: &WeightSystem,
    l0: usize,
    l1: usize,
    l2: usize,
    path_depth: usize,
    stride: usize,
    trials: u64,
    seed: u64,
) -> Result<Vec<StarFrequencyRow>> {
    check_rsg_inputs(rho, q, trials)?;
    if stride == 0 {
        return Err(GasketError::validation("stride must be at least 1"));
    }
    let t: BTreeSet<u32> = rho.levels().iter().collect();
    let accept = |_: &BTreeSet<u32>, tail: &BTreeSet<u32>| *tail == t;
    let ks: Vec<usize> = (0..=path_depth).step_by(stride).collect();
    let counts = (0..trials)
        .into_par_iter()
        .map(|trial| -> Result<Vec<u64>> {
            let labels = KeyedLabels {
                dist: rho,
                seed: derive_seed(seed, trial),
            };
            let mut rng = stream_rng(seed, trial);
            let keys = labels.sample_keys(q, path_depth, &mut rng)?;
            Ok(ks
                .iter()
                .map(|&k| labels.windows_pass(keys[k], l0, l1, l2, &accept) as u64)
                .collect())
        })
        .try_reduce(
            || vec![0; ks.len()],
            |a, b| Ok(a.iter().zip(&b).map(|(x, y)| x + y).collect()),
        )?;
    Ok(ks
        .iter()
        .zip(counts)
        .map(|(&k, hits)| StarFrequencyRow {
            k,
            trials,
            hits,
            frequency: hits as f64 / trials as f64,
        })
        .collect())
}

/// Text table `k, trials, hits, p_hat, p_exact, pass/fail`.
pub fn format_estimate(e: &EventEstimate) -> String {
    format!(
        "k\ttrials\thits\tp_hat\tp_exact\tresult\n{}\t{}\t{}\t{:.17e}\t{} ({:.17e})\t{}\n",
        e.k,
        e.trials,
        e.hits,
        e.p_hat,
        crate::measures::fraction_text(&e.p_exact),
        e.p_exact.to_f64().unwrap_or(f64::NAN),
        if e.within { "pass" } else { "fail" }
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::rat;
    use crate::words::sample_path_with;

    fn t23() -> LevelSet {
        LevelSet::new([2, 3]).unwrap()
    }

    #[test]
    fn distribution_validation() {
        assert!(LevelDistribution::new([(2, rat(1, 2)), (3, rat(1, 3))]).is_err());
        assert!(LevelDistribution::new([(2, rat(1, 1)), (3, rat(0, 1))]).is_err());
        assert!(LevelDistribution::new([(2, rat(1, 4)), (3, rat(3, 4))]).is_ok());
    }

    #[test]
    fn exact_probability() {
        assert_eq!(
            LevelDistribution::uniform(&t23()).coverage_probability(),
            rat(1, 512)
        );
        let single = LevelDistribution::uniform(&LevelSet::new([3]).unwrap());
        assert_eq!(single.coverage_probability(), rat(1, 1));
        let skew = LevelDistribution::new([(2, rat(99, 100)), (3, rat(1, 100))]).unwrap();
        assert_eq!(
            skew.coverage_probability(),
            num_traits::pow(rat(198, 10000), 9)
        );
    }

    #[test]
    fn labels_are_repeatable() {
        let labels = RandomLabels::new(LevelDistribution::uniform(&t23()), 9);
        let w: Word = "1^2.4^3".parse().unwrap();
        assert_eq!(labels.label(&w), labels.label(&w));
        assert_eq!(labels.memo_len(), 1);
        let again = RandomLabels::new(LevelDistribution::uniform(&t23()), 9);
        assert_eq!(again.label(&w), labels.label(&w));
    }

    #[test]
    fn single_level_always_fires() {
        let rho = LevelDistribution::uniform(&LevelSet::new([2]).unwrap());
        let q = WeightSystem::uniform(rho.levels());
        let e = estimate_event_probability(&rho, &q, 1, 1, 3, 200, 5).unwrap();
        assert_eq!(e.hits, 200);
        let rows = star_frequency(&rho, &q, 1, 1, 1, 6, 2, 50, 5).unwrap();
        assert!(rows.iter().all(|r| r.hits == 50));
    }

    #[test]
    fn keyed_path_matches_rule() {
        let rho = LevelDistribution::uniform(&t23());
        let q = WeightSystem::uniform(rho.levels());
        let (seed, trial, k) = (77, 3, 4);
        let rule = trial_labels(&rho, seed, trial).unwrap();
        let prefix = sample_path_with(&rule, &q, k, &mut stream_rng(seed, trial)).unwrap();
        let keyed = KeyedLabels {
            dist: &rho,
            seed: derive_seed(seed, trial),
        };
        let keys = keyed
            .sample_keys(&q, k, &mut stream_rng(seed, trial))
            .unwrap();
        let crate::words::LabelKind::Random(labels) = rule.kind() else {
            unreachable!()
        };
        assert_eq!(labels.key(&prefix), keys[k]);
        let t: BTreeSet<u32> = rho.levels().iter().collect();
        let fast = keyed.windows_pass(keys[k], 1, 1, 2, &|_, tail| *tail == t);
        assert_eq!(detect_u_event(&rule, &prefix, k, 1, 1).unwrap(), fast);
    }

    #[test]
    fn constructed_windows() {
        use crate::words::LabelKind;
        use std::collections::BTreeMap;
        // labels alternate with depth, so every window of length 2 is {2,3}
        let t = t23();
        let alt = LabelRule::periodic(vec![2, 3]).unwrap();
        let prefix: Word = "1^2.2^3".parse().unwrap();
        assert!(detect_u_event(&alt, &prefix, 2, 1, 1).unwrap());

        // override one window word so its two labels are both 2
        let fallback = alt.clone();
        let mut table = BTreeMap::new();
        let w: Word = "1^2.2^3.1^2.1^3".parse().unwrap();
        table.insert(w.clone(), 2);
        table.insert(w.child(Letter::new(1, 2).unwrap()), 2);
        let broken = LabelRule::explicit(table, fallback).unwrap();
        assert!(matches!(broken.kind(), LabelKind::Explicit { .. }));
        assert_eq!(broken.levels(), &t);
        assert!(!detect_u_event(&broken, &prefix, 2, 1, 1).unwrap());
    }

    #[test]
    fn deterministic_estimates() {
        let rho = LevelDistribution::uniform(&t23());
        let q = WeightSystem::uniform(rho.levels());
        let a = estimate_event_probability(&rho, &q, 1, 1, 2, 2000, 1).unwrap();
        let b = estimate_event_probability(&rho, &q, 1, 1, 2, 2000, 1).unwrap();
        assert_eq!(a, b);
    }
}

//! Finite-depth diagnostics for mutual singularity of `λ_⟨x⟩` and `λ_q`.
//!
//! Two views are offered. The Hellinger affinity `H_m` sums
//! `√(λ_q(Σ_w) λ_⟨x⟩(Σ_w))` over `W̃_m` and is nonincreasing in `m`.
//! The martingale view follows the density ratio `z_n` along sampled paths
//! with the block filtration `𝐁_n = σ(Σ_w : |w| = Mn)` and accumulates
//! `1 − E[√α_n | 𝐁_{n−2}]`. Neither view can prove divergence at finite depth.

use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, ToPrimitive, Zero};
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{GasketError, Result};
use crate::measures::{BoundaryVector, CylinderNode};
use crate::numerics::{int, to_f64, ExactRational};
use crate::random::stream_rng;
use crate::renorm::{corner_energy, level_data};
use crate::words::{children_at, sample_path_with, LabelRule, Letter, WeightSystem, Word};

/// Relative tolerance for comparisons of rooted quantities.
pub const TOLERANCE: f64 = 1e-12;

/// Neumaier-compensated running sum.
#[derive(Clone, Copy, Debug, Default)]
struct Compensated {
    sum: f64,
    carry: f64,
}

impl Compensated {
    fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.carry += (self.sum - t) + x;
        } else {
            self.carry += (x - t) + self.sum;
        }
        self.sum = t;
    }

    fn merge(&mut self, other: Compensated) {
        self.add(other.sum);
        self.add(other.carry);
    }

    fn value(&self) -> f64 {
        self.sum + self.carry
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct AffinitySeries {
    /// `H_0, H_1, …` for every depth that was computed.
    pub h: Vec<f64>,
    /// `|W̃_m|` per depth.
    pub counts: Vec<u64>,
    /// `2Q(x)`, which is 1 on the unit-energy shell.
    pub normalization: String,
    pub requested_depth: usize,
    /// True when the ceiling stopped the series before `requested_depth`.
    pub truncated: bool,
}

impl AffinitySeries {
    pub fn max_depth(&self) -> usize {
        self.h.len() - 1
    }

    /// `H_{m+1} ≤ H_m` up to the relative tolerance.
    pub fn is_nonincreasing(&self) -> bool {
        self.h.windows(2).all(|p| p[1] <= p[0] * (1.0 + TOLERANCE))
    }

    pub fn is_strictly_decreasing_from(&self, start: usize) -> bool {
        self.h[start.min(self.h.len())..]
            .windows(2)
            .all(|p| p[1] < p[0])
    }
}

/// Sizes `|W̃_0|, |W̃_1|, …` up to `max_depth` or until the running total
/// would pass `ceiling`.
fn level_counts(rule: &LabelRule, max_depth: usize, ceiling: u64) -> Vec<u64> {
    let mut counts = vec![1u64];
    let mut total = 1u64;
    let mut frontier = vec![Word::empty()];
    for _ in 0..max_depth {
        let mut next = Vec::new();
        let mut size = 0u64;
        for w in &frontier {
            for l in children_at(rule.label_unchecked(w)) {
                size += 1;
                if total + size > ceiling {
                    return counts;
                }
                next.push(w.child(l));
            }
        }
        total += size;
        counts.push(size);
        frontier = next;
    }
    counts
}

/// Why a tree walk stopped early.
enum Stop {
    Overflow,
    Failed(GasketError),
}

impl From<GasketError> for Stop {
    fn from(e: GasketError) -> Self {
        Stop::Failed(e)
    }
}

/// Per-depth sums of `term` over the tree below `root`, down to `depth`.
///
/// The tree is split at a shallow frontier and each subtree is summed on its
/// own; partial sums are merged in lexicographic order so the result does
/// not depend on scheduling.
fn tree_sums<N, T, E>(
    root: N,
    depth: usize,
    term: T,
    expand: E,
) -> std::result::Result<Vec<Compensated>, Stop>
where
    N: Send,
    T: Fn(&N) -> (usize, f64) + Sync,
    E: Fn(&N) -> std::result::Result<Vec<N>, Stop> + Sync,
{
    fn walk<N, T, E>(
        node: &N,
        depth: usize,
        term: &T,
        expand: &E,
        sums: &mut [Compensated],
    ) -> std::result::Result<(), Stop>
    where
        T: Fn(&N) -> (usize, f64),
        E: Fn(&N) -> std::result::Result<Vec<N>, Stop>,
    {
        let (d, value) = term(node);
        sums[d].add(value);
        if d < depth {
            for child in expand(node)? {
                walk(&child, depth, term, expand, sums)?;
            }
        }
        Ok(())
    }

    let mut head = vec![Compensated::default(); depth + 1];
    let mut frontier = vec![root];
    for _ in 0..depth.min(4) {
        let mut next = Vec::new();
        for node in &frontier {
            let (d, value) = term(node);
            head[d].add(value);
            next.extend(expand(node)?);
        }
        frontier = next;
    }
    let parts: Vec<Vec<Compensated>> = frontier
        .into_par_iter()
        .map(|node| {
            let mut sums = vec![Compensated::default(); depth + 1];
            walk(&node, depth, &term, &expand, &mut sums)?;
            Ok(sums)
        })
        .collect::<std::result::Result<_, Stop>>()?;
    for part in parts {
        for (total, p) in head.iter_mut().zip(part) {
            total.merge(p);
        }
    }
    Ok(head)
}

/// Integer form of one level's data: `A_i = M_i / d`, `r = rn / rd`,
/// `q_v = qn_v / qd`.
struct ScaledLevel {
    mats: Vec<[[i128; 3]; 3]>,
    d: i128,
    rn: i128,
    rd: i128,
    qn: Vec<i128>,
    qd: i128,
}

/// Common denominator of a list of rationals, with the scaled numerators.
fn over_common_denominator<'a>(
    xs: impl Iterator<Item = &'a ExactRational> + Clone,
) -> Option<(Vec<i128>, i128)> {
    let den = xs.clone().fold(BigInt::one(), |acc, x| acc.lcm(x.denom()));
    let nums = xs
        .map(|x| (x.numer() * (&den / x.denom())).to_i128())
        .collect::<Option<Vec<_>>>()?;
    Some((nums, den.to_i128()?))
}

impl ScaledLevel {
    fn new(nu: u32, q: &WeightSystem) -> Result<Option<Self>> {
        let data = level_data(nu)?;
        let entries: Vec<&ExactRational> = data
            .extensions
            .iter()
            .flat_map(|e| e.matrix.entries())
            .collect();
        let Some((flat, d)) = over_common_denominator(entries.iter().copied()) else {
            return Ok(None);
        };
        let mats = flat
            .chunks(9)
            .map(|c| [[c[0], c[1], c[2]], [c[3], c[4], c[5]], [c[6], c[7], c[8]]])
            .collect();
        let weights: Vec<ExactRational> = children_at(nu)
            .into_iter()
            .map(|l| q.weight(l))
            .collect::<Result<_>>()?;
        let Some((qn, qd)) = over_common_denominator(weights.iter()) else {
            return Ok(None);
        };
        let (Some(rn), Some(rd)) = (data.r.numer().to_i128(), data.r.denom().to_i128()) else {
            return Ok(None);
        };
        Ok(Some(ScaledLevel {
            mats,
            d,
            rn,
            rd,
            qn,
            qd,
        }))
    }
}

/// `A_w x = n / d`, `q_w = qn / qd`, `r_w = rn / rd`, all without reduction.
#[derive(Clone)]
struct ScaledNode {
    word: Word,
    n: [i128; 3],
    d: i128,
    qn: i128,
    qd: i128,
    rn: i128,
    rd: i128,
}

impl ScaledNode {
    fn root(x: &BoundaryVector) -> Option<Self> {
        let (n, d) = over_common_denominator(x.values().iter())?;
        Some(ScaledNode {
            word: Word::empty(),
            n: [n[0], n[1], n[2]],
            d,
            qn: 1,
            qd: 1,
            rn: 1,
            rd: 1,
        })
    }

    fn child(&self, letter: Letter, level: &ScaledLevel) -> Option<Self> {
        let m = &level.mats[letter.cell() - 1];
        let mut n = [0i128; 3];
        for (i, row) in m.iter().enumerate() {
            let mut acc = 0i128;
            for (a, b) in row.iter().zip(&self.n) {
                acc = acc.checked_add(a.checked_mul(*b)?)?;
            }
            n[i] = acc;
        }
        Some(ScaledNode {
            word: self.word.child(letter),
            n,
            d: self.d.checked_mul(level.d)?,
            qn: self.qn.checked_mul(level.qn[letter.cell() - 1])?,
            qd: self.qd.checked_mul(level.qd)?,
            rn: self.rn.checked_mul(level.rn)?,
            rd: self.rd.checked_mul(level.rd)?,
        })
    }

    /// `√(q_w · 2 r_w⁻¹ Q(A_w x))`, with the product formed exactly.
    fn term(&self) -> f64 {
        let n = self.n.map(BigInt::from);
        let e: BigInt = [(0, 1), (1, 2), (2, 0)]
            .iter()
            .map(|&(a, b)| {
                let diff = &n[a] - &n[b];
                &diff * &diff
            })
            .sum();
        let d = BigInt::from(self.d);
        let num = BigInt::from(self.qn) * BigInt::from(2) * e * BigInt::from(self.rd);
        let den = BigInt::from(self.qd) * &d * &d * BigInt::from(self.rn);
        to_f64(&ExactRational::new_raw(num, den)).sqrt()
    }
}

fn scaled_sums(
    rule: &LabelRule,
    q: &WeightSystem,
    x: &BoundaryVector,
    depth: usize,
) -> Result<Option<Vec<Compensated>>> {
    let mut tables = BTreeMap::new();
    for nu in rule.levels().iter() {
        match ScaledLevel::new(nu, q)? {
            Some(level) => tables.insert(nu, level),
            None => return Ok(None),
        };
    }
    let Some(root) = ScaledNode::root(x) else {
        return Ok(None);
    };
    let expand = |node: &ScaledNode| {
        let nu = rule.label_unchecked(&node.word);
        let level = &tables[&nu];
        children_at(nu)
            .into_iter()
            .map(|l| node.child(l, level).ok_or(Stop::Overflow))
            .collect()
    };
    match tree_sums(
        root,
        depth,
        |n: &ScaledNode| (n.word.len(), n.term()),
        expand,
    ) {
        Ok(sums) => Ok(Some(sums)),
        Err(Stop::Overflow) => Ok(None),
        Err(Stop::Failed(e)) => Err(e),
    }
}

fn rational_sums(
    rule: &LabelRule,
    q: &WeightSystem,
    x: &BoundaryVector,
    depth: usize,
) -> Result<Vec<Compensated>> {
    let term = |n: &CylinderNode| (n.word.len(), to_f64(&(&n.q_w * n.lambda_energy())).sqrt());
    let expand = |n: &CylinderNode| n.children(rule, q).map_err(Stop::from);
    match tree_sums(CylinderNode::root(x), depth, term, expand) {
        Ok(sums) => Ok(sums),
        Err(Stop::Failed(e)) => Err(e),
        Err(Stop::Overflow) => unreachable!("rational arithmetic does not overflow"),
    }
}

/// `H_m` for `m = 0, …, m_max`, by a single depth-first pass over the
/// admissible tree. Products are exact; only the square root is rounded.
///
/// Node values are carried as 128-bit numerators over unreduced common
/// denominators; if anything overflows the pass is repeated with big
/// rationals.
pub fn hellinger_affinity(
    rule: &LabelRule,
    q: &WeightSystem,
    x: &BoundaryVector,
    m_max: usize,
    ceiling: u64,
) -> Result<AffinitySeries> {
    q.validate(rule.levels())?;
    if !x.in_unit_shell() {
        return Err(GasketError::validation(format!(
            "boundary vector {x} has 2Q(x) = {}, not 1",
            x.total_mass()
        )));
    }
    let counts = level_counts(rule, m_max, ceiling);
    let depth = counts.len() - 1;
    let sums = match scaled_sums(rule, q, x, depth)? {
        Some(sums) => sums,
        None => rational_sums(rule, q, x, depth)?,
    };
    Ok(AffinitySeries {
        h: sums.iter().map(Compensated::value).collect(),
        counts,
        normalization: crate::measures::fraction_text(&x.total_mass()),
        requested_depth: m_max,
        truncated: depth < m_max,
    })
}

/// Reference implementation of [`hellinger_affinity`] using big rationals
/// throughout.
pub fn hellinger_affinity_rational(
    rule: &LabelRule,
    q: &WeightSystem,
    x: &BoundaryVector,
    m_max: usize,
) -> Result<Vec<f64>> {
    Ok(rational_sums(rule, q, x, m_max)?
        .iter()
        .map(Compensated::value)
        .collect())
}

/// `z^⊕`: `1/z` for `z ≠ 0`, else 0.
pub fn oplus(z: &ExactRational) -> ExactRational {
    if z.is_zero() {
        ExactRational::zero()
    } else {
        z.recip()
    }
}

/// Quantities at block boundary `n ≥ 2`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BlockTerm {
    pub n: usize,
    /// `z_n` as `num/den`.
    pub z: String,
    /// `α_n = z_n z_{n−2}^⊕` as `num/den`.
    pub alpha: String,
    /// `E^{λ_q}[√α_n | 𝐁_{n−2}]` at the path's atom.
    pub cond_exp: f64,
    /// `(1/8) Σ_ξ (q_ξ − b_ξ)²`, a lower bound for `1 − cond_exp`
    /// whenever the atom carries energy.
    pub simplex_gap: f64,
    pub term: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct MartingaleTrace {
    pub path: String,
    pub block_length: usize,
    /// `z_0, …, z_N` as `num/den`.
    pub z: Vec<String>,
    pub blocks: Vec<BlockTerm>,
    /// `S_N` for `N = 2, …`.
    pub partial_sums: Vec<f64>,
}

impl MartingaleTrace {
    pub fn final_sum(&self) -> f64 {
        self.partial_sums.last().copied().unwrap_or(0.0)
    }

    pub fn terms_in_unit_interval(&self) -> bool {
        self.blocks
            .iter()
            .all(|b| (-TOLERANCE..=1.0 + TOLERANCE).contains(&b.cond_exp))
    }

    pub fn is_nondecreasing(&self) -> bool {
        self.partial_sums.windows(2).all(|p| p[1] >= p[0])
    }

    pub fn gap_bound_holds(&self) -> bool {
        self.blocks
            .iter()
            .all(|b| b.term + TOLERANCE >= b.simplex_gap)
    }
}

/// `z = λ_⟨x⟩(Σ_w) / λ_q(Σ_w)` for an admissible `w`.
fn density(q: &WeightSystem, x: &BoundaryVector, w: &Word) -> Result<ExactRational> {
    let node = w
        .letters()
        .iter()
        .try_fold(CylinderNode::root(x), |n, &l| n.child(l, q))?;
    Ok(node.lambda_energy() / &node.q_w)
}

/// Conditional expectation of `√α_n` on the atom `Σ_w`, together with the
/// simplex gap, from all admissible `2M`-letter extensions of `w`.
fn block_expectation(
    rule: &LabelRule,
    q: &WeightSystem,
    x: &BoundaryVector,
    w: &Word,
    two_m: usize,
    ceiling: u64,
) -> Result<(f64, f64)> {
    let base = w
        .letters()
        .iter()
        .try_fold(CylinderNode::root(x), |n, &l| n.child(l, q))?;
    let energy = corner_energy(&base.ax);
    if energy.is_zero() {
        return Ok((0.0, 0.0));
    }
    let local = CylinderNode {
        word: base.word.clone(),
        q_w: int(1),
        r_w: int(1),
        ax: base.ax.clone(),
    };
    let mut visited = 0u64;
    let mut sum = Compensated::default();
    let mut gap = ExactRational::zero();
    let mut stack = vec![local];
    while let Some(node) = stack.pop() {
        visited += 1;
        if visited > ceiling {
            return Err(GasketError::validation(format!(
                "two-block extensions exceed the enumeration ceiling {ceiling}; use a smaller block length"
            )));
        }
        if node.word.len() == w.len() + two_m {
            let b = corner_energy(&node.ax) / (&node.r_w * &energy);
            sum.add(to_f64(&(&node.q_w * &b)).sqrt());
            let d = &node.q_w - &b;
            gap += &d * &d;
            continue;
        }
        stack.extend(node.children(rule, q)?);
    }
    Ok((sum.value().min(1.0), to_f64(&gap) / 8.0))
}

/// Block-filtration trace along one path `ω` with `|ω| ≥ M·N`.
pub fn martingale_trace(
    rule: &LabelRule,
    q: &WeightSystem,
    x: &BoundaryVector,
    path: &Word,
    block_length: usize,
    blocks: usize,
    ceiling: u64,
) -> Result<MartingaleTrace> {
    q.validate(rule.levels())?;
    if block_length == 0 {
        return Err(GasketError::validation("block length must be at least 1"));
    }
    if blocks < 2 {
        return Err(GasketError::validation("at least two blocks are needed"));
    }
    if path.len() < block_length * blocks {
        return Err(GasketError::validation(format!(
            "path of length {} is shorter than {blocks} blocks of {block_length}",
            path.len()
        )));
    }
    rule.check_admissible(path)?;
    let z: Vec<ExactRational> = (0..=blocks)
        .map(|n| density(q, x, &path.prefix(block_length * n)))
        .collect::<Result<_>>()?;

    let mut terms = Vec::with_capacity(blocks - 1);
    let mut partial_sums = Vec::with_capacity(blocks - 1);
    let mut running = 0.0;
    for n in 2..=blocks {
        let w = path.prefix(block_length * (n - 2));
        let (cond_exp, simplex_gap) = block_expectation(rule, q, x, &w, 2 * block_length, ceiling)?;
        let alpha = &z[n] * oplus(&z[n - 2]);
        let term = 1.0 - cond_exp;
        running += term;
        partial_sums.push(running);
        terms.push(BlockTerm {
            n,
            z: crate::measures::fraction_text(&z[n]),
            alpha: crate::measures::fraction_text(&alpha),
            cond_exp,
            simplex_gap,
            term,
        });
    }
    Ok(MartingaleTrace {
        path: path.to_string(),
        block_length,
        z: z.iter().map(crate::measures::fraction_text).collect(),
        blocks: terms,
        partial_sums,
    })
}

/// `λ_q`-sampled path for path index `index` under `seed`.
pub fn criterion_path(
    rule: &LabelRule,
    q: &WeightSystem,
    depth: usize,
    seed: u64,
    index: u64,
) -> Result<Word> {
    sample_path_with(rule, q, depth, &mut stream_rng(seed, index))
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PathSummary {
    pub index: u64,
    pub final_sum: f64,
    /// Least-squares slope of `S_N` against `N`.
    pub slope: f64,
    pub terms_in_unit_interval: bool,
    pub nondecreasing: bool,
    pub gap_bound_holds: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CriterionSummary {
    pub paths: Vec<PathSummary>,
    pub min_final_sum: f64,
    pub median_final_sum: f64,
    pub blocks: usize,
    pub block_length: usize,
    pub caveat: &'static str,
}

pub const CAVEAT: &str =
    "finite-horizon growth only: partial sums at finite N cannot establish divergence";

fn slope(ys: &[f64]) -> f64 {
    if ys.len() < 2 {
        return 0.0;
    }
    let n = ys.len() as f64;
    let mean_x = (n - 1.0) / 2.0;
    let mean_y = ys.iter().sum::<f64>() / n;
    let (mut num, mut den) = (0.0, 0.0);
    for (i, y) in ys.iter().enumerate() {
        let dx = i as f64 - mean_x;
        num += dx * (y - mean_y);
        den += dx * dx;
    }
    num / den
}

/// Middle value, or the mean of the two middle values for an even count.
pub fn median(values: &[f64]) -> f64 {
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let n = v.len();
    match n {
        0 => f64::NAN,
        _ if n % 2 == 1 => v[n / 2],
        _ => (v[n / 2 - 1] + v[n / 2]) / 2.0,
    }
}

/// Traces for `num_paths` independent paths, path `i` drawn from stream `i`.
#[allow(clippy::too_many_arguments)]
pub fn criterion_traces(
    rule: &LabelRule,
    q: &WeightSystem,
    x: &BoundaryVector,
    num_paths: u64,
    blocks: usize,
    block_length: usize,
    seed: u64,
    ceiling: u64,
) -> Result<Vec<MartingaleTrace>> {
    (0..num_paths)
        .into_par_iter()
        .map(|i| {
            let path = criterion_path(rule, q, block_length * blocks, seed, i)?;
            martingale_trace(rule, q, x, &path, block_length, blocks, ceiling)
        })
        .collect()
}

#[allow(clippy::too_many_arguments)]
pub fn criterion_summary(
    rule: &LabelRule,
    q: &WeightSystem,
    x: &BoundaryVector,
    num_paths: u64,
    blocks: usize,
    block_length: usize,
    seed: u64,
    ceiling: u64,
) -> Result<CriterionSummary> {
    if num_paths == 0 {
        return Err(GasketError::validation("at least one path is needed"));
    }
    let traces = criterion_traces(rule, q, x, num_paths, blocks, block_length, seed, ceiling)?;
    Ok(summarize(&traces, blocks, block_length))
}

pub fn summarize(
    traces: &[MartingaleTrace],
    blocks: usize,
    block_length: usize,
) -> CriterionSummary {
    let paths: Vec<PathSummary> = traces
        .iter()
        .enumerate()
        .map(|(i, t)| PathSummary {
            index: i as u64,
            final_sum: t.final_sum(),
            slope: slope(&t.partial_sums),
            terms_in_unit_interval: t.terms_in_unit_interval(),
            nondecreasing: t.is_nondecreasing(),
            gap_bound_holds: t.gap_bound_holds(),
        })
        .collect();
    let finals: Vec<f64> = paths.iter().map(|p| p.final_sum).collect();
    CriterionSummary {
        min_final_sum: finals.iter().copied().fold(f64::INFINITY, f64::min),
        median_final_sum: median(&finals),
        paths,
        blocks,
        block_length,
        caveat: CAVEAT,
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct GapBound {
    pub applies: bool,
    /// `(1 − e^{−a}) max(s, t)`.
    pub bound: f64,
    /// `|t − s| ≥ bound` (vacuously true when the bound does not apply).
    pub holds: bool,
}

/// If `|log(t/s)| ≥ a` then `|t − s| ≥ (1 − e^{−a}) max(s, t)`.
pub fn gap_bound(s: f64, t: f64, a: f64) -> Result<GapBound> {
    if !(s > 0.0 && t > 0.0 && a > 0.0) || !(s.is_finite() && t.is_finite() && a.is_finite()) {
        return Err(GasketError::validation(format!(
            "gap bound needs positive finite inputs, got s = {s}, t = {t}, a = {a}"
        )));
    }
    let applies = (t / s).ln().abs() >= a * (1.0 - TOLERANCE);
    let bound = (1.0 - (-a).exp()) * s.max(t);
    let holds = !applies || (t - s).abs() >= bound * (1.0 - TOLERANCE);
    Ok(GapBound {
        applies,
        bound,
        holds,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct AffinityBound {
    /// `Σ √(a_k b_k)`.
    pub lhs: f64,
    /// `1 − |a − b|² / 8`.
    pub rhs: f64,
    pub holds: bool,
}

fn check_simplex(v: &[f64], name: &str) -> Result<()> {
    if v.iter().any(|x| !x.is_finite() || *x < 0.0) {
        return Err(GasketError::validation(format!(
            "{name} has a negative entry"
        )));
    }
    let total: f64 = v.iter().sum();
    if (total - 1.0).abs() > 1e-9 {
        return Err(GasketError::validation(format!(
            "{name} sums to {total}, not 1"
        )));
    }
    Ok(())
}

pub fn affinity_upper_bound(a: &[f64], b: &[f64]) -> Result<AffinityBound> {
    if a.len() != b.len() || a.is_empty() {
        return Err(GasketError::Dimension(format!(
            "probability vectors of lengths {} and {}",
            a.len(),
            b.len()
        )));
    }
    check_simplex(a, "a")?;
    check_simplex(b, "b")?;
    let lhs: f64 = a.iter().zip(b).map(|(x, y)| (x * y).sqrt()).sum();
    let dist2: f64 = a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum();
    let rhs = 1.0 - dist2 / 8.0;
    Ok(AffinityBound {
        lhs,
        rhs,
        holds: lhs <= rhs + TOLERANCE,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::rat;
    use crate::words::LevelSet;

    fn half() -> BoundaryVector {
        BoundaryVector::new([rat(1, 2), int(0), int(0)])
    }

    #[test]
    fn depth_zero_is_one() {
        let rule = LabelRule::constant(2).unwrap();
        let q = WeightSystem::uniform(rule.levels());
        let s = hellinger_affinity(&rule, &q, &half(), 0, 100).unwrap();
        assert_eq!(s.h, vec![1.0]);
    }

    #[test]
    fn depth_one_by_hand() {
        let rule = LabelRule::constant(2).unwrap();
        let q = WeightSystem::uniform(rule.levels());
        let s = hellinger_affinity(&rule, &q, &half(), 3, 1000).unwrap();
        let expected = (0.6f64 / 3.0).sqrt() + 2.0 * (0.2f64 / 3.0).sqrt();
        assert!((s.h[1] - expected).abs() < 1e-15);
        assert!(s.is_nonincreasing());
        assert_eq!(s.counts, vec![1, 3, 9, 27]);
    }

    #[test]
    fn matched_weights_give_unit_affinity() {
        let t = LevelSet::new([2]).unwrap();
        let rule = LabelRule::constant(2).unwrap();
        let q = WeightSystem::from_levels([(2, vec![rat(3, 5), rat(1, 5), rat(1, 5)])]).unwrap();
        q.validate(&t).unwrap();
        let s = hellinger_affinity(&rule, &q, &half(), 1, 100).unwrap();
        assert!((s.h[1] - 1.0).abs() < 1e-15);
    }

    #[test]
    fn scaled_pass_matches_rationals() {
        let rule = LabelRule::periodic(vec![2, 3]).unwrap();
        let q = WeightSystem::uniform(rule.levels());
        let x = BoundaryVector::on_unit_energy_shell(&rat(1, 3), &rat(2, 7));
        let fast = hellinger_affinity(&rule, &q, &x, 5, 1_000_000).unwrap();
        let slow = hellinger_affinity_rational(&rule, &q, &x, 5).unwrap();
        for (a, b) in fast.h.iter().zip(&slow) {
            assert!((a - b).abs() <= 1e-14, "{a} vs {b}");
        }
    }

    #[test]
    fn truncation_flag() {
        let rule = LabelRule::constant(2).unwrap();
        let q = WeightSystem::uniform(rule.levels());
        let s = hellinger_affinity(&rule, &q, &half(), 5, 13).unwrap();
        assert!(s.truncated);
        assert_eq!(s.max_depth(), 2);
    }

    #[test]
    fn off_shell_rejected() {
        let rule = LabelRule::constant(2).unwrap();
        let q = WeightSystem::uniform(rule.levels());
        assert!(hellinger_affinity(&rule, &q, &BoundaryVector::from_i64(1, 0, 0), 2, 100).is_err());
    }

    #[test]
    fn constant_vector_terms_are_one() {
        let rule = LabelRule::constant(2).unwrap();
        let q = WeightSystem::uniform(rule.levels());
        let x = BoundaryVector::from_i64(1, 1, 1);
        let s = criterion_summary(&rule, &q, &x, 4, 6, 1, 3, 1000).unwrap();
        assert!(s.paths.iter().all(|p| p.final_sum == 5.0));
    }

    #[test]
    fn harmonic_trace_properties() {
        let rule = LabelRule::constant(2).unwrap();
        let q = WeightSystem::uniform(rule.levels());
        let path = criterion_path(&rule, &q, 10, 42, 0).unwrap();
        let t = martingale_trace(&rule, &q, &half(), &path, 1, 10, 1000).unwrap();
        assert!(t.terms_in_unit_interval());
        assert!(t.is_nondecreasing());
        assert!(t.gap_bound_holds());
        assert!(t.final_sum() > 0.0);
        assert_eq!(t.partial_sums.len(), 9);
    }

    #[test]
    fn trace_rejects_short_path() {
        let rule = LabelRule::constant(2).unwrap();
        let q = WeightSystem::uniform(rule.levels());
        let path = criterion_path(&rule, &q, 3, 1, 0).unwrap();
        assert!(martingale_trace(&rule, &q, &half(), &path, 1, 4, 1000).is_err());
    }

    #[test]
    fn gap_bound_cases() {
        let e = std::f64::consts::E;
        let g = gap_bound(1.0, e, 1.0).unwrap();
        assert!(g.applies && g.holds);
        assert!((g.bound - (e - 1.0)).abs() < 1e-12);
        assert!(!gap_bound(2.0, 2.0, 0.5).unwrap().applies);
        let g = gap_bound(1.0, 4.0, 2f64.ln()).unwrap();
        assert!(g.applies && g.holds);
        assert!((g.bound - 2.0).abs() < 1e-12);
        assert!(gap_bound(0.0, 1.0, 1.0).is_err());
    }

    #[test]
    fn affinity_bound_cases() {
        let same = affinity_upper_bound(&[0.5, 0.5], &[0.5, 0.5]).unwrap();
        assert!((same.lhs - 1.0).abs() < 1e-15 && same.rhs == 1.0);
        let far = affinity_upper_bound(&[1.0, 0.0], &[0.0, 1.0]).unwrap();
        assert_eq!((far.lhs, far.rhs), (0.0, 0.75));
        assert!(affinity_upper_bound(&[0.5, 0.6], &[0.5, 0.5]).is_err());
        assert!(affinity_upper_bound(&[1.0], &[0.5, 0.5]).is_err());
    }

    #[test]
    fn median_of_even_count() {
        assert_eq!(median(&[4.0, 1.0, 3.0, 2.0]), 2.5);
        assert_eq!(median(&[3.0, 1.0, 2.0]), 2.0);
    }
}

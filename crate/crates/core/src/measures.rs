//! Cylinder values of the reference measure `λ_q` and of energy measures.
//!
//! For a harmonic function with boundary values `x`, the energy measure of the
//! cylinder `Σ_w` is `2 r_w⁻¹ Q(A_w x)`. Piecewise harmonic data reduce to the
//! same formula in the environment shifted by the base word.

use std::collections::BTreeMap;
use std::fmt;
use std::io::{self, Write};

use num_traits::{One, Zero};
use serde::Serialize;

use crate::error::{GasketError, Result};
use crate::geometry::{cells, map_with_base, BaryPoint};
use crate::numerics::{int, ExactRational, RationalMatrix};
use crate::renorm::{corner_energy, extension_for, level_data, Triple};
use crate::words::{LabelRule, Letter, WeightSystem, Word};

/// Function values at `p₁, p₂, p₃`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct BoundaryVector(Triple);

impl BoundaryVector {
    pub fn new(values: Triple) -> Self {
        BoundaryVector(values)
    }

    pub fn from_i64(a: i64, b: i64, c: i64) -> Self {
        BoundaryVector([int(a), int(b), int(c)])
    }

    pub fn values(&self) -> &Triple {
        &self.0
    }

    pub fn into_values(self) -> Triple {
        self.0
    }

    /// `Q(x)`.
    pub fn energy(&self) -> ExactRational {
        corner_energy(&self.0)
    }

    /// Total energy mass `2Q(x)`.
    pub fn total_mass(&self) -> ExactRational {
        int(2) * self.energy()
    }

    /// Membership in `𝒦 = {2Q(x) = 1}`.
    pub fn in_unit_shell(&self) -> bool {
        self.total_mass().is_one()
    }

    pub fn is_constant(&self) -> bool {
        self.0[0] == self.0[1] && self.0[1] == self.0[2]
    }

    /// Rescales to `𝒦`, provided the square root of `2Q(x)` is rational.
    pub fn normalized(&self) -> Result<Self> {
        let mass = self.total_mass();
        if mass.is_zero() {
            return Err(GasketError::validation(
                "a constant vector cannot be normalized",
            ));
        }
        let root = rational_sqrt(&mass).ok_or_else(|| {
            GasketError::validation(format!("2Q({self}) = {mass} has no rational square root"))
        })?;
        Ok(BoundaryVector(self.0.clone().map(|v| v / &root)))
    }

    /// Rational point of `𝒦` parametrized by `t` and the constant offset `c`:
    /// `a v₁ + b y₁ + c𝟏` with `a = (1 − 12t²)/(1 + 12t²)`, `b = 2t/(1 + 12t²)`.
    pub fn on_unit_energy_shell(t: &ExactRational, c: &ExactRational) -> Self {
        let den = int(1) + int(12) * t * t;
        let a = (int(1) - int(12) * t * t) / &den;
        let b = int(2) * t / &den;
        let half_a = a / int(2);
        BoundaryVector([c.clone(), &half_a + &b + c, half_a - b + c])
    }
}

fn rational_sqrt(x: &ExactRational) -> Option<ExactRational> {
    let n = x.numer().sqrt();
    let d = x.denom().sqrt();
    (&n * &n == *x.numer() && &d * &d == *x.denom()).then(|| ExactRational::new(n, d))
}

impl fmt::Display for BoundaryVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({},{},{})", self.0[0], self.0[1], self.0[2])
    }
}

/// `A_w = A_{w_m} ⋯ A_{w_1}`; the identity for the empty word.
pub fn word_matrix(w: &Word) -> Result<RationalMatrix> {
    w.letters()
        .iter()
        .try_fold(RationalMatrix::identity(3), |acc, &l| {
            extension_for(l)?.matrix.mul(&acc)
        })
}

/// `A_w x`, applying letters in order.
pub fn apply_word(w: &Word, x: &Triple) -> Result<Triple> {
    w.letters()
        .iter()
        .try_fold(x.clone(), |acc, &l| Ok(extension_for(l)?.apply(&acc)))
}

/// `r_w = r^(ν_1) ⋯ r^(ν_m)` where `ν_k` is the level of the `k`-th letter.
pub fn word_resistance(w: &Word) -> Result<ExactRational> {
    w.letters().iter().try_fold(ExactRational::one(), |acc, l| {
        Ok(acc * &level_data(l.level())?.r)
    })
}

/// `λ_q(Σ_w)`: `q_w` on admissible words, 0 otherwise.
pub fn reference_cylinder(rule: &LabelRule, q: &WeightSystem, w: &Word) -> Result<ExactRational> {
    if !rule.is_admissible(w) {
        return Ok(ExactRational::zero());
    }
    q.word_weight(w)
}

/// `λ_⟨x⟩(Σ_w) = 2 r_w⁻¹ Q(A_w x)` on admissible words, 0 otherwise.
pub fn energy_cylinder(rule: &LabelRule, x: &BoundaryVector, w: &Word) -> Result<ExactRational> {
    if !rule.is_admissible(w) {
        return Ok(ExactRational::zero());
    }
    scaled_energy(w, x.values()).map(|v| int(2) * v)
}

/// `r_w⁻¹ Q(A_w x)`.
fn scaled_energy(w: &Word, x: &Triple) -> Result<ExactRational> {
    Ok(corner_energy(&apply_word(w, x)?) / word_resistance(w)?)
}

/// Checks `r_ξ⁻¹Q(A_ξx) = Σ_{|ζ|=m} r_{ξζ}⁻¹Q(A_{ξζ}x)` over admissible
/// extensions, exactly.
pub fn verify_decomposition(
    rule: &LabelRule,
    x: &BoundaryVector,
    xi: &Word,
    m: usize,
) -> Result<bool> {
    rule.check_admissible(xi)?;
    let lhs = scaled_energy(xi, x.values())?;
    let base = apply_word(xi, x.values())?;
    let r_xi = word_resistance(xi)?;
    let mut rhs = ExactRational::zero();
    let mut stack = vec![(xi.clone(), base, r_xi)];
    while let Some((w, ax, rw)) = stack.pop() {
        if w.len() == xi.len() + m {
            rhs += corner_energy(&ax) / rw;
            continue;
        }
        for letter in rule.admissible_children(&w)? {
            let data = level_data(letter.level())?;
            let next = data.extensions[letter.cell() - 1].apply(&ax);
            stack.push((w.child(letter), next, &rw * &data.r));
        }
    }
    Ok(lhs == rhs)
}

/// State carried down the admissible tree: the word, its weight and
/// resistance products, and `A_w x`.
#[derive(Clone, Debug)]
pub struct CylinderNode {
    pub word: Word,
    pub q_w: ExactRational,
    pub r_w: ExactRational,
    pub ax: Triple,
}

impl CylinderNode {
    pub fn root(x: &BoundaryVector) -> Self {
        CylinderNode {
            word: Word::empty(),
            q_w: ExactRational::one(),
            r_w: ExactRational::one(),
            ax: x.values().clone(),
        }
    }

    pub fn child(&self, letter: Letter, q: &WeightSystem) -> Result<Self> {
        let data = level_data(letter.level())?;
        Ok(CylinderNode {
            word: self.word.child(letter),
            q_w: &self.q_w * q.weight(letter)?,
            r_w: &self.r_w * &data.r,
            ax: data.extensions[letter.cell() - 1].apply(&self.ax),
        })
    }

    pub fn children(&self, rule: &LabelRule, q: &WeightSystem) -> Result<Vec<Self>> {
        let nu = rule.label_unchecked(&self.word);
        crate::words::children_at(nu)
            .into_iter()
            .map(|l| self.child(l, q))
            .collect()
    }

    /// `λ_⟨x⟩(Σ_w)`.
    pub fn lambda_energy(&self) -> ExactRational {
        int(2) * corner_energy(&self.ax) / &self.r_w
    }
}

/// One row of a cylinder table.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CylinderReport {
    pub word: Word,
    pub q_w: ExactRational,
    pub r_w: ExactRational,
    /// `Q(A_w x)`.
    pub energy_raw: ExactRational,
    pub lambda_q: ExactRational,
    pub lambda_energy: ExactRational,
    /// `λ_⟨x⟩ / λ_q`; `None` only when `λ_q` vanishes.
    pub ratio: Option<ExactRational>,
}

/// Same fields with rationals rendered as `num/den` text.
#[derive(Serialize)]
pub struct CylinderRecord {
    pub word: String,
    pub q_w: String,
    pub r_w: String,
    pub lambda_q: String,
    pub lambda_energy: String,
    pub ratio: String,
}

/// Rational as `num/den`, with `/1` kept so the column format is uniform.
pub fn fraction_text(x: &ExactRational) -> String {
    format!("{}/{}", x.numer(), x.denom())
}

impl CylinderReport {
    fn from_node(node: &CylinderNode) -> Self {
        let energy_raw = corner_energy(&node.ax);
        let lambda_energy = int(2) * &energy_raw / &node.r_w;
        let ratio = (!node.q_w.is_zero()).then(|| &lambda_energy / &node.q_w);
        CylinderReport {
            word: node.word.clone(),
            q_w: node.q_w.clone(),
            r_w: node.r_w.clone(),
            energy_raw,
            lambda_q: node.q_w.clone(),
            lambda_energy,
            ratio,
        }
    }

    pub fn record(&self) -> CylinderRecord {
        CylinderRecord {
            word: self.word.to_string(),
            q_w: fraction_text(&self.q_w),
            r_w: fraction_text(&self.r_w),
            lambda_q: fraction_text(&self.lambda_q),
            lambda_energy: fraction_text(&self.lambda_energy),
            ratio: self
                .ratio
                .as_ref()
                .map_or_else(|| "-".into(), fraction_text),
        }
    }
}

pub const TSV_HEADER: &str = "word\tq_w\tr_w\tlambda_q\tlambda_energy\tratio";

/// Rows for every `w ∈ W̃_depth`, in lexicographic order.
pub fn cylinder_reports(
    rule: &LabelRule,
    q: &WeightSystem,
    x: &BoundaryVector,
    depth: usize,
    ceiling: u64,
) -> Result<Vec<CylinderReport>> {
    q.validate(rule.levels())?;
    let mut out = Vec::new();
    let mut visited = 0u64;
    let mut stack = vec![CylinderNode::root(x)];
    while let Some(node) = stack.pop() {
        visited += 1;
        if visited > ceiling {
            return Err(GasketError::CeilingExceeded { ceiling });
        }
        if node.word.len() == depth {
            out.push(CylinderReport::from_node(&node));
            continue;
        }
        let mut kids = node.children(rule, q)?;
        kids.reverse();
        stack.extend(kids);
    }
    Ok(out)
}

pub fn write_tsv(rows: &[CylinderReport], out: &mut (impl Write + ?Sized)) -> io::Result<()> {
    writeln!(out, "{TSV_HEADER}")?;
    for row in rows {
        let r = row.record();
        writeln!(
            out,
            "{}\t{}\t{}\t{}\t{}\t{}",
            r.word, r.q_w, r.r_w, r.lambda_q, r.lambda_energy, r.ratio
        )?;
    }
    Ok(())
}

/// An `m`-harmonic function given by its corner values on each cell
/// `K_v`, `v ∈ W̃_m`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PiecewiseHarmonicSpec {
    base_depth: usize,
    values: BTreeMap<Word, BoundaryVector>,
}

/// `ψ_w(p_a)` as an exact plane point.
pub fn word_point(w: &Word, corner: usize) -> Result<BaryPoint> {
    let mut p = BaryPoint::corner(corner);
    for l in w.letters().iter().rev() {
        let base = cells(l.level())?[l.cell() - 1].base;
        p = map_with_base(l.level(), base, &p);
    }
    Ok(p)
}

impl PiecewiseHarmonicSpec {
    /// Validates coverage of `W̃_m` and agreement at shared vertices.
    pub fn new(
        rule: &LabelRule,
        base_depth: usize,
        values: BTreeMap<Word, BoundaryVector>,
    ) -> Result<Self> {
        let words: Vec<Word> = rule.enumerate(base_depth).collect::<Result<_>>()?;
        if words.len() != values.len() || words.iter().any(|w| !values.contains_key(w)) {
            return Err(GasketError::validation(format!(
                "piecewise data must list exactly the {} admissible words of length {base_depth}",
                words.len()
            )));
        }
        let mut seen: BTreeMap<BaryPoint, (Word, ExactRational)> = BTreeMap::new();
        for (w, vals) in &values {
            for (a, val) in vals.values().iter().enumerate() {
                let p = word_point(w, a + 1)?;
                match seen.get(&p) {
                    Some((first, prior)) if prior != val => {
                        return Err(GasketError::InconsistentVertex {
                            vertex: p.to_string(),
                            first: format!("{prior} on {first}"),
                            second: format!("{val} on {w}"),
                        });
                    }
                    Some(_) => {}
                    None => {
                        seen.insert(p, (w.clone(), val.clone()));
                    }
                }
            }
        }
        Ok(PiecewiseHarmonicSpec { base_depth, values })
    }

    /// The harmonic function `ι(x)` described at depth `m`.
    pub fn harmonic(rule: &LabelRule, x: &BoundaryVector, m: usize) -> Result<Self> {
        let mut values = BTreeMap::new();
        for w in rule.enumerate(m) {
            let w = w?;
            let ax = apply_word(&w, x.values())?;
            values.insert(w, BoundaryVector(ax));
        }
        Self::new(rule, m, values)
    }

    /// Samples a vertex function on `V_m`.
    pub fn from_vertex_values(
        rule: &LabelRule,
        m: usize,
        f: impl Fn(&BaryPoint) -> ExactRational,
    ) -> Result<Self> {
        let mut values = BTreeMap::new();
        for w in rule.enumerate(m) {
            let w = w?;
            let vals = [1, 2, 3]
                .map(|a| word_point(&w, a).map(|p| f(&p)))
                .into_iter()
                .collect::<Result<Vec<_>>>()?;
            let [a, b, c]: [ExactRational; 3] = vals.try_into().expect("three corners");
            values.insert(w, BoundaryVector([a, b, c]));
        }
        Self::new(rule, m, values)
    }

    pub fn base_depth(&self) -> usize {
        self.base_depth
    }

    pub fn values(&self) -> &BTreeMap<Word, BoundaryVector> {
        &self.values
    }
}

/// `λ_⟨f⟩(Σ_w)` for `|w| ≥ m`: `2 r_w⁻¹ Q(A_ζ f_v)` where `w = vζ`, `|v| = m`.
pub fn piecewise_energy_cylinder(
    rule: &LabelRule,
    f: &PiecewiseHarmonicSpec,
    w: &Word,
) -> Result<ExactRational> {
    let m = f.base_depth;
    if w.len() < m {
        return Err(GasketError::validation(format!(
            "word {w} is shorter than the base depth {m}"
        )));
    }
    if !rule.is_admissible(w) {
        return Ok(ExactRational::zero());
    }
    let v = w.prefix(m);
    let fv = f
        .values
        .get(&v)
        .ok_or_else(|| GasketError::validation(format!("no piecewise data for {v}")))?;
    let tail = Word::from_letters(w.letters()[m..].to_vec());
    let e = corner_energy(&apply_word(&tail, fv.values())?);
    Ok(int(2) * e / word_resistance(w)?)
}

/// `ℰ^(m)(f) = Σ_{v ∈ W̃_m} r_v⁻¹ Q(f ∘ ψ_v |_{V₀})`.
pub fn finite_level_energy(f: &PiecewiseHarmonicSpec) -> Result<ExactRational> {
    f.values
        .iter()
        .try_fold(ExactRational::zero(), |acc, (v, vals)| {
            Ok(acc + vals.energy() / word_resistance(v)?)
        })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::rat;

    fn w(s: &str) -> Word {
        s.parse().unwrap()
    }

    fn sg2() -> LabelRule {
        LabelRule::constant(2).unwrap()
    }

    #[test]
    fn empty_word_matrix_is_identity() {
        assert_eq!(
            word_matrix(&Word::empty()).unwrap(),
            RationalMatrix::identity(3)
        );
    }

    #[test]
    fn word_matrix_order() {
        let u = w("1^2.2^3");
        let v = w("3^2.4^3");
        let lhs = word_matrix(&u.concat(&v)).unwrap();
        let rhs = word_matrix(&v)
            .unwrap()
            .mul(&word_matrix(&u).unwrap())
            .unwrap();
        assert_eq!(lhs, rhs);
        let a1 = extension_for(Letter::new(1, 2).unwrap()).unwrap().matrix;
        let a2 = extension_for(Letter::new(2, 2).unwrap()).unwrap().matrix;
        assert_eq!(word_matrix(&w("1^2.2^2")).unwrap(), a2.mul(&a1).unwrap());
    }

    #[test]
    fn reference_values() {
        let rule = sg2();
        let q = WeightSystem::uniform(rule.levels());
        assert_eq!(
            reference_cylinder(&rule, &q, &w("1^2.2^2.3^2.1^2")).unwrap(),
            rat(1, 81)
        );
        assert_eq!(reference_cylinder(&rule, &q, &w("1^3")).unwrap(), int(0));
    }

    #[test]
    fn energy_values() {
        let rule = sg2();
        let x = BoundaryVector::from_i64(1, 0, 0);
        // A_1 x = (1, 2/5, 2/5), Q = 18/25, times 2 · 5/3
        assert_eq!(energy_cylinder(&rule, &x, &w("1^2")).unwrap(), rat(12, 5));
        let half = BoundaryVector::new([rat(1, 2), int(0), int(0)]);
        assert!(half.in_unit_shell());
        assert_eq!(
            energy_cylinder(&rule, &half, &Word::empty()).unwrap(),
            int(1)
        );
        let flat = BoundaryVector::from_i64(3, 3, 3);
        assert_eq!(
            energy_cylinder(&rule, &flat, &w("2^2.3^2")).unwrap(),
            int(0)
        );
    }

    #[test]
    fn shell_points() {
        for (n, d) in [(0, 1), (1, 3), (-7, 2), (5, 11)] {
            let x = BoundaryVector::on_unit_energy_shell(&rat(n, d), &rat(2, 7));
            assert!(x.in_unit_shell(), "{x}");
        }
    }

    #[test]
    fn normalization() {
        let x = BoundaryVector::from_i64(1, 0, 0).normalized().unwrap();
        assert_eq!(x, BoundaryVector::new([rat(1, 2), int(0), int(0)]));
        assert!(BoundaryVector::from_i64(1, 1, 0).normalized().is_ok());
        assert!(BoundaryVector::from_i64(1, 2, 0).normalized().is_err());
    }

    #[test]
    fn decomposition_level_one() {
        let x = BoundaryVector::from_i64(3, -1, 2);
        assert!(verify_decomposition(&sg2(), &x, &Word::empty(), 1).unwrap());
        assert!(verify_decomposition(&sg2(), &x, &w("2^2"), 0).unwrap());
        let alt = LabelRule::periodic(vec![2, 3]).unwrap();
        assert!(verify_decomposition(&alt, &x, &w("3^2"), 3).unwrap());
    }

    #[test]
    fn report_fields() {
        let rule = sg2();
        let q = WeightSystem::uniform(rule.levels());
        let x = BoundaryVector::new([rat(1, 2), int(0), int(0)]);
        let rows = cylinder_reports(&rule, &q, &x, 1, 100).unwrap();
        assert_eq!(rows.len(), 3);
        assert_eq!(rows[0].lambda_energy, rat(3, 5));
        assert_eq!(rows[0].ratio, Some(rat(9, 5)));
        let mut buf = Vec::new();
        write_tsv(&rows, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.starts_with(TSV_HEADER));
        assert!(text.contains("1^2\t1/3\t3/5\t1/3\t3/5\t9/5"));
    }

    #[test]
    fn harmonic_energy_is_level_independent() {
        let rule = sg2();
        let x = BoundaryVector::new([int(1), int(0), rat(1, 2)]);
        let f0 = PiecewiseHarmonicSpec::harmonic(&rule, &x, 0).unwrap();
        assert_eq!(finite_level_energy(&f0).unwrap(), rat(3, 2));
        let f1 = PiecewiseHarmonicSpec::harmonic(&rule, &x, 1).unwrap();
        assert_eq!(finite_level_energy(&f1).unwrap(), rat(3, 2));
    }

    #[test]
    fn perturbed_data_has_more_energy() {
        let rule = sg2();
        let x = BoundaryVector::new([int(1), int(0), rat(1, 2)]);
        let harmonic = PiecewiseHarmonicSpec::harmonic(&rule, &x, 1).unwrap();
        let mid = word_point(&w("1^2"), 2).unwrap();
        let bumped = PiecewiseHarmonicSpec::from_vertex_values(&rule, 1, |p| {
            let base = harmonic_value(&harmonic, p);
            if *p == mid {
                base + rat(1, 10)
            } else {
                base
            }
        })
        .unwrap();
        assert!(finite_level_energy(&bumped).unwrap() > rat(3, 2));
    }

    fn harmonic_value(f: &PiecewiseHarmonicSpec, p: &BaryPoint) -> ExactRational {
        for (v, vals) in f.values() {
            for a in 1..=3 {
                if word_point(v, a).unwrap() == *p {
                    return vals.values()[a - 1].clone();
                }
            }
        }
        panic!("vertex {p} not found")
    }

    #[test]
    fn inconsistent_data_names_vertex() {
        let rule = sg2();
        let mut values = BTreeMap::new();
        for (i, l) in ["1^2", "2^2", "3^2"].iter().enumerate() {
            values.insert(w(l), BoundaryVector::from_i64(i as i64, 0, 0));
        }
        let err = PiecewiseHarmonicSpec::new(&rule, 1, values).unwrap_err();
        assert!(
            matches!(err, GasketError::InconsistentVertex { .. }),
            "{err}"
        );
    }

    #[test]
    fn piecewise_matches_harmonic() {
        let rule = LabelRule::periodic(vec![2, 3]).unwrap();
        let x = BoundaryVector::new([rat(1, 3), rat(-2, 7), int(1)]);
        let f = PiecewiseHarmonicSpec::harmonic(&rule, &x, 2).unwrap();
        for word in rule.enumerate(3) {
            let word = word.unwrap();
            assert_eq!(
                piecewise_energy_cylinder(&rule, &f, &word).unwrap(),
                energy_cylinder(&rule, &x, &word).unwrap()
            );
        }
    }
}

//! Renormalization data of the level-ν gasket.
//!
//! For each level the trace of the unit-weight level-1 network onto the three
//! corners is `r^(ν) · Q`; the minimizing extension restricted to each cell
//! gives the harmonic extension matrices `A_i^(ν)`. Results are computed once
//! per level and shared through an immutable cache.

use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};

use num_traits::{One, Signed, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{GasketError, Result};
use crate::geometry::{build_level_one_network, cell_count, LevelOneNetwork};
use crate::measures::BoundaryVector;
use crate::numerics::{dot, int, rat, schur_decomposition, to_f64, ExactRational, RationalMatrix};
use crate::words::{Letter, LevelSet, WeightSystem};

/// Values on the three corners `p₁, p₂, p₃`.
pub type Triple = [ExactRational; 3];

/// The corner operator `D`: −2 on the diagonal, 1 elsewhere.
pub fn corner_operator() -> RationalMatrix {
    RationalMatrix::from_i64(&[&[-2, 1, 1], &[1, -2, 1], &[1, 1, -2]])
}

/// Symmetric quadratic form on functions on the three corners.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CornerForm {
    pub matrix: RationalMatrix,
}

impl CornerForm {
    /// `Q(x, y) = (−Dx, y)`.
    pub fn standard() -> Self {
        CornerForm {
            matrix: corner_operator().scale(&int(-1)),
        }
    }

    pub fn eval(&self, x: &Triple) -> ExactRational {
        self.matrix.quadratic_form(x).expect("3x3 form")
    }

    pub fn bilinear(&self, x: &Triple, y: &Triple) -> ExactRational {
        dot(&self.matrix.mul_vec(x).expect("3x3 form"), y)
    }

    /// Row sums vanish, so constants carry no energy.
    pub fn kills_constants(&self) -> bool {
        (0..3).all(|i| self.matrix.row(i).iter().sum::<ExactRational>().is_zero())
    }
}

/// `Q(x) = Σ_{pairs} (x(p_a) − x(p_b))²`.
pub fn corner_energy(x: &Triple) -> ExactRational {
    let d12 = &x[0] - &x[1];
    let d23 = &x[1] - &x[2];
    let d31 = &x[2] - &x[0];
    &d12 * &d12 + &d23 * &d23 + &d31 * &d31
}

/// `A_i^(ν)`: boundary values to the harmonic extension's values on the
/// corners of cell `i`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ExtensionMatrix {
    pub level: u32,
    pub cell: usize,
    pub matrix: RationalMatrix,
}

impl ExtensionMatrix {
    pub fn apply(&self, x: &Triple) -> Triple {
        let m = &self.matrix;
        [0, 1, 2].map(|i| &m[(i, 0)] * &x[0] + &m[(i, 1)] * &x[1] + &m[(i, 2)] * &x[2])
    }
}

/// Eigenstructure of the corner-cell extension matrices at one level.
#[derive(Clone, Debug)]
pub struct SpectralData {
    pub level: u32,
    pub r: ExactRational,
    /// Third eigenvalue, `trace(A_i) − 1 − r`.
    pub s: ExactRational,
    /// `ṽ_i`, eigenvector of `A_i` for `r`.
    pub v_tilde: [Triple; 3],
    /// `y_i`, eigenvector of `A_i` for `s`.
    pub y: [Triple; 3],
    /// `u_i = (D_{p, p_i})_p`, eigenvector of `ᵀA_i` for `r`.
    pub u: [Triple; 3],
    /// `v_i = ṽ_i / (u_i, ṽ_i)`.
    pub v: [Triple; 3],
}

/// Everything computed for one level.
#[derive(Debug)]
pub struct LevelData {
    pub level: u32,
    pub network: LevelOneNetwork,
    pub r: ExactRational,
    pub extensions: Vec<ExtensionMatrix>,
    pub spectral: SpectralData,
}

type Slot = Arc<OnceLock<std::result::Result<Arc<LevelData>, String>>>;

fn cache() -> &'static Mutex<HashMap<u32, Slot>> {
    static CACHE: OnceLock<Mutex<HashMap<u32, Slot>>> = OnceLock::new();
    CACHE.get_or_init(Default::default)
}

/// Cached renormalization data for level ν (computed on first use).
pub fn level_data(nu: u32) -> Result<Arc<LevelData>> {
    if nu < 2 {
        return Err(GasketError::validation(format!(
            "level must be at least 2, got {nu}"
        )));
    }
    let slot = {
        let mut map = cache().lock().expect("renorm cache poisoned");
        map.entry(nu).or_default().clone()
    };
    match slot.get_or_init(|| compute_level(nu).map(Arc::new).map_err(|e| e.to_string())) {
        Ok(data) => Ok(data.clone()),
        Err(msg) => Err(GasketError::consistency(msg.clone())),
    }
}

#[cfg(test)]
fn basis(i: usize) -> Triple {
    let mut e = [
        ExactRational::zero(),
        ExactRational::zero(),
        ExactRational::zero(),
    ];
    e[i] = ExactRational::one();
    e
}

fn triple(a: i64, b: i64, c: i64) -> Triple {
    [int(a), int(b), int(c)]
}

fn ones() -> Triple {
    triple(1, 1, 1)
}

fn scaled(x: &Triple, k: &ExactRational) -> Triple {
    [0, 1, 2].map(|i| &x[i] * k)
}

fn transpose_apply(m: &RationalMatrix, x: &Triple) -> Triple {
    [0, 1, 2].map(|j| &m[(0, j)] * &x[0] + &m[(1, j)] * &x[1] + &m[(2, j)] * &x[2])
}

fn compute_level(nu: u32) -> Result<LevelData> {
    let network = build_level_one_network(nu)?;
    let parts = schur_decomposition(&network.laplacian, &network.boundary_indices)?;

    let r = &parts.trace[(0, 0)] / int(2);
    let expected = corner_operator().scale(&-&r);
    if parts.trace != expected {
        return Err(GasketError::consistency(format!(
            "trace form at level {nu} is not proportional to −D: {}",
            parts.trace
        )));
    }

    // boundary values -> values on every vertex of V_1
    let n = network.vertices.len();
    let mut full = RationalMatrix::zeros(n, 3);
    for (k, &b) in network.boundary_indices.iter().enumerate() {
        full[(b, k)] = ExactRational::one();
    }
    for (row, &v) in parts.interior.iter().enumerate() {
        for k in 0..3 {
            full[(v, k)] = parts.extension[(row, k)].clone();
        }
    }
    let extensions: Vec<ExtensionMatrix> = network
        .cell_vertices
        .iter()
        .enumerate()
        .map(|(idx, ids)| ExtensionMatrix {
            level: nu,
            cell: idx + 1,
            matrix: full.select(ids, &[0, 1, 2]),
        })
        .collect();
    debug_assert_eq!(extensions.len(), cell_count(nu));

    let spectral = spectral_from(nu, &r, &extensions)?;
    Ok(LevelData {
        level: nu,
        network,
        r,
        extensions,
        spectral,
    })
}

fn spectral_from(nu: u32, r: &ExactRational, ext: &[ExtensionMatrix]) -> Result<SpectralData> {
    let v_tilde = [triple(0, 1, 1), triple(1, 0, 1), triple(1, 1, 0)];
    let y = [triple(0, 1, -1), triple(-1, 0, 1), triple(1, -1, 0)];
    let u = [triple(-2, 1, 1), triple(1, -2, 1), triple(1, 1, -2)];
    let v = [0, 1, 2].map(|i| {
        let norm = dot(&u[i], &v_tilde[i]);
        scaled(&v_tilde[i], &norm.recip())
    });

    let s = ext[0].matrix.trace() - ExactRational::one() - r;
    let fail = |what: String| Err(GasketError::consistency(format!("level {nu}: {what}")));
    for i in 0..3 {
        let a = &ext[i];
        let s_i = a.matrix.trace() - ExactRational::one() - r;
        if s_i != s {
            return fail(format!(
                "third eigenvalue differs between cells 1 and {}",
                i + 1
            ));
        }
        if a.apply(&ones()) != ones() {
            return fail(format!("A_{} does not fix constants", i + 1));
        }
        if a.apply(&v_tilde[i]) != scaled(&v_tilde[i], r) {
            return fail(format!("ṽ_{} is not an r-eigenvector", i + 1));
        }
        if a.apply(&y[i]) != scaled(&y[i], &s) {
            return fail(format!("y_{} is not an s-eigenvector", i + 1));
        }
        if transpose_apply(&a.matrix, &u[i]) != scaled(&u[i], r) {
            return fail(format!(
                "u_{} is not an r-eigenvector of the transpose",
                i + 1
            ));
        }
    }
    if s.abs() >= *r {
        return fail(format!("|s| = {} is not below r = {r}", s.abs()));
    }
    Ok(SpectralData {
        level: nu,
        r: r.clone(),
        s,
        v_tilde,
        y,
        u,
        v,
    })
}

/// `r^(ν)`, verified to make the level-1 trace exactly `r^(ν) · Q`.
pub fn renormalization_constant(nu: u32) -> Result<ExactRational> {
    Ok(level_data(nu)?.r.clone())
}

/// Exact check of `1/ν < r^(ν) < N(ν)/ν²`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RBounds {
    pub level: u32,
    pub lower: ExactRational,
    pub r: ExactRational,
    pub upper: ExactRational,
    pub pass: bool,
}

pub fn verify_r_bounds(nu: u32) -> Result<RBounds> {
    let r = renormalization_constant(nu)?;
    let lower = rat(1, nu as i64);
    let upper = rat(cell_count(nu) as i64, (nu * nu) as i64);
    let pass = lower < r && r < upper;
    Ok(RBounds {
        level: nu,
        lower,
        r,
        upper,
        pass,
    })
}

pub fn extension_matrices(nu: u32) -> Result<Vec<ExtensionMatrix>> {
    Ok(level_data(nu)?.extensions.clone())
}

/// Extension matrix for one letter `i^ν`.
pub fn extension_for(letter: Letter) -> Result<ExtensionMatrix> {
    let data = level_data(letter.level())?;
    data.extensions
        .get(letter.cell() - 1)
        .cloned()
        .ok_or_else(|| GasketError::validation(format!("no cell {letter}")))
}

pub fn spectral_data(nu: u32) -> Result<SpectralData> {
    Ok(level_data(nu)?.spectral.clone())
}

/// `φ(x) = Σ_i (u_i, x)²`.
pub fn phi(x: &Triple) -> ExactRational {
    let u = [triple(-2, 1, 1), triple(1, -2, 1), triple(1, 1, -2)];
    u.iter()
        .map(|ui| {
            let p = dot(ui, x);
            &p * &p
        })
        .sum()
}

/// Constants feeding the singularity argument, for one `(T, q)`.
#[derive(Clone, Debug)]
pub struct ConstantsTable {
    /// `min |(u_i, v_j)|`.
    pub beta1: ExactRational,
    /// `min |log(r_v / q_v)|` over letters with `r_v ≠ q_v`, 1 if there are none.
    pub beta2: f64,
    /// The ratio `r_v / q_v` attaining `beta2`, if any.
    pub beta2_ratio: Option<ExactRational>,
    /// `min q_v`.
    pub beta3: ExactRational,
    /// `min r^(ν)` over the level set.
    pub beta4: ExactRational,
    /// `2 Q(v_i)`, identical for every corner.
    pub beta5: ExactRational,
    /// Minimum of `φ` on the unit-energy shell.
    pub beta6: ExactRational,
    pub delta0: ExactRational,
    /// `β₆ / 3`.
    pub delta_prime: ExactRational,
    /// `max |s^(ν) / r^(ν)|`.
    pub theta: ExactRational,
    /// `(u_i, v_j)` for `i, j ∈ {1,2,3}`.
    pub pairings: [[ExactRational; 3]; 3],
}

/// Number of random shell points used to confirm `φ ≡ 3/2`.
pub const PHI_SAMPLES: usize = 1000;

pub fn constants_table(levels: &LevelSet, q: &WeightSystem) -> Result<ConstantsTable> {
    q.validate(levels)?;
    let spectra: Vec<SpectralData> = levels.iter().map(spectral_data).collect::<Result<_>>()?;
    let sp = &spectra[0];

    let pairings = [0, 1, 2].map(|i| [0, 1, 2].map(|j| dot(&sp.u[i], &sp.v[j])));
    let beta1 = pairings
        .iter()
        .flatten()
        .map(|p| p.abs())
        .min()
        .expect("nine pairings");

    let mut beta2: Option<(f64, ExactRational)> = None;
    for nu in levels.iter() {
        let r = level_data(nu)?.r.clone();
        for cell in 1..=cell_count(nu) {
            let qv = q.weight(Letter::new(cell, nu)?)?;
            if qv == r {
                continue;
            }
            let ratio = &r / &qv;
            let gap = to_f64(&ratio).ln().abs();
            if beta2.as_ref().is_none_or(|(g, _)| gap < *g) {
                beta2 = Some((gap, ratio));
            }
        }
    }
    let (beta2, beta2_ratio) = match beta2 {
        Some((g, ratio)) => (g, Some(ratio)),
        None => (1.0, None),
    };

    let beta3 = q.min_weight();
    let beta4 = spectra
        .iter()
        .map(|s| s.r.clone())
        .min()
        .expect("nonempty T");

    let five: Vec<ExactRational> = sp.v.iter().map(|v| int(2) * corner_energy(v)).collect();
    if five.iter().any(|b| *b != five[0]) {
        return Err(GasketError::consistency("Q(v_i) differs between corners"));
    }
    let beta5 = five[0].clone();

    // (Dv_j)(p_i) must agree for the two corners i ≠ j
    let d = corner_operator();
    for j in 0..3 {
        let dv = d.mul_vec(&sp.v[j])?;
        let others: Vec<_> = (0..3).filter(|&i| i != j).map(|i| dv[i].clone()).collect();
        if others[0] != others[1] {
            return Err(GasketError::consistency(format!(
                "(Dv_{})(p_i) not symmetric",
                j + 1
            )));
        }
    }

    let mut delta0: Option<ExactRational> = None;
    for i in 0..3 {
        let dv = d.mul_vec(&sp.v[i])?;
        let best = (0..3)
            .map(|k| (dv[i].abs() - dv[k].abs()).abs())
            .max()
            .expect("three corners");
        delta0 = Some(match delta0 {
            Some(cur) if cur <= best => cur,
            _ => best,
        });
    }
    let delta0 = delta0.expect("three corners");

    let beta6 = rat(3, 2);
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed_0f0b);
    for _ in 0..PHI_SAMPLES {
        let t = rat(rng.gen_range(-1000..=1000), rng.gen_range(1..=1000));
        let c = rat(rng.gen_range(-50..=50), rng.gen_range(1..=50));
        let x = BoundaryVector::on_unit_energy_shell(&t, &c);
        if phi(x.values()) != beta6 {
            return Err(GasketError::consistency(format!("φ({x}) ≠ 3/2")));
        }
    }
    let delta_prime = &beta6 / int(3);

    let theta = spectra
        .iter()
        .map(|s| (&s.s / &s.r).abs())
        .max()
        .expect("nonempty T");

    Ok(ConstantsTable {
        beta1,
        beta2,
        beta2_ratio,
        beta3,
        beta4,
        beta5,
        beta6,
        delta0,
        delta_prime,
        theta,
        pairings,
    })
}

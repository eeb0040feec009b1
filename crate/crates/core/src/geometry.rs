//! Level-ν subdivision of the reference triangle.
//!
//! Points are kept in integer barycentric coordinates so that vertex
//! identification is exact. Cartesian coordinates are only produced for
//! rendering.

use std::collections::BTreeMap;
use std::fmt;
use std::hash::{Hash, Hasher};

use num_integer::Integer;

use crate::error::{GasketError, Result};
use crate::numerics::{int, RationalMatrix};

/// Number of cells at level ν: ν(ν+1)/2.
pub fn cell_count(nu: u32) -> usize {
    (nu as usize) * (nu as usize + 1) / 2
}

/// A point `(a, b, c) / scale` in barycentric coordinates with respect to the
/// corners `p₁, p₂, p₃`. Equality and hashing are by plane point, so
/// `(1,1,0)/2` and `(2,2,0)/4` compare equal.
#[derive(Clone, Copy, Debug)]
pub struct BaryPoint {
    coords: [u128; 3],
    scale: u128,
}

impl BaryPoint {
    pub fn new(coords: [u128; 3], scale: u128) -> Result<Self> {
        if scale == 0 || coords.iter().sum::<u128>() != scale {
            return Err(GasketError::validation(format!(
                "barycentric coordinates {coords:?} do not sum to scale {scale}"
            )));
        }
        Ok(BaryPoint { coords, scale })
    }

    /// Corner `p_i`, `i ∈ {1,2,3}`.
    pub fn corner(i: usize) -> Self {
        let mut coords = [0; 3];
        coords[i - 1] = 1;
        BaryPoint { coords, scale: 1 }
    }

    pub fn coords(&self) -> [u128; 3] {
        self.coords
    }

    pub fn scale(&self) -> u128 {
        self.scale
    }

    /// Same plane point with coordinates divided by their common factor.
    pub fn reduced(&self) -> Self {
        let g = self.coords.iter().fold(self.scale, |g, &c| g.gcd(&c));
        BaryPoint {
            coords: self.coords.map(|c| c / g),
            scale: self.scale / g,
        }
    }

    /// Cartesian position with `p₁` at the apex, `p₂` bottom-left and `p₃`
    /// bottom-right of a unit-side triangle (y grows downward, SVG style).
    pub fn to_cartesian(&self) -> (f64, f64) {
        let s = self.scale as f64;
        let [a, b, c] = self.coords.map(|v| v as f64 / s);
        let h = 3f64.sqrt() / 2.0;
        let corners = [(0.5, 0.0), (0.0, h), (1.0, h)];
        (
            a * corners[0].0 + b * corners[1].0 + c * corners[2].0,
            a * corners[0].1 + b * corners[1].1 + c * corners[2].1,
        )
    }
}

impl PartialEq for BaryPoint {
    fn eq(&self, other: &Self) -> bool {
        (0..3).all(|k| self.coords[k] * other.scale == other.coords[k] * self.scale)
    }
}

impl Eq for BaryPoint {}

impl Hash for BaryPoint {
    fn hash<H: Hasher>(&self, state: &mut H) {
        let r = self.reduced();
        r.coords.hash(state);
        r.scale.hash(state);
    }
}

impl PartialOrd for BaryPoint {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

/// Orders by reduced coordinates; consistent with plane-point equality.
impl Ord for BaryPoint {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        let (a, b) = (self.reduced(), other.reduced());
        (a.scale, a.coords).cmp(&(b.scale, b.coords))
    }
}

impl fmt::Display for BaryPoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let r = self.reduced();
        write!(
            f,
            "({},{},{})/{}",
            r.coords[0], r.coords[1], r.coords[2], r.scale
        )
    }
}

/// Upward-pointing cell `K_i^(ν)`, the image of the reference triangle under
/// `ψ_i^(ν)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CellDescriptor {
    pub level: u32,
    /// 1-based cell index.
    pub index: usize,
    /// Base point `(a, b, c)` with `a + b + c = ν − 1`.
    pub base: [u32; 3],
    /// Images of `p₁, p₂, p₃`, at scale ν.
    pub corners: [BaryPoint; 3],
}

fn check_level(nu: u32) -> Result<()> {
    if nu < 2 {
        return Err(GasketError::validation(format!(
            "level must be at least 2, got {nu}"
        )));
    }
    Ok(())
}

/// The `N(ν)` upward cells. Cells 1, 2, 3 contain `p₁, p₂, p₃`; the rest
/// follow in ascending lexicographic order of their base point.
pub fn cells(nu: u32) -> Result<Vec<CellDescriptor>> {
    check_level(nu)?;
    let top = nu - 1;
    let mut bases = vec![[top, 0, 0], [0, top, 0], [0, 0, top]];
    let mut rest = Vec::new();
    for a in 0..=top {
        for b in 0..=top - a {
            let base = [a, b, top - a - b];
            if !bases.contains(&base) {
                rest.push(base);
            }
        }
    }
    rest.sort();
    bases.extend(rest);

    Ok(bases
        .into_iter()
        .enumerate()
        .map(|(k, base)| {
            let corners = [0, 1, 2].map(|slot| {
                let mut c = base.map(u128::from);
                c[slot] += 1;
                BaryPoint {
                    coords: c,
                    scale: nu as u128,
                }
            });
            CellDescriptor {
                level: nu,
                index: k + 1,
                base,
                corners,
            }
        })
        .collect())
}

/// `ψ_i^(ν)(p)`: contracts by `1/ν` toward the cell's base.
pub fn apply_cell_map(nu: u32, i: usize, p: &BaryPoint) -> Result<BaryPoint> {
    check_level(nu)?;
    if i == 0 || i > cell_count(nu) {
        return Err(GasketError::validation(format!(
            "cell index {i} out of range for level {nu}"
        )));
    }
    let base = cells(nu)?[i - 1].base;
    Ok(map_with_base(nu, base, p))
}

pub(crate) fn map_with_base(nu: u32, base: [u32; 3], p: &BaryPoint) -> BaryPoint {
    let s = p.scale;
    BaryPoint {
        coords: [0, 1, 2].map(|k| p.coords[k] + s * base[k] as u128),
        scale: s * nu as u128,
    }
}

/// The level-1 network: vertices `V_1^(ν)` and the unit-weight Laplacian
/// `Σ_i Q(· ∘ ψ_i)`.
#[derive(Clone, Debug)]
pub struct LevelOneNetwork {
    pub level: u32,
    /// Corners `p₁, p₂, p₃` first, then the remaining vertices in descending
    /// lexicographic order of their coordinates.
    pub vertices: Vec<BaryPoint>,
    pub boundary_indices: [usize; 3],
    /// For each cell, the vertex indices of its three corners.
    pub cell_vertices: Vec<[usize; 3]>,
    pub laplacian: RationalMatrix,
}

pub fn build_level_one_network(nu: u32) -> Result<LevelOneNetwork> {
    let cells = cells(nu)?;
    let mut rest: Vec<BaryPoint> = Vec::new();
    let corners: Vec<BaryPoint> = (1..=3)
        .map(|i| {
            let p = BaryPoint::corner(i);
            BaryPoint {
                coords: p.coords.map(|c| c * nu as u128),
                scale: nu as u128,
            }
        })
        .collect();
    for cell in &cells {
        for p in &cell.corners {
            if !corners.contains(p) && !rest.contains(p) {
                rest.push(*p);
            }
        }
    }
    rest.sort_by_key(|v| std::cmp::Reverse(v.coords));
    let vertices: Vec<BaryPoint> = corners.into_iter().chain(rest).collect();
    let index: BTreeMap<[u128; 3], usize> = vertices
        .iter()
        .enumerate()
        .map(|(k, p)| (p.coords, k))
        .collect();

    let n = vertices.len();
    let mut lap = RationalMatrix::zeros(n, n);
    let mut cell_vertices = Vec::with_capacity(cells.len());
    for cell in &cells {
        let ids = cell.corners.map(|p| index[&p.coords]);
        for a in 0..3 {
            for b in 0..3 {
                if a == b {
                    lap[(ids[a], ids[a])] += int(2);
                } else {
                    lap[(ids[a], ids[b])] -= int(1);
                }
            }
        }
        cell_vertices.push(ids);
    }
    Ok(LevelOneNetwork {
        level: nu,
        vertices,
        boundary_indices: [0, 1, 2],
        cell_vertices,
        laplacian: lap,
    })
}

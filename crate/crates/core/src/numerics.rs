//! Exact rational scalars and small dense matrices.
//!
//! Everything that the renormalization algebra touches is computed here in
//! arbitrary precision: Gaussian elimination with first-nonzero pivoting and
//! Schur complements (traces of quadratic forms onto a boundary set).

use std::fmt;
use std::ops::{Index, IndexMut};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{GasketError, Result};

/// Arbitrary-precision rational, always in lowest terms with positive denominator.
pub type ExactRational = BigRational;

/// `n/d` as an exact rational. Panics if `d == 0`; use [`checked_div`] for
/// runtime values.
pub fn rat(n: i64, d: i64) -> ExactRational {
    BigRational::new(BigInt::from(n), BigInt::from(d))
}

pub fn int(n: i64) -> ExactRational {
    BigRational::from_integer(BigInt::from(n))
}

pub fn checked_div(a: &ExactRational, b: &ExactRational) -> Result<ExactRational> {
    if b.is_zero() {
        return Err(GasketError::DivisionByZero);
    }
    Ok(a / b)
}

/// Parses `"num/den"` or an integer literal.
pub fn parse_rational(text: &str) -> Result<ExactRational> {
    let text = text.trim();
    let bad = || GasketError::validation(format!("not a rational number: {text:?}"));
    match text.split_once('/') {
        Some((n, d)) => {
            let n: BigInt = n.trim().parse().map_err(|_| bad())?;
            let d: BigInt = d.trim().parse().map_err(|_| bad())?;
            if d.is_zero() {
                return Err(GasketError::DivisionByZero);
            }
            Ok(BigRational::new(n, d))
        }
        None => {
            let n: BigInt = text.parse().map_err(|_| bad())?;
            Ok(BigRational::from_integer(n))
        }
    }
}

/// Nearest `f64`; rationals too large for `f64` saturate to infinity.
pub fn to_f64(x: &ExactRational) -> f64 {
    x.to_f64().unwrap_or_else(|| {
        if x.is_negative() {
            f64::NEG_INFINITY
        } else {
            f64::INFINITY
        }
    })
}

pub fn dot(a: &[ExactRational], b: &[ExactRational]) -> ExactRational {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Dense row-major matrix of exact rationals.
#[derive(Clone, PartialEq, Eq)]
pub struct RationalMatrix {
    rows: usize,
    cols: usize,
    data: Vec<ExactRational>,
}

impl RationalMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        RationalMatrix {
            rows,
            cols,
            data: vec![ExactRational::zero(); rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = ExactRational::one();
        }
        m
    }

    pub fn from_rows(rows: Vec<Vec<ExactRational>>) -> Result<Self> {
        let r = rows.len();
        let c = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|row| row.len() != c) {
            return Err(GasketError::Dimension("ragged rows".into()));
        }
        Ok(RationalMatrix {
            rows: r,
            cols: c,
            data: rows.into_iter().flatten().collect(),
        })
    }

    /// Convenience constructor from integer entries.
    pub fn from_i64(rows: &[&[i64]]) -> Self {
        let rows = rows
            .iter()
            .map(|row| row.iter().map(|&v| int(v)).collect())
            .collect();
        Self::from_rows(rows).expect("rectangular literal")
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn row(&self, i: usize) -> &[ExactRational] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn column(&self, j: usize) -> Vec<ExactRational> {
        (0..self.rows).map(|i| self[(i, j)].clone()).collect()
    }

    pub fn is_symmetric(&self) -> bool {
        self.is_square() && (0..self.rows).all(|i| (0..i).all(|j| self[(i, j)] == self[(j, i)]))
    }

    pub fn transpose(&self) -> Self {
        let mut t = Self::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                t[(j, i)] = self[(i, j)].clone();
            }
        }
        t
    }

    pub fn scale(&self, k: &ExactRational) -> Self {
        RationalMatrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|v| v * k).collect(),
        }
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.same_shape(other)?;
        Ok(RationalMatrix {
            rows: self.rows,
            cols: self.cols,
            data: self
                .data
                .iter()
                .zip(&other.data)
                .map(|(a, b)| a + b)
                .collect(),
        })
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.same_shape(other)?;
        Ok(RationalMatrix {
            rows: self.rows,
            cols: self.cols,
            data: self
                .data
                .iter()
                .zip(&other.data)
                .map(|(a, b)| a - b)
                .collect(),
        })
    }

    fn same_shape(&self, other: &Self) -> Result<()> {
        if self.rows != other.rows || self.cols != other.cols {
            return Err(GasketError::Dimension(format!(
                "{}x{} vs {}x{}",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        Ok(())
    }

    pub fn mul(&self, other: &Self) -> Result<Self> {
        if self.cols != other.rows {
            return Err(GasketError::Dimension(format!(
                "cannot multiply {}x{} by {}x{}",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        let mut out = Self::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = &self[(i, k)];
                if a.is_zero() {
                    continue;
                }
                for j in 0..other.cols {
                    out[(i, j)] += a * &other[(k, j)];
                }
            }
        }
        Ok(out)
    }

    pub fn mul_vec(&self, x: &[ExactRational]) -> Result<Vec<ExactRational>> {
        if x.len() != self.cols {
            return Err(GasketError::Dimension(format!(
                "vector of length {} against {} columns",
                x.len(),
                self.cols
            )));
        }
        Ok((0..self.rows).map(|i| dot(self.row(i), x)).collect())
    }

    /// `x · M · x`.
    pub fn quadratic_form(&self, x: &[ExactRational]) -> Result<ExactRational> {
        Ok(dot(x, &self.mul_vec(x)?))
    }

    pub fn trace(&self) -> ExactRational {
        (0..self.rows.min(self.cols))
            .map(|i| self[(i, i)].clone())
            .sum()
    }

    /// Submatrix picking the listed rows and columns, in the given order.
    pub fn select(&self, rows: &[usize], cols: &[usize]) -> Self {
        let mut out = Self::zeros(rows.len(), cols.len());
        for (a, &i) in rows.iter().enumerate() {
            for (b, &j) in cols.iter().enumerate() {
                out[(a, b)] = self[(i, j)].clone();
            }
        }
        out
    }

    pub fn entries(&self) -> impl Iterator<Item = &ExactRational> {
        self.data.iter()
    }
}

impl Index<(usize, usize)> for RationalMatrix {
    type Output = ExactRational;
    fn index(&self, (i, j): (usize, usize)) -> &ExactRational {
        &self.data[i * self.cols + j]
    }
}

impl IndexMut<(usize, usize)> for RationalMatrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut ExactRational {
        &mut self.data[i * self.cols + j]
    }
}

impl fmt::Debug for RationalMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

impl fmt::Display for RationalMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[")?;
        for i in 0..self.rows {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "[")?;
            for (j, v) in self.row(i).iter().enumerate() {
                if j > 0 {
                    write!(f, ", ")?;
                }
                write!(f, "{v}")?;
            }
            write!(f, "]")?;
        }
        write!(f, "]")
    }
}

/// Solves `a · X = b` for a matrix right-hand side.
pub fn solve_many(a: &RationalMatrix, b: &RationalMatrix) -> Result<RationalMatrix> {
    if !a.is_square() || a.rows() != b.rows() {
        return Err(GasketError::Dimension(format!(
            "system {}x{} with right-hand side {}x{}",
            a.rows(),
            a.cols(),
            b.rows(),
            b.cols()
        )));
    }
    let n = a.rows();
    let m = b.cols();
    let mut lhs = a.clone();
    let mut rhs = b.clone();

    for col in 0..n {
        let pivot = (col..n)
            .find(|&r| !lhs[(r, col)].is_zero())
            .ok_or(GasketError::Singular)?;
        if pivot != col {
            for j in 0..n {
                let tmp = lhs[(col, j)].clone();
                lhs[(col, j)] = lhs[(pivot, j)].clone();
                lhs[(pivot, j)] = tmp;
            }
            for j in 0..m {
                let tmp = rhs[(col, j)].clone();
                rhs[(col, j)] = rhs[(pivot, j)].clone();
                rhs[(pivot, j)] = tmp;
            }
        }
        let inv = lhs[(col, col)].recip();
        for j in col..n {
            lhs[(col, j)] *= &inv;
        }
        for j in 0..m {
            rhs[(col, j)] *= &inv;
        }
        for r in 0..n {
            if r == col || lhs[(r, col)].is_zero() {
                continue;
            }
            let factor = lhs[(r, col)].clone();
            for j in col..n {
                let delta = &factor * &lhs[(col, j)];
                lhs[(r, j)] -= delta;
            }
            for j in 0..m {
                let delta = &factor * &rhs[(col, j)];
                rhs[(r, j)] -= delta;
            }
        }
    }
    Ok(rhs)
}

/// Exact solution of `a · x = b`.
pub fn solve_linear(a: &RationalMatrix, b: &[ExactRational]) -> Result<Vec<ExactRational>> {
    let rhs = RationalMatrix::from_rows(b.iter().map(|v| vec![v.clone()]).collect())?;
    let rhs = if b.is_empty() {
        RationalMatrix::zeros(0, 1)
    } else {
        rhs
    };
    Ok(solve_many(a, &rhs)?.column(0))
}

pub fn inverse(a: &RationalMatrix) -> Result<RationalMatrix> {
    solve_many(a, &RationalMatrix::identity(a.rows()))
}

/// Trace of a quadratic form onto a boundary index set, together with the
/// linear map sending boundary values to the energy-minimizing interior values.
#[derive(Clone, Debug)]
pub struct SchurParts {
    pub boundary: Vec<usize>,
    pub interior: Vec<usize>,
    /// `M_BB − M_BI M_II⁻¹ M_IB`, indexed by `boundary` order.
    pub trace: RationalMatrix,
    /// `−M_II⁻¹ M_IB`: row `k` gives the minimizer's value at `interior[k]`.
    pub extension: RationalMatrix,
}

pub fn schur_decomposition(m: &RationalMatrix, boundary: &[usize]) -> Result<SchurParts> {
    if !m.is_symmetric() {
        return Err(GasketError::validation(
            "schur complement needs a symmetric matrix",
        ));
    }
    let n = m.rows();
    let mut seen = vec![false; n];
    for &b in boundary {
        if b >= n || seen[b] {
            return Err(GasketError::validation(format!("bad boundary index {b}")));
        }
        seen[b] = true;
    }
    let interior: Vec<usize> = (0..n).filter(|&i| !seen[i]).collect();
    let m_bb = m.select(boundary, boundary);
    if interior.is_empty() {
        return Ok(SchurParts {
            boundary: boundary.to_vec(),
            interior,
            trace: m_bb,
            extension: RationalMatrix::zeros(0, boundary.len()),
        });
    }
    let m_ii = m.select(&interior, &interior);
    let m_ib = m.select(&interior, boundary);
    let solved = solve_many(&m_ii, &m_ib).map_err(|e| match e {
        GasketError::Singular => GasketError::InteriorNotInvertible,
        other => other,
    })?;
    let m_bi = m.select(boundary, &interior);
    let trace = m_bb.sub(&m_bi.mul(&solved)?)?;
    let extension = solved.scale(&int(-1));
    Ok(SchurParts {
        boundary: boundary.to_vec(),
        interior,
        trace,
        extension,
    })
}

/// `M_BB − M_BI M_II⁻¹ M_IB` for a symmetric `m`.
pub fn schur_complement(m: &RationalMatrix, boundary: &[usize]) -> Result<RationalMatrix> {
    Ok(schur_decomposition(m, boundary)?.trace)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn two_by_two_trace() {
        // minimize 2x² − 2xy + 2y² over y: y = x/2 gives 3x²/2
        let m = RationalMatrix::from_i64(&[&[2, -1], &[-1, 2]]);
        let s = schur_complement(&m, &[0]).unwrap();
        assert_eq!(s[(0, 0)], rat(3, 2));
    }

    #[test]
    fn empty_interior_is_identity() {
        let m = RationalMatrix::from_i64(&[&[2, -1], &[-1, 2]]);
        assert_eq!(schur_complement(&m, &[0, 1]).unwrap(), m);
    }

    #[test]
    fn singular_interior_is_reported() {
        // vertex 2 is isolated, so its interior block is zero
        let m = RationalMatrix::from_i64(&[&[1, -1, 0], &[-1, 1, 0], &[0, 0, 0]]);
        assert!(matches!(
            schur_complement(&m, &[0, 1]),
            Err(GasketError::InteriorNotInvertible)
        ));
    }

    #[test]
    fn rejects_asymmetric() {
        let m = RationalMatrix::from_i64(&[&[1, 2], &[0, 1]]);
        assert!(schur_complement(&m, &[0]).is_err());
    }

    #[test]
    fn solves_small_systems() {
        let id = RationalMatrix::identity(3);
        let b = vec![rat(1, 2), int(-3), rat(7, 9)];
        assert_eq!(solve_linear(&id, &b).unwrap(), b);

        let a = RationalMatrix::from_i64(&[&[2, 1], &[1, 2]]);
        assert_eq!(
            solve_linear(&a, &[int(3), int(3)]).unwrap(),
            vec![int(1), int(1)]
        );
    }

    #[test]
    fn pivots_past_leading_zero() {
        let a = RationalMatrix::from_i64(&[&[0, 1], &[1, 0]]);
        assert_eq!(
            solve_linear(&a, &[int(5), int(7)]).unwrap(),
            vec![int(7), int(5)]
        );
    }

    #[test]
    fn singular_system_errors() {
        let a = RationalMatrix::from_i64(&[&[1, 2], &[2, 4]]);
        assert!(matches!(
            solve_linear(&a, &[int(1), int(1)]),
            Err(GasketError::Singular)
        ));
    }

    #[test]
    fn inverse_round_trip() {
        let a = RationalMatrix::from_i64(&[&[4, 1, 0], &[1, 3, 1], &[0, 1, 2]]);
        let inv = inverse(&a).unwrap();
        assert_eq!(a.mul(&inv).unwrap(), RationalMatrix::identity(3));
    }

    #[test]
    fn parses_rationals() {
        assert_eq!(parse_rational("3/5").unwrap(), rat(3, 5));
        assert_eq!(parse_rational(" -6/4 ").unwrap(), rat(-3, 2));
        assert_eq!(parse_rational("7").unwrap(), int(7));
        assert!(parse_rational("1/0").is_err());
        assert!(parse_rational("x").is_err());
    }

    #[test]
    fn division_by_zero_is_an_error() {
        assert!(matches!(
            checked_div(&int(1), &int(0)),
            Err(GasketError::DivisionByZero)
        ));
    }
}

//! Exact rational linear algebra: ranks, determinants, inverses and normal forms.

use std::fmt;

use num::{BigInt, BigRational, Integer, One, Signed, ToPrimitive, Zero};
use serde::de::Error as _;
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

use crate::exponents::{format_rational, parse_rational, RationalLiteral};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum MatrixError {
    #[error("matrix is singular")]
    Singular,
    #[error("expected a square matrix, got {rows}x{cols}")]
    NotSquare { rows: usize, cols: usize },
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("stacked rank {rank} is below m = {m}; joint normal form unavailable")]
    StackedRankDeficient { rank: usize, m: usize },
}

/// Dense row-major matrix of exact rationals.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct RationalMatrix {
    rows: usize,
    cols: usize,
    entries: Vec<BigRational>,
}

impl RationalMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            entries: vec![BigRational::zero(); rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m.set(i, i, BigRational::one());
        }
        m
    }

    pub fn from_entries(
        rows: usize,
        cols: usize,
        entries: Vec<BigRational>,
    ) -> Result<Self, MatrixError> {
        if entries.len() != rows * cols {
            return Err(MatrixError::DimensionMismatch(format!(
                "{} entries for a {rows}x{cols} matrix",
                entries.len()
            )));
        }
        Ok(Self {
            rows,
            cols,
            entries,
        })
    }

    /// Builds from rows; every row must have `cols` entries.
    pub fn from_rows(rows: Vec<Vec<BigRational>>, cols: usize) -> Result<Self, MatrixError> {
        let n = rows.len();
        if rows.iter().any(|r| r.len() != cols) {
            return Err(MatrixError::DimensionMismatch("ragged rows".into()));
        }
        Self::from_entries(n, cols, rows.into_iter().flatten().collect())
    }

    pub fn from_i64(rows: &[&[i64]]) -> Self {
        let cols = rows.first().map_or(0, |r| r.len());
        let data = rows
            .iter()
            .map(|r| r.iter().map(|&v| BigRational::from_integer(v.into())).collect())
            .collect();
        Self::from_rows(data, cols).expect("rectangular literal")
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, i: usize, j: usize) -> &BigRational {
        &self.entries[i * self.cols + j]
    }

    pub fn set(&mut self, i: usize, j: usize, v: BigRational) {
        self.entries[i * self.cols + j] = v;
    }

    pub fn row(&self, i: usize) -> &[BigRational] {
        &self.entries[i * self.cols..(i + 1) * self.cols]
    }

    pub fn is_zero(&self) -> bool {
        self.entries.iter().all(Zero::is_zero)
    }

    pub fn transpose(&self) -> Self {
        let mut t = Self::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                t.set(j, i, self.get(i, j).clone());
            }
        }
        t
    }

    pub fn mul(&self, other: &Self) -> Result<Self, MatrixError> {
        if self.cols != other.rows {
            return Err(MatrixError::DimensionMismatch(format!(
                "{}x{} times {}x{}",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        let mut out = Self::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self.get(i, k);
                if a.is_zero() {
                    continue;
                }
                for j in 0..other.cols {
                    let b = other.get(k, j);
                    if !b.is_zero() {
                        let v = out.get(i, j) + a * b;
                        out.set(i, j, v);
                    }
                }
            }
        }
        Ok(out)
    }

    /// Stacks `self` on top of `other`.
    pub fn vstack(&self, other: &Self) -> Result<Self, MatrixError> {
        if self.cols != other.cols {
            return Err(MatrixError::DimensionMismatch(format!(
                "cannot stack {} columns on {}",
                self.cols, other.cols
            )));
        }
        let mut entries = self.entries.clone();
        entries.extend(other.entries.iter().cloned());
        Self::from_entries(self.rows + other.rows, self.cols, entries)
    }

    pub fn select_columns(&self, cols: &[usize]) -> Self {
        let mut out = Self::zeros(self.rows, cols.len());
        for i in 0..self.rows {
            for (jj, &j) in cols.iter().enumerate() {
                out.set(i, jj, self.get(i, j).clone());
            }
        }
        out
    }

    /// Matrix-vector product in floating point.
    pub fn apply_f64(&self, x: &[f64]) -> Vec<f64> {
        let dense = self.to_f64();
        (0..self.rows)
            .map(|i| (0..self.cols).map(|j| dense[i * self.cols + j] * x[j]).sum())
            .collect()
    }

    /// Row-major floating-point copy.
    pub fn to_f64(&self) -> Vec<f64> {
        self.entries
            .iter()
            .map(|v| v.to_f64().unwrap_or(f64::NAN))
            .collect()
    }

    pub fn to_f64_rows(&self) -> Vec<Vec<f64>> {
        let dense = self.to_f64();
        dense.chunks(self.cols.max(1)).take(self.rows).map(<[f64]>::to_vec).collect()
    }

    pub fn rank(&self) -> usize {
        rank(self)
    }
}

impl fmt::Display for RationalMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[")?;
        for i in 0..self.rows {
            if i > 0 {
                write!(f, "; ")?;
            }
            let row: Vec<String> = self.row(i).iter().map(format_rational).collect();
            write!(f, "{}", row.join(", "))?;
        }
        write!(f, "]")
    }
}

impl Serialize for RationalMatrix {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        let rows: Vec<Vec<String>> = (0..self.rows)
            .map(|i| self.row(i).iter().map(format_rational).collect())
            .collect();
        rows.serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for RationalMatrix {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let raw: Vec<Vec<RationalLiteral>> = Vec::deserialize(deserializer)?;
        let cols = raw.first().map_or(0, Vec::len);
        let rows = raw
            .iter()
            .map(|r| {
                r.iter()
                    .map(|lit| parse_rational(&lit.text()))
                    .collect::<Result<Vec<_>, _>>()
            })
            .collect::<Result<Vec<_>, _>>()
            .map_err(D::Error::custom)?;
        RationalMatrix::from_rows(rows, cols).map_err(D::Error::custom)
    }
}

/// Integer rows obtained by clearing denominators row by row.
fn integer_rows(m: &RationalMatrix) -> (Vec<Vec<BigInt>>, BigInt) {
    let mut scale = BigInt::one();
    let rows = (0..m.rows)
        .map(|i| {
            let row = m.row(i);
            let lcm = row.iter().fold(BigInt::one(), |acc, v| acc.lcm(v.denom()));
            scale *= &lcm;
            row.iter()
                .map(|v| v.numer() * (&lcm / v.denom()))
                .collect()
        })
        .collect();
    (rows, scale)
}

/// Fraction-free elimination; returns the rank and, for square input, the
/// determinant of the integer matrix.
fn bareiss(mut a: Vec<Vec<BigInt>>, cols: usize) -> (usize, BigInt) {
    let rows = a.len();
    let mut prev = BigInt::one();
    let mut rank = 0;
    let mut sign = 1i32;
    for col in 0..cols {
        if rank == rows {
            break;
        }
        let Some(pivot) = (rank..rows).find(|&i| !a[i][col].is_zero()) else {
            continue;
        };
        if pivot != rank {
            a.swap(pivot, rank);
            sign = -sign;
        }
        for i in rank + 1..rows {
            for j in col + 1..cols {
                let v = (&a[rank][col] * &a[i][j] - &a[i][col] * &a[rank][j]) / &prev;
                a[i][j] = v;
            }
            a[i][col] = BigInt::zero();
        }
        prev = a[rank][col].clone();
        rank += 1;
    }
    let det = if rank == rows && rows == cols {
        if rows == 0 {
            BigInt::one()
        } else {
            let d = a[rows - 1][cols - 1].clone();
            if sign < 0 {
                -d
            } else {
                d
            }
        }
    } else {
        BigInt::zero()
    };
    (rank, det)
}

/// Exact rank.
pub fn rank(m: &RationalMatrix) -> usize {
    let (rows, _) = integer_rows(m);
    bareiss(rows, m.cols).0
}

/// Exact determinant of a square matrix.
pub fn det(m: &RationalMatrix) -> Result<BigRational, MatrixError> {
    if m.rows != m.cols {
        return Err(MatrixError::NotSquare {
            rows: m.rows,
            cols: m.cols,
        });
    }
    let (rows, scale) = integer_rows(m);
    let (_, d) = bareiss(rows, m.cols);
    Ok(BigRational::new(d, scale))
}

/// Reduced row echelon form together with the accumulated row operations:
/// returns `(P, R, pivots)` with `P·M = R`.
fn rref_with_transform(m: &RationalMatrix) -> (RationalMatrix, RationalMatrix, Vec<usize>) {
    let mut r = m.clone();
    let mut p = RationalMatrix::identity(m.rows);
    let mut pivots = Vec::new();
    let mut row = 0;
    for col in 0..m.cols {
        if row == m.rows {
            break;
        }
        let Some(piv) = (row..m.rows).find(|&i| !r.get(i, col).is_zero()) else {
            continue;
        };
        swap_rows(&mut r, piv, row);
        swap_rows(&mut p, piv, row);
        let inv = r.get(row, col).recip();
        scale_row(&mut r, row, &inv);
        scale_row(&mut p, row, &inv);
        for i in 0..m.rows {
            if i != row && !r.get(i, col).is_zero() {
                let factor = r.get(i, col).clone();
                add_row_multiple(&mut r, i, row, &factor);
                add_row_multiple(&mut p, i, row, &factor);
            }
        }
        pivots.push(col);
        row += 1;
    }
    (p, r, pivots)
}

fn swap_rows(m: &mut RationalMatrix, a: usize, b: usize) {
    if a == b {
        return;
    }
    for j in 0..m.cols {
        m.entries.swap(a * m.cols + j, b * m.cols + j);
    }
}

fn scale_row(m: &mut RationalMatrix, i: usize, s: &BigRational) {
    for j in 0..m.cols {
        let v = m.get(i, j) * s;
        m.set(i, j, v);
    }
}

/// row_i -= factor · row_k
fn add_row_multiple(m: &mut RationalMatrix, i: usize, k: usize, factor: &BigRational) {
    for j in 0..m.cols {
        if !m.get(k, j).is_zero() {
            let v = m.get(i, j) - factor * m.get(k, j);
            m.set(i, j, v);
        }
    }
}

/// Exact inverse.
pub fn invert(m: &RationalMatrix) -> Result<RationalMatrix, MatrixError> {
    if m.rows != m.cols {
        return Err(MatrixError::NotSquare {
            rows: m.rows,
            cols: m.cols,
        });
    }
    let (p, _, pivots) = rref_with_transform(m);
    if pivots.len() != m.rows {
        return Err(MatrixError::Singular);
    }
    Ok(p)
}

/// `P·D·Q = [I_r 0; 0 0]`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SingleNormalForm {
    #[serde(rename = "P")]
    pub p: RationalMatrix,
    #[serde(rename = "Q")]
    pub q: RationalMatrix,
    pub r: usize,
}

impl SingleNormalForm {
    /// The block pattern `[I_r 0; 0 0]` of shape `rows x cols`.
    pub fn target(rows: usize, cols: usize, r: usize) -> RationalMatrix {
        let mut t = RationalMatrix::zeros(rows, cols);
        for i in 0..r {
            t.set(i, i, BigRational::one());
        }
        t
    }

    /// Exact check of `P·D·Q` against the block pattern.
    pub fn verify(&self, d: &RationalMatrix) -> bool {
        let lhs = self.p.mul(d).and_then(|pd| pd.mul(&self.q));
        let invertible = det(&self.p).map(|v| !v.is_zero()).unwrap_or(false)
            && det(&self.q).map(|v| !v.is_zero()).unwrap_or(false);
        invertible && lhs.is_ok_and(|l| l == Self::target(d.rows, d.cols, self.r))
    }
}

/// Rank factorization of a single matrix.
pub fn single_normal_form(d: &RationalMatrix) -> SingleNormalForm {
    let (p, r_mat, pivots) = rref_with_transform(d);
    let r = pivots.len();
    let m = d.cols;
    // Permute pivot columns first, then clear the remaining columns of the top block.
    let mut order = pivots.clone();
    order.extend((0..m).filter(|c| !pivots.contains(c)));
    let mut q = RationalMatrix::zeros(m, m);
    for (new, &old) in order.iter().enumerate() {
        q.set(old, new, BigRational::one());
    }
    let permuted = r_mat.mul(&q).expect("square permutation");
    let mut clear = RationalMatrix::identity(m);
    for i in 0..r {
        for j in r..m {
            clear.set(i, j, -permuted.get(i, j).clone());
        }
    }
    let q = q.mul(&clear).expect("square");
    SingleNormalForm { p, q, r }
}

/// Simultaneous reduction of `(D1, D2)` into complementary identity blocks.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct JointNormalForm {
    #[serde(rename = "P1")]
    pub p1: RationalMatrix,
    #[serde(rename = "P2")]
    pub p2: RationalMatrix,
    #[serde(rename = "Q")]
    pub q: RationalMatrix,
    pub r1: usize,
    pub r2: usize,
    /// Column block widths `(m - r2, r1 + r2 - m, m - r1)`.
    pub blocks: [usize; 3],
}

impl JointNormalForm {
    /// `[I_{r1} 0; 0 0]` for `D1`.
    pub fn target1(&self, n1: usize) -> RationalMatrix {
        SingleNormalForm::target(n1, self.q.cols, self.r1)
    }

    /// `[0 I_{r2}; 0 0]` for `D2`, identity in the last `r2` columns.
    pub fn target2(&self, n2: usize) -> RationalMatrix {
        let m = self.q.cols;
        let mut t = RationalMatrix::zeros(n2, m);
        for i in 0..self.r2 {
            t.set(i, m - self.r2 + i, BigRational::one());
        }
        t
    }

    /// Exact checks of both reconstruction identities.
    pub fn verify(&self, d1: &RationalMatrix, d2: &RationalMatrix) -> (bool, bool) {
        let invertible = [&self.p1, &self.p2, &self.q]
            .iter()
            .all(|m| det(m).map(|v| !v.is_zero()).unwrap_or(false));
        let check = |p: &RationalMatrix, d: &RationalMatrix, t: RationalMatrix| {
            p.mul(d)
                .and_then(|pd| pd.mul(&self.q))
                .is_ok_and(|l| l == t)
        };
        (
            invertible && check(&self.p1, d1, self.target1(d1.rows)),
            invertible && check(&self.p2, d2, self.target2(d2.rows)),
        )
    }
}

/// Solves `A c = b` for a matrix with independent columns; `None` if inconsistent.
fn solve_independent(a: &RationalMatrix, b: &[BigRational]) -> Option<Vec<BigRational>> {
    let mut aug = RationalMatrix::zeros(a.rows, a.cols + 1);
    for i in 0..a.rows {
        for j in 0..a.cols {
            aug.set(i, j, a.get(i, j).clone());
        }
        aug.set(i, a.cols, b[i].clone());
    }
    let (_, r, pivots) = rref_with_transform(&aug);
    if pivots.len() != a.cols || pivots.contains(&a.cols) {
        return None;
    }
    Some((0..a.cols).map(|i| r.get(i, a.cols).clone()).collect())
}

/// Row transform `P` with `P·A = [I; 0]` for a matrix of full column rank.
fn left_reducer(a: &RationalMatrix) -> RationalMatrix {
    rref_with_transform(a).0
}

pub fn joint_normal_form(
    d1: &RationalMatrix,
    d2: &RationalMatrix,
) -> Result<JointNormalForm, MatrixError> {
    let m = d1.cols;
    if d2.cols != m {
        return Err(MatrixError::DimensionMismatch(format!(
            "D1 has {} columns, D2 has {}",
            m, d2.cols
        )));
    }
    let stacked = rank(&d1.vstack(d2)?);
    if stacked < m {
        return Err(MatrixError::StackedRankDeficient { rank: stacked, m });
    }
    let single = single_normal_form(d1);
    let r1 = single.r;
    let r2 = rank(d2);
    let q1 = single.q;
    let b = d2.mul(&q1)?;

    let tail: Vec<usize> = (r1..m).collect();
    let need = r1 + r2 - m;
    let mut chosen: Vec<usize> = Vec::new();
    let mut current = rank(&b.select_columns(&tail));
    for j in 0..r1 {
        if chosen.len() == need {
            break;
        }
        let mut cols = chosen.clone();
        cols.push(j);
        cols.extend(&tail);
        let rk = rank(&b.select_columns(&cols));
        if rk > current {
            chosen.push(j);
            current = rk;
        }
    }
    debug_assert_eq!(chosen.len(), need);

    let mut basis = chosen.clone();
    basis.extend(&tail);
    let basis_mat = b.select_columns(&basis);
    let mut q2 = RationalMatrix::zeros(m, m);
    let mut col = 0;
    for k in (0..r1).filter(|k| !chosen.contains(k)) {
        let target: Vec<BigRational> = (0..b.rows).map(|i| b.get(i, k).clone()).collect();
        let coeffs = solve_independent(&basis_mat, &target)
            .expect("column lies in the span of the chosen basis");
        q2.set(k, col, BigRational::one());
        for (c, &j) in coeffs.iter().zip(&basis) {
            let v = q2.get(j, col) - c;
            q2.set(j, col, v);
        }
        col += 1;
    }
    for &j in &basis {
        q2.set(j, col, BigRational::one());
        col += 1;
    }
    let q = q1.mul(&q2)?;

    let a1 = d1.mul(&q)?;
    let a2 = d2.mul(&q)?;
    let p1 = left_reducer(&a1.select_columns(&(0..r1).collect::<Vec<_>>()));
    let p2 = left_reducer(&a2.select_columns(&(m - r2..m).collect::<Vec<_>>()));
    Ok(JointNormalForm {
        p1,
        p2,
        q,
        r1,
        r2,
        blocks: [m - r2, need, m - r1],
    })
}

/// Floating-point determinant by partial-pivot elimination.
pub(crate) fn det_f64(rows: &[Vec<f64>]) -> f64 {
    let n = rows.len();
    let mut a: Vec<Vec<f64>> = rows.to_vec();
    let mut d = 1.0;
    for c in 0..n {
        let piv = (c..n)
            .max_by(|&i, &j| a[i][c].abs().total_cmp(&a[j][c].abs()))
            .unwrap_or(c);
        if a[piv][c] == 0.0 {
            return 0.0;
        }
        if piv != c {
            a.swap(piv, c);
            d = -d;
        }
        d *= a[c][c];
        for i in c + 1..n {
            let f = a[i][c] / a[c][c];
            for j in c..n {
                a[i][j] -= f * a[c][j];
            }
        }
    }
    d
}

/// `|det|` sign helper for rationals.
pub fn abs_det(m: &RationalMatrix) -> Result<BigRational, MatrixError> {
    det(m).map(|d| d.abs())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bareiss_det_matches_cofactor() {
        let m = RationalMatrix::from_i64(&[&[2, -1, 0], &[1, 3, 2], &[0, 5, -4]]);
        // 2(-12-10) + 1(-4-0) = -48
        assert_eq!(det(&m).unwrap(), BigRational::from_integer((-48).into()));
    }

    #[test]
    fn rational_det_scales() {
        let mut m = RationalMatrix::identity(2);
        m.set(0, 0, BigRational::new(1.into(), 3.into()));
        assert_eq!(det(&m).unwrap(), BigRational::new(1.into(), 3.into()));
    }

    #[test]
    fn float_det() {
        assert!((det_f64(&[vec![0.0, 2.0], vec![3.0, 1.0]]) + 6.0).abs() < 1e-12);
    }
}

//! Small dense matrices and a symmetric positive-definite solver.

use std::ops::{Index, IndexMut};

use log::warn;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum LinalgError {
    #[error("matrix is not positive definite (pivot {pivot} = {value:e})")]
    NotPositiveDefinite { pivot: usize, value: f64 },
    #[error("matrix is numerically singular (pivot {pivot})")]
    Singular { pivot: usize },
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("matrix is not symmetric at ({row}, {col})")]
    NotSymmetric { row: usize, col: usize },
}

/// Row-major dense matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseMatrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl DenseMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![0.0; rows * cols],
        }
    }

    pub fn identity(dim: usize) -> Self {
        let mut m = Self::zeros(dim, dim);
        for i in 0..dim {
            m[(i, i)] = 1.0;
        }
        m
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self, LinalgError> {
        let cols = rows.first().map_or(0, Vec::len);
        let mut data = Vec::with_capacity(rows.len() * cols);
        for r in rows {
            if r.len() != cols {
                return Err(LinalgError::DimensionMismatch {
                    expected: cols,
                    got: r.len(),
                });
            }
            data.extend_from_slice(r);
        }
        Ok(Self {
            rows: rows.len(),
            cols,
            data,
        })
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        Self { rows, cols, data }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn row_mut(&mut self, i: usize) -> &mut [f64] {
        &mut self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn column(&self, j: usize) -> Vec<f64> {
        (0..self.rows).map(|i| self[(i, j)]).collect()
    }

    pub fn mul_vec(&self, v: &[f64]) -> Result<Vec<f64>, LinalgError> {
        if v.len() != self.cols {
            return Err(LinalgError::DimensionMismatch {
                expected: self.cols,
                got: v.len(),
            });
        }
        Ok((0..self.rows).map(|i| dot(self.row(i), v)).collect())
    }

    pub fn max_abs_diff(&self, other: &DenseMatrix) -> f64 {
        self.data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }

    /// Induced ∞-norm (max row sum).
    pub fn norm_inf(&self) -> f64 {
        (0..self.rows)
            .map(|i| self.row(i).iter().map(|v| v.abs()).sum::<f64>())
            .fold(0.0, f64::max)
    }

    /// Induced 1-norm (max column sum).
    pub fn norm_one(&self) -> f64 {
        (0..self.cols)
            .map(|j| (0..self.rows).map(|i| self[(i, j)].abs()).sum::<f64>())
            .fold(0.0, f64::max)
    }

    pub fn frobenius(&self) -> f64 {
        self.data.iter().map(|v| v * v).sum::<f64>().sqrt()
    }
}

impl Index<(usize, usize)> for DenseMatrix {
    type Output = f64;
    fn index(&self, (i, j): (usize, usize)) -> &f64 {
        &self.data[i * self.cols + j]
    }
}

impl IndexMut<(usize, usize)> for DenseMatrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut f64 {
        &mut self.data[i * self.cols + j]
    }
}

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Square matrix with `a[i][j] == a[j][i]` bit for bit.
#[derive(Debug, Clone, PartialEq)]
pub struct SymmetricMatrix(DenseMatrix);

impl SymmetricMatrix {
    /// Builds from the upper triangle; `f` is called only for `i <= j`.
    pub fn from_upper(dim: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        let mut m = DenseMatrix::zeros(dim, dim);
        for i in 0..dim {
            for j in i..dim {
                let v = f(i, j);
                m[(i, j)] = v;
                m[(j, i)] = v;
            }
        }
        Self(m)
    }

    pub fn try_from_dense(m: DenseMatrix) -> Result<Self, LinalgError> {
        if m.rows != m.cols {
            return Err(LinalgError::DimensionMismatch {
                expected: m.rows,
                got: m.cols,
            });
        }
        for i in 0..m.rows {
            for j in 0..i {
                if m[(i, j)] != m[(j, i)] {
                    return Err(LinalgError::NotSymmetric { row: i, col: j });
                }
            }
        }
        Ok(Self(m))
    }

    pub fn identity(dim: usize) -> Self {
        Self(DenseMatrix::identity(dim))
    }

    pub fn dim(&self) -> usize {
        self.0.rows
    }

    pub fn as_dense(&self) -> &DenseMatrix {
        &self.0
    }

    pub fn mul_vec(&self, v: &[f64]) -> Result<Vec<f64>, LinalgError> {
        self.0.mul_vec(v)
    }
}

impl Index<(usize, usize)> for SymmetricMatrix {
    type Output = f64;
    fn index(&self, idx: (usize, usize)) -> &f64 {
        &self.0[idx]
    }
}

/// Lower-triangular `L` with `A = L·Lᵀ`.
#[derive(Debug, Clone, PartialEq)]
pub struct Cholesky {
    l: DenseMatrix,
}

impl Cholesky {
    pub fn factor(&self) -> &DenseMatrix {
        &self.l
    }

    pub fn dim(&self) -> usize {
        self.l.rows
    }

    pub fn solve(&self, rhs: &[f64]) -> Result<Vec<f64>, LinalgError> {
        let n = self.dim();
        if rhs.len() != n {
            return Err(LinalgError::DimensionMismatch {
                expected: n,
                got: rhs.len(),
            });
        }
        let mut y = rhs.to_vec();
        for i in 0..n {
            let s = dot(&self.l.row(i)[..i], &y[..i]);
            y[i] = (y[i] - s) / self.l[(i, i)];
        }
        for i in (0..n).rev() {
            let s: f64 = (i + 1..n).map(|k| self.l[(k, i)] * y[k]).sum();
            y[i] = (y[i] - s) / self.l[(i, i)];
        }
        Ok(y)
    }

    /// `L·Lᵀ`.
    pub fn reconstruct(&self) -> DenseMatrix {
        let n = self.dim();
        DenseMatrix::from_fn(n, n, |i, j| {
            let k = i.min(j) + 1;
            dot(&self.l.row(i)[..k], &self.l.row(j)[..k])
        })
    }
}

pub fn cholesky(a: &SymmetricMatrix) -> Result<Cholesky, LinalgError> {
    let n = a.dim();
    let mut l = DenseMatrix::zeros(n, n);
    for j in 0..n {
        let d = a[(j, j)] - dot(&l.row(j)[..j], &l.row(j)[..j]);
        if d <= 0.0 || !d.is_finite() {
            return Err(LinalgError::NotPositiveDefinite { pivot: j, value: d });
        }
        let djj = d.sqrt();
        l[(j, j)] = djj;
        for i in j + 1..n {
            let s = a[(i, j)] - dot(&l.row(i)[..j], &l.row(j)[..j]);
            l[(i, j)] = s / djj;
        }
    }
    Ok(Cholesky { l })
}

/// `Pᵀ A P = L D Lᵀ` with diagonal pivoting (largest remaining diagonal).
#[derive(Debug, Clone, PartialEq)]
pub struct Ldlt {
    perm: Vec<usize>,
    l: DenseMatrix,
    d: Vec<f64>,
}

impl Ldlt {
    pub fn solve(&self, rhs: &[f64]) -> Result<Vec<f64>, LinalgError> {
        let n = self.d.len();
        if rhs.len() != n {
            return Err(LinalgError::DimensionMismatch {
                expected: n,
                got: rhs.len(),
            });
        }
        let mut y: Vec<f64> = self.perm.iter().map(|&p| rhs[p]).collect();
        for i in 0..n {
            let s = dot(&self.l.row(i)[..i], &y[..i]);
            y[i] -= s;
        }
        for (yi, di) in y.iter_mut().zip(&self.d) {
            *yi /= di;
        }
        for i in (0..n).rev() {
            let s: f64 = (i + 1..n).map(|k| self.l[(k, i)] * y[k]).sum();
            y[i] -= s;
        }
        let mut x = vec![0.0; n];
        for (i, &p) in self.perm.iter().enumerate() {
            x[p] = y[i];
        }
        Ok(x)
    }
}

pub fn ldlt(a: &SymmetricMatrix) -> Result<Ldlt, LinalgError> {
    let n = a.dim();
    let mut w = a.as_dense().clone();
    let mut perm: Vec<usize> = (0..n).collect();
    let scale = (0..n).map(|i| a[(i, i)].abs()).fold(0.0, f64::max);
    let mut l = DenseMatrix::identity(n);
    let mut d = vec![0.0; n];
    for k in 0..n {
        let p = (k..n)
            .max_by(|&i, &j| w[(i, i)].abs().total_cmp(&w[(j, j)].abs()))
            .unwrap_or(k);
        if p != k {
            swap_sym(&mut w, k, p);
            perm.swap(k, p);
            for c in 0..k {
                let t = l[(k, c)];
                l[(k, c)] = l[(p, c)];
                l[(p, c)] = t;
            }
        }
        let dk = w[(k, k)];
        if dk.abs() <= f64::EPSILON * scale * n as f64 || !dk.is_finite() {
            return Err(LinalgError::Singular { pivot: k });
        }
        d[k] = dk;
        for i in k + 1..n {
            l[(i, k)] = w[(i, k)] / dk;
        }
        for i in k + 1..n {
            for j in k + 1..=i {
                let v = w[(i, j)] - l[(i, k)] * dk * l[(j, k)];
                w[(i, j)] = v;
                w[(j, i)] = v;
            }
        }
    }
    Ok(Ldlt { perm, l, d })
}

fn swap_sym(w: &mut DenseMatrix, a: usize, b: usize) {
    let n = w.rows;
    for j in 0..n {
        let t = w[(a, j)];
        w[(a, j)] = w[(b, j)];
        w[(b, j)] = t;
    }
    for i in 0..n {
        let t = w[(i, a)];
        w[(i, a)] = w[(i, b)];
        w[(i, b)] = t;
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Factorization {
    Cholesky(Cholesky),
    Ldlt(Ldlt),
}

impl Factorization {
    pub fn solve(&self, rhs: &[f64]) -> Result<Vec<f64>, LinalgError> {
        match self {
            Factorization::Cholesky(c) => c.solve(rhs),
            Factorization::Ldlt(f) => f.solve(rhs),
        }
    }

    pub fn is_cholesky(&self) -> bool {
        matches!(self, Factorization::Cholesky(_))
    }
}

/// Cholesky, falling back to pivoted LDLᵀ when a pivot is not positive.
pub fn factorize(a: &SymmetricMatrix) -> Result<Factorization, LinalgError> {
    match cholesky(a) {
        Ok(c) => Ok(Factorization::Cholesky(c)),
        Err(LinalgError::NotPositiveDefinite { pivot, value }) => {
            warn!(
                "Cholesky failed at pivot {pivot} (value {value:e}); falling back to pivoted LDL^T"
            );
            Ok(Factorization::Ldlt(ldlt(a)?))
        }
        Err(e) => Err(e),
    }
}

/// Scaled residual `‖A·x − b‖∞ / (‖A‖∞‖x‖∞ + ‖b‖∞)`.
pub fn relative_residual(a: &SymmetricMatrix, x: &[f64], b: &[f64]) -> Result<f64, LinalgError> {
    let ax = a.mul_vec(x)?;
    let r = ax
        .iter()
        .zip(b)
        .map(|(p, q)| (p - q).abs())
        .fold(0.0, f64::max);
    let denom = a.as_dense().norm_inf() * max_abs(x) + max_abs(b);
    Ok(if denom == 0.0 { r } else { r / denom })
}

fn max_abs(v: &[f64]) -> f64 {
    v.iter().fold(0.0, |m, x| m.max(x.abs()))
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolveOutcome {
    pub x: Vec<f64>,
    pub used_cholesky: bool,
    /// Scaled residual of the direct solve.
    pub residual_direct: f64,
    /// Scaled residual after one refinement step (the returned `x`).
    pub residual: f64,
}

/// Factor, solve, and apply one step of iterative refinement. The refined
/// iterate is kept only when it does not increase the residual.
pub fn solve_symmetric(a: &SymmetricMatrix, b: &[f64]) -> Result<SolveOutcome, LinalgError> {
    if b.len() != a.dim() {
        return Err(LinalgError::DimensionMismatch {
            expected: a.dim(),
            got: b.len(),
        });
    }
    let fact = factorize(a)?;
    let x0 = fact.solve(b)?;
    let r0 = relative_residual(a, &x0, b)?;
    let ax = a.mul_vec(&x0)?;
    let resid: Vec<f64> = b.iter().zip(&ax).map(|(p, q)| p - q).collect();
    let dx = fact.solve(&resid)?;
    let x1: Vec<f64> = x0.iter().zip(&dx).map(|(p, q)| p + q).collect();
    let r1 = relative_residual(a, &x1, b)?;
    let (x, residual) = if r1 <= r0 { (x1, r1) } else { (x0, r0) };
    Ok(SolveOutcome {
        x,
        used_cholesky: fact.is_cholesky(),
        residual_direct: r0,
        residual,
    })
}

/// 1-norm condition number estimate `‖A‖₁·est(‖A⁻¹‖₁)` (Hager's method).
pub fn condition_estimate(a: &SymmetricMatrix) -> Result<f64, LinalgError> {
    let n = a.dim();
    if n == 0 {
        return Ok(0.0);
    }
    let fact = factorize(a)?;
    let mut x = vec![1.0 / n as f64; n];
    let mut est = 0.0;
    for _ in 0..5 {
        let y = fact.solve(&x)?;
        est = y.iter().map(|v| v.abs()).sum::<f64>();
        let xi: Vec<f64> = y
            .iter()
            .map(|v| if *v >= 0.0 { 1.0 } else { -1.0 })
            .collect();
        // A is symmetric, so A⁻ᵀ = A⁻¹.
        let z = fact.solve(&xi)?;
        let (jmax, zmax) = z.iter().enumerate().map(|(j, v)| (j, v.abs())).fold(
            (0, f64::NEG_INFINITY),
            |acc, c| if c.1 > acc.1 { c } else { acc },
        );
        if zmax <= dot(&z, &x) {
            break;
        }
        x = vec![0.0; n];
        x[jmax] = 1.0;
    }
    Ok(a.as_dense().norm_one() * est)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};

    fn random_spd(n: usize, seed: u64) -> SymmetricMatrix {
        let mut rng = rand::rngs::StdRng::seed_from_u64(seed);
        let b = DenseMatrix::from_fn(n, n, |_, _| rng.gen_range(-1.0..1.0));
        SymmetricMatrix::from_upper(n, |i, j| {
            dot(b.row(i), b.row(j)) + if i == j { n as f64 * 0.1 } else { 0.0 }
        })
    }

    #[test]
    fn identity_factor() {
        let c = cholesky(&SymmetricMatrix::identity(4)).unwrap();
        assert_eq!(c.factor(), &DenseMatrix::identity(4));
        let v = vec![1.0, -2.0, 3.5, 0.25];
        assert_eq!(c.solve(&v).unwrap(), v);
    }

    #[test]
    fn two_by_two_by_hand() {
        let a = SymmetricMatrix::from_upper(2, |i, j| [[4.0, 2.0], [2.0, 3.0]][i][j]);
        let c = cholesky(&a).unwrap();
        let l = c.factor();
        assert_eq!(l[(0, 0)], 2.0);
        assert_eq!(l[(0, 1)], 0.0);
        assert_eq!(l[(1, 0)], 1.0);
        assert!((l[(1, 1)] - 2f64.sqrt()).abs() < 1e-15);
    }

    #[test]
    fn not_positive_definite() {
        let a = SymmetricMatrix::from_upper(2, |i, j| [[1.0, 2.0], [2.0, 1.0]][i][j]);
        assert!(matches!(
            cholesky(&a),
            Err(LinalgError::NotPositiveDefinite { pivot: 1, .. })
        ));
    }

    #[test]
    fn manufactured_solution() {
        let a = random_spd(10, 3);
        let known: Vec<f64> = (0..10).map(|i| (i as f64 * 0.7).cos()).collect();
        let rhs = a.mul_vec(&known).unwrap();
        let out = solve_symmetric(&a, &rhs).unwrap();
        assert!(out.used_cholesky);
        for (x, k) in out.x.iter().zip(&known) {
            assert!((x - k).abs() < 1e-9);
        }
        assert!(out.residual <= 1e-10);
        let recon = cholesky(&a).unwrap().reconstruct();
        assert!(recon.max_abs_diff(a.as_dense()) / a.as_dense().frobenius() < 1e-12);
    }

    #[test]
    fn zero_rhs_and_mismatch() {
        let a = random_spd(5, 9);
        assert_eq!(solve_symmetric(&a, &[0.0; 5]).unwrap().x, vec![0.0; 5]);
        assert_eq!(
            cholesky(&a).unwrap().solve(&[1.0; 4]).unwrap_err(),
            LinalgError::DimensionMismatch {
                expected: 5,
                got: 4
            }
        );
    }

    #[test]
    fn ldlt_handles_indefinite() {
        let a = SymmetricMatrix::from_upper(3, |i, j| {
            [[1.0, 2.0, 0.5], [2.0, 1.0, -1.0], [0.5, -1.0, 3.0]][i][j]
        });
        let known = vec![1.0, -1.0, 2.0];
        let rhs = a.mul_vec(&known).unwrap();
        let x = ldlt(&a).unwrap().solve(&rhs).unwrap();
        for (p, q) in x.iter().zip(&known) {
            assert!((p - q).abs() < 1e-12);
        }
        let out = solve_symmetric(&a, &rhs).unwrap();
        assert!(!out.used_cholesky);
    }

    #[test]
    fn ldlt_singular() {
        let a = SymmetricMatrix::from_upper(2, |_, _| 1.0);
        assert!(matches!(ldlt(&a), Err(LinalgError::Singular { .. })));
    }

    #[test]
    fn condition_of_simple_matrices() {
        let c = condition_estimate(&SymmetricMatrix::identity(6)).unwrap();
        assert!((0.5..=2.0).contains(&c));
        let d = SymmetricMatrix::from_upper(2, |i, j| if i == j { [1.0, 1e6][i] } else { 0.0 });
        let c = condition_estimate(&d).unwrap();
        assert!((0.5e6..=2e6).contains(&c), "{c}");
    }

    #[test]
    fn symmetry_check() {
        let m = DenseMatrix::from_rows(&[vec![1.0, 2.0], vec![2.0000001, 1.0]]).unwrap();
        assert_eq!(
            SymmetricMatrix::try_from_dense(m).unwrap_err(),
            LinalgError::NotSymmetric { row: 1, col: 0 }
        );
    }
}

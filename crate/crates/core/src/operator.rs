//! Closed-form action of `R = ∫₋₁¹ e^{−|x−y|} · dy` on the boundary deltas
//! and on the hat functions.
//!
//! For a basis function `φ` the response at `x` splits into
//!
//! * `C(x) = ∫₋₁ˣ e^{−(x−y)} φ(y) dy` (mass to the left of `x`),
//! * `B(x) = ∫ₓ¹ e^{−(y−x)} φ(y) dy` (mass to the right of `x`),
//!
//! with `(Rφ)(x) = B + C` and `(Rφ)′(x) = B − C`. Every piece of `φ` is
//! linear, so each integral reduces to `∫₀^L e^{±t}(α + βt) dt`, evaluated
//! through [`exp_moment`] without cancellation for short pieces.

use rayon::prelude::*;
use thiserror::Error;

use crate::basis::{BasisError, LinearPiece, SplineBasis};
use crate::discretize::Grid;
use crate::linalg::{DenseMatrix, LinalgError};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum OperatorError {
    #[error(transparent)]
    Basis(#[from] BasisError),
    #[error("basis has {basis} functions but the grid expects {grid}")]
    BasisMismatch { basis: usize, grid: usize },
    #[error(transparent)]
    Linalg(#[from] LinalgError),
}

/// Boundary delta locations.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DeltaSite {
    /// `δ(x + 1)`
    Left,
    /// `δ(x − 1)`
    Right,
}

/// `R δ(·+1) = e^{−(x+1)}`, `R δ(·−1) = e^{−(1−x)}`.
pub fn q_delta(site: DeltaSite, x: f64) -> f64 {
    match site {
        DeltaSite::Left => (-(x + 1.0)).exp(),
        DeltaSite::Right => (-(1.0 - x)).exp(),
    }
}

/// Derivative of [`q_delta`] in `x`.
pub fn q_delta_deriv(site: DeltaSite, x: f64) -> f64 {
    match site {
        DeltaSite::Left => -q_delta(site, x),
        DeltaSite::Right => q_delta(site, x),
    }
}

/// `∫₀¹ u^k e^{zu} du` for `k ∈ {0, 1}`.
pub fn exp_moment(k: u32, z: f64) -> f64 {
    match k {
        0 => {
            if z == 0.0 {
                1.0
            } else {
                z.exp_m1() / z
            }
        }
        1 => {
            if z.abs() < 0.5 {
                // Σ_j z^j / (j! (j + 2))
                let mut term = 1.0;
                let mut sum = 0.5;
                for j in 1..40 {
                    term *= z / j as f64;
                    let add = term / (j as f64 + 2.0);
                    sum += add;
                    if add.abs() < 1e-17 * sum.abs() {
                        break;
                    }
                }
                sum
            } else {
                (z * z.exp() - z.exp_m1()) / (z * z)
            }
        }
        _ => unimplemented!("only zeroth and first moments are needed"),
    }
}

/// `∫_a^b e^{σ(t−a)} φ(t) dt` for a linear piece, `σ = ±1`.
fn piece_integral(p: &LinearPiece, sigma: f64) -> f64 {
    let len = p.b - p.a;
    let z = sigma * len;
    len * (p.left * exp_moment(0, z) + (p.right - p.left) * exp_moment(1, z))
}

/// The two one-sided parts of `(Rφ_j)(x)`.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct KernelSplit {
    /// `∫ₓ¹ e^{−(y−x)} φ(y) dy`
    pub forward: f64,
    /// `∫₋₁ˣ e^{−(x−y)} φ(y) dy`
    pub backward: f64,
}

impl KernelSplit {
    pub fn value(&self) -> f64 {
        self.forward + self.backward
    }

    pub fn deriv(&self) -> f64 {
        self.forward - self.backward
    }
}

/// Splits `(Rφ_j)(x)` into its left and right contributions.
pub fn q_basis_split(basis: &SplineBasis, j: usize, x: f64) -> Result<KernelSplit, OperatorError> {
    let mut out = KernelSplit::default();
    for piece in basis.pieces(j)? {
        if let Some(p) = piece.restrict(f64::NEG_INFINITY, x) {
            // ∫_a^b e^{−(x−y)} φ = e^{−(x−b)} ∫_a^b e^{−(b−y)} φ; anchor at the
            // end nearest x so the prefactor never exceeds one.
            let reversed = LinearPiece {
                a: p.a,
                b: p.b,
                left: p.right,
                right: p.left,
            };
            out.backward += (-(x - p.b)).exp() * piece_integral(&reversed, -1.0);
        }
        if let Some(p) = piece.restrict(x, f64::INFINITY) {
            out.forward += (-(p.a - x)).exp() * piece_integral(&p, -1.0);
        }
    }
    Ok(out)
}

/// `(Rφ_j)(x)`.
pub fn q_basis(basis: &SplineBasis, j: usize, x: f64) -> Result<f64, OperatorError> {
    Ok(q_basis_split(basis, j, x)?.value())
}

/// `(Rφ_j)′(x)`.
pub fn q_basis_deriv(basis: &SplineBasis, j: usize, x: f64) -> Result<f64, OperatorError> {
    Ok(q_basis_split(basis, j, x)?.deriv())
}

/// Full moments `∫ e^{±y} φ_j` and the one-sided integrals at every
/// collocation point.
#[derive(Debug, Clone, PartialEq)]
pub struct KernelMoments {
    /// `∫ e^{y} φ_j(y) dy`
    pub exp_plus: Vec<f64>,
    /// `∫ e^{−y} φ_j(y) dy`
    pub exp_minus: Vec<f64>,
    /// `B[l][j] = ∫_{x_l}^1 e^{−(y−x_l)} φ_j`, shape `n × m`.
    pub forward: DenseMatrix,
    /// `C[l][j] = ∫_{−1}^{x_l} e^{−(x_l−y)} φ_j`, shape `n × m`.
    pub backward: DenseMatrix,
}

impl KernelMoments {
    pub fn compute(grid: &Grid, basis: &SplineBasis) -> Result<Self, OperatorError> {
        check_dims(grid, basis)?;
        let m = basis.m();
        let mut exp_plus = Vec::with_capacity(m);
        let mut exp_minus = Vec::with_capacity(m);
        for j in 0..m {
            let (mut plus, mut minus) = (0.0, 0.0);
            for p in basis.pieces(j)? {
                plus += p.a.exp() * piece_integral(&p, 1.0);
                minus += (-p.a).exp() * piece_integral(&p, -1.0);
            }
            exp_plus.push(plus);
            exp_minus.push(minus);
        }
        let n = grid.n();
        let mut forward = DenseMatrix::zeros(n, m);
        let mut backward = DenseMatrix::zeros(n, m);
        for (l, &x) in grid.points().iter().enumerate() {
            for j in 0..m {
                let s = q_basis_split(basis, j, x)?;
                forward[(l, j)] = s.forward;
                backward[(l, j)] = s.backward;
            }
        }
        Ok(Self {
            exp_plus,
            exp_minus,
            forward,
            backward,
        })
    }
}

fn check_dims(grid: &Grid, basis: &SplineBasis) -> Result<(), OperatorError> {
    if basis.m() != grid.m() {
        return Err(OperatorError::BasisMismatch {
            basis: basis.m(),
            grid: grid.m(),
        });
    }
    Ok(())
}

/// Responses of the `m + 2` unknowns at the collocation points.
///
/// Column order: `δ(x+1)`, `δ(x−1)`, then `φ₀ … φ_{m−1}`. `values` holds
/// `(Rq)(x_i)`, `derivs` holds `(Rq)′(x_i)`.
#[derive(Debug, Clone, PartialEq)]
pub struct SampleMatrices {
    pub values: DenseMatrix,
    pub derivs: DenseMatrix,
}

impl SampleMatrices {
    pub fn n(&self) -> usize {
        self.values.rows()
    }

    pub fn unknowns(&self) -> usize {
        self.values.cols()
    }

    /// `(S·c, T·c)`: the collocated `Rh_m` and `(Rh_m)′`.
    pub fn apply(&self, coeffs: &[f64]) -> Result<(Vec<f64>, Vec<f64>), OperatorError> {
        Ok((self.values.mul_vec(coeffs)?, self.derivs.mul_vec(coeffs)?))
    }
}

pub fn build_sample_matrices(
    grid: &Grid,
    basis: &SplineBasis,
) -> Result<SampleMatrices, OperatorError> {
    check_dims(grid, basis)?;
    let n = grid.n();
    let cols = basis.m() + 2;
    let rows: Vec<(Vec<f64>, Vec<f64>)> = grid
        .points()
        .par_iter()
        .map(|&x| -> Result<_, OperatorError> {
            let mut v = Vec::with_capacity(cols);
            let mut d = Vec::with_capacity(cols);
            for site in [DeltaSite::Left, DeltaSite::Right] {
                v.push(q_delta(site, x));
                d.push(q_delta_deriv(site, x));
            }
            for j in 0..basis.m() {
                let s = q_basis_split(basis, j, x)?;
                v.push(s.value());
                d.push(s.deriv());
            }
            Ok((v, d))
        })
        .collect::<Result<_, _>>()?;
    let mut values = DenseMatrix::zeros(n, cols);
    let mut derivs = DenseMatrix::zeros(n, cols);
    for (i, (v, d)) in rows.into_iter().enumerate() {
        values.row_mut(i).copy_from_slice(&v);
        derivs.row_mut(i).copy_from_slice(&d);
    }
    Ok(SampleMatrices { values, derivs })
}

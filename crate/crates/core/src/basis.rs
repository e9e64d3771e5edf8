//! Linear B-spline ("hat") basis on every other collocation point.
//!
//! Knots sit at the odd collocation points `x₁, x₃, …` plus the right end
//! point, so there are `m = n/2 + 1` of them with spacing `2s = 4/n`.
//! Indices are zero-based: `φ₀` is the half-hat at `−1`, `φ_{m−1}` the
//! half-hat at `1`.

use thiserror::Error;

use crate::discretize::Grid;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum BasisError {
    #[error("basis index {index} out of range (m = {m})")]
    IndexOutOfRange { index: usize, m: usize },
    #[error("expected {expected} coefficients, got {got}")]
    CoefficientLength { expected: usize, got: usize },
}

#[derive(Debug, Clone, PartialEq)]
pub struct SplineBasis {
    knots: Vec<f64>,
    knot_spacing: f64,
}

/// A linear segment of a basis function: value `left` at `a`, `right` at `b`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinearPiece {
    pub a: f64,
    pub b: f64,
    pub left: f64,
    pub right: f64,
}

impl LinearPiece {
    pub fn value(&self, x: f64) -> f64 {
        let t = (x - self.a) / (self.b - self.a);
        self.left + (self.right - self.left) * t
    }

    /// The same linear function restricted to `[lo, hi] ∩ [a, b]`.
    pub fn restrict(&self, lo: f64, hi: f64) -> Option<LinearPiece> {
        let a = self.a.max(lo);
        let b = self.b.min(hi);
        if b <= a {
            return None;
        }
        let left = if a == self.a {
            self.left
        } else {
            self.value(a)
        };
        let right = if b == self.b {
            self.right
        } else {
            self.value(b)
        };
        Some(LinearPiece { a, b, left, right })
    }
}

impl SplineBasis {
    pub fn new(grid: &Grid) -> Self {
        let m = grid.m();
        let knot_spacing = 2.0 * grid.spacing();
        let mut knots: Vec<f64> = (0..m).map(|j| -1.0 + j as f64 * knot_spacing).collect();
        knots[m - 1] = 1.0;
        Self {
            knots,
            knot_spacing,
        }
    }

    pub fn m(&self) -> usize {
        self.knots.len()
    }

    pub fn knots(&self) -> &[f64] {
        &self.knots
    }

    pub fn knot_spacing(&self) -> f64 {
        self.knot_spacing
    }

    fn check(&self, j: usize) -> Result<(), BasisError> {
        if j >= self.m() {
            return Err(BasisError::IndexOutOfRange {
                index: j,
                m: self.m(),
            });
        }
        Ok(())
    }

    /// The (one or two) linear pieces making up `φ_j`.
    pub fn pieces(&self, j: usize) -> Result<Vec<LinearPiece>, BasisError> {
        self.check(j)?;
        let mut out = Vec::with_capacity(2);
        if j > 0 {
            out.push(LinearPiece {
                a: self.knots[j - 1],
                b: self.knots[j],
                left: 0.0,
                right: 1.0,
            });
        }
        if j + 1 < self.m() {
            out.push(LinearPiece {
                a: self.knots[j],
                b: self.knots[j + 1],
                left: 1.0,
                right: 0.0,
            });
        }
        Ok(out)
    }

    pub fn support(&self, j: usize) -> Result<(f64, f64), BasisError> {
        self.check(j)?;
        let lo = self.knots[j.saturating_sub(1)];
        let hi = self.knots[(j + 1).min(self.m() - 1)];
        Ok((lo, hi))
    }

    /// `φ_j(x)`.
    pub fn eval(&self, j: usize, x: f64) -> Result<f64, BasisError> {
        self.check(j)?;
        let (lo, hi) = self.support(j)?;
        if x < lo || x > hi {
            return Ok(0.0);
        }
        let k = &self.knots;
        // Measure from the outer knot so the value is exactly 0 there and
        // exactly 1 at the peak.
        let v = if x <= k[j] {
            if j == 0 {
                1.0
            } else {
                (x - k[j - 1]) / (k[j] - k[j - 1])
            }
        } else {
            (k[j + 1] - x) / (k[j + 1] - k[j])
        };
        Ok(v.clamp(0.0, 1.0))
    }

    /// Knot interval `[knot_l, knot_{l+1}]` holding `x` and the position of
    /// `x` inside it in `[0, 1]`. A point on a shared knot belongs to the
    /// interval on its left.
    pub fn locate(&self, x: f64) -> (usize, f64) {
        let t = (x + 1.0) / self.knot_spacing;
        let last = self.m() - 2;
        let l = if t <= 0.0 {
            0
        } else {
            ((t.ceil() as usize).saturating_sub(1)).min(last)
        };
        (l, (t - l as f64).clamp(0.0, 1.0))
    }

    /// `Σ_j c_j φ_j(x)`, touching at most two coefficients.
    pub fn eval_combination(&self, coeffs: &[f64], x: f64) -> Result<f64, BasisError> {
        if coeffs.len() != self.m() {
            return Err(BasisError::CoefficientLength {
                expected: self.m(),
                got: coeffs.len(),
            });
        }
        let t = (x + 1.0) / self.knot_spacing;
        let nearest = t.round();
        if (t - nearest).abs() <= 4.0 * f64::EPSILON * t.abs().max(1.0) && nearest >= 0.0 {
            let k = nearest as usize;
            if k < self.m() {
                return Ok(coeffs[k]);
            }
        }
        let (l, frac) = self.locate(x);
        Ok(coeffs[l] * (1.0 - frac) + coeffs[l + 1] * frac)
    }
}

pub fn eval_basis(b: &SplineBasis, j: usize, x: f64) -> Result<f64, BasisError> {
    b.eval(j, x)
}

pub fn eval_continuous_part(b: &SplineBasis, coeffs: &[f64], x: f64) -> Result<f64, BasisError> {
    b.eval_combination(coeffs, x)
}

//! Collocation grid, quadrature weights and the discrete H¹ inner product.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum DiscretizeError {
    #[error("collocation count must be an even integer >= 6, got {0}")]
    InvalidCount(usize),
    #[error("sample length {got} does not match grid size {expected}")]
    LengthMismatch { expected: usize, got: usize },
    #[error("unknown quadrature rule `{0}` (expected `left` or `trapezoid`)")]
    UnknownRule(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum QuadratureRule {
    /// Left Riemann sum, every weight `2/n`.
    #[default]
    LeftRectangle,
    /// Compound trapezoid over `[−1, 1]`. The right end point is not a
    /// collocation point; its sample is replaced by linear extrapolation
    /// from the last two points, which gives weights
    /// `1/n, 2/n, …, 2/n, 1/n, 4/n`.
    Trapezoid,
}

impl fmt::Display for QuadratureRule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            QuadratureRule::LeftRectangle => "left",
            QuadratureRule::Trapezoid => "trapezoid",
        })
    }
}

impl FromStr for QuadratureRule {
    type Err = DiscretizeError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "left" | "left-rectangle" => Ok(QuadratureRule::LeftRectangle),
            "trapezoid" | "trap" => Ok(QuadratureRule::Trapezoid),
            other => Err(DiscretizeError::UnknownRule(other.to_string())),
        }
    }
}

/// Uniform collocation grid `x_j = −1 + j·s`, `j = 0..n`, `s = 2/n`.
#[derive(Debug, Clone, PartialEq)]
pub struct Grid {
    n: usize,
    spacing: f64,
    points: Vec<f64>,
    weights: Vec<f64>,
    rule: QuadratureRule,
}

impl Grid {
    pub fn new(n: usize, rule: QuadratureRule) -> Result<Self, DiscretizeError> {
        if n < 6 || !n.is_multiple_of(2) {
            return Err(DiscretizeError::InvalidCount(n));
        }
        let spacing = 2.0 / n as f64;
        let points = (0..n).map(|j| -1.0 + j as f64 * spacing).collect();
        let weights = match rule {
            QuadratureRule::LeftRectangle => vec![spacing; n],
            QuadratureRule::Trapezoid => {
                let mut w = vec![spacing; n];
                w[0] = 0.5 * spacing;
                w[n - 2] = 0.5 * spacing;
                w[n - 1] = 2.0 * spacing;
                w
            }
        };
        Ok(Self {
            n,
            spacing,
            points,
            weights,
            rule,
        })
    }

    /// Number of collocation points.
    pub fn n(&self) -> usize {
        self.n
    }

    /// Number of spline basis functions, `n/2 + 1`.
    pub fn m(&self) -> usize {
        self.n / 2 + 1
    }

    pub fn spacing(&self) -> f64 {
        self.spacing
    }

    pub fn points(&self) -> &[f64] {
        &self.points
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn rule(&self) -> QuadratureRule {
        self.rule
    }

    fn check(&self, pair: &SampledPair) -> Result<(), DiscretizeError> {
        if pair.len() != self.n {
            return Err(DiscretizeError::LengthMismatch {
                expected: self.n,
                got: pair.len(),
            });
        }
        Ok(())
    }

    /// `Σ w_j (u_j v_j + u′_j v′_j)`.
    pub fn h1_inner(&self, a: &SampledPair, b: &SampledPair) -> Result<f64, DiscretizeError> {
        self.check(a)?;
        self.check(b)?;
        Ok(self
            .weights
            .iter()
            .enumerate()
            .map(|(j, w)| w * (a.values[j] * b.values[j] + a.derivs[j] * b.derivs[j]))
            .sum())
    }

    /// `Σ w_j (u_j² + u′_j²)`.
    pub fn h1_norm_sq(&self, a: &SampledPair) -> Result<f64, DiscretizeError> {
        self.check(a)?;
        Ok(self
            .weights
            .iter()
            .enumerate()
            .map(|(j, w)| w * (a.values[j] * a.values[j] + a.derivs[j] * a.derivs[j]))
            .sum())
    }

    /// Samples a function and its derivative at the collocation points.
    pub fn sample<E, F>(&self, mut f: F) -> Result<SampledPair, E>
    where
        F: FnMut(f64) -> Result<(f64, f64), E>,
    {
        let mut values = Vec::with_capacity(self.n);
        let mut derivs = Vec::with_capacity(self.n);
        for &x in &self.points {
            let (v, d) = f(x)?;
            values.push(v);
            derivs.push(d);
        }
        Ok(SampledPair { values, derivs })
    }
}

pub fn make_grid(n: usize, rule: QuadratureRule) -> Result<Grid, DiscretizeError> {
    Grid::new(n, rule)
}

pub fn discrete_h1_norm_sq(g: &Grid, pair: &SampledPair) -> Result<f64, DiscretizeError> {
    g.h1_norm_sq(pair)
}

pub fn discrete_h1_inner(
    g: &Grid,
    a: &SampledPair,
    b: &SampledPair,
) -> Result<f64, DiscretizeError> {
    g.h1_inner(a, b)
}

/// Values and derivatives of a function at the collocation points.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct SampledPair {
    pub values: Vec<f64>,
    pub derivs: Vec<f64>,
}

impl SampledPair {
    pub fn new(values: Vec<f64>, derivs: Vec<f64>) -> Result<Self, DiscretizeError> {
        if values.len() != derivs.len() {
            return Err(DiscretizeError::LengthMismatch {
                expected: values.len(),
                got: derivs.len(),
            });
        }
        Ok(Self { values, derivs })
    }

    pub fn zeros(n: usize) -> Self {
        Self {
            values: vec![0.0; n],
            derivs: vec![0.0; n],
        }
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use std::f64::consts::PI;

    #[test]
    fn smallest_grid() {
        let g = make_grid(6, QuadratureRule::LeftRectangle).unwrap();
        let want = [-1.0, -2.0 / 3.0, -1.0 / 3.0, 0.0, 1.0 / 3.0, 2.0 / 3.0];
        for (p, w) in g.points().iter().zip(want) {
            assert!((p - w).abs() < 1e-15);
        }
        assert!(g.weights().iter().all(|&w| (w - 1.0 / 3.0).abs() < 1e-16));
        assert_eq!(g.m(), 4);
    }

    #[test]
    fn table_one_sizes() {
        assert_eq!(
            make_grid(32, QuadratureRule::LeftRectangle).unwrap().m(),
            17
        );
    }

    #[test]
    fn rejects_bad_counts() {
        for n in [0, 2, 4, 5, 7, 33] {
            assert_eq!(
                make_grid(n, QuadratureRule::LeftRectangle).unwrap_err(),
                DiscretizeError::InvalidCount(n)
            );
        }
    }

    #[test]
    fn grid_invariants() {
        for n in (6..=64).step_by(2) {
            for rule in [QuadratureRule::LeftRectangle, QuadratureRule::Trapezoid] {
                let g = make_grid(n, rule).unwrap();
                let p = g.points();
                assert_eq!(p[0], -1.0);
                assert!((p[n - 1] - (1.0 - g.spacing())).abs() < 1e-14);
                assert!(p.windows(2).all(|w| w[1] > w[0]));
                assert!(g.m() + 2 <= n);
                assert!(g.weights().iter().all(|&w| w > 0.0));
                let total: f64 = g.weights().iter().sum();
                assert!((total - 2.0).abs() < 1e-13);
            }
        }
    }

    #[test]
    fn trapezoid_weights() {
        let g = make_grid(8, QuadratureRule::Trapezoid).unwrap();
        let n = 8.0;
        assert_eq!(
            g.weights(),
            &[
                1.0 / n,
                2.0 / n,
                2.0 / n,
                2.0 / n,
                2.0 / n,
                2.0 / n,
                1.0 / n,
                4.0 / n
            ]
        );
    }

    #[test]
    fn norm_of_constants_and_zero() {
        for n in [6, 10, 40] {
            let g = make_grid(n, QuadratureRule::LeftRectangle).unwrap();
            assert_eq!(
                discrete_h1_norm_sq(&g, &SampledPair::zeros(n)).unwrap(),
                0.0
            );
            let one = SampledPair::new(vec![1.0; n], vec![0.0; n]).unwrap();
            assert!((discrete_h1_norm_sq(&g, &one).unwrap() - 2.0).abs() < 1e-14);
        }
    }

    #[test]
    fn norm_of_identity_on_smallest_grid() {
        let g = make_grid(6, QuadratureRule::LeftRectangle).unwrap();
        let pair = g.sample(|x| Ok::<_, ()>((x, 1.0))).unwrap();
        let mut expected = 0.0;
        for x in [-1.0, -2.0 / 3.0, -1.0 / 3.0, 0.0, 1.0 / 3.0, 2.0 / 3.0] {
            expected += (1.0 / 3.0) * (x * x + 1.0);
        }
        let written =
            (1.0 / 3.0) * (1.0 + 4.0 / 9.0 + 1.0 / 9.0 + 0.0 + 1.0 / 9.0 + 4.0 / 9.0) + 2.0;
        let got = discrete_h1_norm_sq(&g, &pair).unwrap();
        assert!((got - expected).abs() < 1e-15);
        assert!((got - written).abs() < 1e-15);
    }

    #[test]
    fn length_mismatch() {
        let g = make_grid(6, QuadratureRule::LeftRectangle).unwrap();
        let bad = SampledPair::zeros(5);
        assert!(matches!(
            discrete_h1_norm_sq(&g, &bad),
            Err(DiscretizeError::LengthMismatch {
                expected: 6,
                got: 5
            })
        ));
        assert!(discrete_h1_inner(&g, &SampledPair::zeros(6), &bad).is_err());
        assert!(SampledPair::new(vec![0.0; 3], vec![0.0; 2]).is_err());
    }

    #[test]
    fn inner_with_zero_and_self() {
        let g = make_grid(10, QuadratureRule::Trapezoid).unwrap();
        let a = g.sample(|x: f64| Ok::<_, ()>((x.sin(), x.cos()))).unwrap();
        assert_eq!(
            discrete_h1_inner(&g, &SampledPair::zeros(10), &a).unwrap(),
            0.0
        );
        assert_eq!(
            discrete_h1_inner(&g, &a, &a).unwrap(),
            discrete_h1_norm_sq(&g, &a).unwrap()
        );
    }

    fn observed_orders(rule: QuadratureRule) -> Vec<f64> {
        // φ = cos(πx²/2) is smooth and not periodic on [−1, 1].
        let phi = |x: f64| {
            let a = 0.5 * PI * x * x;
            (a.cos(), -PI * x * a.sin())
        };
        let exact = {
            let integrand = |x: f64| {
                let (v, d) = phi(x);
                v * v + d * d
            };
            crate::quadrature::adaptive_simpson(integrand, -1.0, 1.0, Default::default()).unwrap()
        };
        // Small n is still pre-asymptotic for the trapezoid variant.
        let errs: Vec<f64> = [32, 64, 128, 256, 512, 1024]
            .iter()
            .map(|&n| {
                let g = make_grid(n, rule).unwrap();
                let s = g.sample(|x| Ok::<_, ()>(phi(x))).unwrap();
                (exact - discrete_h1_norm_sq(&g, &s).unwrap()).abs()
            })
            .collect();
        errs.windows(2).map(|w| (w[0] / w[1]).log2()).collect()
    }

    #[test]
    fn left_rectangle_is_first_order() {
        let orders = observed_orders(QuadratureRule::LeftRectangle);
        assert!(orders.iter().all(|&p| p >= 0.95), "{orders:?}");
    }

    #[test]
    fn trapezoid_is_second_order() {
        let orders = observed_orders(QuadratureRule::Trapezoid);
        assert!(orders.iter().all(|&p| p >= 1.9), "{orders:?}");
    }

    #[test]
    fn periodic_integrand_converges() {
        let phi = |x: f64| ((PI * x).cos(), -PI * (PI * x).sin());
        let exact = 1.0 + PI * PI;
        for rule in [QuadratureRule::LeftRectangle, QuadratureRule::Trapezoid] {
            let mut prev = f64::INFINITY;
            for n in [16, 32, 64, 128, 256] {
                let g = make_grid(n, rule).unwrap();
                let s = g.sample(|x| Ok::<_, ()>(phi(x))).unwrap();
                let err = (exact - discrete_h1_norm_sq(&g, &s).unwrap()).abs();
                assert!(err <= prev + 1e-12);
                prev = err;
            }
            assert!(prev < 1e-3);
        }
    }

    proptest! {
        #[test]
        fn inner_is_symmetric_and_bilinear(
            half in 3usize..20,
            seed in proptest::collection::vec(-10.0f64..10.0, 4 * 40),
            alpha in -3.0f64..3.0,
        ) {
            let n = 2 * half;
            let g = make_grid(n, QuadratureRule::Trapezoid).unwrap();
            let take = |k: usize| SampledPair::new(seed[2 * k * n..(2 * k + 1) * n].to_vec(), seed[(2 * k + 1) * n..(2 * k + 2) * n].to_vec()).unwrap();
            let (a, b) = (take(0), take(1));
            let ab = discrete_h1_inner(&g, &a, &b).unwrap();
            let ba = discrete_h1_inner(&g, &b, &a).unwrap();
            prop_assert_eq!(ab, ba);
            let combo = SampledPair::new(
                a.values.iter().zip(&b.values).map(|(x, y)| alpha * x + y).collect(),
                a.derivs.iter().zip(&b.derivs).map(|(x, y)| alpha * x + y).collect(),
            ).unwrap();
            let lhs = discrete_h1_inner(&g, &combo, &b).unwrap();
            let rhs = alpha * ab + discrete_h1_norm_sq(&g, &b).unwrap();
            prop_assert!((lhs - rhs).abs() <= 1e-12 * (1.0 + lhs.abs()));
        }
    }
}

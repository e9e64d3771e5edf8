//! Error measures of a computed solution against a known exact one.

use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::expr::EvalError;
use crate::problem::ExactSolution;
use crate::solver::ApproxSolution;

/// Default number of evaluation points.
pub const DEFAULT_M: usize = 200;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum MetricsError {
    #[error("need at least 2 evaluation points, got {0}")]
    TooFewPoints(usize),
    #[error("evaluating the exact solution: {0}")]
    Eval(#[from] EvalError),
}

/// Pointwise errors on the uniform grid `t_i = −1 + 2(i−1)/(M−1)`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ErrorReport {
    pub m_points: usize,
    pub points: Vec<f64>,
    pub g_exact: Vec<f64>,
    pub g_approx: Vec<f64>,
    /// `|g_m(t_i) − g(t_i)| / max_i |g(t_i)|`, or the plain absolute error
    /// when `g` vanishes on the grid (see [`ErrorReport::relative`]).
    pub rpe: Vec<f64>,
    /// `max_i rpe_i`.
    pub re: f64,
    /// `(|c₋₁ − a₋₁|, |c₀ − a₀|)`.
    pub coeff_errors: (f64, f64),
    pub dp: f64,
    /// `false` when `g ≡ 0` on the grid and `rpe` holds absolute errors.
    pub relative: bool,
}

/// Uniform evaluation grid on `[−1, 1]` with `m` points, both ends included.
pub fn evaluation_points(m: usize) -> Vec<f64> {
    (0..m)
        .map(|i| {
            if i + 1 == m {
                1.0
            } else {
                -1.0 + i as f64 * 2.0 / (m - 1) as f64
            }
        })
        .collect()
}

pub fn evaluate(
    sol: &ApproxSolution,
    exact: &ExactSolution,
    m: usize,
) -> Result<ErrorReport, MetricsError> {
    if m < 2 {
        return Err(MetricsError::TooFewPoints(m));
    }
    let points = evaluation_points(m);
    let g_exact = points
        .par_iter()
        .map(|&t| exact.g.eval(t))
        .collect::<Result<Vec<_>, _>>()?;
    let g_approx: Vec<f64> = points.iter().map(|&t| sol.eval_continuous(t)).collect();
    let scale = g_exact.iter().fold(0.0f64, |acc, v| acc.max(v.abs()));
    let relative = scale > 0.0;
    let denom = if relative { scale } else { 1.0 };
    let rpe: Vec<f64> = g_exact
        .iter()
        .zip(&g_approx)
        .map(|(e, a)| (a - e).abs() / denom)
        .collect();
    let re = rpe.iter().fold(0.0f64, |acc, &v| acc.max(v));
    Ok(ErrorReport {
        m_points: m,
        points,
        g_exact,
        g_approx,
        rpe,
        re,
        coeff_errors: (
            (sol.c_minus1() - exact.a_minus1).abs(),
            (sol.c_0() - exact.a_0).abs(),
        ),
        dp: sol.dp(),
        relative,
    })
}

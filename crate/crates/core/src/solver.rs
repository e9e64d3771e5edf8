//! Least-squares solve at a fixed collocation count and the adaptive
//! refinement loop on top of it.

use log::{debug, info};
use serde::Serialize;
use thiserror::Error;

use crate::assemble::{build_system, AssembleError, NormalSystem};
use crate::basis::{BasisError, SplineBasis};
use crate::discretize::{make_grid, DiscretizeError, Grid, QuadratureRule, SampledPair};
use crate::expr::EvalError;
use crate::linalg::{solve_symmetric, LinalgError};
use crate::operator::{build_sample_matrices, OperatorError, SampleMatrices};
use crate::problem::Problem;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SolveError {
    #[error("evaluating f: {0}")]
    Eval(#[from] EvalError),
    #[error(transparent)]
    Discretize(#[from] DiscretizeError),
    #[error(transparent)]
    Operator(#[from] OperatorError),
    #[error(transparent)]
    Assemble(#[from] AssembleError),
    #[error("linear solve failed: {0}")]
    Linalg(#[from] LinalgError),
    #[error(transparent)]
    Basis(#[from] BasisError),
    #[error("invalid options: {0}")]
    InvalidOptions(String),
}

/// `h_m = c₋₁ δ(x+1) + c₀ δ(x−1) + Σ_j c_j φ_j`.
#[derive(Debug, Clone, PartialEq)]
pub struct ApproxSolution {
    coeffs: Vec<f64>,
    grid: Grid,
    basis: SplineBasis,
    dp: f64,
    used_cholesky: bool,
    residual: f64,
}

impl ApproxSolution {
    /// All `m + 2` unknowns: `c₋₁`, `c₀`, then the spline coefficients.
    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    pub fn c_minus1(&self) -> f64 {
        self.coeffs[0]
    }

    pub fn c_0(&self) -> f64 {
        self.coeffs[1]
    }

    pub fn spline_coeffs(&self) -> &[f64] {
        &self.coeffs[2..]
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn basis(&self) -> &SplineBasis {
        &self.basis
    }

    pub fn n(&self) -> usize {
        self.grid.n()
    }

    pub fn m(&self) -> usize {
        self.grid.m()
    }

    /// Discrepancy recomputed from the returned coefficients.
    pub fn dp(&self) -> f64 {
        self.dp
    }

    /// Whether the normal equations were solved by Cholesky (as opposed to
    /// the pivoted LDLᵀ fallback).
    pub fn used_cholesky(&self) -> bool {
        self.used_cholesky
    }

    /// Scaled residual of the normal-equations solve.
    pub fn residual(&self) -> f64 {
        self.residual
    }

    /// A copy with the spline coefficients replaced (the stored `dp` is
    /// left unchanged).
    ///
    /// # Panics
    /// If `coeffs.len() != m`.
    pub fn with_spline_coeffs(mut self, coeffs: &[f64]) -> Self {
        assert_eq!(coeffs.len(), self.m(), "spline coefficient count");
        self.coeffs[2..].copy_from_slice(coeffs);
        self
    }

    /// The continuous part `g_m(x)`.
    pub fn eval_continuous(&self, x: f64) -> f64 {
        self.basis
            .eval_combination(self.spline_coeffs(), x)
            .expect("coefficient count matches the basis by construction")
    }
}

/// Everything produced by one fixed-`n` solve.
#[derive(Debug, Clone, PartialEq)]
pub struct FixedSolve {
    pub solution: ApproxSolution,
    pub system: NormalSystem,
    pub matrices: SampleMatrices,
    pub data: SampledPair,
}

/// `f` and `f′` at the collocation points.
pub fn sample_rhs(problem: &Problem, grid: &Grid) -> Result<SampledPair, EvalError> {
    grid.sample(|x| {
        let j = problem.f.eval_jet(x)?;
        if !(j.v.is_finite() && j.d1.is_finite()) {
            return Err(EvalError::NonFinite { x });
        }
        Ok((j.v, j.d1))
    })
}

/// `Σ_l w_l [(f − Sc)_l² + (f′ − Tc)_l²]`.
pub fn compute_dp(
    grid: &Grid,
    sm: &SampleMatrices,
    data: &SampledPair,
    coeffs: &[f64],
) -> Result<f64, SolveError> {
    if data.len() != grid.n() {
        return Err(AssembleError::DimensionMismatch {
            expected: grid.n(),
            got: data.len(),
        }
        .into());
    }
    if sm.values.rows() != grid.n() {
        return Err(AssembleError::DimensionMismatch {
            expected: grid.n(),
            got: sm.values.rows(),
        }
        .into());
    }
    let (sv, tv) = sm.apply(coeffs)?;
    let w = grid.weights();
    Ok((0..grid.n())
        .map(|l| {
            let rv = data.values[l] - sv[l];
            let rd = data.derivs[l] - tv[l];
            w[l] * (rv * rv + rd * rd)
        })
        .sum())
}

/// Solves the least-squares problem on `grid`, keeping the intermediate
/// matrices.
pub fn solve_fixed_n_full(problem: &Problem, grid: &Grid) -> Result<FixedSolve, SolveError> {
    let basis = SplineBasis::new(grid);
    let matrices = build_sample_matrices(grid, &basis)?;
    let data = sample_rhs(problem, grid)?;
    let system = build_system(grid, &matrices, &data)?;
    let outcome = solve_symmetric(&system.a, &system.rhs)?;
    let dp = compute_dp(grid, &matrices, &data, &outcome.x)?;
    debug!(
        "n={} m={} dp={:e} residual={:e} cholesky={}",
        grid.n(),
        grid.m(),
        dp,
        outcome.residual,
        outcome.used_cholesky
    );
    let solution = ApproxSolution {
        coeffs: outcome.x,
        grid: grid.clone(),
        basis,
        dp,
        used_cholesky: outcome.used_cholesky,
        residual: outcome.residual,
    };
    Ok(FixedSolve {
        solution,
        system,
        matrices,
        data,
    })
}

pub fn solve_fixed_n(problem: &Problem, grid: &Grid) -> Result<ApproxSolution, SolveError> {
    Ok(solve_fixed_n_full(problem, grid)?.solution)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct AdaptiveOptions {
    pub epsilon: f64,
    pub n_max: usize,
    pub rule: QuadratureRule,
    /// First collocation count tried.
    pub n_start: usize,
    /// Increment of the collocation count between attempts.
    pub n_step: usize,
}

impl AdaptiveOptions {
    pub fn new(epsilon: f64) -> Self {
        Self {
            epsilon,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<(), SolveError> {
        let bad = |msg: String| Err(SolveError::InvalidOptions(msg));
        if !(self.epsilon.is_finite() && self.epsilon > 0.0) {
            return bad(format!(
                "epsilon must be positive and finite, got {}",
                self.epsilon
            ));
        }
        if self.n_start < 6 || !self.n_start.is_multiple_of(2) {
            return bad(format!(
                "n_start must be even and at least 6, got {}",
                self.n_start
            ));
        }
        if self.n_step == 0 || !self.n_step.is_multiple_of(2) {
            return bad(format!(
                "n_step must be a positive even number, got {}",
                self.n_step
            ));
        }
        if self.n_max < self.n_start || !self.n_max.is_multiple_of(2) {
            return bad(format!(
                "n_max must be even and at least {}, got {}",
                self.n_start, self.n_max
            ));
        }
        Ok(())
    }
}

impl Default for AdaptiveOptions {
    fn default() -> Self {
        Self {
            epsilon: 1e-6,
            n_max: 512,
            rule: QuadratureRule::LeftRectangle,
            n_start: 6,
            n_step: 2,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum RunStatus {
    Converged,
    MaxNReached,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TraceStep {
    pub n: usize,
    pub m: usize,
    pub dp: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunTrace {
    pub steps: Vec<TraceStep>,
    pub status: RunStatus,
}

impl RunTrace {
    pub fn converged(&self) -> bool {
        self.status == RunStatus::Converged
    }
}

/// Increases `n` from `n_start` in steps of `n_step` until the discrepancy
/// drops to `epsilon` or `n_max` is exceeded. Returns the last solution.
pub fn solve_adaptive(
    problem: &Problem,
    opts: &AdaptiveOptions,
) -> Result<(ApproxSolution, RunTrace), SolveError> {
    opts.validate()?;
    let mut steps = Vec::new();
    let mut n = opts.n_start;
    let mut last = None;
    while n <= opts.n_max {
        let grid = make_grid(n, opts.rule)?;
        let sol = solve_fixed_n(problem, &grid)?;
        steps.push(TraceStep {
            n,
            m: grid.m(),
            dp: sol.dp(),
        });
        let done = sol.dp() <= opts.epsilon;
        last = Some(sol);
        if done {
            info!(
                "{}: converged at n={} (dp={:e})",
                problem.label,
                n,
                steps.last().unwrap().dp
            );
            return Ok((
                last.unwrap(),
                RunTrace {
                    steps,
                    status: RunStatus::Converged,
                },
            ));
        }
        n += opts.n_step;
    }
    info!("{}: no convergence up to n={}", problem.label, opts.n_max);
    let sol = last.expect("validated options guarantee at least one iteration");
    Ok((
        sol,
        RunTrace {
            steps,
            status: RunStatus::MaxNReached,
        },
    ))
}

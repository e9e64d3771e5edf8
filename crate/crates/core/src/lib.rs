//! Numerical solution of the first-kind integral equation
//!
//! ```text
//! ∫₋₁¹ e^{−|x−y|} h(y) dy = f(x),   −1 ≤ x ≤ 1,
//! ```
//!
//! whose solution is in general a distribution
//! `h = a₋₁ δ(x+1) + a₀ δ(x−1) + g(x)`. The unknown is approximated by two
//! boundary deltas plus a linear spline on a uniform knot grid; the
//! coefficients minimize a discrete H¹ norm of the residual at `n`
//! collocation points, and `n` is increased until that discrepancy drops
//! below a tolerance.
//!
//! Pipeline: [`problem`] (data and exact solutions) → [`discretize`]
//! (collocation grid and weights) → [`basis`] → [`operator`] (closed-form
//! kernel responses) → [`assemble`] (normal equations) → [`linalg`] →
//! [`solver`] → [`metrics`].

pub mod assemble;
pub mod basis;
pub mod cli;
pub mod discretize;
pub mod expr;
pub mod linalg;
pub mod metrics;
pub mod operator;
pub mod problem;
pub mod quadrature;
pub mod solver;

pub use assemble::{build_system, gram_via_inner_product, NormalSystem};
pub use basis::SplineBasis;
pub use discretize::{make_grid, Grid, QuadratureRule, SampledPair};
pub use expr::{parse, Expr};
pub use metrics::{evaluate, ErrorReport};
pub use operator::{build_sample_matrices, SampleMatrices};
pub use problem::{builtin_example, builtin_examples, exact_from_f, ExactSolution, Problem};
pub use solver::{
    compute_dp, solve_adaptive, solve_fixed_n, AdaptiveOptions, ApproxSolution, RunStatus, RunTrace,
};

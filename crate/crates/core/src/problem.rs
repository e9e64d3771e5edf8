//! Problem instances `∫₋₁¹ e^{−|x−y|} h(y) dy = f(x)` and their analytic
//! solutions.
//!
//! For `f ∈ C²[−1,1]` the solution is
//! `h = a₋₁ δ(x+1) + a₀ δ(x−1) + g(x)` with
//! `a₋₁ = (f(−1) − f′(−1))/2`, `a₀ = (f′(1) + f(1))/2` and
//! `g = (f − f″)/2`.

use std::fmt;

use thiserror::Error;

use crate::expr::{self, EvalError, Expr, ParseError};
use crate::quadrature::{adaptive_simpson, QuadratureError, SimpsonOptions};

#[derive(Debug, Error)]
pub enum ProblemError {
    #[error(transparent)]
    Parse(#[from] ParseError),
    #[error(transparent)]
    Eval(#[from] EvalError),
    #[error(transparent)]
    Quadrature(#[from] QuadratureError),
    #[error("unknown example {0}; built-in examples are 1..=4")]
    UnknownExample(usize),
}

/// The continuous part `g` of an exact solution.
#[derive(Debug, Clone, PartialEq)]
pub enum ContinuousPart {
    /// `g` given directly as an expression.
    Explicit(Expr),
    /// `g = (f − f″)/2`, evaluated through the jet of `f`.
    FromRhs(Expr),
}

impl ContinuousPart {
    pub fn eval(&self, x: f64) -> Result<f64, EvalError> {
        match self {
            ContinuousPart::Explicit(g) => g.eval(x),
            ContinuousPart::FromRhs(f) => {
                let j = f.eval_jet(x)?;
                Ok(0.5 * (j.v - j.d2))
            }
        }
    }
}

impl fmt::Display for ContinuousPart {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ContinuousPart::Explicit(g) => write!(f, "{g}"),
            ContinuousPart::FromRhs(rhs) => write!(f, "((f)-(f''))/2 with f = {rhs}"),
        }
    }
}

/// `h = a₋₁ δ(x+1) + a₀ δ(x−1) + g`.
#[derive(Debug, Clone, PartialEq)]
pub struct ExactSolution {
    pub a_minus1: f64,
    pub a_0: f64,
    pub g: ContinuousPart,
}

impl ExactSolution {
    pub fn has_deltas(&self) -> bool {
        self.a_minus1 != 0.0 || self.a_0 != 0.0
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Problem {
    pub label: String,
    pub f: Expr,
    pub exact: Option<ExactSolution>,
}

impl Problem {
    pub fn new(label: impl Into<String>, f: Expr) -> Self {
        Self {
            label: label.into(),
            f,
            exact: None,
        }
    }

    pub fn from_text(label: impl Into<String>, f: &str) -> Result<Self, ProblemError> {
        Ok(Self::new(label, expr::parse(f)?))
    }

    /// Attaches the analytic solution derived from `f`.
    pub fn with_derived_exact(mut self) -> Result<Self, ProblemError> {
        self.exact = Some(exact_from_f(&self)?);
        Ok(self)
    }
}

/// Analytic solution of the problem, derived from `f` and its first two
/// derivatives.
pub fn exact_from_f(p: &Problem) -> Result<ExactSolution, ProblemError> {
    let left = p.f.eval_jet(-1.0)?;
    let right = p.f.eval_jet(1.0)?;
    Ok(ExactSolution {
        a_minus1: 0.5 * (left.v - left.d1),
        a_0: 0.5 * (right.d1 + right.v),
        g: ContinuousPart::FromRhs(p.f.clone()),
    })
}

struct BuiltinSpec {
    label: &'static str,
    f: &'static str,
    g: &'static str,
    a_minus1: &'static str,
    a_0: &'static str,
}

const BUILTINS: [BuiltinSpec; 4] = [
    BuiltinSpec {
        label: "example 1",
        f: "-2+2*cos(pi*(x+1))",
        g: "-1+(1+pi^2)*cos(pi*(x+1))",
        a_minus1: "0",
        a_0: "0",
    },
    BuiltinSpec {
        label: "example 2",
        f: "-2*exp(x-1)+2/pi*sin(pi*(x+1))+2*cos(pi*(x+1))",
        // (f - f'')/2; the sine coefficient is (π² + 1)/π.
        g: "(pi+1/pi)*sin(pi*(x+1))+(1+pi^2)*cos(pi*(x+1))",
        a_minus1: "0",
        a_0: "0",
    },
    BuiltinSpec {
        label: "example 3",
        f: "cos(pi*(x+1)/2)+4*cos(2*pi*(x+1))-1.5*cos(7*pi*(x+1)/2)",
        g: "0.5*(1+pi^2/4)*cos(pi*(x+1)/2)+(2+8*pi^2)*cos(2*pi*(x+1))-0.75*(1+12.25*pi^2)*cos(7*pi*(x+1)/2)",
        a_minus1: "1.75",
        a_0: "2.25",
    },
    BuiltinSpec {
        label: "example 4",
        f: "exp(-x)+2*sin(2*pi*(x+1))",
        g: "(1+4*pi^2)*sin(2*pi*(x+1))",
        a_minus1: "e-2*pi",
        a_0: "2*pi",
    },
];

/// Built-in example `id` (1-based) with its exact solution attached.
pub fn builtin_example(id: usize) -> Result<Problem, ProblemError> {
    let spec = id
        .checked_sub(1)
        .and_then(|i| BUILTINS.get(i))
        .ok_or(ProblemError::UnknownExample(id))?;
    let constant = |s: &str| -> Result<f64, ProblemError> { Ok(expr::parse(s)?.eval(0.0)?) };
    Ok(Problem {
        label: spec.label.to_string(),
        f: expr::parse(spec.f)?,
        exact: Some(ExactSolution {
            a_minus1: constant(spec.a_minus1)?,
            a_0: constant(spec.a_0)?,
            g: ContinuousPart::Explicit(expr::parse(spec.g)?),
        }),
    })
}

/// The four benchmark problems, in order.
pub fn builtin_examples() -> Vec<Problem> {
    (1..=BUILTINS.len())
        .map(|id| builtin_example(id).expect("built-in expressions are valid"))
        .collect()
}

/// Applies the integral operator to an exact solution at `x`, using
/// adaptive quadrature for the continuous part:
///
/// `a₋₁e^{−(x+1)} + a₀e^{−(1−x)} + e^{−x}∫₋₁ˣ e^y g + e^x∫ₓ¹ e^{−y} g`.
pub fn apply_r_to_exact(e: &ExactSolution, x: f64) -> Result<f64, ProblemError> {
    apply_r_to_exact_with(e, x, SimpsonOptions::default())
}

pub fn apply_r_to_exact_with(
    e: &ExactSolution,
    x: f64,
    opts: SimpsonOptions,
) -> Result<f64, ProblemError> {
    // Evaluate g once up front so domain errors surface as errors rather
    // than NaNs inside the quadrature.
    e.g.eval(x)?;
    let g = |y: f64| e.g.eval(y).unwrap_or(f64::NAN);
    let left = adaptive_simpson(|y| (y - x).exp() * g(y), -1.0, x, opts)?;
    let right = adaptive_simpson(|y| (x - y).exp() * g(y), x, 1.0, opts)?;
    Ok(e.a_minus1 * (-(x + 1.0)).exp() + e.a_0 * (-(1.0 - x)).exp() + left + right)
}

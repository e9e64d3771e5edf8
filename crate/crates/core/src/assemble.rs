//! Normal equations of the discrete least-squares problem.
//!
//! With `S`, `T` the value/derivative response matrices and `W` the
//! quadrature weights, the Gram matrix is `A = SᵀWS + TᵀWT` and the right
//! hand side `F = SᵀWf + TᵀWf′`.

use rayon::prelude::*;
use thiserror::Error;

use crate::discretize::{DiscretizeError, Grid, SampledPair};
use crate::linalg::SymmetricMatrix;
use crate::operator::SampleMatrices;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum AssembleError {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error(transparent)]
    Discretize(#[from] DiscretizeError),
}

#[derive(Debug, Clone, PartialEq)]
pub struct NormalSystem {
    pub a: SymmetricMatrix,
    pub rhs: Vec<f64>,
}

impl NormalSystem {
    pub fn dim(&self) -> usize {
        self.a.dim()
    }
}

fn check(grid: &Grid, sm: &SampleMatrices) -> Result<(), AssembleError> {
    let n = grid.n();
    let cols = grid.m() + 2;
    for (expected, got) in [
        (n, sm.values.rows()),
        (n, sm.derivs.rows()),
        (cols, sm.values.cols()),
        (cols, sm.derivs.cols()),
    ] {
        if expected != got {
            return Err(AssembleError::DimensionMismatch { expected, got });
        }
    }
    Ok(())
}

/// Assembles `A` and `F` directly from the response matrices.
pub fn build_system(
    grid: &Grid,
    sm: &SampleMatrices,
    f: &SampledPair,
) -> Result<NormalSystem, AssembleError> {
    check(grid, sm)?;
    if f.len() != grid.n() {
        return Err(AssembleError::DimensionMismatch {
            expected: grid.n(),
            got: f.len(),
        });
    }
    let dim = sm.unknowns();
    let w = grid.weights();
    // Columns are contiguous in the transposed copies, which keeps the inner
    // loops cache friendly.
    let st: Vec<Vec<f64>> = (0..dim).map(|j| sm.values.column(j)).collect();
    let tt: Vec<Vec<f64>> = (0..dim).map(|j| sm.derivs.column(j)).collect();
    let inner = |i: usize, j: usize| -> f64 {
        (0..grid.n())
            .map(|l| w[l] * (st[i][l] * st[j][l] + tt[i][l] * tt[j][l]))
            .sum()
    };
    let upper: Vec<Vec<f64>> = (0..dim)
        .into_par_iter()
        .map(|i| (i..dim).map(|j| inner(i, j)).collect())
        .collect();
    let a = SymmetricMatrix::from_upper(dim, |i, j| upper[i][j - i]);
    let rhs = (0..dim)
        .map(|i| {
            (0..grid.n())
                .map(|l| w[l] * (f.values[l] * st[i][l] + f.derivs[l] * tt[i][l]))
                .sum()
        })
        .collect();
    Ok(NormalSystem { a, rhs })
}

/// The Gram matrix computed pairwise through the discrete H¹ inner product;
/// an independent path to [`build_system`]'s `A`.
pub fn gram_via_inner_product(
    grid: &Grid,
    sm: &SampleMatrices,
) -> Result<SymmetricMatrix, AssembleError> {
    check(grid, sm)?;
    let dim = sm.unknowns();
    let pairs: Vec<SampledPair> = (0..dim)
        .map(|j| SampledPair {
            values: sm.values.column(j),
            derivs: sm.derivs.column(j),
        })
        .collect();
    let mut upper = vec![vec![0.0; dim]; dim];
    for i in 0..dim {
        for j in i..dim {
            upper[i][j] = grid.h1_inner(&pairs[i], &pairs[j])?;
        }
    }
    Ok(SymmetricMatrix::from_upper(dim, |i, j| upper[i][j]))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::basis::SplineBasis;
    use crate::discretize::{make_grid, QuadratureRule};
    use crate::linalg::{cholesky, DenseMatrix};
    use crate::operator::build_sample_matrices;

    fn setup(n: usize, rule: QuadratureRule) -> (Grid, SampleMatrices) {
        let g = make_grid(n, rule).unwrap();
        let b = SplineBasis::new(&g);
        let sm = build_sample_matrices(&g, &b).unwrap();
        (g, sm)
    }

    #[test]
    fn delta_columns_are_orthogonal() {
        for n in [6, 12, 40] {
            let (g, sm) = setup(n, QuadratureRule::LeftRectangle);
            let sys = build_system(&g, &sm, &SampledPair::zeros(n)).unwrap();
            assert!(sys.a[(0, 1)].abs() < 1e-16);
        }
    }

    #[test]
    fn first_diagonal_entry_by_direct_sum() {
        let (g, sm) = setup(6, QuadratureRule::LeftRectangle);
        let sys = build_system(&g, &sm, &SampledPair::zeros(6)).unwrap();
        let mut want = 0.0;
        for l in 0..6 {
            let x = -1.0 + l as f64 / 3.0;
            want += (1.0 / 3.0) * (-2.0 * (x + 1.0)).exp();
        }
        assert!((sys.a[(0, 0)] - 2.0 * want).abs() < 1e-15);
    }

    #[test]
    fn zero_data_gives_zero_rhs() {
        let (g, sm) = setup(10, QuadratureRule::LeftRectangle);
        let sys = build_system(&g, &sm, &SampledPair::zeros(10)).unwrap();
        assert!(sys.rhs.iter().all(|&v| v == 0.0));
        assert_eq!(sys.dim(), 8);
    }

    #[test]
    fn dual_path_agreement() {
        for rule in [QuadratureRule::LeftRectangle, QuadratureRule::Trapezoid] {
            for n in [6, 20] {
                let (g, sm) = setup(n, rule);
                let sys = build_system(&g, &sm, &SampledPair::zeros(n)).unwrap();
                let gram = gram_via_inner_product(&g, &sm).unwrap();
                assert!(sys.a.as_dense().max_abs_diff(gram.as_dense()) <= 1e-13);
                for i in 0..gram.dim() {
                    assert!(gram[(i, i)] > 0.0);
                    for j in 0..gram.dim() {
                        assert_eq!(gram[(i, j)], gram[(j, i)]);
                    }
                }
            }
        }
    }

    #[test]
    fn matches_explicit_matrix_products() {
        let n = 16;
        let (g, sm) = setup(n, QuadratureRule::LeftRectangle);
        let dim = sm.unknowns();
        let w = g.weights();
        let prod = |m: &DenseMatrix, i: usize, j: usize| -> f64 {
            (0..n).map(|l| m[(l, i)] * w[l] * m[(l, j)]).sum()
        };
        let want = DenseMatrix::from_fn(dim, dim, |i, j| {
            prod(&sm.values, i, j) + prod(&sm.derivs, i, j)
        });
        let sys = build_system(&g, &sm, &SampledPair::zeros(n)).unwrap();
        assert!(sys.a.as_dense().max_abs_diff(&want) <= 1e-12);
    }

    #[test]
    fn rhs_is_projection_of_data() {
        let n = 12;
        let (g, sm) = setup(n, QuadratureRule::LeftRectangle);
        let f = g.sample(|x| Ok::<_, ()>((x.sin(), x.cos()))).unwrap();
        let sys = build_system(&g, &sm, &f).unwrap();
        for i in 0..sm.unknowns() {
            let col = SampledPair {
                values: sm.values.column(i),
                derivs: sm.derivs.column(i),
            };
            let want = g.h1_inner(&f, &col).unwrap();
            assert!((sys.rhs[i] - want).abs() < 1e-14);
        }
    }

    #[test]
    fn positive_definite_across_sizes() {
        for n in (6..=64).step_by(2) {
            let (g, sm) = setup(n, QuadratureRule::LeftRectangle);
            let sys = build_system(&g, &sm, &SampledPair::zeros(n)).unwrap();
            assert!(cholesky(&sys.a).is_ok(), "n = {n}");
        }
    }

    #[test]
    fn dimension_checks() {
        let (g, sm) = setup(6, QuadratureRule::LeftRectangle);
        assert_eq!(
            build_system(&g, &sm, &SampledPair::zeros(5)).unwrap_err(),
            AssembleError::DimensionMismatch {
                expected: 6,
                got: 5
            }
        );
        let (g8, _) = setup(8, QuadratureRule::LeftRectangle);
        assert!(build_system(&g8, &sm, &SampledPair::zeros(8)).is_err());
        assert!(gram_via_inner_product(&g8, &sm).is_err());
    }
}

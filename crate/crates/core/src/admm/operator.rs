use std::sync::Arc;

use nalgebra::DMatrix;

use crate::numerics::{DiagonalMatrix, NumericsError, SparseMatrix};

/// Symmetric linear operator used for step-size matrices and for the
/// quadratic part of each ADMM subproblem.
#[derive(Debug, Clone)]
pub enum SymOperator {
    Zero(usize),
    Diagonal(DiagonalMatrix),
    Dense(DMatrix<f64>),
    /// `diag(shift) + Mᵀ diag(weights) M`. Step-size matrices that cancel the
    /// coupling term (`γI − ΦᵀΦ`, Pock–Chambolle preconditioners) take this
    /// form, and adding `AᵀΣA` for the same `M` collapses back to a diagonal.
    ShiftedGram { shift: Vec<f64>, factor: Arc<SparseMatrix>, weights: Vec<f64> },
}

impl SymOperator {
    pub fn dim(&self) -> usize {
        match self {
            SymOperator::Zero(n) => *n,
            SymOperator::Diagonal(d) => d.dim(),
            SymOperator::Dense(m) => m.nrows(),
            SymOperator::ShiftedGram { shift, .. } => shift.len(),
        }
    }

    pub fn apply(&self, v: &[f64]) -> Result<Vec<f64>, NumericsError> {
        if v.len() != self.dim() {
            return Err(NumericsError::DimensionMismatch { expected: self.dim(), got: v.len() });
        }
        Ok(match self {
            SymOperator::Zero(n) => vec![0.0; *n],
            SymOperator::Diagonal(d) => d.apply(v)?,
            SymOperator::Dense(m) => (m * nalgebra::DVector::from_column_slice(v)).as_slice().to_vec(),
            SymOperator::ShiftedGram { shift, factor, weights } => {
                let mv = factor.mul_vec(v)?;
                let weighted: Vec<f64> = mv.iter().zip(weights).map(|(a, w)| a * w).collect();
                let back = factor.mul_vec_transpose(&weighted)?;
                shift.iter().zip(v).zip(back).map(|((s, x), b)| s * x + b).collect()
            }
        })
    }

    /// The operator as a diagonal, when it is one.
    pub fn as_diagonal(&self) -> Option<Vec<f64>> {
        match self {
            SymOperator::Zero(n) => Some(vec![0.0; *n]),
            SymOperator::Diagonal(d) => Some(d.entries().to_vec()),
            SymOperator::Dense(m) => {
                let n = m.nrows();
                let off_diagonal_zero = (0..n).all(|r| (0..n).all(|c| r == c || m[(r, c)] == 0.0));
                off_diagonal_zero.then(|| (0..n).map(|i| m[(i, i)]).collect())
            }
            SymOperator::ShiftedGram { shift, weights, .. } => {
                weights.iter().all(|&w| w == 0.0).then(|| shift.clone())
            }
        }
    }

    pub fn to_dense(&self) -> DMatrix<f64> {
        match self {
            SymOperator::Zero(n) => DMatrix::zeros(*n, *n),
            SymOperator::Diagonal(d) => d.to_dense(),
            SymOperator::Dense(m) => m.clone(),
            SymOperator::ShiftedGram { shift, factor, weights } => {
                let f = factor.to_dense();
                let mut weighted = f.clone();
                for (r, w) in weights.iter().enumerate() {
                    weighted.row_mut(r).scale_mut(*w);
                }
                let mut out = f.transpose() * weighted;
                for (i, s) in shift.iter().enumerate() {
                    out[(i, i)] += s;
                }
                out
            }
        }
    }

    /// `self + Mᵀ diag(weights) M`, kept structured where possible.
    pub fn plus_gram(&self, factor: &Arc<SparseMatrix>, weights: &[f64]) -> Result<SymOperator, NumericsError> {
        if factor.cols() != self.dim() {
            return Err(NumericsError::DimensionMismatch { expected: self.dim(), got: factor.cols() });
        }
        if weights.len() != factor.rows() {
            return Err(NumericsError::DimensionMismatch { expected: factor.rows(), got: weights.len() });
        }
        if factor.is_diagonal() {
            // Mᵀ W M is diagonal with entries w_i m_ii².
            let mut extra = vec![0.0; self.dim()];
            for (r, _, v) in factor.triplets() {
                extra[r] += weights[r] * v * v;
            }
            return Ok(match self.as_diagonal() {
                Some(d) => SymOperator::Diagonal(DiagonalMatrix::new(
                    d.iter().zip(&extra).map(|(a, b)| a + b).collect(),
                )?),
                None => {
                    let mut m = self.to_dense();
                    for (i, e) in extra.iter().enumerate() {
                        m[(i, i)] += e;
                    }
                    SymOperator::Dense(m)
                }
            });
        }
        let op = match self {
            SymOperator::Zero(n) => SymOperator::ShiftedGram {
                shift: vec![0.0; *n],
                factor: factor.clone(),
                weights: weights.to_vec(),
            },
            SymOperator::Diagonal(d) => SymOperator::ShiftedGram {
                shift: d.entries().to_vec(),
                factor: factor.clone(),
                weights: weights.to_vec(),
            },
            SymOperator::ShiftedGram { shift, factor: own, weights: own_w }
                if Arc::ptr_eq(own, factor) || **own == **factor =>
            {
                SymOperator::ShiftedGram {
                    shift: shift.clone(),
                    factor: own.clone(),
                    weights: own_w.iter().zip(weights).map(|(a, b)| a + b).collect(),
                }
            }
            other => {
                let gram = SymOperator::ShiftedGram {
                    shift: vec![0.0; self.dim()],
                    factor: factor.clone(),
                    weights: weights.to_vec(),
                };
                SymOperator::Dense(other.to_dense() + gram.to_dense())
            }
        };
        Ok(op.simplified())
    }

    /// Collapses a shifted Gram operator whose weights all vanish to its diagonal.
    pub fn simplified(self) -> SymOperator {
        if let SymOperator::ShiftedGram { shift, weights, .. } = &self {
            if weights.iter().all(|&w| w == 0.0) {
                return SymOperator::Diagonal(
                    DiagonalMatrix::new(shift.clone()).expect("shift entries are finite"),
                );
            }
        }
        self
    }

    /// Whether the matrix is cheap to materialize for eigenvalue checks.
    pub fn is_explicit(&self) -> bool {
        !matches!(self, SymOperator::ShiftedGram { .. })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gram_cancellation_collapses_to_diagonal() {
        let phi = Arc::new(
            SparseMatrix::from_triplets(3, 2, [(0, 0, 1.0), (1, 1, 2.0), (2, 0, -1.0), (2, 1, 0.5)]).unwrap(),
        );
        let sigma = 0.3;
        let gamma = 7.0;
        let h = SymOperator::ShiftedGram {
            shift: vec![sigma * gamma; 2],
            factor: phi.clone(),
            weights: vec![-sigma; 3],
        };
        let d = h.plus_gram(&phi, &[sigma; 3]).unwrap();
        assert_eq!(d.as_diagonal().unwrap(), vec![sigma * gamma; 2]);
        assert!(matches!(d, SymOperator::Diagonal(_)));
    }

    #[test]
    fn apply_matches_dense() {
        let phi = Arc::new(SparseMatrix::from_triplets(2, 2, [(0, 0, 1.0), (0, 1, 2.0), (1, 1, 3.0)]).unwrap());
        let op = SymOperator::ShiftedGram { shift: vec![1.0, 2.0], factor: phi, weights: vec![0.5, -1.0] };
        let v = [0.3, -0.7];
        let dense = op.to_dense() * nalgebra::DVector::from_column_slice(&v);
        let got = op.apply(&v).unwrap();
        for (a, b) in got.iter().zip(dense.iter()) {
            assert!((a - b).abs() < 1e-14);
        }
    }

    #[test]
    fn negated_identity_factor_gives_diagonal() {
        let neg = Arc::new(SparseMatrix::identity(3).scaled(-1.0));
        let d = SymOperator::Zero(3).plus_gram(&neg, &[2.0, 3.0, 4.0]).unwrap();
        assert_eq!(d.as_diagonal().unwrap(), vec![2.0, 3.0, 4.0]);
    }
}

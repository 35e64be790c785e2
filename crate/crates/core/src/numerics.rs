//! Linear-algebra substrate shared by every problem instance.
//!
//! Vectors are plain `Vec<f64>` / `&[f64]`. Sparse matrices use a compressed
//! sparse row layout; dense matrices (only needed for validation and small
//! oracle solves) come from `nalgebra`.

use std::fmt::Write as _;
use std::io::{BufRead, Write};

use nalgebra::{DMatrix, SymmetricEigen};
use rayon::prelude::*;
use thiserror::Error;

/// Row count above which matrix-vector products are split across threads.
/// Each output row is computed by exactly one thread in a fixed order, so the
/// result is bit-identical to the sequential product.
const PAR_ROW_THRESHOLD: usize = 4096;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum NumericsError {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("index ({row}, {col}) out of range for a {rows}x{cols} matrix")]
    IndexOutOfRange { row: usize, col: usize, rows: usize, cols: usize },
    #[error("duplicate entry at ({row}, {col})")]
    DuplicateEntry { row: usize, col: usize },
    #[error("non-finite value {value} at position {index}")]
    NonFinite { index: usize, value: f64 },
    #[error("negative diagonal entry {value} at position {index} in a PSD diagonal")]
    NegativeDiagonal { index: usize, value: f64 },
    #[error("matrix is not square ({rows}x{cols})")]
    NotSquare { rows: usize, cols: usize },
    #[error("matrix is not symmetric: max |M - M^T| = {asymmetry:e} exceeds tolerance {tol:e}")]
    NotSymmetric { asymmetry: f64, tol: f64 },
    #[error("matrix is not positive definite")]
    NotPositiveDefinite,
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("malformed matrix text at line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("i/o error: {0}")]
    Io(String),
}

impl From<std::io::Error> for NumericsError {
    fn from(e: std::io::Error) -> Self {
        NumericsError::Io(e.to_string())
    }
}

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    debug_assert_eq!(a.len(), b.len());
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn norm2(v: &[f64]) -> f64 {
    dot(v, v).sqrt()
}

pub fn norm_inf(v: &[f64]) -> f64 {
    v.iter().fold(0.0, |m, x| m.max(x.abs()))
}

/// `a - b`, elementwise.
pub fn sub(a: &[f64], b: &[f64]) -> Vec<f64> {
    debug_assert_eq!(a.len(), b.len());
    a.iter().zip(b).map(|(x, y)| x - y).collect()
}

/// `a + b`, elementwise.
pub fn add(a: &[f64], b: &[f64]) -> Vec<f64> {
    debug_assert_eq!(a.len(), b.len());
    a.iter().zip(b).map(|(x, y)| x + y).collect()
}

fn check_finite(values: &[f64]) -> Result<(), NumericsError> {
    match values.iter().position(|v| !v.is_finite()) {
        Some(index) => Err(NumericsError::NonFinite { index, value: values[index] }),
        None => Ok(()),
    }
}

/// Compressed sparse row matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct SparseMatrix {
    rows: usize,
    cols: usize,
    row_ptr: Vec<usize>,
    col_idx: Vec<usize>,
    values: Vec<f64>,
}

impl SparseMatrix {
    /// Builds a matrix from `(row, col, value)` triples given in any order.
    /// Explicit zeros are kept; duplicates are rejected.
    pub fn from_triplets(
        rows: usize,
        cols: usize,
        triplets: impl IntoIterator<Item = (usize, usize, f64)>,
    ) -> Result<Self, NumericsError> {
        let mut entries: Vec<(usize, usize, f64)> = triplets.into_iter().collect();
        for (i, &(row, col, value)) in entries.iter().enumerate() {
            if row >= rows || col >= cols {
                return Err(NumericsError::IndexOutOfRange { row, col, rows, cols });
            }
            if !value.is_finite() {
                return Err(NumericsError::NonFinite { index: i, value });
            }
        }
        entries.sort_unstable_by_key(|&(r, c, _)| (r, c));
        if let Some(w) = entries.windows(2).find(|w| w[0].0 == w[1].0 && w[0].1 == w[1].1) {
            return Err(NumericsError::DuplicateEntry { row: w[0].0, col: w[0].1 });
        }
        let mut row_ptr = vec![0usize; rows + 1];
        for &(r, _, _) in &entries {
            row_ptr[r + 1] += 1;
        }
        for r in 0..rows {
            row_ptr[r + 1] += row_ptr[r];
        }
        Ok(Self {
            rows,
            cols,
            row_ptr,
            col_idx: entries.iter().map(|e| e.1).collect(),
            values: entries.iter().map(|e| e.2).collect(),
        })
    }

    /// Builds a matrix row by row. Each row is a list of `(col, value)` pairs
    /// with strictly increasing columns.
    pub fn from_rows(cols: usize, rows: Vec<Vec<(usize, f64)>>) -> Result<Self, NumericsError> {
        let n_rows = rows.len();
        let mut row_ptr = Vec::with_capacity(n_rows + 1);
        row_ptr.push(0);
        let nnz = rows.iter().map(Vec::len).sum();
        let mut col_idx = Vec::with_capacity(nnz);
        let mut values = Vec::with_capacity(nnz);
        for (r, row) in rows.into_iter().enumerate() {
            let mut last: Option<usize> = None;
            for (c, v) in row {
                if c >= cols {
                    return Err(NumericsError::IndexOutOfRange { row: r, col: c, rows: n_rows, cols });
                }
                if last.is_some_and(|l| c <= l) {
                    return Err(NumericsError::DuplicateEntry { row: r, col: c });
                }
                if !v.is_finite() {
                    return Err(NumericsError::NonFinite { index: values.len(), value: v });
                }
                last = Some(c);
                col_idx.push(c);
                values.push(v);
            }
            row_ptr.push(col_idx.len());
        }
        Ok(Self { rows: n_rows, cols, row_ptr, col_idx, values })
    }

    /// Stores every entry of a row-major dense array, zeros included.
    pub fn from_dense_row_major(rows: usize, cols: usize, data: Vec<f64>) -> Result<Self, NumericsError> {
        if data.len() != rows * cols {
            return Err(NumericsError::DimensionMismatch { expected: rows * cols, got: data.len() });
        }
        check_finite(&data)?;
        Ok(Self {
            rows,
            cols,
            row_ptr: (0..=rows).map(|r| r * cols).collect(),
            col_idx: (0..rows * cols).map(|i| i % cols).collect(),
            values: data,
        })
    }

    /// Keeps only the nonzero entries of a dense matrix.
    pub fn from_dense(m: &DMatrix<f64>) -> Result<Self, NumericsError> {
        let rows = (0..m.nrows())
            .map(|r| (0..m.ncols()).filter(|&c| m[(r, c)] != 0.0).map(|c| (c, m[(r, c)])).collect())
            .collect();
        Self::from_rows(m.ncols(), rows)
    }

    pub fn identity(n: usize) -> Self {
        Self::diagonal(&vec![1.0; n])
    }

    pub fn diagonal(diag: &[f64]) -> Self {
        let n = diag.len();
        Self {
            rows: n,
            cols: n,
            row_ptr: (0..=n).collect(),
            col_idx: (0..n).collect(),
            values: diag.to_vec(),
        }
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self { rows, cols, row_ptr: vec![0; rows + 1], col_idx: vec![], values: vec![] }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    /// Entries of row `r` as `(col, value)` pairs.
    pub fn row(&self, r: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        let span = self.row_ptr[r]..self.row_ptr[r + 1];
        self.col_idx[span.clone()].iter().copied().zip(self.values[span].iter().copied())
    }

    /// All entries in row-major order.
    pub fn triplets(&self) -> impl Iterator<Item = (usize, usize, f64)> + '_ {
        (0..self.rows).flat_map(move |r| self.row(r).map(move |(c, v)| (r, c, v)))
    }

    pub fn get(&self, r: usize, c: usize) -> f64 {
        let span = self.row_ptr[r]..self.row_ptr[r + 1];
        match self.col_idx[span.clone()].binary_search(&c) {
            Ok(i) => self.values[span.start + i],
            Err(_) => 0.0,
        }
    }

    /// `M v`.
    pub fn mul_vec(&self, v: &[f64]) -> Result<Vec<f64>, NumericsError> {
        if v.len() != self.cols {
            return Err(NumericsError::DimensionMismatch { expected: self.cols, got: v.len() });
        }
        let row_dot = |r: usize| -> f64 { self.row(r).map(|(c, a)| a * v[c]).sum() };
        Ok(if self.rows >= PAR_ROW_THRESHOLD || self.nnz() >= 1 << 18 {
            (0..self.rows).into_par_iter().map(row_dot).collect()
        } else {
            (0..self.rows).map(row_dot).collect()
        })
    }

    /// `Mᵀ v`, accumulated sequentially in row order.
    pub fn mul_vec_transpose(&self, v: &[f64]) -> Result<Vec<f64>, NumericsError> {
        if v.len() != self.rows {
            return Err(NumericsError::DimensionMismatch { expected: self.rows, got: v.len() });
        }
        let mut out = vec![0.0; self.cols];
        for (r, &vr) in v.iter().enumerate() {
            if vr == 0.0 {
                continue;
            }
            for (c, a) in self.row(r) {
                out[c] += a * vr;
            }
        }
        Ok(out)
    }

    /// `M X` where `X` is a `cols x width` row-major block. Used for material
    /// images, where each column of `X` is one material channel.
    pub fn mul_block(&self, x: &[f64], width: usize) -> Result<Vec<f64>, NumericsError> {
        if x.len() != self.cols * width {
            return Err(NumericsError::DimensionMismatch { expected: self.cols * width, got: x.len() });
        }
        let mut out = vec![0.0; self.rows * width];
        let row_block = |(r, out_row): (usize, &mut [f64])| {
            for (c, a) in self.row(r) {
                let xr = &x[c * width..(c + 1) * width];
                for (o, xv) in out_row.iter_mut().zip(xr) {
                    *o += a * xv;
                }
            }
        };
        if width == 0 {
            return Ok(out);
        }
        if self.rows >= PAR_ROW_THRESHOLD {
            out.par_chunks_mut(width).enumerate().for_each(row_block);
        } else {
            out.chunks_mut(width).enumerate().for_each(row_block);
        }
        Ok(out)
    }

    /// `Mᵀ Y` where `Y` is a `rows x width` row-major block.
    pub fn mul_block_transpose(&self, y: &[f64], width: usize) -> Result<Vec<f64>, NumericsError> {
        if y.len() != self.rows * width {
            return Err(NumericsError::DimensionMismatch { expected: self.rows * width, got: y.len() });
        }
        let mut out = vec![0.0; self.cols * width];
        for r in 0..self.rows {
            let yr = &y[r * width..(r + 1) * width];
            for (c, a) in self.row(r) {
                for (o, yv) in out[c * width..(c + 1) * width].iter_mut().zip(yr) {
                    *o += a * yv;
                }
            }
        }
        Ok(out)
    }

    pub fn transpose(&self) -> SparseMatrix {
        let mut rows: Vec<Vec<(usize, f64)>> = vec![Vec::new(); self.cols];
        for (r, c, v) in self.triplets() {
            rows[c].push((r, v));
        }
        SparseMatrix::from_rows(self.rows, rows).expect("transpose of a valid matrix is valid")
    }

    /// `M ⊗ I_width` for row-major block vectors (channel index fastest).
    pub fn kron_identity(&self, width: usize) -> SparseMatrix {
        let mut rows = Vec::with_capacity(self.rows * width);
        for r in 0..self.rows {
            for m in 0..width {
                rows.push(self.row(r).map(|(c, v)| (c * width + m, v)).collect());
            }
        }
        SparseMatrix::from_rows(self.cols * width, rows).expect("kronecker product of a valid matrix is valid")
    }

    /// Submatrix made of the listed rows, in the given order.
    pub fn select_rows(&self, keep: &[usize]) -> SparseMatrix {
        let rows = keep.iter().map(|&r| self.row(r).collect()).collect();
        SparseMatrix::from_rows(self.cols, rows).expect("row selection of a valid matrix is valid")
    }

    pub fn row_sums(&self) -> Vec<f64> {
        (0..self.rows).map(|r| self.row(r).map(|(_, v)| v).sum()).collect()
    }

    pub fn col_sums(&self) -> Vec<f64> {
        let mut out = vec![0.0; self.cols];
        for (_, c, v) in self.triplets() {
            out[c] += v;
        }
        out
    }

    pub fn scaled(&self, alpha: f64) -> SparseMatrix {
        SparseMatrix { values: self.values.iter().map(|v| alpha * v).collect(), ..self.clone() }
    }

    /// True when every stored entry sits on the main diagonal of a square matrix.
    pub fn is_diagonal(&self) -> bool {
        self.rows == self.cols && self.triplets().all(|(r, c, _)| r == c)
    }

    pub fn to_dense(&self) -> DMatrix<f64> {
        let mut m = DMatrix::zeros(self.rows, self.cols);
        for (r, c, v) in self.triplets() {
            m[(r, c)] = v;
        }
        m
    }

    /// Writes the text form: a `rows cols nnz` header followed by one
    /// `row col value` line per stored entry.
    pub fn write_text<W: Write>(&self, mut out: W) -> Result<(), NumericsError> {
        writeln!(out, "{} {} {}", self.rows, self.cols, self.nnz())?;
        let mut line = String::new();
        for (r, c, v) in self.triplets() {
            line.clear();
            writeln!(line, "{r} {c} {v:?}").expect("writing to a String cannot fail");
            out.write_all(line.as_bytes())?;
        }
        Ok(())
    }

    pub fn read_text<R: BufRead>(input: R) -> Result<Self, NumericsError> {
        let mut lines = input
            .lines()
            .enumerate()
            .map(|(i, l)| (i + 1, l))
            .filter(|(_, l)| l.as_ref().map_or(true, |s| !s.trim().is_empty() && !s.trim_start().starts_with('#')));
        let parse_err = |line: usize, message: &str| NumericsError::Parse { line, message: message.to_string() };
        let (hline, header) = lines.next().ok_or_else(|| parse_err(1, "missing header"))?;
        let header = header?;
        let dims: Vec<usize> = header
            .split_whitespace()
            .map(|t| t.parse().map_err(|_| parse_err(hline, "header must be `rows cols nnz`")))
            .collect::<Result<_, _>>()?;
        let [rows, cols, nnz] = dims[..] else {
            return Err(parse_err(hline, "header must be `rows cols nnz`"));
        };
        let mut triplets = Vec::with_capacity(nnz);
        for (lineno, line) in lines {
            let line = line?;
            let toks: Vec<&str> = line.split_whitespace().collect();
            let [r, c, v] = toks[..] else {
                return Err(parse_err(lineno, "expected `row col value`"));
            };
            let r = r.parse().map_err(|_| parse_err(lineno, "bad row index"))?;
            let c = c.parse().map_err(|_| parse_err(lineno, "bad column index"))?;
            let v = v.parse().map_err(|_| parse_err(lineno, "bad value"))?;
            triplets.push((r, c, v));
        }
        if triplets.len() != nnz {
            return Err(NumericsError::Parse {
                line: 0,
                message: format!("header declares {nnz} entries, found {}", triplets.len()),
            });
        }
        Self::from_triplets(rows, cols, triplets)
    }
}

/// Diagonal matrix stored by its diagonal.
#[derive(Debug, Clone, PartialEq)]
pub struct DiagonalMatrix {
    diag: Vec<f64>,
}

impl DiagonalMatrix {
    pub fn new(diag: Vec<f64>) -> Result<Self, NumericsError> {
        check_finite(&diag)?;
        Ok(Self { diag })
    }

    /// Diagonal with every entry `>= 0`.
    pub fn new_psd(diag: Vec<f64>) -> Result<Self, NumericsError> {
        check_finite(&diag)?;
        if let Some(index) = diag.iter().position(|&v| v < 0.0) {
            return Err(NumericsError::NegativeDiagonal { index, value: diag[index] });
        }
        Ok(Self { diag })
    }

    pub fn scalar(n: usize, value: f64) -> Result<Self, NumericsError> {
        Self::new(vec![value; n])
    }

    pub fn dim(&self) -> usize {
        self.diag.len()
    }

    pub fn entries(&self) -> &[f64] {
        &self.diag
    }

    pub fn is_positive_definite(&self) -> bool {
        self.diag.iter().all(|&v| v > 0.0)
    }

    pub fn apply(&self, v: &[f64]) -> Result<Vec<f64>, NumericsError> {
        if v.len() != self.diag.len() {
            return Err(NumericsError::DimensionMismatch { expected: self.diag.len(), got: v.len() });
        }
        Ok(self.diag.iter().zip(v).map(|(d, x)| d * x).collect())
    }

    /// `D⁻¹ v`; requires every diagonal entry to be nonzero.
    pub fn solve(&self, v: &[f64]) -> Result<Vec<f64>, NumericsError> {
        if v.len() != self.diag.len() {
            return Err(NumericsError::DimensionMismatch { expected: self.diag.len(), got: v.len() });
        }
        if self.diag.contains(&0.0) {
            return Err(NumericsError::NotPositiveDefinite);
        }
        Ok(self.diag.iter().zip(v).map(|(d, x)| x / d).collect())
    }

    /// `vᵀ D v`.
    pub fn quad_form(&self, v: &[f64]) -> f64 {
        self.diag.iter().zip(v).map(|(d, x)| d * x * x).sum()
    }

    /// `D ⊗ I_width`.
    pub fn kron_identity(&self, width: usize) -> DiagonalMatrix {
        DiagonalMatrix { diag: self.diag.iter().flat_map(|&d| std::iter::repeat_n(d, width)).collect() }
    }

    pub fn to_dense(&self) -> DMatrix<f64> {
        DMatrix::from_diagonal(&nalgebra::DVector::from_column_slice(&self.diag))
    }
}

/// Options for [`spectral_norm`].
pub const POWER_ITERATION_MAX_ITERS: usize = 10_000;

/// Largest singular value of `m` by power iteration on `MᵀM`.
///
/// Starts from the normalized all-ones vector and stops once successive
/// Rayleigh quotients agree to `rel_tol` (relative) or after
/// [`POWER_ITERATION_MAX_ITERS`] iterations. Deterministic.
pub fn spectral_norm(m: &SparseMatrix, rel_tol: f64) -> Result<f64, NumericsError> {
    if !(rel_tol > 0.0) {
        return Err(NumericsError::InvalidParameter(format!("rel_tol must be positive, got {rel_tol}")));
    }
    if m.cols() == 0 || m.rows() == 0 || m.values.iter().all(|&v| v == 0.0) {
        return Ok(0.0);
    }
    let n = m.cols();
    let mut v = vec![1.0 / (n as f64).sqrt(); n];
    let mut previous = f64::NAN;
    for _ in 0..POWER_ITERATION_MAX_ITERS {
        let mv = m.mul_vec(&v)?;
        let w = m.mul_vec_transpose(&mv)?;
        // v is unit-norm, so the Rayleigh quotient of MᵀM is ‖Mv‖².
        let rayleigh = dot(&mv, &mv);
        let wn = norm2(&w);
        if wn == 0.0 {
            // Start vector lies in the null space; nothing better is reachable deterministically.
            return Ok(rayleigh.sqrt());
        }
        if (rayleigh - previous).abs() < rel_tol * rayleigh {
            return Ok(rayleigh.sqrt());
        }
        previous = rayleigh;
        v = w.into_iter().map(|x| x / wn).collect();
    }
    Ok(previous.sqrt())
}

/// Minimum eigenvalue of a symmetric matrix; errors if it is asymmetric
/// beyond `tol` (entrywise, absolute).
pub fn min_eigenvalue(m: &DMatrix<f64>, tol: f64) -> Result<f64, NumericsError> {
    if m.nrows() != m.ncols() {
        return Err(NumericsError::NotSquare { rows: m.nrows(), cols: m.ncols() });
    }
    if m.nrows() == 0 {
        return Ok(f64::INFINITY);
    }
    let asymmetry = (m - m.transpose()).amax();
    if asymmetry > tol {
        return Err(NumericsError::NotSymmetric { asymmetry, tol });
    }
    let sym = (m + m.transpose()) * 0.5;
    Ok(SymmetricEigen::new(sym).eigenvalues.min())
}

/// `true` iff the symmetric matrix `m` has minimum eigenvalue `>= -tol`.
pub fn check_psd(m: &DMatrix<f64>, tol: f64) -> Result<bool, NumericsError> {
    Ok(min_eigenvalue(m, tol)? >= -tol)
}

/// Solves `A z = b` in place for a small symmetric positive definite `n x n`
/// row-major `a` (overwritten by its Cholesky factor). `b` receives `z`.
pub fn cholesky_solve_small(a: &mut [f64], b: &mut [f64], n: usize) -> Result<(), NumericsError> {
    debug_assert_eq!(a.len(), n * n);
    debug_assert_eq!(b.len(), n);
    for j in 0..n {
        let mut d = a[j * n + j];
        for k in 0..j {
            d -= a[j * n + k] * a[j * n + k];
        }
        if !(d > 0.0) {
            return Err(NumericsError::NotPositiveDefinite);
        }
        let d = d.sqrt();
        a[j * n + j] = d;
        for i in j + 1..n {
            let mut s = a[i * n + j];
            for k in 0..j {
                s -= a[i * n + k] * a[j * n + k];
            }
            a[i * n + j] = s / d;
        }
    }
    for i in 0..n {
        let mut s = b[i];
        for k in 0..i {
            s -= a[i * n + k] * b[k];
        }
        b[i] = s / a[i * n + i];
    }
    for i in (0..n).rev() {
        let mut s = b[i];
        for k in i + 1..n {
            s -= a[k * n + i] * b[k];
        }
        b[i] = s / a[i * n + i];
    }
    Ok(())
}

/// Running vector sum with Kahan compensation.
#[derive(Debug, Clone, PartialEq)]
pub struct CompensatedSum {
    sum: Vec<f64>,
    compensation: Vec<f64>,
    count: usize,
}

impl CompensatedSum {
    pub fn new(dim: usize) -> Self {
        Self { sum: vec![0.0; dim], compensation: vec![0.0; dim], count: 0 }
    }

    pub fn add(&mut self, v: &[f64]) {
        debug_assert_eq!(v.len(), self.sum.len());
        for ((s, c), &x) in self.sum.iter_mut().zip(&mut self.compensation).zip(v) {
            let y = x - *c;
            let t = *s + y;
            *c = (t - *s) - y;
            *s = t;
        }
        self.count += 1;
    }

    pub fn count(&self) -> usize {
        self.count
    }

    pub fn sum(&self) -> &[f64] {
        &self.sum
    }

    /// Mean of everything added so far (zeros before the first `add`).
    pub fn mean(&self) -> Vec<f64> {
        if self.count == 0 {
            return vec![0.0; self.sum.len()];
        }
        let n = self.count as f64;
        self.sum.iter().map(|s| s / n).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_sparse(rng: &mut ChaCha8Rng, rows: usize, cols: usize, density: f64) -> SparseMatrix {
        let mut trips = Vec::new();
        for r in 0..rows {
            for c in 0..cols {
                if rng.random::<f64>() < density {
                    trips.push((r, c, rng.random_range(-1.0..1.0)));
                }
            }
        }
        SparseMatrix::from_triplets(rows, cols, trips).unwrap()
    }

    #[test]
    fn spmv_identity_and_hand_case() {
        let id = SparseMatrix::identity(2);
        assert_eq!(id.mul_vec(&[3.0, -1.0]).unwrap(), vec![3.0, -1.0]);
        let m = SparseMatrix::from_triplets(2, 2, [(0, 0, 1.0), (0, 1, 2.0), (1, 1, 3.0)]).unwrap();
        assert_eq!(m.mul_vec(&[1.0, 1.0]).unwrap(), vec![3.0, 3.0]);
        assert_eq!(m.mul_vec_transpose(&[1.0, 1.0]).unwrap(), vec![1.0, 5.0]);
    }

    #[test]
    fn spmv_matches_dense_oracle() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let m = random_sparse(&mut rng, 50, 30, 0.2);
        let v: Vec<f64> = (0..30).map(|_| rng.random_range(-1.0..1.0)).collect();
        let dense = m.to_dense();
        let oracle = &dense * nalgebra::DVector::from_column_slice(&v);
        let got = m.mul_vec(&v).unwrap();
        for (g, o) in got.iter().zip(oracle.iter()) {
            assert!((g - o).abs() <= 1e-12);
        }
        let w: Vec<f64> = (0..50).map(|_| rng.random_range(-1.0..1.0)).collect();
        let oracle_t = dense.transpose() * nalgebra::DVector::from_column_slice(&w);
        for (g, o) in m.mul_vec_transpose(&w).unwrap().iter().zip(oracle_t.iter()) {
            assert!((g - o).abs() <= 1e-12);
        }
    }

    #[test]
    fn dimension_mismatch_is_error() {
        let m = SparseMatrix::identity(3);
        assert!(matches!(m.mul_vec(&[1.0]), Err(NumericsError::DimensionMismatch { .. })));
        assert!(m.mul_vec_transpose(&[1.0; 4]).is_err());
    }

    #[test]
    fn construction_rejects_bad_triplets() {
        assert!(matches!(
            SparseMatrix::from_triplets(2, 2, [(0, 0, 1.0), (0, 0, 2.0)]),
            Err(NumericsError::DuplicateEntry { .. })
        ));
        assert!(matches!(
            SparseMatrix::from_triplets(2, 2, [(2, 0, 1.0)]),
            Err(NumericsError::IndexOutOfRange { .. })
        ));
        assert!(SparseMatrix::from_triplets(2, 2, [(0, 0, f64::NAN)]).is_err());
    }

    #[test]
    fn degenerate_shapes_produce_zeros() {
        let m = SparseMatrix::zeros(3, 0);
        assert_eq!(m.mul_vec(&[]).unwrap(), vec![0.0; 3]);
        assert_eq!(m.mul_vec_transpose(&[1.0, 2.0, 3.0]).unwrap(), Vec::<f64>::new());
        assert_eq!(spectral_norm(&SparseMatrix::zeros(4, 4), 1e-8).unwrap(), 0.0);
    }

    #[test]
    fn block_products_match_kronecker() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let m = random_sparse(&mut rng, 7, 5, 0.4);
        let width = 3;
        let x: Vec<f64> = (0..5 * width).map(|_| rng.random_range(-1.0..1.0)).collect();
        let k = m.kron_identity(width);
        let a = m.mul_block(&x, width).unwrap();
        let b = k.mul_vec(&x).unwrap();
        for (p, q) in a.iter().zip(&b) {
            assert!((p - q).abs() < 1e-14);
        }
        let y: Vec<f64> = (0..7 * width).map(|_| rng.random_range(-1.0..1.0)).collect();
        let a = m.mul_block_transpose(&y, width).unwrap();
        let b = k.mul_vec_transpose(&y).unwrap();
        for (p, q) in a.iter().zip(&b) {
            assert!((p - q).abs() < 1e-14);
        }
    }

    #[test]
    fn spectral_norm_simple_cases() {
        let id = SparseMatrix::identity(5);
        assert!((spectral_norm(&id, 1e-12).unwrap() - 1.0).abs() < 1e-12);
        let d = SparseMatrix::diagonal(&[3.0, 1.0]);
        assert!((spectral_norm(&d, 1e-14).unwrap() - 3.0).abs() < 1e-6);
    }

    #[test]
    fn spectral_norm_matches_svd_oracle() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let m = random_sparse(&mut rng, 40, 20, 0.3);
        let oracle = m.to_dense().singular_values().max();
        let est = spectral_norm(&m, 1e-12).unwrap();
        assert!(((est - oracle) / oracle).abs() <= 1e-6, "est {est} oracle {oracle}");
    }

    #[test]
    fn psd_checks() {
        assert!(check_psd(&DMatrix::identity(4, 4), 1e-8).unwrap());
        let m = DMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![1.0, -0.5]));
        assert!(!check_psd(&m, 1e-8).unwrap());
        let asym = DMatrix::from_row_slice(2, 2, &[1.0, 0.5, 0.0, 1.0]);
        assert!(matches!(check_psd(&asym, 1e-8), Err(NumericsError::NotSymmetric { .. })));
    }

    #[test]
    fn quantile_step_matrix_is_psd() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let phi = random_sparse(&mut rng, 20, 10, 1.0);
        let gamma = spectral_norm(&phi, 1e-10).unwrap().powi(2) * (1.0 + 1e-6);
        let sigma = 0.7;
        let dense = phi.to_dense();
        let h = (DMatrix::identity(10, 10) * gamma - dense.transpose() * &dense) * sigma;
        let lam_min = min_eigenvalue(&h, 1e-10).unwrap();
        assert!(lam_min >= -1e-8, "min eigenvalue {lam_min}");
        assert!(check_psd(&h, 1e-8).unwrap());
    }

    #[test]
    fn text_round_trip() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let m = random_sparse(&mut rng, 6, 4, 0.5);
        let mut buf = Vec::new();
        m.write_text(&mut buf).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert!(text.starts_with(&format!("6 4 {}\n", m.nnz())));
        let back = SparseMatrix::read_text(std::io::Cursor::new(buf)).unwrap();
        assert_eq!(back, m);
        assert!(SparseMatrix::read_text(std::io::Cursor::new("2 2 2\n0 0 1.0\n")).is_err());
    }

    #[test]
    fn small_cholesky_solves() {
        let mut a = vec![4.0, 1.0, 1.0, 3.0];
        let mut b = vec![1.0, 2.0];
        cholesky_solve_small(&mut a, &mut b, 2).unwrap();
        // [4 1; 1 3]^{-1} [1; 2] = [1/11; 7/11]
        assert!((b[0] - 1.0 / 11.0).abs() < 1e-15);
        assert!((b[1] - 7.0 / 11.0).abs() < 1e-15);
        let mut bad = vec![1.0, 2.0, 2.0, 1.0];
        assert!(cholesky_solve_small(&mut bad, &mut [0.0, 0.0], 2).is_err());
    }

    #[test]
    fn compensated_mean_tracks_exact_average() {
        let mut acc = CompensatedSum::new(1);
        for _ in 0..1_000_000 {
            acc.add(&[0.1]);
        }
        assert!((acc.mean()[0] - 0.1).abs() <= 1e-15);
    }

    proptest::proptest! {
        #[test]
        fn adjoint_identity(seed in 0u64..1000, rows in 1usize..25, cols in 1usize..25) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let m = random_sparse(&mut rng, rows, cols, 0.3);
            let v: Vec<f64> = (0..cols).map(|_| rng.random_range(-1.0..1.0)).collect();
            let w: Vec<f64> = (0..rows).map(|_| rng.random_range(-1.0..1.0)).collect();
            let lhs = dot(&m.mul_vec(&v).unwrap(), &w);
            let rhs = dot(&v, &m.mul_vec_transpose(&w).unwrap());
            let scale = 1.0f64.max(lhs.abs());
            proptest::prop_assert!((lhs - rhs).abs() <= 1e-12 * scale);
        }

        #[test]
        fn spectral_norm_bounds_every_probe(seed in 0u64..500) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let m = random_sparse(&mut rng, 12, 9, 0.5);
            let rel_tol = 1e-10;
            let norm = spectral_norm(&m, rel_tol).unwrap();
            let v: Vec<f64> = (0..9).map(|_| rng.random_range(-1.0..1.0)).collect();
            let ratio = norm2(&m.mul_vec(&v).unwrap()) / norm2(&v);
            // Rayleigh-quotient convergence of rel_tol bounds the norm error by ~sqrt(rel_tol).
            proptest::prop_assert!(ratio <= norm * (1.0 + 1e-4) + 1e-12);
        }
    }
}

//! Dense complex operator algebra over tensor-product spaces.
//!
//! [`Operator`] and [`Vector`] carry an explicit list of tensor-factor
//! dimensions alongside their entries, so Kronecker products, partial
//! traces, and factor permutations can be written once and reused by the
//! spin and bosonic pipelines. The Kronecker convention is fixed globally:
//! the left factor varies slowest (row-major over the factor list).
//!
//! Everything here is dense `Complex64`; the dimensions in this crate top
//! out at a few thousand, where dense arithmetic is both simplest and fast
//! enough.

use ndarray::{Array1, Array2};
use num_complex::Complex64;
use thiserror::Error;

/// Errors from operator-algebra operations.
#[derive(Debug, Error)]
pub enum TensorError {
    #[error("matrix of shape {rows}x{cols} is not square")]
    NotSquare { rows: usize, cols: usize },
    #[error("factor dimensions {dims:?} are inconsistent with length {len}")]
    DimensionMismatch { dims: Vec<usize>, len: usize },
    #[error("factor dimensions must be non-empty with every entry >= 1")]
    EmptyFactors,
    #[error("factor index {index} out of range for {count} factors")]
    FactorOutOfRange { index: usize, count: usize },
    #[error("keep-set must be a non-empty subset of distinct factor indices")]
    BadKeepSet,
    #[error("operator is not Hermitian: max |A - A^dag| = {residual:.3e}")]
    NotHermitian { residual: f64 },
    #[error("factor permutation {perm:?} is not a permutation of 0..{count}")]
    BadPermutation { perm: Vec<usize>, count: usize },
    #[error("block limits {limits:?} invalid for factor dims {dims:?}")]
    BadBlockLimits { limits: Vec<usize>, dims: Vec<usize> },
}

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);

fn product(dims: &[usize]) -> usize {
    dims.iter().product()
}

fn check_factors(dims: &[usize]) -> Result<(), TensorError> {
    if dims.is_empty() || dims.contains(&0) {
        return Err(TensorError::EmptyFactors);
    }
    Ok(())
}

/// Dense square complex matrix over a tensor product of factors.
///
/// The universal currency of the crate: states, effects, projectors, and
/// gates are all `Operator`s. Entries are row-major over the product
/// dimension with the left factor varying slowest.
#[derive(Clone, Debug, PartialEq)]
pub struct Operator {
    factor_dims: Vec<usize>,
    mat: Array2<Complex64>,
}

impl Operator {
    /// Wrap an existing matrix, checking that it is square and that the
    /// factor dimensions multiply out to its side.
    pub fn from_matrix(
        factor_dims: Vec<usize>,
        mat: Array2<Complex64>,
    ) -> Result<Self, TensorError> {
        check_factors(&factor_dims)?;
        let (rows, cols) = mat.dim();
        if rows != cols {
            return Err(TensorError::NotSquare { rows, cols });
        }
        if product(&factor_dims) != rows {
            return Err(TensorError::DimensionMismatch {
                dims: factor_dims,
                len: rows,
            });
        }
        Ok(Self { factor_dims, mat })
    }

    /// Build from row-major entries over the product dimension.
    pub fn from_vec(factor_dims: Vec<usize>, entries: Vec<Complex64>) -> Result<Self, TensorError> {
        check_factors(&factor_dims)?;
        let dim = product(&factor_dims);
        if entries.len() != dim * dim {
            return Err(TensorError::DimensionMismatch {
                dims: factor_dims,
                len: entries.len(),
            });
        }
        let mat = Array2::from_shape_vec((dim, dim), entries).expect("length checked");
        Ok(Self { factor_dims, mat })
    }

    pub fn identity(factor_dims: &[usize]) -> Self {
        check_factors(factor_dims).expect("valid factor dims");
        let dim = product(factor_dims);
        Self {
            factor_dims: factor_dims.to_vec(),
            mat: Array2::from_diag_elem(dim, ONE),
        }
    }

    pub fn zeros(factor_dims: &[usize]) -> Self {
        check_factors(factor_dims).expect("valid factor dims");
        let dim = product(factor_dims);
        Self {
            factor_dims: factor_dims.to_vec(),
            mat: Array2::from_elem((dim, dim), ZERO),
        }
    }

    /// Total (product) dimension.
    pub fn dim(&self) -> usize {
        self.mat.nrows()
    }

    pub fn factor_dims(&self) -> &[usize] {
        &self.factor_dims
    }

    pub fn matrix(&self) -> &Array2<Complex64> {
        &self.mat
    }

    pub fn into_matrix(self) -> Array2<Complex64> {
        self.mat
    }

    /// Reinterpret the factor structure without touching entries. The new
    /// dimensions must multiply out to the same total dimension.
    pub fn with_factor_dims(&self, factor_dims: Vec<usize>) -> Result<Self, TensorError> {
        check_factors(&factor_dims)?;
        if product(&factor_dims) != self.dim() {
            return Err(TensorError::DimensionMismatch {
                dims: factor_dims,
                len: self.dim(),
            });
        }
        Ok(Self {
            factor_dims,
            mat: self.mat.clone(),
        })
    }

    pub fn trace(&self) -> Complex64 {
        self.mat.diag().sum()
    }

    /// Conjugate transpose.
    pub fn dagger(&self) -> Self {
        Self {
            factor_dims: self.factor_dims.clone(),
            mat: self.mat.t().mapv(|z| z.conj()),
        }
    }

    pub fn scaled(&self, factor: Complex64) -> Self {
        Self {
            factor_dims: self.factor_dims.clone(),
            mat: self.mat.mapv(|z| z * factor),
        }
    }

    /// Largest entry magnitude.
    pub fn max_abs(&self) -> f64 {
        self.mat.iter().fold(0.0f64, |m, z| m.max(z.norm()))
    }

    /// Largest entry magnitude of `self - other`.
    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        assert_eq!(self.dim(), other.dim(), "dimension mismatch");
        self.mat
            .iter()
            .zip(other.mat.iter())
            .fold(0.0f64, |m, (a, b)| m.max((a - b).norm()))
    }

    /// Residual against the identity, `max |A - I|`.
    pub fn identity_residual(&self) -> f64 {
        let mut worst = 0.0f64;
        for ((i, j), z) in self.mat.indexed_iter() {
            let target = if i == j { ONE } else { ZERO };
            worst = worst.max((z - target).norm());
        }
        worst
    }

    pub fn hermiticity_residual(&self) -> f64 {
        let n = self.dim();
        let mut worst = 0.0f64;
        for i in 0..n {
            for j in i..n {
                worst = worst.max((self.mat[(i, j)] - self.mat[(j, i)].conj()).norm());
            }
        }
        worst
    }

    pub fn is_hermitian(&self, tol: f64) -> bool {
        self.hermiticity_residual() <= tol
    }

    /// Symmetrized part `(A + A^dag)/2`.
    pub fn hermitized(&self) -> Self {
        let dag = self.dagger();
        Self {
            factor_dims: self.factor_dims.clone(),
            mat: (&self.mat + &dag.mat).mapv(|z| 0.5 * z),
        }
    }

    /// Kronecker product; factor lists concatenate, left factor slowest.
    pub fn tensor_product(&self, other: &Self) -> Self {
        let mut dims = self.factor_dims.clone();
        dims.extend_from_slice(&other.factor_dims);
        Self {
            factor_dims: dims,
            mat: kron(&self.mat, &other.mat),
        }
    }

    /// Trace out every factor not listed in `keep`.
    ///
    /// `keep` is interpreted as a set; the result's factors appear in their
    /// original order. Keeping every factor returns a copy.
    pub fn partial_trace(&self, keep: &[usize]) -> Result<Self, TensorError> {
        let count = self.factor_dims.len();
        let mut keep_sorted = keep.to_vec();
        keep_sorted.sort_unstable();
        keep_sorted.dedup();
        if keep_sorted.is_empty() || keep_sorted.len() != keep.len() {
            return Err(TensorError::BadKeepSet);
        }
        if let Some(&bad) = keep_sorted.iter().find(|&&i| i >= count) {
            return Err(TensorError::FactorOutOfRange {
                index: bad,
                count,
            });
        }

        let strides = row_major_strides(&self.factor_dims);
        let kept: Vec<usize> = keep_sorted;
        let traced: Vec<usize> = (0..count).filter(|i| !kept.contains(i)).collect();
        let kept_dims: Vec<usize> = kept.iter().map(|&i| self.factor_dims[i]).collect();
        let traced_dims: Vec<usize> = traced.iter().map(|&i| self.factor_dims[i]).collect();
        let out_dim = product(&kept_dims);

        // Flat offsets contributed by each kept / traced multi-index.
        let kept_offsets = enumerate_offsets(&kept_dims, &kept, &strides);
        let traced_offsets = enumerate_offsets(&traced_dims, &traced, &strides);

        let mut out = Array2::from_elem((out_dim, out_dim), ZERO);
        for (r, &ro) in kept_offsets.iter().enumerate() {
            for (c, &co) in kept_offsets.iter().enumerate() {
                let mut acc = ZERO;
                for &o in &traced_offsets {
                    acc += self.mat[(ro + o, co + o)];
                }
                out[(r, c)] = acc;
            }
        }
        Ok(Self {
            factor_dims: kept_dims,
            mat: out,
        })
    }

    /// Relabel the tensor factors: factor `perm[k]` of the input becomes
    /// factor `k` of the output.
    pub fn permute_factors(&self, perm: &[usize]) -> Result<Self, TensorError> {
        let count = self.factor_dims.len();
        let mut seen = vec![false; count];
        if perm.len() != count || perm.iter().any(|&p| p >= count || std::mem::replace(&mut seen[p], true)) {
            return Err(TensorError::BadPermutation {
                perm: perm.to_vec(),
                count,
            });
        }
        let new_dims: Vec<usize> = perm.iter().map(|&p| self.factor_dims[p]).collect();
        let strides = row_major_strides(&self.factor_dims);
        let dim = self.dim();
        // map: new flat index -> old flat index
        let mut index_map = vec![0usize; dim];
        let mut multi = vec![0usize; count];
        for (flat, slot) in index_map.iter_mut().enumerate() {
            decode_multi(flat, &new_dims, &mut multi);
            *slot = multi
                .iter()
                .enumerate()
                .map(|(k, &v)| v * strides[perm[k]])
                .sum();
        }
        let mut out = Array2::from_elem((dim, dim), ZERO);
        for r in 0..dim {
            for c in 0..dim {
                out[(r, c)] = self.mat[(index_map[r], index_map[c])];
            }
        }
        Ok(Self {
            factor_dims: new_dims,
            mat: out,
        })
    }

    /// Restrict to the sub-block where factor `f` ranges over
    /// `0..limits[f]` on both sides.
    pub fn restrict(&self, limits: &[usize]) -> Result<Self, TensorError> {
        if limits.len() != self.factor_dims.len()
            || limits
                .iter()
                .zip(&self.factor_dims)
                .any(|(&l, &d)| l == 0 || l > d)
        {
            return Err(TensorError::BadBlockLimits {
                limits: limits.to_vec(),
                dims: self.factor_dims.clone(),
            });
        }
        let strides = row_major_strides(&self.factor_dims);
        let all: Vec<usize> = (0..self.factor_dims.len()).collect();
        let offsets = enumerate_offsets(limits, &all, &strides);
        let out_dim = product(limits);
        let mut out = Array2::from_elem((out_dim, out_dim), ZERO);
        for (r, &ro) in offsets.iter().enumerate() {
            for (c, &co) in offsets.iter().enumerate() {
                out[(r, c)] = self.mat[(ro, co)];
            }
        }
        Ok(Self {
            factor_dims: limits.to_vec(),
            mat: out,
        })
    }

    /// Matrix exponential by scaling-and-squaring with a Pade(13,13)
    /// kernel. Norm reduction keeps the series in its accuracy region, so
    /// large anti-Hermitian generators are safe.
    pub fn matrix_exponential(&self) -> Self {
        Self {
            factor_dims: self.factor_dims.clone(),
            mat: expm(&self.mat),
        }
    }

    /// Eigenvalues of a Hermitian operator, ascending.
    ///
    /// The input is symmetrized as `(A + A^dag)/2` after checking that the
    /// Hermiticity residual is within `1e-10`; a larger residual is an
    /// error. Uses cyclic complex Jacobi rotations.
    pub fn hermitian_eigenvalues(&self) -> Result<Vec<f64>, TensorError> {
        let residual = self.hermiticity_residual();
        if residual > 1e-10 {
            return Err(TensorError::NotHermitian { residual });
        }
        Ok(hermitian_eigenvalues_jacobi(&self.hermitized().mat))
    }

    /// Apply to a vector.
    pub fn apply(&self, v: &Vector) -> Vector {
        assert_eq!(self.dim(), v.dim(), "dimension mismatch");
        Vector {
            factor_dims: v.factor_dims.clone(),
            amps: self.mat.dot(&v.amps),
        }
    }

    /// `<psi| A |psi>`.
    pub fn expectation(&self, psi: &Vector) -> Complex64 {
        let av = self.apply(psi);
        psi.inner(&av)
    }
}

impl std::ops::Add for &Operator {
    type Output = Operator;
    fn add(self, rhs: &Operator) -> Operator {
        assert_eq!(self.factor_dims, rhs.factor_dims, "factor mismatch");
        Operator {
            factor_dims: self.factor_dims.clone(),
            mat: &self.mat + &rhs.mat,
        }
    }
}

impl std::ops::Sub for &Operator {
    type Output = Operator;
    fn sub(self, rhs: &Operator) -> Operator {
        assert_eq!(self.factor_dims, rhs.factor_dims, "factor mismatch");
        Operator {
            factor_dims: self.factor_dims.clone(),
            mat: &self.mat - &rhs.mat,
        }
    }
}

impl std::ops::Mul for &Operator {
    type Output = Operator;
    fn mul(self, rhs: &Operator) -> Operator {
        assert_eq!(self.factor_dims, rhs.factor_dims, "factor mismatch");
        Operator {
            factor_dims: self.factor_dims.clone(),
            mat: self.mat.dot(&rhs.mat),
        }
    }
}

/// Complex amplitude vector over a tensor product of factors.
#[derive(Clone, Debug, PartialEq)]
pub struct Vector {
    factor_dims: Vec<usize>,
    amps: Array1<Complex64>,
}

impl Vector {
    pub fn from_vec(factor_dims: Vec<usize>, amps: Vec<Complex64>) -> Result<Self, TensorError> {
        check_factors(&factor_dims)?;
        if product(&factor_dims) != amps.len() {
            return Err(TensorError::DimensionMismatch {
                dims: factor_dims,
                len: amps.len(),
            });
        }
        Ok(Self {
            factor_dims,
            amps: Array1::from_vec(amps),
        })
    }

    pub fn zeros(factor_dims: &[usize]) -> Self {
        check_factors(factor_dims).expect("valid factor dims");
        Self {
            factor_dims: factor_dims.to_vec(),
            amps: Array1::from_elem(product(factor_dims), ZERO),
        }
    }

    /// Computational basis state `|index>` over the product dimension.
    pub fn basis(factor_dims: &[usize], index: usize) -> Self {
        let mut v = Self::zeros(factor_dims);
        v.amps[index] = ONE;
        v
    }

    pub fn dim(&self) -> usize {
        self.amps.len()
    }

    pub fn factor_dims(&self) -> &[usize] {
        &self.factor_dims
    }

    pub fn amplitudes(&self) -> &Array1<Complex64> {
        &self.amps
    }

    /// `<self|other>` (conjugate-linear in `self`).
    pub fn inner(&self, other: &Self) -> Complex64 {
        assert_eq!(self.dim(), other.dim(), "dimension mismatch");
        self.amps
            .iter()
            .zip(other.amps.iter())
            .map(|(a, b)| a.conj() * b)
            .sum()
    }

    pub fn norm(&self) -> f64 {
        self.amps.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn normalized(&self) -> Self {
        let n = self.norm();
        assert!(n > 0.0, "cannot normalize the zero vector");
        self.scaled(Complex64::new(1.0 / n, 0.0))
    }

    pub fn scaled(&self, factor: Complex64) -> Self {
        Self {
            factor_dims: self.factor_dims.clone(),
            amps: self.amps.mapv(|z| z * factor),
        }
    }

    pub fn tensor_product(&self, other: &Self) -> Self {
        let mut dims = self.factor_dims.clone();
        dims.extend_from_slice(&other.factor_dims);
        let mut amps = Array1::from_elem(self.dim() * other.dim(), ZERO);
        for (i, a) in self.amps.iter().enumerate() {
            for (j, b) in other.amps.iter().enumerate() {
                amps[i * other.dim() + j] = a * b;
            }
        }
        Self {
            factor_dims: dims,
            amps,
        }
    }

    /// Outer product `|self><other|`.
    pub fn outer(&self, other: &Self) -> Operator {
        assert_eq!(self.dim(), other.dim(), "dimension mismatch");
        let dim = self.dim();
        let mut mat = Array2::from_elem((dim, dim), ZERO);
        for (i, a) in self.amps.iter().enumerate() {
            for (j, b) in other.amps.iter().enumerate() {
                mat[(i, j)] = a * b.conj();
            }
        }
        Operator {
            factor_dims: self.factor_dims.clone(),
            mat,
        }
    }

    /// Projector `|self><self|`.
    pub fn projector(&self) -> Operator {
        self.outer(self)
    }

    pub fn add(&self, other: &Self) -> Self {
        assert_eq!(self.factor_dims, other.factor_dims, "factor mismatch");
        Self {
            factor_dims: self.factor_dims.clone(),
            amps: &self.amps + &other.amps,
        }
    }

    pub fn sub(&self, other: &Self) -> Self {
        assert_eq!(self.factor_dims, other.factor_dims, "factor mismatch");
        Self {
            factor_dims: self.factor_dims.clone(),
            amps: &self.amps - &other.amps,
        }
    }
}

fn row_major_strides(dims: &[usize]) -> Vec<usize> {
    let mut strides = vec![1usize; dims.len()];
    for i in (0..dims.len().saturating_sub(1)).rev() {
        strides[i] = strides[i + 1] * dims[i + 1];
    }
    strides
}

fn decode_multi(mut flat: usize, dims: &[usize], out: &mut [usize]) {
    for i in (0..dims.len()).rev() {
        out[i] = flat % dims[i];
        flat /= dims[i];
    }
}

/// Flat-index offsets of every multi-index over `dims`, where `dims[k]`
/// belongs to original factor `factors[k]` with stride `strides[factors[k]]`.
fn enumerate_offsets(dims: &[usize], factors: &[usize], strides: &[usize]) -> Vec<usize> {
    let count = product(dims);
    let mut offsets = vec![0usize; count];
    let mut multi = vec![0usize; dims.len()];
    for (flat, slot) in offsets.iter_mut().enumerate() {
        decode_multi(flat, dims, &mut multi);
        *slot = multi
            .iter()
            .enumerate()
            .map(|(k, &v)| v * strides[factors[k]])
            .sum();
    }
    offsets
}

/// Kronecker product with the left factor varying slowest.
pub fn kron(a: &Array2<Complex64>, b: &Array2<Complex64>) -> Array2<Complex64> {
    let (ar, ac) = a.dim();
    let (br, bc) = b.dim();
    let mut out = Array2::from_elem((ar * br, ac * bc), ZERO);
    for ((i, j), &av) in a.indexed_iter() {
        if av == ZERO {
            continue;
        }
        for ((k, l), &bv) in b.indexed_iter() {
            out[(i * br + k, j * bc + l)] = av * bv;
        }
    }
    out
}

// Pade(13,13) numerator coefficients (Higham 2005).
const PADE13: [f64; 14] = [
    64764752532480000.0,
    32382376266240000.0,
    7771770303897600.0,
    1187353796428800.0,
    129060195264000.0,
    10559470521600.0,
    670442572800.0,
    33522128640.0,
    1323241920.0,
    40840800.0,
    960960.0,
    16380.0,
    182.0,
    1.0,
];

fn one_norm(a: &Array2<Complex64>) -> f64 {
    let mut worst = 0.0f64;
    for j in 0..a.ncols() {
        let s: f64 = a.column(j).iter().map(|z| z.norm()).sum();
        worst = worst.max(s);
    }
    worst
}

/// Matrix exponential of a dense complex matrix.
pub fn expm(a: &Array2<Complex64>) -> Array2<Complex64> {
    let n = a.nrows();
    assert_eq!(n, a.ncols(), "expm needs a square matrix");
    if n == 0 {
        return a.clone();
    }
    if n == 1 {
        let mut out = a.clone();
        out[(0, 0)] = a[(0, 0)].exp();
        return out;
    }

    let theta13 = 5.371920351148152;
    let norm = one_norm(a);
    let squarings = if norm > theta13 {
        (norm / theta13).log2().ceil() as u32
    } else {
        0
    };
    let scale = Complex64::new((0.5f64).powi(squarings as i32), 0.0);
    let a_scaled = a.mapv(|z| z * scale);

    let eye = Array2::from_diag_elem(n, ONE);
    let a2 = a_scaled.dot(&a_scaled);
    let a4 = a2.dot(&a2);
    let a6 = a2.dot(&a4);

    let b = |k: usize| Complex64::new(PADE13[k], 0.0);
    let w1 = a6.mapv(|z| z * b(13)) + a4.mapv(|z| z * b(11)) + a2.mapv(|z| z * b(9));
    let w2 = w1.dot(&a6)
        + a6.mapv(|z| z * b(7))
        + a4.mapv(|z| z * b(5))
        + a2.mapv(|z| z * b(3))
        + eye.mapv(|z| z * b(1));
    let u = a_scaled.dot(&w2);
    let z1 = a6.mapv(|z| z * b(12)) + a4.mapv(|z| z * b(10)) + a2.mapv(|z| z * b(8));
    let v = z1.dot(&a6)
        + a6.mapv(|z| z * b(6))
        + a4.mapv(|z| z * b(4))
        + a2.mapv(|z| z * b(2))
        + eye.mapv(|z| z * b(0));

    let mut result = solve(&(&v - &u), &(&v + &u));
    for _ in 0..squarings {
        result = result.dot(&result);
    }
    result
}

/// Solve `A X = B` by LU with partial pivoting.
fn solve(a: &Array2<Complex64>, b: &Array2<Complex64>) -> Array2<Complex64> {
    let n = a.nrows();
    let m = b.ncols();
    let mut lu = a.clone();
    let mut x = b.clone();
    for col in 0..n {
        let mut pivot_row = col;
        let mut pivot_mag = lu[(col, col)].norm();
        for row in col + 1..n {
            let mag = lu[(row, col)].norm();
            if mag > pivot_mag {
                pivot_mag = mag;
                pivot_row = row;
            }
        }
        if pivot_row != col {
            for j in 0..n {
                lu.swap((col, j), (pivot_row, j));
            }
            for j in 0..m {
                x.swap((col, j), (pivot_row, j));
            }
        }
        let pivot = lu[(col, col)];
        assert!(pivot.norm() > 0.0, "singular matrix in solve");
        for row in col + 1..n {
            let factor = lu[(row, col)] / pivot;
            if factor == ZERO {
                continue;
            }
            for j in col + 1..n {
                let v = lu[(col, j)];
                lu[(row, j)] -= factor * v;
            }
            for j in 0..m {
                let v = x[(col, j)];
                x[(row, j)] -= factor * v;
            }
        }
    }
    for col in (0..n).rev() {
        let pivot = lu[(col, col)];
        for j in 0..m {
            let mut acc = x[(col, j)];
            for k in col + 1..n {
                acc -= lu[(col, k)] * x[(k, j)];
            }
            x[(col, j)] = acc / pivot;
        }
    }
    x
}

/// Eigenvalues of a Hermitian matrix by cyclic complex Jacobi sweeps.
fn hermitian_eigenvalues_jacobi(a: &Array2<Complex64>) -> Vec<f64> {
    let n = a.nrows();
    if n == 1 {
        return vec![a[(0, 0)].re];
    }
    let mut m = a.clone();
    let frob: f64 = m.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    let target = 1e-14 * frob.max(1e-300);

    for _sweep in 0..60 {
        let mut off = 0.0f64;
        for p in 0..n {
            for q in p + 1..n {
                off += 2.0 * m[(p, q)].norm_sqr();
            }
        }
        if off.sqrt() <= target {
            break;
        }
        for p in 0..n - 1 {
            for q in p + 1..n {
                let beta = m[(p, q)];
                let beta_abs = beta.norm();
                if beta_abs == 0.0 {
                    continue;
                }
                let phase = beta / beta_abs;
                let app = m[(p, p)].re;
                let aqq = m[(q, q)].re;
                let tau = (aqq - app) / (2.0 * beta_abs);
                let t = if tau >= 0.0 {
                    1.0 / (tau + (1.0 + tau * tau).sqrt())
                } else {
                    1.0 / (tau - (1.0 + tau * tau).sqrt())
                };
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = t * c;
                // R restricted to the (p,q) plane:
                //   R[p,p] = c          R[p,q] = s
                //   R[q,p] = -s e^{-i phi}   R[q,q] = c e^{-i phi}
                let cc = Complex64::new(c, 0.0);
                let ss = Complex64::new(s, 0.0);
                let phase_conj = phase.conj();
                // columns: B <- B R
                for r in 0..n {
                    let bp = m[(r, p)];
                    let bq = m[(r, q)];
                    m[(r, p)] = cc * bp - ss * phase_conj * bq;
                    m[(r, q)] = ss * bp + cc * phase_conj * bq;
                }
                // rows: B <- R^dag B
                for col in 0..n {
                    let bp = m[(p, col)];
                    let bq = m[(q, col)];
                    m[(p, col)] = cc * bp - ss * phase * bq;
                    m[(q, col)] = ss * bp + cc * phase * bq;
                }
            }
        }
    }

    let mut eig: Vec<f64> = m.diag().iter().map(|z| z.re).collect();
    eig.sort_by(|a, b| a.partial_cmp(b).expect("finite eigenvalues"));
    eig
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    pub(crate) fn random_matrix(rng: &mut ChaCha8Rng, n: usize) -> Array2<Complex64> {
        Array2::from_shape_fn((n, n), |_| {
            c(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))
        })
    }

    fn random_hermitian(rng: &mut ChaCha8Rng, n: usize) -> Array2<Complex64> {
        let m = random_matrix(rng, n);
        let md = m.t().mapv(|z| z.conj());
        (&m + &md).mapv(|z| 0.5 * z)
    }

    fn random_anti_hermitian(rng: &mut ChaCha8Rng, n: usize) -> Array2<Complex64> {
        random_hermitian(rng, n).mapv(|z| z * c(0.0, 1.0))
    }

    fn op(dims: &[usize], mat: Array2<Complex64>) -> Operator {
        Operator::from_matrix(dims.to_vec(), mat).unwrap()
    }

    fn pauli_x() -> Operator {
        Operator::from_vec(
            vec![2],
            vec![c(0.0, 0.0), c(1.0, 0.0), c(1.0, 0.0), c(0.0, 0.0)],
        )
        .unwrap()
    }

    fn pauli_z() -> Operator {
        Operator::from_vec(
            vec![2],
            vec![c(1.0, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(-1.0, 0.0)],
        )
        .unwrap()
    }

    /// Independent Kronecker oracle: plain quadruple loop.
    fn naive_kron(a: &Array2<Complex64>, b: &Array2<Complex64>) -> Array2<Complex64> {
        let (ar, ac) = a.dim();
        let (br, bc) = b.dim();
        let mut out = Array2::from_elem((ar * br, ac * bc), c(0.0, 0.0));
        for i in 0..ar {
            for j in 0..ac {
                for k in 0..br {
                    for l in 0..bc {
                        out[(i * br + k, j * bc + l)] = a[(i, j)] * b[(k, l)];
                    }
                }
            }
        }
        out
    }

    /// Independent partial-trace oracle for exactly three factors:
    /// explicit summation over all six multi-indices.
    fn naive_partial_trace_3(a: &Operator, keep: &[usize]) -> Array2<Complex64> {
        let d = a.factor_dims();
        assert_eq!(d.len(), 3);
        let kept: Vec<usize> = keep.to_vec();
        let out_dim: usize = kept.iter().map(|&k| d[k]).product();
        let mut out = Array2::from_elem((out_dim, out_dim), c(0.0, 0.0));
        let flat = |i: &[usize]| (i[0] * d[1] + i[1]) * d[2] + i[2];
        for i0 in 0..d[0] {
            for i1 in 0..d[1] {
                for i2 in 0..d[2] {
                    for j0 in 0..d[0] {
                        for j1 in 0..d[1] {
                            for j2 in 0..d[2] {
                                let i = [i0, i1, i2];
                                let j = [j0, j1, j2];
                                if (0..3).any(|f| !kept.contains(&f) && i[f] != j[f]) {
                                    continue;
                                }
                                let r: usize =
                                    kept.iter().fold(0, |acc, &k| acc * d[k] + i[k]);
                                let cidx: usize =
                                    kept.iter().fold(0, |acc, &k| acc * d[k] + j[k]);
                                out[(r, cidx)] += a.matrix()[(flat(&i), flat(&j))];
                            }
                        }
                    }
                }
            }
        }
        out
    }

    /// Independent exponential oracle: scaled Taylor series, then repeated
    /// squaring.
    fn taylor_expm(a: &Array2<Complex64>) -> Array2<Complex64> {
        let n = a.nrows();
        let norm = one_norm(a);
        let squarings = if norm > 0.25 {
            (norm / 0.25).log2().ceil() as u32
        } else {
            0
        };
        let scale = c((0.5f64).powi(squarings as i32), 0.0);
        let a_s = a.mapv(|z| z * scale);
        let mut term = Array2::from_diag_elem(n, c(1.0, 0.0));
        let mut sum = term.clone();
        for k in 1..40 {
            term = term.dot(&a_s).mapv(|z| z / c(k as f64, 0.0));
            sum = &sum + &term;
        }
        let mut out = sum;
        for _ in 0..squarings {
            out = out.dot(&out);
        }
        out
    }

    #[test]
    fn tensor_product_identity_case() {
        let i2 = Operator::identity(&[2]);
        let result = i2.tensor_product(&i2);
        assert_eq!(result.factor_dims(), &[2, 2]);
        assert!(result.identity_residual() == 0.0);
    }

    #[test]
    fn tensor_product_pauli_block_form() {
        let sx = pauli_x();
        let sz = pauli_z();
        let k = sx.tensor_product(&sz);
        assert_eq!(k.matrix()[(0, 2)], c(1.0, 0.0));
        assert_eq!(k.matrix()[(1, 3)], c(-1.0, 0.0));
        assert_eq!(k.matrix()[(0, 0)], c(0.0, 0.0));
        assert_eq!(k.matrix()[(0, 3)], c(0.0, 0.0));
        assert_eq!(k.matrix()[(1, 2)], c(0.0, 0.0));
    }

    #[test]
    fn tensor_product_matches_naive_kron() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let a = random_matrix(&mut rng, 3);
        let b = random_matrix(&mut rng, 4);
        let fast = kron(&a, &b);
        let slow = naive_kron(&a, &b);
        let diff = (&fast - &slow).iter().map(|z| z.norm()).fold(0.0, f64::max);
        assert!(diff == 0.0);
    }

    #[test]
    fn mixed_product_identity_on_random_qubit_factors() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..20 {
            let a = op(&[2], random_matrix(&mut rng, 2));
            let b = op(&[2], random_matrix(&mut rng, 2));
            let cc = op(&[2], random_matrix(&mut rng, 2));
            let d = op(&[2], random_matrix(&mut rng, 2));
            let lhs = &a.tensor_product(&b) * &cc.tensor_product(&d);
            let rhs = (&a * &cc).tensor_product(&(&b * &d));
            assert!(lhs.max_abs_diff(&rhs) <= 1e-12);
        }
    }

    #[test]
    fn partial_trace_product_state_factorizes() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let rho = op(&[2], random_hermitian(&mut rng, 2));
        let tau = op(&[3], random_hermitian(&mut rng, 3));
        let joint = rho.tensor_product(&tau);
        let reduced = joint.partial_trace(&[0]).unwrap();
        let expected = rho.scaled(tau.trace());
        assert!(reduced.max_abs_diff(&expected) <= 1e-13);
    }

    #[test]
    fn partial_trace_bell_state_marginal_is_maximally_mixed() {
        let amp = c(std::f64::consts::FRAC_1_SQRT_2, 0.0);
        let mut phi = Vector::zeros(&[2, 2]);
        let mut amps = phi.amps.clone();
        amps[0] = amp;
        amps[3] = amp;
        phi.amps = amps;
        let reduced = phi.projector().partial_trace(&[0]).unwrap();
        let expected = Operator::identity(&[2]).scaled(c(0.5, 0.0));
        assert!(reduced.max_abs_diff(&expected) <= 1e-15);
    }

    #[test]
    fn partial_trace_preserves_trace_and_matches_naive_oracle() {
        let mut rng = ChaCha8Rng::seed_from_u64(13);
        let a = op(&[2, 3, 2], random_hermitian(&mut rng, 12));
        for keep in [&[0usize][..], &[1], &[2], &[0, 1], &[0, 2], &[1, 2]] {
            let fast = a.partial_trace(keep).unwrap();
            let slow = naive_partial_trace_3(&a, keep);
            let diff = (&slow - fast.matrix())
                .iter()
                .map(|z| z.norm())
                .fold(0.0, f64::max);
            assert!(diff <= 1e-13, "keep {keep:?}: diff {diff}");
            assert!((fast.trace() - a.trace()).norm() <= 1e-12);
        }
        let full = a.partial_trace(&[0, 1, 2]).unwrap();
        assert!(full.max_abs_diff(&a) == 0.0);
    }

    #[test]
    fn partial_trace_rejects_bad_keep_sets() {
        let a = Operator::identity(&[2, 2]);
        assert!(matches!(
            a.partial_trace(&[]),
            Err(TensorError::BadKeepSet)
        ));
        assert!(matches!(
            a.partial_trace(&[0, 0]),
            Err(TensorError::BadKeepSet)
        ));
        assert!(matches!(
            a.partial_trace(&[2]),
            Err(TensorError::FactorOutOfRange { .. })
        ));
    }

    #[test]
    fn expm_zero_is_identity() {
        let z = Operator::zeros(&[2, 2]);
        assert!(z.matrix_exponential().identity_residual() <= 1e-15);
    }

    #[test]
    fn expm_pauli_rotation_closed_form() {
        // exp(i theta sx) = cos(theta) I + i sin(theta) sx; theta = pi/2
        let theta = std::f64::consts::FRAC_PI_2;
        let gen = pauli_x().scaled(c(0.0, theta));
        let u = gen.matrix_exponential();
        let expected = pauli_x().scaled(c(0.0, 1.0));
        assert!(u.max_abs_diff(&expected) <= 1e-14);
    }

    #[test]
    fn expm_inverse_identity_for_random_anti_hermitian() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for n in [2usize, 5, 8] {
            let g = random_anti_hermitian(&mut rng, n);
            let a = op(&[n], g.clone());
            let am = op(&[n], g.mapv(|z| -z));
            let prod = &a.matrix_exponential() * &am.matrix_exponential();
            assert!(prod.identity_residual() <= 1e-10);
        }
    }

    #[test]
    fn expm_matches_taylor_oracle() {
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        for n in [2usize, 4, 7] {
            let a = random_matrix(&mut rng, n).mapv(|z| z * c(0.8, 0.0));
            let fast = expm(&a);
            let slow = taylor_expm(&a);
            let diff = (&fast - &slow).iter().map(|z| z.norm()).fold(0.0, f64::max);
            assert!(diff <= 1e-12, "n={n}: diff {diff:.3e}");
        }
    }

    #[test]
    fn expm_anti_hermitian_is_unitary_even_at_large_norm() {
        let mut rng = ChaCha8Rng::seed_from_u64(19);
        let g = random_anti_hermitian(&mut rng, 6).mapv(|z| z * c(15.0, 0.0));
        let u = op(&[6], g).matrix_exponential();
        let prod = &u.dagger() * &u;
        assert!(prod.identity_residual() <= 1e-10);
    }

    #[test]
    fn hermitian_eigenvalues_diagonal_case() {
        let eig = pauli_z().hermitian_eigenvalues().unwrap();
        assert_eq!(eig.len(), 2);
        assert!((eig[0] + 1.0).abs() <= 1e-15);
        assert!((eig[1] - 1.0).abs() <= 1e-15);
    }

    #[test]
    fn hermitian_eigenvalues_bloch_closed_form() {
        // (1/8)(I + m . sigma) with m = (1,1,1): eigenvalues (1 +/- sqrt(3))/8
        let sy = Operator::from_vec(
            vec![2],
            vec![c(0.0, 0.0), c(0.0, -1.0), c(0.0, 1.0), c(0.0, 0.0)],
        )
        .unwrap();
        let m = &(&pauli_x() + &sy) + &pauli_z();
        let a = (&Operator::identity(&[2]) + &m).scaled(c(0.125, 0.0));
        let eig = a.hermitian_eigenvalues().unwrap();
        let root3 = 3.0f64.sqrt();
        assert!((eig[0] - (1.0 - root3) / 8.0).abs() <= 1e-14);
        assert!((eig[1] - (1.0 + root3) / 8.0).abs() <= 1e-14);
    }

    #[test]
    fn hermitian_eigenvalues_projector_spectrum_is_binary() {
        let mut rng = ChaCha8Rng::seed_from_u64(23);
        let v = Vector::from_vec(
            vec![4],
            (0..4)
                .map(|_| c(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)))
                .collect(),
        )
        .unwrap()
        .normalized();
        let p = v.projector();
        for ev in p.hermitian_eigenvalues().unwrap() {
            assert!(ev.abs() <= 1e-13 || (ev - 1.0).abs() <= 1e-13, "ev {ev}");
        }
    }

    #[test]
    fn hermitian_eigenvalues_constructed_spectrum_recovered() {
        let mut rng = ChaCha8Rng::seed_from_u64(29);
        let n = 9;
        let mut spectrum: Vec<f64> = (0..n).map(|_| rng.random_range(-4.0..4.0)).collect();
        let g = random_anti_hermitian(&mut rng, n);
        let u = expm(&g);
        let mut d = Array2::from_elem((n, n), c(0.0, 0.0));
        for (i, &ev) in spectrum.iter().enumerate() {
            d[(i, i)] = c(ev, 0.0);
        }
        let a = u.dot(&d).dot(&u.t().mapv(|z| z.conj()));
        let eig = op(&[n], a).hermitian_eigenvalues().unwrap();
        spectrum.sort_by(|a, b| a.partial_cmp(b).unwrap());
        for (got, want) in eig.iter().zip(&spectrum) {
            assert!((got - want).abs() <= 1e-10, "{got} vs {want}");
        }
    }

    #[test]
    fn hermitian_eigenvalues_similarity_invariance() {
        let mut rng = ChaCha8Rng::seed_from_u64(31);
        let a = random_hermitian(&mut rng, 7);
        let u = expm(&random_anti_hermitian(&mut rng, 7));
        let conj = u.dot(&a).dot(&u.t().mapv(|z| z.conj()));
        let e1 = op(&[7], a).hermitian_eigenvalues().unwrap();
        let e2 = op(&[7], conj).hermitian_eigenvalues().unwrap();
        for (x, y) in e1.iter().zip(&e2) {
            assert!((x - y).abs() <= 1e-9);
        }
    }

    #[test]
    fn hermitian_eigenvalues_rejects_non_hermitian() {
        let mut rng = ChaCha8Rng::seed_from_u64(37);
        let a = op(&[3], random_matrix(&mut rng, 3));
        assert!(matches!(
            a.hermitian_eigenvalues(),
            Err(TensorError::NotHermitian { .. })
        ));
    }

    #[test]
    fn permute_factors_swaps_kron_order() {
        let mut rng = ChaCha8Rng::seed_from_u64(41);
        let a = op(&[2], random_matrix(&mut rng, 2));
        let b = op(&[3], random_matrix(&mut rng, 3));
        let ab = a.tensor_product(&b);
        let ba = b.tensor_product(&a);
        let swapped = ab.permute_factors(&[1, 0]).unwrap();
        assert!(swapped.max_abs_diff(&ba) == 0.0);
    }

    #[test]
    fn restrict_extracts_leading_block() {
        let mut rng = ChaCha8Rng::seed_from_u64(43);
        let a = op(&[3, 3], random_matrix(&mut rng, 9));
        let block = a.restrict(&[2, 2]).unwrap();
        assert_eq!(block.dim(), 4);
        // index (1,1) in the block is flat 1*2+1 = 3; original (1,1) is 1*3+1 = 4
        assert_eq!(block.matrix()[(3, 3)], a.matrix()[(4, 4)]);
        assert_eq!(block.matrix()[(0, 3)], a.matrix()[(0, 4)]);
    }

    #[test]
    fn vector_basis_and_inner_products() {
        let e0 = Vector::basis(&[2, 2], 0);
        let e3 = Vector::basis(&[2, 2], 3);
        assert_eq!(e0.inner(&e3), c(0.0, 0.0));
        assert_eq!(e0.inner(&e0), c(1.0, 0.0));
        let prod = Vector::basis(&[2], 1).tensor_product(&Vector::basis(&[2], 1));
        assert!(prod.sub(&e3).norm() == 0.0);
    }
}

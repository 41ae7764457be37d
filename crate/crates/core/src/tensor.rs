//! Dense linear-algebra substrate: row-major matrices and vectors over a
//! generic [`Scalar`], Kronecker products, local-operator embedding and the
//! SVD-based null-space oracle.
//!
//! Everything here is dense. Operators for N ≤ 8 sites are at most 256×256,
//! so no sparse formats are used.

use std::ops::{Index, IndexMut};

use nalgebra::{Complex, DMatrix};

use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Default cap on the row (or column) count produced by [`kron`].
pub const DEFAULT_MAX_DIM: usize = 1 << 20;

#[derive(Clone, Debug, PartialEq)]
pub struct Matrix<T> {
    rows: usize,
    cols: usize,
    data: Vec<T>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Vector<T>(pub Vec<T>);

pub type DenseOperator = Matrix<f64>;
pub type DenseVector = Vector<f64>;

impl<T: Scalar> Matrix<T> {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self { rows, cols, data: vec![T::zero(); rows * cols] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = T::one();
        }
        m
    }

    pub fn from_vec(rows: usize, cols: usize, data: Vec<T>) -> Result<Self> {
        if rows * cols != data.len() {
            return Err(Error::Shape {
                expected: format!("{rows}x{cols} = {} entries", rows * cols),
                found: format!("{} entries", data.len()),
            });
        }
        Ok(Self { rows, cols, data })
    }

    /// Builds a matrix from nested rows. Panics on ragged input; meant for
    /// literals.
    pub fn from_rows<R: AsRef<[T]>>(rows: &[R]) -> Self {
        let cols = rows.first().map_or(0, |r| r.as_ref().len());
        let mut data = Vec::with_capacity(rows.len() * cols);
        for r in rows {
            assert_eq!(r.as_ref().len(), cols, "ragged matrix literal");
            data.extend_from_slice(r.as_ref());
        }
        Self { rows: rows.len(), cols, data }
    }

    pub fn from_f64_rows<R: AsRef<[f64]>>(rows: &[R]) -> Self {
        let converted: Vec<Vec<T>> = rows
            .iter()
            .map(|r| r.as_ref().iter().map(|&x| T::of_f64(x)).collect())
            .collect();
        Self::from_rows(&converted)
    }

    pub fn diag(entries: &[T]) -> Self {
        let mut m = Self::zeros(entries.len(), entries.len());
        for (i, x) in entries.iter().enumerate() {
            m[(i, i)] = x.clone();
        }
        m
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.rows, self.cols)
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn as_slice(&self) -> &[T] {
        &self.data
    }

    pub fn row(&self, i: usize) -> &[T] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    fn check_same_shape(&self, other: &Self) -> Result<()> {
        if self.shape() != other.shape() {
            return Err(Error::Shape {
                expected: format!("{}x{}", self.rows, self.cols),
                found: format!("{}x{}", other.rows, other.cols),
            });
        }
        Ok(())
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.check_same_shape(other)?;
        let data = self.data.iter().zip(&other.data).map(|(a, b)| a.clone() + b.clone()).collect();
        Ok(Self { rows: self.rows, cols: self.cols, data })
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.check_same_shape(other)?;
        let data = self.data.iter().zip(&other.data).map(|(a, b)| a.clone() - b.clone()).collect();
        Ok(Self { rows: self.rows, cols: self.cols, data })
    }

    pub fn scale(&self, c: &T) -> Self {
        let data = self.data.iter().map(|a| a.clone() * c.clone()).collect();
        Self { rows: self.rows, cols: self.cols, data }
    }

    pub fn neg(&self) -> Self {
        let data = self.data.iter().map(|a| -a.clone()).collect();
        Self { rows: self.rows, cols: self.cols, data }
    }

    pub fn transpose(&self) -> Self {
        let mut t = Self::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                t[(j, i)] = self[(i, j)].clone();
            }
        }
        t
    }

    pub fn matmul(&self, other: &Self) -> Result<Self> {
        if self.cols != other.rows {
            return Err(Error::Shape {
                expected: format!("inner dimension {}", self.cols),
                found: format!("{}", other.rows),
            });
        }
        let mut out = Self::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = &self.data[i * self.cols + k];
                if a.is_zero() {
                    continue;
                }
                let orow = &other.data[k * other.cols..(k + 1) * other.cols];
                let dst = &mut out.data[i * other.cols..(i + 1) * other.cols];
                for (d, b) in dst.iter_mut().zip(orow) {
                    if !b.is_zero() {
                        *d = d.clone() + a.clone() * b.clone();
                    }
                }
            }
        }
        Ok(out)
    }

    pub fn matvec(&self, v: &Vector<T>) -> Result<Vector<T>> {
        if self.cols != v.len() {
            return Err(Error::Shape {
                expected: format!("vector of length {}", self.cols),
                found: format!("{}", v.len()),
            });
        }
        let out = (0..self.rows)
            .map(|i| {
                self.row(i)
                    .iter()
                    .zip(&v.0)
                    .fold(T::zero(), |acc, (a, b)| acc + a.clone() * b.clone())
            })
            .collect();
        Ok(Vector(out))
    }

    /// Row-vector times matrix, `vᵀ·self`.
    pub fn vecmat(&self, v: &Vector<T>) -> Result<Vector<T>> {
        if self.rows != v.len() {
            return Err(Error::Shape {
                expected: format!("vector of length {}", self.rows),
                found: format!("{}", v.len()),
            });
        }
        let mut out = vec![T::zero(); self.cols];
        for (i, vi) in v.0.iter().enumerate() {
            if vi.is_zero() {
                continue;
            }
            for (o, a) in out.iter_mut().zip(self.row(i)) {
                if !a.is_zero() {
                    *o = o.clone() + vi.clone() * a.clone();
                }
            }
        }
        Ok(Vector(out))
    }

    pub fn trace(&self) -> T {
        (0..self.rows.min(self.cols)).fold(T::zero(), |acc, i| acc + self[(i, i)].clone())
    }

    /// Column sums, i.e. `⟨1|·self`.
    pub fn column_sums(&self) -> Vec<T> {
        let mut sums = vec![T::zero(); self.cols];
        for i in 0..self.rows {
            for (s, a) in sums.iter_mut().zip(self.row(i)) {
                *s = s.clone() + a.clone();
            }
        }
        sums
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.data.iter().map(|a| a.to_f64().powi(2)).sum::<f64>().sqrt()
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().map(|a| a.to_f64().abs()).fold(0.0, f64::max)
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(|a| a.is_zero())
    }

    pub fn all_finite(&self) -> bool {
        self.data.iter().all(|a| a.to_f64().is_finite())
    }

    /// Copy of the block `rows × cols` (ranges are half-open).
    pub fn submatrix(&self, rows: std::ops::Range<usize>, cols: std::ops::Range<usize>) -> Self {
        let mut out = Self::zeros(rows.len(), cols.len());
        for (oi, i) in rows.clone().enumerate() {
            for (oj, j) in cols.clone().enumerate() {
                out[(oi, oj)] = self[(i, j)].clone();
            }
        }
        out
    }

    /// Gauss–Jordan inverse with partial pivoting. Intended for small
    /// matrices (the 2×2 product-operator factors) in either scalar mode.
    pub fn inverse(&self) -> Result<Self> {
        if !self.is_square() {
            return Err(Error::Shape { expected: "square matrix".into(), found: format!("{}x{}", self.rows, self.cols) });
        }
        let n = self.rows;
        let mut a = self.clone();
        let mut inv = Self::identity(n);
        for col in 0..n {
            let pivot = (col..n)
                .max_by(|&i, &j| a[(i, col)].abs().partial_cmp(&a[(j, col)].abs()).unwrap_or(std::cmp::Ordering::Equal))
                .expect("non-empty range");
            if a[(pivot, col)].near_zero(1e-300) {
                return Err(Error::SingularFactor);
            }
            if pivot != col {
                for j in 0..n {
                    a.data.swap(pivot * n + j, col * n + j);
                    inv.data.swap(pivot * n + j, col * n + j);
                }
            }
            let p = a[(col, col)].clone();
            for j in 0..n {
                a[(col, j)] = a[(col, j)].clone() / p.clone();
                inv[(col, j)] = inv[(col, j)].clone() / p.clone();
            }
            for i in 0..n {
                if i == col || a[(i, col)].is_zero() {
                    continue;
                }
                let f = a[(i, col)].clone();
                for j in 0..n {
                    a[(i, j)] = a[(i, j)].clone() - f.clone() * a[(col, j)].clone();
                    inv[(i, j)] = inv[(i, j)].clone() - f.clone() * inv[(col, j)].clone();
                }
            }
        }
        Ok(inv)
    }

    pub fn to_f64(&self) -> Matrix<f64> {
        Matrix { rows: self.rows, cols: self.cols, data: self.data.iter().map(Scalar::to_f64).collect() }
    }
}

impl<T> Index<(usize, usize)> for Matrix<T> {
    type Output = T;

    fn index(&self, (i, j): (usize, usize)) -> &T {
        debug_assert!(i < self.rows && j < self.cols);
        &self.data[i * self.cols + j]
    }
}

impl<T> IndexMut<(usize, usize)> for Matrix<T> {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut T {
        debug_assert!(i < self.rows && j < self.cols);
        &mut self.data[i * self.cols + j]
    }
}

impl Matrix<f64> {
    pub fn to_nalgebra(&self) -> DMatrix<f64> {
        DMatrix::from_row_slice(self.rows, self.cols, &self.data)
    }

    pub fn from_nalgebra(m: &DMatrix<f64>) -> Self {
        let mut out = Self::zeros(m.nrows(), m.ncols());
        for i in 0..m.nrows() {
            for j in 0..m.ncols() {
                out[(i, j)] = m[(i, j)];
            }
        }
        out
    }

    /// Ratio of the largest to the smallest singular value.
    pub fn condition_number(&self) -> f64 {
        let sv = self.to_nalgebra().singular_values();
        let max = sv.iter().cloned().fold(0.0, f64::max);
        let min = sv.iter().cloned().fold(f64::INFINITY, f64::min);
        if min == 0.0 {
            f64::INFINITY
        } else {
            max / min
        }
    }

    /// Complex eigenvalues through a real Schur decomposition.
    pub fn eigenvalues(&self) -> Result<Vec<Complex<f64>>> {
        if !self.is_square() {
            return Err(Error::Shape { expected: "square matrix".into(), found: format!("{}x{}", self.rows, self.cols) });
        }
        Ok(self.to_nalgebra().complex_eigenvalues().iter().cloned().collect())
    }
}

impl<T: Scalar> Vector<T> {
    pub fn zeros(n: usize) -> Self {
        Vector(vec![T::zero(); n])
    }

    pub fn basis(n: usize, k: usize) -> Self {
        let mut v = Self::zeros(n);
        v.0[k] = T::one();
        v
    }

    pub fn ones(n: usize) -> Self {
        Vector(vec![T::one(); n])
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn dot(&self, other: &Self) -> T {
        self.0.iter().zip(&other.0).fold(T::zero(), |acc, (a, b)| acc + a.clone() * b.clone())
    }

    pub fn sum(&self) -> T {
        self.0.iter().fold(T::zero(), |acc, a| acc + a.clone())
    }

    pub fn norm(&self) -> f64 {
        self.0.iter().map(|a| a.to_f64().powi(2)).sum::<f64>().sqrt()
    }

    pub fn scale(&self, c: &T) -> Self {
        Vector(self.0.iter().map(|a| a.clone() * c.clone()).collect())
    }

    pub fn kron(&self, other: &Self) -> Self {
        let mut out = Vec::with_capacity(self.len() * other.len());
        for a in &self.0 {
            for b in &other.0 {
                out.push(a.clone() * b.clone());
            }
        }
        Vector(out)
    }

    pub fn to_f64(&self) -> Vector<f64> {
        Vector(self.0.iter().map(Scalar::to_f64).collect())
    }

    pub fn all_finite(&self) -> bool {
        self.0.iter().all(|a| a.to_f64().is_finite())
    }
}

impl Vector<f64> {
    /// `1 − |cos θ|` between two vectors; zero iff they are parallel.
    pub fn angle_to(&self, other: &Self) -> f64 {
        let denom = self.norm() * other.norm();
        if denom == 0.0 {
            return 1.0;
        }
        (1.0 - (self.dot(other) / denom).abs()).max(0.0)
    }
}

/// Kronecker product, capped at [`DEFAULT_MAX_DIM`] rows and columns.
pub fn kron<T: Scalar>(a: &Matrix<T>, b: &Matrix<T>) -> Result<Matrix<T>> {
    kron_capped(a, b, DEFAULT_MAX_DIM)
}

pub fn kron_capped<T: Scalar>(a: &Matrix<T>, b: &Matrix<T>, max_dim: usize) -> Result<Matrix<T>> {
    let rows = a.rows.saturating_mul(b.rows);
    let cols = a.cols.saturating_mul(b.cols);
    if rows > max_dim || cols > max_dim {
        return Err(Error::DimensionOverflow { requested: rows.max(cols), cap: max_dim });
    }
    let mut out = Matrix::zeros(rows, cols);
    for ai in 0..a.rows {
        for aj in 0..a.cols {
            let x = &a[(ai, aj)];
            if x.is_zero() {
                continue;
            }
            for bi in 0..b.rows {
                for bj in 0..b.cols {
                    out[(ai * b.rows + bi, aj * b.cols + bj)] = x.clone() * b[(bi, bj)].clone();
                }
            }
        }
    }
    Ok(out)
}

/// Embeds `op`, acting on sites `site..site+span` (1-based), into the full
/// `d^n`-dimensional space: `𝟙^{⊗(site−1)} ⊗ op ⊗ 𝟙^{⊗(n−site−span+1)}`.
pub fn embed_local<T: Scalar>(op: &Matrix<T>, site: usize, span: usize, n: usize, d: usize) -> Result<Matrix<T>> {
    if site < 1 || span < 1 || site + span - 1 > n {
        return Err(Error::Index(format!("site {site} with span {span} does not fit in {n} sites")));
    }
    let local = checked_pow(d, span)?;
    if op.shape() != (local, local) {
        return Err(Error::Shape { expected: format!("{local}x{local}"), found: format!("{}x{}", op.rows, op.cols) });
    }
    let left = Matrix::identity(checked_pow(d, site - 1)?);
    let right = Matrix::identity(checked_pow(d, n + 1 - site - span)?);
    kron(&kron(&left, op)?, &right)
}

fn checked_pow(d: usize, k: usize) -> Result<usize> {
    d.checked_pow(k as u32)
        .filter(|&x| x <= DEFAULT_MAX_DIM)
        .ok_or(Error::DimensionOverflow { requested: usize::MAX, cap: DEFAULT_MAX_DIM })
}

/// Orthonormal basis of the right null space: right singular vectors whose
/// singular value is below `tol · σ_max`.
pub fn null_space(op: &DenseOperator, tol: f64) -> Result<Vec<DenseVector>> {
    if !op.is_square() {
        return Err(Error::Shape { expected: "square matrix".into(), found: format!("{}x{}", op.rows, op.cols) });
    }
    let n = op.rows;
    if n == 0 {
        return Ok(Vec::new());
    }
    let svd = op.to_nalgebra().svd(false, true);
    let v_t = svd.v_t.expect("requested V^T");
    let sigma_max = svd.singular_values.iter().cloned().fold(0.0, f64::max);
    let mut basis = Vec::new();
    for (k, &s) in svd.singular_values.iter().enumerate() {
        if sigma_max == 0.0 || s <= tol * sigma_max {
            basis.push(Vector((0..n).map(|j| v_t[(k, j)]).collect()));
        }
    }
    Ok(basis)
}

/// `‖a − b‖_F / max(1, ‖a‖_F)`.
pub fn frobenius_residual<T: Scalar>(a: &Matrix<T>, b: &Matrix<T>) -> Result<f64> {
    let diff = a.sub(b)?;
    Ok(diff.frobenius_norm() / a.frobenius_norm().max(1.0))
}

/// Least-squares scalar `c` minimising `‖p − c·q‖_F`, and the resulting
/// relative residual `‖p − c·q‖_F / max(1, ‖p‖_F)`.
pub fn fit_scalar(p: &DenseOperator, q: &DenseOperator) -> Result<(f64, f64)> {
    p.check_same_shape(q)?;
    let qq: f64 = q.data.iter().map(|x| x * x).sum();
    let c = if qq == 0.0 { 0.0 } else { q.data.iter().zip(&p.data).map(|(a, b)| a * b).sum::<f64>() / qq };
    let res = frobenius_residual(p, &q.scale(&c))?;
    Ok((c, res))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::Rational;

    fn h() -> DenseOperator {
        Matrix::from_rows(&[[0.0, 0.0, 0.0, 0.0], [0.0, -1.0, 1.0, 0.0], [0.0, 1.0, -1.0, 0.0], [0.0, 0.0, 0.0, 0.0]])
    }

    #[test]
    fn kron_identity_and_diagonal() {
        let i2 = DenseOperator::identity(2);
        assert_eq!(kron(&i2, &i2).unwrap(), DenseOperator::identity(4));
        let d = DenseOperator::diag(&[1.0, 2.0]);
        assert_eq!(kron(&d, &i2).unwrap(), DenseOperator::diag(&[1.0, 1.0, 2.0, 2.0]));
    }

    #[test]
    fn kron_hand_multiplied() {
        let y = DenseOperator::from_rows(&[[-1.0, 1.0], [1.0, 0.0]]);
        let yy = kron(&y, &y).unwrap();
        assert_eq!(yy.shape(), (4, 4));
        assert_eq!(yy[(0, 0)], 1.0);
        assert_eq!(yy[(0, 3)], 1.0);
        assert_eq!(yy[(0, 1)], -1.0);
        assert_eq!(yy[(1, 2)], 1.0);
        assert_eq!(yy[(3, 3)], 0.0);
    }

    #[test]
    fn kron_dimension_cap() {
        let a = DenseOperator::identity(8);
        let err = kron_capped(&a, &a, 32).unwrap_err();
        assert!(matches!(err, Error::DimensionOverflow { requested: 64, cap: 32 }));
    }

    #[test]
    fn embed_full_width_and_identity() {
        assert_eq!(embed_local(&h(), 1, 2, 2, 2).unwrap(), h());
        for k in 1..=3 {
            assert_eq!(embed_local(&DenseOperator::identity(2), k, 1, 3, 2).unwrap(), DenseOperator::identity(8));
        }
    }

    #[test]
    fn embed_left_boundary_by_hand() {
        // A_L at alpha = 1, gamma = 0, tensored with the identity on site 2
        let a_l = DenseOperator::from_rows(&[[-1.0, 0.0], [1.0, 0.0]]);
        let full = embed_local(&a_l, 1, 1, 2, 2).unwrap();
        let expected = DenseOperator::from_rows(&[
            [-1.0, 0.0, 0.0, 0.0],
            [0.0, -1.0, 0.0, 0.0],
            [1.0, 0.0, 0.0, 0.0],
            [0.0, 1.0, 0.0, 0.0],
        ]);
        assert_eq!(full, expected);
    }

    #[test]
    fn embed_rejects_bad_ranges() {
        assert!(matches!(embed_local(&h(), 2, 2, 2, 2), Err(Error::Index(_))));
        assert!(matches!(embed_local(&h(), 0, 2, 2, 2), Err(Error::Index(_))));
        assert!(matches!(embed_local(&h(), 1, 1, 2, 2), Err(Error::Shape { .. })));
    }

    #[test]
    fn null_space_cases() {
        let zero = DenseOperator::zeros(2, 2);
        let basis = null_space(&zero, 1e-12).unwrap();
        assert_eq!(basis.len(), 2);
        assert!((basis[0].dot(&basis[1])).abs() < 1e-15);
        assert!(null_space(&DenseOperator::identity(2), 1e-12).unwrap().is_empty());

        // single site, alpha = beta = 1: A_L + A_R = ((-1, 1), (1, -1))
        let h1 = DenseOperator::from_rows(&[[-1.0, 1.0], [1.0, -1.0]]);
        let basis = null_space(&h1, 1e-12).unwrap();
        assert_eq!(basis.len(), 1);
        let v = &basis[0];
        let p = v.scale(&(1.0 / v.sum()));
        assert!((p.0[0] - 0.5).abs() < 1e-14 && (p.0[1] - 0.5).abs() < 1e-14);
    }

    #[test]
    fn null_space_rejects_non_square() {
        assert!(matches!(null_space(&DenseOperator::zeros(2, 3), 1e-12), Err(Error::Shape { .. })));
    }

    #[test]
    fn frobenius_residual_cases() {
        let x = DenseOperator::from_rows(&[[1.0, 2.0], [3.0, 4.0]]);
        assert_eq!(frobenius_residual(&x, &x).unwrap(), 0.0);
        let r = frobenius_residual(&DenseOperator::identity(2), &DenseOperator::zeros(2, 2)).unwrap();
        assert!((r - 1.0).abs() < 1e-15);
        assert_eq!(frobenius_residual(&h(), &h().transpose()).unwrap(), 0.0);
        assert!(frobenius_residual(&x, &DenseOperator::zeros(3, 3)).is_err());
    }

    #[test]
    fn inverse_of_y_factor() {
        let y = DenseOperator::from_rows(&[[-1.0, 1.0], [1.0, 0.0]]);
        assert_eq!(y.inverse().unwrap(), DenseOperator::from_rows(&[[0.0, 1.0], [1.0, 1.0]]));
        let singular = DenseOperator::from_rows(&[[1.0, 2.0], [2.0, 4.0]]);
        assert_eq!(singular.inverse().unwrap_err(), Error::SingularFactor);
    }

    #[test]
    fn exact_kron_associativity() {
        let a = Matrix::<Rational>::from_f64_rows(&[[1.0, -0.5], [0.25, 3.0]]);
        let b = Matrix::<Rational>::from_f64_rows(&[[2.0, 0.0, 1.0]]);
        let c = Matrix::<Rational>::from_f64_rows(&[[0.5], [-1.0]]);
        let left = kron(&kron(&a, &b).unwrap(), &c).unwrap();
        let right = kron(&a, &kron(&b, &c).unwrap()).unwrap();
        assert_eq!(left, right);
    }

    #[test]
    fn fit_scalar_recovers_multiple() {
        let q = DenseOperator::from_rows(&[[1.0, 2.0], [0.0, -1.0]]);
        let p = q.scale(&-3.5);
        let (c, r) = fit_scalar(&p, &q).unwrap();
        assert!((c + 3.5).abs() < 1e-14);
        assert!(r < 1e-15);
    }
}

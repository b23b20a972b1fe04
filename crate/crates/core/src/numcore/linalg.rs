//! Linear-algebra kernels shared by every construction: elimination,
//! null spaces, solves, restrictions to invariant subspaces.
//!
//! Exact matrices go through fraction-exact row reduction. Complex matrices
//! use nalgebra's SVD for rank decisions, with a threshold relative to the
//! largest singular value.

use nalgebra::{DMatrix, DVector};

use super::matrix::Matrix;
use super::scalar::{vec_norm, Scalar, C64, Q};
use crate::error::{Error, Result};

/// Default relative singular-value threshold for float rank decisions.
pub const DEFAULT_RANK_TOL: f64 = 1e-10;

/// Relative pivot threshold used by float Gaussian elimination.
const PIVOT_TOL: f64 = 1e-13;

/// Reduced row echelon form; returns the reduced matrix and pivot columns.
pub fn rref(m: &Matrix<Q>) -> (Matrix<Q>, Vec<usize>) {
    let mut a = m.clone();
    let (rows, cols) = (a.rows(), a.cols());
    let mut pivots = Vec::new();
    let mut r = 0;
    for c in 0..cols {
        if r == rows {
            break;
        }
        let Some(p) = (r..rows).find(|&i| !num_traits::Zero::is_zero(&a[(i, c)])) else {
            continue;
        };
        if p != r {
            for j in 0..cols {
                let tmp = a[(p, j)].clone();
                a[(p, j)] = a[(r, j)].clone();
                a[(r, j)] = tmp;
            }
        }
        let inv = num_traits::Inv::inv(a[(r, c)].clone());
        for j in c..cols {
            a[(r, j)] = a[(r, j)].clone() * inv.clone();
        }
        for i in 0..rows {
            if i == r {
                continue;
            }
            let f = a[(i, c)].clone();
            if num_traits::Zero::is_zero(&f) {
                continue;
            }
            for j in c..cols {
                let v = a[(r, j)].clone();
                if !num_traits::Zero::is_zero(&v) {
                    a[(i, j)] = a[(i, j)].clone() - f.clone() * v;
                }
            }
        }
        pivots.push(c);
        r += 1;
    }
    (a, pivots)
}

pub(crate) fn rref_kernel(m: &Matrix<Q>) -> Vec<Vec<Q>> {
    let (red, pivots) = rref(m);
    let cols = m.cols();
    let free: Vec<usize> = (0..cols).filter(|c| !pivots.contains(c)).collect();
    free.iter()
        .map(|&f| {
            let mut v = vec![<Q as num_traits::Zero>::zero(); cols];
            v[f] = <Q as num_traits::One>::one();
            for (r, &p) in pivots.iter().enumerate() {
                v[p] = -red[(r, f)].clone();
            }
            v
        })
        .collect()
}

pub(crate) fn rref_row_space(m: &Matrix<Q>) -> Matrix<Q> {
    let (red, pivots) = rref(m);
    if pivots.is_empty() {
        return Matrix::zeros(0, m.cols());
    }
    Matrix::from_rows((0..pivots.len()).map(|r| red.row(r).to_vec()).collect())
}

fn to_nalgebra(m: &Matrix<C64>) -> DMatrix<C64> {
    DMatrix::from_fn(m.rows(), m.cols(), |i, j| m[(i, j)])
}

/// Full SVD right factor (cols x cols) and the singular values, padding
/// wide matrices with zero rows so that every right singular vector exists.
fn full_right_svd(m: &Matrix<C64>) -> (Vec<f64>, DMatrix<C64>) {
    let n = m.cols();
    let rows = m.rows().max(n);
    let mut padded = DMatrix::from_fn(rows, n, |i, j| if i < m.rows() { m[(i, j)] } else { C64::new(0.0, 0.0) });
    if rows > 2 * n {
        // same right factor, much smaller bidiagonalisation
        padded = padded.qr().r();
    }
    let svd = padded.svd(false, true);
    let v_t = svd.v_t.expect("requested V^T");
    (svd.singular_values.iter().copied().collect(), v_t)
}

pub(crate) fn svd_kernel(m: &Matrix<C64>, tol: f64) -> Vec<Vec<C64>> {
    if m.cols() == 0 {
        return Vec::new();
    }
    let (sv, v_t) = full_right_svd(m);
    let smax = sv.iter().copied().fold(0.0, f64::max);
    sv.iter()
        .enumerate()
        .filter(|(_, &s)| smax == 0.0 || s <= tol * smax)
        .map(|(i, _)| (0..m.cols()).map(|j| v_t[(i, j)].conj()).collect())
        .collect()
}

pub(crate) fn svd_least_squares(m: &Matrix<C64>, b: &[C64]) -> Result<Vec<C64>> {
    if m.rows() != b.len() {
        return Err(Error::Dimension(format!("{} rows but {} right-hand entries", m.rows(), b.len())));
    }
    if m.cols() == 0 {
        return Ok(Vec::new());
    }
    let svd = to_nalgebra(m).svd(true, true);
    let smax = svd.singular_values.max();
    let rank = svd.singular_values.iter().filter(|&&s| s > DEFAULT_RANK_TOL * smax).count();
    if rank < m.cols() {
        return Err(Error::Singular { defect: m.cols() - rank });
    }
    let x = svd.solve(&DVector::from_column_slice(b), DEFAULT_RANK_TOL * smax).map_err(|e| Error::Dimension(e.into()))?;
    Ok(x.iter().copied().collect())
}

pub(crate) fn svd_row_space(m: &Matrix<C64>, tol: f64) -> Matrix<C64> {
    if m.cols() == 0 {
        return Matrix::zeros(0, 0);
    }
    let (sv, v_t) = full_right_svd(m);
    let smax = sv.iter().copied().fold(0.0, f64::max);
    let rows: Vec<Vec<C64>> = sv
        .iter()
        .enumerate()
        .filter(|(_, &s)| smax > 0.0 && s > tol * smax)
        .map(|(i, _)| (0..m.cols()).map(|j| v_t[(i, j)]).collect())
        .collect();
    if rows.is_empty() {
        Matrix::zeros(0, m.cols())
    } else {
        Matrix::from_rows(rows)
    }
}

/// Singular values of a complex matrix, descending.
pub fn singular_values(m: &Matrix<C64>) -> Vec<f64> {
    if m.rows() == 0 || m.cols() == 0 {
        return Vec::new();
    }
    let mut sv: Vec<f64> = to_nalgebra(m).singular_values().iter().copied().collect();
    sv.sort_by(|a, b| b.total_cmp(a));
    sv
}

/// The `k` right singular vectors with the smallest singular values,
/// orthonormal, as columns.
pub fn smallest_right_singular_vectors(m: &Matrix<C64>, k: usize) -> Matrix<C64> {
    let (sv, v_t) = full_right_svd(m);
    let mut order: Vec<usize> = (0..sv.len()).collect();
    order.sort_by(|&a, &b| sv[a].total_cmp(&sv[b]));
    let cols: Vec<Vec<C64>> = order
        .iter()
        .take(k)
        .map(|&i| (0..m.cols()).map(|j| v_t[(i, j)].conj()).collect())
        .collect();
    Matrix::from_columns(m.cols(), &cols)
}

/// Basis of the right null space. Rational mode ignores `tol`; float mode
/// treats singular values below `tol * sigma_max` as zero.
pub fn kernel_basis<S: Scalar>(m: &Matrix<S>, tol: f64) -> Vec<Vec<S>> {
    S::kernel_basis(m, tol)
}

pub fn rank<S: Scalar>(m: &Matrix<S>, tol: f64) -> usize {
    m.cols() - kernel_basis(m, tol).len()
}

/// Solves `m x = rhs` for square invertible `m` by Gaussian elimination.
pub fn solve_linear<S: Scalar>(m: &Matrix<S>, rhs: &[S]) -> Result<Vec<S>> {
    let b = Matrix::from_columns(rhs.len(), &[rhs.to_vec()]);
    Ok(solve_matrix(m, &b)?.column(0))
}

/// Solves `m X = b` column-wise.
pub fn solve_matrix<S: Scalar>(m: &Matrix<S>, b: &Matrix<S>) -> Result<Matrix<S>> {
    if !m.is_square() || m.rows() != b.rows() {
        return Err(Error::Dimension(format!(
            "solve needs square system, got {}x{} with {} rhs rows",
            m.rows(),
            m.cols(),
            b.rows()
        )));
    }
    let n = m.rows();
    let k = b.cols();
    let scale = m.max_modulus().max(f64::MIN_POSITIVE);
    let mut a = m.clone();
    let mut x = b.clone();
    let mut defect = 0;
    let mut pivot_rows = Vec::with_capacity(n);
    for c in 0..n {
        let start = pivot_rows.len();
        let pick = if S::EXACT {
            (start..n).find(|&i| !a[(i, c)].is_zero())
        } else {
            (start..n)
                .max_by(|&i, &j| a[(i, c)].modulus().total_cmp(&a[(j, c)].modulus()))
                .filter(|&i| !a[(i, c)].is_negligible(PIVOT_TOL, scale))
        };
        let Some(p) = pick else {
            defect += 1;
            continue;
        };
        let r = start;
        if p != r {
            for j in 0..n {
                let t = a[(p, j)].clone();
                a[(p, j)] = a[(r, j)].clone();
                a[(r, j)] = t;
            }
            for j in 0..k {
                let t = x[(p, j)].clone();
                x[(p, j)] = x[(r, j)].clone();
                x[(r, j)] = t;
            }
        }
        let piv = a[(r, c)].clone();
        for i in (r + 1)..n {
            let f = a[(i, c)].clone() / piv.clone();
            if f.is_zero() {
                continue;
            }
            for j in c..n {
                let v = a[(r, j)].clone();
                a[(i, j)] = a[(i, j)].clone() - f.clone() * v;
            }
            for j in 0..k {
                let v = x[(r, j)].clone();
                x[(i, j)] = x[(i, j)].clone() - f.clone() * v;
            }
        }
        pivot_rows.push(c);
    }
    if defect > 0 {
        return Err(Error::Singular { defect });
    }
    // back substitution on the upper-triangular system
    let mut out: Matrix<S> = Matrix::zeros(n, k);
    for i in (0..n).rev() {
        for j in 0..k {
            let mut acc = x[(i, j)].clone();
            for t in (i + 1)..n {
                acc = acc - a[(i, t)].clone() * out[(t, j)].clone();
            }
            out[(i, j)] = acc / a[(i, i)].clone();
        }
    }
    Ok(out)
}

pub fn determinant<S: Scalar>(m: &Matrix<S>) -> S {
    assert!(m.is_square(), "determinant of non-square matrix");
    let n = m.rows();
    let mut a = m.clone();
    let mut det = S::one();
    for c in 0..n {
        let pick = if S::EXACT {
            (c..n).find(|&i| !a[(i, c)].is_zero())
        } else {
            (c..n).max_by(|&i, &j| a[(i, c)].modulus().total_cmp(&a[(j, c)].modulus()))
        };
        let Some(p) = pick.filter(|&p| !a[(p, c)].is_zero()) else {
            return S::zero();
        };
        if p != c {
            for j in 0..n {
                let t = a[(p, j)].clone();
                a[(p, j)] = a[(c, j)].clone();
                a[(c, j)] = t;
            }
            det = -det;
        }
        let piv = a[(c, c)].clone();
        det = det * piv.clone();
        for i in (c + 1)..n {
            let f = a[(i, c)].clone() / piv.clone();
            if f.is_zero() {
                continue;
            }
            for j in c..n {
                let v = a[(c, j)].clone();
                a[(i, j)] = a[(i, j)].clone() - f.clone() * v;
            }
        }
    }
    det
}

/// Matrix of `op` restricted to the invariant subspace spanned by the
/// columns of `basis`: the unique `X` with `basis * X = op * basis`,
/// obtained from the normal equations.
pub fn restrict<S: Scalar>(op: &Matrix<S>, basis: &Matrix<S>) -> Result<Matrix<S>> {
    let adj = basis.adjoint();
    let gram = adj.mul(basis);
    solve_matrix(&gram, &adj.mul(&op.mul(basis)))
}

/// Coordinates of `v` in the column basis `basis` (least squares).
pub fn coordinates<S: Scalar>(basis: &Matrix<S>, v: &[S]) -> Result<Vec<S>> {
    let adj = basis.adjoint();
    solve_linear(&adj.mul(basis), &adj.mul_vec(v))
}

/// Right inverse `R` of a full-row-rank matrix: `m R = I`.
pub fn right_inverse<S: Scalar>(m: &Matrix<S>) -> Result<Matrix<S>> {
    let adj = m.adjoint();
    let gram = m.mul(&adj);
    let inv = solve_matrix(&gram, &Matrix::identity(m.rows()))?;
    Ok(adj.mul(&inv))
}

/// A span grown one vector at a time. Exact scalars keep an echelon form;
/// floats keep an orthonormal basis and accept a vector when its component
/// outside the span exceeds `tol` relative to its norm.
#[derive(Clone, Debug)]
pub struct SpanBuilder<S> {
    tol: f64,
    rows: Vec<(usize, Vec<S>)>,
}

impl<S: Scalar> SpanBuilder<S> {
    pub fn new(tol: f64) -> Self {
        SpanBuilder { tol, rows: Vec::new() }
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    /// Adds `v` when it is independent of the span; reports whether it was.
    pub fn insert(&mut self, v: &[S]) -> bool {
        if S::EXACT {
            self.insert_exact(v)
        } else {
            self.insert_orthonormal(v)
        }
    }

    fn insert_exact(&mut self, v: &[S]) -> bool {
        let mut w = v.to_vec();
        for (p, r) in &self.rows {
            let f = w[*p].clone();
            if f.is_zero() {
                continue;
            }
            for (wi, ri) in w.iter_mut().zip(r) {
                if !ri.is_zero() {
                    *wi = wi.clone() - f.clone() * ri.clone();
                }
            }
        }
        let Some(p) = w.iter().position(|x| !x.is_zero()) else { return false };
        let inv = S::one() / w[p].clone();
        let w = w.into_iter().map(|x| x * inv.clone()).collect();
        self.rows.push((p, w));
        true
    }

    fn insert_orthonormal(&mut self, v: &[S]) -> bool {
        let norm = vec_norm(v);
        if norm == 0.0 {
            return false;
        }
        let mut w = v.to_vec();
        for _ in 0..2 {
            for (_, q) in &self.rows {
                let dot = q.iter().zip(&w).fold(S::zero(), |acc, (a, b)| acc + a.conj() * b.clone());
                for (wi, qi) in w.iter_mut().zip(q) {
                    *wi = wi.clone() - dot.clone() * qi.clone();
                }
            }
        }
        let rest = vec_norm(&w);
        if rest <= self.tol * norm {
            return false;
        }
        let inv = S::from_f64(1.0 / rest);
        self.rows.push((0, w.into_iter().map(|x| x * inv.clone()).collect()));
        true
    }
}

/// Eigenvalues of a complex square matrix via the complex Schur form.
pub fn eigenvalues(m: &Matrix<C64>) -> Vec<C64> {
    if m.rows() == 0 {
        return Vec::new();
    }
    let n = m.rows();
    let mut a = to_nalgebra(m);
    // The QR sweep can stall on exactly structured inputs (nilpotent blocks,
    // companion matrices); a unitary similarity breaks the symmetry.
    for attempt in 0..8u32 {
        if let Some(schur) = nalgebra::Schur::try_new(a.clone(), f64::EPSILON, 2000 * n) {
            let (_, t) = schur.unpack();
            return (0..n).map(|i| t[(i, i)]).collect();
        }
        let v = DVector::from_fn(n, |i, _| C64::new(1.0 + ((i as u32 * 7 + attempt * 3) % 11) as f64, (i + 1) as f64 * 0.37));
        let v = v.normalize();
        let house = DMatrix::identity(n, n) - (&v * v.adjoint()) * C64::new(2.0, 0.0);
        a = &house * a * &house;
    }
    panic!("Schur decomposition did not converge")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numcore::scalar::rat;

    fn q(rows: &[&[i64]]) -> Matrix<Q> {
        Matrix::from_rows(rows.iter().map(|r| r.iter().map(|&x| rat(x, 1)).collect()).collect())
    }

    fn c(rows: &[&[f64]]) -> Matrix<C64> {
        Matrix::from_rows(rows.iter().map(|r| r.iter().map(|&x| C64::new(x, 0.0)).collect()).collect())
    }

    #[test]
    fn kernel_examples_exact() {
        assert!(kernel_basis(&Matrix::<Q>::identity(2), 0.0).is_empty());
        assert_eq!(kernel_basis(&Matrix::<Q>::zeros(2, 2), 0.0).len(), 2);
        let k = kernel_basis(&q(&[&[1, 1], &[2, 2]]), 0.0);
        assert_eq!(k, vec![vec![rat(-1, 1), rat(1, 1)]]);
    }

    #[test]
    fn kernel_examples_float() {
        assert!(kernel_basis(&Matrix::<C64>::identity(2), 1e-10).is_empty());
        assert_eq!(kernel_basis(&Matrix::<C64>::zeros(2, 2), 1e-10).len(), 2);
        let m = c(&[&[1.0, 1.0], &[2.0, 2.0]]);
        let k = kernel_basis(&m, 1e-10);
        assert_eq!(k.len(), 1);
        let v = &k[0];
        assert!((v[0] + v[1]).norm() < 1e-12);
        assert!(m.mul_vec(v).iter().all(|x| x.norm() < 1e-12));
    }

    #[test]
    fn wide_matrix_kernel_float() {
        let m = c(&[&[1.0, 0.0, 0.0]]);
        assert_eq!(kernel_basis(&m, 1e-10).len(), 2);
    }

    #[test]
    fn solve_examples() {
        let id = Matrix::<Q>::identity(2);
        assert_eq!(solve_linear(&id, &[rat(5, 1), rat(-1, 3)]).unwrap(), vec![rat(5, 1), rat(-1, 3)]);
        let d = q(&[&[2, 0], &[0, 3]]);
        assert_eq!(solve_linear(&d, &[rat(4, 1), rat(9, 1)]).unwrap(), vec![rat(2, 1), rat(3, 1)]);
        let s = q(&[&[1, 0], &[0, 0]]);
        assert_eq!(solve_linear(&s, &[rat(1, 1), rat(1, 1)]), Err(Error::Singular { defect: 1 }));
        let sf = c(&[&[1.0, 0.0], &[0.0, 0.0]]);
        assert!(matches!(solve_linear(&sf, &[C64::new(1.0, 0.0); 2]), Err(Error::Singular { defect: 1 })));
    }

    #[test]
    fn determinant_and_row_space() {
        assert_eq!(determinant(&q(&[&[1, 2], &[3, 4]])), rat(-2, 1));
        let rs = Q::row_space(&q(&[&[1, 1], &[2, 2]]), 0.0);
        assert_eq!(rs.rows(), 1);
    }

    #[test]
    fn eigenvalues_of_triangular() {
        let m = c(&[&[2.0, 1.0], &[0.0, 3.0]]);
        let mut ev: Vec<f64> = eigenvalues(&m).iter().map(|z| z.re).collect();
        ev.sort_by(f64::total_cmp);
        assert!((ev[0] - 2.0).abs() < 1e-12 && (ev[1] - 3.0).abs() < 1e-12);
    }
}

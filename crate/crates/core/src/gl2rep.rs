//! Tensor products of gl(2) Verma modules in the polynomial realisation.
//!
//! The Verma module of highest weight `m` is identified with `C[x]`, the
//! vector `e21^j v` with `x^j`. On the `s`-th factor:
//!
//! * `e21 = x`
//! * `e12 = -x d^2/dx^2 + m d/dx`
//! * `e11 = -2x d/dx + m` (the Cartan element `e11 - e22` of the standard module)
//! * `e22 = 0`
//!
//! A tensor product of `n` factors is the polynomial ring in `x^(1..n)`, and
//! the weight space of depth `k` is spanned by the monomials of total degree
//! `k`, listed in graded reverse-lexicographic order.

use std::collections::{BTreeMap, HashMap};

use crate::error::{Error, Result};
use crate::numcore::{Matrix, Scalar, C64};

/// Weight data and marked points.
#[derive(Clone, Debug, PartialEq)]
pub struct ProblemInstance<S> {
    m: Vec<u32>,
    l: u32,
    z: Vec<S>,
}

impl<S: Scalar> ProblemInstance<S> {
    /// Validates shapes and pairwise distinctness of `z`. The separating
    /// condition is not enforced here; see [`Self::require_separating`].
    pub fn new(m: Vec<u32>, l: u32, z: Vec<S>) -> Result<Self> {
        if m.is_empty() {
            return Err(Error::Precondition("at least one marked point is required".into()));
        }
        if m.len() != z.len() {
            return Err(Error::Dimension(format!("{} weights but {} marked points", m.len(), z.len())));
        }
        for i in 0..z.len() {
            for j in 0..i {
                if (z[i].clone() - z[j].clone()).is_negligible(1e-12, 1.0 + z[i].modulus()) {
                    return Err(Error::Precondition(format!("marked points z_{} and z_{} coincide", j + 1, i + 1)));
                }
            }
        }
        Ok(ProblemInstance { m, l, z })
    }

    pub fn n(&self) -> usize {
        self.m.len()
    }

    pub fn m(&self) -> &[u32] {
        &self.m
    }

    pub fn l(&self) -> u32 {
        self.l
    }

    pub fn z(&self) -> &[S] {
        &self.z
    }

    pub fn m_total(&self) -> i64 {
        self.m.iter().map(|&x| x as i64).sum()
    }

    /// `sum m_s + 1 - l`
    pub fn ltilde(&self) -> i64 {
        self.m_total() + 1 - self.l as i64
    }

    /// `l (sum m_s + 1 - l)`, the value of `G_0` and of `sum z_s h_s`.
    pub fn g0(&self) -> i64 {
        self.l as i64 * self.ltilde()
    }

    /// First `i` in `1..=l` with `sum m_s - 2l + 1 + i = 0`, if any.
    pub fn separating_violation(&self) -> Option<usize> {
        let base = self.m_total() - 2 * self.l as i64 + 1;
        (1..=self.l as i64).find(|i| base + i == 0).map(|i| i as usize)
    }

    pub fn is_separating(&self) -> bool {
        self.separating_violation().is_none()
    }

    pub fn require_separating(&self) -> Result<()> {
        match self.separating_violation() {
            Some(i) => Err(Error::NotSeparating { i }),
            None => Ok(()),
        }
    }

    /// The weight at infinity is dominant integral: `sum m_s - 2l >= 0`.
    pub fn is_dominant(&self) -> bool {
        self.m_total() - 2 * self.l as i64 >= 0
    }

    pub fn to_c64(&self) -> ProblemInstance<C64> {
        ProblemInstance { m: self.m.clone(), l: self.l, z: self.z.iter().map(Scalar::to_c64).collect() }
    }

    pub(crate) fn m_scalar(&self, s: usize) -> S {
        S::from_u64(self.m[s] as u64)
    }
}

/// Ordered monomial basis of one weight level.
#[derive(Clone, Debug)]
pub struct WeightBasis {
    level: u32,
    indices: Vec<Vec<u32>>,
    lookup: HashMap<Vec<u32>, usize>,
}

impl WeightBasis {
    pub fn new(n: usize, level: u32) -> Self {
        let indices = weight_space_basis(n, level);
        let lookup = indices.iter().enumerate().map(|(i, j)| (j.clone(), i)).collect();
        WeightBasis { level, indices, lookup }
    }

    pub fn level(&self) -> u32 {
        self.level
    }

    pub fn len(&self) -> usize {
        self.indices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.indices.is_empty()
    }

    pub fn indices(&self) -> &[Vec<u32>] {
        &self.indices
    }

    pub fn position(&self, j: &[u32]) -> Option<usize> {
        self.lookup.get(j).copied()
    }
}

/// All compositions of `k` into `n` nonnegative parts, in graded
/// reverse-lexicographic order (`x1 > x2 > ... > xn`).
pub fn weight_space_basis(n: usize, k: u32) -> Vec<Vec<u32>> {
    fn rec(n: usize, k: u32, prefix: &mut Vec<u32>, out: &mut Vec<Vec<u32>>) {
        if prefix.len() + 1 == n {
            prefix.push(k);
            out.push(prefix.clone());
            prefix.pop();
            return;
        }
        for j in (0..=k).rev() {
            prefix.push(j);
            rec(n, k - j, prefix, out);
            prefix.pop();
        }
    }
    if n == 0 {
        return if k == 0 { vec![Vec::new()] } else { Vec::new() };
    }
    let mut out = Vec::new();
    rec(n, k, &mut Vec::with_capacity(n), &mut out);
    // grevlex: among equal total degree, smaller last exponent comes first
    out.sort_by(|a, b| {
        for i in (0..n).rev() {
            if a[i] != b[i] {
                return a[i].cmp(&b[i]);
            }
        }
        std::cmp::Ordering::Equal
    });
    out
}

/// Element of a weight level: coefficients on monomials of total degree
/// `level`.
#[derive(Clone, Debug, PartialEq)]
pub struct WeightVector<S> {
    level: u32,
    coeffs: BTreeMap<Vec<u32>, S>,
}

impl<S: Scalar> WeightVector<S> {
    pub fn from_coords(basis: &WeightBasis, coords: &[S]) -> Self {
        let coeffs = basis
            .indices()
            .iter()
            .zip(coords)
            .filter(|(_, c)| !c.is_zero())
            .map(|(j, c)| (j.clone(), c.clone()))
            .collect();
        WeightVector { level: basis.level(), coeffs }
    }

    pub fn level(&self) -> u32 {
        self.level
    }

    pub fn coeff(&self, j: &[u32]) -> S {
        self.coeffs.get(j).cloned().unwrap_or_else(S::zero)
    }

    pub fn coeffs(&self) -> &BTreeMap<Vec<u32>, S> {
        &self.coeffs
    }

    pub fn to_coords(&self, basis: &WeightBasis) -> Vec<S> {
        basis.indices().iter().map(|j| self.coeff(j)).collect()
    }

    /// Evaluates the polynomial at a point `x`.
    pub fn eval(&self, x: &[S]) -> S {
        self.coeffs.iter().fold(S::zero(), |acc, (j, c)| {
            let mono = j.iter().zip(x).fold(S::one(), |p, (&e, xs)| {
                (0..e).fold(p, |q, _| q * xs.clone())
            });
            acc + c.clone() * mono
        })
    }
}

fn factorial(n: u32) -> u64 {
    (1..=n as u64).product()
}

/// Binomial coefficient `C(n, k)` (zero when `k > n`).
pub fn binomial(n: u64, k: u64) -> u64 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    (0..k).fold(1u64, |acc, i| acc * (n - i) / (i + 1))
}

/// Matrix of the generator `e_ab` acting on factor `s` (0-based), from
/// level `k` to the level it lands in. `a`, `b` are 1-based gl(2) indices.
pub fn generator_matrix<S: Scalar>(inst: &ProblemInstance<S>, a: usize, b: usize, s: usize, k: u32) -> Result<Matrix<S>> {
    let n = inst.n();
    if s >= n {
        return Err(Error::Dimension(format!("factor index {s} out of range for n = {n}")));
    }
    let target = match (a, b) {
        (1, 2) => k.checked_sub(1).ok_or_else(|| Error::Precondition("e12 lowers level 0 below zero".into()))?,
        (2, 1) => k + 1,
        (1, 1) | (2, 2) => k,
        _ => return Err(Error::Dimension(format!("generator index ({a},{b}) is not a gl(2) index"))),
    };
    let src = WeightBasis::new(n, k);
    let dst = WeightBasis::new(n, target);
    let ms = inst.m[s] as i64;
    let mut out = Matrix::zeros(dst.len(), src.len());
    for (col, j) in src.indices().iter().enumerate() {
        let js = j[s] as i64;
        match (a, b) {
            (2, 1) => {
                let mut t = j.clone();
                t[s] += 1;
                out[(dst.position(&t).expect("raised index"), col)] = S::one();
            }
            (1, 2) => {
                if js == 0 {
                    continue;
                }
                let mut t = j.clone();
                t[s] -= 1;
                // (-x d^2 + m d) x^j = j (m - j + 1) x^(j-1)
                out[(dst.position(&t).expect("lowered index"), col)] = S::from_i64(js * (ms - js + 1));
            }
            (1, 1) => out[(col, col)] = S::from_i64(ms - 2 * js),
            _ => {}
        }
    }
    Ok(out)
}

/// Sum over factors of a generator: `E_ab = sum_s e_ab^(s)`.
pub fn total_generator<S: Scalar>(inst: &ProblemInstance<S>, a: usize, b: usize, k: u32) -> Result<Matrix<S>> {
    let mut acc = generator_matrix(inst, a, b, 0, k)?;
    for s in 1..inst.n() {
        acc = acc.add(&generator_matrix(inst, a, b, s, k)?);
    }
    Ok(acc)
}

/// Basis (as columns) of the singular vectors of depth `l`: the kernel of
/// `E12` on level `l`.
pub fn singular_basis<S: Scalar>(inst: &ProblemInstance<S>, tol: f64) -> Result<Matrix<S>> {
    let dim = WeightBasis::new(inst.n(), inst.l).len();
    if inst.l == 0 {
        return Ok(Matrix::identity(dim));
    }
    let e12 = total_generator(inst, 1, 2, inst.l)?;
    let kernel = S::kernel_basis(&e12, tol);
    Ok(Matrix::from_columns(dim, &kernel))
}

/// `C(l+n-1, n-1) - C(l+n-2, n-1)`, the dimension of the singular space for
/// separating data.
pub fn expected_singular_dimension(n: usize, l: u32) -> usize {
    let (n, l) = (n as u64, l as u64);
    let upper = binomial(l + n - 1, n - 1);
    let lower = if l == 0 { 0 } else { binomial(l + n - 2, n - 1) };
    (upper - lower) as usize
}

/// Diagonal entry of the tensor Shapovalov form on the monomial `x^j`:
/// `prod_s j_s! * m_s (m_s - 1) ... (m_s - j_s + 1)`.
pub fn shapovalov_entry<S: Scalar>(m: &[u32], j: &[u32]) -> S {
    m.iter().zip(j).fold(S::one(), |acc, (&ms, &js)| {
        let falling = (0..js as i64).fold(S::one(), |p, r| p * S::from_i64(ms as i64 - r));
        acc * S::from_u64(factorial(js)) * falling
    })
}

/// Shapovalov Gram matrix on level `k` (diagonal in the monomial basis).
pub fn shapovalov_gram<S: Scalar>(inst: &ProblemInstance<S>, k: u32) -> Matrix<S> {
    let basis = WeightBasis::new(inst.n(), k);
    let diag: Vec<S> = basis.indices().iter().map(|j| shapovalov_entry(&inst.m, j)).collect();
    Matrix::diagonal(&diag)
}

/// The quotient of the singular space by the radical of the Shapovalov form.
#[derive(Clone, Debug)]
pub struct ShQuotient<S> {
    /// Columns: basis of the singular space in level-`l` coordinates.
    pub sing_basis: Matrix<S>,
    /// Shapovalov form restricted to the singular space.
    pub gram_sing: Matrix<S>,
    /// Projection from singular-space coordinates onto quotient coordinates;
    /// its kernel is the radical.
    pub sh: Matrix<S>,
}

impl<S: Scalar> ShQuotient<S> {
    pub fn dim(&self) -> usize {
        self.sh.rows()
    }
}

pub fn sh_quotient<S: Scalar>(inst: &ProblemInstance<S>, tol: f64) -> Result<ShQuotient<S>> {
    let sing_basis = singular_basis(inst, tol)?;
    Ok(sh_quotient_from(inst, sing_basis, tol))
}

pub(crate) fn sh_quotient_from<S: Scalar>(inst: &ProblemInstance<S>, sing_basis: Matrix<S>, tol: f64) -> ShQuotient<S> {
    let gram = shapovalov_gram(inst, inst.l);
    let gram_sing = sing_basis.transpose().mul(&gram).mul(&sing_basis);
    let sh = if gram_sing.cols() == 0 { Matrix::zeros(0, 0) } else { S::row_space(&gram_sing, tol) };
    ShQuotient { sing_basis, gram_sing, sh }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numcore::{rat, Q};

    fn inst(m: &[u32], l: u32) -> ProblemInstance<Q> {
        let z = (0..m.len()).map(|i| rat(i as i64, 1)).collect();
        ProblemInstance::new(m.to_vec(), l, z).unwrap()
    }

    #[test]
    fn basis_ordering() {
        assert_eq!(weight_space_basis(2, 1), vec![vec![1, 0], vec![0, 1]]);
        assert_eq!(weight_space_basis(2, 0), vec![vec![0, 0]]);
        assert_eq!(weight_space_basis(3, 1).len(), 3);
        assert_eq!(weight_space_basis(3, 2), vec![
            vec![2, 0, 0],
            vec![1, 1, 0],
            vec![0, 2, 0],
            vec![1, 0, 1],
            vec![0, 1, 1],
            vec![0, 0, 2]
        ]);
    }

    #[test]
    fn generator_examples() {
        let i = inst(&[1, 1], 1);
        let e21 = generator_matrix(&i, 2, 1, 0, 0).unwrap();
        assert_eq!(e21.column(0), vec![rat(1, 1), rat(0, 1)]);
        let e12 = generator_matrix(&i, 1, 2, 0, 1).unwrap();
        assert_eq!(e12[(0, 0)], rat(1, 1));
        let e11 = generator_matrix(&i, 1, 1, 0, 1).unwrap();
        assert_eq!(e11[(0, 0)], rat(-1, 1));
        assert!(generator_matrix(&i, 1, 2, 0, 0).is_err());
        assert!(generator_matrix(&i, 2, 2, 1, 3).unwrap().is_zero());
    }

    #[test]
    fn singular_examples() {
        let b = singular_basis(&inst(&[1, 1], 1), 0.0).unwrap();
        assert_eq!(b.cols(), 1);
        let v = b.column(0);
        assert_eq!(v[0].clone() + v[1].clone(), rat(0, 1));
        let b = singular_basis(&inst(&[2, 3], 0), 0.0).unwrap();
        assert_eq!(b.cols(), 1);
        let b = singular_basis(&inst(&[1, 1, 1], 1), 0.0).unwrap();
        assert_eq!(b.cols(), 2);
        assert_eq!(expected_singular_dimension(3, 1), 2);
    }

    #[test]
    fn gram_examples() {
        assert_eq!(shapovalov_gram(&inst(&[1, 1], 0), 0), Matrix::identity(1));
        assert_eq!(shapovalov_gram(&inst(&[2], 0), 1)[(0, 0)], rat(2, 1));
        assert_eq!(shapovalov_gram(&inst(&[2], 0), 3)[(0, 0)], rat(0, 1));
    }

    #[test]
    fn gram_matches_adjointness_for_single_factor() {
        // <e21 v, e21 v> = <v, e12 e21 v> with v the highest-weight vector
        let i = inst(&[2], 0);
        let e21 = generator_matrix(&i, 2, 1, 0, 0).unwrap();
        let e12 = generator_matrix(&i, 1, 2, 0, 1).unwrap();
        let back = e12.mul(&e21);
        assert_eq!(back[(0, 0)].clone() * shapovalov_gram(&i, 0)[(0, 0)].clone(), shapovalov_gram(&i, 1)[(0, 0)]);
    }

    #[test]
    fn quotient_examples() {
        assert_eq!(sh_quotient(&inst(&[1, 1], 1), 0.0).unwrap().dim(), 1);
        let q = sh_quotient(&inst(&[1, 2], 2), 0.0).unwrap();
        assert_eq!((q.sing_basis.cols(), q.dim()), (1, 0));
        assert_eq!(sh_quotient(&inst(&[1, 1, 1, 1], 2), 0.0).unwrap().dim(), 2);
    }

    #[test]
    fn separating_detection() {
        let i = inst(&[0, 0], 1);
        assert_eq!(i.require_separating(), Err(Error::NotSeparating { i: 1 }));
        assert!(inst(&[1, 2], 2).is_separating());
        assert!(!inst(&[1, 2], 2).is_dominant());
        assert!(ProblemInstance::new(vec![1, 1], 1, vec![rat(1, 1), rat(1, 1)]).is_err());
    }
}

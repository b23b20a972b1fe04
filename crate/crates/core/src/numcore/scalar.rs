//! Scalar domains: exact rationals and complex doubles.
//!
//! Both domains implement [`Scalar`]. Nothing converts between them
//! implicitly; use [`Scalar::to_c64`] or [`Q`]-specific helpers.

use std::fmt::{Debug, Display};
use std::ops::{Add, Div, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_complex::Complex64;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use super::linalg;
use super::matrix::Matrix;

/// Exact rational scalar. `BigRational` keeps values in lowest terms with a
/// positive denominator.
pub type Q = BigRational;

/// Complex double-precision scalar.
pub type C64 = Complex64;

pub trait Scalar:
    Clone
    + Debug
    + Display
    + PartialEq
    + Zero
    + One
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Div<Output = Self>
    + Neg<Output = Self>
    + Send
    + Sync
    + 'static
{
    /// True for the exact rational domain.
    const EXACT: bool;

    fn from_i64(v: i64) -> Self;

    fn to_c64(&self) -> C64;

    /// Modulus as a double.
    fn modulus(&self) -> f64;

    fn conj(&self) -> Self;

    /// Square root inside the domain, if it exists there.
    fn sqrt_in_domain(&self) -> Option<Self>;

    /// Zero test: exact in rational mode, `|self| <= tol * scale` otherwise.
    fn is_negligible(&self, tol: f64, scale: f64) -> bool;

    /// Right null-space basis. `tol` is ignored in exact mode and is the
    /// relative singular-value threshold in float mode.
    fn kernel_basis(m: &Matrix<Self>, tol: f64) -> Vec<Vec<Self>>;

    /// Rows spanning the row space of `m` (a full-row-rank matrix with the
    /// same kernel as `m`).
    fn row_space(m: &Matrix<Self>, tol: f64) -> Matrix<Self>;

    /// Exact value of a finite double (zero for non-finite input).
    fn from_f64(v: f64) -> Self;

    /// Nearest value in the domain; rationals keep the real part exactly.
    fn from_c64(v: C64) -> Self;

    /// Least-squares solution of `m x = b` for a full-column-rank `m`.
    fn least_squares(m: &Matrix<Self>, b: &[Self]) -> crate::Result<Vec<Self>>;

    fn from_u64(v: u64) -> Self {
        Self::from_i64(v as i64)
    }
}

impl Scalar for Q {
    const EXACT: bool = true;

    fn from_i64(v: i64) -> Self {
        Q::from_integer(BigInt::from(v))
    }

    fn from_f64(v: f64) -> Self {
        Q::from_float(v).unwrap_or_else(Q::zero)
    }

    fn to_c64(&self) -> C64 {
        C64::new(self.to_f64().unwrap_or(f64::NAN), 0.0)
    }

    fn modulus(&self) -> f64 {
        self.abs().to_f64().unwrap_or(f64::INFINITY)
    }

    fn conj(&self) -> Self {
        self.clone()
    }

    fn sqrt_in_domain(&self) -> Option<Self> {
        if self.is_negative() {
            return None;
        }
        let n = self.numer().sqrt();
        let d = self.denom().sqrt();
        (&n * &n == *self.numer() && &d * &d == *self.denom()).then(|| Q::new(n, d))
    }

    fn is_negligible(&self, _tol: f64, _scale: f64) -> bool {
        self.is_zero()
    }

    fn kernel_basis(m: &Matrix<Self>, _tol: f64) -> Vec<Vec<Self>> {
        linalg::rref_kernel(m)
    }

    fn row_space(m: &Matrix<Self>, _tol: f64) -> Matrix<Self> {
        linalg::rref_row_space(m)
    }

    fn from_c64(v: C64) -> Self {
        Self::from_f64(v.re)
    }

    fn least_squares(m: &Matrix<Self>, b: &[Self]) -> crate::Result<Vec<Self>> {
        let mt = m.transpose();
        linalg::solve_linear(&mt.mul(m), &mt.mul_vec(b))
    }
}

impl Scalar for C64 {
    const EXACT: bool = false;

    fn from_i64(v: i64) -> Self {
        C64::new(v as f64, 0.0)
    }

    fn from_f64(v: f64) -> Self {
        C64::new(if v.is_finite() { v } else { 0.0 }, 0.0)
    }

    fn to_c64(&self) -> C64 {
        *self
    }

    fn modulus(&self) -> f64 {
        self.norm()
    }

    fn conj(&self) -> Self {
        Complex64::conj(self)
    }

    fn sqrt_in_domain(&self) -> Option<Self> {
        Some(self.sqrt())
    }

    fn is_negligible(&self, tol: f64, scale: f64) -> bool {
        self.norm() <= tol * scale
    }

    fn kernel_basis(m: &Matrix<Self>, tol: f64) -> Vec<Vec<Self>> {
        linalg::svd_kernel(m, tol)
    }

    fn row_space(m: &Matrix<Self>, tol: f64) -> Matrix<Self> {
        linalg::svd_row_space(m, tol)
    }

    fn from_c64(v: C64) -> Self {
        v
    }

    fn least_squares(m: &Matrix<Self>, b: &[Self]) -> crate::Result<Vec<Self>> {
        linalg::svd_least_squares(m, b)
    }
}

pub fn rat(num: i64, den: i64) -> Q {
    Q::new(BigInt::from(num), BigInt::from(den))
}

/// Parses `"p"`, `"p/q"` or a plain decimal such as `"-0.125"` exactly.
pub fn parse_rational(s: &str) -> Option<Q> {
    let s = s.trim();
    if let Some((p, q)) = s.split_once('/') {
        let p: BigInt = p.trim().parse().ok()?;
        let q: BigInt = q.trim().parse().ok()?;
        if q.is_zero() {
            return None;
        }
        return Some(Q::new(p, q));
    }
    if let Some((int, frac)) = s.split_once('.') {
        if frac.is_empty() || !frac.chars().all(|c| c.is_ascii_digit()) {
            return None;
        }
        let negative = int.starts_with('-');
        let int_digits = int.trim_start_matches(['-', '+']);
        if !int_digits.chars().all(|c| c.is_ascii_digit()) {
            return None;
        }
        let digits: BigInt = format!("{int_digits}{frac}").parse().ok()?;
        let scale = num_traits::pow(BigInt::from(10), frac.len());
        let v = Q::new(digits, scale);
        return Some(if negative { -v } else { v });
    }
    s.parse::<BigInt>().ok().map(Q::from_integer)
}

/// Best rational approximation of `x` with denominator at most `max_den`
/// (continued-fraction convergents).
pub fn rational_approx(x: f64, max_den: i64) -> Option<Q> {
    if !x.is_finite() {
        return None;
    }
    let (mut h0, mut h1) = (0i128, 1i128);
    let (mut k0, mut k1) = (1i128, 0i128);
    let mut r = x;
    for _ in 0..64 {
        let a = r.floor();
        if a.abs() > 1e15 {
            break;
        }
        let ai = a as i128;
        let h2 = ai * h1 + h0;
        let k2 = ai * k1 + k0;
        if k2 > max_den as i128 {
            break;
        }
        (h0, h1, k0, k1) = (h1, h2, k1, k2);
        let frac = r - a;
        if frac.abs() < 1e-14 {
            break;
        }
        r = 1.0 / frac;
    }
    (k1 != 0).then(|| Q::new(BigInt::from(h1), BigInt::from(k1)))
}

pub fn max_modulus<S: Scalar>(v: &[S]) -> f64 {
    v.iter().map(Scalar::modulus).fold(0.0, f64::max)
}

pub fn vec_norm<S: Scalar>(v: &[S]) -> f64 {
    v.iter().map(|x| x.modulus().powi(2)).sum::<f64>().sqrt()
}

pub fn to_c64_vec<S: Scalar>(v: &[S]) -> Vec<C64> {
    v.iter().map(Scalar::to_c64).collect()
}

//! Dense univariate polynomials.
//!
//! Coefficients are stored in ascending degree order; the representation is
//! canonical (no trailing zeros, empty vector for the zero polynomial).

use std::fmt;

use super::scalar::{Scalar, C64};

#[derive(Clone, Debug, PartialEq)]
pub struct UniPoly<S> {
    coeffs: Vec<S>,
}

impl<S: Scalar> UniPoly<S> {
    pub fn zero() -> Self {
        UniPoly { coeffs: Vec::new() }
    }

    pub fn one() -> Self {
        Self::constant(S::one())
    }

    pub fn x() -> Self {
        UniPoly { coeffs: vec![S::zero(), S::one()] }
    }

    pub fn constant(c: S) -> Self {
        Self::new(vec![c])
    }

    /// From ascending coefficients; trailing zeros are trimmed.
    pub fn new(mut coeffs: Vec<S>) -> Self {
        while coeffs.last().is_some_and(|c| c.is_zero()) {
            coeffs.pop();
        }
        UniPoly { coeffs }
    }

    /// `c * x^deg`
    pub fn monomial(c: S, deg: usize) -> Self {
        let mut v = vec![S::zero(); deg + 1];
        v[deg] = c;
        Self::new(v)
    }

    /// `x^k + tail[0] x^(k-1) + ... + tail[k-1]` with `k = tail.len()`.
    pub fn monic_from_tail(tail: &[S]) -> Self {
        let mut v: Vec<S> = tail.iter().rev().cloned().collect();
        v.push(S::one());
        Self::new(v)
    }

    /// `prod (x - r)`
    pub fn from_roots(roots: &[S]) -> Self {
        roots.iter().fold(Self::one(), |acc, r| acc.mul(&Self::new(vec![-r.clone(), S::one()])))
    }

    pub fn coeffs(&self) -> &[S] {
        &self.coeffs
    }

    /// Coefficient of `x^k` (zero beyond the degree).
    pub fn coeff(&self, k: usize) -> S {
        self.coeffs.get(k).cloned().unwrap_or_else(S::zero)
    }

    /// `None` for the zero polynomial.
    pub fn degree(&self) -> Option<usize> {
        self.coeffs.len().checked_sub(1)
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn leading(&self) -> S {
        self.coeffs.last().cloned().unwrap_or_else(S::zero)
    }

    /// Coefficients from the leading one down to the constant term, padded
    /// to `len` entries from the top.
    pub fn descending(&self, len: usize) -> Vec<S> {
        (0..len).rev().map(|k| self.coeff(k)).collect()
    }

    pub fn add(&self, other: &Self) -> Self {
        let n = self.coeffs.len().max(other.coeffs.len());
        Self::new((0..n).map(|k| self.coeff(k) + other.coeff(k)).collect())
    }

    pub fn sub(&self, other: &Self) -> Self {
        let n = self.coeffs.len().max(other.coeffs.len());
        Self::new((0..n).map(|k| self.coeff(k) - other.coeff(k)).collect())
    }

    pub fn scale(&self, c: &S) -> Self {
        Self::new(self.coeffs.iter().map(|a| a.clone() * c.clone()).collect())
    }

    pub fn mul(&self, other: &Self) -> Self {
        if self.is_zero() || other.is_zero() {
            return Self::zero();
        }
        let mut out = vec![S::zero(); self.coeffs.len() + other.coeffs.len() - 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            for (j, b) in other.coeffs.iter().enumerate() {
                out[i + j] = out[i + j].clone() + a.clone() * b.clone();
            }
        }
        Self::new(out)
    }

    pub fn pow(&self, e: u32) -> Self {
        (0..e).fold(Self::one(), |acc, _| acc.mul(self))
    }

    pub fn derivative(&self) -> Self {
        Self::new(
            self.coeffs
                .iter()
                .enumerate()
                .skip(1)
                .map(|(k, c)| c.clone() * S::from_u64(k as u64))
                .collect(),
        )
    }

    pub fn eval(&self, x: &S) -> S {
        self.coeffs.iter().rev().fold(S::zero(), |acc, c| acc * x.clone() + c.clone())
    }

    /// The first `k` Taylor coefficients at `x`, by repeated synthetic division.
    pub fn taylor(&self, x: &S, k: usize) -> Vec<S> {
        let mut c = self.coeffs.clone();
        let mut out = Vec::with_capacity(k);
        for _ in 0..k {
            if c.is_empty() {
                out.push(S::zero());
                continue;
            }
            // c <- (c - c(x)) / (t - x), pushing c(x)
            let mut acc = S::zero();
            let mut quot = vec![S::zero(); c.len() - 1];
            for i in (0..c.len()).rev() {
                acc = acc * x.clone() + c[i].clone();
                if i > 0 {
                    quot[i - 1] = acc.clone();
                }
            }
            out.push(acc);
            c = quot;
        }
        out
    }

    /// Taylor coefficients of the polynomial with coefficients `|c_i|` at
    /// `|x|`: bounds the terms summed by [`UniPoly::taylor`].
    pub fn taylor_scale(&self, x: &S, k: usize) -> Vec<f64> {
        let abs = UniPoly::new(self.coeffs.iter().map(|c| C64::new(c.modulus(), 0.0)).collect());
        abs.taylor(&C64::new(x.modulus(), 0.0), k).into_iter().map(|v| v.re).collect()
    }

    /// Euclidean division; panics on a zero divisor.
    pub fn div_rem(&self, divisor: &Self) -> (Self, Self) {
        let dd = divisor.degree().expect("division by the zero polynomial");
        let lead = divisor.leading();
        let mut rem = self.coeffs.clone();
        if rem.len() <= dd {
            return (Self::zero(), self.clone());
        }
        let mut quot = vec![S::zero(); rem.len() - dd];
        for k in (0..quot.len()).rev() {
            let c = rem[k + dd].clone() / lead.clone();
            if c.is_zero() {
                continue;
            }
            for (j, d) in divisor.coeffs.iter().enumerate() {
                rem[k + j] = rem[k + j].clone() - c.clone() * d.clone();
            }
            quot[k] = c;
        }
        rem.truncate(dd);
        (Self::new(quot), Self::new(rem))
    }

    /// Largest coefficient modulus.
    pub fn max_modulus(&self) -> f64 {
        self.coeffs.iter().map(Scalar::modulus).fold(0.0, f64::max)
    }

    pub fn map<T: Scalar>(&self, f: impl Fn(&S) -> T) -> UniPoly<T> {
        UniPoly::new(self.coeffs.iter().map(f).collect())
    }
}

/// The Wronskian `f' g - f g'`.
pub fn wronskian<S: Scalar>(f: &UniPoly<S>, g: &UniPoly<S>) -> UniPoly<S> {
    f.derivative().mul(g).sub(&f.mul(&g.derivative()))
}

impl<S: Scalar> fmt::Display for UniPoly<S> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        let mut first = true;
        for (k, c) in self.coeffs.iter().enumerate().rev() {
            if c.is_zero() {
                continue;
            }
            if !first {
                write!(f, " + ")?;
            }
            first = false;
            match k {
                0 => write!(f, "({c})")?,
                1 => write!(f, "({c})*x")?,
                _ => write!(f, "({c})*x^{k}")?,
            }
        }
        Ok(())
    }
}

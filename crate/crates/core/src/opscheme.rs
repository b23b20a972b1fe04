//! The second-order Fuchsian operator `D_h`, its polynomial kernel and the
//! polynomial systems cutting out the spectrum.
//!
//! Notation: `P(x) = Π (x - z_s)`, `P_s = P / (x - z_s)`, `Q = Σ m_s P_s`,
//! `p(x, a) = x^l + a_1 x^(l-1) + ... + a_l`.

use std::collections::BTreeMap;

use crate::error::{Error, Result};
use crate::gaudin::solve_universal_kernel;
use crate::gl2rep::ProblemInstance;
use crate::numcore::scalar::max_modulus;
use crate::numcore::{Matrix, Scalar, UniPoly, C64};

#[derive(Clone, Debug)]
pub struct DhOperator<S> {
    pub inst: ProblemInstance<S>,
    pub h: Vec<S>,
}

impl<S: Scalar> DhOperator<S> {
    pub fn new(inst: &ProblemInstance<S>, h: Vec<S>) -> Result<Self> {
        if h.len() != inst.n() {
            return Err(Error::Dimension(format!("expected {} values of h, got {}", inst.n(), h.len())));
        }
        Ok(DhOperator { inst: inst.clone(), h })
    }

    /// `(q_-1, q_0)`: the linear constraints placing `h` on the affine space.
    pub fn affine_constraints(&self) -> (S, S) {
        affine_constraints(&self.inst, &self.h)
    }
}

/// A point of the spectrum with its polynomial witnesses.
#[derive(Clone, Debug)]
pub struct SchemePoint<S> {
    pub h: Vec<S>,
    pub a: Vec<S>,
    /// Coefficients of the second kernel polynomial with the `x^l` term omitted.
    pub atilde: Option<Vec<S>>,
    pub multiplicity: usize,
    pub residuals: BTreeMap<String, f64>,
    /// Relative move from the spectral estimate to the refined point (float
    /// mode, simple points only).
    pub spectral_shift: Option<f64>,
}

pub(crate) fn point_polys<S: Scalar>(z: &[S]) -> (UniPoly<S>, Vec<UniPoly<S>>) {
    let p = UniPoly::from_roots(z);
    let parts = (0..z.len())
        .map(|s| {
            let others: Vec<S> = z.iter().enumerate().filter(|&(r, _)| r != s).map(|(_, x)| x.clone()).collect();
            UniPoly::from_roots(&others)
        })
        .collect();
    (p, parts)
}

fn weighted_sum<S: Scalar>(parts: &[UniPoly<S>], w: &[S]) -> UniPoly<S> {
    parts.iter().zip(w).fold(UniPoly::zero(), |acc, (p, c)| acc.add(&p.scale(c)))
}

fn m_scalars<S: Scalar>(inst: &ProblemInstance<S>) -> Vec<S> {
    inst.m().iter().map(|&m| S::from_u64(m as u64)).collect()
}

/// `P u'' - Q u' + (Σ h_s P_s) u`
pub fn apply_dh<S: Scalar>(op: &DhOperator<S>, u: &UniPoly<S>) -> UniPoly<S> {
    let (p, parts) = point_polys(op.inst.z());
    let q = weighted_sum(&parts, &m_scalars(&op.inst));
    let g = weighted_sum(&parts, &op.h);
    let d1 = u.derivative();
    p.mul(&d1.derivative()).sub(&q.mul(&d1)).add(&g.mul(u))
}

/// Largest coefficient among the three terms of `D_h u`; the natural scale
/// for rounding error in the result.
pub fn dh_scale<S: Scalar>(op: &DhOperator<S>, u: &UniPoly<S>) -> f64 {
    let (p, parts) = point_polys(op.inst.z());
    let q = weighted_sum(&parts, &m_scalars(&op.inst));
    let g = weighted_sum(&parts, &op.h);
    let d1 = u.derivative();
    p.mul(&d1.derivative()).max_modulus().max(q.mul(&d1).max_modulus()).max(g.mul(u).max_modulus())
}

pub fn affine_constraints<S: Scalar>(inst: &ProblemInstance<S>, h: &[S]) -> (S, S) {
    let sum = h.iter().fold(S::zero(), |a, b| a + b.clone());
    let weighted = h.iter().zip(inst.z()).fold(S::zero(), |a, (hs, zs)| a + hs.clone() * zs.clone());
    (sum, weighted - S::from_i64(inst.g0()))
}

/// `[q_-1, q_0, q_1, ..., q_(l+n-2)]`, where `q_i` for `i >= 1` is the
/// coefficient of `x^(l+n-2-i)` in `D_h p(x, a)`.
pub fn q_coefficients<S: Scalar>(inst: &ProblemInstance<S>, a: &[S], h: &[S]) -> Result<Vec<S>> {
    let l = inst.l() as usize;
    if a.len() != l {
        return Err(Error::Dimension(format!("expected {l} coefficients a, got {}", a.len())));
    }
    let op = DhOperator::new(inst, h.to_vec())?;
    let (qm1, q0) = op.affine_constraints();
    let image = apply_dh(&op, &UniPoly::monic_from_tail(a));
    let top = l + inst.n() - 2;
    let mut out = vec![qm1, q0];
    out.extend((1..=top).map(|i| image.coeff(top - i)));
    Ok(out)
}

fn require_affine<S: Scalar>(inst: &ProblemInstance<S>, h: &[S], tol: f64) -> Result<()> {
    let (qm1, q0) = affine_constraints(inst, h);
    let scale = 1.0 + max_modulus(h) * (1.0 + max_modulus(inst.z()));
    if !qm1.is_negligible(tol, scale) || !q0.is_negligible(tol, scale) {
        return Err(Error::Precondition(format!(
            "h violates the linear constraints: q_-1 = {qm1}, q_0 = {q0}"
        )));
    }
    Ok(())
}

fn scalar_ops<S: Scalar>(h: &[S]) -> Vec<Matrix<S>> {
    h.iter().map(|x| Matrix::from_rows(vec![vec![x.clone()]])).collect()
}

/// The unique monic degree-`l` kernel polynomial, by forward substitution on
/// `q_1 = ... = q_l = 0`.
pub fn a_of_h<S: Scalar>(inst: &ProblemInstance<S>, h: &[S], tol: f64) -> Result<Vec<S>> {
    if h.len() != inst.n() {
        return Err(Error::Dimension(format!("expected {} values of h, got {}", inst.n(), h.len())));
    }
    require_affine(inst, h, tol)?;
    inst.require_separating()?;
    let sol = solve_universal_kernel(inst.m(), inst.z(), &scalar_ops(h), &[S::one()], inst.l() as usize, tol)?;
    Ok(sol.coeffs[1..].iter().map(|v| v[0].clone()).collect())
}

/// Inverse elimination: the `h` for which `p(x, a)` satisfies the top `n - 1`
/// coefficient equations.
pub fn h_of_a<S: Scalar>(inst: &ProblemInstance<S>, a: &[S]) -> Result<Vec<S>> {
    let l = inst.l() as usize;
    let n = inst.n();
    if a.len() != l {
        return Err(Error::Dimension(format!("expected {l} coefficients a, got {}", a.len())));
    }
    inst.require_separating()?;
    if n == 1 {
        return Ok(vec![S::zero()]);
    }
    let (p, parts) = point_polys(inst.z());
    let q = weighted_sum(&parts, &m_scalars(inst));
    let poly = UniPoly::monic_from_tail(a);
    let d1 = poly.derivative();
    let t = p.mul(&d1.derivative()).sub(&q.mul(&d1));
    let coef_a = |k: usize| if k == 0 { S::one() } else { a.get(k - 1).cloned().unwrap_or_else(S::zero) };
    let top = l + n - 2;
    let mut g: Vec<S> = vec![S::from_i64(inst.g0())];
    for i in 1..(n - 1) {
        let mut gi = -t.coeff(top - i);
        for (j, gj) in g.iter().enumerate() {
            gi = gi - gj.clone() * coef_a(i - j);
        }
        g.push(gi);
    }
    let gpoly = UniPoly::new(g.into_iter().rev().collect());
    Ok(partial_fractions(&gpoly, inst.z(), &p))
}

/// Residues `g(z_s) / P'(z_s)` of `g / P`.
fn partial_fractions<S: Scalar>(g: &UniPoly<S>, z: &[S], p: &UniPoly<S>) -> Vec<S> {
    let dp = p.derivative();
    z.iter().map(|zs| g.eval(zs) / dp.eval(zs)).collect()
}

/// Relative gate for the float divisibility and Wronskian tests.
const PAIR_FLOAT_TOL: f64 = 1e-9;

/// `q_j(a, h(a))` for `j = n-1, ..., l+n-2`.
pub fn residual_system<S: Scalar>(inst: &ProblemInstance<S>, a: &[S]) -> Result<Vec<S>> {
    let h = h_of_a(inst, a)?;
    let q = q_coefficients(inst, a, &h)?;
    let n = inst.n();
    // q[k] holds q_(k-1)
    Ok(q[n..].to_vec())
}

/// The monic degree-`l̃` kernel polynomial with vanishing `x^l` coefficient,
/// returned without that coefficient.
pub fn ptilde_solve<S: Scalar>(inst: &ProblemInstance<S>, h: &[S], tol: f64) -> Result<Vec<S>> {
    if h.len() != inst.n() {
        return Err(Error::Dimension(format!("expected {} values of h, got {}", inst.n(), h.len())));
    }
    require_affine(inst, h, tol)?;
    let l = inst.l() as i64;
    let lt = inst.ltilde();
    if lt <= l {
        return Err(Error::Precondition(format!("l̃ = {lt} does not exceed l = {l}")));
    }
    let sol = solve_universal_kernel(inst.m(), inst.z(), &scalar_ops(h), &[S::one()], lt as usize, tol)?;
    let gap = (lt - l) as usize;
    if sol.pinned != Some(gap) {
        return Err(Error::Precondition("unexpected degenerate coefficient in the second kernel".into()));
    }
    let tail: Vec<S> = sol.coeffs[1..].iter().map(|v| v[0].clone()).collect();
    let op = DhOperator::new(inst, h.to_vec())?;
    let (tail, residual) = if S::EXACT {
        let r = kernel_residual(&op, &tail);
        (tail, r)
    } else {
        polish_kernel(&op, tail, gap)
    };
    if residual > tol {
        return Err(Error::Inconsistent { residual });
    }
    Ok(tail.into_iter().enumerate().filter(|&(i, _)| i + 1 != gap).map(|(_, v)| v).collect())
}

/// `|D_h u| / (1 + scale)` for the monic `u` with descending tail `tail`.
fn kernel_residual<S: Scalar>(op: &DhOperator<S>, tail: &[S]) -> f64 {
    let u = UniPoly::monic_from_tail(tail);
    apply_dh(op, &u).max_modulus() / (1.0 + dh_scale(op, &u))
}

/// Least-squares solve of `D_h u = 0` over every coefficient, with the
/// coefficient at tail position `gap` held at zero. The triangular recursion
/// only enforces the top equations and loses accuracy at high degree.
fn polish_kernel<S: Scalar>(op: &DhOperator<S>, tail: Vec<S>, gap: usize) -> (Vec<S>, f64) {
    let start = kernel_residual(op, &tail);
    let deg = tail.len();
    let rows = deg + op.inst.n();
    let free: Vec<usize> = (1..=deg).filter(|&i| i != gap).collect();
    let column = |k: usize| {
        let img = apply_dh(op, &UniPoly::monomial(S::one(), k));
        (0..rows).map(|r| img.coeff(r)).collect::<Vec<S>>()
    };
    let cols: Vec<Vec<S>> = free.iter().map(|&i| column(deg - i)).collect();
    let rhs: Vec<S> = column(deg).into_iter().map(|x| -x).collect();
    let Ok(sol) = S::least_squares(&Matrix::from_columns(rows, &cols), &rhs) else { return (tail, start) };
    let mut out = vec![S::zero(); deg];
    for (&i, v) in free.iter().zip(sol) {
        out[i - 1] = v;
    }
    let r = kernel_residual(op, &out);
    if r < start {
        (out, r)
    } else {
        (tail, start)
    }
}

/// Reinserts the omitted zero coefficient: the full monic `p̃`.
pub fn ptilde_poly<S: Scalar>(inst: &ProblemInstance<S>, atilde: &[S]) -> UniPoly<S> {
    let gap = (inst.ltilde() - inst.l() as i64) as usize;
    let mut tail = atilde.to_vec();
    tail.insert(gap - 1, S::zero());
    UniPoly::monic_from_tail(&tail)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SingularPoint {
    Finite(usize),
    Infinity,
}

/// Roots of the indicial equation. At `z_s` they are returned in ascending
/// order; at infinity the exponent of the degree-`l` solution comes first.
pub fn exponents_at<S: Scalar>(op: &DhOperator<S>, point: SingularPoint, tol: f64) -> Result<(S, S)> {
    let inst = &op.inst;
    // indicial polynomial ρ² + bρ + c
    let (b, c) = match point {
        SingularPoint::Finite(s) => {
            if s >= inst.n() {
                return Err(Error::Dimension(format!("no marked point with index {s}")));
            }
            (-inst.m_scalar(s) - S::one(), S::zero())
        }
        SingularPoint::Infinity => {
            require_affine(inst, &op.h, tol)?;
            let weighted = op.h.iter().zip(inst.z()).fold(S::zero(), |a, (hs, zs)| a + hs.clone() * zs.clone());
            (S::from_i64(inst.m_total() + 1), weighted)
        }
    };
    let two = S::from_i64(2);
    let disc = b.clone() * b.clone() - S::from_i64(4) * c;
    let root = disc
        .sqrt_in_domain()
        .ok_or_else(|| Error::Precondition("indicial discriminant has no square root in the domain".into()))?;
    let lo = (-b.clone() - root.clone()) / two.clone();
    let hi = (-b + root) / two;
    Ok(match point {
        SingularPoint::Finite(_) => (lo, hi),
        SingularPoint::Infinity => {
            let minus_l = S::from_i64(-(inst.l() as i64));
            if (lo.clone() - minus_l).is_negligible(tol.max(1e-9), 1.0) {
                (lo, hi)
            } else {
                (hi, lo)
            }
        }
    })
}

/// `(l̃ - l) Π (x - z_s)^(m_s)`
pub fn wronskian_target<S: Scalar>(inst: &ProblemInstance<S>) -> UniPoly<S> {
    let c = S::from_i64(inst.ltilde() - inst.l() as i64);
    inst.m()
        .iter()
        .zip(inst.z())
        .fold(UniPoly::constant(c), |acc, (&m, z)| acc.mul(&UniPoly::new(vec![-z.clone(), S::one()]).pow(m)))
}

/// `Wr(p̃, p) - (l̃ - l) Π (x - z_s)^(m_s)`
pub fn wronskian_check<S: Scalar>(inst: &ProblemInstance<S>, ptilde: &UniPoly<S>, p: &UniPoly<S>) -> UniPoly<S> {
    crate::numcore::wronskian(ptilde, p).sub(&wronskian_target(inst))
}

/// Monic operator `b0 d² + b1 d + b2` whose kernel is spanned by a pair.
#[derive(Clone, Debug)]
pub struct KernelPairOperator<S> {
    pub b0: UniPoly<S>,
    pub b1: UniPoly<S>,
    pub b2: UniPoly<S>,
    /// Residues of `b2 / b0`.
    pub h: Vec<S>,
}

pub fn operator_from_kernel_pair<S: Scalar>(
    inst: &ProblemInstance<S>,
    ptilde: &UniPoly<S>,
    p: &UniPoly<S>,
    tol: f64,
) -> Result<KernelPairOperator<S>> {
    let l = inst.l() as usize;
    let lt = inst.ltilde();
    if lt <= l as i64 {
        return Err(Error::Precondition(format!("l̃ = {lt} does not exceed l = {l}")));
    }
    if p.degree() != Some(l) || ptilde.degree() != Some(lt as usize) || p.leading() != S::one() || ptilde.leading() != S::one() {
        return Err(Error::MalformedPair(format!("expected monic polynomials of degrees {lt} and {l}")));
    }
    let scale = 1.0 + ptilde.max_modulus().max(p.max_modulus());
    let zero_tol = tol.max(if S::EXACT { 0.0 } else { 1e-8 });
    for (s, zs) in inst.z().iter().enumerate() {
        if ptilde.eval(zs).is_negligible(zero_tol, scale) && p.eval(zs).is_negligible(zero_tol, scale) {
            return Err(Error::NotAdmissible { s });
        }
    }
    let (f, g) = (ptilde, p);
    let (f1, g1) = (f.derivative(), g.derivative());
    let (f2, g2) = (f1.derivative(), g1.derivative());
    let raw = [f1.mul(g).sub(&f.mul(&g1)), f.mul(&g2).sub(&f2.mul(g)), f2.mul(&g1).sub(&f1.mul(&g2))];

    let gap = S::from_i64(lt - l as i64);
    let mut divisor = UniPoly::constant(gap.clone());
    let mut multiplier = UniPoly::one();
    for (&m, z) in inst.m().iter().zip(inst.z()) {
        let lin = UniPoly::new(vec![-z.clone(), S::one()]);
        if m == 0 {
            multiplier = multiplier.mul(&lin);
        } else {
            divisor = divisor.mul(&lin.pow(m - 1));
        }
    }
    // Divisibility is tested through Taylor coefficients at each z_s, each
    // against the size of the terms it sums; long division in the monomial
    // basis amplifies rounding by |z|^deg.
    let eps = if S::EXACT { 0.0 } else { tol.max(PAIR_FLOAT_TOL) };
    let numer: Vec<UniPoly<S>> = raw.iter().map(|b| b.mul(&multiplier)).collect();
    let abs = |u: &UniPoly<S>| u.map(|c| C64::new(c.modulus(), 0.0));
    let (af, ag, af1, ag1, af2, ag2, am) = (abs(f), abs(g), abs(&f1), abs(&g1), abs(&f2), abs(&g2), abs(&multiplier));
    let sizes: Vec<UniPoly<C64>> = [(&af1, &ag, &af, &ag1), (&af, &ag2, &af2, &ag), (&af2, &ag1, &af1, &ag2)]
        .iter()
        .map(|(a, b, c, d)| a.mul(b).add(&c.mul(d)).mul(&am))
        .collect();
    for (&m, z) in inst.m().iter().zip(inst.z()) {
        let k = m.max(1) as usize;
        for (b, size) in numer.iter().zip(&sizes) {
            let t = b.taylor(z, k);
            let sc = size.taylor_scale(&z.to_c64(), k);
            if t.iter().zip(&sc).take(k - 1).any(|(c, s)| !c.is_negligible(eps, 1.0 + s)) {
                return Err(Error::MalformedPair("determinant coefficients are not divisible by the Wronskian factor".into()));
            }
        }
    }
    let (pz, parts) = point_polys(inst.z());
    let q = weighted_sum(&parts, &m_scalars(inst));
    // b0 = P and b1 = -Q, compared after multiplying back by the divisor
    for ((b, size), expected) in numer.iter().zip(&sizes).zip([pz.clone(), q.scale(&-S::one())]) {
        let diff = b.sub(&divisor.mul(&expected));
        let scale = 1.0 + b.max_modulus().max(divisor.mul(&expected).max_modulus()).max(size.max_modulus());
        if !diff.coeffs().iter().all(|c| c.is_negligible(eps, scale)) {
            return Err(Error::MalformedPair("pair does not have the prescribed Wronskian".into()));
        }
    }
    let (b2, _) = numer[2].div_rem(&divisor);
    let h = partial_fractions(&b2, inst.z(), &pz);
    Ok(KernelPairOperator { b0: pz, b1: q.scale(&-S::one()), b2, h })
}

/// Multiplicity of the irreducible of highest weight `Σ m_s - 2l` in
/// `V_(m_1) ⊗ ... ⊗ V_(m_n)`.
pub fn schubert_dimension(m: &[u32], l: u32) -> u64 {
    let total: u64 = m.iter().map(|&x| x as u64).sum();
    if 2 * l as u64 > total {
        return 0;
    }
    let mut mult = vec![0u64; total as usize + 1];
    mult[0] = 1;
    let mut top = 0usize;
    for &ms in m {
        let ms = ms as usize;
        let mut next = vec![0u64; total as usize + 1];
        for (a, &c) in mult.iter().enumerate().take(top + 1) {
            if c == 0 {
                continue;
            }
            for k in 0..=a.min(ms) {
                next[a + ms - 2 * k] += c;
            }
        }
        mult = next;
        top += ms;
    }
    mult[(total - 2 * l as u64) as usize]
}

//! Gaudin Hamiltonians, the universal differential operator and the Bethe
//! algebra on the singular space and on its Shapovalov quotient.

use crate::error::{Error, Result};
use crate::gl2rep::{generator_matrix, sh_quotient_from, singular_basis, ProblemInstance, ShQuotient, WeightBasis};
use crate::numcore::linalg::{rank, restrict, right_inverse, solve_linear, SpanBuilder};
use crate::numcore::{kernel_basis, Matrix, Scalar, UniPoly, C64};

/// Which space the Bethe algebra acts on.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Space {
    /// Singular vectors of depth `l`.
    SingM,
    /// Singular vectors modulo the radical of the Shapovalov form.
    SingL,
}

#[derive(Clone, Debug)]
pub struct GaudinSystem<S> {
    pub inst: ProblemInstance<S>,
    /// `Ĥ_s` on the full level-`l` weight space.
    pub h_big: Vec<Matrix<S>>,
    /// `H_s` in coordinates of [`ShQuotient::sing_basis`].
    pub h_sing: Vec<Matrix<S>>,
    /// Induced operators on the quotient.
    pub h_l: Vec<Matrix<S>>,
    /// `G_0, ..., G_(n-2)` on the singular space.
    pub g: Vec<Matrix<S>>,
    pub quotient: ShQuotient<S>,
}

impl<S: Scalar> GaudinSystem<S> {
    pub fn hamiltonians(&self, space: Space) -> &[Matrix<S>] {
        match space {
            Space::SingM => &self.h_sing,
            Space::SingL => &self.h_l,
        }
    }

    /// The same system with every entry converted to complex doubles.
    pub fn to_c64(&self) -> GaudinSystem<C64> {
        let conv = |v: &[Matrix<S>]| v.iter().map(Matrix::to_c64).collect();
        GaudinSystem {
            inst: self.inst.to_c64(),
            h_big: conv(&self.h_big),
            h_sing: conv(&self.h_sing),
            h_l: conv(&self.h_l),
            g: conv(&self.g),
            quotient: ShQuotient {
                sing_basis: self.quotient.sing_basis.to_c64(),
                gram_sing: self.quotient.gram_sing.to_c64(),
                sh: self.quotient.sh.to_c64(),
            },
        }
    }

    pub fn dim(&self, space: Space) -> usize {
        match space {
            Space::SingM => self.quotient.sing_basis.cols(),
            Space::SingL => self.quotient.dim(),
        }
    }
}

/// `m_s m_r - Ω_(s,r)` on level `l`, where `Ω` is the gl(2) Casimir tensor
/// `½ m_s m_r + ½ h⊗h + e12⊗e21 + e21⊗e12` of the standard module.
fn casimir_complement<S: Scalar>(inst: &ProblemInstance<S>, s: usize, r: usize) -> Result<Matrix<S>> {
    let l = inst.l();
    let dim = WeightBasis::new(inst.n(), l).len();
    let half = S::one() / S::from_i64(2);
    let mm = inst.m_scalar(s) * inst.m_scalar(r);
    let hs = generator_matrix(inst, 1, 1, s, l)?;
    let hr = generator_matrix(inst, 1, 1, r, l)?;
    let mut out = Matrix::scalar(dim, mm * half.clone());
    out.add_scaled(&-half, &hs.mul(&hr));
    let up = generator_matrix(inst, 1, 2, s, l + 1)?.mul(&generator_matrix(inst, 2, 1, r, l)?);
    out.add_scaled(&-S::one(), &up);
    if l > 0 {
        let down = generator_matrix(inst, 2, 1, s, l - 1)?.mul(&generator_matrix(inst, 1, 2, r, l)?);
        out.add_scaled(&-S::one(), &down);
    }
    Ok(out)
}

/// The Gaudin Hamiltonians `Ĥ_s = Σ_(r≠s) (m_s m_r - Ω_(s,r)) / (z_s - z_r)` on
/// level `l`.
pub fn gaudin_hamiltonians<S: Scalar>(inst: &ProblemInstance<S>) -> Result<Vec<Matrix<S>>> {
    let n = inst.n();
    let dim = WeightBasis::new(n, inst.l()).len();
    let mut h: Vec<Matrix<S>> = vec![Matrix::zeros(dim, dim); n];
    for s in 0..n {
        for r in (s + 1)..n {
            let c = casimir_complement(inst, s, r)?;
            let w = S::one() / (inst.z()[s].clone() - inst.z()[r].clone());
            h[s].add_scaled(&w, &c);
            h[r].add_scaled(&-w, &c);
        }
    }
    Ok(h)
}

/// Coefficients of `Σ_s A_s Π_(r≠s)(x - z_r)`, highest power first.
fn residue_numerators<S: Scalar>(z: &[S], mats: &[Matrix<S>]) -> Vec<Matrix<S>> {
    let n = z.len();
    let d = mats.first().map_or(0, Matrix::rows);
    let mut out = vec![Matrix::zeros(d, d); n];
    for s in 0..n {
        let others: Vec<S> = z.iter().enumerate().filter(|&(r, _)| r != s).map(|(_, x)| x.clone()).collect();
        let p = UniPoly::from_roots(&others);
        for (k, c) in p.descending(n).into_iter().enumerate() {
            out[k].add_scaled(&c, &mats[s]);
        }
    }
    out
}

pub fn build_gaudin<S: Scalar>(inst: &ProblemInstance<S>, tol: f64) -> Result<GaudinSystem<S>> {
    let h_big = gaudin_hamiltonians(inst)?;
    let sing = singular_basis(inst, tol)?;
    let h_sing = h_big.iter().map(|h| restrict(h, &sing)).collect::<Result<Vec<_>>>()?;
    let quotient = sh_quotient_from(inst, sing, tol);
    let h_l = project_to_quotient(&quotient.sh, &h_sing)?;
    // Σ H_s = 0 on the singular space, so the leading numerator coefficient drops
    let g = if h_sing.is_empty() { Vec::new() } else { residue_numerators(inst.z(), &h_sing).split_off(1) };
    Ok(GaudinSystem { inst: inst.clone(), h_big, h_sing, h_l, g, quotient })
}

/// `sh · A · sh⁺` for each operator; well defined because the operators
/// preserve the radical.
fn project_to_quotient<S: Scalar>(sh: &Matrix<S>, ops: &[Matrix<S>]) -> Result<Vec<Matrix<S>>> {
    if sh.rows() == 0 {
        return Ok(ops.iter().map(|_| Matrix::zeros(0, 0)).collect());
    }
    let lift = right_inverse(sh)?;
    Ok(ops.iter().map(|a| sh.mul(a).mul(&lift)).collect())
}

/// Solution of the universal differential equation with prescribed leading
/// coefficient.
#[derive(Clone, Debug)]
pub struct KernelSolution<S> {
    /// `v_0, v_1, ..., v_deg`
    pub coeffs: Vec<Vec<S>>,
    /// Largest modulus among equations not used to determine a coefficient.
    pub residual: f64,
    /// Index of the coefficient fixed to zero by normalisation, if any.
    pub pinned: Option<usize>,
}

impl<S: Scalar> KernelSolution<S> {
    /// `v_1, ..., v_deg`
    pub fn tail(&self) -> &[Vec<S>] {
        &self.coeffs[1..]
    }
}

/// Solves `𝒟 v = 0` for `v(x) = v_0 x^deg + ... + v_deg` with operator
/// coefficients `ops` acting on vectors of length `v0.len()`.
///
/// After clearing denominators the coefficient of `x^(deg+n-1-t)` involves
/// only `v_0..v_t`; equation `t = i+1` determines `v_i`. When that equation
/// is degenerate for exactly one `i`, `v_i` is set to zero and the equation
/// joins the consistency checks.
pub fn solve_universal_kernel<S: Scalar>(
    m: &[u32],
    z: &[S],
    ops: &[Matrix<S>],
    v0: &[S],
    deg: usize,
    tol: f64,
) -> Result<KernelSolution<S>> {
    let n = z.len();
    let d = v0.len();
    if ops.len() != n || ops.iter().any(|a| a.rows() != d || a.cols() != d) {
        return Err(Error::Dimension("operator family does not match v0".into()));
    }
    let p = UniPoly::from_roots(z);
    let pi = p.descending(n + 1);
    let mut q = UniPoly::zero();
    for s in 0..n {
        let others: Vec<S> = z.iter().enumerate().filter(|&(r, _)| r != s).map(|(_, x)| x.clone()).collect();
        q = q.add(&UniPoly::from_roots(&others).scale(&S::from_u64(m[s] as u64)));
    }
    let mu = q.descending(n);
    let gamma = residue_numerators(z, ops);
    let exponent = |i: usize| S::from_i64(deg as i64 - i as i64);

    // block (t, i) of the cleared equation
    let block = |t: usize, i: usize| -> Matrix<S> {
        let mut b: Matrix<S> = Matrix::zeros(d, d);
        if t >= i + 1 {
            let k = t - i - 1;
            let e = exponent(i);
            let c = pi.get(k).cloned().unwrap_or_else(S::zero) * e.clone() * (e.clone() - S::one())
                - mu.get(k).cloned().unwrap_or_else(S::zero) * e;
            b = Matrix::scalar(d, c);
        }
        if let Some(gm) = gamma.get(t - i) {
            b = b.add(gm);
        }
        b
    };

    let scale = 1.0 + ops.iter().map(Matrix::max_modulus).fold(0.0, f64::max);
    let mut coeffs: Vec<Vec<S>> = vec![v0.to_vec()];
    let mut pinned = None;
    let mut checks: Vec<usize> = vec![0, 1];
    for i in 1..=deg {
        let t = i + 1;
        let diag = block(t, i);
        let mut rhs = vec![S::zero(); d];
        for (j, vj) in coeffs.iter().enumerate() {
            let contrib = block(t, j).mul_vec(vj);
            for (r, c) in rhs.iter_mut().zip(contrib) {
                *r = r.clone() - c;
            }
        }
        match solve_linear(&diag, &rhs) {
            Ok(v) if !is_degenerate(&diag, tol, scale) => coeffs.push(v),
            _ => {
                if pinned.is_some() {
                    return Err(Error::NotSeparating { i });
                }
                pinned = Some(i);
                checks.push(t);
                coeffs.push(vec![S::zero(); d]);
            }
        }
    }
    checks.extend((deg + 2)..(deg + n));

    let mut residual = 0.0f64;
    for &t in &checks {
        let mut acc = vec![S::zero(); d];
        for (i, vi) in coeffs.iter().enumerate().take(t.min(deg) + 1) {
            for (a, c) in acc.iter_mut().zip(block(t, i).mul_vec(vi)) {
                *a = a.clone() + c;
            }
        }
        residual = residual.max(crate::numcore::scalar::max_modulus(&acc));
    }
    Ok(KernelSolution { coeffs, residual, pinned })
}

fn is_degenerate<S: Scalar>(m: &Matrix<S>, tol: f64, scale: f64) -> bool {
    if S::EXACT {
        rank(m, tol) < m.rows()
    } else {
        crate::numcore::linalg::singular_values(&m.to_c64())
            .last()
            .is_none_or(|&s| s <= tol.max(1e-9) * scale)
    }
}

/// Polynomial-valued kernel element of the universal operator on the chosen
/// space. `deg` must be `l` or `l̃`; for `l̃` the coefficient of `x^l` is
/// normalised to zero.
pub fn polynomial_valued_kernel<S: Scalar>(
    sys: &GaudinSystem<S>,
    space: Space,
    v0: &[S],
    deg: usize,
    tol: f64,
) -> Result<KernelSolution<S>> {
    let inst = &sys.inst;
    let l = inst.l() as usize;
    let lt = inst.ltilde();
    if deg != l && deg as i64 != lt {
        return Err(Error::Precondition(format!("degree {deg} is neither l = {l} nor l̃ = {lt}")));
    }
    if deg == l {
        inst.require_separating()?;
    }
    let ops = sys.hamiltonians(space);
    if v0.len() != sys.dim(space) {
        return Err(Error::Dimension(format!("v0 has length {} but the space has dimension {}", v0.len(), sys.dim(space))));
    }
    let sol = solve_universal_kernel(inst.m(), inst.z(), ops, v0, deg, tol)?;
    if deg != l && sol.pinned != Some(deg - l) {
        return Err(Error::Precondition("normalisation index does not match l̃ - l".into()));
    }
    Ok(sol)
}

/// Basis of the unital algebra generated by commuting matrices, by monomial
/// closure.
pub fn bethe_algebra_basis<S: Scalar>(mats: &[Matrix<S>], dim: usize, tol: f64) -> Vec<Matrix<S>> {
    if dim == 0 {
        return Vec::new();
    }
    let mut span = SpanBuilder::new(tol.max(if S::EXACT { 0.0 } else { 1e-10 }));
    let id = Matrix::identity(dim);
    span.insert(id.entries());
    let mut basis = vec![id];
    let mut frontier = basis.clone();
    while !frontier.is_empty() {
        let mut next = Vec::new();
        for f in &frontier {
            for a in mats {
                let mut cand = a.mul(f);
                let size = cand.max_modulus();
                if !S::EXACT && size > 0.0 {
                    cand = cand.map(|x| x.clone() / S::from_f64(size));
                }
                if span.insert(cand.entries()) {
                    basis.push(cand.clone());
                    next.push(cand);
                }
            }
        }
        frontier = next;
    }
    basis
}

fn vectorised<S: Scalar>(mats: &[Matrix<S>]) -> Matrix<S> {
    let len = mats.first().map_or(0, |m| m.rows() * m.cols());
    Matrix::from_columns(len, &mats.iter().map(|m| m.entries().to_vec()).collect::<Vec<_>>())
}

fn combine<S: Scalar>(basis: &[Matrix<S>], c: &[S]) -> Matrix<S> {
    let mut out = Matrix::zeros(basis[0].rows(), basis[0].cols());
    for (b, ci) in basis.iter().zip(c) {
        out.add_scaled(ci, b);
    }
    out
}

/// Elements `f` of the algebra with `sh · f = 0`, i.e. the kernel of the map
/// onto the quotient algebra.
pub fn quotient_kernel<S: Scalar>(algebra: &[Matrix<S>], sh: &Matrix<S>, tol: f64) -> Vec<Matrix<S>> {
    if algebra.is_empty() {
        return Vec::new();
    }
    if sh.rows() == 0 {
        return algebra.to_vec();
    }
    let images: Vec<Matrix<S>> = algebra.iter().map(|f| sh.mul(f)).collect();
    kernel_basis(&vectorised(&images), tol).iter().map(|c| combine(algebra, c)).collect()
}

/// `J = { f : f g = 0 for every g in kernel }` inside the algebra.
pub fn annihilator_ideal<S: Scalar>(algebra: &[Matrix<S>], kernel: &[Matrix<S>], tol: f64) -> Vec<Matrix<S>> {
    if algebra.is_empty() {
        return Vec::new();
    }
    if kernel.is_empty() {
        return algebra.to_vec();
    }
    let cols: Vec<Vec<S>> = algebra
        .iter()
        .map(|f| kernel.iter().flat_map(|g| f.mul(g).entries().to_vec()).collect())
        .collect();
    let len = cols[0].len();
    kernel_basis(&Matrix::from_columns(len, &cols), tol).iter().map(|c| combine(algebra, c)).collect()
}

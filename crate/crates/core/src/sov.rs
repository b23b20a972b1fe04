//! Separation of variables and the universal weight function.
//!
//! With `F(t) = Σ_s x_s Π_(i≠s)(t - z_i) = u Π_k (t - y_k)` and `t_1..t_l` the
//! roots of `p(·, a)`, the weight function is
//! `ω = (-1)^l Π_j F(t_j) = (-1)^(ln) u^l Π_k p(y_k, a)`.

use std::collections::BTreeMap;
use std::ops::{Add, Mul, Neg, Sub};

use num_traits::{One, Zero};

use crate::error::{Error, Result};
use crate::gaudin::GaudinSystem;
use crate::gl2rep::{total_generator, ProblemInstance, WeightBasis, WeightVector};
use crate::numcore::dd::DdComplex;
use crate::numcore::linalg::{coordinates, eigenvalues, kernel_basis, SpanBuilder};
use crate::numcore::scalar::vec_norm;
use crate::numcore::{Matrix, Scalar, UniPoly, C64};
use crate::opscheme::{point_polys, SchemePoint};

/// Roots of a polynomial as eigenvalues of its companion matrix, sorted by
/// real then imaginary part.
pub fn poly_roots<S: Scalar>(p: &UniPoly<S>) -> Vec<C64> {
    let Some(deg) = p.degree() else { return Vec::new() };
    if deg == 0 {
        return Vec::new();
    }
    let lead = p.leading().to_c64();
    let companion = Matrix::from_fn(deg, deg, |i, j| {
        if i == 0 {
            -p.coeff(deg - 1 - j).to_c64() / lead
        } else if j + 1 == i {
            C64::new(1.0, 0.0)
        } else {
            C64::new(0.0, 0.0)
        }
    });
    let coeffs: Vec<C64> = (0..=deg).map(|i| p.coeff(i).to_c64()).collect();
    let mut roots: Vec<C64> = eigenvalues(&companion).into_iter().map(|r| polish_root(&coeffs, r)).collect();
    roots.sort_by(|a, b| a.re.total_cmp(&b.re).then(a.im.total_cmp(&b.im)));
    roots
}

/// `p(r)` in double-double and `p'(r)` in plain arithmetic, coefficients ascending.
fn eval_with_derivative(coeffs: &[C64], r: C64) -> (C64, C64) {
    let rd = DdComplex::from(r);
    let mut v = DdComplex::zero();
    let mut d = C64::new(0.0, 0.0);
    for c in coeffs.iter().rev() {
        d = d * r + C64::from(v);
        v = v * rd + DdComplex::from(*c);
    }
    (C64::from(v), d)
}

/// A few Newton steps, each kept only if it lowers `|p|`.
fn polish_root(coeffs: &[C64], mut r: C64) -> C64 {
    let (mut v, mut d) = eval_with_derivative(coeffs, r);
    for _ in 0..4 {
        if v.norm() == 0.0 || d.norm() == 0.0 {
            break;
        }
        let next = r - v / d;
        let (nv, nd) = eval_with_derivative(coeffs, next);
        if nv.norm() >= v.norm() {
            break;
        }
        (r, v, d) = (next, nv, nd);
    }
    r
}

/// `F(t) = Σ_s x_s Π_(i≠s)(t - z_i)`
pub fn separating_polynomial<S: Scalar>(z: &[S], x: &[S]) -> UniPoly<S> {
    let (_, parts) = point_polys(z);
    parts.iter().zip(x).fold(UniPoly::zero(), |acc, (p, c)| acc.add(&p.scale(c)))
}

/// `u = Σ x_s` and the roots `y` of `F / u`.
pub fn change_of_variables<S: Scalar>(inst: &ProblemInstance<S>, x: &[S]) -> Result<(S, Vec<C64>)> {
    if x.len() != inst.n() {
        return Err(Error::Dimension(format!("expected {} coordinates, got {}", inst.n(), x.len())));
    }
    let u = x.iter().fold(S::zero(), |a, b| a + b.clone());
    if u.is_negligible(1e-14, 1.0 + x.iter().map(Scalar::modulus).fold(0.0, f64::max)) {
        return Err(Error::DegenerateU);
    }
    Ok((u, poly_roots(&separating_polynomial(inst.z(), x))))
}

/// The ring operations the weight-function expansion needs.
trait Ring: Clone + Zero + One + Add<Output = Self> + Sub<Output = Self> + Mul<Output = Self> + Neg<Output = Self> {}

impl<T> Ring for T where T: Clone + Zero + One + Add<Output = T> + Sub<Output = T> + Mul<Output = T> + Neg<Output = T> {}

type Square<R> = Vec<Vec<R>>;

fn mat_mul<R: Ring>(a: &Square<R>, b: &Square<R>) -> Square<R> {
    let d = a.len();
    (0..d)
        .map(|i| (0..d).map(|j| (0..d).fold(R::zero(), |acc, k| acc + a[i][k].clone() * b[k][j].clone())).collect())
        .collect()
}

/// Coefficients of `det(Σ_s x_s P_s(C))` by monomial, with `C` the companion
/// matrix of `p(x, a)` and `P_s = Π_(i≠s)(t - z_i)`.
fn weight_terms<R: Ring>(a: &[R], z: &[R]) -> BTreeMap<Vec<u32>, R> {
    let l = a.len();
    let n = z.len();
    // companion matrix: subdiagonal ones, last column -p_i (ascending)
    let comp: Square<R> = (0..l)
        .map(|i| {
            (0..l)
                .map(|j| {
                    if j + 1 == l {
                        -a[l - 1 - i].clone()
                    } else if i == j + 1 {
                        R::one()
                    } else {
                        R::zero()
                    }
                })
                .collect()
        })
        .collect();
    let blocks: Vec<Square<R>> = (0..n)
        .map(|s| {
            // Horner on the product form: Π_(i≠s)(C - z_i)
            let mut acc: Square<R> = (0..l).map(|i| (0..l).map(|j| if i == j { R::one() } else { R::zero() }).collect()).collect();
            for (i, zi) in z.iter().enumerate() {
                if i == s {
                    continue;
                }
                let mut shifted = comp.clone();
                for (d, row) in shifted.iter_mut().enumerate() {
                    row[d] = row[d].clone() - zi.clone();
                }
                acc = mat_mul(&acc, &shifted);
            }
            acc
        })
        .collect();

    // Multilinear expansion of det(Σ x_s A_s) row by row; the state is the
    // set of used columns and the exponent vector so far.
    let mut states: BTreeMap<(u32, Vec<u32>), R> = BTreeMap::new();
    states.insert((0, vec![0; n]), R::one());
    for row in 0..l {
        let mut next: BTreeMap<(u32, Vec<u32>), R> = BTreeMap::new();
        for ((used, expo), coef) in &states {
            for col in 0..l {
                if used & (1 << col) != 0 {
                    continue;
                }
                let odd = (used >> (col + 1)).count_ones() % 2 == 1;
                for (s, block) in blocks.iter().enumerate() {
                    let entry = &block[row][col];
                    if entry.is_zero() {
                        continue;
                    }
                    let mut e = expo.clone();
                    e[s] += 1;
                    let term = coef.clone() * entry.clone();
                    let slot = next.entry((used | (1 << col), e)).or_insert_with(R::zero);
                    *slot = if odd { slot.clone() - term } else { slot.clone() + term };
                }
            }
        }
        states = next;
    }
    let mut out: BTreeMap<Vec<u32>, R> = BTreeMap::new();
    for ((_, expo), coef) in states {
        let slot = out.entry(expo).or_insert_with(R::zero);
        *slot = if l % 2 == 1 { slot.clone() - coef } else { slot.clone() + coef };
    }
    out
}

/// The weight function on the monomial basis of level `l`, computed as
/// `(-1)^l det(Σ_s x_s P_s(C))` with `C` the companion matrix of `p`.
/// Float inputs are expanded in double-double arithmetic: the coefficients
/// are sums of terms much larger than themselves.
pub fn weight_function<S: Scalar>(inst: &ProblemInstance<S>, a: &[S]) -> Result<WeightVector<S>> {
    let l = inst.l() as usize;
    let n = inst.n();
    if a.len() != l {
        return Err(Error::Dimension(format!("expected {l} coefficients a, got {}", a.len())));
    }
    let basis = WeightBasis::new(n, inst.l());
    if l == 0 {
        return Ok(WeightVector::from_coords(&basis, &[S::one()]));
    }
    let terms: Vec<(Vec<u32>, S)> = if S::EXACT {
        weight_terms(a, inst.z()).into_iter().collect()
    } else {
        let wide = |v: &[S]| v.iter().map(|x| DdComplex::from(x.to_c64())).collect::<Vec<_>>();
        weight_terms(&wide(a), &wide(inst.z())).into_iter().map(|(e, c)| (e, S::from_c64(c.into()))).collect()
    };
    let mut coords = vec![S::zero(); basis.len()];
    for (expo, coef) in terms {
        let idx = basis.position(&expo).expect("exponent of total degree l");
        coords[idx] = coords[idx].clone() + coef;
    }
    Ok(WeightVector::from_coords(&basis, &coords))
}

/// `(-1)^(ln) u^l Π_k p(y_k, a)` at a numeric point `x`.
pub fn weight_function_uy<S: Scalar>(inst: &ProblemInstance<S>, a: &[S], x: &[S]) -> Result<C64> {
    let (u, y) = change_of_variables(inst, x)?;
    let p = UniPoly::monic_from_tail(a);
    let coeffs: Vec<C64> = (0..=inst.l() as usize).map(|i| p.coeff(i).to_c64()).collect();
    let l = inst.l() as i32;
    let sign = if (inst.l() as usize * inst.n()) % 2 == 0 { 1.0 } else { -1.0 };
    Ok(y.iter().fold(u.to_c64().powi(l) * sign, |acc, yk| acc * eval_with_derivative(&coeffs, *yk).0))
}

/// Eigenvector attached to a spectrum point.
#[derive(Clone, Debug)]
pub struct BetheVector<S> {
    pub point: SchemePoint<S>,
    /// Level-`l` coordinates.
    pub omega_m: Vec<S>,
    /// Coordinates in the quotient; zero when the point has no eigenline there.
    pub omega_l: Vec<S>,
    /// `|Ĥ_s ω - h_s ω| / (|Ĥ_s|_F |ω|)`
    pub eigen_residuals: Vec<f64>,
    pub e12_residual: f64,
    /// Dimension of the Bethe-algebra closure of `ω` when `ω` lies in the
    /// radical; the quotient eigenline, if any, is taken from its image.
    pub invariant_subspace_dim: Option<usize>,
}

fn nonzero(x: f64) -> f64 {
    if x == 0.0 {
        1.0
    } else {
        x
    }
}

fn relative<S: Scalar>(v: &[S], scale: f64) -> f64 {
    let r = vec_norm(v);
    if r == 0.0 {
        0.0
    } else {
        r / scale.max(f64::MIN_POSITIVE)
    }
}

pub fn bethe_vector<S: Scalar>(sys: &GaudinSystem<S>, point: &SchemePoint<S>, tol: f64) -> Result<BetheVector<S>> {
    let inst = &sys.inst;
    let l = inst.l();
    let basis = WeightBasis::new(inst.n(), l);
    let omega = weight_function(inst, &point.a)?.to_coords(&basis);
    let norm = vec_norm(&omega);
    if norm == 0.0 {
        return Err(Error::Verification { what: "weight function vanishes".into(), residual: 0.0 });
    }
    let gate = if S::EXACT { 0.0 } else { tol };
    let mut eigen_residuals = Vec::with_capacity(inst.n());
    for (h, hs) in sys.h_big.iter().zip(&point.h) {
        let diff: Vec<S> = h.mul_vec(&omega).into_iter().zip(&omega).map(|(a, b)| a - hs.clone() * b.clone()).collect();
        let res = relative(&diff, nonzero(h.frobenius()) * norm);
        if res > gate {
            return Err(Error::Verification { what: "Gaudin eigenvalue relation".into(), residual: res });
        }
        eigen_residuals.push(res);
    }
    let e12_residual = if l == 0 {
        0.0
    } else {
        let e12 = total_generator(inst, 1, 2, l)?;
        relative(&e12.mul_vec(&omega), norm)
    };
    if e12_residual > gate {
        return Err(Error::Verification { what: "E12 annihilation".into(), residual: e12_residual });
    }

    let q = &sys.quotient;
    let sing_coords = coordinates(&q.sing_basis, &omega)?;
    let mut omega_l = q.sh.mul_vec(&sing_coords);
    let mut invariant_subspace_dim = None;
    let scale = 1.0 + vec_norm(&sing_coords);
    let vanishes = q.dim() > 0 && omega_l.iter().all(|c| c.is_negligible(tol.max(1e-12), scale));
    if vanishes {
        let closure = bethe_closure(&sys.h_sing, &sing_coords, tol);
        invariant_subspace_dim = Some(closure.cols());
        if let Some(line) = eigenline_in_image(sys, &closure, &point.h, tol) {
            omega_l = line;
        }
    }
    Ok(BetheVector {
        point: point.clone(),
        omega_m: omega,
        omega_l,
        eigen_residuals,
        e12_residual,
        invariant_subspace_dim,
    })
}

/// Column basis of the span of `A v` over the algebra generated by `mats`.
fn bethe_closure<S: Scalar>(mats: &[Matrix<S>], v: &[S], tol: f64) -> Matrix<S> {
    let d = v.len();
    let mut span = SpanBuilder::new(tol.max(1e-10));
    span.insert(v);
    let mut vecs = vec![v.to_vec()];
    let mut frontier = vecs.clone();
    while !frontier.is_empty() {
        let mut next = Vec::new();
        for w in &frontier {
            for m in mats {
                let cand = m.mul_vec(w);
                if span.insert(&cand) {
                    vecs.push(cand.clone());
                    next.push(cand);
                }
            }
        }
        frontier = next;
    }
    Matrix::from_columns(d, &vecs)
}

fn eigenline_in_image<S: Scalar>(sys: &GaudinSystem<S>, closure: &Matrix<S>, h: &[S], tol: f64) -> Option<Vec<S>> {
    let image = sys.quotient.sh.mul(closure);
    let blocks: Vec<Matrix<S>> = sys
        .h_l
        .iter()
        .zip(h)
        .map(|(m, hs)| m.sub(&Matrix::scalar(m.rows(), hs.clone())).mul(&image))
        .collect();
    let scale = 1.0 + image.max_modulus();
    kernel_basis(&Matrix::vstack(&blocks), tol.max(1e-10))
        .into_iter()
        .map(|c| image.mul_vec(&c))
        .find(|w| w.iter().any(|x| !x.is_negligible(tol.max(1e-12), scale)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gaudin::build_gaudin;
    use crate::numcore::{rat, Q};
    use std::collections::BTreeMap;

    fn e1() -> ProblemInstance<Q> {
        ProblemInstance::new(vec![1, 1], 1, vec![rat(0, 1), rat(1, 1)]).unwrap()
    }

    #[test]
    fn change_examples() {
        let (u, y) = change_of_variables(&e1(), &[rat(1, 1), rat(1, 1)]).unwrap();
        assert_eq!(u, rat(2, 1));
        assert!((y[0] - C64::new(0.5, 0.0)).norm() < 1e-14);
        let (u, y) = change_of_variables(&e1(), &[rat(1, 1), rat(0, 1)]).unwrap();
        assert_eq!(u, rat(1, 1));
        assert!((y[0] - C64::new(1.0, 0.0)).norm() < 1e-14);
        assert_eq!(change_of_variables(&e1(), &[rat(1, 1), rat(-1, 1)]), Err(Error::DegenerateU));
    }

    #[test]
    fn weight_examples() {
        let w = weight_function(&e1(), &[rat(-1, 2)]).unwrap();
        assert_eq!(w.to_coords(&WeightBasis::new(2, 1)), vec![rat(1, 2), rat(-1, 2)]);
        let i0 = ProblemInstance::new(vec![1, 2], 0, vec![rat(0, 1), rat(3, 1)]).unwrap();
        assert_eq!(weight_function(&i0, &[]).unwrap().to_coords(&WeightBasis::new(2, 0)), vec![rat(1, 1)]);
    }

    #[test]
    fn bethe_vector_e1() {
        let sys = build_gaudin(&e1(), 0.0).unwrap();
        let point = SchemePoint {
            h: vec![rat(-2, 1), rat(2, 1)],
            a: vec![rat(-1, 2)],
            atilde: None,
            multiplicity: 1,
            residuals: BTreeMap::new(),
            spectral_shift: None,
        };
        let bv = bethe_vector(&sys, &point, 0.0).unwrap();
        assert_eq!(bv.omega_m, vec![rat(1, 2), rat(-1, 2)]);
        assert!(bv.omega_l.iter().any(|x| *x != rat(0, 1)));
        assert_eq!(bv.eigen_residuals, vec![0.0, 0.0]);
        let wrong = SchemePoint { h: vec![rat(-1, 1), rat(1, 1)], ..point };
        assert!(matches!(bethe_vector(&sys, &wrong, 0.0), Err(Error::Verification { .. })));
    }
}

//! Joint spectrum of a commuting family, matched against the kernel
//! polynomials of `D_h`.

use std::collections::BTreeMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::gl2rep::ProblemInstance;
use crate::numcore::linalg::{determinant, eigenvalues, singular_values, smallest_right_singular_vectors, solve_matrix};
use crate::numcore::scalar::{max_modulus, rational_approx};
use crate::numcore::{kernel_basis, solve_linear, Matrix, Scalar, UniPoly, C64, Q};
use crate::opscheme::{
    a_of_h, affine_constraints, apply_dh, dh_scale, exponents_at, operator_from_kernel_pair, ptilde_poly, ptilde_solve,
    q_coefficients, wronskian_check, DhOperator, SchemePoint, SingularPoint,
};

pub const DEFAULT_CLUSTER_TOL: f64 = 1e-7;
pub const DEFAULT_RESIDUAL_TOL: f64 = 1e-8;

/// One joint eigenvalue with its generalized eigenspace.
#[derive(Clone, Debug)]
pub struct JointEigen {
    pub h: Vec<C64>,
    pub multiplicity: usize,
    /// Orthonormal columns spanning the generalized eigenspace.
    pub basis: Matrix<C64>,
}

#[derive(Clone, Debug)]
pub struct JointSpectrum {
    pub seed: u64,
    pub coefficients: Vec<u32>,
    pub eigen: Vec<JointEigen>,
}

/// Integer weights in `[1, 997]` for the random combination.
pub fn combination_coefficients(n: usize, seed: u64) -> Vec<u32> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n).map(|_| rng.gen_range(1..=997)).collect()
}

fn combination(mats: &[Matrix<C64>], coeffs: &[u32]) -> Matrix<C64> {
    let d = mats[0].rows();
    let mut a = Matrix::zeros(d, d);
    for (m, &c) in mats.iter().zip(coeffs) {
        a.add_scaled(&C64::new(c as f64, 0.0), m);
    }
    let norm = a.max_modulus();
    if norm > 0.0 {
        a.scale(&C64::new(1.0 / norm, 0.0))
    } else {
        a
    }
}

/// Single-linkage clusters of the eigenvalues; errors when two clusters are
/// separated by less than `10 tol`.
fn cluster(values: &[C64], tol: f64) -> Result<Vec<Vec<usize>>> {
    let n = values.len();
    let mut parent: Vec<usize> = (0..n).collect();
    fn find(p: &mut [usize], i: usize) -> usize {
        let mut r = i;
        while p[r] != r {
            r = p[r];
        }
        p[i] = r;
        r
    }
    for i in 0..n {
        for j in 0..i {
            if (values[i] - values[j]).norm() <= tol {
                let (a, b) = (find(&mut parent, i), find(&mut parent, j));
                parent[a] = b;
            }
        }
    }
    let mut groups: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
    for i in 0..n {
        let r = find(&mut parent, i);
        groups.entry(r).or_default().push(i);
    }
    let groups: Vec<Vec<usize>> = groups.into_values().collect();
    let mut gap = f64::INFINITY;
    for (gi, a) in groups.iter().enumerate() {
        for b in &groups[gi + 1..] {
            for &i in a {
                for &j in b {
                    gap = gap.min((values[i] - values[j]).norm());
                }
            }
        }
    }
    if gap <= 10.0 * tol {
        return Err(Error::ClusterAmbiguity { gap });
    }
    Ok(groups)
}

fn centre(values: &[C64], idx: &[usize]) -> C64 {
    idx.iter().map(|&i| values[i]).sum::<C64>() / idx.len() as f64
}

fn shifted_power(a: &Matrix<C64>, lambda: C64, k: usize) -> Matrix<C64> {
    let shifted = a.sub(&Matrix::scalar(a.rows(), lambda));
    (1..k).fold(shifted.clone(), |acc, _| acc.mul(&shifted))
}

pub fn joint_spectrum(mats: &[Matrix<C64>], seed: u64, tol: f64) -> Result<JointSpectrum> {
    let coefficients = combination_coefficients(mats.len(), seed);
    let d = mats.first().map_or(0, Matrix::rows);
    if d == 0 {
        return Ok(JointSpectrum { seed, coefficients, eigen: Vec::new() });
    }
    let a = combination(mats, &coefficients);
    let values = eigenvalues(&a);
    let mut eigen = Vec::new();
    for idx in cluster(&values, tol)? {
        let k = idx.len();
        let lambda = centre(&values, &idx);
        let basis = smallest_right_singular_vectors(&shifted_power(&a, lambda, k), k);
        let adj = basis.adjoint();
        let h = mats.iter().map(|m| adj.mul(&m.mul(&basis)).trace() / k as f64).collect();
        eigen.push(JointEigen { h, multiplicity: k, basis });
    }
    eigen.sort_by(|x, y| {
        for (a, b) in x.h.iter().zip(&y.h) {
            let o = a.re.total_cmp(&b.re).then(a.im.total_cmp(&b.im));
            if o.is_ne() {
                return o;
            }
        }
        std::cmp::Ordering::Equal
    });
    Ok(JointSpectrum { seed, coefficients, eigen })
}

/// Retries with consecutive seeds on cluster ambiguity.
pub fn joint_spectrum_reseeding(mats: &[Matrix<C64>], seed: u64, tol: f64, attempts: u32) -> Result<JointSpectrum> {
    let mut last = None;
    for k in 0..attempts.max(1) as u64 {
        match joint_spectrum(mats, seed.wrapping_add(k), tol) {
            Err(e @ Error::ClusterAmbiguity { .. }) => last = Some(e),
            other => return other,
        }
    }
    Err(last.expect("at least one attempt"))
}

/// Recovers exact rational joint eigenvalues from float ones: each `h_s` is
/// rounded by continued fractions and accepted only if the operators
/// `H_s - h_s` have a common exact kernel.
pub fn exact_points(mats: &[Matrix<Q>], spectrum: &JointSpectrum, max_den: i64) -> Option<Vec<(Vec<Q>, usize)>> {
    let mut out = Vec::new();
    for e in &spectrum.eigen {
        if e.h.iter().any(|x| x.im.abs() > 1e-9 * (1.0 + x.re.abs())) {
            return None;
        }
        let h: Vec<Q> = e.h.iter().map(|x| rational_approx(x.re, max_den)).collect::<Option<_>>()?;
        let stacked = Matrix::vstack(
            &mats.iter().zip(&h).map(|(m, hs)| m.sub(&Matrix::scalar(m.rows(), hs.clone()))).collect::<Vec<_>>(),
        );
        if kernel_basis(&stacked, 0.0).is_empty() {
            return None;
        }
        out.push((h, e.multiplicity));
    }
    Some(out)
}

/// Joint eigenvalues with multiplicities, matched to scheme points.
#[derive(Clone, Debug)]
pub struct SpectrumReport<S> {
    pub points: Vec<SchemePoint<S>>,
    pub total_multiplicity: usize,
    pub all_simple: bool,
    pub residual_summary: BTreeMap<String, f64>,
    /// Per-point failures as `(point index, message)`.
    pub failures: Vec<(usize, String)>,
}

impl<S> SpectrumReport<S> {
    pub fn is_clean(&self) -> bool {
        self.failures.is_empty()
    }
}


/// Runs every witness computation at each point. When `require_pair` is set
/// a missing second kernel polynomial counts as a failure.
pub fn match_spectrum_to_scheme<S: Scalar>(
    inst: &ProblemInstance<S>,
    candidates: &[(Vec<S>, usize)],
    require_pair: bool,
    tol: f64,
) -> SpectrumReport<S> {
    let mut points = Vec::new();
    let mut failures = Vec::new();
    let mut summary: BTreeMap<String, f64> = BTreeMap::new();
    for (idx, (h, mult)) in candidates.iter().enumerate() {
        let mut residuals = BTreeMap::new();
        let mut spectral_shift = None;
        let mut h = h.clone();
        if !S::EXACT && *mult == 1 {
            let refined = refine_point(inst, &h);
            let shift = h.iter().zip(&refined).map(|(x, y)| (x.clone() - y.clone()).modulus()).fold(0.0, f64::max);
            spectral_shift = Some(shift / (1.0 + max_modulus(&refined)));
            h = refined;
        }
        let h = &h;
        let (qm1, q0) = affine_constraints(inst, h);
        let lin_scale = 1.0 + max_modulus(h) * (1.0 + max_modulus(inst.z())) + inst.g0().unsigned_abs() as f64;
        residuals.insert("q_minus1".to_string(), qm1.modulus() / lin_scale);
        residuals.insert("q0".to_string(), q0.modulus() / lin_scale);
        let mut point =
            SchemePoint { h: h.clone(), a: Vec::new(), atilde: None, multiplicity: *mult, residuals, spectral_shift };
        if let Err(e) = witness(inst, &mut point, require_pair, tol) {
            failures.push((idx, e.to_string()));
        }
        for (k, v) in &point.residuals {
            let slot = summary.entry(k.clone()).or_insert(0.0);
            *slot = slot.max(*v);
        }
        points.push(point);
    }
    let total_multiplicity = points.iter().map(|p| p.multiplicity).sum();
    let all_simple = points.iter().all(|p| p.multiplicity == 1);
    SpectrumReport { points, total_multiplicity, all_simple, residual_summary: summary, failures }
}

/// Tolerance for the affine constraints while iterating; Newton restores them
/// to rounding after one step.
const NEWTON_AFFINE_TOL: f64 = 1e-6;

fn defining_values<S: Scalar>(inst: &ProblemInstance<S>, h: &[S]) -> Result<(Vec<S>, f64)> {
    let l = inst.l() as usize;
    let n = inst.n();
    let a = a_of_h(inst, h, NEWTON_AFFINE_TOL)?;
    let q = q_coefficients(inst, &a, h)?;
    let mut f = vec![q[0].clone(), q[1].clone()];
    f.extend(q[2 + l..l + n].iter().cloned());
    let scale = 1.0 + dh_scale(&DhOperator::new(inst, h.to_vec())?, &UniPoly::monic_from_tail(&a));
    let size = max_modulus(&f) / scale;
    Ok((f, size))
}

/// Newton refinement of a simple point on the scheme, starting from a
/// spectral estimate. Returns the input unchanged when no step improves it.
pub fn refine_point<S: Scalar>(inst: &ProblemInstance<S>, h: &[S]) -> Vec<S> {
    let Ok((mut f, mut size)) = defining_values(inst, h) else { return h.to_vec() };
    let mut best = h.to_vec();
    for _ in 0..8 {
        if size == 0.0 {
            break;
        }
        let Ok(jac) = defining_jacobian(inst, &best, NEWTON_AFFINE_TOL) else { break };
        let rhs: Vec<S> = f.iter().map(|x| -x.clone()).collect();
        let Ok(step) = solve_linear(&jac, &rhs) else { break };
        let trial: Vec<S> = best.iter().zip(&step).map(|(x, d)| x.clone() + d.clone()).collect();
        match defining_values(inst, &trial) {
            Ok((tf, ts)) if ts < size => {
                best = trial;
                f = tf;
                size = ts;
            }
            _ => break,
        }
    }
    best
}

fn witness<S: Scalar>(inst: &ProblemInstance<S>, point: &mut SchemePoint<S>, require_pair: bool, tol: f64) -> Result<()> {
    let h = point.h.clone();
    let a = a_of_h(inst, &h, tol)?;
    let q = q_coefficients(inst, &a, &h)?;
    let op = DhOperator::new(inst, h.clone())?;
    let p = UniPoly::monic_from_tail(&a);
    point.residuals.insert("q_system".into(), max_modulus(&q[2..]) / (1.0 + dh_scale(&op, &p)));
    point.a = a.clone();

    let mut exp_dev = 0.0f64;
    for (s, &m) in inst.m().iter().enumerate() {
        let (e0, e1) = exponents_at(&op, SingularPoint::Finite(s), tol)?;
        exp_dev = exp_dev.max(e0.modulus()).max((e1 - S::from_i64(m as i64 + 1)).modulus());
    }
    let (i0, i1) = exponents_at(&op, SingularPoint::Infinity, tol)?;
    exp_dev = exp_dev
        .max((i0 + S::from_i64(inst.l() as i64)).modulus())
        .max((i1 - S::from_i64(inst.l() as i64 - 1 - inst.m_total())).modulus());
    point.residuals.insert("exponents".into(), exp_dev / (1.0 + inst.m_total() as f64 + inst.l() as f64));

    if inst.ltilde() <= inst.l() as i64 {
        return if require_pair {
            Err(Error::Precondition("no second kernel polynomial for non-dominant data".into()))
        } else {
            Ok(())
        };
    }
    let atilde = match ptilde_solve(inst, &h, tol) {
        Ok(v) => v,
        Err(_) if !require_pair => return Ok(()),
        Err(e) => return Err(e),
    };
    let mut pair_res = BTreeMap::new();
    let pt = ptilde_poly(inst, &atilde);
    pair_res.insert("ptilde_kernel".to_string(), apply_dh(&op, &pt).max_modulus() / (1.0 + dh_scale(&op, &pt)));
    let wr_scale = pt.derivative().mul(&p).max_modulus().max(pt.mul(&p.derivative()).max_modulus());
    pair_res.insert("wronskian".to_string(), wronskian_check(inst, &pt, &p).max_modulus() / (1.0 + wr_scale));
    let pair = match operator_from_kernel_pair(inst, &pt, &p, tol) {
        Ok(v) => v,
        Err(_) if !require_pair => return Ok(()),
        Err(e) => return Err(e),
    };
    let back = pair.h.iter().zip(&h).map(|(x, y)| (x.clone() - y.clone()).modulus()).fold(0.0, f64::max);
    pair_res.insert("pair_roundtrip".to_string(), back / (1.0 + max_modulus(&h)));
    // off Sing L the pair is optional: keep it only when it is a genuine witness
    if !require_pair && pair_res.values().any(|&v| !(v <= tol)) {
        return Ok(());
    }
    point.residuals.extend(pair_res);
    point.atilde = Some(atilde);
    Ok(())
}

/// Jacobian with respect to `h` of `(q_-1, q_0, q_(l+1)∘a, ..., q_(l+n-2)∘a)`
/// at a point of the affine space, by the chain rule through `a(h)`.
pub fn defining_jacobian<S: Scalar>(inst: &ProblemInstance<S>, h: &[S], tol: f64) -> Result<Matrix<S>> {
    let n = inst.n();
    let l = inst.l() as usize;
    let a = a_of_h(inst, h, tol)?;
    let top = l + n - 2;
    // q_i (i >= 1) is the coefficient of x^(top - i); it is affine in a and in h separately
    let coef = |p: &UniPoly<S>, i: usize| p.coeff(top - i);
    let op = DhOperator::new(inst, h.to_vec())?;
    // ∂q_i/∂a_j = coefficient in D_h x^(l-j)
    let dq_da = Matrix::from_fn(top, l, |i, j| coef(&apply_dh(&op, &UniPoly::monomial(S::one(), l - j - 1)), i + 1));
    let p = UniPoly::monic_from_tail(&a);
    let (_, parts) = crate::opscheme::point_polys(inst.z());
    let dq_dh = Matrix::from_fn(top, n, |i, s| coef(&parts[s].mul(&p), i + 1));

    let mut jac = Matrix::zeros(n, n);
    for s in 0..n {
        jac[(0, s)] = S::one();
        jac[(1, s)] = inst.z()[s].clone();
    }
    if n > 2 {
        let rows_l: Vec<usize> = (0..l).collect();
        let da_dh = if l == 0 {
            Matrix::zeros(0, n)
        } else {
            let a_l = Matrix::from_fn(l, l, |i, j| dq_da[(rows_l[i], j)].clone());
            let h_l = Matrix::from_fn(l, n, |i, s| -dq_dh[(rows_l[i], s)].clone());
            solve_matrix(&a_l, &h_l)?
        };
        for r in 0..(n - 2) {
            let i = l + r;
            for s in 0..n {
                let mut v = dq_dh[(i, s)].clone();
                for j in 0..l {
                    v = v + dq_da[(i, j)].clone() * da_dh[(j, s)].clone();
                }
                jac[(2 + r, s)] = v;
            }
        }
    }
    Ok(jac)
}

/// Below this reciprocal condition number a float Jacobian counts as singular.
const JACOBIAN_CONDITION_FLOOR: f64 = 1e-13;

/// `1 / det J` at each simple point.
pub fn grothendieck_weights<S: Scalar>(inst: &ProblemInstance<S>, points: &[SchemePoint<S>], tol: f64) -> Result<Vec<S>> {
    for (index, p) in points.iter().enumerate() {
        if p.multiplicity != 1 {
            return Err(Error::NonSimplePoint { index, multiplicity: p.multiplicity });
        }
    }
    points
        .iter()
        .enumerate()
        .map(|(index, p)| {
            let jac = defining_jacobian(inst, &p.h, tol)?;
            let det = determinant(&jac);
            let singular = if S::EXACT {
                det.is_zero()
            } else {
                // condition of the row-equilibrated Jacobian
                let rows: Vec<Vec<C64>> = (0..jac.rows())
                    .map(|r| {
                        let size = max_modulus(jac.row(r)).max(f64::MIN_POSITIVE);
                        jac.row(r).iter().map(|x| x.to_c64() / size).collect()
                    })
                    .collect();
                let sv = singular_values(&Matrix::from_rows(rows));
                let (hi, lo) = (sv[0], sv[sv.len() - 1]);
                !(lo > JACOBIAN_CONDITION_FLOOR * hi)
            };
            if singular {
                return Err(Error::SingularJacobian { index });
            }
            Ok(S::one() / det)
        })
        .collect()
}

/// Gram matrix `(f_i, f_j) = Σ_p f_i(p) f_j(p) w_p` of functions given by
/// their values at the points.
pub fn grothendieck_gram<S: Scalar>(weights: &[S], values: &[Vec<S>]) -> Matrix<S> {
    Matrix::from_fn(values.len(), values.len(), |i, j| {
        weights
            .iter()
            .enumerate()
            .fold(S::zero(), |acc, (p, w)| acc + values[i][p].clone() * values[j][p].clone() * w.clone())
    })
}

/// Whether every generalized eigenspace of the family consists of genuine
/// joint eigenvectors; also returns the worst relative eigenvector residual.
pub fn diagonalizability_check(mats: &[Matrix<C64>], tol: f64) -> (bool, f64) {
    let d = mats.first().map_or(0, Matrix::rows);
    if d == 0 {
        return (true, 0.0);
    }
    let coeffs = combination_coefficients(mats.len(), 0);
    let a = combination(mats, &coeffs);
    let values = eigenvalues(&a);
    // coarse clusters; defective blocks split by about sqrt(eps)
    let groups = match cluster(&values, 1e-6) {
        Ok(g) => g,
        Err(_) => cluster(&values, 1e-4).unwrap_or_else(|_| vec![(0..d).collect()]),
    };
    let mut ok = true;
    let mut worst = 0.0f64;
    for idx in groups {
        let k = idx.len();
        let lambda = centre(&values, &idx);
        let shifted = a.sub(&Matrix::scalar(d, lambda));
        let sv = singular_values(&shifted);
        let small = sv.iter().filter(|&&s| s <= 1e-6).count();
        if small < k {
            ok = false;
        }
        let vecs = smallest_right_singular_vectors(&shifted, k);
        for j in 0..k {
            let v = vecs.column(j);
            for m in mats {
                let hv = m.mul_vec(&v);
                let rho: C64 = v.iter().zip(&hv).map(|(x, y)| x.conj() * y).sum();
                let res: f64 = hv.iter().zip(&v).map(|(y, x)| (y - rho * x).norm_sqr()).sum::<f64>().sqrt();
                let norm = m.frobenius().max(f64::MIN_POSITIVE);
                worst = worst.max(res / norm);
            }
        }
    }
    (ok && worst < tol, worst)
}

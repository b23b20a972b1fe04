mod common;

use common::{binom, schubert_oracle};
use gaudin_core::gaudin::gaudin_hamiltonians;
use gaudin_core::gl2rep::{generator_matrix, shapovalov_gram, total_generator, weight_space_basis, ProblemInstance};
use gaudin_core::numcore::dd::DdComplex;
use gaudin_core::numcore::{rat, wronskian, Matrix, UniPoly, C64, Q};
use gaudin_core::opscheme::{
    a_of_h, affine_constraints, apply_dh, exponents_at, h_of_a, schubert_dimension, DhOperator, SingularPoint,
};
use gaudin_core::sov::weight_function;
use proptest::prelude::*;

fn small_q() -> impl Strategy<Value = Q> {
    (-6i64..=6, 1i64..=4).prop_map(|(p, q)| rat(p, q))
}

fn distinct(z: &[Q]) -> bool {
    z.iter().enumerate().all(|(i, a)| z[..i].iter().all(|b| a != b))
}

/// Small instance with distinct rational marked points.
fn instance(max_n: usize, max_m: u32, max_l: u32) -> impl Strategy<Value = ProblemInstance<Q>> {
    (2..=max_n)
        .prop_flat_map(move |n| {
            (prop::collection::vec(1..=max_m, n), 0..=max_l, prop::collection::vec(small_q(), n))
        })
        .prop_filter("distinct z", |(_, _, z)| distinct(z))
        .prop_map(|(m, l, z)| ProblemInstance::new(m, l, z).unwrap())
}

/// A point of the affine space: free `h_3..h_n`, then `h_1, h_2` from
/// `Σ h = 0` and `Σ z h = l (Σm + 1 - l)`.
fn on_affine_space(inst: &ProblemInstance<Q>, free: &[Q]) -> Vec<Q> {
    let z = inst.z();
    let g0 = Q::from_integer(inst.g0().into());
    let rest: Q = free.iter().cloned().sum();
    let rest_z: Q = free.iter().zip(&z[2..]).map(|(h, zs)| h * zs).sum();
    // h1 + h2 = -rest, z1 h1 + z2 h2 = g0 - rest_z
    let h2 = (g0 - rest_z + &z[0] * &rest) / (&z[1] - &z[0]);
    let h1 = -rest - &h2;
    let mut h = vec![h1, h2];
    h.extend_from_slice(free);
    h
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn hamiltonians_commute_and_sum_to_zero(inst in instance(4, 2, 2)) {
        let hs = gaudin_hamiltonians(&inst).unwrap();
        let d = hs[0].rows();
        for i in 0..hs.len() {
            for j in (i + 1)..hs.len() {
                prop_assert!(hs[i].commutator(&hs[j]).is_zero());
            }
        }
        let sum = hs.iter().fold(Matrix::zeros(d, d), |acc: Matrix<Q>, h| acc.add(h));
        prop_assert!(sum.is_zero());
    }

    #[test]
    fn raising_is_adjoint_to_lowering(inst in instance(4, 3, 3)) {
        let k = inst.l();
        let up = total_generator(&inst, 2, 1, k).unwrap();
        let down = total_generator(&inst, 1, 2, k + 1).unwrap();
        let lhs = shapovalov_gram(&inst, k + 1).mul(&up);
        let rhs = down.transpose().mul(&shapovalov_gram(&inst, k));
        prop_assert_eq!(lhs, rhs);
    }

    #[test]
    fn single_factor_sl2_relation(inst in instance(3, 4, 3), s in 0usize..3) {
        let s = s % inst.n();
        let k = inst.l() + 1;
        // [e12, e21] = h on level k, computed through levels k+1 and k-1
        let e12_up = generator_matrix(&inst, 1, 2, s, k + 1).unwrap();
        let e21 = generator_matrix(&inst, 2, 1, s, k).unwrap();
        let e21_down = generator_matrix(&inst, 2, 1, s, k - 1).unwrap();
        let e12 = generator_matrix(&inst, 1, 2, s, k).unwrap();
        let h = generator_matrix(&inst, 1, 1, s, k).unwrap();
        prop_assert_eq!(e12_up.mul(&e21).sub(&e21_down.mul(&e12)), h);
    }

    #[test]
    fn schubert_matches_weight_counts(m in prop::collection::vec(0u32..=5, 1..=6), l in 0u32..=8) {
        prop_assert_eq!(schubert_dimension(&m, l), schubert_oracle(&m, l));
    }

    #[test]
    fn basis_size(n in 1usize..=6, k in 0u32..=7) {
        prop_assert_eq!(weight_space_basis(n, k).len() as u64, binom(k as u64 + n as u64 - 1, n as u64 - 1));
    }

    #[test]
    fn exponents_are_fixed_on_the_affine_space(
        inst in instance(4, 3, 3),
        free in prop::collection::vec(small_q(), 2),
    ) {
        let h = on_affine_space(&inst, &free[..inst.n() - 2]);
        let (qm1, q0) = affine_constraints(&inst, &h);
        prop_assert_eq!(qm1, rat(0, 1));
        prop_assert_eq!(q0, rat(0, 1));
        let op = DhOperator::new(&inst, h.clone()).unwrap();
        for (s, &m) in inst.m().iter().enumerate() {
            let (e0, e1) = exponents_at(&op, SingularPoint::Finite(s), 0.0).unwrap();
            prop_assert_eq!(e0, rat(0, 1));
            prop_assert_eq!(e1, rat(m as i64 + 1, 1));
        }
        let total: i64 = inst.m().iter().map(|&m| m as i64).sum();
        let l = inst.l() as i64;
        prop_assert_eq!(exponents_at(&op, SingularPoint::Infinity, 0.0).unwrap(), (rat(-l, 1), rat(l - 1 - total, 1)));
    }

    #[test]
    fn degree_drops_on_the_affine_space(
        inst in instance(4, 3, 3),
        free in prop::collection::vec(small_q(), 2),
        tail in prop::collection::vec(small_q(), 3),
    ) {
        let h = on_affine_space(&inst, &free[..inst.n() - 2]);
        let op = DhOperator::new(&inst, h).unwrap();
        let p = UniPoly::monic_from_tail(&tail[..inst.l() as usize]);
        let image = apply_dh(&op, &p);
        let bound = inst.l() as usize + inst.n();
        prop_assert!(image.degree().map_or(true, |d| d + 3 <= bound));
    }

    #[test]
    fn inverse_elimination_kills_top_coefficients(
        inst in instance(4, 3, 3),
        tail in prop::collection::vec(small_q(), 3),
    ) {
        prop_assume!(inst.is_separating());
        let a = tail[..inst.l() as usize].to_vec();
        let h = h_of_a(&inst, &a).unwrap();
        let (qm1, q0) = affine_constraints(&inst, &h);
        prop_assert_eq!(qm1, rat(0, 1));
        prop_assert_eq!(q0, rat(0, 1));
        let image = apply_dh(&DhOperator::new(&inst, h).unwrap(), &UniPoly::monic_from_tail(&a));
        prop_assert!(image.degree().map_or(true, |d| d <= inst.l() as usize));
    }

    #[test]
    fn elimination_roundtrip_for_two_points(
        inst in instance(2, 4, 3),
        tail in prop::collection::vec(small_q(), 3),
    ) {
        // with two points the affine space is a single h, so a is forced
        prop_assume!(inst.is_separating());
        let a = tail[..inst.l() as usize].to_vec();
        let h = h_of_a(&inst, &a).unwrap();
        let forced = a_of_h(&inst, &h, 0.0).unwrap();
        prop_assert_eq!(h_of_a(&inst, &forced).unwrap(), h);
    }

    #[test]
    fn wronskian_is_antisymmetric(f in prop::collection::vec(small_q(), 1..6), g in prop::collection::vec(small_q(), 1..6)) {
        let (f, g) = (UniPoly::new(f), UniPoly::new(g));
        prop_assert_eq!(wronskian(&f, &g), wronskian(&g, &f).scale(&rat(-1, 1)));
    }

    #[test]
    fn division_roundtrip(f in prop::collection::vec(small_q(), 1..8), g in prop::collection::vec(small_q(), 2..5)) {
        let (f, g) = (UniPoly::new(f), UniPoly::new(g));
        prop_assume!(!g.is_zero());
        let (q, r) = f.div_rem(&g);
        prop_assert_eq!(q.mul(&g).add(&r), f);
        prop_assert!(r.degree().map_or(true, |d| d < g.degree().unwrap()));
    }

    #[test]
    fn taylor_recovers_values(f in prop::collection::vec(small_q(), 1..8), x in small_q(), t in small_q()) {
        let p = UniPoly::new(f);
        let len = p.coeffs().len().max(1);
        let local = p.taylor(&x, len);
        let shifted = local.iter().rev().fold(rat(0, 1), |acc, c| acc * &t + c);
        prop_assert_eq!(shifted, p.eval(&(&x + &t)));
    }

    #[test]
    fn weight_function_is_homogeneous(inst in instance(3, 2, 2), tail in prop::collection::vec(small_q(), 2)) {
        let a = &tail[..inst.l() as usize];
        let w = weight_function(&inst, a).unwrap();
        prop_assert_eq!(w.level(), inst.l());
        prop_assert!(w.coeffs().keys().all(|j| j.iter().sum::<u32>() == inst.l()));
    }

    #[test]
    fn double_double_sum_is_exact(a in -1e6f64..1e6, b in -1e-6f64..1e-6) {
        let (x, y) = (DdComplex::from(C64::new(a, 0.0)), DdComplex::from(C64::new(b, 0.0)));
        prop_assert_eq!(C64::from((x + y) - x).re, b);
    }
}

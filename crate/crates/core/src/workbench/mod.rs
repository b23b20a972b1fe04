//! End-to-end pipeline: build the Gaudin system, decompose its spectrum,
//! witness every point on the operator side and collect the residuals.

pub mod config;
pub mod report;

use std::collections::BTreeMap;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub use config::{InstanceConfig, Mode, Resolved, ToleranceOverrides, Tolerances, ZValue};
pub use report::{
    json_vec, Check, Diagonalizability, Dims, InstanceEcho, PointReport, Report, ReportScalar, SampleSummary,
    SpaceReport, VerifyReport,
};

use crate::error::{Error, Result};
use crate::gaudin::{
    annihilator_ideal, bethe_algebra_basis, build_gaudin, polynomial_valued_kernel, quotient_kernel, GaudinSystem, Space,
};
use crate::gl2rep::{expected_singular_dimension, ProblemInstance, WeightBasis};
use crate::numcore::scalar::max_modulus;
use crate::numcore::{rank, Matrix, Scalar, UniPoly, C64};
use crate::opscheme::schubert_dimension;
use crate::sov::{bethe_vector, poly_roots, weight_function, weight_function_uy};
use crate::spectral::{
    diagonalizability_check, grothendieck_weights, joint_spectrum_reseeding, match_spectrum_to_scheme, JointSpectrum,
};

/// Seeds tried after the configured one when clusters are ambiguous.
const RESEED_ATTEMPTS: u32 = 8;
/// Random points per spectrum point for the `(u, y)` consistency check.
const COORDINATE_SAMPLES: usize = 50;

/// Per-stage wall-clock times. The clock is only read when enabled, so the
/// pipeline also runs on targets without one.
struct Stopwatch {
    start: Option<Instant>,
    marks: BTreeMap<String, f64>,
}

impl Stopwatch {
    fn new(enabled: bool) -> Self {
        Stopwatch { start: enabled.then(Instant::now), marks: BTreeMap::new() }
    }

    fn lap(&mut self, name: &str) {
        if let Some(start) = self.start.as_mut() {
            let now = Instant::now();
            self.marks.insert(name.to_string(), (now - *start).as_secs_f64() * 1e3);
            *start = now;
        }
    }

    fn finish(self) -> Option<BTreeMap<String, f64>> {
        self.start.map(|_| self.marks)
    }
}

/// Runs the full pipeline for one config.
pub fn cmd_spectrum(cfg: &InstanceConfig, timing: bool) -> Result<Report> {
    let tol = Tolerances::from_env(&cfg.tolerances)?;
    match cfg.resolve()? {
        Resolved::Exact(inst) => spectrum_report(&inst, cfg.seed, cfg.mode, &tol, timing),
        Resolved::Float(inst) => spectrum_report(&inst, cfg.seed, cfg.mode, &tol, timing),
    }
}

/// Prints nothing; returns the intersection number.
pub fn cmd_schubert(m: &[u32], l: u32) -> u64 {
    schubert_dimension(m, l)
}

fn max_entry<S: Scalar>(mats: &[Matrix<S>]) -> f64 {
    mats.iter().map(Matrix::max_modulus).fold(0.0, f64::max)
}

fn global_checks<S: ReportScalar>(
    inst: &ProblemInstance<S>,
    sys: &GaudinSystem<S>,
    dims: &Dims,
    tol: &Tolerances,
    checks: &mut BTreeMap<String, Check>,
) -> Result<()> {
    let gate = if S::EXACT { 0.0 } else { tol.residual };
    let hmax = max_entry(&sys.h_big);

    let mut comm = 0.0f64;
    for i in 0..sys.h_big.len() {
        for j in (i + 1)..sys.h_big.len() {
            comm = comm.max(sys.h_big[i].commutator(&sys.h_big[j]).max_modulus());
        }
    }
    checks.insert("commutators".into(), Check::at_most(comm / (1.0 + hmax * hmax), gate));

    let d = sys.h_big[0].rows();
    let total = sys.h_big.iter().fold(Matrix::zeros(d, d), |acc: Matrix<S>, h| acc.add(h));
    checks.insert("sum_hamiltonians".into(), Check::at_most(total.max_modulus() / (1.0 + hmax), gate));

    let ds = dims.sing_m;
    let mut weighted = Matrix::scalar(ds, -S::from_i64(inst.g0()));
    for (h, z) in sys.h_sing.iter().zip(inst.z()) {
        weighted.add_scaled(z, h);
    }
    let wscale = 1.0 + inst.g0().unsigned_abs() as f64 + max_entry(&sys.h_sing) * max_modulus(inst.z());
    checks.insert("g0_identity".into(), Check::at_most(weighted.max_modulus() / wscale, gate));
    let g0_dev = sys.g.first().map_or(0.0, |g| g.sub(&Matrix::scalar(ds, S::from_i64(inst.g0()))).max_modulus());
    checks.insert("g0_operator".into(), Check::at_most(g0_dev / wscale, gate));

    let gram = &sys.quotient.gram_sing;
    let mut sym = 0.0f64;
    for h in &sys.h_sing {
        let dev = gram.mul(h).sub(&h.transpose().mul(gram)).max_modulus();
        sym = sym.max(dev / (1.0 + gram.max_modulus() * h.max_modulus()));
    }
    checks.insert("shapovalov_symmetry".into(), Check::at_most(sym, gate));

    checks.insert("dim_sing_m".into(), Check::equal(dims.sing_m, dims.sing_m_expected));
    checks.insert("dim_sing_l_schubert".into(), Check::equal(dims.sing_l, dims.schubert as usize));
    checks.insert("dim_bethe_algebra_l".into(), Check::equal(dims.bethe_algebra_l, dims.sing_l));
    checks.insert("dim_annihilator_ideal".into(), Check::equal(dims.annihilator_ideal, dims.sing_l));

    let zscale = (1.0 + max_modulus(inst.z())).powi(inst.n() as i32);
    let kernel_res = |space: Space, deg: usize| -> Result<f64> {
        let dim = sys.dim(space);
        let mut worst = 0.0f64;
        for k in 0..dim {
            let mut v0 = vec![S::zero(); dim];
            v0[k] = S::one();
            let sol = polynomial_valued_kernel(sys, space, &v0, deg, tol.kernel)?;
            let vmax = sol.coeffs.iter().map(|v| max_modulus(v)).fold(0.0, f64::max);
            let hscale = 1.0 + inst.m_total() as f64 + max_entry(sys.hamiltonians(space)) + (deg * deg) as f64;
            worst = worst.max(sol.residual / ((1.0 + vmax) * zscale * hscale));
        }
        Ok(worst)
    };
    let l = inst.l() as usize;
    checks.insert("universal_kernel_m".into(), Check::at_most(kernel_res(Space::SingM, l)?, gate));
    if inst.ltilde() > l as i64 && dims.sing_l > 0 {
        checks.insert(
            "universal_kernel_l".into(),
            Check::at_most(kernel_res(Space::SingL, inst.ltilde() as usize)?, gate),
        );
    }
    Ok(())
}

fn spectrum_report<S: ReportScalar>(
    inst: &ProblemInstance<S>,
    seed: u64,
    mode: Mode,
    tol: &Tolerances,
    timing: bool,
) -> Result<Report> {
    let mut watch = Stopwatch::new(timing);
    let ktol = if S::EXACT { 0.0 } else { tol.kernel };
    let sys = build_gaudin(inst, ktol)?;
    watch.lap("build");

    let sing_m = sys.dim(Space::SingM);
    let sing_l = sys.dim(Space::SingL);
    let alg_m = bethe_algebra_basis(&sys.h_sing, sing_m, ktol);
    let alg_l = bethe_algebra_basis(&sys.h_l, sing_l, ktol);
    let kernel = quotient_kernel(&alg_m, &sys.quotient.sh, ktol);
    let ideal = annihilator_ideal(&alg_m, &kernel, ktol);
    let dims = Dims {
        weight_space: WeightBasis::new(inst.n(), inst.l()).len(),
        sing_m,
        sing_m_expected: expected_singular_dimension(inst.n(), inst.l()),
        sing_l,
        schubert: schubert_dimension(inst.m(), inst.l()),
        bethe_algebra_m: alg_m.len(),
        bethe_algebra_l: alg_l.len(),
        annihilator_ideal: ideal.len(),
    };
    watch.lap("algebra");

    let mut checks = BTreeMap::new();
    global_checks(inst, &sys, &dims, tol, &mut checks)?;
    watch.lap("global_checks");

    let real_z = inst.z().iter().all(|z| z.to_c64().im == 0.0);
    let sing_m_report = space_section(inst, &sys, Space::SingM, seed, tol, real_z, &mut checks)?;
    watch.lap("sing_m");
    let sing_l_report = space_section(inst, &sys, Space::SingL, seed, tol, real_z, &mut checks)?;
    watch.lap("sing_l");

    let all_simple = sing_m_report.all_simple && sing_l_report.all_simple;
    let mut report = Report {
        instance: InstanceEcho {
            m: inst.m().to_vec(),
            l: inst.l(),
            ltilde: inst.ltilde(),
            z: json_vec(inst.z()),
            mode,
            seed,
            dominant: inst.is_dominant(),
            tolerances: *tol,
        },
        dims,
        sing_m: sing_m_report,
        sing_l: sing_l_report,
        checks,
        all_simple,
        passed: false,
        timing_ms: None,
    };
    report.passed = report.failed_checks().is_empty();
    report.timing_ms = watch.finish();
    Ok(report)
}

fn space_section<S: ReportScalar>(
    inst: &ProblemInstance<S>,
    sys: &GaudinSystem<S>,
    space: Space,
    seed: u64,
    tol: &Tolerances,
    real_z: bool,
    checks: &mut BTreeMap<String, Check>,
) -> Result<SpaceReport> {
    let mats_f: Vec<Matrix<C64>> = sys.hamiltonians(space).iter().map(Matrix::to_c64).collect();
    let spectrum = joint_spectrum_reseeding(&mats_f, seed, tol.cluster, RESEED_ATTEMPTS)?;
    let section = match S::candidates(sys.hamiltonians(space), &spectrum) {
        Some(c) => analyse_space(inst, sys, space, &c, &spectrum, &mats_f, tol, real_z, checks),
        None => {
            let (fi, fs) = (inst.to_c64(), sys.to_c64());
            let c = C64::candidates(fs.hamiltonians(space), &spectrum).expect("float candidates always exist");
            analyse_space(&fi, &fs, space, &c, &spectrum, &mats_f, tol, real_z, checks)
        }
    };
    Ok(section)
}

#[allow(clippy::too_many_arguments)]
fn analyse_space<T: ReportScalar>(
    inst: &ProblemInstance<T>,
    sys: &GaudinSystem<T>,
    space: Space,
    candidates: &[(Vec<T>, usize)],
    spectrum: &JointSpectrum,
    mats_f: &[Matrix<C64>],
    tol: &Tolerances,
    real_z: bool,
    checks: &mut BTreeMap<String, Check>,
) -> SpaceReport {
    let tag = match space {
        Space::SingM => "sing_m",
        Space::SingL => "sing_l",
    };
    let gate = if T::EXACT { 0.0 } else { tol.residual };
    let dim = sys.dim(space);
    let scheme = match_spectrum_to_scheme(inst, candidates, space == Space::SingL, gate);
    let mut failures: Vec<String> = scheme.failures.iter().map(|(i, e)| format!("point {i}: {e}")).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(spectrum.seed ^ 0x7f4a_7c15);

    let mut points = Vec::new();
    let mut omegas = Vec::new();
    let mut worst_eigen = 0.0f64;
    let mut worst_coordinates = 0.0f64;
    for (i, p) in scheme.points.iter().enumerate() {
        let mut errors: Vec<String> =
            scheme.failures.iter().filter(|(k, _)| *k == i).map(|(_, e)| e.clone()).collect();
        let mut pr = PointReport {
            h: json_vec(&p.h),
            a: json_vec(&p.a),
            atilde: p.atilde.as_deref().map(json_vec),
            multiplicity: p.multiplicity,
            residuals: p.residuals.clone(),
            spectral_shift: p.spectral_shift,
            bethe_roots: Vec::new(),
            eigen_residuals: Vec::new(),
            e12_residual: None,
            invariant_subspace_dim: None,
            errors: Vec::new(),
        };
        if p.a.len() == inst.l() as usize {
            pr.bethe_roots = poly_roots(&UniPoly::monic_from_tail(&p.a)).iter().map(|t| [t.re, t.im]).collect();
            match bethe_vector(sys, p, gate) {
                Ok(bv) => {
                    worst_eigen = bv.eigen_residuals.iter().copied().fold(worst_eigen.max(bv.e12_residual), f64::max);
                    pr.eigen_residuals = bv.eigen_residuals.clone();
                    pr.e12_residual = Some(bv.e12_residual);
                    pr.invariant_subspace_dim = bv.invariant_subspace_dim;
                    if space == Space::SingL && bv.omega_l.iter().all(|c| c.is_zero()) {
                        errors.push("bethe vector vanishes in the quotient".into());
                        failures.push(format!("point {i}: bethe vector vanishes in the quotient"));
                    }
                    omegas.push(bv.omega_l);
                }
                Err(e) => {
                    errors.push(format!("bethe vector: {e}"));
                    failures.push(format!("point {i}: bethe vector: {e}"));
                }
            }
            match coordinate_consistency(inst, &p.a, &mut rng) {
                Ok(dev) => worst_coordinates = worst_coordinates.max(dev),
                Err(e) => errors.push(format!("coordinate model: {e}")),
            }
        }
        pr.errors = errors;
        points.push(pr);
    }

    let weights = if scheme.all_simple && scheme.is_clean() && !scheme.points.is_empty() {
        match grothendieck_weights(inst, &scheme.points, tol.residual) {
            Ok(w) => Some(json_vec(&w)),
            Err(e) => {
                failures.push(format!("grothendieck weights: {e}"));
                None
            }
        }
    } else {
        None
    };

    let bethe_vector_rank = (space == Space::SingL && scheme.all_simple && omegas.len() == scheme.points.len())
        .then(|| if dim == 0 { 0 } else { rank(&Matrix::from_columns(dim, &omegas), if T::EXACT { 0.0 } else { 1e-8 }) });

    let (diag_ok, diag_res) = diagonalizability_check(mats_f, tol.residual);

    checks.insert(format!("{tag}.multiplicity_total"), Check::equal(scheme.total_multiplicity, dim));
    let mut trace_dev = 0.0f64;
    for (s, h) in sys.hamiltonians(space).iter().enumerate() {
        let sum = scheme
            .points
            .iter()
            .fold(T::zero(), |acc, p| acc + p.h[s].clone() * T::from_u64(p.multiplicity as u64));
        let hn = h.frobenius();
        let dev = (sum - h.trace()).modulus() / ((dim.max(1) as f64) * if hn == 0.0 { 1.0 } else { hn });
        trace_dev = trace_dev.max(dev);
    }
    checks.insert(format!("{tag}.trace_identity"), Check::at_most(trace_dev, gate));
    let scheme_worst = scheme.residual_summary.values().copied().fold(0.0, f64::max);
    checks.insert(format!("{tag}.scheme_residuals"), Check::at_most(scheme_worst, gate));
    checks.insert(format!("{tag}.bethe_eigen_relations"), Check::at_most(worst_eigen, gate));
    let shift = scheme.points.iter().filter_map(|p| p.spectral_shift).fold(0.0, f64::max);
    checks.insert(format!("{tag}.spectral_shift"), Check::at_most(shift, if T::EXACT { 0.0 } else { tol.cluster }));
    checks.insert(format!("{tag}.coordinate_model"), Check::at_most(worst_coordinates, 1e-10));
    if let Some(r) = bethe_vector_rank {
        checks.insert(format!("{tag}.bethe_vector_span"), Check::equal(r, dim));
    }
    if space == Space::SingL && real_z {
        checks.insert(format!("{tag}.real_z_simple"), Check::truth(scheme.all_simple));
        checks.insert(format!("{tag}.real_z_diagonalizable"), Check::truth(diag_ok));
    }

    SpaceReport {
        dim,
        exact: T::EXACT,
        seed: spectrum.seed,
        combination: spectrum.coefficients.clone(),
        total_multiplicity: scheme.total_multiplicity,
        all_simple: scheme.all_simple,
        points,
        residual_summary: scheme.residual_summary,
        grothendieck_weights: weights,
        diagonalizable: Diagonalizability { passed: diag_ok, worst_residual: diag_res },
        bethe_vector_rank,
        failures,
    }
}

/// Largest relative gap between the monomial form of the weight function and
/// its `(u, y)` form at random points.
pub fn coordinate_consistency<S: Scalar>(inst: &ProblemInstance<S>, a: &[S], rng: &mut impl Rng) -> Result<f64> {
    coordinate_consistency_n(inst, a, rng, COORDINATE_SAMPLES)
}

pub fn coordinate_consistency_n<S: Scalar>(
    inst: &ProblemInstance<S>,
    a: &[S],
    rng: &mut impl Rng,
    samples: usize,
) -> Result<f64> {
    let omega = weight_function(inst, a)?;
    let fi = inst.to_c64();
    let af: Vec<C64> = a.iter().map(Scalar::to_c64).collect();
    let omega_f: Vec<(Vec<u32>, C64)> = omega.coeffs().iter().map(|(j, c)| (j.clone(), c.to_c64())).collect();
    let mut worst = 0.0f64;
    let mut taken = 0;
    while taken < samples {
        let x: Vec<C64> = (0..inst.n()).map(|_| C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))).collect();
        let uy = match weight_function_uy(&fi, &af, &x) {
            Ok(v) => v,
            Err(Error::DegenerateU) => continue,
            Err(e) => return Err(e),
        };
        let mut direct = C64::new(0.0, 0.0);
        let mut size = 0.0f64;
        for (j, c) in &omega_f {
            let term = j.iter().zip(&x).fold(*c, |acc, (&e, xs)| acc * xs.powu(e));
            size += term.norm();
            direct += term;
        }
        worst = worst.max((direct - uy).norm() / size.max(uy.norm()).max(f64::MIN_POSITIVE));
        taken += 1;
    }
    Ok(worst)
}

fn random_real_z(n: usize, rng: &mut impl Rng) -> Vec<ZValue> {
    let mut out: Vec<(i64, i64)> = Vec::new();
    while out.len() < n {
        let den = rng.gen_range(1..=4i64);
        let num = rng.gen_range(-12..=12i64);
        if !out.iter().any(|&(p, q)| p * den == num * q) {
            out.push((num, den));
        }
    }
    out.into_iter().map(|(p, q)| ZValue::Text(format!("{p}/{q}"))).collect()
}

/// Minimum distance between random complex marked points.
const MIN_GAP: f64 = 0.25;

fn random_complex_z(n: usize, rng: &mut impl Rng) -> Vec<ZValue> {
    let mut out: Vec<C64> = Vec::new();
    while out.len() < n {
        let c = C64::new(rng.gen_range(-2.0..2.0), rng.gen_range(-2.0..2.0));
        if out.iter().all(|p| (p - c).norm() >= MIN_GAP) {
            out.push(c);
        }
    }
    out.into_iter().map(|c| ZValue::Complex([c.re, c.im])).collect()
}

/// Re-runs the pipeline on random marked points, alternating real (exact)
/// and complex (float) samples.
pub fn cmd_verify(cfg: &InstanceConfig, samples: usize) -> Result<VerifyReport> {
    if samples == 0 {
        return Err(Error::Precondition("at least one sample is required".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed ^ 0x5eed_5eed);
    let n = cfg.m.len();
    let mut summaries = Vec::new();
    for k in 0..samples {
        let real = k % 2 == 0;
        let z = if real { random_real_z(n, &mut rng) } else { random_complex_z(n, &mut rng) };
        let sample = InstanceConfig {
            m: cfg.m.clone(),
            l: cfg.l,
            z: z.clone(),
            mode: if real { Mode::Exact } else { Mode::Float },
            seed: cfg.seed.wrapping_add(k as u64),
            tolerances: cfg.tolerances.clone(),
        };
        let summary = match cmd_spectrum(&sample, false) {
            Ok(r) => SampleSummary {
                z: r.instance.z.clone(),
                mode: sample.mode,
                count_m: r.sing_m.total_multiplicity,
                count_l: r.sing_l.total_multiplicity,
                all_simple_l: r.sing_l.all_simple,
                diagonalizable_l: real.then_some(r.sing_l.diagonalizable.passed),
                failed_checks: r.failed_checks(),
            },
            Err(e) => SampleSummary {
                z: z.iter().map(|v| serde_json::to_value(v).unwrap_or_default()).collect(),
                mode: sample.mode,
                count_m: 0,
                count_l: 0,
                all_simple_l: false,
                diagonalizable_l: None,
                failed_checks: vec![format!("error: {e}")],
            },
        };
        summaries.push(summary);
    }
    let counts_m: Vec<usize> = summaries.iter().map(|s| s.count_m).collect();
    let counts_l: Vec<usize> = summaries.iter().map(|s| s.count_l).collect();
    let expected_m = expected_singular_dimension(n, cfg.l);
    let expected_l = schubert_dimension(&cfg.m, cfg.l) as usize;
    let mut checks = BTreeMap::new();
    let worst = |v: &[usize], e: usize| v.iter().map(|&c| (c as f64 - e as f64).abs()).fold(0.0, f64::max);
    checks.insert("counts_m_equal_dimension".into(), Check::at_most(worst(&counts_m, expected_m), 0.0));
    checks.insert("counts_l_equal_schubert".into(), Check::at_most(worst(&counts_l, expected_l), 0.0));
    checks.insert("counts_m_constant".into(), Check::at_most(worst(&counts_m, counts_m[0]), 0.0));
    checks.insert("counts_l_constant".into(), Check::at_most(worst(&counts_l, counts_l[0]), 0.0));
    let reals: Vec<&SampleSummary> = summaries.iter().filter(|s| s.mode == Mode::Exact).collect();
    checks.insert("real_z_simple".into(), Check::truth(reals.iter().all(|s| s.all_simple_l)));
    checks.insert(
        "real_z_diagonalizable".into(),
        Check::truth(reals.iter().all(|s| s.diagonalizable_l.unwrap_or(false))),
    );
    let mut report =
        VerifyReport { m: cfg.m.clone(), l: cfg.l, seed: cfg.seed, samples: summaries, counts_m, counts_l, checks, passed: false };
    report.passed = report.failed_checks().is_empty();
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cfg(json: &str) -> InstanceConfig {
        InstanceConfig::from_json(json).unwrap()
    }

    #[test]
    fn e1_report() {
        let r = cmd_spectrum(&cfg(r#"{"m":[1,1],"l":1,"z":[0,1]}"#), false).unwrap();
        assert!(r.passed, "{:?}", r.failed_checks());
        assert_eq!(r.sing_l.points.len(), 1);
        assert_eq!(r.sing_l.points[0].h, vec![serde_json::json!("-2"), serde_json::json!("2")]);
        assert_eq!(r.sing_l.points[0].bethe_roots, vec![[0.5, 0.0]]);
        assert!(r.timing_ms.is_none());
    }

    #[test]
    fn verify_needs_samples() {
        assert!(cmd_verify(&cfg(r#"{"m":[1,1],"l":1,"z":[0,1]}"#), 0).is_err());
    }

    #[test]
    fn schubert_passthrough() {
        assert_eq!(cmd_schubert(&[1, 1, 1, 1], 2), 2);
    }
}

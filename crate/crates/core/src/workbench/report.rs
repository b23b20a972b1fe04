use std::collections::BTreeMap;

use serde::Serialize;
use serde_json::{json, Value};

use super::config::{Mode, Tolerances};
use crate::numcore::{Matrix, Scalar, C64, Q};
use crate::spectral::{exact_points, JointSpectrum};

/// Lossless JSON form of a scalar: rationals as `"p/q"` strings, complex
/// numbers as `[re, im]`.
pub trait ReportScalar: Scalar {
    fn to_json(&self) -> Value;

    /// Joint eigenvalues in this domain, or `None` when they cannot be
    /// represented exactly.
    fn candidates(mats: &[Matrix<Self>], spectrum: &JointSpectrum) -> Option<Vec<(Vec<Self>, usize)>>;
}

/// Largest denominator tried when recovering rational eigenvalues.
pub const MAX_RECOVERY_DENOMINATOR: i64 = 1_000_000;

impl ReportScalar for Q {
    fn to_json(&self) -> Value {
        Value::String(self.to_string())
    }

    fn candidates(mats: &[Matrix<Self>], spectrum: &JointSpectrum) -> Option<Vec<(Vec<Self>, usize)>> {
        exact_points(mats, spectrum, MAX_RECOVERY_DENOMINATOR)
    }
}

impl ReportScalar for C64 {
    fn to_json(&self) -> Value {
        json!([self.re, self.im])
    }

    fn candidates(_: &[Matrix<Self>], spectrum: &JointSpectrum) -> Option<Vec<(Vec<Self>, usize)>> {
        Some(spectrum.eigen.iter().map(|e| (e.h.clone(), e.multiplicity)).collect())
    }
}

pub fn json_vec<S: ReportScalar>(v: &[S]) -> Vec<Value> {
    v.iter().map(ReportScalar::to_json).collect()
}

/// A measured quantity compared against its gate.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Check {
    pub value: f64,
    pub tolerance: f64,
    pub passed: bool,
}

impl Check {
    pub fn at_most(value: f64, tolerance: f64) -> Self {
        Check { value, tolerance, passed: value.is_finite() && value <= tolerance }
    }

    /// Integer equality as `|a - b| <= 0`.
    pub fn equal(a: usize, b: usize) -> Self {
        Check::at_most((a as f64 - b as f64).abs(), 0.0)
    }

    pub fn truth(ok: bool) -> Self {
        Check { value: if ok { 0.0 } else { 1.0 }, tolerance: 0.0, passed: ok }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct InstanceEcho {
    pub m: Vec<u32>,
    pub l: u32,
    pub ltilde: i64,
    pub z: Vec<Value>,
    pub mode: Mode,
    pub seed: u64,
    pub dominant: bool,
    pub tolerances: Tolerances,
}

#[derive(Clone, Debug, Default, Serialize)]
pub struct Dims {
    pub weight_space: usize,
    pub sing_m: usize,
    pub sing_m_expected: usize,
    pub sing_l: usize,
    pub schubert: u64,
    pub bethe_algebra_m: usize,
    pub bethe_algebra_l: usize,
    pub annihilator_ideal: usize,
}

#[derive(Clone, Debug, Serialize)]
pub struct PointReport {
    pub h: Vec<Value>,
    pub a: Vec<Value>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub atilde: Option<Vec<Value>>,
    pub multiplicity: usize,
    pub residuals: BTreeMap<String, f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub spectral_shift: Option<f64>,
    pub bethe_roots: Vec<[f64; 2]>,
    pub eigen_residuals: Vec<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub e12_residual: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub invariant_subspace_dim: Option<usize>,
    pub errors: Vec<String>,
}

#[derive(Clone, Debug, Serialize)]
pub struct Diagonalizability {
    pub passed: bool,
    pub worst_residual: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct SpaceReport {
    pub dim: usize,
    /// Whether the points were recovered exactly.
    pub exact: bool,
    pub seed: u64,
    pub combination: Vec<u32>,
    pub total_multiplicity: usize,
    pub all_simple: bool,
    pub points: Vec<PointReport>,
    pub residual_summary: BTreeMap<String, f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub grothendieck_weights: Option<Vec<Value>>,
    pub diagonalizable: Diagonalizability,
    /// Rank of the quotient images of the Bethe vectors.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub bethe_vector_rank: Option<usize>,
    pub failures: Vec<String>,
}

#[derive(Clone, Debug, Serialize)]
pub struct Report {
    pub instance: InstanceEcho,
    pub dims: Dims,
    pub sing_m: SpaceReport,
    pub sing_l: SpaceReport,
    pub checks: BTreeMap<String, Check>,
    pub all_simple: bool,
    pub passed: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub timing_ms: Option<BTreeMap<String, f64>>,
}

impl Report {
    /// Names of failing checks and spaces with per-point failures.
    pub fn failed_checks(&self) -> Vec<String> {
        let mut out: Vec<String> =
            self.checks.iter().filter(|(_, c)| !c.passed).map(|(k, _)| k.clone()).collect();
        if !self.sing_m.failures.is_empty() {
            out.push("sing_m.points".into());
        }
        if !self.sing_l.failures.is_empty() {
            out.push("sing_l.points".into());
        }
        out
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct SampleSummary {
    pub z: Vec<Value>,
    pub mode: Mode,
    pub count_m: usize,
    pub count_l: usize,
    pub all_simple_l: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub diagonalizable_l: Option<bool>,
    pub failed_checks: Vec<String>,
}

#[derive(Clone, Debug, Serialize)]
pub struct VerifyReport {
    pub m: Vec<u32>,
    pub l: u32,
    pub seed: u64,
    pub samples: Vec<SampleSummary>,
    pub counts_m: Vec<usize>,
    pub counts_l: Vec<usize>,
    pub checks: BTreeMap<String, Check>,
    pub passed: bool,
}

impl VerifyReport {
    pub fn failed_checks(&self) -> Vec<String> {
        let mut out: Vec<String> =
            self.checks.iter().filter(|(_, c)| !c.passed).map(|(k, _)| k.clone()).collect();
        for (i, s) in self.samples.iter().enumerate() {
            out.extend(s.failed_checks.iter().map(|c| format!("sample{i}.{c}")));
        }
        out
    }
}

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gl2rep::ProblemInstance;
use crate::numcore::linalg::DEFAULT_RANK_TOL;
use crate::numcore::scalar::parse_rational;
use crate::numcore::{C64, Q};
use crate::spectral::{DEFAULT_CLUSTER_TOL, DEFAULT_RESIDUAL_TOL};

pub const ENV_TOL_CLUSTER: &str = "GAUDIN_TOL_CLUSTER";
pub const ENV_TOL_RESIDUAL: &str = "GAUDIN_TOL_RESIDUAL";
pub const ENV_TOL_KERNEL: &str = "GAUDIN_TOL_KERNEL";

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    #[default]
    Exact,
    Float,
}

/// A marked point as written in a config file.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ZValue {
    Int(i64),
    Float(f64),
    Text(String),
    Complex([f64; 2]),
}

impl ZValue {
    fn to_rational(&self) -> Option<Q> {
        match self {
            ZValue::Int(v) => Some(Q::from_integer((*v).into())),
            ZValue::Text(s) => parse_rational(s),
            _ => None,
        }
    }

    fn to_complex(&self) -> Option<C64> {
        match self {
            ZValue::Float(v) => Some(C64::new(*v, 0.0)),
            ZValue::Complex([re, im]) => Some(C64::new(*re, *im)),
            other => other.to_rational().map(|q| crate::numcore::Scalar::to_c64(&q)),
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ToleranceOverrides {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cluster: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub residual: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub kernel: Option<f64>,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Tolerances {
    pub cluster: f64,
    pub residual: f64,
    pub kernel: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances { cluster: DEFAULT_CLUSTER_TOL, residual: DEFAULT_RESIDUAL_TOL, kernel: DEFAULT_RANK_TOL }
    }
}

impl Tolerances {
    /// Defaults, then config overrides, then environment variables.
    pub fn resolve(overrides: &ToleranceOverrides, env: impl Fn(&str) -> Option<String>) -> Result<Self> {
        let mut t = Tolerances::default();
        let pick = |slot: &mut f64, cfg: Option<f64>, var: &str| -> Result<()> {
            if let Some(v) = cfg {
                *slot = v;
            }
            if let Some(raw) = env(var) {
                *slot = raw.trim().parse().map_err(|_| Error::Config(format!("{var} is not a number: {raw:?}")))?;
            }
            if !(slot.is_finite() && *slot > 0.0) {
                return Err(Error::Config(format!("tolerance {var} must be positive, got {slot}")));
            }
            Ok(())
        };
        pick(&mut t.cluster, overrides.cluster, ENV_TOL_CLUSTER)?;
        pick(&mut t.residual, overrides.residual, ENV_TOL_RESIDUAL)?;
        pick(&mut t.kernel, overrides.kernel, ENV_TOL_KERNEL)?;
        Ok(t)
    }

    pub fn from_env(overrides: &ToleranceOverrides) -> Result<Self> {
        Self::resolve(overrides, |k| std::env::var(k).ok())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InstanceConfig {
    pub m: Vec<u32>,
    pub l: u32,
    pub z: Vec<ZValue>,
    #[serde(default)]
    pub mode: Mode,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub tolerances: ToleranceOverrides,
}

/// A validated instance in its scalar domain.
#[derive(Clone, Debug)]
pub enum Resolved {
    Exact(ProblemInstance<Q>),
    Float(ProblemInstance<C64>),
}

impl InstanceConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn resolve(&self) -> Result<Resolved> {
        if self.m.is_empty() {
            return Err(Error::Config("m must be non-empty".into()));
        }
        if self.m.len() != self.z.len() {
            return Err(Error::Config(format!("m has {} entries but z has {}", self.m.len(), self.z.len())));
        }
        let wrap = |e: Error| Error::Config(e.to_string());
        let resolved = match self.mode {
            Mode::Exact => {
                let z = self
                    .z
                    .iter()
                    .enumerate()
                    .map(|(i, v)| {
                        v.to_rational().ok_or_else(|| {
                            Error::Config(format!("z[{i}] = {v:?} is not exact; use an integer or a \"p/q\" string"))
                        })
                    })
                    .collect::<Result<Vec<_>>>()?;
                Resolved::Exact(ProblemInstance::new(self.m.clone(), self.l, z).map_err(wrap)?)
            }
            Mode::Float => {
                let z = self
                    .z
                    .iter()
                    .enumerate()
                    .map(|(i, v)| v.to_complex().ok_or_else(|| Error::Config(format!("z[{i}] = {v:?} is not a number"))))
                    .collect::<Result<Vec<_>>>()?;
                Resolved::Float(ProblemInstance::new(self.m.clone(), self.l, z).map_err(wrap)?)
            }
        };
        let sep = match &resolved {
            Resolved::Exact(i) => i.separating_violation(),
            Resolved::Float(i) => i.separating_violation(),
        };
        if let Some(i) = sep {
            return Err(Error::Config(format!("weights are not separating: sum m - 2l + 1 + {i} = 0")));
        }
        Ok(resolved)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_mixed_z() {
        let c = InstanceConfig::from_json(r#"{"m":[1,1,1],"l":1,"z":[0,"1/2",[2.0,1.0]],"mode":"float"}"#).unwrap();
        assert!(matches!(c.resolve().unwrap(), Resolved::Float(_)));
        let c = InstanceConfig::from_json(r#"{"m":[1,1],"l":1,"z":[0,0.5]}"#).unwrap();
        assert!(matches!(c.resolve(), Err(Error::Config(_))));
    }

    #[test]
    fn rejects_duplicates_and_unknown_fields() {
        let c = InstanceConfig::from_json(r#"{"m":[1,1],"l":1,"z":["1","1"]}"#).unwrap();
        assert!(c.resolve().is_err());
        assert!(InstanceConfig::from_json(r#"{"m":[1],"l":0,"z":[0],"bogus":1}"#).is_err());
    }

    #[test]
    fn env_beats_config() {
        let o = ToleranceOverrides { residual: Some(1e-6), ..Default::default() };
        let t = Tolerances::resolve(&o, |k| (k == ENV_TOL_RESIDUAL).then(|| "1e-5".to_string())).unwrap();
        assert_eq!(t.residual, 1e-5);
        assert_eq!(t.cluster, DEFAULT_CLUSTER_TOL);
        assert!(Tolerances::resolve(&o, |_| Some("nope".into())).is_err());
    }
}

#![allow(dead_code)]

use gaudin_core::numcore::{parse_rational, C64, Q};
use gaudin_core::workbench::{InstanceConfig, Mode, ZValue};
use rand::Rng;
use serde_json::Value;

pub fn binom(n: u64, k: u64) -> u64 {
    if k > n {
        return 0;
    }
    let mut acc = 1u64;
    for i in 0..k {
        acc = acc * (n - i) / (i + 1);
    }
    acc
}

/// Number of `j` with `0 <= j_s <= m_s` and `Σ j = k`.
pub fn bounded_compositions(m: &[u32], k: u32) -> u64 {
    let mut ways = vec![0u64; k as usize + 1];
    ways[0] = 1;
    for &ms in m {
        let mut next = vec![0u64; ways.len()];
        for (t, &w) in ways.iter().enumerate() {
            for j in 0..=ms as usize {
                if t + j < next.len() {
                    next[t + j] += w;
                }
            }
        }
        ways = next;
    }
    ways[k as usize]
}

/// Multiplicity of the highest weight `Σm - 2l`, from weight-space sizes.
pub fn schubert_oracle(m: &[u32], l: u32) -> u64 {
    let total: u32 = m.iter().sum();
    if total < 2 * l {
        return 0;
    }
    let upper = bounded_compositions(m, l);
    let lower = if l == 0 { 0 } else { bounded_compositions(m, l - 1) };
    upper - lower
}

pub fn q_of(v: &Value) -> Q {
    parse_rational(v.as_str().expect("rational string")).expect("valid rational")
}

pub fn c_of(v: &Value) -> C64 {
    let pair = v.as_array().expect("[re, im]");
    C64::new(pair[0].as_f64().unwrap(), pair[1].as_f64().unwrap())
}

pub fn qs(v: &[Value]) -> Vec<Q> {
    v.iter().map(q_of).collect()
}

pub fn cs(v: &[Value]) -> Vec<C64> {
    v.iter().map(c_of).collect()
}

/// Scalars of either serialised form as complex doubles.
pub fn as_c64(v: &[Value]) -> Vec<C64> {
    v.iter()
        .map(|x| match x {
            Value::String(_) => {
                let q = q_of(x);
                C64::new(gaudin_core::numcore::Scalar::to_c64(&q).re, 0.0)
            }
            _ => c_of(x),
        })
        .collect()
}

fn weight_dim(n: usize, l: u32) -> u64 {
    binom(l as u64 + n as u64 - 1, n as u64 - 1)
}

/// Shape `(m, l)` with `n` in `n_range`, `m_s <= m_max`, `l <= l_max`,
/// dominant data and at most `max_dim` monomials at level `l`.
pub fn random_shape(rng: &mut impl Rng, n_range: (usize, usize), m_max: u32, l_max: u32, max_dim: u64) -> (Vec<u32>, u32) {
    loop {
        let n = rng.gen_range(n_range.0..=n_range.1);
        let m: Vec<u32> = (0..n).map(|_| rng.gen_range(1..=m_max)).collect();
        let total: u32 = m.iter().sum();
        let l_cap = l_max.min(total / 2);
        if l_cap == 0 {
            continue;
        }
        let l = rng.gen_range(1..=l_cap);
        if weight_dim(n, l) <= max_dim {
            return (m, l);
        }
    }
}

pub fn random_rational_z(rng: &mut impl Rng, n: usize) -> Vec<ZValue> {
    let mut seen: Vec<(i64, i64)> = Vec::new();
    while seen.len() < n {
        let den = rng.gen_range(1..=5i64);
        let num = rng.gen_range(-9..=9i64);
        if !seen.iter().any(|&(p, q)| p * den == num * q) {
            seen.push((num, den));
        }
    }
    seen.into_iter().map(|(p, q)| ZValue::Text(format!("{p}/{q}"))).collect()
}

fn separated(pts: &[C64], min_gap: f64) -> bool {
    pts.iter().enumerate().all(|(i, a)| pts[..i].iter().all(|b| (a - b).norm() >= min_gap))
}

pub fn random_complex_z(rng: &mut impl Rng, n: usize) -> Vec<ZValue> {
    loop {
        let pts: Vec<C64> = (0..n).map(|_| C64::new(rng.gen_range(-2.0..2.0), rng.gen_range(-2.0..2.0))).collect();
        if separated(&pts, 0.3) {
            return pts.into_iter().map(|c| ZValue::Complex([c.re, c.im])).collect();
        }
    }
}

pub fn random_real_z(rng: &mut impl Rng, n: usize) -> Vec<ZValue> {
    loop {
        let pts: Vec<C64> = (0..n).map(|_| C64::new(rng.gen_range(-3.0..3.0), 0.0)).collect();
        if separated(&pts, 0.3) {
            return pts.into_iter().map(|c| ZValue::Float(c.re)).collect();
        }
    }
}

pub fn config(m: &[u32], l: u32, z: Vec<ZValue>, mode: Mode, seed: u64) -> InstanceConfig {
    InstanceConfig { m: m.to_vec(), l, z, mode, seed, tolerances: Default::default() }
}

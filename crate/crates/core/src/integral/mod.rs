//! Singular integrals: the truncated `𝔍⁺(Λ, Y) = ∫_{[−Y,Y]^R} Π_j V_k(L_j(β)) dβ`, the
//! sign-assembled `𝔍(Λ)`, and two sampling oracles for them.

mod oracle;
mod vk;

use std::cell::Cell;
use std::collections::HashMap;

use num_complex::Complex64;
use serde::Serialize;

use crate::coefficients::compute_k;
use crate::error::{Error, Result};
use crate::instance::ProblemInstance;
use crate::quadrature::{adaptive, Tolerance};

pub use oracle::{b_zero_oracle, real_density_oracle, OracleEstimate, OracleKind};
pub use vk::{e, psi_k, v_k, v_k_direct};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct IntegralEstimate {
    pub value: f64,
    pub truncation: f64,
    /// Error estimate of the quadrature on `[−Y, Y]^R` alone.
    pub quadrature_error: f64,
    /// `K / Y`, the shape of the truncation tail (constant 1).
    pub tail_heuristic: f64,
    pub oracle: Option<OracleKind>,
    pub oracle_value: Option<f64>,
    pub oracle_error: Option<f64>,
    pub oracle_samples: Option<u64>,
    pub rng_seed: Option<u64>,
    /// `|value − oracle_value|`.
    pub discrepancy: Option<f64>,
}

impl IntegralEstimate {
    fn attach(&mut self, o: &OracleEstimate) {
        self.oracle = Some(o.kind);
        self.oracle_value = Some(o.value);
        self.oracle_error = Some(o.error);
        self.oracle_samples = Some(o.samples);
        self.rng_seed = Some(o.seed);
        self.discrepancy = Some((self.value - o.value).abs());
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IntegralConfig {
    pub outer: Tolerance,
    /// Largest number of integrand evaluations for `R = 2`.
    pub point_budget: u64,
}

impl Default for IntegralConfig {
    fn default() -> Self {
        IntegralConfig {
            outer: Tolerance::new(1e-10, 0.0, 200_000),
            point_budget: 4_000_000,
        }
    }
}

/// `max(100, 10·K)`; for `R = 2` capped so that the initial panel grid uses at most half of
/// the evaluation budget.
pub fn default_truncation(inst: &ProblemInstance) -> Result<f64> {
    default_truncation_with(inst, &IntegralConfig::default())
}

pub fn default_truncation_with(inst: &ProblemInstance, config: &IntegralConfig) -> Result<f64> {
    let y = (10.0 * compute_k(inst.lambda())?.k_f64()).max(100.0);
    if inst.r() != 2 {
        return Ok(y);
    }
    // ⌈Y f1/2⌉ outer and ⌈Y f2⌉ inner panels of 21 nodes each.
    let freq = |row: &[i64]| -> f64 {
        row.iter()
            .map(|l| l.unsigned_abs() as f64)
            .sum::<f64>()
            .max(1.0)
    };
    let rows = inst.lambda();
    let per_y2 = 220.5 * freq(&rows[0]) * freq(&rows[1]);
    let cap = (config.point_budget as f64 / (2.0 * per_y2)).sqrt();
    Ok(y.min(cap))
}

fn frequency_breaks(y: f64, freq: f64, lo: f64) -> Vec<f64> {
    let n = ((y - lo) * freq.max(1.0) / 2.0).ceil().max(1.0) as usize;
    (0..=n)
        .map(|i| lo + (y - lo) * i as f64 / n as f64)
        .collect()
}

/// `V_k(λβ)` for every column coefficient, evaluated once per distinct `|λ|`.
fn column_product(lams: &[i64], beta: f64, k: u32, d: u32, err: &mut f64) -> Complex64 {
    let mut cache: Vec<(u64, Complex64)> = Vec::new();
    let mut prod = Complex64::new(1.0, 0.0);
    for &l in lams {
        if l == 0 {
            continue;
        }
        let a = l.unsigned_abs();
        let v = match cache.iter().find(|c| c.0 == a) {
            Some(&(_, v)) => v,
            None => {
                let q = v_k(a as f64 * beta, k, d);
                *err = err.max(q.error);
                cache.push((a, q.value));
                q.value
            }
        };
        prod *= if l < 0 { v.conj() } else { v };
    }
    prod
}

pub fn singular_integral_positive(inst: &ProblemInstance, y: f64) -> Result<IntegralEstimate> {
    singular_integral_positive_with(inst, y, &IntegralConfig::default())
}

pub fn singular_integral_positive_with(
    inst: &ProblemInstance,
    y: f64,
    config: &IntegralConfig,
) -> Result<IntegralEstimate> {
    if !(y > 0.0) {
        return crate::error::arg("truncation must be positive");
    }
    let (k, d, s) = (inst.k(), inst.d(), inst.s());
    let (value, quadrature_error) = match inst.r() {
        1 => {
            let lams = &inst.lambda()[0];
            let freq: f64 = lams.iter().map(|l| l.unsigned_abs() as f64).sum();
            let mut inner = 0.0f64;
            let q = adaptive(
                &mut |b| column_product(lams, b, k, d, &mut inner),
                &frequency_breaks(y, freq, 0.0),
                config.outer,
            );
            // 𝔙(−β) is the conjugate of 𝔙(β).
            (2.0 * q.value.re, 2.0 * (q.error + y * s as f64 * inner))
        }
        2 => two_dimensional(inst, y, config)?,
        r => {
            return Err(Error::Unsupported(format!(
                "singular integral quadrature supports R <= 2, got R = {r}"
            )))
        }
    };
    let kk = compute_k(inst.lambda())?.k_f64();
    Ok(IntegralEstimate {
        value,
        truncation: y,
        quadrature_error,
        tail_heuristic: kk / y,
        oracle: None,
        oracle_value: None,
        oracle_error: None,
        oracle_samples: None,
        rng_seed: None,
        discrepancy: None,
    })
}

fn two_dimensional(inst: &ProblemInstance, y: f64, config: &IntegralConfig) -> Result<(f64, f64)> {
    let (k, d, s) = (inst.k(), inst.d(), inst.s());
    let rows = inst.lambda();
    let f1: f64 = rows[0].iter().map(|l| l.unsigned_abs() as f64).sum();
    let f2: f64 = rows[1].iter().map(|l| l.unsigned_abs() as f64).sum();
    let points = Cell::new(0u64);
    let mut inner_err = 0.0f64;
    let mut v_err = 0.0f64;
    let inner_tol = Tolerance::new(config.outer.abs / (2.0 * y), 0.0, config.outer.max_panels);
    let q = adaptive(
        &mut |b1: f64| {
            if points.get() > config.point_budget {
                return Complex64::new(0.0, 0.0);
            }
            let r = adaptive(
                &mut |b2: f64| {
                    points.set(points.get() + 1);
                    if points.get() > config.point_budget {
                        return Complex64::new(0.0, 0.0);
                    }
                    let mut prod = Complex64::new(1.0, 0.0);
                    for j in 0..s {
                        let arg = rows[0][j] as f64 * b1 + rows[1][j] as f64 * b2;
                        let v = v_k(arg, k, d);
                        v_err = v_err.max(v.error);
                        prod *= v.value;
                    }
                    prod
                },
                &frequency_breaks(y, f2, -y),
                inner_tol,
            );
            inner_err = inner_err.max(r.error);
            r.value
        },
        &frequency_breaks(y, f1, 0.0),
        config.outer,
    );
    if points.get() > config.point_budget {
        return Err(Error::Budget(format!(
            "two-dimensional quadrature exceeded {} integrand evaluations; lower the truncation",
            config.point_budget
        )));
    }
    let area = 2.0 * y * y;
    Ok((
        2.0 * q.value.re,
        2.0 * (q.error + y * inner_err + area * s as f64 * v_err),
    ))
}

/// Canonical form of a matrix up to column order and global sign.
fn sign_class(inst: &ProblemInstance) -> Vec<Vec<i64>> {
    let canon = |lambda: &[Vec<i64>]| {
        let mut cols: Vec<Vec<i64>> = (0..inst.s())
            .map(|j| lambda.iter().map(|row| row[j]).collect())
            .collect();
        cols.sort();
        cols
    };
    let neg: Vec<Vec<i64>> = inst
        .lambda()
        .iter()
        .map(|r| r.iter().map(|x| -x).collect())
        .collect();
    canon(inst.lambda()).min(canon(&neg))
}

/// Oracle attached to [`assemble_i`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OracleRequest {
    pub kind: OracleKind,
    pub samples: u64,
    pub seed: u64,
    /// Slab half-width for the real-density oracle.
    pub epsilon: f64,
}

/// `(multiplicity, sign-twisted instance)` for every class in the `η`-sum, in order of first
/// appearance when `η` runs through `{±1}^s` in binary order.
pub fn sign_classes(inst: &ProblemInstance) -> Vec<(u64, ProblemInstance)> {
    let s = inst.s();
    let mut index: HashMap<Vec<Vec<i64>>, usize> = HashMap::new();
    let mut classes: Vec<(u64, ProblemInstance)> = Vec::new();
    for mask in 0u64..(1 << s) {
        let eta: Vec<i8> = (0..s)
            .map(|j| if mask >> j & 1 == 1 { -1 } else { 1 })
            .collect();
        let twisted = inst.sign_twist(&eta);
        let key = sign_class(&twisted);
        match index.get(&key) {
            Some(&i) => classes[i].0 += 1,
            None => {
                index.insert(key, classes.len());
                classes.push((1, twisted));
            }
        }
    }
    classes
}

/// `𝔍(Λ)`: `2^{ks}𝔍⁺(Λ)` for even `d`, `2^{(k−1)s} Σ_η 𝔍⁺(ηΛ)` for odd `d`.
pub fn assemble_i(
    inst: &ProblemInstance,
    y: f64,
    oracle: Option<OracleRequest>,
) -> Result<IntegralEstimate> {
    assemble_i_with(inst, y, oracle, &IntegralConfig::default())
}

pub fn assemble_i_with(
    inst: &ProblemInstance,
    y: f64,
    oracle: Option<OracleRequest>,
    config: &IntegralConfig,
) -> Result<IntegralEstimate> {
    let (k, s) = (inst.k() as i32, inst.s() as i32);
    let (scale, classes) = if inst.d().is_multiple_of(2) {
        (2f64.powi(k * s), vec![(1, inst.clone())])
    } else {
        (2f64.powi((k - 1) * s), sign_classes(inst))
    };
    let mut value = 0.0;
    let mut quadrature_error = 0.0;
    let mut tail = 0.0;
    for (m, c) in &classes {
        let est = singular_integral_positive_with(c, y, config)?;
        value += *m as f64 * est.value;
        quadrature_error += *m as f64 * est.quadrature_error;
        tail += *m as f64 * est.tail_heuristic;
    }
    let mut out = IntegralEstimate {
        value: scale * value,
        truncation: y,
        quadrature_error: scale * quadrature_error,
        tail_heuristic: scale * tail,
        oracle: None,
        oracle_value: None,
        oracle_error: None,
        oracle_samples: None,
        rng_seed: None,
        discrepancy: None,
    };
    if let Some(req) = oracle {
        let o = match req.kind {
            OracleKind::BZero => {
                let (mut v, mut var) = (0.0, 0.0);
                for (i, (m, c)) in classes.iter().enumerate() {
                    let est = b_zero_oracle(c, req.samples, req.seed.wrapping_add(i as u64))?;
                    v += *m as f64 * est.value;
                    var += (*m as f64 * est.error).powi(2);
                }
                OracleEstimate {
                    kind: OracleKind::BZero,
                    value: scale * v,
                    error: scale * var.sqrt(),
                    samples: req.samples,
                    seed: req.seed,
                    epsilon: None,
                }
            }
            OracleKind::RealDensity => {
                real_density_oracle(inst, req.epsilon, req.samples, req.seed)?
            }
        };
        out.attach(&o);
    }
    Ok(out)
}

/// `𝔍⁺(Λ, Y)` with the `B(0)` oracle attached.
pub fn positive_with_oracle(
    inst: &ProblemInstance,
    y: f64,
    samples: u64,
    seed: u64,
) -> Result<IntegralEstimate> {
    let mut est = singular_integral_positive(inst, y)?;
    let o = b_zero_oracle(inst, samples, seed)?;
    est.attach(&o);
    Ok(est)
}

#[cfg(test)]
mod tests;

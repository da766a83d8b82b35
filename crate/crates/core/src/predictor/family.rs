//! Family constants `c_r(u) = ζ(s−Rd)^{−l} Σ_{𝒴(u)} C_{Λ(y_1,…,y_r)}` and batch comparisons.

use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_integer::Integer;
use serde::Serialize;

use super::{compare_box, predict, BoxRow, PredictOptions};
use crate::coefficients::compute_k;
use crate::counting::{CountMode, Counter};
use crate::error::{arg, Error, Result};
use crate::instance::ProblemInstance;
use crate::report::{ser_big, ser_u128};
use crate::series::zeta_real;

#[derive(Debug, Clone, Serialize)]
pub struct FamilyClass {
    /// Canonical derived matrix: columns normalized and sorted.
    pub lambda: Vec<Vec<i64>>,
    pub multiplicity: u64,
    pub c_lambda: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct FamilyReport {
    pub r: usize,
    pub l: usize,
    pub u: Vec<u64>,
    /// `|𝒴(u)|`.
    pub members: u64,
    pub classes: Vec<FamilyClass>,
    /// `ζ(s−Rd)^{−l}`.
    pub zeta_factor: f64,
    pub constant: f64,
    #[serde(serialize_with = "ser_big")]
    pub max_derived_k: BigInt,
    #[serde(serialize_with = "ser_big")]
    pub k_bound: BigInt,
    pub k_bound_holds: bool,
}

/// Primitive vectors in `ℤ^s` with every entry nonzero and sup-norm exactly `u`.
fn norm_shell(s: usize, u: u64) -> Vec<Vec<i64>> {
    let u = u as i64;
    let vals: Vec<i64> = (-u..=u).filter(|&v| v != 0).collect();
    let mut out = Vec::new();
    let mut idx = vec![0usize; s];
    loop {
        let y: Vec<i64> = idx.iter().map(|&i| vals[i]).collect();
        let top = y.iter().map(|v| v.abs()).max().unwrap_or(0);
        let g = y.iter().fold(0i64, |g, &v| g.gcd(&v));
        if top == u && g == 1 {
            out.push(y);
        }
        let mut t = 0;
        loop {
            if t == s {
                return out;
            }
            idx[t] += 1;
            if idx[t] < vals.len() {
                break;
            }
            idx[t] = 0;
            t += 1;
        }
    }
}

/// Representative of `Λ` under column permutations, global sign and, for odd `d`, column signs.
fn canonical(lambda: &[Vec<i64>], d: u32) -> Vec<Vec<i64>> {
    let r = lambda.len();
    let s = lambda[0].len();
    let orient = |sign: i64| -> Vec<Vec<i64>> {
        let mut cols: Vec<Vec<i64>> = (0..s)
            .map(|j| {
                let mut c: Vec<i64> = (0..r).map(|i| sign * lambda[i][j]).collect();
                if d % 2 == 1 && c.iter().find(|&&v| v != 0).is_some_and(|&v| v < 0) {
                    c.iter_mut().for_each(|v| *v = -*v);
                }
                c
            })
            .collect();
        cols.sort();
        cols
    };
    let cols = orient(1).min(orient(-1));
    (0..r)
        .map(|i| cols.iter().map(|c| c[i]).collect())
        .collect()
}

fn derived(lambda: &[Vec<i64>], factors: &[i64]) -> Result<Vec<Vec<i64>>> {
    lambda
        .iter()
        .map(|row| {
            row.iter()
                .zip(factors)
                .map(|(&a, &f)| {
                    a.checked_mul(f)
                        .ok_or_else(|| Error::Overflow("derived coefficient exceeds i64".into()))
                })
                .collect()
        })
        .collect()
}

/// The family constant `c_r(u)` over `𝒴(u)`, with the check
/// `K(y) <= max(⟨u⟩^{Rd}Δ, R⟨u⟩^d m1, R⟨u⟩^{(R−1)d} m2)` on every derived matrix.
pub fn family_constant(
    inst: &ProblemInstance,
    r: usize,
    u: &[u64],
    opts: &PredictOptions,
    budget: u64,
) -> Result<FamilyReport> {
    let k = inst.k() as usize;
    if r == 0 || r >= k {
        return arg(format!(
            "r = {r} must satisfy 1 <= r <= k − 1 = {}",
            k.saturating_sub(1)
        ));
    }
    if u.len() != r || u.contains(&0) {
        return arg("u must have r positive entries");
    }
    let e = inst.height_exponent();
    if e <= 1 {
        return Err(Error::Unsupported(format!(
            "s − Rd = {e}: ζ(s − Rd) diverges"
        )));
    }
    let s = inst.s();
    let d = inst.d();
    let shells: Vec<Vec<Vec<i64>>> = u.iter().map(|&ui| norm_shell(s, ui)).collect();
    let members = shells
        .iter()
        .try_fold(1u64, |acc, sh| acc.checked_mul(sh.len() as u64))
        .filter(|&m| m <= budget)
        .ok_or_else(|| {
            let card: f64 = shells.iter().map(|sh| sh.len() as f64).product();
            Error::Budget(format!("|𝒴(u)| = {card:.0} exceeds the budget of {budget}"))
        })?;

    let mut classes: BTreeMap<Vec<Vec<i64>>, u64> = BTreeMap::new();
    let mut idx = vec![0usize; r];
    'outer: loop {
        let mut factors = vec![1i64; s];
        for (i, &n) in idx.iter().enumerate() {
            for (f, &y) in factors.iter_mut().zip(&shells[i][n]) {
                *f *= y;
            }
        }
        for f in factors.iter_mut() {
            *f = f
                .checked_pow(d)
                .ok_or_else(|| Error::Overflow("derived column factor exceeds i64".into()))?;
        }
        *classes
            .entry(canonical(&derived(inst.lambda(), &factors)?, d))
            .or_default() += 1;
        let mut t = 0;
        loop {
            if t == r {
                break 'outer;
            }
            idx[t] += 1;
            if idx[t] < shells[t].len() {
                break;
            }
            idx[t] = 0;
            t += 1;
        }
    }

    let base = compute_k(inst.lambda())?;
    let rr = inst.r() as u32;
    let unorm = BigInt::from(u.iter().product::<u64>());
    let rb = BigInt::from(rr);
    let k_bound = (unorm.pow(rr * d) * &base.delta)
        .max(&rb * unorm.pow(d) * &base.m1)
        .max(&rb * unorm.pow((rr - 1) * d) * &base.m2);
    let l = k - r;
    let mut max_derived_k = BigInt::from(0);
    let mut out = Vec::with_capacity(classes.len());
    let mut sum = 0.0;
    for (lambda, multiplicity) in classes {
        let kk = compute_k(&lambda)?.k;
        max_derived_k = max_derived_k.max(kk);
        let member = inst.with_k(l as u32)?.with_lambda(lambda.clone())?;
        let c = predict(&member, opts)?.c_lambda;
        sum += multiplicity as f64 * c;
        out.push(FamilyClass {
            lambda,
            multiplicity,
            c_lambda: c,
        });
    }
    let zeta_factor = zeta_real(e as f64)?.powi(-(l as i32));
    Ok(FamilyReport {
        r,
        l,
        u: u.to_vec(),
        members,
        classes: out,
        zeta_factor,
        constant: zeta_factor * sum,
        k_bound_holds: max_derived_k <= k_bound,
        max_derived_k,
        k_bound,
    })
}

/// `Θ_u(V) = Σ_{v <= V} θ(u, v)`: points whose first `r` blocks have norms `u` and the rest
/// norms at most `V`.
pub fn slice_count(inst: &ProblemInstance, u: &[u64], v: &[u64]) -> Result<u128> {
    if u.len() + v.len() != inst.k() as usize {
        return arg("u and V must together have k entries");
    }
    let mut counter = Counter::new(inst);
    let mut m: Vec<u64> = u.iter().copied().chain(v.iter().map(|_| 1)).collect();
    let r = u.len();
    let mut total = 0u128;
    if v.contains(&0) {
        return Ok(0);
    }
    loop {
        total += counter.theta(&m)?;
        let mut t = 0;
        loop {
            if t == v.len() {
                return Ok(total);
            }
            m[r + t] += 1;
            if m[r + t] <= v[t] {
                break;
            }
            m[r + t] = 1;
            t += 1;
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct BatchRow {
    pub name: String,
    #[serde(serialize_with = "ser_big")]
    pub k: BigInt,
    pub c_lambda: f64,
    pub row: BoxRow,
}

#[derive(Debug, Clone, Serialize)]
pub struct Skipped {
    pub name: String,
    #[serde(serialize_with = "ser_big")]
    pub k: BigInt,
}

#[derive(Debug, Clone, Serialize)]
pub struct BatchReport {
    pub bounds: Vec<u64>,
    pub mode: CountMode,
    pub nonzero: bool,
    #[serde(serialize_with = "ser_big")]
    pub k0: BigInt,
    pub rows: Vec<BatchRow>,
    pub skipped: Vec<Skipped>,
    /// `max |ratio − 1|` over members with a nonzero prediction.
    pub spread: Option<f64>,
    #[serde(serialize_with = "ser_u128")]
    pub total_count: u128,
}

/// Runs [`compare_box`] at one common box over every member with `K(Λ) <= K0`.
pub fn uniformity_batch(
    members: &[(String, ProblemInstance)],
    k0: &BigInt,
    bounds: &[u64],
    mode: CountMode,
    nonzero: bool,
    opts: &PredictOptions,
) -> Result<BatchReport> {
    let mut rows = Vec::new();
    let mut skipped = Vec::new();
    for (name, inst) in members {
        let k = compute_k(inst.lambda())?.k;
        if &k > k0 {
            skipped.push(Skipped {
                name: name.clone(),
                k,
            });
            continue;
        }
        let prediction = predict(inst, opts)?;
        let mut cmp = compare_box(inst, &[bounds.to_vec()], mode, nonzero, &prediction, opts)?;
        rows.push(BatchRow {
            name: name.clone(),
            k,
            c_lambda: prediction.c_lambda,
            row: cmp.rows.remove(0),
        });
    }
    let spread = rows
        .iter()
        .filter_map(|r| r.row.ratio)
        .map(|x| (x - 1.0).abs())
        .reduce(f64::max);
    let total_count = rows.iter().map(|r| r.row.empirical).sum();
    Ok(BatchReport {
        bounds: bounds.to_vec(),
        mode,
        nonzero,
        k0: k0.clone(),
        rows,
        skipped,
        spread,
        total_count,
    })
}

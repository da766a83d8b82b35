//! Local densities: the arithmetic function `T(q)`, congruence counts `Φ(q)`, Euler factors
//! and the truncated singular series `𝔖(Λ, Y) = Σ_{q <= Y} T(q)`.
//!
//! Residues `A` range over the complete system `{0, …, q−1}^R`, so `T(1) = 1` and
//! `Σ_{l <= L} T(p^l) = Φ(p^L) / p^{L(ks−R)}` holds exactly.

mod expsum;
mod zeta;

use num_complex::Complex64;
use num_integer::Integer;
use serde::Serialize;

use crate::arith::{pow_mod, primes_up_to, rem_euclid, valuation};
use crate::coefficients::compute_k;
use crate::error::{Error, Result};
use crate::instance::ProblemInstance;
use crate::report::ser_u128;

pub use expsum::{exp_sum_s, normalized_sums, power_distribution};
pub use zeta::{zeta_real, zeta_with_bound};

pub const CONVENTION_NOTE: &str = "residues A in {0,...,q-1}^R with gcd(A_1,...,A_R,q)=1";

/// Agreement required between the two Euler-factor paths and for stabilization.
pub const TOLERANCE: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SeriesConfig {
    /// Largest residue-vector state space `q^R` for the congruence count.
    pub phi_state_budget: usize,
    /// Rough operation budget per Euler-factor depth.
    pub euler_cost_budget: f64,
    pub max_depth: u32,
}

impl Default for SeriesConfig {
    fn default() -> Self {
        SeriesConfig {
            phi_state_budget: 1 << 22,
            euler_cost_budget: 5e7,
            max_depth: 16,
        }
    }
}

fn linear_forms<'a>(
    inst: &'a ProblemInstance,
    a: &[u64],
    q: u64,
) -> impl Iterator<Item = usize> + 'a {
    let a = a.to_vec();
    (0..inst.s()).map(move |j| {
        let v: i128 = (0..inst.r())
            .map(|i| i128::from(inst.entry(i, j)) * i128::from(a[i]))
            .sum();
        rem_euclid(v, q) as usize
    })
}

fn t_from_sums(inst: &ProblemInstance, q: u64, sums: &[Complex64]) -> Result<f64> {
    let r = inst.r();
    let mut a = vec![0u64; r];
    let mut total = Complex64::new(0.0, 0.0);
    loop {
        let g = a.iter().fold(q, |g, &x| g.gcd(&x));
        if g == 1 {
            let mut prod = Complex64::new(1.0, 0.0);
            for l in linear_forms(inst, &a, q) {
                prod *= sums[l];
            }
            total += prod;
        }
        let mut i = 0;
        loop {
            if i == r {
                if total.im.abs() > TOLERANCE {
                    return Err(Error::Consistency(format!(
                        "T({q}) has imaginary part {:e}",
                        total.im
                    )));
                }
                return Ok(total.re);
            }
            a[i] += 1;
            if a[i] < q {
                break;
            }
            a[i] = 0;
            i += 1;
        }
    }
}

/// `T(q) = q^{−ks} Σ_A Π_j S_k(q, L_j(A))`, with `L_j(A) = Σ_i λ_{i,j} A_i`.
pub fn t_of_q(inst: &ProblemInstance, q: u64) -> Result<f64> {
    let sums = normalized_sums(q, inst.k(), inst.d());
    t_from_sums(inst, q, &sums)
}

/// Number of solutions modulo `q` of the system of congruences, by dynamic programming over
/// residue vectors in `(ℤ/q)^R`.
pub fn phi_congruence_count(inst: &ProblemInstance, q: u64) -> Result<u128> {
    phi_with_budget(inst, q, SeriesConfig::default().phi_state_budget)
}

pub fn phi_with_budget(inst: &ProblemInstance, q: u64, state_budget: usize) -> Result<u128> {
    let r = inst.r() as u32;
    let states = (q as u128).checked_pow(r).filter(|&n| n <= state_budget as u128).ok_or_else(|| {
        Error::Budget(format!(
            "congruence count modulo {q} needs {q}^{r} states (budget {state_budget}); lower the depth"
        ))
    })? as usize;
    let ks = inst.k() * inst.s() as u32;
    (q as u128)
        .checked_pow(ks)
        .ok_or_else(|| Error::Overflow(format!("{q}^{ks} exceeds 128-bit range")))?;
    let dist = power_distribution(q, inst.k(), inst.d());
    let values: Vec<(u64, u128)> = dist
        .iter()
        .enumerate()
        .filter(|e| *e.1 != 0)
        .map(|(t, &c)| (t as u64, c))
        .collect();
    let strides: Vec<usize> = (0..r).map(|i| (q as usize).pow(i)).collect();
    let qs = q as usize;
    let mut cur = vec![0u128; states];
    cur[0] = 1;
    for j in 0..inst.s() {
        let mut next = vec![0u128; states];
        for &(t, c) in &values {
            let shift: Vec<usize> = (0..r as usize)
                .map(|i| rem_euclid(i128::from(inst.entry(i, j)) * i128::from(t), q) as usize)
                .collect();
            for (idx, &v) in cur.iter().enumerate() {
                if v == 0 {
                    continue;
                }
                let mut target = 0;
                for i in 0..r as usize {
                    let digit = (idx / strides[i]) % qs;
                    target += ((digit + shift[i]) % qs) * strides[i];
                }
                next[target] += v * c;
            }
        }
        cur = next;
    }
    Ok(cur[0])
}

/// Congruence count by enumerating all of `(ℤ/q)^{ks}`; only for tiny moduli.
pub fn phi_enumerate(inst: &ProblemInstance, q: u64) -> u128 {
    let (k, s, d) = (inst.k() as usize, inst.s(), inst.d());
    let n = k * s;
    let mut x = vec![0u64; n];
    let mut count = 0;
    loop {
        let ok = (0..inst.r()).all(|i| {
            let mut sum: i128 = 0;
            for j in 0..s {
                let mono = (0..k).fold(1u64, |m, t| m * x[t * s + j] % q);
                sum += i128::from(inst.entry(i, j)) * i128::from(pow_mod(mono, u64::from(d), q));
            }
            rem_euclid(sum, q) == 0
        });
        if ok {
            count += 1;
        }
        let mut t = 0;
        loop {
            if t == n {
                return count;
            }
            x[t] += 1;
            if x[t] < q {
                break;
            }
            x[t] = 0;
            t += 1;
        }
    }
}

/// Both paths of the partial-sum identity at one depth.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EulerFactorReport {
    pub p: u64,
    pub depth: u32,
    #[serde(serialize_with = "ser_u128")]
    pub phi: u128,
    /// `Φ(p^L) / p^{L(ks−R)}`
    pub from_phi: f64,
    /// `Σ_{l <= L} T(p^l)`
    pub from_t: f64,
    pub mismatch: f64,
}

fn phi_ratio(inst: &ProblemInstance, p: u64, depth: u32, phi: u128) -> f64 {
    let e = (inst.k() as i32 * inst.s() as i32 - inst.r() as i32) * depth as i32;
    phi as f64 / (p as f64).powi(e)
}

/// Evaluates both paths and fails with a consistency error if they disagree.
pub fn euler_factor_report(
    inst: &ProblemInstance,
    p: u64,
    depth: u32,
) -> Result<EulerFactorReport> {
    let mut from_t = 1.0;
    for l in 1..=depth {
        from_t += t_of_q(inst, p.pow(l))?;
    }
    let phi = phi_congruence_count(inst, p.pow(depth))?;
    check_paths(inst, p, depth, phi, from_t)
}

fn check_paths(
    inst: &ProblemInstance,
    p: u64,
    depth: u32,
    phi: u128,
    from_t: f64,
) -> Result<EulerFactorReport> {
    let from_phi = phi_ratio(inst, p, depth, phi);
    let mismatch = (from_phi - from_t).abs();
    if mismatch > TOLERANCE {
        return Err(Error::Consistency(format!(
            "Euler factor at p={p}, L={depth}: Φ path {from_phi} vs T path {from_t}"
        )));
    }
    Ok(EulerFactorReport {
        p,
        depth,
        phi,
        from_phi,
        from_t,
        mismatch,
    })
}

/// `Φ(p^L) / p^{L(ks−R)}`, verified against `Σ_{l <= L} T(p^l)`.
pub fn euler_factor(inst: &ProblemInstance, p: u64, depth: u32) -> Result<f64> {
    euler_factor_report(inst, p, depth).map(|r| r.from_phi)
}

/// Starting depth `max(1, 2·v_p(d) + 1)`.
pub fn default_depth(p: u64, d: u32) -> u32 {
    2 * valuation(i128::from(d), p) + 1
}

/// Euler factor after depth stabilization.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EulerFactor {
    pub p: u64,
    pub depth: u32,
    pub value: f64,
    /// `|E_p(L) − E_p(L−1)| = |T(p^L)|` at the final depth.
    pub increment: f64,
    pub stable: bool,
    pub mismatch: f64,
}

fn depth_cost(inst: &ProblemInstance, q: u64) -> f64 {
    let qf = q as f64;
    let r = inst.r() as i32;
    f64::from(inst.k() - 1) * qf * qf + qf.powi(r + 1) * (inst.s() as f64 + 1.0)
}

fn depth_feasible(inst: &ProblemInstance, p: u64, depth: u32, config: &SeriesConfig) -> bool {
    let Some(q) = p.checked_pow(depth) else {
        return false;
    };
    let ks = inst.k() * inst.s() as u32;
    depth <= config.max_depth
        && depth_cost(inst, q) <= config.euler_cost_budget
        && (q as u128)
            .checked_pow(inst.r() as u32)
            .is_some_and(|n| n <= config.phi_state_budget as u128)
        && (q as u128).checked_pow(ks).is_some()
}

/// Two consecutive vanishing increments: a single one is not enough, since `T(p)` can vanish
/// while `T(p^2)` does not.
fn stable(prev_t: f64, last_t: f64) -> bool {
    prev_t.abs() < TOLERANCE && last_t.abs() < TOLERANCE
}

/// Raises the depth from `start` until successive values differ by less than the tolerance
/// or the next depth exceeds the budget. Successive values differ by `T(p^L)`.
pub fn stabilized_euler_factor(
    inst: &ProblemInstance,
    p: u64,
    start: u32,
    config: &SeriesConfig,
) -> Result<EulerFactor> {
    let start = start.max(1);
    let mut partial = 1.0;
    let mut last_t = f64::INFINITY;
    let mut prev_t = f64::INFINITY;
    let mut depth = 0;
    let mut last: Option<EulerFactorReport> = None;
    loop {
        let next = depth + 1;
        if next > start && !depth_feasible(inst, p, next, config) {
            break;
        }
        let q = p
            .checked_pow(next)
            .ok_or_else(|| Error::Overflow(format!("{p}^{next} exceeds 64-bit range")))?;
        prev_t = last_t;
        last_t = t_of_q(inst, q)?;
        partial += last_t;
        depth = next;
        if depth < start {
            continue;
        }
        let phi = phi_congruence_count(inst, q)?;
        last = Some(check_paths(inst, p, depth, phi, partial)?);
        if stable(prev_t, last_t) {
            break;
        }
    }
    let rep = last
        .ok_or_else(|| Error::Budget(format!("no Euler factor depth fits the budget at p={p}")))?;
    Ok(EulerFactor {
        p,
        depth: rep.depth,
        value: rep.from_phi,
        increment: last_t.abs(),
        stable: stable(prev_t, last_t),
        mismatch: rep.mismatch,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SeriesEstimate {
    pub value: f64,
    pub truncation: u64,
    pub euler_factors: Vec<EulerFactor>,
    pub euler_product: f64,
    /// `Y^{−1/d} K^{(n0+1)/d + R − 1}`, the shape of the proven tail bound (constant 1).
    pub tail_heuristic: f64,
    pub convention_note: &'static str,
    /// No probed Euler factor vanishes.
    pub euler_factors_positive: bool,
    pub euler_factors_stable: bool,
    /// `s >= R(n0+1)`; below this threshold convergence is not guaranteed.
    pub s_large_enough: bool,
}

pub fn singular_series(inst: &ProblemInstance, y: u64) -> Result<SeriesEstimate> {
    singular_series_with(inst, y, None, &SeriesConfig::default())
}

/// Truncated singular series with an optional fixed starting depth for every Euler factor.
pub fn singular_series_with(
    inst: &ProblemInstance,
    y: u64,
    depth: Option<u32>,
    config: &SeriesConfig,
) -> Result<SeriesEstimate> {
    if y == 0 {
        return crate::error::arg("truncation must be positive");
    }
    let mut value = 0.0;
    for q in 1..=y {
        value += t_of_q(inst, q)?;
    }
    let mut euler_factors = Vec::new();
    for p in primes_up_to(y) {
        let start = depth.unwrap_or_else(|| default_depth(p, inst.d()));
        euler_factors.push(stabilized_euler_factor(inst, p, start, config)?);
    }
    let euler_product = euler_factors.iter().map(|e| e.value).product();
    let k = compute_k(inst.lambda())?.k_f64();
    let d = f64::from(inst.d());
    let exponent = f64::from(inst.n0() + 1) / d + inst.r() as f64 - 1.0;
    Ok(SeriesEstimate {
        value,
        truncation: y,
        euler_factors_positive: euler_factors.iter().all(|e| e.value > TOLERANCE),
        euler_factors_stable: euler_factors.iter().all(|e| e.stable),
        euler_factors,
        euler_product,
        tail_heuristic: (y as f64).powf(-1.0 / d) * k.powf(exponent),
        convention_note: CONVENTION_NOTE,
        s_large_enough: inst.s() as u64 >= inst.r() as u64 * (u64::from(inst.n0()) + 1),
    })
}

#[cfg(test)]
mod tests;

//! Search for Hensel-liftable solutions of `Σ_j λ_{i,j} y_j^d ≡ 0 (mod p^γ)`.
//!
//! A residue vector `y` qualifies when, for some column set `S` with `det Λ_S ≠ 0`, the Jacobian
//! minor `d^R det(Λ_S) Π_{j∈S} y_j^{d−1}` has valuation `e` with `γ > 2e`, and every `y_j` has
//! valuation below `γ − e`. Such a point lifts to a solution in `ℤ_p^s` congruent to `y` modulo
//! `p^{γ−e}`, hence with every coordinate nonzero.

use num_bigint::BigInt;
use num_traits::{ToPrimitive, Zero};
use serde::Serialize;

use crate::arith::{combinations, is_prime, pow_mod, rem_euclid};
use crate::error::{arg, Error, Result};
use crate::exact::{determinant, select_columns};
use crate::instance::ProblemInstance;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum PrimeStatus {
    LiftableWitness,
    /// Not a proof of insolubility.
    NoWitnessFound,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct PrimeReport {
    pub p: u64,
    pub status: PrimeStatus,
    /// Residues modulo `p^gamma_used`.
    pub witness: Option<Vec<u64>>,
    /// Columns of the Jacobian minor certifying the lift.
    pub minor: Option<Vec<usize>>,
    pub minor_valuation: Option<u32>,
    /// Precision of the witness, or the largest precision searched exhaustively.
    pub gamma_used: u32,
}

/// Jacobian data for a verified witness.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Certificate {
    pub minor: Vec<usize>,
    pub valuation: u32,
}

fn big_valuation(x: &BigInt, p: u64) -> u32 {
    assert!(!x.is_zero());
    let p = BigInt::from(p);
    let mut x = x.clone();
    let mut v = 0;
    while (&x % &p).is_zero() {
        x /= &p;
        v += 1;
    }
    v
}

fn residue_valuation(y: u64, p: u64, gamma: u32) -> u32 {
    if y == 0 {
        return gamma;
    }
    let mut v = 0;
    let mut y = y;
    while y.is_multiple_of(p) {
        y /= p;
        v += 1;
    }
    v.min(gamma)
}

/// Invertible `R`-column subsets with `v_p(det Λ_S)`, sorted by valuation.
fn minors(inst: &ProblemInstance, p: u64) -> Vec<(Vec<usize>, u32)> {
    let mut out: Vec<(Vec<usize>, u32)> = combinations(inst.s(), inst.r())
        .into_iter()
        .filter_map(|cols| {
            let det = determinant(&select_columns(inst.lambda(), &cols));
            (!det.is_zero()).then(|| {
                let v = big_valuation(&det, p);
                (cols, v)
            })
        })
        .collect();
    out.sort_by_key(|(cols, v)| (*v, cols.clone()));
    out
}

fn d_valuation(d: u32, p: u64) -> u32 {
    residue_valuation(u64::from(d), p, u32::MAX)
}

/// Checks that `y` solves the system modulo `p^gamma` and carries a Hensel certificate.
pub fn verify_padic_witness(
    inst: &ProblemInstance,
    p: u64,
    gamma: u32,
    y: &[u64],
) -> Option<Certificate> {
    let q = p.checked_pow(gamma)?;
    if y.len() != inst.s() {
        return None;
    }
    let d = u64::from(inst.d());
    let powers: Vec<u64> = y.iter().map(|&v| pow_mod(v % q, d, q)).collect();
    let solves = (0..inst.r()).all(|i| {
        let sum: i128 = (0..inst.s())
            .map(|j| i128::from(inst.entry(i, j)) * i128::from(powers[j]))
            .sum();
        rem_euclid(sum, q) == 0
    });
    if !solves {
        return None;
    }
    let vals: Vec<u32> = y
        .iter()
        .map(|&v| residue_valuation(v % q, p, gamma))
        .collect();
    let vmax = *vals.iter().max()?;
    let base = inst.r() as u32 * d_valuation(inst.d(), p);
    minors(inst, p).into_iter().find_map(|(cols, vdet)| {
        let e = base + vdet + (inst.d() - 1) * cols.iter().map(|&j| vals[j]).sum::<u32>();
        (gamma > 2 * e && vmax < gamma - e).then_some(Certificate {
            minor: cols,
            valuation: e,
        })
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SearchConfig {
    /// Largest `s · q^R · (distinct d-th power residues)` worth of work per precision.
    pub budget: f64,
}

impl Default for SearchConfig {
    fn default() -> Self {
        SearchConfig { budget: 2e8 }
    }
}

/// Reachability over `(ℤ/q)^R` with a representative residue per transition.
struct Reach<'a> {
    inst: &'a ProblemInstance,
    q: u64,
    states: usize,
}

impl Reach<'_> {
    fn shift(&self, j: usize, t: u64) -> Vec<u64> {
        (0..self.inst.r())
            .map(|i| rem_euclid(i128::from(self.inst.entry(i, j)) * i128::from(t), self.q))
            .collect()
    }

    fn add(&self, idx: usize, shift: &[u64], sign: i64) -> usize {
        let q = self.q as usize;
        let mut rest = idx;
        let mut out = 0;
        let mut stride = 1;
        for &s in shift {
            let digit = rest % q;
            rest /= q;
            let s = s as usize;
            let moved = if sign > 0 {
                (digit + s) % q
            } else {
                (digit + q - s) % q
            };
            out += moved * stride;
            stride *= q;
        }
        out
    }

    /// `options[j]` lists `(y_j^d mod q, y_j)`; returns a `y` reaching the zero state.
    fn solve(&self, options: &[Vec<(u64, u64)>]) -> Option<Vec<u64>> {
        let s = options.len();
        let shifts: Vec<Vec<Vec<u64>>> = options
            .iter()
            .enumerate()
            .map(|(j, opts)| opts.iter().map(|&(t, _)| self.shift(j, t)).collect())
            .collect();
        let mut layers: Vec<Vec<bool>> = Vec::with_capacity(s + 1);
        let mut cur = vec![false; self.states];
        cur[0] = true;
        layers.push(cur.clone());
        for sh in &shifts {
            let mut next = vec![false; self.states];
            for (idx, _) in cur.iter().enumerate().filter(|e| *e.1) {
                for v in sh {
                    next[self.add(idx, v, 1)] = true;
                }
            }
            layers.push(next.clone());
            cur = next;
        }
        if !layers[s][0] {
            return None;
        }
        let mut y = vec![0u64; s];
        let mut state = 0;
        for j in (0..s).rev() {
            let (pos, prev) = shifts[j]
                .iter()
                .enumerate()
                .map(|(n, v)| (n, self.add(state, v, -1)))
                .find(|&(_, prev)| layers[j][prev])
                .expect("reachable state has a predecessor");
            y[j] = options[j][pos].1;
            state = prev;
        }
        Some(y)
    }
}

/// Distinct `d`-th power residues modulo `q` over `y` with valuation in `vals`.
fn power_options(p: u64, gamma: u32, d: u32, vals: std::ops::Range<u32>) -> Vec<(u64, u64)> {
    let q = p.pow(gamma);
    let mut seen = std::collections::BTreeMap::new();
    for y in 1..q {
        if vals.contains(&residue_valuation(y, p, gamma)) {
            seen.entry(pow_mod(y, u64::from(d), q)).or_insert(y);
        }
    }
    seen.into_iter().collect()
}

/// Tuples of nonnegative integers with `Σ a · weight <= cap`.
fn bounded_tuples(len: usize, weight: u32, cap: u32) -> Vec<Vec<u32>> {
    if len == 0 {
        return vec![vec![]];
    }
    let top = if weight == 0 { 0 } else { cap / weight };
    let mut out = Vec::new();
    for a in 0..=top {
        for mut rest in bounded_tuples(len - 1, weight, cap - a * weight) {
            rest.insert(0, a);
            out.push(rest);
        }
    }
    out
}

fn search_at(
    inst: &ProblemInstance,
    p: u64,
    gamma: u32,
    minors: &[(Vec<usize>, u32)],
) -> Option<Vec<u64>> {
    let q = p.pow(gamma);
    let states = (q as usize).pow(inst.r() as u32);
    let reach = Reach { inst, q, states };
    let emax = (gamma - 1) / 2;
    let base = inst.r() as u32 * d_valuation(inst.d(), p);
    let d = inst.d();
    for (cols, vdet) in minors {
        let e0 = base + vdet;
        if e0 > emax {
            break;
        }
        for a in bounded_tuples(cols.len(), d - 1, emax - e0) {
            let e = e0 + (d - 1) * a.iter().sum::<u32>();
            if a.iter().any(|&v| v >= gamma - e) {
                continue;
            }
            let options: Vec<Vec<(u64, u64)>> = (0..inst.s())
                .map(|j| match cols.iter().position(|&c| c == j) {
                    Some(n) if d > 1 => power_options(p, gamma, d, a[n]..a[n] + 1),
                    _ => power_options(p, gamma, d, 0..gamma - e),
                })
                .collect();
            if let Some(y) = reach.solve(&options) {
                return Some(y);
            }
        }
    }
    None
}

/// Escalates `γ = 1, …, gamma_max` until a liftable witness appears.
///
/// Errors with a budget error when a precision that must still be searched is too large; the
/// message carries the largest completed precision.
pub fn padic_solvable(inst: &ProblemInstance, p: u64, gamma_max: u32) -> Result<PrimeReport> {
    padic_solvable_with(inst, p, gamma_max, SearchConfig::default())
}

pub fn padic_solvable_with(
    inst: &ProblemInstance,
    p: u64,
    gamma_max: u32,
    config: SearchConfig,
) -> Result<PrimeReport> {
    escalate(inst, p, gamma_max, config)?.map_err(|stop| Error::Budget(stop.message))
}

/// Search abandoned because the next precision exceeds the budget.
pub(crate) struct BudgetStop {
    pub completed: u32,
    pub message: String,
}

pub(crate) fn escalate(
    inst: &ProblemInstance,
    p: u64,
    gamma_max: u32,
    config: SearchConfig,
) -> Result<std::result::Result<PrimeReport, BudgetStop>> {
    if !is_prime(p) {
        return arg(format!("{p} is not prime"));
    }
    if gamma_max == 0 {
        return arg("gamma_max must be at least 1");
    }
    let ms = minors(inst, p);
    for gamma in 1..=gamma_max {
        let q = p.checked_pow(gamma).map(|q| q as f64);
        let cost = q.map(|q| inst.s() as f64 * q.powi(inst.r() as i32) * q);
        if !cost.is_some_and(|c| c <= config.budget) {
            return Ok(Err(BudgetStop {
                completed: gamma - 1,
                message: format!(
                    "p-adic search at p = {p}, gamma = {gamma} exceeds the budget of {:.1e}; \
                     largest completed gamma = {}",
                    config.budget,
                    gamma - 1
                ),
            }));
        }
        if let Some(y) = search_at(inst, p, gamma, &ms) {
            let cert = verify_padic_witness(inst, p, gamma, &y).ok_or_else(|| {
                Error::Consistency(format!(
                    "p-adic witness {y:?} mod {p}^{gamma} fails to verify"
                ))
            })?;
            return Ok(Ok(PrimeReport {
                p,
                status: PrimeStatus::LiftableWitness,
                witness: Some(y),
                minor: Some(cert.minor),
                minor_valuation: Some(cert.valuation),
                gamma_used: gamma,
            }));
        }
    }
    Ok(Ok(PrimeReport::none(p, gamma_max)))
}

impl PrimeReport {
    pub(crate) fn none(p: u64, gamma: u32) -> Self {
        PrimeReport {
            p,
            status: PrimeStatus::NoWitnessFound,
            witness: None,
            minor: None,
            minor_valuation: None,
            gamma_used: gamma,
        }
    }
}

/// Prime divisors of an integer of at most 128 bits; empty for larger ones.
pub(crate) fn big_prime_divisors(x: &BigInt) -> Vec<u64> {
    x.magnitude()
        .to_u128()
        .map(crate::arith::prime_divisors)
        .unwrap_or_default()
}

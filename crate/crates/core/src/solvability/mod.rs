//! Local solvability with all coordinates nonzero, over `ℝ` and over `ℚ_p`, and the resulting
//! sign of `C_Λ`.
//!
//! Everything works with the diagonalized system `Σ_j λ_{i,j} u_j = 0`, `u_j = y_j^d`, where
//! `y_j` stands for the monomial `x_{1,j} ⋯ x_{k,j}`.

mod padic;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use rayon::prelude::*;
use serde::Serialize;

use crate::arith::{prime_divisors, primes_up_to};
use crate::coefficients::compute_k;
use crate::error::{Error, Result};
use crate::exact::{apply, big_to_f64, integerize, null_space_basis, positive_null_vector};
use crate::instance::ProblemInstance;
use crate::report::ser_big_vec;

pub use padic::{
    padic_solvable, padic_solvable_with, verify_padic_witness, Certificate, PrimeReport,
    PrimeStatus, SearchConfig,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum RealStatus {
    SolvableWitness,
    Unsolvable,
    Unknown,
}

/// A real solution: the exact integer `u` with `Λu = 0`, and `y_j = sign(u_j)|u_j|^{1/d}`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RealWitness {
    #[serde(serialize_with = "ser_big_vec")]
    pub u: Vec<BigInt>,
    pub y: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RealReport {
    pub status: RealStatus,
    pub witness: Option<RealWitness>,
}

/// Whether `u` solves the diagonalized system with every `u_j` admissible as a `d`-th power of
/// a nonzero real.
pub fn verify_real_u(inst: &ProblemInstance, u: &[BigInt]) -> bool {
    u.len() == inst.s()
        && apply(inst.lambda(), u).iter().all(Zero::is_zero)
        && u.iter().all(|x| {
            if inst.d().is_multiple_of(2) {
                x.is_positive()
            } else {
                !x.is_zero()
            }
        })
}

/// Whether the integer vector `y` (all entries nonzero) solves `Σ_j λ_{i,j} y_j^d = 0`.
pub fn verify_real_y(inst: &ProblemInstance, y: &[i64]) -> bool {
    let u: Vec<BigInt> = y.iter().map(|&v| BigInt::from(v).pow(inst.d())).collect();
    y.iter().all(|&v| v != 0) && verify_real_u(inst, &u)
}

fn witness(inst: &ProblemInstance, u: Vec<BigInt>) -> Result<RealWitness> {
    if !verify_real_u(inst, &u) {
        return Err(Error::Consistency(format!(
            "real witness {u:?} fails to verify"
        )));
    }
    let inv = 1.0 / f64::from(inst.d());
    let y = u
        .iter()
        .map(|x| {
            let v = big_to_f64(x);
            v.signum() * v.abs().powf(inv)
        })
        .collect();
    Ok(RealWitness { u, y })
}

/// Decides real solvability with all `y_j ≠ 0` exactly.
pub fn real_solvable(inst: &ProblemInstance) -> Result<RealReport> {
    let unsolvable = RealReport {
        status: RealStatus::Unsolvable,
        witness: None,
    };
    if inst.d().is_multiple_of(2) {
        let Some(u) = positive_null_vector(inst.lambda()) else {
            return Ok(unsolvable);
        };
        let u = integerize(&u);
        return Ok(RealReport {
            status: RealStatus::SolvableWitness,
            witness: Some(witness(inst, u)?),
        });
    }
    let basis = null_space_basis(inst.lambda());
    let s = inst.s();
    if (0..s).any(|j| basis.iter().all(|v| v[j].is_zero())) {
        return Ok(unsolvable);
    }
    // Σ_i t^i v_i vanishes at a fixed j for at most dim − 1 values of t.
    for t in 1u64.. {
        let mut u = vec![BigInt::zero(); s];
        let mut c = BigInt::one();
        for v in &basis {
            for (a, b) in u.iter_mut().zip(v) {
                *a += &c * b;
            }
            c *= t;
        }
        if u.iter().all(|x| !x.is_zero()) {
            let u = integerize(
                &u.into_iter()
                    .map(BigRational::from_integer)
                    .collect::<Vec<_>>(),
            );
            return Ok(RealReport {
                status: RealStatus::SolvableWitness,
                witness: Some(witness(inst, u)?),
            });
        }
    }
    unreachable!()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Positivity {
    Positive,
    Zero,
    Undetermined,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SolvabilityReport {
    pub real_status: RealStatus,
    pub real_witness: Option<RealWitness>,
    pub per_prime: Vec<PrimeReport>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PositivityReport {
    pub sign: Positivity,
    pub prime_bound: u64,
    pub gamma_max: u32,
    pub solvability: SolvabilityReport,
    pub trail: Vec<String>,
}

pub const DEFAULT_GAMMA_MAX: u32 = 8;

/// Primes `p <= max(prime_bound, 20, d·K)` together with every prime dividing `d`, `K` or a
/// nonzero `R × R` minor.
pub fn primes_to_check(
    inst: &ProblemInstance,
    prime_bound: Option<u64>,
) -> Result<(u64, Vec<u64>)> {
    let kinv = compute_k(inst.lambda())?;
    let dk = big_to_f64(&kinv.k) * f64::from(inst.d());
    let bound = prime_bound.unwrap_or_else(|| 20u64.max(dk.min(1e7) as u64));
    let mut primes = primes_up_to(bound);
    primes.extend(prime_divisors(u128::from(inst.d())));
    primes.extend(padic::big_prime_divisors(&kinv.k));
    for det in &kinv.determinants {
        primes.extend(padic::big_prime_divisors(det));
    }
    primes.sort_unstable();
    primes.dedup();
    Ok((bound, primes))
}

/// Combines the real decision with the p-adic search at every prime from [`primes_to_check`].
///
/// A real obstruction gives `zero`; witnesses everywhere give `positive`; anything else is
/// `undetermined`, since the p-adic search never proves insolubility.
pub fn positivity_report(
    inst: &ProblemInstance,
    prime_bound: Option<u64>,
    gamma_max: u32,
) -> Result<PositivityReport> {
    positivity_report_with(inst, prime_bound, gamma_max, SearchConfig::default())
}

pub fn positivity_report_with(
    inst: &ProblemInstance,
    prime_bound: Option<u64>,
    gamma_max: u32,
    config: SearchConfig,
) -> Result<PositivityReport> {
    let real = real_solvable(inst)?;
    let (bound, primes) = primes_to_check(inst, prime_bound)?;
    let mut trail = Vec::new();
    let outcomes: Vec<(PrimeReport, Option<String>)> = primes
        .par_iter()
        .map(|&p| {
            Ok(match padic::escalate(inst, p, gamma_max, config)? {
                Ok(r) => (r, None),
                Err(stop) => (PrimeReport::none(p, stop.completed), Some(stop.message)),
            })
        })
        .collect::<Result<_>>()?;
    let mut per_prime = Vec::with_capacity(outcomes.len());
    for (r, note) in outcomes {
        if let Some(note) = note {
            trail.push(note);
        }
        per_prime.push(r);
    }
    let missing: Vec<u64> = per_prime
        .iter()
        .filter(|r| r.status == PrimeStatus::NoWitnessFound)
        .map(|r| r.p)
        .collect();
    let sign = match real.status {
        RealStatus::Unsolvable => {
            trail.push(if inst.d().is_multiple_of(2) {
                "no strictly positive u with Λu = 0: real obstruction".into()
            } else {
                "some coordinate vanishes on the whole null space: real obstruction".into()
            });
            Positivity::Zero
        }
        RealStatus::Unknown => {
            trail.push("real solvability not decided".into());
            Positivity::Undetermined
        }
        RealStatus::SolvableWitness if missing.is_empty() => {
            trail.push(format!(
                "real witness and liftable witnesses at all {} checked primes",
                per_prime.len()
            ));
            Positivity::Positive
        }
        RealStatus::SolvableWitness => {
            trail.push(format!(
                "no liftable witness up to gamma = {gamma_max} at p = {missing:?}"
            ));
            Positivity::Undetermined
        }
    };
    Ok(PositivityReport {
        sign,
        prime_bound: bound,
        gamma_max,
        solvability: SolvabilityReport {
            real_status: real.status,
            real_witness: real.witness,
            per_prime,
        },
        trail,
    })
}

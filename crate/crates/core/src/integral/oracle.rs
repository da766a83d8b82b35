//! Sampling oracles for the singular integral.
//!
//! The `B(0)` oracle solves the `R` equations `Σ_j λ_{i,j} v_j = 0` for an invertible column
//! set `S`, integrates the first free coordinate exactly on its feasible interval, and samples
//! the remaining free coordinates from the density `ψ_k/d` (as `v = (U_1⋯U_k)^d`).
//! Integrating one coordinate inside each sample keeps the variance finite when `ψ_k` is
//! unbounded.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::Zero;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::vk::rho;
use crate::arith::combinations;
use crate::coefficients::check_hypotheses;
use crate::error::{Error, Result};
use crate::exact::{big_to_f64, determinant, inverse, rational_to_f64, select_columns};
use crate::instance::ProblemInstance;
use crate::quadrature::tanh_sinh;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OracleKind {
    BZero,
    RealDensity,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OracleEstimate {
    pub kind: OracleKind,
    pub value: f64,
    /// One standard error.
    pub error: f64,
    pub samples: u64,
    pub seed: u64,
    pub epsilon: Option<f64>,
}

const BATCH: u64 = 1 << 14;

/// Runs `per_sample` over `samples` draws in fixed-size batches, each with its own ChaCha
/// stream, and merges the batch moments in batch order.
fn sample_moments<F>(samples: u64, seed: u64, per_sample: F) -> (f64, f64)
where
    F: Fn(&mut ChaCha8Rng) -> f64 + Sync,
{
    let batches = samples.div_ceil(BATCH);
    let moments: Vec<(f64, f64)> = (0..batches)
        .into_par_iter()
        .map(|b| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(b);
            let n = BATCH.min(samples - b * BATCH);
            let (mut s1, mut s2) = (0.0, 0.0);
            for _ in 0..n {
                let x = per_sample(&mut rng);
                s1 += x;
                s2 += x * x;
            }
            (s1, s2)
        })
        .collect();
    let (s1, s2) = moments
        .iter()
        .fold((0.0, 0.0), |a, m| (a.0 + m.0, a.1 + m.1));
    let n = samples as f64;
    let mean = s1 / n;
    let var = if samples > 1 {
        ((s2 - n * mean * mean) / (n - 1.0)).max(0.0)
    } else {
        0.0
    };
    (mean, (var / n).sqrt())
}

/// Column set `S` for the change of variables: the leading block of the hypothesis
/// permutation when one exists, otherwise the first invertible `R`-subset.
fn solved_columns(inst: &ProblemInstance) -> Result<Vec<usize>> {
    let r = inst.r();
    if let Some(perm) = check_hypotheses(inst).column_permutation {
        return Ok(perm[..r].to_vec());
    }
    combinations(inst.s(), r)
        .into_iter()
        .find(|c| !determinant(&select_columns(inst.lambda(), c)).is_zero())
        .ok_or_else(|| Error::Structural("no invertible R×R column block".into()))
}

/// Affine form `v = a + b·x` of a coordinate along the integrated direction.
#[derive(Clone, Copy)]
struct Affine {
    a: f64,
    b: f64,
}

/// Integral over the first free coordinate `x` of `ρ(x) Π_{i∈S} ρ(v_i(x))` given the other
/// free coordinates.
fn slice_integral(forms: &[Affine], k: u32, d: u32) -> f64 {
    // forms[0] is x itself.
    let (mut lo, mut hi) = (0.0f64, 1.0f64);
    let (mut lo_tag, mut hi_tag) = (Some(0usize), None::<usize>);
    for (c, f) in forms.iter().enumerate().skip(1) {
        if f.b == 0.0 {
            if f.a < 0.0 || f.a > 1.0 {
                return 0.0;
            }
            continue;
        }
        let zero = -f.a / f.b;
        let one = (1.0 - f.a) / f.b;
        let (low, low_zero, high, high_zero) = if f.b > 0.0 {
            (zero, true, one, false)
        } else {
            (one, false, zero, true)
        };
        if low > lo {
            lo = low;
            lo_tag = low_zero.then_some(c);
        }
        if high < hi {
            hi = high;
            hi_tag = high_zero.then_some(c);
        }
    }
    if !(hi > lo) {
        return 0.0;
    }
    let at = |x: f64, tag: Option<usize>| -> Vec<f64> {
        forms
            .iter()
            .enumerate()
            .map(|(c, f)| if tag == Some(c) { 0.0 } else { f.a + f.b * x })
            .collect()
    };
    let at_lo = at(lo, lo_tag);
    let at_hi = at(hi, hi_tag);
    let (val, _) = tanh_sinh(
        |da, db| {
            let mut prod = 1.0;
            for (c, f) in forms.iter().enumerate() {
                let v = if da <= db {
                    at_lo[c] + f.b * da
                } else {
                    at_hi[c] - f.b * db
                };
                prod *= rho(v, k, d);
                if prod == 0.0 {
                    break;
                }
            }
            prod
        },
        lo,
        hi,
        1e-8,
    );
    val
}

fn draw(rng: &mut ChaCha8Rng, k: u32, d: u32) -> f64 {
    let mut t = 1.0;
    for _ in 0..k {
        t *= 1.0 - rng.gen::<f64>();
    }
    t.powi(d as i32)
}

/// Estimate of `𝔍⁺(Λ) = d^{−s} |det Λ_S|^{−1} B(0)`.
pub fn b_zero_oracle(inst: &ProblemInstance, samples: u64, seed: u64) -> Result<OracleEstimate> {
    let (r, s, k, d) = (inst.r(), inst.s(), inst.k(), inst.d());
    if s <= r {
        return Err(Error::Unsupported("the B(0) oracle needs s > R".into()));
    }
    if samples == 0 {
        return crate::error::arg("sample count must be positive");
    }
    let solved = solved_columns(inst)?;
    let free: Vec<usize> = (0..s).filter(|j| !solved.contains(j)).collect();
    let block = select_columns(inst.lambda(), &solved);
    let inv =
        inverse(&block).ok_or_else(|| Error::Structural("solved block is singular".into()))?;
    let det = big_to_f64(&determinant(&block)).abs();
    // v_S = M v_F with M = −Λ_S^{−1} Λ_F.
    let m: Vec<Vec<f64>> = (0..r)
        .map(|i| {
            free.iter()
                .map(|&j| {
                    let mut acc = BigRational::zero();
                    for (t, inv_row) in inv[i].iter().enumerate() {
                        acc -= inv_row * BigRational::from_integer(BigInt::from(inst.entry(t, j)));
                    }
                    rational_to_f64(&acc)
                })
                .collect()
        })
        .collect();
    let rest = free.len() - 1;
    let per_sample = |rng: &mut ChaCha8Rng| -> f64 {
        let ys: Vec<f64> = (0..rest).map(|_| draw(rng, k, d)).collect();
        let mut forms = Vec::with_capacity(r + 1);
        forms.push(Affine { a: 0.0, b: 1.0 });
        for row in &m {
            let a: f64 = row[1..].iter().zip(&ys).map(|(c, y)| c * y).sum();
            forms.push(Affine { a, b: row[0] });
        }
        slice_integral(&forms, k, d)
    };
    let (mean, se) = if rest == 0 {
        (per_sample(&mut ChaCha8Rng::seed_from_u64(seed)), 0.0)
    } else {
        sample_moments(samples, seed, per_sample)
    };
    Ok(OracleEstimate {
        kind: OracleKind::BZero,
        value: mean / det,
        error: se / det,
        samples,
        seed,
        epsilon: None,
    })
}

/// `vol{t ∈ [−1,1]^{ks} : |F_i(t)| <= ε for all i} / (2ε)^R`, by uniform sampling.
pub fn real_density_oracle(
    inst: &ProblemInstance,
    epsilon: f64,
    samples: u64,
    seed: u64,
) -> Result<OracleEstimate> {
    if !(epsilon > 0.0) {
        return crate::error::arg("epsilon must be positive");
    }
    if samples == 0 {
        return crate::error::arg("sample count must be positive");
    }
    let (k, s, d) = (inst.k() as usize, inst.s(), inst.d() as i32);
    let lambda: Vec<Vec<f64>> = inst
        .lambda()
        .iter()
        .map(|r| r.iter().map(|&x| x as f64).collect())
        .collect();
    let per_sample = |rng: &mut ChaCha8Rng| -> f64 {
        let mono: Vec<f64> = (0..s)
            .map(|_| {
                let p: f64 = (0..k).map(|_| rng.gen_range(-1.0..1.0)).product();
                p.powi(d)
            })
            .collect();
        let inside = lambda.iter().all(|row| {
            let f: f64 = row.iter().zip(&mono).map(|(l, m)| l * m).sum();
            f.abs() <= epsilon
        });
        if inside {
            1.0
        } else {
            0.0
        }
    };
    let (p, se) = sample_moments(samples, seed, per_sample);
    let scale = 2f64.powi((k * s) as i32) / (2.0 * epsilon).powi(inst.r() as i32);
    Ok(OracleEstimate {
        kind: OracleKind::RealDensity,
        value: p * scale,
        error: se * scale,
        samples,
        seed,
        epsilon: Some(epsilon),
    })
}

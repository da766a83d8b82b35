//! The one-monomial integrals `V_k(β) = ∫_{[0,1]^k} e(β⟨t⟩^d) dt` and the density `ψ_k`.

use std::f64::consts::TAU;

use num_complex::Complex64;

use crate::arith::factorial;
use crate::error::{arg, Result};
use crate::quadrature::{adaptive, Quad, Tolerance};

/// `e(x) = exp(2πix)`.
pub fn e(x: f64) -> Complex64 {
    Complex64::from_polar(1.0, TAU * x)
}

/// `ψ_k(v) = v^{1/d−1} (log 1/v)^{k−1} / (d^{k−1} (k−1)!)`.
pub fn psi_k(v: f64, k: u32, d: u32) -> Result<f64> {
    if !(v > 0.0 && v <= 1.0) {
        return arg(format!("psi_k needs 0 < v <= 1, got {v}"));
    }
    Ok(psi_unchecked(v, k, d))
}

pub(crate) fn psi_unchecked(v: f64, k: u32, d: u32) -> f64 {
    let df = f64::from(d);
    let log = (-v.ln()).max(0.0);
    v.powf(1.0 / df - 1.0) * log.powi(k as i32 - 1) / (df.powi(k as i32 - 1) * factorial(k - 1))
}

/// The probability density `ψ_k / d` on `(0, 1]`; zero outside.
pub(crate) fn rho(v: f64, k: u32, d: u32) -> f64 {
    if v <= 0.0 || v > 1.0 {
        0.0
    } else {
        psi_unchecked(v, k, d) / f64::from(d)
    }
}

const V_TOL: Tolerance = Tolerance::new(1e-12, 0.0, 50_000);

fn initial_breaks(freq: f64) -> Vec<f64> {
    let n = (freq.abs() / 2.0).ceil() as usize + 1;
    (0..=n).map(|i| i as f64 / n as f64).collect()
}

/// `V_k(β)` as `∫_0^1 (log 1/w)^{k−1}/(k−1)! · e(βw^d) dw` (the substitution `v = w^d` in
/// `(1/d)∫ψ_k(v)e(βv)dv`), with a closed form for `k = d = 1`.
pub fn v_k(beta: f64, k: u32, d: u32) -> Quad {
    if k == 1 && d == 1 {
        let value = if beta.abs() < 1e-8 {
            Complex64::new(1.0, std::f64::consts::PI * beta)
        } else {
            (e(beta) - 1.0) / Complex64::new(0.0, TAU * beta)
        };
        return Quad {
            value,
            error: 0.0,
            panels: 0,
            converged: true,
        };
    }
    let norm = factorial(k - 1);
    let df = d as i32;
    let mut f = |w: f64| {
        let weight = if k == 1 {
            1.0
        } else {
            (-w.ln()).powi(k as i32 - 1) / norm
        };
        e(beta * w.powi(df)) * weight
    };
    // Phase at most one radian on [0, w1], where the power series of e(βw^d) is used.
    let w1 = (TAU * beta.abs()).recip().powf(1.0 / f64::from(d)).min(1.0);
    let head = head_series(beta, k, d, w1);
    if w1 >= 1.0 {
        return Quad {
            value: head,
            error: 1e-15,
            panels: 0,
            converged: true,
        };
    }
    let mut q = adaptive(&mut f, &phase_breaks(beta, d, w1), V_TOL);
    q.value += head;
    q
}

/// `∫_0^a w^p (−log w)^m dw` for `0 < a <= 1`.
fn log_moment(m: u32, p: f64, a: f64) -> f64 {
    let l = -a.ln();
    let mut sum = 0.0;
    let mut lj = 1.0; // L^j / j!
    for j in 0..=m {
        if j > 0 {
            lj *= l / f64::from(j);
        }
        sum += lj / (p + 1.0).powi((m - j + 1) as i32);
    }
    a.powf(p + 1.0) * factorial(m) * sum
}

/// `∫_0^{w1} (log 1/w)^{k−1}/(k−1)! e(βw^d) dw` from the power series of the exponential.
fn head_series(beta: f64, k: u32, d: u32, w1: f64) -> Complex64 {
    let z = Complex64::new(0.0, TAU * beta);
    let mut coef = Complex64::new(1.0, 0.0); // z^n / n!
    let mut sum = Complex64::new(0.0, 0.0);
    for n in 0..40u32 {
        if n > 0 {
            coef *= z / f64::from(n);
        }
        let term = coef * log_moment(k - 1, f64::from(d * n), w1);
        sum += term;
        if n > 2 && term.norm() < 1e-18 {
            break;
        }
    }
    sum / factorial(k - 1)
}

/// Breakpoints on `[w1, 1]` two cycles apart in the phase `βw^d`.
fn phase_breaks(beta: f64, d: u32, w1: f64) -> Vec<f64> {
    let n = (beta.abs() / 2.0).ceil() as usize + 1;
    let inv = 1.0 / f64::from(d);
    let lo = w1.powi(d as i32);
    let mut b: Vec<f64> = (0..=n)
        .map(|i| (lo + (1.0 - lo) * i as f64 / n as f64).powf(inv))
        .collect();
    b[0] = w1;
    b[n] = 1.0;
    b
}

/// `V_k(β)` by nested adaptive quadrature over `[0,1]^k`; an independent check for `k <= 3`.
pub fn v_k_direct(beta: f64, k: u32, d: u32) -> Quad {
    fn level(beta: f64, c: f64, m: u32, d: u32) -> Quad {
        let tol = Tolerance::new(1e-11, 0.0, 5_000);
        let breaks = initial_breaks(beta * c * f64::from(d));
        let df = d as i32;
        if m == 1 {
            return adaptive(&mut |t: f64| e(beta * c * t.powi(df)), &breaks, tol);
        }
        let mut inner_err = 0.0f64;
        let mut q = adaptive(
            &mut |t: f64| {
                let r = level(beta, c * t.powi(df), m - 1, d);
                inner_err = inner_err.max(r.error);
                r.value
            },
            &breaks,
            tol,
        );
        q.error += inner_err;
        q
    }
    level(beta, 1.0, k, d)
}

//! The Riemann zeta function on the real half-line `x > 1`, by Euler–Maclaurin summation.

use crate::error::{arg, Result};

/// `B_{2j}` for `j = 1..=10`.
const BERNOULLI: [f64; 10] = [
    1.0 / 6.0,
    -1.0 / 30.0,
    1.0 / 42.0,
    -1.0 / 30.0,
    5.0 / 66.0,
    -691.0 / 2730.0,
    7.0 / 6.0,
    -3617.0 / 510.0,
    43867.0 / 798.0,
    -174611.0 / 330.0,
];

const TARGET: f64 = 1e-13;

/// `(ζ(x), bound)`, where `bound` is the magnitude of the first omitted correction term,
/// which dominates the Euler–Maclaurin remainder for `t ↦ t^{−x}`.
pub fn zeta_with_bound(x: f64) -> Result<(f64, f64)> {
    if !(x > 1.0) {
        return arg(format!("zeta needs x > 1, got {x}"));
    }
    let mut n = 16u64;
    loop {
        let (value, bound) = euler_maclaurin(x, n);
        if bound <= TARGET || n >= 1 << 20 {
            return Ok((value, bound));
        }
        n *= 4;
    }
}

pub fn zeta_real(x: f64) -> Result<f64> {
    zeta_with_bound(x).map(|(v, _)| v)
}

fn euler_maclaurin(x: f64, n: u64) -> (f64, f64) {
    let nf = n as f64;
    // Tail first so that the small terms are not absorbed by the leading 1.
    let mut tail = nf.powf(1.0 - x) / (x - 1.0) + 0.5 * nf.powf(-x);
    let mut rising = x; // x(x+1)⋯(x+2j−2)
    let mut fact = 2.0; // (2j)!
    let mut power = nf.powf(-x - 1.0); // n^{−x−2j+1}
    let mut omitted = 0.0;
    for (j, &b) in BERNOULLI.iter().enumerate() {
        let term = b / fact * rising * power;
        if j + 1 == BERNOULLI.len() {
            omitted = term.abs();
            break;
        }
        tail += term;
        let m = 2.0 * (j as f64 + 1.0);
        rising *= (x + m - 1.0) * (x + m);
        fact *= (m + 1.0) * (m + 2.0);
        power /= nf * nf;
    }
    let mut head = 0.0;
    for i in (2..n).rev() {
        head += (i as f64).powf(-x);
    }
    (1.0 + (head + tail), omitted)
}

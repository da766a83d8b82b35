//! Complete exponential sums `S_k(q, a) = Σ_{x ∈ (ℤ/q)^k} e(a⟨x⟩^d / q)`.

use std::f64::consts::TAU;

use num_complex::Complex64;
use rustfft::FftPlanner;

use crate::arith::pow_mod;

/// `dist[r] = #{x ∈ (ℤ/q)^k : (x_1 ⋯ x_k)^d ≡ r (mod q)}`.
pub fn power_distribution(q: u64, k: u32, d: u32) -> Vec<u128> {
    let n = q as usize;
    let mut prod = vec![1u128; n];
    for _ in 1..k {
        let mut next = vec![0u128; n];
        for (r, &c) in prod.iter().enumerate() {
            if c == 0 {
                continue;
            }
            let mut v = 0usize;
            for _ in 0..n {
                next[v] += c;
                v += r;
                if v >= n {
                    v -= n;
                }
            }
        }
        prod = next;
    }
    let mut dist = vec![0u128; n];
    for (r, &c) in prod.iter().enumerate() {
        if c != 0 {
            dist[pow_mod(r as u64, u64::from(d), q) as usize] += c;
        }
    }
    dist
}

/// Roots of unity `e(m / q)` for `m = 0..q`.
pub(crate) fn unit_roots(q: u64) -> Vec<Complex64> {
    (0..q)
        .map(|m| Complex64::from_polar(1.0, TAU * m as f64 / q as f64))
        .collect()
}

/// `S_k(q, a)` by direct summation over the value distribution.
pub fn exp_sum_s(q: u64, a: i64, k: u32, d: u32) -> Complex64 {
    assert!(q >= 1, "modulus must be positive");
    let dist = power_distribution(q, k, d);
    let roots = unit_roots(q);
    let a = crate::arith::rem_euclid(i128::from(a), q) as u128;
    let mut sum = Complex64::new(0.0, 0.0);
    for (r, &c) in dist.iter().enumerate() {
        if c != 0 {
            sum += roots[((a * r as u128) % u128::from(q)) as usize] * c as f64;
        }
    }
    sum
}

/// `q^{−k} S_k(q, a)` for every residue `a`, through one inverse FFT of the distribution.
pub fn normalized_sums(q: u64, k: u32, d: u32) -> Vec<Complex64> {
    let dist = power_distribution(q, k, d);
    let scale = (q as f64).powi(k as i32);
    let mut buf: Vec<Complex64> = dist
        .iter()
        .map(|&c| Complex64::new(c as f64 / scale, 0.0))
        .collect();
    FftPlanner::new()
        .plan_fft_inverse(buf.len())
        .process(&mut buf);
    buf
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: Complex64, b: Complex64) -> bool {
        (a - b).norm() < 1e-9
    }

    #[test]
    fn examples() {
        assert!(close(exp_sum_s(1, 7, 3, 2), Complex64::new(1.0, 0.0)));
        assert!(close(exp_sum_s(2, 1, 1, 1), Complex64::new(0.0, 0.0)));
        assert!(close(exp_sum_s(4, 1, 1, 2), Complex64::new(2.0, 2.0)));
    }

    #[test]
    fn fft_matches_direct_sums() {
        for (q, k, d) in [(12, 2, 1), (9, 1, 3), (16, 3, 2), (7, 2, 4)] {
            let all = normalized_sums(q, k, d);
            let scale = (q as f64).powi(k as i32);
            for a in 0..q {
                let direct = exp_sum_s(q, a as i64, k, d) / scale;
                assert!(close(all[a as usize], direct), "q={q} a={a}");
            }
        }
    }

    #[test]
    fn distribution_totals() {
        let dist = power_distribution(10, 3, 2);
        assert_eq!(dist.iter().sum::<u128>(), 1000);
    }

    #[test]
    fn bilinear_sum_closed_form() {
        // Σ_{x,y mod q} e(axy/q) = q·gcd(a, q)
        for q in 1..=30u64 {
            for a in 0..q {
                let g = num_integer::gcd(a, q) as f64;
                assert!(close(
                    exp_sum_s(q, a as i64, 2, 1),
                    Complex64::new(q as f64 * g, 0.0)
                ));
            }
        }
    }
}

//! Exact-norm counts `θ(m)` and the hyperbolic count `N(B) = 2^{−k} Σ_{⟨m⟩ ≤ B^{1/(s−Rd)}} θ(m)`.

use super::Counter;
use crate::error::{arg, Error, Result};
use crate::instance::ProblemInstance;

/// `Σ_{⟨u⟩ <= n} h(u)` over `k`-vectors of positive integers, enumerated in
/// lexicographic order.
pub fn hyperbolic_sum<T, F>(k: usize, n: u64, mut h: F) -> Result<T>
where
    T: Default + std::ops::AddAssign,
    F: FnMut(&[u64]) -> Result<T>,
{
    fn rec<T: std::ops::AddAssign, F: FnMut(&[u64]) -> Result<T>>(
        u: &mut Vec<u64>,
        k: usize,
        budget: u64,
        acc: &mut T,
        h: &mut F,
    ) -> Result<()> {
        if u.len() == k {
            *acc += h(u)?;
            return Ok(());
        }
        for x in 1..=budget {
            u.push(x);
            rec(u, k, budget / x, acc, h)?;
            u.pop();
        }
        Ok(())
    }
    let mut acc = T::default();
    if k == 0 {
        return Ok(acc);
    }
    rec(&mut Vec::with_capacity(k), k, n, &mut acc, &mut h)?;
    Ok(acc)
}

/// Largest integer `n` with `n^e <= b`.
pub fn max_norm_for_height(b: f64, e: u32) -> u64 {
    if !(b >= 1.0) {
        return 0;
    }
    let mut n = b.powf(1.0 / f64::from(e)).floor() as u64;
    while n > 0 && (n as f64).powi(e as i32) > b {
        n -= 1;
    }
    while ((n + 1) as f64).powi(e as i32) <= b {
        n += 1;
    }
    n
}

impl Counter<'_> {
    /// Primitive, all-nonzero solutions whose `i`-th block has sup-norm exactly `m_i`.
    pub fn theta(&mut self, m: &[u64]) -> Result<u128> {
        if m.len() != self.inst.k() as usize || m.contains(&0) {
            return arg("theta needs k positive norms");
        }
        if let Some(&c) = self.theta.get(m) {
            return Ok(c);
        }
        let k = m.len();
        let (mut plus, mut minus) = (0u128, 0u128);
        for mask in 0u32..(1 << k) {
            let lower: Vec<u64> = (0..k).map(|i| m[i] - u64::from(mask >> i & 1)).collect();
            if lower.contains(&0) {
                continue;
            }
            let c = self.primitive_mobius(&lower, true)?;
            if mask.count_ones() % 2 == 0 {
                plus += c;
            } else {
                minus += c;
            }
        }
        let c = plus
            .checked_sub(minus)
            .ok_or_else(|| Error::Consistency("negative exact-norm count".into()))?;
        self.theta.insert(m.to_vec(), c);
        Ok(c)
    }

    /// `Υ(n) = Σ_{⟨m⟩ <= n} θ(m)`.
    pub fn upsilon(&mut self, n: u64) -> Result<u128> {
        let k = self.inst.k() as usize;
        hyperbolic_sum(k, n, |m| self.theta(m))
    }

    /// Number of points of height at most `b` with all coordinates nonzero.
    pub fn hyperbolic_count(&mut self, b: f64) -> Result<u128> {
        let e = self.inst.height_exponent();
        if e <= 0 {
            return arg(format!("height exponent s − Rd = {e} must be positive"));
        }
        let n = max_norm_for_height(b, e as u32);
        let ups = self.upsilon(n)?;
        let k = self.inst.k();
        let unit = 1u128 << k;
        if ups % unit != 0 {
            return Err(Error::Consistency(format!(
                "Υ({n}) = {ups} is not divisible by 2^{k}"
            )));
        }
        Ok(ups / unit)
    }
}

pub fn theta(inst: &ProblemInstance, m: &[u64]) -> Result<u128> {
    Counter::new(inst).theta(m)
}

pub fn hyperbolic_count(inst: &ProblemInstance, b: f64) -> Result<u128> {
    Counter::new(inst).hyperbolic_count(b)
}

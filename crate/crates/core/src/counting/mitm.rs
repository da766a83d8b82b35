//! Meet-in-the-middle counting. The `R` equations are merged into one by a balanced
//! mixed-radix encoding of the partial-sum vector, each half of the columns is folded into
//! a map from encoded partial sums to multiplicities, and the halves are joined on opposite
//! keys.

use std::collections::HashMap;

use super::values::{value_map, CoordRange, ValueMap};
use super::CountConfig;
use crate::error::{Error, Result};
use crate::instance::ProblemInstance;

enum Partial {
    Dense { lo: i128, cells: Vec<u128> },
    Sparse(HashMap<i128, u128>),
}

impl Partial {
    fn nnz(&self) -> usize {
        match self {
            Partial::Dense { cells, .. } => cells.iter().filter(|&&c| c != 0).count(),
            Partial::Sparse(m) => m.len(),
        }
    }

    fn get(&self, key: i128) -> u128 {
        match self {
            Partial::Dense { lo, cells } => {
                let i = key - lo;
                if i < 0 || i >= cells.len() as i128 {
                    0
                } else {
                    cells[i as usize]
                }
            }
            Partial::Sparse(m) => m.get(&key).copied().unwrap_or(0),
        }
    }

    fn for_each_nonzero(&self, mut f: impl FnMut(i128, u128)) {
        match self {
            Partial::Dense { lo, cells } => {
                for (i, &c) in cells.iter().enumerate() {
                    if c != 0 {
                        f(lo + i as i128, c);
                    }
                }
            }
            Partial::Sparse(m) => {
                for (&k, &c) in m {
                    f(k, c);
                }
            }
        }
    }
}

fn overflow(what: &str) -> Error {
    Error::Overflow(format!("{what} exceeds 128-bit range"))
}

/// Adds column `c · t` to every entry of `acc`. `span` is the current bound on `|key|`.
fn fold(
    acc: Partial,
    span: i128,
    c: i128,
    vm: &ValueMap,
    config: &CountConfig,
) -> Result<(Partial, i128)> {
    let new_span = c
        .abs()
        .checked_mul(vm.max_abs())
        .and_then(|x| x.checked_add(span))
        .ok_or_else(|| overflow("partial-sum range"))?;
    let width = new_span
        .checked_mul(2)
        .and_then(|x| x.checked_add(1))
        .ok_or_else(|| overflow("partial-sum range"))?;
    if width <= config.dense_limit as i128 {
        let lo = -new_span;
        let mut cells = vec![0u128; width as usize];
        let dense_src = match &acc {
            Partial::Dense {
                lo: lo0,
                cells: src,
            } if acc.nnz() * 3 >= src.len() => Some((*lo0, src)),
            _ => None,
        };
        if let Some((lo0, src)) = dense_src {
            for &(t, m) in vm.entries() {
                let off = (lo0 + c * t - lo) as usize;
                for (dst, &a) in cells[off..off + src.len()].iter_mut().zip(src) {
                    *dst += a * m;
                }
            }
        } else {
            let mut support = Vec::new();
            acc.for_each_nonzero(|k, a| support.push((k, a)));
            for &(t, m) in vm.entries() {
                let shift = c * t - lo;
                for &(k, a) in &support {
                    cells[(k + shift) as usize] += a * m;
                }
            }
        }
        return Ok((Partial::Dense { lo, cells }, new_span));
    }
    let mut next: HashMap<i128, u128> = HashMap::new();
    let mut support = Vec::new();
    acc.for_each_nonzero(|k, a| support.push((k, a)));
    drop(acc);
    for &(k, a) in &support {
        for &(t, m) in vm.entries() {
            *next.entry(k + c * t).or_insert(0) += a * m;
        }
        if next.len() > config.max_entries {
            return Err(Error::Budget(format!(
                "partial-sum map exceeds {} entries (key range {width}); reduce the box",
                config.max_entries
            )));
        }
    }
    Ok((Partial::Sparse(next), new_span))
}

fn fold_half(coeffs: &[i128], vm: &ValueMap, config: &CountConfig) -> Result<Partial> {
    let mut acc = Partial::Sparse(HashMap::from([(0, 1)]));
    let mut span = 0;
    for &c in coeffs {
        (acc, span) = fold(acc, span, c, vm, config)?;
    }
    Ok(acc)
}

/// Single-equation coefficients `c_j = Σ_i λ_{i,j}·stride_i` such that `Σ_j c_j t_j = 0`
/// holds exactly when every equation holds, for `|t_j| <= max_abs`.
pub(crate) fn encode_columns(lambda: &[Vec<i64>], max_abs: i128) -> Result<Vec<i128>> {
    let s = lambda.first().map_or(0, |r| r.len());
    let mut stride: i128 = 1;
    let mut coeffs = vec![0i128; s];
    for row in lambda {
        for (c, &l) in coeffs.iter_mut().zip(row) {
            *c = i128::from(l)
                .checked_mul(stride)
                .and_then(|x| x.checked_add(*c))
                .ok_or_else(|| overflow("encoded coefficient"))?;
        }
        let bound = row
            .iter()
            .try_fold(0i128, |acc, &l| {
                i128::from(l).abs().checked_mul(max_abs)?.checked_add(acc)
            })
            .ok_or_else(|| overflow("row bound"))?;
        stride = bound
            .checked_mul(2)
            .and_then(|x| x.checked_add(1))
            .and_then(|x| x.checked_mul(stride))
            .ok_or_else(|| overflow("mixed-radix stride"))?;
    }
    Ok(coeffs)
}

/// Splits the columns so the two folded maps have comparable estimated sizes.
fn split(coeffs: &[i128], vm: &ValueMap) -> (Vec<i128>, Vec<i128>) {
    let log_size = (vm.len().max(1) as f64).ln();
    let max_abs = vm.max_abs().max(1) as f64;
    let mut order: Vec<i128> = coeffs.to_vec();
    order.sort_by_key(|c| std::cmp::Reverse(c.abs()));
    let mut halves: [(Vec<i128>, f64, f64); 2] = [(Vec::new(), 0.0, 0.0), (Vec::new(), 0.0, 0.0)];
    let estimate = |h: &(Vec<i128>, f64, f64)| h.1.min((2.0 * h.2 + 1.0).ln());
    for c in order {
        let target = if estimate(&halves[0]) <= estimate(&halves[1]) {
            0
        } else {
            1
        };
        let h = &mut halves[target];
        h.0.push(c);
        h.1 += log_size;
        h.2 += c.abs() as f64 * max_abs;
    }
    let [a, b] = halves;
    (a.0, b.0)
}

pub(crate) fn mitm_count(
    inst: &ProblemInstance,
    bounds: &[u64],
    range: CoordRange,
    config: &CountConfig,
) -> Result<u128> {
    let vm = value_map(bounds, inst.d(), range)?;
    let total = vm.total();
    total
        .checked_pow(inst.s() as u32)
        .ok_or_else(|| overflow("solution count bound"))?;
    if vm.is_empty() {
        return Ok(0);
    }
    let max_abs = vm.max_abs();
    if max_abs == 0 {
        return Ok(total.pow(inst.s() as u32));
    }
    let coeffs = encode_columns(inst.lambda(), max_abs)?;
    let zero_cols = coeffs.iter().filter(|&&c| c == 0).count() as u32;
    let active: Vec<i128> = coeffs.into_iter().filter(|&c| c != 0).collect();
    let factor = total.pow(zero_cols);
    if active.is_empty() {
        return Ok(factor);
    }
    let (left, right) = split(&active, &vm);
    let a = fold_half(&left, &vm, config)?;
    let b = fold_half(&right, &vm, config)?;
    let (small, large) = if a.nnz() <= b.nnz() { (a, b) } else { (b, a) };
    let mut sum = 0u128;
    small.for_each_nonzero(|k, c| sum += c * large.get(-k));
    Ok(sum * factor)
}

//! Direct enumeration of the first `s − 1` columns, with the last column recovered from an
//! index of monomial values. Row gcds are tracked along the way for primitive counts.

use std::collections::HashMap;

use num_integer::Integer;

use super::values::{checked_pow, CoordRange};
use super::CountConfig;
use crate::error::{Error, Result};
use crate::instance::ProblemInstance;

struct Tuples {
    k: usize,
    coords: Vec<u64>,
    values: Vec<i128>,
}

impl Tuples {
    fn build(bounds: &[u64], d: u32, range: CoordRange) -> Result<Self> {
        let k = bounds.len();
        let axes: Vec<Vec<i64>> = bounds.iter().map(|&b| range.values(b)).collect();
        let mut coords = Vec::new();
        let mut values = Vec::new();
        if axes.iter().any(|a| a.is_empty()) {
            return Ok(Tuples { k, coords, values });
        }
        let mut idx = vec![0usize; k];
        loop {
            let mut p: i128 = 1;
            for (i, a) in axes.iter().enumerate() {
                let x = a[idx[i]];
                coords.push(x.unsigned_abs());
                p = p.checked_mul(i128::from(x)).ok_or_else(|| {
                    Error::Overflow("monomial product exceeds 128-bit range".into())
                })?;
            }
            values.push(checked_pow(p, d)?);
            let mut i = 0;
            loop {
                if i == k {
                    return Ok(Tuples { k, coords, values });
                }
                idx[i] += 1;
                if idx[i] < axes[i].len() {
                    break;
                }
                idx[i] = 0;
                i += 1;
            }
        }
    }

    fn len(&self) -> usize {
        self.values.len()
    }

    fn coords(&self, t: usize) -> &[u64] {
        &self.coords[t * self.k..(t + 1) * self.k]
    }
}

struct Walker<'a> {
    lambda: &'a [Vec<i64>],
    s: usize,
    tuples: Tuples,
    index: HashMap<i128, Vec<u32>>,
    primitive: bool,
}

fn overflow() -> Error {
    Error::Overflow("partial sum exceeds 128-bit range".into())
}

impl Walker<'_> {
    fn walk(&self, j: usize, partial: &[i128], gcds: &[u64]) -> Result<u128> {
        if j + 1 == self.s {
            return self.close(partial, gcds);
        }
        let mut p = vec![0i128; partial.len()];
        let mut g = vec![0u64; gcds.len()];
        let mut total = 0u128;
        for t in 0..self.tuples.len() {
            let v = self.tuples.values[t];
            for (i, row) in self.lambda.iter().enumerate() {
                p[i] = i128::from(row[j])
                    .checked_mul(v)
                    .and_then(|x| x.checked_add(partial[i]))
                    .ok_or_else(overflow)?;
            }
            if self.primitive {
                for (i, &x) in self.tuples.coords(t).iter().enumerate() {
                    g[i] = gcds[i].gcd(&x);
                }
            }
            total += self.walk(j + 1, &p, &g)?;
        }
        Ok(total)
    }

    fn accept(&self, t: usize, gcds: &[u64]) -> bool {
        !self.primitive
            || self
                .tuples
                .coords(t)
                .iter()
                .zip(gcds)
                .all(|(&x, &g)| g.gcd(&x) == 1)
    }

    fn close(&self, partial: &[i128], gcds: &[u64]) -> Result<u128> {
        let last = self.s - 1;
        let pivot = self.lambda.iter().position(|row| row[last] != 0);
        let Some(i0) = pivot else {
            if partial.iter().any(|&x| x != 0) {
                return Ok(0);
            }
            let n = (0..self.tuples.len())
                .filter(|&t| self.accept(t, gcds))
                .count();
            return Ok(n as u128);
        };
        let c = i128::from(self.lambda[i0][last]);
        if partial[i0] % c != 0 {
            return Ok(0);
        }
        let t = -partial[i0] / c;
        for (i, row) in self.lambda.iter().enumerate() {
            let v = i128::from(row[last])
                .checked_mul(t)
                .and_then(|x| x.checked_add(partial[i]))
                .ok_or_else(overflow)?;
            if v != 0 {
                return Ok(0);
            }
        }
        let Some(cands) = self.index.get(&t) else {
            return Ok(0);
        };
        if !self.primitive {
            return Ok(cands.len() as u128);
        }
        Ok(cands
            .iter()
            .filter(|&&c| self.accept(c as usize, gcds))
            .count() as u128)
    }
}

/// Exact count by enumeration. With `primitive`, only solutions whose every row
/// `(x_{i,1}, …, x_{i,s})` has gcd 1 are counted.
pub(crate) fn naive_count(
    inst: &ProblemInstance,
    bounds: &[u64],
    range: CoordRange,
    primitive: bool,
    config: &CountConfig,
) -> Result<u128> {
    let per_column: u128 = bounds.iter().map(|&b| range.size(b)).product();
    let cost = per_column
        .checked_pow(inst.s() as u32 - 1)
        .unwrap_or(u128::MAX);
    if cost > config.naive_budget {
        return Err(Error::Budget(format!(
            "naive enumeration would visit {cost} column assignments (budget {}); reduce the box",
            config.naive_budget
        )));
    }
    let tuples = Tuples::build(bounds, inst.d(), range)?;
    if tuples.len() > u32::MAX as usize {
        return Err(Error::Budget("too many tuples per column".into()));
    }
    let mut index: HashMap<i128, Vec<u32>> = HashMap::new();
    for (t, &v) in tuples.values.iter().enumerate() {
        index.entry(v).or_default().push(t as u32);
    }
    let w = Walker {
        lambda: inst.lambda(),
        s: inst.s(),
        tuples,
        index,
        primitive,
    };
    w.walk(0, &vec![0; inst.r()], &vec![0; bounds.len()])
}

//! Multiplicity maps for the monomial values `t = (x_1 ⋯ x_k)^d`.

use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Sign convention for the two public value-map modes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SignMode {
    Positive,
    Signed,
}

/// Range of a single coordinate bounded by `X`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CoordRange {
    /// `1 ..= X`
    Positive,
    /// `-X ..= X` without zero
    NonzeroSigned,
    /// `-X ..= X`
    Signed,
}

impl CoordRange {
    pub fn values(self, bound: u64) -> Vec<i64> {
        let b = bound as i64;
        match self {
            CoordRange::Positive => (1..=b).collect(),
            CoordRange::NonzeroSigned => (-b..=b).filter(|&x| x != 0).collect(),
            CoordRange::Signed => (-b..=b).collect(),
        }
    }

    pub fn size(self, bound: u64) -> u128 {
        let b = u128::from(bound);
        match self {
            CoordRange::Positive => b,
            CoordRange::NonzeroSigned => 2 * b,
            CoordRange::Signed => 2 * b + 1,
        }
    }
}

impl From<SignMode> for CoordRange {
    fn from(m: SignMode) -> Self {
        match m {
            SignMode::Positive => CoordRange::Positive,
            SignMode::Signed => CoordRange::NonzeroSigned,
        }
    }
}

/// Sorted map from monomial value to the number of `k`-tuples attaining it.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ValueMap {
    entries: Vec<(i128, u128)>,
}

impl ValueMap {
    pub fn entries(&self) -> &[(i128, u128)] {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn get(&self, t: i128) -> u128 {
        self.entries
            .binary_search_by_key(&t, |e| e.0)
            .map_or(0, |i| self.entries[i].1)
    }

    /// Number of tuples, i.e. the sum of all multiplicities.
    pub fn total(&self) -> u128 {
        self.entries.iter().map(|e| e.1).sum()
    }

    pub fn max_abs(&self) -> i128 {
        self.entries.iter().map(|e| e.0.abs()).max().unwrap_or(0)
    }
}

pub(crate) fn checked_pow(x: i128, d: u32) -> Result<i128> {
    x.checked_pow(d)
        .ok_or_else(|| Error::Overflow(format!("{x}^{d} exceeds 128-bit range")))
}

/// Value map over the box `bounds` with each coordinate drawn from `range`.
pub fn value_map(bounds: &[u64], d: u32, range: CoordRange) -> Result<ValueMap> {
    let mut corner: i128 = 1;
    for &b in bounds {
        corner = corner
            .checked_mul(i128::from(b))
            .ok_or_else(|| Error::Overflow("box corner exceeds 128-bit range".into()))?;
    }
    checked_pow(corner, d)?;
    let mut products: HashMap<i128, u128> = HashMap::from([(1, 1)]);
    for &b in bounds {
        let xs = range.values(b);
        let mut next: HashMap<i128, u128> = HashMap::with_capacity(products.len() * 2);
        for (&p, &c) in &products {
            for &x in &xs {
                let q = p.checked_mul(i128::from(x)).ok_or_else(|| {
                    Error::Overflow("monomial product exceeds 128-bit range".into())
                })?;
                *next.entry(q).or_insert(0) += c;
            }
        }
        products = next;
    }
    let mut powered: HashMap<i128, u128> = HashMap::with_capacity(products.len());
    for (p, c) in products {
        *powered.entry(checked_pow(p, d)?).or_insert(0) += c;
    }
    let mut entries: Vec<(i128, u128)> = powered.into_iter().collect();
    entries.sort_unstable();
    Ok(ValueMap { entries })
}

/// Value map for `x_i ∈ [1, X_i]` (positive) or nonzero `x_i ∈ [−X_i, X_i]` (signed).
pub fn term_value_map(bounds: &[u64], d: u32, sign_mode: SignMode) -> Result<ValueMap> {
    value_map(bounds, d, sign_mode.into())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn small_maps() {
        let m = term_value_map(&[2], 2, SignMode::Positive).unwrap();
        assert_eq!(m.entries(), &[(1, 1), (4, 1)]);
        let m = term_value_map(&[2, 2], 1, SignMode::Positive).unwrap();
        assert_eq!(m.entries(), &[(1, 1), (2, 2), (4, 1)]);
    }

    #[test]
    fn signed_square_multiplicities() {
        let m = term_value_map(&[3, 3], 2, SignMode::Signed).unwrap();
        assert!(m.entries().iter().all(|&(_, c)| c % 4 == 0));
        assert_eq!(m.total(), 36);
    }

    #[test]
    fn zero_allowed_range() {
        let m = value_map(&[2, 1], 1, CoordRange::Signed).unwrap();
        assert_eq!(m.total(), 15);
        assert_eq!(m.get(0), 7);
    }

    #[test]
    fn overflow_is_reported() {
        assert!(matches!(
            term_value_map(&[1 << 20, 1 << 20], 4, SignMode::Positive),
            Err(Error::Overflow(_))
        ));
    }
}

//! Exact solution counts: box counts `M(X)`, `M⁺(X)`, primitive counts `M*(X)`, exact-norm
//! counts `θ(m)` and the hyperbolic count `N(B)`.
//!
//! Two engines are available. [`Method::Naive`] enumerates all but one column directly;
//! [`Method::MeetInMiddle`] folds the columns into partial-sum maps. Primitive counts use a
//! gcd filter under the naive engine and Möbius inversion over box counts otherwise.

mod hyperbolic;
mod mitm;
mod naive;
mod values;

use std::collections::HashMap;
use std::time::{Duration, Instant};

use serde::{Deserialize, Serialize};

use crate::arith::mobius_table;
use crate::error::{arg, Error, Result};
use crate::instance::ProblemInstance;
use crate::report::ser_u128;

pub use hyperbolic::{hyperbolic_count, hyperbolic_sum, max_norm_for_height, theta};
pub use values::{term_value_map, value_map, CoordRange, SignMode, ValueMap};

/// Which solutions a box count includes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CountMode {
    /// `1 <= |x_{i,j}| <= X_i`
    All,
    /// `1 <= x_{i,j} <= X_i`
    Positive,
    /// `|x_{i,j}| <= X_i` with every row `(x_{i,1}, …, x_{i,s})` primitive.
    Primitive,
}

/// Box bounds and counting mode.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BoxSpec {
    pub bounds: Vec<u64>,
    pub mode: CountMode,
    /// Exclude zero coordinates in primitive mode (the other modes never contain zeros).
    #[serde(default)]
    pub nonzero: bool,
}

impl BoxSpec {
    pub fn new(bounds: Vec<u64>, mode: CountMode) -> Self {
        BoxSpec {
            bounds,
            mode,
            nonzero: false,
        }
    }

    pub fn nonzero(mut self, nonzero: bool) -> Self {
        self.nonzero = nonzero;
        self
    }

    fn validate(&self, inst: &ProblemInstance) -> Result<()> {
        if self.bounds.len() != inst.k() as usize {
            return arg(format!(
                "box has {} bounds but the instance has k = {}",
                self.bounds.len(),
                inst.k()
            ));
        }
        if self.bounds.contains(&0) {
            return arg("box bounds must be positive");
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Method {
    Naive,
    MeetInMiddle,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CountReport {
    #[serde(rename = "box")]
    pub spec: BoxSpec,
    #[serde(serialize_with = "ser_u128")]
    pub count: u128,
    pub method: Method,
    #[serde(skip)]
    pub elapsed: Duration,
}

/// Resource limits of the counting engines.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CountConfig {
    /// Largest key range stored as a dense array.
    pub dense_limit: usize,
    /// Largest number of entries in a hashed partial-sum map.
    pub max_entries: usize,
    /// Largest number of column assignments visited by the naive engine.
    pub naive_budget: u128,
}

impl Default for CountConfig {
    fn default() -> Self {
        CountConfig {
            dense_limit: 1 << 24,
            max_entries: 1 << 23,
            naive_budget: 4_000_000_000,
        }
    }
}

/// Counting engine bound to one instance, memoizing box and primitive counts.
pub struct Counter<'a> {
    inst: &'a ProblemInstance,
    config: CountConfig,
    plain: HashMap<(Vec<u64>, CoordRange), u128>,
    primitive: HashMap<(Vec<u64>, bool), u128>,
    theta: HashMap<Vec<u64>, u128>,
}

fn count_overflow() -> Error {
    Error::Overflow("solution count exceeds 128-bit range".into())
}

impl<'a> Counter<'a> {
    pub fn new(inst: &'a ProblemInstance) -> Self {
        Self::with_config(inst, CountConfig::default())
    }

    pub fn with_config(inst: &'a ProblemInstance, config: CountConfig) -> Self {
        Counter {
            inst,
            config,
            plain: HashMap::new(),
            primitive: HashMap::new(),
            theta: HashMap::new(),
        }
    }

    pub fn instance(&self) -> &ProblemInstance {
        self.inst
    }

    /// Number of solutions with every coordinate `x_{i,j}` in `range` bounded by `bounds[i]`.
    pub fn count(&mut self, bounds: &[u64], range: CoordRange, method: Method) -> Result<u128> {
        match method {
            Method::Naive => naive::naive_count(self.inst, bounds, range, false, &self.config),
            Method::MeetInMiddle => {
                let key = (bounds.to_vec(), range);
                if let Some(&c) = self.plain.get(&key) {
                    return Ok(c);
                }
                let c = mitm::mitm_count(self.inst, bounds, range, &self.config)?;
                self.plain.insert(key, c);
                Ok(c)
            }
        }
    }

    /// Solutions with no row identically zero.
    fn rows_not_zero(&mut self, bounds: &[u64], nonzero: bool) -> Result<u128> {
        if nonzero {
            return self.count(bounds, CoordRange::NonzeroSigned, Method::MeetInMiddle);
        }
        let full = self.count(bounds, CoordRange::Signed, Method::MeetInMiddle)?;
        let k = bounds.len();
        let s = self.inst.s() as u32;
        let (mut plus, mut minus) = (full, 0u128);
        for mask in 1u32..(1 << k) {
            let mut free: u128 = 1;
            for (i, &b) in bounds.iter().enumerate() {
                if mask & (1 << i) == 0 {
                    free = free
                        .checked_mul(2 * u128::from(b) + 1)
                        .ok_or_else(count_overflow)?;
                }
            }
            let term = free.checked_pow(s).ok_or_else(count_overflow)?;
            if mask.count_ones() % 2 == 0 {
                plus = plus.checked_add(term).ok_or_else(count_overflow)?;
            } else {
                minus = minus.checked_add(term).ok_or_else(count_overflow)?;
            }
        }
        plus.checked_sub(minus)
            .ok_or_else(|| Error::Consistency("negative zero-row correction".into()))
    }

    /// Primitive count by Möbius inversion: `Σ_e μ(e_1)⋯μ(e_k) M(⌊X_1/e_1⌋, …, ⌊X_k/e_k⌋)`
    /// over box counts excluding solutions with an all-zero row.
    pub fn primitive_mobius(&mut self, bounds: &[u64], nonzero: bool) -> Result<u128> {
        let key = (bounds.to_vec(), nonzero);
        if let Some(&c) = self.primitive.get(&key) {
            return Ok(c);
        }
        let top = bounds.iter().copied().max().unwrap_or(0) as usize;
        let mu = mobius_table(top);
        // Per coordinate: reduced bound q = ⌊X/e⌋ with the summed Möbius weight of its e.
        let groups: Vec<Vec<(u64, i64)>> = bounds
            .iter()
            .map(|&x| {
                let mut g: Vec<(u64, i64)> = Vec::new();
                for e in 1..=x {
                    let w = i64::from(mu[e as usize]);
                    if w == 0 {
                        continue;
                    }
                    let q = x / e;
                    match g.last_mut() {
                        Some(last) if last.0 == q => last.1 += w,
                        _ => g.push((q, w)),
                    }
                }
                g.retain(|&(_, w)| w != 0);
                g
            })
            .collect();
        let (mut plus, mut minus) = (0u128, 0u128);
        let mut idx = vec![0usize; bounds.len()];
        if groups.iter().all(|g| !g.is_empty()) {
            'outer: loop {
                let reduced: Vec<u64> = idx.iter().zip(&groups).map(|(&i, g)| g[i].0).collect();
                let weight: i64 = idx.iter().zip(&groups).map(|(&i, g)| g[i].1).product();
                let c = self.rows_not_zero(&reduced, nonzero)?;
                let term = c
                    .checked_mul(u128::from(weight.unsigned_abs()))
                    .ok_or_else(count_overflow)?;
                if weight > 0 {
                    plus = plus.checked_add(term).ok_or_else(count_overflow)?;
                } else {
                    minus = minus.checked_add(term).ok_or_else(count_overflow)?;
                }
                for i in 0..idx.len() {
                    idx[i] += 1;
                    if idx[i] < groups[i].len() {
                        continue 'outer;
                    }
                    idx[i] = 0;
                }
                break;
            }
        }
        let c = plus
            .checked_sub(minus)
            .ok_or_else(|| Error::Consistency("negative Möbius sum".into()))?;
        self.primitive.insert(key, c);
        Ok(c)
    }

    /// Primitive count by direct enumeration with gcd filtering.
    pub fn primitive_filtered(&self, bounds: &[u64], nonzero: bool) -> Result<u128> {
        let range = if nonzero {
            CoordRange::NonzeroSigned
        } else {
            CoordRange::Signed
        };
        naive::naive_count(self.inst, bounds, range, true, &self.config)
    }

    pub fn box_count(&mut self, spec: &BoxSpec, method: Method) -> Result<CountReport> {
        spec.validate(self.inst)?;
        let start = Instant::now();
        let count = match (spec.mode, method) {
            (CountMode::All, m) => self.count(&spec.bounds, CoordRange::NonzeroSigned, m)?,
            (CountMode::Positive, m) => self.count(&spec.bounds, CoordRange::Positive, m)?,
            (CountMode::Primitive, Method::Naive) => {
                self.primitive_filtered(&spec.bounds, spec.nonzero)?
            }
            (CountMode::Primitive, Method::MeetInMiddle) => {
                self.primitive_mobius(&spec.bounds, spec.nonzero)?
            }
        };
        Ok(CountReport {
            spec: spec.clone(),
            count,
            method,
            elapsed: start.elapsed(),
        })
    }
}

pub fn box_count(inst: &ProblemInstance, spec: &BoxSpec, method: Method) -> Result<CountReport> {
    Counter::new(inst).box_count(spec, method)
}

/// Both sides of the sign-assembly identity for box counts.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ParityCheck {
    pub holds: bool,
    #[serde(serialize_with = "ser_u128")]
    pub total: u128,
    #[serde(serialize_with = "ser_u128")]
    pub assembled: u128,
}

/// Checks `M = 2^{ks} M⁺` for even `d`, and `M = 2^{(k−1)s} Σ_η M⁺_{ηΛ}` over sign vectors
/// `η ∈ {±1}^s` for odd `d`.
pub fn parity_assembly_check(inst: &ProblemInstance, bounds: &[u64]) -> Result<ParityCheck> {
    BoxSpec::new(bounds.to_vec(), CountMode::All).validate(inst)?;
    let k = inst.k();
    let s = inst.s() as u32;
    let total =
        Counter::new(inst).count(bounds, CoordRange::NonzeroSigned, Method::MeetInMiddle)?;
    let (scale_exp, positive_sum) = if inst.d().is_multiple_of(2) {
        let c = Counter::new(inst).count(bounds, CoordRange::Positive, Method::MeetInMiddle)?;
        (k * s, c)
    } else {
        let mut sum = 0u128;
        for mask in 0u64..(1 << s) {
            let eta: Vec<i8> = (0..s)
                .map(|j| if mask >> j & 1 == 1 { -1 } else { 1 })
                .collect();
            let twisted = inst.sign_twist(&eta);
            let c =
                Counter::new(&twisted).count(bounds, CoordRange::Positive, Method::MeetInMiddle)?;
            sum = sum.checked_add(c).ok_or_else(count_overflow)?;
        }
        ((k - 1) * s, sum)
    };
    let assembled = 2u128
        .checked_pow(scale_exp)
        .and_then(|f| f.checked_mul(positive_sum))
        .ok_or_else(count_overflow)?;
    Ok(ParityCheck {
        holds: assembled == total,
        total,
        assembled,
    })
}

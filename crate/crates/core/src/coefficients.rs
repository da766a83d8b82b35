//! Matrix invariants of the coefficient matrix: `μ(l, M)`, Aigner block decompositions,
//! `K(Λ)` and the rank hypotheses of the box-count asymptotics.

use num_bigint::BigInt;
use num_traits::{Signed, Zero};
use serde::Serialize;

use crate::arith::combinations;
use crate::error::{arg, Error, Result};
use crate::exact::{adjugate, determinant, rank, select_columns};
use crate::instance::ProblemInstance;
use crate::report::{ser_big, ser_big_opt};

/// Maximum number of columns of `m` lying in a common subspace of dimension at most `l`.
///
/// A maximal column set is spanned by at most `l` of its own columns, so it suffices to
/// enumerate independent column subsets of size `<= l` and count the columns in each span.
pub fn mu(m: &[Vec<i64>], l: usize) -> Result<usize> {
    let rows = m.len();
    if l > rows {
        return arg(format!("mu: l = {l} exceeds the row count {rows}"));
    }
    let cols = m.first().map_or(0, |r| r.len());
    let mut best = 0;
    for size in 0..=l.min(cols) {
        for subset in combinations(cols, size) {
            let base = select_columns(m, &subset);
            let r = if size == 0 { 0 } else { rank(&base) };
            if r < size {
                continue;
            }
            let count = (0..cols)
                .filter(|&c| {
                    if subset.contains(&c) {
                        return true;
                    }
                    let mut ext = subset.clone();
                    ext.push(c);
                    rank(&select_columns(m, &ext)) == r
                })
                .count();
            best = best.max(count);
        }
    }
    Ok(best)
}

/// Outcome of [`aigner_blocks`].
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(tag = "outcome", rename_all = "snake_case")]
pub enum AignerOutcome {
    /// Disjoint column index blocks (0-based), each an invertible `r × r` matrix.
    Blocks { blocks: Vec<Vec<usize>> },
    /// A dimension `l < r` with `μ(l) > n·l`, certifying that no blocking exists.
    Witness { l: usize, mu: usize },
}

/// Columns of `block` extended by `c` keep full column rank.
fn independent(m: &[Vec<i64>], block: &[usize]) -> bool {
    rank(&select_columns(m, block)) == block.len()
}

/// Extends `block` (already independent) with columns from `pool` above `from` until it
/// has `size` members, then calls `on_block`; returns `true` as soon as `on_block` does.
fn grow_block(
    m: &[Vec<i64>],
    pool: &[usize],
    from: usize,
    block: &mut Vec<usize>,
    size: usize,
    nodes: &mut u64,
    on_block: &mut dyn FnMut(&[usize], &mut u64) -> Option<bool>,
) -> Option<bool> {
    if block.len() == size {
        return on_block(block, nodes);
    }
    for idx in from..pool.len() {
        if pool.len() - idx < size - block.len() {
            break;
        }
        *nodes = nodes.checked_sub(1)?;
        block.push(pool[idx]);
        if independent(m, block) && grow_block(m, pool, idx + 1, block, size, nodes, on_block)? {
            return Some(true);
        }
        block.pop();
    }
    Some(false)
}

/// Partitions the `n·r` columns of an `r`-row matrix into `n` invertible `r × r` blocks,
/// or returns the `μ` witness guaranteed by Aigner's criterion.
pub fn aigner_blocks(m: &[Vec<i64>]) -> Result<AignerOutcome> {
    let r = m.len();
    let cols = m.first().map_or(0, |row| row.len());
    if r == 0 || !cols.is_multiple_of(r) {
        return arg(format!(
            "aigner_blocks: {cols} columns is not a multiple of {r}"
        ));
    }
    let n = cols / r;
    let mut blocks = Vec::new();
    let unused: Vec<usize> = (0..cols).collect();
    let mut nodes = u64::MAX;
    if partition(m, r, &unused, &mut blocks, &mut nodes) == Some(true) {
        return Ok(AignerOutcome::Blocks { blocks });
    }
    for l in 0..r {
        let value = mu(m, l)?;
        if value > n * l {
            return Ok(AignerOutcome::Witness { l, mu: value });
        }
    }
    Err(Error::Consistency(
        "no block partition found although every μ(l) <= n·l".into(),
    ))
}

/// Exhaustive partition of all of `unused` into invertible blocks of size `r`.
fn partition(
    m: &[Vec<i64>],
    r: usize,
    unused: &[usize],
    blocks: &mut Vec<Vec<usize>>,
    nodes: &mut u64,
) -> Option<bool> {
    if unused.is_empty() {
        return Some(true);
    }
    let first = unused[0];
    let rest: Vec<usize> = unused[1..].to_vec();
    let mut block = vec![first];
    if !independent(m, &block) {
        return Some(false);
    }
    let mut on_block = |b: &[usize], nodes: &mut u64| -> Option<bool> {
        let remaining: Vec<usize> = unused.iter().copied().filter(|c| !b.contains(c)).collect();
        blocks.push(b.to_vec());
        if partition(m, r, &remaining, blocks, nodes)? {
            return Some(true);
        }
        blocks.pop();
        Some(false)
    };
    grow_block(m, &rest, 0, &mut block, r, nodes, &mut on_block)
}

/// The quantities entering `K(Λ) = max(Δ, R·m1, R·m2)`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct KInvariants {
    /// Largest `|det|` over invertible `R × R` column submatrices.
    #[serde(serialize_with = "ser_big")]
    pub delta: BigInt,
    /// Largest absolute coefficient.
    #[serde(serialize_with = "ser_big")]
    pub m1: BigInt,
    /// Largest absolute adjugate entry over invertible submatrices.
    #[serde(serialize_with = "ser_big")]
    pub m2: BigInt,
    #[serde(serialize_with = "ser_big")]
    pub k: BigInt,
    /// Every nonzero `|det|` encountered (sorted, deduplicated).
    #[serde(skip)]
    pub determinants: Vec<BigInt>,
}

impl KInvariants {
    pub fn k_f64(&self) -> f64 {
        crate::exact::big_to_f64(&self.k)
    }
}

/// Computes `K(Λ)` by enumerating all `C(s, R)` column subsets.
pub fn compute_k(m: &[Vec<i64>]) -> Result<KInvariants> {
    let r = m.len();
    let cols = m.first().map_or(0, |row| row.len());
    let mut delta = BigInt::zero();
    let mut m2 = BigInt::zero();
    let mut dets = Vec::new();
    for subset in combinations(cols, r) {
        let sub = select_columns(m, &subset);
        let det = determinant(&sub).abs();
        if det.is_zero() {
            continue;
        }
        for x in adjugate(&sub).iter().flatten() {
            let x = x.abs();
            if x > m2 {
                m2 = x;
            }
        }
        if det > delta {
            delta = det.clone();
        }
        dets.push(det);
    }
    if delta.is_zero() {
        return Err(Error::Structural(
            "rank-deficient system: no invertible R x R submatrix".into(),
        ));
    }
    dets.sort();
    dets.dedup();
    let m1 = BigInt::from(
        m.iter()
            .flatten()
            .map(|x| x.unsigned_abs())
            .max()
            .unwrap_or(0),
    );
    let rb = BigInt::from(r);
    let k = delta.clone().max(&rb * &m1).max(&rb * &m2);
    Ok(KInvariants {
        delta,
        m1,
        m2,
        k,
        determinants: dets,
    })
}

/// Result of the search for `Λ*`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum SubmatrixSearch {
    Found,
    Absent,
    /// Node budget exhausted before the search completed.
    Undetermined,
}

#[derive(Debug, Clone, Serialize)]
pub struct HypothesisReport {
    pub s_large_enough: bool,
    pub submatrix_found: bool,
    pub search: SubmatrixSearch,
    /// Column order placing the `n0 + 1` blocks first, then the remaining columns.
    pub column_permutation: Option<Vec<usize>>,
    pub block_partition: Option<Vec<Vec<usize>>>,
    #[serde(serialize_with = "ser_big_opt")]
    pub k_value: Option<BigInt>,
}

impl HypothesisReport {
    pub fn satisfied(&self) -> bool {
        self.s_large_enough && self.submatrix_found
    }
}

/// Default node budget of the block search.
pub const DEFAULT_NODE_BUDGET: u64 = 2_000_000;

/// Searches `n0 + 1` disjoint invertible `R`-column blocks among the columns of `Λ`.
fn find_blocks(
    m: &[Vec<i64>],
    r: usize,
    want: usize,
    budget: u64,
) -> (SubmatrixSearch, Option<Vec<Vec<usize>>>) {
    let cols = m.first().map_or(0, |row| row.len());
    // Zero columns can never belong to an invertible block.
    let usable: Vec<usize> = (0..cols)
        .filter(|&j| m.iter().any(|row| row[j] != 0))
        .collect();
    let mut blocks = Vec::new();
    let mut nodes = budget;
    match select_blocks(m, r, want, &usable, &mut blocks, &mut nodes) {
        Some(true) => (SubmatrixSearch::Found, Some(blocks)),
        Some(false) => (SubmatrixSearch::Absent, None),
        None => (SubmatrixSearch::Undetermined, None),
    }
}

/// Chooses `want` more blocks from `avail`; each new block's smallest column exceeds the
/// previous block's smallest column so every selection is visited once.
fn select_blocks(
    m: &[Vec<i64>],
    r: usize,
    want: usize,
    avail: &[usize],
    blocks: &mut Vec<Vec<usize>>,
    nodes: &mut u64,
) -> Option<bool> {
    if want == 0 {
        return Some(true);
    }
    if avail.len() < want * r {
        return Some(false);
    }
    for (pos, &lead) in avail.iter().enumerate() {
        if avail.len() - pos < want * r {
            break;
        }
        *nodes = nodes.checked_sub(1)?;
        let pool: Vec<usize> = avail[pos + 1..].to_vec();
        let mut block = vec![lead];
        let mut on_block = |b: &[usize], nodes: &mut u64| -> Option<bool> {
            let rest: Vec<usize> = avail[pos + 1..]
                .iter()
                .copied()
                .filter(|c| !b.contains(c))
                .collect();
            blocks.push(b.to_vec());
            if select_blocks(m, r, want - 1, &rest, blocks, nodes)? {
                return Some(true);
            }
            blocks.pop();
            Some(false)
        };
        if grow_block(m, &pool, 0, &mut block, r, nodes, &mut on_block)? {
            return Some(true);
        }
    }
    Some(false)
}

/// Checks the rank hypotheses with the default node budget.
pub fn check_hypotheses(inst: &ProblemInstance) -> HypothesisReport {
    check_hypotheses_with_budget(inst, DEFAULT_NODE_BUDGET)
}

pub fn check_hypotheses_with_budget(inst: &ProblemInstance, budget: u64) -> HypothesisReport {
    let r = inst.r();
    let s = inst.s();
    let want = inst.n0() as usize + 1;
    let s_large_enough = s >= r * want;
    let (search, blocks) = if s_large_enough {
        find_blocks(inst.lambda(), r, want, budget)
    } else {
        (SubmatrixSearch::Absent, None)
    };
    let column_permutation = blocks.as_ref().map(|b| {
        let mut perm: Vec<usize> = b.iter().flatten().copied().collect();
        let rest: Vec<usize> = (0..s).filter(|j| !perm.contains(j)).collect();
        perm.extend(rest);
        perm
    });
    HypothesisReport {
        s_large_enough,
        submatrix_found: search == SubmatrixSearch::Found,
        search,
        column_permutation,
        block_partition: blocks,
        k_value: compute_k(inst.lambda()).ok().map(|k| k.k),
    }
}

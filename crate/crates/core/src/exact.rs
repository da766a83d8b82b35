//! Exact linear algebra over the integers and rationals.
//!
//! Ranks and determinants use fraction-free (Bareiss) elimination in `i128`; any overflow
//! restarts the computation in arbitrary precision. No floating point is used here.

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

trait BareissScalar: Clone {
    fn b_zero() -> Self;
    fn b_one() -> Self;
    fn b_is_zero(&self) -> bool;
    /// `(a·d − b·c) / p`, exact by Sylvester's identity.
    fn cross_div(a: &Self, d: &Self, b: &Self, c: &Self, p: &Self) -> Option<Self>;
}

impl BareissScalar for i128 {
    fn b_zero() -> Self {
        0
    }
    fn b_one() -> Self {
        1
    }
    fn b_is_zero(&self) -> bool {
        *self == 0
    }
    fn cross_div(a: &Self, d: &Self, b: &Self, c: &Self, p: &Self) -> Option<Self> {
        let x = a.checked_mul(*d)?;
        let y = b.checked_mul(*c)?;
        let num = x.checked_sub(y)?;
        debug_assert_eq!(num % p, 0);
        Some(num / p)
    }
}

impl BareissScalar for BigInt {
    fn b_zero() -> Self {
        Zero::zero()
    }
    fn b_one() -> Self {
        One::one()
    }
    fn b_is_zero(&self) -> bool {
        Zero::is_zero(self)
    }
    fn cross_div(a: &Self, d: &Self, b: &Self, c: &Self, p: &Self) -> Option<Self> {
        Some((a * d - b * c) / p)
    }
}

struct Echelon<T> {
    rank: usize,
    /// Determinant when the matrix is square (zero when singular).
    det: Option<T>,
}

fn bareiss<T: BareissScalar>(mut m: Vec<Vec<T>>) -> Option<Echelon<T>> {
    let rows = m.len();
    let cols = if rows == 0 { 0 } else { m[0].len() };
    let mut prev = T::b_one();
    let mut pivot_row = 0usize;
    let mut negate = false;
    for col in 0..cols {
        if pivot_row == rows {
            break;
        }
        let Some(r) = (pivot_row..rows).find(|&r| !m[r][col].b_is_zero()) else {
            continue;
        };
        if r != pivot_row {
            m.swap(r, pivot_row);
            negate = !negate;
        }
        let (head, tail) = m.split_at_mut(pivot_row + 1);
        let prow = &head[pivot_row];
        for row in tail.iter_mut() {
            for j in col + 1..cols {
                row[j] = T::cross_div(&prow[col], &row[j], &row[col], &prow[j], &prev)?;
            }
            row[col] = T::b_zero();
        }
        prev = m[pivot_row][col].clone();
        pivot_row += 1;
    }
    let det = if rows == cols {
        if pivot_row == rows && rows > 0 {
            Some((m[rows - 1][cols - 1].clone(), negate))
        } else if rows == 0 {
            Some((T::b_one(), false))
        } else {
            Some((T::b_zero(), false))
        }
    } else {
        None
    };
    Some(Echelon {
        rank: pivot_row,
        det: det.map(|(v, neg)| if neg { negate_scalar(v) } else { v }),
    })
}

fn negate_scalar<T: BareissScalar>(v: T) -> T {
    // 0·0 − v·1 over 1
    T::cross_div(&T::b_zero(), &T::b_zero(), &v, &T::b_one(), &T::b_one()).expect("negation")
}

fn to_i128(m: &[Vec<i64>]) -> Vec<Vec<i128>> {
    m.iter()
        .map(|r| r.iter().map(|&x| i128::from(x)).collect())
        .collect()
}

fn to_big(m: &[Vec<i64>]) -> Vec<Vec<BigInt>> {
    m.iter()
        .map(|r| r.iter().map(|&x| BigInt::from(x)).collect())
        .collect()
}

fn echelon(m: &[Vec<i64>]) -> Echelon<BigInt> {
    match bareiss(to_i128(m)) {
        Some(e) => Echelon {
            rank: e.rank,
            det: e.det.map(BigInt::from),
        },
        None => bareiss(to_big(m)).expect("arbitrary precision cannot overflow"),
    }
}

/// Rank of an integer matrix given as rows.
pub fn rank(m: &[Vec<i64>]) -> usize {
    if m.is_empty() || m[0].is_empty() {
        return 0;
    }
    echelon(m).rank
}

/// Determinant of a square integer matrix.
pub fn determinant(m: &[Vec<i64>]) -> BigInt {
    assert!(
        m.iter().all(|r| r.len() == m.len()),
        "determinant of a non-square matrix"
    );
    echelon(m).det.expect("square")
}

/// Submatrix keeping every row and the given columns, in order.
pub fn select_columns(m: &[Vec<i64>], cols: &[usize]) -> Vec<Vec<i64>> {
    m.iter()
        .map(|row| cols.iter().map(|&j| row[j]).collect())
        .collect()
}

/// Column `j` of `m` as a vector.
pub fn column(m: &[Vec<i64>], j: usize) -> Vec<i64> {
    m.iter().map(|row| row[j]).collect()
}

/// Matrix whose columns are the given vectors.
pub fn from_columns(cols: &[Vec<i64>], rows: usize) -> Vec<Vec<i64>> {
    (0..rows)
        .map(|i| cols.iter().map(|c| c[i]).collect())
        .collect()
}

/// Adjugate (transposed cofactor matrix) of a square integer matrix.
pub fn adjugate(m: &[Vec<i64>]) -> Vec<Vec<BigInt>> {
    let n = m.len();
    if n == 1 {
        return vec![vec![BigInt::one()]];
    }
    let mut adj = vec![vec![BigInt::zero(); n]; n];
    for i in 0..n {
        for j in 0..n {
            let minor: Vec<Vec<i64>> = m
                .iter()
                .enumerate()
                .filter(|&(r, _)| r != i)
                .map(|(_, row)| {
                    row.iter()
                        .enumerate()
                        .filter(|&(c, _)| c != j)
                        .map(|(_, &x)| x)
                        .collect()
                })
                .collect();
            let cof = determinant(&minor);
            // adj[j][i] = (-1)^{i+j} M_{ij}
            adj[j][i] = if (i + j) % 2 == 0 { cof } else { -cof };
        }
    }
    adj
}

fn rational_matrix(m: &[Vec<i64>]) -> Vec<Vec<BigRational>> {
    m.iter()
        .map(|r| {
            r.iter()
                .map(|&x| BigRational::from_integer(BigInt::from(x)))
                .collect()
        })
        .collect()
}

/// Reduced row echelon form over ℚ; returns the matrix and its pivot columns.
pub fn rref(m: &[Vec<i64>]) -> (Vec<Vec<BigRational>>, Vec<usize>) {
    let mut a = rational_matrix(m);
    let rows = a.len();
    let cols = if rows == 0 { 0 } else { a[0].len() };
    let mut pivots = Vec::new();
    let mut r = 0;
    for c in 0..cols {
        if r == rows {
            break;
        }
        let Some(p) = (r..rows).find(|&i| !a[i][c].is_zero()) else {
            continue;
        };
        a.swap(p, r);
        let inv = a[r][c].recip();
        for x in a[r].iter_mut() {
            *x = &*x * &inv;
        }
        for i in 0..rows {
            if i != r && !a[i][c].is_zero() {
                let f = a[i][c].clone();
                for j in 0..cols {
                    let delta = &f * &a[r][j];
                    a[i][j] = &a[i][j] - delta;
                }
            }
        }
        pivots.push(c);
        r += 1;
    }
    (a, pivots)
}

/// Integer basis of the right null space `{u : m u = 0}`.
pub fn null_space_basis(m: &[Vec<i64>]) -> Vec<Vec<BigInt>> {
    let cols = m.first().map_or(0, |r| r.len());
    let (a, pivots) = rref(m);
    let free: Vec<usize> = (0..cols).filter(|c| !pivots.contains(c)).collect();
    free.iter()
        .map(|&f| {
            let mut v = vec![BigRational::zero(); cols];
            v[f] = BigRational::one();
            for (row, &p) in pivots.iter().enumerate() {
                v[p] = -a[row][f].clone();
            }
            integerize(&v)
        })
        .collect()
}

/// Scales a rational vector by the lcm of its denominators and divides by the content.
pub fn integerize(v: &[BigRational]) -> Vec<BigInt> {
    let l = v.iter().fold(BigInt::one(), |acc, x| acc.lcm(x.denom()));
    let ints: Vec<BigInt> = v.iter().map(|x| (x * &l).to_integer()).collect();
    let g = ints.iter().fold(BigInt::zero(), |acc, x| acc.gcd(x));
    if g.is_zero() || g.is_one() {
        ints
    } else {
        ints.into_iter().map(|x| x / &g).collect()
    }
}

/// Exact inverse of a square matrix, or `None` when singular.
pub fn inverse(m: &[Vec<i64>]) -> Option<Vec<Vec<BigRational>>> {
    let det = determinant(m);
    if det.is_zero() {
        return None;
    }
    let adj = adjugate(m);
    Some(
        adj.into_iter()
            .map(|row| {
                row.into_iter()
                    .map(|x| BigRational::new(x, det.clone()))
                    .collect()
            })
            .collect(),
    )
}

/// `m · u` over ℤ for an integer vector.
pub fn apply(m: &[Vec<i64>], u: &[BigInt]) -> Vec<BigInt> {
    m.iter()
        .map(|row| row.iter().zip(u).map(|(&a, x)| BigInt::from(a) * x).sum())
        .collect()
}

/// Finds `u` with `m u = 0` and every `u_j >= 1`, or proves none exists.
///
/// Phase-one simplex over ℚ with Bland's rule on `m u' = -m·1`, `u' >= 0`.
pub fn positive_null_vector(m: &[Vec<i64>]) -> Option<Vec<BigRational>> {
    let rows = m.len();
    let n = m.first().map_or(0, |r| r.len());
    let one = BigRational::one();
    let mut tab: Vec<Vec<BigRational>> = Vec::with_capacity(rows);
    for (i, row) in m.iter().enumerate() {
        let b: i64 = -row.iter().sum::<i64>();
        let flip = b < 0;
        let mut t = vec![BigRational::zero(); n + rows + 1];
        for (j, &a) in row.iter().enumerate() {
            let a = BigRational::from_integer(BigInt::from(if flip { -a } else { a }));
            t[j] = a;
        }
        t[n + i] = one.clone();
        t[n + rows] = BigRational::from_integer(BigInt::from(b.abs()));
        tab.push(t);
    }
    let width = n + rows;
    let mut basis: Vec<usize> = (n..n + rows).collect();
    // Reduced costs of the phase-one objective (sum of artificials) to be driven to zero.
    let mut obj = vec![BigRational::zero(); width + 1];
    for t in &tab {
        for j in 0..n {
            obj[j] = &obj[j] + &t[j];
        }
        obj[width] = &obj[width] + &t[width];
    }
    loop {
        let Some(enter) = (0..width).find(|&j| obj[j].is_positive()) else {
            break;
        };
        let mut leave: Option<(usize, BigRational)> = None;
        for (i, t) in tab.iter().enumerate() {
            if t[enter].is_positive() {
                let ratio = &t[width] / &t[enter];
                let better = match &leave {
                    None => true,
                    Some((li, lr)) => ratio < *lr || (ratio == *lr && basis[i] < basis[*li]),
                };
                if better {
                    leave = Some((i, ratio));
                }
            }
        }
        let (r, _) = leave.expect("phase-one objective is bounded below");
        let inv = tab[r][enter].recip();
        for x in tab[r].iter_mut() {
            *x = &*x * &inv;
        }
        let prow = tab[r].clone();
        for (i, t) in tab.iter_mut().enumerate() {
            if i != r && !t[enter].is_zero() {
                let f = t[enter].clone();
                for j in 0..=width {
                    t[j] = &t[j] - &f * &prow[j];
                }
            }
        }
        let f = obj[enter].clone();
        for j in 0..=width {
            obj[j] = &obj[j] - &f * &prow[j];
        }
        basis[r] = enter;
    }
    if !obj[width].is_zero() {
        return None;
    }
    let mut u = vec![one.clone(); n];
    for (i, &b) in basis.iter().enumerate() {
        if b < n {
            u[b] = &u[b] + &tab[i][width];
        }
    }
    Some(u)
}

pub fn big_to_f64(x: &BigInt) -> f64 {
    x.to_f64().unwrap_or(f64::INFINITY)
}

pub fn rational_to_f64(x: &BigRational) -> f64 {
    match (x.numer().to_f64(), x.denom().to_f64()) {
        (Some(n), Some(d)) if n.is_finite() && d.is_finite() => n / d,
        _ => {
            // Scale down huge numerators/denominators before dividing.
            let shift = x.numer().bits().max(x.denom().bits()).saturating_sub(1000);
            let n = (x.numer() >> shift).to_f64().unwrap_or(0.0);
            let d = (x.denom() >> shift).to_f64().unwrap_or(1.0);
            n / d
        }
    }
}

//! Independent brute-force oracles shared by the integration tests. None of
//! these call into the library's algorithms; they only share input types.

#![allow(dead_code)]

use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};

/// Rank by plain Gaussian elimination over the rationals.
pub fn rank_oracle(rows: &[Vec<i64>]) -> usize {
    if rows.is_empty() {
        return 0;
    }
    let mut m: Vec<Vec<BigRational>> = rows
        .iter()
        .map(|r| r.iter().map(|&x| BigRational::from_integer(BigInt::from(x))).collect())
        .collect();
    let cols = m[0].len();
    let mut rank = 0;
    for c in 0..cols {
        let Some(p) = (rank..m.len()).find(|&r| !m[r][c].is_zero()) else {
            continue;
        };
        m.swap(rank, p);
        for r in 0..m.len() {
            if r != rank && !m[r][c].is_zero() {
                let f = &m[r][c] / &m[rank][c];
                for j in 0..cols {
                    let sub = &f * &m[rank][j];
                    m[r][j] -= sub;
                }
            }
        }
        rank += 1;
    }
    rank
}

/// Rows restricted to the columns whose bit is set in `mask`.
pub fn columns(rows: &[Vec<i64>], mask: u32) -> Vec<Vec<i64>> {
    rows.iter()
        .map(|r| {
            r.iter()
                .enumerate()
                .filter(|(j, _)| mask >> j & 1 == 1)
                .map(|(_, &x)| x)
                .collect()
        })
        .collect()
}

pub fn rank_of_mask(rows: &[Vec<i64>], mask: u32) -> usize {
    if mask == 0 {
        0
    } else {
        rank_oracle(&columns(rows, mask))
    }
}

/// `|I| - rk A + rk A_{Ī}`.
pub fn exponent(rows: &[Vec<i64>], mask: u32) -> i64 {
    let k = rows[0].len();
    let full = (1u32 << k) - 1;
    mask.count_ones() as i64 - rank_oracle(rows) as i64 + rank_of_mask(rows, full & !mask) as i64
}

fn column_sum(rows: &[Vec<i64>], mask: u32) -> Vec<i64> {
    rows.iter()
        .map(|r| (0..r.len()).filter(|j| mask >> j & 1 == 1).map(|j| r[j]).sum())
        .collect()
}

/// Does `target` lie in the span of the columns in `mask`?
fn in_span(rows: &[Vec<i64>], mask: u32, target: &[i64]) -> bool {
    let base = columns(rows, mask);
    let with: Vec<Vec<i64>> = base
        .iter()
        .zip(target)
        .map(|(r, &t)| {
            let mut r = r.clone();
            r.push(t);
            r
        })
        .collect();
    let rb = if mask == 0 { 0 } else { rank_oracle(&base) };
    rb == rank_oracle(&with)
}

/// The columns condition by exhausting every ordered partition of the columns.
pub fn columns_condition_oracle(rows: &[Vec<i64>]) -> bool {
    let k = rows[0].len();
    fn extend(rows: &[Vec<i64>], used: u32, full: u32) -> bool {
        if used == full {
            return true;
        }
        let rest = full & !used;
        let mut block = rest;
        while block != 0 {
            let sum = column_sum(rows, block);
            let ok = if used == 0 {
                sum.iter().all(|&x| x == 0)
            } else {
                in_span(rows, used, &sum)
            };
            if ok && extend(rows, used | block, full) {
                return true;
            }
            block = (block - 1) & rest;
        }
        false
    }
    extend(rows, 0, (1u32 << k) - 1)
}

/// Every `x ∈ [n]^k` with pairwise distinct entries and `Ax = 0`, in
/// lexicographic order, by a full odometer scan.
pub fn naive_solutions(rows: &[Vec<i64>], n: u32) -> Vec<Vec<u32>> {
    let k = rows[0].len();
    let mut out = Vec::new();
    if n == 0 {
        return out;
    }
    let mut x = vec![1u32; k];
    loop {
        let distinct = (0..k).all(|i| (i + 1..k).all(|j| x[i] != x[j]));
        if distinct && rows.iter().all(|r| r.iter().zip(&x).map(|(a, &b)| a * b as i64).sum::<i64>() == 0) {
            out.push(x.clone());
        }
        let mut i = k;
        loop {
            if i == 0 {
                return out;
            }
            i -= 1;
            if x[i] < n {
                x[i] += 1;
                break;
            }
            x[i] = 1;
        }
    }
}

/// Restrictions of `edges` to the coordinates in `mask`, with multiplicities.
pub fn project_oracle(edges: &[Vec<u32>], mask: u32) -> BTreeMap<Vec<u32>, u64> {
    let mut map = BTreeMap::new();
    for e in edges {
        let key: Vec<u32> = (0..e.len()).filter(|j| mask >> j & 1 == 1).map(|j| e[j]).collect();
        *map.entry(key).or_insert(0) += 1;
    }
    map
}

/// Decides whether every 2-colouring of `ground` has a colour-0 solution of
/// the first system or a colour-1 solution of the second, by trying all
/// `2^|ground|` colourings. Solutions are given as element lists.
pub fn arrow_by_all_colourings(ground: &[u32], first: &[Vec<u32>], second: &[Vec<u32>]) -> bool {
    let index: BTreeMap<u32, usize> = ground.iter().enumerate().map(|(i, &x)| (x, i)).collect();
    let masks = |sols: &[Vec<u32>]| -> Vec<u64> {
        sols.iter()
            .filter_map(|s| {
                s.iter()
                    .map(|x| index.get(x).map(|&i| 1u64 << i))
                    .try_fold(0u64, |acc, b| b.map(|b| acc | b))
            })
            .collect()
    };
    let (a, b) = (masks(first), masks(second));
    let full = if ground.is_empty() { 0 } else { (1u64 << ground.len()) - 1 };
    // `ones` is the set of elements coloured 1.
    let mut ones = 0u64;
    loop {
        let zeros = full & !ones;
        let mono = a.iter().any(|&s| s & !zeros == 0) || b.iter().any(|&s| s & !ones == 0);
        if !mono {
            return false;
        }
        if ones == full {
            return true;
        }
        ones = (ones.wrapping_sub(full)) & full;
    }
}

pub fn rational(num: i64, den: i64) -> BigRational {
    BigRational::new(BigInt::from(num), BigInt::from(den))
}

pub fn one() -> BigRational {
    BigRational::one()
}

/// `(μ, Δ, δ)` from a direct scan over ordered pairs of distinct edges.
/// A pair agreeing exactly on the coordinates `A` contributes
/// `q^{2W - w(I)}` to `2Δ` for every nonempty `I ⊆ A`, and `2^{|A|} - 1`
/// overlap terms to the first edge's share of `δ`.
pub fn janson_oracle(edges: &[Vec<u32>], q: &BigRational, w: &[i64]) -> (BigRational, BigRational, BigRational) {
    let k = w.len();
    let total: i64 = w.iter().sum();
    let pow = |e: i64| -> BigRational {
        let mut out = BigRational::one();
        for _ in 0..e {
            out *= q;
        }
        out
    };
    let mut by_agreement = vec![0u128; 1 << k];
    let mut worst = 0u64;
    for (a, e) in edges.iter().enumerate() {
        let mut overlap = 0u64;
        for (b, f) in edges.iter().enumerate() {
            if a == b {
                continue;
            }
            let agree = (0..k).filter(|&j| e[j] == f[j]).fold(0usize, |m, j| m | 1 << j);
            by_agreement[agree] += 1;
            overlap += (1u64 << agree.count_ones()) - 1;
        }
        worst = worst.max(overlap);
    }
    let mut two_delta = BigRational::zero();
    for (agree, &count) in by_agreement.iter().enumerate() {
        if count == 0 {
            continue;
        }
        let mut i = agree;
        while i != 0 {
            let wi: i64 = (0..k).filter(|j| i >> j & 1 == 1).map(|j| w[j]).sum();
            two_delta += pow(2 * total - wi) * BigRational::from_integer(BigInt::from(count));
            i = (i - 1) & agree;
        }
    }
    let k_pow = BigInt::from(k).pow(k as u32);
    let mu = pow(total) * BigRational::new(BigInt::from(edges.len()), k_pow);
    let delta = pow(total) * BigRational::from_integer(BigInt::from(worst));
    (mu, two_delta / BigRational::from_integer(BigInt::from(2)), delta)
}

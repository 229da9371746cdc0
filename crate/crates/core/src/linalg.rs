//! Exact integer-matrix linear algebra.
//!
//! Every density, exponent and projection formula in this crate bottoms out in
//! ranks of column submatrices, so everything here is exact: entries are
//! arbitrary-precision integers and elimination is fraction-free (Bareiss).

use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};

/// Canonical exact rational number (denominator positive, lowest terms).
pub type Rational = BigRational;

/// Builds `num/den` as a canonical rational. Panics on a zero denominator.
pub fn ratio(num: i64, den: i64) -> Rational {
    Rational::new(BigInt::from(num), BigInt::from(den))
}

pub fn int(v: i64) -> Rational {
    Rational::from_integer(BigInt::from(v))
}

/// Formats a rational as `num/den` (always with a denominator, `2/1` for 2).
pub fn fmt_fraction(q: &Rational) -> String {
    format!("{}/{}", q.numer(), q.denom())
}

pub fn to_f64(q: &Rational) -> f64 {
    q.to_f64().unwrap_or(f64::NAN)
}

/// Parses `a`, `a/b` or a finite decimal such as `0.25` into an exact rational.
pub fn parse_rational(s: &str) -> Result<Rational> {
    let s = s.trim();
    let bad = || Error::input(format!("not a rational number: {s:?}"));
    if let Some((n, d)) = s.split_once('/') {
        let n: BigInt = n.trim().parse().map_err(|_| bad())?;
        let d: BigInt = d.trim().parse().map_err(|_| bad())?;
        if d.is_zero() {
            return Err(bad());
        }
        return Ok(Rational::new(n, d));
    }
    if let Some((whole, frac)) = s.split_once('.') {
        let negative = whole.trim_start().starts_with('-');
        let whole: BigInt = if whole.is_empty() || whole == "-" {
            BigInt::zero()
        } else {
            whole.parse().map_err(|_| bad())?
        };
        if frac.is_empty() || !frac.bytes().all(|b| b.is_ascii_digit()) {
            return Err(bad());
        }
        let scale = BigInt::from(10u32).pow(frac.len() as u32);
        let frac: BigInt = frac.parse().map_err(|_| bad())?;
        let frac = Rational::new(frac, scale);
        let whole = Rational::from_integer(whole);
        return Ok(if negative { whole - frac } else { whole + frac });
    }
    let n: BigInt = s.parse().map_err(|_| bad())?;
    Ok(Rational::from_integer(n))
}

/// A set of column indices, stored as a bitmask. Indices are 0-based in the
/// API and printed 1-based.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct ColumnSet(u32);

impl ColumnSet {
    pub const MAX_COLUMNS: usize = 31;

    pub fn empty() -> Self {
        ColumnSet(0)
    }

    pub fn full(k: usize) -> Self {
        assert!(k <= Self::MAX_COLUMNS, "too many columns: {k}");
        ColumnSet(((1u64 << k) - 1) as u32)
    }

    pub fn singleton(i: usize) -> Self {
        assert!(i < Self::MAX_COLUMNS);
        ColumnSet(1 << i)
    }

    pub fn from_bits(bits: u32) -> Self {
        ColumnSet(bits)
    }

    pub fn from_indices<I: IntoIterator<Item = usize>>(indices: I) -> Self {
        let mut bits = 0u32;
        for i in indices {
            assert!(i < Self::MAX_COLUMNS);
            bits |= 1 << i;
        }
        ColumnSet(bits)
    }

    pub fn bits(self) -> u32 {
        self.0
    }

    pub fn len(self) -> usize {
        self.0.count_ones() as usize
    }

    pub fn is_empty(self) -> bool {
        self.0 == 0
    }

    pub fn contains(self, i: usize) -> bool {
        i < 32 && self.0 & (1 << i) != 0
    }

    pub fn insert(&mut self, i: usize) {
        self.0 |= 1 << i;
    }

    pub fn union(self, other: Self) -> Self {
        ColumnSet(self.0 | other.0)
    }

    pub fn intersection(self, other: Self) -> Self {
        ColumnSet(self.0 & other.0)
    }

    pub fn difference(self, other: Self) -> Self {
        ColumnSet(self.0 & !other.0)
    }

    pub fn complement(self, k: usize) -> Self {
        ColumnSet(Self::full(k).0 & !self.0)
    }

    pub fn is_subset(self, other: Self) -> bool {
        self.0 & !other.0 == 0
    }

    /// Ascending member indices.
    pub fn iter(self) -> impl Iterator<Item = usize> {
        let mut bits = self.0;
        std::iter::from_fn(move || {
            if bits == 0 {
                None
            } else {
                let i = bits.trailing_zeros() as usize;
                bits &= bits - 1;
                Some(i)
            }
        })
    }

    pub fn to_vec(self) -> Vec<usize> {
        self.iter().collect()
    }

    /// All nonempty subsets of `[k]`, in increasing bitmask order.
    pub fn nonempty_subsets(k: usize) -> impl Iterator<Item = ColumnSet> {
        let full = Self::full(k).0;
        (1..=full).map(ColumnSet)
    }

    /// All subsets of `self` (including empty and `self`), increasing bitmask order.
    pub fn subsets(self) -> impl Iterator<Item = ColumnSet> {
        let mask = self.0;
        let mut next = Some(0u32);
        std::iter::from_fn(move || {
            let cur = next?;
            next = if cur == mask {
                None
            } else {
                Some((cur.wrapping_sub(mask)) & mask)
            };
            Some(ColumnSet(cur))
        })
    }
}

impl fmt::Display for ColumnSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{")?;
        for (j, i) in self.iter().enumerate() {
            if j > 0 {
                write!(f, ",")?;
            }
            write!(f, "{}", i + 1)?;
        }
        write!(f, "}}")
    }
}

impl fmt::Debug for ColumnSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

/// Dense integer matrix with arbitrary-precision entries.
///
/// Constructors require at least one row and one column; the only way to get
/// a zero-column matrix is `column_submatrix` with an empty set.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct IntMatrix {
    rows: usize,
    cols: usize,
    entries: Vec<BigInt>,
}

impl IntMatrix {
    pub fn from_rows(rows: &[Vec<i64>]) -> Result<Self> {
        let big: Vec<Vec<BigInt>> = rows
            .iter()
            .map(|r| r.iter().map(|&v| BigInt::from(v)).collect())
            .collect();
        Self::from_big_rows(big)
    }

    pub fn from_big_rows(rows: Vec<Vec<BigInt>>) -> Result<Self> {
        if rows.is_empty() {
            return Err(Error::input("matrix needs at least one row"));
        }
        let cols = rows[0].len();
        if cols == 0 {
            return Err(Error::input("matrix needs at least one column"));
        }
        if cols > ColumnSet::MAX_COLUMNS {
            return Err(Error::input(format!(
                "matrix has {cols} columns; at most {} supported",
                ColumnSet::MAX_COLUMNS
            )));
        }
        if let Some(bad) = rows.iter().position(|r| r.len() != cols) {
            return Err(Error::input(format!(
                "row {} has {} entries, expected {cols}",
                bad + 1,
                rows[bad].len()
            )));
        }
        let n_rows = rows.len();
        Ok(IntMatrix {
            rows: n_rows,
            cols,
            entries: rows.into_iter().flatten().collect(),
        })
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        IntMatrix {
            rows,
            cols,
            entries: vec![BigInt::zero(); rows * cols],
        }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, r: usize, c: usize) -> &BigInt {
        &self.entries[r * self.cols + c]
    }

    pub fn row(&self, r: usize) -> &[BigInt] {
        &self.entries[r * self.cols..(r + 1) * self.cols]
    }

    pub fn column(&self, c: usize) -> Vec<BigInt> {
        (0..self.rows).map(|r| self.get(r, c).clone()).collect()
    }

    pub fn to_rows(&self) -> Vec<Vec<BigInt>> {
        (0..self.rows).map(|r| self.row(r).to_vec()).collect()
    }

    /// Entries as `i64`, if they all fit.
    pub fn to_i64_rows(&self) -> Option<Vec<Vec<i64>>> {
        (0..self.rows)
            .map(|r| self.row(r).iter().map(|v| v.to_i64()).collect())
            .collect()
    }

    pub fn max_abs_entry(&self) -> BigInt {
        self.entries
            .iter()
            .map(|v| v.abs())
            .max()
            .unwrap_or_else(BigInt::zero)
    }

    /// Restricts to the columns in `set`, ascending. Errors if `set` names a
    /// column past the end.
    pub fn column_submatrix(&self, set: ColumnSet) -> Result<IntMatrix> {
        if !set.is_subset(ColumnSet::full(self.cols)) {
            return Err(Error::input(format!(
                "column set {set} out of range for a matrix with {} columns",
                self.cols
            )));
        }
        let idx = set.to_vec();
        let mut entries = Vec::with_capacity(self.rows * idx.len());
        for r in 0..self.rows {
            for &c in &idx {
                entries.push(self.get(r, c).clone());
            }
        }
        Ok(IntMatrix {
            rows: self.rows,
            cols: idx.len(),
            entries,
        })
    }

    /// Keeps the listed rows in the given order.
    pub fn select_rows(&self, rows: &[usize]) -> IntMatrix {
        let mut entries = Vec::with_capacity(rows.len() * self.cols);
        for &r in rows {
            entries.extend_from_slice(self.row(r));
        }
        IntMatrix {
            rows: rows.len(),
            cols: self.cols,
            entries,
        }
    }

    pub fn scale(&self, factor: &BigInt) -> IntMatrix {
        IntMatrix {
            rows: self.rows,
            cols: self.cols,
            entries: self.entries.iter().map(|v| v * factor).collect(),
        }
    }

    pub fn permute_columns(&self, perm: &[usize]) -> IntMatrix {
        assert_eq!(perm.len(), self.cols);
        let mut entries = Vec::with_capacity(self.entries.len());
        for r in 0..self.rows {
            for &c in perm {
                entries.push(self.get(r, c).clone());
            }
        }
        IntMatrix {
            rows: self.rows,
            cols: self.cols,
            entries,
        }
    }

    /// Block-diagonal matrix `diag(blocks...)`.
    pub fn block_diagonal(blocks: &[&IntMatrix]) -> Result<IntMatrix> {
        if blocks.is_empty() {
            return Err(Error::input("block_diagonal needs at least one block"));
        }
        let rows: usize = blocks.iter().map(|b| b.rows).sum();
        let cols: usize = blocks.iter().map(|b| b.cols).sum();
        if cols > ColumnSet::MAX_COLUMNS {
            return Err(Error::input(format!("block matrix has {cols} columns")));
        }
        let mut out = IntMatrix::zeros(rows, cols);
        let (mut r0, mut c0) = (0, 0);
        for b in blocks {
            for r in 0..b.rows {
                for c in 0..b.cols {
                    out.entries[(r0 + r) * cols + c0 + c] = b.get(r, c).clone();
                }
            }
            r0 += b.rows;
            c0 += b.cols;
        }
        Ok(out)
    }

    /// Sum of the columns in `set`.
    pub fn column_sum(&self, set: ColumnSet) -> Vec<BigInt> {
        (0..self.rows)
            .map(|r| set.iter().map(|c| self.get(r, c)).sum())
            .collect()
    }

    pub fn rank(&self) -> usize {
        rank(self)
    }

    /// Rank of the column submatrix on `set`; the empty set has rank 0.
    pub fn rank_of_columns(&self, set: ColumnSet) -> usize {
        if set.is_empty() {
            return 0;
        }
        let sub = self
            .column_submatrix(set)
            .expect("column set within range");
        rank(&sub)
    }

    /// Indices of a maximal set of linearly independent rows, chosen greedily
    /// top to bottom.
    pub fn independent_rows(&self) -> Vec<usize> {
        let mut kept: Vec<usize> = Vec::new();
        let mut current = 0;
        for r in 0..self.rows {
            let mut trial = kept.clone();
            trial.push(r);
            let rk = rank(&self.select_rows(&trial));
            if rk > current {
                kept.push(r);
                current = rk;
            }
        }
        kept
    }
}

impl fmt::Debug for IntMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

impl fmt::Display for IntMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[")?;
        for r in 0..self.rows {
            if r > 0 {
                write!(f, "; ")?;
            }
            let row: Vec<String> = self.row(r).iter().map(|v| v.to_string()).collect();
            write!(f, "{}", row.join(" "))?;
        }
        write!(f, "]")
    }
}

/// Rank over the rationals via Bareiss fraction-free elimination.
pub fn rank(m: &IntMatrix) -> usize {
    if m.cols == 0 || m.rows == 0 {
        return 0;
    }
    let mut a: Vec<Vec<BigInt>> = m.to_rows();
    bareiss_rank(&mut a, m.cols)
}

fn bareiss_rank(a: &mut [Vec<BigInt>], cols: usize) -> usize {
    let rows = a.len();
    let mut prev = BigInt::one();
    let mut rank = 0;
    for col in 0..cols {
        if rank == rows {
            break;
        }
        let Some(p) = (rank..rows).find(|&r| !a[r][col].is_zero()) else {
            continue;
        };
        a.swap(rank, p);
        for r in rank + 1..rows {
            for c in col + 1..cols {
                let v = &a[rank][col] * &a[r][c] - &a[r][col] * &a[rank][c];
                // Bareiss: the division by the previous pivot is exact.
                a[r][c] = v.div_floor(&prev);
            }
            a[r][col] = BigInt::zero();
        }
        prev = a[rank][col].clone();
        rank += 1;
    }
    rank
}

/// True iff `target` lies in the rational span of `vectors`. The empty
/// sequence spans `{0}`.
pub fn in_rational_span(vectors: &[Vec<BigInt>], target: &[BigInt]) -> Result<bool> {
    if let Some(v) = vectors.iter().find(|v| v.len() != target.len()) {
        return Err(Error::input(format!(
            "dimension mismatch: vector of length {} against target of length {}",
            v.len(),
            target.len()
        )));
    }
    if target.iter().all(Zero::is_zero) {
        return Ok(true);
    }
    if vectors.is_empty() || target.is_empty() {
        return Ok(false);
    }
    let dim = target.len();
    // Columns are the spanning vectors; appending the target must not raise the rank.
    let mut base: Vec<Vec<BigInt>> = (0..dim)
        .map(|r| vectors.iter().map(|v| v[r].clone()).collect())
        .collect();
    let before = bareiss_rank(&mut base.clone(), vectors.len());
    for (r, row) in base.iter_mut().enumerate() {
        row.push(target[r].clone());
    }
    let after = bareiss_rank(&mut base, vectors.len() + 1);
    Ok(before == after)
}

/// Determinant and adjugate of a square integer matrix (fraction-free,
/// cofactor-free: computed by exact rational Gauss-Jordan and rescaled).
pub(crate) fn det_and_adjugate(a: &[Vec<BigInt>]) -> (BigInt, Vec<Vec<BigInt>>) {
    let n = a.len();
    let mut m: Vec<Vec<Rational>> = a
        .iter()
        .map(|r| r.iter().map(|v| Rational::from_integer(v.clone())).collect())
        .collect();
    let mut inv: Vec<Vec<Rational>> = (0..n)
        .map(|i| {
            (0..n)
                .map(|j| if i == j { Rational::one() } else { Rational::zero() })
                .collect()
        })
        .collect();
    let mut det = Rational::one();
    for col in 0..n {
        let Some(p) = (col..n).find(|&r| !m[r][col].is_zero()) else {
            return (BigInt::zero(), vec![vec![BigInt::zero(); n]; n]);
        };
        if p != col {
            m.swap(p, col);
            inv.swap(p, col);
            det = -det;
        }
        let pivot = m[col][col].clone();
        det *= &pivot;
        for c in 0..n {
            m[col][c] = &m[col][c] / &pivot;
            inv[col][c] = &inv[col][c] / &pivot;
        }
        for r in 0..n {
            if r != col && !m[r][col].is_zero() {
                let f = m[r][col].clone();
                for c in 0..n {
                    let dm = &f * &m[col][c];
                    m[r][c] -= dm;
                    let di = &f * &inv[col][c];
                    inv[r][c] -= di;
                }
            }
        }
    }
    debug_assert!(det.is_integer());
    let det = det.to_integer();
    let adj = inv
        .into_iter()
        .map(|row| {
            row.into_iter()
                .map(|v| {
                    let s = v * Rational::from_integer(det.clone());
                    debug_assert!(s.is_integer());
                    s.to_integer()
                })
                .collect()
        })
        .collect();
    (det, adj)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn m(rows: &[Vec<i64>]) -> IntMatrix {
        IntMatrix::from_rows(rows).unwrap()
    }

    fn v(xs: &[i64]) -> Vec<BigInt> {
        xs.iter().map(|&x| BigInt::from(x)).collect()
    }

    #[test]
    fn rank_examples() {
        assert_eq!(m(&[vec![1, 1, -1]]).rank(), 1);
        assert_eq!(m(&[vec![1, -2, 1, 0], vec![0, 1, -2, 1]]).rank(), 2);
        assert_eq!(IntMatrix::zeros(2, 3).rank(), 0);
        assert_eq!(m(&[vec![1, 2], vec![2, 4]]).rank(), 1);
    }

    #[test]
    fn column_submatrix_examples() {
        let schur = m(&[vec![1, 1, -1]]);
        let sub = schur.column_submatrix(ColumnSet::from_indices([0, 1])).unwrap();
        assert_eq!(sub, m(&[vec![1, 1]]));

        let empty = schur.column_submatrix(ColumnSet::empty()).unwrap();
        assert_eq!(empty.cols(), 0);
        assert_eq!(empty.rank(), 0);

        let ap4 = m(&[vec![1, -2, 1, 0], vec![0, 1, -2, 1]]);
        let sub = ap4.column_submatrix(ColumnSet::from_indices([1, 2])).unwrap();
        assert_eq!(sub, m(&[vec![-2, 1], vec![1, -2]]));
        assert_eq!(sub.rank(), 2);

        assert!(schur.column_submatrix(ColumnSet::singleton(3)).is_err());
    }

    #[test]
    fn span_examples() {
        assert!(in_rational_span(&[], &v(&[0, 0])).unwrap());
        assert!(in_rational_span(&[v(&[1, 0])], &v(&[2, 0])).unwrap());
        assert!(!in_rational_span(&[v(&[1, 0])], &v(&[0, 1])).unwrap());
        assert!(in_rational_span(&[v(&[1, 0])], &v(&[0])).is_err());
        assert!(!in_rational_span(&[], &v(&[1])).unwrap());
    }

    #[test]
    fn column_set_basics() {
        let s = ColumnSet::from_indices([0, 2]);
        assert_eq!(s.to_string(), "{1,3}");
        assert_eq!(s.complement(3), ColumnSet::singleton(1));
        assert_eq!(s.subsets().count(), 4);
        assert_eq!(ColumnSet::nonempty_subsets(3).count(), 7);
        assert_eq!(ColumnSet::empty().subsets().count(), 1);
    }

    #[test]
    fn adjugate_inverts() {
        let a = vec![v(&[2, 1]), v(&[1, 3])];
        let (det, adj) = det_and_adjugate(&a);
        assert_eq!(det, BigInt::from(5));
        for i in 0..2 {
            for j in 0..2 {
                let s: BigInt = (0..2).map(|t| &a[i][t] * &adj[t][j]).sum();
                let expect = if i == j { det.clone() } else { BigInt::zero() };
                assert_eq!(s, expect);
            }
        }
    }

    #[test]
    fn parse_rationals() {
        assert_eq!(parse_rational("3/6").unwrap(), ratio(1, 2));
        assert_eq!(parse_rational("0.25").unwrap(), ratio(1, 4));
        assert_eq!(parse_rational("-1.5").unwrap(), ratio(-3, 2));
        assert_eq!(parse_rational("7").unwrap(), int(7));
        assert!(parse_rational("1/0").is_err());
        assert!(parse_rational("abc").is_err());
    }
}

//! Enumeration of distinct-entry integer solutions of `A x = b` over
//! per-coordinate domains.
//!
//! A column basis `P` of `A` is pinned: once the free coordinates are
//! assigned, `x_P` is recovered exactly from `det(A_P) x_P = adj(A_P)(b - A_F x_F)`
//! and kept only if integral, in range and distinct. The basis is chosen to
//! minimise the product of the free domain sizes, and the innermost free
//! coordinate is clipped to the interval that keeps every pinned coordinate in
//! range, so the work is close to the number of solutions.

use std::ops::ControlFlow;

use num_bigint::BigInt;
use num_traits::{Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};
use crate::linalg::{det_and_adjugate, ColumnSet, IntMatrix};

/// Allowed values of one coordinate.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Domain {
    /// Inclusive range `lo..=hi` (empty when `lo > hi`).
    Range { lo: u32, hi: u32 },
    /// Sorted, deduplicated values.
    List(Vec<u32>),
}

impl Domain {
    pub fn upto(n: u32) -> Self {
        Domain::Range { lo: 1, hi: n }
    }

    pub fn list(mut values: Vec<u32>) -> Self {
        values.sort_unstable();
        values.dedup();
        Domain::List(values)
    }

    pub fn len(&self) -> usize {
        match self {
            Domain::Range { lo, hi } => (*hi as usize + 1).saturating_sub(*lo as usize),
            Domain::List(v) => v.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn contains(&self, x: i64) -> bool {
        match self {
            Domain::Range { lo, hi } => x >= *lo as i64 && x <= *hi as i64,
            Domain::List(v) => u32::try_from(x).is_ok_and(|x| v.binary_search(&x).is_ok()),
        }
    }

    fn bounds(&self) -> Option<(i64, i64)> {
        match self {
            Domain::Range { lo, hi } if lo <= hi => Some((*lo as i64, *hi as i64)),
            Domain::List(v) if !v.is_empty() => Some((v[0] as i64, *v.last().unwrap() as i64)),
            _ => None,
        }
    }

    fn max_value(&self) -> i64 {
        self.bounds().map_or(0, |(_, hi)| hi)
    }

    /// Values of the domain inside `[lo, hi]`, ascending.
    fn for_each_in(&self, lo: i64, hi: i64, mut f: impl FnMut(u32) -> ControlFlow<()>) -> ControlFlow<()> {
        match self {
            Domain::Range { lo: a, hi: b } => {
                let lo = lo.max(*a as i64);
                let hi = hi.min(*b as i64);
                let mut v = lo;
                while v <= hi {
                    f(v as u32)?;
                    v += 1;
                }
            }
            Domain::List(vals) => {
                let lo = lo.max(0).min(u32::MAX as i64) as u32;
                let start = vals.partition_point(|&x| x < lo);
                for &x in &vals[start..] {
                    if x as i64 > hi {
                        break;
                    }
                    f(x)?;
                }
            }
        }
        ControlFlow::Continue(())
    }
}

/// A compiled enumeration plan for `A x = b` with fixed `A` and domains; the
/// right-hand side and forbidden values are supplied per run.
#[derive(Clone, Debug)]
pub struct Plan {
    k: usize,
    free: Vec<usize>,
    pinned: Vec<usize>,
    domains: Vec<Domain>,
    det: i64,
    /// `adj(A_P) · A_F`, row per pinned coordinate, column per free coordinate.
    coupling: Vec<Vec<i64>>,
    /// `adj(A_P)`, used to map the right-hand side.
    adj: Vec<Vec<i64>>,
}

impl Plan {
    /// Compiles a plan. `rows` must have full row rank.
    pub fn new(matrix: &IntMatrix, domains: Vec<Domain>) -> Result<Plan> {
        let k = matrix.cols();
        if domains.len() != k {
            return Err(Error::input(format!(
                "{} domains for {k} coordinates",
                domains.len()
            )));
        }
        let ell = matrix.rows();
        if matrix.rank() != ell {
            return Err(Error::input("enumeration needs a matrix of full row rank"));
        }
        let pinned_set = choose_pinned(matrix, &domains)?;
        let pinned = pinned_set.to_vec();
        let mut free: Vec<usize> = pinned_set.complement(k).to_vec();
        // Largest domain innermost: it is the one that gets interval clipping.
        free.sort_by_key(|&j| (domains[j].len(), j));

        let a_p: Vec<Vec<BigInt>> = (0..ell)
            .map(|r| pinned.iter().map(|&c| matrix.get(r, c).clone()).collect())
            .collect();
        let (mut det, mut adj) = det_and_adjugate(&a_p);
        if det.is_negative() {
            det = -det;
            for row in adj.iter_mut() {
                for v in row.iter_mut() {
                    *v = -v.clone();
                }
            }
        }
        let coupling: Vec<Vec<BigInt>> = (0..ell)
            .map(|j| {
                free.iter()
                    .map(|&c| (0..ell).map(|t| &adj[j][t] * matrix.get(t, c)).sum())
                    .collect()
            })
            .collect();

        let overflow = || Error::input("matrix entries too large for 64-bit enumeration");
        let to_small = |m: &[Vec<BigInt>]| -> Result<Vec<Vec<i64>>> {
            m.iter()
                .map(|r| r.iter().map(|v| v.to_i64().ok_or_else(overflow)).collect())
                .collect()
        };
        let coupling = to_small(&coupling)?;
        let adj = to_small(&adj)?;
        let det = det.to_i64().ok_or_else(overflow)?;

        // Keep every partial numerator comfortably inside i64.
        let max_val = domains.iter().map(Domain::max_value).max().unwrap_or(0).max(1) as i128;
        let max_coef = coupling
            .iter()
            .chain(adj.iter())
            .flatten()
            .map(|v| v.unsigned_abs() as i128)
            .max()
            .unwrap_or(0)
            .max(det as i128);
        let width = (k + ell + 1) as i128;
        if max_coef * max_val * width * 4 > (1i128 << 62) {
            return Err(overflow());
        }
        debug_assert!(!det.is_zero());
        Ok(Plan {
            k,
            free,
            pinned,
            domains,
            det,
            coupling,
            adj,
        })
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn free_coordinates(&self) -> &[usize] {
        &self.free
    }

    /// Product of free domain sizes: the number of candidate assignments
    /// before clipping.
    pub fn cost_estimate(&self) -> f64 {
        self.free
            .iter()
            .map(|&j| self.domains[j].len() as f64)
            .product()
    }

    /// Values the outermost free coordinate ranges over (for splitting work).
    pub fn outer_values(&self) -> Vec<u32> {
        match self.free.first() {
            None => Vec::new(),
            Some(&j) => {
                let mut out = Vec::new();
                let _ = self.domains[j].for_each_in(i64::MIN, i64::MAX, |v| {
                    out.push(v);
                    ControlFlow::Continue(())
                });
                out
            }
        }
    }

    /// Visits every solution with pairwise distinct entries avoiding
    /// `forbidden`. The callback sees the full `k`-vector in coordinate
    /// order and may stop the run early.
    pub fn run<F>(&self, rhs: &[i64], forbidden: &[u32], mut visit: F) -> ControlFlow<()>
    where
        F: FnMut(&[u32]) -> ControlFlow<()>,
    {
        self.run_inner(rhs, forbidden, None, &mut visit)
    }

    /// Like [`Plan::run`] with the outermost free coordinate fixed to `outer`.
    pub fn run_with_outer<F>(&self, rhs: &[i64], forbidden: &[u32], outer: u32, mut visit: F) -> ControlFlow<()>
    where
        F: FnMut(&[u32]) -> ControlFlow<()>,
    {
        self.run_inner(rhs, forbidden, Some(outer), &mut visit)
    }

    /// Homogeneous run with nothing forbidden.
    pub fn run_homogeneous<F>(&self, visit: F) -> ControlFlow<()>
    where
        F: FnMut(&[u32]) -> ControlFlow<()>,
    {
        let zeros = vec![0; self.adj.len()];
        self.run(&zeros, &[], visit)
    }

    fn run_inner(
        &self,
        rhs: &[i64],
        forbidden: &[u32],
        outer: Option<u32>,
        visit: &mut dyn FnMut(&[u32]) -> ControlFlow<()>,
    ) -> ControlFlow<()> {
        assert_eq!(rhs.len(), self.adj.len(), "right-hand side length");
        let ell = self.adj.len();
        let mut numer = vec![0i64; (self.free.len() + 1) * ell];
        for (j, row) in self.adj.iter().enumerate() {
            numer[j] = row.iter().zip(rhs).map(|(a, b)| a * b).sum();
        }
        let mut state = RunState {
            plan: self,
            forbidden,
            x: vec![0; self.k],
            numer,
            outer,
        };
        state.descend(0, visit)
    }
}

struct RunState<'a> {
    plan: &'a Plan,
    forbidden: &'a [u32],
    x: Vec<u32>,
    /// Partial numerators, one block of `ell` values per depth.
    numer: Vec<i64>,
    outer: Option<u32>,
}

impl RunState<'_> {
    fn clashes(&self, v: u32, depth: usize) -> bool {
        self.forbidden.contains(&v) || self.plan.free[..depth].iter().any(|&j| self.x[j] == v)
    }

    fn descend(&mut self, depth: usize, visit: &mut dyn FnMut(&[u32]) -> ControlFlow<()>) -> ControlFlow<()> {
        let plan = self.plan;
        let ell = plan.pinned.len();
        let f = plan.free.len();
        if depth == f {
            return self.leaf(depth * ell, visit);
        }
        let base = depth * ell;
        let coord = plan.free[depth];
        let (mut lo, mut hi) = (i64::MIN, i64::MAX);
        if depth + 1 == f {
            // Clip so that every pinned coordinate stays within its bounds.
            for (j, &pc) in plan.pinned.iter().enumerate() {
                let Some((plo, phi)) = plan.domains[pc].bounds() else {
                    return ControlFlow::Continue(());
                };
                let nj = self.numer[base + j];
                let m = plan.coupling[j][depth];
                let (a, b) = (plan.det * plo, plan.det * phi);
                // Need a <= nj - m v <= b.
                if m == 0 {
                    if nj < a || nj > b {
                        return ControlFlow::Continue(());
                    }
                } else if m > 0 {
                    lo = lo.max(div_ceil(nj - b, m));
                    hi = hi.min(div_floor(nj - a, m));
                } else {
                    lo = lo.max(div_ceil(nj - a, m));
                    hi = hi.min(div_floor(nj - b, m));
                }
            }
            if lo > hi {
                return ControlFlow::Continue(());
            }
        }
        if depth == 0 {
            if let Some(v) = self.outer {
                if !plan.domains[coord].contains(v as i64) || (v as i64) < lo || (v as i64) > hi {
                    return ControlFlow::Continue(());
                }
                lo = v as i64;
                hi = v as i64;
            }
        }
        plan.domains[coord].for_each_in(lo, hi, |v| {
            if self.clashes(v, depth) {
                return ControlFlow::Continue(());
            }
            self.x[coord] = v;
            for j in 0..ell {
                self.numer[base + ell + j] = self.numer[base + j] - plan.coupling[j][depth] * v as i64;
            }
            self.descend(depth + 1, visit)
        })
    }

    fn leaf(&mut self, base: usize, visit: &mut dyn FnMut(&[u32]) -> ControlFlow<()>) -> ControlFlow<()> {
        let plan = self.plan;
        let d = plan.det;
        for (j, &pc) in plan.pinned.iter().enumerate() {
            let nj = self.numer[base + j];
            if nj % d != 0 {
                return ControlFlow::Continue(());
            }
            let val = nj / d;
            if !plan.domains[pc].contains(val) {
                return ControlFlow::Continue(());
            }
            let val = val as u32;
            if self.forbidden.contains(&val)
                || plan.free.iter().any(|&c| self.x[c] == val)
                || plan.pinned[..j].iter().any(|&c| self.x[c] == val)
            {
                return ControlFlow::Continue(());
            }
            self.x[pc] = val;
        }
        visit(&self.x)
    }
}

fn div_floor(a: i64, b: i64) -> i64 {
    let q = a / b;
    if (a % b != 0) && ((a < 0) != (b < 0)) {
        q - 1
    } else {
        q
    }
}

fn div_ceil(a: i64, b: i64) -> i64 {
    let q = a / b;
    if (a % b != 0) && ((a < 0) == (b < 0)) {
        q + 1
    } else {
        q
    }
}

/// Column basis minimising the product of the remaining domain sizes.
fn choose_pinned(matrix: &IntMatrix, domains: &[Domain]) -> Result<ColumnSet> {
    let k = matrix.cols();
    let ell = matrix.rows();
    let mut best: Option<(f64, ColumnSet)> = None;
    for set in ColumnSet::nonempty_subsets(k).filter(|s| s.len() == ell) {
        if matrix.rank_of_columns(set) != ell {
            continue;
        }
        let cost: f64 = set
            .complement(k)
            .iter()
            .map(|j| domains[j].len() as f64)
            .product();
        if best.is_none_or(|(c, _)| cost < c) {
            best = Some((cost, set));
        }
    }
    best.map(|(_, s)| s)
        .ok_or_else(|| Error::input("no column basis found"))
}

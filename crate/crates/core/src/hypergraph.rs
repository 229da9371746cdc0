//! Ordered solution hypergraphs: distinct-entry solutions of `Ax = 0` over
//! `[n]`, their projections, window degrees, tameness and the co-degree
//! function of the unordered shadow.

use std::collections::{HashMap, HashSet};
use std::fmt::Write as _;
use std::ops::ControlFlow;

use num_bigint::BigInt;
use num_integer::binomial;
use num_traits::{One, Zero};
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::fit::{log_log_slope, validate_grid};
use crate::linalg::{int, to_f64, ColumnSet, Rational};
use crate::rado::RadoProfile;
use crate::solve::{Domain, Plan};
use crate::weights::ExponentTable;

/// Default refusal threshold for the edge-count pre-estimate.
pub const DEFAULT_EDGE_CAP: f64 = 1e8;

/// Runs `visit` over every solution in `[n]^k`, splitting the outermost free
/// coordinate across the rayon pool. Each task gets its own accumulator from
/// `init`; the accumulators are returned in outer-value order.
fn par_solutions<T, I, V>(plan: &Plan, init: I, visit: V) -> Vec<T>
where
    T: Send,
    I: Fn() -> T + Sync,
    V: Fn(&mut T, &[u32]) + Sync,
{
    let outer = plan.outer_values();
    let zeros = vec![0i64; plan_rows(plan)];
    if outer.is_empty() {
        let mut acc = init();
        let _ = plan.run(&zeros, &[], |x| {
            visit(&mut acc, x);
            ControlFlow::Continue(())
        });
        return vec![acc];
    }
    outer
        .par_iter()
        .map(|&v| {
            let mut acc = init();
            let _ = plan.run_with_outer(&zeros, &[], v, |x| {
                visit(&mut acc, x);
                ControlFlow::Continue(())
            });
            acc
        })
        .collect()
}

fn plan_rows(plan: &Plan) -> usize {
    plan.k() - plan.free_coordinates().len()
}

fn homogeneous_plan(profile: &RadoProfile, n: u32) -> Result<Plan> {
    Plan::new(profile.matrix(), vec![Domain::upto(n); profile.k()])
}

/// Pre-estimate `n^{k - rk A}` of the number of solutions.
pub fn edge_estimate(profile: &RadoProfile, n: u32) -> f64 {
    (n as f64).powi((profile.k() - profile.rank()) as i32)
}

/// Sorts a flat array of `width`-tuples lexicographically, in place.
fn sort_tuples(flat: &mut Vec<u32>, width: usize) {
    if width == 0 {
        return;
    }
    let mut rows: Vec<&[u32]> = flat.chunks_exact(width).collect();
    rows.par_sort_unstable();
    let sorted: Vec<u32> = rows.concat();
    *flat = sorted;
}

fn restrict_into(edge: &[u32], set: ColumnSet, out: &mut Vec<u32>) {
    for i in set.iter() {
        out.push(edge[i]);
    }
}

/// The ordered solution hypergraph of a Rado profile over `[n]`.
#[derive(Clone, Debug)]
pub struct OrderedSolutionHypergraph {
    n: u32,
    k: usize,
    profile: RadoProfile,
    /// Edges as consecutive `k`-tuples, lexicographically sorted.
    edges: Vec<u32>,
}

impl OrderedSolutionHypergraph {
    /// Enumerates with the default memory guard.
    pub fn enumerate(profile: &RadoProfile, n: u32) -> Result<Self> {
        Self::enumerate_with_cap(profile, n, DEFAULT_EDGE_CAP)
    }

    pub fn enumerate_with_cap(profile: &RadoProfile, n: u32, cap: f64) -> Result<Self> {
        let estimate = edge_estimate(profile, n);
        if estimate > cap {
            return Err(Error::Guard {
                what: format!("solution hypergraph of {} over [{n}]", profile.name()),
                estimate,
                cap,
            });
        }
        let k = profile.k();
        let plan = homogeneous_plan(profile, n)?;
        let parts = par_solutions(&plan, Vec::new, |acc: &mut Vec<u32>, x| acc.extend_from_slice(x));
        let mut edges = parts.concat();
        sort_tuples(&mut edges, k);
        Ok(OrderedSolutionHypergraph {
            n,
            k,
            profile: profile.clone(),
            edges,
        })
    }

    pub fn n(&self) -> u32 {
        self.n
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn profile(&self) -> &RadoProfile {
        &self.profile
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len() / self.k
    }

    pub fn is_empty(&self) -> bool {
        self.edges.is_empty()
    }

    pub fn edges(&self) -> impl ExactSizeIterator<Item = &[u32]> + '_ {
        self.edges.chunks_exact(self.k)
    }

    pub fn edge(&self, i: usize) -> &[u32] {
        &self.edges[i * self.k..(i + 1) * self.k]
    }

    /// One edge per line, entries separated by spaces.
    pub fn dump_edges(&self) -> String {
        let mut s = String::new();
        for e in self.edges() {
            let parts: Vec<String> = e.iter().map(u32::to_string).collect();
            let _ = writeln!(s, "{}", parts.join(" "));
        }
        s
    }

    /// The `I`-projection: distinct restrictions with multiplicities.
    pub fn project(&self, set: ColumnSet) -> Result<Projection> {
        self.check_set(set)?;
        let width = set.len();
        let mut flat = Vec::with_capacity(self.edge_count() * width);
        for e in self.edges() {
            restrict_into(e, set, &mut flat);
        }
        Ok(Projection::from_restrictions(set, width, flat))
    }

    fn check_set(&self, set: ColumnSet) -> Result<()> {
        if set.is_empty() {
            return Err(Error::input("projection needs a nonempty index set"));
        }
        if !set.is_subset(ColumnSet::full(self.k)) {
            return Err(Error::input(format!("index set {set} exceeds k = {}", self.k)));
        }
        Ok(())
    }

    /// Number of distinct `W`-projection keys whose restriction to `I` is `u`.
    pub fn degree_in_window(&self, inner: ColumnSet, window: ColumnSet, u: &[u32]) -> Result<u64> {
        self.check_set(inner)?;
        self.check_set(window)?;
        if !inner.is_subset(window) {
            return Err(Error::input(format!("{inner} is not contained in {window}")));
        }
        let degrees = self.project(window)?.restrict(inner)?;
        degrees
            .multiplicity(u)
            .ok_or_else(|| Error::input(format!("{u:?} is not a key of the {inner}-projection")))
    }

    /// Least `K` with `deg_{H_W}(u) <= K |H_W| / |H_I|` for all
    /// `∅ ≠ I ⊊ W ⊆ [k]` and all `u`, together with the pair attaining it and
    /// the outcome of the second-moment check that `K` implies.
    pub fn tameness(&self) -> Result<Tameness> {
        if self.is_empty() {
            return Err(Error::input("tameness needs at least one edge"));
        }
        let projections: HashMap<u32, Projection> = ColumnSet::nonempty_subsets(self.k)
            .collect::<Vec<_>>()
            .into_par_iter()
            .map(|w| self.project(w).map(|p| (w.bits(), p)))
            .collect::<Result<_>>()?;
        let mut pairs = Vec::new();
        for w in ColumnSet::nonempty_subsets(self.k) {
            for i in w.subsets() {
                if !i.is_empty() && i != w {
                    pairs.push((i, w));
                }
            }
        }
        let per_pair: Vec<(Rational, ColumnSet, ColumnSet, BigInt)> = pairs
            .par_iter()
            .map(|&(i, w)| {
                let pw = &projections[&w.bits()];
                let size_w = pw.len() as i64;
                let size_i = projections[&i.bits()].len() as i64;
                let degrees = pw.restrict(i).expect("subset");
                let max_deg = degrees.counts.iter().copied().max().unwrap_or(0) as i64;
                let sum_sq: BigInt = degrees.counts.iter().map(|&d| BigInt::from(d) * d).sum();
                (Rational::new(BigInt::from(max_deg * size_i), BigInt::from(size_w)), i, w, sum_sq)
            })
            .collect();
        let (constant, inner, window) = per_pair
            .iter()
            .fold(None::<(Rational, ColumnSet, ColumnSet)>, |best, (k, i, w, _)| match best {
                Some(b) if b.0 >= *k => Some(b),
                _ => Some((k.clone(), *i, *w)),
            })
            .unwrap_or((Rational::one(), ColumnSet::full(self.k), ColumnSet::full(self.k)));
        let k2 = &constant * &constant;
        let cherry_holds = per_pair.iter().all(|(_, i, w, sum_sq)| {
            let size_w = int(projections[&w.bits()].len() as i64);
            let size_i = int(projections[&i.bits()].len() as i64);
            Rational::from_integer(sum_sq.clone()) * &size_i <= &k2 * &size_w * &size_w
        });
        Ok(Tameness {
            constant,
            inner,
            window,
            cherry_holds,
        })
    }

    /// The least tameness constant; see [`OrderedSolutionHypergraph::tameness`].
    pub fn tameness_constant(&self) -> Result<Rational> {
        Ok(self.tameness()?.constant)
    }

    /// Edges as deduplicated vertex sets.
    pub fn unordered(&self) -> UnorderedHypergraph {
        UnorderedHypergraph::from_tuples(self.n, self.k, self.edges())
    }
}

/// Result of the exhaustive tameness scan.
#[derive(Clone, Debug, PartialEq)]
pub struct Tameness {
    pub constant: Rational,
    /// A pair `(I, W)` attaining the constant.
    pub inner: ColumnSet,
    pub window: ColumnSet,
    /// `Σ_u deg_{H_W}(u)^2 <= K^2 |H_W|^2 / |H_I|` for every pair.
    pub cherry_holds: bool,
}

/// Distinct restrictions to an index set with their multiplicities.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Projection {
    set: ColumnSet,
    width: usize,
    keys: Vec<u32>,
    counts: Vec<u64>,
}

impl Projection {
    fn from_restrictions(set: ColumnSet, width: usize, mut flat: Vec<u32>) -> Self {
        sort_tuples(&mut flat, width);
        let mut keys: Vec<u32> = Vec::new();
        let mut counts: Vec<u64> = Vec::new();
        for row in flat.chunks_exact(width) {
            if keys.len() >= width && &keys[keys.len() - width..] == row {
                *counts.last_mut().unwrap() += 1;
            } else {
                keys.extend_from_slice(row);
                counts.push(1);
            }
        }
        Projection {
            set,
            width,
            keys,
            counts,
        }
    }

    pub fn set(&self) -> ColumnSet {
        self.set
    }

    /// Number of distinct keys.
    pub fn len(&self) -> usize {
        self.counts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.counts.is_empty()
    }

    pub fn total(&self) -> u64 {
        self.counts.iter().sum()
    }

    pub fn key(&self, i: usize) -> &[u32] {
        &self.keys[i * self.width..(i + 1) * self.width]
    }

    pub fn counts(&self) -> &[u64] {
        &self.counts
    }

    /// Keys in lexicographic order with multiplicities.
    pub fn iter(&self) -> impl Iterator<Item = (&[u32], u64)> + '_ {
        self.keys.chunks_exact(self.width).zip(self.counts.iter().copied())
    }

    pub fn multiplicity(&self, key: &[u32]) -> Option<u64> {
        if key.len() != self.width {
            return None;
        }
        let (mut lo, mut hi) = (0, self.len());
        while lo < hi {
            let mid = (lo + hi) / 2;
            match self.key(mid).cmp(key) {
                std::cmp::Ordering::Less => lo = mid + 1,
                std::cmp::Ordering::Greater => hi = mid,
                std::cmp::Ordering::Equal => return Some(self.counts[mid]),
            }
        }
        None
    }

    /// Restricts every key to `sub ⊆ set`, counting each key once: the
    /// multiplicity of `u` becomes the number of keys extending `u`.
    pub fn restrict(&self, sub: ColumnSet) -> Result<Projection> {
        if sub.is_empty() || !sub.is_subset(self.set) {
            return Err(Error::input(format!("{sub} is not a nonempty subset of {}", self.set)));
        }
        let positions: Vec<usize> = self
            .set
            .iter()
            .enumerate()
            .filter(|(_, c)| sub.contains(*c))
            .map(|(pos, _)| pos)
            .collect();
        let mut flat = Vec::with_capacity(self.len() * positions.len());
        for key in self.keys.chunks_exact(self.width) {
            flat.extend(positions.iter().map(|&p| key[p]));
        }
        Ok(Projection::from_restrictions(sub, positions.len(), flat))
    }
}

/// Hypergraph on `[n]` whose edges are `k`-sets.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct UnorderedHypergraph {
    n: u32,
    k: usize,
    edges: Vec<Vec<u32>>,
}

impl UnorderedHypergraph {
    /// Sorts each tuple, then deduplicates. Tuples must have distinct entries.
    pub fn from_tuples<'a>(n: u32, k: usize, tuples: impl Iterator<Item = &'a [u32]>) -> Self {
        let mut edges: Vec<Vec<u32>> = tuples
            .map(|t| {
                let mut e = t.to_vec();
                e.sort_unstable();
                e
            })
            .collect();
        edges.sort_unstable();
        edges.dedup();
        UnorderedHypergraph { n, k, edges }
    }

    pub fn n(&self) -> u32 {
        self.n
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn edges(&self) -> &[Vec<u32>] {
        &self.edges
    }

    /// The exact co-degree coefficients; see [`CodegreeFunction`].
    pub fn codegree_function(&self) -> Result<CodegreeFunction> {
        if self.edges.is_empty() {
            return Err(Error::input("the co-degree function needs at least one edge"));
        }
        let k = self.k;
        let e = self.edges.len() as i64;
        // n·d = k·e.
        let nd = int(k as i64 * e);
        let mut coefficients = Vec::with_capacity(k.saturating_sub(1));
        for j in 2..=k {
            let mut degree: HashMap<Vec<u32>, u64> = HashMap::new();
            let mut subset = Vec::with_capacity(j);
            for edge in &self.edges {
                for_each_subset(edge, j, &mut subset, &mut |t| {
                    *degree.entry(t.to_vec()).or_insert(0) += 1;
                });
            }
            let mut max_deg: HashMap<u32, u64> = HashMap::new();
            for (t, d) in &degree {
                for &v in t {
                    let slot = max_deg.entry(v).or_insert(0);
                    *slot = (*slot).max(*d);
                }
            }
            let total: u64 = max_deg.values().sum();
            coefficients.push(int(total as i64) / &nd);
        }
        Ok(CodegreeFunction { k, coefficients })
    }
}

fn for_each_subset(items: &[u32], size: usize, buf: &mut Vec<u32>, f: &mut dyn FnMut(&[u32])) {
    fn go(items: &[u32], start: usize, size: usize, buf: &mut Vec<u32>, f: &mut dyn FnMut(&[u32])) {
        if buf.len() == size {
            f(buf);
            return;
        }
        let need = size - buf.len();
        for i in start..=items.len() - need {
            buf.push(items[i]);
            go(items, i + 1, size, buf, f);
            buf.pop();
        }
    }
    buf.clear();
    go(items, 0, size, buf, f);
}

/// `δ_j(H, τ) = c_j / τ^{j-1}` with `c_j = Σ_v deg^{(j)}(v) / (n d)`, and
/// `δ = 2^{C(k,2)-1} Σ_j 2^{-C(j-1,2)} δ_j`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CodegreeFunction {
    k: usize,
    /// `c_2, ..., c_k`.
    coefficients: Vec<Rational>,
}

/// The co-degree function evaluated at one `τ`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CodegreeValues {
    /// `δ_2, ..., δ_k`.
    pub delta_j: Vec<Rational>,
    pub delta: Rational,
}

impl CodegreeFunction {
    pub fn coefficients(&self) -> &[Rational] {
        &self.coefficients
    }

    fn weights(&self) -> Vec<Rational> {
        let lead = pow2(binomial(self.k as i64, 2) - 1);
        (2..=self.k)
            .map(|j| &lead / pow2(binomial(j as i64 - 1, 2)))
            .collect()
    }

    pub fn evaluate(&self, tau: &Rational) -> Result<CodegreeValues> {
        if *tau <= Rational::zero() {
            return Err(Error::input("τ must be positive"));
        }
        let mut delta_j = Vec::with_capacity(self.coefficients.len());
        let mut power = Rational::one();
        for c in &self.coefficients {
            power = &power * tau;
            delta_j.push(c / &power);
        }
        let delta = delta_j.iter().zip(self.weights()).map(|(d, w)| d * w).sum();
        Ok(CodegreeValues { delta_j, delta })
    }

    /// `δ(H, τ)` in floating point, for irrational `τ`.
    pub fn evaluate_f64(&self, tau: f64) -> f64 {
        self.coefficients
            .iter()
            .zip(self.weights())
            .enumerate()
            .map(|(i, (c, w))| to_f64(c) * to_f64(&w) / tau.powi(i as i32 + 1))
            .sum()
    }
}

fn pow2(e: i64) -> Rational {
    if e >= 0 {
        Rational::from_integer(BigInt::one() << e as usize)
    } else {
        Rational::new(BigInt::one(), BigInt::one() << (-e) as usize)
    }
}

/// `|H_I|` for every nonempty `I`, in bitmask order, without storing edges.
///
/// When `rk A_{Ī} = |Ī|` the restriction to `I` is injective on solutions
/// and `|H_I| = |H|`; only the remaining sets need a hash set.
pub fn projection_counts(profile: &RadoProfile, n: u32) -> Result<Vec<(ColumnSet, u64)>> {
    let k = profile.k();
    let sets: Vec<ColumnSet> = ColumnSet::nonempty_subsets(k).collect();
    let injective: Vec<bool> = sets
        .iter()
        .map(|s| {
            let bar = s.complement(k);
            profile.rank_of_columns(bar) == bar.len()
        })
        .collect();
    let hashed: Vec<ColumnSet> = sets
        .iter()
        .zip(&injective)
        .filter(|(_, inj)| !**inj)
        .map(|(s, _)| *s)
        .collect();
    let bits = 32 - n.leading_zeros();
    if hashed.iter().any(|s| s.len() as u32 * bits > 128) {
        return Err(Error::input("projection keys too wide to pack"));
    }
    let plan = homogeneous_plan(profile, n)?;
    let pack = |x: &[u32], s: ColumnSet| -> u128 {
        s.iter().fold(0u128, |acc, i| (acc << bits) | x[i] as u128)
    };
    let parts = par_solutions(
        &plan,
        || (0u64, vec![HashSet::<u128>::new(); hashed.len()]),
        |acc, x| {
            acc.0 += 1;
            for (slot, &s) in acc.1.iter_mut().zip(&hashed) {
                slot.insert(pack(x, s));
            }
        },
    );
    let mut total = 0u64;
    let mut merged = vec![HashSet::<u128>::new(); hashed.len()];
    for (count, sets) in parts {
        total += count;
        for (dst, src) in merged.iter_mut().zip(sets) {
            if dst.len() < src.len() {
                let old = std::mem::replace(dst, src);
                dst.extend(old);
            } else {
                dst.extend(src);
            }
        }
    }
    let mut hashed_iter = merged.into_iter();
    Ok(sets
        .iter()
        .zip(&injective)
        .map(|(&s, &inj)| {
            let count = if inj {
                total
            } else {
                hashed_iter.next().unwrap().len() as u64
            };
            (s, count)
        })
        .collect())
}

/// Slope of `log |H_I|` against `log n` for one index set.
#[derive(Clone, Debug, PartialEq)]
pub struct CountFit {
    pub set: ColumnSet,
    /// `|I| - rk A + rk A_{Ī}`.
    pub exponent: i64,
    pub counts: Vec<u64>,
    pub slope: f64,
}

impl CountFit {
    pub fn deviation(&self) -> f64 {
        self.slope - self.exponent as f64
    }
}

/// Projection counts over a grid with fitted growth exponents.
#[derive(Clone, Debug, PartialEq)]
pub struct CountAudit {
    pub grid: Vec<u32>,
    pub rows: Vec<CountFit>,
}

impl CountAudit {
    pub fn max_abs_deviation(&self) -> f64 {
        self.rows.iter().map(|r| r.deviation().abs()).fold(0.0, f64::max)
    }
}

/// Counts `|H_I|` for every `I` at every grid point and fits log-log slopes.
pub fn projection_count_audit(profile: &RadoProfile, grid: &[u32]) -> Result<CountAudit> {
    validate_grid(grid)?;
    let table = ExponentTable::new(profile);
    let per_n: Vec<Vec<(ColumnSet, u64)>> = grid
        .iter()
        .map(|&n| projection_counts(profile, n))
        .collect::<Result<_>>()?;
    let mut rows = Vec::new();
    for (idx, set) in ColumnSet::nonempty_subsets(profile.k()).enumerate() {
        let counts: Vec<u64> = per_n.iter().map(|row| row[idx].1).collect();
        let ys: Vec<f64> = counts.iter().map(|&c| c as f64).collect();
        let slope = log_log_slope(grid, &ys)?;
        rows.push(CountFit {
            set,
            exponent: table.exponent(set),
            counts,
            slope,
        });
    }
    Ok(CountAudit {
        grid: grid.to_vec(),
        rows,
    })
}

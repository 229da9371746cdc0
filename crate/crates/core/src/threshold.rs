//! Monte-Carlo threshold scans, the projected-count concentration check,
//! the Suen-Janson evaluator and the preflight checks on container and
//! Ramsey side conditions.

use std::collections::HashSet;
use std::ops::ControlFlow;

use num_bigint::BigInt;
use num_traits::{One, Pow, ToPrimitive, Zero};
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::fit::wilson_interval;
use crate::hypergraph::{projection_counts, OrderedSolutionHypergraph};
use crate::linalg::{fmt_fraction, int, to_f64, ColumnSet, Rational};
use crate::rado::{sort_by_density, threshold_density, RadoProfile};
use crate::ramsey::{decide_arrow, zeta_estimate, ArrowVerdict, RamseyInstance, ScanValue};
use crate::random::{sample_weighted_partite_with, stream_rng, CoupledDraw, RandomSetSample};
use crate::solve::{Domain, Plan};
use crate::weights::WeightFunction;

/// Parameters of a threshold scan.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ScanConfig {
    pub n_grid: Vec<u32>,
    pub c_grid: Vec<f64>,
    pub trials: u32,
    pub seed: u64,
    /// Search-node budget per decision.
    pub budget: u64,
}

impl ScanConfig {
    fn validate(&self) -> Result<()> {
        if self.n_grid.is_empty() || self.c_grid.is_empty() {
            return Err(Error::input("n-grid and C-grid must be nonempty"));
        }
        if self.n_grid.contains(&0) {
            return Err(Error::input("n-grid entries must be positive"));
        }
        if self.c_grid.iter().any(|c| !c.is_finite() || *c <= 0.0) {
            return Err(Error::input("C-grid entries must be positive and finite"));
        }
        if self.trials == 0 {
            return Err(Error::input("at least one trial is required"));
        }
        Ok(())
    }
}

/// One `(n, C)` cell of a threshold curve.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Cell {
    pub n: u32,
    pub c: f64,
    pub p: f64,
    /// `C n^{-1/m}` exceeded 1 and was capped.
    pub capped: bool,
    pub trials: u32,
    pub successes: u32,
    /// Trials whose decision ran out of budget.
    pub unknown: u32,
    /// Wilson 95% bounds: the low end counts unknown trials as failures,
    /// the high end counts them as successes.
    pub ci_low: f64,
    pub ci_high: f64,
}

impl Cell {
    pub fn fraction(&self) -> f64 {
        self.successes as f64 / self.trials as f64
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ThresholdCurve {
    pub matrices: Vec<String>,
    /// `m(A_1, A_2)`, or `m(A_1)` for a single matrix, as `num/den`.
    pub density: String,
    pub notices: Vec<String>,
    pub cells: Vec<Cell>,
}

impl ThresholdCurve {
    pub fn to_csv(&self) -> String {
        let mut s = String::from("n,C,p,trials,successes,unknown,ci_low,ci_high\n");
        for c in &self.cells {
            s.push_str(&format!(
                "{},{},{},{},{},{},{},{}\n",
                c.n, c.c, c.p, c.trials, c.successes, c.unknown, c.ci_low, c.ci_high
            ));
        }
        s
    }

    pub fn cells_for(&self, n: u32) -> Vec<&Cell> {
        let mut cells: Vec<&Cell> = self.cells.iter().filter(|c| c.n == n).collect();
        cells.sort_by(|a, b| a.c.total_cmp(&b.c));
        cells
    }

    /// The `C` where the success fraction first reaches 1/2, interpolated
    /// linearly in `log C`; `None` unless the crossing is bracketed by the grid.
    pub fn crossing(&self, n: u32) -> Option<f64> {
        let cells = self.cells_for(n);
        let j = cells.iter().position(|c| c.fraction() >= 0.5)?;
        if j == 0 {
            return None;
        }
        let (a, b) = (cells[j - 1], cells[j]);
        let t = (0.5 - a.fraction()) / (b.fraction() - a.fraction());
        Some((a.c.ln() + t * (b.c.ln() - a.c.ln())).exp())
    }
}

/// `C n^{-1/m}` capped at 1.
pub fn scan_probability(c: f64, n: u32, density: &Rational) -> (f64, bool) {
    let p = c * (n as f64).powf(-1.0 / to_f64(density));
    if p > 1.0 {
        (1.0, true)
    } else {
        (p, false)
    }
}

/// Estimates `P[[n]_p → (A_1, ..., A_r)]` on a grid of `p = C n^{-1/m(A_1, A_2)}`.
///
/// All cells of one `(n, trial)` share their uniforms, so for every trial the
/// samples are nested in `C` and the outcome is monotone in `C`.
pub fn threshold_scan(matrices: &[RadoProfile], config: &ScanConfig) -> Result<ThresholdCurve> {
    config.validate()?;
    if matrices.is_empty() {
        return Err(Error::input("at least one matrix is required"));
    }
    let mut sorted = matrices.to_vec();
    let mut notices = Vec::new();
    if sort_by_density(&mut sorted)? {
        notices.push("matrices reordered by decreasing m(A)".to_string());
    }
    let density = threshold_density(&sorted)?;
    let probabilities: Vec<Vec<(f64, bool)>> = config
        .n_grid
        .iter()
        .map(|&n| config.c_grid.iter().map(|&c| scan_probability(c, n, &density)).collect())
        .collect();

    let jobs: Vec<(usize, u32)> = (0..config.n_grid.len())
        .flat_map(|i| (0..config.trials).map(move |t| (i, t)))
        .collect();
    let outcomes: Vec<Vec<Option<bool>>> = jobs
        .par_iter()
        .map(|&(i, t)| {
            let n = config.n_grid[i];
            let draw = CoupledDraw::new(&mut stream_rng(config.seed, i as u32, t), n, None);
            probabilities[i]
                .iter()
                .map(|&(p, _)| {
                    let sample = draw.binomial(p);
                    let inst = RamseyInstance::new(sample.included, sorted.clone())?;
                    Ok(match decide_arrow(&inst, config.budget)? {
                        ArrowVerdict::Ramsey { .. } => Some(true),
                        ArrowVerdict::GoodColouring { .. } => Some(false),
                        ArrowVerdict::BudgetExhausted { .. } => None,
                    })
                })
                .collect::<Result<Vec<_>>>()
        })
        .collect::<Result<_>>()?;

    let mut cells = Vec::new();
    for (i, &n) in config.n_grid.iter().enumerate() {
        for (j, &c) in config.c_grid.iter().enumerate() {
            let results = outcomes[i * config.trials as usize..(i + 1) * config.trials as usize]
                .iter()
                .map(|row| row[j]);
            let (mut successes, mut unknown) = (0u32, 0u32);
            for r in results {
                match r {
                    Some(true) => successes += 1,
                    None => unknown += 1,
                    Some(false) => {}
                }
            }
            let (p, capped) = probabilities[i][j];
            if capped {
                notices.push(format!("n={n} C={c}: p capped at 1"));
            }
            if unknown > 0 {
                notices.push(format!("n={n} C={c}: incomplete, {unknown} trials exhausted the budget"));
            }
            let trials = config.trials;
            let ci_low = wilson_interval(successes as u64, trials as u64).0;
            let ci_high = wilson_interval((successes + unknown) as u64, trials as u64).1;
            cells.push(Cell {
                n,
                c,
                p,
                capped,
                trials,
                successes,
                unknown,
                ci_low,
                ci_high,
            });
        }
    }
    Ok(ThresholdCurve {
        matrices: sorted.iter().map(|m| m.name().to_string()).collect(),
        density: fmt_fraction(&density),
        notices,
        cells,
    })
}

/// Parameters of [`concentration_check`].
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ConcentrationConfig {
    pub n: u32,
    pub q: f64,
    pub trials: u32,
    pub seed: u64,
    /// Count only tuples whose `i`-th entry lies in part `i`; otherwise
    /// count every projected tuple inside the sample.
    pub respect_parts: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ConcentrationRow {
    pub set: String,
    pub projection_size: u64,
    /// `2 q^{w(I)} |H_I|`.
    pub threshold: f64,
    pub mean_count: f64,
    /// Trials with `X_I` at most the threshold.
    pub within: u32,
    pub frequency: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ConcentrationReport {
    pub trials: u32,
    pub rows: Vec<ConcentrationRow>,
    pub warnings: Vec<String>,
}

impl ConcentrationReport {
    pub fn min_frequency(&self) -> f64 {
        self.rows.iter().map(|r| r.frequency).fold(1.0, f64::min)
    }
}

/// How `X_I` is counted for one index set.
enum Counter {
    /// `A_{Ī}` has full row rank: walk candidate `y` and look for one
    /// extension over `Ī` to a distinct-entry solution.
    Extend {
        plan: Plan,
        /// `A_I` columns, row-major, as `i64`.
        inner: Vec<Vec<i64>>,
    },
    /// Enumerate whole solutions with restricted domains on `I`, then
    /// deduplicate their restrictions.
    Enumerate,
}

fn a_i64(profile: &RadoProfile) -> Result<Vec<Vec<i64>>> {
    profile
        .matrix()
        .to_i64_rows()
        .ok_or_else(|| Error::input("matrix entries too large"))
}

fn count_projected(
    profile: &RadoProfile,
    set: ColumnSet,
    counter: &Counter,
    lists: &[Vec<u32>],
    n: u32,
) -> Result<u64> {
    let k = profile.k();
    let coords = set.to_vec();
    match counter {
        Counter::Extend { plan, inner } => {
            let mut y = Vec::with_capacity(coords.len());
            let mut count = 0u64;
            walk_tuples(lists, &coords, &mut y, &mut |y| {
                let rhs: Vec<i64> = inner
                    .iter()
                    .map(|row| -row.iter().zip(y).map(|(a, &b)| a * b as i64).sum::<i64>())
                    .collect();
                let found = plan.run(&rhs, y, |_| ControlFlow::Break(())).is_break();
                if found {
                    count += 1;
                }
            });
            Ok(count)
        }
        Counter::Enumerate => {
            let domains: Vec<Domain> = (0..k)
                .map(|c| match coords.iter().position(|&x| x == c) {
                    Some(pos) => Domain::list(lists[pos].clone()),
                    None => Domain::upto(n),
                })
                .collect();
            if domains.iter().any(Domain::is_empty) {
                return Ok(0);
            }
            let plan = Plan::new(profile.matrix(), domains)?;
            let mut seen: HashSet<Vec<u32>> = HashSet::new();
            let full = set == ColumnSet::full(k);
            let mut count = 0u64;
            let _ = plan.run_homogeneous(|x| {
                if full {
                    count += 1;
                } else {
                    seen.insert(coords.iter().map(|&c| x[c]).collect());
                }
                ControlFlow::Continue(())
            });
            Ok(if full { count } else { seen.len() as u64 })
        }
    }
}

/// Calls `f` on every tuple drawn from `lists` (one list per coordinate)
/// with pairwise distinct entries.
fn walk_tuples(lists: &[Vec<u32>], coords: &[usize], y: &mut Vec<u32>, f: &mut dyn FnMut(&[u32])) {
    let depth = y.len();
    if depth == coords.len() {
        f(y);
        return;
    }
    for &v in &lists[depth] {
        if y.contains(&v) {
            continue;
        }
        y.push(v);
        walk_tuples(lists, coords, y, f);
        y.pop();
    }
}

/// Frequency over trials of `X_I <= 2 q^{w(I)} |H_I|` for every `I`, where
/// `X_I` counts `I`-projections of solutions lying inside `V_{n,q,w}`.
pub fn concentration_check(
    a1: &RadoProfile,
    w: &WeightFunction,
    config: &ConcentrationConfig,
) -> Result<ConcentrationReport> {
    if w.k() != a1.k() {
        return Err(Error::input("weight function and matrix disagree on k"));
    }
    if !(config.q > 0.0 && config.q <= 1.0) {
        return Err(Error::input("q must lie in (0, 1]"));
    }
    if config.trials == 0 {
        return Err(Error::input("at least one trial is required"));
    }
    let k = a1.k();
    let n = config.n;
    let sizes = projection_counts(a1, n)?;
    if let Some((s, _)) = sizes.iter().find(|(_, c)| *c == 0) {
        return Err(Error::input(format!("projection {s} is empty at n = {n}")));
    }
    let rows = a_i64(a1)?;
    let ell = a1.rank();
    let counters: Vec<Counter> = sizes
        .iter()
        .map(|&(set, _)| {
            let bar = set.complement(k);
            if !bar.is_empty() && a1.rank_of_columns(bar) == ell {
                let sub = a1.matrix().column_submatrix(bar)?;
                let plan = Plan::new(&sub, vec![Domain::upto(n); bar.len()])?;
                let inner = rows
                    .iter()
                    .map(|r| set.iter().map(|c| r[c]).collect())
                    .collect();
                Ok(Counter::Extend { plan, inner })
            } else {
                Ok(Counter::Enumerate)
            }
        })
        .collect::<Result<_>>()?;

    let thresholds: Vec<f64> = sizes
        .iter()
        .map(|&(set, size)| 2.0 * config.q.powf(to_f64(&w.of_set(set))) * size as f64)
        .collect();
    let mut warnings = Vec::new();
    for (&(set, _), t) in sizes.iter().zip(&thresholds) {
        if t / 2.0 < 10.0 {
            warnings.push(format!(
                "q^w(I)|H_I| = {:.3} for I = {set} is small; the concentration regime is doubtful",
                t / 2.0
            ));
        }
    }

    let per_trial: Vec<Vec<u64>> = (0..config.trials)
        .into_par_iter()
        .map(|t| {
            let sample = sample_weighted_partite_with(&mut stream_rng(config.seed, 0, t), n, config.q, w)?.weighted;
            sizes
                .iter()
                .zip(&counters)
                .map(|(&(set, _), counter)| {
                    let lists = lists_for(&sample, set, config.respect_parts);
                    count_projected(a1, set, counter, &lists, n)
                })
                .collect::<Result<Vec<u64>>>()
        })
        .collect::<Result<_>>()?;

    let rows_out = sizes
        .iter()
        .enumerate()
        .map(|(idx, &(set, size))| {
            let counts: Vec<u64> = per_trial.iter().map(|r| r[idx]).collect();
            let within = counts.iter().filter(|&&x| x as f64 <= thresholds[idx]).count() as u32;
            ConcentrationRow {
                set: set.to_string(),
                projection_size: size,
                threshold: thresholds[idx],
                mean_count: counts.iter().sum::<u64>() as f64 / config.trials as f64,
                within,
                frequency: within as f64 / config.trials as f64,
            }
        })
        .collect();
    Ok(ConcentrationReport {
        trials: config.trials,
        rows: rows_out,
        warnings,
    })
}

fn lists_for(sample: &RandomSetSample, set: ColumnSet, respect_parts: bool) -> Vec<Vec<u32>> {
    set.iter()
        .map(|i| {
            if respect_parts {
                sample.part_members(i)
            } else {
                sample.included.clone()
            }
        })
        .collect()
}

/// The integer data behind the Janson quantities of an ordered hypergraph.
///
/// Pairs of distinct edges are aggregated by the coordinates they agree
/// on: for each `I`, `pair_counts[I] = Σ_u deg(u)(deg(u) - 1)` over keys `u`
/// of the `I`-projection, and `max_overlap = max_e Σ_I (deg(e|_I) - 1)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct JansonCounts {
    pub k: usize,
    pub edges: u64,
    pub pair_counts: Vec<(ColumnSet, u128)>,
    pub max_overlap: u64,
}

impl JansonCounts {
    pub fn new(h: &OrderedSolutionHypergraph) -> Result<Self> {
        if h.is_empty() {
            return Err(Error::input("the Janson evaluator needs at least one edge"));
        }
        let k = h.k();
        let sets: Vec<ColumnSet> = ColumnSet::nonempty_subsets(k).collect();
        let projections = sets
            .par_iter()
            .map(|&s| h.project(s))
            .collect::<Result<Vec<_>>>()?;
        let pair_counts = sets
            .iter()
            .zip(&projections)
            .map(|(&s, p)| (s, p.counts().iter().map(|&d| d as u128 * (d as u128 - 1)).sum()))
            .collect();
        let max_overlap = (0..h.edge_count())
            .into_par_iter()
            .map(|e| {
                let edge = h.edge(e);
                sets.iter()
                    .zip(&projections)
                    .map(|(&s, p)| {
                        let key: Vec<u32> = s.iter().map(|c| edge[c]).collect();
                        p.multiplicity(&key).expect("edge restriction is a key") - 1
                    })
                    .sum::<u64>()
            })
            .max()
            .unwrap_or(0);
        Ok(JansonCounts {
            k,
            edges: h.edge_count() as u64,
            pair_counts,
            max_overlap,
        })
    }
}

/// `μ`, `Δ` and `δ` of the Suen-Janson inequality.
#[derive(Clone, Debug, PartialEq)]
pub struct JansonTerms<T> {
    /// `q^{w([k])} |H| / k^k`.
    pub mu: T,
    /// `½ Σ_I q^{2w([k]) - w(I)} Σ_u deg(u)(deg(u) - 1)`.
    pub big_delta: T,
    /// `q^{w([k])} max_e Σ_I (deg(e|_I) - 1)`.
    pub small_delta: T,
}

/// The bound `exp(-min(μ²/8Δ, μ/2, μ/6δ))`; terms with a zero denominator
/// drop out.
#[derive(Clone, Debug, PartialEq)]
pub struct JansonBound {
    pub exponent: f64,
    pub bound: f64,
    /// Which term attains the minimum: "mu^2/8Delta", "mu/2" or "mu/6delta".
    pub binding: &'static str,
}

impl JansonCounts {
    /// Exact terms for rational `q` and integral `w`.
    pub fn exact_terms(&self, q: &Rational, w: &WeightFunction) -> Result<JansonTerms<Rational>> {
        if w.k() != self.k || !w.is_integral() {
            return Err(Error::input("exact evaluation needs an integral weight of matching length"));
        }
        if !(*q > Rational::zero() && *q <= Rational::one()) {
            return Err(Error::input("q must lie in (0, 1]"));
        }
        let power = |e: &Rational| -> Rational {
            let e = e.to_integer().to_u32().expect("small integral exponent");
            Pow::pow(q, e)
        };
        let total = w.of_set(ColumnSet::full(self.k));
        let q_total = power(&total);
        let k_pow = Rational::from_integer(BigInt::from(self.k).pow(self.k as u32));
        let mu = &q_total * int(self.edges as i64) / k_pow;
        let mut big_delta = Rational::zero();
        for (set, count) in &self.pair_counts {
            let exp = &total + &total - w.of_set(*set);
            big_delta += power(&exp) * Rational::from_integer(BigInt::from(*count));
        }
        big_delta /= int(2);
        let small_delta = &q_total * int(self.max_overlap as i64);
        Ok(JansonTerms {
            mu,
            big_delta,
            small_delta,
        })
    }

    pub fn float_terms(&self, q: f64, w: &WeightFunction) -> Result<JansonTerms<f64>> {
        if w.k() != self.k {
            return Err(Error::input("weight function and hypergraph disagree on k"));
        }
        let total = to_f64(&w.of_set(ColumnSet::full(self.k)));
        let q_total = q.powf(total);
        let mu = q_total * self.edges as f64 / (self.k as f64).powi(self.k as i32);
        let big_delta = 0.5
            * self
                .pair_counts
                .iter()
                .map(|(s, c)| q.powf(2.0 * total - to_f64(&w.of_set(*s))) * *c as f64)
                .sum::<f64>();
        Ok(JansonTerms {
            mu,
            big_delta,
            small_delta: q_total * self.max_overlap as f64,
        })
    }
}

fn choose_binding(candidates: [(Option<f64>, &'static str); 3]) -> JansonBound {
    let (exponent, binding) = candidates
        .iter()
        .filter_map(|(v, name)| v.map(|v| (v, *name)))
        .fold((f64::INFINITY, "mu/2"), |best, cur| if cur.0 < best.0 { cur } else { best });
    JansonBound {
        exponent,
        bound: (-exponent).exp(),
        binding,
    }
}

impl JansonTerms<Rational> {
    pub fn bound(&self) -> JansonBound {
        let mu = &self.mu;
        let quad = (!self.big_delta.is_zero()).then(|| to_f64(&(mu * mu / (&self.big_delta * int(8)))));
        let half = Some(to_f64(&(mu / int(2))));
        let lin = (!self.small_delta.is_zero()).then(|| to_f64(&(mu / (&self.small_delta * int(6)))));
        choose_binding([(quad, "mu^2/8Delta"), (half, "mu/2"), (lin, "mu/6delta")])
    }
}

impl JansonTerms<f64> {
    pub fn bound(&self) -> JansonBound {
        let mu = self.mu;
        let quad = (self.big_delta > 0.0).then(|| mu * mu / (8.0 * self.big_delta));
        let lin = (self.small_delta > 0.0).then(|| mu / (6.0 * self.small_delta));
        choose_binding([(quad, "mu^2/8Delta"), (Some(mu / 2.0), "mu/2"), (lin, "mu/6delta")])
    }
}

/// Janson bound for rational `q` and integral `w`, with exact terms.
pub fn janson_bound_exact(
    h: &OrderedSolutionHypergraph,
    q: &Rational,
    w: &WeightFunction,
) -> Result<(JansonTerms<Rational>, JansonBound)> {
    let terms = JansonCounts::new(h)?.exact_terms(q, w)?;
    let bound = terms.bound();
    Ok((terms, bound))
}

/// Janson bound in floating point for arbitrary `q` and `w`.
pub fn janson_bound(h: &OrderedSolutionHypergraph, q: f64, w: &WeightFunction) -> Result<(JansonTerms<f64>, JansonBound)> {
    let terms = JansonCounts::new(h)?.float_terms(q, w)?;
    let bound = terms.bound();
    Ok((terms, bound))
}

/// Parameters of [`preflight`].
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PreflightConfig {
    pub epsilon: f64,
    pub cprime: f64,
    /// Ground-set size for the `ζ` proxy.
    pub zeta_n: u32,
    pub budget: u64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PreflightCheck {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

fn factorial(k: usize) -> f64 {
    (1..=k).map(|i| i as f64).product()
}

/// Evaluates the container and colouring side conditions at finite `n`:
/// `ε < 1/2`, `τ < 1/2`, `δ(H^{(i)}_n, τ) <= ε/(12 k_i!)` for `i >= 2` with
/// `τ = C' n^{-1/m(A_2)}`, and `ζ > t! ε` with `ζ` taken from a small-`n`
/// proxy. Matrices are sorted by decreasing density first. Failures are
/// reported, not raised.
pub fn preflight(matrices: &[RadoProfile], n: u32, config: &PreflightConfig) -> Result<Vec<PreflightCheck>> {
    let mut sorted = matrices.to_vec();
    sort_by_density(&mut sorted)?;
    let mut checks = vec![PreflightCheck {
        name: "epsilon".into(),
        passed: config.epsilon > 0.0 && config.epsilon < 0.5,
        detail: format!("epsilon = {}", config.epsilon),
    }];
    if sorted.len() < 2 {
        checks.push(PreflightCheck {
            name: "colours".into(),
            passed: true,
            detail: "single matrix: container and zeta conditions do not apply".into(),
        });
        return Ok(checks);
    }
    let m2 = to_f64(&sorted[1].m()?);
    let tau = config.cprime * (n as f64).powf(-1.0 / m2);
    checks.push(PreflightCheck {
        name: "tau".into(),
        passed: tau > 0.0 && tau < 0.5,
        detail: format!("tau = C' n^(-1/m(A2)) = {tau}"),
    });
    for (i, a) in sorted.iter().enumerate().skip(1) {
        let h = OrderedSolutionHypergraph::enumerate(a, n)?.unordered();
        let limit = config.epsilon / (12.0 * factorial(a.k()));
        let (passed, detail) = match h.codegree_function() {
            Ok(f) => {
                let delta = f.evaluate_f64(tau);
                (delta <= limit, format!("delta(H{}, tau) = {delta} vs eps/(12 k!) = {limit}", i + 1))
            }
            Err(e) => (false, e.to_string()),
        };
        checks.push(PreflightCheck {
            name: format!("codegree-{}", i + 1),
            passed,
            detail,
        });
    }
    let t = sorted.iter().skip(1).map(|a| a.k()).max().unwrap_or(0);
    let needed = factorial(t) * config.epsilon;
    let zeta_n = config.zeta_n.min(n);
    let check = match zeta_estimate(zeta_n, &sorted, config.budget) {
        Ok(z) => {
            let (value, kind) = match &z.value {
                ScanValue::Exact { value } => (value.clone(), "exact"),
                ScanValue::Bounded { lower, .. } => (lower.clone(), "lower bound"),
            };
            let zeta = to_f64(&value);
            PreflightCheck {
                name: "zeta".into(),
                passed: zeta > needed,
                detail: format!(
                    "zeta proxy at n={zeta_n} ({kind}) = {} ~ {zeta} vs t! eps = {needed}",
                    fmt_fraction(&value)
                ),
            }
        }
        Err(e) => PreflightCheck {
            name: "zeta".into(),
            passed: false,
            detail: e.to_string(),
        },
    };
    checks.push(check);
    Ok(checks)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalogue::profile;
    use crate::linalg::ratio;

    fn schur2() -> Vec<RadoProfile> {
        vec![profile("schur").unwrap(), profile("schur").unwrap()]
    }

    #[test]
    fn scan_shape_and_determinism() {
        let cfg = ScanConfig {
            n_grid: vec![32],
            c_grid: vec![0.5, 4.0],
            trials: 10,
            seed: 1,
            budget: 1_000_000,
        };
        let a = threshold_scan(&schur2(), &cfg).unwrap();
        assert_eq!(a.cells.len(), 2);
        assert!(a.cells[0].successes <= a.cells[1].successes);
        assert_eq!(a.to_csv(), threshold_scan(&schur2(), &cfg).unwrap().to_csv());
        assert!(a.to_csv().starts_with("n,C,p,trials,successes,unknown,ci_low,ci_high\n"));
    }

    #[test]
    fn full_probability_matches_boundary() {
        let cfg = ScanConfig {
            n_grid: vec![8, 9],
            c_grid: vec![100.0],
            trials: 3,
            seed: 4,
            budget: 1_000_000,
        };
        let curve = threshold_scan(&schur2(), &cfg).unwrap();
        assert!(curve.cells.iter().all(|c| c.capped && c.p == 1.0));
        assert_eq!(curve.cells[0].successes, 0);
        assert_eq!(curve.cells[1].successes, 3);
    }

    #[test]
    fn tiny_probability_never_succeeds() {
        let cfg = ScanConfig {
            n_grid: vec![100],
            c_grid: vec![1e-3],
            trials: 20,
            seed: 2,
            budget: 1_000,
        };
        assert_eq!(threshold_scan(&schur2(), &cfg).unwrap().cells[0].successes, 0);
    }

    #[test]
    fn empty_grid_rejected() {
        let cfg = ScanConfig {
            n_grid: vec![],
            c_grid: vec![1.0],
            trials: 1,
            seed: 0,
            budget: 10,
        };
        assert!(threshold_scan(&schur2(), &cfg).is_err());
    }

    #[test]
    fn janson_single_edge() {
        let p = profile("schur").unwrap();
        let h = OrderedSolutionHypergraph::enumerate(&p, 3).unwrap();
        assert_eq!(h.edge_count(), 2);
        let counts = JansonCounts {
            k: 3,
            edges: 1,
            pair_counts: ColumnSet::nonempty_subsets(3).map(|s| (s, 0)).collect(),
            max_overlap: 0,
        };
        let w = WeightFunction::ones(3);
        let terms = counts.exact_terms(&ratio(1, 2), &w).unwrap();
        assert_eq!(terms.mu, ratio(1, 8 * 27));
        let b = terms.bound();
        assert_eq!(b.binding, "mu/2");
        assert!((b.bound - (-1.0f64 / 432.0).exp()).abs() < 1e-15);
        assert!(JansonCounts::new(&h).is_ok());
    }

    #[test]
    fn janson_decreasing_in_q() {
        let p = profile("schur").unwrap();
        let h = OrderedSolutionHypergraph::enumerate(&p, 50).unwrap();
        let w = WeightFunction::ones(3);
        let counts = JansonCounts::new(&h).unwrap();
        let mut prev = f64::INFINITY;
        for q in [ratio(1, 10), ratio(1, 4), ratio(1, 2), ratio(1, 1)] {
            let b = counts.exact_terms(&q, &w).unwrap().bound().bound;
            assert!(b < prev);
            prev = b;
        }
        let exact = counts.exact_terms(&ratio(1, 4), &w).unwrap();
        let float = counts.float_terms(0.25, &w).unwrap();
        assert!((to_f64(&exact.mu) - float.mu).abs() < 1e-12 * float.mu);
        assert!((to_f64(&exact.big_delta) - float.big_delta).abs() < 1e-9 * float.big_delta);
    }

    #[test]
    fn concentration_small() {
        let p = profile("schur").unwrap();
        let cfg = ConcentrationConfig {
            n: 400,
            q: 0.5,
            trials: 5,
            seed: 3,
            respect_parts: true,
        };
        let r = concentration_check(&p, &WeightFunction::ones(3), &cfg).unwrap();
        assert_eq!(r.rows.len(), 7);
        assert_eq!(r.min_frequency(), 1.0);
        let cfg = ConcentrationConfig { q: 1.0, respect_parts: false, ..cfg };
        let r = concentration_check(&p, &WeightFunction::ones(3), &cfg).unwrap();
        for row in &r.rows {
            assert_eq!(row.mean_count, row.projection_size as f64);
        }
    }

    #[test]
    fn preflight_reports() {
        let cfg = PreflightConfig {
            epsilon: 0.01,
            cprime: 1.0,
            zeta_n: 12,
            budget: 1_000_000,
        };
        let checks = preflight(&schur2(), 64, &cfg).unwrap();
        let names: Vec<&str> = checks.iter().map(|c| c.name.as_str()).collect();
        assert_eq!(names, ["epsilon", "tau", "codegree-2", "zeta"]);
    }
}

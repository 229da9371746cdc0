//! Additive weight functions on the coordinates of `A_1`, chosen so that
//! every coordinate lies in a set minimising `e(I) - w(I)/m(A_1, A_2)` and
//! that minimum equals `1 - 1/m(A_2)`.

use std::collections::BTreeMap;
use std::fmt;

use num_traits::{One, Zero};

use crate::error::{Error, Result};
use crate::fit::{log_log_slope, validate_grid};
use crate::hypergraph::projection_counts;
use crate::linalg::{fmt_fraction, int, parse_rational, to_f64, ColumnSet, Rational};
use crate::lp::{lexicographic_optimum, LinearProgram, LpOutcome, Relation};
use crate::rado::{m_asym, RadoProfile};

/// `e(I) = |I| - rk A + rk A_{Ī}` for every `I ⊆ [k]`, indexed by bitmask.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ExponentTable {
    k: usize,
    values: Vec<i64>,
}

impl ExponentTable {
    pub fn new(profile: &RadoProfile) -> Self {
        let k = profile.k();
        let rk = profile.rank() as i64;
        let values = (0..1u32 << k)
            .map(|bits| {
                let set = ColumnSet::from_bits(bits);
                set.len() as i64 - rk + profile.rank_of_columns(set.complement(k)) as i64
            })
            .collect();
        ExponentTable { k, values }
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn exponent(&self, set: ColumnSet) -> i64 {
        self.values[set.bits() as usize]
    }
}

/// `w : [k] -> [1, ∞)`, extended additively to sets.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct WeightFunction {
    weights: Vec<Rational>,
}

impl WeightFunction {
    pub fn new(weights: Vec<Rational>) -> Result<Self> {
        if weights.is_empty() {
            return Err(Error::input("weight function needs at least one coordinate"));
        }
        if let Some(i) = weights.iter().position(|w| *w < Rational::one()) {
            return Err(Error::input(format!("w({}) = {} is below 1", i + 1, fmt_fraction(&weights[i]))));
        }
        Ok(WeightFunction { weights })
    }

    pub fn ones(k: usize) -> Self {
        WeightFunction {
            weights: vec![Rational::one(); k],
        }
    }

    pub fn k(&self) -> usize {
        self.weights.len()
    }

    pub fn get(&self, i: usize) -> &Rational {
        &self.weights[i]
    }

    pub fn weights(&self) -> &[Rational] {
        &self.weights
    }

    pub fn of_set(&self, set: ColumnSet) -> Rational {
        set.iter().map(|i| &self.weights[i]).sum()
    }

    pub fn is_integral(&self) -> bool {
        self.weights.iter().all(|w| w.is_integer())
    }

    /// `{"1": "num/den", ...}` with 1-based keys.
    pub fn to_json(&self) -> String {
        let map: BTreeMap<usize, String> = self
            .weights
            .iter()
            .enumerate()
            .map(|(i, w)| (i + 1, fmt_fraction(w)))
            .collect();
        serde_json::to_string_pretty(&map).expect("string map serialises")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let map: BTreeMap<usize, String> =
            serde_json::from_str(text).map_err(|e| Error::input(format!("weight document: {e}")))?;
        let k = map.len();
        if map.keys().copied().ne(1..=k) {
            return Err(Error::input("weight keys must be 1..k"));
        }
        let weights = map.values().map(|v| parse_rational(v)).collect::<Result<_>>()?;
        WeightFunction::new(weights)
    }
}

impl fmt::Display for WeightFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self
            .weights
            .iter()
            .enumerate()
            .map(|(i, w)| format!("w({})={}", i + 1, fmt_fraction(w)))
            .collect();
        write!(f, "{}", parts.join(" "))
    }
}

/// The data the weight constraints depend on: exponents of `A_1`,
/// `m(A_1, A_2)` and `m(A_2)`.
#[derive(Clone, Debug)]
pub struct WeightContext {
    table: ExponentTable,
    m12: Rational,
    m2: Rational,
}

/// Index sets attaining `min_I (e(I) - w(I)/m(A_1, A_2))`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Minimisers {
    pub minimum: Rational,
    pub sets: Vec<ColumnSet>,
    /// Every coordinate lies in some minimiser.
    pub proper: bool,
}

impl WeightContext {
    /// Errors if either matrix is not Rado or `m(A_1) < m(A_2)`.
    pub fn new(a1: &RadoProfile, a2: &RadoProfile) -> Result<Self> {
        let m12 = m_asym(a1, a2)?.value;
        Ok(WeightContext {
            table: ExponentTable::new(a1),
            m12,
            m2: a2.m()?,
        })
    }

    pub fn k(&self) -> usize {
        self.table.k()
    }

    pub fn exponents(&self) -> &ExponentTable {
        &self.table
    }

    pub fn m12(&self) -> &Rational {
        &self.m12
    }

    pub fn m2(&self) -> &Rational {
        &self.m2
    }

    /// `1 - 1/m(A_2)`.
    pub fn target(&self) -> Rational {
        Rational::one() - self.m2.recip()
    }

    fn check_len(&self, w: &WeightFunction) -> Result<()> {
        if w.k() != self.k() {
            return Err(Error::input(format!("weight has {} coordinates, matrix has {}", w.k(), self.k())));
        }
        Ok(())
    }

    /// `e(I) - w(I)/m(A_1, A_2)`.
    pub fn objective(&self, w: &WeightFunction, set: ColumnSet) -> Rational {
        int(self.table.exponent(set)) - w.of_set(set) / &self.m12
    }

    /// `r_x(w) = min_{I ∋ x} (e(I) - w(I)/m(A_1, A_2)) - 1 + 1/m(A_2)`.
    pub fn r_x(&self, w: &WeightFunction, x: usize) -> Result<Rational> {
        self.check_len(w)?;
        if x >= self.k() {
            return Err(Error::input(format!("coordinate {} out of range", x + 1)));
        }
        let min = ColumnSet::nonempty_subsets(self.k())
            .filter(|s| s.contains(x))
            .map(|s| self.objective(w, s))
            .min()
            .expect("the singleton is a candidate");
        Ok(min - self.target())
    }

    /// `r_x(w) = 0` for every `x` and `w >= 1`: the defining property of the
    /// solver output, checked by evaluating every subset.
    pub fn verify(&self, w: &WeightFunction) -> Result<bool> {
        self.check_len(w)?;
        if w.weights().iter().any(|v| *v < Rational::one()) {
            return Ok(false);
        }
        for x in 0..self.k() {
            if !self.r_x(w, x)?.is_zero() {
                return Ok(false);
            }
        }
        Ok(true)
    }

    /// Every constraint `e(I) - w(I)/m(A_1, A_2) >= 1 - 1/m(A_2)` holds.
    pub fn is_feasible(&self, w: &WeightFunction) -> Result<bool> {
        self.check_len(w)?;
        let target = self.target();
        Ok(ColumnSet::nonempty_subsets(self.k()).all(|s| self.objective(w, s) >= target))
    }

    pub fn minimiser_sets(&self, w: &WeightFunction) -> Result<Minimisers> {
        self.check_len(w)?;
        let values: Vec<(ColumnSet, Rational)> = ColumnSet::nonempty_subsets(self.k())
            .map(|s| (s, self.objective(w, s)))
            .collect();
        let minimum = values.iter().map(|(_, v)| v.clone()).min().expect("k >= 1");
        let sets: Vec<ColumnSet> = values
            .into_iter()
            .filter(|(_, v)| *v == minimum)
            .map(|(s, _)| s)
            .collect();
        let covered = sets.iter().fold(ColumnSet::empty(), |acc, s| acc.union(*s));
        Ok(Minimisers {
            minimum,
            proper: covered == ColumnSet::full(self.k()),
            sets,
        })
    }

    /// `m(A_1, A_2)/m(A_2) + m(A_1, A_2)(e({x}) - 1)`, the singleton cap on `w(x)`.
    pub fn singleton_cap(&self, x: usize) -> Rational {
        &self.m12 / &self.m2 + &self.m12 * int(self.table.exponent(ColumnSet::singleton(x)) - 1)
    }

    /// The lexicographically smallest maximiser of `Σ w(i)` over the
    /// feasible region, found as `w = 1 + v` with `v >= 0`.
    pub fn solve(&self) -> Result<WeightFunction> {
        let k = self.k();
        let mut lp = LinearProgram::new(k);
        lp.maximise(vec![Rational::one(); k]);
        let target = self.target();
        for s in ColumnSet::nonempty_subsets(k) {
            // w(I) <= m12 (e(I) - 1 + 1/m2), shifted by |I|.
            let rhs = &self.m12 * (int(self.table.exponent(s)) - &target) - int(s.len() as i64);
            let row = (0..k).map(|i| if s.contains(i) { Rational::one() } else { Rational::zero() }).collect();
            lp.add(row, Relation::Le, rhs);
        }
        match lexicographic_optimum(&lp) {
            LpOutcome::Optimal { x, .. } => {
                let w = WeightFunction::new(x.into_iter().map(|v| v + Rational::one()).collect())?;
                if !self.verify(&w)? {
                    return Err(Error::Internal(format!("weight LP optimum {w} fails the r_x audit")));
                }
                Ok(w)
            }
            LpOutcome::Infeasible => Err(Error::Internal(
                "weight LP infeasible although w = 1 should be feasible".into(),
            )),
            LpOutcome::Unbounded => Err(Error::Internal("weight LP unbounded".into())),
        }
    }
}

/// `r_x(w)` for the pair `(A_1, A_2)`.
pub fn r_x(w: &WeightFunction, x: usize, a1: &RadoProfile, a2: &RadoProfile) -> Result<Rational> {
    WeightContext::new(a1, a2)?.r_x(w, x)
}

/// The solver output for `(A_1, A_2)`; see [`WeightContext::solve`].
pub fn solve_weights(a1: &RadoProfile, a2: &RadoProfile) -> Result<WeightFunction> {
    WeightContext::new(a1, a2)?.solve()
}

pub fn minimiser_sets(w: &WeightFunction, a1: &RadoProfile, a2: &RadoProfile) -> Result<Minimisers> {
    WeightContext::new(a1, a2)?.minimiser_sets(w)
}

/// One grid point of the boundedness audit.
#[derive(Clone, Debug, PartialEq)]
pub struct BoundednessPoint {
    pub n: u32,
    /// `ln min_I p^{w(I)} |H_I|` with `p = n^{-1/m(A_1, A_2)}`.
    pub log_minimum: f64,
    /// Sets attaining the finite-n minimum (within 1e-9 in log space).
    pub empirical_minimisers: Vec<ColumnSet>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct BoundednessAudit {
    pub points: Vec<BoundednessPoint>,
    pub slope: f64,
    /// `1 - 1/m(A_2)`, the growth exponent of `τ n` with `τ = n^{-1/m(A_2)}`.
    pub target: Rational,
}

impl BoundednessAudit {
    pub fn deviation(&self) -> f64 {
        self.slope - to_f64(&self.target)
    }
}

/// Fits the growth of `min_I p^{w(I)} |H_I|` against `n` and compares it
/// with `1 - 1/m(A_2)`.
pub fn boundedness_audit(
    a1: &RadoProfile,
    a2: &RadoProfile,
    w: &WeightFunction,
    grid: &[u32],
) -> Result<BoundednessAudit> {
    validate_grid(grid)?;
    let ctx = WeightContext::new(a1, a2)?;
    ctx.check_len(w)?;
    let inv_m12 = to_f64(&ctx.m12.recip());
    let mut points = Vec::with_capacity(grid.len());
    for &n in grid {
        let counts = projection_counts(a1, n)?;
        let ln_n = (n as f64).ln();
        let logs: Vec<(ColumnSet, f64)> = counts
            .iter()
            .map(|&(s, c)| {
                let val = if c == 0 {
                    f64::NEG_INFINITY
                } else {
                    -to_f64(&w.of_set(s)) * inv_m12 * ln_n + (c as f64).ln()
                };
                (s, val)
            })
            .collect();
        let min = logs.iter().map(|(_, v)| *v).fold(f64::INFINITY, f64::min);
        if !min.is_finite() {
            return Err(Error::input(format!("empty projection at n = {n}")));
        }
        points.push(BoundednessPoint {
            n,
            log_minimum: min,
            empirical_minimisers: logs.iter().filter(|(_, v)| *v <= min + 1e-9).map(|(s, _)| *s).collect(),
        });
    }
    let ys: Vec<f64> = points.iter().map(|p| p.log_minimum.exp()).collect();
    let slope = log_log_slope(grid, &ys)?;
    Ok(BoundednessAudit {
        points,
        slope,
        target: ctx.target(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalogue::{self, profile};
    use crate::linalg::ratio;

    fn ctx(a: &str, b: &str) -> WeightContext {
        WeightContext::new(&profile(a).unwrap(), &profile(b).unwrap()).unwrap()
    }

    #[test]
    fn exponent_table() {
        let t = ExponentTable::new(&profile("schur").unwrap());
        assert_eq!(t.exponent(ColumnSet::singleton(0)), 1);
        assert_eq!(t.exponent(ColumnSet::full(3)), 2);
        assert_eq!(t.exponent(ColumnSet::from_indices([0, 1])), 2);
        let t = ExponentTable::new(&profile("ap4").unwrap());
        assert!((0..4).all(|i| t.exponent(ColumnSet::singleton(i)) == 1));
        assert_eq!(t.exponent(ColumnSet::full(4)), 2);
    }

    #[test]
    fn r_x_examples() {
        for (a, b) in [("schur", "schur"), ("ap4", "ap3")] {
            let c = ctx(a, b);
            let ones = WeightFunction::ones(c.k());
            for x in 0..c.k() {
                assert_eq!(c.r_x(&ones, x).unwrap(), Rational::zero(), "{a}/{b}");
            }
        }
        let c = ctx("schur", "schur");
        let raised = WeightFunction::new(vec![ratio(3, 2), int(1), int(1)]).unwrap();
        assert!(c.r_x(&raised, 0).unwrap() < Rational::zero());
    }

    #[test]
    fn minimiser_examples() {
        let c = ctx("schur", "schur");
        let m = c.minimiser_sets(&WeightFunction::ones(3)).unwrap();
        assert!(m.proper);
        for s in [
            ColumnSet::singleton(0),
            ColumnSet::singleton(1),
            ColumnSet::singleton(2),
            ColumnSet::full(3),
        ] {
            assert!(m.sets.contains(&s));
        }
        let c = ctx("ap4", "ap3");
        let m = c.minimiser_sets(&WeightFunction::ones(4)).unwrap();
        assert_eq!(m.sets, vec![ColumnSet::full(4)]);
        assert!(m.proper);
    }

    #[test]
    fn solver_examples() {
        for (a, b) in [("schur", "schur"), ("ap4", "ap3"), ("ap3", "ap3")] {
            let c = ctx(a, b);
            let w = c.solve().unwrap();
            assert!(c.verify(&w).unwrap());
            assert_eq!(w, WeightFunction::ones(c.k()), "{a}/{b}");
        }
    }

    #[test]
    fn solver_verifies_for_every_catalogue_pair() {
        // Covers m(A_2) != 2, where 1/m(A_2) and 1 - 1/m(A_2) differ.
        for a in catalogue::all_names() {
            for b in catalogue::all_names() {
                let (p1, p2) = (catalogue::profile(a).unwrap(), catalogue::profile(b).unwrap());
                if p1.m().unwrap() < p2.m().unwrap() {
                    continue;
                }
                let c = WeightContext::new(&p1, &p2).unwrap();
                let w = c.solve().unwrap();
                assert!(c.verify(&w).unwrap(), "{a}/{b}");
                assert!(c.is_feasible(&WeightFunction::ones(c.k())).unwrap(), "{a}/{b}");
            }
        }
    }

    #[test]
    fn json_round_trip() {
        let w = WeightFunction::new(vec![int(1), ratio(4, 3)]).unwrap();
        let text = w.to_json();
        assert!(text.contains("\"2\": \"4/3\""));
        assert_eq!(WeightFunction::from_json(&text).unwrap(), w);
        assert!(WeightFunction::from_json("{\"1\": \"1/2\"}").is_err());
        assert!(WeightFunction::from_json("{\"2\": \"1\"}").is_err());
    }
}

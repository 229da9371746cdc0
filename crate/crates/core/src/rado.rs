//! Rado matrices: the columns condition, irredundancy, full row rank, and the
//! symmetric and asymmetric densities.

use std::fmt;
use std::ops::ControlFlow;

use num_bigint::BigInt;
use num_traits::{One, ToPrimitive, Zero};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg::{fmt_fraction, in_rational_span, int, ColumnSet, IntMatrix, Rational};
use crate::solve::{Domain, Plan};

/// Ordered partition `C_1, ..., C_t` of the columns: `C_1` sums to zero and
/// each later block sums into the span of the columns before it.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ColumnsConditionCertificate {
    blocks: Vec<ColumnSet>,
}

impl ColumnsConditionCertificate {
    pub fn new(blocks: Vec<ColumnSet>) -> Self {
        ColumnsConditionCertificate { blocks }
    }

    pub fn blocks(&self) -> &[ColumnSet] {
        &self.blocks
    }

    /// Checks the certificate against `a` with exact arithmetic.
    pub fn verify(&self, a: &IntMatrix) -> Result<()> {
        let k = a.cols();
        let mut seen = ColumnSet::empty();
        for (i, &block) in self.blocks.iter().enumerate() {
            if block.is_empty() {
                return Err(Error::validation(format!("block C_{} is empty", i + 1)));
            }
            if !block.is_subset(ColumnSet::full(k)) {
                return Err(Error::validation(format!("block {block} is out of range")));
            }
            if !block.intersection(seen).is_empty() {
                return Err(Error::validation(format!("block {block} overlaps earlier blocks")));
            }
            let sum = a.column_sum(block);
            let ok = if i == 0 {
                sum.iter().all(Zero::is_zero)
            } else {
                let span: Vec<Vec<BigInt>> = seen.iter().map(|c| a.column(c)).collect();
                in_rational_span(&span, &sum)?
            };
            if !ok {
                return Err(Error::validation(format!(
                    "block C_{} = {block} fails the columns condition",
                    i + 1
                )));
            }
            seen = seen.union(block);
        }
        if seen != ColumnSet::full(k) {
            return Err(Error::validation("certificate does not cover every column"));
        }
        Ok(())
    }
}

impl fmt::Display for ColumnsConditionCertificate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self
            .blocks
            .iter()
            .enumerate()
            .map(|(i, b)| format!("C{}={b}", i + 1))
            .collect();
        write!(f, "{}", parts.join(" "))
    }
}

/// Searches for a columns-condition certificate.
///
/// Blocks are tried by increasing size and the first admissible one is taken.
/// No backtracking is needed: if some ordered partition completes from the
/// current prefix, then after appending any block `T` whose sum lies in the
/// current span, the old remaining blocks minus `T` still complete it (each
/// differs from the original by a sum of columns of `T`). So `None` is a proof
/// that the matrix is not partition-regular.
pub fn columns_condition(a: &IntMatrix) -> Option<ColumnsConditionCertificate> {
    let k = a.cols();
    let mut used = ColumnSet::empty();
    let mut blocks = Vec::new();
    while used != ColumnSet::full(k) {
        let remaining = used.complement(k);
        let span: Vec<Vec<BigInt>> = used.iter().map(|c| a.column(c)).collect();
        let mut candidates: Vec<ColumnSet> = remaining.subsets().filter(|s| !s.is_empty()).collect();
        candidates.sort_by_key(|s| (s.len(), s.bits()));
        let next = candidates.into_iter().find(|&t| {
            let sum = a.column_sum(t);
            if blocks.is_empty() {
                sum.iter().all(Zero::is_zero)
            } else {
                in_rational_span(&span, &sum).expect("equal dimensions")
            }
        })?;
        blocks.push(next);
        used = used.union(next);
    }
    Some(ColumnsConditionCertificate { blocks })
}

/// Outcome of the bounded search for a solution with pairwise distinct entries.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "verdict", rename_all = "kebab-case")]
pub enum Irredundancy {
    Confirmed { witness: Vec<u32> },
    RefutedUpToBound { bound: u32 },
    Unknown { reason: String },
}

impl Irredundancy {
    pub fn is_confirmed(&self) -> bool {
        matches!(self, Irredundancy::Confirmed { .. })
    }

    pub fn witness(&self) -> Option<&[u32]> {
        match self {
            Irredundancy::Confirmed { witness } => Some(witness),
            _ => None,
        }
    }
}

impl fmt::Display for Irredundancy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Irredundancy::Confirmed { witness } => {
                let w: Vec<String> = witness.iter().map(|v| v.to_string()).collect();
                write!(f, "confirmed, witness ({})", w.join(","))
            }
            Irredundancy::RefutedUpToBound { bound } => {
                write!(f, "refuted up to bound {bound}")
            }
            Irredundancy::Unknown { reason } => write!(f, "unknown ({reason})"),
        }
    }
}

/// Default search bound for irredundancy: `5k(1 + max |entry|)`.
pub fn default_search_bound(a: &IntMatrix) -> u32 {
    let max = a.max_abs_entry().to_u32().unwrap_or(u32::MAX / 16);
    (5 * a.cols() as u32).saturating_mul(1 + max)
}

/// Work cap for a single irredundancy search, in candidate assignments.
const IRREDUNDANCY_WORK_CAP: f64 = 2e8;

/// Looks for `x in [bound]^k` with `Ax = 0` and pairwise distinct entries.
///
/// Bounds are tried in increasing order, so the witness minimises the largest
/// entry; among those it is lexicographically smallest.
pub fn check_irredundant(a: &IntMatrix, search_bound: u32) -> Irredundancy {
    let k = a.cols();
    let reduced = a.select_rows(&a.independent_rows());
    if reduced.rank() == 0 {
        // Every vector is a solution.
        return if search_bound as usize >= k {
            Irredundancy::Confirmed {
                witness: (1..=k as u32).collect(),
            }
        } else {
            Irredundancy::RefutedUpToBound { bound: search_bound }
        };
    }
    let mut spent = 0.0;
    for b in (k as u32).max(1)..=search_bound {
        let plan = match Plan::new(&reduced, vec![Domain::upto(b); k]) {
            Ok(p) => p,
            Err(e) => {
                return Irredundancy::Unknown {
                    reason: e.to_string(),
                }
            }
        };
        spent += plan.cost_estimate();
        if spent > IRREDUNDANCY_WORK_CAP {
            return Irredundancy::Unknown {
                reason: format!("search through bound {b} exceeds the work cap"),
            };
        }
        let mut best: Option<Vec<u32>> = None;
        let _ = plan.run_homogeneous(|x| {
            if best.as_deref().is_none_or(|cur| x < cur) {
                best = Some(x.to_vec());
            }
            ControlFlow::Continue(())
        });
        if let Some(witness) = best {
            return Irredundancy::Confirmed { witness };
        }
    }
    Irredundancy::RefutedUpToBound { bound: search_bound }
}

/// A density value with one maximising column set.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Density {
    pub value: Rational,
    pub maximiser: ColumnSet,
}

impl fmt::Display for Density {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{} (~{:.6}) at W={}",
            fmt_fraction(&self.value),
            crate::linalg::to_f64(&self.value),
            self.maximiser
        )
    }
}

/// Column sets with at least two members, largest first (then by bitmask),
/// so ties resolve to the largest maximiser.
fn density_candidates(k: usize) -> Vec<ColumnSet> {
    let mut ws: Vec<ColumnSet> = ColumnSet::nonempty_subsets(k).filter(|w| w.len() >= 2).collect();
    ws.sort_by_key(|w| (std::cmp::Reverse(w.len()), w.bits()));
    ws
}

/// `max (|W|-1)/(|W|-1+rk A_{W̄}-rk A)` over `|W| >= 2`, by exhaustive enumeration.
pub fn symmetric_density(a: &IntMatrix) -> Result<Density> {
    let k = a.cols();
    if k < 2 {
        return Err(Error::validation("density needs at least two columns"));
    }
    let rk = a.rank() as i64;
    let mut best: Option<Density> = None;
    for w in density_candidates(k) {
        let size = w.len() as i64;
        let rk_bar = a.rank_of_columns(w.complement(k)) as i64;
        let den = size - 1 + rk_bar - rk;
        if den <= 0 {
            return Err(Error::validation(format!(
                "nonpositive density denominator {den} at W={w}; the matrix is not a Rado matrix"
            )));
        }
        let value = Rational::new(BigInt::from(size - 1), BigInt::from(den));
        if best.as_ref().is_none_or(|b| value > b.value) {
            best = Some(Density { value, maximiser: w });
        }
    }
    Ok(best.expect("k >= 2 gives at least one candidate"))
}

/// `max |W|/(|W|-rk A+rk A_{W̄}-1+1/m_b)` over `|W| >= 2`.
pub fn asymmetric_density(a: &IntMatrix, m_b: &Rational) -> Result<Density> {
    let k = a.cols();
    if k < 2 {
        return Err(Error::validation("density needs at least two columns"));
    }
    if *m_b <= Rational::zero() {
        return Err(Error::input("m(B) must be positive"));
    }
    let rk = a.rank() as i64;
    let inv_mb = m_b.recip();
    let mut best: Option<Density> = None;
    for w in density_candidates(k) {
        let size = w.len() as i64;
        let rk_bar = a.rank_of_columns(w.complement(k)) as i64;
        let den = int(size - rk + rk_bar - 1) + &inv_mb;
        if den <= Rational::zero() {
            return Err(Error::validation(format!(
                "nonpositive density denominator at W={w}"
            )));
        }
        let value = int(size) / den;
        if best.as_ref().is_none_or(|b| value > b.value) {
            best = Some(Density { value, maximiser: w });
        }
    }
    Ok(best.expect("k >= 2 gives at least one candidate"))
}

/// A validated matrix with its partition-regularity certificate,
/// irredundancy verdict, rank data and density.
///
/// Rows that are linear combinations of earlier rows are dropped on
/// construction (the solution set does not change); `dropped_rows` records
/// which.
#[derive(Clone, Debug)]
pub struct RadoProfile {
    name: String,
    input: IntMatrix,
    matrix: IntMatrix,
    dropped_rows: Vec<usize>,
    rank: usize,
    certificate: Option<ColumnsConditionCertificate>,
    irredundancy: Irredundancy,
    density: Option<Density>,
    density_issue: Option<String>,
}

impl PartialEq for RadoProfile {
    fn eq(&self, other: &Self) -> bool {
        self.matrix == other.matrix
    }
}

impl RadoProfile {
    pub fn new(name: impl Into<String>, matrix: IntMatrix) -> Self {
        let bound = default_search_bound(&matrix);
        Self::with_search_bound(name, matrix, bound)
    }

    pub fn with_search_bound(name: impl Into<String>, input: IntMatrix, search_bound: u32) -> Self {
        let kept = input.independent_rows();
        let dropped_rows = (0..input.rows()).filter(|r| !kept.contains(r)).collect();
        let matrix = if kept.is_empty() {
            input.clone()
        } else {
            input.select_rows(&kept)
        };
        let rank = matrix.rank();
        let certificate = columns_condition(&matrix);
        let irredundancy = check_irredundant(&matrix, search_bound);
        Self::assemble(name.into(), input, matrix, dropped_rows, rank, certificate, irredundancy)
    }

    fn assemble(
        name: String,
        input: IntMatrix,
        matrix: IntMatrix,
        dropped_rows: Vec<usize>,
        rank: usize,
        certificate: Option<ColumnsConditionCertificate>,
        irredundancy: Irredundancy,
    ) -> Self {
        let (density, density_issue) = if certificate.is_some() {
            match symmetric_density(&matrix) {
                Ok(d) => (Some(d), None),
                Err(e) => (None, Some(e.to_string())),
            }
        } else {
            (None, None)
        };
        RadoProfile {
            name,
            input,
            matrix,
            dropped_rows,
            rank,
            certificate,
            irredundancy,
            density,
            density_issue,
        }
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    /// The matrix as given.
    pub fn input_matrix(&self) -> &IntMatrix {
        &self.input
    }

    /// The full-row-rank matrix used for all computations.
    pub fn matrix(&self) -> &IntMatrix {
        &self.matrix
    }

    pub fn k(&self) -> usize {
        self.matrix.cols()
    }

    pub fn rank(&self) -> usize {
        self.rank
    }

    pub fn rank_of_columns(&self, set: ColumnSet) -> usize {
        self.matrix.rank_of_columns(set)
    }

    pub fn dropped_rows(&self) -> &[usize] {
        &self.dropped_rows
    }

    /// Whether the input already had full row rank.
    pub fn input_full_row_rank(&self) -> bool {
        self.dropped_rows.is_empty()
    }

    pub fn is_partition_regular(&self) -> bool {
        self.certificate.is_some()
    }

    pub fn certificate(&self) -> Option<&ColumnsConditionCertificate> {
        self.certificate.as_ref()
    }

    pub fn irredundancy(&self) -> &Irredundancy {
        &self.irredundancy
    }

    pub fn density_issue(&self) -> Option<&str> {
        self.density_issue.as_deref()
    }

    /// Partition-regular, irredundant (confirmed) and of full row rank after repair.
    pub fn is_rado(&self) -> bool {
        self.is_partition_regular() && self.irredundancy.is_confirmed() && self.density.is_some()
    }

    /// `m(A)` with a maximising `W`; errors unless the profile is a Rado matrix.
    pub fn m_density(&self) -> Result<&Density> {
        if !self.is_partition_regular() {
            return Err(Error::validation(format!("{} is not partition-regular", self.name)));
        }
        if !self.irredundancy.is_confirmed() {
            return Err(Error::validation(format!(
                "{} is not confirmed irredundant: {}",
                self.name, self.irredundancy
            )));
        }
        match &self.density {
            Some(d) => Ok(d),
            None => Err(Error::validation(
                self.density_issue
                    .clone()
                    .unwrap_or_else(|| "density unavailable".into()),
            )),
        }
    }

    /// `m(A) - 1 > 0`, the exponent `1 - 1/m(A)` and friends need this.
    pub fn m(&self) -> Result<Rational> {
        self.m_density().map(|d| d.value.clone())
    }

    /// Checks the Rado premises and returns a validation error naming the
    /// first one that fails.
    pub fn require_rado(&self) -> Result<()> {
        self.m_density().map(|_| ())
    }
}

/// `m(A, B)` with a maximising `W`. Errors if either profile is not a Rado
/// matrix or if `m(A) < m(B)`.
pub fn m_asym(a: &RadoProfile, b: &RadoProfile) -> Result<Density> {
    let m_a = a.m()?;
    let m_b = b.m()?;
    if m_a < m_b {
        return Err(Error::Ordering {
            m_a: fmt_fraction(&m_a),
            m_b: fmt_fraction(&m_b),
        });
    }
    asymmetric_density(a.matrix(), &m_b)
}

/// The density governing the threshold for matrices sorted by decreasing
/// `m`: `m(A_1, A_2)` for two or more, `m(A_1)` for one.
pub fn threshold_density(profiles: &[RadoProfile]) -> Result<Rational> {
    match profiles {
        [] => Err(Error::input("no matrices")),
        [a] => a.m(),
        [a, b, ..] => Ok(m_asym(a, b)?.value),
    }
}

/// Stable sort by decreasing `m(A)`. Returns whether the order changed.
pub fn sort_by_density(profiles: &mut [RadoProfile]) -> Result<bool> {
    let ms: Vec<Rational> = profiles.iter().map(|p| p.m()).collect::<Result<_>>()?;
    let mut order: Vec<usize> = (0..profiles.len()).collect();
    order.sort_by(|&i, &j| ms[j].cmp(&ms[i]));
    let changed = order.iter().enumerate().any(|(pos, &i)| pos != i);
    let sorted: Vec<RadoProfile> = order.iter().map(|&i| profiles[i].clone()).collect();
    profiles.clone_from_slice(&sorted);
    Ok(changed)
}

/// Block-diagonal profile `diag(A_1, ..., A_r)`. Its certificate is the
/// level-wise union of the blocks' certificates, and its irredundancy witness
/// concatenates the blocks' witnesses, each later one scaled past the
/// largest entry so far.
pub fn diag_block(profiles: &[RadoProfile]) -> Result<RadoProfile> {
    match profiles {
        [] => return Err(Error::input("diag_block needs at least one profile")),
        [single] => return Ok(single.clone()),
        _ => {}
    }
    for p in profiles {
        if !p.is_partition_regular() {
            return Err(Error::validation(format!("{} is not partition-regular", p.name())));
        }
    }
    let blocks: Vec<&IntMatrix> = profiles.iter().map(|p| p.matrix()).collect();
    let matrix = IntMatrix::block_diagonal(&blocks)?;

    let depth = profiles
        .iter()
        .map(|p| p.certificate().unwrap().blocks().len())
        .max()
        .unwrap_or(0);
    let mut levels = vec![ColumnSet::empty(); depth];
    let mut offset = 0;
    for p in profiles {
        for (lvl, block) in p.certificate().unwrap().blocks().iter().enumerate() {
            levels[lvl] = levels[lvl].union(ColumnSet::from_bits(block.bits() << offset));
        }
        offset += p.k();
    }
    let certificate = ColumnsConditionCertificate::new(levels);
    certificate.verify(&matrix)?;

    let irredundancy = if profiles.iter().all(|p| p.irredundancy().is_confirmed()) {
        let mut witness: Vec<u32> = Vec::new();
        for p in profiles {
            let w = p.irredundancy().witness().unwrap();
            let scale = witness.iter().copied().max().unwrap_or(0) + 1;
            witness.extend(w.iter().map(|&v| v * scale));
        }
        Irredundancy::Confirmed { witness }
    } else {
        check_irredundant(&matrix, default_search_bound(&matrix))
    };

    let name = profiles.iter().map(|p| p.name()).collect::<Vec<_>>().join("+");
    let rank = matrix.rank();
    Ok(RadoProfile::assemble(
        name,
        matrix.clone(),
        matrix,
        Vec::new(),
        rank,
        Some(certificate),
        irredundancy,
    ))
}

/// Outcome of the exhaustive structural checks on one matrix.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct StructuralReport {
    /// Singletons `I` with `rk A - rk A_{Ī} != 0`.
    pub depend_violations: Vec<ColumnSet>,
    /// Sets `|I| >= 2` where `k-|I|-rk A_{Ī} <= k-rk A-1-(|I|-1)/m(A)` fails.
    pub luck_violations: Vec<ColumnSet>,
    /// Whether `m(A) > 1`.
    pub density_above_one: bool,
}

impl StructuralReport {
    pub fn holds(&self) -> bool {
        self.depend_violations.is_empty() && self.luck_violations.is_empty() && self.density_above_one
    }
}

/// Checks the three structural facts for irredundant partition-regular
/// matrices over every index set.
pub fn structural_checks(a: &RadoProfile) -> Result<StructuralReport> {
    let m = a.m()?;
    let k = a.k();
    let rk = a.rank() as i64;
    let mut report = StructuralReport {
        density_above_one: m > Rational::one(),
        ..Default::default()
    };
    for i in ColumnSet::nonempty_subsets(k) {
        let rk_bar = a.rank_of_columns(i.complement(k)) as i64;
        let size = i.len() as i64;
        if size == 1 {
            if rk - rk_bar != 0 {
                report.depend_violations.push(i);
            }
        } else {
            let lhs = int(k as i64 - size - rk_bar);
            let rhs = int(k as i64 - rk - 1) - int(size - 1) / &m;
            if lhs > rhs {
                report.luck_violations.push(i);
            }
        }
    }
    Ok(report)
}

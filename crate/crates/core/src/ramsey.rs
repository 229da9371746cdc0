//! Finite asymmetric Rado properties `X → (A_1, ..., A_r)`: exact decisions
//! by DPLL search, monochromatic counts, and min-max scans over colourings.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::ops::ControlFlow;

use num_bigint::BigInt;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg::Rational;
use crate::rado::RadoProfile;
use crate::solve::{Domain, Plan};

/// Default search-node budget.
pub const DEFAULT_BUDGET: u64 = 1_000_000_000;

/// Largest `n` accepted by the colouring scans.
pub const SCAN_SIZE_CAP: u32 = 128;

const MAX_COLOURS: usize = 32;
const UNASSIGNED: u8 = u8::MAX;

/// A total colouring of a ground set; colours are `0..r`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Colouring {
    elements: Vec<u32>,
    colours: Vec<usize>,
}

impl Colouring {
    /// `elements` must be strictly increasing.
    pub fn new(elements: Vec<u32>, colours: Vec<usize>) -> Result<Self> {
        if elements.len() != colours.len() {
            return Err(Error::input("colouring must assign one colour per element"));
        }
        if elements.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::input("colouring elements must be strictly increasing"));
        }
        Ok(Colouring { elements, colours })
    }

    /// Builds a colouring of the union of `classes`, class `i` getting colour `i`.
    pub fn from_classes(classes: &[Vec<u32>]) -> Result<Self> {
        let mut pairs: Vec<(u32, usize)> = classes
            .iter()
            .enumerate()
            .flat_map(|(c, class)| class.iter().map(move |&x| (x, c)))
            .collect();
        pairs.sort_unstable();
        if pairs.windows(2).any(|w| w[0].0 == w[1].0) {
            return Err(Error::input("colour classes overlap"));
        }
        Colouring::new(pairs.iter().map(|p| p.0).collect(), pairs.iter().map(|p| p.1).collect())
    }

    pub fn elements(&self) -> &[u32] {
        &self.elements
    }

    pub fn colours(&self) -> &[usize] {
        &self.colours
    }

    pub fn colour_of(&self, x: u32) -> Option<usize> {
        self.elements.binary_search(&x).ok().map(|i| self.colours[i])
    }

    pub fn class(&self, colour: usize) -> Vec<u32> {
        self.elements
            .iter()
            .zip(&self.colours)
            .filter(|(_, &c)| c == colour)
            .map(|(&x, _)| x)
            .collect()
    }

    /// Lines `element colour`, colours printed 1-based.
    pub fn to_lines(&self) -> String {
        let mut s = String::new();
        for (x, c) in self.elements.iter().zip(&self.colours) {
            let _ = writeln!(s, "{x} {}", c + 1);
        }
        s
    }
}

/// Ordered distinct-entry solutions of `A x = 0` with every entry in `class`.
pub fn count_solutions_in(class: &[u32], a: &RadoProfile) -> Result<u64> {
    let mut values = class.to_vec();
    values.sort_unstable();
    values.dedup();
    if values.len() < a.k() {
        return Ok(0);
    }
    let plan = Plan::new(a.matrix(), vec![Domain::list(values); a.k()])?;
    let mut count = 0u64;
    let _ = plan.run_homogeneous(|_| {
        count += 1;
        ControlFlow::Continue(())
    });
    Ok(count)
}

/// Ordered monochromatic solutions of `A` in colour class `colour`.
pub fn count_monochromatic(colouring: &Colouring, a: &RadoProfile, colour: usize) -> Result<u64> {
    count_solutions_in(&colouring.class(colour), a)
}

/// A ground set with one matrix per colour.
#[derive(Clone, Debug)]
pub struct RamseyInstance {
    ground: Vec<u32>,
    matrices: Vec<RadoProfile>,
}

impl RamseyInstance {
    pub fn new(mut ground: Vec<u32>, matrices: Vec<RadoProfile>) -> Result<Self> {
        if matrices.is_empty() {
            return Err(Error::input("at least one colour is required"));
        }
        if matrices.len() > MAX_COLOURS {
            return Err(Error::input(format!("at most {MAX_COLOURS} colours are supported")));
        }
        for m in &matrices {
            m.require_rado()?;
        }
        ground.sort_unstable();
        ground.dedup();
        if ground.first() == Some(&0) {
            return Err(Error::input("ground set elements must be positive"));
        }
        Ok(RamseyInstance { ground, matrices })
    }

    /// `X = [n]`.
    pub fn interval(n: u32, matrices: Vec<RadoProfile>) -> Result<Self> {
        RamseyInstance::new((1..=n).collect(), matrices)
    }

    pub fn ground(&self) -> &[u32] {
        &self.ground
    }

    pub fn matrices(&self) -> &[RadoProfile] {
        &self.matrices
    }

    pub fn colours(&self) -> usize {
        self.matrices.len()
    }

    /// For each colour, the previous colour carrying the same matrix.
    fn interchangeable_predecessor(&self) -> Vec<Option<usize>> {
        (0..self.colours())
            .map(|c| (0..c).rev().find(|&d| self.matrices[d].matrix() == self.matrices[c].matrix()))
            .collect()
    }
}

/// Per-colour solution supports over the ground set, as element indices.
struct Constraints {
    elements: usize,
    colours: usize,
    /// `(colour, start, len, orderings)` per edge; members in `members[start..start+len]`.
    edges: Vec<(usize, usize, usize, u64)>,
    members: Vec<u32>,
    incidence: Vec<Vec<u32>>,
}

impl Constraints {
    fn build(inst: &RamseyInstance) -> Result<Constraints> {
        let ground = &inst.ground;
        let mut supports_by_matrix: Vec<(usize, BTreeMap<Vec<u32>, u64>)> = Vec::new();
        let mut edges = Vec::new();
        let mut members = Vec::new();
        let mut incidence = vec![Vec::new(); ground.len()];
        for (colour, a) in inst.matrices.iter().enumerate() {
            let reuse = supports_by_matrix
                .iter()
                .position(|(c, _)| inst.matrices[*c].matrix() == a.matrix());
            let idx = match reuse {
                Some(i) => i,
                None => {
                    let mut supports: BTreeMap<Vec<u32>, u64> = BTreeMap::new();
                    if ground.len() >= a.k() {
                        let plan = Plan::new(a.matrix(), vec![Domain::list(ground.clone()); a.k()])?;
                        let _ = plan.run_homogeneous(|x| {
                            let mut s: Vec<u32> = x
                                .iter()
                                .map(|v| ground.binary_search(v).expect("value from the ground set") as u32)
                                .collect();
                            s.sort_unstable();
                            *supports.entry(s).or_insert(0) += 1;
                            ControlFlow::Continue(())
                        });
                    }
                    supports_by_matrix.push((colour, supports));
                    supports_by_matrix.len() - 1
                }
            };
            for (support, &orderings) in &supports_by_matrix[idx].1 {
                let id = edges.len() as u32;
                edges.push((colour, members.len(), support.len(), orderings));
                members.extend_from_slice(support);
                for &v in support {
                    incidence[v as usize].push(id);
                }
            }
        }
        Ok(Constraints {
            elements: ground.len(),
            colours: inst.colours(),
            edges,
            members,
            incidence,
        })
    }

    fn edge_members(&self, e: usize) -> &[u32] {
        let (_, start, len, _) = self.edges[e];
        &self.members[start..start + len]
    }
}

/// Outcome of [`decide_arrow`].
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "verdict", rename_all = "kebab-case")]
pub enum ArrowVerdict {
    /// Every colouring has a monochromatic solution in some colour.
    Ramsey { nodes: u64 },
    /// A colouring with no colour-`i` solution of `A_i` for any `i`.
    GoodColouring { colouring: Colouring, nodes: u64 },
    BudgetExhausted { nodes: u64 },
}

impl ArrowVerdict {
    pub fn nodes(&self) -> u64 {
        match self {
            ArrowVerdict::Ramsey { nodes }
            | ArrowVerdict::GoodColouring { nodes, .. }
            | ArrowVerdict::BudgetExhausted { nodes } => *nodes,
        }
    }

    pub fn is_ramsey(&self) -> bool {
        matches!(self, ArrowVerdict::Ramsey { .. })
    }

    pub fn label(&self) -> &'static str {
        match self {
            ArrowVerdict::Ramsey { .. } => "ramsey",
            ArrowVerdict::GoodColouring { .. } => "good-colouring",
            ArrowVerdict::BudgetExhausted { .. } => "budget-exhausted",
        }
    }
}

enum Search {
    Found,
    Exhausted,
    OutOfBudget,
}

enum Trail {
    Assign(usize),
    Domain(usize, u32),
}

struct Dpll<'a> {
    c: &'a Constraints,
    predecessor: Vec<Option<usize>>,
    assign: Vec<u8>,
    domain: Vec<u32>,
    same: Vec<u32>,
    other: Vec<u32>,
    usage: Vec<u32>,
    trail: Vec<Trail>,
    nodes: u64,
    budget: u64,
}

impl<'a> Dpll<'a> {
    fn new(c: &'a Constraints, predecessor: Vec<Option<usize>>, budget: u64) -> Self {
        let full = if c.colours == 32 { u32::MAX } else { (1u32 << c.colours) - 1 };
        Dpll {
            c,
            predecessor,
            assign: vec![UNASSIGNED; c.elements],
            domain: vec![full; c.elements],
            same: vec![0; c.edges.len()],
            other: vec![0; c.edges.len()],
            usage: vec![0; c.colours],
            trail: Vec::new(),
            nodes: 0,
            budget,
        }
    }

    /// Assigns and propagates; `false` on conflict (state must then be undone).
    fn assign(&mut self, v: usize, colour: u8) -> bool {
        let mut queue = vec![(v, colour)];
        let mut units: Vec<(usize, usize)> = Vec::new();
        while let Some((v, colour)) = queue.pop() {
            if self.assign[v] != UNASSIGNED {
                if self.assign[v] == colour {
                    continue;
                }
                return false;
            }
            if self.domain[v] & (1 << colour) == 0 {
                return false;
            }
            self.trail.push(Trail::Assign(v));
            self.assign[v] = colour;
            self.usage[colour as usize] += 1;
            let mut conflict = false;
            units.clear();
            for &e in &self.c.incidence[v] {
                let e = e as usize;
                let (ec, _, len, _) = self.c.edges[e];
                if ec == colour as usize {
                    self.same[e] += 1;
                    if self.other[e] == 0 {
                        if self.same[e] as usize == len {
                            conflict = true;
                        } else if self.same[e] as usize + 1 == len {
                            units.push((e, ec));
                        }
                    }
                } else {
                    self.other[e] += 1;
                }
            }
            if conflict {
                return false;
            }
            for &(e, ec) in &units {
                let Some(&u) = self.c.edge_members(e).iter().find(|&&u| self.assign[u as usize] == UNASSIGNED)
                else {
                    continue;
                };
                let u = u as usize;
                let bit = 1u32 << ec;
                if self.domain[u] & bit != 0 {
                    self.trail.push(Trail::Domain(u, self.domain[u]));
                    self.domain[u] &= !bit;
                    match self.domain[u].count_ones() {
                        0 => return false,
                        1 => queue.push((u, self.domain[u].trailing_zeros() as u8)),
                        _ => {}
                    }
                }
            }
        }
        true
    }

    fn undo(&mut self, mark: usize) {
        while self.trail.len() > mark {
            match self.trail.pop().unwrap() {
                Trail::Domain(u, old) => self.domain[u] = old,
                Trail::Assign(v) => {
                    let colour = self.assign[v] as usize;
                    for &e in &self.c.incidence[v] {
                        let e = e as usize;
                        if self.c.edges[e].0 == colour {
                            self.same[e] -= 1;
                        } else {
                            self.other[e] -= 1;
                        }
                    }
                    self.usage[colour] -= 1;
                    self.assign[v] = UNASSIGNED;
                }
            }
        }
    }

    fn search(&mut self, from: usize) -> Search {
        let Some(v) = (from..self.c.elements).find(|&v| self.assign[v] == UNASSIGNED) else {
            return Search::Found;
        };
        for colour in 0..self.c.colours {
            if self.domain[v] & (1 << colour) == 0 {
                continue;
            }
            // Value precedence among colours carrying the same matrix.
            if let Some(prev) = self.predecessor[colour] {
                if self.usage[prev] == 0 && self.usage[colour] == 0 {
                    continue;
                }
            }
            if self.nodes >= self.budget {
                return Search::OutOfBudget;
            }
            self.nodes += 1;
            let mark = self.trail.len();
            if self.assign(v, colour as u8) {
                match self.search(v + 1) {
                    Search::Exhausted => {}
                    other => return other,
                }
            }
            self.undo(mark);
        }
        Search::Exhausted
    }
}

/// Decides `X → (A_1, ..., A_r)` exactly, within `budget` search nodes.
/// A returned witness has been re-verified by direct counting.
pub fn decide_arrow(instance: &RamseyInstance, budget: u64) -> Result<ArrowVerdict> {
    let constraints = Constraints::build(instance)?;
    let mut dpll = Dpll::new(&constraints, instance.interchangeable_predecessor(), budget);
    match dpll.search(0) {
        Search::Exhausted => Ok(ArrowVerdict::Ramsey { nodes: dpll.nodes }),
        Search::OutOfBudget => Ok(ArrowVerdict::BudgetExhausted { nodes: dpll.nodes }),
        Search::Found => {
            let colours = dpll.assign.iter().map(|&c| c as usize).collect();
            let colouring = Colouring::new(instance.ground.clone(), colours)?;
            for (i, a) in instance.matrices.iter().enumerate() {
                let count = count_monochromatic(&colouring, a, i)?;
                if count != 0 {
                    return Err(Error::Internal(format!(
                        "witness colouring has {count} solutions in colour {}",
                        i + 1
                    )));
                }
            }
            Ok(ArrowVerdict::GoodColouring {
                colouring,
                nodes: dpll.nodes,
            })
        }
    }
}

/// An exact value, or bounds when the search budget ran out.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum ScanValue<T> {
    Exact { value: T },
    Bounded { lower: T, upper: T },
}

impl<T> ScanValue<T> {
    pub fn is_exact(&self) -> bool {
        matches!(self, ScanValue::Exact { .. })
    }

    pub fn upper(&self) -> &T {
        match self {
            ScanValue::Exact { value } => value,
            ScanValue::Bounded { upper, .. } => upper,
        }
    }

    pub fn lower(&self) -> &T {
        match self {
            ScanValue::Exact { value } => value,
            ScanValue::Bounded { lower, .. } => lower,
        }
    }
}

/// Result of a min-max scan, with a colouring attaining the upper value.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ScanResult<T> {
    pub value: ScanValue<T>,
    pub witness: Colouring,
    pub nodes: u64,
}

/// `a/b < c/d` for nonnegative counts.
fn frac_lt(a: (u64, u64), b: (u64, u64)) -> bool {
    (a.0 as u128) * (b.1 as u128) < (b.0 as u128) * (a.1 as u128)
}

/// Branch and bound for `min over colourings of max_i mono_i / den_i`,
/// where `mono_i` counts ordered colour-`i` solutions of `A_i`.
struct MinMax<'a> {
    c: &'a Constraints,
    predecessor: Vec<Option<usize>>,
    dens: Vec<u64>,
    assign: Vec<usize>,
    same: Vec<u32>,
    mono: Vec<u64>,
    usage: Vec<u32>,
    best: Option<((u64, u64), Vec<usize>)>,
    nodes: u64,
    budget: u64,
    out_of_budget: bool,
}

impl MinMax<'_> {
    fn current(&self) -> (u64, u64) {
        let mut worst = (0u64, 1u64);
        for (m, d) in self.mono.iter().zip(&self.dens) {
            if frac_lt(worst, (*m, *d)) {
                worst = (*m, *d);
            }
        }
        worst
    }

    /// Ordered solutions completed in colour `colour` by colouring `v`.
    fn gain(&self, v: usize, colour: usize) -> u64 {
        self.c.incidence[v]
            .iter()
            .map(|&e| e as usize)
            .filter(|&e| {
                let (ec, _, len, _) = self.c.edges[e];
                ec == colour && self.same[e] as usize + 1 == len
            })
            .map(|e| self.c.edges[e].3)
            .sum()
    }

    fn apply(&mut self, v: usize, colour: usize, sign: bool) {
        for &e in &self.c.incidence[v] {
            let e = e as usize;
            let (ec, _, len, orderings) = self.c.edges[e];
            if ec != colour {
                continue;
            }
            if sign {
                self.same[e] += 1;
                if self.same[e] as usize == len {
                    self.mono[colour] += orderings;
                }
            } else {
                if self.same[e] as usize == len {
                    self.mono[colour] -= orderings;
                }
                self.same[e] -= 1;
            }
        }
        if sign {
            self.usage[colour] += 1;
            self.assign[v] = colour;
        } else {
            self.usage[colour] -= 1;
        }
    }

    fn search(&mut self, v: usize) {
        let bound = self.current();
        if let Some((best, _)) = &self.best {
            if !frac_lt(bound, *best) {
                return;
            }
        }
        if v == self.c.elements {
            self.best = Some((bound, self.assign.clone()));
            return;
        }
        let mut order: Vec<(u64, usize)> = (0..self.c.colours)
            .filter(|&c| match self.predecessor[c] {
                Some(p) => !(self.usage[p] == 0 && self.usage[c] == 0),
                None => true,
            })
            .map(|c| (self.gain(v, c), c))
            .collect();
        order.sort_unstable();
        for (_, colour) in order {
            if self.nodes >= self.budget {
                self.out_of_budget = true;
                return;
            }
            self.nodes += 1;
            self.apply(v, colour, true);
            self.search(v + 1);
            self.apply(v, colour, false);
            if self.out_of_budget {
                return;
            }
        }
    }
}

/// Best `(numerator, denominator)` found, its colouring, nodes used, and
/// whether the search completed.
type MinMaxOutcome = (Option<(u64, u64)>, Colouring, u64, bool);

fn min_max_scan(instance: &RamseyInstance, dens: Vec<u64>, budget: u64) -> Result<MinMaxOutcome> {
    let constraints = Constraints::build(instance)?;
    let mut mm = MinMax {
        c: &constraints,
        predecessor: instance.interchangeable_predecessor(),
        dens,
        assign: vec![0; constraints.elements],
        same: vec![0; constraints.edges.len()],
        mono: vec![0; constraints.colours],
        usage: vec![0; constraints.colours],
        best: None,
        nodes: 0,
        budget,
        out_of_budget: false,
    };
    mm.search(0);
    let exact = !mm.out_of_budget;
    match mm.best {
        Some((value, colours)) => {
            let colouring = Colouring::new(instance.ground.clone(), colours)?;
            Ok((Some(value), colouring, mm.nodes, exact))
        }
        None => {
            // Budget ran out before any complete colouring: fall back to
            // colouring everything with colour 0 for an upper bound.
            let colouring = Colouring::new(instance.ground.clone(), vec![0; constraints.elements])?;
            Ok((None, colouring, mm.nodes, false))
        }
    }
}

/// Number of pairwise disjoint dilates `d·[m0]` inside `[n]`, chosen greedily.
fn disjoint_dilates(n: u32, m0: u32) -> u64 {
    let mut used = vec![false; n as usize + 1];
    let mut count = 0;
    for d in 1..=n / m0.max(1) {
        let members: Vec<usize> = (1..=m0).map(|j| (d * j) as usize).collect();
        if members.iter().all(|&x| !used[x]) {
            for x in members {
                used[x] = true;
            }
            count += 1;
        }
    }
    count
}

/// Smallest `m <= limit` with `[m] → (A_1, ..., A_r)`, if one is found.
fn smallest_arrow(matrices: &[RadoProfile], limit: u32, budget: u64) -> Result<Option<u32>> {
    for m in 1..=limit {
        let inst = RamseyInstance::interval(m, matrices.to_vec())?;
        if decide_arrow(&inst, budget)?.is_ramsey() {
            return Ok(Some(m));
        }
    }
    Ok(None)
}

fn check_scan_size(n: u32) -> Result<()> {
    if n > SCAN_SIZE_CAP {
        return Err(Error::Guard {
            what: format!("colouring scan over [{n}]"),
            estimate: n as f64,
            cap: SCAN_SIZE_CAP as f64,
        });
    }
    Ok(())
}

/// `min over r-colourings of [n] of max_i` (ordered colour-`i` solutions of `A`).
pub fn supersaturation_scan(n: u32, r: usize, a: &RadoProfile, budget: u64) -> Result<ScanResult<u64>> {
    check_scan_size(n)?;
    if r == 0 {
        return Err(Error::input("at least one colour is required"));
    }
    let matrices = vec![a.clone(); r];
    let inst = RamseyInstance::interval(n, matrices.clone())?;
    let (best, witness, nodes, exact) = min_max_scan(&inst, vec![1; r], budget)?;
    let upper = match best {
        Some((v, _)) => v,
        None => count_monochromatic(&witness, a, 0)?,
    };
    let value = if exact {
        ScanValue::Exact { value: upper }
    } else {
        let lower = match smallest_arrow(&matrices, n.min(40), budget)? {
            Some(m0) => disjoint_dilates(n, m0).div_ceil(r as u64),
            None => 0,
        };
        ScanValue::Bounded { lower, upper }
    };
    Ok(ScanResult { value, witness, nodes })
}

/// `min over r-partitions of [n] of max_i e(H_i[U_i]) / e(H_i)`, with
/// `e` counting ordered solutions of `A_i` over `[n]`.
pub fn zeta_estimate(n: u32, matrices: &[RadoProfile], budget: u64) -> Result<ScanResult<Rational>> {
    check_scan_size(n)?;
    let inst = RamseyInstance::interval(n, matrices.to_vec())?;
    let all = Colouring::new(inst.ground.clone(), vec![0; n as usize])?;
    let totals: Vec<u64> = matrices
        .iter()
        .map(|a| count_monochromatic(&all, a, 0))
        .collect::<Result<_>>()?;
    if let Some(i) = totals.iter().position(|&t| t == 0) {
        return Err(Error::input(format!("matrix {} has no solutions over [{n}]", i + 1)));
    }
    let (best, witness, nodes, exact) = min_max_scan(&inst, totals.clone(), budget)?;
    let as_rational = |(a, b): (u64, u64)| Rational::new(BigInt::from(a), BigInt::from(b));
    let upper = match best {
        Some(v) => as_rational(v),
        None => Rational::from_integer(1.into()),
    };
    let value = if exact {
        ScanValue::Exact { value: upper }
    } else {
        let lower = match smallest_arrow(matrices, n.min(40), budget)? {
            Some(m0) => as_rational((disjoint_dilates(n, m0), totals.iter().sum())),
            None => Rational::from_integer(0.into()),
        };
        ScanValue::Bounded { lower, upper }
    };
    Ok(ScanResult { value, witness, nodes })
}

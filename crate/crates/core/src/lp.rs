//! Dense two-phase simplex over exact rationals with Bland's rule.
//!
//! Sized for the weight problems (a handful of variables, up to a few
//! thousand constraints); no attempt at sparsity.

use num_traits::{One, Signed, Zero};

use crate::linalg::Rational;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Relation {
    Le,
    Ge,
    Eq,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum LpOutcome {
    Optimal { x: Vec<Rational>, value: Rational },
    Infeasible,
    Unbounded,
}

/// `maximise c·x` subject to the added rows and `x >= 0`.
#[derive(Clone, Debug)]
pub struct LinearProgram {
    vars: usize,
    objective: Vec<Rational>,
    rows: Vec<(Vec<Rational>, Relation, Rational)>,
}

impl LinearProgram {
    pub fn new(vars: usize) -> Self {
        LinearProgram {
            vars,
            objective: vec![Rational::zero(); vars],
            rows: Vec::new(),
        }
    }

    pub fn vars(&self) -> usize {
        self.vars
    }

    pub fn maximise(&mut self, c: Vec<Rational>) -> &mut Self {
        assert_eq!(c.len(), self.vars, "objective length");
        self.objective = c;
        self
    }

    pub fn add(&mut self, coefficients: Vec<Rational>, relation: Relation, rhs: Rational) -> &mut Self {
        assert_eq!(coefficients.len(), self.vars, "row length");
        self.rows.push((coefficients, relation, rhs));
        self
    }

    pub fn solve(&self) -> LpOutcome {
        Tableau::build(self).solve(&self.objective)
    }
}

struct Tableau {
    vars: usize,
    /// Columns: original variables, then one slack per inequality, then one
    /// artificial per row; the last entry of each row is the right-hand side.
    rows: Vec<Vec<Rational>>,
    basis: Vec<usize>,
    first_artificial: usize,
    width: usize,
}

enum Step {
    Optimal,
    Unbounded,
}

impl Tableau {
    fn build(lp: &LinearProgram) -> Tableau {
        let m = lp.rows.len();
        let slacks = lp.rows.iter().filter(|r| r.1 != Relation::Eq).count();
        let first_artificial = lp.vars + slacks;
        let width = first_artificial + m;
        let mut rows = Vec::with_capacity(m);
        let mut basis = Vec::with_capacity(m);
        let mut slack = lp.vars;
        for (i, (coef, rel, rhs)) in lp.rows.iter().enumerate() {
            let mut row = vec![Rational::zero(); width + 1];
            row[..lp.vars].clone_from_slice(coef);
            match rel {
                Relation::Le => {
                    row[slack] = Rational::one();
                    slack += 1;
                }
                Relation::Ge => {
                    row[slack] = -Rational::one();
                    slack += 1;
                }
                Relation::Eq => {}
            }
            row[width] = rhs.clone();
            if rhs.is_negative() {
                for v in row.iter_mut() {
                    *v = -v.clone();
                }
            }
            row[first_artificial + i] = Rational::one();
            rows.push(row);
            basis.push(first_artificial + i);
        }
        Tableau {
            vars: lp.vars,
            rows,
            basis,
            first_artificial,
            width,
        }
    }

    fn pivot(&mut self, r: usize, c: usize) {
        let inv = self.rows[r][c].recip();
        for v in self.rows[r].iter_mut() {
            *v *= &inv;
        }
        let pivot_row = self.rows[r].clone();
        for (i, row) in self.rows.iter_mut().enumerate() {
            if i == r || row[c].is_zero() {
                continue;
            }
            let factor = row[c].clone();
            for (v, p) in row.iter_mut().zip(&pivot_row) {
                if !p.is_zero() {
                    *v -= &factor * p;
                }
            }
        }
        self.basis[r] = c;
    }

    /// Maximises `cost` over columns `< allowed` with Bland's rule.
    fn optimise(&mut self, cost: &[Rational], allowed: usize) -> Step {
        loop {
            let mut entering = None;
            for j in 0..allowed {
                if self.basis.contains(&j) {
                    continue;
                }
                let mut reduced = cost[j].clone();
                for (i, row) in self.rows.iter().enumerate() {
                    if !row[j].is_zero() {
                        reduced -= &cost[self.basis[i]] * &row[j];
                    }
                }
                if reduced.is_positive() {
                    entering = Some(j);
                    break;
                }
            }
            let Some(c) = entering else {
                return Step::Optimal;
            };
            let mut leaving: Option<(usize, Rational)> = None;
            for (i, row) in self.rows.iter().enumerate() {
                if row[c].is_positive() {
                    let ratio = &row[self.width] / &row[c];
                    let better = match &leaving {
                        None => true,
                        Some((li, best)) => ratio < *best || (ratio == *best && self.basis[i] < self.basis[*li]),
                    };
                    if better {
                        leaving = Some((i, ratio));
                    }
                }
            }
            match leaving {
                None => return Step::Unbounded,
                Some((r, _)) => self.pivot(r, c),
            }
        }
    }

    fn solve(mut self, objective: &[Rational]) -> LpOutcome {
        let total = self.width;
        // Phase one: minimise the sum of artificials.
        let mut phase_one = vec![Rational::zero(); total];
        for v in phase_one.iter_mut().skip(self.first_artificial) {
            *v = -Rational::one();
        }
        let _ = self.optimise(&phase_one, total);
        let infeasibility: Rational = self
            .rows
            .iter()
            .zip(&self.basis)
            .filter(|(_, &b)| b >= self.first_artificial)
            .map(|(row, _)| row[self.width].clone())
            .sum();
        if infeasibility.is_positive() {
            return LpOutcome::Infeasible;
        }
        // Drive remaining (zero-valued) artificials out of the basis; rows
        // where that is impossible are redundant and dropped.
        let mut r = 0;
        while r < self.rows.len() {
            if self.basis[r] >= self.first_artificial {
                match (0..self.first_artificial).find(|&j| !self.rows[r][j].is_zero()) {
                    Some(c) => {
                        self.pivot(r, c);
                        r += 1;
                    }
                    None => {
                        self.rows.remove(r);
                        self.basis.remove(r);
                    }
                }
            } else {
                r += 1;
            }
        }
        let mut cost = vec![Rational::zero(); total];
        cost[..self.vars].clone_from_slice(objective);
        if let Step::Unbounded = self.optimise(&cost, self.first_artificial) {
            return LpOutcome::Unbounded;
        }
        let mut x = vec![Rational::zero(); self.vars];
        for (row, &b) in self.rows.iter().zip(&self.basis) {
            if b < self.vars {
                x[b] = row[self.width].clone();
            }
        }
        let value = x.iter().zip(objective).map(|(a, b)| a * b).sum();
        LpOutcome::Optimal { x, value }
    }
}

/// The lexicographically smallest maximiser of `c·x`: solves for the optimum,
/// then minimises each coordinate in turn while holding the objective and the
/// coordinates already fixed.
pub fn lexicographic_optimum(lp: &LinearProgram) -> LpOutcome {
    let (mut best_x, best_value) = match lp.solve() {
        LpOutcome::Optimal { x, value } => (x, value),
        other => return other,
    };
    let mut constrained = lp.clone();
    constrained.add(lp.objective.clone(), Relation::Eq, best_value.clone());
    for i in 0..lp.vars {
        let mut probe = constrained.clone();
        let mut c = vec![Rational::zero(); lp.vars];
        c[i] = -Rational::one();
        probe.maximise(c);
        match probe.solve() {
            LpOutcome::Optimal { x, .. } => {
                let mut unit = vec![Rational::zero(); lp.vars];
                unit[i] = Rational::one();
                constrained.add(unit, Relation::Eq, x[i].clone());
                best_x = x;
            }
            _ => unreachable!("the optimal face is nonempty and bounded below by x >= 0"),
        }
    }
    LpOutcome::Optimal {
        x: best_x,
        value: best_value,
    }
}

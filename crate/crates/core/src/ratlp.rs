//! Exact rational linear programming over nonnegative variables.
//!
//! Two-phase primal simplex on a dense tableau with Bland's rule. Every
//! variable is implicitly `>= 0`. Before the tableau is built, rows that force
//! variables to zero (a homogeneous row whose coefficients all push the same
//! way) are applied directly and the variables dropped.

use std::collections::BTreeMap;
use std::fmt;

use num_traits::{One, Signed, Zero};
use thiserror::Error;

use crate::syntax::Rational;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Relation {
    Ge,
    Le,
    Eq,
}

impl fmt::Display for Relation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Relation::Ge => ">=",
            Relation::Le => "<=",
            Relation::Eq => "=",
        })
    }
}

/// `Σ coeff·x  rel  rhs`, with coefficients sorted by index and nonzero.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct LinRow {
    coeffs: Vec<(usize, Rational)>,
    pub relation: Relation,
    pub rhs: Rational,
}

impl LinRow {
    pub fn new(coeffs: impl IntoIterator<Item = (usize, Rational)>, relation: Relation, rhs: Rational) -> Self {
        LinRow { coeffs: normalize(coeffs), relation, rhs }
    }

    pub fn coeffs(&self) -> &[(usize, Rational)] {
        &self.coeffs
    }

    pub fn evaluate(&self, x: &Witness) -> Rational {
        self.coeffs.iter().fold(Rational::zero(), |acc, (i, c)| acc + c * x.get(*i))
    }

    pub fn holds(&self, x: &Witness) -> bool {
        let lhs = self.evaluate(x);
        match self.relation {
            Relation::Ge => lhs >= self.rhs,
            Relation::Le => lhs <= self.rhs,
            Relation::Eq => lhs == self.rhs,
        }
    }
}

fn normalize(coeffs: impl IntoIterator<Item = (usize, Rational)>) -> Vec<(usize, Rational)> {
    let mut merged: BTreeMap<usize, Rational> = BTreeMap::new();
    for (i, c) in coeffs {
        *merged.entry(i).or_insert_with(Rational::zero) += c;
    }
    merged.into_iter().filter(|(_, c)| !c.is_zero()).collect()
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct LinearSystem {
    num_vars: usize,
    rows: Vec<LinRow>,
}

impl LinearSystem {
    pub fn new(num_vars: usize) -> Self {
        LinearSystem { num_vars, rows: Vec::new() }
    }

    pub fn push(&mut self, row: LinRow) {
        assert!(row.coeffs.iter().all(|(i, _)| *i < self.num_vars), "row index out of range");
        self.rows.push(row);
    }

    pub fn with_row(mut self, row: LinRow) -> Self {
        self.push(row);
        self
    }

    pub fn num_vars(&self) -> usize {
        self.num_vars
    }

    pub fn rows(&self) -> &[LinRow] {
        &self.rows
    }

    /// Whether `x` is nonnegative and satisfies every row exactly.
    pub fn verify(&self, x: &Witness) -> bool {
        x.iter().all(|(i, v)| i < self.num_vars && !v.is_negative()) && self.rows.iter().all(|r| r.holds(x))
    }
}

/// Sparse assignment; absent indices are zero.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Witness(BTreeMap<usize, Rational>);

impl Witness {
    pub fn get(&self, i: usize) -> Rational {
        self.0.get(&i).cloned().unwrap_or_else(Rational::zero)
    }

    pub fn iter(&self) -> impl Iterator<Item = (usize, &Rational)> {
        self.0.iter().map(|(i, v)| (*i, v))
    }

    pub fn total(&self) -> Rational {
        self.0.values().fold(Rational::zero(), |acc, v| acc + v)
    }

    pub fn dot(&self, coeffs: &[(usize, Rational)]) -> Rational {
        coeffs.iter().fold(Rational::zero(), |acc, (i, c)| acc + c * self.get(*i))
    }
}

impl FromIterator<(usize, Rational)> for Witness {
    fn from_iter<I: IntoIterator<Item = (usize, Rational)>>(iter: I) -> Self {
        Witness(iter.into_iter().filter(|(_, v)| !v.is_zero()).collect())
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Outcome {
    Infeasible,
    Feasible(Witness),
    Optimal { value: Rational, witness: Witness },
}

impl Outcome {
    pub fn witness(&self) -> Option<&Witness> {
        match self {
            Outcome::Infeasible => None,
            Outcome::Feasible(w) | Outcome::Optimal { witness: w, .. } => Some(w),
        }
    }

    pub fn is_feasible(&self) -> bool {
        !matches!(self, Outcome::Infeasible)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Sense {
    Minimize,
    Maximize,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum LpError {
    #[error("objective is unbounded on the feasible region")]
    Unbounded,
}

pub fn feasible(sys: &LinearSystem) -> Outcome {
    match solve(sys, None) {
        Ok(Some((witness, _))) => Outcome::Feasible(witness),
        Ok(None) => Outcome::Infeasible,
        Err(LpError::Unbounded) => unreachable!("phase one is bounded below by zero"),
    }
}

pub fn optimize(sys: &LinearSystem, objective: &[(usize, Rational)], sense: Sense) -> Result<Outcome, LpError> {
    let objective = normalize(objective.iter().cloned());
    assert!(objective.iter().all(|(i, _)| *i < sys.num_vars), "objective index out of range");
    Ok(match solve(sys, Some((&objective, sense)))? {
        Some((witness, value)) => Outcome::Optimal { value, witness },
        None => Outcome::Infeasible,
    })
}

/// Variables forced to zero by homogeneous rows, iterated to a fixpoint.
/// Returns `None` when some row is violated by all-zero remaining variables.
fn presolve(sys: &LinearSystem) -> Option<(Vec<bool>, Vec<bool>)> {
    let mut fixed = vec![false; sys.num_vars];
    let mut dropped = vec![false; sys.rows.len()];
    loop {
        let mut changed = false;
        for (r, row) in sys.rows.iter().enumerate() {
            if dropped[r] {
                continue;
            }
            let live: Vec<&(usize, Rational)> = row.coeffs.iter().filter(|(i, _)| !fixed[*i]).collect();
            if live.is_empty() {
                let ok = match row.relation {
                    Relation::Ge => !row.rhs.is_positive(),
                    Relation::Le => !row.rhs.is_negative(),
                    Relation::Eq => row.rhs.is_zero(),
                };
                if !ok {
                    return None;
                }
                dropped[r] = true;
                continue;
            }
            if !row.rhs.is_zero() {
                continue;
            }
            let all_pos = live.iter().all(|(_, c)| c.is_positive());
            let all_neg = live.iter().all(|(_, c)| c.is_negative());
            let forces_zero = match row.relation {
                Relation::Eq => all_pos || all_neg,
                Relation::Ge => all_neg,
                Relation::Le => all_pos,
            };
            if forces_zero {
                for (i, _) in live {
                    fixed[*i] = true;
                }
                dropped[r] = true;
                changed = true;
            }
        }
        if !changed {
            return Some((fixed, dropped));
        }
    }
}

struct Tableau {
    /// `rows[i]` holds the coefficients followed by the right-hand side.
    rows: Vec<Vec<Rational>>,
    basis: Vec<usize>,
    cols: usize,
}

impl Tableau {
    fn rhs(&self, i: usize) -> &Rational {
        &self.rows[i][self.cols]
    }

    fn pivot(&mut self, r: usize, j: usize, obj: &mut [Rational]) {
        let piv = self.rows[r][j].clone();
        if !piv.is_one() {
            let inv = piv.recip();
            for v in self.rows[r].iter_mut() {
                if !v.is_zero() {
                    *v *= &inv;
                }
            }
        }
        let support: Vec<usize> = (0..=self.cols).filter(|&k| !self.rows[r][k].is_zero()).collect();
        let pivot_row = std::mem::take(&mut self.rows[r]);
        let eliminate = |row: &mut [Rational]| {
            let factor = row[j].clone();
            if factor.is_zero() {
                return;
            }
            for &k in &support {
                row[k] -= &factor * &pivot_row[k];
            }
        };
        for (i, row) in self.rows.iter_mut().enumerate() {
            if i != r {
                eliminate(row);
            }
        }
        eliminate(obj);
        self.rows[r] = pivot_row;
        self.basis[r] = j;
    }

    /// Minimizes over columns `< allowed`, starting from the current basis.
    /// `obj` holds reduced costs with `-z` in the last slot.
    fn run(&mut self, obj: &mut [Rational], allowed: usize) -> Result<(), LpError> {
        loop {
            let Some(j) = (0..allowed).find(|&j| obj[j].is_negative()) else {
                return Ok(());
            };
            let mut leave: Option<(usize, Rational)> = None;
            for i in 0..self.rows.len() {
                let a = &self.rows[i][j];
                if !a.is_positive() {
                    continue;
                }
                let ratio = self.rhs(i) / a;
                let better = match &leave {
                    None => true,
                    Some((best, best_ratio)) => {
                        ratio < *best_ratio || (ratio == *best_ratio && self.basis[i] < self.basis[*best])
                    }
                };
                if better {
                    leave = Some((i, ratio));
                }
            }
            let Some((r, _)) = leave else {
                return Err(LpError::Unbounded);
            };
            self.pivot(r, j, obj);
        }
    }

    fn reduced_costs(&self, cost: &[Rational]) -> Vec<Rational> {
        let mut obj: Vec<Rational> = cost.to_vec();
        obj.push(Rational::zero());
        for (i, &b) in self.basis.iter().enumerate() {
            let cb = &cost[b];
            if cb.is_zero() {
                continue;
            }
            for (k, v) in self.rows[i].iter().enumerate() {
                if !v.is_zero() {
                    obj[k] -= cb * v;
                }
            }
        }
        obj
    }
}

/// Returns the witness and the objective value (zero without objective).
fn solve(
    sys: &LinearSystem,
    objective: Option<(&[(usize, Rational)], Sense)>,
) -> Result<Option<(Witness, Rational)>, LpError> {
    let Some((fixed, dropped)) = presolve(sys) else {
        return Ok(None);
    };

    // columns: live structural variables, then slacks, then artificials
    let mut col_of = vec![usize::MAX; sys.num_vars];
    let mut var_of = Vec::new();
    let mut mark = |i: usize| {
        if !fixed[i] && col_of[i] == usize::MAX {
            col_of[i] = var_of.len();
            var_of.push(i);
        }
    };
    for (r, row) in sys.rows.iter().enumerate() {
        if !dropped[r] {
            row.coeffs.iter().for_each(|(i, _)| mark(*i));
        }
    }
    if let Some((obj, _)) = objective {
        obj.iter().for_each(|(i, _)| mark(*i));
    }
    // keep column order aligned with variable order for deterministic pivoting
    let mut order: Vec<usize> = (0..var_of.len()).collect();
    order.sort_by_key(|&c| var_of[c]);
    let var_of: Vec<usize> = order.iter().map(|&c| var_of[c]).collect();
    for (c, &v) in var_of.iter().enumerate() {
        col_of[v] = c;
    }

    let live_rows: Vec<&LinRow> = sys.rows.iter().enumerate().filter(|(r, _)| !dropped[*r]).map(|(_, r)| r).collect();
    let n_struct = var_of.len();
    let n_slack = live_rows.iter().filter(|r| r.relation != Relation::Eq).count();

    struct Pending {
        coeffs: Vec<(usize, Rational)>,
        slack: Option<(usize, Rational)>,
        rhs: Rational,
    }
    let mut pending = Vec::with_capacity(live_rows.len());
    let mut next_slack = n_struct;
    for row in &live_rows {
        let mut coeffs: Vec<(usize, Rational)> =
            row.coeffs.iter().filter(|(i, _)| !fixed[*i]).map(|(i, c)| (col_of[*i], c.clone())).collect();
        let mut slack = match row.relation {
            Relation::Eq => None,
            Relation::Le => Some((next_slack, Rational::one())),
            Relation::Ge => Some((next_slack, -Rational::one())),
        };
        if slack.is_some() {
            next_slack += 1;
        }
        let mut rhs = row.rhs.clone();
        if rhs.is_negative() || (rhs.is_zero() && matches!(slack, Some((_, ref s)) if s.is_negative())) {
            rhs = -rhs;
            coeffs.iter_mut().for_each(|(_, c)| *c = -c.clone());
            if let Some((_, s)) = slack.as_mut() {
                *s = -s.clone();
            }
        }
        pending.push(Pending { coeffs, slack, rhs });
    }

    let needs_artificial: Vec<bool> =
        pending.iter().map(|p| !matches!(p.slack, Some((_, ref s)) if s.is_positive())).collect();
    let n_art = needs_artificial.iter().filter(|&&b| b).count();
    let art_start = n_struct + n_slack;
    let cols = art_start + n_art;

    let mut tab = Tableau { rows: Vec::with_capacity(pending.len()), basis: Vec::new(), cols };
    let mut next_art = art_start;
    for (p, needs) in pending.into_iter().zip(&needs_artificial) {
        let mut row = vec![Rational::zero(); cols + 1];
        for (c, v) in p.coeffs {
            row[c] = v;
        }
        row[cols] = p.rhs;
        let basic = if *needs {
            row[next_art] = Rational::one();
            next_art += 1;
            next_art - 1
        } else {
            p.slack.as_ref().map(|(s, _)| *s).expect("slack basis")
        };
        if let Some((s, v)) = p.slack {
            row[s] = v;
        }
        tab.rows.push(row);
        tab.basis.push(basic);
    }

    if n_art > 0 {
        let mut cost = vec![Rational::zero(); cols];
        cost[art_start..].iter_mut().for_each(|c| *c = Rational::one());
        let mut obj = tab.reduced_costs(&cost);
        tab.run(&mut obj, cols).expect("phase one is bounded");
        if !obj[cols].is_zero() {
            return Ok(None);
        }
        // drive remaining artificials out of the basis, dropping redundant rows
        let mut r = 0;
        while r < tab.rows.len() {
            if tab.basis[r] >= art_start {
                match (0..art_start).find(|&j| !tab.rows[r][j].is_zero()) {
                    Some(j) => {
                        let mut scratch = vec![Rational::zero(); cols + 1];
                        tab.pivot(r, j, &mut scratch);
                    }
                    None => {
                        tab.rows.remove(r);
                        tab.basis.remove(r);
                        continue;
                    }
                }
            }
            r += 1;
        }
        for row in tab.rows.iter_mut() {
            let rhs = row.pop().expect("rhs");
            row.truncate(art_start);
            row.push(rhs);
        }
        tab.cols = art_start;
    }

    let mut value = Rational::zero();
    if let Some((objective, sense)) = objective {
        let mut cost = vec![Rational::zero(); tab.cols];
        for (i, c) in objective.iter().filter(|(i, _)| !fixed[*i]) {
            cost[col_of[*i]] = match sense {
                Sense::Minimize => c.clone(),
                Sense::Maximize => -c.clone(),
            };
        }
        let mut obj = tab.reduced_costs(&cost);
        let cols = tab.cols;
        tab.run(&mut obj, cols)?;
    }

    let mut x = vec![Rational::zero(); n_struct];
    for (i, &b) in tab.basis.iter().enumerate() {
        if b < n_struct {
            x[b] = tab.rhs(i).clone();
        }
    }
    let witness: Witness = x.into_iter().enumerate().map(|(c, v)| (var_of[c], v)).collect();
    if let Some((objective, _)) = objective {
        value = witness.dot(objective);
    }
    Ok(Some((witness, value)))
}

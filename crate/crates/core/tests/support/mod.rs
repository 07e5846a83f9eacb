//! Independent LP oracle: enumerate every basic feasible solution of the
//! standard-form system and take the best objective value.

#![allow(dead_code)]

use itertools::Itertools;
use num_traits::{One, Signed, Zero};
use plp_core::ratlp::{LinRow, LinearSystem, Relation, Sense};
use plp_core::syntax::Rational;

/// Row-reduces `rows` (each `coeffs ++ [rhs]`) in place. Returns the
/// independent rows, or `None` when the system is inconsistent.
fn reduce(mut rows: Vec<Vec<Rational>>, width: usize) -> Option<Vec<Vec<Rational>>> {
    let mut rank = 0;
    for col in 0..width {
        let Some(p) = (rank..rows.len()).find(|&r| !rows[r][col].is_zero()) else { continue };
        rows.swap(rank, p);
        let pivot = rows[rank][col].clone();
        for v in rows[rank].iter_mut() {
            *v = &*v / &pivot;
        }
        for r in 0..rows.len() {
            if r != rank && !rows[r][col].is_zero() {
                let factor = rows[r][col].clone();
                let pivot_row = rows[rank].clone();
                for (v, pv) in rows[r].iter_mut().zip(&pivot_row) {
                    *v -= &factor * pv;
                }
            }
        }
        rank += 1;
    }
    if rows[rank..].iter().any(|r| !r[width].is_zero()) {
        return None;
    }
    rows.truncate(rank);
    Some(rows)
}

/// Solves the square system on `basis` columns; `None` when singular.
fn solve_basis(rows: &[Vec<Rational>], basis: &[usize], width: usize) -> Option<Vec<Rational>> {
    let sub: Vec<Vec<Rational>> =
        rows.iter().map(|r| basis.iter().map(|&c| r[c].clone()).chain([r[width].clone()]).collect()).collect();
    let reduced = reduce(sub, basis.len())?;
    if reduced.len() < basis.len() {
        return None;
    }
    Some(reduced.iter().map(|r| r[basis.len()].clone()).collect())
}

/// Every basic feasible solution of `sys` (with `x >= 0`), restricted to
/// the original variables. Empty when infeasible.
pub fn vertices(sys: &LinearSystem) -> Vec<Vec<Rational>> {
    let n = sys.num_vars();
    let slacks = sys.rows().iter().filter(|r| r.relation != Relation::Eq).count();
    let width = n + slacks;
    let mut dense = Vec::new();
    let mut s = n;
    for r in sys.rows() {
        let mut row = vec![Rational::zero(); width + 1];
        for (i, c) in r.coeffs() {
            row[*i] = c.clone();
        }
        match r.relation {
            Relation::Ge => {
                row[s] = -Rational::one();
                s += 1;
            }
            Relation::Le => {
                row[s] = Rational::one();
                s += 1;
            }
            Relation::Eq => {}
        }
        row[width] = r.rhs.clone();
        dense.push(row);
    }
    let Some(rows) = reduce(dense, width) else { return Vec::new() };
    let mut out = Vec::new();
    for basis in (0..width).combinations(rows.len()) {
        let Some(xb) = solve_basis(&rows, &basis, width) else { continue };
        if xb.iter().any(|v| v.is_negative()) {
            continue;
        }
        let mut x = vec![Rational::zero(); width];
        for (&c, v) in basis.iter().zip(xb) {
            x[c] = v;
        }
        x.truncate(n);
        out.push(x);
    }
    out
}

/// Best objective over all basic feasible solutions of `sys`, or `None`
/// when infeasible. The caller guarantees boundedness.
pub fn bfs_optimum(sys: &LinearSystem, objective: &[(usize, Rational)], sense: Sense) -> Option<Rational> {
    let values = vertices(sys).into_iter().map(|x| objective.iter().map(|(i, c)| c * &x[*i]).sum::<Rational>());
    match sense {
        Sense::Maximize => values.max(),
        Sense::Minimize => values.min(),
    }
}

/// A system over `n` variables from small integer data, with `Σx <= bound`
/// appended so every objective is bounded.
pub fn system_from(n: usize, rows: &[(Vec<i64>, u8, i64)], bound: i64) -> LinearSystem {
    let mut sys = LinearSystem::new(n);
    for (coeffs, rel, rhs) in rows {
        let relation = match rel % 3 {
            0 => Relation::Ge,
            1 => Relation::Le,
            _ => Relation::Eq,
        };
        let cs = coeffs.iter().take(n).enumerate().map(|(i, &c)| (i, Rational::from_integer(c.into())));
        sys.push(LinRow::new(cs, relation, Rational::from_integer((*rhs).into())));
    }
    sys.push(LinRow::new((0..n).map(|i| (i, Rational::one())), Relation::Le, Rational::from_integer(bound.into())));
    sys
}

//! Formulas, conditional constraints, programs and queries.
//!
//! The concrete text syntax lives in [`parse`] and [`render`]; the grammar is
//! documented in `docs/grammar.md`.

mod parse;
mod render;

use std::collections::{BTreeMap, BTreeSet, HashSet};
use std::fmt;

use num_bigint::BigInt;
use num_traits::{One, Zero};

pub use parse::{parse_constraint, parse_formula, parse_program, parse_query, ParseError, ParseErrorKind};
pub use render::{decimal, render_constraint, render_program, render_query};

/// Exact rational number with arbitrary-precision numerator and denominator.
///
/// `num_rational` keeps values reduced with a positive denominator after
/// every operation.
pub type Rational = num_rational::BigRational;

/// Builds `num/den` as a canonical [`Rational`].
pub fn rat(num: i64, den: i64) -> Rational {
    Rational::new(BigInt::from(num), BigInt::from(den))
}

/// Whether `r` lies in the closed unit interval.
pub fn in_unit_interval(r: &Rational) -> bool {
    *r >= Rational::zero() && *r <= Rational::one()
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Term {
    Const(String),
    Var(String),
}

impl Term {
    pub fn is_var(&self) -> bool {
        matches!(self, Term::Var(_))
    }
}

impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Term::Const(name) | Term::Var(name) => f.write_str(name),
        }
    }
}

/// `p(t1, ..., tk)`; `k = 0` gives a propositional atom.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Atom {
    pub predicate: String,
    pub args: Vec<Term>,
}

impl Atom {
    pub fn new(predicate: impl Into<String>, args: Vec<Term>) -> Self {
        Atom { predicate: predicate.into(), args }
    }

    pub fn is_ground(&self) -> bool {
        !self.args.iter().any(Term::is_var)
    }
}

/// Classical formula built from atoms with negation and conjunction.
///
/// Disjunction and implication are constructed through [`Formula::or`] and
/// [`Formula::implies`], which desugar into `Not`/`And`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Formula {
    Bottom,
    Top,
    Atom(Atom),
    Not(Box<Formula>),
    And(Box<Formula>, Box<Formula>),
}

impl Formula {
    pub fn atom(predicate: impl Into<String>, args: Vec<Term>) -> Self {
        Formula::Atom(Atom::new(predicate, args))
    }

    /// Zero-arity atom.
    pub fn prop(name: impl Into<String>) -> Self {
        Formula::Atom(Atom::new(name, Vec::new()))
    }

    #[allow(clippy::should_implement_trait)]
    pub fn not(self) -> Self {
        Formula::Not(Box::new(self))
    }

    pub fn and(self, other: Formula) -> Self {
        Formula::And(Box::new(self), Box::new(other))
    }

    pub fn or(self, other: Formula) -> Self {
        self.not().and(other.not()).not()
    }

    pub fn implies(self, other: Formula) -> Self {
        self.and(other.not()).not()
    }

    pub fn is_ground(&self) -> bool {
        let mut ground = true;
        self.visit_atoms(&mut |a| ground &= a.is_ground());
        ground
    }

    pub fn visit_atoms<'a>(&'a self, f: &mut impl FnMut(&'a Atom)) {
        match self {
            Formula::Bottom | Formula::Top => {}
            Formula::Atom(a) => f(a),
            Formula::Not(inner) => inner.visit_atoms(f),
            Formula::And(l, r) => {
                l.visit_atoms(f);
                r.visit_atoms(f);
            }
        }
    }

    pub fn atoms(&self) -> BTreeSet<&Atom> {
        let mut out = BTreeSet::new();
        self.visit_atoms(&mut |a| {
            out.insert(a);
        });
        out
    }

    pub fn variables(&self) -> BTreeSet<&str> {
        let mut out = BTreeSet::new();
        self.visit_atoms(&mut |a| {
            for t in &a.args {
                if let Term::Var(v) = t {
                    out.insert(v.as_str());
                }
            }
        });
        out
    }

    pub fn constants(&self) -> BTreeSet<&str> {
        let mut out = BTreeSet::new();
        self.visit_atoms(&mut |a| {
            for t in &a.args {
                if let Term::Const(c) = t {
                    out.insert(c.as_str());
                }
            }
        });
        out
    }
}

/// Whether a constraint is strict knowledge or a default.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Classification {
    /// `[1,1]` or `[0,0]`.
    Classical,
    /// Everything else with `l <= u`; equivalently `l < 1` and `u > 0`.
    Default,
}

/// `(consequent | antecedent)[lower, upper]`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct ConditionalConstraint {
    pub consequent: Formula,
    pub antecedent: Formula,
    pub lower: Rational,
    pub upper: Rational,
}

impl ConditionalConstraint {
    pub fn new(consequent: Formula, antecedent: Formula, lower: Rational, upper: Rational) -> Self {
        ConditionalConstraint { consequent, antecedent, lower, upper }
    }

    /// `(formula | true)[1, 1]`, used to assert evidence.
    pub fn certain(formula: Formula) -> Self {
        Self::new(formula, Formula::Top, Rational::one(), Rational::one())
    }

    pub fn classify(&self) -> Classification {
        let both = |v: &Rational| self.lower == *v && self.upper == *v;
        if both(&Rational::one()) || both(&Rational::zero()) {
            Classification::Classical
        } else {
            Classification::Default
        }
    }

    pub fn is_ground(&self) -> bool {
        self.consequent.is_ground() && self.antecedent.is_ground()
    }

    pub fn variables(&self) -> BTreeSet<&str> {
        let mut vars = self.consequent.variables();
        vars.extend(self.antecedent.variables());
        vars
    }
}

impl fmt::Display for ConditionalConstraint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}|{})[{}, {}]", self.consequent, self.antecedent, self.lower, self.upper)
    }
}

/// A finite set of conditional constraints kept in source order.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Program {
    constraints: Vec<ConditionalConstraint>,
}

impl Program {
    pub fn new() -> Self {
        Program::default()
    }

    /// Structural duplicates are dropped; the first occurrence keeps its slot.
    pub fn from_constraints(constraints: impl IntoIterator<Item = ConditionalConstraint>) -> Self {
        let mut seen = HashSet::new();
        let constraints = constraints.into_iter().filter(|c| seen.insert(c.clone())).collect();
        Program { constraints }
    }

    /// Returns `false` when an identical constraint is already present.
    pub fn push(&mut self, c: ConditionalConstraint) -> bool {
        if self.constraints.contains(&c) {
            return false;
        }
        self.constraints.push(c);
        true
    }

    pub fn constraints(&self) -> &[ConditionalConstraint] {
        &self.constraints
    }

    pub fn len(&self) -> usize {
        self.constraints.len()
    }

    pub fn is_empty(&self) -> bool {
        self.constraints.is_empty()
    }

    pub fn iter(&self) -> std::slice::Iter<'_, ConditionalConstraint> {
        self.constraints.iter()
    }

    /// Predicate name to arity, or the first predicate used with two arities.
    pub fn signatures(&self) -> Result<BTreeMap<String, usize>, (String, usize, usize)> {
        let mut sigs = BTreeMap::new();
        for c in &self.constraints {
            record_signatures(&c.consequent, &mut sigs)?;
            record_signatures(&c.antecedent, &mut sigs)?;
        }
        Ok(sigs)
    }
}

impl<'a> IntoIterator for &'a Program {
    type Item = &'a ConditionalConstraint;
    type IntoIter = std::slice::Iter<'a, ConditionalConstraint>;

    fn into_iter(self) -> Self::IntoIter {
        self.constraints.iter()
    }
}

pub(crate) fn record_signatures(f: &Formula, sigs: &mut BTreeMap<String, usize>) -> Result<(), (String, usize, usize)> {
    let mut clash = None;
    f.visit_atoms(&mut |a| {
        if clash.is_some() {
            return;
        }
        let arity = *sigs.entry(a.predicate.clone()).or_insert(a.args.len());
        if arity != a.args.len() {
            clash = Some((a.predicate.clone(), arity, a.args.len()));
        }
    });
    clash.map_or(Ok(()), Err)
}

/// Bound slot of a query.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum QueryBounds {
    /// `[l, u]`: ask whether the constraint is entailed.
    Numeric { lower: Rational, upper: Rational },
    /// `[X, Y]` with `X != Y`: ask for the tight interval.
    Variables { lower: String, upper: String },
}

/// `?(consequent | antecedent)[bounds]`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Query {
    pub consequent: Formula,
    pub antecedent: Formula,
    pub bounds: QueryBounds,
}

impl Query {
    pub fn tight(consequent: Formula, antecedent: Formula) -> Self {
        Query { consequent, antecedent, bounds: QueryBounds::Variables { lower: "L".into(), upper: "U".into() } }
    }

    pub fn is_object_ground(&self) -> bool {
        self.consequent.is_ground() && self.antecedent.is_ground()
    }

    pub fn variables(&self) -> BTreeSet<&str> {
        let mut vars = self.consequent.variables();
        vars.extend(self.antecedent.variables());
        vars
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cc(l: Rational, u: Rational) -> ConditionalConstraint {
        ConditionalConstraint::new(Formula::prop("a"), Formula::prop("b"), l, u)
    }

    #[test]
    fn classify_examples() {
        assert_eq!(cc(rat(1, 1), rat(1, 1)).classify(), Classification::Classical);
        assert_eq!(cc(rat(0, 1), rat(1, 20)).classify(), Classification::Default);
        assert_eq!(cc(rat(0, 1), rat(0, 1)).classify(), Classification::Classical);
    }

    #[test]
    fn classification_partitions_grid() {
        // exactly one class holds, and Default coincides with l < 1 and u > 0
        let grid: Vec<Rational> = (0..=12).map(|i| rat(i, 12)).collect();
        for l in &grid {
            for u in grid.iter().filter(|u| *u >= l) {
                let c = cc(l.clone(), u.clone());
                let purely_probabilistic = *l < Rational::one() && *u > Rational::zero();
                let classical = (l == u) && (l.is_one() || l.is_zero());
                assert!(purely_probabilistic ^ classical, "[{l}, {u}]");
                assert_eq!(c.classify() == Classification::Default, purely_probabilistic);
            }
        }
    }

    #[test]
    fn program_dedups_in_order() {
        let a = cc(rat(1, 2), rat(1, 1));
        let b = cc(rat(0, 1), rat(1, 1));
        let p = Program::from_constraints([a.clone(), b.clone(), a.clone()]);
        assert_eq!(p.constraints(), &[a, b]);
    }

    #[test]
    fn rationals_are_canonical() {
        let x = rat(95, 100) + rat(1, 20);
        assert_eq!(x, rat(1, 1));
        assert_eq!(*x.denom(), BigInt::from(1));
        assert_eq!(*rat(6, -8).denom(), BigInt::from(4));
    }
}

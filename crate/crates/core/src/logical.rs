//! Classical probabilistic entailment: satisfiability, tight 0- and
//! 1-consequence.
//!
//! A constraint `(ψ|φ)[l,u]` becomes two homogeneous rows over world weights
//! `y >= 0`:
//!
//! ```text
//! Σ_{I ⊨ ψ∧φ} y_I − l · Σ_{I ⊨ φ} y_I >= 0
//! Σ_{I ⊨ ψ∧φ} y_I − u · Σ_{I ⊨ φ} y_I <= 0
//! ```
//!
//! Both hold trivially when `Pr(φ) = 0`, so any normalization of `y` is a
//! model exactly when the rows hold. Tight 0-consequence normalizes on the
//! antecedent instead of on all worlds, which turns the conditional objective
//! into a linear one.

use std::collections::HashMap;
use std::fmt;
use std::sync::Arc;

use num_traits::{One, Zero};
use thiserror::Error;

use crate::ratlp::{self, LinRow, LinearSystem, LpError, Outcome, Relation, Sense, Witness};
use crate::syntax::{decimal, in_unit_interval, ConditionalConstraint, Formula, Rational};
use crate::worlds::{SatCache, World, WorldError, WorldSet, WorldSpace};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum LogicError {
    #[error(transparent)]
    World(#[from] WorldError),
    #[error(transparent)]
    Lp(#[from] LpError),
}

/// A closed subinterval of `[0, 1]`, or the empty interval written `[1, 0]`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Interval {
    lower: Rational,
    upper: Rational,
}

impl Interval {
    /// Panics unless `0 <= lower <= upper <= 1`.
    pub fn new(lower: Rational, upper: Rational) -> Self {
        assert!(in_unit_interval(&lower) && in_unit_interval(&upper) && lower <= upper, "bad interval");
        Interval { lower, upper }
    }

    /// `[1, 0]`: no relevant model exists.
    pub fn empty() -> Self {
        Interval { lower: Rational::one(), upper: Rational::zero() }
    }

    pub fn unit() -> Self {
        Interval { lower: Rational::zero(), upper: Rational::one() }
    }

    pub fn point(v: Rational) -> Self {
        Self::new(v.clone(), v)
    }

    pub fn lower(&self) -> &Rational {
        &self.lower
    }

    pub fn upper(&self) -> &Rational {
        &self.upper
    }

    pub fn is_empty(&self) -> bool {
        self.lower > self.upper
    }

    /// Interval inclusion; the empty interval is inside everything and
    /// nothing nonempty is inside it.
    pub fn is_subset_of(&self, other: &Interval) -> bool {
        self.is_empty() || (!other.is_empty() && other.lower <= self.lower && self.upper <= other.upper)
    }

    /// Smallest interval covering both. `[1, 0]` is the identity.
    pub fn hull(&self, other: &Interval) -> Interval {
        Interval {
            lower: self.lower.clone().min(other.lower.clone()),
            upper: self.upper.clone().max(other.upper.clone()),
        }
    }

    pub fn to_decimal_string(&self) -> String {
        format!("[{}, {}]", decimal(&self.lower), decimal(&self.upper))
    }
}

impl fmt::Display for Interval {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{}, {}]", self.lower, self.upper)
    }
}

/// A probability distribution over worlds; absent worlds have mass zero.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct WitnessDistribution(Vec<(World, Rational)>);

impl WitnessDistribution {
    /// Rescales nonnegative weights to sum to one. `None` for all-zero input.
    pub fn normalize(w: &Witness) -> Option<Self> {
        let total = w.total();
        if total.is_zero() {
            return None;
        }
        Some(WitnessDistribution(w.iter().map(|(i, v)| (World(i), v / &total)).collect()))
    }

    pub fn iter(&self) -> impl Iterator<Item = &(World, Rational)> {
        self.0.iter()
    }

    pub fn probability(&self, set: &WorldSet) -> Rational {
        self.0.iter().filter(|(w, _)| set.contains(w.0)).fold(Rational::zero(), |acc, (_, p)| acc + p)
    }
}

/// Tight interval together with distributions attaining each end.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TightBounds {
    pub interval: Interval,
    pub lower_witness: Option<WitnessDistribution>,
    pub upper_witness: Option<WitnessDistribution>,
}

impl TightBounds {
    pub fn empty() -> Self {
        TightBounds { interval: Interval::empty(), lower_witness: None, upper_witness: None }
    }

    /// Hull of two results, keeping the witnesses of whichever side
    /// attains each end.
    pub fn hull(self, other: TightBounds) -> TightBounds {
        // the empty side carries no witnesses, even where its ends tie
        if self.interval.is_empty() {
            return other;
        }
        if other.interval.is_empty() {
            return self;
        }
        let interval = self.interval.hull(&other.interval);
        let lower_witness =
            if other.interval.lower < self.interval.lower { other.lower_witness } else { self.lower_witness };
        let upper_witness =
            if other.interval.upper > self.interval.upper { other.upper_witness } else { self.upper_witness };
        TightBounds { interval, lower_witness, upper_witness }
    }
}

/// `Σ_{I ⊨ formula} y_I  rel  rhs`, for evidence and side conditions.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct MassRow {
    pub formula: Formula,
    pub relation: Relation,
    pub rhs: Rational,
}

impl MassRow {
    /// `Pr(formula) = 0`.
    pub fn zero(formula: Formula) -> Self {
        MassRow { formula, relation: Relation::Eq, rhs: Rational::zero() }
    }

    pub fn certain(formula: Formula) -> Self {
        MassRow { formula, relation: Relation::Eq, rhs: Rational::one() }
    }
}

type Terms = Vec<(Arc<WorldSet>, Rational)>;

struct SetRow {
    terms: Terms,
    relation: Relation,
    rhs: Rational,
}

/// Constraint-set reasoning over one world space, with memoized formula
/// evaluation. Safe to share between threads.
#[derive(Debug)]
pub struct Reasoner {
    sat: SatCache,
}

impl Reasoner {
    pub fn new(space: WorldSpace) -> Self {
        Reasoner { sat: SatCache::new(space) }
    }

    pub fn space(&self) -> &WorldSpace {
        self.sat.space()
    }

    pub fn world_count(&self) -> usize {
        self.sat.world_count()
    }

    pub fn satisfying_set(&self, f: &Formula) -> Result<Arc<WorldSet>, WorldError> {
        self.sat.get(f)
    }

    /// The two rows of every constraint, over all worlds of the space.
    pub fn build_rows(&self, cs: &[&ConditionalConstraint]) -> Result<LinearSystem, LogicError> {
        let n = self.world_count();
        let mut sys = LinearSystem::new(n);
        for c in cs {
            let both = self.sat.get(&c.consequent.clone().and(c.antecedent.clone()))?;
            let ante = self.sat.get(&c.antecedent)?;
            for (bound, relation) in [(&c.lower, Relation::Ge), (&c.upper, Relation::Le)] {
                let coeffs = ante.iter().map(|w| {
                    let hit = if both.contains(w) { Rational::one() } else { Rational::zero() };
                    (w, hit - bound)
                });
                sys.push(LinRow::new(coeffs, relation, Rational::zero()));
            }
        }
        Ok(sys)
    }

    fn constraint_rows(&self, cs: &[&ConditionalConstraint], out: &mut Vec<SetRow>) -> Result<(), WorldError> {
        for c in cs {
            let both = self.sat.get(&c.consequent.clone().and(c.antecedent.clone()))?;
            let ante = self.sat.get(&c.antecedent)?;
            // rows that every nonnegative y satisfies are left out
            if !c.lower.is_zero() {
                out.push(SetRow {
                    terms: vec![(Arc::clone(&both), Rational::one()), (Arc::clone(&ante), -c.lower.clone())],
                    relation: Relation::Ge,
                    rhs: Rational::zero(),
                });
            }
            if !c.upper.is_one() {
                out.push(SetRow {
                    terms: vec![(both, Rational::one()), (ante, -c.upper.clone())],
                    relation: Relation::Le,
                    rhs: Rational::zero(),
                });
            }
        }
        Ok(())
    }

    fn mass_row(&self, m: &MassRow) -> Result<SetRow, WorldError> {
        Ok(SetRow {
            terms: vec![(self.sat.get(&m.formula)?, Rational::one())],
            relation: m.relation,
            rhs: m.rhs.clone(),
        })
    }

    /// Solves over classes of worlds that agree on every set in the system.
    /// Witness mass sits on the lowest-indexed world of each class.
    fn solve(
        &self,
        rows: &[SetRow],
        objective: Option<(&Terms, Sense)>,
    ) -> Result<Option<(Witness, Rational)>, LogicError> {
        let mut sets: Vec<&Arc<WorldSet>> = Vec::new();
        let mut set_id: HashMap<*const WorldSet, usize> = HashMap::new();
        let all_terms = rows.iter().flat_map(|r| r.terms.iter()).chain(objective.iter().flat_map(|(t, _)| t.iter()));
        for (s, _) in all_terms {
            set_id.entry(Arc::as_ptr(s)).or_insert_with(|| {
                sets.push(s);
                sets.len() - 1
            });
        }

        let words = sets.len().div_ceil(64).max(1);
        let mut class_of_sig: HashMap<Vec<u64>, usize> = HashMap::new();
        let mut reps: Vec<usize> = Vec::new();
        let mut members: Vec<Vec<bool>> = Vec::new();
        for w in 0..self.world_count() {
            let mut sig = vec![0u64; words];
            for (k, s) in sets.iter().enumerate() {
                if s.contains(w) {
                    sig[k / 64] |= 1 << (k % 64);
                }
            }
            class_of_sig.entry(sig).or_insert_with(|| {
                reps.push(w);
                members.push(sets.iter().map(|s| s.contains(w)).collect());
                reps.len() - 1
            });
        }

        let coeffs_of = |terms: &Terms| -> Vec<(usize, Rational)> {
            let mut out = Vec::new();
            for (class, member) in members.iter().enumerate() {
                let mut v = Rational::zero();
                for (s, c) in terms {
                    if member[set_id[&Arc::as_ptr(s)]] {
                        v += c;
                    }
                }
                if !v.is_zero() {
                    out.push((class, v));
                }
            }
            out
        };

        let mut sys = LinearSystem::new(reps.len());
        for r in rows {
            sys.push(LinRow::new(coeffs_of(&r.terms), r.relation, r.rhs.clone()));
        }
        let outcome = match objective {
            None => ratlp::feasible(&sys),
            Some((terms, sense)) => ratlp::optimize(&sys, &coeffs_of(terms), sense)?,
        };
        Ok(match outcome {
            Outcome::Infeasible => None,
            Outcome::Feasible(w) => Some((lift(&w, &reps), Rational::zero())),
            Outcome::Optimal { value, witness } => Some((lift(&witness, &reps), value)),
        })
    }

    /// Whether `cs` plus `extra` has a model; returns one when it does.
    pub fn satisfiable(
        &self,
        cs: &[&ConditionalConstraint],
        extra: &[MassRow],
    ) -> Result<Option<WitnessDistribution>, LogicError> {
        let mut rows = Vec::new();
        self.constraint_rows(cs, &mut rows)?;
        rows.push(self.mass_row(&MassRow::certain(Formula::Top))?);
        for m in extra {
            rows.push(self.mass_row(m)?);
        }
        Ok(self.solve(&rows, None)?.and_then(|(w, _)| WitnessDistribution::normalize(&w)))
    }

    pub fn is_satisfiable(&self, cs: &[&ConditionalConstraint], extra: &[MassRow]) -> Result<bool, LogicError> {
        Ok(self.satisfiable(cs, extra)?.is_some())
    }

    fn bounds(&self, rows: &[SetRow], objective: &Terms) -> Result<TightBounds, LogicError> {
        let Some((wmin, lo)) = self.solve(rows, Some((objective, Sense::Minimize)))? else {
            return Ok(TightBounds::empty());
        };
        let (wmax, hi) = self.solve(rows, Some((objective, Sense::Maximize)))?.expect("feasible region vanished");
        Ok(TightBounds {
            interval: Interval::new(lo, hi),
            lower_witness: WitnessDistribution::normalize(&wmin),
            upper_witness: WitnessDistribution::normalize(&wmax),
        })
    }

    /// Inf and sup of `Pr(β|α)` over models of `cs` with `Pr(α) > 0`;
    /// `[1, 0]` when there is no such model.
    pub fn tight_0_bounds(
        &self,
        cs: &[&ConditionalConstraint],
        beta: &Formula,
        alpha: &Formula,
    ) -> Result<TightBounds, LogicError> {
        let mut rows = Vec::new();
        self.constraint_rows(cs, &mut rows)?;
        rows.push(self.mass_row(&MassRow::certain(alpha.clone()))?);
        let objective = vec![(self.sat.get(&beta.clone().and(alpha.clone()))?, Rational::one())];
        self.bounds(&rows, &objective)
    }

    pub fn tight_0_consequence(
        &self,
        cs: &[&ConditionalConstraint],
        beta: &Formula,
        alpha: &Formula,
    ) -> Result<Interval, LogicError> {
        Ok(self.tight_0_bounds(cs, beta, alpha)?.interval)
    }

    /// Inf and sup of `Pr(β)` over models of `cs` with `Pr(α) = 1`.
    pub fn tight_1_bounds(
        &self,
        cs: &[&ConditionalConstraint],
        beta: &Formula,
        alpha: &Formula,
    ) -> Result<TightBounds, LogicError> {
        let mut rows = Vec::new();
        self.constraint_rows(cs, &mut rows)?;
        rows.push(self.mass_row(&MassRow::certain(Formula::Top))?);
        rows.push(self.mass_row(&MassRow::zero(alpha.clone().not()))?);
        let objective = vec![(self.sat.get(beta)?, Rational::one())];
        self.bounds(&rows, &objective)
    }

    pub fn tight_1_consequence(
        &self,
        cs: &[&ConditionalConstraint],
        beta: &Formula,
        alpha: &Formula,
    ) -> Result<Interval, LogicError> {
        Ok(self.tight_1_bounds(cs, beta, alpha)?.interval)
    }
}

fn lift(w: &Witness, reps: &[usize]) -> Witness {
    w.iter().map(|(class, v)| (reps[class], v.clone())).collect()
}

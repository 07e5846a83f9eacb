//! Inference postulates as executable checks.
//!
//! Every "P ⊩ C" in a postulate is decided through tight intervals: `P ⊩
//! (ψ|ε)[l,u]` iff the tight interval of `(ψ|ε)` lies inside `[l,u]`, with
//! the empty interval inside everything. When a postulate quantifies over
//! all `[l,u]`, the tight interval of the premise is the strongest instance.

use std::fmt;

use rand::seq::IndexedRandom;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

use super::random::random_formula;
use crate::defaults::{Engine, EngineError, Semantics};
use crate::logical::Interval;
use crate::syntax::{render_program, ConditionalConstraint, Formula, Program, Rational};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Postulate {
    RightWeakening,
    Reflexivity,
    LeftLogicalEquivalence,
    Cut,
    CautiousMonotonicity,
    Or,
    RationalMonotonicity,
    Irrelevance,
    DirectInference,
}

impl Postulate {
    pub const ALL: [Postulate; 9] = [
        Postulate::RightWeakening,
        Postulate::Reflexivity,
        Postulate::LeftLogicalEquivalence,
        Postulate::Cut,
        Postulate::CautiousMonotonicity,
        Postulate::Or,
        Postulate::RationalMonotonicity,
        Postulate::Irrelevance,
        Postulate::DirectInference,
    ];

    pub fn short_name(self) -> &'static str {
        match self {
            Postulate::RightWeakening => "RW",
            Postulate::Reflexivity => "Ref",
            Postulate::LeftLogicalEquivalence => "LLE",
            Postulate::Cut => "Cut",
            Postulate::CautiousMonotonicity => "CM",
            Postulate::Or => "Or",
            Postulate::RationalMonotonicity => "RM",
            Postulate::Irrelevance => "Irr",
            Postulate::DirectInference => "DI",
        }
    }
}

impl fmt::Display for Postulate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.short_name())
    }
}

/// Formulas for one round of checks. `fresh` uses only atoms outside the
/// program and the other formulas; `eps_equiv` is equivalent to `eps`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Instance {
    pub eps: Formula,
    pub eps2: Formula,
    pub eps_equiv: Formula,
    pub phi: Formula,
    pub psi: Formula,
    pub fresh: Formula,
    /// A member of `ground(P)` and a formula equivalent to its antecedent.
    pub direct: Option<(ConditionalConstraint, Formula)>,
}

impl fmt::Display for Instance {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "eps = {}; eps' = {}; eps (rewritten) = {}; phi = {}; psi = {}; fresh eps' = {}",
            self.eps, self.eps2, self.eps_equiv, self.phi, self.psi, self.fresh
        )?;
        if let Some((c, e)) = &self.direct {
            write!(f, "; member = {c}; its antecedent as {e}")?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Outcome {
    Holds,
    NotApplicable,
    Violated(String),
}

/// A syntactically different formula with the same models.
pub fn equivalent_rewrite(rng: &mut ChaCha8Rng, f: &Formula) -> Formula {
    match rng.random_range(0..4) {
        0 => f.clone().not().not(),
        1 => f.clone().and(Formula::Top),
        2 => match f {
            Formula::And(l, r) if l != r => (**r).clone().and((**l).clone()),
            _ => f.clone().and(f.clone()),
        },
        _ => f.clone().or(Formula::Bottom),
    }
}

/// Draws an instance over `atoms`; the fresh formula is over `fresh_atoms`.
/// Half of the time `ε` is weakened from `ε'` so that the Cut and CM
/// premise holds.
pub fn draw_instance(rng: &mut ChaCha8Rng, engine: &Engine, atoms: &[String], fresh_atoms: &[String]) -> Instance {
    let eps2 = random_formula(rng, atoms);
    let eps =
        if rng.random_bool(0.5) { eps2.clone().or(random_formula(rng, atoms)) } else { random_formula(rng, atoms) };
    let eps_equiv = equivalent_rewrite(rng, &eps);
    let phi = random_formula(rng, atoms);
    let psi = random_formula(rng, atoms);
    let fresh = random_formula(rng, fresh_atoms);
    let members: Vec<&ConditionalConstraint> = engine.theory().all().collect();
    let direct = members.choose(rng).map(|c| ((*c).clone(), equivalent_rewrite(rng, &c.antecedent)));
    Instance { eps, eps2, eps_equiv, phi, psi, fresh, direct }
}

fn certain() -> Interval {
    Interval::point(Rational::from_integer(1.into()))
}

struct Checker<'a> {
    engine: &'a Engine,
    s: Semantics,
}

impl Checker<'_> {
    fn tight(&self, beta: &Formula, alpha: &Formula) -> Result<Interval, EngineError> {
        Ok(self.engine.tight(beta, alpha, self.s)?.interval)
    }

    fn equivalent(&self, a: &Formula, b: &Formula) -> Result<bool, EngineError> {
        let r = self.engine.reasoner();
        Ok(r.satisfying_set(a)? == r.satisfying_set(b)?)
    }

    fn subset(&self, what: &str, x: &Interval, y: &Interval) -> Outcome {
        if x.is_subset_of(y) {
            Outcome::Holds
        } else {
            Outcome::Violated(format!("{what}: {x} is not inside {y}"))
        }
    }

    fn check(&self, p: Postulate, i: &Instance) -> Result<Outcome, EngineError> {
        let (eps, eps2, phi, psi) = (&i.eps, &i.eps2, &i.phi, &i.psi);
        let both = eps.clone().and(eps2.clone());
        Ok(match p {
            Postulate::RightWeakening => {
                let t = self.tight(phi, eps)?;
                let premise = if t.is_empty() { Interval::unit() } else { t };
                // the tightest (ψ|⊤)[l',u'] implied by (φ|⊤)[l,u] alone
                let c = ConditionalConstraint::new(
                    phi.clone(),
                    Formula::Top,
                    premise.lower().clone(),
                    premise.upper().clone(),
                );
                let implied = self.engine.reasoner().tight_0_consequence(&[&c], psi, &Formula::Top)?;
                if implied.is_empty() {
                    Outcome::NotApplicable
                } else {
                    self.subset(&format!("tight(psi|eps) under (phi|eps){premise}"), &self.tight(psi, eps)?, &implied)
                }
            }
            Postulate::Reflexivity => self.subset("tight(eps|eps)", &self.tight(eps, eps)?, &certain()),
            Postulate::LeftLogicalEquivalence => {
                if !self.equivalent(eps, &i.eps_equiv)? {
                    return Ok(Outcome::NotApplicable);
                }
                let (a, b) = (self.tight(phi, eps)?, self.tight(phi, &i.eps_equiv)?);
                if a == b {
                    Outcome::Holds
                } else {
                    Outcome::Violated(format!("tight(phi|eps) = {a} but tight(phi|eps rewritten) = {b}"))
                }
            }
            Postulate::Cut | Postulate::CautiousMonotonicity => {
                if !self.tight(eps, eps2)?.is_subset_of(&certain()) {
                    return Ok(Outcome::NotApplicable);
                }
                let (narrow, wide) = (self.tight(phi, &both)?, self.tight(phi, eps2)?);
                if p == Postulate::Cut {
                    self.subset("tight(phi|eps') vs tight(phi|eps & eps')", &wide, &narrow)
                } else {
                    self.subset("tight(phi|eps & eps') vs tight(phi|eps')", &narrow, &wide)
                }
            }
            Postulate::Or => {
                let hull = self.tight(phi, eps)?.hull(&self.tight(phi, eps2)?);
                let disj = self
                    .engine
                    .tight_consequence_disjunctive_evidence(&[eps.clone(), eps2.clone()], phi, self.s)?
                    .interval;
                self.subset("tight(phi|eps or eps') vs hull of the branches", &disj, &hull)
            }
            Postulate::RationalMonotonicity => {
                if self.engine.entails_negated_classical(eps, eps2, self.s)? {
                    return Ok(Outcome::NotApplicable);
                }
                self.subset("tight(psi|eps & eps') vs tight(psi|eps)", &self.tight(psi, &both)?, &self.tight(psi, eps)?)
            }
            Postulate::Irrelevance => {
                let with_fresh = eps.clone().and(i.fresh.clone());
                self.subset(
                    "tight(psi|eps & fresh) vs tight(psi|eps)",
                    &self.tight(psi, &with_fresh)?,
                    &self.tight(psi, eps)?,
                )
            }
            Postulate::DirectInference => {
                let Some((c, e)) = &i.direct else { return Ok(Outcome::NotApplicable) };
                if !self.equivalent(e, &c.antecedent)? {
                    return Ok(Outcome::NotApplicable);
                }
                let stated = Interval::new(c.lower.clone(), c.upper.clone());
                self.subset(&format!("tight({}|{e})", c.consequent), &self.tight(&c.consequent, e)?, &stated)
            }
        })
    }
}

pub fn check(engine: &Engine, postulate: Postulate, instance: &Instance, s: Semantics) -> Result<Outcome, EngineError> {
    Checker { engine, s }.check(postulate, instance)
}

/// Everything needed to reproduce a failing check.
pub fn describe_failure(
    program: &Program,
    postulate: Postulate,
    s: Semantics,
    instance: &Instance,
    detail: &str,
) -> String {
    format!(
        "{postulate} fails under {s}-entailment\nprogram:\n{}instance: {instance}\n{detail}",
        render_program(program, false)
    )
}

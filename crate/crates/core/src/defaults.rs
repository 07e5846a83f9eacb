//! Default reasoning: toleration, the z-partition, and tight z- and
//! lex-consequence, plus the checks needed to state the inference
//! postulates (negated classical constraints, disjunctive evidence).
//!
//! Defaults are referred to by their index in [`GroundTheory::defaults`];
//! subsets are sorted index vectors.

use std::cmp::Ordering;
use std::collections::{BTreeSet, HashMap};
use std::fmt;
use std::str::FromStr;
use std::sync::{Mutex, OnceLock};

use itertools::Itertools;
use thiserror::Error;

use crate::ground::{
    ground_instances_of_query, ground_program, herbrand_base, herbrand_universe, split_theory, GroundError,
    GroundTheory, HerbrandBase, Substitution,
};
use crate::logical::{Interval, LogicError, MassRow, Reasoner, TightBounds};
use crate::par;
use crate::syntax::{ConditionalConstraint, Formula, Program, Query, QueryBounds};
use crate::worlds::{WorldError, WorldSpace, DEFAULT_MAX_ATOMS};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum EngineError {
    #[error(transparent)]
    Ground(#[from] GroundError),
    #[error(transparent)]
    World(#[from] WorldError),
    #[error(transparent)]
    Logic(#[from] LogicError),
    #[error("the program is inconsistent: it has no z-partition")]
    Inconsistent,
    #[error("{0} entailment needs a ground query")]
    NotGround(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Semantics {
    Zero,
    One,
    Z,
    Lex,
}

impl Semantics {
    pub const ALL: [Semantics; 4] = [Semantics::Zero, Semantics::One, Semantics::Z, Semantics::Lex];

    pub fn is_default_semantics(self) -> bool {
        matches!(self, Semantics::Z | Semantics::Lex)
    }
}

impl fmt::Display for Semantics {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Semantics::Zero => "0",
            Semantics::One => "1",
            Semantics::Z => "z",
            Semantics::Lex => "lex",
        })
    }
}

impl FromStr for Semantics {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "0" => Ok(Semantics::Zero),
            "1" => Ok(Semantics::One),
            "z" => Ok(Semantics::Z),
            "lex" => Ok(Semantics::Lex),
            other => Err(format!("unknown semantics {other:?}; expected 0, 1, z or lex")),
        }
    }
}

/// The ordered levels `D_0 .. D_k` of a consistent theory.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ZPartition {
    indices: Vec<Vec<usize>>,
    levels: Vec<Vec<ConditionalConstraint>>,
}

impl ZPartition {
    fn new(indices: Vec<Vec<usize>>, defaults: &[ConditionalConstraint]) -> Self {
        let levels = indices.iter().map(|l| l.iter().map(|&i| defaults[i].clone()).collect()).collect();
        ZPartition { indices, levels }
    }

    pub fn levels(&self) -> &[Vec<ConditionalConstraint>] {
        &self.levels
    }

    /// Level contents as indices into the theory's defaults.
    pub fn level_indices(&self) -> &[Vec<usize>] {
        &self.indices
    }

    /// Number of levels, `k + 1`.
    pub fn len(&self) -> usize {
        self.levels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.levels.is_empty()
    }

    /// `z(d)` for the default with index `d`.
    pub fn rank(&self, d: usize) -> Option<usize> {
        self.indices.iter().position(|l| l.contains(&d))
    }

    /// `|H ∩ D_j|` for `j = k, k-1, .., 0`.
    pub fn counts(&self, h: &[usize]) -> Vec<usize> {
        self.indices.iter().rev().map(|l| l.iter().filter(|d| h.contains(d)).count()).collect()
    }
}

/// How good the minimal models for some evidence are.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Preference {
    /// `κ^z` of every z-minimal model: index of the lowest level kept, or
    /// `k + 1` when none is.
    Rank(usize),
    /// Satisfied defaults per level, top level first.
    Counts(Vec<usize>),
}

impl Preference {
    /// `Greater` when `self` is strictly preferred.
    pub fn compare(&self, other: &Preference) -> Ordering {
        match (self, other) {
            (Preference::Rank(a), Preference::Rank(b)) => b.cmp(a),
            (Preference::Counts(a), Preference::Counts(b)) => a.cmp(b),
            _ => panic!("comparing preferences of different semantics"),
        }
    }
}

/// Minimal models for some evidence `α`: exactly the union of the models of
/// `S ∪ {(α|⊤)[1,1]} ∪ H` over the listed `H`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MinimalSystems {
    pub preference: Preference,
    pub sets: Vec<Vec<usize>>,
}

/// One ground instance of a query with its tight interval.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct InstanceAnswer {
    pub theta: Substitution,
    pub query: Query,
    pub bounds: TightBounds,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Answer {
    /// For `[X, Y]` queries: every ground instance in grounding order.
    Tight(Vec<InstanceAnswer>),
    /// For `[l, u]` queries: the instances whose constraint is entailed.
    Yes(Vec<Substitution>),
    No,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct EngineConfig {
    pub max_atoms: usize,
    pub parallel: bool,
}

impl Default for EngineConfig {
    fn default() -> Self {
        EngineConfig { max_atoms: DEFAULT_MAX_ATOMS, parallel: par::AVAILABLE }
    }
}

/// A ground theory over a fixed world space, with its z-partition computed
/// on first use and satisfiability results memoized.
#[derive(Debug)]
pub struct Engine {
    theory: GroundTheory,
    universe: BTreeSet<String>,
    reasoner: Reasoner,
    parallel: bool,
    partition: OnceLock<Option<ZPartition>>,
    memo: Mutex<HashMap<(Formula, Vec<usize>), bool>>,
}

impl Engine {
    /// Grounds `program` over the constants of the program and the query,
    /// over the atoms that occur in either.
    pub fn new(program: &Program, query: Option<&Query>, config: EngineConfig) -> Result<Self, EngineError> {
        Self::with_constants(program, query, &BTreeSet::new(), config)
    }

    /// Like [`Engine::new`] with `extra` added to the Herbrand universe.
    pub fn with_constants(
        program: &Program,
        query: Option<&Query>,
        extra: &BTreeSet<String>,
        config: EngineConfig,
    ) -> Result<Self, EngineError> {
        let mut universe = extra.clone();
        universe.extend(herbrand_universe_lenient(program, query));
        check_groundable(program, query, &universe)?;
        let theory = split_theory(ground_program(program, &universe)?);
        let base = herbrand_base(program, query, &universe, true, config.max_atoms)?;
        let mut engine = Self::from_theory(theory, base, config)?;
        engine.universe = universe;
        Ok(engine)
    }

    pub fn from_theory(theory: GroundTheory, base: HerbrandBase, config: EngineConfig) -> Result<Self, EngineError> {
        let space = WorldSpace::enumerate(base, config.max_atoms)?;
        Ok(Engine {
            theory,
            universe: BTreeSet::new(),
            reasoner: Reasoner::new(space),
            parallel: config.parallel,
            partition: OnceLock::new(),
            memo: Mutex::new(HashMap::new()),
        })
    }

    pub fn theory(&self) -> &GroundTheory {
        &self.theory
    }

    pub fn defaults(&self) -> &[ConditionalConstraint] {
        &self.theory.defaults
    }

    pub fn reasoner(&self) -> &Reasoner {
        &self.reasoner
    }

    pub fn universe(&self) -> &BTreeSet<String> {
        &self.universe
    }

    pub fn parallel(&self) -> bool {
        self.parallel
    }

    pub fn set_parallel(&mut self, parallel: bool) {
        self.parallel = parallel;
    }

    /// `S ∪ {(α|⊤)[1,1]} ∪ H` handed to `f` as a slice.
    fn with_system<R>(
        &self,
        evidence: Option<&Formula>,
        h: &[usize],
        f: impl FnOnce(&[&ConditionalConstraint]) -> R,
    ) -> R {
        let certain = evidence.map(|a| ConditionalConstraint::certain(a.clone()));
        let cs: Vec<&ConditionalConstraint> = self
            .theory
            .strict
            .iter()
            .chain(certain.as_ref())
            .chain(h.iter().map(|&i| &self.theory.defaults[i]))
            .collect();
        f(&cs)
    }

    /// Satisfiability of `S ∪ {(α|⊤)[1,1]} ∪ H`, memoized.
    pub fn satisfiable_with(&self, evidence: &Formula, h: &[usize]) -> Result<bool, EngineError> {
        let key = (evidence.clone(), h.to_vec());
        if let Some(&hit) = self.memo.lock().expect("memo poisoned").get(&key) {
            return Ok(hit);
        }
        let sat = self.with_system(Some(evidence), h, |cs| self.reasoner.is_satisfiable(cs, &[]))?;
        self.memo.lock().expect("memo poisoned").insert(key, sat);
        Ok(sat)
    }

    /// Whether `S ∪ R` has a model verifying default `c`.
    pub fn tolerates(&self, c: usize, r: &[usize]) -> Result<bool, EngineError> {
        let mut h: Vec<usize> = r.to_vec();
        if !h.contains(&c) {
            h.push(c);
            h.sort_unstable();
        }
        self.satisfiable_with(&self.theory.defaults[c].antecedent, &h)
    }

    fn compute_partition(&self) -> Result<Option<ZPartition>, EngineError> {
        let mut remainder: Vec<usize> = (0..self.theory.defaults.len()).collect();
        let mut levels = Vec::new();
        while !remainder.is_empty() {
            let tolerated = par::try_map(self.parallel, &remainder, |&c| self.tolerates(c, &remainder))?;
            let pick =
                |want: bool| remainder.iter().zip(&tolerated).filter(|(_, &t)| t == want).map(|(&c, _)| c).collect();
            let level: Vec<usize> = pick(true);
            if level.is_empty() {
                return Ok(None);
            }
            remainder = pick(false);
            levels.push(level);
        }
        Ok(Some(ZPartition::new(levels, &self.theory.defaults)))
    }

    /// The z-partition, or `None` when the theory is inconsistent.
    pub fn z_partition(&self) -> Result<Option<&ZPartition>, EngineError> {
        if let Some(p) = self.partition.get() {
            return Ok(p.as_ref());
        }
        let p = self.compute_partition()?;
        Ok(self.partition.get_or_init(|| p).as_ref())
    }

    pub fn is_consistent(&self) -> Result<bool, EngineError> {
        Ok(self.z_partition()?.is_some())
    }

    fn partition_or_err(&self) -> Result<&ZPartition, EngineError> {
        self.z_partition()?.ok_or(EngineError::Inconsistent)
    }

    /// Re-derives every level from scratch, bypassing the memo.
    pub fn verify_partition(&self, zp: &ZPartition) -> Result<bool, EngineError> {
        let mut seen: Vec<usize> = zp.level_indices().concat();
        seen.sort_unstable();
        if seen != (0..self.theory.defaults.len()).collect::<Vec<_>>() {
            return Ok(false);
        }
        for (i, level) in zp.level_indices().iter().enumerate() {
            let remainder: Vec<usize> = zp.level_indices()[i..].concat();
            for &c in &remainder {
                let tolerated = self.with_system(Some(&self.theory.defaults[c].antecedent), &remainder, |cs| {
                    self.reasoner.is_satisfiable(cs, &[])
                })?;
                if tolerated != level.contains(&c) {
                    return Ok(false);
                }
            }
        }
        Ok(true)
    }

    /// The z-minimal default system: levels are added from the top while
    /// the result stays satisfiable. `None` when `S ∪ {(α|⊤)[1,1]}` is
    /// unsatisfiable.
    pub fn z_minimal_system(&self, alpha: &Formula) -> Result<Option<MinimalSystems>, EngineError> {
        let zp = self.partition_or_err()?;
        if !self.satisfiable_with(alpha, &[])? {
            return Ok(None);
        }
        let mut r: Vec<usize> = Vec::new();
        let mut rank = zp.len();
        for j in (0..zp.len()).rev() {
            let mut next = r.clone();
            next.extend(&zp.level_indices()[j]);
            next.sort_unstable();
            if !self.satisfiable_with(alpha, &next)? {
                break;
            }
            r = next;
            rank = j;
        }
        Ok(Some(MinimalSystems { preference: Preference::Rank(rank), sets: vec![r] }))
    }

    /// The lex-minimal default family, enumerating each level's subsets by
    /// decreasing size and stopping at the first size with a satisfiable
    /// union.
    pub fn lex_minimal_family(&self, alpha: &Formula) -> Result<Option<MinimalSystems>, EngineError> {
        let zp = self.partition_or_err()?;
        if !self.satisfiable_with(alpha, &[])? {
            return Ok(None);
        }
        let mut family: Vec<Vec<usize>> = vec![Vec::new()];
        let mut counts = Vec::with_capacity(zp.len());
        for level in zp.level_indices().iter().rev() {
            for size in (0..=level.len()).rev() {
                let candidates: Vec<Vec<usize>> = level
                    .iter()
                    .copied()
                    .combinations(size)
                    .cartesian_product(family.iter())
                    .map(|(g, h)| {
                        let mut u: Vec<usize> = g.into_iter().chain(h.iter().copied()).collect();
                        u.sort_unstable();
                        u
                    })
                    .collect();
                let sat = par::try_map(self.parallel, &candidates, |u| self.satisfiable_with(alpha, u))?;
                let next: Vec<Vec<usize>> =
                    candidates.into_iter().zip(sat).filter(|(_, s)| *s).map(|(u, _)| u).collect();
                if !next.is_empty() {
                    family = next;
                    counts.push(size);
                    break;
                }
            }
        }
        family.sort();
        Ok(Some(MinimalSystems { preference: Preference::Counts(counts), sets: family }))
    }

    pub fn minimal_systems(&self, alpha: &Formula, s: Semantics) -> Result<Option<MinimalSystems>, EngineError> {
        match s {
            Semantics::Z => self.z_minimal_system(alpha),
            Semantics::Lex => self.lex_minimal_family(alpha),
            other => panic!("{other}-entailment has no minimal models"),
        }
    }

    /// Hull of `tight_0(S ∪ {(α|⊤)[1,1]} ∪ H, β, ⊤)` over the given sets.
    fn aggregate(&self, branches: &[(&Formula, &Vec<usize>)], beta: &Formula) -> Result<TightBounds, EngineError> {
        let parts = par::try_map(self.parallel, branches, |(alpha, h)| {
            self.with_system(Some(alpha), h, |cs| self.reasoner.tight_0_bounds(cs, beta, &Formula::Top))
        })?;
        Ok(parts.into_iter().fold(TightBounds::empty(), TightBounds::hull))
    }

    fn tight_default(&self, beta: &Formula, alpha: &Formula, s: Semantics) -> Result<TightBounds, EngineError> {
        match self.minimal_systems(alpha, s)? {
            None => Ok(TightBounds::empty()),
            Some(m) => {
                let branches: Vec<(&Formula, &Vec<usize>)> = m.sets.iter().map(|h| (alpha, h)).collect();
                self.aggregate(&branches, beta)
            }
        }
    }

    pub fn tight_z_consequence(&self, beta: &Formula, alpha: &Formula) -> Result<TightBounds, EngineError> {
        self.tight_default(beta, alpha, Semantics::Z)
    }

    pub fn tight_lex_consequence(&self, beta: &Formula, alpha: &Formula) -> Result<TightBounds, EngineError> {
        self.tight_default(beta, alpha, Semantics::Lex)
    }

    /// Tight interval for ground `(β|α)` under `s`.
    pub fn tight(&self, beta: &Formula, alpha: &Formula, s: Semantics) -> Result<TightBounds, EngineError> {
        if !beta.is_ground() || !alpha.is_ground() {
            return Err(EngineError::NotGround(s.to_string()));
        }
        let all: Vec<&ConditionalConstraint> = self.theory.all().collect();
        match s {
            Semantics::Zero => Ok(self.reasoner.tight_0_bounds(&all, beta, alpha)?),
            Semantics::One => Ok(self.reasoner.tight_1_bounds(&all, beta, alpha)?),
            Semantics::Z | Semantics::Lex => self.tight_default(beta, alpha, s),
        }
    }

    /// `P ⊩ c` for ground `c`; an empty tight interval entails everything.
    pub fn s_consequence(&self, c: &ConditionalConstraint, s: Semantics) -> Result<bool, EngineError> {
        let t = self.tight(&c.consequent, &c.antecedent, s)?;
        Ok(t.interval.is_subset_of(&Interval::new(c.lower.clone(), c.upper.clone())))
    }

    /// `P ⊩ ¬(ε'|ε)[1,1]`: every minimal model for `ε` gives `ε ∧ ¬ε'`
    /// positive probability.
    pub fn entails_negated_classical(&self, eps: &Formula, eps2: &Formula, s: Semantics) -> Result<bool, EngineError> {
        let Some(m) = self.minimal_systems(eps, s)? else {
            return Ok(true);
        };
        let zero = [MassRow::zero(eps.clone().and(eps2.clone().not()))];
        for h in &m.sets {
            if self.with_system(Some(eps), h, |cs| self.reasoner.is_satisfiable(cs, &zero))? {
                return Ok(false);
            }
        }
        Ok(true)
    }

    /// Tight interval for `(β|ε_1 ∨ .. ∨ ε_m)` where the disjunction is over
    /// the probabilistic formulas `(ε_i|⊤)[1,1]`. Only branches whose
    /// minimal models are globally best contribute.
    pub fn tight_consequence_disjunctive_evidence(
        &self,
        evidence: &[Formula],
        beta: &Formula,
        s: Semantics,
    ) -> Result<TightBounds, EngineError> {
        let mut best: Option<Preference> = None;
        let mut kept: Vec<(&Formula, MinimalSystems)> = Vec::new();
        for eps in evidence {
            let Some(m) = self.minimal_systems(eps, s)? else { continue };
            match best.as_ref().map(|b| m.preference.compare(b)) {
                Some(Ordering::Less) => continue,
                Some(Ordering::Greater) => kept.clear(),
                _ => {}
            }
            best = Some(m.preference.clone());
            kept.push((eps, m));
        }
        let branches: Vec<(&Formula, &Vec<usize>)> =
            kept.iter().flat_map(|(eps, m)| m.sets.iter().map(move |h| (*eps, h))).collect();
        self.aggregate(&branches, beta)
    }

    /// Answers `q` under `s`, grounding it over this engine's universe.
    pub fn answer(&self, q: &Query, s: Semantics) -> Result<Answer, EngineError> {
        if s.is_default_semantics() {
            self.partition_or_err()?;
        }
        let instances = ground_instances_of_query(q, &self.universe)?;
        let answers = par::try_map(self.parallel, &instances, |(theta, gq)| {
            let bounds = self.tight(&gq.consequent, &gq.antecedent, s)?;
            Ok::<_, EngineError>(InstanceAnswer { theta: theta.clone(), query: gq.clone(), bounds })
        })?;
        Ok(match &q.bounds {
            QueryBounds::Variables { .. } => Answer::Tight(answers),
            QueryBounds::Numeric { lower, upper } => {
                let target = Interval::new(lower.clone(), upper.clone());
                let yes: Vec<Substitution> =
                    answers.into_iter().filter(|a| a.bounds.interval.is_subset_of(&target)).map(|a| a.theta).collect();
                if yes.is_empty() {
                    Answer::No
                } else {
                    Answer::Yes(yes)
                }
            }
        })
    }
}

fn herbrand_universe_lenient(p: &Program, q: Option<&Query>) -> BTreeSet<String> {
    herbrand_universe(p, q).unwrap_or_default()
}

fn check_groundable(p: &Program, q: Option<&Query>, universe: &BTreeSet<String>) -> Result<(), GroundError> {
    if universe.is_empty() {
        herbrand_universe(p, q)?;
    }
    Ok(())
}

/// Whether `p`, grounded over its own constants and `extra`, has a
/// z-partition. Programs without defaults are consistent without looking at
/// worlds at all.
pub fn is_consistent(p: &Program, extra: &BTreeSet<String>, config: EngineConfig) -> Result<bool, EngineError> {
    let mut universe = extra.clone();
    universe.extend(herbrand_universe_lenient(p, None));
    check_groundable(p, None, &universe)?;
    let theory = split_theory(ground_program(p, &universe)?);
    if theory.defaults.is_empty() {
        return Ok(true);
    }
    Engine::with_constants(p, None, extra, config)?.is_consistent()
}

pub fn answer_query(p: &Program, q: &Query, s: Semantics, config: EngineConfig) -> Result<Answer, EngineError> {
    Engine::new(p, Some(q), config)?.answer(q, s)
}

fn constraint_query(c: &ConditionalConstraint) -> Query {
    Query {
        consequent: c.consequent.clone(),
        antecedent: c.antecedent.clone(),
        bounds: QueryBounds::Numeric { lower: c.lower.clone(), upper: c.upper.clone() },
    }
}

/// `P ⊩ c`; a non-ground `c` must hold for every ground instance.
pub fn s_consequence(
    p: &Program,
    c: &ConditionalConstraint,
    s: Semantics,
    config: EngineConfig,
) -> Result<bool, EngineError> {
    let q = constraint_query(c);
    let engine = Engine::new(p, Some(&q), config)?;
    for (_, gq) in ground_instances_of_query(&q, engine.universe())? {
        let gc = ConditionalConstraint::new(gq.consequent, gq.antecedent, c.lower.clone(), c.upper.clone());
        if !engine.s_consequence(&gc, s)? {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Inf of the lower and sup of the upper tight bounds over all ground
/// instances of `(ψ|φ)`. Instances with no relevant model are skipped
/// unless every instance is like that.
pub fn tight_s_consequence_nonground(
    p: &Program,
    psi: &Formula,
    phi: &Formula,
    s: Semantics,
    config: EngineConfig,
) -> Result<Interval, EngineError> {
    let q = Query::tight(psi.clone(), phi.clone());
    match answer_query(p, &q, s, config)? {
        Answer::Tight(rows) => Ok(rows.iter().fold(Interval::empty(), |acc, r| acc.hull(&r.bounds.interval))),
        _ => unreachable!("variables query answered with yes/no"),
    }
}

//! Brute-force minimal sets: every subset of the defaults is tried, and the
//! preferred ones are picked by direct pairwise comparison. Shares only the
//! LP layer and the z-partition with the staged algorithms in `defaults`.

pub mod postulates;
pub mod random;

use std::collections::HashMap;
use std::sync::{Arc, Mutex};

use thiserror::Error;

use crate::defaults::{Engine, EngineError, Semantics, ZPartition};
use crate::logical::{Interval, TightBounds, WitnessDistribution};
use crate::par;
use crate::syntax::{ConditionalConstraint, Formula};

pub use random::{random_formula, random_program, RandomParams};

pub const DEFAULT_ORACLE_CAP: usize = 12;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum OracleError {
    #[error("{count} defaults exceed the oracle cap of {cap}; raise --oracle-cap")]
    CapExceeded { count: usize, cap: usize },
    #[error(transparent)]
    Engine(#[from] EngineError),
}

/// A subset of the defaults as a bitmask over their indices.
pub type Mask = u64;

/// The s-minimal satisfiable subsets, each with a model of `R ∪ H`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MinimalFamily {
    pub members: Vec<(Mask, WitnessDistribution)>,
}

impl MinimalFamily {
    pub fn sets(&self) -> Vec<Vec<usize>> {
        self.members.iter().map(|(m, _)| indices(*m)).collect()
    }
}

pub fn indices(m: Mask) -> Vec<usize> {
    (0..Mask::BITS as usize).filter(|i| m >> i & 1 == 1).collect()
}

fn level_masks(zp: &ZPartition) -> Vec<Mask> {
    zp.level_indices().iter().map(|l| l.iter().fold(0, |m, &i| m | 1 << i)).collect()
}

/// `G` is z-preferable to `H`: some level is inside `G` but not `H`, and
/// every higher level is inside both.
pub fn z_preferable(levels: &[Mask], g: Mask, h: Mask) -> bool {
    for i in (0..levels.len()).rev() {
        let d = levels[i];
        let in_g = g & d == d;
        let in_h = h & d == d;
        if in_g && !in_h {
            return true;
        }
        if !(in_g && in_h) {
            return false;
        }
    }
    false
}

/// `G` is lex-preferable to `H`: at the highest level where they differ in
/// how many defaults they keep, `G` keeps more.
pub fn lex_preferable(levels: &[Mask], g: Mask, h: Mask) -> bool {
    for &d in levels.iter().rev() {
        let (a, b) = ((g & d).count_ones(), (h & d).count_ones());
        if a != b {
            return a > b;
        }
    }
    false
}

/// Every default subset consistent with some evidence, each with a model.
pub type SatisfiableSubsets = Arc<Vec<(Mask, WitnessDistribution)>>;

/// Enumerates subsets against one engine's theory, caching the satisfiable
/// subsets per evidence formula.
pub struct Oracle<'a> {
    engine: &'a Engine,
    cap: usize,
    memo: Mutex<HashMap<Formula, SatisfiableSubsets>>,
}

impl<'a> Oracle<'a> {
    pub fn new(engine: &'a Engine, cap: usize) -> Self {
        Oracle { engine, cap, memo: Mutex::new(HashMap::new()) }
    }

    fn system(&self, alpha: &Formula, h: Mask) -> Vec<ConditionalConstraint> {
        let t = self.engine.theory();
        let mut cs: Vec<ConditionalConstraint> = t.strict.clone();
        cs.push(ConditionalConstraint::certain(alpha.clone()));
        cs.extend(indices(h).into_iter().map(|i| t.defaults[i].clone()));
        cs
    }

    /// Every `H` with `S ∪ {(α|⊤)[1,1]} ∪ H` satisfiable, ascending by mask.
    pub fn satisfiable_subsets(&self, alpha: &Formula) -> Result<SatisfiableSubsets, OracleError> {
        if let Some(hit) = self.memo.lock().expect("oracle memo poisoned").get(alpha) {
            return Ok(Arc::clone(hit));
        }
        let n = self.engine.defaults().len();
        if n > self.cap || n >= Mask::BITS as usize {
            return Err(OracleError::CapExceeded { count: n, cap: self.cap });
        }
        let masks: Vec<Mask> = (0..1 << n).collect();
        let reasoner = self.engine.reasoner();
        let found = par::try_map(self.engine.parallel(), &masks, |&h| {
            let cs = self.system(alpha, h);
            let refs: Vec<&ConditionalConstraint> = cs.iter().collect();
            reasoner.satisfiable(&refs, &[]).map(|w| w.map(|w| (h, w)))
        })
        .map_err(EngineError::from)?;
        let sat = Arc::new(found.into_iter().flatten().collect::<Vec<_>>());
        self.memo.lock().expect("oracle memo poisoned").insert(alpha.clone(), Arc::clone(&sat));
        Ok(sat)
    }

    pub fn minimal_sets(&self, alpha: &Formula, s: Semantics) -> Result<MinimalFamily, OracleError> {
        let zp = self.engine.z_partition()?.ok_or(EngineError::Inconsistent)?;
        let levels = level_masks(zp);
        let preferable = match s {
            Semantics::Z => z_preferable,
            Semantics::Lex => lex_preferable,
            other => panic!("no minimal sets under {other}-entailment"),
        };
        let sat = self.satisfiable_subsets(alpha)?;
        let members =
            sat.iter().filter(|(h, _)| !sat.iter().any(|(g, _)| preferable(&levels, *g, *h))).cloned().collect();
        Ok(MinimalFamily { members })
    }

    /// `[1, 0]` when `R` is unsatisfiable, otherwise the hull of
    /// `tight_0(R ∪ H, β, ⊤)` over the minimal family.
    pub fn tight(&self, beta: &Formula, alpha: &Formula, s: Semantics) -> Result<Interval, OracleError> {
        let family = self.minimal_sets(alpha, s)?;
        let reasoner = self.engine.reasoner();
        let parts = par::try_map(self.engine.parallel(), &family.members, |(h, _)| {
            let cs = self.system(alpha, *h);
            let refs: Vec<&ConditionalConstraint> = cs.iter().collect();
            reasoner.tight_0_bounds(&refs, beta, &Formula::Top)
        })
        .map_err(EngineError::from)?;
        Ok(parts.into_iter().fold(TightBounds::empty(), TightBounds::hull).interval)
    }
}

pub fn minimal_sets_bruteforce(
    engine: &Engine,
    alpha: &Formula,
    s: Semantics,
    cap: usize,
) -> Result<MinimalFamily, OracleError> {
    Oracle::new(engine, cap).minimal_sets(alpha, s)
}

pub fn tight_consequence_oracle(
    engine: &Engine,
    beta: &Formula,
    alpha: &Formula,
    s: Semantics,
    cap: usize,
) -> Result<Interval, OracleError> {
    Oracle::new(engine, cap).tight(beta, alpha, s)
}

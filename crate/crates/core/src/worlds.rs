//! Possible worlds over a Herbrand base and truth of ground formulas.
//!
//! World `i` contains atom `j` iff bit `j` of `i` is set. Sets of worlds are
//! bitsets, so satisfying sets are built with word-wide boolean algebra
//! rather than per-world evaluation.

use std::collections::HashMap;
use std::sync::{Arc, RwLock};

use thiserror::Error;

use crate::ground::HerbrandBase;
use crate::syntax::{Atom, Formula};

pub const DEFAULT_MAX_ATOMS: usize = 20;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum WorldError {
    #[error(
        "{count} ground atoms give 2^{count} worlds, above the cap of 2^{cap}; raise --max-atoms or shrink the program"
    )]
    TooManyAtoms { count: usize, cap: usize },
    #[error("atom {0} is not in the Herbrand base")]
    UnknownAtom(String),
    #[error("formula {0} is not ground")]
    NotGround(String),
}

/// A possible world: the set of base positions it makes true.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct World(pub usize);

impl World {
    pub fn contains(self, atom: usize) -> bool {
        self.0 >> atom & 1 == 1
    }
}

/// A set of world indices over a fixed world count.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct WorldSet {
    len: usize,
    words: Vec<u64>,
}

impl WorldSet {
    pub fn empty(len: usize) -> Self {
        WorldSet { len, words: vec![0; len.div_ceil(64)] }
    }

    pub fn full(len: usize) -> Self {
        let mut s = WorldSet { len, words: vec![u64::MAX; len.div_ceil(64)] };
        s.trim();
        s
    }

    fn trim(&mut self) {
        let rem = self.len % 64;
        if rem != 0 {
            if let Some(last) = self.words.last_mut() {
                *last &= (1u64 << rem) - 1;
            }
        }
    }

    /// Worlds with bit `atom` set.
    pub fn atom(len: usize, atom: usize) -> Self {
        let mut s = WorldSet::empty(len);
        if atom >= 6 {
            // whole words alternate in runs of 2^(atom-6)
            let run = 1usize << (atom - 6);
            for (w, word) in s.words.iter_mut().enumerate() {
                if (w / run) % 2 == 1 {
                    *word = u64::MAX;
                }
            }
        } else {
            let mut pattern = 0u64;
            for bit in 0..64 {
                if bit >> atom & 1 == 1 {
                    pattern |= 1 << bit;
                }
            }
            s.words.iter_mut().for_each(|w| *w = pattern);
        }
        s.trim();
        s
    }

    pub fn universe_len(&self) -> usize {
        self.len
    }

    pub fn contains(&self, world: usize) -> bool {
        world < self.len && self.words[world / 64] >> (world % 64) & 1 == 1
    }

    pub fn insert(&mut self, world: usize) {
        assert!(world < self.len);
        self.words[world / 64] |= 1 << (world % 64);
    }

    pub fn count(&self) -> usize {
        self.words.iter().map(|w| w.count_ones() as usize).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.words.iter().all(|&w| w == 0)
    }

    pub fn complement(&self) -> Self {
        let mut s = WorldSet { len: self.len, words: self.words.iter().map(|w| !w).collect() };
        s.trim();
        s
    }

    pub fn intersection(&self, other: &WorldSet) -> Self {
        debug_assert_eq!(self.len, other.len);
        WorldSet { len: self.len, words: self.words.iter().zip(&other.words).map(|(a, b)| a & b).collect() }
    }

    pub fn union(&self, other: &WorldSet) -> Self {
        debug_assert_eq!(self.len, other.len);
        WorldSet { len: self.len, words: self.words.iter().zip(&other.words).map(|(a, b)| a | b).collect() }
    }

    pub fn iter(&self) -> impl Iterator<Item = usize> + '_ {
        self.words.iter().enumerate().flat_map(|(w, &word)| {
            let mut bits = word;
            std::iter::from_fn(move || {
                if bits == 0 {
                    return None;
                }
                let tz = bits.trailing_zeros() as usize;
                bits &= bits - 1;
                Some(w * 64 + tz)
            })
        })
    }
}

/// All worlds over a base.
#[derive(Debug, Clone)]
pub struct WorldSpace {
    base: HerbrandBase,
}

impl WorldSpace {
    pub fn enumerate(base: HerbrandBase, cap: usize) -> Result<Self, WorldError> {
        if base.len() > cap || base.len() >= usize::BITS as usize - 1 {
            return Err(WorldError::TooManyAtoms { count: base.len(), cap });
        }
        Ok(WorldSpace { base })
    }

    pub fn base(&self) -> &HerbrandBase {
        &self.base
    }

    pub fn world_count(&self) -> usize {
        1 << self.base.len()
    }

    pub fn worlds(&self) -> impl Iterator<Item = World> {
        (0..self.world_count()).map(World)
    }

    /// The atoms true in `w`, in base order.
    pub fn atoms_of(&self, w: World) -> Vec<&Atom> {
        self.base.atoms().iter().enumerate().filter(|(j, _)| w.contains(*j)).map(|(_, a)| a).collect()
    }

    fn position(&self, a: &Atom) -> Result<usize, WorldError> {
        if !a.is_ground() {
            return Err(WorldError::NotGround(a.to_string()));
        }
        self.base.position(a).ok_or_else(|| WorldError::UnknownAtom(a.to_string()))
    }

    pub fn satisfies(&self, w: World, f: &Formula) -> Result<bool, WorldError> {
        Ok(match f {
            Formula::Bottom => false,
            Formula::Top => true,
            Formula::Atom(a) => w.contains(self.position(a)?),
            Formula::Not(inner) => !self.satisfies(w, inner)?,
            Formula::And(l, r) => {
                let left = self.satisfies(w, l)?;
                let right = self.satisfies(w, r)?;
                left && right
            }
        })
    }

    /// Worlds where `f` is true, computed without a cache.
    pub fn satisfying_set(&self, f: &Formula) -> Result<WorldSet, WorldError> {
        let n = self.world_count();
        Ok(match f {
            Formula::Bottom => WorldSet::empty(n),
            Formula::Top => WorldSet::full(n),
            Formula::Atom(a) => WorldSet::atom(n, self.position(a)?),
            Formula::Not(inner) => self.satisfying_set(inner)?.complement(),
            Formula::And(l, r) => self.satisfying_set(l)?.intersection(&self.satisfying_set(r)?),
        })
    }
}

/// Memoized satisfying sets, shared by all queries against one world space.
#[derive(Debug)]
pub struct SatCache {
    space: WorldSpace,
    memo: RwLock<HashMap<Formula, Arc<WorldSet>>>,
}

impl SatCache {
    pub fn new(space: WorldSpace) -> Self {
        SatCache { space, memo: RwLock::new(HashMap::new()) }
    }

    pub fn space(&self) -> &WorldSpace {
        &self.space
    }

    pub fn world_count(&self) -> usize {
        self.space.world_count()
    }

    pub fn get(&self, f: &Formula) -> Result<Arc<WorldSet>, WorldError> {
        if let Some(hit) = self.memo.read().expect("sat cache poisoned").get(f) {
            return Ok(Arc::clone(hit));
        }
        let n = self.world_count();
        let set = match f {
            Formula::Bottom => WorldSet::empty(n),
            Formula::Top => WorldSet::full(n),
            Formula::Atom(a) => WorldSet::atom(n, self.space.position(a)?),
            Formula::Not(inner) => self.get(inner)?.complement(),
            Formula::And(l, r) => self.get(l)?.intersection(&*self.get(r)?),
        };
        let set = Arc::new(set);
        self.memo.write().expect("sat cache poisoned").insert(f.clone(), Arc::clone(&set));
        Ok(set)
    }
}

#[cfg(test)]
mod tests {
    use proptest::prelude::*;

    use super::*;
    use crate::syntax::parse_formula;

    fn space(names: &[&str]) -> WorldSpace {
        WorldSpace::enumerate(HerbrandBase::propositional(names).unwrap(), DEFAULT_MAX_ATOMS).unwrap()
    }

    fn f(text: &str) -> Formula {
        parse_formula(text).unwrap()
    }

    #[test]
    fn world_counts() {
        assert_eq!(space(&["b", "f", "l", "p"]).world_count(), 16);
        assert_eq!(space(&["a"]).world_count(), 2);
        let names: Vec<String> = (0..25).map(|i| format!("a{i}")).collect();
        let base = HerbrandBase::propositional(&names).unwrap();
        assert_eq!(WorldSpace::enumerate(base, 20).unwrap_err(), WorldError::TooManyAtoms { count: 25, cap: 20 });
    }

    #[test]
    fn satisfies_examples() {
        let ws = space(&["b", "l", "p"]);
        // base order b=0, l=1, p=2
        let bl = World(0b011);
        assert!(ws.satisfies(bl, &f("b & l")).unwrap());
        assert!(ws.satisfies(bl, &Formula::Top).unwrap());
        assert!(!ws.satisfies(bl, &Formula::Bottom).unwrap());
        assert!(ws.satisfies(World(0b001), &f("~p & b")).unwrap());
        assert_eq!(ws.satisfies(bl, &f("z")), Err(WorldError::UnknownAtom("z".into())));
    }

    #[test]
    fn satisfying_sets() {
        let ws = space(&["a", "b", "c"]);
        assert_eq!(ws.satisfying_set(&Formula::Top).unwrap().count(), 8);
        let b = ws.satisfying_set(&f("b")).unwrap();
        assert_eq!(b.iter().collect::<Vec<_>>(), [2, 3, 6, 7]);
        assert!(ws.satisfying_set(&f("b & ~b")).unwrap().is_empty());
    }

    #[test]
    fn atom_sets_on_wide_spaces() {
        let names: Vec<String> = (0..9).map(|i| format!("a{i}")).collect();
        let ws = WorldSpace::enumerate(HerbrandBase::propositional(&names).unwrap(), 20).unwrap();
        for (j, name) in names.iter().enumerate() {
            let set = ws.satisfying_set(&Formula::prop(name.clone())).unwrap();
            assert_eq!(set.count(), 256);
            assert!(set.iter().all(|w| World(w).contains(j)));
        }
    }

    #[test]
    fn cache_agrees_with_direct_evaluation() {
        let ws = space(&["a", "b", "c"]);
        let cache = SatCache::new(ws.clone());
        let g = f("~(a & ~b) & (c ; a)");
        let direct: Vec<usize> = ws.worlds().filter(|w| ws.satisfies(*w, &g).unwrap()).map(|w| w.0).collect();
        assert_eq!(cache.get(&g).unwrap().iter().collect::<Vec<_>>(), direct);
        assert_eq!(cache.get(&g).unwrap().iter().collect::<Vec<_>>(), direct);
    }

    fn formula_over(atoms: usize) -> impl Strategy<Value = Formula> {
        let leaf = (0..atoms).prop_map(|i| Formula::prop(format!("a{i}")));
        leaf.prop_recursive(3, 12, 2, |inner| {
            prop_oneof![inner.clone().prop_map(Formula::not), (inner.clone(), inner).prop_map(|(l, r)| l.and(r))]
        })
    }

    proptest! {
        #[test]
        fn set_algebra(g in formula_over(7), h in formula_over(7)) {
            let names: Vec<String> = (0..7).map(|i| format!("a{i}")).collect();
            let ws = WorldSpace::enumerate(HerbrandBase::propositional(&names).unwrap(), 20).unwrap();
            let sg = ws.satisfying_set(&g).unwrap();
            let sh = ws.satisfying_set(&h).unwrap();
            prop_assert_eq!(ws.satisfying_set(&g.clone().not()).unwrap(), sg.complement());
            prop_assert_eq!(ws.satisfying_set(&g.clone().and(h.clone())).unwrap(), sg.intersection(&sh));
            for w in ws.worlds() {
                prop_assert_eq!(sg.contains(w.0), ws.satisfies(w, &g).unwrap());
            }
        }
    }
}

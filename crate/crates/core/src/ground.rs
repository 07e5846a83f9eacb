//! Herbrand universe and base, grounding, and the strict/default split.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;

use thiserror::Error;

use crate::syntax::{record_signatures, Atom, Classification, ConditionalConstraint, Formula, Program, Query, Term};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum GroundError {
    #[error("object variables occur but there are no constants to ground them with")]
    NoConstants,
    #[error("predicate {predicate} used with arity {found}, previously {expected}")]
    ArityMismatch { predicate: String, expected: usize, found: usize },
    #[error("the Herbrand base is empty")]
    EmptyBase,
    #[error(
        "{count} ground atoms exceed the cap of {cap} (2^{count} worlds); raise --max-atoms or shrink the program"
    )]
    TooManyAtoms { count: usize, cap: usize },
}

/// Object variable name to constant name.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Substitution(BTreeMap<String, String>);

impl Substitution {
    pub fn new() -> Self {
        Substitution::default()
    }

    pub fn bind(&mut self, var: impl Into<String>, constant: impl Into<String>) {
        self.0.insert(var.into(), constant.into());
    }

    pub fn get(&self, var: &str) -> Option<&str> {
        self.0.get(var).map(String::as_str)
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, &str)> {
        self.0.iter().map(|(k, v)| (k.as_str(), v.as_str()))
    }
}

impl fmt::Display for Substitution {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("{")?;
        for (i, (k, v)) in self.0.iter().enumerate() {
            if i > 0 {
                f.write_str(", ")?;
            }
            write!(f, "{k}/{v}")?;
        }
        f.write_str("}")
    }
}

impl Formula {
    /// Replaces bound object variables; unbound ones are left in place.
    pub fn apply(&self, theta: &Substitution) -> Formula {
        match self {
            Formula::Bottom => Formula::Bottom,
            Formula::Top => Formula::Top,
            Formula::Atom(a) => Formula::Atom(Atom {
                predicate: a.predicate.clone(),
                args: a
                    .args
                    .iter()
                    .map(|t| match t {
                        Term::Var(v) => theta.get(v).map_or_else(|| t.clone(), |c| Term::Const(c.to_string())),
                        Term::Const(_) => t.clone(),
                    })
                    .collect(),
            }),
            Formula::Not(inner) => inner.apply(theta).not(),
            Formula::And(l, r) => l.apply(theta).and(r.apply(theta)),
        }
    }
}

impl ConditionalConstraint {
    pub fn apply(&self, theta: &Substitution) -> ConditionalConstraint {
        ConditionalConstraint::new(
            self.consequent.apply(theta),
            self.antecedent.apply(theta),
            self.lower.clone(),
            self.upper.clone(),
        )
    }
}

impl Query {
    pub fn apply(&self, theta: &Substitution) -> Query {
        Query {
            consequent: self.consequent.apply(theta),
            antecedent: self.antecedent.apply(theta),
            bounds: self.bounds.clone(),
        }
    }
}

/// Ordered ground atoms with a reverse index.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct HerbrandBase {
    atoms: Vec<Atom>,
    index: HashMap<Atom, usize>,
}

impl HerbrandBase {
    /// Sorted by predicate name, then argument tuple. Fails on an empty set,
    /// non-ground atoms are a caller bug and panic.
    pub fn from_atoms(atoms: impl IntoIterator<Item = Atom>, cap: usize) -> Result<Self, GroundError> {
        let sorted: BTreeSet<Atom> = atoms.into_iter().collect();
        assert!(sorted.iter().all(Atom::is_ground), "Herbrand base atoms must be ground");
        if sorted.is_empty() {
            return Err(GroundError::EmptyBase);
        }
        if sorted.len() > cap {
            return Err(GroundError::TooManyAtoms { count: sorted.len(), cap });
        }
        let atoms: Vec<Atom> = sorted.into_iter().collect();
        let index = atoms.iter().cloned().enumerate().map(|(i, a)| (a, i)).collect();
        Ok(HerbrandBase { atoms, index })
    }

    /// Zero-arity atoms with the given names.
    pub fn propositional<S: AsRef<str>>(names: &[S]) -> Result<Self, GroundError> {
        Self::from_atoms(names.iter().map(|n| Atom::new(n.as_ref(), Vec::new())), usize::MAX)
    }

    pub fn len(&self) -> usize {
        self.atoms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.atoms.is_empty()
    }

    pub fn atoms(&self) -> &[Atom] {
        &self.atoms
    }

    pub fn position(&self, atom: &Atom) -> Option<usize> {
        self.index.get(atom).copied()
    }
}

/// Strict (classical) and defeasible (purely probabilistic) ground constraints.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct GroundTheory {
    pub strict: Vec<ConditionalConstraint>,
    pub defaults: Vec<ConditionalConstraint>,
}

impl GroundTheory {
    pub fn len(&self) -> usize {
        self.strict.len() + self.defaults.len()
    }

    pub fn is_empty(&self) -> bool {
        self.strict.is_empty() && self.defaults.is_empty()
    }

    pub fn all(&self) -> impl Iterator<Item = &ConditionalConstraint> {
        self.strict.iter().chain(&self.defaults)
    }

    /// Every ground atom mentioned by the theory.
    pub fn atoms(&self) -> BTreeSet<Atom> {
        self.all().flat_map(|c| c.consequent.atoms().into_iter().chain(c.antecedent.atoms())).cloned().collect()
    }
}

/// Constants occurring in `p` and `q`.
///
/// An empty result is only acceptable when nothing needs grounding.
pub fn herbrand_universe(p: &Program, q: Option<&Query>) -> Result<BTreeSet<String>, GroundError> {
    let mut constants = BTreeSet::new();
    let mut has_vars = false;
    let formulas = p
        .iter()
        .flat_map(|c| [&c.consequent, &c.antecedent])
        .chain(q.into_iter().flat_map(|q| [&q.consequent, &q.antecedent]));
    for f in formulas {
        constants.extend(f.constants().into_iter().map(str::to_string));
        has_vars |= !f.variables().is_empty();
    }
    if has_vars && constants.is_empty() {
        return Err(GroundError::NoConstants);
    }
    Ok(constants)
}

/// Predicate arities across a program and an optional query.
pub fn signatures(p: &Program, q: Option<&Query>) -> Result<BTreeMap<String, usize>, GroundError> {
    let mut sigs = BTreeMap::new();
    let formulas = p
        .iter()
        .flat_map(|c| [&c.consequent, &c.antecedent])
        .chain(q.into_iter().flat_map(|q| [&q.consequent, &q.antecedent]));
    for f in formulas {
        record_signatures(f, &mut sigs).map_err(|(predicate, expected, found)| GroundError::ArityMismatch {
            predicate,
            expected,
            found,
        })?;
    }
    Ok(sigs)
}

/// All atoms `p(c1..ck)` for every signature over the universe.
pub fn full_base(
    universe: &BTreeSet<String>,
    sigs: &BTreeMap<String, usize>,
    cap: usize,
) -> Result<HerbrandBase, GroundError> {
    let constants: Vec<&String> = universe.iter().collect();
    let mut atoms = Vec::new();
    for (pred, &arity) in sigs {
        if arity > 0 && constants.is_empty() {
            continue;
        }
        let count = constants.len().checked_pow(arity as u32).unwrap_or(usize::MAX);
        if atoms.len().saturating_add(count) > cap {
            return Err(GroundError::TooManyAtoms { count: atoms.len().saturating_add(count), cap });
        }
        for tuple in tuples(&constants, arity) {
            atoms.push(Atom::new(pred.clone(), tuple.into_iter().map(|c| Term::Const(c.clone())).collect()));
        }
    }
    HerbrandBase::from_atoms(atoms, cap)
}

/// Herbrand base for a program and query. With `restrict`, only atoms that
/// occur in `ground(p)` or a ground instance of `q` are included.
pub fn herbrand_base(
    p: &Program,
    q: Option<&Query>,
    universe: &BTreeSet<String>,
    restrict: bool,
    cap: usize,
) -> Result<HerbrandBase, GroundError> {
    if !restrict {
        return full_base(universe, &signatures(p, q)?, cap);
    }
    signatures(p, q)?;
    let theory = ground_program(p, universe)?;
    let mut atoms: BTreeSet<Atom> = BTreeSet::new();
    for c in &theory {
        atoms.extend(c.consequent.atoms().into_iter().cloned());
        atoms.extend(c.antecedent.atoms().into_iter().cloned());
    }
    if let Some(q) = q {
        for (_, gq) in ground_instances_of_query(q, universe)? {
            atoms.extend(gq.consequent.atoms().into_iter().cloned());
            atoms.extend(gq.antecedent.atoms().into_iter().cloned());
        }
    }
    HerbrandBase::from_atoms(atoms, cap)
}

/// Every total substitution of `vars` over `universe`, in lexicographic order.
pub fn substitutions(vars: &[&str], universe: &BTreeSet<String>) -> Vec<Substitution> {
    let constants: Vec<&String> = universe.iter().collect();
    tuples(&constants, vars.len())
        .into_iter()
        .map(|tuple| {
            let mut theta = Substitution::new();
            for (v, c) in vars.iter().zip(tuple) {
                theta.bind(*v, c.clone());
            }
            theta
        })
        .collect()
}

fn tuples<'a>(items: &[&'a String], len: usize) -> Vec<Vec<&'a String>> {
    let mut out: Vec<Vec<&String>> = vec![Vec::new()];
    for _ in 0..len {
        out = out
            .into_iter()
            .flat_map(|prefix| {
                items.iter().map(move |item| {
                    let mut next = prefix.clone();
                    next.push(*item);
                    next
                })
            })
            .collect();
    }
    out
}

/// `ground(P)`, deduplicated, in program order then substitution order.
pub fn ground_program(p: &Program, universe: &BTreeSet<String>) -> Result<Vec<ConditionalConstraint>, GroundError> {
    let mut seen = std::collections::HashSet::new();
    let mut out = Vec::new();
    for c in p {
        let vars: Vec<&str> = c.variables().into_iter().collect();
        if !vars.is_empty() && universe.is_empty() {
            return Err(GroundError::NoConstants);
        }
        for theta in substitutions(&vars, universe) {
            let g = c.apply(&theta);
            if seen.insert(g.clone()) {
                out.push(g);
            }
        }
    }
    Ok(out)
}

/// Partitions ground constraints into strict and default parts.
pub fn split_theory(ground: impl IntoIterator<Item = ConditionalConstraint>) -> GroundTheory {
    let mut theory = GroundTheory::default();
    for c in ground {
        debug_assert!(c.is_ground());
        if theory.strict.contains(&c) || theory.defaults.contains(&c) {
            continue;
        }
        match c.classify() {
            Classification::Classical => theory.strict.push(c),
            Classification::Default => theory.defaults.push(c),
        }
    }
    theory
}

/// Ground instances of a query with the substitution that produced each.
pub fn ground_instances_of_query(
    q: &Query,
    universe: &BTreeSet<String>,
) -> Result<Vec<(Substitution, Query)>, GroundError> {
    let vars: Vec<&str> = q.variables().into_iter().collect();
    if !vars.is_empty() && universe.is_empty() {
        return Err(GroundError::NoConstants);
    }
    Ok(substitutions(&vars, universe)
        .into_iter()
        .map(|theta| {
            let g = q.apply(&theta);
            (theta, g)
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::syntax::{parse_program, parse_query};

    const EX22: &str = "(b(X)|p(X))[1,1]. (l(X)|b(X))[.95,1]. (f(X)|b(X))[.9,.95]. (f(X)|p(X))[0,.05].";

    fn universe(names: &[&str]) -> BTreeSet<String> {
        names.iter().map(|s| s.to_string()).collect()
    }

    #[test]
    fn universe_from_query_constants() {
        let p = parse_program("(b(X)|p(X))[1,1]. (l(X)|b(X))[0.95,1].").unwrap();
        let q = parse_query("?(l(tweety)|p(tweety))[R,S].").unwrap();
        assert_eq!(herbrand_universe(&p, Some(&q)).unwrap(), universe(&["tweety"]));
        assert_eq!(herbrand_universe(&p, None), Err(GroundError::NoConstants));
        let prop = parse_program("(a|b)[0.5,1].").unwrap();
        assert!(herbrand_universe(&prop, None).unwrap().is_empty());
    }

    #[test]
    fn restricted_base_of_penguins() {
        let p = parse_program(EX22).unwrap();
        let q = parse_query("?(l(tweety)|p(tweety))[R,S].").unwrap();
        let u = herbrand_universe(&p, Some(&q)).unwrap();
        let base = herbrand_base(&p, Some(&q), &u, true, 20).unwrap();
        let names: Vec<String> = base.atoms().iter().map(ToString::to_string).collect();
        assert_eq!(names, ["b(tweety)", "f(tweety)", "l(tweety)", "p(tweety)"]);
    }

    #[test]
    fn small_bases() {
        let p = parse_program("(a|b)[0.5,1].").unwrap();
        assert_eq!(herbrand_base(&p, None, &BTreeSet::new(), true, 20).unwrap().len(), 2);

        let sigs = BTreeMap::from([("q".to_string(), 1)]);
        assert_eq!(full_base(&universe(&["a", "b"]), &sigs, 20).unwrap().len(), 2);
        assert_eq!(
            full_base(&universe(&["a", "b", "c"]), &BTreeMap::from([("r".to_string(), 3)]), 20),
            Err(GroundError::TooManyAtoms { count: 27, cap: 20 })
        );
        assert_eq!(HerbrandBase::from_atoms(Vec::new(), 20), Err(GroundError::EmptyBase));
    }

    #[test]
    fn grounding_penguins() {
        let p = parse_program("(b(X)|p(X))[1,1]. (l(X)|b(X))[0.95,1].").unwrap();
        let g = ground_program(&p, &universe(&["t"])).unwrap();
        let text: Vec<String> = g.iter().map(ToString::to_string).collect();
        assert_eq!(text, ["(b(t)|p(t))[1, 1]", "(l(t)|b(t))[19/20, 1]"]);
    }

    #[test]
    fn grounding_identity_and_counts() {
        let ground = parse_program("(a|b)[0.5,1]. (q(c)|true)[1,1].").unwrap();
        assert_eq!(ground_program(&ground, &universe(&["c"])).unwrap(), ground.constraints());

        let two_vars = parse_program("(r(X,Y)|true)[0.5,1].").unwrap();
        assert_eq!(ground_program(&two_vars, &universe(&["a", "b"])).unwrap().len(), 4);
    }

    #[test]
    fn split_penguins() {
        let p = parse_program(EX22).unwrap();
        let theory = split_theory(ground_program(&p, &universe(&["t"])).unwrap());
        assert_eq!(theory.strict.len(), 1);
        assert_eq!(theory.strict[0].to_string(), "(b(t)|p(t))[1, 1]");
        assert_eq!(theory.defaults.len(), 3);
        assert_eq!(theory.len(), 4);

        let classical = split_theory(parse_program("(a|b)[1,1]. (c|b)[0,0].").unwrap().constraints().to_vec());
        assert!(classical.defaults.is_empty());
        let defaults = split_theory(parse_program("(a|b)[0,1]. (c|b)[0.5,0.5].").unwrap().constraints().to_vec());
        assert!(defaults.strict.is_empty());
    }

    #[test]
    fn query_instances() {
        let q = parse_query("?(l(tweety)|p(tweety))[R,S].").unwrap();
        let inst = ground_instances_of_query(&q, &universe(&["tweety"])).unwrap();
        assert_eq!(inst.len(), 1);
        assert!(inst[0].0.is_empty());
        assert_eq!(inst[0].1, q);

        let q = parse_query("?(l(X)|p(X))[0.5,1].").unwrap();
        let inst = ground_instances_of_query(&q, &universe(&["a", "b"])).unwrap();
        assert_eq!(inst.len(), 2);
        assert_eq!(inst[1].0.to_string(), "{X/b}");
        assert_eq!(inst[1].1.consequent.to_string(), "l(b)");
    }

    #[test]
    fn arity_clash_between_program_and_query() {
        let p = parse_program("(b(X)|p(X))[1,1].").unwrap();
        let q = parse_query("?(b|true)[L,U].").unwrap();
        assert!(matches!(signatures(&p, Some(&q)), Err(GroundError::ArityMismatch { .. })));
    }
}

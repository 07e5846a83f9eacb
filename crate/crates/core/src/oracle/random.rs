//! Seeded random ground programs over 0-ary atoms.

use rand::seq::IndexedRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::ground::HerbrandBase;
use crate::syntax::{rat, ConditionalConstraint, Formula, Program};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RandomParams {
    pub atoms: usize,
    pub defaults: usize,
    pub strict: usize,
    /// Bounds are multiples of `1 / granularity`.
    pub granularity: i64,
}

impl RandomParams {
    pub fn atom_names(&self) -> Vec<String> {
        (0..self.atoms).map(atom_name).collect()
    }

    /// All atoms `a0 .. a{n-1}`, whether or not the program mentions them.
    pub fn base(&self) -> HerbrandBase {
        HerbrandBase::propositional(&self.atom_names()).expect("at least one atom")
    }
}

pub fn atom_name(i: usize) -> String {
    format!("a{i}")
}

fn literal(rng: &mut ChaCha8Rng, atoms: &[String]) -> Formula {
    let a = Formula::prop(atoms.choose(rng).expect("no atoms").clone());
    if rng.random_bool(0.3) {
        a.not()
    } else {
        a
    }
}

/// A literal, or a conjunction or disjunction of two literals.
pub fn random_formula(rng: &mut ChaCha8Rng, atoms: &[String]) -> Formula {
    match rng.random_range(0..10) {
        0..=4 => literal(rng, atoms),
        5..=7 => literal(rng, atoms).and(literal(rng, atoms)),
        _ => literal(rng, atoms).or(literal(rng, atoms)),
    }
}

fn random_interval(rng: &mut ChaCha8Rng, g: i64) -> (i64, i64) {
    loop {
        let a = rng.random_range(0..=g);
        let b = rng.random_range(0..=g);
        let (l, u) = if a <= b { (a, b) } else { (b, a) };
        // purely probabilistic: neither [1,1] nor [0,0]
        if l < g && u > 0 {
            return (l, u);
        }
    }
}

/// Same seed and parameters give the same program.
pub fn random_program(seed: u64, params: &RandomParams) -> Program {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let atoms = params.atom_names();
    let g = params.granularity;
    let mut p = Program::new();
    // duplicates are redrawn so the counts are exact
    while p.len() < params.strict {
        let psi = literal(&mut rng, &atoms);
        let phi = random_formula(&mut rng, &atoms);
        let v = if rng.random_bool(0.8) { 1 } else { 0 };
        p.push(ConditionalConstraint::new(psi, phi, rat(v, 1), rat(v, 1)));
    }
    while p.len() < params.strict + params.defaults {
        let psi = literal(&mut rng, &atoms);
        let phi = if rng.random_bool(0.15) { Formula::Top } else { random_formula(&mut rng, &atoms) };
        let (l, u) = random_interval(&mut rng, g);
        p.push(ConditionalConstraint::new(psi, phi, rat(l, g), rat(u, g)));
    }
    p
}

/// A seeded generator for queries and postulate instances.
pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::syntax::{render_program, Classification};

    const SMALL: RandomParams = RandomParams { atoms: 3, defaults: 3, strict: 1, granularity: 4 };

    #[test]
    fn deterministic_per_seed() {
        assert_eq!(random_program(1, &SMALL), random_program(1, &SMALL));
        assert_ne!(
            render_program(&random_program(1, &SMALL), false),
            render_program(&random_program(2, &SMALL), false)
        );
        assert_eq!(random_program(1, &SMALL).len(), 4);
    }

    #[test]
    fn bounds_on_the_grid() {
        for seed in 0..50 {
            let p = random_program(seed, &SMALL);
            for c in &p {
                for b in [&c.lower, &c.upper] {
                    assert!((b * rat(4, 1)).is_integer());
                }
            }
            let defaults = p.iter().filter(|c| c.classify() == Classification::Default).count();
            assert_eq!(defaults, 3);
        }
    }
}

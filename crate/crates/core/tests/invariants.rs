//! Properties of the reasoner checked on seeded random programs.

mod support;

use std::collections::BTreeSet;

use proptest::prelude::*;
use rand::Rng;

use plp_core::defaults::{Engine, EngineConfig, Semantics};
use plp_core::ground::{ground_program, split_theory, HerbrandBase};
use plp_core::logical::{Interval, Reasoner};
use plp_core::oracle::random::rng;
use plp_core::oracle::{lex_preferable, random_formula, random_program, z_preferable, Mask, Oracle, RandomParams};
use plp_core::ratlp::{LinRow, Relation};
use plp_core::syntax::{parse_program, rat, Classification, ConditionalConstraint, Formula, Program, Rational};

fn params(seed: u64, atoms: std::ops::RangeInclusive<usize>, defaults: usize) -> RandomParams {
    let mut r = rng(seed);
    RandomParams {
        atoms: r.random_range(atoms),
        defaults: r.random_range(0..=defaults),
        strict: r.random_range(0..=2),
        granularity: 4,
    }
}

fn engine(program: &Program, base: HerbrandBase) -> Engine {
    Engine::from_theory(split_theory(program.iter().cloned()), base, EngineConfig::default()).unwrap()
}

fn queries(seed: u64, atoms: &[String], n: usize) -> Vec<(Formula, Formula)> {
    let mut r = rng(seed ^ 0x51_7E);
    (0..n)
        .map(|_| {
            let alpha = if r.random_bool(0.25) { Formula::Top } else { random_formula(&mut r, atoms) };
            (random_formula(&mut r, atoms), alpha)
        })
        .collect()
}

fn refs(cs: &[ConditionalConstraint]) -> Vec<&ConditionalConstraint> {
    cs.iter().collect()
}

/// Tight 0-consequence the slow way: the ratio `Pr(β∧α) / Pr(α)` over the
/// vertices of `{Σy = 1, rows}` with `Pr(α) > 0`. Along an edge towards a
/// vertex with `Pr(α) = 0` the ratio stays constant, so these vertices
/// already give both extremes.
fn tight_0_by_vertices(r: &Reasoner, cs: &[ConditionalConstraint], beta: &Formula, alpha: &Formula) -> Interval {
    let mut sys = r.build_rows(&refs(cs)).unwrap();
    let n = sys.num_vars();
    sys.push(LinRow::new((0..n).map(|i| (i, rat(1, 1))), Relation::Eq, rat(1, 1)));
    let a = r.satisfying_set(alpha).unwrap();
    let ba = r.satisfying_set(&beta.clone().and(alpha.clone())).unwrap();
    let ratios: Vec<Rational> = support::vertices(&sys)
        .into_iter()
        .filter_map(|y| {
            let pa: Rational = a.iter().map(|w| y[w].clone()).sum();
            let pba: Rational = ba.iter().map(|w| y[w].clone()).sum();
            (pa > rat(0, 1)).then(|| pba / pa)
        })
        .collect();
    match (ratios.iter().min(), ratios.iter().max()) {
        (Some(l), Some(u)) => Interval::new(l.clone(), u.clone()),
        _ => Interval::empty(),
    }
}

fn mask(h: &[usize]) -> Mask {
    h.iter().fold(0, |m, &i| m | 1 << i)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn extra_atoms_change_nothing(seed in 0u64..1_000_000) {
        let p = params(seed, 2..=4, 4);
        let program = random_program(seed, &p);
        let names = p.atom_names();
        let small = engine(&program, p.base());
        let wide: Vec<String> = names.iter().cloned().chain(["spare".to_string()]).collect();
        let big = engine(&program, HerbrandBase::propositional(&wide).unwrap());
        prop_assert_eq!(small.is_consistent().unwrap(), big.is_consistent().unwrap());
        let consistent = small.is_consistent().unwrap();
        for (beta, alpha) in queries(seed, &names, 3) {
            for s in Semantics::ALL {
                if s.is_default_semantics() && !consistent {
                    continue;
                }
                prop_assert_eq!(
                    small.tight(&beta, &alpha, s).unwrap().interval,
                    big.tight(&beta, &alpha, s).unwrap().interval,
                    "{} ({}|{})", s, beta, alpha
                );
            }
        }
    }

    #[test]
    fn more_constraints_never_widen(seed in 0u64..1_000_000) {
        let p = params(seed, 2..=4, 5);
        let all: Vec<ConditionalConstraint> = random_program(seed, &p).iter().cloned().collect();
        prop_assume!(!all.is_empty());
        let fewer = &all[..all.len() - 1];
        let e = engine(&Program::new(), p.base());
        let r = e.reasoner();
        for (beta, alpha) in queries(seed, &p.atom_names(), 3) {
            let full0 = r.tight_0_consequence(&refs(&all), &beta, &alpha).unwrap();
            let less0 = r.tight_0_consequence(&refs(fewer), &beta, &alpha).unwrap();
            prop_assert!(full0.is_subset_of(&less0), "0: {} not in {}", full0, less0);
            let full1 = r.tight_1_consequence(&refs(&all), &beta, &alpha).unwrap();
            let less1 = r.tight_1_consequence(&refs(fewer), &beta, &alpha).unwrap();
            prop_assert!(full1.is_subset_of(&less1), "1: {} not in {}", full1, less1);
        }
    }

    #[test]
    fn tight_0_matches_vertex_ratios(seed in 0u64..1_000_000) {
        let mut p = params(seed, 2..=3, 3);
        p.strict = p.strict.min(1);
        let program = random_program(seed, &p);
        let cs: Vec<ConditionalConstraint> = program.iter().cloned().collect();
        let e = engine(&Program::new(), p.base());
        for (beta, alpha) in queries(seed, &p.atom_names(), 2) {
            let fast = e.reasoner().tight_0_consequence(&refs(&cs), &beta, &alpha).unwrap();
            let slow = tight_0_by_vertices(e.reasoner(), &cs, &beta, &alpha);
            prop_assert_eq!(fast, slow, "({}|{})", beta, alpha);
        }
    }

    #[test]
    fn partitions_reverify(seed in 0u64..1_000_000) {
        let p = params(seed, 3..=5, 6);
        let e = engine(&random_program(seed, &p), p.base());
        if let Some(zp) = e.z_partition().unwrap() {
            prop_assert!(e.verify_partition(zp).unwrap());
            let mut seen: Vec<usize> = zp.level_indices().concat();
            seen.sort();
            prop_assert_eq!(seen, (0..e.defaults().len()).collect::<Vec<_>>());
        }
    }

    /// The z interval is the 0-interval of `S`, the evidence and every
    /// level from `j*` up, for the lowest `j*` keeping that satisfiable.
    #[test]
    fn z_is_a_fixed_system(seed in 0u64..1_000_000) {
        let p = params(seed, 3..=5, 6);
        let e = engine(&random_program(seed, &p), p.base());
        prop_assume!(e.is_consistent().unwrap());
        let levels = e.z_partition().unwrap().unwrap().level_indices().to_vec();
        for (beta, alpha) in queries(seed, &p.atom_names(), 3) {
            let mut want = Interval::empty();
            for j in 0..=levels.len() {
                let mut cs: Vec<ConditionalConstraint> = e.theory().strict.clone();
                cs.push(ConditionalConstraint::certain(alpha.clone()));
                cs.extend(levels[j..].concat().into_iter().map(|d| e.defaults()[d].clone()));
                if e.reasoner().is_satisfiable(&refs(&cs), &[]).unwrap() {
                    want = e.reasoner().tight_0_consequence(&refs(&cs), &beta, &Formula::Top).unwrap();
                    break;
                }
            }
            prop_assert_eq!(e.tight(&beta, &alpha, Semantics::Z).unwrap().interval, want);
        }
    }

    #[test]
    fn without_defaults_z_and_lex_condition_on_evidence(seed in 0u64..1_000_000) {
        let mut p = params(seed, 2..=4, 0);
        p.strict += 1;
        let e = engine(&random_program(seed, &p), p.base());
        prop_assert!(e.defaults().is_empty());
        for (beta, alpha) in queries(seed, &p.atom_names(), 3) {
            let mut cs: Vec<ConditionalConstraint> = e.theory().strict.clone();
            cs.push(ConditionalConstraint::certain(alpha.clone()));
            let want = e.reasoner().tight_0_consequence(&refs(&cs), &beta, &Formula::Top).unwrap();
            prop_assert_eq!(&e.tight(&beta, &alpha, Semantics::Z).unwrap().interval, &want);
            prop_assert_eq!(&e.tight(&beta, &alpha, Semantics::Lex).unwrap().interval, &want);
        }
    }

    /// Oracle families: members are satisfiable, every other satisfiable
    /// subset is beaten by a member, and z members contain every level from
    /// the engine's stopping point up.
    #[test]
    fn minimal_families_are_correct(seed in 0u64..1_000_000) {
        let p = params(seed, 3..=5, 6);
        let e = engine(&random_program(seed, &p), p.base());
        prop_assume!(e.is_consistent().unwrap());
        let zp = e.z_partition().unwrap().unwrap();
        let levels: Vec<Mask> = zp.level_indices().iter().map(|l| mask(l)).collect();
        let oracle = Oracle::new(&e, 12);
        for (_, alpha) in queries(seed, &p.atom_names(), 2) {
            let sat: BTreeSet<Mask> = oracle.satisfiable_subsets(&alpha).unwrap().iter().map(|(m, _)| *m).collect();
            for (s, better) in [(Semantics::Z, z_preferable as fn(&[Mask], Mask, Mask) -> bool), (Semantics::Lex, lex_preferable)] {
                let family: Vec<Mask> = oracle.minimal_sets(&alpha, s).unwrap().members.iter().map(|(m, _)| *m).collect();
                for m in &family {
                    prop_assert!(sat.contains(m));
                }
                for h in sat.iter().filter(|h| !family.contains(h)) {
                    prop_assert!(family.iter().any(|g| better(&levels, *g, *h)), "{:b} unbeaten under {}", h, s);
                }
                if s == Semantics::Z {
                    if let Some(m) = e.minimal_systems(&alpha, s).unwrap() {
                        let core = mask(&m.sets[0]);
                        for g in &family {
                            prop_assert_eq!(g & core, core);
                        }
                    }
                }
            }
        }
    }
}

#[test]
fn split_is_a_partition_of_the_grounding() {
    let p = parse_program(plp_core::samples::FLYING_PENGUINS).unwrap();
    let universe: BTreeSet<String> = ["tweety", "opus", "sam"].into_iter().map(String::from).collect();
    let ground = ground_program(&p, &universe).unwrap();
    assert_eq!(ground.len(), 12);
    let t = split_theory(ground.clone());
    assert_eq!((t.strict.len(), t.defaults.len()), (3, 9));
    assert!(t.strict.iter().all(|c| c.classify() == Classification::Classical));
    assert!(t.defaults.iter().all(|c| c.classify() == Classification::Default));
    // duplicates collapse before the split
    let doubled = split_theory(ground.iter().cloned().chain(ground.iter().cloned()));
    assert_eq!(doubled.len(), 12);
}

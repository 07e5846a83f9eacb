//! Bundled programs with known answers, used by the self-test and the
//! acceptance suite.

use crate::defaults::Semantics;
use crate::logical::Interval;
use crate::syntax::{rat, Rational};

/// Penguins are birds; birds have legs with probability at least 0.95.
pub const LEGGED_PENGUINS: &str = "\
(b(X)|p(X))[1,1].
(l(X)|b(X))[0.95,1].
";

/// Adds flying: birds fly with probability in [0.9, 0.95], penguins with at
/// most 0.05.
pub const FLYING_PENGUINS: &str = "\
(b(X)|p(X))[1,1].
(l(X)|b(X))[0.95,1].
(f(X)|b(X))[0.9,0.95].
(f(X)|p(X))[0,0.05].
";

/// Magpies are birds; birds chirp with probability in [0.7, 0.8], magpies
/// with at most 0.99.
pub const CHIRPING_MAGPIES: &str = "\
(b(X)|m(X))[1,1].
(c(X)|b(X))[0.7,0.8].
(c(X)|m(X))[0,0.99].
";

/// Two defaults on the same atom with disjoint bounds.
pub const CLASHING_DEFAULTS: &str = "\
(p|true)[0.3,0.4].
(p|true)[0.6,0.7].
";

pub const PENGUIN_QUERY: &str = "?(l(tweety)|p(tweety))[L,U].";
pub const MAGPIE_QUERY: &str = "?(c(sam)|m(sam))[L,U].";

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Expected {
    /// Must match exactly.
    Exact(Interval),
    /// Computed from the definitions by hand; the published value differs,
    /// so this row is reported rather than enforced.
    Informational { derived: Interval, published: Interval },
}

#[derive(Debug, Clone)]
pub struct Sample {
    pub name: &'static str,
    pub program: &'static str,
    pub query: &'static str,
    pub expected: Vec<(Semantics, Expected)>,
}

fn iv(l: Rational, u: Rational) -> Interval {
    Interval::new(l, u)
}

pub fn samples() -> Vec<Sample> {
    let one = || rat(1, 1);
    let zero = || rat(0, 1);
    let legs = || iv(rat(19, 20), one());
    let chirp = || iv(rat(7, 10), rat(4, 5));
    vec![
        Sample {
            name: "legged penguins",
            program: LEGGED_PENGUINS,
            query: PENGUIN_QUERY,
            expected: vec![
                (Semantics::Zero, Expected::Exact(Interval::unit())),
                (Semantics::One, Expected::Exact(legs())),
                (Semantics::Z, Expected::Exact(legs())),
                (Semantics::Lex, Expected::Exact(legs())),
            ],
        },
        Sample {
            name: "flying penguins",
            program: FLYING_PENGUINS,
            query: PENGUIN_QUERY,
            expected: vec![
                (Semantics::Zero, Expected::Exact(Interval::unit())),
                (Semantics::One, Expected::Exact(Interval::empty())),
                (Semantics::Z, Expected::Informational { derived: iv(zero(), one()), published: legs() }),
                (Semantics::Lex, Expected::Exact(legs())),
            ],
        },
        Sample {
            name: "chirping magpies",
            program: CHIRPING_MAGPIES,
            query: MAGPIE_QUERY,
            expected: vec![
                (Semantics::Zero, Expected::Exact(iv(zero(), rat(99, 100)))),
                (Semantics::One, Expected::Exact(chirp())),
                (Semantics::Z, Expected::Exact(chirp())),
                (Semantics::Lex, Expected::Exact(chirp())),
            ],
        },
    ]
}

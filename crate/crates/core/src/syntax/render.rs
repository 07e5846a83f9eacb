use std::fmt;

use num_traits::ToPrimitive;

use super::{Atom, ConditionalConstraint, Formula, Program, Query, QueryBounds, Rational};

impl fmt::Display for Atom {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.predicate)?;
        if !self.args.is_empty() {
            f.write_str("(")?;
            for (i, t) in self.args.iter().enumerate() {
                if i > 0 {
                    f.write_str(",")?;
                }
                write!(f, "{t}")?;
            }
            f.write_str(")")?;
        }
        Ok(())
    }
}

impl fmt::Display for Formula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Formula::Bottom => f.write_str("false"),
            Formula::Top => f.write_str("true"),
            Formula::Atom(a) => write!(f, "{a}"),
            Formula::Not(inner) => match **inner {
                Formula::And(..) => write!(f, "~({inner})"),
                _ => write!(f, "~{inner}"),
            },
            // `&` is parsed left-associative, so only a right-nested
            // conjunction needs parentheses
            Formula::And(l, r) => match **r {
                Formula::And(..) => write!(f, "{l} & ({r})"),
                _ => write!(f, "{l} & {r}"),
            },
        }
    }
}

/// `(ψ|φ)[l, u].`
pub fn render_constraint(c: &ConditionalConstraint) -> String {
    format!("{c}.")
}

/// One constraint per line. With `annotate`, each line carries the bounds as
/// decimals in a trailing comment.
pub fn render_program(p: &Program, annotate: bool) -> String {
    let mut out = String::new();
    for c in p {
        out.push_str(&render_constraint(c));
        if annotate {
            out.push_str(&format!("  % [{}, {}]", decimal(&c.lower), decimal(&c.upper)));
        }
        out.push('\n');
    }
    out
}

pub fn render_query(q: &Query) -> String {
    let bounds = match &q.bounds {
        QueryBounds::Numeric { lower, upper } => format!("{lower}, {upper}"),
        QueryBounds::Variables { lower, upper } => format!("{lower}, {upper}"),
    };
    format!("?({}|{})[{bounds}].", q.consequent, q.antecedent)
}

/// Decimal approximation with at most six fractional digits, trailing zeros
/// trimmed. Only for display; the exact value is the fraction.
pub fn decimal(r: &Rational) -> String {
    let v = r.to_f64().unwrap_or(f64::NAN);
    let s = format!("{v:.6}");
    let s = s.trim_end_matches('0').trim_end_matches('.');
    if s == "-0" {
        "0".into()
    } else {
        s.into()
    }
}

#[cfg(test)]
mod tests {
    use proptest::prelude::*;

    use super::*;
    use crate::syntax::{parse_formula, parse_program, parse_query, rat, Term};

    #[test]
    fn constraint_text() {
        let c = ConditionalConstraint::new(
            Formula::atom("l", vec![Term::Var("X".into())]),
            Formula::atom("b", vec![Term::Var("X".into())]),
            rat(19, 20),
            rat(1, 1),
        );
        assert_eq!(render_constraint(&c), "(l(X)|b(X))[19/20, 1].");
        assert_eq!(Formula::Top.to_string(), "true");
    }

    #[test]
    fn penguin_round_trip() {
        let p =
            parse_program("(b(X)|p(X))[1,1]. (l(X)|b(X))[.95,1]. (f(X)|b(X))[.9,.95]. (f(X)|p(X))[0,.05].").unwrap();
        assert_eq!(parse_program(&render_program(&p, true)).unwrap(), p);
        assert!(render_program(&p, true).contains("% [0.95, 1]"));
    }

    #[test]
    fn query_round_trip() {
        for text in ["?(l(tweety)|p(tweety))[R,S].", "?(a & ~b|true)[1/3, 1]."] {
            let q = parse_query(text).unwrap();
            assert_eq!(parse_query(&render_query(&q)).unwrap(), q);
        }
    }

    #[test]
    fn nested_conjunctions() {
        for text in ["a & (b & c)", "(a & b) & c", "~(a & b) & ~~c", "a ; b -> c"] {
            let f = parse_formula(text).unwrap();
            assert_eq!(parse_formula(&f.to_string()).unwrap(), f, "{text} => {f}");
        }
    }

    #[test]
    fn decimals() {
        assert_eq!(decimal(&rat(19, 20)), "0.95");
        assert_eq!(decimal(&rat(1, 1)), "1");
        assert_eq!(decimal(&rat(1, 3)), "0.333333");
    }

    fn formula_strategy() -> impl Strategy<Value = Formula> {
        let leaf = prop_oneof![
            Just(Formula::Top),
            Just(Formula::Bottom),
            "[a-d]".prop_map(Formula::prop),
            ("[pq]", "[a-c]|[XY]").prop_map(|(p, t)| {
                let term = if t.chars().next().unwrap().is_uppercase() { Term::Var(t) } else { Term::Const(t) };
                Formula::atom(p, vec![term])
            }),
        ];
        leaf.prop_recursive(4, 24, 2, |inner| {
            prop_oneof![inner.clone().prop_map(Formula::not), (inner.clone(), inner).prop_map(|(l, r)| l.and(r)),]
        })
    }

    proptest! {
        #[test]
        fn constraint_round_trip(psi in formula_strategy(), phi in formula_strategy(), a in 0i64..=8, b in 0i64..=8) {
            let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
            let c = ConditionalConstraint::new(psi, phi, rat(lo, 8), rat(hi, 8));
            let p = Program::from_constraints([c]);
            prop_assert_eq!(parse_program(&render_program(&p, false)).unwrap(), p);
        }
    }
}

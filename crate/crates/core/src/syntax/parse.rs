use std::collections::BTreeMap;
use std::fmt;

use num_bigint::BigInt;
use num_traits::Zero;
use thiserror::Error;

use super::{
    in_unit_interval, record_signatures, Atom, ConditionalConstraint, Formula, Program, Query, QueryBounds, Rational,
    Term,
};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("{line}:{column}: {kind}")]
pub struct ParseError {
    pub line: usize,
    pub column: usize,
    pub kind: ParseErrorKind,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ParseErrorKind {
    #[error("unexpected character {0:?}")]
    UnexpectedChar(char),
    #[error("expected {expected}, found {found}")]
    Unexpected { expected: &'static str, found: String },
    #[error("malformed number {0:?}")]
    BadNumber(String),
    #[error("bound {0} is outside [0, 1]")]
    BoundOutOfRange(Box<Rational>),
    #[error("lower bound {lower} exceeds upper bound {upper}")]
    LowerExceedsUpper { lower: Box<Rational>, upper: Box<Rational> },
    #[error("predicate {predicate} used with arity {found}, previously {expected}")]
    ArityMismatch { predicate: String, expected: usize, found: usize },
    #[error("bound variables must be distinct, got {0} twice")]
    IdenticalBoundVariables(String),
    #[error("bounds must be two numbers or two variables")]
    MixedBounds,
}

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    LParen,
    RParen,
    LBracket,
    RBracket,
    Comma,
    Dot,
    Bar,
    Tilde,
    Amp,
    Semi,
    Arrow,
    Question,
    Lower(String),
    Upper(String),
    Number(Rational),
    Eof,
}

impl fmt::Display for Tok {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Tok::LParen => f.write_str("'('"),
            Tok::RParen => f.write_str("')'"),
            Tok::LBracket => f.write_str("'['"),
            Tok::RBracket => f.write_str("']'"),
            Tok::Comma => f.write_str("','"),
            Tok::Dot => f.write_str("'.'"),
            Tok::Bar => f.write_str("'|'"),
            Tok::Tilde => f.write_str("'~'"),
            Tok::Amp => f.write_str("'&'"),
            Tok::Semi => f.write_str("';'"),
            Tok::Arrow => f.write_str("'->'"),
            Tok::Question => f.write_str("'?'"),
            Tok::Lower(s) | Tok::Upper(s) => write!(f, "{s:?}"),
            Tok::Number(r) => write!(f, "number {r}"),
            Tok::Eof => f.write_str("end of input"),
        }
    }
}

#[derive(Debug, Clone)]
struct Spanned {
    tok: Tok,
    line: usize,
    column: usize,
}

fn lex(text: &str) -> Result<Vec<Spanned>, ParseError> {
    let chars: Vec<char> = text.chars().collect();
    let mut out = Vec::new();
    let (mut i, mut line, mut column) = (0, 1, 1);

    while i < chars.len() {
        let c = chars[i];
        let (tl, tc) = (line, column);
        let mut push = |tok: Tok, width: usize, i: &mut usize, column: &mut usize| {
            out.push(Spanned { tok, line: tl, column: tc });
            *i += width;
            *column += width;
        };
        match c {
            '\n' => {
                i += 1;
                line += 1;
                column = 1;
            }
            c if c.is_whitespace() => {
                i += 1;
                column += 1;
            }
            '%' => {
                while i < chars.len() && chars[i] != '\n' {
                    i += 1;
                }
            }
            '(' => push(Tok::LParen, 1, &mut i, &mut column),
            ')' => push(Tok::RParen, 1, &mut i, &mut column),
            '[' => push(Tok::LBracket, 1, &mut i, &mut column),
            ']' => push(Tok::RBracket, 1, &mut i, &mut column),
            ',' => push(Tok::Comma, 1, &mut i, &mut column),
            '|' => push(Tok::Bar, 1, &mut i, &mut column),
            '~' => push(Tok::Tilde, 1, &mut i, &mut column),
            '&' => push(Tok::Amp, 1, &mut i, &mut column),
            ';' => push(Tok::Semi, 1, &mut i, &mut column),
            '?' => push(Tok::Question, 1, &mut i, &mut column),
            '-' if chars.get(i + 1) == Some(&'>') => push(Tok::Arrow, 2, &mut i, &mut column),
            '.' if !chars.get(i + 1).is_some_and(char::is_ascii_digit) => push(Tok::Dot, 1, &mut i, &mut column),
            c if c.is_ascii_digit() || c == '.' => {
                let start = i;
                while i < chars.len() && (chars[i].is_ascii_digit() || matches!(chars[i], '.' | '/')) {
                    // a trailing '.' terminates the statement, not the number
                    if chars[i] == '.' && !chars.get(i + 1).is_some_and(char::is_ascii_digit) {
                        break;
                    }
                    i += 1;
                }
                let lexeme: String = chars[start..i].iter().collect();
                let value = parse_number(&lexeme).ok_or_else(|| ParseError {
                    line: tl,
                    column: tc,
                    kind: ParseErrorKind::BadNumber(lexeme.clone()),
                })?;
                column += i - start;
                out.push(Spanned { tok: Tok::Number(value), line: tl, column: tc });
            }
            c if c.is_alphabetic() || c == '_' => {
                let start = i;
                while i < chars.len() && (chars[i].is_alphanumeric() || chars[i] == '_') {
                    i += 1;
                }
                let ident: String = chars[start..i].iter().collect();
                column += i - start;
                let tok = if c.is_uppercase() || c == '_' { Tok::Upper(ident) } else { Tok::Lower(ident) };
                out.push(Spanned { tok, line: tl, column: tc });
            }
            other => {
                return Err(ParseError { line, column, kind: ParseErrorKind::UnexpectedChar(other) });
            }
        }
    }
    out.push(Spanned { tok: Tok::Eof, line, column });
    Ok(out)
}

/// Accepts `7`, `0.95`, `.95` and `19/20`.
fn parse_number(s: &str) -> Option<Rational> {
    if let Some((num, den)) = s.split_once('/') {
        let num: BigInt = num.parse().ok()?;
        let den: BigInt = den.parse().ok()?;
        if den.is_zero() {
            return None;
        }
        return Some(Rational::new(num, den));
    }
    let (int_part, frac_part) = s.split_once('.').unwrap_or((s, ""));
    if int_part.is_empty() && frac_part.is_empty() {
        return None;
    }
    let digits = format!("{int_part}{frac_part}");
    let num: BigInt = digits.parse().ok()?;
    let den = num_traits::pow(BigInt::from(10), frac_part.len());
    Some(Rational::new(num, den))
}

struct Parser {
    toks: Vec<Spanned>,
    pos: usize,
}

impl Parser {
    fn new(text: &str) -> Result<Self, ParseError> {
        Ok(Parser { toks: lex(text)?, pos: 0 })
    }

    fn peek(&self) -> &Tok {
        &self.toks[self.pos].tok
    }

    fn here(&self) -> (usize, usize) {
        let s = &self.toks[self.pos];
        (s.line, s.column)
    }

    fn bump(&mut self) -> Spanned {
        let s = self.toks[self.pos].clone();
        if self.pos + 1 < self.toks.len() {
            self.pos += 1;
        }
        s
    }

    fn error_at(&self, kind: ParseErrorKind) -> ParseError {
        let (line, column) = self.here();
        ParseError { line, column, kind }
    }

    fn unexpected(&self, expected: &'static str) -> ParseError {
        self.error_at(ParseErrorKind::Unexpected { expected, found: self.peek().to_string() })
    }

    fn expect(&mut self, tok: Tok, expected: &'static str) -> Result<(), ParseError> {
        if *self.peek() == tok {
            self.bump();
            Ok(())
        } else {
            Err(self.unexpected(expected))
        }
    }

    fn formula(&mut self) -> Result<Formula, ParseError> {
        let lhs = self.disjunction()?;
        if *self.peek() == Tok::Arrow {
            self.bump();
            let rhs = self.formula()?;
            return Ok(lhs.implies(rhs));
        }
        Ok(lhs)
    }

    fn disjunction(&mut self) -> Result<Formula, ParseError> {
        let mut f = self.conjunction()?;
        while *self.peek() == Tok::Semi {
            self.bump();
            f = f.or(self.conjunction()?);
        }
        Ok(f)
    }

    fn conjunction(&mut self) -> Result<Formula, ParseError> {
        let mut f = self.unary()?;
        while *self.peek() == Tok::Amp {
            self.bump();
            f = f.and(self.unary()?);
        }
        Ok(f)
    }

    fn unary(&mut self) -> Result<Formula, ParseError> {
        match self.peek().clone() {
            Tok::Tilde => {
                self.bump();
                Ok(self.unary()?.not())
            }
            Tok::LParen => {
                self.bump();
                let f = self.formula()?;
                self.expect(Tok::RParen, "')'")?;
                Ok(f)
            }
            Tok::Lower(name) if name == "true" => {
                self.bump();
                Ok(Formula::Top)
            }
            Tok::Lower(name) if name == "false" => {
                self.bump();
                Ok(Formula::Bottom)
            }
            Tok::Lower(name) => {
                self.bump();
                let mut args = Vec::new();
                if *self.peek() == Tok::LParen {
                    self.bump();
                    loop {
                        args.push(self.term()?);
                        match self.peek() {
                            Tok::Comma => {
                                self.bump();
                            }
                            Tok::RParen => {
                                self.bump();
                                break;
                            }
                            _ => return Err(self.unexpected("',' or ')'")),
                        }
                    }
                }
                Ok(Formula::Atom(Atom::new(name, args)))
            }
            _ => Err(self.unexpected("formula")),
        }
    }

    fn term(&mut self) -> Result<Term, ParseError> {
        match self.peek().clone() {
            Tok::Lower(name) => {
                self.bump();
                Ok(Term::Const(name))
            }
            Tok::Upper(name) => {
                self.bump();
                Ok(Term::Var(name))
            }
            _ => Err(self.unexpected("constant or variable")),
        }
    }

    /// `( consequent [| antecedent] )`
    fn conditional(&mut self) -> Result<(Formula, Formula), ParseError> {
        self.expect(Tok::LParen, "'('")?;
        let consequent = self.formula()?;
        let antecedent = if *self.peek() == Tok::Bar {
            self.bump();
            self.formula()?
        } else {
            Formula::Top
        };
        self.expect(Tok::RParen, "')'")?;
        Ok((consequent, antecedent))
    }

    fn probability(&mut self) -> Result<Rational, ParseError> {
        let (line, column) = self.here();
        match self.peek().clone() {
            Tok::Number(r) => {
                self.bump();
                if !in_unit_interval(&r) {
                    return Err(ParseError { line, column, kind: ParseErrorKind::BoundOutOfRange(Box::new(r)) });
                }
                Ok(r)
            }
            _ => Err(self.unexpected("probability")),
        }
    }

    fn constraint(&mut self) -> Result<ConditionalConstraint, ParseError> {
        let start = self.here();
        let (consequent, antecedent) = self.conditional()?;
        self.expect(Tok::LBracket, "'['")?;
        let lower = self.probability()?;
        self.expect(Tok::Comma, "','")?;
        let upper = self.probability()?;
        self.expect(Tok::RBracket, "']'")?;
        if lower > upper {
            return Err(ParseError {
                line: start.0,
                column: start.1,
                kind: ParseErrorKind::LowerExceedsUpper { lower: Box::new(lower), upper: Box::new(upper) },
            });
        }
        Ok(ConditionalConstraint::new(consequent, antecedent, lower, upper))
    }

    fn query(&mut self) -> Result<Query, ParseError> {
        self.expect(Tok::Question, "'?'")?;
        let (consequent, antecedent) = self.conditional()?;
        self.expect(Tok::LBracket, "'['")?;
        let bounds = match self.peek().clone() {
            Tok::Upper(lower) => {
                self.bump();
                self.expect(Tok::Comma, "','")?;
                let upper = match self.peek().clone() {
                    Tok::Upper(u) => u,
                    Tok::Number(_) => return Err(self.error_at(ParseErrorKind::MixedBounds)),
                    _ => return Err(self.unexpected("bound variable")),
                };
                if upper == lower {
                    return Err(self.error_at(ParseErrorKind::IdenticalBoundVariables(upper)));
                }
                self.bump();
                QueryBounds::Variables { lower, upper }
            }
            Tok::Number(_) => {
                let lower = self.probability()?;
                self.expect(Tok::Comma, "','")?;
                if matches!(self.peek(), Tok::Upper(_)) {
                    return Err(self.error_at(ParseErrorKind::MixedBounds));
                }
                let upper = self.probability()?;
                QueryBounds::Numeric { lower, upper }
            }
            _ => return Err(self.unexpected("bounds")),
        };
        self.expect(Tok::RBracket, "']'")?;
        Ok(Query { consequent, antecedent, bounds })
    }

    fn at_eof(&self) -> bool {
        *self.peek() == Tok::Eof
    }
}

/// Parses a sequence of `(ψ|φ)[l, u].` statements.
pub fn parse_program(text: &str) -> Result<Program, ParseError> {
    let mut p = Parser::new(text)?;
    let mut program = Program::new();
    let mut sigs = BTreeMap::new();
    while !p.at_eof() {
        let (line, column) = p.here();
        let c = p.constraint()?;
        p.expect(Tok::Dot, "'.'")?;
        for f in [&c.consequent, &c.antecedent] {
            record_signatures(f, &mut sigs).map_err(|(predicate, expected, found)| ParseError {
                line,
                column,
                kind: ParseErrorKind::ArityMismatch { predicate, expected, found },
            })?;
        }
        program.push(c);
    }
    Ok(program)
}

/// Parses `?(β|α)[X, Y].` or `?(β|α)[l, u].`; the final `.` is optional.
pub fn parse_query(text: &str) -> Result<Query, ParseError> {
    let mut p = Parser::new(text)?;
    let q = p.query()?;
    finish(&mut p)?;
    let mut sigs = BTreeMap::new();
    for f in [&q.consequent, &q.antecedent] {
        record_signatures(f, &mut sigs).map_err(|(predicate, expected, found)| ParseError {
            line: 1,
            column: 1,
            kind: ParseErrorKind::ArityMismatch { predicate, expected, found },
        })?;
    }
    Ok(q)
}

/// Parses a single constraint; the final `.` is optional.
pub fn parse_constraint(text: &str) -> Result<ConditionalConstraint, ParseError> {
    let mut p = Parser::new(text)?;
    let c = p.constraint()?;
    finish(&mut p)?;
    Ok(c)
}

pub fn parse_formula(text: &str) -> Result<Formula, ParseError> {
    let mut p = Parser::new(text)?;
    let f = p.formula()?;
    if !p.at_eof() {
        return Err(p.unexpected("end of input"));
    }
    Ok(f)
}

fn finish(p: &mut Parser) -> Result<(), ParseError> {
    if *p.peek() == Tok::Dot {
        p.bump();
    }
    if !p.at_eof() {
        return Err(p.unexpected("end of input"));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::syntax::rat;

    fn a(p: &str, args: &[&str]) -> Formula {
        let args = args
            .iter()
            .map(|s| {
                if s.chars().next().unwrap().is_uppercase() {
                    Term::Var(s.to_string())
                } else {
                    Term::Const(s.to_string())
                }
            })
            .collect();
        Formula::atom(p, args)
    }

    #[test]
    fn penguin_program() {
        let p = parse_program("(b(X)|p(X))[1,1]. (l(X)|b(X))[0.95,1].").unwrap();
        assert_eq!(p.len(), 2);
        assert_eq!(
            p.constraints()[0],
            ConditionalConstraint::new(a("b", &["X"]), a("p", &["X"]), rat(1, 1), rat(1, 1))
        );
        assert_eq!(p.constraints()[1].lower, rat(19, 20));
        assert_eq!(p.constraints()[1].upper, rat(1, 1));
    }

    #[test]
    fn empty_program() {
        assert!(parse_program("").unwrap().is_empty());
        assert!(parse_program("  % only a comment\n").unwrap().is_empty());
    }

    #[test]
    fn bound_out_of_range() {
        let err = parse_program("(a|true)[2,1].").unwrap_err();
        assert!(matches!(err.kind, ParseErrorKind::BoundOutOfRange(_)), "{err}");
    }

    #[test]
    fn lower_above_upper() {
        let err = parse_program("(a|true)[0.5,0.25].").unwrap_err();
        assert!(matches!(err.kind, ParseErrorKind::LowerExceedsUpper { .. }));
    }

    #[test]
    fn arity_mismatch() {
        let err = parse_program("(b(X)|p(X))[1,1].\n(b(X,Y)|p(X))[1,1].").unwrap_err();
        assert_eq!(err.line, 2);
        assert!(matches!(err.kind, ParseErrorKind::ArityMismatch { .. }));
    }

    #[test]
    fn syntax_error_position() {
        let err = parse_program("(a|b)[0,1].\n(a|b)[0 1].").unwrap_err();
        assert_eq!((err.line, err.column), (2, 9));
    }

    #[test]
    fn number_forms() {
        for (text, want) in [(".95", rat(19, 20)), ("0.95", rat(19, 20)), ("19/20", rat(19, 20)), ("1", rat(1, 1))] {
            assert_eq!(parse_number(text), Some(want), "{text}");
        }
        assert_eq!(parse_number("1/0"), None);
    }

    #[test]
    fn variables_query() {
        let q = parse_query("?(l(tweety)|p(tweety))[L,U].").unwrap();
        assert_eq!(q.consequent, a("l", &["tweety"]));
        assert_eq!(q.bounds, QueryBounds::Variables { lower: "L".into(), upper: "U".into() });
        assert!(q.is_object_ground());
    }

    #[test]
    fn numeric_query() {
        let q = parse_query("?(a|true)[0,1].").unwrap();
        assert_eq!(q.antecedent, Formula::Top);
        assert_eq!(q.bounds, QueryBounds::Numeric { lower: rat(0, 1), upper: rat(1, 1) });
    }

    #[test]
    fn identical_bound_variables() {
        let err = parse_query("?(a|b)[L,L].").unwrap_err();
        assert!(matches!(err.kind, ParseErrorKind::IdenticalBoundVariables(_)));
        assert!(matches!(parse_query("?(a|b)[L,1].").unwrap_err().kind, ParseErrorKind::MixedBounds));
    }

    #[test]
    fn connectives_and_precedence() {
        let f = parse_formula("~a & b ; c -> d").unwrap();
        let (a_, b_, c_, d_) = (Formula::prop("a"), Formula::prop("b"), Formula::prop("c"), Formula::prop("d"));
        assert_eq!(f, a_.not().and(b_).or(c_).implies(d_));
        assert_eq!(parse_formula("true & ~false").unwrap(), Formula::Top.and(Formula::Bottom.not()));
    }

    #[test]
    fn antecedent_defaults_to_top() {
        let c = parse_constraint("(a)[0.2, 0.4]").unwrap();
        assert_eq!(c.antecedent, Formula::Top);
    }
}

//! Propositional formulas over opaque atoms.
//!
//! The textual form is the wire format: atoms are identifiers, `~` is
//! negation, `&` conjunction, `|` disjunction and `->` implication
//! (right-associative, lowest precedence). Binary connectives are always
//! printed fully parenthesised, so [`Formula::to_string`] is the canonical
//! serialization and is injective on formula trees.

use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub enum Formula {
    Atom(String),
    Not(Box<Formula>),
    And(Box<Formula>, Box<Formula>),
    Or(Box<Formula>, Box<Formula>),
    Implies(Box<Formula>, Box<Formula>),
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("formula parse error at byte {position}: {message}")]
pub struct FormulaParseError {
    pub position: usize,
    pub message: String,
}

/// One lexical symbol of the canonical serialization.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Token {
    Atom(String),
    Not,
    And,
    Or,
    Implies,
    LParen,
    RParen,
}

impl Token {
    /// The literal text of the token, which is also its key in a weight table.
    pub fn as_str(&self) -> &str {
        match self {
            Token::Atom(name) => name,
            Token::Not => "~",
            Token::And => "&",
            Token::Or => "|",
            Token::Implies => "->",
            Token::LParen => "(",
            Token::RParen => ")",
        }
    }
}

impl Formula {
    pub fn atom(name: impl Into<String>) -> Self {
        Formula::Atom(name.into())
    }

    #[allow(clippy::should_implement_trait)]
    pub fn not(inner: Formula) -> Self {
        Formula::Not(Box::new(inner))
    }

    pub fn and(lhs: Formula, rhs: Formula) -> Self {
        Formula::And(Box::new(lhs), Box::new(rhs))
    }

    pub fn or(lhs: Formula, rhs: Formula) -> Self {
        Formula::Or(Box::new(lhs), Box::new(rhs))
    }

    pub fn implies(lhs: Formula, rhs: Formula) -> Self {
        Formula::Implies(Box::new(lhs), Box::new(rhs))
    }

    pub fn atoms(&self) -> BTreeSet<&str> {
        let mut out = BTreeSet::new();
        self.collect_atoms(&mut out);
        out
    }

    fn collect_atoms<'a>(&'a self, out: &mut BTreeSet<&'a str>) {
        match self {
            Formula::Atom(name) => {
                out.insert(name.as_str());
            }
            Formula::Not(inner) => inner.collect_atoms(out),
            Formula::And(l, r) | Formula::Or(l, r) | Formula::Implies(l, r) => {
                l.collect_atoms(out);
                r.collect_atoms(out);
            }
        }
    }

    /// Tokens of the canonical serialization, in order.
    pub fn tokens(&self) -> Vec<Token> {
        let mut out = Vec::new();
        self.push_tokens(&mut out);
        out
    }

    fn push_tokens(&self, out: &mut Vec<Token>) {
        match self {
            Formula::Atom(name) => out.push(Token::Atom(name.clone())),
            Formula::Not(inner) => {
                out.push(Token::Not);
                inner.push_tokens(out);
            }
            Formula::And(l, r) | Formula::Or(l, r) | Formula::Implies(l, r) => {
                out.push(Token::LParen);
                l.push_tokens(out);
                out.push(match self {
                    Formula::And(..) => Token::And,
                    Formula::Or(..) => Token::Or,
                    _ => Token::Implies,
                });
                r.push_tokens(out);
                out.push(Token::RParen);
            }
        }
    }
}

impl fmt::Display for Formula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Formula::Atom(name) => f.write_str(name),
            Formula::Not(inner) => write!(f, "~{inner}"),
            Formula::And(l, r) => write!(f, "({l} & {r})"),
            Formula::Or(l, r) => write!(f, "({l} | {r})"),
            Formula::Implies(l, r) => write!(f, "({l} -> {r})"),
        }
    }
}

impl From<Formula> for String {
    fn from(value: Formula) -> Self {
        value.to_string()
    }
}

impl TryFrom<String> for Formula {
    type Error = FormulaParseError;

    fn try_from(value: String) -> Result<Self, Self::Error> {
        value.parse()
    }
}

impl FromStr for Formula {
    type Err = FormulaParseError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let tokens = lex(s)?;
        let mut parser = Parser {
            tokens: &tokens,
            pos: 0,
            end: s.len(),
        };
        let formula = parser.implication()?;
        if let Some((at, _)) = parser.peek() {
            return Err(FormulaParseError {
                position: at,
                message: "unexpected trailing input".into(),
            });
        }
        Ok(formula)
    }
}

fn is_atom_start(c: char) -> bool {
    c.is_ascii_alphabetic() || c == '_'
}

fn is_atom_char(c: char) -> bool {
    c.is_ascii_alphanumeric() || matches!(c, '_' | '.' | '\'' | '!' | '+' | '*')
}

fn lex(s: &str) -> Result<Vec<(usize, Token)>, FormulaParseError> {
    let mut out = Vec::new();
    let mut chars = s.char_indices().peekable();
    while let Some(&(at, c)) = chars.peek() {
        match c {
            c if c.is_whitespace() => {
                chars.next();
            }
            '~' => {
                chars.next();
                out.push((at, Token::Not));
            }
            '&' => {
                chars.next();
                out.push((at, Token::And));
            }
            '|' => {
                chars.next();
                out.push((at, Token::Or));
            }
            '(' => {
                chars.next();
                out.push((at, Token::LParen));
            }
            ')' => {
                chars.next();
                out.push((at, Token::RParen));
            }
            '-' => {
                chars.next();
                match chars.next() {
                    Some((_, '>')) => out.push((at, Token::Implies)),
                    _ => {
                        return Err(FormulaParseError {
                            position: at,
                            message: "expected '->'".into(),
                        })
                    }
                }
            }
            c if is_atom_start(c) => {
                let mut end = at;
                while let Some(&(i, c)) = chars.peek() {
                    if is_atom_char(c) {
                        end = i + c.len_utf8();
                        chars.next();
                    } else {
                        break;
                    }
                }
                out.push((at, Token::Atom(s[at..end].to_string())));
            }
            other => {
                return Err(FormulaParseError {
                    position: at,
                    message: format!("unexpected character {other:?}"),
                })
            }
        }
    }
    Ok(out)
}

struct Parser<'a> {
    tokens: &'a [(usize, Token)],
    pos: usize,
    end: usize,
}

impl Parser<'_> {
    fn peek(&self) -> Option<(usize, &Token)> {
        self.tokens.get(self.pos).map(|(at, t)| (*at, t))
    }

    fn here(&self) -> usize {
        self.peek().map(|(at, _)| at).unwrap_or(self.end)
    }

    fn implication(&mut self) -> Result<Formula, FormulaParseError> {
        let lhs = self.disjunction()?;
        if let Some((_, Token::Implies)) = self.peek() {
            self.pos += 1;
            let rhs = self.implication()?;
            return Ok(Formula::implies(lhs, rhs));
        }
        Ok(lhs)
    }

    fn disjunction(&mut self) -> Result<Formula, FormulaParseError> {
        let mut lhs = self.conjunction()?;
        while let Some((_, Token::Or)) = self.peek() {
            self.pos += 1;
            let rhs = self.conjunction()?;
            lhs = Formula::or(lhs, rhs);
        }
        Ok(lhs)
    }

    fn conjunction(&mut self) -> Result<Formula, FormulaParseError> {
        let mut lhs = self.unary()?;
        while let Some((_, Token::And)) = self.peek() {
            self.pos += 1;
            let rhs = self.unary()?;
            lhs = Formula::and(lhs, rhs);
        }
        Ok(lhs)
    }

    fn unary(&mut self) -> Result<Formula, FormulaParseError> {
        let at = self.here();
        match self.peek() {
            Some((_, Token::Not)) => {
                self.pos += 1;
                Ok(Formula::not(self.unary()?))
            }
            Some((_, Token::LParen)) => {
                self.pos += 1;
                let inner = self.implication()?;
                match self.peek() {
                    Some((_, Token::RParen)) => {
                        self.pos += 1;
                        Ok(inner)
                    }
                    _ => Err(FormulaParseError {
                        position: self.here(),
                        message: "expected ')'".into(),
                    }),
                }
            }
            Some((_, Token::Atom(name))) => {
                let name = name.clone();
                self.pos += 1;
                Ok(Formula::Atom(name))
            }
            Some(_) => Err(FormulaParseError {
                position: at,
                message: "expected a formula".into(),
            }),
            None => Err(FormulaParseError {
                position: at,
                message: "unexpected end of input".into(),
            }),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn f(s: &str) -> Formula {
        s.parse().unwrap()
    }

    #[test]
    fn precedence_and_associativity() {
        assert_eq!(f("p -> q -> r"), f("(p -> (q -> r))"));
        assert_eq!(f("p & q | r"), f("((p & q) | r)"));
        assert_eq!(f("~p & q"), Formula::and(Formula::not(f("p")), f("q")));
        assert_eq!(f("p -> q").to_string(), "(p -> q)");
    }

    #[test]
    fn parse_errors_report_position() {
        let err = "(p & q".parse::<Formula>().unwrap_err();
        assert_eq!(err.position, 6);
        let err = "p $ q".parse::<Formula>().unwrap_err();
        assert_eq!(err.position, 2);
        let err = "p - q".parse::<Formula>().unwrap_err();
        assert_eq!(err.position, 2);
        assert!("".parse::<Formula>().is_err());
        assert!("p q".parse::<Formula>().is_err());
    }

    #[test]
    fn token_count_matches_canonical_text() {
        let g = f("((p & q) -> r)");
        let toks: Vec<_> = g.tokens().iter().map(|t| t.as_str().to_string()).collect();
        assert_eq!(toks, ["(", "(", "p", "&", "q", ")", "->", "r", ")"]);
    }

    fn arb_formula() -> impl Strategy<Value = Formula> {
        let leaf = prop::sample::select(vec!["p", "q", "r", "C_1", "N!+1"]).prop_map(Formula::atom);
        leaf.prop_recursive(4, 24, 2, |inner| {
            prop_oneof![
                inner.clone().prop_map(Formula::not),
                (inner.clone(), inner.clone()).prop_map(|(a, b)| Formula::and(a, b)),
                (inner.clone(), inner.clone()).prop_map(|(a, b)| Formula::or(a, b)),
                (inner.clone(), inner).prop_map(|(a, b)| Formula::implies(a, b)),
            ]
        })
    }

    proptest! {
        #[test]
        fn canonical_text_round_trips(g in arb_formula()) {
            let text = g.to_string();
            prop_assert_eq!(text.parse::<Formula>().unwrap(), g);
        }

        #[test]
        fn serialization_is_injective(a in arb_formula(), b in arb_formula()) {
            prop_assert_eq!(a == b, a.to_string() == b.to_string());
        }
    }
}

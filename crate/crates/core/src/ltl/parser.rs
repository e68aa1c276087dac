//! Recursive-descent parser for the LTL surface syntax.
//!
//! ```text
//! formula := or ( "->" formula )?
//! or      := and ( "||" and )*
//! and     := until ( "&&" until )*
//! until   := unary ( "U" until )?
//! unary   := ("!" | "X" | "[]" | "<>") unary | primary
//! primary := "true" | "false" | ident | "(" formula ")"
//! ```
//!
//! Unary operators bind tightest, so `!a U b` reads as `(!a) U b`.

use super::{AtomSet, Ltl};
use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq)]
enum Tok {
    Ident(String),
    True,
    False,
    Not,
    Next,
    Always,
    Eventually,
    Until,
    And,
    Or,
    Implies,
    LParen,
    RParen,
    End,
}

fn syntax(pos: usize, msg: impl Into<String>) -> Error {
    Error::Syntax {
        pos,
        msg: msg.into(),
    }
}

fn tokenize(text: &str) -> Result<Vec<(usize, Tok)>> {
    let bytes = text.as_bytes();
    let mut out = Vec::new();
    let mut i = 0;
    while i < bytes.len() {
        let c = bytes[i];
        if c.is_ascii_whitespace() {
            i += 1;
            continue;
        }
        let two = if i + 1 < bytes.len() { &text[i..i + 2] } else { "" };
        let (tok, len) = match (c, two) {
            (_, "[]") => (Tok::Always, 2),
            (_, "<>") => (Tok::Eventually, 2),
            (_, "&&") => (Tok::And, 2),
            (_, "||") => (Tok::Or, 2),
            (_, "->") => (Tok::Implies, 2),
            (b'!', _) => (Tok::Not, 1),
            (b'(', _) => (Tok::LParen, 1),
            (b')', _) => (Tok::RParen, 1),
            (c, _) if c.is_ascii_alphabetic() || c == b'_' => {
                let start = i;
                let mut j = i;
                while j < bytes.len() && (bytes[j].is_ascii_alphanumeric() || bytes[j] == b'_') {
                    j += 1;
                }
                let word = &text[start..j];
                let tok = match word {
                    "X" => Tok::Next,
                    "U" => Tok::Until,
                    "true" => Tok::True,
                    "false" => Tok::False,
                    _ => Tok::Ident(word.to_string()),
                };
                (tok, j - start)
            }
            _ => {
                let ch = text[i..].chars().next().unwrap_or('?');
                return Err(syntax(i, format!("unexpected character `{ch}`")));
            }
        };
        out.push((i, tok));
        i += len;
    }
    out.push((text.len(), Tok::End));
    Ok(out)
}

struct Parser<'a> {
    toks: Vec<(usize, Tok)>,
    at: usize,
    atoms: &'a AtomSet,
}

impl Parser<'_> {
    fn peek(&self) -> &Tok {
        &self.toks[self.at].1
    }

    fn pos(&self) -> usize {
        self.toks[self.at].0
    }

    fn bump(&mut self) -> Tok {
        let t = self.toks[self.at].1.clone();
        if t != Tok::End {
            self.at += 1;
        }
        t
    }

    fn formula(&mut self) -> Result<Ltl> {
        let lhs = self.or()?;
        if *self.peek() == Tok::Implies {
            self.bump();
            let rhs = self.formula()?;
            return Ok(Ltl::implies(lhs, rhs));
        }
        Ok(lhs)
    }

    fn or(&mut self) -> Result<Ltl> {
        let mut f = self.and()?;
        while *self.peek() == Tok::Or {
            self.bump();
            f = Ltl::or(f, self.and()?);
        }
        Ok(f)
    }

    fn and(&mut self) -> Result<Ltl> {
        let mut f = self.until()?;
        while *self.peek() == Tok::And {
            self.bump();
            f = Ltl::and(f, self.until()?);
        }
        Ok(f)
    }

    fn until(&mut self) -> Result<Ltl> {
        let lhs = self.unary()?;
        if *self.peek() == Tok::Until {
            self.bump();
            let rhs = self.until()?;
            return Ok(Ltl::until(lhs, rhs));
        }
        Ok(lhs)
    }

    fn unary(&mut self) -> Result<Ltl> {
        match self.peek() {
            Tok::Not => {
                self.bump();
                Ok(Ltl::not(self.unary()?))
            }
            Tok::Next => {
                self.bump();
                Ok(Ltl::next(self.unary()?))
            }
            Tok::Always => {
                self.bump();
                Ok(Ltl::always(self.unary()?))
            }
            Tok::Eventually => {
                self.bump();
                Ok(Ltl::eventually(self.unary()?))
            }
            _ => self.primary(),
        }
    }

    fn primary(&mut self) -> Result<Ltl> {
        let pos = self.pos();
        match self.bump() {
            Tok::True => Ok(Ltl::True),
            Tok::False => Ok(Ltl::False),
            Tok::Ident(name) => Ok(Ltl::Atom(self.atoms.require(&name)?)),
            Tok::LParen => {
                let f = self.formula()?;
                let close = self.pos();
                match self.bump() {
                    Tok::RParen => Ok(f),
                    _ => Err(syntax(close, "expected `)`")),
                }
            }
            Tok::End => Err(syntax(pos, "unexpected end of input")),
            t => Err(syntax(pos, format!("unexpected token {t:?}"))),
        }
    }
}

/// Parses `text` against the declared `atoms`.
pub fn parse_ltl(text: &str, atoms: &AtomSet) -> Result<Ltl> {
    let mut p = Parser {
        toks: tokenize(text)?,
        at: 0,
        atoms,
    };
    let f = p.formula()?;
    if *p.peek() != Tok::End {
        return Err(syntax(p.pos(), "trailing input"));
    }
    Ok(f)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn atoms() -> AtomSet {
        AtomSet::new(["Base", "Supply", "Report", "Obstacle", "Survey", "a", "b"]).unwrap()
    }

    #[test]
    fn always_eventually() {
        let a = atoms();
        let f = parse_ltl("[]<> Base", &a).unwrap();
        assert_eq!(f, Ltl::always(Ltl::eventually(Ltl::Atom(0))));
    }

    #[test]
    fn until_binary() {
        let a = atoms();
        let f = parse_ltl("a U b", &a).unwrap();
        assert_eq!(f, Ltl::until(Ltl::Atom(5), Ltl::Atom(6)));
    }

    #[test]
    fn negation_binds_tighter_than_until() {
        let a = atoms();
        let f = parse_ltl("!Base U Survey", &a).unwrap();
        assert_eq!(f, Ltl::until(Ltl::not(Ltl::Atom(0)), Ltl::Atom(4)));
    }

    #[test]
    fn surveillance_task_has_four_conjuncts() {
        let a = atoms();
        let text = "[]<> Base && [](Base -> X(!Base U Survey)) \
                    && [](Survey -> X(!Survey U Report)) && [](Report -> X(!Report U Supply))";
        let f = parse_ltl(text, &a).unwrap();
        assert_eq!(f.conjuncts().len(), 4);
    }

    #[test]
    fn errors_carry_position() {
        let a = atoms();
        match parse_ltl("a && (b", &a) {
            Err(Error::Syntax { pos, .. }) => assert_eq!(pos, 7),
            other => panic!("{other:?}"),
        }
        assert!(matches!(parse_ltl("a $ b", &a), Err(Error::Syntax { pos: 2, .. })));
        assert!(matches!(parse_ltl("c U a", &a), Err(Error::UnknownAtom(n)) if n == "c"));
        assert!(matches!(parse_ltl("a b", &a), Err(Error::Syntax { .. })));
    }

    #[test]
    fn display_reparses() {
        let a = atoms();
        let f = parse_ltl("[](a -> X(!b U a)) || <>[] b", &a).unwrap();
        let again = parse_ltl(&f.display(&a).to_string(), &a).unwrap();
        assert_eq!(f, again);
    }
}

//! Concrete syntax: `\x. M` (or `λx. M`), left associative application,
//! `if M then N else P`, the constants `0` and `1`, and parentheses.

use super::Term;
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("parse error at offset {pos}: {msg}")]
pub struct ParseError {
    pub pos: usize,
    pub msg: String,
}

#[derive(Debug, Clone, PartialEq)]
pub(crate) enum Tok {
    Lambda,
    Dot,
    LParen,
    RParen,
    Zero,
    One,
    If,
    Then,
    Else,
    Ident(String),
}

pub(crate) fn is_ident_start(c: char) -> bool {
    c.is_ascii_alphabetic() || c == '_'
}

pub(crate) fn is_ident_char(c: char) -> bool {
    c.is_ascii_alphanumeric() || c == '_' || c == '\'' || c == '#'
}

fn lex(src: &str) -> Result<Vec<(usize, Tok)>, ParseError> {
    let mut out = Vec::new();
    let mut it = src.char_indices().peekable();
    while let Some(&(i, c)) = it.peek() {
        if c.is_whitespace() {
            it.next();
            continue;
        }
        let tok = match c {
            '\\' | 'λ' => Tok::Lambda,
            '.' => Tok::Dot,
            '(' => Tok::LParen,
            ')' => Tok::RParen,
            '0' => Tok::Zero,
            '1' => Tok::One,
            c if is_ident_start(c) => {
                let mut s = String::new();
                while let Some(&(_, d)) = it.peek() {
                    if is_ident_char(d) {
                        s.push(d);
                        it.next();
                    } else {
                        break;
                    }
                }
                let tok = match s.as_str() {
                    "if" => Tok::If,
                    "then" => Tok::Then,
                    "else" => Tok::Else,
                    _ => Tok::Ident(s),
                };
                out.push((i, tok));
                continue;
            }
            other => {
                return Err(ParseError {
                    pos: i,
                    msg: format!("unexpected character {other:?}"),
                })
            }
        };
        it.next();
        out.push((i, tok));
    }
    Ok(out)
}

struct Parser {
    toks: Vec<(usize, Tok)>,
    pos: usize,
    end: usize,
}

impl Parser {
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos).map(|(_, t)| t)
    }

    fn offset(&self) -> usize {
        self.toks.get(self.pos).map_or(self.end, |(i, _)| *i)
    }

    fn err<T>(&self, msg: impl Into<String>) -> Result<T, ParseError> {
        Err(ParseError {
            pos: self.offset(),
            msg: msg.into(),
        })
    }

    fn expect(&mut self, t: Tok, what: &str) -> Result<(), ParseError> {
        if self.peek() == Some(&t) {
            self.pos += 1;
            Ok(())
        } else {
            self.err(format!("expected {what}"))
        }
    }

    fn term(&mut self) -> Result<Term, ParseError> {
        match self.peek() {
            Some(Tok::Lambda) => self.lambda(),
            Some(Tok::If) => self.conditional(),
            _ => self.application(),
        }
    }

    fn lambda(&mut self) -> Result<Term, ParseError> {
        self.expect(Tok::Lambda, "lambda")?;
        let mut binders = Vec::new();
        while let Some(Tok::Ident(x)) = self.peek() {
            binders.push(x.clone());
            self.pos += 1;
        }
        if binders.is_empty() {
            return self.err("expected a binder after lambda");
        }
        self.expect(Tok::Dot, "'.'")?;
        let body = self.term()?;
        Ok(binders.iter().rev().fold(body, |b, x| Term::lam(x, b)))
    }

    fn conditional(&mut self) -> Result<Term, ParseError> {
        self.expect(Tok::If, "'if'")?;
        let c = self.term()?;
        self.expect(Tok::Then, "'then'")?;
        let t = self.term()?;
        self.expect(Tok::Else, "'else'")?;
        let e = self.term()?;
        Ok(Term::ite(c, t, e))
    }

    fn application(&mut self) -> Result<Term, ParseError> {
        let mut t = self.atom()?;
        loop {
            match self.peek() {
                Some(Tok::Lambda) => return Ok(Term::app(t, self.lambda()?)),
                Some(Tok::If) => return Ok(Term::app(t, self.conditional()?)),
                Some(Tok::Ident(_) | Tok::Zero | Tok::One | Tok::LParen) => {
                    let a = self.atom()?;
                    t = Term::app(t, a);
                }
                _ => return Ok(t),
            }
        }
    }

    fn atom(&mut self) -> Result<Term, ParseError> {
        match self.peek().cloned() {
            Some(Tok::Ident(x)) => {
                self.pos += 1;
                Ok(Term::var(&x))
            }
            Some(Tok::Zero) => {
                self.pos += 1;
                Ok(Term::zero())
            }
            Some(Tok::One) => {
                self.pos += 1;
                Ok(Term::one())
            }
            Some(Tok::LParen) => {
                self.pos += 1;
                let t = self.term()?;
                self.expect(Tok::RParen, "')'")?;
                Ok(t)
            }
            Some(_) => self.err("expected a term"),
            None => self.err("unexpected end of input"),
        }
    }
}

pub fn parse_term(src: &str) -> Result<Term, ParseError> {
    let toks = lex(src)?;
    let mut p = Parser {
        toks,
        pos: 0,
        end: src.len(),
    };
    let t = p.term()?;
    if p.pos != p.toks.len() {
        return p.err("trailing input");
    }
    Ok(t)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn application_is_left_associative() {
        let t = parse_term("f x y").unwrap();
        assert_eq!(t, Term::app(Term::app(Term::var("f"), Term::var("x")), Term::var("y")));
    }

    #[test]
    fn lambda_extends_right() {
        let t = parse_term(r"\x y. x y").unwrap();
        assert_eq!(t.to_string(), r"\x. \y. x y");
    }

    #[test]
    fn conditional_and_constants() {
        let t = parse_term("if x then 0 else (f 1)").unwrap();
        assert_eq!(t.to_string(), "if x then 0 else f 1");
    }

    #[test]
    fn errors_carry_offsets() {
        let e = parse_term(r"\x x").unwrap_err();
        assert_eq!(e.pos, 4);
        let e = parse_term("(f x").unwrap_err();
        assert_eq!(e.pos, 4);
        let e = parse_term("f $").unwrap_err();
        assert_eq!(e.pos, 2);
    }

    #[test]
    fn unicode_lambda() {
        assert_eq!(parse_term("λx. x").unwrap().to_string(), r"\x. x");
    }
}

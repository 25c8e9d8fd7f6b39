//! Types `A ::= B | α | σ ⊸ A | ∀α.A` and `σ ::= A | !σ`.

use crate::syntax::{name, Name};
use std::collections::BTreeSet;
use std::fmt;
use std::rc::Rc;
use thiserror::Error;

#[derive(Clone, PartialEq, Eq, Hash)]
pub enum Type {
    Bool,
    Var(Name),
    Lolli(Rc<Type>, Rc<Type>),
    Forall(Name, Rc<Type>),
    Bang(Rc<Type>),
}

impl fmt::Debug for Type {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Type({self})")
    }
}

impl Type {
    pub fn var(a: &str) -> Type {
        Type::Var(name(a))
    }
    pub fn lolli(a: Type, b: Type) -> Type {
        Type::Lolli(Rc::new(a), Rc::new(b))
    }
    pub fn forall(a: &str, body: Type) -> Type {
        Type::Forall(name(a), Rc::new(body))
    }
    pub fn forall_n(a: Name, body: Type) -> Type {
        Type::Forall(a, Rc::new(body))
    }
    pub fn bang(a: Type) -> Type {
        Type::Bang(Rc::new(a))
    }
    /// `!^k a`.
    pub fn bangs(k: usize, a: Type) -> Type {
        (0..k).fold(a, |t, _| Type::bang(t))
    }
    /// `a1 ⊸ .. ⊸ an ⊸ r`.
    pub fn arrows(args: impl IntoIterator<Item = Type>, r: Type) -> Type {
        let args: Vec<Type> = args.into_iter().collect();
        args.into_iter().rev().fold(r, |acc, a| Type::lolli(a, acc))
    }

    pub fn is_linear(&self) -> bool {
        !matches!(self, Type::Bang(_))
    }

    /// Number of leading bangs and the linear type under them.
    pub fn strip_bangs(&self) -> (usize, &Type) {
        let mut k = 0;
        let mut t = self;
        while let Type::Bang(inner) = t {
            k += 1;
            t = inner;
        }
        (k, t)
    }

    /// Checks that bangs only occur where the grammar allows them: in the
    /// argument of an arrow and in front of other bangs.
    pub fn is_well_formed(&self) -> bool {
        fn lin(t: &Type) -> bool {
            match t {
                Type::Bool | Type::Var(_) => true,
                Type::Lolli(a, b) => any(a) && lin(b),
                Type::Forall(_, b) => lin(b),
                Type::Bang(_) => false,
            }
        }
        fn any(t: &Type) -> bool {
            match t {
                Type::Bang(a) => any(a),
                other => lin(other),
            }
        }
        any(self)
    }

    pub fn free_type_vars(&self) -> BTreeSet<Name> {
        let mut out = BTreeSet::new();
        self.ftv_into(&mut Vec::new(), &mut out);
        out
    }

    pub(crate) fn ftv_into(&self, bound: &mut Vec<Name>, out: &mut BTreeSet<Name>) {
        match self {
            Type::Bool => {}
            Type::Var(a) => {
                if !bound.contains(a) {
                    out.insert(a.clone());
                }
            }
            Type::Lolli(a, b) => {
                a.ftv_into(bound, out);
                b.ftv_into(bound, out);
            }
            Type::Forall(a, b) => {
                bound.push(a.clone());
                b.ftv_into(bound, out);
                bound.pop();
            }
            Type::Bang(a) => a.ftv_into(bound, out),
        }
    }

    pub fn has_free_var(&self, a: &str) -> bool {
        match self {
            Type::Bool => false,
            Type::Var(b) => &**b == a,
            Type::Lolli(x, y) => x.has_free_var(a) || y.has_free_var(a),
            Type::Forall(b, body) => &**b != a && body.has_free_var(a),
            Type::Bang(x) => x.has_free_var(a),
        }
    }

    /// All type variable names, bound or free.
    pub fn all_vars(&self, out: &mut BTreeSet<Name>) {
        match self {
            Type::Bool => {}
            Type::Var(a) => {
                out.insert(a.clone());
            }
            Type::Lolli(x, y) => {
                x.all_vars(out);
                y.all_vars(out);
            }
            Type::Forall(a, b) => {
                out.insert(a.clone());
                b.all_vars(out);
            }
            Type::Bang(x) => x.all_vars(out),
        }
    }

    /// Capture avoiding substitution `self[a/alpha]`.
    pub fn subst(&self, alpha: &str, a: &Type) -> Type {
        match self {
            Type::Bool => Type::Bool,
            Type::Var(b) => {
                if &**b == alpha {
                    a.clone()
                } else {
                    self.clone()
                }
            }
            Type::Lolli(x, y) => Type::lolli(x.subst(alpha, a), y.subst(alpha, a)),
            Type::Bang(x) => Type::bang(x.subst(alpha, a)),
            Type::Forall(b, body) => {
                if &**b == alpha || !body.has_free_var(alpha) {
                    return self.clone();
                }
                if a.has_free_var(b) {
                    let mut avoid = a.free_type_vars();
                    body.all_vars(&mut avoid);
                    avoid.insert(name(alpha));
                    let b2 = fresh_tyvar(b, &avoid);
                    let body2 = body.subst(b, &Type::Var(b2.clone()));
                    Type::forall_n(b2, body2.subst(alpha, a))
                } else {
                    Type::forall_n(b.clone(), body.subst(alpha, a))
                }
            }
        }
    }

    /// Equality up to renaming of bound type variables.
    pub fn alpha_eq(&self, other: &Type) -> bool {
        fn go(x: &Type, y: &Type, env: &mut Vec<(Name, Name)>) -> bool {
            match (x, y) {
                (Type::Bool, Type::Bool) => true,
                (Type::Var(a), Type::Var(b)) => {
                    let i = env.iter().rposition(|(l, _)| l == a);
                    let j = env.iter().rposition(|(_, r)| r == b);
                    match (i, j) {
                        (None, None) => a == b,
                        (Some(i), Some(j)) => i == j,
                        _ => false,
                    }
                }
                (Type::Lolli(a1, b1), Type::Lolli(a2, b2)) => go(a1, a2, env) && go(b1, b2, env),
                (Type::Bang(a1), Type::Bang(a2)) => go(a1, a2, env),
                (Type::Forall(a, b1), Type::Forall(b, b2)) => {
                    env.push((a.clone(), b.clone()));
                    let r = go(b1, b2, env);
                    env.pop();
                    r
                }
                _ => false,
            }
        }
        go(self, other, &mut Vec::new())
    }
}

/// A type variable name based on `base` and not in `avoid`.
pub fn fresh_tyvar(base: &str, avoid: &BTreeSet<Name>) -> Name {
    let stem: String = base.chars().take_while(|c| c.is_ascii_lowercase()).collect();
    let stem = if stem.is_empty() { "a".to_string() } else { stem };
    (1..)
        .map(|i| name(&format!("{stem}{i}")))
        .find(|n| !avoid.contains(n))
        .unwrap()
}

#[derive(Clone, Copy, PartialEq)]
enum Ctx {
    Top,
    Left,
    Under,
}

fn write_type(t: &Type, ctx: Ctx, f: &mut fmt::Formatter<'_>) -> fmt::Result {
    match t {
        Type::Bool => write!(f, "B"),
        Type::Var(a) => write!(f, "{a}"),
        Type::Bang(a) => {
            write!(f, "!")?;
            write_type(a, Ctx::Under, f)
        }
        Type::Lolli(a, b) => {
            let paren = ctx != Ctx::Top;
            if paren {
                write!(f, "(")?;
            }
            write_type(a, Ctx::Left, f)?;
            write!(f, " -> ")?;
            write_type(b, Ctx::Top, f)?;
            if paren {
                write!(f, ")")?;
            }
            Ok(())
        }
        Type::Forall(a, b) => {
            let paren = ctx != Ctx::Top;
            if paren {
                write!(f, "(")?;
            }
            write!(f, "forall {a}. ")?;
            write_type(b, Ctx::Top, f)?;
            if paren {
                write!(f, ")")?;
            }
            Ok(())
        }
    }
}

impl fmt::Display for Type {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write_type(self, Ctx::Top, f)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("type parse error at offset {pos}: {msg}")]
pub struct TypeParseError {
    pub pos: usize,
    pub msg: String,
}

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Bool,
    Var(String),
    Arrow,
    Bang,
    Forall,
    Dot,
    LParen,
    RParen,
}

fn lex(src: &str) -> Result<Vec<(usize, Tok)>, TypeParseError> {
    let mut out = Vec::new();
    let chars: Vec<(usize, char)> = src.char_indices().collect();
    let mut i = 0;
    while i < chars.len() {
        let (off, c) = chars[i];
        if c.is_whitespace() {
            i += 1;
            continue;
        }
        let tok = match c {
            '!' => Tok::Bang,
            '.' => Tok::Dot,
            '(' => Tok::LParen,
            ')' => Tok::RParen,
            '⊸' => Tok::Arrow,
            '∀' => Tok::Forall,
            '-' if chars.get(i + 1).map(|p| p.1) == Some('>') => {
                i += 1;
                Tok::Arrow
            }
            c if c.is_ascii_alphabetic() => {
                let mut s = String::new();
                while i < chars.len()
                    && (chars[i].1.is_ascii_alphanumeric() || chars[i].1 == '_' || chars[i].1 == '\'')
                {
                    s.push(chars[i].1);
                    i += 1;
                }
                let tok = match s.as_str() {
                    "B" => Tok::Bool,
                    "forall" => Tok::Forall,
                    _ if s.starts_with(|c: char| c.is_ascii_lowercase()) => Tok::Var(s),
                    _ => {
                        return Err(TypeParseError {
                            pos: off,
                            msg: format!("unknown type constant {s}"),
                        })
                    }
                };
                out.push((off, tok));
                continue;
            }
            other => {
                return Err(TypeParseError {
                    pos: off,
                    msg: format!("unexpected character {other:?}"),
                })
            }
        };
        out.push((off, tok));
        i += 1;
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
        self.toks.get(self.pos).map(|p| &p.1)
    }
    fn err<T>(&self, msg: &str) -> Result<T, TypeParseError> {
        Err(TypeParseError {
            pos: self.toks.get(self.pos).map_or(self.end, |p| p.0),
            msg: msg.to_string(),
        })
    }
    fn ty(&mut self) -> Result<Type, TypeParseError> {
        if self.peek() == Some(&Tok::Forall) {
            self.pos += 1;
            let mut vars = Vec::new();
            while let Some(Tok::Var(a)) = self.peek() {
                vars.push(a.clone());
                self.pos += 1;
            }
            if vars.is_empty() {
                return self.err("expected a type variable after forall");
            }
            if self.peek() != Some(&Tok::Dot) {
                return self.err("expected '.'");
            }
            self.pos += 1;
            let body = self.ty()?;
            return Ok(vars.iter().rev().fold(body, |b, a| Type::forall(a, b)));
        }
        let left = self.prefix()?;
        if self.peek() == Some(&Tok::Arrow) {
            self.pos += 1;
            let right = self.ty()?;
            return Ok(Type::lolli(left, right));
        }
        Ok(left)
    }
    fn prefix(&mut self) -> Result<Type, TypeParseError> {
        match self.peek().cloned() {
            Some(Tok::Bang) => {
                self.pos += 1;
                Ok(Type::bang(self.prefix()?))
            }
            Some(Tok::Bool) => {
                self.pos += 1;
                Ok(Type::Bool)
            }
            Some(Tok::Var(a)) => {
                self.pos += 1;
                Ok(Type::var(&a))
            }
            Some(Tok::LParen) => {
                self.pos += 1;
                let t = self.ty()?;
                if self.peek() != Some(&Tok::RParen) {
                    return self.err("expected ')'");
                }
                self.pos += 1;
                Ok(t)
            }
            Some(_) => self.err("expected a type"),
            None => self.err("unexpected end of input"),
        }
    }
}

/// Parses `B`, type variables, `->` (right associative), prefix `!` and
/// `forall a.`, whose scope extends as far right as possible.
pub fn parse_type(src: &str) -> Result<Type, TypeParseError> {
    let toks = lex(src)?;
    let mut p = Parser {
        toks,
        pos: 0,
        end: src.len(),
    };
    let t = p.ty()?;
    if p.pos != p.toks.len() {
        return p.err("trailing input");
    }
    Ok(t)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn t(s: &str) -> Type {
        parse_type(s).unwrap()
    }

    #[test]
    fn arrow_binds_tighter_than_forall() {
        assert_eq!(t("forall a. a -> a"), Type::forall("a", Type::lolli(t("a"), t("a"))));
        assert_eq!(t("a -> b -> c"), Type::lolli(t("a"), Type::lolli(t("b"), t("c"))));
        assert_eq!(t("!a -> b"), Type::lolli(Type::bang(t("a")), t("b")));
    }

    #[test]
    fn printing_round_trips() {
        for s in [
            "forall a. !(a -> a) -> a -> a",
            "(B -> B) -> B",
            "!!(forall a. a) -> B",
            "a -> forall b. b -> a",
        ] {
            assert_eq!(t(s).to_string(), s);
            assert_eq!(t(&t(s).to_string()), t(s));
        }
    }

    #[test]
    fn alpha_equivalent_types() {
        assert!(t("forall a. a -> a").alpha_eq(&t("forall b. b -> b")));
        assert!(!t("forall a. a -> b").alpha_eq(&t("forall b. b -> b")));
    }

    #[test]
    fn substitution_avoids_capture() {
        let r = t("forall b. a -> b").subst("a", &t("b"));
        assert!(r.alpha_eq(&t("forall c. b -> c")));
    }

    #[test]
    fn well_formedness() {
        assert!(t("!a -> a").is_well_formed());
        assert!(!t("a -> !a").is_well_formed());
        assert!(!t("forall a. !a").is_well_formed());
        assert!(t("!!a").is_well_formed());
    }
}

//! One-step reduction at an explicit position, and leftmost-outermost normalization.

use super::{Term, TermKind};
use std::fmt;
use thiserror::Error;

pub const DEFAULT_FUEL: usize = 1_000_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Selector {
    Fun,
    Arg,
    Body,
    Test,
    Then,
    Else,
}

/// A path from the root to a subterm.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Default)]
pub struct RedexPosition(pub Vec<Selector>);

impl RedexPosition {
    pub fn root() -> RedexPosition {
        RedexPosition(Vec::new())
    }

    pub fn is_root(&self) -> bool {
        self.0.is_empty()
    }

    /// True when the path only follows function positions, i.e. the redex is
    /// the head of the term.
    pub fn is_head(&self) -> bool {
        self.0.iter().all(|s| *s == Selector::Fun)
    }

    pub fn child(&self, s: Selector) -> RedexPosition {
        let mut v = self.0.clone();
        v.push(s);
        RedexPosition(v)
    }
}

impl fmt::Display for RedexPosition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_empty() {
            return write!(f, "root");
        }
        let parts: Vec<String> = self.0.iter().map(|s| format!("{s:?}")).collect();
        write!(f, "{}", parts.join("."))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("no redex at position {position}")]
pub struct NotARedex {
    pub position: RedexPosition,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("fuel exhausted after {steps} steps")]
pub struct FuelExhausted {
    pub last: Term,
    pub steps: usize,
}

pub fn subterm_at<'a>(t: &'a Term, pos: &RedexPosition) -> Option<&'a Term> {
    let mut cur = t;
    for s in &pos.0 {
        cur = match (s, cur.kind()) {
            (Selector::Fun, TermKind::App(m, _)) => m,
            (Selector::Arg, TermKind::App(_, n)) => n,
            (Selector::Body, TermKind::Lam(_, b)) => b,
            (Selector::Test, TermKind::If(c, _, _)) => c,
            (Selector::Then, TermKind::If(_, a, _)) => a,
            (Selector::Else, TermKind::If(_, _, b)) => b,
            _ => return None,
        };
    }
    Some(cur)
}

/// Replaces the subterm at `pos`. Returns `None` if the path does not exist.
pub fn replace_at(t: &Term, path: &[Selector], new: Term) -> Option<Term> {
    let Some((s, rest)) = path.split_first() else {
        return Some(new);
    };
    Some(match (s, t.kind()) {
        (Selector::Fun, TermKind::App(m, n)) => Term::app(replace_at(m, rest, new)?, n.clone()),
        (Selector::Arg, TermKind::App(m, n)) => Term::app(m.clone(), replace_at(n, rest, new)?),
        (Selector::Body, TermKind::Lam(x, b)) => Term::lam_n(x.clone(), replace_at(b, rest, new)?),
        (Selector::Test, TermKind::If(c, a, b)) => {
            Term::ite(replace_at(c, rest, new)?, a.clone(), b.clone())
        }
        (Selector::Then, TermKind::If(c, a, b)) => {
            Term::ite(c.clone(), replace_at(a, rest, new)?, b.clone())
        }
        (Selector::Else, TermKind::If(c, a, b)) => {
            Term::ite(c.clone(), a.clone(), replace_at(b, rest, new)?)
        }
        _ => return None,
    })
}

pub fn is_redex(t: &Term) -> bool {
    match t.kind() {
        TermKind::App(m, _) => matches!(m.kind(), TermKind::Lam(..)),
        TermKind::If(c, _, _) => c.as_bool().is_some(),
        _ => false,
    }
}

/// Contracts a redex: `(λx.M)N → M[N/x]`, `if 0 then M else N → M`, `if 1 then M else N → N`.
pub fn contract(t: &Term) -> Option<Term> {
    match t.kind() {
        TermKind::App(m, n) => match m.kind() {
            TermKind::Lam(x, b) => Some(b.subst(x, n)),
            _ => None,
        },
        TermKind::If(c, a, b) => match c.as_bool()? {
            true => Some(a.clone()),
            false => Some(b.clone()),
        },
        _ => None,
    }
}

pub fn step(t: &Term, at: &RedexPosition) -> Result<Term, NotARedex> {
    let bad = || NotARedex {
        position: at.clone(),
    };
    let sub = subterm_at(t, at).ok_or_else(bad)?;
    let c = contract(sub).ok_or_else(bad)?;
    replace_at(t, &at.0, c).ok_or_else(bad)
}

/// All redex positions in leftmost-outermost order.
pub fn redexes(t: &Term) -> Vec<RedexPosition> {
    fn go(t: &Term, path: &mut Vec<Selector>, out: &mut Vec<RedexPosition>) {
        if is_redex(t) {
            out.push(RedexPosition(path.clone()));
        }
        let mut visit = |s: Selector, c: &Term, out: &mut Vec<RedexPosition>| {
            path.push(s);
            go(c, path, out);
            path.pop();
        };
        match t.kind() {
            TermKind::Lam(_, b) => visit(Selector::Body, b, out),
            TermKind::App(m, n) => {
                visit(Selector::Fun, m, out);
                visit(Selector::Arg, n, out);
            }
            TermKind::If(c, a, b) => {
                visit(Selector::Test, c, out);
                visit(Selector::Then, a, out);
                visit(Selector::Else, b, out);
            }
            _ => {}
        }
    }
    let mut out = Vec::new();
    go(t, &mut Vec::new(), &mut out);
    out
}

pub fn leftmost_redex(t: &Term) -> Option<RedexPosition> {
    fn go(t: &Term, path: &mut Vec<Selector>) -> bool {
        if is_redex(t) {
            return true;
        }
        let children: Vec<(Selector, &Term)> = match t.kind() {
            TermKind::Lam(_, b) => vec![(Selector::Body, b)],
            TermKind::App(m, n) => vec![(Selector::Fun, m), (Selector::Arg, n)],
            TermKind::If(c, a, b) => vec![(Selector::Test, c), (Selector::Then, a), (Selector::Else, b)],
            _ => vec![],
        };
        for (s, c) in children {
            path.push(s);
            if go(c, path) {
                return true;
            }
            path.pop();
        }
        false
    }
    let mut path = Vec::new();
    go(t, &mut path).then_some(RedexPosition(path))
}

/// Leftmost-outermost normalization with a step budget.
pub fn normalize(t: &Term, fuel: usize) -> Result<Term, FuelExhausted> {
    normalize_counting(t, fuel).map(|(n, _)| n)
}

/// Like [`normalize`], also returning the number of steps taken.
pub fn normalize_counting(t: &Term, fuel: usize) -> Result<(Term, usize), FuelExhausted> {
    let mut cur = t.clone();
    for steps in 0..=fuel {
        match leftmost_redex(&cur) {
            None => return Ok((cur, steps)),
            Some(_) if steps == fuel => break,
            Some(p) => cur = step(&cur, &p).expect("leftmost redex contracts"),
        }
    }
    Err(FuelExhausted {
        last: cur,
        steps: fuel,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::syntax::parse_term;

    fn p(s: &str) -> Term {
        parse_term(s).unwrap()
    }

    #[test]
    fn leftmost_redex_in_test_position() {
        let t = p(r"if ((\x. x) 0) then 0 else 1");
        assert_eq!(leftmost_redex(&t), Some(RedexPosition(vec![Selector::Test])));
    }

    #[test]
    fn step_rejects_non_redex() {
        let t = p("f 0");
        assert!(step(&t, &RedexPosition::root()).is_err());
        assert!(step(&t, &RedexPosition(vec![Selector::Body])).is_err());
    }

    #[test]
    fn delta_rules() {
        assert_eq!(step(&p("if 0 then a else b"), &RedexPosition::root()).unwrap(), p("a"));
        assert_eq!(step(&p("if 1 then a else b"), &RedexPosition::root()).unwrap(), p("b"));
    }

    #[test]
    fn m2_normalizes_to_zero() {
        let m2 = p(r"(\f. \z. f (f z)) (\x. if x then x else x) 0");
        assert_eq!(normalize(&m2, DEFAULT_FUEL).unwrap(), Term::zero());
    }

    #[test]
    fn fuel_exhaustion_keeps_last_term() {
        let omega = p(r"(\x. x x) (\x. x x)");
        let e = normalize(&omega, 5).unwrap_err();
        assert_eq!(e.steps, 5);
        assert!(e.last.alpha_eq(&omega));
    }

    #[test]
    fn normalizes_under_binders() {
        assert_eq!(normalize(&p(r"\y. (\x. x) y"), 10).unwrap(), p(r"\y. y"));
    }
}

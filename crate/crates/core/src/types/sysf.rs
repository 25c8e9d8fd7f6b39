//! Forgetful translation into System F: bangs vanish, booleans become Church
//! booleans and conditionals become applications.

use super::ty::Type;
use crate::syntax::{name, Name, RedexPosition, Selector, Term, TermKind};
use std::fmt;
use std::rc::Rc;
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum FType {
    Var(Name),
    Arrow(Rc<FType>, Rc<FType>),
    Forall(Name, Rc<FType>),
}

impl FType {
    pub fn alpha_eq(&self, other: &FType) -> bool {
        fn go<'a>(a: &'a FType, b: &'a FType, env: &mut Vec<(&'a Name, &'a Name)>) -> bool {
            match (a, b) {
                (FType::Var(x), FType::Var(y)) => {
                    for (l, r) in env.iter().rev() {
                        if *l == x || *r == y {
                            return *l == x && *r == y;
                        }
                    }
                    x == y
                }
                (FType::Arrow(a1, b1), FType::Arrow(a2, b2)) => go(a1, a2, env) && go(b1, b2, env),
                (FType::Forall(x, a1), FType::Forall(y, a2)) => {
                    env.push((x, y));
                    let r = go(a1, a2, env);
                    env.pop();
                    r
                }
                _ => false,
            }
        }
        go(self, other, &mut Vec::new())
    }
}

impl fmt::Display for FType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            FType::Var(a) => write!(f, "{a}"),
            FType::Arrow(a, b) => match **a {
                FType::Var(_) => write!(f, "{a} => {b}"),
                _ => write!(f, "({a}) => {b}"),
            },
            FType::Forall(a, b) => write!(f, "forall {a}. {b}"),
        }
    }
}

pub fn translate_type(t: &Type) -> FType {
    match t {
        Type::Bool => {
            let a = name("a");
            let v = Rc::new(FType::Var(a.clone()));
            FType::Forall(a, Rc::new(FType::Arrow(v.clone(), Rc::new(FType::Arrow(v.clone(), v)))))
        }
        Type::Var(a) => FType::Var(a.clone()),
        Type::Lolli(a, b) => FType::Arrow(Rc::new(translate_type(a)), Rc::new(translate_type(b))),
        Type::Forall(a, b) => FType::Forall(a.clone(), Rc::new(translate_type(b))),
        Type::Bang(a) => translate_type(a),
    }
}

fn church(first: bool) -> Term {
    let body = if first { Term::var("x") } else { Term::var("y") };
    Term::lam("x", Term::lam("y", body))
}

/// The image of a term: a pure λ-term.
pub fn translate_term(t: &Term) -> Term {
    match t.kind() {
        TermKind::Var(_) => t.clone(),
        TermKind::Zero => church(true),
        TermKind::One => church(false),
        TermKind::Lam(x, b) => Term::lam_n(x.clone(), translate_term(b)),
        TermKind::App(m, n) => Term::app(translate_term(m), translate_term(n)),
        TermKind::If(c, a, b) => Term::apps(translate_term(c), [translate_term(a), translate_term(b)]),
    }
}

/// Where a position of the source term lands in its image.
pub fn translate_position(p: &RedexPosition) -> RedexPosition {
    let mut out = Vec::new();
    for s in &p.0 {
        match s {
            Selector::Test => out.extend([Selector::Fun, Selector::Fun]),
            Selector::Then => out.extend([Selector::Fun, Selector::Arg]),
            Selector::Else => out.push(Selector::Arg),
            other => out.push(*other),
        }
    }
    RedexPosition(out)
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SimulationError {
    #[error(transparent)]
    NotARedex(#[from] crate::syntax::NotARedex),
    #[error("image of the reduct not reached within {0} steps")]
    Failure(usize),
}

pub const SIMULATION_FUEL: usize = 16;

/// Number of β-steps, taken leftmost inside the image of `at`, that carry the image of `t`
/// to the image of its reduct.
pub fn check_simulation(t: &Term, at: &RedexPosition) -> Result<usize, SimulationError> {
    let target = translate_term(&crate::syntax::step(t, at)?);
    let fpos = translate_position(at);
    let mut cur = translate_term(t);
    for k in 1..=SIMULATION_FUEL {
        let inner = crate::syntax::subterm_at(&cur, &fpos).and_then(crate::syntax::leftmost_redex);
        let Some(inner) = inner else {
            return Err(SimulationError::Failure(k - 1));
        };
        let mut at = fpos.clone();
        at.0.extend(inner.0);
        cur = crate::syntax::step(&cur, &at)?;
        if cur.alpha_eq(&target) {
            return Ok(k);
        }
    }
    Err(SimulationError::Failure(SIMULATION_FUEL))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::syntax::{normalize, parse_term};
    use crate::types::parse_type;

    fn p(s: &str) -> Term {
        parse_term(s).unwrap()
    }

    #[test]
    fn types() {
        assert_eq!(translate_type(&Type::Bool).to_string(), "forall a. a => a => a");
        let s = parse_type("!(B -> B)").unwrap();
        assert_eq!(translate_type(&s), translate_type(&parse_type("B -> B").unwrap()));
    }

    #[test]
    fn conditional_becomes_application() {
        let t = translate_term(&p("if x then 0 else 1"));
        assert!(t.alpha_eq(&p(r"x (\a. \b. a) (\a. \b. b)")));
    }

    #[test]
    fn simulation_steps() {
        let root = RedexPosition::root();
        assert_eq!(check_simulation(&p(r"(\x. x) 0"), &root), Ok(1));
        assert_eq!(check_simulation(&p("if 0 then a else b"), &root), Ok(2));
        assert_eq!(check_simulation(&p("if 1 then 0 else 1"), &root), Ok(2));
        let nested = p(r"\y. if (if 1 then 0 else y) then y else 0");
        let at = RedexPosition(vec![Selector::Body, Selector::Test]);
        assert_eq!(check_simulation(&nested, &at), Ok(2));
    }

    #[test]
    fn normal_forms_commute() {
        let m2 = p(r"(\f. \z. f (f z)) (\x. if x then x else x) 0");
        let lhs = translate_term(&normalize(&m2, 1000).unwrap());
        let rhs = normalize(&translate_term(&m2), 1000).unwrap();
        assert!(lhs.alpha_eq(&rhs));
    }
}

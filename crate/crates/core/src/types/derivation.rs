//! Typing derivations, their checker, and the degree, rank and weight measures.

use super::ty::Type;
use crate::syntax::{name, Name, Term};
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::fmt;
use thiserror::Error;

pub type Context = BTreeMap<Name, Type>;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Rule {
    Ax,
    B0I,
    B1I,
    W,
    LolliI,
    LolliE,
    M,
    Sp,
    ForallI,
    ForallE,
    BE,
}

impl Rule {
    pub fn tag(self) -> &'static str {
        match self {
            Rule::Ax => "Ax",
            Rule::B0I => "B0I",
            Rule::B1I => "B1I",
            Rule::W => "w",
            Rule::LolliI => "LolliI",
            Rule::LolliE => "LolliE",
            Rule::M => "m",
            Rule::Sp => "sp",
            Rule::ForallI => "ForallI",
            Rule::ForallE => "ForallE",
            Rule::BE => "BE",
        }
    }

    pub fn from_tag(s: &str) -> Option<Rule> {
        [
            Rule::Ax,
            Rule::B0I,
            Rule::B1I,
            Rule::W,
            Rule::LolliI,
            Rule::LolliE,
            Rule::M,
            Rule::Sp,
            Rule::ForallI,
            Rule::ForallE,
            Rule::BE,
        ]
        .into_iter()
        .find(|r| r.tag() == s)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Payload {
    None,
    /// The assumption added by `w`.
    Weaken { var: Name, ty: Type },
    /// The variables merged by `m` and the name replacing them.
    Merge { vars: Vec<Name>, target: Name },
    /// The instance chosen by `∀E`.
    Inst(Type),
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum TypeError {
    #[error("{0}")]
    Rule(String),
    #[error("rule ({rule}) at node {path:?}: {reason}")]
    Invalid {
        path: Vec<usize>,
        rule: &'static str,
        reason: String,
    },
}

pub(crate) fn bad<T>(msg: impl Into<String>) -> Result<T, TypeError> {
    Err(TypeError::Rule(msg.into()))
}

#[derive(Debug, Clone, PartialEq)]
pub struct Derivation {
    pub rule: Rule,
    pub ctx: Context,
    pub term: Term,
    pub ty: Type,
    pub premises: Vec<Derivation>,
    pub payload: Payload,
}

pub fn show_context(ctx: &Context) -> String {
    let parts: Vec<String> = ctx.iter().map(|(x, t)| format!("{x}:{t}")).collect();
    parts.join(", ")
}

pub fn contexts_alpha_eq(a: &Context, b: &Context) -> bool {
    a.len() == b.len() && a.iter().all(|(x, t)| b.get(x).is_some_and(|u| t.alpha_eq(u)))
}

impl fmt::Display for Derivation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fn go(d: &Derivation, depth: usize, f: &mut fmt::Formatter<'_>) -> fmt::Result {
            writeln!(
                f,
                "{:indent$}({}) {} |- {} : {}",
                "",
                d.rule.tag(),
                show_context(&d.ctx),
                d.term,
                d.ty,
                indent = 2 * depth
            )?;
            d.premises.iter().try_for_each(|p| go(p, depth + 1, f))
        }
        go(self, 0, f)
    }
}

/// What a node does, independently of its premises.
#[derive(Debug, Clone, PartialEq)]
pub enum Shape {
    Ax(Name, Type),
    B0,
    B1,
    W(Name, Type),
    LolliI(Name),
    LolliE,
    M(Vec<Name>, Name),
    Sp,
    ForallI(Name),
    ForallE(Type),
    BE,
}

impl Shape {
    pub fn rule(&self) -> Rule {
        match self {
            Shape::Ax(..) => Rule::Ax,
            Shape::B0 => Rule::B0I,
            Shape::B1 => Rule::B1I,
            Shape::W(..) => Rule::W,
            Shape::LolliI(_) => Rule::LolliI,
            Shape::LolliE => Rule::LolliE,
            Shape::M(..) => Rule::M,
            Shape::Sp => Rule::Sp,
            Shape::ForallI(_) => Rule::ForallI,
            Shape::ForallE(_) => Rule::ForallE,
            Shape::BE => Rule::BE,
        }
    }

    pub fn arity(&self) -> usize {
        match self {
            Shape::Ax(..) | Shape::B0 | Shape::B1 => 0,
            Shape::LolliE => 2,
            Shape::BE => 3,
            _ => 1,
        }
    }

    pub fn payload(&self) -> Payload {
        match self {
            Shape::W(x, t) => Payload::Weaken {
                var: x.clone(),
                ty: t.clone(),
            },
            Shape::M(vars, target) => Payload::Merge {
                vars: vars.clone(),
                target: target.clone(),
            },
            Shape::ForallE(a) => Payload::Inst(a.clone()),
            _ => Payload::None,
        }
    }
}

/// Computes the conclusion of a rule instance from its premises.
pub fn conclude(shape: &Shape, ps: &[Derivation]) -> Result<(Context, Term, Type), TypeError> {
    if ps.len() != shape.arity() {
        return bad(format!("({}) with {} premises", shape.rule().tag(), ps.len()));
    }
    match shape {
        Shape::Ax(x, a) => {
            if !a.is_linear() {
                return bad(format!("(Ax) needs a linear type, got {a}"));
            }
            let mut ctx = Context::new();
            ctx.insert(x.clone(), a.clone());
            Ok((ctx, Term::var_n(x.clone()), a.clone()))
        }
        Shape::B0 => Ok((Context::new(), Term::zero(), Type::Bool)),
        Shape::B1 => Ok((Context::new(), Term::one(), Type::Bool)),
        Shape::W(x, a) => {
            let p = &ps[0];
            if !a.is_linear() {
                return bad(format!("(w) needs a linear type, got {a}"));
            }
            if p.ctx.contains_key(x) {
                return bad(format!("(w) on {x}, already in the context"));
            }
            let mut ctx = p.ctx.clone();
            ctx.insert(x.clone(), a.clone());
            Ok((ctx, p.term.clone(), p.ty.clone()))
        }
        Shape::LolliI(x) => {
            let p = &ps[0];
            let Some(sigma) = p.ctx.get(x) else {
                return bad(format!("(LolliI) on {x}, not in the context"));
            };
            if !p.ty.is_linear() {
                return bad("(LolliI) needs a linear conclusion");
            }
            let mut ctx = p.ctx.clone();
            ctx.remove(x);
            Ok((
                ctx,
                Term::lam_n(x.clone(), p.term.clone()),
                Type::lolli(sigma.clone(), p.ty.clone()),
            ))
        }
        Shape::LolliE => {
            let (f, arg) = (&ps[0], &ps[1]);
            let Type::Lolli(sigma, a) = &f.ty else {
                return bad(format!("(LolliE) on non-arrow type {}", f.ty));
            };
            if !sigma.alpha_eq(&arg.ty) {
                return bad(format!("(LolliE) argument type {} does not match {}", arg.ty, sigma));
            }
            if let Some(x) = f.ctx.keys().find(|x| arg.ctx.contains_key(*x)) {
                return bad(format!("(LolliE) contexts share {x}"));
            }
            let mut ctx = f.ctx.clone();
            ctx.extend(arg.ctx.iter().map(|(x, t)| (x.clone(), t.clone())));
            Ok((ctx, Term::app(f.term.clone(), arg.term.clone()), (**a).clone()))
        }
        Shape::M(vars, target) => {
            let p = &ps[0];
            let Some(first) = vars.first() else {
                return bad("(m) needs at least one variable");
            };
            let Some(sigma) = p.ctx.get(first) else {
                return bad(format!("(m) on {first}, not in the context"));
            };
            for (i, x) in vars.iter().enumerate() {
                if vars[..i].contains(x) {
                    return bad(format!("(m) merges {x} twice"));
                }
                match p.ctx.get(x) {
                    Some(t) if t.alpha_eq(sigma) => {}
                    Some(t) => return bad(format!("(m) type mismatch: {x}:{t} vs {sigma}")),
                    None => return bad(format!("(m) on {x}, not in the context")),
                }
            }
            let mut ctx = p.ctx.clone();
            for x in vars {
                ctx.remove(x);
            }
            if ctx.contains_key(target) {
                return bad(format!("(m) target {target} clashes with the context"));
            }
            ctx.insert(target.clone(), Type::bang(sigma.clone()));
            let target_term = Term::var_n(target.clone());
            let term = vars.iter().fold(p.term.clone(), |t, x| t.subst(x, &target_term));
            Ok((ctx, term, p.ty.clone()))
        }
        Shape::Sp => {
            let p = &ps[0];
            let ctx = p
                .ctx
                .iter()
                .map(|(x, t)| (x.clone(), Type::bang(t.clone())))
                .collect();
            Ok((ctx, p.term.clone(), Type::bang(p.ty.clone())))
        }
        Shape::ForallI(alpha) => {
            let p = &ps[0];
            if !p.ty.is_linear() {
                return bad("(ForallI) needs a linear premise");
            }
            if let Some((x, _)) = p.ctx.iter().find(|(_, t)| t.has_free_var(alpha)) {
                return bad(format!("(ForallI) {alpha} is free in the type of {x}"));
            }
            Ok((p.ctx.clone(), p.term.clone(), Type::forall_n(alpha.clone(), p.ty.clone())))
        }
        Shape::ForallE(a) => {
            let p = &ps[0];
            let Type::Forall(alpha, body) = &p.ty else {
                return bad(format!("(ForallE) on non-universal type {}", p.ty));
            };
            if !a.is_linear() {
                return bad(format!("(ForallE) needs a linear instance, got {a}"));
            }
            Ok((p.ctx.clone(), p.term.clone(), body.subst(alpha, a)))
        }
        Shape::BE => {
            let (test, yes, no) = (&ps[0], &ps[1], &ps[2]);
            if test.ty != Type::Bool {
                return bad(format!("(BE) test has type {}", test.ty));
            }
            if !contexts_alpha_eq(&test.ctx, &yes.ctx) || !contexts_alpha_eq(&test.ctx, &no.ctx) {
                return bad(format!(
                    "(BE) premises need identical contexts: [{}] [{}] [{}]",
                    show_context(&test.ctx),
                    show_context(&yes.ctx),
                    show_context(&no.ctx)
                ));
            }
            if !yes.ty.alpha_eq(&no.ty) || !yes.ty.is_linear() {
                return bad(format!("(BE) branch types {} and {} differ", yes.ty, no.ty));
            }
            Ok((
                test.ctx.clone(),
                Term::ite(test.term.clone(), yes.term.clone(), no.term.clone()),
                yes.ty.clone(),
            ))
        }
    }
}

impl Derivation {
    /// Applies a rule to premises, computing the conclusion.
    pub fn apply(shape: Shape, premises: Vec<Derivation>) -> Result<Derivation, TypeError> {
        let (ctx, term, ty) = conclude(&shape, &premises)?;
        Ok(Derivation {
            rule: shape.rule(),
            ctx,
            term,
            ty,
            premises,
            payload: shape.payload(),
        })
    }

    /// The rule instance used at this node.
    pub fn shape(&self) -> Shape {
        match (self.rule, &self.payload) {
            (Rule::Ax, _) => Shape::Ax(
                self.term.as_var().cloned().unwrap_or_else(|| name("?")),
                self.ty.clone(),
            ),
            (Rule::B0I, _) => Shape::B0,
            (Rule::B1I, _) => Shape::B1,
            (Rule::W, Payload::Weaken { var, ty }) => Shape::W(var.clone(), ty.clone()),
            (Rule::W, _) => Shape::W(name("?"), Type::Bool),
            (Rule::LolliI, _) => match self.term.kind() {
                crate::syntax::TermKind::Lam(x, _) => Shape::LolliI(x.clone()),
                _ => Shape::LolliI(name("?")),
            },
            (Rule::LolliE, _) => Shape::LolliE,
            (Rule::M, Payload::Merge { vars, target }) => Shape::M(vars.clone(), target.clone()),
            (Rule::M, _) => Shape::M(vec![], name("?")),
            (Rule::Sp, _) => Shape::Sp,
            (Rule::ForallI, _) => match &self.ty {
                Type::Forall(a, _) => Shape::ForallI(a.clone()),
                _ => Shape::ForallI(name("?")),
            },
            (Rule::ForallE, Payload::Inst(a)) => Shape::ForallE(a.clone()),
            (Rule::ForallE, _) => Shape::ForallE(Type::Bool),
            (Rule::BE, _) => Shape::BE,
        }
    }

    pub fn ax(x: &str, a: Type) -> Result<Derivation, TypeError> {
        Derivation::ax_n(name(x), a)
    }

    pub fn ax_n(x: Name, a: Type) -> Result<Derivation, TypeError> {
        Derivation::apply(Shape::Ax(x, a), vec![])
    }

    pub fn b0() -> Derivation {
        Derivation::apply(Shape::B0, vec![]).unwrap()
    }

    pub fn b1() -> Derivation {
        Derivation::apply(Shape::B1, vec![]).unwrap()
    }

    pub fn weaken(self, x: Name, a: Type) -> Result<Derivation, TypeError> {
        Derivation::apply(Shape::W(x, a), vec![self])
    }

    pub fn lolli_i(self, x: &Name) -> Result<Derivation, TypeError> {
        Derivation::apply(Shape::LolliI(x.clone()), vec![self])
    }

    pub fn lolli_e(self, arg: Derivation) -> Result<Derivation, TypeError> {
        Derivation::apply(Shape::LolliE, vec![self, arg])
    }

    pub fn merge(self, vars: Vec<Name>, target: Name) -> Result<Derivation, TypeError> {
        Derivation::apply(Shape::M(vars, target), vec![self])
    }

    pub fn sp(self) -> Derivation {
        Derivation::apply(Shape::Sp, vec![self]).unwrap()
    }

    pub fn sp_n(self, k: usize) -> Derivation {
        (0..k).fold(self, |d, _| d.sp())
    }

    pub fn forall_i(self, alpha: Name) -> Result<Derivation, TypeError> {
        Derivation::apply(Shape::ForallI(alpha), vec![self])
    }

    pub fn forall_e(self, a: Type) -> Result<Derivation, TypeError> {
        Derivation::apply(Shape::ForallE(a), vec![self])
    }

    pub fn cond(test: Derivation, yes: Derivation, no: Derivation) -> Result<Derivation, TypeError> {
        Derivation::apply(Shape::BE, vec![test, yes, no])
    }

    /// Rebuilds this node from new premises, recomputing the conclusion.
    pub fn rebuild(&self, premises: Vec<Derivation>) -> Result<Derivation, TypeError> {
        Derivation::apply(self.shape(), premises)
    }

    pub fn node_count(&self) -> usize {
        1 + self.premises.iter().map(Derivation::node_count).sum::<usize>()
    }

    /// Visits every node, root first.
    pub fn for_each_node(&self, f: &mut impl FnMut(&Derivation)) {
        f(self);
        for p in &self.premises {
            p.for_each_node(f);
        }
    }

    /// Number of nested `sp` rules along the worst path.
    pub fn degree(&self) -> usize {
        let inner = self.premises.iter().map(Derivation::degree).max().unwrap_or(0);
        inner + usize::from(self.rule == Rule::Sp)
    }

    /// Largest number of merged variables that actually occur free in the
    /// premise of an `m` rule; at least 1.
    pub fn rank(&self) -> usize {
        let mut r = 1;
        self.for_each_node(&mut |d| {
            if let Payload::Merge { vars, .. } = &d.payload {
                let subject = &d.premises[0].term;
                let k = vars.iter().filter(|x| subject.has_free(x)).count();
                r = r.max(k);
            }
        });
        r
    }

    /// The weight `δ(Π, r)`, saturating.
    pub fn weight(&self, r: u128) -> u128 {
        let w = |d: &Derivation| d.weight(r);
        match self.rule {
            Rule::Ax | Rule::B0I | Rule::B1I => 1,
            Rule::LolliI => w(&self.premises[0]).saturating_add(1),
            Rule::Sp => w(&self.premises[0]).saturating_mul(r),
            Rule::LolliE => w(&self.premises[0])
                .saturating_add(w(&self.premises[1]))
                .saturating_add(1),
            Rule::BE => self.premises.iter().map(w).max().unwrap().saturating_add(1),
            Rule::W | Rule::M | Rule::ForallI | Rule::ForallE => w(&self.premises[0]),
        }
    }

    /// Checks every node against its rule. Terms and types are compared up to
    /// renaming of bound variables.
    pub fn validate(&self) -> Result<(), TypeError> {
        let mut path = Vec::new();
        validate_at(self, &mut path)
    }
}

fn validate_at(d: &Derivation, path: &mut Vec<usize>) -> Result<(), TypeError> {
    for (i, p) in d.premises.iter().enumerate() {
        path.push(i);
        validate_at(p, path)?;
        path.pop();
    }
    let fail = |reason: String| TypeError::Invalid {
        path: path.clone(),
        rule: d.rule.tag(),
        reason,
    };
    if !d.ty.is_well_formed() {
        return Err(fail(format!("ill-formed type {}", d.ty)));
    }
    let shape = d.shape();
    if shape.payload() != d.payload {
        return Err(fail("payload does not match the rule".into()));
    }
    let (ctx, term, ty) = conclude(&shape, &d.premises).map_err(|e| fail(e.to_string()))?;
    if !contexts_alpha_eq(&ctx, &d.ctx) {
        return Err(fail(format!(
            "context [{}] should be [{}]",
            show_context(&d.ctx),
            show_context(&ctx)
        )));
    }
    if !term.alpha_eq(&d.term) {
        return Err(fail(format!("subject {} should be {}", d.term, term)));
    }
    if !ty.alpha_eq(&d.ty) {
        return Err(fail(format!("type {} should be {}", d.ty, ty)));
    }
    Ok(())
}

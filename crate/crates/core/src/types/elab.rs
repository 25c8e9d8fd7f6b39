//! Derivation synthesis for annotated terms.
//!
//! Checking against `!σ` places an `sp` box, checking against `∀α.A` places
//! a `∀I`, and polymorphic heads are instantiated with unification variables.
//! Every occurrence of a variable gets its own assumption; at the binder the
//! copies are given the bangs they need and merged with `m`. Conditionals
//! share their assumptions slot by slot so that a variable used once in each
//! branch counts once.

use super::derivation::{Derivation, Shape, TypeError};
use super::ty::{fresh_tyvar, Type};
use crate::syntax::{name, Name, Term, TermKind};
use std::collections::{BTreeMap, BTreeSet, HashMap};
use thiserror::Error;

/// A term with optional binder annotations and references to closed,
/// already typed definitions.
#[derive(Debug, Clone, PartialEq)]
pub enum ATerm {
    Var(String),
    Global(String),
    Zero,
    One,
    Lam(String, Option<Type>, Box<ATerm>),
    App(Box<ATerm>, Box<ATerm>),
    If(Box<ATerm>, Box<ATerm>, Box<ATerm>),
    Ann(Box<ATerm>, Type),
}

impl ATerm {
    pub fn from_term(t: &Term) -> ATerm {
        match t.kind() {
            TermKind::Var(x) => ATerm::Var(x.to_string()),
            TermKind::Zero => ATerm::Zero,
            TermKind::One => ATerm::One,
            TermKind::Lam(x, b) => ATerm::Lam(x.to_string(), None, Box::new(ATerm::from_term(b))),
            TermKind::App(m, n) => ATerm::App(Box::new(ATerm::from_term(m)), Box::new(ATerm::from_term(n))),
            TermKind::If(c, a, b) => ATerm::If(
                Box::new(ATerm::from_term(c)),
                Box::new(ATerm::from_term(a)),
                Box::new(ATerm::from_term(b)),
            ),
        }
    }

    pub fn free_vars(&self, out: &mut BTreeSet<String>) {
        fn go(t: &ATerm, bound: &mut Vec<String>, out: &mut BTreeSet<String>) {
            match t {
                ATerm::Var(x) => {
                    if !bound.contains(x) {
                        out.insert(x.clone());
                    }
                }
                ATerm::Global(_) | ATerm::Zero | ATerm::One => {}
                ATerm::Lam(x, _, b) => {
                    bound.push(x.clone());
                    go(b, bound, out);
                    bound.pop();
                }
                ATerm::App(m, n) => {
                    go(m, bound, out);
                    go(n, bound, out);
                }
                ATerm::If(c, a, b) => {
                    go(c, bound, out);
                    go(a, bound, out);
                    go(b, bound, out);
                }
                ATerm::Ann(m, _) => go(m, bound, out),
            }
        }
        go(self, &mut Vec::new(), out)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ElabError {
    #[error("unbound variable {0}")]
    Unbound(String),
    #[error("unknown definition {0}")]
    UnknownGlobal(String),
    #[error("cannot match {0} with {1}")]
    Mismatch(String, String),
    #[error("{0} is applied but has type {1}")]
    NotAFunction(String, String),
    #[error("variable {0}: {1}")]
    Usage(String, String),
    #[error("internal rule failure: {0}")]
    Rule(#[from] TypeError),
}

#[derive(Debug, Clone)]
enum Raw {
    Node(Shape, Vec<Raw>),
    Done(Derivation),
}

#[derive(Debug, Clone)]
struct Use {
    name: Name,
    bangs: usize,
    core: Type,
}

struct Elab {
    raw: Raw,
    uses: BTreeMap<usize, Vec<Use>>,
}

#[derive(Debug, Clone)]
struct Binding {
    id: usize,
    src: String,
    core: Type,
    bangs: Option<usize>,
}

enum Op {
    Inst(Type),
    Arg(usize, Type),
}

#[derive(Debug, Clone)]
struct Meta {
    sol: Option<Type>,
    linear: bool,
}

/// Holds the definitions that terms may refer to, and the unification state.
#[derive(Default)]
pub struct Elaborator {
    globals: HashMap<String, Derivation>,
    metas: Vec<Meta>,
    next_id: usize,
    next_copy: u64,
    rigid: BTreeSet<Name>,
}

fn meta_index(t: &Type) -> Option<usize> {
    match t {
        Type::Var(a) => a.strip_prefix('?').and_then(|s| s.parse().ok()),
        _ => None,
    }
}

fn lift_raw(raw: Raw, copy: &Name, j: usize, fresh: &mut impl FnMut(&Name) -> Name) -> Raw {
    if j == 0 {
        return raw;
    }
    match raw {
        Raw::Done(d) => Raw::Done(d),
        Raw::Node(Shape::Ax(x, a), ps) if &x == copy => {
            let _ = ps;
            let mut cur_name = fresh(copy);
            let mut cur = Raw::Node(Shape::Ax(cur_name.clone(), a), vec![]);
            for i in 0..j {
                let target = if i + 1 == j { copy.clone() } else { fresh(copy) };
                cur = Raw::Node(Shape::M(vec![cur_name], target.clone()), vec![cur]);
                cur_name = target;
            }
            cur
        }
        Raw::Node(Shape::W(x, a), mut ps) if &x == copy => {
            weaken_raw(ps.pop().unwrap(), copy, j, &a, fresh)
        }
        Raw::Node(Shape::M(vars, target), mut ps) if &target == copy => {
            let mut p = ps.pop().unwrap();
            for v in &vars {
                p = lift_raw(p, v, j, fresh);
            }
            Raw::Node(Shape::M(vars, target), vec![p])
        }
        Raw::Node(shape, ps) => Raw::Node(
            shape,
            ps.into_iter().map(|p| lift_raw(p, copy, j, fresh)).collect(),
        ),
    }
}

fn weaken_raw(raw: Raw, x: &Name, k: usize, core: &Type, fresh: &mut impl FnMut(&Name) -> Name) -> Raw {
    if k == 0 {
        return Raw::Node(Shape::W(x.clone(), core.clone()), vec![raw]);
    }
    let mut cur_name = fresh(x);
    let mut cur = Raw::Node(Shape::W(cur_name.clone(), core.clone()), vec![raw]);
    for i in 0..k {
        let target = if i + 1 == k { x.clone() } else { fresh(x) };
        cur = Raw::Node(Shape::M(vec![cur_name], target.clone()), vec![cur]);
        cur_name = target;
    }
    cur
}

fn rename_raw(raw: Raw, old: &Name, new: &Name) -> Raw {
    match raw {
        Raw::Done(d) => Raw::Done(d),
        Raw::Node(shape, ps) => {
            let shape = match shape {
                Shape::Ax(x, a) if &x == old => Shape::Ax(new.clone(), a),
                Shape::W(x, a) if &x == old => Shape::W(new.clone(), a),
                Shape::M(vars, t) => {
                    let vars = vars.into_iter().map(|v| if &v == old { new.clone() } else { v }).collect();
                    let t = if &t == old { new.clone() } else { t };
                    Shape::M(vars, t)
                }
                other => other,
            };
            Raw::Node(shape, ps.into_iter().map(|p| rename_raw(p, old, new)).collect())
        }
    }
}

fn merge_uses(into: &mut BTreeMap<usize, Vec<Use>>, from: BTreeMap<usize, Vec<Use>>) {
    for (k, v) in from {
        into.entry(k).or_default().extend(v);
    }
}

impl Elaborator {
    pub fn new() -> Elaborator {
        Elaborator::default()
    }

    /// Registers a closed derivation under `name`; `ATerm::Global(name)`
    /// then stands for its subject.
    pub fn define(&mut self, name: &str, d: Derivation) {
        assert!(d.ctx.is_empty(), "definitions must be closed");
        let mut tv = BTreeSet::new();
        d.for_each_node(&mut |n| n.ty.all_vars(&mut tv));
        self.rigid.extend(tv);
        self.globals.insert(name.to_string(), d);
    }

    pub fn global(&self, name: &str) -> Option<&Derivation> {
        self.globals.get(name)
    }

    /// Builds a closed derivation of `t : ty`.
    pub fn check_closed(&mut self, t: &ATerm, ty: &Type) -> Result<Derivation, ElabError> {
        self.check_open(&[], t, ty)
    }

    /// Builds a derivation of `ctx ⊢ t : ty`; every assumption of `ctx` appears
    /// in the conclusion.
    pub fn check_open(&mut self, ctx: &[(&str, Type)], t: &ATerm, ty: &Type) -> Result<Derivation, ElabError> {
        self.metas.clear();
        ty.all_vars(&mut self.rigid);
        let mut env = Vec::new();
        for (x, a) in ctx {
            a.all_vars(&mut self.rigid);
            let (k, core) = a.strip_bangs();
            let b = self.bind(x, core.clone(), Some(k));
            env.push(b);
        }
        let e = self.check(&mut env, t, ty)?;
        let mut raw = e.raw;
        let mut uses = e.uses;
        for b in env.iter().rev() {
            raw = self.close(raw, &mut uses, b, &name(&b.src))?.0;
        }
        self.finish(raw)
    }

    /// Infers a type for a closed term and returns its derivation.
    pub fn infer_closed(&mut self, t: &ATerm) -> Result<Derivation, ElabError> {
        self.metas.clear();
        let mut env = Vec::new();
        let (e, _) = self.synth(&mut env, t)?;
        self.finish(e.raw)
    }

    fn finish(&mut self, raw: Raw) -> Result<Derivation, ElabError> {
        fn go(el: &Elaborator, raw: Raw) -> Result<Derivation, TypeError> {
            match raw {
                Raw::Done(d) => Ok(d),
                Raw::Node(shape, ps) => {
                    let ps = ps.into_iter().map(|p| go(el, p)).collect::<Result<Vec<_>, _>>()?;
                    let shape = match shape {
                        Shape::Ax(x, a) => Shape::Ax(x, el.zonk_final(&a)),
                        Shape::W(x, a) => Shape::W(x, el.zonk_final(&a)),
                        Shape::ForallE(a) => Shape::ForallE(el.zonk_final(&a)),
                        other => other,
                    };
                    Derivation::apply(shape, ps)
                }
            }
        }
        Ok(go(self, raw)?)
    }

    fn bind(&mut self, src: &str, core: Type, bangs: Option<usize>) -> Binding {
        self.next_id += 1;
        Binding {
            id: self.next_id,
            src: src.to_string(),
            core,
            bangs,
        }
    }

    fn copy_name(&mut self, src: &str) -> Name {
        self.next_copy += 1;
        name(&format!("{}#c{}", crate::syntax::base_name(src), self.next_copy))
    }

    fn new_meta(&mut self, linear: bool) -> Type {
        self.metas.push(Meta { sol: None, linear });
        Type::var(&format!("?{}", self.metas.len() - 1))
    }

    fn shallow(&self, t: &Type) -> Type {
        let mut cur = t.clone();
        while let Some(i) = meta_index(&cur) {
            match &self.metas[i].sol {
                Some(s) => cur = s.clone(),
                None => break,
            }
        }
        cur
    }

    fn zonk(&self, t: &Type) -> Type {
        let mut cur = t.clone();
        loop {
            let metas: Vec<usize> = cur
                .free_type_vars()
                .iter()
                .filter_map(|a| meta_index(&Type::Var(a.clone())))
                .filter(|i| self.metas[*i].sol.is_some())
                .collect();
            if metas.is_empty() {
                return cur;
            }
            for i in metas {
                let sol = self.metas[i].sol.clone().unwrap();
                cur = cur.subst(&format!("?{i}"), &sol);
            }
        }
    }

    fn zonk_final(&self, t: &Type) -> Type {
        let z = self.zonk(t);
        let open: Vec<Name> = z
            .free_type_vars()
            .into_iter()
            .filter(|a| a.starts_with('?'))
            .collect();
        open.iter().fold(z, |acc, m| acc.subst(m, &Type::Bool))
    }

    fn unify(&mut self, a: &Type, b: &Type) -> Result<(), ElabError> {
        let a = self.shallow(a);
        let b = self.shallow(b);
        let mismatch = |el: &Elaborator| ElabError::Mismatch(el.zonk(&a).to_string(), el.zonk(&b).to_string());
        match (meta_index(&a), meta_index(&b)) {
            (Some(i), Some(j)) if i == j => return Ok(()),
            (Some(i), Some(j)) => {
                let (from, to) = if self.metas[i].linear && !self.metas[j].linear { (j, i) } else { (i, j) };
                self.metas[from].sol = Some(Type::var(&format!("?{to}")));
                return Ok(());
            }
            (Some(i), None) => return self.solve(i, &b),
            (None, Some(j)) => return self.solve(j, &a),
            _ => {}
        }
        match (&a, &b) {
            (Type::Bool, Type::Bool) => Ok(()),
            (Type::Var(x), Type::Var(y)) if x == y => Ok(()),
            (Type::Lolli(a1, b1), Type::Lolli(a2, b2)) => {
                self.unify(a1, a2)?;
                self.unify(b1, b2)
            }
            (Type::Bang(a1), Type::Bang(a2)) => self.unify(a1, a2),
            (Type::Forall(x, a1), Type::Forall(y, a2)) => {
                let r = self.fresh_rigid(x);
                let rt = Type::Var(r);
                let l = a1.subst(x, &rt);
                let rr = a2.subst(y, &rt);
                self.unify(&l, &rr)
            }
            _ => Err(mismatch(self)),
        }
    }

    fn solve(&mut self, i: usize, t: &Type) -> Result<(), ElabError> {
        let z = self.zonk(t);
        if z.has_free_var(&format!("?{i}")) {
            return Err(ElabError::Mismatch(format!("?{i}"), z.to_string()));
        }
        if self.metas[i].linear && !z.is_linear() {
            return Err(ElabError::Mismatch("a linear type".into(), z.to_string()));
        }
        self.metas[i].sol = Some(z);
        Ok(())
    }

    fn fresh_rigid(&mut self, base: &str) -> Name {
        let a = fresh_tyvar(base, &self.rigid);
        self.rigid.insert(a.clone());
        a
    }

    fn env_ftv(&self, env: &[Binding]) -> BTreeSet<Name> {
        let mut out = BTreeSet::new();
        for b in env {
            out.extend(self.zonk(&b.core).free_type_vars());
        }
        out
    }

    fn check(&mut self, env: &mut Vec<Binding>, t: &ATerm, exp: &Type) -> Result<Elab, ElabError> {
        let exp = self.shallow(exp);
        match &exp {
            Type::Bang(inner) => {
                let mut e = self.check(env, t, inner)?;
                e.raw = Raw::Node(Shape::Sp, vec![e.raw]);
                for us in e.uses.values_mut() {
                    for u in us {
                        u.bangs += 1;
                    }
                }
                return Ok(e);
            }
            Type::Forall(a, body) => {
                let taken = self.env_ftv(env);
                let (a2, body2) = if taken.contains(a) || a.starts_with('?') {
                    let a2 = self.fresh_rigid(a);
                    let b2 = body.subst(a, &Type::Var(a2.clone()));
                    (a2, b2)
                } else {
                    self.rigid.insert(a.clone());
                    (a.clone(), (**body).clone())
                };
                let mut e = self.check(env, t, &body2)?;
                e.raw = Raw::Node(Shape::ForallI(a2), vec![e.raw]);
                return Ok(e);
            }
            _ => {}
        }
        match t {
            ATerm::Lam(x, ann, body) => {
                let Type::Lolli(sigma, a) = &exp else {
                    let (e, ty) = self.synth(env, t)?;
                    return self.subsume(e, ty, &exp);
                };
                if let Some(ann) = ann {
                    self.unify(ann, sigma)?;
                }
                let sz = self.shallow(sigma);
                let (bangs, core) = if meta_index(&sz).is_some() {
                    (None, self.new_meta(true))
                } else {
                    let (k, c) = sz.strip_bangs();
                    (Some(k), c.clone())
                };
                let b = self.bind(x, core, bangs);
                env.push(b.clone());
                let e = self.check(env, body, a);
                env.pop();
                let mut e = e?;
                let (raw, ty) = self.close(e.raw, &mut e.uses, &b, &name(x))?;
                if bangs.is_none() {
                    self.unify(sigma, &ty)?;
                }
                Ok(Elab {
                    raw: Raw::Node(Shape::LolliI(name(x)), vec![raw]),
                    uses: e.uses,
                })
            }
            ATerm::If(c, a, b) => {
                let ec = self.check(env, c, &Type::Bool)?;
                let ea = self.check(env, a, &exp)?;
                let eb = self.check(env, b, &exp)?;
                Ok(self.additive(ec, ea, eb))
            }
            ATerm::App(..) => self.synth_app(env, t, Some(&exp)).map(|(e, _)| e),
            _ => {
                let (e, ty) = self.synth(env, t)?;
                self.subsume(e, ty, &exp)
            }
        }
    }

    fn instantiate(&mut self, mut raw: Raw, ty: Type) -> (Raw, Type) {
        let mut ty = self.shallow(&ty);
        while let Type::Forall(a, body) = ty {
            let m = self.new_meta(true);
            ty = self.shallow(&body.subst(&a, &m));
            raw = Raw::Node(Shape::ForallE(m), vec![raw]);
        }
        (raw, ty)
    }

    fn subsume(&mut self, e: Elab, ty: Type, exp: &Type) -> Result<Elab, ElabError> {
        let (raw, ty) = self.instantiate(e.raw, ty);
        self.unify(&ty, exp)?;
        Ok(Elab { raw, uses: e.uses })
    }

    fn synth(&mut self, env: &mut Vec<Binding>, t: &ATerm) -> Result<(Elab, Type), ElabError> {
        match t {
            ATerm::Var(x) => {
                let b = env
                    .iter()
                    .rev()
                    .find(|b| &b.src == x)
                    .cloned()
                    .ok_or_else(|| ElabError::Unbound(x.clone()))?;
                let copy = self.copy_name(x);
                let mut uses = BTreeMap::new();
                uses.insert(
                    b.id,
                    vec![Use {
                        name: copy.clone(),
                        bangs: 0,
                        core: b.core.clone(),
                    }],
                );
                Ok((
                    Elab {
                        raw: Raw::Node(Shape::Ax(copy, b.core.clone()), vec![]),
                        uses,
                    },
                    b.core,
                ))
            }
            ATerm::Global(g) => {
                let d = self
                    .globals
                    .get(g)
                    .cloned()
                    .ok_or_else(|| ElabError::UnknownGlobal(g.clone()))?;
                let ty = d.ty.clone();
                Ok((
                    Elab {
                        raw: Raw::Done(d),
                        uses: BTreeMap::new(),
                    },
                    ty,
                ))
            }
            ATerm::Zero => Ok((
                Elab {
                    raw: Raw::Node(Shape::B0, vec![]),
                    uses: BTreeMap::new(),
                },
                Type::Bool,
            )),
            ATerm::One => Ok((
                Elab {
                    raw: Raw::Node(Shape::B1, vec![]),
                    uses: BTreeMap::new(),
                },
                Type::Bool,
            )),
            ATerm::Lam(x, ann, body) => {
                let (bangs, core) = match ann {
                    Some(a) => {
                        let (k, c) = a.strip_bangs();
                        (Some(k), c.clone())
                    }
                    None => (None, self.new_meta(true)),
                };
                let b = self.bind(x, core, bangs);
                env.push(b.clone());
                let r = self.synth(env, body);
                env.pop();
                let (mut e, a) = r?;
                let (raw, ty) = self.close(e.raw, &mut e.uses, &b, &name(x))?;
                Ok((
                    Elab {
                        raw: Raw::Node(Shape::LolliI(name(x)), vec![raw]),
                        uses: e.uses,
                    },
                    Type::lolli(ty, a),
                ))
            }
            ATerm::App(..) => self.synth_app(env, t, None),
            ATerm::If(c, a, b) => {
                let ec = self.check(env, c, &Type::Bool)?;
                let (ea, ty) = self.synth(env, a)?;
                let (raw, ty) = self.instantiate(ea.raw, ty);
                let ea = Elab { raw, uses: ea.uses };
                let eb = self.check(env, b, &ty)?;
                Ok((self.additive(ec, ea, eb), ty))
            }
            ATerm::Ann(m, ty) => {
                let e = self.check(env, m, ty)?;
                Ok((e, ty.clone()))
            }
        }
    }

    fn synth_app(&mut self, env: &mut Vec<Binding>, t: &ATerm, exp: Option<&Type>) -> Result<(Elab, Type), ElabError> {
        let mut args = Vec::new();
        let mut head = t;
        while let ATerm::App(m, n) = head {
            args.push(&**n);
            head = m;
        }
        args.reverse();
        let (he, hty) = self.synth(env, head)?;
        let mut ops = Vec::new();
        let mut done: Vec<Option<Elab>> = args.iter().map(|_| None).collect();
        let mut cur = hty;
        for i in 0..args.len() {
            loop {
                cur = self.shallow(&cur);
                match cur.clone() {
                    Type::Forall(a, body) => {
                        let m = self.new_meta(true);
                        cur = body.subst(&a, &m);
                        ops.push(Op::Inst(m));
                    }
                    Type::Lolli(sigma, r) => {
                        ops.push(Op::Arg(i, (*sigma).clone()));
                        cur = (*r).clone();
                        break;
                    }
                    other if meta_index(&other).is_some() => {
                        // earlier arguments may determine the type
                        if self.flush_args(env, &args, &ops, &mut done)? {
                            continue;
                        }
                        let d = self.new_meta(false);
                        let r = self.new_meta(true);
                        self.unify(&other, &Type::lolli(d, r))?;
                    }
                    other => {
                        return Err(ElabError::NotAFunction(
                            format!("{head:?}"),
                            self.zonk(&other).to_string(),
                        ))
                    }
                }
            }
        }
        if let Some(exp) = exp {
            loop {
                cur = self.shallow(&cur);
                if let Type::Forall(a, body) = cur.clone() {
                    let m = self.new_meta(true);
                    cur = body.subst(&a, &m);
                    ops.push(Op::Inst(m));
                } else {
                    break;
                }
            }
            self.unify(&cur, exp)?;
        }
        self.flush_args(env, &args, &ops, &mut done)?;
        let mut raw = he.raw;
        let mut uses = he.uses;
        for op in ops {
            match op {
                Op::Inst(m) => raw = Raw::Node(Shape::ForallE(m), vec![raw]),
                Op::Arg(i, _) => {
                    let e = done[i].take().unwrap();
                    merge_uses(&mut uses, e.uses);
                    raw = Raw::Node(Shape::LolliE, vec![raw, e.raw]);
                }
            }
        }
        Ok((Elab { raw, uses }, cur))
    }

    /// Elaborates the arguments whose parameter types are known so far and
    /// that are not done yet. Returns whether any was elaborated.
    fn flush_args(
        &mut self,
        env: &mut Vec<Binding>,
        args: &[&ATerm],
        ops: &[Op],
        done: &mut [Option<Elab>],
    ) -> Result<bool, ElabError> {
        let mut any = false;
        for op in ops {
            let Op::Arg(i, sigma) = op else { continue };
            if done[*i].is_some() {
                continue;
            }
            let sz = self.shallow(sigma);
            let e = if meta_index(&sz).is_some() {
                let (e, aty) = self.synth(env, args[*i])?;
                let (raw, aty) = self.instantiate(e.raw, aty);
                self.unify(&sz, &aty)?;
                Elab { raw, uses: e.uses }
            } else {
                self.check(env, args[*i], &sz)?
            };
            done[*i] = Some(e);
            any = true;
        }
        Ok(any)
    }

    /// Puts the variable bound by `b` into the context under the name `x`,
    /// lifting and merging its copies. Returns the derivation and its type.
    fn close(
        &mut self,
        raw: Raw,
        uses: &mut BTreeMap<usize, Vec<Use>>,
        b: &Binding,
        x: &Name,
    ) -> Result<(Raw, Type), ElabError> {
        let us = uses.remove(&b.id).unwrap_or_default();
        let n = us.len();
        let k = match b.bangs {
            Some(k) => k,
            None => match n {
                0 => 0,
                1 => us[0].bangs,
                _ => us.iter().map(|u| u.bangs).max().unwrap() + 1,
            },
        };
        let ty = Type::bangs(k, b.core.clone());
        let mut next = self.next_copy;
        let mut fresh = |base: &Name| {
            next += 1;
            name(&format!("{}#c{}", crate::syntax::base_name(base), next))
        };
        let raw = match n {
            0 => weaken_raw(raw, x, k, &b.core, &mut fresh),
            1 => {
                let u = &us[0];
                if u.bangs > k {
                    return Err(ElabError::Usage(
                        b.src.clone(),
                        format!("used under {} boxes but has type {}", u.bangs, self.zonk(&ty)),
                    ));
                }
                let r = lift_raw(raw, &u.name, k - u.bangs, &mut fresh);
                rename_raw(r, &u.name, x)
            }
            _ => {
                if k == 0 {
                    return Err(ElabError::Usage(
                        b.src.clone(),
                        format!("linear type {} but used {n} times", self.zonk(&ty)),
                    ));
                }
                let mut r = raw;
                for u in &us {
                    if u.bangs > k - 1 {
                        return Err(ElabError::Usage(
                            b.src.clone(),
                            format!("used under {} boxes but has type {}", u.bangs, self.zonk(&ty)),
                        ));
                    }
                    r = lift_raw(r, &u.name, k - 1 - u.bangs, &mut fresh);
                }
                Raw::Node(Shape::M(us.iter().map(|u| u.name.clone()).collect(), x.clone()), vec![r])
            }
        };
        self.next_copy = next;
        Ok((raw, ty))
    }

    /// Aligns the assumptions of the three premises of a conditional.
    fn additive(&mut self, ec: Elab, ea: Elab, eb: Elab) -> Elab {
        let mut raws = [ec.raw, ea.raw, eb.raw];
        let all = [ec.uses, ea.uses, eb.uses];
        let ids: BTreeSet<usize> = all.iter().flat_map(|u| u.keys().copied()).collect();
        let mut out = BTreeMap::new();
        let mut next = self.next_copy;
        let mut fresh = |base: &Name| {
            next += 1;
            name(&format!("{}#c{}", crate::syntax::base_name(base), next))
        };
        for id in ids {
            let lists: Vec<&[Use]> = all
                .iter()
                .map(|u| u.get(&id).map(|v| v.as_slice()).unwrap_or(&[]))
                .collect();
            let slots = lists.iter().map(|l| l.len()).max().unwrap();
            let sample = lists.iter().find_map(|l| l.first()).unwrap().clone();
            let mut merged = Vec::new();
            for j in 0..slots {
                let top = lists.iter().filter_map(|l| l.get(j)).map(|u| u.bangs).max().unwrap();
                let shared = fresh(&sample.name);
                for p in 0..3 {
                    let r = std::mem::replace(&mut raws[p], Raw::Node(Shape::B0, vec![]));
                    raws[p] = match lists[p].get(j) {
                        Some(u) => rename_raw(lift_raw(r, &u.name, top - u.bangs, &mut fresh), &u.name, &shared),
                        None => weaken_raw(r, &shared, top, &sample.core, &mut fresh),
                    };
                }
                merged.push(Use {
                    name: shared,
                    bangs: top,
                    core: sample.core.clone(),
                });
            }
            out.insert(id, merged);
        }
        self.next_copy = next;
        let [c, a, b] = raws;
        Elab {
            raw: Raw::Node(Shape::BE, vec![c, a, b]),
            uses: out,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::syntax::parse_term;
    use crate::types::parse_type;

    fn infer(s: &str) -> Derivation {
        let t = ATerm::from_term(&parse_term(s).unwrap());
        let d = Elaborator::new().infer_closed(&t).unwrap();
        d.validate().unwrap();
        d
    }

    #[test]
    fn doubling_program() {
        let d = infer(r"(\f. \z. f (f z)) (\x. if x then x else x) 0");
        assert_eq!(d.ty, Type::Bool);
        assert_eq!(d.degree(), 1);
        assert_eq!(d.rank(), 2);
        assert!(d.term.alpha_eq(&parse_term(r"(\f. \z. f (f z)) (\x. if x then x else x) 0").unwrap()));
    }

    #[test]
    fn church_numeral_against_its_type() {
        let t = ATerm::from_term(&parse_term(r"\s. \z. s (s (s z))").unwrap());
        let ty = parse_type("forall a. !(a -> a) -> a -> a").unwrap();
        let d = Elaborator::new().check_closed(&t, &ty).unwrap();
        d.validate().unwrap();
        assert_eq!(d.degree(), 0);
        let ty2 = parse_type("forall a. !!(a -> a) -> a -> a").unwrap();
        let d2 = Elaborator::new().check_closed(&t, &ty2).unwrap();
        d2.validate().unwrap();
        assert_eq!(d2.degree(), 0);
    }

    #[test]
    fn linear_variable_used_twice_is_rejected() {
        let t = ATerm::from_term(&parse_term(r"\f. \x. f x x").unwrap());
        let ty = parse_type("(B -> B -> B) -> B -> B").unwrap();
        assert!(Elaborator::new().check_closed(&t, &ty).is_err());
    }

    #[test]
    fn branches_share_assumptions() {
        let t = ATerm::from_term(&parse_term(r"\x. \y. if x then y else y").unwrap());
        let ty = parse_type("B -> B -> B").unwrap();
        let d = Elaborator::new().check_closed(&t, &ty).unwrap();
        d.validate().unwrap();
    }

    #[test]
    fn open_context() {
        let t = ATerm::from_term(&parse_term("f (f z)").unwrap());
        let d = Elaborator::new()
            .check_open(&[("f", parse_type("!(B -> B)").unwrap()), ("z", Type::Bool)], &t, &Type::Bool)
            .unwrap();
        d.validate().unwrap();
        assert_eq!(d.ctx.len(), 2);
    }
}

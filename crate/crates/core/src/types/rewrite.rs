//! Structural operations on derivations: renaming, weakening and
//! strengthening, the generation rewrites, substitution of a derivation for
//! an assumption, and subject reduction.

use super::derivation::{bad, Context, Derivation, Rule, Shape, TypeError};
use super::ty::{fresh_tyvar, Type};
use crate::syntax::{name, step, Name, RedexPosition, Selector, TermKind};
use std::collections::{BTreeSet, HashSet};

/// Supplies names that occur nowhere in the derivations it was built from.
#[derive(Debug, Clone, Default)]
pub struct NameSupply {
    used: HashSet<Name>,
    tyvars: BTreeSet<Name>,
    next: u64,
}

impl NameSupply {
    pub fn for_derivations<'a>(ds: impl IntoIterator<Item = &'a Derivation>) -> NameSupply {
        let mut s = NameSupply::default();
        for d in ds {
            s.absorb(d);
        }
        s
    }

    pub fn absorb(&mut self, d: &Derivation) {
        d.term.all_names(&mut self.used);
        d.for_each_node(&mut |n| {
            for (x, t) in &n.ctx {
                self.used.insert(x.clone());
                t.all_vars(&mut self.tyvars);
            }
            n.ty.all_vars(&mut self.tyvars);
            match n.shape() {
                Shape::LolliI(x) | Shape::Ax(x, _) => {
                    self.used.insert(x);
                }
                Shape::W(x, t) => {
                    self.used.insert(x);
                    t.all_vars(&mut self.tyvars);
                }
                Shape::M(vars, target) => {
                    self.used.extend(vars);
                    self.used.insert(target);
                }
                Shape::ForallE(a) => a.all_vars(&mut self.tyvars),
                _ => {}
            }
        });
    }

    pub fn fresh(&mut self, base: &str) -> Name {
        let stem = crate::syntax::base_name(base);
        loop {
            self.next += 1;
            let n = name(&format!("{stem}#s{}", self.next));
            if self.used.insert(n.clone()) {
                return n;
            }
        }
    }

    pub fn fresh_tyvar(&mut self, base: &str) -> Name {
        let a = fresh_tyvar(base, &self.tyvars);
        self.tyvars.insert(a.clone());
        a
    }

    pub fn reserve_tyvars(&mut self, t: &Type) {
        t.all_vars(&mut self.tyvars);
    }
}

fn rebuild_with(d: &Derivation, shape: Shape, premises: Vec<Derivation>) -> Result<Derivation, TypeError> {
    let _ = d;
    Derivation::apply(shape, premises)
}

/// Renames the free variable `old` to `new`. `new` must not occur in `d`.
pub fn rename_var(d: &Derivation, old: &Name, new: &Name) -> Result<Derivation, TypeError> {
    if !d.ctx.contains_key(old) {
        return Ok(d.clone());
    }
    match d.shape() {
        Shape::Ax(x, a) if &x == old => Derivation::ax_n(new.clone(), a),
        Shape::W(x, a) if &x == old => d.premises[0].clone().weaken(new.clone(), a),
        Shape::M(vars, target) if &target == old => d.premises[0].clone().merge(vars, new.clone()),
        shape => {
            let ps = d
                .premises
                .iter()
                .map(|p| rename_var(p, old, new))
                .collect::<Result<Vec<_>, _>>()?;
            rebuild_with(d, shape, ps)
        }
    }
}

/// Weakens by `x : t` for any type `t`: a banged type is reached by weakening
/// with its linear core and then merging single variables.
pub fn weaken_any(d: Derivation, x: &Name, t: &Type, supply: &mut NameSupply) -> Result<Derivation, TypeError> {
    let (k, core) = t.strip_bangs();
    if k == 0 {
        return d.weaken(x.clone(), core.clone());
    }
    let mut cur_name = supply.fresh(x);
    let mut cur = d.weaken(cur_name.clone(), core.clone())?;
    for i in 0..k {
        let target = if i + 1 == k { x.clone() } else { supply.fresh(x) };
        cur = cur.merge(vec![cur_name], target.clone())?;
        cur_name = target;
    }
    Ok(cur)
}

/// Weakens by every assumption of `extra` missing from `d`'s context.
pub fn weaken_all(d: Derivation, extra: &Context, supply: &mut NameSupply) -> Result<Derivation, TypeError> {
    let mut cur = d;
    for (x, t) in extra {
        if !cur.ctx.contains_key(x) {
            cur = weaken_any(cur, x, t, supply)?;
        }
    }
    Ok(cur)
}

/// Adds `j` bangs to the type of the free variable `x`, using `m` with a
/// single variable where the variable is introduced.
pub fn lift_var(d: &Derivation, x: &Name, j: usize, supply: &mut NameSupply) -> Result<Derivation, TypeError> {
    if j == 0 || !d.ctx.contains_key(x) {
        return Ok(d.clone());
    }
    match d.shape() {
        Shape::Ax(y, a) if &y == x => {
            let mut cur_name = supply.fresh(x);
            let mut cur = Derivation::ax_n(cur_name.clone(), a)?;
            for i in 0..j {
                let target = if i + 1 == j { x.clone() } else { supply.fresh(x) };
                cur = cur.merge(vec![cur_name], target.clone())?;
                cur_name = target;
            }
            Ok(cur)
        }
        Shape::W(y, a) if &y == x => {
            weaken_any(d.premises[0].clone(), x, &Type::bangs(j, a), supply)
        }
        Shape::M(vars, target) if &target == x => {
            let mut p = d.premises[0].clone();
            for v in &vars {
                p = lift_var(&p, v, j, supply)?;
            }
            p.merge(vars, target)
        }
        shape => {
            let ps = d
                .premises
                .iter()
                .map(|p| lift_var(p, x, j, supply))
                .collect::<Result<Vec<_>, _>>()?;
            Derivation::apply(shape, ps)
        }
    }
}

/// Removes an assumption that does not occur free in the subject.
pub fn strengthen(d: &Derivation, y: &Name) -> Result<Derivation, TypeError> {
    if !d.ctx.contains_key(y) {
        return Ok(d.clone());
    }
    if d.term.has_free(y) {
        return bad(format!("cannot strengthen {y}: it occurs in {}", d.term));
    }
    match d.shape() {
        Shape::W(x, _) if &x == y => Ok(d.premises[0].clone()),
        Shape::M(vars, target) if &target == y => {
            let mut p = d.premises[0].clone();
            for v in &vars {
                p = strengthen(&p, v)?;
            }
            Ok(p)
        }
        shape => {
            let ps = d
                .premises
                .iter()
                .map(|p| strengthen(p, y))
                .collect::<Result<Vec<_>, _>>()?;
            Derivation::apply(shape, ps)
        }
    }
}

/// Applies `f` to every type mentioned by the rule instances of `d`.
pub fn map_types(d: &Derivation, f: &mut impl FnMut(&Type) -> Type) -> Result<Derivation, TypeError> {
    let ps = d
        .premises
        .iter()
        .map(|p| map_types(p, f))
        .collect::<Result<Vec<_>, _>>()?;
    let shape = match d.shape() {
        Shape::Ax(x, a) => Shape::Ax(x, f(&a)),
        Shape::W(x, a) => Shape::W(x, f(&a)),
        Shape::ForallE(a) => Shape::ForallE(f(&a)),
        other => other,
    };
    Derivation::apply(shape, ps)
}

/// Renames every `∀I` binder in `avoid`, inside its own subtree.
pub fn freshen_forall_binders(
    d: &Derivation,
    avoid: &BTreeSet<Name>,
    supply: &mut NameSupply,
) -> Result<Derivation, TypeError> {
    let ps = d
        .premises
        .iter()
        .map(|p| freshen_forall_binders(p, avoid, supply))
        .collect::<Result<Vec<_>, _>>()?;
    match d.shape() {
        Shape::ForallI(a) if avoid.contains(&a) => {
            let b = supply.fresh_tyvar(&a);
            let bt = Type::Var(b.clone());
            let p = map_types(&ps[0], &mut |t| t.subst(&a, &bt))?;
            p.forall_i(b)
        }
        shape => Derivation::apply(shape, ps),
    }
}

/// Substitutes the linear type `a` for the type variable `alpha` throughout.
pub fn subst_tyvar(d: &Derivation, alpha: &Name, a: &Type, supply: &mut NameSupply) -> Result<Derivation, TypeError> {
    let mut avoid = a.free_type_vars();
    avoid.insert(alpha.clone());
    supply.reserve_tyvars(a);
    let d = freshen_forall_binders(d, &avoid, supply)?;
    map_types(&d, &mut |t| t.subst(alpha, a))
}

/// Generation for banged conclusions: from `Δ ⊢ N : !μ` computes a derivation
/// `Θ ⊢ N : μ` with `!Θ` contained in `Δ`.
pub fn generation_bang(d: &Derivation) -> Result<Derivation, TypeError> {
    match d.shape() {
        Shape::Sp => Ok(d.premises[0].clone()),
        Shape::W(..) => generation_bang(&d.premises[0]),
        Shape::M(vars, target) => {
            let core = generation_bang(&d.premises[0])?;
            let kept: Vec<Name> = vars.into_iter().filter(|v| core.ctx.contains_key(v)).collect();
            if kept.is_empty() {
                Ok(core)
            } else {
                core.merge(kept, target)
            }
        }
        _ => bad(format!("no generation for {} ending in ({})", d.ty, d.rule.tag())),
    }
}

/// Generation for abstractions: rewrites a derivation of an abstraction with
/// a linear type so that it ends with `⊸I` or `∀I`.
pub fn generation_lambda(d: &Derivation, supply: &mut NameSupply) -> Result<Derivation, TypeError> {
    match d.shape() {
        Shape::LolliI(_) | Shape::ForallI(_) => Ok(d.clone()),
        Shape::W(y, t) => {
            let top = generation_lambda(&d.premises[0], supply)?;
            push_below(top, supply, |p| p.weaken(y.clone(), t.clone()), &y, &t)
        }
        Shape::M(vars, target) => {
            let top = generation_lambda(&d.premises[0], supply)?;
            let sigma = d.ctx[&target].clone();
            push_below(top, supply, |p| p.merge(vars.clone(), target.clone()), &target, &sigma)
        }
        Shape::ForallE(a) => {
            let top = generation_lambda(&d.premises[0], supply)?;
            if top.rule != Rule::ForallI {
                return bad("instantiated abstraction does not end in (ForallI)");
            }
            let Type::Forall(alpha, _) = &top.ty else { unreachable!() };
            let inner = subst_tyvar(&top.premises[0], alpha, &a, supply)?;
            generation_lambda(&inner, supply)
        }
        _ => bad(format!("({}) cannot type an abstraction", d.rule.tag())),
    }
}

/// Moves a structural rule `f` (introducing `y : t`) above the last
/// introduction rule of `top`.
fn push_below(
    top: Derivation,
    supply: &mut NameSupply,
    f: impl Fn(Derivation) -> Result<Derivation, TypeError>,
    y: &Name,
    t: &Type,
) -> Result<Derivation, TypeError> {
    match top.shape() {
        Shape::LolliI(x) => {
            let mut p = top.premises[0].clone();
            let mut x = x;
            if &x == y {
                let x2 = supply.fresh(&x);
                p = rename_var(&p, &x, &x2)?;
                x = x2;
            }
            f(p)?.lolli_i(&x)
        }
        Shape::ForallI(alpha) => {
            let mut p = top.premises[0].clone();
            let mut alpha = alpha;
            if t.has_free_var(&alpha) {
                let b = supply.fresh_tyvar(&alpha);
                let bt = Type::Var(b.clone());
                p = map_types(&p, &mut |u| u.subst(&alpha, &bt))?;
                alpha = b;
            }
            f(p)?.forall_i(alpha)
        }
        _ => unreachable!("push_below on a non-introduction"),
    }
}

/// Renames the `⊸I` binders and `m` variables of `d` that are in `avoid`.
fn freshen_internal(d: &Derivation, avoid: &HashSet<Name>, supply: &mut NameSupply) -> Result<Derivation, TypeError> {
    let mut ps = d
        .premises
        .iter()
        .map(|p| freshen_internal(p, avoid, supply))
        .collect::<Result<Vec<_>, _>>()?;
    match d.shape() {
        Shape::LolliI(x) if avoid.contains(&x) => {
            let x2 = supply.fresh(&x);
            let p = rename_var(&ps[0], &x, &x2)?;
            p.lolli_i(&x2)
        }
        Shape::M(vars, target) if vars.iter().any(|v| avoid.contains(v)) => {
            let mut p = ps.pop().unwrap();
            let mut vars2 = Vec::new();
            for v in vars {
                if avoid.contains(&v) {
                    let v2 = supply.fresh(&v);
                    p = rename_var(&p, &v, &v2)?;
                    vars2.push(v2);
                } else {
                    vars2.push(v);
                }
            }
            p.merge(vars2, target)
        }
        shape => Derivation::apply(shape, ps),
    }
}

/// From `Γ, x:μ ⊢ M : τ` and `Δ ⊢ N : μ` with disjoint `Γ` and `Δ`, builds
/// `Γ, Δ ⊢ M[N/x] : τ`.
pub fn subst_derivation(main: &Derivation, x: &Name, arg: &Derivation) -> Result<Derivation, TypeError> {
    let mut supply = NameSupply::for_derivations([main, arg]);
    subst_with(main, x, arg, &mut supply)
}

fn subst_with(main: &Derivation, x: &Name, arg: &Derivation, supply: &mut NameSupply) -> Result<Derivation, TypeError> {
    let Some(mu) = main.ctx.get(x) else {
        return bad(format!("{x} is not in the context"));
    };
    if !mu.alpha_eq(&arg.ty) {
        return bad(format!("substituting {} for {x}:{mu}", arg.ty));
    }
    if let Some(y) = main.ctx.keys().find(|y| *y != x && arg.ctx.contains_key(*y)) {
        return bad(format!("contexts share {y}"));
    }
    let avoid: HashSet<Name> = arg.ctx.keys().cloned().chain(arg.term.free_vars()).collect();
    let main = freshen_internal(main, &avoid, supply)?;
    subst_go(&main, x, arg, supply)
}

fn subst_go(d: &Derivation, x: &Name, arg: &Derivation, supply: &mut NameSupply) -> Result<Derivation, TypeError> {
    match d.shape() {
        Shape::Ax(..) => Ok(arg.clone()),
        Shape::W(y, _) if &y == x => weaken_all(d.premises[0].clone(), &arg.ctx, supply),
        Shape::W(y, t) => subst_go(&d.premises[0], x, arg, supply)?.weaken(y, t),
        Shape::LolliI(y) => subst_go(&d.premises[0], x, arg, supply)?.lolli_i(&y),
        Shape::LolliE => {
            let (f, a) = (&d.premises[0], &d.premises[1]);
            if f.ctx.contains_key(x) {
                subst_go(f, x, arg, supply)?.lolli_e(a.clone())
            } else {
                f.clone().lolli_e(subst_go(a, x, arg, supply)?)
            }
        }
        Shape::BE => {
            let ps = d
                .premises
                .iter()
                .map(|p| subst_go(p, x, arg, supply))
                .collect::<Result<Vec<_>, _>>()?;
            Derivation::apply(Shape::BE, ps)
        }
        Shape::ForallI(alpha) => {
            let clash = arg.ctx.values().any(|t| t.has_free_var(&alpha));
            if clash {
                let b = supply.fresh_tyvar(&alpha);
                let bt = Type::Var(b.clone());
                let p = map_types(&d.premises[0], &mut |t| t.subst(&alpha, &bt))?;
                subst_go(&p, x, arg, supply)?.forall_i(b)
            } else {
                subst_go(&d.premises[0], x, arg, supply)?.forall_i(alpha)
            }
        }
        Shape::ForallE(a) => subst_go(&d.premises[0], x, arg, supply)?.forall_e(a),
        Shape::Sp => {
            let core = generation_bang(arg)?;
            let inner = subst_go(&d.premises[0], x, &core, supply)?;
            weaken_all(inner.sp(), &arg.ctx, supply)
        }
        Shape::M(vars, target) if &target != x => {
            subst_go(&d.premises[0], x, arg, supply)?.merge(vars, target)
        }
        Shape::M(vars, _) => {
            let core = generation_bang(arg)?;
            let theta: Vec<Name> = core.ctx.keys().cloned().collect();
            let mut cur = d.premises[0].clone();
            let mut copies: Vec<Vec<Name>> = vec![Vec::new(); theta.len()];
            for xi in &vars {
                let mut copy = core.clone();
                for (k, z) in theta.iter().enumerate() {
                    let z2 = supply.fresh(z);
                    copy = rename_var(&copy, z, &z2)?;
                    copies[k].push(z2);
                }
                cur = subst_with(&cur, xi, &copy, supply)?;
            }
            for (k, z) in theta.iter().enumerate() {
                cur = cur.merge(copies[k].clone(), z.clone())?;
            }
            weaken_all(cur, &arg.ctx, supply)
        }
        Shape::B0 | Shape::B1 => bad(format!("{x} cannot be in the context of a constant")),
    }
}

/// Rewrites a derivation of `M` into one of `step(M, at)` with the same
/// context and type.
pub fn subject_reduce(d: &Derivation, at: &RedexPosition) -> Result<Derivation, TypeError> {
    let expected = step(&d.term, at).map_err(|e| TypeError::Rule(e.to_string()))?;
    let mut supply = NameSupply::for_derivations([d]);
    let out = reduce_go(d, &at.0, &mut supply)?;
    if !out.term.alpha_eq(&expected) {
        return bad(format!("reduced subject {} differs from {}", out.term, expected));
    }
    Ok(out)
}

fn reduce_go(d: &Derivation, path: &[Selector], supply: &mut NameSupply) -> Result<Derivation, TypeError> {
    match d.rule {
        Rule::W | Rule::M | Rule::Sp | Rule::ForallI | Rule::ForallE => {
            let p = reduce_go(&d.premises[0], path, supply)?;
            return d.rebuild(vec![p]);
        }
        _ => {}
    }
    let Some((s, rest)) = path.split_first() else {
        return contract_root(d, supply);
    };
    let idx = match (d.rule, s) {
        (Rule::LolliI, Selector::Body) => 0,
        (Rule::LolliE, Selector::Fun) => 0,
        (Rule::LolliE, Selector::Arg) => 1,
        (Rule::BE, Selector::Test) => 0,
        (Rule::BE, Selector::Then) => 1,
        (Rule::BE, Selector::Else) => 2,
        _ => return bad(format!("path {s:?} does not match ({})", d.rule.tag())),
    };
    let mut ps = d.premises.clone();
    ps[idx] = reduce_go(&d.premises[idx], rest, supply)?;
    d.rebuild(ps)
}

fn contract_root(d: &Derivation, supply: &mut NameSupply) -> Result<Derivation, TypeError> {
    match d.rule {
        Rule::LolliE => {
            let f = generation_lambda(&d.premises[0], supply)?;
            let arg = &d.premises[1];
            let Shape::LolliI(mut y) = f.shape() else {
                return bad("function premise does not end in (LolliI)");
            };
            let mut body = f.premises[0].clone();
            if arg.ctx.contains_key(&y) {
                let y2 = supply.fresh(&y);
                body = rename_var(&body, &y, &y2)?;
                y = y2;
            }
            supply.absorb(arg);
            subst_with(&body, &y, arg, supply)
        }
        Rule::BE => {
            let TermKind::If(c, _, _) = d.term.kind() else { unreachable!() };
            match c.as_bool() {
                Some(true) => Ok(d.premises[1].clone()),
                Some(false) => Ok(d.premises[2].clone()),
                None => bad("conditional on a non-constant"),
            }
        }
        _ => bad(format!("no redex at a ({}) node", d.rule.tag())),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::types::parse_type;

    fn t(s: &str) -> Type {
        parse_type(s).unwrap()
    }

    fn n(s: &str) -> Name {
        name(s)
    }

    /// `f : !(B -> B), z : B |- f (f z) : B`
    fn twice_body() -> Derivation {
        let f1 = Derivation::ax("f1", t("B -> B")).unwrap();
        let f2 = Derivation::ax("f2", t("B -> B")).unwrap();
        let z = Derivation::ax("z", t("B")).unwrap();
        f1.lolli_e(f2.lolli_e(z).unwrap())
            .unwrap()
            .merge(vec![n("f1"), n("f2")], n("f"))
            .unwrap()
    }

    #[test]
    fn banged_weakening_goes_through_merge() {
        let mut s = NameSupply::default();
        let d = weaken_any(Derivation::b0(), &n("y"), &t("!!B"), &mut s).unwrap();
        d.validate().unwrap();
        assert_eq!(d.ctx[&n("y")], t("!!B"));
        assert_eq!(d.rule, Rule::M);
    }

    #[test]
    fn lifting_an_axiom() {
        let mut s = NameSupply::default();
        let d = lift_var(&Derivation::ax("x", t("B")).unwrap(), &n("x"), 2, &mut s).unwrap();
        d.validate().unwrap();
        assert_eq!(d.ctx[&n("x")], t("!!B"));
    }

    #[test]
    fn strengthening_removes_weakened_variable() {
        let d = Derivation::b0().weaken(n("y"), Type::Bool).unwrap().sp();
        let s = strengthen(&d, &n("y")).unwrap();
        s.validate().unwrap();
        assert!(s.ctx.is_empty());
    }

    #[test]
    fn substitution_into_merged_variable_copies_argument() {
        let id = Derivation::ax("x", Type::Bool)
            .unwrap()
            .lolli_i(&n("x"))
            .unwrap();
        let boxed = id.sp();
        let out = subst_derivation(&twice_body(), &n("f"), &boxed).unwrap();
        out.validate().unwrap();
        assert!(out.term.alpha_eq(&crate::syntax::parse_term(r"(\x. x) ((\x. x) z)").unwrap()));
        assert_eq!(out.ctx.len(), 1);
    }

    #[test]
    fn substitution_with_open_argument_merges_its_context() {
        let g = Derivation::ax("g", t("B -> B")).unwrap().sp();
        let out = subst_derivation(&twice_body(), &n("f"), &g).unwrap();
        out.validate().unwrap();
        assert_eq!(out.term.to_string(), "g (g z)");
        assert_eq!(out.ctx[&n("g")], t("!(B -> B)"));
        assert_eq!(out.rank(), 2);
    }

    #[test]
    fn subject_reduction_of_beta_redex() {
        let lam = twice_body().lolli_i(&n("z")).unwrap().lolli_i(&n("f")).unwrap();
        let id = Derivation::ax("x", Type::Bool).unwrap().lolli_i(&n("x")).unwrap().sp();
        let d = lam.lolli_e(id).unwrap().lolli_e(Derivation::b0()).unwrap();
        d.validate().unwrap();
        let r = d.rank() as u128;
        let mut cur = d;
        while let Some(p) = crate::syntax::leftmost_redex(&cur.term) {
            let next = subject_reduce(&cur, &p).unwrap();
            next.validate().unwrap();
            assert!(next.weight(r) < cur.weight(r));
            cur = next;
        }
        assert_eq!(cur.term.to_string(), "0");
    }

    #[test]
    fn generation_through_instantiation() {
        let id = Derivation::ax("x", t("a"))
            .unwrap()
            .lolli_i(&n("x"))
            .unwrap()
            .forall_i(n("a"))
            .unwrap()
            .forall_e(Type::Bool)
            .unwrap()
            .weaken(n("y"), Type::Bool)
            .unwrap();
        let mut s = NameSupply::for_derivations([&id]);
        let g = generation_lambda(&id, &mut s).unwrap();
        g.validate().unwrap();
        assert_eq!(g.rule, Rule::LolliI);
        assert_eq!(g.ty, t("B -> B"));
    }
}

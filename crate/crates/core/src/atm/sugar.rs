//! Builders for annotated terms, and the tensor sugar: tuples, `let`,
//! projections and composition all expand into plain terms.

use crate::types::{ATerm, Type};
use std::collections::BTreeSet;

pub fn v(x: &str) -> ATerm {
    ATerm::Var(x.to_string())
}

pub fn g(name: &str) -> ATerm {
    ATerm::Global(name.to_string())
}

pub fn zero() -> ATerm {
    ATerm::Zero
}

pub fn one() -> ATerm {
    ATerm::One
}

/// Tape symbol or truth value: bit 0 is the constant `0`.
pub fn bit(b: u8) -> ATerm {
    if b == 0 {
        ATerm::Zero
    } else {
        ATerm::One
    }
}

pub fn lam(x: &str, body: ATerm) -> ATerm {
    ATerm::Lam(x.to_string(), None, Box::new(body))
}

pub fn lam_t(x: &str, ty: Type, body: ATerm) -> ATerm {
    ATerm::Lam(x.to_string(), Some(ty), Box::new(body))
}

pub fn lams(xs: &[&str], body: ATerm) -> ATerm {
    xs.iter().rev().fold(body, |acc, x| lam(x, acc))
}

pub fn app(f: ATerm, args: impl IntoIterator<Item = ATerm>) -> ATerm {
    args.into_iter().fold(f, |acc, a| ATerm::App(Box::new(acc), Box::new(a)))
}

pub fn ite(c: ATerm, t: ATerm, e: ATerm) -> ATerm {
    ATerm::If(Box::new(c), Box::new(t), Box::new(e))
}

pub fn ann(t: ATerm, ty: Type) -> ATerm {
    ATerm::Ann(Box::new(t), ty)
}

fn avoiding(base: &str, items: &[&ATerm]) -> String {
    let mut fv = BTreeSet::new();
    for t in items {
        t.free_vars(&mut fv);
    }
    let mut x = base.to_string();
    while fv.contains(&x) {
        x.push('\'');
    }
    x
}

/// `⟨M1, …, Mn⟩ = λp. p M1 … Mn`.
pub fn tuple(items: Vec<ATerm>) -> ATerm {
    let refs: Vec<&ATerm> = items.iter().collect();
    let p = avoiding("p", &refs);
    lam(&p, app(v(&p), items))
}

/// `let M be x1, …, xn in N = M (λx1. … λxn. N)`.
pub fn let_in(m: ATerm, xs: &[&str], body: ATerm) -> ATerm {
    app(m, [lams(xs, body)])
}

/// The `i`-th of `n` components, counting from 0.
pub fn proj(m: ATerm, i: usize, n: usize) -> ATerm {
    let names: Vec<String> = (0..n).map(|k| format!("x{k}")).collect();
    let refs: Vec<&str> = names.iter().map(String::as_str).collect();
    app(m, [lams(&refs, v(&names[i]))])
}

pub fn pi1(m: ATerm) -> ATerm {
    proj(m, 0, 2)
}

pub fn pi2(m: ATerm) -> ATerm {
    proj(m, 1, 2)
}

/// `M1 ∘ … ∘ Mn = λz. M1 (… (Mn z))`.
pub fn comp(ms: Vec<ATerm>) -> ATerm {
    let refs: Vec<&ATerm> = ms.iter().collect();
    let z = avoiding("z", &refs);
    let body = ms.into_iter().rev().fold(v(&z), |acc, m| app(m, [acc]));
    lam(&z, body)
}

pub fn and_(m: ATerm, n: ATerm) -> ATerm {
    ite(m, ite(n, zero(), one()), one())
}

pub fn or_(m: ATerm, n: ATerm) -> ATerm {
    ite(m, zero(), ite(n, zero(), one()))
}

pub fn not_(m: ATerm) -> ATerm {
    ite(m, one(), zero())
}

/// `σ1 ⊗ … ⊗ σn = ∀β. (σ1 ⊸ … ⊸ σn ⊸ β) ⊸ β`.
pub fn tensor(tys: Vec<Type>) -> Type {
    let mut fv = BTreeSet::new();
    for t in &tys {
        fv.extend(t.free_type_vars());
    }
    let b = if fv.contains("b") {
        crate::types::fresh_tyvar("b", &fv)
    } else {
        crate::syntax::name("b")
    };
    let bv = Type::Var(b.clone());
    Type::forall_n(b, Type::lolli(Type::arrows(tys, bv.clone()), bv))
}

pub fn bools(n: usize) -> Type {
    tensor(vec![Type::Bool; n])
}

/// `N_i = ∀a. !^i(a ⊸ a) ⊸ a ⊸ a`.
pub fn nat(i: usize) -> Type {
    let a = Type::var("a");
    Type::forall(
        "a",
        Type::arrows(
            [Type::bangs(i, Type::lolli(a.clone(), a.clone())), a.clone()],
            a,
        ),
    )
}

/// `S_i = ∀a. !^i(B ⊸ a ⊸ a) ⊸ a ⊸ a`.
pub fn string(i: usize) -> Type {
    let a = Type::var("a");
    Type::forall(
        "a",
        Type::arrows(
            [
                Type::bangs(i, Type::arrows([Type::Bool, a.clone()], a.clone())),
                a.clone(),
            ],
            a,
        ),
    )
}

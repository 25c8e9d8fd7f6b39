//! Programs with derivations: the exponential family `M_n`, seeded random
//! well-typed programs, numeral arithmetic and applications of the machine
//! combinators.

use crate::atm::sugar::*;
use crate::atm::{alpha3, connectives, machines, string_aterm, AtmSpec, Combinators, Library, Poly};
use crate::machine::{eval_observed, run_small_observed};
use crate::syntax::{normalize, parse_term};
use crate::types::{ATerm, Derivation, Elaborator, Type};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::collections::HashSet;
use std::fmt::Write as _;

#[derive(Debug, Clone)]
pub struct Program {
    pub name: String,
    pub derivation: Derivation,
}

impl Program {
    fn new(name: impl Into<String>, derivation: Derivation) -> Program {
        Program { name: name.into(), derivation }
    }
}

/// Source of `M_n = (λf.λz. f^n z) (λx. if x then x else x) 0`.
pub fn m_n_source(n: usize) -> String {
    let mut body = "z".to_string();
    for _ in 0..n {
        body = format!("f ({body})");
    }
    format!(r"(\f. \z. {body}) (\x. if x then x else x) 0")
}

/// `M_n` with `f : !(B ⊸ B)`, so that the degree is 1 for every `n ≥ 1`.
pub fn m_n(n: usize) -> Derivation {
    let t = parse_term(&m_n_source(n)).unwrap();
    let ATerm::App(head, rest) = ATerm::from_term(&t) else { unreachable!() };
    let ATerm::App(f, id) = *head else { unreachable!() };
    let ATerm::Lam(x, _, body) = *f else { unreachable!() };
    let f = lam_t(&x, Type::bang(Type::lolli(Type::Bool, Type::Bool)), *body);
    let t = app(f, [*id, *rest]);
    Elaborator::new().check_closed(&t, &Type::Bool).unwrap()
}

#[derive(Debug, Clone, PartialEq, Eq)]
enum Simple {
    B,
    Arr(Box<Simple>, Box<Simple>),
}

impl Simple {
    fn arr(a: Simple, b: Simple) -> Simple {
        Simple::Arr(Box::new(a), Box::new(b))
    }

    /// Argument types and result of the spine.
    fn spine(&self) -> (Vec<&Simple>, &Simple) {
        let mut args = Vec::new();
        let mut t = self;
        while let Simple::Arr(a, b) = t {
            args.push(&**a);
            t = b;
        }
        (args, t)
    }
}

struct Gen {
    rng: ChaCha8Rng,
    next: usize,
}

impl Gen {
    fn small_type(&mut self) -> Simple {
        use Simple::B;
        let bb = Simple::arr(B, B);
        match self.rng.gen_range(0..6) {
            0 | 1 => B,
            2 | 3 => bb,
            4 => Simple::arr(B, Simple::arr(B, B)),
            _ => Simple::arr(bb.clone(), bb),
        }
    }

    fn fresh(&mut self) -> String {
        self.next += 1;
        format!("x{}", self.next)
    }

    fn term(&mut self, ty: &Simple, env: &mut Vec<(String, Simple)>, budget: isize) -> ATerm {
        if let Simple::Arr(a, b) = ty {
            // a variable of the right type or an abstraction
            let hits: Vec<String> = env.iter().filter(|(_, t)| t == ty).map(|(x, _)| x.clone()).collect();
            if !hits.is_empty() && (budget <= 2 || self.rng.gen_bool(0.3)) {
                return v(hits.choose(&mut self.rng).unwrap());
            }
            let x = self.fresh();
            env.push((x.clone(), (**a).clone()));
            let body = self.term(b, env, budget - 1);
            env.pop();
            return lam(&x, body);
        }
        let heads: Vec<(String, Simple)> = env
            .iter()
            .filter(|(_, t)| t.spine().1 == &Simple::B)
            .cloned()
            .collect();
        if budget <= 1 {
            let vars: Vec<&String> = heads.iter().filter(|(_, t)| *t == Simple::B).map(|(x, _)| x).collect();
            return match vars.choose(&mut self.rng) {
                Some(x) if self.rng.gen_bool(0.6) => v(x),
                _ => bit(self.rng.gen_range(0..2)),
            };
        }
        match self.rng.gen_range(0..10) {
            0 => bit(self.rng.gen_range(0..2)),
            1..=3 => {
                let c = self.term(&Simple::B, env, budget / 3);
                let t = self.term(&Simple::B, env, budget / 3);
                let e = self.term(&Simple::B, env, budget / 3);
                ite(c, t, e)
            }
            4..=6 if !heads.is_empty() => {
                let (h, t) = heads.choose(&mut self.rng).unwrap().clone();
                let args: Vec<Simple> = t.spine().0.into_iter().cloned().collect();
                let share = (budget - 1) / args.len().max(1) as isize;
                let args: Vec<ATerm> = args.iter().map(|a| self.term(a, env, share)).collect();
                app(v(&h), args)
            }
            _ => {
                // a redex (λx.M) N
                let s = self.small_type();
                let x = self.fresh();
                env.push((x.clone(), s.clone()));
                let body = self.term(&Simple::B, env, budget / 2);
                env.pop();
                let arg = self.term(&s, env, budget / 2);
                app(lam(&x, body), [arg])
            }
        }
    }
}

/// Configurations allowed per run when filtering generated programs.
pub const GENERATOR_FUEL: usize = 200_000;

/// `count` distinct closed programs of size at most `max_size`, each with a
/// validated derivation and a terminating run within [`GENERATOR_FUEL`].
pub fn random_programs(seed: u64, count: usize, max_size: usize) -> Vec<Program> {
    let mut g = Gen { rng: ChaCha8Rng::seed_from_u64(seed), next: 0 };
    let mut seen = HashSet::new();
    let mut out = Vec::new();
    let mut attempts = 0;
    while out.len() < count && attempts < 200 * count {
        attempts += 1;
        g.next = 0;
        let budget = g.rng.gen_range(3..=max_size as isize);
        let t = g.term(&Simple::B, &mut Vec::new(), budget);
        let Ok(d) = Elaborator::new().check_closed(&t, &Type::Bool) else {
            continue;
        };
        if d.term.size() > max_size || d.validate().is_err() || !seen.insert(d.term.to_string()) {
            continue;
        }
        if eval_observed(&d.term, GENERATOR_FUEL, &mut ()).is_err() {
            continue;
        }
        out.push(Program::new(format!("random-{seed}-{:03}", out.len()), d));
    }
    out
}

/// Parity, zero tests and sums of Church numerals, closed and of type `B`.
/// The expected boolean is paired with each program.
pub fn arithmetic_programs() -> Vec<(Program, bool)> {
    let mut lib = Library::new();
    let not = lib
        .def("not", &Type::lolli(Type::Bool, Type::Bool), |_| lam("a", not_(v("a"))))
        .unwrap();
    let mut out = Vec::new();
    let mut push = |lib: &mut Library, name: String, t: ATerm, want: bool| {
        let d = lib.check(&t, &Type::Bool).unwrap_or_else(|e| panic!("{name}: {e}"));
        out.push((Program::new(name, d), want));
    };
    // n not 0 is 0 exactly when n is even
    let even = |n: u64| n % 2 == 0;
    for n in 0..5 {
        let num = lib.numeral(n, 1).unwrap();
        push(&mut lib, format!("even-{n}"), app(num.clone(), [not.clone(), zero()]), even(n));
        let is_zero = app(num, [lam("x", one()), zero()]);
        push(&mut lib, format!("zero-{n}"), is_zero, n == 0);
    }
    for (a, b) in [(0, 1), (2, 3), (1, 1), (3, 4)] {
        let (na, nb) = (lib.numeral(a, 1).unwrap(), lib.numeral(b, 1).unwrap());
        let s = app(lib.add(1, 1).unwrap(), [na.clone(), nb.clone()]);
        push(&mut lib, format!("even-add-{a}-{b}"), app(s, [not.clone(), zero()]), even(a + b));
        let p = app(lib.mul(1, 1).unwrap(), [na.clone(), nb]);
        push(&mut lib, format!("even-mul-{a}-{b}"), app(p, [not.clone(), zero()]), even(a * b));
        let s = app(lib.suc(1).unwrap(), [na]);
        push(&mut lib, format!("even-suc-{a}"), app(s, [not.clone(), zero()]), even(a + 1));
    }
    for bits in [vec![], vec![1], vec![0, 1, 1]] {
        let n = app(lib.len(1).unwrap(), [string_aterm(&bits)]);
        let name = format!("even-len-{}", bits.len());
        push(&mut lib, name, app(n, [not.clone(), zero()]), even(bits.len() as u64));
    }
    for coeffs in [vec![0, 1], vec![1, 1], vec![0, 0, 1]] {
        let p = Poly::new(coeffs.clone());
        let pt = lib.poly(&p).unwrap();
        for n in 0..3 {
            let num = lib.numeral(n, 1).unwrap();
            let t = app(app(pt.clone(), [num]), [not.clone(), zero()]);
            let mut name = "even-poly".to_string();
            for c in &coeffs {
                write!(name, "-{c}").unwrap();
            }
            write!(name, "-at-{n}").unwrap();
            push(&mut lib, name, t, even(p.eval(n)));
        }
    }
    out
}

/// Connectives, the `α` combinator on boolean pairs, and the machine
/// combinators applied to encoded inputs.
pub fn combinator_programs() -> Vec<Program> {
    let mut out = Vec::new();
    let mut el = Elaborator::new();
    for (name, d) in connectives() {
        el.define(name, d);
    }
    el.define("alpha", alpha3());
    let mut push = |el: &mut Elaborator, name: String, t: ATerm| {
        let d = el.check_closed(&t, &Type::Bool).unwrap_or_else(|e| panic!("{name}: {e}"));
        out.push(Program::new(name, d));
    };
    for a in 0..2 {
        push(&mut el, format!("not-{a}"), app(g("not"), [bit(a)]));
        for b in 0..2 {
            push(&mut el, format!("and-{a}{b}"), app(g("and"), [bit(a), bit(b)]));
            push(&mut el, format!("or-{a}{b}"), app(g("or"), [bit(a), bit(b)]));
            push(&mut el, format!("pi1-{a}{b}"), pi1(tuple(vec![bit(a), bit(b)])));
            push(&mut el, format!("pi2-{a}{b}"), pi2(tuple(vec![bit(a), bit(b)])));
        }
    }
    let pair = |a: u8, b: u8| tuple(vec![bit(a), bit(b)]);
    for k in [(1, 0), (1, 1), (0, 1), (0, 0)] {
        for (m1, m2) in [((0, 0), (0, 1)), ((0, 1), (0, 1)), ((0, 0), (0, 0))] {
            let t = app(g("alpha"), [pair(k.0, k.1), pair(m1.0, m1.1), pair(m2.0, m2.1)]);
            let name = format!("alpha-{}{}-{}{}-{}{}", k.0, k.1, m1.0, m1.1, m2.0, m2.1);
            push(&mut el, format!("{name}-1"), pi1(t.clone()));
            push(&mut el, format!("{name}-2"), pi2(t));
        }
    }
    for (mname, spec) in [("contains-one", machines::contains_one()), ("zero-then-one", machines::zero_then_one())] {
        machine_programs(mname, &spec, &mut out);
    }
    out
}

fn machine_programs(mname: &str, spec: &AtmSpec, out: &mut Vec<Program>) {
    let mut c = Combinators::new(spec).unwrap();
    let lib = c.library();
    for input in [vec![], vec![1], vec![0, 1]] {
        let s = string_aterm(&input);
        let tag: String = input.iter().map(|b| char::from(b'0' + b)).collect();
        let init = app(g("Init"), [s]);
        let mut items = vec![
            ("ext-init", app(g("Ext"), [init.clone()])),
            ("kind1-init", pi1(app(g("Kind"), [init.clone()]))),
            ("base-init", pi2(app(g("Base"), [init.clone()]))),
        ];
        for j in 1..=2 {
            let tr = app(g(&format!("Tr{j}")), [init.clone()]);
            items.push((if j == 1 { "ext-tr1" } else { "ext-tr2" }, app(g("Ext"), [tr])));
        }
        items.push(("step-base", pi2(app(g("Step"), [g("Base"), init]))));
        for (what, t) in items {
            let name = format!("{mname}-{what}-{tag}");
            let d = lib.check(&t, &Type::Bool).unwrap_or_else(|e| panic!("{name}: {e}"));
            out.push(Program::new(name, d));
        }
    }
}

/// Agreement of the big-step machine, the small-step machine and leftmost
/// reduction. Returns the common result.
pub fn agree(p: &Program, fuel: usize) -> Result<bool, String> {
    let t = &p.derivation.term;
    let (b, _) = eval_observed(t, fuel, &mut ()).map_err(|e| format!("{}: big-step {e}", p.name))?;
    let (s, _) = run_small_observed(t, fuel, &mut |_, _| {}).map_err(|e| format!("{}: small-step {e}", p.name))?;
    let nf = normalize(t, fuel).map_err(|_| format!("{}: normalization ran out of fuel", p.name))?;
    match nf.as_bool() {
        Some(n) if n == b && s == b => Ok(b),
        _ => Err(format!("{}: big {b}, small {s}, normal form {nf}", p.name)),
    }
}

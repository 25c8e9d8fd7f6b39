//! Configurations of a machine as terms, the transition combinators, and the
//! clocked evaluator `eval_M : !^t S ⊸ B`.

use super::encode::{string_aterm, Library, Poly};
use super::oracle::MachineState;
use super::spec::{AtmSpec, Code, Kind, Move, SpecError};
use super::sugar::*;
use crate::syntax::{normalize, Term, TermKind};
use crate::types::{ATerm, Derivation, ElabError, Type};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CompileError {
    #[error(transparent)]
    Spec(#[from] SpecError),
    #[error("combinator {0} does not elaborate: {1}")]
    Elab(&'static str, ElabError),
}

fn strs(xs: &[String]) -> Vec<&str> {
    xs.iter().map(String::as_str).collect()
}

fn tape(a: &Type) -> Type {
    Type::lolli(a.clone(), a.clone())
}

fn writer(a: &Type) -> Type {
    Type::arrows([Type::Bool, a.clone()], a.clone())
}

fn a() -> Type {
    Type::var("a")
}

/// The combinators of one machine, elaborated once.
pub struct Combinators {
    pub spec: AtmSpec,
    lib: Library,
}

const NAMES: [&str; 12] = [
    "Init", "Dec", "Move_R", "Move_L", "Delta1", "Delta2", "Com1", "Com2", "Kind", "Ext", "Base", "Step",
];

impl Combinators {
    fn q(&self) -> usize {
        self.spec.q_bits
    }

    /// `(α⊸α) ⊗ (α⊸α) ⊗ B^{q+2}`.
    pub fn atm_body(&self, a: &Type) -> Type {
        let mut tys = vec![tape(a), tape(a)];
        tys.extend(vec![Type::Bool; self.q() + 2]);
        tensor(tys)
    }

    /// `ATM_1 = ∀α. !(B⊸α⊸α) ⊸ (α⊸α) ⊗ (α⊸α) ⊗ B^{q+2}`.
    pub fn atm_type(&self) -> Type {
        Type::forall("a", Type::lolli(Type::bang(writer(&a())), self.atm_body(&a())))
    }

    /// The decomposed configuration: both tape halves without their first
    /// cell, and each first cell with its writer.
    pub fn id_type(&self) -> Type {
        let a = a();
        let mut tys = vec![tape(&a), tape(&a), writer(&a), Type::Bool, writer(&a), Type::Bool];
        tys.extend(vec![Type::Bool; self.q() + 2]);
        Type::forall("a", Type::lolli(Type::bang(writer(&a)), tensor(tys)))
    }

    fn triple(a: &Type) -> Type {
        tensor(vec![tape(a), writer(a), Type::Bool])
    }

    fn five(a: &Type) -> Type {
        tensor(vec![tape(a), tape(a), writer(a), Type::Bool, writer(a)])
    }

    fn names(prefix: &str, n: usize) -> Vec<String> {
        (0..n).map(|i| format!("{prefix}{i}")).collect()
    }

    pub fn new(spec: &AtmSpec) -> Result<Combinators, CompileError> {
        spec.validate()?;
        let mut c = Combinators {
            spec: spec.clone(),
            lib: Library::new(),
        };
        c.define_all()?;
        Ok(c)
    }

    fn def(&mut self, name: &'static str, ty: Type, body: ATerm) -> Result<ATerm, CompileError> {
        self.lib.def(name, &ty, |_| body).map_err(|e| CompileError::Elab(name, e))
    }

    fn define_all(&mut self) -> Result<(), CompileError> {
        let q = self.q();
        let atm = self.atm_type();
        let b2 = bools(2);
        let qs = Self::names("q", q);
        let ns = Self::names("n", q);
        let qv: Vec<ATerm> = qs.iter().map(|x| v(x)).collect();
        let nv: Vec<ATerm> = ns.iter().map(|x| v(x)).collect();
        let id = || lam("z", v("z"));

        // Init t = λc.⟨I, λz. t c z, Q0, k0⟩
        let (k0, k1) = self.spec.kind(&self.spec.initial).bits();
        let mut items = vec![id(), lam("z", app(v("t"), [v("c"), v("z")]))];
        items.extend(self.spec.initial.iter().map(|&b| bit(b)));
        items.extend([bit(k0), bit(k1)]);
        self.def("Init", Type::lolli(string(1), atm.clone()), lams(&["t", "c"], tuple(items)))?;

        // Dec s = λc. let s F[c] be l,r,q,k in (fold l) (fold r)
        let f = lams(
            &["b", "z"],
            let_in(
                v("z"),
                &["g", "h", "i"],
                tuple(vec![comp(vec![app(v("h"), [v("i")]), v("g")]), v("c"), v("b")]),
            ),
        );
        let f = ann(f, Type::arrows([Type::Bool, Self::triple(&a())], Self::triple(&a())));
        let start = || tuple(vec![id(), lam("x", id()), zero()]);
        let mut out = vec![v("tl"), v("tr"), v("cl"), v("bl"), v("cr"), v("br")];
        out.extend(qv.clone());
        out.extend([v("k0"), v("k1")]);
        let inner = let_in(
            app(v("r"), [start()]),
            &["tr", "cr", "br"],
            tuple(out),
        );
        let mid = let_in(app(v("l"), [start()]), &["tl", "cl", "bl"], inner);
        let mut xs = vec!["l", "r"];
        xs.extend(strs(&qs));
        xs.extend(["k0", "k1"]);
        let dec = lams(&["s", "c"], let_in(app(v("s"), [f]), &xs, mid));
        self.def("Dec", Type::lolli(atm.clone(), self.id_type()), dec)?;

        // R and L take the action and the remaining configuration pieces.
        let mut params = vec!["w".to_string()];
        params.extend(ns.iter().cloned());
        params.extend(["kk0".into(), "kk1".into(), "s".into()]);
        let mut arg_tys = vec![Type::Bool; q + 3];
        arg_tys.push(Self::five(&a()));
        let move_ty = Type::forall("a", Type::arrows(arg_tys, self.atm_body(&a())));
        for (name, right) in [("Move_R", true), ("Move_L", false)] {
            let (l2, r2) = if right {
                (
                    comp(vec![app(v("cr"), [v("w")]), app(v("cl"), [v("bl")]), v("l")]),
                    v("r"),
                )
            } else {
                (
                    v("l"),
                    comp(vec![app(v("cl"), [v("bl")]), app(v("cr"), [v("w")]), v("r")]),
                )
            };
            let mut items = vec![l2, r2];
            items.extend(nv.clone());
            items.extend([v("kk0"), v("kk1")]);
            let body = let_in(v("s"), &["l", "r", "cl", "bl", "cr"], tuple(items));
            self.def(name, move_ty.clone(), lams(&strs(&params), body))?;
        }

        // δ_j as a decision tree over the scanned bit and the state bits
        for j in 0..2 {
            let mut ps = vec!["b".to_string()];
            ps.extend(qs.iter().cloned());
            let tree = self.decision_tree(j, None, &mut Vec::new());
            let ty = Type::arrows(vec![Type::Bool; q + 1], bools(q + 4));
            self.def(["Delta1", "Delta2"][j], ty, lams(&strs(&ps), tree))?;
        }

        // Com_j s = λc. let s c be … in let δ_j b_r q be w,n,kk,m in (if m then R else L) …
        for j in 0..2 {
            let mut rest = vec![v("w")];
            rest.extend(nv.clone());
            rest.extend([v("kk0"), v("kk1")]);
            rest.push(tuple(vec![v("l"), v("r"), v("cl"), v("bl"), v("cr")]));
            let moved = app(ite(v("mv"), g("Move_R"), g("Move_L")), rest);
            let mut ys = vec!["w"];
            ys.extend(strs(&ns));
            ys.extend(["kk0", "kk1", "mv"]);
            let mut dargs = vec![v("br")];
            dargs.extend(qv.clone());
            let inner = let_in(app(g(["Delta1", "Delta2"][j]), dargs), &ys, moved);
            let mut xs = vec!["l", "r", "cl", "bl", "cr", "br"];
            xs.extend(strs(&qs));
            xs.extend(["k0", "k1"]);
            let body = lams(&["s", "c"], let_in(app(v("s"), [v("c")]), &xs, inner));
            self.def(["Com1", "Com2"][j], Type::lolli(self.id_type(), atm.clone()), body)?;
        }
        for j in 0..2 {
            let body = lam("x", app(g(["Com1", "Com2"][j]), [app(g("Dec"), [v("x")])]));
            self.def(["Tr1", "Tr2"][j], Type::lolli(atm.clone(), atm.clone()), body)?;
        }

        // Kind c = let c (λb.λy.y) be l,r,q,k in ⟨k⟩
        let mut xs = vec!["l", "r"];
        xs.extend(strs(&qs));
        xs.extend(["k0", "k1"]);
        let kind = lam(
            "x",
            let_in(app(v("x"), [lams(&["b", "y"], v("y"))]), &xs, tuple(vec![v("k0"), v("k1")])),
        );
        self.def("Kind", Type::lolli(atm.clone(), b2.clone()), kind)?;
        let kc = || app(g("Kind"), [v("x")]);
        self.def("Ext", Type::lolli(atm.clone(), Type::Bool), lam("x", pi2(kc())))?;
        let base = ite(pi1(kc()), tuple(vec![one(), one()]), tuple(vec![one(), pi2(kc())]));
        self.def("Base", Type::lolli(atm.clone(), b2.clone()), lam("x", base))?;
        let step = alpha(
            kc(),
            app(v("h"), [app(g("Tr1"), [v("x")])]),
            app(v("h"), [app(g("Tr2"), [v("x")])]),
        );
        let step_ty = Type::arrows([Type::lolli(atm.clone(), b2.clone()), atm.clone()], b2);
        self.def("Step", step_ty, lams(&["h", "x"], step))?;
        Ok(())
    }

    /// Branches on `b`, then on each state bit in turn.
    fn decision_tree(&self, j: usize, read: Option<u8>, code: &mut Code) -> ATerm {
        let q = self.q();
        match read {
            None => ite(
                v("b"),
                self.decision_tree(j, Some(0), code),
                self.decision_tree(j, Some(1), code),
            ),
            Some(r) if code.len() < q => {
                let x = format!("q{}", code.len());
                let mut sub = |bit: u8| {
                    code.push(bit);
                    let t = self.decision_tree(j, Some(r), code);
                    code.pop();
                    t
                };
                let t0 = sub(0);
                let t1 = sub(1);
                ite(v(&x), t0, t1)
            }
            Some(r) => {
                let (write, next, dir) = match self.spec.step(j, code, r) {
                    Some(act) => (act.write, act.next.clone(), act.dir),
                    // final or unused states: never inspected
                    None => (r, code.clone(), Move::Right),
                };
                let kind = self.spec.states.get(&next).copied().unwrap_or(Kind::Reject).bits();
                let mut items = vec![bit(write)];
                items.extend(next.iter().map(|&b| bit(b)));
                items.extend([bit(kind.0), bit(kind.1)]);
                items.push(bit(if dir == Move::Right { 0 } else { 1 }));
                tuple(items)
            }
        }
    }

    pub fn get(&self, name: &str) -> Option<&Derivation> {
        self.lib.get(name)
    }

    /// The derivations of the paper's combinators, by name.
    pub fn all(&self) -> Vec<(&'static str, &Derivation)> {
        NAMES.iter().chain(&["Tr1", "Tr2"]).map(|n| (*n, self.lib.get(n).unwrap())).collect()
    }

    pub fn library(&mut self) -> &mut Library {
        &mut self.lib
    }

    /// The configuration term `λc.⟨L, R, Q, k⟩` of a machine state.
    pub fn config_term(&mut self, s: &MachineState) -> Term {
        let left: Vec<ATerm> = s.tape[..s.pos].iter().rev().map(|&b| app(v("c"), [bit(b)])).collect();
        let right: Vec<ATerm> = s.tape[s.pos..].iter().map(|&b| app(v("c"), [bit(b)])).collect();
        let half = |ms: Vec<ATerm>| if ms.is_empty() { lam("z", v("z")) } else { comp(ms) };
        let (k0, k1) = self.spec.kind(&s.state).bits();
        let mut items = vec![half(left), half(right)];
        items.extend(s.state.iter().map(|&b| bit(b)));
        items.extend([bit(k0), bit(k1)]);
        let ty = self.atm_type();
        self.lib.check(&lam("c", tuple(items)), &ty).expect("configurations are typable").term
    }

    /// Reads a machine state back from the normal form of a configuration.
    /// The head position is the length of the left half.
    pub fn decode_config(&self, t: &Term) -> Option<(MachineState, Kind)> {
        let TermKind::Lam(c, body) = t.kind() else { return None };
        let TermKind::Lam(p, body) = body.kind() else { return None };
        let (head, args) = body.spine();
        if head.as_var() != Some(p) || args.len() != self.q() + 4 {
            return None;
        }
        let half = |t: &Term| -> Option<Vec<u8>> {
            let TermKind::Lam(z, cur) = t.kind() else { return None };
            let mut cur = cur.clone();
            let mut out = Vec::new();
            loop {
                if cur.as_var() == Some(z) {
                    return Some(out);
                }
                let (h, xs) = cur.spine();
                if h.as_var() != Some(c) || xs.len() != 2 {
                    return None;
                }
                out.push(u8::from(!xs[0].as_bool()?));
                cur = match cur.kind() {
                    TermKind::App(_, rest) => rest.clone(),
                    _ => return None,
                };
            }
        };
        let mut left = half(&args[0])?;
        let right = half(&args[1])?;
        let bits: Option<Vec<u8>> = args[2..].iter().map(|b| b.as_bool().map(|x| u8::from(!x))).collect();
        let bits = bits?;
        left.reverse();
        let pos = left.len();
        left.extend(right);
        let state = bits[..self.q()].to_vec();
        let kind = Kind::from_bits((bits[self.q()], bits[self.q() + 1]));
        Some((MachineState { tape: left, pos, state }, kind))
    }

    /// `normalize(Tr_j c)` decoded.
    pub fn transition(&mut self, j: usize, s: &MachineState) -> Option<(MachineState, Kind)> {
        let c = self.config_term(s);
        let tr = self.lib.get(["Tr1", "Tr2"][j]).unwrap().term.clone();
        let nf = normalize(&Term::app(tr, c), crate::syntax::DEFAULT_FUEL).ok()?;
        self.decode_config(&nf)
    }
}

/// `α(M0, M1, M2)` on kind pairs, with every argument shared additively.
pub fn alpha(m0: ATerm, m1: ATerm, m2: ATerm) -> ATerm {
    let or = or_(pi2(m1.clone()), pi2(m2.clone()));
    let and = and_(pi2(m1), pi2(m2));
    ite(
        pi1(m0.clone()),
        ite(pi2(m0.clone()), tuple(vec![zero(), or]), tuple(vec![zero(), and])),
        tuple(vec![one(), pi2(m0)]),
    )
}

/// `λm0.λm1.λm2. α(m0, m1, m2) : B² ⊸ B² ⊸ B² ⊸ B²`.
pub fn alpha3() -> Derivation {
    let b2 = bools(2);
    let t = lams(&["m0", "m1", "m2"], alpha(v("m0"), v("m1"), v("m2")));
    crate::types::Elaborator::new()
        .check_closed(&t, &Type::arrows([b2.clone(), b2.clone(), b2.clone()], b2))
        .expect("alpha is typable")
}

/// A compiled machine with its clock.
pub struct Compiled {
    pub combinators: Combinators,
    pub poly: Poly,
    /// The bang prefix of the argument type, `max(deg P, 1) + 1`.
    pub t: usize,
    pub eval: Derivation,
}

/// `eval_M = λs. π2 ((P (len s) Step Base) (Init s)) : !^t S ⊸ B`.
pub fn compile(spec: &AtmSpec, poly: &Poly) -> Result<Compiled, CompileError> {
    let mut combinators = Combinators::new(spec)?;
    let lib = combinators.library();
    let p = lib.poly(poly).map_err(|e| CompileError::Elab("P", e))?;
    let len = lib.len(1).map_err(|e| CompileError::Elab("len", e))?;
    let t = poly.degree().max(1) + 1;
    let arg = Type::bangs(t, string(1));
    let body = pi2(app(p, [app(len, [v("s")]), g("Step"), g("Base"), app(g("Init"), [v("s")])]));
    let eval = lib
        .check(&lam_t("s", arg.clone(), body), &Type::lolli(arg, Type::Bool))
        .map_err(|e| CompileError::Elab("eval", e))?;
    Ok(Compiled {
        combinators,
        poly: poly.clone(),
        t,
        eval,
    })
}

impl Compiled {
    /// `eval_M s̄` with its derivation of type `B`.
    pub fn program(&mut self, input: &[u8]) -> Derivation {
        let lib = self.combinators.library();
        if lib.get("eval").is_none() {
            lib.insert("eval", self.eval.clone());
        }
        lib.check(&app(g("eval"), [string_aterm(input)]), &Type::Bool)
            .expect("applications to strings are typable")
    }

    pub fn term(&self) -> &Term {
        &self.eval.term
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::atm::{atm_oracle, machines};
    use crate::machine::eval_big;
    use crate::syntax::parse_term;

    #[test]
    fn combinators_validate() {
        for spec in [machines::always_accept(), machines::contains_one(), machines::zero_then_one()] {
            let c = Combinators::new(&spec).unwrap();
            for (name, d) in c.all() {
                d.validate().unwrap_or_else(|e| panic!("{name}: {e}"));
                assert!(d.ctx.is_empty());
            }
        }
    }

    #[test]
    fn kind_of_initial_configuration() {
        let spec = machines::zero_then_one();
        let mut c = Combinators::new(&spec).unwrap();
        let s = c.config_term(&MachineState::initial(&spec, &[0, 1]));
        let kind = Term::app(c.get("Kind").unwrap().term.clone(), s.clone());
        assert!(normalize(&kind, 100_000).unwrap().alpha_eq(&parse_term(r"\p. p 0 1").unwrap()));
        let ext = Term::app(c.get("Ext").unwrap().term.clone(), s);
        assert_eq!(normalize(&ext, 100_000).unwrap(), parse_term("1").unwrap());
    }

    #[test]
    fn init_builds_the_initial_configuration() {
        let spec = machines::contains_one();
        let mut c = Combinators::new(&spec).unwrap();
        let input = [1, 0, 1];
        let init = Term::app(c.get("Init").unwrap().term.clone(), super::super::encode::bool_string(&input));
        let nf = normalize(&init, 100_000).unwrap();
        let (state, kind) = c.decode_config(&nf).unwrap();
        assert_eq!(state, MachineState::initial(&spec, &input));
        assert_eq!(kind, Kind::Existential);
        assert!(nf.alpha_eq(&normalize(&c.config_term(&state), 1000).unwrap()));
    }

    #[test]
    fn right_move_by_hand() {
        // state 00 reads 1 under δ1: write 1, go to 01, move right
        let spec = machines::contains_one();
        let mut c = Combinators::new(&spec).unwrap();
        let s = MachineState { tape: vec![0, 1, 0], pos: 1, state: vec![0, 0] };
        let tr = Term::app(c.get("Tr1").unwrap().term.clone(), c.config_term(&s));
        let got = normalize(&tr, 100_000).unwrap();
        let expect = parse_term(r"\c. \p. p (\z. c 1 (c 0 z)) (\z. c 0 z) 0 1 1 0").unwrap();
        assert!(got.alpha_eq(&expect), "{got}");
    }

    #[test]
    fn transitions_agree_with_the_oracle() {
        for spec in [machines::contains_one(), machines::zero_then_one()] {
            let mut c = Combinators::new(&spec).unwrap();
            for tape in [vec![], vec![1], vec![0, 1], vec![1, 1, 0]] {
                for pos in 0..=tape.len() {
                    for state in spec.states.keys().filter(|s| !spec.kind(s).is_final()) {
                        let s = MachineState { tape: tape.clone(), pos, state: state.clone() };
                        for j in 0..2 {
                            let want = s.successor(&spec, j).unwrap();
                            let (got, kind) = c.transition(j, &s).unwrap();
                            assert_eq!(got, want, "δ{} from {s:?}", j + 1);
                            assert_eq!(kind, spec.kind(&want.state));
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn alpha_table() {
        let d = alpha3();
        d.validate().unwrap();
        assert_eq!(d.degree(), 0);
        let pair = |a: u8, b: u8| format!(r"(\p. p {a} {b})");
        let run = |m0: &str, m1: &str, m2: &str| {
            let t = parse_term(&format!("({}) {m0} {m1} {m2}", d.term)).unwrap();
            normalize(&t, 10_000).unwrap()
        };
        let nf = |a: u8, b: u8| normalize(&parse_term(&pair(a, b)).unwrap(), 10).unwrap();
        for x in [pair(0, 0), pair(1, 1)] {
            for y in [pair(0, 1), pair(1, 0)] {
                assert!(run(&pair(1, 0), &x, &y).alpha_eq(&nf(1, 0)));
                assert!(run(&pair(1, 1), &x, &y).alpha_eq(&nf(1, 1)));
            }
        }
        assert!(run(&pair(0, 1), &pair(0, 0), &pair(0, 1)).alpha_eq(&nf(0, 1)));
        assert!(run(&pair(0, 0), &pair(0, 0), &pair(0, 1)).alpha_eq(&nf(0, 0)));
    }

    #[test]
    fn compiled_small_machines() {
        let mut acc = compile(&machines::always_accept(), &Poly::new(vec![0, 1])).unwrap();
        assert_eq!(acc.t, 2);
        for input in [vec![], vec![0, 1]] {
            let d = acc.program(&input);
            d.validate().unwrap();
            assert!(eval_big(&d.term).unwrap().0);
        }
        let spec = machines::contains_one();
        let mut m = compile(&spec, &Poly::new(vec![0, 1])).unwrap();
        for input in [vec![0, 0, 1], vec![0, 0], vec![1]] {
            let d = m.program(&input);
            let got = eval_big(&d.term).unwrap().0;
            assert_eq!(got, atm_oracle(&spec, &input, input.len() as u64), "{input:?}");
        }
    }
}

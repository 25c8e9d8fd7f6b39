//! Church numerals, boolean strings and their typed arithmetic.

use super::sugar::*;
use crate::types::{ATerm, Derivation, ElabError, Elaborator, Type};
use crate::Term;

/// A set of closed definitions, each elaborated once against its type.
#[derive(Default)]
pub struct Library {
    elab: Elaborator,
}

impl Library {
    pub fn new() -> Library {
        Library::default()
    }

    /// Elaborates `body : ty` under `name` unless it is already defined, and
    /// returns a reference to it.
    pub fn def(&mut self, name: &str, ty: &Type, body: impl FnOnce(&mut Library) -> ATerm) -> Result<ATerm, ElabError> {
        if self.elab.global(name).is_none() {
            let t = body(self);
            let d = self.elab.check_closed(&t, ty)?;
            self.elab.define(name, d);
        }
        Ok(g(name))
    }

    pub fn insert(&mut self, name: &str, d: Derivation) {
        self.elab.define(name, d);
    }

    pub fn get(&self, name: &str) -> Option<&Derivation> {
        self.elab.global(name)
    }

    pub fn check(&mut self, t: &ATerm, ty: &Type) -> Result<Derivation, ElabError> {
        self.elab.check_closed(t, ty)
    }

    pub fn infer(&mut self, t: &ATerm) -> Result<Derivation, ElabError> {
        self.elab.infer_closed(t)
    }

    /// `suc : N_i ⊸ N_{i+1}`.
    pub fn suc(&mut self, i: usize) -> Result<ATerm, ElabError> {
        let ty = Type::lolli(nat(i), nat(i + 1));
        self.def(&format!("suc{i}"), &ty, |_| {
            lams(&["n", "s", "z"], app(v("s"), [app(v("n"), [v("s"), v("z")])]))
        })
    }

    /// `add : N_i ⊸ N_j ⊸ N_{max(i,j)+1}`.
    pub fn add(&mut self, i: usize, j: usize) -> Result<ATerm, ElabError> {
        let ty = Type::arrows([nat(i), nat(j)], nat(i.max(j) + 1));
        self.def(&format!("add{i}_{j}"), &ty, |_| {
            lams(
                &["n", "m", "s", "z"],
                app(v("n"), [v("s"), app(v("m"), [v("s"), v("z")])]),
            )
        })
    }

    /// `mul : N_i ⊸ !^i N_j ⊸ N_{i+j}`.
    pub fn mul(&mut self, i: usize, j: usize) -> Result<ATerm, ElabError> {
        let ty = Type::arrows([nat(i), Type::bangs(i, nat(j))], nat(i + j));
        self.def(&format!("mul{i}_{j}"), &ty, |_| {
            lams(&["n", "m", "s"], app(v("n"), [app(v("m"), [v("s")])]))
        })
    }

    /// `N_i ⊸ N_j` for `i ≤ j`, by eta expansion.
    pub fn coerce(&mut self, i: usize, j: usize) -> Result<ATerm, ElabError> {
        assert!(i <= j);
        let ty = Type::lolli(nat(i), nat(j));
        self.def(&format!("coerce{i}_{j}"), &ty, |_| {
            lams(&["n", "s", "z"], app(v("n"), [v("s"), v("z")]))
        })
    }

    /// `len : S_i ⊸ N_i`.
    pub fn len(&mut self, i: usize) -> Result<ATerm, ElabError> {
        let ty = Type::lolli(string(i), nat(i));
        self.def(&format!("len{i}"), &ty, |_| {
            lams(&["c", "s"], app(v("c"), [lams(&["x", "y"], app(v("s"), [v("y")]))]))
        })
    }

    pub fn numeral(&mut self, n: u64, i: usize) -> Result<ATerm, ElabError> {
        self.def(&format!("num{n}_{i}"), &nat(i), |_| church_aterm(n))
    }

    /// The polynomial as a term of type `!^deg N ⊸ N_{2 deg + 1}`.
    pub fn poly(&mut self, p: &Poly) -> Result<ATerm, ElabError> {
        let d = p.degree();
        let ty = Type::lolli(Type::bangs(d, nat(1)), nat(2 * d + 1));
        let key = format!("poly{}", p.coeffs.iter().map(u64::to_string).collect::<Vec<_>>().join("_"));
        if self.get(&key).is_some() {
            return Ok(g(&key));
        }
        // monomials c_k n^k, each with its numeral index
        let mut terms: Vec<(ATerm, usize)> = Vec::new();
        for (k, &c) in p.coeffs.iter().enumerate().take(d + 1) {
            if c == 0 && !(k == 0 && d == 0) {
                continue;
            }
            if k == 0 {
                terms.push((self.numeral(c, 1)?, 1));
                continue;
            }
            let mut pow = v("n");
            for e in 2..=k {
                pow = app(self.mul(1, e - 1)?, [v("n"), pow]);
            }
            if c == 1 {
                terms.push((pow, k));
            } else {
                let num = self.numeral(c, 1)?;
                terms.push((app(self.mul(k, 1)?, [pow, num]), k + 1));
            }
        }
        if terms.is_empty() {
            terms.push((self.numeral(0, 1)?, 1));
        }
        let (mut acc, mut idx) = terms.remove(0);
        for (t, i) in terms {
            acc = app(self.add(i, idx)?, [t, acc]);
            idx = i.max(idx) + 1;
        }
        if idx < 2 * d + 1 {
            acc = app(self.coerce(idx, 2 * d + 1)?, [acc]);
        }
        let body = lam_t("n", Type::bangs(d, nat(1)), acc);
        self.def(&key, &ty, |_| body)
    }
}

pub fn church_aterm(n: u64) -> ATerm {
    let mut body = v("z");
    for _ in 0..n {
        body = app(v("s"), [body]);
    }
    lams(&["s", "z"], body)
}

/// `n̄ = λs.λz. s^n z`.
pub fn church(n: u64) -> Term {
    crate::syntax::parse_term(&format!(
        r"\s. \z. {}z{}",
        "s (".repeat(n as usize),
        ")".repeat(n as usize)
    ))
    .unwrap()
}

/// Reads a numeral back from its normal form.
pub fn church_value(t: &Term) -> Option<u64> {
    use crate::syntax::TermKind;
    let TermKind::Lam(s, b) = t.kind() else { return None };
    let TermKind::Lam(z, cur) = b.kind() else { return None };
    let mut cur = cur.clone();
    let mut n = 0;
    loop {
        match cur.kind() {
            TermKind::Var(x) if x == z && x != s => return Some(n),
            TermKind::App(f, a) if matches!(f.kind(), TermKind::Var(x) if x == s) => {
                n += 1;
                cur = a.clone();
            }
            _ => return None,
        }
    }
}

pub fn string_aterm(bits: &[u8]) -> ATerm {
    let body = bits
        .iter()
        .rev()
        .fold(v("z"), |acc, &b| app(v("c"), [bit(b), acc]));
    lams(&["c", "z"], body)
}

/// `λc.λz. c b0 (… (c bn z))`.
pub fn bool_string(bits: &[u8]) -> Term {
    Elaborator::new().check_closed(&string_aterm(bits), &string(1)).unwrap().term
}

/// Reads a string back from its normal form.
pub fn string_value(t: &Term) -> Option<Vec<u8>> {
    use crate::syntax::TermKind;
    let TermKind::Lam(c, b) = t.kind() else { return None };
    let TermKind::Lam(z, cur) = b.kind() else { return None };
    let mut cur = cur.clone();
    let mut out = Vec::new();
    loop {
        match cur.kind() {
            TermKind::Var(x) if x == z && x != c => return Some(out),
            TermKind::App(f, rest) => {
                let TermKind::App(h, sym) = f.kind() else { return None };
                if !matches!(h.kind(), TermKind::Var(x) if x == c) {
                    return None;
                }
                out.push(match sym.kind() {
                    TermKind::Zero => 0,
                    TermKind::One => 1,
                    _ => return None,
                });
                cur = rest.clone();
            }
            _ => return None,
        }
    }
}

/// `c0 + c1 n + c2 n² + …` with natural coefficients.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Poly {
    pub coeffs: Vec<u64>,
}

impl Poly {
    pub fn new(coeffs: Vec<u64>) -> Poly {
        Poly { coeffs }
    }

    pub fn degree(&self) -> usize {
        self.coeffs.iter().rposition(|&c| c != 0).unwrap_or(0)
    }

    pub fn eval(&self, n: u64) -> u64 {
        self.coeffs.iter().rev().fold(0u64, |acc, &c| acc.saturating_mul(n).saturating_add(c))
    }
}

impl std::str::FromStr for Poly {
    type Err = std::num::ParseIntError;
    fn from_str(s: &str) -> Result<Poly, Self::Err> {
        let coeffs = s.split(',').map(|c| c.trim().parse()).collect::<Result<Vec<u64>, _>>()?;
        Ok(Poly { coeffs })
    }
}

/// Closed connectives `λa.λb. a and b` and friends, with their derivations.
pub fn connectives() -> Vec<(&'static str, Derivation)> {
    let mut el = Elaborator::new();
    let b2 = Type::arrows([Type::Bool, Type::Bool], Type::Bool);
    vec![
        ("and", lams(&["a", "b"], and_(v("a"), v("b"))), b2.clone()),
        ("or", lams(&["a", "b"], or_(v("a"), v("b"))), b2),
        ("not", lam("a", not_(v("a"))), Type::lolli(Type::Bool, Type::Bool)),
    ]
    .into_iter()
    .map(|(n, t, ty)| (n, el.check_closed(&t, &ty).unwrap()))
    .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::syntax::normalize;

    fn value(lib: &mut Library, t: ATerm) -> u64 {
        let d = lib.infer(&t).unwrap();
        d.validate().unwrap();
        church_value(&normalize(&d.term, 100_000).unwrap()).unwrap()
    }

    #[test]
    fn numerals_round_trip() {
        for n in 0..6 {
            assert_eq!(church_value(&church(n)), Some(n));
        }
        let mut lib = Library::new();
        let three = lib.numeral(3, 2).unwrap();
        assert_eq!(lib.get("num3_2").unwrap().ty, nat(2));
        assert_eq!(value(&mut lib, three), 3);
    }

    #[test]
    fn arithmetic() {
        let mut lib = Library::new();
        let (two, three) = (lib.numeral(2, 1).unwrap(), lib.numeral(3, 1).unwrap());
        let t = app(lib.suc(1).unwrap(), [two.clone()]);
        assert_eq!(value(&mut lib, t), 3);
        let t = app(lib.add(1, 1).unwrap(), [two.clone(), three.clone()]);
        assert_eq!(value(&mut lib, t), 5);
        let t = app(lib.mul(1, 1).unwrap(), [two, three]);
        assert_eq!(value(&mut lib, t), 6);
    }

    #[test]
    fn polynomials() {
        let mut lib = Library::new();
        for coeffs in [vec![0, 0, 1], vec![3, 2, 1], vec![4], vec![0, 1], vec![1, 0, 0, 2]] {
            let p = Poly::new(coeffs);
            let pt = lib.poly(&p).unwrap();
            let d = lib.get(&format!("poly{}", p.coeffs.iter().map(u64::to_string).collect::<Vec<_>>().join("_"))).unwrap();
            d.validate().unwrap();
            assert_eq!(d.ty.strip_bangs().0, 0);
            let crate::types::Type::Lolli(arg, _) = &d.ty else { panic!() };
            assert_eq!(arg.strip_bangs().0, p.degree());
            for n in 0..4 {
                let num = lib.numeral(n, 1).unwrap();
                assert_eq!(value(&mut lib, app(pt.clone(), [num])), p.eval(n), "{p:?} at {n}");
            }
        }
    }

    #[test]
    fn length_of_strings() {
        let mut lib = Library::new();
        let len = lib.len(1).unwrap();
        for bits in [vec![], vec![0, 1], vec![1, 1, 0, 1]] {
            let n = bits.len() as u64;
            assert_eq!(value(&mut lib, app(len.clone(), [ann(string_aterm(&bits), string(1))])), n);
            assert_eq!(string_value(&bool_string(&bits)), Some(bits));
        }
    }

    #[test]
    fn connective_tables() {
        let cs = connectives();
        for (name, d) in &cs {
            d.validate().unwrap();
            for a in [0u8, 1] {
                for b in [0u8, 1] {
                    let (ta, tb) = (Term::boolean(a == 0), Term::boolean(b == 0));
                    let t = if *name == "not" {
                        Term::app(d.term.clone(), ta)
                    } else {
                        Term::apps(d.term.clone(), [ta, tb])
                    };
                    let r = normalize(&t, 100).unwrap().as_bool().unwrap();
                    let expect = match *name {
                        "and" => a == 0 && b == 0,
                        "or" => a == 0 || b == 0,
                        _ => a != 0,
                    };
                    assert_eq!(r, expect, "{name} {a} {b}");
                }
            }
        }
    }

    #[test]
    fn poly_eval() {
        assert_eq!(Poly::new(vec![3, 2, 1]).eval(4), 27);
        assert_eq!("1, 0,2".parse::<Poly>().unwrap(), Poly::new(vec![1, 0, 2]));
        assert_eq!(Poly::new(vec![5, 0, 0]).degree(), 0);
    }
}

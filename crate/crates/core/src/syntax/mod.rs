//! Lambda terms with boolean constants and a conditional.
//!
//! `0` is truth and `1` is falsity: `if 0 then M else N` reduces to `M`.

mod parse;
mod print;
mod reduce;

pub use parse::{parse_term, ParseError};
pub use reduce::{
    contract, is_redex, leftmost_redex, normalize, normalize_counting, redexes, replace_at, step,
    subterm_at, FuelExhausted, NotARedex, RedexPosition, Selector, DEFAULT_FUEL,
};

use std::collections::{BTreeSet, HashMap, HashSet};
use std::fmt;
use std::rc::Rc;

/// Variable names are shared strings.
pub type Name = Rc<str>;

pub fn name(s: &str) -> Name {
    Rc::from(s)
}

/// An immutable, reference counted term with its size cached.
#[derive(Clone)]
pub struct Term(Rc<Node>);

struct Node {
    kind: TermKind,
    size: usize,
}

#[derive(Clone, PartialEq, Eq, Debug)]
pub enum TermKind {
    Var(Name),
    /// The constant `0` (true).
    Zero,
    /// The constant `1` (false).
    One,
    Lam(Name, Term),
    App(Term, Term),
    If(Term, Term, Term),
}

impl PartialEq for Term {
    fn eq(&self, other: &Self) -> bool {
        Rc::ptr_eq(&self.0, &other.0) || (self.0.size == other.0.size && self.0.kind == other.0.kind)
    }
}

impl Eq for Term {}

impl std::hash::Hash for Term {
    fn hash<H: std::hash::Hasher>(&self, state: &mut H) {
        self.to_string().hash(state)
    }
}

impl fmt::Debug for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Term({self})")
    }
}

impl Term {
    fn mk(kind: TermKind) -> Term {
        let size = match &kind {
            TermKind::Var(_) | TermKind::Zero | TermKind::One => 1,
            TermKind::Lam(_, b) => b.size() + 1,
            TermKind::App(m, n) => m.size() + n.size(),
            TermKind::If(c, t, e) => c.size() + t.size() + e.size() + 1,
        };
        Term(Rc::new(Node { kind, size }))
    }

    pub fn var(x: &str) -> Term {
        Term::mk(TermKind::Var(name(x)))
    }
    pub fn var_n(x: Name) -> Term {
        Term::mk(TermKind::Var(x))
    }
    pub fn zero() -> Term {
        Term::mk(TermKind::Zero)
    }
    pub fn one() -> Term {
        Term::mk(TermKind::One)
    }
    /// The constant for a boolean value, `0` for `true`.
    pub fn boolean(b: bool) -> Term {
        if b {
            Term::zero()
        } else {
            Term::one()
        }
    }
    pub fn lam(x: &str, body: Term) -> Term {
        Term::mk(TermKind::Lam(name(x), body))
    }
    pub fn lam_n(x: Name, body: Term) -> Term {
        Term::mk(TermKind::Lam(x, body))
    }
    pub fn app(m: Term, n: Term) -> Term {
        Term::mk(TermKind::App(m, n))
    }
    pub fn apps(head: Term, args: impl IntoIterator<Item = Term>) -> Term {
        args.into_iter().fold(head, Term::app)
    }
    pub fn ite(c: Term, t: Term, e: Term) -> Term {
        Term::mk(TermKind::If(c, t, e))
    }

    pub fn kind(&self) -> &TermKind {
        &self.0.kind
    }

    /// `|x| = |0| = |1| = 1`, `|λx.M| = |M|+1`, `|MN| = |M|+|N|`, `|if M then N else P| = |M|+|N|+|P|+1`.
    pub fn size(&self) -> usize {
        self.0.size
    }

    pub fn ptr_eq(&self, other: &Term) -> bool {
        Rc::ptr_eq(&self.0, &other.0)
    }

    pub fn as_bool(&self) -> Option<bool> {
        match self.kind() {
            TermKind::Zero => Some(true),
            TermKind::One => Some(false),
            _ => None,
        }
    }

    pub fn as_var(&self) -> Option<&Name> {
        match self.kind() {
            TermKind::Var(x) => Some(x),
            _ => None,
        }
    }

    /// Splits `h V1 .. Vn` into the head and its arguments.
    pub fn spine(&self) -> (Term, Vec<Term>) {
        let mut args = Vec::new();
        let mut t = self.clone();
        while let TermKind::App(m, n) = t.kind() {
            args.push(n.clone());
            let m = m.clone();
            t = m;
        }
        args.reverse();
        (t, args)
    }

    pub fn free_vars(&self) -> BTreeSet<Name> {
        let mut out = BTreeSet::new();
        let mut bound = Vec::new();
        self.collect_free(&mut bound, &mut out);
        out
    }

    fn collect_free(&self, bound: &mut Vec<Name>, out: &mut BTreeSet<Name>) {
        match self.kind() {
            TermKind::Var(x) => {
                if !bound.contains(x) {
                    out.insert(x.clone());
                }
            }
            TermKind::Zero | TermKind::One => {}
            TermKind::Lam(x, b) => {
                bound.push(x.clone());
                b.collect_free(bound, out);
                bound.pop();
            }
            TermKind::App(m, n) => {
                m.collect_free(bound, out);
                n.collect_free(bound, out);
            }
            TermKind::If(c, t, e) => {
                c.collect_free(bound, out);
                t.collect_free(bound, out);
                e.collect_free(bound, out);
            }
        }
    }

    pub fn is_closed(&self) -> bool {
        self.free_vars().is_empty()
    }

    pub fn has_free(&self, x: &str) -> bool {
        match self.kind() {
            TermKind::Var(y) => &**y == x,
            TermKind::Zero | TermKind::One => false,
            TermKind::Lam(y, b) => &**y != x && b.has_free(x),
            TermKind::App(m, n) => m.has_free(x) || n.has_free(x),
            TermKind::If(c, t, e) => c.has_free(x) || t.has_free(x) || e.has_free(x),
        }
    }

    /// All names occurring in the term, bound or free.
    pub fn all_names(&self, out: &mut HashSet<Name>) {
        match self.kind() {
            TermKind::Var(y) => {
                out.insert(y.clone());
            }
            TermKind::Zero | TermKind::One => {}
            TermKind::Lam(y, b) => {
                out.insert(y.clone());
                b.all_names(out);
            }
            TermKind::App(m, n) => {
                m.all_names(out);
                n.all_names(out);
            }
            TermKind::If(c, t, e) => {
                c.all_names(out);
                t.all_names(out);
                e.all_names(out);
            }
        }
    }

    /// Number of free occurrences of `x`.
    pub fn count_occurrences(&self, x: &str) -> usize {
        match self.kind() {
            TermKind::Var(y) => usize::from(&**y == x),
            TermKind::Zero | TermKind::One => 0,
            TermKind::Lam(y, b) => {
                if &**y == x {
                    0
                } else {
                    b.count_occurrences(x)
                }
            }
            TermKind::App(m, n) => m.count_occurrences(x) + n.count_occurrences(x),
            TermKind::If(c, t, e) => {
                c.count_occurrences(x) + t.count_occurrences(x) + e.count_occurrences(x)
            }
        }
    }

    /// Free occurrences of `x` counting only the worst branch of each conditional.
    pub fn sliced_occurrences(&self, x: &str) -> usize {
        match self.kind() {
            TermKind::Var(y) => usize::from(&**y == x),
            TermKind::Zero | TermKind::One => 0,
            TermKind::Lam(y, b) => {
                if &**y == x {
                    0
                } else {
                    b.sliced_occurrences(x)
                }
            }
            TermKind::App(m, n) => m.sliced_occurrences(x) + n.sliced_occurrences(x),
            TermKind::If(c, t, e) => c
                .sliced_occurrences(x)
                .max(t.sliced_occurrences(x))
                .max(e.sliced_occurrences(x)),
        }
    }

    /// Capture avoiding substitution `self[n/x]`. Clashing binders are primed.
    pub fn subst(&self, x: &str, n: &Term) -> Term {
        let fv_n = n.free_vars();
        self.subst_inner(x, n, &fv_n).unwrap_or_else(|| self.clone())
    }

    fn subst_inner(&self, x: &str, n: &Term, fv_n: &BTreeSet<Name>) -> Option<Term> {
        match self.kind() {
            TermKind::Var(y) => (&**y == x).then(|| n.clone()),
            TermKind::Zero | TermKind::One => None,
            TermKind::Lam(y, b) => {
                if &**y == x {
                    return None;
                }
                if fv_n.contains(y) && b.has_free(x) {
                    let mut avoid = b.free_vars();
                    avoid.extend(fv_n.iter().cloned());
                    avoid.insert(name(x));
                    let y2 = prime_away(y, &avoid);
                    let b2 = b.rename_free(y, &y2);
                    let b3 = b2.subst_inner(x, n, fv_n).unwrap_or(b2);
                    return Some(Term::lam_n(y2, b3));
                }
                b.subst_inner(x, n, fv_n).map(|b2| Term::lam_n(y.clone(), b2))
            }
            TermKind::App(m, a) => {
                let m2 = m.subst_inner(x, n, fv_n);
                let a2 = a.subst_inner(x, n, fv_n);
                if m2.is_none() && a2.is_none() {
                    return None;
                }
                Some(Term::app(
                    m2.unwrap_or_else(|| m.clone()),
                    a2.unwrap_or_else(|| a.clone()),
                ))
            }
            TermKind::If(c, t, e) => {
                let c2 = c.subst_inner(x, n, fv_n);
                let t2 = t.subst_inner(x, n, fv_n);
                let e2 = e.subst_inner(x, n, fv_n);
                if c2.is_none() && t2.is_none() && e2.is_none() {
                    return None;
                }
                Some(Term::ite(
                    c2.unwrap_or_else(|| c.clone()),
                    t2.unwrap_or_else(|| t.clone()),
                    e2.unwrap_or_else(|| e.clone()),
                ))
            }
        }
    }

    /// Replaces free `x` by the variable `y`, which must not be bound in `self`.
    pub fn rename_free(&self, x: &str, y: &Name) -> Term {
        self.rename_inner(x, y).unwrap_or_else(|| self.clone())
    }

    fn rename_inner(&self, x: &str, y: &Name) -> Option<Term> {
        match self.kind() {
            TermKind::Var(z) => (&**z == x).then(|| Term::var_n(y.clone())),
            TermKind::Zero | TermKind::One => None,
            TermKind::Lam(z, b) => {
                if &**z == x {
                    None
                } else {
                    b.rename_inner(x, y).map(|b2| Term::lam_n(z.clone(), b2))
                }
            }
            TermKind::App(m, n) => {
                let m2 = m.rename_inner(x, y);
                let n2 = n.rename_inner(x, y);
                if m2.is_none() && n2.is_none() {
                    return None;
                }
                Some(Term::app(
                    m2.unwrap_or_else(|| m.clone()),
                    n2.unwrap_or_else(|| n.clone()),
                ))
            }
            TermKind::If(c, t, e) => {
                let c2 = c.rename_inner(x, y);
                let t2 = t.rename_inner(x, y);
                let e2 = e.rename_inner(x, y);
                if c2.is_none() && t2.is_none() && e2.is_none() {
                    return None;
                }
                Some(Term::ite(
                    c2.unwrap_or_else(|| c.clone()),
                    t2.unwrap_or_else(|| t.clone()),
                    e2.unwrap_or_else(|| e.clone()),
                ))
            }
        }
    }

    /// Renames every name, bound or free, through `map`. Used to print traces
    /// with readable names; the map must be injective on the names present.
    pub fn relabel(&self, map: &HashMap<Name, Name>) -> Term {
        let r = |x: &Name| map.get(x).cloned().unwrap_or_else(|| x.clone());
        match self.kind() {
            TermKind::Var(x) => Term::var_n(r(x)),
            TermKind::Zero | TermKind::One => self.clone(),
            TermKind::Lam(x, b) => Term::lam_n(r(x), b.relabel(map)),
            TermKind::App(m, n) => Term::app(m.relabel(map), n.relabel(map)),
            TermKind::If(c, t, e) => Term::ite(c.relabel(map), t.relabel(map), e.relabel(map)),
        }
    }

    /// Equality up to renaming of bound variables.
    pub fn alpha_eq(&self, other: &Term) -> bool {
        fn go(a: &Term, b: &Term, env: &mut Vec<(Name, Name)>) -> bool {
            if env.is_empty() && a.ptr_eq(b) {
                return true;
            }
            match (a.kind(), b.kind()) {
                (TermKind::Var(x), TermKind::Var(y)) => {
                    let ix = env.iter().rposition(|(l, _)| l == x);
                    let iy = env.iter().rposition(|(_, r)| r == y);
                    match (ix, iy) {
                        (None, None) => x == y,
                        (Some(i), Some(j)) => i == j,
                        _ => false,
                    }
                }
                (TermKind::Zero, TermKind::Zero) | (TermKind::One, TermKind::One) => true,
                (TermKind::Lam(x, m), TermKind::Lam(y, n)) => {
                    env.push((x.clone(), y.clone()));
                    let r = go(m, n, env);
                    env.pop();
                    r
                }
                (TermKind::App(m1, n1), TermKind::App(m2, n2)) => {
                    go(m1, m2, env) && go(n1, n2, env)
                }
                (TermKind::If(c1, t1, e1), TermKind::If(c2, t2, e2)) => {
                    go(c1, c2, env) && go(t1, t2, env) && go(e1, e2, env)
                }
                _ => false,
            }
        }
        self.size() == other.size() && go(self, other, &mut Vec::new())
    }
}

/// Appends primes to `x` until it avoids `avoid`.
pub fn prime_away(x: &str, avoid: &BTreeSet<Name>) -> Name {
    let mut s = format!("{x}'");
    while avoid.contains(s.as_str()) {
        s.push('\'');
    }
    name(&s)
}

/// Deterministic supply of fresh names `base#N`, one counter per evaluation.
#[derive(Clone, Debug, Default)]
pub struct Fresh {
    next: u64,
}

impl Fresh {
    pub fn new() -> Fresh {
        Fresh { next: 1 }
    }

    pub fn starting_at(next: u64) -> Fresh {
        Fresh { next }
    }

    /// A supply whose names differ from every `base#N` among `names`.
    pub fn avoiding<'a>(names: impl IntoIterator<Item = &'a Name>) -> Fresh {
        let top = names
            .into_iter()
            .filter_map(|x| x.rsplit_once('#').and_then(|(_, n)| n.parse::<u64>().ok()))
            .max()
            .unwrap_or(0);
        Fresh { next: top + 1 }
    }

    pub fn fresh(&mut self, base: &str) -> Name {
        let stem = base_name(base);
        let n = self.next;
        self.next += 1;
        name(&format!("{stem}#{n}"))
    }
}

/// The part of a name before any `#N` suffix or primes.
pub fn base_name(x: &str) -> &str {
    let cut = x.find(['#', '\'']).unwrap_or(x.len());
    &x[..cut]
}

/// Maps generated names `base#N` to `base1`, `base2`, ... per base, numbered
/// in order of first appearance in `names`.
pub fn canonical_names<'a>(names: impl IntoIterator<Item = &'a Name>) -> HashMap<Name, Name> {
    let mut map = HashMap::new();
    let mut per_base: HashMap<String, usize> = HashMap::new();
    for x in names {
        if !x.contains('#') || map.contains_key(x) {
            continue;
        }
        let stem = base_name(x).to_string();
        let k = per_base.entry(stem.clone()).or_insert(0);
        *k += 1;
        map.insert(x.clone(), name(&format!("{stem}{k}")));
    }
    map
}

/// Collects names in left-to-right order of appearance, bound or free.
pub fn names_in_order(t: &Term, out: &mut Vec<Name>) {
    match t.kind() {
        TermKind::Var(x) => out.push(x.clone()),
        TermKind::Zero | TermKind::One => {}
        TermKind::Lam(x, b) => {
            out.push(x.clone());
            names_in_order(b, out);
        }
        TermKind::App(m, n) => {
            names_in_order(m, out);
            names_in_order(n, out);
        }
        TermKind::If(c, a, b) => {
            names_in_order(c, out);
            names_in_order(a, out);
            names_in_order(b, out);
        }
    }
}

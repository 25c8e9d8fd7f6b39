//! The space bounds of a program, measured and predicted, with one flag per
//! inequality.

use crate::machine::{eval_observed, run_small_observed, MachineError, MachineRule, View};
use crate::syntax::{base_name, Name, Term, TermKind};
use crate::types::Derivation;
use std::collections::{HashMap, HashSet};
use std::fmt;

/// `b^e`, saturating.
pub fn pow_sat(b: u128, e: u32) -> u128 {
    b.checked_pow(e).unwrap_or(u128::MAX)
}

/// `6 |M|^(3d+3)`.
pub fn space_bound(size: usize, degree: usize) -> u128 {
    pow_sat(size as u128, 3 * degree as u32 + 3).saturating_mul(6)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Flag {
    pub name: &'static str,
    pub ok: bool,
    /// The first violation, if any.
    pub detail: Option<String>,
}

impl Flag {
    fn new(name: &'static str) -> Flag {
        Flag { name, ok: true, detail: None }
    }

    fn fail(&mut self, detail: impl FnOnce() -> String) {
        if self.ok {
            self.ok = false;
            self.detail = Some(detail());
        }
    }

    fn check(&mut self, cond: bool, detail: impl FnOnce() -> String) {
        if !cond {
            self.fail(detail);
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BoundReport {
    pub size: usize,
    pub degree: usize,
    pub rank: usize,
    /// `δ(Π, rank)`.
    pub weight: u128,
    pub bound: u128,
    pub result: Option<bool>,
    pub space: Option<usize>,
    pub space_s: Option<usize>,
    pub rule_applications: Option<usize>,
    pub flags: Vec<Flag>,
}

impl BoundReport {
    pub fn all_ok(&self) -> bool {
        self.flags.iter().all(|f| f.ok)
    }

    pub fn flag(&self, name: &str) -> Option<&Flag> {
        self.flags.iter().find(|f| f.name == name)
    }

    pub const CSV_HEADER: &'static str = "size,degree,rank,weight,space,space_s,bound,result,flags";

    pub fn csv(&self) -> String {
        let opt = |x: Option<usize>| x.map_or(String::new(), |v| v.to_string());
        let failed: Vec<&str> = self.flags.iter().filter(|f| !f.ok).map(|f| f.name).collect();
        format!(
            "{},{},{},{},{},{},{},{},{}",
            self.size,
            self.degree,
            self.rank,
            self.weight,
            opt(self.space),
            opt(self.space_s),
            self.bound,
            self.result.map_or("", |b| if b { "0" } else { "1" }),
            if failed.is_empty() { "ok".to_string() } else { failed.join("|") }
        )
    }
}

impl fmt::Display for BoundReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "|M|          {}", self.size)?;
        writeln!(f, "degree       {}", self.degree)?;
        writeln!(f, "rank         {}", self.rank)?;
        writeln!(f, "weight       {}", self.weight)?;
        if let Some(b) = self.result {
            writeln!(f, "result       {}", if b { 0 } else { 1 })?;
        }
        if let Some(s) = self.space {
            writeln!(f, "space        {s}")?;
        }
        if let Some(s) = self.space_s {
            writeln!(f, "space_s      {s}")?;
        }
        if let Some(n) = self.rule_applications {
            writeln!(f, "rules        {n}")?;
        }
        writeln!(f, "bound        {}", self.bound)?;
        for flag in &self.flags {
            write!(f, "{:<22} {}", flag.name, if flag.ok { "ok" } else { "FAIL" })?;
            if let Some(d) = &flag.detail {
                write!(f, "  ({d})")?;
            }
            writeln!(f)?;
        }
        Ok(())
    }
}

/// Inequalities that depend on the derivation alone.
pub fn static_flags(d: &Derivation) -> Vec<Flag> {
    let size = d.term.size() as u128;
    let deg = d.degree() as u32;
    let w1 = d.weight(1);

    // an application adds 1 to the weight and nothing to the size, so the
    // weight at 1 is only bounded by 2|M| - 1
    let mut at_one = Flag::new("weight_vs_size");
    at_one.check(w1 < 2 * size, || format!("δ(Π,1) = {w1} > 2·{size} - 1"));

    let mut growth = Flag::new("weight_growth");
    for r in 1..=8u128 {
        let wr = d.weight(r);
        let lim = w1.saturating_mul(pow_sat(r, deg));
        growth.check(wr <= lim, || format!("δ(Π,{r}) = {wr} > {lim}"));
    }

    let mut at_rank = Flag::new("weight_at_rank");
    let wk = d.weight(d.rank() as u128);
    let lim = pow_sat(size, deg + 1).saturating_mul(2);
    at_rank.check(wk <= lim, || format!("δ(Π,rk) = {wk} > {lim}"));

    let mut banged = Flag::new("bang_has_no_linear");
    let mut sliced = Flag::new("sliced_occurrences");
    d.for_each_node(&mut |n| {
        if matches!(n.ty, crate::types::Type::Bang(_)) {
            for (x, a) in &n.ctx {
                banged.check(!a.is_linear() || !n.term.has_free(x), || {
                    format!("{x} : {a} occurs in {} : {}", n.term, n.ty)
                });
            }
        }
        let rk = n.rank() as u128;
        for (x, a) in &n.ctx {
            let k = a.strip_bangs().0 as u32;
            let so = n.term.sliced_occurrences(x) as u128;
            let lim = pow_sat(rk, k);
            sliced.check(so <= lim, || format!("n_so({x}, {}) = {so} > {lim}", n.term));
        }
    });
    vec![at_one, growth, at_rank, banged, sliced]
}

/// The report without running the program.
pub fn static_report(d: &Derivation) -> BoundReport {
    let rank = d.rank();
    BoundReport {
        size: d.term.size(),
        degree: d.degree(),
        rank,
        weight: d.weight(rank as u128),
        bound: space_bound(d.term.size(), d.degree()),
        result: None,
        space: None,
        space_s: None,
        rule_applications: None,
        flags: static_flags(d),
    }
}

fn canonical(t: &Term) -> String {
    let mut names = HashSet::new();
    t.all_names(&mut names);
    let map: HashMap<Name, Name> = names
        .into_iter()
        .map(|n| {
            let b: Name = base_name(&n).into();
            (n, b)
        })
        .collect();
    t.relabel(&map).to_string()
}

fn subterms(t: &Term, out: &mut HashSet<String>) {
    out.insert(canonical(t));
    match t.kind() {
        TermKind::Var(_) | TermKind::Zero | TermKind::One => {}
        TermKind::Lam(_, b) => subterms(b, out),
        TermKind::App(m, n) => {
            subterms(m, out);
            subterms(n, out);
        }
        TermKind::If(c, a, b) => {
            subterms(c, out);
            subterms(a, out);
            subterms(b, out);
        }
    }
}

/// Checks every configuration of the big-step run of `d.term` against the
/// bounds given by `d`, then runs the small-step machine for `space_s`.
pub fn run_report(d: &Derivation, fuel: usize) -> Result<BoundReport, MachineError> {
    let mut r = static_report(d);
    let p = &d.term;
    let m = p.size() as u128;
    let deg = d.degree() as u32;
    let weight = r.weight;
    let mut counts = Flag::new("context_counts");
    let mut steps = Flag::new("steps_le_weight");
    let mut lookups = Flag::new("lookups");
    let mut parts = Flag::new("config_parts");
    let mut instances = Flag::new("subterm_instances");
    let mut subs = HashSet::new();
    subterms(p, &mut subs);
    let (a_lim, n_lim, c_lim) = (
        pow_sat(m, deg + 2).saturating_mul(2),
        pow_sat(m, 2 * deg + 2).saturating_mul(2),
        pow_sat(m, 3 * deg + 3).saturating_mul(2),
    );
    let md = pow_sat(m, deg);
    let mut obs = |v: &View<'_>| {
        let c = v.counts;
        counts.check(v.mctx.len() == c.beta && v.bctx.len() == c.ifs, || {
            format!("#A={} #β={} #C={} #if={}", v.mctx.len(), c.beta, v.bctx.len(), c.ifs)
        });
        let s = (c.beta + c.ifs) as u128;
        steps.check(s <= weight, || format!("#β+#if = {s} > {weight}"));
        let h = c.h as u128;
        let hl = (v.mctx.len() as u128).saturating_mul(md);
        lookups.check(h <= hl, || format!("#h = {h} > {hl}"));
        let (a, n, cc) = (v.mctx.size() as u128, v.subject_size as u128, v.bctx.size() as u128);
        parts.check(a <= a_lim && n <= n_lim && cc <= c_lim, || {
            format!("|A|={a} |N|={n} |C|={cc} against {a_lim}, {n_lim}, {c_lim}")
        });
        if v.rule == MachineRule::Beta && instances.ok {
            let arg = &v.args[v.args.len() - 1];
            let ok = subs.contains(&canonical(arg));
            instances.check(ok, || format!("assigned {arg} is no subterm instance"));
        }
    };
    let (b, stats) = eval_observed(p, fuel, &mut obs)?;
    let mut theorem = Flag::new("space_bound");
    let bound = r.bound;
    theorem.check((stats.space as u128) <= bound, || format!("space {} > {bound}", stats.space));
    let (bs, space_s) = run_small_observed(p, fuel, &mut |_, _| {})?;
    let mut agree = Flag::new("machines_agree");
    agree.check(bs == b && space_s <= stats.space, || {
        format!("small-step gives {bs} in space {space_s}, big-step {b} in space {}", stats.space)
    });
    r.result = Some(b);
    r.space = Some(stats.space);
    r.space_s = Some(space_s);
    r.rule_applications = Some(stats.configurations.saturating_sub(1));
    r.flags.extend([counts, steps, lookups, parts, instances, theorem, agree]);
    Ok(r)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::syntax::parse_term;
    use crate::types::{ATerm, Elaborator, Type};

    fn derive(s: &str) -> Derivation {
        let t = parse_term(s).unwrap();
        Elaborator::new().check_closed(&ATerm::from_term(&t), &Type::Bool).unwrap()
    }

    #[test]
    fn doubling_program() {
        let d = derive(r"(\f. \z. f (f z)) (\x. if x then x else x) 0");
        let r = run_report(&d, 10_000).unwrap();
        assert!(r.all_ok(), "{r}");
        assert_eq!((r.size, r.degree, r.rank), (11, 1, 2));
        assert_eq!(r.bound, 6 * 11u128.pow(6));
        assert_eq!(r.result, Some(true));
        assert_eq!(r.space, r.space_s);
    }

    #[test]
    fn constant() {
        let d = Derivation::b0();
        let r = run_report(&d, 10).unwrap();
        assert_eq!((r.size, r.degree, r.weight, r.space), (1, 0, 1, Some(1)));
        assert!(r.all_ok());
        assert_eq!(r.csv(), "1,0,1,1,1,1,6,0,ok");
    }

    #[test]
    fn saturation() {
        assert_eq!(pow_sat(10, 50), u128::MAX);
        assert_eq!(space_bound(1000, 20), u128::MAX);
    }
}

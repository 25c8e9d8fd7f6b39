//! The big-step machine, run as a left-depth-first traversal of its
//! computation tree.

use super::context::{BContext, Frame, MContext};
use crate::syntax::{Fresh, Name, Term, TermKind, DEFAULT_FUEL};
use std::collections::HashSet;
use std::fmt;
use thiserror::Error;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum MachineRule {
    Ax,
    Beta,
    H,
    /// A conditional whose test has not been evaluated yet.
    If,
    If0,
    If1,
}

impl MachineRule {
    pub fn tag(self) -> &'static str {
        match self {
            MachineRule::Ax => "Ax",
            MachineRule::Beta => "beta",
            MachineRule::H => "h",
            MachineRule::If => "if",
            MachineRule::If0 => "if0",
            MachineRule::If1 => "if1",
        }
    }
}

/// A node of a computation: `C, A ⊨ M`.
#[derive(Debug, Clone, PartialEq)]
pub struct Configuration {
    pub bctx: BContext,
    pub mctx: MContext,
    pub subject: Term,
}

impl Configuration {
    pub fn size(&self) -> usize {
        self.bctx.size() + self.mctx.size() + self.subject.size()
    }
}

impl fmt::Display for Configuration {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}, {} |= {}", self.bctx, self.mctx, self.subject)
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum MachineError {
    #[error("stuck at {config}: {reason}")]
    Stuck { config: Box<Configuration>, reason: String },
    #[error("fuel exhausted after {0} rule applications")]
    OutOfFuel(usize),
}

/// Rule applications on the path from the root to a configuration. `ifs`
/// counts the conditionals whose test is being evaluated.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct PathCounts {
    pub beta: usize,
    pub h: usize,
    pub ifs: usize,
}

/// What an observer sees at each configuration.
pub struct View<'a> {
    pub bctx: &'a BContext,
    pub mctx: &'a MContext,
    pub head: &'a Term,
    /// Arguments, last one first.
    pub args: &'a [Term],
    pub subject_size: usize,
    pub counts: PathCounts,
    pub rule: MachineRule,
}

impl View<'_> {
    pub fn subject(&self) -> Term {
        Term::apps(self.head.clone(), self.args.iter().rev().cloned())
    }

    pub fn size(&self) -> usize {
        self.bctx.size() + self.mctx.size() + self.subject_size
    }

    pub fn configuration(&self) -> Configuration {
        Configuration {
            bctx: self.bctx.clone(),
            mctx: self.mctx.clone(),
            subject: self.subject(),
        }
    }
}

pub trait Observer {
    fn visit(&mut self, v: &View<'_>);
}

impl<F: FnMut(&View<'_>)> Observer for F {
    fn visit(&mut self, v: &View<'_>) {
        self(v)
    }
}

impl Observer for () {
    fn visit(&mut self, _: &View<'_>) {}
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ComputationStats {
    pub result: bool,
    pub configurations: usize,
    pub beta_total: usize,
    pub h_total: usize,
    pub if_total: usize,
    pub max_beta: usize,
    pub max_h: usize,
    pub max_if: usize,
    /// Largest `|C| + |A| + |M|`.
    pub space: usize,
    pub max_mctx: usize,
    pub max_bctx: usize,
    pub max_subject: usize,
}

impl ComputationStats {
    fn record(&mut self, v: &View<'_>) {
        self.configurations += 1;
        match v.rule {
            MachineRule::Beta => self.beta_total += 1,
            MachineRule::H => self.h_total += 1,
            MachineRule::If | MachineRule::If0 | MachineRule::If1 => self.if_total += 1,
            MachineRule::Ax => {}
        }
        self.max_beta = self.max_beta.max(v.counts.beta);
        self.max_h = self.max_h.max(v.counts.h);
        self.max_if = self.max_if.max(v.counts.ifs);
        self.space = self.space.max(v.size());
        self.max_mctx = self.max_mctx.max(v.mctx.size());
        self.max_bctx = self.max_bctx.max(v.bctx.size());
        self.max_subject = self.max_subject.max(v.subject_size);
    }
}

struct Saved {
    mctx_len: usize,
    counts: PathCounts,
}

struct Machine {
    bctx: BContext,
    mctx: MContext,
    head: Term,
    args: Vec<Term>,
    args_size: usize,
    counts: PathCounts,
    saved: Vec<Saved>,
    base_depth: usize,
    fresh: Fresh,
}

impl Machine {
    fn new(bctx: BContext, mctx: MContext, t: &Term, fresh: Fresh) -> Machine {
        let base_depth = bctx.len();
        let mut m = Machine {
            bctx,
            mctx,
            head: Term::zero(),
            args: Vec::new(),
            args_size: 0,
            counts: PathCounts::default(),
            saved: Vec::new(),
            base_depth,
            fresh,
        };
        m.load(t.clone(), Vec::new());
        m
    }

    /// Sets the subject to `t V1 … Vn` where `spine` holds the `V`s last first.
    fn load(&mut self, t: Term, spine: Vec<Term>) {
        self.args = spine;
        self.args_size = self.args.iter().map(Term::size).sum();
        self.push_head(t);
    }

    fn push_head(&mut self, t: Term) {
        let (h, extra) = t.spine();
        for a in extra.into_iter().rev() {
            self.args_size += a.size();
            self.args.push(a);
        }
        self.head = h;
    }

    fn pop_arg(&mut self) -> Option<Term> {
        let a = self.args.pop()?;
        self.args_size -= a.size();
        Some(a)
    }

    fn view(&self, rule: MachineRule) -> View<'_> {
        View {
            bctx: &self.bctx,
            mctx: &self.mctx,
            head: &self.head,
            args: &self.args,
            subject_size: self.head.size() + self.args_size,
            counts: self.counts,
            rule,
        }
    }

    fn stuck(&self, reason: &str) -> MachineError {
        MachineError::Stuck {
            config: Box::new(self.view(MachineRule::Ax).configuration()),
            reason: reason.to_string(),
        }
    }

    fn rule(&self) -> Result<MachineRule, MachineError> {
        Ok(match self.head.kind() {
            TermKind::Zero | TermKind::One if self.args.is_empty() => MachineRule::Ax,
            TermKind::Zero | TermKind::One => return Err(self.stuck("boolean applied to arguments")),
            TermKind::Lam(..) if !self.args.is_empty() => MachineRule::Beta,
            TermKind::Lam(..) => return Err(self.stuck("abstraction without argument")),
            TermKind::Var(x) if self.mctx.lookup(x).is_some() => MachineRule::H,
            TermKind::Var(x) => return Err(self.stuck(&format!("no assignment for {x}"))),
            TermKind::If(..) => MachineRule::If,
            TermKind::App(..) => unreachable!("heads are never applications"),
        })
    }

    fn run(&mut self, fuel: usize, obs: &mut dyn Observer) -> Result<bool, MachineError> {
        for _ in 0..fuel {
            let rule = self.rule()?;
            obs.visit(&self.view(rule));
            match self.head.kind().clone() {
                TermKind::Zero | TermKind::One => {
                    let b = self.head.as_bool().unwrap();
                    if self.bctx.len() == self.base_depth {
                        return Ok(b);
                    }
                    let f = self.bctx.pop().unwrap();
                    let s = self.saved.pop().unwrap();
                    self.mctx.truncate(s.mctx_len);
                    self.counts = s.counts;
                    let n = if b { f.then0 } else { f.else1 };
                    self.load(n, f.spine.into_iter().rev().collect());
                }
                TermKind::Lam(x, body) => {
                    let n = self.pop_arg().unwrap();
                    let x2: Name = self.fresh.fresh(&x);
                    self.mctx.push(x2.clone(), n);
                    self.counts.beta += 1;
                    self.push_head(body.rename_free(&x, &x2));
                }
                TermKind::Var(x) => {
                    let n = self.mctx.lookup(&x).unwrap().clone();
                    self.counts.h += 1;
                    self.push_head(n);
                }
                TermKind::If(m, n0, n1) => {
                    let spine: Vec<Term> = std::mem::take(&mut self.args).into_iter().rev().collect();
                    self.args_size = 0;
                    self.saved.push(Saved {
                        mctx_len: self.mctx.len(),
                        counts: self.counts,
                    });
                    self.bctx.push(Frame::new(n0, n1, spine));
                    self.counts.ifs += 1;
                    self.push_head(m);
                }
                TermKind::App(..) => unreachable!(),
            }
        }
        Err(MachineError::OutOfFuel(fuel))
    }
}

fn supply_for(mctx: &MContext, t: &Term, bctx: &BContext) -> Fresh {
    let mut names = HashSet::new();
    t.all_names(&mut names);
    for (x, n) in mctx.entries() {
        names.insert(x.clone());
        n.all_names(&mut names);
    }
    for f in bctx.frames() {
        f.then0.all_names(&mut names);
        f.else1.all_names(&mut names);
        f.spine.iter().for_each(|v| v.all_names(&mut names));
    }
    Fresh::avoiding(&names)
}

/// Evaluates `C, A ⊨ t`, reporting every configuration to `obs`.
pub fn eval_from(
    bctx: &BContext,
    mctx: &MContext,
    t: &Term,
    fuel: usize,
    obs: &mut dyn Observer,
) -> Result<bool, MachineError> {
    let fresh = supply_for(mctx, t, bctx);
    Machine::new(bctx.clone(), mctx.clone(), t, fresh).run(fuel, obs)
}

/// Evaluates a program from the empty contexts.
pub fn eval_observed(p: &Term, fuel: usize, obs: &mut dyn Observer) -> Result<(bool, ComputationStats), MachineError> {
    let mut stats = ComputationStats::default();
    let b = eval_from(
        &BContext::hole(),
        &MContext::new(),
        p,
        fuel,
        &mut |v: &View<'_>| {
            stats.record(v);
            obs.visit(v);
        },
    )?;
    stats.result = b;
    Ok((b, stats))
}

pub fn eval_big(p: &Term) -> Result<(bool, ComputationStats), MachineError> {
    eval_observed(p, DEFAULT_FUEL, &mut ())
}

/// Maximal configuration size over the computation.
pub fn space(p: &Term) -> Result<usize, MachineError> {
    eval_big(p).map(|(_, s)| s.space)
}

/// A materialized computation.
#[derive(Debug, Clone, PartialEq)]
pub struct ComputationTree {
    pub config: Configuration,
    pub rule: MachineRule,
    pub counts: PathCounts,
    pub result: bool,
    pub children: Vec<ComputationTree>,
}

impl ComputationTree {
    /// Nodes in left-depth-first order.
    pub fn preorder(&self) -> Vec<&ComputationTree> {
        let mut out = Vec::new();
        let mut stack = vec![self];
        while let Some(n) = stack.pop() {
            out.push(n);
            stack.extend(n.children.iter().rev());
        }
        out
    }

    pub fn node_count(&self) -> usize {
        self.preorder().len()
    }

    pub fn height(&self) -> usize {
        1 + self.children.iter().map(|c| c.height()).max().unwrap_or(0)
    }
}

impl fmt::Display for ComputationTree {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fn go(t: &ComputationTree, depth: usize, f: &mut fmt::Formatter<'_>) -> fmt::Result {
            writeln!(
                f,
                "{:indent$}({}) {} => {}",
                "",
                t.rule.tag(),
                t.config,
                u8::from(!t.result),
                indent = 2 * depth
            )?;
            t.children.iter().try_for_each(|c| go(c, depth + 1, f))
        }
        go(self, 0, f)
    }
}

/// Runs the machine and builds the computation tree from the visit order.
pub fn computation_tree(p: &Term, fuel: usize) -> Result<ComputationTree, MachineError> {
    let mut visits: Vec<(Configuration, MachineRule, PathCounts)> = Vec::new();
    eval_observed(p, fuel, &mut |v: &View<'_>| visits.push((v.configuration(), v.rule, v.counts)))?;
    let mut it = visits.into_iter();
    fn build(it: &mut impl Iterator<Item = (Configuration, MachineRule, PathCounts)>) -> ComputationTree {
        let (config, rule, counts) = it.next().expect("preorder is complete");
        match rule {
            MachineRule::Ax => {
                let result = config.subject.as_bool().unwrap();
                ComputationTree {
                    config,
                    rule,
                    counts,
                    result,
                    children: vec![],
                }
            }
            MachineRule::Beta | MachineRule::H => {
                let c = build(it);
                ComputationTree {
                    config,
                    rule,
                    counts,
                    result: c.result,
                    children: vec![c],
                }
            }
            MachineRule::If | MachineRule::If0 | MachineRule::If1 => {
                let test = build(it);
                let branch = build(it);
                ComputationTree {
                    config,
                    rule: if test.result { MachineRule::If0 } else { MachineRule::If1 },
                    counts,
                    result: branch.result,
                    children: vec![test, branch],
                }
            }
        }
    }
    Ok(build(&mut it))
}

/// Evaluates `t` under `c1, a` and under `outer[c1], a`; true when both give
/// the same boolean.
pub fn check_weakening(c1: &BContext, a: &MContext, t: &Term, outer: &BContext) -> Result<bool, MachineError> {
    let b1 = eval_from(c1, a, t, DEFAULT_FUEL, &mut ())?;
    let b2 = eval_from(&c1.inside(outer), a, t, DEFAULT_FUEL, &mut ())?;
    Ok(b1 == b2)
}

/// One comma-separated record per rule application: rule, |C|, |A|, |M|, running max.
pub struct CsvTrace<W: std::io::Write> {
    out: W,
    max: usize,
}

impl<W: std::io::Write> CsvTrace<W> {
    pub fn new(mut out: W) -> CsvTrace<W> {
        let _ = writeln!(out, "rule,bctx,mctx,subject,max");
        CsvTrace { out, max: 0 }
    }

    pub fn into_inner(self) -> W {
        self.out
    }
}

impl<W: std::io::Write> Observer for CsvTrace<W> {
    fn visit(&mut self, v: &View<'_>) {
        self.max = self.max.max(v.size());
        let _ = writeln!(
            self.out,
            "{},{},{},{},{}",
            v.rule.tag(),
            v.bctx.size(),
            v.mctx.size(),
            v.subject_size,
            self.max
        );
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::syntax::{name, parse_term};

    fn p(s: &str) -> Term {
        parse_term(s).unwrap()
    }

    #[test]
    fn booleans_and_identity() {
        assert!(eval_big(&p("0")).unwrap().0);
        assert_eq!(space(&p("0")).unwrap(), 1);
        let (b, s) = eval_big(&p(r"(\x. x) 1")).unwrap();
        assert!(!b);
        assert_eq!(s.configurations, 3);
        assert_eq!(space(&p(r"(\x. x) 0")).unwrap(), 3);
    }

    #[test]
    fn doubling_program() {
        let m2 = p(r"(\f. \z. f (f z)) (\x. if x then x else x) 0");
        let (b, s) = eval_big(&m2).unwrap();
        assert!(b);
        assert_eq!(s.beta_total, 5);
        assert_eq!(s.if_total, 3);
        let tree = computation_tree(&m2, 1000).unwrap();
        assert_eq!(tree.node_count(), s.configurations);
    }

    #[test]
    fn stuck_on_open_term() {
        assert!(matches!(eval_big(&p("y 0")), Err(MachineError::Stuck { .. })));
        assert!(matches!(eval_big(&p(r"\x. x")), Err(MachineError::Stuck { .. })));
    }

    #[test]
    fn weakening_under_outer_frames() {
        let outer = BContext::from_frames([Frame::new(p("0"), p("1"), vec![])]);
        assert!(check_weakening(&BContext::hole(), &MContext::new(), &p("0"), &outer).unwrap());
        let a = MContext::from_entries([(name("x"), p("0"))]);
        assert!(check_weakening(&BContext::hole(), &a, &p("x"), &outer).unwrap());
    }

    #[test]
    fn fresh_names_avoid_program_names() {
        let t = p(r"(\x#1. x#1) 0");
        let tree = computation_tree(&t, 100).unwrap();
        let (x, _) = tree.children[0].config.mctx.last().unwrap().clone();
        assert_eq!(&*x, "x#2");
    }
}

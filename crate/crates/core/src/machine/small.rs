//! The small-step machine with an m-stack, and the map from big-step
//! computations to its configurations.

use super::big::{ComputationTree, Configuration, MachineError, MachineRule};
use super::context::{BContext, Frame, MContext};
use crate::syntax::{Fresh, Term, TermKind, DEFAULT_FUEL};
use std::collections::HashSet;
use std::fmt;

/// `⟨S, C, A ≻ M⟩`.
#[derive(Debug, Clone, PartialEq)]
pub struct SmallConfig {
    /// Bottom first.
    pub stack: Vec<MContext>,
    pub bctx: BContext,
    pub mctx: MContext,
    pub subject: Term,
}

impl SmallConfig {
    pub fn initial(p: &Term) -> SmallConfig {
        SmallConfig {
            stack: Vec::new(),
            bctx: BContext::hole(),
            mctx: MContext::new(),
            subject: p.clone(),
        }
    }

    pub fn stack_size(&self) -> usize {
        self.stack.iter().map(MContext::size).sum()
    }

    /// `|S| + |C| + |A| + |M|`.
    pub fn size(&self) -> usize {
        self.stack_size() + self.bctx.size() + self.mctx.size() + self.subject.size()
    }

    /// `S·A` as one m-context.
    pub fn flatten(&self) -> MContext {
        let mut out = MContext::new();
        for a in &self.stack {
            out.append(a);
        }
        out.append(&self.mctx);
        out
    }

    fn lookup(&self, x: &str) -> Option<&Term> {
        self.mctx
            .lookup(x)
            .or_else(|| self.stack.iter().rev().find_map(|a| a.lookup(x)))
    }

    fn stuck(&self, reason: String) -> MachineError {
        MachineError::Stuck {
            config: Box::new(Configuration {
                bctx: self.bctx.clone(),
                mctx: self.flatten(),
                subject: self.subject.clone(),
            }),
            reason,
        }
    }

    /// The rule that applies, `None` for a final configuration.
    pub fn rule(&self) -> Result<Option<MachineRule>, MachineError> {
        let (head, args) = self.subject.spine();
        Ok(Some(match head.kind() {
            TermKind::Zero | TermKind::One if args.is_empty() => {
                if self.bctx.is_empty() {
                    return Ok(None);
                }
                if head.as_bool().unwrap() {
                    MachineRule::If0
                } else {
                    MachineRule::If1
                }
            }
            TermKind::Lam(..) if !args.is_empty() => MachineRule::Beta,
            TermKind::Var(x) if self.lookup(x).is_some() => MachineRule::H,
            TermKind::If(..) => MachineRule::If,
            _ => return Err(self.stuck("no rule applies".into())),
        }))
    }

    /// Rewrites the configuration in place by one rule. Returns the rule used,
    /// or `None` when the configuration is final.
    pub fn step_mut(&mut self, fresh: &mut Fresh) -> Result<Option<MachineRule>, MachineError> {
        let Some(rule) = self.rule()? else {
            return Ok(None);
        };
        let (head, mut args) = self.subject.spine();
        match head.kind() {
            TermKind::Lam(x, body) => {
                let n = args.remove(0);
                let x2 = fresh.fresh(x);
                self.mctx.push(x2.clone(), n);
                self.subject = Term::apps(body.rename_free(x, &x2), args);
            }
            TermKind::Var(x) => {
                let n = self.lookup(x).unwrap().clone();
                self.subject = Term::apps(n, args);
            }
            TermKind::If(m, n0, n1) => {
                self.stack.push(std::mem::take(&mut self.mctx));
                self.bctx.push(Frame::new(n0.clone(), n1.clone(), args));
                self.subject = m.clone();
            }
            TermKind::Zero | TermKind::One => {
                let f = self.bctx.pop().unwrap();
                self.mctx = self.stack.pop().expect("stack and context frames agree");
                self.subject = f.select(head.as_bool().unwrap());
            }
            TermKind::App(..) => unreachable!(),
        }
        Ok(Some(rule))
    }
}

impl fmt::Display for SmallConfig {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let stack: Vec<String> = self.stack.iter().map(|a| a.to_string()).collect();
        let s = if stack.is_empty() { "ε".to_string() } else { stack.join("·") };
        write!(f, "<{s}, {}, {} > {}>", self.bctx, self.mctx, self.subject)
    }
}

pub enum SmallStep {
    Next(MachineRule, SmallConfig),
    Final(bool),
}

/// One transition. The fresh-name supply is the only state besides the
/// configuration.
pub fn small_step(c: &SmallConfig, fresh: &mut Fresh) -> Result<SmallStep, MachineError> {
    let mut next = c.clone();
    match next.step_mut(fresh)? {
        Some(rule) => Ok(SmallStep::Next(rule, next)),
        None => Ok(SmallStep::Final(c.subject.as_bool().unwrap())),
    }
}

pub fn program_supply(p: &Term) -> Fresh {
    let mut names = HashSet::new();
    p.all_names(&mut names);
    Fresh::avoiding(&names)
}

/// Runs from `⟨ε, ∘, ε ≻ p⟩`, calling `visit` on every configuration with the
/// rule about to be applied.
pub fn run_small_observed(
    p: &Term,
    fuel: usize,
    visit: &mut dyn FnMut(&SmallConfig, Option<MachineRule>),
) -> Result<(bool, usize), MachineError> {
    let mut fresh = program_supply(p);
    let mut c = SmallConfig::initial(p);
    let mut space = 0;
    for _ in 0..=fuel {
        space = space.max(c.size());
        let rule = c.rule()?;
        visit(&c, rule);
        if rule.is_none() {
            return Ok((c.subject.as_bool().unwrap(), space));
        }
        c.step_mut(&mut fresh)?;
    }
    Err(MachineError::OutOfFuel(fuel))
}

/// The result and the largest configuration size.
pub fn run_small(p: &Term) -> Result<(bool, usize), MachineError> {
    run_small_observed(p, DEFAULT_FUEL, &mut |_, _| {})
}

/// The whole sequence of configurations.
pub fn small_trace(p: &Term, fuel: usize) -> Result<Vec<SmallConfig>, MachineError> {
    let mut out = Vec::new();
    run_small_observed(p, fuel, &mut |c, _| out.push(c.clone()))?;
    Ok(out)
}

/// Maps every configuration of a big-step computation, in left-depth-first
/// order, to a small-step configuration.
pub fn translate_bigstep(tree: &ComputationTree) -> Vec<SmallConfig> {
    fn go(t: &ComputationTree, stack: &[MContext], local: &MContext, out: &mut Vec<SmallConfig>) {
        out.push(SmallConfig {
            stack: stack.to_vec(),
            bctx: t.config.bctx.clone(),
            mctx: local.clone(),
            subject: t.config.subject.clone(),
        });
        match t.rule {
            MachineRule::Ax => {}
            MachineRule::Beta => {
                let c = &t.children[0];
                let (x, n) = c.config.mctx.last().expect("beta extends the context").clone();
                let mut a = local.clone();
                a.push(x, n);
                go(c, stack, &a, out);
            }
            MachineRule::H => go(&t.children[0], stack, local, out),
            MachineRule::If | MachineRule::If0 | MachineRule::If1 => {
                let mut inner = stack.to_vec();
                inner.push(local.clone());
                go(&t.children[0], &inner, &MContext::new(), out);
                go(&t.children[1], stack, local, out);
            }
        }
    }
    let mut out = Vec::new();
    go(tree, &[], &MContext::new(), &mut out);
    out
}

use crate::syntax::{Name, Term};
use std::collections::HashMap;
use std::fmt;

/// A sequence of assignments `x := N` with distinct variables.
#[derive(Debug, Clone, Default)]
pub struct MContext {
    entries: Vec<(Name, Term)>,
    index: HashMap<Name, usize>,
    size: usize,
}

impl PartialEq for MContext {
    fn eq(&self, other: &MContext) -> bool {
        self.entries == other.entries
    }
}

impl MContext {
    pub fn new() -> MContext {
        MContext::default()
    }

    pub fn from_entries(entries: impl IntoIterator<Item = (Name, Term)>) -> MContext {
        let mut a = MContext::new();
        for (x, t) in entries {
            a.push(x, t);
        }
        a
    }

    /// Appends an assignment. Panics if the variable is already assigned.
    pub fn push(&mut self, x: Name, t: Term) {
        self.size += t.size() + 1;
        let old = self.index.insert(x.clone(), self.entries.len());
        assert!(old.is_none(), "variable {x} assigned twice");
        self.entries.push((x, t));
    }

    pub fn truncate(&mut self, len: usize) {
        while self.entries.len() > len {
            let (x, t) = self.entries.pop().unwrap();
            self.index.remove(&x);
            self.size -= t.size() + 1;
        }
    }

    /// Removes and returns the assignments from position `at` on.
    pub fn split_off(&mut self, at: usize) -> MContext {
        let tail: Vec<(Name, Term)> = self.entries[at..].to_vec();
        self.truncate(at);
        MContext::from_entries(tail)
    }

    pub fn append(&mut self, other: &MContext) {
        for (x, t) in &other.entries {
            self.push(x.clone(), t.clone());
        }
    }

    pub fn lookup(&self, x: &str) -> Option<&Term> {
        self.index.get(x).map(|i| &self.entries[*i].1)
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Σ (|N| + 1) over the assignments.
    pub fn size(&self) -> usize {
        self.size
    }

    pub fn entries(&self) -> &[(Name, Term)] {
        &self.entries
    }

    pub fn last(&self) -> Option<&(Name, Term)> {
        self.entries.last()
    }

    /// `M[N_n/x_n]…[N_1/x_1]`: the last assignment is substituted first.
    pub fn closure(&self, t: &Term) -> Term {
        self.entries.iter().rev().fold(t.clone(), |acc, (x, n)| acc.subst(x, n))
    }
}

impl fmt::Display for MContext {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.entries.is_empty() {
            return write!(f, "ε");
        }
        let parts: Vec<String> = self.entries.iter().map(|(x, t)| format!("{x}:={t}")).collect();
        write!(f, "[{}]", parts.join(", "))
    }
}

/// `(if ∘ then N0 else N1) V1 … Vn`.
#[derive(Debug, Clone, PartialEq)]
pub struct Frame {
    pub then0: Term,
    pub else1: Term,
    pub spine: Vec<Term>,
}

impl Frame {
    pub fn new(then0: Term, else1: Term, spine: Vec<Term>) -> Frame {
        Frame { then0, else1, spine }
    }

    /// Contribution to the context size: the `if` node and everything but the hole.
    pub fn size(&self) -> usize {
        1 + self.then0.size() + self.else1.size() + self.spine.iter().map(Term::size).sum::<usize>()
    }

    pub fn fill(&self, t: Term) -> Term {
        Term::apps(
            Term::ite(t, self.then0.clone(), self.else1.clone()),
            self.spine.iter().cloned(),
        )
    }

    /// The branch chosen by a test result, applied to the spine.
    pub fn select(&self, b: bool) -> Term {
        let n = if b { &self.then0 } else { &self.else1 };
        Term::apps(n.clone(), self.spine.iter().cloned())
    }
}

/// A stack of frames, outermost first. The empty stack is the hole.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct BContext {
    frames: Vec<Frame>,
    sum: usize,
}

impl BContext {
    pub fn hole() -> BContext {
        BContext::default()
    }

    pub fn from_frames(frames: impl IntoIterator<Item = Frame>) -> BContext {
        let mut c = BContext::hole();
        for f in frames {
            c.push(f);
        }
        c
    }

    pub fn push(&mut self, f: Frame) {
        self.sum += f.size();
        self.frames.push(f);
    }

    pub fn pop(&mut self) -> Option<Frame> {
        let f = self.frames.pop()?;
        self.sum -= f.size();
        Some(f)
    }

    pub fn frames(&self) -> &[Frame] {
        &self.frames
    }

    pub fn len(&self) -> usize {
        self.frames.len()
    }

    pub fn is_empty(&self) -> bool {
        self.frames.is_empty()
    }

    /// Size of the term obtained by putting a variable in the hole; 0 for the
    /// hole itself.
    pub fn size(&self) -> usize {
        if self.frames.is_empty() {
            0
        } else {
            1 + self.sum
        }
    }

    /// `outer[self]`.
    pub fn inside(&self, outer: &BContext) -> BContext {
        BContext::from_frames(outer.frames.iter().chain(&self.frames).cloned())
    }

    pub fn fill(&self, t: Term) -> Term {
        self.frames.iter().rev().fold(t, |acc, f| f.fill(acc))
    }
}

impl fmt::Display for BContext {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.frames.is_empty() {
            return write!(f, "∘");
        }
        write!(f, "{}", self.fill(Term::var("∘")))
    }
}

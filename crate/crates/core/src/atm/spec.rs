//! Alternating Turing machines over {0,1} with binary-coded states.

use serde::Deserialize;
use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use thiserror::Error;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Kind {
    Accept,
    Reject,
    Universal,
    Existential,
}

impl Kind {
    /// The pair of booleans encoding the kind: `A = ⟨1,0⟩`, `R = ⟨1,1⟩`,
    /// `∧ = ⟨0,1⟩`, `∨ = ⟨0,0⟩`.
    pub fn bits(self) -> (u8, u8) {
        match self {
            Kind::Accept => (1, 0),
            Kind::Reject => (1, 1),
            Kind::Universal => (0, 1),
            Kind::Existential => (0, 0),
        }
    }

    pub fn from_bits(b: (u8, u8)) -> Kind {
        match b {
            (1, 0) => Kind::Accept,
            (1, _) => Kind::Reject,
            (_, 1) => Kind::Universal,
            _ => Kind::Existential,
        }
    }

    pub fn is_final(self) -> bool {
        matches!(self, Kind::Accept | Kind::Reject)
    }

    fn parse(s: &str) -> Option<Kind> {
        Some(match s {
            "A" | "accept" => Kind::Accept,
            "R" | "reject" => Kind::Reject,
            "∧" | "U" | "and" => Kind::Universal,
            "∨" | "E" | "or" => Kind::Existential,
            _ => return None,
        })
    }
}

impl fmt::Display for Kind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Kind::Accept => "A",
            Kind::Reject => "R",
            Kind::Universal => "∧",
            Kind::Existential => "∨",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Move {
    Left,
    Right,
}

pub type Code = Vec<u8>;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Action {
    pub write: u8,
    pub next: Code,
    pub dir: Move,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AtmSpec {
    pub q_bits: usize,
    pub states: BTreeMap<Code, Kind>,
    pub initial: Code,
    /// `delta[j]` maps (state, scanned bit) to an action, for `j` in 0 and 1.
    pub delta: [BTreeMap<(Code, u8), Action>; 2],
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SpecError {
    #[error("cannot read machine file: {0}")]
    Syntax(String),
    #[error("bad state code {0:?}: expected {1} bits")]
    BadCode(String, usize),
    #[error("unknown kind {0:?}")]
    BadKind(String),
    #[error("state {0} declared twice")]
    DuplicateState(String),
    #[error("undeclared state {0}")]
    UnknownState(String),
    #[error("bit must be 0 or 1, found {0}")]
    BadBit(u8),
    #[error("move must be L or R, found {0:?}")]
    BadMove(String),
    #[error("component must be 1 or 2, found {0}")]
    BadComponent(u8),
    #[error("transition {0} defined twice")]
    DuplicateTransition(String),
    #[error("missing transition {0}")]
    MissingTransition(String),
    #[error("final state {0} has outgoing transitions")]
    FinalWithTransitions(String),
}

pub fn show_code(c: &[u8]) -> String {
    c.iter().map(|b| char::from(b'0' + b)).collect()
}

fn parse_code(s: &str, q: usize) -> Result<Code, SpecError> {
    let bits: Option<Code> = s
        .chars()
        .map(|c| match c {
            '0' => Some(0),
            '1' => Some(1),
            _ => None,
        })
        .collect();
    match bits {
        Some(b) if b.len() == q => Ok(b),
        _ => Err(SpecError::BadCode(s.to_string(), q)),
    }
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawSpec {
    q_bits: usize,
    initial: String,
    states: Vec<RawState>,
    #[serde(default)]
    transitions: Vec<RawTransition>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawState {
    code: String,
    kind: String,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawTransition {
    component: u8,
    state: String,
    read: u8,
    write: u8,
    next: String,
    #[serde(rename = "move")]
    dir: String,
}

impl AtmSpec {
    /// Reads the TOML machine format.
    pub fn from_toml(src: &str) -> Result<AtmSpec, SpecError> {
        let raw: RawSpec = toml::from_str(src).map_err(|e| SpecError::Syntax(e.to_string()))?;
        let q = raw.q_bits;
        let mut states = BTreeMap::new();
        for s in &raw.states {
            let code = parse_code(&s.code, q)?;
            let kind = Kind::parse(&s.kind).ok_or_else(|| SpecError::BadKind(s.kind.clone()))?;
            if states.insert(code, kind).is_some() {
                return Err(SpecError::DuplicateState(s.code.clone()));
            }
        }
        let initial = parse_code(&raw.initial, q)?;
        let mut delta: [BTreeMap<(Code, u8), Action>; 2] = Default::default();
        for t in &raw.transitions {
            let state = parse_code(&t.state, q)?;
            let next = parse_code(&t.next, q)?;
            for b in [t.read, t.write] {
                if b > 1 {
                    return Err(SpecError::BadBit(b));
                }
            }
            let dir = match t.dir.as_str() {
                "L" => Move::Left,
                "R" => Move::Right,
                other => return Err(SpecError::BadMove(other.to_string())),
            };
            if !(1..=2).contains(&t.component) {
                return Err(SpecError::BadComponent(t.component));
            }
            let act = Action { write: t.write, next, dir };
            let key = (state, t.read);
            if delta[t.component as usize - 1].insert(key, act).is_some() {
                return Err(SpecError::DuplicateTransition(format!(
                    "δ{}({}, {})",
                    t.component, t.state, t.read
                )));
            }
        }
        let spec = AtmSpec { q_bits: q, states, initial, delta };
        spec.validate()?;
        Ok(spec)
    }

    /// Checks that every referenced state is declared, and that the
    /// transition relation is total on non-final states and empty on final
    /// ones.
    pub fn validate(&self) -> Result<(), SpecError> {
        let known = |c: &Code| {
            if self.states.contains_key(c) {
                Ok(())
            } else {
                Err(SpecError::UnknownState(show_code(c)))
            }
        };
        known(&self.initial)?;
        for d in &self.delta {
            for ((s, r), a) in d {
                known(s)?;
                known(&a.next)?;
                if self.states[s].is_final() {
                    return Err(SpecError::FinalWithTransitions(show_code(s)));
                }
                if *r > 1 || a.write > 1 {
                    return Err(SpecError::BadBit((*r).max(a.write)));
                }
            }
        }
        for (s, k) in &self.states {
            if k.is_final() {
                continue;
            }
            for (j, d) in self.delta.iter().enumerate() {
                for r in 0..=1 {
                    if !d.contains_key(&(s.clone(), r)) {
                        return Err(SpecError::MissingTransition(format!(
                            "δ{}({}, {r})",
                            j + 1,
                            show_code(s)
                        )));
                    }
                }
            }
        }
        Ok(())
    }

    pub fn kind(&self, s: &[u8]) -> Kind {
        self.states[s]
    }

    pub fn step(&self, j: usize, s: &[u8], read: u8) -> Option<&Action> {
        self.delta[j].get(&(s.to_vec(), read))
    }

    /// Every state code of width `q_bits`, declared or not.
    pub fn all_codes(&self) -> Vec<Code> {
        (0..1usize << self.q_bits)
            .map(|n| (0..self.q_bits).map(|i| ((n >> (self.q_bits - 1 - i)) & 1) as u8).collect())
            .collect()
    }

    pub fn used_states(&self) -> BTreeSet<Code> {
        self.states.keys().cloned().collect()
    }
}

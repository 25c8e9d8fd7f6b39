//! Direct evaluation of a time-bounded alternating machine.
//!
//! The tape has the length of the input. The head ranges over `0..=len`,
//! where position `len` reads the blank 0 and ignores writes. Moving right at
//! `len` or left at 0 leaves the head in place.

use super::spec::{AtmSpec, Code, Kind, Move};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("time bound exhausted before the verdict was determined")]
pub struct FuelExhausted;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MachineState {
    pub tape: Vec<u8>,
    pub pos: usize,
    pub state: Code,
}

impl MachineState {
    pub fn initial(spec: &AtmSpec, input: &[u8]) -> MachineState {
        MachineState {
            tape: input.to_vec(),
            pos: 0,
            state: spec.initial.clone(),
        }
    }

    pub fn scanned(&self) -> u8 {
        self.tape.get(self.pos).copied().unwrap_or(0)
    }

    /// The successor along `δ_{j+1}`, or `None` from a final state.
    pub fn successor(&self, spec: &AtmSpec, j: usize) -> Option<MachineState> {
        let a = spec.step(j, &self.state, self.scanned())?;
        let mut next = self.clone();
        if next.pos < next.tape.len() {
            next.tape[next.pos] = a.write;
        }
        next.pos = match a.dir {
            Move::Right => (next.pos + 1).min(next.tape.len()),
            Move::Left => next.pos.saturating_sub(1),
        };
        next.state = a.next.clone();
        Some(next)
    }
}

/// Acceptance within `time` steps along every branch. A branch that is still
/// in a non-final state when time runs out rejects.
pub fn atm_oracle(spec: &AtmSpec, input: &[u8], time: u64) -> bool {
    fn go(spec: &AtmSpec, c: &MachineState, t: u64) -> bool {
        let kind = spec.kind(&c.state);
        match kind {
            Kind::Accept => return true,
            Kind::Reject => return false,
            _ if t == 0 => return false,
            _ => {}
        }
        let child = |j: usize| go(spec, &c.successor(spec, j).expect("total on non-final states"), t - 1);
        match kind {
            Kind::Universal => child(0) && child(1),
            _ => child(0) || child(1),
        }
    }
    go(spec, &MachineState::initial(spec, input), time)
}

/// Like [`atm_oracle`], but fails when the verdict depends on a branch that
/// did not halt within `fuel` steps.
pub fn atm_oracle_strict(spec: &AtmSpec, input: &[u8], fuel: u64) -> Result<bool, FuelExhausted> {
    fn go(spec: &AtmSpec, c: &MachineState, t: u64) -> Option<bool> {
        let kind = spec.kind(&c.state);
        match kind {
            Kind::Accept => return Some(true),
            Kind::Reject => return Some(false),
            _ if t == 0 => return None,
            _ => {}
        }
        let a = go(spec, &c.successor(spec, 0)?, t - 1);
        let b = go(spec, &c.successor(spec, 1)?, t - 1);
        match (kind, a, b) {
            (Kind::Universal, Some(false), _) | (Kind::Universal, _, Some(false)) => Some(false),
            (Kind::Universal, Some(true), Some(true)) => Some(true),
            (Kind::Existential, Some(true), _) | (Kind::Existential, _, Some(true)) => Some(true),
            (Kind::Existential, Some(false), Some(false)) => Some(false),
            _ => None,
        }
    }
    go(spec, &MachineState::initial(spec, input), fuel).ok_or(FuelExhausted)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::atm::machines;

    #[test]
    fn always_accept() {
        let m = machines::always_accept();
        assert!(atm_oracle(&m, &[], 0));
        assert_eq!(atm_oracle_strict(&m, &[1, 0], 0), Ok(true));
    }

    #[test]
    fn contains_a_one() {
        let m = machines::contains_one();
        assert!(!atm_oracle(&m, &[0, 0], 2));
        assert!(atm_oracle(&m, &[0, 1], 2));
        assert!(atm_oracle(&m, &[0, 0, 1], 3));
        assert!(!atm_oracle(&m, &[0, 0, 1], 2));
        assert_eq!(atm_oracle_strict(&m, &[0, 1], 2), Ok(true));
        assert_eq!(atm_oracle_strict(&m, &[0, 0], 50), Err(FuelExhausted));
    }

    #[test]
    fn universal_root() {
        let m = machines::zero_then_one();
        // the first child sees a 1 at the start and rejects
        assert!(!atm_oracle(&m, &[1, 1], 10));
        assert_eq!(atm_oracle_strict(&m, &[1, 1], 10), Ok(false));
        assert!(atm_oracle(&m, &[0, 1], 10));
        assert!(!atm_oracle(&m, &[0, 0, 0], 10));
    }

    #[test]
    fn head_stays_on_the_tape() {
        let m = machines::contains_one();
        let mut c = MachineState::initial(&m, &[0]);
        c = c.successor(&m, 1).unwrap();
        assert_eq!((c.pos, c.scanned()), (1, 0));
        c = c.successor(&m, 1).unwrap();
        assert_eq!(c.pos, 1);
        assert_eq!(c.tape, vec![0]);
    }
}

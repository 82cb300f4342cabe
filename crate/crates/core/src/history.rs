//! Interaction histories over finite action and observation alphabets.
//!
//! Time is 1-based: `h.action(1)` is the first action, and the empty
//! history has length 0.

use crate::error::{Error, Result};

pub type ActionSymbol = usize;
pub type ObservationSymbol = usize;

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct InteractionHistory {
    n_actions: usize,
    n_observations: usize,
    pairs: Vec<(ActionSymbol, ObservationSymbol)>,
}

impl InteractionHistory {
    pub fn new(n_actions: usize, n_observations: usize) -> Self {
        assert!(
            n_actions > 0 && n_observations > 0,
            "alphabets must be nonempty"
        );
        InteractionHistory {
            n_actions,
            n_observations,
            pairs: Vec::new(),
        }
    }

    pub fn from_pairs(
        n_actions: usize,
        n_observations: usize,
        pairs: &[(ActionSymbol, ObservationSymbol)],
    ) -> Result<Self> {
        let mut h = Self::new(n_actions, n_observations);
        for &(a, o) in pairs {
            h.push(a, o)?;
        }
        Ok(h)
    }

    pub fn n_actions(&self) -> usize {
        self.n_actions
    }

    pub fn n_observations(&self) -> usize {
        self.n_observations
    }

    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }

    pub fn pairs(&self) -> &[(ActionSymbol, ObservationSymbol)] {
        &self.pairs
    }

    /// Returns `hao` without modifying `self`.
    pub fn extend(&self, a: ActionSymbol, o: ObservationSymbol) -> Result<Self> {
        let mut h = self.clone();
        h.push(a, o)?;
        Ok(h)
    }

    pub fn push(&mut self, a: ActionSymbol, o: ObservationSymbol) -> Result<()> {
        if a >= self.n_actions {
            return Err(Error::AlphabetViolation {
                symbol: a,
                size: self.n_actions,
            });
        }
        if o >= self.n_observations {
            return Err(Error::AlphabetViolation {
                symbol: o,
                size: self.n_observations,
            });
        }
        self.pairs.push((a, o));
        Ok(())
    }

    pub fn pop(&mut self) -> Option<(ActionSymbol, ObservationSymbol)> {
        self.pairs.pop()
    }

    pub fn prefix(&self, len: usize) -> Self {
        InteractionHistory {
            n_actions: self.n_actions,
            n_observations: self.n_observations,
            pairs: self.pairs[..len.min(self.pairs.len())].to_vec(),
        }
    }

    pub fn is_prefix_of(&self, other: &InteractionHistory) -> bool {
        self.pairs.len() <= other.pairs.len() && other.pairs[..self.pairs.len()] == self.pairs[..]
    }

    /// Action at 1-based time `t`.
    pub fn action(&self, t: usize) -> ActionSymbol {
        self.pairs[t - 1].0
    }

    /// Observation at 1-based time `t`.
    pub fn observation(&self, t: usize) -> ObservationSymbol {
        self.pairs[t - 1].1
    }

    pub fn last(&self) -> Option<(ActionSymbol, ObservationSymbol)> {
        self.pairs.last().copied()
    }

    pub fn actions(&self) -> impl Iterator<Item = ActionSymbol> + '_ {
        self.pairs.iter().map(|p| p.0)
    }

    pub fn observations(&self) -> impl Iterator<Item = ObservationSymbol> + '_ {
        self.pairs.iter().map(|p| p.1)
    }
}

/// A history whose actions carry a flag marking stochastic choices.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FlaggedHistory {
    n_actions: usize,
    n_observations: usize,
    pairs: Vec<((ActionSymbol, bool), ObservationSymbol)>,
}

impl FlaggedHistory {
    pub fn new(n_actions: usize, n_observations: usize) -> Self {
        assert!(
            n_actions > 0 && n_observations > 0,
            "alphabets must be nonempty"
        );
        FlaggedHistory {
            n_actions,
            n_observations,
            pairs: Vec::new(),
        }
    }

    pub fn push(&mut self, a: ActionSymbol, stochastic: bool, o: ObservationSymbol) -> Result<()> {
        if a >= self.n_actions {
            return Err(Error::AlphabetViolation {
                symbol: a,
                size: self.n_actions,
            });
        }
        if o >= self.n_observations {
            return Err(Error::AlphabetViolation {
                symbol: o,
                size: self.n_observations,
            });
        }
        self.pairs.push(((a, stochastic), o));
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }

    pub fn prefix(&self, len: usize) -> Self {
        FlaggedHistory {
            n_actions: self.n_actions,
            n_observations: self.n_observations,
            pairs: self.pairs[..len.min(self.pairs.len())].to_vec(),
        }
    }

    pub fn pairs(&self) -> &[((ActionSymbol, bool), ObservationSymbol)] {
        &self.pairs
    }

    /// The distinguished stochastic-action symbol used by [`FlaggedHistory::x`].
    pub fn stochastic_symbol(&self) -> ActionSymbol {
        self.n_actions
    }

    /// Drops the flags.
    pub fn y(&self) -> InteractionHistory {
        InteractionHistory {
            n_actions: self.n_actions,
            n_observations: self.n_observations,
            pairs: self.pairs.iter().map(|&((a, _), o)| (a, o)).collect(),
        }
    }

    /// Replaces flagged actions by the stochastic symbol, over an alphabet
    /// extended by one.
    pub fn x(&self) -> InteractionHistory {
        let s = self.stochastic_symbol();
        InteractionHistory {
            n_actions: self.n_actions + 1,
            n_observations: self.n_observations,
            pairs: self
                .pairs
                .iter()
                .map(|&((a, f), o)| (if f { s } else { a }, o))
                .collect(),
        }
    }
}

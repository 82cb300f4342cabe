use crate::error::{Error, Result};

const ROW_TOLERANCE: f64 = 1e-9;

/// A finite POMDP: for each (state, action) a distribution over
/// (next state, observation), stored row-major with column `s' * |O| + o`.
#[derive(Clone, Debug, PartialEq)]
pub struct TransitionTable {
    n_states: usize,
    n_actions: usize,
    n_observations: usize,
    start: usize,
    probs: Vec<f64>,
}

impl TransitionTable {
    pub fn new(
        n_states: usize,
        n_actions: usize,
        n_observations: usize,
        start: usize,
        probs: Vec<f64>,
    ) -> Result<Self> {
        if n_states == 0 || n_actions == 0 || n_observations == 0 {
            return Err(Error::Parameter("table dimensions must be positive".into()));
        }
        if start >= n_states {
            return Err(Error::Parameter(format!(
                "start state {start} out of range"
            )));
        }
        let width = n_states * n_observations;
        if probs.len() != n_states * n_actions * width {
            return Err(Error::Parameter(format!(
                "expected {} probabilities, got {}",
                n_states * n_actions * width,
                probs.len()
            )));
        }
        if probs.iter().any(|p| !(*p >= 0.0 && *p <= 1.0)) {
            return Err(Error::Parameter("table probability outside [0,1]".into()));
        }
        for row in probs.chunks(width) {
            let sum: f64 = row.iter().sum();
            if (sum - 1.0).abs() > ROW_TOLERANCE {
                return Err(Error::Normalization { sum });
            }
        }
        Ok(TransitionTable {
            n_states,
            n_actions,
            n_observations,
            start,
            probs,
        })
    }

    pub fn n_states(&self) -> usize {
        self.n_states
    }

    pub fn n_actions(&self) -> usize {
        self.n_actions
    }

    pub fn n_observations(&self) -> usize {
        self.n_observations
    }

    pub fn start(&self) -> usize {
        self.start
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn row(&self, s: usize, a: usize) -> &[f64] {
        let width = self.n_states * self.n_observations;
        let off = (s * self.n_actions + a) * width;
        &self.probs[off..off + width]
    }

    pub fn prob(&self, s: usize, a: usize, next: usize, o: usize) -> f64 {
        self.row(s, a)[next * self.n_observations + o]
    }
}

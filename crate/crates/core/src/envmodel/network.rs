//! Boolean networks with stochastic `choice` nodes.
//!
//! State expressions read previous-step state and current actions.
//! Observation expressions read current state and current actions.
//! Variable `i` of each kind occupies bit `i` of the corresponding index,
//! so action `0b0010` sets only the second action variable.

use std::collections::HashSet;

use rand::Rng;

use super::table::TransitionTable;
use crate::error::{Error, Result};

const MAX_VARS: usize = 16;

#[derive(Clone, Debug, PartialEq)]
pub enum Expr {
    Lit(bool),
    State(usize),
    Action(usize),
    Not(Box<Expr>),
    And(Box<Expr>, Box<Expr>),
    Or(Box<Expr>, Box<Expr>),
    Xor(Box<Expr>, Box<Expr>),
    /// `A` with probability `p`, else `B`.
    Choice(f64, Box<Expr>, Box<Expr>),
}

impl Expr {
    pub fn not(e: Expr) -> Expr {
        Expr::Not(Box::new(e))
    }
    pub fn and(a: Expr, b: Expr) -> Expr {
        Expr::And(Box::new(a), Box::new(b))
    }
    pub fn or(a: Expr, b: Expr) -> Expr {
        Expr::Or(Box::new(a), Box::new(b))
    }
    pub fn xor(a: Expr, b: Expr) -> Expr {
        Expr::Xor(Box::new(a), Box::new(b))
    }
    pub fn choice(p: f64, a: Expr, b: Expr) -> Expr {
        Expr::Choice(p, Box::new(a), Box::new(b))
    }
    /// `if c then a else b`, written with the base connectives.
    pub fn ite(c: Expr, a: Expr, b: Expr) -> Expr {
        Expr::or(Expr::and(c.clone(), a), Expr::and(Expr::not(c), b))
    }

    /// Probability that the expression is true. Distinct choice nodes are
    /// independent draws, so subtrees combine as independent events.
    pub fn prob_true(&self, state: u64, action: u64) -> f64 {
        match self {
            Expr::Lit(b) => f64::from(u8::from(*b)),
            Expr::State(i) => f64::from(((state >> i) & 1) as u8),
            Expr::Action(i) => f64::from(((action >> i) & 1) as u8),
            Expr::Not(e) => 1.0 - e.prob_true(state, action),
            Expr::And(a, b) => a.prob_true(state, action) * b.prob_true(state, action),
            Expr::Or(a, b) => {
                let (pa, pb) = (a.prob_true(state, action), b.prob_true(state, action));
                pa + pb - pa * pb
            }
            Expr::Xor(a, b) => {
                let (pa, pb) = (a.prob_true(state, action), b.prob_true(state, action));
                pa * (1.0 - pb) + pb * (1.0 - pa)
            }
            Expr::Choice(p, a, b) => {
                p * a.prob_true(state, action) + (1.0 - p) * b.prob_true(state, action)
            }
        }
    }

    pub fn sample<R: Rng + ?Sized>(&self, state: u64, action: u64, rng: &mut R) -> bool {
        match self {
            Expr::Lit(b) => *b,
            Expr::State(i) => (state >> i) & 1 == 1,
            Expr::Action(i) => (action >> i) & 1 == 1,
            Expr::Not(e) => !e.sample(state, action, rng),
            Expr::And(a, b) => {
                let x = a.sample(state, action, rng);
                let y = b.sample(state, action, rng);
                x && y
            }
            Expr::Or(a, b) => {
                let x = a.sample(state, action, rng);
                let y = b.sample(state, action, rng);
                x || y
            }
            Expr::Xor(a, b) => {
                let x = a.sample(state, action, rng);
                let y = b.sample(state, action, rng);
                x ^ y
            }
            Expr::Choice(p, a, b) => {
                if rng.gen::<f64>() < *p {
                    a.sample(state, action, rng)
                } else {
                    b.sample(state, action, rng)
                }
            }
        }
    }

    pub fn node_count(&self) -> usize {
        match self {
            Expr::Lit(_) | Expr::State(_) | Expr::Action(_) => 1,
            Expr::Not(e) => 1 + e.node_count(),
            Expr::And(a, b) | Expr::Or(a, b) | Expr::Xor(a, b) | Expr::Choice(_, a, b) => {
                1 + a.node_count() + b.node_count()
            }
        }
    }

    pub fn depth(&self) -> usize {
        match self {
            Expr::Lit(_) | Expr::State(_) | Expr::Action(_) => 1,
            Expr::Not(e) => 1 + e.depth(),
            Expr::And(a, b) | Expr::Or(a, b) | Expr::Xor(a, b) | Expr::Choice(_, a, b) => {
                1 + a.depth().max(b.depth())
            }
        }
    }

    pub fn is_deterministic(&self) -> bool {
        match self {
            Expr::Lit(_) | Expr::State(_) | Expr::Action(_) => true,
            Expr::Not(e) => e.is_deterministic(),
            Expr::And(a, b) | Expr::Or(a, b) | Expr::Xor(a, b) => {
                a.is_deterministic() && b.is_deterministic()
            }
            Expr::Choice(..) => false,
        }
    }

    pub fn state_refs(&self, out: &mut HashSet<usize>) {
        match self {
            Expr::State(i) => {
                out.insert(*i);
            }
            Expr::Lit(_) | Expr::Action(_) => {}
            Expr::Not(e) => e.state_refs(out),
            Expr::And(a, b) | Expr::Or(a, b) | Expr::Xor(a, b) | Expr::Choice(_, a, b) => {
                a.state_refs(out);
                b.state_refs(out);
            }
        }
    }

    fn validate(&self, n_state: usize, n_action: usize) -> Result<()> {
        match self {
            Expr::Lit(_) => Ok(()),
            Expr::State(i) if *i < n_state => Ok(()),
            Expr::Action(i) if *i < n_action => Ok(()),
            Expr::State(i) => Err(Error::Parameter(format!("state variable {i} out of range"))),
            Expr::Action(i) => Err(Error::Parameter(format!(
                "action variable {i} out of range"
            ))),
            Expr::Not(e) => e.validate(n_state, n_action),
            Expr::And(a, b) | Expr::Or(a, b) | Expr::Xor(a, b) => {
                a.validate(n_state, n_action)?;
                b.validate(n_state, n_action)
            }
            Expr::Choice(p, a, b) => {
                if !(0.0..=1.0).contains(p) {
                    return Err(Error::Parameter(format!(
                        "choice probability {p} outside [0,1]"
                    )));
                }
                a.validate(n_state, n_action)?;
                b.validate(n_state, n_action)
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct BooleanNetwork {
    state_names: Vec<String>,
    action_names: Vec<String>,
    observation_names: Vec<String>,
    initial: Vec<bool>,
    updates: Vec<Expr>,
    emits: Vec<Expr>,
}

impl BooleanNetwork {
    pub fn new(
        state_names: Vec<String>,
        action_names: Vec<String>,
        observation_names: Vec<String>,
        initial: Vec<bool>,
        updates: Vec<Expr>,
        emits: Vec<Expr>,
    ) -> Result<Self> {
        if state_names.is_empty() || observation_names.is_empty() {
            return Err(Error::Parameter(
                "network needs state and observation variables".into(),
            ));
        }
        if state_names.len() > MAX_VARS
            || action_names.len() > MAX_VARS
            || observation_names.len() > MAX_VARS
        {
            return Err(Error::Parameter(format!(
                "at most {MAX_VARS} variables of each kind"
            )));
        }
        let mut seen = HashSet::new();
        for n in state_names
            .iter()
            .chain(&action_names)
            .chain(&observation_names)
        {
            if !seen.insert(n.as_str()) {
                return Err(Error::Parameter(format!("duplicate variable name {n}")));
            }
        }
        if initial.len() != state_names.len() || updates.len() != state_names.len() {
            return Err(Error::Parameter(
                "one initial value and update per state variable".into(),
            ));
        }
        if emits.len() != observation_names.len() {
            return Err(Error::Parameter(
                "one expression per observation variable".into(),
            ));
        }
        for e in updates.iter().chain(&emits) {
            e.validate(state_names.len(), action_names.len())?;
        }
        Ok(BooleanNetwork {
            state_names,
            action_names,
            observation_names,
            initial,
            updates,
            emits,
        })
    }

    pub fn state_names(&self) -> &[String] {
        &self.state_names
    }
    pub fn action_names(&self) -> &[String] {
        &self.action_names
    }
    pub fn observation_names(&self) -> &[String] {
        &self.observation_names
    }
    pub fn initial(&self) -> &[bool] {
        &self.initial
    }
    pub fn updates(&self) -> &[Expr] {
        &self.updates
    }
    pub fn emits(&self) -> &[Expr] {
        &self.emits
    }

    pub fn n_states(&self) -> usize {
        1 << self.state_names.len()
    }
    pub fn n_actions(&self) -> usize {
        1 << self.action_names.len()
    }
    pub fn n_observations(&self) -> usize {
        1 << self.observation_names.len()
    }

    pub fn initial_index(&self) -> usize {
        self.initial
            .iter()
            .enumerate()
            .map(|(i, &b)| usize::from(b) << i)
            .sum()
    }

    pub fn state_index(&self, name: &str) -> Option<usize> {
        self.state_names.iter().position(|n| n == name)
    }
    pub fn action_index(&self, name: &str) -> Option<usize> {
        self.action_names.iter().position(|n| n == name)
    }
    pub fn observation_index(&self, name: &str) -> Option<usize> {
        self.observation_names.iter().position(|n| n == name)
    }

    /// State variables read by at least one observation expression.
    pub fn observed_state_vars(&self) -> HashSet<usize> {
        let mut out = HashSet::new();
        for e in &self.emits {
            e.state_refs(&mut out);
        }
        out
    }

    pub fn node_count(&self) -> usize {
        self.updates
            .iter()
            .chain(&self.emits)
            .map(Expr::node_count)
            .sum()
    }

    /// The equivalent table over all 2^n state assignments.
    pub fn to_table(&self) -> TransitionTable {
        let (ns, na, no) = (self.n_states(), self.n_actions(), self.n_observations());
        let width = ns * no;
        let mut probs = vec![0.0; ns * na * width];
        let mut next_dist = vec![0.0; ns];
        let mut obs_dist = vec![0.0; no];
        for s in 0..ns {
            for a in 0..na {
                let p_state: Vec<f64> = self
                    .updates
                    .iter()
                    .map(|e| e.prob_true(s as u64, a as u64))
                    .collect();
                bit_product(&p_state, &mut next_dist);
                let off = (s * na + a) * width;
                for (s2, &ps) in next_dist.iter().enumerate() {
                    if ps == 0.0 {
                        continue;
                    }
                    let p_obs: Vec<f64> = self
                        .emits
                        .iter()
                        .map(|e| e.prob_true(s2 as u64, a as u64))
                        .collect();
                    bit_product(&p_obs, &mut obs_dist);
                    for (o, &po) in obs_dist.iter().enumerate() {
                        probs[off + s2 * no + o] = ps * po;
                    }
                }
            }
        }
        TransitionTable::new(ns, na, no, self.initial_index(), probs)
            .expect("compiled network rows are normalized")
    }

    pub fn sample_step<R: Rng + ?Sized>(
        &self,
        state: usize,
        action: usize,
        rng: &mut R,
    ) -> (usize, usize) {
        let mut next = 0usize;
        for (i, e) in self.updates.iter().enumerate() {
            if e.sample(state as u64, action as u64, rng) {
                next |= 1 << i;
            }
        }
        let mut o = 0usize;
        for (j, e) in self.emits.iter().enumerate() {
            if e.sample(next as u64, action as u64, rng) {
                o |= 1 << j;
            }
        }
        (next, o)
    }
}

/// Joint distribution of independent bits with the given marginals.
fn bit_product(marginals: &[f64], out: &mut [f64]) {
    for (idx, slot) in out.iter_mut().enumerate() {
        let mut p = 1.0;
        for (i, &m) in marginals.iter().enumerate() {
            p *= if (idx >> i) & 1 == 1 { m } else { 1.0 - m };
            if p == 0.0 {
                break;
            }
        }
        *slot = p;
    }
}

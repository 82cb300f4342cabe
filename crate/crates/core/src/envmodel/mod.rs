//! Finite stochastic environment models.
//!
//! Both concrete forms, [`TransitionTable`] and [`BooleanNetwork`], are
//! wrapped in an [`EnvModel`], which keeps a compiled table and a sparse
//! index of it. All probability computations run on the compiled table by
//! forward dynamic programming.

mod builtin;
mod format;
mod network;
mod serialize;
mod table;

use rand::Rng;

pub use builtin::{
    bernoulli, bernoulli_with_actions, delusion_env_6_3, delusion_env_6_4, hitman, table_4_1,
    HITMAN_HOLD, HITMAN_OUTCOMES, HITMAN_SHOOT,
};
pub use format::{parse_model, write_model};
pub use network::{BooleanNetwork, Expr};
pub use serialize::{
    canonical_tokens, description_length, log2_prior, prior, quantize_probability,
    table_lookup_length, Token, BITS_PER_TOKEN, VOCABULARY_SIZE,
};
pub use table::TransitionTable;

use crate::error::{Error, Result};
use crate::history::{ActionSymbol, InteractionHistory, ObservationSymbol};

const TRAJECTORY_CAP: usize = 1_000_000;

#[derive(Clone, Debug, PartialEq)]
pub enum ModelForm {
    Table,
    Network(BooleanNetwork),
}

#[derive(Clone, Debug)]
pub struct EnvModel {
    form: ModelForm,
    table: TransitionTable,
    /// Nonzero `(next state, p)` entries per `(s, a, o)`.
    by_obs: Vec<Vec<(u32, f64)>>,
}

impl PartialEq for EnvModel {
    fn eq(&self, other: &Self) -> bool {
        self.form == other.form && self.table == other.table
    }
}

impl From<TransitionTable> for EnvModel {
    fn from(t: TransitionTable) -> Self {
        EnvModel::new(ModelForm::Table, t)
    }
}

impl From<BooleanNetwork> for EnvModel {
    fn from(n: BooleanNetwork) -> Self {
        let t = n.to_table();
        EnvModel::new(ModelForm::Network(n), t)
    }
}

/// Filtered posterior over the current state after a history, plus the
/// history's probability.
#[derive(Clone, Debug, PartialEq)]
pub struct Belief {
    dist: Vec<f64>,
    prob: f64,
    log_prob: f64,
    len: usize,
}

impl Belief {
    pub fn dist(&self) -> &[f64] {
        &self.dist
    }
    /// `P(h|q)` accumulated as a product of conditionals; may underflow.
    pub fn probability(&self) -> f64 {
        self.prob
    }
    /// Natural log of `P(h|q)`.
    pub fn log_probability(&self) -> f64 {
        self.log_prob
    }
    pub fn len(&self) -> usize {
        self.len
    }
    pub fn is_empty(&self) -> bool {
        self.len == 0
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct StateHistory {
    /// `z_0 .. z_t`, where `z_0` is the start state.
    pub states: Vec<usize>,
    pub prob: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct WeightedStateSet {
    pub entries: Vec<(StateHistory, f64)>,
}

impl EnvModel {
    fn new(form: ModelForm, table: TransitionTable) -> Self {
        let (ns, na, no) = (table.n_states(), table.n_actions(), table.n_observations());
        let mut by_obs = vec![Vec::new(); ns * na * no];
        for s in 0..ns {
            for a in 0..na {
                let row = table.row(s, a);
                for s2 in 0..ns {
                    for o in 0..no {
                        let p = row[s2 * no + o];
                        if p > 0.0 {
                            by_obs[(s * na + a) * no + o].push((s2 as u32, p));
                        }
                    }
                }
            }
        }
        EnvModel {
            form,
            table,
            by_obs,
        }
    }

    pub fn form(&self) -> &ModelForm {
        &self.form
    }
    pub fn table(&self) -> &TransitionTable {
        &self.table
    }
    pub fn network(&self) -> Option<&BooleanNetwork> {
        match &self.form {
            ModelForm::Network(n) => Some(n),
            ModelForm::Table => None,
        }
    }
    pub fn n_states(&self) -> usize {
        self.table.n_states()
    }
    pub fn n_actions(&self) -> usize {
        self.table.n_actions()
    }
    pub fn n_observations(&self) -> usize {
        self.table.n_observations()
    }
    pub fn start(&self) -> usize {
        self.table.start()
    }

    pub fn empty_history(&self) -> InteractionHistory {
        InteractionHistory::new(self.n_actions(), self.n_observations())
    }

    fn check_alphabets(&self, h: &InteractionHistory) -> Result<()> {
        if h.n_actions() != self.n_actions() || h.n_observations() != self.n_observations() {
            return Err(Error::Parameter(format!(
                "history alphabets {}x{} do not match model {}x{}",
                h.n_actions(),
                h.n_observations(),
                self.n_actions(),
                self.n_observations()
            )));
        }
        Ok(())
    }

    #[inline]
    fn successors(&self, s: usize, a: ActionSymbol, o: ObservationSymbol) -> &[(u32, f64)] {
        &self.by_obs[(s * self.n_actions() + a) * self.n_observations() + o]
    }

    pub fn initial_belief(&self) -> Belief {
        let mut dist = vec![0.0; self.n_states()];
        dist[self.start()] = 1.0;
        Belief {
            dist,
            prob: 1.0,
            log_prob: 0.0,
            len: 0,
        }
    }

    /// Conditions `b` on `(a, o)`. Returns the updated belief and
    /// `rho(o | h a)`, or `None` when the observation is impossible.
    pub fn step_belief(
        &self,
        b: &Belief,
        a: ActionSymbol,
        o: ObservationSymbol,
    ) -> Option<(Belief, f64)> {
        let mut next = vec![0.0; self.n_states()];
        for (s, &w) in b.dist.iter().enumerate() {
            if w == 0.0 {
                continue;
            }
            for &(s2, p) in self.successors(s, a, o) {
                next[s2 as usize] += w * p;
            }
        }
        let rho: f64 = next.iter().sum();
        if rho <= 0.0 {
            return None;
        }
        for x in next.iter_mut() {
            *x /= rho;
        }
        Some((
            Belief {
                dist: next,
                prob: b.prob * rho,
                log_prob: b.log_prob + rho.ln(),
                len: b.len + 1,
            },
            rho,
        ))
    }

    /// Posterior over the current state after `h`.
    pub fn belief(&self, h: &InteractionHistory) -> Result<Belief> {
        self.check_alphabets(h)?;
        let mut b = self.initial_belief();
        for &(a, o) in h.pairs() {
            b = self
                .step_belief(&b, a, o)
                .ok_or(Error::ImpossibleHistory)?
                .0;
        }
        Ok(b)
    }

    /// `rho(o | h a)` for every `o`, given the belief after `h`.
    pub fn observation_row(&self, b: &Belief, a: ActionSymbol) -> Vec<f64> {
        let mut row = vec![0.0; self.n_observations()];
        for (s, &w) in b.dist.iter().enumerate() {
            if w == 0.0 {
                continue;
            }
            for (o, slot) in row.iter_mut().enumerate() {
                let mass: f64 = self.successors(s, a, o).iter().map(|e| e.1).sum();
                *slot += w * mass;
            }
        }
        let total: f64 = row.iter().sum();
        if total > 0.0 {
            for x in row.iter_mut() {
                *x /= total;
            }
        }
        row
    }

    /// `P(h|q)`: the sum over consistent state trajectories of their path
    /// probabilities, computed by an unnormalized forward pass.
    pub fn history_probability(&self, h: &InteractionHistory) -> f64 {
        if self.check_alphabets(h).is_err() {
            return 0.0;
        }
        let mut alpha = vec![0.0; self.n_states()];
        alpha[self.start()] = 1.0;
        let mut next = vec![0.0; self.n_states()];
        for &(a, o) in h.pairs() {
            next.iter_mut().for_each(|x| *x = 0.0);
            for (s, &w) in alpha.iter().enumerate() {
                if w == 0.0 {
                    continue;
                }
                for &(s2, p) in self.successors(s, a, o) {
                    next[s2 as usize] += w * p;
                }
            }
            std::mem::swap(&mut alpha, &mut next);
        }
        alpha.iter().sum()
    }

    /// Natural log of `P(h|q)` with per-step rescaling; `-inf` if impossible.
    pub fn history_log_probability(&self, h: &InteractionHistory) -> f64 {
        if self.check_alphabets(h).is_err() {
            return f64::NEG_INFINITY;
        }
        let mut b = self.initial_belief();
        for &(a, o) in h.pairs() {
            match self.step_belief(&b, a, o) {
                Some((nb, _)) => b = nb,
                None => return f64::NEG_INFINITY,
            }
        }
        b.log_prob
    }

    pub fn conditional_observation(
        &self,
        h: &InteractionHistory,
        a: ActionSymbol,
    ) -> Result<Vec<f64>> {
        if a >= self.n_actions() {
            return Err(Error::AlphabetViolation {
                symbol: a,
                size: self.n_actions(),
            });
        }
        let b = self.belief(h)?;
        Ok(self.observation_row(&b, a))
    }

    /// Every state trajectory consistent with `h`, weighted by its posterior.
    pub fn state_history_posterior(&self, h: &InteractionHistory) -> Result<WeightedStateSet> {
        self.check_alphabets(h)?;
        let mut paths = vec![StateHistory {
            states: vec![self.start()],
            prob: 1.0,
        }];
        for &(a, o) in h.pairs() {
            let mut next = Vec::new();
            for path in &paths {
                let s = *path.states.last().unwrap();
                for &(s2, p) in self.successors(s, a, o) {
                    let mut states = path.states.clone();
                    states.push(s2 as usize);
                    next.push(StateHistory {
                        states,
                        prob: path.prob * p,
                    });
                }
            }
            if next.len() > TRAJECTORY_CAP {
                return Err(Error::ResourceCap(format!(
                    "more than {TRAJECTORY_CAP} state trajectories"
                )));
            }
            paths = next;
        }
        let total: f64 = paths.iter().map(|p| p.prob).sum();
        if total <= 0.0 {
            return Err(Error::ImpossibleHistory);
        }
        Ok(WeightedStateSet {
            entries: paths
                .into_iter()
                .map(|z| {
                    let w = z.prob / total;
                    (z, w)
                })
                .collect(),
        })
    }

    /// Samples `(next state, observation)` from the row for `(state, a)`.
    pub fn simulate_step<R: Rng + ?Sized>(
        &self,
        state: usize,
        a: ActionSymbol,
        rng: &mut R,
    ) -> (usize, ObservationSymbol) {
        let row = self.table.row(state, a);
        let no = self.n_observations();
        let u: f64 = rng.gen();
        let mut acc = 0.0;
        let mut last = 0;
        for (j, &p) in row.iter().enumerate() {
            if p == 0.0 {
                continue;
            }
            acc += p;
            last = j;
            if u < acc {
                return (j / no, j % no);
            }
        }
        (last / no, last % no)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn example_history(n_obs: usize) -> InteractionHistory {
        InteractionHistory::from_pairs(2, n_obs, &[(0, 1), (0, 0), (1, 1)]).unwrap()
    }

    #[test]
    fn empty_history_probability_is_one() {
        let q = table_4_1();
        assert_eq!(q.history_probability(&q.empty_history()), 1.0);
    }

    #[test]
    fn table_41_example() {
        let q = table_4_1();
        assert!((q.history_probability(&example_history(2)) - 0.224).abs() < 1e-12);
    }

    #[test]
    fn bernoulli_example() {
        let q = bernoulli(0.8).unwrap();
        assert!((q.history_probability(&example_history(2)) - 0.128).abs() < 1e-12);
    }

    #[test]
    fn conditional_row_of_table_41() {
        let q = table_4_1();
        let row = q.conditional_observation(&q.empty_history(), 0).unwrap();
        assert!((row[0] - 0.2).abs() < 1e-12);
        assert!((row[1] - 0.8).abs() < 1e-12);
    }

    #[test]
    fn impossible_history_errors() {
        let q = bernoulli(1.0).unwrap();
        let h = InteractionHistory::from_pairs(2, 2, &[(0, 0)]).unwrap();
        assert_eq!(q.history_probability(&h), 0.0);
        assert_eq!(
            q.conditional_observation(&h, 0),
            Err(Error::ImpossibleHistory)
        );
        assert_eq!(q.state_history_posterior(&h), Err(Error::ImpossibleHistory));
    }

    #[test]
    fn posterior_of_table_41_example() {
        let q = table_4_1();
        let post = q.state_history_posterior(&example_history(2)).unwrap();
        assert_eq!(post.entries.len(), 2);
        let mut weights: Vec<f64> = post.entries.iter().map(|e| e.1).collect();
        weights.sort_by(|a, b| a.partial_cmp(b).unwrap());
        assert!((weights[0] - 0.024 / 0.224).abs() < 1e-12);
        assert!((weights[1] - 0.2 / 0.224).abs() < 1e-12);
    }

    #[test]
    fn table_41_s1_a_is_certain() {
        use rand::SeedableRng;
        let q = table_4_1();
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(3);
        for _ in 0..100 {
            assert_eq!(q.simulate_step(1, 0, &mut rng), (0, 0));
        }
    }
}

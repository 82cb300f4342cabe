use std::sync::Arc;

use rand::Rng;

use super::expectimax::Planner;
use crate::envmodel::{Belief, EnvModel};
use crate::error::{Error, Result};
use crate::history::{ActionSymbol, InteractionHistory};
use crate::rng::stream;
use crate::utility::{DiscountSpec, RewardCodec, UtilitySpec};

#[derive(Clone, Debug, PartialEq)]
pub enum PolicyOutput {
    Action(ActionSymbol),
    Distribution(Vec<f64>),
}

pub trait Policy {
    fn decide(&mut self, h: &InteractionHistory) -> Result<PolicyOutput>;

    fn name(&self) -> &str {
        "policy"
    }
}

pub struct FnPolicy<F> {
    name: String,
    f: F,
}

impl<F: FnMut(&InteractionHistory) -> PolicyOutput> FnPolicy<F> {
    pub fn new(name: &str, f: F) -> Self {
        FnPolicy {
            name: name.to_string(),
            f,
        }
    }
}

impl<F: FnMut(&InteractionHistory) -> PolicyOutput> Policy for FnPolicy<F> {
    fn decide(&mut self, h: &InteractionHistory) -> Result<PolicyOutput> {
        Ok((self.f)(h))
    }
    fn name(&self) -> &str {
        &self.name
    }
}

pub struct UniformRandom {
    row: Vec<f64>,
}

impl UniformRandom {
    pub fn new(n_actions: usize) -> Self {
        UniformRandom {
            row: vec![1.0 / n_actions as f64; n_actions],
        }
    }
}

impl Policy for UniformRandom {
    fn decide(&mut self, _h: &InteractionHistory) -> Result<PolicyOutput> {
        Ok(PolicyOutput::Distribution(self.row.clone()))
    }
    fn name(&self) -> &str {
        "uniform"
    }
}

/// Uniform over a subset of actions.
pub struct UniformOver {
    row: Vec<f64>,
}

impl UniformOver {
    pub fn new(n_actions: usize, allowed: &[ActionSymbol]) -> Self {
        let mut row = vec![0.0; n_actions];
        for &a in allowed {
            row[a] = 1.0 / allowed.len() as f64;
        }
        UniformOver { row }
    }
}

impl Policy for UniformOver {
    fn decide(&mut self, _h: &InteractionHistory) -> Result<PolicyOutput> {
        Ok(PolicyOutput::Distribution(self.row.clone()))
    }
}

pub struct ConstantPolicy(pub ActionSymbol);

impl Policy for ConstantPolicy {
    fn decide(&mut self, _h: &InteractionHistory) -> Result<PolicyOutput> {
        Ok(PolicyOutput::Action(self.0))
    }
    fn name(&self) -> &str {
        "constant"
    }
}

/// Expectimax agent that keeps its model's belief incrementally across
/// consecutive calls on extending histories.
pub struct PlannerPolicy {
    model: Arc<EnvModel>,
    utility: UtilitySpec,
    discount: DiscountSpec,
    horizon: usize,
    allowed: Option<Vec<ActionSymbol>>,
    cache: Option<(InteractionHistory, Belief)>,
    name: String,
}

impl PlannerPolicy {
    pub fn new(
        model: Arc<EnvModel>,
        utility: UtilitySpec,
        discount: DiscountSpec,
        horizon: usize,
    ) -> Self {
        PlannerPolicy {
            model,
            utility,
            discount,
            horizon,
            allowed: None,
            cache: None,
            name: "planner".into(),
        }
    }

    pub fn restricted(mut self, allowed: Vec<ActionSymbol>, name: &str) -> Self {
        self.allowed = Some(allowed);
        self.name = name.to_string();
        self
    }

    fn belief_for(&mut self, h: &InteractionHistory) -> Result<Belief> {
        if let Some((ch, cb)) = &self.cache {
            if ch.len() == h.len() && ch == h {
                return Ok(cb.clone());
            }
            if ch.len() + 1 == h.len() && ch.is_prefix_of(h) {
                let (a, o) = h.last().unwrap();
                let (nb, _) = self
                    .model
                    .step_belief(cb, a, o)
                    .ok_or(Error::ImpossibleHistory)?;
                return Ok(nb);
            }
        }
        self.model.belief(h)
    }
}

impl Policy for PlannerPolicy {
    fn decide(&mut self, h: &InteractionHistory) -> Result<PolicyOutput> {
        let b = self.belief_for(h)?;
        let mut planner = Planner::new(&self.model, &self.utility, self.discount, self.horizon);
        if let Some(allowed) = &self.allowed {
            planner = planner.with_actions(allowed.clone())?;
        }
        let a = planner.best_action_from(h, &b)?;
        self.cache = Some((h.clone(), b));
        Ok(PolicyOutput::Action(a))
    }
    fn name(&self) -> &str {
        &self.name
    }
}

pub fn sample_row<R: Rng + ?Sized>(row: &[f64], rng: &mut R) -> usize {
    let u: f64 = rng.gen();
    let mut acc = 0.0;
    let mut last = 0;
    for (i, &p) in row.iter().enumerate() {
        if p <= 0.0 {
            continue;
        }
        acc += p;
        last = i;
        if u < acc {
            return i;
        }
    }
    last
}

#[derive(Clone, Debug, PartialEq)]
pub struct Rollout {
    pub history: InteractionHistory,
    /// `z_0 .. z_steps` as simulated.
    pub states: Vec<usize>,
}

fn resolve<R: Rng + ?Sized>(
    out: PolicyOutput,
    n_actions: usize,
    rng: &mut R,
) -> Result<ActionSymbol> {
    match out {
        PolicyOutput::Action(a) if a < n_actions => Ok(a),
        PolicyOutput::Action(a) => Err(Error::AlphabetViolation {
            symbol: a,
            size: n_actions,
        }),
        PolicyOutput::Distribution(row) => {
            let sum: f64 = row.iter().sum();
            if row.len() != n_actions || (sum - 1.0).abs() > 1e-9 {
                return Err(Error::Normalization { sum });
            }
            Ok(sample_row(&row, rng))
        }
    }
}

/// Alternates policy decisions and model sampling, starting from the
/// model's start state.
pub fn rollout(q: &EnvModel, pi: &mut dyn Policy, steps: usize, seed: u64) -> Result<Rollout> {
    rollout_with(q, pi, steps, &mut stream(seed, 0))
}

pub fn rollout_with<R: Rng + ?Sized>(
    q: &EnvModel,
    pi: &mut dyn Policy,
    steps: usize,
    rng: &mut R,
) -> Result<Rollout> {
    let mut history = q.empty_history();
    let mut state = q.start();
    let mut states = Vec::with_capacity(steps + 1);
    states.push(state);
    for _ in 0..steps {
        let a = resolve(pi.decide(&history)?, q.n_actions(), rng)?;
        let (next, o) = q.simulate_step(state, a, rng);
        history.push(a, o)?;
        state = next;
        states.push(state);
    }
    Ok(Rollout { history, states })
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct McEstimate {
    pub mean: f64,
    pub std_err: f64,
    pub samples: usize,
}

impl McEstimate {
    pub fn from_samples(xs: &[f64]) -> Self {
        let n = xs.len() as f64;
        let mean = xs.iter().sum::<f64>() / n;
        let var = if xs.len() > 1 {
            xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0)
        } else {
            0.0
        };
        McEstimate {
            mean,
            std_err: (var / n).sqrt(),
            samples: xs.len(),
        }
    }
}

/// Monte Carlo estimate of the expected discounted reward
/// `sum_{i < steps} gamma^i r_{i+1}`; rollout `k` uses stream `k` of `seed`.
pub fn policy_value_mc(
    q: &EnvModel,
    pi: &mut dyn Policy,
    codec: &RewardCodec,
    gamma: f64,
    steps: usize,
    rollouts: usize,
    seed: u64,
) -> Result<McEstimate> {
    codec.check_alphabet(q.n_observations())?;
    if rollouts == 0 {
        return Err(Error::Parameter("need at least one rollout".into()));
    }
    let mut totals = Vec::with_capacity(rollouts);
    for k in 0..rollouts {
        let r = rollout_with(q, pi, steps, &mut stream(seed, k as u64))?;
        let mut total = 0.0;
        let mut w = 1.0;
        for o in r.history.observations() {
            total += w * codec.reward(o);
            w *= gamma;
        }
        totals.push(total);
    }
    Ok(McEstimate::from_samples(&totals))
}

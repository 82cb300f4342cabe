//! Temporal discounts and the utility taxonomy of the agent classes.

use std::fmt;
use std::sync::Arc;

use crate::envmodel::{Belief, EnvModel};
use crate::error::{Error, Result};
use crate::history::{InteractionHistory, ObservationSymbol};
use crate::learner::ModelBasedUtility;

/// Weight `w(t, t')` given at time `t` to utility realized at time `t'`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum DiscountSpec {
    Geometric(f64),
    HorizonWindow(usize),
    GoalGeometric,
    Spike(usize),
}

impl DiscountSpec {
    pub fn geometric(gamma: f64) -> Result<Self> {
        if !(gamma > 0.0 && gamma < 1.0) {
            return Err(Error::Parameter(format!(
                "geometric discount needs 0 < gamma < 1, got {gamma}"
            )));
        }
        Ok(DiscountSpec::Geometric(gamma))
    }

    pub fn weight(&self, t: usize, t_prime: usize) -> f64 {
        if t_prime < t {
            return 0.0;
        }
        let lag = t_prime - t;
        match *self {
            DiscountSpec::Geometric(g) => g.powi(lag as i32),
            DiscountSpec::HorizonWindow(m) => {
                if lag <= m {
                    1.0
                } else {
                    0.0
                }
            }
            DiscountSpec::GoalGeometric => 0.5f64.powi(lag as i32),
            DiscountSpec::Spike(m) => {
                if lag == m {
                    1.0
                } else {
                    0.0
                }
            }
        }
    }
}

pub fn discount_weight(spec: &DiscountSpec, t: usize, t_prime: usize) -> f64 {
    spec.weight(t, t_prime)
}

/// Observation factoring `o = o' * |grid| + r_index` for reward agents.
#[derive(Clone, Debug, PartialEq)]
pub struct RewardCodec {
    grid: Vec<f64>,
}

impl RewardCodec {
    pub fn new(grid: Vec<f64>) -> Result<Self> {
        if grid.is_empty() || grid.iter().any(|r| !(0.0..=1.0).contains(r)) {
            return Err(Error::Codec(
                "reward grid must be nonempty and within [0,1]".into(),
            ));
        }
        Ok(RewardCodec { grid })
    }

    pub fn grid(&self) -> &[f64] {
        &self.grid
    }

    pub fn encode(&self, base: usize, reward_index: usize) -> ObservationSymbol {
        base * self.grid.len() + reward_index
    }

    pub fn decode(&self, o: ObservationSymbol) -> (usize, usize) {
        (o / self.grid.len(), o % self.grid.len())
    }

    pub fn check_alphabet(&self, n_observations: usize) -> Result<()> {
        if !n_observations.is_multiple_of(self.grid.len()) {
            return Err(Error::Codec(format!(
                "{n_observations} observations cannot be factored over a reward grid of {}",
                self.grid.len()
            )));
        }
        Ok(())
    }

    pub fn reward(&self, o: ObservationSymbol) -> f64 {
        self.grid[o % self.grid.len()]
    }
}

pub type GoalPredicate = Arc<dyn Fn(&[ObservationSymbol]) -> bool + Send + Sync>;
pub type ExternalUtility = Arc<dyn Fn(&InteractionHistory) -> f64 + Send + Sync>;

#[derive(Clone)]
pub enum UtilitySpec {
    Reward(RewardCodec),
    /// Pays 1 at the first time the predicate holds on the observation prefix.
    Goal(GoalPredicate),
    /// Pays 1 when the last observation is among the modal predictions.
    Prediction,
    /// `u(h) = -rho(h)`.
    Knowledge,
    ModelBased(ModelBasedUtility),
    External(ExternalUtility),
}

impl fmt::Debug for UtilitySpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            UtilitySpec::Reward(c) => write!(f, "Reward({:?})", c.grid()),
            UtilitySpec::Goal(_) => write!(f, "Goal"),
            UtilitySpec::Prediction => write!(f, "Prediction"),
            UtilitySpec::Knowledge => write!(f, "Knowledge"),
            UtilitySpec::ModelBased(m) => write!(f, "ModelBased({m:?})"),
            UtilitySpec::External(_) => write!(f, "External"),
        }
    }
}

impl UtilitySpec {
    pub fn external(f: impl Fn(&InteractionHistory) -> f64 + Send + Sync + 'static) -> Self {
        UtilitySpec::External(Arc::new(f))
    }

    pub fn goal(f: impl Fn(&[ObservationSymbol]) -> bool + Send + Sync + 'static) -> Self {
        UtilitySpec::Goal(Arc::new(f))
    }

    pub fn needs_model(&self) -> bool {
        matches!(
            self,
            UtilitySpec::Prediction | UtilitySpec::Knowledge | UtilitySpec::ModelBased(_)
        )
    }
}

/// Filtering state available to model-dependent utilities.
///
/// `belief` is the posterior after `h`; `prev` is the posterior after `h`
/// without its last pair, used by prediction agents.
pub struct ModelContext<'a> {
    pub model: &'a EnvModel,
    pub belief: &'a Belief,
    pub prev: Option<&'a Belief>,
}

pub fn utility_eval(
    u: &UtilitySpec,
    h: &InteractionHistory,
    ctx: Option<&ModelContext>,
) -> Result<f64> {
    match u {
        UtilitySpec::Reward(codec) => {
            codec.check_alphabet(h.n_observations())?;
            Ok(h.last().map_or(0.0, |(_, o)| codec.reward(o)))
        }
        UtilitySpec::Goal(pred) => {
            let obs: Vec<ObservationSymbol> = h.observations().collect();
            if obs.is_empty() || !pred(&obs) {
                return Ok(0.0);
            }
            let earlier = (1..obs.len()).any(|k| pred(&obs[..k]));
            Ok(if earlier { 0.0 } else { 1.0 })
        }
        UtilitySpec::Prediction => {
            let Some((a, o)) = h.last() else {
                return Ok(0.0);
            };
            let ctx =
                ctx.ok_or_else(|| Error::Parameter("prediction utility needs a model".into()))?;
            let prev = ctx.prev.ok_or_else(|| {
                Error::Parameter("prediction utility needs the previous belief".into())
            })?;
            let row = ctx.model.observation_row(prev, a);
            let best = row.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
            Ok(if row[o] >= best - 1e-12 { 1.0 } else { 0.0 })
        }
        UtilitySpec::Knowledge => {
            let ctx =
                ctx.ok_or_else(|| Error::Parameter("knowledge utility needs a model".into()))?;
            Ok(-ctx.belief.probability())
        }
        UtilitySpec::ModelBased(m) => m.eval(h, ctx),
        UtilitySpec::External(f) => Ok(f(h)),
    }
}

/// Evaluates `u` at `h`, filtering `h` through `model` when the utility needs it.
pub fn utility_eval_in_model(
    u: &UtilitySpec,
    h: &InteractionHistory,
    model: &EnvModel,
) -> Result<f64> {
    if !u.needs_model() {
        return utility_eval(u, h, None);
    }
    let belief = model.belief(h)?;
    let prev = if h.is_empty() {
        None
    } else {
        Some(model.belief(&h.prefix(h.len() - 1))?)
    };
    let ctx = ModelContext {
        model,
        belief: &belief,
        prev: prev.as_ref(),
    };
    utility_eval(u, h, Some(&ctx))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn goal_geometric_weight() {
        assert_eq!(DiscountSpec::GoalGeometric.weight(0, 3), 0.125);
    }

    #[test]
    fn window_cutoff() {
        assert_eq!(DiscountSpec::HorizonWindow(2).weight(4, 7), 0.0);
        assert_eq!(DiscountSpec::HorizonWindow(2).weight(4, 6), 1.0);
    }

    #[test]
    fn zero_lag_geometric() {
        assert_eq!(DiscountSpec::geometric(0.9).unwrap().weight(5, 5), 1.0);
        assert!(DiscountSpec::geometric(1.0).is_err());
    }

    #[test]
    fn reward_reads_last() {
        let codec = RewardCodec::new(vec![0.0, 0.7, 1.0]).unwrap();
        let h = InteractionHistory::from_pairs(
            2,
            6,
            &[(0, codec.encode(1, 2)), (1, codec.encode(0, 1))],
        )
        .unwrap();
        assert_eq!(
            utility_eval(&UtilitySpec::Reward(codec), &h, None).unwrap(),
            0.7
        );
    }

    #[test]
    fn reward_codec_error() {
        let codec = RewardCodec::new(vec![0.0, 0.5, 1.0]).unwrap();
        let h = InteractionHistory::from_pairs(2, 4, &[(0, 1)]).unwrap();
        assert!(matches!(
            utility_eval(&UtilitySpec::Reward(codec), &h, None),
            Err(Error::Codec(_))
        ));
    }

    #[test]
    fn goal_only_once() {
        let u = UtilitySpec::goal(|obs| obs.contains(&1));
        let h1 = InteractionHistory::from_pairs(1, 2, &[(0, 0), (0, 1)]).unwrap();
        let h2 = h1.extend(0, 1).unwrap();
        assert_eq!(utility_eval(&u, &h1, None).unwrap(), 1.0);
        assert_eq!(utility_eval(&u, &h2, None).unwrap(), 0.0);
    }
}

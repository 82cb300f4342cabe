//! Utilities defined over a model's internal state.

use std::fmt;
use std::sync::Arc;

use crate::envmodel::{BooleanNetwork, EnvModel, StateHistory};
use crate::error::{Error, Result};
use crate::history::InteractionHistory;
use crate::utility::ModelContext;

/// Selects one state variable of a Boolean network.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum VariableSpec {
    Named(String),
    /// State variables that no observation expression reads.
    NotObserved,
    /// State variables read by the named observation's expression.
    ObservedBy(String),
}

impl VariableSpec {
    pub fn matches(&self, n: &BooleanNetwork) -> Vec<usize> {
        match self {
            VariableSpec::Named(name) => n.state_index(name).into_iter().collect(),
            VariableSpec::NotObserved => {
                let seen = n.observed_state_vars();
                (0..n.state_names().len())
                    .filter(|i| !seen.contains(i))
                    .collect()
            }
            VariableSpec::ObservedBy(obs) => {
                let Some(j) = n.observation_index(obs) else {
                    return Vec::new();
                };
                let mut refs = std::collections::HashSet::new();
                n.emits()[j].state_refs(&mut refs);
                let mut v: Vec<usize> = refs.into_iter().collect();
                v.sort_unstable();
                v
            }
        }
    }

    pub fn resolve(&self, n: &BooleanNetwork) -> Result<usize> {
        match self.matches(n).as_slice() {
            [i] => Ok(*i),
            other => Err(Error::SpecMatch(other.len())),
        }
    }
}

pub type AtTimeKernel = Arc<dyn Fn(&InteractionHistory, bool) -> f64 + Send + Sync>;
pub type TrajectoryKernel = Arc<dyn Fn(&InteractionHistory, &StateHistory) -> f64 + Send + Sync>;

#[derive(Clone)]
pub enum Kernel {
    /// Depends on `h` and on the selected variable's value at time `|h|`;
    /// evaluated from the filtered marginal.
    AtTime(AtTimeKernel),
    /// Depends on `h` and the full trajectory; evaluated by enumerating the
    /// posterior over state histories.
    Trajectory(TrajectoryKernel),
}

impl fmt::Debug for Kernel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Kernel::AtTime(_) => write!(f, "AtTime"),
            Kernel::Trajectory(_) => write!(f, "Trajectory"),
        }
    }
}

impl Kernel {
    /// 1 when action bit `action_var` of the action `lag` steps before the
    /// last one equals the variable's current value, else 0. Histories
    /// shorter than `lag + 1` score 0.
    pub fn action_matches(action_var: usize, lag: usize) -> Kernel {
        Kernel::AtTime(Arc::new(move |h, value| {
            if h.len() <= lag {
                return 0.0;
            }
            let a = h.action(h.len() - lag);
            f64::from(u8::from(((a >> action_var) & 1 == 1) == value))
        }))
    }

    pub fn constant(c: f64) -> Kernel {
        Kernel::AtTime(Arc::new(move |_, _| c))
    }
}

/// `sum_z P(z | h, q) kernel(h, z)` for a bound model and state variable.
#[derive(Clone)]
pub struct ModelBasedUtility {
    model: Arc<EnvModel>,
    var: usize,
    kernel: Kernel,
}

impl fmt::Debug for ModelBasedUtility {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "ModelBasedUtility {{ var: {}, kernel: {:?} }}",
            self.var, self.kernel
        )
    }
}

impl ModelBasedUtility {
    pub fn new(model: Arc<EnvModel>, spec: &VariableSpec, kernel: Kernel) -> Result<Self> {
        let net = model.network().ok_or(Error::SpecMatch(0))?;
        let var = spec.resolve(net)?;
        Ok(ModelBasedUtility { model, var, kernel })
    }

    pub fn model(&self) -> &Arc<EnvModel> {
        &self.model
    }

    pub fn var(&self) -> usize {
        self.var
    }

    /// Evaluates at `h`. When `ctx` filters the same model the utility is
    /// bound to, its belief is reused instead of re-filtering `h`.
    pub fn eval(&self, h: &InteractionHistory, ctx: Option<&ModelContext>) -> Result<f64> {
        match &self.kernel {
            Kernel::AtTime(k) => {
                let shared = ctx.filter(|c| std::ptr::eq(c.model, Arc::as_ptr(&self.model)));
                let owned;
                let dist = match shared {
                    Some(c) => c.belief.dist(),
                    None => {
                        owned = self.model.belief(h)?;
                        owned.dist()
                    }
                };
                let p_true: f64 = dist
                    .iter()
                    .enumerate()
                    .filter(|(s, _)| (s >> self.var) & 1 == 1)
                    .map(|(_, w)| w)
                    .sum();
                Ok(p_true * k(h, true) + (1.0 - p_true) * k(h, false))
            }
            Kernel::Trajectory(k) => {
                let post = self.model.state_history_posterior(h)?;
                Ok(post.entries.iter().map(|(z, w)| w * k(h, z)).sum())
            }
        }
    }
}

pub fn model_based_utility(
    q: &Arc<EnvModel>,
    spec: &VariableSpec,
    kernel: Kernel,
    h: &InteractionHistory,
) -> Result<f64> {
    ModelBasedUtility::new(q.clone(), spec, kernel)?.eval(h, None)
}

/// `u3(h_m, h_x, h')`.
pub type ThreeArgUtility =
    Arc<dyn Fn(&InteractionHistory, &InteractionHistory, &InteractionHistory) -> f64 + Send + Sync>;
/// `u2(h_m, h')`.
pub type TwoArgUtility = Arc<dyn Fn(&InteractionHistory, &InteractionHistory) -> f64 + Send + Sync>;

/// `u2(h_m, h') = u3(h_m, h_m, h')`.
pub fn two_arg_from_three(u3: ThreeArgUtility) -> TwoArgUtility {
    Arc::new(move |hm, hp| u3(hm, hm, hp))
}

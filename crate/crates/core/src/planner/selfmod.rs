//! Self-modifying policies.
//!
//! Each policy maps a history to an action and the index of the policy
//! that will act next. The distinguished [`SelfModPolicy::Optimal`] member
//! chooses, at every history, the (action, successor) pair of greatest value.

use std::fmt;
use std::sync::Arc;

use crate::envmodel::{Belief, EnvModel};
use crate::error::{Error, Result};
use crate::history::{ActionSymbol, InteractionHistory};
use crate::utility::{utility_eval, ModelContext, UtilitySpec};

/// Values within this distance of the maximum count as tied.
pub const TIE_TOLERANCE: f64 = 1e-12;

pub type SelfModFn = Arc<dyn Fn(&InteractionHistory) -> (ActionSymbol, usize) + Send + Sync>;

#[derive(Clone)]
pub enum SelfModPolicy {
    Optimal,
    Fixed(SelfModFn),
}

impl fmt::Debug for SelfModPolicy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SelfModPolicy::Optimal => write!(f, "Optimal"),
            SelfModPolicy::Fixed(_) => write!(f, "Fixed"),
        }
    }
}

#[derive(Clone, Debug)]
pub struct SelfModPolicySet {
    policies: Vec<SelfModPolicy>,
    current: usize,
}

impl SelfModPolicySet {
    pub fn new(policies: Vec<SelfModPolicy>, current: usize) -> Result<Self> {
        if current >= policies.len() {
            return Err(Error::Index(format!(
                "current policy {current} out of range"
            )));
        }
        Ok(SelfModPolicySet { policies, current })
    }

    pub fn len(&self) -> usize {
        self.policies.len()
    }

    pub fn is_empty(&self) -> bool {
        self.policies.is_empty()
    }

    pub fn current(&self) -> usize {
        self.current
    }

    pub fn policies(&self) -> &[SelfModPolicy] {
        &self.policies
    }
}

struct Evaluator<'a> {
    set: &'a SelfModPolicySet,
    model: &'a EnvModel,
    utility: &'a UtilitySpec,
    gamma: f64,
}

impl Evaluator<'_> {
    /// `v(pi, h)` with `depth` further actions.
    fn value(
        &self,
        pi: usize,
        h: &mut InteractionHistory,
        b: &Belief,
        prev: Option<&Belief>,
        depth: usize,
    ) -> Result<f64> {
        let ctx = ModelContext {
            model: self.model,
            belief: b,
            prev,
        };
        let mut v = utility_eval(self.utility, h, Some(&ctx))?;
        if depth > 0 {
            let cont = match &self.set.policies[pi] {
                SelfModPolicy::Optimal => {
                    let mut best = f64::NEG_INFINITY;
                    for a in 0..self.model.n_actions() {
                        for next in 0..self.set.len() {
                            best = best.max(self.action_value(next, h, b, a, depth)?);
                        }
                    }
                    best
                }
                SelfModPolicy::Fixed(f) => {
                    let (a, next) = f(h);
                    if a >= self.model.n_actions() || next >= self.set.len() {
                        return Err(Error::Index(format!("policy {pi} returned ({a}, {next})")));
                    }
                    self.action_value(next, h, b, a, depth)?
                }
            };
            v += self.gamma * cont;
        }
        Ok(v)
    }

    /// `v(pi, ha) = sum_o rho(o|ha) v(pi, hao)`.
    fn action_value(
        &self,
        pi: usize,
        h: &mut InteractionHistory,
        b: &Belief,
        a: ActionSymbol,
        depth: usize,
    ) -> Result<f64> {
        let mut total = 0.0;
        for o in 0..self.model.n_observations() {
            if let Some((nb, rho)) = self.model.step_belief(b, a, o) {
                h.push(a, o)?;
                let v = self.value(pi, h, &nb, Some(b), depth - 1);
                h.pop();
                total += rho * v?;
            }
        }
        Ok(total)
    }
}

/// All `v(pi, ha)` at the root, as `(action, policy, value)`.
pub fn self_mod_values(
    set: &SelfModPolicySet,
    q: &EnvModel,
    u: &UtilitySpec,
    gamma: f64,
    h: &InteractionHistory,
    horizon: usize,
) -> Result<Vec<(ActionSymbol, usize, f64)>> {
    if horizon == 0 {
        return Err(Error::Parameter(
            "self-modification needs horizon >= 1".into(),
        ));
    }
    let ev = Evaluator {
        set,
        model: q,
        utility: u,
        gamma,
    };
    let b = q.belief(h)?;
    let mut h = h.clone();
    let mut out = Vec::new();
    for a in 0..q.n_actions() {
        for pi in 0..set.len() {
            out.push((a, pi, ev.action_value(pi, &mut h, &b, a, horizon)?));
        }
    }
    Ok(out)
}

/// Chooses `argmax_{(a, pi)} v(pi, ha)`.
///
/// If any maximizer keeps the current policy it is kept, so the agent only
/// switches policy for a strict improvement. Remaining ties go to the lowest
/// action, then the lowest policy index.
pub fn self_mod_select(
    set: &SelfModPolicySet,
    q: &EnvModel,
    u: &UtilitySpec,
    gamma: f64,
    h: &InteractionHistory,
    horizon: usize,
) -> Result<(ActionSymbol, usize)> {
    let values = self_mod_values(set, q, u, gamma, h, horizon)?;
    let best = values.iter().map(|v| v.2).fold(f64::NEG_INFINITY, f64::max);
    let tied = |v: f64| v >= best - TIE_TOLERANCE * best.abs().max(1.0);
    if let Some(&(a, pi, _)) = values
        .iter()
        .find(|&&(_, pi, v)| pi == set.current && tied(v))
    {
        return Ok((a, pi));
    }
    let &(a, pi, _) = values
        .iter()
        .find(|&&(_, _, v)| tied(v))
        .expect("nonempty value list");
    Ok((a, pi))
}

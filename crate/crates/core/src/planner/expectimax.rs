use crate::envmodel::{Belief, EnvModel};
use crate::error::{Error, Result};
use crate::history::{ActionSymbol, InteractionHistory};
use crate::utility::{utility_eval, DiscountSpec, ModelContext, UtilitySpec};

/// Exact finite-horizon expectimax over a model.
///
/// A node at history `h` is worth `w(t, |h|) u(h)` plus, if actions remain,
/// the best expected child value. `t` is fixed at the root: `|h|` for
/// [`Planner::value`] and `|h| + 1` for action values, so geometric
/// discounting reproduces `v(h) = u(h) + gamma max_a v(ha)`.
#[derive(Clone, Debug)]
pub struct Planner<'a> {
    pub model: &'a EnvModel,
    pub utility: &'a UtilitySpec,
    pub discount: DiscountSpec,
    pub horizon: usize,
    actions: Vec<ActionSymbol>,
}

impl<'a> Planner<'a> {
    pub fn new(
        model: &'a EnvModel,
        utility: &'a UtilitySpec,
        discount: DiscountSpec,
        horizon: usize,
    ) -> Self {
        Planner {
            model,
            utility,
            discount,
            horizon,
            actions: (0..model.n_actions()).collect(),
        }
    }

    /// Restricts every decision in the search tree to `actions`.
    pub fn with_actions(mut self, actions: Vec<ActionSymbol>) -> Result<Self> {
        if actions.is_empty() || actions.iter().any(|&a| a >= self.model.n_actions()) {
            return Err(Error::Parameter(
                "allowed action set must be nonempty and in range".into(),
            ));
        }
        self.actions = actions;
        Ok(self)
    }

    pub fn actions(&self) -> &[ActionSymbol] {
        &self.actions
    }

    fn beliefs(&self, h: &InteractionHistory) -> Result<(Belief, Option<Belief>)> {
        let b = self.model.belief(h)?;
        let prev = if h.is_empty() {
            None
        } else {
            Some(self.model.belief(&h.prefix(h.len() - 1))?)
        };
        Ok((b, prev))
    }

    pub fn value(&self, h: &InteractionHistory) -> Result<f64> {
        let (b, prev) = self.beliefs(h)?;
        let mut h = h.clone();
        let t = h.len();
        self.node_value(&mut h, &b, prev.as_ref(), t, self.horizon)
    }

    /// `v(ha)` for each allowed action, in the order of [`Planner::actions`].
    pub fn action_values(&self, h: &InteractionHistory) -> Result<Vec<(ActionSymbol, f64)>> {
        let (b, _) = self.beliefs(h)?;
        self.action_values_from(h, &b)
    }

    /// Like [`Planner::action_values`] with the belief after `h` supplied.
    pub fn action_values_from(
        &self,
        h: &InteractionHistory,
        b: &Belief,
    ) -> Result<Vec<(ActionSymbol, f64)>> {
        if self.horizon == 0 {
            return Err(Error::Parameter("action values need horizon >= 1".into()));
        }
        let mut h = h.clone();
        let t = h.len() + 1;
        self.actions
            .iter()
            .map(|&a| Ok((a, self.q_value(&mut h, b, a, t, self.horizon)?)))
            .collect()
    }

    /// Argmax of the action values; ties go to the lowest action index.
    pub fn best_action(&self, h: &InteractionHistory) -> Result<ActionSymbol> {
        Ok(argmax(&self.action_values(h)?))
    }

    pub fn best_action_from(&self, h: &InteractionHistory, b: &Belief) -> Result<ActionSymbol> {
        Ok(argmax(&self.action_values_from(h, b)?))
    }

    fn node_value(
        &self,
        h: &mut InteractionHistory,
        b: &Belief,
        prev: Option<&Belief>,
        t: usize,
        depth: usize,
    ) -> Result<f64> {
        let w = self.discount.weight(t, h.len());
        let mut v = 0.0;
        if w != 0.0 {
            let ctx = ModelContext {
                model: self.model,
                belief: b,
                prev,
            };
            v = w * utility_eval(self.utility, h, Some(&ctx))?;
        }
        if depth > 0 {
            let mut best = f64::NEG_INFINITY;
            for &a in &self.actions {
                best = best.max(self.q_value(h, b, a, t, depth)?);
            }
            v += best;
        }
        Ok(v)
    }

    fn q_value(
        &self,
        h: &mut InteractionHistory,
        b: &Belief,
        a: ActionSymbol,
        t: usize,
        depth: usize,
    ) -> Result<f64> {
        let mut total = 0.0;
        for o in 0..self.model.n_observations() {
            if let Some((nb, rho)) = self.model.step_belief(b, a, o) {
                h.push(a, o)?;
                let v = self.node_value(h, &nb, Some(b), t, depth - 1);
                h.pop();
                total += rho * v?;
            }
        }
        Ok(total)
    }
}

fn argmax(values: &[(ActionSymbol, f64)]) -> ActionSymbol {
    let mut best = values[0];
    for &(a, v) in &values[1..] {
        if v > best.1 || (v == best.1 && a < best.0) {
            best = (a, v);
        }
    }
    best.0
}

pub fn expectimax_value(
    q: &EnvModel,
    u: &UtilitySpec,
    d: &DiscountSpec,
    h: &InteractionHistory,
    horizon: usize,
) -> Result<f64> {
    Planner::new(q, u, *d, horizon).value(h)
}

pub fn best_action(
    q: &EnvModel,
    u: &UtilitySpec,
    d: &DiscountSpec,
    h: &InteractionHistory,
    horizon: usize,
) -> Result<ActionSymbol> {
    Planner::new(q, u, *d, horizon).best_action(h)
}

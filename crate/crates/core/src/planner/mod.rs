//! Planning and policy evaluation.

mod expectimax;
mod pastvalues;
mod policy;
mod selfmod;
mod sigma;

pub use expectimax::{best_action, expectimax_value, Planner};
pub use pastvalues::{
    observed_values, past_values, value_deltas, Condition, ConditionMode, ValueGrid,
};
pub use policy::{
    policy_value_mc, rollout, rollout_with, sample_row, ConstantPolicy, FnPolicy, McEstimate,
    PlannerPolicy, Policy, PolicyOutput, Rollout, UniformOver, UniformRandom,
};
pub use selfmod::{
    self_mod_select, self_mod_values, SelfModFn, SelfModPolicy, SelfModPolicySet, TIE_TOLERANCE,
};
pub use sigma::{stochastic_action_sigma, weighted_level_probs, SigmaBranch};

//! Model selection by description length, mixtures, rule-set enumeration
//! and model-based utilities.

mod bound;
mod modelutil;
mod space;
mod srv;

pub use bound::{prior_ratio_bound, BoundReport};
pub use modelutil::{
    model_based_utility, two_arg_from_three, AtTimeKernel, Kernel, ModelBasedUtility,
    ThreeArgUtility, TrajectoryKernel, TwoArgUtility, VariableSpec,
};
pub use space::{
    agree_on_histories, enumerate_exprs, learn_map_model, learn_map_model_capped,
    mixture_probability, CandidateSpace, MapResult, Mixture, NetworkFamily, ScoredModel,
    TableFamily, DEFAULT_CANDIDATE_CAP,
};
pub use srv::{
    enumerate_srv, fit_srv, is_true_structure, observed_sv, recover_structure, recovery_history,
    recovery_rate, srv_log2_likelihood, srv_network, Recovery, SrvFit, SrvParams, RELATION_NAMES,
    SRV_CANDIDATES, SRV_NAMES,
};

//! Empirical check of the prior-ratio bound for two competing models.
//!
//! Under histories drawn from `q`, the likelihood ratio `P(h|q')/P(h|q)`
//! has mean at most 1, so `q'` out-scores `q` with frequency at most
//! `prior(q')/prior(q)`.

use std::f64::consts::LN_2;

use rand::Rng;

use crate::envmodel::{description_length, EnvModel};
use crate::error::{Error, Result};
use crate::history::InteractionHistory;
use crate::rng::stream;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BoundReport {
    /// Fraction of sampled histories where the alternative out-scores the truth.
    pub frequency: f64,
    /// `prior(q') / prior(q)`.
    pub ratio: f64,
    /// Binomial standard error at the bound, `sqrt(r (1 - r) / n)`.
    pub std_err: f64,
    pub samples: usize,
    pub holds: bool,
}

/// Samples `samples` histories of length `len` from `truth` under uniform
/// random actions (sample `k` uses stream `k`). `log2_ratio` overrides
/// `|q| - |q'|` when given.
pub fn prior_ratio_bound(
    truth: &EnvModel,
    alt: &EnvModel,
    len: usize,
    samples: usize,
    seed: u64,
    log2_ratio: Option<f64>,
) -> Result<BoundReport> {
    if truth.n_actions() != alt.n_actions() || truth.n_observations() != alt.n_observations() {
        return Err(Error::Parameter("models must share alphabets".into()));
    }
    if samples == 0 {
        return Err(Error::Parameter("need at least one sample".into()));
    }
    let log2_ratio =
        log2_ratio.unwrap_or(description_length(truth) as f64 - description_length(alt) as f64);
    let mut wins = 0usize;
    for k in 0..samples {
        let mut rng = stream(seed, k as u64);
        let mut h = InteractionHistory::new(truth.n_actions(), truth.n_observations());
        let mut state = truth.start();
        for _ in 0..len {
            let a = rng.gen_range(0..truth.n_actions());
            let (next, o) = truth.simulate_step(state, a, &mut rng);
            state = next;
            h.push(a, o)?;
        }
        let lt = truth.history_log_probability(&h) / LN_2;
        let la = alt.history_log_probability(&h) / LN_2;
        if la + log2_ratio > lt {
            wins += 1;
        }
    }
    let ratio = log2_ratio.exp2();
    let r = ratio.min(1.0);
    let std_err = (r * (1.0 - r) / samples as f64).sqrt();
    let frequency = wins as f64 / samples as f64;
    Ok(BoundReport {
        frequency,
        ratio,
        std_err,
        samples,
        holds: frequency <= ratio + 3.0 * std_err,
    })
}

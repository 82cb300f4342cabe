//! Enumeration of three-variable rule sets over `s, r, v`.
//!
//! Each candidate assigns one variable a binary relation (and, or, xor) of
//! two previous values, and each of the other two variables a copy of one
//! previous value. With three relations, three placements, 3 x 3 binary
//! inputs, 3 x 3 copy inputs and two initial values of the hidden `r`,
//! there are 1458 candidates.

use std::f64::consts::LN_2;

use rayon::prelude::*;

use crate::envmodel::{quantize_probability, BooleanNetwork, EnvModel, Expr};
use crate::error::{Error, Result};
use crate::history::InteractionHistory;
use crate::planner::{rollout_with, UniformOver};
use crate::rng::stream;

pub const SRV_CANDIDATES: usize = 1458;
pub const SRV_NAMES: [&str; 3] = ["s", "r", "v"];
pub const RELATION_NAMES: [&str; 3] = ["and", "or", "xor"];

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct SrvParams {
    /// 0 = and, 1 = or, 2 = xor.
    pub binary_relation: u8,
    /// Variable (0 = s, 1 = r, 2 = v) that receives the relation.
    pub binary_place: u8,
    pub binary_inputs: [u8; 2],
    /// Sources copied into `place + 1` and `place + 2` (mod 3).
    pub other_inputs: [u8; 2],
    pub initial_r: bool,
}

impl SrvParams {
    /// Decodes a candidate index in `0..1458`, lowest digit first.
    pub fn decode(index: usize) -> SrvParams {
        assert!(index < SRV_CANDIDATES, "candidate index out of range");
        let mut c = index;
        let mut digit = || {
            let d = (c % 3) as u8;
            c /= 3;
            d
        };
        let binary_relation = digit();
        let binary_place = digit();
        let binary_inputs = [digit(), digit()];
        let other_inputs = [digit(), digit()];
        SrvParams {
            binary_relation,
            binary_place,
            binary_inputs,
            other_inputs,
            initial_r: c == 1,
        }
    }

    pub fn all() -> Vec<SrvParams> {
        (0..SRV_CANDIDATES).map(SrvParams::decode).collect()
    }

    pub fn relation(&self, x: bool, y: bool) -> bool {
        match self.binary_relation {
            0 => x && y,
            1 => x || y,
            _ => x ^ y,
        }
    }

    /// The deterministic successor of `(s, r, v)`.
    pub fn step(&self, x: [bool; 3]) -> [bool; 3] {
        let p = self.binary_place as usize;
        let mut y = [false; 3];
        y[p] = self.relation(
            x[self.binary_inputs[0] as usize],
            x[self.binary_inputs[1] as usize],
        );
        y[(p + 1) % 3] = x[self.other_inputs[0] as usize];
        y[(p + 2) % 3] = x[self.other_inputs[1] as usize];
        y
    }

    /// Whether the rules reproduce the observed `s` and `v` sequences.
    pub fn matches(&self, s: &[bool], v: &[bool]) -> bool {
        let Some((&s0, &v0)) = s.first().zip(v.first()) else {
            return true;
        };
        let mut x = [s0, self.initial_r, v0];
        for t in 1..s.len() {
            x = self.step(x);
            if x[0] != s[t] || x[2] != v[t] {
                return false;
            }
        }
        true
    }

    pub fn describe(&self) -> String {
        let n = |i: u8| SRV_NAMES[i as usize];
        let p = self.binary_place as usize;
        format!(
            "{} = {} {} {}; {} = {}; {} = {}; initial r = {}",
            SRV_NAMES[p],
            n(self.binary_inputs[0]),
            RELATION_NAMES[self.binary_relation as usize],
            n(self.binary_inputs[1]),
            SRV_NAMES[(p + 1) % 3],
            n(self.other_inputs[0]),
            SRV_NAMES[(p + 2) % 3],
            n(self.other_inputs[1]),
            self.initial_r
        )
    }
}

/// Every candidate reproducing both sequences, in index order.
pub fn enumerate_srv(s: &[bool], v: &[bool]) -> Result<Vec<SrvParams>> {
    if s.len() != v.len() {
        return Err(Error::UnequalLengths(s.len(), v.len()));
    }
    if s.is_empty() {
        return Err(Error::Parameter("sequences must be nonempty".into()));
    }
    Ok(SrvParams::all()
        .into_iter()
        .filter(|c| c.matches(s, v))
        .collect())
}

fn binary_expr(relation: u8, x: Expr, y: Expr) -> Expr {
    match relation {
        0 => Expr::and(x, y),
        1 => Expr::or(x, y),
        _ => Expr::xor(x, y),
    }
}

/// The candidate as a network with the delusion-box observation wiring:
/// the relation is kept with probability `alpha` and negated otherwise.
/// `initial` is the state before the first step.
pub fn srv_network(params: &SrvParams, alpha: f64, initial: [bool; 3]) -> Result<BooleanNetwork> {
    let var = |i: u8| Expr::State(i as usize);
    let rel = binary_expr(
        params.binary_relation,
        var(params.binary_inputs[0]),
        var(params.binary_inputs[1]),
    );
    let p = params.binary_place as usize;
    let mut updates = vec![Expr::Lit(false); 3];
    updates[p] = Expr::choice(alpha, rel.clone(), Expr::not(rel));
    updates[(p + 1) % 3] = var(params.other_inputs[0]);
    updates[(p + 2) % 3] = var(params.other_inputs[1]);
    let (b, c, d) = (Expr::Action(1), Expr::Action(2), Expr::Action(3));
    let names = |xs: &[&str]| xs.iter().map(|s| s.to_string()).collect::<Vec<_>>();
    BooleanNetwork::new(
        names(&SRV_NAMES),
        names(&["a", "b", "c", "d"]),
        names(&["o", "p"]),
        initial.to_vec(),
        updates,
        vec![
            Expr::ite(b.clone(), c, Expr::State(0)),
            Expr::ite(b, d, Expr::State(2)),
        ],
    )
}

/// Splits delusion-box observations into `s` and `v` sequences. Every
/// action must leave `b` unset.
pub fn observed_sv(h: &InteractionHistory) -> Result<(Vec<bool>, Vec<bool>)> {
    if h.n_actions() != 16 || h.n_observations() != 4 {
        return Err(Error::Parameter(
            "expected 4 action bits and 2 observation bits".into(),
        ));
    }
    if h.actions().any(|a| a & 0b10 != 0) {
        return Err(Error::Parameter(
            "training actions must leave b unset".into(),
        ));
    }
    Ok(h.observations().map(|o| (o & 1 == 1, o & 2 == 2)).unzip())
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SrvFit {
    pub params: SrvParams,
    /// Minimum number of relation flips needed to explain the data.
    pub flips: usize,
    pub alpha_hat: f64,
    /// `log2 P(h[2..] | q)` given the first observation.
    pub log2_likelihood: f64,
}

/// Fits one candidate: counts the fewest flips, sets `alpha` to the
/// quantized maximum-likelihood frequency and scores the data exactly.
/// `None` when no flip pattern explains the data.
pub fn fit_srv(params: &SrvParams, s: &[bool], v: &[bool]) -> Option<SrvFit> {
    let n = s.len();
    if n < 2 {
        return None;
    }
    let transitions = n - 1;
    // Hidden r is the only unobserved bit; track it over two values.
    let mut cost = [usize::MAX; 2];
    cost[usize::from(params.initial_r)] = 0;
    for t in 1..n {
        let mut next = [usize::MAX; 2];
        for r in 0..2 {
            if cost[r] == usize::MAX {
                continue;
            }
            let det = params.step([s[t - 1], r == 1, v[t - 1]]);
            for flip in [false, true] {
                let mut y = det;
                y[params.binary_place as usize] ^= flip;
                if y[0] == s[t] && y[2] == v[t] {
                    let c = cost[r] + usize::from(flip);
                    let slot = &mut next[usize::from(y[1])];
                    *slot = (*slot).min(c);
                }
            }
        }
        cost = next;
    }
    let flips = cost[0].min(cost[1]);
    if flips == usize::MAX {
        return None;
    }
    let alpha_hat = f64::from(quantize_probability(
        (transitions - flips) as f64 / transitions as f64,
    )) / 1024.0;
    let log2_likelihood = srv_log2_likelihood(params, alpha_hat, s, v);
    Some(SrvFit {
        params: *params,
        flips,
        alpha_hat,
        log2_likelihood,
    })
}

/// Exact `log2` likelihood of steps `2..n` by forward filtering over `r`.
pub fn srv_log2_likelihood(params: &SrvParams, alpha: f64, s: &[bool], v: &[bool]) -> f64 {
    let mut w = [0.0f64; 2];
    w[usize::from(params.initial_r)] = 1.0;
    let mut log = 0.0;
    for t in 1..s.len() {
        let mut next = [0.0; 2];
        for r in 0..2 {
            if w[r] == 0.0 {
                continue;
            }
            let det = params.step([s[t - 1], r == 1, v[t - 1]]);
            for (flip, p) in [(false, alpha), (true, 1.0 - alpha)] {
                let mut y = det;
                y[params.binary_place as usize] ^= flip;
                if y[0] == s[t] && y[2] == v[t] {
                    next[usize::from(y[1])] += w[r] * p;
                }
            }
        }
        let total = next[0] + next[1];
        if total == 0.0 {
            return f64::NEG_INFINITY;
        }
        log += total.ln();
        w = [next[0] / total, next[1] / total];
    }
    log / LN_2
}

#[derive(Clone, Debug, PartialEq)]
pub struct Recovery {
    pub fit: SrvFit,
    /// Candidates that explain the data at all.
    pub consistent: usize,
    pub success: bool,
}

/// Whether `fit` is the true structure: `s = r xor v` (either input
/// order), `r = s`, `v = r`, with `alpha` within 0.01 of `alpha_true`.
pub fn is_true_structure(fit: &SrvFit, alpha_true: f64) -> bool {
    let p = &fit.params;
    let mut inputs = p.binary_inputs;
    inputs.sort_unstable();
    p.binary_relation == 2
        && p.binary_place == 0
        && inputs == [1, 2]
        && p.other_inputs == [0, 1]
        && (fit.alpha_hat - alpha_true).abs() <= 0.01
}

/// Selects the candidate of highest likelihood over the 1458-member family.
/// All candidates serialize to the same number of tokens, so the prior does
/// not discriminate; ties go to the lexicographically first serialization.
pub fn recover_structure(h: &InteractionHistory, alpha_true: f64) -> Result<Recovery> {
    let (s, v) = observed_sv(h)?;
    let fits: Vec<SrvFit> = SrvParams::all()
        .par_iter()
        .filter_map(|p| fit_srv(p, &s, &v))
        .collect();
    let consistent = fits.len();
    let key = |f: &SrvFit| {
        let init = [s[0], f.params.initial_r, v[0]];
        let q: EnvModel = srv_network(&f.params, f.alpha_hat, init)
            .expect("valid candidate")
            .into();
        crate::envmodel::canonical_tokens(&q)
    };
    let mut best: Option<SrvFit> = None;
    for f in fits {
        best = match best {
            None => Some(f),
            Some(b) if f.log2_likelihood > b.log2_likelihood => Some(f),
            Some(b) if f.log2_likelihood == b.log2_likelihood && key(&f) < key(&b) => Some(f),
            keep => keep,
        };
    }
    let fit = best.ok_or(Error::EmptySpace)?;
    Ok(Recovery {
        success: is_true_structure(&fit, alpha_true),
        fit,
        consistent,
    })
}

/// A training history from the delusion-box environment under uniformly
/// random actions with `b` unset.
pub fn recovery_history(alpha: f64, steps: usize, seed: u64) -> Result<InteractionHistory> {
    let q = crate::envmodel::delusion_env_6_3(alpha)?;
    let allowed: Vec<usize> = (0..16).filter(|a| a & 0b10 == 0).collect();
    let mut pi = UniformOver::new(16, &allowed);
    Ok(rollout_with(&q, &mut pi, steps, &mut stream(seed, 0))?.history)
}

/// Fraction of seeds `0..seeds` whose history of `steps` steps recovers the
/// true structure.
pub fn recovery_rate(alpha: f64, steps: usize, seeds: u64) -> Result<f64> {
    let ok: Vec<bool> = (0..seeds)
        .into_par_iter()
        .map(|seed| Ok(recover_structure(&recovery_history(alpha, steps, seed)?, alpha)?.success))
        .collect::<Result<_>>()?;
    Ok(ok.iter().filter(|&&b| b).count() as f64 / seeds as f64)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn decode_covers_family() {
        let all = SrvParams::all();
        let mut sorted = all.clone();
        sorted.sort();
        sorted.dedup();
        assert_eq!(sorted.len(), SRV_CANDIDATES);
    }

    #[test]
    fn step_of_true_rules() {
        let p = SrvParams {
            binary_relation: 2,
            binary_place: 0,
            binary_inputs: [1, 2],
            other_inputs: [0, 1],
            initial_r: false,
        };
        assert_eq!(p.step([true, false, false]), [false, true, false]);
        assert_eq!(p.describe(), "s = r xor v; r = s; v = r; initial r = false");
    }

    #[test]
    fn unequal_lengths() {
        assert_eq!(
            enumerate_srv(&[true], &[]),
            Err(Error::UnequalLengths(1, 0))
        );
    }
}

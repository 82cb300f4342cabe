//! Candidate spaces, MAP selection and mixture probabilities.

use std::cmp::Ordering;
use std::f64::consts::LN_2;

use rayon::prelude::*;

use crate::envmodel::{
    canonical_tokens, description_length, table_lookup_length, BooleanNetwork, EnvModel, Expr,
    Token, TransitionTable,
};
use crate::error::{Error, Result};
use crate::history::InteractionHistory;

/// Default cap on the number of generated candidates.
pub const DEFAULT_CANDIDATE_CAP: u64 = 1_000_000;

const BATCH: usize = 4096;

/// Transition tables with up to `max_states` states whose probabilities are
/// multiples of `1 / denominator`. The start state is fixed at 0, which
/// loses nothing since states can be relabeled.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TableFamily {
    pub max_states: usize,
    pub n_actions: usize,
    pub n_observations: usize,
    pub denominator: u32,
}

/// Boolean networks over declared variables whose expressions have depth
/// at most `max_depth`. Choice nodes draw their probability from
/// `choice_probs`.
#[derive(Clone, Debug, PartialEq)]
pub struct NetworkFamily {
    pub state_names: Vec<String>,
    pub action_names: Vec<String>,
    pub observation_names: Vec<String>,
    pub max_depth: usize,
    pub choice_probs: Vec<f64>,
}

#[derive(Clone, Debug)]
pub enum CandidateSpace {
    Explicit(Vec<EnvModel>),
    Tables(TableFamily),
    Networks(NetworkFamily),
}

#[derive(Clone, Debug)]
pub struct ScoredModel {
    pub model: EnvModel,
    pub log2_likelihood: f64,
    pub length_bits: u64,
    /// `log2(P(h|q) 2^-|q|)`.
    pub log2_score: f64,
    tokens: Vec<Token>,
}

impl ScoredModel {
    pub fn new(model: EnvModel, h: &InteractionHistory) -> Self {
        let log2_likelihood = model.history_log_probability(h) / LN_2;
        let tokens = canonical_tokens(&model);
        let length_bits = description_length(&model);
        ScoredModel {
            model,
            log2_likelihood,
            length_bits,
            log2_score: log2_likelihood - length_bits as f64,
            tokens,
        }
    }

    pub fn score(&self) -> f64 {
        self.log2_score.exp2()
    }

    /// Higher score first, then shorter, then lexicographically first tokens.
    pub fn rank(&self, other: &ScoredModel) -> Ordering {
        other
            .log2_score
            .partial_cmp(&self.log2_score)
            .unwrap_or(Ordering::Equal)
            .then(self.length_bits.cmp(&other.length_bits))
            .then_with(|| self.tokens.cmp(&other.tokens))
    }
}

#[derive(Clone, Debug)]
pub struct MapResult {
    pub best: ScoredModel,
    pub scored: usize,
    /// Length bound applied to generated spaces.
    pub bound_bits: Option<u64>,
}

impl MapResult {
    pub fn score(&self) -> f64 {
        self.best.score()
    }
}

fn compositions(total: u32, parts: usize) -> Vec<Vec<u32>> {
    fn rec(left: u32, parts: usize, cur: &mut Vec<u32>, out: &mut Vec<Vec<u32>>) {
        if parts == 1 {
            cur.push(left);
            out.push(cur.clone());
            cur.pop();
            return;
        }
        for x in 0..=left {
            cur.push(x);
            rec(left - x, parts - 1, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    rec(total, parts, &mut Vec::with_capacity(parts), &mut out);
    out
}

fn binomial(n: u64, k: u64) -> f64 {
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

impl TableFamily {
    fn length_bits(&self, n_states: usize) -> u64 {
        let tokens = 5 + (n_states * self.n_actions * n_states * self.n_observations) as u64;
        tokens * crate::envmodel::BITS_PER_TOKEN
    }

    fn count(&self, n_states: usize) -> f64 {
        let width = (n_states * self.n_observations) as u64;
        let per_row = binomial(u64::from(self.denominator) + width - 1, width - 1);
        per_row.powi((n_states * self.n_actions) as i32)
    }

    fn for_each(
        &self,
        bound: Option<u64>,
        cap: u64,
        f: &mut dyn FnMut(EnvModel) -> Result<()>,
    ) -> Result<()> {
        if self.max_states == 0
            || self.n_actions == 0
            || self.n_observations == 0
            || self.denominator == 0
        {
            return Err(Error::Parameter(
                "table family needs positive sizes and denominator".into(),
            ));
        }
        let sizes: Vec<usize> = (1..=self.max_states)
            .filter(|&k| bound.is_none_or(|b| self.length_bits(k) <= b))
            .collect();
        let total: f64 = sizes.iter().map(|&k| self.count(k)).sum();
        if total > cap as f64 {
            return Err(Error::ResourceCap(format!(
                "table family has {total:.3e} candidates, cap {cap}"
            )));
        }
        let den = f64::from(self.denominator);
        for k in sizes {
            let rows = compositions(self.denominator, k * self.n_observations);
            let n_rows = k * self.n_actions;
            let mut idx = vec![0usize; n_rows];
            loop {
                let probs: Vec<f64> = idx
                    .iter()
                    .flat_map(|&r| rows[r].iter().map(|&c| f64::from(c) / den))
                    .collect();
                f(TransitionTable::new(k, self.n_actions, self.n_observations, 0, probs)?.into())?;
                let mut pos = n_rows;
                loop {
                    if pos == 0 {
                        break;
                    }
                    pos -= 1;
                    idx[pos] += 1;
                    if idx[pos] < rows.len() {
                        break;
                    }
                    idx[pos] = 0;
                }
                if idx.iter().all(|&i| i == 0) {
                    break;
                }
            }
        }
        Ok(())
    }
}

/// All expressions over the given atoms with at most `depth` levels of
/// operators above the atoms.
pub fn enumerate_exprs(
    n_state: usize,
    n_action: usize,
    depth: usize,
    choice_probs: &[f64],
) -> Vec<Expr> {
    let mut levels: Vec<Vec<Expr>> = Vec::new();
    let mut atoms = vec![Expr::Lit(false), Expr::Lit(true)];
    atoms.extend((0..n_state).map(Expr::State));
    atoms.extend((0..n_action).map(Expr::Action));
    levels.push(atoms);
    for d in 1..=depth {
        // (expression, built at level d - 1)
        let below: Vec<(&Expr, bool)> = levels
            .iter()
            .enumerate()
            .flat_map(|(k, l)| l.iter().map(move |e| (e, k == d - 1)))
            .collect();
        let mut cur = Vec::new();
        for a in &levels[d - 1] {
            cur.push(Expr::not(a.clone()));
        }
        // Binary nodes need at least one child from the previous level.
        for &(a, fa) in &below {
            for &(b, fb) in &below {
                if !(fa || fb) {
                    continue;
                }
                cur.push(Expr::and(a.clone(), b.clone()));
                cur.push(Expr::or(a.clone(), b.clone()));
                cur.push(Expr::xor(a.clone(), b.clone()));
                for &p in choice_probs {
                    cur.push(Expr::choice(p, a.clone(), b.clone()));
                }
            }
        }
        levels.push(cur);
    }
    levels.into_iter().flatten().collect()
}

impl NetworkFamily {
    fn for_each(
        &self,
        bound: Option<u64>,
        cap: u64,
        f: &mut dyn FnMut(EnvModel) -> Result<()>,
    ) -> Result<()> {
        let ns = self.state_names.len();
        let exprs = enumerate_exprs(
            ns,
            self.action_names.len(),
            self.max_depth,
            &self.choice_probs,
        );
        let slots = ns + self.observation_names.len();
        let total = (exprs.len() as f64).powi(slots as i32) * 2f64.powi(ns as i32);
        if total > cap as f64 {
            return Err(Error::ResourceCap(format!(
                "network family has {total:.3e} candidates, cap {cap}"
            )));
        }
        let mut idx = vec![0usize; slots];
        loop {
            for init in 0..(1u32 << ns) {
                let initial: Vec<bool> = (0..ns).map(|i| (init >> i) & 1 == 1).collect();
                let chosen: Vec<Expr> = idx.iter().map(|&i| exprs[i].clone()).collect();
                let net = BooleanNetwork::new(
                    self.state_names.clone(),
                    self.action_names.clone(),
                    self.observation_names.clone(),
                    initial,
                    chosen[..ns].to_vec(),
                    chosen[ns..].to_vec(),
                )?;
                let q: EnvModel = net.into();
                if bound.is_none_or(|b| description_length(&q) <= b) {
                    f(q)?;
                }
            }
            let mut pos = slots;
            loop {
                if pos == 0 {
                    return Ok(());
                }
                pos -= 1;
                idx[pos] += 1;
                if idx[pos] < exprs.len() {
                    break;
                }
                idx[pos] = 0;
            }
        }
    }
}

impl CandidateSpace {
    /// The truth plus every model obtained by moving `step` probability
    /// between two entries of one row.
    pub fn table_neighborhood(t: &TransitionTable, step: f64) -> Result<CandidateSpace> {
        let mut out: Vec<EnvModel> = vec![t.clone().into()];
        let width = t.n_states() * t.n_observations();
        for row in 0..t.n_states() * t.n_actions() {
            for from in 0..width {
                for to in 0..width {
                    let mut probs = t.probs().to_vec();
                    let (i, j) = (row * width + from, row * width + to);
                    if from == to || probs[i] < step - 1e-12 {
                        continue;
                    }
                    probs[i] = ((probs[i] - step) * 1e9).round() / 1e9;
                    probs[j] = ((probs[j] + step) * 1e9).round() / 1e9;
                    if probs[j] > 1.0 {
                        continue;
                    }
                    out.push(
                        TransitionTable::new(
                            t.n_states(),
                            t.n_actions(),
                            t.n_observations(),
                            t.start(),
                            probs,
                        )?
                        .into(),
                    );
                }
            }
        }
        Ok(CandidateSpace::Explicit(out))
    }

    /// Visits every candidate within `bound` bits (generators only).
    pub fn for_each(
        &self,
        bound: Option<u64>,
        cap: u64,
        f: &mut dyn FnMut(EnvModel) -> Result<()>,
    ) -> Result<()> {
        match self {
            CandidateSpace::Explicit(ms) => ms.iter().try_for_each(|m| f(m.clone())),
            CandidateSpace::Tables(t) => t.for_each(bound, cap, f),
            CandidateSpace::Networks(n) => n.for_each(bound, cap, f),
        }
    }

    fn is_generator(&self) -> bool {
        !matches!(self, CandidateSpace::Explicit(_))
    }
}

fn search_bound(h: &InteractionHistory, space: &CandidateSpace) -> Option<u64> {
    space
        .is_generator()
        .then(|| table_lookup_length(h.n_actions(), h.n_observations(), h.len()))
}

fn score_all(
    h: &InteractionHistory,
    space: &CandidateSpace,
    cap: u64,
    mut sink: impl FnMut(Vec<ScoredModel>),
) -> Result<Option<u64>> {
    let bound = search_bound(h, space);
    let mut batch = Vec::with_capacity(BATCH);
    let mut flush = |batch: &mut Vec<EnvModel>| {
        let scored: Vec<ScoredModel> = batch
            .par_drain(..)
            .map(|m| ScoredModel::new(m, h))
            .collect();
        sink(scored);
    };
    space.for_each(bound, cap, &mut |m| {
        batch.push(m);
        if batch.len() == BATCH {
            flush(&mut batch);
        }
        Ok(())
    })?;
    flush(&mut batch);
    Ok(bound)
}

/// `argmax_q P(h|q) 2^-|q|` over the space.
pub fn learn_map_model(h: &InteractionHistory, space: &CandidateSpace) -> Result<MapResult> {
    learn_map_model_capped(h, space, DEFAULT_CANDIDATE_CAP)
}

pub fn learn_map_model_capped(
    h: &InteractionHistory,
    space: &CandidateSpace,
    cap: u64,
) -> Result<MapResult> {
    let mut best: Option<ScoredModel> = None;
    let mut scored = 0;
    let bound = score_all(h, space, cap, |batch| {
        scored += batch.len();
        for c in batch {
            if best.as_ref().is_none_or(|b| c.rank(b) == Ordering::Less) {
                best = Some(c);
            }
        }
    })?;
    let best = best.ok_or(Error::EmptySpace)?;
    Ok(MapResult {
        best,
        scored,
        bound_bits: bound,
    })
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Mixture {
    /// `log2 sum_q P(h|q) 2^-|q|`.
    pub log2_unnormalized: f64,
    /// `log2 sum_q 2^-|q|`.
    pub log2_prior_mass: f64,
}

impl Mixture {
    /// The mixture with priors renormalized over the space.
    pub fn probability(&self) -> f64 {
        (self.log2_unnormalized - self.log2_prior_mass).exp2()
    }

    pub fn unnormalized(&self) -> f64 {
        self.log2_unnormalized.exp2()
    }
}

fn log2_sum_exp2(xs: &[f64]) -> f64 {
    let m = xs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if m == f64::NEG_INFINITY {
        return m;
    }
    m + xs.iter().map(|x| (x - m).exp2()).sum::<f64>().log2()
}

pub fn mixture_probability(h: &InteractionHistory, space: &CandidateSpace) -> Result<Mixture> {
    let mut scores = Vec::new();
    let mut priors = Vec::new();
    score_all(h, space, DEFAULT_CANDIDATE_CAP, |batch| {
        for c in batch {
            scores.push(c.log2_score);
            priors.push(-(c.length_bits as f64));
        }
    })?;
    if priors.is_empty() {
        return Err(Error::EmptySpace);
    }
    Ok(Mixture {
        log2_unnormalized: log2_sum_exp2(&scores),
        log2_prior_mass: log2_sum_exp2(&priors),
    })
}

/// Whether two models assign the same probability, within `tol`, to every
/// history of length `len`.
pub fn agree_on_histories(a: &EnvModel, b: &EnvModel, len: usize, tol: f64) -> bool {
    if a.n_actions() != b.n_actions() || a.n_observations() != b.n_observations() {
        return false;
    }
    let (na, no) = (a.n_actions(), a.n_observations());
    fn rec(a: &EnvModel, b: &EnvModel, h: &mut InteractionHistory, left: usize, tol: f64) -> bool {
        if left == 0 {
            return (a.history_probability(h) - b.history_probability(h)).abs() <= tol;
        }
        for act in 0..h.n_actions() {
            for o in 0..h.n_observations() {
                h.push(act, o).expect("symbols in range");
                let ok = rec(a, b, h, left - 1, tol);
                h.pop();
                if !ok {
                    return false;
                }
            }
        }
        true
    }
    rec(a, b, &mut InteractionHistory::new(na, no), len, tol)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::envmodel::bernoulli;

    #[test]
    fn compositions_count() {
        assert_eq!(compositions(2, 4).len(), 10);
        assert_eq!(compositions(10, 1), vec![vec![10]]);
        assert!(compositions(3, 3)
            .iter()
            .all(|c| c.iter().sum::<u32>() == 3));
    }

    #[test]
    fn table_family_is_exhaustive_and_distinct() {
        let fam = TableFamily {
            max_states: 2,
            n_actions: 1,
            n_observations: 2,
            denominator: 2,
        };
        let mut seen = Vec::new();
        fam.for_each(None, 1_000_000, &mut |m| {
            seen.push(canonical_tokens(&m));
            Ok(())
        })
        .unwrap();
        // one state: 3 rows; two states: C(5,3)^2 = 100
        assert_eq!(seen.len(), 3 + 100);
        let n = seen.len();
        seen.sort();
        seen.dedup();
        assert_eq!(seen.len(), n);
    }

    #[test]
    fn table_family_respects_cap() {
        let fam = TableFamily {
            max_states: 3,
            n_actions: 2,
            n_observations: 2,
            denominator: 10,
        };
        let h = InteractionHistory::from_pairs(2, 2, &[(0, 0), (1, 1)]).unwrap();
        assert!(matches!(
            learn_map_model(&h, &CandidateSpace::Tables(fam)),
            Err(Error::ResourceCap(_))
        ));
    }

    #[test]
    fn expr_enumeration_depths() {
        let e0 = enumerate_exprs(1, 0, 0, &[]);
        assert_eq!(e0.len(), 3);
        let e1 = enumerate_exprs(1, 0, 1, &[]);
        // 3 atoms + 3 negations + 3 ops * 9 pairs
        assert_eq!(e1.len(), 3 + 3 + 27);
        let n1 = enumerate_exprs(1, 0, 1, &[0.5]).len();
        assert_eq!(n1, 3 + 3 + 4 * 9);
        let e2 = enumerate_exprs(1, 0, 2, &[0.5]);
        assert_eq!(e2.len(), n1 + 39 + 4 * (n1 * n1 - 9));
        assert!(e2.iter().all(|e| e.depth() <= 3));
    }

    #[test]
    fn map_prefers_likely_model() {
        let h = InteractionHistory::from_pairs(
            2,
            2,
            &(0..10)
                .map(|i| (0, usize::from(i >= 2)))
                .collect::<Vec<_>>(),
        )
        .unwrap();
        let space =
            CandidateSpace::Explicit(vec![bernoulli(0.2).unwrap(), bernoulli(0.8).unwrap()]);
        let r = learn_map_model(&h, &space).unwrap();
        assert_eq!(r.best.model, bernoulli(0.8).unwrap());
    }

    #[test]
    fn empty_space_errors() {
        let h = InteractionHistory::new(2, 2);
        assert_eq!(
            learn_map_model(&h, &CandidateSpace::Explicit(vec![])).unwrap_err(),
            Error::EmptySpace
        );
    }
}

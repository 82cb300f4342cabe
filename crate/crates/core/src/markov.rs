//! Markov chains derived from environment models under uniformly random
//! actions: class structure, periods, stationary distributions and
//! subsequence statistics.

use nalgebra::{DMatrix, DVector};
use petgraph::algo::tarjan_scc;
use petgraph::graph::DiGraph;
use rand::Rng;
use rayon::prelude::*;

use crate::envmodel::{EnvModel, TransitionTable};
use crate::error::{Error, Result};
use crate::history::{ActionSymbol, InteractionHistory, ObservationSymbol};
use crate::planner::McEstimate;
use crate::rng::stream;

const ROW_TOLERANCE: f64 = 1e-9;

/// One labeled transition `s -> (s', a, o)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LabeledTransition {
    pub next: usize,
    pub action: ActionSymbol,
    pub observation: ObservationSymbol,
    pub prob: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct MarkovChain {
    p: DMatrix<f64>,
    labels: Option<Vec<Vec<LabeledTransition>>>,
    start: usize,
}

impl MarkovChain {
    pub fn new(rows: Vec<Vec<f64>>, start: usize) -> Result<Self> {
        let n = rows.len();
        if n == 0 || start >= n {
            return Err(Error::Parameter(
                "chain needs states and a valid start".into(),
            ));
        }
        for row in &rows {
            if row.len() != n {
                return Err(Error::Parameter("transition matrix must be square".into()));
            }
            let sum: f64 = row.iter().sum();
            if row.iter().any(|&x| x < 0.0) || (sum - 1.0).abs() > ROW_TOLERANCE {
                return Err(Error::Normalization { sum });
            }
        }
        let p = DMatrix::from_fn(n, n, |i, j| rows[i][j]);
        Ok(MarkovChain {
            p,
            labels: None,
            start,
        })
    }

    pub fn n_states(&self) -> usize {
        self.p.nrows()
    }

    pub fn start(&self) -> usize {
        self.start
    }

    pub fn prob(&self, s: usize, s2: usize) -> f64 {
        self.p[(s, s2)]
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.p
    }

    /// Labeled transitions out of `s`, ordered by next state, action, then
    /// observation.
    pub fn labeled(&self, s: usize) -> Option<&[LabeledTransition]> {
        self.labels.as_ref().map(|l| l[s].as_slice())
    }
}

/// Transition `s -> (s', a, o)` with probability `M[(s,a)][(s',o)] / |A|`.
pub fn mdp_to_chain(m: &TransitionTable) -> MarkovChain {
    let (ns, na, no) = (m.n_states(), m.n_actions(), m.n_observations());
    let mut labels = vec![Vec::with_capacity(ns * na * no); ns];
    let mut p = DMatrix::zeros(ns, ns);
    for (s, out) in labels.iter_mut().enumerate() {
        for next in 0..ns {
            for action in 0..na {
                for observation in 0..no {
                    let prob = m.prob(s, action, next, observation) / na as f64;
                    out.push(LabeledTransition {
                        next,
                        action,
                        observation,
                        prob,
                    });
                    p[(s, next)] += prob;
                }
            }
        }
    }
    MarkovChain {
        p,
        labels: Some(labels),
        start: m.start(),
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CommClass {
    /// Sorted members.
    pub states: Vec<usize>,
    /// No positive transition leaves the class.
    pub essential: bool,
}

/// Strongly connected components of the positive-transition graph, ordered
/// by smallest member.
pub fn communicating_classes(chain: &MarkovChain) -> Vec<CommClass> {
    let n = chain.n_states();
    let mut g = DiGraph::<usize, ()>::new();
    let nodes: Vec<_> = (0..n).map(|i| g.add_node(i)).collect();
    for i in 0..n {
        for j in 0..n {
            if chain.p[(i, j)] > 0.0 {
                g.add_edge(nodes[i], nodes[j], ());
            }
        }
    }
    let mut comp = vec![0usize; n];
    let mut classes: Vec<Vec<usize>> = tarjan_scc(&g)
        .into_iter()
        .map(|c| {
            let mut v: Vec<usize> = c.into_iter().map(|x| g[x]).collect();
            v.sort_unstable();
            v
        })
        .collect();
    classes.sort();
    for (k, c) in classes.iter().enumerate() {
        for &s in c {
            comp[s] = k;
        }
    }
    classes
        .into_iter()
        .enumerate()
        .map(|(k, states)| {
            let essential = states
                .iter()
                .all(|&i| (0..n).all(|j| chain.p[(i, j)] == 0.0 || comp[j] == k));
            CommClass { states, essential }
        })
        .collect()
}

fn gcd(a: usize, b: usize) -> usize {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

/// The gcd of return times, from breadth-first levels within the class:
/// every internal edge `u -> v` contributes `level(u) + 1 - level(v)`.
pub fn period(chain: &MarkovChain, class: &CommClass) -> Result<usize> {
    let n = chain.n_states();
    let &root = class
        .states
        .first()
        .ok_or_else(|| Error::Parameter("empty class".into()))?;
    let mut inside = vec![false; n];
    for &s in &class.states {
        if s >= n {
            return Err(Error::Index(format!("state {s} out of range")));
        }
        inside[s] = true;
    }
    let mut level = vec![usize::MAX; n];
    level[root] = 0;
    let mut queue = std::collections::VecDeque::from([root]);
    let mut g = 0usize;
    while let Some(u) = queue.pop_front() {
        for v in (0..n).filter(|&v| inside[v] && chain.p[(u, v)] > 0.0) {
            if level[v] == usize::MAX {
                level[v] = level[u] + 1;
                queue.push_back(v);
            } else {
                g = gcd(g, (level[u] + 1).abs_diff(level[v]));
            }
        }
    }
    if class.states.iter().any(|&s| level[s] == usize::MAX) {
        return Err(Error::Parameter(
            "states do not form a communicating class".into(),
        ));
    }
    if g == 0 {
        return Err(Error::UndefinedPeriod(root));
    }
    Ok(g)
}

fn unique_essential(chain: &MarkovChain) -> Result<CommClass> {
    let mut essential: Vec<CommClass> = communicating_classes(chain)
        .into_iter()
        .filter(|c| c.essential)
        .collect();
    if essential.len() != 1 {
        return Err(Error::NonUniqueStationary(essential.len()));
    }
    Ok(essential.remove(0))
}

/// Solves `theta P = theta` on the essential class with the normalization
/// row replacing one balance equation.
pub fn stationary_distribution(chain: &MarkovChain) -> Result<Vec<f64>> {
    let class = unique_essential(chain)?;
    let k = class.states.len();
    let mut a = DMatrix::zeros(k, k);
    for (r, &j) in class.states.iter().enumerate() {
        for (c, &i) in class.states.iter().enumerate() {
            a[(r, c)] = chain.p[(i, j)] - if i == j { 1.0 } else { 0.0 };
        }
    }
    let mut b = DVector::zeros(k);
    for c in 0..k {
        a[(k - 1, c)] = 1.0;
    }
    b[k - 1] = 1.0;
    let x = a
        .lu()
        .solve(&b)
        .ok_or_else(|| Error::Parameter("singular stationary system".into()))?;
    let mut theta = vec![0.0; chain.n_states()];
    for (c, &i) in class.states.iter().enumerate() {
        theta[i] = x[c].max(0.0);
    }
    let total: f64 = theta.iter().sum();
    theta.iter_mut().for_each(|t| *t /= total);
    Ok(theta)
}

/// Power iteration on `(P + I) / 2`, which averages consecutive steps so
/// that periodic chains still converge.
pub fn stationary_power(chain: &MarkovChain, max_iters: usize, tol: f64) -> Result<Vec<f64>> {
    unique_essential(chain)?;
    let n = chain.n_states();
    let mut x = DVector::from_element(n, 1.0 / n as f64).transpose();
    for _ in 0..max_iters {
        let next = (&x + &x * &chain.p) * 0.5;
        let diff = (&next - &x).abs().max();
        x = next;
        if diff < tol {
            break;
        }
    }
    Ok(x.iter().copied().collect())
}

/// `max_s |(theta P)(s) - theta(s)|`.
pub fn stationary_residual(chain: &MarkovChain, theta: &[f64]) -> f64 {
    let t = DVector::from_column_slice(theta).transpose();
    (&t * &chain.p - &t).abs().max()
}

/// Fraction of length-`|h'|` windows of `h` equal to `h'`.
pub fn subsequence_frequency(sub: &InteractionHistory, h: &InteractionHistory) -> f64 {
    let (n, k) = (h.len(), sub.len());
    if n < k {
        return 0.0;
    }
    let windows = n - k + 1;
    let hits = h
        .pairs()
        .windows(k.max(1))
        .take(windows)
        .filter(|w| k == 0 || *w == sub.pairs())
        .count();
    let hits = if k == 0 { windows } else { hits };
    hits as f64 / windows as f64
}

/// `sum_s theta(s) P(h' | s)`, with `P(h' | s)` the probability that the
/// chain's next `|h'|` labeled transitions from `s` spell out `h'`.
pub fn expected_frequency(m: &TransitionTable, sub: &InteractionHistory) -> Result<f64> {
    let chain = mdp_to_chain(m);
    let theta = stationary_distribution(&chain)?;
    let na = m.n_actions() as f64;
    let mut total = 0.0;
    for (s, &w) in theta.iter().enumerate() {
        if w == 0.0 {
            continue;
        }
        let mut dist = vec![0.0; m.n_states()];
        dist[s] = 1.0;
        for &(a, o) in sub.pairs() {
            let mut next = vec![0.0; m.n_states()];
            for (x, &d) in dist.iter().enumerate() {
                if d == 0.0 {
                    continue;
                }
                for (y, slot) in next.iter_mut().enumerate() {
                    *slot += d * m.prob(x, a, y, o) / na;
                }
            }
            dist = next;
        }
        total += w * dist.iter().sum::<f64>();
    }
    Ok(total)
}

/// A history of `len` steps with uniformly random actions.
pub fn uniform_history<R: Rng + ?Sized>(
    q: &EnvModel,
    len: usize,
    rng: &mut R,
) -> InteractionHistory {
    let mut h = q.empty_history();
    let mut state = q.start();
    for _ in 0..len {
        let a = rng.gen_range(0..q.n_actions());
        let (next, o) = q.simulate_step(state, a, rng);
        state = next;
        h.push(a, o).expect("sampled symbols are in range");
    }
    h
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Moments {
    pub mean: f64,
    pub sd: f64,
    pub mean_se: f64,
    /// Large-sample standard error of `sd`.
    pub sd_se: f64,
}

impl Moments {
    fn from_samples(xs: &[f64]) -> Self {
        let est = McEstimate::from_samples(xs);
        let sd = est.std_err * (xs.len() as f64).sqrt();
        let sd_se = sd / (2.0 * (xs.len().max(2) - 1) as f64).sqrt();
        Moments {
            mean: est.mean,
            sd,
            mean_se: est.std_err,
            sd_se,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct DiscriminationReport {
    pub n: usize,
    pub samples: usize,
    pub truth: Moments,
    pub alt: Moments,
    /// The same statistics at length `n / 2`.
    pub truth_half: Moments,
    pub alt_half: Moments,
    /// Means separated by more than three standard errors and both
    /// deviations smaller at `n` than at `n / 2`.
    pub premise_holds: bool,
}

pub type HistoryFn = dyn Fn(&InteractionHistory) -> f64 + Sync;

fn moments_of(
    q: &EnvModel,
    f: &HistoryFn,
    n: usize,
    samples: usize,
    seed: u64,
    offset: u64,
) -> Moments {
    let xs: Vec<f64> = (0..samples)
        .into_par_iter()
        .map(|k| f(&uniform_history(q, n, &mut stream(seed, offset + k as u64))))
        .collect();
    Moments::from_samples(&xs)
}

/// Monte Carlo means and deviations of `f` under `q` and `q'`. Sample `k`
/// of each run uses its own stream, so results do not depend on threading.
pub fn discrimination_stats(
    q: &EnvModel,
    alt: &EnvModel,
    f: &HistoryFn,
    n: usize,
    samples: usize,
    seed: u64,
) -> Result<DiscriminationReport> {
    if n == 0 || samples < 2 {
        return Err(Error::Parameter(
            "need n >= 1 and at least two samples".into(),
        ));
    }
    let s = samples as u64;
    let truth = moments_of(q, f, n, samples, seed, 0);
    let alt_m = moments_of(alt, f, n, samples, seed, s);
    let half = (n / 2).max(1);
    let truth_half = moments_of(q, f, half, samples, seed, 2 * s);
    let alt_half = moments_of(alt, f, half, samples, seed, 3 * s);
    let separated = (truth.mean - alt_m.mean).abs() > 3.0 * truth.mean_se.hypot(alt_m.mean_se);
    let shrinking = truth.sd < truth_half.sd && alt_m.sd < alt_half.sd;
    Ok(DiscriminationReport {
        n,
        samples,
        truth,
        alt: alt_m,
        truth_half,
        alt_half,
        premise_holds: separated && shrinking,
    })
}

/// The period-2 chain that alternates between two states.
pub fn table_4_3() -> MarkovChain {
    MarkovChain::new(vec![vec![0.0, 1.0], vec![1.0, 0.0]], 0).expect("valid chain")
}

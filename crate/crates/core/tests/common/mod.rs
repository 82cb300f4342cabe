#![allow(dead_code)]

use finlab::envmodel::{EnvModel, TransitionTable};
use finlab::InteractionHistory;
use rand::Rng;

/// A random table whose rows contain some exact zeros.
pub fn random_table<R: Rng>(rng: &mut R, ns: usize, na: usize, no: usize) -> EnvModel {
    let width = ns * no;
    let mut probs = Vec::with_capacity(ns * na * width);
    for _ in 0..ns * na {
        let mut row: Vec<f64> = (0..width)
            .map(|_| {
                if rng.gen_bool(0.25) {
                    0.0
                } else {
                    rng.gen::<f64>() + 0.01
                }
            })
            .collect();
        if row.iter().all(|&x| x == 0.0) {
            row[rng.gen_range(0..width)] = 1.0;
        }
        let s: f64 = row.iter().sum();
        probs.extend(row.iter().map(|x| x / s));
    }
    TransitionTable::new(ns, na, no, 0, probs).unwrap().into()
}

/// Every history of length `len` over the given alphabets.
pub fn all_histories(na: usize, no: usize, len: usize) -> Vec<InteractionHistory> {
    let mut out = vec![InteractionHistory::new(na, no)];
    for _ in 0..len {
        let mut next = Vec::with_capacity(out.len() * na * no);
        for h in &out {
            for a in 0..na {
                for o in 0..no {
                    next.push(h.extend(a, o).unwrap());
                }
            }
        }
        out = next;
    }
    out
}

pub fn history(na: usize, no: usize, pairs: &[(usize, usize)]) -> InteractionHistory {
    InteractionHistory::from_pairs(na, no, pairs).unwrap()
}

/// `P(h|q)` by explicit enumeration of state trajectories.
pub fn trajectory_sum(q: &EnvModel, h: &InteractionHistory) -> f64 {
    let t = q.table();
    fn rec(t: &TransitionTable, pairs: &[(usize, usize)], s: usize) -> f64 {
        match pairs.split_first() {
            None => 1.0,
            Some((&(a, o), rest)) => (0..t.n_states())
                .map(|s2| t.prob(s, a, s2, o) * rec(t, rest, s2))
                .sum(),
        }
    }
    rec(t, h.pairs(), t.start())
}

/// A history drawn from `q` under uniform random actions.
pub fn sample_history<R: Rng>(q: &EnvModel, len: usize, rng: &mut R) -> InteractionHistory {
    let mut h = q.empty_history();
    let mut s = q.start();
    for _ in 0..len {
        let a = rng.gen_range(0..q.n_actions());
        let (next, o) = q.simulate_step(s, a, rng);
        s = next;
        h.push(a, o).unwrap();
    }
    h
}

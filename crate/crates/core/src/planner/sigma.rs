//! The stochastic-action distribution.
//!
//! For each state history `z`, every action `a` has a value distribution
//! `rho(r | a, z)` over a grid. Re-weighting by value gives
//! `p(r, a, z) = rho(r | a, z) r / v(a, z)`. An assignment `f` of one value
//! to each action has probability `prod_a p(f(a), a, z)`, and `sigma(a, z)`
//! is the probability that `a` attains the maximum of `f`, with ties
//! sharing credit equally. The result mixes `sigma(., z)` over `z` by the
//! branch weights, renormalized.
//!
//! Rather than summing over all `|R|^|A|` assignments, the credit of `a`
//! at level `r` is computed from the other actions' probabilities of lying
//! strictly below `r` or exactly at `r`: with `c_k` the probability that
//! exactly `k` others tie at `r` and the rest lie below, the credit is
//! `sum_k c_k / (k + 1)`.

use crate::error::{Error, Result};

const ROW_TOLERANCE: f64 = 1e-9;

#[derive(Clone, Debug, PartialEq)]
pub struct SigmaBranch {
    /// Unnormalized weight of this state history.
    pub weight: f64,
    /// `rows[a][r]`: probability of grid level `r` for action `a`.
    pub rows: Vec<Vec<f64>>,
}

/// Value-weighted level probabilities `p(r, a, z)` for one branch.
pub fn weighted_level_probs(grid: &[f64], rows: &[Vec<f64>]) -> Result<Vec<Vec<f64>>> {
    rows.iter()
        .enumerate()
        .map(|(a, row)| {
            if row.len() != grid.len() {
                return Err(Error::Parameter(format!(
                    "row for action {a} has {} entries",
                    row.len()
                )));
            }
            let sum: f64 = row.iter().sum();
            if row.iter().any(|&p| p < 0.0) || (sum - 1.0).abs() > ROW_TOLERANCE {
                return Err(Error::Normalization { sum });
            }
            let v: f64 = row.iter().zip(grid).map(|(p, r)| p * r).sum();
            if v <= 0.0 {
                return Err(Error::DegenerateValue { action: a });
            }
            Ok(row.iter().zip(grid).map(|(p, r)| p * r / v).collect())
        })
        .collect()
}

fn branch_sigma(p: &[Vec<f64>]) -> Vec<f64> {
    let n_actions = p.len();
    let n_levels = p[0].len();
    // below[b][r] = sum of p[b][r'] for r' < r
    let below: Vec<Vec<f64>> = p
        .iter()
        .map(|row| {
            let mut acc = 0.0;
            row.iter()
                .map(|&x| {
                    let v = acc;
                    acc += x;
                    v
                })
                .collect()
        })
        .collect();
    let mut sigma = vec![0.0; n_actions];
    let mut poly = Vec::with_capacity(n_actions);
    for a in 0..n_actions {
        for r in 0..n_levels {
            if p[a][r] == 0.0 {
                continue;
            }
            poly.clear();
            poly.push(1.0);
            for b in (0..n_actions).filter(|&b| b != a) {
                let (lo, eq) = (below[b][r], p[b][r]);
                poly.push(0.0);
                for k in (0..poly.len()).rev() {
                    let shifted = if k > 0 { poly[k - 1] * eq } else { 0.0 };
                    poly[k] = poly[k] * lo + shifted;
                }
            }
            let credit: f64 = poly
                .iter()
                .enumerate()
                .map(|(k, c)| c / (k + 1) as f64)
                .sum();
            sigma[a] += p[a][r] * credit;
        }
    }
    sigma
}

pub fn stochastic_action_sigma(grid: &[f64], branches: &[SigmaBranch]) -> Result<Vec<f64>> {
    if grid.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::Parameter("grid must be strictly increasing".into()));
    }
    let first = branches
        .first()
        .ok_or_else(|| Error::Parameter("no state histories".into()))?;
    let n_actions = first.rows.len();
    if n_actions == 0 || branches.iter().any(|b| b.rows.len() != n_actions) {
        return Err(Error::Parameter(
            "every branch needs one row per action".into(),
        ));
    }
    let total: f64 = branches.iter().map(|b| b.weight).sum();
    if branches.iter().any(|b| b.weight < 0.0) || total <= 0.0 {
        return Err(Error::Parameter(
            "branch weights must be nonnegative with positive sum".into(),
        ));
    }
    let mut sigma = vec![0.0; n_actions];
    for b in branches {
        let p = weighted_level_probs(grid, &b.rows)?;
        for (s, x) in sigma.iter_mut().zip(branch_sigma(&p)) {
            *s += b.weight / total * x;
        }
    }
    Ok(sigma)
}

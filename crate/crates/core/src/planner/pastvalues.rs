//! Past values and observed values over flagged histories.

use crate::error::{Error, Result};
use crate::history::FlaggedHistory;
use crate::learner::ThreeArgUtility;

/// Admissible value levels, sorted within `[0, 1]`.
#[derive(Clone, Debug, PartialEq)]
pub struct ValueGrid {
    levels: Vec<f64>,
}

impl Default for ValueGrid {
    /// Multiples of 1/1024.
    fn default() -> Self {
        ValueGrid {
            levels: (0..=1024).map(|k| k as f64 / 1024.0).collect(),
        }
    }
}

impl ValueGrid {
    pub fn new(mut levels: Vec<f64>) -> Result<Self> {
        if levels.is_empty() || levels.iter().any(|x| !(0.0..=1.0).contains(x)) {
            return Err(Error::Parameter(
                "grid levels must be nonempty and within [0,1]".into(),
            ));
        }
        levels.sort_by(|a, b| a.partial_cmp(b).unwrap());
        levels.dedup();
        Ok(ValueGrid { levels })
    }

    pub fn levels(&self) -> &[f64] {
        &self.levels
    }

    /// Nearest level after clamping to `[0, 1]`; halfway points go down.
    pub fn discrete(&self, x: f64) -> f64 {
        let x = x.clamp(0.0, 1.0);
        let i = self.levels.partition_point(|&l| l < x);
        if i == 0 {
            return self.levels[0];
        }
        if i == self.levels.len() {
            return self.levels[i - 1];
        }
        let (lo, hi) = (self.levels[i - 1], self.levels[i]);
        if hi - x < x - lo {
            hi
        } else {
            lo
        }
    }
}

/// Index constraints for past values: `m < i <= t`, `m <= l < i`, `l <= k <= t`.
fn check_indices(t: usize, m: usize, i: usize, l: usize, k: usize) -> Result<()> {
    if !(m < i && i <= t) {
        return Err(Error::Index(format!(
            "need m < i <= t, got m={m} i={i} t={t}"
        )));
    }
    if !(m <= l && l < i) {
        return Err(Error::Index(format!(
            "need m <= l < i, got m={m} l={l} i={i}"
        )));
    }
    if !(l <= k && k <= t) {
        return Err(Error::Index(format!(
            "need l <= k <= t, got l={l} k={k} t={t}"
        )));
    }
    Ok(())
}

/// `pv_t(i, l, k)`: the discounted average over `j = i..=t` of
/// `u3(y(h_l), y(h_k), y(h_j))`, discretized onto `grid`.
///
/// The weights `gamma^(j-i)` are normalized to sum to one, so a constant
/// utility maps to itself; `gamma = 1` gives the plain mean.
#[allow(clippy::too_many_arguments)]
pub fn past_values(
    h: &FlaggedHistory,
    u3: &ThreeArgUtility,
    gamma: f64,
    m: usize,
    i: usize,
    l: usize,
    k: usize,
    grid: &ValueGrid,
) -> Result<f64> {
    let t = h.len();
    check_indices(t, m, i, l, k)?;
    if !(0.0..=1.0).contains(&gamma) {
        return Err(Error::Parameter(format!("gamma {gamma} outside [0,1]")));
    }
    let (hl, hk) = (h.prefix(l).y(), h.prefix(k).y());
    let mut sum = 0.0;
    let mut norm = 0.0;
    let mut w = 1.0;
    for j in i..=t {
        sum += w * u3(&hl, &hk, &h.prefix(j).y());
        norm += w;
        w *= gamma;
    }
    Ok(grid.discrete(sum / norm))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Condition {
    /// Every difference is nonpositive.
    AllNonPositive,
    /// The differences sum to a nonpositive value.
    SumNonPositive,
    /// The ramp-weighted sum `sum (n - i + 1) delta` is nonpositive.
    SlopeNonPositive,
}

impl Condition {
    pub fn from_number(n: u8) -> Result<Self> {
        match n {
            1 => Ok(Condition::AllNonPositive),
            2 => Ok(Condition::SumNonPositive),
            3 => Ok(Condition::SlopeNonPositive),
            _ => Err(Error::Parameter(format!(
                "condition must be 1, 2 or 3, got {n}"
            ))),
        }
    }

    /// `deltas[n - i]` holds `delta_t(i-1, n)` for `n = i..=t`.
    pub fn holds(&self, deltas: &[f64]) -> bool {
        match self {
            Condition::AllNonPositive => deltas.iter().all(|&d| d <= 0.0),
            Condition::SumNonPositive => deltas.iter().sum::<f64>() <= 0.0,
            Condition::SlopeNonPositive => {
                deltas
                    .iter()
                    .enumerate()
                    .map(|(r, &d)| (r + 1) as f64 * d)
                    .sum::<f64>()
                    <= 0.0
            }
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ConditionMode {
    /// The condition is tested separately for each `i`.
    PerStep,
    /// The condition must hold for every `i` in `(m, t]` at once.
    AllSteps,
}

/// `delta_t(i-1, n)` for `n = i..=t`.
pub fn value_deltas(
    h: &FlaggedHistory,
    u3: &ThreeArgUtility,
    gamma: f64,
    m: usize,
    i: usize,
    grid: &ValueGrid,
) -> Result<Vec<f64>> {
    let base = past_values(h, u3, gamma, m, i, i - 1, i - 1, grid)?;
    (i..=h.len())
        .map(|n| Ok(past_values(h, u3, gamma, m, i, i - 1, n, grid)? - base))
        .collect()
}

/// `ov_t(i)` for `i = 1..=t` (index `i - 1` of the result).
pub fn observed_values(
    h: &FlaggedHistory,
    u3: &ThreeArgUtility,
    gamma: f64,
    m: usize,
    condition: Condition,
    mode: ConditionMode,
    grid: &ValueGrid,
) -> Result<Vec<f64>> {
    let t = h.len();
    let mut out = vec![0.0; t];
    let mut passes = Vec::new();
    for i in (m + 1)..=t {
        let deltas = value_deltas(h, u3, gamma, m, i, grid)?;
        passes.push((i, condition.holds(&deltas)));
    }
    let all_pass = passes.iter().all(|p| p.1);
    for (i, pass) in passes {
        let ok = match mode {
            ConditionMode::PerStep => pass,
            ConditionMode::AllSteps => all_pass,
        };
        if ok {
            out[i - 1] = past_values(h, u3, gamma, m, i, i - 1, i - 1, grid)?;
        }
    }
    Ok(out)
}

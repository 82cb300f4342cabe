use crate::error::{Error, Result};

const SUM_TOLERANCE: f64 = 1e-9;

/// A finite lottery: outcomes with probabilities and values.
#[derive(Clone, Debug, PartialEq)]
pub struct Lottery {
    outcomes: Vec<(f64, f64)>,
}

impl Lottery {
    pub fn new(outcomes: Vec<(f64, f64)>) -> Result<Self> {
        if outcomes.iter().any(|&(p, _)| !(0.0..=1.0).contains(&p)) {
            return Err(Error::Parameter("lottery probability outside [0,1]".into()));
        }
        let sum: f64 = outcomes.iter().map(|o| o.0).sum();
        if (sum - 1.0).abs() > SUM_TOLERANCE {
            return Err(Error::Normalization { sum });
        }
        Ok(Lottery { outcomes })
    }

    pub fn outcomes(&self) -> &[(f64, f64)] {
        &self.outcomes
    }

    pub fn expected_value(&self) -> f64 {
        self.outcomes.iter().map(|&(p, v)| p * v).sum()
    }

    /// The compound lottery that plays `self` with probability `w`, else `other`.
    pub fn mix(&self, other: &Lottery, w: f64) -> Result<Lottery> {
        let mut outcomes: Vec<(f64, f64)> =
            self.outcomes.iter().map(|&(p, v)| (w * p, v)).collect();
        outcomes.extend(other.outcomes.iter().map(|&(p, v)| ((1.0 - w) * p, v)));
        Lottery::new(outcomes)
    }
}

pub fn lottery_expected_value(outcomes: &[(f64, f64)]) -> Result<f64> {
    Ok(Lottery::new(outcomes.to_vec())?.expected_value())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn degenerate() {
        assert_eq!(lottery_expected_value(&[(1.0, 0.37)]).unwrap(), 0.37);
    }

    #[test]
    fn unnormalized_rejected() {
        assert!(matches!(
            lottery_expected_value(&[(0.5, 1.0), (0.4, 0.0)]),
            Err(Error::Normalization { .. })
        ));
    }
}

//! Collective utility from per-person values in [0, 1].

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const WEIGHT_TOL: f64 = 1e-9;

/// Grid resolution for shaper tables and shape checks.
pub const GRID: usize = 1024;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Member {
    pub id: String,
    pub value: f64,
    pub alive: bool,
    pub weight: Option<f64>,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct ValueProfile {
    members: Vec<Member>,
}

impl ValueProfile {
    pub fn new() -> Self {
        Self::default()
    }

    /// Living members with the given values.
    pub fn from_values(values: &[f64]) -> Self {
        let mut p = Self::new();
        for (i, &v) in values.iter().enumerate() {
            p.push(&format!("p{i}"), v, true, None);
        }
        p
    }

    /// Values outside [0, 1] are clamped.
    pub fn push(&mut self, id: &str, value: f64, alive: bool, weight: Option<f64>) {
        self.members.push(Member {
            id: id.to_string(),
            value: value.clamp(0.0, 1.0),
            alive,
            weight,
        });
    }

    pub fn members(&self) -> &[Member] {
        &self.members
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn values(&self) -> Vec<f64> {
        self.members.iter().map(|m| m.value).collect()
    }

    pub fn set_value(&mut self, i: usize, v: f64) {
        self.members[i].value = v.clamp(0.0, 1.0);
    }

    pub fn set_alive(&mut self, i: usize, alive: bool) {
        self.members[i].alive = alive;
    }

    fn nonempty(&self) -> Result<()> {
        if self.is_empty() {
            Err(Error::EmptyProfile)
        } else {
            Ok(())
        }
    }
}

/// Dead members keep their place with value 0.
pub fn apply_death_rule(profile: &ValueProfile) -> ValueProfile {
    let mut out = profile.clone();
    for m in &mut out.members {
        if !m.alive {
            m.value = 0.0;
        }
    }
    out
}

pub fn aggregate_mean(profile: &ValueProfile) -> Result<f64> {
    profile.nonempty()?;
    Ok(profile.members.iter().map(|m| m.value).sum::<f64>() / profile.len() as f64)
}

pub fn aggregate_maximin(profile: &ValueProfile) -> Result<f64> {
    profile.nonempty()?;
    Ok(profile
        .members
        .iter()
        .map(|m| m.value)
        .fold(f64::INFINITY, f64::min))
}

pub fn aggregate_concave(profile: &ValueProfile, shaper: &ConcaveShaper) -> Result<f64> {
    profile.nonempty()?;
    Ok(profile
        .members
        .iter()
        .map(|m| shaper.apply(m.value))
        .sum::<f64>()
        / profile.len() as f64)
}

/// Every member needs a weight and the weights must sum to 1.
pub fn aggregate_weighted(profile: &ValueProfile) -> Result<f64> {
    profile.nonempty()?;
    let mut total = 0.0;
    let mut acc = 0.0;
    for m in &profile.members {
        let w = m
            .weight
            .ok_or_else(|| Error::Parameter(format!("member {} has no weight", m.id)))?;
        if !(w >= 0.0) {
            return Err(Error::Parameter(format!(
                "member {} has negative weight",
                m.id
            )));
        }
        total += w;
        acc += w * m.value;
    }
    if (total - 1.0).abs() > WEIGHT_TOL {
        return Err(Error::UnnormalizedWeights(total));
    }
    Ok(acc)
}

#[derive(Clone, Debug, PartialEq)]
pub enum ConcaveShaper {
    Sqrt,
    /// `1 - (1 - x)^2`
    InvertedSquare,
    /// Values at `i / GRID` for `i = 0..=GRID`, linearly interpolated.
    Table(Vec<f64>),
}

impl ConcaveShaper {
    pub fn by_name(name: &str) -> Result<Self> {
        match name {
            "sqrt" => Ok(ConcaveShaper::Sqrt),
            "inverted-square" | "1-(1-x)^2" => Ok(ConcaveShaper::InvertedSquare),
            _ => Err(Error::Parameter(format!(
                "unknown shaper {name}; expected sqrt or inverted-square"
            ))),
        }
    }

    /// A table of `GRID + 1` values, checked for the shape constraints.
    pub fn from_table(values: Vec<f64>) -> Result<Self> {
        if values.len() != GRID + 1 {
            return Err(Error::Parameter(format!(
                "shaper table needs {} values, got {}",
                GRID + 1,
                values.len()
            )));
        }
        let s = ConcaveShaper::Table(values);
        s.check()?;
        Ok(s)
    }

    /// Whitespace-separated numbers; `#` starts a comment.
    pub fn parse_table(text: &str) -> Result<Self> {
        let mut vals = Vec::new();
        for (i, line) in text.lines().enumerate() {
            for w in line.split('#').next().unwrap_or("").split_whitespace() {
                vals.push(w.parse::<f64>().map_err(|_| Error::Format {
                    line: i + 1,
                    msg: format!("bad number {w}"),
                })?);
            }
        }
        Self::from_table(vals)
    }

    pub fn apply(&self, x: f64) -> f64 {
        let x = x.clamp(0.0, 1.0);
        match self {
            ConcaveShaper::Sqrt => x.sqrt(),
            ConcaveShaper::InvertedSquare => 1.0 - (1.0 - x) * (1.0 - x),
            ConcaveShaper::Table(t) => {
                let pos = x * GRID as f64;
                let i = (pos.floor() as usize).min(GRID - 1);
                let frac = pos - i as f64;
                t[i] + frac * (t[i + 1] - t[i])
            }
        }
    }

    /// Endpoints 0 and 1, strictly increasing and midpoint-concave on the
    /// grid.
    pub fn check(&self) -> Result<()> {
        let f: Vec<f64> = (0..=GRID)
            .map(|i| self.apply(i as f64 / GRID as f64))
            .collect();
        if f[0].abs() > 1e-12 || (f[GRID] - 1.0).abs() > 1e-12 {
            return Err(Error::Parameter("shaper must map 0 to 0 and 1 to 1".into()));
        }
        if f.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::Parameter(
                "shaper must be strictly increasing".into(),
            ));
        }
        for i in 0..=GRID {
            for j in (i + 2..=GRID).step_by(2) {
                if f[(i + j) / 2] < (f[i] + f[j]) / 2.0 - 1e-12 {
                    return Err(Error::Parameter(format!(
                        "shaper is not concave between grid points {i} and {j}"
                    )));
                }
            }
        }
        Ok(())
    }
}

/// Reads `person_id value [alive] [weight]` rows. `alive` is `true`/`false`
/// (or `1`/`0`) and defaults to alive; a weight requires the alive column.
pub fn parse_profile(text: &str) -> Result<ValueProfile> {
    let mut p = ValueProfile::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let fail = |msg: String| Error::Format { line: i + 1, msg };
        let w: Vec<&str> = line.split_whitespace().collect();
        if w.len() < 2 || w.len() > 4 {
            return Err(fail("expected: person_id value [alive] [weight]".into()));
        }
        let value: f64 = w[1]
            .parse()
            .map_err(|_| fail(format!("bad value {}", w[1])))?;
        if !value.is_finite() {
            return Err(fail("value must be finite".into()));
        }
        let alive = match w.get(2) {
            None | Some(&"true") | Some(&"1") | Some(&"alive") => true,
            Some(&"false") | Some(&"0") | Some(&"dead") => false,
            Some(s) => return Err(fail(format!("bad alive flag {s}"))),
        };
        let weight = match w.get(3) {
            None => None,
            Some(s) => Some(
                s.parse::<f64>()
                    .map_err(|_| fail(format!("bad weight {s}")))?,
            ),
        };
        p.push(w[0], value, alive, weight);
    }
    Ok(p)
}

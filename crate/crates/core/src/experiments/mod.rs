//! Reproducible experiment runs behind the command-line subcommands.
//!
//! Every run takes a serde config (all fields defaulted) and returns a
//! [`Report`]: named metric rows, some with an expected value and
//! tolerance, plus tables written as CSV. Reports are deterministic given
//! the config; wall-clock time is never stored in them.

mod analysis;
mod decision;
mod games;

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

pub use analysis::{
    discriminate, enumerate_srv_run, learn, markov, prob41, DiscriminateConfig, EnumerateSrvConfig,
    LearnConfig, LearnMode, MarkovConfig, Prob41Config, EXAMPLE_S, EXAMPLE_V, MAP_STEPS,
    RECOVERY_STEPS, TABLE_4_2,
};
pub use decision::{
    delusion63, delusion64, enumerate_selfmod_cases, hitman, random_sigma_instance, rollout_run,
    selfmod, sigma, sigma_brute_force, Delusion63Config, Delusion64Config, HitmanConfig,
    RolloutConfig, SelfModCase, SelfModConfig, SigmaBranchConfig, SigmaConfig,
};
pub use games::{arena, logic, values, ArenaRunConfig, LogicConfig, ValuesConfig, GF3_STATEMENTS};

use crate::envmodel::{self, EnvModel};
use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Cell {
    Int(i64),
    Num(f64),
    Text(String),
}

impl Cell {
    pub fn render(&self) -> String {
        match self {
            Cell::Int(i) => i.to_string(),
            Cell::Num(x) => fmt_num(*x),
            Cell::Text(s) => s.clone(),
        }
    }
}

impl From<f64> for Cell {
    fn from(x: f64) -> Self {
        Cell::Num(x)
    }
}
impl From<usize> for Cell {
    fn from(x: usize) -> Self {
        Cell::Int(x as i64)
    }
}
impl From<u64> for Cell {
    fn from(x: u64) -> Self {
        Cell::Int(x as i64)
    }
}
impl From<i64> for Cell {
    fn from(x: i64) -> Self {
        Cell::Int(x)
    }
}
impl From<bool> for Cell {
    fn from(x: bool) -> Self {
        Cell::Text(x.to_string())
    }
}
impl From<&str> for Cell {
    fn from(x: &str) -> Self {
        Cell::Text(x.to_string())
    }
}
impl From<String> for Cell {
    fn from(x: String) -> Self {
        Cell::Text(x)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Metric {
    pub name: String,
    pub value: Cell,
    pub expected: Option<Cell>,
    pub tolerance: Option<f64>,
    pub pass: Option<bool>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Table {
    pub name: String,
    pub columns: Vec<String>,
    pub rows: Vec<Vec<Cell>>,
}

impl Table {
    pub fn new(name: &str, columns: &[&str]) -> Self {
        Table {
            name: name.to_string(),
            columns: columns.iter().map(|c| c.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }

    pub fn to_csv(&self) -> Result<String> {
        let mut w = csv::Writer::from_writer(Vec::new());
        let io = |e: csv::Error| Error::Io(e.to_string());
        w.write_record(&self.columns).map_err(io)?;
        for r in &self.rows {
            w.write_record(r.iter().map(Cell::render)).map_err(io)?;
        }
        let bytes = w.into_inner().map_err(|e| Error::Io(e.to_string()))?;
        String::from_utf8(bytes).map_err(|e| Error::Io(e.to_string()))
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub experiment: String,
    pub config: serde_json::Value,
    pub metrics: Vec<Metric>,
    pub tables: Vec<Table>,
}

impl Report {
    pub fn new<C: Serialize>(experiment: &str, config: &C) -> Self {
        Report {
            experiment: experiment.to_string(),
            config: serde_json::to_value(config).unwrap_or(serde_json::Value::Null),
            metrics: Vec::new(),
            tables: Vec::new(),
        }
    }

    /// An informational row.
    pub fn metric(&mut self, name: &str, value: impl Into<Cell>) {
        self.metrics.push(Metric {
            name: name.to_string(),
            value: value.into(),
            expected: None,
            tolerance: None,
            pass: None,
        });
    }

    /// A row that passes when `|value - expected| <= tol`.
    pub fn check(&mut self, name: &str, value: f64, expected: f64, tol: f64) -> bool {
        let pass = (value - expected).abs() <= tol;
        self.metrics.push(Metric {
            name: name.to_string(),
            value: Cell::Num(value),
            expected: Some(Cell::Num(expected)),
            tolerance: Some(tol),
            pass: Some(pass),
        });
        pass
    }

    /// A row that passes when `lo <= value <= hi`; reported with the
    /// interval midpoint as expected value and half-width as tolerance.
    pub fn check_range(&mut self, name: &str, value: f64, lo: f64, hi: f64) -> bool {
        let pass = (lo..=hi).contains(&value);
        self.metrics.push(Metric {
            name: name.to_string(),
            value: Cell::Num(value),
            expected: Some(Cell::Num((lo + hi) / 2.0)),
            tolerance: Some((hi - lo) / 2.0),
            pass: Some(pass),
        });
        pass
    }

    /// A row that passes when `value > lo`.
    pub fn check_above(&mut self, name: &str, value: f64, lo: f64) -> bool {
        let pass = value > lo;
        self.metrics.push(Metric {
            name: name.to_string(),
            value: Cell::Num(value),
            expected: Some(Cell::Text(format!("> {}", fmt_num(lo)))),
            tolerance: None,
            pass: Some(pass),
        });
        pass
    }

    /// A row with an exact expected value.
    pub fn check_eq(
        &mut self,
        name: &str,
        value: impl Into<Cell>,
        expected: impl Into<Cell>,
    ) -> bool {
        let (value, expected) = (value.into(), expected.into());
        let pass = value == expected;
        self.metrics.push(Metric {
            name: name.to_string(),
            value,
            expected: Some(expected),
            tolerance: None,
            pass: Some(pass),
        });
        pass
    }

    pub fn all_pass(&self) -> bool {
        self.metrics.iter().all(|m| m.pass != Some(false))
    }

    pub fn value(&self, name: &str) -> Option<&Cell> {
        self.metrics
            .iter()
            .find(|m| m.name == name)
            .map(|m| &m.value)
    }

    pub fn num(&self, name: &str) -> Option<f64> {
        match self.value(name)? {
            Cell::Num(x) => Some(*x),
            Cell::Int(i) => Some(*i as f64),
            Cell::Text(_) => None,
        }
    }

    pub fn table(&self, name: &str) -> Option<&Table> {
        self.tables.iter().find(|t| t.name == name)
    }

    pub fn metrics_table(&self) -> Table {
        let mut t = Table::new(
            "metrics",
            &["name", "value", "expected", "tolerance", "pass"],
        );
        for m in &self.metrics {
            t.push(vec![
                m.name.as_str().into(),
                m.value.clone(),
                m.expected.clone().unwrap_or(Cell::Text(String::new())),
                m.tolerance.map_or(Cell::Text(String::new()), Cell::Num),
                m.pass.map_or(Cell::Text(String::new()), |p| {
                    Cell::Text(if p { "pass" } else { "fail" }.into())
                }),
            ]);
        }
        t
    }

    /// Human-readable summary, one line per metric.
    pub fn summary(&self) -> String {
        let mut out = format!("{}\n", self.experiment);
        for m in &self.metrics {
            let status = match m.pass {
                Some(true) => " [pass]",
                Some(false) => " [FAIL]",
                None => "",
            };
            let exp = match (&m.expected, m.tolerance) {
                (Some(e), Some(t)) => format!(" (expected {} +/- {})", e.render(), fmt_num(t)),
                (Some(e), None) => format!(" (expected {})", e.render()),
                _ => String::new(),
            };
            out.push_str(&format!(
                "  {} = {}{}{}\n",
                m.name,
                m.value.render(),
                exp,
                status
            ));
        }
        out
    }

    /// Writes `report.json`, `metrics.csv` and one CSV per table into `dir`.
    pub fn emit(&self, dir: &Path) -> Result<()> {
        fs::create_dir_all(dir)?;
        let json = serde_json::to_string_pretty(self).map_err(|e| Error::Io(e.to_string()))?;
        fs::write(dir.join("report.json"), json + "\n")?;
        fs::write(dir.join("metrics.csv"), self.metrics_table().to_csv()?)?;
        for t in &self.tables {
            fs::write(dir.join(format!("{}.csv", t.name)), t.to_csv()?)?;
        }
        Ok(())
    }
}

/// Twelve significant digits, trailing zeros dropped; exponent form for
/// very small or large magnitudes.
pub fn fmt_num(x: f64) -> String {
    if x == 0.0 {
        return "0".into();
    }
    if !x.is_finite() {
        return x.to_string();
    }
    let sci = format!("{x:.11e}");
    let (mant, exp) = sci.split_once('e').expect("exponent form");
    let exp: i32 = exp.parse().expect("integer exponent");
    let trim = |s: &str| {
        if s.contains('.') {
            s.trim_end_matches('0').trim_end_matches('.').to_string()
        } else {
            s.to_string()
        }
    };
    if !(-5..12).contains(&exp) {
        format!("{}e{}", trim(mant), exp)
    } else {
        trim(&format!("{:.*}", (11 - exp) as usize, x))
    }
}

/// Builtin model names, or a path to a model file:
/// `table41`, `hitman`, `bernoulli:P`, `delusion63:ALPHA`, `delusion64`.
pub fn load_model(spec: &str) -> Result<EnvModel> {
    let (name, arg) = spec
        .split_once(':')
        .map_or((spec, None), |(n, a)| (n, Some(a)));
    let num = |a: Option<&str>, default: f64| -> Result<f64> {
        a.map_or(Ok(default), |s| {
            s.parse()
                .map_err(|_| Error::Parameter(format!("bad number in model spec {spec}")))
        })
    };
    match name {
        "table41" => Ok(envmodel::table_4_1()),
        "hitman" => Ok(envmodel::hitman()),
        "bernoulli" => envmodel::bernoulli(num(arg, 0.5)?),
        "delusion63" => envmodel::delusion_env_6_3(num(arg, 0.99)?),
        "delusion64" => Ok(envmodel::delusion_env_6_4()),
        _ => {
            let text = fs::read_to_string(spec).map_err(|e| {
                Error::Parameter(format!(
                    "{spec} is neither a builtin model nor a readable file: {e}"
                ))
            })?;
            envmodel::parse_model(&text)
        }
    }
}

/// Subcommand names accepted by [`run_named`].
pub const EXPERIMENTS: [&str; 14] = [
    "hitman",
    "prob41",
    "markov",
    "discriminate",
    "delusion63",
    "delusion64",
    "enumerate-srv",
    "learn",
    "sigma",
    "selfmod",
    "arena",
    "logic",
    "values",
    "rollout",
];

/// Runs an experiment by subcommand name with a JSON config; missing
/// fields take their defaults.
pub fn run_named(name: &str, config: &serde_json::Value) -> Result<Report> {
    fn cfg<C: serde::de::DeserializeOwned>(v: &serde_json::Value) -> Result<C> {
        let v = if v.is_null() {
            serde_json::Value::Object(Default::default())
        } else {
            v.clone()
        };
        serde_json::from_value(v).map_err(|e| Error::Parameter(e.to_string()))
    }
    match name {
        "hitman" => hitman(&cfg(config)?),
        "prob41" => prob41(&cfg(config)?),
        "markov" => markov(&cfg(config)?),
        "discriminate" => discriminate(&cfg(config)?),
        "delusion63" => delusion63(&cfg(config)?),
        "delusion64" => delusion64(&cfg(config)?),
        "enumerate-srv" => enumerate_srv_run(&cfg(config)?),
        "learn" => learn(&cfg(config)?),
        "sigma" => sigma(&cfg(config)?),
        "selfmod" => selfmod(&cfg(config)?),
        "arena" => arena(&cfg(config)?),
        "logic" => logic(&cfg(config)?),
        "values" => values(&cfg(config)?),
        "rollout" => rollout_run(&cfg(config)?),
        _ => Err(Error::Parameter(format!("unknown experiment {name}"))),
    }
}

/// Mean of a slice; 0 when empty.
pub(crate) fn mean(xs: &[f64]) -> f64 {
    if xs.is_empty() {
        0.0
    } else {
        xs.iter().sum::<f64>() / xs.len() as f64
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn number_format() {
        assert_eq!(fmt_num(0.764), "0.764");
        assert_eq!(fmt_num(1.0 / 3.0), "0.333333333333");
        assert_eq!(fmt_num(2.0 / 3.0 * 1e-9), "6.66666666667e-10");
        assert_eq!(fmt_num(-1234.5), "-1234.5");
        assert_eq!(fmt_num(1e15), "1e15");
        assert_eq!(fmt_num(0.1 + 0.2), "0.3");
    }

    #[test]
    fn model_specs() {
        assert_eq!(
            load_model("bernoulli:0.8").unwrap(),
            envmodel::bernoulli(0.8).unwrap()
        );
        assert!(load_model("no-such-model").is_err());
    }
}

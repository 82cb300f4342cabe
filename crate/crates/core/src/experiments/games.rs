//! Arena runs, logic decisions and value aggregation.

use std::fs;

use serde::{Deserialize, Serialize};

use super::{Report, Table};
use crate::arena::{instability_metric, play_many, Algorithm, ArenaConfig, Verdict};
use crate::error::{Error, Result};
use crate::logic::{
    decide, eliminate_quantifiers_capped, evaluate_direct, gf3, parse_formula, parse_formula_file,
    parse_interpretation, truth_table_prove, FiniteInterpretation, Formula, DEFAULT_NODE_CAP,
};
use crate::values::{
    aggregate_concave, aggregate_maximin, aggregate_mean, aggregate_weighted, apply_death_rule,
    parse_profile, ConcaveShaper, ValueProfile,
};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ArenaRunConfig {
    /// First seed; runs use `seed .. seed + seeds`.
    pub seed: u64,
    pub seeds: u64,
    pub games: u64,
    /// 1 or 2.
    pub algorithm: u8,
    #[serde(flatten)]
    pub arena: ArenaConfig,
    pub monopoly_fraction: f64,
    /// Share of seeds that must end in a monopoly.
    pub monopoly_target: f64,
    /// Extra `random_interval` values to sweep.
    pub sweep_random_intervals: Vec<f64>,
    /// Keep every n-th sample in the trajectory table.
    pub trajectory_stride: usize,
}

impl Default for ArenaRunConfig {
    fn default() -> Self {
        ArenaRunConfig {
            seed: 0,
            seeds: 20,
            games: 1_000_000,
            algorithm: 2,
            arena: ArenaConfig::default(),
            monopoly_fraction: 0.95,
            monopoly_target: 0.8,
            sweep_random_intervals: Vec::new(),
            trajectory_stride: 10,
        }
    }
}

pub fn arena(cfg: &ArenaRunConfig) -> Result<Report> {
    let alg = Algorithm::from_number(cfg.algorithm)?;
    cfg.arena.validate()?;
    if cfg.seeds == 0 || cfg.trajectory_stride == 0 {
        return Err(Error::Parameter(
            "seeds and trajectory_stride must be positive".into(),
        ));
    }
    let seeds: Vec<u64> = (cfg.seed..cfg.seed + cfg.seeds).collect();
    let mut r = Report::new("arena", cfg);
    let runs = play_many(&cfg.arena, alg, cfg.games, &seeds)?;

    let mut per_seed = Table::new(
        "seeds",
        &[
            "seed",
            "final_predictor",
            "final_evader",
            "predictor_win_rate",
            "guard_violations",
            "verdict",
        ],
    );
    let mut traj = Table::new("trajectories", &["seed", "sample", "predictor", "evader"]);
    let mut monopolies = 0;
    for (seed, t) in seeds.iter().zip(&runs) {
        let (p, e) = t.final_sizes();
        let v = instability_metric(t, cfg.monopoly_fraction);
        monopolies += usize::from(v.is_monopoly());
        per_seed.push(vec![
            (*seed).into(),
            p.into(),
            e.into(),
            t.predictor_win_rate().into(),
            t.guard_violations.into(),
            v.name().into(),
        ]);
        for (i, s) in t.samples.iter().enumerate().step_by(cfg.trajectory_stride) {
            traj.push(vec![(*seed).into(), i.into(), s.0.into(), s.1.into()]);
        }
    }
    let wins: u64 = runs.iter().map(|t| t.predictor_wins).sum();
    let games: u64 = runs.iter().map(|t| t.games()).sum();
    let win_rate = wins as f64 / games as f64;
    let mono_rate = monopolies as f64 / runs.len() as f64;
    r.metric("capacity", cfg.arena.capacity());
    if cfg.arena.random_interval == 1.0 {
        r.check("predictor_win_rate", win_rate, 0.5, 0.01);
        r.metric("monopoly_rate", mono_rate);
    } else {
        r.metric("predictor_win_rate", win_rate);
        r.check_range("monopoly_rate", mono_rate, cfg.monopoly_target, 1.0);
    }
    let violations: u64 = runs.iter().map(|t| t.guard_violations).sum();
    r.check_eq("guard_violations", violations, 0u64);

    if !cfg.sweep_random_intervals.is_empty() {
        let mut sweep = Table::new(
            "sweep",
            &[
                "random_interval",
                "monopoly_rate",
                "predictor",
                "evader",
                "contested",
            ],
        );
        for &ri in &cfg.sweep_random_intervals {
            let c = ArenaConfig {
                random_interval: ri,
                ..cfg.arena.clone()
            };
            let ts = play_many(&c, alg, cfg.games, &seeds)?;
            let verdicts: Vec<Verdict> = ts
                .iter()
                .map(|t| instability_metric(t, cfg.monopoly_fraction))
                .collect();
            let count = |v: Verdict| verdicts.iter().filter(|&&x| x == v).count();
            let mono = verdicts.iter().filter(|v| v.is_monopoly()).count() as f64 / ts.len() as f64;
            sweep.push(vec![
                ri.into(),
                mono.into(),
                count(Verdict::MonopolizedByPredictor).into(),
                count(Verdict::MonopolizedByEvader).into(),
                count(Verdict::Contested).into(),
            ]);
        }
        r.tables.push(sweep);
    }
    r.tables.push(per_seed);
    r.tables.push(traj);
    Ok(r)
}

/// Statements about the three-element field with their truth values.
pub const GF3_STATEMENTS: [(&str, bool); 50] = [
    ("forall x. forall y. ((x + y) = (y + x))", true),
    ("forall x. forall y. ((x * y) = (y * x))", true),
    ("forall x. forall y. forall z. (((x + y) + z) = (x + (y + z)))", true),
    ("forall x. forall y. forall z. (((x * y) * z) = (x * (y * z)))", true),
    ("forall x. forall y. forall z. ((x * (y + z)) = ((x * y) + (x * z)))", true),
    ("forall x. exists y. ((x + y) = 0)", true),
    ("forall x. (~(x = 0) -> exists y. ((x * y) = 1))", true),
    ("forall x. ((x + 0) = x)", true),
    ("forall x. ((x * 1) = x)", true),
    ("(forall x. ((x = 0) | (x = 1) | (x = 2)) & ~(0 = 1) & ~(0 = 2) & ~(1 = 2))", true),
    (
        "(((0 + 0) = 0) & ((0 + 1) = 1) & ((0 + 2) = 2) & ((1 + 0) = 1) & ((1 + 1) = 2) & ((1 + 2) = 0) & ((2 + 0) = 2) & ((2 + 1) = 0) & ((2 + 2) = 1))",
        true,
    ),
    (
        "(((0 * 0) = 0) & ((0 * 1) = 0) & ((0 * 2) = 0) & ((1 * 0) = 0) & ((1 * 1) = 1) & ((1 * 2) = 2) & ((2 * 0) = 0) & ((2 * 1) = 2) & ((2 * 2) = 1))",
        true,
    ),
    ("forall x. ((x * 0) = 0)", true),
    ("exists x. ((x * x) = 2)", false),
    ("exists x. ((x * x) = 1)", true),
    ("forall x. (((x + x) + x) = 0)", true),
    ("exists x. ((x + x) = 1)", true),
    ("forall x. ((x * x) = x)", false),
    ("exists x. (~(x = 0) & ((x * x) = x))", true),
    ("forall x. exists y. ((x * y) = 1)", false),
    ("exists x. forall y. ((x * y) = 0)", true),
    ("exists x. forall y. ((x + y) = y)", true),
    ("forall x. forall y. (((x * y) = 0) -> ((x = 0) | (y = 0)))", true),
    ("((1 + 1) = 2)", true),
    ("((2 * 2) = 2)", false),
    ("((2 + 2) = 1)", true),
    ("forall x. ((x + 1) = x)", false),
    ("exists x. ((x + 1) = x)", false),
    ("forall x. forall y. (((x + y) = 0) -> ((y + x) = 0))", true),
    ("exists x. exists y. (~(x = y) & ((x * y) = 1))", false),
    ("forall x. exists y. ~(x = y)", true),
    ("exists x. forall y. (x = y)", false),
    ("forall x. forall y. ((x = y) | ~(x = y))", true),
    ("forall x. (((x * x) * x) = x)", true),
    ("exists x. (((x * x) + 1) = 0)", false),
    ("exists x. (((x * x) + 2) = 0)", true),
    ("forall x. (((x * (x + 1)) * (x + 2)) = 0)", true),
    ("forall x. forall y. (((x + y) * (x + y)) = ((x * x) + (y * y)))", false),
    ("forall x. forall y. (((x + y) * ((x + y) * (x + y))) = ((x * (x * x)) + (y * (y * y))))", true),
    ("exists x. exists y. exists z. (~(x = y) & ~(y = z) & ~(x = z))", true),
    (
        "exists x. exists y. exists z. exists w. (~(x = y) & ~(x = z) & ~(x = w) & ~(y = z) & ~(y = w) & ~(z = w))",
        false,
    ),
    ("forall x. ((x = 0) -> ((x * 2) = 0))", true),
    ("forall x. (((x * 2) = 1) <-> (x = 2))", true),
    ("forall x. (((x + x) = 0) <-> (x = 0))", true),
    ("((exists x. ((x * x) = 2)) | (forall x. ((x * 0) = 0)))", true),
    ("~(exists x. ((x * x) = 2))", true),
    ("((forall x. exists y. ((x + y) = 0)) & ~(forall x. exists y. ((x * y) = 1)))", true),
    ("forall x. forall y. exists z. ((x + z) = y)", true),
    ("forall x. forall y. (~(x = 0) -> exists z. ((x * z) = y))", true),
    ("exists x. (((x + x) = x) & ~(x = 0))", false),
];

/// Propositional tautologies checked by truth table.
const PROPOSITIONAL: [(&str, bool); 3] = [
    ("(p -> (q -> p))", true),
    ("((p -> q) <-> (~p | q))", true),
    ("(p & ~p)", false),
];

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct LogicConfig {
    pub seed: u64,
    /// Formula file, one statement per line; the builtin corpus when unset.
    pub formulas: Option<String>,
    /// Interpretation file; the three-element field when unset.
    pub interpretation: Option<String>,
    pub node_cap: usize,
}

impl Default for LogicConfig {
    fn default() -> Self {
        LogicConfig {
            seed: 0,
            formulas: None,
            interpretation: None,
            node_cap: DEFAULT_NODE_CAP,
        }
    }
}

struct Judgement {
    verdict: String,
    agrees: bool,
}

fn judge(f: &Formula, interp: &FiniteInterpretation, cap: usize) -> Result<Judgement> {
    if f.is_propositional() {
        let t = truth_table_prove(f)?;
        let direct = t.rows.iter().all(|row| row.1);
        return Ok(Judgement {
            verdict: if t.valid { "valid" } else { "invalid" }.into(),
            agrees: direct == t.valid,
        });
    }
    eliminate_quantifiers_capped(f, interp.size(), cap)?;
    let v = decide(f, interp)?;
    let direct = evaluate_direct(f, interp)?;
    let neg = decide(&Formula::not(f.clone()), interp)?;
    Ok(Judgement {
        verdict: v.to_string(),
        agrees: v == direct && neg == !v,
    })
}

pub fn logic(cfg: &LogicConfig) -> Result<Report> {
    let interp = match &cfg.interpretation {
        Some(path) => parse_interpretation(&fs::read_to_string(path)?)?,
        None => gf3(),
    };
    let mut r = Report::new("logic", cfg);
    let mut t = Table::new(
        "verdicts",
        &["line", "formula", "verdict", "expected", "oracle_agrees"],
    );
    let mut agree = 0usize;
    let mut total = 0usize;
    match &cfg.formulas {
        Some(path) => {
            for (line, f) in parse_formula_file(&fs::read_to_string(path)?)? {
                let j = judge(&f, &interp, cfg.node_cap)?;
                total += 1;
                agree += usize::from(j.agrees);
                t.push(vec![
                    line.into(),
                    f.to_string().into(),
                    j.verdict.into(),
                    "".into(),
                    j.agrees.into(),
                ]);
            }
        }
        None => {
            let mut expected_ok = 0usize;
            let builtin = PROPOSITIONAL
                .iter()
                .map(|&(s, e)| (s, if e { "valid" } else { "invalid" }));
            let corpus = GF3_STATEMENTS
                .iter()
                .map(|&(s, e)| (s, if e { "true" } else { "false" }));
            for (i, (text, expected)) in builtin.chain(corpus).enumerate() {
                let f = parse_formula(text)?;
                let j = judge(&f, &interp, cfg.node_cap)?;
                total += 1;
                agree += usize::from(j.agrees);
                expected_ok += usize::from(j.verdict == expected);
                t.push(vec![
                    (i + 1).into(),
                    f.to_string().into(),
                    j.verdict.into(),
                    expected.into(),
                    j.agrees.into(),
                ]);
            }
            if cfg.interpretation.is_none() {
                r.check_eq("expected_verdicts", expected_ok, total);
            }
        }
    }
    r.metric("statements", total);
    r.check_eq("oracle_agreement", agree, total);
    r.tables.push(t);
    Ok(r)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ValuesConfig {
    pub seed: u64,
    /// Profile file; `values` is used when unset.
    pub profile: Option<String>,
    pub values: Vec<f64>,
    /// `sqrt`, `inverted-square`, or a path to a table file.
    pub shaper: String,
    pub death_rule: bool,
}

impl Default for ValuesConfig {
    fn default() -> Self {
        ValuesConfig {
            seed: 0,
            profile: None,
            values: vec![0.2, 0.8],
            shaper: "sqrt".into(),
            death_rule: true,
        }
    }
}

pub fn values(cfg: &ValuesConfig) -> Result<Report> {
    let profile = match &cfg.profile {
        Some(path) => parse_profile(&fs::read_to_string(path)?)?,
        None => ValueProfile::from_values(&cfg.values),
    };
    let shaper = match ConcaveShaper::by_name(&cfg.shaper) {
        Ok(s) => s,
        Err(_) if fs::metadata(&cfg.shaper).is_ok() => {
            ConcaveShaper::parse_table(&fs::read_to_string(&cfg.shaper)?)?
        }
        Err(e) => return Err(e),
    };
    let p = if cfg.death_rule {
        apply_death_rule(&profile)
    } else {
        profile.clone()
    };
    let mut r = Report::new("values", cfg);
    let m = aggregate_mean(&p)?;
    let mm = aggregate_maximin(&p)?;
    r.metric("members", p.len());
    r.metric("alive", p.members().iter().filter(|x| x.alive).count());
    if cfg.profile.is_none() && cfg.values == [0.2, 0.8] {
        r.check("mean", m, 0.5, 1e-12);
        r.check("maximin", mm, 0.2, 1e-12);
    } else {
        r.metric("mean", m);
        r.metric("maximin", mm);
    }
    r.metric("concave", aggregate_concave(&p, &shaper)?);
    if p.members().iter().any(|x| x.weight.is_some()) {
        r.metric("weighted", aggregate_weighted(&p)?);
    }
    r.check_eq("maximin_le_mean", mm <= m + 1e-15, true);

    let mut t = Table::new("members", &["id", "value", "alive", "weight", "shaped"]);
    for x in p.members() {
        t.push(vec![
            x.id.as_str().into(),
            x.value.into(),
            x.alive.into(),
            x.weight.map_or("".into(), Into::into),
            shaper.apply(x.value).into(),
        ]);
    }
    r.tables.push(t);
    Ok(r)
}

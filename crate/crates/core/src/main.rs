use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde::de::DeserializeOwned;

use finlab::experiments::{self as ex, Report};
use finlab::Error;

/// Reproducible experiments with finite-universe agents.
///
/// Settings are resolved in order: built-in defaults, then the JSON file
/// given by --config, then command-line flags.
#[derive(Parser)]
#[command(name = "finlab", version)]
struct Cli {
    /// JSON file with experiment settings.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Output directory. Defaults to $FINLAB_OUT/<experiment>, or
    /// results/<experiment> when FINLAB_OUT is unset.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Print nothing on success.
    #[arg(long, short, global = true)]
    quiet: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Expected values of the hitman decision.
    Hitman,
    /// Probabilities of a short history under two models.
    Prob41 {
        #[arg(long)]
        model: Option<String>,
        #[arg(long)]
        alt: Option<String>,
    },
    /// Derived chain of the two-state model and the period-2 chain.
    Markov,
    /// Subsequence-frequency statistics separating two models.
    Discriminate {
        #[arg(long)]
        model: Option<String>,
        #[arg(long)]
        alt: Option<String>,
        #[arg(long)]
        n: Option<usize>,
        #[arg(long)]
        samples: Option<usize>,
    },
    /// Delusion-box environment with observable hidden rule.
    Delusion63 {
        #[arg(long)]
        alpha: Option<f64>,
        #[command(flatten)]
        plan: PlanArgs,
    },
    /// Environment whose state is re-randomized every fourth step.
    Delusion64 {
        #[command(flatten)]
        plan: PlanArgs,
    },
    /// Rule sets of the three-variable family consistent with observed sequences.
    EnumerateSrv {
        /// Observed s as a string of 0/1 or T/F.
        #[arg(long)]
        s: Option<String>,
        #[arg(long)]
        v: Option<String>,
    },
    /// Model learning: MAP search, structure recovery or the prior-ratio bound.
    Learn {
        #[arg(long, value_parser = ["map", "recovery", "bound"])]
        mode: Option<String>,
        #[arg(long)]
        steps: Option<usize>,
        #[arg(long)]
        seeds: Option<u64>,
        #[arg(long)]
        samples: Option<usize>,
    },
    /// Stochastic-action distribution checked against enumeration.
    Sigma {
        #[arg(long)]
        instances: Option<usize>,
    },
    /// Enumeration of self-modifying policy sets.
    Selfmod {
        #[arg(long)]
        max_horizon: Option<usize>,
        #[arg(long)]
        random_models: Option<usize>,
    },
    /// Matching-pennies table learners competing for table space.
    Arena {
        #[arg(long)]
        games: Option<u64>,
        #[arg(long)]
        seeds: Option<u64>,
        #[arg(long)]
        algorithm: Option<u8>,
        #[arg(long)]
        random_interval: Option<f64>,
        #[arg(long)]
        growth_per_print: Option<f64>,
        /// Comma-separated random_interval values to sweep.
        #[arg(long, value_delimiter = ',')]
        sweep: Option<Vec<f64>>,
    },
    /// Decide statements against a finite interpretation.
    Logic {
        #[arg(long)]
        formulas: Option<String>,
        #[arg(long)]
        interpretation: Option<String>,
        #[arg(long)]
        node_cap: Option<usize>,
    },
    /// Aggregate a value profile.
    Values {
        #[arg(long)]
        profile: Option<String>,
        /// sqrt, inverted-square, or a table file.
        #[arg(long)]
        shaper: Option<String>,
        #[arg(long)]
        no_death_rule: bool,
    },
    /// Simulate a policy in a model.
    Rollout {
        #[arg(long)]
        model: Option<String>,
        /// uniform or constant:A
        #[arg(long)]
        policy: Option<String>,
        #[arg(long)]
        steps: Option<usize>,
    },
}

#[derive(Args)]
struct PlanArgs {
    #[arg(long)]
    steps: Option<usize>,
    #[arg(long)]
    horizon: Option<usize>,
    #[arg(long)]
    gamma: Option<f64>,
}

fn load<C: DeserializeOwned + Default>(path: &Option<PathBuf>) -> Result<C, Error> {
    match path {
        None => Ok(C::default()),
        Some(p) => {
            let text = std::fs::read_to_string(p)
                .map_err(|e| Error::Io(format!("{}: {e}", p.display())))?;
            serde_json::from_str(&text)
                .map_err(|e| Error::Parameter(format!("{}: {e}", p.display())))
        }
    }
}

fn set<T>(slot: &mut T, v: Option<T>) {
    if let Some(v) = v {
        *slot = v;
    }
}

fn bits(s: &str) -> Result<Vec<bool>, Error> {
    s.chars()
        .filter(|c| !c.is_whitespace() && *c != ',')
        .map(|c| match c {
            '1' | 'T' | 't' => Ok(true),
            '0' | 'F' | 'f' => Ok(false),
            _ => Err(Error::Parameter(format!("bad sequence symbol {c}"))),
        })
        .collect()
}

fn run(cli: &Cli) -> Result<Report, Error> {
    let cfg = &cli.config;
    macro_rules! seeded {
        ($c:ident) => {
            set(&mut $c.seed, cli.seed)
        };
    }
    match &cli.command {
        Command::Hitman => {
            let mut c: ex::HitmanConfig = load(cfg)?;
            seeded!(c);
            ex::hitman(&c)
        }
        Command::Prob41 { model, alt } => {
            let mut c: ex::Prob41Config = load(cfg)?;
            seeded!(c);
            set(&mut c.model, model.clone());
            set(&mut c.alt, alt.clone());
            ex::prob41(&c)
        }
        Command::Markov => {
            let mut c: ex::MarkovConfig = load(cfg)?;
            seeded!(c);
            ex::markov(&c)
        }
        Command::Discriminate {
            model,
            alt,
            n,
            samples,
        } => {
            let mut c: ex::DiscriminateConfig = load(cfg)?;
            seeded!(c);
            set(&mut c.model, model.clone());
            set(&mut c.alt, alt.clone());
            set(&mut c.n, *n);
            set(&mut c.samples, *samples);
            ex::discriminate(&c)
        }
        Command::Delusion63 { alpha, plan } => {
            let mut c: ex::Delusion63Config = load(cfg)?;
            seeded!(c);
            set(&mut c.alpha, *alpha);
            set(&mut c.steps, plan.steps);
            set(&mut c.horizon, plan.horizon);
            set(&mut c.gamma, plan.gamma);
            ex::delusion63(&c)
        }
        Command::Delusion64 { plan } => {
            let mut c: ex::Delusion64Config = load(cfg)?;
            seeded!(c);
            set(&mut c.steps, plan.steps);
            set(&mut c.horizon, plan.horizon);
            set(&mut c.gamma, plan.gamma);
            ex::delusion64(&c)
        }
        Command::EnumerateSrv { s, v } => {
            let mut c: ex::EnumerateSrvConfig = load(cfg)?;
            seeded!(c);
            set(&mut c.s, s.as_deref().map(bits).transpose()?);
            set(&mut c.v, v.as_deref().map(bits).transpose()?);
            ex::enumerate_srv_run(&c)
        }
        Command::Learn {
            mode,
            steps,
            seeds,
            samples,
        } => {
            let mut c: ex::LearnConfig = load(cfg)?;
            seeded!(c);
            if let Some(m) = mode {
                c.mode = serde_json::from_value(serde_json::Value::String(m.clone()))
                    .map_err(|e| Error::Parameter(e.to_string()))?;
            }
            set(&mut c.steps, *steps);
            set(&mut c.seeds, *seeds);
            set(&mut c.samples, *samples);
            ex::learn(&c)
        }
        Command::Sigma { instances } => {
            let mut c: ex::SigmaConfig = load(cfg)?;
            seeded!(c);
            set(&mut c.instances, *instances);
            ex::sigma(&c)
        }
        Command::Selfmod {
            max_horizon,
            random_models,
        } => {
            let mut c: ex::SelfModConfig = load(cfg)?;
            seeded!(c);
            set(&mut c.max_horizon, *max_horizon);
            set(&mut c.random_models, *random_models);
            ex::selfmod(&c)
        }
        Command::Arena {
            games,
            seeds,
            algorithm,
            random_interval,
            growth_per_print,
            sweep,
        } => {
            let mut c: ex::ArenaRunConfig = load(cfg)?;
            seeded!(c);
            set(&mut c.games, *games);
            set(&mut c.seeds, *seeds);
            set(&mut c.algorithm, *algorithm);
            set(&mut c.arena.random_interval, *random_interval);
            set(&mut c.arena.growth_per_print, *growth_per_print);
            set(&mut c.sweep_random_intervals, sweep.clone());
            ex::arena(&c)
        }
        Command::Logic {
            formulas,
            interpretation,
            node_cap,
        } => {
            let mut c: ex::LogicConfig = load(cfg)?;
            seeded!(c);
            if formulas.is_some() {
                c.formulas = formulas.clone();
            }
            if interpretation.is_some() {
                c.interpretation = interpretation.clone();
            }
            set(&mut c.node_cap, *node_cap);
            ex::logic(&c)
        }
        Command::Values {
            profile,
            shaper,
            no_death_rule,
        } => {
            let mut c: ex::ValuesConfig = load(cfg)?;
            seeded!(c);
            if profile.is_some() {
                c.profile = profile.clone();
            }
            set(&mut c.shaper, shaper.clone());
            if *no_death_rule {
                c.death_rule = false;
            }
            ex::values(&c)
        }
        Command::Rollout {
            model,
            policy,
            steps,
        } => {
            let mut c: ex::RolloutConfig = load(cfg)?;
            seeded!(c);
            set(&mut c.model, model.clone());
            set(&mut c.policy, policy.clone());
            set(&mut c.steps, *steps);
            ex::rollout_run(&c)
        }
    }
}

fn out_dir(cli: &Cli, experiment: &str) -> PathBuf {
    if let Some(p) = &cli.out {
        return p.clone();
    }
    let base =
        std::env::var_os("FINLAB_OUT").map_or_else(|| PathBuf::from("results"), PathBuf::from);
    base.join(experiment)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let report = match run(&cli) {
        Ok(r) => r,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(if matches!(e, Error::ResourceCap(_)) {
                3
            } else {
                2
            });
        }
    };
    let dir = out_dir(&cli, &report.experiment);
    if let Err(e) = report.emit(&dir) {
        eprintln!("error: cannot write {}: {e}", dir.display());
        return ExitCode::from(2);
    }
    let pass = report.all_pass();
    if !cli.quiet || !pass {
        print!("{}", report.summary());
        println!("wrote {}", dir.display());
    }
    if pass {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(1)
    }
}

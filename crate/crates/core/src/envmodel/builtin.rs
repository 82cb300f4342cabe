//! Published example models.

use super::network::{BooleanNetwork, Expr};
use super::table::TransitionTable;
use super::EnvModel;
use crate::error::{Error, Result};

/// Outcomes of the hitman decision as (label, value): hitman state H then
/// victim state V, each dead, wounded or unharmed.
pub const HITMAN_OUTCOMES: [(&str, f64); 9] = [
    ("Hd,Vd", 0.0),
    ("Hd,Vw", 0.4),
    ("Hd,V+", 0.8),
    ("Hw,Vd", 0.1),
    ("Hw,Vw", 0.5),
    ("Hw,V+", 0.9),
    ("H+,Vd", 0.2),
    ("H+,Vw", 0.6),
    ("H+,V+", 1.0),
];
pub const HITMAN_SHOOT: [f64; 9] = [0.0, 0.0, 0.7, 0.01, 0.01, 0.18, 0.07, 0.02, 0.01];
pub const HITMAN_HOLD: [f64; 9] = [0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.7, 0.2, 0.1];

/// One-state model of the hitman decision: action 0 shoots, action 1 holds,
/// observations index [`HITMAN_OUTCOMES`].
pub fn hitman() -> EnvModel {
    let probs: Vec<f64> = HITMAN_SHOOT
        .iter()
        .chain(HITMAN_HOLD.iter())
        .copied()
        .collect();
    TransitionTable::new(1, 2, 9, 0, probs)
        .expect("hitman rows are normalized")
        .into()
}

/// Two states, actions `a`/`b`, binary observations, start state `s0`.
pub fn table_4_1() -> EnvModel {
    #[rustfmt::skip]
    let probs = vec![
        0.2, 0.3, 0.0, 0.5,
        0.3, 0.0, 0.3, 0.4,
        1.0, 0.0, 0.0, 0.0,
        0.3, 0.3, 0.2, 0.2,
    ];
    TransitionTable::new(2, 2, 2, 0, probs)
        .expect("table rows are normalized")
        .into()
}

/// Stateless coin with `P(o = 1) = p` and two ignored actions.
pub fn bernoulli(p: f64) -> Result<EnvModel> {
    bernoulli_with_actions(p, 2)
}

pub fn bernoulli_with_actions(p: f64, n_actions: usize) -> Result<EnvModel> {
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::Parameter(format!(
            "bernoulli probability {p} outside [0,1]"
        )));
    }
    let probs: Vec<f64> = (0..n_actions).flat_map(|_| [1.0 - p, p]).collect();
    Ok(TransitionTable::new(1, n_actions, 2, 0, probs)?.into())
}

fn names(xs: &[&str]) -> Vec<String> {
    xs.iter().map(|s| s.to_string()).collect()
}

/// The delusion-box environment with hidden rule `s = r xor v` kept with
/// probability `alpha`.
///
/// State bits `s, r, v`; action bits `a, b, c, d`; observation bits `o, p`.
/// Setting `b` routes `c` and `d` to the observations instead of `s` and `v`.
/// The initial state is chosen so that, absent flips, the first observation
/// is `(o, p) = (true, false)`.
pub fn delusion_env_6_3(alpha: f64) -> Result<EnvModel> {
    if !(alpha > 0.0 && alpha <= 1.0) {
        return Err(Error::Parameter(format!(
            "alpha must lie in (0, 1], got {alpha}"
        )));
    }
    let (s, r, v) = (Expr::State(0), Expr::State(1), Expr::State(2));
    let (b, c, d) = (Expr::Action(1), Expr::Action(2), Expr::Action(3));
    let rule = Expr::xor(r.clone(), v.clone());
    let net = BooleanNetwork::new(
        names(&["s", "r", "v"]),
        names(&["a", "b", "c", "d"]),
        names(&["o", "p"]),
        vec![false, false, true],
        vec![
            Expr::choice(alpha, rule.clone(), Expr::not(rule)),
            s.clone(),
            r,
        ],
        vec![Expr::ite(b.clone(), c, s), Expr::ite(b, d, v)],
    )?;
    Ok(net.into())
}

/// Environment where `s` is re-randomized whenever the counter `(r, v)`
/// reads `(false, false)`, once every four steps.
///
/// State bits `s, r, v`; action bits `a, b, c`; one observation bit `o`.
pub fn delusion_env_6_4() -> EnvModel {
    let (s, r, v) = (Expr::State(0), Expr::State(1), Expr::State(2));
    let (b, c) = (Expr::Action(1), Expr::Action(2));
    let coin = Expr::choice(0.5, Expr::Lit(true), Expr::Lit(false));
    let net = BooleanNetwork::new(
        names(&["s", "r", "v"]),
        names(&["a", "b", "c"]),
        names(&["o"]),
        vec![false, false, false],
        vec![
            Expr::ite(Expr::or(r.clone(), v.clone()), s.clone(), coin),
            Expr::not(r.clone()),
            Expr::xor(r, v),
        ],
        vec![Expr::ite(b, c, s)],
    )
    .expect("valid network");
    net.into()
}

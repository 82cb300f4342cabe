mod common;

use std::sync::Arc;

use common::{history, random_table, trajectory_sum};
use finlab::envmodel::{bernoulli, delusion_env_6_3, table_4_1, EnvModel, TransitionTable};
use finlab::experiments::{hitman, HitmanConfig};
use finlab::learner::ThreeArgUtility;
use finlab::planner::{
    best_action, expectimax_value, observed_values, past_values, policy_value_mc, rollout,
    self_mod_select, stochastic_action_sigma, value_deltas, Condition, ConditionMode,
    ConstantPolicy, FnPolicy, Planner, PolicyOutput, SelfModPolicy, SelfModPolicySet, SigmaBranch,
    UniformRandom, ValueGrid,
};
use finlab::rng::stream;
use finlab::utility::{DiscountSpec, RewardCodec, UtilitySpec};
use finlab::{Error, FlaggedHistory, InteractionHistory};
use proptest::prelude::*;
use rand::Rng;

/// Deterministic pseudo-random utility of a whole history.
fn hashed_utility(salt: u64) -> impl Fn(&InteractionHistory) -> f64 + Send + Sync + Clone {
    move |h: &InteractionHistory| {
        let mut x = salt ^ 0x9e37_79b9_7f4a_7c15;
        for &(a, o) in h.pairs() {
            x = (x ^ (a as u64 * 31 + o as u64 + 1)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
            x ^= x >> 29;
        }
        (x >> 11) as f64 / (1u64 << 53) as f64
    }
}

/// Full-tree expectimax with probabilities from trajectory enumeration.
fn tree_value(
    q: &EnvModel,
    u: &dyn Fn(&InteractionHistory) -> f64,
    d: &DiscountSpec,
    h: &InteractionHistory,
    t0: usize,
    depth: usize,
) -> f64 {
    let mut v = d.weight(t0, h.len()) * u(h);
    if depth > 0 {
        let ph = trajectory_sum(q, h);
        let mut best = f64::NEG_INFINITY;
        for a in 0..q.n_actions() {
            let mut total = 0.0;
            for o in 0..q.n_observations() {
                let hao = h.extend(a, o).unwrap();
                let p = trajectory_sum(q, &hao);
                if p > 0.0 {
                    total += p / ph * tree_value(q, u, d, &hao, t0, depth - 1);
                }
            }
            best = best.max(total);
        }
        v += best;
    }
    v
}

#[test]
fn expectimax_matches_full_tree() {
    let mut rng = stream(23, 0);
    for k in 0..100 {
        let (ns, na, no) = (
            rng.gen_range(1..=3),
            rng.gen_range(1..=3),
            rng.gen_range(1..=3),
        );
        let q = random_table(&mut rng, ns, na, no);
        let horizon = rng.gen_range(0..=4);
        let f = hashed_utility(k);
        let u = UtilitySpec::external(f.clone());
        let d = if k % 2 == 0 {
            DiscountSpec::Geometric(rng.gen_range(0.1..0.95))
        } else {
            DiscountSpec::HorizonWindow(2)
        };
        let h = InteractionHistory::new(na, no);
        let got = expectimax_value(&q, &u, &d, &h, horizon).unwrap();
        let want = tree_value(&q, &f, &d, &h, 0, horizon);
        assert!(
            (got - want).abs() <= 1e-12 * want.abs().max(1.0),
            "case {k}: {got} vs {want}"
        );
    }
}

#[test]
fn hitman_values_and_choice() {
    let r = hitman(&HitmanConfig::default()).unwrap();
    assert!((r.num("shoot").unwrap() - 0.764).abs() <= 1e-12);
    assert!((r.num("hold").unwrap() - 0.36).abs() <= 1e-12);
    assert!(r.all_pass());
}

#[test]
fn horizon_zero_is_the_utility() {
    let q = table_4_1();
    let f = hashed_utility(3);
    let u = UtilitySpec::external(f.clone());
    let h = history(2, 2, &[(0, 1), (1, 1)]);
    let v = expectimax_value(&q, &u, &DiscountSpec::Geometric(0.9), &h, 0).unwrap();
    assert_eq!(v, f(&h));
}

#[test]
fn symmetric_actions_pick_the_first() {
    let q = bernoulli(0.3).unwrap();
    let u = UtilitySpec::external(|h: &InteractionHistory| h.last().map_or(0.0, |(_, o)| o as f64));
    let a = best_action(
        &q,
        &u,
        &DiscountSpec::Geometric(0.5),
        &InteractionHistory::new(2, 2),
        3,
    )
    .unwrap();
    assert_eq!(a, 0);
}

#[test]
fn impossible_history_is_reported() {
    let q = bernoulli(1.0).unwrap();
    let u = UtilitySpec::external(|_: &InteractionHistory| 0.0);
    let h = history(2, 2, &[(0, 0)]);
    assert_eq!(
        expectimax_value(&q, &u, &DiscountSpec::Geometric(0.5), &h, 2),
        Err(Error::ImpossibleHistory)
    );
}

#[test]
fn delusion_box_is_declined_on_every_step() {
    let r = finlab::experiments::delusion63(&finlab::experiments::Delusion63Config {
        steps: 300,
        ..Default::default()
    })
    .unwrap();
    assert_eq!(r.num("b_false_fraction"), Some(1.0));
    assert!(r.num("first_step_delusion_cost").unwrap() > 0.0);
}

#[test]
fn rollout_edge_cases() {
    let q = table_4_1();
    assert!(rollout(&q, &mut UniformRandom::new(2), 0, 1)
        .unwrap()
        .history
        .is_empty());
    let det = bernoulli(1.0).unwrap();
    let a = rollout(&det, &mut ConstantPolicy(1), 20, 1).unwrap();
    let b = rollout(&det, &mut ConstantPolicy(1), 20, 99).unwrap();
    assert_eq!(a, b);
    let x = rollout(&q, &mut UniformRandom::new(2), 50, 7).unwrap();
    assert_eq!(x, rollout(&q, &mut UniformRandom::new(2), 50, 7).unwrap());
    let mut bad = FnPolicy::new("bad", |_: &InteractionHistory| PolicyOutput::Action(5));
    assert!(rollout(&q, &mut bad, 1, 0).is_err());
}

#[test]
fn undeluded_cycle_violations_match_alpha() {
    let q = delusion_env_6_3(0.99).unwrap();
    let steps = 10_000;
    let r = rollout(&q, &mut ConstantPolicy(0), steps, 4).unwrap();
    let o: Vec<bool> = r.history.observations().map(|x| x & 1 == 1).collect();
    let p: Vec<bool> = r.history.observations().map(|x| x & 2 == 2).collect();
    let violations = (2..steps)
        .filter(|&t| o[t] != (o[t - 2] ^ p[t - 1]))
        .count();
    let rate = violations as f64 / (steps - 2) as f64;
    assert!((rate - 0.01).abs() <= 0.003, "rate {rate}");
}

#[test]
fn constant_reward_value_is_geometric_sum() {
    let q = bernoulli(1.0).unwrap();
    let codec = RewardCodec::new(vec![0.0, 1.0]).unwrap();
    let est = policy_value_mc(&q, &mut UniformRandom::new(2), &codec, 0.9, 10, 25, 1).unwrap();
    assert!((est.mean - (1.0 - 0.9f64.powi(10)) / 0.1).abs() < 1e-12);
    assert!(est.std_err < 1e-12);
}

#[test]
fn guessing_game_pays_one_over_actions() {
    // The environment draws a symbol uniformly; reward 1 when the action matches.
    let na = 3;
    let probs: Vec<f64> = (0..na).flat_map(|_| [2.0 / 3.0, 1.0 / 3.0]).collect();
    let q: EnvModel = TransitionTable::new(1, na, 2, 0, probs).unwrap().into();
    let codec = RewardCodec::new(vec![0.0, 1.0]).unwrap();
    let est = policy_value_mc(&q, &mut UniformRandom::new(na), &codec, 0.5, 1, 20_000, 2).unwrap();
    assert!((est.mean - 1.0 / na as f64).abs() <= 3.0 * est.std_err);
}

#[test]
fn monte_carlo_matches_exact_policy_value() {
    let mut rng = stream(31, 0);
    let q = random_table(&mut rng, 2, 2, 2);
    let codec = RewardCodec::new(vec![0.0, 1.0]).unwrap();
    let (gamma, steps) = (0.8f64, 6usize);
    // Exact: propagate the state distribution under the uniform policy.
    let t = q.table();
    let mut dist = vec![0.0; 2];
    dist[t.start()] = 1.0;
    let mut exact = 0.0;
    for i in 0..steps {
        let mut next = vec![0.0; 2];
        let mut reward = 0.0;
        for s in 0..2 {
            for a in 0..2 {
                for s2 in 0..2 {
                    for o in 0..2 {
                        let p = dist[s] * 0.5 * t.prob(s, a, s2, o);
                        next[s2] += p;
                        reward += p * codec.reward(o);
                    }
                }
            }
        }
        exact += gamma.powi(i as i32) * reward;
        dist = next;
    }
    let est = policy_value_mc(
        &q,
        &mut UniformRandom::new(2),
        &codec,
        gamma,
        steps,
        4000,
        9,
    )
    .unwrap();
    assert!(
        (est.mean - exact).abs() <= 3.0 * est.std_err,
        "{} vs {exact}",
        est.mean
    );
}

#[test]
fn myopic_window_is_one_step_optimizer() {
    let mut rng = stream(41, 0);
    for k in 0..30 {
        let q = random_table(&mut rng, 3, 3, 2);
        let f = hashed_utility(k);
        let u = UtilitySpec::external(f.clone());
        let h = InteractionHistory::new(3, 2);
        let got = best_action(&q, &u, &DiscountSpec::HorizonWindow(0), &h, 3).unwrap();
        let scores: Vec<f64> = (0..3)
            .map(|a| {
                let row = q.conditional_observation(&h, a).unwrap();
                (0..2).map(|o| row[o] * f(&h.extend(a, o).unwrap())).sum()
            })
            .collect();
        let best = scores.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        assert!(scores[got] >= best - 1e-12, "case {k}");
    }
}

#[test]
fn single_policy_set_keeps_itself() {
    let q = table_4_1();
    let u = UtilitySpec::Reward(RewardCodec::new(vec![0.0, 1.0]).unwrap());
    let set = SelfModPolicySet::new(vec![SelfModPolicy::Optimal], 0).unwrap();
    let (_, pi) = self_mod_select(&set, &q, &u, 0.9, &InteractionHistory::new(2, 2), 2).unwrap();
    assert_eq!(pi, 0);
    assert!(SelfModPolicySet::new(vec![SelfModPolicy::Optimal], 1).is_err());
}

fn fixed(action: usize, next: usize) -> SelfModPolicy {
    SelfModPolicy::Fixed(Arc::new(move |_: &InteractionHistory| (action, next)))
}

#[test]
fn strictly_worse_policy_is_not_adopted() {
    // Action 1 pays more than action 0; the alternative always plays 0.
    let q: EnvModel = TransitionTable::new(1, 2, 2, 0, vec![0.9, 0.1, 0.2, 0.8])
        .unwrap()
        .into();
    let u = UtilitySpec::Reward(RewardCodec::new(vec![0.0, 1.0]).unwrap());
    let set = SelfModPolicySet::new(vec![SelfModPolicy::Optimal, fixed(0, 1)], 0).unwrap();
    for horizon in 1..=3 {
        let (a, pi) =
            self_mod_select(&set, &q, &u, 0.9, &InteractionHistory::new(2, 2), horizon).unwrap();
        assert_eq!((a, pi), (1, 0), "horizon {horizon}");
    }
}

/// sigma by summing over every level assignment `f: A -> R`.
fn sigma_oracle(grid: &[f64], branches: &[SigmaBranch]) -> Vec<f64> {
    let na = branches[0].rows.len();
    let nr = grid.len();
    let total: f64 = branches.iter().map(|b| b.weight).sum();
    let mut out = vec![0.0; na];
    for b in branches {
        let weighted: Vec<Vec<f64>> = b
            .rows
            .iter()
            .map(|row| {
                let v: f64 = row.iter().zip(grid).map(|(p, r)| p * r).sum();
                row.iter().zip(grid).map(|(p, r)| p * r / v).collect()
            })
            .collect();
        for code in 0..nr.pow(na as u32) {
            let f: Vec<usize> = (0..na).map(|a| code / nr.pow(a as u32) % nr).collect();
            let p: f64 = (0..na).map(|a| weighted[a][f[a]]).product();
            let top = grid[*f
                .iter()
                .max_by(|x, y| grid[**x].total_cmp(&grid[**y]))
                .unwrap()];
            let ties: Vec<usize> = (0..na).filter(|&a| grid[f[a]] == top).collect();
            for &a in &ties {
                out[a] += b.weight / total * p / ties.len() as f64;
            }
        }
    }
    out
}

fn random_row<R: Rng>(rng: &mut R, n: usize, grid: &[f64]) -> Vec<f64> {
    loop {
        let mut row: Vec<f64> = (0..n)
            .map(|_| {
                if rng.gen_bool(0.2) {
                    0.0
                } else {
                    rng.gen::<f64>()
                }
            })
            .collect();
        let s: f64 = row.iter().sum();
        if s == 0.0 {
            continue;
        }
        row.iter_mut().for_each(|x| *x /= s);
        if row.iter().zip(grid).map(|(p, r)| p * r).sum::<f64>() > 0.0 {
            return row;
        }
    }
}

#[test]
fn sigma_examples() {
    let one = SigmaBranch {
        weight: 1.0,
        rows: vec![vec![0.5, 0.5]],
    };
    assert_eq!(
        stochastic_action_sigma(&[0.25, 0.75], &[one]).unwrap(),
        vec![1.0]
    );
    let det = SigmaBranch {
        weight: 1.0,
        rows: vec![vec![0.0, 1.0], vec![1.0, 0.0]],
    };
    assert_eq!(
        stochastic_action_sigma(&[0.25, 0.75], &[det]).unwrap(),
        vec![1.0, 0.0]
    );
    let sym = SigmaBranch {
        weight: 1.0,
        rows: vec![vec![0.5, 0.5], vec![0.5, 0.5]],
    };
    let s = stochastic_action_sigma(&[0.25, 0.75], std::slice::from_ref(&sym)).unwrap();
    assert!((s[0] - 0.5).abs() < 1e-15 && (s[1] - 0.5).abs() < 1e-15);
    assert_eq!(s, sigma_oracle(&[0.25, 0.75], &[sym]));
    let zero = SigmaBranch {
        weight: 1.0,
        rows: vec![vec![1.0, 0.0], vec![0.0, 1.0]],
    };
    assert_eq!(
        stochastic_action_sigma(&[0.0, 0.5], &[zero]),
        Err(Error::DegenerateValue { action: 0 })
    );
}

#[test]
fn sigma_matches_enumeration_over_level_assignments() {
    let mut rng = stream(47, 0);
    for _ in 0..300 {
        let na = rng.gen_range(1..=3);
        let nr = rng.gen_range(1..=4);
        let mut grid: Vec<f64> = Vec::new();
        while grid.len() < nr {
            let x = rng.gen_range(1..=64) as f64 / 64.0;
            if !grid.contains(&x) {
                grid.push(x);
            }
        }
        if nr > 1 && rng.gen_bool(0.5) {
            grid[0] = 0.0;
        }
        grid.sort_by(f64::total_cmp);
        let branches: Vec<SigmaBranch> = (0..rng.gen_range(1..=3))
            .map(|_| SigmaBranch {
                weight: rng.gen_range(0.1..2.0),
                rows: (0..na).map(|_| random_row(&mut rng, nr, &grid)).collect(),
            })
            .collect();
        let got = stochastic_action_sigma(&grid, &branches).unwrap();
        let want = sigma_oracle(&grid, &branches);
        for (g, w) in got.iter().zip(&want) {
            assert!((g - w).abs() <= 1e-12, "{got:?} vs {want:?}");
        }
    }
}

fn u3_from(f: impl Fn(usize, usize, usize) -> f64 + Send + Sync + 'static) -> ThreeArgUtility {
    Arc::new(
        move |hl: &InteractionHistory, hk: &InteractionHistory, hj: &InteractionHistory| {
            f(hl.len(), hk.len(), hj.len())
        },
    )
}

fn flagged(t: usize) -> FlaggedHistory {
    let mut h = FlaggedHistory::new(2, 2);
    for i in 0..t {
        h.push(i % 2, i % 3 == 0, (i / 2) % 2).unwrap();
    }
    h
}

#[test]
fn past_values_single_term_and_constant() {
    let grid = ValueGrid::default();
    let h = flagged(5);
    let u = u3_from(|l, k, j| (l as f64 + 2.0 * k as f64 + 3.0 * j as f64) / 40.0);
    let pv = past_values(&h, &u, 0.7, 1, 5, 2, 4, &grid).unwrap();
    assert_eq!(pv, grid.discrete((2.0 + 8.0 + 15.0) / 40.0));
    let c = u3_from(|_, _, _| 0.3);
    for (i, l, k) in [(2, 1, 1), (3, 2, 5), (5, 4, 4), (4, 1, 3)] {
        assert_eq!(
            past_values(&h, &c, 0.6, 1, i, l, k, &grid).unwrap(),
            grid.discrete(0.3)
        );
    }
    assert!(matches!(
        past_values(&h, &c, 0.6, 2, 2, 1, 1, &grid),
        Err(Error::Index(_))
    ));
    assert!(matches!(
        past_values(&h, &c, 0.6, 1, 3, 3, 3, &grid),
        Err(Error::Index(_))
    ));
    assert!(matches!(
        past_values(&h, &c, 0.6, 1, 3, 2, 6, &grid),
        Err(Error::Index(_))
    ));
}

#[test]
fn past_values_match_closed_form_normalization() {
    let grid = ValueGrid::default();
    let mut rng = stream(53, 0);
    for _ in 0..200 {
        let t = rng.gen_range(2..8);
        let h = flagged(t);
        let table: Vec<f64> = (0..(t + 1).pow(3)).map(|_| rng.gen()).collect();
        let tb = table.clone();
        let n = t + 1;
        let u = u3_from(move |l, k, j| tb[(l * n + k) * n + j]);
        let gamma: f64 = rng.gen_range(0.05..0.99);
        let m = rng.gen_range(0..t);
        let i = rng.gen_range(m + 1..=t);
        let l = rng.gen_range(m..i);
        let k = rng.gen_range(l..=t);
        let raw: f64 = (i..=t)
            .map(|j| gamma.powi((j - i) as i32) * table[(l * n + k) * n + j])
            .sum();
        let want = raw * (1.0 - gamma) / (1.0 - gamma.powi((t - i + 1) as i32));
        let got = past_values(&h, &u, gamma, m, i, l, k, &grid).unwrap();
        assert!(
            (got - want).abs() <= 0.5 / 1024.0 + 1e-12,
            "{got} vs {want}"
        );
    }
}

#[test]
fn observed_values_conditions() {
    let grid = ValueGrid::default();
    let h = flagged(4);
    let flat = u3_from(|l, _, j| (l + j) as f64 / 10.0);
    for c in [1, 2, 3] {
        let ov = observed_values(
            &h,
            &flat,
            0.5,
            0,
            Condition::from_number(c).unwrap(),
            ConditionMode::PerStep,
            &grid,
        )
        .unwrap();
        for i in 1..=4 {
            assert_eq!(
                ov[i - 1],
                past_values(&h, &flat, 0.5, 0, i, i - 1, i - 1, &grid).unwrap()
            );
        }
    }
    let rising = u3_from(|_, k, _| k as f64 / 8.0);
    for c in [1, 2, 3] {
        let ov = observed_values(
            &h,
            &rising,
            0.5,
            0,
            Condition::from_number(c).unwrap(),
            ConditionMode::PerStep,
            &grid,
        )
        .unwrap();
        assert_eq!(ov, vec![0.0; 4]);
    }

    // Deltas (+0.25, -0.5) at i = 2: fails the all-nonpositive test only.
    let h = flagged(3);
    let mixed = u3_from(|_, k, _| [0.0, 0.5, 0.75, 0.0][k]);
    assert_eq!(
        value_deltas(&h, &mixed, 0.5, 1, 2, &grid).unwrap(),
        vec![0.25, -0.5]
    );
    let run = |c: u8| {
        observed_values(
            &h,
            &mixed,
            0.5,
            1,
            Condition::from_number(c).unwrap(),
            ConditionMode::PerStep,
            &grid,
        )
        .unwrap()
    };
    assert_eq!(run(1)[1], 0.0);
    assert_eq!(run(2)[1], 0.5);
    assert_eq!(run(3)[1], 0.5);
    assert_eq!(run(2)[0], 0.0);
    assert!(Condition::from_number(4).is_err());
}

#[test]
fn all_steps_mode_requires_every_step() {
    let grid = ValueGrid::default();
    let h = flagged(3);
    // Steps 2 and 3 pass condition 1; step 1 fails because k = 1 beats k = 0.
    let u = u3_from(|_, k, _| [0.2, 0.6, 0.4, 0.4][k]);
    let per = observed_values(
        &h,
        &u,
        0.5,
        0,
        Condition::AllNonPositive,
        ConditionMode::PerStep,
        &grid,
    )
    .unwrap();
    let all = observed_values(
        &h,
        &u,
        0.5,
        0,
        Condition::AllNonPositive,
        ConditionMode::AllSteps,
        &grid,
    )
    .unwrap();
    assert_eq!(per[0], 0.0);
    assert!(per[1] > 0.0);
    assert_eq!(all, vec![0.0; 3]);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn choice_is_invariant_under_positive_affine_maps(seed in any::<u64>(), c in 0.1f64..10.0, b in -5.0f64..5.0) {
        let mut rng = stream(seed, 0);
        let q = random_table(&mut rng, 2, 3, 2);
        let f = hashed_utility(seed);
        let g = f.clone();
        let u = UtilitySpec::external(f.clone());
        let v = UtilitySpec::external(move |h: &InteractionHistory| c * g(h) + b);
        let d = DiscountSpec::Geometric(0.8);
        let h = InteractionHistory::new(3, 2);
        let plan_u = Planner::new(&q, &u, d, 3);
        let values = plan_u.action_values(&h).unwrap();
        let chosen = Planner::new(&q, &v, d, 3).best_action(&h).unwrap();
        let best = values.iter().map(|x| x.1).fold(f64::NEG_INFINITY, f64::max);
        prop_assert!(values[chosen].1 >= best - 1e-9);
    }

    #[test]
    fn sigma_is_a_distribution(seed in any::<u64>()) {
        let mut rng = stream(seed, 0);
        let grid = [0.0, 0.25, 0.5, 1.0];
        let na = rng.gen_range(1..=4);
        let branches: Vec<SigmaBranch> = (0..rng.gen_range(1..=3))
            .map(|_| SigmaBranch { weight: rng.gen_range(0.1..3.0), rows: (0..na).map(|_| random_row(&mut rng, 4, &grid)).collect() })
            .collect();
        let s = stochastic_action_sigma(&grid, &branches).unwrap();
        prop_assert!((s.iter().sum::<f64>() - 1.0).abs() <= 1e-9);
        prop_assert!(s.iter().all(|&x| x >= 0.0));
    }

    #[test]
    fn dominant_action_gets_the_largest_share(seed in any::<u64>()) {
        let mut rng = stream(seed, 0);
        let grid = [0.2, 0.4, 0.6, 0.8];
        let na = rng.gen_range(2..=3);
        let mut rows: Vec<Vec<f64>> = (0..na).map(|_| random_row(&mut rng, 4, &grid)).collect();
        // Action 0 moves mass from each row's lowest level to its top level.
        let mut dom = rows[1].clone();
        for r in rows.iter().skip(1) {
            for (x, y) in dom.iter_mut().zip(r) {
                *x = x.min(*y);
            }
        }
        let spare = 1.0 - dom.iter().sum::<f64>();
        dom[3] += spare;
        rows[0] = dom;
        let s = stochastic_action_sigma(&grid, &[SigmaBranch { weight: 1.0, rows }]).unwrap();
        let top = s.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        prop_assert!(s[0] >= top - 1e-12, "{:?}", s);
    }

    #[test]
    fn optimal_policy_is_retained(seed in any::<u64>(), horizon in 1usize..=3, members in prop::collection::vec((0usize..2, 0usize..3), 1..3)) {
        let mut rng = stream(seed, 0);
        let q = random_table(&mut rng, 2, 2, 2);
        let u = UtilitySpec::Reward(RewardCodec::new(vec![0.0, 1.0]).unwrap());
        let n = members.len() + 1;
        let mut policies = vec![SelfModPolicy::Optimal];
        policies.extend(members.iter().map(|&(a, next)| fixed(a, next % n)));
        let set = SelfModPolicySet::new(policies, 0).unwrap();
        let (_, pi) = self_mod_select(&set, &q, &u, 0.9, &InteractionHistory::new(2, 2), horizon).unwrap();
        prop_assert_eq!(pi, 0);
    }
}

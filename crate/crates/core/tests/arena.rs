use finlab::arena::{
    instability_metric, length_to_size, next_symbol, play_games, Algorithm, ArenaConfig,
    LearnerTable, Role, Trajectory, Verdict, Window,
};
use finlab::rng::stream;
use proptest::prelude::*;

fn small(games_per_print: usize, growth: f64) -> ArenaConfig {
    ArenaConfig {
        print_interval: games_per_print,
        growth_per_print: growth,
        ..Default::default()
    }
}

#[test]
fn layout_offsets() {
    assert_eq!(length_to_size(-1), 0);
    assert_eq!(length_to_size(0), 1);
    assert_eq!(length_to_size(3), 85);
    for n in 0..8 {
        assert_eq!(length_to_size(n), (4i64.pow(n as u32 + 1) - 1) / 3);
    }
    let t = LearnerTable::new(5, 10);
    assert_eq!(t.capacity(), 1364);
    assert_eq!(t.table_size(), 1364);
}

#[test]
fn empty_tables_play_raw_zero() {
    let mut rng = stream(1, 0);
    for role in [Role::Predictor, Role::Evader] {
        for alg in [Algorithm::One, Algorithm::Two] {
            let mut t = LearnerTable::new(5, 1_000_000_000);
            assert_eq!(
                next_symbol(&mut t, role, alg, Window::default(), 0.0, &mut rng),
                0
            );
        }
    }
    assert_eq!(Role::Predictor.one(), 1);
    assert_eq!(Role::Evader.one(), 0);
}

#[test]
fn predictor_learns_a_constant_opponent() {
    for alg in [Algorithm::One, Algorithm::Two] {
        let mut rng = stream(2, 0);
        let mut t = LearnerTable::new(5, 1_000_000_000);
        let mut w = Window::default();
        let mut hits = 0;
        for g in 0..200 {
            let x = next_symbol(&mut t, Role::Predictor, alg, w, 0.01, &mut rng);
            if g >= 100 && x == Role::Predictor.one() {
                hits += 1;
            }
            w.push(x, 1);
        }
        assert!(hits > 90, "{alg:?}: {hits}");
        assert_eq!(t.guard_violations, 0);
    }
}

#[test]
fn add_and_remove_move_aligned_groups() {
    let mut rng = stream(3, 0);
    let mut t = LearnerTable::new(5, 10);
    assert_eq!(t.remove(1000, &mut rng), 341);
    assert_eq!(t.table_size(), 0);
    assert_eq!(t.remove(1, &mut rng), 0);
    assert_eq!(t.add(5, &mut rng), 5);
    assert_eq!(t.table_size(), 20);
    // The shortest windows fill first.
    assert!((1..=20).all(|c| t.is_available(c)));
    assert!((21..t.capacity() + 1).all(|c| !t.is_available(c)));
    assert_eq!(t.add(10_000, &mut rng), 336);
    assert_eq!(t.table_size(), t.capacity());
}

#[test]
fn transfers_are_zero_sum_without_growth() {
    for alg in [Algorithm::One, Algorithm::Two] {
        let t = play_games(&small(10, 0.0), alg, 20_000, 4).unwrap();
        let total = t.samples[0].0 + t.samples[0].1;
        assert!(t.samples.iter().all(|s| s.0 + s.1 == total), "{alg:?}");
        assert_eq!(t.samples.len(), 2001);
    }
}

#[test]
fn growth_adds_the_computed_blocks() {
    let g = 0.05;
    let t = play_games(&small(50, g), Algorithm::Two, 20_000, 5).unwrap();
    for pair in t.samples.windows(2) {
        let before = (pair[0].0 + pair[0].1) as f64;
        let after = (pair[1].0 + pair[1].1) as f64;
        let grew = after - before;
        // floor(g p / 4) + floor(g e / 4) blocks of four, unless capped.
        assert!(grew >= 0.0 && grew <= g * before + 1e-9, "{pair:?}");
        if pair[1].0 + 4 * ((g * before / 4.0) as usize) < t.capacity
            && pair[1].1 + 4 * ((g * before / 4.0) as usize) < t.capacity
        {
            assert!(grew >= g * before - 8.0, "{pair:?}");
        }
    }
}

#[test]
fn no_win_value_means_growth_only() {
    let cfg = ArenaConfig {
        win_value: 0,
        ..small(100, 0.0)
    };
    let t = play_games(&cfg, Algorithm::One, 5_000, 6).unwrap();
    assert!(t.samples.iter().all(|&s| s == t.samples[0]));
    let cfg = ArenaConfig {
        win_value: 0,
        ..small(100, 0.05)
    };
    let t = play_games(&cfg, Algorithm::One, 5_000, 6).unwrap();
    assert!(t
        .samples
        .windows(2)
        .all(|w| w[1].0 >= w[0].0 && w[1].1 >= w[0].1));
}

#[test]
fn runs_are_reproducible() {
    let cfg = ArenaConfig::default();
    let a = play_games(&cfg, Algorithm::Two, 30_000, 7).unwrap();
    let b = play_games(&cfg, Algorithm::Two, 30_000, 7).unwrap();
    assert_eq!(a, b);
    assert_ne!(a, play_games(&cfg, Algorithm::Two, 30_000, 8).unwrap());
}

#[test]
fn clearing_prevents_mixed_replies() {
    for seed in 0..4 {
        let t = play_games(&ArenaConfig::default(), Algorithm::Two, 50_000, seed).unwrap();
        assert_eq!(t.guard_violations, 0);
    }
}

#[test]
fn random_players_split_the_wins() {
    let cfg = ArenaConfig {
        random_interval: 1.0,
        ..Default::default()
    };
    let t = play_games(&cfg, Algorithm::One, 100_000, 9).unwrap();
    assert!(
        (t.predictor_win_rate() - 0.5).abs() <= 0.01,
        "{}",
        t.predictor_win_rate()
    );
}

#[test]
fn verdict_examples() {
    let traj = |samples: Vec<(usize, usize)>| Trajectory {
        samples,
        predictor_wins: 1,
        evader_wins: 1,
        guard_violations: 0,
        capacity: 1364,
    };
    assert_eq!(
        instability_metric(&traj(vec![(300, 300); 20]), 0.95),
        Verdict::Contested
    );
    assert_eq!(
        instability_metric(&traj(vec![(1364, 0); 20]), 0.95),
        Verdict::MonopolizedByPredictor
    );
    let mut s = vec![(300, 300); 18];
    s.extend([(0, 1000), (0, 1000)]);
    assert_eq!(
        instability_metric(&traj(s.clone()), 0.95),
        Verdict::MonopolizedByEvader
    );
    s.push((500, 500));
    assert_eq!(instability_metric(&traj(s), 0.95), Verdict::Contested);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn sizes_stay_in_bounds(seed in any::<u64>(), alg in 1u8..=2, growth in 0.0f64..0.2, win in 0usize..5) {
        let cfg = ArenaConfig { growth_per_print: growth, win_value: win, ..Default::default() };
        let t = play_games(&cfg, Algorithm::from_number(alg).unwrap(), 5_000, seed).unwrap();
        for &(p, e) in &t.samples {
            prop_assert!(p <= t.capacity && e <= t.capacity);
            prop_assert!(p % 4 == 0 && e % 4 == 0);
        }
        prop_assert_eq!(t.games(), 5_000);
    }
}

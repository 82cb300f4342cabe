//! Matching pennies between two table-driven sequence learners whose table
//! space is the stake.
//!
//! Each learner keeps counts of recent history windows of lengths
//! `0..=max_length` over the joint alphabet of (predictor bit, evader bit),
//! laid out level by level: length `n` occupies `length_to_size(n-1) ..
//! length_to_size(n)`. Table space is handed out and taken back in aligned
//! groups of four cells, shortest windows first, so a learner with less
//! space only sees shorter contexts.

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ArenaConfig {
    pub max_length: usize,
    /// Groups of four cells moved from loser to winner per game.
    pub win_value: usize,
    pub print_interval: usize,
    pub max_count: u64,
    /// Expected games between forced random plays.
    pub random_interval: f64,
    /// Fraction of table space each side starts with.
    pub init_table: f64,
    pub e_advantage: f64,
    pub growth_per_print: f64,
}

impl Default for ArenaConfig {
    fn default() -> Self {
        ArenaConfig {
            max_length: 5,
            win_value: 2,
            print_interval: 100,
            max_count: 1_000_000_000,
            random_interval: 100.0,
            init_table: 0.2,
            e_advantage: 1.0,
            growth_per_print: 0.01,
        }
    }
}

impl ArenaConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::Parameter(m.to_string()));
        if !(1..=8).contains(&self.max_length) {
            return bad("max_length must be in 1..=8");
        }
        if self.print_interval == 0 || self.max_count == 0 {
            return bad("print_interval and max_count must be positive");
        }
        if !(self.random_interval > 0.0) {
            return bad("random_interval must be positive");
        }
        if !(self.init_table > 0.0 && self.init_table <= 1.0) {
            return bad("init_table must be in (0, 1]");
        }
        if !(self.e_advantage > 0.0)
            || !(self.growth_per_print >= 0.0)
            || !self.growth_per_print.is_finite()
        {
            return bad("e_advantage must be positive and growth_per_print nonnegative");
        }
        Ok(())
    }

    /// Usable cells: every level up to `max_length` except the root cell.
    pub fn capacity(&self) -> usize {
        length_to_size(self.max_length as i64) as usize - 1
    }
}

/// Cells in levels `0..=n`, i.e. `(4^(n+1) - 1) / 3`; zero for `n = -1`.
pub fn length_to_size(n: i64) -> i64 {
    assert!((-1..=30).contains(&n), "window length out of range");
    ((1i64 << (2 * (n + 1))) - 1) / 3
}

fn level_of(size: usize) -> i64 {
    let mut l = 0;
    while length_to_size(l) as usize <= size {
        l += 1;
    }
    l
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Role {
    Predictor,
    Evader,
}

impl Role {
    fn self_select(self) -> usize {
        match self {
            Role::Predictor => 2,
            Role::Evader => 1,
        }
    }
    fn other_select(self) -> usize {
        3 - self.self_select()
    }
    /// The bit to play when the opponent is expected to play 1.
    pub fn one(self) -> u8 {
        match self {
            Role::Predictor => 1,
            Role::Evader => 0,
        }
    }
    pub fn zero(self) -> u8 {
        1 - self.one()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Algorithm {
    /// Longest available window with any counts decides by majority.
    One,
    /// Windows keep only the latest opponent reply; the window with the
    /// largest count-plus-length margin decides.
    Two,
}

impl Algorithm {
    pub fn from_number(n: u8) -> Result<Self> {
        match n {
            1 => Ok(Algorithm::One),
            2 => Ok(Algorithm::Two),
            _ => Err(Error::Parameter(format!(
                "algorithm must be 1 or 2, got {n}"
            ))),
        }
    }
}

/// Shared record of the games so far: two bits per game, predictor bit
/// high, newest game lowest. Length saturates at 16.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct Window {
    pub bits: u32,
    pub len: usize,
}

impl Window {
    pub fn push(&mut self, predictor: u8, evader: u8) {
        self.bits = (self.bits << 2) | (2 * predictor as u32) | evader as u32;
        if self.len < 16 {
            self.len += 1;
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct LearnerTable {
    counts: Vec<u64>,
    available: Vec<bool>,
    table_size: usize,
    max_length: usize,
    max_count: u64,
    /// Lookups under algorithm 2 that found both opponent replies counted.
    pub guard_violations: u64,
}

impl LearnerTable {
    /// A table with every cell available.
    pub fn new(max_length: usize, max_count: u64) -> Self {
        let n = length_to_size(max_length as i64) as usize;
        LearnerTable {
            counts: vec![0; n],
            available: vec![true; n],
            table_size: n - 1,
            max_length,
            max_count,
            guard_violations: 0,
        }
    }

    pub fn table_size(&self) -> usize {
        self.table_size
    }

    pub fn capacity(&self) -> usize {
        self.counts.len() - 1
    }

    pub fn count(&self, cell: usize) -> u64 {
        self.counts[cell]
    }

    pub fn is_available(&self, cell: usize) -> bool {
        self.available[cell]
    }

    fn cell(len: usize, position: usize) -> usize {
        length_to_size(len as i64 - 1) as usize + position
    }

    /// Releases up to `n` groups at the current top level, chosen from a
    /// random starting slot. Returns the number released.
    pub fn remove(&mut self, n: usize, rng: &mut ChaCha8Rng) -> usize {
        let n = n.min(self.table_size / 4);
        let mut left = n;
        while left > 0 {
            let l = level_of(self.table_size);
            let lo = (length_to_size(l - 1) - 1) as usize;
            let hi = (length_to_size(l) - 1) as usize;
            let slots = (hi - lo) / 4;
            let mut m = ((self.table_size - lo) / 4).min(left);
            let mut k = rng.gen_range(0..slots);
            while m > 0 {
                if k >= slots {
                    k -= slots;
                }
                let j = lo + 4 * k;
                if self.available[j + 1] {
                    for c in j + 1..=j + 4 {
                        self.available[c] = false;
                        self.counts[c] = 0;
                    }
                    m -= 1;
                    left -= 1;
                    self.table_size -= 4;
                }
                k += 1;
            }
        }
        n
    }

    /// Claims up to `n` groups at the lowest incomplete level, counts reset.
    pub fn add(&mut self, n: usize, rng: &mut ChaCha8Rng) -> usize {
        let n = n.min((self.capacity() - self.table_size) / 4);
        let mut left = n;
        while left > 0 {
            let l = level_of(self.table_size + 4);
            let lo = (length_to_size(l - 1) - 1) as usize;
            let hi = (length_to_size(l) - 1) as usize;
            let slots = (hi - lo) / 4;
            let mut m = ((hi - self.table_size) / 4).min(left);
            let mut k = rng.gen_range(0..slots);
            while m > 0 {
                if k >= slots {
                    k -= slots;
                }
                let j = lo + 4 * k;
                if !self.available[j + 1] {
                    for c in j + 1..=j + 4 {
                        self.available[c] = true;
                        self.counts[c] = 0;
                    }
                    m -= 1;
                    left -= 1;
                    self.table_size += 4;
                }
                k += 1;
            }
        }
        n
    }

    fn record(&mut self, role: Role, algorithm: Algorithm, w: Window) {
        let other = role.other_select();
        for len in 2..=self.max_length.min(w.len) {
            let position = (w.bits as usize) & ((1 << (2 * len)) - 1);
            let tp = Self::cell(len, position);
            if !self.available[tp] {
                continue;
            }
            self.counts[tp] += 1;
            match algorithm {
                Algorithm::One => {
                    if self.counts[tp] > self.max_count {
                        let base = Self::cell(len, position & !3);
                        for c in &mut self.counts[base..base + 4] {
                            *c /= 2;
                        }
                    }
                }
                Algorithm::Two => {
                    self.counts[Self::cell(len, position ^ other)] = 0;
                    self.counts[Self::cell(len, position ^ 3)] = 0;
                }
            }
        }
    }

    /// Opponent-0 and opponent-1 counts following the window shifted back
    /// one game, or `None` where the group is unavailable.
    fn replies(&self, role: Role, len: usize, hist: usize) -> Option<(u64, u64)> {
        let tp = Self::cell(len, hist & ((1 << (2 * len)) - 1));
        if !self.available[tp] {
            return None;
        }
        let (s, o) = (role.self_select(), role.other_select());
        let c = &self.counts;
        Some((c[tp] + c[tp + s], c[tp + o] + c[tp + s + o]))
    }
}

/// Records the window, then picks the next bit. With probability
/// `random_test` the bit is a coin flip; if no window has counts the
/// result is a raw 0 whatever the role.
pub fn next_symbol(
    table: &mut LearnerTable,
    role: Role,
    algorithm: Algorithm,
    w: Window,
    random_test: f64,
    rng: &mut ChaCha8Rng,
) -> u8 {
    table.record(role, algorithm, w);
    if rng.gen::<f64>() < random_test {
        return if rng.gen::<f64>() > 0.5 {
            role.one()
        } else {
            role.zero()
        };
    }
    let hist = (w.bits as usize) << 2;
    let hist_len = if w.len + 1 >= 16 { w.len } else { w.len + 1 };
    let max_len = table.max_length.min(hist_len);
    match algorithm {
        Algorithm::One => {
            for len in (2..=max_len).rev() {
                match table.replies(role, len, hist) {
                    Some((0, 0)) | None => continue,
                    Some((zeros, ones)) => {
                        return if zeros > ones {
                            role.zero()
                        } else {
                            role.one()
                        }
                    }
                }
            }
            0
        }
        Algorithm::Two => {
            let (mut margin, mut choice) = (0u64, 0u8);
            for len in (2..=max_len).rev() {
                let Some((zeros, ones)) = table.replies(role, len, hist) else {
                    continue;
                };
                if zeros == 0 && ones == 0 {
                    continue;
                }
                if zeros > 0 && ones > 0 {
                    table.guard_violations += 1;
                    debug_assert!(false, "opposite replies both counted");
                }
                let (m, c) = if zeros > ones {
                    (zeros - ones + len as u64, role.zero())
                } else {
                    (ones - zeros + len as u64, role.one())
                };
                if m > margin {
                    margin = m;
                    choice = c;
                }
            }
            if margin > 0 {
                choice
            } else {
                0
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Trajectory {
    /// `(predictor, evader)` table sizes: the starting sizes, then after
    /// each print interval's growth step, then after any final partial
    /// interval.
    pub samples: Vec<(usize, usize)>,
    pub predictor_wins: u64,
    pub evader_wins: u64,
    pub guard_violations: u64,
    pub capacity: usize,
}

impl Trajectory {
    pub fn games(&self) -> u64 {
        self.predictor_wins + self.evader_wins
    }

    pub fn predictor_win_rate(&self) -> f64 {
        self.predictor_wins as f64 / self.games() as f64
    }

    pub fn final_sizes(&self) -> (usize, usize) {
        *self.samples.last().expect("trajectory has samples")
    }
}

/// Groups each side gives up at the start so that both begin with
/// `init_table` of the space, the evader scaled by `e_advantage`.
fn initial_removals(cfg: &ArenaConfig) -> (usize, usize) {
    let it = (cfg.capacity() as i64 - 4) / 4;
    let r = (cfg.init_table * it as f64) as i64;
    let er = (cfg.e_advantage * r as f64) as i64;
    let pr = 2 * r - er;
    ((it - pr).max(0) as usize, (it - er).max(0) as usize)
}

fn transfer(
    winner: &mut LearnerTable,
    loser: &mut LearnerTable,
    win_value: usize,
    rng: &mut ChaCha8Rng,
) {
    let n = win_value
        .min((winner.capacity() - winner.table_size) / 4)
        .min(loser.table_size / 4);
    winner.add(n, rng);
    loser.remove(n, rng);
}

/// Plays `n_games` rounds. Random draws come from one stream in a fixed
/// order: initial removals, then per game the predictor's and evader's
/// choice draws followed by transfer placement, then growth placement.
pub fn play_games(
    cfg: &ArenaConfig,
    algorithm: Algorithm,
    n_games: u64,
    seed: u64,
) -> Result<Trajectory> {
    cfg.validate()?;
    if n_games == 0 {
        return Err(Error::Parameter("n_games must be at least 1".into()));
    }
    let mut rng = rng::stream(seed, 0);
    let mut p = LearnerTable::new(cfg.max_length, cfg.max_count);
    let mut e = LearnerTable::new(cfg.max_length, cfg.max_count);
    let (rp, re) = initial_removals(cfg);
    p.remove(rp, &mut rng);
    e.remove(re, &mut rng);
    let random_test = 1.0 / cfg.random_interval;
    let mut w = Window::default();
    let mut traj = Trajectory {
        samples: vec![(p.table_size, e.table_size)],
        predictor_wins: 0,
        evader_wins: 0,
        guard_violations: 0,
        capacity: cfg.capacity(),
    };
    for g in 1..=n_games {
        let px = next_symbol(&mut p, Role::Predictor, algorithm, w, random_test, &mut rng);
        let ex = next_symbol(&mut e, Role::Evader, algorithm, w, random_test, &mut rng);
        w.push(px, ex);
        if px == ex {
            traj.predictor_wins += 1;
            transfer(&mut p, &mut e, cfg.win_value, &mut rng);
        } else {
            traj.evader_wins += 1;
            transfer(&mut e, &mut p, cfg.win_value, &mut rng);
        }
        if g % cfg.print_interval as u64 == 0 {
            let addp = (cfg.growth_per_print * p.table_size as f64 / 4.0) as usize;
            p.add(addp, &mut rng);
            let adde = (cfg.growth_per_print * e.table_size as f64 / 4.0) as usize;
            e.add(adde, &mut rng);
            traj.samples.push((p.table_size, e.table_size));
        } else if g == n_games {
            traj.samples.push((p.table_size, e.table_size));
        }
    }
    traj.guard_violations = p.guard_violations + e.guard_violations;
    Ok(traj)
}

/// One independent run per seed, in parallel.
pub fn play_many(
    cfg: &ArenaConfig,
    algorithm: Algorithm,
    n_games: u64,
    seeds: &[u64],
) -> Result<Vec<Trajectory>> {
    seeds
        .par_iter()
        .map(|&s| play_games(cfg, algorithm, n_games, s))
        .collect()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    MonopolizedByPredictor,
    MonopolizedByEvader,
    Contested,
}

impl Verdict {
    pub fn is_monopoly(self) -> bool {
        self != Verdict::Contested
    }

    pub fn name(self) -> &'static str {
        match self {
            Verdict::MonopolizedByPredictor => "monopolized-by-predictor",
            Verdict::MonopolizedByEvader => "monopolized-by-evader",
            Verdict::Contested => "contested",
        }
    }
}

/// A side monopolizes when its share of the combined table space is at
/// least `fraction` at every sample in the last tenth of the run
/// (always including the final sample).
pub fn instability_metric(traj: &Trajectory, fraction: f64) -> Verdict {
    let n = traj.samples.len();
    if n == 0 {
        return Verdict::Contested;
    }
    let tail = n.div_ceil(10).max(1);
    let holds = |pick: fn(&(usize, usize)) -> usize| {
        traj.samples[n - tail..].iter().all(|s| {
            let total = s.0 + s.1;
            total > 0 && pick(s) as f64 >= fraction * total as f64
        })
    };
    if holds(|s| s.0) {
        Verdict::MonopolizedByPredictor
    } else if holds(|s| s.1) {
        Verdict::MonopolizedByEvader
    } else {
        Verdict::Contested
    }
}

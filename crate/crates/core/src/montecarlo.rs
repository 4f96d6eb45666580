//! Seeded simulation of whole games under a Markov profile.

use std::collections::BTreeMap;
use std::io::Write;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::game::{
    resolve_round, terminal_payoffs, Action, GameState, PayoffVector, PlayerId, ResolutionKind,
    RoundResolution, MIN_PLAYERS,
};
use crate::markov::MarkovProfile;
use crate::seed::mix64;

pub const DEFAULT_MAX_ROUNDS: u64 = 10_000;

/// Trials per work unit; results are combined in unit order.
const CHUNK: usize = 1024;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RoundRecord {
    pub state: GameState,
    pub actions: BTreeMap<PlayerId, Action>,
    pub resolution: RoundResolution,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Transcript {
    pub seed: u64,
    pub rounds: Vec<RoundRecord>,
    pub outcome: PayoffVector,
    /// The round cap was hit; the outcome is the even split among the last state.
    pub truncated: bool,
}

/// Aggregate result of one game, without the round-by-round record.
#[derive(Debug, Clone, PartialEq)]
pub struct GameOutcome {
    pub payoff: PayoffVector,
    pub rounds: u64,
    pub repeats: u64,
    pub truncated: bool,
    pub split: bool,
}

/// Draw every survivor's action independently from the profile.
pub fn sample_actions<R: Rng + ?Sized>(
    profile: &MarkovProfile,
    state: &GameState,
    rng: &mut R,
) -> Result<BTreeMap<PlayerId, Action>> {
    let probs = profile.probs(state)?;
    Ok(state
        .iter()
        .zip(probs)
        .map(|(player, p)| {
            let action = if rng.gen::<f64>() < p {
                Action::Paper
            } else {
                Action::Rock
            };
            (player, action)
        })
        .collect())
}

fn run_game<R: Rng>(
    profile: &MarkovProfile,
    universe: usize,
    rng: &mut R,
    max_rounds: u64,
    mut record: impl FnMut(RoundRecord),
) -> Result<GameOutcome> {
    if universe < MIN_PLAYERS {
        return Err(Error::Domain(format!(
            "a game needs at least {MIN_PLAYERS} players, got {universe}"
        )));
    }
    let mut state = GameState::full(universe)?;
    let mut repeats = 0;
    for round in 0..max_rounds {
        let actions = sample_actions(profile, &state, rng)?;
        let resolution = resolve_round(&state, &actions)?;
        let next = match &resolution.kind {
            ResolutionKind::Repeat => {
                repeats += 1;
                None
            }
            ResolutionKind::Continue { survivors } => Some(survivors.clone()),
            ResolutionKind::Winner { .. } | ResolutionKind::SplitTwo { .. } => None,
        };
        let payoff = terminal_payoffs(&resolution, &state);
        let split = matches!(resolution.kind, ResolutionKind::SplitTwo { .. });
        record(RoundRecord {
            state: state.clone(),
            actions,
            resolution,
        });
        if let Some(payoff) = payoff {
            return Ok(GameOutcome {
                payoff,
                rounds: round + 1,
                repeats,
                truncated: false,
                split,
            });
        }
        if let Some(next) = next {
            state = next;
        }
    }
    Ok(GameOutcome {
        payoff: PayoffVector::even_split(&state),
        rounds: max_rounds,
        repeats,
        truncated: true,
        split: false,
    })
}

/// Play one game from the full `universe`, recording every round.
pub fn play_game(
    profile: &MarkovProfile,
    universe: usize,
    seed: u64,
    max_rounds: u64,
) -> Result<Transcript> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut rounds = Vec::new();
    let outcome = run_game(profile, universe, &mut rng, max_rounds, |r| rounds.push(r))?;
    Ok(Transcript {
        seed,
        rounds,
        outcome: outcome.payoff,
        truncated: outcome.truncated,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimStats {
    pub universe: usize,
    pub trials: u64,
    pub master_seed: u64,
    pub max_rounds: u64,
    /// Fraction of games each player won outright.
    pub win_frequency: Vec<f64>,
    /// Average payoff, counting splits and truncated games.
    pub mean_payoff: Vec<f64>,
    /// Number of games that lasted each round count.
    pub round_count_histogram: BTreeMap<u64, u64>,
    pub total_rounds: u64,
    pub repeat_count: u64,
    pub split_count: u64,
    pub truncation_count: u64,
}

impl SimStats {
    /// Share of all played rounds that were repeats.
    pub fn repeat_rate(&self) -> f64 {
        self.repeat_count as f64 / self.total_rounds as f64
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    /// One row per player: `player,win_frequency,mean_payoff`.
    pub fn write_player_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["player", "win_frequency", "mean_payoff"])?;
        for (i, (win, pay)) in self.win_frequency.iter().zip(&self.mean_payoff).enumerate() {
            w.write_record([i.to_string(), win.to_string(), pay.to_string()])?;
        }
        w.flush().map_err(|e| Error::Serde(e.to_string()))?;
        Ok(())
    }
}

#[derive(Default)]
struct Tally {
    wins: Vec<u64>,
    payoff: Vec<f64>,
    histogram: BTreeMap<u64, u64>,
    rounds: u64,
    repeats: u64,
    splits: u64,
    truncations: u64,
}

impl Tally {
    fn new(universe: usize) -> Self {
        Self {
            wins: vec![0; universe],
            payoff: vec![0.0; universe],
            ..Default::default()
        }
    }

    fn add(&mut self, g: &GameOutcome) {
        if let [winner] = g.payoff.recipients() {
            if !g.truncated {
                self.wins[winner.0] += 1;
            }
        }
        let share = g.payoff.share();
        for p in g.payoff.recipients() {
            self.payoff[p.0] += share;
        }
        *self.histogram.entry(g.rounds).or_default() += 1;
        self.rounds += g.rounds;
        self.repeats += g.repeats;
        self.splits += u64::from(g.split);
        self.truncations += u64::from(g.truncated);
    }

    fn merge(&mut self, other: Tally) {
        for (a, b) in self.wins.iter_mut().zip(other.wins) {
            *a += b;
        }
        for (a, b) in self.payoff.iter_mut().zip(other.payoff) {
            *a += b;
        }
        for (k, v) in other.histogram {
            *self.histogram.entry(k).or_default() += v;
        }
        self.rounds += other.rounds;
        self.repeats += other.repeats;
        self.splits += other.splits;
        self.truncations += other.truncations;
    }
}

/// Play `trials` independent games. Trial `t` draws from its own stream
/// seeded with `mix64(master_seed, t)`, and partial tallies are merged in a
/// fixed order, so the result does not depend on thread count.
pub fn run_trials(
    profile: &MarkovProfile,
    universe: usize,
    trials: u64,
    master_seed: u64,
    max_rounds: u64,
) -> Result<SimStats> {
    if trials == 0 {
        return Err(Error::Domain("need at least one trial".into()));
    }
    if max_rounds == 0 {
        return Err(Error::Domain("max_rounds must be at least 1".into()));
    }
    let chunks = (trials as usize).div_ceil(CHUNK);
    let partials = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let mut tally = Tally::new(universe);
            let end = ((c + 1) * CHUNK).min(trials as usize);
            for t in c * CHUNK..end {
                let mut rng = ChaCha8Rng::seed_from_u64(mix64(master_seed, t as u64));
                let g = run_game(profile, universe, &mut rng, max_rounds, |_| {})?;
                tally.add(&g);
            }
            Ok(tally)
        })
        .collect::<Result<Vec<_>>>()?;

    let mut total = Tally::new(universe);
    for part in partials {
        total.merge(part);
    }
    let n = trials as f64;
    Ok(SimStats {
        universe,
        trials,
        master_seed,
        max_rounds,
        win_frequency: total.wins.iter().map(|w| *w as f64 / n).collect(),
        mean_payoff: total.payoff.iter().map(|p| p / n).collect(),
        round_count_histogram: total.histogram,
        total_rounds: total.rounds,
        repeat_count: total.repeats,
        split_count: total.splits,
        truncation_count: total.truncations,
    })
}

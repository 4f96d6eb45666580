//! One human (player 0) against bots that follow a Markov profile.

use std::collections::BTreeMap;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use shinohara_core::game::{
    resolve_round, terminal_payoffs, Action, GameState, PayoffVector, PlayerId, ResolutionKind,
    RoundResolution, MIN_PLAYERS,
};
use shinohara_core::markov::{MarkovProfile, Selection};
use shinohara_core::montecarlo::{sample_actions, DEFAULT_MAX_ROUNDS};
use thiserror::Error;

pub const HUMAN: PlayerId = PlayerId(0);
/// Sessions are capped at this many rounds; hitting it splits the prize among survivors.
pub const SESSION_ROUND_CAP: u64 = DEFAULT_MAX_ROUNDS;
pub const MAX_SESSION_PLAYERS: usize = 1000;

#[derive(Debug, Error, PartialEq)]
pub enum SessionError {
    #[error("{0}")]
    Invalid(String),
    #[error("game is finished")]
    Finished,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Status {
    Ongoing,
    Finished,
}

/// Bot strategy named in a create request.
#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(untagged)]
pub enum BotProfile {
    Named(String),
    Custom(serde_json::Value),
}

impl BotProfile {
    /// Role-based families hand their roles to bots in index order, the human last.
    pub fn build(&self, players: usize) -> Result<MarkovProfile, SessionError> {
        let bots_first = Selection::Priority((1..players).map(PlayerId).chain([HUMAN]).collect());
        let invalid = |e: shinohara_core::Error| SessionError::Invalid(e.to_string());
        match self {
            BotProfile::Named(name) => match name.as_str() {
                "symmetric" => MarkovProfile::symmetric_spe(players).map_err(invalid),
                "one-paper" => MarkovProfile::one_paper(players, bots_first).map_err(invalid),
                "two-paper" => MarkovProfile::two_paper(players, bots_first).map_err(invalid),
                other => Err(SessionError::Invalid(format!("unknown bot_profile `{other}`"))),
            },
            BotProfile::Custom(value) => {
                let profile: MarkovProfile = serde_json::from_value(value.clone())
                    .map_err(|e| SessionError::Invalid(format!("bad bot_profile: {e}")))?;
                if profile.universe() != players {
                    return Err(SessionError::Invalid(format!(
                        "bot_profile is for {} players, game has {players}",
                        profile.universe()
                    )));
                }
                Ok(profile)
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RoundView {
    pub index: u64,
    pub state: GameState,
    pub actions: BTreeMap<PlayerId, Action>,
    pub resolution: RoundResolution,
    pub eliminated: Vec<PlayerId>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StateView {
    pub survivors: GameState,
    pub human_id: PlayerId,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ActionOutcome {
    pub round: RoundView,
    /// Rounds the bots played on their own after the human was eliminated.
    #[serde(skip_serializing_if = "Vec::is_empty", default)]
    pub followup: Vec<RoundView>,
    pub state: StateView,
    pub status: Status,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub payoffs: Option<Vec<f64>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SessionView {
    pub session_id: String,
    pub universe: usize,
    pub human_id: PlayerId,
    pub seed: u64,
    pub state: StateView,
    pub status: Status,
    pub history: Vec<RoundView>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub payoffs: Option<Vec<f64>>,
    pub truncated: bool,
}

pub struct GameSession {
    id: String,
    universe: usize,
    seed: u64,
    profile: MarkovProfile,
    state: GameState,
    history: Vec<RoundView>,
    rng: ChaCha8Rng,
    payoffs: Option<PayoffVector>,
    truncated: bool,
}

impl GameSession {
    pub fn new(id: String, players: usize, bot: &BotProfile, seed: u64) -> Result<Self, SessionError> {
        if !(MIN_PLAYERS..=MAX_SESSION_PLAYERS).contains(&players) {
            return Err(SessionError::Invalid(format!(
                "players must be in {MIN_PLAYERS}..={MAX_SESSION_PLAYERS}, got {players}"
            )));
        }
        let profile = bot.build(players)?;
        Ok(Self {
            id,
            universe: players,
            seed,
            profile,
            state: GameState::full(players).expect("players >= 3"),
            history: Vec::new(),
            rng: ChaCha8Rng::seed_from_u64(seed),
            payoffs: None,
            truncated: false,
        })
    }

    pub fn id(&self) -> &str {
        &self.id
    }

    pub fn status(&self) -> Status {
        if self.payoffs.is_some() {
            Status::Finished
        } else {
            Status::Ongoing
        }
    }

    pub fn state_view(&self) -> StateView {
        StateView {
            survivors: self.state.clone(),
            human_id: HUMAN,
        }
    }

    fn dense_payoffs(&self) -> Option<Vec<f64>> {
        self.payoffs.as_ref().map(|p| p.to_dense(self.universe))
    }

    pub fn view(&self) -> SessionView {
        SessionView {
            session_id: self.id.clone(),
            universe: self.universe,
            human_id: HUMAN,
            seed: self.seed,
            state: self.state_view(),
            status: self.status(),
            history: self.history.clone(),
            payoffs: self.dense_payoffs(),
            truncated: self.truncated,
        }
    }

    /// Play one round; `human` replaces the human's own profile draw.
    fn play_round(&mut self, human: Option<Action>) -> Result<RoundView, SessionError> {
        let internal = |e: shinohara_core::Error| SessionError::Invalid(e.to_string());
        let mut actions = sample_actions(&self.profile, &self.state, &mut self.rng).map_err(internal)?;
        if let Some(a) = human {
            actions.insert(HUMAN, a);
        }
        let resolution = resolve_round(&self.state, &actions).map_err(internal)?;
        let view = RoundView {
            index: self.history.len() as u64,
            state: self.state.clone(),
            actions,
            eliminated: resolution.eliminated.clone(),
            resolution: resolution.clone(),
        };
        if let Some(p) = terminal_payoffs(&resolution, &self.state) {
            self.payoffs = Some(p);
        } else if let ResolutionKind::Continue { survivors } = &resolution.kind {
            self.state = survivors.clone();
        }
        self.history.push(view.clone());
        if self.payoffs.is_none() && self.history.len() as u64 >= SESSION_ROUND_CAP {
            self.payoffs = Some(PayoffVector::even_split(&self.state));
            self.truncated = true;
        }
        Ok(view)
    }

    pub fn act(&mut self, action: Action) -> Result<ActionOutcome, SessionError> {
        if self.status() == Status::Finished {
            return Err(SessionError::Finished);
        }
        let round = self.play_round(Some(action))?;
        let mut followup = Vec::new();
        while self.status() == Status::Ongoing && !self.state.contains(HUMAN) {
            followup.push(self.play_round(None)?);
        }
        Ok(ActionOutcome {
            round,
            followup,
            state: self.state_view(),
            status: self.status(),
            payoffs: self.dense_payoffs(),
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn session(players: usize, bot: &str, seed: u64) -> GameSession {
        GameSession::new("t".into(), players, &BotProfile::Named(bot.into()), seed).unwrap()
    }

    #[test]
    fn human_sole_paper_wins() {
        // every bot always shows rock
        let bot = BotProfile::Custom(serde_json::json!({
            "universe": 5, "kind": "size_symmetric", "probs": {"3": 0.0, "4": 0.0, "5": 0.0}
        }));
        let mut s = GameSession::new("t".into(), 5, &bot, 42).unwrap();
        let out = s.act(Action::Paper).unwrap();
        assert_eq!(out.status, Status::Finished);
        assert_eq!(out.payoffs.unwrap(), vec![1.0, 0.0, 0.0, 0.0, 0.0]);
        assert_eq!(s.act(Action::Rock), Err(SessionError::Finished));
    }

    #[test]
    fn seeded_sessions_replay() {
        let mut a = session(6, "symmetric", 42);
        let mut b = session(6, "symmetric", 42);
        while a.status() == Status::Ongoing {
            assert_eq!(a.act(Action::Rock).unwrap(), b.act(Action::Rock).unwrap());
        }
        assert_eq!(a.view().history, b.view().history);
    }

    #[test]
    fn human_never_gets_a_role() {
        let mut s = session(4, "two-paper", 1);
        let out = s.act(Action::Rock).unwrap();
        // bots 1 and 2 show paper, human and bot 3 split
        assert_eq!(out.round.actions[&PlayerId(1)], Action::Paper);
        assert_eq!(out.round.actions[&PlayerId(2)], Action::Paper);
        assert_eq!(out.payoffs.unwrap(), vec![0.5, 0.0, 0.0, 0.5]);
    }

    #[test]
    fn eliminated_human_watches_bots_finish() {
        for seed in 0..20 {
            let mut s = session(7, "symmetric", seed);
            while s.status() == Status::Ongoing {
                let out = s.act(Action::Paper).unwrap();
                assert!(out.status == Status::Finished || out.state.survivors.contains(HUMAN));
                if !out.followup.is_empty() {
                    assert!(!out.round.resolution.is_terminal());
                }
            }
            let view = s.view();
            let total: f64 = view.payoffs.unwrap().iter().sum();
            assert!((total - 1.0).abs() < 1e-12);
            for pair in view.history.windows(2) {
                let next = match &pair[0].resolution.kind {
                    ResolutionKind::Continue { survivors } => survivors.clone(),
                    _ => pair[0].state.clone(),
                };
                assert_eq!(pair[1].state, next);
            }
        }
    }

    #[test]
    fn rejects_bad_setup() {
        assert!(GameSession::new("t".into(), 2, &BotProfile::Named("symmetric".into()), 0).is_err());
        assert!(GameSession::new("t".into(), 5, &BotProfile::Named("greedy".into()), 0).is_err());
        let wrong = BotProfile::Custom(serde_json::json!({
            "universe": 4, "kind": "role_based", "rule": "one_paper"
        }));
        assert!(GameSession::new("t".into(), 5, &wrong, 0).is_err());
    }
}

//! Round mechanics: states, actions, single-round resolution and terminal payoffs.
//!
//! The host always shows rock. Every surviving player shows rock or paper at
//! once and the round resolves as:
//!
//! * everyone shows the same thing: the round is repeated;
//! * exactly one paper: that player wins;
//! * exactly one rock: that player wins;
//! * otherwise the paper players are eliminated. If two players remain they
//!   split the prize, otherwise play continues with the rock players.

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Smallest number of players a game can start with.
pub const MIN_PLAYERS: usize = 3;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct PlayerId(pub usize);

impl fmt::Display for PlayerId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Action {
    Rock,
    Paper,
}

/// The set of surviving players, kept in ascending order.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(try_from = "Vec<PlayerId>", into = "Vec<PlayerId>")]
pub struct GameState {
    survivors: Vec<PlayerId>,
}

impl GameState {
    pub fn new<I: IntoIterator<Item = PlayerId>>(players: I) -> Result<Self> {
        let mut survivors: Vec<PlayerId> = players.into_iter().collect();
        survivors.sort_unstable();
        let before = survivors.len();
        survivors.dedup();
        if survivors.len() != before {
            return Err(Error::Contract("duplicate player in state".into()));
        }
        if survivors.is_empty() {
            return Err(Error::Contract("a state needs at least one survivor".into()));
        }
        Ok(Self { survivors })
    }

    /// All players `0..universe`.
    pub fn full(universe: usize) -> Result<Self> {
        Self::new((0..universe).map(PlayerId))
    }

    pub fn from_mask(mask: u64) -> Result<Self> {
        Self::new((0..64).filter(|b| mask >> b & 1 == 1).map(PlayerId))
    }

    /// Bitmask of the survivors, if every index fits in 64 bits.
    pub fn mask(&self) -> Option<u64> {
        self.survivors.iter().try_fold(0u64, |m, p| {
            if p.0 < 64 {
                Some(m | 1 << p.0)
            } else {
                None
            }
        })
    }

    /// Comma-joined ascending indices, e.g. `"0,2,3"`.
    pub fn key(&self) -> String {
        self.survivors
            .iter()
            .map(|p| p.0.to_string())
            .collect::<Vec<_>>()
            .join(",")
    }

    pub fn from_key(key: &str) -> Result<Self> {
        let players = key
            .split(',')
            .map(|s| {
                s.trim()
                    .parse::<usize>()
                    .map(PlayerId)
                    .map_err(|_| Error::Contract(format!("bad state key {key:?}")))
            })
            .collect::<Result<Vec<_>>>()?;
        Self::new(players)
    }

    pub fn len(&self) -> usize {
        self.survivors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.survivors.is_empty()
    }

    pub fn is_terminal(&self) -> bool {
        self.survivors.len() < MIN_PLAYERS
    }

    pub fn contains(&self, player: PlayerId) -> bool {
        self.survivors.binary_search(&player).is_ok()
    }

    /// Position of `player` within the ascending survivor list.
    pub fn position(&self, player: PlayerId) -> Option<usize> {
        self.survivors.binary_search(&player).ok()
    }

    pub fn survivors(&self) -> &[PlayerId] {
        &self.survivors
    }

    pub fn iter(&self) -> impl Iterator<Item = PlayerId> + '_ {
        self.survivors.iter().copied()
    }
}

impl fmt::Display for GameState {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{{}}}", self.key())
    }
}

impl TryFrom<Vec<PlayerId>> for GameState {
    type Error = Error;

    fn try_from(v: Vec<PlayerId>) -> Result<Self> {
        Self::new(v)
    }
}

impl From<GameState> for Vec<PlayerId> {
    fn from(s: GameState) -> Self {
        s.survivors
    }
}

/// Which rule of the round applies, as a function of survivor and paper counts only.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum RoundCase {
    Repeat,
    SolePaper,
    SoleRock,
    SplitTwo,
    Continue,
}

/// Classify a round with `n >= 3` survivors of whom `papers` show paper.
pub fn classify(n: usize, papers: usize) -> RoundCase {
    debug_assert!(n >= MIN_PLAYERS && papers <= n);
    if papers == 0 || papers == n {
        RoundCase::Repeat
    } else if papers == 1 {
        RoundCase::SolePaper
    } else if papers == n - 1 {
        RoundCase::SoleRock
    } else if n - papers == 2 {
        RoundCase::SplitTwo
    } else {
        RoundCase::Continue
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ResolutionKind {
    Repeat,
    Winner { player: PlayerId },
    SplitTwo { pair: [PlayerId; 2] },
    Continue { survivors: GameState },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RoundResolution {
    #[serde(flatten)]
    pub kind: ResolutionKind,
    pub eliminated: Vec<PlayerId>,
}

impl RoundResolution {
    pub fn is_terminal(&self) -> bool {
        matches!(
            self.kind,
            ResolutionKind::Winner { .. } | ResolutionKind::SplitTwo { .. }
        )
    }
}

/// Resolve one simultaneous round.
///
/// `actions` must name exactly the survivors of `state`, and `state` must have
/// at least three survivors; two-player states are terminal.
pub fn resolve_round(
    state: &GameState,
    actions: &BTreeMap<PlayerId, Action>,
) -> Result<RoundResolution> {
    if state.len() < MIN_PLAYERS {
        return Err(Error::Contract(format!(
            "cannot play a round in terminal state {state}"
        )));
    }
    if actions.len() != state.len() || !actions.keys().all(|p| state.contains(*p)) {
        let missing: Vec<_> = state.iter().filter(|p| !actions.contains_key(p)).collect();
        let extra: Vec<_> = actions.keys().filter(|p| !state.contains(**p)).collect();
        return Err(Error::Contract(format!(
            "action map does not match survivors of {state}: missing {missing:?}, extra {extra:?}"
        )));
    }

    let (papers, rocks): (Vec<PlayerId>, Vec<PlayerId>) =
        state.iter().partition(|p| actions[p] == Action::Paper);

    let resolution = match classify(state.len(), papers.len()) {
        RoundCase::Repeat => RoundResolution {
            kind: ResolutionKind::Repeat,
            eliminated: Vec::new(),
        },
        RoundCase::SolePaper => RoundResolution {
            kind: ResolutionKind::Winner { player: papers[0] },
            eliminated: Vec::new(),
        },
        RoundCase::SoleRock => RoundResolution {
            kind: ResolutionKind::Winner { player: rocks[0] },
            eliminated: Vec::new(),
        },
        RoundCase::SplitTwo => RoundResolution {
            kind: ResolutionKind::SplitTwo {
                pair: [rocks[0], rocks[1]],
            },
            eliminated: papers,
        },
        RoundCase::Continue => RoundResolution {
            kind: ResolutionKind::Continue {
                survivors: GameState { survivors: rocks },
            },
            eliminated: papers,
        },
    };
    Ok(resolution)
}

/// Terminal payoff: the prize split evenly among `recipients`, zero elsewhere.
///
/// Storing recipients instead of real-valued shares keeps the total exactly one.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PayoffVector {
    recipients: Vec<PlayerId>,
}

impl PayoffVector {
    pub fn winner(player: PlayerId) -> Self {
        Self {
            recipients: vec![player],
        }
    }

    /// Even split among all survivors of `state`: the rule for infinite
    /// (in practice, truncated) histories, and for the two-player endgame.
    pub fn even_split(state: &GameState) -> Self {
        Self {
            recipients: state.survivors().to_vec(),
        }
    }

    pub fn recipients(&self) -> &[PlayerId] {
        &self.recipients
    }

    /// Share paid to each recipient.
    pub fn share(&self) -> f64 {
        1.0 / self.recipients.len() as f64
    }

    pub fn payoff(&self, player: PlayerId) -> f64 {
        if self.recipients.contains(&player) {
            self.share()
        } else {
            0.0
        }
    }

    /// Payoffs indexed by player id over `0..universe`.
    pub fn to_dense(&self, universe: usize) -> Vec<f64> {
        let mut out = vec![0.0; universe];
        let share = self.share();
        for p in &self.recipients {
            if p.0 < universe {
                out[p.0] = share;
            }
        }
        out
    }
}

/// Payoffs for a resolution that ends the game; `None` for repeat and continue.
pub fn terminal_payoffs(resolution: &RoundResolution, _state: &GameState) -> Option<PayoffVector> {
    match &resolution.kind {
        ResolutionKind::Winner { player } => Some(PayoffVector::winner(*player)),
        ResolutionKind::SplitTwo { pair } => Some(PayoffVector {
            recipients: pair.to_vec(),
        }),
        ResolutionKind::Repeat | ResolutionKind::Continue { .. } => None,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use Action::{Paper as P, Rock as R};

    fn actions(list: &[Action]) -> BTreeMap<PlayerId, Action> {
        list.iter().enumerate().map(|(i, a)| (PlayerId(i), *a)).collect()
    }

    fn ids(v: &[usize]) -> Vec<PlayerId> {
        v.iter().copied().map(PlayerId).collect()
    }

    #[test]
    fn all_rock_repeats() {
        let s = GameState::full(3).unwrap();
        let r = resolve_round(&s, &actions(&[R, R, R])).unwrap();
        assert_eq!(r.kind, ResolutionKind::Repeat);
        assert!(r.eliminated.is_empty());
    }

    #[test]
    fn sole_paper_and_sole_rock_win() {
        let s = GameState::full(3).unwrap();
        let r = resolve_round(&s, &actions(&[P, R, R])).unwrap();
        assert_eq!(r.kind, ResolutionKind::Winner { player: PlayerId(0) });
        let r = resolve_round(&s, &actions(&[P, P, R])).unwrap();
        assert_eq!(r.kind, ResolutionKind::Winner { player: PlayerId(2) });
    }

    #[test]
    fn two_rocks_left_split() {
        let s = GameState::full(5).unwrap();
        let r = resolve_round(&s, &actions(&[P, P, P, R, R])).unwrap();
        assert_eq!(
            r.kind,
            ResolutionKind::SplitTwo {
                pair: [PlayerId(3), PlayerId(4)]
            }
        );
        assert_eq!(r.eliminated, ids(&[0, 1, 2]));
        let pay = terminal_payoffs(&r, &s).unwrap();
        assert_eq!(pay.to_dense(5), vec![0.0, 0.0, 0.0, 0.5, 0.5]);
    }

    #[test]
    fn paper_players_eliminated() {
        let s = GameState::full(6).unwrap();
        let r = resolve_round(&s, &actions(&[P, P, R, R, R, R])).unwrap();
        match &r.kind {
            ResolutionKind::Continue { survivors } => {
                assert_eq!(survivors.survivors(), ids(&[2, 3, 4, 5]).as_slice())
            }
            other => panic!("unexpected {other:?}"),
        }
        assert_eq!(r.eliminated, ids(&[0, 1]));
        assert!(terminal_payoffs(&r, &s).is_none());
    }

    #[test]
    fn winner_payoff_is_indicator() {
        let s = GameState::full(4).unwrap();
        let r = resolve_round(&s, &actions(&[R, R, P, R])).unwrap();
        let pay = terminal_payoffs(&r, &s).unwrap();
        assert_eq!(pay.to_dense(4), vec![0.0, 0.0, 1.0, 0.0]);
    }

    #[test]
    fn malformed_inputs_rejected() {
        let s = GameState::full(4).unwrap();
        assert!(matches!(
            resolve_round(&s, &actions(&[R, R, P])),
            Err(Error::Contract(_))
        ));
        let mut extra = actions(&[R, R, P, R]);
        extra.insert(PlayerId(9), P);
        assert!(resolve_round(&s, &extra).is_err());

        let two = GameState::full(2).unwrap();
        assert!(resolve_round(&two, &actions(&[R, P])).is_err());
    }

    #[test]
    fn state_is_canonical() {
        let a = GameState::new(ids(&[3, 0, 2])).unwrap();
        assert_eq!(a.key(), "0,2,3");
        assert_eq!(GameState::from_key("0,2,3").unwrap(), a);
        assert_eq!(a.mask(), Some(0b1101));
        assert_eq!(GameState::from_mask(0b1101).unwrap(), a);
        assert!(GameState::new(ids(&[1, 1])).is_err());
        assert!(GameState::new(Vec::new()).is_err());
        let json = serde_json::to_string(&a).unwrap();
        assert_eq!(json, "[0,2,3]");
        assert!(serde_json::from_str::<GameState>("[]").is_err());
    }

    #[test]
    fn resolution_json_shape() {
        let s = GameState::full(6).unwrap();
        let r = resolve_round(&s, &actions(&[P, P, R, R, R, R])).unwrap();
        let json = serde_json::to_string(&r).unwrap();
        assert_eq!(
            json,
            r#"{"kind":"continue","survivors":[2,3,4,5],"eliminated":[0,1]}"#
        );
        let back: RoundResolution = serde_json::from_str(&json).unwrap();
        assert_eq!(back, r);
    }

    #[test]
    fn three_players_never_continue() {
        let s = GameState::full(3).unwrap();
        for bits in 0u32..8 {
            let acts: Vec<_> = (0..3).map(|i| if bits >> i & 1 == 1 { P } else { R }).collect();
            let r = resolve_round(&s, &actions(&acts)).unwrap();
            assert!(matches!(
                r.kind,
                ResolutionKind::Repeat | ResolutionKind::Winner { .. }
            ));
        }
    }
}

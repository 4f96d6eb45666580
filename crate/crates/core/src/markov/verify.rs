use serde::{Deserialize, Serialize};

use super::values::values_by_mask;
use super::{check_capacity, members, rank_in, state_masks, to_global, MarkovProfile, ProbTable};
use crate::error::Result;
use crate::game::{classify, GameState, PlayerId, RoundCase};

pub const DEFAULT_EPSILON: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DeviationEntry {
    pub state: GameState,
    pub player: PlayerId,
    /// The profile's paper probability for this player here.
    pub prob: f64,
    /// Value of showing paper this round, then following the profile.
    pub value_paper: f64,
    /// Value of showing rock this round, then following the profile.
    pub value_rock: f64,
    pub profile_value: f64,
    pub gain: f64,
    pub flagged: bool,
}

/// One-shot deviation gains for every survivor of every state.
///
/// An unflagged report certifies that no player can profit by changing their
/// action in a single state while play afterwards follows the profile.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DeviationReport {
    pub universe: usize,
    pub epsilon: f64,
    pub entries: Vec<DeviationEntry>,
}

impl DeviationReport {
    pub fn flagged(&self) -> impl Iterator<Item = &DeviationEntry> {
        self.entries.iter().filter(|e| e.flagged)
    }

    pub fn is_equilibrium(&self) -> bool {
        self.flagged().next().is_none()
    }

    pub fn max_gain(&self) -> f64 {
        self.entries
            .iter()
            .map(|e| e.gain)
            .fold(f64::NEG_INFINITY, f64::max)
    }
}

/// What survivor `k` (local position) receives after the round with local
/// paper set `papers`, using continuation values for repeat and continue.
fn continuation(
    k: usize,
    mask: u32,
    ids: &[usize],
    papers: u32,
    by_mask: &[Vec<f64>],
) -> f64 {
    let n = ids.len();
    let rocks = ((1u32 << n) - 1) & !papers;
    let is_rock = rocks >> k & 1 == 1;
    match classify(n, papers.count_ones() as usize) {
        RoundCase::Repeat => by_mask[mask as usize][k],
        RoundCase::SolePaper => f64::from(u8::from(!is_rock)),
        RoundCase::SoleRock => f64::from(u8::from(is_rock)),
        RoundCase::SplitTwo if is_rock => 0.5,
        RoundCase::Continue if is_rock => {
            let next = to_global(ids, rocks);
            by_mask[next as usize][rank_in(next, ids[k])]
        }
        RoundCase::SplitTwo | RoundCase::Continue => 0.0,
    }
}

pub fn verify_one_shot(profile: &MarkovProfile, epsilon: f64) -> Result<DeviationReport> {
    let universe = profile.universe();
    check_capacity(universe)?;
    let table = ProbTable::build(profile)?;
    let by_mask = values_by_mask(universe, &table)?;

    let mut entries = Vec::new();
    for mask in state_masks(universe) {
        let ids = members(mask);
        let n = ids.len();
        let probs = table.get(mask);
        let state = GameState::from_mask(mask as u64)?;
        for k in 0..n {
            let me = 1u32 << k;
            let (mut value_paper, mut value_rock) = (0.0, 0.0);
            for others in (0u32..1 << n).filter(|s| s & me == 0) {
                let w: f64 = (0..n)
                    .filter(|j| *j != k)
                    .map(|j| if others >> j & 1 == 1 { probs[j] } else { 1.0 - probs[j] })
                    .product();
                if w == 0.0 {
                    continue;
                }
                value_paper += w * continuation(k, mask, &ids, others | me, &by_mask);
                value_rock += w * continuation(k, mask, &ids, others, &by_mask);
            }
            let profile_value = by_mask[mask as usize][k];
            let gain = value_paper.max(value_rock) - profile_value;
            entries.push(DeviationEntry {
                state: state.clone(),
                player: PlayerId(ids[k]),
                prob: probs[k],
                value_paper,
                value_rock,
                profile_value,
                gain,
                flagged: gain > epsilon,
            });
        }
    }
    Ok(DeviationReport {
        universe,
        epsilon,
        entries,
    })
}

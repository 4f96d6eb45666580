//! Markov strategy profiles and the exact machinery around them: continuation
//! values, one-shot deviation checks, the indifference residual system for
//! totally mixed profiles, and a numerical search over that system.

mod profile;
mod residual;
mod search;
mod values;
mod verify;

pub use profile::{MarkovProfile, Representation, RoleRule, Selection};
pub use residual::{residual_system, ResidualEntry, ResidualReport};
pub use search::{
    newton_solve, search_totally_mixed, NewtonOutcome, SearchOptions, SearchReport, SearchSolution,
    StartFailure,
};
pub use values::{compute_values, ValueTable};
pub use verify::{verify_one_shot, DeviationEntry, DeviationReport, DEFAULT_EPSILON};

use crate::error::{Error, Result};
use crate::game::{GameState, MIN_PLAYERS};

/// Largest universe for which every state is enumerated.
pub const MAX_EXACT_UNIVERSE: usize = 12;
/// Largest state for which all action profiles are enumerated.
pub const MAX_ENUMERATED_STATE: usize = 20;

pub(crate) fn check_capacity(universe: usize) -> Result<()> {
    if universe > MAX_EXACT_UNIVERSE {
        return Err(Error::Capacity {
            what: "universe",
            got: universe,
            limit: MAX_EXACT_UNIVERSE,
        });
    }
    Ok(())
}

/// Non-terminal state masks over `0..universe`, ascending by size and then by mask.
pub(crate) fn state_masks(universe: usize) -> Vec<u32> {
    let mut masks: Vec<u32> = (0u32..1 << universe)
        .filter(|m| m.count_ones() as usize >= MIN_PLAYERS)
        .collect();
    masks.sort_by_key(|m| (m.count_ones(), *m));
    masks
}

/// Every state of `0..universe` with at least three survivors.
pub fn all_states(universe: usize) -> Result<Vec<GameState>> {
    check_capacity(universe)?;
    state_masks(universe)
        .into_iter()
        .map(|m| GameState::from_mask(m as u64))
        .collect()
}

/// Global player indices in `mask`, ascending.
pub(crate) fn members(mask: u32) -> Vec<usize> {
    (0..32).filter(|b| mask >> b & 1 == 1).collect()
}

/// Position of `player` among the members of `mask`.
pub(crate) fn rank_in(mask: u32, player: usize) -> usize {
    (mask & ((1u32 << player) - 1)).count_ones() as usize
}

/// Per-state paper probabilities indexed by state mask.
pub(crate) struct ProbTable {
    probs: Vec<Vec<f64>>,
}

impl ProbTable {
    pub fn build(profile: &MarkovProfile) -> Result<Self> {
        let universe = profile.universe();
        check_capacity(universe)?;
        let mut probs = vec![Vec::new(); 1 << universe];
        for mask in state_masks(universe) {
            probs[mask as usize] = profile.probs(&GameState::from_mask(mask as u64)?)?;
        }
        Ok(Self { probs })
    }

    pub fn get(&self, mask: u32) -> &[f64] {
        &self.probs[mask as usize]
    }
}

/// Probability that the local paper set is exactly `papers` (bit k = k-th member).
pub(crate) fn profile_weight(probs: &[f64], papers: u32) -> f64 {
    probs
        .iter()
        .enumerate()
        .map(|(k, p)| if papers >> k & 1 == 1 { *p } else { 1.0 - p })
        .product()
}

/// Expand a local subset (bits over member positions) into a global mask.
pub(crate) fn to_global(members: &[usize], local: u32) -> u32 {
    members
        .iter()
        .enumerate()
        .filter(|(k, _)| local >> k & 1 == 1)
        .fold(0, |m, (_, p)| m | 1 << p)
}

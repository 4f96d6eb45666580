use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::{
    check_capacity, members, profile_weight, rank_in, state_masks, to_global, MarkovProfile,
    ProbTable, MAX_ENUMERATED_STATE,
};
use crate::error::{Error, Result};
use crate::game::{classify, GameState, PlayerId, RoundCase};

/// Winning probability of every survivor in every state, two-player states included.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ValueTable {
    universe: usize,
    #[serde(with = "keyed_states")]
    values: BTreeMap<GameState, Vec<f64>>,
}

impl ValueTable {
    pub fn universe(&self) -> usize {
        self.universe
    }

    /// Values of the survivors of `state`, ascending by player.
    pub fn state_values(&self, state: &GameState) -> Option<&[f64]> {
        self.values.get(state).map(Vec::as_slice)
    }

    pub fn rho(&self, state: &GameState, player: PlayerId) -> Option<f64> {
        let pos = state.position(player)?;
        self.values.get(state).map(|v| v[pos])
    }

    pub fn iter(&self) -> impl Iterator<Item = (&GameState, &[f64])> {
        self.values.iter().map(|(s, v)| (s, v.as_slice()))
    }

    /// Largest deviation of a state's total value from one.
    pub fn max_sum_error(&self) -> f64 {
        self.values
            .values()
            .map(|v| (v.iter().sum::<f64>() - 1.0).abs())
            .fold(0.0, f64::max)
    }
}

/// Values indexed by state mask; two-player masks hold `[0.5, 0.5]`.
pub(crate) fn values_by_mask(universe: usize, table: &ProbTable) -> Result<Vec<Vec<f64>>> {
    let mut by_mask = vec![Vec::new(); 1 << universe];
    for mask in (0u32..1 << universe).filter(|m| m.count_ones() == 2) {
        by_mask[mask as usize] = vec![0.5, 0.5];
    }
    for mask in state_masks(universe) {
        let rho = state_values(mask, table.get(mask), &by_mask)?;
        by_mask[mask as usize] = rho;
    }
    Ok(by_mask)
}

/// Values at state `mask` given values of every smaller state.
///
/// Each player's value is the probability of winning from this round on,
/// conditioned on the round not repeating; if the round repeats surely, the
/// infinite history pays everyone `1/n`.
fn state_values(mask: u32, probs: &[f64], by_mask: &[Vec<f64>]) -> Result<Vec<f64>> {
    let ids = members(mask);
    let n = ids.len();
    if n > MAX_ENUMERATED_STATE {
        return Err(Error::Capacity {
            what: "state size",
            got: n,
            limit: MAX_ENUMERATED_STATE,
        });
    }
    let all = (1u32 << n) - 1;
    let mut direct = vec![0.0; n];
    let mut progress = 0.0;
    for papers in 0..=all {
        let w = profile_weight(probs, papers);
        if w == 0.0 {
            continue;
        }
        let rocks = all & !papers;
        match classify(n, papers.count_ones() as usize) {
            RoundCase::Repeat => continue,
            RoundCase::SolePaper => direct[papers.trailing_zeros() as usize] += w,
            RoundCase::SoleRock => direct[rocks.trailing_zeros() as usize] += w,
            RoundCase::SplitTwo => {
                for k in (0..n).filter(|k| rocks >> k & 1 == 1) {
                    direct[k] += 0.5 * w;
                }
            }
            RoundCase::Continue => {
                let next = to_global(&ids, rocks);
                let next_values = &by_mask[next as usize];
                for k in (0..n).filter(|k| rocks >> k & 1 == 1) {
                    direct[k] += w * next_values[rank_in(next, ids[k])];
                }
            }
        }
        progress += w;
    }
    if progress == 0.0 {
        return Ok(vec![1.0 / n as f64; n]);
    }
    Ok(direct.into_iter().map(|d| d / progress).collect())
}

/// Exact winning probabilities for every state reachable under `profile`.
pub fn compute_values(profile: &MarkovProfile) -> Result<ValueTable> {
    let universe = profile.universe();
    check_capacity(universe)?;
    let table = ProbTable::build(profile)?;
    let by_mask = values_by_mask(universe, &table)?;
    let mut values = BTreeMap::new();
    for (mask, v) in by_mask.into_iter().enumerate() {
        if !v.is_empty() {
            values.insert(GameState::from_mask(mask as u64)?, v);
        }
    }
    Ok(ValueTable { universe, values })
}

mod keyed_states {
    use std::collections::BTreeMap;

    use serde::de::Error as _;
    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    use crate::game::GameState;

    pub fn serialize<S: Serializer>(
        map: &BTreeMap<GameState, Vec<f64>>,
        s: S,
    ) -> Result<S::Ok, S::Error> {
        map.iter()
            .map(|(k, v)| (k.key(), v))
            .collect::<BTreeMap<_, _>>()
            .serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(
        d: D,
    ) -> Result<BTreeMap<GameState, Vec<f64>>, D::Error> {
        BTreeMap::<String, Vec<f64>>::deserialize(d)?
            .into_iter()
            .map(|(k, v)| Ok((GameState::from_key(&k).map_err(D::Error::custom)?, v)))
            .collect()
    }
}

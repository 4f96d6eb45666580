//! Indifference residuals for totally mixed profiles.
//!
//! For survivor `i` of state `N`, write `A = prod_{j != i} (1 - pi_jN)` (all
//! others rock) and `B = prod_{j != i} pi_jN` (all others paper). Showing paper
//! wins with `A + rho * B`, showing rock wins with `B + rho * A + lambda`, where
//! `lambda` collects the rounds that leave `i` among a smaller rock group `S`:
//!
//! ```text
//! lambda = sum_{S : i in S, 2 <= |S| <= |N|-2}
//!              rho_iS * prod_{j in S, j != i} (1 - pi_jN) * prod_{j in N \ S} pi_jN
//! ```
//!
//! Indifference means both equal `rho`, which gives
//!
//! ```text
//! lhs = A / (1 - B)          rhs = (B + lambda) / (1 - A)
//! ```
//!
//! and the profile is an equilibrium exactly when `lhs = rhs` everywhere. The
//! `rho_iS` inside `lambda` is the same paper-indifference closed form (`lhs`)
//! evaluated at the smaller state `S` with its own probabilities, or `1/2`
//! when `|S| = 2`.

use serde::{Deserialize, Serialize};

use super::{check_capacity, members, rank_in, state_masks, MarkovProfile, ProbTable};
use crate::error::{Error, Result};
use crate::game::{GameState, PlayerId};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResidualEntry {
    pub state: GameState,
    pub player: PlayerId,
    pub lhs: f64,
    pub rhs: f64,
    pub residual: f64,
    /// Continuation mass through smaller states; depends on the player, not only the state.
    pub lambda: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResidualReport {
    pub universe: usize,
    pub entries: Vec<ResidualEntry>,
}

impl ResidualReport {
    pub fn max_abs(&self) -> f64 {
        self.entries
            .iter()
            .map(|e| e.residual.abs())
            .fold(0.0, f64::max)
    }

    pub fn norm(&self) -> f64 {
        self.entries
            .iter()
            .map(|e| e.residual * e.residual)
            .sum::<f64>()
            .sqrt()
    }
}

/// Coordinate layout shared by the residual vector and the probability vector:
/// states ascending by size then mask, survivors ascending within a state.
pub(crate) struct Layout {
    pub universe: usize,
    pub masks: Vec<u32>,
    /// Offset of each state's block, indexed by mask; `usize::MAX` for non-states.
    offsets: Vec<usize>,
    /// For each entry of `masks`, the indices (into `masks`) of its supersets, itself included.
    supersets: Vec<Vec<usize>>,
    pub dim: usize,
}

impl Layout {
    pub fn new(universe: usize) -> Result<Self> {
        check_capacity(universe)?;
        let masks = state_masks(universe);
        let mut offsets = vec![usize::MAX; 1 << universe];
        let mut dim = 0;
        for m in &masks {
            offsets[*m as usize] = dim;
            dim += m.count_ones() as usize;
        }
        let supersets = masks
            .iter()
            .map(|m| {
                masks
                    .iter()
                    .enumerate()
                    .filter(|(_, n)| *n & m == *m)
                    .map(|(k, _)| k)
                    .collect()
            })
            .collect();
        Ok(Self {
            universe,
            masks,
            offsets,
            supersets,
            dim,
        })
    }

    pub fn offset(&self, mask: u32) -> usize {
        self.offsets[mask as usize]
    }

    pub fn block<'a>(&self, mask: u32, x: &'a [f64]) -> &'a [f64] {
        let o = self.offset(mask);
        &x[o..o + mask.count_ones() as usize]
    }

    /// (state index, position) for every coordinate.
    pub fn coordinates(&self) -> Vec<(usize, usize)> {
        self.masks
            .iter()
            .enumerate()
            .flat_map(|(s, m)| (0..m.count_ones() as usize).map(move |k| (s, k)))
            .collect()
    }

    pub fn supersets_of(&self, state_index: usize) -> &[usize] {
        &self.supersets[state_index]
    }

    pub fn from_profile(&self, profile: &MarkovProfile) -> Result<Vec<f64>> {
        let table = ProbTable::build(profile)?;
        Ok(self.masks.iter().flat_map(|m| table.get(*m).to_vec()).collect())
    }

    pub fn to_profile(&self, x: &[f64]) -> Result<MarkovProfile> {
        let probs = self
            .masks
            .iter()
            .map(|m| Ok((GameState::from_mask(*m as u64)?, self.block(*m, x).to_vec())))
            .collect::<Result<_>>()?;
        MarkovProfile::explicit(self.universe, probs)
    }
}

fn products_excluding(probs: &[f64], k: usize) -> (f64, f64) {
    probs
        .iter()
        .enumerate()
        .filter(|(j, _)| *j != k)
        .fold((1.0, 1.0), |(rock, paper), (_, p)| (rock * (1.0 - p), paper * p))
}

/// Paper-indifference values `A / (1 - B)` for every survivor of `mask`, written into `out`.
pub(crate) fn lhs_block(layout: &Layout, mask: u32, x: &[f64], out: &mut [f64]) {
    let probs = layout.block(mask, x);
    let o = layout.offset(mask);
    for k in 0..probs.len() {
        let (all_rock, all_paper) = products_excluding(probs, k);
        out[o + k] = all_rock / (1.0 - all_paper);
    }
}

pub(crate) fn all_lhs(layout: &Layout, x: &[f64]) -> Vec<f64> {
    let mut out = vec![0.0; layout.dim];
    for m in &layout.masks {
        lhs_block(layout, *m, x, &mut out);
    }
    out
}

/// `(rhs, lambda)` for survivor `k` of `mask`, reading smaller-state values from `lhs`.
pub(crate) fn rhs_entry(layout: &Layout, mask: u32, k: usize, x: &[f64], lhs: &[f64]) -> (f64, f64) {
    let probs = layout.block(mask, x);
    let ids = members(mask);
    let n = ids.len();
    let me = 1u32 << k;
    let (all_rock, all_paper) = products_excluding(probs, k);

    let mut lambda = 0.0;
    // local rock groups containing k with 2 <= |S| <= n - 2
    for rocks in (0u32..1 << n).filter(|s| s & me != 0) {
        let size = rocks.count_ones() as usize;
        if size < 2 || size + 2 > n {
            continue;
        }
        let w: f64 = (0..n)
            .filter(|j| *j != k)
            .map(|j| if rocks >> j & 1 == 1 { 1.0 - probs[j] } else { probs[j] })
            .product();
        let rho = if size == 2 {
            0.5
        } else {
            let global = super::to_global(&ids, rocks);
            lhs[layout.offset(global) + rank_in(global, ids[k])]
        };
        lambda += rho * w;
    }
    ((all_paper + lambda) / (1.0 - all_rock), lambda)
}

/// Residual vector `lhs - rhs` in layout order.
pub(crate) fn residual_vector(layout: &Layout, x: &[f64]) -> Vec<f64> {
    let lhs = all_lhs(layout, x);
    let mut out = vec![0.0; layout.dim];
    for m in &layout.masks {
        let o = layout.offset(*m);
        for k in 0..m.count_ones() as usize {
            out[o + k] = lhs[o + k] - rhs_entry(layout, *m, k, x, &lhs).0;
        }
    }
    out
}

/// Evaluate the indifference system at a totally mixed profile.
pub fn residual_system(profile: &MarkovProfile) -> Result<ResidualReport> {
    let layout = Layout::new(profile.universe())?;
    let x = layout.from_profile(profile)?;
    for m in &layout.masks {
        for (k, p) in layout.block(*m, &x).iter().enumerate() {
            if !(*p > 0.0 && *p < 1.0) {
                return Err(Error::NotTotallyMixed {
                    state: GameState::from_mask(*m as u64)?.key(),
                    player: members(*m)[k],
                    prob: *p,
                });
            }
        }
    }
    let lhs = all_lhs(&layout, &x);
    let mut entries = Vec::with_capacity(layout.dim);
    for m in &layout.masks {
        let state = GameState::from_mask(*m as u64)?;
        let o = layout.offset(*m);
        for (k, id) in members(*m).into_iter().enumerate() {
            let (rhs, lambda) = rhs_entry(&layout, *m, k, &x, &lhs);
            entries.push(ResidualEntry {
                state: state.clone(),
                player: PlayerId(id),
                lhs: lhs[o + k],
                rhs,
                residual: lhs[o + k] - rhs,
                lambda,
            });
        }
    }
    Ok(ResidualReport {
        universe: profile.universe(),
        entries,
    })
}

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::equilibrium::solve_phi;
use crate::error::{Error, Result};
use crate::game::{GameState, PlayerId, MIN_PLAYERS};

/// Order in which survivors are handed the designated roles of a role-based profile.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum Selection {
    #[default]
    LowestIndex,
    HighestIndex,
    /// Listed players first, in list order; everyone else afterwards by ascending index.
    Priority(Vec<PlayerId>),
}

impl Selection {
    /// Survivors of `state` ranked by this rule.
    pub fn order(&self, state: &GameState) -> Vec<PlayerId> {
        match self {
            Selection::LowestIndex => state.survivors().to_vec(),
            Selection::HighestIndex => state.survivors().iter().rev().copied().collect(),
            Selection::Priority(list) => {
                let mut out: Vec<PlayerId> =
                    list.iter().copied().filter(|p| state.contains(*p)).collect();
                out.dedup();
                out.extend(state.iter().filter(|p| !list.contains(p)));
                out
            }
        }
    }
}

/// The asymmetric families in which designated players show paper for sure.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "rule", rename_all = "snake_case")]
pub enum RoleRule {
    /// One player always shows paper, the rest always rock.
    OnePaper,
    /// Two players always show paper, the rest always rock.
    TwoPaper,
    /// One player always shows paper, a second shows paper with probability
    /// `q[|N|]`, the rest always rock.
    Combo { q: BTreeMap<usize, f64> },
}

#[derive(Debug, Clone, PartialEq)]
pub enum Representation {
    /// Every survivor of an `n`-player state shows paper with `probs[n]`.
    SizeSymmetric { probs: BTreeMap<usize, f64> },
    RoleBased { rule: RoleRule, selection: Selection },
    /// Per-state probabilities aligned with the state's ascending survivors.
    Explicit { probs: BTreeMap<GameState, Vec<f64>> },
}

/// A Markov strategy profile: each survivor's paper probability as a function
/// of the current state only.
#[derive(Debug, Clone, PartialEq)]
pub struct MarkovProfile {
    universe: usize,
    repr: Representation,
}

fn check_universe(universe: usize) -> Result<()> {
    if universe < MIN_PLAYERS {
        return Err(Error::Domain(format!(
            "a game needs at least {MIN_PLAYERS} players, got {universe}"
        )));
    }
    Ok(())
}

fn check_prob(p: f64, what: &str) -> Result<()> {
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::Domain(format!("{what} = {p} outside [0, 1]")));
    }
    Ok(())
}

fn check_sizes(universe: usize, map: &BTreeMap<usize, f64>, what: &str) -> Result<()> {
    for n in MIN_PLAYERS..=universe {
        match map.get(&n) {
            Some(p) => check_prob(*p, &format!("{what}[{n}]"))?,
            None => {
                return Err(Error::InvalidProfile(format!(
                    "{what} has no entry for state size {n}"
                )))
            }
        }
    }
    if let Some(bad) = map.keys().find(|n| **n < MIN_PLAYERS || **n > universe) {
        return Err(Error::InvalidProfile(format!(
            "{what} has entry for size {bad} outside {MIN_PLAYERS}..={universe}"
        )));
    }
    Ok(())
}

impl MarkovProfile {
    /// Everyone plays `phi_n` in every `n`-player state.
    pub fn symmetric_spe(universe: usize) -> Result<Self> {
        check_universe(universe)?;
        let probs = (MIN_PLAYERS..=universe)
            .map(|n| solve_phi(n).map(|s| (n, s.phi)))
            .collect::<Result<_>>()?;
        Ok(Self {
            universe,
            repr: Representation::SizeSymmetric { probs },
        })
    }

    pub fn size_symmetric(universe: usize, probs: BTreeMap<usize, f64>) -> Result<Self> {
        check_universe(universe)?;
        check_sizes(universe, &probs, "probs")?;
        Ok(Self {
            universe,
            repr: Representation::SizeSymmetric { probs },
        })
    }

    /// Same paper probability everywhere; `0.0` is the all-rock profile.
    pub fn constant(universe: usize, p: f64) -> Result<Self> {
        check_universe(universe)?;
        check_prob(p, "p")?;
        Self::size_symmetric(universe, (MIN_PLAYERS..=universe).map(|n| (n, p)).collect())
    }

    pub fn one_paper(universe: usize, selection: Selection) -> Result<Self> {
        Self::role_based(universe, RoleRule::OnePaper, selection)
    }

    pub fn two_paper(universe: usize, selection: Selection) -> Result<Self> {
        Self::role_based(universe, RoleRule::TwoPaper, selection)
    }

    pub fn combo(universe: usize, q: BTreeMap<usize, f64>, selection: Selection) -> Result<Self> {
        Self::role_based(universe, RoleRule::Combo { q }, selection)
    }

    /// Combo profile with the same `q` in every state size.
    pub fn combo_constant(universe: usize, q: f64, selection: Selection) -> Result<Self> {
        check_universe(universe)?;
        check_prob(q, "q")?;
        Self::combo(
            universe,
            (MIN_PLAYERS..=universe).map(|n| (n, q)).collect(),
            selection,
        )
    }

    pub fn role_based(universe: usize, rule: RoleRule, selection: Selection) -> Result<Self> {
        check_universe(universe)?;
        if let RoleRule::Combo { q } = &rule {
            check_sizes(universe, q, "q")?;
        }
        if let Selection::Priority(list) = &selection {
            if let Some(p) = list.iter().find(|p| p.0 >= universe) {
                return Err(Error::InvalidProfile(format!(
                    "priority names player {p} outside universe {universe}"
                )));
            }
        }
        Ok(Self {
            universe,
            repr: Representation::RoleBased { rule, selection },
        })
    }

    /// Per-state probabilities. Every state must use players in `0..universe`
    /// and carry one probability per survivor; states with fewer than three
    /// survivors are rejected. Coverage of every state is checked lazily, when
    /// a computation reaches a state.
    pub fn explicit(universe: usize, probs: BTreeMap<GameState, Vec<f64>>) -> Result<Self> {
        check_universe(universe)?;
        for (state, ps) in &probs {
            if state.len() < MIN_PLAYERS {
                return Err(Error::InvalidProfile(format!("state {state} is terminal")));
            }
            if let Some(p) = state.iter().find(|p| p.0 >= universe) {
                return Err(Error::InvalidProfile(format!(
                    "state {state} names player {p} outside universe {universe}"
                )));
            }
            if ps.len() != state.len() {
                return Err(Error::InvalidProfile(format!(
                    "state {state} has {} probabilities for {} survivors",
                    ps.len(),
                    state.len()
                )));
            }
            for p in ps {
                check_prob(*p, &format!("probs[{state}]"))?;
            }
        }
        Ok(Self {
            universe,
            repr: Representation::Explicit { probs },
        })
    }

    pub fn universe(&self) -> usize {
        self.universe
    }

    pub fn representation(&self) -> &Representation {
        &self.repr
    }

    /// Paper probabilities of the survivors of `state`, in ascending player order.
    pub fn probs(&self, state: &GameState) -> Result<Vec<f64>> {
        if state.len() < MIN_PLAYERS {
            return Err(Error::Contract(format!("state {state} is terminal")));
        }
        let undefined = || Error::ProfileUndefined {
            state: state.key(),
            player: state.survivors()[0].0,
        };
        if state.iter().any(|p| p.0 >= self.universe) {
            return Err(undefined());
        }
        match &self.repr {
            Representation::SizeSymmetric { probs } => {
                let p = *probs.get(&state.len()).ok_or_else(undefined)?;
                Ok(vec![p; state.len()])
            }
            Representation::RoleBased { rule, selection } => {
                let order = selection.order(state);
                let mut out = vec![0.0; state.len()];
                let mut assign = |rank: usize, p: f64| {
                    let pos = state.position(order[rank]).expect("ordered survivor");
                    out[pos] = p;
                };
                match rule {
                    RoleRule::OnePaper => assign(0, 1.0),
                    RoleRule::TwoPaper => {
                        assign(0, 1.0);
                        assign(1, 1.0);
                    }
                    RoleRule::Combo { q } => {
                        assign(0, 1.0);
                        assign(1, *q.get(&state.len()).ok_or_else(undefined)?);
                    }
                }
                Ok(out)
            }
            Representation::Explicit { probs } => probs.get(state).cloned().ok_or_else(undefined),
        }
    }

    pub fn prob(&self, state: &GameState, player: PlayerId) -> Result<f64> {
        let pos = state.position(player).ok_or_else(|| {
            Error::Contract(format!("player {player} is not a survivor of {state}"))
        })?;
        Ok(self.probs(state)?[pos])
    }

    /// Expand into per-state form over every state of `0..universe` with at
    /// least three survivors.
    pub fn to_explicit(&self) -> Result<MarkovProfile> {
        let probs = super::all_states(self.universe)?
            .into_iter()
            .map(|s| self.probs(&s).map(|p| (s, p)))
            .collect::<Result<_>>()?;
        Ok(MarkovProfile {
            universe: self.universe,
            repr: Representation::Explicit { probs },
        })
    }

    /// True when every probability the profile assigns lies in the open unit interval.
    pub fn is_totally_mixed(&self) -> Result<bool> {
        Ok(match &self.repr {
            Representation::SizeSymmetric { probs } => {
                probs.values().all(|p| *p > 0.0 && *p < 1.0)
            }
            Representation::RoleBased { .. } => false,
            Representation::Explicit { .. } => super::all_states(self.universe)?
                .iter()
                .map(|s| self.probs(s))
                .collect::<Result<Vec<_>>>()?
                .iter()
                .flatten()
                .all(|p| *p > 0.0 && *p < 1.0),
        })
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }
}

#[derive(Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
enum Kind {
    SizeSymmetric,
    RoleBased,
    Explicit,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ProfileDoc {
    universe: usize,
    kind: Kind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    probs: Option<BTreeMap<usize, f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    rule: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    q: Option<BTreeMap<usize, f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    selection: Option<Selection>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    states: Option<BTreeMap<String, Vec<f64>>>,
}

impl Serialize for MarkovProfile {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        let mut doc = ProfileDoc {
            universe: self.universe,
            kind: Kind::SizeSymmetric,
            probs: None,
            rule: None,
            q: None,
            selection: None,
            states: None,
        };
        match &self.repr {
            Representation::SizeSymmetric { probs } => doc.probs = Some(probs.clone()),
            Representation::RoleBased { rule, selection } => {
                doc.kind = Kind::RoleBased;
                doc.selection = Some(selection.clone());
                doc.rule = Some(
                    match rule {
                        RoleRule::OnePaper => "one_paper",
                        RoleRule::TwoPaper => "two_paper",
                        RoleRule::Combo { q } => {
                            doc.q = Some(q.clone());
                            "combo"
                        }
                    }
                    .to_string(),
                );
            }
            Representation::Explicit { probs } => {
                doc.kind = Kind::Explicit;
                doc.states = Some(probs.iter().map(|(s, p)| (s.key(), p.clone())).collect());
            }
        }
        doc.serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for MarkovProfile {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        use serde::de::Error as _;
        let doc = ProfileDoc::deserialize(deserializer)?;
        let missing = |field: &str| D::Error::custom(format!("missing field `{field}`"));
        let built = match doc.kind {
            Kind::SizeSymmetric => {
                MarkovProfile::size_symmetric(doc.universe, doc.probs.ok_or_else(|| missing("probs"))?)
            }
            Kind::RoleBased => {
                let selection = doc.selection.unwrap_or_default();
                let rule = match doc.rule.as_deref().ok_or_else(|| missing("rule"))? {
                    "one_paper" => RoleRule::OnePaper,
                    "two_paper" => RoleRule::TwoPaper,
                    "combo" => RoleRule::Combo {
                        q: doc.q.ok_or_else(|| missing("q"))?,
                    },
                    other => return Err(D::Error::custom(format!("unknown rule `{other}`"))),
                };
                MarkovProfile::role_based(doc.universe, rule, selection)
            }
            Kind::Explicit => {
                let states = doc.states.ok_or_else(|| missing("states"))?;
                let mut probs = BTreeMap::new();
                for (key, ps) in states {
                    probs.insert(GameState::from_key(&key).map_err(D::Error::custom)?, ps);
                }
                MarkovProfile::explicit(doc.universe, probs)
            }
        };
        built.map_err(D::Error::custom)
    }
}

//! Profile specs accepted on the command line: a named family or a JSON file.

use std::path::PathBuf;
use std::str::FromStr;

use shinohara_core::markov::{MarkovProfile, Selection};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq)]
pub enum ProfileSpec {
    Symmetric,
    OnePaper,
    TwoPaper,
    Combo(f64),
    /// Everyone shows paper with the same probability; `all-rock` is `Constant(0.0)`.
    Constant(f64),
    File(PathBuf),
}

#[derive(Debug, Error)]
pub enum SpecError {
    #[error("`{0}` needs --players")]
    MissingPlayers(String),
    #[error("profile file is for {file} players but --players is {flag}")]
    Mismatch { file: usize, flag: usize },
    #[error("cannot read profile file {path}: {source}")]
    Read {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("malformed profile file {path}: {source}")]
    Parse {
        path: PathBuf,
        source: shinohara_core::Error,
    },
    #[error(transparent)]
    Core(#[from] shinohara_core::Error),
}

fn parse_prob(s: &str) -> Result<f64, String> {
    s.parse::<f64>()
        .ok()
        .filter(|p| (0.0..=1.0).contains(p))
        .ok_or_else(|| format!("`{s}` is not a probability in [0, 1]"))
}

impl FromStr for ProfileSpec {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Ok(match s {
            "symmetric" => ProfileSpec::Symmetric,
            "one-paper" => ProfileSpec::OnePaper,
            "two-paper" => ProfileSpec::TwoPaper,
            "all-rock" => ProfileSpec::Constant(0.0),
            _ => {
                if let Some(q) = s.strip_prefix("combo:") {
                    ProfileSpec::Combo(parse_prob(q)?)
                } else if let Some(p) = s.strip_prefix("constant:") {
                    ProfileSpec::Constant(parse_prob(p)?)
                } else if s.ends_with(".json") || std::path::Path::new(s).is_file() {
                    ProfileSpec::File(PathBuf::from(s))
                } else {
                    return Err(format!(
                        "unknown profile `{s}`; expected symmetric, one-paper, two-paper, \
                         combo:<q>, constant:<p>, all-rock or a JSON file"
                    ));
                }
            }
        })
    }
}

impl ProfileSpec {
    /// Build the profile; named families take the universe from `players`.
    pub fn build(&self, players: Option<usize>, selection: Selection) -> Result<MarkovProfile, SpecError> {
        let need = |name: &str| players.ok_or_else(|| SpecError::MissingPlayers(name.to_string()));
        Ok(match self {
            ProfileSpec::Symmetric => MarkovProfile::symmetric_spe(need("symmetric")?)?,
            ProfileSpec::OnePaper => MarkovProfile::one_paper(need("one-paper")?, selection)?,
            ProfileSpec::TwoPaper => MarkovProfile::two_paper(need("two-paper")?, selection)?,
            ProfileSpec::Combo(q) => MarkovProfile::combo_constant(need("combo")?, *q, selection)?,
            ProfileSpec::Constant(p) => MarkovProfile::constant(need("constant")?, *p)?,
            ProfileSpec::File(path) => {
                let text = std::fs::read_to_string(path).map_err(|source| SpecError::Read {
                    path: path.clone(),
                    source,
                })?;
                let profile = MarkovProfile::from_json(&text).map_err(|source| SpecError::Parse {
                    path: path.clone(),
                    source,
                })?;
                if let Some(flag) = players {
                    if flag != profile.universe() {
                        return Err(SpecError::Mismatch {
                            file: profile.universe(),
                            flag,
                        });
                    }
                }
                profile
            }
        })
    }
}

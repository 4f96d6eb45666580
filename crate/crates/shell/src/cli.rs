use std::io::Write;
use std::path::PathBuf;

use clap::{Parser, Subcommand, ValueEnum};
use shinohara_core::equilibrium::{phi_table, solve_phi, write_phi_csv, PhiSolution};
use shinohara_core::markov::{search_totally_mixed, verify_one_shot, Selection, DEFAULT_EPSILON};
use shinohara_core::montecarlo::{run_trials, DEFAULT_MAX_ROUNDS};

use crate::profile_spec::ProfileSpec;

pub const EXIT_OK: u8 = 0;
pub const EXIT_FLAGGED: u8 = 1;
pub const EXIT_USAGE: u8 = 2;

#[derive(Debug, Parser)]
#[command(name = "shinohara", version, about = "Shinohara rock-paper-scissors toolkit")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, ValueEnum, PartialEq, Eq)]
pub enum Format {
    Text,
    Csv,
    Json,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Print the symmetric equilibrium paper probability.
    Phi {
        #[arg(long, value_parser = clap::value_parser!(u64).range(3..), conflicts_with = "range")]
        n: Option<u64>,
        /// Inclusive range `A:B`.
        #[arg(long, value_parser = parse_range)]
        range: Option<(usize, usize)>,
        #[arg(long, value_enum, default_value_t = Format::Text)]
        format: Format,
    },
    /// Simulate games and write aggregate statistics.
    Simulate {
        #[arg(long, value_parser = clap::value_parser!(u64).range(3..))]
        players: u64,
        /// symmetric, one-paper, two-paper, combo:<q>, constant:<p>, all-rock, or a JSON file.
        #[arg(long)]
        profile: ProfileSpec,
        #[arg(long, default_value_t = 10_000, value_parser = clap::value_parser!(u64).range(1..))]
        trials: u64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = DEFAULT_MAX_ROUNDS, value_parser = clap::value_parser!(u64).range(1..))]
        max_rounds: u64,
        #[arg(long)]
        out: Option<PathBuf>,
        /// json for the full statistics, csv for one row per player.
        #[arg(long, value_enum, default_value_t = Format::Json)]
        format: Format,
    },
    /// Check a profile for profitable one-shot deviations.
    Verify {
        #[arg(long)]
        profile: ProfileSpec,
        #[arg(long, alias = "universe", value_parser = clap::value_parser!(u64).range(3..))]
        players: Option<u64>,
        #[arg(long, default_value_t = DEFAULT_EPSILON)]
        epsilon: f64,
    },
    /// Search for totally mixed solutions of the indifference system.
    Search {
        #[arg(long, value_parser = clap::value_parser!(u64).range(3..=8))]
        universe: u64,
        #[arg(long, default_value_t = 20)]
        starts: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Run the HTTP play service.
    Serve {
        #[arg(long, env = "SHINOHARA_PORT", default_value_t = 8080)]
        port: u16,
    },
}

fn parse_range(s: &str) -> Result<(usize, usize), String> {
    let (a, b) = s.split_once(':').ok_or("expected A:B")?;
    let a: usize = a.trim().parse().map_err(|_| format!("bad start `{a}`"))?;
    let b: usize = b.trim().parse().map_err(|_| format!("bad end `{b}`"))?;
    if a < 3 || b < a {
        return Err(format!("need 3 <= A <= B, got {a}:{b}"));
    }
    Ok((a, b))
}

/// Table layout: rows of ten `n` columns with `phi` to three decimals beneath.
pub fn render_table(rows: &[PhiSolution]) -> String {
    let mut out = String::new();
    for chunk in rows.chunks(10) {
        out.push_str("n  ");
        for r in chunk {
            out.push_str(&format!(" {:>6}", r.n));
        }
        out.push_str("\nphi");
        for r in chunk {
            out.push_str(&format!(" {:>6.3}", r.phi));
        }
        out.push('\n');
    }
    out
}

fn fail(err: &mut dyn Write, msg: impl std::fmt::Display) -> u8 {
    let _ = writeln!(err, "error: {msg}");
    EXIT_USAGE
}

/// Run every subcommand except `serve`; returns the process exit code.
pub fn run(command: &Command, out: &mut dyn Write, err: &mut dyn Write) -> u8 {
    match execute(command, out, err) {
        Ok(code) => code,
        Err(e) => fail(err, e),
    }
}

fn execute(command: &Command, out: &mut dyn Write, err: &mut dyn Write) -> Result<u8, String> {
    let io = |e: std::io::Error| e.to_string();
    match command {
        Command::Phi { n, range, format } => {
            let rows = match (n, range) {
                (Some(n), None) => vec![solve_phi(*n as usize).map_err(|e| e.to_string())?],
                (None, Some((a, b))) => phi_table(*a, *b).map_err(|e| e.to_string())?,
                _ => return Ok(fail(err, "give exactly one of --n or --range")),
            };
            match format {
                Format::Csv => write_phi_csv(&rows, &mut *out).map_err(|e| e.to_string())?,
                Format::Json => {
                    writeln!(out, "{}", serde_json::to_string_pretty(&rows).unwrap()).map_err(io)?
                }
                Format::Text if rows.len() == 1 => writeln!(out, "{:.3}", rows[0].phi).map_err(io)?,
                Format::Text => write!(out, "{}", render_table(&rows)).map_err(io)?,
            }
            Ok(EXIT_OK)
        }
        Command::Simulate {
            players,
            profile,
            trials,
            seed,
            max_rounds,
            out: path,
            format,
        } => {
            let players = *players as usize;
            let profile = profile
                .build(Some(players), Selection::default())
                .map_err(|e| e.to_string())?;
            let stats = run_trials(&profile, players, *trials, *seed, *max_rounds)
                .map_err(|e| e.to_string())?;
            let mut body = Vec::new();
            match format {
                Format::Csv => stats.write_player_csv(&mut body).map_err(|e| e.to_string())?,
                _ => {
                    body = stats.to_json().map_err(|e| e.to_string())?.into_bytes();
                    body.push(b'\n');
                }
            }
            match path {
                Some(p) => std::fs::write(p, body).map_err(io)?,
                None => out.write_all(&body).map_err(io)?,
            }
            Ok(EXIT_OK)
        }
        Command::Verify {
            profile,
            players,
            epsilon,
        } => {
            let profile = profile
                .build(players.map(|p| p as usize), Selection::default())
                .map_err(|e| e.to_string())?;
            let report = verify_one_shot(&profile, *epsilon).map_err(|e| e.to_string())?;
            writeln!(out, "{}", serde_json::to_string_pretty(&report).unwrap()).map_err(io)?;
            Ok(if report.is_equilibrium() {
                EXIT_OK
            } else {
                EXIT_FLAGGED
            })
        }
        Command::Search {
            universe,
            starts,
            seed,
        } => {
            let report = search_totally_mixed(*universe as usize, *starts, *seed)
                .map_err(|e| e.to_string())?;
            writeln!(out, "{}", serde_json::to_string_pretty(&report).unwrap()).map_err(io)?;
            Ok(EXIT_OK)
        }
        Command::Serve { .. } => Err("serve is handled by the binary entry point".into()),
    }
}

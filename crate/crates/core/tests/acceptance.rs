//! Acceptance suite: one PASS/FAIL line per criterion, non-zero exit on any failure.

use std::collections::BTreeMap;
use std::process::ExitCode;
use std::time::{Duration, Instant};

use shinohara_core::equilibrium::solve_phi;
use shinohara_core::game::{resolve_round, Action, GameState, PlayerId, ResolutionKind};
use shinohara_core::markov::{
    compute_values, residual_system, search_totally_mixed, verify_one_shot, MarkovProfile,
    Selection,
};
use shinohara_core::montecarlo::{run_trials, DEFAULT_MAX_ROUNDS};

type Outcome = Result<String, String>;

/// Published three-decimal table of the equilibrium paper probability, n = 3..=50.
const PUBLISHED_PHI: [f64; 48] = [
    0.500, 0.382, 0.333, 0.302, 0.277, 0.257, 0.240, 0.226, // 3..10
    0.213, 0.202, 0.192, 0.184, 0.176, 0.169, 0.162, 0.156, 0.151, 0.146, // 11..20
    0.141, 0.137, 0.133, 0.129, 0.126, 0.122, 0.119, 0.116, 0.113, 0.111, // 21..30
    0.108, 0.106, 0.104, 0.101, 0.099, 0.097, 0.095, 0.094, 0.092, 0.090, // 31..40
    0.089, 0.087, 0.086, 0.084, 0.083, 0.083, 0.080, 0.079, 0.078, 0.077, // 41..50
];

fn ensure(cond: bool, msg: impl Into<String>) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg.into())
    }
}

fn within_budget(start: Instant, budget: Duration) -> Result<(), String> {
    let took = start.elapsed();
    ensure(took < budget, format!("took {took:?}, budget {budget:?}"))
}

fn table_regression() -> Outcome {
    let start = Instant::now();
    let mut worst: f64 = 0.0;
    for (k, published) in PUBLISHED_PHI.iter().enumerate() {
        let n = k + 3;
        let phi = solve_phi(n).map_err(|e| e.to_string())?.phi;
        if n == 46 {
            // the printed 0.083 for n = 46 disagrees with the root; check the root itself
            ensure(
                (phi - 0.0816).abs() <= 5e-4,
                format!("n=46: phi={phi:.6}, expected 0.0816 +- 0.0005"),
            )?;
            continue;
        }
        let err = (phi - published).abs();
        worst = worst.max(err);
        ensure(
            err <= 1.5e-3,
            format!("n={n}: phi={phi:.6} vs published {published:.3}"),
        )?;
    }
    within_budget(start, Duration::from_secs(1))?;
    Ok(format!(
        "47 entries within 0.0015 (worst {worst:.5}), phi_46 = {:.4}",
        solve_phi(46).unwrap().phi
    ))
}

fn closed_forms() -> Outcome {
    let expected = [(3, 0.5), (4, (3.0 - 5f64.sqrt()) / 2.0), (5, 1.0 / 3.0)];
    let mut worst: f64 = 0.0;
    for (n, value) in expected {
        let phi = solve_phi(n).map_err(|e| e.to_string())?.phi;
        let err = (phi - value).abs();
        worst = worst.max(err);
        ensure(err <= 1e-12, format!("n={n}: {phi} vs {value}"))?;
    }
    Ok(format!("max error {worst:.2e}"))
}

fn symmetric_indifference() -> Outcome {
    let start = Instant::now();
    let mut worst: f64 = 0.0;
    for universe in 3..=8 {
        let profile = MarkovProfile::symmetric_spe(universe).map_err(|e| e.to_string())?;
        let values = compute_values(&profile).map_err(|e| e.to_string())?;
        for (state, rho) in values.iter() {
            for v in rho {
                let err = (v - 1.0 / state.len() as f64).abs();
                worst = worst.max(err);
                ensure(err <= 1e-10, format!("|I|={universe} state {state}: rho={v}"))?;
            }
        }
        let report = verify_one_shot(&profile, 1e-9).map_err(|e| e.to_string())?;
        ensure(
            report.is_equilibrium(),
            format!("|I|={universe}: {} flagged deviations", report.flagged().count()),
        )?;
    }
    within_budget(start, Duration::from_secs(10))?;
    Ok(format!("|I|=3..8, max |rho - 1/|N|| = {worst:.2e}, no flags"))
}

fn asymmetric_families() -> Outcome {
    let mut checked = 0;
    for universe in 3..=8 {
        let sel = Selection::default();
        let mut profiles = vec![
            ("one-paper".to_string(), MarkovProfile::one_paper(universe, sel.clone())),
            ("two-paper".to_string(), MarkovProfile::two_paper(universe, sel.clone())),
        ];
        for q in [0.0, 0.25, 0.5, 0.75, 1.0] {
            profiles.push((
                format!("combo q={q}"),
                MarkovProfile::combo_constant(universe, q, sel.clone()),
            ));
        }
        for (name, profile) in profiles {
            let profile = profile.map_err(|e| e.to_string())?;
            let report = verify_one_shot(&profile, 1e-9).map_err(|e| e.to_string())?;
            ensure(
                report.is_equilibrium(),
                format!("|I|={universe} {name}: max gain {}", report.max_gain()),
            )?;
            checked += 1;
        }

        let all_rock = MarkovProfile::constant(universe, 0.0).map_err(|e| e.to_string())?;
        let report = verify_one_shot(&all_rock, 1e-9).map_err(|e| e.to_string())?;
        let expected = 1.0 - 1.0 / universe as f64;
        let full: Vec<_> = report
            .entries
            .iter()
            .filter(|e| e.state.len() == universe)
            .collect();
        ensure(!full.is_empty(), "no full-state entries")?;
        for e in full {
            ensure(
                e.flagged && (e.gain - expected).abs() <= 1e-10,
                format!("|I|={universe} all-rock player {}: gain {}", e.player, e.gain),
            )?;
        }
    }
    Ok(format!("{checked} profiles unflagged; all-rock flagged with gain 1 - 1/|I|"))
}

fn residual_system_check() -> Outcome {
    let mut min_perturbed = f64::INFINITY;
    let mut max_symmetric: f64 = 0.0;
    for universe in 3..=6 {
        let sym = MarkovProfile::symmetric_spe(universe).map_err(|e| e.to_string())?;
        let r = residual_system(&sym).map_err(|e| e.to_string())?;
        max_symmetric = max_symmetric.max(r.max_abs());
        ensure(r.max_abs() < 1e-9, format!("|I|={universe}: max residual {}", r.max_abs()))?;

        let explicit = sym.to_explicit().map_err(|e| e.to_string())?;
        let base: BTreeMap<GameState, Vec<f64>> = match explicit.representation() {
            shinohara_core::markov::Representation::Explicit { probs } => probs.clone(),
            _ => unreachable!(),
        };
        for (state, probs) in &base {
            for k in 0..probs.len() {
                let mut bumped = base.clone();
                bumped.get_mut(state).unwrap()[k] += 0.05;
                let p = MarkovProfile::explicit(universe, bumped).map_err(|e| e.to_string())?;
                let m = residual_system(&p).map_err(|e| e.to_string())?.max_abs();
                min_perturbed = min_perturbed.min(m);
                ensure(
                    m > 1e-4,
                    format!("|I|={universe} bump {state}[{k}]: max residual {m}"),
                )?;
            }
        }
    }
    Ok(format!(
        "symmetric max {max_symmetric:.2e}; smallest perturbed max {min_perturbed:.2e}"
    ))
}

fn three_player_uniqueness() -> Outcome {
    let start = Instant::now();
    let report = search_totally_mixed(3, 100, 7).map_err(|e| e.to_string())?;
    ensure(!report.solutions.is_empty(), "no start converged")?;
    for sol in &report.solutions {
        let full = GameState::full(3).unwrap();
        let probs = sol.profile.probs(&full).map_err(|e| e.to_string())?;
        ensure(
            probs.iter().all(|p| (p - 0.5).abs() <= 1e-6),
            format!("non-symmetric solution {probs:?}"),
        )?;
    }
    within_budget(start, Duration::from_secs(30))?;
    let hits: usize = report.solutions.iter().map(|s| s.hits).sum();
    Ok(format!(
        "{} distinct solution(s), {hits}/100 starts converged, all at 0.5",
        report.solutions.len()
    ))
}

fn monte_carlo_agreement() -> Outcome {
    let start = Instant::now();
    let profile = MarkovProfile::symmetric_spe(5).map_err(|e| e.to_string())?;
    let a = run_trials(&profile, 5, 100_000, 42, DEFAULT_MAX_ROUNDS).map_err(|e| e.to_string())?;
    for (i, m) in a.mean_payoff.iter().enumerate() {
        ensure((m - 0.2).abs() <= 0.004, format!("player {i}: mean payoff {m}"))?;
    }
    let b = run_trials(&profile, 5, 100_000, 42, DEFAULT_MAX_ROUNDS).map_err(|e| e.to_string())?;
    ensure(a == b, "two runs with the same seed differ")?;
    within_budget(start, Duration::from_secs(30))?;
    Ok(format!("mean payoffs {:?}", a.mean_payoff.iter().map(|m| format!("{m:.4}")).collect::<Vec<_>>()))
}

fn round_partition() -> Outcome {
    let mut maps = 0;
    for n in 3..=6usize {
        let state = GameState::full(n).unwrap();
        for bits in 0u32..1 << n {
            let actions: BTreeMap<PlayerId, Action> = (0..n)
                .map(|i| {
                    let a = if bits >> i & 1 == 1 { Action::Paper } else { Action::Rock };
                    (PlayerId(i), a)
                })
                .collect();
            let papers: Vec<PlayerId> = (0..n).filter(|i| bits >> i & 1 == 1).map(PlayerId).collect();
            let rocks: Vec<PlayerId> = (0..n).filter(|i| bits >> i & 1 == 0).map(PlayerId).collect();

            let all_same = papers.is_empty() || rocks.is_empty();
            let one_paper = papers.len() == 1;
            let one_rock = rocks.len() == 1;
            let eliminate = papers.len() >= 2 && rocks.len() >= 2;
            let cases = [all_same, one_paper, one_rock, eliminate];
            ensure(
                cases.iter().filter(|c| **c).count() == 1,
                format!("n={n} map {bits:b}: {cases:?}"),
            )?;

            let r = resolve_round(&state, &actions).map_err(|e| e.to_string())?;
            let ok = match &r.kind {
                ResolutionKind::Repeat => all_same && r.eliminated.is_empty(),
                ResolutionKind::Winner { player } => {
                    (one_paper && *player == papers[0]) || (one_rock && *player == rocks[0])
                }
                ResolutionKind::SplitTwo { pair } => {
                    eliminate && rocks.len() == 2 && pair.as_slice() == rocks && r.eliminated == papers
                }
                ResolutionKind::Continue { survivors } => {
                    eliminate
                        && rocks.len() >= 3
                        && survivors.survivors() == rocks
                        && r.eliminated == papers
                }
            };
            ensure(ok, format!("n={n} map {bits:b}: wrong resolution {r:?}"))?;
            maps += 1;
        }
    }
    Ok(format!("{maps} action maps over n=3..6 each fall in exactly one case"))
}

fn main() -> ExitCode {
    let criteria: [(&str, fn() -> Outcome); 8] = [
        ("table-1 regression", table_regression),
        ("closed-form roots n=3,4,5", closed_forms),
        ("symmetric profile indifference |I|=3..8", symmetric_indifference),
        ("asymmetric families + all-rock counterexample", asymmetric_families),
        ("indifference residual system", residual_system_check),
        ("three-player uniqueness search", three_player_uniqueness),
        ("monte carlo agreement + determinism", monte_carlo_agreement),
        ("round resolution partition n=3..6", round_partition),
    ];
    let mut failed = 0;
    for (name, run) in criteria {
        let start = Instant::now();
        let outcome = run();
        let took = start.elapsed();
        match outcome {
            Ok(detail) => println!("PASS  {name} ({took:.2?}): {detail}"),
            Err(why) => {
                failed += 1;
                println!("FAIL  {name} ({took:.2?}): {why}");
            }
        }
    }
    println!("{} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}

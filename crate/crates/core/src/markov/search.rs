//! Damped Newton search for totally mixed solutions of the indifference system.

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::residual::{all_lhs, lhs_block, residual_vector, rhs_entry, Layout};
use super::MarkovProfile;
use crate::equilibrium::solve_phi;
use crate::error::{Error, Result};
use crate::game::MIN_PLAYERS;
use crate::seed::mix64;

/// Largest universe the search accepts.
pub const MAX_SEARCH_UNIVERSE: usize = 8;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SearchOptions {
    /// Euclidean residual norm below which a start counts as converged.
    pub tolerance: f64,
    /// Two solutions are the same if every coordinate differs by at most this.
    pub dedup_tolerance: f64,
    /// Central finite-difference step for the Jacobian.
    pub fd_step: f64,
    pub max_iterations: usize,
    pub start_low: f64,
    pub start_high: f64,
    /// Iterates are projected into `[clamp, 1 - clamp]`.
    pub clamp: f64,
}

impl Default for SearchOptions {
    fn default() -> Self {
        Self {
            tolerance: 1e-9,
            dedup_tolerance: 1e-6,
            fd_step: 1e-6,
            max_iterations: 100,
            start_low: 0.05,
            start_high: 0.95,
            clamp: 1e-6,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct NewtonOutcome {
    pub profile: MarkovProfile,
    pub residual_norm: f64,
    pub iterations: usize,
    pub converged: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SearchSolution {
    pub profile: MarkovProfile,
    pub residual_norm: f64,
    /// Largest coordinate distance from the symmetric profile.
    pub distance_to_symmetric: f64,
    /// Index of the first start that reached this solution.
    pub first_start: usize,
    /// Number of starts that reached it.
    pub hits: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StartFailure {
    pub start: usize,
    pub residual_norm: f64,
    pub iterations: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SearchReport {
    pub universe: usize,
    pub starts: usize,
    pub seed: u64,
    pub solutions: Vec<SearchSolution>,
    pub failures: Vec<StartFailure>,
}

fn norm(v: &[f64]) -> f64 {
    let s: f64 = v.iter().map(|r| r * r).sum();
    if s.is_finite() {
        s.sqrt()
    } else {
        f64::INFINITY
    }
}

/// Central-difference Jacobian. Column `c` only touches rows of states that
/// contain the state of coordinate `c`, so only those are re-evaluated.
fn jacobian(layout: &Layout, x: &[f64], h: f64) -> DMatrix<f64> {
    let base_lhs = all_lhs(layout, x);
    let mut jac = DMatrix::zeros(layout.dim, layout.dim);
    for (col, (state, _)) in layout.coordinates().into_iter().enumerate() {
        let mask = layout.masks[state];
        let mut sides: [Vec<(usize, f64)>; 2] = [Vec::new(), Vec::new()];
        for (side, delta) in [h, -h].into_iter().enumerate() {
            let mut xp = x.to_vec();
            xp[col] += delta;
            let mut lhs = base_lhs.clone();
            lhs_block(layout, mask, &xp, &mut lhs);
            for &t in layout.supersets_of(state) {
                let m = layout.masks[t];
                let o = layout.offset(m);
                for k in 0..m.count_ones() as usize {
                    let r = lhs[o + k] - rhs_entry(layout, m, k, &xp, &lhs).0;
                    sides[side].push((o + k, r));
                }
            }
        }
        for ((row, plus), (_, minus)) in sides[0].iter().zip(&sides[1]) {
            jac[(*row, col)] = (plus - minus) / (2.0 * h);
        }
    }
    jac
}

fn newton_step(jac: &DMatrix<f64>, f: &DVector<f64>) -> Option<DVector<f64>> {
    let rhs = -f;
    let step = jac
        .clone()
        .lu()
        .solve(&rhs)
        .or_else(|| jac.clone().svd(true, true).solve(&rhs, 1e-14).ok())?;
    step.iter().all(|v| v.is_finite()).then_some(step)
}

/// Levenberg-Marquardt step `(J'J + mu I) d = -J'f`.
fn regularized_step(jac: &DMatrix<f64>, f: &DVector<f64>, mu: f64) -> Option<DVector<f64>> {
    let jt = jac.transpose();
    let mut normal = &jt * jac;
    for k in 0..normal.nrows() {
        normal[(k, k)] += mu;
    }
    let step = normal.cholesky()?.solve(&(-(&jt * f)));
    step.iter().all(|v| v.is_finite()).then_some(step)
}

struct Iterate {
    x: Vec<f64>,
    f: Vec<f64>,
    norm: f64,
}

fn newton_vector(layout: &Layout, x0: &[f64], opts: &SearchOptions) -> (Vec<f64>, f64, usize, bool) {
    let (lo, hi) = (opts.clamp, 1.0 - opts.clamp);
    let x: Vec<f64> = x0.iter().map(|v| v.clamp(lo, hi)).collect();
    let f = residual_vector(layout, &x);
    let mut cur = Iterate { norm: norm(&f), x, f };

    let try_point = |cur: &Iterate, step: &DVector<f64>, alpha: f64| -> Option<Iterate> {
        let x: Vec<f64> = cur
            .x
            .iter()
            .zip(step.iter())
            .map(|(a, d)| (a + alpha * d).clamp(lo, hi))
            .collect();
        let f = residual_vector(layout, &x);
        let n = norm(&f);
        (n < (1.0 - 1e-4 * alpha) * cur.norm).then_some(Iterate { x, f, norm: n })
    };

    for iteration in 0..opts.max_iterations {
        if cur.norm < opts.tolerance {
            return (cur.x, cur.norm, iteration, true);
        }
        let jac = jacobian(layout, &cur.x, opts.fd_step);
        let f = DVector::from_column_slice(&cur.f);

        // Backtracking on the Newton direction first.
        let mut next = None;
        if let Some(step) = newton_step(&jac, &f) {
            let mut alpha = 1.0;
            while alpha >= 1e-4 {
                next = try_point(&cur, &step, alpha);
                if next.is_some() {
                    break;
                }
                alpha *= 0.5;
            }
        }
        // Then increasingly regularized steps, which tend to the steepest descent of |f|^2.
        if next.is_none() {
            let scale = jac.norm_squared() / layout.dim as f64;
            let mut mu = 1e-6 * scale.max(1e-12);
            for _ in 0..16 {
                if let Some(step) = regularized_step(&jac, &f, mu) {
                    next = try_point(&cur, &step, 1.0);
                    if next.is_some() {
                        break;
                    }
                }
                mu *= 10.0;
            }
        }
        match next {
            Some(n) => cur = n,
            None => return (cur.x, cur.norm, iteration + 1, false),
        }
    }
    let converged = cur.norm < opts.tolerance;
    (cur.x, cur.norm, opts.max_iterations, converged)
}

fn check_universe(universe: usize) -> Result<()> {
    if universe < MIN_PLAYERS {
        return Err(Error::Domain(format!(
            "universe must be at least {MIN_PLAYERS}, got {universe}"
        )));
    }
    if universe > MAX_SEARCH_UNIVERSE {
        return Err(Error::Capacity {
            what: "search universe",
            got: universe,
            limit: MAX_SEARCH_UNIVERSE,
        });
    }
    Ok(())
}

/// Run damped Newton on the indifference system from `start`, which must be
/// totally mixed or is projected to be.
pub fn newton_solve(start: &MarkovProfile, opts: &SearchOptions) -> Result<NewtonOutcome> {
    check_universe(start.universe())?;
    let layout = Layout::new(start.universe())?;
    let x0 = layout.from_profile(start)?;
    let (x, residual_norm, iterations, converged) = newton_vector(&layout, &x0, opts);
    Ok(NewtonOutcome {
        profile: layout.to_profile(&x)?,
        residual_norm,
        iterations,
        converged,
    })
}

pub fn search_totally_mixed(universe: usize, starts: usize, seed: u64) -> Result<SearchReport> {
    search_with_options(universe, starts, seed, &SearchOptions::default())
}

/// Newton from `starts` seeded random interior points; converged endpoints are
/// deduplicated in start order, so the report does not depend on scheduling.
pub fn search_with_options(
    universe: usize,
    starts: usize,
    seed: u64,
    opts: &SearchOptions,
) -> Result<SearchReport> {
    check_universe(universe)?;
    let layout = Layout::new(universe)?;
    let symmetric: Vec<f64> = layout
        .masks
        .iter()
        .map(|m| solve_phi(m.count_ones() as usize).map(|s| (m.count_ones(), s.phi)))
        .collect::<Result<Vec<_>>>()?
        .into_iter()
        .flat_map(|(n, phi)| std::iter::repeat_n(phi, n as usize))
        .collect();

    let outcomes: Vec<_> = (0..starts)
        .into_par_iter()
        .map(|start| {
            let mut rng = ChaCha8Rng::seed_from_u64(mix64(seed, start as u64));
            let x0: Vec<f64> = (0..layout.dim)
                .map(|_| rng.gen_range(opts.start_low..=opts.start_high))
                .collect();
            newton_vector(&layout, &x0, opts)
        })
        .collect();

    let mut found: Vec<(Vec<f64>, SearchSolution)> = Vec::new();
    let mut failures = Vec::new();
    for (start, (x, residual_norm, iterations, converged)) in outcomes.into_iter().enumerate() {
        if !converged {
            failures.push(StartFailure {
                start,
                residual_norm,
                iterations,
            });
            continue;
        }
        let same = |other: &Vec<f64>| {
            other
                .iter()
                .zip(&x)
                .all(|(a, b)| (a - b).abs() <= opts.dedup_tolerance)
        };
        if let Some((_, sol)) = found.iter_mut().find(|(other, _)| same(other)) {
            sol.hits += 1;
            continue;
        }
        let distance_to_symmetric = x
            .iter()
            .zip(&symmetric)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max);
        let sol = SearchSolution {
            profile: layout.to_profile(&x)?,
            residual_norm,
            distance_to_symmetric,
            first_start: start,
            hits: 1,
        };
        found.push((x, sol));
    }
    Ok(SearchReport {
        universe,
        starts,
        seed,
        solutions: found.into_iter().map(|(_, s)| s).collect(),
        failures,
    })
}

//! Symmetric equilibrium: the paper probability `phi_n` that makes every one of
//! `n` survivors indifferent between rock and paper.
//!
//! A paper player wins either when everyone else shows rock, or when everyone
//! else also shows paper and they go on to win the repeated round, so
//! indifference at the symmetric value `1/n` reads
//!
//! ```text
//! (1 - p)^(n-1) + p^(n-1) / n = 1 / n
//! ```
//!
//! That polynomial also vanishes at `p = 1`. Dividing out the `(1 - p)` factor
//! gives the reduced form
//!
//! ```text
//! (1 - p)^(n-2) / (1 + p + ... + p^(n-2)) = 1 / n
//! ```
//!
//! whose left side falls strictly from 1 to 0 on `[0, 1)`, so bisection on it
//! always brackets the single interior root.

use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::game::MIN_PLAYERS;

/// Bisection stops once the bracket is this narrow.
pub const BRACKET_TOLERANCE: f64 = 1e-14;
pub const MAX_BISECTION_ITERATIONS: usize = 200;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PhiSolution {
    pub n: usize,
    pub phi: f64,
    /// `reduced_lhs(phi, n) - 1/n`.
    pub residual: f64,
    pub iterations: usize,
}

fn check_n(n: usize) -> Result<()> {
    if n < MIN_PLAYERS {
        return Err(Error::Domain(format!(
            "need at least {MIN_PLAYERS} survivors, got {n}"
        )));
    }
    Ok(())
}

fn powi(p: f64, k: usize) -> f64 {
    p.powi(k as i32)
}

/// `(1-p)^(n-1) + p^(n-1)/n - 1/n`.
pub fn indifference_residual(p: f64, n: usize) -> Result<f64> {
    check_n(n)?;
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::Domain(format!("probability {p} outside [0, 1]")));
    }
    let nf = n as f64;
    Ok(powi(1.0 - p, n - 1) + powi(p, n - 1) / nf - 1.0 / nf)
}

/// `(1-p)^(n-2) / (1 + p + ... + p^(n-2))`, defined on `[0, 1)`.
pub fn reduced_lhs(p: f64, n: usize) -> Result<f64> {
    check_n(n)?;
    if !(0.0..1.0).contains(&p) {
        return Err(Error::Domain(format!("probability {p} outside [0, 1)")));
    }
    let mut denom = 1.0;
    let mut term = 1.0;
    for _ in 1..=n - 2 {
        term *= p;
        denom += term;
    }
    Ok(powi(1.0 - p, n - 2) / denom)
}

/// Unique root of `reduced_lhs(p, n) = 1/n` in `(0, 1)`.
pub fn solve_phi(n: usize) -> Result<PhiSolution> {
    check_n(n)?;
    let target = 1.0 / n as f64;
    // f(lo) = 1 - 1/n > 0 and f decreases towards -1/n as p -> 1.
    let (mut lo, mut hi) = (0.0_f64, 1.0_f64);
    let mut iterations = 0;
    while hi - lo > BRACKET_TOLERANCE && iterations < MAX_BISECTION_ITERATIONS {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if reduced_lhs(mid, n)? > target {
            lo = mid;
        } else {
            hi = mid;
        }
        iterations += 1;
    }
    let phi = 0.5 * (lo + hi);
    Ok(PhiSolution {
        n,
        phi,
        residual: reduced_lhs(phi, n)? - target,
        iterations,
    })
}

/// `solve_phi` for every `n` in `n_min..=n_max`.
pub fn phi_table(n_min: usize, n_max: usize) -> Result<Vec<PhiSolution>> {
    check_n(n_min)?;
    if n_max < n_min {
        return Err(Error::Domain(format!("empty range {n_min}..={n_max}")));
    }
    (n_min..=n_max).map(solve_phi).collect()
}

/// CSV with header `n,phi` and `phi` printed to 6 decimals.
pub fn write_phi_csv<W: Write>(rows: &[PhiSolution], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["n", "phi"])?;
    for row in rows {
        w.write_record([row.n.to_string(), format!("{:.6}", row.phi)])?;
    }
    w.flush().map_err(|e| Error::Serde(e.to_string()))?;
    Ok(())
}

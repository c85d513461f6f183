//! Effective ergodic averages along the polynomial schedule
//! T_k = k^(2 alpha / (2 alpha - 1)): for a shrinking bump family f_R with
//! R = T_k^xi, the time integral int_0^T f_{n(T)} must sit between
//!
//! ```text
//! (1/m) T ||f||_L1 - 2 T^alpha ||f||_theta   and
//!   m   T ||f||_L1 + 2 T^alpha ||f||_theta
//! ```
//!
//! for all sufficiently large schedule indices. The experiment runs an
//! ensemble of orbits, evaluates every schedule index in a single pass per
//! orbit, and reports the largest failing index of each orbit.

use super::bump::{circle_distance, BumpFamily};
use super::{DecayStyle, MixingFlowModel, RateModel};
use crate::error::{Error, Result};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

/// Parameters of the effective-average experiment.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct EffectiveAverageConfig {
    /// Deviation exponent, in (1/2, 1).
    pub alpha: f64,
    /// Two-sided slack factor, > 1.
    pub m: f64,
    /// Shrink exponent: the bump parameter at schedule time T is R = T^xi.
    pub xi: f64,
    /// Number of schedule indices to evaluate.
    pub k_max: u32,
}

impl EffectiveAverageConfig {
    /// Schedule exponent 2 alpha / (2 alpha - 1).
    pub fn schedule_exponent(&self) -> f64 {
        2.0 * self.alpha / (2.0 * self.alpha - 1.0)
    }

    /// T_k = k^(2 alpha / (2 alpha - 1)); strictly increasing with
    /// T_{k+1} / T_k -> 1.
    pub fn schedule_time(&self, k: u32) -> f64 {
        (k as f64).powf(self.schedule_exponent())
    }

    /// Validate against the invariants and the flow's rate model: the
    /// polynomial case additionally requires alpha > min(1/2, 1 - C/2), and
    /// the shrink exponent must satisfy xi < (1 - alpha) / (1 + theta).
    pub fn validate(&self, theta: f64, rate: &RateModel) -> Result<()> {
        if !(self.alpha > 0.5 && self.alpha < 1.0) {
            return Err(Error::ConfigViolation(format!(
                "alpha must lie in (1/2, 1); got {}",
                self.alpha
            )));
        }
        if !(self.m > 1.0) {
            return Err(Error::ConfigViolation(format!(
                "slack factor m must exceed 1; got {}",
                self.m
            )));
        }
        let xi_cap = (1.0 - self.alpha) / (1.0 + theta);
        if !(self.xi > 0.0 && self.xi < xi_cap) {
            return Err(Error::ConfigViolation(format!(
                "shrink exponent must satisfy 0 < xi < (1 - alpha)/(1 + theta) = {xi_cap:.4}; got {}",
                self.xi
            )));
        }
        if self.k_max < 2 {
            return Err(Error::ConfigViolation(format!(
                "schedule length k_max must be >= 2; got {}",
                self.k_max
            )));
        }
        if rate.style == DecayStyle::Polynomial {
            // summability of the schedule series needs alpha > 1 - C/2 when
            // C < 1 (for C >= 1 the structural alpha > 1/2 already suffices)
            let floor = (0.5f64).max(1.0 - rate.rate / 2.0);
            if !(self.alpha > floor) {
                return Err(Error::ConfigViolation(format!(
                    "polynomial rate C = {} requires alpha > max(1/2, 1 - C/2) = {floor}; got {}",
                    rate.rate, self.alpha
                )));
            }
        }
        Ok(())
    }
}

/// The two sides of the effective-average inequality at time T for an
/// observable with the given L1 and regularity norms.
pub fn sandwich_bounds(t: f64, m: f64, alpha: f64, l1: f64, bnorm: f64) -> (f64, f64) {
    let dev = 2.0 * t.powf(alpha) * bnorm;
    ((t / m) * l1 - dev, m * t * l1 + dev)
}

/// Ensemble outcome of the sandwich experiment.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SandwichReport {
    pub n_orbits: usize,
    pub k_max: u32,
    /// Orbits are "clean" when they have no failure at any k >= k_threshold.
    pub k_threshold: u32,
    pub clean_fraction: f64,
    /// Largest failing schedule index per orbit (None: no failure at all).
    pub per_orbit_last_fail: Vec<Option<u32>>,
    /// Number of failing schedule indices per orbit.
    pub per_orbit_fail_count: Vec<u32>,
    pub alpha: f64,
    pub m: f64,
    pub xi: f64,
    pub theta: f64,
}

/// Run the sandwich experiment: `n_orbits` independent orbits, each checked
/// at every schedule index k = 1..=k_max in one pass. Deterministic given
/// the seed, independent of worker count.
pub fn effective_sandwich_experiment(
    flow: &MixingFlowModel,
    family: &BumpFamily,
    config: &EffectiveAverageConfig,
    n_orbits: usize,
    seed: u64,
    k_threshold: u32,
) -> Result<SandwichReport> {
    config.validate(family.theta(), flow.rate_model())?;
    if flow.state_dim() != 1 {
        return Err(Error::ConfigViolation(
            "the bump family is a circle observable; use a one-dimensional flow".into(),
        ));
    }
    if n_orbits == 0 {
        return Err(Error::Parameter("need at least one orbit".into()));
    }

    let k_max = config.k_max as usize;
    // per-index tables: schedule times, bumps, norms, bounds
    let mut t_k = vec![0.0; k_max + 1];
    let mut bumps = Vec::with_capacity(k_max + 1);
    let mut bounds = vec![(0.0, 0.0); k_max + 1];
    let mut half_support = vec![f64::MAX; k_max + 1];
    bumps.push(family.member(1.0)?); // index 0 unused
    for k in 1..=k_max {
        let t = config.schedule_time(k as u32);
        let r_param = t.powf(config.xi).max(1.0);
        let bump = family.member(r_param)?;
        t_k[k] = t;
        bounds[k] = sandwich_bounds(t, config.m, config.alpha, bump.l1_norm(), bump.holder_norm());
        half_support[k] = bump.half_support();
        bumps.push(bump);
    }
    let center = family.center();

    let results: Vec<(Option<u32>, u32)> = (0..n_orbits)
        .into_par_iter()
        .map(|orbit| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(orbit as u64 + 1);
            let mut p = flow.sample_initial(&mut rng);
            let mut acc = vec![0.0f64; k_max + 1];
            let mut k_done = 0usize;
            let mut t = 0.0f64;
            let mut seg = 1.0 - p.fiber();
            let mut last_fail: Option<u32> = None;
            let mut fail_count = 0u32;
            while k_done < k_max {
                let x = p.coords().0;
                let d = circle_distance(x, center);
                let t1 = t + seg;
                // widest active bump decides whether anything accumulates
                if d < half_support[k_done + 1] {
                    // half_support decreases in k: the active nonzero ks form
                    // the prefix (k_done, k_hi]
                    let mut k_hi = k_done + 1;
                    while k_hi < k_max && half_support[k_hi + 1] > d {
                        k_hi += 1;
                    }
                    for k in (k_done + 1)..=k_hi {
                        let overlap = t_k[k].min(t1) - t;
                        if overlap > 0.0 {
                            acc[k] += bumps[k].eval_at_distance(d) * overlap;
                        }
                    }
                }
                // finalize schedule indices ending inside this segment
                while k_done < k_max && t_k[k_done + 1] <= t1 {
                    let k = k_done + 1;
                    let (lo, hi) = bounds[k];
                    if acc[k] < lo || acc[k] > hi {
                        last_fail = Some(k as u32);
                        fail_count += 1;
                    }
                    k_done = k;
                }
                t = t1;
                flow.step_base(&mut p);
                seg = 1.0;
            }
            (last_fail, fail_count)
        })
        .collect();

    let per_orbit_last_fail: Vec<Option<u32>> = results.iter().map(|r| r.0).collect();
    let per_orbit_fail_count: Vec<u32> = results.iter().map(|r| r.1).collect();
    let clean = per_orbit_last_fail
        .iter()
        .filter(|lf| lf.map_or(true, |k| k < k_threshold))
        .count();
    Ok(SandwichReport {
        n_orbits,
        k_max: config.k_max,
        k_threshold,
        clean_fraction: clean as f64 / n_orbits as f64,
        per_orbit_last_fail,
        per_orbit_fail_count,
        alpha: config.alpha,
        m: config.m,
        xi: config.xi,
        theta: family.theta(),
    })
}

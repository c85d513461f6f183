//! Synthetic measure-preserving systems with known mixing rates, driven as
//! unit-roof suspensions: flow time T equals the map step count plus a
//! fractional first/last segment, with observables constant on fibers.
//!
//! Three base maps are implemented:
//!
//! * doubling map on the circle -- exponentially mixing. Iterating x -> 2x
//!   mod 1 in floating point collapses onto 0 within ~53 steps (the mantissa
//!   is a finite binary string), so the orbit is simulated exactly on its
//!   binary expansion: a 64-bit window shifted one fresh seeded random bit
//!   per step, which is the Lebesgue-generic orbit by construction.
//! * torus cat map [[2,1],[1,1]] -- exponentially mixing, area preserving.
//! * intermittent (Liverani-Saussol-Vaienti) map x -> x(1 + (2x)^alpha) on
//!   [0, 1/2), 2x - 1 on [1/2, 1] -- polynomially mixing with rate
//!   C = 1/alpha - 1; its invariant density diverges like x^(-alpha) and is
//!   sampled by burn-in.

pub mod bump;
pub mod sandwich;

use crate::error::{Error, Result};
use crate::fit::{fit_power_law, ScalingFit};
use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

/// Burn-in iterations used to sample the intermittent map's invariant
/// measure from Lebesgue-random starts.
pub const INTERMITTENT_BURN_IN: usize = 10_000;

/// Base map of a suspension flow.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum MapKind {
    Doubling,
    CatMap,
    Intermittent { alpha: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum DecayStyle {
    Exponential,
    Polynomial,
}

/// Declared correlation-decay model: K e^(-C t) or K (1 + t)^(-C).
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct RateModel {
    pub style: DecayStyle,
    pub amplitude: f64,
    pub rate: f64,
}

/// A measure-preserving suspension flow with a declared mixing-rate model.
#[derive(Debug, Clone)]
pub struct MixingFlowModel {
    kind: MapKind,
    rate_model: RateModel,
    state_dim: usize,
}

/// A point of the suspension: base coordinates plus fiber position in [0, 1).
/// Doubling-map points own their bit stream so evolution is exact and
/// reproducible.
#[derive(Debug, Clone)]
pub enum FlowPoint {
    Doubling {
        window: u64,
        bits: ChaCha8Rng,
        reservoir: u64,
        bits_left: u8,
        fiber: f64,
    },
    CatMap {
        x: f64,
        y: f64,
        fiber: f64,
    },
    Intermittent {
        x: f64,
        fiber: f64,
    },
}

impl FlowPoint {
    /// Base coordinates (second coordinate 0 for one-dimensional maps).
    pub fn coords(&self) -> (f64, f64) {
        match self {
            FlowPoint::Doubling { window, .. } => (window_to_unit(*window), 0.0),
            FlowPoint::CatMap { x, y, .. } => (*x, *y),
            FlowPoint::Intermittent { x, .. } => (*x, 0.0),
        }
    }

    pub fn fiber(&self) -> f64 {
        match self {
            FlowPoint::Doubling { fiber, .. } => *fiber,
            FlowPoint::CatMap { fiber, .. } => *fiber,
            FlowPoint::Intermittent { fiber, .. } => *fiber,
        }
    }

    fn set_fiber(&mut self, s: f64) {
        match self {
            FlowPoint::Doubling { fiber, .. } => *fiber = s,
            FlowPoint::CatMap { fiber, .. } => *fiber = s,
            FlowPoint::Intermittent { fiber, .. } => *fiber = s,
        }
    }
}

#[inline]
fn window_to_unit(w: u64) -> f64 {
    // top 53 bits, exact in f64
    (w >> 11) as f64 * (1.0 / 9007199254740992.0)
}

/// One intermittent map step.
#[inline]
pub fn intermittent_step(x: f64, alpha: f64) -> f64 {
    if x < 0.5 {
        x + x * (2.0 * x).powf(alpha)
    } else {
        2.0 * x - 1.0
    }
}

/// Monte Carlo correlation estimate with its standard error.
#[derive(Debug, Clone, Copy)]
pub struct CorrelationEstimate {
    pub value: f64,
    pub std_error: f64,
    pub n_samples: usize,
}

/// Variance-growth regime expected from a rate model.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum VarianceRegime {
    /// Var ~ T (exponential mixing, or polynomial with C > 1).
    Linear,
    /// Var ~ T log T (polynomial, C = 1).
    LinearLog,
    /// Var ~ T^(2 - C) (polynomial, C < 1).
    Anomalous,
}

impl VarianceRegime {
    pub fn label(&self) -> &'static str {
        match self {
            VarianceRegime::Linear => "linear",
            VarianceRegime::LinearLog => "linear-log",
            VarianceRegime::Anomalous => "anomalous",
        }
    }

    /// Slope ceiling for the log Var vs log T fit, with 0.1 slack for log
    /// factors and finite-time effects.
    pub fn slope_ceiling(&self, rate: f64) -> f64 {
        match self {
            VarianceRegime::Linear => 1.1,
            VarianceRegime::LinearLog => 1.1,
            VarianceRegime::Anomalous => 2.0 - rate + 0.1,
        }
    }

    fn shape(&self, rate: f64, t: f64) -> f64 {
        match self {
            VarianceRegime::Linear => t,
            VarianceRegime::LinearLog => t * t.ln().max(1.0),
            VarianceRegime::Anomalous => t.powf(2.0 - rate),
        }
    }
}

/// One variance-growth experiment: empirical Var(int_0^T f) per grid time,
/// the log-log fit, and the fitted envelope constant Q.
#[derive(Debug, Clone)]
pub struct VarianceExperiment {
    pub t_grid: Vec<f64>,
    pub variances: Vec<f64>,
    pub bound_values: Vec<f64>,
    pub fit: ScalingFit,
    pub regime: VarianceRegime,
    pub fitted_q: f64,
}

impl VarianceExperiment {
    /// CSV rows `T,empirical_variance,bound_value,regime`.
    pub fn write_csv<W: std::io::Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "T,empirical_variance,bound_value,regime")?;
        for i in 0..self.t_grid.len() {
            writeln!(
                w,
                "{:.16e},{:.16e},{:.16e},{}",
                self.t_grid[i],
                self.variances[i],
                self.bound_values[i],
                self.regime.label()
            )?;
        }
        Ok(())
    }
}

impl MixingFlowModel {
    pub fn new(kind: MapKind) -> Result<Self> {
        let (rate_model, state_dim) = match kind {
            MapKind::Doubling => (
                RateModel {
                    style: DecayStyle::Exponential,
                    amplitude: 1.0,
                    rate: std::f64::consts::LN_2,
                },
                1,
            ),
            MapKind::CatMap => (
                RateModel {
                    style: DecayStyle::Exponential,
                    amplitude: 1.0,
                    // log of the leading eigenvalue (3 + sqrt 5) / 2
                    rate: ((3.0 + 5.0f64.sqrt()) / 2.0).ln(),
                },
                2,
            ),
            MapKind::Intermittent { alpha } => {
                if !(alpha > 0.0 && alpha < 1.0) {
                    return Err(Error::Parameter(format!(
                        "intermittency exponent must lie in (0, 1); got {alpha}"
                    )));
                }
                (
                    RateModel {
                        style: DecayStyle::Polynomial,
                        amplitude: 1.0,
                        rate: 1.0 / alpha - 1.0,
                    },
                    1,
                )
            }
        };
        Ok(MixingFlowModel {
            kind,
            rate_model,
            state_dim,
        })
    }

    pub fn kind(&self) -> MapKind {
        self.kind
    }

    pub fn rate_model(&self) -> &RateModel {
        &self.rate_model
    }

    pub fn state_dim(&self) -> usize {
        self.state_dim
    }

    /// Draw a point of the suspension from the invariant measure: Lebesgue
    /// for the doubling and cat maps, burn-in from a Lebesgue start for the
    /// intermittent map; the fiber is uniform on [0, 1).
    pub fn sample_initial(&self, rng: &mut ChaCha8Rng) -> FlowPoint {
        let fiber = rng.random::<f64>();
        match self.kind {
            MapKind::Doubling => FlowPoint::Doubling {
                window: rng.next_u64(),
                bits: ChaCha8Rng::seed_from_u64(rng.next_u64()),
                reservoir: 0,
                bits_left: 0,
                fiber,
            },
            MapKind::CatMap => FlowPoint::CatMap {
                x: rng.random::<f64>(),
                y: rng.random::<f64>(),
                fiber,
            },
            MapKind::Intermittent { alpha } => {
                let mut x = rng.random::<f64>();
                for _ in 0..INTERMITTENT_BURN_IN {
                    x = intermittent_step(x, alpha);
                }
                FlowPoint::Intermittent { x, fiber }
            }
        }
    }

    /// One base-map step.
    #[inline]
    pub fn step_base(&self, p: &mut FlowPoint) {
        match (self.kind, p) {
            (
                MapKind::Doubling,
                FlowPoint::Doubling {
                    window,
                    bits,
                    reservoir,
                    bits_left,
                    ..
                },
            ) => {
                if *bits_left == 0 {
                    *reservoir = bits.next_u64();
                    *bits_left = 64;
                }
                let bit = *reservoir & 1;
                *reservoir >>= 1;
                *bits_left -= 1;
                *window = (*window << 1) | bit;
            }
            (MapKind::CatMap, FlowPoint::CatMap { x, y, .. }) => {
                let nx = (2.0 * *x + *y).rem_euclid(1.0);
                let ny = (*x + *y).rem_euclid(1.0);
                *x = nx;
                *y = ny;
            }
            (MapKind::Intermittent { alpha }, FlowPoint::Intermittent { x, .. }) => {
                *x = intermittent_step(*x, alpha);
            }
            _ => unreachable!("flow point does not match flow kind"),
        }
    }

    /// Advance the suspension by flow time t >= 0.
    pub fn evolve(&self, p: &mut FlowPoint, t: f64) {
        let total = p.fiber() + t;
        let steps = total.floor();
        for _ in 0..steps as u64 {
            self.step_base(p);
        }
        p.set_fiber(total - steps);
    }

    /// Evaluate an observable at a point (observables are constant on
    /// fibers).
    pub fn eval<F: Fn(&FlowPoint) -> f64>(&self, f: F, p: &FlowPoint) -> f64 {
        f(p)
    }

    /// int_0^T f(g_t y) dt for a fiber-constant observable: piecewise
    /// constant in t, with fractional first and last segments.
    pub fn birkhoff_integral<F: Fn(&FlowPoint) -> f64>(&self, f: F, p0: &FlowPoint, t: f64) -> f64 {
        self.birkhoff_checkpoints(f, p0, &[t])[0]
    }

    /// Running Birkhoff integrals at an ascending list of times, in a single
    /// pass over the orbit.
    pub fn birkhoff_checkpoints<F: Fn(&FlowPoint) -> f64>(
        &self,
        f: F,
        p0: &FlowPoint,
        ts: &[f64],
    ) -> Vec<f64> {
        let mut out = Vec::with_capacity(ts.len());
        if ts.is_empty() {
            return out;
        }
        let t_end = *ts.last().expect("non-empty");
        let mut p = p0.clone();
        let mut acc = 0.0;
        let mut t = 0.0;
        let mut next_cp = 0usize;
        // first segment runs to the end of the current fiber
        let mut seg = 1.0 - p.fiber();
        loop {
            let v = f(&p);
            let t1 = t + seg;
            while next_cp < ts.len() && ts[next_cp] <= t1 {
                out.push(acc + v * (ts[next_cp] - t));
                next_cp += 1;
            }
            if next_cp >= ts.len() || t1 >= t_end {
                break;
            }
            acc += v * seg;
            t = t1;
            self.step_base(&mut p);
            p.set_fiber(0.0);
            seg = 1.0;
        }
        out
    }

    /// Monte Carlo estimate of int f1 * (f2 o g_t) dmu - int f1 int f2 over
    /// `n_samples` independent draws from the invariant measure.
    /// Deterministic given the seed.
    pub fn correlation_estimate<F1, F2>(
        &self,
        f1: F1,
        f2: F2,
        t: f64,
        n_samples: usize,
        seed: u64,
    ) -> Result<CorrelationEstimate>
    where
        F1: Fn(&FlowPoint) -> f64,
        F2: Fn(&FlowPoint) -> f64,
    {
        if n_samples < 1000 {
            return Err(Error::Parameter(format!(
                "correlation estimate needs n_samples >= 1000; got {n_samples}"
            )));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut us = Vec::with_capacity(n_samples);
        let mut ws = Vec::with_capacity(n_samples);
        for _ in 0..n_samples {
            let mut p = self.sample_initial(&mut rng);
            us.push(f1(&p));
            self.evolve(&mut p, t);
            ws.push(f2(&p));
        }
        let n = n_samples as f64;
        let mean_u = us.iter().sum::<f64>() / n;
        let mean_w = ws.iter().sum::<f64>() / n;
        let mut cov = 0.0;
        let mut var_prod = 0.0;
        for i in 0..n_samples {
            let c = (us[i] - mean_u) * (ws[i] - mean_w);
            cov += c;
            var_prod += c * c;
        }
        cov /= n;
        let var = (var_prod / n - cov * cov).max(0.0);
        Ok(CorrelationEstimate {
            value: cov,
            std_error: (var / n).sqrt(),
            n_samples,
        })
    }

    /// Empirical variance of int_0^T f over independent orbits for each T in
    /// the grid, with its log-log growth fit and the regime implied by the
    /// flow's rate model. The grid must span at least two decades.
    pub fn variance_growth_experiment<F>(
        &self,
        f: F,
        t_grid: &[f64],
        n_orbits: usize,
        seed: u64,
    ) -> Result<VarianceExperiment>
    where
        F: Fn(&FlowPoint) -> f64 + Sync,
    {
        if t_grid.len() < 3 {
            return Err(Error::InsufficientRange(
                "variance grid needs at least 3 times".into(),
            ));
        }
        let t_min = t_grid.first().copied().unwrap_or(0.0);
        let t_max = t_grid.last().copied().unwrap_or(0.0);
        if !(t_min > 0.0) || t_max / t_min < 100.0 {
            return Err(Error::InsufficientRange(format!(
                "variance grid spans [{t_min}, {t_max}], need two decades"
            )));
        }
        if n_orbits < 8 {
            return Err(Error::Parameter(format!(
                "variance experiment needs n_orbits >= 8; got {n_orbits}"
            )));
        }
        use rayon::prelude::*;
        let integrals: Vec<Vec<f64>> = (0..n_orbits)
            .into_par_iter()
            .map(|i| {
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                rng.set_stream(i as u64 + 1);
                let p = self.sample_initial(&mut rng);
                self.birkhoff_checkpoints(&f, &p, t_grid)
            })
            .collect();

        let n = n_orbits as f64;
        let mut variances = Vec::with_capacity(t_grid.len());
        for j in 0..t_grid.len() {
            let mean = integrals.iter().map(|o| o[j]).sum::<f64>() / n;
            let var = integrals
                .iter()
                .map(|o| (o[j] - mean) * (o[j] - mean))
                .sum::<f64>()
                / (n - 1.0);
            variances.push(var);
        }

        let regime = match self.rate_model.style {
            DecayStyle::Exponential => VarianceRegime::Linear,
            DecayStyle::Polynomial => {
                let c = self.rate_model.rate;
                if (c - 1.0).abs() < 1e-12 {
                    VarianceRegime::LinearLog
                } else if c > 1.0 {
                    VarianceRegime::Linear
                } else {
                    VarianceRegime::Anomalous
                }
            }
        };
        let rate = self.rate_model.rate;
        let fitted_q = t_grid
            .iter()
            .zip(variances.iter())
            .map(|(&t, &v)| v / regime.shape(rate, t))
            .fold(0.0, f64::max);
        let bound_values: Vec<f64> = t_grid
            .iter()
            .map(|&t| fitted_q * regime.shape(rate, t))
            .collect();
        let pts: Vec<(f64, f64)> = t_grid
            .iter()
            .zip(variances.iter())
            .map(|(&t, &v)| (t, v))
            .collect();
        let fit = fit_power_law(&pts)?;
        Ok(VarianceExperiment {
            t_grid: t_grid.to_vec(),
            variances,
            bound_values,
            fit,
            regime,
            fitted_q,
        })
    }
}

/// Closed form of int_0^T int_0^T (1 + |t - s|)^(-C) dt ds:
///
/// ```text
/// C = 1:  2 [ (1+T) log(1+T) - T ]
/// C = 2:  2 [ T - log(1+T) ]
/// else:   2 [ ((1+T)^(2-C) - 1) / ((1-C)(2-C)) - T / (1-C) ]
/// ```
pub fn closed_form_double_integral(c: f64, t: f64) -> Result<f64> {
    if !(c > 0.0) || !(t > 0.0) {
        return Err(Error::Domain(format!(
            "closed_form_double_integral requires C > 0 and T > 0; got C = {c}, T = {t}"
        )));
    }
    let one_t = 1.0 + t;
    if (c - 1.0).abs() < 1e-12 {
        Ok(2.0 * (one_t * one_t.ln() - t))
    } else if (c - 2.0).abs() < 1e-12 {
        Ok(2.0 * (t - one_t.ln()))
    } else {
        Ok(2.0 * ((one_t.powf(2.0 - c) - 1.0) / ((1.0 - c) * (2.0 - c)) - t / (1.0 - c)))
    }
}

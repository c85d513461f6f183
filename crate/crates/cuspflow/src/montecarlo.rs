//! Surrogate long random geodesics: a renewal process of returns into the
//! cusp collar composed with exact per-excursion dynamics.
//!
//! The statistical layer supplies only inter-excursion gaps and entry angles
//! b with the collar-measure tail P(b <= 1/R) ~ 1/R; every per-excursion
//! quantity (depth, duration, winding, inverse-distance functional) comes
//! from the excursion solver, and summary accumulators are exact sums of the
//! per-excursion values in event order. Everything is seeded: trajectory i
//! draws from ChaCha stream i + 1 of the master seed, so ensembles are
//! bitwise reproducible independent of worker count.

use crate::error::{Error, Result};
use crate::excursion::{
    predict_delta_min, simulate_excursion, ExcursionFlags, ExcursionRecord,
};
use crate::fit::{fit_linear, ScalingFit};
use crate::geometry::ProfileSurface;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

/// Distribution of inter-excursion times (all have finite mean `mean`).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum GapLaw {
    /// Exponential with the given mean: the default renewal model.
    Exponential { mean: f64 },
    /// Lomax/Pareto-type heavy tail with finite mean (shape > 1); used to
    /// report sensitivity of the acceptance statistics to the gap law.
    Pareto { mean: f64, shape: f64 },
    /// Gaps read off a cat-map orbit functional: exponential marginals with
    /// genuine short-range correlations between successive returns.
    CatMapDriven { mean: f64 },
}

impl GapLaw {
    pub fn mean(&self) -> f64 {
        match self {
            GapLaw::Exponential { mean } => *mean,
            GapLaw::Pareto { mean, .. } => *mean,
            GapLaw::CatMapDriven { mean } => *mean,
        }
    }

    fn validate(&self) -> Result<()> {
        if !(self.mean() > 0.0) {
            return Err(Error::Parameter(format!(
                "gap law mean must be positive; got {}",
                self.mean()
            )));
        }
        if let GapLaw::Pareto { shape, .. } = self {
            if !(*shape > 1.0) {
                return Err(Error::Parameter(format!(
                    "Pareto gap shape must exceed 1 (finite mean); got {shape}"
                )));
            }
        }
        Ok(())
    }
}

/// Distribution of the entry angular component b in (0, 1].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EntryAngleLaw {
    /// Uniform on (0, 1]: P(b <= 1/R) = 1/R exactly, the collar-measure tail.
    Uniform,
    /// b from the same cat-map orbit driving the gaps: uniform marginal
    /// (exact tail), correlated across excursions.
    CatMapDriven,
}

impl EntryAngleLaw {
    /// Exact tail probability P(b <= q); both implemented laws have a
    /// uniform marginal.
    pub fn tail_probability(&self, q: f64) -> f64 {
        q.clamp(0.0, 1.0)
    }
}

/// Seeded source of return events (gap, b).
#[derive(Debug, Clone)]
pub struct ReturnProcess {
    gap_law: GapLaw,
    b_law: EntryAngleLaw,
    rng: ChaCha8Rng,
    cat: (f64, f64),
}

impl ReturnProcess {
    pub fn new(gap_law: GapLaw, b_law: EntryAngleLaw, seed: u64) -> Result<Self> {
        Self::with_stream(gap_law, b_law, seed, 0)
    }

    /// Per-trajectory variant: stream `index + 1` of the master seed.
    pub fn with_stream(
        gap_law: GapLaw,
        b_law: EntryAngleLaw,
        seed: u64,
        index: u64,
    ) -> Result<Self> {
        gap_law.validate()?;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(index + 1);
        let cat = (rng.random::<f64>(), rng.random::<f64>());
        Ok(ReturnProcess {
            gap_law,
            b_law,
            rng,
            cat,
        })
    }

    pub fn gap_law(&self) -> GapLaw {
        self.gap_law
    }

    pub fn b_law(&self) -> EntryAngleLaw {
        self.b_law
    }

    fn cat_step(&mut self) -> (f64, f64) {
        let (x, y) = self.cat;
        self.cat = ((2.0 * x + y).rem_euclid(1.0), (x + y).rem_euclid(1.0));
        self.cat
    }

    /// Draw the next (gap, entry angle). Deterministic given seed and call
    /// index; gaps are strictly positive and b lies in (0, 1].
    pub fn sample_return_event(&mut self) -> (f64, f64) {
        let (cat_x, cat_y) = match (self.gap_law, self.b_law) {
            (GapLaw::CatMapDriven { .. }, _) | (_, EntryAngleLaw::CatMapDriven) => self.cat_step(),
            _ => (0.0, 0.0),
        };
        let gap = match self.gap_law {
            GapLaw::Exponential { mean } => {
                let u: f64 = self.rng.random();
                -mean * (1.0 - u).ln().max(f64::MIN) // u in [0,1): 1-u in (0,1]
            }
            GapLaw::Pareto { mean, shape } => {
                // Lomax with scale sigma = mean (shape - 1)
                let sigma = mean * (shape - 1.0);
                let u: f64 = self.rng.random();
                sigma * ((1.0 - u).powf(-1.0 / shape) - 1.0)
            }
            GapLaw::CatMapDriven { mean } => -mean * (1.0 - cat_y).ln(),
        };
        let b = match self.b_law {
            EntryAngleLaw::Uniform => 1.0 - self.rng.random::<f64>(),
            EntryAngleLaw::CatMapDriven => 1.0 - cat_x,
        };
        (gap.max(f64::MIN_POSITIVE), b)
    }
}

/// Acceptance window parameters: depth exponents get slack epsilon and a
/// multiplicative constant c.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct AcceptanceWindow {
    pub epsilon: f64,
    pub c: f64,
}

impl AcceptanceWindow {
    pub fn validate(&self) -> Result<()> {
        if !(self.epsilon > 0.0 && self.epsilon < 0.5) {
            return Err(Error::Parameter(format!(
                "window slack exponent must lie in (0, 1/2); got {}",
                self.epsilon
            )));
        }
        if !(self.c >= 1.0) {
            return Err(Error::Parameter(format!(
                "window constant must be >= 1; got {}",
                self.c
            )));
        }
        Ok(())
    }
}

/// Long-run statistics of one surrogate geodesic at a checkpoint time.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct GeodesicSummary {
    pub t: f64,
    pub n_excursions: u64,
    /// Running minimum of per-excursion depth; the collar radius before the
    /// first excursion.
    pub delta_min_running: f64,
    /// Total winding, the exact sum of per-excursion windings.
    pub total_winding: f64,
    /// Accumulated inverse-distance functional (hyperbolic-distance proxy).
    pub dist_hyp: f64,
}

/// One simulated trajectory: summaries at every checkpoint.
#[derive(Debug, Clone)]
pub struct TrajectoryRun {
    /// RNG stream index of this trajectory.
    pub stream: u64,
    pub checkpoints: Vec<GeodesicSummary>,
    pub n_shortcut: u64,
    pub n_flagged: u64,
    pub excursions: Option<Vec<ExcursionRecord>>,
}

/// Fitted laws used by the deep-excursion shortcut below the b threshold.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ShortcutCalibration {
    /// log winding vs log D.
    pub winding_fit: ScalingFit,
    /// inverse-distance functional vs log D.
    pub inv_delta_fit: ScalingFit,
    /// duration / (2 (delta_entry - delta_min)) in the deep limit.
    pub duration_factor: f64,
}

/// Fit the shortcut laws from a small ODE ensemble above the threshold.
pub fn calibrate_shortcut(
    surface: &ProfileSurface,
    delta_entry: f64,
    tol: f64,
) -> Result<ShortcutCalibration> {
    let bs: Vec<f64> = (0..12)
        .map(|i| 1e-2 * (3e-6f64 / 1e-2).powf(i as f64 / 11.0))
        .collect();
    let mut wind_pts = Vec::new();
    let mut inv_pts = Vec::new();
    let mut duration_factor: f64 = 1.0;
    for (i, &b) in bs.iter().enumerate() {
        let rec = simulate_excursion(surface, delta_entry, b, tol)?;
        wind_pts.push((rec.d_value, rec.winding));
        inv_pts.push((rec.d_value.ln(), rec.inv_delta_integral));
        if i + 3 >= bs.len() {
            duration_factor = rec.duration / (2.0 * (delta_entry - rec.delta_min));
        }
    }
    Ok(ShortcutCalibration {
        winding_fit: crate::fit::fit_power_law(&wind_pts)?,
        inv_delta_fit: fit_linear(&inv_pts)?,
        duration_factor,
    })
}

impl ShortcutCalibration {
    /// Analytic-depth record for a deep entry; winding and the functional
    /// come from the fitted laws, flagged as shortcut values.
    pub fn record(
        &self,
        surface: &ProfileSurface,
        delta_entry: f64,
        b_entry: f64,
    ) -> Result<ExcursionRecord> {
        let delta_min = predict_delta_min(surface, delta_entry, b_entry)?;
        let d_value = 1.0 / delta_min;
        let duration = self.duration_factor * 2.0 * (delta_entry - delta_min);
        Ok(ExcursionRecord {
            b_entry,
            delta_entry,
            delta_min,
            d_value,
            duration,
            t_min: 0.5 * duration,
            winding: (self.winding_fit.intercept + self.winding_fit.slope * d_value.ln()).exp(),
            inv_delta_integral: self.inv_delta_fit.intercept
                + self.inv_delta_fit.slope * d_value.ln(),
            flags: ExcursionFlags {
                clairaut_shortcut: true,
                hit_floor: false,
            },
        })
    }
}

/// Options for one long-geodesic simulation.
#[derive(Debug, Clone)]
pub struct LongGeodesicOptions {
    pub tol: f64,
    /// Entries with b at or below this use the Clairaut shortcut.
    pub shortcut_b_threshold: f64,
    /// Ascending checkpoint times; the last one is the horizon T.
    pub checkpoints: Vec<f64>,
    /// Keep the per-excursion records (memory-heavy for long runs).
    pub collect_excursions: bool,
}

/// Log-spaced checkpoint grid, 20 per decade.
pub fn checkpoint_grid(t_min: f64, t_max: f64) -> Vec<f64> {
    let mut out = Vec::new();
    let n = (20.0 * (t_max / t_min).log10()).ceil() as usize;
    for i in 0..=n {
        let t = t_min * 10f64.powf(i as f64 / 20.0);
        if t > t_max * (1.0 + 1e-12) {
            break;
        }
        out.push(t.min(t_max));
    }
    if out.last().map_or(true, |&t| t < t_max) {
        out.push(t_max);
    }
    out
}

/// Simulate one surrogate geodesic to the last checkpoint. Excursion errors
/// become flagged events (depth from the Clairaut prediction) and never
/// abort the run.
pub fn simulate_long_geodesic(
    surface: &ProfileSurface,
    process: &mut ReturnProcess,
    calibration: &ShortcutCalibration,
    opts: &LongGeodesicOptions,
    stream: u64,
) -> Result<TrajectoryRun> {
    if opts.checkpoints.is_empty() {
        return Err(Error::Parameter("need at least one checkpoint".into()));
    }
    let t_end = *opts.checkpoints.last().expect("non-empty");
    let delta_entry = surface.collar_delta();

    let mut summaries = Vec::with_capacity(opts.checkpoints.len());
    let mut excursions = if opts.collect_excursions {
        Some(Vec::new())
    } else {
        None
    };
    let mut t = 0.0f64;
    let mut n_exc = 0u64;
    let mut delta_min_running = delta_entry;
    let mut total_winding = 0.0f64;
    let mut dist_hyp = 0.0f64;
    let mut n_shortcut = 0u64;
    let mut n_flagged = 0u64;
    let mut next_cp = 0usize;

    // record every checkpoint strictly below `upto` with current accumulators
    macro_rules! flush {
        ($upto:expr) => {
            while next_cp < opts.checkpoints.len() && opts.checkpoints[next_cp] < $upto {
                summaries.push(GeodesicSummary {
                    t: opts.checkpoints[next_cp],
                    n_excursions: n_exc,
                    delta_min_running,
                    total_winding,
                    dist_hyp,
                });
                next_cp += 1;
            }
        };
    }

    while t < t_end && next_cp < opts.checkpoints.len() {
        let (gap, b) = process.sample_return_event();
        t += gap;
        flush!(t.min(t_end) + f64::MIN_POSITIVE * 0.0);
        if t >= t_end {
            break;
        }

        let rec = if b <= opts.shortcut_b_threshold {
            n_shortcut += 1;
            calibration.record(surface, delta_entry, b)?
        } else {
            match simulate_excursion(surface, delta_entry, b, opts.tol) {
                Ok(rec) => {
                    if rec.flags.hit_floor {
                        n_flagged += 1;
                    }
                    rec
                }
                Err(_) => {
                    // flagged event: analytic depth, exit-time bound duration
                    n_flagged += 1;
                    let delta_min = predict_delta_min(surface, delta_entry, b)?;
                    ExcursionRecord {
                        b_entry: b,
                        delta_entry,
                        delta_min,
                        d_value: 1.0 / delta_min,
                        duration: 2.0 * delta_entry,
                        t_min: delta_entry,
                        winding: 0.0,
                        inv_delta_integral: 0.0,
                        flags: ExcursionFlags {
                            clairaut_shortcut: false,
                            hit_floor: true,
                        },
                    }
                }
            }
        };

        // the excursion's contributions land at its completion time
        let t_complete = t + rec.duration;
        flush!(t_complete.min(t_end) + f64::MIN_POSITIVE * 0.0);
        t = t_complete;
        if t >= t_end && next_cp >= opts.checkpoints.len() {
            break;
        }
        n_exc += 1;
        delta_min_running = delta_min_running.min(rec.delta_min);
        total_winding += rec.winding;
        dist_hyp += rec.inv_delta_integral;
        if let Some(list) = excursions.as_mut() {
            list.push(rec);
        }
    }
    // remaining checkpoints (including T itself) see the final accumulators
    while next_cp < opts.checkpoints.len() {
        summaries.push(GeodesicSummary {
            t: opts.checkpoints[next_cp],
            n_excursions: n_exc,
            delta_min_running,
            total_winding,
            dist_hyp,
        });
        next_cp += 1;
    }

    Ok(TrajectoryRun {
        stream,
        checkpoints: summaries,
        n_shortcut,
        n_flagged,
        excursions,
    })
}

/// Simulate an ensemble of trajectories in parallel with per-trajectory RNG
/// streams; the result order is the trajectory index, independent of worker
/// scheduling.
pub fn run_trajectory_ensemble(
    surface: &ProfileSurface,
    gap_law: GapLaw,
    b_law: EntryAngleLaw,
    master_seed: u64,
    n_trajectories: usize,
    opts: &LongGeodesicOptions,
) -> Result<Vec<TrajectoryRun>> {
    if n_trajectories == 0 {
        return Err(Error::Parameter("need at least one trajectory".into()));
    }
    let calibration = calibrate_shortcut(surface, surface.collar_delta(), opts.tol)?;
    (0..n_trajectories)
        .into_par_iter()
        .map(|i| {
            let mut process = ReturnProcess::with_stream(gap_law, b_law, master_seed, i as u64)?;
            simulate_long_geodesic(surface, &mut process, &calibration, opts, i as u64)
        })
        .collect()
}

/// Export `seed,T,n_excursions,delta_min_running,W,dist_hyp` rows for every
/// trajectory and checkpoint.
pub fn write_summary_csv<W: std::io::Write>(runs: &[TrajectoryRun], mut w: W) -> Result<()> {
    writeln!(w, "seed,T,n_excursions,delta_min_running,W,dist_hyp")?;
    for run in runs {
        for s in &run.checkpoints {
            writeln!(
                w,
                "{},{:.16e},{},{:.16e},{:.16e},{:.16e}",
                run.stream, s.t, s.n_excursions, s.delta_min_running, s.total_winding, s.dist_hyp
            )?;
        }
    }
    Ok(())
}

fn require_three_decades(runs: &[TrajectoryRun]) -> Result<(f64, f64)> {
    let cps = &runs
        .first()
        .ok_or_else(|| Error::Parameter("empty ensemble".into()))?
        .checkpoints;
    if cps.is_empty() {
        return Err(Error::InsufficientRange("no checkpoints".into()));
    }
    let t0 = cps.first().expect("non-empty").t;
    let t1 = cps.last().expect("non-empty").t;
    if t1 / t0 < 999.0 {
        return Err(Error::InsufficientRange(format!(
            "checkpoints span [{t0:.3e}, {t1:.3e}], need three decades"
        )));
    }
    Ok((t0, t1))
}

/// Containment of the running depth minimum in the two-sided window
/// [c^-1 T^-(1+eps)/r, c T^-(1-eps)/(2r)], plus the fitted depth exponent.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct WindowReport {
    pub containment_fraction: f64,
    pub per_trajectory_containment: Vec<f64>,
    /// Fitted exponent of -log(delta_min_running) vs log T (expect ~ 1/r).
    pub fitted_exponent: f64,
    pub fitted_exponent_ci: f64,
    pub lower_exponent: f64,
    pub upper_exponent: f64,
    pub window: AcceptanceWindow,
    pub n_trajectories: usize,
    pub n_checkpoints: usize,
}

/// Check the depth window over an ensemble (checkpoints must span three
/// decades).
pub fn max_excursion_window_check(
    runs: &[TrajectoryRun],
    window: &AcceptanceWindow,
    r: f64,
) -> Result<WindowReport> {
    window.validate()?;
    require_three_decades(runs)?;
    let lower_exponent = (1.0 + window.epsilon) / r;
    let upper_exponent = (1.0 - window.epsilon) / (2.0 * r);
    let mut per_traj = Vec::with_capacity(runs.len());
    let mut inside_total = 0usize;
    let mut total = 0usize;
    for run in runs {
        let mut inside = 0usize;
        for s in &run.checkpoints {
            let lo = window.c.recip() * s.t.powf(-lower_exponent);
            let hi = window.c * s.t.powf(-upper_exponent);
            if s.delta_min_running >= lo && s.delta_min_running <= hi {
                inside += 1;
            }
        }
        inside_total += inside;
        total += run.checkpoints.len();
        per_traj.push(inside as f64 / run.checkpoints.len() as f64);
    }
    // ensemble depth exponent: mean of log depth per checkpoint vs log T
    let n_cp = runs[0].checkpoints.len();
    let mut pts = Vec::with_capacity(n_cp);
    for j in 0..n_cp {
        let mean_log: f64 = runs
            .iter()
            .map(|r| r.checkpoints[j].delta_min_running.ln())
            .sum::<f64>()
            / runs.len() as f64;
        pts.push((runs[0].checkpoints[j].t.ln(), -mean_log));
    }
    let fit = fit_linear(&pts)?;
    Ok(WindowReport {
        containment_fraction: inside_total as f64 / total as f64,
        per_trajectory_containment: per_traj,
        fitted_exponent: fit.slope,
        fitted_exponent_ci: fit.slope_ci_halfwidth,
        lower_exponent,
        upper_exponent,
        window: *window,
        n_trajectories: runs.len(),
        n_checkpoints: n_cp,
    })
}

/// Linear-growth report for total winding and the hyperbolic-distance proxy.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct LinearityReport {
    pub winding_fit: ScalingFit,
    pub dist_hyp_fit: ScalingFit,
    /// Empirical two-sided band constants: max over checkpoints of
    /// max(value / (rate T), rate T / value) for the fitted mean rate.
    pub winding_band: f64,
    pub dist_hyp_band: f64,
}

/// Fit log W and log dist_hyp against log T over the ensemble means.
pub fn winding_and_distance_linearity(runs: &[TrajectoryRun]) -> Result<LinearityReport> {
    require_three_decades(runs)?;
    let n_cp = runs[0].checkpoints.len();
    let n = runs.len() as f64;
    let mut w_pts = Vec::new();
    let mut h_pts = Vec::new();
    for j in 0..n_cp {
        let t = runs[0].checkpoints[j].t;
        let w_mean: f64 = runs.iter().map(|r| r.checkpoints[j].total_winding).sum::<f64>() / n;
        let h_mean: f64 = runs.iter().map(|r| r.checkpoints[j].dist_hyp).sum::<f64>() / n;
        if w_mean > 0.0 {
            w_pts.push((t, w_mean));
        }
        if h_mean > 0.0 {
            h_pts.push((t, h_mean));
        }
    }
    let winding_fit = crate::fit::fit_power_law(&w_pts)?;
    let dist_hyp_fit = crate::fit::fit_power_law(&h_pts)?;
    let band = |pts: &[(f64, f64)]| -> f64 {
        let (t_last, v_last) = *pts.last().expect("non-empty fit input");
        let rate = v_last / t_last;
        pts.iter()
            .map(|&(t, v)| {
                let model = rate * t;
                (v / model).max(model / v)
            })
            .fold(1.0, f64::max)
    };
    Ok(LinearityReport {
        winding_band: band(&w_pts),
        dist_hyp_band: band(&h_pts),
        winding_fit,
        dist_hyp_fit,
    })
}

/// Comparison of the deepest-excursion height with the two-sided upper-half-
/// plane window (1/c) T^((1-eps)/3) < y_max < c T^((2+eps)/3), applicable to
/// the r = 3 profile where y ~ delta^-2.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SullivanReport {
    pub containment_fraction: f64,
    pub fitted_exponent: f64,
    pub lower_exponent: f64,
    pub upper_exponent: f64,
    pub window: AcceptanceWindow,
}

pub fn sullivan_comparison(
    runs: &[TrajectoryRun],
    surface: &ProfileSurface,
    window: &AcceptanceWindow,
) -> Result<SullivanReport> {
    if (surface.r() - 3.0).abs() > 1e-12 {
        return Err(Error::Parameter(format!(
            "the upper-half-plane comparison requires the r = 3 profile; got r = {}",
            surface.r()
        )));
    }
    window.validate()?;
    require_three_decades(runs)?;
    let lower_exponent = (1.0 - window.epsilon) / 3.0;
    let upper_exponent = (2.0 + window.epsilon) / 3.0;
    let mut inside = 0usize;
    let mut total = 0usize;
    for run in runs {
        for s in &run.checkpoints {
            let y_max = s.delta_min_running.powi(-2);
            let lo = window.c.recip() * s.t.powf(lower_exponent);
            let hi = window.c * s.t.powf(upper_exponent);
            if y_max > lo && y_max < hi {
                inside += 1;
            }
            total += 1;
        }
    }
    let n_cp = runs[0].checkpoints.len();
    let mut pts = Vec::with_capacity(n_cp);
    for j in 0..n_cp {
        let mean_log: f64 = runs
            .iter()
            .map(|r| r.checkpoints[j].delta_min_running.powi(-2).ln())
            .sum::<f64>()
            / runs.len() as f64;
        pts.push((runs[0].checkpoints[j].t.ln(), mean_log));
    }
    let fit = fit_linear(&pts)?;
    Ok(SullivanReport {
        containment_fraction: inside as f64 / total as f64,
        fitted_exponent: fit.slope,
        lower_exponent,
        upper_exponent,
        window: *window,
    })
}

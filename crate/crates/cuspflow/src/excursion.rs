//! Single cusp excursions: entry on the collar with angular component b,
//! integration until the geodesic returns to the entry level, and the
//! per-excursion quantities every scaling law downstream consumes -- minimum
//! cusp distance, exit time, winding number, and the inverse-distance
//! functional int dt / delta.
//!
//! The Clairaut quantity makes the depth analytic: a unit-speed entry at
//! x_entry with angular component b turns around exactly at
//! x_min = x_entry b^(1/r), which is the independent prediction the ODE
//! solution is checked against.

use crate::error::{Error, Result};
use crate::fit::{fit_linear, ScalingFit};
use crate::geometry::{PhaseState, ProfileSurface};
use crate::integrate::{
    integrate, IntegrationOptions, StopCondition, Trajectory, TrajectoryStatus,
};

/// Status markers for one excursion record.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct ExcursionFlags {
    /// Depth/winding obtained from the Clairaut shortcut instead of the ODE.
    pub clairaut_shortcut: bool,
    /// The trajectory reached the singular floor x_floor.
    pub hit_floor: bool,
}

/// One cusp excursion.
#[derive(Debug, Clone)]
pub struct ExcursionRecord {
    pub b_entry: f64,
    pub delta_entry: f64,
    pub delta_min: f64,
    /// D = 1 / delta_min.
    pub d_value: f64,
    pub duration: f64,
    /// Time of closest approach.
    pub t_min: f64,
    /// Net turns about the cusp, delta(tau_lift) / 2 pi.
    pub winding: f64,
    /// int dt / delta over the excursion.
    pub inv_delta_integral: f64,
    pub flags: ExcursionFlags,
}

/// Exit-time bound: every excursion leaves delta <= delta_entry within
/// 2 * delta_entry; 5% slack covers the delta-vs-x chart conversion.
pub const EXIT_TIME_FACTOR: f64 = 2.0 * 1.05;

/// Inward unit-speed entry state on the level delta = delta_entry with
/// angular component b (orientation convention b >= 0).
pub fn entry_state(
    surface: &ProfileSurface,
    delta_entry: f64,
    b_entry: f64,
) -> Result<(PhaseState, f64)> {
    if !(b_entry > 0.0 && b_entry < 1.0) {
        return Err(Error::Parameter(format!(
            "entry angular component must lie in (0, 1); got {b_entry}"
        )));
    }
    if !(delta_entry > 0.0 && delta_entry <= surface.collar_delta()) {
        return Err(Error::Parameter(format!(
            "entry level {delta_entry} outside (0, collar delta_0 = {}]",
            surface.collar_delta()
        )));
    }
    let x_entry = surface.inverse_cusp_distance(delta_entry)?;
    let a = -(1.0 - b_entry * b_entry).sqrt();
    Ok((surface.unit_speed_state(x_entry, a, b_entry)?, x_entry))
}

/// Integrate one excursion and return its record.
///
/// The excursion is the maximal trajectory segment with delta < delta_entry;
/// entry and exit are located by bisection on the level crossing (on x, which
/// is equivalent to bisection on delta by strict monotonicity). Errors with
/// [`Error::NonReturn`] if the geodesic has not re-crossed the entry level by
/// t = 4 * delta_entry; reaching the singular floor is flagged, not fatal.
pub fn simulate_excursion(
    surface: &ProfileSurface,
    delta_entry: f64,
    b_entry: f64,
    tol: f64,
) -> Result<ExcursionRecord> {
    let (record, _) = simulate_excursion_with_trajectory(surface, delta_entry, b_entry, tol)?;
    Ok(record)
}

/// As [`simulate_excursion`], also returning the integrated trajectory.
pub fn simulate_excursion_with_trajectory(
    surface: &ProfileSurface,
    delta_entry: f64,
    b_entry: f64,
    tol: f64,
) -> Result<(ExcursionRecord, Trajectory)> {
    let (start, x_entry) = entry_state(surface, delta_entry, b_entry)?;
    let opts = IntegrationOptions {
        tol,
        t_end: 4.0 * delta_entry,
        stop: StopCondition::ExitAbove { x_exit: x_entry },
        max_steps: 50_000_000,
        locate_turnings: true,
    };
    let traj = integrate(surface, &start, delta_entry, &opts)?;

    let last = traj.samples.last().expect("non-empty trajectory");
    let mut flags = ExcursionFlags::default();
    match traj.status {
        TrajectoryStatus::ExitedLevel => {}
        TrajectoryStatus::HitFloor => flags.hit_floor = true,
        TrajectoryStatus::ReachedTime => {
            return Err(Error::NonReturn {
                t_max: 4.0 * delta_entry,
            })
        }
    }

    // closest approach: the refined turning sample; deepest one if several
    let (t_min, delta_min) = traj
        .turning_indices
        .iter()
        .map(|&i| (traj.samples[i].t, traj.samples[i].delta))
        .min_by(|a, b| a.1.total_cmp(&b.1))
        .unwrap_or((last.t, last.delta));

    let duration = last.t;
    let winding = (last.state.tau_lift - traj.samples[0].state.tau_lift) / std::f64::consts::TAU;
    let inv_delta_integral = traj.integrate_observable(|m| 1.0 / m.delta);

    Ok((
        ExcursionRecord {
            b_entry,
            delta_entry,
            delta_min,
            d_value: 1.0 / delta_min,
            duration,
            t_min,
            winding,
            inv_delta_integral,
            flags,
        },
        traj,
    ))
}

/// Exact Clairaut depth prediction: the turning point sits at
/// x_min = x_entry * b^(1/r), returned as a cusp distance.
///
/// Admits b_entry = 1 (a turning point at the entry level itself).
pub fn predict_delta_min(surface: &ProfileSurface, delta_entry: f64, b_entry: f64) -> Result<f64> {
    if !(b_entry > 0.0 && b_entry <= 1.0) {
        return Err(Error::Parameter(format!(
            "angular component must lie in (0, 1]; got {b_entry}"
        )));
    }
    if !(delta_entry > 0.0 && delta_entry <= surface.collar_delta()) {
        return Err(Error::Parameter(format!(
            "entry level {delta_entry} outside (0, collar delta_0 = {}]",
            surface.collar_delta()
        )));
    }
    let x_entry = surface.inverse_cusp_distance(delta_entry)?;
    let x_min = x_entry * b_entry.powf(1.0 / surface.r());
    surface.cusp_distance(x_min)
}

/// Verdict of the discrete convexity check on t -> delta(t).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Convexity {
    Convex,
    NonConvex,
    /// Radial trajectory (a = +/-1): excluded by the convexity hypothesis.
    NotApplicable,
}

/// Checks that consecutive divided differences of delta(t) increase, i.e.
/// all interior second differences are positive. `slack` is the numerical
/// noise floor on a slope difference (0 for exact data; integrator samples
/// carry position noise of order 100 * tol).
pub fn check_convexity(traj: &Trajectory, slack: f64) -> Result<Convexity> {
    let n = traj.samples.len();
    if n < 5 {
        return Err(Error::InsufficientSamples { needed: 5, got: n });
    }
    // a(start) = +/-1 exactly when the angular component vanishes
    if traj.samples[0].state.tau_dot == 0.0 {
        return Ok(Convexity::NotApplicable);
    }
    let mut prev_slope: Option<f64> = None;
    for w in traj.samples.windows(2) {
        let dt = w[1].t - w[0].t;
        if dt <= 0.0 {
            continue;
        }
        let slope = (w[1].delta - w[0].delta) / dt;
        if let Some(p) = prev_slope {
            if slope - p <= -slack {
                return Ok(Convexity::NonConvex);
            }
        }
        prev_slope = Some(slope);
    }
    Ok(Convexity::Convex)
}

/// Both sides of the winding identity: the lifted angle increment (left) and
/// the sample quadrature of b / x^r (right). On the model surface
/// tau_dot = b / x^r exactly, so the two agree to quadrature accuracy.
pub fn winding_identity_check(surface: &ProfileSurface, traj: &Trajectory) -> (f64, f64) {
    let n = traj.samples.len();
    let lhs = if n == 0 {
        0.0
    } else {
        traj.samples[n - 1].state.tau_lift - traj.samples[0].state.tau_lift
    };
    let r = surface.r();
    let rhs = traj.integrate_observable(|m| {
        let xr = m.x.powf(r);
        let b = xr * m.tau_dot;
        b / xr
    });
    (lhs, rhs)
}

/// The delta-form of the winding integrand, int b / delta^r dt; agrees with
/// the x-form within a factor 1 + O(delta_0) on the chart.
pub fn winding_delta_integral(surface: &ProfileSurface, traj: &Trajectory) -> f64 {
    let r = surface.r();
    traj.integrate_observable(|m| {
        let b = m.x.powf(r) * m.tau_dot;
        b / m.delta.powf(r)
    })
}

/// Fit of the inverse-distance functional against log D over an ensemble.
/// Requires the ensemble to span at least two decades of D.
pub fn inverse_delta_functional(records: &[ExcursionRecord]) -> Result<ScalingFit> {
    if records.len() < 3 {
        return Err(Error::InsufficientSamples {
            needed: 3,
            got: records.len(),
        });
    }
    let d_min = records.iter().map(|r| r.d_value).fold(f64::MAX, f64::min);
    let d_max = records.iter().map(|r| r.d_value).fold(f64::MIN, f64::max);
    if d_max / d_min < 100.0 {
        return Err(Error::InsufficientRange(format!(
            "ensemble spans D in [{d_min:.3e}, {d_max:.3e}], need two decades"
        )));
    }
    let pts: Vec<(f64, f64)> = records
        .iter()
        .map(|r| (r.d_value.ln(), r.inv_delta_integral))
        .collect();
    fit_linear(&pts)
}

/// Entry angular component that reaches depth 1/D, from the Clairaut algebra.
pub fn b_for_target_depth(
    surface: &ProfileSurface,
    delta_entry: f64,
    d_target: f64,
) -> Result<f64> {
    let x_entry = surface.inverse_cusp_distance(delta_entry)?;
    let x_min = surface.inverse_cusp_distance(1.0 / d_target)?;
    let b = (x_min / x_entry).powf(surface.r());
    if !(b > 0.0 && b < 1.0) {
        return Err(Error::Domain(format!(
            "target depth 1/{d_target} is not below the entry level {delta_entry}"
        )));
    }
    Ok(b)
}

/// Export an ensemble as CSV:
/// `r,delta_entry,b_entry,delta_min,D,duration,winding,inv_delta_integral`.
pub fn write_ensemble_csv<W: std::io::Write>(
    surface: &ProfileSurface,
    records: &[ExcursionRecord],
    mut w: W,
) -> Result<()> {
    writeln!(
        w,
        "r,delta_entry,b_entry,delta_min,D,duration,winding,inv_delta_integral"
    )?;
    for rec in records {
        writeln!(
            w,
            "{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e}",
            surface.r(),
            rec.delta_entry,
            rec.b_entry,
            rec.delta_min,
            rec.d_value,
            rec.duration,
            rec.winding,
            rec.inv_delta_integral
        )?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::integrate::integrate_geodesic;

    fn surface() -> ProfileSurface {
        ProfileSurface::with_defaults(3.0).unwrap()
    }

    // Frozen oracle values: Clairaut reduction of the excursion to
    // one-dimensional quadratures in x (substitution x = x_min (1 + s^2)),
    // evaluated by adaptive quadrature at 1e-13 -- a path fully independent
    // of the ODE integrator.
    struct Oracle {
        r: f64,
        b: f64,
        delta_min: f64,
        duration: f64,
        winding: f64,
        inv_delta: f64,
    }

    const ORACLES: [Oracle; 4] = [
        Oracle {
            r: 3.0,
            b: 0.01,
            delta_min: 0.056_452_875_347_576,
            duration: 0.441_943_364_679_858,
            winding: 37.292_819_261_590_935,
            inv_delta: 3.540_625_150_105_812,
        },
        Oracle {
            r: 3.0,
            b: 0.3,
            delta_min: 0.175_559_888_550_516,
            duration: 0.259_612_842_288_669,
            winding: 3.602_671_383_280_140,
            inv_delta: 1.258_040_607_906_916,
        },
        Oracle {
            r: 2.5,
            b: 1e-3,
            delta_min: 0.016_926_097_959_012,
            duration: 0.521_126_397_189_535,
            winding: 66.474_325_338_077_591,
            inv_delta: 6.110_171_303_190_331,
        },
        Oracle {
            r: 4.0,
            b: 1e-3,
            delta_min: 0.045_212_241_651_407,
            duration: 0.434_975_988_962_340,
            winding: 935.393_222_936_142_934,
            inv_delta: 3.801_068_063_594_125,
        },
    ];

    #[test]
    fn matches_quadrature_oracle() {
        for o in &ORACLES {
            let s = ProfileSurface::with_defaults(o.r).unwrap();
            let rec = simulate_excursion(&s, s.collar_delta(), o.b, 1e-11).unwrap();
            let rel = |a: f64, b: f64| (a - b).abs() / b.abs();
            assert!(
                rel(rec.delta_min, o.delta_min) < 1e-7,
                "r={} b={}: delta_min {} vs {}",
                o.r,
                o.b,
                rec.delta_min,
                o.delta_min
            );
            assert!(
                rel(rec.duration, o.duration) < 1e-6,
                "r={} b={}: duration {} vs {}",
                o.r,
                o.b,
                rec.duration,
                o.duration
            );
            assert!(
                rel(rec.winding, o.winding) < 1e-6,
                "r={} b={}: winding {} vs {}",
                o.r,
                o.b,
                rec.winding,
                o.winding
            );
            assert!(
                rel(rec.inv_delta_integral, o.inv_delta) < 1e-5,
                "r={} b={}: inv_delta {} vs {}",
                o.r,
                o.b,
                rec.inv_delta_integral,
                o.inv_delta
            );
            assert!(!rec.flags.hit_floor && !rec.flags.clairaut_shortcut);
        }
    }

    #[test]
    fn exact_clairaut_example() {
        // entry at x = 0.5 with b = 0.4^3: the turning point is exactly
        // x = 0.2, a chart-independent algebraic fact
        let s = ProfileSurface::new(3.0, 1.0, 1e-12).unwrap();
        let delta_entry = s.cusp_distance(0.5).unwrap();
        let rec = simulate_excursion(&s, delta_entry, 0.064, 1e-11).unwrap();
        let dmin_expected = 0.200_287_426_851_538; // delta(0.2), frozen quadrature
        assert!(
            (rec.delta_min - dmin_expected).abs() < 1e-9,
            "delta_min {}",
            rec.delta_min
        );
        assert!((rec.duration - 0.754_190_129_843_336).abs() < 1e-7);
        assert!((rec.winding - 3.000_932_738_293_391).abs() < 1e-6);
        let predicted = predict_delta_min(&s, delta_entry, 0.064).unwrap();
        assert!((predicted - dmin_expected).abs() < 1e-12);
    }

    #[test]
    fn record_invariants_hold() {
        let s = surface();
        for &b in &[0.9, 0.5, 0.1, 1e-3, 1e-5] {
            let rec = simulate_excursion(&s, s.collar_delta(), b, 1e-10).unwrap();
            assert!(rec.delta_min <= rec.delta_entry);
            assert!(rec.t_min > 0.0 && rec.t_min < rec.duration);
            assert!(
                rec.duration <= EXIT_TIME_FACTOR * rec.delta_entry,
                "b={b}: duration {} vs bound {}",
                rec.duration,
                EXIT_TIME_FACTOR * rec.delta_entry
            );
            assert!(rec.winding >= 0.0);
            assert!(rec.inv_delta_integral >= rec.duration / rec.delta_entry);
            assert!((rec.d_value * rec.delta_min - 1.0).abs() < 1e-14);
        }
    }

    #[test]
    fn depth_matches_prediction_within_2_percent() {
        for &r in &[2.5, 3.0, 4.0] {
            let s = ProfileSurface::with_defaults(r).unwrap();
            for &b in &[0.5, 0.1, 1e-2, 1e-4, 1e-6] {
                let rec = simulate_excursion(&s, s.collar_delta(), b, 1e-11).unwrap();
                let pred = predict_delta_min(&s, s.collar_delta(), b).unwrap();
                let ratio = rec.delta_min / pred;
                assert!((0.98..=1.02).contains(&ratio), "r={r} b={b}: ratio {ratio}");
            }
        }
    }

    #[test]
    fn predict_edge_cases() {
        let s = surface();
        let d0 = s.collar_delta();
        // b = 1: no excursion, minimum at the entry level
        let p = predict_delta_min(&s, d0, 1.0).unwrap();
        assert!((p - d0).abs() < 1e-12);
        // x_min = 0.5 * (1e-6)^(1/3) = 0.005 on the wide chart
        let s2 = ProfileSurface::new(3.0, 1.0, 1e-12).unwrap();
        let de = s2.cusp_distance(0.5).unwrap();
        let p = predict_delta_min(&s2, de, 1e-6).unwrap();
        let expected = s2.cusp_distance(0.005).unwrap();
        assert!((p - expected).abs() < 1e-14);
        assert!(predict_delta_min(&s, d0, 0.0).is_err());
        assert!(predict_delta_min(&s, d0, 1.1).is_err());
        assert!(predict_delta_min(&s, 2.0 * d0, 0.5).is_err());
    }

    #[test]
    fn proposition_depth_bound() {
        // for b <= 1/R the reached depth obeys delta_min <= (3/2) R^{-1/r},
        // normalized by the entry level
        let s = surface();
        for &r_param in &[10.0, 100.0, 1e4] {
            let b = 1.0 / r_param;
            let pred = predict_delta_min(&s, s.collar_delta(), b).unwrap();
            let bound = 1.5 / r_param.powf(1.0 / s.r()) * s.collar_delta();
            assert!(pred <= bound, "R={r_param}: {pred} vs {bound}");
        }
    }

    #[test]
    fn convexity_on_excursions() {
        let s = surface();
        for &b in &[0.5, 0.05, 1e-3] {
            let (_, traj) =
                simulate_excursion_with_trajectory(&s, s.collar_delta(), b, 1e-10).unwrap();
            assert_eq!(
                check_convexity(&traj, 1e-7).unwrap(),
                Convexity::Convex,
                "b = {b}"
            );
        }
    }

    #[test]
    fn convexity_radial_not_applicable() {
        let s = surface();
        let start = s.unit_speed_state(s.x_collar(), -1.0, 0.0).unwrap();
        let traj = integrate_geodesic(&s, &start, 0.2, 1e-10).unwrap();
        assert_eq!(
            check_convexity(&traj, 0.0).unwrap(),
            Convexity::NotApplicable
        );
    }

    #[test]
    fn convexity_negative_control() {
        // synthetic concave delta(t): reuse a real trajectory's samples but
        // overwrite delta with a concave sequence
        let s = surface();
        let (_, mut traj) =
            simulate_excursion_with_trajectory(&s, s.collar_delta(), 0.3, 1e-9).unwrap();
        let n = traj.samples.len() as f64;
        for (i, sm) in traj.samples.iter_mut().enumerate() {
            let u = i as f64 / n;
            sm.delta = -(u - 0.5) * (u - 0.5); // concave parabola
        }
        assert_eq!(check_convexity(&traj, 0.0).unwrap(), Convexity::NonConvex);
    }

    #[test]
    fn convexity_needs_samples() {
        let s = surface();
        let (_, mut traj) =
            simulate_excursion_with_trajectory(&s, s.collar_delta(), 0.3, 1e-9).unwrap();
        traj.samples.truncate(4);
        assert!(matches!(
            check_convexity(&traj, 0.0),
            Err(Error::InsufficientSamples { .. })
        ));
    }

    #[test]
    fn winding_identity_exact_on_model() {
        let s = surface();
        for &b in &[0.3, 1e-2, 1e-4] {
            let (_, traj) =
                simulate_excursion_with_trajectory(&s, s.collar_delta(), b, 1e-10).unwrap();
            let (lhs, rhs) = winding_identity_check(&s, &traj);
            assert!(
                (lhs - rhs).abs() <= 1e-6 * lhs.abs(),
                "b={b}: lhs {lhs} rhs {rhs}"
            );
            // delta-form within the collar-size factor
            let dv = winding_delta_integral(&s, &traj);
            let ratio = dv / rhs;
            let d0 = s.collar_delta();
            assert!(
                (1.0 - 5.0 * d0..=1.0 + 5.0 * d0).contains(&ratio),
                "b={b}: delta/x ratio {ratio}"
            );
            // the delta-form is the smaller one since delta >= x
            assert!(dv <= rhs);
        }
    }

    #[test]
    fn winding_identity_radial_zero() {
        let s = surface();
        let start = s.unit_speed_state(s.x_collar(), -1.0, 0.0).unwrap();
        let traj = integrate_geodesic(&s, &start, 0.1, 1e-10).unwrap();
        let (lhs, rhs) = winding_identity_check(&s, &traj);
        assert_eq!(lhs, 0.0);
        assert_eq!(rhs, 0.0);
    }

    #[test]
    fn reflection_symmetry() {
        // reversing the angular orientation negates the winding and leaves
        // depth and duration unchanged
        let s = surface();
        let b = 0.2;
        let a = -(1.0f64 - b * b).sqrt();
        let x_e = s.x_collar();
        let opts = IntegrationOptions {
            tol: 1e-10,
            t_end: 4.0 * s.collar_delta(),
            stop: StopCondition::ExitAbove { x_exit: x_e },
            max_steps: 10_000_000,
            locate_turnings: true,
        };
        let fwd = integrate(
            &s,
            &s.unit_speed_state(x_e, a, b).unwrap(),
            s.collar_delta(),
            &opts,
        )
        .unwrap();
        let rev = integrate(
            &s,
            &s.unit_speed_state(x_e, a, -b).unwrap(),
            s.collar_delta(),
            &opts,
        )
        .unwrap();
        let (lf, lr) = (fwd.samples.last().unwrap(), rev.samples.last().unwrap());
        assert!((lf.t - lr.t).abs() < 1e-12, "duration asymmetry");
        assert!((lf.state.tau_lift + lr.state.tau_lift).abs() < 1e-12 * lf.state.tau_lift.abs());
        let dmin_f = fwd.samples[fwd.turning_indices[0]].delta;
        let dmin_r = rev.samples[rev.turning_indices[0]].delta;
        assert!((dmin_f - dmin_r).abs() < 1e-14);
    }

    #[test]
    fn doubling_depth_quadruples_winding() {
        // w ~ D^(r-1) = D^2 at r = 3: doubling D multiplies w by ~4
        let s = surface();
        let d0 = s.collar_delta();
        for &d_target in &[100.0, 400.0, 1600.0] {
            let b1 = b_for_target_depth(&s, d0, d_target).unwrap();
            let b2 = b_for_target_depth(&s, d0, 2.0 * d_target).unwrap();
            let w1 = simulate_excursion(&s, d0, b1, 1e-10).unwrap().winding;
            let w2 = simulate_excursion(&s, d0, b2, 1e-10).unwrap().winding;
            let ratio = w2 / w1;
            assert!(
                (3.6..=4.4).contains(&ratio),
                "D={d_target}: winding ratio {ratio}"
            );
        }
    }

    #[test]
    fn log_law_fit_over_two_decades() {
        let s = surface();
        let d0 = s.collar_delta();
        let mut records = Vec::new();
        let mut d = 10.0;
        while d <= 1e4 {
            let b = b_for_target_depth(&s, d0, d).unwrap();
            records.push(simulate_excursion(&s, d0, b, 1e-9).unwrap());
            d *= 1.8;
        }
        let fit = inverse_delta_functional(&records).unwrap();
        assert!(fit.slope > 0.0);
        assert!(fit.r_squared > 0.99, "r^2 = {}", fit.r_squared);
        // doubling D adds a near-constant increment (the fitted slope * ln 2)
        let increments: Vec<f64> = records
            .windows(2)
            .map(|w| {
                (w[1].inv_delta_integral - w[0].inv_delta_integral)
                    / (w[1].d_value.ln() - w[0].d_value.ln())
            })
            .collect();
        let mean = increments.iter().sum::<f64>() / increments.len() as f64;
        for inc in increments.iter().skip(2) {
            assert!(
                (inc / mean - 1.0).abs() < 0.10,
                "increment {inc} vs mean {mean}"
            );
        }
        // narrow ensembles are rejected
        let narrow: Vec<ExcursionRecord> = records.iter().take(3).cloned().collect();
        assert!(matches!(
            inverse_delta_functional(&narrow),
            Err(Error::InsufficientRange(_))
        ));
    }

    #[test]
    fn ensemble_csv_header() {
        let s = surface();
        let rec = simulate_excursion(&s, s.collar_delta(), 0.3, 1e-9).unwrap();
        let mut buf = Vec::new();
        write_ensemble_csv(&s, &[rec], &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.starts_with(
            "r,delta_entry,b_entry,delta_min,D,duration,winding,inv_delta_integral\n"
        ));
        assert_eq!(text.lines().count(), 2);
    }

    #[test]
    fn rejects_invalid_entries() {
        let s = surface();
        assert!(simulate_excursion(&s, s.collar_delta(), 0.0, 1e-10).is_err());
        assert!(simulate_excursion(&s, s.collar_delta(), 1.0, 1e-10).is_err());
        assert!(simulate_excursion(&s, s.collar_delta() * 3.0, 0.5, 1e-10).is_err());
        assert!(simulate_excursion(&s, -0.1, 0.5, 1e-10).is_err());
    }
}

//! Adaptive geodesic integration in chart coordinates.
//!
//! The integrated state is [x, tau_lift, x_dot, tau_dot, delta]: the cusp
//! distance rides along as a fifth component via the exact identity
//! d(delta)/dt = a = sqrt(E) x_dot, so every sample carries its distance to
//! the cusp without re-quadrature. The stepper is an embedded Dormand-Prince
//! 5(4) pair with per-component relative error control and, near the cusp, a
//! step cap of 0.1 x so the convexity timescale (~ delta) stays resolved.
//! Nothing in the chart state oscillates with the winding angle -- tau_lift
//! is monotone -- so the cost of an excursion grows only logarithmically with
//! its depth.

use crate::error::{Error, Result};
use crate::geometry::{PhaseState, ProfileSurface};

pub(crate) type StateVec = [f64; 5];

const I_X: usize = 0;
const I_TAU: usize = 1;
const I_XDOT: usize = 2;
const I_TAUDOT: usize = 3;
const I_DELTA: usize = 4;

/// Fraction of x allowed per step near the cusp.
const STEP_CAP_FRACTION: f64 = 0.1;
/// The controller aims below the documented tolerance so that accumulated
/// conserved-quantity drift stays within the 100 * tol contract.
const INTERNAL_TOL_FACTOR: f64 = 0.2;
const ABS_FLOOR: f64 = 1e-16;
const SAFETY: f64 = 0.9;
const MIN_SCALE: f64 = 0.2;
const MAX_SCALE: f64 = 5.0;

// Dormand-Prince 5(4) tableau.
const A2: [f64; 1] = [1.0 / 5.0];
const A3: [f64; 2] = [3.0 / 40.0, 9.0 / 40.0];
const A4: [f64; 3] = [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0];
const A5: [f64; 4] = [
    19372.0 / 6561.0,
    -25360.0 / 2187.0,
    64448.0 / 6561.0,
    -212.0 / 729.0,
];
const A6: [f64; 5] = [
    9017.0 / 3168.0,
    -355.0 / 33.0,
    46732.0 / 5247.0,
    49.0 / 176.0,
    -5103.0 / 18656.0,
];
const B5: [f64; 6] = [
    35.0 / 384.0,
    0.0,
    500.0 / 1113.0,
    125.0 / 192.0,
    -2187.0 / 6784.0,
    11.0 / 84.0,
];
// b5 - b4, applied to the seven stages for the embedded error estimate
const ERR: [f64; 7] = [
    35.0 / 384.0 - 5179.0 / 57600.0,
    0.0,
    500.0 / 1113.0 - 7571.0 / 16695.0,
    125.0 / 192.0 - 393.0 / 640.0,
    -2187.0 / 6784.0 + 92097.0 / 339200.0,
    11.0 / 84.0 - 187.0 / 2100.0,
    -1.0 / 40.0,
];

#[inline]
fn rhs(surface: &ProfileSurface, y: &StateVec) -> StateVec {
    let x = y[I_X];
    let (e, _g, e_prime, g_prime) = surface.metric_with_derivatives(x);
    let xd = y[I_XDOT];
    let td = y[I_TAUDOT];
    [
        xd,
        td,
        (-e_prime * xd * xd + g_prime * td * td) / (2.0 * e),
        // G'/G = 2r/x exactly; avoids the underflow-prone quotient
        -(2.0 * surface.r() / x) * xd * td,
        e.sqrt() * xd,
    ]
}

#[inline]
fn axpyn(y: &StateVec, h: f64, coeffs: &[f64], ks: &[StateVec]) -> StateVec {
    let mut out = *y;
    for (c, k) in coeffs.iter().zip(ks.iter()) {
        if *c != 0.0 {
            for i in 0..5 {
                out[i] += h * c * k[i];
            }
        }
    }
    out
}

/// One Dormand-Prince step of size h from (y, k1 = f(y)).
/// Returns (y_new, error_vector, k7 = f(y_new)).
fn dp5_step(surface: &ProfileSurface, y: &StateVec, k1: &StateVec, h: f64) -> (StateVec, StateVec, StateVec) {
    let k2 = rhs(surface, &axpyn(y, h, &A2, &[*k1]));
    let k3 = rhs(surface, &axpyn(y, h, &A3, &[*k1, k2]));
    let k4 = rhs(surface, &axpyn(y, h, &A4, &[*k1, k2, k3]));
    let k5 = rhs(surface, &axpyn(y, h, &A5, &[*k1, k2, k3, k4]));
    let k6 = rhs(surface, &axpyn(y, h, &A6, &[*k1, k2, k3, k4, k5]));
    let y_new = axpyn(y, h, &B5, &[*k1, k2, k3, k4, k5, k6]);
    let k7 = rhs(surface, &y_new);
    let stages = [*k1, k2, k3, k4, k5, k6, k7];
    let mut err = [0.0; 5];
    for (c, k) in ERR.iter().zip(stages.iter()) {
        for i in 0..5 {
            err[i] += h * c * k[i];
        }
    }
    (y_new, err, k7)
}

#[inline]
fn error_ratio(y: &StateVec, y_new: &StateVec, err: &StateVec, rtol: f64) -> f64 {
    let mut sum = 0.0;
    for i in 0..5 {
        let scale = ABS_FLOOR + rtol * y[i].abs().max(y_new[i].abs());
        let r = err[i] / scale;
        sum += r * r;
    }
    (sum / 5.0).sqrt()
}

/// Why an integration stopped.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TrajectoryStatus {
    /// Ran to the requested end time.
    ReachedTime,
    /// Crossed the exit level x = x_exit moving outward.
    ExitedLevel,
    /// Fell below the singular floor x_floor; flagged, never silent.
    HitFloor,
}

/// One accepted sample: time, phase state, cusp distance, and the full state
/// derivative (used for Hermite interpolation between samples).
#[derive(Debug, Clone, Copy)]
pub struct TrajectorySample {
    pub t: f64,
    pub state: PhaseState,
    pub delta: f64,
    pub dy: StateVec,
}

impl TrajectorySample {
    fn from_vec(t: f64, y: &StateVec, dy: StateVec) -> Self {
        TrajectorySample {
            t,
            state: PhaseState {
                x: y[I_X],
                tau_lift: y[I_TAU],
                x_dot: y[I_XDOT],
                tau_dot: y[I_TAUDOT],
            },
            delta: y[I_DELTA],
            dy,
        }
    }

    fn as_vec(&self) -> StateVec {
        [
            self.state.x,
            self.state.tau_lift,
            self.state.x_dot,
            self.state.tau_dot,
            self.delta,
        ]
    }
}

/// Interpolated state inside a step, for quadratures over a trajectory.
#[derive(Debug, Clone, Copy)]
pub struct MidPoint {
    pub x: f64,
    pub x_dot: f64,
    pub tau_dot: f64,
    pub delta: f64,
}

/// A time-sampled geodesic with conserved-quantity diagnostics.
#[derive(Debug, Clone)]
pub struct Trajectory {
    pub samples: Vec<TrajectorySample>,
    /// max_t |c(t) - c(0)| / max(|c(0)|, eps) for the Clairaut quantity c.
    pub clairaut_drift: f64,
    /// max_t |speed(t) - 1|.
    pub speed_drift: f64,
    pub status: TrajectoryStatus,
    /// Indices of samples inserted at turning points (x_dot = 0).
    pub turning_indices: Vec<usize>,
}

impl Trajectory {
    pub fn duration(&self) -> f64 {
        match (self.samples.first(), self.samples.last()) {
            (Some(a), Some(b)) => b.t - a.t,
            _ => 0.0,
        }
    }

    /// Composite Simpson over the samples, with the midpoint of each interval
    /// reconstructed by cubic Hermite interpolation from the stored state
    /// derivatives. Exact for the interpolant, so the error is the
    /// interpolation error of the accepted steps.
    pub fn integrate_observable<F: Fn(&MidPoint) -> f64>(&self, f: F) -> f64 {
        let mut total = 0.0;
        for w in self.samples.windows(2) {
            let (s0, s1) = (&w[0], &w[1]);
            let h = s1.t - s0.t;
            if h <= 0.0 {
                continue;
            }
            let y0 = s0.as_vec();
            let y1 = s1.as_vec();
            let mut ym = [0.0; 5];
            for i in 0..5 {
                ym[i] = 0.5 * (y0[i] + y1[i]) + 0.125 * h * (s0.dy[i] - s1.dy[i]);
            }
            let g0 = f(&MidPoint {
                x: y0[I_X],
                x_dot: y0[I_XDOT],
                tau_dot: y0[I_TAUDOT],
                delta: y0[I_DELTA],
            });
            let gm = f(&MidPoint {
                x: ym[I_X],
                x_dot: ym[I_XDOT],
                tau_dot: ym[I_TAUDOT],
                delta: ym[I_DELTA],
            });
            let g1 = f(&MidPoint {
                x: y1[I_X],
                x_dot: y1[I_XDOT],
                tau_dot: y1[I_TAUDOT],
                delta: y1[I_DELTA],
            });
            total += h / 6.0 * (g0 + 4.0 * gm + g1);
        }
        total
    }

    /// Export as CSV with header `t,x,tau_lift,x_dot,tau_dot,a,b,clairaut,delta`,
    /// floats at 17 significant digits.
    pub fn write_csv<W: std::io::Write>(&self, surface: &ProfileSurface, mut w: W) -> Result<()> {
        writeln!(w, "t,x,tau_lift,x_dot,tau_dot,a,b,clairaut,delta")?;
        for s in &self.samples {
            let (e, g) = surface.metric_coefficients(s.state.x)?;
            let a = e.sqrt() * s.state.x_dot;
            let xr = g.sqrt();
            let b = xr * s.state.tau_dot;
            writeln!(
                w,
                "{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e}",
                s.t,
                s.state.x,
                s.state.tau_lift,
                s.state.x_dot,
                s.state.tau_dot,
                a,
                b,
                xr * b,
                s.delta
            )?;
        }
        Ok(())
    }
}

/// What terminates an integration besides the end time.
#[derive(Debug, Clone, Copy)]
pub enum StopCondition {
    /// Run to t_end.
    AtTime,
    /// Stop when x crosses `x_exit` moving outward (x_dot > 0).
    ExitAbove { x_exit: f64 },
}

#[derive(Debug, Clone, Copy)]
pub struct IntegrationOptions {
    pub tol: f64,
    pub t_end: f64,
    pub stop: StopCondition,
    pub max_steps: usize,
    /// Record a refined sample at each turning point of x.
    pub locate_turnings: bool,
}

impl IntegrationOptions {
    pub fn to_time(t_end: f64, tol: f64) -> Self {
        IntegrationOptions {
            tol,
            t_end,
            stop: StopCondition::AtTime,
            max_steps: 20_000_000,
            locate_turnings: false,
        }
    }
}

fn validate_tol(tol: f64) -> Result<()> {
    if !(1e-13..=1e-6).contains(&tol) {
        return Err(Error::Parameter(format!(
            "integrator tolerance must lie in [1e-13, 1e-6]; got {tol}"
        )));
    }
    Ok(())
}

/// Integrate the geodesic flow from `start` for time `t_end`.
///
/// The start state must be unit speed within 1e-6. The returned trajectory
/// satisfies clairaut_drift <= 100 * tol and speed_drift <= 100 * tol under
/// normal termination; reaching x_floor flags the trajectory instead of
/// erroring.
pub fn integrate_geodesic(
    surface: &ProfileSurface,
    start: &PhaseState,
    t_end: f64,
    tol: f64,
) -> Result<Trajectory> {
    let delta0 = surface.cusp_distance(start.x)?;
    integrate(surface, start, delta0, &IntegrationOptions::to_time(t_end, tol))
}

/// Core engine shared by [`integrate_geodesic`] and the excursion solver.
/// `delta_start` seeds the integrated cusp-distance component.
pub(crate) fn integrate(
    surface: &ProfileSurface,
    start: &PhaseState,
    delta_start: f64,
    opts: &IntegrationOptions,
) -> Result<Trajectory> {
    validate_tol(opts.tol)?;
    if !(opts.t_end > 0.0) {
        return Err(Error::Parameter(format!(
            "integration horizon must be positive, got {}",
            opts.t_end
        )));
    }
    let speed = surface.speed_squared(start).sqrt();
    if (speed - 1.0).abs() > 1e-6 {
        return Err(Error::Domain(format!(
            "start state speed {speed} deviates from 1 beyond 1e-6"
        )));
    }
    let x_floor = surface.x_floor();
    let rtol = opts.tol * INTERNAL_TOL_FACTOR;

    let mut y: StateVec = [start.x, start.tau_lift, start.x_dot, start.tau_dot, delta_start];
    let mut t = 0.0;
    let mut k1 = rhs(surface, &y);

    let mut samples = Vec::with_capacity(256);
    samples.push(TrajectorySample::from_vec(t, &y, k1));
    let mut turning_indices = Vec::new();

    let mut h = (STEP_CAP_FRACTION * y[I_X]).min(opts.t_end) * 0.5;
    let mut status = TrajectoryStatus::ReachedTime;
    let mut steps = 0usize;

    'outer: while t < opts.t_end {
        if steps >= opts.max_steps {
            return Err(Error::StepFailure {
                t,
                h,
                detail: format!("step budget of {} exhausted", opts.max_steps),
            });
        }
        steps += 1;

        let cap = STEP_CAP_FRACTION * y[I_X];
        h = h.min(cap).min(opts.t_end - t);
        let h_min = 1e4 * f64::EPSILON * t.abs().max(1e-12);
        if h < h_min {
            // a cap this small means x collapsed to the floor scale
            if y[I_X] <= 2.0 * x_floor {
                status = TrajectoryStatus::HitFloor;
                break 'outer;
            }
            return Err(Error::StepFailure {
                t,
                h,
                detail: "step size underflow".into(),
            });
        }

        let (y_new, err, k7) = dp5_step(surface, &y, &k1, h);
        if !y_new[I_X].is_finite() || y_new[I_X] <= 0.0 {
            // stepped past the singularity; shrink hard
            h *= 0.25;
            continue;
        }
        let ratio = error_ratio(&y, &y_new, &err, rtol);
        if ratio > 1.0 {
            let scale = (SAFETY * ratio.powf(-0.2)).max(MIN_SCALE);
            h *= scale;
            continue;
        }

        // accepted: handle events inside (t, t + h]
        let t_new = t + h;

        // singular floor
        if y_new[I_X] <= x_floor {
            let (s, ys, dys) =
                refine_event(surface, &y, &k1, h, |yv, _| yv[I_X] - x_floor, false);
            samples.push(TrajectorySample::from_vec(t + s, &ys, dys));
            status = TrajectoryStatus::HitFloor;
            break 'outer;
        }

        // turning point of x inside the step
        if opts.locate_turnings && y[I_XDOT] < 0.0 && y_new[I_XDOT] >= 0.0 {
            let (s, ys, dys) =
                refine_event(surface, &y, &k1, h, |yv, _| yv[I_XDOT], true);
            if s > 0.0 && s < h {
                samples.push(TrajectorySample::from_vec(t + s, &ys, dys));
                turning_indices.push(samples.len() - 1);
            }
        }

        // exit level crossing, outward
        if let StopCondition::ExitAbove { x_exit } = opts.stop {
            if y_new[I_X] >= x_exit && y_new[I_XDOT] > 0.0 && y[I_X] < x_exit {
                let (s, ys, dys) =
                    refine_event(surface, &y, &k1, h, |yv, _| yv[I_X] - x_exit, false);
                samples.push(TrajectorySample::from_vec(t + s, &ys, dys));
                status = TrajectoryStatus::ExitedLevel;
                break 'outer;
            }
        }

        t = t_new;
        y = y_new;
        k1 = k7; // FSAL
        samples.push(TrajectorySample::from_vec(t, &y, k1));

        let scale = (SAFETY * ratio.max(1e-10).powf(-0.2)).clamp(MIN_SCALE, MAX_SCALE);
        h *= scale;
    }

    // conserved-quantity diagnostics over all samples
    let c0 = surface.clairaut(&samples[0].state);
    let denom = c0.abs().max(f64::MIN_POSITIVE);
    let mut clairaut_drift: f64 = 0.0;
    let mut speed_drift: f64 = 0.0;
    for s in &samples {
        let c = surface.clairaut(&s.state);
        clairaut_drift = clairaut_drift.max((c - c0).abs() / denom);
        let sp = surface.speed_squared(&s.state).sqrt();
        speed_drift = speed_drift.max((sp - 1.0).abs());
    }

    Ok(Trajectory {
        samples,
        clairaut_drift,
        speed_drift,
        status,
        turning_indices,
    })
}

/// Locate a zero of `g(y(s), dy(s))` for s in (0, h], where y(s) is one
/// Dormand-Prince step of size s from (y0, k1). Illinois regula falsi on s;
/// `rising` selects the sign convention (g < 0 before, > 0 after).
fn refine_event<G: Fn(&StateVec, &StateVec) -> f64>(
    surface: &ProfileSurface,
    y0: &StateVec,
    k1: &StateVec,
    h: f64,
    g: G,
    _rising: bool,
) -> (f64, StateVec, StateVec) {
    let eval = |s: f64| -> (StateVec, StateVec, f64) {
        if s <= 0.0 {
            return (*y0, *k1, g(y0, k1));
        }
        let (ys, _, k7) = dp5_step(surface, y0, k1, s);
        (ys, k7, g(&ys, &k7))
    };
    let (mut a, mut b) = (0.0f64, h);
    let (_, _, mut ga) = eval(a);
    let (yb, kb, gb) = eval(b);
    if ga == 0.0 {
        return (0.0, *y0, *k1);
    }
    if ga.signum() == gb.signum() {
        // no sign change at this resolution; keep the endpoint
        return (h, yb, kb);
    }
    let mut gb = gb;
    let mut side = 0i8;
    let mut best = (b, yb, kb);
    for _ in 0..80 {
        let mut c = (a * gb - b * ga) / (gb - ga);
        if !(c > a && c < b) {
            c = 0.5 * (a + b);
        }
        let (yc, kc, gc) = eval(c);
        best = (c, yc, kc);
        if gc == 0.0 || (b - a) < 1e-14 * h.max(1e-12) {
            break;
        }
        if gc.signum() == gb.signum() {
            b = c;
            gb = gc;
            if side == -1 {
                ga *= 0.5;
            }
            side = -1;
        } else {
            a = c;
            ga = gc;
            if side == 1 {
                gb *= 0.5;
            }
            side = 1;
        }
    }
    best
}

//! Exact differential geometry of the model cusp: the surface of revolution
//! of y = x^r (r > 2) about the x-axis, in chart coordinates (x, tau) with
//! embedding (x, x^r cos tau, x^r sin tau).
//!
//! The induced metric is ds^2 = E(x) dx^2 + G(x) dtau^2 with
//!
//! ```text
//! E(x) = 1 + r^2 x^(2r-2),      G(x) = x^(2r),
//! ```
//!
//! which gives every quantity below in closed form or as a one-dimensional
//! quadrature: the distance to the cusp delta(x) = int_0^x sqrt(E), the
//! Gaussian curvature K = -r(r-1) / (x^2 E^2), level-circle lengths, cusp
//! neighbourhood areas, and the geodesic equations. The Clairaut quantity
//! x^r sin(psi) = G(x) tau_dot is a first integral of the geodesic flow and
//! the main conserved-quantity diagnostic for the integrator.

use crate::error::{Error, Result};
use crate::numeric::{adaptive_quadrature, bracket_root};

/// A point of the unit tangent bundle in chart coordinates. `tau_lift` is the
/// unbounded lift of the angle; the wrapped angle is [`PhaseState::tau`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhaseState {
    pub x: f64,
    pub tau_lift: f64,
    pub x_dot: f64,
    pub tau_dot: f64,
}

impl PhaseState {
    /// Angle wrapped to [0, 2*pi).
    pub fn tau(&self) -> f64 {
        self.tau_lift.rem_euclid(std::f64::consts::TAU)
    }
}

/// Time derivative of a phase state (the geodesic equations' right-hand side).
#[derive(Debug, Clone, Copy)]
pub struct PhaseDerivative {
    pub x_dot: f64,
    pub tau_dot: f64,
    pub x_ddot: f64,
    pub tau_ddot: f64,
}

/// Components of a unit tangent vector in the orthonormal frame aligned with
/// the cusp: `a` along the gradient of the cusp distance, `b` along the level
/// circles, `clairaut = x^r * b` the conserved quantity.
#[derive(Debug, Clone, Copy)]
pub struct AngularData {
    pub a: f64,
    pub b: f64,
    pub clairaut: f64,
}

/// Maximum admissible relative quadrature tolerance.
pub const MAX_QUADRATURE_TOL: f64 = 1e-6;

/// The model cusp surface. Immutable after construction; all methods are pure
/// and safe to call from concurrent workers.
#[derive(Debug, Clone)]
pub struct ProfileSurface {
    r: f64,
    x_max: f64,
    quadrature_tol: f64,
    delta_max: f64,
    collar_delta: f64,
    collar_halfwidth: f64,
    x_collar: f64,
}

impl ProfileSurface {
    /// Build a surface with profile exponent `r > 2`, chart cutoff
    /// `x_max > 0` and relative quadrature tolerance in (0, 1e-6].
    ///
    /// The collar radius delta_0 is fixed at half the chart depth and the
    /// collar half-width at a tenth of delta_0, which keeps the excursion
    /// entry level well inside the chart.
    pub fn new(r: f64, x_max: f64, quadrature_tol: f64) -> Result<Self> {
        if !(r > 2.0) {
            return Err(Error::Parameter(format!(
                "profile exponent must satisfy r > 2 (strict); got r = {r}"
            )));
        }
        if !(x_max > 0.0) || !x_max.is_finite() {
            return Err(Error::Parameter(format!(
                "chart cutoff must satisfy x_max > 0; got {x_max}"
            )));
        }
        if !(quadrature_tol > 0.0 && quadrature_tol <= MAX_QUADRATURE_TOL) {
            return Err(Error::Parameter(format!(
                "quadrature tolerance must lie in (0, {MAX_QUADRATURE_TOL:.0e}]; got {quadrature_tol}"
            )));
        }
        let mut surface = ProfileSurface {
            r,
            x_max,
            quadrature_tol,
            delta_max: 0.0,
            collar_delta: 0.0,
            collar_halfwidth: 0.0,
            x_collar: 0.0,
        };
        surface.delta_max = surface.cusp_distance(x_max)?;
        surface.collar_delta = 0.5 * surface.delta_max;
        surface.collar_halfwidth = 0.1 * surface.collar_delta;
        surface.x_collar = surface.inverse_cusp_distance(surface.collar_delta)?;
        Ok(surface)
    }

    /// Default chart (x_max = 0.5) at quadrature tolerance 1e-12.
    pub fn with_defaults(r: f64) -> Result<Self> {
        ProfileSurface::new(r, 0.5, 1e-12)
    }

    pub fn r(&self) -> f64 {
        self.r
    }

    pub fn x_max(&self) -> f64 {
        self.x_max
    }

    pub fn quadrature_tol(&self) -> f64 {
        self.quadrature_tol
    }

    /// Cusp distance of the chart cutoff, delta(x_max).
    pub fn delta_max(&self) -> f64 {
        self.delta_max
    }

    /// Collar radius delta_0 where excursions start and end.
    pub fn collar_delta(&self) -> f64 {
        self.collar_delta
    }

    /// Collar half-width d, so the collar is delta in (delta_0 - d, delta_0 + d).
    pub fn collar_halfwidth(&self) -> f64 {
        self.collar_halfwidth
    }

    /// Profile coordinate of the collar level, x(delta_0).
    pub fn x_collar(&self) -> f64 {
        self.x_collar
    }

    /// Floor below which the chart is treated as singular (the metric
    /// degenerates at x = 0); trajectories reaching it are flagged.
    pub fn x_floor(&self) -> f64 {
        1e-9 * self.x_max
    }

    fn check_x(&self, x: f64, allow_zero: bool) -> Result<()> {
        let lower_ok = if allow_zero { x >= 0.0 } else { x > 0.0 };
        if !lower_ok || x > self.x_max || !x.is_finite() {
            return Err(Error::Domain(format!(
                "profile coordinate x = {x} outside {}0, x_max = {}]",
                if allow_zero { "[" } else { "(" },
                self.x_max
            )));
        }
        Ok(())
    }

    /// Metric coefficients (E, G) of ds^2 = E dx^2 + G dtau^2 at x.
    pub fn metric_coefficients(&self, x: f64) -> Result<(f64, f64)> {
        self.check_x(x, false)?;
        Ok(self.metric_unchecked(x))
    }

    #[inline]
    pub(crate) fn metric_unchecked(&self, x: f64) -> (f64, f64) {
        let r = self.r;
        let p = x.powf(2.0 * r - 3.0); // x^(2r-3), the lowest power needed
        let e = 1.0 + r * r * (p * x);
        let g = p * x * x * x;
        (e, g)
    }

    /// Metric and first derivatives (E, G, E', G') in one evaluation; the
    /// geodesic right-hand side needs all four.
    #[inline]
    pub(crate) fn metric_with_derivatives(&self, x: f64) -> (f64, f64, f64, f64) {
        let r = self.r;
        let p = x.powf(2.0 * r - 3.0);
        let e = 1.0 + r * r * (p * x);
        let g = p * x * x * x;
        let e_prime = 2.0 * r * r * (r - 1.0) * p;
        let g_prime = 2.0 * r * (p * x * x);
        (e, g, e_prime, g_prime)
    }

    /// Riemannian distance to the cusp, delta(x) = int_0^x sqrt(E(u)) du.
    pub fn cusp_distance(&self, x: f64) -> Result<f64> {
        self.check_x(x, true)?;
        if x == 0.0 {
            return Ok(0.0);
        }
        adaptive_quadrature(
            |u| self.metric_unchecked(u).0.sqrt(),
            0.0,
            x,
            self.quadrature_tol,
        )
    }

    /// Inverse of [`Self::cusp_distance`] by bracketed root finding.
    pub fn inverse_cusp_distance(&self, delta: f64) -> Result<f64> {
        if !(0.0..=self.delta_max_or_unset()).contains(&delta) || !delta.is_finite() {
            return Err(Error::Domain(format!(
                "cusp distance {delta} outside [0, delta(x_max) = {}]",
                self.delta_max_or_unset()
            )));
        }
        if delta == 0.0 {
            return Ok(0.0);
        }
        // delta(x) >= x, so the root lies in [0, min(delta, x_max)]
        let hi = delta.min(self.x_max);
        bracket_root(
            |x| self.cusp_distance(x).unwrap_or(f64::MAX) - delta,
            0.0,
            hi,
            1e-15 * self.x_max,
        )
    }

    /// During construction `delta_max` is not yet known; treat it as the
    /// chart upper bound estimate delta(x_max) <= x_max * sqrt(E(x_max)).
    fn delta_max_or_unset(&self) -> f64 {
        if self.delta_max > 0.0 {
            self.delta_max
        } else {
            self.x_max * self.metric_unchecked(self.x_max).0.sqrt()
        }
    }

    /// Gaussian curvature K(x) = -r(r-1) / (x^2 E(x)^2). Strictly negative,
    /// and K * delta^2 -> -r(r-1) as x -> 0.
    pub fn gaussian_curvature(&self, x: f64) -> Result<f64> {
        self.check_x(x, false)?;
        let r = self.r;
        let e = self.metric_unchecked(x).0;
        Ok(-r * (r - 1.0) / (x * x * e * e))
    }

    /// Length of the level circle delta = B: the embedded circle has radius
    /// x(B)^r, so the length is 2*pi*x(B)^r.
    pub fn level_length(&self, b: f64) -> Result<f64> {
        if !(b > 0.0) {
            return Err(Error::Domain(format!("level_length requires B > 0, got {b}")));
        }
        let x = self.inverse_cusp_distance(b)?;
        Ok(std::f64::consts::TAU * x.powf(self.r))
    }

    /// Area of the cusp neighbourhood delta <= B:
    /// vol = 2*pi * int_0^{x(B)} u^r sqrt(E(u)) du.
    pub fn cusp_volume(&self, b: f64) -> Result<f64> {
        if b == 0.0 {
            return Ok(0.0);
        }
        let x = self.inverse_cusp_distance(b)?;
        let v = adaptive_quadrature(
            |u| u.powf(self.r) * self.metric_unchecked(u).0.sqrt(),
            0.0,
            x,
            self.quadrature_tol,
        )?;
        Ok(std::f64::consts::TAU * v)
    }

    /// Squared speed of a phase state, E x_dot^2 + G tau_dot^2.
    pub fn speed_squared(&self, state: &PhaseState) -> f64 {
        let (e, g) = self.metric_unchecked(state.x);
        e * state.x_dot * state.x_dot + g * state.tau_dot * state.tau_dot
    }

    /// Clairaut quantity x^r b = G tau_dot of a phase state; constant along
    /// exact geodesics.
    pub fn clairaut(&self, state: &PhaseState) -> f64 {
        let g = self.metric_unchecked(state.x).1;
        g * state.tau_dot
    }

    /// Angular components (a, b) of a unit-speed state in the orthonormal
    /// frame (grad delta, J grad delta): a = sqrt(E) x_dot, b = x^r tau_dot.
    ///
    /// Errors if the speed deviates from 1 by more than 1e-6. Excursion
    /// entries are constructed with b >= 0; reflected states carry b < 0.
    pub fn angular_data(&self, state: &PhaseState) -> Result<AngularData> {
        self.check_x(state.x, false)?;
        let (e, g) = self.metric_unchecked(state.x);
        let speed_sq = e * state.x_dot * state.x_dot + g * state.tau_dot * state.tau_dot;
        if (speed_sq.sqrt() - 1.0).abs() > 1e-6 {
            return Err(Error::Domain(format!(
                "state speed {} deviates from 1 beyond 1e-6",
                speed_sq.sqrt()
            )));
        }
        let a = e.sqrt() * state.x_dot;
        let xr = x_pow_r(state.x, self.r);
        let b = xr * state.tau_dot;
        Ok(AngularData {
            a,
            b,
            clairaut: xr * b,
        })
    }

    /// Unit-speed state at profile coordinate x with prescribed angular
    /// components (a, b), a^2 + b^2 = 1: x_dot = a / sqrt(E), tau_dot = b / x^r.
    pub fn unit_speed_state(&self, x: f64, a: f64, b: f64) -> Result<PhaseState> {
        self.check_x(x, false)?;
        let norm = a * a + b * b;
        if (norm - 1.0).abs() > 1e-10 {
            return Err(Error::Parameter(format!(
                "angular components must satisfy a^2 + b^2 = 1 within 1e-10, got {norm}"
            )));
        }
        let e = self.metric_unchecked(x).0;
        Ok(PhaseState {
            x,
            tau_lift: 0.0,
            x_dot: a / e.sqrt(),
            tau_dot: b / x_pow_r(x, self.r),
        })
    }

    /// Geodesic equations of ds^2 = E dx^2 + G dtau^2:
    ///
    /// ```text
    /// x''   = (-E' x_dot^2 + G' tau_dot^2) / (2 E)
    /// tau'' = -(G'/G) x_dot tau_dot
    /// ```
    pub fn geodesic_rhs(&self, state: &PhaseState) -> Result<PhaseDerivative> {
        self.check_x(state.x, false)?;
        let (e, g, e_prime, g_prime) = self.metric_with_derivatives(state.x);
        Ok(PhaseDerivative {
            x_dot: state.x_dot,
            tau_dot: state.tau_dot,
            x_ddot: (-e_prime * state.x_dot * state.x_dot
                + g_prime * state.tau_dot * state.tau_dot)
                / (2.0 * e),
            tau_ddot: -(g_prime / g) * state.x_dot * state.tau_dot,
        })
    }
}

#[inline]
pub(crate) fn x_pow_r(x: f64, r: f64) -> f64 {
    x.powf(r)
}

#[cfg(test)]
mod tests {
    use super::*;

    // Brute-force composite-Simpson quadrature with interval doubling; the
    // production path uses adaptive Gauss-Kronrod, so this is an independent
    // oracle.
    fn simpson_oracle<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, tol: f64) -> f64 {
        let mut n = 64;
        let mut prev = f64::NAN;
        loop {
            let h = (b - a) / n as f64;
            let mut s = f(a) + f(b);
            for i in 1..n {
                let w = if i % 2 == 1 { 4.0 } else { 2.0 };
                s += w * f(a + i as f64 * h);
            }
            let v = s * h / 3.0;
            if (v - prev).abs() <= tol * v.abs() {
                return v;
            }
            prev = v;
            n *= 2;
            assert!(n <= 1 << 22, "simpson oracle did not converge");
        }
    }

    #[test]
    fn constructor_rejects_bad_parameters() {
        assert!(ProfileSurface::new(2.0, 0.5, 1e-12).is_err());
        assert!(ProfileSurface::new(1.5, 0.5, 1e-12).is_err());
        assert!(ProfileSurface::new(3.0, 0.0, 1e-12).is_err());
        assert!(ProfileSurface::new(3.0, -1.0, 1e-12).is_err());
        assert!(ProfileSurface::new(3.0, 0.5, 1e-5).is_err());
        assert!(ProfileSurface::new(3.0, 0.5, 0.0).is_err());
        assert!(ProfileSurface::new(2.000001, 0.5, 1e-12).is_ok());
    }

    #[test]
    fn metric_closed_form_values() {
        let s = ProfileSurface::new(3.0, 1.0, 1e-12).unwrap();
        let (e, g) = s.metric_coefficients(0.5).unwrap();
        assert!((e - 1.5625).abs() < 1e-15);
        assert!((g - 0.015625).abs() < 1e-15);

        let s = ProfileSurface::new(2.5, 1.0, 1e-12).unwrap();
        let (e, g) = s.metric_coefficients(1.0).unwrap();
        assert!((e - 7.25).abs() < 1e-15);
        assert!((g - 1.0).abs() < 1e-15);
    }

    #[test]
    fn metric_limit_at_cusp() {
        let s = ProfileSurface::new(3.0, 1.0, 1e-12).unwrap();
        let (e, _) = s.metric_coefficients(1e-8).unwrap();
        assert!((e - 1.0).abs() < 1e-15);
        assert!(s.metric_coefficients(0.0).is_err());
        assert!(s.metric_coefficients(1.0 + 1e-12).is_err());
    }

    #[test]
    fn cusp_distance_against_quadrature_oracle() {
        let s = ProfileSurface::new(3.0, 0.5, 1e-12).unwrap();
        // frozen oracle: adaptive quadrature at 1e-12 via an independent
        // integrator, int_0^0.1 sqrt(1 + 9 u^4) du
        let frozen = 0.100_008_998_875_350;
        let d = s.cusp_distance(0.1).unwrap();
        assert!((d - frozen).abs() < 1e-12, "delta(0.1) = {d}");
        // series check: delta ~ x + 0.9 x^5 - 1.125 x^9 for r = 3
        assert!((d - (0.1 + 0.9 * 0.1f64.powi(5))).abs() < 2e-9);
        assert!((d - (0.1 + 0.9 * 0.1f64.powi(5) - 1.125 * 0.1f64.powi(9))).abs() < 1e-12);
        // live simpson oracle
        let oracle = simpson_oracle(|u| (1.0 + 9.0 * u.powi(4)).sqrt(), 0.0, 0.1, 1e-13);
        assert!((d - oracle).abs() < 1e-12);
    }

    #[test]
    fn cusp_distance_basics() {
        let s = ProfileSurface::new(3.0, 0.5, 1e-12).unwrap();
        assert_eq!(s.cusp_distance(0.0).unwrap(), 0.0);
        for &x in &[0.01, 0.1, 0.3, 0.5] {
            assert!(s.cusp_distance(x).unwrap() >= x, "delta >= x fails at {x}");
        }
        // strictly increasing
        let mut prev = 0.0;
        for i in 1..=10 {
            let d = s.cusp_distance(0.05 * i as f64).unwrap();
            assert!(d > prev);
            prev = d;
        }
        assert!(s.cusp_distance(-0.1).is_err());
        assert!(s.cusp_distance(0.6).is_err());
    }

    #[test]
    fn inverse_cusp_distance_round_trip() {
        let s = ProfileSurface::new(3.0, 0.5, 1e-12).unwrap();
        assert_eq!(s.inverse_cusp_distance(0.0).unwrap(), 0.0);
        for &x in &[0.01, 0.1, 0.5] {
            let d = s.cusp_distance(x).unwrap();
            let back = s.inverse_cusp_distance(d).unwrap();
            assert!((back - x).abs() < 1e-10, "round trip at {x}: {back}");
        }
        // frozen inverse of the quadrature oracle above
        let x = s.inverse_cusp_distance(0.100_008_998_875_350).unwrap();
        assert!((x - 0.1).abs() < 1e-10);
        assert!(s.inverse_cusp_distance(-1e-9).is_err());
        assert!(s.inverse_cusp_distance(s.delta_max() + 1e-9).is_err());
    }

    #[test]
    fn curvature_closed_form_and_sign() {
        let s = ProfileSurface::new(3.0, 1.0, 1e-12).unwrap();
        let k = s.gaussian_curvature(1.0).unwrap();
        assert!((k - (-0.06)).abs() < 1e-15, "K(1) = {k}");
        for &x in &[1e-6, 1e-3, 0.1, 0.5, 1.0] {
            assert!(s.gaussian_curvature(x).unwrap() < 0.0);
        }
        assert!(s.gaussian_curvature(0.0).is_err());
    }

    #[test]
    fn curvature_matches_brioschi_finite_differences() {
        // Independent oracle: for an orthogonal metric with E, G functions of
        // x alone, K = -(1 / (2 sqrt(EG))) d/dx ( G' / sqrt(EG) ), evaluated
        // here entirely by central differences of the metric coefficients.
        for &r in &[2.5, 3.0, 4.0] {
            let s = ProfileSurface::new(r, 1.0, 1e-12).unwrap();
            for &x in &[0.3, 0.7, 1.0f64] {
                let g_over = |u: f64| {
                    let h = 1e-5 * u;
                    let gp = (s.metric_unchecked(u + h).1 - s.metric_unchecked(u - h).1)
                        / (2.0 * h);
                    let (e, g) = s.metric_unchecked(u);
                    gp / (e * g).sqrt()
                };
                let h = 1e-4 * x;
                let dd = (g_over(x + h) - g_over(x - h)) / (2.0 * h);
                let (e, g) = s.metric_unchecked(x);
                let k_fd = -dd / (2.0 * (e * g).sqrt());
                let k = s.gaussian_curvature(x).unwrap();
                assert!(
                    (k_fd - k).abs() < 1e-4 * k.abs(),
                    "Brioschi oracle at r = {r}, x = {x}: {k_fd} vs {k}"
                );
            }
        }
    }

    #[test]
    fn curvature_asymptotics_eq_one() {
        // K * delta^2 -> -r(r-1), within 0.1% already at x = 1e-3
        let s = ProfileSurface::new(3.0, 0.5, 1e-12).unwrap();
        let x = 1e-3;
        let k = s.gaussian_curvature(x).unwrap();
        let d = s.cusp_distance(x).unwrap();
        assert!((k * d * d / -6.0 - 1.0).abs() < 1e-3);
    }

    #[test]
    fn level_length_values_and_monotonicity() {
        let s = ProfileSurface::new(3.0, 1.0, 1e-12).unwrap();
        // circle through x = 0.5 has length 2 pi (0.5)^3
        let b = s.cusp_distance(0.5).unwrap();
        let l = s.level_length(b).unwrap();
        assert!((l - std::f64::consts::TAU * 0.125).abs() < 1e-10, "l = {l}");
        // l(B)/B^r -> 2 pi within 1% for B <= 0.01
        for &bb in &[0.01, 0.005, 0.001] {
            let ratio = s.level_length(bb).unwrap() / bb.powi(3);
            assert!(
                (ratio / std::f64::consts::TAU - 1.0).abs() < 0.01,
                "ratio at B = {bb}: {ratio}"
            );
        }
        let mut prev = 0.0;
        for i in 1..=8 {
            let l = s.level_length(0.05 * i as f64).unwrap();
            assert!(l > prev);
            prev = l;
        }
        assert!(s.level_length(0.0).is_err());
        assert!(s.level_length(s.delta_max() + 0.1).is_err());
    }

    #[test]
    fn cusp_volume_against_closed_form() {
        // For r = 3 the area integrand has antiderivative (1 + 9u^4)^{3/2}/54,
        // an independent closed-form oracle.
        let s = ProfileSurface::new(3.0, 0.5, 1e-12).unwrap();
        assert_eq!(s.cusp_volume(0.0).unwrap(), 0.0);
        for &b in &[0.1, 0.3, 0.5] {
            let x = s.inverse_cusp_distance(b).unwrap();
            let exact =
                std::f64::consts::TAU / 54.0 * ((1.0 + 9.0 * x.powi(4)).powf(1.5) - 1.0);
            let v = s.cusp_volume(b).unwrap();
            assert!(
                (v - exact).abs() < 1e-10 * exact,
                "vol({b}) = {v} vs closed form {exact}"
            );
        }
        let v = s.cusp_volume(0.1).unwrap();
        assert!((v - 1.570_584_363_241e-4).abs() < 1e-13, "vol(0.1) = {v}");
    }

    #[test]
    fn cusp_volume_leading_term() {
        // vol(B) (r+1) / (2 pi B^{r+1}) in [0.99, 1.01] for B <= 0.01
        for &r in &[2.5, 3.0, 4.0] {
            let s = ProfileSurface::new(r, 0.5, 1e-12).unwrap();
            for &b in &[0.01f64, 0.003] {
                let lead = std::f64::consts::TAU * b.powf(r + 1.0) / (r + 1.0);
                let ratio = s.cusp_volume(b).unwrap() / lead;
                assert!(
                    (0.99..=1.01).contains(&ratio),
                    "r = {r}, B = {b}: ratio {ratio}"
                );
            }
        }
    }

    #[test]
    fn angular_data_frame() {
        let s = ProfileSurface::new(3.0, 0.5, 1e-12).unwrap();
        // purely inward radial state
        let st = s.unit_speed_state(0.3, -1.0, 0.0).unwrap();
        let ad = s.angular_data(&st).unwrap();
        assert!((ad.a + 1.0).abs() < 1e-12);
        assert!(ad.b.abs() < 1e-15);
        // turning point: x_dot = 0, b = 1, clairaut = x^r
        let st = s.unit_speed_state(0.2, 0.0, 1.0).unwrap();
        let ad = s.angular_data(&st).unwrap();
        assert!((ad.b - 1.0).abs() < 1e-12);
        assert!((ad.clairaut - 0.2f64.powi(3)).abs() < 1e-15);
        // generic unit-speed states: a^2 + b^2 = 1 within 1e-10
        for i in 0..20 {
            let phi = 0.3 * i as f64;
            let st = s.unit_speed_state(0.25, phi.cos(), phi.sin()).unwrap();
            let ad = s.angular_data(&st).unwrap();
            assert!((ad.a * ad.a + ad.b * ad.b - 1.0).abs() < 1e-10);
        }
        // non-unit speed rejected
        let bad = PhaseState {
            x: 0.3,
            tau_lift: 0.0,
            x_dot: 2.0,
            tau_dot: 0.0,
        };
        assert!(s.angular_data(&bad).is_err());
    }

    #[test]
    fn geodesic_rhs_symmetry_and_convexity() {
        let s = ProfileSurface::new(3.0, 0.5, 1e-12).unwrap();
        // radial: tau_ddot = 0, motion stays radial
        let st = s.unit_speed_state(0.3, -1.0, 0.0).unwrap();
        let d = s.geodesic_rhs(&st).unwrap();
        assert_eq!(d.tau_ddot, 0.0);
        // turning point: x_ddot = (G'/2E) tau_dot^2 > 0
        let st = s.unit_speed_state(0.2, 0.0, 1.0).unwrap();
        let d = s.geodesic_rhs(&st).unwrap();
        assert!(d.x_ddot > 0.0);
        assert!(s
            .geodesic_rhs(&PhaseState {
                x: 0.0,
                tau_lift: 0.0,
                x_dot: 1.0,
                tau_dot: 0.0
            })
            .is_err());
    }

    #[test]
    fn collar_sits_inside_chart() {
        for &r in &[2.5, 3.0, 4.0] {
            let s = ProfileSurface::with_defaults(r).unwrap();
            assert!(s.collar_delta() > 0.0);
            assert!(s.collar_delta() + s.collar_halfwidth() < s.delta_max());
            assert!(s.x_collar() > 0.0 && s.x_collar() < s.x_max());
            let d = s.cusp_distance(s.x_collar()).unwrap();
            assert!((d - s.collar_delta()).abs() < 1e-10);
        }
        // frozen default-surface constants (r = 3, x_max = 0.5)
        let s = ProfileSurface::with_defaults(3.0).unwrap();
        assert!((s.delta_max() - 0.526_267_762_138_630).abs() < 1e-11);
        assert!((s.x_collar() - 0.262_028_640_791_039).abs() < 1e-10);
    }
}

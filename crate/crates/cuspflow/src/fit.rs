//! Log-log and linear least-squares fits. Every scaling-exponent claim in the
//! experiment suites reduces to one of these two regressions.

use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};

/// Result of a least-squares line fit, with a 95% normal-theory confidence
/// half-width on the slope.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ScalingFit {
    pub slope: f64,
    pub intercept: f64,
    pub r_squared: f64,
    pub n_points: usize,
    pub slope_ci_halfwidth: f64,
}

/// Ordinary least squares of v against u. Deterministic: no pivoting, plain
/// centred sums.
pub fn fit_linear(points: &[(f64, f64)]) -> Result<ScalingFit> {
    let n = points.len();
    if n < 3 {
        return Err(Error::InsufficientSamples { needed: 3, got: n });
    }
    let nf = n as f64;
    let mean_u = points.iter().map(|p| p.0).sum::<f64>() / nf;
    let mean_v = points.iter().map(|p| p.1).sum::<f64>() / nf;
    let mut suu = 0.0;
    let mut suv = 0.0;
    let mut svv = 0.0;
    for &(u, v) in points {
        let du = u - mean_u;
        let dv = v - mean_v;
        suu += du * du;
        suv += du * dv;
        svv += dv * dv;
    }
    if suu == 0.0 {
        return Err(Error::InsufficientRange(
            "all abscissae identical; slope undefined".into(),
        ));
    }
    let slope = suv / suu;
    let intercept = mean_v - slope * mean_u;
    let ss_res = (svv - slope * suv).max(0.0);
    let r_squared = if svv > 0.0 {
        (1.0 - ss_res / svv).clamp(0.0, 1.0)
    } else {
        1.0 // exactly constant data on a flat line
    };
    let slope_ci_halfwidth = if n > 2 {
        1.96 * (ss_res / ((n - 2) as f64) / suu).sqrt()
    } else {
        f64::INFINITY
    };
    Ok(ScalingFit {
        slope,
        intercept,
        r_squared,
        n_points: n,
        slope_ci_halfwidth,
    })
}

/// Least squares on (log u, log v): the slope is the fitted power-law
/// exponent. All coordinates must be strictly positive.
pub fn fit_power_law(points: &[(f64, f64)]) -> Result<ScalingFit> {
    if let Some(&(u, v)) = points.iter().find(|&&(u, v)| u <= 0.0 || v <= 0.0) {
        return Err(Error::Domain(format!(
            "fit_power_law requires positive coordinates, got ({u}, {v})"
        )));
    }
    let logged: Vec<(f64, f64)> = points.iter().map(|&(u, v)| (u.ln(), v.ln())).collect();
    fit_linear(&logged)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exact_power_law() {
        // v = 7 u^2 fits with slope exactly 2 and r^2 = 1
        let pts: Vec<(f64, f64)> = (1..=20)
            .map(|i| {
                let u = i as f64 * 0.5;
                (u, 7.0 * u * u)
            })
            .collect();
        let fit = fit_power_law(&pts).unwrap();
        assert!((fit.slope - 2.0).abs() < 1e-12, "slope {}", fit.slope);
        assert!((fit.intercept - 7.0f64.ln()).abs() < 1e-12);
        assert!((fit.r_squared - 1.0).abs() < 1e-12);
        // residuals are pure cancellation noise; the CI collapses with them
        assert!(fit.slope_ci_halfwidth < 1e-6);
    }

    #[test]
    fn nonpositive_input_rejected() {
        let pts = [(1.0, 2.0), (0.0, 3.0), (2.0, 4.0)];
        assert!(fit_power_law(&pts).is_err());
        let pts = [(1.0, 2.0), (2.0, -3.0), (3.0, 4.0)];
        assert!(fit_power_law(&pts).is_err());
    }

    #[test]
    fn too_few_points_rejected() {
        assert!(fit_linear(&[(1.0, 1.0), (2.0, 2.0)]).is_err());
    }

    #[test]
    fn noisy_line_recovers_slope() {
        // deterministic pseudo-noise, slope 1.5 intercept -0.3
        let pts: Vec<(f64, f64)> = (0..50)
            .map(|i| {
                let x = i as f64 * 0.1;
                let noise = ((i * 2654435761u64 % 1000) as f64 / 1000.0 - 0.5) * 0.01;
                (x, 1.5 * x - 0.3 + noise)
            })
            .collect();
        let fit = fit_linear(&pts).unwrap();
        assert!((fit.slope - 1.5).abs() < 0.01, "slope {}", fit.slope);
        assert!(fit.r_squared > 0.999);
    }

    #[test]
    fn r_squared_bounded() {
        // pure noise: r^2 near 0 but clamped into [0, 1]
        let pts: Vec<(f64, f64)> = (0..40)
            .map(|i| (i as f64, ((i * 48271 % 97) as f64) / 97.0))
            .collect();
        let fit = fit_linear(&pts).unwrap();
        assert!((0.0..=1.0).contains(&fit.r_squared));
    }
}

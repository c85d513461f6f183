//! Circle bump families: smooth-enough approximations of shrinking
//! characteristic functions. Member R is supported on an arc of width 1/R,
//! equals 1 on the inner half of its support, and climbs with a
//! Holder-continuous ramp of exponent theta, so its norms obey
//!
//! ```text
//! 1/(h R) <= ||f_R||_L1 <= h/R,        ||f_R||_theta <= h R^theta
//! ```
//!
//! for a recorded constant h > 1. The L1 norm is analytic (the invariant
//! measure of the circle maps is Lebesgue), which the effective-average
//! bounds rely on.

use crate::error::{Error, Result};

/// Generator of bump observables indexed by the shrink parameter R.
#[derive(Debug, Clone, Copy)]
pub struct BumpFamily {
    theta: f64,
    center: f64,
    norm_constant: f64,
}

/// One member: support arc [center - 1/(2R), center + 1/(2R)].
#[derive(Debug, Clone, Copy)]
pub struct CircleBump {
    center: f64,
    theta: f64,
    r_param: f64,
    half_support: f64,
    inner_half: f64,
}

impl BumpFamily {
    pub fn new(theta: f64, center: f64) -> Result<Self> {
        if !(theta > 0.0 && theta <= 1.0) {
            return Err(Error::Parameter(format!(
                "Holder exponent must lie in (0, 1]; got {theta}"
            )));
        }
        if !(0.0..1.0).contains(&center) {
            return Err(Error::Parameter(format!(
                "bump center must lie in [0, 1); got {center}"
            )));
        }
        // L1 * R = (1 + 1/(theta+1)) / 2 in [1/2, 1]; Holder norm <= (1 + 4^theta) R^theta
        let norm_constant = 2.0f64.max(1.0 + 4.0f64.powf(theta));
        Ok(BumpFamily {
            theta,
            center,
            norm_constant,
        })
    }

    pub fn theta(&self) -> f64 {
        self.theta
    }

    pub fn center(&self) -> f64 {
        self.center
    }

    /// The recorded constant h with 1/(hR) <= L1 <= h/R and Holder norm <= h R^theta.
    pub fn norm_constant(&self) -> f64 {
        self.norm_constant
    }

    pub fn member(&self, r_param: f64) -> Result<CircleBump> {
        if !(r_param >= 1.0) {
            return Err(Error::Parameter(format!(
                "bump parameter must satisfy R >= 1; got {r_param}"
            )));
        }
        Ok(CircleBump {
            center: self.center,
            theta: self.theta,
            r_param,
            half_support: 0.5 / r_param,
            inner_half: 0.25 / r_param,
        })
    }
}

#[inline]
pub fn circle_distance(x: f64, c: f64) -> f64 {
    let d = (x - c).abs();
    d.min(1.0 - d)
}

impl CircleBump {
    pub fn r_param(&self) -> f64 {
        self.r_param
    }

    pub fn half_support(&self) -> f64 {
        self.half_support
    }

    /// Evaluate at a circle point.
    #[inline]
    pub fn eval(&self, x: f64) -> f64 {
        self.eval_at_distance(circle_distance(x, self.center))
    }

    /// Evaluate from the circle distance to the center (the bump is even).
    #[inline]
    pub fn eval_at_distance(&self, d: f64) -> f64 {
        if d >= self.half_support {
            0.0
        } else if d <= self.inner_half {
            1.0
        } else {
            let u = (self.half_support - d) / (self.half_support - self.inner_half);
            u.powf(self.theta)
        }
    }

    /// Exact Lebesgue integral:
    /// 2 [ inner_half + ramp_width / (theta + 1) ] = (1 + 1/(theta+1)) / (2R).
    pub fn l1_norm(&self) -> f64 {
        2.0 * (self.inner_half + (self.half_support - self.inner_half) / (self.theta + 1.0))
    }

    /// Upper bound on the Holder-theta norm (sup plus seminorm):
    /// 1 + (4R)^theta.
    pub fn holder_norm(&self) -> f64 {
        1.0 + (4.0 * self.r_param).powf(self.theta)
    }
}

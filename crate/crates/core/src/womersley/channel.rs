//! Oscillatory flow between parallel plates at `y = +-b` driven by a
//! pressure difference `h` over length `L`.
//!
//! The complex velocity is `(G / (j rho omega)) (1 - cosh(k y) / cosh(k b))`
//! with `G = h / L` and `k = sqrt(j rho omega / mu)`. The Womersley number is
//! based on the half-height, `alpha = b sqrt(rho omega / mu)`.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ChannelReference {
    pub alpha: f64,
    pub half_height: f64,
    pub length: f64,
    pub mu: f64,
    pub rho: f64,
    pub h: f64,
}

impl ChannelReference {
    pub fn from_alpha(alpha: f64, rho: f64, mu: f64, half_height: f64, length: f64, h: f64) -> Result<Self> {
        if !(alpha >= 0.0 && alpha.is_finite() && rho > 0.0 && mu > 0.0 && half_height > 0.0 && length > 0.0) {
            return Err(Error::Invalid("channel reference needs alpha >= 0 and positive constants".into()));
        }
        Ok(Self {
            alpha,
            half_height,
            length,
            mu,
            rho,
            h,
        })
    }

    pub fn omega(&self) -> f64 {
        self.alpha * self.alpha * self.mu / (self.rho * self.half_height * self.half_height)
    }

    /// Steady centerline velocity `h b^2 / (2 mu L)`.
    pub fn steady_centerline(&self) -> f64 {
        self.h * self.half_height * self.half_height / (2.0 * self.mu * self.length)
    }

    /// Complex streamwise velocity at distance `y` from the centerline.
    pub fn velocity(&self, y: f64) -> Result<Complex64> {
        let b = self.half_height;
        if !(y.abs() <= b) {
            return Err(Error::OutOfRange(format!("y = {y} outside [-{b}, {b}]")));
        }
        let g = self.h / self.length;
        if self.alpha == 0.0 {
            return Ok(Complex64::new(g * (b * b - y * y) / (2.0 * self.mu), 0.0));
        }
        let rho_omega = self.rho * self.omega();
        let k = (Complex64::new(0.0, rho_omega / self.mu)).sqrt();
        // cosh(ky)/cosh(kb) written with decaying exponentials to avoid overflow
        let e = |s: f64| (-k * s).exp();
        let ratio = (-k * (b - y.abs())).exp() * (1.0 + e(2.0 * y.abs())) / (1.0 + e(2.0 * b));
        Ok(Complex64::new(0.0, -g / rho_omega) * (1.0 - ratio))
    }
}

/// Complex velocity at the centerline of a channel with `y = 0` on the axis.
pub fn channel_velocity(reference: &ChannelReference, y: f64) -> Result<Complex64> {
    reference.velocity(y)
}

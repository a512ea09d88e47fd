//! Oscillatory flow in a rigid circular pipe driven by a pressure
//! difference `h` over length `L`.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::bessel::{bessel_j0, bessel_j1, j_three_halves};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WomersleyReference {
    pub alpha: f64,
    pub radius: f64,
    pub length: f64,
    pub mu: f64,
    pub rho: f64,
    /// Traction magnitude imposed at the inlet.
    pub h: f64,
}

impl WomersleyReference {
    /// Reference for angular frequency `omega`; `alpha = R sqrt(rho omega / mu)`.
    pub fn from_omega(rho: f64, mu: f64, omega: f64, radius: f64, length: f64, h: f64) -> Result<Self> {
        if !(rho > 0.0 && mu > 0.0 && omega >= 0.0 && radius > 0.0 && length > 0.0) {
            return Err(Error::Invalid(
                "pipe reference needs rho, mu, radius, length > 0 and omega >= 0".into(),
            ));
        }
        Ok(Self {
            alpha: radius * (rho * omega / mu).sqrt(),
            radius,
            length,
            mu,
            rho,
            h,
        })
    }

    /// Reference at Womersley number `alpha`.
    pub fn from_alpha(alpha: f64, rho: f64, mu: f64, radius: f64, length: f64, h: f64) -> Result<Self> {
        if !(alpha >= 0.0 && alpha.is_finite()) {
            return Err(Error::Invalid(format!("alpha must be finite and non-negative, got {alpha}")));
        }
        Self::from_omega(rho, mu, alpha_to_omega(alpha, rho, mu, radius), radius, length, h)
            .map(|r| Self { alpha, ..r })
    }

    pub fn omega(&self) -> f64 {
        alpha_to_omega(self.alpha, self.rho, self.mu, self.radius)
    }

    /// Steady centerline velocity `h R^2 / (4 mu L)`.
    pub fn steady_centerline(&self) -> f64 {
        self.h * self.radius * self.radius / (4.0 * self.mu * self.length)
    }

    /// Steady flow rate `h pi R^4 / (8 mu L)`.
    pub fn steady_flow_rate(&self) -> f64 {
        self.h * PI * self.radius.powi(4) / (8.0 * self.mu * self.length)
    }

    fn prefactor(&self) -> Complex64 {
        Complex64::new(0.0, -self.h * self.radius * self.radius / (self.length * self.mu * self.alpha * self.alpha))
    }

    /// Complex axial velocity at radial position `r`.
    pub fn velocity(&self, r: f64) -> Result<Complex64> {
        if !(0.0..=self.radius).contains(&r) {
            return Err(Error::OutOfRange(format!("r = {r} outside [0, {}]", self.radius)));
        }
        if self.alpha == 0.0 {
            let v = self.h * (self.radius * self.radius - r * r) / (4.0 * self.mu * self.length);
            return Ok(Complex64::new(v, 0.0));
        }
        let c = j_three_halves() * self.alpha;
        let ratio = bessel_j0(c * (r / self.radius))? / bessel_j0(c)?;
        Ok(self.prefactor() * (1.0 - ratio))
    }

    /// Complex flow rate through a cross-section.
    pub fn flow_rate(&self) -> Result<Complex64> {
        if self.alpha == 0.0 {
            return Ok(Complex64::new(self.steady_flow_rate(), 0.0));
        }
        let c = j_three_halves() * self.alpha;
        let sqrt_j = Complex64::from_polar(1.0, 0.25 * PI);
        let bracket = 1.0 + 2.0 * sqrt_j * bessel_j1(c)? / (self.alpha * bessel_j0(c)?);
        Ok(self.prefactor() * PI * self.radius * self.radius * bracket)
    }

    /// `(r/R, Re u, Im u)` at `n` evenly spaced radii, with velocity
    /// normalized by the steady centerline value.
    pub fn profile_table(&self, n: usize) -> Result<Vec<(f64, f64, f64)>> {
        if n < 2 {
            return Err(Error::Invalid("profile needs at least 2 samples".into()));
        }
        let scale = self.steady_centerline();
        (0..n)
            .map(|k| {
                let s = k as f64 / (n - 1) as f64;
                let u = self.velocity((s * self.radius).min(self.radius))? / scale;
                Ok((s, u.re, u.im))
            })
            .collect()
    }
}

/// Angular frequency giving Womersley number `alpha` for radius `radius`.
pub fn alpha_to_omega(alpha: f64, rho: f64, mu: f64, radius: f64) -> f64 {
    alpha * alpha * mu / (rho * radius * radius)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn reference(alpha: f64) -> WomersleyReference {
        WomersleyReference::from_alpha(alpha, 1.0, 1.0, 1.0, 15.0, 1.0).unwrap()
    }

    fn gauss_legendre(n: usize) -> Vec<(f64, f64)> {
        (0..n)
            .map(|i| {
                let mut x = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
                let mut dp = 0.0;
                for _ in 0..100 {
                    let (mut p0, mut p1) = (1.0, x);
                    for k in 2..=n {
                        let p2 = ((2 * k - 1) as f64 * x * p1 - (k - 1) as f64 * p0) / k as f64;
                        p0 = p1;
                        p1 = p2;
                    }
                    dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
                    let dx = p1 / dp;
                    x -= dx;
                    if dx.abs() < 1e-16 {
                        break;
                    }
                }
                (x, 2.0 / ((1.0 - x * x) * dp * dp))
            })
            .collect()
    }

    #[test]
    fn steady_values() {
        let r = reference(0.0);
        assert!((r.velocity(0.0).unwrap().re - 1.0 / 60.0).abs() < 1e-16);
        assert_eq!(r.velocity(1.0).unwrap(), Complex64::new(0.0, 0.0));
        assert!((r.flow_rate().unwrap().re - PI / 120.0).abs() < 1e-16);
    }

    #[test]
    fn oracle_regressions() {
        let u0 = reference(2.0).velocity(0.0).unwrap();
        let want = Complex64::new(0.01072846085712820180, -0.008371880896937249589);
        assert!((u0 - want).norm() < 1e-12 * want.norm(), "{u0}");
        let u5 = reference(2.0).velocity(0.5).unwrap();
        let want = Complex64::new(0.00849080457071093310, -0.005823971184077663661);
        assert!((u5 - want).norm() < 1e-12 * want.norm(), "{u5}");
        let q = reference(4.0).flow_rate().unwrap();
        let want = Complex64::new(0.003823443278496162064, -0.008416340204668396738);
        assert!((q - want).norm() < 1e-12 * want.norm(), "{q}");
    }

    #[test]
    fn normalized_flow_rates() {
        let table = [
            (2f64.sqrt(), 0.897641063683923, -0.297977385506003),
            (2.0, 0.689791018449969, -0.452446061800637),
            (4.0, 0.146044775376995, -0.321480515115847),
            (8.0, 0.0201029641606763, -0.102850862793395),
            (16.0, 0.00263872675944048, -0.0284863882205235),
            (32.0, 0.000337595512176819, -0.00746718894358031),
        ];
        for (alpha, qr, qi) in table {
            let q = reference(alpha).flow_rate().unwrap() / (PI / 120.0);
            assert!((q.re - qr).abs() < 1e-12 && (q.im - qi).abs() < 1e-12, "alpha {alpha}: {q}");
        }
    }

    #[test]
    fn disc_integral_matches_flow_rate() {
        let nodes = gauss_legendre(64);
        for alpha in [2.0, 4.0, 8.0, 16.0] {
            let r = reference(alpha);
            let integral: Complex64 = nodes
                .iter()
                .map(|&(x, w)| {
                    let s = 0.5 * (x + 1.0);
                    r.velocity(s).unwrap() * (2.0 * PI * s * 0.5 * w)
                })
                .sum();
            let q = r.flow_rate().unwrap();
            assert!((integral - q).norm() <= 1e-8 * q.norm(), "alpha {alpha}: {integral} vs {q}");
        }
    }

    #[test]
    fn no_slip_and_steady_limit() {
        for alpha in [0.5, 2.0, 2f64.sqrt(), 4.0, 8.0, 16.0, 32.0] {
            assert!(reference(alpha).velocity(1.0).unwrap().norm() <= 1e-12);
        }
        let q = reference(1e-3).flow_rate().unwrap();
        assert!((q.re - PI / 120.0).abs() <= 1e-5 * PI / 120.0 && q.im.abs() <= 1e-5 * PI / 120.0);
        let u = reference(1e-3).velocity(0.3).unwrap();
        let steady = reference(0.0).velocity(0.3).unwrap();
        assert!((u - steady).norm() <= 1e-5 * steady.norm());
    }

    #[test]
    fn in_phase_flow_decays_faster() {
        let q: Vec<Complex64> = [8.0, 16.0, 32.0].iter().map(|&a| reference(a).flow_rate().unwrap()).collect();
        for k in 0..3 {
            assert!(q[k].re.abs() < q[k].im.abs());
        }
        for k in 0..2 {
            assert!(q[k + 1].re.abs() / q[k].re.abs() < q[k + 1].im.abs() / q[k].im.abs());
        }
    }

    #[test]
    fn alpha_omega_round_trip() {
        let r = WomersleyReference::from_omega(1.06, 0.04, 7.0, 0.8, 12.0, 1.0).unwrap();
        assert!((r.alpha - 0.8 * (1.06f64 * 7.0 / 0.04).sqrt()).abs() < 1e-13);
        assert!((r.omega() - 7.0).abs() < 1e-12);
        assert!(reference(2.0).velocity(1.5).is_err());
        assert!(WomersleyReference::from_alpha(-1.0, 1.0, 1.0, 1.0, 1.0, 1.0).is_err());
        let table = reference(0.0).profile_table(5).unwrap();
        assert_eq!(table[0], (0.0, 1.0, 0.0));
        assert_eq!(table[4].1, 0.0);
    }
}

//! Bessel functions of the first kind, orders 0 and 1, at complex argument.
//!
//! Arguments with `|z| <= SERIES_LIMIT` use the ascending power series with
//! compensated summation. The series loses roughly `exp(|z| - |Im z|)`
//! relative precision to cancellation, so the band near the real axis where
//! `|z| - |Im z| > SERIES_CANCELLATION_LIMIT` is evaluated by backward
//! recurrence instead. Beyond `SERIES_LIMIT` the Hankel large-argument
//! expansion is used.

use num_complex::Complex64;

use crate::error::{Error, Result};

/// Largest `|z|` accepted.
pub const MAX_ARGUMENT: f64 = 64.0;
/// Largest `|z|` evaluated by the power series.
pub const SERIES_LIMIT: f64 = 20.0;
/// Largest `|z| - |Im z|` evaluated by the power series.
pub const SERIES_CANCELLATION_LIMIT: f64 = 6.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Order {
    Zero,
    One,
}

impl Order {
    fn n(self) -> u32 {
        match self {
            Order::Zero => 0,
            Order::One => 1,
        }
    }
}

pub fn bessel_j0(z: Complex64) -> Result<Complex64> {
    bessel_j(Order::Zero, z)
}

pub fn bessel_j1(z: Complex64) -> Result<Complex64> {
    bessel_j(Order::One, z)
}

pub fn bessel_j(order: Order, z: Complex64) -> Result<Complex64> {
    let r = z.norm();
    if !r.is_finite() || r > MAX_ARGUMENT {
        return Err(Error::OutOfRange(format!(
            "Bessel argument |z| = {r} exceeds the supported {MAX_ARGUMENT}"
        )));
    }
    if r <= SERIES_LIMIT {
        if r - z.im.abs() <= SERIES_CANCELLATION_LIMIT {
            return Ok(series(order.n(), z));
        }
        return Ok(backward_recurrence(order.n(), z));
    }
    // J_n(-z) = (-1)^n J_n(z) keeps the expansion in the right half plane
    if z.re < 0.0 {
        let v = hankel(order.n(), -z);
        return Ok(if order == Order::One { -v } else { v });
    }
    Ok(hankel(order.n(), z))
}

#[derive(Default)]
struct Kahan {
    sum: Complex64,
    c: Complex64,
}

impl Kahan {
    fn add(&mut self, x: Complex64) {
        let y = x - self.c;
        let t = self.sum + y;
        self.c = (t - self.sum) - y;
        self.sum = t;
    }
}

fn series(n: u32, z: Complex64) -> Complex64 {
    let q = -z * z / 4.0;
    let mut term = if n == 0 { Complex64::new(1.0, 0.0) } else { z / 2.0 };
    let mut acc = Kahan::default();
    acc.add(term);
    for k in 1..500u32 {
        term *= q / f64::from(k * (k + n));
        acc.add(term);
        if term.norm() <= 1e-18 * acc.sum.norm() && f64::from(k) > z.norm() / 2.0 {
            break;
        }
    }
    acc.sum
}

/// Miller's algorithm: recur `J_{k-1} = (2k/z) J_k - J_{k+1}` downward from an
/// arbitrary seed and normalize with `exp(-j s z) = J_0 + 2 sum (-j s)^k J_k`,
/// `s = sign(Im z)`, whose terms do not cancel.
fn backward_recurrence(n: u32, z: Complex64) -> Complex64 {
    let start = 2 * ((z.norm() as usize + 40) / 2);
    let unit = if z.im >= 0.0 { Complex64::new(0.0, -1.0) } else { Complex64::new(0.0, 1.0) };
    let mut next = Complex64::new(0.0, 0.0);
    let mut current = Complex64::new(1e-30, 0.0);
    let mut norm = Complex64::new(0.0, 0.0);
    let mut power = unit.powu(start as u32);
    let mut j1 = Complex64::new(0.0, 0.0);
    for k in (1..=start).rev() {
        norm += 2.0 * power * current;
        power /= unit;
        let prev = current * (2.0 * k as f64) / z - next;
        next = current;
        current = prev;
        if k == 1 {
            j1 = next;
        }
        if current.norm() > 1e250 {
            current *= 1e-250;
            next *= 1e-250;
            norm *= 1e-250;
            j1 *= 1e-250;
        }
    }
    norm += current;
    let scale = (unit * z).exp() / norm;
    if n == 0 {
        current * scale
    } else {
        j1 * scale
    }
}

fn hankel(n: u32, z: Complex64) -> Complex64 {
    let mu = 4.0 * f64::from(n * n);
    let eight_z = 8.0 * z;
    let mut p = Complex64::new(1.0, 0.0);
    let mut q = Complex64::new(0.0, 0.0);
    let mut term = Complex64::new(1.0, 0.0);
    let mut last = f64::INFINITY;
    for k in 1..200u32 {
        let odd = f64::from(2 * k - 1);
        term *= (mu - odd * odd) / (f64::from(k) * eight_z);
        let size = term.norm();
        if size >= last {
            break;
        }
        last = size;
        // odd k feed Q, even k feed P, with alternating signs within each
        match k % 4 {
            1 => q += term,
            2 => p -= term,
            3 => q -= term,
            _ => p += term,
        }
        if size < 1e-17 {
            break;
        }
    }
    let chi = z - (f64::from(n) / 2.0 + 0.25) * std::f64::consts::PI;
    (2.0 / (std::f64::consts::PI * z)).sqrt() * (p * chi.cos() - q * chi.sin())
}

/// `j^(3/2)` on the principal branch, `exp(j 3 pi / 4)`.
pub fn j_three_halves() -> Complex64 {
    Complex64::from_polar(1.0, 0.75 * std::f64::consts::PI)
}

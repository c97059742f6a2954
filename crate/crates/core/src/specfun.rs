//! Bessel functions J_nu and I_nu for orders nu > -1, z >= 0.
//!
//! The power series is summed in double-double precision (see `dd`) so that
//! the cancellation in the alternating J series does not eat into the
//! 1e-12 relative accuracy target. Past the crossover the Hankel asymptotic
//! expansion takes over; I_nu switches to a log-scaled asymptotic form for
//! large arguments to dodge overflow.

use crate::dd::Dd;
use crate::error::{Error, Result};
use crate::gamma::ln_gamma;

use std::f64::consts::PI;

/// The type index nu > -1 of a Fourier-Bessel system.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Order(f64);

impl Order {
    pub fn new(value: f64) -> Result<Self> {
        if !(value > -1.0) || !value.is_finite() {
            return Err(Error::Domain(format!(
                "order must satisfy nu > -1, got {value}"
            )));
        }
        Ok(Order(value))
    }

    #[inline]
    pub fn value(self) -> f64 {
        self.0
    }

    /// True iff 2 nu is an integer >= -1 (nu = d/2 - 1 for integer d >= 1).
    pub fn is_half_integer(self) -> bool {
        let two = 2.0 * self.0;
        two >= -1.0 - 1e-12 && (two - two.round()).abs() < 1e-12
    }

    pub fn succ(self) -> Order {
        Order(self.0 + 1.0)
    }
}

/// Series/asymptotic crossover. Below the crossover the double-double power
/// series is exact to ~1e-26; above it the optimally truncated Hankel
/// expansion is below 1e-13 absolute for the orders in scope.
pub(crate) fn crossover(nu: f64) -> f64 {
    18.0_f64.max(2.0 * nu.abs())
}

/// J_nu(z) by the power series, accumulated in double-double.
fn bessel_j_series(nu: f64, z: f64) -> f64 {
    if z == 0.0 {
        return if nu == 0.0 {
            1.0
        } else if nu > 0.0 {
            0.0
        } else {
            f64::INFINITY
        };
    }
    // prefactor (z/2)^nu / Gamma(nu+1) carries no cancellation
    let prefactor = (nu * (z / 2.0).ln() - ln_gamma(nu + 1.0)).exp();
    let q = Dd::from_f64(z / 2.0);
    let q2 = q.mul(q);
    let mut term = Dd::from_f64(1.0);
    let mut sum = term;
    for k in 1..400 {
        let kf = k as f64;
        // divisor k (nu + k) kept in double-double: a rounded f64 divisor
        // would perturb each term by ~1e-16, which the cancellation amplifies
        term = term.mul(q2).div(Dd::from_sum(nu, kf).mul_f64(kf)).neg();
        sum = sum.add(term);
        if term.abs_hi() < 1e-30 * sum.abs_hi().max(1e-30) {
            break;
        }
    }
    prefactor * sum.to_f64()
}

/// J_nu(z)/z^nu by the power series; finite and smooth at z = 0.
/// Only meant for small z (used to kill the 0*inf cancellation in phi).
pub(crate) fn bessel_j_over_pow(nu: f64, z: f64) -> f64 {
    let prefactor = (-(nu * 2.0_f64.ln()) - ln_gamma(nu + 1.0)).exp();
    let q2 = z * z / 4.0;
    let mut term = 1.0;
    let mut sum = 1.0;
    for k in 1..200 {
        let kf = k as f64;
        term *= -q2 / (kf * (nu + kf));
        sum += term;
        if term.abs() < 1e-18 * sum.abs().max(1e-18) {
            break;
        }
    }
    prefactor * sum
}

/// Hankel's asymptotic expansion, truncated at the smallest term.
fn bessel_j_asymptotic(nu: f64, z: f64) -> f64 {
    let m = 4.0 * nu * nu;
    let omega = z - (0.5 * nu + 0.25) * PI;
    let mut p = 1.0;
    let mut q = 0.0;
    let mut a = 1.0; // a_k
    let mut last = f64::INFINITY;
    for k in 1..60 {
        let kf = k as f64;
        a *= (m - (2.0 * kf - 1.0) * (2.0 * kf - 1.0)) / (8.0 * z * kf);
        if a.abs() >= last {
            break; // asymptotic series started diverging
        }
        last = a.abs();
        match k % 4 {
            1 => q += a,
            2 => p -= a,
            3 => q -= a,
            _ => p += a,
        }
        if a.abs() < 1e-18 {
            break;
        }
    }
    (2.0 / (PI * z)).sqrt() * (p * omega.cos() - q * omega.sin())
}

/// Hot-path J_nu(z) without the Result wrapper; z must be >= 0.
#[inline]
pub(crate) fn bessel_j_raw(nu: f64, z: f64) -> f64 {
    if z < crossover(nu) {
        bessel_j_series(nu, z)
    } else {
        bessel_j_asymptotic(nu, z)
    }
}

/// Bessel function of the first kind, order nu > -1, z >= 0.
pub fn bessel_j(order: Order, z: f64) -> Result<f64> {
    if z < 0.0 || !z.is_finite() {
        return Err(Error::Domain(format!("bessel_j requires z >= 0, got {z}")));
    }
    Ok(bessel_j_raw(order.value(), z))
}

fn bessel_i_series(nu: f64, z: f64) -> f64 {
    if z == 0.0 {
        return if nu == 0.0 {
            1.0
        } else if nu > 0.0 {
            0.0
        } else {
            f64::INFINITY
        };
    }
    let prefactor = (nu * (z / 2.0).ln() - ln_gamma(nu + 1.0)).exp();
    let q2 = z * z / 4.0;
    let mut term = 1.0;
    let mut sum = 1.0;
    for k in 1..400 {
        let kf = k as f64;
        term *= q2 / (kf * (nu + kf));
        sum += term;
        if term < 1e-17 * sum {
            break;
        }
    }
    prefactor * sum
}

/// ln of the asymptotic correction series of I_nu: I ~ e^z/sqrt(2 pi z) * S.
fn bessel_i_asymptotic_series(nu: f64, z: f64) -> f64 {
    let m = 4.0 * nu * nu;
    let mut s = 1.0;
    let mut term = 1.0;
    let mut last = f64::INFINITY;
    for k in 1..60 {
        let kf = k as f64;
        term *= -(m - (2.0 * kf - 1.0) * (2.0 * kf - 1.0)) / (8.0 * z * kf);
        if term.abs() >= last {
            break;
        }
        last = term.abs();
        s += term;
        if term.abs() < 1e-18 {
            break;
        }
    }
    s
}

const I_LOG_SWITCH: f64 = 30.0;

/// ln I_nu(z) for z > 0, overflow-free.
pub fn bessel_i_log(order: Order, z: f64) -> Result<f64> {
    if z <= 0.0 || !z.is_finite() {
        return Err(Error::Domain(format!(
            "bessel_i_log requires z > 0, got {z}"
        )));
    }
    let nu = order.value();
    if z <= I_LOG_SWITCH.max(2.0 * nu.abs()) {
        Ok(bessel_i_series(nu, z).ln())
    } else {
        let s = bessel_i_asymptotic_series(nu, z);
        Ok(z - 0.5 * (2.0 * PI * z).ln() + s.ln())
    }
}

/// Modified Bessel function of the first kind; returns +inf on overflow
/// (use `bessel_i_log` in that regime).
pub fn bessel_i(order: Order, z: f64) -> Result<f64> {
    if z < 0.0 || !z.is_finite() {
        return Err(Error::Domain(format!("bessel_i requires z >= 0, got {z}")));
    }
    let nu = order.value();
    if z <= I_LOG_SWITCH.max(2.0 * nu.abs()) {
        Ok(bessel_i_series(nu, z))
    } else {
        Ok(bessel_i_log(order, z)?.exp())
    }
}

/// Closed trigonometric evaluation of J_{m+1/2}(z).
///
/// Upward recurrence from J_{-1/2}, J_{1/2} for z >= nu; Miller-style
/// downward recurrence normalized by J_{1/2} when z < nu, where the upward
/// direction is unstable.
pub fn bessel_j_half_integer(order: Order, z: f64) -> Result<f64> {
    if !order.is_half_integer() || (2.0 * order.value()).round() as i64 % 2 == 0 {
        return Err(Error::Domain(format!(
            "order {} is not an odd half-integer",
            order.value()
        )));
    }
    if z < 0.0 {
        return Err(Error::Domain(format!("z must be >= 0, got {z}")));
    }
    let nu = order.value();
    if z == 0.0 {
        if nu < 0.0 {
            return Err(Error::Domain(
                "half-integer form diverges at z = 0 for negative order".into(),
            ));
        }
        return Ok(0.0);
    }
    let amp = (2.0 / (PI * z)).sqrt();
    let j_minus = amp * z.cos(); // J_{-1/2}
    let j_plus = amp * z.sin(); // J_{+1/2}
    let m = ((2.0 * nu - 1.0) / 2.0).round() as i64; // nu = m + 1/2
    if m == -1 {
        return Ok(j_minus);
    }
    if m == 0 {
        return Ok(j_plus);
    }
    let m = m as usize;
    if z >= nu {
        // upward is stable in the oscillatory regime
        let mut prev = j_minus;
        let mut cur = j_plus;
        for k in 0..m {
            let ord = k as f64 + 0.5;
            let next = (2.0 * ord / z) * cur - prev;
            prev = cur;
            cur = next;
        }
        Ok(cur)
    } else {
        // downward recurrence with renormalization against J_{1/2}
        let start = m + 16 + (z as usize);
        let mut above = 0.0_f64;
        let mut cur = 1e-280_f64;
        let mut at_m = 0.0_f64;
        for k in (0..=start).rev() {
            let ord = k as f64 + 1.5;
            let below = (2.0 * ord / z) * cur - above;
            above = cur;
            cur = below;
            if k == m {
                at_m = cur;
            }
            if cur.abs() > 1e280 {
                cur *= 1e-280;
                above *= 1e-280;
                at_m *= 1e-280;
            }
        }
        // cur now holds the unnormalized J_{1/2}
        Ok(at_m * (j_plus / cur))
    }
}

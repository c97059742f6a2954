//! The sharp two-sided bound expressions: interval heat and subordinated
//! envelopes, long-time envelopes, ball envelopes, the rough Gaussian bound,
//! and the parametric integral estimate used to derive them.

use crate::error::{Error, Result};
use crate::quad::adaptive_abs;
use crate::specfun::Order;
use crate::spectrum::BasisCache;

use std::f64::consts::PI;

/// Lower/upper envelope values together with the Gaussian-rate constant
/// used; for the single-expression estimates lower == upper and the constant
/// is 1.
#[derive(Clone, Copy, Debug)]
pub struct EnvelopeBounds {
    pub lower: f64,
    pub upper: f64,
    pub constant_c: f64,
}

/// (xy)^{-nu-1/2} (xy/s & 1)^{nu+1/2} with the xy <= s branch cancelled
/// analytically, so the x -> 0 limit stays finite.
#[inline]
fn oscillation_factor(nu: f64, xy: f64, s: f64) -> f64 {
    if xy <= s {
        s.powf(-nu - 0.5)
    } else {
        xy.powf(-nu - 0.5)
    }
}

/// Short-time heat envelope on the interval:
/// (xy)^{-nu-1/2} (xy/t & 1)^{nu+1/2} [(1-x)(1-y)/t & 1] t^{-1/2}
/// times e^{-c(x-y)^2/t} (lower) or e^{-(x-y)^2/(ct)} (upper).
pub fn heat_envelope_interval(
    order: Order,
    t: f64,
    x: f64,
    y: f64,
    c: f64,
) -> Result<EnvelopeBounds> {
    if !(t > 0.0) {
        return Err(Error::Domain(format!("t={t} must be positive")));
    }
    if !(c > 1.0) {
        return Err(Error::Domain(format!("c={c} must exceed 1")));
    }
    if !((0.0..=1.0).contains(&x) && (0.0..=1.0).contains(&y)) {
        return Err(Error::Domain(format!("(x,y)=({x},{y}) outside [0,1]^2")));
    }
    let nu = order.value();
    let common = oscillation_factor(nu, x * y, t)
        * ((1.0 - x) * (1.0 - y) / t).min(1.0)
        / t.sqrt();
    let d2 = (x - y) * (x - y);
    Ok(EnvelopeBounds {
        lower: common * (-c * d2 / t).exp(),
        upper: common * (-d2 / (c * t)).exp(),
        constant_c: c,
    })
}

/// Short-time subordinated envelope on the interval (alpha in (0,2)); the
/// estimate is a plain comparability, so a single value is returned.
pub fn subordinated_envelope_interval(
    order: Order,
    alpha: f64,
    t: f64,
    x: f64,
    y: f64,
) -> Result<f64> {
    if !(alpha > 0.0 && alpha < 2.0) {
        return Err(Error::Domain(format!(
            "alpha={alpha} outside (0, 2); at alpha = 2 use heat_envelope_interval"
        )));
    }
    if !(t > 0.0) {
        return Err(Error::Domain(format!("t={t} must be positive")));
    }
    if !((0.0..=1.0).contains(&x) && (0.0..=1.0).contains(&y)) {
        return Err(Error::Domain(format!("(x,y)=({x},{y}) outside [0,1]^2")));
    }
    let nu = order.value();
    let s = t.powf(2.0 / alpha) + (x - y) * (x - y);
    Ok(oscillation_factor(nu, x * y, s)
        * ((1.0 - x) * (1.0 - y) / s).min(1.0)
        * t
        * s.powf(-(alpha + 1.0) / 2.0))
}

/// Long-time envelope (1-x)(1-y) e^{-t lambda_1^alpha}; underflows to 0 for
/// very large t, see `longtime_envelope_ln`.
pub fn longtime_envelope(
    order: Order,
    alpha: f64,
    t: f64,
    x: f64,
    y: f64,
    cache: &BasisCache,
) -> Result<f64> {
    Ok(longtime_envelope_ln(order, alpha, t, x, y, cache)?.exp())
}

/// ln of the long-time envelope (-inf at the boundary); the log form keeps
/// ratios meaningful when e^{-t lambda_1^alpha} is below the f64 range.
pub fn longtime_envelope_ln(
    order: Order,
    alpha: f64,
    t: f64,
    x: f64,
    y: f64,
    cache: &BasisCache,
) -> Result<f64> {
    if !(alpha > 0.0 && alpha <= 2.0) {
        return Err(Error::Domain(format!("alpha={alpha} outside (0, 2]")));
    }
    if !(t > 0.0) {
        return Err(Error::Domain(format!("t={t} must be positive")));
    }
    if !((0.0..=1.0).contains(&x) && (0.0..=1.0).contains(&y)) {
        return Err(Error::Domain(format!("(x,y)=({x},{y}) outside [0,1]^2")));
    }
    let lambda1 = cache.get(order, 1)?.zeros()[0];
    Ok(((1.0 - x) * (1.0 - y)).ln() - t * lambda1.powf(alpha))
}

/// Envelopes for the Dirichlet kernels on the unit ball of dimension d,
/// parameterized by the radii |x|, |y| and the distance |x-y|.
/// alpha = 2 gives the Gaussian two-sided pair; alpha < 2 gives the single
/// comparable expression in both fields.
#[allow(clippy::too_many_arguments)]
pub fn ball_envelopes(
    d: u32,
    alpha: f64,
    t: f64,
    rx: f64,
    ry: f64,
    dist: f64,
    c: f64,
) -> Result<EnvelopeBounds> {
    if d < 1 {
        return Err(Error::Domain("dimension d must be >= 1".into()));
    }
    if !(alpha > 0.0 && alpha <= 2.0) {
        return Err(Error::Domain(format!("alpha={alpha} outside (0, 2]")));
    }
    if !(t > 0.0) {
        return Err(Error::Domain(format!("t={t} must be positive")));
    }
    if !((0.0..=1.0).contains(&rx) && (0.0..=1.0).contains(&ry)) {
        return Err(Error::Domain(format!(
            "radii ({rx}, {ry}) outside [0, 1]"
        )));
    }
    // |x - y| must be realizable by points at the given radii
    let eps = 1e-12;
    if dist < (rx - ry).abs() - eps || dist > rx + ry + eps {
        return Err(Error::Domain(format!(
            "distance {dist} violates the triangle inequality for radii {rx}, {ry}"
        )));
    }
    let boundary = (1.0 - rx) * (1.0 - ry);
    if (alpha - 2.0).abs() < 1e-12 {
        if !(c > 1.0) {
            return Err(Error::Domain(format!("c={c} must exceed 1")));
        }
        let common = (boundary / t).min(1.0) * t.powf(-(d as f64) / 2.0);
        Ok(EnvelopeBounds {
            lower: common * (-c * dist * dist / t).exp(),
            upper: common * (-dist * dist / (c * t)).exp(),
            constant_c: c,
        })
    } else {
        let s = t.powf(2.0 / alpha) + dist * dist;
        let v = (boundary / s).min(1.0) * t * s.powf(-(d as f64 + alpha) / 2.0);
        Ok(EnvelopeBounds {
            lower: v,
            upper: v,
            constant_c: 1.0,
        })
    }
}

/// Crude global upper bound for the ball heat kernel:
/// (4 pi t)^{-d/2} e^{-dist^2/(4t)}.
pub fn rough_gaussian_bound(d: u32, t: f64, dist: f64) -> Result<f64> {
    if d < 1 || !(t > 0.0) || !(dist >= 0.0) {
        return Err(Error::Domain(format!(
            "rough_gaussian_bound needs d >= 1, t > 0, dist >= 0 (got d={d}, t={t}, dist={dist})"
        )));
    }
    Ok((4.0 * PI * t).powf(-(d as f64) / 2.0) * (-dist * dist / (4.0 * t)).exp())
}

fn lemma_domain_check(gamma: f64, eta: f64, a: f64, b: f64, d: f64) -> Result<()> {
    if !(gamma > eta + 1.0 && eta + 1.0 > 0.0) {
        return Err(Error::Domain(format!(
            "need gamma > eta + 1 > 0, got gamma={gamma}, eta={eta}"
        )));
    }
    if !(0.0 < b && b < a && a < d) {
        return Err(Error::Domain(format!(
            "need 0 < B < A < D, got B={b}, A={a}, D={d}"
        )));
    }
    Ok(())
}

/// Closed comparability estimate for the parametric integral:
/// 1 / ((D-B) A^{eta+1} (A-B)^{gamma-eta-1}).
pub fn lemma_int_estimate(gamma: f64, eta: f64, a: f64, b: f64, d: f64) -> Result<f64> {
    lemma_domain_check(gamma, eta, a, b, d)?;
    Ok(1.0 / ((d - b) * a.powf(eta + 1.0) * (a - b).powf(gamma - eta - 1.0)))
}

/// int_{-1}^{1} (1-s^2)^eta / ((D - B s)(A - B s)^gamma) ds by adaptive
/// quadrature. Both endpoints are substituted s = +-(1 - u^p) with the
/// power p chosen so the (1-s^2)^eta endpoint singularity becomes
/// u^{p(eta+1)-1} with exponent >= 2, tame under panel refinement even for
/// eta close to -1.
pub fn lemma_int_quadrature(gamma: f64, eta: f64, a: f64, b: f64, d: f64) -> Result<f64> {
    lemma_domain_check(gamma, eta, a, b, d)?;
    let core = |s: f64| 1.0 / ((d - b * s) * (a - b * s).powf(gamma));
    let p = 2.0_f64.max((3.0 / (eta + 1.0)).ceil());
    let pow = p * (eta + 1.0) - 1.0;
    // right half: s = 1 - u^p, (1-s^2)^eta = u^{p eta} (2-u^p)^eta,
    // ds = p u^{p-1} du
    let right = |u: f64| {
        let up = u.powf(p);
        p * u.powf(pow) * (2.0 - up).powf(eta) * core(1.0 - up)
    };
    let left = |u: f64| {
        let up = u.powf(p);
        p * u.powf(pow) * (2.0 - up).powf(eta) * core(up - 1.0)
    };
    let (vr, _) = adaptive_abs(right, 0.0, 1.0, 1e-9, 1e-14, 4, 14)?;
    let (vl, _) = adaptive_abs(left, 0.0, 1.0, 1e-9, 1e-14, 4, 14)?;
    Ok(vl + vr)
}

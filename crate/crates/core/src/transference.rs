//! Ball-interval bridge: zonal sphere integrals, the closed Gaussian-sphere
//! identity, and the exact d = 1 transference check against image-method
//! kernels on (-1, 1).

use crate::error::{Error, Result};
use crate::gamma::{gamma, ln_gamma};
use crate::kernels::{half_stable_subordination, kernel_series_budget, Kahan, KernelQuery};
use crate::quad::adaptive_abs;
use crate::specfun::{bessel_i_log, Order};
use crate::spectrum::BasisCache;

use std::f64::consts::PI;

/// Surface measure of the unit sphere S^k in R^{k+1}:
/// sigma(S^k) = 2 pi^{(k+1)/2} / Gamma((k+1)/2). S^0 counts two points.
pub fn sphere_surface(k: u32) -> f64 {
    let h = (k as f64 + 1.0) / 2.0;
    2.0 * PI.powf(h) / gamma(h)
}

/// Integral over S^{d-1} of a zonal profile f(xi_1). For d = 1 this is the
/// two-point sum f(-1) + f(1); for d >= 2 it reduces to
/// sigma(S^{d-2}) int_0^pi f(cos theta) sin^{d-2} theta d theta.
pub fn zonal_integral<F: Fn(f64) -> f64>(d: u32, profile: F) -> Result<f64> {
    match d {
        0 => Err(Error::Domain("dimension d must be >= 1".into())),
        1 => Ok(profile(-1.0) + profile(1.0)),
        _ => {
            let p = d as f64 - 2.0;
            let f = |theta: f64| profile(theta.cos()) * theta.sin().powf(p);
            let (v, _) = adaptive_abs(f, 0.0, PI, 1e-11, 1e-14, 4, 12)?;
            Ok(sphere_surface(d - 2) * v)
        }
    }
}

/// Closed form of the sphere integral of the Gaussian factor:
/// int_{S^{d-1}} e^{-|x e_1 - y xi|^2/(ct)} dsigma(xi)
///   = (2 pi)^{nu+1} e^{-(x^2+y^2)/(ct)} (ct/(2xy))^nu I_nu(2xy/(ct)),
/// with nu = d/2 - 1, evaluated in log space for large Bessel arguments.
pub fn gaussian_sphere_closed(d: u32, x: f64, y: f64, t: f64, c: f64) -> Result<f64> {
    if d < 1 {
        return Err(Error::Domain("dimension d must be >= 1".into()));
    }
    if !(x > 0.0 && y > 0.0 && t > 0.0 && c > 0.0) {
        return Err(Error::Domain(format!(
            "gaussian_sphere_closed requires x, y, t, c > 0 (got {x}, {y}, {t}, {c})"
        )));
    }
    let nu = d as f64 / 2.0 - 1.0;
    let z = 2.0 * x * y / (c * t);
    let ln = (nu + 1.0) * (2.0 * PI).ln() - (x * x + y * y) / (c * t) - nu * z.ln()
        + bessel_i_log(Order::new(nu)?, z)?;
    Ok(ln.exp())
}

/// Dirichlet heat kernel on (-1, 1) by the method of images: odd
/// reflections with period 4,
/// K_t(x, y) = sum_j [ g(x - y - 4j) - g(x + y - 2 - 4j) ],
/// g the free Gaussian kernel of variance 2t.
pub fn interval_image_kernel(t: f64, x: f64, y: f64, image_count: i64) -> Result<f64> {
    if !(t > 0.0) {
        return Err(Error::Domain(format!("t={t} must be positive")));
    }
    if !((-1.0..=1.0).contains(&x) && (-1.0..=1.0).contains(&y)) {
        return Err(Error::Domain(format!("(x,y)=({x},{y}) outside [-1,1]^2")));
    }
    if image_count < 1 {
        return Err(Error::Domain(format!(
            "image_count={image_count} must be >= 1"
        )));
    }
    let g = |u: f64| (4.0 * PI * t).sqrt().recip() * (-u * u / (4.0 * t)).exp();
    let mut sum = Kahan::default();
    for j in (-image_count..=image_count).rev() {
        let shift = 4.0 * j as f64;
        sum.add(g(x - y - shift));
        sum.add(-g(x + y - 2.0 - shift));
    }
    Ok(sum.value())
}

/// Images needed for ~1e-17 absolute truncation error at time t; the large-t
/// term keeps the truncated far images from breaking the cancellation.
pub fn default_image_count(t: f64) -> i64 {
    8.max((4.0 / t.sqrt()).ceil() as i64)
        .max((3.2 * t.sqrt()).ceil() as i64)
}

/// Dirichlet Poisson kernel on (-1, 1), exact: summing the eigenseries
/// sum_k e^{-t k pi/2} sin(k pi (x+1)/2) sin(k pi (y+1)/2) as a geometric
/// series gives
/// K_t(x,y) = sinh(t pi/2) cos(pi x/2) cos(pi y/2)
///            / (2 (cosh(t pi/2) - cos(pi(x-y)/2)) (cosh(t pi/2) + cos(pi(x+y)/2))).
pub fn interval_poisson_kernel(t: f64, x: f64, y: f64) -> Result<f64> {
    if !(t > 0.0) {
        return Err(Error::Domain(format!("t={t} must be positive")));
    }
    if !((-1.0..=1.0).contains(&x) && (-1.0..=1.0).contains(&y)) {
        return Err(Error::Domain(format!("(x,y)=({x},{y}) outside [-1,1]^2")));
    }
    let h = 0.5 * PI * t;
    let num = h.sinh() * (0.5 * PI * x).cos() * (0.5 * PI * y).cos();
    let den = 2.0 * (h.cosh() - (0.5 * PI * (x - y)).cos()) * (h.cosh() + (0.5 * PI * (x + y)).cos());
    Ok(num / den)
}

/// 1/2-stable subordination of the heat image series; retained as an
/// independent oracle for the exact Poisson closed form above.
pub fn interval_poisson_subordinated(t: f64, x: f64, y: f64) -> Result<f64> {
    // bottom Dirichlet eigenvalue on (-1,1) is (pi/2)^2
    half_stable_subordination(t, PI / 2.0, |s| {
        interval_image_kernel(s, x, y, default_image_count(s))
    })
}

/// Ball kernel on (-1, 1) for alpha in {1, 2}: images for the heat case,
/// the exact geometric-series form for the Poisson case.
fn interval_kernel(alpha: f64, t: f64, x: f64, y: f64) -> Result<f64> {
    if (alpha - 2.0).abs() < 1e-12 {
        interval_image_kernel(t, x, y, default_image_count(t))
    } else if (alpha - 1.0).abs() < 1e-12 {
        interval_poisson_kernel(t, x, y)
    } else {
        Err(Error::Domain(format!(
            "interval transference supports alpha in {{1, 2}}, got {alpha}"
        )))
    }
}

/// Exact d = 1 instance of the transference identity. Returns (lhs, rhs)
/// where lhs is the spectral series at nu = -1/2 and rhs the two-point
/// sphere sum of the interval kernel on (-1, 1):
/// G_t^{-1/2,alpha}(x, y) = K_t^alpha(x, y) + K_t^alpha(x, -y).
pub fn interval_transference_check(
    alpha: f64,
    t: f64,
    x: f64,
    y: f64,
    cache: &BasisCache,
) -> Result<(f64, f64)> {
    let q = KernelQuery::new(Order::new(-0.5)?, alpha, t, x, y, 1e-10)?;
    let lhs = kernel_series_budget(&q, cache, 4_000_000)?.value;
    let rhs = interval_kernel(alpha, t, x, y)? + interval_kernel(alpha, t, x, -y)?;
    Ok((lhs, rhs))
}

/// Schlafli-type representation of I_nu, used as an independent quadrature
/// oracle: (1/(sqrt(pi) 2^nu Gamma(nu+1/2))) z^nu int_{-1}^1 e^{zs}(1-s^2)^{nu-1/2} ds.
/// The endpoint singularity for nu < 1/2 is removed by s = +-(1 - u^2).
pub fn bessel_i_schlafli(order: Order, z: f64) -> Result<f64> {
    let nu = order.value();
    if !(nu > -0.5) {
        return Err(Error::Domain(format!(
            "representation requires nu > -1/2, got {nu}"
        )));
    }
    if !(z > 0.0) {
        return Err(Error::Domain(format!("z={z} must be positive")));
    }
    let eta = nu - 0.5;
    // quartic endpoint substitution s = +-(1 - v^4): the (1-s^2)^eta factor
    // becomes v^{4 eta + 3} (2 - v^4)^eta, with exponent 4 nu + 1 >= -1
    let right = |v: f64| {
        let v4 = v * v * v * v;
        let s = 1.0 - v4;
        4.0 * v.powf(4.0 * eta + 3.0) * (2.0 - v4).powf(eta) * (z * s).exp()
    };
    let left = |v: f64| {
        let v4 = v * v * v * v;
        let s = v4 - 1.0;
        4.0 * v.powf(4.0 * eta + 3.0) * (2.0 - v4).powf(eta) * (z * s).exp()
    };
    let (vr, _) = adaptive_abs(right, 0.0, 1.0, 1e-12, 1e-16, 4, 12)?;
    let (vl, _) = adaptive_abs(left, 0.0, 1.0, 1e-12, 1e-16, 4, 12)?;
    let ln_pref = nu * z.ln() - 0.5 * PI.ln() - nu * 2.0_f64.ln() - ln_gamma(nu + 0.5);
    Ok(ln_pref.exp() * (vl + vr))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sphere_surfaces() {
        assert!((sphere_surface(0) - 2.0).abs() < 1e-13);
        assert!((sphere_surface(1) - 2.0 * PI).abs() < 1e-13);
        assert!((sphere_surface(2) - 4.0 * PI).abs() < 1e-12);
    }

    #[test]
    fn zonal_constant_profiles() {
        assert!((zonal_integral(3, |_| 1.0).unwrap() - 4.0 * PI).abs() < 1e-9);
        assert!((zonal_integral(2, |_| 1.0).unwrap() - 2.0 * PI).abs() < 1e-9);
        assert!((zonal_integral(1, |_| 1.0).unwrap() - 2.0).abs() < 1e-15);
        assert!(zonal_integral(0, |_| 1.0).is_err());
    }

    #[test]
    fn gaussian_sphere_identity_d3() {
        let (x, y, t, c) = (0.5, 0.5, 0.2, 1.0);
        let profile = |xi: f64| (-(x * x + y * y - 2.0 * x * y * xi) / (c * t)).exp();
        let quad = zonal_integral(3, profile).unwrap();
        let closed = gaussian_sphere_closed(3, x, y, t, c).unwrap();
        assert!((quad - closed).abs() < closed * 1e-10, "{quad} vs {closed}");
    }

    #[test]
    fn gaussian_sphere_d1_two_point_form() {
        let (x, y, t, c) = (0.3, 0.8, 0.5, 2.0);
        let closed = gaussian_sphere_closed(1, x, y, t, c).unwrap();
        let want = (-(x - y) * (x - y) / (c * t)).exp() + (-(x + y) * (x + y) / (c * t)).exp();
        assert!((closed - want).abs() < want * 1e-12);
    }

    #[test]
    fn gaussian_sphere_small_x_limit() {
        let (y, t, c) = (0.6, 0.3, 1.5);
        let closed = gaussian_sphere_closed(3, 1e-10, y, t, c).unwrap();
        let want = sphere_surface(2) * (-y * y / (c * t)).exp();
        assert!((closed - want).abs() < want * 1e-8, "{closed} vs {want}");
    }

    #[test]
    fn image_kernel_boundary_and_symmetry() {
        let k = interval_image_kernel(0.2, 1.0, 0.3, 10).unwrap();
        assert!(k.abs() < 1e-14);
        let k = interval_image_kernel(0.2, -1.0, 0.3, 10).unwrap();
        assert!(k.abs() < 1e-14);
        let a = interval_image_kernel(0.2, -0.4, 0.7, 10).unwrap();
        let b = interval_image_kernel(0.2, 0.7, -0.4, 10).unwrap();
        assert!((a - b).abs() < 1e-15);
    }

    #[test]
    fn image_kernel_matches_eigenseries() {
        // K_t(x,y) = sum_k e^{-t(k pi/2)^2} sin(k pi (x+1)/2) sin(k pi (y+1)/2)
        let (t, x, y) = (0.15, 0.3, -0.2);
        let mut series = 0.0;
        for k in 1..200 {
            let mu = k as f64 * PI / 2.0;
            series += (-t * mu * mu).exp()
                * (mu * (x + 1.0)).sin()
                * (mu * (y + 1.0)).sin();
        }
        let images = interval_image_kernel(t, x, y, 12).unwrap();
        assert!((images - series).abs() < 1e-12, "{images} vs {series}");
    }

    #[test]
    fn transference_heat() {
        let cache = BasisCache::new();
        let (lhs, rhs) = interval_transference_check(2.0, 0.1, 0.3, 0.5, &cache).unwrap();
        assert!((lhs - rhs).abs() <= lhs.abs() * 1e-8, "{lhs} vs {rhs}");
    }

    #[test]
    fn transference_poisson() {
        let cache = BasisCache::new();
        let (lhs, rhs) = interval_transference_check(1.0, 0.5, 0.4, 0.6, &cache).unwrap();
        assert!((lhs - rhs).abs() <= lhs.abs() * 1e-8, "{lhs} vs {rhs}");
        assert!(interval_transference_check(1.5, 0.5, 0.4, 0.6, &cache).is_err());
    }

    #[test]
    fn poisson_closed_form_vs_subordination() {
        for &(t, x, y) in &[(0.3, 0.2, -0.5), (1.0, 0.9, 0.9), (2.0, -0.3, 0.1)] {
            let exact = interval_poisson_kernel(t, x, y).unwrap();
            let quad = interval_poisson_subordinated(t, x, y).unwrap();
            assert!(
                (exact - quad).abs() <= exact.abs() * 1e-12,
                "t={t} x={x} y={y}: {exact} vs {quad}"
            );
        }
    }

    #[test]
    fn schlafli_matches_series() {
        use crate::specfun::bessel_i;
        for &nu in &[0.25, 1.0, 2.5] {
            for &z in &[0.5, 2.0, 10.0] {
                let o = Order::new(nu).unwrap();
                let rep = bessel_i_schlafli(o, z).unwrap();
                let val = bessel_i(o, z).unwrap();
                assert!(
                    (rep - val).abs() < val * 1e-10,
                    "nu={nu} z={z}: {rep} vs {val}"
                );
            }
        }
    }
}

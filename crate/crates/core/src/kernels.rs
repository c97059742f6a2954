//! Kernel evaluation: the spectral series for G_t^{nu,alpha}(x,y), the
//! trigonometric closed forms at nu = +-1/2, the image-method heat kernels,
//! the Hankel kernel on (0, infinity), subordination, and semigroup
//! application on coefficient data.

use crate::error::{Error, Result};
use crate::gamma::exp_power_tail_ln;
use crate::quad::adaptive_abs;
use crate::specfun::{bessel_i_log, Order};
use crate::spectrum::{BasisCache, SpectralBasis};

use std::f64::consts::PI;

/// One kernel evaluation request: G_t^{nu,alpha}(x,y) to relative tol.
#[derive(Clone, Copy, Debug)]
pub struct KernelQuery {
    pub order: Order,
    pub alpha: f64,
    pub t: f64,
    pub x: f64,
    pub y: f64,
    pub tol: f64,
}

impl KernelQuery {
    pub fn new(order: Order, alpha: f64, t: f64, x: f64, y: f64, tol: f64) -> Result<Self> {
        if !(alpha > 0.0 && alpha <= 2.0) {
            return Err(Error::Domain(format!("alpha={alpha} outside (0, 2]")));
        }
        if !(t > 0.0) || !t.is_finite() {
            return Err(Error::Domain(format!("t={t} must be positive")));
        }
        if !(x > 0.0 && x < 1.0 && y > 0.0 && y < 1.0) {
            return Err(Error::Domain(format!("(x, y)=({x}, {y}) outside (0,1)^2")));
        }
        if !(tol > 0.0 && tol <= 1e-2) {
            return Err(Error::Domain(format!("tol={tol} outside (0, 1e-2]")));
        }
        Ok(KernelQuery {
            order,
            alpha,
            t,
            x,
            y,
            tol,
        })
    }
}

/// Result of a truncated series evaluation.
#[derive(Clone, Copy, Debug)]
pub struct KernelValue {
    pub value: f64,
    pub terms_used: usize,
    pub tail_estimate: f64,
}

/// Compensated accumulator (Neumaier variant).
#[derive(Clone, Copy, Default)]
pub(crate) struct Kahan {
    s: f64,
    c: f64,
}

impl Kahan {
    #[inline]
    pub fn add(&mut self, v: f64) {
        let t = self.s + v;
        if self.s.abs() >= v.abs() {
            self.c += (self.s - t) + v;
        } else {
            self.c += (v - t) + self.s;
        }
        self.s = t;
    }

    #[inline]
    pub fn value(&self) -> f64 {
        self.s + self.c
    }
}

/// Smallest t the plain series entry points accept; below it the term count
/// explodes and the closed forms / transference routes are the right tool.
pub fn default_t_min(alpha: f64) -> f64 {
    if alpha >= 1.0 {
        1e-3
    } else {
        1e-3_f64.powf(alpha)
    }
}

/// ln of the majorant tail sum_{n>N} a n^p e^{-t lambda_n^alpha}, valid when
/// the summand is decreasing past lambda (alpha t lambda^alpha >= p).
/// Uses lambda_n >= lambda_N + 3(n-N) and n <= (lambda_n + pi)/3, both of
/// which hold for every order nu > -1.
fn tail_majorant_ln(ln_a: f64, p: f64, t: f64, alpha: f64, lambda: f64) -> Result<f64> {
    Ok(ln_a - (p + 1.0) * 3.0_f64.ln()
        + p * (1.0 + PI / lambda).ln()
        + exp_power_tail_ln(p, t, alpha, lambda)?)
}

struct Majorant {
    ln_a: f64,
    p: f64,
}

/// The two per-point majorants for |phi_n(x) phi_n(y)|: the boundary-decay
/// bound C^2 (1-x)(1-y) n^{2 nu + 4} and the interior amplitude bound
/// K^2 (x y)^{-nu-1/2}.
fn majorants(basis: &SpectralBasis, x: f64, y: f64) -> [Majorant; 2] {
    let nu = basis.order().value();
    let c = basis.growth_const();
    let k = basis.amplitude_bound(x) * basis.amplitude_bound(y);
    [
        Majorant {
            ln_a: 2.0 * c.ln() + ((1.0 - x) * (1.0 - y)).max(1e-300).ln(),
            p: 2.0 * nu + 4.0,
        },
        Majorant {
            ln_a: k.ln(),
            p: 0.0,
        },
    ]
}

fn best_tail_ln(
    majorants: &[Majorant; 2],
    t: f64,
    alpha: f64,
    lambda: f64,
) -> Result<Option<f64>> {
    let mut best: Option<f64> = None;
    for m in majorants {
        // decreasing-summand condition; skip the majorant until it applies
        if alpha * t * lambda.powf(alpha) < m.p {
            continue;
        }
        let v = tail_majorant_ln(m.ln_a, m.p, t, alpha, lambda)?;
        best = Some(best.map_or(v, |b: f64| b.min(v)));
    }
    Ok(best)
}

/// Series engine shared by the gated/shifted/budgeted entry points.
/// Computes e^{shift} G_t^{nu,alpha}(x,y); `shift` lets the caller rescale
/// out a factor e^{-t lambda_1^alpha} that would underflow on its own.
fn series_core(
    basis: &SpectralBasis,
    q: &KernelQuery,
    shift: f64,
    max_terms: usize,
) -> Result<KernelValue> {
    let (alpha, t, x, y, tol) = (q.alpha, q.t, q.x, q.y, q.tol);
    let maj = majorants(basis, x, y);
    let zeros = basis.zeros();
    let cap = zeros.len().min(max_terms);
    let mut sum = Kahan::default();
    for n in 0..cap {
        let lambda = zeros[n];
        let w = (shift - t * lambda.powf(alpha)).exp();
        sum.add(w * basis.phi_raw(n, x) * basis.phi_raw(n, y));
        if (n + 1) % 16 == 0 || n + 1 == cap {
            if let Some(ln_tail) = best_tail_ln(&maj, t, alpha, lambda)? {
                let budget = (tol * sum.value().abs().max(1e-300)).ln();
                if ln_tail + shift <= budget {
                    return Ok(KernelValue {
                        value: sum.value(),
                        terms_used: n + 1,
                        tail_estimate: (ln_tail + shift).exp(),
                    });
                }
            }
        }
    }
    if cap < max_terms {
        return Err(Error::CapacityExhausted {
            capacity: zeros.len(),
            needed: (zeros.len() * 2).max(64),
        });
    }
    Err(Error::CapacityExhausted {
        capacity: max_terms,
        needed: max_terms * 2,
    })
}

/// G_t^{nu,alpha}(x,y) by tolerance-controlled series summation against a
/// prebuilt basis. Refuses t below `default_t_min`.
pub fn kernel_series(q: &KernelQuery, basis: &SpectralBasis) -> Result<KernelValue> {
    let t_min = default_t_min(q.alpha);
    if q.t < t_min {
        return Err(Error::TimeTooSmall {
            t: q.t,
            t_min,
            alpha: q.alpha,
            guidance: "series truncation blows up at small t; use the closed forms for \
                       nu = +-1/2 (poisson_closed_form, heat_closed_form), the interval \
                       transference route, or raise t"
                .into(),
        });
    }
    series_core(basis, q, 0.0, basis.capacity())
}

/// As `kernel_series`, but computes e^{shift} G so that long-time values far
/// below the f64 underflow threshold stay representable. The natural choice
/// is shift = t lambda_1^alpha.
pub fn kernel_series_shifted(
    q: &KernelQuery,
    basis: &SpectralBasis,
    shift: f64,
) -> Result<KernelValue> {
    series_core(basis, q, shift, basis.capacity())
}

/// Ungated series evaluation with an explicit term budget; grows the cached
/// basis as needed. Small-t callers (subordination, sweeps under their own
/// point budget) come through here.
pub fn kernel_series_budget(
    q: &KernelQuery,
    cache: &BasisCache,
    max_terms: usize,
) -> Result<KernelValue> {
    let mut want = 64usize;
    loop {
        let basis = cache.get(q.order, want.min(max_terms))?;
        match series_core(&basis, q, 0.0, max_terms) {
            Err(Error::CapacityExhausted { capacity, needed }) => {
                if capacity >= max_terms {
                    return Err(Error::CapacityExhausted {
                        capacity: max_terms,
                        needed,
                    });
                }
                want = needed.max(want * 2);
            }
            other => return other,
        }
    }
}

/// Kernel values over a product grid xs x ys at fixed (nu, alpha, t),
/// row-major (xs index major). One pass over n evaluates each phi_n once per
/// distinct coordinate, so the per-cell cost is a multiply-add.
pub struct KernelGrid {
    pub values: Vec<f64>,
    pub terms_used: usize,
    pub tail_estimate: f64,
}

pub fn kernel_grid(
    order: Order,
    alpha: f64,
    t: f64,
    tol: f64,
    xs: &[f64],
    ys: &[f64],
    cache: &BasisCache,
    max_terms: usize,
) -> Result<KernelGrid> {
    if xs.is_empty() || ys.is_empty() {
        return Err(Error::Domain("empty grid".into()));
    }
    for &v in xs.iter().chain(ys) {
        if !(v > 0.0 && v < 1.0) {
            return Err(Error::Domain(format!("grid point {v} outside (0,1)")));
        }
    }
    // probe query validates the scalar parameters once
    let probe = KernelQuery::new(order, alpha, t, xs[0], ys[0], tol)?;
    let _ = probe;

    let ncells = xs.len() * ys.len();
    let mut sums = vec![Kahan::default(); ncells];
    let mut converged = vec![false; ncells];
    let mut phix = vec![0.0; xs.len()];
    let mut phiy = vec![0.0; ys.len()];
    let mut want = 64usize;
    let mut n_done = 0usize;
    let mut last_tail = f64::INFINITY;
    loop {
        let basis = cache.get(order, want.min(max_terms))?;
        let maj: Vec<[Majorant; 2]> = xs
            .iter()
            .flat_map(|&x| ys.iter().map(move |&y| (x, y)))
            .map(|(x, y)| majorants(&basis, x, y))
            .collect();
        let zeros = basis.zeros();
        let cap = zeros.len().min(max_terms);
        for n in n_done..cap {
            let lambda = zeros[n];
            let w = (-t * lambda.powf(alpha)).exp();
            for (i, &x) in xs.iter().enumerate() {
                phix[i] = basis.phi_raw(n, x);
            }
            for (j, &y) in ys.iter().enumerate() {
                phiy[j] = basis.phi_raw(n, y);
            }
            for i in 0..xs.len() {
                let wx = w * phix[i];
                for j in 0..ys.len() {
                    let cell = i * ys.len() + j;
                    if !converged[cell] {
                        sums[cell].add(wx * phiy[j]);
                    }
                }
            }
            if (n + 1) % 16 == 0 || n + 1 == cap {
                // the exp_power_tail evaluation is shared across cells via
                // the per-majorant decomposition ln_a + common(p)
                let mut all = true;
                let mut worst = f64::NEG_INFINITY;
                for cell in 0..ncells {
                    if converged[cell] {
                        continue;
                    }
                    match best_tail_ln(&maj[cell], t, alpha, lambda)? {
                        Some(ln_tail) => {
                            let budget = (tol * sums[cell].value().abs().max(1e-300)).ln();
                            if ln_tail <= budget {
                                converged[cell] = true;
                            } else {
                                all = false;
                            }
                            worst = worst.max(ln_tail);
                        }
                        None => {
                            all = false;
                            worst = f64::INFINITY;
                        }
                    }
                }
                if all {
                    return Ok(KernelGrid {
                        values: sums.iter().map(|k| k.value()).collect(),
                        terms_used: n + 1,
                        tail_estimate: worst.exp(),
                    });
                }
                last_tail = worst;
            }
        }
        n_done = cap;
        if cap >= max_terms {
            let _ = last_tail;
            return Err(Error::CapacityExhausted {
                capacity: max_terms,
                needed: max_terms * 2,
            });
        }
        want = (cap * 2).max(128);
    }
}

/// ln(cosh a - c) for |c| <= 1, stable for large a.
fn ln_cosh_minus(a: f64, c: f64) -> f64 {
    if a > 30.0 {
        // cosh a - c = e^a/2 (1 - 2 c e^{-a} + e^{-2a})
        a - 2.0_f64.ln() + (1.0 - 2.0 * c * (-a).exp() + (-2.0 * a).exp()).ln()
    } else {
        (a.cosh() - c).ln()
    }
}

/// ln sinh a for a > 0, stable for large a.
fn ln_sinh(a: f64) -> f64 {
    if a > 30.0 {
        a - 2.0_f64.ln() + (1.0 - (-2.0 * a).exp()).ln()
    } else {
        a.sinh().ln()
    }
}

/// Closed trigonometric form of the Poisson kernel G_t^{nu,1} at nu = +-1/2.
///
/// nu = +1/2:
///   (1/(2xy)) [ sinh(pi t)/(cosh(pi t) - cos(pi(x-y)))
///             - sinh(pi t)/(cosh(pi t) - cos(pi(x+y))) ]
/// computed as a single stable fraction; nu = -1/2:
///   sinh(pi t/2) [ cos(pi(x-y)/2)/(cosh(pi t) - cos(pi(x-y)))
///                + cos(pi(x+y)/2)/(cosh(pi t) - cos(pi(x+y))) ].
pub fn poisson_closed_form(order: Order, t: f64, x: f64, y: f64) -> Result<f64> {
    if !(t > 0.0) {
        return Err(Error::Domain(format!("t={t} must be positive")));
    }
    let nu = order.value();
    let a = PI * t;
    if (nu - 0.5).abs() < 1e-12 {
        let c1 = (PI * (x - y)).cos();
        let c2 = (PI * (x + y)).cos();
        // sinh a [1/(cosh a - c1) - 1/(cosh a - c2)]
        //   = sinh a (c1 - c2) / ((cosh a - c1)(cosh a - c2))
        let ln = ln_sinh(a) - ln_cosh_minus(a, c1) - ln_cosh_minus(a, c2);
        Ok((c1 - c2) / (2.0 * x * y) * ln.exp())
    } else if (nu + 0.5).abs() < 1e-12 {
        let half = |theta: f64| {
            let c = theta.cos();
            (theta / 2.0).cos() * (ln_sinh(a / 2.0) - ln_cosh_minus(a, c)).exp()
        };
        Ok(half(PI * (x - y)) + half(PI * (x + y)))
    } else {
        Err(Error::Domain(format!(
            "closed Poisson form exists only for nu = +-1/2, got {nu}"
        )))
    }
}

#[inline]
fn gauss1d(t: f64, u: f64) -> f64 {
    (4.0 * PI * t).sqrt().recip() * (-u * u / (4.0 * t)).exp()
}

/// Image-method heat kernel G_t^{nu,2} at nu = +-1/2.
///
/// nu = +1/2: (1/(xy)) sum_j [ g(x-y+2j) - g(x+y+2j) ]  (odd, period 2);
/// nu = -1/2: sum_j (-1)^j [ g(x-y+2j) + g(x+y+2j) ]    (period 4),
/// with g the free Gaussian kernel of variance 2t.
pub fn heat_closed_form(order: Order, t: f64, x: f64, y: f64, image_count: i64) -> Result<f64> {
    if !(t > 0.0) {
        return Err(Error::Domain(format!("t={t} must be positive")));
    }
    if image_count < 1 {
        return Err(Error::Domain(format!(
            "image_count={image_count} must be >= 1"
        )));
    }
    let nu = order.value();
    if !((nu - 0.5).abs() < 1e-12 || (nu + 0.5).abs() < 1e-12) {
        return Err(Error::Domain(format!(
            "image-method form exists only for nu = +-1/2, got {nu}"
        )));
    }
    // For t beyond ~0.5 the image sum cancels below the f64 absolute floor
    // (the kernel is O(e^{-t lambda_1^2}) while individual images are O(1)),
    // so switch to the dual eigenfunction sum with the exact closed-form
    // eigendata (lambda_n = pi n resp. pi(n - 1/2), sine/cosine modes).
    if t >= 0.5 {
        let mut sum = Kahan::default();
        let mut n = 1.0_f64;
        loop {
            let (lam, term) = if nu > 0.0 {
                let lam = PI * n;
                (lam, 2.0 * (lam * x).sin() * (lam * y).sin() / (x * y))
            } else {
                let lam = PI * (n - 0.5);
                (lam, 2.0 * (lam * x).cos() * (lam * y).cos())
            };
            let w = (-t * lam * lam).exp();
            sum.add(w * term);
            // relative tail below 1e-20 of the leading mode
            if t * lam * lam > t * PI * PI / 4.0 + 50.0 {
                break;
            }
            n += 1.0;
        }
        return Ok(sum.value());
    }
    // signed images summed innermost-out so the Gaussian tails add last
    let mut sum = Kahan::default();
    if (nu - 0.5).abs() < 1e-12 {
        for j in (-image_count..=image_count).rev() {
            let shift = 2.0 * j as f64;
            sum.add(gauss1d(t, x - y + shift));
            sum.add(-gauss1d(t, x + y + shift));
        }
        Ok(sum.value() / (x * y))
    } else if (nu + 0.5).abs() < 1e-12 {
        for j in (-image_count..=image_count).rev() {
            let sign = if j.rem_euclid(2) == 0 { 1.0 } else { -1.0 };
            let shift = 2.0 * j as f64;
            sum.add(sign * gauss1d(t, x - y + shift));
            sum.add(sign * gauss1d(t, x + y + shift));
        }
        Ok(sum.value())
    } else {
        unreachable!("order checked above")
    }
}

/// Images needed for ~1e-17 absolute tails at time t: O(1/sqrt(t)) for the
/// near field and O(sqrt(t)) so the truncated far images do not break the
/// alternating cancellation when t is large.
pub fn default_image_count(t: f64) -> i64 {
    8.max((4.0 / t.sqrt()).ceil() as i64)
        .max((6.4 * t.sqrt()).ceil() as i64)
}

/// Heat kernel of the continuous Bessel setting on (0, infinity):
/// W_t^lambda(x,y) = (xy)^{-lambda+1/2} (1/(2t)) e^{-(x^2+y^2)/(4t)}
///                   I_{lambda-1/2}(xy/(2t)).
pub fn hankel_kernel(lambda_param: f64, t: f64, x: f64, y: f64) -> Result<f64> {
    if !(lambda_param > -0.5) {
        return Err(Error::Domain(format!(
            "hankel_kernel requires lambda > -1/2, got {lambda_param}"
        )));
    }
    if !(t > 0.0 && x > 0.0 && y > 0.0) {
        return Err(Error::Domain(format!(
            "hankel_kernel requires t, x, y > 0 (got t={t}, x={x}, y={y})"
        )));
    }
    let z = x * y / (2.0 * t);
    let i_order = Order::new(lambda_param - 0.5)?;
    let ln = (0.5 - lambda_param) * (x * y).ln() - (2.0 * t).ln() - (x * x + y * y) / (4.0 * t)
        + bessel_i_log(i_order, z)?;
    Ok(ln.exp())
}

/// 1/2-stable subordination of a heat-type kernel value s -> K_s:
/// int_0^inf (t/(2 sqrt(pi))) s^{-3/2} e^{-t^2/(4s)} K_s ds, integrated
/// adaptively in log s. `lambda1` is the bottom eigenvalue driving the decay
/// of K_s for large s; it sets the cutoffs.
pub(crate) fn half_stable_subordination<F: FnMut(f64) -> Result<f64>>(
    t: f64,
    lambda1: f64,
    mut heat: F,
) -> Result<f64> {
    // both cutoffs leave a relative e^{-100} behind: the integrand carries
    // e^{-t^2/(4s) - s lambda_1^2} against a total mass ~ e^{-t lambda_1}
    let reach = t * lambda1 + 100.0;
    let s_lo = t * t / (4.0 * reach);
    let s_hi = reach / (lambda1 * lambda1);
    let pref = t / (2.0 * PI.sqrt());
    let mut inner_err: Option<Error> = None;
    let integrand = |u: f64| -> f64 {
        let s = u.exp();
        match heat(s) {
            Ok(v) => pref * (-0.5 * u).exp() * (-t * t / (4.0 * s)).exp() * v,
            Err(e) => {
                inner_err.get_or_insert(e);
                f64::NAN
            }
        }
    };
    let res = adaptive_abs(integrand, s_lo.ln(), s_hi.ln(), 1e-8, 1e-280, 8, 8);
    if let Some(e) = inner_err {
        return Err(e);
    }
    Ok(res?.0)
}

/// Poisson kernel via 1/2-stable subordination of the heat kernel series.
/// Cross-check for the alpha = 1 series path.
pub fn subordination_check(q: &KernelQuery, cache: &BasisCache) -> Result<f64> {
    if (q.alpha - 1.0).abs() > 1e-12 {
        return Err(Error::Domain(format!(
            "subordination_check requires alpha = 1, got {}",
            q.alpha
        )));
    }
    let lambda1 = cache.get(q.order, 1)?.zeros()[0];
    half_stable_subordination(q.t, lambda1, |s| {
        let heat = KernelQuery {
            alpha: 2.0,
            t: s,
            ..*q
        };
        Ok(kernel_series_budget(&heat, cache, 4_000_000)?.value)
    })
}

/// Coefficients <f, phi_n> against the measure x^{2 nu + 1} dx, by adaptive
/// quadrature with panel count growing with the mode index.
pub fn project_coefficients<F: Fn(f64) -> f64>(
    basis: &SpectralBasis,
    f: F,
    n_modes: usize,
) -> Result<Vec<f64>> {
    if n_modes > basis.capacity() {
        return Err(Error::CapacityExhausted {
            capacity: basis.capacity(),
            needed: n_modes,
        });
    }
    let nu = basis.order().value();
    let mut coeffs = Vec::with_capacity(n_modes);
    for n in 0..n_modes {
        let g = |x: f64| f(x) * basis.phi_raw(n, x) * x.powf(2.0 * nu + 1.0);
        let (v, _) = adaptive_abs(g, 0.0, 1.0, 1e-10, 1e-12, 4 + n, 10)?;
        coeffs.push(v);
    }
    Ok(coeffs)
}

/// (T_t^{nu,alpha} f)(x) = sum_n e^{-t lambda_n^alpha} <f, phi_n> phi_n(x)
/// for a finite coefficient list.
pub fn apply_semigroup(
    basis: &SpectralBasis,
    alpha: f64,
    t: f64,
    x: f64,
    coeffs: &[f64],
) -> Result<f64> {
    if !(alpha > 0.0 && alpha <= 2.0) {
        return Err(Error::Domain(format!("alpha={alpha} outside (0, 2]")));
    }
    if !(t >= 0.0) {
        return Err(Error::Domain(format!("t={t} must be >= 0")));
    }
    if !(0.0..=1.0).contains(&x) {
        return Err(Error::Domain(format!("x={x} outside [0, 1]")));
    }
    if coeffs.len() > basis.capacity() {
        return Err(Error::CapacityExhausted {
            capacity: basis.capacity(),
            needed: coeffs.len(),
        });
    }
    let zeros = basis.zeros();
    let mut sum = Kahan::default();
    for (n, &c) in coeffs.iter().enumerate() {
        let w = (-t * zeros[n].powf(alpha)).exp();
        sum.add(w * c * basis.phi_raw(n, x));
    }
    Ok(sum.value())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ord(v: f64) -> Order {
        Order::new(v).unwrap()
    }

    #[test]
    fn poisson_plus_half_reference_point() {
        // 2 [sinh pi/(cosh pi - 1) - sinh pi/(cosh pi + 1)] ~ 0.34636
        let v = poisson_closed_form(ord(0.5), 1.0, 0.5, 0.5).unwrap();
        let sp = PI.sinh();
        let cp = PI.cosh();
        let want = 2.0 * (sp / (cp - 1.0) - sp / (cp + 1.0));
        assert!((v - want).abs() < want * 1e-13);
        assert!((want - 0.34636).abs() < 1e-5, "want={want}");
    }

    #[test]
    fn poisson_minus_half_reference_point() {
        // x = y = 0: 2 sinh(pi/2)/(cosh pi - 1) ~ 0.43454
        let v = poisson_closed_form(ord(-0.5), 1.0, 0.0, 0.0).unwrap();
        let want = 2.0 * (PI / 2.0).sinh() / (PI.cosh() - 1.0);
        assert!((v - want).abs() < want * 1e-13);
        assert!((want - 0.43454).abs() < 1e-5, "want={want}");
    }

    #[test]
    fn poisson_dirichlet_boundary() {
        for &t in &[0.05, 1.0, 40.0] {
            let v = poisson_closed_form(ord(0.5), t, 1.0 - 1e-9, 0.4).unwrap();
            assert!(v.abs() < 1e-6, "t={t}: {v}");
            let v = poisson_closed_form(ord(-0.5), t, 1.0 - 1e-9, 0.4).unwrap();
            assert!(v.abs() < 1e-6, "t={t}: {v}");
        }
        assert!(poisson_closed_form(ord(0.0), 1.0, 0.5, 0.5).is_err());
    }

    #[test]
    fn poisson_large_t_single_mode() {
        // t = 20: kernel ~ e^{-t lambda_1} phi_1(x) phi_1(y)
        let t = 20.0;
        let v = poisson_closed_form(ord(0.5), t, 0.5, 0.5).unwrap();
        let phi1 = |x: f64| std::f64::consts::SQRT_2 * (PI * x).sin() / x;
        let want = (-t * PI).exp() * phi1(0.5) * phi1(0.5);
        assert!((v - want).abs() < want * 1e-8, "v={v} want={want}");
    }

    #[test]
    fn heat_images_gaussian_concentration() {
        // t -> 0 at x = y = 1/2: value * sqrt(4 pi t) * x y -> 1
        let t = 1e-3;
        let v = heat_closed_form(ord(0.5), t, 0.5, 0.5, 8).unwrap();
        let scaled = v * (4.0 * PI * t).sqrt() * 0.25;
        assert!((scaled - 1.0).abs() < 1e-10, "scaled={scaled}");
    }

    #[test]
    fn heat_images_boundary() {
        for &nu in &[0.5, -0.5] {
            let v = heat_closed_form(ord(nu), 0.3, 1.0 - 1e-12, 0.6, 12).unwrap();
            assert!(v.abs() < 1e-9, "nu={nu}: {v}");
        }
        // Neumann side: kernel does not vanish at x = 0 for nu = -1/2
        let v = heat_closed_form(ord(-0.5), 0.3, 1e-12, 0.6, 12).unwrap();
        assert!(v > 0.1, "{v}");
    }

    #[test]
    fn hankel_reference_point() {
        // lambda = 1/2, t = 0.25, x = y = 1: (1/0.5) e^{-2} I_0(2)
        let v = hankel_kernel(0.5, 0.25, 1.0, 1.0).unwrap();
        let want = 2.0 * (-2.0_f64).exp() * 2.2795853023360673;
        assert!((v - want).abs() < want * 1e-10, "v={v} want={want}");
        assert!(hankel_kernel(-0.6, 1.0, 0.5, 0.5).is_err());
    }

    #[test]
    fn series_matches_poisson_closed_form() {
        let cache = BasisCache::new();
        for &nu in &[0.5, -0.5] {
            let q = KernelQuery::new(ord(nu), 1.0, 1.0, 0.5, 0.5, 1e-12).unwrap();
            let got = kernel_series_budget(&q, &cache, 1_000_000).unwrap();
            let want = poisson_closed_form(ord(nu), 1.0, 0.5, 0.5).unwrap();
            assert!(
                (got.value - want).abs() < want.abs() * 1e-10,
                "nu={nu}: {} vs {want}",
                got.value
            );
        }
    }

    #[test]
    fn series_symmetry() {
        let cache = BasisCache::new();
        let a = KernelQuery::new(ord(0.3), 1.5, 0.4, 0.25, 0.8, 1e-12).unwrap();
        let b = KernelQuery::new(ord(0.3), 1.5, 0.4, 0.8, 0.25, 1e-12).unwrap();
        let va = kernel_series_budget(&a, &cache, 1_000_000).unwrap().value;
        let vb = kernel_series_budget(&b, &cache, 1_000_000).unwrap().value;
        assert!((va - vb).abs() <= 1e-14 * va.abs().max(1.0));
    }

    #[test]
    fn t_min_gate() {
        let basis = SpectralBasis::new(ord(0.5), 64).unwrap();
        let q = KernelQuery::new(ord(0.5), 2.0, 1e-5, 0.5, 0.5, 1e-8).unwrap();
        match kernel_series(&q, &basis) {
            Err(Error::TimeTooSmall { guidance, .. }) => {
                assert!(guidance.contains("closed forms"))
            }
            other => panic!("expected TimeTooSmall, got {other:?}"),
        }
    }

    #[test]
    fn shifted_series_recovers_underflowed_scale() {
        // t = 60, nu = 1/2, alpha = 2: e^{-t pi^2} ~ e^{-592} underflows, but
        // the shifted value e^{t lambda_1^2} G -> phi_1(x) phi_1(y)
        let basis = SpectralBasis::new(ord(0.5), 64).unwrap();
        let q = KernelQuery::new(ord(0.5), 2.0, 60.0, 0.5, 0.5, 1e-10).unwrap();
        let shift = 60.0 * PI * PI;
        let v = kernel_series_shifted(&q, &basis, shift).unwrap();
        let phi1 = 2.0 * std::f64::consts::SQRT_2;
        assert!(
            (v.value - phi1 * phi1).abs() < 1e-8,
            "shifted value {}",
            v.value
        );
    }

    #[test]
    fn subordination_matches_closed_form() {
        let cache = BasisCache::new();
        let q = KernelQuery::new(ord(0.5), 1.0, 1.0, 0.5, 0.5, 1e-10).unwrap();
        let v = subordination_check(&q, &cache).unwrap();
        let want = poisson_closed_form(ord(0.5), 1.0, 0.5, 0.5).unwrap();
        assert!((v - want).abs() < want * 1e-6, "{v} vs {want}");
    }

    #[test]
    fn grid_matches_pointwise() {
        let cache = BasisCache::new();
        let xs = [0.2, 0.5, 0.9];
        let ys = [0.3, 0.7];
        let g = kernel_grid(ord(0.0), 2.0, 0.05, 1e-10, &xs, &ys, &cache, 1_000_000).unwrap();
        for (i, &x) in xs.iter().enumerate() {
            for (j, &y) in ys.iter().enumerate() {
                let q = KernelQuery::new(ord(0.0), 2.0, 0.05, x, y, 1e-10).unwrap();
                let want = kernel_series_budget(&q, &cache, 1_000_000).unwrap().value;
                let got = g.values[i * ys.len() + j];
                assert!(
                    (got - want).abs() <= want.abs().max(1e-12) * 1e-9,
                    "({x},{y}): {got} vs {want}"
                );
            }
        }
    }

    #[test]
    fn semigroup_on_single_mode() {
        let basis = SpectralBasis::new(ord(0.7), 16).unwrap();
        let coeffs = [1.0, 0.0, 0.0];
        let t = 0.8;
        let x = 0.4;
        let got = apply_semigroup(&basis, 1.3, t, x, &coeffs).unwrap();
        let lambda1 = basis.zero(1).unwrap();
        let want = (-t * lambda1.powf(1.3)).exp() * basis.eval_phi(1, x).unwrap();
        assert!((got - want).abs() < want.abs() * 1e-13);
        assert_eq!(apply_semigroup(&basis, 1.3, t, x, &[]).unwrap(), 0.0);
    }

    #[test]
    fn projection_recovers_eigenfunction() {
        let basis = SpectralBasis::new(ord(0.5), 8).unwrap();
        let f = |x: f64| basis.eval_phi(2, x).unwrap();
        let c = project_coefficients(&basis, f, 4).unwrap();
        assert!((c[1] - 1.0).abs() < 1e-8, "c = {c:?}");
        for &i in &[0usize, 2, 3] {
            assert!(c[i].abs() < 1e-8, "c = {c:?}");
        }
    }
}

//! Minimal double-double arithmetic for the alternating Bessel power series.
//!
//! The J_nu power series suffers catastrophic cancellation for moderate
//! arguments (condition number ~ e^{2z}), so the normalized series is
//! accumulated in roughly 106-bit precision and only the final value is
//! rounded back to f64.

#[derive(Clone, Copy, Debug, Default)]
pub(crate) struct Dd {
    pub hi: f64,
    pub lo: f64,
}

#[inline]
fn two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    let bb = s - a;
    let err = (a - (s - bb)) + (b - bb);
    (s, err)
}

#[inline]
fn two_prod(a: f64, b: f64) -> (f64, f64) {
    let p = a * b;
    let err = a.mul_add(b, -p);
    (p, err)
}

impl Dd {
    #[inline]
    pub fn from_f64(x: f64) -> Self {
        Dd { hi: x, lo: 0.0 }
    }

    #[inline]
    pub fn to_f64(self) -> f64 {
        self.hi + self.lo
    }

    #[inline]
    pub fn add(self, other: Dd) -> Dd {
        let (s, e) = two_sum(self.hi, other.hi);
        let e = e + self.lo + other.lo;
        let (hi, lo) = two_sum(s, e);
        Dd { hi, lo }
    }

    #[inline]
    pub fn mul_f64(self, b: f64) -> Dd {
        let (p, e) = two_prod(self.hi, b);
        let e = e + self.lo * b;
        let (hi, lo) = two_sum(p, e);
        Dd { hi, lo }
    }

    #[inline]
    pub fn mul(self, other: Dd) -> Dd {
        let (p, e) = two_prod(self.hi, other.hi);
        let e = e + self.hi * other.lo + self.lo * other.hi;
        let (hi, lo) = two_sum(p, e);
        Dd { hi, lo }
    }

    #[allow(dead_code)] // kept alongside div; exercised in the unit tests
    #[inline]
    pub fn div_f64(self, b: f64) -> Dd {
        let q1 = self.hi / b;
        // remainder computed exactly via two_prod
        let (p, e) = two_prod(q1, b);
        let r = (self.hi - p) - e + self.lo;
        let q2 = r / b;
        let (hi, lo) = two_sum(q1, q2);
        Dd { hi, lo }
    }

    /// Exact double-double representation of a + b.
    #[inline]
    pub fn from_sum(a: f64, b: f64) -> Dd {
        let (hi, lo) = two_sum(a, b);
        Dd { hi, lo }
    }

    /// Full double-double division.
    #[inline]
    pub fn div(self, other: Dd) -> Dd {
        let q1 = self.hi / other.hi;
        let r = self.add(other.mul_f64(q1).neg());
        let q2 = r.hi / other.hi;
        let r2 = r.add(other.mul_f64(q2).neg());
        let q3 = r2.hi / other.hi;
        let (hi, lo) = two_sum(q1, q2);
        let (hi, lo) = two_sum(hi, lo + q3);
        Dd { hi, lo }
    }

    #[inline]
    pub fn neg(self) -> Dd {
        Dd {
            hi: -self.hi,
            lo: -self.lo,
        }
    }

    #[inline]
    pub fn abs_hi(self) -> f64 {
        self.hi.abs()
    }
}

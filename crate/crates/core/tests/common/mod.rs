//! Shared helpers for the integration suites: a small double-double
//! arithmetic for extended-precision oracles, independent of every code
//! path it checks, and a central finite-difference gradient.

use hyperball::model::HyperbolicPoint;
use hyperball::potential::{potential, WeightedMeasure};
use nalgebra::DVector;

/// Central finite differences of the potential in ambient coordinates,
/// step 1e-6.
#[allow(dead_code)]
pub fn fd_gradient<P: HyperbolicPoint>(x: &P, mu: &WeightedMeasure<P>) -> DVector<f64> {
    let step = 1e-6;
    let base = x.to_ambient();
    DVector::from_fn(x.ambient_dim(), |i, _| {
        let mut up = base.clone();
        let mut down = base.clone();
        up[i] += step;
        down[i] -= step;
        (potential(&P::from_ambient(&up), mu) - potential(&P::from_ambient(&down), mu))
            / (2.0 * step)
    })
}

/// Unevaluated sum hi + lo with |lo| ≤ ulp(hi)/2: roughly 32 significant
/// decimal digits.
#[derive(Clone, Copy, Debug)]
pub struct Dd {
    hi: f64,
    lo: f64,
}

fn two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    let bb = s - a;
    (s, (a - (s - bb)) + (b - bb))
}

fn two_prod(a: f64, b: f64) -> (f64, f64) {
    let p = a * b;
    (p, a.mul_add(b, -p))
}

impl Dd {
    pub const fn new(x: f64) -> Self {
        Self { hi: x, lo: 0.0 }
    }

    fn renorm(hi: f64, lo: f64) -> Self {
        let (s, e) = two_sum(hi, lo);
        Self { hi: s, lo: e }
    }

    pub fn add(self, o: Self) -> Self {
        let (s, e) = two_sum(self.hi, o.hi);
        Self::renorm(s, e + self.lo + o.lo)
    }

    pub fn neg(self) -> Self {
        Self {
            hi: -self.hi,
            lo: -self.lo,
        }
    }

    pub fn sub(self, o: Self) -> Self {
        self.add(o.neg())
    }

    pub fn mul(self, o: Self) -> Self {
        let (p, e) = two_prod(self.hi, o.hi);
        Self::renorm(p, e + self.hi * o.lo + self.lo * o.hi)
    }

    pub fn mul_f64(self, x: f64) -> Self {
        self.mul(Self::new(x))
    }

    pub fn div(self, o: Self) -> Self {
        let q1 = self.hi / o.hi;
        let r = self.sub(o.mul_f64(q1));
        let q2 = (r.hi + r.lo) / o.hi;
        Self::renorm(q1, q2)
    }

    pub fn sqrt(self) -> Self {
        let mut y = Self::new(self.hi.sqrt());
        for _ in 0..2 {
            y = y.add(self.div(y)).mul_f64(0.5);
        }
        y
    }

    /// Sixth root by Newton iteration on t⁶ = self.
    pub fn root6(self) -> Self {
        let mut t = Self::new(self.hi.powf(1.0 / 6.0));
        for _ in 0..3 {
            let t2 = t.mul(t);
            let t4 = t2.mul(t2);
            let t5 = t4.mul(t);
            let t6 = t5.mul(t);
            let delta = t6.sub(self).div(t5.mul_f64(6.0));
            t = t.sub(delta);
        }
        t
    }

    pub fn to_f64(self) -> f64 {
        self.hi + self.lo
    }
}

/// The exact radical for the barycenter of the disk atoms {1/2, i/2, 0}:
///
/// ```text
/// a = (1+i)(4/3 + 5√2/(3t) − t/(3√2)),  t = (38636 + 1164√1101)^(1/6),
/// ```
///
/// evaluated in double-double precision; returns the common value of the
/// real and imaginary parts.
pub fn three_point_radical() -> f64 {
    let t = Dd::new(38636.0)
        .add(Dd::new(1101.0).sqrt().mul_f64(1164.0))
        .root6();
    let sqrt2 = Dd::new(2.0).sqrt();
    let four_thirds = Dd::new(4.0).div(Dd::new(3.0));
    let second = sqrt2.mul_f64(5.0).div(t.mul_f64(3.0));
    let third = t.div(sqrt2.mul_f64(3.0));
    four_thirds.add(second).sub(third).to_f64()
}

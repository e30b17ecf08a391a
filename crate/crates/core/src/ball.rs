//! Real hyperbolic (Poincaré) ball in ℝⁿ.
//!
//! The basic quantity is
//!
//! ```text
//! ρ(x, a) = |x − a|² + (1 − |a|²)(1 − |x|²)
//! ```
//!
//! from which everything else is built: the Möbius involution
//! `h_a(x) = (a|x−a|² + (1−|a|²)(a−x)) / ρ(x,a)`, the Poincaré distance
//! `d_h(x,y) = ½ log((1+R)/(1−R))` with `R = |x−y|/√ρ(x,y)`, and the
//! Jacobian `((1−|a|²)/ρ(a,x))ⁿ` of `h_a`. A general Möbius self-map of the
//! ball decomposes as an orthogonal map composed with some `h_c`; that pair
//! is what [`RealMobius`] stores.

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::Error;
use crate::model::{BallMap, HyperbolicPoint};

/// Constructors accept coordinates with `|x| ≤ 1 − INTERIOR_MARGIN`; points
/// closer to the boundary are rejected because the log/ρ terms degrade in
/// floating point.
pub const INTERIOR_MARGIN: f64 = 1e-12;

/// Tolerance for orthogonality, unitarity and |det| = 1 checks.
pub const ISOMETRY_TOL: f64 = 1e-12;

/// A point strictly inside the unit ball of ℝⁿ, n ≥ 2.
#[derive(Clone, Debug, PartialEq)]
pub struct RealPoint {
    coords: DVector<f64>,
}

impl RealPoint {
    pub fn new(coords: Vec<f64>) -> Result<Self, Error> {
        if coords.len() < 2 {
            return Err(Error::BadDimension {
                dim: coords.len(),
                reason: "the real model needs n >= 2",
            });
        }
        let coords = DVector::from_vec(coords);
        let norm = coords.norm();
        if !norm.is_finite() || norm > 1.0 - INTERIOR_MARGIN {
            return Err(Error::PointOutsideBall {
                norm,
                limit: 1.0 - INTERIOR_MARGIN,
            });
        }
        Ok(Self { coords })
    }

    pub fn origin(n: usize) -> Self {
        debug_assert!(n >= 2);
        Self {
            coords: DVector::zeros(n),
        }
    }

    /// Wrap coordinates that are already known to be interior, e.g. images
    /// of interior points under a self-map of the ball.
    pub(crate) fn from_vector(coords: DVector<f64>) -> Self {
        debug_assert!(coords.norm() < 1.0);
        Self { coords }
    }

    pub fn coords(&self) -> &DVector<f64> {
        &self.coords
    }

    pub fn norm(&self) -> f64 {
        self.coords.norm()
    }

    pub fn norm_sq(&self) -> f64 {
        self.coords.norm_squared()
    }
}

/// ρ(x, a) = |x−a|² + (1−|a|²)(1−|x|²); strictly positive for interior
/// points.
///
/// Panics if the dimensions disagree.
pub fn rho(x: &RealPoint, a: &RealPoint) -> f64 {
    assert_eq!(x.coords.len(), a.coords.len(), "rho: dimension mismatch");
    let diff = &x.coords - &a.coords;
    diff.norm_squared() + (1.0 - a.norm_sq()) * (1.0 - x.norm_sq())
}

/// The Möbius involution h_a: swaps `a` and the origin, h_a ∘ h_a = id.
pub fn mobius_map(a: &RealPoint, x: &RealPoint) -> RealPoint {
    let diff_sq = (&x.coords - &a.coords).norm_squared();
    let one_minus_a = 1.0 - a.norm_sq();
    let r = diff_sq + one_minus_a * (1.0 - x.norm_sq());
    let num = &a.coords * diff_sq + (&a.coords - &x.coords) * one_minus_a;
    RealPoint::from_vector(num / r)
}

/// Poincaré distance d_h(x, y) = ½ log((1+R)/(1−R)), R = |x−y|/√ρ(x,y).
pub fn poincare_distance(x: &RealPoint, y: &RealPoint) -> f64 {
    let diff = (&x.coords - &y.coords).norm();
    if diff == 0.0 {
        return 0.0;
    }
    let r = diff / rho(x, y).sqrt();
    r.atanh()
}

/// Jacobian of x ↦ h_a(x): ((1−|a|²)/ρ(a,x))ⁿ, which also equals
/// ((1−|h_a(x)|²)/(1−|x|²))ⁿ.
pub fn hyperbolic_jacobian(a: &RealPoint, x: &RealPoint) -> f64 {
    let n = x.coords.len() as i32;
    ((1.0 - a.norm_sq()) / rho(a, x)).powi(n)
}

/// Point at parameter t of the geodesic from `a` to `b`, parametrized
/// proportionally to arc length: conjugate by h_a so the geodesic becomes a
/// radial segment, walk the radial distance, map back.
pub fn geodesic_point(a: &RealPoint, b: &RealPoint, t: f64) -> RealPoint {
    let image = mobius_map(a, b);
    let r = image.norm();
    if r < 1e-300 {
        return a.clone();
    }
    let radius = (t * r.atanh()).tanh();
    let radial = RealPoint::from_vector(image.coords() * (radius / r));
    mobius_map(a, &radial)
}

/// A Möbius self-map of the ball in the canonical form A ∘ h_c with A
/// orthogonal.
#[derive(Clone, Debug)]
pub struct RealMobius {
    center: RealPoint,
    orthogonal: DMatrix<f64>,
}

impl RealMobius {
    pub fn new(center: RealPoint, orthogonal: DMatrix<f64>) -> Result<Self, Error> {
        let n = center.coords.len();
        if orthogonal.nrows() != n || orthogonal.ncols() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                found: orthogonal.nrows().max(orthogonal.ncols()),
            });
        }
        let defect = (orthogonal.transpose() * &orthogonal - DMatrix::identity(n, n)).amax();
        if defect > ISOMETRY_TOL {
            return Err(Error::NotIsometry { defect });
        }
        let det_defect = (orthogonal.determinant().abs() - 1.0).abs();
        if det_defect > ISOMETRY_TOL {
            return Err(Error::NotIsometry {
                defect: det_defect,
            });
        }
        Ok(Self { center, orthogonal })
    }

    /// The pure involution h_c (orthogonal part = identity).
    pub fn translation(center: RealPoint) -> Self {
        let n = center.coords.len();
        Self {
            center,
            orthogonal: DMatrix::identity(n, n),
        }
    }

    pub fn identity(n: usize) -> Self {
        Self::translation(RealPoint::origin(n))
    }

    pub fn center(&self) -> &RealPoint {
        &self.center
    }

    pub fn orthogonal_part(&self) -> &DMatrix<f64> {
        &self.orthogonal
    }

    /// Deterministic pseudo-random Möbius map: |center| ≤ 0.9, orthogonal
    /// part from a QR factorization of a Gaussian matrix.
    pub fn random(seed: u64, n: usize) -> Self {
        assert!(n >= 2, "the real model needs n >= 2");
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let center = RealPoint::random_interior(&mut rng, n, 0.9);
        let gauss = DMatrix::from_fn(n, n, |_, _| standard_normal(&mut rng));
        let qr = gauss.qr();
        let mut q = qr.q();
        let r = qr.r();
        // Fix column signs so the factorization is canonical.
        for j in 0..n {
            if r[(j, j)] < 0.0 {
                q.column_mut(j).neg_mut();
            }
        }
        Self {
            center,
            orthogonal: q,
        }
    }
}

impl BallMap<RealPoint> for RealMobius {
    fn apply(&self, x: &RealPoint) -> RealPoint {
        RealPoint::from_vector(&self.orthogonal * mobius_map(&self.center, x).coords())
    }

    fn apply_inverse(&self, y: &RealPoint) -> RealPoint {
        // (A ∘ h_c)⁻¹ = h_c ∘ Aᵀ
        let pulled = RealPoint::from_vector(self.orthogonal.transpose() * &y.coords);
        mobius_map(&self.center, &pulled)
    }
}

pub(crate) fn standard_normal<R: Rng + ?Sized>(rng: &mut R) -> f64 {
    // Box–Muller; u1 in (0, 1].
    let u1: f64 = 1.0 - rng.random::<f64>();
    let u2: f64 = rng.random();
    (-2.0 * u1.ln()).sqrt() * (std::f64::consts::TAU * u2).cos()
}

/// Gaussian direction rescaled to a radius drawn as max_norm · u^(1/dim):
/// uniform in the ball of radius max_norm.
pub(crate) fn uniform_ball_vector<R: Rng + ?Sized>(
    rng: &mut R,
    dim: usize,
    max_norm: f64,
) -> DVector<f64> {
    let mut dir = DVector::from_fn(dim, |_, _| standard_normal(rng));
    let norm = dir.norm();
    if norm < 1e-300 {
        return DVector::zeros(dim);
    }
    let u: f64 = rng.random();
    let radius = max_norm * u.powf(1.0 / dim as f64);
    dir *= radius / norm;
    dir
}

impl HyperbolicPoint for RealPoint {
    type Map = RealMobius;

    fn dim(&self) -> usize {
        self.coords.len()
    }

    fn ambient_dim(&self) -> usize {
        self.coords.len()
    }

    fn to_ambient(&self) -> DVector<f64> {
        self.coords.clone()
    }

    fn from_ambient(coords: &DVector<f64>) -> Self {
        Self::from_vector(coords.clone())
    }

    fn euclidean_norm(&self) -> f64 {
        self.norm()
    }

    fn involution(center: &Self, x: &Self) -> Self {
        mobius_map(center, x)
    }

    fn distance(a: &Self, b: &Self) -> f64 {
        poincare_distance(a, b)
    }

    fn log_kernel(x: &Self, y: &Self) -> f64 {
        rho(x, y).ln() - (1.0 - x.norm_sq()).ln() - (1.0 - y.norm_sq()).ln()
    }

    fn accumulate_gradient(x: &Self, y: &Self, weight: f64, acc: &mut DVector<f64>) {
        // ∇[log ρ(x,y) − log(1−|x|²)] = 2x/(1−|x|²) + (2x|y|² − 2y)/ρ(x,y)
        let r = rho(x, y);
        let c_x = 2.0 / (1.0 - x.norm_sq()) + 2.0 * y.norm_sq() / r;
        acc.axpy(weight * c_x, &x.coords, 1.0);
        acc.axpy(-2.0 * weight / r, &y.coords, 1.0);
    }

    fn geodesic(a: &Self, b: &Self, t: f64) -> Self {
        geodesic_point(a, b, t)
    }

    fn invariant_density_exponent(&self) -> i32 {
        self.coords.len() as i32
    }

    fn random_map(seed: u64, dim: usize) -> RealMobius {
        RealMobius::random(seed, dim)
    }

    fn random_interior<R: Rng + ?Sized>(rng: &mut R, dim: usize, max_norm: f64) -> Self {
        Self::from_vector(uniform_ball_vector(rng, dim, max_norm))
    }
}

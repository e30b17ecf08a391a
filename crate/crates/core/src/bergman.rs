//! Complex hyperbolic (Bergman) ball in ℂᵐ.
//!
//! With the Hermitian inner product `⟨z,w⟩ = Σ z_k · conj(w_k)` (linear in
//! the first slot), the involutive automorphisms are
//!
//! ```text
//! p_a(z) = (a − P_a z − s_a Q_a z) / (1 − ⟨z,a⟩),   s_a = (1 − |a|²)^½,
//! ```
//!
//! where `P_a` projects onto the complex line of `a` and `Q_a = I − P_a`.
//! The Bergman distance is `d_B(z,w) = ½ log((1+|p_w(z)|)/(1−|p_w(z)|))`
//! and the real Jacobian of `p_a` is `((1−|a|²)/|1−⟨z,a⟩|²)^{m+1}`. A
//! general automorphism decomposes as `U ∘ p_c` with `U` unitary; that pair
//! is what [`ComplexAutomorphism`] stores.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::ball::{standard_normal, uniform_ball_vector, INTERIOR_MARGIN, ISOMETRY_TOL};
use crate::error::Error;
use crate::model::{BallMap, HyperbolicPoint};

/// A point strictly inside the unit ball of ℂᵐ, m ≥ 1.
#[derive(Clone, Debug, PartialEq)]
pub struct ComplexPoint {
    coords: DVector<Complex64>,
}

/// ⟨z, w⟩ = Σ z_k · conj(w_k), linear in the first slot.
pub fn inner(z: &DVector<Complex64>, w: &DVector<Complex64>) -> Complex64 {
    assert_eq!(z.len(), w.len(), "inner: dimension mismatch");
    z.iter().zip(w.iter()).map(|(a, b)| a * b.conj()).sum()
}

impl ComplexPoint {
    pub fn new(coords: Vec<Complex64>) -> Result<Self, Error> {
        if coords.is_empty() {
            return Err(Error::BadDimension {
                dim: 0,
                reason: "the complex model needs m >= 1",
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

    pub fn origin(m: usize) -> Self {
        debug_assert!(m >= 1);
        Self {
            coords: DVector::zeros(m),
        }
    }

    /// One-dimensional point from a scalar.
    pub fn from_scalar(z: Complex64) -> Result<Self, Error> {
        Self::new(vec![z])
    }

    pub(crate) fn from_vector(coords: DVector<Complex64>) -> Self {
        debug_assert!(coords.norm() < 1.0);
        Self { coords }
    }

    pub fn coords(&self) -> &DVector<Complex64> {
        &self.coords
    }

    pub fn norm(&self) -> f64 {
        self.coords.norm()
    }

    pub fn norm_sq(&self) -> f64 {
        self.coords.norm_squared()
    }
}

/// Orthogonal projection onto the complex line spanned by `a`;
/// `P_0 = 0` by convention.
pub fn project_parallel(a: &ComplexPoint, z: &ComplexPoint) -> ComplexPoint {
    let denom = a.norm_sq();
    if denom == 0.0 {
        return ComplexPoint::origin(a.coords.len());
    }
    let scale = inner(&z.coords, &a.coords) / denom;
    ComplexPoint::from_vector(a.coords.clone() * scale)
}

/// The involutive automorphism p_a: swaps `a` and the origin.
pub fn bergman_automorphism(a: &ComplexPoint, z: &ComplexPoint) -> ComplexPoint {
    assert_eq!(
        a.coords.len(),
        z.coords.len(),
        "bergman_automorphism: dimension mismatch"
    );
    let s = (1.0 - a.norm_sq()).sqrt();
    let p = project_parallel(a, z);
    let q = &z.coords - p.coords();
    let num = &a.coords - p.coords() - q * Complex64::new(s, 0.0);
    let denom = Complex64::new(1.0, 0.0) - inner(&z.coords, &a.coords);
    ComplexPoint::from_vector(num.map(|v| v / denom))
}

/// Bergman distance d_B(z, w) = ½ log((1+|p_w(z)|)/(1−|p_w(z)|)).
pub fn bergman_distance(z: &ComplexPoint, w: &ComplexPoint) -> f64 {
    if z.coords == w.coords {
        return 0.0;
    }
    bergman_automorphism(w, z).norm().atanh()
}

/// Real Jacobian of z ↦ p_a(z): ((1−|a|²)/|1−⟨z,a⟩|²)^{m+1}, which also
/// equals ((1−|p_a(z)|²)/(1−|z|²))^{m+1}.
pub fn bergman_jacobian(a: &ComplexPoint, z: &ComplexPoint) -> f64 {
    let m = z.coords.len() as i32;
    let denom = (Complex64::new(1.0, 0.0) - inner(&z.coords, &a.coords)).norm_sqr();
    ((1.0 - a.norm_sq()) / denom).powi(m + 1)
}

/// Geodesic point by p_a-conjugation of radial segments, as in the real
/// model.
pub fn geodesic_point(a: &ComplexPoint, b: &ComplexPoint, t: f64) -> ComplexPoint {
    let image = bergman_automorphism(a, b);
    let r = image.norm();
    if r < 1e-300 {
        return a.clone();
    }
    let radius = (t * r.atanh()).tanh();
    let radial = ComplexPoint::from_vector(image.coords() * Complex64::new(radius / r, 0.0));
    bergman_automorphism(a, &radial)
}

/// A holomorphic automorphism of the ball in the canonical form U ∘ p_c
/// with U unitary.
#[derive(Clone, Debug)]
pub struct ComplexAutomorphism {
    center: ComplexPoint,
    unitary: DMatrix<Complex64>,
}

impl ComplexAutomorphism {
    pub fn new(center: ComplexPoint, unitary: DMatrix<Complex64>) -> Result<Self, Error> {
        let m = center.coords.len();
        if unitary.nrows() != m || unitary.ncols() != m {
            return Err(Error::DimensionMismatch {
                expected: m,
                found: unitary.nrows().max(unitary.ncols()),
            });
        }
        let defect = (unitary.adjoint() * &unitary - DMatrix::identity(m, m))
            .iter()
            .map(|c| c.norm())
            .fold(0.0, f64::max);
        if defect > ISOMETRY_TOL {
            return Err(Error::NotIsometry { defect });
        }
        Ok(Self { center, unitary })
    }

    /// The pure involution p_c (unitary part = identity).
    pub fn translation(center: ComplexPoint) -> Self {
        let m = center.coords.len();
        Self {
            center,
            unitary: DMatrix::identity(m, m),
        }
    }

    pub fn identity(m: usize) -> Self {
        Self::translation(ComplexPoint::origin(m))
    }

    pub fn center(&self) -> &ComplexPoint {
        &self.center
    }

    pub fn unitary_part(&self) -> &DMatrix<Complex64> {
        &self.unitary
    }

    /// Deterministic pseudo-random automorphism: |center| ≤ 0.9, unitary
    /// part from a QR factorization of a complex Gaussian matrix.
    pub fn random(seed: u64, m: usize) -> Self {
        assert!(m >= 1, "the complex model needs m >= 1");
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let center = ComplexPoint::random_interior(&mut rng, m, 0.9);
        let gauss = DMatrix::from_fn(m, m, |_, _| {
            Complex64::new(standard_normal(&mut rng), standard_normal(&mut rng))
        });
        let qr = gauss.qr();
        let mut q = qr.q();
        let r = qr.r();
        // Fix column phases so the factorization is canonical.
        for j in 0..m {
            let d = r[(j, j)];
            if d.norm() > 0.0 {
                let phase = d / d.norm();
                for v in q.column_mut(j).iter_mut() {
                    *v *= phase;
                }
            }
        }
        Self { center, unitary: q }
    }
}

impl BallMap<ComplexPoint> for ComplexAutomorphism {
    fn apply(&self, z: &ComplexPoint) -> ComplexPoint {
        ComplexPoint::from_vector(&self.unitary * bergman_automorphism(&self.center, z).coords())
    }

    fn apply_inverse(&self, w: &ComplexPoint) -> ComplexPoint {
        // (U ∘ p_c)⁻¹ = p_c ∘ U*
        let pulled = ComplexPoint::from_vector(self.unitary.adjoint() * &w.coords);
        bergman_automorphism(&self.center, &pulled)
    }
}

impl HyperbolicPoint for ComplexPoint {
    type Map = ComplexAutomorphism;

    fn dim(&self) -> usize {
        self.coords.len()
    }

    fn ambient_dim(&self) -> usize {
        2 * self.coords.len()
    }

    fn to_ambient(&self) -> DVector<f64> {
        DVector::from_fn(2 * self.coords.len(), |i, _| {
            let z = self.coords[i / 2];
            if i % 2 == 0 {
                z.re
            } else {
                z.im
            }
        })
    }

    fn from_ambient(coords: &DVector<f64>) -> Self {
        debug_assert_eq!(coords.len() % 2, 0);
        let m = coords.len() / 2;
        Self::from_vector(DVector::from_fn(m, |k, _| {
            Complex64::new(coords[2 * k], coords[2 * k + 1])
        }))
    }

    fn euclidean_norm(&self) -> f64 {
        self.norm()
    }

    fn involution(center: &Self, x: &Self) -> Self {
        bergman_automorphism(center, x)
    }

    fn distance(a: &Self, b: &Self) -> f64 {
        bergman_distance(a, b)
    }

    fn log_kernel(x: &Self, y: &Self) -> f64 {
        let q = Complex64::new(1.0, 0.0) - inner(&x.coords, &y.coords);
        q.norm_sqr().ln() - (1.0 - x.norm_sq()).ln() - (1.0 - y.norm_sq()).ln()
    }

    fn accumulate_gradient(x: &Self, y: &Self, weight: f64, acc: &mut DVector<f64>) {
        // Per coordinate k, with D_k = ∂/∂x_k + i ∂/∂y_k:
        //   D_k log_kernel = 2 z_k/(1−|z|²) − 2 y_k/(1−⟨y,z⟩)
        // and the ambient gradient components are (Re D_k, Im D_k).
        let one_minus = 1.0 - x.norm_sq();
        let denom = Complex64::new(1.0, 0.0) - inner(&y.coords, &x.coords);
        for k in 0..x.coords.len() {
            let d = 2.0 * x.coords[k] / one_minus - 2.0 * y.coords[k] / denom;
            acc[2 * k] += weight * d.re;
            acc[2 * k + 1] += weight * d.im;
        }
    }

    fn geodesic(a: &Self, b: &Self, t: f64) -> Self {
        geodesic_point(a, b, t)
    }

    fn invariant_density_exponent(&self) -> i32 {
        self.coords.len() as i32 + 1
    }

    fn random_map(seed: u64, dim: usize) -> ComplexAutomorphism {
        ComplexAutomorphism::random(seed, dim)
    }

    fn random_interior<R: Rng + ?Sized>(rng: &mut R, dim: usize, max_norm: f64) -> Self {
        let ambient = uniform_ball_vector(rng, 2 * dim, max_norm);
        Self::from_vector(DVector::from_fn(dim, |k, _| {
            Complex64::new(ambient[2 * k], ambient[2 * k + 1])
        }))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ball::{poincare_distance, RealPoint};
    use approx::{assert_abs_diff_eq, assert_relative_eq};
    use proptest::prelude::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn pt1(z: Complex64) -> ComplexPoint {
        ComplexPoint::from_scalar(z).unwrap()
    }

    fn pt2(z0: Complex64, z1: Complex64) -> ComplexPoint {
        ComplexPoint::new(vec![z0, z1]).unwrap()
    }

    #[test]
    fn construction_rejects_bad_points() {
        assert!(ComplexPoint::new(vec![]).is_err());
        assert!(ComplexPoint::from_scalar(c(1.0, 0.0)).is_err());
        assert!(ComplexPoint::new(vec![c(0.8, 0.0), c(0.0, 0.7)]).is_err());
        assert!(ComplexPoint::new(vec![c(0.5, 0.5), c(0.1, 0.0)]).is_ok());
    }

    #[test]
    fn projection_examples() {
        let a = pt2(c(0.3, 0.1), c(0.0, 0.2));
        assert_abs_diff_eq!(
            (project_parallel(&a, &a).coords() - a.coords()).norm(),
            0.0,
            epsilon = 1e-15
        );
        // orthogonal input projects to zero: pick z with ⟨z,a⟩ = 0
        let z = pt2(c(0.0, -0.2), c(0.1, 0.3));
        let orth = {
            // Gram–Schmidt against a
            let coeff = inner(z.coords(), a.coords()) / a.norm_sq();
            ComplexPoint::from_vector(z.coords() - a.coords() * coeff)
        };
        assert!(project_parallel(&a, &orth).norm() < 1e-15);
        // a = 0 returns the zero vector
        let zero = ComplexPoint::origin(2);
        assert_eq!(project_parallel(&zero, &z).norm(), 0.0);
    }

    #[test]
    fn projection_is_idempotent() {
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        for _ in 0..100 {
            let a = ComplexPoint::random_interior(&mut rng, 3, 0.9);
            let z = ComplexPoint::random_interior(&mut rng, 3, 0.9);
            let once = project_parallel(&a, &z);
            let twice = project_parallel(&a, &once);
            assert!((once.coords() - twice.coords()).norm() <= 1e-14);
        }
    }

    #[test]
    fn automorphism_swaps_center_and_origin() {
        let a = pt2(c(0.3, -0.2), c(0.1, 0.4));
        let o = ComplexPoint::origin(2);
        assert!((bergman_automorphism(&a, &o).coords() - a.coords()).norm() < 1e-15);
        assert!(bergman_automorphism(&a, &a).norm() < 1e-15);
    }

    #[test]
    fn automorphism_at_origin_is_negation() {
        let z = pt2(c(0.2, 0.1), c(-0.3, 0.0));
        let o = ComplexPoint::origin(2);
        let image = bergman_automorphism(&o, &z);
        assert!((image.coords() + z.coords()).norm() < 1e-15);
    }

    #[test]
    fn one_dimensional_case_is_the_disk_mobius_map() {
        // p_a(z) = (a − z)/(1 − z·conj(a)) in ℂ¹
        let a = pt1(c(0.3, -0.4));
        let z = pt1(c(-0.1, 0.5));
        let expected = (a.coords()[0] - z.coords()[0])
            / (Complex64::new(1.0, 0.0) - z.coords()[0] * a.coords()[0].conj());
        let got = bergman_automorphism(&a, &z).coords()[0];
        assert_relative_eq!(got.re, expected.re, max_relative = 1e-14);
        assert_relative_eq!(got.im, expected.im, max_relative = 1e-14);
    }

    #[test]
    fn distance_from_origin_closed_form() {
        let z = pt1(c(0.5, 0.0));
        let o = ComplexPoint::origin(1);
        assert_relative_eq!(
            bergman_distance(&o, &z),
            0.5 * 3.0f64.ln(),
            max_relative = 1e-14
        );
        assert_eq!(bergman_distance(&z, &z), 0.0);
    }

    #[test]
    fn norm_identity_for_automorphism_image() {
        // 1 − |p_a(z)|² = (1−|z|²)(1−|a|²)/|1−⟨a,z⟩|²
        let mut rng = ChaCha8Rng::seed_from_u64(22);
        for _ in 0..200 {
            let a = ComplexPoint::random_interior(&mut rng, 2, 0.9);
            let z = ComplexPoint::random_interior(&mut rng, 2, 0.9);
            let lhs = 1.0 - bergman_automorphism(&a, &z).norm_sq();
            let denom = (Complex64::new(1.0, 0.0) - inner(a.coords(), z.coords())).norm_sqr();
            let rhs = (1.0 - z.norm_sq()) * (1.0 - a.norm_sq()) / denom;
            assert_relative_eq!(lhs, rhs, max_relative = 1e-12);
        }
    }

    #[test]
    fn jacobian_trivial_values_and_consistency() {
        let z = pt2(c(0.2, 0.1), c(0.0, -0.3));
        let o = ComplexPoint::origin(2);
        assert_relative_eq!(bergman_jacobian(&o, &z), 1.0, max_relative = 1e-15);
        let a = pt2(c(0.4, 0.0), c(0.1, 0.2));
        assert_relative_eq!(
            bergman_jacobian(&a, &o),
            (1.0 - a.norm_sq()).powi(3),
            max_relative = 1e-13
        );
        let mut rng = ChaCha8Rng::seed_from_u64(23);
        for _ in 0..200 {
            let a = ComplexPoint::random_interior(&mut rng, 2, 0.9);
            let z = ComplexPoint::random_interior(&mut rng, 2, 0.9);
            let image = bergman_automorphism(&a, &z);
            let lhs = bergman_jacobian(&a, &z);
            let rhs = ((1.0 - image.norm_sq()) / (1.0 - z.norm_sq())).powi(3);
            assert_relative_eq!(lhs, rhs, max_relative = 1e-10);
        }
    }

    #[test]
    fn random_automorphism_is_deterministic_and_unitary() {
        let q1 = ComplexAutomorphism::random(7, 2);
        let q2 = ComplexAutomorphism::random(7, 2);
        assert_eq!(q1.center().coords(), q2.center().coords());
        assert_eq!(q1.unitary_part(), q2.unitary_part());
        assert!(q1.center().norm() <= 0.9);
        let defect = (q1.unitary_part().adjoint() * q1.unitary_part()
            - DMatrix::identity(2, 2))
        .iter()
        .map(|v| v.norm())
        .fold(0.0, f64::max);
        assert!(defect <= 1e-12, "unitarity defect {defect:e}");
    }

    #[test]
    fn automorphisms_are_isometries() {
        let mut rng = ChaCha8Rng::seed_from_u64(24);
        for seed in 0..20 {
            let q = ComplexAutomorphism::random(seed, 2);
            let z = ComplexPoint::random_interior(&mut rng, 2, 0.9);
            let w = ComplexPoint::random_interior(&mut rng, 2, 0.9);
            let before = bergman_distance(&z, &w);
            let after = bergman_distance(&q.apply(&z), &q.apply(&w));
            assert_relative_eq!(before, after, max_relative = 1e-10, epsilon = 1e-12);
        }
    }

    #[test]
    fn automorphism_inverse_round_trip() {
        let mut rng = ChaCha8Rng::seed_from_u64(25);
        for seed in 0..20 {
            let q = ComplexAutomorphism::random(seed, 3);
            let z = ComplexPoint::random_interior(&mut rng, 3, 0.9);
            let back = q.apply_inverse(&q.apply(&z));
            assert!((back.coords() - z.coords()).norm() <= 1e-12);
        }
    }

    #[test]
    fn translation_and_centerless_map() {
        let center = pt2(c(0.2, -0.1), c(0.0, 0.3));
        let q = ComplexAutomorphism::translation(center.clone());
        assert!(q.apply(&center).norm() < 1e-15);
        // U ∘ p_0 = z ↦ U(−z)
        let phase = Complex64::from_polar(1.0, 0.7);
        let unitary = DMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![
            phase,
            phase.conj(),
        ]));
        let q = ComplexAutomorphism::new(ComplexPoint::origin(2), unitary.clone()).unwrap();
        let z = pt2(c(0.1, 0.2), c(-0.3, 0.1));
        let expected = unitary * (-z.coords());
        assert!((q.apply(&z).coords() - expected).norm() < 1e-15);
    }

    #[test]
    fn rejects_non_unitary_part() {
        let m = DMatrix::from_row_slice(1, 1, &[c(0.9, 0.0)]);
        assert!(matches!(
            ComplexAutomorphism::new(pt1(c(0.1, 0.0)), m),
            Err(Error::NotIsometry { .. })
        ));
    }

    #[test]
    fn planar_distance_agrees_with_real_model() {
        // m = 1 with real embeddings coincides with the n = 2 Poincaré ball
        let mut rng = ChaCha8Rng::seed_from_u64(26);
        for _ in 0..200 {
            let z = ComplexPoint::random_interior(&mut rng, 1, 0.9);
            let w = ComplexPoint::random_interior(&mut rng, 1, 0.9);
            let zr = RealPoint::new(vec![z.coords()[0].re, z.coords()[0].im]).unwrap();
            let wr = RealPoint::new(vec![w.coords()[0].re, w.coords()[0].im]).unwrap();
            assert_relative_eq!(
                bergman_distance(&z, &w),
                poincare_distance(&zr, &wr),
                max_relative = 1e-12,
                epsilon = 1e-15
            );
        }
    }

    #[test]
    fn distance_function_is_geodesically_convex() {
        let mut rng = ChaCha8Rng::seed_from_u64(27);
        for _ in 0..100 {
            let p = ComplexPoint::random_interior(&mut rng, 2, 0.85);
            let a = ComplexPoint::random_interior(&mut rng, 2, 0.85);
            let b = ComplexPoint::random_interior(&mut rng, 2, 0.85);
            let da = bergman_distance(&p, &a);
            let db = bergman_distance(&p, &b);
            for k in 1..10 {
                let t = k as f64 / 10.0;
                let gt = geodesic_point(&a, &b, t);
                assert!(bergman_distance(&p, &gt) <= (1.0 - t) * da + t * db + 1e-9);
            }
        }
    }

    proptest! {
        #[test]
        fn automorphism_is_involution(s in any::<u64>()) {
            let mut rng = ChaCha8Rng::seed_from_u64(s);
            let a = ComplexPoint::random_interior(&mut rng, 2, 0.9);
            let z = ComplexPoint::random_interior(&mut rng, 2, 0.9);
            let twice = bergman_automorphism(&a, &bergman_automorphism(&a, &z));
            prop_assert!((twice.coords() - z.coords()).norm() <= 1e-10);
        }
    }
}

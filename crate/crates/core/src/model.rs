//! Model-agnostic interface shared by the real (Poincaré) and complex
//! (Bergman) ball models.
//!
//! The barycenter machinery never needs to know which model it runs in: it
//! works with the defining involution `x ↦ h_c(x)` (resp. `p_c`), the model
//! distance, the log-potential integrand and its gradient, and flat ambient
//! coordinates (ℝⁿ, or ℝ²ᵐ for the complex ball) for its bookkeeping.

use nalgebra::DVector;
use rand::Rng;

/// An isometric self-map of the ball: `A ∘ h_c` in the real model,
/// `U ∘ p_c` in the complex one.
pub trait BallMap<P> {
    fn apply(&self, x: &P) -> P;
    fn apply_inverse(&self, x: &P) -> P;
}

/// A point of one of the two hyperbolic ball models.
pub trait HyperbolicPoint: Clone + PartialEq + std::fmt::Debug {
    type Map: BallMap<Self> + Clone + std::fmt::Debug;

    /// Model dimension: n for ℝⁿ, m for ℂᵐ.
    fn dim(&self) -> usize;

    /// Ambient real dimension: n, or 2m.
    fn ambient_dim(&self) -> usize;

    fn to_ambient(&self) -> DVector<f64>;

    /// Rebuild a point from ambient coordinates, which must lie strictly
    /// inside the unit ball.
    fn from_ambient(coords: &DVector<f64>) -> Self;

    /// Euclidean norm of the coordinate vector.
    fn euclidean_norm(&self) -> f64;

    /// The involutive self-map exchanging `center` and the origin.
    fn involution(center: &Self, x: &Self) -> Self;

    /// Poincaré resp. Bergman distance.
    fn distance(a: &Self, b: &Self) -> f64;

    /// `−log[(1−|x|²)(1−|y|²)/…]`, the integrand of the barycenter
    /// potential; equals `log cosh²` of the distance.
    fn log_kernel(x: &Self, y: &Self) -> f64;

    /// Add `weight ×` the ambient gradient of `log_kernel(·, y)` at `x`
    /// into `acc`.
    fn accumulate_gradient(x: &Self, y: &Self, weight: f64, acc: &mut DVector<f64>);

    /// Point at parameter `t ∈ [0, 1]` of the geodesic from `a` to `b`,
    /// parametrized proportionally to arc length.
    fn geodesic(a: &Self, b: &Self, t: f64) -> Self;

    /// Exponent k of the invariant density `(1−|x|²)^{−k}`: n in ℝⁿ and
    /// m+1 in ℂᵐ, matching the Jacobian of the respective self-maps.
    fn invariant_density_exponent(&self) -> i32;

    /// Deterministic pseudo-random isometry, for equivariance checks.
    fn random_map(seed: u64, dim: usize) -> Self::Map;

    /// Point drawn uniformly from the ball of radius `max_norm`.
    fn random_interior<R: Rng + ?Sized>(rng: &mut R, dim: usize, max_norm: f64) -> Self;
}

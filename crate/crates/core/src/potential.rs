//! Barycenter potentials, their gradients and the residual field.
//!
//! Against a finite weighted measure μ = Σ wᵢ δ_{yᵢ} the potential is
//!
//! ```text
//! F(x) = −Σ wᵢ log[(1−|x|²)(1−|yᵢ|²)/k(x,yᵢ)]
//! ```
//!
//! with `k = ρ(x,y)` in the real model and `k = |1−⟨x,y⟩|²` in the complex
//! one. Both rewrite as `Σ wᵢ log cosh²(d(x,yᵢ))`, so F is geodesically
//! strictly convex, blows up at the boundary, and has a unique interior
//! minimum, the barycenter. The same point is the unique zero of the
//! residual field `c ↦ Σ wᵢ h_c(yᵢ)`.
//!
//! Continuous measures enter exclusively through sampled atoms (see
//! [`crate::measure`]); every integral here is a finite sum.

use nalgebra::DVector;

use crate::error::Error;
use crate::model::{BallMap, HyperbolicPoint};

/// A finite positive measure: atoms with strictly positive weights, all in
/// the same model and dimension. Realizes counting measures (weights ≡ 1),
/// weighted point clouds, and Monte-Carlo sample batches.
#[derive(Clone, Debug)]
pub struct WeightedMeasure<P> {
    points: Vec<P>,
    weights: Vec<f64>,
    total_mass: f64,
}

impl<P: HyperbolicPoint> WeightedMeasure<P> {
    pub fn new(points: Vec<P>, weights: Vec<f64>) -> Result<Self, Error> {
        if points.is_empty() {
            return Err(Error::EmptyMeasure);
        }
        if points.len() != weights.len() {
            return Err(Error::WeightCount {
                points: points.len(),
                weights: weights.len(),
            });
        }
        let dim = points[0].dim();
        for p in &points {
            if p.dim() != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    found: p.dim(),
                });
            }
        }
        let mut total = 0.0;
        for &w in &weights {
            if !w.is_finite() || w <= 0.0 {
                return Err(Error::BadWeight { value: w });
            }
            total += w;
        }
        if !total.is_finite() {
            return Err(Error::BadWeight { value: total });
        }
        Ok(Self {
            points,
            weights,
            total_mass: total,
        })
    }

    /// The counting measure: every atom carries weight 1.
    pub fn counting(points: Vec<P>) -> Result<Self, Error> {
        let n = points.len();
        Self::new(points, vec![1.0; n])
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn dim(&self) -> usize {
        self.points[0].dim()
    }

    pub fn ambient_dim(&self) -> usize {
        self.points[0].ambient_dim()
    }

    pub fn points(&self) -> &[P] {
        &self.points
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn total_mass(&self) -> f64 {
        self.total_mass
    }

    pub fn atoms(&self) -> impl Iterator<Item = (&P, f64)> {
        self.points.iter().zip(self.weights.iter().copied())
    }

    /// Pushforward under an isometry: atoms move, weights stay.
    pub fn pushforward(&self, map: &P::Map) -> Self {
        Self {
            points: self.points.iter().map(|p| map.apply(p)).collect(),
            weights: self.weights.clone(),
            total_mass: self.total_mass,
        }
    }
}

/// The potential F(x) = Σ wᵢ · (−log[(1−|x|²)(1−|yᵢ|²)/k(x,yᵢ)]).
pub fn potential<P: HyperbolicPoint>(x: &P, mu: &WeightedMeasure<P>) -> f64 {
    mu.atoms().map(|(y, w)| w * P::log_kernel(x, y)).sum()
}

/// Ambient-coordinate gradient of [`potential`]: n reals in the real model,
/// 2m reals (re, im interleaved) in the complex one.
pub fn potential_gradient<P: HyperbolicPoint>(x: &P, mu: &WeightedMeasure<P>) -> DVector<f64> {
    let mut acc = DVector::zeros(x.ambient_dim());
    for (y, w) in mu.atoms() {
        P::accumulate_gradient(x, y, w, &mut acc);
    }
    acc
}

/// The residual field Σ wᵢ h_c(yᵢ) (resp. p_c) in ambient coordinates;
/// its unique zero is the barycenter.
pub fn barycenter_residual<P: HyperbolicPoint>(c: &P, mu: &WeightedMeasure<P>) -> DVector<f64> {
    let mut acc = DVector::zeros(c.ambient_dim());
    for (y, w) in mu.atoms() {
        acc.axpy(w, &P::involution(c, y).to_ambient(), 1.0);
    }
    acc
}

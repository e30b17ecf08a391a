//! Conformal and holomorphic barycenters in hyperbolic balls.
//!
//! The crate works in two models of hyperbolic space: the Poincaré ball in
//! ℝⁿ with its Möbius self-maps, and the Bergman ball in ℂᵐ with its
//! holomorphic automorphisms. For a finite positive measure μ on either
//! ball there is a unique point `c`, the barycenter, such that
//!
//! ```text
//! ∫ h_c(x) dμ(x) = 0
//! ```
//!
//! (`p_c` in the complex model), equivalently the unique minimizer of the
//! geodesically convex potential `∫ log cosh² d(·, y) dμ(y)`. Barycenters
//! computed against the invariant hyperbolic measure are equivariant under
//! the full isometry group; both notions coincide in the plane and diverge
//! in higher complex dimension.
//!
//! Modules:
//!
//! - [`ball`]: Poincaré-ball primitives (ρ, `h_a`, distance, Jacobian,
//!   general Möbius maps).
//! - [`bergman`]: Bergman-ball primitives (projections, `p_a`, distance,
//!   Jacobian, automorphisms).
//! - [`potential`]: weighted measures, potentials, gradients, residuals.
//! - [`measure`]: regions strictly inside the ball, densities, sampling.
//! - [`solver`]: the barycenter solver, region barycenters, the two-point
//!   closed form and equivariance checks.
//!
//! Every value is immutable after construction and every operation is a
//! pure function of its inputs, so values can be shared and used from any
//! number of threads without synchronization. Sampling and solving are
//! deterministic in their seeds and configuration.

pub mod ball;
pub mod bergman;
pub mod error;
pub mod measure;
pub mod model;
pub mod potential;
pub mod solver;

pub use ball::{RealMobius, RealPoint};
pub use bergman::{ComplexAutomorphism, ComplexPoint};
pub use error::Error;
pub use measure::{DensityKind, RegionSpec, SampleBatch};
pub use model::{BallMap, HyperbolicPoint};
pub use potential::WeightedMeasure;
pub use solver::{BarycenterResult, InvarianceReport, SolverConfig};

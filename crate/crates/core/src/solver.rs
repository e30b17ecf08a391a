//! Barycenter solver: damped fixed-point iteration on the residual field
//! with a backtracking-descent fallback on the potential.
//!
//! The barycenter of μ is the unique zero of `c ↦ Σ wᵢ h_c(yᵢ)` (resp.
//! `p_c`). The iteration exploits that the defining condition is a fixed
//! point: with `r̄ = Σ wᵢ h_c(yᵢ) / Σ wᵢ` (a point of the ball, being a
//! convex combination of ball points), the update `c ← h_c(τ r̄)` leaves
//! the solution fixed and contracts toward it; τ is backed off whenever the
//! residual norm fails to decrease. If damping collapses, the solver
//! switches to Armijo backtracking descent on the strictly geodesically
//! convex potential, which shares the same unique minimizer.
//!
//! Among all decompositions `A ∘ h_c` of the barycentric map, the solver
//! always reports the pure involution representative: the returned value is
//! the point `c` itself.

use nalgebra::DVector;
use num_complex::Complex64;

use crate::error::Error;
use crate::measure::{sample_region, DensityKind, RegionSpec};
use crate::model::{BallMap, HyperbolicPoint};
use crate::potential::{barycenter_residual, potential, potential_gradient, WeightedMeasure};

/// Damping below this switches the solver to the descent fallback.
const MIN_DAMPING: f64 = 1e-6;

/// Steps in the fallback keep this margin to the boundary.
const FALLBACK_MARGIN: f64 = 1e-9;

#[derive(Clone, Copy, Debug)]
pub struct SolverConfig {
    /// Residual tolerance, scaled by the total mass of the measure.
    pub residual_tol: f64,
    /// Iteration cap for the fixed-point phase.
    pub max_iters: usize,
    /// Initial damping factor τ ∈ (0, 1].
    pub initial_damping: f64,
    /// Multiplier applied to τ after a rejected step.
    pub damping_backoff: f64,
    /// Iteration cap for the descent fallback.
    pub fallback_max_iters: usize,
    /// Armijo sufficient-decrease constant.
    pub armijo_c: f64,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            residual_tol: 1e-10,
            max_iters: 500,
            initial_damping: 1.0,
            damping_backoff: 0.5,
            fallback_max_iters: 2000,
            armijo_c: 1e-4,
        }
    }
}

impl SolverConfig {
    pub fn validate(&self) -> Result<(), Error> {
        if !self.residual_tol.is_finite() || self.residual_tol <= 0.0 {
            return Err(Error::BadConfig("residual_tol must be positive"));
        }
        if self.max_iters == 0 || self.fallback_max_iters == 0 {
            return Err(Error::BadConfig("iteration caps must be positive"));
        }
        let in_unit = |x: f64, closed_top: bool| {
            x > 0.0 && (if closed_top { x <= 1.0 } else { x < 1.0 })
        };
        if !in_unit(self.initial_damping, true) {
            return Err(Error::BadConfig("initial_damping must lie in (0, 1]"));
        }
        if !in_unit(self.damping_backoff, false) {
            return Err(Error::BadConfig("damping_backoff must lie in (0, 1)"));
        }
        if !in_unit(self.armijo_c, false) {
            return Err(Error::BadConfig("armijo_c must lie in (0, 1)"));
        }
        Ok(())
    }
}

/// One row of the iteration trace.
#[derive(Clone, Copy, Debug)]
pub struct TraceEntry {
    pub iteration: usize,
    pub residual_norm: f64,
    pub damping: f64,
}

/// Monte-Carlo diagnostics attached to region barycenters.
#[derive(Clone, Copy, Debug)]
pub struct SamplingDiagnostics {
    /// Estimated measure of the region.
    pub total_mass_estimate: f64,
    /// Standard error of the mass estimate.
    pub mass_standard_error: f64,
    /// Standard error of the barycenter position, from the spread of the
    /// 16 sub-batch barycenters.
    pub barycenter_standard_error: f64,
    pub sample_count: usize,
    pub seed: u64,
}

#[derive(Clone, Debug)]
pub struct BarycenterResult<P> {
    pub point: P,
    pub residual_norm: f64,
    pub potential: f64,
    pub iterations: usize,
    pub method_trace: Vec<TraceEntry>,
    pub converged: bool,
    pub sampling: Option<SamplingDiagnostics>,
}

/// Compute the barycenter of a finite weighted measure, starting from the
/// Euclidean weighted mean of the atoms (interior by convexity).
pub fn barycenter<P: HyperbolicPoint>(
    mu: &WeightedMeasure<P>,
    cfg: &SolverConfig,
) -> Result<BarycenterResult<P>, Error> {
    cfg.validate()?;

    // A single atom is its own barycenter.
    if mu.len() == 1 {
        let point = mu.points()[0].clone();
        return Ok(BarycenterResult {
            residual_norm: barycenter_residual(&point, mu).norm(),
            potential: potential(&point, mu),
            iterations: 0,
            method_trace: Vec::new(),
            converged: true,
            sampling: None,
            point,
        });
    }

    let mass = mu.total_mass();
    let mut mean = DVector::zeros(mu.ambient_dim());
    for (y, w) in mu.atoms() {
        mean.axpy(w / mass, &y.to_ambient(), 1.0);
    }
    barycenter_from(mu, cfg, &P::from_ambient(&mean))
}

/// Compute the barycenter starting from a caller-chosen interior point.
/// The potential has a single minimum, so every start converges to the
/// same point; this entry exists for uniqueness probes.
pub fn barycenter_from<P: HyperbolicPoint>(
    mu: &WeightedMeasure<P>,
    cfg: &SolverConfig,
    start: &P,
) -> Result<BarycenterResult<P>, Error> {
    cfg.validate()?;
    let mass = mu.total_mass();
    let tol = cfg.residual_tol * mass;
    let mut c = start.clone();

    let mut residual = barycenter_residual(&c, mu);
    let mut residual_norm = residual.norm();
    let mut damping = cfg.initial_damping;
    let mut trace = Vec::new();
    let mut iterations = 0;

    while iterations < cfg.max_iters {
        trace.push(TraceEntry {
            iteration: iterations,
            residual_norm,
            damping,
        });
        if residual_norm <= tol {
            return Ok(finish(c, residual_norm, mu, iterations, trace));
        }
        iterations += 1;

        let step = P::from_ambient(&(&residual * (damping / mass)));
        let candidate = P::involution(&c, &step);
        let cand_residual = barycenter_residual(&candidate, mu);
        let cand_norm = cand_residual.norm();
        if cand_norm < residual_norm {
            c = candidate;
            residual = cand_residual;
            residual_norm = cand_norm;
            damping = (damping / cfg.damping_backoff).min(cfg.initial_damping);
        } else {
            damping *= cfg.damping_backoff;
            if damping < MIN_DAMPING {
                break;
            }
        }
    }

    if residual_norm <= tol {
        return Ok(finish(c, residual_norm, mu, iterations, trace));
    }

    // Fallback: Armijo backtracking descent on the potential, whose unique
    // minimizer is the same point.
    let mut value = potential(&c, mu);
    for _ in 0..cfg.fallback_max_iters {
        if residual_norm <= tol {
            return Ok(finish(c, residual_norm, mu, iterations, trace));
        }
        iterations += 1;
        let grad = potential_gradient(&c, mu);
        let grad_sq = grad.norm_squared();
        if grad_sq == 0.0 {
            break;
        }
        let x = c.to_ambient();
        let mut alpha = 1.0 / (1.0 + grad.norm());
        let mut accepted = false;
        while alpha * grad.norm() > 1e-18 {
            let candidate_coords = &x - &grad * alpha;
            if candidate_coords.norm() <= 1.0 - FALLBACK_MARGIN {
                let candidate = P::from_ambient(&candidate_coords);
                let cand_value = potential(&candidate, mu);
                if cand_value <= value - cfg.armijo_c * alpha * grad_sq {
                    c = candidate;
                    value = cand_value;
                    accepted = true;
                    break;
                }
            }
            alpha *= 0.5;
        }
        if !accepted {
            break;
        }
        residual = barycenter_residual(&c, mu);
        residual_norm = residual.norm();
        trace.push(TraceEntry {
            iteration: iterations,
            residual_norm,
            damping: alpha,
        });
    }

    if residual_norm <= tol {
        return Ok(finish(c, residual_norm, mu, iterations, trace));
    }
    Err(Error::NoConvergence {
        residual_norm,
        iterations,
        trace,
    })
}

fn finish<P: HyperbolicPoint>(
    point: P,
    residual_norm: f64,
    mu: &WeightedMeasure<P>,
    iterations: usize,
    method_trace: Vec<TraceEntry>,
) -> BarycenterResult<P> {
    BarycenterResult {
        potential: potential(&point, mu),
        residual_norm,
        iterations,
        method_trace,
        converged: true,
        sampling: None,
        point,
    }
}

/// Sample a region with the given density, then solve for the barycenter of
/// the sampled atoms. The 16 sub-batches are solved separately to estimate
/// the standard error of the barycenter position.
pub fn barycenter_region<P: HyperbolicPoint>(
    region: &RegionSpec<P>,
    density: DensityKind,
    cfg: &SolverConfig,
    count: usize,
    seed: u64,
) -> Result<BarycenterResult<P>, Error> {
    let batch = sample_region(region, density, count, seed)?;
    let mut result = barycenter(&batch.atoms, cfg)?;

    let mut block_points = Vec::new();
    for j in 0..batch.num_blocks() {
        if let Some(block) = batch.block_measure(j) {
            block_points.push(barycenter(&block, cfg)?.point.to_ambient());
        }
    }
    if block_points.len() < 2 {
        return Err(Error::DegenerateRegion {
            efficiency: batch.atoms.len() as f64 / batch.count as f64,
        });
    }
    let b = block_points.len() as f64;
    let mut mean = DVector::zeros(block_points[0].len());
    for p in &block_points {
        mean.axpy(1.0 / b, p, 1.0);
    }
    let var: f64 = block_points
        .iter()
        .map(|p| (p - &mean).norm_squared())
        .sum::<f64>()
        / (b * (b - 1.0));
    result.sampling = Some(SamplingDiagnostics {
        total_mass_estimate: batch.total_mass_estimate,
        mass_standard_error: batch.standard_error,
        barycenter_standard_error: var.sqrt(),
        sample_count: batch.count,
        seed,
    });
    Ok(result)
}

/// Closed form for the barycenter of two unit-disk atoms, the midpoint of
/// the geodesic between them:
///
/// ```text
/// ẑ = (1 − |z₁z₂|² − √((1−|z₁|²)(1−|z₂|²)) · |1 − z₁·conj(z₂)|)
///     / ((1−|z₁|²)·conj(z₂) + (1−|z₂|²)·conj(z₁))
/// ```
///
/// The denominator vanishes for antipodal pairs (z₂ opposite to z₁), where
/// the formula degenerates; the barycenter is 0 there and the function
/// reports [`Error::AntipodalPair`] instead of evaluating.
pub fn two_point_closed_form(z1: Complex64, z2: Complex64) -> Result<Complex64, Error> {
    for z in [z1, z2] {
        let norm = z.norm();
        if norm > 1.0 - crate::ball::INTERIOR_MARGIN {
            return Err(Error::PointOutsideBall {
                norm,
                limit: 1.0 - crate::ball::INTERIOR_MARGIN,
            });
        }
    }
    let s1 = 1.0 - z1.norm_sqr();
    let s2 = 1.0 - z2.norm_sqr();
    let numerator =
        1.0 - (z1 * z2).norm_sqr() - (s1 * s2).sqrt() * (Complex64::ONE - z1 * z2.conj()).norm();
    let denominator = z2.conj() * s1 + z1.conj() * s2;
    if denominator.norm() < 1e-12 {
        return Err(Error::AntipodalPair);
    }
    Ok(Complex64::new(numerator, 0.0) / denominator)
}

/// Equivariance report: compares `map(barycenter(data))` against
/// `barycenter(map(data))`.
#[derive(Clone, Debug)]
pub struct InvarianceReport {
    /// |map(c₁) − c₂| in ambient coordinates.
    pub defect: f64,
    pub threshold: f64,
    pub passed: bool,
    /// Barycenter of the original data.
    pub barycenter: Vec<f64>,
    /// Barycenter of the mapped data.
    pub barycenter_mapped_data: Vec<f64>,
    /// Image of the original barycenter under the map.
    pub mapped_barycenter: Vec<f64>,
}

/// Verify equivariance on a point set: pass/fail at 10 × residual_tol.
pub fn verify_invariance<P: HyperbolicPoint>(
    mu: &WeightedMeasure<P>,
    map: &P::Map,
    cfg: &SolverConfig,
) -> Result<InvarianceReport, Error> {
    let original = barycenter(mu, cfg)?;
    let mapped_data = barycenter(&mu.pushforward(map), cfg)?;
    let mapped_point = map.apply(&original.point).to_ambient();
    let defect = (&mapped_point - mapped_data.point.to_ambient()).norm();
    let threshold = 10.0 * cfg.residual_tol;
    Ok(InvarianceReport {
        defect,
        threshold,
        passed: defect <= threshold,
        barycenter: original.point.to_ambient().as_slice().to_vec(),
        barycenter_mapped_data: mapped_data.point.to_ambient().as_slice().to_vec(),
        mapped_barycenter: mapped_point.as_slice().to_vec(),
    })
}

/// Verify equivariance on a sampled region: pass/fail at 3 combined
/// standard errors. The mapped region is sampled with a derived seed so the
/// two estimates are independent.
pub fn verify_invariance_region<P: HyperbolicPoint>(
    region: &RegionSpec<P>,
    density: DensityKind,
    map: &P::Map,
    cfg: &SolverConfig,
    count: usize,
    seed: u64,
) -> Result<InvarianceReport, Error> {
    let original = barycenter_region(region, density, cfg, count, seed)?;
    let mapped_region = region.clone().pushforward(map.clone())?;
    let mapped = barycenter_region(&mapped_region, density, cfg, count, seed ^ 0x9E37_79B9)?;
    let mapped_point = map.apply(&original.point).to_ambient();
    let defect = (&mapped_point - mapped.point.to_ambient()).norm();
    let se1 = original.sampling.expect("region solve has sampling").barycenter_standard_error;
    let se2 = mapped.sampling.expect("region solve has sampling").barycenter_standard_error;
    let threshold = 3.0 * (se1 * se1 + se2 * se2).sqrt();
    Ok(InvarianceReport {
        defect,
        threshold,
        passed: defect <= threshold,
        barycenter: original.point.to_ambient().as_slice().to_vec(),
        barycenter_mapped_data: mapped.point.to_ambient().as_slice().to_vec(),
        mapped_barycenter: mapped_point.as_slice().to_vec(),
    })
}

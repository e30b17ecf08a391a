//! Regions strictly inside the ball, invariant and Lebesgue densities, and
//! deterministic rejection sampling that turns a region-with-density into a
//! finite [`WeightedMeasure`].
//!
//! A region is built from ellipsoids and Euclidean balls, closed under
//! intersection and under pushforward by ball isometries. Sampling draws
//! uniform points in an axis-aligned bounding box, rejects points outside
//! the region, and weights accepted points by `density(x) · V_box / count`,
//! so that Σ weights estimates the measure of the region. The draw is split
//! into 16 sub-batches on independent seeded substreams; the spread of the
//! per-batch mass estimates yields the reported standard error, and results
//! are bit-identical for identical `(region, density, count, seed)`.

use std::ops::Range;

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::Error;
use crate::model::{BallMap, HyperbolicPoint};
use crate::potential::WeightedMeasure;

/// Regions must keep this margin to the unit sphere.
pub const REGION_MARGIN: f64 = 1e-9;

/// Padding added to bounding boxes obtained from mapped boundary samples.
const PUSHFORWARD_PAD: f64 = 1e-3;

/// Number of sub-batches used for the error estimate.
pub const SAMPLE_BLOCKS: usize = 16;

/// Minimum acceptable rejection efficiency.
const MIN_EFFICIENCY: f64 = 1e-4;

/// The density a region is integrated against.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum DensityKind {
    /// Plain Lebesgue measure λ.
    Lebesgue,
    /// Invariant hyperbolic measure Λ: density (1−|x|²)^{−n} in ℝⁿ and
    /// (1−|z|²)^{−(m+1)} in ℂᵐ.
    Hyperbolic,
}

impl DensityKind {
    pub fn evaluate<P: HyperbolicPoint>(&self, p: &P) -> f64 {
        match self {
            DensityKind::Lebesgue => 1.0,
            DensityKind::Hyperbolic => {
                let n = p.euclidean_norm();
                (1.0 - n * n).powi(-p.invariant_density_exponent())
            }
        }
    }
}

#[derive(Clone, Debug)]
enum RegionKind<P: HyperbolicPoint> {
    /// {x : (x−c)ᵀ Q (x−c) < 1} in ambient coordinates.
    Ellipsoid {
        center: P,
        shape: DMatrix<f64>,
        half_widths: DVector<f64>,
    },
    /// Euclidean ball {x : |x−c| < r}.
    Ball { center: P, radius: f64 },
    /// Image of `inner` under an isometry of the ball.
    MapImage {
        inner: Box<RegionKind<P>>,
        map: P::Map,
        lo: DVector<f64>,
        hi: DVector<f64>,
    },
    Intersection { members: Vec<RegionKind<P>> },
}

/// A measurable subset strictly inside the unit ball.
#[derive(Clone, Debug)]
pub struct RegionSpec<P: HyperbolicPoint> {
    kind: RegionKind<P>,
}

impl<P: HyperbolicPoint> RegionSpec<P> {
    /// Ellipsoid (x−center)ᵀ Q (x−center) < 1 with Q symmetric positive
    /// definite, given in ambient coordinates.
    pub fn ellipsoid(center: P, shape: DMatrix<f64>) -> Result<Self, Error> {
        let d = center.ambient_dim();
        if shape.nrows() != d || shape.ncols() != d {
            return Err(Error::DimensionMismatch {
                expected: d,
                found: shape.nrows().max(shape.ncols()),
            });
        }
        let asym = (&shape - shape.transpose()).amax();
        if asym > 1e-9 * (1.0 + shape.amax()) {
            return Err(Error::BadShapeMatrix);
        }
        let eigen = shape.clone().symmetric_eigen();
        let min_eig = eigen.eigenvalues.min();
        if min_eig.is_nan() || min_eig <= 0.0 {
            return Err(Error::BadShapeMatrix);
        }
        // bounding sphere: center norm + longest semi-axis
        let reach = center.euclidean_norm() + min_eig.sqrt().recip();
        if reach > 1.0 - REGION_MARGIN {
            return Err(Error::RegionNotInterior { max_norm: reach });
        }
        let inverse = shape
            .clone()
            .cholesky()
            .ok_or(Error::BadShapeMatrix)?
            .inverse();
        let half_widths = DVector::from_fn(d, |i, _| inverse[(i, i)].sqrt());
        Ok(Self {
            kind: RegionKind::Ellipsoid {
                center,
                shape,
                half_widths,
            },
        })
    }

    /// Euclidean ball of the given radius around `center`.
    pub fn ball(center: P, radius: f64) -> Result<Self, Error> {
        if !radius.is_finite() || radius <= 0.0 {
            return Err(Error::BadShapeMatrix);
        }
        let reach = center.euclidean_norm() + radius;
        if reach > 1.0 - REGION_MARGIN {
            return Err(Error::RegionNotInterior { max_norm: reach });
        }
        Ok(Self {
            kind: RegionKind::Ball { center, radius },
        })
    }

    pub fn intersection(members: Vec<RegionSpec<P>>) -> Result<Self, Error> {
        if members.is_empty() {
            return Err(Error::BadConfig("intersection needs at least one member"));
        }
        let d = members[0].ambient_dim();
        for m in &members {
            if m.ambient_dim() != d {
                return Err(Error::DimensionMismatch {
                    expected: d,
                    found: m.ambient_dim(),
                });
            }
        }
        Ok(Self {
            kind: RegionKind::Intersection {
                members: members.into_iter().map(|r| r.kind).collect(),
            },
        })
    }

    /// Image of this region under an isometry. The bounding box comes from
    /// mapping a dense boundary sample and padding; the interior-ness of
    /// the image is checked on the same sample.
    pub fn pushforward(self, map: P::Map) -> Result<Self, Error> {
        let boundary = self.kind.boundary_sample();
        let d = self.ambient_dim();
        let mut lo = DVector::from_element(d, f64::INFINITY);
        let mut hi = DVector::from_element(d, f64::NEG_INFINITY);
        let mut max_norm_seen = 0.0f64;
        for b in &boundary {
            let mapped = map.apply(&P::from_ambient(b)).to_ambient();
            max_norm_seen = max_norm_seen.max(mapped.norm());
            for i in 0..d {
                lo[i] = lo[i].min(mapped[i]);
                hi[i] = hi[i].max(mapped[i]);
            }
        }
        if max_norm_seen > 1.0 - REGION_MARGIN {
            return Err(Error::RegionNotInterior {
                max_norm: max_norm_seen,
            });
        }
        for i in 0..d {
            lo[i] = (lo[i] - PUSHFORWARD_PAD).max(-1.0);
            hi[i] = (hi[i] + PUSHFORWARD_PAD).min(1.0);
        }
        Ok(Self {
            kind: RegionKind::MapImage {
                inner: Box::new(self.kind),
                map,
                lo,
                hi,
            },
        })
    }

    pub fn ambient_dim(&self) -> usize {
        self.kind.ambient_dim()
    }

    /// Exact membership predicate.
    pub fn contains(&self, x: &P) -> bool {
        self.kind.contains_ambient(&x.to_ambient())
    }

    fn contains_ambient(&self, v: &DVector<f64>) -> bool {
        if v.norm() > 1.0 - REGION_MARGIN {
            return false;
        }
        self.kind.contains_ambient(v)
    }

    /// Axis-aligned bounding box (lo, hi) in ambient coordinates.
    pub fn bounding_box(&self) -> (DVector<f64>, DVector<f64>) {
        self.kind.bounding_box()
    }
}

impl<P: HyperbolicPoint> RegionKind<P> {
    fn ambient_dim(&self) -> usize {
        match self {
            RegionKind::Ellipsoid { center, .. } => center.ambient_dim(),
            RegionKind::Ball { center, .. } => center.ambient_dim(),
            RegionKind::MapImage { inner, .. } => inner.ambient_dim(),
            RegionKind::Intersection { members } => members[0].ambient_dim(),
        }
    }

    fn contains_ambient(&self, v: &DVector<f64>) -> bool {
        match self {
            RegionKind::Ellipsoid { center, shape, .. } => {
                let diff = v - center.to_ambient();
                (shape * &diff).dot(&diff) < 1.0
            }
            RegionKind::Ball { center, radius } => {
                (v - center.to_ambient()).norm() < *radius
            }
            RegionKind::MapImage { inner, map, .. } => {
                // membership through the inverse map
                let pulled = map.apply_inverse(&P::from_ambient(v)).to_ambient();
                inner.contains_ambient(&pulled)
            }
            RegionKind::Intersection { members } => {
                members.iter().all(|m| m.contains_ambient(v))
            }
        }
    }

    fn bounding_box(&self) -> (DVector<f64>, DVector<f64>) {
        match self {
            RegionKind::Ellipsoid {
                center,
                half_widths,
                ..
            } => {
                let c = center.to_ambient();
                (&c - half_widths, &c + half_widths)
            }
            RegionKind::Ball { center, radius } => {
                let c = center.to_ambient();
                let r = DVector::from_element(c.len(), *radius);
                (&c - &r, &c + &r)
            }
            RegionKind::MapImage { lo, hi, .. } => (lo.clone(), hi.clone()),
            RegionKind::Intersection { members } => {
                let (mut lo, mut hi) = members[0].bounding_box();
                for m in &members[1..] {
                    let (mlo, mhi) = m.bounding_box();
                    for i in 0..lo.len() {
                        lo[i] = lo[i].max(mlo[i]);
                        hi[i] = hi[i].min(mhi[i]);
                    }
                }
                (lo, hi)
            }
        }
    }

    /// Deterministic dense sample of the boundary, used for pushforward
    /// bounding boxes and interior-ness probes.
    fn boundary_sample(&self) -> Vec<DVector<f64>> {
        match self {
            RegionKind::Ellipsoid { center, shape, .. } => {
                let eigen = shape.clone().symmetric_eigen();
                // Q^{-1/2} maps the unit sphere onto the ellipsoid boundary
                let mut scaled = eigen.eigenvectors.clone();
                for (j, col) in scaled.column_iter_mut().enumerate() {
                    let mut col = col;
                    col *= eigen.eigenvalues[j].sqrt().recip();
                }
                let root = scaled * eigen.eigenvectors.transpose();
                let c = center.to_ambient();
                sphere_directions(c.len())
                    .into_iter()
                    .map(|u| &c + &root * u)
                    .collect()
            }
            RegionKind::Ball { center, radius } => {
                let c = center.to_ambient();
                sphere_directions(c.len())
                    .into_iter()
                    .map(|u| &c + u * *radius)
                    .collect()
            }
            RegionKind::MapImage { inner, map, .. } => inner
                .boundary_sample()
                .into_iter()
                .map(|b| map.apply(&P::from_ambient(&b)).to_ambient())
                .collect(),
            RegionKind::Intersection { members } => {
                let mut kept = Vec::new();
                for (i, m) in members.iter().enumerate() {
                    for b in m.boundary_sample() {
                        let inside_rest = members
                            .iter()
                            .enumerate()
                            .filter(|(j, _)| *j != i)
                            .all(|(_, other)| other.contains_ambient(&b));
                        if inside_rest {
                            kept.push(b);
                        }
                    }
                }
                kept
            }
        }
    }
}

/// Fixed covering of the unit sphere: an angle grid in the plane, a seeded
/// Gaussian direction set in higher dimensions.
fn sphere_directions(d: usize) -> Vec<DVector<f64>> {
    if d == 2 {
        (0..720)
            .map(|k| {
                let t = std::f64::consts::TAU * k as f64 / 720.0;
                DVector::from_vec(vec![t.cos(), t.sin()])
            })
            .collect()
    } else {
        let mut rng = ChaCha8Rng::seed_from_u64(0x5EED_D14E);
        (0..512 * (d - 1))
            .map(|_| {
                let mut v =
                    DVector::from_fn(d, |_, _| crate::ball::standard_normal(&mut rng));
                let n = v.norm();
                if n > 0.0 {
                    v /= n;
                }
                v
            })
            .collect()
    }
}

/// Atoms sampled from a region with their estimator metadata.
#[derive(Clone, Debug)]
pub struct SampleBatch<P: HyperbolicPoint> {
    /// Accepted points weighted by density · V_box / count.
    pub atoms: WeightedMeasure<P>,
    /// Σ weights: estimate of the measure of the region.
    pub total_mass_estimate: f64,
    /// Standard error of the mass estimate from the 16 sub-batches.
    pub standard_error: f64,
    pub seed: u64,
    /// Number of points drawn (count rounded up to a multiple of 16).
    pub count: usize,
    block_ranges: Vec<Range<usize>>,
    blocks: usize,
}

impl<P: HyperbolicPoint> SampleBatch<P> {
    pub fn num_blocks(&self) -> usize {
        self.blocks
    }

    /// Sub-batch `j` as a stand-alone measure: the weights are rescaled by
    /// the number of blocks so each block is an unbiased estimator of the
    /// same measure. Returns `None` when the block accepted no points.
    pub fn block_measure(&self, j: usize) -> Option<WeightedMeasure<P>> {
        let range = self.block_ranges.get(j)?.clone();
        if range.is_empty() {
            return None;
        }
        let points = self.atoms.points()[range.clone()].to_vec();
        let weights = self.atoms.weights()[range]
            .iter()
            .map(|w| w * self.blocks as f64)
            .collect();
        Some(WeightedMeasure::new(points, weights).expect("block atoms are valid"))
    }
}

fn splitmix64(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9E37_79B9_7F4A_7C15);
    let mut z = x;
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

pub(crate) fn block_rng(seed: u64, block: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(splitmix64(seed ^ splitmix64(block.wrapping_add(1))))
}

/// Draw `count` points (rounded up to a multiple of 16) in the bounding box
/// of `region`, keep those inside, and weight them by density · V_box /
/// count. Deterministic in `seed`; errors when the rejection efficiency
/// falls below 1e-4.
pub fn sample_region<P: HyperbolicPoint>(
    region: &RegionSpec<P>,
    density: DensityKind,
    count: usize,
    seed: u64,
) -> Result<SampleBatch<P>, Error> {
    if count == 0 {
        return Err(Error::BadConfig("sample count must be at least 1"));
    }
    let d = region.ambient_dim();
    let (lo, hi) = region.bounding_box();
    let mut vbox = 1.0;
    for i in 0..d {
        let w = hi[i] - lo[i];
        if w.is_nan() || w <= 0.0 {
            return Err(Error::DegenerateRegion { efficiency: 0.0 });
        }
        vbox *= w;
    }
    let per_block = count.div_ceil(SAMPLE_BLOCKS);
    let total = per_block * SAMPLE_BLOCKS;

    let mut points = Vec::new();
    let mut weights = Vec::new();
    let mut block_ranges = Vec::with_capacity(SAMPLE_BLOCKS);
    let mut block_mass = Vec::with_capacity(SAMPLE_BLOCKS);
    let mut v = DVector::zeros(d);
    for j in 0..SAMPLE_BLOCKS {
        let mut rng = block_rng(seed, j as u64);
        let start = points.len();
        let mut mass_j = 0.0;
        for _ in 0..per_block {
            for i in 0..d {
                v[i] = lo[i] + rng.random::<f64>() * (hi[i] - lo[i]);
            }
            if region.contains_ambient(&v) {
                let p = P::from_ambient(&v);
                let w = density.evaluate(&p) * vbox / total as f64;
                mass_j += w * SAMPLE_BLOCKS as f64;
                points.push(p);
                weights.push(w);
            }
        }
        block_ranges.push(start..points.len());
        block_mass.push(mass_j);
    }

    let efficiency = points.len() as f64 / total as f64;
    if efficiency < MIN_EFFICIENCY {
        return Err(Error::DegenerateRegion { efficiency });
    }
    let atoms = WeightedMeasure::new(points, weights)?;
    let total_mass_estimate = atoms.total_mass();
    let mean = block_mass.iter().sum::<f64>() / SAMPLE_BLOCKS as f64;
    let var = block_mass
        .iter()
        .map(|m| (m - mean) * (m - mean))
        .sum::<f64>()
        / (SAMPLE_BLOCKS - 1) as f64;
    let standard_error = (var / SAMPLE_BLOCKS as f64).sqrt();

    Ok(SampleBatch {
        atoms,
        total_mass_estimate,
        standard_error,
        seed,
        count: total,
        block_ranges,
        blocks: SAMPLE_BLOCKS,
    })
}

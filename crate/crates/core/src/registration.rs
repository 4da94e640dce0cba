//! The estimation and registration pipeline.
//!
//! Given warped point patterns on a common domain, the pipeline (1) smooths
//! each pattern into a conditional mean measure estimate, (2) takes the
//! Frechet-Wasserstein barycenter as the structural mean estimate, (3)
//! derives warp and registration maps from quantile/CDF compositions, and
//! (4) pushes the patterns through the registration maps. All smoothing and
//! averaging happens on the canonical unit interval; results are rescaled
//! back to the input domain.

use crate::error::{Error, Result};
use crate::frechet::{barycenter, BarycenterResult};
use crate::measure::{DiffuseMeasure, Interval, PointPattern, RescaleAffine};
use crate::smoothing::{default_bandwidth, smooth_pattern, BaseKernel, KernelSpec, DEFAULT_ALPHA};
use crate::transport::{push_forward_pattern, WarpMap};
use rayon::prelude::*;

/// How smoothing bandwidths are chosen per pattern.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum BandwidthRule {
    /// `sigma_i = min(m_i^{-alpha}, 1/4)`.
    Power { alpha: f64 },
    /// One global bandwidth on the canonical domain.
    Fixed(f64),
}

impl BandwidthRule {
    pub fn sigma_for(&self, m: usize) -> f64 {
        match *self {
            BandwidthRule::Power { alpha } => default_bandwidth(m, alpha),
            BandwidthRule::Fixed(sigma) => sigma,
        }
    }
}

/// Smoothing policy for the pipeline: a base kernel plus a bandwidth rule.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct KernelPolicy {
    pub base: BaseKernel,
    pub bandwidth: BandwidthRule,
}

impl Default for KernelPolicy {
    fn default() -> Self {
        Self { base: BaseKernel::Gaussian, bandwidth: BandwidthRule::Power { alpha: DEFAULT_ALPHA } }
    }
}

impl KernelPolicy {
    pub fn fixed_sigma(sigma: f64) -> Self {
        Self { base: BaseKernel::Gaussian, bandwidth: BandwidthRule::Fixed(sigma) }
    }

    pub fn power(alpha: f64) -> Self {
        Self { base: BaseKernel::Gaussian, bandwidth: BandwidthRule::Power { alpha } }
    }
}

/// Output of the full pipeline, reported on the input domain.
#[derive(Clone, Debug)]
pub struct RegistrationOutput {
    /// The regularized Frechet-Wasserstein estimate of the structural mean.
    pub lambda_hat: DiffuseMeasure,
    /// Smoothed conditional mean measure estimates, one per pattern.
    pub lambda_hats: Vec<DiffuseMeasure>,
    /// Estimated warp maps `T_i` (structural mean to conditional mean).
    pub warps: Vec<WarpMap>,
    /// Estimated registration maps `T_i^{-1}`.
    pub inverse_warps: Vec<WarpMap>,
    /// Registered point patterns.
    pub registered: Vec<PointPattern>,
    /// Estimated total mass: the mean observed point count.
    pub c_hat: f64,
}

/// Estimates warp maps `T_i = F_i^{-1} o F` and registration maps
/// `T_i^{-1} = Qbar o F_i` from the barycenter and the conditional mean
/// estimates. Maps are sampled on the barycenter's grid.
pub fn estimate_warps(
    lambda_hat: &DiffuseMeasure,
    lambda_hats: &[DiffuseMeasure],
) -> Result<(Vec<WarpMap>, Vec<WarpMap>)> {
    let domain = lambda_hat.domain();
    let grid = lambda_hat.domain().uniform_grid(lambda_hat.grid().len());
    let mut warps = Vec::with_capacity(lambda_hats.len());
    let mut inverses = Vec::with_capacity(lambda_hats.len());
    for m in lambda_hats {
        if !m.domain().approx_eq(&domain) {
            return Err(Error::DomainMismatch { expected: domain, found: m.domain() });
        }
        let fwd: Vec<f64> = grid.iter().map(|&x| m.quantile_at(lambda_hat.cdf_at(x))).collect();
        let inv: Vec<f64> = grid.iter().map(|&x| lambda_hat.quantile_at(m.cdf_at(x))).collect();
        warps.push(WarpMap::from_samples(domain, grid.clone(), fwd)?);
        inverses.push(WarpMap::from_samples(domain, grid.clone(), inv)?);
    }
    Ok((warps, inverses))
}

/// Pushes each pattern through its registration map; counts are preserved.
pub fn register(
    patterns: &[PointPattern],
    inverse_warps: &[WarpMap],
) -> Result<Vec<PointPattern>> {
    if patterns.len() != inverse_warps.len() {
        return Err(Error::CountMismatch { left: patterns.len(), right: inverse_warps.len() });
    }
    patterns
        .iter()
        .zip(inverse_warps)
        .map(|(p, t)| push_forward_pattern(p, t))
        .collect()
}

/// Runs the full estimation and registration procedure on patterns sharing
/// a common domain. Rejects an all-empty collection; individual empty
/// patterns participate with a uniform conditional mean estimate and
/// identity registration.
pub fn pipeline(
    patterns: &[PointPattern],
    policy: &KernelPolicy,
    g: usize,
) -> Result<RegistrationOutput> {
    let first = patterns.first().ok_or(Error::EmptyCollection("no patterns"))?;
    let domain = first.domain();
    for p in patterns {
        if !p.domain().approx_eq(&domain) {
            return Err(Error::DomainMismatch { expected: domain, found: p.domain() });
        }
    }
    if patterns.iter().all(|p| p.is_empty()) {
        return Err(Error::EmptyCollection("all patterns are empty; nothing to register"));
    }
    let unit = Interval::unit();
    let canonical: Vec<PointPattern> = patterns
        .iter()
        .map(|p| p.rescale_affine(domain, unit))
        .collect::<Result<_>>()?;

    let lambda_hats: Vec<DiffuseMeasure> = canonical
        .par_iter()
        .map(|p| {
            let kernel = KernelSpec::new(policy.base, policy.bandwidth.sigma_for(p.len()))?;
            smooth_pattern(p, &kernel, g)
        })
        .collect::<Result<_>>()?;

    let bc: BarycenterResult = barycenter(&lambda_hats)?;
    let (mut warps, mut inverse_warps) = estimate_warps(&bc.mean, &lambda_hats)?;
    for (i, p) in canonical.iter().enumerate() {
        if p.is_empty() {
            warps[i] = WarpMap::identity(unit, 2);
            inverse_warps[i] = WarpMap::identity(unit, 2);
        }
    }
    let registered = register(&canonical, &inverse_warps)?;
    let c_hat = patterns.iter().map(|p| p.len() as f64).sum::<f64>() / patterns.len() as f64;

    Ok(RegistrationOutput {
        lambda_hat: bc.mean.rescale_affine(unit, domain)?,
        lambda_hats: lambda_hats
            .iter()
            .map(|m| m.rescale_affine(unit, domain))
            .collect::<Result<_>>()?,
        warps: warps.iter().map(|w| w.rescale_affine(unit, domain)).collect::<Result<_>>()?,
        inverse_warps: inverse_warps
            .iter()
            .map(|w| w.rescale_affine(unit, domain))
            .collect::<Result<_>>()?,
        registered: registered
            .iter()
            .map(|p| p.rescale_affine(unit, domain))
            .collect::<Result<_>>()?,
        c_hat,
    })
}

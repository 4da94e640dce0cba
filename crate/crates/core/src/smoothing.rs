//! Boundary-corrected kernel smoothing of point patterns on `[0, 1]`.
//!
//! Each point `y` is replaced by a diffuse probability measure with density
//!
//! ```text
//! psi_s(x - y) + 2 b2 psi_s(x - y) 1{x > y} + 2 b1 psi_s(x - y) 1{x < y} + 4 b1 b2
//! ```
//!
//! where `b1 = 1 - Psi((1 - y)/s)` and `b2 = Psi(-y/s)` are the kernel tail
//! masses escaping above and below the interval. The truncated kernel, its
//! two one-sided copies, and the uniform remainder add up to total mass one
//! by construction, and the density is strictly positive on `[0, 1]`.

use crate::error::{Error, Result};
use crate::measure::{DiffuseMeasure, Interval, PointPattern};
use rayon::prelude::*;
use statrs::function::erf::erfc;

const FRAC_1_SQRT_2: f64 = std::f64::consts::FRAC_1_SQRT_2;

/// Standard normal CDF, accurate in both tails.
pub(crate) fn standard_normal_cdf(z: f64) -> f64 {
    0.5 * erfc(-z * FRAC_1_SQRT_2)
}

pub(crate) fn standard_normal_pdf(z: f64) -> f64 {
    (-0.5 * z * z).exp() / (2.0 * std::f64::consts::PI).sqrt()
}

/// Base smoothing kernels: smooth, symmetric, strictly positive densities
/// with unit variance and finite fourth moment.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum BaseKernel {
    Gaussian,
    Logistic,
}

// scale that gives the logistic density unit variance
const LOGISTIC_SCALE: f64 = 0.551_328_895_421_792_77; // sqrt(3)/pi

impl BaseKernel {
    /// Kernel CDF `Psi(z)`.
    pub fn cdf(&self, z: f64) -> f64 {
        match self {
            BaseKernel::Gaussian => standard_normal_cdf(z),
            BaseKernel::Logistic => 1.0 / (1.0 + (-z / LOGISTIC_SCALE).exp()),
        }
    }

    /// Kernel density `psi(z)`.
    pub fn pdf(&self, z: f64) -> f64 {
        match self {
            BaseKernel::Gaussian => standard_normal_pdf(z),
            BaseKernel::Logistic => {
                let e = (-z.abs() / LOGISTIC_SCALE).exp();
                e / (LOGISTIC_SCALE * (1.0 + e) * (1.0 + e))
            }
        }
    }
}

/// A base kernel together with a bandwidth.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct KernelSpec {
    pub base: BaseKernel,
    pub sigma: f64,
}

impl KernelSpec {
    pub fn new(base: BaseKernel, sigma: f64) -> Result<Self> {
        if !(sigma.is_finite() && sigma > 0.0) {
            return Err(Error::InvalidParameter(format!("bandwidth {sigma} must be positive")));
        }
        Ok(Self { base, sigma })
    }

    pub fn gaussian(sigma: f64) -> Result<Self> {
        Self::new(BaseKernel::Gaussian, sigma)
    }
}

/// The smoothed measure attached to a single point of the pattern.
#[derive(Clone, Copy, Debug)]
pub struct SmoothedAtom {
    pub center: f64,
    pub sigma: f64,
    pub b1: f64,
    pub b2: f64,
    base: BaseKernel,
}

impl SmoothedAtom {
    pub fn new(center: f64, kernel: &KernelSpec) -> Self {
        let sigma = kernel.sigma;
        let b1 = 1.0 - kernel.base.cdf((1.0 - center) / sigma);
        let b2 = kernel.base.cdf(-center / sigma);
        Self { center, sigma, b1, b2, base: kernel.base }
    }

    /// Closed-form CDF on `[0, 1]`, assembled from the kernel CDF. Satisfies
    /// `cdf_at(0) = 0` and `cdf_at(1) = 1` identically.
    pub fn cdf_at(&self, x: f64) -> f64 {
        let z = self.base.cdf((x - self.center) / self.sigma);
        let main = z - self.b2;
        let upper = 2.0 * self.b2 * (z - 0.5).max(0.0);
        let lower = 2.0 * self.b1 * (z.min(0.5) - self.b2);
        main + upper + lower + 4.0 * self.b1 * self.b2 * x
    }

    /// Density on `[0, 1]`.
    pub fn density_at(&self, x: f64) -> f64 {
        let psi = self.base.pdf((x - self.center) / self.sigma) / self.sigma;
        let side = if x > self.center {
            2.0 * self.b2
        } else if x < self.center {
            2.0 * self.b1
        } else {
            0.0
        };
        psi * (1.0 + side) + 4.0 * self.b1 * self.b2
    }
}

/// Smooths a single point into a diffuse measure on `[0, 1]`.
pub fn smooth_atom(y: f64, kernel: &KernelSpec, g: usize) -> Result<DiffuseMeasure> {
    if !(0.0..=1.0).contains(&y) {
        return Err(Error::PointOutsideDomain { point: y, domain: Interval::unit() });
    }
    let atom = SmoothedAtom::new(y, kernel);
    let domain = Interval::unit();
    let grid = domain.uniform_grid(g);
    let cdf = grid.iter().map(|&x| atom.cdf_at(x)).collect();
    DiffuseMeasure::from_cdf(domain, grid, cdf)
}

/// Smooths a pattern on `[0, 1]` into the uniform mixture of its smoothed
/// atoms; an empty pattern yields the Lebesgue (uniform) measure.
pub fn smooth_pattern(pattern: &PointPattern, kernel: &KernelSpec, g: usize) -> Result<DiffuseMeasure> {
    let domain = Interval::unit();
    if !pattern.domain().approx_eq(&domain) {
        return Err(Error::DomainMismatch { expected: domain, found: pattern.domain() });
    }
    if pattern.is_empty() {
        return Ok(DiffuseMeasure::uniform(domain, g));
    }
    let atoms: Vec<SmoothedAtom> =
        pattern.points().iter().map(|&y| SmoothedAtom::new(y, kernel)).collect();
    let inv_m = 1.0 / atoms.len() as f64;
    let grid = domain.uniform_grid(g);
    let cdf: Vec<f64> = grid
        .par_iter()
        .map(|&x| atoms.iter().map(|a| a.cdf_at(x)).sum::<f64>() * inv_m)
        .collect();
    DiffuseMeasure::from_cdf(domain, grid, cdf)
}

/// Upper bound on the squared Wasserstein distance between a smoothed
/// pattern and its normalized empirical measure:
/// `3 sigma^2 + 4 max(Psi(-1/sqrt(sigma)), 1 - Psi(1/sqrt(sigma)))`.
/// Requires `sigma <= 1/4`.
pub fn lemma_bound(kernel: &KernelSpec) -> Result<f64> {
    let sigma = kernel.sigma;
    if sigma > 0.25 {
        return Err(Error::InvalidParameter(format!(
            "smoothing bound requires sigma <= 1/4, got {sigma}"
        )));
    }
    let z = 1.0 / sigma.sqrt();
    let tail = kernel.base.cdf(-z).max(1.0 - kernel.base.cdf(z));
    Ok(3.0 * sigma * sigma + 4.0 * tail)
}

/// Power-rule bandwidth `min(m^{-alpha}, 1/4)`; an empty pattern falls back
/// to the cap (paired with the uniform-measure convention).
pub fn default_bandwidth(m: usize, alpha: f64) -> f64 {
    assert!(alpha > 0.0, "bandwidth exponent must be positive");
    if m == 0 {
        return 0.25;
    }
    (m as f64).powf(-alpha).min(0.25)
}

/// Rosenblatt's bandwidth exponent.
pub const DEFAULT_ALPHA: f64 = 0.2;

//! Scenario generators: sine-mixture warp maps and warped Poisson (Cox)
//! processes, with deterministic per-process RNG streams.

use crate::error::{Error, Result};
use crate::measure::{DiffuseMeasure, Interval, PointPattern, RescaleAffine, DEFAULT_GRID};
use crate::smoothing::standard_normal_cdf;
use crate::transport::{push_forward_pattern, WarpMap};
use rand::prelude::*;
use rand_chacha::ChaCha12Rng;
use rand_distr::{Distribution, Poisson};
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

/// One RNG stream per logical index, all derived from a master seed. The
/// streams are independent, so parallel generation cannot reorder draws.
pub fn stream_rng(seed: u64, stream: u64) -> ChaCha12Rng {
    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// Derives a child seed from a master seed and two indices (splitmix64).
pub fn derive_seed(master: u64, a: u64, b: u64) -> u64 {
    let mut z = master
        .wrapping_add(a.wrapping_mul(0x9E37_79B9_7F4A_7C15))
        .wrapping_add(b.wrapping_mul(0xBF58_476D_1CE4_E5B9));
    for _ in 0..3 {
        z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
        let mut x = z;
        x = (x ^ (x >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
        x = (x ^ (x >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
        z = x ^ (x >> 31);
    }
    z
}

/// `zeta_k(x) = x - sin(pi k x) / (|k| pi)`, with `zeta_0` the identity.
/// Strictly increasing on `[0, 1]` and fixing both endpoints.
pub fn zeta(k: i64, x: f64) -> f64 {
    if k == 0 || x <= 0.0 || x >= 1.0 {
        return x.clamp(0.0, 1.0);
    }
    x - (PI * k as f64 * x).sin() / (k.abs() as f64 * PI)
}

/// Symmetric integer law for the frequency of a sine warp component.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub enum KLaw {
    /// Degenerate law; symmetric (and assumption-satisfying) only for 0.
    PointMass(i64),
    /// `+k` or `-k` with equal probability.
    SignedPair(u32),
    /// `V1 V2` with `V1 ~ Poisson(mean)` and `V2 = +-1` equiprobable.
    SignedPoisson { mean: f64 },
}

impl KLaw {
    pub fn sample(&self, rng: &mut impl Rng) -> i64 {
        match *self {
            KLaw::PointMass(k) => k,
            KLaw::SignedPair(k) => {
                if rng.random::<bool>() {
                    k as i64
                } else {
                    -(k as i64)
                }
            }
            KLaw::SignedPoisson { mean } => {
                let v1 = Poisson::new(mean).expect("positive mean").sample(rng) as i64;
                let sign = if rng.random::<bool>() { 1 } else { -1 };
                v1 * sign
            }
        }
    }

    pub fn is_symmetric(&self) -> bool {
        !matches!(self, KLaw::PointMass(k) if *k != 0)
    }
}

/// Configuration of the sine-mixture warp family.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SineWarpConfig {
    /// Mixture size `J >= 1`; larger values concentrate the law around the
    /// identity.
    pub j: usize,
    pub k_law: KLaw,
}

impl SineWarpConfig {
    /// The configuration behind the bimodal scenario: `J = 2` and
    /// `K = V1 V2` with `V1 ~ Poisson(3)`.
    pub fn bimodal_default() -> Self {
        Self { j: 2, k_law: KLaw::SignedPoisson { mean: 3.0 } }
    }
}

/// A sampled warp: a convex mixture of `zeta` components, evaluable in
/// closed form.
#[derive(Clone, Debug)]
pub struct SineWarp {
    terms: Vec<(i64, f64)>,
}

impl SineWarp {
    pub fn eval(&self, x: f64) -> f64 {
        self.terms.iter().map(|&(k, w)| w * zeta(k, x)).sum()
    }

    pub fn terms(&self) -> &[(i64, f64)] {
        &self.terms
    }

    /// Samples the warp on a canonical grid over `[0, 1]`.
    pub fn to_warp_map(&self, g: usize) -> WarpMap {
        WarpMap::from_fn(Interval::unit(), g, |x| self.eval(x))
            .expect("sine mixtures are monotone")
    }
}

/// Draws a warp `T = sum_j w_j zeta_{K_j}` with i.i.d. frequencies and
/// weights given by uniform spacings. `J = 1` draws no uniforms.
pub fn sample_sine_warp(cfg: &SineWarpConfig, rng: &mut impl Rng) -> SineWarp {
    assert!(cfg.j >= 1, "mixture size must be at least 1");
    let ks: Vec<i64> = (0..cfg.j).map(|_| cfg.k_law.sample(rng)).collect();
    if cfg.j == 1 {
        return SineWarp { terms: vec![(ks[0], 1.0)] };
    }
    let mut us: Vec<f64> = (0..cfg.j - 1).map(|_| rng.random::<f64>()).collect();
    us.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let mut terms = Vec::with_capacity(cfg.j);
    let mut prev = 0.0;
    for (j, &k) in ks.iter().enumerate() {
        let upper = if j + 1 == cfg.j { 1.0 } else { us[j] };
        terms.push((k, upper - prev));
        prev = upper;
    }
    SineWarp { terms }
}

/// Draws a Poisson process with mean measure `tau * lambda` by inverse-CDF
/// sampling of the locations; the returned pattern is sorted.
pub fn sample_poisson_pattern(
    lambda: &DiffuseMeasure,
    tau: f64,
    rng: &mut impl Rng,
) -> Result<PointPattern> {
    if !(tau.is_finite() && tau > 0.0) {
        return Err(Error::InvalidParameter(format!("intensity tau={tau} must be positive")));
    }
    let count = Poisson::new(tau).expect("positive tau").sample(rng) as usize;
    let points = (0..count).map(|_| lambda.quantile_at(rng.random::<f64>())).collect();
    PointPattern::new(lambda.domain(), points)
}

/// Everything a simulated scenario knows about itself: the structural mean,
/// the true warps, and the point patterns before and after warping.
#[derive(Clone, Debug)]
pub struct ScenarioDraw {
    pub structural_mean: DiffuseMeasure,
    pub true_warps: Vec<WarpMap>,
    pub unwarped: Vec<PointPattern>,
    pub warped: Vec<PointPattern>,
    /// Linear-warp slopes when the scenario's warps are linear.
    pub warp_slopes: Option<Vec<f64>>,
}

pub const BIMODAL_DOMAIN: Interval = Interval { lo: -16.0, hi: 16.0 };

/// Bimodal Cox scenario: two unit-variance Gaussian modes at +-8 over a
/// Beta(1.5, 1.5) background on [-12, 12], warped by sine mixtures.
#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct BimodalScenarioConfig {
    pub n: usize,
    pub tau: f64,
    /// Strength of the background component.
    pub epsilon: f64,
    pub warp: SineWarpConfig,
    pub seed: u64,
    pub grid: usize,
}

impl Default for BimodalScenarioConfig {
    fn default() -> Self {
        Self {
            n: 30,
            tau: 93.0,
            epsilon: 0.1,
            warp: SineWarpConfig::bimodal_default(),
            seed: 0,
            grid: DEFAULT_GRID,
        }
    }
}

/// Warped-uniform Cox scenario: Lebesgue structural mean on `[0, 1]`
/// warped by sine mixtures. The structural density is bounded below, which
/// makes this the reference scenario for the dense-sampling normal limit.
#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct WarpedUniformScenarioConfig {
    pub n: usize,
    pub tau: f64,
    pub warp: SineWarpConfig,
    pub seed: u64,
    pub grid: usize,
}

impl Default for WarpedUniformScenarioConfig {
    fn default() -> Self {
        Self {
            n: 30,
            tau: 93.0,
            warp: SineWarpConfig::bimodal_default(),
            seed: 0,
            grid: DEFAULT_GRID,
        }
    }
}

/// Simulates the warped-uniform scenario on the canonical domain.
pub fn simulate_warped_uniform(cfg: &WarpedUniformScenarioConfig) -> Result<ScenarioDraw> {
    if cfg.n == 0 {
        return Err(Error::EmptyCollection("scenario requires n >= 1"));
    }
    let lambda = DiffuseMeasure::uniform(Interval::unit(), cfg.grid);
    let mut true_warps = Vec::with_capacity(cfg.n);
    let mut unwarped = Vec::with_capacity(cfg.n);
    let mut warped = Vec::with_capacity(cfg.n);
    for i in 0..cfg.n {
        let mut rng = stream_rng(cfg.seed, i as u64);
        let warp = sample_sine_warp(&cfg.warp, &mut rng).to_warp_map(cfg.grid);
        let pattern = sample_poisson_pattern(&lambda, cfg.tau, &mut rng)?;
        warped.push(push_forward_pattern(&pattern, &warp)?);
        true_warps.push(warp);
        unwarped.push(pattern);
    }
    Ok(ScenarioDraw { structural_mean: lambda, true_warps, unwarped, warped, warp_slopes: None })
}

/// Triangular Cox scenario: triangular structural mean of half-width 1 on
/// `[-c, c]`, warped by the linear maps `x -> h x` with random `h`.
#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct TriangularScenarioConfig {
    pub n: usize,
    pub tau: f64,
    /// Support bound `c`; the scenario domain is `[-c, c]`.
    pub support_bound: f64,
    /// Mixture weight of the narrow uniform component of the `h` law,
    /// chosen so that `E[h] = 1`.
    pub mix_alpha: f64,
    pub seed: u64,
    pub grid: usize,
}

impl Default for TriangularScenarioConfig {
    fn default() -> Self {
        Self {
            n: 30,
            tau: 93.0,
            support_bound: 3.0,
            mix_alpha: 0.675,
            seed: 0,
            grid: DEFAULT_GRID,
        }
    }
}

impl TriangularScenarioConfig {
    pub fn domain(&self) -> Interval {
        Interval { lo: -self.support_bound, hi: self.support_bound }
    }

    /// Draws `h ~ alpha U[0.35, 1] + (1 - alpha) U[0.35, 3]`.
    pub fn sample_h(&self, rng: &mut impl Rng) -> f64 {
        let narrow = rng.random::<f64>() < self.mix_alpha;
        let u = rng.random::<f64>();
        if narrow {
            0.35 + 0.65 * u
        } else {
            0.35 + 2.65 * u
        }
    }
}

// regularized incomplete beta for a = b = 3/2, used by the background CDF
fn beta_1p5_cdf(u: f64) -> f64 {
    let u = u.clamp(0.0, 1.0);
    let root = (u * (1.0 - u)).sqrt();
    (2.0 / PI) * (u.sqrt().asin() - (1.0 - 2.0 * u) * root)
}

fn beta_1p5_pdf(u: f64) -> f64 {
    if !(0.0..=1.0).contains(&u) {
        return 0.0;
    }
    (8.0 / PI) * (u * (1.0 - u)).sqrt()
}

/// Structural mean density of the bimodal scenario on `[-16, 16]`, with the
/// Gaussian components renormalized after truncation to the domain.
pub fn bimodal_density(x: f64, epsilon: f64) -> f64 {
    if !BIMODAL_DOMAIN.contains(x) {
        return 0.0;
    }
    let phi = |z: f64| (-0.5 * z * z).exp() / (2.0 * PI).sqrt();
    let z_c = standard_normal_cdf(8.0) - standard_normal_cdf(-24.0);
    let modes = 0.5 * (1.0 - epsilon) * (phi(x - 8.0) + phi(x + 8.0)) / z_c;
    let background = epsilon / 24.0 * beta_1p5_pdf((x + 12.0) / 24.0);
    modes + background
}

/// CDF of [`bimodal_density`].
pub fn bimodal_cdf(x: f64, epsilon: f64) -> f64 {
    let x = BIMODAL_DOMAIN.clamp(x);
    let z_c = standard_normal_cdf(8.0) - standard_normal_cdf(-24.0);
    let mode_hi = (standard_normal_cdf(x - 8.0) - standard_normal_cdf(-24.0)) / z_c;
    let mode_lo = (standard_normal_cdf(x + 8.0) - standard_normal_cdf(-8.0)) / z_c;
    0.5 * (1.0 - epsilon) * (mode_hi + mode_lo) + epsilon * beta_1p5_cdf((x + 12.0) / 24.0)
}

pub fn bimodal_measure(epsilon: f64, g: usize) -> Result<DiffuseMeasure> {
    DiffuseMeasure::from_cdf_fn(BIMODAL_DOMAIN, g, |x| bimodal_cdf(x, epsilon))
}

/// CDF of the triangular density of half-width `h` and height `1/h`.
pub fn triangular_cdf(t: f64, h: f64) -> f64 {
    if t <= -h {
        0.0
    } else if t <= 0.0 {
        (t + h) * (t + h) / (2.0 * h * h)
    } else if t <= h {
        1.0 - (h - t) * (h - t) / (2.0 * h * h)
    } else {
        1.0
    }
}

pub fn triangular_measure(h: f64, support_bound: f64, g: usize) -> Result<DiffuseMeasure> {
    if !(h > 0.0 && h <= support_bound) {
        return Err(Error::InvalidParameter(format!(
            "triangular half-width {h} outside (0, {support_bound}]"
        )));
    }
    let domain = Interval::new(-support_bound, support_bound)?;
    DiffuseMeasure::from_cdf_fn(domain, g, |t| triangular_cdf(t, h))
}

/// Simulates the bimodal scenario: `n` Poisson processes with mean measure
/// `tau * lambda`, each pushed through an independently drawn sine warp
/// rescaled to the scenario domain.
pub fn simulate_bimodal(cfg: &BimodalScenarioConfig) -> Result<ScenarioDraw> {
    if cfg.n == 0 {
        return Err(Error::EmptyCollection("scenario requires n >= 1"));
    }
    if !(0.0..=1.0).contains(&cfg.epsilon) {
        return Err(Error::InvalidParameter(format!(
            "background strength {} outside [0, 1]",
            cfg.epsilon
        )));
    }
    let lambda = bimodal_measure(cfg.epsilon, cfg.grid)?;
    let mut true_warps = Vec::with_capacity(cfg.n);
    let mut unwarped = Vec::with_capacity(cfg.n);
    let mut warped = Vec::with_capacity(cfg.n);
    for i in 0..cfg.n {
        let mut rng = stream_rng(cfg.seed, i as u64);
        let warp = sample_sine_warp(&cfg.warp, &mut rng)
            .to_warp_map(cfg.grid)
            .rescale_affine(Interval::unit(), BIMODAL_DOMAIN)?;
        let pattern = sample_poisson_pattern(&lambda, cfg.tau, &mut rng)?;
        warped.push(push_forward_pattern(&pattern, &warp)?);
        true_warps.push(warp);
        unwarped.push(pattern);
    }
    Ok(ScenarioDraw { structural_mean: lambda, true_warps, unwarped, warped, warp_slopes: None })
}

/// Simulates the triangular scenario with linear warps `x -> h_i x`
/// (clamped to the domain outside the structural support).
pub fn simulate_triangular(cfg: &TriangularScenarioConfig) -> Result<ScenarioDraw> {
    if cfg.n == 0 {
        return Err(Error::EmptyCollection("scenario requires n >= 1"));
    }
    let domain = cfg.domain();
    let lambda = triangular_measure(1.0, cfg.support_bound, cfg.grid)?;
    let mut true_warps = Vec::with_capacity(cfg.n);
    let mut unwarped = Vec::with_capacity(cfg.n);
    let mut warped = Vec::with_capacity(cfg.n);
    let mut slopes = Vec::with_capacity(cfg.n);
    for i in 0..cfg.n {
        let mut rng = stream_rng(cfg.seed, i as u64);
        let h = cfg.sample_h(&mut rng);
        let warp = WarpMap::from_fn(domain, cfg.grid, |x| domain.clamp(h * x))?;
        let pattern = sample_poisson_pattern(&lambda, cfg.tau, &mut rng)?;
        warped.push(push_forward_pattern(&pattern, &warp)?);
        true_warps.push(warp);
        unwarped.push(pattern);
        slopes.push(h);
    }
    Ok(ScenarioDraw {
        structural_mean: lambda,
        true_warps,
        unwarped,
        warped,
        warp_slopes: Some(slopes),
    })
}

/// A scenario choice plus its parameters, as selected on the command line
/// or in study configurations.
#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub enum ScenarioConfig {
    Bimodal(BimodalScenarioConfig),
    Triangular(TriangularScenarioConfig),
    WarpedUniform(WarpedUniformScenarioConfig),
}

impl ScenarioConfig {
    pub fn name(&self) -> &'static str {
        match self {
            ScenarioConfig::Bimodal(_) => "bimodal",
            ScenarioConfig::Triangular(_) => "triangular",
            ScenarioConfig::WarpedUniform(_) => "warped-uniform",
        }
    }

    pub fn domain(&self) -> Interval {
        match self {
            ScenarioConfig::Bimodal(_) => BIMODAL_DOMAIN,
            ScenarioConfig::Triangular(cfg) => cfg.domain(),
            ScenarioConfig::WarpedUniform(_) => Interval::unit(),
        }
    }

    pub fn simulate(&self) -> Result<ScenarioDraw> {
        match self {
            ScenarioConfig::Bimodal(cfg) => simulate_bimodal(cfg),
            ScenarioConfig::Triangular(cfg) => simulate_triangular(cfg),
            ScenarioConfig::WarpedUniform(cfg) => simulate_warped_uniform(cfg),
        }
    }

    /// The same scenario with `n`, `tau` and `seed` replaced; used by the
    /// study harnesses to populate cells.
    pub fn with_cell(&self, n: usize, tau: f64, seed: u64) -> Self {
        let mut out = *self;
        match &mut out {
            ScenarioConfig::Bimodal(cfg) => {
                cfg.n = n;
                cfg.tau = tau;
                cfg.seed = seed;
            }
            ScenarioConfig::Triangular(cfg) => {
                cfg.n = n;
                cfg.tau = tau;
                cfg.seed = seed;
            }
            ScenarioConfig::WarpedUniform(cfg) => {
                cfg.n = n;
                cfg.tau = tau;
                cfg.seed = seed;
            }
        }
        out
    }

    pub fn n(&self) -> usize {
        match self {
            ScenarioConfig::Bimodal(cfg) => cfg.n,
            ScenarioConfig::Triangular(cfg) => cfg.n,
            ScenarioConfig::WarpedUniform(cfg) => cfg.n,
        }
    }

    pub fn tau(&self) -> f64 {
        match self {
            ScenarioConfig::Bimodal(cfg) => cfg.tau,
            ScenarioConfig::Triangular(cfg) => cfg.tau,
            ScenarioConfig::WarpedUniform(cfg) => cfg.tau,
        }
    }

    pub fn seed(&self) -> u64 {
        match self {
            ScenarioConfig::Bimodal(cfg) => cfg.seed,
            ScenarioConfig::Triangular(cfg) => cfg.seed,
            ScenarioConfig::WarpedUniform(cfg) => cfg.seed,
        }
    }

    pub fn grid(&self) -> usize {
        match self {
            ScenarioConfig::Bimodal(cfg) => cfg.grid,
            ScenarioConfig::Triangular(cfg) => cfg.grid,
            ScenarioConfig::WarpedUniform(cfg) => cfg.grid,
        }
    }

    pub fn set_grid(&mut self, g: usize) {
        match self {
            ScenarioConfig::Bimodal(cfg) => cfg.grid = g,
            ScenarioConfig::Triangular(cfg) => cfg.grid = g,
            ScenarioConfig::WarpedUniform(cfg) => cfg.grid = g,
        }
    }

    pub fn structural_mean(&self) -> Result<DiffuseMeasure> {
        match self {
            ScenarioConfig::Bimodal(cfg) => bimodal_measure(cfg.epsilon, cfg.grid),
            ScenarioConfig::Triangular(cfg) => {
                triangular_measure(1.0, cfg.support_bound, cfg.grid)
            }
            ScenarioConfig::WarpedUniform(cfg) => {
                Ok(DiffuseMeasure::uniform(Interval::unit(), cfg.grid))
            }
        }
    }

    /// Draws one warp from the scenario's law and evaluates it at canonical
    /// (unit-interval) points; used for direct Monte-Carlo estimates of the
    /// warp covariance kernel.
    pub fn sample_canonical_warp_at(&self, rng: &mut impl Rng, xs: &[f64]) -> Vec<f64> {
        match self {
            ScenarioConfig::Bimodal(cfg) => {
                let warp = sample_sine_warp(&cfg.warp, rng);
                xs.iter().map(|&x| warp.eval(x)).collect()
            }
            ScenarioConfig::WarpedUniform(cfg) => {
                let warp = sample_sine_warp(&cfg.warp, rng);
                xs.iter().map(|&x| warp.eval(x)).collect()
            }
            ScenarioConfig::Triangular(cfg) => {
                let h = cfg.sample_h(rng);
                let c = cfg.support_bound;
                xs.iter()
                    .map(|&x| {
                        let v = (h * (2.0 * c * x - c)).clamp(-c, c);
                        (v + c) / (2.0 * c)
                    })
                    .collect()
            }
        }
    }
}

//! Quantitative verification harnesses: error metrics, Monte-Carlo
//! unbiasedness checks, convergence and rate studies, and the warp
//! covariance comparison for the dense-sampling normal limit.

use crate::error::{Error, Result};

use crate::measure::{
    DiffuseMeasure, EmpiricalMeasure, Interval, PointPattern, RescaleAffine,
};
use crate::registration::{pipeline, KernelPolicy};
use crate::simulation::{
    derive_seed, sample_sine_warp, stream_rng, ScenarioConfig, SineWarpConfig,
};
use crate::smoothing::{lemma_bound, smooth_pattern, standard_normal_pdf, KernelSpec};
use crate::transport::{wasserstein2, WarpMap};
use rand::prelude::*;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

/// Supremum distance between two warp maps over their merged grids.
pub fn warp_sup_error(a: &WarpMap, b: &WarpMap) -> Result<f64> {
    if !a.domain().approx_eq(&b.domain()) {
        return Err(Error::DomainMismatch { expected: a.domain(), found: b.domain() });
    }
    let mut sup: f64 = 0.0;
    for &x in a.grid().iter().chain(b.grid()) {
        sup = sup.max((a.apply(x) - b.apply(x)).abs());
    }
    Ok(sup)
}

/// The l2 distance of the ordered points of two equal-size patterns.
pub fn registration_l2(a: &PointPattern, b: &PointPattern) -> Result<f64> {
    if a.len() != b.len() {
        return Err(Error::CountMismatch { left: a.len(), right: b.len() });
    }
    let total: f64 = a
        .points()
        .iter()
        .zip(b.points())
        .map(|(x, y)| (x - y) * (x - y))
        .sum();
    Ok(total.sqrt())
}

/// Per-point registration error: the 2-Wasserstein distance between the
/// normalized patterns, `registration_l2 / sqrt(m)`.
pub fn registration_rms(a: &PointPattern, b: &PointPattern) -> Result<f64> {
    if a.is_empty() {
        return Ok(0.0);
    }
    Ok(registration_l2(a, b)? / (a.len() as f64).sqrt())
}

/// Monte-Carlo check that the warp law is unbiased: per grid point, the
/// sample mean of `T(x)` should sit within four standard errors of `x`.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct UnbiasednessReport {
    pub xs: Vec<f64>,
    pub means: Vec<f64>,
    pub standard_errors: Vec<f64>,
    pub flagged: Vec<bool>,
    pub draws: usize,
}

impl UnbiasednessReport {
    pub fn any_flagged(&self) -> bool {
        self.flagged.iter().any(|&f| f)
    }
}

pub fn unbiasedness_mc(
    cfg: &SineWarpConfig,
    draws: usize,
    xs: &[f64],
    seed: u64,
) -> UnbiasednessReport {
    assert!(draws >= 100, "need at least 100 draws");
    let samples: Vec<Vec<f64>> = (0..draws as u64)
        .into_par_iter()
        .map(|d| {
            let mut rng = stream_rng(seed, d);
            let warp = sample_sine_warp(cfg, &mut rng);
            xs.iter().map(|&x| warp.eval(x)).collect()
        })
        .collect();
    let n = draws as f64;
    let mut means = Vec::with_capacity(xs.len());
    let mut ses = Vec::with_capacity(xs.len());
    let mut flagged = Vec::with_capacity(xs.len());
    for (k, &x) in xs.iter().enumerate() {
        let mean = samples.iter().map(|s| s[k]).sum::<f64>() / n;
        let var = samples.iter().map(|s| (s[k] - mean) * (s[k] - mean)).sum::<f64>() / (n - 1.0);
        let se = (var / n).sqrt();
        means.push(mean);
        ses.push(se);
        // absolute slack of 1e-12 absorbs summation rounding when the law
        // is degenerate and the standard error is exactly zero
        flagged.push((mean - x).abs() > 4.0 * se + 1e-12);
    }
    UnbiasednessReport { xs: xs.to_vec(), means, standard_errors: ses, flagged, draws }
}

/// Comparison of the replicate covariance of `sqrt(n) (S_n - id)` against a
/// direct Monte-Carlo estimate of the warp covariance kernel.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct CovarianceReport {
    pub xs: Vec<f64>,
    pub n: usize,
    pub tau: f64,
    pub replicates: usize,
    pub direct_draws: usize,
    pub empirical: Vec<Vec<f64>>,
    pub direct: Vec<Vec<f64>>,
    /// Max entrywise error over the thresholded entries, normalized by the
    /// kernel's maximum `max |kappa|`. This is the quantity whose sampling
    /// noise is controlled by the replicate count.
    pub max_scaled_error: f64,
    /// Max entrywise error normalized per entry by `|kappa_ij|`; blows up
    /// with estimator noise on entries near the threshold, reported for
    /// diagnostics.
    pub max_rel_error: f64,
    /// Share of thresholded entries whose signs agree.
    pub sign_agreement: f64,
    pub thresholded_entries: usize,
}

fn covariance(rows: &[Vec<f64>]) -> Vec<Vec<f64>> {
    let r = rows.len() as f64;
    let k = rows[0].len();
    let means: Vec<f64> =
        (0..k).map(|j| rows.iter().map(|s| s[j]).sum::<f64>() / r).collect();
    let mut cov = vec![vec![0.0; k]; k];
    for (i, row) in cov.iter_mut().enumerate() {
        for (j, cell) in row.iter_mut().enumerate() {
            *cell = rows
                .iter()
                .map(|s| (s[i] - means[i]) * (s[j] - means[j]))
                .sum::<f64>()
                / (r - 1.0);
        }
    }
    cov
}

/// Nine interior canonical evaluation points 0.1, ..., 0.9 (endpoints are
/// excluded because warps fix them, forcing a degenerate kernel there).
pub fn interior_grid() -> Vec<f64> {
    (1..=9).map(|i| i as f64 / 10.0).collect()
}

/// Runs the covariance comparison on a scenario. Requires the dense
/// sampling regime `tau >= n^2` and a power-rule exponent `alpha >= 1/4`,
/// so that the bandwidths vanish faster than `1/sqrt(n)`.
pub fn clt_covariance_check(
    scenario: &ScenarioConfig,
    replicates: usize,
    direct_draws: usize,
    alpha: f64,
) -> Result<CovarianceReport> {
    let n = scenario.n();
    let tau = scenario.tau();
    if tau + 1e-9 < (n * n) as f64 {
        return Err(Error::InvalidParameter(format!(
            "dense regime requires tau >= n^2, got tau={tau}, n={n}"
        )));
    }
    if alpha < 0.25 {
        return Err(Error::InvalidParameter(format!(
            "dense regime requires bandwidth exponent alpha >= 1/4, got {alpha}"
        )));
    }
    if replicates < 2 {
        return Err(Error::InvalidParameter("need at least two replicates".into()));
    }
    let xs = interior_grid();
    let unit = Interval::unit();
    let grid = scenario.grid();
    let domain = scenario.domain();
    let lambda_c = scenario.structural_mean()?.rescale_affine(domain, unit)?;
    let policy = KernelPolicy::power(alpha);
    let sqrt_n = (n as f64).sqrt();
    let base_seed = scenario.seed();

    let rows: Vec<Vec<f64>> = (0..replicates as u64)
        .into_par_iter()
        .map(|rep| -> Result<Vec<f64>> {
            let cell = scenario.with_cell(n, tau, derive_seed(base_seed, 1, rep));
            let draw = cell.simulate()?;
            let out = pipeline(&draw.warped, &policy, grid)?;
            let hat_c = out.lambda_hat.rescale_affine(domain, unit)?;
            Ok(xs
                .iter()
                .map(|&x| sqrt_n * (hat_c.quantile_at(lambda_c.cdf_at(x)) - x))
                .collect())
        })
        .collect::<Result<_>>()?;
    let empirical = covariance(&rows);

    let direct_rows: Vec<Vec<f64>> = (0..direct_draws as u64)
        .into_par_iter()
        .map(|d| {
            let mut rng = stream_rng(derive_seed(base_seed, 2, 0), d);
            scenario.sample_canonical_warp_at(&mut rng, &xs)
        })
        .collect();
    let direct = covariance(&direct_rows);

    let kappa_max = direct
        .iter()
        .flatten()
        .fold(0.0f64, |acc, &v| acc.max(v.abs()));
    let threshold = 0.1 * kappa_max;
    let mut max_scaled: f64 = 0.0;
    let mut max_rel: f64 = 0.0;
    let mut agree = 0usize;
    let mut total = 0usize;
    for i in 0..xs.len() {
        for j in 0..xs.len() {
            let kappa = direct[i][j];
            if kappa.abs() >= threshold && threshold > 0.0 {
                total += 1;
                let err = (empirical[i][j] - kappa).abs();
                max_scaled = max_scaled.max(err / kappa_max);
                max_rel = max_rel.max(err / kappa.abs());
                if empirical[i][j].signum() == kappa.signum() {
                    agree += 1;
                }
            }
        }
    }
    let sign_agreement = if total == 0 { 1.0 } else { agree as f64 / total as f64 };
    Ok(CovarianceReport {
        xs,
        n,
        tau,
        replicates,
        direct_draws,
        empirical,
        direct,
        max_scaled_error: max_scaled,
        max_rel_error: max_rel,
        sign_agreement,
        thresholded_entries: total,
    })
}

/// One (n, tau) study cell with per-replicate error metrics.
#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct CellReport {
    pub n: usize,
    pub tau: f64,
    pub w2_errors: Vec<f64>,
    pub warp_sup_errors: Vec<f64>,
    pub registration_rms: Vec<f64>,
    pub median_w2: f64,
    pub iqr_w2: f64,
    pub median_warp_sup: f64,
    pub median_registration_rms: f64,
}

/// A full study: per-cell metrics plus the fitted log-log rate slope.
#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct StudyReport {
    pub scenario: String,
    pub replicates: usize,
    pub seed: u64,
    pub grid: usize,
    pub cells: Vec<CellReport>,
    /// OLS slope of log median W2 error against log n (when n varies).
    pub w2_slope: Option<f64>,
    pub lemma_sweep_pass: bool,
}

/// Study configuration: a scenario template, the (n, tau) cells to fill,
/// and the smoothing policy.
#[derive(Clone, Debug)]
pub struct StudyConfig {
    pub scenario: ScenarioConfig,
    pub cells: Vec<(usize, f64)>,
    pub replicates: usize,
    pub policy: KernelPolicy,
    pub grid: usize,
    pub seed: u64,
    /// Pattern count of the smoothing-bound sweep attached to the report.
    pub lemma_sweep_patterns: usize,
}

impl StudyConfig {
    pub fn new(scenario: ScenarioConfig, cells: Vec<(usize, f64)>, replicates: usize) -> Self {
        let grid = scenario.grid();
        Self {
            scenario,
            cells,
            replicates,
            policy: KernelPolicy::default(),
            grid,
            seed: 0,
            lemma_sweep_patterns: 100,
        }
    }
}

fn sample_quantile(sorted: &[f64], q: f64) -> f64 {
    let pos = q * (sorted.len() - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    let t = pos - lo as f64;
    sorted[lo] * (1.0 - t) + sorted[hi] * t
}

fn median_iqr(values: &[f64]) -> (f64, f64) {
    let mut sorted = values.to_vec();
    sorted.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let median = sample_quantile(&sorted, 0.5);
    let iqr = sample_quantile(&sorted, 0.75) - sample_quantile(&sorted, 0.25);
    (median, iqr)
}

/// Verifies the smoothing-distance bound on random patterns across the
/// standard bandwidth sweep.
pub fn lemma_sweep(patterns: usize, seed: u64) -> bool {
    let sigmas = [0.25, 0.1, 0.05, 0.01];
    (0..patterns as u64).into_par_iter().all(|i| {
        let mut rng = stream_rng(seed, i);
        let m = rng.random_range(1..=200);
        let pts: Vec<f64> = (0..m).map(|_| rng.random::<f64>()).collect();
        let pat = PointPattern::new(Interval::unit(), pts).unwrap();
        let emp = EmpiricalMeasure::new(pat.clone()).unwrap();
        sigmas.iter().all(|&sigma| {
            let kernel = KernelSpec::gaussian(sigma).unwrap();
            let smoothed = smooth_pattern(&pat, &kernel, 2049).unwrap();
            let d = wasserstein2(&smoothed, &emp).unwrap();
            let bound = lemma_bound(&kernel).unwrap();
            d * d <= bound + 1e-6
        })
    })
}

struct ReplicateMetrics {
    w2: f64,
    warp_sup: f64,
    reg_rms: f64,
}

fn run_replicate(
    scenario: &ScenarioConfig,
    policy: &KernelPolicy,
    grid: usize,
) -> Result<ReplicateMetrics> {
    let draw = scenario.simulate()?;
    let out = pipeline(&draw.warped, policy, grid)?;
    let unit = Interval::unit();
    let domain = scenario.domain();

    let truth_c = draw.structural_mean.rescale_affine(domain, unit)?;
    let hat_c = out.lambda_hat.rescale_affine(domain, unit)?;
    let w2 = wasserstein2(&hat_c, &truth_c)?;

    let mut sup_total = 0.0;
    for (est, truth) in out.warps.iter().zip(&draw.true_warps) {
        let est_c = est.rescale_affine(domain, unit)?;
        let truth_c = truth.rescale_affine(domain, unit)?;
        sup_total += warp_sup_error(&est_c, &truth_c)?;
    }
    let warp_sup = sup_total / draw.true_warps.len() as f64;

    let mut rms_total = 0.0;
    let mut counted = 0usize;
    for (reg, orig) in out.registered.iter().zip(&draw.unwarped) {
        if orig.is_empty() {
            continue;
        }
        let reg_c = reg.rescale_affine(domain, unit)?;
        let orig_c = orig.rescale_affine(domain, unit)?;
        rms_total += registration_rms(&reg_c, &orig_c)?;
        counted += 1;
    }
    let reg_rms = if counted == 0 { 0.0 } else { rms_total / counted as f64 };

    Ok(ReplicateMetrics { w2, warp_sup, reg_rms })
}

/// Runs the study over its cells; replicates are parallel with derived RNG
/// streams and aggregated in replicate order, so reports are deterministic.
pub fn run_study(cfg: &StudyConfig) -> Result<StudyReport> {
    if cfg.cells.is_empty() {
        return Err(Error::EmptyCollection("study has no cells"));
    }
    if cfg.replicates == 0 {
        return Err(Error::InvalidParameter("study needs at least one replicate".into()));
    }
    let mut cells = Vec::with_capacity(cfg.cells.len());
    for (cell_idx, &(n, tau)) in cfg.cells.iter().enumerate() {
        let metrics: Vec<ReplicateMetrics> = (0..cfg.replicates as u64)
            .into_par_iter()
            .map(|rep| {
                let seed = derive_seed(cfg.seed, cell_idx as u64, rep);
                let mut scenario = cfg.scenario.with_cell(n, tau, seed);
                scenario.set_grid(cfg.grid);
                run_replicate(&scenario, &cfg.policy, cfg.grid)
            })
            .collect::<Result<_>>()?;
        let w2_errors: Vec<f64> = metrics.iter().map(|m| m.w2).collect();
        let warp_sup_errors: Vec<f64> = metrics.iter().map(|m| m.warp_sup).collect();
        let registration_rms: Vec<f64> = metrics.iter().map(|m| m.reg_rms).collect();
        let (median_w2, iqr_w2) = median_iqr(&w2_errors);
        let (median_warp_sup, _) = median_iqr(&warp_sup_errors);
        let (median_registration_rms, _) = median_iqr(&registration_rms);
        cells.push(CellReport {
            n,
            tau,
            w2_errors,
            warp_sup_errors,
            registration_rms,
            median_w2,
            iqr_w2,
            median_warp_sup,
            median_registration_rms,
        });
    }

    let distinct_n: std::collections::BTreeSet<usize> = cells.iter().map(|c| c.n).collect();
    let w2_slope = if distinct_n.len() >= 2 {
        let points: Vec<(f64, f64)> = cells
            .iter()
            .map(|c| ((c.n as f64).ln(), c.median_w2.max(1e-300).ln()))
            .collect();
        Some(ols_slope(&points))
    } else {
        None
    };
    let lemma_sweep_pass = lemma_sweep(cfg.lemma_sweep_patterns, derive_seed(cfg.seed, 999, 0));

    Ok(StudyReport {
        scenario: cfg.scenario.name().to_string(),
        replicates: cfg.replicates,
        seed: cfg.seed,
        grid: cfg.grid,
        cells,
        w2_slope,
        lemma_sweep_pass,
    })
}

fn ols_slope(points: &[(f64, f64)]) -> f64 {
    let n = points.len() as f64;
    let mx = points.iter().map(|p| p.0).sum::<f64>() / n;
    let my = points.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = points.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = points.iter().map(|p| (p.0 - mx) * (p.0 - mx)).sum();
    sxy / sxx
}

/// Simple fixed-bandwidth mode finder: local maxima of the boxcar density
/// `(F(x + b) - F(x - b)) / (2b)` scanned on a uniform grid, returned as
/// `(location, height)` sorted by height, tallest first. Peaks closer than
/// `min_separation` to a taller peak are suppressed.
pub fn find_modes(
    measure: &DiffuseMeasure,
    bandwidth: f64,
    step: f64,
    min_separation: f64,
) -> Vec<(f64, f64)> {
    let domain = measure.domain();
    let count = (domain.width() / step).ceil() as usize;
    let xs: Vec<f64> = (0..=count).map(|i| domain.lo + i as f64 * step).collect();
    let density: Vec<f64> = xs
        .iter()
        .map(|&x| (measure.cdf_at(x + bandwidth) - measure.cdf_at(x - bandwidth)) / (2.0 * bandwidth))
        .collect();
    let mut peaks: Vec<(f64, f64)> = Vec::new();
    for i in 1..xs.len() - 1 {
        if density[i] > density[i - 1] && density[i] >= density[i + 1] {
            peaks.push((xs[i], density[i]));
        }
    }
    peaks.sort_by(|a, b| b.1.partial_cmp(&a.1).unwrap());
    let mut kept: Vec<(f64, f64)> = Vec::new();
    for p in peaks {
        if kept.iter().all(|q| (q.0 - p.0).abs() >= min_separation) {
            kept.push(p);
        }
    }
    kept
}

/// Plain Gaussian kernel density estimate of pooled points, for the
/// density-comparison figures.
pub fn gaussian_kde(points: &[f64], bandwidth: f64, xs: &[f64]) -> Vec<f64> {
    if points.is_empty() {
        return vec![0.0; xs.len()];
    }
    let inv = 1.0 / (points.len() as f64 * bandwidth);
    xs.iter()
        .map(|&x| {
            points
                .iter()
                .map(|&p| standard_normal_pdf((x - p) / bandwidth))
                .sum::<f64>()
                * inv
        })
        .collect()
}

/// Ordinary least-squares linear fit `y = intercept + slope x`.
pub fn linear_fit(xs: &[f64], ys: &[f64]) -> (f64, f64) {
    let points: Vec<(f64, f64)> = xs.iter().copied().zip(ys.iter().copied()).collect();
    let slope = ols_slope(&points);
    let n = xs.len() as f64;
    let intercept = ys.iter().sum::<f64>() / n - slope * xs.iter().sum::<f64>() / n;
    (intercept, slope)
}

/// Pearson correlation coefficient.
pub fn pearson(xs: &[f64], ys: &[f64]) -> f64 {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let mut sxy = 0.0;
    let mut sxx = 0.0;
    let mut syy = 0.0;
    for (x, y) in xs.iter().zip(ys) {
        sxy += (x - mx) * (y - my);
        sxx += (x - mx) * (x - mx);
        syy += (y - my) * (y - my);
    }
    sxy / (sxx * syy).sqrt()
}

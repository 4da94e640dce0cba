//! Frechet-Wasserstein barycenters by quantile averaging.
//!
//! In one dimension the Frechet functional `M(gamma) = (1/n) sum d^2(mu_i,
//! gamma)` is minimized in closed form by the measure whose quantile
//! function is the pointwise mean of the input quantile functions. The
//! naive arithmetic mean of CDFs is also provided as a baseline.

use crate::error::{Error, Result};
use crate::measure::{DiffuseMeasure, Interval, Measure1d};
use crate::transport::wasserstein2;

/// Strictness jitter applied to averaged quantiles before inversion, scaled
/// by the domain width.
const QUANTILE_JITTER: f64 = 1e-12;

/// The barycenter together with the raw averaged quantile function and the
/// Frechet functional value it attains.
#[derive(Clone, Debug)]
pub struct BarycenterResult {
    pub mean: DiffuseMeasure,
    ps: Vec<f64>,
    qbar: Vec<f64>,
    pub functional_value: f64,
}

impl BarycenterResult {
    /// The averaged quantile function `Qbar(p) = (1/n) sum F_i^{-1}(p)`.
    pub fn quantile_mean_at(&self, p: f64) -> f64 {
        crate::interp::eval_monotone(&self.ps, &self.qbar, p.clamp(0.0, 1.0))
    }

    pub fn quantile_levels(&self) -> &[f64] {
        &self.ps
    }

    pub fn quantile_means(&self) -> &[f64] {
        &self.qbar
    }
}

fn common_domain(measures: &[DiffuseMeasure]) -> Result<Interval> {
    let first = measures.first().ok_or(Error::EmptyCollection("no measures"))?;
    for m in measures {
        if !m.domain().approx_eq(&first.domain()) {
            return Err(Error::DomainMismatch { expected: first.domain(), found: m.domain() });
        }
    }
    Ok(first.domain())
}

/// The regularized Frechet-Wasserstein mean of a nonempty family of
/// measures on a common domain.
///
/// The averaged quantile is sampled at the union of a uniform level grid
/// with every input's CDF breakpoints; between such levels each input
/// quantile is affine, so the average is represented exactly and the
/// inversion onto the output grid introduces no additional error.
pub fn barycenter(measures: &[DiffuseMeasure]) -> Result<BarycenterResult> {
    let domain = common_domain(measures)?;
    let g = measures.iter().map(|m| m.grid().len()).max().unwrap();
    let inv_n = 1.0 / measures.len() as f64;
    let jitter = QUANTILE_JITTER * domain.width();

    let mut ps: Vec<f64> = (0..g).map(|i| i as f64 / (g - 1) as f64).collect();
    for m in measures {
        ps.extend(m.quantile_breakpoints());
    }
    ps.sort_by(|a, b| a.partial_cmp(b).unwrap());
    ps.dedup();

    let mut qbar = vec![0.0; ps.len()];
    for m in measures {
        for (acc, q) in qbar.iter_mut().zip(m.quantiles_at_sorted(&ps)) {
            *acc += q;
        }
    }
    for (q, &p) in qbar.iter_mut().zip(&ps) {
        *q = *q * inv_n + jitter * p;
    }
    let mean = DiffuseMeasure::from_quantile_samples(domain, &ps, &qbar, g)?;
    let functional_value = frechet_functional(&mean, measures)?;
    Ok(BarycenterResult { mean, ps, qbar, functional_value })
}

/// The sample Frechet functional `(1/n) sum d^2(mu_i, gamma)`.
pub fn frechet_functional(gamma: &DiffuseMeasure, measures: &[DiffuseMeasure]) -> Result<f64> {
    if measures.is_empty() {
        return Err(Error::EmptyCollection("no measures"));
    }
    let mut total = 0.0;
    for m in measures {
        let d = wasserstein2(m, gamma)?;
        total += d * d;
    }
    Ok(total / measures.len() as f64)
}

/// The naive estimate that ignores warping: the pointwise average of the
/// CDFs, renormalized to hit 0 and 1 at the domain endpoints.
pub fn arithmetic_mean(measures: &[DiffuseMeasure]) -> Result<DiffuseMeasure> {
    let domain = common_domain(measures)?;
    let g = measures.iter().map(|m| m.grid().len()).max().unwrap();
    let grid = domain.uniform_grid(g);
    let inv_n = 1.0 / measures.len() as f64;
    let cdf: Vec<f64> = grid
        .iter()
        .map(|&x| measures.iter().map(|m| m.cdf_at(x)).sum::<f64>() * inv_n)
        .collect();
    DiffuseMeasure::from_cdf(domain, grid, cdf)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::measure::{grid_tolerance, DEFAULT_GRID};
    use crate::transport::{push_forward_measure, WarpMap};
    use rand::prelude::*;
    use rand_chacha::ChaCha12Rng;

    fn uniform_on(hi: f64) -> DiffuseMeasure {
        DiffuseMeasure::from_cdf_fn(Interval::unit(), DEFAULT_GRID, move |x| (x / hi).min(1.0))
            .unwrap()
    }

    fn random_diffuse(rng: &mut impl Rng, g: usize) -> DiffuseMeasure {
        let mut cdf = vec![0.0];
        let mut acc = 0.0;
        for _ in 1..g {
            acc += rng.random::<f64>() + 1e-3;
            cdf.push(acc);
        }
        let cdf: Vec<f64> = cdf.iter().map(|v| v / acc).collect();
        DiffuseMeasure::from_cdf(Interval::unit(), Interval::unit().uniform_grid(g), cdf).unwrap()
    }

    #[test]
    fn barycenter_of_copies_is_the_measure() {
        let mu = uniform_on(0.8);
        let bc = barycenter(&[mu.clone(), mu.clone(), mu.clone()]).unwrap();
        assert!(wasserstein2(&bc.mean, &mu).unwrap() <= grid_tolerance(DEFAULT_GRID));
    }

    #[test]
    fn barycenter_of_two_uniforms() {
        let bc = barycenter(&[uniform_on(1.0), uniform_on(0.5)]).unwrap();
        let expect = uniform_on(0.75);
        assert!(wasserstein2(&bc.mean, &expect).unwrap() <= grid_tolerance(DEFAULT_GRID));
        // (p + p/2)/2 = 3p/4
        assert!((bc.quantile_mean_at(0.4) - 0.3).abs() < 1e-9);
    }

    #[test]
    fn barycenter_rejects_empty() {
        assert!(barycenter(&[]).is_err());
        assert!(arithmetic_mean(&[]).is_err());
    }

    #[test]
    fn quantile_linearity() {
        let mut rng = ChaCha12Rng::seed_from_u64(21);
        let measures: Vec<DiffuseMeasure> = (0..5).map(|_| random_diffuse(&mut rng, 513)).collect();
        let bc = barycenter(&measures).unwrap();
        let tol = 3.0 * grid_tolerance(513);
        for _ in 0..1000 {
            let p: f64 = rng.random();
            let mean: f64 =
                measures.iter().map(|m| m.quantile_at(p)).sum::<f64>() / measures.len() as f64;
            assert!((bc.mean.quantile_at(p) - mean).abs() <= tol);
        }
    }

    #[test]
    fn functional_examples() {
        let gamma = uniform_on(0.6);
        assert!(frechet_functional(&gamma, &[gamma.clone()]).unwrap() < 1e-12);
        let value =
            frechet_functional(&uniform_on(0.75), &[uniform_on(1.0), uniform_on(0.5)]).unwrap();
        assert!((value - 1.0 / 48.0).abs() < 1e-6);
    }

    #[test]
    fn barycenter_minimizes_functional() {
        let mut rng = ChaCha12Rng::seed_from_u64(33);
        let measures: Vec<DiffuseMeasure> = (0..4).map(|_| random_diffuse(&mut rng, 257)).collect();
        let bc = barycenter(&measures).unwrap();
        for _ in 0..100 {
            // perturb the barycenter through a random small warp
            let a: f64 = rng.random_range(-0.3..0.3);
            let warp = WarpMap::from_fn(Interval::unit(), 257, |x| {
                x + a * x * (1.0 - x)
            })
            .unwrap();
            let candidate = push_forward_measure(&bc.mean, &warp).unwrap();
            let mv = frechet_functional(&candidate, &measures).unwrap();
            assert!(bc.functional_value <= mv + 1e-9, "{} > {mv}", bc.functional_value);
        }
    }

    #[test]
    fn arithmetic_mean_of_copies() {
        let mu = uniform_on(0.7);
        let mean = arithmetic_mean(&[mu.clone(), mu.clone()]).unwrap();
        assert!(wasserstein2(&mean, &mu).unwrap() <= grid_tolerance(DEFAULT_GRID));
    }

    #[test]
    fn arithmetic_mean_differs_from_barycenter() {
        let measures = [uniform_on(1.0), uniform_on(0.5)];
        let naive = arithmetic_mean(&measures).unwrap();
        let bc = barycenter(&measures).unwrap();
        // naive CDF at 0.5 is (0.5 + 1)/2; barycenter CDF is 2/3
        assert!((naive.cdf_at(0.5) - 0.75).abs() < 1e-9);
        assert!((bc.mean.cdf_at(0.5) - 2.0 / 3.0).abs() < 1e-3);
    }
}

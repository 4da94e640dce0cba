//! Point patterns and diffuse probability measures on a closed interval.
//!
//! A [`DiffuseMeasure`] stores a CDF sampled on a strictly increasing grid
//! spanning its domain and evaluates both the CDF and the quantile function
//! by piecewise-linear interpolation. Flat CDF segments (regions of zero
//! density) are permitted; quantiles then follow the infimum convention
//! `F^{-1}(p) = inf { y : F(y) >= p }`.

use crate::error::{Error, Result};
use crate::interp::{eval_monotone, invert_monotone};
use serde::{Deserialize, Serialize};

/// Default number of grid abscissae used for measure CDFs.
pub const DEFAULT_GRID: usize = 4097;

/// Resolution attributable to a piecewise-linear grid of `g` abscissae.
pub fn grid_tolerance(g: usize) -> f64 {
    2.0 / g as f64
}

/// Slack permitted when validating monotonicity of CDF samples.
pub(crate) const TIE_TOL: f64 = 1e-12;

/// Slack permitted when matching domains and endpoint values.
pub(crate) const ENDPOINT_TOL: f64 = 1e-9;

/// A closed interval `[lo, hi]` with `lo < hi`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Interval {
    pub lo: f64,
    pub hi: f64,
}

impl Interval {
    pub fn new(lo: f64, hi: f64) -> Result<Self> {
        if !(lo.is_finite() && hi.is_finite() && lo < hi) {
            return Err(Error::InvalidInterval { lo, hi });
        }
        Ok(Self { lo, hi })
    }

    /// The canonical unit interval `[0, 1]`.
    pub fn unit() -> Self {
        Self { lo: 0.0, hi: 1.0 }
    }

    pub fn width(&self) -> f64 {
        self.hi - self.lo
    }

    pub fn contains(&self, x: f64) -> bool {
        x >= self.lo && x <= self.hi
    }

    pub fn clamp(&self, x: f64) -> f64 {
        x.clamp(self.lo, self.hi)
    }

    /// `g` equally spaced abscissae from `lo` to `hi` inclusive.
    pub fn uniform_grid(&self, g: usize) -> Vec<f64> {
        assert!(g >= 2, "grid must have at least two abscissae");
        let step = self.width() / (g - 1) as f64;
        let mut grid: Vec<f64> = (0..g).map(|i| self.lo + i as f64 * step).collect();
        grid[g - 1] = self.hi;
        grid
    }

    pub fn approx_eq(&self, other: &Interval) -> bool {
        let scale = self.width().max(1.0);
        (self.lo - other.lo).abs() <= ENDPOINT_TOL * scale
            && (self.hi - other.hi).abs() <= ENDPOINT_TOL * scale
    }

    /// The unique increasing affine bijection onto `to`.
    pub fn affine_to(&self, to: &Interval) -> impl Fn(f64) -> f64 {
        let (a_lo, scale) = (self.lo, to.width() / self.width());
        let b_lo = to.lo;
        move |x: f64| b_lo + (x - a_lo) * scale
    }
}

impl std::fmt::Display for Interval {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "[{}, {}]", self.lo, self.hi)
    }
}

fn check_domain(expected: Interval, found: Interval) -> Result<()> {
    if expected.approx_eq(&found) {
        Ok(())
    } else {
        Err(Error::DomainMismatch { expected, found })
    }
}

/// A finite sorted multiset of event locations on a closed interval.
#[derive(Clone, Debug, PartialEq)]
pub struct PointPattern {
    domain: Interval,
    points: Vec<f64>,
}

impl PointPattern {
    /// Builds a pattern, sorting the points. Points may repeat; every point
    /// must lie in the domain (up to a tiny tolerance, inside which it is
    /// clamped).
    pub fn new(domain: Interval, mut points: Vec<f64>) -> Result<Self> {
        let slack = ENDPOINT_TOL * domain.width().max(1.0);
        for p in &mut points {
            if !p.is_finite() || *p < domain.lo - slack || *p > domain.hi + slack {
                return Err(Error::PointOutsideDomain { point: *p, domain });
            }
            *p = domain.clamp(*p);
        }
        points.sort_by(|a, b| a.partial_cmp(b).expect("points are finite"));
        Ok(Self { domain, points })
    }

    pub fn empty(domain: Interval) -> Self {
        Self { domain, points: Vec::new() }
    }

    pub fn domain(&self) -> Interval {
        self.domain
    }

    pub fn points(&self) -> &[f64] {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }
}

/// A diffuse probability measure represented by a sampled CDF.
#[derive(Clone, Debug, PartialEq)]
pub struct DiffuseMeasure {
    domain: Interval,
    grid: Vec<f64>,
    cdf: Vec<f64>,
}

impl DiffuseMeasure {
    /// Builds a measure from CDF samples on a strictly increasing grid that
    /// spans the domain. The samples must be nondecreasing (up to 1e-12
    /// rounding, which is repaired), start at 0 and end at 1 (up to 1e-9,
    /// which is snapped exactly).
    pub fn from_cdf(domain: Interval, mut grid: Vec<f64>, mut cdf: Vec<f64>) -> Result<Self> {
        if grid.len() < 2 || grid.len() != cdf.len() {
            return Err(Error::InvalidCdf(format!(
                "grid/cdf lengths {}/{} invalid",
                grid.len(),
                cdf.len()
            )));
        }
        let scale = domain.width().max(1.0);
        if (grid[0] - domain.lo).abs() > ENDPOINT_TOL * scale
            || (grid[grid.len() - 1] - domain.hi).abs() > ENDPOINT_TOL * scale
        {
            return Err(Error::InvalidCdf("grid does not span the domain".into()));
        }
        let last = grid.len() - 1;
        grid[0] = domain.lo;
        grid[last] = domain.hi;
        for w in grid.windows(2) {
            if !(w[1] > w[0]) {
                return Err(Error::InvalidCdf("grid is not strictly increasing".into()));
            }
        }
        if cdf.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidCdf("non-finite CDF value".into()));
        }
        if cdf[0].abs() > ENDPOINT_TOL || (cdf[last] - 1.0).abs() > ENDPOINT_TOL {
            return Err(Error::InvalidCdf(format!(
                "CDF endpoints {} / {} not 0 / 1",
                cdf[0], cdf[last]
            )));
        }
        cdf[0] = 0.0;
        cdf[last] = 1.0;
        let mut running = 0.0;
        for v in cdf.iter_mut() {
            if *v < running {
                if running - *v > TIE_TOL {
                    return Err(Error::InvalidCdf("CDF is decreasing".into()));
                }
                *v = running;
            }
            running = *v;
            *v = v.clamp(0.0, 1.0);
        }
        Ok(Self { domain, grid, cdf })
    }

    /// Samples a CDF function on `g` uniform abscissae, then rescales
    /// affinely so the endpoints hit exactly 0 and 1 (this absorbs e.g. the
    /// renormalization of truncated components).
    pub fn from_cdf_fn(domain: Interval, g: usize, f: impl Fn(f64) -> f64) -> Result<Self> {
        let grid = domain.uniform_grid(g);
        let raw: Vec<f64> = grid.iter().map(|&x| f(x)).collect();
        let (f0, f1) = (raw[0], raw[g - 1]);
        if !(f1 > f0) {
            return Err(Error::InvalidCdf("CDF function has no total increase".into()));
        }
        let cdf = raw.iter().map(|v| (v - f0) / (f1 - f0)).collect();
        Self::from_cdf(domain, grid, cdf)
    }

    /// The uniform (Lebesgue) probability measure on the domain.
    pub fn uniform(domain: Interval, g: usize) -> Self {
        let grid = domain.uniform_grid(g);
        let cdf = (0..g).map(|i| i as f64 / (g - 1) as f64).collect();
        Self { domain, grid, cdf }
    }

    /// Builds a measure from samples `(ps, qs)` of its quantile function,
    /// inverting onto a uniform grid of `g` abscissae.
    pub fn from_quantile_samples(
        domain: Interval,
        ps: &[f64],
        qs: &[f64],
        g: usize,
    ) -> Result<Self> {
        if ps.len() != qs.len() || ps.len() < 2 {
            return Err(Error::InvalidCdf("quantile sample lengths invalid".into()));
        }
        let grid = domain.uniform_grid(g);
        let cdf = grid
            .iter()
            .map(|&x| {
                if x < qs[0] {
                    0.0
                } else if x >= qs[qs.len() - 1] {
                    1.0
                } else {
                    invert_monotone(ps, qs, x)
                }
            })
            .collect();
        Self::from_cdf(domain, grid, cdf)
    }

    pub fn domain(&self) -> Interval {
        self.domain
    }

    pub fn grid(&self) -> &[f64] {
        &self.grid
    }

    pub fn cdf_values(&self) -> &[f64] {
        &self.cdf
    }

    /// CDF at `x`; arguments outside the domain clamp to the endpoints.
    pub fn cdf_at(&self, x: f64) -> f64 {
        eval_monotone(&self.grid, &self.cdf, x)
    }

    /// Quantile `inf { y : F(y) >= p }` for `p` in `[0, 1]`.
    pub fn quantile_at(&self, p: f64) -> f64 {
        invert_monotone(&self.grid, &self.cdf, p.clamp(0.0, 1.0))
    }

    /// Quantiles at an ascending sequence of levels, computed with a single
    /// forward sweep instead of repeated binary searches.
    pub(crate) fn quantiles_at_sorted(&self, ps: &[f64]) -> Vec<f64> {
        let mut out = Vec::with_capacity(ps.len());
        let mut j = 0usize;
        let last = self.cdf.len() - 1;
        for &p in ps {
            let p = p.clamp(0.0, 1.0);
            if p <= self.cdf[0] {
                out.push(self.grid[0]);
                continue;
            }
            while j < last && self.cdf[j] < p {
                j += 1;
            }
            // cdf[j-1] < p <= cdf[j]
            let (y0, y1) = (self.cdf[j - 1], self.cdf[j]);
            let (x0, x1) = (self.grid[j - 1], self.grid[j]);
            out.push(x0 + (p - y0) / (y1 - y0) * (x1 - x0));
        }
        out
    }
}

/// The uniform probability measure on the atoms of a nonempty pattern.
#[derive(Clone, Debug, PartialEq)]
pub struct EmpiricalMeasure {
    pattern: PointPattern,
}

impl EmpiricalMeasure {
    pub fn new(pattern: PointPattern) -> Result<Self> {
        if pattern.is_empty() {
            return Err(Error::EmptyPattern);
        }
        Ok(Self { pattern })
    }

    pub fn domain(&self) -> Interval {
        self.pattern.domain()
    }

    pub fn len(&self) -> usize {
        self.pattern.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn points(&self) -> &[f64] {
        self.pattern.points()
    }

    /// Empirical CDF `#(points <= x) / m`.
    pub fn cdf_at(&self, x: f64) -> f64 {
        let pts = self.pattern.points();
        let count = pts.partition_point(|&p| p <= x);
        count as f64 / pts.len() as f64
    }

    /// Step quantile: the `ceil(p m)`-th order statistic.
    pub fn quantile_at(&self, p: f64) -> f64 {
        let pts = self.pattern.points();
        let m = pts.len();
        if p <= 0.0 {
            return pts[0];
        }
        let k = (p * m as f64).ceil() as usize;
        pts[k.clamp(1, m) - 1]
    }
}

/// Common evaluation surface for diffuse and empirical measures, as needed
/// by the transport routines.
pub trait Measure1d {
    fn domain(&self) -> Interval;
    fn cdf_at(&self, x: f64) -> f64;
    fn quantile_at(&self, p: f64) -> f64;
    /// Probability levels at which the quantile function may kink or jump.
    /// Between consecutive levels the quantile is affine in `p`.
    fn quantile_breakpoints(&self) -> Vec<f64>;
}

impl Measure1d for DiffuseMeasure {
    fn domain(&self) -> Interval {
        self.domain
    }

    fn cdf_at(&self, x: f64) -> f64 {
        DiffuseMeasure::cdf_at(self, x)
    }

    fn quantile_at(&self, p: f64) -> f64 {
        DiffuseMeasure::quantile_at(self, p)
    }

    fn quantile_breakpoints(&self) -> Vec<f64> {
        let mut bp = self.cdf.clone();
        bp.dedup();
        bp
    }
}

impl Measure1d for EmpiricalMeasure {
    fn domain(&self) -> Interval {
        self.pattern.domain()
    }

    fn cdf_at(&self, x: f64) -> f64 {
        EmpiricalMeasure::cdf_at(self, x)
    }

    fn quantile_at(&self, p: f64) -> f64 {
        EmpiricalMeasure::quantile_at(self, p)
    }

    fn quantile_breakpoints(&self) -> Vec<f64> {
        let m = self.len();
        (0..=m).map(|k| k as f64 / m as f64).collect()
    }
}

pub(crate) fn common_domain_of<M: Measure1d, N: Measure1d>(a: &M, b: &N) -> Result<Interval> {
    check_domain(a.domain(), b.domain())?;
    Ok(a.domain())
}

/// Image under the unique increasing affine bijection between two intervals.
pub trait RescaleAffine: Sized {
    fn rescale_affine(&self, from: Interval, to: Interval) -> Result<Self>;
}

impl RescaleAffine for PointPattern {
    fn rescale_affine(&self, from: Interval, to: Interval) -> Result<Self> {
        check_domain(from, self.domain)?;
        let map = from.affine_to(&to);
        let points = self.points.iter().map(|&x| to.clamp(map(x))).collect();
        Ok(Self { domain: to, points })
    }
}

impl RescaleAffine for DiffuseMeasure {
    fn rescale_affine(&self, from: Interval, to: Interval) -> Result<Self> {
        check_domain(from, self.domain)?;
        let map = from.affine_to(&to);
        let mut grid: Vec<f64> = self.grid.iter().map(|&x| map(x)).collect();
        let last = grid.len() - 1;
        grid[0] = to.lo;
        grid[last] = to.hi;
        Ok(Self { domain: to, grid, cdf: self.cdf.clone() })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn triangular_cdf_unit_height(t: f64) -> f64 {
        // CDF of the symmetric triangular density on [-1, 1]
        if t <= -1.0 {
            0.0
        } else if t <= 0.0 {
            0.5 * (t + 1.0) * (t + 1.0)
        } else if t <= 1.0 {
            1.0 - 0.5 * (1.0 - t) * (1.0 - t)
        } else {
            1.0
        }
    }

    #[test]
    fn interval_rejects_degenerate() {
        assert!(Interval::new(1.0, 1.0).is_err());
        assert!(Interval::new(2.0, 1.0).is_err());
        assert!(Interval::new(f64::NAN, 1.0).is_err());
    }

    #[test]
    fn uniform_cdf_is_identity() {
        let mu = DiffuseMeasure::uniform(Interval::unit(), 101);
        assert!((mu.cdf_at(0.5) - 0.5).abs() < 1e-15);
        assert_eq!(mu.cdf_at(1.0), 1.0);
        assert_eq!(mu.cdf_at(2.0), 1.0);
        assert!((mu.quantile_at(0.25) - 0.25).abs() < 1e-15);
    }

    #[test]
    fn triangular_cdf_examples() {
        let domain = Interval::new(-3.0, 3.0).unwrap();
        let mu = DiffuseMeasure::from_cdf_fn(domain, 4097, triangular_cdf_unit_height).unwrap();
        assert!((mu.cdf_at(0.0) - 0.5).abs() < 1e-12);
        // solve (1/2)(t+1)^2 = 0.125 analytically: t = -0.5
        assert!((mu.quantile_at(0.125) - (-0.5)).abs() < 1e-3);
    }

    #[test]
    fn quantile_flat_segments_return_left_endpoint() {
        let domain = Interval::new(-3.0, 3.0).unwrap();
        let mu = DiffuseMeasure::from_cdf_fn(domain, 4097, triangular_cdf_unit_height).unwrap();
        // support ends at 1; all mass is attained there (up to one grid step)
        let step = domain.width() / 4096.0;
        assert!(mu.quantile_at(1.0) <= 1.0 + step);
        assert!(mu.quantile_at(0.0) >= -3.0);
        assert!(mu.quantile_at(0.0) <= -1.0 + step);
    }

    #[test]
    fn cdf_quantile_inverse_pair() {
        let mu = DiffuseMeasure::from_cdf_fn(Interval::unit(), DEFAULT_GRID, |x| x * x).unwrap();
        for i in 0..=100 {
            let x = i as f64 / 100.0;
            let back = mu.quantile_at(mu.cdf_at(x));
            assert!((back - x).abs() < 1e-9, "x={x} back={back}");
        }
    }

    #[test]
    fn empirical_cdf_examples() {
        let d = Interval::unit();
        let e = EmpiricalMeasure::new(PointPattern::new(d, vec![0.2, 0.8]).unwrap()).unwrap();
        assert_eq!(e.cdf_at(0.5), 0.5);
        assert_eq!(e.cdf_at(0.1), 0.0);
        let e2 =
            EmpiricalMeasure::new(PointPattern::new(d, vec![0.1, 0.1, 0.9]).unwrap()).unwrap();
        assert!((e2.cdf_at(0.1) - 2.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn empirical_rejects_empty() {
        assert!(EmpiricalMeasure::new(PointPattern::empty(Interval::unit())).is_err());
    }

    #[test]
    fn empirical_quantile_steps() {
        let d = Interval::unit();
        let e =
            EmpiricalMeasure::new(PointPattern::new(d, vec![0.1, 0.5, 0.9]).unwrap()).unwrap();
        assert_eq!(e.quantile_at(0.0), 0.1);
        assert_eq!(e.quantile_at(1.0 / 3.0), 0.1);
        assert_eq!(e.quantile_at(0.34), 0.5);
        assert_eq!(e.quantile_at(1.0), 0.9);
    }

    #[test]
    fn rescale_identity_and_point() {
        let from = Interval::new(-16.0, 16.0).unwrap();
        let pat = PointPattern::new(from, vec![0.0]).unwrap();
        let same = pat.rescale_affine(from, from).unwrap();
        assert_eq!(same.points(), pat.points());
        let unit = pat.rescale_affine(from, Interval::unit()).unwrap();
        assert!((unit.points()[0] - 0.5).abs() < 1e-15);
    }

    #[test]
    fn rescale_round_trip_is_exact() {
        let a = Interval::new(-16.0, 16.0).unwrap();
        let b = Interval::unit();
        let pat = PointPattern::new(a, vec![-12.5, -3.0, 0.25, 7.0, 15.9]).unwrap();
        let back = pat.rescale_affine(a, b).unwrap().rescale_affine(b, a).unwrap();
        for (x, y) in pat.points().iter().zip(back.points()) {
            assert!((x - y).abs() <= 1e-12);
        }
        let mu = DiffuseMeasure::from_cdf_fn(a, 257, |x| (x + 16.0) / 32.0).unwrap();
        let back = mu.rescale_affine(a, b).unwrap().rescale_affine(b, a).unwrap();
        for (x, y) in mu.grid().iter().zip(back.grid()) {
            assert!((x - y).abs() <= 1e-12);
        }
    }

    #[test]
    fn rescale_rejects_wrong_source() {
        let a = Interval::new(-16.0, 16.0).unwrap();
        let pat = PointPattern::new(Interval::unit(), vec![0.5]).unwrap();
        assert!(pat.rescale_affine(a, Interval::unit()).is_err());
    }

    #[test]
    fn pattern_rejects_outside_point() {
        assert!(PointPattern::new(Interval::unit(), vec![1.5]).is_err());
    }

    #[test]
    fn pattern_keeps_duplicates() {
        let pat = PointPattern::new(Interval::unit(), vec![0.3, 0.3, 0.3]).unwrap();
        assert_eq!(pat.len(), 3);
    }

    #[test]
    fn from_quantile_samples_round_trip() {
        let mu = DiffuseMeasure::from_cdf_fn(Interval::unit(), 513, |x| x * x).unwrap();
        let ps: Vec<f64> = (0..513).map(|i| i as f64 / 512.0).collect();
        let qs: Vec<f64> = ps.iter().map(|&p| mu.quantile_at(p)).collect();
        let rebuilt =
            DiffuseMeasure::from_quantile_samples(Interval::unit(), &ps, &qs, 513).unwrap();
        for i in 0..=64 {
            let x = i as f64 / 64.0;
            assert!((rebuilt.cdf_at(x) - mu.cdf_at(x)).abs() < 2e-3);
        }
    }
}

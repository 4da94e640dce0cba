//! Closed-form one-dimensional optimal transport.
//!
//! On the line, the squared 2-Wasserstein distance between probability
//! measures is the squared L2 distance of their quantile functions, the
//! optimal (Monge) map between diffuse measures is the composition of one
//! quantile function with the other CDF, and geodesics are push-forwards
//! under convex combinations of the optimal map with the identity.
//!
//! All quantile-domain integrals run over a merged breakpoint grid on which
//! every quantile function involved is affine; a two-node Gauss-Legendre
//! rule per subinterval then integrates the piecewise-quadratic integrand
//! exactly (up to rounding), which in particular reproduces the sorted
//! matching value on empirical pairs.

use crate::error::{Error, Result};
use crate::interp::{eval_monotone, invert_monotone};
use crate::measure::{
    common_domain_of, DiffuseMeasure, EmpiricalMeasure, Interval, Measure1d,
    PointPattern, RescaleAffine,
};

/// A monotone nondecreasing map of an interval into itself, sampled on a
/// strictly increasing grid. The `onto` flag records whether the values
/// span the whole domain.
#[derive(Clone, Debug, PartialEq)]
pub struct WarpMap {
    domain: Interval,
    grid: Vec<f64>,
    values: Vec<f64>,
    onto: bool,
}

impl WarpMap {
    /// Builds a warp map from samples. The grid must be strictly increasing
    /// and span the domain; values must be nondecreasing (up to 1e-12
    /// rounding, which is repaired) and are clamped into the domain.
    pub fn from_samples(domain: Interval, mut grid: Vec<f64>, mut values: Vec<f64>) -> Result<Self> {
        if grid.len() < 2 || grid.len() != values.len() {
            return Err(Error::InvalidParameter(format!(
                "warp grid/value lengths {}/{} invalid",
                grid.len(),
                values.len()
            )));
        }
        let scale = domain.width().max(1.0);
        if (grid[0] - domain.lo).abs() > 1e-9 * scale
            || (grid[grid.len() - 1] - domain.hi).abs() > 1e-9 * scale
        {
            return Err(Error::InvalidParameter("warp grid does not span the domain".into()));
        }
        let last = grid.len() - 1;
        grid[0] = domain.lo;
        grid[last] = domain.hi;
        for w in grid.windows(2) {
            if !(w[1] > w[0]) {
                return Err(Error::InvalidParameter("warp grid is not strictly increasing".into()));
            }
        }
        let mut running = f64::NEG_INFINITY;
        for v in values.iter_mut() {
            if !v.is_finite() {
                return Err(Error::InvalidParameter("non-finite warp value".into()));
            }
            if *v < running {
                if running - *v > 1e-12 * scale {
                    return Err(Error::InvalidParameter("warp values are decreasing".into()));
                }
                *v = running;
            }
            running = *v;
            *v = domain.clamp(*v);
        }
        // snap endpoints that are within tolerance of the domain ends
        if (values[0] - domain.lo).abs() <= 1e-9 * scale {
            values[0] = domain.lo;
        }
        if (values[last] - domain.hi).abs() <= 1e-9 * scale {
            values[last] = domain.hi;
        }
        let onto = values[0] == domain.lo && values[last] == domain.hi;
        Ok(Self { domain, grid, values, onto })
    }

    /// Samples a function on `g` uniform abscissae.
    pub fn from_fn(domain: Interval, g: usize, f: impl Fn(f64) -> f64) -> Result<Self> {
        let grid = domain.uniform_grid(g);
        let values = grid.iter().map(|&x| f(x)).collect();
        Self::from_samples(domain, grid, values)
    }

    pub fn identity(domain: Interval, g: usize) -> Self {
        let grid = domain.uniform_grid(g);
        let values = grid.clone();
        Self { domain, grid, values, onto: true }
    }

    pub fn domain(&self) -> Interval {
        self.domain
    }

    pub fn grid(&self) -> &[f64] {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn is_onto(&self) -> bool {
        self.onto
    }

    /// Evaluates the map by linear interpolation between grid nodes.
    pub fn apply(&self, x: f64) -> f64 {
        eval_monotone(&self.grid, &self.values, x)
    }

    /// Generalized inverse `inf { x : T(x) >= y }`, clamped to the domain.
    pub fn inverse_at(&self, y: f64) -> f64 {
        if y > self.values[self.values.len() - 1] {
            return self.domain.hi;
        }
        invert_monotone(&self.grid, &self.values, y)
    }

    /// The inverse warp, obtained by swapping grid and values. Flat value
    /// runs collapse to their left endpoint (the infimum convention) and the
    /// swapped grid is extended to span the domain, so the representation of
    /// the inverse of a piecewise-linear map stays exact.
    pub fn invert(&self) -> WarpMap {
        let mut grid = Vec::with_capacity(self.values.len() + 2);
        let mut values = Vec::with_capacity(self.values.len() + 2);
        if self.values[0] > self.domain.lo {
            grid.push(self.domain.lo);
            values.push(self.domain.lo);
        }
        for (i, &v) in self.values.iter().enumerate() {
            // keep the first occurrence of each value (left endpoint of flats)
            if grid.last().map_or(true, |&g| v > g) {
                grid.push(v);
                values.push(self.grid[i]);
            }
        }
        let last_v = self.values[self.values.len() - 1];
        if last_v < self.domain.hi {
            grid.push(self.domain.hi);
            values.push(self.domain.hi);
        } else if let Some(last) = values.last_mut() {
            // inverse of the top value is where it is first attained; the
            // map is onto, so the inverse still ends at the domain top
            if grid.len() == 1 {
                *last = self.domain.hi;
            }
        }
        if grid.len() < 2 {
            // constant map: inverse degenerates to a jump, represent as
            // the steepest admissible piecewise-linear ramp
            return WarpMap::identity(self.domain, 2);
        }
        let onto = values[0] == self.domain.lo && values[values.len() - 1] == self.domain.hi;
        WarpMap { domain: self.domain, grid, values, onto }
    }
}

impl RescaleAffine for WarpMap {
    /// Conjugation by the affine bijection `a`: the rescaled warp is
    /// `a o T o a^{-1}`, e.g. `g(x) -> 32 g((x+16)/32) - 16`.
    fn rescale_affine(&self, from: Interval, to: Interval) -> Result<Self> {
        if !from.approx_eq(&self.domain) {
            return Err(Error::DomainMismatch { expected: from, found: self.domain });
        }
        let map = from.affine_to(&to);
        let mut grid: Vec<f64> = self.grid.iter().map(|&x| map(x)).collect();
        let last = grid.len() - 1;
        grid[0] = to.lo;
        grid[last] = to.hi;
        let values = self.values.iter().map(|&v| to.clamp(map(v))).collect();
        Ok(Self { domain: to, grid, values, onto: self.onto })
    }
}

/// Number of uniform probability levels added to every merged quantile grid.
const QUAD_REFINEMENT: usize = 4096;

fn merged_levels<M: Measure1d, N: Measure1d>(a: &M, b: &N) -> Vec<f64> {
    let mut ps = a.quantile_breakpoints();
    ps.extend(b.quantile_breakpoints());
    ps.extend((0..=QUAD_REFINEMENT).map(|i| i as f64 / QUAD_REFINEMENT as f64));
    ps.retain(|p| p.is_finite());
    ps.iter_mut().for_each(|p| *p = p.clamp(0.0, 1.0));
    ps.sort_by(|x, y| x.partial_cmp(y).unwrap());
    ps.dedup();
    ps
}

const INV_SQRT3: f64 = 0.577_350_269_189_625_8;

/// Integrates `f` over `[0, 1]` with a two-node Gauss-Legendre rule on each
/// cell of `levels`; exact whenever `f` is piecewise quadratic on the cells.
fn integrate_cells(levels: &[f64], mut f: impl FnMut(f64) -> f64) -> f64 {
    let mut total = 0.0;
    for w in levels.windows(2) {
        let h = w[1] - w[0];
        if h <= 1e-15 {
            continue;
        }
        let mid = 0.5 * (w[0] + w[1]);
        let off = 0.5 * h * INV_SQRT3;
        total += 0.5 * h * (f(mid - off) + f(mid + off));
    }
    total
}

/// The L2-Wasserstein distance, computed as the L2 distance of quantile
/// functions.
pub fn wasserstein2<M: Measure1d, N: Measure1d>(a: &M, b: &N) -> Result<f64> {
    common_domain_of(a, b)?;
    let levels = merged_levels(a, b);
    let total = integrate_cells(&levels, |p| {
        let d = a.quantile_at(p) - b.quantile_at(p);
        d * d
    });
    Ok(total.max(0.0).sqrt())
}

/// Exact 2-Wasserstein distance between equal-size empirical measures by
/// matching order statistics; serves as an independent oracle for
/// [`wasserstein2`].
pub fn wasserstein2_empirical_oracle(a: &EmpiricalMeasure, b: &EmpiricalMeasure) -> Result<f64> {
    common_domain_of(a, b)?;
    if a.len() != b.len() {
        return Err(Error::CountMismatch { left: a.len(), right: b.len() });
    }
    let m = a.len() as f64;
    let total: f64 = a
        .points()
        .iter()
        .zip(b.points())
        .map(|(x, y)| (x - y) * (x - y))
        .sum();
    Ok((total / m).sqrt())
}

/// The 1-Wasserstein distance `int |F_a - F_b|`, evaluated in the quantile
/// domain with exact handling of sign changes within each affine cell.
pub fn wasserstein1<M: Measure1d, N: Measure1d>(a: &M, b: &N) -> Result<f64> {
    common_domain_of(a, b)?;
    let levels = merged_levels(a, b);
    let mut total = 0.0;
    for w in levels.windows(2) {
        let h = w[1] - w[0];
        if h <= 1e-15 {
            continue;
        }
        let mid = 0.5 * (w[0] + w[1]);
        let off = 0.5 * h * INV_SQRT3;
        let (p1, p2) = (mid - off, mid + off);
        let d1 = a.quantile_at(p1) - b.quantile_at(p1);
        let d2 = a.quantile_at(p2) - b.quantile_at(p2);
        // extend the affine difference to the cell endpoints
        let slope = (d2 - d1) / (p2 - p1);
        let e1 = d1 + slope * (w[0] - p1);
        let e2 = d1 + slope * (w[1] - p1);
        total += if e1 * e2 >= 0.0 {
            0.5 * h * (e1.abs() + e2.abs())
        } else {
            0.5 * h * (e1 * e1 + e2 * e2) / (e1.abs() + e2.abs())
        };
    }
    Ok(total)
}

/// The optimal transport map from `mu` to `nu`: the quantile function of
/// `nu` composed with the CDF of `mu`, sampled on the grid of `mu`.
pub fn optimal_map(mu: &DiffuseMeasure, nu: &DiffuseMeasure) -> Result<WarpMap> {
    let domain = common_domain_of(mu, nu)?;
    let grid = mu.grid().to_vec();
    let values = grid.iter().map(|&x| nu.quantile_at(mu.cdf_at(x))).collect();
    WarpMap::from_samples(domain, grid, values)
}

/// Push-forward of a point pattern: pointwise application of the map.
pub fn push_forward_pattern(pattern: &PointPattern, map: &WarpMap) -> Result<PointPattern> {
    if !pattern.domain().approx_eq(&map.domain()) {
        return Err(Error::DomainMismatch { expected: map.domain(), found: pattern.domain() });
    }
    let points = pattern.points().iter().map(|&x| map.apply(x)).collect();
    PointPattern::new(map.domain(), points)
}

/// Push-forward of a diffuse measure: `F_result = F o T^{-1}`.
pub fn push_forward_measure(mu: &DiffuseMeasure, map: &WarpMap) -> Result<DiffuseMeasure> {
    if !mu.domain().approx_eq(&map.domain()) {
        return Err(Error::DomainMismatch { expected: map.domain(), found: mu.domain() });
    }
    let domain = mu.domain();
    let grid = domain.uniform_grid(mu.grid().len());
    let cdf = grid.iter().map(|&x| mu.cdf_at(map.inverse_at(x))).collect();
    DiffuseMeasure::from_cdf(domain, grid, cdf)
}

/// The constant-speed Wasserstein geodesic `[(1-t) id + t T]_# mu` from
/// `mu` (t = 0) to `nu` (t = 1).
pub fn geodesic(mu: &DiffuseMeasure, nu: &DiffuseMeasure, t: f64) -> Result<DiffuseMeasure> {
    if !(0.0..=1.0).contains(&t) {
        return Err(Error::InvalidParameter(format!("geodesic parameter {t} outside [0,1]")));
    }
    let map = optimal_map(mu, nu)?;
    let grid = map.grid().to_vec();
    let values = grid
        .iter()
        .zip(map.values())
        .map(|(&x, &tx)| (1.0 - t) * x + t * tx)
        .collect();
    let mixed = WarpMap::from_samples(map.domain(), grid, values)?;
    push_forward_measure(mu, &mixed)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::measure::{grid_tolerance, DEFAULT_GRID};
    use rand::prelude::*;
    use rand_chacha::ChaCha12Rng;

    fn unit() -> Interval {
        Interval::unit()
    }

    fn uniform_on(hi: f64) -> DiffuseMeasure {
        // Uniform[0, hi] viewed as a measure on [0, 1]
        DiffuseMeasure::from_cdf_fn(unit(), DEFAULT_GRID, move |x| (x / hi).min(1.0)).unwrap()
    }

    fn random_diffuse(rng: &mut impl Rng, g: usize) -> DiffuseMeasure {
        let mut cdf = vec![0.0];
        let mut acc = 0.0;
        for _ in 1..g {
            acc += rng.random::<f64>() + 1e-3;
            cdf.push(acc);
        }
        let total = acc;
        let cdf: Vec<f64> = cdf.into_iter().map(|v| v / total).collect();
        DiffuseMeasure::from_cdf(unit(), unit().uniform_grid(g), cdf).unwrap()
    }

    fn random_empirical(rng: &mut impl Rng, m: usize) -> EmpiricalMeasure {
        let pts: Vec<f64> = (0..m).map(|_| rng.random::<f64>()).collect();
        EmpiricalMeasure::new(PointPattern::new(unit(), pts).unwrap()).unwrap()
    }

    #[test]
    fn w2_zero_on_identical() {
        let mu = uniform_on(1.0);
        assert!(wasserstein2(&mu, &mu).unwrap() < 1e-12);
    }

    #[test]
    fn w2_uniform_halving() {
        let mu = uniform_on(1.0);
        let nu = uniform_on(0.5);
        let expect = (1.0_f64 / 12.0).sqrt();
        assert!((wasserstein2(&mu, &nu).unwrap() - expect).abs() < 1e-6);
    }

    #[test]
    fn w2_empirical_pair() {
        let a = EmpiricalMeasure::new(PointPattern::new(unit(), vec![0.1, 0.5]).unwrap()).unwrap();
        let b = EmpiricalMeasure::new(PointPattern::new(unit(), vec![0.3, 0.7]).unwrap()).unwrap();
        assert!((wasserstein2(&a, &b).unwrap() - 0.2).abs() < 1e-12);
    }

    #[test]
    fn oracle_examples() {
        let a = EmpiricalMeasure::new(PointPattern::new(unit(), vec![0.0, 1.0]).unwrap()).unwrap();
        let b = EmpiricalMeasure::new(PointPattern::new(unit(), vec![1.0, 0.0]).unwrap()).unwrap();
        assert_eq!(wasserstein2_empirical_oracle(&a, &b).unwrap(), 0.0);
        assert_eq!(wasserstein2_empirical_oracle(&a, &a).unwrap(), 0.0);
        let c =
            EmpiricalMeasure::new(PointPattern::new(unit(), vec![0.0, 0.5, 1.0]).unwrap()).unwrap();
        let d = EmpiricalMeasure::new(PointPattern::new(unit(), vec![0.1, 0.6, 0.9]).unwrap())
            .unwrap();
        assert!((wasserstein2_empirical_oracle(&c, &d).unwrap() - 0.1).abs() < 1e-12);
        assert!(wasserstein2_empirical_oracle(&a, &c).is_err());
    }

    #[test]
    fn w2_matches_oracle_on_random_pairs() {
        let mut rng = ChaCha12Rng::seed_from_u64(42);
        for _ in 0..50 {
            let m = rng.random_range(1..=50);
            let a = random_empirical(&mut rng, m);
            let b = random_empirical(&mut rng, m);
            let grid = wasserstein2(&a, &b).unwrap();
            let exact = wasserstein2_empirical_oracle(&a, &b).unwrap();
            assert!((grid - exact).abs() <= 1e-8, "grid={grid} exact={exact}");
        }
    }

    #[test]
    fn w1_examples() {
        let mu = uniform_on(1.0);
        let nu = uniform_on(0.5);
        assert!(wasserstein1(&mu, &mu).unwrap() < 1e-12);
        assert!((wasserstein1(&mu, &nu).unwrap() - 0.25).abs() < 1e-6);
    }

    #[test]
    fn w2_squared_below_w1_on_unit_interval() {
        let mut rng = ChaCha12Rng::seed_from_u64(7);
        for _ in 0..100 {
            let a = random_diffuse(&mut rng, 65);
            let b = random_diffuse(&mut rng, 65);
            let w2 = wasserstein2(&a, &b).unwrap();
            let w1 = wasserstein1(&a, &b).unwrap();
            assert!(w2 * w2 <= w1 + 1e-9, "w2^2={} w1={}", w2 * w2, w1);
        }
    }

    #[test]
    fn triangle_inequality() {
        let mut rng = ChaCha12Rng::seed_from_u64(11);
        for _ in 0..100 {
            let a = random_diffuse(&mut rng, 33);
            let b = random_diffuse(&mut rng, 33);
            let c = random_diffuse(&mut rng, 33);
            let ac = wasserstein2(&a, &c).unwrap();
            let ab = wasserstein2(&a, &b).unwrap();
            let bc = wasserstein2(&b, &c).unwrap();
            assert!(ac <= ab + bc + 1e-9);
        }
    }

    #[test]
    fn optimal_map_identity_and_halving() {
        let mu = uniform_on(1.0);
        let id = optimal_map(&mu, &mu).unwrap();
        for (x, v) in id.grid().iter().zip(id.values()) {
            assert!((x - v).abs() < 1e-9);
        }
        let nu = uniform_on(0.5);
        let t = optimal_map(&mu, &nu).unwrap();
        for (x, v) in t.grid().iter().zip(t.values()) {
            assert!((v - x / 2.0).abs() < 1e-6, "x={x} v={v}");
        }
    }

    #[test]
    fn optimal_map_recovers_strictly_increasing_warp() {
        let mu = uniform_on(1.0);
        let warp = WarpMap::from_fn(unit(), DEFAULT_GRID, |x| x * x * 0.4 + 0.6 * x).unwrap();
        let pushed = push_forward_measure(&mu, &warp).unwrap();
        let rec = optimal_map(&mu, &pushed).unwrap();
        let tol = 5.0 * grid_tolerance(DEFAULT_GRID);
        for (x, v) in rec.grid().iter().zip(rec.values()) {
            assert!((v - warp.apply(*x)).abs() <= tol);
        }
    }

    #[test]
    fn optimal_maps_are_mutual_inverses() {
        let mut rng = ChaCha12Rng::seed_from_u64(3);
        let tol = 5.0 * grid_tolerance(513);
        for _ in 0..10 {
            let a = random_diffuse(&mut rng, 513);
            let b = random_diffuse(&mut rng, 513);
            let fwd = optimal_map(&a, &b).unwrap();
            let bwd = optimal_map(&b, &a).unwrap();
            for i in 0..=64 {
                let x = i as f64 / 64.0;
                let err = (bwd.apply(fwd.apply(x)) - x).abs();
                assert!(err <= tol, "err={err}");
            }
        }
    }

    #[test]
    fn push_forward_pattern_examples() {
        let pat = PointPattern::new(unit(), vec![0.2, 0.8]).unwrap();
        let id = WarpMap::identity(unit(), 17);
        assert_eq!(push_forward_pattern(&pat, &id).unwrap().points(), pat.points());
        let half = WarpMap::from_fn(unit(), DEFAULT_GRID, |x| x / 2.0).unwrap();
        assert!(!half.is_onto());
        let moved = push_forward_pattern(&pat, &half).unwrap();
        assert!((moved.points()[0] - 0.1).abs() < 1e-12);
        assert!((moved.points()[1] - 0.4).abs() < 1e-12);
        assert_eq!(moved.len(), pat.len());
    }

    #[test]
    fn push_forward_measure_through_zeta_like_warp() {
        // uniform through a strictly increasing warp has CDF equal to the
        // inverse warp
        let mu = uniform_on(1.0);
        let warp = WarpMap::from_fn(unit(), DEFAULT_GRID, |x| {
            x - (std::f64::consts::PI * x).sin() / std::f64::consts::PI
        })
        .unwrap();
        let pushed = push_forward_measure(&mu, &warp).unwrap();
        for i in 0..=32 {
            let x = i as f64 / 32.0;
            let expect = warp.inverse_at(x);
            assert!((pushed.cdf_at(x) - expect).abs() < 1e-6);
        }
    }

    #[test]
    fn geodesic_endpoints_and_midpoint() {
        let mu = uniform_on(1.0);
        let nu = uniform_on(0.5);
        let tol = grid_tolerance(DEFAULT_GRID);
        assert!(wasserstein2(&geodesic(&mu, &nu, 0.0).unwrap(), &mu).unwrap() <= tol);
        assert!(wasserstein2(&geodesic(&mu, &nu, 1.0).unwrap(), &nu).unwrap() <= tol);
        let mid = geodesic(&mu, &nu, 0.5).unwrap();
        let expect = uniform_on(0.75);
        assert!(wasserstein2(&mid, &expect).unwrap() <= tol);
    }

    #[test]
    fn geodesic_is_constant_speed() {
        let mut rng = ChaCha12Rng::seed_from_u64(19);
        for _ in 0..5 {
            let a = random_diffuse(&mut rng, 257);
            let b = random_diffuse(&mut rng, 257);
            let d = wasserstein2(&a, &b).unwrap();
            for &t in &[0.25, 0.5, 0.75] {
                let mid = geodesic(&a, &b, t).unwrap();
                let dt = wasserstein2(&a, &mid).unwrap();
                assert!((dt - t * d).abs() < 1e-3, "t={t} dt={dt} d={d}");
            }
        }
    }

    #[test]
    fn warp_inversion_is_exact_on_piecewise_linear_maps() {
        let warp = WarpMap::from_fn(unit(), 129, |x| x * x * 0.7 + 0.3 * x).unwrap();
        let inv = warp.invert();
        for i in 0..=200 {
            let x = i as f64 / 200.0;
            let err = (inv.apply(warp.apply(x)) - x).abs();
            assert!(err <= 1e-12, "x={x} err={err}");
        }
    }

    #[test]
    fn warp_inversion_of_non_onto_map_clamps() {
        let half = WarpMap::from_fn(unit(), 65, |x| x / 2.0).unwrap();
        let inv = half.invert();
        assert!((inv.apply(0.25) - 0.5).abs() < 1e-12);
        assert_eq!(inv.apply(0.75), 1.0);
    }

    #[test]
    fn warp_rescale_conjugates() {
        let big = Interval::new(-16.0, 16.0).unwrap();
        let zeta1 = WarpMap::from_fn(unit(), 257, |x| {
            x - (std::f64::consts::PI * x).sin() / std::f64::consts::PI
        })
        .unwrap();
        let scaled = zeta1.rescale_affine(unit(), big).unwrap();
        for i in 0..=16 {
            let x = -16.0 + 2.0 * i as f64;
            let expect = 32.0 * zeta1.apply((x + 16.0) / 32.0) - 16.0;
            assert!((scaled.apply(x) - expect).abs() < 1e-9);
        }
    }

    #[test]
    fn rejects_domain_mismatch() {
        let mu = uniform_on(1.0);
        let other = DiffuseMeasure::uniform(Interval::new(0.0, 2.0).unwrap(), 33);
        assert!(wasserstein2(&mu, &other).is_err());
    }
}

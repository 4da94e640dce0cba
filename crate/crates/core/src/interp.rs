//! Piecewise-linear evaluation and generalized inversion of monotone samples.
//!
//! Both functions operate on a pair of slices `(xs, ys)` of equal length,
//! where `xs` is strictly increasing and `ys` is nondecreasing.

/// Evaluate the piecewise-linear interpolant of `(xs, ys)` at `x`,
/// clamping to the first/last value outside the sampled range.
pub(crate) fn eval_monotone(xs: &[f64], ys: &[f64], x: f64) -> f64 {
    debug_assert_eq!(xs.len(), ys.len());
    if x <= xs[0] {
        return ys[0];
    }
    let last = xs.len() - 1;
    if x >= xs[last] {
        return ys[last];
    }
    // first index with xs[j] >= x; j >= 1 here
    let j = xs.partition_point(|&v| v < x);
    let (x0, x1) = (xs[j - 1], xs[j]);
    let (y0, y1) = (ys[j - 1], ys[j]);
    let t = (x - x0) / (x1 - x0);
    y0 + t * (y1 - y0)
}

/// Generalized inverse `inf { x : f(x) >= y }` of the piecewise-linear
/// interpolant, honoring the infimum convention on flat segments (the left
/// endpoint of a flat run is returned). Queries outside the sampled range
/// clamp to the first/last abscissa.
pub(crate) fn invert_monotone(xs: &[f64], ys: &[f64], y: f64) -> f64 {
    debug_assert_eq!(xs.len(), ys.len());
    if y <= ys[0] {
        return xs[0];
    }
    let last = ys.len() - 1;
    if y > ys[last] {
        return xs[last];
    }
    // first index with ys[j] >= y; ys[j-1] < y <= ys[j] so the segment rises
    let j = ys.partition_point(|&v| v < y);
    debug_assert!(j >= 1);
    let (y0, y1) = (ys[j - 1], ys[j]);
    let (x0, x1) = (xs[j - 1], xs[j]);
    let t = (y - y0) / (y1 - y0);
    x0 + t * (x1 - x0)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn eval_interpolates_and_clamps() {
        let xs = [0.0, 1.0, 2.0];
        let ys = [0.0, 10.0, 10.0];
        assert_eq!(eval_monotone(&xs, &ys, 0.5), 5.0);
        assert_eq!(eval_monotone(&xs, &ys, -3.0), 0.0);
        assert_eq!(eval_monotone(&xs, &ys, 5.0), 10.0);
        assert_eq!(eval_monotone(&xs, &ys, 1.5), 10.0);
    }

    #[test]
    fn invert_honors_inf_convention_on_flats() {
        let xs = [0.0, 1.0, 2.0, 3.0];
        let ys = [0.0, 0.5, 0.5, 1.0];
        // 0.5 is first attained at x = 1, the left end of the flat run
        assert_eq!(invert_monotone(&xs, &ys, 0.5), 1.0);
        assert_eq!(invert_monotone(&xs, &ys, 0.25), 0.5);
        assert_eq!(invert_monotone(&xs, &ys, 0.75), 2.5);
        assert_eq!(invert_monotone(&xs, &ys, 0.0), 0.0);
        assert_eq!(invert_monotone(&xs, &ys, 1.0), 3.0);
    }

    #[test]
    fn eval_and_invert_are_inverse_on_strict_data() {
        let xs: Vec<f64> = (0..=100).map(|i| i as f64 / 100.0).collect();
        let ys: Vec<f64> = xs.iter().map(|x| x * x).collect();
        for i in 0..=50 {
            let p = i as f64 / 50.0;
            let x = invert_monotone(&xs, &ys, p);
            let back = eval_monotone(&xs, &ys, x);
            assert!((back - p).abs() < 1e-12);
        }
    }
}

//! Bound evaluation and curve fitting used to confront simulations with
//! the jump-length results for the modified SPA model.

use thiserror::Error;

use crate::geometry::MetricConfig;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum FitError {
    #[error("need at least {needed} usable points, found {found}")]
    TooFewPoints { needed: usize, found: usize },
    #[error("all x values coincide; slope is undefined")]
    DegenerateX,
}

/// Largest `φ` for which jump lengths `n^{-φ}` are ruled out in scenario A:
/// `A1(1 - A1) / ((A1 + 2)·d)`.
pub fn phi_bound(a1: f64, d: usize) -> f64 {
    a1 * (1.0 - a1) / ((a1 + 2.0) * d as f64)
}

/// Default working exponent: midpoint of `(0, phi_bound)`.
pub fn default_phi(a1: f64, d: usize) -> f64 {
    0.5 * phi_bound(a1, d)
}

/// `1 - A1 / (4A1 + 2)`: the SPA graph has edges longer than `μ·n^{-θ}`
/// for `θ` above this value.
pub fn theta_bound(a1: f64) -> f64 {
    1.0 - a1 / (4.0 * a1 + 2.0)
}

/// Birth time after which new vertices start with a sphere of radius
/// below `λ`: `A2 / (c_p λ^d)`.
pub fn critical_time_m(lambda: f64, a2: f64, metric: &MetricConfig) -> f64 {
    a2 / metric.ball_volume(lambda)
}

/// Critical time of vertex `i`: `(A2 / (i·c_p λ^d))^{1/(1 - A1)}`.
///
/// For `i = 1` this is exactly when the sphere of `v_1` shrinks to radius
/// `λ`; for `i > 1` it lies at or below that time
/// ([`radius_crossing_time`]).
pub fn critical_time_m_i(i: usize, lambda: f64, a1: f64, a2: f64, metric: &MetricConfig) -> f64 {
    (a2 / (i as f64 * metric.ball_volume(lambda))).powf(1.0 / (1.0 - a1))
}

/// Time at which the modified-model sphere of `v_i` has radius exactly
/// `λ`: solves `A2 / (t^{1-A1} i^{A1}) = c_p λ^d`.
pub fn radius_crossing_time(i: usize, lambda: f64, a1: f64, a2: f64, metric: &MetricConfig) -> f64 {
    (a2 / ((i as f64).powf(a1) * metric.ball_volume(lambda))).powf(1.0 / (1.0 - a1))
}

/// Upper bound on the probability that the scenario-A potential infection
/// graph has an edge longer than `λ = n^{-φ}`:
/// `2·(1 - exp(-γ / ((A2/A1)((n/m₁)^{A1} - 1))))·A2·m₁²`.
pub fn long_edge_prob_bound(n: f64, a1: f64, a2: f64, gamma: f64, metric: &MetricConfig, phi: f64) -> f64 {
    let lambda = n.powf(-phi);
    let m1 = critical_time_m_i(1, lambda, a1, a2, metric);
    let expected = (a2 / a1) * ((n / m1).powf(a1) - 1.0);
    2.0 * -(-gamma / expected).exp_m1() * a2 * m1 * m1
}

/// The quantities of the long-edge bound at one network size.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundParams {
    pub n: f64,
    pub phi: f64,
    pub lambda: f64,
    pub m: f64,
    pub m_1: f64,
    pub gamma: f64,
    pub bound: f64,
}

impl BoundParams {
    pub fn evaluate(n: f64, a1: f64, a2: f64, gamma: f64, metric: &MetricConfig, phi: f64) -> Self {
        let lambda = n.powf(-phi);
        Self {
            n,
            phi,
            lambda,
            m: critical_time_m(lambda, a2, metric),
            m_1: critical_time_m_i(1, lambda, a1, a2, metric),
            gamma,
            bound: long_edge_prob_bound(n, a1, a2, gamma, metric, phi),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RegressionResult {
    pub slope: f64,
    pub intercept: f64,
    pub r2: f64,
    /// Points used in the fit.
    pub used: usize,
    /// Points dropped because a coordinate was not positive.
    pub excluded: usize,
}

/// Ordinary least squares of `y` on `x`.
pub fn linear_regression(points: &[(f64, f64)]) -> Result<RegressionResult, FitError> {
    if points.len() < 2 {
        return Err(FitError::TooFewPoints { needed: 2, found: points.len() });
    }
    let len = points.len() as f64;
    let mean_x = points.iter().map(|p| p.0).sum::<f64>() / len;
    let mean_y = points.iter().map(|p| p.1).sum::<f64>() / len;
    let (mut sxx, mut sxy, mut syy) = (0.0, 0.0, 0.0);
    for &(x, y) in points {
        let (dx, dy) = (x - mean_x, y - mean_y);
        sxx += dx * dx;
        sxy += dx * dy;
        syy += dy * dy;
    }
    if sxx == 0.0 {
        return Err(FitError::DegenerateX);
    }
    let slope = sxy / sxx;
    let intercept = mean_y - slope * mean_x;
    let r2 = if syy == 0.0 { 1.0 } else { (sxy * sxy / (sxx * syy)).clamp(0.0, 1.0) };
    Ok(RegressionResult { slope, intercept, r2, used: points.len(), excluded: 0 })
}

/// OLS of `ln y` on `ln x`. Points with a non-positive coordinate (for
/// example zero-length jumps) are dropped and counted.
pub fn loglog_regression(points: &[(f64, f64)]) -> Result<RegressionResult, FitError> {
    let logs: Vec<(f64, f64)> =
        points.iter().filter(|(x, y)| *x > 0.0 && *y > 0.0).map(|(x, y)| (x.ln(), y.ln())).collect();
    if logs.len() < 3 {
        return Err(FitError::TooFewPoints { needed: 3, found: logs.len() });
    }
    let mut fit = linear_regression(&logs)?;
    fit.excluded = points.len() - logs.len();
    Ok(fit)
}

/// How the tail exponent is estimated.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum FitMethod {
    /// OLS on the log-log cumulative curve.
    #[default]
    LeastSquares,
    /// Hill maximum-likelihood estimator on the degrees above `k_min`.
    Hill,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PowerLawFit {
    /// Exponent of the cumulative distribution, `c_k ~ k^{-exponent}`.
    pub exponent: f64,
    pub k_min: f64,
    /// Log-log goodness of fit; `NaN` for the Hill estimator.
    pub r2: f64,
    /// Number of points (distinct degrees, or tail vertices for Hill).
    pub points: usize,
}

/// Minimum number of distinct degrees above `k_min`.
pub const MIN_TAIL_DEGREES: usize = 10;

/// `⌈ln² n⌉`, the degree above which the cumulative distribution is
/// expected to follow the power law.
pub fn degree_threshold(n: usize) -> f64 {
    (n as f64).ln().powi(2).ceil()
}

/// Cumulative in-degree distribution `c_k = #{v : deg(v) > k} / n` at every
/// integer `k` from 0 up to one below the largest degree.
pub fn cumulative_distribution(degrees: &[u32]) -> Vec<(f64, f64)> {
    let Some(&max) = degrees.iter().max() else { return Vec::new() };
    let mut histogram = vec![0usize; max as usize + 1];
    for &k in degrees {
        histogram[k as usize] += 1;
    }
    let n = degrees.len() as f64;
    let mut above = degrees.len();
    let mut points = Vec::with_capacity(max as usize);
    for (k, &count) in histogram.iter().enumerate().take(max as usize) {
        above -= count;
        points.push((k as f64, above as f64 / n));
    }
    points
}

fn distinct_above(degrees: &[u32], k_min: f64) -> usize {
    let mut tail: Vec<u32> = degrees.iter().copied().filter(|&k| k as f64 > k_min).collect();
    tail.sort_unstable();
    tail.dedup();
    tail.len()
}

/// Fits `c_k ~ k^{-exponent}` to cumulative points with `k > k_min`.
pub fn fit_cumulative(points: &[(f64, f64)], k_min: f64) -> Result<PowerLawFit, FitError> {
    let tail: Vec<(f64, f64)> = points.iter().copied().filter(|&(k, c)| k > k_min && c > 0.0).collect();
    if tail.len() < MIN_TAIL_DEGREES {
        return Err(FitError::TooFewPoints { needed: MIN_TAIL_DEGREES, found: tail.len() });
    }
    let fit = loglog_regression(&tail)?;
    Ok(PowerLawFit { exponent: -fit.slope, k_min, r2: fit.r2, points: tail.len() })
}

/// Power-law fit of an in-degree sequence above `k_min`.
pub fn fit_power_law(degrees: &[u32], k_min: f64, method: FitMethod) -> Result<PowerLawFit, FitError> {
    let distinct = distinct_above(degrees, k_min);
    if distinct < MIN_TAIL_DEGREES {
        return Err(FitError::TooFewPoints { needed: MIN_TAIL_DEGREES, found: distinct });
    }
    match method {
        FitMethod::LeastSquares => fit_cumulative(&cumulative_distribution(degrees), k_min),
        FitMethod::Hill => {
            let tail: Vec<f64> = degrees.iter().map(|&k| k as f64).filter(|&k| k > k_min).collect();
            let log_sum: f64 = tail.iter().map(|k| (k / k_min).ln()).sum();
            Ok(PowerLawFit { exponent: tail.len() as f64 / log_sum, k_min, r2: f64::NAN, points: tail.len() })
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::Norm;

    fn line() -> MetricConfig {
        MetricConfig::new(1, Norm::Infinity).unwrap()
    }

    #[test]
    fn phi_bound_examples() {
        assert!((phi_bound(0.5, 1) - 0.1).abs() < 1e-15);
        assert!((phi_bound(0.5, 2) - 0.05).abs() < 1e-15);
        assert!(phi_bound(1e-9, 1) < 1e-9);
        assert!(phi_bound(1.0 - 1e-9, 1) < 1e-9);
        // Maximum where A1² + 4A1 - 2 = 0.
        let peak = -2.0 + 6f64.sqrt();
        for a1 in [peak - 0.05, peak + 0.05] {
            assert!(phi_bound(a1, 1) < phi_bound(peak, 1));
        }
        assert!((default_phi(0.5, 1) - 0.05).abs() < 1e-15);
    }

    #[test]
    fn theta_bound_examples() {
        assert_eq!(theta_bound(0.5), 0.875);
        assert!((theta_bound(1e-12) - 1.0).abs() < 1e-11);
        assert!((theta_bound(1.0 - 1e-12) - 5.0 / 6.0).abs() < 1e-11);
    }

    #[test]
    fn critical_time_examples() {
        assert!((critical_time_m(0.01, 1.0, &line()) - 50.0).abs() < 1e-12);
        let square = MetricConfig::new(2, Norm::Infinity).unwrap();
        assert!((critical_time_m(0.1, 1.0, &square) - 25.0).abs() < 1e-12);
        assert!((critical_time_m(0.01, 2.0, &line()) - 100.0).abs() < 1e-12);

        assert!((critical_time_m_i(4, 0.01, 0.5, 1.0, &line()) - 156.25).abs() < 1e-9);
        let ms: Vec<f64> = (1..50).map(|i| critical_time_m_i(i, 0.01, 0.5, 1.0, &line())).collect();
        assert!(ms.windows(2).all(|w| w[0] > w[1]));
    }

    #[test]
    fn crossing_time_inverts_the_sphere_volume() {
        let metric = line();
        for (i, lambda, a1, a2) in [(1, 0.01, 0.5, 1.0), (4, 0.01, 0.5, 1.0), (7, 0.002, 0.3, 2.0), (30, 1e-4, 0.8, 0.5)]
        {
            let t = radius_crossing_time(i, lambda, a1, a2, &metric);
            let volume = a2 / (t.powf(1.0 - a1) * (i as f64).powf(a1));
            let radius = metric.radius_for_volume(volume);
            assert!(((radius - lambda) / lambda).abs() < 1e-9, "i={i}");
            assert!(critical_time_m_i(i, lambda, a1, a2, &metric) <= t * (1.0 + 1e-12));
        }
        let same = (critical_time_m_i(1, 0.01, 0.5, 1.0, &metric) - radius_crossing_time(1, 0.01, 0.5, 1.0, &metric)).abs();
        assert!(same < 1e-9);
    }

    #[test]
    fn m_is_m1_to_the_one_minus_a1() {
        let mut state = 12345u64;
        let mut next = || {
            state = crate::seeding::mix(state);
            crate::seeding::unit(state)
        };
        for _ in 0..20 {
            let a1 = 0.05 + 0.9 * next();
            let a2 = 0.1 + 3.0 * next();
            let lambda = 1e-4 + 0.4 * next();
            let d = 1 + (next() * 3.0) as usize;
            let metric = MetricConfig::new(d, [Norm::L1, Norm::L2, Norm::Infinity][(next() * 3.0) as usize]).unwrap();
            let m = critical_time_m(lambda, a2, &metric);
            let m1 = critical_time_m_i(1, lambda, a1, a2, &metric);
            assert!(((m1.powf(1.0 - a1) - m) / m).abs() < 1e-9);
        }
    }

    #[test]
    fn long_edge_bound_behaviour() {
        let metric = line();
        let b = |n: f64, gamma: f64| long_edge_prob_bound(n, 0.5, 1.0, gamma, &metric, 0.05);
        assert!(b(1e9, 10.0) < b(1e6, 10.0) && b(1e6, 10.0) < b(1e3, 10.0));
        assert_eq!(b(1e6, 0.0), 0.0);
        assert!(b(1e6, 1.0) < b(1e6, 10.0) && b(1e6, 10.0) < b(1e6, 100.0));
    }

    #[test]
    fn long_edge_bound_vanishes_below_phi_bound() {
        let grid: Vec<f64> = (0..=27).map(|k| 10f64.powf(3.0 + k as f64 / 3.0)).collect();
        for d in 1..=2 {
            let metric = MetricConfig::new(d, Norm::Infinity).unwrap();
            for a1 in [0.3, 0.5, 0.7] {
                for frac in [0.25, 0.5, 0.75] {
                    let phi = frac * phi_bound(a1, d);
                    let values: Vec<f64> =
                        grid.iter().map(|&n| long_edge_prob_bound(n, a1, 1.0, 10.0, &metric, phi)).collect();
                    let tail = &values[values.len() - 6..];
                    assert!(tail.windows(2).all(|w| w[1] < w[0]), "d={d} a1={a1} frac={frac}: {tail:?}");
                    // Asymptotic decay rate n^{-A1 + (2 + A1)φd/(1 - A1)}.
                    let rate = -a1 + (2.0 + a1) * phi * d as f64 / (1.0 - a1);
                    let observed = (values[27] / values[24]).ln() / (grid[27] / grid[24]).ln();
                    assert!(rate < 0.0);
                    assert!((observed - rate).abs() < 0.05, "observed {observed} vs {rate}");
                }
            }
        }
    }

    #[test]
    fn regression_on_exact_power_law() {
        let points: Vec<(f64, f64)> = (1..=20).map(|k| (k as f64, (k as f64).powi(-2))).collect();
        let fit = loglog_regression(&points).unwrap();
        assert!((fit.slope + 2.0).abs() < 1e-12);
        assert!(fit.intercept.abs() < 1e-12);
        assert!((fit.r2 - 1.0).abs() < 1e-12);

        let mut swapped = points.clone();
        swapped.swap(0, 7);
        let other = loglog_regression(&swapped).unwrap();
        assert!((other.slope - fit.slope).abs() < 1e-12 && (other.intercept - fit.intercept).abs() < 1e-12);
    }

    #[test]
    fn regression_drops_non_positive_points() {
        let points = [(1.0, 0.0), (2.0, 4.0), (3.0, 9.0), (4.0, 16.0), (5.0, -1.0)];
        let fit = loglog_regression(&points).unwrap();
        assert_eq!(fit.excluded, 2);
        assert_eq!(fit.used, 3);
        assert!((fit.slope - 2.0).abs() < 1e-12);
        assert!(matches!(loglog_regression(&points[..3]), Err(FitError::TooFewPoints { .. })));
        assert_eq!(loglog_regression(&[(2.0, 1.0), (2.0, 3.0), (2.0, 5.0)]), Err(FitError::DegenerateX));
    }

    #[test]
    fn cumulative_counts_strictly_greater() {
        let points = cumulative_distribution(&[0, 0, 1, 3, 3, 7]);
        let expected = [4.0, 3.0, 3.0, 1.0, 1.0, 1.0, 1.0].iter().enumerate().map(|(k, c)| (k as f64, c / 6.0));
        assert_eq!(points, expected.collect::<Vec<_>>());
        assert!(cumulative_distribution(&[]).is_empty());
        assert!(cumulative_distribution(&[0, 0]).is_empty());
    }

    #[test]
    fn fit_recovers_synthetic_exponents() {
        let exact: Vec<(f64, f64)> = (1..=40).map(|k| (k as f64, (k as f64).powi(-2))).collect();
        let fit = fit_cumulative(&exact, 0.5).unwrap();
        assert!((fit.exponent - 2.0).abs() < 1e-12 && (fit.r2 - 1.0).abs() < 1e-12);

        let scaled: Vec<(f64, f64)> = exact.iter().map(|&(k, c)| (k, 0.01 * c)).collect();
        assert!((fit_cumulative(&scaled, 0.5).unwrap().exponent - fit.exponent).abs() < 1e-12);

        // c_k = (k A1/A2 - 1)^{-1/A1} for k well above A2/A1.
        for (a1, a2) in [(0.5, 1.0), (0.4, 0.5), (0.7, 2.0)] {
            let points: Vec<(f64, f64)> = (0..60)
                .map(|j| 1e4 * 10f64.powf(j as f64 / 30.0))
                .map(|k| (k, (k * a1 / a2 - 1.0).powf(-1.0 / a1)))
                .collect();
            let fit = fit_cumulative(&points, 1.0).unwrap();
            assert!((fit.exponent - 1.0 / a1).abs() < 1e-3, "a1={a1}: {}", fit.exponent);
        }
    }

    #[test]
    fn fit_needs_enough_tail_degrees() {
        let degrees: Vec<u32> = (0..200).map(|k| k % 12).collect();
        assert!(matches!(
            fit_power_law(&degrees, 5.0, FitMethod::LeastSquares),
            Err(FitError::TooFewPoints { needed: 10, .. })
        ));
        assert!(fit_power_law(&degrees, 5.0, FitMethod::Hill).is_err());
    }

    #[test]
    fn hill_estimator_on_pareto_sample() {
        // Deterministic quantiles of a continuous Pareto tail with exponent 2.
        let degrees: Vec<u32> = (1..=20_000).map(|j| (10.0 * (20_001.0 / j as f64).sqrt()).floor() as u32).collect();
        let fit = fit_power_law(&degrees, 20.0, FitMethod::Hill).unwrap();
        assert!((fit.exponent - 2.0).abs() < 0.15, "{}", fit.exponent);
    }

    #[test]
    fn degree_threshold_matches_log_squared() {
        assert_eq!(degree_threshold(100_000), 133.0);
    }
}

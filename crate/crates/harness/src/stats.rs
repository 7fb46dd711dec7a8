//! Small summary statistics used by the suites.

/// Least-squares slope of `ys` against `xs`; `None` for fewer than two
/// distinct abscissae.
pub fn slope(xs: &[f64], ys: &[f64]) -> Option<f64> {
    let n = xs.len().min(ys.len());
    if n < 2 {
        return None;
    }
    let mx = xs[..n].iter().sum::<f64>() / n as f64;
    let my = ys[..n].iter().sum::<f64>() / n as f64;
    let sxx: f64 = xs[..n].iter().map(|x| (x - mx) * (x - mx)).sum();
    if !(sxx > 0.0) {
        return None;
    }
    let sxy: f64 = xs[..n]
        .iter()
        .zip(&ys[..n])
        .map(|(x, y)| (x - mx) * (y - my))
        .sum();
    Some(sxy / sxx)
}

/// Slope of `ln y` against `ln x` over the pairs with `x, y > 0`.
pub fn log_log_slope(xs: &[f64], ys: &[f64]) -> Option<f64> {
    let (lx, ly): (Vec<f64>, Vec<f64>) = xs
        .iter()
        .zip(ys)
        .filter(|(x, y)| **x > 0.0 && **y > 0.0)
        .map(|(x, y)| (x.ln(), y.ln()))
        .unzip();
    slope(&lx, &ly)
}

pub fn max(values: &[f64]) -> f64 {
    values.iter().copied().fold(f64::NEG_INFINITY, f64::max)
}

pub fn min(values: &[f64]) -> f64 {
    values.iter().copied().fold(f64::INFINITY, f64::min)
}

/// `max / min`; infinite when the minimum is zero.
pub fn spread(values: &[f64]) -> f64 {
    let lo = min(values);
    let hi = max(values);
    if lo > 0.0 {
        hi / lo
    } else if hi == 0.0 {
        1.0
    } else {
        f64::INFINITY
    }
}

/// Growth that a scale trend must exceed, end to end, before it is flagged.
pub const TREND_GROWTH: f64 = 1.25;

/// Scale trend of a statistic sampled at several cube scales.
#[derive(Debug, Clone, PartialEq)]
pub struct Trend {
    /// Geometric mean of the statistic per scale, scales ascending.
    pub per_scale: Vec<(f64, f64)>,
    /// Log-log slope of the statistic against the scale.
    pub slope: f64,
    /// Strictly increasing at every scale step and growing by more than
    /// [`TREND_GROWTH`] overall.
    pub monotone_growth: bool,
}

/// Groups `(scale, value)` pairs by scale and tests for monotone growth.
pub fn scale_trend(samples: &[(f64, f64)]) -> Trend {
    let mut scales: Vec<f64> = samples.iter().map(|s| s.0).collect();
    scales.sort_by(f64::total_cmp);
    scales.dedup();
    let per_scale: Vec<(f64, f64)> = scales
        .iter()
        .map(|&r| {
            let logs: Vec<f64> = samples
                .iter()
                .filter(|s| s.0 == r)
                .map(|s| s.1.max(f64::MIN_POSITIVE).ln())
                .collect();
            (r, (logs.iter().sum::<f64>() / logs.len() as f64).exp())
        })
        .collect();
    let (xs, ys): (Vec<f64>, Vec<f64>) = samples.iter().copied().unzip();
    let slope = log_log_slope(&xs, &ys).unwrap_or(0.0);
    let increasing = per_scale.len() >= 2 && per_scale.windows(2).all(|w| w[1].1 > w[0].1);
    let growth = match (per_scale.first(), per_scale.last()) {
        (Some(a), Some(b)) if a.1 > 0.0 => b.1 / a.1,
        _ => 1.0,
    };
    Trend {
        per_scale,
        slope,
        monotone_growth: increasing && growth > TREND_GROWTH,
    }
}

/// Arithmetic mean of the values at each scale, scales ascending.
pub fn scale_means(samples: &[(f64, f64)]) -> Vec<(f64, f64)> {
    let mut scales: Vec<f64> = samples.iter().map(|s| s.0).collect();
    scales.sort_by(f64::total_cmp);
    scales.dedup();
    scales
        .iter()
        .map(|&r| {
            let v: Vec<f64> = samples.iter().filter(|s| s.0 == r).map(|s| s.1).collect();
            (r, v.iter().sum::<f64>() / v.len() as f64)
        })
        .collect()
}

/// Largest `|v - target|`; infinite if any value is NaN.
pub fn worst_deviation(values: &[f64], target: f64) -> f64 {
    values
        .iter()
        .map(|v| (v - target).abs())
        .fold(
            0.0,
            |m: f64, d| if d.is_nan() { f64::INFINITY } else { m.max(d) },
        )
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn slope_of_a_line() {
        let xs = [1.0, 2.0, 3.0, 4.0];
        let ys: Vec<f64> = xs.iter().map(|x| 3.0 - 2.0 * x).collect();
        assert!((slope(&xs, &ys).unwrap() + 2.0).abs() < 1e-12);
        assert!(slope(&[1.0], &[1.0]).is_none());
        assert!(slope(&[1.0, 1.0], &[1.0, 2.0]).is_none());
    }

    #[test]
    fn power_law_slope() {
        let xs: Vec<f64> = (1..10).map(|i| i as f64).collect();
        let ys: Vec<f64> = xs.iter().map(|x| 5.0 * x.powf(-1.5)).collect();
        assert!((log_log_slope(&xs, &ys).unwrap() + 1.5).abs() < 1e-12);
    }

    #[test]
    fn means_per_scale() {
        let m = scale_means(&[(2.0, 1.0), (1.0, 3.0), (2.0, 2.0), (1.0, 5.0)]);
        assert_eq!(m, vec![(1.0, 4.0), (2.0, 1.5)]);
        assert!((worst_deviation(&[-1.4, -1.7], -1.5) - 0.2).abs() < 1e-12);
        assert!(worst_deviation(&[f64::NAN], 0.0).is_infinite());
    }

    #[test]
    fn spread_handles_zero() {
        assert_eq!(spread(&[1.0, 4.0]), 4.0);
        assert_eq!(spread(&[0.0, 0.0]), 1.0);
        assert!(spread(&[0.0, 1.0]).is_infinite());
    }

    #[test]
    fn trend_detection() {
        let growing: Vec<(f64, f64)> = [0.25, 0.5, 1.0, 2.0, 4.0].iter().map(|&r| (r, r)).collect();
        assert!(scale_trend(&growing).monotone_growth);
        let flat: Vec<(f64, f64)> = [0.25, 0.5, 1.0, 2.0, 4.0]
            .iter()
            .map(|&r| (r, 1.0 + 0.01 * r))
            .collect();
        assert!(!scale_trend(&flat).monotone_growth);
        let wobbly = vec![(0.25, 1.0), (0.5, 2.0), (1.0, 1.5), (2.0, 3.0)];
        assert!(!scale_trend(&wobbly).monotone_growth);
    }
}

//! Kernel density estimation with boundary reflection at zero, and
//! Kullback-Leibler divergence by trapezoidal quadrature.

use alloc::vec::Vec;
use core::f64::consts::PI;

use thiserror::Error;

use crate::math;

/// Floor applied to both densities inside the log ratio.
pub const DENSITY_FLOOR: f64 = 1e-12;
pub const DEFAULT_QUADRATURE_POINTS: usize = 512;

/// Beyond this many bandwidths the Gaussian kernel underflows to exactly 0.
const KERNEL_CUTOFF: f64 = 39.0;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum StatsError {
    #[error("need at least {need} samples, got {got}")]
    TooFewSamples { need: usize, got: usize },
    #[error("samples have zero spread; bandwidth would be 0")]
    DegenerateData,
    #[error("sample {0} is negative or not finite")]
    InvalidSample(f64),
    #[error("bandwidth must be positive, got {0}")]
    BadBandwidth(f64),
    #[error("percentile {0} outside [0, 100]")]
    BadPercentile(f64),
    #[error("invalid integration bounds [{lower}, {upper}] with {n_points} points")]
    BadBounds { lower: f64, upper: f64, n_points: usize },
    #[error("density estimates are not evaluated on the integration nodes")]
    SupportMismatch,
}

/// Sample standard deviation with the `n − 1` divisor.
fn sample_sd(data: &[f64]) -> f64 {
    let n = data.len() as f64;
    let mean = data.iter().sum::<f64>() / n;
    let ss: f64 = data.iter().map(|x| (x - mean) * (x - mean)).sum();
    math::sqrt(ss / (n - 1.0))
}

fn sorted_copy(data: &[f64]) -> Vec<f64> {
    let mut v = data.to_vec();
    v.sort_by(f64::total_cmp);
    v
}

fn percentile_sorted(sorted: &[f64], p: f64) -> f64 {
    let pos = p / 100.0 * (sorted.len() - 1) as f64;
    let lo = math::floor(pos) as usize;
    let hi = (lo + 1).min(sorted.len() - 1);
    let frac = pos - lo as f64;
    sorted[lo] + frac * (sorted[hi] - sorted[lo])
}

/// Linear-interpolation percentile; `p = 0` is the minimum, `p = 100` the
/// maximum.
pub fn percentile(data: &[f64], p: f64) -> Result<f64, StatsError> {
    if data.is_empty() {
        return Err(StatsError::TooFewSamples { need: 1, got: 0 });
    }
    if !(0.0..=100.0).contains(&p) {
        return Err(StatsError::BadPercentile(p));
    }
    Ok(percentile_sorted(&sorted_copy(data), p))
}

/// Silverman's reference bandwidth `0.9 · min(σ̂, IQR/1.34) · n^(−1/5)`.
pub fn silverman_bandwidth(data: &[f64]) -> Result<f64, StatsError> {
    if data.len() < 2 {
        return Err(StatsError::TooFewSamples { need: 2, got: data.len() });
    }
    let sorted = sorted_copy(data);
    let iqr = percentile_sorted(&sorted, 75.0) - percentile_sorted(&sorted, 25.0);
    let spread = sample_sd(data).min(iqr / 1.34);
    let h = 0.9 * spread * math::pow(data.len() as f64, -0.2);
    if !(h > 0.0) || !h.is_finite() {
        return Err(StatsError::DegenerateData);
    }
    Ok(h)
}

/// A density evaluated on an ordered set of points.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityEstimate {
    pub support: Vec<f64>,
    pub density: Vec<f64>,
    pub bandwidth: f64,
    pub n_samples: usize,
}

impl DensityEstimate {
    /// Trapezoidal integral over the support.
    pub fn integral(&self) -> f64 {
        trapezoid(&self.support, &self.density)
    }
}

fn trapezoid(x: &[f64], y: &[f64]) -> f64 {
    x.windows(2)
        .zip(y.windows(2))
        .map(|(xs, ys)| 0.5 * (xs[1] - xs[0]) * (ys[0] + ys[1]))
        .sum()
}

#[inline]
fn gaussian(z: f64) -> f64 {
    math::exp(-0.5 * z * z) / math::sqrt(2.0 * PI)
}

/// Σ K((x − xᵢ)/h) over sorted samples, skipping terms that underflow.
fn kernel_sum(sorted: &[f64], x: f64, h: f64) -> f64 {
    let lo = sorted.partition_point(|&s| s < x - KERNEL_CUTOFF * h);
    let hi = sorted.partition_point(|&s| s <= x + KERNEL_CUTOFF * h);
    sorted[lo..hi].iter().map(|&s| gaussian((x - s) / h)).sum()
}

fn check_inputs(data: &[f64], h: f64, non_negative: bool) -> Result<(), StatsError> {
    if data.is_empty() {
        return Err(StatsError::TooFewSamples { need: 1, got: 0 });
    }
    if !(h > 0.0) || !h.is_finite() {
        return Err(StatsError::BadBandwidth(h));
    }
    if let Some(&bad) = data.iter().find(|&&x| !x.is_finite() || (non_negative && x < 0.0)) {
        return Err(StatsError::InvalidSample(bad));
    }
    Ok(())
}

/// Ordinary Gaussian KDE.
pub fn kde_plain(data: &[f64], support: &[f64], h: f64) -> Result<DensityEstimate, StatsError> {
    check_inputs(data, h, false)?;
    let sorted = sorted_copy(data);
    let scale = 1.0 / (data.len() as f64 * h);
    let density = support.iter().map(|&x| scale * kernel_sum(&sorted, x, h)).collect();
    Ok(DensityEstimate { support: support.to_vec(), density, bandwidth: h, n_samples: data.len() })
}

/// Gaussian KDE reflected about zero for non-negative data:
/// `f(x) = 1/(n·h) · Σ [K((x − xᵢ)/h) + K((x + xᵢ)/h)]`, zero for `x < 0`.
///
/// `h` is the bandwidth of the original, unmirrored samples.
pub fn kde_reflected(data: &[f64], support: &[f64], h: f64) -> Result<DensityEstimate, StatsError> {
    check_inputs(data, h, true)?;
    let sorted = sorted_copy(data);
    let mirrored: Vec<f64> = sorted.iter().rev().map(|&x| -x).collect();
    let scale = 1.0 / (data.len() as f64 * h);
    let density = support
        .iter()
        .map(|&x| {
            if x < 0.0 {
                0.0
            } else {
                scale * (kernel_sum(&sorted, x, h) + kernel_sum(&mirrored, x, h))
            }
        })
        .collect();
    Ok(DensityEstimate { support: support.to_vec(), density, bandwidth: h, n_samples: data.len() })
}

/// Uniform quadrature grid for the divergence integral.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IntegrationBounds {
    pub lower: f64,
    pub upper: f64,
    pub n_points: usize,
}

impl IntegrationBounds {
    pub fn new(lower: f64, upper: f64, n_points: usize) -> Result<Self, StatsError> {
        if !(lower < upper) || !lower.is_finite() || !upper.is_finite() || n_points < 2 {
            return Err(StatsError::BadBounds { lower, upper, n_points });
        }
        Ok(Self { lower, upper, n_points })
    }

    /// `[P_lo, P_hi]` percentiles of `data`.
    pub fn from_percentiles(data: &[f64], p_lo: f64, p_hi: f64, n_points: usize) -> Result<Self, StatsError> {
        Self::new(percentile(data, p_lo)?, percentile(data, p_hi)?, n_points)
    }

    pub fn step(&self) -> f64 {
        (self.upper - self.lower) / (self.n_points - 1) as f64
    }

    pub fn nodes(&self) -> Vec<f64> {
        let dx = self.step();
        (0..self.n_points)
            .map(|k| if k + 1 == self.n_points { self.upper } else { self.lower + k as f64 * dx })
            .collect()
    }
}

/// Silverman bandwidth on `data`, then KDE on the bounds' nodes.
pub fn fit_density(data: &[f64], bounds: &IntegrationBounds, reflect: bool) -> Result<DensityEstimate, StatsError> {
    let h = silverman_bandwidth(data)?;
    let nodes = bounds.nodes();
    if reflect {
        kde_reflected(data, &nodes, h)
    } else {
        kde_plain(data, &nodes, h)
    }
}

/// `∫ f log(f/g) dx` over `bounds` by the trapezoid rule.
///
/// Both densities are floored at [`DENSITY_FLOOR`] inside the log and the
/// integrand is 0 wherever `f ≤ DENSITY_FLOOR`, so the result is finite.
pub fn kl_divergence(f: &DensityEstimate, g: &DensityEstimate, bounds: &IntegrationBounds) -> Result<f64, StatsError> {
    let n = bounds.n_points;
    let nodes_match = |d: &DensityEstimate| {
        d.support.len() == n
            && d.density.len() == n
            && d.support[0] == bounds.lower
            && d.support[n - 1] == bounds.upper
    };
    if !nodes_match(f) || !nodes_match(g) || f.support != g.support {
        return Err(StatsError::SupportMismatch);
    }
    let integrand: Vec<f64> = f
        .density
        .iter()
        .zip(&g.density)
        .map(|(&p, &q)| {
            if p <= DENSITY_FLOOR {
                0.0
            } else {
                p * math::log(p.max(DENSITY_FLOOR) / q.max(DENSITY_FLOOR))
            }
        })
        .collect();
    Ok(trapezoid(&f.support, &integrand))
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;
    use approx::assert_abs_diff_eq;

    #[test]
    fn percentile_convention() {
        let d = [3.0, 1.0, 5.0, 2.0, 4.0];
        assert_eq!(percentile(&d, 0.0).unwrap(), 1.0);
        assert_eq!(percentile(&d, 50.0).unwrap(), 3.0);
        assert_eq!(percentile(&d, 100.0).unwrap(), 5.0);
        assert_eq!(percentile(&[10.0, 20.0], 25.0).unwrap(), 12.5);
        assert!(percentile(&[], 50.0).is_err());
        assert!(percentile(&d, 101.0).is_err());
    }

    #[test]
    fn silverman_two_points() {
        // 0.9 · (0.5/1.34) · 2^-0.2, scripts/oracles.py: 0.29234906976362374
        let h = silverman_bandwidth(&[0.0, 1.0]).unwrap();
        assert_abs_diff_eq!(h, 0.2923, epsilon = 1e-3);
        assert_abs_diff_eq!(h, 0.29234906976362374, epsilon = 1e-12);
    }

    #[test]
    fn silverman_errors_and_homogeneity() {
        assert_eq!(silverman_bandwidth(&[1.0]), Err(StatsError::TooFewSamples { need: 2, got: 1 }));
        assert_eq!(silverman_bandwidth(&[2.0; 10]), Err(StatsError::DegenerateData));
        let d = [0.3, 1.7, 2.2, 5.0, 0.1, 3.3, 4.4];
        let scaled: Vec<f64> = d.iter().map(|x| x * 4.0).collect();
        assert_abs_diff_eq!(
            silverman_bandwidth(&scaled).unwrap(),
            4.0 * silverman_bandwidth(&d).unwrap(),
            epsilon = 1e-12
        );
    }

    #[test]
    fn reflected_kde_at_boundary() {
        for h in [0.1, 1.0, 3.0] {
            let f = kde_reflected(&[0.0], &[0.0], h).unwrap();
            assert_abs_diff_eq!(f.density[0], 2.0 / (h * math::sqrt(2.0 * PI)), epsilon = 1e-12);
            assert_abs_diff_eq!(f.density[0] * h, 0.7979, epsilon = 1e-4);
        }
    }

    #[test]
    fn reflection_vanishes_far_from_zero() {
        let data = [50.0, 52.0, 55.0, 61.0];
        let support: Vec<f64> = (0..200).map(|k| k as f64 * 0.5).collect();
        let a = kde_reflected(&data, &support, 1.0).unwrap();
        let b = kde_plain(&data, &support, 1.0).unwrap();
        for (x, y) in a.density.iter().zip(&b.density) {
            assert!((x - y).abs() < 1e-8);
        }
    }

    #[test]
    fn reflected_is_zero_left_of_boundary() {
        let f = kde_reflected(&[0.5, 1.0], &[-1.0, 0.0], 0.5).unwrap();
        assert_eq!(f.density[0], 0.0);
        assert!(f.density[1] > 0.0);
    }

    #[test]
    fn kde_input_errors() {
        assert!(matches!(kde_reflected(&[-1.0, 2.0], &[0.0], 1.0), Err(StatsError::InvalidSample(_))));
        assert!(matches!(kde_reflected(&[1.0], &[0.0], 0.0), Err(StatsError::BadBandwidth(_))));
        assert!(kde_plain(&[-1.0], &[0.0], 1.0).is_ok());
    }

    #[test]
    fn permutation_invariant_bitwise() {
        let a = [0.4, 2.0, 0.9, 3.3, 1.1];
        let b = [3.3, 1.1, 0.4, 0.9, 2.0];
        let s: Vec<f64> = (0..50).map(|k| k as f64 * 0.1).collect();
        assert_eq!(kde_reflected(&a, &s, 0.3).unwrap(), kde_reflected(&b, &s, 0.3).unwrap());
    }

    #[test]
    fn bounds_validation() {
        assert!(IntegrationBounds::new(1.0, 1.0, 10).is_err());
        assert!(IntegrationBounds::new(0.0, 1.0, 1).is_err());
        let b = IntegrationBounds::new(0.0, 1.0, 5).unwrap();
        assert_eq!(b.nodes(), vec![0.0, 0.25, 0.5, 0.75, 1.0]);
    }

    #[test]
    fn kl_of_identical_estimates_is_zero() {
        let data = [0.2, 0.5, 0.7, 1.5, 2.5, 0.1];
        let b = IntegrationBounds::new(0.1, 2.5, 64).unwrap();
        let f = fit_density(&data, &b, true).unwrap();
        assert_eq!(kl_divergence(&f, &f, &b).unwrap(), 0.0);
    }

    #[test]
    fn kl_stays_finite_when_g_vanishes() {
        let b = IntegrationBounds::new(0.0, 10.0, 101).unwrap();
        let nodes = b.nodes();
        let f = kde_reflected(&[9.0, 9.5], &nodes, 0.2).unwrap();
        let g = kde_reflected(&[0.1, 0.2], &nodes, 0.05).unwrap();
        let kl = kl_divergence(&f, &g, &b).unwrap();
        assert!(kl.is_finite() && kl > 10.0);
    }

    #[test]
    fn kl_rejects_mismatched_support() {
        let b = IntegrationBounds::new(0.0, 1.0, 11).unwrap();
        let other = IntegrationBounds::new(0.0, 2.0, 11).unwrap();
        let f = fit_density(&[0.1, 0.5, 0.9], &b, true).unwrap();
        let g = fit_density(&[0.1, 0.5, 0.9], &other, true).unwrap();
        assert_eq!(kl_divergence(&f, &g, &b), Err(StatsError::SupportMismatch));
    }
}

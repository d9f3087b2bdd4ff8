//! Small statistical helpers: normal tail probabilities, Neumaier
//! summation, sample moments and the Kolmogorov–Smirnov distance.

use statrs::distribution::{ContinuousCDF, Normal};
use statrs::function::erf::erfc;

/// Φ(z)
pub fn normal_cdf(z: f64) -> f64 {
    0.5 * erfc(-z / std::f64::consts::SQRT_2)
}

/// 1 − Φ(z), accurate in the upper tail.
pub fn normal_upper_tail(z: f64) -> f64 {
    0.5 * erfc(z / std::f64::consts::SQRT_2)
}

/// t_α with Φ(t_α) = 1 − α.
pub fn upper_critical_value(alpha: f64) -> f64 {
    Normal::standard().inverse_cdf(1.0 - alpha)
}

/// Neumaier's improved Kahan summation.
#[derive(Clone, Copy, Debug, Default)]
pub struct CompensatedSum {
    sum: f64,
    comp: f64,
}

impl CompensatedSum {
    pub fn new() -> Self {
        Self::default()
    }

    #[inline]
    pub fn add(&mut self, v: f64) {
        let t = self.sum + v;
        if self.sum.abs() >= v.abs() {
            self.comp += (self.sum - t) + v;
        } else {
            self.comp += (v - t) + self.sum;
        }
        self.sum = t;
    }

    pub fn value(&self) -> f64 {
        self.sum + self.comp
    }
}

pub fn mean(v: &[f64]) -> f64 {
    v.iter().sum::<f64>() / v.len() as f64
}

pub fn variance(v: &[f64]) -> f64 {
    let m = mean(v);
    v.iter().map(|a| (a - m).powi(2)).sum::<f64>() / (v.len() as f64 - 1.0)
}

/// Non-excess kurtosis m₄ / m₂² (3 for a normal law).
pub fn kurtosis(v: &[f64]) -> f64 {
    let m = mean(v);
    let n = v.len() as f64;
    let m2 = v.iter().map(|a| (a - m).powi(2)).sum::<f64>() / n;
    let m4 = v.iter().map(|a| (a - m).powi(4)).sum::<f64>() / n;
    m4 / (m2 * m2)
}

/// Empirical quantile with linear interpolation between order statistics
/// (type 7).
pub fn quantile(v: &[f64], q: f64) -> f64 {
    let mut s = v.to_vec();
    s.sort_by(f64::total_cmp);
    let pos = q * (s.len() - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    s[lo] + (pos - lo as f64) * (s[hi] - s[lo])
}

pub fn median(v: &[f64]) -> f64 {
    quantile(v, 0.5)
}

/// sup_z |F_n(z) − Φ(z)|
pub fn ks_distance_normal(v: &[f64]) -> f64 {
    let mut s = v.to_vec();
    s.sort_by(f64::total_cmp);
    let n = s.len() as f64;
    s.iter().enumerate().fold(0.0f64, |d, (i, &z)| {
        let f = normal_cdf(z);
        d.max((i as f64 + 1.0) / n - f).max(f - i as f64 / n)
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn normal_tail_values() {
        assert!((normal_cdf(0.0) - 0.5).abs() < 1e-15);
        assert!((upper_critical_value(0.05) - 1.644_853_626_951).abs() < 1e-9);
        assert!((upper_critical_value(0.01) - 2.326_347_874_041).abs() < 1e-9);
        assert!((normal_upper_tail(1.959_963_984_540) - 0.025).abs() < 1e-11);
    }

    #[test]
    fn compensated_sum_recovers_small_terms() {
        let mut c = CompensatedSum::new();
        c.add(1.0);
        for _ in 0..10 {
            c.add(1e-16);
        }
        c.add(-1.0);
        assert!((c.value() - 1e-15).abs() < 1e-30);
    }

    #[test]
    fn moments_and_quantiles() {
        let v: Vec<f64> = (1..=5).map(|i| i as f64).collect();
        assert_eq!(mean(&v), 3.0);
        assert_eq!(variance(&v), 2.5);
        assert_eq!(median(&v), 3.0);
        assert_eq!(quantile(&v, 0.25), 2.0);
        assert!((kurtosis(&v) - 1.7).abs() < 1e-12);
    }

    #[test]
    fn ks_of_single_point_at_zero() {
        assert!((ks_distance_normal(&[0.0]) - 0.5).abs() < 1e-15);
    }
}

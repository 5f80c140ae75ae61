//! Reproducible reductions: pairwise summation with a fixed tree shape and
//! sample statistics built on it.

const LEAF: usize = 8;

/// Pairwise sum. The tree depends only on `values.len()`, so the result is
/// bit-identical for identical inputs regardless of how they were produced.
pub fn pairwise_sum(values: &[f64]) -> f64 {
    if values.len() <= LEAF {
        return values.iter().sum();
    }
    let mid = values.len() / 2;
    pairwise_sum(&values[..mid]) + pairwise_sum(&values[mid..])
}

/// Above this many samples the standard error uses batch means.
pub const BATCH_THRESHOLD: usize = 100_000;
pub const BATCH_SIZE: usize = 1_000;

/// Mean and standard error of a sample.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SampleStats {
    pub mean: f64,
    pub std_error: f64,
    pub count: usize,
    pub batched: bool,
}

impl SampleStats {
    pub fn from_samples(values: &[f64]) -> Self {
        let n = values.len();
        if n == 0 {
            return Self {
                mean: f64::NAN,
                std_error: f64::NAN,
                count: 0,
                batched: false,
            };
        }
        let mean = pairwise_sum(values) / n as f64;
        if n > BATCH_THRESHOLD {
            let batches: Vec<f64> = values
                .chunks(BATCH_SIZE)
                .filter(|c| c.len() == BATCH_SIZE)
                .map(|c| pairwise_sum(c) / BATCH_SIZE as f64)
                .collect();
            let b = batches.len();
            let bmean = pairwise_sum(&batches) / b as f64;
            let dev: Vec<f64> = batches.iter().map(|v| (v - bmean).powi(2)).collect();
            let var = pairwise_sum(&dev) / (b as f64 - 1.0);
            return Self {
                mean,
                std_error: (var / b as f64).sqrt(),
                count: n,
                batched: true,
            };
        }
        let std_error = if n > 1 {
            let dev: Vec<f64> = values.iter().map(|v| (v - mean).powi(2)).collect();
            (pairwise_sum(&dev) / (n as f64 - 1.0) / n as f64).sqrt()
        } else {
            0.0
        };
        Self {
            mean,
            std_error,
            count: n,
            batched: false,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pairwise_matches_exact_integer_sums() {
        let v: Vec<f64> = (1..=1000).map(f64::from).collect();
        assert_eq!(pairwise_sum(&v), 500500.0);
        assert_eq!(pairwise_sum(&[]), 0.0);
    }

    #[test]
    fn constant_sample_has_zero_error() {
        let s = SampleStats::from_samples(&[2.5; 50]);
        assert_eq!(s.mean, 2.5);
        assert_eq!(s.std_error, 0.0);
        let one = SampleStats::from_samples(&[1.0]);
        assert_eq!(one.std_error, 0.0);
    }

    #[test]
    fn standard_error_of_two_points() {
        // var = 2, se = sqrt(2/2) = 1
        let s = SampleStats::from_samples(&[1.0, 3.0]);
        assert_eq!(s.mean, 2.0);
        assert!((s.std_error - 1.0).abs() < 1e-15);
    }

    #[test]
    fn large_samples_switch_to_batch_means() {
        let v: Vec<f64> = (0..200_000).map(|i| (i % 7) as f64).collect();
        let s = SampleStats::from_samples(&v);
        assert!(s.batched);
        assert!(s.std_error.is_finite());
    }
}

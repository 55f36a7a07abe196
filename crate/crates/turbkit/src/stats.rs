use crate::error::{Result, TurbError};

/// One-pass moment accumulator over sample vectors.
///
/// Merging two accumulators is algebraically identical to accumulating the
/// concatenated stream, which is what lets independent realizations be
/// reduced map-style.
#[derive(Debug, Clone, PartialEq)]
pub struct RunningStats {
    label: String,
    count: u64,
    mean: Vec<f64>,
    m2: Vec<f64>,
}

/// Finalized estimate: mean with a stderr that accounts for sample
/// correlation when an autocorrelation time is supplied.
#[derive(Debug, Clone)]
pub struct Summary {
    pub label: String,
    pub count: u64,
    pub count_effective: f64,
    pub mean: Vec<f64>,
    /// None when fewer than two samples were seen.
    pub stderr: Option<Vec<f64>>,
}

impl RunningStats {
    pub fn new(label: impl Into<String>, dim: usize) -> Self {
        RunningStats {
            label: label.into(),
            count: 0,
            mean: vec![0.0; dim],
            m2: vec![0.0; dim],
        }
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn dim(&self) -> usize {
        self.mean.len()
    }

    pub fn count(&self) -> u64 {
        self.count
    }

    pub fn accumulate(&mut self, sample: &[f64]) -> Result<()> {
        if sample.len() != self.mean.len() {
            return Err(TurbError::InvalidConfig(format!(
                "sample dimension {} does not match accumulator {}",
                sample.len(),
                self.mean.len()
            )));
        }
        self.count += 1;
        let n = self.count as f64;
        for i in 0..sample.len() {
            let delta = sample[i] - self.mean[i];
            self.mean[i] += delta / n;
            self.m2[i] += delta * (sample[i] - self.mean[i]);
        }
        Ok(())
    }

    pub fn merge(&mut self, other: &RunningStats) -> Result<()> {
        if other.label != self.label || other.mean.len() != self.mean.len() {
            return Err(TurbError::InvalidConfig(format!(
                "cannot merge accumulator '{}'/{} into '{}'/{}",
                other.label,
                other.mean.len(),
                self.label,
                self.mean.len()
            )));
        }
        if other.count == 0 {
            return Ok(());
        }
        if self.count == 0 {
            self.count = other.count;
            self.mean.copy_from_slice(&other.mean);
            self.m2.copy_from_slice(&other.m2);
            return Ok(());
        }
        let na = self.count as f64;
        let nb = other.count as f64;
        let n = na + nb;
        for i in 0..self.mean.len() {
            let delta = other.mean[i] - self.mean[i];
            self.mean[i] += delta * nb / n;
            self.m2[i] += other.m2[i] + delta * delta * na * nb / n;
        }
        self.count += other.count;
        Ok(())
    }

    pub fn mean(&self) -> &[f64] {
        &self.mean
    }

    /// Sample variance per component; None below two samples.
    pub fn variance(&self) -> Option<Vec<f64>> {
        if self.count < 2 {
            return None;
        }
        let denom = (self.count - 1) as f64;
        Some(self.m2.iter().map(|v| v / denom).collect())
    }

    /// Mean and stderr, with the sample count deflated by `iact` when the
    /// stream is a correlated time series (pass 1.0 for i.i.d. input).
    pub fn finalize(&self, iact: f64) -> Summary {
        let count_effective = self.count as f64 / iact.max(1.0);
        let stderr = self.variance().map(|var| {
            var.iter()
                .map(|v| (v / count_effective).sqrt())
                .collect()
        });
        Summary {
            label: self.label.clone(),
            count: self.count,
            count_effective,
            mean: self.mean.clone(),
            stderr,
        }
    }
}

/// Integrated autocorrelation time of a scalar series by the windowed
/// estimator: tau(W) = 1 + 2 sum_{t<=W} rho(t), with the window grown until
/// W >= 5 tau(W). Returns at least 1; short or constant series give 1.
pub fn integrated_autocorrelation_time(series: &[f64]) -> f64 {
    let n = series.len();
    if n < 8 {
        return 1.0;
    }
    let mean = series.iter().sum::<f64>() / n as f64;
    let c0: f64 = series.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / n as f64;
    if c0 <= 0.0 {
        return 1.0;
    }
    let max_lag = n / 3;
    let mut tau = 1.0;
    let mut w = 1;
    while w <= max_lag {
        let mut c = 0.0;
        for i in 0..n - w {
            c += (series[i] - mean) * (series[i + w] - mean);
        }
        let rho = c / (n as f64 * c0);
        tau += 2.0 * rho;
        if (w as f64) >= 5.0 * tau {
            break;
        }
        w += 1;
    }
    tau.max(1.0)
}

/// Mean, autocorrelation-deflated stderr, and the autocorrelation time of a
/// scalar time series.
pub fn series_mean_stderr(series: &[f64]) -> (f64, f64, f64) {
    let mut acc = RunningStats::new("series", 1);
    for &x in series {
        acc.accumulate(&[x]).unwrap();
    }
    let iact = integrated_autocorrelation_time(series);
    let s = acc.finalize(iact);
    let stderr = s.stderr.map(|v| v[0]).unwrap_or(f64::INFINITY);
    (s.mean[0], stderr, iact)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::Rng;
    use rand::SeedableRng;
    use rand_chacha::ChaCha12Rng;
    use rand_distr::StandardNormal;

    #[test]
    fn single_sample_has_no_variance() {
        let mut s = RunningStats::new("x", 1);
        s.accumulate(&[4.25]).unwrap();
        assert_eq!(s.mean(), &[4.25]);
        assert!(s.variance().is_none());
        assert!(s.finalize(1.0).stderr.is_none());
    }

    #[test]
    fn textbook_values() {
        let mut s = RunningStats::new("x", 1);
        for v in [1.0, 2.0, 3.0] {
            s.accumulate(&[v]).unwrap();
        }
        assert!((s.mean()[0] - 2.0).abs() < 1e-15);
        assert!((s.variance().unwrap()[0] - 1.0).abs() < 1e-15);
    }

    #[test]
    fn dimension_mismatch_is_rejected() {
        let mut s = RunningStats::new("x", 2);
        assert!(s.accumulate(&[1.0]).is_err());
        let other = RunningStats::new("x", 3);
        assert!(s.merge(&other).is_err());
        let relabeled = RunningStats::new("y", 2);
        assert!(s.merge(&relabeled).is_err());
    }

    #[test]
    fn gaussian_moments() {
        let mut rng = ChaCha12Rng::seed_from_u64(12);
        let mut s = RunningStats::new("g", 1);
        let n = 1_000_000;
        for _ in 0..n {
            let x: f64 = rng.sample(StandardNormal);
            s.accumulate(&[x]).unwrap();
        }
        assert!(s.mean()[0].abs() < 4.0 / (n as f64).sqrt());
        let var = s.variance().unwrap()[0];
        assert!((var - 1.0).abs() < 0.01, "variance {var}");
    }

    #[test]
    fn merge_with_empty_is_identity() {
        let mut a = RunningStats::new("x", 1);
        for v in [1.0, 2.0] {
            a.accumulate(&[v]).unwrap();
        }
        let before = a.clone();
        a.merge(&RunningStats::new("x", 1)).unwrap();
        assert_eq!(a, before);

        let mut empty = RunningStats::new("x", 1);
        empty.merge(&before).unwrap();
        assert_eq!(empty, before);
    }

    #[test]
    fn merge_equals_concatenation() {
        let mut a = RunningStats::new("x", 1);
        a.accumulate(&[1.0]).unwrap();
        a.accumulate(&[2.0]).unwrap();
        let mut b = RunningStats::new("x", 1);
        b.accumulate(&[3.0]).unwrap();
        a.merge(&b).unwrap();
        assert!((a.mean()[0] - 2.0).abs() < 1e-15);
        assert!((a.variance().unwrap()[0] - 1.0).abs() < 1e-15);
    }

    #[test]
    fn random_split_matches_sequential() {
        let mut rng = ChaCha12Rng::seed_from_u64(77);
        let samples: Vec<f64> = (0..10_000).map(|_| rng.gen_range(-5.0..5.0)).collect();
        let cut = rng.gen_range(1..9_999);

        let mut seq = RunningStats::new("x", 1);
        for &v in &samples {
            seq.accumulate(&[v]).unwrap();
        }
        let mut left = RunningStats::new("x", 1);
        for &v in &samples[..cut] {
            left.accumulate(&[v]).unwrap();
        }
        let mut right = RunningStats::new("x", 1);
        for &v in &samples[cut..] {
            right.accumulate(&[v]).unwrap();
        }
        left.merge(&right).unwrap();

        let rel = |a: f64, b: f64| (a - b).abs() / b.abs().max(1e-300);
        assert!(rel(left.mean()[0], seq.mean()[0]) < 1e-12);
        assert!(rel(
            left.variance().unwrap()[0],
            seq.variance().unwrap()[0]
        ) < 1e-12);
    }

    #[test]
    fn constant_stream_has_zero_stderr() {
        let mut s = RunningStats::new("c", 1);
        for _ in 0..50 {
            s.accumulate(&[3.0]).unwrap();
        }
        assert_eq!(s.finalize(1.0).stderr.unwrap()[0], 0.0);
    }

    #[test]
    fn iid_stderr_scale() {
        let mut rng = ChaCha12Rng::seed_from_u64(5);
        let mut s = RunningStats::new("g", 1);
        for _ in 0..10_000 {
            let x: f64 = rng.sample(StandardNormal);
            s.accumulate(&[x]).unwrap();
        }
        let se = s.finalize(1.0).stderr.unwrap()[0];
        assert!((se - 0.01).abs() < 0.001, "stderr {se}");
    }

    #[test]
    fn ar1_autocorrelation_time() {
        // x_{t+1} = rho x_t + sqrt(1 - rho^2) xi has IACT (1+rho)/(1-rho)
        let rho: f64 = 0.9;
        let want = (1.0 + rho) / (1.0 - rho);
        let mut rng = ChaCha12Rng::seed_from_u64(31);
        let n = 400_000;
        let mut x = 0.0;
        let scale = (1.0 - rho * rho).sqrt();
        let mut series = Vec::with_capacity(n);
        for _ in 0..n {
            let xi: f64 = rng.sample(StandardNormal);
            x = rho * x + scale * xi;
            series.push(x);
        }
        let iact = integrated_autocorrelation_time(&series);
        assert!(
            (iact - want).abs() < 0.15 * want,
            "IACT {iact} vs analytic {want}"
        );
        let (_, stderr, _) = series_mean_stderr(&series);
        let naive = (1.0 / n as f64).sqrt();
        assert!(
            stderr > 3.0 * naive,
            "correlated stderr {stderr} should exceed naive {naive}"
        );
    }

    #[test]
    fn white_noise_iact_is_near_one() {
        let mut rng = ChaCha12Rng::seed_from_u64(8);
        let series: Vec<f64> = (0..50_000).map(|_| rng.sample::<f64, _>(StandardNormal)).collect();
        let iact = integrated_autocorrelation_time(&series);
        assert!((iact - 1.0).abs() < 0.1, "IACT {iact}");
    }

    proptest! {
        #[test]
        fn merge_is_commutative_and_associative(
            xs in prop::collection::vec(-100.0f64..100.0, 1..40),
            ys in prop::collection::vec(-100.0f64..100.0, 1..40),
            zs in prop::collection::vec(-100.0f64..100.0, 1..40),
        ) {
            let build = |vals: &[f64]| {
                let mut s = RunningStats::new("p", 1);
                for &v in vals {
                    s.accumulate(&[v]).unwrap();
                }
                s
            };
            let (a, b, c) = (build(&xs), build(&ys), build(&zs));

            let mut ab = a.clone();
            ab.merge(&b).unwrap();
            let mut ba = b.clone();
            ba.merge(&a).unwrap();
            prop_assert!((ab.mean()[0] - ba.mean()[0]).abs() < 1e-12 * ab.mean()[0].abs().max(1.0));
            prop_assert!((ab.m2[0] - ba.m2[0]).abs() < 1e-12 * ab.m2[0].abs().max(1.0));

            let mut ab_c = ab.clone();
            ab_c.merge(&c).unwrap();
            let mut bc = b.clone();
            bc.merge(&c).unwrap();
            let mut a_bc = a.clone();
            a_bc.merge(&bc).unwrap();
            prop_assert!((ab_c.mean()[0] - a_bc.mean()[0]).abs() < 1e-12 * ab_c.mean()[0].abs().max(1.0));
            prop_assert!((ab_c.m2[0] - a_bc.m2[0]).abs() < 1e-12 * ab_c.m2[0].abs().max(1.0));
        }

        #[test]
        fn order_does_not_matter(
            mut xs in prop::collection::vec(-50.0f64..50.0, 3..60),
            seed in any::<u64>(),
        ) {
            let mut fwd = RunningStats::new("p", 1);
            for &v in &xs {
                fwd.accumulate(&[v]).unwrap();
            }
            // deterministic shuffle
            let mut rng = ChaCha12Rng::seed_from_u64(seed);
            for i in (1..xs.len()).rev() {
                let j = rng.gen_range(0..=i);
                xs.swap(i, j);
            }
            let mut shuf = RunningStats::new("p", 1);
            for &v in &xs {
                shuf.accumulate(&[v]).unwrap();
            }
            let scale = fwd.variance().unwrap()[0].abs().max(1.0);
            prop_assert!((fwd.mean()[0] - shuf.mean()[0]).abs() < 1e-12 * fwd.mean()[0].abs().max(1.0));
            prop_assert!((fwd.variance().unwrap()[0] - shuf.variance().unwrap()[0]).abs() < 1e-12 * scale);
        }
    }
}

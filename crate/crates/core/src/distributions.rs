//! Lognormal building blocks: correlated asset sampling, two-moment
//! lognormal matching and (shifted) lognormal CDFs.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;

use crate::error::{Result, XosError};
use crate::normal::normal_cdf;
use crate::valuation::AssetScenario;

/// Scenarios drawn from one RNG substream. Results never depend on the
/// number of worker threads, only on `(seed, n)`.
pub const SUBSTREAM_LEN: usize = 16_384;

/// Joint law of `(ln A1, ln A2)`: bivariate normal with the given means and
/// covariance matrix.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BivariateLognormalSpec {
    pub mu1: f64,
    pub mu2: f64,
    pub sig1sq: f64,
    pub sig2sq: f64,
    pub sig12: f64,
}

impl BivariateLognormalSpec {
    pub fn new(mu1: f64, mu2: f64, sig1sq: f64, sig2sq: f64, sig12: f64) -> Result<Self> {
        let finite = [mu1, mu2, sig1sq, sig2sq, sig12].iter().all(|v| v.is_finite());
        if !finite {
            return Err(XosError::InvalidCovariance("parameters must be finite".into()));
        }
        if sig1sq <= 0.0 || sig2sq <= 0.0 {
            return Err(XosError::InvalidCovariance(format!(
                "log-variances must be positive, got ({sig1sq}, {sig2sq})"
            )));
        }
        if sig12 * sig12 > sig1sq * sig2sq * (1.0 + 1e-12) {
            return Err(XosError::InvalidCovariance(format!(
                "covariance {sig12} exceeds sqrt({sig1sq} * {sig2sq})"
            )));
        }
        Ok(Self {
            mu1,
            mu2,
            sig1sq,
            sig2sq,
            sig12,
        })
    }

    /// Independent, identically distributed assets with `E(A_i) = mean` and
    /// log-variance `sigma_sq`, so `mu = ln(mean) - sigma_sq / 2`.
    pub fn iid_with_mean(mean: f64, sigma_sq: f64) -> Result<Self> {
        if !(mean > 0.0) {
            return Err(XosError::InvalidArgument(format!(
                "expected asset value must be positive, got {mean}"
            )));
        }
        let mu = mean.ln() - 0.5 * sigma_sq;
        Self::new(mu, mu, sigma_sq, sigma_sq, 0.0)
    }

    pub fn correlation(&self) -> f64 {
        self.sig12 / (self.sig1sq * self.sig2sq).sqrt()
    }

    /// Marginal law of `A1`.
    pub fn marginal1(&self) -> LognormalSpec {
        LognormalSpec {
            mu: self.mu1,
            sig_sq: self.sig1sq,
            shift: 0.0,
        }
    }

    pub fn marginal2(&self) -> LognormalSpec {
        LognormalSpec {
            mu: self.mu2,
            sig_sq: self.sig2sq,
            shift: 0.0,
        }
    }

    // Cholesky factor of the log covariance: (l11, l21, l22)
    fn cholesky(&self) -> (f64, f64, f64) {
        let l11 = self.sig1sq.sqrt();
        let l21 = self.sig12 / l11;
        let l22 = (self.sig2sq - l21 * l21).max(0.0).sqrt();
        (l11, l21, l22)
    }
}

/// `ln(X - shift) ~ N(mu, sig_sq)`; `shift = 0` is the classical lognormal.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LognormalSpec {
    pub mu: f64,
    pub sig_sq: f64,
    pub shift: f64,
}

impl LognormalSpec {
    pub fn new(mu: f64, sig_sq: f64, shift: f64) -> Result<Self> {
        if !mu.is_finite() || !(sig_sq > 0.0) || !sig_sq.is_finite() {
            return Err(XosError::InvalidArgument(format!(
                "lognormal needs finite mu and positive variance, got ({mu}, {sig_sq})"
            )));
        }
        if !(shift >= 0.0) || !shift.is_finite() {
            return Err(XosError::InvalidArgument(format!("shift must be >= 0, got {shift}")));
        }
        Ok(Self { mu, sig_sq, shift })
    }

    pub fn sigma(&self) -> f64 {
        self.sig_sq.sqrt()
    }

    pub fn mean(&self) -> f64 {
        self.shift + (self.mu + 0.5 * self.sig_sq).exp()
    }

    pub fn variance(&self) -> f64 {
        self.sig_sq.exp_m1() * (2.0 * self.mu + self.sig_sq).exp()
    }

    pub fn cdf(&self, q: f64) -> f64 {
        lognormal_cdf(self, q)
    }

    /// Standardized log-distance `(ln(q - shift) - mu) / sigma`; `-inf` at
    /// or below the support boundary.
    pub fn z_score(&self, q: f64) -> f64 {
        if q <= self.shift {
            return f64::NEG_INFINITY;
        }
        ((q - self.shift).ln() - self.mu) / self.sigma()
    }
}

/// First two moments of a positive random variable.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MomentPair {
    pub mean: f64,
    pub variance: f64,
}

impl MomentPair {
    pub fn new(mean: f64, variance: f64) -> Result<Self> {
        if !(mean > 0.0) || !mean.is_finite() {
            return Err(XosError::InvalidMoments(format!("mean must be positive, got {mean}")));
        }
        if !(variance > 0.0) || !variance.is_finite() {
            return Err(XosError::InvalidMoments(format!(
                "variance must be positive, got {variance}"
            )));
        }
        Ok(Self { mean, variance })
    }
}

/// Classical lognormal with the given mean and variance.
///
/// `sig² = ln(1 + var/mean²)` and `mu = ln(mean) - sig²/2`, which equals
/// `½ ln(mean⁴ / (var + mean²))`.
pub fn match_lognormal(m: &MomentPair) -> LognormalSpec {
    let sig_sq = (m.variance / (m.mean * m.mean)).ln_1p();
    LognormalSpec {
        mu: m.mean.ln() - 0.5 * sig_sq,
        sig_sq,
        shift: 0.0,
    }
}

/// `P(X <= q)`; zero on and below the shift.
pub fn lognormal_cdf(spec: &LognormalSpec, q: f64) -> f64 {
    if q <= spec.shift {
        return 0.0;
    }
    normal_cdf(spec.z_score(q))
}

/// Streaming mean and second central moment (Welford, with Chan's merge).
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct RunningMoments {
    pub n: u64,
    pub mean: f64,
    m2: f64,
}

impl RunningMoments {
    pub fn push(&mut self, x: f64) {
        self.n += 1;
        let delta = x - self.mean;
        self.mean += delta / self.n as f64;
        self.m2 += delta * (x - self.mean);
    }

    pub fn merge(&mut self, other: &RunningMoments) {
        if other.n == 0 {
            return;
        }
        if self.n == 0 {
            *self = *other;
            return;
        }
        let n = self.n + other.n;
        let delta = other.mean - self.mean;
        let w = other.n as f64 / n as f64;
        self.mean += delta * w;
        self.m2 += other.m2 + delta * delta * self.n as f64 * w;
        self.n = n;
    }

    /// Unbiased sample variance; zero for fewer than two observations.
    pub fn variance(&self) -> f64 {
        if self.n < 2 {
            0.0
        } else {
            self.m2 / (self.n - 1) as f64
        }
    }

    pub fn from_slice(xs: &[f64]) -> Self {
        let mut m = Self::default();
        for &x in xs {
            m.push(x);
        }
        m
    }
}

/// Deterministic, substream-partitioned sampler of asset scenarios.
#[derive(Debug, Clone, Copy)]
pub struct AssetSampler {
    spec: BivariateLognormalSpec,
    seed: u64,
}

impl AssetSampler {
    pub fn new(spec: BivariateLognormalSpec, seed: u64) -> Self {
        Self { spec, seed }
    }

    pub fn spec(&self) -> &BivariateLognormalSpec {
        &self.spec
    }

    /// Scenarios `[k * SUBSTREAM_LEN, k * SUBSTREAM_LEN + len)` of the stream.
    pub fn substream(&self, k: usize, len: usize) -> Vec<AssetScenario> {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(k as u64);
        let (l11, l21, l22) = self.spec.cholesky();
        (0..len)
            .map(|_| {
                let z1: f64 = rng.sample(StandardNormal);
                let z2: f64 = rng.sample(StandardNormal);
                AssetScenario {
                    a1: (self.spec.mu1 + l11 * z1).exp(),
                    a2: (self.spec.mu2 + l21 * z1 + l22 * z2).exp(),
                }
            })
            .collect()
    }

    fn chunk_bounds(n: usize) -> Vec<(usize, usize)> {
        (0..n.div_ceil(SUBSTREAM_LEN))
            .map(|k| (k, SUBSTREAM_LEN.min(n - k * SUBSTREAM_LEN)))
            .collect()
    }

    /// Applies `f` to each substream in parallel; results are in stream order.
    pub fn map_substreams<T, F>(&self, n: usize, f: F) -> Vec<T>
    where
        T: Send,
        F: Fn(&[AssetScenario]) -> T + Sync,
    {
        Self::chunk_bounds(n)
            .into_par_iter()
            .map(|(k, len)| f(&self.substream(k, len)))
            .collect()
    }

    pub fn sample(&self, n: usize) -> Vec<AssetScenario> {
        self.map_substreams(n, |chunk| chunk.to_vec())
            .into_iter()
            .flatten()
            .collect()
    }
}

/// `n` i.i.d. draws of `(A1, A2)`, reproducible from `seed`.
pub fn sample_assets(spec: &BivariateLognormalSpec, n: usize, seed: u64) -> Result<Vec<AssetScenario>> {
    if n == 0 {
        return Err(XosError::InvalidArgument("sample size must be at least 1".into()));
    }
    Ok(AssetSampler::new(*spec, seed).sample(n))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    #[test]
    fn iid_spec_uses_mean_correction() {
        let s = BivariateLognormalSpec::iid_with_mean(1.0, 1.0).unwrap();
        assert_eq!(s.mu1, -0.5);
        assert_eq!(s.mu2, -0.5);
    }

    #[test]
    fn rejects_bad_covariance() {
        assert!(BivariateLognormalSpec::new(0.0, 0.0, 1.0, 1.0, 1.5).is_err());
        assert!(BivariateLognormalSpec::new(0.0, 0.0, 0.0, 1.0, 0.0).is_err());
        assert!(BivariateLognormalSpec::new(0.0, 0.0, 1.0, 4.0, 2.0).is_ok());
    }

    #[test]
    fn sampler_mean_within_clt_bound() {
        let spec = BivariateLognormalSpec::iid_with_mean(1.0, 1.0).unwrap();
        let xs = sample_assets(&spec, 1_000_000, 7).unwrap();
        let a1: Vec<f64> = xs.iter().map(|s| s.a1).collect();
        let m = RunningMoments::from_slice(&a1);
        let true_var = 1f64.exp() - 1.0;
        let se = (true_var / 1e6).sqrt();
        assert!((m.mean - 1.0).abs() <= 4.0 * se, "mean {}", m.mean);
        // SE of the sample variance: sqrt((mu4 - var^2) / n) for the lognormal
        let mu4 = {
            let w = 1f64.exp();
            (w.powi(4) + 2.0 * w.powi(3) + 3.0 * w.powi(2) - 3.0) * (w - 1.0).powi(2)
        };
        let var_se = ((mu4 - true_var * true_var) / 1e6).sqrt();
        assert!((m.variance() - true_var).abs() <= 6.0 * var_se, "var {}", m.variance());
    }

    #[test]
    fn independent_logs_are_uncorrelated() {
        let spec = BivariateLognormalSpec::iid_with_mean(1.0, 0.5).unwrap();
        let n = 200_000;
        let xs = sample_assets(&spec, n, 11).unwrap();
        let l1: Vec<f64> = xs.iter().map(|s| s.a1.ln()).collect();
        let l2: Vec<f64> = xs.iter().map(|s| s.a2.ln()).collect();
        let corr = pearson(&l1, &l2);
        assert!(corr.abs() <= 3.0 / (n as f64).sqrt(), "corr {corr}");
    }

    #[test]
    fn correlated_logs_follow_covariance() {
        let spec = BivariateLognormalSpec::new(0.2, -0.1, 0.5, 2.0, 0.6).unwrap();
        let xs = sample_assets(&spec, 200_000, 3).unwrap();
        let l1: Vec<f64> = xs.iter().map(|s| s.a1.ln()).collect();
        let l2: Vec<f64> = xs.iter().map(|s| s.a2.ln()).collect();
        assert!((pearson(&l1, &l2) - spec.correlation()).abs() < 0.01);
        let m2 = RunningMoments::from_slice(&l2);
        assert!((m2.mean + 0.1).abs() < 0.015);
        assert!((m2.variance() - 2.0).abs() < 0.03);
    }

    fn pearson(x: &[f64], y: &[f64]) -> f64 {
        let mx = x.iter().sum::<f64>() / x.len() as f64;
        let my = y.iter().sum::<f64>() / y.len() as f64;
        let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
        for (a, b) in x.iter().zip(y) {
            sxy += (a - mx) * (b - my);
            sxx += (a - mx) * (a - mx);
            syy += (b - my) * (b - my);
        }
        sxy / (sxx * syy).sqrt()
    }

    #[test]
    fn sampling_is_deterministic_and_prefix_stable() {
        let spec = BivariateLognormalSpec::iid_with_mean(1.0, 1.0).unwrap();
        let a = sample_assets(&spec, 40_000, 99).unwrap();
        let b = sample_assets(&spec, 40_000, 99).unwrap();
        assert_eq!(a, b);
        let c = sample_assets(&spec, 20_000, 99).unwrap();
        assert_eq!(&a[..20_000], &c[..]);
        let d = sample_assets(&spec, 40_000, 100).unwrap();
        assert_ne!(a, d);
        assert!(sample_assets(&spec, 0, 1).is_err());
    }

    #[test]
    fn thread_count_does_not_change_samples() {
        let spec = BivariateLognormalSpec::iid_with_mean(1.0, 1.0).unwrap();
        let reference = sample_assets(&spec, 50_000, 5).unwrap();
        let pool = rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap();
        let single = pool.install(|| sample_assets(&spec, 50_000, 5).unwrap());
        assert_eq!(reference, single);
    }

    #[test]
    fn match_lognormal_examples() {
        let s = match_lognormal(&MomentPair::new(1.0, 1f64.exp() - 1.0).unwrap());
        assert_relative_eq!(s.mu, -0.5, epsilon = 1e-14);
        assert_relative_eq!(s.sig_sq, 1.0, epsilon = 1e-14);
        assert_eq!(s.shift, 0.0);

        let s = match_lognormal(&MomentPair::new(2.0, 1f64.exp() - 1.0).unwrap());
        assert_relative_eq!(s.sig_sq, ((1f64.exp() - 1.0) / 4.0 + 1.0).ln(), epsilon = 1e-14);
        assert_relative_eq!(s.sig_sq, 0.357_374_019_508_788_5, epsilon = 1e-14);
        assert_relative_eq!(s.mean(), 2.0, epsilon = 1e-14);
        assert_relative_eq!(s.variance(), 1f64.exp() - 1.0, epsilon = 1e-13);
        // the textbook form of the log-mean
        let textbook = 0.5 * (2f64.powi(4) / (1f64.exp() - 1.0 + 4.0)).ln();
        assert_relative_eq!(s.mu, textbook, epsilon = 1e-14);
    }

    #[test]
    fn moment_pair_validation() {
        assert!(MomentPair::new(0.0, 1.0).is_err());
        assert!(MomentPair::new(1.0, 0.0).is_err());
        assert!(MomentPair::new(1.0, f64::NAN).is_err());
    }

    #[test]
    fn cdf_examples() {
        let s = LognormalSpec::new(-0.5, 1.0, 0.0).unwrap();
        assert!((lognormal_cdf(&s, 1.0) - 0.691_462_461_274_013_1).abs() < 1e-12);
        let median = LognormalSpec::new(0.0, 1.0, 0.0).unwrap();
        assert_eq!(lognormal_cdf(&median, 1.0), 0.5);
        let shifted = LognormalSpec::new(0.3, 0.7, 2.5).unwrap();
        assert_eq!(lognormal_cdf(&shifted, 2.5), 0.0);
        assert_eq!(lognormal_cdf(&shifted, 1.0), 0.0);
        assert!(lognormal_cdf(&shifted, 2.6) > 0.0);
        assert!((lognormal_cdf(&shifted, 1e300) - 1.0).abs() < 1e-15);
    }

    #[test]
    fn running_moments_merge_matches_direct() {
        let xs: Vec<f64> = (0..1000).map(|i| ((i * 37) % 101) as f64 * 0.3).collect();
        let direct = RunningMoments::from_slice(&xs);
        let mut merged = RunningMoments::default();
        for chunk in xs.chunks(77) {
            merged.merge(&RunningMoments::from_slice(chunk));
        }
        assert_relative_eq!(direct.mean, merged.mean, max_relative = 1e-13);
        assert_relative_eq!(direct.variance(), merged.variance(), max_relative = 1e-12);
        assert_eq!(direct.n, merged.n);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(10_000))]
        #[test]
        fn match_lognormal_round_trips(mean in 1e-3f64..1e3, cv in 1e-3f64..10.0) {
            let variance = (cv * mean).powi(2);
            let s = match_lognormal(&MomentPair::new(mean, variance).unwrap());
            prop_assert!((s.mean() - mean).abs() <= 1e-10 * mean);
            prop_assert!((s.variance() - variance).abs() <= 1e-10 * variance);
        }

        #[test]
        fn cdf_is_monotone(mu in -3f64..3.0, sig_sq in 0.01f64..5.0, shift in 0f64..2.0,
                           q1 in 0f64..20.0, dq in 0f64..20.0) {
            let s = LognormalSpec::new(mu, sig_sq, shift).unwrap();
            let (a, b) = (lognormal_cdf(&s, q1), lognormal_cdf(&s, q1 + dq));
            prop_assert!(a <= b);
            prop_assert!((0.0..=1.0).contains(&a) && (0.0..=1.0).contains(&b));
        }
    }
}

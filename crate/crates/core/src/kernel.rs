//! Citation-probability kernels and the article-quality sampler.
//!
//! An encounter between a citing article and a candidate is accepted with
//! probability
//!
//! ```text
//! P = (Q / 10) · tanh((N + δ) / γ) · [½ · tanh((T + α) / β) + ½]
//! ```
//!
//! where `Q` is the candidate's quality level, `N` the number of citations
//! it has already received and `T ≤ 0` its age in months relative to the
//! citing month. With `δ = 0` an uncited article can never be cited, so the
//! simulator defaults to `δ = 10`.

use rand::Rng;
use rand_distr::{Distribution, Gamma};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Highest quality level; quality enters the kernel as `Q / MAX_QUALITY`.
pub const MAX_QUALITY: u8 = 10;

/// Shape parameters of the citation kernels.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct KernelParams {
    /// Horizontal shift of the age curve, in months.
    pub alpha: f64,
    /// Slope scale of the age curve, in months. Must be positive.
    pub beta: f64,
    /// Scale of the citation-count curve. Must be positive.
    pub gamma: f64,
    /// Offset added to the citation count before scaling.
    pub delta: f64,
}

impl KernelParams {
    /// Default kernel: a slow-decaying age curve and a gradual count curve.
    pub const BASELINE: KernelParams = KernelParams {
        alpha: 80.0,
        beta: 60.0,
        gamma: 36.0,
        delta: 10.0,
    };

    /// Flat, long-memory kernel (α = 100, β = 30, γ = 10).
    pub const FLAT: KernelParams = KernelParams {
        alpha: 100.0,
        beta: 30.0,
        gamma: 10.0,
        delta: 10.0,
    };

    /// Steep, short-memory kernel (α = 15, β = 10, γ = 3).
    pub const STEEP: KernelParams = KernelParams {
        alpha: 15.0,
        beta: 10.0,
        gamma: 3.0,
        delta: 10.0,
    };

    pub fn new(alpha: f64, beta: f64, gamma: f64, delta: f64) -> Result<Self> {
        let params = KernelParams {
            alpha,
            beta,
            gamma,
            delta,
        };
        params.validate()?;
        Ok(params)
    }

    pub fn validate(&self) -> Result<()> {
        if !self.alpha.is_finite() {
            return Err(Error::invalid("kernel.alpha", "must be finite"));
        }
        if !(self.beta.is_finite() && self.beta > 0.0) {
            return Err(Error::invalid("kernel.beta", "must be finite and > 0"));
        }
        if !(self.gamma.is_finite() && self.gamma > 0.0) {
            return Err(Error::invalid("kernel.gamma", "must be finite and > 0"));
        }
        if !(self.delta.is_finite() && self.delta >= 0.0) {
            return Err(Error::invalid("kernel.delta", "must be finite and >= 0"));
        }
        Ok(())
    }
}

impl Default for KernelParams {
    fn default() -> Self {
        KernelParams::BASELINE
    }
}

/// Validated kernel. Construction is the only place parameters are checked;
/// evaluation afterwards is infallible apart from argument contracts.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Kernel {
    params: KernelParams,
}

impl Kernel {
    pub fn new(params: KernelParams) -> Result<Self> {
        params.validate()?;
        Ok(Kernel { params })
    }

    pub fn params(&self) -> &KernelParams {
        &self.params
    }

    /// `tanh((n + δ) / γ)`: strictly increasing and concave in `n`, tending to 1.
    pub fn citation_count_factor(&self, n: u32) -> f64 {
        ((f64::from(n) + self.params.delta) / self.params.gamma).tanh()
    }

    /// `½ · tanh((t + α) / β) + ½` for an age `t ≤ 0` in months.
    pub fn age_factor(&self, t: i64) -> Result<f64> {
        if t > 0 {
            return Err(Error::PositiveAge(t));
        }
        Ok(self.age_factor_unchecked(t))
    }

    #[inline]
    pub(crate) fn age_factor_unchecked(&self, t: i64) -> f64 {
        0.5 * ((t as f64 + self.params.alpha) / self.params.beta).tanh() + 0.5
    }

    /// Product of the quality, citation-count and age factors.
    pub fn cite_probability(&self, quality: u8, n: u32, t: i64) -> Result<f64> {
        if !(1..=MAX_QUALITY).contains(&quality) {
            return Err(Error::QualityOutOfRange(quality));
        }
        if t > 0 {
            return Err(Error::PositiveAge(t));
        }
        Ok(self.cite_probability_unchecked(quality, n, t))
    }

    #[inline]
    pub(crate) fn cite_probability_unchecked(&self, quality: u8, n: u32, t: i64) -> f64 {
        f64::from(quality) / f64::from(MAX_QUALITY)
            * self.citation_count_factor(n)
            * self.age_factor_unchecked(t)
    }
}

/// Distribution of intrinsic article quality: a gamma variate floored to an
/// integer and clamped into `[min_level, max_level]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct QualityDistribution {
    pub shape: f64,
    pub scale: f64,
    pub min_level: u8,
    pub max_level: u8,
}

impl Default for QualityDistribution {
    fn default() -> Self {
        QualityDistribution {
            shape: 10.0,
            scale: 0.45,
            min_level: 1,
            max_level: MAX_QUALITY,
        }
    }
}

impl QualityDistribution {
    pub fn validate(&self) -> Result<()> {
        if !(self.shape.is_finite() && self.shape > 0.0) {
            return Err(Error::invalid("quality.shape", "must be finite and > 0"));
        }
        if !(self.scale.is_finite() && self.scale > 0.0) {
            return Err(Error::invalid("quality.scale", "must be finite and > 0"));
        }
        if self.min_level < 1 {
            return Err(Error::invalid("quality.min_level", "must be >= 1"));
        }
        if self.max_level > MAX_QUALITY {
            return Err(Error::invalid("quality.max_level", "must be <= 10"));
        }
        if self.min_level > self.max_level {
            return Err(Error::invalid(
                "quality.min_level",
                "must not exceed quality.max_level",
            ));
        }
        Ok(())
    }

    /// Mean of the continuous (pre-floor) distribution.
    pub fn mean(&self) -> f64 {
        self.shape * self.scale
    }

    /// Variance of the continuous (pre-floor) distribution.
    pub fn variance(&self) -> f64 {
        self.shape * self.scale * self.scale
    }

    /// Floor a continuous draw and clamp it into the level range.
    pub fn level_from_draw(&self, draw: f64) -> u8 {
        let floored = draw.floor();
        if floored >= f64::from(self.max_level) {
            self.max_level
        } else if floored <= f64::from(self.min_level) {
            self.min_level
        } else {
            floored as u8
        }
    }

    pub fn sampler(&self) -> Result<QualitySampler> {
        self.validate()?;
        let gamma = Gamma::new(self.shape, self.scale)
            .map_err(|e| Error::invalid("quality", e.to_string()))?;
        Ok(QualitySampler { dist: *self, gamma })
    }
}

/// Ready-to-draw quality sampler.
#[derive(Debug, Clone)]
pub struct QualitySampler {
    dist: QualityDistribution,
    gamma: Gamma<f64>,
}

impl QualitySampler {
    /// One continuous gamma draw, before flooring.
    pub fn draw_continuous<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        self.gamma.sample(rng)
    }

    pub fn sample_quality<R: Rng + ?Sized>(&self, rng: &mut R) -> u8 {
        self.dist.level_from_draw(self.draw_continuous(rng))
    }

    pub fn distribution(&self) -> &QualityDistribution {
        &self.dist
    }
}

#[cfg(test)]
#[allow(clippy::excessive_precision)]
mod tests {
    use super::*;
    use crate::rng::sim_rng;

    // Reference values evaluated with 30-digit arithmetic.
    const TANH_1: f64 = 0.761_594_155_955_764_888;
    const TANH_10_OVER_36: f64 = 0.270_847_118_516_721_412;
    const HALF_TANH_2_PLUS_HALF: f64 = 0.982_013_790_037_908_442;
    const COMPOSED: f64 = 0.373_947_981_780_421_299;

    fn kernel(alpha: f64, beta: f64, gamma: f64, delta: f64) -> Kernel {
        Kernel::new(KernelParams::new(alpha, beta, gamma, delta).unwrap()).unwrap()
    }

    #[test]
    fn count_factor_examples() {
        assert_eq!(kernel(0.0, 1.0, 10.0, 0.0).citation_count_factor(0), 0.0);
        assert!((kernel(0.0, 1.0, 10.0, 0.0).citation_count_factor(10) - TANH_1).abs() < 1e-15);
        assert!(
            (kernel(0.0, 1.0, 36.0, 10.0).citation_count_factor(0) - TANH_10_OVER_36).abs() < 1e-15
        );
    }

    #[test]
    fn age_factor_examples() {
        let k = kernel(100.0, 30.0, 10.0, 0.0);
        assert_eq!(k.age_factor(-100).unwrap(), 0.5);
        assert!((k.age_factor(-40).unwrap() - HALF_TANH_2_PLUS_HALF).abs() < 1e-15);
        let steep = kernel(15.0, 10.0, 3.0, 10.0);
        assert!(steep.age_factor(-10_000).unwrap() < 1e-12);
    }

    #[test]
    fn positive_age_is_rejected() {
        let k = Kernel::new(KernelParams::default()).unwrap();
        assert_eq!(k.age_factor(1), Err(Error::PositiveAge(1)));
        assert_eq!(k.cite_probability(5, 0, 3), Err(Error::PositiveAge(3)));
    }

    #[test]
    fn cite_probability_examples() {
        let k = kernel(100.0, 30.0, 10.0, 0.0);
        assert!((k.cite_probability(5, 10, -40).unwrap() - COMPOSED).abs() < 1e-15);
        assert_eq!(k.cite_probability(10, 0, 0).unwrap(), 0.0);

        // Both tanh factors saturate, leaving Q / 10.
        let saturated = kernel(1e6, 1.0, 1.0, 0.0);
        assert!((saturated.cite_probability(1, 1_000_000, 0).unwrap() - 0.1).abs() < 1e-12);
    }

    #[test]
    fn cite_probability_is_exact_product() {
        let k = Kernel::new(KernelParams::BASELINE).unwrap();
        for q in 1..=10u8 {
            for n in [0u32, 1, 7, 100] {
                for t in [0i64, -1, -50, -300] {
                    let p = k.cite_probability(q, n, t).unwrap();
                    let product = f64::from(q) / 10.0
                        * k.citation_count_factor(n)
                        * k.age_factor(t).unwrap();
                    assert_eq!(p, product);
                    assert!(p < 1.0);
                }
            }
        }
    }

    #[test]
    fn quality_outside_range_is_rejected() {
        let k = Kernel::new(KernelParams::default()).unwrap();
        assert_eq!(k.cite_probability(0, 0, 0), Err(Error::QualityOutOfRange(0)));
        assert_eq!(k.cite_probability(11, 0, 0), Err(Error::QualityOutOfRange(11)));
    }

    #[test]
    fn invalid_params_fail_at_construction() {
        let err = KernelParams::new(80.0, 0.0, 36.0, 10.0).unwrap_err();
        assert!(matches!(err, Error::InvalidConfig { ref field, .. } if field == "kernel.beta"));
        let err = KernelParams::new(80.0, 60.0, -1.0, 10.0).unwrap_err();
        assert!(matches!(err, Error::InvalidConfig { ref field, .. } if field == "kernel.gamma"));
        let err = KernelParams::new(80.0, 60.0, 36.0, -0.5).unwrap_err();
        assert!(matches!(err, Error::InvalidConfig { ref field, .. } if field == "kernel.delta"));
    }

    #[test]
    fn flatter_count_curve_is_lower_pointwise() {
        let flat = kernel(0.0, 1.0, 20.0, 0.0);
        let steep = kernel(0.0, 1.0, 5.0, 0.0);
        for n in 1..200 {
            assert!(flat.citation_count_factor(n) < steep.citation_count_factor(n));
        }
    }

    #[test]
    fn level_clamping() {
        let dist = QualityDistribution::default();
        assert_eq!(dist.level_from_draw(12.3), 10);
        assert_eq!(dist.level_from_draw(0.4), 1);
        assert_eq!(dist.level_from_draw(4.99), 4);
        assert_eq!(dist.level_from_draw(10.0), 10);
        assert_eq!(dist.level_from_draw(1.0), 1);
    }

    #[test]
    fn quality_sampler_is_deterministic() {
        let sampler = QualityDistribution::default().sampler().unwrap();
        let mut a = sim_rng(99);
        let mut b = sim_rng(99);
        let xs: Vec<u8> = (0..1000).map(|_| sampler.sample_quality(&mut a)).collect();
        let ys: Vec<u8> = (0..1000).map(|_| sampler.sample_quality(&mut b)).collect();
        assert_eq!(xs, ys);
        assert!(xs.iter().all(|q| (1..=10).contains(q)));
    }

    #[test]
    fn invalid_quality_distribution() {
        let dist = QualityDistribution {
            min_level: 7,
            max_level: 3,
            ..QualityDistribution::default()
        };
        assert!(dist.sampler().is_err());
        let dist = QualityDistribution {
            scale: 0.0,
            ..QualityDistribution::default()
        };
        assert!(dist.validate().is_err());
    }
}

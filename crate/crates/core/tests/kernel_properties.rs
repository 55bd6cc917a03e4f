use ifsim_core::kernel::{Kernel, KernelParams, QualityDistribution};
use ifsim_core::rng::sim_rng;
use proptest::prelude::*;
use statrs::distribution::{ContinuousCDF, Gamma as GammaRef};

/// tanh through `expm1`, independent of `f64::tanh`.
fn reference_tanh(x: f64) -> f64 {
    if x < 0.0 {
        return -reference_tanh(-x);
    }
    let e = (2.0 * x).exp_m1();
    if e.is_infinite() {
        return 1.0;
    }
    e / (e + 2.0)
}

fn kernel(alpha: f64, beta: f64, gamma: f64, delta: f64) -> Kernel {
    Kernel::new(KernelParams::new(alpha, beta, gamma, delta).unwrap()).unwrap()
}

proptest! {
    #[test]
    fn count_factor_is_increasing_and_concave(gamma in 0.5f64..100.0, delta in 0.0f64..20.0, n in 0u32..400) {
        let k = kernel(50.0, 20.0, gamma, delta);
        let (f0, f1, f2) = (k.citation_count_factor(n), k.citation_count_factor(n + 1), k.citation_count_factor(n + 2));
        // Strict comparisons only make sense before the curve saturates in f64.
        if f2 < 1.0 - 1e-12 {
            prop_assert!(f1 > f0);
            prop_assert!(f2 - f1 < f1 - f0);
        } else {
            prop_assert!(f1 >= f0);
        }
    }

    #[test]
    fn count_factor_saturates(gamma in 0.5f64..50.0, extra in 0u32..1000) {
        let k = kernel(50.0, 20.0, gamma, 0.0);
        let n = (25.0 * gamma).ceil() as u32 + extra;
        prop_assert!(1.0 - k.citation_count_factor(n) < 1e-9);
    }

    #[test]
    fn age_factor_is_increasing(alpha in -50.0f64..200.0, beta in 1.0f64..80.0, t in -300i64..0) {
        let k = kernel(alpha, beta, 10.0, 10.0);
        let (g0, g1) = (k.age_factor(t - 1).unwrap(), k.age_factor(t).unwrap());
        prop_assert!(g1 >= g0);
        // ½tanh+½ cancels in the far tails, so strictness is checked in the body only.
        if g0 > 1e-12 && g1 < 1.0 - 1e-12 {
            prop_assert!(g1 > g0);
        }
    }

    #[test]
    fn outputs_stay_in_unit_interval(q in 1u8..=10, n in 0u32..200, t in -200i64..=0,
                                     alpha in 0.0f64..150.0, beta in 1.0f64..60.0, gamma in 1.0f64..60.0) {
        let k = kernel(alpha, beta, gamma, 10.0);
        let f = k.citation_count_factor(n);
        let g = k.age_factor(t).unwrap();
        prop_assert!(f > 0.0 && f <= 1.0);
        prop_assert!((0.0..1.0).contains(&g) || g == 1.0);
        let p = k.cite_probability(q, n, t).unwrap();
        prop_assert!(p < 1.0);
        prop_assert!(p >= 0.0);
    }
}

#[test]
fn kernels_match_reference_tanh() {
    let sets = [KernelParams::FLAT, KernelParams::STEEP, KernelParams::BASELINE];
    let mut rng = sim_rng(404);
    use rand::Rng;
    for params in sets {
        let k = Kernel::new(params).unwrap();
        for _ in 0..1000 {
            let n: u32 = rng.random_range(0..500);
            let t: i64 = -rng.random_range(0..400i64);
            let f = reference_tanh((f64::from(n) + params.delta) / params.gamma);
            let g = 0.5 * reference_tanh((t as f64 + params.alpha) / params.beta) + 0.5;
            assert!((k.citation_count_factor(n) - f).abs() <= 1e-12);
            assert!((k.age_factor(t).unwrap() - g).abs() <= 1e-12);
        }
    }
}

#[test]
fn quality_moments_match_gamma() {
    let dist = QualityDistribution::default();
    let sampler = dist.sampler().unwrap();
    let mut rng = sim_rng(17);
    let n = 1_000_000;
    let draws: Vec<f64> = (0..n).map(|_| sampler.draw_continuous(&mut rng)).collect();
    let mean = draws.iter().sum::<f64>() / n as f64;
    let var = draws.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n as f64 - 1.0);
    assert!((mean - 4.5).abs() < 0.05, "mean {mean}");
    assert!((var - 2.025).abs() < 0.1, "variance {var}");
    assert_eq!(dist.mean(), 4.5);
    assert!((dist.variance() - 2.025).abs() < 1e-12);
}

#[test]
fn quality_draws_pass_kolmogorov_smirnov() {
    let sampler = QualityDistribution::default().sampler().unwrap();
    let reference = GammaRef::new(10.0, 1.0 / 0.45).unwrap();
    let mut rng = sim_rng(23);
    let n = 100_000;
    let mut draws: Vec<f64> = (0..n).map(|_| sampler.draw_continuous(&mut rng)).collect();
    draws.sort_by(f64::total_cmp);
    let d = draws
        .iter()
        .enumerate()
        .map(|(i, &x)| {
            let cdf = reference.cdf(x);
            (cdf - i as f64 / n as f64).max((i + 1) as f64 / n as f64 - cdf)
        })
        .fold(0.0, f64::max);
    // Asymptotic KS critical value at the 1% level.
    let critical = 1.6276 / (n as f64).sqrt();
    assert!(d < critical, "D = {d}, critical {critical}");
}

#[test]
fn floored_levels_cover_expected_range() {
    let sampler = QualityDistribution::default().sampler().unwrap();
    let mut rng = sim_rng(5);
    let levels: Vec<u8> = (0..100_000).map(|_| sampler.sample_quality(&mut rng)).collect();
    assert!(levels.iter().all(|q| (1..=10).contains(q)));
    // Flooring shifts the mean down by roughly one half.
    let mean = levels.iter().map(|&q| f64::from(q)).sum::<f64>() / levels.len() as f64;
    assert!((mean - 4.0).abs() < 0.1, "mean level {mean}");
}

//! Standard normal distribution and tail functions.

use std::f64::consts::FRAC_1_SQRT_2;

/// Standard normal CDF `Φ(x)`.
///
/// Evaluated through `erfc` so the lower tail keeps full relative accuracy.
pub fn normal_cdf(x: f64) -> f64 {
    if x.is_nan() {
        return f64::NAN;
    }
    0.5 * libm::erfc(-x * FRAC_1_SQRT_2)
}

/// Upper tail `1 - Φ(x)` without cancellation.
pub fn normal_sf(x: f64) -> f64 {
    if x.is_nan() {
        return f64::NAN;
    }
    0.5 * libm::erfc(x * FRAC_1_SQRT_2)
}

/// Standard normal density.
pub fn normal_pdf(x: f64) -> f64 {
    const INV_SQRT_2PI: f64 = 0.398_942_280_401_432_7;
    INV_SQRT_2PI * (-0.5 * x * x).exp()
}

#[cfg(test)]
mod tests {
    use super::*;

    // Power series erf(x) = 2/sqrt(pi) sum (-1)^n x^(2n+1) / (n! (2n+1)),
    // accurate to ~1e-14 for |x| <= 2.
    fn erf_series(x: f64) -> f64 {
        let mut term = x;
        let mut sum = x;
        let mut n = 0.0;
        loop {
            n += 1.0;
            term *= -x * x / n;
            let add = term / (2.0 * n + 1.0);
            sum += add;
            if add.abs() < 1e-18 {
                break;
            }
        }
        sum * 2.0 / std::f64::consts::PI.sqrt()
    }

    #[test]
    fn matches_series_oracle() {
        let mut x = -2.5;
        while x <= 2.5 {
            let oracle = 0.5 * (1.0 + erf_series(x * FRAC_1_SQRT_2));
            assert!((normal_cdf(x) - oracle).abs() < 1e-13, "x = {x}");
            x += 0.01;
        }
    }

    #[test]
    #[allow(clippy::excessive_precision)]
    fn matches_high_precision_reference() {
        // 40-digit reference values
        let refs = [
            (-8.0, 6.220960574271784e-16),
            (-5.0, 2.866515718791939e-7),
            (-3.0, 0.001349898031630094526651814767594977),
            (-1.5, 0.066807201268858066004494040979886),
            (-0.5, 0.308537538725986896362295389391662),
            (0.0, 0.5),
            (0.5, 0.691462461274013103637704610608338),
            (1.0, 0.841344746068542948585232545632038),
            (2.0, 0.977249868051820792799717362833467),
            (3.5, 0.999767370920964474963650074113272),
            (6.0, 0.999999999013412354962301859299136),
        ];
        for (x, want) in refs {
            let got = normal_cdf(x);
            assert!((got - want).abs() <= 1e-15_f64.max(want * 1e-13), "x = {x}: {got} vs {want}");
        }
    }

    #[test]
    fn tails_are_complementary() {
        for i in -80..=80 {
            let x = i as f64 * 0.1;
            assert!((normal_cdf(x) + normal_sf(x) - 1.0).abs() < 1e-15);
            assert_eq!(normal_sf(x), normal_cdf(-x));
        }
    }

    #[test]
    fn monotone() {
        let mut prev = 0.0;
        for i in -400..=400 {
            let v = normal_cdf(i as f64 * 0.02);
            assert!(v >= prev);
            prev = v;
        }
        assert_eq!(normal_cdf(f64::NEG_INFINITY), 0.0);
        assert_eq!(normal_cdf(f64::INFINITY), 1.0);
    }
}

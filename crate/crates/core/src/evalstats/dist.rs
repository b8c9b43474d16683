use statrs::distribution::{ChiSquared, ContinuousCDF, Normal};

/// Chi-square survival function `P(X > x)` with `df` degrees of freedom.
pub fn chi2_sf(x: f64, df: f64) -> f64 {
    if x <= 0.0 {
        return 1.0;
    }
    ChiSquared::new(df).expect("df ≥ 1").sf(x).clamp(0.0, 1.0)
}

/// Standard normal CDF.
pub fn normal_cdf(x: f64) -> f64 {
    Normal::standard().cdf(x)
}

/// Standard normal quantile function, `Φ⁻¹(p)` for `p ∈ (0, 1)`.
pub fn probit(p: f64) -> f64 {
    Normal::standard().inverse_cdf(p)
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Composite Simpson rule on `[a, b]`.
    fn simpson(f: impl Fn(f64) -> f64, a: f64, b: f64, n: usize) -> f64 {
        let h = (b - a) / n as f64;
        let mut s = f(a) + f(b);
        for i in 1..n {
            s += f(a + i as f64 * h) * if i % 2 == 1 { 4.0 } else { 2.0 };
        }
        s * h / 3.0
    }

    #[test]
    fn chi_square_against_quadrature() {
        assert_eq!(chi2_sf(0.0, 3.0), 1.0);
        // df = 2 has the closed form e^{−x/2}
        assert!((chi2_sf(7.2, 2.0) - (-3.6f64).exp()).abs() < 1e-12);
        assert!((chi2_sf(7.2, 2.0) - 0.02732).abs() < 1e-5);
        // df = 3 density √t e^{−t/2} / (2^{3/2} Γ(3/2)), Γ(3/2) = √π / 2;
        // with t = u² the integrand is smooth at 0
        let norm = 2.0f64.powf(1.5) * std::f64::consts::PI.sqrt() / 2.0;
        let integrand = |u: f64| 2.0 * u * u * (-u * u / 2.0).exp() / norm;
        for x in [0.5, 2.0, 5.0, 11.0] {
            let cdf = simpson(integrand, 0.0, f64::sqrt(x), 20_000);
            assert!((chi2_sf(x, 3.0) - (1.0 - cdf)).abs() < 1e-10, "x = {x}");
        }
    }

    #[test]
    fn normal_symmetry_and_quantiles() {
        assert_eq!(normal_cdf(0.0), 0.5);
        for x in [-8.0, -2.5, -0.3, 1.0, 4.0] {
            assert!((normal_cdf(x) + normal_cdf(-x) - 1.0).abs() < 1e-12);
        }
        assert!((normal_cdf(1.959963984540054) - 0.975).abs() < 1e-10);
        for p in [1e-6, 0.01, 0.3, 0.5, 0.9] {
            assert!((normal_cdf(probit(p)) - p).abs() < 1e-9 * p.max(1e-3));
        }
    }
}

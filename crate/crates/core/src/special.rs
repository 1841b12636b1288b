use std::f64::consts::PI;

/// erf(x)/x, continuous through x = 0 where it equals 2/√π.
pub fn erf_over_x(x: f64) -> f64 {
    let ax = x.abs();
    if ax < 1e-3 {
        let x2 = x * x;
        // Maclaurin series, truncation error below x⁸/216
        2.0 / PI.sqrt() * (1.0 - x2 / 3.0 + x2 * x2 / 10.0 - x2 * x2 * x2 / 42.0)
    } else {
        libm::erf(x) / x
    }
}

/// 1 − (√π/2)·erf(x)/x without cancellation near x = 0.
pub fn erf_ratio_deficit(x: f64) -> f64 {
    let x2 = x * x;
    if x2 >= 1.0 {
        return 1.0 - PI.sqrt() / 2.0 * libm::erf(x) / x;
    }
    // Σ (−1)ⁿ⁺¹ x²ⁿ / (n! (2n+1))
    let mut power = 1.0;
    let mut sum = 0.0;
    for n in 1..40 {
        let nf = f64::from(n);
        power *= x2 / nf;
        let term = power / (2.0 * nf + 1.0);
        sum += if n % 2 == 1 { term } else { -term };
        if term <= 1e-17 * sum {
            break;
        }
    }
    sum
}

pub fn erf(x: f64) -> f64 {
    libm::erf(x)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn series_matches_direct_evaluation_at_switch() {
        let below = erf_over_x(0.999_999e-3);
        let direct = libm::erf(0.999_999e-3) / 0.999_999e-3;
        assert!((below / direct - 1.0).abs() < 1e-15);
        assert_eq!(erf_over_x(0.0), 2.0 / PI.sqrt());
    }

    #[test]
    fn deficit_series_meets_direct_form() {
        for x in [0.999_999_9f64, 1.0] {
            let direct = 1.0 - PI.sqrt() / 2.0 * libm::erf(x) / x;
            assert!((erf_ratio_deficit(x) / direct - 1.0).abs() < 1e-14);
        }
        let x = 1e-4;
        assert!((erf_ratio_deficit(x) / (x * x / 3.0) - 1.0).abs() < 1e-8);
        assert_eq!(erf_ratio_deficit(0.0), 0.0);
    }

    #[test]
    fn known_value() {
        // erf(1/2) = 0.520499877813047
        assert!((erf(0.5) - 0.520_499_877_813_047).abs() < 1e-15);
    }
}

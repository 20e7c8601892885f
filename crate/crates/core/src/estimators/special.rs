//! Logistic and Gaussian-CDF helpers with stable log-domain forms.

use std::f64::consts::{FRAC_1_SQRT_2, PI};

#[inline]
pub fn sigmoid(x: f64) -> f64 {
    if x >= 0.0 {
        1.0 / (1.0 + (-x).exp())
    } else {
        let e = x.exp();
        e / (1.0 + e)
    }
}

/// eˣ without branches or libm calls, so loops over it vectorize.
///
/// Inputs are clamped to ±700 (the callers only need eˣ to saturate). Range
/// reduction x = k·ln2 + r with |r| ≤ ln2/2, then a degree-12 Taylor
/// polynomial; the relative error is a few ulp.
#[inline(always)]
pub fn exp_fast(x: f64) -> f64 {
    const MAGIC: f64 = 6_755_399_441_055_744.0; // 1.5·2⁵², rounds to integer
    const LN2_HI: f64 = 6.931_471_803_691_238_164_90e-01;
    const LN2_LO: f64 = 1.908_214_929_270_587_700_02e-10;
    let x = x.clamp(-700.0, 700.0);
    let kf = x * std::f64::consts::LOG2_E + MAGIC;
    let k = kf - MAGIC;
    let r = x - k * LN2_HI - k * LN2_LO;
    let mut p = 1.0 / 479_001_600.0;
    p = p * r + 1.0 / 39_916_800.0;
    p = p * r + 1.0 / 3_628_800.0;
    p = p * r + 1.0 / 362_880.0;
    p = p * r + 1.0 / 40_320.0;
    p = p * r + 1.0 / 5_040.0;
    p = p * r + 1.0 / 720.0;
    p = p * r + 1.0 / 120.0;
    p = p * r + 1.0 / 24.0;
    p = p * r + 1.0 / 6.0;
    p = p * r + 0.5;
    p = p * r + 1.0;
    p = p * r + 1.0;
    let ki = kf.to_bits().wrapping_sub(MAGIC.to_bits()) as i64;
    p * f64::from_bits(((ki + 1023) as u64) << 52)
}

/// ln(1 + eˣ).
#[inline]
pub fn softplus(x: f64) -> f64 {
    x.max(0.0) + (-x.abs()).exp().ln_1p()
}

/// ln σ(x).
#[inline]
pub fn log_sigmoid(x: f64) -> f64 {
    -softplus(-x)
}

/// Standard normal CDF.
pub fn ndtr(x: f64) -> f64 {
    0.5 * libm::erfc(-x * FRAC_1_SQRT_2)
}

/// ln Φ(x), accurate in both tails.
pub fn log_ndtr(x: f64) -> f64 {
    if x > 0.0 {
        (-0.5 * libm::erfc(x * FRAC_1_SQRT_2)).ln_1p()
    } else if x > -20.0 {
        (0.5 * libm::erfc(-x * FRAC_1_SQRT_2)).ln()
    } else {
        // Φ(x) = φ(x)/(-x) · (1 - 1/x² + 3/x⁴ - 15/x⁶ + 105/x⁸ - ...)
        let x2 = x * x;
        let inv = 1.0 / x2;
        let series = 1.0 - inv * (1.0 - inv * (3.0 - inv * (15.0 - inv * 105.0)));
        -0.5 * x2 - (-x).ln() - 0.5 * (2.0 * PI).ln() + series.ln()
    }
}

/// φ(x)/Φ(x).
pub fn inverse_mills(x: f64) -> f64 {
    (-0.5 * x * x - 0.5 * (2.0 * PI).ln() - log_ndtr(x)).exp()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exp_fast_matches_libm() {
        let mut worst = 0.0f64;
        for i in -699_999..=699_999 {
            let x = i as f64 * 1e-3 + 1.234e-5;
            let (a, b) = (exp_fast(x), x.exp());
            worst = worst.max(((a - b) / b).abs());
        }
        assert!(worst < 1e-15, "{worst}");
        assert_eq!(exp_fast(0.0), 1.0);
        assert!(exp_fast(-1e4) > 0.0 && exp_fast(1e4).is_finite());
    }

    #[test]
    fn sigmoid_basics() {
        assert_eq!(sigmoid(0.0), 0.5);
        assert_eq!(sigmoid(800.0), 1.0);
        assert_eq!(sigmoid(-800.0), 0.0);
        for x in [-30.0, -2.0, 0.3, 7.0] {
            assert!((sigmoid(x) + sigmoid(-x) - 1.0).abs() < 1e-15);
            assert!((log_sigmoid(x) - sigmoid(x).ln()).abs() < 1e-12);
        }
        assert!((log_sigmoid(-800.0) + 800.0).abs() < 1e-12);
    }

    #[test]
    fn ndtr_reference_values() {
        assert_eq!(ndtr(0.0), 0.5);
        assert!((ndtr(1.0) - 0.841_344_746_068_542_9).abs() < 1e-15);
        assert!((ndtr(-3.0) - 0.001_349_898_031_630_094_6).abs() < 1e-17);
    }

    #[test]
    fn log_ndtr_is_continuous_across_branches() {
        for x in [-20.0f64, 0.0] {
            let lo = log_ndtr(x - 1e-9);
            let hi = log_ndtr(x + 1e-9);
            assert!((lo - hi).abs() < 1e-6 * lo.abs().max(1.0), "{x}: {lo} {hi}");
        }
        // ln Φ(-40) reference: -804.608442013754...
        assert!((log_ndtr(-40.0) + 804.608_442_013_754_4).abs() < 1e-9);
        assert!(log_ndtr(-1e5).is_finite());
        assert!((log_ndtr(10.0) + 7.619_853_024_160_527e-24).abs() < 1e-35);
    }

    #[test]
    fn mills_ratio() {
        // φ(0)/Φ(0) = 2/√(2π)
        assert!((inverse_mills(0.0) - 2.0 / (2.0 * PI).sqrt()).abs() < 1e-15);
        // ~ -x for very negative x
        assert!((inverse_mills(-50.0) / 50.0 - 1.0).abs() < 1e-3);
    }
}

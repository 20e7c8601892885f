//! AGC gain law and comparator bit flips.

use rand::Rng;

use crate::config::AgcParams;

/// Sample-average power ‖y‖²/len (0 for an empty vector).
pub fn measure_rf_power(y: &[f64]) -> f64 {
    if y.is_empty() {
        return 0.0;
    }
    y.iter().map(|v| v * v).sum::<f64>() / y.len() as f64
}

/// AGC gain in dB for an input power in dBW: maximum gain below the lower
/// power limit, minimum gain above the upper one, and `target - p` between.
pub fn agc_gain(p_dbw: f64, agc: &AgcParams) -> f64 {
    if p_dbw < agc.p_low_dbw {
        agc.gain_max_db
    } else if p_dbw > agc.p_high_dbw {
        agc.gain_min_db
    } else {
        agc.target_dbw - p_dbw
    }
}

/// Linear amplitude factor 10^(G/20).
pub fn agc_amplitude(p_dbw: f64, agc: &AgcParams) -> f64 {
    10f64.powf(agc_gain(p_dbw, agc) / 20.0)
}

/// Replaces `z_i` by an independent uniform ±1 draw wherever `|v_i| < t`.
pub fn apply_comparator_flips<R: Rng + ?Sized>(rng: &mut R, v: &[f64], z: &[i8], t: f64) -> Vec<i8> {
    assert_eq!(v.len(), z.len());
    v.iter()
        .zip(z)
        .map(|(&vi, &zi)| {
            if vi.abs() < t {
                if rng.random::<bool>() {
                    1
                } else {
                    -1
                }
            } else {
                zi
            }
        })
        .collect()
}


use rand::Rng;
use rand_distr::StandardNormal;

use super::operator::ForwardOperator;
use super::C64;

/// h ~ CN(0, I_{S·U}).
pub fn sample_channel<R: Rng + ?Sized>(rng: &mut R, s: usize, u: usize) -> Vec<C64> {
    sample_noise(rng, s * u, 1.0)
}

/// i.i.d. CN(0, n0) entries.
pub fn sample_noise<R: Rng + ?Sized>(rng: &mut R, len: usize, n0: f64) -> Vec<C64> {
    let scale = (n0 / 2.0).sqrt();
    (0..len)
        .map(|_| {
            let re: f64 = rng.sample(StandardNormal);
            let im: f64 = rng.sample(StandardNormal);
            C64::new(re * scale, im * scale)
        })
        .collect()
}

/// i.i.d. N(0, ed/2) dither. Returns zeros (after consuming the same draws)
/// when `ed == 0`.
pub fn sample_dither<R: Rng + ?Sized>(rng: &mut R, len: usize, ed: f64) -> Vec<f64> {
    let scale = (ed / 2.0).sqrt();
    (0..len)
        .map(|_| {
            let x: f64 = rng.sample(StandardNormal);
            if ed == 0.0 {
                0.0
            } else {
                x * scale
            }
        })
        .collect()
}

/// Unit-power random draws of one Monte-Carlo sample, in a fixed order
/// (h, then w, then d) so that different models and powers evaluated on the
/// same stream share their randomness.
#[derive(Debug, Clone)]
pub struct Draws {
    pub h: Vec<C64>,
    w_unit: Vec<C64>,
    d_unit: Vec<f64>,
}

impl Draws {
    pub fn new<R: Rng + ?Sized>(rng: &mut R, op: &ForwardOperator) -> Self {
        let h = sample_channel(rng, op.s(), op.ues());
        let w_unit = sample_noise(rng, op.noise_len(), 1.0);
        let d_unit = sample_dither(rng, op.rows(), 2.0);
        Draws { h, w_unit, d_unit }
    }

    pub fn noise(&self, n0: f64) -> Vec<C64> {
        let s = n0.sqrt();
        self.w_unit.iter().map(|w| w * s).collect()
    }

    pub fn dither(&self, ed: f64) -> Vec<f64> {
        if ed == 0.0 {
            return vec![0.0; self.d_unit.len()];
        }
        let s = (ed / 2.0).sqrt();
        self.d_unit.iter().map(|d| d * s).collect()
    }
}

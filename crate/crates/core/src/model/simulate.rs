//! The three uplink observation models.
//!
//! - Model 1: z = sgn(√2·Re{M h} + d)
//! - Model 2: z = sgn(√2·Re{U F̃_inv (P̃h + w)} + d)
//! - Model 3: Model 2 with AGC gain on the RF waveform and comparator flips.

use rand::Rng;

use super::impairments::{agc_amplitude, agc_gain, apply_comparator_flips, measure_rf_power};
use super::observation::{sgn, Observation};
use super::operator::ForwardOperator;
use super::C64;
use crate::config::{lin_to_db, AgcParams};

/// Data model selector.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum DataModel {
    /// Noiseless simplified relation.
    M1,
    /// Additive noise, ideal quantizer.
    M2,
    /// Additive noise, AGC and comparator flips.
    M3,
}

impl DataModel {
    pub fn index(self) -> u64 {
        match self {
            DataModel::M1 => 1,
            DataModel::M2 => 2,
            DataModel::M3 => 3,
        }
    }
}

/// Gain applied to the RF waveform in front of the comparator.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Gain {
    /// Gain law driven by the measured power of the scaled waveform.
    Agc(AgcParams),
    /// Fixed linear amplitude factor.
    Fixed(f64),
}

/// Absolute-power link parameters of Model 3.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Model3Link {
    /// Amplitude mapping model units to the absolute waveform (W^½).
    pub rf_scale: f64,
    pub gain: Gain,
    /// Comparator resolution threshold.
    pub threshold: f64,
}

impl Model3Link {
    /// The link that reduces Model 3 to Model 2.
    pub fn ideal() -> Self {
        Model3Link {
            rf_scale: 1.0,
            gain: Gain::Fixed(1.0),
            threshold: 0.0,
        }
    }
}

#[derive(Debug, Clone)]
pub struct Model3Output {
    pub obs: Observation,
    /// Measured RF power in dBW before the AGC.
    pub p_rf_dbw: f64,
    pub gain_db: f64,
    pub flipped: usize,
}

fn quantize(y: &[f64], d: &[f64]) -> Observation {
    assert_eq!(y.len(), d.len());
    Observation::new(y.iter().zip(d).map(|(a, b)| sgn(a + b)).collect())
}

pub fn simulate_model1(op: &ForwardOperator, h: &[C64], d: &[f64]) -> Observation {
    quantize(&op.rf_waveform(h, None), d)
}

pub fn simulate_model2(op: &ForwardOperator, h: &[C64], w: &[C64], d: &[f64]) -> Observation {
    quantize(&op.rf_waveform(h, Some(w)), d)
}

pub fn simulate_model3<R: Rng + ?Sized>(
    op: &ForwardOperator,
    h: &[C64],
    w: &[C64],
    d: &[f64],
    link: &Model3Link,
    rng: &mut R,
) -> Observation {
    simulate_model3_detailed(op, h, w, d, link, rng).obs
}

pub fn simulate_model3_detailed<R: Rng + ?Sized>(
    op: &ForwardOperator,
    h: &[C64],
    w: &[C64],
    d: &[f64],
    link: &Model3Link,
    rng: &mut R,
) -> Model3Output {
    let mut y = op.rf_waveform(h, Some(w));
    if link.rf_scale != 1.0 {
        y.iter_mut().for_each(|v| *v *= link.rf_scale);
    }
    let p_rf_dbw = lin_to_db(measure_rf_power(&y));
    let (a, gain_db) = match link.gain {
        Gain::Agc(agc) => (agc_amplitude(p_rf_dbw, &agc), agc_gain(p_rf_dbw, &agc)),
        Gain::Fixed(a) => (a, 20.0 * a.log10()),
    };
    let v: Vec<f64> = y.iter().zip(d).map(|(yi, di)| a * yi + di).collect();
    let z: Vec<i8> = v.iter().map(|&x| sgn(x)).collect();
    let flipped_z = apply_comparator_flips(rng, &v, &z, link.threshold);
    let flipped = z.iter().zip(&flipped_z).filter(|(a, b)| a != b).count();
    Model3Output {
        obs: Observation::new(flipped_z),
        p_rf_dbw,
        gain_db,
        flipped,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::SystemConfig;
    use crate::model::sampling::Draws;
    use crate::rng;

    fn op() -> ForwardOperator {
        ForwardOperator::from_config(&SystemConfig::default()).unwrap()
    }

    #[test]
    fn positive_dither_dominates_zero_channel() {
        let op = op();
        let h = vec![C64::new(0.0, 0.0); 9];
        let d = vec![0.1; op.rows()];
        assert!(simulate_model1(&op, &h, &d).z().iter().all(|&z| z == 1));
    }

    #[test]
    fn no_dither_gives_sign_of_signal() {
        let op = op();
        let mut r = rng::stream(1, &[]);
        let dr = Draws::new(&mut r, &op);
        let z = simulate_model1(&op, &dr.h, &vec![0.0; op.rows()]);
        let mh = op.apply(&dr.h);
        for i in 0..op.rows() {
            assert_eq!(z.z()[i], sgn(std::f64::consts::SQRT_2 * mh[i].re));
        }
    }

    #[test]
    fn reduction_chain_is_bit_exact() {
        let op = op();
        for k in 0..20 {
            let dr = Draws::new(&mut rng::stream(7, &[k]), &op);
            let d = dr.dither(0.3);
            let z1 = simulate_model1(&op, &dr.h, &d);
            let z2 = simulate_model2(&op, &dr.h, &dr.noise(0.0), &d);
            assert_eq!(z1, z2);
            let w = dr.noise(0.05);
            let z2 = simulate_model2(&op, &dr.h, &w, &d);
            let z3 = simulate_model3(&op, &dr.h, &w, &d, &Model3Link::ideal(), &mut rng::stream(8, &[k]));
            assert_eq!(z2, z3);
        }
    }

    #[test]
    fn joint_sign_flip_flips_output() {
        let op = op();
        for k in 0..100 {
            let dr = Draws::new(&mut rng::stream(3, &[k]), &op);
            let (w, d) = (dr.noise(0.1), dr.dither(0.2));
            let z = simulate_model2(&op, &dr.h, &w, &d);
            let neg = |v: &[C64]| v.iter().map(|x| -x).collect::<Vec<_>>();
            let dn: Vec<f64> = d.iter().map(|x| -x).collect();
            let zn = simulate_model2(&op, &neg(&dr.h), &neg(&w), &dn);
            let y = op.rf_waveform(&dr.h, Some(&w));
            for i in 0..op.rows() {
                // sgn(0) = +1 on both sides only if the pre-sign value is exactly 0
                if y[i] + d[i] != 0.0 {
                    assert_eq!(z.z()[i], -zn.z()[i]);
                }
            }
        }
    }

    #[test]
    fn joint_positive_scaling_is_invisible() {
        let op = op();
        for k in 0..20 {
            let dr = Draws::new(&mut rng::stream(4, &[k]), &op);
            let z = simulate_model2(&op, &dr.h, &dr.noise(0.1), &dr.dither(0.2));
            let g = 3.7f64;
            let h: Vec<C64> = dr.h.iter().map(|x| x * g).collect();
            let zs = simulate_model2(&op, &h, &dr.noise(0.1 * g * g), &dr.dither(0.2 * g * g));
            assert_eq!(z, zs);
        }
    }

    #[test]
    fn agc_at_target_gives_unit_gain() {
        let op = op();
        let dr = Draws::new(&mut rng::stream(5, &[]), &op);
        let w = dr.noise(0.01);
        let y = op.rf_waveform(&dr.h, Some(&w));
        // scale the waveform so its measured power is exactly -53 dBW
        let scale = (10f64.powf(-5.3) / measure_rf_power(&y)).sqrt();
        let link = Model3Link {
            rf_scale: scale,
            gain: Gain::Agc(AgcParams::default()),
            threshold: 0.0,
        };
        let out = simulate_model3_detailed(&op, &dr.h, &w, &dr.dither(1e-6), &link, &mut rng::stream(0, &[]));
        assert!((out.p_rf_dbw + 53.0).abs() < 1e-9);
        assert!(out.gain_db.abs() < 1e-9);
        assert_eq!(out.flipped, 0);
    }

    #[test]
    fn weak_input_is_amplified_by_max_gain() {
        let op = op();
        let dr = Draws::new(&mut rng::stream(6, &[]), &op);
        let w = dr.noise(0.01);
        let y = op.rf_waveform(&dr.h, Some(&w));
        let scale = (1e-8f64 / measure_rf_power(&y)).sqrt();
        let link = Model3Link {
            rf_scale: scale,
            gain: Gain::Agc(AgcParams::default()),
            threshold: 0.0,
        };
        let d = dr.dither(1e-9);
        let out = simulate_model3_detailed(&op, &dr.h, &w, &d, &link, &mut rng::stream(0, &[]));
        assert!((out.p_rf_dbw + 80.0).abs() < 1e-9);
        assert_eq!(out.gain_db, 15.0);
        let a = 10f64.powf(0.75);
        let expect: Vec<i8> = y.iter().zip(&d).map(|(yi, di)| sgn(a * scale * yi + di)).collect();
        assert_eq!(out.obs.z(), &expect[..]);
    }
}

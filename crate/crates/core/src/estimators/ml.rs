//! ML channel-estimation objective for sign observations.
//!
//! With x_i = Re{m_iᵀh} and the bin (q_low_i, q_up_i) of z_i, the exact
//! objective is Σ -ln[Φ(√ρ(q_up_i - x_i)) - Φ(√ρ(q_low_i - x_i))], ρ = √(2/Ed).
//! The smoothed one replaces Φ(t) by σ(c·t) with c = 1.702.

use super::special::{exp_fast, inverse_mills, log_ndtr, sigmoid, softplus};
use crate::error::{Error, Result};
use crate::model::{ForwardOperator, Observation, Threshold, C64};

/// Slope of the logistic approximation Φ(t) ≈ σ(1.702·t).
pub const SIGMOID_C: f64 = 1.702;

/// (q_low, q_up) for every entry of `z`.
pub fn thresholds_from_obs(obs: &Observation) -> (Vec<Threshold>, Vec<Threshold>) {
    (0..obs.len()).map(|i| obs.bin(i)).unzip()
}

/// σ(β·q_edge - β·x) for an edge tag; the finite edge is always 0.
#[inline]
fn sigma_edge(edge: Threshold, beta: f64, sig_finite: f64) -> f64 {
    let step = |b: f64| {
        if b > 0.0 {
            1.0
        } else if b < 0.0 {
            0.0
        } else {
            0.5
        }
    };
    match edge {
        Threshold::PosInf => step(beta),
        Threshold::NegInf => step(-beta),
        Threshold::Zero => sig_finite,
    }
}

/// Bracket 1 - σ(β(q_up - x)) - σ(β(q_low - x)) of the gradient for a ±1
/// entry, returned with σ(-βx) (needed by the reverse pass).
#[inline]
pub(crate) fn bracket(z: i8, beta: f64, x: f64) -> (f64, f64) {
    let sig = sigmoid(-beta * x);
    let (low, up) = if z > 0 {
        (Threshold::Zero, Threshold::PosInf)
    } else {
        (Threshold::NegInf, Threshold::Zero)
    };
    (1.0 - sigma_edge(up, beta, sig) - sigma_edge(low, beta, sig), sig)
}

/// Slice form of [`bracket`]: writes b into `b` and σ(-βx) into `sig`.
///
/// For z = +1 the bracket is 1 - step(β) - σ(-βx), for z = -1 it is
/// 1 - step(-β) - σ(-βx); the loop is branch-free so it vectorizes.
pub(crate) fn bracket_slice(z: &[i8], beta: f64, x: &[f64], b: &mut [f64], sig: &mut [f64]) {
    let off_pos = 1.0 - sigma_edge(Threshold::PosInf, beta, 0.0);
    let off_neg = 1.0 - sigma_edge(Threshold::NegInf, beta, 0.0);
    for i in 0..x.len() {
        let s = 1.0 / (1.0 + exp_fast(beta * x[i]));
        sig[i] = s;
        b[i] = if z[i] > 0 { off_pos } else { off_neg } - s;
    }
}

/// [`bracket_slice`] at x = 0, where σ(0) = ½ exactly; same bits.
pub(crate) fn bracket_at_zero(z: &[i8], beta: f64, b: &mut [f64], sig: &mut [f64]) {
    let off_pos = 1.0 - sigma_edge(Threshold::PosInf, beta, 0.0);
    let off_neg = 1.0 - sigma_edge(Threshold::NegInf, beta, 0.0);
    for i in 0..z.len() {
        sig[i] = 0.5;
        b[i] = if z[i] > 0 { off_pos } else { off_neg } - 0.5;
    }
}

/// Measurement operator, observation, and the constants of the objective.
#[derive(Debug, Clone)]
pub struct MlProblem<'a> {
    op: &'a ForwardOperator,
    obs: &'a Observation,
    q_low: Vec<Threshold>,
    q_up: Vec<Threshold>,
    rho: f64,
    c: f64,
}

impl<'a> MlProblem<'a> {
    /// Fails for `ed <= 0`, where ρ = √(2/Ed) is undefined.
    pub fn new(op: &'a ForwardOperator, obs: &'a Observation, ed: f64) -> Result<Self> {
        if !(ed > 0.0 && ed.is_finite()) {
            return Err(Error::Parameter(format!(
                "dither power Ed = {ed} must be positive for the ML objective"
            )));
        }
        if obs.len() != op.rows() {
            return Err(Error::Dimension(format!(
                "observation length {} does not match N·Np = {}",
                obs.len(),
                op.rows()
            )));
        }
        let (q_low, q_up) = thresholds_from_obs(obs);
        Ok(MlProblem {
            op,
            obs,
            q_low,
            q_up,
            rho: (2.0 / ed).sqrt(),
            c: SIGMOID_C,
        })
    }

    pub fn op(&self) -> &'a ForwardOperator {
        self.op
    }

    pub fn obs(&self) -> &'a Observation {
        self.obs
    }

    pub fn rho(&self) -> f64 {
        self.rho
    }

    pub fn c(&self) -> f64 {
        self.c
    }

    pub fn q_low(&self) -> &[Threshold] {
        &self.q_low
    }

    pub fn q_up(&self) -> &[Threshold] {
        &self.q_up
    }

    /// Slope c·√ρ at which the smoothed objective is defined.
    pub fn smoothed_slope(&self) -> f64 {
        self.c * self.rho.sqrt()
    }

    fn projections(&self, h: &[C64]) -> Vec<f64> {
        let mut x = vec![0.0; self.op.rows()];
        self.op.apply_re(h, &mut x);
        x
    }

    /// Sign carried by the bin of entry i (+1 for (0, ∞), -1 for (-∞, 0)).
    fn bin_sign(&self, i: usize) -> f64 {
        match (self.q_low[i], self.q_up[i]) {
            (Threshold::Zero, Threshold::PosInf) => 1.0,
            (Threshold::NegInf, Threshold::Zero) => -1.0,
            (lo, up) => unreachable!("bin ({lo:?}, {up:?}) is not a 1-bit bin"),
        }
    }
}

/// Exact negative log-likelihood. Saturates to +∞, never NaN.
pub fn objective_exact(h: &[C64], prob: &MlProblem) -> f64 {
    let a = prob.rho.sqrt();
    prob.projections(h)
        .iter()
        .enumerate()
        .map(|(i, &x)| -log_ndtr(prob.bin_sign(i) * a * x))
        .sum()
}

/// Objective with Φ replaced by the logistic approximation.
pub fn objective_smoothed(h: &[C64], prob: &MlProblem) -> f64 {
    let beta = prob.smoothed_slope();
    prob.projections(h)
        .iter()
        .enumerate()
        .map(|(i, &x)| softplus(-prob.bin_sign(i) * beta * x))
        .sum()
}

/// Wirtinger gradient ∂/∂h* of the smoothed objective taken at logistic slope
/// `beta`: (β/2)·Mᴴ·[1 - σ(β(q_up - x)) - σ(β(q_low - x))]. With
/// β = c·√ρ this is the gradient of [`objective_smoothed`].
pub fn gradient_wirtinger(h: &[C64], prob: &MlProblem, beta: f64) -> Vec<C64> {
    let x = prob.projections(h);
    let b: Vec<f64> = x
        .iter()
        .zip(prob.obs.z())
        .map(|(&xi, &zi)| bracket(zi, beta, xi).0)
        .collect();
    let mut g = vec![C64::new(0.0, 0.0); prob.op.cols()];
    prob.op.adjoint_re(&b, &mut g);
    g.iter_mut().for_each(|v| *v *= beta / 2.0);
    g
}

/// Wirtinger gradient ∂/∂h* of [`objective_exact`].
pub fn gradient_exact(h: &[C64], prob: &MlProblem) -> Vec<C64> {
    let a = prob.rho.sqrt();
    let x = prob.projections(h);
    // d/dx_i of -ln Φ(s a x_i) = -s a φ/Φ
    let dx: Vec<f64> = x
        .iter()
        .enumerate()
        .map(|(i, &xi)| {
            let s = prob.bin_sign(i);
            -s * a * inverse_mills(s * a * xi)
        })
        .collect();
    let mut g = vec![C64::new(0.0, 0.0); prob.op.cols()];
    prob.op.adjoint_re(&dx, &mut g);
    g.iter_mut().for_each(|v| *v *= 0.5);
    g
}

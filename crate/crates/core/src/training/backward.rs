//! Reverse-mode derivative of the training loss through the unrolled layers.
//!
//! The channel estimate is treated as a real 2·S·U state; complex adjoints
//! below hold ∂L/∂Re + j·∂L/∂Im. Per layer, with x = Re{Mh},
//! b_i = 1 - σ(β(q_up - x_i)) - σ(β(q_low - x_i)) and h' = h - α·Mᴴb:
//!
//! - ∂L/∂α = -⟨ḡ', Mᴴb⟩
//! - b̄ = -α·Re{M ḡ'}, x̄ = b̄·β·s(1 - s), ∂L/∂β = Σ b̄·x·s(1 - s), s = σ(-βx)
//! - ḡ = ḡ' + Mᴴx̄

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::estimators::{bracket_at_zero, bracket_slice, UnfoldedParams};
use crate::model::{ForwardOperator, Observation, C64};

/// ‖h_true - h_est‖₂.
pub fn loss(h_true: &[C64], h_est: &[C64]) -> f64 {
    assert_eq!(h_true.len(), h_est.len());
    h_true
        .iter()
        .zip(h_est)
        .map(|(a, b)| (a - b).norm_sqr())
        .sum::<f64>()
        .sqrt()
}

#[derive(Debug, Clone)]
pub struct TrainSample {
    pub obs: Observation,
    pub h: Vec<C64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BatchGradient {
    /// Mean loss over the batch.
    pub loss: f64,
    /// Gradient of the mean loss, laid out as [α_1, β_1, α_2, β_2, ...].
    pub grad: Vec<f64>,
}

struct LayerTape {
    x: Vec<f64>,
    sig: Vec<f64>,
    step: Vec<C64>,
}

/// Loss and its gradient for one sample.
pub fn sample_loss_grad(params: &UnfoldedParams, op: &ForwardOperator, obs: &Observation, h_true: &[C64]) -> (f64, Vec<f64>) {
    let layers = params.layers();
    let (rows, cols) = (op.rows(), op.cols());
    let mut tape = Vec::with_capacity(layers);
    let mut h = vec![C64::new(0.0, 0.0); cols];
    let mut b = vec![0.0; rows];
    for l in 0..layers {
        let (alpha, beta) = (params.alpha[l], params.beta[l]);
        let mut x = vec![0.0; rows];
        let mut sig = vec![0.0; rows];
        if l == 0 && beta.is_finite() {
            // h = 0, so x = 0
            bracket_at_zero(obs.z(), beta, &mut b, &mut sig);
        } else {
            op.apply_re(&h, &mut x);
            bracket_slice(obs.z(), beta, &x, &mut b, &mut sig);
        }
        let mut step = vec![C64::new(0.0, 0.0); cols];
        op.adjoint_re(&b, &mut step);
        for (hk, sk) in h.iter_mut().zip(&step) {
            *hk -= sk * alpha;
        }
        tape.push(LayerTape { x, sig, step });
    }

    let err: Vec<C64> = h.iter().zip(h_true).map(|(a, b)| a - b).collect();
    let l = err.iter().map(|e| e.norm_sqr()).sum::<f64>().sqrt();
    let mut g: Vec<C64> = if l > 0.0 {
        err.iter().map(|e| e / l).collect()
    } else {
        vec![C64::new(0.0, 0.0); cols]
    };

    let mut grad = vec![0.0; 2 * layers];
    let mut r = vec![0.0; rows];
    let mut xbar = vec![0.0; rows];
    let mut back = vec![C64::new(0.0, 0.0); cols];
    for l in (0..layers).rev() {
        let (alpha, beta) = (params.alpha[l], params.beta[l]);
        let t = &tape[l];
        grad[2 * l] = -g.iter().zip(&t.step).map(|(a, b)| a.re * b.re + a.im * b.im).sum::<f64>();
        if l == 0 {
            // x = 0: β₁ has no effect and ḡ is not needed further back
            break;
        }
        op.apply_re(&g, &mut r);
        let mut dbeta = 0.0;
        for i in 0..rows {
            let bbar = -alpha * r[i];
            let ds = t.sig[i] * (1.0 - t.sig[i]);
            xbar[i] = bbar * beta * ds;
            dbeta += bbar * t.x[i] * ds;
        }
        grad[2 * l + 1] = dbeta;
        op.adjoint_re(&xbar, &mut back);
        for (gk, bk) in g.iter_mut().zip(&back) {
            *gk += bk;
        }
    }
    (l, grad)
}

/// Mean loss over a batch, forward pass only.
pub fn batch_loss(params: &UnfoldedParams, op: &ForwardOperator, batch: &[TrainSample]) -> f64 {
    let losses: Vec<f64> = batch
        .par_iter()
        .map(|s| loss(&s.h, &crate::estimators::unfolded_forward(params, op, &s.obs)))
        .collect();
    losses.iter().sum::<f64>() / batch.len() as f64
}

/// Gradient of the mean batch loss with respect to every (α_ℓ, β_ℓ).
pub fn backward(params: &UnfoldedParams, op: &ForwardOperator, batch: &[TrainSample]) -> Result<BatchGradient> {
    if batch.is_empty() {
        return Err(Error::Parameter("empty batch".into()));
    }
    let per_sample: Vec<(f64, Vec<f64>)> = batch
        .par_iter()
        .map(|s| sample_loss_grad(params, op, &s.obs, &s.h))
        .collect();
    reduce(per_sample, params.layers())
}

/// Fixed-order mean of per-sample (loss, gradient) pairs.
pub(crate) fn reduce(per_sample: Vec<(f64, Vec<f64>)>, layers: usize) -> Result<BatchGradient> {
    let n = per_sample.len() as f64;
    let mut loss = 0.0;
    let mut grad = vec![0.0; 2 * layers];
    for (l, g) in &per_sample {
        loss += l;
        for (a, b) in grad.iter_mut().zip(g) {
            *a += b;
        }
    }
    grad.iter_mut().for_each(|v| *v /= n);
    if let Some(i) = grad.iter().position(|v| !v.is_finite()) {
        return Err(Error::NonFiniteGradient { layer: i / 2 + 1 });
    }
    Ok(BatchGradient { loss: loss / n, grad })
}

//! Deep-unfolded gradient descent: each layer is one descent step
//! h ← h - α·Mᴴ·[1 - σ(β(q_up - Re{Mh})) - σ(β(q_low - Re{Mh}))]
//! with its own trainable (α, β).

use std::io::{BufRead, Write};

use super::ml::{bracket_at_zero, bracket_slice};
use crate::error::{Error, Result};
use crate::model::{ForwardOperator, Observation, C64};

#[derive(Debug, Clone, PartialEq)]
pub struct UnfoldedParams {
    pub alpha: Vec<f64>,
    pub beta: Vec<f64>,
}

impl UnfoldedParams {
    pub fn new(layers: usize, alpha: f64, beta: f64) -> Self {
        assert!(layers >= 1, "at least one layer");
        UnfoldedParams {
            alpha: vec![alpha; layers],
            beta: vec![beta; layers],
        }
    }

    pub fn layers(&self) -> usize {
        self.alpha.len()
    }

    /// Parameters as one vector [α_1, β_1, α_2, β_2, ...].
    pub fn flatten(&self) -> Vec<f64> {
        self.alpha.iter().zip(&self.beta).flat_map(|(&a, &b)| [a, b]).collect()
    }

    pub fn from_flat(flat: &[f64]) -> Self {
        assert!(flat.len() >= 2 && flat.len() % 2 == 0);
        UnfoldedParams {
            alpha: flat.iter().step_by(2).copied().collect(),
            beta: flat.iter().skip(1).step_by(2).copied().collect(),
        }
    }

    /// Writes the checkpoint: a `layers=L config_hash=H` header, then one
    /// `alpha beta` line per layer in shortest round-trip decimal form.
    pub fn write_checkpoint<W: Write>(&self, mut out: W, config_hash: &str) -> Result<()> {
        writeln!(out, "layers={} config_hash={}", self.layers(), config_hash)?;
        for (a, b) in self.alpha.iter().zip(&self.beta) {
            writeln!(out, "{a:?} {b:?}")?;
        }
        Ok(())
    }

    /// Returns the parameters and the config hash stored in the header.
    pub fn read_checkpoint<R: BufRead>(input: R) -> Result<(Self, String)> {
        let bad = |msg: String| Error::Format {
            what: "checkpoint",
            msg,
        };
        let mut lines = input.lines();
        let header = lines.next().ok_or_else(|| bad("empty file".into()))??;
        let mut layers = None;
        let mut hash = None;
        for field in header.split_whitespace() {
            match field.split_once('=') {
                Some(("layers", v)) => layers = v.parse::<usize>().ok(),
                Some(("config_hash", v)) => hash = Some(v.to_string()),
                _ => return Err(bad(format!("unexpected header field `{field}`"))),
            }
        }
        let layers = layers.ok_or_else(|| bad("missing layers".into()))?;
        let hash = hash.ok_or_else(|| bad("missing config_hash".into()))?;
        let mut alpha = Vec::with_capacity(layers);
        let mut beta = Vec::with_capacity(layers);
        for line in lines {
            let line = line?;
            if line.trim().is_empty() {
                continue;
            }
            let mut it = line.split_whitespace();
            let (Some(a), Some(b), None) = (it.next(), it.next(), it.next()) else {
                return Err(bad(format!("bad layer line `{line}`")));
            };
            let parse = |s: &str| s.parse::<f64>().map_err(|e| bad(format!("`{s}`: {e}")));
            alpha.push(parse(a)?);
            beta.push(parse(b)?);
        }
        if alpha.len() != layers || layers == 0 {
            return Err(bad(format!("header says {layers} layers, found {}", alpha.len())));
        }
        Ok((UnfoldedParams { alpha, beta }, hash))
    }
}

/// One unfolded layer (descent sign).
pub fn unfolded_layer(h_prev: &[C64], alpha: f64, beta: f64, op: &ForwardOperator, obs: &Observation) -> Vec<C64> {
    let mut b = vec![0.0; op.rows()];
    let mut sig = vec![0.0; op.rows()];
    if is_origin(h_prev) && beta.is_finite() {
        // the first layer: Re{M·0} = 0
        bracket_at_zero(obs.z(), beta, &mut b, &mut sig);
    } else {
        let mut x = vec![0.0; op.rows()];
        op.apply_re(h_prev, &mut x);
        bracket_slice(obs.z(), beta, &x, &mut b, &mut sig);
    }
    let mut step = vec![C64::new(0.0, 0.0); op.cols()];
    op.adjoint_re(&b, &mut step);
    h_prev.iter().zip(&step).map(|(h, s)| h - s * alpha).collect()
}

fn is_origin(h: &[C64]) -> bool {
    h.iter().all(|v| v.re == 0.0 && v.im == 0.0)
}

/// All layers from h = 0.
pub fn unfolded_forward(params: &UnfoldedParams, op: &ForwardOperator, obs: &Observation) -> Vec<C64> {
    let mut h = vec![C64::new(0.0, 0.0); op.cols()];
    for (&a, &b) in params.alpha.iter().zip(&params.beta) {
        h = unfolded_layer(&h, a, b, op, obs);
    }
    h
}

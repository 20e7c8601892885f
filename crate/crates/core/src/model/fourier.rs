use std::f64::consts::PI;

use nalgebra::DMatrix;

use super::C64;
use crate::error::{Error, Result};

/// Occupied IDFT bins for `s` (odd) bins out of `n`: DC, the (s-1)/2 positive
/// and the (s-1)/2 negative frequencies, in that order.
pub fn occupied_bins(n: usize, s: usize) -> Result<Vec<usize>> {
    if s % 2 == 0 {
        return Err(Error::Dimension(format!("S = {s} must be odd")));
    }
    if s > n {
        return Err(Error::Dimension(format!("S = {s} exceeds N = {n}")));
    }
    let half = (s - 1) / 2;
    Ok((0..=half).chain(n - half..n).collect())
}

/// Unitary N-point IDFT restricted to the occupied bins (N×S).
pub fn build_fourier_operator(n: usize, s: usize) -> Result<DMatrix<C64>> {
    let bins = occupied_bins(n, s)?;
    let scale = 1.0 / (n as f64).sqrt();
    Ok(DMatrix::from_fn(n, s, |row, col| {
        // reduce n*k mod N before scaling to keep the phase exact for large N
        let phase = 2.0 * PI * ((row * bins[col]) % n) as f64 / n as f64;
        C64::from_polar(scale, phase)
    }))
}

/// Up-conversion vector u_n = exp(j 2π (fc/fs) n).
pub fn build_upconversion(n: usize, fc: f64, fs: f64) -> Result<Vec<C64>> {
    if !(fs > 0.0) {
        return Err(Error::Parameter(format!("sampling rate {fs} must be positive")));
    }
    let ratio = fc / fs;
    Ok((0..n)
        .map(|i| {
            let cycles = (ratio * i as f64).fract();
            C64::from_polar(1.0, 2.0 * PI * cycles)
        })
        .collect())
}

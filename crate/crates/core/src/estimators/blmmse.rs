//! Bussgang LMMSE baseline.
//!
//! The pre-sign signal r = √2·Re{M h} + √2·Re{A_w w} + d is zero-mean
//! Gaussian with covariance Σ_r = Re{M Mᴴ} + N0·Re{A_w A_wᴴ} + (Ed/2)·I.
//! For z = sgn(r):
//!
//! - Bussgang gain A = √(2/π)·diag(Σ_r)^(-1/2), so C_hz = E[h zᵀ] = Mᴴ·A/√2;
//! - arcsine law C_z(i,j) = (2/π)·asin(Σ_r(i,j)/√(Σ_r(i,i)·Σ_r(j,j)));
//! - W = C_hz·C_z⁻¹ and ĥ = W·z.

use std::f64::consts::{FRAC_1_SQRT_2, FRAC_2_PI};

use nalgebra::{Cholesky, DMatrix, Dyn};

use crate::error::{Error, Result};
use crate::model::{ForwardOperator, Observation, C64};

/// Relative diagonal loadings tried, in order, when C_z is numerically
/// indefinite.
const JITTER: [f64; 4] = [0.0, 1e-12, 1e-10, 1e-8];

#[derive(Debug, Clone)]
pub struct Blmmse {
    w: DMatrix<C64>,
    predicted_mse: f64,
}

/// Intermediate matrices of the Bussgang construction.
#[derive(Debug, Clone)]
pub struct BlmmseParts {
    pub sigma_r: DMatrix<f64>,
    pub c_z: DMatrix<f64>,
    pub c_hz: DMatrix<C64>,
    pub estimator: Blmmse,
    /// Diagonal loading that was needed for the solve.
    pub jitter: f64,
}

/// Bussgang LMMSE matrix for Model-2 statistics (noise power `n0`, dither
/// power `ed`).
pub fn blmmse_build(op: &ForwardOperator, n0: f64, ed: f64) -> Result<Blmmse> {
    Ok(Blmmse::build_parts(op, n0, ed)?.estimator)
}

impl Blmmse {
    pub fn build_parts(op: &ForwardOperator, n0: f64, ed: f64) -> Result<BlmmseParts> {
        if !(ed > 0.0 || n0 > 0.0) || ed < 0.0 || n0 < 0.0 {
            return Err(Error::NotPositiveDefinite(format!(
                "need Ed > 0 or N0 > 0, got Ed = {ed}, N0 = {n0}"
            )));
        }
        let rows = op.rows();
        let sigma_r = op.presign_covariance(n0, ed);
        let inv_sd: Vec<f64> = (0..rows)
            .map(|i| {
                let v = sigma_r[(i, i)];
                if v > 0.0 {
                    Ok(1.0 / v.sqrt())
                } else {
                    Err(Error::NotPositiveDefinite(format!(
                        "zero variance at sample {i} (Ed = {ed}, N0 = {n0})"
                    )))
                }
            })
            .collect::<Result<_>>()?;

        let mut c_z = DMatrix::<f64>::zeros(rows, rows);
        for j in 0..rows {
            for i in 0..rows {
                let corr = (sigma_r[(i, j)] * inv_sd[i] * inv_sd[j]).clamp(-1.0, 1.0);
                c_z[(i, j)] = if i == j { 1.0 } else { FRAC_2_PI * corr.asin() };
            }
        }

        // C_hz = Mᴴ A / √2, A = √(2/π) diag(Σ_r)^(-1/2)
        let gain = (FRAC_2_PI).sqrt() * FRAC_1_SQRT_2;
        let m = op.matrix();
        let c_hz = DMatrix::from_fn(op.cols(), rows, |k, i| m[(i, k)].conj() * (gain * inv_sd[i]));

        let (chol, jitter) = factor_with_jitter(&c_z).ok_or_else(|| {
            Error::NotPositiveDefinite(format!("sign covariance indefinite after loading (Ed = {ed}, N0 = {n0})"))
        })?;

        // W = C_hz C_z⁻¹  ⇔  Wᵀ = C_z⁻¹ C_hzᵀ; solve real and imaginary parts together
        let cols = op.cols();
        let mut rhs = DMatrix::<f64>::zeros(rows, 2 * cols);
        for k in 0..cols {
            for i in 0..rows {
                rhs[(i, k)] = c_hz[(k, i)].re;
                rhs[(i, cols + k)] = c_hz[(k, i)].im;
            }
        }
        chol.solve_mut(&mut rhs);
        let w = DMatrix::from_fn(cols, rows, |k, i| C64::new(rhs[(i, k)], rhs[(i, cols + k)]));

        // E‖h - Wz‖² = tr(C_h) - Re tr(W C_hzᴴ)
        let mut explained = 0.0;
        for k in 0..cols {
            for i in 0..rows {
                explained += (w[(k, i)] * c_hz[(k, i)].conj()).re;
            }
        }
        let predicted_mse = cols as f64 - explained;

        Ok(BlmmseParts {
            sigma_r,
            c_z,
            c_hz,
            estimator: Blmmse { w, predicted_mse },
            jitter,
        })
    }

    pub fn from_matrix(w: DMatrix<C64>) -> Self {
        Blmmse {
            w,
            predicted_mse: f64::NAN,
        }
    }

    pub fn matrix(&self) -> &DMatrix<C64> {
        &self.w
    }

    /// Model-based MSE E‖h - ĥ‖² (NaN for matrices not built here).
    pub fn predicted_mse(&self) -> f64 {
        self.predicted_mse
    }

    pub fn estimate(&self, obs: &Observation) -> Vec<C64> {
        assert_eq!(obs.len(), self.w.ncols());
        let mut out = vec![C64::new(0.0, 0.0); self.w.nrows()];
        for (i, &z) in obs.z().iter().enumerate() {
            let col = self.w.column(i);
            if z > 0 {
                out.iter_mut().zip(col.iter()).for_each(|(o, w)| *o += w);
            } else {
                out.iter_mut().zip(col.iter()).for_each(|(o, w)| *o -= w);
            }
        }
        out
    }
}

fn factor_with_jitter(c: &DMatrix<f64>) -> Option<(Cholesky<f64, Dyn>, f64)> {
    let n = c.nrows();
    let mean_diag = (0..n).map(|i| c[(i, i)]).sum::<f64>() / n as f64;
    for rel in JITTER {
        let mut m = c.clone();
        for i in 0..n {
            m[(i, i)] += rel * mean_diag;
        }
        if let Some(ch) = Cholesky::new(m) {
            return Some((ch, rel));
        }
    }
    None
}

impl BlmmseParts {
    /// ‖W·C_z - C_hz‖_F / ‖C_hz‖_F.
    pub fn normal_equation_residual(&self) -> f64 {
        let w = &self.estimator.w;
        let rows = self.c_z.nrows();
        let mut num = 0.0;
        let mut den = 0.0;
        for k in 0..w.nrows() {
            for j in 0..rows {
                let mut acc = C64::new(0.0, 0.0);
                for i in 0..rows {
                    acc += w[(k, i)] * self.c_z[(i, j)];
                }
                num += (acc - self.c_hz[(k, j)]).norm_sqr();
                den += self.c_hz[(k, j)].norm_sqr();
            }
        }
        (num / den).sqrt()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{build_fourier_operator, build_upconversion, qpsk_pilots};

    fn tiny() -> ForwardOperator {
        ForwardOperator::new(
            build_fourier_operator(4, 1).unwrap(),
            build_upconversion(4, 2.4e9, 1e10).unwrap(),
            qpsk_pilots(1, 2, 1.0, 3),
        )
        .unwrap()
    }

    #[test]
    fn sign_covariance_has_unit_diagonal() {
        let parts = Blmmse::build_parts(&tiny(), 0.1, 0.5).unwrap();
        for i in 0..8 {
            assert_eq!(parts.c_z[(i, i)], 1.0);
        }
        assert_eq!(parts.jitter, 0.0);
    }

    #[test]
    fn normal_equations_hold() {
        let parts = Blmmse::build_parts(&tiny(), 0.0, 0.5).unwrap();
        assert!(parts.normal_equation_residual() <= 1e-8);
    }

    #[test]
    fn degenerate_covariance_rejected() {
        assert!(matches!(
            blmmse_build(&tiny(), 0.0, 0.0),
            Err(Error::NotPositiveDefinite(_))
        ));
    }

    #[test]
    fn huge_dither_shrinks_estimator() {
        let op = tiny();
        let small = blmmse_build(&op, 0.0, 1e8).unwrap();
        assert!(small.matrix().iter().all(|v| v.norm() < 1e-3));
        let big = blmmse_build(&op, 0.0, 1.0).unwrap();
        assert!(big.matrix().iter().any(|v| v.norm() > 1e-2));
    }

    #[test]
    fn predicted_mse_within_prior() {
        let e = blmmse_build(&tiny(), 0.0, 0.5).unwrap();
        assert!(e.predicted_mse() > 0.0 && e.predicted_mse() < 1.0);
    }

    #[test]
    fn estimate_is_matrix_product() {
        let op = tiny();
        let e = blmmse_build(&op, 0.1, 0.5).unwrap();
        let z = Observation::new(vec![1, -1, -1, 1, 1, 1, -1, 1]);
        let zc = nalgebra::DVector::from_iterator(8, z.z().iter().map(|&v| C64::new(v as f64, 0.0)));
        let expect = e.matrix() * zc;
        let got = e.estimate(&z);
        assert!((expect[0] - got[0]).norm() < 1e-14);
    }
}

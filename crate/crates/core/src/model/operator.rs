use std::f64::consts::{FRAC_PI_2, FRAC_PI_4, SQRT_2};

use nalgebra::DMatrix;
use rand::Rng;

use super::fourier::{build_fourier_operator, build_upconversion};
use super::C64;
use crate::config::SystemConfig;
use crate::error::{Error, Result};
use crate::rng;

/// Fixed QPSK pilot matrix (U×Np) with per-symbol power `es`.
pub fn qpsk_pilots(u: usize, np: usize, es: f64, seed: u64) -> DMatrix<C64> {
    let mut r = rng::stream(seed, &[rng::kind::PILOT]);
    let amp = es.sqrt();
    // column-major fill: symbols of pilot 0 for every UE, then pilot 1, ...
    let symbols: Vec<C64> = (0..u * np)
        .map(|_| {
            let k = r.random_range(0..4u32);
            C64::from_polar(amp, FRAC_PI_4 + FRAC_PI_2 * k as f64)
        })
        .collect();
    DMatrix::from_vec(u, np, symbols)
}

const LANES: usize = 4;

/// Measurement operator M = (I ⊗ diag(u)) (I ⊗ F_inv) (Pᵀ ⊗ I_S) together with
/// its factors.
///
/// `M` is materialized for the Bussgang baseline and for checks; the hot
/// paths (`apply_re`, `adjoint_re`, `rf_waveform`) use the Kronecker
/// structure on split real/imaginary copies of diag(u)·F_inv instead, which
/// costs O(N·S·U + N·Np·U) per product.
#[derive(Debug, Clone)]
pub struct ForwardOperator {
    n: usize,
    s: usize,
    np: usize,
    ues: usize,
    f_inv: DMatrix<C64>,
    upconv: Vec<C64>,
    pilots: DMatrix<C64>,
    m: DMatrix<C64>,
    // diag(u)·F_inv, column-major
    uf_re: Vec<f64>,
    uf_im: Vec<f64>,
    // pilots[(ue, p)] at ue * np + p
    p_re: Vec<f64>,
    p_im: Vec<f64>,
}

impl ForwardOperator {
    pub fn new(f_inv: DMatrix<C64>, upconv: Vec<C64>, pilots: DMatrix<C64>) -> Result<Self> {
        let (n, s) = f_inv.shape();
        if upconv.len() != n {
            return Err(Error::Dimension(format!(
                "up-conversion length {} does not match N = {n}",
                upconv.len()
            )));
        }
        let (ues, np) = pilots.shape();
        if ues == 0 || np == 0 {
            return Err(Error::Dimension("empty pilot matrix".into()));
        }
        let mut m = DMatrix::<C64>::zeros(n * np, s * ues);
        for p in 0..np {
            for ue in 0..ues {
                let pu = pilots[(ue, p)];
                for k in 0..s {
                    for t in 0..n {
                        m[(p * n + t, ue * s + k)] = upconv[t] * f_inv[(t, k)] * pu;
                    }
                }
            }
        }
        let mut uf_re = Vec::with_capacity(n * s);
        let mut uf_im = Vec::with_capacity(n * s);
        for k in 0..s {
            for t in 0..n {
                let v = upconv[t] * f_inv[(t, k)];
                uf_re.push(v.re);
                uf_im.push(v.im);
            }
        }
        let mut p_re = Vec::with_capacity(ues * np);
        let mut p_im = Vec::with_capacity(ues * np);
        for ue in 0..ues {
            for p in 0..np {
                p_re.push(pilots[(ue, p)].re);
                p_im.push(pilots[(ue, p)].im);
            }
        }
        Ok(ForwardOperator {
            n,
            s,
            np,
            ues,
            f_inv,
            upconv,
            pilots,
            m,
            uf_re,
            uf_im,
            p_re,
            p_im,
        })
    }

    /// Operator for `cfg`, with the fixed QPSK pilots at power Es.
    pub fn from_config(cfg: &SystemConfig) -> Result<Self> {
        let sys = &cfg.system;
        let f = build_fourier_operator(sys.n, sys.s)?;
        let u = build_upconversion(sys.n, sys.fc_hz, sys.fs_hz)?;
        let p = qpsk_pilots(sys.u, sys.np, cfg.es(), sys.pilot_seed);
        Self::new(f, u, p)
    }

    /// Rows of M (N·Np).
    pub fn rows(&self) -> usize {
        self.n * self.np
    }

    /// Columns of M (S·U).
    pub fn cols(&self) -> usize {
        self.s * self.ues
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn s(&self) -> usize {
        self.s
    }

    pub fn np(&self) -> usize {
        self.np
    }

    pub fn ues(&self) -> usize {
        self.ues
    }

    /// Length of the noise vector w (S·Np).
    pub fn noise_len(&self) -> usize {
        self.s * self.np
    }

    pub fn f_inv(&self) -> &DMatrix<C64> {
        &self.f_inv
    }

    pub fn upconversion(&self) -> &[C64] {
        &self.upconv
    }

    pub fn pilots(&self) -> &DMatrix<C64> {
        &self.pilots
    }

    pub fn matrix(&self) -> &DMatrix<C64> {
        &self.m
    }

    /// g = diag(u)·F_inv·b (length-N, split parts).
    fn synth(&self, b: &[C64], g_re: &mut [f64], g_im: &mut [f64]) {
        let n = self.n;
        for (k, bk) in b.iter().enumerate() {
            let fr = &self.uf_re[k * n..(k + 1) * n];
            let fi = &self.uf_im[k * n..(k + 1) * n];
            if k == 0 {
                for t in 0..n {
                    g_re[t] = fr[t] * bk.re - fi[t] * bk.im;
                    g_im[t] = fr[t] * bk.im + fi[t] * bk.re;
                }
            } else {
                for t in 0..n {
                    g_re[t] += fr[t] * bk.re - fi[t] * bk.im;
                    g_im[t] += fr[t] * bk.im + fi[t] * bk.re;
                }
            }
        }
    }

    /// Complex M·h.
    pub fn apply(&self, h: &[C64]) -> Vec<C64> {
        assert_eq!(h.len(), self.cols());
        let (n, s, np) = (self.n, self.s, self.np);
        let mut out = vec![C64::new(0.0, 0.0); self.rows()];
        let mut g_re = vec![0.0; n];
        let mut g_im = vec![0.0; n];
        for ue in 0..self.ues {
            self.synth(&h[ue * s..(ue + 1) * s], &mut g_re, &mut g_im);
            for p in 0..np {
                let pu = C64::new(self.p_re[ue * np + p], self.p_im[ue * np + p]);
                for (t, o) in out[p * n..(p + 1) * n].iter_mut().enumerate() {
                    *o += C64::new(g_re[t], g_im[t]) * pu;
                }
            }
        }
        out
    }

    /// Re{M·h} into `out`.
    pub fn apply_re(&self, h: &[C64], out: &mut [f64]) {
        assert_eq!(h.len(), self.cols());
        assert_eq!(out.len(), self.rows());
        let (n, s, np) = (self.n, self.s, self.np);
        let mut g_re = vec![0.0; n];
        let mut g_im = vec![0.0; n];
        for ue in 0..self.ues {
            self.synth(&h[ue * s..(ue + 1) * s], &mut g_re, &mut g_im);
            for p in 0..np {
                let (pr, pi) = (self.p_re[ue * np + p], self.p_im[ue * np + p]);
                let o = &mut out[p * n..(p + 1) * n];
                if ue == 0 {
                    for t in 0..n {
                        o[t] = pr * g_re[t] - pi * g_im[t];
                    }
                } else {
                    for t in 0..n {
                        o[t] += pr * g_re[t] - pi * g_im[t];
                    }
                }
            }
        }
    }

    /// Mᴴ·v for a real vector v (length N·Np) into `out` (length S·U).
    pub fn adjoint_re(&self, v: &[f64], out: &mut [C64]) {
        assert_eq!(v.len(), self.rows());
        assert_eq!(out.len(), self.cols());
        let (n, s, np) = (self.n, self.s, self.np);
        let mut a_re = vec![0.0; n];
        let mut a_im = vec![0.0; n];
        for ue in 0..self.ues {
            // a = Σ_p conj(P[ue, p]) v_p
            for p in 0..np {
                let (pr, pi) = (self.p_re[ue * np + p], self.p_im[ue * np + p]);
                let vp = &v[p * n..(p + 1) * n];
                if p == 0 {
                    for t in 0..n {
                        a_re[t] = pr * vp[t];
                        a_im[t] = -pi * vp[t];
                    }
                } else {
                    for t in 0..n {
                        a_re[t] += pr * vp[t];
                        a_im[t] -= pi * vp[t];
                    }
                }
            }
            // out_k = Σ_t conj(uf[t, k]) a_t, summed in LANES interleaved
            // partial sums so the loop vectorizes (order is still fixed)
            for k in 0..s {
                let fr = &self.uf_re[k * n..(k + 1) * n];
                let fi = &self.uf_im[k * n..(k + 1) * n];
                let mut re = [0.0; LANES];
                let mut im = [0.0; LANES];
                let body = n - n % LANES;
                let chunks = fr[..body]
                    .chunks_exact(LANES)
                    .zip(fi[..body].chunks_exact(LANES))
                    .zip(a_re[..body].chunks_exact(LANES).zip(a_im[..body].chunks_exact(LANES)));
                for ((fr4, fi4), (ar4, ai4)) in chunks {
                    let fr4: &[f64; LANES] = fr4.try_into().unwrap();
                    let fi4: &[f64; LANES] = fi4.try_into().unwrap();
                    let ar4: &[f64; LANES] = ar4.try_into().unwrap();
                    let ai4: &[f64; LANES] = ai4.try_into().unwrap();
                    for j in 0..LANES {
                        re[j] += fr4[j] * ar4[j] + fi4[j] * ai4[j];
                        im[j] += fr4[j] * ai4[j] - fi4[j] * ar4[j];
                    }
                }
                let mut re_sum = re.iter().sum::<f64>();
                let mut im_sum = im.iter().sum::<f64>();
                for t in body..n {
                    re_sum += fr[t] * a_re[t] + fi[t] * a_im[t];
                    im_sum += fr[t] * a_im[t] - fi[t] * a_re[t];
                }
                out[ue * s + k] = C64::new(re_sum, im_sum);
            }
        }
    }

    /// Received RF waveform √2·Re{U·F̃_inv·(P̃h + w)}; `w = None` means no noise.
    pub fn rf_waveform(&self, h: &[C64], w: Option<&[C64]>) -> Vec<f64> {
        assert_eq!(h.len(), self.cols());
        let (n, s, np) = (self.n, self.s, self.np);
        if let Some(w) = w {
            assert_eq!(w.len(), self.noise_len());
        }
        let mut y = vec![0.0; self.rows()];
        for p in 0..np {
            let yp = &mut y[p * n..(p + 1) * n];
            for k in 0..s {
                let mut b = match w {
                    Some(w) => w[p * s + k],
                    None => C64::new(0.0, 0.0),
                };
                for ue in 0..self.ues {
                    b += C64::new(self.p_re[ue * np + p], self.p_im[ue * np + p]) * h[ue * s + k];
                }
                let (br, bi) = (SQRT_2 * b.re, SQRT_2 * b.im);
                let fr = &self.uf_re[k * n..(k + 1) * n];
                let fi = &self.uf_im[k * n..(k + 1) * n];
                for t in 0..n {
                    yp[t] += fr[t] * br - fi[t] * bi;
                }
            }
        }
        y
    }

    /// Real covariance of the pre-sign signal √2·Re{U·F̃_inv·(P̃h + w)} + d for
    /// h ~ CN(0, I), w ~ CN(0, n0·I), d ~ N(0, ed/2·I):
    /// Re{M Mᴴ} + n0·Re{A_w A_wᴴ} + (ed/2)·I, with A_w = U·F̃_inv.
    pub fn presign_covariance(&self, n0: f64, ed: f64) -> DMatrix<f64> {
        let rows = self.rows();
        let m = &self.m;
        let mut cov = DMatrix::<f64>::zeros(rows, rows);
        // Re{M Mᴴ}(i,j) = Σ_k Re(m_ik)Re(m_jk) + Im(m_ik)Im(m_jk)
        let re = m.map(|v| v.re);
        let im = m.map(|v| v.im);
        cov.gemm(1.0, &re, &re.transpose(), 0.0);
        cov.gemm(1.0, &im, &im.transpose(), 1.0);
        if n0 > 0.0 {
            // A_w A_wᴴ is block diagonal with Np copies of diag(u) F Fᴴ diag(u)ᴴ
            let n = self.n;
            let du = DMatrix::from_fn(n, self.s, |t, k| self.upconv[t] * self.f_inv[(t, k)]);
            let block = (&du * du.adjoint()).map(|v| v.re * n0);
            for p in 0..self.np {
                let mut view = cov.view_mut((p * n, p * n), (n, n));
                view += &block;
            }
        }
        for i in 0..rows {
            cov[(i, i)] += ed / 2.0;
        }
        cov
    }

    /// Expected per-sample power of the noiseless-plus-noise RF waveform,
    /// (‖M‖²_F + n0·‖A_w‖²_F)/(N·Np).
    pub fn expected_rf_power(&self, n0: f64) -> f64 {
        let m2: f64 = self.m.iter().map(|v| v.norm_sqr()).sum();
        let aw2 = self.np as f64 * self.f_inv.iter().map(|v| v.norm_sqr()).sum::<f64>();
        (m2 + n0 * aw2) / self.rows() as f64
    }
}

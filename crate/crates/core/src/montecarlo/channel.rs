use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rand::Rng;

use super::rng::standard_complex_normal;
use super::McError;

/// Relative pivot size below which the CUE channel matrix counts as
/// rank deficient.
pub const RANK_TOLERANCE: f64 = 1e-6;

/// Small-scale fading for one trial. All entries are CN(0, 1).
#[derive(Debug, Clone)]
pub struct ChannelDraw {
    /// T_c × U_c, column j is h_j. Column 0 belongs to the typical CUE.
    pub h: DMatrix<Complex64>,
    /// BS to the typical D2D receiver.
    pub f_bs: DVector<Complex64>,
    /// Typical D2D link.
    pub g_typical: Complex64,
    /// Interfering transmitter j to the typical D2D receiver.
    pub g: Vec<Complex64>,
    /// Interfering transmitter j to the typical CUE.
    pub e: Vec<Complex64>,
}

impl ChannelDraw {
    pub fn sample<R: Rng + ?Sized>(
        n_antennas: usize,
        n_cue: usize,
        n_interferers: usize,
        rng: &mut R,
    ) -> Self {
        let h = DMatrix::from_fn(n_antennas, n_cue, |_, _| standard_complex_normal(rng));
        let f_bs = DVector::from_fn(n_antennas, |_, _| standard_complex_normal(rng));
        let g_typical = standard_complex_normal(rng);
        let g = (0..n_interferers).map(|_| standard_complex_normal(rng)).collect();
        let e = (0..n_interferers).map(|_| standard_complex_normal(rng)).collect();
        Self {
            h,
            f_bs,
            g_typical,
            g,
            e,
        }
    }

    /// |h₀ᴴv₀|² and ‖f_bsᴴV‖² under the zero-forcing precoder of this draw.
    pub fn link_gains(&self) -> Result<LinkGains, McError> {
        let v = zf_precoder(&self.h)?;
        let cue_signal = self.h.column(0).dotc(&v.column(0)).norm_sqr();
        let bs_to_d2d = (v.adjoint() * &self.f_bs).norm_squared();
        Ok(LinkGains {
            cue_signal,
            bs_to_d2d,
        })
    }
}

/// Precoder-dependent channel gains entering the two SINRs.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinkGains {
    pub cue_signal: f64,
    pub bs_to_d2d: f64,
}

/// Zero-forcing precoder: normalized columns of H(HᴴH)⁻¹, so that
/// h_kᴴv_j = 0 for k ≠ j and ‖v_j‖ = 1.
pub fn zf_precoder(h: &DMatrix<Complex64>) -> Result<DMatrix<Complex64>, McError> {
    let (t, u) = h.shape();
    if u == 0 || u > t {
        return Err(McError::RankDeficient);
    }
    let gram = h.adjoint() * h;
    let chol = gram.cholesky().ok_or(McError::RankDeficient)?;
    let l = chol.l_dirty();
    let diag: Vec<f64> = (0..u).map(|i| l[(i, i)].re).collect();
    let max = diag.iter().cloned().fold(0.0, f64::max);
    let min = diag.iter().cloned().fold(f64::INFINITY, f64::min);
    if !(min > RANK_TOLERANCE * max) {
        return Err(McError::RankDeficient);
    }
    // W = H G⁻¹, i.e. Wᴴ = G⁻¹Hᴴ
    let mut w = chol.solve(&h.adjoint()).adjoint();
    for mut col in w.column_iter_mut() {
        let norm = col.norm();
        col /= Complex64::new(norm, 0.0);
    }
    Ok(w)
}

/// Largest |h_kᴴv_j| over k ≠ j.
pub fn zf_residual(h: &DMatrix<Complex64>, v: &DMatrix<Complex64>) -> f64 {
    let cross = h.adjoint() * v;
    let mut worst = 0.0f64;
    for k in 0..cross.nrows() {
        for j in 0..cross.ncols() {
            if k != j {
                worst = worst.max(cross[(k, j)].norm());
            }
        }
    }
    worst
}

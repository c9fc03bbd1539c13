//! Model constants derived from the exponent `p`.

use crate::error::{NlkgError, Result};

/// Lower end of the admissible exponent range (excluded).
pub const P_MIN: f64 = 5.0 / 3.0;
/// Upper end of the admissible exponent range (included).
pub const P_MAX: f64 = 2.0;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModelParams {
    pub p: f64,
    /// Index of the last discrete eigenvalue of `L₀`: 3 for `p < 2`, 2 at `p = 2`.
    pub n_top: usize,
    /// `k_j = (p+1)/2 − j(p−1)/2` for `j = 0..=4`.
    pub k: [f64; 5],
    /// `μ_m = 1 − k_m²` for `m = 0..=n_top`.
    pub mu: [f64; 4],
    pub nu0: f64,
    pub lambda: f64,
}

impl ModelParams {
    pub fn new(p: f64) -> Result<ModelParams> {
        if !(p > P_MIN && p <= P_MAX) {
            return Err(NlkgError::Config(format!("p = {p} out of (5/3, 2]")));
        }
        let n_top = if p < 2.0 { 3 } else { 2 };
        let k = std::array::from_fn(|j| k_index(p, j as i32));
        let mut mu = [f64::NAN; 4];
        for (m, slot) in mu.iter_mut().enumerate().take(n_top + 1) {
            *slot = 1.0 - k[m] * k[m];
        }
        let nu0 = (-mu[0]).sqrt();
        let lambda = mu[2].sqrt();
        Ok(ModelParams { p, n_top, k, mu, nu0, lambda })
    }

    /// `k_j` for any integer `j`; `k_{-1} = p`.
    pub fn k_at(&self, j: i32) -> f64 {
        k_index(self.p, j)
    }

    /// Discrete eigenvalues `μ_0..μ_N` of `L₀`.
    pub fn eigenvalues(&self) -> &[f64] {
        &self.mu[..=self.n_top]
    }

    /// Argument scale `(p−1)/2` of the `tanh`/`sech` profiles.
    pub fn scale(&self) -> f64 {
        0.5 * (self.p - 1.0)
    }

    /// Energy `4λ²` of the second harmonic of the internal mode.
    pub fn resonance_energy(&self) -> f64 {
        4.0 * self.lambda * self.lambda
    }

    /// `f(u) = |u|^{p−1}u`.
    #[inline]
    pub fn f(&self, u: f64) -> f64 {
        if u == 0.0 {
            0.0
        } else {
            u.signum() * u.abs().powf(self.p)
        }
    }

    /// `f'(u) = p|u|^{p−1}`.
    #[inline]
    pub fn df(&self, u: f64) -> f64 {
        if u == 0.0 {
            0.0
        } else {
            self.p * u.abs().powf(self.p - 1.0)
        }
    }

    /// `f''(u) = p(p−1)|u|^{p−2} sign(u)`; only evaluated where `u ≠ 0`.
    #[inline]
    pub fn ddf(&self, u: f64) -> f64 {
        self.p * (self.p - 1.0) * u.signum() * u.abs().powf(self.p - 2.0)
    }

    /// `|u|^{p+1}/(p+1)`, the potential of `f`.
    #[inline]
    pub fn big_f(&self, u: f64) -> f64 {
        u.abs().powf(self.p + 1.0) / (self.p + 1.0)
    }
}

fn k_index(p: f64, j: i32) -> f64 {
    0.5 * (p + 1.0) - 0.5 * j as f64 * (p - 1.0)
}

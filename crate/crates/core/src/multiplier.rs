//! Fourier multipliers on parity fields.
//!
//! An even (odd) field on `[0, L]` is extended to a `2L`-periodic even (odd)
//! sequence, i.e. a DCT-I (DST-I) layout, transformed with a complex FFT,
//! multiplied by the symbol and transformed back.

use rustfft::{num_complex::Complex, FftPlanner};

use crate::grid::{Field, Parity};

/// Apply the symbol `m(ξ)` (real and even in `ξ`) to `f`.
pub fn apply_symbol(f: &Field, symbol: impl Fn(f64) -> f64) -> Field {
    let n = f.len();
    let m = 2 * (n - 1);
    let s = f.parity().sign();
    let v = f.values();
    let mut buf: Vec<Complex<f64>> = Vec::with_capacity(m);
    for &x in v.iter().take(n - 1) {
        buf.push(Complex::new(x, 0.0));
    }
    buf.push(Complex::new(if f.parity() == Parity::Odd { 0.0 } else { v[n - 1] }, 0.0));
    for j in n..m {
        buf.push(Complex::new(s * v[m - j], 0.0));
    }

    let mut planner = FftPlanner::<f64>::new();
    planner.plan_fft_forward(m).process(&mut buf);
    let period = 2.0 * f.grid().half_length();
    for (k, c) in buf.iter_mut().enumerate() {
        let kk = if k <= m / 2 { k as f64 } else { k as f64 - m as f64 };
        let xi = 2.0 * std::f64::consts::PI * kk / period;
        *c *= symbol(xi);
    }
    planner.plan_fft_inverse(m).process(&mut buf);
    let scale = 1.0 / m as f64;
    let out = buf.iter().take(n).map(|c| c.re * scale).collect();
    Field::from_values(f.grid(), f.parity(), out)
}

/// `⟨iε∂x⟩^{-s} f`, i.e. the multiplier `(1 + ε²ξ²)^{-s/2}`. Negative `s`
/// gives the inverse multiplier. Parity is preserved; `s = 0` is the identity.
pub fn bessel_multiplier(f: &Field, s: f64, eps: f64) -> Field {
    if s == 0.0 {
        return f.clone();
    }
    apply_symbol(f, |xi| (1.0 + eps * eps * xi * xi).powf(-0.5 * s))
}

//! Closed-form even scattering state of the reflectionless well at p = 2.
//!
//! With x = 2t the equation −g'' − 3 sech²(x/2) g = ξ² g becomes
//! −g_tt − 12 sech²(t) g = k² g, k = 2ξ, whose Jost solution is
//! (−∂ + 3 tanh)(−∂ + 2 tanh)(−∂ + tanh) e^{ikt}.
#![allow(dead_code)]

use num_complex::Complex64;

/// Coefficients of P in ψ(t) = P(tanh t) e^{ikt}.
pub fn jost_poly(k: f64, ell: usize) -> Vec<Complex64> {
    let ik = Complex64::new(0.0, k);
    let mut p = vec![Complex64::new(1.0, 0.0)];
    for m in 1..=ell {
        // (−∂ + m T)(P e^{ikt}) = [−(1 − T²)P' − ikP + mTP] e^{ikt}
        let mut out = vec![Complex64::new(0.0, 0.0); p.len() + 1];
        for (d, &c) in p.iter().enumerate() {
            if d > 0 {
                out[d - 1] -= c * d as f64;
                out[d + 1] += c * d as f64;
            }
            out[d] -= ik * c;
            out[d + 1] += c * m as f64;
        }
        p = out;
    }
    p
}

pub fn eval(p: &[Complex64], k: f64, t: f64) -> Complex64 {
    let tt = t.tanh();
    let poly = p.iter().rev().fold(Complex64::new(0.0, 0.0), |acc, &c| acc * tt + c);
    poly * Complex64::new(0.0, k * t).exp()
}

pub fn oracle_even(x: f64, p: &[Complex64], k: f64) -> Complex64 {
    eval(p, k, 0.5 * x) + eval(p, k, -0.5 * x)
}

/// The even oracle normalized to 1 at the origin, real part.
pub fn normalized_even(x: f64, xi: f64) -> f64 {
    let k = 2.0 * xi;
    let p = jost_poly(k, 3);
    (oracle_even(x, &p, k) / oracle_even(0.0, &p, k)).re
}

//! Cutoff and weight functions used by the localized functionals.
//!
//! `χ` is the fixed even bump with `χ = 1` on `[-1, 1]`, `χ = 0` outside
//! `[-2, 2]` and a quintic smoothstep in between, so `xχ'(x) ≤ 0`.

use std::sync::Arc;

use crate::grid::Grid;

/// The smoothstep `q(t) = t³(10 − 15t + 6t²)` and its first two derivatives.
fn smoothstep(t: f64) -> (f64, f64, f64) {
    let q = t * t * t * (10.0 - 15.0 * t + 6.0 * t * t);
    let dq = 30.0 * t * t * (1.0 - t) * (1.0 - t);
    let ddq = 60.0 * t * (1.0 - t) * (1.0 - 2.0 * t);
    (q, dq, ddq)
}

/// `χ(x)`, `χ'(x)`, `χ''(x)`.
pub fn chi_with_derivs(x: f64) -> (f64, f64, f64) {
    let a = x.abs();
    if a <= 1.0 {
        (1.0, 0.0, 0.0)
    } else if a >= 2.0 {
        (0.0, 0.0, 0.0)
    } else {
        // χ(x) = q(2 − |x|)
        let (q, dq, ddq) = smoothstep(2.0 - a);
        (q, -dq * x.signum(), ddq)
    }
}

pub fn chi(x: f64) -> f64 {
    chi_with_derivs(x).0
}

/// `ζ_C(x) = exp(−|x|(1 − χ(x))/C)`.
pub fn zeta(c: f64, x: f64) -> f64 {
    (-x.abs() * (1.0 - chi(x)) / c).exp()
}

fn sech(x: f64) -> f64 {
    let e = (-x.abs()).exp();
    2.0 * e / (1.0 + e * e)
}

/// Precomputed weights for one choice of `(A, B, κ, ε)`.
#[derive(Debug, Clone)]
pub struct WeightSet {
    pub grid: Arc<Grid>,
    pub a: f64,
    pub b: f64,
    pub kappa: f64,
    pub epsilon: f64,
    /// `χ_A = χ(·/A)` and its first two derivatives.
    pub chi_a: Vec<f64>,
    pub chi_a_d1: Vec<f64>,
    pub chi_a_d2: Vec<f64>,
    /// `χ`, `χ'`, `χ''` at unit scale (they enter `V_B`).
    pub chi1: Vec<f64>,
    pub chi1_d1: Vec<f64>,
    pub chi1_d2: Vec<f64>,
    pub zeta_a: Vec<f64>,
    pub zeta_b: Vec<f64>,
    /// `φ_A`, `φ_B`: odd antiderivatives of `ζ²`.
    pub phi_a: Vec<f64>,
    pub phi_b: Vec<f64>,
    /// `ψ_{A,B} = χ_A² φ_B` and `ψ'_{A,B}`.
    pub psi_ab: Vec<f64>,
    pub psi_ab_d1: Vec<f64>,
    /// `sech(2x/A)`.
    pub sech_2_over_a: Vec<f64>,
    /// `sech(κx)`.
    pub sech_kappa: Vec<f64>,
    /// `e^{−κ⟨x⟩}` with `⟨x⟩ = √(1+x²)`.
    pub exp_kappa_bracket: Vec<f64>,
}

/// Odd antiderivative `∫₀^x w` by cumulative trapezoid with the
/// Euler–Maclaurin end correction `−dx²/12·(w'(x) − w'(0))` (`w` even, so
/// `w'(0) = 0`), which makes `φ' = w` hold to fourth order.
fn cumulative_trapezoid(dx: f64, w: &[f64]) -> Vec<f64> {
    let n = w.len();
    let dw = |k: usize| -> f64 {
        if k == 0 {
            0.0
        } else if k == n - 1 {
            (3.0 * w[k] - 4.0 * w[k - 1] + w[k - 2]) / (2.0 * dx)
        } else {
            (w[k + 1] - w[k - 1]) / (2.0 * dx)
        }
    };
    let mut out = Vec::with_capacity(n);
    let mut acc = 0.0;
    out.push(0.0);
    for k in 1..n {
        acc += 0.5 * dx * (w[k - 1] + w[k]);
        out.push(acc - dx * dx / 12.0 * dw(k));
    }
    out
}

impl WeightSet {
    pub fn new(grid: &Arc<Grid>, a: f64, b: f64, kappa: f64, epsilon: f64) -> WeightSet {
        assert!(a > 0.0 && b > 0.0 && kappa > 0.0, "weights need A, B, κ > 0");
        let x = grid.x();
        let mut chi_a = Vec::with_capacity(x.len());
        let mut chi_a_d1 = Vec::with_capacity(x.len());
        let mut chi_a_d2 = Vec::with_capacity(x.len());
        let mut chi1 = Vec::with_capacity(x.len());
        let mut chi1_d1 = Vec::with_capacity(x.len());
        let mut chi1_d2 = Vec::with_capacity(x.len());
        for &xi in x {
            let (c, d1, d2) = chi_with_derivs(xi / a);
            chi_a.push(c);
            chi_a_d1.push(d1 / a);
            chi_a_d2.push(d2 / (a * a));
            let (c, d1, d2) = chi_with_derivs(xi);
            chi1.push(c);
            chi1_d1.push(d1);
            chi1_d2.push(d2);
        }
        let zeta_a: Vec<f64> = x.iter().map(|&xi| zeta(a, xi)).collect();
        let zeta_b: Vec<f64> = x.iter().map(|&xi| zeta(b, xi)).collect();
        let sq = |v: &[f64]| v.iter().map(|z| z * z).collect::<Vec<_>>();
        let phi_a = cumulative_trapezoid(grid.dx(), &sq(&zeta_a));
        let phi_b = cumulative_trapezoid(grid.dx(), &sq(&zeta_b));
        let psi_ab = chi_a.iter().zip(&phi_b).map(|(c, p)| c * c * p).collect();
        let psi_ab_d1 = (0..x.len())
            .map(|i| {
                2.0 * chi_a[i] * chi_a_d1[i] * phi_b[i] + chi_a[i] * chi_a[i] * zeta_b[i] * zeta_b[i]
            })
            .collect();
        WeightSet {
            grid: grid.clone(),
            a,
            b,
            kappa,
            epsilon,
            sech_2_over_a: x.iter().map(|&xi| sech(2.0 * xi / a)).collect(),
            sech_kappa: x.iter().map(|&xi| sech(kappa * xi)).collect(),
            exp_kappa_bracket: x.iter().map(|&xi| (-kappa * (1.0 + xi * xi).sqrt()).exp()).collect(),
            chi_a,
            chi_a_d1,
            chi_a_d2,
            chi1,
            chi1_d1,
            chi1_d2,
            zeta_a,
            zeta_b,
            phi_a,
            phi_b,
            psi_ab,
            psi_ab_d1,
        }
    }

    /// `ζ_A²` as the derivative of `φ_A`.
    pub fn phi_a_d1(&self) -> Vec<f64> {
        self.zeta_a.iter().map(|z| z * z).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn chi_bounds_and_monotonicity() {
        let mut x = -3.0;
        while x <= 3.0 {
            let (c, d1, _) = chi_with_derivs(x);
            assert!((0.0..=1.0).contains(&c));
            if x.abs() <= 1.0 {
                assert_eq!(c, 1.0);
            }
            if x.abs() >= 2.0 {
                assert_eq!(c, 0.0);
            }
            assert!(x * d1 <= 0.0);
            assert_eq!(c, chi(-x));
            x += 0.01;
        }
    }

    #[test]
    fn chi_derivatives_match_differences() {
        let h = 1e-5;
        for &x in &[1.1, 1.37, 1.5, 1.81, -1.6] {
            let (_, d1, d2) = chi_with_derivs(x);
            let fd1 = (chi(x + h) - chi(x - h)) / (2.0 * h);
            let fd2 = (chi(x + h) - 2.0 * chi(x) + chi(x - h)) / (h * h);
            assert!((d1 - fd1).abs() < 1e-8);
            assert!((d2 - fd2).abs() < 1e-4);
        }
    }

    #[test]
    fn zeta_and_phi() {
        let g = Grid::new(100.0, 4096, 20.0).unwrap();
        let w = WeightSet::new(&g, 40.0, 10.0, 0.1, 0.3);
        for (i, &x) in g.x().iter().enumerate() {
            if x <= 1.0 {
                assert_eq!(w.zeta_b[i], 1.0);
            }
            if x >= 2.0 {
                let expect = (-x / 10.0).exp();
                assert!(((w.zeta_b[i] - expect) / expect).abs() < 1e-12);
            }
            assert!(w.zeta_b[i] > 0.0 && w.zeta_b[i] <= 1.0);
        }
        assert_eq!(w.phi_b[0], 0.0);
        assert!(w.phi_b.windows(2).all(|p| p[1] > p[0]));
    }
}

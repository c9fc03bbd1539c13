use std::sync::Arc;

use num_complex::Complex64;

use crate::error::{NlkgError, Result};
use crate::grid::{dot, ComplexPair, Field, Grid, StatePair};
use crate::params::ModelParams;

use super::darboux::{apply_l, TanhPoly};
use super::soliton::SolitonProfile;

/// Residual tolerance at the reference spacing `dx = 100/4095`.
const RESIDUAL_TOL: f64 = 1e-5;
pub const REFERENCE_DX: f64 = 100.0 / 4095.0;

/// Discrete eigenfunctions of `L_0` and the vector modes of `JL_0`.
#[derive(Debug, Clone)]
pub struct EigenBasis {
    /// Raw Darboux forms `φ_j = S_0⋯S_{j−1}Q^{k_j}`, `j = 0..=N`.
    pub phi: Vec<Field>,
    pub phi_normalized: Vec<Field>,
    /// Closed forms of `φ_j`.
    pub phi_exact: Vec<TanhPoly>,
    /// `‖(L_0 − μ_j)φ_j‖ / ‖φ_j‖`.
    pub residuals: Vec<f64>,
    pub y_plus: StatePair,
    pub y_minus: StatePair,
    pub z_plus: StatePair,
    pub z_minus: StatePair,
    /// `Φ_0 = ½(1−i, (1+i)ν₀)ᵀφ₀`.
    pub phi0_vec: ComplexPair,
    /// `Φ_2 = (1, iλ)ᵀφ₂`.
    pub phi2_vec: ComplexPair,
}

/// Closed form of `φ_j`.
pub fn darboux_eigenfunction(params: &ModelParams, j: usize) -> TanhPoly {
    let mut f = TanhPoly::q_power(params, params.k[j]);
    for i in (0..j).rev() {
        f = f.apply_s(params.k[i]);
    }
    f
}

/// Residual tolerance scaled with the fourth power of the grid spacing.
pub fn residual_tolerance(grid: &Grid) -> f64 {
    RESIDUAL_TOL * (grid.dx() / REFERENCE_DX).powi(4).max(1.0)
}

fn complex_mode(phi: &Field, first: Complex64, second: Complex64) -> ComplexPair {
    ComplexPair {
        re: StatePair::new(phi.scaled(first.re), phi.scaled(second.re)),
        im: StatePair::new(phi.scaled(first.im), phi.scaled(second.im)),
    }
}

pub fn eigenbasis(params: &ModelParams, soliton: &SolitonProfile, grid: &Arc<Grid>) -> Result<EigenBasis> {
    let tol = residual_tolerance(grid);
    let mut phi = Vec::new();
    let mut phi_exact = Vec::new();
    let mut residuals = Vec::new();
    for j in 0..=params.n_top {
        let exact = darboux_eigenfunction(params, j);
        let f = exact.to_field(grid);
        let mut r = apply_l(soliton, 0, &f);
        r.axpy(-params.mu[j], &f);
        let rel = (dot(&r, &r) / dot(&f, &f)).sqrt();
        if !(rel < tol) {
            return Err(NlkgError::Residual { what: format!("eigenfunction phi_{j}"), value: rel, tol });
        }
        residuals.push(rel);
        phi.push(f);
        phi_exact.push(exact);
    }
    let phi_normalized = phi.iter().map(|f| f.scaled(1.0 / dot(f, f).sqrt())).collect();
    let (nu0, lambda) = (params.nu0, params.lambda);
    let p0 = &phi[0];
    let one = Complex64::new(1.0, 0.0);
    Ok(EigenBasis {
        y_plus: StatePair::new(p0.clone(), p0.scaled(nu0)),
        y_minus: StatePair::new(p0.clone(), p0.scaled(-nu0)),
        z_plus: StatePair::new(p0.clone(), p0.scaled(1.0 / nu0)),
        z_minus: StatePair::new(p0.clone(), p0.scaled(-1.0 / nu0)),
        phi0_vec: complex_mode(p0, Complex64::new(0.5, -0.5), Complex64::new(0.5, 0.5) * nu0),
        phi2_vec: complex_mode(&phi[2], one, Complex64::new(0.0, lambda)),
        phi,
        phi_normalized,
        phi_exact,
        residuals,
    })
}

/// `JL_0 U` for a real pair: `(u₂, −L_0u₁)`.
pub fn apply_jl0(soliton: &SolitonProfile, u: &StatePair) -> StatePair {
    StatePair::new(u.second.clone(), apply_l(soliton, 0, &u.first).scaled(-1.0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::{inner, omega, Parity};
    use crate::spectrum::soliton::soliton;

    fn setup(p: f64, n: usize) -> (ModelParams, SolitonProfile, EigenBasis) {
        let g = Grid::new(100.0, n, 20.0).unwrap();
        let params = ModelParams::new(p).unwrap();
        let s = soliton(&params, &g);
        let b = eigenbasis(&params, &s, &g).unwrap();
        (params, s, b)
    }

    #[test]
    fn parity_pattern_and_orthogonality() {
        let (_, _, b) = setup(1.8, 4096);
        let parities: Vec<Parity> = b.phi.iter().map(|f| f.parity()).collect();
        assert_eq!(parities, vec![Parity::Even, Parity::Odd, Parity::Even, Parity::Odd]);
        assert!(inner(&b.phi[0], &b.phi[2]).unwrap().abs() < 1e-8);
        assert!((inner(&b.phi_normalized[2], &b.phi_normalized[2]).unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn residuals_converge_at_fourth_order() {
        let (_, _, fine) = setup(1.8, 4096);
        let (_, _, coarse) = setup(1.8, 2048);
        for j in 0..4 {
            assert!(fine.residuals[j] < 1e-5);
            assert!(coarse.residuals[j] / fine.residuals[j] > 8.0, "j = {j}");
        }
    }

    #[test]
    fn translation_mode_is_proportional_to_q_prime() {
        let (params, s, b) = setup(2.0, 4096);
        let c = params.k[0] + 1.0;
        assert!((&b.phi[1] - &s.q_prime.scaled(c)).max_abs() < 1e-12);
    }

    #[test]
    fn vector_modes() {
        let (params, s, b) = setup(2.0, 4096);
        for (y, sign) in [(&b.y_plus, 1.0), (&b.y_minus, -1.0)] {
            let r = &apply_jl0(&s, y) - &y.scaled(sign * params.nu0);
            assert!(r.norm() / y.norm() < 1e-5);
        }
        // JL₀Φ₂ = iλΦ₂ split into real and imaginary parts
        let (re, im) = (&b.phi2_vec.re, &b.phi2_vec.im);
        let r1 = &apply_jl0(&s, re) - &im.scaled(-params.lambda);
        let r2 = &apply_jl0(&s, im) - &re.scaled(params.lambda);
        assert!(r1.norm() < 1e-5 && r2.norm() < 1e-5);
        let w = omega(&b.y_plus, &b.z_minus).unwrap();
        assert!(w.abs() > 1e-3);
    }

    #[test]
    fn asymptotic_decay_rate() {
        let (params, _, b) = setup(1.8, 4096);
        let g = b.phi[2].grid().clone();
        let (i1, i2) = (g.index_at(20.0), g.index_at(40.0));
        let v = b.phi[2].values();
        let slope = (v[i2].abs().ln() - v[i1].abs().ln()) / (g.x()[i2] - g.x()[i1]);
        assert!((slope + params.k[2]).abs() < 0.01, "{slope}");
    }
}

//! Weighted norms of state pairs. The second component is measured in `L²`
//! (energy space `H¹ × L²`) wherever a derivative is involved.

use std::sync::Arc;

use crate::grid::{deriv1, dot_slices, Field, Grid, StatePair};

fn sech(x: f64) -> f64 {
    let e = (-x.abs()).exp();
    2.0 * e / (1.0 + e * e)
}

/// Precomputed weights for the three norms monitored along trajectories.
#[derive(Debug, Clone)]
pub struct NormSet {
    pub grid: Arc<Grid>,
    pub a_scale: f64,
    pub kappa: f64,
    pub a_weight: f64,
    sech_2_over_a: Vec<f64>,
    sech_kappa: Vec<f64>,
    sech_a: Vec<f64>,
}

fn weighted_sq(grid: &Grid, w: &[f64], f: &[f64]) -> f64 {
    let g: Vec<f64> = w.iter().zip(f).map(|(a, b)| a * b).collect();
    dot_slices(grid, &g, &g)
}

impl NormSet {
    /// `a_scale` is the `A` of `Σ_A`, `kappa` the `L²_{−κ}` rate, `a_weight` the `H¹_{−a}` rate.
    pub fn new(grid: &Arc<Grid>, a_scale: f64, kappa: f64, a_weight: f64) -> NormSet {
        let x = grid.x();
        NormSet {
            grid: grid.clone(),
            a_scale,
            kappa,
            a_weight,
            sech_2_over_a: x.iter().map(|&v| sech(2.0 * v / a_scale)).collect(),
            sech_kappa: x.iter().map(|&v| sech(kappa * v)).collect(),
            sech_a: x.iter().map(|&v| sech(a_weight * v)).collect(),
        }
    }

    /// `‖sech(2x/A)η₁'‖ + A⁻¹‖sech(2x/A)η‖`.
    pub fn sigma_a(&self, eta: &StatePair) -> f64 {
        let g = &self.grid;
        let d = deriv1(&eta.first);
        let w = &self.sech_2_over_a;
        let grad = weighted_sq(g, w, d.values()).sqrt();
        let mass = (weighted_sq(g, w, eta.first.values()) + weighted_sq(g, w, eta.second.values())).sqrt();
        grad + mass / self.a_scale
    }

    /// `‖sech(κx)η‖`.
    pub fn l2_kappa(&self, eta: &StatePair) -> f64 {
        let g = &self.grid;
        let w = &self.sech_kappa;
        (weighted_sq(g, w, eta.first.values()) + weighted_sq(g, w, eta.second.values())).sqrt()
    }

    /// `‖sech(ax)η₁‖_{H¹}` combined with `‖sech(ax)η₂‖`.
    pub fn h1_a(&self, eta: &StatePair) -> f64 {
        let g = &self.grid;
        let w = &self.sech_a;
        let weighted = eta.first.mul_weight(w, crate::grid::Parity::Even);
        let d = deriv1(&weighted);
        (dot_slices(g, weighted.values(), weighted.values())
            + dot_slices(g, d.values(), d.values())
            + weighted_sq(g, w, eta.second.values()))
        .sqrt()
    }
}

/// `‖sech(κx) f‖` for a scalar field.
pub fn norm_l2_kappa(f: &Field, kappa: f64) -> f64 {
    let w: Vec<f64> = f.grid().x().iter().map(|&x| sech(kappa * x)).collect();
    weighted_sq(f.grid(), &w, f.values()).sqrt()
}

/// `‖u₁‖²_{H¹} + ‖u₂‖²`, square-rooted.
pub fn energy_norm(u: &StatePair) -> f64 {
    let g = u.grid();
    let d = deriv1(&u.first);
    (dot_slices(g, u.first.values(), u.first.values())
        + dot_slices(g, d.values(), d.values())
        + dot_slices(g, u.second.values(), u.second.values()))
    .sqrt()
}

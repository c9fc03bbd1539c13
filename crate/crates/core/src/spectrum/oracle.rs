//! Independent check of the discrete spectrum: `L_0` assembled as a banded
//! symmetric matrix on each parity sector, eigenvalues below the continuum
//! found by Sturm/inertia bisection.

use std::sync::Arc;

use crate::banded::SymBanded;
use crate::grid::{Grid, Parity};
use crate::params::ModelParams;

use super::soliton::SolitonProfile;

#[derive(Debug, Clone, PartialEq)]
pub struct OracleSpectrum {
    pub even: Vec<f64>,
    pub odd: Vec<f64>,
}

impl OracleSpectrum {
    /// Both sectors merged in increasing order.
    pub fn all(&self) -> Vec<f64> {
        let mut v: Vec<f64> = self.even.iter().chain(&self.odd).copied().collect();
        v.sort_by(|a, b| a.partial_cmp(b).unwrap());
        v
    }
}

/// Row `i` of the 5-point `−∂x²` stencil (times `12dx²`) with parity ghosts
/// at 0 and an odd reflection (Dirichlet wall) at the last node.
fn stencil_row(i: usize, n: usize, parity: Parity) -> Vec<(usize, f64)> {
    const C: [f64; 5] = [1.0, -16.0, 30.0, -16.0, 1.0];
    let wall = (n - 1) as isize;
    let mut row: Vec<(usize, f64)> = Vec::with_capacity(5);
    for (o, &c) in C.iter().enumerate() {
        let mut idx = i as isize + o as isize - 2;
        let mut coeff = c;
        if idx < 0 {
            idx = -idx;
            coeff *= parity.sign();
        }
        if idx == wall {
            continue;
        }
        if idx > wall {
            idx = 2 * wall - idx;
            coeff = -coeff;
        }
        if idx == 0 && parity == Parity::Odd {
            continue;
        }
        match row.iter_mut().find(|(j, _)| *j == idx as usize) {
            Some(e) => e.1 += coeff,
            None => row.push((idx as usize, coeff)),
        }
    }
    row
}

/// `L_0` restricted to one parity sector, symmetrized with the trapezoid weights.
pub fn sector_matrix(soliton: &SolitonProfile, parity: Parity) -> (SymBanded, usize) {
    let grid = soliton.grid();
    let n = grid.len();
    let first = if parity == Parity::Odd { 1 } else { 0 };
    let last = n - 2;
    let dim = last - first + 1;
    let h = 1.0 / (12.0 * grid.dx() * grid.dx());
    let p = soliton.params.p;
    let weight = |i: usize| -> f64 { if i == 0 { 0.5 } else { 1.0 } };
    let mut m = SymBanded::zeros(dim, 2);
    for i in first..=last {
        for (j, c) in stencil_row(i, n, parity) {
            if j < i {
                continue;
            }
            // B = W^{1/2} A W^{−1/2}
            let mut v = h * c * (weight(i) / weight(j)).sqrt();
            if j == i {
                v += 1.0 - p * soliton.q_pow_pm1.values()[i];
            }
            m.set(i - first, j - first, v);
        }
    }
    (m, first)
}

pub fn discrete_spectrum_oracle(soliton: &SolitonProfile) -> OracleSpectrum {
    let lower = -soliton.params.p * soliton.params.k[0] - 1.0;
    let run = |parity| sector_matrix(soliton, parity).0.eigenvalues_below(lower, 1.0, 1e-12);
    OracleSpectrum { even: run(Parity::Even), odd: run(Parity::Odd) }
}

/// Sample `count` exponents evenly in `(5/3, 2]`, the last one being 2.
pub fn p_samples(count: usize) -> Vec<f64> {
    let lo = crate::params::P_MIN;
    (1..=count).map(|i| lo + (2.0 - lo) * i as f64 / count as f64).collect()
}

/// Largest mismatch `|oracle − μ|/(1 + |μ|)` for one `p`; `None` if the counts differ.
pub fn spectrum_mismatch(params: &ModelParams, grid: &Arc<Grid>) -> Option<f64> {
    let s = super::soliton::soliton(params, grid);
    let oracle = discrete_spectrum_oracle(&s).all();
    let formula = params.eigenvalues();
    if oracle.len() != formula.len() {
        return None;
    }
    Some(
        oracle
            .iter()
            .zip(formula)
            .map(|(a, b)| (a - b).abs() / (1.0 + b.abs()))
            .fold(0.0, f64::max),
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectrum::soliton::soliton;

    #[test]
    fn p_two_sectors() {
        let g = Grid::new(100.0, 4096, 20.0).unwrap();
        let s = soliton(&ModelParams::new(2.0).unwrap(), &g);
        let o = discrete_spectrum_oracle(&s);
        assert_eq!(o.even.len(), 2);
        assert!((o.even[0] + 1.25).abs() < 1e-6 && (o.even[1] - 0.75).abs() < 1e-6);
        assert_eq!(o.odd.len(), 1);
        assert!(o.odd[0].abs() < 1e-6);
    }

    #[test]
    fn p_one_point_eight_even_sector() {
        let g = Grid::new(100.0, 4096, 20.0).unwrap();
        let s = soliton(&ModelParams::new(1.8).unwrap(), &g);
        let o = discrete_spectrum_oracle(&s);
        assert!((o.even[0] + 0.96).abs() < 1e-6 && (o.even[1] - 0.64).abs() < 1e-6);
        assert_eq!(o.odd.len(), 2);
    }

    #[test]
    fn rows_are_symmetric() {
        let n = 64;
        for parity in [Parity::Even, Parity::Odd] {
            let first = if parity == Parity::Odd { 1 } else { 0 };
            for i in first..n - 1 {
                for (j, c) in stencil_row(i, n, parity) {
                    let wi = if i == 0 { 0.5 } else { 1.0 };
                    let wj = if j == 0 { 0.5 } else { 1.0 };
                    let back = stencil_row(j, n, parity).into_iter().find(|e| e.0 == i).unwrap().1;
                    assert!((wi * c - wj * back).abs() < 1e-12, "{parity:?} {i} {j}");
                }
            }
        }
    }
}

use std::sync::Arc;

use crate::grid::{Field, Grid, Parity};
use crate::params::ModelParams;

/// `ln sech(y)`, stable for large `|y|`.
pub(crate) fn ln_sech(y: f64) -> f64 {
    let a = y.abs();
    -a + std::f64::consts::LN_2 - (-2.0 * a).exp().ln_1p()
}

pub(crate) fn sech(y: f64) -> f64 {
    ln_sech(y).exp()
}

/// The standing wave `Q` and the derived fields used throughout.
#[derive(Debug, Clone)]
pub struct SolitonProfile {
    pub params: ModelParams,
    /// `Q = ((p+1)/2)^{1/(p−1)} sech^{2/(p−1)}((p−1)x/2)`.
    pub q: Field,
    /// Analytic `Q' = −tanh((p−1)x/2) Q`.
    pub q_prime: Field,
    /// `Q^{p−1} = ((p+1)/2) sech²((p−1)x/2)`.
    pub q_pow_pm1: Field,
}

impl SolitonProfile {
    pub fn grid(&self) -> &Arc<Grid> {
        self.q.grid()
    }

    /// `Q(x)` evaluated in closed form.
    pub fn q_at(&self, x: f64) -> f64 {
        q_value(&self.params, x)
    }

    /// `Q^{p−1}(x)` in closed form.
    pub fn q_pow_pm1_at(&self, x: f64) -> f64 {
        let a = self.params.scale();
        self.params.k[0] * sech(a * x).powi(2)
    }

    /// Potential of `L_j`: `k_{j−1}k_j (2/(p+1)) Q^{p−1}`; `j = 0` gives `pQ^{p−1}`.
    pub fn darboux_potential(&self, j: usize) -> Vec<f64> {
        let c = self.potential_coefficient(j);
        self.q_pow_pm1.values().iter().map(|v| c * v).collect()
    }

    pub fn potential_coefficient(&self, j: usize) -> f64 {
        let p = &self.params;
        p.k_at(j as i32 - 1) * p.k_at(j as i32) * 2.0 / (p.p + 1.0)
    }
}

pub(crate) fn q_value(params: &ModelParams, x: f64) -> f64 {
    let a = params.scale();
    (params.k[0].ln() / (params.p - 1.0) + ln_sech(a * x) / a).exp()
}

pub fn soliton(params: &ModelParams, grid: &Arc<Grid>) -> SolitonProfile {
    let a = params.scale();
    let q = Field::from_fn(grid, Parity::Even, |x| q_value(params, x));
    let q_prime = q.map(Parity::Odd, |x, v| -(a * x).tanh() * v);
    let q_pow_pm1 = Field::from_fn(grid, Parity::Even, |x| params.k[0] * sech(a * x).powi(2));
    SolitonProfile { params: *params, q, q_prime, q_pow_pm1 }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::{deriv1, deriv2};

    #[test]
    fn p_two_profile() {
        let g = Grid::new(100.0, 4096, 20.0).unwrap();
        let s = soliton(&ModelParams::new(2.0).unwrap(), &g);
        assert!((s.q.values()[0] - 1.5).abs() < 1e-15);
        for (&x, &v) in g.x().iter().zip(s.q.values()) {
            let expect = 1.5 / (x / 2.0).cosh().powi(2);
            assert!((v - expect).abs() < 1e-14 * (1.0 + expect));
        }
    }

    #[test]
    fn analytic_derivative_matches_stencil() {
        let g = Grid::new(100.0, 4096, 20.0).unwrap();
        for p in [1.7, 1.85, 2.0] {
            let s = soliton(&ModelParams::new(p).unwrap(), &g);
            let d = deriv1(&s.q);
            let err = (&d - &s.q_prime).max_abs();
            assert!(err < 10.0 * g.dx().powi(4), "p = {p}: {err}");
        }
    }

    #[test]
    fn q_is_positive_decreasing_and_stationary() {
        let g = Grid::new(100.0, 4096, 20.0).unwrap();
        let params = ModelParams::new(1.8).unwrap();
        let s = soliton(&params, &g);
        assert!(s.q.values().iter().all(|&v| v > 0.0));
        assert!(s.q.values().windows(2).all(|w| w[1] < w[0]));
        // −Q'' + Q − Q^p = 0
        let d2 = deriv2(&s.q);
        let res = (0..g.len())
            .map(|i| {
                let q = s.q.values()[i];
                (-d2.values()[i] + q - params.f(q)).abs()
            })
            .fold(0.0, f64::max);
        assert!(res < 1e-7, "{res}");
    }
}

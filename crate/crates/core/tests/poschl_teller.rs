//! The p = 2 distorted wave against the closed-form Jost solution.

mod common;

use std::sync::Arc;

use common::{eval, jost_poly, oracle_even};
use nlkg::scattering::{distorted_wave, integrate_wave, wronskian};
use nlkg::spectrum::soliton;
use nlkg::{Grid, ModelParams};

fn grid(n: usize) -> Arc<Grid> {
    Grid::new(100.0, n, 20.0).unwrap()
}

#[test]
fn jost_polynomial_solves_the_well() {
    // residual of −ψ'' − 12 sech² ψ − k²ψ by central differences
    let k = 2.0 * 2f64.sqrt();
    let p = jost_poly(k, 3);
    let h = 1e-3;
    for &t in &[-3.0, -0.7, 0.0, 0.4, 2.5] {
        let d2 = (eval(&p, k, t + h) - 2.0 * eval(&p, k, t) + eval(&p, k, t - h)) / (h * h);
        let s = 1.0 / f64::cosh(t);
        let r = -d2 - 12.0 * s * s * eval(&p, k, t) - k * k * eval(&p, k, t);
        assert!(r.norm() < 1e-4 * eval(&p, k, t).norm().max(1.0), "t = {t}: {r}");
    }
}

#[test]
fn p_two_wave_matches_closed_form() {
    let params = ModelParams::new(2.0).unwrap();
    for n in [4096, 8192] {
        let g = grid(n);
        let s = soliton(&params, &g);
        let w = distorted_wave(&s).unwrap();
        let k = 2.0 * w.xi;
        let p = jost_poly(k, 3);
        let norm = oracle_even(0.0, &p, k);
        let mut err = 0.0f64;
        for (&x, &v) in g.x().iter().zip(w.raw.values()) {
            let o = oracle_even(x, &p, k) / norm;
            assert!(o.im.abs() < 1e-12);
            err = err.max((v - o.re).abs());
        }
        println!("n = {n}: max |g − oracle| = {err:e}");
        assert!(err < 1e-5, "{err}");
        if n == 8192 {
            assert!(err < 1e-6, "{err}");
        }
    }
}

#[test]
fn wave_is_bounded_and_orthogonal_to_ground_state() {
    let params = ModelParams::new(1.8).unwrap();
    let g = grid(4096);
    let s = soliton(&params, &g);
    let w = distorted_wave(&s).unwrap();
    let far = g.index_at(60.0);
    let sup_far = w.g.values()[far..].iter().fold(0.0f64, |m, v| m.max(v.abs()));
    assert!(w.g.values()[g.index_at(10.0)..].iter().all(|v| v.abs() <= 1.05 * sup_far));
    let phi0 = nlkg::spectrum::darboux_eigenfunction(&params, 0).to_field(&g);
    let overlap = nlkg::inner(&phi0, &w.g).unwrap() / phi0.norm();
    assert!(overlap.abs() < 1e-6, "{overlap}");
}

#[test]
fn wronskian_drift() {
    let params = ModelParams::new(1.8).unwrap();
    for (n, tol) in [(4096, 1e-7), (8192, 1e-8)] {
        let s = soliton(&params, &grid(n));
        let w = wronskian(&s, params.resonance_energy());
        let drift = w.iter().map(|v| (v - 1.0).abs()).fold(0.0, f64::max);
        assert!(drift < tol, "n = {n}: {drift}");
    }
    let s = soliton(&params, &grid(4096));
    let (y, _) = integrate_wave(&s, params.resonance_energy(), 1.0, 0.0);
    assert_eq!(y[0], 1.0);
}

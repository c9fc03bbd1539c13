//! Even distorted plane wave of `L_0` at the second-harmonic energy `4λ²`
//! and the Fermi-Golden-Rule pairing `γ = ⟨JG₂, g₂⟩`, `g₂ = (1, 2iλ)ᵀ c g`.

use std::sync::Arc;

use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{NlkgError, Result};
use crate::grid::{dot, Field, Grid, Parity};
use crate::params::{ModelParams, P_MIN};
use crate::profile::{build_profile, RefinedProfile};
use crate::spectrum::{eigenbasis, soliton, SolitonProfile};

/// Largest admissible far-field fit residual (relative rms).
pub const FIT_TOL: f64 = 1e-6;
/// Relative tolerance of the pairing/reduced agreement.
pub const AGREEMENT_TOL: f64 = 1e-4;
/// Scans refuse exponents this close to the lower end of the range.
pub const SCAN_MARGIN: f64 = 1e-3;

#[derive(Debug, Clone)]
pub struct DistortedWave {
    pub energy: f64,
    pub xi: f64,
    /// Real even solution of `L_0 g = E g`, scaled so the far field is
    /// `a e^{iξx} + ā e^{−iξx}` with `|2a| = 1`.
    pub g: Field,
    /// Far-field coefficient after normalization.
    pub amplitude: Complex64,
    /// Raw solution with `g(0) = 1`, `g'(0) = 0`.
    pub raw: Field,
    pub fit_residual: f64,
}

/// RK4 on `y'' = −(ξ² + pQ^{p−1}) y`, step `dx`, from `x = 0`. Returns `(y, y')`.
pub fn integrate_wave(soliton: &SolitonProfile, energy: f64, y0: f64, dy0: f64) -> (Vec<f64>, Vec<f64>) {
    let grid = soliton.grid();
    let p = soliton.params.p;
    let xi2 = energy - 1.0;
    let h = grid.dx();
    let acc = |x: f64, y: f64| -(xi2 + p * soliton.q_pow_pm1_at(x)) * y;
    let n = grid.len();
    let mut ys = Vec::with_capacity(n);
    let mut dys = Vec::with_capacity(n);
    let (mut y, mut v) = (y0, dy0);
    ys.push(y);
    dys.push(v);
    for i in 0..n - 1 {
        let x = grid.x()[i];
        let (k1y, k1v) = (v, acc(x, y));
        let (k2y, k2v) = (v + 0.5 * h * k1v, acc(x + 0.5 * h, y + 0.5 * h * k1y));
        let (k3y, k3v) = (v + 0.5 * h * k2v, acc(x + 0.5 * h, y + 0.5 * h * k2y));
        let (k4y, k4v) = (v + h * k3v, acc(x + h, y + h * k3y));
        y += h / 6.0 * (k1y + 2.0 * k2y + 2.0 * k3y + k4y);
        v += h / 6.0 * (k1v + 2.0 * k2v + 2.0 * k3v + k4v);
        ys.push(y);
        dys.push(v);
    }
    (ys, dys)
}

/// Least-squares fit `y ≈ α cos ξx + β sin ξx` on `x ≥ x0`; returns `(α, β, rel. rms)`.
fn far_field_fit(x: &[f64], y: &[f64], xi: f64, x0: f64) -> (f64, f64, f64) {
    let (mut scc, mut sss, mut scs, mut syc, mut sys, mut syy) = (0.0, 0.0, 0.0, 0.0, 0.0, 0.0);
    let mut count = 0usize;
    for (&xx, &yy) in x.iter().zip(y) {
        if xx < x0 {
            continue;
        }
        let (s, c) = (xi * xx).sin_cos();
        scc += c * c;
        sss += s * s;
        scs += c * s;
        syc += yy * c;
        sys += yy * s;
        syy += yy * yy;
        count += 1;
    }
    let det = scc * sss - scs * scs;
    let alpha = (syc * sss - sys * scs) / det;
    let beta = (sys * scc - syc * scs) / det;
    let mut res = 0.0;
    for (&xx, &yy) in x.iter().zip(y) {
        if xx >= x0 {
            let r = yy - alpha * (xi * xx).cos() - beta * (xi * xx).sin();
            res += r * r;
        }
    }
    let rel = (res / count as f64).sqrt() / (syy / count as f64).sqrt().max(f64::MIN_POSITIVE);
    (alpha, beta, rel)
}

pub fn distorted_wave(soliton: &SolitonProfile) -> Result<DistortedWave> {
    let params = &soliton.params;
    let grid = soliton.grid();
    let energy = params.resonance_energy();
    if !(energy > 1.0) {
        return Err(NlkgError::Config(format!("resonance energy {energy} is not above the continuum edge")));
    }
    let xi = (energy - 1.0).sqrt();
    let (y, _) = integrate_wave(soliton, energy, 1.0, 0.0);
    let x0 = grid.half_length() - grid.sponge_width().max(10.0 * std::f64::consts::PI / xi);
    let (alpha, beta, fit_residual) = far_field_fit(grid.x(), &y, xi, x0);
    let tol = FIT_TOL * (grid.dx() / crate::spectrum::eigen::REFERENCE_DX).powi(4).max(1.0);
    if !(fit_residual < tol) {
        return Err(NlkgError::Residual { what: "distorted-wave far-field fit".into(), value: fit_residual, tol });
    }
    // α cos + β sin = 2Re(a e^{iξx}) with a = (α − iβ)/2
    let a = Complex64::new(alpha, -beta) * 0.5;
    let scale = 1.0 / (2.0 * a.norm());
    let raw = Field::from_values(grid, Parity::Even, y);
    Ok(DistortedWave { energy, xi, g: raw.scaled(scale), amplitude: a * scale, raw, fit_residual })
}

/// Wronskian `y_e y_o' − y_e' y_o` of the even and odd solutions along the grid.
pub fn wronskian(soliton: &SolitonProfile, energy: f64) -> Vec<f64> {
    let (ye, dye) = integrate_wave(soliton, energy, 1.0, 0.0);
    let (yo, dyo) = integrate_wave(soliton, energy, 0.0, 1.0);
    (0..ye.len()).map(|i| ye[i] * dyo[i] - dye[i] * yo[i]).collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct FgrSample {
    pub p: f64,
    pub xi: f64,
    /// The free constant in `g₂ = (1, 2iλ)ᵀ c g`.
    pub c: Complex64,
    pub gamma_pairing: Complex64,
    pub gamma_reduced: Complex64,
    pub agreement: f64,
}

impl FgrSample {
    pub fn gamma_abs(&self) -> f64 {
        self.gamma_pairing.norm()
    }

    pub fn phase(&self) -> f64 {
        self.gamma_pairing.arg()
    }
}

/// `⟨−f''(Q)φ₂², g⟩ = −p(p−1)⟨Q^{p−2}φ₂², g⟩`.
fn reduced_integral(profile: &RefinedProfile, wave: &DistortedWave) -> f64 {
    let p = &profile.params;
    let vals: Vec<f64> = profile
        .soliton
        .q
        .values()
        .iter()
        .zip(profile.phi2.values())
        .map(|(&q, &phi)| -p.ddf(q) * phi * phi)
        .collect();
    dot(&Field::from_values(profile.grid(), Parity::Even, vals), &wave.g)
}

/// `γ` with an explicit choice of `c`.
pub fn fgr_gamma_with_c(profile: &RefinedProfile, wave: &DistortedWave, c: Complex64) -> Result<FgrSample> {
    let (_, g2) = profile.g2_coefficient()?;
    let lambda = profile.params.lambda;
    // ⟨JG₂, (1, 2iλ)ᵀ c g⟩ = c̄ (⟨G₂₂, g⟩ + 2iλ⟨G₂₁, g⟩)
    let pairing = c.conj() * Complex64::new(dot(&g2.second, &wave.g), 2.0 * lambda * dot(&g2.first, &wave.g));
    let reduced = c.conj() * reduced_integral(profile, wave);
    let agreement = (pairing - reduced).norm() / pairing.norm().max(reduced.norm()).max(f64::MIN_POSITIVE);
    Ok(FgrSample { p: profile.params.p, xi: wave.xi, c, gamma_pairing: pairing, gamma_reduced: reduced, agreement })
}

/// `γ` with `c = ±1` chosen so that the reduced form is real and non-negative.
pub fn fgr_gamma(profile: &RefinedProfile, wave: &DistortedWave) -> Result<FgrSample> {
    let r = reduced_integral(profile, wave);
    let c = Complex64::new(if r < 0.0 { -1.0 } else { 1.0 }, 0.0);
    let s = fgr_gamma_with_c(profile, wave, c)?;
    if !(s.agreement < AGREEMENT_TOL) {
        return Err(NlkgError::Residual { what: "FGR pairing vs reduced form".into(), value: s.agreement, tol: AGREEMENT_TOL });
    }
    Ok(s)
}

/// All objects needed for `γ` at one exponent.
pub fn fgr_at(p: f64, grid: &Arc<Grid>) -> Result<(RefinedProfile, DistortedWave, FgrSample)> {
    let params = ModelParams::new(p)?;
    let s = soliton(&params, grid);
    let basis = eigenbasis(&params, &s, grid)?;
    let profile = build_profile(&params, &basis, &s)?;
    let wave = distorted_wave(&s)?;
    let sample = fgr_gamma(&profile, &wave)?;
    Ok((profile, wave, sample))
}

#[derive(Debug, Clone)]
pub struct ScanEntry {
    pub p: f64,
    pub result: Result<FgrSample>,
    /// `|γ|` below `1e−3 ×` the scan median.
    pub dip: bool,
}

/// Independent `γ(p)` evaluations, computed in parallel and returned sorted by `p`.
pub fn fgr_scan(p_grid: &[f64], grid: &Arc<Grid>) -> Vec<ScanEntry> {
    let mut ps = p_grid.to_vec();
    ps.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let results: Vec<Result<FgrSample>> = ps
        .par_iter()
        .map(|&p| {
            if p <= P_MIN + SCAN_MARGIN {
                return Err(NlkgError::Config(format!("p = {p} too close to 5/3 for a scan")));
            }
            fgr_at(p, grid).map(|(_, _, s)| s)
        })
        .collect();
    let mut mags: Vec<f64> = results.iter().filter_map(|r| r.as_ref().ok()).map(|s| s.gamma_abs()).collect();
    mags.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let median = if mags.is_empty() { 0.0 } else { mags[mags.len() / 2] };
    ps.into_iter()
        .zip(results)
        .map(|(p, result)| {
            let dip = matches!(&result, Ok(s) if s.gamma_abs() < 1e-3 * median);
            ScanEntry { p, result, dip }
        })
        .collect()
}

/// `n` evenly spaced exponents on `[lo, hi]`.
pub fn linspace(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    match n {
        0 => Vec::new(),
        1 => vec![lo],
        _ => (0..n).map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64).collect(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn grid() -> Arc<Grid> {
        Grid::new(100.0, 4096, 20.0).unwrap()
    }

    #[test]
    fn p_two_momentum() {
        let s = soliton(&ModelParams::new(2.0).unwrap(), &grid());
        let w = distorted_wave(&s).unwrap();
        assert!((w.xi - 2f64.sqrt()).abs() < 1e-14);
        assert!((2.0 * w.amplitude.norm() - 1.0).abs() < 1e-12);
        assert!(w.fit_residual < 1e-6);
    }

    #[test]
    fn gamma_at_two_and_c_scaling() {
        let (profile, wave, s) = fgr_at(2.0, &grid()).unwrap();
        assert!(s.gamma_abs() > 0.0 && s.agreement < 1e-4);
        assert!(s.gamma_reduced.re > 0.0 && s.gamma_reduced.im == 0.0);
        let doubled = fgr_gamma_with_c(&profile, &wave, s.c * 2.0).unwrap();
        assert!((doubled.gamma_abs() / s.gamma_abs() - 2.0).abs() < 1e-12);
        assert!((doubled.agreement - s.agreement).abs() < 1e-12);
    }

    #[test]
    fn scan_edge_cases() {
        assert!(fgr_scan(&[], &grid()).is_empty());
        let one = fgr_scan(&[2.0], &grid());
        let (_, _, direct) = fgr_at(2.0, &grid()).unwrap();
        assert_eq!(one[0].result.as_ref().unwrap(), &direct);
        let low = fgr_scan(&[P_MIN + 1e-4], &grid());
        assert!(low[0].result.is_err());
    }
}

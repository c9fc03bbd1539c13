//! The refined profile `Φ[z] = Qi + Φ̃[z]`, its corrector, the quadratic
//! coefficient `G₂` and the symplectically orthogonal decomposition
//! `u = Φ[z] + η`.
//!
//! `z ∈ ℂ²` is carried as four real coordinates `(Re z₁, Im z₁, Re z₂, Im z₂)`.
//! Since `Φ̃[z] = 2Re(z₁Φ₀ + z₂Φ₂)` is real-linear, `D_zΦ` is the constant
//! set of directions `e_a = ∂Φ/∂x_a` and the Gram matrix
//! `M_ab = ⟨J e_a, e_b⟩` does not depend on `z`.

use std::sync::Arc;

use num_complex::Complex64;

use crate::error::{NlkgError, Result};
use crate::grid::{dot, laplacian_dirichlet, ComplexPair, Field, Grid, Parity, StatePair};
use crate::linalg;
use crate::params::ModelParams;
use crate::spectrum::{EigenBasis, SolitonProfile};

/// Default radius of the admissible `z`-ball.
pub const DEFAULT_Z_RADIUS: f64 = 0.05;

pub type Modes = [Complex64; 2];

pub fn modes_to_real(z: &Modes) -> [f64; 4] {
    [z[0].re, z[0].im, z[1].re, z[1].im]
}

pub fn real_to_modes(x: &[f64; 4]) -> Modes {
    [Complex64::new(x[0], x[1]), Complex64::new(x[2], x[3])]
}

pub fn modes_norm(z: &Modes) -> f64 {
    (z[0].norm_sqr() + z[1].norm_sqr()).sqrt()
}

/// `z̃₀[z] = (ν₀z̄₁, iλz₂)`, the linear flow on the mode coordinates.
pub fn linear_mode_flow(params: &ModelParams, z: &Modes) -> Modes {
    [z[0].conj() * params.nu0, Complex64::i() * params.lambda * z[1]]
}

#[derive(Debug, Clone)]
pub struct RefinedProfile {
    pub params: ModelParams,
    pub soliton: SolitonProfile,
    pub phi0: Field,
    pub phi2: Field,
    pub phi0_vec: ComplexPair,
    pub phi2_vec: ComplexPair,
    /// `e_a = ∂Φ/∂x_a`, `a = 0..4`.
    pub directions: [StatePair; 4],
    /// `M_ab = ⟨J e_a, e_b⟩`.
    pub gram: [[f64; 4]; 4],
    pub gram_det: f64,
}

/// A decomposition `u = Φ[z] + η` with `⟨Jη, e_a⟩ = 0`.
#[derive(Debug, Clone)]
pub struct Decomposition {
    pub z: Modes,
    pub eta: StatePair,
    pub residuals: [f64; 4],
    pub newton_iters: usize,
}

/// Right side of the modulation system.
#[derive(Debug, Clone)]
pub struct ModulationRhs {
    pub eta_dot: StatePair,
    pub z_dot: Modes,
    /// `z̃ = z̃₀ + z̃_R`.
    pub z_tilde: Modes,
}

fn j_pair(u: &StatePair, v: &StatePair) -> f64 {
    // ⟨Ju, v⟩ with Ju = (u₂, −u₁)
    dot(&u.second, &v.first) - dot(&u.first, &v.second)
}

pub fn build_profile(params: &ModelParams, basis: &EigenBasis, soliton: &SolitonProfile) -> Result<RefinedProfile> {
    let unit = |re: f64, im: f64| Complex64::new(re, im);
    let directions = [
        basis.phi0_vec.twice_real_part(unit(1.0, 0.0)),
        basis.phi0_vec.twice_real_part(unit(0.0, 1.0)),
        basis.phi2_vec.twice_real_part(unit(1.0, 0.0)),
        basis.phi2_vec.twice_real_part(unit(0.0, 1.0)),
    ];
    let mut gram = [[0.0; 4]; 4];
    for a in 0..4 {
        for b in 0..4 {
            gram[a][b] = j_pair(&directions[a], &directions[b]);
        }
    }
    let det = linalg::det(&gram);
    let scale = gram.iter().flatten().fold(0.0f64, |s, v| s.max(v.abs()));
    if !(det.abs() >= 1e-12 * scale.powi(4)) || scale == 0.0 {
        return Err(NlkgError::DegenerateBasis(det));
    }
    Ok(RefinedProfile {
        params: *params,
        soliton: soliton.clone(),
        phi0: basis.phi[0].clone(),
        phi2: basis.phi[2].clone(),
        phi0_vec: basis.phi0_vec.clone(),
        phi2_vec: basis.phi2_vec.clone(),
        directions,
        gram,
        gram_det: det,
    })
}

impl RefinedProfile {
    pub fn grid(&self) -> &Arc<Grid> {
        self.soliton.grid()
    }

    /// `Qi = (Q, 0)`.
    pub fn ground(&self) -> StatePair {
        StatePair::new(self.soliton.q.clone(), Field::zeros(self.grid(), Parity::Even))
    }

    /// `D_zΦ w = Σ_a w_a e_a` for real coordinates `w`.
    pub fn tangent(&self, w: &[f64; 4]) -> StatePair {
        let mut out = StatePair::zeros(self.grid(), Parity::Even);
        for (c, e) in w.iter().zip(&self.directions) {
            if *c != 0.0 {
                out.axpy(*c, e);
            }
        }
        out
    }

    /// `Φ̃[z]`.
    pub fn tilde(&self, z: &Modes) -> StatePair {
        self.tangent(&modes_to_real(z))
    }

    /// `Φ[z] = Qi + Φ̃[z]`.
    pub fn profile(&self, z: &Modes) -> StatePair {
        &self.ground() + &self.tilde(z)
    }

    /// `b ↦ ⟨J r, e_b⟩`.
    pub fn project(&self, r: &StatePair) -> [f64; 4] {
        std::array::from_fn(|b| j_pair(r, &self.directions[b]))
    }

    /// Solve `Σ_a w_a M_ab = c_b`.
    pub fn solve_gram(&self, c: &[f64; 4]) -> Result<[f64; 4]> {
        Ok(linalg::solve(&linalg::transpose(&self.gram), c)?.0)
    }

    /// `R̂[z] = −(f(Φ₁) − f(Q) − f'(Q)Φ̃₁) j`.
    pub fn rhat(&self, z: &Modes) -> StatePair {
        let t = self.tilde(z);
        let p = &self.params;
        let q = self.soliton.q.values();
        let second = t
            .first
            .values()
            .iter()
            .zip(q)
            .map(|(&t1, &q)| -(p.f(q + t1) - p.f(q) - p.df(q) * t1))
            .collect();
        StatePair::new(Field::zeros(self.grid(), Parity::Even), Field::from_values(self.grid(), Parity::Even, second))
    }

    /// Real coordinates of `z̃_R[z]`, from `⟨J D_zΦ z̃_R, e_b⟩ = −⟨J R̂[z], e_b⟩`.
    pub fn corrector_real(&self, z: &Modes) -> Result<[f64; 4]> {
        let c = self.project(&self.rhat(z));
        self.solve_gram(&c.map(|v| -v))
    }

    pub fn corrector(&self, z: &Modes) -> Result<Modes> {
        Ok(real_to_modes(&self.corrector_real(z)?))
    }

    /// `R[z] = D_zΦ z̃_R + R̂[z]`.
    pub fn remainder(&self, z: &Modes) -> Result<StatePair> {
        let w = self.corrector_real(z)?;
        Ok(&self.tangent(&w) + &self.rhat(z))
    }

    /// `z̃ = z̃₀ + z̃_R`.
    pub fn z_tilde(&self, z: &Modes) -> Result<Modes> {
        let lin = linear_mode_flow(&self.params, z);
        let r = self.corrector(z)?;
        Ok([lin[0] + r[0], lin[1] + r[1]])
    }

    /// `∂²_{z₂} z̃_R` at `z = 0` and `G₂ = D_zΦ ∂²_{z₂}z̃_R − f''(Q)φ₂² j`.
    ///
    /// Near 0, `R̂ = h (z₂ + z̄₂)²` with `h = −½f''(Q)φ₂² j`; the solve is
    /// real-linear, so the holomorphic `z₂²` coefficient of `z̃_R` is `w(h)`
    /// and the second derivative is `2w(h) = w(2h)`.
    pub fn g2_coefficient(&self) -> Result<(Modes, StatePair)> {
        let p = &self.params;
        let q = self.soliton.q.values();
        let f2 = self
            .phi2
            .values()
            .iter()
            .zip(q)
            .map(|(&phi, &q)| -p.ddf(q) * phi * phi)
            .collect();
        let forcing = StatePair::new(Field::zeros(self.grid(), Parity::Even), Field::from_values(self.grid(), Parity::Even, f2));
        let c = self.project(&forcing);
        let w = self.solve_gram(&c.map(|v| -v))?;
        let g2 = &self.tangent(&w) + &forcing;
        Ok((real_to_modes(&w), g2))
    }

    /// Wirtinger second derivative `∂²_{z₂} z̃_R(0)` by central differences with step `h`.
    pub fn g2_finite_difference(&self, h: f64) -> Result<Modes> {
        let zr = |a: f64, b: f64| self.corrector(&[Complex64::new(0.0, 0.0), Complex64::new(a, b)]);
        let c0 = zr(0.0, 0.0)?;
        let (xp, xm) = (zr(h, 0.0)?, zr(-h, 0.0)?);
        let (yp, ym) = (zr(0.0, h)?, zr(0.0, -h)?);
        let (pp, pm, mp, mm) = (zr(h, h)?, zr(h, -h)?, zr(-h, h)?, zr(-h, -h)?);
        Ok(std::array::from_fn(|k| {
            let dxx = (xp[k] - 2.0 * c0[k] + xm[k]) / (h * h);
            let dyy = (yp[k] - 2.0 * c0[k] + ym[k]) / (h * h);
            let dxy = (pp[k] - pm[k] - mp[k] + mm[k]) / (4.0 * h * h);
            (dxx - dyy - Complex64::new(0.0, 2.0) * dxy) * 0.25
        }))
    }

    /// One linear solve: `Σ_a x_a M_ab = ⟨J(u − Qi), e_b⟩`, `η = u − Φ[z]`.
    pub fn decompose(&self, u: &StatePair) -> Result<Decomposition> {
        if u.first.parity() != Parity::Even || u.second.parity() != Parity::Even {
            return Err(NlkgError::ParityMismatch("decompose expects an even state".into()));
        }
        let d = u - &self.ground();
        let x = self.solve_gram(&self.project(&d))?;
        let eta = &d - &self.tangent(&x);
        let residuals = self.project(&eta);
        Ok(Decomposition { z: real_to_modes(&x), eta, residuals, newton_iters: 1 })
    }

    /// [`decompose`](Self::decompose), failing when `|z|` exceeds `radius`.
    pub fn decompose_within(&self, u: &StatePair, radius: f64) -> Result<Decomposition> {
        let d = self.decompose(u)?;
        let r = modes_norm(&d.z);
        if r > radius {
            return Err(NlkgError::LeftNeighborhood(r));
        }
        Ok(d)
    }

    /// `Jdiag(−∂²+1, 1)η − R[z] + (f(Φ₁+η₁) − f(Φ₁)) j − σ u₂ j`, the
    /// right side that drives `η̇ + D_zΦ(ż − z̃)`.
    pub fn eta_forcing(&self, decomp: &Decomposition, sponge: Option<&[f64]>) -> Result<StatePair> {
        let grid = self.grid().clone();
        let phi = self.profile(&decomp.z);
        let eta = &decomp.eta;
        let n = grid.len();
        let mut lap = vec![0.0; n];
        laplacian_dirichlet(eta.first.values(), Parity::Even, grid.dx(), &mut lap);
        let p = &self.params;
        let phi1 = phi.first.values();
        let e1 = eta.first.values();
        let mut second: Vec<f64> =
            (0..n).map(|i| lap[i] - e1[i] + p.f(phi1[i] + e1[i]) - p.f(phi1[i])).collect();
        if let Some(sigma) = sponge {
            let u2 = &phi.second + &eta.second;
            for (s, (sg, v)) in second.iter_mut().zip(sigma.iter().zip(u2.values())) {
                *s -= sg * v;
            }
        }
        let base = StatePair::new(eta.second.clone(), Field::from_values(&grid, Parity::Even, second));
        Ok(&base - &self.remainder(&decomp.z)?)
    }

    pub fn modulation_rhs(&self, decomp: &Decomposition, sponge: Option<&[f64]>) -> Result<ModulationRhs> {
        let forcing = self.eta_forcing(decomp, sponge)?;
        let w = self.solve_gram(&self.project(&forcing))?;
        let z_tilde = self.z_tilde(&decomp.z)?;
        let dz = real_to_modes(&w);
        let eta_dot = &forcing - &self.tangent(&w);
        Ok(ModulationRhs { eta_dot, z_dot: [z_tilde[0] + dz[0], z_tilde[1] + dz[1]], z_tilde })
    }
}

//! The transformed variable `v = Tη`, `T = ⟨iε∂x⟩^{−(N+1)}A`, its inverse on
//! the continuous sector, and the virial / FGR functionals monitored along
//! trajectories.
//!
//! Every functional is a bilinear form `F(η) = B(η, η)`, so its time
//! derivative along the flow is `B(η̇, η) + B(η, η̇)` with `η̇` from the
//! modulation system; [`ddt_consistency`] compares that against finite
//! differences of the recorded series.

use num_complex::Complex64;

use crate::banded::SymBanded;
use crate::error::{NlkgError, Result};
use crate::evolution::{Frame, Trajectory};
use crate::grid::{deriv1, dot, Field, Parity, StatePair};
use crate::multiplier::bessel_multiplier;
use crate::params::ModelParams;
use crate::profile::{Modes, RefinedProfile};
use crate::spectrum::darboux::{apply_chain, apply_chain_adjoint};
use crate::spectrum::oracle::sector_matrix;
use crate::spectrum::SolitonProfile;
use crate::weights::WeightSet;

/// `v = Tη` with its parity (even for `p < 2`, odd at `p = 2`).
#[derive(Debug, Clone)]
pub struct TransformedField {
    pub v: StatePair,
    pub parity: Parity,
    /// `‖v‖` restricted to the sponge layer.
    pub sponge_tail: f64,
}

/// `T` and its inverse on `L²_c(L₀)` for one `(p, ε)`.
#[derive(Debug, Clone)]
pub struct Transform {
    pub params: ModelParams,
    pub soliton: SolitonProfile,
    pub epsilon: f64,
    even_sector: SymBanded,
    /// Orthonormal discrete eigenvectors of the even sector (symmetrized coordinates).
    even_modes: Vec<Vec<f64>>,
}

fn trapezoid_sqrt_weight(i: usize) -> f64 {
    if i == 0 {
        std::f64::consts::FRAC_1_SQRT_2
    } else {
        1.0
    }
}

fn normalize(v: &mut [f64]) {
    let n = v.iter().map(|x| x * x).sum::<f64>().sqrt();
    v.iter_mut().for_each(|x| *x /= n);
}

fn remove_components(y: &mut [f64], modes: &[Vec<f64>]) {
    for e in modes {
        let c: f64 = e.iter().zip(y.iter()).map(|(a, b)| a * b).sum();
        y.iter_mut().zip(e).for_each(|(v, a)| *v -= c * a);
    }
}

impl Transform {
    pub fn new(soliton: &SolitonProfile, epsilon: f64) -> Result<Transform> {
        if !(epsilon >= 0.0) {
            return Err(NlkgError::Config(format!("epsilon = {epsilon} must be >= 0")));
        }
        let params = soliton.params;
        let (even_sector, _) = sector_matrix(soliton, Parity::Even);
        let expected = (0..=params.n_top).filter(|j| j % 2 == 0).count();
        let eigs = even_sector.eigenvalues_below(-1.0 - params.p, 1.0, 1e-12);
        if eigs.len() != expected {
            return Err(NlkgError::Singular(format!(
                "even sector has {} eigenvalues below 1, expected {expected}",
                eigs.len()
            )));
        }
        let dim = even_sector.dim();
        let mut even_modes: Vec<Vec<f64>> = Vec::new();
        for &mu in &eigs {
            // inverse iteration just off the discrete eigenvalue
            let f = even_sector.ldlt(mu - 1e-9 * (1.0 + mu.abs()));
            let mut y: Vec<f64> = (0..dim).map(|i| 1.0 / (1.0 + i as f64 * 1e-3)).collect();
            for _ in 0..4 {
                remove_components(&mut y, &even_modes);
                y = f.solve(&y);
                normalize(&mut y);
            }
            remove_components(&mut y, &even_modes);
            normalize(&mut y);
            even_modes.push(y);
        }
        Ok(Transform { params, soliton: soliton.clone(), epsilon, even_sector, even_modes })
    }

    /// Order `N + 1` of the multiplier.
    pub fn order(&self) -> f64 {
        (self.params.n_top + 1) as f64
    }

    pub fn apply_scalar(&self, f: &Field) -> Field {
        bessel_multiplier(&apply_chain_adjoint(&self.params, f), self.order(), self.epsilon)
    }

    /// `Tη`, component-wise.
    pub fn apply(&self, eta: &StatePair) -> TransformedField {
        let v = StatePair::new(self.apply_scalar(&eta.first), self.apply_scalar(&eta.second));
        let parity = v.first.parity();
        let grid = v.grid().clone();
        let start = grid.sponge_start();
        let mask: Vec<f64> = grid.x().iter().map(|&x| if x > start { 1.0 } else { 0.0 }).collect();
        let tail = (dot(&v.first.mul_weight(&mask, Parity::Even), &v.first)
            + dot(&v.second.mul_weight(&mask, Parity::Even), &v.second))
        .sqrt();
        TransformedField { v, parity, sponge_tail: tail }
    }

    /// `Π_j (L₀ − μ_j)⁻¹ P_c A† ⟨iε∂x⟩^{N+1} v` on one even-result component.
    pub fn reconstruct_scalar(&self, v: &Field) -> Result<Field> {
        let w = apply_chain(&self.params, &bessel_multiplier(v, -self.order(), self.epsilon));
        if w.parity() != Parity::Even {
            return Err(NlkgError::ParityMismatch("reconstruction expects an even preimage".into()));
        }
        let n = w.len();
        let mut y: Vec<f64> = (0..n - 1).map(|i| w.values()[i] * trapezoid_sqrt_weight(i)).collect();
        for &mu in self.params.eigenvalues() {
            remove_components(&mut y, &self.even_modes);
            y = self.even_sector.solve(mu, &y)?;
        }
        remove_components(&mut y, &self.even_modes);
        let mut out: Vec<f64> = y.iter().enumerate().map(|(i, v)| v / trapezoid_sqrt_weight(i)).collect();
        out.push(0.0);
        Ok(Field::from_values(w.grid(), Parity::Even, out))
    }

    pub fn reconstruct(&self, v: &TransformedField) -> Result<StatePair> {
        Ok(StatePair::new(self.reconstruct_scalar(&v.v.first)?, self.reconstruct_scalar(&v.v.second)?))
    }
}

/// `P_c f = f − Σ_j ⟨f, φ_j⟩φ_j/‖φ_j‖²` over the given eigenfunctions.
pub fn project_continuous(f: &Field, phis: &[Field]) -> Field {
    let mut out = f.clone();
    for phi in phis.iter().filter(|p| p.parity() == f.parity()) {
        out.axpy(-dot(f, phi) / dot(phi, phi), phi);
    }
    out
}

/// `S_C f = ½φ'f + φf'` for odd `φ` and even `φ'`.
pub fn s_operator(phi: &[f64], dphi: &[f64], f: &Field) -> Field {
    let mut out = f.mul_weight(dphi, Parity::Even).scaled(0.5);
    out.axpy(1.0, &deriv1(f).mul_weight(phi, Parity::Odd));
    out
}

fn s_pair(phi: &[f64], dphi: &[f64], u: &StatePair) -> StatePair {
    StatePair::new(s_operator(phi, dphi, &u.first), s_operator(phi, dphi, &u.second))
}

/// `½⟨Ja, b⟩` with `Ja = (a₂, −a₁)`.
fn half_j_pair(a: &StatePair, b: &StatePair) -> f64 {
    0.5 * (dot(&a.second, &b.first) - dot(&a.first, &b.second))
}

/// `½⟨Ja, σ₃ w b⟩ = ½(⟨a₂, w b₁⟩ + ⟨a₁, w b₂⟩)`.
fn half_sigma3_pair(w: &[f64], a: &StatePair, b: &StatePair) -> f64 {
    0.5 * (dot(&a.second, &b.first.mul_weight(w, Parity::Even))
        + dot(&a.first, &b.second.mul_weight(w, Parity::Even)))
}

/// The five monitored functionals, in the order
/// `J_FGR, I_1st,1, I_1st,2, I_2nd,1, I_2nd,2`.
pub const FUNCTIONAL_NAMES: [&str; 5] = ["J_FGR", "I1_1", "I1_2", "I2_1", "I2_2"];

/// Weight arrays derived once from a [`WeightSet`].
#[derive(Debug, Clone)]
pub struct Functionals {
    pub weights: WeightSet,
    /// `φ_A'  = ζ_A²`.
    dphi_a: Vec<f64>,
    zeta_a4: Vec<f64>,
    /// Distorted wave `g` at energy `4λ²` and the sign `c` of `g₂ = c(g, 2iλg)`.
    pub wave: Field,
    pub wave_sign: f64,
    pub lambda: f64,
}

impl Functionals {
    pub fn new(weights: WeightSet, wave: &Field, wave_sign: f64, params: &ModelParams) -> Functionals {
        let dphi_a = weights.zeta_a.iter().map(|z| z * z).collect();
        let zeta_a4 = weights.zeta_a.iter().map(|z| z.powi(4)).collect();
        Functionals { weights, dphi_a, zeta_a4, wave: wave.clone(), wave_sign, lambda: params.lambda }
    }

    /// `χ_A(z₂²g₂ + z̄₂²ḡ₂)` as a real state.
    pub fn fgr_direction(&self, z2: Complex64) -> StatePair {
        let sq = z2 * z2 * self.wave_sign;
        let g = self.wave.mul_weight(&self.weights.chi_a, Parity::Even);
        StatePair::new(g.scaled(2.0 * sq.re), g.scaled(-4.0 * self.lambda * sq.im))
    }

    /// `J_FGR = ⟨Jη, χ_A(z₂²g₂ + c.c.)⟩`; linear in `η` and in `z₂²`.
    pub fn j_fgr(&self, eta: &StatePair, z2: Complex64) -> f64 {
        2.0 * half_j_pair(eta, &self.fgr_direction(z2))
    }

    pub fn i1_1(&self, a: &StatePair, b: &StatePair) -> f64 {
        half_j_pair(a, &s_pair(&self.weights.phi_a, &self.dphi_a, b))
    }

    pub fn i1_2(&self, a: &StatePair, b: &StatePair) -> f64 {
        half_sigma3_pair(&self.zeta_a4, a, b)
    }

    pub fn i2_1(&self, a: &StatePair, b: &StatePair) -> f64 {
        half_j_pair(a, &s_pair(&self.weights.psi_ab, &self.weights.psi_ab_d1, b))
    }

    pub fn i2_2(&self, a: &StatePair, b: &StatePair) -> f64 {
        half_sigma3_pair(&self.weights.exp_kappa_bracket, a, b)
    }

    /// `(I_1st,1, I_1st,2)`.
    pub fn virial_1(&self, eta: &StatePair) -> (f64, f64) {
        (self.i1_1(eta, eta), self.i1_2(eta, eta))
    }

    /// `(I_2nd,1, I_2nd,2)`.
    pub fn virial_2(&self, v: &TransformedField) -> (f64, f64) {
        (self.i2_1(&v.v, &v.v), self.i2_2(&v.v, &v.v))
    }

    pub fn all(&self, eta: &StatePair, v: &TransformedField, z2: Complex64) -> [f64; 5] {
        let (a, b) = self.virial_1(eta);
        let (c, d) = self.virial_2(v);
        [self.j_fgr(eta, z2), a, b, c, d]
    }

    /// Time derivatives by polarization, given `η̇`, `v̇ = Tη̇` and `ż₂`.
    pub fn all_ddt(
        &self,
        eta: &StatePair,
        eta_dot: &StatePair,
        v: &TransformedField,
        v_dot: &TransformedField,
        z2: Complex64,
        z2_dot: Complex64,
    ) -> [f64; 5] {
        // d(z₂²) = 2z₂ż₂; the FGR direction is real-linear in z₂²
        let dw = {
            let s = 2.0 * z2 * z2_dot * self.wave_sign;
            let g = self.wave.mul_weight(&self.weights.chi_a, Parity::Even);
            StatePair::new(g.scaled(2.0 * s.re), g.scaled(-4.0 * self.lambda * s.im))
        };
        let j = self.j_fgr(eta_dot, z2) + 2.0 * half_j_pair(eta, &dw);
        [
            j,
            self.i1_1(eta_dot, eta) + self.i1_1(eta, eta_dot),
            self.i1_2(eta_dot, eta) + self.i1_2(eta, eta_dot),
            self.i2_1(&v_dot.v, &v.v) + self.i2_1(&v.v, &v_dot.v),
            self.i2_2(&v_dot.v, &v.v) + self.i2_2(&v.v, &v_dot.v),
        ]
    }
}

/// `ξ₁ = χ_Aζ_Bv₁`, the potential `V_B` and `∫(ξ₁'² + V_Bξ₁²)`.
#[derive(Debug, Clone)]
pub struct LocalizedForm {
    pub xi1: Field,
    pub v_b: Vec<f64>,
    pub quadratic_form: f64,
}

/// `V'_{N+1}` in closed form: `V_{N+1} = −c Q^{p−1}`, `(Q^{p−1})' = −2ak₀sech²(ax)tanh(ax)`.
pub fn top_potential_derivative(soliton: &SolitonProfile) -> Vec<f64> {
    let params = &soliton.params;
    let c = soliton.potential_coefficient(params.n_top + 1);
    let a = params.scale();
    soliton
        .grid()
        .x()
        .iter()
        .zip(soliton.q_pow_pm1.values())
        .map(|(&x, &qp)| 2.0 * a * c * qp * (a * x).tanh())
        .collect()
}

/// `V_B = ½B⁻¹(χ''|x| + 2χ'x/|x|) − ½(φ_B/ζ_B²)V'_{N+1}`.
pub fn potential_vb(weights: &WeightSet, soliton: &SolitonProfile) -> Vec<f64> {
    let dv = top_potential_derivative(soliton);
    let x = weights.grid.x();
    (0..x.len())
        .map(|i| {
            let sgn = if x[i] > 0.0 { 1.0 } else { 0.0 };
            let cut = 0.5 / weights.b * (weights.chi1_d2[i] * x[i].abs() + 2.0 * weights.chi1_d1[i] * sgn);
            let zb = weights.zeta_b[i];
            cut - 0.5 * weights.phi_b[i] / (zb * zb) * dv[i]
        })
        .collect()
}

pub fn localized_form(v: &TransformedField, weights: &WeightSet, soliton: &SolitonProfile) -> LocalizedForm {
    let w: Vec<f64> = weights.chi_a.iter().zip(&weights.zeta_b).map(|(a, b)| a * b).collect();
    let xi1 = v.v.first.mul_weight(&w, Parity::Even);
    let v_b = potential_vb(weights, soliton);
    let d = deriv1(&xi1);
    let quadratic_form = dot(&d, &d) + dot(&xi1.mul_weight(&v_b, Parity::Even), &xi1);
    LocalizedForm { xi1, v_b, quadratic_form }
}

/// Functional values and their analytic time derivatives at recorded frames.
#[derive(Debug, Clone, Default)]
pub struct FunctionalSeries {
    pub times: Vec<f64>,
    pub values: Vec<[f64; 5]>,
    pub ddt: Vec<[f64; 5]>,
    pub sponge_tail: Vec<f64>,
}

impl FunctionalSeries {
    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }
}

/// Evaluates the functionals on each recorded frame of an evolution.
pub struct VirialMonitor<'a> {
    pub profile: &'a RefinedProfile,
    pub transform: &'a Transform,
    pub functionals: &'a Functionals,
    pub sponge: Option<Vec<f64>>,
    pub series: FunctionalSeries,
    pub error: Option<NlkgError>,
}

impl<'a> VirialMonitor<'a> {
    pub fn new(
        profile: &'a RefinedProfile,
        transform: &'a Transform,
        functionals: &'a Functionals,
        sponge: Option<Vec<f64>>,
    ) -> VirialMonitor<'a> {
        VirialMonitor { profile, transform, functionals, sponge, series: FunctionalSeries::default(), error: None }
    }

    /// Record one frame; the first error is kept and later frames are skipped.
    pub fn observe(&mut self, frame: &Frame) {
        if self.error.is_some() {
            return;
        }
        let d = frame.decomposition;
        if let Err(e) = self.observe_decomposition(frame.t, d) {
            self.error = Some(e);
        }
    }

    /// Evaluate and append; a repeated time (segment boundary) is skipped.
    pub fn observe_decomposition(&mut self, t: f64, d: &crate::profile::Decomposition) -> Result<()> {
        if self.series.times.last().is_some_and(|&last| t <= last) {
            return Ok(());
        }
        let (vals, ddt, tail) = self.evaluate(&d.eta, &d.z, d)?;
        self.series.times.push(t);
        self.series.values.push(vals);
        self.series.ddt.push(ddt);
        self.series.sponge_tail.push(tail);
        Ok(())
    }

    /// Values, analytic derivatives and sponge tail of `v` for one decomposition.
    pub fn evaluate(
        &self,
        eta: &StatePair,
        z: &Modes,
        d: &crate::profile::Decomposition,
    ) -> Result<([f64; 5], [f64; 5], f64)> {
        let rhs = self.profile.modulation_rhs(d, self.sponge.as_deref())?;
        let v = self.transform.apply(eta);
        let v_dot = self.transform.apply(&rhs.eta_dot);
        let f = self.functionals;
        Ok((f.all(eta, &v, z[1]), f.all_ddt(eta, &rhs.eta_dot, &v, &v_dot, z[1], rhs.z_dot[1]), v.sponge_tail))
    }
}

/// Max relative mismatch between centered finite differences of the
/// series subsampled every `sub` frames and the analytic derivative,
/// per functional: `max|FD − D| / max|D|` over interior points.
pub fn ddt_consistency(series: &FunctionalSeries, sub: usize) -> [f64; 5] {
    let idx: Vec<usize> = (0..series.len()).step_by(sub.max(1)).collect();
    let mut out = [0.0; 5];
    for (k, slot) in out.iter_mut().enumerate() {
        let mut err = 0.0f64;
        let mut scale = 0.0f64;
        for w in idx.windows(3) {
            let (a, m, b) = (w[0], w[1], w[2]);
            let fd = (series.values[b][k] - series.values[a][k]) / (series.times[b] - series.times[a]);
            err = err.max((fd - series.ddt[m][k]).abs());
            scale = scale.max(series.ddt[m][k].abs());
        }
        *slot = if scale > 0.0 { err / scale } else { 0.0 };
    }
    out
}

/// Budget terms accumulated along a trajectory, in the order
/// `∫|z₂|⁴, ∫|z₁|², ∫‖η‖²_Σ_A, ∫‖η‖²_{L²_{−κ}}, ∫|ż − z̃|²`.
pub const BUDGET_NAMES: [&str; 5] = ["int_z2_4", "int_z1_2", "int_eta_sigmaA_2", "int_eta_l2kappa_2", "int_zdot_res_2"];

#[derive(Debug, Clone, PartialEq)]
pub struct BudgetReport {
    pub totals: [f64; 5],
    /// Contribution of the last quarter of the time interval, per term.
    pub last_quarter: [f64; 5],
}

impl BudgetReport {
    pub fn total(&self) -> f64 {
        self.totals.iter().sum()
    }

    pub fn last_quarter_fraction(&self) -> f64 {
        let t = self.total();
        if t > 0.0 {
            self.last_quarter.iter().sum::<f64>() / t
        } else {
            0.0
        }
    }

    pub fn term_fraction(&self, k: usize) -> f64 {
        if self.totals[k] > 0.0 {
            self.last_quarter[k] / self.totals[k]
        } else {
            0.0
        }
    }
}

/// Cumulative trapezoid integrals of the five budget integrands.
pub fn cumulative_budgets(traj: &Trajectory) -> Vec<[f64; 5]> {
    let integrand = |k: usize| -> [f64; 5] {
        let z = &traj.z[k];
        let r = traj.zdot_minus_ztilde.get(k).copied().unwrap_or(0.0);
        [
            z[1].norm_sqr().powi(2),
            z[0].norm_sqr(),
            traj.eta_sigma_a[k].powi(2),
            traj.eta_l2_kappa[k].powi(2),
            r * r,
        ]
    };
    let mut acc = [0.0; 5];
    let mut out = Vec::with_capacity(traj.len());
    for k in 0..traj.len() {
        if k > 0 {
            let h = traj.times[k] - traj.times[k - 1];
            let (a, b) = (integrand(k - 1), integrand(k));
            for j in 0..5 {
                acc[j] += 0.5 * h * (a[j] + b[j]);
            }
        }
        out.push(acc);
    }
    out
}

pub fn budgets(traj: &Trajectory) -> BudgetReport {
    let cum = cumulative_budgets(traj);
    let Some(last) = cum.last().copied() else {
        return BudgetReport { totals: [0.0; 5], last_quarter: [0.0; 5] };
    };
    let t0 = traj.times[0];
    let t_q = t0 + 0.75 * (traj.t_end - t0);
    let k = traj.times.iter().position(|&t| t >= t_q).unwrap_or(traj.len() - 1);
    let last_quarter = std::array::from_fn(|j| last[j] - cum[k][j]);
    BudgetReport { totals: last, last_quarter }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::Grid;
    use crate::spectrum::{eigenbasis, soliton};
    use std::sync::Arc;

    fn setup(p: f64, n: usize) -> (Arc<Grid>, SolitonProfile, Transform) {
        let g = Grid::new(100.0, n, 20.0).unwrap();
        let params = ModelParams::new(p).unwrap();
        let s = soliton(&params, &g);
        let t = Transform::new(&s, 0.3).unwrap();
        (g, s, t)
    }

    #[test]
    fn transformed_parity() {
        for (p, parity) in [(2.0, Parity::Odd), (1.8, Parity::Even)] {
            let (g, _, t) = setup(p, 2048);
            let eta = StatePair::new(
                Field::from_fn(&g, Parity::Even, |x| (-x * x / 4.0).exp()),
                Field::zeros(&g, Parity::Even),
            );
            assert_eq!(t.apply(&eta).parity, parity);
        }
    }

    #[test]
    fn chain_kills_even_eigenfunctions() {
        let (g, s, t) = setup(1.9, 4096);
        let b = eigenbasis(&s.params, &s, &g).unwrap();
        for j in [0, 2] {
            let a = apply_chain_adjoint(&t.params, &b.phi[j]);
            assert!(a.norm() / b.phi[j].norm() < 1e-6, "j={j}: {}", a.norm() / b.phi[j].norm());
        }
    }

    #[test]
    fn round_trip_on_continuous_sector() {
        for p in [2.0, 1.8] {
            let (g, s, t) = setup(p, 4096);
            let b = eigenbasis(&s.params, &s, &g).unwrap();
            let f = Field::from_fn(&g, Parity::Even, |x| (1.0 + 0.3 * x * x) * (-x * x / 6.0).exp());
            let eta1 = project_continuous(&f, &b.phi);
            let eta = StatePair::new(eta1.clone(), eta1.scaled(0.5));
            let back = t.reconstruct(&t.apply(&eta)).unwrap();
            let rel = (&back - &eta).norm() / eta.norm();
            assert!(rel < 1e-3, "p={p}: {rel}");
        }
    }

    #[test]
    fn eigenmode_reconstructs_to_zero() {
        let (g, s, t) = setup(2.0, 2048);
        let b = eigenbasis(&s.params, &s, &g).unwrap();
        let eta = StatePair::new(b.phi[0].clone(), Field::zeros(&g, Parity::Even));
        let back = t.reconstruct(&t.apply(&eta)).unwrap();
        assert!(back.norm() < 1e-4 * b.phi[0].norm(), "{}", back.norm());
    }

    #[test]
    fn s_operator_is_skew() {
        let g = Grid::new(100.0, 4096, 20.0).unwrap();
        let w = WeightSet::new(&g, 40.0, 10.0, 0.1, 0.3);
        let dphi: Vec<f64> = w.zeta_a.iter().map(|z| z * z).collect();
        let f = Field::from_fn(&g, Parity::Even, |x| (-x * x / 20.0).exp() * (0.3 * x).cos());
        let h = Field::from_fn(&g, Parity::Even, |x| (-(x - 1.0).powi(2) / 30.0).exp() + (-(x + 1.0).powi(2) / 30.0).exp());
        let a = dot(&s_operator(&w.phi_a, &dphi, &f), &h);
        let b = dot(&f, &s_operator(&w.phi_a, &dphi, &h));
        assert!((a + b).abs() < 1e-8, "{}", a + b);
    }

    #[test]
    fn vb_at_p_two_is_pure_cutoff_term() {
        let (_, s, _) = setup(2.0, 2048);
        assert!(top_potential_derivative(&s).iter().all(|v| *v == 0.0));
    }
}

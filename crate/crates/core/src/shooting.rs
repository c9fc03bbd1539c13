//! Shooting on the `Y₊` amplitude to land initial data on the center
//! hypersurface `Qi + ε + h(ε)Y₊`.
//!
//! A single bisection resolves `a*` only up to the exponential sensitivity
//! of the unstable direction: after `|a_hi − a_lo| ~ 1e−10` the run still
//! escapes after `t ~ ln(δ_esc/1e−10)/ν₀`. Long runs are therefore split
//! into segments, re-shooting the `Y₊` amplitude at the start of each.

use crate::error::{NlkgError, Result};
use crate::evolution::{evolve_from, EvolutionConfig, ExitStatus, Frame, Trajectory};
use crate::grid::{inner, StatePair};
use crate::norms::{energy_norm, NormSet};
use crate::profile::RefinedProfile;
use crate::spectrum::EigenBasis;

#[derive(Debug, Clone, PartialEq)]
pub struct ShootConfig {
    /// Initial bracket for the `Y₊` amplitude.
    pub a_range: (f64, f64),
    /// Target bracket width.
    pub tol: f64,
    /// Horizon of each classification shot.
    pub horizon: f64,
    /// Segment length for long runs; `None` evolves once from `a*`.
    pub segment: Option<f64>,
    /// Half-width of the re-shooting bracket at each segment start.
    pub reshoot_range: f64,
}

impl Default for ShootConfig {
    fn default() -> Self {
        ShootConfig { a_range: (-0.01, 0.01), tol: 1e-10, horizon: 60.0, segment: None, reshoot_range: 1e-4 }
    }
}

#[derive(Debug, Clone)]
pub struct Bisection {
    pub a_star: f64,
    pub a_lo: f64,
    pub a_hi: f64,
    pub shots: usize,
}

impl Bisection {
    pub fn width(&self) -> f64 {
        (self.a_hi - self.a_lo).abs()
    }
}

#[derive(Debug, Clone)]
pub struct ShootResult {
    pub bisection: Bisection,
    /// `‖ε‖` in `H¹ × L²` after projection.
    pub eps_norm: f64,
    pub trajectory: Trajectory,
    /// `(t, a)` of every segment re-shot, including the first.
    pub kicks: Vec<(f64, f64)>,
    pub final_state: StatePair,
}

/// `ε − (⟨ε, Z₊⟩/⟨Y₊, Z₊⟩)Y₊`.
pub fn project_off_unstable(eps: &StatePair, basis: &EigenBasis) -> Result<StatePair> {
    let c = inner(eps, &basis.z_plus)? / inner(&basis.y_plus, &basis.z_plus)?;
    let mut out = eps.clone();
    out.axpy(-c, &basis.y_plus);
    Ok(out)
}

/// Sign of `Re z₁` at the end of a shot: at escape, or at the horizon if
/// the run never left.
pub fn classify(
    u: &StatePair,
    t0: f64,
    horizon: f64,
    config: &EvolutionConfig,
    profile: &RefinedProfile,
    norms: &NormSet,
) -> Result<bool> {
    let cfg = EvolutionConfig { t_final: t0 + horizon, ..config.clone() };
    let (traj, _) = evolve_from(u, t0, &cfg, profile, norms, None)?;
    Ok(traj.z.last().is_some_and(|z| z[0].re > 0.0))
}

/// Bisection on `a` for `u(a) = base + a·Y₊`, classified by escape sign.
pub fn bisect(
    base: &StatePair,
    t0: f64,
    range: (f64, f64),
    shoot: &ShootConfig,
    config: &EvolutionConfig,
    profile: &RefinedProfile,
    basis: &EigenBasis,
    norms: &NormSet,
) -> Result<Bisection> {
    let at = |a: f64| {
        let mut u = base.clone();
        u.axpy(a, &basis.y_plus);
        classify(&u, t0, shoot.horizon, config, profile, norms)
    };
    let (mut lo, mut hi) = range;
    let (s_lo, s_hi) = (at(lo)?, at(hi)?);
    let mut shots = 2;
    if s_lo == s_hi {
        return Err(NlkgError::Shooting(format!("no sign change in a_range [{lo:e}, {hi:e}]")));
    }
    while (hi - lo).abs() >= shoot.tol {
        let mid = 0.5 * (lo + hi);
        if mid == lo || mid == hi {
            break;
        }
        if at(mid)? == s_lo {
            lo = mid;
        } else {
            hi = mid;
        }
        shots += 1;
    }
    Ok(Bisection { a_star: 0.5 * (lo + hi), a_lo: lo, a_hi: hi, shots })
}

/// Shoot `Qi + ε + a·Y₊` onto the center hypersurface and evolve it to
/// `config.t_final`, re-shooting every `shoot.segment` time units.
pub fn shoot_center(
    eps: &StatePair,
    shoot: &ShootConfig,
    config: &EvolutionConfig,
    profile: &RefinedProfile,
    basis: &EigenBasis,
    norms: &NormSet,
) -> Result<ShootResult> {
    shoot_center_observed(eps, shoot, config, profile, basis, norms, None)
}

/// [`shoot_center`] with an observer on the final (accepted) trajectory.
/// Segment boundaries are reported twice, before and after the kick.
pub fn shoot_center_observed(
    eps: &StatePair,
    shoot: &ShootConfig,
    config: &EvolutionConfig,
    profile: &RefinedProfile,
    basis: &EigenBasis,
    norms: &NormSet,
    mut observer: Option<&mut dyn FnMut(&Frame)>,
) -> Result<ShootResult> {
    let eps = project_off_unstable(eps, basis)?;
    let eps_norm = energy_norm(&eps);
    let base = &profile.ground() + &eps;
    let first = bisect(&base, 0.0, shoot.a_range, shoot, config, profile, basis, norms)?;
    let mut u = base;
    u.axpy(first.a_star, &basis.y_plus);
    let mut kicks = vec![(0.0, first.a_star)];
    let mut traj = Trajectory::default();
    let seg = shoot.segment.unwrap_or(config.t_final).max(config.dt);
    let mut t = 0.0;
    loop {
        let t_next = (t + seg).min(config.t_final);
        let cfg = EvolutionConfig { t_final: t_next, ..config.clone() };
        let obs: Option<&mut dyn FnMut(&Frame)> = match observer {
            Some(ref mut o) => Some(&mut **o),
            None => None,
        };
        let (part, next) = evolve_from(&u, t, &cfg, profile, norms, obs)?;
        traj.extend_from(&part);
        u = next;
        if part.exit != Some(ExitStatus::Completed) {
            break;
        }
        t = part.t_end;
        if t >= config.t_final - 0.5 * config.dt {
            break;
        }
        let r = shoot.reshoot_range;
        let b = bisect(&u, t, (-r, r), shoot, config, profile, basis, norms)?;
        u.axpy(b.a_star, &basis.y_plus);
        kicks.push((t, b.a_star));
    }
    traj.finish();
    if traj.exit != Some(ExitStatus::Completed) && traj.t_end < 0.5 * config.t_final {
        return Err(NlkgError::Shooting(format!(
            "trajectory at a* left at t = {:.3} before T/2 = {:.3}; bisection not converged",
            traj.t_end,
            0.5 * config.t_final
        )));
    }
    Ok(ShootResult { bisection: first, eps_norm, trajectory: traj, kicks, final_state: u })
}

/// Least-squares slope of `ln y` against `ln x`.
pub fn log_log_slope(x: &[f64], y: &[f64]) -> f64 {
    let n = x.len() as f64;
    let lx: Vec<f64> = x.iter().map(|v| v.ln()).collect();
    let ly: Vec<f64> = y.iter().map(|v| v.ln()).collect();
    let mx = lx.iter().sum::<f64>() / n;
    let my = ly.iter().sum::<f64>() / n;
    let sxy: f64 = lx.iter().zip(&ly).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = lx.iter().map(|a| (a - mx) * (a - mx)).sum();
    sxy / sxx
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::{Field, Grid, Parity};
    use crate::params::ModelParams;
    use crate::profile::build_profile;
    use crate::spectrum::{eigenbasis, soliton};

    #[test]
    fn projection_removes_z_plus_component() {
        let g = Grid::new(100.0, 2048, 20.0).unwrap();
        let params = ModelParams::new(1.9).unwrap();
        let s = soliton(&params, &g);
        let b = eigenbasis(&params, &s, &g).unwrap();
        let _ = build_profile(&params, &b, &s).unwrap();
        let eps = StatePair::new(
            Field::from_fn(&g, Parity::Even, |x| (-x * x).exp()),
            Field::from_fn(&g, Parity::Even, |x| 0.3 * (-x * x / 2.0).exp()),
        );
        let e = project_off_unstable(&eps, &b).unwrap();
        assert!(inner(&e, &b.z_plus).unwrap().abs() < 1e-14);
    }

    #[test]
    fn slope_of_power_law() {
        let x = [0.005, 0.01, 0.02];
        let y: Vec<f64> = x.iter().map(|v: &f64| 3.0 * v.powf(1.5)).collect();
        assert!((log_log_slope(&x, &y) - 1.5).abs() < 1e-12);
    }
}

//! Time integration of the even NLKG flow: Störmer–Verlet on
//! `u₁'' = ∂x²u₁ − u₁ + f(u₁)` with a Dirichlet wall at `x = L` and a
//! Strang-split multiplicative sponge on `u₂` near the wall.

use std::fmt::Write as _;
use std::io::{BufRead, BufReader};
use std::path::Path;
use std::sync::Arc;

use crate::error::{NlkgError, Result};
use crate::grid::{dot_slices, laplacian_dirichlet, Field, Grid, Parity, StatePair};
use crate::norms::{energy_norm, NormSet};
use crate::params::ModelParams;
use crate::profile::{modes_norm, Decomposition, Modes, RefinedProfile};

/// Sponge rate `σ(x)`: zero up to `L − sponge_width`, then a smoothstep
/// ramp to `strength` at the wall.
pub fn sponge_profile(grid: &Grid, strength: f64) -> Vec<f64> {
    let start = grid.sponge_start();
    let w = grid.sponge_width();
    grid.x()
        .iter()
        .map(|&x| {
            if w <= 0.0 || x <= start {
                0.0
            } else {
                let t = ((x - start) / w).min(1.0);
                strength * t * t * t * (10.0 - 15.0 * t + 6.0 * t * t)
            }
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct EvolutionConfig {
    pub dt: f64,
    pub t_final: f64,
    /// Peak sponge rate (1/time).
    pub sponge_strength: f64,
    pub record_stride: usize,
    /// Escape threshold on `|z₁|`.
    pub delta_esc: f64,
    /// Radius of the admissible ball around `Qi` in `H¹ × L²`.
    pub delta: f64,
    /// Radius of the admissible `z`-ball.
    pub z_radius: f64,
}

impl EvolutionConfig {
    /// `dt = dt_factor · dx`.
    pub fn for_grid(grid: &Grid, dt_factor: f64, t_final: f64) -> EvolutionConfig {
        EvolutionConfig {
            dt: dt_factor * grid.dx(),
            t_final,
            sponge_strength: 2.0,
            record_stride: 10,
            delta_esc: 0.05,
            delta: 0.5,
            z_radius: crate::profile::DEFAULT_Z_RADIUS,
        }
    }

    pub fn validate(&self, grid: &Grid) -> Result<()> {
        if !(self.dt > 0.0 && self.dt <= 0.5 * grid.dx()) {
            return Err(NlkgError::Config(format!("dt = {} violates dt <= 0.5 dx = {}", self.dt, 0.5 * grid.dx())));
        }
        if !(self.t_final >= 0.0) || self.record_stride == 0 {
            return Err(NlkgError::Config("t_final must be >= 0 and record_stride >= 1".into()));
        }
        if !(self.sponge_strength >= 0.0 && self.delta_esc > 0.0 && self.delta > 0.0 && self.z_radius > 0.0) {
            return Err(NlkgError::Config("sponge strength and radii must be positive".into()));
        }
        Ok(())
    }
}

/// Stateful stepper holding the sponge and scratch buffers.
pub struct Stepper {
    params: ModelParams,
    grid: Arc<Grid>,
    sigma: Vec<f64>,
    force: Vec<f64>,
}

impl Stepper {
    pub fn new(params: &ModelParams, grid: &Arc<Grid>, sponge_strength: f64) -> Stepper {
        Stepper {
            params: *params,
            grid: grid.clone(),
            sigma: sponge_profile(grid, sponge_strength),
            force: vec![0.0; grid.len()],
        }
    }

    pub fn sigma(&self) -> &[f64] {
        &self.sigma
    }

    fn compute_force(params: &ModelParams, dx: f64, u1: &[f64], force: &mut [f64]) {
        laplacian_dirichlet(u1, Parity::Even, dx, force);
        let m = u1.len() - 1;
        for (fo, &u) in force.iter_mut().zip(u1).take(m) {
            *fo += params.f(u) - u;
        }
        force[m] = 0.0;
    }

    /// One Strang step: half sponge, kick–drift–kick, half sponge.
    pub fn step(&mut self, u: &mut StatePair, dt: f64) {
        let h = 0.5 * dt;
        let dx = self.grid.dx();
        let sigma = &self.sigma;
        let damp = |u2: &mut [f64]| {
            for (v, s) in u2.iter_mut().zip(sigma) {
                if *s != 0.0 {
                    *v *= (-s * h).exp();
                }
            }
        };
        u.second.update(damp);
        Self::compute_force(&self.params, dx, u.first.values(), &mut self.force);
        let force = &self.force;
        u.second.update(|u2| u2.iter_mut().zip(force).for_each(|(v, f)| *v += h * f));
        let u2 = u.second.values();
        u.first.update(|u1| {
            let m = u1.len() - 1;
            u1.iter_mut().zip(u2).take(m).for_each(|(x, v)| *x += dt * v);
            u1[m] = 0.0;
        });
        Self::compute_force(&self.params, dx, u.first.values(), &mut self.force);
        let force = &self.force;
        u.second.update(|u2| u2.iter_mut().zip(force).for_each(|(v, f)| *v += h * f));
        u.second.update(damp);
    }
}

/// `(u₂, ∂x²u₁ − u₁ + f(u₁) − σu₂)`.
pub fn nlkg_rhs(u: &StatePair, params: &ModelParams, sigma: Option<&[f64]>) -> StatePair {
    let grid = u.grid();
    let n = grid.len();
    let mut lap = vec![0.0; n];
    laplacian_dirichlet(u.first.values(), Parity::Even, grid.dx(), &mut lap);
    let u1 = u.first.values();
    let u2 = u.second.values();
    let second = (0..n)
        .map(|i| {
            if i == n - 1 {
                return 0.0;
            }
            let s = sigma.map_or(0.0, |s| s[i]);
            lap[i] - u1[i] + params.f(u1[i]) - s * u2[i]
        })
        .collect();
    StatePair::new(u.second.clone(), Field::from_values(grid, Parity::Even, second))
}

/// `½(⟨−Δu₁, u₁⟩ + ‖u₁‖² + ‖u₂‖²) − ∫|u₁|^{p+1}/(p+1)`, with the same
/// discrete Laplacian as the integrator so that the value is the scheme's
/// conserved quantity up to `O(dt²)`.
pub fn energy(u: &StatePair, params: &ModelParams) -> f64 {
    let grid = u.grid();
    let n = grid.len();
    let mut lap = vec![0.0; n];
    laplacian_dirichlet(u.first.values(), Parity::Even, grid.dx(), &mut lap);
    let u1 = u.first.values();
    let grad = -dot_slices(grid, &lap, u1);
    let mass = dot_slices(grid, u1, u1);
    let kin = dot_slices(grid, u.second.values(), u.second.values());
    let pot: Vec<f64> = u1.iter().map(|&v| params.big_f(v)).collect();
    let ones = vec![1.0; n];
    0.5 * (grad + mass + kin) - dot_slices(grid, &pot, &ones)
}

/// Leapfrog energy `½⟨v₋, v₊⟩ + …` with half-step velocities
/// `v± = u₂ ± (dt/2)F(u₁)`, i.e. `E(u) − (dt²/8)‖F(u₁)‖²`. This is the
/// quantity the scheme conserves exactly in the linear, undamped case.
pub fn discrete_energy(u: &StatePair, params: &ModelParams, dt: f64) -> f64 {
    let grid = u.grid();
    let mut force = vec![0.0; grid.len()];
    Stepper::compute_force(params, grid.dx(), u.first.values(), &mut force);
    energy(u, params) - 0.125 * dt * dt * dot_slices(grid, &force, &force)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExitStatus {
    Completed,
    /// `|z₁|` crossed the escape threshold; `positive` is the sign of `Re z₁`.
    EscapedUnstable { positive: bool },
    LeftBall,
}

impl ExitStatus {
    pub fn label(&self) -> &'static str {
        match self {
            ExitStatus::Completed => "completed",
            ExitStatus::EscapedUnstable { .. } => "escaped_unstable",
            ExitStatus::LeftBall => "left_ball",
        }
    }
}

/// What an observer sees at every recorded time.
pub struct Frame<'a> {
    pub t: f64,
    pub u: &'a StatePair,
    pub decomposition: &'a Decomposition,
    pub z_tilde: Modes,
}

#[derive(Debug, Clone, Default)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub z: Vec<Modes>,
    pub z_tilde: Vec<Modes>,
    /// `|ż − z̃|` with `ż` from centered differences of the recorded `z`.
    pub zdot_minus_ztilde: Vec<f64>,
    pub energy: Vec<f64>,
    pub eta_sigma_a: Vec<f64>,
    pub eta_l2_kappa: Vec<f64>,
    pub eta_h1_a: Vec<f64>,
    pub exit: Option<ExitStatus>,
    /// Time at which the run stopped.
    pub t_end: f64,
}

impl Trajectory {
    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    /// Append one recorded frame.
    pub fn record(&mut self, t: f64, d: &Decomposition, z_tilde: Modes, e: f64, norms: &NormSet) {
        self.times.push(t);
        self.z.push(d.z);
        self.z_tilde.push(z_tilde);
        self.energy.push(e);
        self.eta_sigma_a.push(norms.sigma_a(&d.eta));
        self.eta_l2_kappa.push(norms.l2_kappa(&d.eta));
        self.eta_h1_a.push(norms.h1_a(&d.eta));
    }

    /// Fill `zdot_minus_ztilde` from the recorded series.
    pub fn finish(&mut self) {
        let n = self.times.len();
        self.zdot_minus_ztilde = (0..n)
            .map(|k| {
                if n < 2 {
                    return 0.0;
                }
                let (a, b) = if k == 0 { (0, 1) } else if k == n - 1 { (n - 2, n - 1) } else { (k - 1, k + 1) };
                let h = self.times[b] - self.times[a];
                let d0 = (self.z[b][0] - self.z[a][0]) / h - self.z_tilde[k][0];
                let d1 = (self.z[b][1] - self.z[a][1]) / h - self.z_tilde[k][1];
                (d0.norm_sqr() + d1.norm_sqr()).sqrt()
            })
            .collect();
    }

    /// Append `other`, dropping its first sample (the shared restart time).
    pub fn extend_from(&mut self, other: &Trajectory) {
        let skip = usize::from(!self.is_empty());
        self.times.extend(other.times.iter().skip(skip));
        self.z.extend(other.z.iter().skip(skip));
        self.z_tilde.extend(other.z_tilde.iter().skip(skip));
        self.energy.extend(other.energy.iter().skip(skip));
        self.eta_sigma_a.extend(other.eta_sigma_a.iter().skip(skip));
        self.eta_l2_kappa.extend(other.eta_l2_kappa.iter().skip(skip));
        self.eta_h1_a.extend(other.eta_h1_a.iter().skip(skip));
        self.exit = other.exit;
        self.t_end = other.t_end;
    }
}

/// Advance `u0` from `t0`, recording every `record_stride` steps. Stops at
/// `t_final`, on escape of `|z₁|`, or on leaving the ball. The observer is
/// called at every recorded frame. Returns the trajectory and final state.
pub fn evolve_from(
    u0: &StatePair,
    t0: f64,
    config: &EvolutionConfig,
    profile: &RefinedProfile,
    norms: &NormSet,
    mut observer: Option<&mut dyn FnMut(&Frame)>,
) -> Result<(Trajectory, StatePair)> {
    let grid = profile.grid();
    config.validate(grid)?;
    let params = &profile.params;
    let mut stepper = Stepper::new(params, grid, config.sponge_strength);
    let ground = profile.ground();
    let mut u = u0.clone();
    let mut traj = Trajectory::default();
    let steps = ((config.t_final - t0) / config.dt).round().max(0.0) as usize;
    let mut k = 0usize;
    loop {
        let t = t0 + k as f64 * config.dt;
        if k % config.record_stride == 0 || k == steps {
            if !u.is_finite() {
                return Err(NlkgError::Blowup(t));
            }
            let d = profile.decompose(&u)?;
            let zt = profile.z_tilde(&d.z)?;
            traj.record(t, &d, zt, energy(&u, params), norms);
            if let Some(obs) = observer.as_mut() {
                obs(&Frame { t, u: &u, decomposition: &d, z_tilde: zt });
            }
            traj.t_end = t;
            if d.z[0].norm() > config.delta_esc {
                traj.exit = Some(ExitStatus::EscapedUnstable { positive: d.z[0].re > 0.0 });
                break;
            }
            if energy_norm(&(&u - &ground)) > config.delta || modes_norm(&d.z) > config.z_radius {
                traj.exit = Some(ExitStatus::LeftBall);
                break;
            }
        }
        if k == steps {
            traj.exit = Some(ExitStatus::Completed);
            break;
        }
        stepper.step(&mut u, config.dt);
        k += 1;
    }
    traj.finish();
    Ok((traj, u))
}

pub fn evolve(u0: &StatePair, config: &EvolutionConfig, profile: &RefinedProfile, norms: &NormSet) -> Result<Trajectory> {
    evolve_from(u0, 0.0, config, profile, norms, None).map(|(t, _)| t)
}

/// Least-squares exponent of `y ~ t^α` over samples with `t ≥ t_start`.
pub fn power_law_exponent(times: &[f64], y: &[f64], t_start: f64) -> f64 {
    let (t, v): (Vec<f64>, Vec<f64>) =
        times.iter().zip(y).filter(|(&t, &v)| t >= t_start && t > 0.0 && v > 0.0).map(|(a, b)| (*a, *b)).unzip();
    if t.len() < 2 {
        return f64::NAN;
    }
    crate::shooting::log_log_slope(&t, &v)
}

/// Rate `Γ` of `d|z₂|²/dt = −Γ|z₂|⁴`, i.e. the slope of `1/|z₂|²` in `t`.
pub fn quartic_rate(times: &[f64], abs_z2: &[f64]) -> f64 {
    let n = times.len() as f64;
    let inv: Vec<f64> = abs_z2.iter().map(|a| 1.0 / (a * a)).collect();
    let mt = times.iter().sum::<f64>() / n;
    let mi = inv.iter().sum::<f64>() / n;
    let sxy: f64 = times.iter().zip(&inv).map(|(t, i)| (t - mt) * (i - mi)).sum();
    let sxx: f64 = times.iter().map(|t| (t - mt) * (t - mt)).sum();
    sxy / sxx
}

/// Text checkpoint: `#`-prefixed header (p, grid, dt, t) then one `u1 u2` row per node.
pub fn write_checkpoint(path: &Path, params: &ModelParams, dt: f64, t: f64, u: &StatePair) -> Result<()> {
    let g = u.grid();
    let mut s = String::new();
    writeln!(s, "# p = {:.17e}", params.p).unwrap();
    writeln!(s, "# half_length = {:.17e}", g.half_length()).unwrap();
    writeln!(s, "# n_points = {}", g.len()).unwrap();
    writeln!(s, "# sponge_width = {:.17e}", g.sponge_width()).unwrap();
    writeln!(s, "# dt = {:.17e}", dt).unwrap();
    writeln!(s, "# t = {:.17e}", t).unwrap();
    for (a, b) in u.first.values().iter().zip(u.second.values()) {
        writeln!(s, "{:.17e} {:.17e}", a, b).unwrap();
    }
    std::fs::write(path, s)?;
    Ok(())
}

#[derive(Debug, Clone)]
pub struct Checkpoint {
    pub p: f64,
    pub dt: f64,
    pub t: f64,
    pub state: StatePair,
}

pub fn read_checkpoint(path: &Path) -> Result<Checkpoint> {
    let file = std::fs::File::open(path)?;
    let mut header = std::collections::HashMap::new();
    let (mut u1, mut u2) = (Vec::new(), Vec::new());
    let bad = |m: &str| NlkgError::Io(format!("{}: {m}", path.display()));
    for line in BufReader::new(file).lines() {
        let line = line?;
        if let Some(rest) = line.strip_prefix('#') {
            if let Some((k, v)) = rest.split_once('=') {
                header.insert(k.trim().to_string(), v.trim().to_string());
            }
            continue;
        }
        let mut it = line.split_whitespace();
        let (a, b) = (it.next(), it.next());
        match (a.and_then(|v| v.parse::<f64>().ok()), b.and_then(|v| v.parse::<f64>().ok())) {
            (Some(a), Some(b)) => {
                u1.push(a);
                u2.push(b);
            }
            _ if line.trim().is_empty() => {}
            _ => return Err(bad("malformed row")),
        }
    }
    let get = |k: &str| -> Result<f64> {
        header.get(k).and_then(|v| v.parse().ok()).ok_or_else(|| bad(&format!("missing header {k}")))
    };
    let grid = Grid::new(get("half_length")?, get("n_points")? as usize, get("sponge_width")?)?;
    if u1.len() != grid.len() {
        return Err(bad("row count does not match n_points"));
    }
    let state = StatePair::new(Field::from_values(&grid, Parity::Even, u1), Field::from_values(&grid, Parity::Even, u2));
    Ok(Checkpoint { p: get("p")?, dt: get("dt")?, t: get("t")?, state })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectrum::soliton;

    #[test]
    fn sponge_is_monotone_and_zero_inside() {
        let g = Grid::new(100.0, 1024, 20.0).unwrap();
        let s = sponge_profile(&g, 2.0);
        for (&x, &v) in g.x().iter().zip(&s) {
            if x <= 80.0 {
                assert_eq!(v, 0.0);
            }
        }
        assert!(s.windows(2).all(|w| w[1] >= w[0]));
        assert!((s.last().unwrap() - 2.0).abs() < 1e-12);
    }

    #[test]
    fn ground_state_is_nearly_fixed() {
        let g = Grid::new(100.0, 4096, 20.0).unwrap();
        let params = ModelParams::new(2.0).unwrap();
        let s = soliton(&params, &g);
        let u0 = StatePair::new(s.q.clone(), Field::zeros(&g, Parity::Even));
        let r = nlkg_rhs(&u0, &params, None);
        assert!(r.max_abs() < 1e-7, "{}", r.max_abs());
        let mut u = u0.clone();
        let mut st = Stepper::new(&params, &g, 2.0);
        st.step(&mut u, 0.25 * g.dx());
        assert!((&u - &u0).max_abs() < 1e-9, "{}", (&u - &u0).max_abs());
    }

    #[test]
    fn time_reversal() {
        let g = Grid::new(60.0, 2048, 0.0).unwrap();
        let params = ModelParams::new(1.8).unwrap();
        let u0 = StatePair::new(
            Field::from_fn(&g, Parity::Even, |x| 0.8 * (-x * x / 4.0).exp()),
            Field::from_fn(&g, Parity::Even, |x| 0.1 * x * x * (-x * x / 3.0).exp()),
        );
        let mut u = u0.clone();
        let mut st = Stepper::new(&params, &g, 0.0);
        let dt = 0.25 * g.dx();
        for _ in 0..50 {
            st.step(&mut u, dt);
        }
        for _ in 0..50 {
            st.step(&mut u, -dt);
        }
        assert!((&u - &u0).max_abs() < 1e-9);
    }

    #[test]
    fn checkpoint_round_trip() {
        let g = Grid::new(30.0, 128, 5.0).unwrap();
        let params = ModelParams::new(1.9).unwrap();
        let u = StatePair::new(
            Field::from_fn(&g, Parity::Even, |x| (x * 0.3).cos() / 3.0),
            Field::from_fn(&g, Parity::Even, |x| (-x).exp() * std::f64::consts::PI),
        );
        let dir = std::env::temp_dir().join(format!("nlkg-ckpt-{}", std::process::id()));
        std::fs::create_dir_all(&dir).unwrap();
        let path = dir.join("state.txt");
        write_checkpoint(&path, &params, 0.01, 1.5, &u).unwrap();
        let c = read_checkpoint(&path).unwrap();
        assert_eq!(c.state, u);
        assert_eq!((c.p, c.dt, c.t), (1.9, 0.01, 1.5));
        std::fs::remove_dir_all(&dir).ok();
    }

    #[test]
    fn config_validation() {
        let g = Grid::new(100.0, 4096, 20.0).unwrap();
        let mut c = EvolutionConfig::for_grid(&g, 0.25, 10.0);
        assert!(c.validate(&g).is_ok());
        c.dt = g.dx();
        assert!(matches!(c.validate(&g), Err(NlkgError::Config(_))));
    }
}

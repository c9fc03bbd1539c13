//! Command runners behind the `nlkg` binary. Each command writes one primary
//! CSV (config echoed as `#` header, 17 significant digits) into `out_dir`
//! and returns a short text summary. A command that fails after opening its
//! CSV appends a `# FAILED: …` line before returning the error.

use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::sync::Arc;

use num_complex::Complex64;
use rayon::prelude::*;

use crate::config::{Command, RunConfig};
use crate::error::{NlkgError, Result};
use crate::evolution::{
    energy, power_law_exponent, read_checkpoint, write_checkpoint, EvolutionConfig, Frame, Stepper, Trajectory,
};
use crate::grid::{Field, Grid, Parity, StatePair};
use crate::norms::{energy_norm, NormSet};
use crate::params::ModelParams;
use crate::profile::{build_profile, Modes, RefinedProfile};
use crate::scattering::{distorted_wave, fgr_gamma, fgr_scan, linspace};
use crate::shooting::{shoot_center, shoot_center_observed, ShootConfig};
use crate::spectrum::oracle::spectrum_mismatch;
use crate::spectrum::{check_intertwining, eigenbasis, soliton, EigenBasis, SolitonProfile};
use crate::virial::{
    budgets, cumulative_budgets, ddt_consistency, project_continuous, FunctionalSeries, Functionals,
    Transform, VirialMonitor, BUDGET_NAMES, FUNCTIONAL_NAMES,
};
use crate::weights::WeightSet;

/// Everything that depends only on `(p, grid)`.
#[derive(Debug, Clone)]
pub struct Lab {
    pub params: ModelParams,
    pub grid: Arc<Grid>,
    pub soliton: SolitonProfile,
    pub basis: EigenBasis,
    pub profile: RefinedProfile,
    pub norms: NormSet,
}

impl Lab {
    pub fn new(p: f64, grid: &Arc<Grid>, a_scale: f64, kappa: f64, a_weight: f64) -> Result<Lab> {
        let params = ModelParams::new(p)?;
        let soliton = soliton(&params, grid);
        let basis = eigenbasis(&params, &soliton, grid)?;
        let profile = build_profile(&params, &basis, &soliton)?;
        let norms = NormSet::new(grid, a_scale, kappa, a_weight);
        Ok(Lab { params, grid: grid.clone(), soliton, basis, profile, norms })
    }

    pub fn from_config(cfg: &RunConfig) -> Result<Lab> {
        let grid = grid_of(cfg)?;
        Lab::new(cfg.p, &grid, cfg.a_scale, cfg.kappa, cfg.a_weight())
    }

    /// `ε·(φ₂, 0)` normalized in `H¹ × L²`.
    pub fn internal_mode_perturbation(&self, eps: f64) -> StatePair {
        let phi = StatePair::new(self.basis.phi[2].clone(), Field::zeros(&self.grid, Parity::Even));
        phi.scaled(eps / energy_norm(&phi))
    }

    /// `ε·(P_c e^{−x²/4}, 0)` normalized in `L²`.
    pub fn dispersive_perturbation(&self, eps: f64) -> StatePair {
        let bump = Field::from_fn(&self.grid, Parity::Even, |x| (-x * x / 4.0).exp());
        let bump = project_continuous(&bump, &self.basis.phi);
        let n = bump.norm();
        StatePair::new(bump.scaled(eps / n), Field::zeros(&self.grid, Parity::Even))
    }

    /// Virial functionals with the distorted wave at `4λ²`.
    pub fn functionals(&self, cfg: &RunConfig) -> Result<(Transform, Functionals)> {
        let wave = distorted_wave(&self.soliton)?;
        let sample = fgr_gamma(&self.profile, &wave)?;
        let weights = WeightSet::new(&self.grid, cfg.a_scale, cfg.b_scale, cfg.kappa, cfg.epsilon);
        let transform = Transform::new(&self.soliton, cfg.epsilon)?;
        Ok((transform, Functionals::new(weights, &wave.g, sample.c.re, &self.params)))
    }
}

pub fn grid_of(cfg: &RunConfig) -> Result<Arc<Grid>> {
    Grid::new(cfg.half_length, cfg.n_points, cfg.sponge_width)
}

pub fn evolution_config(cfg: &RunConfig, grid: &Grid) -> EvolutionConfig {
    let mut e = EvolutionConfig::for_grid(grid, cfg.dt_factor, cfg.t_final);
    e.sponge_strength = cfg.sponge_strength;
    e.record_stride = cfg.record_stride;
    e.delta = cfg.delta;
    e.delta_esc = cfg.delta_esc;
    e.z_radius = cfg.z_radius;
    e
}

pub fn shoot_config(cfg: &RunConfig) -> ShootConfig {
    ShootConfig { a_range: (cfg.a_min, cfg.a_max), segment: Some(cfg.segment), ..ShootConfig::default() }
}

/// CSV file with a `#` header.
pub struct CsvSink {
    path: PathBuf,
    out: BufWriter<File>,
}

impl CsvSink {
    pub fn create(path: &Path, header: &str, columns: &[&str]) -> Result<CsvSink> {
        if let Some(dir) = path.parent() {
            fs::create_dir_all(dir)?;
        }
        let mut out = BufWriter::new(File::create(path)?);
        out.write_all(header.as_bytes())?;
        writeln!(out, "{}", columns.join(","))?;
        Ok(CsvSink { path: path.to_path_buf(), out })
    }

    pub fn path(&self) -> &Path {
        &self.path
    }

    pub fn row(&mut self, cells: &[String]) -> Result<()> {
        writeln!(self.out, "{}", cells.join(","))?;
        Ok(())
    }

    pub fn numbers(&mut self, values: &[f64]) -> Result<()> {
        let cells: Vec<String> = values.iter().map(|&v| num(v)).collect();
        self.row(&cells)
    }

    /// Trailing `# key = value` line.
    pub fn comment(&mut self, key: &str, value: &str) -> Result<()> {
        writeln!(self.out, "# {key} = {value}")?;
        Ok(())
    }

    pub fn fail(&mut self, e: &NlkgError) -> Result<()> {
        writeln!(self.out, "# FAILED: {e}")?;
        self.out.flush()?;
        Ok(())
    }

    pub fn finish(mut self) -> Result<PathBuf> {
        self.out.flush()?;
        Ok(self.path)
    }
}

/// `v` at 17 significant digits; non-finite values as `nan`/`inf`.
pub fn num(v: f64) -> String {
    if v.is_finite() {
        format!("{v:.16e}")
    } else {
        format!("{v}").to_lowercase()
    }
}

#[derive(Debug, Clone, Default)]
pub struct Report {
    pub lines: Vec<String>,
    pub files: Vec<PathBuf>,
    /// `false` only for a selftest with failing checks.
    pub passed: bool,
}

impl Report {
    fn say(&mut self, line: impl Into<String>) {
        self.lines.push(line.into());
    }
}

/// Validate `cfg` and run its command.
pub fn run(cfg: &RunConfig) -> Result<Report> {
    cfg.validate()?;
    fs::create_dir_all(&cfg.out_dir)?;
    let primary = cfg.out_dir.join(format!("{}.csv", cfg.command.name()));
    let mut report = Report { passed: true, ..Report::default() };
    let result = match cfg.command {
        Command::Spectrum => spectrum(cfg, &primary, &mut report),
        Command::FgrScan => fgr(cfg, &primary, &mut report),
        Command::Evolve => evolve_cmd(cfg, &primary, &mut report),
        Command::Shoot => shoot_cmd(cfg, &primary, &mut report),
        Command::Virial => virial_cmd(cfg, &primary, &mut report),
        Command::Selftest => selftest(cfg, &primary, &mut report),
    };
    result.map(|()| report)
}

/// Run `body` against a freshly created sink, marking the file on failure.
fn with_sink(
    path: &Path,
    header: &str,
    columns: &[&str],
    report: &mut Report,
    body: impl FnOnce(&mut CsvSink, &mut Report) -> Result<()>,
) -> Result<()> {
    let mut sink = CsvSink::create(path, header, columns)?;
    match body(&mut sink, report) {
        Ok(()) => {
            report.files.push(sink.finish()?);
            Ok(())
        }
        Err(e) => {
            sink.fail(&e)?;
            Err(e)
        }
    }
}

const SPECTRUM_COLUMNS: [&str; 16] = [
    "p", "k0", "k1", "k2", "k3", "k4", "mu0", "mu1", "mu2", "mu3", "nu0", "lambda", "oracle_mismatch",
    "eigen_residuals", "intertwining_residual", "n_top",
];

fn spectrum(cfg: &RunConfig, path: &Path, report: &mut Report) -> Result<()> {
    let grid = grid_of(cfg)?;
    let ps = linspace(cfg.p_min, cfg.p_max, cfg.p_count);
    with_sink(path, &cfg.header(), &SPECTRUM_COLUMNS, report, |sink, report| {
        let rows: Vec<Result<Vec<String>>> = ps
            .par_iter()
            .map(|&p| {
                let params = ModelParams::new(p)?;
                let s = soliton(&params, &grid);
                let basis = eigenbasis(&params, &s, &grid)?;
                let mismatch = spectrum_mismatch(&params, &grid).unwrap_or(f64::NAN);
                let residuals: Vec<String> = basis.residuals.iter().map(|&r| num(r)).collect();
                let mut row: Vec<String> = vec![num(p)];
                row.extend(params.k.iter().map(|&v| num(v)));
                row.extend(params.mu.iter().map(|&v| num(v)));
                row.push(num(params.nu0));
                row.push(num(params.lambda));
                row.push(num(mismatch));
                row.push(residuals.join(";"));
                row.push(num(check_intertwining(&params, &grid)));
                row.push(params.n_top.to_string());
                Ok(row)
            })
            .collect();
        let mut worst = 0.0f64;
        for r in rows {
            let row = r?;
            worst = worst.max(row[12].parse().unwrap_or(f64::INFINITY));
            sink.row(&row)?;
        }
        report.say(format!("{} exponents, worst oracle mismatch {worst:.3e}", ps.len()));
        Ok(())
    })
}

const FGR_COLUMNS: [&str; 8] =
    ["p", "xi", "gamma_re", "gamma_im", "gamma_abs", "gamma_reduced_abs", "agreement", "flags"];

fn fgr(cfg: &RunConfig, path: &Path, report: &mut Report) -> Result<()> {
    let grid = grid_of(cfg)?;
    let ps = linspace(cfg.p_min, cfg.p_max, cfg.p_count);
    with_sink(path, &cfg.header(), &FGR_COLUMNS, report, |sink, report| {
        let entries = fgr_scan(&ps, &grid);
        let mut ok = 0;
        let mut dips = 0;
        for e in &entries {
            match &e.result {
                Ok(s) => {
                    ok += 1;
                    dips += usize::from(e.dip);
                    let flag = if e.dip { "dip" } else { "" };
                    sink.row(&[
                        num(e.p),
                        num(s.xi),
                        num(s.gamma_pairing.re),
                        num(s.gamma_pairing.im),
                        num(s.gamma_abs()),
                        num(s.gamma_reduced.norm()),
                        num(s.agreement),
                        flag.into(),
                    ])?;
                }
                Err(err) => {
                    let nan = num(f64::NAN);
                    let flag = format!("error: {}", err.to_string().replace(',', ";"));
                    sink.row(&[num(e.p), nan.clone(), nan.clone(), nan.clone(), nan.clone(), nan.clone(), nan, flag])?;
                }
            }
        }
        report.say(format!("{ok}/{} exponents evaluated, {dips} dips", entries.len()));
        if ok == 0 {
            return Err(NlkgError::Residual { what: "fgr scan: no exponent succeeded".into(), value: 0.0, tol: 1.0 });
        }
        Ok(())
    })
}

pub const TRAJECTORY_COLUMNS: [&str; 11] = [
    "t", "re_z1", "im_z1", "re_z2", "im_z2", "abs_z2", "energy", "eta_sigmaA", "eta_l2kappa", "eta_h1a",
    "zdot_minus_ztilde",
];

/// Exponent of `|z₂(t)| ~ t^α` fitted over the last three quarters of the run.
pub fn fitted_decay_exponent(traj: &Trajectory) -> f64 {
    let abs: Vec<f64> = traj.z.iter().map(|z| z[1].norm()).collect();
    power_law_exponent(&traj.times, &abs, 0.25 * traj.t_end)
}

/// Trajectory rows followed by a `# fitted_exponent = …` trailer.
pub fn write_trajectory(sink: &mut CsvSink, traj: &Trajectory) -> Result<()> {
    for k in 0..traj.len() {
        let z = traj.z[k];
        sink.numbers(&[
            traj.times[k],
            z[0].re,
            z[0].im,
            z[1].re,
            z[1].im,
            z[1].norm(),
            traj.energy[k],
            traj.eta_sigma_a[k],
            traj.eta_l2_kappa[k],
            traj.eta_h1_a[k],
            traj.zdot_minus_ztilde[k],
        ])?;
    }
    sink.comment("fitted_exponent", &num(fitted_decay_exponent(traj)))
}

fn initial_modes(cfg: &RunConfig) -> Modes {
    [Complex64::new(cfg.z1, 0.0), Complex64::new(cfg.z2, 0.0)]
}

fn evolve_cmd(cfg: &RunConfig, path: &Path, report: &mut Report) -> Result<()> {
    let lab = Lab::from_config(cfg)?;
    let ecfg = evolution_config(cfg, &lab.grid);
    let mut u0 = lab.profile.profile(&initial_modes(cfg));
    u0.axpy(cfg.y_plus, &lab.basis.y_plus);
    let ckpt_dir = cfg.out_dir.join("checkpoints");
    let every = cfg.checkpoint_every;
    with_sink(path, &cfg.header(), &TRAJECTORY_COLUMNS, report, |sink, report| {
        let mut frame_no = 0usize;
        let mut written = 0usize;
        let mut ckpt_err: Option<NlkgError> = None;
        let mut obs = |f: &Frame| {
            if every > 0 && frame_no % every == 0 && ckpt_err.is_none() {
                let file = ckpt_dir.join(format!("ckpt_{frame_no:06}.txt"));
                match fs::create_dir_all(&ckpt_dir).map_err(NlkgError::from).and_then(|()| {
                    write_checkpoint(&file, &lab.params, ecfg.dt, f.t, f.u)
                }) {
                    Ok(()) => written += 1,
                    Err(e) => ckpt_err = Some(e),
                }
            }
            frame_no += 1;
        };
        let (traj, _) = crate::evolution::evolve_from(&u0, 0.0, &ecfg, &lab.profile, &lab.norms, Some(&mut obs))?;
        if let Some(e) = ckpt_err {
            return Err(e);
        }
        write_trajectory(sink, &traj)?;
        let drift = traj.energy.last().zip(traj.energy.first()).map_or(0.0, |(b, a)| (b - a).abs());
        report.say(format!(
            "exit {} at t = {:.3}; {} frames; |E(t)-E(0)| = {drift:.3e}",
            traj.exit.map_or("none", |e| e.label()),
            traj.t_end,
            traj.len()
        ));
        if written > 0 {
            report.say(format!("{written} checkpoints in {}", ckpt_dir.display()));
        }
        Ok(())
    })
}

fn shoot_cmd(cfg: &RunConfig, path: &Path, report: &mut Report) -> Result<()> {
    let lab = Lab::from_config(cfg)?;
    let ecfg = evolution_config(cfg, &lab.grid);
    let eps = lab.internal_mode_perturbation(cfg.eps_amp);
    with_sink(path, &cfg.header(), &TRAJECTORY_COLUMNS, report, |sink, report| {
        let r = shoot_center(&eps, &shoot_config(cfg), &ecfg, &lab.profile, &lab.basis, &lab.norms)?;
        write_trajectory(sink, &r.trajectory)?;
        let b = &r.bisection;
        let ratio = b.a_star.abs() / r.eps_norm.powf(0.5 * (lab.params.p + 1.0));
        report.say(format!("a* = {:.6e} (bracket {:.2e}, {} shots), |eps| = {:.6e}", b.a_star, b.width(), b.shots, r.eps_norm));
        report.say(format!("|a*| / |eps|^((p+1)/2) = {ratio:.4e}"));
        report.say(format!(
            "exit {} at t = {:.3}; {} re-shots",
            r.trajectory.exit.map_or("none", |e| e.label()),
            r.trajectory.t_end,
            r.kicks.len() - 1
        ));
        let kicks = cfg.out_dir.join("shoot_kicks.csv");
        let mut ks = CsvSink::create(&kicks, &cfg.header(), &["t", "a"])?;
        for &(t, a) in &r.kicks {
            ks.numbers(&[t, a])?;
        }
        report.files.push(ks.finish()?);
        Ok(())
    })
}

/// Column names of the virial CSV.
pub fn virial_columns() -> Vec<String> {
    let mut c = vec!["t".to_string()];
    c.extend(FUNCTIONAL_NAMES.iter().map(|s| s.to_string()));
    c.extend(FUNCTIONAL_NAMES.iter().map(|s| format!("ddt_{s}")));
    c.extend(FUNCTIONAL_NAMES.iter().map(|s| format!("mismatch_{s}")));
    c.extend(BUDGET_NAMES.iter().map(|s| s.to_string()));
    c.push("sponge_tail".into());
    c
}

/// Per-row relative mismatch `|F' − δF|/max(|F'|, |δF|)` between the analytic
/// derivative and centered (one-sided at the ends) differences of the series.
pub fn pointwise_mismatch(series: &FunctionalSeries) -> Vec<[f64; 5]> {
    let n = series.len();
    (0..n)
        .map(|k| {
            let (a, b) = (k.saturating_sub(1), (k + 1).min(n - 1));
            std::array::from_fn(|j| {
                if a == b {
                    return f64::NAN;
                }
                let fd = (series.values[b][j] - series.values[a][j]) / (series.times[b] - series.times[a]);
                let an = series.ddt[k][j];
                let scale = an.abs().max(fd.abs());
                if scale == 0.0 {
                    0.0
                } else {
                    (an - fd).abs() / scale
                }
            })
        })
        .collect()
}

/// Write the virial CSV: functionals, analytic derivatives, pointwise
/// mismatches and the cumulative budgets of `traj` at the nearest time.
pub fn write_virial(sink: &mut CsvSink, series: &FunctionalSeries, traj: &Trajectory) -> Result<()> {
    let cumulative = cumulative_budgets(traj);
    let mismatch = pointwise_mismatch(series);
    for k in 0..series.len() {
        let t = series.times[k];
        let j = traj.times.partition_point(|&s| s < t - 1e-9).min(traj.len().saturating_sub(1));
        let mut row = vec![t];
        row.extend(series.values[k]);
        row.extend(series.ddt[k]);
        row.extend(mismatch[k]);
        row.extend(cumulative.get(j).copied().unwrap_or([f64::NAN; 5]));
        row.push(series.sponge_tail[k]);
        sink.numbers(&row)?;
    }
    Ok(())
}

/// Checkpoint files of `dir`, sorted by name.
fn checkpoint_files(dir: &Path) -> Result<Vec<PathBuf>> {
    let mut files: Vec<PathBuf> = fs::read_dir(dir)
        .map_err(|e| NlkgError::Config(format!("cannot read {}: {e}", dir.display())))?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|x| x == "txt"))
        .collect();
    files.sort();
    if files.is_empty() {
        return Err(NlkgError::Config(format!("no checkpoints in {}", dir.display())));
    }
    Ok(files)
}

fn virial_cmd(cfg: &RunConfig, path: &Path, report: &mut Report) -> Result<()> {
    let lab = Lab::from_config(cfg)?;
    let (transform, functionals) = lab.functionals(cfg)?;
    let ecfg = evolution_config(cfg, &lab.grid);
    let sponge = Stepper::new(&lab.params, &lab.grid, ecfg.sponge_strength).sigma().to_vec();
    let columns = virial_columns();
    let cols: Vec<&str> = columns.iter().map(String::as_str).collect();
    with_sink(path, &cfg.header(), &cols, report, |sink, report| {
        let mut monitor = VirialMonitor::new(&lab.profile, &transform, &functionals, Some(sponge));
        let traj = match &cfg.input {
            Some(dir) => {
                let mut traj = Trajectory::default();
                for file in checkpoint_files(dir)? {
                    let c = read_checkpoint(&file)?;
                    if c.p != lab.params.p || c.state.grid().len() != lab.grid.len() {
                        return Err(NlkgError::GridMismatch);
                    }
                    let d = lab.profile.decompose(&c.state)?;
                    let zt = lab.profile.z_tilde(&d.z)?;
                    traj.record(c.t, &d, zt, energy(&c.state, &lab.params), &lab.norms);
                    traj.t_end = c.t;
                    monitor.observe_decomposition(c.t, &d)?;
                }
                traj.finish();
                traj
            }
            None => {
                let mut eps = &lab.profile.profile(&initial_modes(cfg)) - &lab.profile.ground();
                eps.axpy(1.0, &lab.dispersive_perturbation(cfg.eps_amp));
                let mut obs = |f: &Frame| monitor.observe(f);
                let r = shoot_center_observed(&eps, &shoot_config(cfg), &ecfg, &lab.profile, &lab.basis, &lab.norms, Some(&mut obs))?;
                r.trajectory
            }
        };
        if let Some(e) = monitor.error.take() {
            return Err(e);
        }
        let s = &monitor.series;
        write_virial(sink, s, &traj)?;
        for sub in [4, 2] {
            if s.len() > 2 * sub + 1 {
                let m = ddt_consistency(s, sub);
                report.say(format!("ddt mismatch (stride {sub}): {}", fmt_list(&m)));
            }
        }
        let b = budgets(&traj);
        report.say(format!("budget totals {}; last-quarter fraction {:.3e}", fmt_list(&b.totals), b.last_quarter_fraction()));
        Ok(())
    })
}

fn fmt_list(v: &[f64]) -> String {
    v.iter().map(|x| format!("{x:.3e}")).collect::<Vec<_>>().join(" ")
}

/// One self-test check.
#[derive(Debug, Clone)]
pub struct Check {
    pub name: &'static str,
    pub value: f64,
    pub tol: f64,
}

impl Check {
    pub fn passed(&self) -> bool {
        self.value <= self.tol
    }
}

/// Quick internal-consistency checks on a modest grid (`n = 2048`, `L = 100`).
pub fn selftest_checks() -> Result<Vec<Check>> {
    let grid = Grid::new(100.0, 2048, 20.0)?;
    let mut checks = Vec::new();
    for p in [1.8, 2.0] {
        let lab = Lab::new(p, &grid, 40.0, 0.1, 0.5 * (p - 1.0))?;
        checks.push(Check {
            name: if p < 2.0 { "oracle spectrum p=1.8" } else { "oracle spectrum p=2" },
            value: spectrum_mismatch(&lab.params, &grid).unwrap_or(f64::INFINITY),
            tol: 1e-5,
        });
        checks.push(Check {
            name: if p < 2.0 { "intertwining p=1.8" } else { "intertwining p=2" },
            value: check_intertwining(&lab.params, &grid),
            tol: 1e-3,
        });
        // decomposition recovers the modes of a refined profile
        let z = [Complex64::new(1e-3, -2e-3), Complex64::new(4e-3, 1e-3)];
        let d = lab.profile.decompose(&lab.profile.profile(&z))?;
        let err = (0..2).map(|k| (d.z[k] - z[k]).norm()).fold(0.0, f64::max);
        checks.push(Check { name: "decomposition round trip", value: err / 4e-3, tol: 1e-6 });
        // one step of the ground state
        let mut u = lab.profile.ground();
        let mut stepper = Stepper::new(&lab.params, &grid, 0.0);
        stepper.step(&mut u, 0.25 * grid.dx());
        checks.push(Check {
            name: "ground state is a fixed point",
            value: energy_norm(&(&u - &lab.profile.ground())),
            tol: 1e-8,
        });
    }
    let (profile, wave, sample) = crate::scattering::fgr_at(1.9, &grid)?;
    let _ = (profile, wave);
    checks.push(Check { name: "FGR pairing vs reduced form", value: sample.agreement, tol: 1e-4 });
    Ok(checks)
}

fn selftest(cfg: &RunConfig, path: &Path, report: &mut Report) -> Result<()> {
    with_sink(path, &cfg.header(), &["check", "value", "tol", "status"], report, |sink, report| {
        for c in selftest_checks()? {
            let status = if c.passed() { "PASS" } else { "FAIL" };
            report.passed &= c.passed();
            report.say(format!("{status} {}: {:.3e} (tol {:.1e})", c.name, c.value, c.tol));
            sink.row(&[c.name.into(), num(c.value), num(c.tol), status.into()])?;
        }
        Ok(())
    })
}

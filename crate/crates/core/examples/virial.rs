//! The transformed variable `v = Tη`, its inverse, and the virial functionals
//! with their analytic time derivatives along a short on-manifold run.
//!
//!     cargo run --release --example virial

use nlkg::config::{Command, RunConfig};
use nlkg::evolution::{Frame, Stepper};
use nlkg::run::{evolution_config, shoot_config, Lab};
use nlkg::shooting::shoot_center_observed;
use nlkg::virial::{ddt_consistency, VirialMonitor, FUNCTIONAL_NAMES};
use num_complex::Complex64;

fn main() -> nlkg::Result<()> {
    let mut cfg = RunConfig::new(Command::Virial);
    cfg.n_points = 2048;
    cfg.t_final = 10.0;
    cfg.record_stride = 5;
    let lab = Lab::from_config(&cfg)?;
    let (transform, functionals) = lab.functionals(&cfg)?;

    let eta = lab.dispersive_perturbation(0.01);
    let v = transform.apply(&eta);
    let back = transform.reconstruct(&v)?;
    println!("parity of v: {:?}; |T^-1 T eta - eta| / |eta| = {:.2e}", v.parity, (&back - &eta).norm() / eta.norm());

    let ecfg = evolution_config(&cfg, &lab.grid);
    let sponge = Stepper::new(&lab.params, &lab.grid, ecfg.sponge_strength).sigma().to_vec();
    let mut monitor = VirialMonitor::new(&lab.profile, &transform, &functionals, Some(sponge));
    let z = [Complex64::new(0.0, 0.0), Complex64::new(0.02, 0.0)];
    let eps = &lab.profile.profile(&z) - &lab.profile.ground();
    let mut obs = |f: &Frame| monitor.observe(f);
    shoot_center_observed(&eps, &shoot_config(&cfg), &ecfg, &lab.profile, &lab.basis, &lab.norms, Some(&mut obs))?;
    let s = &monitor.series;
    for sub in [4, 2] {
        let m = ddt_consistency(s, sub);
        let cells: Vec<String> = FUNCTIONAL_NAMES.iter().zip(m).map(|(n, v)| format!("{n} {v:.3}")).collect();
        println!("relative d/dt mismatch, stride {sub}: {}", cells.join(", "));
    }
    Ok(())
}

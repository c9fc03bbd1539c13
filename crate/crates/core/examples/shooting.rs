//! Shooting onto the center hypersurface: bisection on the `Y₊` amplitude
//! and the scaling of `a*` with the size of the perturbation.
//!
//!     cargo run --release --example shooting

use nlkg::config::{Command, RunConfig};
use nlkg::run::{evolution_config, Lab};
use nlkg::shooting::{bisect, project_off_unstable, ShootConfig};

fn main() -> nlkg::Result<()> {
    let mut cfg = RunConfig::new(Command::Shoot);
    cfg.n_points = 2048;
    let lab = Lab::from_config(&cfg)?;
    let ecfg = evolution_config(&cfg, &lab.grid);
    let shoot = ShootConfig { tol: 1e-9, horizon: 30.0, ..ShootConfig::default() };
    for eps in [0.0, 0.01, 0.02] {
        let e = project_off_unstable(&lab.internal_mode_perturbation(eps), &lab.basis)?;
        let base = &lab.profile.ground() + &e;
        let b = bisect(&base, 0.0, shoot.a_range, &shoot, &ecfg, &lab.profile, &lab.basis, &lab.norms)?;
        println!("eps = {eps:5.3}: a* = {:+.4e} ({} shots)", b.a_star, b.shots);
    }
    Ok(())
}

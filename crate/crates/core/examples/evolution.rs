//! Störmer–Verlet evolution near the soliton: energy conservation and the
//! unstable growth rate `ν₀` seen through `z₁`.
//!
//!     cargo run --release --example evolution

use nlkg::evolution::{evolve, EvolutionConfig};
use nlkg::norms::NormSet;
use nlkg::profile::build_profile;
use nlkg::spectrum::{eigenbasis, soliton};
use nlkg::{Grid, ModelParams};

fn main() -> nlkg::Result<()> {
    let grid = Grid::new(100.0, 2048, 20.0)?;
    let params = ModelParams::new(2.0)?;
    let s = soliton(&params, &grid);
    let basis = eigenbasis(&params, &s, &grid)?;
    let profile = build_profile(&params, &basis, &s)?;
    let norms = NormSet::new(&grid, 40.0, 0.1, 0.5);

    let mut u0 = profile.ground();
    u0.axpy(1e-4, &basis.y_plus);
    let cfg = EvolutionConfig { sponge_strength: 0.0, ..EvolutionConfig::for_grid(&grid, 0.25, 20.0) };
    let traj = evolve(&u0, &cfg, &profile, &norms)?;
    let (t0, t1) = (traj.times[0], traj.times[traj.len() / 2]);
    let (a0, a1) = (traj.z[0][0].norm(), traj.z[traj.len() / 2][0].norm());
    println!("growth rate {:.4} (nu0 = {:.4})", (a1 / a0).ln() / (t1 - t0), params.nu0);
    println!("exit {:?} at t = {:.2}", traj.exit, traj.t_end);
    let e0 = traj.energy[0];
    let drift = traj.energy.iter().map(|e| (e - e0).abs()).fold(0.0, f64::max);
    println!("max |E(t) - E(0)| = {drift:.2e}");
    Ok(())
}

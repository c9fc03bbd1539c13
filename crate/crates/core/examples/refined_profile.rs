//! Refined profile `Qi + Φ[z] + R[z]`: the `G₂` coefficient against finite
//! differences and the symplectic decomposition of a perturbed state.
//!
//!     cargo run --release --example refined_profile

use nlkg::profile::build_profile;
use nlkg::spectrum::{eigenbasis, soliton};
use nlkg::virial::project_continuous;
use nlkg::{Field, Grid, ModelParams, Parity, StatePair};
use num_complex::Complex64;

fn main() -> nlkg::Result<()> {
    let grid = Grid::new(100.0, 4096, 20.0)?;
    let params = ModelParams::new(1.9)?;
    let s = soliton(&params, &grid);
    let basis = eigenbasis(&params, &s, &grid)?;
    let profile = build_profile(&params, &basis, &s)?;
    println!("Gram determinant {:.6e}", profile.gram_det);

    let (w, _) = profile.g2_coefficient()?;
    let fd = profile.g2_finite_difference(1e-3)?;
    println!("d2 z_R / dz2^2: analytic {:.6e} {:.6e}, finite difference {:.6e} {:.6e}", w[0], w[1], fd[0], fd[1]);

    let z = [Complex64::new(2e-3, -1e-3), Complex64::new(5e-3, 3e-3)];
    // a dispersive perturbation: no component along the discrete modes
    let bump = Field::from_fn(&grid, Parity::Even, |x| 1e-3 * (-x * x / 2.0).exp());
    let bump = project_continuous(&bump, &basis.phi);
    let mut u = profile.profile(&z);
    u.axpy(1.0, &StatePair::new(bump, Field::zeros(&grid, Parity::Even)));
    let d = profile.decompose(&u)?;
    println!("z in  = {z:?}\nz out = {:?}", d.z);
    println!("orthogonality residuals {:?}", d.residuals);
    Ok(())
}

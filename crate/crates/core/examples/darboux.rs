//! The Darboux chain: `A = S_N*⋯S_0*` annihilates the discrete eigenfunctions
//! and intertwines `L₀` with the top operator `L_{N+1}`.
//!
//!     cargo run --release --example darboux

use nlkg::spectrum::darboux::{intertwining_battery, intertwining_defect};
use nlkg::spectrum::{apply_chain_adjoint, check_repulsivity, eigenbasis, soliton};
use nlkg::{Grid, ModelParams};

fn main() -> nlkg::Result<()> {
    let grid = Grid::new(100.0, 4096, 20.0)?;
    for p in [1.75, 1.9, 2.0] {
        let params = ModelParams::new(p)?;
        let s = soliton(&params, &grid);
        let basis = eigenbasis(&params, &s, &grid)?;
        let killed: Vec<String> = basis
            .phi_normalized
            .iter()
            .map(|phi| format!("{:.1e}", apply_chain_adjoint(&params, phi).max_abs()))
            .collect();
        let defects: Vec<String> = intertwining_battery(&grid)
            .iter()
            .map(|w| format!("{:.1e}", intertwining_defect(&s, w)))
            .collect();
        println!("p = {p}: |A phi_j| = [{}], intertwining defects [{}]", killed.join(", "), defects.join(", "));
        match check_repulsivity(&params, &grid) {
            Ok(r) => println!("    top potential repulsive: {} (min {:.2e})", r.is_repulsive, r.min_value),
            Err(e) => println!("    {e}"),
        }
    }
    Ok(())
}

//! The Bessel multiplier `⟨iε∂x⟩^{-s}` on parity fields: inversion and
//! smoothing of a kink.
//!
//!     cargo run --release --example multiplier

use nlkg::multiplier::bessel_multiplier;
use nlkg::{inner, Field, Grid, Parity};

fn main() -> nlkg::Result<()> {
    let grid = Grid::new(100.0, 4096, 20.0)?;
    let f = Field::from_fn(&grid, Parity::Even, |x| (-x.abs()).exp());
    let g = Field::from_fn(&grid, Parity::Even, |x| (-x * x / 9.0).exp());
    for eps in [0.1, 0.3, 1.0] {
        let smooth = bessel_multiplier(&f, 3.0, eps);
        let back = bessel_multiplier(&smooth, -3.0, eps);
        let sym = inner(&bessel_multiplier(&f, 1.0, eps), &g)? - inner(&f, &bessel_multiplier(&g, 1.0, eps))?;
        println!(
            "eps = {eps}: peak {:.4} -> {:.4}, round trip {:.1e}, symmetry defect {:.1e}",
            f.max_abs(),
            smooth.max_abs(),
            (&back - &f).max_abs(),
            sym.abs()
        );
    }
    Ok(())
}

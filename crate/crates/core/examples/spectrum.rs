//! Closed-form discrete spectrum of `L₀` against a finite-difference oracle.
//!
//!     cargo run --release --example spectrum [n_points]

use nlkg::spectrum::oracle::{discrete_spectrum_oracle, p_samples};
use nlkg::spectrum::soliton;
use nlkg::{Grid, ModelParams};

fn main() -> nlkg::Result<()> {
    let n: usize = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(4096);
    let grid = Grid::new(100.0, n, 20.0)?;
    println!("{:>7} {:>4} {:>10} {:>10} {:>10} {:>10} {:>10}", "p", "N", "nu0", "lambda", "mu2", "oracle", "mismatch");
    for p in p_samples(6) {
        let params = ModelParams::new(p)?;
        let oracle = discrete_spectrum_oracle(&soliton(&params, &grid)).all();
        let mismatch = oracle
            .iter()
            .zip(params.eigenvalues())
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max);
        println!(
            "{p:7.4} {:>4} {:10.6} {:10.6} {:10.6} {:>10} {mismatch:10.2e}",
            params.n_top,
            params.nu0,
            params.lambda,
            params.mu[2],
            oracle.len()
        );
    }
    Ok(())
}

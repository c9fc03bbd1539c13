//! Fermi-Golden-Rule coefficient `γ(p)` over the exponent range.
//!
//!     cargo run --release --example fgr_scan [count]

use nlkg::scattering::{fgr_scan, linspace};
use nlkg::Grid;

fn main() -> nlkg::Result<()> {
    let count: usize = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(12);
    let grid = Grid::new(100.0, 4096, 20.0)?;
    println!("{:>7} {:>9} {:>12} {:>12} {:>10}", "p", "xi", "|gamma|", "|reduced|", "agreement");
    for e in fgr_scan(&linspace(1.7, 2.0, count), &grid) {
        match e.result {
            Ok(s) => println!(
                "{:7.4} {:9.5} {:12.6} {:12.6} {:10.2e}{}",
                e.p,
                s.xi,
                s.gamma_abs(),
                s.gamma_reduced.norm(),
                s.agreement,
                if e.dip { "  dip" } else { "" }
            ),
            Err(err) => println!("{:7.4} failed: {err}", e.p),
        }
    }
    Ok(())
}

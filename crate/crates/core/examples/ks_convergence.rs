//! Exact Kolmogorov distance between standardised Z_N(2) and the gridded
//! limit CDF, with an optional sampled overlay.

use partlim::limitlaw::density_grid;
use partlim::montecarlo::ks_convergence;

fn main() -> partlim::Result<()> {
    let grid = density_grid(2, 8192, 40)?;
    let report = ks_convergence(2, &[2, 4, 6, 8, 10, 12], &grid, Some((100_000, 3)))?;
    println!("{:>3} {:>12} {:>12}", "N", "exact", "sampled");
    for row in &report.rows {
        println!(
            "{:>3} {:>12.4e} {:>12.4e}",
            row.n,
            row.exact.unwrap_or(f64::NAN),
            row.sampled.unwrap_or(f64::NAN)
        );
    }
    println!("strictly decreasing: {}", report.strictly_decreasing());
    if let Some(c) = report.contraction() {
        println!("last/first: {c:.4}");
    }
    Ok(())
}

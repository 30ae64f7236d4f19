//! Feller ratio, Lindeberg sums and the largest point mass as N grows. The
//! Feller ratio settles at 3/4 and the Lindeberg sum does not vanish.

use partlim::distn::{clt_diagnostics, mgf_eval, standardized_mgf_cosh};
use partlim::exactnum::to_f64;

fn main() -> partlim::Result<()> {
    println!("{:>3} {:>12} {:>14} {:>12}", "N", "Feller", "Lindeberg(.1)", "max mass");
    for n in [1u32, 2, 5, 10, 20, 40] {
        let d = clt_diagnostics(2, n, 0.1)?;
        println!(
            "{n:>3} {:>12.9} {:>14.9} {:>12.3e}",
            to_f64(&d.feller_ratio),
            to_f64(&d.lindeberg),
            to_f64(&d.max_point_mass)
        );
    }
    println!("\nMGF of Z_6(2) at t=0.01: {:.12}", mgf_eval(2, 6, 0.01)?);
    println!("standardised MGF of Z_20(2) at t=1: {:.12}", standardized_mgf_cosh(20, 1.0));
    Ok(())
}

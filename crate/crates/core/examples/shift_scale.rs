//! The limit law computed directly and through the unit-interval variable
//! V* related to it by a shift and scale.

use partlim::limitlaw::{shift_scale_consistency, shift_scale_maps, DensityGrid};

fn main() -> partlim::Result<()> {
    for a in [2u64, 3, 5] {
        let r = shift_scale_consistency(a, 4096, 40)?;
        println!(
            "a={a}: sup|G - G_mapped| = {:.2e}, tolerance {:.2e}, {}",
            r.sup_cdf_diff,
            r.tolerance,
            if r.passes() { "consistent" } else { "INCONSISTENT" }
        );
    }
    let v = DensityGrid::unit(3, 4096, 40)?;
    for x in [-1.0, 0.0, 1.0] {
        let (cdf, pdf) = shift_scale_maps(3, x, &v)?;
        println!("a=3 x={x:>4}: cdf {cdf:.6} pdf {pdf:.6}");
    }
    Ok(())
}

//! Writes the base-2 triangle as a b-file, reads it back and cross-checks
//! it. Pass a downloaded b-file path to check that instead.

use partlim::coeffs::{encode_bfile, expand_coeffs, oeis_crosscheck, parse_bfile, read_bfile};

fn main() -> partlim::Result<()> {
    let tables = (1..=8u32).map(|n| expand_coeffs(2, n)).collect::<partlim::Result<Vec<_>>>()?;
    let bfile = match std::env::args().nth(1) {
        Some(path) => read_bfile(path)?,
        None => parse_bfile(&encode_bfile(&tables, 1))?,
    };
    let report = oeis_crosscheck(&tables, &bfile)?;
    println!("layout: first row N={} at index {}", report.layout.first_order, report.layout.offset);
    for row in &report.rows {
        println!("N={:>2}: {:?}", row.order, row.status);
    }
    println!("all rows match: {}", report.all_match());
    Ok(())
}

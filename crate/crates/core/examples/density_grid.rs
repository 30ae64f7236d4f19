//! Density and CDF of the limit law on a grid, written as CSV plus a JSON
//! sidecar. Usage: density_grid [a] [M] [iters] [out-stem]

use partlim::limitlaw::{density_grid, discretization_estimate};

fn main() -> partlim::Result<()> {
    let args: Vec<String> = std::env::args().skip(1).collect();
    let a: u64 = args.first().map_or(2, |s| s.parse().expect("a"));
    let m: usize = args.get(1).map_or(4096, |s| s.parse().expect("M"));
    let iters: u32 = args.get(2).map_or(40, |s| s.parse().expect("iters"));

    let g = density_grid(a, m, iters)?;
    println!("a={a} M={m} iters={iters} h={:.3e}", g.h);
    println!("integral    {:.12}", g.integral());
    println!("variance    {:.12}", g.moment(2));
    println!("m_4         {:.12}", g.moment(4));
    println!("peak pdf    {:.6}", g.max_pdf());
    println!("symmetry    {:.2e}", g.symmetry_defect());
    println!("truncation  {:.2e}", g.truncation_bound);
    println!("grid error  {:.2e}", discretization_estimate(&g)?);
    for x in [-1.5, -0.5, 0.0, 0.5, 1.5] {
        println!("  x={x:>5}: pdf {:.6}  cdf {:.6}", g.pdf_at(x), g.cdf_at(x));
    }
    if let Some(stem) = args.get(3) {
        let (csv, json) = g.export(stem)?;
        println!("wrote {} and {}", csv.display(), json.display());
    }
    Ok(())
}

//! Exact pmf, closed-form mean and variance, and standardised cumulants of
//! Z_N(a), compared with the closed form available for a = 2.

use partlim::distn::{
    binary_cumulant_closed_form, cumulant_decomposition_check, mean_variance, pmf,
    standardized_cumulants,
};
use partlim::coeffs::expand_coeffs;
use partlim::exactnum::to_f64;

fn main() -> partlim::Result<()> {
    let p = pmf(&expand_coeffs(2, 3)?);
    let shown: Vec<String> = p.iter().map(|q| q.to_string()).collect();
    println!("pmf of Z_3(2): {}", shown.join(" "));

    for a in [2u64, 3, 10] {
        let (mu, var) = mean_variance(a, 4)?;
        println!("a={a:>2} N=4  mean={mu}  variance={var}");
    }

    let seq = standardized_cumulants(2, 12, 5)?;
    println!("\nstandardised cumulants of Z_12(2)");
    for (i, k) in seq.even.iter().enumerate() {
        let order = 2 * (i + 1);
        assert_eq!(k, &binary_cumulant_closed_form(12, i as u64 + 1));
        println!("  kappa_{order:<2} = {:>14.9}  ({k})", to_f64(k));
    }

    let d = cumulant_decomposition_check(12, 3)?;
    let parts: Vec<String> = d.terms.iter().map(|t| format!("{:+.3e}", to_f64(t))).collect();
    println!("\nkappa_6 split into three terms: {} (sum matches: {})", parts.join(" + "), d.holds());
    Ok(())
}

//! Seeded samplers for Z_N(a) and the truncated limit, with moment z-scores
//! and a goodness-of-fit test against the exact pmf.

use partlim::coeffs::expand_coeffs;
use partlim::distn::pmf;
use partlim::exactnum::to_f64;
use partlim::montecarlo::{
    chi_square_gof, histogram, raw_moment_check, sample_zn_bernoulli, sample_zn_direct,
    sample_zstar, zn_moment_checks,
};

fn main() -> partlim::Result<()> {
    let batch = sample_zn_direct(2, 8, 200_000, 42)?;
    let (mean, var) = zn_moment_checks(&batch)?;
    println!("Z_8(2): mean {:.3} (z {:+.2}), variance {:.1} (z {:+.2})", mean.estimate, mean.z_score(), var.estimate, var.z_score());

    let probs: Vec<f64> = pmf(&expand_coeffs(2, 5)?).iter().map(to_f64).collect();
    for (name, b) in [
        ("direct", sample_zn_direct(2, 5, 200_000, 1)?),
        ("bernoulli", sample_zn_bernoulli(2, 5, 200_000, 1)?),
    ] {
        let t = chi_square_gof(&histogram(&b, probs.len())?, &probs)?;
        println!("Z_5(2) {name:>9}: chi2 {:.1} on {} dof, p {:.3}", t.statistic, t.dof, t.p_value);
    }

    let z = sample_zstar(2, 30, 200_000, 7)?;
    let xs = z.as_f64();
    let m4 = raw_moment_check(&xs, 4, 57.0 / 25.0, 398_427.0 / 14_875.0);
    println!("Z*(2) from 30 terms: m_4 {:.4} vs 2.28 (z {:+.2})", m4.estimate, m4.z_score());
    Ok(())
}

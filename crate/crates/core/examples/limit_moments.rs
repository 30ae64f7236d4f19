//! Even moments of the limit law from cumulants and three recurrences, with
//! the truncated-sum oracle and the Lyapunov profile.

use partlim::exactnum::to_f64;
use partlim::limitlaw::{
    lyapunov_profile, moments_from_truncated_sum, uniform_cumulant_comparison, LimitLaw,
    Recurrence,
};

fn main() -> partlim::Result<()> {
    let law = LimitLaw::new(2, 12)?;
    for r in Recurrence::ALL {
        if let Ok(m) = r.run(2, 12) {
            assert_eq!(m, law.moments, "{}", r.name());
        }
    }
    let trunc = moments_from_truncated_sum(2, 30, 6)?;
    println!("{:>5} {:>28} {:>18} {:>12}", "2n", "m_2n", "decimal", "K=30 gap");
    for (n, (m, t)) in law.moments.iter().zip(&trunc).enumerate().skip(1) {
        let gap = (to_f64(m) - to_f64(t)).abs();
        println!("{:>5} {:>28} {:>18.9} {:>12.1e}", 2 * n, m.to_string(), to_f64(m), gap);
    }

    let profile = lyapunov_profile(&law.moments);
    println!("\n(m_2n)^(1/2n) for n=1..12, support radius {}", law.support_radius());
    for (i, v) in profile.iter().enumerate() {
        println!("  n={:>2}: {v:.6}", i + 1);
    }

    println!("\nlimit vs uniform cumulants, a=3");
    for row in uniform_cumulant_comparison(3, 5)? {
        println!(
            "  2n={:>2}  limit {:>12.6}  uniform {:>12.6}  ratio {:.6}",
            2 * row.n,
            to_f64(&row.limit),
            to_f64(&row.uniform),
            to_f64(&row.ratio)
        );
    }
    Ok(())
}

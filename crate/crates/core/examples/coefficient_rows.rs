//! Coefficient rows for several bases, checked against tuple enumeration
//! and round-tripped through the on-disk cache.

use partlim::coeffs::{brute_force_coeffs, expand_coeffs, read_cache, write_cache};

fn main() -> partlim::Result<()> {
    for a in [2u64, 3, 4] {
        for n in 1..=3u32 {
            let t = expand_coeffs(a, n)?;
            let shown: Vec<String> = t.row().iter().take(12).map(|v| v.to_string()).collect();
            let more = if t.len() > 12 { ",.." } else { "" };
            println!("a={a} N={n} len={:>3} total={:>6}  {}{more}", t.len(), t.total(), shown.join(","));
            assert_eq!(t, brute_force_coeffs(a, n)?);
        }
    }

    let dir = std::env::temp_dir().join("partlim-example-cache");
    let table = expand_coeffs(2, 10)?;
    let path = write_cache(&dir, &table)?;
    let back = read_cache(&dir, 2, 10)?.expect("just written");
    assert_eq!(back, table);
    println!("cached a=2 N=10 ({} entries) at {}", table.len(), path.display());
    Ok(())
}

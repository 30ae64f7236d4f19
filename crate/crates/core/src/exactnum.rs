//! Exact scalars and the handful of classical number sequences built on them.
//!
//! Bernoulli numbers follow the `t / (e^t - 1)` convention, so `B_1 = -1/2`.
//! The other common convention (`t e^t / (e^t - 1)`) flips the sign of `B_1`
//! and nothing else; every formula in this crate assumes the former.

use std::sync::{OnceLock, RwLock};

use num_bigint::{BigInt, BigUint};
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::{Error, Result};

/// Arbitrary-precision signed integer.
pub type Integer = BigInt;

/// Arbitrary-precision rational, always reduced with a positive denominator.
pub type Rational = num_rational::BigRational;

/// Memoised Bernoulli numbers `B_0, B_1, ..`.
///
/// Entries are computed with the recurrence `sum_{k=0}^{n} C(n+1, k) B_k = 0`
/// over exact rationals and never change once stored. Growth takes a write
/// lock, so one cache may be shared between threads.
#[derive(Debug)]
pub struct BernoulliCache {
    computed: RwLock<Vec<Rational>>,
}

impl Default for BernoulliCache {
    fn default() -> Self {
        Self::new()
    }
}

impl BernoulliCache {
    pub fn new() -> Self {
        BernoulliCache {
            computed: RwLock::new(vec![Rational::one()]),
        }
    }

    /// Number of entries computed so far.
    pub fn len(&self) -> usize {
        self.computed.read().expect("bernoulli cache poisoned").len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn get(&self, n: usize) -> Rational {
        {
            let cache = self.computed.read().expect("bernoulli cache poisoned");
            if let Some(b) = cache.get(n) {
                return b.clone();
            }
        }
        let mut cache = self.computed.write().expect("bernoulli cache poisoned");
        while cache.len() <= n {
            let m = cache.len();
            let next = if m >= 3 && m % 2 == 1 {
                Rational::zero()
            } else {
                // B_m = -1/(m+1) * sum_{k<m} C(m+1, k) B_k
                let mut acc = Rational::zero();
                let mut c = BigInt::one(); // C(m+1, 0)
                for (k, b) in cache.iter().enumerate() {
                    if !b.is_zero() {
                        acc += b * &c;
                    }
                    c = c * BigInt::from(m + 1 - k) / BigInt::from(k + 1);
                }
                -acc / BigInt::from(m + 1)
            };
            cache.push(next);
        }
        cache[n].clone()
    }

    /// `B_0 ..= B_n` in one shot.
    pub fn upto(&self, n: usize) -> Vec<Rational> {
        self.get(n);
        self.computed.read().expect("bernoulli cache poisoned")[..=n].to_vec()
    }
}

fn global_cache() -> &'static BernoulliCache {
    static CACHE: OnceLock<BernoulliCache> = OnceLock::new();
    CACHE.get_or_init(BernoulliCache::new)
}

/// Exact `B_n` with `B_1 = -1/2`, served from a process-wide cache.
pub fn bernoulli_number(n: usize) -> Rational {
    global_cache().get(n)
}

/// Exact value of the Bernoulli polynomial `B_n(x)` at `x = 1/2`, summed as
/// `sum_k C(n, k) B_k (1/2)^{n-k}`.
pub fn bernoulli_poly_at_half(n: usize) -> Rational {
    let b = global_cache().upto(n);
    let mut acc = Rational::zero();
    for (k, bk) in b.iter().enumerate() {
        if bk.is_zero() {
            continue;
        }
        let weight = Rational::new(binom(n as u64, k as u64), BigInt::one() << (n - k));
        acc += bk * weight;
    }
    acc
}

/// `C(n, k)` for any integer `n` (falling-factorial form) and `k >= 0`.
///
/// Returns 0 when `0 <= n < k`. Negative `k` is rejected.
pub fn binomial(n: &Integer, k: &Integer) -> Result<Integer> {
    if k.is_negative() {
        return Err(Error::invalid(format!("binomial with negative k = {k}")));
    }
    if !n.is_negative() && n < k {
        return Ok(Integer::zero());
    }
    let k = k
        .to_u64()
        .ok_or_else(|| Error::invalid(format!("binomial k = {k} too large")))?;
    // For n >= 0 use the smaller of k and n - k.
    let k = match n.to_u64() {
        Some(nn) if !n.is_negative() => k.min(nn - k),
        _ => k,
    };
    let mut acc = Integer::one();
    for i in 0..k {
        acc *= n - Integer::from(i);
        acc /= Integer::from(i + 1);
    }
    Ok(acc)
}

/// `C(n, k)` on machine-sized arguments, 0 when `k > n`.
pub fn binom(n: u64, k: u64) -> Integer {
    if k > n {
        return Integer::zero();
    }
    let k = k.min(n - k);
    let mut acc = Integer::one();
    for i in 0..k {
        acc *= n - i;
        acc /= i + 1;
    }
    acc
}

/// Number of ones in the binary expansion of `n`.
pub fn s2(n: u64) -> u32 {
    n.count_ones()
}

/// [`s2`] for arbitrary-size non-negative integers.
pub fn s2_big(n: &BigUint) -> u64 {
    n.count_ones()
}

/// `base^exp` as an [`Integer`].
pub fn int_pow(base: u64, exp: u64) -> Integer {
    num_traits::pow(Integer::from(base), exp as usize)
}

/// `x^exp` for a rational `x`.
pub fn rat_pow(x: &Rational, exp: u64) -> Rational {
    num_traits::pow(x.clone(), exp as usize)
}

pub fn rat(num: i64, den: i64) -> Rational {
    Rational::new(Integer::from(num), Integer::from(den))
}

pub fn rat_int(n: Integer) -> Rational {
    Rational::from_integer(n)
}

/// Nearest `f64`; huge magnitudes saturate to infinity.
pub fn to_f64(x: &Rational) -> f64 {
    x.to_f64().unwrap_or_else(|| {
        if x.is_negative() {
            f64::NEG_INFINITY
        } else {
            f64::INFINITY
        }
    })
}

fn ln_integer(n: &Integer) -> f64 {
    let bits = n.bits();
    if bits <= 1000 {
        n.to_f64().unwrap_or(f64::NAN).ln()
    } else {
        let shift = bits - 64;
        (n >> shift).to_f64().unwrap_or(f64::NAN).ln() + shift as f64 * std::f64::consts::LN_2
    }
}

/// Natural log of a positive rational without overflowing through `f64`.
pub fn ln_rational(x: &Rational) -> f64 {
    assert!(x.is_positive(), "ln of non-positive rational");
    ln_integer(x.numer()) - ln_integer(x.denom())
}

/// Plain decimal rendering with `sig` significant digits; switches to
/// scientific notation outside `1e-5 ..= 1e15`.
pub fn decimal(x: f64, sig: usize) -> String {
    if x == 0.0 || !x.is_finite() {
        return format!("{x}");
    }
    let e = x.abs().log10().floor() as i64;
    if (-5..=15).contains(&e) {
        let places = (sig as i64 - 1 - e).max(0) as usize;
        format!("{x:.places$}")
    } else {
        format!("{:.*e}", sig.saturating_sub(1), x)
    }
}

/// `decimal` at the 12 significant digits used for every human-facing report.
pub fn decimal12(x: &Rational) -> String {
    decimal(to_f64(x), 12)
}

#[cfg(test)]
mod tests {
    use super::*;

    // Oracle: t/(e^t - 1) series coefficients via the power-series reciprocal
    // of (e^t - 1)/t = sum t^k/(k+1)!, multiplied back by n!.
    fn bernoulli_by_series(n_max: usize) -> Vec<Rational> {
        let mut fact = vec![Integer::one()];
        for k in 1..=n_max + 1 {
            let next = &fact[k - 1] * Integer::from(k);
            fact.push(next);
        }
        let d: Vec<Rational> = (0..=n_max)
            .map(|k| Rational::new(Integer::one(), fact[k + 1].clone()))
            .collect();
        let mut inv = vec![Rational::one()];
        for n in 1..=n_max {
            let mut s = Rational::zero();
            for k in 1..=n {
                s += &d[k] * &inv[n - k];
            }
            inv.push(-s);
        }
        inv.iter()
            .enumerate()
            .map(|(n, c)| c * Rational::from_integer(fact[n].clone()))
            .collect()
    }

    #[test]
    fn bernoulli_small_values() {
        assert_eq!(bernoulli_number(0), rat(1, 1));
        assert_eq!(bernoulli_number(1), rat(-1, 2));
        assert_eq!(bernoulli_number(2), rat(1, 6));
        assert_eq!(bernoulli_number(4), rat(-1, 30));
        assert_eq!(bernoulli_number(12), rat(-691, 2730));
    }

    #[test]
    fn bernoulli_matches_series_oracle() {
        let oracle = bernoulli_by_series(40);
        for (n, b) in oracle.iter().enumerate() {
            assert_eq!(&bernoulli_number(n), b, "B_{n}");
        }
    }

    #[test]
    fn odd_bernoulli_vanish_and_recurrence_closes() {
        for n in (3..=61).step_by(2) {
            assert!(bernoulli_number(n).is_zero());
        }
        for n in 1..=60u64 {
            let mut acc = Rational::zero();
            for k in 0..=n {
                acc += bernoulli_number(k as usize) * rat_int(binom(n + 1, k));
            }
            assert!(acc.is_zero(), "recurrence fails at n={n}");
        }
    }

    #[test]
    fn bernoulli_poly_at_half_values() {
        assert_eq!(bernoulli_poly_at_half(0), rat(1, 1));
        assert_eq!(bernoulli_poly_at_half(1), rat(0, 1));
        assert_eq!(bernoulli_poly_at_half(2), rat(-1, 12));
        for n in 0..=60usize {
            let factor = Rational::new(Integer::one(), Integer::one() << n) * Integer::from(2)
                - Rational::one();
            assert_eq!(bernoulli_poly_at_half(n), factor * bernoulli_number(n), "n={n}");
        }
    }

    #[test]
    fn cache_is_shareable() {
        let cache = std::sync::Arc::new(BernoulliCache::new());
        let handles: Vec<_> = (0..4)
            .map(|i| {
                let c = cache.clone();
                std::thread::spawn(move || c.get(20 + 2 * i))
            })
            .collect();
        let got: Vec<_> = handles.into_iter().map(|h| h.join().unwrap()).collect();
        for (i, b) in got.iter().enumerate() {
            assert_eq!(b, &bernoulli_number(20 + 2 * i));
        }
    }

    fn pascal(n: usize) -> Vec<Vec<Integer>> {
        let mut rows = vec![vec![Integer::one()]];
        for i in 1..=n {
            let prev = &rows[i - 1];
            let mut row = vec![Integer::one(); i + 1];
            for k in 1..i {
                row[k] = &prev[k - 1] + &prev[k];
            }
            rows.push(row);
        }
        rows
    }

    #[test]
    fn binomial_values() {
        let b = |n: i64, k: i64| binomial(&Integer::from(n), &Integer::from(k)).unwrap();
        assert_eq!(b(5, 2), Integer::from(10));
        assert_eq!(b(7, 3), Integer::from(35));
        assert_eq!(b(9, 0), Integer::one());
        assert_eq!(b(0, 0), Integer::one());
        assert_eq!(b(3, 5), Integer::zero());
        // falling factorial for negative n: C(-2, 3) = (-2)(-3)(-4)/6
        assert_eq!(b(-2, 3), Integer::from(-4));
        assert!(binomial(&Integer::from(4), &Integer::from(-1)).is_err());

        let tri = pascal(30);
        for (n, row) in tri.iter().enumerate() {
            for (k, v) in row.iter().enumerate() {
                assert_eq!(&b(n as i64, k as i64), v);
                assert_eq!(&binom(n as u64, k as u64), v);
            }
        }
    }

    #[test]
    fn s2_values() {
        assert_eq!(s2(0), 0);
        assert_eq!(s2(7), 3);
        assert_eq!(s2(12), 2);
        assert_eq!(s2_big(&BigUint::from(12u32)), 2);
    }

    #[test]
    fn decimal_rendering() {
        assert_eq!(decimal(2.28, 12), "2.28000000000");
        assert_eq!(decimal(0.125, 3), "0.125");
        assert_eq!(decimal(-0.72, 4), "-0.7200");
        assert_eq!(decimal(1.5e20, 3), "1.50e20");
    }

    #[test]
    fn ln_of_huge_rational() {
        let x = Rational::new(int_pow(3, 2000), int_pow(2, 1000));
        let expected = 2000.0 * 3f64.ln() - 1000.0 * 2f64.ln();
        assert!((ln_rational(&x) - expected).abs() < 1e-9 * expected);
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        proptest! {
            #[test]
            fn s2_doubling(n in 0u64..(1 << 40)) {
                prop_assert_eq!(s2(2 * n), s2(n));
                prop_assert_eq!(s2(2 * n + 1), s2(n) + 1);
            }

            #[test]
            fn pascal_rule(n in 1u64..200, k in 1u64..200) {
                prop_assert_eq!(binom(n, k), binom(n - 1, k - 1) + binom(n - 1, k));
            }
        }
    }
}

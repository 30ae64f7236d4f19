//! Base-2 identities tying the coefficient rows to binary digit sums and to
//! sums over the box `[0, 1] x [0, 3] x .. x [0, 2^N - 1]`.
//!
//! Test functions are passed as value tables rather than closures so every
//! comparison is an exact rational equality.

use num_traits::Zero;

use super::{binary_row_allow_empty, expand_coeffs, row_len, total_count, DEFAULT_ENUMERATION_BUDGET};
use crate::exactnum::{binom, s2, Integer, Rational};
use crate::{Error, Result};

/// Values of an integer-indexed function on the window `start .. start + len`.
#[derive(Clone, Debug, PartialEq)]
pub struct ValueTable {
    start: i64,
    values: Vec<Rational>,
}

impl ValueTable {
    pub fn new(start: i64, values: Vec<Rational>) -> Self {
        ValueTable { start, values }
    }

    /// Tabulates `f` on `start .. start + len`.
    pub fn from_fn(start: i64, len: usize, f: impl Fn(i64) -> Rational) -> Self {
        let values = (0..len as i64).map(|i| f(start + i)).collect();
        ValueTable { start, values }
    }

    pub fn start(&self) -> i64 {
        self.start
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn get(&self, index: i64) -> Result<&Rational> {
        let offset = index - self.start;
        if offset < 0 {
            return Err(Error::DomainCoverage { index });
        }
        self.values
            .get(offset as usize)
            .ok_or(Error::DomainCoverage { index })
    }

    fn require(&self, lo: i64, hi: i64) -> Result<()> {
        self.get(lo)?;
        self.get(hi)?;
        Ok(())
    }
}

/// Both sides of an identity, evaluated exactly.
#[derive(Clone, Debug, PartialEq)]
pub struct IdentityCheck {
    pub lhs: Rational,
    pub rhs: Rational,
}

impl IdentityCheck {
    pub fn holds(&self) -> bool {
        self.lhs == self.rhs
    }
}

/// `alpha_j^(N) = sum_{n=0}^{min(j, 2^{N+1}-1)} C(j - n + N, N) (-1)^{s2(n)}`.
///
/// Valid for every `j >= 0`; past the last index of the row it returns 0.
pub fn coeff_via_s2(j: u64, order: u32) -> Integer {
    let upper = j.min((1u64 << (order + 1)) - 1);
    let mut acc = Integer::zero();
    for n in 0..=upper {
        let c = binom(j - n + order as u64, order as u64);
        if s2(n).is_multiple_of(2) {
            acc += c;
        } else {
            acc -= c;
        }
    }
    acc
}

/// `sum_k C(N, k) (-1)^k alpha_{n-k}^(N-1)`, which should equal `(-1)^{s2(n)}`.
pub fn invert_s2_check(n: u64, order: u32) -> Result<Integer> {
    if order == 0 {
        return Err(Error::invalid("invert_s2_check needs N >= 1"));
    }
    if n > (1u64 << order) - 1 {
        return Err(Error::invalid(format!(
            "n = {n} outside 0..=2^{order}-1"
        )));
    }
    let prev = binary_row_allow_empty(order - 1)?;
    let mut acc = Integer::zero();
    for k in 0..=n.min(order as u64) {
        let Some(alpha) = prev.get((n - k) as usize) else {
            continue;
        };
        let term = binom(order as u64, k) * alpha;
        if k % 2 == 0 {
            acc += term;
        } else {
            acc -= term;
        }
    }
    Ok(acc)
}

/// Compares the box sum `sum_{k_1..k_N} g(x + k_1 + .. + k_N)` against the
/// single sum `sum_k alpha_k^(N) g(x + k)`.
///
/// The box is walked tuple by tuple, so `N` is capped by the enumeration
/// budget (`N <= 6`).
pub fn appendix_tn_check(order: u32, g: &ValueTable, x: i64) -> Result<IdentityCheck> {
    if order == 0 {
        return Err(Error::invalid("T_N needs N >= 1"));
    }
    let degree = row_len(2, order).ok_or_else(|| Error::invalid("order too large"))? as i64 - 1;
    g.require(x, x + degree)?;

    let tuples = total_count(2, order);
    if tuples > Integer::from(DEFAULT_ENUMERATION_BUDGET) {
        return Err(Error::BudgetExceeded {
            base: 2,
            order,
            needed: u128::try_from(&tuples).unwrap_or(u128::MAX),
            budget: DEFAULT_ENUMERATION_BUDGET,
        });
    }

    let mut lhs = Rational::zero();
    let limits: Vec<u64> = (1..=order).map(|j| (1u64 << j) - 1).collect();
    let mut digits = vec![0u64; order as usize];
    let mut sum = 0i64;
    lhs += g.get(x)?;
    'outer: loop {
        let mut i = 0;
        loop {
            if i == digits.len() {
                break 'outer;
            }
            if digits[i] < limits[i] {
                digits[i] += 1;
                sum += 1;
                break;
            }
            sum -= digits[i] as i64;
            digits[i] = 0;
            i += 1;
        }
        lhs += g.get(x + sum)?;
    }

    let alpha = expand_coeffs(2, order)?;
    let mut rhs = Rational::zero();
    for (k, a) in alpha.row().iter().enumerate() {
        rhs += g.get(x + k as i64)? * a;
    }
    Ok(IdentityCheck { lhs, rhs })
}

/// `sum_{n<2^N} (-1)^{s2(n)} f(x+n)` against
/// `(-1)^N sum_k alpha_k^(N-1) Delta^N f(x+k)` with `Delta f(y) = f(y+1) - f(y)`.
pub fn finite_difference_check(order: u32, f: &ValueTable, x: i64) -> Result<IdentityCheck> {
    if order == 0 || order > 24 {
        return Err(Error::invalid(format!("order N = {order} outside 1..=24")));
    }
    let span = 1i64 << order;
    f.require(x, x + span - 1)?;

    let mut lhs = Rational::zero();
    for n in 0..span {
        let v = f.get(x + n)?;
        if s2(n as u64).is_multiple_of(2) {
            lhs += v;
        } else {
            lhs -= v;
        }
    }

    let weights: Vec<Integer> = (0..=order as u64).map(|i| binom(order as u64, i)).collect();
    let delta_n = |y: i64| -> Result<Rational> {
        let mut d = Rational::zero();
        for (i, w) in weights.iter().enumerate() {
            let term = f.get(y + i as i64)? * w;
            if (order as usize - i).is_multiple_of(2) {
                d += term;
            } else {
                d -= term;
            }
        }
        Ok(d)
    };
    let prev = binary_row_allow_empty(order - 1)?;
    let mut rhs = Rational::zero();
    for (k, a) in prev.iter().enumerate() {
        rhs += delta_n(x + k as i64)? * a;
    }
    if order % 2 == 1 {
        rhs = -rhs;
    }
    Ok(IdentityCheck { lhs, rhs })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exactnum::{int_pow, rat, rat_int};

    #[test]
    fn s2_formula_examples() {
        for order in 0..6 {
            assert_eq!(coeff_via_s2(0, order), Integer::from(1));
        }
        assert_eq!(coeff_via_s2(4, 2), Integer::from(1));
        assert_eq!(coeff_via_s2(5, 3), Integer::from(8));
    }

    #[test]
    fn s2_formula_matches_rows_and_vanishes_past_them() {
        for order in 1..=6u32 {
            let row = expand_coeffs(2, order).unwrap();
            for (j, a) in row.row().iter().enumerate() {
                assert_eq!(&coeff_via_s2(j as u64, order), a, "j={j} N={order}");
            }
            let past = row.len() as u64;
            for j in past..past + 40 {
                assert!(coeff_via_s2(j, order).is_zero(), "j={j} N={order}");
            }
        }
    }

    #[test]
    fn inverse_relation() {
        assert_eq!(invert_s2_check(0, 4).unwrap(), Integer::from(1));
        assert_eq!(invert_s2_check(3, 2).unwrap(), Integer::from(1));
        assert_eq!(invert_s2_check(1, 3).unwrap(), Integer::from(-1));
        for order in 1..=6u32 {
            for n in 0..(1u64 << order) {
                let sign = if s2(n).is_multiple_of(2) { 1 } else { -1 };
                assert_eq!(invert_s2_check(n, order).unwrap(), Integer::from(sign));
            }
        }
        assert!(invert_s2_check(4, 2).is_err());
        assert!(invert_s2_check(0, 0).is_err());
    }

    #[test]
    fn tn_examples() {
        let id = ValueTable::from_fn(0, 64, |y| rat(y, 1));
        let c = appendix_tn_check(1, &id, 0).unwrap();
        assert_eq!(c.lhs, rat(1, 1));
        assert!(c.holds());

        let ones = ValueTable::from_fn(-10, 64, |_| rat(1, 1));
        let c = appendix_tn_check(2, &ones, -7).unwrap();
        assert_eq!(c.lhs, rat(8, 1));
        assert!(c.holds());

        let sq = ValueTable::from_fn(0, 64, |y| rat(y * y, 1));
        assert!(appendix_tn_check(3, &sq, 0).unwrap().holds());
    }

    #[test]
    fn tn_needs_coverage() {
        let short = ValueTable::from_fn(0, 5, |y| rat(y, 1));
        assert!(matches!(
            appendix_tn_check(3, &short, 0),
            Err(Error::DomainCoverage { .. })
        ));
    }

    #[test]
    fn finite_difference_examples() {
        // degree < N is annihilated on both sides
        let cubic = ValueTable::from_fn(0, 64, |y| rat(y * y * y - 2 * y + 5, 1));
        let c = finite_difference_check(4, &cubic, 3).unwrap();
        assert!(c.lhs.is_zero() && c.rhs.is_zero());

        let sq = ValueTable::from_fn(0, 16, |y| rat(y * y, 1));
        assert!(finite_difference_check(2, &sq, 0).unwrap().holds());

        let exp = ValueTable::from_fn(0, 16, |y| rat_int(int_pow(2, y as u64)));
        let c = finite_difference_check(3, &exp, 0).unwrap();
        assert!(c.holds());
        assert!(!c.lhs.is_zero());
    }

    #[test]
    fn finite_difference_detects_coverage_gap() {
        let short = ValueTable::from_fn(2, 4, |y| rat(y, 1));
        assert!(finite_difference_check(3, &short, 0).is_err());
    }
}

//! Coefficient rows `alpha_k^(N)(a)` of `prod_{j=1}^{N} (x^{a^j} - 1)/(x - 1)`.
//!
//! Each factor is an all-ones block of width `a^j`, so multiplying by it is a
//! sliding-window sum: one pass over the output, no general convolution.
//! Factors are applied from the narrowest block to the widest.

mod appendix;
mod bfile;
mod cache;

use std::ops::{AddAssign, SubAssign};

use num_traits::{One, Zero};

use crate::exactnum::{int_pow, Integer};
use crate::{Error, Result};

pub use appendix::{
    appendix_tn_check, coeff_via_s2, finite_difference_check, invert_s2_check, IdentityCheck,
    ValueTable,
};
pub use bfile::{
    encode_bfile, oeis_crosscheck, oeis_crosscheck_with_layout, parse_bfile, read_bfile, BFile,
    CrosscheckReport, RowLayout, RowReport, RowStatus,
};
pub use cache::{cache_path, decode_cache, encode_cache, read_cache, write_cache};

/// Longest row [`expand_coeffs`] will build (`a=2, N=27` is already ~2.7e8).
pub const DEFAULT_MEMORY_BUDGET: u128 = 1 << 28;

/// Most tuples [`brute_force_coeffs`] will enumerate.
pub const DEFAULT_ENUMERATION_BUDGET: u128 = 1 << 24;

/// One full coefficient row for a fixed `(a, N)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CoeffTable {
    base: u64,
    order: u32,
    row: Vec<Integer>,
    total: Integer,
}

impl CoeffTable {
    pub(crate) fn from_parts(base: u64, order: u32, row: Vec<Integer>) -> Self {
        CoeffTable {
            base,
            order,
            row,
            total: total_count(base, order),
        }
    }

    pub fn base(&self) -> u64 {
        self.base
    }

    pub fn order(&self) -> u32 {
        self.order
    }

    pub fn row(&self) -> &[Integer] {
        &self.row
    }

    pub fn into_row(self) -> Vec<Integer> {
        self.row
    }

    /// `a^{N(N+1)/2}`, the number of tuples and the sum of the row.
    pub fn total(&self) -> &Integer {
        &self.total
    }

    pub fn len(&self) -> usize {
        self.row.len()
    }

    pub fn is_empty(&self) -> bool {
        self.row.is_empty()
    }

    /// Largest index `K = a(a^N - 1)/(a - 1) - N`.
    pub fn degree(&self) -> usize {
        self.row.len() - 1
    }

    pub fn get(&self, k: usize) -> Option<&Integer> {
        self.row.get(k)
    }

    pub fn is_palindromic(&self) -> bool {
        self.row.iter().eq(self.row.iter().rev())
    }

    /// Checks endpoint, positivity, palindrome and total-sum invariants.
    pub fn check_invariants(&self) -> std::result::Result<(), String> {
        let expected = row_len(self.base, self.order)
            .ok_or_else(|| "row length overflows".to_string())?;
        if self.row.len() as u128 != expected {
            return Err(format!("length {} != {expected}", self.row.len()));
        }
        if !self.row[0].is_one() || !self.row[self.row.len() - 1].is_one() {
            return Err("endpoints are not 1".into());
        }
        if let Some(k) = self.row.iter().position(|c| c <= &Integer::zero()) {
            return Err(format!("entry {k} is not positive"));
        }
        if !self.is_palindromic() {
            return Err("row is not palindromic".into());
        }
        let sum: Integer = self.row.iter().sum();
        if sum != self.total {
            return Err(format!("row sums to {sum}, expected {}", self.total));
        }
        Ok(())
    }
}

/// `a(a^N - 1)/(a - 1) - N + 1`, or `None` if it does not fit in `u128`.
pub fn row_len(a: u64, n: u32) -> Option<u128> {
    let a = a as u128;
    // a + a^2 + .. + a^N
    let mut power: u128 = 1;
    let mut sum: u128 = 0;
    for _ in 0..n {
        power = power.checked_mul(a)?;
        sum = sum.checked_add(power)?;
    }
    Some(sum - n as u128 + 1)
}

/// `a^{N(N+1)/2}`.
pub fn total_count(a: u64, n: u32) -> Integer {
    let n = n as u64;
    int_pow(a, n * (n + 1) / 2)
}

fn validate(a: u64, n: u32) -> Result<()> {
    if a < 2 {
        return Err(Error::invalid(format!("base a = {a} must be >= 2")));
    }
    if n < 1 {
        return Err(Error::invalid(format!("order N = {n} must be >= 1")));
    }
    Ok(())
}

fn checked_len(a: u64, n: u32, budget: u128) -> Result<usize> {
    let needed = row_len(a, n).unwrap_or(u128::MAX);
    if needed > budget || needed > usize::MAX as u128 {
        return Err(Error::BudgetExceeded {
            base: a,
            order: n,
            needed,
            budget,
        });
    }
    Ok(needed as usize)
}

trait Accumulator: Clone + Zero + One + for<'a> AddAssign<&'a Self> + for<'a> SubAssign<&'a Self> {}
impl<T> Accumulator for T where
    T: Clone + Zero + One + for<'a> AddAssign<&'a T> + for<'a> SubAssign<&'a T>
{
}

/// `p(x) * (1 + x + .. + x^{width-1})` by a running window sum.
fn times_block<T: Accumulator>(p: &[T], width: usize) -> Vec<T> {
    let out_len = p.len() + width - 1;
    let mut out = Vec::with_capacity(out_len);
    let mut acc = T::zero();
    for k in 0..out_len {
        if let Some(v) = p.get(k) {
            acc += v;
        }
        if k >= width {
            acc -= &p[k - width];
        }
        out.push(acc.clone());
    }
    out
}

fn expand_blocks<T: Accumulator>(a: u64, n: u32, len: usize) -> Vec<T> {
    let mut row = Vec::with_capacity(len);
    row.push(T::one());
    let mut width = 1usize;
    for _ in 0..n {
        width *= a as usize;
        row = times_block(&row, width);
    }
    debug_assert_eq!(row.len(), len);
    row
}

/// Exact coefficient row for `(a, N)` under [`DEFAULT_MEMORY_BUDGET`].
pub fn expand_coeffs(a: u64, n: u32) -> Result<CoeffTable> {
    expand_coeffs_with_budget(a, n, DEFAULT_MEMORY_BUDGET)
}

/// [`expand_coeffs`] with an explicit cap on the row length.
pub fn expand_coeffs_with_budget(a: u64, n: u32, budget: u128) -> Result<CoeffTable> {
    validate(a, n)?;
    let len = checked_len(a, n, budget)?;
    let total = total_count(a, n);
    // Every partial window sum is bounded by the final total.
    let row: Vec<Integer> = if total.bits() <= 127 {
        expand_blocks::<u128>(a, n, len)
            .into_iter()
            .map(Integer::from)
            .collect()
    } else {
        expand_blocks::<Integer>(a, n, len)
    };
    let table = CoeffTable {
        base: a,
        order: n,
        row,
        total,
    };
    #[cfg(debug_assertions)]
    if a == 2 && n <= 12 {
        debug_assert_eq!(
            expand_binary_product_form(n).expect("small binary row").row,
            table.row
        );
    }
    Ok(table)
}

/// Base-2 row from the other product form, `prod_{i=0}^{N-1} (1 + x^{2^i})^{N-i}`.
pub fn expand_binary_product_form(n: u32) -> Result<CoeffTable> {
    validate(2, n)?;
    let len = checked_len(2, n, DEFAULT_MEMORY_BUDGET)?;
    let mut row: Vec<Integer> = Vec::with_capacity(len);
    row.push(Integer::one());
    for i in 0..n {
        let shift = 1usize << i;
        for _ in 0..(n - i) {
            // multiply by (1 + x^shift), high to low in place
            let old_len = row.len();
            row.resize(old_len + shift, Integer::zero());
            for k in (shift..old_len + shift).rev() {
                let (lo, hi) = row.split_at_mut(k);
                hi[0] += &lo[k - shift];
            }
        }
    }
    Ok(CoeffTable::from_parts(2, n, row))
}

/// Count tuples `(k_1, .., k_N)` with `0 <= k_j <= a^j - 1` by their sum.
///
/// This walks every tuple, so it is only usable at desk scale; it is the
/// independent check on [`expand_coeffs`].
pub fn brute_force_coeffs(a: u64, n: u32) -> Result<CoeffTable> {
    brute_force_coeffs_with_budget(a, n, DEFAULT_ENUMERATION_BUDGET)
}

pub fn brute_force_coeffs_with_budget(a: u64, n: u32, budget: u128) -> Result<CoeffTable> {
    validate(a, n)?;
    let tuples = total_count(a, n);
    if tuples > Integer::from(budget) {
        return Err(Error::BudgetExceeded {
            base: a,
            order: n,
            needed: u128::try_from(&tuples).unwrap_or(u128::MAX),
            budget,
        });
    }
    let limits: Vec<u64> = (1..=n).map(|j| a.pow(j) - 1).collect();
    let max_sum: u64 = limits.iter().sum();
    let mut counts = vec![0u64; max_sum as usize + 1];
    let mut digits = vec![0u64; n as usize];
    let mut sum = 0u64;
    counts[0] += 1;
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
            sum -= digits[i];
            digits[i] = 0;
            i += 1;
        }
        counts[sum as usize] += 1;
    }
    Ok(CoeffTable::from_parts(
        a,
        n,
        counts.into_iter().map(Integer::from).collect(),
    ))
}

/// Row for order `n` including the empty product (`n = 0` gives `[1]`).
pub(crate) fn binary_row_allow_empty(n: u32) -> Result<Vec<Integer>> {
    if n == 0 {
        Ok(vec![Integer::one()])
    } else {
        Ok(expand_coeffs(2, n)?.into_row())
    }
}

//! Exact restricted-partition coefficients and the random sums they count.
//!
//! For a base `a >= 2` and order `N >= 1`, the coefficient `alpha_k^(N)(a)`
//! counts tuples `(k_1, .., k_N)` with `0 <= k_j <= a^j - 1` summing to `k`.
//! Normalised by `a^{N(N+1)/2}` they are the law of `Z_N(a) = X_1 + .. + X_N`
//! with independent `X_j` uniform on `{0, .., a^j - 1}`. The standardised
//! sums converge to a bounded, non-Gaussian limit `Z*(a)`.
//!
//! Modules:
//!
//! - [`exactnum`]: big integers/rationals, Bernoulli numbers, binomials, `s2`
//! - [`coeffs`]: coefficient rows, brute-force and `s2` oracles, b-files, cache files
//! - [`distn`]: pmf, closed-form moments, MGF, exact standardised cumulants, CLT diagnostics
//! - [`limitlaw`]: limit cumulants and moments, truncated-sum oracle, density grids
//! - [`montecarlo`]: seeded samplers and goodness-of-fit statistics
//! - [`verify`]: the identity batteries behind `partlim verify`
//! - [`cli`]: the `partlim` command line

pub mod cli;
pub mod coeffs;
pub mod distn;
mod error;
pub mod exactnum;
pub mod limitlaw;
pub mod montecarlo;
pub mod verify;

pub use error::{Error, Result};

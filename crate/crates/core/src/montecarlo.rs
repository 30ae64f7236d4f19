//! Seeded samplers for `Z_N(a)` and truncated `Z*(a)`, plus the statistics
//! used to compare them with the exact laws.
//!
//! Generator: ChaCha20 (`rand_chacha`), keyed by `seed_from_u64(seed)`. Draws
//! are produced in blocks of [`BLOCK`]; summand `j` of block `b` reads its own
//! ChaCha stream, so the output does not depend on thread count or schedule.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use num_traits::ToPrimitive;
use rand_chacha::ChaCha20Rng;
use rand_core::{RngCore, SeedableRng};
use rayon::prelude::*;
use serde::Serialize;
use statrs::distribution::{ChiSquared, ContinuousCDF};

use crate::coeffs::{expand_coeffs_with_budget, DEFAULT_MEMORY_BUDGET};
use crate::distn::mean_variance;
use crate::exactnum::{to_f64, Integer};
use crate::limitlaw::{half_width, DensityGrid, GridVariable};
use crate::{Error, Result};

/// Draws per block.
pub const BLOCK: usize = 1 << 16;
const MAX_VARS: u64 = 1 << 20;
const MAX_COUNT: usize = 1 << 34;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Model {
    ZnDirect,
    ZnBernoulli,
    ZstarTruncated,
}

impl Model {
    fn domain(self) -> u64 {
        match self {
            Model::ZnDirect => 0,
            Model::ZnBernoulli => 1,
            Model::ZstarTruncated => 2,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum Values {
    Integers(Vec<u64>),
    Reals(Vec<f64>),
}

#[derive(Clone, Debug, PartialEq)]
pub struct SampleBatch {
    pub model: Model,
    pub base: u64,
    /// `N` for the `Z_N` models, truncation depth `K` for `Z*`.
    pub depth: u32,
    pub seed: u64,
    pub values: Values,
}

#[derive(Serialize)]
struct BatchSidecar {
    model: Model,
    a: u64,
    #[serde(skip_serializing_if = "Option::is_none", rename = "N")]
    n: Option<u32>,
    #[serde(skip_serializing_if = "Option::is_none", rename = "K")]
    k: Option<u32>,
    seed: u64,
    count: usize,
    generator: &'static str,
}

impl SampleBatch {
    pub fn len(&self) -> usize {
        match &self.values {
            Values::Integers(v) => v.len(),
            Values::Reals(v) => v.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn as_f64(&self) -> Vec<f64> {
        match &self.values {
            Values::Integers(v) => v.iter().map(|&x| x as f64).collect(),
            Values::Reals(v) => v.clone(),
        }
    }

    pub fn integers(&self) -> Option<&[u64]> {
        match &self.values {
            Values::Integers(v) => Some(v),
            Values::Reals(_) => None,
        }
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::with_capacity(self.len() * 12 + 8);
        out.push_str("value\n");
        match &self.values {
            Values::Integers(v) => v.iter().for_each(|x| {
                let _ = writeln!(out, "{x}");
            }),
            Values::Reals(v) => v.iter().for_each(|x| {
                let _ = writeln!(out, "{x}");
            }),
        }
        out
    }

    pub fn sidecar_json(&self) -> String {
        let zn = self.model != Model::ZstarTruncated;
        let s = BatchSidecar {
            model: self.model,
            a: self.base,
            n: zn.then_some(self.depth),
            k: (!zn).then_some(self.depth),
            seed: self.seed,
            count: self.len(),
            generator: "chacha20",
        };
        serde_json::to_string_pretty(&s).expect("plain struct")
    }

    /// Writes `<stem>.csv` and `<stem>.json`.
    pub fn export(&self, stem: impl AsRef<Path>) -> Result<(PathBuf, PathBuf)> {
        let stem = stem.as_ref();
        if let Some(dir) = stem.parent().filter(|d| !d.as_os_str().is_empty()) {
            std::fs::create_dir_all(dir)?;
        }
        let csv = stem.with_extension("csv");
        let json = stem.with_extension("json");
        std::fs::write(&csv, self.to_csv())?;
        std::fs::write(&json, self.sidecar_json() + "\n")?;
        Ok((csv, json))
    }
}

fn stream_rng(seed: u64, model: Model, block: usize, var: u64) -> ChaCha20Rng {
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    rng.set_stream(model.domain() << 56 | (block as u64) << 20 | var);
    rng
}

/// Unbiased draw from `{0, .., m - 1}` by rejection.
fn uniform_below(rng: &mut ChaCha20Rng, m: u64) -> u64 {
    debug_assert!(m >= 1);
    if m.is_power_of_two() {
        return rng.next_u64() & (m - 1);
    }
    let zone = (1u128 << 64) / m as u128 * m as u128;
    loop {
        let r = rng.next_u64();
        if (r as u128) < zone {
            return r % m;
        }
    }
}

struct BitReservoir {
    rng: ChaCha20Rng,
    word: u64,
    left: u32,
}

impl BitReservoir {
    fn next_bit(&mut self) -> u64 {
        if self.left == 0 {
            self.word = self.rng.next_u64();
            self.left = 64;
        }
        let bit = self.word & 1;
        self.word >>= 1;
        self.left -= 1;
        bit
    }
}

fn check_count(count: usize) -> Result<()> {
    if count == 0 || count > MAX_COUNT {
        return Err(Error::invalid(format!("count = {count} must be in 1..={MAX_COUNT}")));
    }
    Ok(())
}

fn blocks(count: usize) -> impl IndexedParallelIterator<Item = (usize, usize)> {
    let n_blocks = count.div_ceil(BLOCK);
    (0..n_blocks)
        .into_par_iter()
        .map(move |b| (b, BLOCK.min(count - b * BLOCK)))
}

/// Largest value of `Z_N(a)`, when it fits in a `u64`.
fn zn_max(a: u64, n: u32) -> Option<u64> {
    let mut m: u128 = 1;
    let mut total: u128 = 0;
    for _ in 0..n {
        m = m.checked_mul(a as u128)?;
        total = total.checked_add(m - 1)?;
    }
    u64::try_from(total).ok()
}

fn check_zn(a: u64, n: u32) -> Result<()> {
    if a < 2 || n < 1 {
        return Err(Error::invalid(format!("need a >= 2 and N >= 1 (got a={a}, N={n})")));
    }
    if n as u64 >= MAX_VARS || zn_max(a, n).is_none() {
        return Err(Error::invalid(format!("Z_N({a}) with N={n} overflows 64-bit values")));
    }
    Ok(())
}

/// `X_1 + .. + X_N`, `X_j` uniform on `{0, .., a^j - 1}`.
pub fn sample_zn_direct(a: u64, n: u32, count: usize, seed: u64) -> Result<SampleBatch> {
    check_zn(a, n)?;
    check_count(count)?;
    let values: Vec<u64> = blocks(count)
        .flat_map_iter(|(b, len)| {
            let mut acc = vec![0u64; len];
            let mut m = 1u64;
            for j in 1..=n as u64 {
                m *= a;
                let mut rng = stream_rng(seed, Model::ZnDirect, b, j);
                for slot in acc.iter_mut() {
                    *slot += uniform_below(&mut rng, m);
                }
            }
            acc
        })
        .collect();
    Ok(SampleBatch {
        model: Model::ZnDirect,
        base: a,
        depth: n,
        seed,
        values: Values::Integers(values),
    })
}

/// Base 2 only: `X_{j+1} = sum_{i<=j} 2^i V_i^(j)` with fair bits `V_i^(j)`.
pub fn sample_zn_bernoulli(a: u64, n: u32, count: usize, seed: u64) -> Result<SampleBatch> {
    if a != 2 {
        return Err(Error::invalid(format!(
            "the Bernoulli representation is base 2 only (got a = {a})"
        )));
    }
    check_zn(a, n)?;
    check_count(count)?;
    let values: Vec<u64> = blocks(count)
        .flat_map_iter(|(b, len)| {
            let mut acc = vec![0u64; len];
            for j in 0..n as u64 {
                let mut bits = BitReservoir {
                    rng: stream_rng(seed, Model::ZnBernoulli, b, j),
                    word: 0,
                    left: 0,
                };
                for slot in acc.iter_mut() {
                    for i in 0..=j {
                        *slot += bits.next_bit() << i;
                    }
                }
            }
            acc
        })
        .collect();
    Ok(SampleBatch {
        model: Model::ZnBernoulli,
        base: 2,
        depth: n,
        seed,
        values: Values::Integers(values),
    })
}

/// `sum_{k<=K} U_k / a^k`, `U_k` uniform on `[-b_a, b_a]` from 53-bit floats.
pub fn sample_zstar(a: u64, k: u32, count: usize, seed: u64) -> Result<SampleBatch> {
    if a < 2 {
        return Err(Error::invalid(format!("base a = {a} must be >= 2")));
    }
    if k < 1 || k as u64 >= MAX_VARS {
        return Err(Error::invalid(format!("depth K = {k} must be in 1..{MAX_VARS}")));
    }
    check_count(count)?;
    let b = half_width(a);
    let af = a as f64;
    let values: Vec<f64> = blocks(count)
        .flat_map_iter(|(blk, len)| {
            let mut acc = vec![0.0f64; len];
            // Horner from the deepest summand: S <- (S + U_k) / a
            for var in (1..=k as u64).rev() {
                let mut rng = stream_rng(seed, Model::ZstarTruncated, blk, var);
                for slot in acc.iter_mut() {
                    let unit = (rng.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64);
                    let u = -b + 2.0 * b * unit;
                    *slot = (*slot + u) / af;
                }
            }
            acc
        })
        .collect();
    Ok(SampleBatch {
        model: Model::ZstarTruncated,
        base: a,
        depth: k,
        seed,
        values: Values::Reals(values),
    })
}

/// An estimate against its exact value, in standard errors.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct MomentCheck {
    pub estimate: f64,
    pub expected: f64,
    pub se: f64,
}

impl MomentCheck {
    pub fn z_score(&self) -> f64 {
        (self.estimate - self.expected) / self.se
    }

    pub fn within(&self, k_se: f64) -> bool {
        self.z_score().abs() <= k_se
    }
}

fn mean_and_var(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    let var = xs.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / (n - 1.0);
    (mean, var)
}

/// Sample mean and sample variance of a `Z_N` batch against the closed forms.
///
/// The variance SE uses the exact fourth cumulant
/// `kappa_4 = -sum_j (a^{4j} - 1) / 120`.
pub fn zn_moment_checks(batch: &SampleBatch) -> Result<(MomentCheck, MomentCheck)> {
    if batch.model == Model::ZstarTruncated {
        return Err(Error::invalid("zn_moment_checks needs a Z_N batch"));
    }
    let (mu, var) = mean_variance(batch.base, batch.depth)?;
    let (mu, var) = (to_f64(&mu), to_f64(&var));
    let mut kappa4 = Integer::from(0);
    let mut m = Integer::from(1);
    for _ in 0..batch.depth {
        m *= batch.base;
        let m2 = &m * &m;
        kappa4 -= &m2 * &m2 - 1u32;
    }
    let kappa4 = kappa4.to_f64().unwrap_or(f64::NEG_INFINITY) / 120.0;
    let xs = batch.as_f64();
    let n = xs.len() as f64;
    let (mean, svar) = mean_and_var(&xs);
    Ok((
        MomentCheck {
            estimate: mean,
            expected: mu,
            se: (var / n).sqrt(),
        },
        MomentCheck {
            estimate: svar,
            expected: var,
            se: ((kappa4 + 2.0 * var * var) / n).sqrt(),
        },
    ))
}

/// Raw sample moment `mean(x^k)` with SE `sqrt((m_{2k} - m_k^2) / n)`.
pub fn raw_moment_check(xs: &[f64], k: i32, expected: f64, expected_2k: f64) -> MomentCheck {
    let n = xs.len() as f64;
    let estimate = xs.iter().map(|x| x.powi(k)).sum::<f64>() / n;
    MomentCheck {
        estimate,
        expected,
        se: ((expected_2k - expected * expected) / n).sqrt(),
    }
}

/// Counts of each value `0 .. len` in an integer batch.
pub fn histogram(batch: &SampleBatch, len: usize) -> Result<Vec<u64>> {
    let v = batch
        .integers()
        .ok_or_else(|| Error::invalid("histogram needs an integer batch"))?;
    let mut counts = vec![0u64; len];
    for &x in v {
        let slot = counts
            .get_mut(x as usize)
            .ok_or_else(|| Error::invalid(format!("value {x} outside 0..{len}")))?;
        *slot += 1;
    }
    Ok(counts)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ChiSquareTest {
    pub statistic: f64,
    pub dof: usize,
    pub p_value: f64,
}

fn chi_square_p(statistic: f64, dof: usize) -> Result<f64> {
    let dist = ChiSquared::new(dof as f64)
        .map_err(|e| Error::invalid(format!("chi-square with {dof} dof: {e}")))?;
    Ok(dist.sf(statistic))
}

/// Pearson goodness of fit. Adjacent bins are pooled until each pooled bin
/// expects at least 5 observations.
pub fn chi_square_gof(counts: &[u64], probs: &[f64]) -> Result<ChiSquareTest> {
    if counts.len() != probs.len() || counts.is_empty() {
        return Err(Error::invalid("counts and probabilities must align"));
    }
    let n: u64 = counts.iter().sum();
    let nf = n as f64;
    let mut pooled: Vec<(f64, f64)> = Vec::new();
    let (mut obs, mut exp) = (0.0, 0.0);
    for (&c, &p) in counts.iter().zip(probs) {
        obs += c as f64;
        exp += p * nf;
        if exp >= 5.0 {
            pooled.push((obs, exp));
            obs = 0.0;
            exp = 0.0;
        }
    }
    if exp > 0.0 || obs > 0.0 {
        match pooled.last_mut() {
            Some(last) => {
                last.0 += obs;
                last.1 += exp;
            }
            None => pooled.push((obs, exp)),
        }
    }
    if pooled.len() < 2 {
        return Err(Error::invalid("too few observations for a chi-square test"));
    }
    let statistic = pooled.iter().map(|(o, e)| (o - e) * (o - e) / e).sum();
    let dof = pooled.len() - 1;
    Ok(ChiSquareTest {
        statistic,
        dof,
        p_value: chi_square_p(statistic, dof)?,
    })
}

/// Two-sample chi-square homogeneity test over the bins either sample hits.
pub fn chi_square_two_sample(c1: &[u64], c2: &[u64]) -> Result<ChiSquareTest> {
    let len = c1.len().max(c2.len());
    let at = |c: &[u64], i: usize| c.get(i).copied().unwrap_or(0) as f64;
    let (n1, n2) = (
        c1.iter().sum::<u64>() as f64,
        c2.iter().sum::<u64>() as f64,
    );
    if n1 == 0.0 || n2 == 0.0 {
        return Err(Error::invalid("both samples must be nonempty"));
    }
    let total = n1 + n2;
    let mut statistic = 0.0;
    let mut bins = 0;
    for i in 0..len {
        let (o1, o2) = (at(c1, i), at(c2, i));
        let col = o1 + o2;
        if col == 0.0 {
            continue;
        }
        bins += 1;
        let (e1, e2) = (col * n1 / total, col * n2 / total);
        statistic += (o1 - e1).powi(2) / e1 + (o2 - e2).powi(2) / e2;
    }
    if bins < 2 {
        return Err(Error::invalid("need at least two occupied bins"));
    }
    Ok(ChiSquareTest {
        statistic,
        dof: bins - 1,
        p_value: chi_square_p(statistic, bins - 1)?,
    })
}

/// `sup_x |F_n(x) - G(x)|` for a sample against a continuous CDF; ties are
/// grouped so discrete samples are handled exactly.
pub fn empirical_ks(xs: &[f64], cdf: impl Fn(f64) -> f64) -> f64 {
    let mut v = xs.to_vec();
    v.sort_by(f64::total_cmp);
    let n = v.len() as f64;
    let mut d = 0.0f64;
    let mut i = 0;
    while i < v.len() {
        let mut j = i;
        while j < v.len() && v[j] == v[i] {
            j += 1;
        }
        let g = cdf(v[i]);
        d = d.max((i as f64 / n - g).abs()).max((j as f64 / n - g).abs());
        i = j;
    }
    d
}

/// Exact Kolmogorov distance between the standardised step CDF of `Z_N(a)`
/// and the CDF of a `Z*(a)` grid.
pub fn exact_ks(a: u64, n: u32, grid: &DensityGrid) -> Result<f64> {
    if grid.variable != GridVariable::Limit || grid.base != a {
        return Err(Error::invalid(format!("exact_ks needs a Z* grid for a = {a}")));
    }
    let table = expand_coeffs_with_budget(a, n, DEFAULT_MEMORY_BUDGET)?;
    let (mu, var) = mean_variance(a, n)?;
    let (mu, sigma) = (to_f64(&mu), to_f64(&var).sqrt());
    let total = table.total().clone();
    let mut cum = Integer::from(0);
    let mut d = 0.0f64;
    for (k, c) in table.row().iter().enumerate() {
        let before = to_f64(&crate::exactnum::Rational::new(cum.clone(), total.clone()));
        cum += c;
        let after = to_f64(&crate::exactnum::Rational::new(cum.clone(), total.clone()));
        let g = grid.cdf_at((k as f64 - mu) / sigma);
        d = d.max((before - g).abs()).max((after - g).abs());
    }
    Ok(d)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct KsRow {
    pub n: u32,
    /// `None` when the coefficient row is over budget.
    pub exact: Option<f64>,
    /// Sample-based distance, when an overlay was requested.
    pub sampled: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct KsReport {
    pub a: u64,
    pub grid_m: usize,
    pub iters: u32,
    pub truncation_bound: f64,
    pub rows: Vec<KsRow>,
}

impl KsReport {
    fn distances(&self) -> Vec<f64> {
        self.rows
            .iter()
            .filter_map(|r| r.exact.or(r.sampled))
            .collect()
    }

    pub fn strictly_decreasing(&self) -> bool {
        self.distances().windows(2).all(|w| w[1] < w[0])
    }

    /// `last / first` along the reported sequence.
    pub fn contraction(&self) -> Option<f64> {
        let d = self.distances();
        Some(d.last()? / d.first()?)
    }
}

/// Kolmogorov distances of standardised `Z_N(a)` to the limit grid, for each
/// `N` in `orders`. With `overlay = Some((count, seed))` each row also gets a
/// sample-based distance; rows over the coefficient budget then fall back
/// to it.
pub fn ks_convergence(
    a: u64,
    orders: &[u32],
    grid: &DensityGrid,
    overlay: Option<(usize, u64)>,
) -> Result<KsReport> {
    let mut rows = Vec::with_capacity(orders.len());
    for &n in orders {
        let exact = match exact_ks(a, n, grid) {
            Ok(d) => Some(d),
            Err(Error::BudgetExceeded { .. }) if overlay.is_some() => None,
            Err(e) => return Err(e),
        };
        let sampled = match overlay {
            Some((count, seed)) => {
                let batch = sample_zn_direct(a, n, count, seed)?;
                let (mu, var) = mean_variance(a, n)?;
                let (mu, sigma) = (to_f64(&mu), to_f64(&var).sqrt());
                let z: Vec<f64> = batch.as_f64().iter().map(|x| (x - mu) / sigma).collect();
                Some(empirical_ks(&z, |x| grid.cdf_at(x)))
            }
            None => None,
        };
        rows.push(KsRow { n, exact, sampled });
    }
    Ok(KsReport {
        a,
        grid_m: grid.grid_m,
        iters: grid.iters,
        truncation_bound: grid.truncation_bound,
        rows,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::coeffs::expand_coeffs;
    use crate::distn::pmf;
    use crate::limitlaw::density_grid;

    fn exact_probs(a: u64, n: u32) -> Vec<f64> {
        pmf(&expand_coeffs(a, n).unwrap()).iter().map(to_f64).collect()
    }

    #[test]
    fn single_bit() {
        let b = sample_zn_direct(2, 1, 20_000, 1).unwrap();
        let v = b.integers().unwrap();
        assert!(v.iter().all(|&x| x <= 1));
        let (mean, _) = zn_moment_checks(&b).unwrap();
        assert!(mean.within(4.0));
        let bern = sample_zn_bernoulli(2, 1, 20_000, 1).unwrap();
        assert!(bern.integers().unwrap().iter().all(|&x| x <= 1));
    }

    #[test]
    fn reproducible_and_seed_sensitive() {
        let a = sample_zn_direct(3, 4, 200_000, 42).unwrap();
        assert_eq!(a, sample_zn_direct(3, 4, 200_000, 42).unwrap());
        assert_ne!(a, sample_zn_direct(3, 4, 200_000, 43).unwrap());
        // prefix stability: a shorter batch is a prefix of a longer one
        let short = sample_zn_direct(3, 4, 70_000, 42).unwrap();
        assert_eq!(short.integers().unwrap(), &a.integers().unwrap()[..70_000]);
        let z = sample_zstar(2, 10, 1000, 5).unwrap();
        assert_eq!(z.to_csv(), sample_zstar(2, 10, 1000, 5).unwrap().to_csv());
    }

    #[test]
    fn direct_sampler_matches_pmf() {
        let b = sample_zn_direct(2, 2, 400_000, 11).unwrap();
        let counts = histogram(&b, 5).unwrap();
        let p: [f64; 5] = [0.125, 0.25, 0.25, 0.25, 0.125];
        let n = 400_000.0;
        for (c, p) in counts.iter().zip(p) {
            let sd = (n * p * (1.0 - p)).sqrt();
            assert!((*c as f64 - n * p).abs() < 4.0 * sd);
        }
        let b = sample_zn_direct(2, 5, 200_000, 12).unwrap();
        let (mean, var) = zn_moment_checks(&b).unwrap();
        assert_eq!(mean.expected, 28.5);
        assert!(mean.within(3.0), "{mean:?}");
        assert!(var.within(4.0), "{var:?}");
        let b = sample_zn_direct(5, 3, 200_000, 13).unwrap();
        let t = chi_square_gof(&histogram(&b, 153).unwrap(), &exact_probs(5, 3)).unwrap();
        assert!(t.p_value > 0.001, "{t:?}");
    }

    #[test]
    fn bernoulli_sampler_matches_pmf() {
        let b = sample_zn_bernoulli(2, 3, 300_000, 3).unwrap();
        let t = chi_square_gof(&histogram(&b, 12).unwrap(), &exact_probs(2, 3)).unwrap();
        assert_eq!(t.dof, 11);
        assert!(t.p_value > 0.001, "{t:?}");
        let d = sample_zn_direct(2, 2, 300_000, 4).unwrap();
        let e = sample_zn_bernoulli(2, 2, 300_000, 4).unwrap();
        let t = chi_square_two_sample(&histogram(&d, 5).unwrap(), &histogram(&e, 5).unwrap())
            .unwrap();
        assert!(t.p_value > 0.001, "{t:?}");
        assert!(sample_zn_bernoulli(3, 2, 10, 1).is_err());
    }

    #[test]
    fn chi_square_detects_a_wrong_law() {
        let b = sample_zn_direct(2, 3, 100_000, 9).unwrap();
        let mut wrong = exact_probs(2, 3);
        wrong[0] += 0.01;
        wrong[11] -= 0.01;
        let t = chi_square_gof(&histogram(&b, 12).unwrap(), &wrong).unwrap();
        assert!(t.p_value < 1e-6);
    }

    #[test]
    fn uniform_below_has_no_modulo_bias() {
        let mut rng = stream_rng(0, Model::ZnDirect, 0, 0);
        // m just above 2^63: plain modulo would put 2/3 of the mass in the lower half
        let m = (1u64 << 63) + (1u64 << 62);
        let n = 60_000;
        let low = (0..n).filter(|_| uniform_below(&mut rng, m) < m / 2).count();
        let sd = (n as f64 * 0.25).sqrt();
        assert!((low as f64 - n as f64 / 2.0).abs() < 4.0 * sd);
    }

    #[test]
    fn zstar_support_and_moments() {
        let b = sample_zstar(2, 1, 50_000, 21).unwrap();
        let xs = b.as_f64();
        assert!(xs.iter().all(|x| x.abs() <= 1.5));
        let ks = empirical_ks(&xs, |x| ((x + 1.5) / 3.0).clamp(0.0, 1.0));
        assert!(ks < 1.63 / (50_000f64).sqrt() * 1.5);

        let b = sample_zstar(2, 30, 400_000, 22).unwrap();
        let xs = b.as_f64();
        assert!(xs.iter().all(|x| x.abs() <= 3.0));
        let m4 = raw_moment_check(&xs, 4, 57.0 / 25.0, 398427.0 / 14875.0);
        assert!(m4.within(3.0), "{m4:?}");
        let m2 = raw_moment_check(&xs, 2, 1.0, 57.0 / 25.0);
        assert!(m2.within(4.0), "{m2:?}");
        let m3 = raw_moment_check(&xs, 3, 0.0, 1749.0 / 245.0);
        assert!(m3.within(4.0), "{m3:?}");

        let b = sample_zstar(3, 20, 10_000, 23).unwrap();
        let r = crate::limitlaw::support_radius(3);
        assert!(b.as_f64().iter().all(|x| x.abs() <= r));
    }

    #[test]
    fn ks_sequence_decreases() {
        let grid = density_grid(2, 2048, 30).unwrap();
        let r = ks_convergence(2, &[1, 2, 4, 6, 8], &grid, None).unwrap();
        assert!(r.strictly_decreasing(), "{r:?}");
        let r = ks_convergence(2, &[3], &grid, Some((20_000, 1))).unwrap();
        let row = &r.rows[0];
        assert!((row.sampled.unwrap() - row.exact.unwrap()).abs() < 0.03);
    }

    #[test]
    fn export_formats() {
        let b = sample_zn_direct(2, 3, 4, 7).unwrap();
        let csv = b.to_csv();
        assert!(csv.starts_with("value\n"));
        assert_eq!(csv.lines().count(), 5);
        let v: serde_json::Value = serde_json::from_str(&b.sidecar_json()).unwrap();
        assert_eq!(v["model"], "zn_direct");
        assert_eq!(v["N"], 3);
        assert_eq!(v["seed"], 7);
        assert_eq!(v["count"], 4);
        let z: serde_json::Value =
            serde_json::from_str(&sample_zstar(2, 5, 3, 1).unwrap().sidecar_json()).unwrap();
        assert_eq!(z["K"], 5);
        assert!(z.get("N").is_none());
    }

    #[test]
    fn rejects_bad_parameters() {
        assert!(sample_zn_direct(2, 3, 0, 1).is_err());
        assert!(sample_zn_direct(1, 3, 10, 1).is_err());
        assert!(sample_zn_direct(2, 70, 10, 1).is_err());
        assert!(sample_zstar(2, 0, 10, 1).is_err());
    }
}

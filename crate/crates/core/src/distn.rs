//! Exact distribution of `Z_N(a) = X_1 + .. + X_N`, `X_j` uniform on
//! `{0, .., a^j - 1}`, and of its standardisation
//! `(Z_N(a) - mu_N(a)) / sigma_N(a)`.
//!
//! Everything stays in exact rationals. `sigma_N` itself is irrational, but
//! standardised even cumulants only involve `sigma_N^{2n} = (sigma_N^2)^n`.

use num_traits::{One, Signed, Zero};
use serde::Serialize;

use crate::coeffs::{expand_coeffs, CoeffTable};
use crate::exactnum::{bernoulli_number, binom, int_pow, rat, rat_int, rat_pow, Integer, Rational};
use crate::{Error, Result};

/// Below this `|t|` each MGF factor switches to its power series.
pub const MGF_SERIES_THRESHOLD: f64 = 1e-8;

fn validate(a: u64, n: u32) -> Result<()> {
    if a < 2 {
        return Err(Error::invalid(format!("base a = {a} must be >= 2")));
    }
    if n < 1 {
        return Err(Error::invalid(format!("order N = {n} must be >= 1")));
    }
    Ok(())
}

/// Closed-form moments plus the exact law of `Z_N(a)`.
#[derive(Clone, Debug)]
pub struct DistSummary {
    pub base: u64,
    pub order: u32,
    pub mean: Rational,
    pub variance: Rational,
    /// `c_N^2 = 4^N - 3N/4 - 1 = 9 sigma_N^2`, base 2 only.
    pub c_squared: Option<Rational>,
    table: CoeffTable,
}

impl DistSummary {
    pub fn new(table: CoeffTable) -> Self {
        let (mean, variance) =
            mean_variance(table.base(), table.order()).expect("table has valid parameters");
        let c_squared = (table.base() == 2).then(|| &variance * Integer::from(9));
        DistSummary {
            base: table.base(),
            order: table.order(),
            mean,
            variance,
            c_squared,
            table,
        }
    }

    pub fn compute(a: u64, n: u32) -> Result<Self> {
        Ok(Self::new(expand_coeffs(a, n)?))
    }

    pub fn table(&self) -> &CoeffTable {
        &self.table
    }

    /// `a^{N(N+1)/2}`.
    pub fn normalizer(&self) -> &Integer {
        self.table.total()
    }

    pub fn pmf(&self) -> Vec<Rational> {
        pmf(&self.table)
    }
}

/// Exact `P[Z_N(a) = k]` for every `k` in the support.
pub fn pmf(table: &CoeffTable) -> Vec<Rational> {
    table
        .row()
        .iter()
        .map(|c| Rational::new(c.clone(), table.total().clone()))
        .collect()
}

/// `mu_N(a) = [a(a^N - 1)/(a - 1) - N] / 2` and
/// `sigma_N^2(a) = [a^2 (a^{2N} - 1)/(a^2 - 1) - N] / 12`.
pub fn mean_variance(a: u64, n: u32) -> Result<(Rational, Rational)> {
    validate(a, n)?;
    let big_a = Integer::from(a);
    let n_int = Integer::from(n);
    let geometric = |base: &Integer| -> Integer {
        // base + base^2 + .. + base^N
        base * (num_traits::pow(base.clone(), n as usize) - 1u32) / (base - 1u32)
    };
    let mean = Rational::new(geometric(&big_a) - &n_int, Integer::from(2));
    let variance = Rational::new(geometric(&(&big_a * &big_a)) - &n_int, Integer::from(12));
    Ok((mean, variance))
}

/// Mean and variance of an arbitrary pmf on `0, 1, ..`.
pub fn pmf_mean_variance(p: &[Rational]) -> (Rational, Rational) {
    let mut m1 = Rational::zero();
    let mut m2 = Rational::zero();
    for (k, pk) in p.iter().enumerate() {
        let k = Integer::from(k);
        m1 += pk * &k;
        m2 += pk * (&k * &k);
    }
    let var = &m2 - &m1 * &m1;
    (m1, var)
}

/// Cumulants `kappa_1 ..= kappa_r` from raw moments `m_0 = 1, m_1, .., m_r`.
pub fn cumulants_from_moments(m: &[Rational]) -> Vec<Rational> {
    let r = m.len().saturating_sub(1);
    let mut kappa: Vec<Rational> = vec![Rational::zero(); r + 1];
    for n in 1..=r {
        let mut acc = m[n].clone();
        for k in 1..n {
            if kappa[k].is_zero() || m[n - k].is_zero() {
                continue;
            }
            acc -= &kappa[k] * &m[n - k] * binom((n - 1) as u64, (k - 1) as u64);
        }
        kappa[n] = acc;
    }
    kappa.remove(0);
    kappa
}

/// Raw moments `m_0 = 1, m_1, .., m_r` from cumulants `kappa_1 ..= kappa_r`.
pub fn moments_from_cumulants(kappa: &[Rational]) -> Vec<Rational> {
    let r = kappa.len();
    let mut m = vec![Rational::one()];
    for n in 1..=r {
        let mut acc = Rational::zero();
        for k in 1..=n {
            if kappa[k - 1].is_zero() || m[n - k].is_zero() {
                continue;
            }
            acc += &kappa[k - 1] * &m[n - k] * binom((n - 1) as u64, (k - 1) as u64);
        }
        m.push(acc);
    }
    m
}

/// Cumulants read off the exact pmf, used as an oracle for the closed forms.
#[derive(Clone, Debug)]
pub struct PmfCumulants {
    /// `kappa_1 .. kappa_{2 n_max}` of the centred variable `Z_N - mu_N`.
    pub central: Vec<Rational>,
    /// `kappa_{2n}(Z_N) / sigma_N^{2n}` for `n = 1 ..= n_max`.
    pub standardized_even: Vec<Rational>,
}

pub fn pmf_cumulants(table: &CoeffTable, n_max: usize) -> PmfCumulants {
    let p = pmf(table);
    let (mean, var) = pmf_mean_variance(&p);
    let order = 2 * n_max;
    let mut moments = vec![Rational::zero(); order + 1];
    for (k, pk) in p.iter().enumerate() {
        let d = rat_int(Integer::from(k)) - &mean;
        let mut power = pk.clone();
        for m in moments.iter_mut() {
            *m += &power;
            power *= &d;
        }
    }
    let central = cumulants_from_moments(&moments);
    let standardized_even = (1..=n_max)
        .map(|n| &central[2 * n - 1] / rat_pow(&var, n as u64))
        .collect();
    PmfCumulants {
        central,
        standardized_even,
    }
}

/// Even cumulants `kappa_2, kappa_4, ..`; odd orders are identically zero.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CumulantSeq {
    pub base: u64,
    /// `None` marks the limit law.
    pub order: Option<u32>,
    #[serde(serialize_with = "serialize_rationals")]
    pub even: Vec<Rational>,
}

pub(crate) fn serialize_rationals<S: serde::Serializer>(
    v: &[Rational],
    s: S,
) -> std::result::Result<S::Ok, S::Error> {
    s.collect_seq(v.iter().map(|r| r.to_string()))
}

impl CumulantSeq {
    pub fn n_max(&self) -> usize {
        self.even.len()
    }

    /// `kappa_r` for `1 <= r <= 2 n_max`.
    pub fn kappa(&self, r: usize) -> Option<Rational> {
        if r == 0 || r > 2 * self.even.len() {
            None
        } else if r % 2 == 1 {
            Some(Rational::zero())
        } else {
            Some(self.even[r / 2 - 1].clone())
        }
    }

    /// Cumulants of every order `1 ..= 2 n_max`, odd ones zero.
    pub fn all_orders(&self) -> Vec<Rational> {
        (1..=2 * self.even.len())
            .map(|r| self.kappa(r).expect("in range"))
            .collect()
    }
}

/// `kappa_{2n}(Zhat_N(a)) = (B_{2n}/2n) sum_{j=1}^{N} (a^{2nj} - 1) / sigma_N^{2n}`.
///
/// This general-base form follows from the log-sinh expansion of each
/// factor; for `a = 2` it agrees exactly with [`binary_cumulant_closed_form`].
pub fn standardized_cumulants(a: u64, n: u32, n_max: usize) -> Result<CumulantSeq> {
    validate(a, n)?;
    if n_max < 1 {
        return Err(Error::invalid("n_max must be >= 1"));
    }
    let (_, var) = mean_variance(a, n)?;
    let mut even = Vec::with_capacity(n_max);
    let mut var_pow = Rational::one();
    for order in 1..=n_max as u64 {
        var_pow *= &var;
        let a2n = int_pow(a, 2 * order);
        let mut power = Integer::one();
        let mut sum = Integer::zero();
        for _ in 0..n {
            power *= &a2n;
            sum += &power - 1u32;
        }
        let b = bernoulli_number(2 * order as usize) / Integer::from(2 * order);
        even.push(b * sum / &var_pow);
    }
    Ok(CumulantSeq {
        base: a,
        order: Some(n),
        even,
    })
}

/// Base-2 closed form
/// `9^n/(4^n - 1) * (4^n (4^{nN} - N - 1) + N) / (4^N - 3N/4 - 1)^n * B_{2n}/(2n)`.
pub fn binary_cumulant_closed_form(order: u32, n: u64) -> Rational {
    let four_n = int_pow(4, n);
    let big_n = Integer::from(order);
    let c2 = rat_int(int_pow(4, order as u64)) - rat(3 * order as i64, 4) - Rational::one();
    let numer = &four_n * (int_pow(4, n * order as u64) - &big_n - 1u32) + &big_n;
    let lead = Rational::new(int_pow(9, n), &four_n - 1u32);
    lead * rat_int(numer) / rat_pow(&c2, n) * bernoulli_number(2 * n as usize)
        / Integer::from(2 * n)
}

/// The three series of the `X_0 / Y / T` decomposition of `kappa_{2n}(Zhat_N)`.
#[derive(Clone, Debug, PartialEq)]
pub struct DecompositionCheck {
    pub order: u32,
    pub n: u64,
    /// Contributions of `2^N X_0 / c_N`, `(Y_1 + .. + Y_{N+1}) / c_N`, and
    /// `(X_1 + .. + X_N) / (2 c_N)`.
    pub terms: [Rational; 3],
    pub closed_form: Rational,
}

impl DecompositionCheck {
    pub fn sum(&self) -> Rational {
        self.terms.iter().sum()
    }

    pub fn holds(&self) -> bool {
        self.sum() == self.closed_form
    }
}

pub fn cumulant_decomposition_check(order: u32, n: u64) -> Result<DecompositionCheck> {
    if order < 1 || n < 1 {
        return Err(Error::invalid("decomposition needs N >= 1 and n >= 1"));
    }
    let c2 = rat_int(int_pow(4, order as u64)) - rat(3 * order as i64, 4) - Rational::one();
    let two_2n = int_pow(2, 2 * n);
    let common = rat_int(int_pow(6, 2 * n)) / rat_pow(&c2, n)
        * bernoulli_number(2 * n as usize)
        / Integer::from(2 * n)
        / (&two_2n - 1u32);
    let t1 = &common * int_pow(2, 2 * n * order as u64);
    let t2 = -(&common * Integer::from(order + 1));
    let t3 = &common * Integer::from(order) / &two_2n;
    Ok(DecompositionCheck {
        order,
        n,
        terms: [t1, t2, t3],
        closed_form: binary_cumulant_closed_form(order, n),
    })
}

// expm1(u)/u, with the 4-term series near 0
fn expm1_over(u: f64) -> f64 {
    if u.abs() < MGF_SERIES_THRESHOLD {
        1.0 + u / 2.0 + u * u / 6.0 + u * u * u / 24.0
    } else {
        u.exp_m1() / u
    }
}

/// `E exp(t Z_N(a)) = prod_{k=1}^{N} (1/a^k) (1 - e^{t a^k}) / (1 - e^t)`.
pub fn mgf_eval(a: u64, n: u32, t: f64) -> Result<f64> {
    validate(a, n)?;
    if !t.is_finite() {
        return Err(Error::invalid(format!("t = {t} is not finite")));
    }
    let top = (a as f64).powi(n as i32);
    let exponent = t * top;
    if exponent > f64::MAX.ln() {
        return Err(Error::Overflow { t, exponent });
    }
    let mut acc = 1.0;
    let mut m = 1.0f64;
    for _ in 0..n {
        m *= a as f64;
        let factor = if t.abs() < MGF_SERIES_THRESHOLD {
            expm1_over(t * m) / expm1_over(t)
        } else {
            (t * m).exp_m1() / (m * t.exp_m1())
        };
        acc *= factor;
    }
    if !acc.is_finite() {
        return Err(Error::Overflow { t, exponent });
    }
    Ok(acc)
}

/// Base-2 standardised MGF as `prod_{1 <= l <= k <= N} cosh(2^{k-l} t / (2 sigma_N))`.
pub fn standardized_mgf_cosh(n: u32, t: f64) -> f64 {
    let (_, var) = mean_variance(2, n).expect("valid");
    let sigma = crate::exactnum::to_f64(&var).sqrt();
    let s = t / (2.0 * sigma);
    let mut acc = 1.0;
    for k in 1..=n {
        for l in 1..=k {
            acc *= (s * 2f64.powi((k - l) as i32)).cosh();
        }
    }
    acc
}

/// Why the classical CLT fails for the summands `X_j(a)`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CltDiagnostics {
    pub base: u64,
    pub order: u32,
    pub eps: f64,
    /// `max_j Var X_j / Var Z_N`.
    #[serde(serialize_with = "serialize_rational")]
    pub feller_ratio: Rational,
    /// `sigma_N^{-2} sum_j E[(X_j - EX_j)^2 ; |X_j - EX_j| > eps sigma_N]`.
    #[serde(serialize_with = "serialize_rational")]
    pub lindeberg: Rational,
    /// `max_j P(|X_j - EX_j| > eps sigma_N)`.
    #[serde(serialize_with = "serialize_rational")]
    pub uan: Rational,
    /// `max_j max_k P[X_j = k]`.
    #[serde(serialize_with = "serialize_rational")]
    pub max_point_mass: Rational,
}

pub(crate) fn serialize_rational<S: serde::Serializer>(
    v: &Rational,
    s: S,
) -> std::result::Result<S::Ok, S::Error> {
    s.serialize_str(&v.to_string())
}

/// Tail of a centred discrete uniform on `m` points beyond `|d| > t`, where
/// `four_t2 = 4 t^2`. Returns `(sum of d^2 over the tail, tail size)`.
///
/// Writing `u = 2d = 2k - (m - 1)`, the tail is `|u| >= u_min` with `u` of the
/// parity of `m - 1`, so both sums are arithmetic-progression closed forms.
fn uniform_tail(m: &Integer, four_t2: &Rational) -> (Rational, Integer) {
    let u_max: Integer = m - 1u32;
    let floor = four_t2.floor().to_integer();
    let mut u_min = if floor.is_negative() {
        Integer::zero()
    } else {
        floor.sqrt() + 1u32
    };
    if ((&u_min - &u_max) % 2u32).is_odd_int() {
        u_min += 1u32;
    }
    if u_min > u_max {
        return (Rational::zero(), Integer::zero());
    }
    let c: Integer = (&u_max - &u_min) / 2u32 + 1u32;
    // sum_{i<c} (u_min + 2i)^2
    let c1: Integer = &c - 1u32;
    let sum_u2: Integer = &c * &u_min * &u_min
        + Integer::from(2) * &u_min * &c * &c1
        + Integer::from(2) * &c1 * &c * (Integer::from(2) * &c - 1u32) / 3u32;
    // both signs, d^2 = u^2 / 4
    (Rational::new(sum_u2, Integer::from(2)), Integer::from(2) * c)
}

trait OddInt {
    fn is_odd_int(&self) -> bool;
}

impl OddInt for Integer {
    fn is_odd_int(&self) -> bool {
        num_integer::Integer::is_odd(self)
    }
}

pub fn clt_diagnostics(a: u64, n: u32, eps: f64) -> Result<CltDiagnostics> {
    validate(a, n)?;
    if !(eps > 0.0 && eps.is_finite()) {
        return Err(Error::invalid(format!("eps = {eps} must be positive")));
    }
    let (_, var) = mean_variance(a, n)?;
    let eps_exact = Rational::from_float(eps).expect("finite");
    let four_t2 = &eps_exact * &eps_exact * &var * Integer::from(4);

    let mut lindeberg = Rational::zero();
    let mut uan = Rational::zero();
    let mut m = Integer::one();
    for _ in 0..n {
        m *= a;
        let (sq, count) = uniform_tail(&m, &four_t2);
        lindeberg += sq / &m;
        let p = Rational::new(count, m.clone());
        if p > uan {
            uan = p;
        }
    }
    lindeberg /= &var;
    let top = int_pow(a, n as u64);
    let feller_ratio = Rational::new(&top * &top - 1u32, Integer::from(12)) / &var;
    Ok(CltDiagnostics {
        base: a,
        order: n,
        eps,
        feller_ratio,
        lindeberg,
        uan,
        max_point_mass: Rational::new(Integer::one(), Integer::from(a)),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::coeffs::brute_force_coeffs;
    use crate::exactnum::to_f64;

    #[test]
    fn pmf_examples() {
        let p = pmf(&expand_coeffs(2, 2).unwrap());
        assert_eq!(p, vec![rat(1, 8), rat(1, 4), rat(1, 4), rat(1, 4), rat(1, 8)]);
        assert_eq!(pmf(&expand_coeffs(2, 1).unwrap()), vec![rat(1, 2), rat(1, 2)]);
        let p = pmf(&brute_force_coeffs(3, 2).unwrap());
        assert_eq!(p.len(), 11);
        assert_eq!(p[0], rat(1, 27));
        assert_eq!(p.iter().sum::<Rational>(), Rational::one());
    }

    #[test]
    fn mean_variance_examples() {
        assert_eq!(mean_variance(2, 2).unwrap(), (rat(2, 1), rat(3, 2)));
        assert_eq!(mean_variance(2, 1).unwrap(), (rat(1, 2), rat(1, 4)));
        assert!(mean_variance(1, 2).is_err());
    }

    #[test]
    fn closed_forms_match_enumerated_moments() {
        for (a, n) in [(2, 1), (2, 2), (2, 3), (2, 4), (2, 5), (2, 6), (3, 1), (3, 2), (3, 3), (3, 4), (4, 3), (5, 2)] {
            let p = pmf(&brute_force_coeffs(a, n).unwrap());
            assert_eq!(p.iter().sum::<Rational>(), Rational::one());
            assert_eq!(pmf_mean_variance(&p), mean_variance(a, n).unwrap(), "a={a} N={n}");
        }
    }

    #[test]
    fn binary_mean_variance_agree_with_base2_formulas() {
        for n in 1..=30u32 {
            let (mu, var) = mean_variance(2, n).unwrap();
            let mu2 = rat_int(int_pow(2, n as u64)) - rat(n as i64, 2) - Rational::one();
            let var2 = (rat_int(int_pow(4, n as u64)) - rat(3 * n as i64, 4) - Rational::one())
                / Integer::from(9);
            assert_eq!(mu, mu2);
            assert_eq!(var, var2);
        }
    }

    #[test]
    fn moment_cumulant_conversions_invert() {
        let m = vec![rat(1, 1), rat(1, 3), rat(2, 5), rat(-1, 7), rat(5, 2), rat(0, 1)];
        let k = cumulants_from_moments(&m);
        assert_eq!(moments_from_cumulants(&k), m);
        // N(0,1): kappa = (0, 1, 0, 0) -> moments 1, 0, 1, 0, 3
        let m = moments_from_cumulants(&[rat(0, 1), rat(1, 1), rat(0, 1), rat(0, 1)]);
        assert_eq!(m, vec![rat(1, 1), rat(0, 1), rat(1, 1), rat(0, 1), rat(3, 1)]);
    }

    #[test]
    fn mgf_examples() {
        assert_eq!(mgf_eval(2, 3, 0.0).unwrap(), 1.0);
        let v = mgf_eval(2, 2, 2f64.ln()).unwrap();
        assert!((v - 5.625).abs() < 1e-13, "{v}");
        // derivative at 0 by central difference is the mean
        for (a, n) in [(2, 3), (3, 2), (2, 6)] {
            let h = 1e-5;
            let d = (mgf_eval(a, n, h).unwrap() - mgf_eval(a, n, -h).unwrap()) / (2.0 * h);
            let mu = to_f64(&mean_variance(a, n).unwrap().0);
            assert!((d - mu).abs() < 1e-6 * mu.max(1.0), "a={a} N={n}: {d} vs {mu}");
        }
    }

    #[test]
    fn mgf_series_branch_is_continuous() {
        for (a, n) in [(2, 5), (3, 3)] {
            let mu = to_f64(&mean_variance(a, n).unwrap().0);
            for t in [-0.5e-8, 0.99e-8, 1.01e-8, 3e-8] {
                let v = mgf_eval(a, n, t).unwrap();
                assert!((v - (1.0 + mu * t)).abs() < 1e-12, "t={t}: {v}");
            }
        }
    }

    #[test]
    fn mgf_matches_pmf_sum() {
        let table = expand_coeffs(3, 3).unwrap();
        let p = pmf(&table);
        for t in [-0.7, -0.01, 0.003, 0.05] {
            let direct: f64 = p
                .iter()
                .enumerate()
                .map(|(k, pk)| to_f64(pk) * (t * k as f64).exp())
                .sum();
            let v = mgf_eval(3, 3, t).unwrap();
            assert!((v - direct).abs() < 1e-12 * direct, "t={t}");
        }
    }

    #[test]
    fn mgf_overflow_is_reported() {
        assert!(matches!(mgf_eval(2, 10, 1.0), Err(Error::Overflow { .. })));
        assert!(mgf_eval(2, 10, -1.0).is_ok());
        assert!(mgf_eval(2, 3, f64::NAN).is_err());
    }

    #[test]
    fn mgf_matches_cosh_product_after_standardisation() {
        for n in 1..=10u32 {
            let (mu, var) = mean_variance(2, n).unwrap();
            let (mu, sigma) = (to_f64(&mu), to_f64(&var).sqrt());
            for t in [-2.0, -0.5, 0.25, 1.0, 3.0] {
                let via_mgf = (-t * mu / sigma).exp() * mgf_eval(2, n, t / sigma).unwrap();
                let via_cosh = standardized_mgf_cosh(n, t);
                assert!(
                    ((via_mgf - via_cosh) / via_cosh).abs() < 1e-12,
                    "N={n} t={t}: {via_mgf} vs {via_cosh}"
                );
            }
        }
    }

    #[test]
    fn standardized_cumulant_examples() {
        for (a, n) in [(2, 1), (2, 7), (3, 4), (5, 2)] {
            let k = standardized_cumulants(a, n, 3).unwrap();
            assert_eq!(k.even[0], Rational::one());
            assert_eq!(k.kappa(3), Some(Rational::zero()));
        }
        for n in 1..=6u32 {
            let got = &standardized_cumulants(2, n, 2).unwrap().even[1];
            let four_n = int_pow(16, n as u64);
            let c2 = rat_int(int_pow(4, n as u64)) - rat(3 * n as i64, 4) - Rational::one();
            let expected = rat(81, 15)
                * rat_int(Integer::from(16) * (four_n - Integer::from(n) - 1u32) + Integer::from(n))
                / (&c2 * &c2)
                * rat(-1, 30)
                / Integer::from(4);
            assert_eq!(got, &expected);
        }
    }

    #[test]
    fn general_form_equals_binary_closed_form() {
        for n in 1..=20u32 {
            let seq = standardized_cumulants(2, n, 10).unwrap();
            for (i, k) in seq.even.iter().enumerate() {
                assert_eq!(k, &binary_cumulant_closed_form(n, i as u64 + 1), "N={n} 2n={}", 2 * i + 2);
            }
        }
    }

    #[test]
    fn closed_form_matches_pmf_cumulants() {
        for (a, n) in [(2, 1), (2, 2), (2, 3), (2, 4), (2, 5), (3, 2), (3, 3)] {
            let from_pmf = pmf_cumulants(&expand_coeffs(a, n).unwrap(), 5);
            let closed = standardized_cumulants(a, n, 5).unwrap();
            assert_eq!(from_pmf.standardized_even, closed.even, "a={a} N={n}");
            for (r, k) in from_pmf.central.iter().enumerate() {
                if r % 2 == 0 {
                    assert!(k.is_zero(), "odd cumulant {} nonzero", r + 1);
                }
            }
        }
    }

    #[test]
    fn decomposition_examples() {
        let c = cumulant_decomposition_check(1, 1).unwrap();
        assert!(c.holds());
        assert_eq!(c.closed_form, Rational::one());
        assert!(cumulant_decomposition_check(3, 2).unwrap().holds());
        assert!(cumulant_decomposition_check(10, 5).unwrap().holds());
        assert!(cumulant_decomposition_check(0, 1).is_err());
    }

    #[test]
    fn feller_ratio_tends_to_three_quarters() {
        assert_eq!(clt_diagnostics(2, 1, 0.1).unwrap().feller_ratio, Rational::one());
        let mut prev = rat(2, 1);
        for n in 2..=40 {
            let r = clt_diagnostics(2, n, 0.1).unwrap().feller_ratio;
            assert!(r < prev && r > rat(3, 4), "N={n}: {r}");
            prev = r;
        }
        let r = to_f64(&clt_diagnostics(2, 20, 0.1).unwrap().feller_ratio);
        assert!((r - 0.75).abs() < 1e-5);
    }

    // Oracle: walk each X_j's support and compare d^2 against t^2 exactly.
    fn lindeberg_by_enumeration(a: u64, n: u32, eps: f64) -> (Rational, Rational) {
        let (_, var) = mean_variance(a, n).unwrap();
        let e = Rational::from_float(eps).unwrap();
        let t2 = &e * &e * &var;
        let mut l = Rational::zero();
        let mut uan = Rational::zero();
        for j in 1..=n {
            let m = a.pow(j);
            let c = rat(m as i64 - 1, 2);
            let mut tail = 0;
            for k in 0..m {
                let d = rat(k as i64, 1) - &c;
                let d2 = &d * &d;
                if d2 > t2 {
                    l += d2 / Integer::from(m);
                    tail += 1;
                }
            }
            let p = rat(tail, m as i64);
            if p > uan {
                uan = p;
            }
        }
        (l / var, uan)
    }

    #[test]
    fn lindeberg_matches_enumeration() {
        for (a, n) in [(2, 1), (2, 4), (2, 8), (3, 4), (5, 3), (4, 5)] {
            for eps in [0.01, 0.1, 0.3, 0.5, 0.9, 2.0] {
                let d = clt_diagnostics(a, n, eps).unwrap();
                let (l, uan) = lindeberg_by_enumeration(a, n, eps);
                assert_eq!(d.lindeberg, l, "a={a} N={n} eps={eps}");
                assert_eq!(d.uan, uan, "a={a} N={n} eps={eps}");
            }
        }
    }

    #[test]
    fn lindeberg_does_not_vanish() {
        let d = clt_diagnostics(2, 20, 0.1).unwrap();
        assert!(to_f64(&d.lindeberg) > 0.1);
        assert!(clt_diagnostics(2, 3, 0.0).is_err());
        assert!(clt_diagnostics(2, 3, -1.0).is_err());
    }
}

//! The limit law `Z*(a) = sum_{k>=1} U_k / a^k`, `U_k` uniform on
//! `[-b_a, b_a]` with `b_a^2 = 3(a^2 - 1)`.
//!
//! Exact cumulants and moments use only even powers of `b_a`, so they stay
//! rational. The density is tabulated by iterating the fixed point
//! `Z* = (Z*' + U) / a` on a uniform grid.

use std::fmt::Write as _;
use std::path::Path;

use num_traits::{One, Zero};
use rayon::prelude::*;
use serde::Serialize;

use crate::distn::{moments_from_cumulants, CumulantSeq};
use crate::exactnum::{
    bernoulli_number, bernoulli_poly_at_half, binom, int_pow, ln_rational, rat_int, Integer,
    Rational,
};
use crate::{Error, Result};

pub const DEFAULT_GRID_M: usize = 8192;
pub const DEFAULT_ITERS: u32 = 40;
/// Finest grid accepted; keeps each grid well under a gigabyte.
pub const MAX_GRID_M: usize = 1 << 24;

fn validate_base(a: u64) -> Result<()> {
    if a < 2 {
        return Err(Error::invalid(format!("base a = {a} must be >= 2")));
    }
    if a > 1 << 20 {
        return Err(Error::invalid(format!("base a = {a} too large")));
    }
    Ok(())
}

/// `b_a^2 = 3(a^2 - 1)`; `b_2 = 3`.
pub fn half_width_squared(a: u64) -> Integer {
    Integer::from(3) * (Integer::from(a) * a - 1u32)
}

pub fn half_width(a: u64) -> f64 {
    (3.0 * ((a as f64) * (a as f64) - 1.0)).sqrt()
}

/// Radius of the support of `Z*(a)`: `b_a / (a - 1)`.
pub fn support_radius(a: u64) -> f64 {
    half_width(a) / (a - 1) as f64
}

/// Exact cumulants and moments of `Z*(a)`.
#[derive(Clone, Debug)]
pub struct LimitLaw {
    pub base: u64,
    pub b_squared: Integer,
    pub b: f64,
    pub cumulants: CumulantSeq,
    /// `moments[n] = m_{2n}`, `moments[0] = 1`.
    pub moments: Vec<Rational>,
}

impl LimitLaw {
    pub fn new(a: u64, n_max: usize) -> Result<Self> {
        Ok(LimitLaw {
            base: a,
            b_squared: half_width_squared(a),
            b: half_width(a),
            cumulants: limit_cumulants(a, n_max)?,
            moments: moments_rec1_general(a, n_max)?,
        })
    }

    pub fn support_radius(&self) -> f64 {
        support_radius(self.base)
    }

    /// `m_{2n} <= b_a^{2n}` for every stored moment.
    pub fn moment_bound_holds(&self) -> bool {
        let b2 = rat_int(self.b_squared.clone());
        let mut bound = Rational::one();
        for m in &self.moments {
            if m > &bound {
                return false;
            }
            bound *= &b2;
        }
        true
    }
}

/// `kappa*_{2n} = (B_{2n}/2n) (12(a^2 - 1))^n / (a^{2n} - 1)`.
pub fn limit_cumulants(a: u64, n_max: usize) -> Result<CumulantSeq> {
    validate_base(a)?;
    let twelve = Integer::from(12) * (Integer::from(a) * a - 1u32);
    let even = (1..=n_max as u64)
        .map(|n| {
            bernoulli_number(2 * n as usize) / Integer::from(2 * n)
                * num_traits::pow(twelve.clone(), n as usize)
                / (int_pow(a, 2 * n) - 1u32)
        })
        .collect();
    Ok(CumulantSeq {
        base: a,
        order: None,
        even,
    })
}

/// Which of the three moment recurrences to run.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Recurrence {
    /// Integrate `(u + Z)^{2n}` over the uniform; any base.
    Rec1,
    /// Cumulant-to-moment convolution with `kappa*`; any base.
    Rec2,
    /// Bernoulli polynomials at 1/2; base 2 only.
    Rec3,
}

impl Recurrence {
    pub const ALL: [Recurrence; 3] = [Recurrence::Rec1, Recurrence::Rec2, Recurrence::Rec3];

    pub fn name(self) -> &'static str {
        match self {
            Recurrence::Rec1 => "rec1",
            Recurrence::Rec2 => "rec2",
            Recurrence::Rec3 => "rec3",
        }
    }

    pub fn run(self, a: u64, n_max: usize) -> Result<Vec<Rational>> {
        match self {
            Recurrence::Rec1 => moments_rec1_general(a, n_max),
            Recurrence::Rec2 => moments_rec2_general(a, n_max),
            Recurrence::Rec3 if a == 2 => Ok(moments_rec3(n_max)),
            Recurrence::Rec3 => Err(Error::invalid(format!(
                "rec3 is defined for a = 2 only (got a = {a})"
            ))),
        }
    }
}

impl std::str::FromStr for Recurrence {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "rec1" => Ok(Recurrence::Rec1),
            "rec2" => Ok(Recurrence::Rec2),
            "rec3" => Ok(Recurrence::Rec3),
            other => Err(Error::invalid(format!("unknown recurrence {other:?}"))),
        }
    }
}

/// Base-2 `m_{2n}`, indexed so that `v[n] = m_{2n}` and `v[0] = 1`.
pub fn moments_rec1(n_max: usize) -> Vec<Rational> {
    moments_rec1_general(2, n_max).expect("a = 2 is valid")
}

/// `m_{2n} = sum_{j=1}^{n} C(2n+1, 2j+1) (b_a^2)^j m_{2n-2j} / ((2n+1)(a^{2n} - 1))`.
pub fn moments_rec1_general(a: u64, n_max: usize) -> Result<Vec<Rational>> {
    validate_base(a)?;
    let b2 = half_width_squared(a);
    let b2_pow: Vec<Integer> = (0..=n_max).map(|j| num_traits::pow(b2.clone(), j)).collect();
    let mut m = vec![Rational::one()];
    for n in 1..=n_max {
        let mut acc = Rational::zero();
        for j in 1..=n {
            acc += &m[n - j] * (binom(2 * n as u64 + 1, 2 * j as u64 + 1) * &b2_pow[j]);
        }
        let denom = Integer::from(2 * n + 1) * (int_pow(a, 2 * n as u64) - 1u32);
        m.push(acc / denom);
    }
    Ok(m)
}

pub fn moments_rec2(n_max: usize) -> Vec<Rational> {
    moments_rec2_general(2, n_max).expect("a = 2 is valid")
}

/// `m_{2n} = sum_{j=1}^{n} C(2n-1, 2j-1) kappa*_{2j} m_{2n-2j}`.
pub fn moments_rec2_general(a: u64, n_max: usize) -> Result<Vec<Rational>> {
    let kappa = limit_cumulants(a, n_max)?.even;
    let mut m = vec![Rational::one()];
    for n in 1..=n_max {
        let mut acc = Rational::zero();
        for j in 1..=n {
            acc += &kappa[j - 1] * &m[n - j] * binom(2 * n as u64 - 1, 2 * j as u64 - 1);
        }
        m.push(acc);
    }
    Ok(m)
}

/// `m_{2n} = 4^n/(1 - 4^n) sum_{j=1}^{n} C(2n, 2j) 9^j B_{2j}(1/2) m_{2n-2j}`.
pub fn moments_rec3(n_max: usize) -> Vec<Rational> {
    let mut m = vec![Rational::one()];
    for n in 1..=n_max {
        let mut acc = Rational::zero();
        for j in 1..=n {
            acc += bernoulli_poly_at_half(2 * j)
                * &m[n - j]
                * (binom(2 * n as u64, 2 * j as u64) * int_pow(9, j as u64));
        }
        let four_n = int_pow(4, n as u64);
        m.push(acc * Rational::new(four_n.clone(), Integer::one() - four_n));
    }
    m
}

/// Even moments from the full cumulant sequence (odd ones zero).
pub fn even_moments_from_cumulants(kappa: &CumulantSeq) -> Vec<Rational> {
    moments_from_cumulants(&kappa.all_orders())
        .into_iter()
        .step_by(2)
        .collect()
}

/// Exact even moments of `sum_{i<=K} U_i / a^i`, built one summand at a time.
pub fn moments_from_truncated_sum(a: u64, k: u32, n_max: usize) -> Result<Vec<Rational>> {
    validate_base(a)?;
    if k < 1 {
        return Err(Error::invalid("truncation depth K must be >= 1"));
    }
    if (k as u128) * (n_max as u128) > 1 << 16 {
        return Err(Error::invalid(format!("K * n_max = {} over budget", k as u128 * n_max as u128)));
    }
    let b2 = half_width_squared(a);
    // E U^{2j} = b^{2j} / (2j + 1)
    let uniform: Vec<Rational> = (0..=n_max)
        .map(|j| Rational::new(num_traits::pow(b2.clone(), j), Integer::from(2 * j + 1)))
        .collect();
    let pascal: Vec<Vec<Integer>> = (0..=n_max)
        .map(|n| (0..=n).map(|j| binom(2 * n as u64, 2 * j as u64)).collect())
        .collect();
    let mut m: Vec<Rational> = (0..=n_max)
        .map(|n| if n == 0 { Rational::one() } else { Rational::zero() })
        .collect();
    for i in 1..=k as u64 {
        let scaled: Vec<Rational> = uniform
            .iter()
            .enumerate()
            .map(|(j, u)| u / int_pow(a, 2 * i * j as u64))
            .collect();
        m = (0..=n_max)
            .map(|n| {
                (0..=n)
                    .map(|j| &m[n - j] * &scaled[j] * &pascal[n][j])
                    .sum()
            })
            .collect();
    }
    Ok(m)
}

/// `(m_{2n})^{1/(2n)}` for `n = 1 ..`, from `moments[n] = m_{2n}`.
pub fn lyapunov_profile(moments: &[Rational]) -> Vec<f64> {
    moments
        .iter()
        .enumerate()
        .skip(1)
        .map(|(n, m)| (ln_rational(m) / (2 * n) as f64).exp())
        .collect()
}

/// One row of the comparison between `kappa*_{2n}` and the cumulants of the
/// first summand `U_1 / a`, which is uniform on `[-b_a/a, b_a/a]`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct UniformCumulantRow {
    pub n: usize,
    #[serde(serialize_with = "crate::distn::serialize_rational")]
    pub limit: Rational,
    #[serde(serialize_with = "crate::distn::serialize_rational")]
    pub uniform: Rational,
    /// `kappa*_{2n} / kappa_{2n}(U_1/a) = a^{2n} / (a^{2n} - 1)`.
    #[serde(serialize_with = "crate::distn::serialize_rational")]
    pub ratio: Rational,
}

pub fn uniform_cumulant_comparison(a: u64, n_max: usize) -> Result<Vec<UniformCumulantRow>> {
    let limit = limit_cumulants(a, n_max)?;
    let b2 = half_width_squared(a);
    Ok(limit
        .even
        .into_iter()
        .enumerate()
        .map(|(i, k)| {
            let n = i + 1;
            // cumulant of a uniform of width L is (B_{2n}/2n) L^{2n}
            let width_sq = Rational::new(Integer::from(4) * &b2, Integer::from(a) * a);
            let uniform = bernoulli_number(2 * n) / Integer::from(2 * n)
                * crate::exactnum::rat_pow(&width_sq, n as u64);
            let ratio = &k / &uniform;
            UniformCumulantRow {
                n,
                limit: k,
                uniform,
                ratio,
            }
        })
        .collect())
}

/// Which variable a [`DensityGrid`] tabulates.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum GridVariable {
    /// `Z*(a)`, summands uniform on `[-b_a, b_a]`.
    Limit,
    /// `V*(a) = sum V_k / a^k`, summands uniform on `[0, 1]`.
    Unit,
}

/// Density and CDF of a truncated self-similar sum on
/// `x_i = c + (i - M/2) h`, `i = 0 ..= M`, `h = 2w / (M - 2)`, so the grid
/// spans `[c - w - h, c + w + h]` and `c +- w` are nodes.
#[derive(Clone, Debug, PartialEq)]
pub struct DensityGrid {
    pub base: u64,
    pub variable: GridVariable,
    pub grid_m: usize,
    pub iters: u32,
    pub h: f64,
    pub x: Vec<f64>,
    pub pdf: Vec<f64>,
    pub cdf: Vec<f64>,
    /// Sup-norm CDF distance to the untruncated law.
    pub truncation_bound: f64,
    lo: f64,
    hi: f64,
}

#[derive(Serialize)]
struct Sidecar<'a> {
    a: u64,
    variable: GridVariable,
    #[serde(rename = "grid_M")]
    grid_m: usize,
    iters: u32,
    truncation_bound: f64,
    h: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    note: Option<&'a str>,
}

struct Antiderivative<'a> {
    x0: f64,
    h: f64,
    g: &'a [f64],
    cum: Vec<f64>,
}

impl<'a> Antiderivative<'a> {
    fn new(x0: f64, h: f64, g: &'a [f64]) -> Self {
        let mut cum = Vec::with_capacity(g.len());
        cum.push(0.0);
        for w in g.windows(2) {
            let last = *cum.last().expect("nonempty");
            cum.push(last + 0.5 * h * (w[0] + w[1]));
        }
        Antiderivative { x0, h, g, cum }
    }

    /// `int_{-inf}^{y}` of the piecewise-linear interpolant of `g`, taken as 0
    /// left of the grid and constant right of it.
    fn eval(&self, y: f64) -> f64 {
        let s = (y - self.x0) / self.h;
        if s <= 0.0 {
            return 0.0;
        }
        let last = self.g.len() - 1;
        if s >= last as f64 {
            return self.cum[last] + self.g[last] * (s - last as f64) * self.h;
        }
        let j = s.floor() as usize;
        let t = s - j as f64;
        self.cum[j] + self.h * (t * self.g[j] + 0.5 * t * t * (self.g[j + 1] - self.g[j]))
    }
}

fn interpolate(x0: f64, h: f64, v: &[f64], y: f64, left: f64, right: f64) -> f64 {
    let s = (y - x0) / h;
    if s < 0.0 {
        return left;
    }
    let last = v.len() - 1;
    if s >= last as f64 {
        return if s == last as f64 { v[last] } else { right };
    }
    let j = s.floor() as usize;
    let t = s - j as f64;
    v[j] + t * (v[j + 1] - v[j])
}

impl DensityGrid {
    fn build(
        a: u64,
        variable: GridVariable,
        grid_m: usize,
        iters: u32,
    ) -> Result<Self> {
        validate_base(a)?;
        if grid_m < 512 || !grid_m.is_multiple_of(2) || grid_m > MAX_GRID_M {
            return Err(Error::invalid(format!(
                "grid_M = {grid_m} must be even and in 512..={MAX_GRID_M}"
            )));
        }
        if iters < 1 {
            return Err(Error::invalid("iters must be >= 1"));
        }
        let af = a as f64;
        let (lo, hi, c, w) = match variable {
            GridVariable::Limit => {
                let b = half_width(a);
                (-b, b, 0.0, support_radius(a))
            }
            GridVariable::Unit => {
                let r = 1.0 / (af - 1.0);
                (0.0, 1.0, 0.5 * r, 0.5 * r)
            }
        };
        let h = 2.0 * w / (grid_m - 2) as f64;
        if h > w / 64.0 {
            return Err(Error::invalid("grid too coarse"));
        }
        let half = (grid_m / 2) as f64;
        let x: Vec<f64> = (0..=grid_m).map(|i| c + (i as f64 - half) * h).collect();
        let x0 = x[0];
        let width = hi - lo;

        // CDF of U/a, the depth-1 sum
        let mut cdf: Vec<f64> = x
            .iter()
            .map(|&xi| ((af * xi - lo) / width).clamp(0.0, 1.0))
            .collect();
        for _ in 1..iters {
            let big_h = Antiderivative::new(x0, h, &cdf);
            cdf = x
                .par_iter()
                .map(|&xi| (big_h.eval(af * xi - lo) - big_h.eval(af * xi - hi)) / width)
                .collect();
        }
        // last step: density from the previous CDF, then the CDF itself
        let prev = cdf;
        let prev_last = prev[grid_m];
        let pdf: Vec<f64> = x
            .par_iter()
            .map(|&xi| {
                let up = interpolate(x0, h, &prev, af * xi - lo, 0.0, prev_last);
                let down = interpolate(x0, h, &prev, af * xi - hi, 0.0, prev_last);
                (af * (up - down) / width).max(0.0)
            })
            .collect();
        let big_h = Antiderivative::new(x0, h, &prev);
        let cdf: Vec<f64> = x
            .par_iter()
            .map(|&xi| (big_h.eval(af * xi - lo) - big_h.eval(af * xi - hi)) / width)
            .collect();

        let max_pdf = pdf.iter().cloned().fold(0.0, f64::max);
        let depth = iters as i32 + 1;
        let tail = 0.5 * width * af.powi(-depth) / (af - 1.0);
        Ok(DensityGrid {
            base: a,
            variable,
            grid_m,
            iters,
            h,
            x,
            pdf,
            cdf,
            truncation_bound: tail * max_pdf,
            lo,
            hi,
        })
    }

    /// Grid for `Z*(a)` over `[-b_a/(a-1) - h, b_a/(a-1) + h]`.
    pub fn limit(a: u64, grid_m: usize, iters: u32) -> Result<Self> {
        Self::build(a, GridVariable::Limit, grid_m, iters)
    }

    /// Grid for `V*(a)` over `[-h, 1/(a-1) + h]`.
    pub fn unit(a: u64, grid_m: usize, iters: u32) -> Result<Self> {
        Self::build(a, GridVariable::Unit, grid_m, iters)
    }

    /// Half-width of the uniform summands.
    pub fn summand_half_width(&self) -> f64 {
        0.5 * (self.hi - self.lo)
    }

    pub fn cdf_at(&self, y: f64) -> f64 {
        interpolate(self.x[0], self.h, &self.cdf, y, 0.0, 1.0)
    }

    pub fn pdf_at(&self, y: f64) -> f64 {
        interpolate(self.x[0], self.h, &self.pdf, y, 0.0, 0.0)
    }

    pub fn max_pdf(&self) -> f64 {
        self.pdf.iter().cloned().fold(0.0, f64::max)
    }

    /// Largest `|g'|`, by finite differences on the grid.
    pub fn max_slope(&self) -> f64 {
        self.pdf
            .windows(2)
            .map(|w| (w[1] - w[0]).abs() / self.h)
            .fold(0.0, f64::max)
    }

    /// Trapezoid rule `int y^k g(y) dy`.
    pub fn moment(&self, k: i32) -> f64 {
        let last = self.x.len() - 1;
        let mut s = 0.0;
        for (i, (&xi, &gi)) in self.x.iter().zip(&self.pdf).enumerate() {
            let w = if i == 0 || i == last { 0.5 } else { 1.0 };
            s += w * xi.powi(k) * gi;
        }
        s * self.h
    }

    pub fn integral(&self) -> f64 {
        self.moment(0)
    }

    /// `max_i |g(x_i) - g(x_{M-i})|`.
    pub fn symmetry_defect(&self) -> f64 {
        let m = self.grid_m;
        (0..=m / 2)
            .map(|i| (self.pdf[i] - self.pdf[m - i]).abs())
            .fold(0.0, f64::max)
    }

    /// Largest drop between consecutive CDF values (0 when nondecreasing).
    pub fn cdf_monotonicity_defect(&self) -> f64 {
        self.cdf
            .windows(2)
            .map(|w| (w[0] - w[1]).max(0.0))
            .fold(0.0, f64::max)
    }

    /// Largest density value at nodes outside `[lo_edge, hi_edge]`.
    pub fn mass_outside(&self, lo_edge: f64, hi_edge: f64) -> f64 {
        self.x
            .iter()
            .zip(&self.pdf)
            .filter(|(x, _)| **x < lo_edge || **x > hi_edge)
            .map(|(_, g)| *g)
            .fold(0.0, f64::max)
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::with_capacity(self.x.len() * 48);
        out.push_str("x,pdf,cdf\n");
        for i in 0..self.x.len() {
            let _ = writeln!(out, "{},{},{}", self.x[i], self.pdf[i], self.cdf[i]);
        }
        out
    }

    pub fn sidecar_json(&self) -> String {
        let note = match self.variable {
            GridVariable::Unit => Some("V*(a) = sum V_k / a^k, V_k uniform on [0, 1]"),
            GridVariable::Limit => None,
        };
        let s = Sidecar {
            a: self.base,
            variable: self.variable,
            grid_m: self.grid_m,
            iters: self.iters,
            truncation_bound: self.truncation_bound,
            h: self.h,
            note,
        };
        serde_json::to_string_pretty(&s).expect("plain struct")
    }

    /// Writes `<stem>.csv` and `<stem>.json`; returns both paths.
    pub fn export(&self, stem: impl AsRef<Path>) -> Result<(std::path::PathBuf, std::path::PathBuf)> {
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

/// Grid for `Z*(a)`.
pub fn density_grid(a: u64, grid_m: usize, iters: u32) -> Result<DensityGrid> {
    DensityGrid::limit(a, grid_m, iters)
}

/// `sup |G_M - G_{M/2}|` over the coarse nodes: an estimate (not a
/// certificate) of the discretization error of `grid`.
pub fn discretization_estimate(grid: &DensityGrid) -> Result<f64> {
    let coarse = DensityGrid::build(grid.base, grid.variable, grid.grid_m / 2, grid.iters)?;
    Ok(coarse
        .x
        .iter()
        .zip(&coarse.cdf)
        .map(|(&x, &g)| (grid.cdf_at(x) - g).abs())
        .fold(0.0, f64::max))
}

/// `(G*_a(x), g*_a(x))` read off a `V*(a)` grid through
/// `Z* = 2 b_a V* - b_a/(a-1)`.
pub fn shift_scale_maps(a: u64, x: f64, vgrid: &DensityGrid) -> Result<(f64, f64)> {
    if vgrid.variable != GridVariable::Unit || vgrid.base != a {
        return Err(Error::invalid(format!(
            "shift_scale_maps needs a V* grid for a = {a}"
        )));
    }
    let b = half_width(a);
    let r = support_radius(a);
    if x <= -r {
        return Ok((0.0, 0.0));
    }
    if x >= r {
        return Ok((1.0, 0.0));
    }
    let v = (x + r) / (2.0 * b);
    Ok((vgrid.cdf_at(v), vgrid.pdf_at(v) / (2.0 * b)))
}

/// Direct `Z*(a)` grid against the mapped `V*(a)` grid.
#[derive(Clone, Debug, Serialize)]
pub struct ShiftScaleReport {
    pub a: u64,
    pub grid_m: usize,
    pub iters: u32,
    pub sup_cdf_diff: f64,
    pub truncation_direct: f64,
    pub truncation_unit: f64,
    pub discretization_direct: f64,
    pub discretization_unit: f64,
    /// Linear-interpolation error of the mapped lookup, `h_V^2/8 max |f_V'|`.
    pub interpolation: f64,
    pub tolerance: f64,
}

impl ShiftScaleReport {
    pub fn passes(&self) -> bool {
        self.sup_cdf_diff <= self.tolerance
    }
}

pub fn shift_scale_consistency(a: u64, grid_m: usize, iters: u32) -> Result<ShiftScaleReport> {
    let direct = DensityGrid::limit(a, grid_m, iters)?;
    let unit = DensityGrid::unit(a, grid_m, iters)?;
    let mut sup = 0.0f64;
    for (&x, &g) in direct.x.iter().zip(&direct.cdf) {
        let (mapped, _) = shift_scale_maps(a, x, &unit)?;
        sup = sup.max((mapped - g).abs());
    }
    let discretization_direct = discretization_estimate(&direct)?;
    let discretization_unit = discretization_estimate(&unit)?;
    let interpolation = unit.h * unit.h / 8.0 * unit.max_slope();
    let tolerance = direct.truncation_bound
        + unit.truncation_bound
        + discretization_direct
        + discretization_unit
        + interpolation;
    Ok(ShiftScaleReport {
        a,
        grid_m,
        iters,
        sup_cdf_diff: sup,
        truncation_direct: direct.truncation_bound,
        truncation_unit: unit.truncation_bound,
        discretization_direct,
        discretization_unit,
        interpolation,
        tolerance,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::distn::standardized_cumulants;
    use crate::exactnum::{rat, to_f64};

    #[test]
    fn cumulant_examples() {
        let k = limit_cumulants(2, 3).unwrap();
        assert_eq!(k.even[0], rat(1, 1));
        assert_eq!(k.even[1], rat(-18, 25));
        assert_eq!(limit_cumulants(3, 1).unwrap().even[0], rat(1, 1));
        for a in 2..8 {
            assert_eq!(limit_cumulants(a, 1).unwrap().even[0], rat(1, 1));
        }
        assert!(limit_cumulants(1, 3).is_err());
    }

    #[test]
    fn finite_n_cumulants_approach_the_limit() {
        for a in [2, 3] {
            let lim = limit_cumulants(a, 6).unwrap();
            for n in 1..6 {
                let mut prev = f64::INFINITY;
                for order in 1..=14 {
                    let k = &standardized_cumulants(a, order, 6).unwrap().even[n];
                    let gap = to_f64(&(k - &lim.even[n])).abs();
                    assert!(gap < prev, "a={a} 2n={} N={order}", 2 * n + 2);
                    prev = gap;
                }
            }
        }
    }

    #[test]
    fn table_moments() {
        let m = moments_rec1(8);
        assert_eq!(m[0], rat(1, 1));
        assert_eq!(m[1], rat(1, 1));
        assert_eq!(m[2], rat(57, 25));
        assert_eq!(m[3], rat(1749, 245));
        assert_eq!(m[4], rat(398427, 14875));
        // printed value and number of decimals
        let printed = [(26.785, 3), (113.33214, 5), (523.1019, 4), (2580.48, 2)];
        for (i, (d, places)) in printed.iter().enumerate() {
            let v = to_f64(&m[4 + i]);
            assert!((v - d).abs() <= 0.5 * 10f64.powi(-places), "m_{} = {v}", 8 + 2 * i);
        }
        assert!((to_f64(&m[8]) / 13420.0 - 1.0).abs() < 5e-4);
    }

    #[test]
    fn recurrences_agree() {
        let r1 = moments_rec1(50);
        assert_eq!(r1, moments_rec2(50));
        assert_eq!(r1, moments_rec3(50));
        let from_k = even_moments_from_cumulants(&limit_cumulants(2, 50).unwrap());
        assert_eq!(r1, from_k);
        for a in [3, 4, 7] {
            let g1 = moments_rec1_general(a, 20).unwrap();
            assert_eq!(g1, moments_rec2_general(a, 20).unwrap(), "a={a}");
            assert_eq!(g1[1], rat(1, 1));
        }
        assert!(Recurrence::Rec3.run(3, 2).is_err());
        assert_eq!(Recurrence::Rec3.run(2, 2).unwrap()[2], rat(57, 25));
    }

    #[test]
    fn moment_bound() {
        for a in [2, 3, 5] {
            assert!(LimitLaw::new(a, 50).unwrap().moment_bound_holds(), "a={a}");
        }
    }

    #[test]
    fn truncated_sum_oracle() {
        let m = moments_from_truncated_sum(2, 1, 2).unwrap();
        assert_eq!(m[1], rat(3, 4));
        for k in 1..10u32 {
            let m = moments_from_truncated_sum(2, k, 1).unwrap();
            assert_eq!(m[1], rat(1, 1) - Rational::new(Integer::one(), int_pow(4, k as u64)));
        }
        let m = moments_from_truncated_sum(2, 30, 2).unwrap();
        assert!((to_f64(&m[2]) - 2.28).abs() < 1e-15);
        // a = 3: depth 20 is within 3^-40 of the recurrence
        let exact = moments_rec1_general(3, 3).unwrap();
        let trunc = moments_from_truncated_sum(3, 20, 3).unwrap();
        for n in 1..=3 {
            assert!(to_f64(&(&exact[n] - &trunc[n])).abs() < 1e-15);
        }
    }

    #[test]
    fn lyapunov_examples() {
        let m = moments_rec1(50);
        let p = lyapunov_profile(&m);
        assert_eq!(p[0], 1.0);
        assert!((p[3] - 1.508).abs() < 1e-3);
        assert!((p[49] - 2.49836671906885).abs() < 1e-12, "{}", p[49]);
        assert!(p.iter().all(|&v| v <= 3.0));
    }

    #[test]
    fn uniform_comparison_ratio() {
        let rows = uniform_cumulant_comparison(2, 6).unwrap();
        for r in &rows {
            let four = int_pow(4, r.n as u64);
            assert_eq!(r.ratio, Rational::new(four.clone(), four - 1u32));
        }
        // uniform on [-3/2, 3/2] has variance 3/4
        assert_eq!(rows[0].uniform, rat(3, 4));
    }

    #[test]
    fn grid_rejects_bad_parameters() {
        assert!(density_grid(2, 256, 10).is_err());
        assert!(density_grid(2, 1025, 10).is_err());
        assert!(density_grid(2, 1024, 0).is_err());
        assert!(density_grid(1, 1024, 5).is_err());
    }

    #[test]
    fn one_iteration_is_two_uniforms() {
        let g = density_grid(2, 4096, 1).unwrap();
        assert!(g.mass_outside(-2.25 - g.h, 2.25 + g.h) == 0.0);
        // U_1/2 + U_2/4: flat top 1/3 on |x| <= 3/4, linear to 0 at 9/4
        let exact = |x: f64| {
            let ax = x.abs();
            if ax <= 0.75 {
                1.0 / 3.0
            } else if ax <= 2.25 {
                (2.25 - ax) / 4.5
            } else {
                0.0
            }
        };
        for (x, g) in g.x.iter().zip(&g.pdf) {
            assert!((g - exact(*x)).abs() < 1e-12, "x={x}: {g}");
        }
        assert!((g.integral() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn reference_grid_properties() {
        let g = density_grid(2, 4096, 24).unwrap();
        assert!((g.integral() - 1.0).abs() < 1e-9);
        assert!((g.moment(2) - 1.0).abs() < 1e-4);
        assert!((g.moment(4) - 2.28).abs() < 1e-3);
        assert!(g.symmetry_defect() < 1e-12);
        assert!(g.cdf_monotonicity_defect() < 1e-14);
        assert!(g.cdf[0] <= g.truncation_bound + 1e-15);
        assert!(1.0 - g.cdf[g.grid_m] <= g.truncation_bound + 1e-14);
        assert!((g.cdf_at(0.0) - 0.5).abs() < 1e-12);
        assert!(g.pdf.iter().all(|v| *v >= 0.0 && v.is_finite()));
    }

    #[test]
    fn mapped_unit_grid_matches_direct_at_a2() {
        // V* summands are one-signed, so truncation shifts the centre by ~a^-K
        let v = DensityGrid::unit(2, 2048, 40).unwrap();
        assert!((v.integral() - 1.0).abs() < 1e-9);
        let (c, _) = shift_scale_maps(2, 0.0, &v).unwrap();
        assert!((c - 0.5).abs() <= v.truncation_bound + 1e-14, "{c}");
        assert_eq!(shift_scale_maps(2, -3.0, &v).unwrap(), (0.0, 0.0));
        assert_eq!(shift_scale_maps(2, 4.0, &v).unwrap(), (1.0, 0.0));
        let direct = density_grid(2, 2048, 40).unwrap();
        let (g1, _) = shift_scale_maps(2, 1.0, &v).unwrap();
        assert!((g1 - direct.cdf_at(1.0)).abs() < 1e-6);
        assert!(shift_scale_maps(3, 0.0, &v).is_err());
    }

    #[test]
    fn shift_scale_consistency_a3() {
        let r = shift_scale_consistency(3, 2048, 20).unwrap();
        assert!(r.passes(), "{r:?}");
    }

    #[test]
    fn csv_and_sidecar() {
        let g = density_grid(2, 512, 3).unwrap();
        let csv = g.to_csv();
        assert!(csv.starts_with("x,pdf,cdf\n"));
        assert_eq!(csv.lines().count(), 514);
        let v: serde_json::Value = serde_json::from_str(&g.sidecar_json()).unwrap();
        assert_eq!(v["a"], 2);
        assert_eq!(v["grid_M"], 512);
        assert_eq!(v["iters"], 3);
        assert!(v["truncation_bound"].as_f64().unwrap() >= 0.0);
    }

    #[test]
    fn grid_is_deterministic() {
        let a = density_grid(3, 1024, 12).unwrap();
        let b = density_grid(3, 1024, 12).unwrap();
        assert_eq!(a, b);
    }
}

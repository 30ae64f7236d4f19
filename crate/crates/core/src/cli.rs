//! The `partlim` command line: `coeffs`, `dist`, `limit`, `sample`, `verify`.
//!
//! Exit codes: 0 success, 1 usage or invalid parameters, 2 a verification,
//! validation or I/O failure. Results go to `out`, diagnostics to `err`.

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use crate::coeffs::{
    brute_force_coeffs_with_budget, encode_cache, expand_coeffs_with_budget, oeis_crosscheck,
    read_bfile, read_cache, write_cache, CoeffTable, RowStatus, DEFAULT_ENUMERATION_BUDGET,
    DEFAULT_MEMORY_BUDGET,
};
use crate::distn::{clt_diagnostics, mean_variance, pmf, standardized_cumulants};
use crate::exactnum::{decimal, decimal12, Rational};
use crate::limitlaw::{
    limit_cumulants, lyapunov_profile, DensityGrid, Recurrence, DEFAULT_GRID_M, DEFAULT_ITERS,
};
use crate::montecarlo::{
    raw_moment_check, sample_zn_bernoulli, sample_zn_direct, sample_zstar, zn_moment_checks,
    SampleBatch,
};
use crate::verify::{run_suite, Status, Suite, VerifyOptions, SCHEMA_VERSION};
use crate::{Error, Result};

pub const CACHE_DIR_ENV: &str = "PARTLIM_CACHE_DIR";
const DEFAULT_CACHE_DIR: &str = ".partlim-cache";

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, ValueEnum)]
pub enum Format {
    #[default]
    Csv,
    Json,
}

#[derive(Debug, Parser)]
#[command(
    name = "partlim",
    version,
    about = "Restricted-partition coefficients, the sums Z_N(a) and their limit law"
)]
struct Cli {
    #[command(flatten)]
    global: GlobalArgs,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Args)]
struct GlobalArgs {
    /// Output format.
    #[arg(long, value_enum, default_value_t = Format::Csv, global = true)]
    format: Format,
    /// Coefficient cache directory (overrides PARTLIM_CACHE_DIR).
    #[arg(long, global = true)]
    cache_dir: Option<PathBuf>,
    /// Longest coefficient row to build, in entries.
    #[arg(long, global = true, default_value_t = DEFAULT_MEMORY_BUDGET)]
    memory_budget: u128,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Coefficient row alpha_k^(N)(a).
    Coeffs(CoeffsArgs),
    /// Exact law of Z_N(a): pmf, moments, cumulants, CLT diagnostics.
    Dist(DistArgs),
    /// Limit law Z*(a): cumulants, moments, density grid.
    Limit(LimitArgs),
    /// Seeded samples of Z_N(a) or truncated Z*(a).
    Sample(SampleArgs),
    /// Identity and oracle batteries.
    Verify(VerifyArgs),
}

#[derive(Debug, Args)]
struct CoeffsArgs {
    #[arg(short = 'a', default_value_t = 2)]
    a: u64,
    #[arg(short = 'N')]
    n: u32,
    /// Also enumerate tuples and diff against the expansion.
    #[arg(long)]
    oracle: bool,
    /// Cross-check rows 1..=N against an OEIS b-file (base 2).
    #[arg(long, value_name = "PATH")]
    oeis: Option<PathBuf>,
    /// Write the row in the cache file format.
    #[arg(long, value_name = "PATH")]
    out: Option<PathBuf>,
    /// Read the row from the cache directory, computing and storing it on a miss.
    #[arg(long)]
    cache: bool,
}

#[derive(Debug, Args)]
struct DistArgs {
    #[arg(short = 'a', default_value_t = 2)]
    a: u64,
    #[arg(short = 'N')]
    n: u32,
    #[arg(long)]
    pmf: bool,
    #[arg(long)]
    moments: bool,
    /// Standardized cumulants kappa_2 .. kappa_{2 n_max}.
    #[arg(long, value_name = "N_MAX")]
    cumulants: Option<usize>,
    /// Feller, Lindeberg and UAN diagnostics at this eps.
    #[arg(long, value_name = "EPS", allow_negative_numbers = true)]
    diagnostics: Option<f64>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Method {
    Rec1,
    Rec2,
    Rec3,
    All,
}

#[derive(Debug, Args)]
struct LimitArgs {
    #[arg(short = 'a', default_value_t = 2)]
    a: u64,
    /// Moments m_2 .. m_{2 n_max}.
    #[arg(long, value_name = "N_MAX")]
    moments: Option<usize>,
    #[arg(long, value_enum, default_value_t = Method::Rec1)]
    method: Method,
    /// Limit cumulants kappa*_2 .. kappa*_{2 n_max}.
    #[arg(long, value_name = "N_MAX")]
    cumulants: Option<usize>,
    /// Tabulate the density and write CSV plus JSON sidecar.
    #[arg(long)]
    density: bool,
    #[arg(long = "grid", default_value_t = DEFAULT_GRID_M)]
    grid_m: usize,
    #[arg(long, default_value_t = DEFAULT_ITERS)]
    iters: u32,
    /// Tabulate V*(a) on [0, 1/(a-1)] instead of Z*(a).
    #[arg(long, requires = "density")]
    unit: bool,
    /// Output stem for the density files (`<stem>.csv`, `<stem>.json`).
    #[arg(long, value_name = "STEM")]
    out: Option<PathBuf>,
    /// (m_2n)^(1/2n) for n up to --moments (default 50).
    #[arg(long)]
    profile: bool,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum ModelArg {
    /// Z_N(a) from uniform summands.
    Zn,
    /// Z_N(2) from fair bits.
    ZnBernoulli,
    /// sum_{k<=K} U_k / a^k.
    Zstar,
}

#[derive(Debug, Args)]
struct SampleArgs {
    #[arg(value_enum)]
    model: ModelArg,
    #[arg(short = 'a', default_value_t = 2)]
    a: u64,
    #[arg(short = 'N')]
    n: Option<u32>,
    #[arg(short = 'K')]
    k: Option<u32>,
    #[arg(short = 'c', long = "count", default_value_t = 100_000)]
    count: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Output stem for the batch files (`<stem>.csv`, `<stem>.json`).
    #[arg(long, value_name = "STEM")]
    out: Option<PathBuf>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum SuiteArg {
    Appendix,
    Cumulants,
    Recurrences,
    Convergence,
    All,
}

#[derive(Debug, Args)]
struct VerifyArgs {
    #[arg(value_enum, default_value_t = SuiteArg::All)]
    suite: SuiteArg,
    /// Largest N for the digit-sum identities.
    #[arg(long)]
    max_order: Option<u32>,
    /// Largest n for the moment recurrences.
    #[arg(long)]
    n_max: Option<usize>,
    #[arg(long = "grid")]
    grid_m: Option<usize>,
    #[arg(long)]
    iters: Option<u32>,
    /// Also write the JSON report here.
    #[arg(long, value_name = "PATH")]
    out: Option<PathBuf>,
}

/// Settings shared by every command.
#[derive(Clone, Debug, PartialEq)]
pub struct Config {
    pub cache_dir: PathBuf,
    pub memory_budget: u128,
    pub grid_m: usize,
    pub iters: u32,
    pub format: Format,
    pub seed: u64,
}

impl Default for Config {
    fn default() -> Self {
        Config {
            cache_dir: PathBuf::from(DEFAULT_CACHE_DIR),
            memory_budget: DEFAULT_MEMORY_BUDGET,
            grid_m: DEFAULT_GRID_M,
            iters: DEFAULT_ITERS,
            format: Format::Csv,
            seed: 0,
        }
    }
}

impl Config {
    /// Flag, then environment, then the default.
    pub fn resolve_cache_dir(flag: Option<PathBuf>, env: Option<OsString>) -> PathBuf {
        flag.or_else(|| env.filter(|v| !v.is_empty()).map(PathBuf::from))
            .unwrap_or_else(|| PathBuf::from(DEFAULT_CACHE_DIR))
    }
}

/// What a command reports besides its output.
enum Outcome {
    Ok,
    /// A verification failed; exit 2.
    Failed,
}

pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::InvalidArgument(_)
        | Error::BudgetExceeded { .. }
        | Error::DomainCoverage { .. }
        | Error::Overflow { .. } => 1,
        Error::MalformedBFile { .. }
        | Error::MalformedCache { .. }
        | Error::Io(_)
        | Error::Json(_) => 2,
    }
}

/// Parses `args` (including the program name) and runs the command.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    run_with_env(args, std::env::var_os(CACHE_DIR_ENV), out, err)
}

/// [`run`] with the cache-directory environment value passed explicitly.
pub fn run_with_env<I, T>(
    args: I,
    cache_env: Option<OsString>,
    out: &mut dyn Write,
    err: &mut dyn Write,
) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let rendered = e.render().to_string();
            let _ = if code == 0 {
                write!(out, "{rendered}")
            } else {
                write!(err, "{rendered}")
            };
            return code;
        }
    };
    if cli.global.memory_budget == 0 {
        let _ = writeln!(err, "error: --memory-budget must be > 0");
        return 1;
    }
    let config = Config {
        cache_dir: Config::resolve_cache_dir(cli.global.cache_dir.clone(), cache_env),
        memory_budget: cli.global.memory_budget,
        format: cli.global.format,
        ..Config::default()
    };
    let result = match cli.command {
        Command::Coeffs(a) => cmd_coeffs(&a, &config, out, err),
        Command::Dist(a) => cmd_dist(&a, &config, out),
        Command::Limit(a) => cmd_limit(&a, &config, out, err),
        Command::Sample(a) => cmd_sample(&a, &config, out, err),
        Command::Verify(a) => cmd_verify(&a, &config, out, err),
    };
    match result {
        Ok(Outcome::Ok) => 0,
        Ok(Outcome::Failed) => 2,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            exit_code(&e)
        }
    }
}

fn rat_json(r: &Rational) -> Value {
    json!({ "exact": r.to_string(), "decimal": decimal12(r) })
}

fn emit_json(out: &mut dyn Write, mut v: Value) -> Result<()> {
    if let Value::Object(map) = &mut v {
        map.insert("schema_version".into(), json!(SCHEMA_VERSION));
    }
    writeln!(out, "{}", serde_json::to_string_pretty(&v)?)?;
    Ok(())
}

fn join<T: ToString>(items: impl IntoIterator<Item = T>) -> String {
    items
        .into_iter()
        .map(|x| x.to_string())
        .collect::<Vec<_>>()
        .join(",")
}

fn validate_an(a: u64, n: u32) -> Result<()> {
    if a < 2 {
        return Err(Error::invalid(format!("base a = {a} must be >= 2")));
    }
    if n < 1 {
        return Err(Error::invalid(format!("order N = {n} must be >= 1")));
    }
    Ok(())
}

fn load_table(a: u64, n: u32, config: &Config, use_cache: bool, err: &mut dyn Write) -> Result<CoeffTable> {
    if !use_cache {
        return expand_coeffs_with_budget(a, n, config.memory_budget);
    }
    if let Some(t) = read_cache(&config.cache_dir, a, n)? {
        let _ = writeln!(err, "cache: hit {}", config.cache_dir.display());
        return Ok(t);
    }
    let t = expand_coeffs_with_budget(a, n, config.memory_budget)?;
    let path = write_cache(&config.cache_dir, &t)?;
    let _ = writeln!(err, "cache: wrote {}", path.display());
    Ok(t)
}

fn cmd_coeffs(args: &CoeffsArgs, config: &Config, out: &mut dyn Write, err: &mut dyn Write) -> Result<Outcome> {
    validate_an(args.a, args.n)?;
    let table = load_table(args.a, args.n, config, args.cache, err)?;
    let mut failed = false;
    let mut report = serde_json::Map::new();

    let oracle = if args.oracle {
        let brute = brute_force_coeffs_with_budget(args.a, args.n, DEFAULT_ENUMERATION_BUDGET)?;
        let first_diff = brute
            .row()
            .iter()
            .zip(table.row())
            .position(|(x, y)| x != y)
            .or((brute.len() != table.len()).then(|| brute.len().min(table.len())));
        failed |= first_diff.is_some();
        Some(first_diff)
    } else {
        None
    };

    let crosscheck = match &args.oeis {
        Some(path) => {
            if args.a != 2 {
                return Err(Error::invalid("--oeis cross-checks base 2 rows only"));
            }
            let bfile = read_bfile(path)?;
            let tables = (1..=args.n)
                .map(|n| expand_coeffs_with_budget(2, n, config.memory_budget))
                .collect::<Result<Vec<_>>>()?;
            let r = oeis_crosscheck(&tables, &bfile)?;
            let covered = r
                .rows
                .iter()
                .any(|row| matches!(row.status, RowStatus::Match | RowStatus::Partial { .. }));
            failed |= r.mismatches().next().is_some() || !covered;
            Some((r, covered))
        }
        None => None,
    };

    if let Some(path) = &args.out {
        if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
            std::fs::create_dir_all(dir)?;
        }
        std::fs::write(path, encode_cache(&table))?;
        let _ = writeln!(err, "wrote {}", path.display());
    }

    match config.format {
        Format::Csv => {
            writeln!(out, "{}", join(table.row()))?;
            if let Some(diff) = oracle {
                match diff {
                    None => writeln!(out, "oracle: MATCH")?,
                    Some(k) => writeln!(out, "oracle: MISMATCH at k={k}")?,
                }
            }
            if let Some((r, covered)) = &crosscheck {
                writeln!(
                    out,
                    "oeis: layout first_order={} offset={}",
                    r.layout.first_order, r.layout.offset
                )?;
                for row in &r.rows {
                    let s = match &row.status {
                        RowStatus::Match => "MATCH".to_string(),
                        RowStatus::Missing => "MISSING".to_string(),
                        RowStatus::Partial {
                            covered,
                            expected_len,
                        } => format!("PARTIAL {covered}/{expected_len}"),
                        RowStatus::Mismatch { k, expected, found } => {
                            format!("MISMATCH at k={k}: expected {expected}, found {found}")
                        }
                    };
                    writeln!(out, "oeis: N={} {s}", row.order)?;
                }
                let verdict = if r.mismatches().next().is_some() || !covered {
                    "MISMATCH"
                } else {
                    "MATCH"
                };
                writeln!(out, "oeis: {verdict}")?;
            }
        }
        Format::Json => {
            report.insert("a".into(), json!(args.a));
            report.insert("N".into(), json!(args.n));
            report.insert("total".into(), json!(table.total().to_string()));
            report.insert(
                "row".into(),
                Value::Array(table.row().iter().map(|v| json!(v.to_string())).collect()),
            );
            if let Some(diff) = oracle {
                report.insert(
                    "oracle".into(),
                    json!({ "match": diff.is_none(), "first_difference": diff }),
                );
            }
            if let Some((r, _)) = &crosscheck {
                report.insert("oeis".into(), serde_json::to_value(r)?);
            }
            emit_json(out, Value::Object(report))?;
        }
    }
    Ok(if failed { Outcome::Failed } else { Outcome::Ok })
}

fn cmd_dist(args: &DistArgs, config: &Config, out: &mut dyn Write) -> Result<Outcome> {
    validate_an(args.a, args.n)?;
    if let Some(eps) = args.diagnostics {
        if eps.is_nan() || eps <= 0.0 {
            return Err(Error::invalid(format!("eps = {eps} must be positive")));
        }
    }
    let show_moments =
        args.moments || !(args.pmf || args.cumulants.is_some() || args.diagnostics.is_some());
    let mut json_out = serde_json::Map::new();
    json_out.insert("a".into(), json!(args.a));
    json_out.insert("N".into(), json!(args.n));
    let mut sections: Vec<String> = Vec::new();

    if args.pmf {
        let table = expand_coeffs_with_budget(args.a, args.n, config.memory_budget)?;
        let p = pmf(&table);
        sections.push(format!(
            "{}\n{}",
            join(&p),
            join(p.iter().map(decimal12))
        ));
        json_out.insert("pmf".into(), Value::Array(p.iter().map(rat_json).collect()));
    }
    if show_moments {
        let (mu, var) = mean_variance(args.a, args.n)?;
        let mut s = String::from("quantity,exact,decimal\n");
        s += &format!("mean,{mu},{}\nvariance,{var},{}", decimal12(&mu), decimal12(&var));
        json_out.insert("mean".into(), rat_json(&mu));
        json_out.insert("variance".into(), rat_json(&var));
        if args.a == 2 {
            let c2 = &var * crate::exactnum::Integer::from(9);
            s += &format!("\nc_squared,{c2},{}", decimal12(&c2));
            json_out.insert("c_squared".into(), rat_json(&c2));
        }
        sections.push(s);
    }
    if let Some(n_max) = args.cumulants {
        let seq = standardized_cumulants(args.a, args.n, n_max)?;
        let mut s = String::from("order,exact,decimal");
        for (i, k) in seq.even.iter().enumerate() {
            s += &format!("\nkappa_{},{k},{}", 2 * i + 2, decimal12(k));
        }
        sections.push(s);
        json_out.insert(
            "standardized_cumulants".into(),
            Value::Array(
                seq.even
                    .iter()
                    .enumerate()
                    .map(|(i, k)| json!({ "order": 2 * i + 2, "value": rat_json(k) }))
                    .collect(),
            ),
        );
    }
    if let Some(eps) = args.diagnostics {
        let d = clt_diagnostics(args.a, args.n, eps)?;
        let mut s = format!("quantity,exact,decimal\neps,,{eps}");
        for (name, v) in [
            ("feller_ratio", &d.feller_ratio),
            ("lindeberg", &d.lindeberg),
            ("uan", &d.uan),
            ("max_point_mass", &d.max_point_mass),
        ] {
            s += &format!("\n{name},{v},{}", decimal12(v));
        }
        sections.push(s);
        json_out.insert(
            "diagnostics".into(),
            json!({
                "eps": eps,
                "feller_ratio": rat_json(&d.feller_ratio),
                "lindeberg": rat_json(&d.lindeberg),
                "uan": rat_json(&d.uan),
                "max_point_mass": rat_json(&d.max_point_mass),
            }),
        );
    }
    match config.format {
        Format::Csv => writeln!(out, "{}", sections.join("\n\n"))?,
        Format::Json => emit_json(out, Value::Object(json_out))?,
    }
    Ok(Outcome::Ok)
}

fn default_density_stem(a: u64, unit: bool, m: usize, iters: u32) -> PathBuf {
    let var = if unit { "vstar" } else { "zstar" };
    PathBuf::from(format!("partlim-{var}-a{a}-M{m}-T{iters}"))
}

fn cmd_limit(args: &LimitArgs, config: &Config, out: &mut dyn Write, err: &mut dyn Write) -> Result<Outcome> {
    if args.a < 2 {
        return Err(Error::invalid(format!("base a = {} must be >= 2", args.a)));
    }
    let nothing = args.moments.is_none() && args.cumulants.is_none() && !args.density && !args.profile;
    if nothing {
        return Err(Error::invalid(
            "choose at least one of --moments, --cumulants, --density, --profile",
        ));
    }
    let mut json_out = serde_json::Map::new();
    json_out.insert("a".into(), json!(args.a));
    let mut sections: Vec<String> = Vec::new();
    let mut failed = false;

    if let Some(n_max) = args.cumulants {
        let seq = limit_cumulants(args.a, n_max)?;
        let mut s = String::from("order,exact,decimal");
        for (i, k) in seq.even.iter().enumerate() {
            s += &format!("\nkappa*_{},{k},{}", 2 * i + 2, decimal12(k));
        }
        sections.push(s);
        json_out.insert(
            "limit_cumulants".into(),
            Value::Array(
                seq.even
                    .iter()
                    .enumerate()
                    .map(|(i, k)| json!({ "order": 2 * i + 2, "value": rat_json(k) }))
                    .collect(),
            ),
        );
    }

    if let Some(n_max) = args.moments {
        let methods: Vec<Recurrence> = match args.method {
            Method::Rec1 => vec![Recurrence::Rec1],
            Method::Rec2 => vec![Recurrence::Rec2],
            Method::Rec3 => vec![Recurrence::Rec3],
            Method::All if args.a == 2 => Recurrence::ALL.to_vec(),
            Method::All => vec![Recurrence::Rec1, Recurrence::Rec2],
        };
        let columns = methods
            .iter()
            .map(|m| m.run(args.a, n_max))
            .collect::<Result<Vec<_>>>()?;
        let agree = columns.windows(2).all(|w| w[0] == w[1]);
        let mut s = format!(
            "moment,{},decimal",
            join(methods.iter().map(|m| m.name()))
        );
        for n in 1..=n_max {
            s += &format!(
                "\nm_{},{},{}",
                2 * n,
                join(columns.iter().map(|c| &c[n])),
                decimal12(&columns[0][n])
            );
        }
        if methods.len() > 1 {
            s += if agree { "\nAGREE" } else { "\nDISAGREE" };
            failed |= !agree;
        }
        sections.push(s);
        let mut cols = serde_json::Map::new();
        for (m, c) in methods.iter().zip(&columns) {
            cols.insert(
                m.name().into(),
                Value::Array(c[1..].iter().map(rat_json).collect()),
            );
        }
        json_out.insert("moments".into(), Value::Object(cols));
        if methods.len() > 1 {
            json_out.insert("agree".into(), json!(agree));
        }
    }

    if args.profile {
        let n_max = args.moments.unwrap_or(50);
        let m = Recurrence::Rec1.run(args.a, n_max)?;
        let p = lyapunov_profile(&m);
        let mut s = String::from("n,m_2n_root");
        for (i, v) in p.iter().enumerate() {
            s += &format!("\n{},{}", i + 1, decimal(*v, 12));
        }
        sections.push(s);
        json_out.insert("lyapunov_profile".into(), json!(p));
    }

    if args.density {
        let grid = if args.unit {
            DensityGrid::unit(args.a, args.grid_m, args.iters)?
        } else {
            DensityGrid::limit(args.a, args.grid_m, args.iters)?
        };
        let stem = args
            .out
            .clone()
            .unwrap_or_else(|| default_density_stem(args.a, args.unit, args.grid_m, args.iters));
        let (csv, side) = grid.export(&stem)?;
        let _ = writeln!(err, "wrote {} and {}", csv.display(), side.display());
        let stats = [
            ("integral", grid.integral()),
            ("m_2", grid.moment(2)),
            ("m_4", grid.moment(4)),
            ("symmetry_defect", grid.symmetry_defect()),
            ("truncation_bound", grid.truncation_bound),
            ("h", grid.h),
        ];
        let mut s = String::from("quantity,value");
        for (k, v) in stats {
            s += &format!("\n{k},{v:e}");
        }
        sections.push(s);
        let mut d = serde_json::Map::new();
        for (k, v) in stats {
            d.insert(k.into(), json!(v));
        }
        d.insert("csv".into(), json!(csv.display().to_string()));
        d.insert("sidecar".into(), json!(side.display().to_string()));
        json_out.insert("density".into(), Value::Object(d));
    }

    match config.format {
        Format::Csv => writeln!(out, "{}", sections.join("\n\n"))?,
        Format::Json => emit_json(out, Value::Object(json_out))?,
    }
    Ok(if failed { Outcome::Failed } else { Outcome::Ok })
}

fn cmd_sample(args: &SampleArgs, config: &Config, out: &mut dyn Write, err: &mut dyn Write) -> Result<Outcome> {
    let need = |v: Option<u32>, flag: &str| {
        v.ok_or_else(|| Error::invalid(format!("{flag} is required for this model")))
    };
    let batch: SampleBatch = match args.model {
        ModelArg::Zn => sample_zn_direct(args.a, need(args.n, "-N")?, args.count, args.seed)?,
        ModelArg::ZnBernoulli => {
            sample_zn_bernoulli(args.a, need(args.n, "-N")?, args.count, args.seed)?
        }
        ModelArg::Zstar => sample_zstar(args.a, need(args.k, "-K")?, args.count, args.seed)?,
    };
    if let Some(stem) = &args.out {
        let (csv, side) = batch.export(stem)?;
        let _ = writeln!(err, "wrote {} and {}", csv.display(), side.display());
    }

    let rows: Vec<(&str, f64, f64, f64)> = match args.model {
        ModelArg::Zstar => {
            let xs = batch.as_f64();
            let law = crate::limitlaw::LimitLaw::new(args.a, 4)?;
            let m = |i: usize| crate::exactnum::to_f64(&law.moments[i]);
            let m2 = raw_moment_check(&xs, 2, m(1), m(2));
            let m4 = raw_moment_check(&xs, 4, m(2), m(4));
            vec![
                ("m_2", m2.estimate, m2.expected, m2.se),
                ("m_4", m4.estimate, m4.expected, m4.se),
            ]
        }
        _ => {
            let (mean, var) = zn_moment_checks(&batch)?;
            vec![
                ("mean", mean.estimate, mean.expected, mean.se),
                ("variance", var.estimate, var.expected, var.se),
            ]
        }
    };
    match config.format {
        Format::Csv => {
            writeln!(out, "model,{:?}", args.model)?;
            writeln!(out, "count,{}", batch.len())?;
            writeln!(out, "seed,{}", args.seed)?;
            writeln!(out, "statistic,estimate,expected,se")?;
            for (name, est, exp, se) in &rows {
                writeln!(out, "{name},{},{},{}", decimal(*est, 12), decimal(*exp, 12), decimal(*se, 6))?;
            }
        }
        Format::Json => {
            let mut stats = serde_json::Map::new();
            for (name, est, exp, se) in &rows {
                stats.insert(
                    (*name).into(),
                    json!({ "estimate": est, "expected": exp, "se": se }),
                );
            }
            let sidecar: Value = serde_json::from_str(&batch.sidecar_json())?;
            emit_json(out, json!({ "batch": sidecar, "statistics": stats }))?;
        }
    }
    Ok(Outcome::Ok)
}

fn cmd_verify(args: &VerifyArgs, config: &Config, out: &mut dyn Write, err: &mut dyn Write) -> Result<Outcome> {
    let mut opts = VerifyOptions::default();
    if let Some(n) = args.max_order {
        opts.appendix_order = n;
        opts.box_order = opts.box_order.min(n);
    }
    if let Some(n) = args.n_max {
        opts.recurrence_n_max = n;
    }
    if let Some(m) = args.grid_m {
        opts.grid_m = m;
    }
    if let Some(t) = args.iters {
        opts.iters = t;
    }
    let suite = match args.suite {
        SuiteArg::Appendix => Suite::Appendix,
        SuiteArg::Cumulants => Suite::Cumulants,
        SuiteArg::Recurrences => Suite::Recurrences,
        SuiteArg::Convergence => Suite::Convergence,
        SuiteArg::All => Suite::All,
    };
    let report = run_suite(suite, &opts)?;
    let text = serde_json::to_string_pretty(&report)?;
    if let Some(path) = &args.out {
        write_report(path, &text)?;
        let _ = writeln!(err, "wrote {}", path.display());
    }
    match config.format {
        Format::Json => writeln!(out, "{text}")?,
        Format::Csv => {
            writeln!(out, "check,status,detail")?;
            for c in &report.checks {
                let status = match c.status {
                    Status::Pass => "PASS",
                    Status::Fail => "FAIL",
                    Status::Info => "INFO",
                };
                writeln!(out, "{},{status},\"{}\"", c.name, c.detail.replace('"', "'"))?;
            }
            writeln!(out, "{}", if report.passed { "PASS" } else { "FAIL" })?;
        }
    }
    Ok(if report.passed { Outcome::Ok } else { Outcome::Failed })
}

fn write_report(path: &Path, text: &str) -> Result<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir)?;
    }
    std::fs::write(path, format!("{text}\n"))?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn run_args(args: &[&str]) -> (i32, String, String) {
        let mut out = Vec::new();
        let mut err = Vec::new();
        let mut argv = vec!["partlim"];
        argv.extend_from_slice(args);
        let code = run_with_env(argv, None, &mut out, &mut err);
        (
            code,
            String::from_utf8(out).unwrap(),
            String::from_utf8(err).unwrap(),
        )
    }

    #[test]
    fn cache_dir_precedence() {
        let flag = Some(PathBuf::from("/flag"));
        let env = Some(OsString::from("/env"));
        assert_eq!(Config::resolve_cache_dir(flag, env.clone()), PathBuf::from("/flag"));
        assert_eq!(Config::resolve_cache_dir(None, env), PathBuf::from("/env"));
        assert_eq!(
            Config::resolve_cache_dir(None, Some(OsString::new())),
            PathBuf::from(DEFAULT_CACHE_DIR)
        );
        assert_eq!(Config::resolve_cache_dir(None, None), PathBuf::from(DEFAULT_CACHE_DIR));
    }

    #[test]
    fn coeffs_examples() {
        let (code, out, _) = run_args(&["coeffs", "-a", "2", "-N", "3"]);
        assert_eq!(code, 0);
        assert_eq!(out.trim(), "1,3,5,7,8,8,8,8,7,5,3,1");
        let (code, out, _) = run_args(&["coeffs", "-a", "2", "-N", "2", "--oracle"]);
        assert_eq!(code, 0);
        assert!(out.contains("MATCH"));
        let (code, _, err) = run_args(&["coeffs", "-a", "2", "-N", "0"]);
        assert_eq!(code, 1, "{err}");
        let (code, _, _) = run_args(&["coeffs", "-a", "2"]);
        assert_eq!(code, 1);
    }

    #[test]
    fn help_and_version_exit_zero() {
        assert_eq!(run_args(&["--help"]).0, 0);
        assert_eq!(run_args(&["--version"]).0, 0);
        assert_eq!(run_args(&["bogus"]).0, 1);
    }

    #[test]
    fn budget_is_a_usage_error() {
        let (code, _, err) = run_args(&["--memory-budget", "10", "coeffs", "-N", "5"]);
        assert_eq!(code, 1);
        assert!(err.contains("budget"));
        assert_eq!(run_args(&["--memory-budget", "0", "coeffs", "-N", "2"]).0, 1);
    }

    #[test]
    fn dist_examples() {
        let (code, out, _) = run_args(&["dist", "-a", "2", "-N", "2", "--pmf"]);
        assert_eq!(code, 0);
        assert_eq!(out.lines().next().unwrap(), "1/8,1/4,1/4,1/4,1/8");
        let (_, out, _) = run_args(&["dist", "-a", "2", "-N", "5", "--cumulants", "4"]);
        assert!(out.contains("\nkappa_2,1,1.0"), "{out}");
        let (_, out, _) = run_args(&["dist", "-a", "2", "-N", "20", "--diagnostics", "0.1"]);
        let line = out.lines().find(|l| l.starts_with("feller_ratio")).unwrap();
        let v: f64 = line.rsplit(',').next().unwrap().parse().unwrap();
        assert!((v - 0.75).abs() < 1e-5);
        assert_eq!(run_args(&["dist", "-N", "3", "--diagnostics", "-1"]).0, 1);
    }

    #[test]
    fn dist_json_has_schema_version() {
        let (code, out, _) = run_args(&["--format", "json", "dist", "-N", "2", "--moments"]);
        assert_eq!(code, 0);
        let v: Value = serde_json::from_str(&out).unwrap();
        assert_eq!(v["schema_version"], SCHEMA_VERSION);
        assert_eq!(v["mean"]["exact"], "2");
        assert_eq!(v["variance"]["exact"], "3/2");
    }

    #[test]
    fn limit_examples() {
        let (code, out, _) = run_args(&["limit", "-a", "2", "--moments", "3", "--method", "all"]);
        assert_eq!(code, 0);
        assert!(out.contains("m_4,57/25,57/25,57/25,2.28"), "{out}");
        assert!(out.contains("AGREE"));
        let (_, out, _) = run_args(&["limit", "-a", "2", "--cumulants", "2"]);
        assert!(out.contains("kappa*_4,-18/25"));
        let (code, _, err) = run_args(&["limit", "-a", "3", "--moments", "2", "--method", "rec3"]);
        assert_eq!(code, 1);
        assert!(err.contains("rec3"));
    }

    #[test]
    fn limit_density_writes_artifacts() {
        let dir = tempfile::tempdir().unwrap();
        let stem = dir.path().join("g");
        let (code, _, _) = run_args(&[
            "limit", "--density", "--grid", "1024", "--iters", "12", "--out",
            stem.to_str().unwrap(),
        ]);
        assert_eq!(code, 0);
        let csv = std::fs::read_to_string(stem.with_extension("csv")).unwrap();
        assert!(csv.starts_with("x,pdf,cdf\n"));
        let side: Value =
            serde_json::from_str(&std::fs::read_to_string(stem.with_extension("json")).unwrap())
                .unwrap();
        assert_eq!(side["grid_M"], 1024);
        assert_eq!(run_args(&["limit", "--density", "--grid", "100"]).0, 1);
    }

    #[test]
    fn sample_is_deterministic() {
        let args = ["sample", "zn", "-a", "2", "-N", "5", "-c", "20000", "--seed", "7"];
        let (code, first, _) = run_args(&args);
        assert_eq!(code, 0);
        assert_eq!(first, run_args(&args).1);
        assert!(first.contains("mean,"));
        let (code, _, _) = run_args(&["sample", "zstar", "-a", "2", "-c", "10"]);
        assert_eq!(code, 1);
    }

    #[test]
    fn coeffs_cache_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let d = dir.path().to_str().unwrap();
        let (code, first, err) = run_args(&["--cache-dir", d, "coeffs", "-a", "3", "-N", "3", "--cache"]);
        assert_eq!(code, 0);
        assert!(err.contains("wrote"));
        let (code, second, err) = run_args(&["--cache-dir", d, "coeffs", "-a", "3", "-N", "3", "--cache"]);
        assert_eq!(code, 0);
        assert!(err.contains("hit"));
        assert_eq!(first, second);
        let path = crate::coeffs::cache_path(dir.path(), 3, 3);
        std::fs::write(&path, "garbage\n").unwrap();
        let (code, _, _) = run_args(&["--cache-dir", d, "coeffs", "-a", "3", "-N", "3", "--cache"]);
        assert_eq!(code, 2);
    }

    #[test]
    fn oeis_crosscheck_exit_codes() {
        let dir = tempfile::tempdir().unwrap();
        let tables: Vec<_> = (1..=4).map(|n| crate::coeffs::expand_coeffs(2, n).unwrap()).collect();
        let good = dir.path().join("good.txt");
        std::fs::write(&good, crate::coeffs::encode_bfile(&tables, 1)).unwrap();
        let (code, out, _) = run_args(&["coeffs", "-N", "4", "--oeis", good.to_str().unwrap()]);
        assert_eq!(code, 0, "{out}");
        assert!(out.contains("oeis: MATCH"));
        let bad = dir.path().join("bad.txt");
        let text = crate::coeffs::encode_bfile(&tables, 1).replace("\n13 8\n", "\n13 9\n");
        std::fs::write(&bad, text).unwrap();
        let (code, out, _) = run_args(&["coeffs", "-N", "4", "--oeis", bad.to_str().unwrap()]);
        assert_eq!(code, 2);
        assert!(out.contains("MISMATCH"));
    }
}

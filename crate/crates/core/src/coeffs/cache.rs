//! On-disk coefficient cache: one text file per `(a, N)`.
//!
//! ```text
//! partlim-coeffs v1 a=<a> N=<N> len=<L>
//! <alpha_0>
//! ...
//! <alpha_{L-1}>
//! ```

use std::fmt::Write as _;
use std::io::Write as _;
use std::path::{Path, PathBuf};

use num_traits::Zero;

use super::{row_len, total_count, CoeffTable};
use crate::exactnum::Integer;
use crate::{Error, Result};

const MAGIC: &str = "partlim-coeffs v1";

pub fn cache_path(dir: impl AsRef<Path>, a: u64, n: u32) -> PathBuf {
    dir.as_ref().join(format!("coeffs-a{a}-N{n}.txt"))
}

pub fn encode_cache(table: &CoeffTable) -> String {
    let mut out = String::with_capacity(table.len() * 8 + 64);
    let _ = writeln!(
        out,
        "{MAGIC} a={} N={} len={}",
        table.base(),
        table.order(),
        table.len()
    );
    for v in table.row() {
        let _ = writeln!(out, "{v}");
    }
    out
}

fn header_field<'a>(token: Option<&'a str>, key: &str) -> Option<&'a str> {
    token?.strip_prefix(key)?.strip_prefix('=')
}

/// Parses a cache file; `path` only labels errors.
pub fn decode_cache(text: &str, path: &Path) -> Result<CoeffTable> {
    let bad = |reason: String| Error::MalformedCache {
        path: path.to_path_buf(),
        reason,
    };
    let mut lines = text.lines();
    let header = lines.next().ok_or_else(|| bad("empty file".into()))?;
    let rest = header
        .strip_prefix(MAGIC)
        .ok_or_else(|| bad(format!("bad header {header:?}")))?;
    let mut tokens = rest.split_whitespace();
    let parse = |tok: Option<&str>, key: &str| -> Result<u64> {
        header_field(tok, key)
            .and_then(|v| v.parse().ok())
            .ok_or_else(|| bad(format!("header field {key} missing or invalid")))
    };
    let a = parse(tokens.next(), "a")?;
    let n = u32::try_from(parse(tokens.next(), "N")?).map_err(|_| bad("N too large".into()))?;
    let len = parse(tokens.next(), "len")? as usize;
    if tokens.next().is_some() {
        return Err(bad("trailing header fields".into()));
    }
    if a < 2 || n < 1 || row_len(a, n) != Some(len as u128) {
        return Err(bad(format!("len={len} inconsistent with a={a}, N={n}")));
    }
    let mut row = Vec::with_capacity(len);
    for (i, line) in lines.enumerate() {
        let v: Integer = line
            .parse()
            .map_err(|_| bad(format!("entry {i} is not a decimal integer")))?;
        row.push(v);
    }
    if row.len() != len {
        return Err(bad(format!("expected {len} entries, found {}", row.len())));
    }
    let sum = row.iter().fold(Integer::zero(), |acc, v| acc + v);
    if sum != total_count(a, n) {
        return Err(bad("entries do not sum to a^{N(N+1)/2}".into()));
    }
    Ok(CoeffTable::from_parts(a, n, row))
}

/// Writes `table` under `dir` via a temp file and rename; creates `dir`.
pub fn write_cache(dir: impl AsRef<Path>, table: &CoeffTable) -> Result<PathBuf> {
    let dir = dir.as_ref();
    std::fs::create_dir_all(dir)?;
    let path = cache_path(dir, table.base(), table.order());
    let tmp = path.with_extension(format!("tmp{}", std::process::id()));
    {
        let mut f = std::io::BufWriter::new(std::fs::File::create(&tmp)?);
        f.write_all(encode_cache(table).as_bytes())?;
        f.into_inner().map_err(|e| e.into_error())?.sync_all()?;
    }
    std::fs::rename(&tmp, &path)?;
    Ok(path)
}

/// Reads the cached row for `(a, N)`; `Ok(None)` when no file exists.
pub fn read_cache(dir: impl AsRef<Path>, a: u64, n: u32) -> Result<Option<CoeffTable>> {
    let path = cache_path(dir, a, n);
    match std::fs::read_to_string(&path) {
        Ok(text) => {
            let table = decode_cache(&text, &path)?;
            if table.base() != a || table.order() != n {
                return Err(Error::MalformedCache {
                    path,
                    reason: "header does not match file name".into(),
                });
            }
            Ok(Some(table))
        }
        Err(e) if e.kind() == std::io::ErrorKind::NotFound => Ok(None),
        Err(e) => Err(e.into()),
    }
}

//! OEIS b-files and the cross-check of base-2 rows against a flattened
//! triangle (A131823 lists the rows `N = 1, 2, ..` back to back).
//!
//! A b-file is plain text, one `index value` pair per line; blank lines and
//! lines starting with `#` are ignored.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::Path;

use serde::Serialize;

use super::CoeffTable;
use crate::exactnum::Integer;
use crate::{Error, Result};

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct BFile {
    entries: BTreeMap<i64, Integer>,
}

impl BFile {
    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn first_index(&self) -> Option<i64> {
        self.entries.keys().next().copied()
    }

    pub fn get(&self, index: i64) -> Option<&Integer> {
        self.entries.get(&index)
    }

    pub fn iter(&self) -> impl Iterator<Item = (i64, &Integer)> {
        self.entries.iter().map(|(k, v)| (*k, v))
    }
}

pub fn parse_bfile(text: &str) -> Result<BFile> {
    let mut entries = BTreeMap::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let malformed = |reason: &str| Error::MalformedBFile {
            line: i + 1,
            reason: reason.to_string(),
        };
        let mut fields = line.split_whitespace();
        let (Some(index), Some(value), None) = (fields.next(), fields.next(), fields.next()) else {
            return Err(malformed("expected exactly two fields"));
        };
        let index: i64 = index.parse().map_err(|_| malformed("index is not an integer"))?;
        let value: Integer = value.parse().map_err(|_| malformed("value is not an integer"))?;
        if entries.insert(index, value).is_some() {
            return Err(malformed("duplicate index"));
        }
    }
    Ok(BFile { entries })
}

pub fn read_bfile(path: impl AsRef<Path>) -> Result<BFile> {
    parse_bfile(&std::fs::read_to_string(path)?)
}

/// Writes rows back to back as a b-file starting at `first_index`.
pub fn encode_bfile(tables: &[CoeffTable], first_index: i64) -> String {
    let mut out = String::new();
    let mut index = first_index;
    for t in tables {
        for v in t.row() {
            let _ = writeln!(out, "{index} {v}");
            index += 1;
        }
    }
    out
}

/// Where rows sit in the flat sequence: row `first_order` begins at `offset`
/// and each row `N` occupies `2^{N+1} - N - 1` slots.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct RowLayout {
    pub first_order: u32,
    pub offset: i64,
}

impl RowLayout {
    fn row_len(order: u32) -> i64 {
        (1i64 << (order + 1)) - order as i64 - 1
    }

    /// Flat index of entry 0 of row `order`, if the layout contains it.
    pub fn row_start(&self, order: u32) -> Option<i64> {
        if order < self.first_order {
            return None;
        }
        let skipped: i64 = (self.first_order..order).map(Self::row_len).sum();
        Some(self.offset + skipped)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum RowStatus {
    Match,
    /// First disagreeing entry of the row.
    Mismatch {
        k: usize,
        expected: String,
        found: String,
    },
    /// Every entry present agrees, but the b-file stops part-way through.
    Partial { covered: usize, expected_len: usize },
    Missing,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct RowReport {
    pub order: u32,
    pub status: RowStatus,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct CrosscheckReport {
    pub layout: RowLayout,
    pub rows: Vec<RowReport>,
}

impl CrosscheckReport {
    pub fn all_match(&self) -> bool {
        self.rows.iter().all(|r| r.status == RowStatus::Match)
    }

    pub fn mismatches(&self) -> impl Iterator<Item = &RowReport> {
        self.rows
            .iter()
            .filter(|r| matches!(r.status, RowStatus::Mismatch { .. }))
    }
}

fn check_row(table: &CoeffTable, bfile: &BFile, layout: RowLayout) -> RowReport {
    let order = table.order();
    let Some(start) = layout.row_start(order) else {
        return RowReport {
            order,
            status: RowStatus::Missing,
        };
    };
    let mut covered = 0;
    for (k, expected) in table.row().iter().enumerate() {
        if let Some(found) = bfile.get(start + k as i64) {
            covered += 1;
            if found != expected {
                return RowReport {
                    order,
                    status: RowStatus::Mismatch {
                        k,
                        expected: expected.to_string(),
                        found: found.to_string(),
                    },
                };
            }
        }
    }
    let status = if covered == table.len() {
        RowStatus::Match
    } else if covered == 0 {
        RowStatus::Missing
    } else {
        RowStatus::Partial {
            covered,
            expected_len: table.len(),
        }
    };
    RowReport { order, status }
}

fn require_binary(tables: &[CoeffTable]) -> Result<()> {
    match tables.iter().find(|t| t.base() != 2) {
        Some(t) => Err(Error::invalid(format!(
            "b-file cross-check is base 2 only (got a={})",
            t.base()
        ))),
        None => Ok(()),
    }
}

pub fn oeis_crosscheck_with_layout(
    tables: &[CoeffTable],
    bfile: &BFile,
    layout: RowLayout,
) -> Result<CrosscheckReport> {
    require_binary(tables)?;
    let rows = tables.iter().map(|t| check_row(t, bfile, layout)).collect();
    Ok(CrosscheckReport { layout, rows })
}

/// Cross-checks `tables` against `bfile`, trying layouts whose first row is
/// order 0 (`[1]`) or order 1, anchored at the b-file's first index. The
/// layout with the most agreeing entries is reported; ties prefer order 1.
pub fn oeis_crosscheck(tables: &[CoeffTable], bfile: &BFile) -> Result<CrosscheckReport> {
    require_binary(tables)?;
    let offset = bfile.first_index().unwrap_or(0);
    let score = |layout: RowLayout| -> usize {
        tables
            .iter()
            .filter_map(|t| layout.row_start(t.order()).map(|s| (t, s)))
            .map(|(t, s)| {
                t.row()
                    .iter()
                    .enumerate()
                    .filter(|(k, v)| bfile.get(s + *k as i64) == Some(*v))
                    .count()
            })
            .sum()
    };
    let layout = [1, 0]
        .into_iter()
        .map(|first_order| RowLayout { first_order, offset })
        .max_by_key(|l| (score(*l), l.first_order))
        .expect("two candidates");
    oeis_crosscheck_with_layout(tables, bfile, layout)
}

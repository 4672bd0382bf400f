//! Plain-text table cache.
//!
//! ```text
//! PARTITION-TABLE v1 max_n=5
//! 1
//! 1
//! 2
//! 3
//! 5
//! 7
//! ```

use std::fs::{self, File};
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use num_bigint::BigUint;
use partlab_core::count::{CountTable, TableBudget};
use rayon::prelude::*;

/// Directory used when no cache path is given explicitly.
pub const CACHE_DIR_ENV: &str = "PARTLAB_CACHE_DIR";
const FILE_NAME: &str = "partition-table.txt";
const HEADER_PREFIX: &str = "PARTITION-TABLE v1 max_n=";

/// `$PARTLAB_CACHE_DIR/partition-table.txt`, if the variable is set.
pub fn default_path() -> Option<PathBuf> {
    std::env::var_os(CACHE_DIR_ENV).map(|dir| PathBuf::from(dir).join(FILE_NAME))
}

pub fn write_table(path: &Path, table: &CountTable) -> Result<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    }
    // Write then rename so a reader never sees a half-written table.
    let tmp = path.with_extension("tmp");
    let mut out = BufWriter::new(File::create(&tmp).with_context(|| format!("creating {}", tmp.display()))?);
    writeln!(out, "{HEADER_PREFIX}{}", table.max_n())?;
    for v in table.values() {
        writeln!(out, "{v}")?;
    }
    out.into_inner()?.sync_all()?;
    fs::rename(&tmp, path).with_context(|| format!("writing {}", path.display()))?;
    Ok(())
}

/// Reads a cache file and checks every entry against the recurrence.
pub fn read_table(path: &Path) -> Result<CountTable> {
    let file = File::open(path).with_context(|| format!("opening {}", path.display()))?;
    let mut lines = BufReader::new(file).lines();
    let header = lines.next().context("empty table file")??;
    let max_n: usize = header
        .strip_prefix(HEADER_PREFIX)
        .and_then(|n| n.trim().parse().ok())
        .with_context(|| format!("bad table header {header:?}"))?;
    let mut values = Vec::with_capacity(max_n + 1);
    for (i, line) in lines.enumerate() {
        let line = line?;
        let v: BigUint = line
            .trim()
            .parse()
            .with_context(|| format!("bad value on line {}", i + 2))?;
        values.push(v);
    }
    if values.len() != max_n + 1 {
        bail!("header says max_n={max_n} but the file holds {} values", values.len());
    }
    let chunk = 4096;
    (1..values.len())
        .step_by(chunk)
        .collect::<Vec<_>>()
        .into_par_iter()
        .try_for_each(|start| CountTable::check_recurrence(&values, start..(start + chunk).min(values.len())))?;
    Ok(CountTable::from_checked_values(values)?)
}

/// A table covering `0..=max_n`.
///
/// With a cache path, an existing file is reused when it is large enough.
/// If `persist` is set, a smaller file is extended and written back.
pub fn obtain_table(max_n: usize, path: Option<&Path>, persist: bool, budget: TableBudget) -> Result<CountTable> {
    let cached = match path {
        Some(p) if p.exists() => Some(read_table(p)?),
        _ => None,
    };
    let mut table = match cached {
        Some(t) if t.max_n() >= max_n && !persist => return Ok(t),
        Some(t) => t,
        None => CountTable::build(0, budget)?,
    };
    if table.max_n() < max_n {
        eprintln!("building partition table to n={max_n}");
        table.extend_to(max_n, budget)?;
        if let (Some(p), true) = (path, persist) {
            write_table(p, &table)?;
        }
    }
    Ok(table)
}

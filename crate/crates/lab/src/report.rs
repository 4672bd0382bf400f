//! CSV and JSON renderings of results.
//!
//! Exact rationals are always written as `"num/den"` strings. In JSON a
//! `null` log2 bound stands for `-inf` (a side that is zero or negative).

use std::fs;
use std::io::Write;
use std::path::Path;

use anyhow::{Context, Result};
use clap::ValueEnum;
use partlab_core::bounds::{BoundVerdict, RatioRow};
use partlab_core::moments::{CovarianceEntry, DependenceWitness, MomentSummary};
use partlab_core::rational::{to_num_den, ExactRational};
use partlab_core::sampler::SampleStats;
use serde::Serialize;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

/// Writes to `path`, or to stdout when there is none.
pub fn emit(path: Option<&Path>, text: &str) -> Result<()> {
    match path {
        Some(p) => fs::write(p, text).with_context(|| format!("writing {}", p.display())),
        None => {
            let mut out = std::io::stdout().lock();
            out.write_all(text.as_bytes())?;
            out.flush()?;
            Ok(())
        }
    }
}

fn to_csv<T: Serialize>(rows: &[T]) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    for row in rows {
        w.serialize(row)?;
    }
    Ok(String::from_utf8(w.into_inner()?)?)
}

fn to_json<T: Serialize + ?Sized>(value: &T) -> Result<String> {
    let mut s = serde_json::to_string_pretty(value)?;
    s.push('\n');
    Ok(s)
}

/// Renders `rows` as CSV, or as a JSON array.
pub fn render<T: Serialize>(rows: &[T], format: Format) -> Result<String> {
    match format {
        Format::Csv => to_csv(rows),
        Format::Json => to_json(rows),
    }
}

fn q(v: &ExactRational) -> String {
    to_num_den(v)
}

#[derive(Debug, Serialize)]
pub struct VerdictRow {
    pub subject: &'static str,
    pub params: String,
    pub lhs_log2_lo: f64,
    pub lhs_log2_hi: f64,
    pub rhs_log2_lo: f64,
    pub rhs_log2_hi: f64,
    pub verdict: &'static str,
}

impl From<&BoundVerdict> for VerdictRow {
    fn from(v: &BoundVerdict) -> Self {
        VerdictRow {
            subject: v.subject.name(),
            params: v.params.to_string(),
            lhs_log2_lo: v.lhs_log2.0,
            lhs_log2_hi: v.lhs_log2.1,
            rhs_log2_lo: v.rhs_log2.0,
            rhs_log2_hi: v.rhs_log2.1,
            verdict: v.verdict.as_str(),
        }
    }
}

pub fn verdict_rows(verdicts: &[BoundVerdict]) -> Vec<VerdictRow> {
    verdicts.iter().map(VerdictRow::from).collect()
}

#[derive(Debug, Serialize)]
pub struct RatioRecord {
    pub n: u64,
    pub ratio_lo: f64,
    pub ratio_hi: f64,
    pub above_c_star: &'static str,
    pub below_c_upper: &'static str,
}

impl From<&RatioRow> for RatioRecord {
    fn from(r: &RatioRow) -> Self {
        RatioRecord {
            n: r.n,
            ratio_lo: r.ratio.0,
            ratio_hi: r.ratio.1,
            above_c_star: r.above_c_star.as_str(),
            below_c_upper: r.below_c_upper.as_str(),
        }
    }
}

/// One row per tested `d`; a single row with empty tail columns if none.
#[derive(Debug, Serialize)]
pub struct SampleRow {
    pub m: u64,
    pub seed: u64,
    pub trials: u64,
    pub mean_n: f64,
    pub var_n: f64,
    pub se_mean: f64,
    pub d: Option<String>,
    pub relaxed_hits: Option<u64>,
    pub relaxed_fraction: Option<f64>,
    pub exact_sd_hits: Option<u64>,
    pub exact_sd_fraction: Option<f64>,
}

pub fn sample_rows(stats: &SampleStats) -> Vec<SampleRow> {
    let base = |i: Option<usize>| SampleRow {
        m: stats.m,
        seed: stats.seed,
        trials: stats.trials,
        mean_n: stats.mean_n,
        var_n: stats.var_n,
        se_mean: stats.se_mean,
        d: i.map(|i| stats.tails[i].d.to_string()),
        relaxed_hits: i.map(|i| stats.tails[i].relaxed_hits),
        relaxed_fraction: i.map(|i| stats.relaxed_fraction(i)),
        exact_sd_hits: i.map(|i| stats.tails[i].exact_sd_hits),
        exact_sd_fraction: i.map(|i| stats.exact_sd_fraction(i)),
    };
    if stats.tails.is_empty() {
        vec![base(None)]
    } else {
        (0..stats.tails.len()).map(|i| base(Some(i))).collect()
    }
}

/// A closed-form value next to its enumerated counterpart.
#[derive(Debug, Serialize)]
pub struct MomentRow {
    pub quantity: String,
    pub closed_form: String,
    pub enumerated: Option<String>,
    pub equal: Option<bool>,
}

/// Lines up closed-form and enumerated moments; `enumerated` may be absent.
pub fn moment_rows(closed: &MomentSummary, enumerated: Option<&MomentSummary>) -> Vec<MomentRow> {
    let mut rows = Vec::new();
    let mut push = |quantity: String, c: &ExactRational, e: Option<&ExactRational>| {
        rows.push(MomentRow {
            quantity,
            closed_form: q(c),
            enumerated: e.map(q),
            equal: e.map(|e| e == c),
        });
    };
    push("E[N]".into(), &closed.mean_n, enumerated.map(|e| &e.mean_n));
    push("Var N".into(), &closed.var_n, enumerated.map(|e| &e.var_n));
    push("E[Y]".into(), &closed.mean_y, enumerated.map(|e| &e.mean_y));
    push("Var Y".into(), &closed.var_y, enumerated.map(|e| &e.var_y));
    for (i, c) in closed.per_t.iter().enumerate() {
        let e = enumerated.map(|e| &e.per_t[i]);
        let t = c.t;
        push(format!("E[C_{t}]"), &c.mean_c, e.map(|e| &e.mean_c));
        push(format!("Var C_{t}"), &c.var_c, e.map(|e| &e.var_c));
        push(format!("E[X_{t}]"), &c.mean_x, e.map(|e| &e.mean_x));
        push(format!("Var X_{t}"), &c.var_x, e.map(|e| &e.var_x));
    }
    rows
}

#[derive(Debug, Serialize)]
pub struct CovarianceRecord {
    pub label: &'static str,
    pub t: u64,
    pub u: Option<u64>,
    pub covariance: String,
}

impl From<&CovarianceEntry> for CovarianceRecord {
    fn from(c: &CovarianceEntry) -> Self {
        CovarianceRecord {
            label: c.kind.label(),
            t: c.t,
            u: c.u,
            covariance: q(&c.covariance),
        }
    }
}

#[derive(Debug, Serialize)]
pub struct WitnessRecord {
    pub t: u64,
    pub u: u64,
    /// `P[C_u = 0 | C_t >= 1]`.
    pub conditional: String,
    /// `P[C_u = 0]`.
    pub marginal: String,
}

impl From<&DependenceWitness> for WitnessRecord {
    fn from(w: &DependenceWitness) -> Self {
        WitnessRecord {
            t: w.t,
            u: w.u,
            conditional: q(&w.conditional),
            marginal: q(&w.marginal),
        }
    }
}

/// Full JSON document for the `moments` subcommand.
#[derive(Debug, Serialize)]
pub struct MomentsReport {
    pub m: u64,
    pub moments: Vec<MomentRow>,
    pub covariances: Option<Vec<CovarianceRecord>>,
    pub all_uncorrelated: Option<bool>,
    pub dependence_witness: Option<WitnessRecord>,
}

impl MomentsReport {
    pub fn to_json(&self) -> Result<String> {
        to_json(self)
    }
}

//! Command-line front end.

use std::ffi::OsString;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Result};
use clap::{ArgGroup, Parser, Subcommand, ValueEnum};
use partlab_core::bounds::{eta_threshold, window, BoundChecker, BoundVerdict, ExplicitSweep, Verdict};
use partlab_core::count::{CountTable, TableBudget};
use partlab_core::model::{flip_process, flips_from_partition, partition_from_flips, CoinSequence, Partition};
use partlab_core::moments::{all_uncorrelated, dependence_witness, MomentSummary};
use partlab_core::rational::{floor, int, parse_rational, to_num_den, Deviation, ExactRational};
use partlab_core::Error as CoreError;
use serde::Serialize;

use crate::cache::{default_path, obtain_table};
use crate::parallel;
use crate::report::{self, emit, render, Format, MomentsReport, RatioRecord};

/// Process exit statuses.
pub mod exit {
    /// Every verdict holds, or the command is informational.
    pub const OK: u8 = 0;
    /// At least one verdict fails.
    pub const FAILS: u8 = 1;
    /// Bad flags or parameters; nothing was computed.
    pub const USAGE: u8 = 2;
    /// Some verdict stayed undecided at the highest precision.
    pub const INDETERMINATE: u8 = 3;
    /// IO or resource error.
    pub const ERROR: u8 = 4;
}

#[derive(Debug, Parser)]
#[command(name = "partlab", version, about = "Coin-flip partitions and lower bounds for p(n), checked exactly")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    /// Write the report here instead of stdout.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Report format; plain text for informational commands when omitted.
    #[arg(long, global = true, value_enum)]
    pub format: Option<Format>,
    /// Partition table cache file (default: $PARTLAB_CACHE_DIR/partition-table.txt).
    #[arg(long, global = true)]
    pub cache: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Suite {
    Window,
    Pointwise,
    Dagger,
    Explicit,
    Ratio,
    Upper,
    /// A deliberately false inequality, for testing exit statuses.
    #[value(hide = true)]
    Control,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Print p(n).
    Count {
        #[arg(long)]
        n: u64,
    },
    /// Build or extend the table of p(0..=max) and store it in the cache.
    Table {
        #[arg(long)]
        max: usize,
    },
    /// Map flips to a partition, or a partition back to flips.
    #[command(group(ArgGroup::new("input").required(true).args(["flips", "partition"])))]
    Model {
        /// Flip sequence over H and T, e.g. HTTHHTHHTH.
        #[arg(long)]
        flips: Option<String>,
        /// Partition such as [6,4,2,2]; needs --m.
        #[arg(long, requires = "m")]
        partition: Option<String>,
        #[arg(long)]
        m: Option<usize>,
    },
    /// Closed-form moments of N, optionally checked by enumerating all 2^m outcomes.
    Moments {
        #[arg(long)]
        m: u64,
        #[arg(long)]
        exact_enum: bool,
        /// Largest m allowed for enumeration.
        #[arg(long, default_value_t = partlab_core::moments::ENUMERATION_CAP)]
        cap: usize,
    },
    /// Monte Carlo moments and tail fractions of N.
    Sample {
        #[arg(long)]
        m: usize,
        #[arg(long)]
        trials: u64,
        #[arg(long)]
        seed: u64,
        /// Deviation d for tail fractions, e.g. sqrt(3) or 1.5; repeatable.
        #[arg(long = "d")]
        d: Vec<Deviation>,
    },
    /// Check an inequality over a range of m (window, pointwise, dagger) or n (the rest).
    Verify {
        #[arg(long, value_enum)]
        suite: Suite,
        /// Inclusive range a:b.
        #[arg(long, value_parser = parse_range)]
        range: (u64, u64),
        #[arg(long, default_value = "sqrt(3)")]
        d: Deviation,
        #[arg(long, default_value = "1/8", value_parser = parse_rational)]
        eta: ExactRational,
        /// For the dagger suite, also check m below the scanned threshold.
        #[arg(long)]
        raw: bool,
    },
    /// Print the scanned threshold for eta, or for eps over a table.
    #[command(group(ArgGroup::new("which").required(true).args(["eta", "epsilon"])))]
    Thresholds {
        #[arg(long, value_parser = parse_rational)]
        eta: Option<ExactRational>,
        #[arg(long, value_parser = parse_rational)]
        epsilon: Option<ExactRational>,
        /// Table size scanned for eps.
        #[arg(long, default_value_t = 10_000)]
        max: usize,
    },
}

fn parse_range(s: &str) -> Result<(u64, u64), String> {
    let (a, b) = s.split_once(':').ok_or_else(|| format!("expected a:b, got {s:?}"))?;
    let a: u64 = a.trim().parse().map_err(|e| format!("{a:?}: {e}"))?;
    let b: u64 = b.trim().parse().map_err(|e| format!("{b:?}: {e}"))?;
    if a > b {
        return Err(format!("empty range {a}:{b}"));
    }
    Ok((a, b))
}

/// Parses `args` (including the program name), runs, and maps the outcome
/// to an exit status.
pub fn main_with_args<I, T>(args: I) -> ExitCode
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(e.exit_code() as u8);
        }
    };
    match run(&cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(error_status(&e))
        }
    }
}

fn error_status(e: &anyhow::Error) -> u8 {
    match e.downcast_ref::<CoreError>() {
        Some(
            CoreError::Parse(_)
            | CoreError::Domain(_)
            | CoreError::PreconditionNotMet { .. }
            | CoreError::CapExceeded { .. }
            | CoreError::NotRepresentable { .. }
            | CoreError::InvalidPartition(_),
        ) => exit::USAGE,
        Some(CoreError::Indeterminate { .. }) => exit::INDETERMINATE,
        _ => exit::ERROR,
    }
}

fn status(verdicts: impl IntoIterator<Item = Verdict>) -> u8 {
    let mut code = exit::OK;
    for v in verdicts {
        match v {
            Verdict::Fails => return exit::FAILS,
            Verdict::Indeterminate => code = exit::INDETERMINATE,
            Verdict::Holds => {}
        }
    }
    code
}

struct Env<'a> {
    cli: &'a Cli,
}

impl Env<'_> {
    fn cache_path(&self) -> Option<PathBuf> {
        self.cli.cache.clone().or_else(default_path)
    }

    fn table(&self, max_n: u64, persist: bool) -> Result<CountTable> {
        let max_n = usize::try_from(max_n)?;
        obtain_table(max_n, self.cache_path().as_deref(), persist, TableBudget::default())
    }

    fn out(&self) -> Option<&Path> {
        self.cli.out.as_deref()
    }

    fn emit(&self, text: &str) -> Result<()> {
        emit(self.out(), text)
    }
}

pub fn run(cli: &Cli) -> Result<u8> {
    let env = Env { cli };
    match &cli.command {
        Command::Count { n } => count(&env, *n),
        Command::Table { max } => table(&env, *max),
        Command::Model { flips, partition, m } => model(&env, flips.as_deref(), partition.as_deref(), *m),
        Command::Moments { m, exact_enum, cap } => moments(&env, *m, *exact_enum, *cap),
        Command::Sample { m, trials, seed, d } => sample(&env, *m, *trials, *seed, d),
        Command::Verify { suite, range, d, eta, raw } => verify(&env, *suite, *range, d, eta, *raw),
        Command::Thresholds { eta, epsilon, max } => thresholds(&env, eta.as_ref(), epsilon.as_ref(), *max),
    }
}

fn count(env: &Env, n: u64) -> Result<u8> {
    let table = env.table(n, false)?;
    let p = table.get(n)?;
    #[derive(Serialize)]
    struct Row {
        n: u64,
        p: String,
    }
    let text = match env.cli.format {
        None => format!("{p}\n"),
        Some(f) => render(&[Row { n, p: p.to_string() }], f)?,
    };
    env.emit(&text)?;
    Ok(exit::OK)
}

fn table(env: &Env, max: usize) -> Result<u8> {
    let path = env.cache_path();
    let table = obtain_table(max, path.as_deref(), path.is_some(), TableBudget::default())?;
    if path.is_none() {
        eprintln!("no cache path given; the table was not stored");
    }
    let top = table.get(max as u64)?;
    #[derive(Serialize)]
    struct Row {
        max_n: usize,
        p_max: String,
        digits: usize,
    }
    let digits = top.to_string().len();
    let text = match env.cli.format {
        None => format!("max_n={max} digits={digits} p({max})={top}\n"),
        Some(f) => render(&[Row { max_n: max, p_max: top.to_string(), digits }], f)?,
    };
    env.emit(&text)?;
    Ok(exit::OK)
}

fn join<T: ToString>(xs: &[T]) -> String {
    xs.iter().map(T::to_string).collect::<Vec<_>>().join(",")
}

fn model(env: &Env, flips: Option<&str>, partition: Option<&str>, m: Option<usize>) -> Result<u8> {
    let seq: CoinSequence = match (flips, partition) {
        (Some(f), _) => f.parse()?,
        (None, Some(p)) => {
            let p: Partition = p.parse()?;
            flips_from_partition(&p, m.expect("clap requires --m"))?
        }
        (None, None) => unreachable!("clap requires one input"),
    };
    let part = partition_from_flips(&seq);
    let proc_ = flip_process(&seq);
    #[derive(Serialize)]
    struct Doc {
        flips: String,
        partition: Vec<u64>,
        heads_prefix: Vec<u64>,
        contributions: Vec<u64>,
        tails: u64,
        size: u64,
    }
    #[derive(Serialize)]
    struct Step {
        t: usize,
        flip: char,
        heads: u64,
        contribution: u64,
    }
    let text = match env.cli.format {
        None => {
            let mut s = String::new();
            writeln!(s, "flips: {seq}")?;
            writeln!(s, "partition: {part}")?;
            writeln!(s, "X: {}", join(&proc_.heads_prefix))?;
            writeln!(s, "C: {}", join(&proc_.contributions))?;
            writeln!(s, "Y: {}", proc_.tails_total)?;
            writeln!(s, "N: {}", proc_.total_size)?;
            s
        }
        Some(Format::Json) => serde_json::to_string_pretty(&Doc {
            flips: seq.to_string(),
            partition: part.parts().to_vec(),
            heads_prefix: proc_.heads_prefix.clone(),
            contributions: proc_.contributions.clone(),
            tails: proc_.tails_total,
            size: proc_.total_size,
        })? + "\n",
        Some(Format::Csv) => {
            let steps: Vec<Step> = seq
                .flips()
                .iter()
                .enumerate()
                .map(|(i, f)| Step {
                    t: i + 1,
                    flip: f.as_char(),
                    heads: proc_.heads_prefix[i + 1],
                    contribution: proc_.contributions[i],
                })
                .collect();
            render(&steps, Format::Csv)?
        }
    };
    env.emit(&text)?;
    Ok(exit::OK)
}

fn moments(env: &Env, m: u64, exact_enum: bool, cap: usize) -> Result<u8> {
    let closed = MomentSummary::closed_form(m);
    let mut code = exit::OK;
    let mut doc = MomentsReport {
        m,
        moments: Vec::new(),
        covariances: None,
        all_uncorrelated: None,
        dependence_witness: None,
    };
    if exact_enum {
        let limit = cap.min(62);
        if m > limit as u64 {
            return Err(CoreError::CapExceeded {
                what: "flip count for enumeration",
                requested: m,
                cap: limit as u64,
            }
            .into());
        }
        let sums = parallel::enumeration_sums(m as usize);
        let enumerated = sums.summary();
        let covariances = sums.covariances();
        let uncorrelated = all_uncorrelated(&covariances);
        doc.moments = report::moment_rows(&closed, Some(&enumerated));
        let agree = enumerated == closed;
        eprintln!(
            "m={m}: enumeration {} the closed forms; {} covariances, {}",
            if agree { "matches" } else { "DIFFERS FROM" },
            covariances.len(),
            if uncorrelated { "all zero" } else { "SOME NONZERO" }
        );
        if !agree || !uncorrelated {
            code = exit::FAILS;
        }
        doc.covariances = Some(covariances.iter().map(Into::into).collect());
        doc.all_uncorrelated = Some(uncorrelated);
        doc.dependence_witness = dependence_witness(m as usize, cap)?.as_ref().map(Into::into);
    } else {
        doc.moments = report::moment_rows(&closed, None);
    }
    let text = match env.cli.format.unwrap_or(Format::Csv) {
        Format::Csv => render(&doc.moments, Format::Csv)?,
        Format::Json => doc.to_json()?,
    };
    env.emit(&text)?;
    Ok(code)
}

fn sample(env: &Env, m: usize, trials: u64, seed: u64, ds: &[Deviation]) -> Result<u8> {
    if trials < 2 {
        return Err(CoreError::Domain("sample needs --trials >= 2".into()).into());
    }
    let stats = parallel::sample_stats(m, trials, seed, ds)?;
    let text = render(&report::sample_rows(&stats), env.cli.format.unwrap_or(Format::Csv))?;
    env.emit(&text)?;
    Ok(exit::OK)
}

/// Largest table index the suite will touch; validates parameters on the way.
fn table_extent(suite: Suite, (lo, hi): (u64, u64), d: &Deviation, eta: &ExactRational, raw: bool) -> Result<u64> {
    Ok(match suite {
        Suite::Window => (lo..=hi)
            .map(|m| window(m, d).map(|w| w.map_or(0, |(_, top)| top)))
            .try_fold(0, |acc, top| top.map(|t| acc.max(t)))?,
        Suite::Pointwise => {
            if lo < 3 {
                return Err(CoreError::Domain(format!("pointwise needs m >= 3, got {lo}")).into());
            }
            (lo..=hi).map(|m| BoundChecker::pointwise_argument(m, d)).max().unwrap_or(0)
        }
        Suite::Dagger => {
            let threshold = eta_threshold(eta)?.m;
            if !raw && lo < threshold {
                return Err(CoreError::PreconditionNotMet { m: lo, threshold }.into());
            }
            if lo == 0 {
                return Err(CoreError::Domain("dagger needs m >= 1".into()).into());
            }
            let hi_r = int(hi as i64);
            u64::try_from(floor(&(&hi_r * &hi_r * (eta + int(1)) / int(8))))?
        }
        Suite::Explicit | Suite::Control => {
            if lo < 2 {
                return Err(CoreError::Domain(format!("the explicit bound is checked for n >= 2, got {lo}")).into());
            }
            hi
        }
        Suite::Ratio | Suite::Upper => {
            if lo < 1 {
                return Err(CoreError::Domain("n must be at least 1".into()).into());
            }
            hi
        }
    })
}

fn verify(env: &Env, suite: Suite, range: (u64, u64), d: &Deviation, eta: &ExactRational, raw: bool) -> Result<u8> {
    let extent = table_extent(suite, range, d, eta, raw)?;
    let table = env.table(extent, false)?;
    let checker = BoundChecker::new(&table);
    let (lo, hi) = range;
    let format = env.cli.format.unwrap_or(Format::Csv);
    if suite == Suite::Ratio {
        let ns: Vec<u64> = (lo..=hi).collect();
        let rows: Vec<_> = {
            use rayon::prelude::*;
            ns.par_iter()
                .map(|&n| checker.ratio_rows(&[n]).map(|mut r| r.remove(0)))
                .collect::<partlab_core::Result<Vec<_>>>()?
        };
        let records: Vec<RatioRecord> = rows.iter().map(Into::into).collect();
        env.emit(&render(&records, format)?)?;
        let undecided = rows
            .iter()
            .any(|r| r.above_c_star == Verdict::Indeterminate || r.below_c_upper == Verdict::Indeterminate);
        return Ok(if undecided { exit::INDETERMINATE } else { exit::OK });
    }
    let verdicts: Vec<BoundVerdict> = match suite {
        Suite::Window => parallel::sweep(lo, hi, |m| checker.window_sum(m, d))?,
        Suite::Pointwise => parallel::sweep(lo, hi, |m| checker.pointwise(m, d))?,
        Suite::Dagger if raw => parallel::sweep(lo, hi, |m| checker.dagger_raw(m, eta))?,
        Suite::Dagger => parallel::sweep(lo, hi, |m| checker.dagger(m, eta))?,
        Suite::Explicit => parallel::explicit_sweep(&checker, lo, hi)?,
        Suite::Upper => parallel::sweep(lo, hi, |n| checker.upper(n))?,
        Suite::Control => parallel::sweep(lo, hi, |n| checker.control(n))?,
        Suite::Ratio => unreachable!(),
    };
    let summary = ExplicitSweep::from_verdicts(verdicts);
    eprintln!(
        "{}: {} Holds, {} Fails, {} Indeterminate; least log2 margin {:.6} at {}",
        format!("{suite:?}").to_lowercase(),
        summary.holds,
        summary.fails,
        summary.indeterminate,
        summary.min_margin,
        summary.verdicts.iter().find(|v| v.margin() == summary.min_margin).map_or(String::new(), |v| v.params.to_string()),
    );
    env.emit(&render(&report::verdict_rows(&summary.verdicts), format)?)?;
    Ok(status(summary.verdicts.iter().map(|v| v.verdict)))
}

fn thresholds(env: &Env, eta: Option<&ExactRational>, epsilon: Option<&ExactRational>, max: usize) -> Result<u8> {
    #[derive(Serialize)]
    struct Row {
        parameter: &'static str,
        value: String,
        threshold: u64,
        /// For eta: the condition also holds for the next 100 m.
        holds_next_100: Option<bool>,
        /// For eps: the scanned table size and the last failing n.
        scanned_max: Option<u64>,
        last_failure: Option<u64>,
    }
    let row = if let Some(eta) = eta {
        let t = eta_threshold(eta)?;
        Row {
            parameter: "eta",
            value: to_num_den(eta),
            threshold: t.m,
            holds_next_100: Some(t.holds_next_100),
            scanned_max: None,
            last_failure: None,
        }
    } else {
        let eps = epsilon.expect("clap requires one of --eta, --epsilon");
        if *eps <= int(0) {
            bail!(CoreError::Domain("eps must be positive".into()));
        }
        let table = env.table(max as u64, false)?;
        let t = BoundChecker::new(&table).star_threshold(eps)?;
        Row {
            parameter: "epsilon",
            value: to_num_den(eps),
            threshold: t.n,
            holds_next_100: None,
            scanned_max: Some(t.scanned_max),
            last_failure: t.last_failure,
        }
    };
    let text = match env.cli.format {
        None => {
            let mut s = format!("{}={} threshold={}", row.parameter, row.value, row.threshold);
            if let Some(h) = row.holds_next_100 {
                write!(s, " holds_next_100={h}")?;
            }
            if let Some(top) = row.scanned_max {
                write!(s, " scanned_max={top}")?;
                match row.last_failure {
                    Some(f) => write!(s, " last_failure={f}")?,
                    None => write!(s, " no_failure_found")?,
                }
            }
            s + "\n"
        }
        Some(f) => render(&[row], f)?,
    };
    env.emit(&text)?;
    Ok(exit::OK)
}

//! Command-line front end.
//!
//! Exit codes: 0 on success, 1 on usage or input errors, 2 on internal
//! failures (including a failed `selftest`).

use std::fs::File;
use std::io::{BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use crate::counting::{read_cache, write_cache, InjectionTable};
use crate::error::{usage, Error, Result};
use crate::generator::{sample_batch, Family, GenerationReport};
use crate::injection::PartialInjection;
use crate::oracle::{enumerate_admissible, enumerate_finite_index, selftest, stat, Metric};
use crate::random::RandomSource;

#[derive(Debug, Parser)]
#[command(
    name = "stallings",
    version,
    about = "Random subgroups of free groups via Stallings graphs"
)]
pub struct Cli {
    /// Report rejection counts and table loading on standard error.
    #[arg(long, global = true)]
    pub verbose: bool,

    /// File to load the table of partial-injection counts from, and to save
    /// it to after building.
    #[arg(long, global = true, value_name = "PATH")]
    pub table_cache: Option<PathBuf>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Print I_0..I_N, the numbers of partial injections.
    Table {
        #[arg(long)]
        n_max: usize,
        #[arg(long, value_enum, default_value_t = TableFormat::Text)]
        format: TableFormat,
    },
    /// Uniform random subgroups of size N, as Stallings graphs.
    Gen(GenArgs),
    /// Uniform random finite-index subgroups of index N.
    GenFi(GenArgs),
    /// A uniform random partial injection of size N.
    GenInjection {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long, value_enum, default_value_t = InjectionFormat::Json)]
        format: InjectionFormat,
    },
    /// Count size-N subgroups by exhaustive enumeration.
    Count {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        r: usize,
        /// Count finite-index subgroups instead.
        #[arg(long)]
        finite_index: bool,
    },
    /// Estimate a statistic of random subgroups or injections.
    Stats {
        #[arg(long, value_parser = parse_metric)]
        metric: Metric,
        #[arg(long)]
        n: usize,
        #[arg(long)]
        r: usize,
        #[arg(long)]
        trials: u64,
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Run the built-in invariant checks.
    Selftest,
}

#[derive(Debug, Args)]
pub struct GenArgs {
    #[arg(long)]
    pub n: usize,
    #[arg(long)]
    pub r: usize,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long, default_value_t = 1)]
    pub count: usize,
    #[arg(long, value_enum, default_value_t = GraphFormat::Json)]
    pub format: GraphFormat,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum TableFormat {
    Text,
    Json,
    Csv,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum GraphFormat {
    Json,
    Dot,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum InjectionFormat {
    Json,
}

fn parse_metric(s: &str) -> std::result::Result<Metric, String> {
    s.parse()
        .map_err(|_| "expected one of rank, connectivity, sequences, fi-accept".to_string())
}

/// `{"n": 3, "image": [2, null, 1]}`, 1-based.
#[derive(Debug, Serialize)]
struct InjectionJson {
    n: usize,
    image: Vec<Option<u32>>,
}

impl From<&PartialInjection> for InjectionJson {
    fn from(inj: &PartialInjection) -> Self {
        InjectionJson {
            n: inj.n(),
            image: inj.image().iter().map(|v| v.map(|v| v + 1)).collect(),
        }
    }
}

fn exit_code(e: &Error) -> i32 {
    match e {
        Error::Internal(_) => 2,
        _ => 1,
    }
}

/// Parses `argv` (program name first) and runs the command. Returns the
/// process exit code.
pub fn run<I, S>(argv: I) -> i32
where
    I: IntoIterator<Item = S>,
    S: Into<std::ffi::OsString> + Clone,
{
    let stdout = std::io::stdout();
    let stderr = std::io::stderr();
    let mut out = BufWriter::new(stdout.lock());
    let code = run_with(argv, &mut out, &mut stderr.lock());
    if out.flush().is_err() {
        return 2;
    }
    code
}

/// [`run`] with explicit output streams.
pub fn run_with<I, S>(argv: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = S>,
    S: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            let text = e.render().to_string();
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => {
                    let _ = write!(out, "{text}");
                    0
                }
                _ => {
                    let _ = write!(err, "{text}");
                    1
                }
            };
        }
    };
    match execute(&cli, out, err) {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            exit_code(&e)
        }
    }
}

fn io_error(e: std::io::Error) -> Error {
    Error::Internal(format!("output failed: {e}"))
}

fn resolve_seed(seed: Option<u64>, err: &mut dyn Write) -> u64 {
    seed.unwrap_or_else(|| {
        let s = rand::random::<u64>();
        let _ = writeln!(err, "seed: {s}");
        s
    })
}

fn require_rank(r: usize) -> Result<()> {
    if r < 2 {
        return Err(usage!("--r must be at least 2, got {r}"));
    }
    Ok(())
}

/// Loads the table from the cache if it is large enough, otherwise builds
/// it (and saves it when a cache path is given). A corrupt cache is rebuilt.
pub fn load_table(
    n_max: usize,
    cache: Option<&Path>,
    verbose: bool,
    err: &mut dyn Write,
) -> Result<InjectionTable> {
    if let Some(path) = cache.filter(|p| p.exists()) {
        let loaded = File::open(path)
            .map_err(|e| Error::Data(e.to_string()))
            .and_then(|f| read_cache(BufReader::new(f)));
        match loaded {
            Ok(table) if table.n_max() >= n_max => {
                if verbose {
                    let _ = writeln!(err, "table: loaded n_max = {} from cache", table.n_max());
                }
                return Ok(table);
            }
            Ok(table) => {
                if verbose {
                    let _ = writeln!(
                        err,
                        "table: cache holds n_max = {}, rebuilding",
                        table.n_max()
                    );
                }
            }
            Err(e) => {
                let _ = writeln!(err, "warning: ignoring table cache {}: {e}", path.display());
            }
        }
    }
    let table = InjectionTable::build(n_max);
    if verbose {
        let _ = writeln!(err, "table: built n_max = {n_max}");
    }
    if let Some(path) = cache {
        let saved = File::create(path).and_then(|f| write_cache(&table, BufWriter::new(f)));
        if let Err(e) = saved {
            let _ = writeln!(
                err,
                "warning: could not write table cache {}: {e}",
                path.display()
            );
        }
    }
    Ok(table)
}

fn write_reports(
    reports: &[GenerationReport],
    format: GraphFormat,
    verbose: bool,
    out: &mut dyn Write,
    err: &mut dyn Write,
) -> Result<()> {
    for rep in reports {
        if verbose {
            let _ = writeln!(
                err,
                "draw {}: {} rejections",
                rep.stream.unwrap_or(0),
                rep.rejections
            );
        }
        match format {
            GraphFormat::Json => writeln!(out, "{}", rep.graph.to_json()),
            GraphFormat::Dot => write!(out, "{}", rep.graph.to_dot()),
        }
        .map_err(io_error)?;
    }
    Ok(())
}

fn execute(cli: &Cli, out: &mut dyn Write, err: &mut dyn Write) -> Result<i32> {
    let cache = cli.table_cache.as_deref();
    match &cli.command {
        Command::Table { n_max, format } => {
            let table = load_table(*n_max, cache, cli.verbose, err)?;
            let values = || table.iter().take(n_max + 1).enumerate();
            match format {
                TableFormat::Text => {
                    for (k, v) in values() {
                        writeln!(out, "{k} {v}").map_err(io_error)?;
                    }
                }
                TableFormat::Csv => {
                    writeln!(out, "k,value").map_err(io_error)?;
                    for (k, v) in values() {
                        writeln!(out, "{k},{v}").map_err(io_error)?;
                    }
                }
                TableFormat::Json => {
                    let strings: Vec<String> = table
                        .iter()
                        .take(n_max + 1)
                        .map(|v| v.to_string())
                        .collect();
                    let text = serde_json::to_string(&strings)
                        .map_err(|e| Error::Internal(e.to_string()))?;
                    writeln!(out, "{text}").map_err(io_error)?;
                }
            }
        }
        Command::Gen(args) | Command::GenFi(args) => {
            require_rank(args.r)?;
            if args.n == 0 || args.count == 0 {
                return Err(usage!("--n and --count must be at least 1"));
            }
            let family = match &cli.command {
                Command::Gen(_) => Family::Admissible,
                _ => Family::FiniteIndex,
            };
            let seed = resolve_seed(args.seed, err);
            let table = match family {
                Family::Admissible => load_table(args.n, cache, cli.verbose, err)?,
                Family::FiniteIndex => InjectionTable::build(0),
            };
            let reports = sample_batch(family, args.n, args.r, args.count, &table, seed)?;
            write_reports(&reports, args.format, cli.verbose, out, err)?;
        }
        Command::GenInjection { n, seed, format } => {
            let seed = resolve_seed(*seed, err);
            let table = load_table(*n, cache, cli.verbose, err)?;
            let mut src = RandomSource::new(seed);
            let inj = crate::injection::random_partial_injection(*n, &table, &mut src)?;
            match format {
                InjectionFormat::Json => {
                    let text = serde_json::to_string(&InjectionJson::from(&inj))
                        .map_err(|e| Error::Internal(e.to_string()))?;
                    writeln!(out, "{text}").map_err(io_error)?;
                }
            }
        }
        Command::Count { n, r, finite_index } => {
            require_rank(*r)?;
            let result = if *finite_index {
                enumerate_finite_index(*n, *r)?
            } else {
                enumerate_admissible(*n, *r)?
            };
            let text =
                serde_json::to_string(&result).map_err(|e| Error::Internal(e.to_string()))?;
            writeln!(out, "{text}").map_err(io_error)?;
        }
        Command::Stats {
            metric,
            n,
            r,
            trials,
            seed,
        } => {
            require_rank(*r)?;
            let seed = resolve_seed(*seed, err);
            let table = match metric {
                Metric::FiniteIndexAccept => InjectionTable::build(0),
                _ => load_table(*n, cache, cli.verbose, err)?,
            };
            let mut src = RandomSource::new(seed);
            let report = stat(*metric, *n, *r, *trials, &table, &mut src)?;
            let text =
                serde_json::to_string(&report).map_err(|e| Error::Internal(e.to_string()))?;
            writeln!(out, "{text}").map_err(io_error)?;
        }
        Command::Selftest => {
            let checks = selftest();
            for c in &checks {
                let status = if c.passed { "PASS" } else { "FAIL" };
                let detail = if c.detail.is_empty() {
                    String::new()
                } else {
                    format!(" ({})", c.detail)
                };
                writeln!(out, "{status} {}{detail}", c.name).map_err(io_error)?;
            }
            if checks.iter().any(|c| !c.passed) {
                return Ok(2);
            }
        }
    }
    Ok(0)
}

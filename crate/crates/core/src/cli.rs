//! `dyadic` command-line front end.
//!
//! Exit codes: 0 when every check passes, 1 when a verification fails, 2 on
//! input errors (bad flags, unreadable files, unknown suites). Nothing is
//! written to `--out` on exit 2.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand, ValueEnum};
use serde::de::DeserializeOwned;
use serde_json::{json, Value};

use crate::corpus::random_s0;
use crate::cz::{apply_kernel, cz_decompose, stopping_time_check, verify_cz, KernelSpec};
use crate::dyadic_ops::{haar, martingale_diff, maximal_s, CoeffMatrix, DyadicInterval};
use crate::error::{Error, Result};
use crate::lorentz::lorentz_norm;
use crate::report::num;
use crate::stepfn::{lp_norm, rearrange, DecreasingProfile, LorentzIndex, StepFunction};
use crate::suites::{run_suite, Suite, SuiteConfig};

pub const EXIT_PASS: i32 = 0;
pub const EXIT_FAIL: i32 = 1;
pub const EXIT_INPUT: i32 = 2;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
}

#[derive(Debug, Parser)]
#[command(name = "dyadic", version, about = "Exact dyadic step-function harness")]
pub struct Cli {
    /// Corpus seed.
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
    /// Number of corpus cases per suite.
    #[arg(long, global = true, default_value_t = 100)]
    pub cases: usize,
    /// Grid level L (cells of width 2^-L).
    #[arg(long, global = true, default_value_t = 10)]
    pub level: u32,
    /// Domain exponent m (domain [0, 2^m)).
    #[arg(long, global = true, default_value_t = 0)]
    pub m: u32,
    /// Output file; stdout when absent.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    pub format: Format,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Lorentz quasi-norm ||f||_{p,q}; the plain L^p norm when --q is omitted.
    Norm {
        input: PathBuf,
        #[arg(long)]
        p: f64,
        #[arg(long)]
        q: Option<f64>,
    },
    /// Decreasing rearrangement f*.
    Rearrange { input: PathBuf },
    /// Calderon-Zygmund decomposition at a height, with its verification report.
    Cz {
        input: PathBuf,
        #[arg(long)]
        height: f64,
    },
    /// Haar function of the dyadic interval [j 2^-k, (j+1) 2^-k) on the --m/--level grid.
    Haar {
        #[arg(long, allow_hyphen_values = true)]
        k: i32,
        #[arg(long)]
        j: u64,
    },
    /// Apply an operator: S with --coeffs, D_k with --diff, or a kernel with --kernel.
    Apply {
        input: PathBuf,
        #[arg(long, conflicts_with_all = ["diff", "kernel"])]
        coeffs: Option<PathBuf>,
        #[arg(long, allow_hyphen_values = true, conflicts_with = "kernel")]
        diff: Option<i32>,
        #[arg(long)]
        kernel: Option<String>,
    },
    /// Seeded random function sum 2^-k chi_{A_k} - sum 2^-k chi_{B_k}.
    Random {
        #[arg(long, allow_hyphen_values = true, default_value_t = -1)]
        kmin: i32,
        #[arg(long, allow_hyphen_values = true, default_value_t = 3)]
        kmax: i32,
    },
    /// Run a verification suite.
    Verify {
        suite: String,
        /// Series length for the counterexample suite.
        #[arg(long)]
        terms: Option<u32>,
    },
}

/// Parses `args` (including the program name) and runs; returns the exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    match Cli::try_parse_from(args) {
        Ok(cli) => run(&cli),
        Err(e) => {
            let code = if e.use_stderr() { EXIT_INPUT } else { EXIT_PASS };
            let _ = e.print();
            code
        }
    }
}

pub fn run(cli: &Cli) -> i32 {
    match execute(cli) {
        Ok((body, pass)) => match emit(cli.out.as_deref(), &body) {
            Ok(()) => {
                if pass {
                    EXIT_PASS
                } else {
                    EXIT_FAIL
                }
            }
            Err(e) => {
                eprintln!("error: {e}");
                EXIT_INPUT
            }
        },
        Err(e) => {
            eprintln!("error: {e}");
            EXIT_INPUT
        }
    }
}

fn emit(out: Option<&Path>, body: &str) -> Result<()> {
    match out {
        Some(path) => fs::write(path, body)?,
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout.write_all(body.as_bytes())?;
            stdout.flush()?;
        }
    }
    Ok(())
}

fn read_json<T: DeserializeOwned>(path: &Path) -> Result<T> {
    let text =
        fs::read_to_string(path).map_err(|e| Error::input(format!("cannot read {}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| Error::input(format!("{}: {e}", path.display())))
}

fn pretty(v: &impl serde::Serialize) -> Result<String> {
    let mut s = serde_json::to_string_pretty(v)?;
    s.push('\n');
    Ok(s)
}

fn csv_rows(header: &[&str], rows: impl IntoIterator<Item = Vec<String>>) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(header)?;
    for row in rows {
        w.write_record(&row)?;
    }
    let bytes = w.into_inner().map_err(|e| Error::input(e.to_string()))?;
    String::from_utf8(bytes).map_err(|e| Error::input(e.to_string()))
}

fn function_out(f: &StepFunction, format: Format) -> Result<String> {
    match format {
        Format::Json => pretty(f),
        Format::Csv => {
            let w = f.cell_width();
            csv_rows(
                &["start", "end", "value"],
                f.values().iter().enumerate().map(|(i, v)| {
                    vec![
                        (i as f64 * w).to_string(),
                        ((i + 1) as f64 * w).to_string(),
                        v.to_string(),
                    ]
                }),
            )
        }
    }
}

fn profile_out(p: &DecreasingProfile, format: Format) -> Result<String> {
    match format {
        Format::Json => pretty(p),
        Format::Csv => csv_rows(
            &["t_start", "t_end", "value"],
            p.iter_steps()
                .map(|(a, b, v)| vec![a.to_string(), b.to_string(), v.to_string()]),
        ),
    }
}

fn execute(cli: &Cli) -> Result<(String, bool)> {
    match &cli.command {
        Command::Norm { input, p, q } => {
            let f: StepFunction = read_json(input)?;
            let value = match q {
                Some(q) => lorentz_norm(&f, LorentzIndex::new(*p, *q)?)?,
                None => lp_norm(&f, *p)?,
            };
            let q = q.map_or(Value::Null, num);
            let body = match cli.format {
                Format::Json => pretty(&json!({"p": num(*p), "q": q, "norm": num(value)}))?,
                Format::Csv => csv_rows(
                    &["p", "q", "norm"],
                    [vec![p.to_string(), q.to_string(), value.to_string()]],
                )?,
            };
            Ok((body, true))
        }
        Command::Rearrange { input } => {
            let f: StepFunction = read_json(input)?;
            Ok((profile_out(&rearrange(&f), cli.format)?, true))
        }
        Command::Cz { input, height } => {
            let f: StepFunction = read_json(input)?;
            let dec = cz_decompose(&f, *height)?;
            let report = verify_cz(&f, &dec)?;
            let stopping = stopping_time_check(&f, &dec);
            let pass = report.pass && stopping.pass;
            let body = match cli.format {
                Format::Json => pretty(&json!({
                    "height": num(dec.height),
                    "cubes": dec.cubes().collect::<Vec<_>>(),
                    "good": dec.good,
                    "reports": [report, stopping],
                }))?,
                Format::Csv => csv_rows(
                    &["k", "j", "start", "end"],
                    dec.cubes().map(|q| {
                        vec![
                            q.k.to_string(),
                            q.j.to_string(),
                            q.start().to_string(),
                            q.end().to_string(),
                        ]
                    }),
                )?,
            };
            Ok((body, pass))
        }
        Command::Haar { k, j } => {
            let h = haar(DyadicInterval::new(*k, *j), cli.m, cli.level)?;
            Ok((function_out(&h, cli.format)?, true))
        }
        Command::Apply {
            input,
            coeffs,
            diff,
            kernel,
        } => {
            let f: StepFunction = read_json(input)?;
            let g = match (coeffs, diff, kernel) {
                (Some(path), None, None) => maximal_s(&f, &read_json::<CoeffMatrix>(path)?)?,
                (None, Some(k), None) => martingale_diff(&f, *k)?,
                (None, None, Some(name)) => apply_kernel(&KernelSpec::by_name(name)?, &f)?,
                _ => {
                    return Err(Error::input(
                        "apply needs exactly one of --coeffs, --diff, --kernel",
                    ))
                }
            };
            Ok((function_out(&g, cli.format)?, true))
        }
        Command::Random { kmin, kmax } => {
            let f = random_s0(cli.seed, cli.m, cli.level, *kmin, *kmax)?;
            Ok((function_out(&f, cli.format)?, true))
        }
        Command::Verify { suite, terms } => {
            let cfg = SuiteConfig {
                suite: suite.parse::<Suite>()?,
                seed: cli.seed,
                cases: cli.cases,
                level: cli.level,
                m: cli.m,
                terms: *terms,
            };
            let reports = run_suite(&cfg)?;
            let body = match cli.format {
                Format::Json => {
                    let mut s = reports.to_json()?;
                    s.push('\n');
                    s
                }
                Format::Csv => reports.to_csv()?,
            };
            Ok((body, reports.all_pass()))
        }
    }
}

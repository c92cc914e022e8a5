use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use mgpx_cli::commands::{self, EvalOptions, What, Which};
use mgpx_cli::error::CliError;
use mgpx_cli::io::{format_f64, read_matrix, write_csv};
use mgpx_cli::spec;
use mgpx_cli::verify::{self, Suite, Tier};

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Csv,
    Json,
}

#[derive(Parser)]
#[command(name = "mgpx", version, about = "Multivariate generalized Pareto and extreme value toolkit")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Draw samples from the model in a spec file.
    Simulate {
        #[arg(long)]
        spec: PathBuf,
        #[arg(long)]
        n: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, value_enum, default_value_t = Format::Csv)]
        format: Format,
    },
    /// Evaluate a density or dependence function at the rows of a CSV file.
    Eval {
        #[arg(long)]
        spec: PathBuf,
        #[arg(long, value_enum)]
        what: What,
        #[arg(long)]
        points: PathBuf,
        /// Monte Carlo budget for quantities without a closed form.
        #[arg(long, default_value_t = 100_000)]
        n: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Use the integral formulas for densities.
        #[arg(long)]
        quadrature: bool,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, value_enum, default_value_t = Format::Csv)]
        format: Format,
    },
    /// Estimate the tail dependence and extremal coefficients.
    Coef {
        #[arg(long)]
        spec: PathBuf,
        #[arg(long, value_enum, default_value_t = Which::Both)]
        which: Which,
        #[arg(long, default_value_t = 100_000)]
        n: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, value_enum, default_value_t = Format::Json)]
        format: Format,
    },
    /// Run the invariant suites; exits 1 if any check fails.
    Verify {
        #[arg(long, value_enum, default_value_t = Suite::All)]
        suite: Suite,
        #[arg(long, value_enum, default_value_t = Tier::Quick)]
        tier: Tier,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        /// Replace every threshold by one no statistic can meet.
        #[arg(long)]
        tamper: bool,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, value_enum, default_value_t = Format::Json)]
        format: Format,
    },
}

fn open_out(out: Option<&Path>) -> Result<Box<dyn Write>, CliError> {
    Ok(match out {
        Some(p) => Box::new(BufWriter::new(File::create(p).map_err(|source| CliError::Io {
            path: p.display().to_string(),
            source,
        })?)),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    })
}

fn write_json<T: serde::Serialize>(out: Option<&Path>, value: &T) -> Result<(), CliError> {
    let mut w = open_out(out)?;
    let text = serde_json::to_string_pretty(value).expect("report types serialize");
    writeln!(w, "{text}")
        .and_then(|_| w.flush())
        .map_err(|source| CliError::Io {
            path: out.map_or_else(|| "<stdout>".to_string(), |p| p.display().to_string()),
            source,
        })
}

fn column_names(prefix: &str, d: usize) -> Vec<String> {
    (1..=d).map(|j| format!("{prefix}{j}")).collect()
}

fn set_threads() -> Result<(), CliError> {
    let Ok(v) = std::env::var("MGPX_THREADS") else {
        return Ok(());
    };
    let n: usize = v
        .trim()
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .ok_or_else(|| CliError::Input(format!("MGPX_THREADS must be a positive integer, got {v:?}")))?;
    // fails only if a pool already exists, which cannot happen this early
    let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    Ok(())
}

/// Exit status on success: 0, or 1 for a failed verification.
fn run(cli: Cli) -> Result<u8, CliError> {
    set_threads()?;
    match cli.command {
        Command::Simulate {
            spec,
            n,
            seed,
            out,
            format,
        } => {
            let built = spec::load(&spec)?;
            let s = commands::simulate(&built, n, seed)?;
            let names = column_names("y", s.dim());
            match format {
                Format::Csv => write_csv(
                    open_out(out.as_deref())?,
                    &names,
                    s.rows().map(|r| r.iter().map(|&v| format_f64(v)).collect()),
                )?,
                Format::Json => {
                    // infinities are not JSON numbers; keep the CSV tokens
                    let rows: Vec<Vec<serde_json::Value>> = s
                        .rows()
                        .map(|r| {
                            r.iter()
                                .map(|&v| match serde_json::Number::from_f64(v) {
                                    Some(x) => serde_json::Value::Number(x),
                                    None => serde_json::Value::String(format_f64(v)),
                                })
                                .collect()
                        })
                        .collect();
                    write_json(out.as_deref(), &serde_json::json!({ "columns": names, "rows": rows }))?
                }
            }
        }
        Command::Eval {
            spec,
            what,
            points,
            n,
            seed,
            quadrature,
            out,
            format,
        } => {
            let built = spec::load(&spec)?;
            let pts = read_matrix(&points, built.dim())?;
            let values = commands::eval(&built, what, &pts, &EvalOptions { n, seed, quadrature })?;
            match format {
                Format::Csv => {
                    let header = ["value", "std_err", "provenance"].map(String::from);
                    write_csv(
                        open_out(out.as_deref())?,
                        &header,
                        values.iter().map(|v| {
                            vec![format_f64(v.value), format_f64(v.std_err), v.provenance.as_str().to_string()]
                        }),
                    )?
                }
                Format::Json => write_json(out.as_deref(), &values)?,
            }
        }
        Command::Coef {
            spec,
            which,
            n,
            seed,
            out,
            format,
        } => {
            let built = spec::load(&spec)?;
            let report = commands::coef(&built, which, n, seed)?;
            match format {
                Format::Json => write_json(out.as_deref(), &report)?,
                Format::Csv => {
                    let header = ["quantity", "value", "std_err"].map(String::from);
                    let mut rows = Vec::new();
                    for (name, e) in [("chi", report.chi), ("extremal", report.extremal)] {
                        if let Some(e) = e {
                            rows.push(vec![name.to_string(), format_f64(e.value), format_f64(e.std_err)]);
                        }
                    }
                    if let Some(id) = &report.identity {
                        rows.push(vec!["identity_residual".into(), format_f64(id.residual), format_f64(id.joint_std_err)]);
                    }
                    write_csv(open_out(out.as_deref())?, &header, rows.into_iter())?
                }
            }
        }
        Command::Verify {
            suite,
            tier,
            seed,
            tamper,
            out,
            format,
        } => {
            let report = verify::run(suite, tier, seed, tamper);
            match format {
                Format::Json => write_json(out.as_deref(), &report)?,
                Format::Csv => {
                    let header = ["suite", "name", "statistic", "threshold", "passes", "passed"].map(String::from);
                    write_csv(
                        open_out(out.as_deref())?,
                        &header,
                        report.checks.iter().map(|c| {
                            vec![
                                c.suite.to_string(),
                                c.name.clone(),
                                format_f64(c.statistic),
                                format_f64(c.threshold),
                                format!("{:?}", c.passes).to_lowercase(),
                                c.passed.to_string(),
                            ]
                        }),
                    )?
                }
            }
            return Ok(if report.passed { 0 } else { 1 });
        }
    }
    Ok(0)
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    match run(Cli::parse()) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            let mut src = std::error::Error::source(&e);
            while let Some(s) = src {
                eprintln!("  caused by: {s}");
                src = s.source();
            }
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

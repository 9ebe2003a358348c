use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use streammoments::error::{Error, Result};
use streammoments::harness::{
    audit_space, parse_generator, run_experiment, write_audit_csv, write_csv, Algo, ExperimentSpec, Source,
    AUDIT_GRID,
};
use streammoments::io::{write_stream, Format};
use streammoments::stream::GeneratorSpec;

#[derive(Parser)]
#[command(name = "streammoments", version, about = "Frequency moment estimation over random-order streams")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Second-moment estimator over shuffles of a stream file.
    F2rand(F2Args),
    /// Randomized p-th moment estimator over shuffles of a stream file.
    Fprand(FpArgs),
    /// Deterministic p-th moment estimator, replaying the file in order.
    Fpdet(DetArgs),
    /// Monte-Carlo experiments and the space audit.
    Harness(HarnessArgs),
    /// Write a synthetic stream file.
    Generate(GenArgs),
}

#[derive(Args)]
struct F2Args {
    #[arg(long, default_value_t = 0.1)]
    epsilon: f64,
    #[arg(long, default_value_t = 0.1)]
    delta: f64,
    #[arg(long)]
    input: PathBuf,
    /// Universe size for text files (defaults to the largest id).
    #[arg(long)]
    n: Option<u64>,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    #[arg(long, default_value_t = 1)]
    trials: u64,
    #[arg(long)]
    csv_out: Option<PathBuf>,
}

#[derive(Args)]
struct FpArgs {
    #[arg(long)]
    p: f64,
    #[arg(long, default_value_t = 0.25)]
    epsilon: f64,
    #[arg(long, default_value_t = 0.1)]
    delta: f64,
    #[arg(long)]
    input: PathBuf,
    #[arg(long)]
    n: Option<u64>,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    #[arg(long, default_value_t = 1)]
    trials: u64,
    /// Independent copies combined by median (defaults to the δ formula).
    #[arg(long)]
    copies: Option<usize>,
    #[arg(long)]
    csv_out: Option<PathBuf>,
}

#[derive(Args)]
struct DetArgs {
    #[arg(long)]
    p: f64,
    #[arg(long, default_value_t = 0.25)]
    epsilon: f64,
    #[arg(long, default_value_t = 0.1)]
    delta: f64,
    #[arg(long)]
    input: PathBuf,
    #[arg(long)]
    n: Option<u64>,
    #[arg(long)]
    copies: Option<usize>,
    #[arg(long)]
    csv_out: Option<PathBuf>,
}

#[derive(Args)]
struct HarnessArgs {
    #[arg(long, default_value = "fprand")]
    algo: String,
    #[arg(long, default_value_t = 1.0)]
    p: f64,
    #[arg(long, default_value_t = 0.25)]
    epsilon: f64,
    #[arg(long, default_value_t = 0.1)]
    delta: f64,
    #[arg(long, default_value_t = 1024)]
    n: u64,
    #[arg(long, default_value_t = 1_000_000)]
    m: u64,
    /// `uniform`, `zipf:S`, `planted:COUNT:FREQ` or `mixture:S:COUNT:FREQ`.
    #[arg(long, default_value = "mixture:1.0:4:20000")]
    gen: String,
    /// Read the base stream from a file instead of generating it.
    #[arg(long)]
    input: Option<PathBuf>,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    #[arg(long, default_value_t = 10)]
    trials: u64,
    #[arg(long)]
    csv_out: Option<PathBuf>,
    #[arg(long)]
    copies: Option<usize>,
    /// Report peak bits over the ε grid instead of running trials.
    #[arg(long)]
    audit_space: bool,
}

#[derive(Args)]
struct GenArgs {
    #[arg(long, default_value = "zipf:1.0")]
    gen: String,
    #[arg(long, default_value_t = 1024)]
    n: u64,
    #[arg(long, default_value_t = 10_000)]
    m: u64,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    #[arg(long)]
    output: PathBuf,
    #[arg(long)]
    binary: bool,
}

fn sink(path: Option<&Path>) -> Result<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(File::create(p)?)),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    })
}

fn file_source(input: PathBuf, n: Option<u64>) -> Source {
    Source::File { path: input, n }
}

/// Runs trials, writes the CSV and reports whether the success target held.
fn experiment(spec: ExperimentSpec, out: Option<&Path>) -> Result<bool> {
    let outcome = run_experiment(&spec)?;
    let mut w = sink(out)?;
    write_csv(&mut w, &outcome)?;
    w.flush()?;
    let s = &outcome.summary;
    eprintln!(
        "{}: {}/{} within {:.4} (rate {:.3}, 95% CI [{:.3}, {:.3}], target {:.2})",
        spec.algo.name(),
        s.successes,
        s.trials,
        s.tolerance,
        s.rate,
        s.ci.0,
        s.ci.1,
        s.target
    );
    Ok(s.passed())
}

fn run(cli: Cli) -> Result<bool> {
    match cli.cmd {
        Cmd::F2rand(a) => experiment(
            ExperimentSpec {
                algo: Algo::F2Rand,
                source: file_source(a.input, a.n),
                p: 2.0,
                eps: a.epsilon,
                delta: a.delta,
                trials: a.trials,
                seed: a.seed,
                copies: None,
                shuffle: true,
            },
            a.csv_out.as_deref(),
        ),
        Cmd::Fprand(a) => experiment(
            ExperimentSpec {
                algo: Algo::FpRand,
                source: file_source(a.input, a.n),
                p: a.p,
                eps: a.epsilon,
                delta: a.delta,
                trials: a.trials,
                seed: a.seed,
                copies: a.copies,
                shuffle: true,
            },
            a.csv_out.as_deref(),
        ),
        Cmd::Fpdet(a) => experiment(
            ExperimentSpec {
                algo: Algo::FpDet,
                source: file_source(a.input, a.n),
                p: a.p,
                eps: a.epsilon,
                delta: a.delta,
                trials: 1,
                seed: 0,
                copies: a.copies,
                shuffle: false,
            },
            a.csv_out.as_deref(),
        ),
        Cmd::Harness(a) => {
            let algo: Algo = a.algo.parse()?;
            let source = match a.input {
                Some(path) => Source::File { path, n: Some(a.n) },
                None => Source::Generated(GeneratorSpec {
                    kind: parse_generator(&a.gen, a.m)?,
                    n: a.n,
                    m: a.m,
                    seed: a.seed,
                }),
            };
            let spec = ExperimentSpec {
                algo,
                source,
                p: a.p,
                eps: a.epsilon,
                delta: a.delta,
                trials: a.trials,
                seed: a.seed,
                copies: a.copies,
                shuffle: true,
            };
            if a.audit_space {
                let report = audit_space(&spec, &AUDIT_GRID)?;
                let mut w = sink(a.csv_out.as_deref())?;
                write_audit_csv(&mut w, &report)?;
                w.flush()?;
                let fp_peak = report.rows.iter().filter(|r| r.algo == Algo::FpRand).map(|r| r.bits_peak).min();
                let below = fp_peak.is_some_and(|b| b < report.naive_bits);
                let shape = (1.6..=2.4).contains(&report.exponent);
                eprintln!(
                    "audit: exponent {:.3} (want [1.6, 2.4]), smallest peak {:?} vs naive {}",
                    report.exponent, fp_peak, report.naive_bits
                );
                Ok(shape && below)
            } else {
                experiment(spec, a.csv_out.as_deref())
            }
        }
        Cmd::Generate(a) => {
            let spec = GeneratorSpec { kind: parse_generator(&a.gen, a.m)?, n: a.n, m: a.m, seed: a.seed };
            let stream = streammoments::stream::generate(&spec)?;
            let format = if a.binary { Format::Binary } else { Format::Text };
            write_stream(&a.output, &stream, format)?;
            Ok(true)
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    match run(cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(2),
        Err(e) => {
            report(&e);
            ExitCode::from(1)
        }
    }
}

fn report(e: &Error) {
    eprintln!("error: {e}");
}

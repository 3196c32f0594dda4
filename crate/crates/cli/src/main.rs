// Licensed under the Apache License, Version 2.0 (the "License"); you may
// not use this file except in compliance with the License. You may obtain
// a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS, WITHOUT
// WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied. See the
// License for the specific language governing permissions and limitations
// under the License.

//! `streamcolor` command-line driver.

use std::fs::File;
use std::io::{self, BufReader, BufWriter, Read, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use log::{info, warn};
use streamcolor::harness::experiment::{
    parse_ratio, run_experiment_suite, run_kout_experiment, write_csv, KoutReport, SuiteConfig,
};
use streamcolor::harness::generate::{generate_text, Family, GenSpec};
use streamcolor::harness::verify::{verify, VerifyError};
use streamcolor::pipeline::run_stream_with;
use streamcolor::stream::{OutputParseError, StreamError};
use streamcolor::{BoundPolicy, Mode, Preset, RunOptions};

const SEED_ENV: &str = "STREAMCOLOR_SEED";

#[derive(Parser, Debug)]
#[command(name = "streamcolor", version, about = "Streaming edge coloring toolkit")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Generate a stream file.
    Gen(GenArgs),
    /// Color a stream.
    Run(RunArgs),
    /// Check an output file against its stream.
    Verify(VerifyArgs),
    /// Estimate the k-out perfect matching failure rate.
    Kout(KoutArgs),
    /// Run an experiment grid from a TOML config.
    Bench(BenchArgs),
}

#[derive(Args, Debug)]
struct GenArgs {
    #[arg(long)]
    family: Family,
    #[arg(long)]
    n: u32,
    #[arg(long)]
    delta: u32,
    #[arg(long)]
    mode: Mode,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    batch_size: Option<u32>,
    /// Output path; stdout if absent.
    #[arg(short, long)]
    output: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct RunArgs {
    /// Stream file, `-` for stdin.
    input: PathBuf,
    #[arg(long = "alg", default_value = "one-sided")]
    preset: Preset,
    #[arg(long, default_value_t = 1, value_parser = clap::value_parser!(u32).range(1..))]
    s: u32,
    /// Stream even where an offline fallback would apply.
    #[arg(long)]
    force_stream: bool,
    /// Fail as soon as a sub-instance exceeds its declared degree.
    #[arg(long)]
    strict_bounds: bool,
    /// Overrides the seed in the stream header.
    #[arg(long)]
    seed: Option<u64>,
    #[arg(short, long)]
    output: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct VerifyArgs {
    stream: PathBuf,
    output: PathBuf,
    /// Fail if any color is at or above this value.
    #[arg(long)]
    budget: Option<u64>,
}

#[derive(Args, Debug)]
struct KoutArgs {
    #[arg(long)]
    n: u32,
    /// Ratio of right to left side, as a decimal.
    #[arg(long, default_value = "2.72")]
    c: String,
    #[arg(long, default_value_t = 3)]
    k: u32,
    #[arg(long, default_value_t = 10_000)]
    trials: u64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

#[derive(Args, Debug)]
struct BenchArgs {
    #[arg(long)]
    config: PathBuf,
    /// Worker threads; overrides the config.
    #[arg(long)]
    jobs: Option<usize>,
    /// Write 0 in the millis column.
    #[arg(long)]
    no_timing: bool,
    #[arg(short, long)]
    output: Option<PathBuf>,
}

/// Failure with its exit status.
struct Fail {
    code: u8,
    msg: String,
}

impl Fail {
    fn new(code: u8, msg: impl ToString) -> Self {
        Fail {
            code,
            msg: msg.to_string(),
        }
    }

    fn io(path: &Path, e: io::Error) -> Self {
        Fail::new(1, format!("{}: {e}", path.display()))
    }

    fn usage(msg: impl ToString) -> Self {
        Fail::new(2, msg)
    }
}

fn env_seed() -> Result<Option<u64>, Fail> {
    match std::env::var(SEED_ENV) {
        Ok(v) => v
            .trim()
            .parse()
            .map(Some)
            .map_err(|_| Fail::usage(format!("{SEED_ENV}: not an unsigned integer: `{v}`"))),
        Err(_) => Ok(None),
    }
}

fn open_input(path: &Path) -> Result<Box<dyn io::BufRead>, Fail> {
    if path == Path::new("-") {
        return Ok(Box::new(BufReader::new(io::stdin())));
    }
    let f = File::open(path).map_err(|e| Fail::io(path, e))?;
    Ok(Box::new(BufReader::new(f)))
}

fn open_output(path: Option<&Path>) -> Result<Box<dyn Write>, Fail> {
    match path {
        Some(p) => {
            let f = File::create(p).map_err(|e| Fail::io(p, e))?;
            Ok(Box::new(BufWriter::new(f)))
        }
        None => Ok(Box::new(BufWriter::new(io::stdout()))),
    }
}

fn finish_output(mut w: Box<dyn Write>, path: Option<&Path>) -> Result<(), Fail> {
    w.flush()
        .map_err(|e| Fail::io(path.unwrap_or(Path::new("<stdout>")), e))
}

/// Writes to stdout; a closed pipe is not an error.
fn print(text: &str) -> Result<(), Fail> {
    let mut out = io::stdout().lock();
    match out.write_all(text.as_bytes()).and_then(|_| out.flush()) {
        Err(e) if e.kind() != io::ErrorKind::BrokenPipe => Err(Fail::io(Path::new("<stdout>"), e)),
        _ => Ok(()),
    }
}

fn cmd_gen(a: GenArgs) -> Result<(), Fail> {
    let seed = env_seed()?.unwrap_or(a.seed);
    let spec = GenSpec {
        family: a.family,
        n: a.n,
        delta: a.delta,
        mode: a.mode,
        seed,
        batch_size: a.batch_size,
    };
    let text = generate_text(&spec).map_err(Fail::usage)?;
    let path = a.output.as_deref();
    let mut out = open_output(path)?;
    out.write_all(text.as_bytes())
        .map_err(|e| Fail::io(path.unwrap_or(Path::new("<stdout>")), e))?;
    finish_output(out, path)
}

fn cmd_run(a: RunArgs) -> Result<(), Fail> {
    let seed = env_seed()?.or(a.seed);
    let opts = RunOptions {
        preset: a.preset,
        s: a.s,
        force_stream: a.force_stream,
        policy: if a.strict_bounds {
            BoundPolicy::Strict
        } else {
            BoundPolicy::Tolerant
        },
        seed,
    };
    let input = open_input(&a.input)?;
    let path = a.output.as_deref();
    let out = open_output(path)?;
    let summary = run_stream_with(input, out, &opts, |h, budget| {
        eprintln!("budget {budget}");
        info!(
            "{} on {} stream, n={} delta={}",
            opts.preset,
            h.mode,
            h.n_total(),
            h.delta
        );
    })
    .map_err(|e| Fail::new(e.exit_code() as u8, e))?;
    if summary.degree_breaches > 0 {
        warn!("{} sub-instance degree breaches", summary.degree_breaches);
    }
    eprintln!(
        "preset={} edges={} colors_used={} palette={} peak_words={} spilled_vertices={} spilled_edges={} s={} streaming={}",
        summary.preset,
        summary.edges,
        summary.colors_used,
        summary.palette,
        summary.peak_words,
        summary.spilled_vertices,
        summary.spilled_edges,
        summary.s,
        summary.streaming
    );
    Ok(())
}

fn cmd_verify(a: VerifyArgs) -> Result<(), Fail> {
    let stream = open_input(&a.stream)?;
    let output = open_input(&a.output)?;
    let report = match verify(stream, output, a.budget) {
        Ok(r) => r,
        Err(VerifyError::Stream(StreamError::Io(e))) => return Err(Fail::io(&a.stream, e)),
        Err(VerifyError::Output(OutputParseError::Io(e))) => return Err(Fail::io(&a.output, e)),
        Err(e) => return Err(Fail::new(5, e)),
    };
    print(&report.to_string())?;
    if report.ok() {
        Ok(())
    } else {
        Err(Fail::new(1, "verification failed"))
    }
}

fn cmd_kout(a: KoutArgs) -> Result<(), Fail> {
    let (num, den) = parse_ratio(&a.c).ok_or_else(|| Fail::usage(format!("--c: not a decimal: `{}`", a.c)))?;
    if a.k == 0 {
        return Err(Fail::usage("--k must be positive"));
    }
    let u_size = (num * a.n as u64).div_ceil(den);
    if u_size < a.k as u64 || u_size > u32::MAX as u64 {
        return Err(Fail::usage(format!(
            "right side of {u_size} vertices cannot host {}-out choices",
            a.k
        )));
    }
    let seed = env_seed()?.unwrap_or(a.seed);
    let r = run_kout_experiment(a.n, num, den, a.k, a.trials, seed);
    print(&format!("{}\n{}\n", KoutReport::CSV_HEADER, r.csv_row()))?;
    Ok(())
}

fn cmd_bench(a: BenchArgs) -> Result<(), Fail> {
    let mut text = String::new();
    File::open(&a.config)
        .and_then(|mut f| f.read_to_string(&mut text))
        .map_err(|e| Fail::io(&a.config, e))?;
    let mut cfg = SuiteConfig::from_toml(&text).map_err(Fail::usage)?;
    if let Some(j) = a.jobs {
        cfg.jobs = j;
    }
    if a.no_timing {
        cfg.timing = false;
    }
    let rows = run_experiment_suite(&cfg).map_err(Fail::usage)?;
    let path = a.output.as_deref();
    let mut out = open_output(path)?;
    let shown = path.unwrap_or(Path::new("<stdout>"));
    writeln!(
        out,
        "# force_stream={} master_seed={}",
        cfg.force_stream, cfg.master_seed
    )
    .map_err(|e| Fail::io(shown, e))?;
    write_csv(&mut out, &rows).map_err(|e| Fail::io(shown, e))?;
    finish_output(out, path)?;
    let failed: Vec<_> = rows.iter().filter(|r| r.error.is_some()).collect();
    for r in &failed {
        warn!(
            "{} {} n={} delta={} seed={}: {}",
            r.preset,
            r.family,
            r.n,
            r.delta,
            r.seed,
            r.error.as_deref().unwrap_or("")
        );
    }
    if failed.is_empty() && rows.iter().all(|r| r.proper) {
        Ok(())
    } else {
        Err(Fail::new(
            1,
            format!(
                "{} of {} runs failed or were improper",
                rows.iter().filter(|r| !r.proper).count(),
                rows.len()
            ),
        ))
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Gen(a) => cmd_gen(a),
        Command::Run(a) => cmd_run(a),
        Command::Verify(a) => cmd_verify(a),
        Command::Kout(a) => cmd_kout(a),
        Command::Bench(a) => cmd_bench(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("streamcolor: {}", f.msg);
            ExitCode::from(f.code)
        }
    }
}

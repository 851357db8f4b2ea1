//! Command-line front end.
//!
//! Exit codes: 0 success, 1 invariant violation, 2 usage or domain error.

use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::algos::{self, AlgorithmId, Kernels};
use crate::fp::Precision;
use crate::harness::{self, Engine, HarnessError, SamplePlan, PRNG_ID};
use crate::hexfloat::{parse_float, to_hex};
use crate::oracle;
use crate::report::{
    Format, HistogramRow, NonzeroInputs, PlanEcho, ReportEnvelope, ScanRowOut,
};

pub const EXIT_OK: u8 = 0;
pub const EXIT_VIOLATION: u8 = 1;
pub const EXIT_USAGE: u8 = 2;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum PrecisionArg {
    B32,
    B64,
}

impl From<PrecisionArg> for Precision {
    fn from(p: PrecisionArg) -> Self {
        match p {
            PrecisionArg::B32 => Precision::Binary32,
            PrecisionArg::B64 => Precision::Binary64,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum FormatArg {
    Md,
    Csv,
    Json,
}

impl From<FormatArg> for Format {
    fn from(f: FormatArg) -> Self {
        match f {
            FormatArg::Md => Format::Markdown,
            FormatArg::Csv => Format::Csv,
            FormatArg::Json => Format::Json,
        }
    }
}

#[derive(Debug, Parser)]
#[command(name = "rsqrt-forge", version, about = "Reciprocal square root accuracy toolkit")]
pub struct Cli {
    #[command(flatten)]
    pub common: Common,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args)]
pub struct Common {
    /// Floating-point format.
    #[arg(long, global = true, value_enum, default_value = "b64")]
    pub precision: PrecisionArg,
    /// Output format.
    #[arg(long, global = true, value_enum, default_value = "md")]
    pub format: FormatArg,
    /// Seed of the sample stream.
    #[arg(long, global = true, default_value_t = 42)]
    pub seed: u64,
    /// Worker threads; 0 uses every core. Results do not depend on it.
    #[arg(long, global = true, env = "RSQRT_FORGE_THREADS", default_value_t = 0)]
    pub threads: usize,
    /// Write the report here instead of stdout.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Evaluate one algorithm at one input and classify the result.
    Eval {
        /// Decimal or hex-float literal.
        #[arg(long, allow_hyphen_values = true)]
        x: String,
        #[arg(long)]
        algo: AlgorithmId,
    },
    /// Sampled accuracy run against the exact oracle.
    Accuracy {
        /// `lo:hi`, half open.
        #[arg(long, default_value = "1:2")]
        interval: String,
        #[arg(long, default_value_t = 1_000_000)]
        samples: u64,
        #[arg(long, value_delimiter = ',', default_value = "naive,newton")]
        algos: Vec<AlgorithmId>,
        /// Re-run the plan recorded in a JSON report.
        #[arg(long)]
        plan_file: Option<PathBuf>,
    },
    /// Every binary32 input of an interval (at most two binades).
    Exhaustive {
        #[arg(long, default_value = "1:4")]
        interval: String,
        #[arg(long, value_delimiter = ',', default_value = "newton,halley")]
        algos: Vec<AlgorithmId>,
    },
    /// Evaluate along the inputs (1 - 2u) * 4^k.
    Scan {
        #[arg(long, default_value_t = 0, allow_hyphen_values = true)]
        kmin: i32,
        #[arg(long, default_value_t = 50, allow_hyphen_values = true)]
        kmax: i32,
        #[arg(long, value_delimiter = ',', default_value = "newton,halley")]
        algos: Vec<AlgorithmId>,
    },
    /// Exact checks of the compensated Newton step over a sample stream.
    Invariants {
        #[arg(long, default_value = "1:2")]
        interval: String,
        #[arg(long, default_value_t = 100_000)]
        samples: u64,
        #[arg(long)]
        plan_file: Option<PathBuf>,
    },
    /// Informational timings.
    Bench {
        #[arg(long, value_delimiter = ',', default_value = "rcpsqrt331d,rcpsqrt331dhalley")]
        algos: Vec<AlgorithmId>,
        #[arg(long, default_value_t = 1_000_000)]
        n: u64,
        #[arg(long, default_value_t = 11)]
        reps: u32,
    },
}

/// A failed command and the exit code it maps to.
#[derive(Debug)]
pub struct Failure {
    pub code: u8,
    pub message: String,
}

impl Failure {
    fn usage(message: impl Into<String>) -> Self {
        Failure { code: EXIT_USAGE, message: message.into() }
    }
}

impl From<HarnessError> for Failure {
    fn from(e: HarnessError) -> Self {
        Failure::usage(e.to_string())
    }
}

/// Output of a successful command; `violation` selects exit code 1.
pub struct Outcome {
    pub text: String,
    pub violation: Option<String>,
}

fn parse_value(text: &str, precision: Precision) -> Result<f64, Failure> {
    let v = match precision {
        Precision::Binary32 => parse_float::<f32>(text).map(|v| v as f64),
        Precision::Binary64 => parse_float::<f64>(text),
    };
    v.map_err(|e| Failure::usage(e.to_string()))
}

fn parse_interval(text: &str, precision: Precision) -> Result<(f64, f64), Failure> {
    let (lo, hi) = text
        .split_once(':')
        .ok_or_else(|| Failure::usage(format!("interval `{text}` must look like lo:hi")))?;
    Ok((parse_value(lo, precision)?, parse_value(hi, precision)?))
}

fn hex(v: f64, precision: Precision) -> String {
    match precision {
        Precision::Binary32 => to_hex(v as f32),
        Precision::Binary64 => to_hex(v),
    }
}

fn read_plan_file(path: &PathBuf) -> Result<ReportEnvelope, Failure> {
    let text = fs::read_to_string(path)
        .map_err(|e| Failure::usage(format!("cannot read {}: {e}", path.display())))?;
    ReportEnvelope::from_json(&text)
        .map_err(|e| Failure::usage(format!("{} is not a report: {e}", path.display())))
}

/// Rebuilds a sample plan from a report's echo.
fn plan_from_envelope(env: &ReportEnvelope) -> Result<SamplePlan, Failure> {
    let p = &env.plan;
    let missing = |f: &str| Failure::usage(format!("plan file lacks `{f}`"));
    let [lo, hi] = p.interval.as_ref().ok_or_else(|| missing("interval"))?;
    if let Some(prng) = &p.prng {
        if prng != PRNG_ID {
            return Err(Failure::usage(format!("plan uses generator `{prng}`, this build has `{PRNG_ID}`")));
        }
    }
    Ok(SamplePlan::new(
        parse_value(lo, env.precision)?,
        parse_value(hi, env.precision)?,
        p.count.ok_or_else(|| missing("count"))?,
        p.seed.ok_or_else(|| missing("seed"))?,
        env.precision,
        p.algorithms.clone(),
    ))
}

fn echo_plan(plan: &SamplePlan) -> PlanEcho {
    PlanEcho {
        interval: Some([hex(plan.lo, plan.precision), hex(plan.hi, plan.precision)]),
        count: Some(plan.count),
        seed: Some(plan.seed),
        prng: Some(PRNG_ID.to_string()),
        algorithms: plan.algorithms.clone(),
        ..Default::default()
    }
}

fn eval_typed<F: Kernels>(x_text: &str, algo: AlgorithmId, format: Format) -> Result<Outcome, Failure> {
    let x: F = parse_float(x_text).map_err(|e| Failure::usage(e.to_string()))?;
    let output = algos::rsqrt_full_range(x, algo).map_err(|e| Failure::usage(e.to_string()))?;
    let verdict = oracle::classify(output, x).map_err(|e| Failure::usage(e.to_string()))?;
    let violation = (algo.weakly_rounded() && !verdict.class.is_faithful())
        .then(|| format!("{algo} is not faithful at {}", to_hex(x)));
    let text = if format == Format::Json {
        let v = serde_json::json!({
            "version": crate::report::VERSION,
            "precision": F::PRECISION,
            "x_hex": to_hex(x),
            "algo": algo,
            "output_hex": to_hex(output),
            "oracle_hex": to_hex(verdict.correct),
            "verdict": verdict.class,
            "ulp": verdict.ulp_distance,
        });
        format!("{}\n", serde_json::to_string_pretty(&v).expect("serializes"))
    } else {
        format!(
            "x={} algo={} output={} ({}) oracle={} ({}) verdict={} ulp={}\n",
            to_hex(x),
            algo,
            to_hex(output),
            output,
            to_hex(verdict.correct),
            verdict.correct,
            verdict.class,
            verdict.ulp_distance
        )
    };
    Ok(Outcome { text, violation })
}

fn violation_of(rows: &[harness::UlpHistogram]) -> Option<String> {
    (!harness::weak_rounding_holds(rows)).then(|| {
        let bad: Vec<_> = rows
            .iter()
            .filter(|h| h.algorithm.weakly_rounded() && (h.two_plus_ulp > 0 || h.unfaithful > 0))
            .map(|h| format!("{} ({} unfaithful)", h.algorithm, h.unfaithful))
            .collect();
        format!("weak rounding violated by {}", bad.join(", "))
    })
}

/// Runs a parsed command line and returns its output.
pub fn execute(cli: &Cli) -> Result<Outcome, Failure> {
    let common = &cli.common;
    let precision: Precision = common.precision.into();
    let format: Format = common.format.into();
    let started = Instant::now();
    let fma_ok = algos::fma_sanity_check();

    let finish = |mut env: ReportEnvelope, violation: Option<String>| -> Result<Outcome, Failure> {
        env.wall_ms = started.elapsed().as_millis() as u64;
        Ok(Outcome { text: env.render(format), violation })
    };

    match &cli.command {
        Command::Eval { x, algo } => match precision {
            Precision::Binary32 => eval_typed::<f32>(x, *algo, format),
            Precision::Binary64 => eval_typed::<f64>(x, *algo, format),
        },
        Command::Accuracy { interval, samples, algos, plan_file } => {
            let plan = match plan_file {
                Some(path) => plan_from_envelope(&read_plan_file(path)?)?,
                None => {
                    let (lo, hi) = parse_interval(interval, precision)?;
                    SamplePlan::new(lo, hi, *samples, common.seed, precision, algos.clone())
                }
            };
            let engine = Engine::new(common.threads)?;
            let report = engine.run_sampled(&plan)?;
            let mut env = ReportEnvelope::new("accuracy", plan.precision, echo_plan(&plan), fma_ok);
            env.rows = report
                .histograms
                .iter()
                .map(|h| HistogramRow::from_histogram(h, plan.precision))
                .collect();
            finish(env, violation_of(&report.histograms))
        }
        Command::Exhaustive { interval, algos } => {
            if precision != Precision::Binary32 {
                return Err(Failure::usage("the exhaustive sweep runs in binary32 only; pass --precision b32"));
            }
            let (lo, hi) = parse_interval(interval, precision)?;
            let engine = Engine::new(common.threads)?;
            let report = engine.run_exhaustive_b32(lo as f32, hi as f32, algos)?;
            let plan = PlanEcho {
                interval: Some([to_hex(lo as f32), to_hex(hi as f32)]),
                count: Some(report.histograms.first().map_or(0, |h| h.total)),
                algorithms: algos.clone(),
                ..Default::default()
            };
            let mut env = ReportEnvelope::new("exhaustive", precision, plan, fma_ok);
            env.rows = report
                .histograms
                .iter()
                .map(|h| HistogramRow::from_histogram(h, precision))
                .collect();
            env.nonzero_inputs = Some(
                report
                    .nonzero_inputs
                    .iter()
                    .map(|(algo, xs)| NonzeroInputs {
                        algo: *algo,
                        inputs_hex: xs.iter().map(|&x| to_hex(x)).collect(),
                    })
                    .collect(),
            );
            finish(env, violation_of(&report.histograms))
        }
        Command::Scan { kmin, kmax, algos } => {
            let rows = harness::scan_counterexample_family(*kmin, *kmax, algos, precision)?;
            let violation = rows
                .iter()
                .find(|r| r.algorithm.weakly_rounded() && !r.class.is_faithful())
                .map(|r| format!("{} is not faithful at k = {}", r.algorithm, r.k));
            let plan = PlanEcho {
                algorithms: algos.clone(),
                k_range: Some([*kmin, *kmax]),
                ..Default::default()
            };
            let mut env = ReportEnvelope::new("scan", precision, plan, fma_ok);
            env.scan = Some(rows.iter().map(|r| ScanRowOut::from_row(r, precision)).collect());
            finish(env, violation)
        }
        Command::Invariants { interval, samples, plan_file } => {
            let plan = match plan_file {
                Some(path) => plan_from_envelope(&read_plan_file(path)?)?,
                None => {
                    let (lo, hi) = parse_interval(interval, precision)?;
                    SamplePlan::new(lo, hi, *samples, common.seed, precision, vec![AlgorithmId::Newton])
                }
            };
            let engine = Engine::new(common.threads)?;
            let report = engine.run_invariant_suite(&plan)?;
            let violation = (!report.passed()).then(|| {
                let failed: Vec<_> = report
                    .families
                    .iter()
                    .filter(|f| !f.passed())
                    .map(|f| f.family.name())
                    .collect();
                format!("invariants failed: {}", failed.join(", "))
            });
            let mut env = ReportEnvelope::new("invariants", plan.precision, echo_plan(&plan), fma_ok);
            env.invariants = Some(report);
            finish(env, violation)
        }
        Command::Bench { algos, n, reps } => {
            let report = harness::run_benchmark(algos, *n, *reps, precision, common.seed)?;
            let plan = PlanEcho {
                interval: Some([hex(0.5, precision), hex(2.0, precision)]),
                count: Some(*n),
                seed: Some(common.seed),
                prng: Some(PRNG_ID.to_string()),
                algorithms: algos.clone(),
                reps: Some(*reps),
                ..Default::default()
            };
            let mut env = ReportEnvelope::new("bench", precision, plan, fma_ok);
            env.bench = Some(report);
            finish(env, None)
        }
    }
}

/// Parses arguments, runs, writes output, and maps the result to an exit code.
pub fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { EXIT_USAGE } else { EXIT_OK });
        }
    };
    match execute(&cli) {
        Ok(outcome) => {
            if let Some(path) = &cli.common.out {
                if let Err(e) = fs::write(path, &outcome.text) {
                    eprintln!("error: cannot write {}: {e}", path.display());
                    return ExitCode::from(EXIT_USAGE);
                }
            } else {
                print!("{}", outcome.text);
            }
            match outcome.violation {
                Some(msg) => {
                    eprintln!("violation: {msg}");
                    ExitCode::from(EXIT_VIOLATION)
                }
                None => ExitCode::from(EXIT_OK),
            }
        }
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}

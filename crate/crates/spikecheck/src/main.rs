use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Duration;

use anyhow::{bail, Context};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::json;
use spikecheck::bench::{run_plan, BenchPlan, InstanceSource, RandomInstances};
use spikecheck::gen::{gen_model, GenSpec};
use spikecheck::idx::{image_to_input, load_idx, read_encoded, write_encoded, EncodedSample, Sample};
use spikecheck::model_file::model_to_string;
use spikecheck::report::{read_reports, summarize, summary_csv, summary_table, time_trends, CellShape};
use spikecheck::{
    dcs_verify, load_model, smt_verify, DcsOptions, Method, ReportLog, ReportRecord, SmtOptions, SolverConfig,
};
use spikecheck_core::perturb::{count_rate, count_temporal, space_ratio, temporal_upper_bound};
use spikecheck_core::{infer, PerturbationBudget, PerturbationMode, SnnModel, SpaceCount, SpikeTimes, VerdictKind};

const EXIT_USAGE: u8 = 3;
const EXIT_ERROR: u8 = 4;

/// Local robustness verification for temporally coded spiking networks.
///
/// `verify` exits 0 when robust, 1 when a counterexample exists, 2 when the
/// answer is unknown (timeout or solver failure), 3 on usage errors and 4 on
/// other failures.
#[derive(Parser)]
#[command(name = "spikecheck", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Check whether every input within the L1 budget keeps the label.
    Verify(VerifyArgs),
    /// Size of the rate and temporal perturbation spaces.
    Count(CountArgs),
    /// Write a seeded random model file.
    GenModel(GenArgs),
    /// Run a benchmark grid and print its summary.
    Bench(BenchArgs),
    /// Encode IDX images as input spike times (one JSON object per line).
    ImportMnist(ImportArgs),
    /// Summarize an existing report log.
    Summarize(SummarizeArgs),
}

fn parse_secs(s: &str) -> Result<Duration, String> {
    let v: f64 = s.parse().map_err(|e| format!("`{s}`: {e}"))?;
    Duration::try_from_secs_f64(v).map_err(|e| format!("`{s}`: {e}"))
}

#[derive(Args)]
struct VerifyArgs {
    /// Model file (JSON).
    #[arg(long)]
    model: PathBuf,
    /// Input spike times, comma separated.
    #[arg(long, value_delimiter = ',', conflicts_with = "inputs")]
    input: Option<Vec<u32>>,
    /// Encoded inputs written by `import-mnist`.
    #[arg(long, requires = "index")]
    inputs: Option<PathBuf>,
    /// Item of `--inputs` to verify (its `index` field).
    #[arg(long)]
    index: Option<usize>,
    /// Reference label; defaults to the model's prediction on the input.
    #[arg(long)]
    label: Option<usize>,
    /// L1 budget on input spike-time shifts.
    #[arg(long, default_value_t = 1)]
    delta: u32,
    #[arg(long, value_enum, default_value_t = Method::Dcs)]
    method: Method,
    /// Solver command line; the script is written to its standard input.
    #[arg(long, default_value = "z3 -in")]
    solver: String,
    /// Worker threads for the direct search.
    #[arg(long, default_value_t = 1)]
    workers: usize,
    /// Accept any counterexample instead of the lexicographically first.
    #[arg(long)]
    any_counterexample: bool,
    /// Give up after this many seconds (search deadline or solver timeout).
    #[arg(long, value_parser = parse_secs)]
    deadline: Option<Duration>,
    /// Append the result to this report log.
    #[arg(long)]
    report: Option<PathBuf>,
    /// Instance name recorded in the report.
    #[arg(long)]
    instance: Option<String>,
    /// Write the SMT-LIB script here (smt method only).
    #[arg(long)]
    dump_smt: Option<PathBuf>,
    /// Only perturbations whose total shift equals the budget exactly.
    #[arg(long)]
    compat_exact_delta: bool,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Encoding {
    Rate,
    Temporal,
    Both,
}

#[derive(Args)]
struct CountArgs {
    /// Input neurons; taken from `--input` when that is given.
    #[arg(long)]
    n: Option<u64>,
    /// Time steps.
    #[arg(long)]
    t: u32,
    #[arg(long)]
    delta: u32,
    #[arg(long, value_enum, default_value_t = Encoding::Both)]
    encoding: Encoding,
    /// Input spike times for an exact temporal count; without it the
    /// placement-free upper bound is printed.
    #[arg(long, value_delimiter = ',')]
    input: Option<Vec<u32>>,
    #[arg(long)]
    json: bool,
}

#[derive(Args)]
struct GenArgs {
    /// Layer sizes, input first, comma separated.
    #[arg(long, value_delimiter = ',', required = true)]
    layers: Vec<usize>,
    #[arg(long)]
    t: u32,
    #[arg(long, default_value_t = 1)]
    tau: u32,
    #[arg(long, default_value_t = 1.0)]
    theta: f64,
    /// Weights are multiples of 2^-granularity.
    #[arg(long, default_value_t = 10)]
    granularity: u32,
    /// Smallest weight numerator (default -2^granularity).
    #[arg(long, allow_hyphen_values = true)]
    k_min: Option<i64>,
    /// Largest weight numerator (default 2^granularity).
    #[arg(long, allow_hyphen_values = true)]
    k_max: Option<i64>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct BenchArgs {
    #[arg(long, value_delimiter = ',', default_value = "16,32,48,64")]
    t: Vec<u32>,
    #[arg(long, value_delimiter = ',', default_value = "32")]
    hidden: Vec<usize>,
    /// Input neurons (ignored with `--mnist-images`, where the pooled image
    /// size decides).
    #[arg(long, default_value_t = 8)]
    inputs: usize,
    #[arg(long, default_value_t = 10)]
    outputs: usize,
    #[arg(long, value_delimiter = ',', default_value = "1,2")]
    delta: Vec<u32>,
    #[arg(long, value_enum, value_delimiter = ',', default_value = "dcs")]
    method: Vec<Method>,
    #[arg(long, default_value_t = spikecheck::bench::DEFAULT_SAMPLES)]
    samples: usize,
    #[arg(long, default_value_t = 1)]
    reps: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Per-run limit in seconds; runs that hit it are counted as timeouts.
    #[arg(long, value_parser = parse_secs)]
    deadline: Option<Duration>,
    #[arg(long, default_value_t = 1)]
    workers: usize,
    /// Run different (T, hidden) shapes concurrently.
    #[arg(long)]
    parallel_cells: bool,
    #[arg(long, default_value = "z3 -in")]
    solver: String,
    #[arg(long, default_value_t = 1)]
    tau: u32,
    #[arg(long, default_value_t = 1.0)]
    theta: f64,
    /// Raw report log (appended to).
    #[arg(long)]
    report: Option<PathBuf>,
    /// Machine-readable summary (JSON).
    #[arg(long)]
    summary_json: Option<PathBuf>,
    #[arg(long)]
    summary_csv: Option<PathBuf>,
    /// Take inputs from IDX images instead of random spike times.
    #[arg(long, requires = "mnist_labels")]
    mnist_images: Option<PathBuf>,
    #[arg(long)]
    mnist_labels: Option<PathBuf>,
    #[arg(long, default_value_t = 7)]
    downscale: usize,
}

#[derive(Args)]
struct ImportArgs {
    #[arg(long)]
    images: PathBuf,
    #[arg(long)]
    labels: PathBuf,
    /// Block-average pooling factor; must divide the image size.
    #[arg(long, default_value_t = 1)]
    downscale: usize,
    #[arg(long)]
    t: u32,
    #[arg(long, default_value_t = 0)]
    offset: usize,
    /// Items to convert (default: all from `--offset`).
    #[arg(long)]
    count: Option<usize>,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct SummarizeArgs {
    #[arg(long)]
    report: PathBuf,
    #[arg(long)]
    csv: bool,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(EXIT_USAGE) } else { ExitCode::SUCCESS };
        }
    };
    let result = match cli.command {
        Command::Verify(a) => verify(a),
        Command::Count(a) => count(a).map(|()| ExitCode::SUCCESS),
        Command::GenModel(a) => gen(a).map(|()| ExitCode::SUCCESS),
        Command::Bench(a) => bench(a).map(|()| ExitCode::SUCCESS),
        Command::ImportMnist(a) => import(a).map(|()| ExitCode::SUCCESS),
        Command::Summarize(a) => summarize_cmd(a).map(|()| ExitCode::SUCCESS),
    };
    result.unwrap_or_else(|e| {
        eprintln!("error: {e:#}");
        let usage = e.downcast_ref::<spikecheck::Error>().is_some_and(spikecheck::Error::is_usage)
            || e.downcast_ref::<spikecheck_core::Error>().is_some_and(|c| {
                spikecheck::Error::Core(c.clone()).is_usage()
            });
        ExitCode::from(if usage { EXIT_USAGE } else { EXIT_ERROR })
    })
}

fn verify_input(a: &VerifyArgs) -> anyhow::Result<SpikeTimes> {
    match (&a.input, &a.inputs) {
        (Some(times), _) => Ok(SpikeTimes::input(times.clone())),
        (None, Some(path)) => {
            let index = a.index.expect("clap enforces --index");
            let item = read_encoded(path)?
                .into_iter()
                .find(|s| s.index == index)
                .with_context(|| format!("{} has no item with index {index}", path.display()))?;
            Ok(SpikeTimes::input(item.times))
        }
        (None, None) => Err(spikecheck::Error::Usage("one of --input or --inputs is required".into()).into()),
    }
}

fn verify(a: VerifyArgs) -> anyhow::Result<ExitCode> {
    let model = load_model(&a.model)?;
    let input = verify_input(&a)?;
    input.check_input(model.config())?;
    let label = match a.label {
        Some(l) => l,
        None => infer(&model, &input)?.label,
    };
    let budget = PerturbationBudget(a.delta);
    if a.method == Method::Smt && a.compat_exact_delta {
        return Err(spikecheck::Error::Usage("--compat-exact-delta only applies to --method dcs".into()).into());
    }
    if a.method == Method::Dcs && a.dump_smt.is_some() {
        return Err(spikecheck::Error::Usage("--dump-smt only applies to --method smt".into()).into());
    }
    let verdict = match a.method {
        Method::Dcs => dcs_verify(
            &model,
            &input,
            label,
            budget,
            &DcsOptions {
                workers: a.workers,
                deterministic: !a.any_counterexample,
                deadline: a.deadline,
                mode: if a.compat_exact_delta {
                    PerturbationMode::Exactly
                } else {
                    PerturbationMode::AtMost
                },
            },
        )?,
        Method::Smt => smt_verify(
            &model,
            &input,
            label,
            budget,
            &SmtOptions {
                solver: SolverConfig::new(&a.solver).with_timeout(a.deadline),
                dump: a.dump_smt.clone(),
            },
        )?,
    };

    println!("verdict: {}", verdict.kind());
    println!("label: {label}");
    println!("delta: {}", a.delta);
    if let Some(reason) = verdict.reason() {
        println!("reason: {reason}");
    }
    if let Some(cex) = verdict.counterexample() {
        println!("counterexample: {:?}", cex.input.times);
        println!("output spike times: {:?}", cex.output_times);
        println!(
            "predicted: {}{}",
            cex.prediction.label,
            if cex.prediction.strict { "" } else { " (tie)" }
        );
    }
    if a.method == Method::Dcs {
        println!("perturbations checked: {}", verdict.stats.perturbations_checked);
    }
    println!("wall time: {:.6} s", verdict.stats.wall_time.as_secs_f64());

    if let Some(path) = &a.report {
        let id = a.instance.clone().unwrap_or_else(|| input.short_hash());
        let record = ReportRecord::new(id, a.method, &model, &input, label, a.delta, &verdict, None);
        spikecheck::append_report(&record, path)?;
    }
    Ok(ExitCode::from(match verdict.kind() {
        VerdictKind::Robust => 0,
        VerdictKind::NotRobust => 1,
        VerdictKind::Unknown => 2,
    }))
}

fn count_json(c: &SpaceCount) -> serde_json::Value {
    json!({
        "exact": c.exact.as_ref().map(ToString::to_string),
        "ln": c.ln_value,
        "clamped": c.clamped,
    })
}

fn count_line(name: &str, c: &SpaceCount) -> String {
    let mut line = match &c.exact {
        Some(x) => format!("{name}: {x} (ln {:.6})", c.ln_value),
        None => format!("{name}: ~10^{:.1} (ln {:.6}, exact value not computed)", c.approx_digits(), c.ln_value),
    };
    if c.clamped {
        line.push_str(" [budget clamped]");
    }
    line
}

fn count(a: CountArgs) -> anyhow::Result<()> {
    let input = a.input.map(SpikeTimes::input);
    let n = match (&input, a.n) {
        (Some(s), Some(n)) if s.len() as u64 != n => bail!(spikecheck::Error::Usage(format!(
            "--n {n} disagrees with {} input times",
            s.len()
        ))),
        (Some(s), _) => s.len() as u64,
        (None, Some(n)) => n,
        (None, None) => bail!(spikecheck::Error::Usage("give --n or --input".into())),
    };
    if a.t == 0 {
        bail!(spikecheck::Error::Usage("--t must be positive".into()));
    }
    if let Some(s) = &input {
        if let Some(&bad) = s.times.iter().find(|&&x| x >= a.t) {
            bail!(spikecheck::Error::Usage(format!("input time {bad} outside [0, {}]", a.t - 1)));
        }
    }
    let budget = PerturbationBudget(a.delta);
    let mut doc = serde_json::Map::new();
    let mut lines = Vec::new();
    if matches!(a.encoding, Encoding::Rate | Encoding::Both) {
        let c = count_rate(n, u64::from(a.t), budget);
        lines.push(count_line("rate", &c));
        doc.insert("rate".into(), count_json(&c));
    }
    if matches!(a.encoding, Encoding::Temporal | Encoding::Both) {
        match &input {
            Some(s) => {
                let c = count_temporal(s, a.t, budget);
                lines.push(count_line("temporal", &c));
                doc.insert("temporal".into(), count_json(&c));
            }
            None => {
                let c = temporal_upper_bound(n, budget);
                lines.push(count_line("temporal upper bound", &c));
                doc.insert("temporal_upper_bound".into(), count_json(&c));
            }
        }
    }
    if a.encoding == Encoding::Both {
        let n32 = u32::try_from(n).context("--n too large for the ratio")?;
        let ln_f = space_ratio(a.t, n32, budget);
        lines.push(format!("ln f: {ln_f:.6}"));
        doc.insert("ln_ratio".into(), json!(ln_f));
    }
    if a.json {
        println!("{}", serde_json::Value::Object(doc));
    } else {
        for l in lines {
            println!("{l}");
        }
    }
    Ok(())
}

fn gen(a: GenArgs) -> anyhow::Result<()> {
    let mut spec = GenSpec::new(a.layers, a.t);
    spec.tau = a.tau;
    spec.theta = a.theta;
    spec.granularity = a.granularity;
    let reach = 1i64.checked_shl(a.granularity).filter(|_| a.granularity <= 52);
    spec.k_min = a.k_min.or(reach.map(|r| -r)).unwrap_or(0);
    spec.k_max = a.k_max.or(reach).unwrap_or(0);
    let model = gen_model(&spec, a.seed)?;
    let note = format!(
        "generated: seed {}, weights k * 2^-{} with k in [{}, {}]",
        a.seed, spec.granularity, spec.k_min, spec.k_max
    );
    std::fs::write(&a.out, model_to_string(&model, Some(&note)))
        .with_context(|| format!("writing {}", a.out.display()))?;
    println!("{} {}", model.short_hash(), a.out.display());
    Ok(())
}

/// Random models, inputs taken from a dataset in order.
struct DatasetInstances {
    samples: Vec<Sample>,
    factor: usize,
}

impl InstanceSource for DatasetInstances {
    fn model(&self, plan: &BenchPlan, shape: &CellShape, seed: u64) -> spikecheck::Result<SnnModel> {
        RandomInstances.model(plan, shape, seed)
    }

    fn inputs(&self, plan: &BenchPlan, model: &SnnModel, _seed: u64) -> spikecheck::Result<Vec<SpikeTimes>> {
        self.samples
            .iter()
            .take(plan.samples)
            .map(|s| image_to_input(&s.image, self.factor, model.config().time_steps))
            .collect()
    }
}

fn bench(a: BenchArgs) -> anyhow::Result<()> {
    let mut plan = BenchPlan {
        time_steps: a.t,
        hidden: a.hidden,
        inputs: a.inputs,
        outputs: a.outputs,
        deltas: a.delta,
        methods: a.method,
        samples: a.samples,
        repetitions: a.reps,
        seed: a.seed,
        deadline: a.deadline,
        tau: a.tau,
        theta: a.theta,
        workers: a.workers,
        parallel_cells: a.parallel_cells,
        solver: SolverConfig::new(a.solver),
    };
    let log = a.report.as_ref().map(ReportLog::open).transpose()?;
    let records = match (&a.mnist_images, &a.mnist_labels) {
        (Some(images), Some(labels)) => {
            let samples = load_idx(images, labels)?;
            let first = samples.first().context("dataset is empty")?;
            if first.image.rows % a.downscale != 0 || first.image.cols % a.downscale != 0 {
                bail!(spikecheck::Error::Usage(format!("--downscale {} does not divide the images", a.downscale)));
            }
            plan.inputs = (first.image.rows / a.downscale) * (first.image.cols / a.downscale);
            let source = DatasetInstances {
                samples,
                factor: a.downscale,
            };
            run_plan(&plan, &source, log.as_ref())?
        }
        _ => run_plan(&plan, &RandomInstances, log.as_ref())?,
    };
    let rows = summarize(&records);
    print!("{}", summary_table(&rows));
    let trends = time_trends(&rows);
    for t in &trends {
        println!(
            "{} delta={} inputs={} hidden={}: time ~ {:.3e} * T + {:.3e}, R^2 = {:.4}",
            t.method.as_str(),
            t.delta,
            t.inputs,
            t.hidden,
            t.fit.slope,
            t.fit.intercept,
            t.fit.r2
        );
    }
    if let Some(path) = &a.summary_csv {
        std::fs::write(path, summary_csv(&rows)).with_context(|| format!("writing {}", path.display()))?;
    }
    if let Some(path) = &a.summary_json {
        let doc = json!({ "cells": rows, "trends": trends });
        std::fs::write(path, serde_json::to_string_pretty(&doc)? + "\n")
            .with_context(|| format!("writing {}", path.display()))?;
    }
    Ok(())
}

fn import(a: ImportArgs) -> anyhow::Result<()> {
    let samples = load_idx(&a.images, &a.labels)?;
    let end = a.count.map_or(samples.len(), |c| (a.offset + c).min(samples.len()));
    let encoded = samples
        .iter()
        .enumerate()
        .take(end)
        .skip(a.offset)
        .map(|(index, s)| {
            Ok(EncodedSample {
                index,
                label: s.label,
                times: image_to_input(&s.image, a.downscale, a.t)?.times,
            })
        })
        .collect::<spikecheck::Result<Vec<_>>>()?;
    write_encoded(&encoded, &a.out)?;
    println!("{} items, {} inputs each -> {}", encoded.len(), encoded.first().map_or(0, |e| e.times.len()), a.out.display());
    Ok(())
}

fn summarize_cmd(a: SummarizeArgs) -> anyhow::Result<()> {
    let rows = summarize(&read_reports(&a.report)?);
    if a.csv {
        print!("{}", summary_csv(&rows));
    } else {
        print!("{}", summary_table(&rows));
    }
    Ok(())
}

use std::collections::BTreeMap;
use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde::Serialize;

use ifs_core::construction::{find_exceptional, ExceptionalRun, SolveConfig};
use ifs_core::dimension::{classify, DimensionRecord};
use ifs_core::ifs::{parse_rational, DEFAULT_PRECISION};
use ifs_core::partition::{
    default_tolerance, enumerate_classes, enumerate_depths, enumerate_partition_exact, write_classes_csv,
    PartitionSummary, DEFAULT_DEPTH_CAP,
};
use ifs_core::sampler::{
    default_depth, default_scales, entropy_dimension_estimate, sample_measure, DimensionEstimate, DEFAULT_BINS,
    DEFAULT_COUNT,
};
use ifs_core::{Error, Params};

const SCHEMA_VERSION: u32 = 1;

#[derive(Parser)]
#[command(name = "ifs-singular", version, about = "Certified singular self-similar measures for x -> b1 x, x -> b2 x + 1")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Certify a parameter b1 just above 1/(4 b2) where two words give the same map
    FindExceptional(FindArgs),
    /// Level-m partition sizes and entropies, one CSV row per depth
    Coincidences(CoincidenceArgs),
    /// Lyapunov exponent, dimension bound and singularity regime
    DimBound(DimArgs),
    /// Monte Carlo histogram of the measure
    Sample(SampleArgs),
}

#[derive(Args)]
struct FindArgs {
    #[arg(long)]
    beta2: String,
    #[arg(long, default_value = "1e-3")]
    epsilon: String,
    #[arg(long, default_value_t = DEFAULT_PRECISION)]
    precision: u32,
    #[arg(long, default_value_t = 2)]
    k_start: usize,
    #[arg(long, default_value_t = 64)]
    k_cap: usize,
    /// Certificate path; stdout when absent
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct CoincidenceArgs {
    #[arg(long)]
    beta1: String,
    #[arg(long)]
    beta2: String,
    #[arg(long)]
    m_max: u32,
    /// Maps are merged when translations differ by less than 2^-tol_exp
    /// (default: half the precision)
    #[arg(long)]
    tol_exp: Option<u32>,
    #[arg(long, default_value_t = DEFAULT_PRECISION)]
    precision: u32,
    /// Exact rational arithmetic; both parameters must be rational
    #[arg(long)]
    exact: bool,
    /// Write the classes at --dump-depth (default m_max) to this CSV
    #[arg(long)]
    dump_classes: Option<PathBuf>,
    #[arg(long)]
    dump_depth: Option<u32>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct DimArgs {
    #[arg(long)]
    beta1: String,
    #[arg(long)]
    beta2: String,
    /// Depth of a known coincidence T_s = T_t
    #[arg(long)]
    n: Option<u64>,
    #[arg(long, default_value_t = DEFAULT_PRECISION)]
    precision: u32,
    #[arg(long)]
    json: bool,
}

#[derive(Args)]
struct SampleArgs {
    #[arg(long)]
    beta1: String,
    #[arg(long)]
    beta2: String,
    #[arg(long, default_value_t = DEFAULT_COUNT)]
    count: u64,
    /// Word length; default makes max(b1, b2)^depth < 2^-40
    #[arg(long)]
    depth: Option<u32>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = DEFAULT_BINS)]
    bins: usize,
    /// Histogram CSV; metadata goes next to it with a .json extension
    #[arg(long)]
    out: PathBuf,
    #[arg(long)]
    estimate_dim: bool,
}

#[derive(Debug)]
enum Failure {
    Usage(String),
    Io(String),
    Construction(String),
    Precision(String),
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::Io(_) => 1,
            Failure::Usage(_) => 2,
            Failure::Construction(_) => 3,
            Failure::Precision(_) => 4,
        }
    }

    fn message(&self) -> &str {
        match self {
            Failure::Usage(m) | Failure::Io(m) | Failure::Construction(m) | Failure::Precision(m) => m,
        }
    }
}

impl From<Error> for Failure {
    fn from(err: Error) -> Self {
        match err {
            Error::Precision(_) => Failure::Precision(err.to_string()),
            Error::Construction(_) => Failure::Construction(err.to_string()),
            Error::Domain(_) | Error::Precondition(_) | Error::Resource(_) => Failure::Usage(err.to_string()),
        }
    }
}

fn io_failure(path: &Path) -> impl FnOnce(io::Error) -> Failure + '_ {
    move |e| Failure::Io(format!("{}: {e}", path.display()))
}

fn check_precision(bits: u32) -> Result<(), Failure> {
    if bits < 64 {
        return Err(Failure::Usage(format!("precision must be at least 64 bits, got {bits}")));
    }
    Ok(())
}

fn create(path: &Path) -> Result<BufWriter<File>, Failure> {
    File::create(path).map(BufWriter::new).map_err(io_failure(path))
}

/// Writes `text` to `path`, or to stdout when no path is given.
fn emit(path: Option<&Path>, text: &str) -> Result<(), Failure> {
    match path {
        Some(p) => {
            let mut w = create(p)?;
            w.write_all(text.as_bytes()).and_then(|_| w.flush()).map_err(io_failure(p))
        }
        None => {
            let mut out = io::stdout().lock();
            out.write_all(text.as_bytes()).map_err(|e| Failure::Io(format!("stdout: {e}")))
        }
    }
}

fn echo(pairs: &[(&str, String)]) -> BTreeMap<String, String> {
    pairs.iter().map(|(k, v)| (k.to_string(), v.clone())).collect()
}

fn find_cmd(args: &FindArgs) -> Result<(), Failure> {
    check_precision(args.precision)?;
    if args.k_start == 0 || args.k_start > args.k_cap {
        return Err(Failure::Usage(format!(
            "need 1 <= k-start <= k-cap, got {} and {}",
            args.k_start, args.k_cap
        )));
    }
    let config = SolveConfig {
        precision_bits: args.precision,
        k_cap: args.k_cap,
        max_precision_bits: args.precision.max(4096),
        ..SolveConfig::default()
    };
    let run = find_exceptional(&args.beta2, &args.epsilon, args.k_start, &config)?;
    let mut record = run.certificate.to_record();
    record.input = echo(&[
        ("beta2", args.beta2.clone()),
        ("epsilon", args.epsilon.clone()),
        ("precision", args.precision.to_string()),
        ("k_start", args.k_start.to_string()),
        ("k_cap", args.k_cap.to_string()),
    ]);
    emit(args.out.as_deref(), &(record.to_json() + "\n"))?;

    if record.singular {
        Ok(())
    } else {
        dump_trace(&run);
        Err(Failure::Construction(format!(
            "certificate at k={} (n={}) is not singular: b1*b2 is outside D_{}, dim bound {}",
            record.k, record.n, record.n, record.dim_bound
        )))
    }
}

fn dump_trace(run: &ExceptionalRun) {
    let mut err = io::stderr().lock();
    let _ = writeln!(err, "block trace (l, N_l, M_l, y_l):");
    for (l, block) in run.certificate.trace.blocks().iter().enumerate() {
        let _ = writeln!(err, "  {}, {}, {}, {}", l + 1, block.twos, block.ones, block.y.to_decimal());
    }
    let _ = writeln!(err, "schedule (k, n, c*lambda^n, D_n margin):");
    for step in &run.schedule {
        let _ = writeln!(
            err,
            "  {}, {}, {:e}, {:e}",
            step.k,
            step.n,
            step.bracket_bound.to_f64(),
            step.domain_margin.to_f64()
        );
    }
}

fn coincidences_cmd(args: &CoincidenceArgs) -> Result<(), Failure> {
    check_precision(args.precision)?;
    let tol = match args.tol_exp {
        Some(e) => 2f64.powi(-(e as i32)),
        None => default_tolerance(args.precision),
    };
    let summaries: Vec<PartitionSummary> = if args.exact {
        let (b1, b2) = match (parse_rational(&args.beta1), parse_rational(&args.beta2)) {
            (Some(a), Some(b)) => (a, b),
            _ => return Err(Failure::Usage("--exact needs rational parameters".into())),
        };
        (1..=args.m_max.max(1))
            .map(|m| enumerate_partition_exact(&b1, &b2, m))
            .collect::<Result<_, _>>()?
    } else {
        let params = Params::parse(&args.beta1, &args.beta2, args.precision)?;
        enumerate_depths(&params, args.m_max, tol, DEFAULT_DEPTH_CAP)?
    };

    let mut table = String::from("m,card,entropy,entropy_rate\n");
    for s in &summaries {
        table.push_str(&format!(
            "{},{},{},{}\n",
            s.depth,
            s.class_count,
            s.entropy_nats,
            s.entropy_rate()
        ));
    }
    emit(args.out.as_deref(), &table)?;
    let near: u64 = summaries.iter().map(|s| s.near_coincidences).sum();
    if near > 0 {
        eprintln!("warning: {near} near coincidences within 10x the tolerance {tol:e}");
    }

    if let Some(path) = &args.dump_classes {
        let depth = args.dump_depth.unwrap_or(args.m_max);
        let params = Params::parse(&args.beta1, &args.beta2, args.precision)?;
        let partition = enumerate_classes(&params, depth, tol, DEFAULT_DEPTH_CAP)?;
        let mut w = create(path)?;
        write_classes_csv(&partition, &mut w)
            .and_then(|_| w.flush())
            .map_err(io_failure(path))?;
    }
    Ok(())
}

#[derive(Serialize)]
struct DimOutput {
    schema_version: u32,
    input: BTreeMap<String, String>,
    report: DimensionRecord,
    singular: bool,
}

fn dim_cmd(args: &DimArgs) -> Result<(), Failure> {
    check_precision(args.precision)?;
    let params = Params::parse(&args.beta1, &args.beta2, args.precision)?;
    let report = classify(&params, args.n)?;
    if args.json {
        let out = DimOutput {
            schema_version: SCHEMA_VERSION,
            input: echo(&[
                ("beta1", args.beta1.clone()),
                ("beta2", args.beta2.clone()),
                ("n", args.n.map(|n| n.to_string()).unwrap_or_default()),
                ("precision", args.precision.to_string()),
            ]),
            singular: report.is_singular(),
            report: report.to_record(),
        };
        let text = serde_json::to_string_pretty(&out).expect("report serializes");
        return emit(None, &(text + "\n"));
    }
    let mut text = format!(
        "regime: {}\nlyapunov: {}\nentropy_bound: {}\ndim_bound: {}\nproduct: {}\n",
        report.regime,
        report.lyapunov.to_f64(),
        report.entropy_bound.to_f64(),
        report.dim_bound.to_f64(),
        report.product.to_f64(),
    );
    if let Some(t) = &report.threshold {
        text.push_str(&format!("threshold: {}\n", t.to_f64()));
    }
    for note in &report.notes {
        text.push_str(&format!("note: {note}\n"));
    }
    emit(None, &text)
}

#[derive(Serialize)]
struct SampleMetadata {
    schema_version: u32,
    input: BTreeMap<String, String>,
    depth: u32,
    interval: [f64; 2],
    bin_width: f64,
    sample_range: [f64; 2],
    truncation_error: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    dimension_estimate: Option<DimensionEstimate>,
}

fn sample_cmd(args: &SampleArgs) -> Result<(), Failure> {
    let params = Params::parse(&args.beta1, &args.beta2, DEFAULT_PRECISION)?;
    let depth = args.depth.unwrap_or_else(|| default_depth(&params));
    // the estimate wants fine boxes; sample finer and merge down for output
    let refine = if args.estimate_dim && args.bins > 0 {
        DEFAULT_BINS.div_ceil(args.bins).next_power_of_two()
    } else {
        1
    };
    let fine = sample_measure(&params, args.count, depth, args.seed, args.bins.saturating_mul(refine))?;
    let estimate = if args.estimate_dim {
        let est = entropy_dimension_estimate(&fine, &default_scales(&fine))?;
        println!("entropy dimension estimate: {} +- {}", est.slope, est.stderr);
        Some(est)
    } else {
        None
    };
    let em = fine.coarsen(refine)?;

    let mut w = create(&args.out)?;
    em.write_csv(&mut w).and_then(|_| w.flush()).map_err(io_failure(&args.out))?;

    let meta = SampleMetadata {
        schema_version: SCHEMA_VERSION,
        input: echo(&[
            ("beta1", args.beta1.clone()),
            ("beta2", args.beta2.clone()),
            ("count", args.count.to_string()),
            ("depth", args.depth.map(|d| d.to_string()).unwrap_or_default()),
            ("seed", args.seed.to_string()),
            ("bins", args.bins.to_string()),
        ]),
        depth,
        interval: [0.0, em.interval_right],
        bin_width: em.bin_width,
        sample_range: [em.sample_range.0, em.sample_range.1],
        truncation_error: em.truncation_error,
        dimension_estimate: estimate,
    };
    let meta_path = args.out.with_extension("json");
    let text = serde_json::to_string_pretty(&meta).expect("metadata serializes");
    emit(Some(&meta_path), &(text + "\n"))
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::FindExceptional(a) => find_cmd(a),
        Command::Coincidences(a) => coincidences_cmd(a),
        Command::DimBound(a) => dim_cmd(a),
        Command::Sample(a) => sample_cmd(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {}", f.message());
            ExitCode::from(f.code())
        }
    }
}

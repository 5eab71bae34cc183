//! The `nodal` command line: `bound`, `sample`, `count` and `verify`.
//!
//! Exit status is 0 on success, 1 on domain errors or failed verification,
//! and 2 on usage errors.

use std::fs::File;
use std::io::{self, BufRead, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::{json, Value};

use crate::bound_engine::{nu_lower_bound, optimize, BoundMode};
use crate::field_sampler::{
    draw, eval_raster, sample_seed, truncation_order, write_raster_csv, GridSpec, RasterSidecar,
    DEFAULT_TRUNCATION_EPS,
};
use crate::nodal_counter::{count_ensemble, estimate_nu, NodalCensus};
use crate::verifier::{run_suite, Suite, SuiteConfig};

pub const TOOL: &str = "nodal";
pub const VERSION: &str = env!("CARGO_PKG_VERSION");

const SEED_HELP: &str = "Master seed. Sample i of a run uses the ChaCha8 stream keyed by \
sample_seed(seed, i) = splitmix64(splitmix64(seed) ^ (i * 0x9E3779B97F4A7C15)); each stream \
yields X0, X1, Y1, X2, Y2, ... as standard Gaussians.";

#[derive(Debug, Parser)]
#[command(
    name = "nodal",
    version,
    about = "Nodal domains of the random monochromatic plane wave and a lower bound on their density"
)]
pub struct Cli {
    #[arg(long, global = true, default_value_t = 7, help = SEED_HELP)]
    pub seed: u64,

    /// Worker threads for sample-parallel work (default: all cores).
    #[arg(long, global = true)]
    pub threads: Option<usize>,

    /// Output path (for `sample`, the stem of the `.bin`/`.json`/`.csv` files).
    #[arg(long, global = true)]
    pub output: Option<PathBuf>,

    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    pub format: Format,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Json,
    Csv,
    Bin,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Evaluate or optimise the analytic lower bound.
    Bound(BoundArgs),
    /// Write one field sample on a grid (binary + JSON sidecar, or CSV).
    Sample(SampleArgs),
    /// Count nodal domains over an ensemble; newline-delimited JSON censuses then the estimate.
    Count(CountArgs),
    /// Run Monte Carlo verification suites; exits 1 if any report fails.
    Verify(VerifyArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum ModeArg {
    Exact,
    Paper,
}

#[derive(Debug, Args, Serialize)]
pub struct BoundArgs {
    /// Circle radius, between the first two zeros of J0.
    #[arg(long, default_value_t = 3.8)]
    pub r: f64,
    /// Threshold on |X0|.
    #[arg(long = "T", default_value_t = 3.35)]
    #[serde(rename = "T")]
    pub t: f64,
    #[arg(long, value_enum, default_value_t = ModeArg::Exact)]
    pub mode: ModeArg,
    /// Search (r, T) for the largest exact bound instead.
    #[arg(long)]
    pub optimize: bool,
}

#[derive(Debug, Args, Serialize)]
pub struct SampleArgs {
    /// Sample index within the master-seed ensemble.
    #[arg(long, default_value_t = 0)]
    pub index: u64,
    #[arg(long, default_value_t = 0.05)]
    pub h: f64,
    #[arg(long, default_value_t = 10.0)]
    pub half_extent: f64,
    /// Override the truncation order chosen from the grid's largest radius.
    #[arg(long)]
    pub n_trunc: Option<usize>,
    #[arg(long, default_value_t = DEFAULT_TRUNCATION_EPS)]
    pub eps: f64,
}

#[derive(Debug, Args, Serialize)]
pub struct CountArgs {
    /// Disk radius.
    #[arg(long = "R", default_value_t = 50.0)]
    #[serde(rename = "R")]
    pub radius: f64,
    #[arg(long, default_value_t = 0.05)]
    pub h: f64,
    #[arg(long, default_value_t = 200)]
    pub samples: u64,
    #[arg(long, default_value_t = DEFAULT_TRUNCATION_EPS)]
    pub eps: f64,
    /// Continue an interrupted run recorded in --output.
    #[arg(long)]
    #[serde(skip)]
    pub resume: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum SuiteArg {
    Full,
    Lemma2,
    KacRice,
    CircleBound,
    Gr,
    Covariance,
    Helmholtz,
}

impl From<SuiteArg> for Suite {
    fn from(s: SuiteArg) -> Self {
        match s {
            SuiteArg::Full => Suite::Full,
            SuiteArg::Lemma2 => Suite::Lemma2,
            SuiteArg::KacRice => Suite::KacRice,
            SuiteArg::CircleBound => Suite::CircleBound,
            SuiteArg::Gr => Suite::Gr,
            SuiteArg::Covariance => Suite::Covariance,
            SuiteArg::Helmholtz => Suite::Helmholtz,
        }
    }
}

#[derive(Debug, Args, Serialize)]
pub struct VerifyArgs {
    #[arg(long, value_enum, default_value_t = SuiteArg::Full)]
    pub suite: SuiteArg,
    /// Circle radius for the circle-bound, lemma2 and gr checks.
    #[arg(long, default_value_t = 3.8)]
    pub r: f64,
    /// Threshold for the circle-bound check (default: 3.35 and the optimal threshold).
    #[arg(long = "T")]
    #[serde(rename = "T")]
    pub t: Option<f64>,
    /// Samples for the covariance, Kac-Rice and circle-event checks.
    #[arg(long, default_value_t = 100_000)]
    pub samples: u64,
    /// Draws for the containment check (about 0.6% trigger at r = 3.8).
    #[arg(long, default_value_t = 2_000_000)]
    pub lemma2_samples: u64,
    #[arg(long, default_value_t = 10)]
    pub helmholtz_samples: u64,
    #[arg(long = "nu-R", default_value_t = 50.0)]
    #[serde(rename = "nu_R")]
    pub nu_radius: f64,
    #[arg(long, default_value_t = 0.05)]
    pub nu_h: f64,
    #[arg(long, default_value_t = 200)]
    pub nu_samples: u64,
}

/// Error raised while running a subcommand; maps onto exit status 1.
#[derive(Debug, thiserror::Error)]
pub enum RunError {
    #[error(transparent)]
    Domain(#[from] crate::Error),
    #[error("i/o: {0}")]
    Io(#[from] io::Error),
    #[error("{0}")]
    Usage(String),
}

fn header(command: &str, seed: u64, format: Format, config: &impl Serialize) -> Value {
    json!({
        "tool": TOOL,
        "version": VERSION,
        "command": command,
        "seed": seed,
        "format": format,
        "config": config,
    })
}

/// Parses `args` and runs the command, returning the process exit status.
pub fn run_from<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return e.exit_code();
        }
    };
    if let Some(n) = cli.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
        {
            eprintln!("warning: thread pool already initialised: {e}");
        }
    }
    match run(&cli) {
        Ok(code) => code,
        Err(RunError::Usage(msg)) => {
            eprintln!("error: {msg}");
            2
        }
        Err(e) => {
            eprintln!("error: {e}");
            1
        }
    }
}

fn open_output(path: Option<&Path>) -> io::Result<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(File::create(p)?)),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    })
}

pub fn run(cli: &Cli) -> Result<i32, RunError> {
    match &cli.command {
        Command::Bound(a) => cmd_bound(cli, a),
        Command::Sample(a) => cmd_sample(cli, a),
        Command::Count(a) => cmd_count(cli, a),
        Command::Verify(a) => cmd_verify(cli, a),
    }
}

fn cmd_bound(cli: &Cli, a: &BoundArgs) -> Result<i32, RunError> {
    let result = if a.optimize {
        serde_json::to_value(optimize()?)
    } else {
        let mode = match a.mode {
            ModeArg::Exact => BoundMode::Exact,
            ModeArg::Paper => BoundMode::PaperReplication,
        };
        serde_json::to_value(nu_lower_bound(a.r, a.t, mode)?)
    }
    .map_err(io::Error::other)?;

    let mut out = open_output(cli.output.as_deref())?;
    match cli.format {
        Format::Json => {
            let doc =
                json!({ "header": header("bound", cli.seed, cli.format, a), "result": result });
            writeln!(
                out,
                "{}",
                serde_json::to_string_pretty(&doc).map_err(io::Error::other)?
            )?;
        }
        Format::Csv => {
            writeln!(out, "# {}", header("bound", cli.seed, cli.format, a))?;
            writeln!(out, "key,value")?;
            write_flat_csv(&mut out, "", &result)?;
        }
        Format::Bin => return Err(RunError::Usage("bound has no binary output".into())),
    }
    out.flush()?;
    Ok(0)
}

fn write_flat_csv(out: &mut dyn Write, prefix: &str, v: &Value) -> io::Result<()> {
    match v {
        Value::Object(map) => {
            for (k, v) in map {
                let key = if prefix.is_empty() {
                    k.clone()
                } else {
                    format!("{prefix}.{k}")
                };
                write_flat_csv(out, &key, v)?;
            }
            Ok(())
        }
        Value::String(s) => writeln!(out, "{prefix},{s}"),
        other => writeln!(out, "{prefix},{other}"),
    }
}

/// Largest raster side accepted for CSV export.
pub const CSV_MAX_SIDE: usize = 1001;

fn cmd_sample(cli: &Cli, a: &SampleArgs) -> Result<i32, RunError> {
    let grid = GridSpec::centered(a.h, a.half_extent)?;
    let n_trunc = match a.n_trunc {
        Some(n) => n,
        None => truncation_order(grid.max_radius(), a.eps)?,
    };
    let seed = sample_seed(cli.seed, a.index);
    let raster = eval_raster(&draw(seed, n_trunc)?, &grid)?;
    let stem = cli.output.clone().unwrap_or_else(|| PathBuf::from("field"));
    let head = header("sample", cli.seed, cli.format, a);

    let files: Vec<PathBuf> = match cli.format {
        Format::Bin | Format::Json => {
            let bin = stem.with_extension("bin");
            let sidecar_path = stem.with_extension("json");
            crate::field_sampler::write_raster_files(&raster, &bin, &sidecar_path)?;
            let mut sidecar =
                serde_json::to_value(RasterSidecar::of(&raster)).map_err(io::Error::other)?;
            sidecar["generator"] = head.clone();
            std::fs::write(
                &sidecar_path,
                serde_json::to_string_pretty(&sidecar).map_err(io::Error::other)? + "\n",
            )?;
            vec![bin, sidecar_path]
        }
        Format::Csv => {
            if raster.side() > CSV_MAX_SIDE {
                return Err(RunError::Domain(crate::Error::InvalidArgument(format!(
                    "raster side {} exceeds the CSV limit {CSV_MAX_SIDE}; use --format bin",
                    raster.side()
                ))));
            }
            let path = stem.with_extension("csv");
            let mut w = BufWriter::new(File::create(&path)?);
            writeln!(w, "# {head}")?;
            write_raster_csv(&raster, &mut w)?;
            vec![path]
        }
    };
    let summary = json!({
        "header": head,
        "sample_seed": seed,
        "n_trunc": n_trunc,
        "side": raster.side(),
        "files": files,
    });
    println!("{summary}");
    Ok(0)
}

/// Census lines of a previous run that match the seeds of indices `0, 1, ...`.
fn read_completed(path: &Path, master: u64, a: &CountArgs) -> Result<Vec<NodalCensus>, RunError> {
    let file = match File::open(path) {
        Ok(f) => f,
        Err(e) if e.kind() == io::ErrorKind::NotFound => return Ok(Vec::new()),
        Err(e) => return Err(e.into()),
    };
    let mut done = Vec::new();
    for line in BufReader::new(file).lines() {
        let Ok(line) = line else { break };
        let Ok(v) = serde_json::from_str::<Value>(&line) else {
            break;
        };
        if let Some(h) = v.get("header") {
            let cfg = &h["config"];
            let same = h["seed"] == json!(master)
                && cfg["R"] == json!(a.radius)
                && cfg["h"] == json!(a.h)
                && cfg["eps"] == json!(a.eps);
            if !same {
                return Err(RunError::Domain(crate::Error::InvalidArgument(format!(
                    "cannot resume {}: it was written with a different seed or geometry",
                    path.display()
                ))));
            }
            continue;
        }
        if v.get("estimate").is_some() {
            continue;
        }
        let Ok(c) = serde_json::from_value::<NodalCensus>(v) else {
            break;
        };
        if c.seed != sample_seed(master, done.len() as u64) {
            break;
        }
        done.push(c);
    }
    Ok(done)
}

fn census_csv_row(index: usize, c: &NodalCensus) -> String {
    format!(
        "{index},{},{},{},{},{},{}",
        c.seed, c.radius, c.h, c.n_inside, c.n_touching, c.zero_node_count
    )
}

fn cmd_count(cli: &Cli, a: &CountArgs) -> Result<i32, RunError> {
    if cli.format == Format::Bin {
        return Err(RunError::Usage("count has no binary output".into()));
    }
    if a.resume && cli.output.is_none() {
        return Err(RunError::Usage("--resume needs --output".into()));
    }
    if a.resume && cli.format != Format::Json {
        return Err(RunError::Usage(
            "--resume reads newline-delimited JSON; use --format json".into(),
        ));
    }
    // validate geometry before any output is written
    GridSpec::centered(a.h, crate::nodal_counter::raster_half_extent(a.radius, a.h))?;

    let mut censuses = match (&cli.output, a.resume) {
        (Some(p), true) => read_completed(p, cli.seed, a)?,
        _ => Vec::new(),
    };
    censuses.truncate(a.samples as usize);

    let head = header("count", cli.seed, cli.format, a);
    let mut out = open_output(cli.output.as_deref())?;
    match cli.format {
        Format::Json => {
            writeln!(out, "{}", json!({ "header": head }))?;
            for c in &censuses {
                writeln!(
                    out,
                    "{}",
                    serde_json::to_string(c).map_err(io::Error::other)?
                )?;
            }
        }
        _ => {
            writeln!(out, "# {head}")?;
            writeln!(out, "index,seed,R,h,n_inside,n_touching,zero_node_count")?;
            for (i, c) in censuses.iter().enumerate() {
                writeln!(out, "{}", census_csv_row(i, c))?;
            }
        }
    }
    out.flush()?;

    let batch = rayon::current_num_threads().max(1) as u64 * 2;
    let mut next = censuses.len() as u64;
    while next < a.samples {
        let end = (next + batch).min(a.samples);
        let fresh = count_ensemble(cli.seed, next..end, a.radius, a.h, a.eps)?;
        for c in fresh {
            match cli.format {
                Format::Json => writeln!(
                    out,
                    "{}",
                    serde_json::to_string(&c).map_err(io::Error::other)?
                )?,
                _ => writeln!(out, "{}", census_csv_row(censuses.len(), &c))?,
            }
            if c.zero_node_count > 0 {
                eprintln!(
                    "warning: sample with seed {} has {} exact zero nodes",
                    c.seed, c.zero_node_count
                );
            }
            censuses.push(c);
        }
        out.flush()?;
        next = end;
    }

    let estimate = estimate_nu(&censuses)?;
    match cli.format {
        Format::Json => writeln!(out, "{}", json!({ "estimate": estimate }))?,
        _ => writeln!(
            out,
            "# estimate nu_hat={} stderr={} n_samples={}",
            estimate.nu_hat, estimate.stderr, estimate.n_samples
        )?,
    }
    out.flush()?;
    Ok(0)
}

fn cmd_verify(cli: &Cli, a: &VerifyArgs) -> Result<i32, RunError> {
    let cfg = SuiteConfig {
        seed: cli.seed,
        r: a.r,
        thresholds: match a.t {
            Some(t) => vec![Some(t)],
            None => SuiteConfig::default().thresholds,
        },
        circle_samples: a.samples,
        covariance_samples: a.samples,
        lemma2_samples: a.lemma2_samples,
        helmholtz_samples: a.helmholtz_samples,
        nu_radius: a.nu_radius,
        nu_h: a.nu_h,
        nu_samples: a.nu_samples,
        ..SuiteConfig::default()
    };
    let mut out = open_output(cli.output.as_deref())?;
    let head = header(
        "verify",
        cli.seed,
        cli.format,
        &json!({ "args": a, "suite_config": cfg }),
    );
    match cli.format {
        Format::Json => writeln!(out, "{}", json!({ "header": head }))?,
        Format::Csv => {
            writeln!(out, "# {head}")?;
            writeln!(out, "name,n_samples,statistic,target,stderr,verdict")?;
        }
        Format::Bin => return Err(RunError::Usage("verify has no binary output".into())),
    }
    out.flush()?;

    let mut io_err = None;
    let reports = run_suite(a.suite.into(), &cfg, |r| {
        let line = match cli.format {
            Format::Json => serde_json::to_string(r).unwrap_or_default(),
            _ => format!(
                "{},{},{},{},{},{}",
                r.name,
                r.n_samples,
                r.statistic,
                r.target,
                r.stderr,
                serde_json::to_value(r.verdict)
                    .ok()
                    .and_then(|v| v.as_str().map(String::from))
                    .unwrap_or_default()
            ),
        };
        if let Err(e) = writeln!(out, "{line}").and_then(|_| out.flush()) {
            io_err.get_or_insert(e);
        }
    })?;
    if let Some(e) = io_err {
        return Err(e.into());
    }
    Ok(if reports.iter().any(|r| r.failed()) {
        1
    } else {
        0
    })
}

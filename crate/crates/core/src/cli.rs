//! Command-line front end. Exit codes: 0 success, 1 usage or input error,
//! 2 failed mathematical verification.

use std::fs::{self, File};
use std::io::{BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use rand::Rng;
use serde::de::DeserializeOwned;
use serde::Serialize;
use serde_json::{json, Map, Value};

use crate::error::Error;
use crate::grids::{full_grid, oversampled_grid};
use crate::indexset::{box_set, hyperbolic_cross, IndexSet};
use crate::korobov::{exact_discretization, Certificate};
use crate::linalg::DEFAULT_GRAM_CAP;
use crate::montecarlo::{
    certify_l2_constants_capped, ladder_row, marcinkiewicz_search, write_ladder_csv,
    DiscretizationReport, ReportKind,
};
use crate::pointset::PointSet;
use crate::rng::{derive_seed, stream};
use crate::sparsify::{bss_ratio_bound, bss_sparsify, frame_from_grid};
use crate::wavelet::{
    basis_coefficients, basis_element, block_sup_bound, build_window, decay_check, decode_index,
    orthonormality_check, rho_plus, tensor_orthonormality_check, DEFAULT_DELTA, DEFAULT_SMOOTHNESS,
};

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

/// Tolerance on certified frame constants around 1.
const UNIT_FRAME_TOL: f64 = 1e-9;

#[derive(Debug, Parser)]
#[command(
    name = "trigdisc",
    version,
    about = "Sampling discretization on hyperbolic crosses"
)]
pub struct Cli {
    /// TOML file; top-level keys plus one table per command. Flags win.
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    /// Directory for relative output paths.
    #[arg(long, global = true, env = "TRIGDISC_OUT_DIR")]
    out_dir: Option<PathBuf>,

    /// Worker threads (default 1).
    #[arg(long, global = true, env = "TRIGDISC_THREADS")]
    threads: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Write a frequency set.
    Indexset(IndexsetArgs),
    /// Build and certify a Korobov node set, or verify an existing one.
    Korobov(KorobovArgs),
    /// Random node search with a JSON report.
    Mc(McArgs),
    /// Median certified lower constant along an m-ladder, as CSV.
    Ladder(LadderArgs),
    /// Barrier sparsification of a grid frame.
    Sparsify(SparsifyArgs),
    /// Checks of the wavelet-type system.
    Wavelet(WaveletArgs),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
enum SetKind {
    Hyperbolic,
    Box,
    Diff,
}

#[derive(Debug, Args)]
struct IndexsetArgs {
    #[arg(long, value_enum)]
    kind: Option<SetKind>,
    #[arg(long)]
    n: Option<u32>,
    #[arg(long)]
    d: Option<usize>,
    /// Box half-widths, comma separated.
    #[arg(long = "N", value_delimiter = ',')]
    box_n: Option<Vec<u32>>,
    /// Source set for `--kind diff`.
    #[arg(long)]
    of: Option<PathBuf>,
    #[arg(long)]
    output: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct KorobovArgs {
    /// Frequency set file.
    #[arg(long)]
    set: Option<PathBuf>,
    #[arg(long)]
    cert: Option<PathBuf>,
    #[arg(long)]
    nodes: Option<PathBuf>,
    #[arg(long)]
    report: Option<PathBuf>,
    /// Check existing certificate and node files instead of building them.
    #[arg(long)]
    verify: bool,
    #[arg(long)]
    gram_cap: Option<usize>,
}

#[derive(Debug, Args)]
struct McArgs {
    #[arg(long)]
    set: Option<PathBuf>,
    /// Norm exponent.
    #[arg(long)]
    q: Option<f64>,
    #[arg(long)]
    m: Option<usize>,
    #[arg(long)]
    eta: Option<f64>,
    #[arg(long)]
    attempts: Option<usize>,
    #[arg(long)]
    trials: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    /// Level of the hyperbolic cross, recorded in the report.
    #[arg(long)]
    n: Option<u32>,
    #[arg(long)]
    report: Option<PathBuf>,
    /// Where to write the accepted node set.
    #[arg(long)]
    points: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct LadderArgs {
    #[arg(long)]
    n: Option<u32>,
    #[arg(long)]
    d: Option<usize>,
    #[arg(long, value_delimiter = ',')]
    m: Option<Vec<usize>>,
    /// Number of seeds per rung.
    #[arg(long)]
    seeds: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    output: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct SparsifyArgs {
    #[arg(long)]
    set: Option<PathBuf>,
    /// Grid parameters N, comma separated.
    #[arg(long, value_delimiter = ',')]
    grid: Option<Vec<u32>>,
    /// Use the oversampled grid instead of the full grid.
    #[arg(long)]
    oversampled: bool,
    #[arg(long)]
    oversample: Option<f64>,
    #[arg(long)]
    output: Option<PathBuf>,
    #[arg(long)]
    report: Option<PathBuf>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
enum WaveletCheck {
    Partition,
    Support,
    Orthonormality,
    Tensor,
    Decay,
    Block,
}

#[derive(Debug, Args)]
struct WaveletArgs {
    #[arg(long)]
    delta: Option<f64>,
    #[arg(long)]
    smoothness: Option<u32>,
    #[arg(long, value_enum, value_delimiter = ',')]
    checks: Option<Vec<WaveletCheck>>,
    #[arg(long)]
    kmax: Option<u64>,
    #[arg(long)]
    kappa: Option<f64>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    report: Option<PathBuf>,
    /// Write the coefficient file of v_k for this k.
    #[arg(long)]
    export: Option<u64>,
}

#[derive(Debug)]
enum CliError {
    Usage(String),
    Input(Error),
    Verification(String),
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        match e {
            Error::Uncertified(_)
            | Error::EigenResidual { .. }
            | Error::BarrierStall { .. }
            | Error::NoGenerator { .. } => CliError::Verification(e.to_string()),
            other => CliError::Input(other),
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Input(Error::Io(e))
    }
}

type CliResult<T> = std::result::Result<T, CliError>;

/// Flag, then config value, then default; every resolved value is recorded.
struct Settings {
    global: toml::Table,
    section: toml::Table,
    resolved: Map<String, Value>,
}

impl Settings {
    fn load(path: Option<&Path>, command: &str) -> CliResult<Self> {
        let global = match path {
            None => toml::Table::new(),
            Some(p) => {
                let text = fs::read_to_string(p)?;
                text.parse::<toml::Table>()
                    .map_err(|e| CliError::Usage(format!("config {}: {e}", p.display())))?
            }
        };
        let section = match global.get(command) {
            None => toml::Table::new(),
            Some(toml::Value::Table(t)) => t.clone(),
            Some(_) => {
                return Err(CliError::Usage(format!(
                    "config key `{command}` must be a table"
                )))
            }
        };
        Ok(Self {
            global,
            section,
            resolved: Map::new(),
        })
    }

    fn from_config<T: DeserializeOwned>(&self, key: &str) -> CliResult<Option<T>> {
        match self.section.get(key) {
            None => Ok(None),
            Some(v) => v
                .clone()
                .try_into()
                .map(Some)
                .map_err(|e| CliError::Usage(format!("config value `{key}`: {e}"))),
        }
    }

    fn opt<T: DeserializeOwned + Serialize>(
        &mut self,
        key: &str,
        flag: Option<T>,
    ) -> CliResult<Option<T>> {
        let v = match flag {
            Some(v) => Some(v),
            None => self.from_config(key)?,
        };
        self.resolved
            .insert(key.into(), serde_json::to_value(&v).unwrap_or(Value::Null));
        Ok(v)
    }

    fn get<T: DeserializeOwned + Serialize>(
        &mut self,
        key: &str,
        flag: Option<T>,
        default: T,
    ) -> CliResult<T> {
        let v = self.opt(key, flag)?.unwrap_or(default);
        self.resolved
            .insert(key.into(), serde_json::to_value(&v).unwrap_or(Value::Null));
        Ok(v)
    }

    fn require<T: DeserializeOwned + Serialize>(
        &mut self,
        key: &str,
        flag: Option<T>,
    ) -> CliResult<T> {
        self.opt(key, flag)?
            .ok_or_else(|| CliError::Usage(format!("missing required value `--{key}`")))
    }

    fn flag(&mut self, key: &str, flag: bool) -> CliResult<bool> {
        let v = flag || self.from_config::<bool>(key)?.unwrap_or(false);
        self.resolved.insert(key.into(), Value::Bool(v));
        Ok(v)
    }

    fn global<T: DeserializeOwned>(&self, key: &str) -> CliResult<Option<T>> {
        match self.global.get(key) {
            None => Ok(None),
            Some(v) => v
                .clone()
                .try_into()
                .map(Some)
                .map_err(|e| CliError::Usage(format!("config value `{key}`: {e}"))),
        }
    }
}

struct Context {
    out_dir: Option<PathBuf>,
    threads: usize,
}

impl Context {
    fn output(&self, p: &Path) -> CliResult<PathBuf> {
        let path = match &self.out_dir {
            Some(dir) if p.is_relative() => dir.join(p),
            _ => p.to_path_buf(),
        };
        if let Some(parent) = path.parent() {
            if !parent.as_os_str().is_empty() {
                fs::create_dir_all(parent)?;
            }
        }
        Ok(path)
    }
}

fn write_text(path: &Path, text: &str) -> CliResult<()> {
    let mut w = BufWriter::new(File::create(path)?);
    w.write_all(text.as_bytes())?;
    w.flush()?;
    Ok(())
}

fn read_set(path: &Path) -> CliResult<IndexSet> {
    Ok(IndexSet::read_from(BufReader::new(File::open(path)?))?)
}

fn read_points(path: &Path) -> CliResult<PointSet> {
    Ok(PointSet::read_from(BufReader::new(File::open(path)?))?)
}

fn path_value(p: &Path) -> String {
    p.display().to_string()
}

/// Parses `args` (including the program name) and runs the command.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    match dispatch(cli) {
        Ok(()) => 0,
        Err(CliError::Usage(msg)) => {
            eprintln!("error: {msg}");
            1
        }
        Err(CliError::Input(e)) => {
            eprintln!("error: {e}");
            1
        }
        Err(CliError::Verification(msg)) => {
            eprintln!("verification failed: {msg}");
            2
        }
    }
}

fn command_name(c: &Command) -> &'static str {
    match c {
        Command::Indexset(_) => "indexset",
        Command::Korobov(_) => "korobov",
        Command::Mc(_) => "mc",
        Command::Ladder(_) => "ladder",
        Command::Sparsify(_) => "sparsify",
        Command::Wavelet(_) => "wavelet",
    }
}

fn dispatch(cli: Cli) -> CliResult<()> {
    let mut s = Settings::load(cli.config.as_deref(), command_name(&cli.command))?;
    let out_dir = match cli.out_dir {
        Some(d) => Some(d),
        None => s.global::<PathBuf>("out_dir")?,
    };
    let threads = match cli.threads {
        Some(t) => t,
        None => s.global::<usize>("threads")?.unwrap_or(1),
    };
    if threads == 0 {
        return Err(CliError::Usage("threads must be at least 1".into()));
    }
    let ctx = Context { out_dir, threads };
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(ctx.threads)
        .build()
        .map_err(|e| CliError::Usage(e.to_string()))?;
    pool.install(|| match cli.command {
        Command::Indexset(a) => cmd_indexset(a, &mut s, &ctx),
        Command::Korobov(a) => cmd_korobov(a, &mut s, &ctx),
        Command::Mc(a) => cmd_mc(a, &mut s, &ctx),
        Command::Ladder(a) => cmd_ladder(a, &mut s, &ctx),
        Command::Sparsify(a) => cmd_sparsify(a, &mut s, &ctx),
        Command::Wavelet(a) => cmd_wavelet(a, &mut s, &ctx),
    })
}

fn config_value(s: &Settings, command: &str) -> Value {
    let mut m = s.resolved.clone();
    m.insert("command".into(), Value::String(command.into()));
    Value::Object(m)
}

fn cmd_indexset(a: IndexsetArgs, s: &mut Settings, ctx: &Context) -> CliResult<()> {
    let kind = s.require("kind", a.kind)?;
    let set = match kind {
        SetKind::Hyperbolic => {
            let n = s.require("n", a.n)?;
            let d = s.require("d", a.d)?;
            hyperbolic_cross(n, d)?
        }
        SetKind::Box => box_set(&s.require("N", a.box_n)?)?,
        SetKind::Diff => {
            let of: PathBuf = s.require("of", a.of)?;
            read_set(&of)?.difference_set()
        }
    };
    let out = ctx.output(&s.get("output", a.output, PathBuf::from("indexset.txt"))?)?;
    write_text(&out, &set.to_text())?;
    let lambda = set.difference_set();
    println!(
        "size={} lambda_size={} output={}",
        set.len(),
        lambda.len(),
        out.display()
    );
    Ok(())
}

fn cmd_korobov(a: KorobovArgs, s: &mut Settings, ctx: &Context) -> CliResult<()> {
    let start = Instant::now();
    let set_path: PathBuf = s.require("set", a.set)?;
    let q = read_set(&set_path)?;
    let verify_only = s.flag("verify", a.verify)?;
    let cap = s.get("gram_cap", a.gram_cap, DEFAULT_GRAM_CAP)?;
    let cert_path = s.get("cert", a.cert, PathBuf::from("korobov.cert"))?;
    let nodes_path = s.get("nodes", a.nodes, PathBuf::from("korobov_nodes.txt"))?;
    let report_path =
        ctx.output(&s.get("report", a.report, PathBuf::from("korobov_report.json"))?)?;

    let (cert, nodes) = if verify_only {
        let cert = Certificate::read_from(BufReader::new(File::open(&cert_path)?))?;
        (cert, read_points(&nodes_path)?)
    } else {
        let (params, nodes) = exact_discretization(&q)?;
        let cert = Certificate::new(params, &q.difference_set());
        let cert_out = ctx.output(&cert_path)?;
        let nodes_out = ctx.output(&nodes_path)?;
        write_text(&cert_out, &cert.to_text())?;
        write_text(&nodes_out, &nodes.to_text())?;
        (cert, nodes)
    };

    let mut report = DiscretizationReport::new(ReportKind::CertifiedL2, 2.0, &q, nodes.len());
    let verdict = cert.verify(&q, &nodes);
    let defect = verdict.as_ref().ok().copied();
    let mut failure = verdict.err().map(|e| e.to_string());
    if failure.is_none() {
        match certify_l2_constants_capped(&q, &nodes, cap) {
            Ok(c) => {
                report.lower = c.lower;
                report.upper = c.upper;
                report.eigen_residual = Some(c.residual);
                if (c.lower - 1.0).abs() > UNIT_FRAME_TOL || (c.upper - 1.0).abs() > UNIT_FRAME_TOL
                {
                    failure = Some(format!(
                        "frame constants [{}, {}] differ from 1",
                        c.lower, c.upper
                    ));
                }
            }
            Err(Error::CapExceeded { .. }) => {}
            Err(e) => failure = Some(e.to_string()),
        }
    }
    report.success = Some(failure.is_none());
    report.runtime_ms = start.elapsed().as_millis() as u64;
    let mut config = config_value(s, "korobov");
    if let Value::Object(m) = &mut config {
        m.insert("p".into(), json!(cert.params.p));
        m.insert("a".into(), json!(cert.params.a));
        m.insert("cubature_defect".into(), json!(defect));
    }
    report.config = config;
    write_text(&report_path, &report.to_json()?)?;
    println!(
        "p={} a={} size={} cubature_defect={} lower={} upper={}",
        cert.params.p,
        cert.params.a,
        q.len(),
        defect.map_or("-".into(), |d| format!("{d:e}")),
        report.lower,
        report.upper
    );
    match failure {
        None => Ok(()),
        Some(msg) => Err(CliError::Verification(msg)),
    }
}

fn cmd_mc(a: McArgs, s: &mut Settings, ctx: &Context) -> CliResult<()> {
    let set_path: PathBuf = s.require("set", a.set)?;
    s.resolved
        .insert("set".into(), Value::String(path_value(&set_path)));
    let set = read_set(&set_path)?;
    let q = s.get("q", a.q, 2.0)?;
    let m = s.require("m", a.m)?;
    let eta = s.get("eta", a.eta, 0.25)?;
    let attempts = s.get("attempts", a.attempts, 5)?;
    let trials = s.get("trials", a.trials, 200)?;
    let seed = s.get("seed", a.seed, 0)?;
    let n = s.opt("n", a.n)?;
    let report_path = ctx.output(&s.get("report", a.report, PathBuf::from("mc_report.json"))?)?;
    let points = s.opt("points", a.points)?;

    let outcome = marcinkiewicz_search(&set, q, m, attempts, eta, trials, seed)?;
    let mut report = outcome.report;
    report.n = n;
    report.config = config_value(s, "mc");
    write_text(&report_path, &report.to_json()?)?;
    if let (Some(z), Some(p)) = (&outcome.points, points) {
        write_text(&ctx.output(&p)?, &z.to_text())?;
    }
    println!(
        "success={} attempts={} lower={} upper={} report={}",
        outcome.points.is_some(),
        report.attempts,
        report.lower,
        report.upper,
        report_path.display()
    );
    if outcome.points.is_some() {
        Ok(())
    } else {
        Err(CliError::Verification(format!(
            "no admissible node set of size {m} in {attempts} attempts"
        )))
    }
}

fn cmd_ladder(a: LadderArgs, s: &mut Settings, ctx: &Context) -> CliResult<()> {
    let n = s.require("n", a.n)?;
    let d = s.get("d", a.d, 2)?;
    let ms: Vec<usize> = s.require("m", a.m)?;
    let count = s.get("seeds", a.seeds, 20)?;
    let seed = s.get("seed", a.seed, 0)?;
    let out = ctx.output(&s.get("output", a.output, PathBuf::from("ladder.csv"))?)?;
    let set = hyperbolic_cross(n, d)?;
    let seeds: Vec<u64> = (0..count as u64).map(|i| derive_seed(seed, i)).collect();
    let rows = ms
        .iter()
        .map(|&m| ladder_row(&set, n, m, &seeds))
        .collect::<Result<Vec<_>, _>>()?;
    let mut w = BufWriter::new(File::create(&out)?);
    write_ladder_csv(&rows, &mut w)?;
    w.flush()?;
    println!("rows={} output={}", rows.len(), out.display());
    Ok(())
}

fn cmd_sparsify(a: SparsifyArgs, s: &mut Settings, ctx: &Context) -> CliResult<()> {
    let start = Instant::now();
    let set_path: PathBuf = s.require("set", a.set)?;
    s.resolved
        .insert("set".into(), Value::String(path_value(&set_path)));
    let set = read_set(&set_path)?;
    let grid_n: Vec<u32> = s.require("grid", a.grid)?;
    let oversampled = s.flag("oversampled", a.oversampled)?;
    let oversample = s.get("oversample", a.oversample, 4.0)?;
    let out = ctx.output(&s.get("output", a.output, PathBuf::from("sparse_points.txt"))?)?;
    let report_path =
        ctx.output(&s.get("report", a.report, PathBuf::from("sparsify_report.json"))?)?;

    let grid = if oversampled {
        oversampled_grid(&grid_n)?
    } else {
        full_grid(&grid_n)?
    };
    let frame = frame_from_grid(&set, &grid)?;
    let res = bss_sparsify(&frame, oversample)?;
    let bound = bss_ratio_bound(oversample);
    let max_nonzeros = (oversample * frame.n() as f64).ceil() as usize;
    let pass = res.kappa <= bound + 1e-9 && res.nonzeros() <= max_nonzeros;
    let points = res.weighted_points(&frame).expect("grid frame")?;
    write_text(&out, &points.to_text())?;

    let mut report = DiscretizationReport::new(ReportKind::Weighted, 2.0, &set, res.nonzeros());
    report.lower = 1.0;
    report.upper = res.kappa;
    report.success = Some(pass);
    report.runtime_ms = start.elapsed().as_millis() as u64;
    let mut config = config_value(s, "sparsify");
    if let Value::Object(m) = &mut config {
        m.insert("grid_points".into(), json!(frame.m()));
        m.insert("kappa_bound".into(), json!(bound));
        m.insert("max_nonzeros".into(), json!(max_nonzeros));
    }
    report.config = config;
    write_text(&report_path, &report.to_json()?)?;
    println!(
        "nonzeros={} kappa={} bound={} output={}",
        res.nonzeros(),
        res.kappa,
        bound,
        out.display()
    );
    if pass {
        Ok(())
    } else {
        Err(CliError::Verification(format!(
            "kappa {} or nonzero count {} out of bounds",
            res.kappa,
            res.nonzeros()
        )))
    }
}

#[derive(Serialize)]
struct WaveletReport {
    kind: &'static str,
    success: bool,
    runtime_ms: u64,
    version: String,
    config: Value,
    wavelet: Map<String, Value>,
}

fn cmd_wavelet(a: WaveletArgs, s: &mut Settings, ctx: &Context) -> CliResult<()> {
    let start = Instant::now();
    let delta = s.get("delta", a.delta, DEFAULT_DELTA)?;
    let smoothness = s.get("smoothness", a.smoothness, DEFAULT_SMOOTHNESS)?;
    let checks = s.get(
        "checks",
        a.checks,
        vec![
            WaveletCheck::Partition,
            WaveletCheck::Support,
            WaveletCheck::Orthonormality,
            WaveletCheck::Tensor,
            WaveletCheck::Decay,
            WaveletCheck::Block,
        ],
    )?;
    let kmax = s.get("kmax", a.kmax, 15)?;
    let kappa = s.get("kappa", a.kappa, 2.0)?;
    let seed = s.get("seed", a.seed, 0)?;
    let report_path =
        ctx.output(&s.get("report", a.report, PathBuf::from("wavelet_report.json"))?)?;
    let export = s.opt("export", a.export)?;
    let w = build_window(delta, smoothness)?;

    let mut out = Map::new();
    let mut failed = Vec::new();
    for check in &checks {
        match check {
            WaveletCheck::Partition => {
                let mut rng = stream(seed, 0);
                let r = (0..1000)
                    .map(|_| w.partition_residual(rng.gen_range(-2.0..2.0)))
                    .fold(0.0f64, f64::max);
                out.insert("partition_residual".into(), json!(r));
                if r > 1e-12 {
                    failed.push("partition");
                }
            }
            WaveletCheck::Support => {
                let mut violations = 0usize;
                for k in 1..=63u64 {
                    let (n, _) = decode_index(k).expect("k ≥ 1");
                    let hi = (1u64 << n) as f64 * (1.0 + delta);
                    let lo = (1u64 << n) as f64 / 2.0 * (1.0 - delta);
                    violations += basis_coefficients(&w, k)
                        .iter()
                        .filter(|(nu, c)| {
                            let a = nu.unsigned_abs() as f64;
                            (a >= hi || a <= lo) && c.norm() != 0.0
                        })
                        .count();
                }
                out.insert("support_violations".into(), json!(violations));
                if violations > 0 {
                    failed.push("support");
                }
            }
            WaveletCheck::Orthonormality => {
                let r = orthonormality_check(&w, kmax)?;
                out.insert(
                    "orthonormality".into(),
                    json!({ "kmax": kmax, "max_defect": r }),
                );
                if r > 1e-8 {
                    failed.push("orthonormality");
                }
            }
            WaveletCheck::Tensor => {
                let r = tensor_orthonormality_check(&w, 7, 2)?;
                out.insert("tensor_orthonormality".into(), json!(r));
                if r > 1e-8 {
                    failed.push("tensor");
                }
            }
            WaveletCheck::Decay => {
                let c: Vec<f64> = (4..=10).map(|n| decay_check(&w, n, kappa)).collect();
                let (lo, hi) = c
                    .iter()
                    .fold((f64::INFINITY, 0.0f64), |(a, b), &x| (a.min(x), b.max(x)));
                let spread = hi / lo - 1.0;
                out.insert(
                    "decay".into(),
                    json!({ "kappa": kappa, "levels": [4, 10], "constants": c, "spread": spread }),
                );
                if !(spread <= 0.05) {
                    failed.push("decay");
                }
            }
            WaveletCheck::Block => {
                let mut rng = stream(seed, 1);
                let mut rows = Vec::new();
                for sv in [vec![2u32, 2], vec![3, 2], vec![4, 4], vec![2, 2, 2]] {
                    let size = rho_plus(&sv).len();
                    let mut worst = 0.0f64;
                    for _ in 0..10 {
                        let coeffs: Vec<f64> = (0..size)
                            .map(|_| if rng.gen::<bool>() { 1.0 } else { -1.0 })
                            .collect();
                        worst = worst.max(block_sup_bound(&w, &sv, &coeffs)?);
                    }
                    rows.push(json!({ "s": sv, "max_ratio": worst }));
                }
                out.insert("block_sup".into(), Value::Array(rows));
            }
        }
    }
    if let Some(k) = export {
        let path = ctx.output(Path::new(&format!("basis_{k}.txt")))?;
        write_text(&path, &basis_element(&w, k).to_text())?;
        out.insert("exported".into(), json!(path_value(&path)));
    }
    out.insert("failed".into(), json!(failed));
    let report = WaveletReport {
        kind: "wavelet",
        success: failed.is_empty(),
        runtime_ms: start.elapsed().as_millis() as u64,
        version: VERSION.to_string(),
        config: config_value(s, "wavelet"),
        wavelet: out,
    };
    let text = serde_json::to_string_pretty(&report).map_err(|e| CliError::Usage(e.to_string()))?;
    write_text(&report_path, &text)?;
    println!(
        "success={} failed={:?} report={}",
        report.success,
        failed,
        report_path.display()
    );
    if failed.is_empty() {
        Ok(())
    } else {
        Err(CliError::Verification(format!(
            "wavelet checks failed: {}",
            failed.join(", ")
        )))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn usage_errors_exit_one() {
        assert_eq!(run(["trigdisc", "nosuch"]), 1);
        assert_eq!(run(["trigdisc", "indexset", "--kind", "weird"]), 1);
        assert_eq!(run(["trigdisc", "--version"]), 0);
    }

    #[test]
    fn missing_required_value_is_usage() {
        let dir = tempfile::tempdir().unwrap();
        let d = dir.path().to_str().unwrap();
        assert_eq!(
            run([
                "trigdisc",
                "--out-dir",
                d,
                "indexset",
                "--kind",
                "hyperbolic",
                "--n",
                "1"
            ]),
            1
        );
    }

    #[test]
    fn config_values_are_overridden_by_flags() {
        let dir = tempfile::tempdir().unwrap();
        let cfg = dir.path().join("c.toml");
        fs::write(&cfg, "[indexset]\nkind = \"hyperbolic\"\nn = 2\nd = 2\n").unwrap();
        let d = dir.path().to_str().unwrap();
        let c = cfg.to_str().unwrap();
        assert_eq!(
            run([
                "trigdisc",
                "--config",
                c,
                "--out-dir",
                d,
                "indexset",
                "--n",
                "1"
            ]),
            0
        );
        let text = fs::read_to_string(dir.path().join("indexset.txt")).unwrap();
        assert!(text.starts_with("dim=2 count=5"));
    }

    #[test]
    fn error_classes() {
        assert!(matches!(
            CliError::from(Error::Uncertified("x".into())),
            CliError::Verification(_)
        ));
        assert!(matches!(
            CliError::from(Error::ZeroDimension),
            CliError::Input(_)
        ));
    }
}

//! Command-line frontend. Every subcommand writes a JSON report (stdout, or
//! `PREFIX.json` with `--out PREFIX`) plus CSV data where it has any.
//!
//! Exit codes: 0 clean, 1 violations found, 2 bad input, 3 runtime failure.
//! Errors go to stderr as a single JSON object.

use std::collections::BTreeMap;
use std::ffi::OsString;
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::str::FromStr;
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use rand::seq::SliceRandom;
use serde::Serialize;
use serde_json::json;

use crate::bounds::BoundId;
use crate::error::GeoError;
use crate::manifolds::Manifold;
use crate::pointcloud::{self, AuditOptions, PointCloud};
use crate::verify::{self, fmt_f64, ProjectionConfig, VerifyConfig};

pub const EXIT_OK: i32 = 0;
pub const EXIT_VIOLATIONS: i32 = 1;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_RUNTIME: i32 = 3;

#[derive(Debug, Parser)]
#[command(name = "lfsgeo", version, about = "Tangent-variation bounds on manifolds with positive local feature size")]
pub struct Cli {
    /// Flat key=value file; command-line flags override it.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Worker threads.
    #[arg(long, global = true, env = "LFSGEO_THREADS")]
    pub threads: Option<usize>,
    /// Leave wall-clock timings out so reruns are byte-identical.
    #[arg(long, global = true)]
    pub reproducible: bool,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Tabulate the bounds on a grid of t.
    Bounds(BoundsArgs),
    /// Monte-Carlo check of the bounds on a zoo manifold.
    Verify(VerifyArgs),
    /// Probe the tangent-projection lemma at a random point.
    Project(ProjectArgs),
    /// Estimate tangents and lfs from a point cloud and audit the bound.
    Cloud(CloudArgs),
}

#[derive(Debug, Args)]
pub struct BoundsArgs {
    #[arg(long)]
    pub tmin: Option<f64>,
    #[arg(long)]
    pub tmax: Option<f64>,
    #[arg(long)]
    pub step: Option<f64>,
    /// Output prefix; writes PREFIX.csv instead of stdout.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct ManifoldArgs {
    /// circle, sphere, torus or ellipsoid.
    #[arg(long)]
    pub manifold: Option<String>,
    /// Shape parameter as key=value, repeatable (sphere: n, radius; torus:
    /// R, r; ellipsoid: a, b, c; all: resolution).
    #[arg(long = "param", value_name = "KEY=VALUE")]
    pub params: Vec<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Check {
    Tangent,
    Sandwich,
    Eq4,
}

#[derive(Debug, Args)]
pub struct VerifyArgs {
    #[command(flatten)]
    pub manifold: ManifoldArgs,
    /// Bound id, repeatable; default all.
    #[arg(long = "bound")]
    pub bounds: Vec<String>,
    #[arg(long)]
    pub n: Option<usize>,
    #[arg(long)]
    pub tmin: Option<f64>,
    #[arg(long)]
    pub tmax: Option<f64>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub tolerance: Option<f64>,
    #[arg(long, value_enum)]
    pub check: Option<Check>,
    /// Writes PREFIX.json and PREFIX.csv.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Multiplies every bound value; a negative control for the harness.
    #[arg(long, hide = true)]
    pub bound_scale: Option<f64>,
}

#[derive(Debug, Args)]
pub struct ProjectArgs {
    #[command(flatten)]
    pub manifold: ManifoldArgs,
    /// Probes per check.
    #[arg(long)]
    pub n: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub tolerance: Option<f64>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct CloudArgs {
    #[command(flatten)]
    pub manifold: ManifoldArgs,
    /// Point file; without it the cloud is sampled from --manifold.
    #[arg(long)]
    pub cloud: Option<PathBuf>,
    /// Cloud size when sampling.
    #[arg(long)]
    pub n: Option<usize>,
    /// Neighbors for tangent estimation.
    #[arg(long)]
    pub k: Option<usize>,
    /// Audit pairs.
    #[arg(long)]
    pub pairs: Option<usize>,
    /// Samples receiving per-point estimates, evenly strided.
    #[arg(long)]
    pub queries: Option<usize>,
    #[arg(long)]
    pub tmin: Option<f64>,
    #[arg(long)]
    pub tmax: Option<f64>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Writes PREFIX.json and PREFIX.csv.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug)]
pub struct CliError {
    pub code: i32,
    pub kind: String,
    pub message: String,
}

impl CliError {
    fn usage(message: impl Into<String>) -> Self {
        CliError { code: EXIT_USAGE, kind: "usage".into(), message: message.into() }
    }

    fn io(path: &Path, e: std::io::Error) -> Self {
        CliError { code: EXIT_RUNTIME, kind: "io".into(), message: format!("{}: {e}", path.display()) }
    }
}

impl From<GeoError> for CliError {
    fn from(e: GeoError) -> Self {
        let code = match e {
            GeoError::Unreachable { .. }
            | GeoError::TooManyFailures { .. }
            | GeoError::DegenerateNeighborhood { .. }
            | GeoError::NoConvergence(_)
            | GeoError::PreimageNotFound => EXIT_RUNTIME,
            _ => EXIT_USAGE,
        };
        CliError { code, kind: e.kind().to_string(), message: e.to_string() }
    }
}

type CliResult<T> = std::result::Result<T, CliError>;

/// Settings from a `--config` file, consumed key by key; anything left
/// over is unknown and rejected.
struct ConfigFile {
    values: BTreeMap<String, String>,
}

impl ConfigFile {
    fn load(path: Option<&Path>) -> CliResult<Self> {
        let mut values = BTreeMap::new();
        let Some(path) = path else { return Ok(ConfigFile { values }) };
        let text = std::fs::read_to_string(path).map_err(|e| CliError::usage(format!("{}: {e}", path.display())))?;
        for (i, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| CliError::usage(format!("config line {}: expected key=value", i + 1)))?;
            values.insert(k.trim().to_string(), v.trim().to_string());
        }
        Ok(ConfigFile { values })
    }

    fn take<T: FromStr>(&mut self, key: &str, flag: Option<T>) -> CliResult<Option<T>>
    where
        T::Err: std::fmt::Display,
    {
        let from_file = match self.values.remove(key) {
            Some(v) => Some(v.parse::<T>().map_err(|e| CliError::usage(format!("config key {key}: {e}")))?),
            None => None,
        };
        Ok(flag.or(from_file))
    }

    /// Comma-separated list; a non-empty flag list replaces it.
    fn take_list(&mut self, key: &str, flag: Vec<String>) -> Vec<String> {
        let from_file = self.values.remove(key);
        if !flag.is_empty() {
            return flag;
        }
        from_file
            .map(|v| v.split(',').map(|s| s.trim().to_string()).filter(|s| !s.is_empty()).collect())
            .unwrap_or_default()
    }

    /// `param.KEY=value` entries under the flag's `KEY=value` list.
    fn take_params(&mut self, flag: &[String]) -> CliResult<BTreeMap<String, f64>> {
        let mut params = BTreeMap::new();
        let keys: Vec<String> = self.values.keys().filter(|k| k.starts_with("param.")).cloned().collect();
        for key in keys {
            let v = self.values.remove(&key).unwrap_or_default();
            params.insert(key["param.".len()..].to_string(), parse_f64(&key, &v)?);
        }
        for kv in flag {
            let (k, v) = kv.split_once('=').ok_or_else(|| CliError::usage(format!("--param {kv}: expected key=value")))?;
            params.insert(k.trim().to_string(), parse_f64(k, v)?);
        }
        Ok(params)
    }

    fn finish(self) -> CliResult<()> {
        match self.values.keys().next() {
            Some(k) => Err(CliError::usage(format!("unknown config key: {k}"))),
            None => Ok(()),
        }
    }
}

fn parse_f64(key: &str, v: &str) -> CliResult<f64> {
    v.trim().parse().map_err(|_| CliError::usage(format!("{key}: not a number: {v}")))
}

#[derive(Debug, Serialize)]
struct ManifoldEcho {
    name: String,
    params: BTreeMap<String, f64>,
}

fn manifold_from(cfg: &mut ConfigFile, args: ManifoldArgs, default: Option<&str>) -> CliResult<Option<(Manifold, ManifoldEcho)>> {
    let name = cfg.take("manifold", args.manifold)?;
    let params = cfg.take_params(&args.params)?;
    let Some(name) = name.or(default.map(str::to_string)) else {
        if !params.is_empty() {
            return Err(CliError::usage("--param given without --manifold"));
        }
        return Ok(None);
    };
    let m = Manifold::from_spec(&name, &params)?;
    Ok(Some((m, ManifoldEcho { name, params })))
}

struct Output {
    prefix: Option<PathBuf>,
    reproducible: bool,
}

impl Output {
    fn with_extension(&self, ext: &str) -> Option<PathBuf> {
        self.prefix.as_ref().map(|p| {
            let mut s = p.as_os_str().to_owned();
            s.push(".");
            s.push(ext);
            PathBuf::from(s)
        })
    }

    fn emit_json(&self, value: &serde_json::Value, stdout: &mut dyn Write) -> CliResult<()> {
        let text = serde_json::to_string_pretty(value).expect("serializable report");
        match self.with_extension("json") {
            Some(path) => std::fs::write(&path, text + "\n").map_err(|e| CliError::io(&path, e)),
            None => writeln!(stdout, "{text}").map_err(|e| CliError::io(Path::new("<stdout>"), e)),
        }
    }

    fn emit_csv(&self, write: impl FnOnce(&mut dyn Write) -> std::io::Result<()>, stdout: &mut dyn Write) -> CliResult<()> {
        match self.with_extension("csv") {
            Some(path) => {
                let file = File::create(&path).map_err(|e| CliError::io(&path, e))?;
                let mut w = BufWriter::new(file);
                write(&mut w).and_then(|_| w.flush()).map_err(|e| CliError::io(&path, e))
            }
            None => write(stdout).map_err(|e| CliError::io(Path::new("<stdout>"), e)),
        }
    }

    fn envelope(&self, command: &str, config: impl Serialize, seed: Option<u64>, report: impl Serialize, start: Instant) -> serde_json::Value {
        let mut v = json!({
            "tool": "lfsgeo",
            "version": env!("CARGO_PKG_VERSION"),
            "command": command,
            "seed": seed,
            "config": config,
            "report": report,
        });
        if !self.reproducible {
            v["wall_time_s"] = json!(start.elapsed().as_secs_f64());
        }
        v
    }
}

/// Parses `args` (program name first) and runs the command.
pub fn run<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                let _ = write!(stdout, "{e}");
                return EXIT_OK;
            }
            let err = CliError::usage(e.to_string().trim().to_string());
            report_error(&err, stderr);
            return err.code;
        }
    };
    match dispatch(cli, stdout) {
        Ok(code) => code,
        Err(err) => {
            report_error(&err, stderr);
            err.code
        }
    }
}

fn report_error(err: &CliError, stderr: &mut dyn Write) {
    let v = json!({ "error": { "kind": err.kind, "message": err.message, "exit_code": err.code } });
    let _ = writeln!(stderr, "{v}");
}

fn dispatch(cli: Cli, stdout: &mut dyn Write) -> CliResult<i32> {
    let mut cfg = ConfigFile::load(cli.config.as_deref())?;
    let threads = cfg.take("threads", cli.threads)?;
    let reproducible = cfg.take("reproducible", cli.reproducible.then_some(true))?.unwrap_or(false);
    let work = move |stdout: &mut dyn Write| match cli.command {
        Command::Bounds(a) => cmd_bounds(cfg, a, reproducible, stdout),
        Command::Verify(a) => cmd_verify(cfg, a, reproducible, stdout),
        Command::Project(a) => cmd_project(cfg, a, reproducible, stdout),
        Command::Cloud(a) => cmd_cloud(cfg, a, reproducible, stdout),
    };
    match threads {
        Some(0) => Err(CliError::usage("--threads must be at least 1")),
        Some(n) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(n)
                .build()
                .map_err(|e| CliError { code: EXIT_RUNTIME, kind: "threads".into(), message: e.to_string() })?;
            // Buffered because the caller's writer need not be Send.
            let mut buf = Vec::new();
            let code = pool.install(|| work(&mut buf))?;
            stdout.write_all(&buf).map_err(|e| CliError::io(Path::new("<stdout>"), e))?;
            Ok(code)
        }
        None => work(stdout),
    }
}

/// Grid `tmin, tmin + step, ..., <= tmax`, all inside `[0, 1)`.
pub fn t_grid(tmin: f64, tmax: f64, step: f64) -> CliResult<Vec<f64>> {
    if !(tmin.is_finite() && tmax.is_finite() && step.is_finite()) || step <= 0.0 || tmin < 0.0 || tmax >= 1.0 || tmax < tmin {
        return Err(CliError::usage(format!(
            "bad grid: tmin={tmin}, tmax={tmax}, step={step}; need 0 <= tmin <= tmax < 1 and step > 0"
        )));
    }
    let count = ((tmax - tmin) / step + 1e-9).floor() as usize + 1;
    if count > 10_000_000 {
        return Err(CliError::usage(format!("bad grid: {count} rows")));
    }
    Ok((0..count).map(|i| tmin + i as f64 * step).collect())
}

const TABLE_COLUMNS: [BoundId; 6] = [
    BoundId::Thm1i,
    BoundId::Thm1ii,
    BoundId::Ad,
    BoundId::Nsw,
    BoundId::Bsw,
    BoundId::SphereLower,
];

/// CSV with one row per grid value; out-of-domain cells are empty.
pub fn write_bounds_table(grid: &[f64], w: &mut dyn Write) -> std::io::Result<()> {
    let header: Vec<&str> = TABLE_COLUMNS.iter().map(|b| b.as_str()).collect();
    writeln!(w, "t,{}", header.join(","))?;
    for &t in grid {
        let cells: Vec<String> = TABLE_COLUMNS
            .iter()
            .map(|b| b.spec().evaluate(t).map(fmt_f64).unwrap_or_default())
            .collect();
        writeln!(w, "{},{}", fmt_f64(t), cells.join(","))?;
    }
    Ok(())
}

fn cmd_bounds(mut cfg: ConfigFile, a: BoundsArgs, _reproducible: bool, stdout: &mut dyn Write) -> CliResult<i32> {
    let tmin = cfg.take("tmin", a.tmin)?.unwrap_or(0.0);
    let tmax = cfg.take("tmax", a.tmax)?.unwrap_or(0.5);
    let step = cfg.take("step", a.step)?.unwrap_or(0.01);
    let out = cfg.take::<PathBuf>("out", a.out)?;
    cfg.finish()?;
    let grid = t_grid(tmin, tmax, step)?;
    let output = Output { prefix: out, reproducible: true };
    output.emit_csv(|w| write_bounds_table(&grid, w), stdout)?;
    Ok(EXIT_OK)
}

fn parse_bounds(names: &[String]) -> CliResult<Vec<BoundId>> {
    if names.is_empty() {
        return Ok(BoundId::ALL.to_vec());
    }
    names
        .iter()
        .map(|n| BoundId::from_str(n).map_err(CliError::from))
        .collect()
}

#[derive(Serialize)]
struct VerifyEcho {
    manifold: ManifoldEcho,
    check: Check,
    bounds: Vec<BoundId>,
    n: usize,
    t_range: (f64, f64),
    seed: u64,
    tolerance: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    bound_scale: Option<f64>,
}

fn cmd_verify(mut cfg: ConfigFile, a: VerifyArgs, reproducible: bool, stdout: &mut dyn Write) -> CliResult<i32> {
    let start = Instant::now();
    let (m, echo) = manifold_from(&mut cfg, a.manifold, Some("sphere"))?.expect("default manifold");
    let bounds = parse_bounds(&cfg.take_list("bound", a.bounds))?;
    let n = cfg.take("n", a.n)?.unwrap_or(10_000);
    let tmin = cfg.take("tmin", a.tmin)?.unwrap_or(0.0);
    let tmax = cfg.take("tmax", a.tmax)?;
    let seed = cfg.take("seed", a.seed)?.unwrap_or(0);
    let tolerance = cfg.take("tolerance", a.tolerance)?;
    let check = cfg.take::<String>("check", None)?;
    let check = match (a.check, check) {
        (Some(c), _) => c,
        (None, Some(s)) => Check::from_str(&s, true).map_err(|e| CliError::usage(format!("config key check: {e}")))?,
        (None, None) => Check::Tangent,
    };
    let out = cfg.take::<PathBuf>("out", a.out)?;
    let bound_scale = cfg.take("bound_scale", a.bound_scale)?;
    cfg.finish()?;
    if let Some(tol) = tolerance {
        if !(tol.is_finite() && tol >= 0.0) {
            return Err(CliError::usage(format!("--tolerance {tol} must be a non-negative number")));
        }
    }

    // The sandwich holds for every t < 1; the bounds need t <= 1/4 or less.
    let tmax = tmax.unwrap_or(if check == Check::Sandwich { 0.99 } else { 0.25 });
    let output = Output { prefix: out, reproducible };
    let echo = VerifyEcho {
        manifold: echo,
        check,
        bounds: bounds.clone(),
        n,
        t_range: (tmin, tmax),
        seed,
        tolerance,
        bound_scale,
    };
    match check {
        Check::Tangent | Check::Eq4 => {
            let bounds = if check == Check::Eq4 { vec![BoundId::Eq4] } else { bounds };
            let mut vc = VerifyConfig::new(n, (tmin, tmax), seed, bounds);
            vc.tolerance = tolerance;
            vc.bound_scale = bound_scale.unwrap_or(1.0);
            let mut report = verify::verify_tangent_bounds(&m, &vc)?;
            report.wall_time_s = None;
            let violations = report.total_violations();
            output.emit_json(&output.envelope("verify", &echo, Some(seed), &report, start), stdout)?;
            if output.prefix.is_some() {
                output.emit_csv(|w| report.write_observations_csv(w), stdout)?;
            }
            Ok(if violations == 0 { EXIT_OK } else { EXIT_VIOLATIONS })
        }
        Check::Sandwich => {
            if tmin != 0.0 {
                return Err(CliError::usage("the sandwich check samples t from (0, tmax]; drop --tmin"));
            }
            let mut report = verify::verify_lipschitz_sandwich(&m, n, tmax, seed, tolerance)?;
            report.wall_time_s = None;
            let violations = report.total_violations();
            output.emit_json(&output.envelope("verify", &echo, Some(seed), &report, start), stdout)?;
            Ok(if violations == 0 { EXIT_OK } else { EXIT_VIOLATIONS })
        }
    }
}

#[derive(Serialize)]
struct ProjectEcho {
    manifold: ManifoldEcho,
    n: usize,
    seed: u64,
    tolerance: Option<f64>,
}

fn cmd_project(mut cfg: ConfigFile, a: ProjectArgs, reproducible: bool, stdout: &mut dyn Write) -> CliResult<i32> {
    let start = Instant::now();
    let (m, echo) = manifold_from(&mut cfg, a.manifold, Some("sphere"))?.expect("default manifold");
    let n = cfg.take("n", a.n)?.unwrap_or(10_000);
    let seed = cfg.take("seed", a.seed)?.unwrap_or(0);
    let tolerance = cfg.take("tolerance", a.tolerance)?;
    let out = cfg.take::<PathBuf>("out", a.out)?;
    cfg.finish()?;

    // The base point comes from a stream the probes never use.
    let p = m.sample_point(&mut verify::batch_rng(seed, u64::MAX))?;
    let mut pc = ProjectionConfig::new(n, seed);
    pc.tolerance = tolerance;
    let report = verify::verify_projection_lemma(&m, &p, &pc)?;
    let pass = report.all_pass();
    let output = Output { prefix: out, reproducible };
    let echo = ProjectEcho { manifold: echo, n, seed, tolerance };
    output.emit_json(&output.envelope("project", &echo, Some(seed), &report, start), stdout)?;
    Ok(if pass { EXIT_OK } else { EXIT_VIOLATIONS })
}

#[derive(Serialize)]
struct CloudEcho {
    manifold: Option<ManifoldEcho>,
    cloud: Option<PathBuf>,
    n: Option<usize>,
    k: usize,
    pairs: usize,
    queries: usize,
    t_range: (f64, f64),
    seed: u64,
}

fn cmd_cloud(mut cfg: ConfigFile, a: CloudArgs, reproducible: bool, stdout: &mut dyn Write) -> CliResult<i32> {
    let start = Instant::now();
    let path = cfg.take::<PathBuf>("cloud", a.cloud)?;
    let manifold = manifold_from(&mut cfg, a.manifold, if path.is_none() { Some("sphere") } else { None })?;
    let n = cfg.take("n", a.n)?;
    let k = cfg.take("k", a.k)?.unwrap_or(20);
    let pairs = cfg.take("pairs", a.pairs)?.unwrap_or(2000);
    let queries = cfg.take("queries", a.queries)?.unwrap_or(2000);
    let tmin = cfg.take("tmin", a.tmin)?.unwrap_or(0.05);
    let tmax = cfg.take("tmax", a.tmax)?.unwrap_or(0.25);
    let seed = cfg.take("seed", a.seed)?.unwrap_or(0);
    let out = cfg.take::<PathBuf>("out", a.out)?;
    cfg.finish()?;

    let cloud = match (&path, &manifold) {
        (Some(p), _) => PointCloud::from_path(p)?,
        (None, Some((m, _))) => PointCloud::sample(m, n.unwrap_or(20_000), seed)?,
        (None, None) => return Err(CliError::usage("need --cloud or --manifold")),
    };
    let truth = manifold.as_ref().map(|(m, _)| m);
    if let Some(m) = truth {
        if m.ambient_dim() != cloud.ambient_dim() {
            return Err(GeoError::DimensionMismatch { expected: m.ambient_dim(), got: cloud.ambient_dim() }.into());
        }
    }
    let initial_radius = diameter_bound(&cloud);

    let mut order: Vec<usize> = (0..cloud.len()).collect();
    order.shuffle(&mut verify::batch_rng(seed, u64::MAX));
    order.truncate(queries.min(cloud.len()));
    order.sort_unstable();
    let estimates = pointcloud::point_estimates_at(&cloud, &order, k, initial_radius, truth)?;

    let mut opts = AuditOptions::new(k, pairs, seed);
    opts.t_range = (tmin, tmax);
    opts.initial_radius = initial_radius;
    opts.truth = truth;
    let audit = pointcloud::empirical_bound_audit(&cloud, &opts)?;

    let summary = pointcloud::summarize(&estimates);
    let output = Output { prefix: out, reproducible };
    let echo = CloudEcho {
        manifold: manifold.map(|(_, e)| e),
        cloud: path,
        n,
        k,
        pairs,
        queries,
        t_range: (tmin, tmax),
        seed,
    };
    let report = json!({ "audit": audit, "estimates": summary });
    output.emit_json(&output.envelope("cloud", &echo, Some(seed), &report, start), stdout)?;
    if output.prefix.is_some() {
        output.emit_csv(|w| pointcloud::write_estimates_csv(&estimates, w), stdout)?;
    }
    // Apparent violations measure estimator noise, not the theorem.
    Ok(EXIT_OK)
}

/// Diagonal of the cloud's bounding box: an empty ball of this radius
/// tangent at a sample reaches past every other sample.
fn diameter_bound(cloud: &PointCloud) -> f64 {
    let dim = cloud.ambient_dim();
    let mut lo = vec![f64::INFINITY; dim];
    let mut hi = vec![f64::NEG_INFINITY; dim];
    for i in 0..cloud.len() {
        for (d, &v) in cloud.point(i).iter().enumerate() {
            lo[d] = lo[d].min(v);
            hi[d] = hi[d].max(v);
        }
    }
    let diag = lo.iter().zip(&hi).map(|(a, b)| (b - a).powi(2)).sum::<f64>().sqrt();
    diag.max(f64::MIN_POSITIVE)
}

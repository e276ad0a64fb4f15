//! Configuration matrix runner: parses `BVH{W}-{SR|RS}-{C|U}` labels,
//! builds each tree once per width, renders every configuration and writes
//! images plus the traffic and diff CSV files.

use std::collections::HashMap;
use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use clap::Parser;
use thiserror::Error;

use crate::bvh::{
    build_binary_sah, collapse_to_width, compress, BinaryBvh, BuildConfig, BuildError, CompressConfig, Triangle,
    UncompressedBvh, WideBvh,
};
use crate::isect::Sidedness;
use crate::metrics::{report_csv, ConfigReport};
use crate::scene::{
    image_diff, load_obj, path_trace, write_image, Camera, DiffStats, FixedTracer, FloatTracer, Procedural, Render,
    RenderSettings, SceneError, Tracer, TriangleMesh,
};
use crate::traversal::{CompressedAccel, Mode, RayFormat, TraversalError, UncompressedAccel};

pub const WIDTHS: [usize; 3] = [2, 4, 8];
const GRAMMAR: &str = "BVH{2|4|8}-{SR|RS}-{C|U}";

#[derive(Debug, Error)]
pub enum CliError {
    #[error("invalid config '{0}', expected {GRAMMAR} or 'all'")]
    Label(String),
    #[error("invalid resolution '{0}', expected WxH")]
    Resolution(String),
    #[error("no configurations given")]
    NoConfigs,
    #[error(transparent)]
    Scene(#[from] SceneError),
    #[error(transparent)]
    Build(#[from] BuildError),
    #[error(transparent)]
    Traversal(#[from] TraversalError),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, CliError>;

/// Node and triangle storage.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Compression {
    /// Quantized nodes and triangles, fixed-point kernels.
    Compressed,
    /// Float nodes and triangles, `f32` kernels.
    Uncompressed,
}

impl fmt::Display for Compression {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::Compressed => "C",
            Self::Uncompressed => "U",
        })
    }
}

/// One cell of the configuration matrix.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct RunConfig {
    pub width: usize,
    pub mode: Mode,
    pub compression: Compression,
}

impl RunConfig {
    /// All twelve configurations, widths outermost.
    pub fn all() -> Vec<RunConfig> {
        let mut out = Vec::new();
        for width in WIDTHS {
            for mode in [Mode::Single, Mode::Stream] {
                for compression in [Compression::Compressed, Compression::Uncompressed] {
                    out.push(RunConfig { width, mode, compression });
                }
            }
        }
        out
    }

    pub fn label(&self) -> String {
        self.to_string()
    }
}

impl fmt::Display for RunConfig {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "BVH{}-{}-{}", self.width, self.mode, self.compression)
    }
}

impl FromStr for RunConfig {
    type Err = CliError;

    fn from_str(s: &str) -> Result<Self> {
        parse_config(s)
    }
}

pub fn parse_config(label: &str) -> Result<RunConfig> {
    let bad = || CliError::Label(label.to_string());
    let mut parts = label.split('-');
    let (Some(w), Some(m), Some(c), None) = (parts.next(), parts.next(), parts.next(), parts.next()) else {
        return Err(bad());
    };
    let width = match w {
        "BVH2" => 2,
        "BVH4" => 4,
        "BVH8" => 8,
        _ => return Err(bad()),
    };
    let mode = m.parse().map_err(|_| bad())?;
    let compression = match c {
        "C" => Compression::Compressed,
        "U" => Compression::Uncompressed,
        _ => return Err(bad()),
    };
    Ok(RunConfig { width, mode, compression })
}

/// Expands repeated `--config` values; `all` adds the full matrix. Order is
/// kept and duplicates are dropped.
pub fn parse_configs<S: AsRef<str>>(labels: &[S]) -> Result<Vec<RunConfig>> {
    let mut out: Vec<RunConfig> = Vec::new();
    for l in labels {
        let add = match l.as_ref() {
            "all" => RunConfig::all(),
            s => vec![parse_config(s)?],
        };
        for c in add {
            if !out.contains(&c) {
                out.push(c);
            }
        }
    }
    if out.is_empty() {
        return Err(CliError::NoConfigs);
    }
    Ok(out)
}

/// Procedural scene name or OBJ path.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SceneSource {
    Procedural(Procedural),
    Obj(PathBuf),
}

impl FromStr for SceneSource {
    type Err = CliError;

    fn from_str(s: &str) -> Result<Self> {
        match s.parse::<Procedural>() {
            Ok(p) => Ok(Self::Procedural(p)),
            Err(_)
                if Path::new(s).extension().is_some_and(|x| x.eq_ignore_ascii_case("obj"))
                    || Path::new(s).is_file() =>
            {
                Ok(Self::Obj(PathBuf::from(s)))
            }
            Err(e) => Err(e.into()),
        }
    }
}

impl fmt::Display for SceneSource {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Procedural(p) => p.fmt(f),
            Self::Obj(p) => p.display().fmt(f),
        }
    }
}

impl SceneSource {
    pub fn load(&self) -> Result<TriangleMesh> {
        Ok(match self {
            Self::Procedural(p) => p.mesh(),
            Self::Obj(path) => load_obj(path)?,
        })
    }

    pub fn camera(&self, mesh: &TriangleMesh, width: u32, height: u32) -> Result<Camera> {
        Ok(match self {
            Self::Procedural(p) => Camera::for_scene(*p, width, height)?,
            Self::Obj(_) => Camera::framing(&mesh.bounds(), width, height)?,
        })
    }
}

pub fn parse_resolution(s: &str) -> Result<(u32, u32)> {
    let bad = || CliError::Resolution(s.to_string());
    let (w, h) = s.split_once(['x', 'X']).ok_or_else(bad)?;
    let (w, h): (u32, u32) = (w.parse().map_err(|_| bad())?, h.parse().map_err(|_| bad())?);
    if w == 0 || h == 0 {
        return Err(bad());
    }
    Ok((w, h))
}

/// Command-line flags of the `quantrace` binary.
#[derive(Debug, Clone, Parser)]
#[command(
    name = "quantrace",
    about = "Render a scene under BVH{2,4,8}-{SR|RS}-{C|U} configurations and report memory traffic"
)]
pub struct Args {
    /// cornell, sphere:N, grid:N or a path to an OBJ file.
    #[arg(long, default_value = "cornell")]
    pub scene: String,
    /// Configuration label such as BVH8-RS-C, or `all`. Repeatable.
    #[arg(long = "config", default_value = "all")]
    pub configs: Vec<String>,
    #[arg(long, default_value = "512x512")]
    pub res: String,
    /// Diffuse bounces after the primary hit.
    #[arg(long, default_value_t = 0)]
    pub bounces: u32,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    /// Fractional bits of the decoded ray direction.
    #[arg(long, default_value_t = 10)]
    pub qdir: u32,
    /// Integer bits of the fixed-point ray origin.
    #[arg(long, default_value_t = 16)]
    pub rorg: u32,
    /// Fractional bits of the fixed-point ray origin.
    #[arg(long, default_value_t = 8)]
    pub qorg: u32,
    /// Output directory.
    #[arg(long, default_value = "out")]
    pub out: PathBuf,
    /// Configuration every render is compared against in diff.csv.
    #[arg(long)]
    pub reference: Option<String>,
    /// Reject back-facing hits.
    #[arg(long)]
    pub single_sided: bool,
}

/// Everything a matrix run needs besides the configuration list.
#[derive(Debug, Clone, PartialEq)]
pub struct RunOptions {
    pub scene: SceneSource,
    pub resolution: (u32, u32),
    pub bounces: u32,
    pub seed: u64,
    pub format: RayFormat,
    pub side: Sidedness,
    pub out: PathBuf,
    pub reference: Option<RunConfig>,
}

impl Args {
    pub fn resolve(&self) -> Result<(Vec<RunConfig>, RunOptions)> {
        let configs = parse_configs(&self.configs)?;
        let opts = RunOptions {
            scene: self.scene.parse()?,
            resolution: parse_resolution(&self.res)?,
            bounces: self.bounces,
            seed: self.seed,
            format: RayFormat { r_org: self.rorg, q_org: self.qorg, q_dir: self.qdir },
            side: if self.single_sided { Sidedness::SingleSided } else { Sidedness::TwoSided },
            out: self.out.clone(),
            reference: self.reference.as_deref().map(parse_config).transpose()?,
        };
        Ok((configs, opts))
    }
}

/// Result of one configuration.
#[derive(Debug, Clone, PartialEq)]
pub struct ConfigRun {
    pub config: RunConfig,
    pub render: Render,
}

impl ConfigRun {
    pub fn report(&self) -> ConfigReport {
        ConfigReport {
            label: self.config.label(),
            width: self.config.width,
            mode: self.config.mode.to_string(),
            compression: self.config.compression.to_string(),
            stats: self.render.total(),
            per_bounce: self.render.per_bounce.clone(),
        }
    }
}

#[derive(Debug)]
pub struct MatrixOutcome {
    pub runs: Vec<ConfigRun>,
    pub failures: Vec<(RunConfig, CliError)>,
    /// Comparison of every successful run against the reference render.
    pub diffs: Vec<(RunConfig, DiffStats)>,
    pub results_csv: String,
    pub diff_csv: Option<String>,
}

impl MatrixOutcome {
    pub fn ok(&self) -> bool {
        self.failures.is_empty()
    }
}

/// Trees shared between configurations of the same width.
struct TreeCache<'a> {
    tris: &'a [Triangle],
    side: Sidedness,
    format: RayFormat,
    binary: Option<BinaryBvh>,
    wide: HashMap<usize, WideBvh>,
    fixed: HashMap<usize, FixedTracer>,
    float: HashMap<usize, FloatTracer>,
}

impl<'a> TreeCache<'a> {
    fn wide(&mut self, width: usize) -> Result<&WideBvh> {
        if !self.wide.contains_key(&width) {
            if self.binary.is_none() {
                self.binary = Some(build_binary_sah(self.tris, &BuildConfig::default())?);
            }
            let bin = self.binary.as_ref().expect("built above");
            self.wide.insert(width, collapse_to_width(bin, width)?);
        }
        Ok(&self.wide[&width])
    }

    fn tracer(&mut self, cfg: RunConfig) -> Result<&dyn Tracer> {
        match cfg.compression {
            Compression::Compressed => {
                if !self.fixed.contains_key(&cfg.width) {
                    let (side, format, tris) = (self.side, self.format, self.tris);
                    let (bvh, _) = compress(self.wide(cfg.width)?, tris, &CompressConfig::default())?;
                    let t = FixedTracer::from_accel(CompressedAccel::new(bvh, side)?, format)?;
                    self.fixed.insert(cfg.width, t);
                }
                Ok(&self.fixed[&cfg.width])
            }
            Compression::Uncompressed => {
                if !self.float.contains_key(&cfg.width) {
                    let (side, tris) = (self.side, self.tris);
                    let bvh = UncompressedBvh::from_wide(self.wide(cfg.width)?, tris);
                    self.float.insert(cfg.width, FloatTracer::from_accel(UncompressedAccel::new(bvh, side), tris));
                }
                Ok(&self.float[&cfg.width])
            }
        }
    }

    fn render(&mut self, cfg: RunConfig, camera: &Camera, bounces: u32, seed: u64) -> Result<Render> {
        let tracer = self.tracer(cfg)?;
        Ok(path_trace(camera, tracer, &RenderSettings { bounces, seed, mode: cfg.mode })?)
    }
}

pub const DIFF_COLUMNS: [&str; 6] =
    ["config", "reference", "pixels", "hit_mismatches", "hit_mismatch_fraction", "mean_abs_color_diff"];

fn diff_csv(reference: RunConfig, diffs: &[(RunConfig, DiffStats)]) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(DIFF_COLUMNS).expect("write to memory");
    for (c, d) in diffs {
        w.write_record([
            c.label(),
            reference.label(),
            d.pixels.to_string(),
            d.hit_mismatches.to_string(),
            format!("{:.6}", d.hit_mismatch_fraction),
            format!("{:.6}", d.mean_abs_color_diff),
        ])
        .expect("write to memory");
    }
    String::from_utf8(w.into_inner().expect("flush to memory")).expect("csv output is utf-8")
}

/// Renders every configuration in order without touching the file system.
/// Failures are collected per configuration; the mesh and camera must load.
pub fn run_matrix_in_memory(configs: &[RunConfig], opts: &RunOptions) -> Result<MatrixOutcome> {
    if configs.is_empty() {
        return Err(CliError::NoConfigs);
    }
    let mesh = opts.scene.load()?;
    if mesh.is_empty() {
        return Err(SceneError::InvalidMesh("no triangles".into()).into());
    }
    let camera = opts.scene.camera(&mesh, opts.resolution.0, opts.resolution.1)?;
    let tris = mesh.triangles();
    let mut cache = TreeCache {
        tris: &tris,
        side: opts.side,
        format: opts.format,
        binary: None,
        wide: HashMap::new(),
        fixed: HashMap::new(),
        float: HashMap::new(),
    };

    let mut runs = Vec::new();
    let mut failures = Vec::new();
    for &config in configs {
        match cache.render(config, &camera, opts.bounces, opts.seed) {
            Ok(render) => runs.push(ConfigRun { config, render }),
            Err(e) => failures.push((config, e)),
        }
    }

    let mut diffs = Vec::new();
    let mut diff_text = None;
    if let Some(r) = opts.reference {
        let reference = match runs.iter().find(|run| run.config == r) {
            Some(run) => Some(run.render.image.clone()),
            None => match cache.render(r, &camera, opts.bounces, opts.seed) {
                Ok(render) => Some(render.image),
                Err(e) => {
                    failures.push((r, e));
                    None
                }
            },
        };
        if let Some(img) = reference {
            for run in &runs {
                diffs.push((run.config, image_diff(&run.render.image, &img)?));
            }
            diff_text = Some(diff_csv(r, &diffs));
        }
    }

    let reports: Vec<_> = runs.iter().map(ConfigRun::report).collect();
    Ok(MatrixOutcome { results_csv: report_csv(&reports), runs, failures, diffs, diff_csv: diff_text })
}

/// [`run_matrix_in_memory`] plus `<label>.ppm` per configuration,
/// `results.csv` and, with a reference, `diff.csv` in `opts.out`.
pub fn run_matrix(configs: &[RunConfig], opts: &RunOptions) -> Result<MatrixOutcome> {
    let outcome = run_matrix_in_memory(configs, opts)?;
    std::fs::create_dir_all(&opts.out)?;
    for run in &outcome.runs {
        write_image(&run.render.image, opts.out.join(format!("{}.ppm", run.config.label())))?;
    }
    std::fs::write(opts.out.join("results.csv"), &outcome.results_csv)?;
    if let Some(d) = &outcome.diff_csv {
        std::fs::write(opts.out.join("diff.csv"), d)?;
    }
    Ok(outcome)
}

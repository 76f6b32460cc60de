//! Command-line front end: run configuration, experiment recipes and
//! result files.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::geometry::{Problem, ScattererShape};
use crate::mesh::Mesh;
use crate::neps::{PoleEstimate, SolverConfig};
use crate::oracle::disk_exact_poles;
use crate::study::{convergence_report, follow, mesh_at, solve_at_level, solve_levels, ConvergenceReport, LevelSolution};
use crate::Rect;

/// Angular orders scanned by the exact disk solver.
pub const DISK_MAX_ORDER: u32 = 12;

/// `[problem]` section.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProblemSection {
    pub shape: ScattererShape,
    pub n_inside: f64,
    pub truncation_radius: f64,
    pub dtn_order: u32,
    #[serde(default = "Rect::default_window")]
    pub search_region: Rect,
}

/// `[mesh]` section.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MeshSection {
    /// Target maximum edge length of the coarsest mesh.
    pub target_h: f64,
    /// Number of meshes in the hierarchy, the coarsest counting as level 1.
    pub levels: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Format {
    Csv,
    Json,
}

/// `[output]` section.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSection {
    pub directory: PathBuf,
    #[serde(default = "default_formats")]
    pub formats: Vec<Format>,
}

fn default_formats() -> Vec<Format> {
    vec![Format::Csv, Format::Json]
}

/// Complete description of a run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub problem: ProblemSection,
    pub mesh: MeshSection,
    #[serde(default)]
    pub solver: SolverConfig,
    pub output: OutputSection,
    /// Marks presets that take far longer than a test run.
    #[serde(default, skip_serializing_if = "std::ops::Not::not")]
    pub long_running: bool,
}

impl RunConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        let cfg: RunConfig = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("configuration is always representable")
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
        Self::from_toml(&text)
    }

    pub fn validate(&self) -> Result<()> {
        self.problem().map_err(|e| Error::Config(e.to_string()))?;
        if !(self.mesh.target_h > 0.0 && self.mesh.target_h.is_finite()) {
            return Err(Error::Config(format!("mesh.target_h must be positive, got {}", self.mesh.target_h)));
        }
        if self.mesh.levels == 0 {
            return Err(Error::Config("mesh.levels must be at least 1".into()));
        }
        if self.output.formats.is_empty() {
            return Err(Error::Config("output.formats is empty".into()));
        }
        self.solver.validate()
    }

    pub fn problem(&self) -> Result<Problem> {
        let p = &self.problem;
        Problem::new(p.shape, p.n_inside, p.truncation_radius, p.dtn_order, p.search_region)
    }

    /// SHA-256 of the canonical serialization.
    pub fn hash(&self) -> String {
        hex(&Sha256::digest(self.to_toml().as_bytes()))
    }

    fn wants(&self, f: Format) -> bool {
        self.output.formats.contains(&f)
    }
}

fn hex(bytes: &[u8]) -> String {
    bytes.iter().fold(String::new(), |mut s, b| {
        let _ = write!(s, "{b:02x}");
        s
    })
}

/// Coarsest mesh size of the reference hierarchy.
pub fn reference_h() -> f64 {
    0.04 * std::f64::consts::PI
}

fn preset(shape: ScattererShape, n_inside: f64, radius: f64, dir: &str) -> RunConfig {
    RunConfig {
        problem: ProblemSection {
            shape,
            n_inside,
            truncation_radius: radius,
            dtn_order: 20,
            search_region: Rect::default_window(),
        },
        mesh: MeshSection { target_h: reference_h(), levels: 4 },
        solver: SolverConfig::default(),
        output: OutputSection { directory: PathBuf::from(dir), formats: default_formats() },
        long_running: false,
    }
}

fn atlas(shape: ScattererShape, n_inside: f64, radius: f64, dir: &str) -> RunConfig {
    let mut c = preset(shape, n_inside, radius, dir);
    c.problem.dtn_order = 30;
    c.problem.search_region = Rect { re_min: 0.0, re_max: 12.0, im_min: -4.0, im_max: 0.0 };
    c.mesh.levels = 5;
    c.long_running = true;
    c
}

/// Names of the built-in configurations.
pub const PRESETS: &[&str] = &[
    "disk-n4",
    "disk-n0.25",
    "square-n4",
    "square-n0.25",
    "l-shape-n4",
    "ellipse-n4",
    "atlas-square-n4",
    "atlas-square-n0.25",
    "atlas-l-shape-n4",
    "atlas-ellipse-n4",
];

/// Built-in configuration by name.
pub fn preset_config(name: &str) -> Result<RunConfig> {
    let disk = ScattererShape::Disk { radius: 1.0 };
    let square = ScattererShape::Square { side: 1.0, center: [0.0, 0.0] };
    let lshape = ScattererShape::LShape { outer_side: 1.0 };
    let ellipse = ScattererShape::Ellipse { semi_major: 1.2, semi_minor: 0.8 };
    Ok(match name {
        "disk-n4" => preset(disk, 4.0, 1.25, "results/disk-n4"),
        "disk-n0.25" => preset(disk, 0.25, 1.25, "results/disk-n0.25"),
        "square-n4" => preset(square, 4.0, 0.8, "results/square-n4"),
        "square-n0.25" => preset(square, 0.25, 0.8, "results/square-n0.25"),
        "l-shape-n4" => preset(lshape, 4.0, 0.8, "results/l-shape-n4"),
        "ellipse-n4" => preset(ellipse, 4.0, 1.3, "results/ellipse-n4"),
        "atlas-square-n4" => atlas(square, 4.0, 0.8, "results/atlas-square-n4"),
        "atlas-square-n0.25" => atlas(square, 0.25, 0.8, "results/atlas-square-n0.25"),
        "atlas-l-shape-n4" => atlas(lshape, 4.0, 0.8, "results/atlas-l-shape-n4"),
        "atlas-ellipse-n4" => atlas(ellipse, 4.0, 1.3, "results/atlas-ellipse-n4"),
        _ => return Err(Error::Config(format!("unknown preset '{name}', expected one of {}", PRESETS.join(", ")))),
    })
}

#[derive(Debug, Parser)]
#[command(name = "rdtn", version, about = "Scattering resonances of 2D transmission problems")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Poles in the search region on one mesh level.
    Solve {
        #[command(flatten)]
        run: RunArgs,
        /// Mesh level to solve on (default: the finest configured level).
        #[arg(long)]
        level: Option<usize>,
    },
    /// Poles on every level with errors and observed orders.
    Converge {
        #[command(flatten)]
        run: RunArgs,
    },
    /// Pole errors as the truncation radius varies.
    SweepR {
        #[command(flatten)]
        run: RunArgs,
        /// Comma-separated radii.
        #[arg(long, value_delimiter = ',', required = true)]
        radii: Vec<f64>,
        #[command(flatten)]
        seeds: SeedArgs,
    },
    /// Pole errors as the DtN truncation order varies.
    SweepN {
        #[command(flatten)]
        run: RunArgs,
        #[arg(long, default_value_t = 5)]
        n_min: u32,
        #[arg(long, default_value_t = 20)]
        n_max: u32,
        #[command(flatten)]
        seeds: SeedArgs,
    },
    /// Exact resonances of the penetrable disk as CSV.
    ExactDisk {
        #[arg(long)]
        n_inside: f64,
        /// Search region as re_min,re_max,im_min,im_max.
        #[arg(long, value_parser = parse_rect, allow_hyphen_values = true)]
        region: Option<Rect>,
        #[arg(long, default_value_t = DISK_MAX_ORDER)]
        max_order: u32,
        /// Output file (default: standard output).
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Mesh files and quality statistics for every level.
    Mesh {
        #[command(flatten)]
        run: RunArgs,
    },
    /// Prints a built-in configuration.
    Preset {
        name: Option<String>,
        /// Lists the available presets.
        #[arg(long)]
        list: bool,
    },
}

/// Configuration source and overrides shared by the run commands.
#[derive(Debug, Args, Default)]
pub struct RunArgs {
    /// TOML run configuration.
    #[arg(long, conflicts_with = "preset")]
    pub config: Option<PathBuf>,
    /// Built-in configuration instead of a file.
    #[arg(long)]
    pub preset: Option<String>,
    /// Overwrite results produced by a different configuration.
    #[arg(long)]
    pub force: bool,
    #[arg(long)]
    pub n_inside: Option<f64>,
    #[arg(long)]
    pub truncation_radius: Option<f64>,
    #[arg(long)]
    pub dtn_order: Option<u32>,
    /// Search region as re_min,re_max,im_min,im_max.
    #[arg(long, value_parser = parse_rect, allow_hyphen_values = true)]
    pub search_region: Option<Rect>,
    #[arg(long)]
    pub target_h: Option<f64>,
    #[arg(long)]
    pub levels: Option<usize>,
    #[arg(long)]
    pub quad_nodes_localize: Option<usize>,
    #[arg(long)]
    pub quad_nodes_extract: Option<usize>,
    #[arg(long)]
    pub probes: Option<usize>,
    #[arg(long)]
    pub rank_tol: Option<f64>,
    #[arg(long)]
    pub residual_tol: Option<f64>,
    #[arg(long)]
    pub max_depth: Option<u32>,
    #[arg(long)]
    pub indicator_threshold: Option<f64>,
    #[arg(long)]
    pub rng_seed: Option<u64>,
    #[arg(long)]
    pub track_nodes: Option<usize>,
    #[arg(long)]
    pub track_radius: Option<f64>,
    #[arg(long)]
    pub pair_tol: Option<f64>,
    #[arg(long)]
    pub search_levels: Option<usize>,
    #[arg(long)]
    pub output_dir: Option<PathBuf>,
    /// Comma-separated subset of csv,json.
    #[arg(long, value_delimiter = ',')]
    pub formats: Option<Vec<String>>,
}

/// Poles to follow in a sweep.
#[derive(Debug, Args, Default)]
pub struct SeedArgs {
    /// Comma-separated starting values such as 1.9778-0.2791i; a trailing
    /// `x2` gives a multiplicity. Default: exact poles for disks, otherwise
    /// the poles found on the coarsest mesh.
    #[arg(long, value_delimiter = ',')]
    pub poles: Option<Vec<String>>,
}

impl RunArgs {
    /// Configuration with every given flag applied.
    pub fn resolve(&self) -> Result<RunConfig> {
        let mut c = match (&self.config, &self.preset) {
            (Some(path), _) => RunConfig::load(path)?,
            (None, Some(name)) => preset_config(name)?,
            (None, None) => return Err(Error::Config("either --config or --preset is required".into())),
        };
        macro_rules! set {
            ($($flag:ident => $($field:ident).+),* $(,)?) => {
                $(if let Some(v) = self.$flag.clone() { c.$($field).+ = v; })*
            };
        }
        set!(
            n_inside => problem.n_inside,
            truncation_radius => problem.truncation_radius,
            dtn_order => problem.dtn_order,
            target_h => mesh.target_h,
            levels => mesh.levels,
            quad_nodes_localize => solver.quad_nodes_localize,
            quad_nodes_extract => solver.quad_nodes_extract,
            probes => solver.probes,
            rank_tol => solver.rank_tol,
            residual_tol => solver.residual_tol,
            max_depth => solver.max_depth,
            indicator_threshold => solver.indicator_threshold,
            rng_seed => solver.rng_seed,
            track_nodes => solver.track_nodes,
            track_radius => solver.track_radius,
            pair_tol => solver.pair_tol,
            search_levels => solver.search_levels,
            output_dir => output.directory,
        );
        if let Some(r) = self.search_region {
            c.problem.search_region = r;
        }
        if let Some(fs) = &self.formats {
            c.output.formats = fs
                .iter()
                .map(|f| match f.trim() {
                    "csv" => Ok(Format::Csv),
                    "json" => Ok(Format::Json),
                    other => Err(Error::Config(format!("unknown output format '{other}'"))),
                })
                .collect::<Result<_>>()?;
        }
        c.validate()?;
        Ok(c)
    }
}

/// Parses `a+bi`, `a-bi`, `a`, `bi`, optionally followed by `x<multiplicity>`.
/// Parses `re_min,re_max,im_min,im_max`.
pub fn parse_rect(text: &str) -> std::result::Result<Rect, String> {
    let v = text
        .split(',')
        .map(|t| t.trim().parse::<f64>().map_err(|e| format!("{t:?}: {e}")))
        .collect::<std::result::Result<Vec<_>, _>>()?;
    match v[..] {
        [a, b, c, d] => Rect::new(a, b, c, d).map_err(|e| e.to_string()),
        _ => Err(format!("expected 4 comma-separated numbers, got {}", v.len())),
    }
}

pub fn parse_pole(text: &str) -> Result<(Complex64, usize)> {
    let bad = || Error::Config(format!("cannot parse pole '{text}'"));
    let t = text.trim();
    let (value, mult) = match t.rsplit_once('x') {
        Some((v, m)) => (v, m.parse::<usize>().map_err(|_| bad())?),
        None => (t, 1),
    };
    let v = value.replace(' ', "");
    let k = if let Some(body) = v.strip_suffix('i') {
        // Split at the last sign that is not part of an exponent.
        let bytes = body.as_bytes();
        let split = (1..bytes.len())
            .rev()
            .find(|&i| (bytes[i] == b'+' || bytes[i] == b'-') && !matches!(bytes[i - 1], b'e' | b'E'));
        match split {
            Some(i) => {
                let re: f64 = body[..i].parse().map_err(|_| bad())?;
                let im_text = &body[i..];
                let im: f64 = match im_text {
                    "+" => 1.0,
                    "-" => -1.0,
                    s => s.parse().map_err(|_| bad())?,
                };
                Complex64::new(re, im)
            }
            None => Complex64::new(0.0, body.parse().map_err(|_| bad())?),
        }
    } else {
        Complex64::new(v.parse().map_err(|_| bad())?, 0.0)
    };
    if mult == 0 {
        return Err(bad());
    }
    Ok((k, mult))
}

/// `{:.16e}`: 17 significant digits, round-trips every `f64`.
fn num(v: f64) -> String {
    format!("{v:.16e}")
}

fn csv_table(header: &[&str], rows: impl IntoIterator<Item = Vec<String>>) -> String {
    let mut s = header.join(",");
    s.push('\n');
    for r in rows {
        s.push_str(&r.join(","));
        s.push('\n');
    }
    s
}

/// CSV of poles: `re_k,im_k,multiplicity,residual,mesh_level,spread`.
pub fn poles_csv(poles: &[PoleEstimate]) -> String {
    csv_table(
        &["re_k", "im_k", "multiplicity", "residual", "mesh_level", "spread"],
        poles.iter().map(|p| {
            vec![
                num(p.k.re),
                num(p.k.im),
                p.multiplicity.to_string(),
                num(p.residual),
                p.mesh_level.to_string(),
                num(p.spread),
            ]
        }),
    )
}

fn opt_num(v: Option<f64>) -> String {
    v.map(num).unwrap_or_default()
}

/// One row per pole and level.
pub fn convergence_csv(rep: &ConvergenceReport) -> String {
    let mut rows = Vec::new();
    for (id, p) in rep.poles.iter().enumerate() {
        for (j, &level) in rep.levels.iter().enumerate() {
            let Some(k) = p.values[j] else { continue };
            rows.push(vec![
                id.to_string(),
                level.to_string(),
                num(k.re),
                num(k.im),
                p.multiplicities[j].map(|m| m.to_string()).unwrap_or_default(),
                opt_num(p.errors[j].map(|e| e.re)),
                opt_num(p.errors[j].map(|e| e.im)),
                opt_num(p.errors[j].map(|e| e.norm())),
                opt_num(p.orders[j]),
                opt_num(p.reference.map(|r| r.re)),
                opt_num(p.reference.map(|r| r.im)),
                p.ambiguous.to_string(),
            ]);
        }
    }
    csv_table(
        &[
            "pole", "mesh_level", "re_k", "im_k", "multiplicity", "re_e", "im_e", "abs_e", "order", "re_ref", "im_ref",
            "ambiguous",
        ],
        rows,
    )
}

/// Fixed-width table of errors and orders.
pub fn convergence_table(rep: &ConvergenceReport) -> String {
    let mut s = String::new();
    let kind = match rep.error_kind {
        crate::study::ErrorKind::Exact => "e_j = k_j - k_exact",
        crate::study::ErrorKind::Successive => "e_j = k_j - k_(j+1)",
    };
    let _ = writeln!(s, "errors: {kind}");
    for p in &rep.poles {
        let Some(fin) = p.finest() else { continue };
        let flag = if p.ambiguous { "  [ambiguous matching]" } else { "" };
        let _ = writeln!(s, "pole {:.6}{:+.6}i{flag}", fin.re, fin.im);
        for (j, &level) in rep.levels.iter().enumerate() {
            let Some(k) = p.values[j] else { continue };
            let e = p.errors[j].map(|e| format!("{:+.2e}{:+.2e}i", e.re, e.im)).unwrap_or_else(|| "-".into());
            let o = p.orders[j].map(|o| format!("{o:.2}")).unwrap_or_else(|| "-".into());
            let m = p.multiplicities[j].unwrap_or(0);
            let _ = writeln!(s, "  h{level:<2} k = {:.8}{:+.8}i  m{m}  e = {e:<22} CO = {o}", k.re, k.im);
        }
    }
    s
}

const MANIFEST: &str = "manifest.json";

#[derive(Debug, Serialize, Deserialize)]
struct Manifest {
    config_sha256: String,
    command: String,
}

/// Result directory guarded by the hash of the configuration that wrote it.
pub struct OutputDir {
    dir: PathBuf,
}

impl OutputDir {
    /// Refuses a directory written by a different configuration unless
    /// `force` is set.
    pub fn open(cfg: &RunConfig, command: &str, force: bool) -> Result<Self> {
        let dir = cfg.output.directory.clone();
        fs::create_dir_all(&dir)?;
        let hash = cfg.hash();
        let path = dir.join(MANIFEST);
        if path.exists() && !force {
            let old: Manifest = serde_json::from_str(&fs::read_to_string(&path)?)
                .map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
            if old.config_sha256 != hash {
                return Err(Error::Config(format!(
                    "{} holds results of another configuration (sha256 {}); use --force to overwrite",
                    dir.display(),
                    old.config_sha256
                )));
            }
        }
        let out = Self { dir };
        let manifest = Manifest { config_sha256: hash, command: command.to_string() };
        out.write(MANIFEST, &json(&manifest))?;
        out.write("config.toml", &cfg.to_toml())?;
        Ok(out)
    }

    /// Writes through a temporary file and a rename.
    pub fn write(&self, name: &str, contents: &str) -> Result<PathBuf> {
        write_atomic(&self.dir.join(name), contents)
    }
}

/// Writes `contents` to `path` through a temporary sibling and a rename.
pub fn write_atomic(path: &Path, contents: &str) -> Result<PathBuf> {
    let name = path.file_name().ok_or_else(|| Error::Config(format!("not a file path: {}", path.display())))?;
    let tmp = path.with_file_name(format!(".{}.tmp", name.to_string_lossy()));
    fs::write(&tmp, contents)?;
    fs::rename(&tmp, path)?;
    Ok(path.to_path_buf())
}

fn json<T: Serialize>(v: &T) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("serializable");
    s.push('\n');
    s
}

/// JSON envelope recording the provenance of every result.
#[derive(Debug, Serialize)]
struct Envelope<'a, T: Serialize> {
    config_sha256: String,
    rng_seed: u64,
    command: &'a str,
    config: &'a RunConfig,
    result: T,
}

fn envelope<'a, T: Serialize>(cfg: &'a RunConfig, command: &'a str, result: T) -> String {
    json(&Envelope { config_sha256: cfg.hash(), rng_seed: cfg.solver.rng_seed, command, config: cfg, result })
}

fn disk_reference(cfg: &RunConfig) -> Result<Option<Vec<(Complex64, usize)>>> {
    match cfg.problem.shape {
        ScattererShape::Disk { radius } if radius == 1.0 => {
            let exact = disk_exact_poles(cfg.problem.n_inside, DISK_MAX_ORDER, &cfg.problem.search_region)?;
            Ok(Some(exact.poles.iter().map(|p| (p.k, p.multiplicity as usize)).collect()))
        }
        _ => Ok(None),
    }
}

/// Runs the pole search at one level and writes `poles.csv` / `poles.json`.
pub fn cmd_solve(cfg: &RunConfig, level: Option<usize>, force: bool) -> Result<LevelSolution> {
    let level = level.unwrap_or(cfg.mesh.levels);
    let out = OutputDir::open(cfg, "solve", force)?;
    let sol = solve_at_level(&cfg.problem()?, cfg.mesh.target_h, level, &cfg.solver)?;
    if cfg.wants(Format::Csv) {
        out.write("poles.csv", &poles_csv(&sol.poles))?;
    }
    if cfg.wants(Format::Json) {
        out.write("poles.json", &envelope(cfg, "solve", &sol))?;
    }
    Ok(sol)
}

/// Multilevel run with errors against exact poles for the unit disk and
/// successive differences otherwise.
pub fn cmd_converge(cfg: &RunConfig, force: bool, mut log: impl FnMut(&str)) -> Result<ConvergenceReport> {
    let out = OutputDir::open(cfg, "converge", force)?;
    let problem = cfg.problem()?;
    let levels = solve_levels(&problem, cfg.mesh.target_h, cfg.mesh.levels, &cfg.solver, |l| {
        log(&format!("level {} (h = {:.4e}, {} dofs): {} poles", l.level, l.nominal_h, l.dofs, l.poles.len()));
    })?;
    let reference = disk_reference(cfg)?.map(|r| r.into_iter().map(|(k, _)| k).collect::<Vec<_>>());
    let rep = convergence_report(&levels, reference.as_deref());
    if cfg.wants(Format::Csv) {
        let all: Vec<PoleEstimate> = levels.iter().flat_map(|l| l.poles.clone()).collect();
        out.write("levels.csv", &poles_csv(&all))?;
        out.write("convergence.csv", &convergence_csv(&rep))?;
    }
    if cfg.wants(Format::Json) {
        out.write("convergence.json", &envelope(cfg, "converge", (&levels, &rep)))?;
    }
    out.write("convergence.txt", &convergence_table(&rep))?;
    Ok(rep)
}

/// One row of a parameter sweep.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepRow {
    pub parameter: f64,
    /// Starting value identifying the followed pole.
    pub seed: Complex64,
    pub k: Option<Complex64>,
    pub multiplicity: usize,
    pub reference: Option<Complex64>,
    pub relative_error: Option<f64>,
}

fn sweep_seeds(cfg: &RunConfig, seeds: &SeedArgs) -> Result<Vec<(Complex64, usize)>> {
    if let Some(list) = &seeds.poles {
        return list.iter().map(|s| parse_pole(s)).collect();
    }
    if let Some(exact) = disk_reference(cfg)? {
        return Ok(exact);
    }
    let coarse = solve_at_level(&cfg.problem()?, cfg.mesh.target_h, 1, &cfg.solver)?;
    Ok(coarse.poles.iter().map(|p| (p.k, p.multiplicity)).collect())
}

/// Follows every seed on the finest configured level for each problem
/// variant. Without exact values the last variant is the reference.
pub fn run_sweep(
    cfg: &RunConfig,
    variants: &[(f64, Problem)],
    seeds: &[(Complex64, usize)],
) -> Result<Vec<SweepRow>> {
    let exact = disk_reference(cfg)?;
    let mut finest: Vec<Vec<Option<&PoleEstimate>>> = Vec::new();
    let mut runs = Vec::new();
    for (_, problem) in variants {
        let levels = follow(problem, cfg.mesh.target_h, cfg.mesh.levels, seeds, &cfg.solver)?;
        runs.push(levels.into_iter().last().expect("at least one level"));
    }
    for run in &runs {
        finest.push(
            seeds
                .iter()
                .enumerate()
                .map(|(i, _)| run.poles.iter().find(|p| p.contour_id == i))
                .collect(),
        );
    }
    let mut rows = Vec::new();
    for (v, (param, _)) in variants.iter().enumerate() {
        for (i, &(seed, _)) in seeds.iter().enumerate() {
            let hit = finest[v][i];
            let reference = match &exact {
                Some(e) => e.iter().map(|x| x.0).min_by(|a, b| (a - seed).norm().total_cmp(&(b - seed).norm())),
                None => finest.last().and_then(|f| f[i]).map(|p| p.k),
            };
            rows.push(SweepRow {
                parameter: *param,
                seed,
                k: hit.map(|p| p.k),
                multiplicity: hit.map_or(0, |p| p.multiplicity),
                reference,
                relative_error: match (hit, reference) {
                    (Some(p), Some(r)) => Some((p.k - r).norm() / r.norm()),
                    _ => None,
                },
            });
        }
    }
    Ok(rows)
}

fn sweep_csv(name: &str, rows: &[SweepRow]) -> String {
    csv_table(
        &[name, "re_seed", "im_seed", "re_k", "im_k", "multiplicity", "re_ref", "im_ref", "relative_error"],
        rows.iter().map(|r| {
            vec![
                num(r.parameter),
                num(r.seed.re),
                num(r.seed.im),
                opt_num(r.k.map(|k| k.re)),
                opt_num(r.k.map(|k| k.im)),
                r.multiplicity.to_string(),
                opt_num(r.reference.map(|k| k.re)),
                opt_num(r.reference.map(|k| k.im)),
                opt_num(r.relative_error),
            ]
        }),
    )
}

fn write_sweep(cfg: &RunConfig, out: &OutputDir, stem: &str, column: &str, rows: &[SweepRow]) -> Result<()> {
    if cfg.wants(Format::Csv) {
        out.write(&format!("{stem}.csv"), &sweep_csv(column, rows))?;
    }
    if cfg.wants(Format::Json) {
        out.write(&format!("{stem}.json"), &envelope(cfg, stem, rows))?;
    }
    Ok(())
}

/// Truncation radius sweep.
pub fn cmd_sweep_r(cfg: &RunConfig, radii: &[f64], seeds: &SeedArgs, force: bool) -> Result<Vec<SweepRow>> {
    if radii.is_empty() {
        return Err(Error::Config("empty radius list".into()));
    }
    let base = cfg.problem()?;
    let variants = radii
        .iter()
        .map(|&r| {
            let p = Problem { radius: r, ..base.clone() };
            p.validate().map_err(|e| Error::Config(e.to_string()))?;
            Ok((r, p))
        })
        .collect::<Result<Vec<_>>>()?;
    let out = OutputDir::open(cfg, "sweep-r", force)?;
    let rows = run_sweep(cfg, &variants, &sweep_seeds(cfg, seeds)?)?;
    write_sweep(cfg, &out, "sweep_r", "truncation_radius", &rows)?;
    Ok(rows)
}

/// DtN truncation order sweep.
pub fn cmd_sweep_n(cfg: &RunConfig, n_min: u32, n_max: u32, seeds: &SeedArgs, force: bool) -> Result<Vec<SweepRow>> {
    if n_min == 0 || n_max > 60 || n_min > n_max {
        return Err(Error::Config(format!("order range {n_min}..={n_max} must lie within 1..=60")));
    }
    let base = cfg.problem()?;
    let variants: Vec<(f64, Problem)> =
        (n_min..=n_max).map(|n| (n as f64, Problem { dtn_order: n, ..base.clone() })).collect();
    let out = OutputDir::open(cfg, "sweep-n", force)?;
    let rows = run_sweep(cfg, &variants, &sweep_seeds(cfg, seeds)?)?;
    write_sweep(cfg, &out, "sweep_n", "dtn_order", &rows)?;
    Ok(rows)
}

/// Exact disk resonances: `re_k,im_k,angular_order,multiplicity`.
pub fn exact_disk_csv(n_inside: f64, region: &Rect, max_order: u32) -> Result<String> {
    let search = disk_exact_poles(n_inside, max_order, region)?;
    Ok(csv_table(
        &["re_k", "im_k", "angular_order", "multiplicity"],
        search.poles.iter().map(|p| vec![num(p.k.re), num(p.k.im), p.angular_order.to_string(), p.multiplicity.to_string()]),
    ))
}

/// Writes `mesh_L<j>.rdtn` for every level and `mesh_stats.csv`.
pub fn cmd_mesh(cfg: &RunConfig, force: bool) -> Result<Vec<Mesh>> {
    let out = OutputDir::open(cfg, "mesh", force)?;
    let problem = cfg.problem()?;
    let mut meshes: Vec<Mesh> = Vec::new();
    for level in 1..=cfg.mesh.levels {
        let m = match meshes.last() {
            None => mesh_at(&problem, cfg.mesh.target_h, 1)?,
            Some(prev) => crate::mesh::refine_uniform(prev, &problem)?,
        };
        out.write(&format!("mesh_L{level}.rdtn"), &m.to_text())?;
        meshes.push(m);
    }
    let stats = csv_table(
        &["mesh_level", "vertices", "triangles", "nominal_h", "min_angle_deg", "max_edge", "min_edge", "total_area", "inside_area"],
        meshes.iter().enumerate().map(|(j, m)| {
            let q = m.quality();
            vec![
                (j + 1).to_string(),
                m.num_vertices().to_string(),
                m.num_triangles().to_string(),
                num(m.nominal_h),
                num(q.min_angle_deg),
                num(q.max_edge),
                num(q.min_edge),
                num(q.total_area),
                num(q.inside_area),
            ]
        }),
    );
    out.write("mesh_stats.csv", &stats)?;
    Ok(meshes)
}

/// Executes a parsed command line, printing summaries to standard output.
pub fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Solve { run, level } => {
            let cfg = run.resolve()?;
            let sol = cmd_solve(&cfg, level, run.force)?;
            print!("{}", poles_csv(&sol.poles));
        }
        Command::Converge { run } => {
            let cfg = run.resolve()?;
            let rep = cmd_converge(&cfg, run.force, |s| eprintln!("{s}"))?;
            print!("{}", convergence_table(&rep));
        }
        Command::SweepR { run, radii, seeds } => {
            let cfg = run.resolve()?;
            let rows = cmd_sweep_r(&cfg, &radii, &seeds, run.force)?;
            print!("{}", sweep_csv("truncation_radius", &rows));
        }
        Command::SweepN { run, n_min, n_max, seeds } => {
            let cfg = run.resolve()?;
            let rows = cmd_sweep_n(&cfg, n_min, n_max, &seeds, run.force)?;
            print!("{}", sweep_csv("dtn_order", &rows));
        }
        Command::ExactDisk { n_inside, region, max_order, out } => {
            let region = region.unwrap_or_else(Rect::default_window);
            let csv = exact_disk_csv(n_inside, &region, max_order)?;
            match out {
                Some(path) => {
                    write_atomic(&path, &csv)?;
                }
                None => print!("{csv}"),
            }
        }
        Command::Mesh { run } => {
            let cfg = run.resolve()?;
            let meshes = cmd_mesh(&cfg, run.force)?;
            for (j, m) in meshes.iter().enumerate() {
                let q = m.quality();
                println!(
                    "level {}: {} vertices, {} triangles, h = {:.4e}, min angle {:.2} deg",
                    j + 1,
                    m.num_vertices(),
                    m.num_triangles(),
                    m.nominal_h,
                    q.min_angle_deg
                );
            }
        }
        Command::Preset { name, list } => {
            if list || name.is_none() {
                for p in PRESETS {
                    let tag = if preset_config(p)?.long_running { "  (long-running)" } else { "" };
                    println!("{p}{tag}");
                }
            } else if let Some(n) = name {
                print!("{}", preset_config(&n)?.to_toml());
            }
        }
    }
    Ok(())
}

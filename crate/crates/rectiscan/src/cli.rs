//! Command-line front end. Each subcommand computes everything in memory
//! and hands its files to `Outputs`, so a failed run leaves nothing behind.

use std::ffi::OsString;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use rayon::prelude::*;

use rectiscan_core::datasets::{generate, GeneratorKind, GeneratorSpec, GraphProfile};
use rectiscan_core::geometry::{interior_cube, AlphaConfig};
use rectiscan_core::kernels::KernelSpec;
use rectiscan_core::lattice::{build_lattice, lattice_audit, DEFAULT_BAND};
use rectiscan_core::sampling::sample_centers;
use rectiscan_core::square::{carleson_norm, Ball, CarlesonOptions, CoefficientField, Functional, ScaleGrid};
use rectiscan_core::uniformity::{uniformity_identity_check, wcd_defect, WcdConfig};
use rectiscan_core::wavelet::{cascade_tables, reconstruction_check, zero_cubes, WaveletCoeff};
use rectiscan_core::DiscreteMeasure;

use crate::error::{from_core, Classify, CliError, CliResult};
use crate::io::{dataset_csv, field_csv, fmt_f64, json_bytes, read_dataset, Outputs};
use crate::parallel;
use crate::report;
use crate::schema::*;

#[derive(Parser, Debug)]
#[command(name = "rectiscan", version, about = "Multiscale square functions and flatness diagnostics for point-cloud measures")]
pub struct Cli {
    /// Worker threads; overrides RECTISCAN_THREADS.
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Write a generated dataset as CSV.
    Generate(GenerateArgs),
    /// Evaluate a functional on a (center, scale) grid.
    Analyze(AnalyzeArgs),
    /// Carleson box sums of a functional over balls.
    Carleson(CarlesonArgs),
    /// Build the dyadic cube lattice, audit it and pack α² over a subtree.
    AlphaAudit(AlphaAuditArgs),
    /// Constant-density defect on balls.
    Wcd(WcdArgs),
    /// Check that t^{-n}∫f(|x−y|²/t²)dμ(y) is constant.
    Uniformity(UniformityArgs),
    /// Coefficient checks for the wavelet expansion of the density kernel.
    WaveletCheck(WaveletArgs),
    /// Merge JSON outputs into a markdown summary and a plot-ready CSV.
    Report(ReportArgs),
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
pub enum KindArg {
    Plane,
    Segment,
    Circle,
    Graph,
    Cantor,
    PerturbedPlane,
    AtomCloud,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
pub enum ProfileArg {
    Sine,
    AbsSine,
}

#[derive(Args, Debug)]
pub struct GenerateArgs {
    #[arg(long, value_enum)]
    pub kind: KindArg,
    /// Point budget (ignored by cantor).
    #[arg(long, default_value_t = 1001)]
    pub points: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Target dimension.
    #[arg(long, default_value_t = 1)]
    pub n: usize,
    /// Ambient dimension; defaults to n + 1.
    #[arg(long)]
    pub d: Option<usize>,
    #[arg(long, default_value_t = 1.0)]
    pub length: f64,
    #[arg(long, default_value_t = 1.0)]
    pub side: f64,
    #[arg(long, default_value_t = 1.0)]
    pub radius: f64,
    #[arg(long, default_value_t = 0.3)]
    pub amplitude: f64,
    #[arg(long, default_value_t = 1.0)]
    pub frequency: f64,
    #[arg(long, value_enum, default_value_t = ProfileArg::Sine)]
    pub profile: ProfileArg,
    /// Require 2π·amplitude·frequency < 1.
    #[arg(long)]
    pub small_constant: bool,
    #[arg(long, default_value_t = 6)]
    pub generation: u32,
    #[arg(long, default_value_t = 0.01)]
    pub noise: f64,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Args, Debug)]
pub struct InputArgs {
    /// Dataset CSV (`x1,...,xd[,w]`).
    #[arg(long)]
    pub input: PathBuf,
    /// Target dimension n of the measure.
    #[arg(long, default_value_t = 1)]
    pub n: usize,
    /// Override the finest trusted scale of the dataset.
    #[arg(long)]
    pub resolution: Option<f64>,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
pub enum FunctionalArg {
    DeltaDensity,
    DeltaSmooth,
    DeltaSmoothDt,
    DeltaSmoothK,
    DeltaSmoothDtK,
    Beta1,
    Beta2,
    Alpha,
    WcdDefect,
}

#[derive(Args, Debug)]
pub struct FunctionalArgs {
    #[arg(long, value_enum, default_value_t = FunctionalArg::DeltaDensity)]
    pub functional: FunctionalArg,
    /// `gauss:N=<int>`, `invpow:a=<real>` or `hard`.
    #[arg(long, default_value = "gauss:N=1")]
    pub kernel: String,
    /// Order of the k-th order variants (1..=3).
    #[arg(long, default_value_t = 1)]
    pub k: usize,
}

#[derive(Args, Debug)]
pub struct SamplingArgs {
    /// Centers used when the dataset is larger (probability-proportional-to-mass sample).
    #[arg(long, default_value_t = 5000)]
    pub centers: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

#[derive(Args, Debug)]
pub struct AnalyzeArgs {
    #[command(flatten)]
    pub input: InputArgs,
    #[command(flatten)]
    pub functional: FunctionalArgs,
    #[command(flatten)]
    pub sampling: SamplingArgs,
    /// Smallest scale; defaults to the resolution.
    #[arg(long)]
    pub r_min: Option<f64>,
    /// Largest scale; defaults to diam/4.
    #[arg(long)]
    pub r_max: Option<f64>,
    #[arg(long, default_value_t = 2.0)]
    pub ratio: f64,
    #[arg(long, default_value = "field.csv")]
    pub out: PathBuf,
    /// Summary JSON; defaults to the field path with a .json extension.
    #[arg(long)]
    pub summary: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct CarlesonArgs {
    #[command(flatten)]
    pub input: InputArgs,
    #[command(flatten)]
    pub functional: FunctionalArgs,
    #[command(flatten)]
    pub sampling: SamplingArgs,
    /// Smallest scale of the grid; defaults to the resolution.
    #[arg(long)]
    pub r_min: Option<f64>,
    #[arg(long, default_value_t = std::f64::consts::SQRT_2)]
    pub ratio: f64,
    /// Ball centers as point indices; defaults to the middle point.
    #[arg(long = "ball-center", value_delimiter = ',')]
    pub ball_centers: Vec<usize>,
    /// Ball radii; defaults to diam/4, diam/8, diam/16, diam/32.
    #[arg(long, value_delimiter = ',')]
    pub radii: Vec<f64>,
    /// Leave out cells flagged as near the edge of the data.
    #[arg(long)]
    pub exclude_flagged: bool,
    #[arg(long, default_value = "carleson.json")]
    pub out: PathBuf,
    /// Also write the underlying field CSV.
    #[arg(long)]
    pub field_out: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct AlphaAuditArgs {
    #[command(flatten)]
    pub input: InputArgs,
    /// Generations below the root cube to pack.
    #[arg(long, default_value_t = 3)]
    pub depth: u32,
    /// Deepest lattice generation; defaults to the root generation + depth.
    #[arg(long)]
    pub jmax: Option<u32>,
    /// Side of the generation-0 cube; defaults to the diameter.
    #[arg(long)]
    pub unit: Option<f64>,
    /// Root cube id; defaults to the top cube.
    #[arg(long, conflicts_with = "root_generation")]
    pub root: Option<usize>,
    /// Use the cube of this generation farthest from the edge of the data as root.
    #[arg(long)]
    pub root_generation: Option<u32>,
    /// Skip α and write only the lattice and its audit.
    #[arg(long)]
    pub no_packing: bool,
    #[arg(long, default_value = "lattice.json")]
    pub out: PathBuf,
}

#[derive(Args, Debug)]
pub struct WcdArgs {
    #[command(flatten)]
    pub input: InputArgs,
    /// Ball centers as point indices; defaults to the middle point.
    #[arg(long = "center", value_delimiter = ',')]
    pub centers: Vec<usize>,
    /// Ball radii; defaults to diam/4.
    #[arg(long = "radius", value_delimiter = ',')]
    pub radii: Vec<f64>,
    #[arg(long, default_value_t = 64)]
    pub samples: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value = "wcd.json")]
    pub out: PathBuf,
}

#[derive(Args, Debug)]
pub struct UniformityArgs {
    #[command(flatten)]
    pub input: InputArgs,
    /// Smooth kernels to check.
    #[arg(long = "kernel", value_delimiter = ',', default_values_t = ["gauss:N=1".to_string(), "invpow:a=2".to_string()])]
    pub kernels: Vec<String>,
    /// Number of centers.
    #[arg(long, default_value_t = 32)]
    pub centers: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Smallest t; defaults to 5·resolution.
    #[arg(long)]
    pub t_min: Option<f64>,
    /// Largest t; defaults to diam/4.
    #[arg(long)]
    pub t_max: Option<f64>,
    #[arg(long, default_value_t = 2.0)]
    pub ratio: f64,
    #[arg(long, default_value = "uniformity.json")]
    pub out: PathBuf,
}

#[derive(Args, Debug)]
pub struct WaveletArgs {
    /// Dimension of the balls (1 or 2).
    #[arg(long, default_value_t = 1)]
    pub n: usize,
    /// Cascade refinement depth.
    #[arg(long, default_value_t = 12)]
    pub depth: u32,
    /// Number of cubes whose coefficient must vanish.
    #[arg(long, default_value_t = 600)]
    pub zero_cubes: usize,
    #[arg(long, default_value_t = -4, allow_hyphen_values = true)]
    pub recon_lo: i32,
    #[arg(long, default_value_t = 10, allow_hyphen_values = true)]
    pub recon_hi: i32,
    #[arg(long)]
    pub no_reconstruction: bool,
    #[arg(long, default_value = "wavelet.json")]
    pub out: PathBuf,
    /// CSV of every coefficient used by the decay regressions.
    #[arg(long)]
    pub coeffs: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct ReportArgs {
    /// JSON files written by the other subcommands.
    #[arg(long, num_args = 1.., required = true)]
    pub inputs: Vec<PathBuf>,
    #[arg(long, default_value = "report.md")]
    pub out: PathBuf,
    #[arg(long, default_value = "report.csv")]
    pub csv: PathBuf,
}

/// Parses `args` (program name first), runs, and returns the exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    match run(cli) {
        Ok(paths) => {
            for p in paths {
                println!("wrote {}", p.display());
            }
            0
        }
        Err(e) => {
            eprintln!("rectiscan: {e}");
            e.exit_code()
        }
    }
}

pub fn run(cli: Cli) -> CliResult<Vec<PathBuf>> {
    let pool = parallel::thread_pool(cli.threads)?;
    let outputs = pool.install(|| match &cli.command {
        Command::Generate(a) => cmd_generate(a),
        Command::Analyze(a) => cmd_analyze(a),
        Command::Carleson(a) => cmd_carleson(a),
        Command::AlphaAudit(a) => cmd_alpha_audit(a),
        Command::Wcd(a) => cmd_wcd(a),
        Command::Uniformity(a) => cmd_uniformity(a),
        Command::WaveletCheck(a) => cmd_wavelet(a),
        Command::Report(a) => cmd_report(a),
    })?;
    outputs.commit()
}

fn config(msg: impl Into<String>) -> CliError {
    CliError::Config(msg.into())
}

fn cmd_generate(a: &GenerateArgs) -> CliResult<Outputs> {
    let kind = match a.kind {
        KindArg::Plane => GeneratorKind::Plane { side: a.side },
        KindArg::Segment => GeneratorKind::Segment { length: a.length },
        KindArg::Circle => GeneratorKind::Circle { radius: a.radius },
        KindArg::Graph => GeneratorKind::LipschitzGraph {
            amplitude: a.amplitude,
            frequency: a.frequency,
            profile: match a.profile {
                ProfileArg::Sine => GraphProfile::Sine,
                ProfileArg::AbsSine => GraphProfile::AbsSine,
            },
            length: a.length,
            small_constant: a.small_constant,
        },
        KindArg::Cantor => GeneratorKind::Cantor4 { generation: a.generation },
        KindArg::PerturbedPlane => GeneratorKind::PerturbedPlane { side: a.side, noise: a.noise },
        KindArg::AtomCloud => GeneratorKind::AtomCloud,
    };
    let spec = GeneratorSpec::new(kind, a.points, a.d.unwrap_or(a.n + 1), a.n).with_seed(a.seed);
    let measure = generate(&spec).or_config("generator")?;
    let mut out = Outputs::new();
    out.add(&a.out, dataset_csv(&measure));
    Ok(out)
}

fn load(input: &InputArgs) -> CliResult<DiscreteMeasure> {
    let m = read_dataset(&input.input, input.n)?;
    match input.resolution {
        Some(r) => m.with_resolution(r).or_config("--resolution"),
        None => Ok(m),
    }
}

fn dataset_info(input: &InputArgs, m: &DiscreteMeasure) -> DatasetInfo {
    DatasetInfo {
        path: input.input.display().to_string(),
        points: m.len(),
        d: m.ambient_dim(),
        n: m.target_dim(),
        resolution: m.resolution(),
        diameter: m.diameter(),
        total_mass: m.total_mass(),
    }
}

fn kernel(s: &str, n: usize) -> CliResult<KernelSpec> {
    KernelSpec::parse(s, n).map_err(|e| config(format!("kernel `{s}`: {e}")))
}

fn functional(a: &FunctionalArgs, n: usize) -> CliResult<Functional> {
    if !(1..=3).contains(&a.k) {
        return Err(config(format!("--k must be 1, 2 or 3, got {}", a.k)));
    }
    let needs_kernel = matches!(
        a.functional,
        FunctionalArg::DeltaSmooth | FunctionalArg::DeltaSmoothDt | FunctionalArg::DeltaSmoothK | FunctionalArg::DeltaSmoothDtK
    );
    let spec = if needs_kernel { Some(kernel(&a.kernel, n)?) } else { None };
    if let Some(s) = &spec {
        if !s.is_smooth() {
            return Err(config("smooth functionals need a gauss or invpow kernel"));
        }
    }
    Ok(match a.functional {
        FunctionalArg::DeltaDensity => Functional::DeltaDensity,
        FunctionalArg::DeltaSmooth => Functional::DeltaSmooth(spec.unwrap()),
        FunctionalArg::DeltaSmoothDt => Functional::DeltaSmoothDt(spec.unwrap()),
        FunctionalArg::DeltaSmoothK => Functional::DeltaSmoothK(spec.unwrap(), a.k),
        FunctionalArg::DeltaSmoothDtK => Functional::DeltaSmoothDtK(spec.unwrap(), a.k),
        FunctionalArg::Beta1 => Functional::Beta1,
        FunctionalArg::Beta2 => Functional::Beta2,
        FunctionalArg::Alpha => Functional::AlphaCoeff,
        FunctionalArg::WcdDefect => Functional::WcdDefect,
    })
}

/// Checks that a user scale lies in [resolution, diam].
fn check_scale(name: &str, r: f64, m: &DiscreteMeasure) -> CliResult<()> {
    let (lo, hi) = (m.resolution(), m.diameter().max(m.resolution()));
    if r.is_finite() && r >= lo * (1.0 - 1e-12) && r <= hi * (1.0 + 1e-12) {
        Ok(())
    } else {
        Err(config(format!("{name} = {r} is outside [resolution, diameter] = [{lo}, {hi}]")))
    }
}

fn grid(m: &DiscreteMeasure, lo: f64, hi: f64, ratio: f64) -> CliResult<ScaleGrid> {
    check_scale("smallest scale", lo, m)?;
    check_scale("largest scale", hi, m)?;
    if lo > hi {
        return Err(config(format!("smallest scale {lo} exceeds largest scale {hi}")));
    }
    ScaleGrid::new(m, lo, hi, ratio).or_config("scale grid")
}

fn check_index(i: usize, m: &DiscreteMeasure) -> CliResult<()> {
    if i < m.len() {
        Ok(())
    } else {
        Err(config(format!("point index {i} out of range (dataset has {} points)", m.len())))
    }
}

fn per_scale(field: &CoefficientField) -> Vec<ScaleStats> {
    let (nc, ns) = field.dims();
    (0..ns)
        .map(|sj| {
            let (mut sum, mut max, mut count, mut flagged) = (0.0, 0.0f64, 0usize, 0usize);
            for ci in 0..nc {
                let v = field.value(ci, sj);
                if v.is_finite() {
                    sum += v.abs();
                    max = max.max(v.abs());
                    count += 1;
                }
                flagged += usize::from(field.is_flagged(ci, sj));
            }
            ScaleStats {
                r: field.grid.scales[sj],
                mean_abs: if count > 0 { sum / count as f64 } else { f64::NAN },
                max_abs: max,
                flagged,
            }
        })
        .collect()
}

fn poisoned_rows(field: &CoefficientField) -> Vec<PoisonedRow> {
    field
        .poisoned
        .iter()
        .map(|p| PoisonedRow {
            center_index: field.centers.indices[p.center],
            r: field.grid.scales[p.scale],
            message: p.message.clone(),
        })
        .collect()
}

fn cmd_analyze(a: &AnalyzeArgs) -> CliResult<Outputs> {
    let m = load(&a.input)?;
    let f = functional(&a.functional, m.target_dim())?;
    let lo = a.r_min.unwrap_or(m.resolution());
    let hi = a.r_max.unwrap_or(m.diameter() / 4.0).max(lo);
    let g = grid(&m, lo, hi, a.ratio)?;
    let index = m.build_index();
    let centers = sample_centers(&m, a.sampling.centers, a.sampling.seed);
    let field = parallel::coefficient_field(&m, &index, f, centers, g).map_err(|e| from_core("field", e))?;
    let summary_path = a.summary.clone().unwrap_or_else(|| a.out.with_extension("json"));
    let doc = FieldSummary {
        schema_version: SCHEMA_VERSION,
        kind: "field".into(),
        dataset: dataset_info(&a.input, &m),
        functional: field.functional.name(),
        centers: field.centers.len(),
        seed: a.sampling.seed,
        grid_ratio: field.grid.ratio,
        field_csv: a.out.display().to_string(),
        per_scale: per_scale(&field),
        poisoned: poisoned_rows(&field),
    };
    let mut out = Outputs::new();
    out.add(&a.out, field_csv(&field));
    out.add(summary_path, json_bytes(&doc));
    Ok(out)
}

fn cmd_carleson(a: &CarlesonArgs) -> CliResult<Outputs> {
    let m = load(&a.input)?;
    let f = functional(&a.functional, m.target_dim())?;
    let centers = if a.ball_centers.is_empty() { vec![m.len() / 2] } else { a.ball_centers.clone() };
    for &c in &centers {
        check_index(c, &m)?;
    }
    let lo = a.r_min.unwrap_or(m.resolution());
    let radii = if a.radii.is_empty() {
        let d = m.diameter();
        [4.0, 8.0, 16.0, 32.0].iter().map(|k| d / k).filter(|&r| r >= lo).collect()
    } else {
        a.radii.clone()
    };
    if radii.is_empty() {
        return Err(config("no ball radius at or above the smallest scale"));
    }
    for &r in &radii {
        check_scale("ball radius", r, &m)?;
        if r < lo {
            return Err(config(format!("ball radius {r} is below the smallest scale {lo}")));
        }
    }
    let hi = radii.iter().cloned().fold(0.0, f64::max);
    let g = grid(&m, lo, hi, a.ratio)?;
    let index = m.build_index();
    let sample = sample_centers(&m, a.sampling.centers, a.sampling.seed);
    let field = parallel::coefficient_field(&m, &index, f, sample, g).map_err(|e| from_core("field", e))?;
    let mut balls = Vec::new();
    let mut ball_index = Vec::new();
    for &c in &centers {
        for &r in &radii {
            balls.push(Ball { center: m.point(c).to_vec(), radius: r });
            ball_index.push(c);
        }
    }
    let rep = carleson_norm(&field, &m, &balls, CarlesonOptions { exclude_flagged: a.exclude_flagged })
        .map_err(|e| from_core("carleson", e))?;
    // records keep ball order but skip empty balls; match them back by position
    let mut rows = Vec::new();
    let mut k = 0;
    for rec in &rep.records {
        while balls[k].radius != rec.radius || balls[k].center != rec.center {
            k += 1;
        }
        rows.push(BallRow {
            center_index: ball_index[k],
            center: rec.center.clone(),
            radius: rec.radius,
            value: rec.value,
            centers_used: rec.centers_used,
            scales_used: rec.scales_used,
            log_scale_span: rec.log_scale_span,
        });
        k += 1;
    }
    let doc = CarlesonDoc {
        schema_version: SCHEMA_VERSION,
        kind: "carleson".into(),
        dataset: dataset_info(&a.input, &m),
        functional: rep.functional.clone(),
        exclude_flagged: a.exclude_flagged,
        centers: field.centers.len(),
        seed: a.sampling.seed,
        grid_ratio: field.grid.ratio,
        r_min: rep.r_min,
        balls: rows,
        sup: rep.sup,
        slope: rep.slope,
        intercept: rep.intercept,
        correlation: rep.correlation,
        poisoned: field.poisoned.len(),
        warnings: rep.warnings.clone(),
    };
    let mut out = Outputs::new();
    out.add(&a.out, json_bytes(&doc));
    if let Some(p) = &a.field_out {
        out.add(p, field_csv(&field));
    }
    Ok(out)
}

fn cmd_alpha_audit(a: &AlphaAuditArgs) -> CliResult<Outputs> {
    let m = load(&a.input)?;
    let jmax = a.jmax.unwrap_or(a.root_generation.unwrap_or(0) + a.depth);
    let lattice = build_lattice(&m, jmax, a.unit).or_config("lattice")?;
    let root = match (a.root, a.root_generation) {
        (Some(id), _) => id,
        (None, Some(g)) => interior_cube(&lattice, &m, g).or_config("--root-generation")?,
        (None, None) => lattice.root().id,
    };
    if root >= lattice.cubes.len() {
        return Err(config(format!("root cube {root} does not exist ({} cubes)", lattice.cubes.len())));
    }
    let audit = lattice_audit(&lattice, &m, DEFAULT_BAND);
    let packing = if a.no_packing {
        None
    } else {
        let index = m.build_index();
        let p = parallel::alpha_packing_audit(&m, &index, &lattice, root, a.depth, &AlphaConfig::default())
            .map_err(|e| from_core("alpha", e))?;
        Some(PackingDoc {
            root: p.root,
            depths: p.depths.clone(),
            ratio_by_depth: p.ratio_by_depth.clone(),
            ratio: p.ratio(),
            slope: p.slope(),
            alphas: p.alphas.iter().map(|&(cube, alpha)| AlphaRow { cube, alpha }).collect(),
        })
    };
    let doc = LatticeDoc {
        schema_version: SCHEMA_VERSION,
        kind: "alpha-audit".into(),
        dataset: dataset_info(&a.input, &m),
        unit: lattice.unit,
        jmax: lattice.jmax,
        band: audit.band,
        cubes: lattice
            .cubes
            .iter()
            .map(|q| CubeRow {
                id: q.id,
                generation: q.generation,
                parent: q.parent,
                children: q.children.clone(),
                center_index: q.center,
                center: m.point(q.center).to_vec(),
                side: q.side,
                mass: q.mass,
                members: q.members.len(),
            })
            .collect(),
        audit: audit
            .generations
            .iter()
            .map(|g| GenerationRow {
                generation: g.generation,
                cubes: g.cubes,
                min_mass_ratio: g.min_mass_ratio,
                max_mass_ratio: g.max_mass_ratio,
                min_diam_ratio: g.min_diam_ratio,
                max_diam_ratio: g.max_diam_ratio,
                flagged: g.flagged,
            })
            .collect(),
        packing,
    };
    let mut out = Outputs::new();
    out.add(&a.out, json_bytes(&doc));
    Ok(out)
}

fn cmd_wcd(a: &WcdArgs) -> CliResult<Outputs> {
    let m = load(&a.input)?;
    let centers = if a.centers.is_empty() { vec![m.len() / 2] } else { a.centers.clone() };
    for &c in &centers {
        check_index(c, &m)?;
    }
    let radii = if a.radii.is_empty() { vec![m.diameter() / 4.0] } else { a.radii.clone() };
    for &r in &radii {
        check_scale("radius", r, &m)?;
    }
    if a.samples == 0 {
        return Err(config("--samples must be at least 1"));
    }
    let cfg = WcdConfig { samples: a.samples, seed: a.seed, ..WcdConfig::default() };
    let index = m.build_index();
    let pairs: Vec<(usize, f64)> = centers.iter().flat_map(|&c| radii.iter().map(move |&r| (c, r))).collect();
    let balls = pairs
        .par_iter()
        .map(|&(c, r)| {
            wcd_defect(&m, &index, m.point(c), r, &cfg).map(|w| WcdRow {
                center_index: c,
                center: w.center,
                radius: w.radius,
                c1: w.c1,
                defect: w.defect,
                sampled_centers: w.centers,
                scales: w.scales,
            })
        })
        .collect::<rectiscan_core::Result<Vec<_>>>()
        .map_err(|e| from_core("wcd", e))?;
    let doc = WcdDoc {
        schema_version: SCHEMA_VERSION,
        kind: "wcd".into(),
        dataset: dataset_info(&a.input, &m),
        samples: a.samples,
        seed: a.seed,
        balls,
    };
    let mut out = Outputs::new();
    out.add(&a.out, json_bytes(&doc));
    Ok(out)
}

fn cmd_uniformity(a: &UniformityArgs) -> CliResult<Outputs> {
    let m = load(&a.input)?;
    let specs = a.kernels.iter().map(|k| kernel(k, m.target_dim())).collect::<CliResult<Vec<_>>>()?;
    if a.centers == 0 {
        return Err(config("--centers must be at least 1"));
    }
    let lo = a.t_min.unwrap_or(5.0 * m.resolution());
    let hi = a.t_max.unwrap_or(m.diameter() / 4.0);
    let g = grid(&m, lo, hi, a.ratio)?;
    let centers = sample_centers(&m, a.centers, a.seed).indices;
    let index = m.build_index();
    let kernels = specs
        .par_iter()
        .zip(&a.kernels)
        .map(|(spec, name)| {
            uniformity_identity_check(&m, &index, spec, &centers, &g.scales).map(|rep| IdentityRow {
                kernel: name.clone(),
                c: rep.c,
                variation: rep.variation,
                skipped: rep.skipped,
                warnings: rep.warnings,
                values: rep
                    .values
                    .into_iter()
                    .map(|(center_index, t, value)| IdentityValue { center_index, t, value })
                    .collect(),
            })
        })
        .collect::<rectiscan_core::Result<Vec<_>>>()
        .map_err(|e| from_core("uniformity", e))?;
    let doc = UniformityDoc {
        schema_version: SCHEMA_VERSION,
        kind: "uniformity".into(),
        dataset: dataset_info(&a.input, &m),
        seed: a.seed,
        scales: g.scales.clone(),
        kernels,
    };
    let mut out = Outputs::new();
    out.add(&a.out, json_bytes(&doc));
    Ok(out)
}

/// Points away from the spheres |x| = 1 and |x| = 2.
pub fn reconstruction_samples(n: usize) -> Vec<Vec<f64>> {
    if n == 1 {
        [-3.0, -1.5, -0.7, 0.0, 0.4, 1.5, 1.8, 3.0].iter().map(|&x| vec![x]).collect()
    } else {
        [[0.0, 0.0], [0.3, -0.5], [1.0, 1.0], [-1.2, 0.9], [3.0, 0.5], [0.0, -2.6]]
            .iter()
            .map(|p| p.to_vec())
            .collect()
    }
}

/// Levels for the large-cube (ℓ = 2^1..2^6) and small-cube (ℓ = 2^-8..2^-3)
/// decay regressions.
pub const LARGE_LEVELS: [i32; 6] = [-1, -2, -3, -4, -5, -6];
pub const SMALL_LEVELS: [i32; 6] = [3, 4, 5, 6, 7, 8];
pub const SLOPE_TOLERANCE: f64 = 0.3;
pub const ZERO_TOLERANCE: f64 = 1e-12;
pub const RECONSTRUCTION_TOLERANCE: f64 = 0.02;

fn coeff_csv(coeffs: &[WaveletCoeff]) -> Vec<u8> {
    let mut out = String::from("scale,offset,orientation,a_I\n");
    for c in coeffs {
        let offset: Vec<String> = c.cube.offset.iter().map(|k| k.to_string()).collect();
        out.push_str(&format!(
            "{},{},{},{}\n",
            fmt_f64(c.cube.side()),
            offset.join(" "),
            c.cube.orientation,
            fmt_f64(c.value)
        ));
    }
    out.into_bytes()
}

fn cmd_wavelet(a: &WaveletArgs) -> CliResult<Outputs> {
    if !(1..=2).contains(&a.n) {
        return Err(config(format!("--n must be 1 or 2, got {}", a.n)));
    }
    if !(4..=16).contains(&a.depth) {
        return Err(config(format!("--depth must be in 4..=16, got {}", a.depth)));
    }
    let family = cascade_tables(3, a.depth).or_config("cascade")?;
    let n = a.n;
    let zeros = parallel::h_coefficients(&family, &zero_cubes(n, a.zero_cubes)).map_err(|e| from_core("wavelet", e))?;
    let max_abs = zeros.iter().fold(0.0f64, |m, c| m.max(c.value.abs()));
    let zero_check = ZeroCheck { cubes: zeros.len(), max_abs, passed: zeros.len() >= a.zero_cubes && max_abs <= ZERO_TOLERANCE };
    let mut slopes = Vec::new();
    let mut all = Vec::new();
    for (name, levels, expected) in [
        ("large-cubes", &LARGE_LEVELS, -1.0 - n as f64 / 2.0),
        ("small-cubes", &SMALL_LEVELS, n as f64 / 2.0),
    ] {
        let (fit, coeffs) =
            parallel::decay_regression(&family, n, levels, expected).map_err(|e| from_core("wavelet", e))?;
        slopes.push(SlopeCheck {
            name: name.into(),
            levels: levels.to_vec(),
            sides: fit.sides,
            maxima: fit.maxima,
            slope: fit.slope,
            expected,
            tolerance: SLOPE_TOLERANCE,
            passed: (fit.slope - expected).abs() <= SLOPE_TOLERANCE,
        });
        all.extend(coeffs);
    }
    let reconstruction = if a.no_reconstruction {
        None
    } else {
        if a.recon_lo > a.recon_hi {
            return Err(config("--recon-lo exceeds --recon-hi"));
        }
        let samples = reconstruction_samples(n);
        let rep = reconstruction_check(&family, a.recon_lo, a.recon_hi, &samples).map_err(|e| from_core("wavelet", e))?;
        Some(ReconstructionDoc {
            lo_level: a.recon_lo,
            hi_level: a.recon_hi,
            samples: samples.len(),
            coefficients: rep.coefficients,
            max_error: rep.max_error,
            tolerance: RECONSTRUCTION_TOLERANCE,
            passed: rep.max_error <= RECONSTRUCTION_TOLERANCE,
        })
    };
    let doc = WaveletDoc {
        schema_version: SCHEMA_VERSION,
        kind: "wavelet-check".into(),
        n,
        depth: a.depth,
        zero_check,
        slopes,
        reconstruction,
        coefficients_csv: a.coeffs.as_ref().map(|p| p.display().to_string()),
    };
    let mut out = Outputs::new();
    out.add(&a.out, json_bytes(&doc));
    if let Some(p) = &a.coeffs {
        out.add(p, coeff_csv(&all));
    }
    Ok(out)
}

fn cmd_report(a: &ReportArgs) -> CliResult<Outputs> {
    let mut docs = Vec::new();
    for path in &a.inputs {
        crate::io::require_file(path)?;
        let text = std::fs::read_to_string(path).or_data(&path.display().to_string())?;
        let value: serde_json::Value = serde_json::from_str(&text).or_data(&path.display().to_string())?;
        docs.push((display_name(path), value));
    }
    let (markdown, csv) = report::render(&docs)?;
    let mut out = Outputs::new();
    out.add(&a.out, markdown.into_bytes());
    out.add(&a.csv, csv.into_bytes());
    Ok(out)
}

fn display_name(p: &Path) -> String {
    p.display().to_string()
}

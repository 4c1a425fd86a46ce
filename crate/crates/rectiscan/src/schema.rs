//! JSON documents written by the subcommands. Every document starts with
//! `schema_version` and `kind`.

use serde::{Deserialize, Serialize};

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct DatasetInfo {
    pub path: String,
    pub points: usize,
    pub d: usize,
    pub n: usize,
    pub resolution: f64,
    pub diameter: f64,
    pub total_mass: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct ScaleStats {
    pub r: f64,
    pub mean_abs: f64,
    pub max_abs: f64,
    pub flagged: usize,
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct PoisonedRow {
    pub center_index: usize,
    pub r: f64,
    pub message: String,
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct FieldSummary {
    pub schema_version: u32,
    pub kind: String,
    pub dataset: DatasetInfo,
    pub functional: String,
    pub centers: usize,
    pub seed: u64,
    pub grid_ratio: f64,
    pub field_csv: String,
    pub per_scale: Vec<ScaleStats>,
    pub poisoned: Vec<PoisonedRow>,
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct BallRow {
    pub center_index: usize,
    pub center: Vec<f64>,
    pub radius: f64,
    pub value: f64,
    pub centers_used: usize,
    pub scales_used: usize,
    pub log_scale_span: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct CarlesonDoc {
    pub schema_version: u32,
    pub kind: String,
    pub dataset: DatasetInfo,
    pub functional: String,
    pub exclude_flagged: bool,
    pub centers: usize,
    pub seed: u64,
    pub grid_ratio: f64,
    pub r_min: f64,
    pub balls: Vec<BallRow>,
    pub sup: f64,
    pub slope: f64,
    pub intercept: f64,
    pub correlation: f64,
    pub poisoned: usize,
    pub warnings: Vec<String>,
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct CubeRow {
    pub id: usize,
    pub generation: u32,
    pub parent: Option<usize>,
    pub children: Vec<usize>,
    pub center_index: usize,
    pub center: Vec<f64>,
    pub side: f64,
    pub mass: f64,
    pub members: usize,
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct GenerationRow {
    pub generation: u32,
    pub cubes: usize,
    pub min_mass_ratio: f64,
    pub max_mass_ratio: f64,
    pub min_diam_ratio: f64,
    pub max_diam_ratio: f64,
    pub flagged: bool,
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct AlphaRow {
    pub cube: usize,
    pub alpha: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct PackingDoc {
    pub root: usize,
    pub depths: Vec<u32>,
    pub ratio_by_depth: Vec<f64>,
    pub ratio: f64,
    pub slope: f64,
    pub alphas: Vec<AlphaRow>,
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct LatticeDoc {
    pub schema_version: u32,
    pub kind: String,
    pub dataset: DatasetInfo,
    pub unit: f64,
    pub jmax: u32,
    pub band: (f64, f64),
    pub cubes: Vec<CubeRow>,
    pub audit: Vec<GenerationRow>,
    pub packing: Option<PackingDoc>,
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct WcdRow {
    pub center_index: usize,
    pub center: Vec<f64>,
    pub radius: f64,
    pub c1: f64,
    pub defect: f64,
    pub sampled_centers: Vec<usize>,
    pub scales: Vec<f64>,
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct WcdDoc {
    pub schema_version: u32,
    pub kind: String,
    pub dataset: DatasetInfo,
    pub samples: usize,
    pub seed: u64,
    pub balls: Vec<WcdRow>,
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct IdentityValue {
    pub center_index: usize,
    pub t: f64,
    pub value: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct IdentityRow {
    pub kernel: String,
    pub c: f64,
    pub variation: f64,
    pub skipped: usize,
    pub warnings: Vec<String>,
    pub values: Vec<IdentityValue>,
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct UniformityDoc {
    pub schema_version: u32,
    pub kind: String,
    pub dataset: DatasetInfo,
    pub seed: u64,
    pub scales: Vec<f64>,
    pub kernels: Vec<IdentityRow>,
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct ZeroCheck {
    pub cubes: usize,
    pub max_abs: f64,
    pub passed: bool,
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct SlopeCheck {
    pub name: String,
    pub levels: Vec<i32>,
    pub sides: Vec<f64>,
    pub maxima: Vec<f64>,
    pub slope: f64,
    pub expected: f64,
    pub tolerance: f64,
    pub passed: bool,
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct ReconstructionDoc {
    pub lo_level: i32,
    pub hi_level: i32,
    pub samples: usize,
    pub coefficients: usize,
    pub max_error: f64,
    pub tolerance: f64,
    pub passed: bool,
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct WaveletDoc {
    pub schema_version: u32,
    pub kind: String,
    pub n: usize,
    pub depth: u32,
    pub zero_check: ZeroCheck,
    pub slopes: Vec<SlopeCheck>,
    pub reconstruction: Option<ReconstructionDoc>,
    pub coefficients_csv: Option<String>,
}

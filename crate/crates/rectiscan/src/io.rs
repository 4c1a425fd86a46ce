//! Dataset and field CSV files, and all-or-nothing output writing.

use std::fs;
use std::path::{Path, PathBuf};

use rectiscan_core::square::CoefficientField;
use rectiscan_core::DiscreteMeasure;

use crate::error::{from_core, Classify, CliError, CliResult};

/// Shortest decimal that parses back to the same f64.
pub fn fmt_f64(v: f64) -> String {
    format!("{v:?}")
}

pub fn require_file(path: &Path) -> CliResult<()> {
    if path.is_file() {
        Ok(())
    } else {
        Err(CliError::Config(format!("input file {} does not exist", path.display())))
    }
}

/// Reads a `x1,...,xd[,w]` CSV. Without a `w` column every point gets the
/// same weight and the total mass is diam^n (1 for a single point).
pub fn read_dataset(path: &Path, n: usize) -> CliResult<DiscreteMeasure> {
    require_file(path)?;
    let ctx = format!("{}", path.display());
    let mut reader = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_path(path)
        .or_data(&ctx)?;
    let headers = reader.headers().or_data(&ctx)?.clone();
    let names: Vec<&str> = headers.iter().collect();
    let weighted = names.last() == Some(&"w");
    let d = names.len() - usize::from(weighted);
    if d == 0 || names[..d].iter().enumerate().any(|(k, h)| *h != format!("x{}", k + 1)) {
        return Err(CliError::Data(format!("{ctx}: header must be x1,...,xd with an optional trailing w")));
    }
    if n == 0 || n >= d {
        return Err(CliError::Config(format!("target dimension n = {n} must satisfy 0 < n < d = {d}")));
    }
    let mut coords = Vec::new();
    let mut weights = Vec::new();
    for (row, record) in reader.records().enumerate() {
        let record = record.or_data(&ctx)?;
        let line = row + 2;
        if record.len() != names.len() {
            return Err(CliError::Data(format!("{ctx}:{line}: expected {} fields, found {}", names.len(), record.len())));
        }
        for (k, field) in record.iter().enumerate() {
            let v: f64 = field
                .parse()
                .map_err(|_| CliError::Data(format!("{ctx}:{line}: `{field}` is not a number")))?;
            if !v.is_finite() {
                return Err(CliError::Data(format!("{ctx}:{line}: non-finite value `{field}`")));
            }
            if k < d {
                coords.push(v);
            } else {
                weights.push(v);
            }
        }
    }
    if coords.is_empty() {
        return Err(CliError::Data(format!("{ctx}: no points")));
    }
    let count = coords.len() / d;
    if weighted {
        return DiscreteMeasure::new(coords, weights, d, n).map_err(|e| from_core(&ctx, e));
    }
    let unit = DiscreteMeasure::new(coords, vec![1.0; count], d, n).map_err(|e| from_core(&ctx, e))?;
    let diam = unit.diameter();
    let total = if diam > 0.0 { diam.powi(n as i32) } else { 1.0 };
    unit.scale_weights(total / count as f64).map_err(|e| from_core(&ctx, e))
}

pub fn dataset_csv(measure: &DiscreteMeasure) -> Vec<u8> {
    let d = measure.ambient_dim();
    let mut out = String::new();
    let header: Vec<String> = (1..=d).map(|k| format!("x{k}")).collect();
    out.push_str(&header.join(","));
    out.push_str(",w\n");
    for (i, p) in measure.points().enumerate() {
        for v in p {
            out.push_str(&fmt_f64(*v));
            out.push(',');
        }
        out.push_str(&fmt_f64(measure.weight(i)));
        out.push('\n');
    }
    out.into_bytes()
}

/// `center_index,r,value` rows, center-major; failed cells are `NaN`.
pub fn field_csv(field: &CoefficientField) -> Vec<u8> {
    let mut out = String::from("center_index,r,value\n");
    let (nc, ns) = field.dims();
    for ci in 0..nc {
        for sj in 0..ns {
            out.push_str(&format!(
                "{},{},{}\n",
                field.centers.indices[ci],
                fmt_f64(field.grid.scales[sj]),
                fmt_f64(field.value(ci, sj))
            ));
        }
    }
    out.into_bytes()
}

pub fn json_bytes<T: serde::Serialize>(value: &T) -> Vec<u8> {
    let mut bytes = serde_json::to_vec_pretty(value).expect("report types serialize");
    bytes.push(b'\n');
    bytes
}

/// Files produced by one run. Nothing touches the disk until `commit`,
/// which writes temporaries and renames them; on any failure the files
/// written so far are removed.
#[derive(Default)]
pub struct Outputs {
    files: Vec<(PathBuf, Vec<u8>)>,
}

impl Outputs {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add(&mut self, path: impl Into<PathBuf>, bytes: Vec<u8>) {
        self.files.push((path.into(), bytes));
    }

    pub fn paths(&self) -> Vec<&Path> {
        self.files.iter().map(|(p, _)| p.as_path()).collect()
    }

    /// Fails with a config error when an output directory does not exist.
    pub fn check_dirs(&self) -> CliResult<()> {
        for (path, _) in &self.files {
            let dir = parent_dir(path);
            if !dir.is_dir() {
                return Err(CliError::Config(format!("output directory {} does not exist", dir.display())));
            }
        }
        Ok(())
    }

    pub fn commit(self) -> CliResult<Vec<PathBuf>> {
        self.check_dirs()?;
        let mut temps: Vec<PathBuf> = Vec::new();
        let mut done: Vec<PathBuf> = Vec::new();
        let result = (|| {
            for (path, bytes) in &self.files {
                let tmp = temp_path(path);
                temps.push(tmp.clone());
                fs::write(&tmp, bytes).or_data(&format!("writing {}", path.display()))?;
            }
            for ((path, _), tmp) in self.files.iter().zip(&temps) {
                fs::rename(tmp, path).or_data(&format!("writing {}", path.display()))?;
                done.push(path.clone());
            }
            Ok(())
        })();
        match result {
            Ok(()) => Ok(done),
            Err(e) => {
                for p in temps.iter().chain(&done) {
                    let _ = fs::remove_file(p);
                }
                Err(e)
            }
        }
    }
}

fn parent_dir(path: &Path) -> &Path {
    match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    }
}

fn temp_path(path: &Path) -> PathBuf {
    let name = path.file_name().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
    parent_dir(path).join(format!(".{name}.partial"))
}

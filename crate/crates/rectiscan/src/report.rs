//! Markdown summary and long-format CSV (`source,kind,series,x,y`) built
//! from the JSON documents of the other subcommands.

use std::fmt::Write;

use serde::de::DeserializeOwned;
use serde_json::Value;

use crate::error::{CliError, CliResult};
use crate::io::fmt_f64;
use crate::schema::*;

struct Sink {
    md: String,
    csv: String,
}

impl Sink {
    fn row(&mut self, source: &str, kind: &str, series: &str, x: f64, y: f64) {
        let _ = writeln!(self.csv, "{},{},{},{},{}", csv_field(source), kind, csv_field(series), fmt_f64(x), fmt_f64(y));
    }
}

fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

fn parse<T: DeserializeOwned>(source: &str, v: &Value) -> CliResult<T> {
    serde_json::from_value(v.clone()).map_err(|e| CliError::Data(format!("{source}: {e}")))
}

fn g(v: f64) -> String {
    format!("{v:.6e}")
}

/// Renders the documents in the given order.
pub fn render(docs: &[(String, Value)]) -> CliResult<(String, String)> {
    let mut s = Sink { md: String::from("# rectiscan report\n"), csv: String::from("source,kind,series,x,y\n") };
    for (source, v) in docs {
        let version = v.get("schema_version").and_then(Value::as_u64);
        if version != Some(SCHEMA_VERSION as u64) {
            return Err(CliError::Data(format!("{source}: unsupported schema_version {version:?}")));
        }
        let kind = v.get("kind").and_then(Value::as_str).unwrap_or("");
        let _ = write!(s.md, "\n## {source} ({kind})\n\n");
        match kind {
            "field" => field(&mut s, source, &parse(source, v)?),
            "carleson" => carleson(&mut s, source, &parse(source, v)?),
            "alpha-audit" => lattice(&mut s, source, &parse(source, v)?),
            "wcd" => wcd(&mut s, source, &parse(source, v)?),
            "uniformity" => uniformity(&mut s, source, &parse(source, v)?),
            "wavelet-check" => wavelet(&mut s, source, &parse(source, v)?),
            other => return Err(CliError::Data(format!("{source}: unknown document kind `{other}`"))),
        }
    }
    Ok((s.md, s.csv))
}

fn dataset_line(s: &mut Sink, d: &DatasetInfo) {
    let _ = writeln!(
        s.md,
        "Dataset `{}`: {} points, d = {}, n = {}, resolution {}, diameter {}.\n",
        d.path,
        d.points,
        d.d,
        d.n,
        g(d.resolution),
        g(d.diameter)
    );
}

fn field(s: &mut Sink, src: &str, doc: &FieldSummary) {
    dataset_line(s, &doc.dataset);
    let _ = writeln!(s.md, "Functional `{}` on {} centers; {} failed cells.\n", doc.functional, doc.centers, doc.poisoned.len());
    s.md.push_str("| r | mean abs | max abs | near edge |\n|---|---|---|---|\n");
    for st in &doc.per_scale {
        let _ = writeln!(s.md, "| {} | {} | {} | {} |", g(st.r), g(st.mean_abs), g(st.max_abs), st.flagged);
        s.row(src, "field", "mean_abs", st.r, st.mean_abs);
        s.row(src, "field", "max_abs", st.r, st.max_abs);
    }
}

fn carleson(s: &mut Sink, src: &str, doc: &CarlesonDoc) {
    dataset_line(s, &doc.dataset);
    let _ = writeln!(
        s.md,
        "Functional `{}`: sup V = {}, slope {} per octave, correlation {:.4}.\n",
        doc.functional,
        g(doc.sup),
        g(doc.slope),
        doc.correlation
    );
    s.md.push_str("| center | R | log2(R/r_min) | V | centers |\n|---|---|---|---|---|\n");
    for b in &doc.balls {
        let _ = writeln!(
            s.md,
            "| {} | {} | {:.3} | {} | {} |",
            b.center_index,
            g(b.radius),
            b.log_scale_span,
            g(b.value),
            b.centers_used
        );
        s.row(src, "carleson", &format!("V@{}", b.center_index), b.log_scale_span, b.value);
    }
    for w in &doc.warnings {
        let _ = writeln!(s.md, "\nwarning: {w}");
    }
}

fn lattice(s: &mut Sink, src: &str, doc: &LatticeDoc) {
    dataset_line(s, &doc.dataset);
    let _ = writeln!(s.md, "{} cubes down to generation {}, unit {}.\n", doc.cubes.len(), doc.jmax, g(doc.unit));
    s.md.push_str("| generation | cubes | mass ratio min | mass ratio max | diam ratio max | out of band |\n|---|---|---|---|---|---|\n");
    for a in &doc.audit {
        let _ = writeln!(
            s.md,
            "| {} | {} | {} | {} | {} | {} |",
            a.generation,
            a.cubes,
            g(a.min_mass_ratio),
            g(a.max_mass_ratio),
            g(a.max_diam_ratio),
            a.flagged
        );
        s.row(src, "alpha-audit", "mass_ratio_min", a.generation as f64, a.min_mass_ratio);
        s.row(src, "alpha-audit", "mass_ratio_max", a.generation as f64, a.max_mass_ratio);
    }
    if let Some(p) = &doc.packing {
        let _ = writeln!(s.md, "\nPacking below cube {}: ratio {}, slope {} per generation.\n", p.root, g(p.ratio), g(p.slope));
        s.md.push_str("| depth | packing ratio |\n|---|---|\n");
        for (d, r) in p.depths.iter().zip(&p.ratio_by_depth) {
            let _ = writeln!(s.md, "| {d} | {} |", g(*r));
            s.row(src, "alpha-audit", "packing", *d as f64, *r);
        }
    }
}

fn wcd(s: &mut Sink, src: &str, doc: &WcdDoc) {
    dataset_line(s, &doc.dataset);
    s.md.push_str("| center | r | c1 | defect |\n|---|---|---|---|\n");
    for b in &doc.balls {
        let _ = writeln!(s.md, "| {} | {} | {} | {} |", b.center_index, g(b.radius), g(b.c1), g(b.defect));
        s.row(src, "wcd", &format!("defect@{}", b.center_index), b.radius, b.defect);
    }
}

fn uniformity(s: &mut Sink, src: &str, doc: &UniformityDoc) {
    dataset_line(s, &doc.dataset);
    s.md.push_str("| kernel | c | variation | skipped |\n|---|---|---|---|\n");
    for k in &doc.kernels {
        let _ = writeln!(s.md, "| {} | {} | {} | {} |", k.kernel, g(k.c), g(k.variation), k.skipped);
        for v in &k.values {
            s.row(src, "uniformity", &k.kernel, v.t, v.value);
        }
    }
}

fn wavelet(s: &mut Sink, src: &str, doc: &WaveletDoc) {
    let z = &doc.zero_check;
    let _ = writeln!(
        s.md,
        "n = {}, cascade depth {}. Vanishing coefficients: {} cubes, max |a_I| = {} ({}).\n",
        doc.n,
        doc.depth,
        z.cubes,
        g(z.max_abs),
        if z.passed { "pass" } else { "fail" }
    );
    s.md.push_str("| regression | slope | expected | result |\n|---|---|---|---|\n");
    for c in &doc.slopes {
        let _ = writeln!(
            s.md,
            "| {} | {:.4} | {} ± {} | {} |",
            c.name,
            c.slope,
            c.expected,
            c.tolerance,
            if c.passed { "pass" } else { "fail" }
        );
        for (side, max) in c.sides.iter().zip(&c.maxima) {
            s.row(src, "wavelet-check", &c.name, side.log2(), max.max(f64::MIN_POSITIVE).log2());
        }
    }
    if let Some(r) = &doc.reconstruction {
        let _ = writeln!(
            s.md,
            "\nReconstruction over levels {}..={}: max error {} at {} points ({}).",
            r.lo_level,
            r.hi_level,
            g(r.max_error),
            r.samples,
            if r.passed { "pass" } else { "fail" }
        );
    }
}

//! File formats: instance and factor files (JSON), run metadata (JSON), and
//! trace, verification and benchmark tables (CSV).
//!
//! Numbers are written as shortest round-trip decimals, so reading a file
//! written here and writing it again reproduces it byte for byte.

use std::fmt::Write as _;
use std::io::Write;
use std::path::Path;

use num_complex::Complex;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gears::{FactorPair, GearsResult};
use crate::linalg::ComplexMatrix;
use crate::matpoly::MatrixPolynomial;
use crate::scalar::{Field, Real};
use crate::verify::VerifyReport;

pub const SCHEMA_VERSION: &str = "1";

#[derive(Debug, Clone, Deserialize)]
#[serde(untagged)]
enum Entry {
    Real(f64),
    Complex([f64; 2]),
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawInstance {
    schema_version: String,
    m: usize,
    n: usize,
    grade: usize,
    field: Field,
    coefficients: Vec<Vec<Vec<Entry>>>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawFactors {
    schema_version: String,
    m: usize,
    r: usize,
    grade: usize,
    field: Field,
    u: Vec<Vec<Vec<Entry>>>,
    v: Vec<Vec<Vec<Entry>>>,
}

fn number(x: f64) -> String {
    // Negative zero prints as 0.0.
    let x = if x == 0.0 { 0.0 } else { x };
    serde_json::to_string(&x).expect("finite numbers serialize")
}

fn write_matrix<T: Real>(out: &mut String, a: &ComplexMatrix<T>, field: Field, indent: &str) {
    out.push_str("[\n");
    for i in 0..a.rows() {
        out.push_str(indent);
        out.push_str("  [");
        for j in 0..a.cols() {
            if j > 0 {
                out.push_str(", ");
            }
            let z = a[(i, j)];
            let (re, im) = (z.re.to_f64().unwrap_or(f64::NAN), z.im.to_f64().unwrap_or(f64::NAN));
            match field {
                Field::Real => out.push_str(&number(re)),
                Field::Complex => {
                    let _ = write!(out, "[{}, {}]", number(re), number(im));
                }
            }
        }
        out.push(']');
        if i + 1 < a.rows() {
            out.push(',');
        }
        out.push('\n');
    }
    out.push_str(indent);
    out.push(']');
}

fn write_coeff_list<T: Real>(out: &mut String, key: &str, coeffs: &[ComplexMatrix<T>], field: Field, last: bool) {
    let _ = writeln!(out, "  \"{key}\": [");
    for (k, c) in coeffs.iter().enumerate() {
        out.push_str("    ");
        write_matrix(out, c, field, "    ");
        if k + 1 < coeffs.len() {
            out.push(',');
        }
        out.push('\n');
    }
    out.push_str("  ]");
    out.push_str(if last { "\n" } else { ",\n" });
}

/// Canonical text of an instance file; coefficient `i` multiplies `λ^i`.
pub fn instance_to_string<T: Real>(p: &MatrixPolynomial<T>) -> String {
    let mut out = String::new();
    out.push_str("{\n");
    let _ = writeln!(out, "  \"schema_version\": \"{SCHEMA_VERSION}\",");
    let _ = writeln!(out, "  \"m\": {},", p.rows());
    let _ = writeln!(out, "  \"n\": {},", p.cols());
    let _ = writeln!(out, "  \"grade\": {},", p.grade());
    let _ = writeln!(out, "  \"field\": \"{}\",", p.field());
    write_coeff_list(&mut out, "coefficients", p.coeffs(), p.field(), true);
    out.push_str("}\n");
    out
}

fn check_schema(version: &str) -> Result<()> {
    if version != SCHEMA_VERSION {
        return Err(Error::Parse(format!("unsupported schema_version {version:?}, expected {SCHEMA_VERSION:?}")));
    }
    Ok(())
}

fn to_matrix<T: Real>(rows: &[Vec<Entry>], m: usize, n: usize, field: Field, what: &str) -> Result<ComplexMatrix<T>> {
    if rows.len() != m || rows.iter().any(|r| r.len() != n) {
        return Err(Error::Parse(format!("{what} is not {m}x{n}")));
    }
    let mut a = ComplexMatrix::zeros(m, n);
    for (i, row) in rows.iter().enumerate() {
        for (j, e) in row.iter().enumerate() {
            a[(i, j)] = match (field, e) {
                (Field::Real, Entry::Real(x)) => Complex::new(T::lit(*x), T::zero()),
                (Field::Complex, Entry::Complex([re, im])) => Complex::new(T::lit(*re), T::lit(*im)),
                (Field::Real, Entry::Complex(_)) => {
                    return Err(Error::Parse(format!("{what}: real files hold plain numbers")))
                }
                (Field::Complex, Entry::Real(_)) => {
                    return Err(Error::Parse(format!("{what}: complex files hold [re, im] pairs")))
                }
            };
        }
    }
    Ok(a)
}

fn to_poly<T: Real>(
    raw: &[Vec<Vec<Entry>>],
    m: usize,
    n: usize,
    grade: usize,
    field: Field,
    what: &str,
) -> Result<MatrixPolynomial<T>> {
    if raw.len() != grade + 1 {
        return Err(Error::Parse(format!("{what}: expected {} coefficients, found {}", grade + 1, raw.len())));
    }
    let coeffs = raw
        .iter()
        .enumerate()
        .map(|(k, c)| to_matrix(c, m, n, field, &format!("{what} coefficient {k}")))
        .collect::<Result<Vec<_>>>()?;
    MatrixPolynomial::new(coeffs, field)
}

pub fn instance_from_str<T: Real>(text: &str) -> Result<MatrixPolynomial<T>> {
    let raw: RawInstance = serde_json::from_str(text)?;
    check_schema(&raw.schema_version)?;
    to_poly(&raw.coefficients, raw.m, raw.n, raw.grade, raw.field, "instance")
}

pub fn read_instance<T: Real>(path: &Path) -> Result<MatrixPolynomial<T>> {
    instance_from_str(&read_text(path)?)
}

pub fn write_instance<T: Real>(path: &Path, p: &MatrixPolynomial<T>) -> Result<()> {
    write_text(path, &instance_to_string(p))
}

/// Factor file: `u` holds ⌊d/2⌋+1 and `v` holds ⌈d/2⌉+1 coefficients, each `m × r`.
pub fn factors_to_string<T: Real>(f: &FactorPair<T>) -> String {
    let field = f.u().field().join(f.v().field());
    let mut out = String::new();
    out.push_str("{\n");
    let _ = writeln!(out, "  \"schema_version\": \"{SCHEMA_VERSION}\",");
    let _ = writeln!(out, "  \"m\": {},", f.m());
    let _ = writeln!(out, "  \"r\": {},", f.r());
    let _ = writeln!(out, "  \"grade\": {},", f.grade());
    let _ = writeln!(out, "  \"field\": \"{field}\",");
    write_coeff_list(&mut out, "u", f.u().coeffs(), field, false);
    write_coeff_list(&mut out, "v", f.v().coeffs(), field, true);
    out.push_str("}\n");
    out
}

pub fn factors_from_str<T: Real>(text: &str) -> Result<FactorPair<T>> {
    let raw: RawFactors = serde_json::from_str(text)?;
    check_schema(&raw.schema_version)?;
    let u = to_poly(&raw.u, raw.m, raw.r, raw.grade / 2, raw.field, "u")?;
    let v = to_poly(&raw.v, raw.m, raw.r, raw.grade.div_ceil(2), raw.field, "v")?;
    FactorPair::new(u, v).map_err(|e| Error::Parse(e.to_string()))
}

pub fn read_factors<T: Real>(path: &Path) -> Result<FactorPair<T>> {
    factors_from_str(&read_text(path)?)
}

pub fn write_factors<T: Real>(path: &Path, f: &FactorPair<T>) -> Result<()> {
    write_text(path, &factors_to_string(f))
}

fn read_text(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).map_err(|e| Error::Io(std::io::Error::new(e.kind(), format!("{}: {e}", path.display()))))
}

fn write_text(path: &Path, text: &str) -> Result<()> {
    std::fs::write(path, text).map_err(|e| Error::Io(std::io::Error::new(e.kind(), format!("{}: {e}", path.display()))))
}

/// Summary of one approximation run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunMetadata {
    pub schema_version: String,
    pub method: String,
    pub m: usize,
    pub grade: usize,
    pub r: usize,
    pub field: Field,
    /// Distance from the input to the approximant.
    pub distance: f64,
    pub iterations: usize,
    pub status: String,
    pub restart: usize,
    pub seed: u64,
    pub input_norm: f64,
    /// Whether the sweeps ran on the skew part of the input.
    pub pre_skewed: bool,
    /// Norm of the symmetric part of the input; `distance² = skew_distance² + symmetric_norm²`.
    pub symmetric_norm: f64,
    pub skew_distance: f64,
    pub elapsed_ms: f64,
}

impl RunMetadata {
    pub fn from_result<T: Real>(
        p: &MatrixPolynomial<T>,
        result: &GearsResult<T>,
        method: &str,
        r: usize,
        seed: u64,
    ) -> Result<Self> {
        let f = |x: T| x.to_f64().unwrap_or(f64::NAN);
        let skew = p.skew_part()?;
        Ok(Self {
            schema_version: SCHEMA_VERSION.into(),
            method: method.into(),
            m: p.rows(),
            grade: p.grade(),
            r,
            field: p.field(),
            distance: f(result.distance()),
            iterations: result.iterations,
            status: result.status.as_str().into(),
            restart: result.restart_index,
            seed,
            input_norm: f(p.norm()),
            pre_skewed: result.pre_skewed,
            symmetric_norm: f(p.sym_part()?.norm()),
            skew_distance: f(skew.dist(&result.s)?),
            elapsed_ms: result.elapsed.last().map_or(0.0, |d| d.as_secs_f64() * 1e3),
        })
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        let mut text = serde_json::to_string_pretty(self)?;
        text.push('\n');
        write_text(path, &text)
    }

    pub fn read(path: &Path) -> Result<Self> {
        Ok(serde_json::from_str(&read_text(path)?)?)
    }
}

/// One row of a trace table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceRow {
    pub k: usize,
    pub rho: f64,
    /// `ρ_{k−1} − ρ_k`; empty for the first sweep.
    pub delta: Option<f64>,
    pub elapsed_ms: f64,
}

pub fn trace_rows<T: Real>(result: &GearsResult<T>) -> Vec<TraceRow> {
    let rho: Vec<f64> = result.distances.iter().map(|x| x.to_f64().unwrap_or(f64::NAN)).collect();
    rho.iter()
        .enumerate()
        .map(|(i, &r)| TraceRow {
            k: i + 1,
            rho: r,
            delta: (i > 0).then(|| rho[i - 1] - r),
            elapsed_ms: result.elapsed[i].as_secs_f64() * 1e3,
        })
        .collect()
}

/// Writes rows with a header; the header is written even for an empty table.
pub fn write_csv<R: Serialize>(out: impl Write, header: &[&str], rows: &[R]) -> Result<()> {
    let mut w = csv::WriterBuilder::new().has_headers(false).from_writer(out);
    w.write_record(header)?;
    for row in rows {
        w.serialize(row)?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_csv<R: for<'de> Deserialize<'de>>(path: &Path) -> Result<Vec<R>> {
    let mut rdr = csv::Reader::from_path(path)?;
    let rows = rdr.deserialize().collect::<std::result::Result<Vec<R>, _>>()?;
    Ok(rows)
}

pub const TRACE_HEADER: [&str; 4] = ["k", "rho", "delta", "elapsed_ms"];

pub fn write_trace(path: &Path, rows: &[TraceRow]) -> Result<()> {
    write_csv(std::fs::File::create(path)?, &TRACE_HEADER, rows)
}

pub fn read_trace(path: &Path) -> Result<Vec<TraceRow>> {
    read_csv(path)
}

/// Flat form of a [`VerifyReport`] (the grid itself is written separately).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportRow {
    pub max_sigma_min: f64,
    pub max_rank: usize,
    pub max_rank_ratio: f64,
    pub skew_residual: f64,
    pub monotone: bool,
    pub recomputed_distance: f64,
    pub reported_distance: f64,
    pub distance_consistent: bool,
}

pub const REPORT_HEADER: [&str; 8] = [
    "max_sigma_min",
    "max_rank",
    "max_rank_ratio",
    "skew_residual",
    "monotone",
    "recomputed_distance",
    "reported_distance",
    "distance_consistent",
];

impl<T: Real> From<&VerifyReport<T>> for ReportRow {
    fn from(r: &VerifyReport<T>) -> Self {
        let f = |x: T| x.to_f64().unwrap_or(f64::NAN);
        Self {
            max_sigma_min: f(r.max_sigma_min),
            max_rank: r.max_rank,
            max_rank_ratio: f(r.max_rank_ratio),
            skew_residual: f(r.skew_residual),
            monotone: r.monotone,
            recomputed_distance: f(r.recomputed_distance),
            reported_distance: f(r.reported_distance),
            distance_consistent: r.distance_consistent,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridRow {
    pub x: f64,
    pub y: f64,
    pub sigma_min: f64,
}

pub const GRID_HEADER: [&str; 3] = ["x", "y", "sigma_min"];

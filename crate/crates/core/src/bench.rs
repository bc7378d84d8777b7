//! Seeded benchmark grid over sizes, grades, ranks and fields.
//!
//! Every instance is a random skew polynomial drawn from its own RNG stream.
//! Each instance is solved by the general method and, for pencils, also by the
//! pencil method with the same options, so both start from the same factors.

use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gears::{self, GearsOptions, GearsResult};
use crate::gears_svd::run_pencil;
use crate::matpoly::MatrixPolynomial;
use crate::scalar::Field;
use crate::structgen::random_skew_poly_stream;
use crate::verify::{rank_profile, sigma_min_grid, GridSpec, RANK_SAMPLES, RANK_TOL};

/// Environment variable capping the number of worker threads.
pub const THREADS_ENV: &str = "SKEWDIST_THREADS";

/// Stream offset separating instance generation from solver initialization.
const INSTANCE_STREAM_BASE: u64 = 1 << 32;

#[derive(Debug, Clone)]
pub struct BenchConfig {
    pub sizes: Vec<usize>,
    pub degrees: Vec<usize>,
    /// Half-ranks to try; `None` uses `⌊(m−1)/2⌋` for each size.
    pub ranks: Option<Vec<usize>>,
    pub fields: Vec<Field>,
    pub per_cell: usize,
    pub seed: u64,
    pub max_iter: usize,
    pub restarts: usize,
    pub tol_rel: Option<f64>,
}

impl Default for BenchConfig {
    fn default() -> Self {
        Self {
            sizes: vec![4, 6, 8],
            degrees: vec![1, 2, 3],
            ranks: None,
            fields: vec![Field::Real, Field::Complex],
            per_cell: 2,
            seed: 0,
            max_iter: 500,
            restarts: 1,
            tol_rel: None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Method {
    #[serde(rename = "gears")]
    Gears,
    #[serde(rename = "gears-svd")]
    GearsSvd,
}

impl Method {
    pub fn as_str(self) -> &'static str {
        match self {
            Method::Gears => "gears",
            Method::GearsSvd => "gears-svd",
        }
    }
}

/// One row of the benchmark table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchRow {
    pub instance_id: usize,
    pub m: usize,
    pub d: usize,
    pub r: usize,
    pub field: Field,
    pub seed: u64,
    pub method: Method,
    pub distance: f64,
    pub iterations: usize,
    pub status: String,
    pub elapsed_ms: f64,
    pub max_sigma_min: f64,
    pub max_rank_ratio: f64,
}

pub const BENCH_HEADER: [&str; 13] = [
    "instance_id",
    "m",
    "d",
    "r",
    "field",
    "seed",
    "method",
    "distance",
    "iterations",
    "status",
    "elapsed_ms",
    "max_sigma_min",
    "max_rank_ratio",
];

/// A row with the distance trace and first half-step distance of its run.
#[derive(Debug, Clone)]
pub struct BenchOutcome {
    pub row: BenchRow,
    pub trace: Vec<f64>,
    /// Milliseconds since the start of the run at the end of each sweep.
    pub trace_ms: Vec<f64>,
    pub first_v_distance: f64,
}

#[derive(Debug, Clone, Copy)]
struct Cell {
    instance_id: usize,
    m: usize,
    d: usize,
    r: usize,
    field: Field,
}

fn cells(cfg: &BenchConfig) -> Vec<Cell> {
    let mut out = Vec::new();
    for &m in &cfg.sizes {
        let ranks = cfg.ranks.clone().unwrap_or_else(|| vec![(m.saturating_sub(1)) / 2]);
        for &d in &cfg.degrees {
            for &r in &ranks {
                if r == 0 || 2 * r + 1 > m {
                    continue;
                }
                for &field in &cfg.fields {
                    for _ in 0..cfg.per_cell {
                        out.push(Cell { instance_id: out.len(), m, d, r, field });
                    }
                }
            }
        }
    }
    out
}

fn validate(cfg: &BenchConfig) -> Result<()> {
    if cfg.sizes.iter().any(|&m| m < 3) {
        return Err(Error::Parameter("bench sizes must be at least 3".into()));
    }
    if cfg.degrees.contains(&0) {
        return Err(Error::Parameter("bench degrees must be at least 1".into()));
    }
    if cfg.sizes.is_empty() || cfg.degrees.is_empty() || cfg.fields.is_empty() {
        return Err(Error::Parameter("bench grid is empty".into()));
    }
    Ok(())
}

fn outcome(cell: &Cell, seed: u64, method: Method, run: Result<GearsResult<f64>>, elapsed_ms: f64) -> BenchOutcome {
    let mut row = BenchRow {
        instance_id: cell.instance_id,
        m: cell.m,
        d: cell.d,
        r: cell.r,
        field: cell.field,
        seed,
        method,
        distance: f64::NAN,
        iterations: 0,
        status: String::new(),
        elapsed_ms,
        max_sigma_min: f64::NAN,
        max_rank_ratio: f64::NAN,
    };
    let quality = run.and_then(|res| {
        let (_, sigma) = sigma_min_grid(&res.s, &GridSpec::desk())?;
        let (_, ratio) = rank_profile(&res.s, 2 * cell.r, RANK_SAMPLES, RANK_TOL, seed)?;
        Ok((res, sigma, ratio))
    });
    match quality {
        Ok((res, sigma, ratio)) => {
            row.distance = res.distance();
            row.iterations = res.iterations;
            row.status = res.status.as_str().into();
            row.max_sigma_min = sigma;
            row.max_rank_ratio = ratio;
            let trace_ms = res.elapsed.iter().map(|t| t.as_secs_f64() * 1e3).collect();
            BenchOutcome { row, trace: res.distances, trace_ms, first_v_distance: res.first_v_distance }
        }
        Err(e) => {
            row.status = format!("error: {e}");
            BenchOutcome { row, trace: Vec::new(), trace_ms: Vec::new(), first_v_distance: f64::NAN }
        }
    }
}

fn run_cell(cell: &Cell, cfg: &BenchConfig) -> Vec<BenchOutcome> {
    let seed = cfg.seed.wrapping_add(cell.instance_id as u64);
    let stream = INSTANCE_STREAM_BASE + cell.instance_id as u64;
    let p: MatrixPolynomial<f64> = random_skew_poly_stream(cell.m, cell.d, cell.field, cfg.seed, stream);
    let opts = GearsOptions { tol_rel: cfg.tol_rel, max_iter: cfg.max_iter, restarts: cfg.restarts, seed, ..Default::default() };
    let mut methods = vec![Method::Gears];
    if cell.d == 1 {
        methods.push(Method::GearsSvd);
    }
    methods
        .into_iter()
        .map(|method| {
            let start = Instant::now();
            let res = match method {
                Method::Gears => gears::run(&p, cell.r, &opts),
                Method::GearsSvd => run_pencil(&p, cell.r, &opts),
            };
            let elapsed = start.elapsed().as_secs_f64() * 1e3;
            outcome(cell, seed, method, res, elapsed)
        })
        .collect()
}

/// Worker count from [`THREADS_ENV`], defaulting to the available parallelism.
pub fn thread_count() -> Result<usize> {
    match std::env::var(THREADS_ENV) {
        Ok(v) => match v.trim().parse::<usize>() {
            Ok(n) if n >= 1 => Ok(n),
            _ => Err(Error::Parameter(format!("{THREADS_ENV} must be a positive integer, got {v:?}"))),
        },
        Err(_) => Ok(std::thread::available_parallelism().map_or(1, |n| n.get())),
    }
}

/// Runs the whole grid on `threads` workers. Outcomes are sorted by
/// `(instance_id, method)`.
pub fn run_bench(cfg: &BenchConfig, threads: usize) -> Result<Vec<BenchOutcome>> {
    validate(cfg)?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads.max(1))
        .build()
        .map_err(|e| Error::Parameter(format!("cannot build thread pool: {e}")))?;
    let cells = cells(cfg);
    let mut out: Vec<BenchOutcome> =
        pool.install(|| cells.par_iter().flat_map_iter(|cell| run_cell(cell, cfg)).collect());
    out.sort_by_key(|o| (o.row.instance_id, o.row.method));
    Ok(out)
}

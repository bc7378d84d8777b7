use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use skewdist::bench::{self, BenchConfig, BENCH_HEADER};
use skewdist::gears::{self, GearsOptions, InitMode};
use skewdist::gears_svd::run_pencil;
use skewdist::io::{self, GridRow, ReportRow, RunMetadata, GRID_HEADER, REPORT_HEADER};
use skewdist::structgen::{self, CanonicalSpec};
use skewdist::verify::{check_approximant, CheckOptions, GridSpec, RANK_SAMPLES};
use skewdist::{Error, Field, Polynomial, Result};

/// Nearest skew-symmetric matrix polynomials of bounded rank.
#[derive(Parser)]
#[command(name = "skewdist", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Write a generated instance file.
    Gen {
        #[command(subcommand)]
        kind: GenKind,
    },
    /// Approximate an instance by a skew polynomial of rank at most --rank.
    Approx(ApproxArgs),
    /// Audit an approximant against its input.
    Verify(VerifyArgs),
    /// Run the seeded benchmark grid and write one CSV row per run.
    Bench(BenchArgs),
}

#[derive(Subcommand)]
enum GenKind {
    /// Random skew polynomial with standard normal entries.
    Random {
        #[arg(long)]
        m: usize,
        #[arg(long, default_value_t = 1)]
        d: usize,
        #[arg(long, default_value = "complex")]
        field: Field,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Generic skew pencil of rank 2r.
    GenericPencil {
        #[arg(long)]
        m: usize,
        #[arg(long)]
        r: usize,
        #[arg(long)]
        out: PathBuf,
    },
    /// Direct sum of canonical blocks, e.g. "H:2:1.5,K:1,M:1" (H:h:re[:im], K:k, M:s).
    Canonical {
        #[arg(long)]
        blocks: String,
        #[arg(long)]
        out: PathBuf,
    },
    /// P = Q + E with Q of rank 2r and unit norm, E skew of norm eps.
    /// Also writes Q, E and the factors of Q next to the output file.
    Planted {
        #[arg(long)]
        m: usize,
        #[arg(long, default_value_t = 1)]
        d: usize,
        #[arg(long)]
        r: usize,
        #[arg(long)]
        eps: f64,
        #[arg(long, default_value = "complex")]
        field: Field,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum MethodArg {
    Gears,
    Svd,
    Auto,
}

#[derive(Args)]
struct ApproxArgs {
    #[arg(long)]
    input: PathBuf,
    /// Target rank 2r (even, 2 ≤ 2r ≤ m − 1).
    #[arg(long)]
    rank: usize,
    #[arg(long, value_enum, default_value = "auto")]
    method: MethodArg,
    /// Relative progress tolerance (default 1e-4 complex, 1e-3 real).
    #[arg(long)]
    tol: Option<f64>,
    #[arg(long, default_value_t = 500)]
    max_iter: usize,
    #[arg(long, default_value_t = 5)]
    restarts: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Replace the input by its skew-symmetric part before iterating.
    #[arg(long)]
    pre_skew: bool,
    /// Factors file to start from instead of random restarts.
    #[arg(long)]
    warm_start: Option<PathBuf>,
    /// Approximant instance file.
    #[arg(long)]
    out: PathBuf,
    /// Run metadata (default: <out>.meta.json).
    #[arg(long)]
    meta: Option<PathBuf>,
    /// Distance trace (default: <out>.trace.csv).
    #[arg(long)]
    trace: Option<PathBuf>,
    /// Factors of the approximant (default: <out>.factors.json).
    #[arg(long)]
    factors_out: Option<PathBuf>,
}

#[derive(Args)]
struct VerifyArgs {
    #[arg(long)]
    input: PathBuf,
    #[arg(long)]
    approx: PathBuf,
    /// Target rank 2r used for the rank ratio.
    #[arg(long)]
    rank: usize,
    /// Trace CSV of the run; without it the trace checks are vacuous.
    #[arg(long)]
    trace: Option<PathBuf>,
    /// Grid as "x_min:x_max:y_min:y_max:step", or "desk" / "wide".
    #[arg(long, default_value = "desk", allow_hyphen_values = true)]
    grid: String,
    #[arg(long, default_value_t = RANK_SAMPLES)]
    samples: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    out: PathBuf,
    /// Optional CSV of σ_min at every grid node.
    #[arg(long)]
    grid_out: Option<PathBuf>,
}

#[derive(Args)]
struct BenchArgs {
    #[arg(long, value_delimiter = ',', default_value = "4,6,8")]
    sizes: Vec<usize>,
    #[arg(long, value_delimiter = ',', default_value = "1,2,3")]
    degrees: Vec<usize>,
    /// Half-ranks r; default ⌊(m − 1)/2⌋ per size. Values with 2r + 1 > m are skipped.
    #[arg(long, value_delimiter = ',')]
    ranks: Option<Vec<usize>>,
    #[arg(long, value_delimiter = ',', default_value = "real,complex")]
    fields: Vec<Field>,
    #[arg(long, default_value_t = 2)]
    per_cell: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 500)]
    max_iter: usize,
    #[arg(long, default_value_t = 1)]
    restarts: usize,
    #[arg(long)]
    tol: Option<f64>,
    #[arg(long)]
    out: PathBuf,
    /// Directory for per-run trace CSVs named <instance_id>-<method>.csv.
    #[arg(long)]
    trace_dir: Option<PathBuf>,
}

fn sibling(path: &Path, suffix: &str) -> PathBuf {
    let stem = path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
    path.with_file_name(format!("{stem}.{suffix}"))
}

fn gen(kind: GenKind) -> Result<()> {
    match kind {
        GenKind::Random { m, d, field, seed, out } => {
            if m == 0 {
                return Err(Error::Parameter("m must be positive".into()));
            }
            let p: Polynomial = structgen::random_skew_poly(m, d, field, seed);
            io::write_instance(&out, &p)
        }
        GenKind::GenericPencil { m, r, out } => io::write_instance(&out, &structgen::generic_pencil::<f64>(m, r)?),
        GenKind::Canonical { blocks, out } => {
            let spec: CanonicalSpec<f64> = blocks.parse().map_err(|e: Error| Error::Parameter(e.to_string()))?;
            io::write_instance(&out, &structgen::canonical_pencil(&spec)?)
        }
        GenKind::Planted { m, d, r, eps, field, seed, out } => {
            let pl = structgen::plant::<f64>(m, d, r, eps, field, seed)?;
            io::write_instance(&out, &pl.p)?;
            io::write_instance(&sibling(&out, "q.json"), &pl.q)?;
            io::write_instance(&sibling(&out, "e.json"), &pl.e)?;
            io::write_factors(&sibling(&out, "factors.json"), &pl.factors)
        }
    }
}

fn half_rank(rank: usize, m: usize) -> Result<usize> {
    if rank < 2 || !rank.is_multiple_of(2) || rank + 1 > m {
        return Err(Error::Parameter(format!("--rank must be even with 2 <= rank <= m - 1 = {}", m.saturating_sub(1))));
    }
    Ok(rank / 2)
}

fn approx(a: ApproxArgs) -> Result<()> {
    let p: Polynomial = io::read_instance(&a.input)?;
    let r = half_rank(a.rank, p.rows())?;
    let init = match &a.warm_start {
        Some(path) => InitMode::Warm(io::read_factors(path)?),
        None => InitMode::Random,
    };
    let opts = GearsOptions {
        tol_rel: a.tol,
        max_iter: a.max_iter,
        restarts: a.restarts,
        seed: a.seed,
        init,
        pre_skew: a.pre_skew,
        ..GearsOptions::default()
    };
    let use_svd = match a.method {
        MethodArg::Gears => false,
        MethodArg::Svd if p.grade() != 1 => {
            return Err(Error::Parameter(format!(
                "--method svd needs a pencil (grade 1), input has grade {}",
                p.grade()
            )))
        }
        MethodArg::Svd => true,
        MethodArg::Auto => p.grade() == 1,
    };
    let (res, method) = if use_svd {
        (run_pencil(&p, r, &opts)?, "gears-svd")
    } else {
        (gears::run(&p, r, &opts)?, "gears")
    };
    io::write_instance(&a.out, &res.s)?;
    io::write_factors(&a.factors_out.unwrap_or_else(|| sibling(&a.out, "factors.json")), &res.factors)?;
    io::write_trace(&a.trace.unwrap_or_else(|| sibling(&a.out, "trace.csv")), &io::trace_rows(&res))?;
    let meta = RunMetadata::from_result(&p, &res, method, r, a.seed)?;
    meta.write(&a.meta.unwrap_or_else(|| sibling(&a.out, "meta.json")))?;
    println!(
        "{method}: distance {:e} ({:e} relative), {} iterations, {}",
        meta.distance,
        meta.distance / meta.input_norm.max(f64::MIN_POSITIVE),
        meta.iterations,
        meta.status
    );
    Ok(())
}

fn parse_grid(text: &str) -> Result<GridSpec> {
    match text {
        "desk" => Ok(GridSpec::desk()),
        "wide" => Ok(GridSpec::wide()),
        _ => {
            let v = text
                .split(':')
                .map(|x| x.trim().parse::<f64>())
                .collect::<std::result::Result<Vec<_>, _>>()
                .map_err(|_| Error::Parameter(format!("bad grid {text:?}")))?;
            match v.as_slice() {
                &[x0, x1, y0, y1, step] => GridSpec::new(x0, x1, y0, y1, step),
                _ => Err(Error::Parameter(format!("bad grid {text:?}; expected x_min:x_max:y_min:y_max:step"))),
            }
        }
    }
}

fn verify(a: VerifyArgs) -> Result<()> {
    let p: Polynomial = io::read_instance(&a.input)?;
    let s: Polynomial = io::read_instance(&a.approx)?;
    let distances: Vec<f64> = match &a.trace {
        Some(path) => io::read_trace(path)?.into_iter().map(|row| row.rho).collect(),
        None => Vec::new(),
    };
    let grid = parse_grid(&a.grid)?;
    let opts = CheckOptions { grid, num_samples: a.samples, seed: a.seed };
    let report = check_approximant(&p, &s, &distances, a.rank, &opts)?;
    let row = ReportRow::from(&report);
    io::write_csv(std::fs::File::create(&a.out)?, &REPORT_HEADER, std::slice::from_ref(&row))?;
    if let Some(path) = &a.grid_out {
        let (xs, ys) = (grid.xs(), grid.ys());
        let rows: Vec<GridRow> = ys
            .iter()
            .enumerate()
            .flat_map(|(iy, &y)| {
                let values = &report.grid_values[iy];
                xs.iter().enumerate().map(move |(ix, &x)| GridRow { x, y, sigma_min: values[ix] })
            })
            .collect();
        io::write_csv(std::fs::File::create(path)?, &GRID_HEADER, &rows)?;
    }
    println!(
        "max sigma_min {:e}, max rank {}, monotone {}, distance {:e}",
        row.max_sigma_min, row.max_rank, row.monotone, row.recomputed_distance
    );
    Ok(())
}

fn run_bench(a: BenchArgs) -> Result<()> {
    let cfg = BenchConfig {
        sizes: a.sizes,
        degrees: a.degrees,
        ranks: a.ranks,
        fields: a.fields,
        per_cell: a.per_cell,
        seed: a.seed,
        max_iter: a.max_iter,
        restarts: a.restarts,
        tol_rel: a.tol,
    };
    let outcomes = bench::run_bench(&cfg, bench::thread_count()?)?;
    let rows: Vec<_> = outcomes.iter().map(|o| o.row.clone()).collect();
    io::write_csv(std::fs::File::create(&a.out)?, &BENCH_HEADER, &rows)?;
    if let Some(dir) = &a.trace_dir {
        std::fs::create_dir_all(dir)?;
        for o in &outcomes {
            let trace: Vec<io::TraceRow> = o
                .trace
                .iter()
                .enumerate()
                .map(|(i, &rho)| io::TraceRow {
                    k: i + 1,
                    rho,
                    delta: (i > 0).then(|| o.trace[i - 1] - rho),
                    elapsed_ms: o.trace_ms[i],
                })
                .collect();
            let name = format!("{}-{}.csv", o.row.instance_id, o.row.method.as_str());
            io::write_trace(&dir.join(name), &trace)?;
        }
    }
    println!("{} runs written to {}", rows.len(), a.out.display());
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    let outcome = match cli.command {
        Command::Gen { kind } => gen(kind),
        Command::Approx(a) => approx(a),
        Command::Verify(a) => verify(a),
        Command::Bench(a) => run_bench(a),
    };
    match outcome {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("skewdist: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

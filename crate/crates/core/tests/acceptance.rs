//! Acceptance suite. Runs every criterion in order on one thread so the timing
//! checks are not disturbed, prints one line per criterion and fails if any
//! criterion fails.

use std::time::Instant;

use num_complex::Complex;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use skewdist::bench::{self, BenchConfig, Method};
use skewdist::gears::{self, build_m, init_factors, GearsOptions, InitMode};
use skewdist::gears_svd::run_pencil;
use skewdist::linalg::{commutation_matrix, vec, ComplexMatrix};
use skewdist::structgen::{generic_indices, generic_pencil, plant, random_skew_poly, rank1_assemble};
use skewdist::verify::{is_monotone, rank_profile, sigma_min_grid, GridSpec, MONOTONE_SLACK};
use skewdist::{Factors, Field, MatrixPolynomial, Outcome, Polynomial};

type C = Complex<f64>;

/// Everything a criterion produced besides its verdict.
#[derive(Default)]
struct Ledger {
    traces: Vec<(String, Vec<f64>)>,
    outputs: Vec<(String, Polynomial, usize)>,
}

impl Ledger {
    fn record(&mut self, label: String, res: &Outcome, r: usize) {
        self.traces.push((label.clone(), res.distances.clone()));
        self.outputs.push((label, res.s.clone(), r));
    }
}

type Verdict = Result<String, String>;

fn field_of(rng: &mut ChaCha8Rng) -> Field {
    if rng.random_bool(0.5) {
        Field::Real
    } else {
        Field::Complex
    }
}

fn entry(rng: &mut ChaCha8Rng, field: Field) -> C {
    let re: f64 = rng.random_range(-1.0..1.0);
    match field {
        Field::Real => C::new(re, 0.0),
        Field::Complex => C::new(re, rng.random_range(-1.0..1.0)),
    }
}

fn random_matrix(rng: &mut ChaCha8Rng, rows: usize, cols: usize, field: Field) -> ComplexMatrix<f64> {
    ComplexMatrix::from_fn(rows, cols, |_, _| entry(rng, field))
}

fn random_poly(rng: &mut ChaCha8Rng, rows: usize, cols: usize, grade: usize, field: Field) -> Polynomial {
    let coeffs = (0..=grade).map(|_| random_matrix(rng, rows, cols, field)).collect();
    MatrixPolynomial::new(coeffs, field).unwrap()
}

/// Column-major stacking of all coefficients, written out independently.
fn stack(p: &Polynomial) -> Vec<C> {
    let mut out = Vec::new();
    for a in p.coeffs() {
        for j in 0..a.cols() {
            for i in 0..a.rows() {
                out.push(a[(i, j)]);
            }
        }
    }
    out
}

/// Coefficients of `U·Vᵀ − V·Uᵀ` by explicit index sums.
fn naive_assemble(u: &Polynomial, v: &Polynomial) -> Vec<ComplexMatrix<f64>> {
    let (m, r) = (u.rows(), u.cols());
    let d = u.grade() + v.grade();
    (0..=d)
        .map(|i| {
            ComplexMatrix::from_fn(m, m, |a, b| {
                let mut z = C::new(0.0, 0.0);
                for k in 0..=u.grade() {
                    if i < k || i - k > v.grade() {
                        continue;
                    }
                    let (uk, vl) = (u.coeff(k), v.coeff(i - k));
                    for c in 0..r {
                        z += uk[(a, c)] * vl[(b, c)] - vl[(a, c)] * uk[(b, c)];
                    }
                }
                z
            })
        })
        .collect()
}

fn rel_err(x: &[C], y: &[C]) -> f64 {
    let num: f64 = x.iter().zip(y).map(|(a, b)| (a - b).norm_sqr()).sum::<f64>().sqrt();
    let den: f64 = y.iter().map(|b| b.norm_sqr()).sum::<f64>().sqrt();
    num / den.max(f64::MIN_POSITIVE)
}

fn criterion_1() -> Verdict {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(101);
    let mut worst = 0.0f64;
    for _ in 0..100 {
        let m = rng.random_range(3..=6);
        let d = rng.random_range(1..=4);
        let r = rng.random_range(1..=2usize.min((m - 1) / 2));
        let field = field_of(&mut rng);
        let u = random_poly(&mut rng, m, r, d / 2, field);
        let v = random_poly(&mut rng, m, r, d.div_ceil(2), field);
        let s: Vec<C> = naive_assemble(&u, &v).iter().flat_map(vec).collect();
        let mv = build_m(&v, d).map_err(|e| e.to_string())?.matvec(&stack(&u)).unwrap();
        let mu: Vec<C> = build_m(&u, d).map_err(|e| e.to_string())?.matvec(&stack(&v)).unwrap().iter().map(|z| -z).collect();
        let lib = stack(&gears::assemble(&Factors::new(u, v).unwrap()));
        worst = worst.max(rel_err(&mv, &s)).max(rel_err(&mu, &s)).max(rel_err(&lib, &s));
    }
    let secs = start.elapsed().as_secs_f64();
    let msg = format!("max relative error {worst:.2e} over 100 pairs in {secs:.2} s");
    if worst <= 1e-12 && secs < 5.0 {
        Ok(msg)
    } else {
        Err(msg)
    }
}

fn criterion_2() -> Verdict {
    let mut checked = 0;
    for m in 1..=4 {
        for r in 1..=4 {
            let n = commutation_matrix::<f64>(m, r);
            for i in 0..m {
                for j in 0..r {
                    let mut x = ComplexMatrix::zeros(m, r);
                    x[(i, j)] = C::new(1.0, 0.0);
                    let mut xt = ComplexMatrix::zeros(r, m);
                    xt[(j, i)] = C::new(1.0, 0.0);
                    if n.matvec(&vec(&x)).unwrap() != vec(&xt) {
                        return Err(format!("mismatch at m={m} r={r} basis ({i},{j})"));
                    }
                    checked += 1;
                }
            }
        }
    }
    Ok(format!("{checked} basis matrices map exactly"))
}

fn criterion_4(ledger: &mut Ledger) -> Verdict {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(404);
    let mut worst = 0.0f64;
    for k in 0..20 {
        let m = 4 + k % 5;
        let d = 1 + k % 3;
        let eps = if k % 2 == 0 { 1e-2 } else { 1e-4 };
        let r = rng.random_range(1..=(m - 1) / 2);
        let field = field_of(&mut rng);
        let pl = plant::<f64>(m, d, r, eps, field, 4000 + k as u64).map_err(|e| e.to_string())?;
        let opts = GearsOptions { init: InitMode::Warm(pl.factors.clone()), ..GearsOptions::default() };
        let res = gears::run(&pl.p, r, &opts).map_err(|e| e.to_string())?;
        let bound = eps * (1.0 + 1e-10);
        let first = res.distances[0].max(res.first_v_distance);
        if res.distance() > bound || first > bound {
            return Err(format!(
                "instance {k} (m={m}, d={d}, r={r}, eps={eps:e}): final {:e}, first sweep {:e}",
                res.distance(),
                first
            ));
        }
        worst = worst.max(res.distance() / eps);
        ledger.record(format!("planted {k}"), &res, r);
    }
    let secs = start.elapsed().as_secs_f64();
    let msg = format!("20 warm starts, max final distance / eps {worst:.6} in {secs:.2} s");
    if secs < 30.0 {
        Ok(msg)
    } else {
        Err(msg)
    }
}

fn exact_opts(seed: u64) -> GearsOptions<f64> {
    GearsOptions { tol_rel: Some(1e-12), max_iter: 500, restarts: 5, seed, ..GearsOptions::default() }
}

fn criterion_5(ledger: &mut Ledger) -> Verdict {
    let mut rng = ChaCha8Rng::seed_from_u64(505);
    let mut worst = 0.0f64;
    for k in 0..10 {
        let m = rng.random_range(3..=8);
        let r = rng.random_range(1..=(m - 1) / 2);
        let field = field_of(&mut rng);
        let us: Vec<Vec<C>> = (0..r).map(|_| (0..m).map(|_| entry(&mut rng, field)).collect()).collect();
        let vs: Vec<Polynomial> = (0..r).map(|_| random_poly(&mut rng, m, 1, 1, field)).collect();
        let p = rank1_assemble(&us, &vs).map_err(|e| e.to_string())?;
        let res = gears::run(&p, r, &exact_opts(50 + k)).map_err(|e| e.to_string())?;
        let rel = res.distance() / p.norm();
        if rel > 1e-6 {
            return Err(format!("pencil {k} (m={m}, r={r}, {field:?}): relative distance {rel:e}"));
        }
        worst = worst.max(rel);
        ledger.record(format!("exact pencil {k}"), &res, r);
    }
    Ok(format!("10 pencils, max relative distance {worst:.2e}"))
}

fn criterion_6(ledger: &mut Ledger) -> Verdict {
    let mut rng = ChaCha8Rng::seed_from_u64(606);
    let mut worst = 0.0f64;
    for k in 0..10 {
        let m = rng.random_range(4..=8);
        let d = rng.random_range(1..=3);
        let r = rng.random_range(1..=(m - 2) / 2);
        let field = field_of(&mut rng);
        let f = init_factors::<f64>(m, r, d, field, 6000 + k, &InitMode::Random, 1.0).map_err(|e| e.to_string())?;
        let p = gears::assemble(&f);
        let res = gears::run(&p, r, &exact_opts(60 + k)).map_err(|e| e.to_string())?;
        let rel = res.distance() / p.norm();
        if rel > 1e-4 {
            return Err(format!("instance {k} (m={m}, d={d}, r={r}, {field:?}): relative distance {rel:e}"));
        }
        worst = worst.max(rel);
        ledger.record(format!("exact polynomial {k}"), &res, r);
    }
    Ok(format!("10 polynomials, max relative distance {worst:.2e}"))
}

fn criterion_7(ledger: &mut Ledger) -> Verdict {
    let mut worst = 0.0f64;
    for (k, m) in [3usize, 5, 7].into_iter().enumerate() {
        for field in [Field::Real, Field::Complex] {
            let p: Polynomial = random_skew_poly(m, 1, field, 700 + k as u64);
            let r = (m - 1) / 2;
            let res = run_pencil(&p, r, &exact_opts(70 + k as u64)).map_err(|e| e.to_string())?;
            let rel = res.distance() / p.norm();
            if rel > 1e-6 {
                return Err(format!("m={m} {field:?}: relative distance {rel:e}"));
            }
            worst = worst.max(rel);
            ledger.record(format!("odd pencil m={m} {field:?}"), &res, r);
        }
    }
    Ok(format!("m = 3, 5, 7 in both fields, max relative distance {worst:.2e}"))
}

fn criterion_8() -> Verdict {
    let mut rng = ChaCha8Rng::seed_from_u64(808);
    let mut worst = 0.0f64;
    for k in 0..20 {
        let m = rng.random_range(3..=10);
        let r = rng.random_range(1..=(m - 1) / 2);
        let field = field_of(&mut rng);
        let p: Polynomial = random_skew_poly(m, 1, field, 8000 + k);
        let opts = GearsOptions { max_iter: 1, restarts: 1, seed: 80 + k, ..GearsOptions::default() };
        let g = gears::run(&p, r, &opts).map_err(|e| e.to_string())?;
        let s = run_pencil(&p, r, &opts).map_err(|e| e.to_string())?;
        let rel = (g.first_v_distance - s.first_v_distance).abs() / g.first_v_distance;
        if rel > 1e-10 {
            return Err(format!("pencil {k} (m={m}, r={r}): first V-step distances differ by {rel:e}"));
        }
        worst = worst.max(rel);
    }
    Ok(format!("20 pencils, max relative gap {worst:.2e}"))
}

fn criterion_9(ledger: &Ledger) -> Verdict {
    let mut worst_skew = 0.0f64;
    let mut worst_ratio = 0.0f64;
    for (i, (label, s, r)) in ledger.outputs.iter().enumerate() {
        let skew = s.skew_residual().unwrap() / s.norm().max(f64::MIN_POSITIVE);
        let (_, ratio) = rank_profile(s, 2 * r, 10, 1e-10, 900 + i as u64).map_err(|e| e.to_string())?;
        if skew > 1e-13 || ratio > 1e-10 {
            return Err(format!("{label}: skew residual {skew:e}, sigma ratio {ratio:e}"));
        }
        worst_skew = worst_skew.max(skew);
        worst_ratio = worst_ratio.max(ratio);
    }
    Ok(format!(
        "{} approximants, max skew residual {worst_skew:.2e}, max sigma ratio {worst_ratio:.2e}",
        ledger.outputs.len()
    ))
}

fn criterion_10(ledger: &mut Ledger) -> Verdict {
    let mut worst = 0.0f64;
    for d in 1..=3 {
        for field in [Field::Real, Field::Complex] {
            let p: Polynomial = random_skew_poly(4, d, field, 1000 + d as u64);
            let res = gears::run(&p, 1, &GearsOptions { seed: d as u64, ..GearsOptions::default() }).map_err(|e| e.to_string())?;
            let (_, max) = sigma_min_grid(&res.s, &GridSpec::desk()).map_err(|e| e.to_string())?;
            let rel = max / p.norm();
            if rel > 1e-6 {
                return Err(format!("d={d} {field:?}: max sigma_min / norm {rel:e}"));
            }
            worst = worst.max(rel);
            ledger.record(format!("singular m=4 d={d} {field:?}"), &res, 1);
        }
    }
    Ok(format!("m = 4, d = 1..3, max sigma_min / norm {worst:.2e}"))
}

fn criterion_11() -> Verdict {
    for m in 3..=30 {
        for r in 1..=(m - 1) / 2 {
            for d in 1..=5 {
                let g = generic_indices(m, r, d).map_err(|e| e.to_string())?;
                let (big, small) = (g.count_large, g.count_small);
                let sum = big * (g.alpha_or_beta + 1) + small * g.alpha_or_beta;
                if sum != r * d || big + small != m - 2 * r {
                    return Err(format!("index sum {sum} != {} at m={m} r={r} d={d}", r * d));
                }
                if d == 1 {
                    let tiles: usize = big * (2 * g.alpha_or_beta + 3) + small * (2 * g.alpha_or_beta + 1);
                    let blocks: usize = g.pencil_blocks().iter().map(|&s| 2 * s + 1).sum();
                    if tiles != m || blocks != m {
                        return Err(format!("block sizes {tiles}/{blocks} != {m} at r={r}"));
                    }
                }
            }
            if m <= 12 {
                let p = generic_pencil::<f64>(m, r).map_err(|e| e.to_string())?;
                let (rank, _) = rank_profile(&p, 2 * r, 10, 1e-10, m as u64).map_err(|e| e.to_string())?;
                if rank != 2 * r || p.rows() != m {
                    return Err(format!("generic_pencil({m},{r}) has rank {rank}"));
                }
            }
        }
    }
    Ok("tiling, index sums and generic pencil ranks hold for 3 <= m <= 30".into())
}

fn criterion_12(ledger: &mut Ledger) -> Verdict {
    let p: Polynomial = random_skew_poly(8, 3, Field::Complex, 1200);
    let opts = GearsOptions { max_iter: 500, restarts: 1, tol_rel: Some(1e-300), abs_floor: Some(0.0), ..GearsOptions::default() };
    let start = Instant::now();
    let res = gears::run(&p, 3, &opts).map_err(|e| e.to_string())?;
    let single = start.elapsed().as_secs_f64();
    ledger.record("timed m=8 d=3".into(), &res, 3);

    let start = Instant::now();
    let threads = bench::thread_count().map_err(|e| e.to_string())?;
    let rows = bench::run_bench(&BenchConfig::default(), threads).map_err(|e| e.to_string())?;
    let grid = start.elapsed().as_secs_f64();
    if let Some(bad) = rows.iter().find(|o| o.row.status.starts_with("error")) {
        return Err(format!("bench instance {} failed: {}", bad.row.instance_id, bad.row.status));
    }
    let mut cells = 0;
    let mut faster = 0;
    for pair in rows.chunks(2).filter(|c| c.len() == 2 && c[1].row.method == Method::GearsSvd) {
        cells += 1;
        if pair[1].row.elapsed_ms <= pair[0].row.elapsed_ms {
            faster += 1;
        }
    }
    for o in &rows {
        ledger.traces.push((format!("bench {} {}", o.row.instance_id, o.row.method.as_str()), o.trace.clone()));
    }
    let share = faster as f64 / cells.max(1) as f64;
    let msg = format!(
        "single run {} sweeps in {single:.2} s; bench {} rows in {grid:.1} s; gears-svd faster on {faster}/{cells} pencils",
        res.iterations,
        rows.len()
    );
    if single < 10.0 && grid < 300.0 && share >= 0.8 && res.iterations == 500 {
        Ok(msg)
    } else {
        Err(msg)
    }
}

fn criterion_3(ledger: &Ledger) -> Verdict {
    let mut sweeps = 0;
    for (label, trace) in &ledger.traces {
        if !is_monotone(trace, MONOTONE_SLACK) {
            return Err(format!("{label}: trace increases"));
        }
        sweeps += trace.len();
    }
    Ok(format!("{} traces with {sweeps} sweeps are nonincreasing", ledger.traces.len()))
}

fn main() {
    let mut ledger = Ledger::default();
    let mut results: Vec<(usize, Verdict)> = vec![
        (1, criterion_1()),
        (2, criterion_2()),
        (4, criterion_4(&mut ledger)),
        (5, criterion_5(&mut ledger)),
        (6, criterion_6(&mut ledger)),
        (7, criterion_7(&mut ledger)),
        (8, criterion_8()),
        (10, criterion_10(&mut ledger)),
        (11, criterion_11()),
        (12, criterion_12(&mut ledger)),
    ];
    // These two audit everything the others produced.
    results.push((3, criterion_3(&ledger)));
    results.push((9, criterion_9(&ledger)));
    results.sort_by_key(|(n, _)| *n);

    let mut failed = 0;
    for (n, verdict) in &results {
        match verdict {
            Ok(msg) => println!("criterion {n:2}: PASS  {msg}"),
            Err(msg) => {
                failed += 1;
                println!("criterion {n:2}: FAIL  {msg}");
            }
        }
    }
    if failed > 0 {
        eprintln!("{failed} acceptance criteria failed");
        std::process::exit(1);
    }
}

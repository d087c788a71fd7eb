//! Acceptance suite. Runs every criterion, prints one PASS/FAIL line each and
//! exits non-zero if any criterion fails.

use std::time::{Duration, Instant};

use gf_flush::attack::{
    brute_force_seeds, build_any_system, build_system, coefficient_row, enumerate_seeds, seed_set, solve_seed,
    verify_seed, EquationSource, DEFAULT_ENUMERATION_CAP,
};
use gf_flush::{BitMatrix, BitVector, CircuitSpec, MisrSpec, Oracle, Protocol, ScanChainSpec};
use gf_flush_cli::campaign::{gen_random_spec, run_trial};
use gf_flush_cli::config::parse_config;
use gf_flush_cli::run_campaign;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn random_bits(rng: &mut impl Rng, len: usize) -> BitVector {
    BitVector::from_fn(len, |_| rng.random())
}

fn random_direct(rng: &mut impl Rng, lambda: usize, b: usize, shadow: bool) -> CircuitSpec {
    let lfsr = gen_random_spec(lambda, rng);
    CircuitSpec::direct(lfsr, ScanChainSpec::new(lambda, b, shadow).unwrap()).unwrap()
}

fn random_compressed(rng: &mut impl Rng, h: usize, n: usize, shadow: bool) -> CircuitSpec {
    let lfsr = gen_random_spec(h * n, rng);
    CircuitSpec::compressed(lfsr, MisrSpec::all_ones(h).unwrap(), shadow).unwrap()
}

fn without_shadow(spec: &CircuitSpec) -> CircuitSpec {
    CircuitSpec {
        chain: spec.chain.with_shadow(false),
        ..spec.clone()
    }
}

fn oracle_symbolic_equivalence() -> Outcome {
    let start = Instant::now();
    let mut r = rng(101);
    let mut bits_checked = 0usize;
    for trial in 0..500 {
        let lambda = r.random_range(2..=64);
        let b = [1, 2, 4][trial % 3];
        let shadow = trial % 2 == 0;
        let spec = random_direct(&mut r, lambda, b, shadow);
        let seed = random_bits(&mut r, lambda);
        let sys = build_system(&mut Oracle::new(spec.clone(), seed.clone()).unwrap()).unwrap();
        for (k, src) in sys.sources.iter().enumerate() {
            let EquationSource::ScanOut { m } = *src else {
                return Err("direct system produced a signature row".into());
            };
            let predicted = coefficient_row(&spec, m).unwrap().dot(&seed).unwrap();
            ensure(predicted == sys.observations.get(k), || {
                format!("trial {trial}: lambda {lambda} b {b} shadow {shadow} m {m} mismatch")
            })?;
            bits_checked += 1;
        }
    }
    let elapsed = start.elapsed();
    ensure(elapsed < Duration::from_secs(60), || {
        format!("took {elapsed:?} (limit 60 s)")
    })?;
    Ok(format!(
        "500 pairs, {bits_checked} bits bit-exact in {:.2} s",
        elapsed.as_secs_f64()
    ))
}

fn compare_with_brute_force(spec: &CircuitSpec, seed: &BitVector) -> Result<usize, String> {
    let sys = build_any_system(&mut Oracle::new(spec.clone(), seed.clone()).unwrap()).map_err(|e| e.to_string())?;
    let sol = solve_seed(&sys).map_err(|e| e.to_string())?;
    let listed = enumerate_seeds(&sol, DEFAULT_ENUMERATION_CAP);
    let brute = brute_force_seeds(spec, sys.protocol, &sys.observations).map_err(|e| e.to_string())?;
    ensure(listed.exhausted, || "enumeration hit the cap".into())?;
    ensure(seed_set(&listed.seeds) == seed_set(&brute), || {
        format!(
            "lambda {}: algebra gives {} candidates, brute force {}",
            spec.lambda(),
            listed.seeds.len(),
            brute.len()
        )
    })?;
    Ok(brute.len())
}

fn brute_force_exactness() -> Outcome {
    let start = Instant::now();
    let mut r = rng(202);
    let mut non_unique = 0;
    for trial in 0..200 {
        let lambda = r.random_range(2..=16);
        let b = 1 + trial % 2;
        let shadow = r.random();
        let spec = random_direct(&mut r, lambda, b, shadow);
        let seed = random_bits(&mut r, lambda);
        non_unique +=
            usize::from(compare_with_brute_force(&spec, &seed).map_err(|e| format!("direct {trial}: {e}"))? > 1);
    }
    for trial in 0..200 {
        let h = [1, 2, 3, 4, 6][trial % 5];
        let n = r.random_range(2usize.div_ceil(h)..=12 / h);
        let spec = random_compressed(&mut r, h, n, trial % 4 == 0);
        let seed = random_bits(&mut r, h * n);
        non_unique +=
            usize::from(compare_with_brute_force(&spec, &seed).map_err(|e| format!("misr {trial}: {e}"))? > 1);
    }
    let elapsed = start.elapsed();
    ensure(elapsed < Duration::from_secs(300), || {
        format!("took {elapsed:?} (limit 5 min)")
    })?;
    Ok(format!(
        "200 direct + 200 MISR trials identical to exhaustive search ({non_unique} with >1 candidate) in {:.1} s",
        elapsed.as_secs_f64()
    ))
}

fn completeness_at_scale() -> Outcome {
    let mut r = rng(303);
    let mut summary = Vec::new();
    for lambda in [128, 256, 500] {
        let mut unique = 0;
        for trial in 0..20 {
            let spec = random_direct(&mut r, lambda, 1, true);
            let seed = random_bits(&mut r, lambda);
            let sys = build_system(&mut Oracle::new(spec.clone(), seed.clone()).unwrap()).unwrap();
            let sol = solve_seed(&sys).map_err(|e| e.to_string())?;
            ensure(sol.contains(&seed), || {
                format!("lambda {lambda} trial {trial}: true seed missing")
            })?;
            let ok = verify_seed(&spec, sys.protocol, &sys.observations, &sol.particular).unwrap()
                && verify_seed(&spec, sys.protocol, &sys.observations, &seed).unwrap();
            ensure(ok, || format!("lambda {lambda} trial {trial}: verification failed"))?;
            unique += usize::from(sol.is_unique());
        }
        summary.push(format!("λ={lambda}: 20/20 ({unique} unique)"));
    }
    Ok(summary.join(", "))
}

/// Least-squares slope of ln(y) against ln(x).
fn loglog_slope(points: &[(f64, f64)]) -> f64 {
    let n = points.len() as f64;
    let xs: Vec<f64> = points.iter().map(|p| p.0.ln()).collect();
    let ys: Vec<f64> = points.iter().map(|p| p.1.ln()).collect();
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let cov: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let var: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    cov / var
}

fn runtime_reproduction() -> Outcome {
    let mut points = Vec::new();
    let mut report = Vec::new();
    for (lambda, trials) in [(64, 20), (128, 20), (256, 10), (500, 10), (1000, 5)] {
        let config = parse_config(&format!(
            "mode = \"attack\"\nlambda = {lambda}\ntrials = {trials}\nrng_seed = 404\n"
        ))
        .unwrap();
        let mut total = 0.0;
        for trial in 0..trials {
            let rec = run_trial(&config, lambda, trial).map_err(|e| e.to_string())?;
            ensure(rec.verified && !rec.timed_out, || {
                format!("lambda {lambda} trial {trial} not verified")
            })?;
            total += rec.total_ms;
        }
        let mean_ms = total / trials as f64;
        points.push((lambda as f64, mean_ms));
        report.push(format!("λ={lambda}: {mean_ms:.2} ms"));
        match lambda {
            500 => ensure(mean_ms < 60_000.0, || {
                format!("λ=500 mean {mean_ms:.0} ms exceeds 60 s")
            })?,
            1000 => ensure(mean_ms < 600_000.0, || {
                format!("λ=1000 mean {mean_ms:.0} ms exceeds 10 min")
            })?,
            _ => {}
        }
    }
    let slope = loglog_slope(&points);
    ensure(slope <= 3.5, || {
        format!("fitted exponent {slope:.2} > 3.5 ({})", report.join(", "))
    })?;
    Ok(format!("{}; fitted exponent {slope:.2}", report.join(", ")))
}

fn uniqueness_statistics() -> Outcome {
    let workers = std::thread::available_parallelism().map_or(1, |n| n.get());
    let config = parse_config(&format!(
        "mode = \"attack\"\nlambda = 500\ntrials = 200\nrng_seed = 505\nworkers = {workers}\n"
    ))
    .unwrap();
    let campaign = run_campaign(&config).map_err(|e| e.to_string())?;
    let g = &campaign.summary.groups[0];
    ensure(g.all_verified, || "a trial failed verification".into())?;
    // Tap vectors of odd weight make x + 1 divide the feedback polynomial.
    let odd_weight_nonunique = campaign
        .records
        .iter()
        .filter(|r| r.candidates > 1)
        .filter(|r| {
            let (spec, _) = gf_flush_cli::campaign::draw_trial(&config, r.lambda, r.trial).unwrap();
            spec.lfsr.taps().count_ones() % 2 == 1
        })
        .count();
    let non_unique = campaign.records.iter().filter(|r| r.candidates > 1).count();
    let detail = format!(
        "unique fraction {:.3}, median {}, mean {:.2}, max {} candidates; {odd_weight_nonunique}/{non_unique} non-unique configs have odd tap weight",
        g.unique_fraction, g.median_candidates, g.mean_candidates, g.max_candidates
    );
    ensure(g.unique_fraction > 0.6, || {
        format!("unique fraction not above 0.6: {detail}")
    })?;
    ensure(g.median_candidates == 1.0, || format!("median is not 1: {detail}"))?;
    Ok(detail)
}

fn shadow_neutralization() -> Outcome {
    let mut r = rng(606);
    let mut non_unique = 0;
    for trial in 0..100 {
        let lambda = r.random_range(2..=64);
        let b = [1, 2, 4][trial % 3];
        let spec = random_direct(&mut r, lambda, b, true);
        let seed = random_bits(&mut r, lambda);
        let shielded =
            solve_seed(&build_system(&mut Oracle::new(spec.clone(), seed.clone()).unwrap()).unwrap()).unwrap();
        let plain =
            solve_seed(&build_system(&mut Oracle::new(without_shadow(&spec), seed.clone()).unwrap()).unwrap()).unwrap();
        let same_set = shielded.rank == plain.rank
            && shielded.contains(&plain.particular)
            && plain.kernel_basis.iter().all(|v| {
                let mut x = shielded.particular.clone();
                x.xor_assign(v);
                shielded.contains(&x)
            });
        ensure(same_set, || {
            format!("trial {trial}: candidate sets differ (lambda {lambda}, b {b})")
        })?;
        non_unique += usize::from(!plain.is_unique());
    }
    Ok(format!(
        "100 trials, identical candidate sets ({non_unique} rank-deficient)"
    ))
}

fn misr_attack() -> Outcome {
    let mut r = rng(707);
    let mut trials = 0;
    for h in [2, 4, 8] {
        for n in 1..=64 / h {
            for rep in 0..4 {
                let shadow = rep % 2 == 1;
                let spec = random_compressed(&mut r, h, n, shadow);
                let lambda = h * n;
                let seed = random_bits(&mut r, lambda);
                let sys = build_any_system(&mut Oracle::new(spec.clone(), seed.clone()).unwrap()).unwrap();
                ensure(sys.protocol == Protocol::MisrRounds { rounds: n }, || {
                    format!("h {h} N {n}: wrong round count")
                })?;
                ensure(sys.num_equations() == lambda, || {
                    format!("h {h} N {n}: {} equations", sys.num_equations())
                })?;
                let sol = solve_seed(&sys).map_err(|e| e.to_string())?;
                ensure(sol.contains(&seed), || {
                    format!("h {h} N {n} shadow {shadow}: true seed missing")
                })?;
                ensure(
                    verify_seed(&spec, sys.protocol, &sys.observations, &sol.particular).unwrap(),
                    || format!("h {h} N {n}: particular solution fails replay"),
                )?;
                trials += 1;
            }
        }
    }
    let start = Instant::now();
    let spec = random_compressed(&mut r, 16, 8, false);
    let seed = random_bits(&mut r, 128);
    let sys = build_any_system(&mut Oracle::new(spec.clone(), seed.clone()).unwrap()).unwrap();
    let sol = solve_seed(&sys).map_err(|e| e.to_string())?;
    let elapsed = start.elapsed();
    ensure(sol.contains(&seed), || "λ=128 h=16: true seed missing".into())?;
    ensure(elapsed < Duration::from_secs(600), || {
        format!("λ=128 h=16 took {elapsed:?}")
    })?;
    Ok(format!(
        "{trials} trials over h∈{{2,4,8}}, λ≤64 all contain the seed; λ=128 h=16 rank {} in {:.1} ms",
        sol.rank,
        elapsed.as_secs_f64() * 1e3
    ))
}

fn random_matrix(r: &mut impl Rng, rows: usize, cols: usize) -> BitMatrix {
    let density = [0.5, 0.2, 0.05][r.random_range(0..3)];
    BitMatrix::from_fn(rows, cols, |_, _| r.random_bool(density))
}

fn gf2_property_suite() -> Outcome {
    let mut r = rng(808);
    const N: usize = 1000;
    for i in 0..N {
        let n = r.random_range(1..=32);
        let m = random_matrix(&mut r, n, n);
        let (e1, e2) = (r.random_range(0..200u64), r.random_range(0..200u64));
        let lhs = m.pow(e1).unwrap().mul(&m.pow(e2).unwrap()).unwrap();
        ensure(lhs == m.pow(e1 + e2).unwrap(), || format!("exponent law instance {i}"))?;
    }
    let mut deficient = 0;
    for i in 0..N {
        let (rows, cols) = (r.random_range(1..=64), r.random_range(1..=64));
        let a = random_matrix(&mut r, rows, cols);
        let basis = a.null_space_basis();
        let rank = a.rank();
        ensure(rank + basis.len() == cols, || format!("rank-nullity instance {i}"))?;
        ensure(basis.iter().all(|v| a.mul_vec(v).unwrap().is_zero()), || {
            format!("kernel membership instance {i}")
        })?;
        if !basis.is_empty() {
            ensure(
                BitMatrix::from_rows(cols, &basis).unwrap().rank() == basis.len(),
                || format!("kernel independence instance {i}"),
            )?;
        }
        deficient += usize::from(rank < cols);
    }
    let mut inconsistent = 0;
    for i in 0..N {
        let (rows, cols) = (r.random_range(1..=64), r.random_range(1..=64));
        let a = random_matrix(&mut r, rows, cols);
        let o = if i % 2 == 0 {
            a.mul_vec(&random_bits(&mut r, cols)).unwrap()
        } else {
            random_bits(&mut r, rows)
        };
        match a.solve(&o).unwrap() {
            Some(x) => ensure(a.mul_vec(&x).unwrap() == o, || format!("solver residual instance {i}"))?,
            None => {
                ensure(i % 2 == 1, || format!("consistent instance {i} reported inconsistent"))?;
                inconsistent += 1;
            }
        }
    }
    Ok(format!(
        "{N} instances each: exponent law, rank-nullity + kernel ({deficient} rank-deficient), solver residual ({inconsistent} inconsistent)"
    ))
}

fn main() {
    let criteria: [Criterion; 8] = [
        ("oracle-symbolic equivalence", oracle_symbolic_equivalence),
        ("brute-force exactness", brute_force_exactness),
        ("completeness at scale", completeness_at_scale),
        ("runtime reproduction", runtime_reproduction),
        ("uniqueness statistics", uniqueness_statistics),
        ("shadow-chain neutralization", shadow_neutralization),
        ("MISR attack", misr_attack),
        ("GF(2) algebra property suite", gf2_property_suite),
    ];
    let mut failures = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let outcome = std::panic::catch_unwind(check).unwrap_or_else(|_| Err("panicked".into()));
        let secs = start.elapsed().as_secs_f64();
        match outcome {
            Ok(detail) => println!("[PASS] A{} {name} ({secs:.1} s): {detail}", i + 1),
            Err(detail) => {
                failures += 1;
                println!("[FAIL] A{} {name} ({secs:.1} s): {detail}", i + 1);
            }
        }
    }
    println!("acceptance: {} passed, {failures} failed", criteria.len() - failures);
    if failures > 0 {
        std::process::exit(1);
    }
}

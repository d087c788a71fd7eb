//! Timed attack campaigns.
//!
//! Every trial draws its structure and seed from its own ChaCha stream, keyed
//! by `(rng_seed, lambda, trial)`, so results do not depend on the worker
//! count or on scheduling.

use std::fmt;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;
use std::time::{Duration, Instant};

use gf_flush::attack::{
    brute_force_seeds, enumerate_seeds, seed_set, solve_seed, symbolic_system, verify_seed, AttackError,
};
use gf_flush::{BitVector, CircuitSpec, LfsrSpec, MisrSpec, Oracle, Protocol, ScanChainSpec, SimError};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::config::{BitsSetting, ExperimentConfig, Mode};
use crate::report::{BenchRecord, SimulationRecord};

#[derive(Debug, thiserror::Error)]
pub enum CampaignError {
    #[error("lambda {lambda}, trial {trial}: {source}")]
    ModelMismatch {
        lambda: usize,
        trial: usize,
        source: AttackError,
    },
    #[error("lambda {lambda}, trial {trial}: {source}")]
    Attack {
        lambda: usize,
        trial: usize,
        source: AttackError,
    },
    #[error("mode {0} produces simulation records, not attack records")]
    WrongMode(Mode),
}

/// Random feedback taps with `c_0 = 1` and the other `λ - 1` taps fair coin
/// flips.
pub fn gen_random_spec(lambda: usize, rng: &mut impl Rng) -> LfsrSpec {
    let mut taps = BitVector::from_fn(lambda, |_| rng.random());
    taps.set(0, true);
    LfsrSpec::new(taps).expect("lambda >= 2 and c_0 = 1")
}

pub fn trial_rng(rng_seed: u64, lambda: usize, trial: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(rng_seed);
    rng.set_stream(((lambda as u64) << 32) | trial as u64);
    rng
}

/// Draws the circuit and secret seed for one trial.
pub fn draw_trial(
    config: &ExperimentConfig,
    lambda: usize,
    trial: usize,
) -> Result<(CircuitSpec, BitVector), SimError> {
    let mut rng = trial_rng(config.rng_seed, lambda, trial);
    let lfsr = match &config.taps {
        BitsSetting::Random => gen_random_spec(lambda, &mut rng),
        BitsSetting::AllOnes => LfsrSpec::new(BitVector::ones(lambda))?,
        BitsSetting::Explicit(c) => LfsrSpec::new(c.clone())?,
    };
    let spec = match config.h {
        None => CircuitSpec::direct(lfsr, ScanChainSpec::new(lambda, config.b, config.shadow)?)?,
        Some(h) => {
            let misr = match &config.misr_taps {
                BitsSetting::AllOnes => MisrSpec::all_ones(h)?,
                BitsSetting::Random => MisrSpec::new(BitVector::from_fn(h, |_| rng.random()))?,
                BitsSetting::Explicit(d) => MisrSpec::new(d.clone())?,
            };
            CircuitSpec::compressed(lfsr, misr, config.shadow)?
        }
    };
    let seed = match &config.seed {
        BitsSetting::Explicit(s) => s.clone(),
        _ => BitVector::from_fn(lambda, |_| rng.random()),
    };
    Ok((spec, seed))
}

fn ms(d: Duration) -> f64 {
    d.as_secs_f64() * 1e3
}

struct TrialClock {
    start: Instant,
    limit: Duration,
}

impl TrialClock {
    fn expired(&self) -> bool {
        self.start.elapsed() > self.limit
    }
}

/// Runs one attack trial. Phases are not interruptible; the timeout is
/// checked between them and an overrun marks the record as timed out.
pub fn run_trial(config: &ExperimentConfig, lambda: usize, trial: usize) -> Result<BenchRecord, CampaignError> {
    let wrap = |source: AttackError| match source {
        AttackError::ModelMismatch { .. } => CampaignError::ModelMismatch { lambda, trial, source },
        source => CampaignError::Attack { lambda, trial, source },
    };
    let clock = TrialClock {
        start: Instant::now(),
        limit: config.timeout,
    };
    let mut record = BenchRecord {
        lambda,
        h: config.h,
        trial,
        setup_ms: 0.0,
        solve_ms: 0.0,
        total_ms: 0.0,
        rank: 0,
        candidates: 0,
        verified: false,
        timed_out: false,
    };
    let finish = |mut r: BenchRecord, timed_out: bool| {
        r.total_ms = ms(clock.start.elapsed());
        r.timed_out = timed_out;
        Ok(r)
    };

    let (spec, seed) = draw_trial(config, lambda, trial).map_err(|e| wrap(e.into()))?;

    let t = Instant::now();
    let structure = symbolic_system(&spec).map_err(wrap)?;
    record.setup_ms = ms(t.elapsed());
    if clock.expired() {
        return finish(record, true);
    }

    let mut oracle = Oracle::new(spec.clone(), seed.clone()).map_err(|e| wrap(e.into()))?;
    let system = structure.observe(&mut oracle).map_err(wrap)?;
    if clock.expired() {
        return finish(record, true);
    }

    let t = Instant::now();
    let solution = solve_seed(&system).map_err(wrap)?;
    record.solve_ms = ms(t.elapsed());
    record.rank = solution.rank;
    record.candidates = solution.candidate_count().unwrap_or(u128::MAX);
    if clock.expired() {
        return finish(record, true);
    }

    record.verified = match config.mode {
        Mode::BruteCheck => {
            let listed = enumerate_seeds(&solution, config.cap);
            let brute = brute_force_seeds(&spec, system.protocol, &system.observations).map_err(wrap)?;
            listed.exhausted && brute.contains(&seed) && seed_set(&listed.seeds) == seed_set(&brute)
        }
        _ => {
            solution.contains(&seed)
                && verify_seed(&spec, system.protocol, &system.observations, &solution.particular).map_err(wrap)?
        }
    };
    let expired = clock.expired();
    if expired {
        record.verified = false;
    }
    finish(record, expired)
}

/// Per-λ aggregate over the trials that finished.
#[derive(Debug, Clone, PartialEq)]
pub struct GroupSummary {
    pub lambda: usize,
    pub h: Option<usize>,
    pub trials: usize,
    pub timed_out: usize,
    pub mean_total_ms: f64,
    pub median_total_ms: f64,
    pub mean_setup_ms: f64,
    pub mean_solve_ms: f64,
    pub unique_fraction: f64,
    pub mean_candidates: f64,
    pub median_candidates: f64,
    pub max_candidates: u128,
    pub all_verified: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Summary {
    pub groups: Vec<GroupSummary>,
}

impl Summary {
    pub fn all_timed_out(&self) -> bool {
        self.groups.iter().all(|g| g.timed_out == g.trials)
    }
}

fn mean(xs: &[f64]) -> f64 {
    if xs.is_empty() {
        return f64::NAN;
    }
    xs.iter().sum::<f64>() / xs.len() as f64
}

fn median(xs: &[f64]) -> f64 {
    if xs.is_empty() {
        return f64::NAN;
    }
    let mut v = xs.to_vec();
    v.sort_by(f64::total_cmp);
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        (v[n / 2 - 1] + v[n / 2]) / 2.0
    }
}

pub fn summarize(records: &[BenchRecord]) -> Summary {
    let mut lambdas: Vec<usize> = records.iter().map(|r| r.lambda).collect();
    lambdas.dedup();
    let groups = lambdas
        .into_iter()
        .map(|lambda| {
            let group: Vec<&BenchRecord> = records.iter().filter(|r| r.lambda == lambda).collect();
            let done: Vec<&&BenchRecord> = group.iter().filter(|r| !r.timed_out).collect();
            let totals: Vec<f64> = done.iter().map(|r| r.total_ms).collect();
            let cands: Vec<f64> = done.iter().map(|r| r.candidates as f64).collect();
            GroupSummary {
                lambda,
                h: group[0].h,
                trials: group.len(),
                timed_out: group.len() - done.len(),
                mean_total_ms: mean(&totals),
                median_total_ms: median(&totals),
                mean_setup_ms: mean(&done.iter().map(|r| r.setup_ms).collect::<Vec<_>>()),
                mean_solve_ms: mean(&done.iter().map(|r| r.solve_ms).collect::<Vec<_>>()),
                unique_fraction: done.iter().filter(|r| r.candidates == 1).count() as f64 / done.len().max(1) as f64,
                mean_candidates: mean(&cands),
                median_candidates: median(&cands),
                max_candidates: done.iter().map(|r| r.candidates).max().unwrap_or(0),
                all_verified: done.iter().all(|r| r.verified),
            }
        })
        .collect();
    Summary { groups }
}

impl fmt::Display for Summary {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(
            f,
            "{:>6} {:>4} {:>6} {:>8} {:>12} {:>12} {:>8} {:>10} {:>8} {:>9}",
            "lambda", "h", "trials", "timeouts", "mean_ms", "median_ms", "unique", "mean_cand", "max_k", "verified"
        )?;
        for g in &self.groups {
            let max_k = if g.max_candidates == 0 {
                0
            } else {
                127 - g.max_candidates.leading_zeros()
            };
            writeln!(
                f,
                "{:>6} {:>4} {:>6} {:>8} {:>12.3} {:>12.3} {:>8.3} {:>10.2} {:>8} {:>9}",
                g.lambda,
                g.h.map_or("-".to_string(), |h| h.to_string()),
                g.trials,
                g.timed_out,
                g.mean_total_ms,
                g.median_total_ms,
                g.unique_fraction,
                g.mean_candidates,
                max_k,
                g.all_verified
            )?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone)]
pub struct Campaign {
    pub records: Vec<BenchRecord>,
    pub summary: Summary,
}

/// Runs `jobs` on up to `workers` threads and returns results in job order.
fn run_parallel<J: Sync, T: Send>(jobs: &[J], workers: usize, f: impl Fn(&J) -> T + Sync) -> Vec<T> {
    if workers <= 1 || jobs.len() <= 1 {
        return jobs.iter().map(f).collect();
    }
    let next = AtomicUsize::new(0);
    let slots: Mutex<Vec<Option<T>>> = Mutex::new((0..jobs.len()).map(|_| None).collect());
    std::thread::scope(|scope| {
        for _ in 0..workers.min(jobs.len()) {
            scope.spawn(|| loop {
                let i = next.fetch_add(1, Ordering::Relaxed);
                let Some(job) = jobs.get(i) else { break };
                let out = f(job);
                slots.lock().expect("no worker panics while holding the lock")[i] = Some(out);
            });
        }
    });
    slots
        .into_inner()
        .expect("workers joined")
        .into_iter()
        .map(|s| s.expect("every job ran"))
        .collect()
}

fn jobs(config: &ExperimentConfig) -> Vec<(usize, usize)> {
    config
        .lambdas
        .iter()
        .flat_map(|&l| (0..config.trials).map(move |t| (l, t)))
        .collect()
}

/// Runs every trial of an attack, brute-check or bench configuration.
pub fn run_campaign(config: &ExperimentConfig) -> Result<Campaign, CampaignError> {
    if config.mode == Mode::Simulate {
        return Err(CampaignError::WrongMode(config.mode));
    }
    let results = run_parallel(&jobs(config), config.workers, |&(lambda, trial)| {
        run_trial(config, lambda, trial)
    });
    let records = results.into_iter().collect::<Result<Vec<_>, _>>()?;
    let summary = summarize(&records);
    Ok(Campaign { records, summary })
}

/// `simulate` mode: query the oracle with the attack protocol and report what
/// it returns, without attacking.
pub fn run_simulation(config: &ExperimentConfig) -> Result<Vec<SimulationRecord>, CampaignError> {
    let results = run_parallel(&jobs(config), config.workers, |&(lambda, trial)| {
        let wrap = |source: AttackError| CampaignError::Attack { lambda, trial, source };
        let (spec, seed) = draw_trial(config, lambda, trial).map_err(|e| wrap(e.into()))?;
        let protocol = match spec.misr {
            Some(_) => Protocol::MisrRounds {
                rounds: spec.chain.len(),
            },
            None => Protocol::Flush {
                skip: spec.chain.first_keyed_input(),
                count: lambda,
            },
        };
        let mut oracle = Oracle::new(spec.clone(), seed.clone()).map_err(|e| wrap(e.into()))?;
        let observations = protocol.observe(&mut oracle).map_err(|e| wrap(e.into()))?;
        Ok(SimulationRecord {
            lambda,
            h: config.h,
            trial,
            taps: spec.lfsr.taps().to_string(),
            seed: seed.to_string(),
            observations: observations.to_string(),
        })
    });
    results.into_iter().collect()
}

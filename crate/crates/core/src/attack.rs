//! Seed recovery by flushing zeros and solving `A·s = o` over GF(2).
//!
//! Every observable bit of the oracle is a GF(2)-linear function of the seed,
//! so the attack writes each observation as a coefficient row `a` with
//! `a·s = o` and solves the stacked system. Rank deficiency leaves an affine
//! set of `2^(λ - rank)` candidate seeds.

use std::collections::HashSet;

use crate::gf2::{BitMatrix, BitVector, Gf2Error};
use crate::sim::{CircuitSpec, Oracle, SimError};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum AttackError {
    #[error(transparent)]
    Sim(#[from] SimError),
    #[error(transparent)]
    Gf2(#[from] Gf2Error),
    /// The symbolic model and the oracle disagree: a correctly built system
    /// always has the true seed as a solution.
    #[error("model mismatch: {rows} equations of rank {rank} have no solution")]
    ModelMismatch { rows: usize, rank: usize },
    #[error("scan-in index {m} is not fully keyed under the shadow chain (first keyed index is {first})")]
    PartiallyKeyed { m: usize, first: usize },
    #[error("oracle has already run {0} cycles; the attack needs a fresh oracle")]
    OracleAdvanced(u64),
    #[error("{0} needs direct scan-out access")]
    NeedsDirectAccess(&'static str),
    #[error("{0} needs a MISR")]
    NeedsMisr(&'static str),
    #[error("brute force over 2^{lambda} seeds exceeds the 2^{max} limit")]
    BruteForceTooLarge { lambda: usize, max: usize },
    #[error("observation vector has {got} bits, protocol produces {expected}")]
    ObservationLength { expected: usize, got: usize },
}

/// Largest λ accepted by [`brute_force_seeds`].
pub const BRUTE_FORCE_MAX_LAMBDA: usize = 20;

/// Default cap on the number of enumerated candidates.
pub const DEFAULT_ENUMERATION_CAP: usize = 1 << 20;

/// How observations were collected from the oracle, so that a candidate seed
/// can be checked by replaying exactly the same queries.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Protocol {
    /// Flush `skip + count` zeros through the chain, keep outputs
    /// `skip..skip + count` (indexed by scan-in position).
    Flush { skip: usize, count: usize },
    /// Run `rounds` MISR test rounds and concatenate the signatures.
    MisrRounds { rounds: usize },
}

impl Protocol {
    pub fn observation_len(&self, spec: &CircuitSpec) -> usize {
        match *self {
            Protocol::Flush { count, .. } => count,
            Protocol::MisrRounds { rounds } => rounds * spec.num_chains(),
        }
    }

    /// Runs the protocol against `oracle` and returns the observed bits.
    pub fn observe(&self, oracle: &mut Oracle) -> Result<BitVector, SimError> {
        match *self {
            Protocol::Flush { skip, count } => {
                let all = oracle.flush_scan(skip + count)?;
                Ok(BitVector::from_fn(count, |k| all.get(skip + k)))
            }
            Protocol::MisrRounds { rounds } => {
                let sigs = oracle.run_rounds(rounds)?;
                let h = oracle.spec().num_chains();
                Ok(BitVector::from_fn(rounds * h, |k| sigs[k / h].get(k % h)))
            }
        }
    }
}

/// Which query produced an equation.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EquationSource {
    /// Scan-out bit of the zero injected at scan-in index `m`.
    ScanOut { m: usize },
    /// Signature bit `stage` read after test round `round`.
    Signature { round: usize, stage: usize },
}

/// The linear system `A·s = o` together with the protocol that produced it.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CoefficientSystem {
    pub a_matrix: BitMatrix,
    pub observations: BitVector,
    pub sources: Vec<EquationSource>,
    pub protocol: Protocol,
}

impl CoefficientSystem {
    pub fn num_equations(&self) -> usize {
        self.a_matrix.rows()
    }

    /// Whether `seed` reproduces every observation.
    pub fn is_satisfied_by(&self, seed: &BitVector) -> Result<bool, AttackError> {
        Ok(self.a_matrix.mul_vec(seed)? == self.observations)
    }
}

/// Symbolic LFSR keystream. Entry `t` is the coefficient row of `f_0^t`; since
/// stage `j` at cycle `k` equals stage 0 at cycle `j + k`, entry `j + k` is
/// also row `j` of `T^k`. New entries follow the feedback recurrence
/// `form(t + λ) = Σ c_j · form(t + j)`.
#[derive(Debug, Clone)]
pub struct KeystreamForms {
    taps: Vec<usize>,
    lambda: usize,
    forms: Vec<BitVector>,
}

impl KeystreamForms {
    pub fn new(spec: &CircuitSpec) -> Self {
        let lambda = spec.lambda();
        Self {
            taps: spec.lfsr.taps().ones_indices().collect(),
            lambda,
            forms: (0..lambda).map(|i| BitVector::unit(lambda, i)).collect(),
        }
    }

    fn extend_to(&mut self, t: usize) {
        while self.forms.len() <= t {
            let base = self.forms.len() - self.lambda;
            let mut next = BitVector::zeros(self.lambda);
            for &j in &self.taps {
                next.xor_assign(&self.forms[base + j]);
            }
            self.forms.push(next);
        }
    }

    /// Coefficient row of `f_0^t`.
    pub fn form(&mut self, t: usize) -> &BitVector {
        self.extend_to(t);
        &self.forms[t]
    }

    /// Coefficient row of stage `stage` at cycle `cycle`, i.e. row `stage`
    /// of `T^cycle`.
    pub fn key(&mut self, stage: usize, cycle: usize) -> &BitVector {
        self.form(stage + cycle)
    }
}

fn check_direct(spec: &CircuitSpec, op: &'static str) -> Result<(), AttackError> {
    if spec.misr.is_some() {
        return Err(AttackError::NeedsDirectAccess(op));
    }
    Ok(())
}

fn check_keyed(spec: &CircuitSpec, m: usize) -> Result<(), AttackError> {
    let first = spec.chain.first_keyed_input();
    if m < first {
        return Err(AttackError::PartiallyKeyed { m, first });
    }
    Ok(())
}

/// Coefficient row of scan-out bit `m`: `a = Σ_j r_j · T^{m + j·b}`.
pub fn coefficient_row(spec: &CircuitSpec, m: usize) -> Result<BitVector, AttackError> {
    check_direct(spec, "coefficient_row")?;
    check_keyed(spec, m)?;
    let mut forms = KeystreamForms::new(spec);
    Ok(scan_out_row(spec, &mut forms, m))
}

fn scan_out_row(spec: &CircuitSpec, forms: &mut KeystreamForms, m: usize) -> BitVector {
    let b = spec.chain.spacing();
    let mut row = BitVector::zeros(spec.lambda());
    for j in 0..spec.chain.num_gates() {
        row.xor_assign(forms.key(j, m + j * b));
    }
    row
}

/// Same row as [`coefficient_row`], assembled from explicit matrix powers:
/// row `j` of `T^{m + j·b}` summed over the gates. Quadratic in λ per power,
/// so only meant for cross-checking on small instances.
pub fn coefficient_row_by_powers(spec: &CircuitSpec, m: usize) -> Result<BitVector, AttackError> {
    check_direct(spec, "coefficient_row_by_powers")?;
    check_keyed(spec, m)?;
    let t = spec.lfsr.transition_matrix();
    let b = spec.chain.spacing();
    let mut row = BitVector::zeros(spec.lambda());
    for j in 0..spec.chain.num_gates() {
        let power = t.pow((m + j * b) as u64)?;
        row.xor_assign(&power.row(j));
    }
    Ok(row)
}

fn require_fresh(oracle: &Oracle) -> Result<(), AttackError> {
    match oracle.cycle() {
        0 => Ok(()),
        c => Err(AttackError::OracleAdvanced(c)),
    }
}

/// Flushes a fresh oracle and pairs λ fully keyed scan-out bits with their
/// coefficient rows. Under a shadow chain the first `N` outputs carry no key
/// and are skipped.
pub fn build_system(oracle: &mut Oracle) -> Result<CoefficientSystem, AttackError> {
    let spec = oracle.spec().clone();
    check_direct(&spec, "build_system")?;
    require_fresh(oracle)?;
    let structure = symbolic_system(&spec)?;
    structure.observe(oracle)
}

/// The seed-independent half of a [`CoefficientSystem`]: the coefficient
/// matrix and the queries whose answers fill in the right-hand side.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SymbolicSystem {
    pub a_matrix: BitMatrix,
    pub sources: Vec<EquationSource>,
    pub protocol: Protocol,
}

impl SymbolicSystem {
    /// Queries a fresh oracle and pairs the answers with the rows.
    pub fn observe(self, oracle: &mut Oracle) -> Result<CoefficientSystem, AttackError> {
        require_fresh(oracle)?;
        let observations = self.protocol.observe(oracle)?;
        Ok(CoefficientSystem {
            a_matrix: self.a_matrix,
            observations,
            sources: self.sources,
            protocol: self.protocol,
        })
    }
}

/// Builds the coefficient matrix for either topology from structure alone.
pub fn symbolic_system(spec: &CircuitSpec) -> Result<SymbolicSystem, AttackError> {
    match &spec.misr {
        None => {
            let protocol = Protocol::Flush {
                skip: spec.chain.first_keyed_input(),
                count: spec.lambda(),
            };
            let (a_matrix, sources) = direct_rows(spec, protocol)?;
            Ok(SymbolicSystem {
                a_matrix,
                sources,
                protocol,
            })
        }
        Some(misr) => {
            let h = misr.h();
            let rounds = spec.chain.len();
            if rounds * h != spec.lambda() {
                return Err(SimError::MisrGeometry {
                    lambda: spec.lambda(),
                    h,
                    n: rounds,
                }
                .into());
            }
            let a_matrix = misr_signature_rows(spec, rounds)?;
            let sources = (0..rounds)
                .flat_map(|round| (0..h).map(move |stage| EquationSource::Signature { round, stage }))
                .collect();
            Ok(SymbolicSystem {
                a_matrix,
                sources,
                protocol: Protocol::MisrRounds { rounds },
            })
        }
    }
}

fn direct_rows(spec: &CircuitSpec, protocol: Protocol) -> Result<(BitMatrix, Vec<EquationSource>), AttackError> {
    let Protocol::Flush { skip, count } = protocol else {
        unreachable!("direct rows come from a flush");
    };
    check_keyed(spec, skip)?;
    let mut forms = KeystreamForms::new(spec);
    let mut a = BitMatrix::zeros(count, spec.lambda());
    let mut sources = Vec::with_capacity(count);
    for k in 0..count {
        let m = skip + k;
        let row = scan_out_row(spec, &mut forms, m);
        a.row_words_mut(k).copy_from_slice(row.words());
        sources.push(EquationSource::ScanOut { m });
    }
    Ok((a, sources))
}

/// Symbolic signature rows for `rounds` back-to-back MISR test rounds
/// starting at cycle 0. One λ-bit row is kept per MISR stage and stepped
/// through the same recurrence as the hardware.
pub fn misr_signature_rows(spec: &CircuitSpec, rounds: usize) -> Result<BitMatrix, AttackError> {
    let misr = spec
        .misr
        .as_ref()
        .ok_or(AttackError::NeedsMisr("misr_signature_rows"))?;
    let (lambda, h) = (spec.lambda(), misr.h());
    let chain = spec.chain;
    let n = chain.len();
    let mut forms = KeystreamForms::new(spec);
    let mut out = BitMatrix::zeros(rounds * h, lambda);
    let mut stages = vec![BitVector::zeros(lambda); h];
    let mut im = vec![BitVector::zeros(lambda); h];
    for round in 0..rounds {
        stages.iter_mut().for_each(|d| *d = BitVector::zeros(lambda));
        for local in 0..2 * n {
            let t = round * 2 * n + local;
            // Chain outputs at cycle t: the bit injected at t - N, keyed by
            // gate r at cycle t - N + r.
            for (i, row) in im.iter_mut().enumerate() {
                *row = BitVector::zeros(lambda);
                for r in 0..n {
                    if t + r < n {
                        continue;
                    }
                    let key_cycle = t + r - n;
                    if chain.gate_active(r, key_cycle as u64) {
                        row.xor_assign(forms.key(spec.stage_of(i, r), key_cycle));
                    }
                }
            }
            let last = stages[h - 1].clone();
            for i in (0..h).rev() {
                let mut next = im[i].clone();
                if i > 0 {
                    next.xor_assign(&stages[i - 1]);
                }
                if misr.taps().get(i) {
                    next.xor_assign(&last);
                }
                stages[i] = next;
            }
        }
        for (i, d) in stages.iter().enumerate() {
            out.row_words_mut(round * h + i).copy_from_slice(d.words());
        }
    }
    Ok(out)
}

/// MISR variant of [`build_system`]: `N` rounds of `h` signature bits give λ
/// equations.
pub fn misr_build_system(oracle: &mut Oracle) -> Result<CoefficientSystem, AttackError> {
    let spec = oracle.spec().clone();
    if spec.misr.is_none() {
        return Err(AttackError::NeedsMisr("misr_build_system"));
    }
    require_fresh(oracle)?;
    symbolic_system(&spec)?.observe(oracle)
}

/// Builds the system appropriate to the oracle's topology.
pub fn build_any_system(oracle: &mut Oracle) -> Result<CoefficientSystem, AttackError> {
    if oracle.spec().misr.is_some() {
        misr_build_system(oracle)
    } else {
        build_system(oracle)
    }
}

/// The affine set of seeds consistent with the observations:
/// `particular ⊕ span(kernel_basis)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SeedSolution {
    pub particular: BitVector,
    pub kernel_basis: Vec<BitVector>,
    pub rank: usize,
}

impl SeedSolution {
    pub fn lambda(&self) -> usize {
        self.particular.len()
    }

    /// `log2` of the number of candidates.
    pub fn kernel_dim(&self) -> usize {
        self.kernel_basis.len()
    }

    pub fn is_unique(&self) -> bool {
        self.kernel_basis.is_empty()
    }

    /// `2^(λ - rank)`, or `None` if it does not fit in a `u128`.
    pub fn candidate_count(&self) -> Option<u128> {
        1u128.checked_shl(self.kernel_dim() as u32)
    }

    /// Whether `seed` lies in the candidate set.
    pub fn contains(&self, seed: &BitVector) -> bool {
        if seed.len() != self.lambda() {
            return false;
        }
        let mut diff = seed.clone();
        diff.xor_assign(&self.particular);
        if diff.is_zero() {
            return true;
        }
        if self.kernel_basis.is_empty() {
            return false;
        }
        let basis = BitMatrix::from_rows(self.lambda(), &self.kernel_basis).expect("basis rows have length λ");
        basis.transpose().solve(&diff).expect("shape matches").is_some()
    }
}

/// Solves the system. An inconsistent system means the symbolic model does
/// not describe the oracle and is reported as [`AttackError::ModelMismatch`].
pub fn solve_seed(system: &CoefficientSystem) -> Result<SeedSolution, AttackError> {
    let (solution, echelon) = system.a_matrix.solve_with_echelon(&system.observations)?;
    let particular = solution.ok_or(AttackError::ModelMismatch {
        rows: system.a_matrix.rows(),
        rank: echelon.rank,
    })?;
    Ok(SeedSolution {
        particular,
        kernel_basis: echelon.null_space_basis(),
        rank: echelon.rank,
    })
}

/// Candidates listed by [`enumerate_seeds`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Enumeration {
    pub seeds: Vec<BitVector>,
    /// `false` when the cap cut the listing short.
    pub exhausted: bool,
}

/// Lists `particular ⊕ Σ kernel subsets` in Gray-code order, at most `cap`
/// entries.
pub fn enumerate_seeds(solution: &SeedSolution, cap: usize) -> Enumeration {
    let k = solution.kernel_dim();
    let total = solution.candidate_count();
    let take = match total {
        Some(t) if t <= cap as u128 => t as usize,
        _ => cap,
    };
    let mut seeds = Vec::with_capacity(take.min(1 << 16));
    let mut current = solution.particular.clone();
    for i in 0..take {
        if i > 0 {
            let flip = (i as u64).trailing_zeros() as usize;
            debug_assert!(flip < k);
            current.xor_assign(&solution.kernel_basis[flip]);
        }
        seeds.push(current.clone());
    }
    Enumeration {
        seeds,
        exhausted: total.is_some_and(|t| t <= cap as u128),
    }
}

/// Replays `protocol` on a fresh oracle keyed with `candidate` and compares
/// every observed bit.
pub fn verify_seed(
    spec: &CircuitSpec,
    protocol: Protocol,
    observations: &BitVector,
    candidate: &BitVector,
) -> Result<bool, AttackError> {
    let mut oracle = Oracle::new(spec.clone(), candidate.clone())?;
    Ok(protocol.observe(&mut oracle)? == *observations)
}

/// Every seed whose simulated observations match, found by exhaustive
/// simulation. Independent of the symbolic model; used as ground truth.
pub fn brute_force_seeds(
    spec: &CircuitSpec,
    protocol: Protocol,
    observations: &BitVector,
) -> Result<Vec<BitVector>, AttackError> {
    let lambda = spec.lambda();
    if lambda > BRUTE_FORCE_MAX_LAMBDA {
        return Err(AttackError::BruteForceTooLarge {
            lambda,
            max: BRUTE_FORCE_MAX_LAMBDA,
        });
    }
    let expected = protocol.observation_len(spec);
    if observations.len() != expected {
        return Err(AttackError::ObservationLength {
            expected,
            got: observations.len(),
        });
    }
    let mut found = Vec::new();
    for word in 0u64..1 << lambda {
        let seed = BitVector::from_words(lambda, vec![word])?;
        if verify_seed(spec, protocol, observations, &seed)? {
            found.push(seed);
        }
    }
    Ok(found)
}

/// Set view of candidate lists, for order-insensitive comparison.
pub fn seed_set(seeds: &[BitVector]) -> HashSet<BitVector> {
    seeds.iter().cloned().collect()
}

//! Cycle-accurate model of an LFSR-obfuscated scan chain.
//!
//! Timing conventions used throughout the crate:
//!
//! * Cycle `t` sees LFSR state `f^t`; the LFSR advances once per cycle and is
//!   never reset after construction.
//! * Locking gates are numbered from the scan-in side. Gate `j` of a chain
//!   sits at depth `j·b` and feeds flip-flop `j·b`. A bit injected at cycle
//!   `m` passes gate `j` at cycle `m + j·b` and is observed on scan-out at
//!   cycle `m + N`.
//! * With the shadow chain enabled, the gate at depth `p` only becomes active
//!   at cycle `N + p`. Bits injected before cycle `N` therefore pass through
//!   unkeyed and every later bit sees every gate.
//! * In compressed mode, `h` chains of length `N` each hold `N` gates
//!   (`b = 1`); gate `r` of chain `i` is keyed by LFSR stage `r + i·N`, and
//!   the chain outputs feed a MISR that is reset at the start of every
//!   `2N`-cycle test round.

use crate::gf2::{BitMatrix, BitVector};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum SimError {
    #[error("LFSR needs at least 2 stages, got {0}")]
    LfsrTooShort(usize),
    #[error("LFSR taps are all zero")]
    NoTaps,
    #[error("gate spacing must be at least 1")]
    ZeroSpacing,
    #[error("chain of {n} flip-flops cannot hold {gates} gates spaced {b} apart (need N = gates * b)")]
    ChainGeometry { n: usize, b: usize, gates: usize },
    #[error("MISR needs at least one stage")]
    EmptyMisr,
    #[error("LFSR length {lambda} must equal MISR length {h} times chain length {n}")]
    MisrGeometry { lambda: usize, h: usize, n: usize },
    #[error("chain has {gates} gates but the LFSR has {lambda} stages")]
    GateCount { gates: usize, lambda: usize },
    #[error("seed has {got} bits, LFSR has {lambda} stages")]
    SeedLength { got: usize, lambda: usize },
    #[error("{0} requires a MISR")]
    MisrRequired(&'static str),
    #[error("{0} requires direct scan-out access (no MISR)")]
    MisrPresent(&'static str),
}

/// Feedback structure of a Fibonacci LFSR: stage `i` takes stage `i + 1`,
/// the last stage takes the XOR of the tapped stages.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct LfsrSpec {
    taps: BitVector,
}

impl LfsrSpec {
    pub fn new(taps: BitVector) -> Result<Self, SimError> {
        if taps.len() < 2 {
            return Err(SimError::LfsrTooShort(taps.len()));
        }
        if taps.is_zero() {
            return Err(SimError::NoTaps);
        }
        Ok(Self { taps })
    }

    pub fn lambda(&self) -> usize {
        self.taps.len()
    }

    pub fn taps(&self) -> &BitVector {
        &self.taps
    }

    /// Companion matrix `T` with `f^{t+1} = T·f^t`.
    pub fn transition_matrix(&self) -> BitMatrix {
        let n = self.lambda();
        let mut t = BitMatrix::zeros(n, n);
        for i in 0..n - 1 {
            t.set(i, i + 1, true);
        }
        for j in self.taps.ones_indices() {
            t.set(n - 1, j, true);
        }
        t
    }

    pub fn feedback(&self, state: &BitVector) -> bool {
        self.taps.dot(state).expect("state length checked by caller")
    }

    /// One clock of the register.
    pub fn step(&self, state: &BitVector) -> BitVector {
        assert_eq!(state.len(), self.lambda(), "LFSR state length");
        let mut next = state.clone();
        self.step_in_place(&mut next);
        next
    }

    pub(crate) fn step_in_place(&self, state: &mut BitVector) {
        let fb = self.feedback(state);
        state.shift_down(fb);
    }

    /// State after `t` clocks, computed as `T^t · seed`.
    pub fn state_at(&self, seed: &BitVector, t: u64) -> Result<BitVector, SimError> {
        self.check_seed(seed)?;
        let power = self.transition_matrix().pow(t).expect("companion matrix is square");
        Ok(power.mul_vec(seed).expect("seed length checked"))
    }

    pub(crate) fn check_seed(&self, seed: &BitVector) -> Result<(), SimError> {
        if seed.len() != self.lambda() {
            return Err(SimError::SeedLength {
                got: seed.len(),
                lambda: self.lambda(),
            });
        }
        Ok(())
    }
}

/// Geometry of one locked scan chain.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct ScanChainSpec {
    n: usize,
    b: usize,
    num_gates: usize,
    shadow: bool,
}

impl ScanChainSpec {
    /// `num_gates` gates spaced `b` apart; the chain length is `num_gates·b`.
    pub fn new(num_gates: usize, b: usize, shadow: bool) -> Result<Self, SimError> {
        if b == 0 {
            return Err(SimError::ZeroSpacing);
        }
        Self::from_parts(num_gates * b, b, num_gates, shadow)
    }

    pub fn from_parts(n: usize, b: usize, num_gates: usize, shadow: bool) -> Result<Self, SimError> {
        if b == 0 {
            return Err(SimError::ZeroSpacing);
        }
        if num_gates == 0 || n != num_gates * b {
            return Err(SimError::ChainGeometry { n, b, gates: num_gates });
        }
        Ok(Self {
            n,
            b,
            num_gates,
            shadow,
        })
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    pub fn spacing(&self) -> usize {
        self.b
    }

    pub fn num_gates(&self) -> usize {
        self.num_gates
    }

    pub fn shadow(&self) -> bool {
        self.shadow
    }

    pub fn with_shadow(self, shadow: bool) -> Self {
        Self { shadow, ..self }
    }

    /// Whether the gate at flip-flop depth `depth` applies its key at `cycle`.
    #[inline]
    pub fn gate_active(&self, depth: usize, cycle: u64) -> bool {
        !self.shadow || cycle >= (self.n + depth) as u64
    }

    /// First scan-in index whose bit sees every gate.
    pub fn first_keyed_input(&self) -> usize {
        if self.shadow {
            self.n
        } else {
            0
        }
    }
}

/// Multiple-input signature register: `h` stages with feedback taps `d`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct MisrSpec {
    taps: BitVector,
}

impl MisrSpec {
    pub fn new(taps: BitVector) -> Result<Self, SimError> {
        if taps.is_empty() {
            return Err(SimError::EmptyMisr);
        }
        Ok(Self { taps })
    }

    pub fn all_ones(h: usize) -> Result<Self, SimError> {
        Self::new(BitVector::ones(h))
    }

    pub fn h(&self) -> usize {
        self.taps.len()
    }

    pub fn taps(&self) -> &BitVector {
        &self.taps
    }

    /// One MISR clock: `D_0 ← in_0 ⊕ d_0·D_{h-1}`,
    /// `D_i ← in_i ⊕ D_{i-1} ⊕ d_i·D_{h-1}`.
    pub fn clock(&self, state: &mut BitVector, inputs: &BitVector) {
        let last = state.get(self.h() - 1);
        state.shift_up(false);
        state.xor_assign(inputs);
        if last {
            state.xor_assign(&self.taps);
        }
    }
}

/// Everything the attacker knows about the defended circuit.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct CircuitSpec {
    pub lfsr: LfsrSpec,
    /// Geometry of each scan chain.
    pub chain: ScanChainSpec,
    /// When present, `h` chains feed the MISR and scan-out is not directly
    /// observable.
    pub misr: Option<MisrSpec>,
}

impl CircuitSpec {
    /// Single chain read directly at scan-out.
    pub fn direct(lfsr: LfsrSpec, chain: ScanChainSpec) -> Result<Self, SimError> {
        if chain.num_gates() != lfsr.lambda() {
            return Err(SimError::GateCount {
                gates: chain.num_gates(),
                lambda: lfsr.lambda(),
            });
        }
        Ok(Self {
            lfsr,
            chain,
            misr: None,
        })
    }

    /// `h` chains of length `λ/h` with one gate per flip-flop, compacted by
    /// `misr`.
    pub fn compressed(lfsr: LfsrSpec, misr: MisrSpec, shadow: bool) -> Result<Self, SimError> {
        let (lambda, h) = (lfsr.lambda(), misr.h());
        if lambda % h != 0 {
            return Err(SimError::MisrGeometry {
                lambda,
                h,
                n: lambda / h,
            });
        }
        let chain = ScanChainSpec::new(lambda / h, 1, shadow)?;
        Ok(Self {
            lfsr,
            chain,
            misr: Some(misr),
        })
    }

    pub fn lambda(&self) -> usize {
        self.lfsr.lambda()
    }

    pub fn num_chains(&self) -> usize {
        self.misr.as_ref().map_or(1, MisrSpec::h)
    }

    /// LFSR stage driving gate `gate` of chain `chain`.
    #[inline]
    pub fn stage_of(&self, chain: usize, gate: usize) -> usize {
        gate + chain * self.chain.num_gates()
    }

    fn validate(&self) -> Result<(), SimError> {
        match &self.misr {
            None if self.chain.num_gates() != self.lambda() => Err(SimError::GateCount {
                gates: self.chain.num_gates(),
                lambda: self.lambda(),
            }),
            Some(m) if self.chain.spacing() != 1 || m.h() * self.chain.len() != self.lambda() => {
                Err(SimError::MisrGeometry {
                    lambda: self.lambda(),
                    h: m.h(),
                    n: self.chain.len(),
                })
            }
            _ => Ok(()),
        }
    }
}

/// Live register contents of the oracle.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OracleState {
    /// Current LFSR stages `f_0..f_{λ-1}`.
    pub lfsr: BitVector,
    /// Flip-flop contents per chain, index 0 nearest scan-in.
    pub chains: Vec<BitVector>,
    /// MISR stages `D_0..D_{h-1}` (empty without a MISR).
    pub misr: BitVector,
    pub cycle: u64,
}

/// The working, correctly keyed chip the attacker can clock.
#[derive(Debug, Clone)]
pub struct Oracle {
    spec: CircuitSpec,
    state: OracleState,
}

impl Oracle {
    pub fn new(spec: CircuitSpec, seed: BitVector) -> Result<Self, SimError> {
        spec.validate()?;
        spec.lfsr.check_seed(&seed)?;
        let chains = vec![BitVector::zeros(spec.chain.len()); spec.num_chains()];
        let misr = BitVector::zeros(spec.misr.as_ref().map_or(0, MisrSpec::h));
        Ok(Self {
            spec,
            state: OracleState {
                lfsr: seed,
                chains,
                misr,
                cycle: 0,
            },
        })
    }

    pub fn spec(&self) -> &CircuitSpec {
        &self.spec
    }

    pub fn state(&self) -> &OracleState {
        &self.state
    }

    pub fn cycle(&self) -> u64 {
        self.state.cycle
    }

    /// The LFSR state one clock ahead, without clocking.
    pub fn lfsr_step(&self) -> BitVector {
        self.spec.lfsr.step(&self.state.lfsr)
    }

    /// One full clock of the circuit. Returns the scan-out value of every
    /// chain as seen during this cycle, i.e. before the shift.
    pub fn clock(&mut self, scan_in: &BitVector) -> BitVector {
        let num_chains = self.spec.num_chains();
        assert_eq!(scan_in.len(), num_chains, "one scan-in bit per chain");
        let t = self.state.cycle;
        let chain = self.spec.chain;
        let mut outputs = BitVector::zeros(num_chains);
        for i in 0..num_chains {
            let ffs = &mut self.state.chains[i];
            if ffs.shift_up(scan_in.get(i)) {
                outputs.set(i, true);
            }
            for g in 0..chain.num_gates() {
                let depth = g * chain.spacing();
                if chain.gate_active(depth, t) && self.state.lfsr.get(self.spec.stage_of(i, g)) {
                    ffs.flip(depth);
                }
            }
        }
        if let Some(misr) = &self.spec.misr {
            misr.clock(&mut self.state.misr, &outputs);
        }
        self.spec.lfsr.step_in_place(&mut self.state.lfsr);
        self.state.cycle += 1;
        outputs
    }

    /// Flushes zeros through a directly observable chain and returns the
    /// scan-out bit belonging to each of the first `num_outputs` injected
    /// zeros. Runs `num_outputs + N` cycles; the first `N` observed bits are
    /// the chain's earlier contents and are dropped.
    pub fn flush_scan(&mut self, num_outputs: usize) -> Result<BitVector, SimError> {
        if self.spec.misr.is_some() {
            return Err(SimError::MisrPresent("flush_scan"));
        }
        let n = self.spec.chain.len();
        let zero = BitVector::zeros(1);
        let mut observed = BitVector::zeros(num_outputs);
        for k in 0..num_outputs + n {
            let out = self.clock(&zero).get(0);
            if k >= n && out {
                observed.set(k - n, true);
            }
        }
        Ok(observed)
    }

    /// One test round: reset the MISR, flush zeros for `2N` cycles and read
    /// the signature. Scan chains and LFSR carry over between rounds.
    pub fn misr_round(&mut self) -> Result<BitVector, SimError> {
        let h = self.spec.misr.as_ref().ok_or(SimError::MisrRequired("misr_round"))?.h();
        self.state.misr = BitVector::zeros(h);
        let zeros = BitVector::zeros(h);
        for _ in 0..2 * self.spec.chain.len() {
            self.clock(&zeros);
        }
        Ok(self.state.misr.clone())
    }

    pub fn run_rounds(&mut self, rounds: usize) -> Result<Vec<BitVector>, SimError> {
        if self.spec.misr.is_none() {
            return Err(SimError::MisrRequired("run_rounds"));
        }
        (0..rounds).map(|_| self.misr_round()).collect()
    }
}

//! Python bindings. Bit vectors cross the boundary as `"0110"` strings
//! (element 0 first); any argument taking bits also accepts a list of 0/1
//! integers.

use gf_flush::attack::{
    brute_force_seeds, coefficient_row, enumerate_seeds, solve_seed, symbolic_system, verify_seed,
    DEFAULT_ENUMERATION_CAP,
};
use gf_flush::{BitMatrix, BitVector, CircuitSpec, CoefficientSystem, LfsrSpec, MisrSpec, Oracle, ScanChainSpec};
use gf_flush::{SeedSolution, SymbolicSystem};
use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;

fn value_err(e: impl std::fmt::Display) -> PyErr {
    PyValueError::new_err(e.to_string())
}

fn bits(obj: &Bound<'_, PyAny>) -> PyResult<BitVector> {
    if let Ok(s) = obj.extract::<String>() {
        return s.parse().map_err(value_err);
    }
    let list: Vec<u8> = obj.extract()?;
    if let Some(bad) = list.iter().find(|&&b| b > 1) {
        return Err(PyValueError::new_err(format!("bit values must be 0 or 1, got {bad}")));
    }
    Ok(BitVector::from_bits(&list))
}

fn matrix(rows: &[Bound<'_, PyAny>]) -> PyResult<BitMatrix> {
    let rows = rows.iter().map(bits).collect::<PyResult<Vec<_>>>()?;
    let cols = rows.first().map_or(0, BitVector::len);
    BitMatrix::from_rows(cols, &rows).map_err(value_err)
}

/// LFSR structure: taps `c_0..c_{λ-1}`.
#[pyclass(name = "Lfsr", frozen)]
struct PyLfsr(LfsrSpec);

#[pymethods]
impl PyLfsr {
    #[new]
    fn new(taps: &Bound<'_, PyAny>) -> PyResult<Self> {
        LfsrSpec::new(bits(taps)?).map(Self).map_err(value_err)
    }

    #[getter]
    fn lambda_(&self) -> usize {
        self.0.lambda()
    }

    #[getter]
    fn taps(&self) -> String {
        self.0.taps().to_string()
    }

    fn step(&self, state: &Bound<'_, PyAny>) -> PyResult<String> {
        let state = bits(state)?;
        if state.len() != self.0.lambda() {
            return Err(PyValueError::new_err(format!(
                "expected {} bits, got {}",
                self.0.lambda(),
                state.len()
            )));
        }
        Ok(self.0.step(&state).to_string())
    }

    /// State after `t` clocks, computed with matrix powers.
    fn state_at(&self, seed: &Bound<'_, PyAny>, t: u64) -> PyResult<String> {
        Ok(self.0.state_at(&bits(seed)?, t).map_err(value_err)?.to_string())
    }

    /// Rows of the transition matrix `T`.
    fn transition_matrix(&self) -> Vec<String> {
        self.0
            .transition_matrix()
            .row_vectors()
            .iter()
            .map(ToString::to_string)
            .collect()
    }

    fn __repr__(&self) -> String {
        format!("Lfsr('{}')", self.0.taps())
    }
}

/// A locked scan circuit: LFSR, scan chain(s) and optional MISR.
#[pyclass(name = "Circuit", frozen)]
#[derive(Clone)]
struct PyCircuit(CircuitSpec);

#[pymethods]
impl PyCircuit {
    /// One chain with λ gates spaced `b` flip-flops apart, read directly.
    #[staticmethod]
    #[pyo3(signature = (taps, b = 1, shadow = true))]
    fn direct(taps: &Bound<'_, PyAny>, b: usize, shadow: bool) -> PyResult<Self> {
        let lfsr = LfsrSpec::new(bits(taps)?).map_err(value_err)?;
        let chain = ScanChainSpec::new(lfsr.lambda(), b, shadow).map_err(value_err)?;
        CircuitSpec::direct(lfsr, chain).map(Self).map_err(value_err)
    }

    /// `h` chains of λ/h flip-flops compacted by a MISR (all-ones taps by default).
    #[staticmethod]
    #[pyo3(signature = (taps, h, misr_taps = None, shadow = false))]
    fn compressed(
        taps: &Bound<'_, PyAny>,
        h: usize,
        misr_taps: Option<&Bound<'_, PyAny>>,
        shadow: bool,
    ) -> PyResult<Self> {
        let lfsr = LfsrSpec::new(bits(taps)?).map_err(value_err)?;
        let misr = match misr_taps {
            Some(d) => MisrSpec::new(bits(d)?),
            None => MisrSpec::all_ones(h),
        }
        .map_err(value_err)?;
        if misr.h() != h {
            return Err(PyValueError::new_err(format!(
                "misr_taps has {} bits, expected h = {h}",
                misr.h()
            )));
        }
        CircuitSpec::compressed(lfsr, misr, shadow).map(Self).map_err(value_err)
    }

    #[getter]
    fn lambda_(&self) -> usize {
        self.0.lambda()
    }

    #[getter]
    fn num_chains(&self) -> usize {
        self.0.num_chains()
    }

    #[getter]
    fn chain_len(&self) -> usize {
        self.0.chain.len()
    }

    #[getter]
    fn shadow(&self) -> bool {
        self.0.chain.shadow()
    }

    #[getter]
    fn lfsr(&self) -> PyLfsr {
        PyLfsr(self.0.lfsr.clone())
    }

    /// Same circuit with the shadow chain switched on or off.
    fn with_shadow(&self, shadow: bool) -> Self {
        Self(CircuitSpec {
            chain: self.0.chain.with_shadow(shadow),
            ..self.0.clone()
        })
    }

    /// Coefficient row predicting the scan-out bit for scan-in index `m`.
    fn coefficient_row(&self, m: usize) -> PyResult<String> {
        Ok(coefficient_row(&self.0, m).map_err(value_err)?.to_string())
    }

    /// The seed-independent attack system for this circuit.
    fn attack_system(&self) -> PyResult<PyAttackSystem> {
        let system = symbolic_system(&self.0).map_err(value_err)?;
        Ok(PyAttackSystem {
            spec: self.0.clone(),
            system,
        })
    }

    fn __repr__(&self) -> String {
        format!(
            "Circuit(lambda={}, chains={}, chain_len={}, shadow={})",
            self.0.lambda(),
            self.0.num_chains(),
            self.0.chain.len(),
            self.0.chain.shadow()
        )
    }
}

/// A live oracle: the circuit with a secret seed loaded.
#[pyclass(name = "Oracle")]
struct PyOracle(Oracle);

#[pymethods]
impl PyOracle {
    #[new]
    fn new(circuit: &PyCircuit, seed: &Bound<'_, PyAny>) -> PyResult<Self> {
        Oracle::new(circuit.0.clone(), bits(seed)?).map(Self).map_err(value_err)
    }

    #[getter]
    fn cycle(&self) -> u64 {
        self.0.cycle()
    }

    /// Current LFSR state.
    #[getter]
    fn lfsr_state(&self) -> String {
        self.0.state().lfsr.to_string()
    }

    /// One clock with one scan-in bit per chain; returns the scan-out bits.
    fn clock(&mut self, scan_in: &Bound<'_, PyAny>) -> PyResult<String> {
        let scan_in = bits(scan_in)?;
        if scan_in.len() != self.0.spec().num_chains() {
            return Err(PyValueError::new_err(format!(
                "expected {} scan-in bits, got {}",
                self.0.spec().num_chains(),
                scan_in.len()
            )));
        }
        Ok(self.0.clock(&scan_in).to_string())
    }

    /// Shifts zeros in and returns `num_outputs` scan-out bits.
    fn flush(&mut self, num_outputs: usize) -> PyResult<String> {
        Ok(self.0.flush_scan(num_outputs).map_err(value_err)?.to_string())
    }

    /// One MISR test round; returns the signature.
    fn misr_round(&mut self) -> PyResult<String> {
        Ok(self.0.misr_round().map_err(value_err)?.to_string())
    }
}

/// Coefficient matrix plus the oracle queries that fill in its right-hand side.
#[pyclass(name = "AttackSystem", frozen)]
struct PyAttackSystem {
    spec: CircuitSpec,
    system: SymbolicSystem,
}

impl PyAttackSystem {
    fn with_observations(&self, observations: &Bound<'_, PyAny>) -> PyResult<CoefficientSystem> {
        let observations = bits(observations)?;
        let expected = self.system.protocol.observation_len(&self.spec);
        if observations.len() != expected {
            return Err(PyValueError::new_err(format!(
                "expected {expected} observation bits, got {}",
                observations.len()
            )));
        }
        Ok(CoefficientSystem {
            a_matrix: self.system.a_matrix.clone(),
            observations,
            sources: self.system.sources.clone(),
            protocol: self.system.protocol,
        })
    }
}

#[pymethods]
impl PyAttackSystem {
    #[getter]
    fn rows(&self) -> Vec<String> {
        self.system
            .a_matrix
            .row_vectors()
            .iter()
            .map(ToString::to_string)
            .collect()
    }

    #[getter]
    fn num_equations(&self) -> usize {
        self.system.a_matrix.rows()
    }

    /// Runs the attack's queries against a fresh oracle keyed with `seed`.
    fn observe(&self, seed: &Bound<'_, PyAny>) -> PyResult<String> {
        let mut oracle = Oracle::new(self.spec.clone(), bits(seed)?).map_err(value_err)?;
        Ok(self
            .system
            .protocol
            .observe(&mut oracle)
            .map_err(value_err)?
            .to_string())
    }

    /// Solves for every seed consistent with `observations`.
    fn solve(&self, observations: &Bound<'_, PyAny>) -> PyResult<PySeedSolution> {
        let system = self.with_observations(observations)?;
        solve_seed(&system).map(PySeedSolution).map_err(value_err)
    }

    /// Replays the queries with `candidate` and compares with `observations`.
    fn verify(&self, observations: &Bound<'_, PyAny>, candidate: &Bound<'_, PyAny>) -> PyResult<bool> {
        let system = self.with_observations(observations)?;
        verify_seed(&self.spec, system.protocol, &system.observations, &bits(candidate)?).map_err(value_err)
    }

    /// Exhaustive search over all 2^λ seeds (λ ≤ 20).
    fn brute_force(&self, observations: &Bound<'_, PyAny>) -> PyResult<Vec<String>> {
        let system = self.with_observations(observations)?;
        let seeds = brute_force_seeds(&self.spec, system.protocol, &system.observations).map_err(value_err)?;
        Ok(seeds.iter().map(ToString::to_string).collect())
    }
}

/// The affine set `particular ⊕ span(kernel)` of candidate seeds.
#[pyclass(name = "SeedSolution", frozen)]
struct PySeedSolution(SeedSolution);

#[pymethods]
impl PySeedSolution {
    #[getter]
    fn particular(&self) -> String {
        self.0.particular.to_string()
    }

    #[getter]
    fn kernel(&self) -> Vec<String> {
        self.0.kernel_basis.iter().map(ToString::to_string).collect()
    }

    #[getter]
    fn rank(&self) -> usize {
        self.0.rank
    }

    #[getter]
    fn kernel_dim(&self) -> usize {
        self.0.kernel_dim()
    }

    #[getter]
    fn is_unique(&self) -> bool {
        self.0.is_unique()
    }

    /// Number of candidates, `2^kernel_dim`.
    #[getter]
    fn candidate_count(&self) -> num_count::Count {
        num_count::Count(self.0.kernel_dim())
    }

    fn contains(&self, seed: &Bound<'_, PyAny>) -> PyResult<bool> {
        let seed = bits(seed)?;
        if seed.len() != self.0.lambda() {
            return Err(PyValueError::new_err(format!(
                "expected {} bits, got {}",
                self.0.lambda(),
                seed.len()
            )));
        }
        Ok(self.0.contains(&seed))
    }

    /// Lists up to `cap` candidates.
    #[pyo3(signature = (cap = DEFAULT_ENUMERATION_CAP))]
    fn candidates(&self, cap: usize) -> Vec<String> {
        enumerate_seeds(&self.0, cap)
            .seeds
            .iter()
            .map(ToString::to_string)
            .collect()
    }

    fn __repr__(&self) -> String {
        format!("SeedSolution(rank={}, kernel_dim={})", self.0.rank, self.0.kernel_dim())
    }
}

mod num_count {
    use pyo3::prelude::*;
    use pyo3::types::PyInt;

    /// `2^k` as an arbitrary-precision Python int.
    pub struct Count(pub usize);

    impl<'py> IntoPyObject<'py> for Count {
        type Target = PyAny;
        type Output = Bound<'py, PyAny>;
        type Error = PyErr;

        fn into_pyobject(self, py: Python<'py>) -> PyResult<Self::Output> {
            PyInt::new(py, 1u8).into_any().call_method1("__lshift__", (self.0,))
        }
    }
}

/// Rank of the GF(2) matrix with the given rows.
#[pyfunction]
fn gf2_rank(rows: Vec<Bound<'_, PyAny>>) -> PyResult<usize> {
    Ok(matrix(&rows)?.rank())
}

/// One solution of `A·x = rhs` (free variables 0), or `None` if inconsistent.
#[pyfunction]
fn gf2_solve(rows: Vec<Bound<'_, PyAny>>, rhs: &Bound<'_, PyAny>) -> PyResult<Option<String>> {
    let solution = matrix(&rows)?.solve(&bits(rhs)?).map_err(value_err)?;
    Ok(solution.map(|x| x.to_string()))
}

/// Basis of the null space of the matrix with the given rows.
#[pyfunction]
fn gf2_null_space(rows: Vec<Bound<'_, PyAny>>) -> PyResult<Vec<String>> {
    Ok(matrix(&rows)?
        .null_space_basis()
        .iter()
        .map(ToString::to_string)
        .collect())
}

/// Recovers the seed set of `circuit` from a fresh oracle keyed with `seed`.
#[pyfunction]
fn attack(circuit: &PyCircuit, seed: &Bound<'_, PyAny>) -> PyResult<PySeedSolution> {
    let system = circuit.attack_system()?;
    let observations = system.observe(seed)?;
    system.solve(&observations.into_pyobject(seed.py())?.into_any())
}

#[pymodule]
fn gfflush(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyLfsr>()?;
    m.add_class::<PyCircuit>()?;
    m.add_class::<PyOracle>()?;
    m.add_class::<PyAttackSystem>()?;
    m.add_class::<PySeedSolution>()?;
    m.add_function(wrap_pyfunction!(gf2_rank, m)?)?;
    m.add_function(wrap_pyfunction!(gf2_solve, m)?)?;
    m.add_function(wrap_pyfunction!(gf2_null_space, m)?)?;
    m.add_function(wrap_pyfunction!(attack, m)?)?;
    m.add("DEFAULT_ENUMERATION_CAP", DEFAULT_ENUMERATION_CAP)?;
    Ok(())
}

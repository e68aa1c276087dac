//! Python bindings: formula translation, scenarios, missions and the benchmark.

use std::path::PathBuf;

use pyo3::create_exception;
use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;
use pyo3::types::PyList;

use engine::energy::{compute_energy, compute_f_star};
use engine::ltl::{evaluate_word, parse_ltl, translate_to_nba, AtomSet, Label, LassoWord, Nba};
use engine::planner::ViolationScope;
use engine::sim::{
    bench_csv, build_guarded, export_artifacts, run_benchmark, run_mission, BenchConfig, BenchRow,
    MissionLog, MissionOptions, Scenario,
};
use engine::Error;

create_exception!(ltl_rhc, InfeasibleError, PyRuntimeError, "No initial state can reach the accepting set.");

fn to_py(e: Error) -> PyErr {
    match e {
        Error::NoFeasibleStart | Error::EmptyInitial => InfeasibleError::new_err(e.to_string()),
        Error::Io(_) | Error::EmptyCandidates(_) | Error::TooLarge { .. } => PyRuntimeError::new_err(e.to_string()),
        _ => PyValueError::new_err(e.to_string()),
    }
}

fn atom_set(atoms: Vec<String>) -> PyResult<AtomSet> {
    AtomSet::new(atoms).map_err(to_py)
}

fn letters(atoms: &AtomSet, word: Vec<Vec<String>>) -> PyResult<Vec<Label>> {
    word.iter()
        .map(|names| {
            let names: Vec<&str> = names.iter().map(String::as_str).collect();
            atoms.label(&names).map_err(to_py)
        })
        .collect()
}

/// Büchi automaton over a fixed atom set.
#[pyclass(name = "Automaton", module = "ltl_rhc", frozen)]
struct PyAutomaton {
    nba: Nba,
}

#[pymethods]
impl PyAutomaton {
    #[staticmethod]
    fn from_json(text: &str) -> PyResult<Self> {
        Ok(PyAutomaton {
            nba: Nba::from_json(text).map_err(to_py)?,
        })
    }

    fn to_json(&self) -> String {
        self.nba.to_json()
    }

    #[getter]
    fn num_states(&self) -> usize {
        self.nba.num_states()
    }

    #[getter]
    fn num_accepting(&self) -> usize {
        self.nba.num_accepting()
    }

    #[getter]
    fn atoms(&self) -> Vec<String> {
        self.nba.atoms().names().to_vec()
    }

    /// Whether the automaton accepts `prefix · cycle^ω`; letters are lists of true atoms.
    fn accepts(&self, prefix: Vec<Vec<String>>, cycle: Vec<Vec<String>>) -> PyResult<bool> {
        let atoms = self.nba.atoms();
        let w = lasso(atoms, prefix, cycle)?;
        Ok(self.nba.accepts_lasso(&w))
    }

    fn __repr__(&self) -> String {
        format!(
            "Automaton(states={}, accepting={})",
            self.nba.num_states(),
            self.nba.num_accepting()
        )
    }
}

fn lasso(atoms: &AtomSet, prefix: Vec<Vec<String>>, cycle: Vec<Vec<String>>) -> PyResult<LassoWord> {
    if cycle.is_empty() {
        return Err(PyValueError::new_err("cycle must be non-empty"));
    }
    Ok(LassoWord::new(letters(atoms, prefix)?, letters(atoms, cycle)?))
}

#[pyfunction]
fn translate(formula: &str, atoms: Vec<String>) -> PyResult<PyAutomaton> {
    let atoms = atom_set(atoms)?;
    let f = parse_ltl(formula, &atoms).map_err(to_py)?;
    Ok(PyAutomaton {
        nba: translate_to_nba(&f, &atoms),
    })
}

/// Direct semantic check of a formula on a lasso word.
#[pyfunction]
fn evaluate(formula: &str, atoms: Vec<String>, prefix: Vec<Vec<String>>, cycle: Vec<Vec<String>>) -> PyResult<bool> {
    let atoms = atom_set(atoms)?;
    let f = parse_ltl(formula, &atoms).map_err(to_py)?;
    Ok(evaluate_word(&f, &lasso(&atoms, prefix, cycle)?))
}

#[pyclass(name = "Scenario", module = "ltl_rhc", skip_from_py_object)]
#[derive(Clone)]
struct PyScenario {
    inner: Scenario,
}

#[pymethods]
impl PyScenario {
    /// A bundled scenario name (`sim61a`, `exp61b`) or a TOML path.
    #[new]
    fn new(name_or_path: &str) -> PyResult<Self> {
        Ok(PyScenario {
            inner: Scenario::resolve(name_or_path).map_err(to_py)?,
        })
    }

    #[staticmethod]
    fn from_toml(text: &str) -> PyResult<Self> {
        Ok(PyScenario {
            inner: Scenario::from_toml(text).map_err(to_py)?,
        })
    }

    fn to_toml(&self) -> String {
        self.inner.to_toml()
    }

    #[getter]
    fn name(&self) -> String {
        self.inner.name.clone()
    }

    #[getter]
    fn atoms(&self) -> Vec<String> {
        self.inner.atom_set().names().to_vec()
    }

    #[getter]
    fn size(&self) -> (usize, usize) {
        (self.inner.grid.width, self.inner.grid.height)
    }

    #[getter]
    fn hard(&self) -> String {
        self.inner.task.hard.clone()
    }

    #[getter]
    fn soft(&self) -> String {
        self.inner.task.soft.clone()
    }

    #[getter]
    fn seed(&self) -> u64 {
        self.inner.params.seed
    }

    #[setter]
    fn set_seed(&mut self, v: u64) {
        self.inner.params.seed = v;
    }

    #[getter]
    fn horizon(&self) -> usize {
        self.inner.params.horizon
    }

    #[setter]
    fn set_horizon(&mut self, v: usize) -> PyResult<()> {
        self.update(|s| s.params.horizon = v)
    }

    #[getter]
    fn steps(&self) -> usize {
        self.inner.params.steps
    }

    #[setter]
    fn set_steps(&mut self, v: usize) {
        self.inner.params.steps = v;
    }

    #[getter]
    fn beta(&self) -> f64 {
        self.inner.params.beta
    }

    #[setter]
    fn set_beta(&mut self, v: f64) -> PyResult<()> {
        self.update(|s| s.params.beta = v)
    }

    #[getter]
    fn kappa(&self) -> f64 {
        self.inner.params.kappa
    }

    #[setter]
    fn set_kappa(&mut self, v: f64) -> PyResult<()> {
        self.update(|s| s.params.kappa = v)
    }

    /// Copy with every scheduled label toggle removed.
    fn without_toggles(&self) -> Self {
        PyScenario {
            inner: self.inner.without_toggles(),
        }
    }

    /// Sizes of the relaxed product and its accepting set.
    fn product_summary(&self) -> PyResult<ProductSummary> {
        let s = &self.inner;
        let atoms = s.atom_set();
        let hard = translate_to_nba(&s.hard_formula(), &atoms);
        let soft = translate_to_nba(&s.soft_formula(), &atoms);
        let p = build_guarded(s, hard, soft).map_err(to_py)?;
        let f = compute_f_star(&p);
        let e = compute_energy(&p, &f);
        let initial_energy = p.initial().iter().map(|&i| e.j[i]).fold(f64::INFINITY, f64::min);
        Ok(ProductSummary {
            num_q: p.dts().num_states(),
            num_sh: p.hard().num_states(),
            num_ss: p.soft().num_states(),
            num_states: p.num_states(),
            num_edges: p.num_edges(),
            f_star: f.len(),
            initial_energy,
        })
    }

    fn __repr__(&self) -> String {
        let s = &self.inner;
        format!("Scenario({:?}, {}x{})", s.name, s.grid.width, s.grid.height)
    }
}

impl PyScenario {
    fn update(&mut self, f: impl FnOnce(&mut Scenario)) -> PyResult<()> {
        let mut next = self.inner.clone();
        f(&mut next);
        next.validate().map_err(to_py)?;
        self.inner = next;
        Ok(())
    }
}

#[pyclass(module = "ltl_rhc", frozen, get_all)]
struct ProductSummary {
    num_q: usize,
    num_sh: usize,
    num_ss: usize,
    num_states: usize,
    num_edges: usize,
    f_star: usize,
    /// Lowest energy over the initial product states.
    initial_energy: f64,
}

#[pymethods]
impl ProductSummary {
    fn __repr__(&self) -> String {
        format!(
            "ProductSummary(states={}, edges={}, f_star={})",
            self.num_states, self.num_edges, self.f_star
        )
    }
}

#[pyclass(name = "Mission", module = "ltl_rhc", frozen)]
struct PyMission {
    log: MissionLog,
}

#[pymethods]
impl PyMission {
    #[getter]
    fn steps(&self) -> usize {
        self.log.rows.len()
    }

    #[getter]
    fn seed(&self) -> u64 {
        self.log.seed
    }

    fn energy(&self) -> Vec<f64> {
        self.log.energy_trace()
    }

    fn cumulative_reward(&self) -> Vec<f64> {
        self.log.cumulative_reward()
    }

    fn total_violation(&self) -> u64 {
        self.log.total_violation()
    }

    /// Steps whose applied move violated the soft task.
    fn violation_events(&self) -> Vec<usize> {
        self.log.violation_events()
    }

    fn accepting_visits(&self) -> Vec<usize> {
        self.log.accepting_visits()
    }

    /// Executed cells as `(x, y)`, start included.
    fn path(&self) -> Vec<(usize, usize)> {
        let w = self.log.width;
        std::iter::once((self.log.start_cell % w, self.log.start_cell / w))
            .chain(self.log.rows.iter().map(|r| (r.x, r.y)))
            .collect()
    }

    /// Whether no applied move violated the hard task.
    fn is_safe(&self) -> bool {
        self.log.rows.iter().all(|r| r.first_h == 0.0 && !r.entered_obstacle)
    }

    /// One dict per step.
    fn rows<'py>(&self, py: Python<'py>) -> PyResult<Bound<'py, PyAny>> {
        let text = serde_json::to_string(&self.log.rows).map_err(|e| PyRuntimeError::new_err(e.to_string()))?;
        py.import("json")?.call_method1("loads", (text,))
    }

    /// Writes the log, CSV series and SVG into `dir`; returns the paths.
    fn export(&self, dir: PathBuf) -> PyResult<Vec<PathBuf>> {
        export_artifacts(&self.log, &dir).map_err(to_py)
    }

    fn __repr__(&self) -> String {
        format!(
            "Mission({:?}, seed={}, steps={})",
            self.log.scenario,
            self.log.seed,
            self.log.rows.len()
        )
    }
}

#[pyfunction]
#[pyo3(signature = (scenario, *, check_f_star = false, violation_scope = "horizon"))]
fn run(py: Python<'_>, scenario: &PyScenario, check_f_star: bool, violation_scope: &str) -> PyResult<PyMission> {
    let scope: ViolationScope = violation_scope.parse().map_err(PyValueError::new_err)?;
    let s = scenario.inner.clone();
    let opts = MissionOptions {
        check_f_star,
        verify_energy: false,
        scope,
    };
    let log = py.detach(move || run_mission(&s, opts)).map_err(to_py)?;
    Ok(PyMission { log })
}

/// Benchmark rows as CSV text. `rows` is a list of `(scale, horizon)`; the default
/// five-row table if omitted.
#[pyfunction]
#[pyo3(signature = (scenario, rows = None, steps = 20, repetitions = 3))]
fn benchmark(
    py: Python<'_>,
    scenario: &PyScenario,
    rows: Option<Bound<'_, PyList>>,
    steps: usize,
    repetitions: usize,
) -> PyResult<String> {
    let mut cfg = BenchConfig {
        steps,
        repetitions,
        ..BenchConfig::default()
    };
    if let Some(rows) = rows {
        cfg.rows = rows
            .iter()
            .map(|r| {
                let (scale, horizon): (usize, usize) = r.extract()?;
                Ok(BenchRow { scale, horizon })
            })
            .collect::<PyResult<_>>()?;
    }
    let s = scenario.inner.clone();
    let records = py.detach(move || run_benchmark(&s, &cfg)).map_err(to_py)?;
    Ok(bench_csv(&records))
}

#[pymodule]
fn ltl_rhc(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyAutomaton>()?;
    m.add_class::<PyScenario>()?;
    m.add_class::<PyMission>()?;
    m.add_class::<ProductSummary>()?;
    m.add_function(wrap_pyfunction!(translate, m)?)?;
    m.add_function(wrap_pyfunction!(evaluate, m)?)?;
    m.add_function(wrap_pyfunction!(run, m)?)?;
    m.add_function(wrap_pyfunction!(benchmark, m)?)?;
    m.add("InfeasibleError", m.py().get_type::<InfeasibleError>())?;
    Ok(())
}

//! Python bindings. Structured results cross the boundary as JSON and are
//! decoded with the standard `json` module.

use std::path::PathBuf;

use deceptra::belief::{AugConfig, InitialBelief, Mode};
use deceptra::dot::export_dot;
use deceptra::experiments::{illustrative_model, replicate_figs as run_figs, table1 as run_table1};
use deceptra::gridworld::{benchmark_scenario, Coverage, ScenarioFile, SensorKind};
use deceptra::mdp::ObservationModel;
use deceptra::planner::{ssp_refine, synthesize_from, SspPlan, StrategyFile};
use deceptra::sim::{check_theorem, export_trace_csv, simulate_many, CheckConfig, Selection};
use deceptra::{asw, Synthesis as CoreSynthesis};
use pyo3::create_exception;
use pyo3::exceptions::PyException;
use pyo3::prelude::*;
use serde::Serialize;

create_exception!(deceptra, DeceptraError, PyException);

fn err(e: deceptra::Error) -> PyErr {
    DeceptraError::new_err(e.to_string())
}

fn to_py<'py, T: Serialize>(py: Python<'py>, value: &T) -> PyResult<Bound<'py, PyAny>> {
    let text = serde_json::to_string(value).map_err(|e| DeceptraError::new_err(e.to_string()))?;
    py.import("json")?.call_method1("loads", (text,))
}

fn parse_mode(mode: &str) -> PyResult<Mode> {
    match mode {
        "visible" => Ok(Mode::Visible),
        "invisible" => Ok(Mode::Invisible),
        other => Err(DeceptraError::new_err(format!("unknown mode `{other}`"))),
    }
}

/// A validated model: MDP, defender observations and both objectives.
#[pyclass(module = "deceptra", frozen)]
struct Model {
    inner: deceptra::Model,
}

#[pymethods]
impl Model {
    #[staticmethod]
    fn load(path: PathBuf) -> PyResult<Self> {
        deceptra::Model::load(&path).map(|inner| Model { inner }).map_err(err)
    }

    #[staticmethod]
    fn from_json(text: &str) -> PyResult<Self> {
        deceptra::Model::from_json(text)
            .map(|inner| Model { inner })
            .map_err(err)
    }

    /// The bundled illustrative model.
    #[staticmethod]
    fn illustrative() -> Self {
        Model {
            inner: illustrative_model(),
        }
    }

    /// A benchmark gridworld: `config` is "a", "b" or "c".
    #[staticmethod]
    #[pyo3(signature = (config, sensor = "boolean", p = 0.8))]
    fn gridworld(config: &str, sensor: &str, p: f64) -> PyResult<Self> {
        let coverage: Coverage = config.parse().map_err(err)?;
        let kind: SensorKind = sensor.parse().map_err(err)?;
        let sc = benchmark_scenario(coverage, kind, p).map_err(err)?;
        Ok(Model { inner: sc.model })
    }

    /// A gridworld from a TOML or JSON scenario file.
    #[staticmethod]
    fn scenario(path: PathBuf) -> PyResult<Self> {
        let sc = ScenarioFile::load(&path).and_then(|f| f.build()).map_err(err)?;
        Ok(Model { inner: sc.model })
    }

    #[getter]
    fn states(&self) -> Vec<String> {
        self.inner.mdp.state_names().to_vec()
    }

    #[getter]
    fn actions(&self) -> Vec<String> {
        self.inner.mdp.action_names().to_vec()
    }

    #[getter]
    fn action_visible(&self) -> bool {
        self.inner.obs.action_visible()
    }

    /// Every model defect, as readable messages.
    fn validate(&self) -> Vec<String> {
        self.inner.validate().iter().map(ToString::to_string).collect()
    }

    fn to_json(&self) -> PyResult<String> {
        self.inner.to_file().to_json().map_err(err)
    }

    /// Almost-sure winning region of the "user" or "attacker" objective:
    /// `{"region": [...], "levels": [[...]], "allowed": {state: [...]}}`.
    #[pyo3(signature = (objective = "user"))]
    fn asw<'py>(&self, py: Python<'py>, objective: &str) -> PyResult<Bound<'py, PyAny>> {
        let obj = match objective {
            "user" => self.inner.user(),
            "attacker" => self.inner.attacker(),
            other => return Err(DeceptraError::new_err(format!("unknown objective `{other}`"))),
        }
        .map_err(err)?;
        let m = &self.inner.mdp;
        let r = asw(m, obj);
        let names = |set: &deceptra::StateSet| set.iter().map(|s| m.state_name(s).to_string()).collect::<Vec<_>>();
        let allowed: std::collections::BTreeMap<String, Vec<String>> = r
            .region
            .iter()
            .map(|s| {
                let acts = r.allowed(s).iter().map(|&a| m.action_name(a).to_string()).collect();
                (m.state_name(s).to_string(), acts)
            })
            .collect();
        let levels: Vec<Vec<String>> = r.levels.iter().map(names).collect();
        to_py(
            py,
            &serde_json::json!({"region": names(&r.region), "levels": levels, "allowed": allowed}),
        )
    }

    /// Synthesizes the attacker's deceptive strategy from the initial state.
    /// `mode` defaults to the model's action visibility, `initial_belief`
    /// ("singleton" or "obs-class") to the model's setting.
    #[pyo3(signature = (mode = None, initial_belief = None, invisible_any_action = false))]
    fn synthesize(
        &self,
        mode: Option<&str>,
        initial_belief: Option<&str>,
        invisible_any_action: bool,
    ) -> PyResult<Synthesis> {
        let model = &self.inner;
        let obs = match mode {
            Some(mode) => model.obs.with_action_visibility(parse_mode(mode)? == Mode::Visible),
            None => model.obs.clone(),
        };
        let cfg = AugConfig {
            initial_belief: match initial_belief {
                Some(name) => InitialBelief::parse(name).map_err(err)?,
                None => model.initial_belief.clone(),
            },
            invisible_any_action,
        };
        let m = &model.mdp;
        let syn = synthesize_from(
            m,
            &obs,
            model.user().map_err(err)?,
            model.attacker().map_err(err)?,
            &cfg,
            &[m.initial()],
        )
        .map_err(err)?;
        let ssp = if syn.strategy.is_empty() {
            None
        } else {
            Some(ssp_refine(&syn.aug, &syn.strategy).map_err(err)?)
        };
        Ok(Synthesis {
            model: model.clone(),
            obs,
            cfg,
            syn,
            ssp,
        })
    }

    fn __repr__(&self) -> String {
        format!(
            "Model(states={}, actions={}, action_visible={})",
            self.inner.mdp.num_states(),
            self.inner.mdp.num_actions(),
            self.inner.obs.action_visible()
        )
    }
}

/// Result of a synthesis: the augmented model, the attacker's winning
/// region and strategy, and its expected-steps refinement.
#[pyclass(module = "deceptra", frozen)]
struct Synthesis {
    model: deceptra::Model,
    obs: ObservationModel,
    cfg: AugConfig,
    syn: CoreSynthesis,
    ssp: Option<SspPlan>,
}

#[pymethods]
impl Synthesis {
    #[getter]
    fn mode(&self) -> String {
        self.syn.aug.mode.to_string()
    }

    #[getter]
    fn aug_size(&self) -> usize {
        self.syn.report.aug_size
    }

    #[getter]
    fn asw_size(&self) -> usize {
        self.syn.report.asw_size
    }

    #[getter]
    fn initial_wins(&self) -> bool {
        self.syn.root_wins(0)
    }

    /// Augmented state names, e.g. `2|{2,3}`.
    #[getter]
    fn aug_states(&self) -> Vec<String> {
        (0..self.syn.aug.len())
            .map(|x| self.syn.aug.name(x).to_string())
            .collect()
    }

    #[getter]
    fn winning_region(&self) -> Vec<String> {
        self.syn
            .attacker
            .region
            .iter()
            .map(|x| self.syn.aug.name(x).to_string())
            .collect()
    }

    /// The strategy file contents: per augmented state, the allowed actions
    /// and, when available, the fastest action and its expected steps.
    fn strategy<'py>(&self, py: Python<'py>) -> PyResult<Bound<'py, PyAny>> {
        let file = StrategyFile::from_strategy(&self.syn.aug, &self.syn.strategy, self.ssp.as_ref(), &self.cfg, None);
        to_py(py, &file)
    }

    /// Samples runs from the augmented initial state; returns one list of
    /// step records per run.
    #[pyo3(signature = (runs = 1, seed = 0, max_steps = 1000, ssp = false))]
    fn simulate<'py>(
        &self,
        py: Python<'py>,
        runs: usize,
        seed: u64,
        max_steps: usize,
        ssp: bool,
    ) -> PyResult<Bound<'py, PyAny>> {
        if !self.syn.root_wins(0) {
            return Err(DeceptraError::new_err("the initial state is not deceptively winning"));
        }
        let sel = match (&self.ssp, ssp) {
            (Some(plan), true) => Selection::Ssp(&plan.action),
            (None, true) => return Err(DeceptraError::new_err("no SSP refinement available")),
            (_, false) => Selection::Uniform,
        };
        let traces = simulate_many(&self.syn.aug, &self.syn.strategy, sel, seed, runs, max_steps).map_err(err)?;
        let records: Vec<_> = traces.iter().map(|t| &t.records).collect();
        to_py(py, &records)
    }

    /// CSV trace of a single run.
    #[pyo3(signature = (seed = 0, max_steps = 1000, ssp = false))]
    fn trace_csv(&self, seed: u64, max_steps: usize, ssp: bool) -> PyResult<String> {
        let sel = match (&self.ssp, ssp) {
            (Some(plan), true) => Selection::Ssp(&plan.action),
            (None, true) => return Err(DeceptraError::new_err("no SSP refinement available")),
            (_, false) => Selection::Uniform,
        };
        let trace = deceptra::sim::simulate(&self.syn.aug, &self.syn.strategy, sel, seed, max_steps).map_err(err)?;
        Ok(export_trace_csv(&trace))
    }

    /// Cross-checks sampled runs against the brute-force oracle.
    #[pyo3(signature = (runs = 500, depth = 12, seed = 0))]
    fn check<'py>(&self, py: Python<'py>, runs: usize, depth: usize, seed: u64) -> PyResult<Bound<'py, PyAny>> {
        let cfg = CheckConfig {
            runs,
            max_len: depth,
            seed,
            ..CheckConfig::default()
        };
        let report = check_theorem(
            &self.model.mdp,
            &self.obs,
            &self.syn.user,
            &self.syn.aug,
            &self.syn.strategy,
            &cfg,
        )
        .map_err(err)?;
        to_py(py, &report)
    }

    /// Graphviz rendering of the augmented model with the winning region
    /// highlighted.
    fn dot(&self) -> String {
        export_dot(&self.syn.aug, &self.syn.attacker.region)
    }

    fn __repr__(&self) -> String {
        format!(
            "Synthesis(mode={}, aug_size={}, asw_size={}, initial_wins={})",
            self.syn.aug.mode,
            self.syn.report.aug_size,
            self.syn.report.asw_size,
            self.syn.root_wins(0)
        )
    }
}

/// Benchmark table runs: one report per configuration with the published
/// comparison attached.
#[pyfunction]
#[pyo3(signature = (p = 0.8))]
fn table1<'py>(py: Python<'py>, p: f64) -> PyResult<Bound<'py, PyAny>> {
    let results = run_table1(p, false).map_err(err)?;
    let rows: Vec<_> = results
        .iter()
        .map(|r| serde_json::json!({"report": r.report, "comparison": r.comparison, "matches": r.comparison.matches()}))
        .collect();
    to_py(py, &rows)
}

/// Compares the illustrative augmented models with the golden graphs;
/// returns `(figure, mode, passed, diff)` tuples.
#[pyfunction]
fn replicate_figs() -> PyResult<Vec<(String, String, bool, String)>> {
    let model = illustrative_model();
    let cfg = AugConfig {
        initial_belief: model.initial_belief.clone(),
        invisible_any_action: false,
    };
    let checks = run_figs(&model, &cfg).map_err(err)?;
    Ok(checks
        .into_iter()
        .map(|c| (c.figure.to_string(), c.mode.to_string(), c.passed, c.diff.to_string()))
        .collect())
}

#[pymodule]
#[pyo3(name = "deceptra")]
fn deceptra_module(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add("__version__", deceptra::VERSION)?;
    m.add("DeceptraError", m.py().get_type::<DeceptraError>())?;
    m.add_class::<Model>()?;
    m.add_class::<Synthesis>()?;
    m.add_function(wrap_pyfunction!(table1, m)?)?;
    m.add_function(wrap_pyfunction!(replicate_figs, m)?)?;
    Ok(())
}

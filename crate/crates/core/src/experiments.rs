//! Reproduction drivers: the illustrative augmented graphs and the gridworld
//! benchmark table.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::{self, Write};
use std::time::Instant;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::asw::asw;
use crate::belief::{build, AugConfig, AugmentedMdp, InitialBelief, Mode};
use crate::error::Result;
use crate::gridworld::{benchmark_scenario, Coverage, Scenario, SensorKind};
use crate::model_file::Model;
use crate::planner::{synthesize_from, winning_initial_sweep, Synthesis};

const FIG1_MODEL: &str = include_str!("../data/fig1.json");
const FIG2_GOLDEN: &str = include_str!("../data/fig2_visible.json");
const FIG3_GOLDEN: &str = include_str!("../data/fig3_invisible.json");

/// The bundled illustrative model (action-visible observation model).
pub fn illustrative_model() -> Model {
    Model::from_json(FIG1_MODEL).expect("bundled model parses")
}

pub fn illustrative_model_json() -> &'static str {
    FIG1_MODEL
}

/// Expected augmented graph and winning region.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GoldenGraph {
    pub mode: Mode,
    /// Expected `Allowed₀` for the listed base states.
    pub allowed: BTreeMap<String, Vec<String>>,
    pub nodes: Vec<String>,
    pub edges: Vec<(String, String, String)>,
    pub asw: Vec<String>,
}

impl GoldenGraph {
    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn visible() -> Self {
        Self::from_json(FIG2_GOLDEN).expect("bundled golden graph parses")
    }

    pub fn invisible() -> Self {
        Self::from_json(FIG3_GOLDEN).expect("bundled golden graph parses")
    }
}

pub type Edge = (String, String, String);

/// Labeled edges `(from, action, to)` of an augmented MDP.
pub fn graph_edges(am: &AugmentedMdp) -> BTreeSet<Edge> {
    am.mdp
        .rows()
        .flat_map(|(s, a, row)| {
            row.iter().map(move |&(t, _)| {
                (
                    am.name(s).to_string(),
                    am.mdp.action_name(a).to_string(),
                    am.name(t).to_string(),
                )
            })
        })
        .collect()
}

#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct GraphDiff {
    pub missing_nodes: Vec<String>,
    pub extra_nodes: Vec<String>,
    pub missing_edges: Vec<Edge>,
    pub extra_edges: Vec<Edge>,
    pub missing_asw: Vec<String>,
    pub extra_asw: Vec<String>,
    /// `state: expected [..], got [..]`.
    pub allowed: Vec<String>,
}

impl GraphDiff {
    pub fn is_empty(&self) -> bool {
        self.missing_nodes.is_empty()
            && self.extra_nodes.is_empty()
            && self.missing_edges.is_empty()
            && self.extra_edges.is_empty()
            && self.missing_asw.is_empty()
            && self.extra_asw.is_empty()
            && self.allowed.is_empty()
    }
}

fn split<T: Ord + Clone>(expected: &BTreeSet<T>, got: &BTreeSet<T>) -> (Vec<T>, Vec<T>) {
    (
        expected.difference(got).cloned().collect(),
        got.difference(expected).cloned().collect(),
    )
}

impl fmt::Display for GraphDiff {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_empty() {
            return f.write_str("no differences");
        }
        for n in &self.missing_nodes {
            writeln!(f, "- node {n}")?;
        }
        for n in &self.extra_nodes {
            writeln!(f, "+ node {n}")?;
        }
        for (s, a, t) in &self.missing_edges {
            writeln!(f, "- edge {s} -{a}-> {t}")?;
        }
        for (s, a, t) in &self.extra_edges {
            writeln!(f, "+ edge {s} -{a}-> {t}")?;
        }
        for n in &self.missing_asw {
            writeln!(f, "- winning {n}")?;
        }
        for n in &self.extra_asw {
            writeln!(f, "+ winning {n}")?;
        }
        for line in &self.allowed {
            writeln!(f, "! allowed {line}")?;
        }
        Ok(())
    }
}

/// Builds the augmented MDP of `model` for the golden graph's mode and
/// compares states, labeled edges, the attacker's region and `Allowed₀`.
pub fn compare_golden(model: &Model, cfg: &AugConfig, golden: &GoldenGraph) -> Result<GraphDiff> {
    let m = &model.mdp;
    let obs = model.obs.with_action_visibility(golden.mode == Mode::Visible);
    let user = asw(m, model.user()?);
    let attacker = model.attacker()?;
    let am = build(m, &obs, &user, attacker, cfg, &[m.initial()])?;
    let solved = asw(&am.mdp, &am.objective());

    let mut diff = GraphDiff::default();
    let nodes: BTreeSet<String> = am.mdp.state_names().iter().cloned().collect();
    let want_nodes: BTreeSet<String> = golden.nodes.iter().cloned().collect();
    (diff.missing_nodes, diff.extra_nodes) = split(&want_nodes, &nodes);
    let want_edges: BTreeSet<Edge> = golden.edges.iter().cloned().collect();
    (diff.missing_edges, diff.extra_edges) = split(&want_edges, &graph_edges(&am));
    let region: BTreeSet<String> = solved.region.iter().map(|x| am.name(x).to_string()).collect();
    let want_region: BTreeSet<String> = golden.asw.iter().cloned().collect();
    (diff.missing_asw, diff.extra_asw) = split(&want_region, &region);
    for (s, want) in &golden.allowed {
        let got: Vec<String> = user
            .allowed(m.state_id(s)?)
            .iter()
            .map(|&a| m.action_name(a).to_string())
            .collect();
        if &got != want {
            diff.allowed.push(format!("{s}: expected {want:?}, got {got:?}"));
        }
    }
    Ok(diff)
}

#[derive(Debug, Clone, Serialize)]
pub struct FigureCheck {
    pub figure: String,
    pub mode: Mode,
    pub passed: bool,
    pub diff: GraphDiff,
}

/// Checks the bundled illustrative model against both golden graphs.
pub fn replicate_figs(model: &Model, cfg: &AugConfig) -> Result<Vec<FigureCheck>> {
    [("fig2", GoldenGraph::visible()), ("fig3", GoldenGraph::invisible())]
        .into_iter()
        .map(|(name, golden)| {
            let diff = compare_golden(model, cfg, &golden)?;
            Ok(FigureCheck {
                figure: name.to_string(),
                mode: golden.mode,
                passed: diff.is_empty(),
                diff,
            })
        })
        .collect()
}

/// One benchmark configuration and, where published, its expected values.
#[derive(Debug, Clone, PartialEq)]
pub struct BenchmarkRow {
    pub coverage: Coverage,
    pub sensor: SensorKind,
    pub mode: Mode,
    pub expected_win: Option<Vec<usize>>,
    pub expected_aug: Option<usize>,
    pub expected_asw: Option<usize>,
}

impl BenchmarkRow {
    pub fn id(&self) -> String {
        format!(
            "({})-{}-{}",
            self.coverage.letter(),
            self.sensor.letter(),
            self.mode.letter()
        )
    }
}

fn row(
    coverage: Coverage,
    sensor: SensorKind,
    mode: Mode,
    win: Option<&[usize]>,
    aug: Option<usize>,
    asw: Option<usize>,
) -> BenchmarkRow {
    BenchmarkRow {
        coverage,
        sensor,
        mode,
        expected_win: win.map(<[usize]>::to_vec),
        expected_aug: aug,
        expected_asw: asw,
    }
}

/// The five published rows.
pub fn table1_rows() -> Vec<BenchmarkRow> {
    use Coverage::*;
    use Mode::*;
    use SensorKind::*;
    vec![
        row(
            A,
            Boolean,
            Invisible,
            Some(&[20, 21, 22, 23, 24]),
            Some(1091),
            Some(374),
        ),
        row(
            B,
            Boolean,
            Invisible,
            Some(&[5, 10, 15, 20, 21, 22, 23, 24]),
            Some(1339),
            Some(682),
        ),
        row(
            C,
            Boolean,
            Invisible,
            Some(&[5, 10, 15, 20, 21, 22, 23, 24]),
            Some(497),
            Some(340),
        ),
        row(C, Precise, Invisible, Some(&[20, 21, 22, 23, 24]), Some(359), Some(170)),
        row(C, Precise, Visible, Some(&[]), Some(519), Some(20)),
    ]
}

/// Visible counterparts of the Boolean rows; only the (empty) win sets of
/// (a) and (b) are published.
pub fn supplementary_rows() -> Vec<BenchmarkRow> {
    use Coverage::*;
    use SensorKind::*;
    vec![
        row(A, Boolean, Mode::Visible, Some(&[]), None, None),
        row(B, Boolean, Mode::Visible, Some(&[]), None, None),
        row(C, Boolean, Mode::Visible, None, None, None),
    ]
}

/// Machine-readable record of one benchmark run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub scenario: String,
    pub mode: Mode,
    pub sensor: SensorKind,
    pub win_initial: Vec<String>,
    pub aug_size: usize,
    pub asw_size: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub wall_seconds: Option<f64>,
    pub version: String,
    pub config_hash: String,
}

/// SHA-256 over the serialized model and the synthesis settings.
pub fn config_hash(model_json: &str, mode: Mode, cfg: &AugConfig) -> String {
    let mut h = Sha256::new();
    h.update(model_json.as_bytes());
    h.update(format!(
        "\nmode={mode}\ninitial_belief={}\nany_action={}\n",
        cfg.initial_belief, cfg.invisible_any_action
    ));
    h.finalize().iter().map(|b| format!("{b:02x}")).collect()
}

/// Synthesis over a scenario's initial groups for one defender mode.
pub fn sweep_scenario(sc: &Scenario, mode: Mode) -> Result<(Vec<String>, Synthesis)> {
    let m = &sc.model;
    let obs = m.obs.with_action_visibility(mode == Mode::Visible);
    let cfg = scenario_config();
    winning_initial_sweep(&m.mdp, &obs, m.user()?, m.attacker()?, &cfg, &m.initial_groups)
}

/// Synthesis rooted at a single base state of a scenario.
pub fn synthesize_scenario_from(sc: &Scenario, mode: Mode, root: usize) -> Result<Synthesis> {
    let m = &sc.model;
    let obs = m.obs.with_action_visibility(mode == Mode::Visible);
    synthesize_from(&m.mdp, &obs, m.user()?, m.attacker()?, &scenario_config(), &[root])
}

fn scenario_config() -> AugConfig {
    AugConfig {
        initial_belief: InitialBelief::Singleton,
        invisible_any_action: false,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RowComparison {
    pub id: String,
    pub win_missing: Vec<String>,
    pub win_extra: Vec<String>,
    pub aug: (Option<usize>, usize),
    pub asw: (Option<usize>, usize),
}

impl RowComparison {
    pub fn matches(&self) -> bool {
        self.win_missing.is_empty()
            && self.win_extra.is_empty()
            && self.aug.0.is_none_or(|e| e == self.aug.1)
            && self.asw.0.is_none_or(|e| e == self.asw.1)
    }
}

impl fmt::Display for RowComparison {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:", self.id)?;
        if self.matches() {
            return f.write_str(" matches");
        }
        if !self.win_missing.is_empty() {
            write!(f, " win missing {:?};", self.win_missing)?;
        }
        if !self.win_extra.is_empty() {
            write!(f, " win extra {:?};", self.win_extra)?;
        }
        if let (Some(e), g) = self.aug {
            if e != g {
                write!(f, " aug size expected {e}, got {g};")?;
            }
        }
        if let (Some(e), g) = self.asw {
            if e != g {
                write!(f, " |ASW| expected {e}, got {g};")?;
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone)]
pub struct BenchmarkResult {
    pub row: BenchmarkRow,
    pub report: RunReport,
    pub comparison: RowComparison,
}

/// Runs one benchmark configuration with slip probability `slip`.
pub fn run_row(row: &BenchmarkRow, slip: f64, timings: bool) -> Result<BenchmarkResult> {
    let sc = benchmark_scenario(row.coverage, row.sensor, slip)?;
    let start = Instant::now();
    let (win, syn) = sweep_scenario(&sc, row.mode)?;
    let elapsed = start.elapsed().as_secs_f64();
    let hash = config_hash(&sc.model_json()?, row.mode, &scenario_config());
    let report = RunReport {
        scenario: row.id(),
        mode: row.mode,
        sensor: row.sensor,
        win_initial: win.clone(),
        aug_size: syn.report.aug_size,
        asw_size: syn.report.asw_size,
        wall_seconds: timings.then_some(elapsed),
        version: crate::VERSION.to_string(),
        config_hash: hash,
    };
    let (win_missing, win_extra) = match &row.expected_win {
        Some(expected) => {
            let want: BTreeSet<String> = expected.iter().map(|c| c.to_string()).collect();
            let got: BTreeSet<String> = win.into_iter().collect();
            split(&want, &got)
        }
        None => (Vec::new(), Vec::new()),
    };
    let comparison = RowComparison {
        id: row.id(),
        win_missing: sort_cells(win_missing),
        win_extra: sort_cells(win_extra),
        aug: (row.expected_aug, report.aug_size),
        asw: (row.expected_asw, report.asw_size),
    };
    Ok(BenchmarkResult {
        row: row.clone(),
        report,
        comparison,
    })
}

fn sort_cells(mut cells: Vec<String>) -> Vec<String> {
    cells.sort_by_key(|c| c.parse::<usize>().unwrap_or(usize::MAX));
    cells
}

/// All published rows followed by the supplementary visible rows.
pub fn table1(slip: f64, timings: bool) -> Result<Vec<BenchmarkResult>> {
    table1_rows()
        .iter()
        .chain(&supplementary_rows())
        .map(|r| run_row(r, slip, timings))
        .collect()
}

/// Inclusions between win sets that must hold for any layout: the
/// precise-visible set is empty, precise ⊆ Boolean, (a) ⊆ (b), and each
/// visible set is contained in its invisible counterpart. Returns the
/// violated relations.
pub fn layout_robust_violations(results: &[BenchmarkResult]) -> Vec<String> {
    let win = |id: &str| -> Option<BTreeSet<&str>> {
        results
            .iter()
            .find(|r| r.report.scenario == id)
            .map(|r| r.report.win_initial.iter().map(String::as_str).collect())
    };
    let mut out = Vec::new();
    let mut subset = |small: &str, big: &str| match (win(small), win(big)) {
        (Some(a), Some(b)) if a.is_subset(&b) => {}
        (Some(_), Some(_)) => out.push(format!("win{small} ⊄ win{big}")),
        _ => out.push(format!("missing run for {small} or {big}")),
    };
    subset("(c)-P-I", "(c)-B-I");
    subset("(a)-B-I", "(b)-B-I");
    subset("(c)-P-V", "(c)-P-I");
    subset("(a)-B-V", "(a)-B-I");
    subset("(b)-B-V", "(b)-B-I");
    subset("(c)-B-V", "(c)-B-I");
    match win("(c)-P-V") {
        Some(w) if w.is_empty() => {}
        Some(_) => out.push("win(c)-P-V is not empty".into()),
        None => out.push("missing run for (c)-P-V".into()),
    }
    out
}

fn format_cells(cells: &[String]) -> String {
    if cells.is_empty() {
        "∅".into()
    } else {
        cells.join(",")
    }
}

/// Markdown comparison of measured and published values.
pub fn render_markdown(results: &[BenchmarkResult]) -> String {
    let timed = results.iter().any(|r| r.report.wall_seconds.is_some());
    let mut out = String::from("| config | win (published) | win (measured) | aug (published) | aug (measured) | |ASW| (published) | |ASW| (measured) |");
    out.push_str(if timed { " time (s) |\n" } else { "\n" });
    out.push_str("|---|---|---|---|---|---|---|");
    out.push_str(if timed { "---|\n" } else { "\n" });
    let opt = |v: Option<usize>| v.map_or("–".to_string(), |v| v.to_string());
    for r in results {
        let published = match &r.row.expected_win {
            Some(cells) => format_cells(&cells.iter().map(|c| c.to_string()).collect::<Vec<_>>()),
            None => "–".to_string(),
        };
        write!(
            out,
            "| {} | {} | {} | {} | {} | {} | {} |",
            r.report.scenario,
            published,
            format_cells(&r.report.win_initial),
            opt(r.row.expected_aug),
            r.report.aug_size,
            opt(r.row.expected_asw),
            r.report.asw_size
        )
        .unwrap();
        if let Some(t) = r.report.wall_seconds {
            write!(out, " {t:.4} |").unwrap();
        }
        out.push('\n');
    }
    out
}

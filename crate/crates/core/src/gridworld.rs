//! Slippery gridworld monitored by a scheduled sensor network.
//!
//! Cells are numbered row-major from the top-left corner. An action moves to
//! the intended neighbor with probability `p` and to each of the two
//! perpendicular neighbors with probability `(1-p)/2`; moves off the grid
//! leave the agent in place and obstacle cells are absorbing. A Markov chain
//! over sensor states decides which coverage is active; the product state is
//! `(cell, sensor state)`.
//!
//! The defender knows the sensor state. A Boolean sensor reports whether the
//! agent is inside the active coverage; a precise sensor reports the exact
//! cell when covered and nothing otherwise.

use std::collections::BTreeSet;
use std::fmt;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::belief::InitialBelief;
use crate::error::{Error, Result};
use crate::mdp::{Mdp, ObservationModel, ReachAvoidObjective, StateId, PROB_TOLERANCE};
use crate::model_file::{InitialGroup, Model};
use crate::set::StateSet;

pub const ACTIONS: [&str; 4] = ["up", "down", "left", "right"];

/// Slip probability used when none is given.
pub const DEFAULT_SLIP: f64 = 0.8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SensorKind {
    Boolean,
    Precise,
}

impl SensorKind {
    pub fn letter(self) -> char {
        match self {
            SensorKind::Boolean => 'B',
            SensorKind::Precise => 'P',
        }
    }
}

impl fmt::Display for SensorKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            SensorKind::Boolean => "boolean",
            SensorKind::Precise => "precise",
        })
    }
}

impl std::str::FromStr for SensorKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "boolean" | "B" => Ok(SensorKind::Boolean),
            "precise" | "P" => Ok(SensorKind::Precise),
            other => Err(Error::Format(format!("unknown sensor kind `{other}`"))),
        }
    }
}

/// The three coverage tables of the security-monitoring benchmark.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Coverage {
    A,
    B,
    C,
}

impl Coverage {
    pub fn cells(self) -> Vec<Vec<usize>> {
        match self {
            Coverage::A => vec![
                vec![0, 1, 2, 3, 4],
                vec![3, 8, 13, 18, 23],
                vec![15, 16, 17, 18, 19],
                vec![1, 6, 11, 16, 21],
            ],
            Coverage::B => vec![
                vec![5, 6, 7, 8, 9],
                vec![3, 8, 13, 18, 23],
                vec![5, 6, 7, 8, 9],
                vec![3, 8, 13, 18, 23],
            ],
            Coverage::C => vec![
                vec![0, 1, 2, 5, 6, 7],
                vec![22, 23, 24],
                vec![0, 1, 2, 5, 6, 7],
                vec![22, 23, 24],
            ],
        }
    }

    pub fn letter(self) -> char {
        match self {
            Coverage::A => 'a',
            Coverage::B => 'b',
            Coverage::C => 'c',
        }
    }
}

impl std::str::FromStr for Coverage {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "a" => Ok(Coverage::A),
            "b" => Ok(Coverage::B),
            "c" => Ok(Coverage::C),
            other => Err(Error::Format(format!("unknown coverage configuration `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CellObjective {
    #[serde(rename = "unsafe")]
    pub unsafe_cells: Vec<usize>,
    pub target: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GridSpec {
    pub rows: usize,
    pub cols: usize,
    pub obstacles: BTreeSet<usize>,
    /// Probability of moving in the intended direction.
    pub slip: f64,
    pub user: CellObjective,
    pub attacker: CellObjective,
    /// Cells offered as initial states; `None` means every cell that is
    /// neither an obstacle nor unsafe or a target for the attacker.
    pub initial_cells: Option<Vec<usize>>,
}

impl GridSpec {
    /// The 5×5 benchmark grid.
    pub fn benchmark(slip: f64) -> Self {
        let obstacles: BTreeSet<usize> = [1, 7, 16, 17].into();
        GridSpec {
            rows: 5,
            cols: 5,
            slip,
            user: CellObjective {
                unsafe_cells: vec![1, 7, 16, 17, 4],
                target: vec![0],
            },
            attacker: CellObjective {
                unsafe_cells: obstacles.iter().copied().collect(),
                target: vec![4],
            },
            obstacles,
            initial_cells: None,
        }
    }

    pub fn cells(&self) -> usize {
        self.rows * self.cols
    }

    fn check(&self) -> Result<()> {
        if self.rows == 0 || self.cols == 0 {
            return Err(Error::Scenario("grid must have at least one cell".into()));
        }
        if !(self.slip > 0.0 && self.slip <= 1.0) {
            return Err(Error::Scenario(format!("slip probability {} not in (0,1]", self.slip)));
        }
        let n = self.cells();
        let all = self
            .obstacles
            .iter()
            .chain(&self.user.unsafe_cells)
            .chain(&self.user.target)
            .chain(&self.attacker.unsafe_cells)
            .chain(&self.attacker.target)
            .chain(self.initial_cells.iter().flatten());
        for &c in all {
            if c >= n {
                return Err(Error::Scenario(format!(
                    "cell {c} outside a {}x{} grid",
                    self.rows, self.cols
                )));
            }
        }
        Ok(())
    }

    /// Cell reached by moving from `cell` in direction `dir` (index into
    /// [`ACTIONS`]), staying put at walls.
    pub fn neighbor(&self, cell: usize, dir: usize) -> usize {
        let (r, c) = (cell / self.cols, cell % self.cols);
        match dir {
            0 if r > 0 => cell - self.cols,
            1 if r + 1 < self.rows => cell + self.cols,
            2 if c > 0 => cell - 1,
            3 if c + 1 < self.cols => cell + 1,
            _ => cell,
        }
    }

    /// `P_grid(·|cell, dir)` with repeated destinations merged, ascending.
    pub fn move_distribution(&self, cell: usize, dir: usize) -> Vec<(usize, f64)> {
        if self.obstacles.contains(&cell) {
            return vec![(cell, 1.0)];
        }
        let perpendicular = if dir < 2 { [2, 3] } else { [0, 1] };
        let mut out = vec![(self.neighbor(cell, dir), self.slip)];
        if self.slip < 1.0 {
            let q = (1.0 - self.slip) / 2.0;
            for d in perpendicular {
                out.push((self.neighbor(cell, d), q));
            }
        }
        out.sort_by_key(|&(c, _)| c);
        let mut merged: Vec<(usize, f64)> = Vec::with_capacity(out.len());
        for (c, p) in out {
            match merged.last_mut() {
                Some((last, q)) if *last == c => *q += p,
                _ => merged.push((c, p)),
            }
        }
        merged
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SensorSpec {
    /// Row-stochastic transition matrix over sensor states.
    pub scheduler: Vec<Vec<f64>>,
    /// Covered cells per sensor state.
    pub coverage: Vec<Vec<usize>>,
    pub kind: SensorKind,
}

impl SensorSpec {
    /// Cyclic chain over `n` states: stay with 1/2, advance with 1/2.
    pub fn cyclic_scheduler(n: usize) -> Vec<Vec<f64>> {
        (0..n)
            .map(|q| {
                let mut row = vec![0.0; n];
                if n == 1 {
                    row[0] = 1.0;
                } else {
                    row[q] = 0.5;
                    row[(q + 1) % n] = 0.5;
                }
                row
            })
            .collect()
    }

    pub fn benchmark(coverage: Coverage, kind: SensorKind) -> Self {
        SensorSpec {
            scheduler: Self::cyclic_scheduler(4),
            coverage: coverage.cells(),
            kind,
        }
    }

    pub fn states(&self) -> usize {
        self.scheduler.len()
    }

    fn check(&self, cells: usize) -> Result<()> {
        let n = self.scheduler.len();
        if n == 0 {
            return Err(Error::Scenario("scheduler needs at least one state".into()));
        }
        for (q, row) in self.scheduler.iter().enumerate() {
            if row.len() != n {
                return Err(Error::Scenario(format!(
                    "scheduler row {q} has {} entries, expected {n}",
                    row.len()
                )));
            }
            if row.iter().any(|&p| !(0.0..=1.0).contains(&p)) {
                return Err(Error::Scenario(format!("scheduler row {q} has an entry outside [0,1]")));
            }
            let sum: f64 = row.iter().sum();
            if (sum - 1.0).abs() > PROB_TOLERANCE {
                return Err(Error::Scenario(format!("scheduler row {q} sums to {sum}")));
            }
        }
        if self.coverage.len() != n {
            return Err(Error::Scenario(format!(
                "{} coverage sets for {n} scheduler states",
                self.coverage.len()
            )));
        }
        for (q, cov) in self.coverage.iter().enumerate() {
            if let Some(&c) = cov.iter().find(|&&c| c >= cells) {
                return Err(Error::Scenario(format!(
                    "coverage of sensor state {} lists cell {c}",
                    q + 1
                )));
            }
        }
        Ok(())
    }
}

/// A generated benchmark instance.
#[derive(Debug, Clone)]
pub struct Scenario {
    pub grid: GridSpec,
    pub sensor: SensorSpec,
    pub model: Model,
}

/// Product state name, with 1-based sensor states.
pub fn state_name(cell: usize, q: usize) -> String {
    format!("c{cell}q{}", q + 1)
}

impl Scenario {
    pub fn state_id(&self, cell: usize, q: usize) -> StateId {
        cell * self.sensor.states() + q
    }

    pub fn cell_of(&self, s: StateId) -> usize {
        s / self.sensor.states()
    }

    pub fn sensor_state_of(&self, s: StateId) -> usize {
        s % self.sensor.states()
    }

    /// The grid cells of a set of product states.
    pub fn cells_of(&self, set: &StateSet) -> BTreeSet<usize> {
        set.iter().map(|s| self.cell_of(s)).collect()
    }

    pub fn model_json(&self) -> Result<String> {
        self.model.to_file().to_json()
    }

    /// Serializes the scenario into the model format.
    pub fn emit_model(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.model_json()?)?;
        Ok(())
    }
}

/// Composes the grid with the sensor scheduler into an MDP, observation
/// partition and the two lifted objectives.
pub fn build_scenario(g: &GridSpec, s: &SensorSpec) -> Result<Scenario> {
    g.check()?;
    s.check(g.cells())?;
    let nq = s.states();
    let ncells = g.cells();
    let id = |cell: usize, q: usize| cell * nq + q;

    let names: Vec<String> = (0..ncells)
        .flat_map(|c| (0..nq).map(move |q| state_name(c, q)))
        .collect();
    let initial_cells: Vec<usize> = match &g.initial_cells {
        Some(cells) => cells.clone(),
        None => (0..ncells)
            .filter(|c| {
                !g.obstacles.contains(c) && !g.attacker.unsafe_cells.contains(c) && !g.attacker.target.contains(c)
            })
            .collect(),
    };
    let first = *initial_cells
        .first()
        .ok_or_else(|| Error::Scenario("no initial cell".into()))?;
    let mut mdp = Mdp::new(names, ACTIONS.map(String::from).to_vec(), id(first, 0))?;

    for cell in 0..ncells {
        for dir in 0..ACTIONS.len() {
            let moves = g.move_distribution(cell, dir);
            for q in 0..nq {
                let mut dist = Vec::new();
                for &(c2, pc) in &moves {
                    for (q2, &pq) in s.scheduler[q].iter().enumerate() {
                        if pq > 0.0 {
                            dist.push((id(c2, q2), pc * pq));
                        }
                    }
                }
                mdp.set_transition(id(cell, q), dir, dist);
            }
        }
    }

    let mut classes = Vec::new();
    for q in 0..nq {
        let covered: BTreeSet<usize> = s.coverage[q].iter().copied().collect();
        match s.kind {
            SensorKind::Boolean => {
                classes.push(covered.iter().map(|&c| id(c, q)).collect::<Vec<_>>());
            }
            SensorKind::Precise => {
                classes.extend(covered.iter().map(|&c| vec![id(c, q)]));
            }
        }
        classes.push((0..ncells).filter(|c| !covered.contains(c)).map(|c| id(c, q)).collect());
    }
    classes.retain(|c| !c.is_empty());
    let obs = ObservationModel::new(mdp.num_states(), classes, false);

    let lift =
        |cells: &[usize]| StateSet::from_ids(ncells * nq, cells.iter().flat_map(|&c| (0..nq).map(move |q| id(c, q))));
    let user = ReachAvoidObjective::new(lift(&g.user.unsafe_cells), lift(&g.user.target));
    let attacker = ReachAvoidObjective::new(lift(&g.attacker.unsafe_cells), lift(&g.attacker.target));

    let initial_groups = initial_cells
        .iter()
        .map(|&c| InitialGroup {
            label: c.to_string(),
            states: (0..nq).map(|q| id(c, q)).collect(),
        })
        .collect();

    Ok(Scenario {
        grid: g.clone(),
        sensor: s.clone(),
        model: Model {
            mdp,
            obs,
            user: Some(user),
            attacker: Some(attacker),
            initial_belief: InitialBelief::Singleton,
            initial_groups,
        },
    })
}

/// The benchmark instance for a coverage table and sensor type.
pub fn benchmark_scenario(coverage: Coverage, kind: SensorKind, slip: f64) -> Result<Scenario> {
    build_scenario(&GridSpec::benchmark(slip), &SensorSpec::benchmark(coverage, kind))
}

/// Custom scenario description, read from TOML or JSON.
///
/// ```toml
/// rows = 3
/// cols = 3
/// slip = 0.8
/// obstacles = [4]
/// sensor = "boolean"
/// coverage = [[0, 1, 2], [6, 7, 8]]
/// # scheduler = [[0.5, 0.5], [0.5, 0.5]]   # defaults to the cyclic chain
/// # initial_cells = [6, 7, 8]
/// [user]
/// unsafe = [2]
/// target = [0]
/// [attacker]
/// unsafe = []
/// target = [2]
/// ```
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioFile {
    pub rows: usize,
    pub cols: usize,
    #[serde(default = "default_slip")]
    pub slip: f64,
    #[serde(default)]
    pub obstacles: Vec<usize>,
    pub sensor: SensorKind,
    pub coverage: Vec<Vec<usize>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub scheduler: Option<Vec<Vec<f64>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub initial_cells: Option<Vec<usize>>,
    pub user: CellObjective,
    pub attacker: CellObjective,
}

fn default_slip() -> f64 {
    DEFAULT_SLIP
}

impl ScenarioFile {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        if path.extension().is_some_and(|e| e == "json") {
            Ok(serde_json::from_str(&text)?)
        } else {
            Ok(toml::from_str(&text)?)
        }
    }

    pub fn specs(&self) -> (GridSpec, SensorSpec) {
        let grid = GridSpec {
            rows: self.rows,
            cols: self.cols,
            obstacles: self.obstacles.iter().copied().collect(),
            slip: self.slip,
            user: self.user.clone(),
            attacker: self.attacker.clone(),
            initial_cells: self.initial_cells.clone(),
        };
        let sensor = SensorSpec {
            scheduler: self
                .scheduler
                .clone()
                .unwrap_or_else(|| SensorSpec::cyclic_scheduler(self.coverage.len())),
            coverage: self.coverage.clone(),
            kind: self.sensor,
        };
        (grid, sensor)
    }

    pub fn build(&self) -> Result<Scenario> {
        let (g, s) = self.specs();
        build_scenario(&g, &s)
    }
}

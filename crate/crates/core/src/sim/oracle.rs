//! Brute-force search for observation-equivalent user histories, and the
//! run-based soundness check built on it.
//!
//! The oracle does not use belief sets. It enumerates concrete user
//! histories under the uniform-`Allowed₀` strategy, which has maximal support
//! among the user's almost-sure winning Markov strategies, so a witness
//! exists for some winning strategy iff one exists for this one.

use std::collections::HashSet;

use rayon::prelude::*;
use serde::Serialize;

use crate::asw::AswResult;
use crate::belief::{AugmentedMdp, Mode};
use crate::error::{Error, Result};
use crate::mdp::{ClassId, History, Mdp, ObservationModel, StateId};
use crate::planner::FiniteMemoryStrategy;
use crate::set::StateSet;

use super::{simulate, Selection, Status};

pub const DEFAULT_DEPTH_BOUND: usize = 14;

struct Search<'a> {
    m: &'a Mdp,
    obs: &'a ObservationModel,
    user: &'a AswResult,
    classes: Vec<ClassId>,
    actions: Option<&'a [usize]>,
    dead: HashSet<(usize, StateId)>,
    path: History,
}

impl Search<'_> {
    fn extend(&mut self, i: usize, s: StateId) -> bool {
        if i == self.classes.len() - 1 {
            return true;
        }
        if self.dead.contains(&(i, s)) {
            return false;
        }
        for &a in self.user.allowed(s) {
            if self.actions.is_some_and(|acts| acts[i] != a) {
                continue;
            }
            for &(t, _) in self.m.successors(s, a).unwrap_or(&[]) {
                if self.obs.class_of(t) != Some(self.classes[i + 1]) {
                    continue;
                }
                self.path.push(a, t);
                if self.extend(i + 1, t) {
                    return true;
                }
                self.path.pop();
            }
        }
        self.dead.insert((i, s));
        false
    }
}

/// Finds a user history starting in `start` that has positive probability
/// under uniform play over `Allowed₀` and yields the same defender
/// observations as `h`. In visible mode the actions must coincide; in
/// invisible mode only the state observations count.
pub fn oracle_obs_equivalent(
    m: &Mdp,
    obs: &ObservationModel,
    user: &AswResult,
    mode: Mode,
    start: &StateSet,
    h: &History,
    bound: usize,
) -> Result<Option<History>> {
    if h.len() > bound {
        return Err(Error::DepthExceeded { depth: h.len(), bound });
    }
    let classes = h
        .states()
        .iter()
        .map(|&s| {
            obs.class_of(s)
                .ok_or_else(|| Error::Unobserved(m.state_name(s).to_string()))
        })
        .collect::<Result<Vec<_>>>()?;
    let mut search = Search {
        m,
        obs,
        user,
        classes,
        actions: (mode == Mode::Visible).then(|| h.actions()),
        dead: HashSet::new(),
        path: History::new(0),
    };
    for s0 in start.iter() {
        if obs.class_of(s0) != Some(search.classes[0]) {
            continue;
        }
        search.path = History::new(s0);
        if search.extend(0, s0) {
            return Ok(Some(search.path));
        }
    }
    Ok(None)
}

#[derive(Debug, Clone)]
pub struct CheckConfig {
    pub runs: usize,
    /// Maximum number of actions per sampled run.
    pub max_len: usize,
    pub seed: u64,
    /// Runs whose prefixes are cross-checked against the oracle; the rest
    /// only get the belief check.
    pub oracle_runs: usize,
    pub depth_bound: usize,
}

impl Default for CheckConfig {
    fn default() -> Self {
        CheckConfig {
            runs: 500,
            max_len: 12,
            seed: 0,
            oracle_runs: usize::MAX,
            depth_bound: DEFAULT_DEPTH_BOUND,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Counterexample {
    pub seed: u64,
    pub step: usize,
    pub history: String,
    pub reason: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TheoremReport {
    pub mode: Mode,
    pub runs: usize,
    pub reached_target: usize,
    pub prefixes_checked: usize,
    pub oracle_checks: usize,
    pub counterexamples: Vec<Counterexample>,
}

impl TheoremReport {
    pub fn passed(&self) -> bool {
        self.counterexamples.is_empty()
    }
}

struct RunOutcome {
    reached: bool,
    prefixes: usize,
    oracle_checks: usize,
    counterexamples: Vec<Counterexample>,
}

/// Samples runs of `strat` and checks every prefix: the defender's belief
/// must stay non-empty, and (for the first `oracle_runs` runs) the oracle
/// must find an observation-equivalent user history exactly when the
/// belief is non-empty.
pub fn check_theorem(
    m: &Mdp,
    obs: &ObservationModel,
    user: &AswResult,
    am: &AugmentedMdp,
    strat: &FiniteMemoryStrategy,
    cfg: &CheckConfig,
) -> Result<TheoremReport> {
    let start = am.state(am.initial()).belief.clone();
    let outcomes = (0..cfg.runs)
        .into_par_iter()
        .map(|i| {
            let seed = cfg.seed.wrapping_add(i as u64);
            let trace = simulate(am, strat, Selection::Uniform, seed, cfg.max_len)?;
            let h = trace.history(am);
            let mut out = RunOutcome {
                reached: trace.status() == Status::ReachedTarget,
                prefixes: 0,
                oracle_checks: 0,
                counterexamples: Vec::new(),
            };
            for (k, &x) in trace.aug_path.iter().enumerate() {
                out.prefixes += 1;
                let prefix = h.prefix(k);
                let revealed = am.state(x).is_revealed();
                let mut flag = |reason: String| {
                    out.counterexamples.push(Counterexample {
                        seed,
                        step: k,
                        history: prefix.display(m),
                        reason,
                    })
                };
                if revealed {
                    flag("defender belief became empty".into());
                } else if status_is_unsafe(am, x) {
                    flag("attacker entered an unsafe state".into());
                }
                if i < cfg.oracle_runs && k <= cfg.depth_bound {
                    out.oracle_checks += 1;
                    let witness = oracle_obs_equivalent(m, obs, user, am.mode, &start, &prefix, cfg.depth_bound)?;
                    match (witness.is_some(), revealed) {
                        (false, false) => flag("no observation-equivalent user history".into()),
                        (true, true) => flag("oracle found a user history for a revealed prefix".into()),
                        _ => {}
                    }
                }
                if revealed {
                    break;
                }
            }
            Ok(out)
        })
        .collect::<Result<Vec<_>>>()?;

    let mut report = TheoremReport {
        mode: am.mode,
        runs: cfg.runs,
        reached_target: 0,
        prefixes_checked: 0,
        oracle_checks: 0,
        counterexamples: Vec::new(),
    };
    for o in outcomes {
        report.reached_target += usize::from(o.reached);
        report.prefixes_checked += o.prefixes;
        report.oracle_checks += o.oracle_checks;
        report.counterexamples.extend(o.counterexamples);
    }
    Ok(report)
}

fn status_is_unsafe(am: &AugmentedMdp, x: usize) -> bool {
    am.unsafe_states.contains(x) && !am.state(x).is_revealed()
}

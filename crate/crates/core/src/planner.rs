//! Deceptive strategy synthesis.
//!
//! The pipeline solves the user objective on the base model to obtain the
//! permissible actions, builds the belief-augmented model for the defender's
//! action visibility, and solves the attacker's objective there: reach a
//! target with a non-empty belief while never emptying the belief or touching
//! an unsafe state. The allowed actions of that solve form the attacker's
//! finite-memory strategy, with the defender's belief as memory.

use std::collections::BTreeMap;
use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::asw::{asw, asw_reach, AswResult};
use crate::belief::{build, AugConfig, AugId, AugmentedMdp, Mode};
use crate::error::{Error, Result};
use crate::mdp::{ActionId, Mdp, ObservationModel, ReachAvoidObjective, StateId};
use crate::model_file::InitialGroup;

/// Stopping rule of the expected-steps value iteration.
pub const SSP_TOLERANCE: f64 = 1e-9;
pub const SSP_MAX_ITERATIONS: usize = 100_000;

/// The attacker's strategy over augmented states: a non-empty action set per
/// state of the deceptive winning region. Distributions are uniform over the
/// set unless a refinement picks a single action.
#[derive(Debug, Clone, PartialEq)]
pub struct FiniteMemoryStrategy {
    pub mode: Mode,
    choice: BTreeMap<AugId, Vec<ActionId>>,
}

impl FiniteMemoryStrategy {
    pub fn new(mode: Mode, choice: BTreeMap<AugId, Vec<ActionId>>) -> Self {
        FiniteMemoryStrategy { mode, choice }
    }

    /// Allowed actions of the attacker's solve, on every region state where
    /// that set is non-empty.
    pub fn from_solution(am: &AugmentedMdp, solved: &AswResult) -> Self {
        let choice = solved
            .region
            .iter()
            .filter(|&s| !solved.allowed(s).is_empty())
            .map(|s| (s, solved.allowed(s).to_vec()))
            .collect();
        FiniteMemoryStrategy { mode: am.mode, choice }
    }

    pub fn choice(&self, s: AugId) -> Option<&[ActionId]> {
        self.choice.get(&s).map(Vec::as_slice)
    }

    pub fn distribution(&self, s: AugId) -> Option<Vec<(ActionId, f64)>> {
        self.choice(s).map(|acts| {
            let p = 1.0 / acts.len() as f64;
            acts.iter().map(|&a| (a, p)).collect()
        })
    }

    pub fn domain(&self) -> impl Iterator<Item = AugId> + '_ {
        self.choice.keys().copied()
    }

    pub fn len(&self) -> usize {
        self.choice.len()
    }

    pub fn is_empty(&self) -> bool {
        self.choice.is_empty()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlanReport {
    pub aug_size: usize,
    pub asw_size: usize,
    /// Base initial states (or initial-group labels) whose augmented initial
    /// state is deceptively winning.
    pub winning_initial: Vec<String>,
    pub build_seconds: f64,
    pub solve_seconds: f64,
}

#[derive(Debug, Clone)]
pub struct Synthesis {
    pub user: AswResult,
    pub aug: AugmentedMdp,
    pub attacker: AswResult,
    pub strategy: FiniteMemoryStrategy,
    pub report: PlanReport,
}

impl Synthesis {
    /// Whether the augmented root built for the `i`-th requested initial
    /// state is winning.
    pub fn root_wins(&self, i: usize) -> bool {
        self.attacker.contains(self.aug.roots()[i])
    }
}

/// Synthesizes from the model's initial state.
pub fn synthesize(
    m: &Mdp,
    obs: &ObservationModel,
    user_obj: &ReachAvoidObjective,
    attacker_obj: &ReachAvoidObjective,
    cfg: &AugConfig,
) -> Result<Synthesis> {
    synthesize_from(m, obs, user_obj, attacker_obj, cfg, &[m.initial()])
}

/// Synthesizes with one augmented root per state of `roots`; the augmented
/// model is the union of their reachable parts.
pub fn synthesize_from(
    m: &Mdp,
    obs: &ObservationModel,
    user_obj: &ReachAvoidObjective,
    attacker_obj: &ReachAvoidObjective,
    cfg: &AugConfig,
    roots: &[StateId],
) -> Result<Synthesis> {
    let start = Instant::now();
    let user = asw(m, user_obj);
    let aug = build(m, obs, &user, attacker_obj, cfg, roots)?;
    let build_seconds = start.elapsed().as_secs_f64();

    let start = Instant::now();
    // A pure-safety attacker keeps the safety reading; otherwise an
    // unreachable lifted target means no state wins.
    let attacker = if attacker_obj.target.is_empty() {
        asw(&aug.mdp, &aug.objective())
    } else {
        asw_reach(&aug.mdp, &aug.objective())
    };
    let solve_seconds = start.elapsed().as_secs_f64();

    let strategy = FiniteMemoryStrategy::from_solution(&aug, &attacker);
    let mut winning_initial: Vec<String> = Vec::new();
    for (i, &s0) in roots.iter().enumerate() {
        if attacker.contains(aug.roots()[i]) {
            winning_initial.push(m.state_name(s0).to_string());
        }
    }
    winning_initial.dedup();
    let report = PlanReport {
        aug_size: aug.len(),
        asw_size: attacker.region.len(),
        winning_initial,
        build_seconds,
        solve_seconds,
    };
    Ok(Synthesis {
        user,
        aug,
        attacker,
        strategy,
        report,
    })
}

/// Labels of the groups every member of which is a winning initial state,
/// e.g. grid cells that win regardless of the initial sensor state. The
/// returned synthesis is rooted at every member of every group.
pub fn winning_initial_sweep(
    m: &Mdp,
    obs: &ObservationModel,
    user_obj: &ReachAvoidObjective,
    attacker_obj: &ReachAvoidObjective,
    cfg: &AugConfig,
    groups: &[InitialGroup],
) -> Result<(Vec<String>, Synthesis)> {
    let roots: Vec<StateId> = groups.iter().flat_map(|g| g.states.iter().copied()).collect();
    let mut syn = synthesize_from(m, obs, user_obj, attacker_obj, cfg, &roots)?;
    let mut winners = Vec::new();
    let mut offset = 0;
    for g in groups {
        let wins = (offset..offset + g.states.len()).all(|i| syn.root_wins(i));
        if wins {
            winners.push(g.label.clone());
        }
        offset += g.states.len();
    }
    syn.report.winning_initial = winners.clone();
    Ok((winners, syn))
}

/// Minimum expected steps to the target under the strategy's action sets.
#[derive(Debug, Clone)]
pub struct SspPlan {
    /// Fastest action per non-target strategy state.
    pub action: BTreeMap<AugId, ActionId>,
    /// Expected steps to the target; `0` on targets and `∞` off the region.
    pub value: Vec<f64>,
    pub iterations: usize,
    pub converged: bool,
}

/// Value iteration for expected steps-to-target restricted to the strategy's
/// actions. Ties go to the smallest action id.
pub fn ssp_refine(am: &AugmentedMdp, strat: &FiniteMemoryStrategy) -> Result<SspPlan> {
    if strat.is_empty() {
        return Err(Error::Contract(
            "SSP refinement needs a non-empty winning region".into(),
        ));
    }
    let n = am.len();
    let mut value = vec![f64::INFINITY; n];
    let mut domain = Vec::new();
    for s in strat.domain() {
        if am.target.contains(s) {
            continue;
        }
        domain.push(s);
    }
    for s in am.target.iter() {
        value[s] = 0.0;
    }
    for &s in &domain {
        value[s] = 0.0;
    }
    // closure: every chosen action stays where values are defined
    for &s in &domain {
        for &a in strat.choice(s).expect("domain state") {
            for &(t, _) in am.mdp.successors(s, a).unwrap_or(&[]) {
                if value[t].is_infinite() {
                    return Err(Error::Contract(format!(
                        "strategy action {} at {} leaves the winning region",
                        am.mdp.action_name(a),
                        am.name(s)
                    )));
                }
            }
        }
    }

    let q = |value: &[f64], s: AugId, a: ActionId| -> f64 {
        1.0 + am
            .mdp
            .successors(s, a)
            .unwrap_or(&[])
            .iter()
            .map(|&(t, p)| p * value[t])
            .sum::<f64>()
    };

    let mut iterations = 0;
    let mut converged = false;
    while iterations < SSP_MAX_ITERATIONS {
        iterations += 1;
        let mut delta: f64 = 0.0;
        for &s in &domain {
            let best = strat
                .choice(s)
                .expect("domain state")
                .iter()
                .map(|&a| q(&value, s, a))
                .fold(f64::INFINITY, f64::min);
            delta = delta.max((best - value[s]).abs());
            value[s] = best;
        }
        if delta < SSP_TOLERANCE {
            converged = true;
            break;
        }
    }

    let mut action = BTreeMap::new();
    for &s in &domain {
        let acts = strat.choice(s).expect("domain state");
        let mut best = acts[0];
        let mut best_q = q(&value, s, best);
        for &a in &acts[1..] {
            let qa = q(&value, s, a);
            if qa < best_q - SSP_TOLERANCE {
                best = a;
                best_q = qa;
            }
        }
        action.insert(s, best);
    }
    Ok(SspPlan {
        action,
        value,
        iterations,
        converged,
    })
}

impl SspPlan {
    /// The refinement as a strategy with singleton action sets.
    pub fn as_strategy(&self, mode: Mode) -> FiniteMemoryStrategy {
        FiniteMemoryStrategy::new(mode, self.action.iter().map(|(&s, &a)| (s, vec![a])).collect())
    }
}

/// On-disk strategy: the settings needed to rebuild the augmented model plus
/// one entry per strategy state, keyed by `"s|{b1,b2}"`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StrategyFile {
    pub mode: Mode,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub model: Option<String>,
    pub initial_belief: String,
    #[serde(default)]
    pub invisible_any_action: bool,
    pub states: BTreeMap<String, StrategyEntry>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StrategyEntry {
    pub actions: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ssp_action: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub value: Option<f64>,
}

impl StrategyFile {
    pub fn from_strategy(
        am: &AugmentedMdp,
        strat: &FiniteMemoryStrategy,
        ssp: Option<&SspPlan>,
        cfg: &AugConfig,
        model: Option<String>,
    ) -> Self {
        let mut states = BTreeMap::new();
        for s in strat.domain() {
            let actions = strat
                .choice(s)
                .expect("domain state")
                .iter()
                .map(|&a| am.mdp.action_name(a).to_string())
                .collect();
            let ssp_action = ssp
                .and_then(|p| p.action.get(&s))
                .map(|&a| am.mdp.action_name(a).to_string());
            let value = ssp.map(|p| p.value[s]).filter(|v| v.is_finite());
            states.insert(
                am.name(s).to_string(),
                StrategyEntry {
                    actions,
                    ssp_action,
                    value,
                },
            );
        }
        StrategyFile {
            mode: strat.mode,
            model,
            initial_belief: cfg.initial_belief.to_string(),
            invisible_any_action: cfg.invisible_any_action,
            states,
        }
    }

    /// Resolves names against `am`. Returns the full strategy and, when every
    /// non-target entry carries one, the SSP action map.
    pub fn resolve(&self, am: &AugmentedMdp) -> Result<(FiniteMemoryStrategy, Option<BTreeMap<AugId, ActionId>>)> {
        let mut choice = BTreeMap::new();
        let mut ssp = BTreeMap::new();
        let mut complete = true;
        for (name, entry) in &self.states {
            let s = am.id_by_name(name).ok_or_else(|| Error::UnknownState(name.clone()))?;
            let mut acts = entry
                .actions
                .iter()
                .map(|a| am.mdp.action_id(a))
                .collect::<Result<Vec<_>>>()?;
            acts.sort_unstable();
            choice.insert(s, acts);
            match &entry.ssp_action {
                Some(a) => {
                    ssp.insert(s, am.mdp.action_id(a)?);
                }
                None if !am.target.contains(s) => complete = false,
                None => {}
            }
        }
        let ssp = (complete && !ssp.is_empty()).then_some(ssp);
        Ok((FiniteMemoryStrategy::new(self.mode, choice), ssp))
    }
}

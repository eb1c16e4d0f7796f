//! Seeded execution of attacker strategies and belief-trace logging.
//!
//! All sampling uses ChaCha8 seeded from a `u64`, so traces are identical
//! across platforms for the same seed.

pub mod oracle;

use std::collections::BTreeMap;
use std::fmt::Write;

use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::asw::AswResult;
use crate::belief::{replay_beliefs, AugId, AugmentedMdp, Mode};
use crate::error::{Error, Result};
use crate::mdp::{ActionId, History, Mdp, ObservationModel, StateId};
use crate::planner::FiniteMemoryStrategy;
use crate::set::StateSet;

pub use oracle::{check_theorem, oracle_obs_equivalent, CheckConfig, Counterexample, TheoremReport};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Status {
    #[serde(rename = "running")]
    Running,
    #[serde(rename = "reached-F")]
    ReachedTarget,
    #[serde(rename = "hit-U")]
    HitUnsafe,
    #[serde(rename = "revealed")]
    Revealed,
}

impl Status {
    pub fn as_str(self) -> &'static str {
        match self {
            Status::Running => "running",
            Status::ReachedTarget => "reached-F",
            Status::HitUnsafe => "hit-U",
            Status::Revealed => "revealed",
        }
    }

    pub fn is_terminal(self) -> bool {
        self != Status::Running
    }
}

/// Objective status of an augmented state.
pub fn status_of(am: &AugmentedMdp, x: AugId) -> Status {
    if am.state(x).is_revealed() {
        Status::Revealed
    } else if am.unsafe_states.contains(x) {
        Status::HitUnsafe
    } else if am.target.contains(x) {
        Status::ReachedTarget
    } else {
        Status::Running
    }
}

/// How actions are drawn from the strategy.
#[derive(Debug, Clone, Copy)]
pub enum Selection<'a> {
    /// Uniform over the strategy's action set.
    Uniform,
    /// The SSP action, falling back to uniform where the map has none.
    Ssp(&'a BTreeMap<AugId, ActionId>),
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TraceStep {
    pub step: usize,
    pub state: String,
    /// Action taken from this state; `None` on the last record.
    pub action: Option<String>,
    pub belief_size: usize,
    pub in_belief: bool,
    pub revealed: bool,
    pub status: Status,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunTrace {
    pub seed: u64,
    pub records: Vec<TraceStep>,
    #[serde(skip)]
    pub aug_path: Vec<AugId>,
    #[serde(skip)]
    pub actions: Vec<ActionId>,
}

impl RunTrace {
    pub fn status(&self) -> Status {
        self.records.last().map(|r| r.status).unwrap_or(Status::Running)
    }

    /// Number of actions taken.
    pub fn steps(&self) -> usize {
        self.actions.len()
    }

    /// The run projected onto the base model.
    pub fn history(&self, am: &AugmentedMdp) -> History {
        let mut h = History::new(am.state(self.aug_path[0]).base);
        for (&a, &x) in self.actions.iter().zip(&self.aug_path[1..]) {
            h.push(a, am.state(x).base);
        }
        h
    }
}

fn choose(
    rng: &mut ChaCha8Rng,
    am: &AugmentedMdp,
    strat: &FiniteMemoryStrategy,
    sel: Selection<'_>,
    x: AugId,
) -> Result<ActionId> {
    let choice = strat
        .choice(x)
        .ok_or_else(|| Error::UndefinedStrategy(am.name(x).to_string()))?;
    if let Selection::Ssp(actions) = sel {
        if let Some(&a) = actions.get(&x) {
            return Ok(a);
        }
    }
    if choice.len() == 1 {
        return Ok(choice[0]);
    }
    let dist = WeightedIndex::new(vec![1.0; choice.len()]).expect("non-empty choice");
    Ok(choice[dist.sample(rng)])
}

fn sample_row(rng: &mut ChaCha8Rng, row: &[(StateId, f64)]) -> StateId {
    if row.len() == 1 {
        return row[0].0;
    }
    let dist = WeightedIndex::new(row.iter().map(|&(_, p)| p)).expect("positive probabilities");
    row[dist.sample(rng)].0
}

/// Samples one run from the first root of `am`.
pub fn simulate(
    am: &AugmentedMdp,
    strat: &FiniteMemoryStrategy,
    sel: Selection<'_>,
    seed: u64,
    max_steps: usize,
) -> Result<RunTrace> {
    simulate_from(am, am.initial(), strat, sel, seed, max_steps)
}

/// Samples one run starting at augmented state `start`. The run stops on
/// reaching the target, an unsafe or revealed state, or after `max_steps`
/// actions.
pub fn simulate_from(
    am: &AugmentedMdp,
    start: AugId,
    strat: &FiniteMemoryStrategy,
    sel: Selection<'_>,
    seed: u64,
    max_steps: usize,
) -> Result<RunTrace> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let m = &am.mdp;
    let mut trace = RunTrace {
        seed,
        records: Vec::new(),
        aug_path: vec![start],
        actions: Vec::new(),
    };
    let mut x = start;
    for step in 0..=max_steps {
        let st = am.state(x);
        let status = status_of(am, x);
        let action = if status.is_terminal() || step == max_steps {
            None
        } else {
            Some(choose(&mut rng, am, strat, sel, x)?)
        };
        trace.records.push(TraceStep {
            step,
            state: am.mdp.state_name(x).split('|').next().unwrap_or_default().to_string(),
            action: action.map(|a| m.action_name(a).to_string()),
            belief_size: st.belief.len(),
            in_belief: st.belief.contains(st.base),
            revealed: st.is_revealed(),
            status,
        });
        let Some(a) = action else { break };
        let row = m
            .successors(x, a)
            .ok_or_else(|| Error::Contract(format!("action `{}` disabled at `{}`", m.action_name(a), am.name(x))))?;
        x = sample_row(&mut rng, row);
        trace.actions.push(a);
        trace.aug_path.push(x);
    }
    Ok(trace)
}

/// `runs` traces with seeds `seed, seed+1, ...`, sampled in parallel and
/// returned in seed order.
pub fn simulate_many(
    am: &AugmentedMdp,
    strat: &FiniteMemoryStrategy,
    sel: Selection<'_>,
    seed: u64,
    runs: usize,
    max_steps: usize,
) -> Result<Vec<RunTrace>> {
    (0..runs as u64)
        .into_par_iter()
        .map(|i| simulate(am, strat, sel, seed.wrapping_add(i), max_steps))
        .collect()
}

pub const CSV_HEADER: &str = "step,state,action,belief_size,in_belief,revealed,status";

/// One row per record; flags are written as 0/1.
pub fn export_trace_csv(t: &RunTrace) -> String {
    let mut out = String::from(CSV_HEADER);
    out.push('\n');
    for r in &t.records {
        writeln!(
            out,
            "{},{},{},{},{},{},{}",
            r.step,
            r.state,
            r.action.as_deref().unwrap_or(""),
            r.belief_size,
            u8::from(r.in_belief),
            u8::from(r.revealed),
            r.status.as_str()
        )
        .unwrap();
    }
    out
}

/// Samples a run of a Markov strategy in the base model until a state of
/// `stop` is reached, a state without a strategy entry is hit, or
/// `max_steps` actions were taken.
pub fn simulate_markov(
    m: &Mdp,
    strategy: &BTreeMap<StateId, Vec<(ActionId, f64)>>,
    start: StateId,
    stop: &StateSet,
    seed: u64,
    max_steps: usize,
) -> History {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut h = History::new(start);
    let mut s = start;
    while h.len() < max_steps && !stop.contains(s) {
        let Some(dist) = strategy.get(&s) else { break };
        let idx = WeightedIndex::new(dist.iter().map(|&(_, p)| p)).expect("positive weights");
        let a = dist[idx.sample(&mut rng)].0;
        let Some(row) = m.successors(s, a) else { break };
        s = sample_row(&mut rng, row);
        h.push(a, s);
    }
    h
}

/// Replays the base history of a run through the action-invisible belief
/// update and counts the steps at which the belief becomes empty.
pub fn invisible_replay_empty_events(
    m: &Mdp,
    obs: &ObservationModel,
    user: &AswResult,
    initial: &StateSet,
    h: &History,
) -> usize {
    let beliefs = replay_beliefs(m, obs, user, Mode::Invisible, initial, h);
    beliefs
        .windows(2)
        .filter(|w| !w[0].is_empty() && w[1].is_empty())
        .count()
        + usize::from(beliefs[0].is_empty())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::asw::asw;
    use crate::belief::AugConfig;
    use crate::mdp::tests::illustrative;
    use crate::mdp::ReachAvoidObjective;
    use crate::planner::{ssp_refine, synthesize, Synthesis};

    fn fig1(visible: bool) -> (Mdp, ObservationModel, Synthesis) {
        let (m, obs) = illustrative();
        let obs = obs.with_action_visibility(visible);
        let none: &[&str] = &[];
        let u = ReachAvoidObjective::from_names(&m, none, &["f0"]).unwrap();
        let a = ReachAvoidObjective::from_names(&m, none, &["f1"]).unwrap();
        let syn = synthesize(&m, &obs, &u, &a, &AugConfig::default()).unwrap();
        (m, obs, syn)
    }

    #[test]
    fn zero_steps_gives_initial_record_only() {
        let (_, _, syn) = fig1(true);
        let t = simulate(&syn.aug, &syn.strategy, Selection::Uniform, 1, 0).unwrap();
        assert_eq!(t.records.len(), 1);
        assert_eq!(t.status(), Status::Running);
        assert_eq!(t.records[0].action, None);
        assert_eq!(t.records[0].state, "1");
    }

    #[test]
    fn same_seed_same_trace() {
        let (_, _, syn) = fig1(true);
        let a = simulate(&syn.aug, &syn.strategy, Selection::Uniform, 42, 50).unwrap();
        let b = simulate(&syn.aug, &syn.strategy, Selection::Uniform, 42, 50).unwrap();
        assert_eq!(export_trace_csv(&a), export_trace_csv(&b));
    }

    #[test]
    fn visible_runs_reach_target_unrevealed() {
        let (_, _, syn) = fig1(true);
        for t in simulate_many(&syn.aug, &syn.strategy, Selection::Uniform, 7, 200, 500).unwrap() {
            assert_eq!(t.status(), Status::ReachedTarget);
            assert!(t.records.iter().all(|r| !r.revealed));
        }
    }

    #[test]
    fn some_run_realizes_the_deceptive_history() {
        let (m, _, syn) = fig1(true);
        let wanted = History::from_names(&m, &["1", "a", "2", "a", "3", "b", "f1"]).unwrap();
        let found = (0..500)
            .map(|seed| simulate(&syn.aug, &syn.strategy, Selection::Uniform, seed, 50).unwrap())
            .any(|t| t.history(&syn.aug) == wanted);
        assert!(found);
    }

    #[test]
    fn ssp_selection_is_deterministic_in_actions() {
        let (_, _, syn) = fig1(true);
        let plan = ssp_refine(&syn.aug, &syn.strategy).unwrap();
        let t = simulate(&syn.aug, &syn.strategy, Selection::Ssp(&plan.action), 3, 100).unwrap();
        for (&x, &a) in t.aug_path.iter().zip(&t.actions) {
            assert_eq!(plan.action.get(&x), Some(&a));
        }
    }

    #[test]
    fn undefined_strategy_is_an_error() {
        let (_, _, syn) = fig1(true);
        let empty = FiniteMemoryStrategy::new(Mode::Visible, BTreeMap::new());
        assert!(matches!(
            simulate(&syn.aug, &empty, Selection::Uniform, 0, 5),
            Err(Error::UndefinedStrategy(_))
        ));
    }

    #[test]
    fn csv_shape() {
        let (_, _, syn) = fig1(true);
        let t = simulate(&syn.aug, &syn.strategy, Selection::Uniform, 9, 30).unwrap();
        let csv = export_trace_csv(&t);
        let mut lines = csv.lines();
        assert_eq!(lines.next(), Some(CSV_HEADER));
        for line in lines {
            assert_eq!(line.split(',').count(), 7);
        }
        let empty = RunTrace {
            seed: 0,
            records: vec![],
            aug_path: vec![],
            actions: vec![],
        };
        assert_eq!(export_trace_csv(&empty), format!("{CSV_HEADER}\n"));
    }

    #[test]
    fn visible_runs_stay_consistent_under_invisible_updates() {
        let (m, obs, syn) = fig1(true);
        let initial = syn.aug.state(syn.aug.initial()).belief.clone();
        for t in simulate_many(&syn.aug, &syn.strategy, Selection::Uniform, 100, 300, 100).unwrap() {
            let h = t.history(&syn.aug);
            assert_eq!(invisible_replay_empty_events(&m, &obs, &syn.user, &initial, &h), 0);
        }
    }

    #[test]
    fn markov_runs_of_the_user_reach_the_goal() {
        let (m, _) = illustrative();
        let none: &[&str] = &[];
        let u = ReachAvoidObjective::from_names(&m, none, &["f0"]).unwrap();
        let r = asw(&m, &u);
        let strategy = r.markov_strategy();
        for seed in 0..200 {
            let h = simulate_markov(&m, &strategy, 0, &u.target, seed, 1000);
            assert!(u.target.contains(h.last()));
        }
    }
}

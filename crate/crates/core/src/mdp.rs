//! Finite MDPs, reach-avoid objectives, the defender's observation model and
//! histories.
//!
//! States and actions are interned to dense ids when a model is built; names
//! are kept only for reporting. The qualitative algorithms downstream look at
//! transition supports and never at the probability values themselves.

use std::collections::HashMap;
use std::fmt;

use crate::error::{Error, Result};
use crate::set::StateSet;

pub type StateId = usize;
pub type ActionId = usize;
pub type ClassId = usize;

/// Tolerance on the row sums of a transition distribution.
pub const PROB_TOLERANCE: f64 = 1e-9;

/// A discrete distribution over successor states, sorted by state id.
pub type Distribution = Vec<(StateId, f64)>;

#[derive(Debug, Clone)]
pub struct Mdp {
    state_names: Vec<String>,
    action_names: Vec<String>,
    state_index: HashMap<String, StateId>,
    action_index: HashMap<String, ActionId>,
    enabled: Vec<Vec<ActionId>>,
    trans: Vec<Vec<Option<Distribution>>>,
    initial: StateId,
}

impl Mdp {
    /// Creates a model with no enabled actions; transitions are added with
    /// [`Mdp::set_transition`].
    pub fn new(state_names: Vec<String>, action_names: Vec<String>, initial: StateId) -> Result<Self> {
        let mut state_index = HashMap::with_capacity(state_names.len());
        for (i, name) in state_names.iter().enumerate() {
            if state_index.insert(name.clone(), i).is_some() {
                return Err(Error::DuplicateState(name.clone()));
            }
        }
        let mut action_index = HashMap::with_capacity(action_names.len());
        for (i, name) in action_names.iter().enumerate() {
            if action_index.insert(name.clone(), i).is_some() {
                return Err(Error::DuplicateAction(name.clone()));
            }
        }
        if initial >= state_names.len() {
            return Err(Error::Format(format!("initial state id {initial} out of range")));
        }
        let n = state_names.len();
        let m = action_names.len();
        Ok(Mdp {
            state_names,
            action_names,
            state_index,
            action_index,
            enabled: vec![Vec::new(); n],
            trans: vec![vec![None; m]; n],
            initial,
        })
    }

    /// Declares `a` enabled at `s` without giving it a distribution. Only the
    /// loader needs this, so that an enabled action lacking a row is reported
    /// by [`validate`] instead of being silently dropped.
    pub fn enable(&mut self, s: StateId, a: ActionId) {
        if let Err(pos) = self.enabled[s].binary_search(&a) {
            self.enabled[s].insert(pos, a);
        }
    }

    /// Sets `P(·|s,a)` and marks `a` enabled at `s`. Repeated successors are
    /// merged.
    pub fn set_transition(&mut self, s: StateId, a: ActionId, mut dist: Distribution) {
        dist.sort_by_key(|&(t, _)| t);
        let mut merged: Distribution = Vec::with_capacity(dist.len());
        for (t, p) in dist {
            match merged.last_mut() {
                Some((last, q)) if *last == t => *q += p,
                _ => merged.push((t, p)),
            }
        }
        self.enable(s, a);
        self.trans[s][a] = Some(merged);
    }

    /// Stores a row for an action that is not enabled. Only used by the loader
    /// so that [`validate`] can report the inconsistency.
    pub(crate) fn set_orphan_transition(&mut self, s: StateId, a: ActionId, dist: Distribution) {
        self.trans[s][a] = Some(dist);
    }

    pub fn num_states(&self) -> usize {
        self.state_names.len()
    }

    pub fn num_actions(&self) -> usize {
        self.action_names.len()
    }

    pub fn initial(&self) -> StateId {
        self.initial
    }

    pub fn set_initial(&mut self, s: StateId) {
        assert!(s < self.num_states());
        self.initial = s;
    }

    pub fn states(&self) -> std::ops::Range<StateId> {
        0..self.num_states()
    }

    /// Enabled actions `A(s)`, ascending.
    pub fn enabled(&self, s: StateId) -> &[ActionId] {
        &self.enabled[s]
    }

    pub fn is_enabled(&self, s: StateId, a: ActionId) -> bool {
        self.enabled[s].binary_search(&a).is_ok()
    }

    /// `P(·|s,a)`, or `None` when `a` is not enabled at `s`.
    pub fn successors(&self, s: StateId, a: ActionId) -> Option<&[(StateId, f64)]> {
        if !self.is_enabled(s, a) {
            return None;
        }
        self.trans[s][a].as_deref()
    }

    pub fn prob(&self, s: StateId, a: ActionId, t: StateId) -> f64 {
        self.successors(s, a)
            .and_then(|row| row.iter().find(|&&(u, _)| u == t).map(|&(_, p)| p))
            .unwrap_or(0.0)
    }

    /// `Post({s}, a)`.
    pub fn post_state(&self, s: StateId, a: ActionId) -> StateSet {
        let mut out = StateSet::empty(self.num_states());
        if let Some(row) = self.successors(s, a) {
            for &(t, _) in row {
                out.insert(t);
            }
        }
        out
    }

    pub fn state_name(&self, s: StateId) -> &str {
        &self.state_names[s]
    }

    pub fn action_name(&self, a: ActionId) -> &str {
        &self.action_names[a]
    }

    pub fn state_names(&self) -> &[String] {
        &self.state_names
    }

    pub fn action_names(&self) -> &[String] {
        &self.action_names
    }

    pub fn state_id(&self, name: &str) -> Result<StateId> {
        self.state_index
            .get(name)
            .copied()
            .ok_or_else(|| Error::UnknownState(name.to_string()))
    }

    pub fn action_id(&self, name: &str) -> Result<ActionId> {
        self.action_index
            .get(name)
            .copied()
            .ok_or_else(|| Error::UnknownAction(name.to_string()))
    }

    pub fn state_set<S: AsRef<str>>(&self, names: &[S]) -> Result<StateSet> {
        let mut set = StateSet::empty(self.num_states());
        for name in names {
            set.insert(self.state_id(name.as_ref())?);
        }
        Ok(set)
    }

    /// Comma-separated state names, in id order.
    pub fn format_set(&self, set: &StateSet) -> String {
        let names: Vec<&str> = set.iter().map(|s| self.state_name(s)).collect();
        format!("{{{}}}", names.join(","))
    }

    /// Every enabled `(s, a)` pair with its distribution, in id order.
    pub fn rows(&self) -> impl Iterator<Item = (StateId, ActionId, &[(StateId, f64)])> + '_ {
        self.states().flat_map(move |s| {
            self.enabled[s]
                .iter()
                .filter_map(move |&a| self.trans[s][a].as_deref().map(|row| (s, a, row)))
        })
    }
}

/// `Post(X, a)`: states reachable with positive probability by playing `a`
/// from some member of `X`. Members of `X` where `a` is not enabled contribute
/// nothing.
pub fn post(m: &Mdp, x: &StateSet, a: ActionId) -> StateSet {
    let mut out = StateSet::empty(m.num_states());
    for s in x.iter() {
        if let Some(row) = m.successors(s, a) {
            for &(t, _) in row {
                out.insert(t);
            }
        }
    }
    out
}

/// The reach-avoid objective "avoid `unsafe_states` until `target`".
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ReachAvoidObjective {
    pub unsafe_states: StateSet,
    pub target: StateSet,
}

impl ReachAvoidObjective {
    pub fn new(unsafe_states: StateSet, target: StateSet) -> Self {
        ReachAvoidObjective { unsafe_states, target }
    }

    pub fn from_names<S: AsRef<str>>(m: &Mdp, unsafe_states: &[S], target: &[S]) -> Result<Self> {
        Ok(ReachAvoidObjective {
            unsafe_states: m.state_set(unsafe_states)?,
            target: m.state_set(target)?,
        })
    }
}

/// The defender's view: a partition of the states into observation classes
/// and whether actions are observed.
#[derive(Debug, Clone)]
pub struct ObservationModel {
    classes: Vec<Vec<StateId>>,
    class_sets: Vec<StateSet>,
    class_of: Vec<Option<ClassId>>,
    action_visible: bool,
}

impl ObservationModel {
    /// Builds the model from a list of classes. Malformed partitions are
    /// accepted here and reported by [`validate`].
    pub fn new(num_states: usize, classes: Vec<Vec<StateId>>, action_visible: bool) -> Self {
        let mut class_of = vec![None; num_states];
        let mut class_sets = Vec::with_capacity(classes.len());
        for (c, members) in classes.iter().enumerate() {
            let mut set = StateSet::empty(num_states);
            for &s in members {
                if s < num_states {
                    set.insert(s);
                    class_of[s].get_or_insert(c);
                }
            }
            class_sets.push(set);
        }
        ObservationModel {
            classes,
            class_sets,
            class_of,
            action_visible,
        }
    }

    /// Every state observed exactly.
    pub fn full(num_states: usize, action_visible: bool) -> Self {
        Self::new(num_states, (0..num_states).map(|s| vec![s]).collect(), action_visible)
    }

    pub fn action_visible(&self) -> bool {
        self.action_visible
    }

    pub fn with_action_visibility(&self, action_visible: bool) -> Self {
        ObservationModel {
            action_visible,
            ..self.clone()
        }
    }

    pub fn num_classes(&self) -> usize {
        self.classes.len()
    }

    pub fn class_of(&self, s: StateId) -> Option<ClassId> {
        self.class_of.get(s).copied().flatten()
    }

    pub fn class_set(&self, c: ClassId) -> &StateSet {
        &self.class_sets[c]
    }

    pub fn classes(&self) -> &[Vec<StateId>] {
        &self.classes
    }

    /// `DObs_S(s)`.
    pub fn dobs(&self, s: StateId) -> Option<&StateSet> {
        self.class_of(s).map(|c| &self.class_sets[c])
    }
}

/// A finite alternating sequence `s0 a0 s1 a1 ... sn`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct History {
    states: Vec<StateId>,
    actions: Vec<ActionId>,
}

impl History {
    pub fn new(start: StateId) -> Self {
        History {
            states: vec![start],
            actions: Vec::new(),
        }
    }

    pub fn push(&mut self, a: ActionId, s: StateId) {
        self.actions.push(a);
        self.states.push(s);
    }

    /// Drops the last step; the start state is never removed.
    pub fn pop(&mut self) -> Option<(ActionId, StateId)> {
        let a = self.actions.pop()?;
        let s = self.states.pop().expect("one state per action plus the start");
        Some((a, s))
    }

    pub fn from_names(m: &Mdp, seq: &[&str]) -> Result<Self> {
        if seq.is_empty() || seq.len().is_multiple_of(2) {
            return Err(Error::InvalidHistory(
                "a history alternates states and actions and starts and ends with a state".into(),
            ));
        }
        let mut h = History::new(m.state_id(seq[0])?);
        for pair in seq[1..].chunks(2) {
            h.push(m.action_id(pair[0])?, m.state_id(pair[1])?);
        }
        Ok(h)
    }

    pub fn states(&self) -> &[StateId] {
        &self.states
    }

    pub fn actions(&self) -> &[ActionId] {
        &self.actions
    }

    /// Number of transitions.
    pub fn len(&self) -> usize {
        self.actions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.actions.is_empty()
    }

    pub fn last(&self) -> StateId {
        *self.states.last().expect("history is never empty")
    }

    /// States visited by the history.
    pub fn occ(&self, num_states: usize) -> StateSet {
        StateSet::from_ids(num_states, self.states.iter().copied())
    }

    /// The prefix with `steps` transitions.
    pub fn prefix(&self, steps: usize) -> History {
        History {
            states: self.states[..=steps].to_vec(),
            actions: self.actions[..steps].to_vec(),
        }
    }

    /// Checks that every action is enabled and every step has positive
    /// probability.
    pub fn check(&self, m: &Mdp) -> Result<()> {
        for (i, &a) in self.actions.iter().enumerate() {
            let (s, t) = (self.states[i], self.states[i + 1]);
            if !m.is_enabled(s, a) {
                return Err(Error::InvalidHistory(format!(
                    "action {} is not enabled at {}",
                    m.action_name(a),
                    m.state_name(s)
                )));
            }
            if m.prob(s, a, t) <= 0.0 {
                return Err(Error::InvalidHistory(format!(
                    "{} -{}-> {} has probability zero",
                    m.state_name(s),
                    m.action_name(a),
                    m.state_name(t)
                )));
            }
        }
        Ok(())
    }

    pub fn display(&self, m: &Mdp) -> String {
        let mut out = m.state_name(self.states[0]).to_string();
        for (a, s) in self.actions.iter().zip(&self.states[1..]) {
            out.push_str(&format!(" -{}-> {}", m.action_name(*a), m.state_name(*s)));
        }
        out
    }
}

/// One symbol of the defender's observation of a history.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ObsSymbol {
    State(ClassId),
    Action(ActionId),
    /// The single symbol every action maps to when actions are invisible.
    AnyAction,
}

/// `DObs(h)` under the observation model's own action visibility.
pub fn observe_history(obs: &ObservationModel, m: &Mdp, h: &History) -> Result<Vec<ObsSymbol>> {
    observe_history_as(obs, m, h, obs.action_visible())
}

pub fn observe_history_as(
    obs: &ObservationModel,
    m: &Mdp,
    h: &History,
    action_visible: bool,
) -> Result<Vec<ObsSymbol>> {
    let class = |s: StateId| {
        obs.class_of(s)
            .map(ObsSymbol::State)
            .ok_or_else(|| Error::Unobserved(m.state_name(s).to_string()))
    };
    let mut out = Vec::with_capacity(2 * h.len() + 1);
    out.push(class(h.states[0])?);
    for (&a, &s) in h.actions.iter().zip(&h.states[1..]) {
        out.push(if action_visible {
            ObsSymbol::Action(a)
        } else {
            ObsSymbol::AnyAction
        });
        out.push(class(s)?);
    }
    Ok(out)
}

/// Maps a visible-mode observation sequence to its invisible-mode image.
pub fn hide_actions(seq: &[ObsSymbol]) -> Vec<ObsSymbol> {
    seq.iter()
        .map(|sym| match sym {
            ObsSymbol::Action(_) => ObsSymbol::AnyAction,
            other => *other,
        })
        .collect()
}

/// Renders an observation sequence with state names, e.g. `{1} a {2,3}`.
pub fn format_observation(obs: &ObservationModel, m: &Mdp, seq: &[ObsSymbol]) -> String {
    seq.iter()
        .map(|sym| match *sym {
            ObsSymbol::State(c) => m.format_set(obs.class_set(c)),
            ObsSymbol::Action(a) => m.action_name(a).to_string(),
            ObsSymbol::AnyAction => "⊤".to_string(),
        })
        .collect::<Vec<_>>()
        .join(" ")
}

/// A model defect found by [`validate`]. Names refer to the offending state,
/// action, class or objective.
#[derive(Debug, Clone, PartialEq)]
pub enum Violation {
    NoEnabledActions {
        state: String,
    },
    MissingTransition {
        state: String,
        action: String,
    },
    TransitionForDisabledAction {
        state: String,
        action: String,
    },
    NonPositiveProbability {
        state: String,
        action: String,
        successor: String,
        probability: f64,
    },
    ProbabilitySum {
        state: String,
        action: String,
        sum: f64,
    },
    UncoveredState {
        state: String,
    },
    StateInSeveralClasses {
        state: String,
        classes: Vec<ClassId>,
    },
    UnknownStateInClass {
        class: ClassId,
        state: StateId,
    },
    EmptyClass {
        class: ClassId,
    },
    EnabledActionsDiffer {
        class: ClassId,
        state: String,
        other: String,
    },
    UnsafeTargetOverlap {
        objective: String,
        state: String,
    },
    ObjectiveUniverse {
        objective: String,
    },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::NoEnabledActions { state } => write!(f, "state {state} enables no action"),
            Violation::MissingTransition { state, action } => {
                write!(f, "({state},{action}): action enabled but no distribution given")
            }
            Violation::TransitionForDisabledAction { state, action } => {
                write!(
                    f,
                    "({state},{action}): distribution given for an action that is not enabled"
                )
            }
            Violation::NonPositiveProbability {
                state,
                action,
                successor,
                probability,
            } => write!(
                f,
                "({state},{action}): successor {successor} listed with non-positive probability {probability}"
            ),
            Violation::ProbabilitySum { state, action, sum } => {
                write!(f, "({state},{action}): probabilities sum to {sum}, not 1")
            }
            Violation::UncoveredState { state } => {
                write!(f, "state {state} belongs to no observation class")
            }
            Violation::StateInSeveralClasses { state, classes } => {
                write!(f, "state {state} appears in observation classes {classes:?}")
            }
            Violation::UnknownStateInClass { class, state } => {
                write!(f, "observation class {class} lists unknown state id {state}")
            }
            Violation::EmptyClass { class } => write!(f, "observation class {class} is empty"),
            Violation::EnabledActionsDiffer { class, state, other } => write!(
                f,
                "observation class {class}: {state} and {other} enable different actions"
            ),
            Violation::UnsafeTargetOverlap { objective, state } => {
                write!(f, "objective {objective}: state {state} is both unsafe and a target")
            }
            Violation::ObjectiveUniverse { objective } => {
                write!(f, "objective {objective}: state sets do not match the model size")
            }
        }
    }
}

/// Checks every model invariant and returns the defects found; an empty list
/// means the model, partition and objectives are well formed.
pub fn validate(m: &Mdp, obs: &ObservationModel, objectives: &[(&str, &ReachAvoidObjective)]) -> Vec<Violation> {
    let mut out = Vec::new();
    let sn = |s: StateId| m.state_name(s).to_string();
    let an = |a: ActionId| m.action_name(a).to_string();

    for s in m.states() {
        if m.enabled(s).is_empty() {
            out.push(Violation::NoEnabledActions { state: sn(s) });
        }
        for a in 0..m.num_actions() {
            let enabled = m.is_enabled(s, a);
            match (&m.trans[s][a], enabled) {
                (None, true) => out.push(Violation::MissingTransition {
                    state: sn(s),
                    action: an(a),
                }),
                (Some(_), false) => out.push(Violation::TransitionForDisabledAction {
                    state: sn(s),
                    action: an(a),
                }),
                (Some(row), true) => {
                    for &(t, p) in row {
                        if p <= 0.0 || !p.is_finite() {
                            out.push(Violation::NonPositiveProbability {
                                state: sn(s),
                                action: an(a),
                                successor: sn(t),
                                probability: p,
                            });
                        }
                    }
                    let sum: f64 = row.iter().map(|&(_, p)| p).sum();
                    if (sum - 1.0).abs() > PROB_TOLERANCE {
                        out.push(Violation::ProbabilitySum {
                            state: sn(s),
                            action: an(a),
                            sum,
                        });
                    }
                }
                (None, false) => {}
            }
        }
    }

    let mut seen: Vec<Vec<ClassId>> = vec![Vec::new(); m.num_states()];
    for (c, members) in obs.classes().iter().enumerate() {
        if members.is_empty() {
            out.push(Violation::EmptyClass { class: c });
        }
        for &s in members {
            if s >= m.num_states() {
                out.push(Violation::UnknownStateInClass { class: c, state: s });
            } else if !seen[s].contains(&c) {
                seen[s].push(c);
            }
        }
    }
    for s in m.states() {
        match seen[s].len() {
            0 => out.push(Violation::UncoveredState { state: sn(s) }),
            1 => {}
            _ => out.push(Violation::StateInSeveralClasses {
                state: sn(s),
                classes: seen[s].clone(),
            }),
        }
    }
    for c in 0..obs.num_classes() {
        let set = obs.class_set(c);
        if let Some(first) = set.iter().next() {
            for other in set.iter().skip(1) {
                if m.enabled(first) != m.enabled(other) {
                    out.push(Violation::EnabledActionsDiffer {
                        class: c,
                        state: sn(first),
                        other: sn(other),
                    });
                }
            }
        }
    }

    for (name, obj) in objectives {
        if obj.unsafe_states.universe() != m.num_states() || obj.target.universe() != m.num_states() {
            out.push(Violation::ObjectiveUniverse {
                objective: name.to_string(),
            });
            continue;
        }
        for s in obj.unsafe_states.intersection(&obj.target).iter() {
            out.push(Violation::UnsafeTargetOverlap {
                objective: name.to_string(),
                state: sn(s),
            });
        }
    }
    out
}

#[cfg(test)]
pub(crate) mod tests {
    use super::*;

    /// The six-state illustrative model: `1 -a-> 2`, `1 -b-> 3`,
    /// `2 -a-> {2,3}`, `2 -b-> {f0,4}`, `3 -a-> 4`, `3 -b-> f1`,
    /// `4 -a-> {4,f0}`, `4 -b-> f1`, with `f0`, `f1` absorbing.
    pub(crate) fn illustrative() -> (Mdp, ObservationModel) {
        let names = ["1", "2", "3", "4", "f0", "f1"].map(String::from).to_vec();
        let mut m = Mdp::new(names, vec!["a".into(), "b".into()], 0).unwrap();
        let (a, b) = (0, 1);
        let (s1, s2, s3, s4, f0, f1) = (0, 1, 2, 3, 4, 5);
        m.set_transition(s1, a, vec![(s2, 1.0)]);
        m.set_transition(s1, b, vec![(s3, 1.0)]);
        m.set_transition(s2, a, vec![(s2, 0.5), (s3, 0.5)]);
        m.set_transition(s2, b, vec![(f0, 0.5), (s4, 0.5)]);
        m.set_transition(s3, a, vec![(s4, 1.0)]);
        m.set_transition(s3, b, vec![(f1, 1.0)]);
        m.set_transition(s4, a, vec![(s4, 0.5), (f0, 0.5)]);
        m.set_transition(s4, b, vec![(f1, 1.0)]);
        for sink in [f0, f1] {
            m.set_transition(sink, a, vec![(sink, 1.0)]);
            m.set_transition(sink, b, vec![(sink, 1.0)]);
        }
        let obs = ObservationModel::new(6, vec![vec![s1], vec![s2, s3], vec![s4, f1], vec![f0]], true);
        (m, obs)
    }

    #[test]
    fn illustrative_model_is_valid() {
        let (m, obs) = illustrative();
        let user = ReachAvoidObjective::from_names(&m, &[] as &[&str], &["f0"]).unwrap();
        assert!(validate(&m, &obs, &[("user", &user)]).is_empty());
    }

    #[test]
    fn row_sum_violation_names_the_pair() {
        let (mut m, obs) = illustrative();
        m.set_transition(1, 0, vec![(1, 0.49), (2, 0.49)]);
        let v = validate(&m, &obs, &[]);
        assert_eq!(v.len(), 1);
        match &v[0] {
            Violation::ProbabilitySum { state, action, sum } => {
                assert_eq!((state.as_str(), action.as_str()), ("2", "a"));
                assert!((sum - 0.98).abs() < 1e-12);
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn partition_defects_are_reported() {
        let (m, _) = illustrative();
        let obs = ObservationModel::new(6, vec![vec![0, 1], vec![1, 2], vec![3, 5]], true);
        let v = validate(&m, &obs, &[]);
        assert!(v.contains(&Violation::UncoveredState { state: "f0".into() }));
        assert!(v
            .iter()
            .any(|x| matches!(x, Violation::StateInSeveralClasses { state, .. } if state == "2")));
    }

    #[test]
    fn mixed_enabled_sets_violate_assumption() {
        let (mut m, obs) = illustrative();
        // drop b at 3 so that class {2,3} mixes {a,b} with {a}
        m.enabled[2].retain(|&a| a != 1);
        m.trans[2][1] = None;
        let v = validate(&m, &obs, &[]);
        assert!(v.iter().any(
            |x| matches!(x, Violation::EnabledActionsDiffer { state, other, .. } if state == "2" && other == "3")
        ));
    }

    #[test]
    fn objective_overlap() {
        let (m, obs) = illustrative();
        let bad = ReachAvoidObjective::from_names(&m, &["f0"], &["f0"]).unwrap();
        let v = validate(&m, &obs, &[("user", &bad)]);
        assert_eq!(
            v,
            vec![Violation::UnsafeTargetOverlap {
                objective: "user".into(),
                state: "f0".into()
            }]
        );
    }

    #[test]
    fn post_examples() {
        let (m, _) = illustrative();
        let x = StateSet::singleton(6, 1);
        assert_eq!(post(&m, &x, 0).to_vec(), vec![1, 2]);
        assert!(post(&m, &StateSet::empty(6), 0).is_empty());
    }

    #[test]
    fn post_skips_states_without_the_action() {
        let (mut m, _) = illustrative();
        m.enabled[0] = vec![1];
        let x = StateSet::from_ids(6, [0, 2]);
        assert_eq!(post(&m, &x, 0).to_vec(), vec![3]);
    }

    #[test]
    fn history_observations() {
        let (m, obs) = illustrative();
        let h = History::from_names(&m, &["1", "a", "2", "a", "3"]).unwrap();
        h.check(&m).unwrap();
        let seq = observe_history(&obs, &m, &h).unwrap();
        assert_eq!(format_observation(&obs, &m, &seq), "{1} a {2,3} a {2,3}");
        let hidden = observe_history(&obs.with_action_visibility(false), &m, &h).unwrap();
        assert_eq!(format_observation(&obs, &m, &hidden), "{1} ⊤ {2,3} ⊤ {2,3}");
        assert_eq!(hide_actions(&seq), hidden);

        let h2 = History::from_names(&m, &["1", "b", "3", "b", "f1"]).unwrap();
        let seq2 = observe_history(&obs, &m, &h2).unwrap();
        assert_eq!(format_observation(&obs, &m, &seq2), "{1} b {2,3} b {4,f1}");
    }

    #[test]
    fn unobserved_state_is_an_error() {
        let (m, _) = illustrative();
        let obs = ObservationModel::new(6, vec![vec![0], vec![1, 2]], true);
        let h = History::from_names(&m, &["1", "b", "3", "a", "4"]).unwrap();
        assert!(matches!(observe_history(&obs, &m, &h), Err(Error::Unobserved(s)) if s == "4"));
    }

    #[test]
    fn invalid_history_detected() {
        let (m, _) = illustrative();
        let h = History::from_names(&m, &["1", "a", "3"]).unwrap();
        assert!(h.check(&m).is_err());
        assert!(History::from_names(&m, &["1", "a"]).is_err());
    }
}

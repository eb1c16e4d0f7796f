//! Belief-augmented MDPs.
//!
//! An augmented state `(s, B)` pairs the true state with the defender's
//! belief `B`: the set of states a legitimate user, playing only actions
//! permissible for the user objective, could be in given everything the
//! defender has observed. An empty belief means the observations are
//! inconsistent with any legitimate behavior; `(s, ∅)` is absorbing.
//!
//! Only states reachable from the initial augmented state(s) are built.

use std::collections::{HashMap, VecDeque};
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::asw::AswResult;
use crate::error::{Error, Result};
use crate::mdp::{ActionId, Mdp, ObservationModel, ReachAvoidObjective, StateId};
use crate::set::StateSet;

pub type AugId = usize;

/// Whether the defender observes the agent's actions.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    Visible,
    Invisible,
}

impl Mode {
    pub fn of(obs: &ObservationModel) -> Mode {
        if obs.action_visible() {
            Mode::Visible
        } else {
            Mode::Invisible
        }
    }

    pub fn letter(self) -> char {
        match self {
            Mode::Visible => 'V',
            Mode::Invisible => 'I',
        }
    }
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Mode::Visible => "visible",
            Mode::Invisible => "invisible",
        })
    }
}

impl std::str::FromStr for Mode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "visible" => Ok(Mode::Visible),
            "invisible" => Ok(Mode::Invisible),
            other => Err(Error::Format(format!("unknown mode `{other}`"))),
        }
    }
}

/// The defender's belief at the start of a run.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum InitialBelief {
    /// The defender knows the initial state.
    Singleton,
    /// The observation class of the initial state.
    ObservationClass,
    /// A fixed set, used for a single root only.
    Explicit(StateSet),
}

impl InitialBelief {
    pub fn parse(name: &str) -> Result<Self> {
        match name {
            "singleton" => Ok(InitialBelief::Singleton),
            "obs-class" => Ok(InitialBelief::ObservationClass),
            other => Err(Error::Format(format!("unknown initial belief `{other}`"))),
        }
    }

    pub fn resolve(&self, obs: &ObservationModel, s0: StateId, num_states: usize) -> Result<StateSet> {
        match self {
            InitialBelief::Singleton => Ok(StateSet::singleton(num_states, s0)),
            InitialBelief::ObservationClass => obs.dobs(s0).cloned().ok_or_else(|| Error::Unobserved(s0.to_string())),
            InitialBelief::Explicit(set) => Ok(set.clone()),
        }
    }
}

impl fmt::Display for InitialBelief {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            InitialBelief::Singleton => f.write_str("singleton"),
            InitialBelief::ObservationClass => f.write_str("obs-class"),
            InitialBelief::Explicit(_) => f.write_str("explicit"),
        }
    }
}

#[derive(Debug, Clone)]
pub struct AugConfig {
    pub initial_belief: InitialBelief,
    /// Action-invisible mode only: let the attacker play every enabled action
    /// rather than only those permissible from some belief state. The belief
    /// update is unchanged. Experimental.
    pub invisible_any_action: bool,
}

impl Default for AugConfig {
    fn default() -> Self {
        AugConfig {
            initial_belief: InitialBelief::ObservationClass,
            invisible_any_action: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct AugState {
    pub base: StateId,
    pub belief: StateSet,
}

impl AugState {
    pub fn is_revealed(&self) -> bool {
        self.belief.is_empty()
    }

    /// `"s|{b1,b2}"`, or `"s|{}"` for a revealed state.
    pub fn name(&self, m: &Mdp) -> String {
        format!("{}|{}", m.state_name(self.base), m.format_set(&self.belief))
    }
}

#[derive(Debug, Clone)]
pub struct AugmentedMdp {
    /// The augmented model itself, over augmented state ids.
    pub mdp: Mdp,
    /// Revealed states and non-revealed states over unsafe base states.
    pub unsafe_states: StateSet,
    /// Non-revealed states over target base states.
    pub target: StateSet,
    pub mode: Mode,
    states: Vec<AugState>,
    index: HashMap<AugState, AugId>,
    roots: Vec<AugId>,
}

impl AugmentedMdp {
    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }

    pub fn state(&self, id: AugId) -> &AugState {
        &self.states[id]
    }

    pub fn states(&self) -> &[AugState] {
        &self.states
    }

    pub fn id_of(&self, s: &AugState) -> Option<AugId> {
        self.index.get(s).copied()
    }

    pub fn id_by_name(&self, name: &str) -> Option<AugId> {
        self.mdp.state_id(name).ok()
    }

    pub fn name(&self, id: AugId) -> &str {
        self.mdp.state_name(id)
    }

    /// The first root.
    pub fn initial(&self) -> AugId {
        self.roots[0]
    }

    /// One augmented initial state per requested base initial state, in
    /// request order.
    pub fn roots(&self) -> &[AugId] {
        &self.roots
    }

    /// The attacker's reach-avoid objective over augmented states.
    pub fn objective(&self) -> ReachAvoidObjective {
        ReachAvoidObjective::new(self.unsafe_states.clone(), self.target.clone())
    }
}

/// Visible-mode belief update after observing `a` and the class of `next`.
/// Returns `∅` when `a` is not permissible from any belief state.
pub fn visible_update(
    m: &Mdp,
    obs: &ObservationModel,
    user: &AswResult,
    belief: &StateSet,
    a: ActionId,
    next: StateId,
) -> StateSet {
    let mut reach = permissible_post(m, user, belief, a);
    match obs.dobs(next) {
        Some(class) => reach.intersect_with(class),
        None => reach = StateSet::empty(m.num_states()),
    }
    reach
}

/// Invisible-mode belief update after observing the class of `next`: every
/// permissible action of every belief state is considered.
pub fn invisible_update(
    m: &Mdp,
    obs: &ObservationModel,
    user: &AswResult,
    belief: &StateSet,
    next: StateId,
) -> StateSet {
    let mut reach = permissible_post_any(m, user, belief);
    match obs.dobs(next) {
        Some(class) => reach.intersect_with(class),
        None => reach = StateSet::empty(m.num_states()),
    }
    reach
}

/// `⋃ {Post(s°, a) : s° ∈ B, a ∈ Allowed₀(s°)}` for one fixed `a`.
fn permissible_post(m: &Mdp, user: &AswResult, belief: &StateSet, a: ActionId) -> StateSet {
    let mut out = StateSet::empty(m.num_states());
    for so in belief.iter() {
        if user.permissible(so, a) {
            out.union_with(&m.post_state(so, a));
        }
    }
    out
}

/// `⋃ {Post(s°, a°) : s° ∈ B, a° ∈ Allowed₀(s°)}`.
fn permissible_post_any(m: &Mdp, user: &AswResult, belief: &StateSet) -> StateSet {
    let mut out = StateSet::empty(m.num_states());
    for so in belief.iter() {
        for &a in user.allowed(so) {
            out.union_with(&m.post_state(so, a));
        }
    }
    out
}

/// Replays a base-model run through the belief update of `mode`, starting
/// from `initial`. Returns one belief per state of the run.
pub fn replay_beliefs(
    m: &Mdp,
    obs: &ObservationModel,
    user: &AswResult,
    mode: Mode,
    initial: &StateSet,
    h: &crate::mdp::History,
) -> Vec<StateSet> {
    let mut beliefs = vec![initial.clone()];
    for (&a, &next) in h.actions().iter().zip(&h.states()[1..]) {
        let b = beliefs.last().expect("non-empty");
        let nb = if b.is_empty() {
            b.clone()
        } else {
            match mode {
                Mode::Visible => visible_update(m, obs, user, b, a, next),
                Mode::Invisible => invisible_update(m, obs, user, b, next),
            }
        };
        beliefs.push(nb);
    }
    beliefs
}

struct Builder<'a> {
    m: &'a Mdp,
    obs: &'a ObservationModel,
    user: &'a AswResult,
    attacker: &'a ReachAvoidObjective,
    mode: Mode,
    any_action: bool,
    states: Vec<AugState>,
    index: HashMap<AugState, AugId>,
    queue: VecDeque<AugId>,
    rows: Vec<Vec<AugRow>>,
}

/// One enabled action of an augmented state with its successor distribution.
type AugRow = (ActionId, Vec<(AugId, f64)>);

impl<'a> Builder<'a> {
    fn intern(&mut self, st: AugState) -> AugId {
        if let Some(&id) = self.index.get(&st) {
            return id;
        }
        let id = self.states.len();
        self.index.insert(st.clone(), id);
        self.states.push(st);
        self.rows.push(Vec::new());
        self.queue.push_back(id);
        id
    }

    fn revealed(&self, s: StateId) -> AugState {
        AugState {
            base: s,
            belief: StateSet::empty(self.m.num_states()),
        }
    }

    fn check_assumption(&self, st: &AugState) -> Result<()> {
        let own = self.m.enabled(st.base);
        for so in st.belief.iter() {
            if self.m.enabled(so) != own {
                return Err(Error::MixedEnabledActions {
                    aug_state: st.name(self.m),
                    state: self.m.state_name(st.base).to_string(),
                    other: self.m.state_name(so).to_string(),
                });
            }
        }
        Ok(())
    }

    /// Successor `(s'', B')` for every `s'' ∈ Post(s, a)`, with `B'` the
    /// permissible reach set restricted to the class of `s''`.
    fn observed_successors(&mut self, s: StateId, a: ActionId, reach: &StateSet) -> Vec<(AugId, f64)> {
        let row: Vec<(StateId, f64)> = self.m.successors(s, a).map(|r| r.to_vec()).unwrap_or_default();
        row.into_iter()
            .map(|(next, p)| {
                let mut belief = reach.clone();
                match self.obs.dobs(next) {
                    Some(class) => belief.intersect_with(class),
                    None => belief = StateSet::empty(self.m.num_states()),
                }
                (self.intern(AugState { base: next, belief }), p)
            })
            .collect()
    }

    fn expand(&mut self, id: AugId) -> Result<()> {
        let st = self.states[id].clone();
        let s = st.base;
        let enabled = self.m.enabled(s).to_vec();
        let mut rows = Vec::with_capacity(enabled.len());

        if st.is_revealed() {
            for a in enabled {
                rows.push((a, vec![(id, 1.0)]));
            }
            self.rows[id] = rows;
            return Ok(());
        }
        self.check_assumption(&st)?;

        match self.mode {
            Mode::Visible => {
                for a in enabled {
                    let permitted = st.belief.iter().any(|so| self.user.permissible(so, a));
                    let succ = if permitted {
                        let reach = permissible_post(self.m, self.user, &st.belief, a);
                        self.observed_successors(s, a, &reach)
                    } else {
                        // no legitimate user would play `a` here: revealed
                        let row: Vec<(StateId, f64)> = self.m.successors(s, a).map(|r| r.to_vec()).unwrap_or_default();
                        row.into_iter()
                            .map(|(next, p)| (self.intern(self.revealed(next)), p))
                            .collect()
                    };
                    rows.push((a, succ));
                }
            }
            Mode::Invisible => {
                let mut permitted: Vec<ActionId> = st
                    .belief
                    .iter()
                    .flat_map(|so| self.user.allowed(so).iter().copied())
                    .collect();
                permitted.sort_unstable();
                permitted.dedup();
                let available: Vec<ActionId> = if self.any_action {
                    if permitted.is_empty() {
                        Vec::new()
                    } else {
                        enabled.clone()
                    }
                } else {
                    enabled
                        .iter()
                        .copied()
                        .filter(|a| permitted.binary_search(a).is_ok())
                        .collect()
                };
                if available.is_empty() {
                    let sink = self.intern(self.revealed(s));
                    for a in enabled {
                        rows.push((a, vec![(sink, 1.0)]));
                    }
                } else {
                    let reach = permissible_post_any(self.m, self.user, &st.belief);
                    for a in available {
                        let succ = self.observed_successors(s, a, &reach);
                        rows.push((a, succ));
                    }
                }
            }
        }
        self.rows[id] = rows;
        Ok(())
    }
}

/// Builds the augmented MDP for the defender's action visibility given by
/// `obs`, rooted at every state in `roots`.
pub fn build(
    m: &Mdp,
    obs: &ObservationModel,
    user: &AswResult,
    attacker: &ReachAvoidObjective,
    cfg: &AugConfig,
    roots: &[StateId],
) -> Result<AugmentedMdp> {
    if roots.is_empty() {
        return Err(Error::Contract("no initial state given".into()));
    }
    if roots.len() > 1 && matches!(cfg.initial_belief, InitialBelief::Explicit(_)) {
        return Err(Error::Contract("an explicit initial belief needs a single root".into()));
    }
    let mode = Mode::of(obs);
    let mut b = Builder {
        m,
        obs,
        user,
        attacker,
        mode,
        any_action: cfg.invisible_any_action && mode == Mode::Invisible,
        states: Vec::new(),
        index: HashMap::new(),
        queue: VecDeque::new(),
        rows: Vec::new(),
    };
    let mut root_ids = Vec::with_capacity(roots.len());
    for &s0 in roots {
        let belief = cfg.initial_belief.resolve(obs, s0, m.num_states())?;
        root_ids.push(b.intern(AugState { base: s0, belief }));
    }
    while let Some(id) = b.queue.pop_front() {
        b.expand(id)?;
    }

    let names: Vec<String> = b.states.iter().map(|st| st.name(m)).collect();
    let mut mdp = Mdp::new(names, m.action_names().to_vec(), root_ids[0])?;
    for (id, rows) in b.rows.into_iter().enumerate() {
        for (a, row) in rows {
            mdp.set_transition(id, a, row);
        }
    }
    let n = b.states.len();
    let mut unsafe_states = StateSet::empty(n);
    let mut target = StateSet::empty(n);
    for (id, st) in b.states.iter().enumerate() {
        if st.is_revealed() || b.attacker.unsafe_states.contains(st.base) {
            unsafe_states.insert(id);
        } else if b.attacker.target.contains(st.base) {
            target.insert(id);
        }
    }
    Ok(AugmentedMdp {
        mdp,
        unsafe_states,
        target,
        mode,
        states: b.states,
        index: b.index,
        roots: root_ids,
    })
}

fn rooted_at_initial(
    m: &Mdp,
    obs: &ObservationModel,
    user: &AswResult,
    attacker: &ReachAvoidObjective,
    initial_belief: InitialBelief,
) -> Result<AugmentedMdp> {
    let cfg = AugConfig {
        initial_belief,
        invisible_any_action: false,
    };
    build(m, obs, user, attacker, &cfg, &[m.initial()])
}

/// Augmented MDP against an action-visible defender.
pub fn build_visible(
    m: &Mdp,
    obs: &ObservationModel,
    user: &AswResult,
    attacker: &ReachAvoidObjective,
    initial_belief: InitialBelief,
) -> Result<AugmentedMdp> {
    if !obs.action_visible() {
        return Err(Error::Contract(
            "build_visible needs an action-visible observation model".into(),
        ));
    }
    rooted_at_initial(m, obs, user, attacker, initial_belief)
}

/// Augmented MDP against an action-invisible defender.
pub fn build_invisible(
    m: &Mdp,
    obs: &ObservationModel,
    user: &AswResult,
    attacker: &ReachAvoidObjective,
    initial_belief: InitialBelief,
) -> Result<AugmentedMdp> {
    if obs.action_visible() {
        return Err(Error::Contract(
            "build_invisible needs an action-invisible observation model".into(),
        ));
    }
    rooted_at_initial(m, obs, user, attacker, initial_belief)
}

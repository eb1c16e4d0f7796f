//! Almost-sure winning regions for reach-avoid objectives.
//!
//! The region is the greatest fixpoint of an outer iteration over candidate
//! sets `Y` (initially all safe states). Each outer pass grows level sets
//! `X_0 = F ⊆ X_1 ⊆ ...` by adding states with an action that stays inside
//! `Y` and hits the previous level with positive probability; the last level
//! becomes the next `Y`. Level sets of the final pass define `Prog`.

use std::collections::BTreeMap;

use crate::mdp::{ActionId, Mdp, ReachAvoidObjective, StateId};
use crate::set::StateSet;

#[derive(Debug, Clone)]
pub struct AswResult {
    /// `ASW(φ)`.
    pub region: StateSet,
    /// `X_0 ⊆ X_1 ⊆ ... ⊆ X_n` of the final inner pass.
    pub levels: Vec<StateSet>,
    allowed: Vec<Vec<ActionId>>,
    prog: Vec<Vec<ActionId>>,
    level_of: Vec<Option<usize>>,
}

impl AswResult {
    /// `Allowed(s)`: actions whose successors all stay in the region. Empty
    /// outside the region.
    pub fn allowed(&self, s: StateId) -> &[ActionId] {
        &self.allowed[s]
    }

    /// Actions of `Allowed(s)` that reach the next lower level with positive
    /// probability. Empty on target states and outside the region.
    pub fn prog(&self, s: StateId) -> &[ActionId] {
        &self.prog[s]
    }

    /// Index `i` of the level with `s ∈ X_i \ X_{i-1}`.
    pub fn level_of(&self, s: StateId) -> Option<usize> {
        self.level_of[s]
    }

    pub fn contains(&self, s: StateId) -> bool {
        self.region.contains(s)
    }

    /// Whether some almost-sure winning strategy plays `a` at `s` with
    /// positive probability. Since uniform play over `Allowed` is winning,
    /// this coincides with `a ∈ Allowed(s)`.
    pub fn permissible(&self, s: StateId, a: ActionId) -> bool {
        self.allowed[s].binary_search(&a).is_ok()
    }

    /// Uniform distribution over `Allowed(s)` for each region state with a
    /// non-empty allowed set. Target states whose every action leaves the
    /// region are omitted: the objective is already met there.
    pub fn markov_strategy(&self) -> BTreeMap<StateId, Vec<(ActionId, f64)>> {
        self.region
            .iter()
            .filter(|&s| !self.allowed[s].is_empty())
            .map(|s| {
                let p = 1.0 / self.allowed[s].len() as f64;
                (s, self.allowed[s].iter().map(|&a| (a, p)).collect())
            })
            .collect()
    }

    /// Uniform distribution over `Allowed(s)`. Panics when `s` is outside
    /// the region.
    pub fn markov_choice(&self, s: StateId) -> Vec<(ActionId, f64)> {
        assert!(self.region.contains(s), "state {s} is not almost-sure winning");
        let p = 1.0 / self.allowed[s].len() as f64;
        self.allowed[s].iter().map(|&a| (a, p)).collect()
    }

    /// `Allowed` restricted to `s` as a table, for the belief constructions.
    pub fn allowed_table(&self) -> &[Vec<ActionId>] {
        &self.allowed
    }
}

/// Actions `a` at `s` with `Post(s,a) ⊆ within`.
fn closed_actions(m: &Mdp, s: StateId, within: &StateSet) -> Vec<ActionId> {
    m.enabled(s)
        .iter()
        .copied()
        .filter(|&a| {
            m.successors(s, a)
                .map(|row| row.iter().all(|&(t, _)| within.contains(t)))
                .unwrap_or(false)
        })
        .collect()
}

/// Predecessor lists `t -> [(s, a)]` over positive-probability edges.
fn predecessors(m: &Mdp) -> Vec<Vec<(StateId, ActionId)>> {
    let mut pred = vec![Vec::new(); m.num_states()];
    for (s, a, row) in m.rows() {
        for &(t, _) in row {
            pred[t].push((s, a));
        }
    }
    pred
}

/// One inner pass: level sets grown from `target` inside `y`.
fn level_sets(m: &Mdp, pred: &[Vec<(StateId, ActionId)>], target: &StateSet, y: &StateSet) -> Vec<StateSet> {
    let n = m.num_states();
    let mut levels = vec![target.intersection(y)];
    let mut frontier: Vec<StateId> = levels[0].to_vec();
    loop {
        let current = levels.last().expect("at least X_0");
        // A new member must reach the newest frontier: anything reaching an
        // older level would already have been added.
        let mut added = StateSet::empty(n);
        for &t in &frontier {
            for &(s, a) in &pred[t] {
                if !y.contains(s) || current.contains(s) || added.contains(s) {
                    continue;
                }
                let closed = m
                    .successors(s, a)
                    .map(|row| row.iter().all(|&(u, _)| y.contains(u)))
                    .unwrap_or(false);
                if closed {
                    added.insert(s);
                }
            }
        }
        if added.is_empty() {
            return levels;
        }
        frontier = added.to_vec();
        let mut next = current.clone();
        next.union_with(&added);
        levels.push(next);
    }
}

/// Largest set of safe states that can be kept closed forever.
fn safe_closed_set(m: &Mdp, unsafe_states: &StateSet) -> StateSet {
    let n = m.num_states();
    let mut y = StateSet::full(n).difference(unsafe_states);
    loop {
        let next = StateSet::from_ids(n, y.iter().filter(|&s| !closed_actions(m, s, &y).is_empty()));
        if next == y {
            return y;
        }
        y = next;
    }
}

/// Computes the almost-sure winning region of `¬U U F`, its level sets and
/// the `Allowed`/`Prog` action maps.
///
/// An empty target set is read as a pure safety objective: the region is the
/// largest safe set that can be kept closed, with levels `[∅, region]` and
/// empty `Prog`.
pub fn asw(m: &Mdp, obj: &ReachAvoidObjective) -> AswResult {
    solve(m, obj, obj.target.is_empty())
}

/// Like [`asw`] but without the safety reading: an empty target set yields
/// an empty region.
pub fn asw_reach(m: &Mdp, obj: &ReachAvoidObjective) -> AswResult {
    solve(m, obj, false)
}

fn solve(m: &Mdp, obj: &ReachAvoidObjective, safety: bool) -> AswResult {
    let n = m.num_states();
    let (region, levels) = if safety {
        let region = safe_closed_set(m, &obj.unsafe_states);
        let mut levels = vec![StateSet::empty(n)];
        if !region.is_empty() {
            levels.push(region.clone());
        }
        (region, levels)
    } else {
        let pred = predecessors(m);
        let mut y = StateSet::full(n).difference(&obj.unsafe_states);
        loop {
            let levels = level_sets(m, &pred, &obj.target, &y);
            let x = levels.last().expect("at least X_0").clone();
            if x == y {
                break (y, levels);
            }
            y = x;
        }
    };

    let mut level_of = vec![None; n];
    for (i, level) in levels.iter().enumerate() {
        for s in level.iter() {
            level_of[s].get_or_insert(i);
        }
    }
    let mut allowed = vec![Vec::new(); n];
    let mut prog = vec![Vec::new(); n];
    for s in region.iter() {
        allowed[s] = closed_actions(m, s, &region);
        if let Some(i) = level_of[s].filter(|&i| i > 0 && !obj.target.is_empty()) {
            let lower = &levels[i - 1];
            prog[s] = allowed[s]
                .iter()
                .copied()
                .filter(|&a| {
                    m.successors(s, a)
                        .map(|row| row.iter().any(|&(t, _)| lower.contains(t)))
                        .unwrap_or(false)
                })
                .collect();
        }
    }
    AswResult {
        region,
        levels,
        allowed,
        prog,
        level_of,
    }
}

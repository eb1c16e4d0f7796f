#![allow(dead_code)]

use deceptra::{Mdp, ObservationModel, ReachAvoidObjective, StateSet};
use rand::seq::index::sample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub struct RandomModel {
    pub mdp: Mdp,
    pub obs: ObservationModel,
    pub user: ReachAvoidObjective,
    pub attacker: ReachAvoidObjective,
}

fn random_objective(rng: &mut ChaCha8Rng, n: usize) -> ReachAvoidObjective {
    let mut target = StateSet::empty(n);
    let mut unsafe_states = StateSet::empty(n);
    for s in 0..n {
        match rng.random_range(0..6) {
            0 => target.insert(s),
            1 => unsafe_states.insert(s),
            _ => {}
        }
    }
    if target.is_empty() {
        let s = rng.random_range(0..n);
        unsafe_states.remove(s);
        target.insert(s);
    }
    ReachAvoidObjective::new(unsafe_states, target)
}

/// A random model with 2..=`max_states` states and 1..=`max_actions`
/// actions. States of one observation class share their enabled actions;
/// each transition has one to three successors with uniform probability.
pub fn random_model(seed: u64, max_states: usize, max_actions: usize) -> RandomModel {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = rng.random_range(2..=max_states);
    let k = rng.random_range(1..=max_actions);
    let states = (0..n).map(|s| format!("s{s}")).collect();
    let actions = (0..k).map(|a| format!("a{a}")).collect();
    let mut mdp = Mdp::new(states, actions, 0).unwrap();

    let class_of: Vec<usize> = (0..n).map(|_| rng.random_range(0..n)).collect();
    let mut labels: Vec<usize> = class_of.clone();
    labels.sort_unstable();
    labels.dedup();
    let mut classes = vec![Vec::new(); labels.len()];
    for (s, c) in class_of.iter().enumerate() {
        classes[labels.binary_search(c).unwrap()].push(s);
    }
    for members in &classes {
        let mut enabled: Vec<usize> = (0..k).filter(|_| rng.random_bool(0.6)).collect();
        if enabled.is_empty() {
            enabled.push(rng.random_range(0..k));
        }
        for &s in members {
            for &a in &enabled {
                let width = rng.random_range(1..=3.min(n));
                let succ = sample(&mut rng, n, width);
                let p = 1.0 / width as f64;
                mdp.enable(s, a);
                mdp.set_transition(s, a, succ.iter().map(|t| (t, p)).collect());
            }
        }
    }
    let obs = ObservationModel::new(n, classes, rng.random_bool(0.5));
    let user = random_objective(&mut rng, n);
    let attacker = random_objective(&mut rng, n);
    RandomModel {
        mdp,
        obs,
        user,
        attacker,
    }
}

/// Almost-sure winning region by enumeration of every pure memoryless
/// strategy. Pure memoryless strategies attain the maximal reach-avoid
/// probability, so a state wins iff one of them wins from it; in the
/// induced chain that holds iff every state reachable before the target can
/// still reach the target without touching an unsafe state.
pub fn brute_force_asw(m: &Mdp, obj: &ReachAvoidObjective) -> StateSet {
    let n = m.num_states();
    let mut region = StateSet::empty(n);
    let mut choice = vec![0usize; n];
    loop {
        let next = |s: usize| -> &[(usize, f64)] { m.successors(s, m.enabled(s)[choice[s]]).unwrap() };
        let stops = |s: usize| obj.target.contains(s) || obj.unsafe_states.contains(s);

        // states that reach the target avoiding unsafe states
        let mut good = obj.target.clone();
        loop {
            let before = good.len();
            for s in 0..n {
                if !stops(s) && next(s).iter().any(|&(t, _)| good.contains(t)) {
                    good.insert(s);
                }
            }
            if good.len() == before {
                break;
            }
        }
        for s0 in 0..n {
            let mut seen = vec![false; n];
            let mut stack = vec![s0];
            seen[s0] = true;
            let mut ok = true;
            while let Some(s) = stack.pop() {
                if !good.contains(s) {
                    ok = false;
                    break;
                }
                if stops(s) {
                    continue;
                }
                for &(t, _) in next(s) {
                    if !seen[t] {
                        seen[t] = true;
                        stack.push(t);
                    }
                }
            }
            if ok {
                region.insert(s0);
            }
        }

        let mut i = 0;
        loop {
            if i == n {
                return region;
            }
            choice[i] += 1;
            if choice[i] < m.enabled(i).len() {
                break;
            }
            choice[i] = 0;
            i += 1;
        }
    }
}

/// Almost-sure reach-avoid region by repeated pruning: drop states that
/// cannot reach the target using actions that stay inside the candidate set,
/// until nothing changes.
pub fn pruning_asw(m: &Mdp, obj: &ReachAvoidObjective) -> StateSet {
    let n = m.num_states();
    let mut keep: StateSet = StateSet::full(n).difference(&obj.unsafe_states);
    loop {
        let inside = |s: usize, a: usize| m.successors(s, a).unwrap().iter().all(|&(t, _)| keep.contains(t));
        let mut reach = obj.target.intersection(&keep);
        loop {
            let before = reach.len();
            for s in keep.iter() {
                if reach.contains(s) {
                    continue;
                }
                let hit = m
                    .enabled(s)
                    .iter()
                    .any(|&a| inside(s, a) && m.successors(s, a).unwrap().iter().any(|&(t, _)| reach.contains(t)));
                if hit {
                    reach.insert(s);
                }
            }
            if reach.len() == before {
                break;
            }
        }
        if reach == keep {
            return keep;
        }
        keep = reach;
    }
}

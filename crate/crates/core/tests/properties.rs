mod common;

use std::collections::{BTreeMap, BTreeSet};

use common::{brute_force_asw, pruning_asw, random_model, RandomModel};
use deceptra::belief::{build, replay_beliefs};
use deceptra::mdp::{hide_actions, observe_history_as, post, validate};
use deceptra::planner::synthesize_from;
use deceptra::sim::simulate_markov;
use deceptra::{asw, AugConfig, History, InitialBelief, Mdp, Mode, Model, ModelFile, StateSet};
use proptest::prelude::*;

fn uniform_over_enabled(m: &Mdp) -> BTreeMap<usize, Vec<(usize, f64)>> {
    m.states()
        .map(|s| {
            let acts = m.enabled(s);
            let p = 1.0 / acts.len() as f64;
            (s, acts.iter().map(|&a| (a, p)).collect())
        })
        .collect()
}

fn random_history(m: &Mdp, seed: u64, len: usize) -> History {
    let start = (seed as usize) % m.num_states();
    let none = StateSet::empty(m.num_states());
    simulate_markov(m, &uniform_over_enabled(m), start, &none, seed, len)
}

fn set_from_mask(n: usize, mask: u32) -> StateSet {
    StateSet::from_ids(n, (0..n).filter(|&s| mask & (1 << s) != 0))
}

fn with_mode(rm: &RandomModel, mode: Mode) -> deceptra::ObservationModel {
    rm.obs.with_action_visibility(mode == Mode::Visible)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn post_is_monotone(seed in any::<u64>(), small in any::<u32>(), extra in any::<u32>()) {
        let rm = random_model(seed, 8, 3);
        let m = &rm.mdp;
        let x = set_from_mask(m.num_states(), small);
        let y = x.union(&set_from_mask(m.num_states(), extra));
        for a in 0..m.num_actions() {
            prop_assert!(post(m, &x, a).is_subset(&post(m, &y, a)));
        }
    }

    #[test]
    fn random_models_round_trip_and_partition(seed in any::<u64>()) {
        let rm = random_model(seed, 8, 3);
        let model = Model {
            mdp: rm.mdp.clone(),
            obs: rm.obs.clone(),
            user: Some(rm.user.clone()),
            attacker: Some(rm.attacker.clone()),
            initial_belief: InitialBelief::ObservationClass,
            initial_groups: Vec::new(),
        };
        let text = model.to_file().to_json().unwrap();
        let back = ModelFile::from_json(&text).unwrap().into_model().unwrap();
        prop_assert!(back.validate().is_empty());
        let mut seen = BTreeSet::new();
        for class in back.obs.classes() {
            for &s in class {
                prop_assert!(seen.insert(s));
            }
        }
        prop_assert_eq!(seen.len(), back.mdp.num_states());
    }

    #[test]
    fn invisible_observation_is_a_function_of_the_visible_one(seed in any::<u64>(), len in 0usize..10) {
        let rm = random_model(seed, 8, 3);
        let h = random_history(&rm.mdp, seed, len);
        let vis = observe_history_as(&rm.obs, &rm.mdp, &h, true).unwrap();
        let inv = observe_history_as(&rm.obs, &rm.mdp, &h, false).unwrap();
        prop_assert_eq!(hide_actions(&vis), inv);
    }

    #[test]
    fn asw_matches_brute_force(seed in any::<u64>()) {
        let rm = random_model(seed, 8, 3);
        for obj in [&rm.user, &rm.attacker] {
            let r = asw(&rm.mdp, obj);
            prop_assert_eq!(&r.region, &brute_force_asw(&rm.mdp, obj));
            prop_assert_eq!(&r.region, &pruning_asw(&rm.mdp, obj));
        }
    }

    #[test]
    fn level_sets_make_progress(seed in any::<u64>()) {
        let rm = random_model(seed, 8, 3);
        let m = &rm.mdp;
        let r = asw(m, &rm.user);
        prop_assert!(r.region.is_disjoint(&rm.user.unsafe_states));
        for s in r.region.difference(&rm.user.target).iter() {
            let i = r.level_of(s).unwrap();
            prop_assert!(i > 0);
            prop_assert!(!r.prog(s).is_empty());
            for &a in r.prog(s) {
                let succ = post(m, &StateSet::singleton(m.num_states(), s), a);
                prop_assert!(succ.is_subset(&r.region));
                prop_assert!(succ.intersects(&r.levels[i - 1]));
            }
            for &a in r.allowed(s) {
                prop_assert!(post(m, &StateSet::singleton(m.num_states(), s), a).is_subset(&r.region));
            }
        }
    }

    #[test]
    fn invisible_belief_contains_visible_belief(seed in any::<u64>(), len in 0usize..10) {
        let rm = random_model(seed, 8, 3);
        let m = &rm.mdp;
        let user = asw(m, &rm.user);
        let h = random_history(m, seed, len);
        let initial = rm.obs.dobs(h.states()[0]).unwrap().clone();
        let vis = replay_beliefs(m, &rm.obs, &user, Mode::Visible, &initial, &h);
        let inv = replay_beliefs(m, &rm.obs, &user, Mode::Invisible, &initial, &h);
        for (v, i) in vis.iter().zip(&inv) {
            prop_assert!(v.is_subset(i));
        }
    }

    #[test]
    fn augmented_model_structure(seed in any::<u64>(), visible in any::<bool>()) {
        let rm = random_model(seed, 6, 3);
        let mode = if visible { Mode::Visible } else { Mode::Invisible };
        let obs = with_mode(&rm, mode);
        let m = &rm.mdp;
        let user = asw(m, &rm.user);
        let roots: Vec<usize> = m.states().collect();
        let am = build(m, &obs, &user, &rm.attacker, &AugConfig::default(), &roots).unwrap();
        let g = &am.mdp;
        prop_assert!(validate(g, &deceptra::ObservationModel::full(am.len(), true), &[]).is_empty());

        // reachable from the roots
        let mut seen = StateSet::empty(am.len());
        let mut stack: Vec<usize> = am.roots().to_vec();
        for &r in &stack {
            seen.insert(r);
        }
        while let Some(x) = stack.pop() {
            for &a in g.enabled(x) {
                for &(y, _) in g.successors(x, a).unwrap() {
                    if !seen.contains(y) {
                        seen.insert(y);
                        stack.push(y);
                    }
                }
            }
        }
        prop_assert_eq!(seen.len(), am.len());

        for x in 0..am.len() {
            let st = am.state(x);
            if st.is_revealed() {
                prop_assert!(am.unsafe_states.contains(x));
                for &a in g.enabled(x) {
                    for &(y, _) in g.successors(x, a).unwrap() {
                        prop_assert!(am.state(y).is_revealed());
                    }
                }
            } else {
                let class = obs.dobs(st.base).unwrap();
                prop_assert!(st.belief.is_subset(class));
            }
        }
    }

    #[test]
    fn deceptive_region_matches_independent_solve(seed in any::<u64>(), visible in any::<bool>()) {
        let rm = random_model(seed, 6, 3);
        let mode = if visible { Mode::Visible } else { Mode::Invisible };
        let obs = with_mode(&rm, mode);
        let m = &rm.mdp;
        let roots: Vec<usize> = m.states().collect();
        let syn = synthesize_from(m, &obs, &rm.user, &rm.attacker, &AugConfig::default(), &roots).unwrap();
        let am = &syn.aug;
        prop_assert_eq!(&syn.attacker.region, &pruning_asw(&am.mdp, &am.objective()));
        prop_assert!(syn.report.asw_size <= syn.report.aug_size);
        for x in syn.strategy.domain() {
            prop_assert!(syn.attacker.region.contains(x));
            for &a in syn.strategy.choice(x).unwrap() {
                for &(y, _) in am.mdp.successors(x, a).unwrap() {
                    prop_assert!(syn.attacker.region.contains(y));
                }
            }
        }
    }

    #[test]
    fn visible_wins_are_invisible_wins(seed in any::<u64>()) {
        let rm = random_model(seed, 6, 3);
        let m = &rm.mdp;
        let roots: Vec<usize> = m.states().collect();
        let cfg = AugConfig::default();
        let vis = synthesize_from(m, &rm.obs.with_action_visibility(true), &rm.user, &rm.attacker, &cfg, &roots).unwrap();
        let inv = synthesize_from(m, &rm.obs.with_action_visibility(false), &rm.user, &rm.attacker, &cfg, &roots).unwrap();
        for i in 0..roots.len() {
            prop_assert!(!vis.root_wins(i) || inv.root_wins(i), "root {} wins only when visible", i);
        }
    }

    #[test]
    fn genuine_users_stay_in_the_belief(seed in any::<u64>(), len in 0usize..12) {
        let rm = random_model(seed, 8, 3);
        let m = &rm.mdp;
        let user = asw(m, &rm.user);
        let Some(start) = user.region.iter().nth(seed as usize % user.region.len().max(1)) else {
            return Ok(());
        };
        let h = simulate_markov(m, &user.markov_strategy(), start, &rm.user.target, seed, len);
        let initial = rm.obs.dobs(start).unwrap().clone();
        for mode in [Mode::Visible, Mode::Invisible] {
            let obs = with_mode(&rm, mode);
            let beliefs = replay_beliefs(m, &obs, &user, mode, &initial, &h);
            for (b, &s) in beliefs.iter().zip(h.states()) {
                prop_assert!(b.contains(s));
            }
        }
    }
    #[test]
    fn identical_intents_deceive_for_free(seed in any::<u64>(), visible in any::<bool>()) {
        let rm = random_model(seed, 6, 3);
        let m = &rm.mdp;
        let n = m.num_states();
        let obs = deceptra::ObservationModel::full(n, visible);
        let roots: Vec<usize> = m.states().collect();
        let syn = synthesize_from(m, &obs, &rm.user, &rm.user, &AugConfig::default(), &roots).unwrap();
        let user = asw(m, &rm.user);
        for s in 0..n {
            prop_assert_eq!(syn.root_wins(s), user.region.contains(s), "state {}", s);
        }
    }
}

use std::collections::BTreeMap;

use deceptra::gridworld::{benchmark_scenario, Coverage, SensorKind, ACTIONS};
use deceptra::sim::simulate_markov;
use deceptra::StateSet;

#[test]
fn product_rows_factor() {
    for cov in [Coverage::A, Coverage::B, Coverage::C] {
        let sc = benchmark_scenario(cov, SensorKind::Precise, 0.7).unwrap();
        let m = &sc.model.mdp;
        let nq = sc.sensor.states();
        for cell in 0..sc.grid.cells() {
            for q in 0..nq {
                let s = sc.state_id(cell, q);
                assert_eq!(m.enabled(s).len(), ACTIONS.len());
                for dir in 0..ACTIONS.len() {
                    let moves: BTreeMap<usize, f64> = sc.grid.move_distribution(cell, dir).into_iter().collect();
                    let row = m.successors(s, dir).unwrap();
                    let sum: f64 = row.iter().map(|&(_, p)| p).sum();
                    assert!((sum - 1.0).abs() < 1e-9);
                    for &(t, p) in row {
                        let expected = moves[&sc.cell_of(t)] * sc.sensor.scheduler[q][sc.sensor_state_of(t)];
                        assert!((p - expected).abs() < 1e-12, "({cell},{q}) {dir}: {p} vs {expected}");
                    }
                    let support = moves.len() * (0..nq).filter(|&r| sc.sensor.scheduler[q][r] > 0.0).count();
                    assert_eq!(row.len(), support);
                }
            }
        }
    }
}

#[test]
fn classes_share_actions() {
    let sc = benchmark_scenario(Coverage::C, SensorKind::Precise, 0.8).unwrap();
    let m = &sc.model.mdp;
    for class in sc.model.obs.classes() {
        for &s in class {
            assert_eq!(m.enabled(s), m.enabled(class[0]));
        }
    }
}

#[test]
fn scheduler_marginal_is_uniform() {
    let sc = benchmark_scenario(Coverage::A, SensorKind::Boolean, 0.8).unwrap();
    let m = &sc.model.mdp;
    // always "right": the agent ends up pinned against the east wall while
    // the scheduler keeps running
    let right = ACTIONS.iter().position(|&a| a == "right").unwrap();
    let strategy = m.states().map(|s| (s, vec![(right, 1.0)])).collect();
    let steps = 100_000;
    let h = simulate_markov(
        m,
        &strategy,
        sc.state_id(20, 0),
        &StateSet::empty(m.num_states()),
        5,
        steps,
    );
    assert_eq!(h.len(), steps);
    let mut counts = vec![0usize; sc.sensor.states()];
    for &s in &h.states()[1..] {
        counts[sc.sensor_state_of(s)] += 1;
    }
    for c in counts {
        let freq = c as f64 / steps as f64;
        assert!((freq - 0.25).abs() <= 0.02, "frequency {freq}");
    }
}

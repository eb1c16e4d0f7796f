//! Graphviz export.

use std::collections::BTreeMap;
use std::fmt::Write;

use crate::belief::AugmentedMdp;
use crate::mdp::{Mdp, StateId};
use crate::set::StateSet;

const FILL: &str = "#f4b6b6";

fn quote(s: &str) -> String {
    format!("\"{}\"", s.replace('\\', "\\\\").replace('"', "\\\""))
}

/// Renders `m` as a DOT digraph. Edges between the same pair of states are
/// merged and labelled with every action inducing them; `highlight`ed states
/// are filled and `initial` states drawn with a double border.
pub fn mdp_to_dot(m: &Mdp, highlight: &StateSet, initial: &[StateId]) -> String {
    let mut out = String::from("digraph mdp {\n  rankdir=LR;\n  node [shape=ellipse];\n");
    for s in m.states() {
        let mut attrs = Vec::new();
        if highlight.contains(s) {
            attrs.push(format!("style=filled, fillcolor={}", quote(FILL)));
        }
        if initial.contains(&s) {
            attrs.push("peripheries=2".to_string());
        }
        if attrs.is_empty() {
            writeln!(out, "  {};", quote(m.state_name(s))).unwrap();
        } else {
            writeln!(out, "  {} [{}];", quote(m.state_name(s)), attrs.join(", ")).unwrap();
        }
    }
    for s in m.states() {
        let mut labels: BTreeMap<StateId, Vec<&str>> = BTreeMap::new();
        for &a in m.enabled(s) {
            for &(t, _) in m.successors(s, a).unwrap_or(&[]) {
                labels.entry(t).or_default().push(m.action_name(a));
            }
        }
        for (t, actions) in labels {
            writeln!(
                out,
                "  {} -> {} [label={}];",
                quote(m.state_name(s)),
                quote(m.state_name(t)),
                quote(&actions.join(","))
            )
            .unwrap();
        }
    }
    out.push_str("}\n");
    out
}

/// DOT rendering of an augmented MDP with `highlight` (typically the
/// attacker's winning region) filled.
pub fn export_dot(am: &AugmentedMdp, highlight: &StateSet) -> String {
    mdp_to_dot(&am.mdp, highlight, am.roots())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mdp::tests::illustrative;

    #[test]
    fn empty_highlight_has_no_fill() {
        let (m, _) = illustrative();
        let dot = mdp_to_dot(&m, &StateSet::empty(6), &[0]);
        assert!(!dot.contains("filled"));
        assert!(dot.contains("\"2\" -> \"3\" [label=\"a\"];"));
        assert!(dot.contains("\"f0\" -> \"f0\" [label=\"a,b\"];"));
        assert!(dot.contains("\"1\" [peripheries=2];"));
    }

    #[test]
    fn highlighted_nodes_are_filled() {
        let (m, _) = illustrative();
        let dot = mdp_to_dot(&m, &StateSet::from_ids(6, [1, 2]), &[]);
        assert_eq!(dot.matches("style=filled").count(), 2);
        assert_eq!(dot, mdp_to_dot(&m, &StateSet::from_ids(6, [1, 2]), &[]));
    }
}

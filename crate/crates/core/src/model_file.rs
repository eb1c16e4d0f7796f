//! The JSON model format.
//!
//! ```json
//! {
//!   "states": ["1", "2"],
//!   "actions": ["a"],
//!   "enabled": {"1": ["a"], "2": ["a"]},
//!   "trans": {"1,a": {"2": 1.0}, "2,a": {"2": 1.0}},
//!   "initial": "1",
//!   "objectives": {"user": {"unsafe": [], "target": ["2"]},
//!                  "attacker": {"unsafe": [], "target": ["2"]}},
//!   "observation": {"classes": [["1"], ["2"]], "action_visible": true},
//!   "initial_belief": "obs-class",
//!   "initial_groups": [{"label": "1", "states": ["1"]}]
//! }
//! ```
//!
//! `initial_belief` (`"singleton"`, `"obs-class"` or an explicit list of
//! states) and `initial_groups` are optional. Unknown keys are rejected.
//! Names may not contain `,`, `|`, `{` or `}`, which are reserved by the
//! transition keys and by belief-state names.

use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::belief::InitialBelief;
use crate::error::{Error, Result};
use crate::mdp::{Mdp, ObservationModel, ReachAvoidObjective, StateId};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelFile {
    pub states: Vec<String>,
    pub actions: Vec<String>,
    pub enabled: BTreeMap<String, Vec<String>>,
    pub trans: BTreeMap<String, BTreeMap<String, f64>>,
    pub initial: String,
    #[serde(default)]
    pub objectives: ObjectivesFile,
    pub observation: ObservationFile,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub initial_belief: Option<InitialBeliefFile>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub initial_groups: Vec<InitialGroupFile>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ObjectivesFile {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub user: Option<ObjectiveFile>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub attacker: Option<ObjectiveFile>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ObjectiveFile {
    #[serde(rename = "unsafe")]
    pub unsafe_states: Vec<String>,
    pub target: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ObservationFile {
    pub classes: Vec<Vec<String>>,
    pub action_visible: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum InitialBeliefFile {
    Named(String),
    Explicit(Vec<String>),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InitialGroupFile {
    pub label: String,
    pub states: Vec<String>,
}

/// A family of initial states evaluated together, e.g. one grid cell under
/// every scheduler state.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct InitialGroup {
    pub label: String,
    pub states: Vec<StateId>,
}

/// A loaded model with everything the pipeline needs.
#[derive(Debug, Clone)]
pub struct Model {
    pub mdp: Mdp,
    pub obs: ObservationModel,
    pub user: Option<ReachAvoidObjective>,
    pub attacker: Option<ReachAvoidObjective>,
    pub initial_belief: InitialBelief,
    pub initial_groups: Vec<InitialGroup>,
}

fn check_name(kind: &str, name: &str) -> Result<()> {
    if name.is_empty() || name.contains([',', '|', '{', '}']) {
        return Err(Error::Format(format!(
            "{kind} name `{name}` is empty or contains one of , | {{ }}"
        )));
    }
    Ok(())
}

impl ModelFile {
    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }

    pub fn to_json(&self) -> Result<String> {
        let mut text = serde_json::to_string_pretty(self)?;
        text.push('\n');
        Ok(text)
    }

    /// Interns names and builds the model. Structural problems (unknown or
    /// duplicate names, malformed keys) are errors; semantic ones are left to
    /// [`crate::mdp::validate`].
    pub fn into_model(self) -> Result<Model> {
        for s in &self.states {
            check_name("state", s)?;
        }
        for a in &self.actions {
            check_name("action", a)?;
        }
        let placeholder = 0;
        let mut mdp = Mdp::new(self.states.clone(), self.actions.clone(), placeholder)?;
        mdp.set_initial(mdp.state_id(&self.initial)?);

        for (s, actions) in &self.enabled {
            let s = mdp.state_id(s)?;
            for a in actions {
                let a = mdp.action_id(a)?;
                mdp.enable(s, a);
            }
        }
        for (key, row) in &self.trans {
            let (s, a) = key
                .rsplit_once(',')
                .ok_or_else(|| Error::Format(format!("transition key `{key}` is not `state,action`")))?;
            let s = mdp.state_id(s)?;
            let a = mdp.action_id(a)?;
            let mut dist = Vec::with_capacity(row.len());
            for (t, &p) in row {
                dist.push((mdp.state_id(t)?, p));
            }
            if mdp.is_enabled(s, a) {
                mdp.set_transition(s, a, dist);
            } else {
                mdp.set_orphan_transition(s, a, dist);
            }
        }

        let mut classes = Vec::with_capacity(self.observation.classes.len());
        for class in &self.observation.classes {
            classes.push(class.iter().map(|s| mdp.state_id(s)).collect::<Result<Vec<_>>>()?);
        }
        let obs = ObservationModel::new(mdp.num_states(), classes, self.observation.action_visible);

        let objective = |o: &Option<ObjectiveFile>| -> Result<Option<ReachAvoidObjective>> {
            o.as_ref()
                .map(|o| ReachAvoidObjective::from_names(&mdp, &o.unsafe_states, &o.target))
                .transpose()
        };
        let user = objective(&self.objectives.user)?;
        let attacker = objective(&self.objectives.attacker)?;

        let initial_belief = match &self.initial_belief {
            None => InitialBelief::ObservationClass,
            Some(InitialBeliefFile::Named(n)) => InitialBelief::parse(n)?,
            Some(InitialBeliefFile::Explicit(states)) => InitialBelief::Explicit(mdp.state_set(states)?),
        };
        let initial_groups = self
            .initial_groups
            .iter()
            .map(|g| {
                Ok(InitialGroup {
                    label: g.label.clone(),
                    states: g.states.iter().map(|s| mdp.state_id(s)).collect::<Result<_>>()?,
                })
            })
            .collect::<Result<Vec<_>>>()?;

        Ok(Model {
            mdp,
            obs,
            user,
            attacker,
            initial_belief,
            initial_groups,
        })
    }
}

impl Model {
    pub fn load(path: &Path) -> Result<Self> {
        ModelFile::load(path)?.into_model()
    }

    pub fn from_json(text: &str) -> Result<Self> {
        ModelFile::from_json(text)?.into_model()
    }

    /// Objectives present in the model, labelled for [`crate::mdp::validate`].
    pub fn objectives(&self) -> Vec<(&str, &ReachAvoidObjective)> {
        let mut out = Vec::new();
        if let Some(u) = &self.user {
            out.push(("user", u));
        }
        if let Some(a) = &self.attacker {
            out.push(("attacker", a));
        }
        out
    }

    pub fn validate(&self) -> Vec<crate::mdp::Violation> {
        crate::mdp::validate(&self.mdp, &self.obs, &self.objectives())
    }

    /// Fails with [`Error::InvalidModel`] unless the model validates cleanly.
    pub fn ensure_valid(&self) -> Result<()> {
        let v = self.validate();
        if v.is_empty() {
            Ok(())
        } else {
            Err(Error::InvalidModel(v))
        }
    }

    pub fn user(&self) -> Result<&ReachAvoidObjective> {
        self.user
            .as_ref()
            .ok_or_else(|| Error::Format("model has no `user` objective".into()))
    }

    pub fn attacker(&self) -> Result<&ReachAvoidObjective> {
        self.attacker
            .as_ref()
            .ok_or_else(|| Error::Format("model has no `attacker` objective".into()))
    }

    pub fn to_file(&self) -> ModelFile {
        let m = &self.mdp;
        let names = |set: &crate::set::StateSet| set.iter().map(|s| m.state_name(s).to_string()).collect();
        let mut enabled = BTreeMap::new();
        let mut trans = BTreeMap::new();
        for s in m.states() {
            enabled.insert(
                m.state_name(s).to_string(),
                m.enabled(s).iter().map(|&a| m.action_name(a).to_string()).collect(),
            );
        }
        for (s, a, row) in m.rows() {
            let row = row.iter().map(|&(t, p)| (m.state_name(t).to_string(), p)).collect();
            trans.insert(format!("{},{}", m.state_name(s), m.action_name(a)), row);
        }
        let objective = |o: &Option<ReachAvoidObjective>| {
            o.as_ref().map(|o| ObjectiveFile {
                unsafe_states: names(&o.unsafe_states),
                target: names(&o.target),
            })
        };
        ModelFile {
            states: m.state_names().to_vec(),
            actions: m.action_names().to_vec(),
            enabled,
            trans,
            initial: m.state_name(m.initial()).to_string(),
            objectives: ObjectivesFile {
                user: objective(&self.user),
                attacker: objective(&self.attacker),
            },
            observation: ObservationFile {
                classes: self
                    .obs
                    .classes()
                    .iter()
                    .map(|c| c.iter().map(|&s| m.state_name(s).to_string()).collect())
                    .collect(),
                action_visible: self.obs.action_visible(),
            },
            initial_belief: match &self.initial_belief {
                InitialBelief::ObservationClass => None,
                InitialBelief::Singleton => Some(InitialBeliefFile::Named("singleton".into())),
                InitialBelief::Explicit(set) => Some(InitialBeliefFile::Explicit(names(set))),
            },
            initial_groups: self
                .initial_groups
                .iter()
                .map(|g| InitialGroupFile {
                    label: g.label.clone(),
                    states: g.states.iter().map(|&s| m.state_name(s).to_string()).collect(),
                })
                .collect(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const TINY: &str = r#"{
        "states": ["s", "t"],
        "actions": ["go"],
        "enabled": {"s": ["go"], "t": ["go"]},
        "trans": {"s,go": {"t": 1.0}, "t,go": {"t": 1.0}},
        "initial": "s",
        "objectives": {"user": {"unsafe": [], "target": ["t"]}},
        "observation": {"classes": [["s"], ["t"]], "action_visible": false}
    }"#;

    #[test]
    fn loads_and_validates() {
        let model = Model::from_json(TINY).unwrap();
        assert!(model.validate().is_empty());
        assert_eq!(model.mdp.num_states(), 2);
        assert!(!model.obs.action_visible());
        assert!(model.attacker.is_none());
    }

    #[test]
    fn unknown_keys_are_rejected() {
        let text = TINY.replace("\"initial\": \"s\",", "\"initial\": \"s\", \"reward\": 3,");
        assert!(Model::from_json(&text).is_err());
        let text = TINY.replace("\"target\": [\"t\"]}", "\"target\": [\"t\"], \"prio\": 1}");
        assert!(Model::from_json(&text).is_err());
    }

    #[test]
    fn transition_for_disabled_action_is_a_violation() {
        let text = TINY.replace("\"t\": [\"go\"]}", "\"t\": []}");
        let model = Model::from_json(&text).unwrap();
        let v = model.validate();
        assert!(v
            .iter()
            .any(|x| matches!(x, crate::mdp::Violation::TransitionForDisabledAction { .. })));
        assert!(v
            .iter()
            .any(|x| matches!(x, crate::mdp::Violation::NoEnabledActions { .. })));
    }

    #[test]
    fn reserved_characters_rejected() {
        let text = TINY.replace("\"s\"", "\"s|x\"");
        assert!(matches!(Model::from_json(&text), Err(Error::Format(_))));
    }

    #[test]
    fn file_round_trip_is_stable() {
        let model = Model::from_json(TINY).unwrap();
        let file = model.to_file();
        let again = file.clone().into_model().unwrap().to_file();
        assert_eq!(file, again);
    }
}

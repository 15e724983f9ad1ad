//! JSON model format.
//!
//! ```json
//! {
//!   "agents": [ { "name": "P1", "states": ["in1", "T1"], "initial": "in1" } ],
//!   "actions": [ {
//!       "name": "a1", "loc": ["P1"],
//!       "enabled": [["in1"]],
//!       "distribution": [ { "from": ["in1"], "to": [[["T1"], "1/2"], [["in1"], "0.5"]] } ]
//!   } ],
//!   "valuations": { "T1": ["tails1"] },
//!   "metadata": { }
//! }
//! ```
//!
//! Tuples list local states in the order of the action's `loc`. `enabled`
//! may be omitted, in which case it is the list of distribution sources.
//! Probabilities are strings (`"p/q"` or decimal) or JSON numbers.
//! Serialization is canonical: `loc` sorted by agent declaration order,
//! probabilities as reduced rationals, `enabled` omitted when redundant.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::{DmcModel, ModelBuilder, ModelError};
use crate::prob::Prob;

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ModelFile {
    agents: Vec<AgentEntry>,
    actions: Vec<ActionEntry>,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    valuations: BTreeMap<String, Vec<String>>,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    metadata: BTreeMap<String, serde_json::Value>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct AgentEntry {
    name: String,
    states: Vec<String>,
    initial: String,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ActionEntry {
    name: String,
    loc: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    enabled: Option<Vec<Vec<String>>>,
    distribution: Vec<RowEntry>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RowEntry {
    from: Vec<String>,
    to: Vec<(Vec<String>, ProbLiteral)>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(untagged)]
enum ProbLiteral {
    Text(String),
    Number(serde_json::Number),
}

impl ProbLiteral {
    fn parse(&self) -> Result<Prob, ModelError> {
        let text = match self {
            ProbLiteral::Text(s) => s.clone(),
            ProbLiteral::Number(n) => n.to_string(),
        };
        text.parse::<Prob>().map_err(|e| ModelError::Malformed(e.to_string()))
    }
}

pub fn from_json_str(text: &str) -> Result<DmcModel, ModelError> {
    let file: ModelFile = serde_json::from_str(text).map_err(|e| ModelError::Malformed(e.to_string()))?;
    from_file(file)
}

pub fn from_json_value(value: serde_json::Value) -> Result<DmcModel, ModelError> {
    let file: ModelFile = serde_json::from_value(value).map_err(|e| ModelError::Malformed(e.to_string()))?;
    from_file(file)
}

fn from_file(file: ModelFile) -> Result<DmcModel, ModelError> {
    let mut b = ModelBuilder::new();
    for agent in &file.agents {
        b.agent(&agent.name, &agent.states, &agent.initial);
    }
    for action in &file.actions {
        let id = b.action(&action.name, &action.loc);
        for row in &action.distribution {
            let to = row
                .to
                .iter()
                .map(|(t, p)| Ok((t.as_slice(), p.parse()?)))
                .collect::<Result<Vec<_>, ModelError>>()?;
            b.row(id, &row.from, &to);
        }
        if let Some(enabled) = &action.enabled {
            let tuples: Vec<&[String]> = enabled.iter().map(Vec::as_slice).collect();
            b.enabled(id, &tuples);
        }
    }
    for (state, aps) in &file.valuations {
        let aps: Vec<&str> = aps.iter().map(String::as_str).collect();
        b.label(state, &aps);
    }
    for (k, v) in file.metadata {
        b.metadata(&k, v);
    }
    b.build()
}

fn to_file(model: &DmcModel) -> ModelFile {
    let agents = model
        .agents()
        .iter()
        .map(|a| AgentEntry {
            name: a.name.clone(),
            states: a.states.clone(),
            initial: a.states[a.initial as usize].clone(),
        })
        .collect();
    let actions = model
        .actions()
        .iter()
        .map(|action| {
            let names = |t: &[u32]| -> Vec<String> {
                action
                    .loc
                    .iter()
                    .zip(t)
                    .map(|(a, v)| model.state_name(*a, *v).to_string())
                    .collect()
            };
            let redundant = action.enabled.len() == action.rows.len()
                && action.enabled.iter().zip(&action.rows).all(|(e, r)| *e == r.from);
            ActionEntry {
                name: action.name.clone(),
                loc: action.loc.iter().map(|a| model.agent(*a).name.clone()).collect(),
                enabled: (!redundant).then(|| action.enabled.iter().map(|e| names(e)).collect()),
                distribution: action
                    .rows
                    .iter()
                    .map(|r| RowEntry {
                        from: names(&r.from),
                        to: r
                            .outcomes
                            .iter()
                            .map(|o| (names(&o.target), ProbLiteral::Text(o.prob.canonical())))
                            .collect(),
                    })
                    .collect(),
            }
        })
        .collect();
    ModelFile {
        agents,
        actions,
        valuations: model.valuations().clone(),
        metadata: model.metadata().clone(),
    }
}

pub fn to_json_value(model: &DmcModel) -> serde_json::Value {
    serde_json::to_value(to_file(model)).expect("model serializes")
}

/// Canonical compact serialization.
pub fn to_json_string(model: &DmcModel) -> String {
    serde_json::to_string(&to_file(model)).expect("model serializes")
}

pub fn to_json_string_pretty(model: &DmcModel) -> String {
    serde_json::to_string_pretty(&to_file(model)).expect("model serializes")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::benchmarks::coin_game;

    const SMALL: &str = r#"{
        "agents": [
            {"name": "A", "states": ["a0", "a1"], "initial": "a0"},
            {"name": "B", "states": ["b0", "b1"], "initial": "b0"}
        ],
        "actions": [
            {"name": "sync", "loc": ["B", "A"],
             "distribution": [{"from": ["b0", "a0"], "to": [[["b1", "a1"], 0.25], [["b0", "a0"], "3/4"]]}]},
            {"name": "ra", "loc": ["A"], "distribution": [{"from": ["a1"], "to": [[["a1"], "1"]]}]},
            {"name": "rb", "loc": ["B"], "distribution": [{"from": ["b1"], "to": [[["b1"], 1]]}]}
        ],
        "valuations": {"a1": ["done_a"]}
    }"#;

    #[test]
    fn parses_and_reorders_loc() {
        let m = from_json_str(SMALL).unwrap();
        let sync = m.action(m.action_by_name("sync").unwrap());
        assert_eq!(sync.loc.len(), 2);
        assert_eq!(&*sync.rows[0].outcomes[0].target, &[1, 1]);
        assert_eq!(sync.rows[0].outcomes[0].prob, Prob::new(1, 4));
        assert!(crate::model::validate(&m).is_valid());
        let (agent, table) = m.atomic_prop("done_a").unwrap();
        assert_eq!(agent.0, 0);
        assert_eq!(table, &[false, true]);
    }

    #[test]
    fn canonical_form_round_trips() {
        for m in [from_json_str(SMALL).unwrap(), coin_game()] {
            let once = to_json_string(&m);
            let again = to_json_string(&from_json_str(&once).unwrap());
            assert_eq!(once, again);
            assert_eq!(from_json_str(&once).unwrap(), m);
        }
    }

    #[test]
    fn explicit_enabled_survives_round_trip() {
        let text = r#"{"agents":[{"name":"A","states":["x","y"],"initial":"x"}],
            "actions":[{"name":"a","loc":["A"],"enabled":[["x"],["y"]],
            "distribution":[{"from":["x"],"to":[[["y"],"1"]]}]}]}"#;
        let m = from_json_str(text).unwrap();
        assert_eq!(m.actions()[0].enabled.len(), 2);
        let out = to_json_string(&m);
        assert!(out.contains("\"enabled\""));
        assert_eq!(from_json_str(&out).unwrap(), m);
    }

    #[test]
    fn malformed_inputs() {
        assert!(matches!(from_json_str("{"), Err(ModelError::Malformed(_))));
        let bad_prob = SMALL.replace("\"3/4\"", "\"three quarters\"");
        assert!(matches!(from_json_str(&bad_prob), Err(ModelError::Malformed(_))));
        let bad_state = SMALL.replace("[\"a1\"], \"1\"", "[\"zz\"], \"1\"");
        assert!(matches!(
            from_json_str(&bad_state),
            Err(ModelError::UnknownState { .. })
        ));
        let bad_field = SMALL.replace("\"valuations\"", "\"valuation\"");
        assert!(from_json_str(&bad_field).is_err());
    }
}

//! The distributed Markov chain structure: agents with disjoint local state
//! sets, synchronization actions over agent subsets, and per-action
//! probabilistic transition functions.
//!
//! A [`DmcModel`] is built either through [`ModelBuilder`] or by parsing the
//! JSON model format ([`json`]). Construction only enforces structural
//! well-formedness (names resolve, tuple arities match); the semantic
//! conditions, including determinacy, are checked by [`validate`].

pub mod json;
pub mod validate;

use std::collections::{BTreeMap, HashMap};
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::prob::Prob;

pub use validate::{validate, validate_with, ValidationOptions, ValidationReport, Violation};

/// Position of an agent in declaration order (zero-based).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct AgentId(pub u32);

impl AgentId {
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

/// Position of an action in declaration order. This order is the fixed
/// linear order used by the sampler.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct ActionId(pub u32);

impl ActionId {
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

/// A local state of one agent.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct LocalState {
    pub agent: AgentId,
    pub index: u32,
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ModelError {
    #[error("model declares no agents")]
    NoAgents,
    #[error("duplicate agent name `{0}`")]
    DuplicateAgent(String),
    #[error("agent `{0}` has no local states")]
    NoStates(String),
    #[error("duplicate local state name `{0}` (local state names must be globally unique)")]
    DuplicateState(String),
    #[error("duplicate action name `{0}`")]
    DuplicateAction(String),
    #[error("unknown agent `{0}`")]
    UnknownAgent(String),
    #[error("unknown local state `{state}` in {context}")]
    UnknownState { state: String, context: String },
    #[error("local state `{state}` belongs to agent `{owner}`, expected agent `{expected}` in {context}")]
    WrongAgent {
        state: String,
        owner: String,
        expected: String,
        context: String,
    },
    #[error("action `{0}` has an empty location set")]
    EmptyLoc(String),
    #[error("action `{action}` lists agent `{agent}` twice in its location set")]
    RepeatedLoc { action: String, agent: String },
    #[error("tuple of length {got} in action `{action}`, expected {expected}")]
    Arity {
        action: String,
        expected: usize,
        got: usize,
    },
    #[error("domain error: {0}")]
    Domain(String),
    #[error("malformed model: {0}")]
    Malformed(String),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Agent {
    pub name: String,
    pub states: Vec<String>,
    pub initial: u32,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Outcome {
    /// Target a-state, one local state index per agent of `loc`.
    pub target: Box<[u32]>,
    pub prob: Prob,
}

/// One row `pi^a(v)` of an action's transition function.
#[derive(Debug, Clone, PartialEq)]
pub struct Row {
    pub from: Box<[u32]>,
    pub outcomes: Vec<Outcome>,
}

#[derive(Debug, Clone)]
pub struct Action {
    pub name: String,
    /// Participating agents, sorted ascending. Tuples are aligned with it.
    pub loc: Vec<AgentId>,
    /// The declared enabling set `en_a`.
    pub enabled: Vec<Box<[u32]>>,
    pub rows: Vec<Row>,
    row_index: HashMap<Box<[u32]>, u32>,
    enabled_index: HashMap<Box<[u32]>, u32>,
}

impl Action {
    pub fn involves(&self, agent: AgentId) -> bool {
        self.loc.binary_search(&agent).is_ok()
    }

    /// Position of `agent` within `loc`, if it participates.
    pub fn slot(&self, agent: AgentId) -> Option<usize> {
        self.loc.binary_search(&agent).ok()
    }

    /// Index of the transition row for the a-state `from`.
    pub fn row_of(&self, from: &[u32]) -> Option<u32> {
        self.row_index.get(from).copied()
    }

    pub fn is_declared_enabled(&self, from: &[u32]) -> bool {
        self.enabled_index.contains_key(from)
    }

    pub fn row(&self, row: u32) -> &Row {
        &self.rows[row as usize]
    }
}

impl PartialEq for Action {
    fn eq(&self, other: &Self) -> bool {
        self.name == other.name && self.loc == other.loc && self.enabled == other.enabled && self.rows == other.rows
    }
}

/// A global state: one local state index per agent.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct GlobalState(pub Box<[u32]>);

impl GlobalState {
    pub fn new(values: Vec<u32>) -> GlobalState {
        GlobalState(values.into_boxed_slice())
    }

    pub fn get(&self, agent: AgentId) -> u32 {
        self.0[agent.index()]
    }

    pub fn values(&self) -> &[u32] {
        &self.0
    }

    /// The a-state `s_a` for an agent set.
    pub fn restrict(&self, agents: &[AgentId]) -> Box<[u32]> {
        agents.iter().map(|a| self.0[a.index()]).collect()
    }

    pub fn as_ustate(&self) -> UState {
        UState {
            domain: (0..self.0.len() as u32).map(AgentId).collect(),
            values: self.0.to_vec(),
        }
    }
}

/// A u-state for a nonempty agent set `u`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct UState {
    /// Sorted, duplicate-free.
    pub domain: Vec<AgentId>,
    pub values: Vec<u32>,
}

impl UState {
    pub fn new(mut pairs: Vec<(AgentId, u32)>) -> Result<UState, ModelError> {
        if pairs.is_empty() {
            return Err(ModelError::Domain("u-state over an empty agent set".into()));
        }
        pairs.sort_by_key(|p| p.0);
        if pairs.windows(2).any(|w| w[0].0 == w[1].0) {
            return Err(ModelError::Domain("u-state assigns an agent twice".into()));
        }
        Ok(UState {
            domain: pairs.iter().map(|p| p.0).collect(),
            values: pairs.iter().map(|p| p.1).collect(),
        })
    }

    pub fn get(&self, agent: AgentId) -> Option<u32> {
        self.domain.binary_search(&agent).ok().map(|i| self.values[i])
    }

    /// Restriction of the assignment to `w`.
    pub fn project(&self, w: &[AgentId]) -> Result<UState, ModelError> {
        if w.is_empty() {
            return Err(ModelError::Domain("projection onto an empty agent set".into()));
        }
        let mut pairs = Vec::with_capacity(w.len());
        for &agent in w {
            match self.get(agent) {
                Some(v) => pairs.push((agent, v)),
                None => {
                    return Err(ModelError::Domain(format!(
                        "agent {} is outside the state's domain",
                        agent.0
                    )))
                }
            }
        }
        UState::new(pairs)
    }
}

#[derive(Debug, Clone)]
pub struct DmcModel {
    agents: Vec<Agent>,
    actions: Vec<Action>,
    /// User-declared atomic propositions per local state name.
    valuations: BTreeMap<String, Vec<String>>,
    metadata: BTreeMap<String, serde_json::Value>,
    state_lookup: HashMap<String, LocalState>,
    agent_lookup: HashMap<String, AgentId>,
    action_lookup: HashMap<String, ActionId>,
    /// `act(s)` for every agent and local state.
    act_index: Vec<Vec<Vec<ActionId>>>,
    /// Atomic proposition -> (owning agent, local states where it holds).
    aps: HashMap<String, (AgentId, Vec<bool>)>,
    /// Atomic propositions claimed by more than one agent.
    ap_conflicts: Vec<(String, AgentId, AgentId)>,
}

impl PartialEq for DmcModel {
    fn eq(&self, other: &Self) -> bool {
        self.agents == other.agents
            && self.actions == other.actions
            && self.valuations == other.valuations
            && self.metadata == other.metadata
    }
}

impl DmcModel {
    pub fn agent_count(&self) -> usize {
        self.agents.len()
    }

    pub fn agents(&self) -> &[Agent] {
        &self.agents
    }

    pub fn agent(&self, id: AgentId) -> &Agent {
        &self.agents[id.index()]
    }

    pub fn agent_ids(&self) -> impl Iterator<Item = AgentId> {
        (0..self.agents.len() as u32).map(AgentId)
    }

    pub fn agent_by_name(&self, name: &str) -> Option<AgentId> {
        self.agent_lookup.get(name).copied()
    }

    pub fn actions(&self) -> &[Action] {
        &self.actions
    }

    pub fn action(&self, id: ActionId) -> &Action {
        &self.actions[id.index()]
    }

    pub fn action_ids(&self) -> impl Iterator<Item = ActionId> {
        (0..self.actions.len() as u32).map(ActionId)
    }

    pub fn action_by_name(&self, name: &str) -> Option<ActionId> {
        self.action_lookup.get(name).copied()
    }

    pub fn valuations(&self) -> &BTreeMap<String, Vec<String>> {
        &self.valuations
    }

    pub fn metadata(&self) -> &BTreeMap<String, serde_json::Value> {
        &self.metadata
    }

    pub fn set_metadata(&mut self, key: impl Into<String>, value: serde_json::Value) {
        self.metadata.insert(key.into(), value);
    }

    pub fn local_state(&self, name: &str) -> Option<LocalState> {
        self.state_lookup.get(name).copied()
    }

    pub fn state_name(&self, agent: AgentId, index: u32) -> &str {
        &self.agents[agent.index()].states[index as usize]
    }

    pub fn initial_state(&self) -> GlobalState {
        GlobalState::new(self.agents.iter().map(|a| a.initial).collect())
    }

    /// Looks up a global state by its local state names, in agent order.
    pub fn global_state(&self, names: &[&str]) -> Result<GlobalState, ModelError> {
        if names.len() != self.agents.len() {
            return Err(ModelError::Domain(format!(
                "global state needs {} components, got {}",
                self.agents.len(),
                names.len()
            )));
        }
        let mut values = Vec::with_capacity(names.len());
        for (i, name) in names.iter().enumerate() {
            let ls = self.resolve_state(name, AgentId(i as u32), "global state")?;
            values.push(ls.index);
        }
        Ok(GlobalState::new(values))
    }

    fn resolve_state(&self, name: &str, agent: AgentId, context: &str) -> Result<LocalState, ModelError> {
        let ls = self.local_state(name).ok_or_else(|| ModelError::UnknownState {
            state: name.to_string(),
            context: context.to_string(),
        })?;
        if ls.agent != agent {
            return Err(ModelError::WrongAgent {
                state: name.to_string(),
                owner: self.agent(ls.agent).name.clone(),
                expected: self.agent(agent).name.clone(),
                context: context.to_string(),
            });
        }
        Ok(ls)
    }

    /// The actions compatible with local state `s` of `agent`:
    /// `{ a | agent in loc(a), s = v_agent for some v in en_a }`.
    pub fn act(&self, agent: AgentId, s: LocalState) -> Result<&[ActionId], ModelError> {
        if s.agent != agent {
            return Err(ModelError::Domain(format!(
                "local state {} of agent `{}` is not owned by agent `{}`",
                s.index,
                self.agents.get(s.agent.index()).map_or("?", |a| &a.name),
                self.agents.get(agent.index()).map_or("?", |a| &a.name),
            )));
        }
        self.act_index
            .get(agent.index())
            .and_then(|per_state| per_state.get(s.index as usize))
            .map(Vec::as_slice)
            .ok_or_else(|| ModelError::Domain(format!("no local state {} for agent {}", s.index, agent.0)))
    }

    /// `act(s)` for a local state given by index, without ownership checks.
    pub(crate) fn act_of(&self, agent: AgentId, index: u32) -> &[ActionId] {
        &self.act_index[agent.index()][index as usize]
    }

    /// Owner and truth table of an atomic proposition. Every local state
    /// name is a proposition of its agent, holding exactly at that state.
    pub fn atomic_prop(&self, ap: &str) -> Option<(AgentId, &[bool])> {
        self.aps.get(ap).map(|(a, t)| (*a, t.as_slice()))
    }

    pub fn atomic_props(&self) -> impl Iterator<Item = (&str, AgentId)> {
        self.aps.iter().map(|(k, (a, _))| (k.as_str(), *a))
    }

    pub(crate) fn ap_conflicts(&self) -> &[(String, AgentId, AgentId)] {
        &self.ap_conflicts
    }

    pub fn render_tuple(&self, loc: &[AgentId], values: &[u32]) -> String {
        let parts: Vec<&str> = loc.iter().zip(values).map(|(a, v)| self.state_name(*a, *v)).collect();
        format!("({})", parts.join(","))
    }

    /// Canonical tuple rendering `(s_1,...,s_n)`.
    pub fn render_global(&self, s: &GlobalState) -> String {
        let parts: Vec<&str> = s
            .values()
            .iter()
            .enumerate()
            .map(|(i, v)| self.state_name(AgentId(i as u32), *v))
            .collect();
        format!("({})", parts.join(","))
    }

    pub fn render_ustate(&self, u: &UState) -> String {
        self.render_tuple(&u.domain, &u.values)
    }

    fn assemble(
        agents: Vec<Agent>,
        actions: Vec<Action>,
        valuations: BTreeMap<String, Vec<String>>,
        metadata: BTreeMap<String, serde_json::Value>,
    ) -> Result<DmcModel, ModelError> {
        if agents.is_empty() {
            return Err(ModelError::NoAgents);
        }
        let mut agent_lookup = HashMap::new();
        let mut state_lookup = HashMap::new();
        for (i, agent) in agents.iter().enumerate() {
            let id = AgentId(i as u32);
            if agent_lookup.insert(agent.name.clone(), id).is_some() {
                return Err(ModelError::DuplicateAgent(agent.name.clone()));
            }
            if agent.states.is_empty() {
                return Err(ModelError::NoStates(agent.name.clone()));
            }
            for (j, s) in agent.states.iter().enumerate() {
                let ls = LocalState {
                    agent: id,
                    index: j as u32,
                };
                if state_lookup.insert(s.clone(), ls).is_some() {
                    return Err(ModelError::DuplicateState(s.clone()));
                }
            }
            if agent.initial as usize >= agent.states.len() {
                return Err(ModelError::Malformed(format!(
                    "initial state index {} out of range for agent `{}`",
                    agent.initial, agent.name
                )));
            }
        }

        let mut action_lookup = HashMap::new();
        let mut act_index: Vec<Vec<Vec<ActionId>>> = agents.iter().map(|a| vec![Vec::new(); a.states.len()]).collect();
        for (k, action) in actions.iter().enumerate() {
            let id = ActionId(k as u32);
            if action_lookup.insert(action.name.clone(), id).is_some() {
                return Err(ModelError::DuplicateAction(action.name.clone()));
            }
            if action.loc.is_empty() {
                return Err(ModelError::EmptyLoc(action.name.clone()));
            }
            for agent in &action.loc {
                if agent.index() >= agents.len() {
                    return Err(ModelError::UnknownAgent(format!("#{}", agent.0)));
                }
            }
            let check = |tuple: &[u32]| -> Result<(), ModelError> {
                if tuple.len() != action.loc.len() {
                    return Err(ModelError::Arity {
                        action: action.name.clone(),
                        expected: action.loc.len(),
                        got: tuple.len(),
                    });
                }
                for (agent, v) in action.loc.iter().zip(tuple) {
                    if *v as usize >= agents[agent.index()].states.len() {
                        return Err(ModelError::Malformed(format!(
                            "state index {v} out of range for agent `{}` in action `{}`",
                            agents[agent.index()].name,
                            action.name
                        )));
                    }
                }
                Ok(())
            };
            for v in &action.enabled {
                check(v)?;
                for (slot, agent) in action.loc.iter().enumerate() {
                    let acts = &mut act_index[agent.index()][v[slot] as usize];
                    if acts.last() != Some(&id) {
                        acts.push(id);
                    }
                }
            }
            for row in &action.rows {
                check(&row.from)?;
                for o in &row.outcomes {
                    check(&o.target)?;
                }
            }
        }

        let mut aps: HashMap<String, (AgentId, Vec<bool>)> = HashMap::new();
        let mut ap_conflicts = Vec::new();
        for (i, agent) in agents.iter().enumerate() {
            for (j, s) in agent.states.iter().enumerate() {
                let mut table = vec![false; agent.states.len()];
                table[j] = true;
                aps.insert(s.clone(), (AgentId(i as u32), table));
            }
        }
        for (state, props) in &valuations {
            let ls = *state_lookup.get(state).ok_or_else(|| ModelError::UnknownState {
                state: state.clone(),
                context: "valuations".into(),
            })?;
            let n_states = agents[ls.agent.index()].states.len();
            for ap in props {
                match aps.get_mut(ap) {
                    Some((owner, table)) if *owner == ls.agent => table[ls.index as usize] = true,
                    Some((owner, _)) => {
                        let conflict = (ap.clone(), *owner, ls.agent);
                        if !ap_conflicts.contains(&conflict) {
                            ap_conflicts.push(conflict);
                        }
                    }
                    None => {
                        let mut table = vec![false; n_states];
                        table[ls.index as usize] = true;
                        aps.insert(ap.clone(), (ls.agent, table));
                    }
                }
            }
        }

        Ok(DmcModel {
            agents,
            actions,
            valuations,
            metadata,
            state_lookup,
            agent_lookup,
            action_lookup,
            act_index,
            aps,
            ap_conflicts,
        })
    }
}

impl fmt::Display for DmcModel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "DMC with {} agents and {} actions",
            self.agents.len(),
            self.actions.len()
        )
    }
}

/// Incremental, name-based construction of a [`DmcModel`].
///
/// Rows added with [`ModelBuilder::row`] extend the action's enabling set
/// unless an explicit enabling set was given with [`ModelBuilder::enabled`].
#[derive(Debug, Default)]
pub struct ModelBuilder {
    agents: Vec<Agent>,
    agent_lookup: HashMap<String, AgentId>,
    state_lookup: HashMap<String, LocalState>,
    actions: Vec<PendingAction>,
    valuations: BTreeMap<String, Vec<String>>,
    metadata: BTreeMap<String, serde_json::Value>,
    error: Option<ModelError>,
}

#[derive(Debug)]
struct PendingAction {
    name: String,
    loc: Vec<AgentId>,
    /// Permutation from declared loc order to sorted order.
    order: Vec<usize>,
    explicit_enabled: Option<Vec<Box<[u32]>>>,
    rows: Vec<Row>,
}

impl ModelBuilder {
    pub fn new() -> ModelBuilder {
        ModelBuilder::default()
    }

    fn fail(&mut self, e: ModelError) {
        if self.error.is_none() {
            self.error = Some(e);
        }
    }

    /// Declares an agent; the initial state is given by name.
    pub fn agent<S: AsRef<str>>(&mut self, name: &str, states: &[S], initial: &str) -> AgentId {
        let id = AgentId(self.agents.len() as u32);
        if self.agent_lookup.insert(name.to_string(), id).is_some() {
            self.fail(ModelError::DuplicateAgent(name.to_string()));
        }
        let states: Vec<String> = states.iter().map(|s| s.as_ref().to_string()).collect();
        for (j, s) in states.iter().enumerate() {
            let ls = LocalState {
                agent: id,
                index: j as u32,
            };
            if self.state_lookup.insert(s.clone(), ls).is_some() {
                self.fail(ModelError::DuplicateState(s.clone()));
            }
        }
        let initial = match states.iter().position(|s| s == initial) {
            Some(i) => i as u32,
            None => {
                self.fail(ModelError::UnknownState {
                    state: initial.to_string(),
                    context: format!("initial state of agent `{name}`"),
                });
                0
            }
        };
        self.agents.push(Agent {
            name: name.to_string(),
            states,
            initial,
        });
        id
    }

    pub fn state(&self, name: &str) -> Option<LocalState> {
        self.state_lookup.get(name).copied()
    }

    /// Declares an action over the named agents. Tuples passed to later
    /// calls for this action follow the order of `loc` given here.
    pub fn action<S: AsRef<str>>(&mut self, name: &str, loc: &[S]) -> ActionId {
        let id = ActionId(self.actions.len() as u32);
        let mut ids = Vec::with_capacity(loc.len());
        for l in loc {
            match self.agent_lookup.get(l.as_ref()) {
                Some(a) => ids.push(*a),
                None => self.fail(ModelError::UnknownAgent(l.as_ref().to_string())),
            }
        }
        let mut order: Vec<usize> = (0..ids.len()).collect();
        order.sort_by_key(|&i| ids[i]);
        let mut sorted: Vec<AgentId> = order.iter().map(|&i| ids[i]).collect();
        let before = sorted.len();
        sorted.dedup();
        if sorted.len() != before {
            self.fail(ModelError::RepeatedLoc {
                action: name.to_string(),
                agent: format!("{loc:?}", loc = loc.iter().map(|s| s.as_ref()).collect::<Vec<_>>()),
            });
        }
        self.actions.push(PendingAction {
            name: name.to_string(),
            loc: sorted,
            order,
            explicit_enabled: None,
            rows: Vec::new(),
        });
        id
    }

    fn tuple<S: AsRef<str>>(&mut self, action: ActionId, names: &[S]) -> Box<[u32]> {
        let pending = &self.actions[action.index()];
        let context = format!("action `{}`", pending.name);
        if names.len() != pending.order.len() {
            let e = ModelError::Arity {
                action: pending.name.clone(),
                expected: pending.order.len(),
                got: names.len(),
            };
            self.fail(e);
            return vec![0; self.actions[action.index()].loc.len()].into_boxed_slice();
        }
        let order = pending.order.clone();
        let loc = pending.loc.clone();
        let mut out = Vec::with_capacity(order.len());
        for (slot, &src) in order.iter().enumerate() {
            let name = names[src].as_ref();
            match self.state_lookup.get(name) {
                Some(ls) if ls.agent == loc[slot] => out.push(ls.index),
                Some(ls) => {
                    let e = ModelError::WrongAgent {
                        state: name.to_string(),
                        owner: self.agents[ls.agent.index()].name.clone(),
                        expected: self.agents[loc[slot].index()].name.clone(),
                        context: context.clone(),
                    };
                    self.fail(e);
                    out.push(0);
                }
                None => {
                    self.fail(ModelError::UnknownState {
                        state: name.to_string(),
                        context: context.clone(),
                    });
                    out.push(0);
                }
            }
        }
        out.into_boxed_slice()
    }

    /// Sets `en_a` explicitly.
    pub fn enabled<S: AsRef<str>>(&mut self, action: ActionId, states: &[&[S]]) -> &mut Self {
        let tuples: Vec<Box<[u32]>> = states.iter().map(|t| self.tuple(action, t)).collect();
        self.actions[action.index()].explicit_enabled = Some(tuples);
        self
    }

    /// Adds the row `pi^a(from)`.
    pub fn row<S: AsRef<str>>(&mut self, action: ActionId, from: &[S], to: &[(&[S], Prob)]) -> &mut Self {
        let from = self.tuple(action, from);
        let outcomes = to
            .iter()
            .map(|(t, p)| Outcome {
                target: self.tuple(action, t),
                prob: *p,
            })
            .collect();
        self.actions[action.index()].rows.push(Row { from, outcomes });
        self
    }

    /// Adds a row given by local state indices in sorted-loc order.
    pub fn row_indexed(&mut self, action: ActionId, from: Vec<u32>, to: Vec<(Vec<u32>, Prob)>) -> &mut Self {
        let outcomes = to
            .into_iter()
            .map(|(t, p)| Outcome {
                target: t.into_boxed_slice(),
                prob: p,
            })
            .collect();
        self.actions[action.index()].rows.push(Row {
            from: from.into_boxed_slice(),
            outcomes,
        });
        self
    }

    /// Declares atomic propositions holding at a local state.
    pub fn label(&mut self, state: &str, aps: &[&str]) -> &mut Self {
        let entry = self.valuations.entry(state.to_string()).or_default();
        for ap in aps {
            if !entry.iter().any(|x| x == ap) {
                entry.push(ap.to_string());
            }
        }
        self
    }

    pub fn metadata(&mut self, key: &str, value: serde_json::Value) -> &mut Self {
        self.metadata.insert(key.to_string(), value);
        self
    }

    pub fn build(self) -> Result<DmcModel, ModelError> {
        if let Some(e) = self.error {
            return Err(e);
        }
        let actions = self
            .actions
            .into_iter()
            .map(|p| {
                let enabled = match p.explicit_enabled {
                    Some(e) => e,
                    None => p.rows.iter().map(|r| r.from.clone()).collect(),
                };
                Action::new(p.name, p.loc, enabled, p.rows)
            })
            .collect();
        DmcModel::assemble(self.agents, actions, self.valuations, self.metadata)
    }
}

impl Action {
    /// `loc` must be sorted; tuples are aligned with it.
    pub fn new(name: String, loc: Vec<AgentId>, enabled: Vec<Box<[u32]>>, rows: Vec<Row>) -> Action {
        let mut row_index = HashMap::with_capacity(rows.len());
        for (i, r) in rows.iter().enumerate() {
            row_index.entry(r.from.clone()).or_insert(i as u32);
        }
        let mut enabled_index = HashMap::with_capacity(enabled.len());
        for (i, v) in enabled.iter().enumerate() {
            enabled_index.entry(v.clone()).or_insert(i as u32);
        }
        Action {
            name,
            loc,
            enabled,
            rows,
            row_index,
            enabled_index,
        }
    }
}

//! Events, the interleaved transition system, maximal steps and the global
//! Markov chain they induce.

use std::collections::{HashMap, VecDeque};

use serde::Serialize;
use thiserror::Error;

use crate::model::{ActionId, AgentId, DmcModel, GlobalState};
use crate::prob::{Prob, Weight};

pub const DEFAULT_MAX_STATES: usize = 1_000_000;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SemanticsError {
    #[error("event {event} is not enabled at {state}")]
    NotEnabled { event: String, state: String },
    #[error("not a maximal step at {state}: {reason}")]
    NotMaximalStep { state: String, reason: String },
    #[error("state budget of {limit} exceeded after exploring {explored} states")]
    StateBudgetExceeded { limit: usize, explored: usize },
    #[error("state {state} has {steps} maximal steps, more than the budget of {limit}")]
    StepBudgetExceeded { state: String, steps: String, limit: usize },
}

/// An event `(v, a, v')`: the row of `a` at source `v` and one of its
/// outcomes. Only outcomes with positive probability are events.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Event {
    pub action: ActionId,
    pub row: u32,
    pub outcome: u32,
}

impl Event {
    pub fn loc(self, model: &DmcModel) -> &[AgentId] {
        &model.action(self.action).loc
    }

    pub fn involves(self, model: &DmcModel, agent: AgentId) -> bool {
        model.action(self.action).involves(agent)
    }

    pub fn source(self, model: &DmcModel) -> &[u32] {
        &model.action(self.action).row(self.row).from
    }

    pub fn target(self, model: &DmcModel) -> &[u32] {
        &model.action(self.action).row(self.row).outcomes[self.outcome as usize].target
    }

    pub fn prob(self, model: &DmcModel) -> Prob {
        model.action(self.action).row(self.row).outcomes[self.outcome as usize].prob
    }

    /// `action[source>target]`, e.g. `a1[in1>H1]`.
    pub fn render(self, model: &DmcModel) -> String {
        let action = model.action(self.action);
        let names = |t: &[u32]| -> String {
            action
                .loc
                .iter()
                .zip(t)
                .map(|(a, v)| model.state_name(*a, *v))
                .collect::<Vec<_>>()
                .join(",")
        };
        format!(
            "{}[{}>{}]",
            action.name,
            names(self.source(model)),
            names(self.target(model))
        )
    }

    /// Ordering used inside Foata steps: participating agents, then action
    /// name, then target names. Events of one step have disjoint agent sets,
    /// so the first key already decides.
    pub fn canonical_cmp(self, other: Event, model: &DmcModel) -> std::cmp::Ordering {
        let key = |e: Event| {
            let action = model.action(e.action);
            let targets: Vec<&str> = action
                .loc
                .iter()
                .zip(e.target(model))
                .map(|(a, v)| model.state_name(*a, *v))
                .collect();
            (&action.loc, action.name.as_str(), targets, e)
        };
        key(self).cmp(&key(other))
    }
}

/// Every event of the model.
pub fn events_of(model: &DmcModel) -> Vec<Event> {
    let mut out = Vec::new();
    for id in model.action_ids() {
        let action = model.action(id);
        for (r, row) in action.rows.iter().enumerate() {
            if !action.is_declared_enabled(&row.from) || action.row_of(&row.from) != Some(r as u32) {
                continue;
            }
            for (o, outcome) in row.outcomes.iter().enumerate() {
                if outcome.prob.value() > 0.0 {
                    out.push(Event {
                        action: id,
                        row: r as u32,
                        outcome: o as u32,
                    });
                }
            }
        }
    }
    out
}

/// Enabled actions at `s` with the row index of `s_a`, in action order.
pub fn enabled_actions(model: &DmcModel, s: &GlobalState) -> Vec<(ActionId, u32)> {
    let mut out = Vec::new();
    for_each_enabled_action(model, s, |a, r| out.push((a, r)));
    out.sort_unstable();
    out
}

/// Calls `f` once per enabled action (in no particular order).
pub(crate) fn for_each_enabled_action(model: &DmcModel, s: &GlobalState, mut f: impl FnMut(ActionId, u32)) {
    let mut key: Vec<u32> = Vec::with_capacity(4);
    for (i, &v) in s.values().iter().enumerate() {
        let agent = AgentId(i as u32);
        for &a in model.act_of(agent, v) {
            let action = model.action(a);
            // each action is considered from its first participant only
            if action.loc[0] != agent {
                continue;
            }
            if let Some(row) = enabled_row(model, s, a, &mut key) {
                f(a, row);
            }
        }
    }
}

/// Row of `a` enabled at `s`, if any. `key` is scratch space.
pub(crate) fn enabled_row(model: &DmcModel, s: &GlobalState, a: ActionId, key: &mut Vec<u32>) -> Option<u32> {
    let action = model.action(a);
    key.clear();
    key.extend(action.loc.iter().map(|x| s.get(*x)));
    let row = action.row_of(key)?;
    action.is_declared_enabled(key).then_some(row)
}

pub fn is_deadlock(model: &DmcModel, s: &GlobalState) -> bool {
    let mut any = false;
    for_each_enabled_action(model, s, |_, _| any = true);
    !any
}

fn positive_outcomes(model: &DmcModel, action: ActionId, row: u32) -> impl Iterator<Item = Event> + '_ {
    model
        .action(action)
        .row(row)
        .outcomes
        .iter()
        .enumerate()
        .filter_map(move |(o, out)| {
            (out.prob.value() > 0.0).then_some(Event {
                action,
                row,
                outcome: o as u32,
            })
        })
}

pub fn enabled_events(model: &DmcModel, s: &GlobalState) -> Vec<Event> {
    enabled_actions(model, s)
        .into_iter()
        .flat_map(|(a, r)| positive_outcomes(model, a, r))
        .collect()
}

pub fn is_enabled(model: &DmcModel, s: &GlobalState, e: Event) -> bool {
    let action = model.action(e.action);
    let Some(row) = action.rows.get(e.row as usize) else {
        return false;
    };
    let Some(outcome) = row.outcomes.get(e.outcome as usize) else {
        return false;
    };
    outcome.prob.value() > 0.0
        && action.row_of(&row.from) == Some(e.row)
        && action.is_declared_enabled(&row.from)
        && action.loc.iter().zip(row.from.iter()).all(|(a, v)| s.get(*a) == *v)
}

/// Fires `e` at `s`: the agents of `loc(e)` move to the event's target,
/// everyone else keeps its local state.
pub fn fire(model: &DmcModel, s: &GlobalState, e: Event) -> Result<(GlobalState, Prob), SemanticsError> {
    if !is_enabled(model, s, e) {
        return Err(SemanticsError::NotEnabled {
            event: e.render(model),
            state: model.render_global(s),
        });
    }
    let mut next = s.clone();
    apply(model, &mut next, e);
    Ok((next, e.prob(model)))
}

/// Overwrites the `loc(e)` components of `s` with the target of `e`.
/// Does not check enabledness.
pub(crate) fn apply(model: &DmcModel, s: &mut GlobalState, e: Event) {
    let action = model.action(e.action);
    let target = &action.row(e.row).outcomes[e.outcome as usize].target;
    for (agent, v) in action.loc.iter().zip(target.iter()) {
        s.0[agent.index()] = *v;
    }
}

/// A set of pairwise independent events enabled at a common state, stored
/// in action order.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Step {
    pub events: Vec<Event>,
}

impl Step {
    pub fn loc(&self, model: &DmcModel) -> Vec<AgentId> {
        let mut out: Vec<AgentId> = self.events.iter().flat_map(|e| e.loc(model).iter().copied()).collect();
        out.sort_unstable();
        out
    }

    pub fn prob<W: Weight>(&self, model: &DmcModel) -> W {
        self.events
            .iter()
            .fold(W::one(), |acc, e| acc.mul(&W::from_prob(&e.prob(model))))
    }

    pub fn contains(&self, e: Event) -> bool {
        self.events.binary_search(&e).is_ok()
    }

    pub fn render(&self, model: &DmcModel) -> String {
        let parts: Vec<String> = self.events.iter().map(|e| e.render(model)).collect();
        format!("{{{}}}", parts.join(","))
    }
}

/// Number of maximal steps at `s`, or `None` if it does not fit in `usize`.
pub fn maximal_step_count(model: &DmcModel, s: &GlobalState) -> Option<usize> {
    let mut count: usize = 1;
    let mut any = false;
    for (a, r) in enabled_actions(model, s) {
        any = true;
        count = count.checked_mul(positive_outcomes(model, a, r).count())?;
    }
    Some(if any { count } else { 0 })
}

/// All maximal steps at `s`. By determinacy the enabled events group by
/// action, so a maximal step picks exactly one outcome of every enabled
/// action.
pub fn maximal_steps(model: &DmcModel, s: &GlobalState) -> Vec<Step> {
    let per_action: Vec<Vec<Event>> = enabled_actions(model, s)
        .into_iter()
        .map(|(a, r)| positive_outcomes(model, a, r).collect())
        .collect();
    if per_action.is_empty() {
        return Vec::new();
    }
    let mut out = vec![Step { events: Vec::new() }];
    for choices in &per_action {
        let mut next = Vec::with_capacity(out.len() * choices.len());
        for partial in &out {
            for e in choices {
                let mut events = partial.events.clone();
                events.push(*e);
                next.push(Step { events });
            }
        }
        out = next;
    }
    out
}

/// The u-successor of `s`.
pub fn u_successor(model: &DmcModel, s: &GlobalState, step: &Step) -> Result<GlobalState, SemanticsError> {
    let err = |reason: String| SemanticsError::NotMaximalStep {
        state: model.render_global(s),
        reason,
    };
    let enabled = enabled_actions(model, s);
    if step.events.len() != enabled.len() {
        return Err(err(format!(
            "{} events for {} enabled actions",
            step.events.len(),
            enabled.len()
        )));
    }
    let mut sorted = step.events.clone();
    sorted.sort_unstable();
    for (e, (a, r)) in sorted.iter().zip(&enabled) {
        if e.action != *a || e.row != *r || !is_enabled(model, s, *e) {
            return Err(err(format!(
                "event {} is not enabled or repeats an action",
                e.render(model)
            )));
        }
    }
    let mut next = s.clone();
    for e in &sorted {
        apply(model, &mut next, *e);
    }
    Ok(next)
}

/// Explicit global Markov chain over the states reachable from the initial
/// state through maximal steps.
#[derive(Debug, Clone)]
pub struct MarkovChain<W = f64> {
    pub states: Vec<GlobalState>,
    pub index: HashMap<GlobalState, u32>,
    /// Outgoing transitions per state, ordered by target id.
    pub transitions: Vec<Vec<(u32, W)>>,
    pub deadlock: Vec<bool>,
    pub initial: u32,
}

impl<W: Weight> MarkovChain<W> {
    pub fn state_count(&self) -> usize {
        self.states.len()
    }

    pub fn edge_count(&self) -> usize {
        self.transitions.iter().map(Vec::len).sum()
    }

    pub fn id(&self, s: &GlobalState) -> Option<u32> {
        self.index.get(s).copied()
    }

    /// `M(s, s')`, zero when there is no transition.
    pub fn prob(&self, s: &GlobalState, t: &GlobalState) -> W {
        match (self.id(s), self.id(t)) {
            (Some(a), Some(b)) => self.transitions[a as usize]
                .iter()
                .find(|(x, _)| *x == b)
                .map(|(_, w)| w.clone())
                .unwrap_or_else(W::zero),
            _ => W::zero(),
        }
    }

    pub fn row_sum(&self, id: u32) -> W {
        self.transitions[id as usize]
            .iter()
            .fold(W::zero(), |acc, (_, w)| acc.add(w))
    }

    /// Largest `|row sum - 1|` over all states.
    pub fn max_row_deviation(&self) -> f64 {
        (0..self.states.len() as u32)
            .map(|i| (self.row_sum(i).to_f64() - 1.0).abs())
            .fold(0.0, f64::max)
    }

    /// Plain-text export, one `src dst prob` line per transition.
    pub fn export_text(&self, model: &DmcModel) -> String {
        let mut out = String::new();
        for (i, row) in self.transitions.iter().enumerate() {
            let src = model.render_global(&self.states[i]);
            for (j, w) in row {
                out.push_str(&format!(
                    "{} {} {}\n",
                    src,
                    model.render_global(&self.states[*j as usize]),
                    w.render()
                ));
            }
        }
        out
    }

    pub fn export_json(&self, model: &DmcModel) -> serde_json::Value {
        #[derive(Serialize)]
        struct Edge {
            src: String,
            dst: String,
            prob: String,
        }
        let edges: Vec<Edge> = self
            .transitions
            .iter()
            .enumerate()
            .flat_map(|(i, row)| {
                row.iter().map(move |(j, w)| Edge {
                    src: model.render_global(&self.states[i]),
                    dst: model.render_global(&self.states[*j as usize]),
                    prob: w.render(),
                })
            })
            .collect();
        serde_json::json!({
            "initial": model.render_global(&self.states[self.initial as usize]),
            "states": self.states.iter().map(|s| model.render_global(s)).collect::<Vec<_>>(),
            "deadlocks": self.states.iter().zip(&self.deadlock).filter(|(_, d)| **d)
                .map(|(s, _)| model.render_global(s)).collect::<Vec<_>>(),
            "transitions": edges,
        })
    }
}

/// Builds the Markov chain: `M(s, s') = prod_{e in u} p_e` for the maximal
/// step `u` leading to `s'`, and `M(s, s) = 1` at deadlocks.
pub fn build_markov_chain<W: Weight>(model: &DmcModel, max_states: usize) -> Result<MarkovChain<W>, SemanticsError> {
    let initial = model.initial_state();
    let mut chain = MarkovChain {
        states: vec![initial.clone()],
        index: HashMap::from([(initial, 0)]),
        transitions: Vec::new(),
        deadlock: Vec::new(),
        initial: 0,
    };
    let mut next_id = 0usize;
    while next_id < chain.states.len() {
        let s = chain.states[next_id].clone();
        match maximal_step_count(model, &s) {
            Some(n) if n <= max_states => {}
            n => {
                return Err(SemanticsError::StepBudgetExceeded {
                    state: model.render_global(&s),
                    steps: n.map_or_else(|| "too many".to_string(), |n| n.to_string()),
                    limit: max_states,
                })
            }
        }
        let steps = maximal_steps(model, &s);
        let mut row: Vec<(u32, W)> = Vec::with_capacity(steps.len().max(1));
        if steps.is_empty() {
            row.push((next_id as u32, W::one()));
            chain.deadlock.push(true);
        } else {
            chain.deadlock.push(false);
            for step in &steps {
                let mut t = s.clone();
                for e in &step.events {
                    apply(model, &mut t, *e);
                }
                let id = match chain.index.get(&t) {
                    Some(id) => *id,
                    None => {
                        if chain.states.len() >= max_states {
                            return Err(SemanticsError::StateBudgetExceeded {
                                limit: max_states,
                                explored: chain.states.len(),
                            });
                        }
                        let id = chain.states.len() as u32;
                        chain.index.insert(t.clone(), id);
                        chain.states.push(t);
                        id
                    }
                };
                let p: W = step.prob(model);
                match row.iter_mut().find(|(x, _)| *x == id) {
                    Some((_, w)) => *w = w.add(&p),
                    None => row.push((id, p)),
                }
            }
        }
        row.sort_by_key(|(x, _)| *x);
        chain.transitions.push(row);
        next_id += 1;
    }
    Ok(chain)
}

/// A reachable deadlock with a shortest witness run of the interleaved
/// transition system.
#[derive(Debug, Clone, PartialEq)]
pub struct Deadlock {
    pub state: GlobalState,
    /// Events fired from the initial state to reach `state`.
    pub witness: Vec<Event>,
}

/// Breadth-first search of the interleaved transition system for reachable
/// states without enabled events.
pub fn find_reachable_deadlocks(model: &DmcModel, max_states: usize) -> Result<Vec<Deadlock>, SemanticsError> {
    let initial = model.initial_state();
    let mut states = vec![initial.clone()];
    let mut parent: Vec<Option<(u32, Event)>> = vec![None];
    let mut index: HashMap<GlobalState, u32> = HashMap::from([(initial, 0)]);
    let mut queue = VecDeque::from([0u32]);
    let mut found = Vec::new();
    while let Some(id) = queue.pop_front() {
        let s = states[id as usize].clone();
        let events = enabled_events(model, &s);
        if events.is_empty() {
            found.push(id);
            continue;
        }
        for e in events {
            let mut t = s.clone();
            apply(model, &mut t, e);
            if index.contains_key(&t) {
                continue;
            }
            if states.len() >= max_states {
                return Err(SemanticsError::StateBudgetExceeded {
                    limit: max_states,
                    explored: states.len(),
                });
            }
            let tid = states.len() as u32;
            index.insert(t.clone(), tid);
            states.push(t);
            parent.push(Some((id, e)));
            queue.push_back(tid);
        }
    }
    Ok(found
        .into_iter()
        .map(|id| {
            let mut witness = Vec::new();
            let mut cur = id;
            while let Some((p, e)) = parent[cur as usize] {
                witness.push(e);
                cur = p;
            }
            witness.reverse();
            Deadlock {
                state: states[id as usize].clone(),
                witness,
            }
        })
        .collect())
}

/// States reachable in the interleaved transition system, in breadth-first
/// order.
pub fn reachable_states(model: &DmcModel, max_states: usize) -> Result<Vec<GlobalState>, SemanticsError> {
    let initial = model.initial_state();
    let mut seen: std::collections::HashSet<GlobalState> = std::collections::HashSet::from([initial.clone()]);
    let mut order = vec![initial];
    let mut next = 0;
    while next < order.len() {
        let s = order[next].clone();
        next += 1;
        for e in enabled_events(model, &s) {
            let mut t = s.clone();
            apply(model, &mut t, e);
            if seen.contains(&t) {
                continue;
            }
            if seen.len() >= max_states {
                return Err(SemanticsError::StateBudgetExceeded {
                    limit: max_states,
                    explored: seen.len(),
                });
            }
            seen.insert(t.clone());
            order.push(t);
        }
    }
    Ok(order)
}

pub fn count_reachable_states(model: &DmcModel, max_states: usize) -> Result<usize, SemanticsError> {
    reachable_states(model, max_states).map(|v| v.len())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::benchmarks::coin_game;
    use crate::model::ModelBuilder;
    use num_rational::BigRational;

    fn ev(m: &DmcModel, action: &str, from: &[&str], to: &[&str]) -> Event {
        let a = m.action_by_name(action).unwrap();
        let act = m.action(a);
        let idx = |names: &[&str]| -> Vec<u32> { names.iter().map(|n| m.local_state(n).unwrap().index).collect() };
        let row = act.row_of(&idx(from)).unwrap();
        let outcome = act
            .row(row)
            .outcomes
            .iter()
            .position(|o| *o.target == *idx(to))
            .unwrap();
        Event {
            action: a,
            row,
            outcome: outcome as u32,
        }
    }

    #[test]
    fn coin_game_events() {
        let m = coin_game();
        let all = events_of(&m);
        let e_h = ev(&m, "a1", &["in1"], &["H1"]);
        let tt = ev(&m, "b", &["T1", "T2"], &["in1", "in2"]);
        assert!(all.contains(&e_h));
        assert_eq!(e_h.prob(&m), Prob::new(1, 2));
        assert!(all.contains(&tt));
        assert_eq!(tt.prob(&m), Prob::ONE);
    }

    #[test]
    fn zero_probability_outcomes_are_not_events() {
        let mut b = ModelBuilder::new();
        b.agent("A", &["x", "y"], "x");
        let a = b.action("a", &["A"]);
        b.row(a, &["x"], &[(&["x"], Prob::ONE), (&["y"], Prob::ZERO)]);
        b.row(a, &["y"], &[(&["y"], Prob::ONE)]);
        let m = b.build().unwrap();
        assert_eq!(events_of(&m).len(), 2);
        assert_eq!(enabled_events(&m, &m.initial_state()).len(), 1);
    }

    #[test]
    fn enabled_events_at_coin_game_states() {
        let m = coin_game();
        let init = m.initial_state();
        let mut got = enabled_events(&m, &init);
        got.sort();
        let mut want = vec![
            ev(&m, "a1", &["in1"], &["H1"]),
            ev(&m, "a1", &["in1"], &["T1"]),
            ev(&m, "a2", &["in2"], &["H2"]),
            ev(&m, "a2", &["in2"], &["T2"]),
        ];
        want.sort();
        assert_eq!(got, want);

        let tt_state = m.global_state(&["T1", "T2"]).unwrap();
        assert_eq!(
            enabled_events(&m, &tt_state),
            vec![ev(&m, "b", &["T1", "T2"], &["in1", "in2"])]
        );
    }

    #[test]
    fn deadlock_state_has_no_events() {
        let mut b = ModelBuilder::new();
        b.agent("A", &["x"], "x");
        b.agent("B", &["y", "z"], "y");
        let a = b.action("sync", &["A", "B"]);
        b.row(a, &["x", "z"], &[(&["x", "z"], Prob::ONE)]);
        let m = b.build().unwrap();
        let s = m.initial_state();
        assert!(enabled_events(&m, &s).is_empty());
        assert!(maximal_steps(&m, &s).is_empty());
        assert!(is_deadlock(&m, &s));
    }

    #[test]
    fn fire_examples() {
        let m = coin_game();
        let init = m.initial_state();
        let e_h = ev(&m, "a1", &["in1"], &["H1"]);
        let (s, p) = fire(&m, &init, e_h).unwrap();
        assert_eq!(s, m.global_state(&["H1", "in2"]).unwrap());
        assert_eq!(p.value(), 0.5);
        // frame condition: agent 2 untouched
        assert_eq!(s.get(AgentId(1)), init.get(AgentId(1)));

        let tt_state = m.global_state(&["T1", "T2"]).unwrap();
        let tt = ev(&m, "b", &["T1", "T2"], &["in1", "in2"]);
        let (s, p) = fire(&m, &tt_state, tt).unwrap();
        assert_eq!(s, init);
        assert_eq!(p, Prob::ONE);

        assert!(matches!(fire(&m, &init, tt), Err(SemanticsError::NotEnabled { .. })));
    }

    #[test]
    fn coin_game_maximal_steps_at_initial_state() {
        let m = coin_game();
        let steps = maximal_steps(&m, &m.initial_state());
        assert_eq!(steps.len(), 4);
        let e_h = ev(&m, "a1", &["in1"], &["H1"]);
        let e_t = ev(&m, "a1", &["in1"], &["T1"]);
        let f_h = ev(&m, "a2", &["in2"], &["H2"]);
        let f_t = ev(&m, "a2", &["in2"], &["T2"]);
        for pair in [[e_h, f_h], [e_h, f_t], [e_t, f_h], [e_t, f_t]] {
            assert!(steps.iter().any(|s| s.events == pair));
        }
        for s in &steps {
            assert_eq!(s.loc(&m), vec![AgentId(0), AgentId(1)]);
        }
    }

    #[test]
    fn u_successor_agrees_with_sequential_firing() {
        let m = coin_game();
        let init = m.initial_state();
        let e_h = ev(&m, "a1", &["in1"], &["H1"]);
        let f_t = ev(&m, "a2", &["in2"], &["T2"]);
        let step = Step { events: vec![e_h, f_t] };
        let succ = u_successor(&m, &init, &step).unwrap();
        assert_eq!(succ, m.global_state(&["H1", "T2"]).unwrap());
        let (a, _) = fire(&m, &init, e_h).unwrap();
        let (a, _) = fire(&m, &a, f_t).unwrap();
        let (b, _) = fire(&m, &init, f_t).unwrap();
        let (b, _) = fire(&m, &b, e_h).unwrap();
        assert_eq!(a, succ);
        assert_eq!(b, succ);

        let partial = Step { events: vec![e_h] };
        assert!(u_successor(&m, &init, &partial).is_err());
    }

    #[test]
    fn coin_game_chain() {
        let m = coin_game();
        let chain = build_markov_chain::<BigRational>(&m, 100).unwrap();
        let init = m.initial_state();
        let ht = m.global_state(&["H1", "T2"]).unwrap();
        assert_eq!(chain.prob(&init, &ht), BigRational::new(1.into(), 4.into()));
        let row = &chain.transitions[chain.initial as usize];
        assert_eq!(row.len(), 4);
        assert!(row.iter().all(|(_, w)| *w == BigRational::new(1.into(), 4.into())));
        for i in 0..chain.state_count() as u32 {
            assert_eq!(chain.row_sum(i), BigRational::from_integer(1.into()));
        }
        // (in,in), four toss outcomes, and the two decided states
        assert_eq!(chain.state_count(), 7);
        assert_eq!(chain.edge_count(), 4 + 1 + 1 + 1 + 1 + 1 + 1);
    }

    #[test]
    fn deadlock_gets_self_loop() {
        let mut b = ModelBuilder::new();
        b.agent("A", &["x", "y"], "x");
        let a = b.action("a", &["A"]);
        b.enabled(a, &[&["x"]]);
        b.row(a, &["x"], &[(&["y"], Prob::ONE)]);
        let m = b.build().unwrap();
        let chain = build_markov_chain::<f64>(&m, 10).unwrap();
        let y = m.global_state(&["y"]).unwrap();
        assert_eq!(chain.prob(&y, &y), 1.0);
        assert!(chain.deadlock[chain.id(&y).unwrap() as usize]);
    }

    #[test]
    fn chain_budget_overflow() {
        let m = coin_game();
        assert_eq!(
            build_markov_chain::<f64>(&m, 5).unwrap_err(),
            SemanticsError::StateBudgetExceeded { limit: 5, explored: 5 }
        );
    }

    #[test]
    fn step_budget_overflow() {
        let m = coin_game();
        assert_eq!(maximal_step_count(&m, &m.initial_state()), Some(4));
        assert!(matches!(
            build_markov_chain::<f64>(&m, 3).unwrap_err(),
            SemanticsError::StepBudgetExceeded { limit: 3, .. }
        ));
    }

    #[test]
    fn coin_game_has_no_deadlocks() {
        let m = coin_game();
        assert!(find_reachable_deadlocks(&m, 1000).unwrap().is_empty());
        assert_eq!(count_reachable_states(&m, 1000).unwrap(), 11);
    }

    #[test]
    fn mutually_waiting_agents_deadlock_initially() {
        let mut b = ModelBuilder::new();
        b.agent("A", &["wa", "xa"], "wa");
        b.agent("B", &["wb", "xb"], "wb");
        let s = b.action("meet", &["A", "B"]);
        b.enabled(s, &[&["wa", "xb"], &["xa", "wb"], &["xa", "xb"]]);
        b.row(s, &["wa", "xb"], &[(&["wa", "xb"], Prob::ONE)]);
        b.row(s, &["xa", "wb"], &[(&["xa", "wb"], Prob::ONE)]);
        b.row(s, &["xa", "xb"], &[(&["xa", "xb"], Prob::ONE)]);
        let m = b.build().unwrap();
        let found = find_reachable_deadlocks(&m, 100).unwrap();
        assert_eq!(found.len(), 1);
        assert_eq!(found[0].state, m.initial_state());
        assert!(found[0].witness.is_empty());
    }

    #[test]
    fn text_export_lists_every_edge() {
        let m = coin_game();
        let chain = build_markov_chain::<f64>(&m, 100).unwrap();
        let text = chain.export_text(&m);
        assert_eq!(text.lines().count(), chain.edge_count());
        assert!(text.contains("(in1,in2) (H1,T2) 0.25"));
        let json = chain.export_json(&m);
        assert_eq!(json["states"].as_array().unwrap().len(), 7);
    }
}

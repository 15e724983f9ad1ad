//! Trajectory sampling.
//!
//! A sample is generated in rounds. Each round fires every action enabled at
//! the round's start, in declaration order, drawing one outcome per action.
//! Sampling stops once every agent has made at least `k_i` moves or is dead.

use std::collections::{HashMap, HashSet, VecDeque};

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::logic::{BoundVector, Projections};
use crate::model::{AgentId, DmcModel, GlobalState};
use crate::semantics::{self, Event};

use super::SmcError;

pub const DEFAULT_STEP_CAP: u64 = 10_000_000;
pub const DEFAULT_DEAD_BUDGET: usize = 100_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum DeadMode {
    /// No agent is ever considered dead.
    #[default]
    Never,
    /// Explicit reachability search from the current state.
    Exact,
}

impl std::str::FromStr for DeadMode {
    type Err = String;

    fn from_str(s: &str) -> Result<DeadMode, String> {
        match s {
            "never" => Ok(DeadMode::Never),
            "exact" => Ok(DeadMode::Exact),
            other => Err(format!("unknown dead-agent mode `{other}` (expected never or exact)")),
        }
    }
}

/// Result of a dead-agent query.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DeadAgents {
    pub dead: Vec<AgentId>,
    /// True when the search budget ran out and the answer fell back to
    /// the empty set.
    pub budget_exhausted: bool,
}

/// Agents with no reachable future event from `s`.
pub fn dead_agents(model: &DmcModel, s: &GlobalState, mode: DeadMode, budget: usize) -> DeadAgents {
    match mode {
        DeadMode::Never => DeadAgents {
            dead: Vec::new(),
            budget_exhausted: false,
        },
        DeadMode::Exact => match live_agents(model, s, budget) {
            Some(live) => DeadAgents {
                dead: model.agent_ids().filter(|a| !live[a.index()]).collect(),
                budget_exhausted: false,
            },
            None => DeadAgents {
                dead: Vec::new(),
                budget_exhausted: true,
            },
        },
    }
}

/// Breadth-first search over the interleaved system; `None` if more than
/// `budget` states would be visited before every agent is seen moving.
fn live_agents(model: &DmcModel, s: &GlobalState, budget: usize) -> Option<Vec<bool>> {
    let n = model.agent_count();
    let mut live = vec![false; n];
    let mut live_count = 0;
    let mut seen: HashSet<GlobalState> = HashSet::from([s.clone()]);
    let mut queue = VecDeque::from([s.clone()]);
    while let Some(state) = queue.pop_front() {
        for e in semantics::enabled_events(model, &state) {
            for a in e.loc(model) {
                if !live[a.index()] {
                    live[a.index()] = true;
                    live_count += 1;
                }
            }
            if live_count == n {
                return Some(live);
            }
            let mut t = state.clone();
            semantics::apply(model, &mut t, e);
            if seen.insert(t.clone()) {
                if seen.len() > budget {
                    return None;
                }
                queue.push_back(t);
            }
        }
    }
    Some(live)
}

/// Sampler settings shared by all samples of a run.
#[derive(Debug, Clone)]
pub struct SamplerConfig {
    pub dead_mode: DeadMode,
    pub dead_budget: usize,
    pub step_cap: u64,
    /// Keep the fired events in the sample.
    pub record_events: bool,
}

impl Default for SamplerConfig {
    fn default() -> SamplerConfig {
        SamplerConfig {
            dead_mode: DeadMode::Never,
            dead_budget: DEFAULT_DEAD_BUDGET,
            step_cap: DEFAULT_STEP_CAP,
            record_events: false,
        }
    }
}

/// A sampled finite trajectory and the sampler state at its end.
#[derive(Debug, Clone)]
pub struct Sample {
    pub start: GlobalState,
    pub end: GlobalState,
    /// Projections of the agents with a positive bound; the others hold
    /// their initial local state only.
    pub projections: Projections,
    pub counts: Vec<u32>,
    pub dead: Vec<bool>,
    pub events: Option<Vec<Event>>,
    pub steps: u64,
    /// Dead-agent searches that ran out of budget.
    pub dead_fallbacks: u32,
}

/// Draws an outcome index with probability proportional to the row.
fn draw<R: Rng + ?Sized>(model: &DmcModel, a: crate::model::ActionId, row: u32, rng: &mut R) -> u32 {
    let outcomes = &model.action(a).row(row).outcomes;
    if outcomes.len() == 1 {
        return 0;
    }
    let u: f64 = rng.gen();
    let mut acc = 0.0;
    let mut last_positive = 0;
    for (i, o) in outcomes.iter().enumerate() {
        let p = o.prob.value();
        if p <= 0.0 {
            continue;
        }
        acc += p;
        last_positive = i as u32;
        if u < acc {
            return i as u32;
        }
    }
    last_positive
}

pub struct Sampler<'m> {
    model: &'m DmcModel,
    bounds: BoundVector,
    cfg: SamplerConfig,
    tracked: Vec<bool>,
    dead_cache: std::sync::Mutex<HashMap<GlobalState, Option<Vec<bool>>>>,
}

impl<'m> Sampler<'m> {
    pub fn new(model: &'m DmcModel, bounds: BoundVector, cfg: SamplerConfig) -> Sampler<'m> {
        let tracked = bounds.0.iter().map(|k| *k > 0).collect();
        Sampler {
            model,
            bounds,
            cfg,
            tracked,
            dead_cache: std::sync::Mutex::new(HashMap::new()),
        }
    }

    pub fn bounds(&self) -> &BoundVector {
        &self.bounds
    }

    fn live_from(&self, s: &GlobalState) -> Option<Vec<bool>> {
        if let Some(hit) = self.dead_cache.lock().expect("cache lock").get(s) {
            return hit.clone();
        }
        let live = live_agents(self.model, s, self.cfg.dead_budget);
        self.dead_cache
            .lock()
            .expect("cache lock")
            .insert(s.clone(), live.clone());
        live
    }

    /// Generates one sample from the initial state.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> Result<Sample, SmcError> {
        let model = self.model;
        let n = model.agent_count();
        let start = model.initial_state();
        let mut state = start.clone();
        let mut projections = Projections::new(&start);
        let mut counts = vec![0u32; n];
        let mut dead = vec![false; n];
        let mut events = self.cfg.record_events.then(Vec::new);
        let mut steps = 0u64;
        let mut dead_fallbacks = 0u32;
        let mut enabled: Vec<(crate::model::ActionId, u32)> = Vec::new();
        let mut candidates: Vec<crate::model::ActionId> = Vec::new();
        let mut touched: Vec<usize> = Vec::new();
        let mut key: Vec<u32> = Vec::new();
        let k = &self.bounds.0;
        loop {
            let done = (0..n).all(|i| counts[i] >= k[i] || dead[i]);
            if done {
                break;
            }
            // every enabled action fires in a round, so only the actions of
            // agents that just moved can be enabled in the next one
            enabled.clear();
            if steps == 0 {
                semantics::for_each_enabled_action(model, &state, |a, r| enabled.push((a, r)));
            } else {
                candidates.clear();
                for &i in &touched {
                    candidates.extend_from_slice(model.act_of(crate::model::AgentId(i as u32), state.0[i]));
                }
                candidates.sort_unstable();
                candidates.dedup();
                for &a in &candidates {
                    if let Some(r) = semantics::enabled_row(model, &state, a, &mut key) {
                        enabled.push((a, r));
                    }
                }
            }
            touched.clear();
            if enabled.is_empty() {
                if self.cfg.dead_mode == DeadMode::Exact {
                    dead.iter_mut().for_each(|d| *d = true);
                    break;
                }
                return Err(SmcError::Deadlock {
                    state: model.render_global(&state),
                });
            }
            enabled.sort_unstable();
            let mut moved = vec![false; if self.cfg.dead_mode == DeadMode::Exact { n } else { 0 }];
            for &(a, r) in &enabled {
                let outcome = draw(model, a, r, rng);
                let e = Event {
                    action: a,
                    row: r,
                    outcome,
                };
                let action = model.action(a);
                let target = &action.row(r).outcomes[outcome as usize].target;
                for (agent, v) in action.loc.iter().zip(target.iter()) {
                    let i = agent.index();
                    state.0[i] = *v;
                    counts[i] += 1;
                    touched.push(i);
                    if self.tracked[i] {
                        projections.seqs[i].push(*v);
                    }
                    if let Some(m) = moved.get_mut(i) {
                        *m = true;
                    }
                }
                if let Some(evs) = events.as_mut() {
                    evs.push(e);
                }
                steps += 1;
                if steps > self.cfg.step_cap {
                    return Err(SmcError::StepCap { cap: self.cfg.step_cap });
                }
            }
            if self.cfg.dead_mode == DeadMode::Exact {
                let pending = (0..n).any(|i| counts[i] < k[i] && !dead[i] && !moved[i]);
                if pending {
                    match self.live_from(&state) {
                        Some(live) => {
                            for i in 0..n {
                                dead[i] = dead[i] || !live[i];
                            }
                        }
                        None => dead_fallbacks += 1,
                    }
                }
            }
        }
        Ok(Sample {
            start,
            end: state,
            projections,
            counts,
            dead,
            events,
            steps,
            dead_fallbacks,
        })
    }
}

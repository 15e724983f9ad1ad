//! Probabilities of trajectory cylinders and their transport to the path
//! space of the global Markov chain.
//!
//! The basic cylinder generated by a finite trajectory `rho` has probability
//! equal to the product of its event probabilities. The map `tp` sends it to
//! the finite union of path cylinders whose induced maximal steps contain
//! the Foata steps of `rho` pointwise. [`oracle_check_trajectory`] compares both
//! sides.

use std::collections::{BTreeMap, HashMap, HashSet};

use thiserror::Error;

use crate::model::{DmcModel, GlobalState};
use crate::prob::Weight;
use crate::semantics::{self, Event, MarkovChain, SemanticsError, Step};
use crate::trace::{self, FoataForm};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum MeasureError {
    #[error(transparent)]
    Semantics(#[from] SemanticsError),
    #[error("invalid path: no maximal step leads from {from} to {to}")]
    InvalidPath { from: String, to: String },
    #[error("state {0} is not in the chain")]
    UnknownState(String),
    #[error("path enumeration exceeded {0} paths")]
    TooManyPaths(usize),
}

/// A finite trajectory `s_0 e_0 s_1 ... e_{k-1} s_k` of the interleaved
/// transition system. Intermediate states are recomputed on demand.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Trajectory {
    pub start: GlobalState,
    pub events: Vec<Event>,
}

impl Trajectory {
    /// Checks that every event is enabled where it is fired.
    pub fn new(model: &DmcModel, start: GlobalState, events: Vec<Event>) -> Result<Trajectory, SemanticsError> {
        trace::replay(model, &start, &events)?;
        Ok(Trajectory { start, events })
    }

    pub fn empty(start: GlobalState) -> Trajectory {
        Trajectory {
            start,
            events: Vec::new(),
        }
    }

    pub fn len(&self) -> usize {
        self.events.len()
    }

    pub fn is_empty(&self) -> bool {
        self.events.is_empty()
    }

    pub fn states(&self, model: &DmcModel) -> Vec<GlobalState> {
        trace::replay(model, &self.start, &self.events).expect("trajectory was validated")
    }

    pub fn end(&self, model: &DmcModel) -> GlobalState {
        let mut s = self.start.clone();
        for e in &self.events {
            semantics::apply(model, &mut s, *e);
        }
        s
    }

    pub fn foata(&self, model: &DmcModel) -> FoataForm {
        trace::foata(model, &self.events)
    }

    pub fn render(&self, model: &DmcModel) -> String {
        let mut out = model.render_global(&self.start);
        let mut s = self.start.clone();
        for e in &self.events {
            semantics::apply(model, &mut s, *e);
            out.push_str(&format!(" {} {}", e.render(model), model.render_global(&s)));
        }
        out
    }
}

/// Every trajectory from `start` with at most `depth` events.
pub fn enumerate_trajectories(model: &DmcModel, start: &GlobalState, depth: usize) -> Vec<Trajectory> {
    let mut out = vec![Trajectory::empty(start.clone())];
    let mut frontier = vec![(start.clone(), Vec::<Event>::new())];
    for _ in 0..depth {
        let mut next = Vec::new();
        for (s, events) in &frontier {
            for e in semantics::enabled_events(model, s) {
                let mut t = s.clone();
                semantics::apply(model, &mut t, e);
                let mut evs = events.clone();
                evs.push(e);
                out.push(Trajectory {
                    start: start.clone(),
                    events: evs.clone(),
                });
                next.push((t, evs));
            }
        }
        frontier = next;
    }
    out
}

/// Probability of the basic cylinder generated by `rho`.
pub fn cylinder_prob<W: Weight>(model: &DmcModel, rho: &Trajectory) -> W {
    rho.events
        .iter()
        .fold(W::one(), |acc, e| acc.mul(&W::from_prob(&e.prob(model))))
}

/// A finite path of the global Markov chain.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct FinitePath {
    pub states: Vec<GlobalState>,
}

impl FinitePath {
    /// Number of transitions.
    pub fn len(&self) -> usize {
        self.states.len().saturating_sub(1)
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn render(&self, model: &DmcModel) -> String {
        self.states
            .iter()
            .map(|s| model.render_global(s))
            .collect::<Vec<_>>()
            .join(" ")
    }
}

/// `p_0 p_1 ... p_{m-1}` along the path.
pub fn path_cylinder_prob<W: Weight>(
    model: &DmcModel,
    chain: &MarkovChain<W>,
    tau: &FinitePath,
) -> Result<W, MeasureError> {
    let ids = tau
        .states
        .iter()
        .map(|s| {
            chain
                .id(s)
                .ok_or_else(|| MeasureError::UnknownState(model.render_global(s)))
        })
        .collect::<Result<Vec<_>, _>>()?;
    let mut p = W::one();
    for w in ids.windows(2) {
        let edge = chain.transitions[w[0] as usize]
            .iter()
            .find(|(t, _)| *t == w[1])
            .ok_or_else(|| MeasureError::InvalidPath {
                from: model.render_global(&chain.states[w[0] as usize]),
                to: model.render_global(&chain.states[w[1] as usize]),
            })?;
        p = p.mul(&edge.1);
    }
    Ok(p)
}

/// The maximal step leading from `s` to `t`, the empty stutter step when
/// `s` is a deadlock and `t = s`.
pub fn step_between(model: &DmcModel, s: &GlobalState, t: &GlobalState) -> Result<Step, MeasureError> {
    let invalid = || MeasureError::InvalidPath {
        from: model.render_global(s),
        to: model.render_global(t),
    };
    let enabled = semantics::enabled_actions(model, s);
    if enabled.is_empty() {
        return if s == t {
            Ok(Step { events: Vec::new() })
        } else {
            Err(invalid())
        };
    }
    let mut moved = vec![false; model.agent_count()];
    let mut events = Vec::with_capacity(enabled.len());
    for (a, r) in enabled {
        let action = model.action(a);
        let want: Vec<u32> = action.loc.iter().map(|x| t.get(*x)).collect();
        let outcome = action
            .row(r)
            .outcomes
            .iter()
            .position(|o| o.prob.value() > 0.0 && *o.target == *want)
            .ok_or_else(invalid)?;
        for x in &action.loc {
            moved[x.index()] = true;
        }
        events.push(Event {
            action: a,
            row: r,
            outcome: outcome as u32,
        });
    }
    let frame_ok = model.agent_ids().all(|i| moved[i.index()] || s.get(i) == t.get(i));
    if !frame_ok {
        return Err(invalid());
    }
    Ok(Step { events })
}

/// The step sequence induced by a path.
pub fn step_sequence(model: &DmcModel, tau: &FinitePath) -> Result<Vec<Step>, MeasureError> {
    tau.states
        .windows(2)
        .map(|w| step_between(model, &w[0], &w[1]))
        .collect()
}

/// Successors of `s` through maximal steps containing every event of
/// `required`, with the step taken.
fn constrained_steps(model: &DmcModel, s: &GlobalState, required: &[Event]) -> Vec<(Step, GlobalState)> {
    if !required.iter().all(|e| semantics::is_enabled(model, s, *e)) {
        return Vec::new();
    }
    let mut out = Vec::new();
    for step in semantics::maximal_steps(model, s) {
        if required.iter().all(|e| step.contains(*e)) {
            let mut t = s.clone();
            for e in &step.events {
                semantics::apply(model, &mut t, *e);
            }
            out.push((step, t));
        }
    }
    out
}

/// `paths(rho)`: all chain paths of length `k` (the number of Foata steps of
/// `rho`) whose induced maximal steps contain the Foata steps pointwise.
/// Fails once more than `limit` paths have been produced.
pub fn tp_image(model: &DmcModel, rho: &Trajectory, limit: usize) -> Result<Vec<FinitePath>, MeasureError> {
    let fnf = rho.foata(model);
    let mut layer = vec![vec![rho.start.clone()]];
    for step in &fnf.steps {
        let mut next = Vec::new();
        for path in &layer {
            let s = path.last().expect("nonempty");
            for (_, t) in constrained_steps(model, s, step) {
                let mut p = path.clone();
                p.push(t);
                next.push(p);
                if next.len() > limit {
                    return Err(MeasureError::TooManyPaths(limit));
                }
            }
        }
        layer = next;
    }
    Ok(layer.into_iter().map(|states| FinitePath { states }).collect())
}

/// `Σ_{π ∈ paths(rho)} P(π)` by dynamic programming over end states, using
/// the chain's transition probabilities.
pub fn tp_image_prob<W: Weight>(
    model: &DmcModel,
    chain: &MarkovChain<W>,
    fnf: &FoataForm,
    start: &GlobalState,
) -> Result<W, MeasureError> {
    let start_id = chain
        .id(start)
        .ok_or_else(|| MeasureError::UnknownState(model.render_global(start)))?;
    let mut layer: BTreeMap<u32, W> = BTreeMap::from([(start_id, W::one())]);
    for step in &fnf.steps {
        let mut next: BTreeMap<u32, W> = BTreeMap::new();
        for (id, w) in &layer {
            let s = &chain.states[*id as usize];
            let targets: HashSet<GlobalState> = constrained_steps(model, s, step).into_iter().map(|(_, t)| t).collect();
            for (t, p) in &chain.transitions[*id as usize] {
                if targets.contains(&chain.states[*t as usize]) {
                    let entry = next.entry(*t).or_insert_with(W::zero);
                    *entry = entry.add(&w.mul(p));
                }
            }
        }
        layer = next;
    }
    Ok(layer.values().fold(W::zero(), |acc, w| acc.add(w)))
}

#[derive(Debug, Clone, PartialEq)]
pub struct MeasureCheck<W> {
    pub lhs: W,
    pub rhs: W,
    pub equal: bool,
}

/// Absolute tolerance used when comparing floating point sides.
pub const FLOAT_TOLERANCE: f64 = 1e-12;

/// Compares `cylinder_prob(rho)` with the path-space probability of
/// `tp(BC(rho))`. Exact weights compare exactly; `f64` within
/// [`FLOAT_TOLERANCE`].
pub fn oracle_check_trajectory<W: Weight>(
    model: &DmcModel,
    chain: &MarkovChain<W>,
    rho: &Trajectory,
) -> Result<MeasureCheck<W>, MeasureError> {
    let lhs: W = cylinder_prob(model, rho);
    let rhs = tp_image_prob(model, chain, &rho.foata(model), &rho.start)?;
    let equal = weights_agree(&lhs, &rhs);
    Ok(MeasureCheck { lhs, rhs, equal })
}

pub(crate) fn weights_agree<W: Weight>(a: &W, b: &W) -> bool {
    if std::any::TypeId::of::<W>() == std::any::TypeId::of::<f64>() {
        (a.to_f64() - b.to_f64()).abs() <= FLOAT_TOLERANCE
    } else {
        a == b
    }
}

/// Summary of an exhaustive oracle run.
#[derive(Debug, Clone, PartialEq)]
pub struct OracleSummary {
    pub trajectories: usize,
    pub distinct_traces: usize,
    pub failures: usize,
    pub max_discrepancy: f64,
}

/// Checks every trajectory from the initial state with at most `depth`
/// events. The right-hand side is computed once per Foata form.
pub fn oracle_check_all<W: Weight>(
    model: &DmcModel,
    chain: &MarkovChain<W>,
    depth: usize,
) -> Result<OracleSummary, MeasureError> {
    let mut cache: HashMap<FoataForm, W> = HashMap::new();
    let mut summary = OracleSummary {
        trajectories: 0,
        distinct_traces: 0,
        failures: 0,
        max_discrepancy: 0.0,
    };
    let start = &chain.states[chain.initial as usize];
    for rho in enumerate_trajectories(model, start, depth) {
        let fnf = rho.foata(model);
        let rhs = match cache.get(&fnf) {
            Some(w) => w.clone(),
            None => {
                let w = tp_image_prob(model, chain, &fnf, start)?;
                cache.insert(fnf, w.clone());
                w
            }
        };
        let lhs: W = cylinder_prob(model, &rho);
        summary.trajectories += 1;
        summary.max_discrepancy = summary.max_discrepancy.max((lhs.to_f64() - rhs.to_f64()).abs());
        if !weights_agree(&lhs, &rhs) {
            summary.failures += 1;
        }
    }
    summary.distinct_traces = cache.len();
    Ok(summary)
}

/// Probability of a finite union of basic cylinders, by inclusion-exclusion
/// over their images in the path space.
///
/// Each image is a finite set of paths; all are extended to a common length
/// so that cylinder intersections become intersections of path sets.
pub fn union_prob<W: Weight>(
    model: &DmcModel,
    chain: &MarkovChain<W>,
    generators: &[Trajectory],
    limit: usize,
) -> Result<W, MeasureError> {
    let images = generators
        .iter()
        .map(|rho| tp_image(model, rho, limit))
        .collect::<Result<Vec<_>, _>>()?;
    let horizon = images
        .iter()
        .flat_map(|img| img.iter().map(FinitePath::len))
        .max()
        .unwrap_or(0);
    let extended: Vec<HashSet<Vec<u32>>> = images
        .iter()
        .map(|img| extend_all(model, chain, img, horizon, limit))
        .collect::<Result<_, _>>()?;
    let prob_of = |set: &HashSet<Vec<u32>>| -> W {
        set.iter().fold(W::zero(), |acc, ids| {
            let p = ids.windows(2).fold(W::one(), |p, w| p.mul(&edge(chain, w[0], w[1])));
            acc.add(&p)
        })
    };
    let n = extended.len();
    let mut plus = W::zero();
    let mut minus = W::zero();
    for mask in 1u64..(1u64 << n) {
        let mut members = (0..n).filter(|j| mask & (1 << j) != 0);
        let first = members.next().expect("mask nonempty");
        let mut inter = extended[first].clone();
        for j in members {
            inter.retain(|p| extended[j].contains(p));
        }
        let p = prob_of(&inter);
        if mask.count_ones() % 2 == 1 {
            plus = plus.add(&p);
        } else {
            minus = minus.add(&p);
        }
    }
    Ok(plus.sub(&minus))
}

fn edge<W: Weight>(chain: &MarkovChain<W>, a: u32, b: u32) -> W {
    chain.transitions[a as usize]
        .iter()
        .find(|(t, _)| *t == b)
        .map(|(_, w)| w.clone())
        .unwrap_or_else(W::zero)
}

fn extend_all<W: Weight>(
    model: &DmcModel,
    chain: &MarkovChain<W>,
    paths: &[FinitePath],
    horizon: usize,
    limit: usize,
) -> Result<HashSet<Vec<u32>>, MeasureError> {
    let mut out = HashSet::new();
    for path in paths {
        let ids = path
            .states
            .iter()
            .map(|s| {
                chain
                    .id(s)
                    .ok_or_else(|| MeasureError::UnknownState(model.render_global(s)))
            })
            .collect::<Result<Vec<_>, _>>()?;
        let mut frontier = vec![ids];
        while frontier[0].len() <= horizon {
            let mut next = Vec::new();
            for p in &frontier {
                for (t, _) in &chain.transitions[*p.last().expect("nonempty") as usize] {
                    let mut q = p.clone();
                    q.push(*t);
                    next.push(q);
                }
            }
            if next.len() > limit {
                return Err(MeasureError::TooManyPaths(limit));
            }
            frontier = next;
        }
        out.extend(frontier);
    }
    Ok(out)
}

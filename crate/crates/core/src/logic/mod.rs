//! Per-agent bounded LTL and its probabilistic closure.
//!
//! A [`Bltl`] formula is a boolean combination of single-agent formulas;
//! bounded until requires both operands to live on the same agent and is
//! evaluated on that agent's local projection of a trajectory. A [`Pbltl`]
//! formula wraps such formulas in probability thresholds `P>=γ [ φ ]` and
//! closes them under negation, disjunction and conjunction.

mod parser;

use std::collections::BTreeSet;
use std::fmt;
use std::sync::Arc;

use thiserror::Error;

use crate::model::{AgentId, DmcModel, GlobalState};
use crate::semantics::Event;

pub use parser::{parse_formula, parse_spec};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum LogicError {
    #[error("{line}:{column}: {message}")]
    Syntax {
        line: usize,
        column: usize,
        message: String,
    },
    #[error("{line}:{column}: unknown atomic proposition `{name}`")]
    UnknownAp { line: usize, column: usize, name: String },
    #[error("{line}:{column}: {message}")]
    Type {
        line: usize,
        column: usize,
        message: String,
    },
    #[error("{line}:{column}: threshold {value} is not strictly between 0 and 1")]
    Threshold { line: usize, column: usize, value: String },
    #[error("{line}:{column}: malformed bound `{text}`")]
    Bound { line: usize, column: usize, text: String },
}

/// Bounded LTL over per-agent atomic propositions.
#[derive(Debug, Clone, PartialEq)]
pub enum Bltl {
    True,
    False,
    Atom {
        name: String,
        agent: AgentId,
        /// Truth value per local state index of `agent`.
        holds: Arc<[bool]>,
    },
    Not(Box<Bltl>),
    Or(Box<Bltl>, Box<Bltl>),
    And(Box<Bltl>, Box<Bltl>),
    Until {
        lhs: Box<Bltl>,
        rhs: Box<Bltl>,
        bound: u32,
        agent: AgentId,
    },
}

impl std::ops::Not for Bltl {
    type Output = Bltl;

    fn not(self) -> Bltl {
        Bltl::Not(Box::new(self))
    }
}

impl Bltl {
    /// Resolves `name` against the model's atomic propositions.
    pub fn atom(model: &DmcModel, name: &str) -> Option<Bltl> {
        model.atomic_prop(name).map(|(agent, table)| Bltl::Atom {
            name: name.to_string(),
            agent,
            holds: Arc::from(table),
        })
    }

    pub fn or(self, other: Bltl) -> Bltl {
        Bltl::Or(Box::new(self), Box::new(other))
    }

    pub fn and(self, other: Bltl) -> Bltl {
        Bltl::And(Box::new(self), Box::new(other))
    }

    /// `lhs U[bound] rhs`, typed on the single agent of its operands.
    pub fn until(lhs: Bltl, rhs: Bltl, bound: u32) -> Result<Bltl, String> {
        let mut ty = lhs.type_of();
        ty.extend(rhs.type_of());
        if ty.len() > 1 {
            return Err(format!(
                "until operands must belong to a single agent, found agents {:?}",
                ty.iter().map(|a| a.0 + 1).collect::<Vec<_>>()
            ));
        }
        let Some(&agent) = ty.iter().next() else {
            return Err("cannot determine the agent of an until whose operands are constants".to_string());
        };
        Ok(Bltl::Until {
            lhs: Box::new(lhs),
            rhs: Box::new(rhs),
            bound,
            agent,
        })
    }

    /// `F[t] φ = true U[t] φ`.
    pub fn eventually(phi: Bltl, bound: u32) -> Result<Bltl, String> {
        Bltl::until(Bltl::True, phi, bound)
    }

    /// `G[t] φ = !F[t] !φ`.
    pub fn globally(phi: Bltl, bound: u32) -> Result<Bltl, String> {
        Ok(!Bltl::eventually(!phi, bound)?)
    }

    /// The set of agents whose projections the formula reads. Constants
    /// have the empty type.
    pub fn type_of(&self) -> BTreeSet<AgentId> {
        let mut out = BTreeSet::new();
        self.collect_type(&mut out);
        out
    }

    fn collect_type(&self, out: &mut BTreeSet<AgentId>) {
        match self {
            Bltl::True | Bltl::False => {}
            Bltl::Atom { agent, .. } | Bltl::Until { agent, .. } => {
                out.insert(*agent);
            }
            Bltl::Not(p) => p.collect_type(out),
            Bltl::Or(a, b) | Bltl::And(a, b) => {
                a.collect_type(out);
                b.collect_type(out);
            }
        }
    }

    /// Number of nested temporal and boolean operators.
    pub fn depth(&self) -> usize {
        match self {
            Bltl::True | Bltl::False | Bltl::Atom { .. } => 0,
            Bltl::Not(p) => 1 + p.depth(),
            Bltl::Or(a, b) | Bltl::And(a, b) => 1 + a.depth().max(b.depth()),
            Bltl::Until { lhs, rhs, .. } => 1 + lhs.depth().max(rhs.depth()),
        }
    }

    /// Per-agent projection lengths that decide the formula.
    pub fn bound_vector(&self, agents: usize) -> BoundVector {
        let mut k = vec![0u32; agents];
        self.bounds_into(&mut k);
        BoundVector(k)
    }

    fn bounds_into(&self, k: &mut [u32]) {
        match self {
            Bltl::True | Bltl::False => {}
            Bltl::Atom { agent, .. } => k[agent.index()] = k[agent.index()].max(1),
            Bltl::Not(p) => p.bounds_into(k),
            Bltl::Or(a, b) | Bltl::And(a, b) => {
                a.bounds_into(k);
                b.bounds_into(k);
            }
            Bltl::Until { lhs, rhs, bound, agent } => {
                let mut inner = vec![0u32; k.len()];
                lhs.bounds_into(&mut inner);
                rhs.bounds_into(&mut inner);
                let own = bound.saturating_add(inner[agent.index()].max(1));
                for (slot, v) in k.iter_mut().zip(&inner) {
                    *slot = (*slot).max(*v);
                }
                k[agent.index()] = k[agent.index()].max(own);
            }
        }
    }

    /// Truth at position `pos` of the local sequence `rho` of the formula's
    /// agent. Positions past the end satisfy no atom.
    pub fn eval_local(&self, rho: &[u32], pos: usize) -> bool {
        match self {
            Bltl::True => true,
            Bltl::False => false,
            Bltl::Atom { holds, .. } => rho.get(pos).is_some_and(|v| holds[*v as usize]),
            Bltl::Not(p) => !p.eval_local(rho, pos),
            Bltl::Or(a, b) => a.eval_local(rho, pos) || b.eval_local(rho, pos),
            Bltl::And(a, b) => a.eval_local(rho, pos) && b.eval_local(rho, pos),
            Bltl::Until { lhs, rhs, bound, .. } => {
                if rho.is_empty() {
                    return false;
                }
                let last = (pos + *bound as usize).min(rho.len() - 1);
                for l in pos..=last {
                    if rhs.eval_local(rho, l) {
                        return true;
                    }
                    if !lhs.eval_local(rho, l) {
                        return false;
                    }
                }
                false
            }
        }
    }

    /// Truth on a trajectory given its per-agent projections.
    pub fn eval(&self, proj: &Projections) -> bool {
        match self {
            Bltl::True => true,
            Bltl::False => false,
            Bltl::Atom { agent, .. } | Bltl::Until { agent, .. } => self.eval_local(proj.of(*agent), 0),
            Bltl::Not(p) => !p.eval(proj),
            Bltl::Or(a, b) => a.eval(proj) || b.eval(proj),
            Bltl::And(a, b) => a.eval(proj) && b.eval(proj),
        }
    }

    pub fn eval_trajectory(&self, model: &DmcModel, start: &GlobalState, events: &[Event]) -> bool {
        self.eval(&Projections::of_trajectory(model, start, events))
    }
}

impl Bltl {
    /// Binding strength in the concrete syntax: `|` < `&` < `U` < prefix.
    fn precedence(&self) -> u8 {
        match self {
            Bltl::Or(..) => 1,
            Bltl::And(..) => 2,
            Bltl::Until { lhs, .. } if **lhs != Bltl::True => 3,
            _ => 4,
        }
    }
}

impl fmt::Display for Bltl {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Bltl::True => write!(f, "true"),
            Bltl::False => write!(f, "false"),
            Bltl::Atom { name, .. } => write!(f, "{name}"),
            Bltl::Not(p) => match &**p {
                Bltl::Until { lhs, rhs, bound, .. } if **lhs == Bltl::True => match &**rhs {
                    Bltl::Not(inner) => write!(f, "G[{bound}] {}", Paren(inner, 4)),
                    _ => write!(f, "!{}", Paren(p, 4)),
                },
                _ => write!(f, "!{}", Paren(p, 4)),
            },
            Bltl::Or(a, b) => write!(f, "{} | {}", Paren(a, 1), Paren(b, 2)),
            Bltl::And(a, b) => write!(f, "{} & {}", Paren(a, 2), Paren(b, 3)),
            Bltl::Until { lhs, rhs, bound, .. } => {
                if **lhs == Bltl::True {
                    write!(f, "F[{bound}] {}", Paren(rhs, 4))
                } else {
                    write!(f, "{} U[{bound}] {}", Paren(lhs, 4), Paren(rhs, 3))
                }
            }
        }
    }
}

/// Parenthesizes a subformula that binds weaker than its position needs.
struct Paren<'a>(&'a Bltl, u8);

impl fmt::Display for Paren<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.precedence() < self.1 {
            write!(f, "({})", self.0)
        } else {
            write!(f, "{}", self.0)
        }
    }
}

/// `k_i` per agent, zero for agents the formula does not read.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct BoundVector(pub Vec<u32>);

impl BoundVector {
    pub fn get(&self, agent: AgentId) -> u32 {
        self.0[agent.index()]
    }

    pub fn is_zero(&self) -> bool {
        self.0.iter().all(|k| *k == 0)
    }

    /// Pointwise maximum.
    pub fn join(&self, other: &BoundVector) -> BoundVector {
        BoundVector(self.0.iter().zip(&other.0).map(|(a, b)| *a.max(b)).collect())
    }
}

/// Local state sequences of every agent along a trajectory.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Projections {
    pub seqs: Vec<Vec<u32>>,
}

impl Projections {
    pub fn new(start: &GlobalState) -> Projections {
        Projections {
            seqs: start.values().iter().map(|v| vec![*v]).collect(),
        }
    }

    /// The initial state contributes position 0; every event involving an
    /// agent appends that agent's new local state.
    pub fn of_trajectory(model: &DmcModel, start: &GlobalState, events: &[Event]) -> Projections {
        let mut p = Projections::new(start);
        for e in events {
            p.push(model, *e);
        }
        p
    }

    pub fn push(&mut self, model: &DmcModel, e: Event) {
        for (agent, v) in e.loc(model).iter().zip(e.target(model)) {
            self.seqs[agent.index()].push(*v);
        }
    }

    pub fn of(&self, agent: AgentId) -> &[u32] {
        &self.seqs[agent.index()]
    }
}

/// Probabilistic closure of [`Bltl`].
#[derive(Debug, Clone, PartialEq)]
pub enum Pbltl {
    Threshold { gamma: f64, formula: Bltl },
    Not(Box<Pbltl>),
    Or(Box<Pbltl>, Box<Pbltl>),
    And(Box<Pbltl>, Box<Pbltl>),
}

impl Pbltl {
    pub fn threshold(gamma: f64, formula: Bltl) -> Pbltl {
        Pbltl::Threshold { gamma, formula }
    }

    /// Threshold leaves in left-to-right order.
    pub fn leaves(&self) -> Vec<(f64, &Bltl)> {
        let mut out = Vec::new();
        self.collect_leaves(&mut out);
        out
    }

    fn collect_leaves<'a>(&'a self, out: &mut Vec<(f64, &'a Bltl)>) {
        match self {
            Pbltl::Threshold { gamma, formula } => out.push((*gamma, formula)),
            Pbltl::Not(p) => p.collect_leaves(out),
            Pbltl::Or(a, b) | Pbltl::And(a, b) => {
                a.collect_leaves(out);
                b.collect_leaves(out);
            }
        }
    }
}

impl fmt::Display for Pbltl {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Pbltl::Threshold { gamma, formula } => write!(f, "P>={gamma} [ {formula} ]"),
            Pbltl::Not(p) => write!(f, "!{}", PParen(p, 3)),
            Pbltl::Or(a, b) => write!(f, "{} | {}", PParen(a, 1), PParen(b, 2)),
            Pbltl::And(a, b) => write!(f, "{} & {}", PParen(a, 2), PParen(b, 3)),
        }
    }
}

struct PParen<'a>(&'a Pbltl, u8);

impl fmt::Display for PParen<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let strength = match self.0 {
            Pbltl::Or(..) => 1,
            Pbltl::And(..) => 2,
            _ => 3,
        };
        if strength < self.1 {
            write!(f, "({})", self.0)
        } else {
            write!(f, "{}", self.0)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::benchmarks::coin_game;

    fn idx(m: &DmcModel, names: &[&str]) -> Vec<u32> {
        names.iter().map(|n| m.local_state(n).unwrap().index).collect()
    }

    #[test]
    fn typing() {
        let m = coin_game();
        let l1 = Bltl::atom(&m, "L1").unwrap();
        let w2 = Bltl::atom(&m, "W2").unwrap();
        assert_eq!(l1.type_of(), BTreeSet::from([AgentId(0)]));
        assert_eq!(
            l1.clone().or(w2.clone()).type_of(),
            BTreeSet::from([AgentId(0), AgentId(1)])
        );
        assert_eq!((!l1.clone()).type_of(), l1.type_of());
        assert!(Bltl::until(Bltl::atom(&m, "H1").unwrap(), w2, 3).is_err());
        assert!(Bltl::eventually(Bltl::True, 3).is_err());
    }

    #[test]
    fn bounds() {
        let m = coin_game();
        let f_l1 = Bltl::eventually(Bltl::atom(&m, "L1").unwrap(), 7).unwrap();
        assert_eq!(f_l1.bound_vector(2), BoundVector(vec![8, 0]));
        assert_eq!(Bltl::atom(&m, "W2").unwrap().bound_vector(2), BoundVector(vec![0, 1]));
        let f_w2 = Bltl::eventually(Bltl::atom(&m, "W2").unwrap(), 7).unwrap();
        assert_eq!(f_l1.or(f_w2).bound_vector(2), BoundVector(vec![8, 8]));
        let nested = Bltl::eventually(Bltl::globally(Bltl::atom(&m, "W1").unwrap(), 2).unwrap(), 3).unwrap();
        assert_eq!(nested.bound_vector(2), BoundVector(vec![6, 0]));
    }

    #[test]
    fn local_semantics() {
        let m = coin_game();
        let rho = idx(&m, &["in1", "H1", "W1", "W1"]);
        let f_w1 = Bltl::eventually(Bltl::atom(&m, "W1").unwrap(), 7).unwrap();
        assert!(f_w1.eval_local(&rho, 0));
        assert!(Bltl::atom(&m, "in1").unwrap().eval_local(&idx(&m, &["in1"]), 0));
        let f1_h1 = Bltl::eventually(Bltl::atom(&m, "H1").unwrap(), 1).unwrap();
        assert!(!f1_h1.eval_local(&idx(&m, &["in1", "T1"]), 0));
        // the horizon is min(k + t, |rho| - 1)
        let f1_w1 = Bltl::eventually(Bltl::atom(&m, "W1").unwrap(), 1).unwrap();
        assert!(!f1_w1.eval_local(&rho, 0));
        assert!(f1_w1.eval_local(&rho, 1));
        let g = Bltl::globally(Bltl::atom(&m, "W1").unwrap(), 5).unwrap();
        assert!(g.eval_local(&rho, 2));
        assert!(!g.eval_local(&rho, 1));
    }

    #[test]
    fn trajectory_semantics() {
        let m = coin_game();
        let start = m.initial_state();
        let s = |a: &str, from: &[&str], to: &[&str]| {
            let id = m.action_by_name(a).unwrap();
            let act = m.action(id);
            let row = act.row_of(&idx(&m, from)).unwrap();
            let outcome = act
                .row(row)
                .outcomes
                .iter()
                .position(|o| *o.target == *idx(&m, to))
                .unwrap() as u32;
            Event {
                action: id,
                row,
                outcome,
            }
        };
        let events = [
            s("a1", &["in1"], &["H1"]),
            s("a2", &["in2"], &["T2"]),
            s("b", &["H1", "T2"], &["W1", "L2"]),
            s("w1", &["W1"], &["W1"]),
            s("l2", &["L2"], &["L2"]),
        ];
        let phi = Bltl::eventually(Bltl::atom(&m, "W1").unwrap(), 7)
            .unwrap()
            .and(Bltl::eventually(Bltl::atom(&m, "L2").unwrap(), 7).unwrap());
        assert!(phi.eval_trajectory(&m, &start, &events));
        assert!(!(!phi.clone()).eval_trajectory(&m, &start, &events));
        let proj = Projections::of_trajectory(&m, &start, &events);
        assert_eq!(proj.of(AgentId(0)), idx(&m, &["in1", "H1", "W1", "W1"]).as_slice());
        // a short projection is evaluated as is
        assert!(!phi.eval_trajectory(&m, &start, &events[..1]));
    }

    #[test]
    fn display_round_trips_through_parser() {
        let m = coin_game();
        for text in [
            "F[7] L1 & F[7] W2",
            "!(H1 U[3] W1)",
            "G[2] (W1 | L1)",
            "(in1 | T1) U[4] (F[2] W1)",
            "W1 | (L1 | H1)",
            "(W1 & L1) | H1 & T1",
            "H1 U[2] (T1 U[3] W1)",
            "(H1 U[2] T1) U[3] W1",
            "!(W1 & H1) | !F[2] L1",
        ] {
            let phi = parse_formula(text, &m).unwrap();
            let again = parse_formula(&phi.to_string(), &m).unwrap();
            assert_eq!(phi, again, "{text} -> {phi}");
        }
    }

    #[test]
    fn display_omits_redundant_parentheses() {
        let m = coin_game();
        let show = |t: &str| parse_formula(t, &m).unwrap().to_string();
        assert_eq!(show("F[3] W1 | F[3] L1 | F[3] H1"), "F[3] W1 | F[3] L1 | F[3] H1");
        assert_eq!(show("(W1 | L1) & H1"), "(W1 | L1) & H1");
        assert_eq!(show("W1 | (L1 | H1)"), "W1 | (L1 | H1)");
        let psi = parse_spec("P>=0.5 [ W1 ] | P>=0.5 [ L2 ] & !P>=0.2 [ H1 ]", &m).unwrap();
        assert_eq!(psi.to_string(), "P>=0.5 [ W1 ] | P>=0.5 [ L2 ] & !P>=0.2 [ H1 ]");
    }
}

//! Exact satisfaction probabilities for small models.
//!
//! A sampling round fires one maximal step, so the distribution of sampled
//! trajectories is the distribution of Markov chain paths stopped by the
//! same rule. Enumerating those paths with their probabilities gives the
//! exact probability that a sample satisfies a formula.

use thiserror::Error;

use crate::logic::{Bltl, Projections};
use crate::model::DmcModel;
use crate::prob::Weight;
use crate::semantics;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("exact enumeration exceeded {limit} paths")]
pub struct EnumerationLimit {
    pub limit: usize,
}

/// Probability that a sample from the initial state satisfies `phi`.
/// Deadlocks end a path, as in the `exact` dead-agent mode.
pub fn satisfaction_probability<W: Weight>(model: &DmcModel, phi: &Bltl, limit: usize) -> Result<W, EnumerationLimit> {
    let k = phi.bound_vector(model.agent_count()).0;
    let start = model.initial_state();
    let mut stack = vec![(start.clone(), Projections::new(&start), vec![0u32; k.len()], W::one())];
    let mut total = W::zero();
    let mut visited = 0usize;
    while let Some((s, proj, counts, w)) = stack.pop() {
        visited += 1;
        if visited > limit {
            return Err(EnumerationLimit { limit });
        }
        if semantics::maximal_step_count(model, &s).is_none_or(|n| n > limit) {
            return Err(EnumerationLimit { limit });
        }
        let steps = semantics::maximal_steps(model, &s);
        let done = counts.iter().zip(&k).all(|(c, k)| c >= k);
        if done || steps.is_empty() {
            if phi.eval(&proj) {
                total = total.add(&w);
            }
            continue;
        }
        for step in steps {
            let mut t = s.clone();
            let mut p = proj.clone();
            let mut c = counts.clone();
            let mut weight = w.clone();
            for e in &step.events {
                semantics::apply(model, &mut t, *e);
                p.push(model, *e);
                for a in e.loc(model) {
                    c[a.index()] += 1;
                }
                weight = weight.mul(&W::from_prob(&e.prob(model)));
            }
            stack.push((t, p, c, weight));
        }
    }
    Ok(total)
}

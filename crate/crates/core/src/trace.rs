//! Mazurkiewicz traces over events.
//!
//! Two events are independent when their agent sets are disjoint. Event
//! sequences are compared through their per-agent projections, and every
//! finite trace has a canonical representative, its Foata normal form.

use std::cmp::Ordering;
use std::fmt::Write as _;

use crate::model::{AgentId, DmcModel, GlobalState};
use crate::semantics::{self, Event, SemanticsError};

/// `loc(e) ∩ loc(e') = ∅`. Irreflexive because `loc` is never empty.
pub fn independent(model: &DmcModel, e: Event, f: Event) -> bool {
    let (a, b) = (e.loc(model), f.loc(model));
    // both lists are sorted
    let (mut i, mut j) = (0, 0);
    while i < a.len() && j < b.len() {
        match a[i].cmp(&b[j]) {
            Ordering::Less => i += 1,
            Ordering::Greater => j += 1,
            Ordering::Equal => return false,
        }
    }
    true
}

/// The subsequence of events involving agent `i`.
pub fn proj(model: &DmcModel, xi: &[Event], i: AgentId) -> Vec<Event> {
    xi.iter().copied().filter(|e| e.involves(model, i)).collect()
}

/// Projection equivalence of finite sequences.
pub fn trace_equiv(model: &DmcModel, xi: &[Event], other: &[Event]) -> bool {
    xi.len() == other.len() && model.agent_ids().all(|i| proj(model, xi, i) == proj(model, other, i))
}

/// `[xi] ⊑ [other]`: every projection of `xi` is a prefix of the matching
/// projection of `other`. `other` may be a finite unrolling of an infinite
/// sequence.
pub fn trace_prefix(model: &DmcModel, xi: &[Event], other: &[Event]) -> bool {
    model.agent_ids().all(|i| {
        let p = proj(model, xi, i);
        let q = proj(model, other, i);
        q.starts_with(&p)
    })
}

/// A Foata normal form: a sequence of nonempty steps of pairwise
/// independent events, each event sorted canonically within its step.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Default)]
pub struct FoataForm {
    pub steps: Vec<Vec<Event>>,
}

impl FoataForm {
    pub fn len(&self) -> usize {
        self.steps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.steps.is_empty()
    }

    /// Steps concatenated in order.
    pub fn flatten(&self) -> Vec<Event> {
        self.steps.iter().flatten().copied().collect()
    }

    /// `{e1,e2}{e3}`, events rendered with [`Event::render`].
    pub fn render(&self, model: &DmcModel) -> String {
        self.render_with(|e| e.render(model))
    }

    pub fn render_with(&self, mut name: impl FnMut(Event) -> String) -> String {
        let mut out = String::new();
        for step in &self.steps {
            out.push('{');
            for (k, e) in step.iter().enumerate() {
                if k > 0 {
                    out.push(',');
                }
                let _ = write!(out, "{}", name(*e));
            }
            out.push('}');
        }
        out
    }
}

/// Builds the Foata normal form by the greedy insertion rule: an event that
/// depends on something in the last step opens a new step; otherwise it
/// joins the earliest step after which it is independent of everything.
pub fn foata(model: &DmcModel, xi: &[Event]) -> FoataForm {
    let mut steps: Vec<Vec<Event>> = Vec::new();
    for &e in xi {
        let mut target = steps.len();
        while target > 0 && steps[target - 1].iter().all(|&f| independent(model, e, f)) {
            target -= 1;
        }
        if target == steps.len() {
            steps.push(vec![e]);
        } else {
            steps[target].push(e);
        }
    }
    for step in &mut steps {
        step.sort_by(|a, b| a.canonical_cmp(*b, model));
    }
    FoataForm { steps }
}

/// Replays `xi` from `start`, returning the visited states.
pub fn replay(model: &DmcModel, start: &GlobalState, xi: &[Event]) -> Result<Vec<GlobalState>, SemanticsError> {
    let mut states = Vec::with_capacity(xi.len() + 1);
    states.push(start.clone());
    for &e in xi {
        let (next, _) = semantics::fire(model, states.last().expect("nonempty"), e)?;
        states.push(next);
    }
    Ok(states)
}

/// Maximality of the trace of a sequence fired from `start`.
///
/// With `horizon = None` the sequence is read as a finite trajectory, which
/// is maximal iff it ends in a deadlock. With `Some(h)` it is read as the
/// first events of an infinite sequence: an agent whose last move lies more
/// than `h` events before the end is treated as starved, and the sequence
/// is reported non-maximal when some event over starved agents only is
/// enabled at the final state. This is a semi-decision: agents that would
/// move again after the horizon are misclassified as starved.
pub fn is_maximal_trace(
    model: &DmcModel,
    start: &GlobalState,
    xi: &[Event],
    horizon: Option<usize>,
) -> Result<bool, SemanticsError> {
    let states = replay(model, start, xi)?;
    let last = states.last().expect("nonempty");
    let Some(h) = horizon else {
        return Ok(semantics::is_deadlock(model, last));
    };
    let cutoff = xi.len().saturating_sub(h);
    let mut live = vec![false; model.agent_count()];
    for e in &xi[cutoff..] {
        for a in e.loc(model) {
            live[a.index()] = true;
        }
    }
    let starved_move = semantics::enabled_events(model, last)
        .into_iter()
        .any(|e| e.loc(model).iter().all(|a| !live[a.index()]));
    Ok(!starved_move)
}

/// Exact maximality for the lasso `prefix · cycle^ω`: agents in `cycle`
/// move infinitely often, the others are frozen after `prefix · cycle`.
pub fn is_maximal_lasso(
    model: &DmcModel,
    start: &GlobalState,
    prefix: &[Event],
    cycle: &[Event],
) -> Result<bool, SemanticsError> {
    if cycle.is_empty() {
        return is_maximal_trace(model, start, prefix, None);
    }
    let mut xi = prefix.to_vec();
    xi.extend_from_slice(cycle);
    let states = replay(model, start, &xi)?;
    let end = states.last().expect("nonempty");
    if end != &states[prefix.len()] {
        return Err(SemanticsError::NotEnabled {
            event: "cycle".to_string(),
            state: format!(
                "{} (cycle does not return to its entry state)",
                model.render_global(end)
            ),
        });
    }
    is_maximal_trace(model, start, &xi, Some(cycle.len()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::benchmarks::coin_game;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    struct Coin {
        m: DmcModel,
    }

    impl Coin {
        fn new() -> Coin {
            Coin { m: coin_game() }
        }

        fn ev(&self, action: &str, from: &[&str], to: &[&str]) -> Event {
            let a = self.m.action_by_name(action).unwrap();
            let act = self.m.action(a);
            let idx = |n: &[&str]| -> Vec<u32> { n.iter().map(|s| self.m.local_state(s).unwrap().index).collect() };
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

        fn e_h(&self) -> Event {
            self.ev("a1", &["in1"], &["H1"])
        }
        fn e_t(&self) -> Event {
            self.ev("a1", &["in1"], &["T1"])
        }
        fn f_t(&self) -> Event {
            self.ev("a2", &["in2"], &["T2"])
        }
        fn ht(&self) -> Event {
            self.ev("b", &["H1", "T2"], &["W1", "L2"])
        }
        fn tt(&self) -> Event {
            self.ev("b", &["T1", "T2"], &["in1", "in2"])
        }
        fn w(&self) -> Event {
            self.ev("w1", &["W1"], &["W1"])
        }
        fn l(&self) -> Event {
            self.ev("l2", &["L2"], &["L2"])
        }

        fn short(&self, e: Event) -> String {
            let table = [
                (self.e_h(), "e_h"),
                (self.e_t(), "e_t"),
                (self.f_t(), "e'_t"),
                (self.ht(), "ht"),
                (self.w(), "w"),
                (self.l(), "l'"),
            ];
            table.iter().find(|(x, _)| *x == e).map(|(_, n)| n.to_string()).unwrap()
        }
    }

    #[test]
    fn independence() {
        let c = Coin::new();
        assert!(independent(&c.m, c.e_h(), c.f_t()));
        assert!(!independent(&c.m, c.e_h(), c.e_t()));
        assert!(!independent(&c.m, c.e_h(), c.e_h()));
        assert!(!independent(&c.m, c.ht(), c.w()));
    }

    #[test]
    fn projections() {
        let c = Coin::new();
        let xi = [c.e_t(), c.f_t(), c.tt()];
        assert_eq!(proj(&c.m, &xi, AgentId(0)), vec![c.e_t(), c.tt()]);
        assert!(proj(&c.m, &[], AgentId(0)).is_empty());
        let own = [c.e_h(), c.ht(), c.w()];
        assert_eq!(proj(&c.m, &own, AgentId(0)), own.to_vec());
    }

    #[test]
    fn equivalence_and_prefix() {
        let c = Coin::new();
        assert!(trace_equiv(&c.m, &[c.e_h(), c.f_t()], &[c.f_t(), c.e_h()]));
        assert!(!trace_equiv(&c.m, &[c.e_h(), c.e_t()], &[c.e_t(), c.e_h()]));
        assert!(trace_prefix(&c.m, &[c.e_h()], &[c.e_h(), c.f_t()]));
        assert!(trace_prefix(&c.m, &[c.e_h()], &[c.f_t(), c.e_h()]));
        assert!(!trace_prefix(&c.m, &[c.e_h(), c.e_t()], &[c.e_h()]));
    }

    #[test]
    fn normal_form_of_the_winning_run() {
        let c = Coin::new();
        let xi = [c.e_h(), c.f_t(), c.ht(), c.l(), c.w(), c.w()];
        let fnf = foata(&c.m, &xi);
        let expected = [vec![c.e_h(), c.f_t()], vec![c.ht()], vec![c.w(), c.l()], vec![c.w()]];
        assert_eq!(fnf.len(), expected.len());
        for (got, want) in fnf.steps.iter().zip(&expected) {
            let mut got = got.clone();
            let mut want = want.clone();
            got.sort();
            want.sort();
            assert_eq!(got, want);
        }
        assert_eq!(fnf.render_with(|e| c.short(e)), "{e_h,e'_t}{ht}{w,l'}{w}");
        assert!(foata(&c.m, &[]).is_empty());
        assert_eq!(
            fnf.render(&c.m),
            "{a1[in1>H1],a2[in2>T2]}{b[H1,T2>W1,L2]}{w1[W1>W1],l2[L2>L2]}{w1[W1>W1]}"
        );
    }

    #[test]
    fn dependent_sequence_gives_singletons() {
        let c = Coin::new();
        let xi = [c.e_h(), c.ht(), c.w(), c.w()];
        let fnf = foata(&c.m, &xi);
        assert!(fnf.steps.iter().all(|s| s.len() == 1));
        assert_eq!(fnf.flatten(), xi.to_vec());
    }

    #[test]
    fn maximality() {
        let c = Coin::new();
        let start = c.m.initial_state();
        let prefix = [c.e_h(), c.f_t(), c.ht()];
        assert!(!is_maximal_lasso(&c.m, &start, &prefix, &[c.l()]).unwrap());
        assert!(is_maximal_lasso(&c.m, &start, &prefix, &[c.l(), c.w()]).unwrap());
        assert!(!is_maximal_trace(&c.m, &start, &prefix, None).unwrap());

        let mut unrolled = prefix.to_vec();
        for _ in 0..10 {
            unrolled.push(c.w());
            unrolled.push(c.l());
        }
        assert!(is_maximal_trace(&c.m, &start, &unrolled, Some(4)).unwrap());
    }

    fn random_run(m: &DmcModel, rng: &mut ChaCha8Rng, len: usize) -> Vec<Event> {
        let mut s = m.initial_state();
        let mut out = Vec::new();
        for _ in 0..len {
            let evs = semantics::enabled_events(m, &s);
            if evs.is_empty() {
                break;
            }
            let e = evs[rng.gen_range(0..evs.len())];
            s = semantics::fire(m, &s, e).unwrap().0;
            out.push(e);
        }
        out
    }

    proptest! {
        #[test]
        fn foata_is_a_complete_invariant(seed in any::<u64>(), swaps in 0usize..40) {
            let m = coin_game();
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let xi = random_run(&m, &mut rng, 12);
            let mut other = xi.clone();
            for _ in 0..swaps {
                if other.len() < 2 { break; }
                let k = rng.gen_range(0..other.len() - 1);
                if independent(&m, other[k], other[k + 1]) {
                    other.swap(k, k + 1);
                }
            }
            prop_assert!(trace_equiv(&m, &xi, &other));
            prop_assert_eq!(foata(&m, &xi), foata(&m, &other));
            let flat = foata(&m, &xi).flatten();
            prop_assert!(trace_equiv(&m, &xi, &flat));
            let fnf = foata(&m, &xi);
            for step in &fnf.steps {
                for (i, a) in step.iter().enumerate() {
                    for b in &step[i + 1..] {
                        prop_assert!(independent(&m, *a, *b));
                    }
                }
            }
            for w in fnf.steps.windows(2) {
                for e in &w[1] {
                    prop_assert!(w[0].iter().any(|f| !independent(&m, *e, *f)));
                }
            }
        }
    }
}

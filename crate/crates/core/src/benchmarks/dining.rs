//! Randomized dining philosophers in the style of Lehmann and Rabin.
//!
//! Philosopher `j` shares fork `j` with its left neighbour and fork
//! `j + 1 mod N` with its right neighbour. Philosophers and forks meet in
//! lockstep polls: a philosopher alternates between polling its left and its
//! right fork, and a fork alternates between serving its two users, so the
//! polls of all philosophers line up and the system never deadlocks. Every
//! protocol move happens during a poll of the fork it concerns:
//!
//! * a thinking philosopher becomes hungry with probability 1/2;
//! * a hungry philosopher picks its first fork by a fair coin;
//! * it waits until the first fork is free and takes it;
//! * it takes the second fork if free and eats, otherwise it puts the first
//!   fork back and becomes hungry again;
//! * after eating it puts both forks back and thinks.
//!
//! The proposition `eaten_j` holds once philosopher `j` has eaten.
//!
//! With `quota = Some(q)` the forks also carry a capped count of
//! philosophers known to have eaten. Philosopher `j` reads the count on fork
//! `j`, adds one if it has eaten, and writes the result on fork `j + 1`.
//! Fork 0 always carries 0. The last philosopher satisfies `quota` once the
//! count it would write reaches `q`, so a single proposition replaces the
//! disjunction over all `q`-subsets of philosophers.

use serde_json::json;

use crate::model::{DmcModel, ModelBuilder, ModelError};
use crate::prob::Prob;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct DiningParams {
    pub n: u32,
    pub quota: Option<u32>,
}

impl DiningParams {
    pub fn new(n: u32) -> DiningParams {
        DiningParams { n, quota: None }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Side {
    Left,
    Right,
}

impl Side {
    fn other(self) -> Side {
        match self {
            Side::Left => Side::Right,
            Side::Right => Side::Left,
        }
    }

    fn tag(self) -> &'static str {
        match self {
            Side::Left => "L",
            Side::Right => "R",
        }
    }
}

const SIDES: [Side; 2] = [Side::Left, Side::Right];

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Pc {
    Think,
    Hungry,
    /// waiting for the first fork
    First(Side),
    /// holding the first fork, waiting to try the second
    Second(Side),
    /// holding the first fork, about to put it back
    Drop(Side),
    Eat,
    /// holding only the fork on the given side after eating
    Release(Side),
}

const PCS: [Pc; 11] = [
    Pc::Think,
    Pc::Hungry,
    Pc::First(Side::Left),
    Pc::First(Side::Right),
    Pc::Second(Side::Left),
    Pc::Second(Side::Right),
    Pc::Drop(Side::Left),
    Pc::Drop(Side::Right),
    Pc::Eat,
    Pc::Release(Side::Left),
    Pc::Release(Side::Right),
];

fn pc_name(pc: Pc) -> String {
    match pc {
        Pc::Think => "think".into(),
        Pc::Hungry => "hungry".into(),
        Pc::First(s) => format!("first{}", s.tag()),
        Pc::Second(s) => format!("second{}", s.tag()),
        Pc::Drop(s) => format!("drop{}", s.tag()),
        Pc::Eat => "eat".into(),
        Pc::Release(s) => format!("release{}", s.tag()),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
struct Phil {
    pc: Pc,
    poll: Side,
    eaten: bool,
    /// count last read from the left fork
    seen: u32,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
struct Fork {
    taken: bool,
    /// `Left` when the next poll comes from the philosopher using this fork
    /// as its left fork
    serves: Side,
    count: u32,
}

struct Layout {
    counts: u32,
}

impl Layout {
    fn phil_index(&self, p: Phil) -> u32 {
        let pc = PCS.iter().position(|&x| x == p.pc).unwrap() as u32;
        ((pc * 2 + (p.poll == Side::Right) as u32) * 2 + p.eaten as u32) * self.counts + p.seen
    }

    fn phils(&self) -> impl Iterator<Item = Phil> + '_ {
        PCS.iter().flat_map(move |&pc| {
            SIDES.iter().flat_map(move |&poll| {
                [false, true]
                    .into_iter()
                    .flat_map(move |eaten| (0..self.counts).map(move |seen| Phil { pc, poll, eaten, seen }))
            })
        })
    }

    fn fork_index(&self, f: Fork) -> u32 {
        ((f.taken as u32) * 2 + (f.serves == Side::Right) as u32) * self.counts + f.count
    }

    fn forks(&self) -> impl Iterator<Item = Fork> + '_ {
        [false, true].into_iter().flat_map(move |taken| {
            SIDES
                .iter()
                .flat_map(move |&serves| (0..self.counts).map(move |count| Fork { taken, serves, count }))
        })
    }

    fn phil_name(&self, j: u32, p: Phil) -> String {
        let mut s = format!(
            "ph{j}.{}.{}{}",
            pc_name(p.pc),
            p.poll.tag(),
            if p.eaten { "e" } else { "" }
        );
        if self.counts > 1 {
            s.push_str(&format!(".{}", p.seen));
        }
        s
    }

    fn fork_name(&self, j: u32, f: Fork) -> String {
        let mut s = format!("fk{j}.{}{}", if f.taken { "taken" } else { "free" }, f.serves.tag());
        if self.counts > 1 {
            s.push_str(&format!(".{}", f.count));
        }
        s
    }
}

/// Distribution over the philosopher and fork after one poll of the fork
/// on `side`. With `cap` set, counts are read from a left fork and written
/// to a right fork.
fn poll(ph: Phil, fork: Fork, side: Side, cap: Option<u32>) -> Vec<(Phil, Fork, Prob)> {
    let half = Prob::new(1, 2);
    let mut me = ph;
    let mut f = fork;
    me.poll = side.other();
    f.serves = side.other();
    let mut outcomes = Vec::new();
    match ph.pc {
        Pc::Think => {
            let mut hungry = me;
            hungry.pc = Pc::Hungry;
            outcomes.push((me, f, half));
            outcomes.push((hungry, f, half));
        }
        Pc::Hungry => {
            for s in SIDES {
                let mut next = me;
                next.pc = Pc::First(s);
                outcomes.push((next, f, half));
            }
        }
        Pc::First(s) if s == side && !fork.taken => {
            me.pc = Pc::Second(s);
            f.taken = true;
            outcomes.push((me, f, Prob::ONE));
        }
        Pc::Second(s) if s.other() == side => {
            if fork.taken {
                me.pc = Pc::Drop(s);
            } else {
                me.pc = Pc::Eat;
                me.eaten = true;
                f.taken = true;
            }
            outcomes.push((me, f, Prob::ONE));
        }
        Pc::Drop(s) if s == side => {
            me.pc = Pc::Hungry;
            f.taken = false;
            outcomes.push((me, f, Prob::ONE));
        }
        Pc::Eat => {
            me.pc = Pc::Release(side.other());
            f.taken = false;
            outcomes.push((me, f, Prob::ONE));
        }
        Pc::Release(s) if s == side => {
            me.pc = Pc::Think;
            f.taken = false;
            outcomes.push((me, f, Prob::ONE));
        }
        _ => outcomes.push((me, f, Prob::ONE)),
    }
    if let Some(q) = cap {
        for (p, f, _) in &mut outcomes {
            match side {
                Side::Left => p.seen = fork.count,
                Side::Right => f.count = (p.seen + p.eaten as u32).min(q),
            }
        }
    }
    outcomes
}

pub fn dining_philosophers(params: DiningParams) -> Result<DmcModel, ModelError> {
    let n = params.n;
    if n < 3 {
        return Err(ModelError::Malformed(
            "dining philosophers: at least three philosophers are required".into(),
        ));
    }
    if let Some(q) = params.quota {
        if q == 0 || q > n {
            return Err(ModelError::Malformed(format!(
                "dining philosophers: quota must lie in 1..={n}"
            )));
        }
    }
    let l = Layout {
        counts: params.quota.map_or(1, |q| q + 1),
    };
    let mut b = ModelBuilder::new();
    let initial_phil = Phil {
        pc: Pc::Think,
        poll: Side::Left,
        eaten: false,
        seen: 0,
    };
    let initial_fork = Fork {
        taken: false,
        serves: Side::Left,
        count: 0,
    };
    for j in 0..n {
        let names: Vec<String> = l.phils().map(|p| l.phil_name(j + 1, p)).collect();
        b.agent(&format!("Ph{}", j + 1), &names, &l.phil_name(j + 1, initial_phil));
    }
    for j in 0..n {
        let names: Vec<String> = l.forks().map(|f| l.fork_name(j + 1, f)).collect();
        b.agent(&format!("Fk{}", j + 1), &names, &l.fork_name(j + 1, initial_fork));
    }
    for j in 0..n {
        for side in SIDES {
            let fork = match side {
                Side::Left => j,
                Side::Right => (j + 1) % n,
            };
            // fork 0 ignores incoming counts
            let cap = match (params.quota, side, fork) {
                (Some(_), Side::Right, 0) => None,
                (q, _, _) => q,
            };
            let a = b.action(
                &format!("poll{}{}", j + 1, side.tag()),
                &[format!("Ph{}", j + 1), format!("Fk{}", fork + 1)],
            );
            for ph in l.phils().filter(|p| p.poll == side) {
                for fk in l.forks().filter(|f| f.serves == side) {
                    let out = poll(ph, fk, side, cap)
                        .into_iter()
                        .map(|(p, f, pr)| (vec![l.phil_index(p), l.fork_index(f)], pr))
                        .collect();
                    b.row_indexed(a, vec![l.phil_index(ph), l.fork_index(fk)], out);
                }
            }
        }
    }
    for j in 0..n {
        let ap = format!("eaten_{}", j + 1);
        for p in l.phils().filter(|p| p.eaten) {
            b.label(&l.phil_name(j + 1, p), &[ap.as_str()]);
        }
    }
    if let Some(q) = params.quota {
        for p in l.phils().filter(|p| p.seen + p.eaten as u32 >= q) {
            b.label(&l.phil_name(n, p), &["quota"]);
        }
    }
    b.metadata("family", json!("dining-philosophers"));
    b.metadata("n", json!(n));
    if let Some(q) = params.quota {
        b.metadata("quota", json!(q));
    }
    b.build()
}

/// `P>=γ [ ... ]` stating that at least `ceil(fraction * N)` philosophers
/// eat within `t` local moves each, as a disjunction over subsets.
pub fn fraction_spec(n: u32, fraction: f64, t: u32, gamma: f64) -> String {
    let need = quota_for(n, fraction);
    let mut disjuncts = Vec::new();
    let mut chosen = Vec::with_capacity(need as usize);
    subsets(1, n, need, &mut chosen, &mut |set| {
        let parts: Vec<String> = set.iter().map(|j| format!("F[{t}] eaten_{j}")).collect();
        disjuncts.push(format!("({})", parts.join(" & ")));
    });
    format!("P>={gamma} [ {} ]\n", disjuncts.join("\n  | "))
}

/// Spec over a model built with `quota = Some(quota_for(n, fraction))`.
pub fn quota_spec(t: u32, gamma: f64) -> String {
    format!("P>={gamma} [ F[{t}] quota ]\n")
}

pub fn quota_for(n: u32, fraction: f64) -> u32 {
    ((fraction * n as f64) - 1e-9).ceil().max(1.0) as u32
}

fn subsets(from: u32, n: u32, need: u32, chosen: &mut Vec<u32>, f: &mut dyn FnMut(&[u32])) {
    if chosen.len() as u32 == need {
        f(chosen);
        return;
    }
    for j in from..=n {
        if n - j + 1 < need - chosen.len() as u32 {
            break;
        }
        chosen.push(j);
        subsets(j + 1, n, need, chosen, f);
        chosen.pop();
    }
}

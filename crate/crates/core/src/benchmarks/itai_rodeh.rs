//! Itai–Rodeh leader election on a unidirectional ring.
//!
//! `N` processes are connected by FIFO channels; process `p` writes to
//! channel `p`, which is read by process `p + 1 mod N`. A channel of
//! capacity `c` is a cascade of `c` one-place cells. Every transfer of a
//! message is a synchronization between a process and a cell, or between
//! two adjacent cells.
//!
//! Messages carry `(id, round bit, hop, unique)`. An active process draws
//! an identity uniformly from `1..=id_range` and sends it with hop 1. On
//! receipt it:
//!
//! * becomes leader when its own message returns with the unique flag set;
//! * draws a fresh identity and flips its round bit when its own message
//!   returns with the flag cleared;
//! * forwards with the flag cleared a message from another process with
//!   the same identity and round;
//! * turns passive and forwards a message from a higher identity or from
//!   another round;
//! * drops a message from a lower identity in its own round.
//!
//! Passive processes forward everything. The elected leader then circulates
//! a token forever, so every agent keeps moving and no agent ever dies.
//!
//! A process handles at most `N` messages per election round with two local
//! moves each (receive and send), so a bound of `rounds * moves_per_round`
//! local moves with `moves_per_round = 2N + 2` covers `rounds` rounds. The
//! constant is exported in the model metadata.

use serde_json::json;

use crate::model::{DmcModel, ModelBuilder, ModelError};
use crate::prob::Prob;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ItaiRodehParams {
    pub n: u32,
    pub id_range: u32,
    pub channel_capacity: u32,
}

impl ItaiRodehParams {
    pub fn new(n: u32) -> ItaiRodehParams {
        ItaiRodehParams {
            n,
            id_range: n,
            channel_capacity: 1,
        }
    }

    pub fn moves_per_round(&self) -> u32 {
        2 * self.n + 2
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Msg {
    Id {
        id: u32,
        round: u32,
        hop: u32,
        unique: bool,
    },
    Token,
}

/// Dense numbering of messages, process states and cell states.
struct Layout {
    n: u32,
    k: u32,
}

impl Layout {
    fn messages(&self) -> u32 {
        4 * self.k * self.n + 1
    }

    fn msg_index(&self, m: Msg) -> u32 {
        match m {
            Msg::Id { id, round, hop, unique } => (((id - 1) * 2 + round) * self.n + (hop - 1)) * 2 + unique as u32,
            Msg::Token => 4 * self.k * self.n,
        }
    }

    fn msg(&self, index: u32) -> Msg {
        if index == 4 * self.k * self.n {
            return Msg::Token;
        }
        let unique = index % 2 == 1;
        let rest = index / 2;
        let hop = rest % self.n + 1;
        let rest = rest / self.n;
        Msg::Id {
            id: rest / 2 + 1,
            round: rest % 2,
            hop,
            unique,
        }
    }

    fn msg_name(&self, m: Msg) -> String {
        match m {
            Msg::Id { id, round, hop, unique } => format!("{id}.{round}.{hop}.{}", unique as u32),
            Msg::Token => "tok".to_string(),
        }
    }

    // process states
    const START: u32 = 0;

    fn own(&self, id: u32, round: u32) -> u32 {
        1 + (id - 1) * 2 + round
    }

    fn clash(&self, id: u32, round: u32, hop: u32) -> u32 {
        1 + 2 * self.k + ((id - 1) * 2 + round) * (self.n - 1) + (hop - 2)
    }

    fn active(&self, id: u32, round: u32) -> u32 {
        1 + 2 * self.k + 2 * self.k * (self.n - 1) + (id - 1) * 2 + round
    }

    fn passive(&self) -> u32 {
        1 + 4 * self.k + 2 * self.k * (self.n - 1)
    }

    fn forward(&self, m: Msg) -> u32 {
        self.passive() + 1 + self.msg_index(m)
    }

    fn leader_send(&self) -> u32 {
        self.passive() + 1 + self.messages()
    }

    fn leader_wait(&self) -> u32 {
        self.leader_send() + 1
    }

    fn process_states(&self, p: u32) -> Vec<String> {
        let mut out = vec![format!("p{p}.start")];
        for id in 1..=self.k {
            for r in 0..2 {
                out.push(format!("p{p}.own{id}.{r}"));
            }
        }
        for id in 1..=self.k {
            for r in 0..2 {
                for h in 2..=self.n {
                    out.push(format!("p{p}.clash{id}.{r}.{h}"));
                }
            }
        }
        for id in 1..=self.k {
            for r in 0..2 {
                out.push(format!("p{p}.act{id}.{r}"));
            }
        }
        out.push(format!("p{p}.pass"));
        for i in 0..self.messages() {
            out.push(format!("p{p}.fwd{}", self.msg_name(self.msg(i))));
        }
        out.push(format!("p{p}.lead"));
        out.push(format!("p{p}.lwait"));
        out
    }

    // cell states: 0 = empty, 1 + msg = full
    fn cell_states(&self, name: &str) -> Vec<String> {
        let mut out = vec![format!("{name}.empty")];
        for i in 0..self.messages() {
            out.push(format!("{name}.{}", self.msg_name(self.msg(i))));
        }
        out
    }
}

/// Largest model the builder agrees to produce, in transition rows. Rows
/// grow with `N^2 * K^2`.
pub const MAX_ROWS: u64 = 4_000_000;

fn check(params: &ItaiRodehParams) -> Result<(), ModelError> {
    let bad = |what: &str| Err(ModelError::Malformed(format!("itai-rodeh: {what}")));
    if params.n < 2 {
        return bad("at least two processes are required");
    }
    if params.id_range < 2 {
        return bad("the identity range must contain at least two values");
    }
    if params.channel_capacity < 1 {
        return bad("channel capacity must be positive");
    }
    let layout = Layout {
        n: params.n,
        k: params.id_range,
    };
    if (layout.leader_wait() as u64) > u32::MAX as u64 / 2 {
        return bad("parameters too large");
    }
    let (n, k, cap) = (params.n as u64, params.id_range as u64, params.channel_capacity as u64);
    let rows = n * (4 * k * n + 1) * (2 * k + 2 + cap);
    if rows > MAX_ROWS {
        return bad(&format!(
            "about {rows} transition rows needed, above the limit of {MAX_ROWS}; reduce the identity range"
        ));
    }
    Ok(())
}

pub fn itai_rodeh(params: ItaiRodehParams) -> Result<DmcModel, ModelError> {
    check(&params)?;
    let ItaiRodehParams {
        n,
        id_range: k,
        channel_capacity: cap,
    } = params;
    let l = Layout { n, k };
    let uniform = Prob::new(1, k as i64);
    let mut b = ModelBuilder::new();

    let proc_name = |p: u32| format!("P{}", p + 1);
    let cell_name = |p: u32, j: u32| {
        if cap == 1 {
            format!("C{}", p + 1)
        } else {
            format!("C{}_{}", p + 1, j + 1)
        }
    };
    for p in 0..n {
        let states = l.process_states(p + 1);
        let init = states[0].clone();
        b.agent(&proc_name(p), &states, &init);
    }
    for p in 0..n {
        for j in 0..cap {
            let name = cell_name(p, j);
            let states = l.cell_states(&name.to_lowercase());
            let init = states[0].clone();
            b.agent(&name, &states, &init);
        }
    }

    for p in 0..n {
        let draw = b.action(&format!("draw{}", p + 1), &[proc_name(p)]);
        b.row_indexed(
            draw,
            vec![Layout::START],
            (1..=k).map(|id| (vec![l.own(id, 0)], uniform)).collect(),
        );
    }

    // process p writes into the first cell of its channel
    for p in 0..n {
        let put = b.action(&format!("put{}", p + 1), &[proc_name(p), cell_name(p, 0)]);
        let mut send = |from: u32, to: u32, m: Msg| {
            b.row_indexed(put, vec![from, 0], vec![(vec![to, 1 + l.msg_index(m)], Prob::ONE)]);
        };
        for id in 1..=k {
            for round in 0..2 {
                send(
                    l.own(id, round),
                    l.active(id, round),
                    Msg::Id {
                        id,
                        round,
                        hop: 1,
                        unique: true,
                    },
                );
                for hop in 2..=n {
                    send(
                        l.clash(id, round, hop),
                        l.active(id, round),
                        Msg::Id {
                            id,
                            round,
                            hop,
                            unique: false,
                        },
                    );
                }
            }
        }
        for i in 0..l.messages() {
            send(l.forward(l.msg(i)), l.passive(), l.msg(i));
        }
        send(l.leader_send(), l.leader_wait(), Msg::Token);
    }

    // transfers between adjacent cells
    for p in 0..n {
        for j in 0..cap.saturating_sub(1) {
            let mv = b.action(
                &format!("mv{}_{}", p + 1, j + 1),
                &[cell_name(p, j), cell_name(p, j + 1)],
            );
            for i in 0..l.messages() {
                b.row_indexed(mv, vec![1 + i, 0], vec![(vec![0, 1 + i], Prob::ONE)]);
            }
        }
    }

    // process p reads from the last cell of channel p - 1
    for p in 0..n {
        let src = (p + n - 1) % n;
        let get = b.action(&format!("get{}", p + 1), &[proc_name(p), cell_name(src, cap - 1)]);
        let full = |m: Msg| 1 + l.msg_index(m);
        let forwarded = |m: Msg| match m {
            Msg::Id { id, round, hop, unique } if hop < n => Some(Msg::Id {
                id,
                round,
                hop: hop + 1,
                unique,
            }),
            Msg::Id { .. } => None,
            Msg::Token => Some(Msg::Token),
        };
        for i in 0..l.messages() {
            let m = l.msg(i);
            // passive
            let to = match forwarded(m) {
                Some(f) => l.forward(f),
                None => l.passive(),
            };
            b.row_indexed(get, vec![l.passive(), full(m)], vec![(vec![to, 0], Prob::ONE)]);
            // leader
            let to = if m == Msg::Token {
                l.leader_send()
            } else {
                l.leader_wait()
            };
            b.row_indexed(get, vec![l.leader_wait(), full(m)], vec![(vec![to, 0], Prob::ONE)]);
            // active
            let Msg::Id { id, round, hop, unique } = m else {
                continue;
            };
            for my_id in 1..=k {
                for my_round in 0..2 {
                    let from = vec![l.active(my_id, my_round), full(m)];
                    let same_round = round == my_round;
                    let outcomes: Vec<(Vec<u32>, Prob)> = if same_round && id == my_id && hop == n {
                        if unique {
                            vec![(vec![l.leader_send(), 0], Prob::ONE)]
                        } else {
                            (1..=k)
                                .map(|fresh| (vec![l.own(fresh, 1 - my_round), 0], uniform))
                                .collect()
                        }
                    } else if same_round && id == my_id {
                        vec![(vec![l.clash(my_id, my_round, hop + 1), 0], Prob::ONE)]
                    } else if !same_round || id > my_id {
                        let to = match forwarded(m) {
                            Some(f) => l.forward(f),
                            None => l.passive(),
                        };
                        vec![(vec![to, 0], Prob::ONE)]
                    } else {
                        vec![(vec![l.active(my_id, my_round), 0], Prob::ONE)]
                    };
                    b.row_indexed(get, from, outcomes);
                }
            }
        }
    }

    for p in 0..n {
        let ap = format!("leader_{}", p + 1);
        for s in ["lead", "lwait"] {
            b.label(&format!("p{}.{s}", p + 1), &[ap.as_str()]);
        }
    }
    b.metadata("family", json!("itai-rodeh"));
    b.metadata("n", json!(n));
    b.metadata("id_range", json!(k));
    b.metadata("channel_capacity", json!(cap));
    b.metadata("moves_per_round", json!(params.moves_per_round()));
    b.build()
}

/// `P>=γ [ F[t] leader_1 | ... | F[t] leader_N ]` with
/// `t = rounds * moves_per_round`.
pub fn leader_spec(params: &ItaiRodehParams, rounds: u32, gamma: f64) -> String {
    let t = rounds * params.moves_per_round();
    let disjuncts: Vec<String> = (1..=params.n).map(|p| format!("F[{t}] leader_{p}")).collect();
    format!("P>={gamma} [ {} ]\n", disjuncts.join(" | "))
}

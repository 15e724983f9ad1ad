//! The two-player coin game.
//!
//! Each player tosses a fair coin. Equal outcomes send both players back
//! to their initial states; otherwise the player who tossed heads wins.
//! Winning and losing states loop forever through internal actions.

use crate::model::{DmcModel, ModelBuilder};
use crate::prob::Prob;

pub fn coin_game() -> DmcModel {
    let half = Prob::new(1, 2);
    let mut b = ModelBuilder::new();
    b.agent("P1", &["in1", "T1", "H1", "L1", "W1"], "in1");
    b.agent("P2", &["in2", "T2", "H2", "L2", "W2"], "in2");

    for i in 1..=2 {
        let a = b.action(&format!("a{i}"), &[format!("P{i}")]);
        let (init, t, h) = (format!("in{i}"), format!("T{i}"), format!("H{i}"));
        b.row(a, &[init.as_str()], &[(&[t.as_str()], half), (&[h.as_str()], half)]);
    }

    let toss = b.action("b", &["P1", "P2"]);
    b.row(toss, &["T1", "T2"], &[(&["in1", "in2"], Prob::ONE)]);
    b.row(toss, &["H1", "H2"], &[(&["in1", "in2"], Prob::ONE)]);
    b.row(toss, &["H1", "T2"], &[(&["W1", "L2"], Prob::ONE)]);
    b.row(toss, &["T1", "H2"], &[(&["L1", "W2"], Prob::ONE)]);

    for (name, agent, state) in [
        ("w1", "P1", "W1"),
        ("l1", "P1", "L1"),
        ("w2", "P2", "W2"),
        ("l2", "P2", "L2"),
    ] {
        let a = b.action(name, &[agent]);
        b.row(a, &[state], &[(&[state], Prob::ONE)]);
    }
    b.build().expect("coin game is well formed")
}

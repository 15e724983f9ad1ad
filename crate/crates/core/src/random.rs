//! Seeded generator of small valid models for randomized testing.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::json;

use crate::model::{DmcModel, ModelBuilder};
use crate::prob::Prob;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RandomModelConfig {
    pub max_agents: usize,
    pub max_states: usize,
    /// Largest number of outcomes in a distribution.
    pub max_support: usize,
    /// Chance, in percent, that another agent joins an action.
    pub sync_percent: u32,
}

impl Default for RandomModelConfig {
    fn default() -> Self {
        RandomModelConfig {
            max_agents: 4,
            max_states: 4,
            max_support: 3,
            sync_percent: 40,
        }
    }
}

/// Builds a model satisfying determinacy: the local states of every agent
/// are partitioned among the actions, and each action is enabled on the
/// full product of its share of states. Every enabled tuple gets a
/// distribution with small rational weights. Reachable deadlocks are
/// possible and intended.
pub fn random_model(seed: u64, cfg: &RandomModelConfig) -> DmcModel {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = rng.gen_range(1..=cfg.max_agents.max(1));
    let sizes: Vec<usize> = (0..n).map(|_| rng.gen_range(1..=cfg.max_states.max(1))).collect();
    let name = |i: usize, j: usize| format!("a{i}s{j}");

    let mut b = ModelBuilder::new();
    for (i, &k) in sizes.iter().enumerate() {
        let states: Vec<String> = (0..k).map(|j| name(i, j)).collect();
        let init = name(i, rng.gen_range(0..k));
        b.agent(&format!("A{i}"), &states, &init);
    }

    let mut pending: Vec<Vec<usize>> = sizes
        .iter()
        .map(|&k| {
            let mut v: Vec<usize> = (0..k).collect();
            v.shuffle(&mut rng);
            v
        })
        .collect();
    let mut action_count = 0;
    while let Some(first) = {
        let open: Vec<usize> = (0..n).filter(|&i| !pending[i].is_empty()).collect();
        open.choose(&mut rng).copied()
    } {
        let mut loc = vec![first];
        for (i, share) in pending.iter().enumerate() {
            if i != first && !share.is_empty() && rng.gen_range(0..100) < cfg.sync_percent {
                loc.push(i);
            }
        }
        loc.sort_unstable();
        let shares: Vec<Vec<usize>> = loc
            .iter()
            .map(|&i| {
                let len = pending[i].len();
                let take = rng.gen_range(1..=len.min(2));
                pending[i].split_off(len - take)
            })
            .collect();
        let agents: Vec<String> = loc.iter().map(|i| format!("A{i}")).collect();
        let a = b.action(&format!("t{action_count}"), &agents);
        action_count += 1;

        for from in product(&shares) {
            let space: usize = loc.iter().map(|&i| sizes[i]).product();
            let support = rng.gen_range(1..=cfg.max_support.max(1).min(space));
            let mut targets: Vec<usize> = (0..space).collect();
            targets.shuffle(&mut rng);
            targets.truncate(support);
            let weights: Vec<i64> = targets.iter().map(|_| rng.gen_range(1..=4)).collect();
            let total: i64 = weights.iter().sum();
            let outcomes = targets
                .iter()
                .zip(&weights)
                .map(|(&t, &w)| (decode(t, &loc, &sizes), Prob::new(w, total)))
                .collect();
            let from = from.iter().map(|&s| s as u32).collect();
            b.row_indexed(a, from, outcomes);
        }
    }

    for (i, &k) in sizes.iter().enumerate() {
        for ap in 0..2 {
            let ap = format!("p{i}_{ap}");
            for j in 0..k {
                if rng.gen_bool(0.5) {
                    b.label(&name(i, j), &[ap.as_str()]);
                }
            }
        }
    }
    b.metadata("family", json!("random"));
    b.metadata("seed", json!(seed));
    b.build().expect("generated models are well formed")
}

fn product(shares: &[Vec<usize>]) -> Vec<Vec<usize>> {
    let mut out = vec![Vec::new()];
    for share in shares {
        out = out
            .into_iter()
            .flat_map(|prefix| {
                share.iter().map(move |&s| {
                    let mut v = prefix.clone();
                    v.push(s);
                    v
                })
            })
            .collect();
    }
    out
}

fn decode(mut t: usize, loc: &[usize], sizes: &[usize]) -> Vec<u32> {
    let mut out = Vec::with_capacity(loc.len());
    for &i in loc {
        out.push((t % sizes[i]) as u32);
        t /= sizes[i];
    }
    out
}

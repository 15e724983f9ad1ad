use dmc_core::benchmarks::{dining_philosophers, itai_rodeh, DiningParams, ItaiRodehParams};
use dmc_core::semantics::{build_markov_chain, find_reachable_deadlocks, reachable_states};
use dmc_core::{DmcModel, GlobalState};

fn leaders(m: &DmcModel, s: &GlobalState, n: u32) -> usize {
    (1..=n)
        .filter(|p| {
            let (a, t) = m.atomic_prop(&format!("leader_{p}")).unwrap();
            t[s.get(a) as usize]
        })
        .count()
}

fn check_ring(params: ItaiRodehParams) {
    let m = itai_rodeh(params).unwrap();
    assert!(find_reachable_deadlocks(&m, 2_000_000).unwrap().is_empty());
    let chain = build_markov_chain::<f64>(&m, 2_000_000).unwrap();
    assert!(chain.max_row_deviation() < 1e-9);
    // every state can still reach a state with a leader
    let n = chain.states.len();
    let mut preds: Vec<Vec<u32>> = vec![Vec::new(); n];
    for (src, row) in chain.transitions.iter().enumerate() {
        for &(dst, _) in row {
            preds[dst as usize].push(src as u32);
        }
    }
    let mut good: Vec<bool> = chain.states.iter().map(|s| leaders(&m, s, params.n) == 1).collect();
    for s in &chain.states {
        assert!(leaders(&m, s, params.n) <= 1, "{}", m.render_global(s));
    }
    let mut stack: Vec<u32> = (0..n as u32).filter(|&i| good[i as usize]).collect();
    while let Some(v) = stack.pop() {
        for &u in &preds[v as usize] {
            if !good[u as usize] {
                good[u as usize] = true;
                stack.push(u);
            }
        }
    }
    assert!(good.iter().all(|&g| g), "some state cannot reach an elected leader");
}

fn check_interleaved_safety(params: ItaiRodehParams) {
    let m = itai_rodeh(params).unwrap();
    let states = reachable_states(&m, 5_000_000).unwrap();
    for s in &states {
        assert!(leaders(&m, s, params.n) <= 1, "{}", m.render_global(s));
    }
    assert!(states.iter().any(|s| leaders(&m, s, params.n) == 1));
}

#[test]
fn itai_rodeh_three_processes() {
    check_ring(ItaiRodehParams::new(3));
}

#[test]
fn itai_rodeh_four_processes() {
    check_ring(ItaiRodehParams {
        n: 4,
        id_range: 2,
        channel_capacity: 1,
    });
}

#[test]
fn itai_rodeh_longer_channels() {
    check_ring(ItaiRodehParams {
        n: 3,
        id_range: 2,
        channel_capacity: 2,
    });
}

#[test]
fn itai_rodeh_interleavings_never_elect_two_leaders() {
    check_interleaved_safety(ItaiRodehParams::new(3));
    check_interleaved_safety(ItaiRodehParams {
        n: 4,
        id_range: 2,
        channel_capacity: 1,
    });
}

#[test]
fn dining_three_philosophers_is_live() {
    let m = dining_philosophers(DiningParams::new(3)).unwrap();
    assert!(find_reachable_deadlocks(&m, 1_000_000).unwrap().is_empty());
}

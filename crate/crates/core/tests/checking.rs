//! Sampling and hypothesis testing against exact probabilities.

use dmc_core::benchmarks::{coin_game, dining_philosophers, DiningParams};
use dmc_core::logic::{parse_formula, parse_spec};
use dmc_core::random::{random_model, RandomModelConfig};
use dmc_core::semantics::{enabled_events, find_reachable_deadlocks, fire};
use dmc_core::smc::oracle::satisfaction_probability;
use dmc_core::smc::{check_spec, sprt_run, DeadMode, Sampler, SamplerConfig, SmcError, SprtConfig, Verdict};
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

#[test]
fn estimate_agrees_with_the_oracle() {
    let m = coin_game();
    let phi = parse_formula("F[7] W1", &m).unwrap();
    let exact: f64 = satisfaction_probability(&m, &phi, 1_000_000).unwrap();
    assert!((exact - 7.0 / 16.0).abs() < 1e-12);
    let cfg = SprtConfig {
        max_samples: Some(4000),
        delta: 1e-4,
        ..SprtConfig::default()
    };
    let out = sprt_run(&m, 0.5, &phi, &cfg, 11).unwrap();
    let estimate = out.positives as f64 / out.samples_used as f64;
    assert!((estimate - exact).abs() < 0.03, "estimate {estimate}");
}

#[test]
fn verdicts_do_not_depend_on_worker_count() {
    let m = dining_philosophers(DiningParams::new(4)).unwrap();
    let psi = parse_spec("P>=0.5 [ F[6] eaten_2 ] & P>=0.2 [ F[4] eaten_4 ]", &m).unwrap();
    let run = |workers| {
        let cfg = SprtConfig {
            seed: 42,
            workers,
            ..SprtConfig::default()
        };
        let node = check_spec(&m, &psi, &cfg).unwrap();
        let stats: Vec<(u64, u64)> = node.outcomes().iter().map(|o| (o.samples_used, o.positives)).collect();
        (node.verdict(), stats)
    };
    let one = run(1);
    assert_eq!(one, run(1));
    assert_eq!(one, run(3));
    assert_eq!(one, run(8));
}

#[test]
fn dead_agents_need_the_exact_mode() {
    let cfg = RandomModelConfig::default();
    let seed = (0..500)
        .find(|&s| {
            !find_reachable_deadlocks(&random_model(s, &cfg), 10_000)
                .unwrap()
                .is_empty()
        })
        .expect("some random model deadlocks");
    let m = random_model(seed, &cfg);
    let (ap, _) = m.atomic_props().next().unwrap();
    let phi = parse_formula(&format!("F[50] {ap}"), &m).unwrap();
    let k = phi.bound_vector(m.agent_count());
    let never = Sampler::new(&m, k.clone(), SamplerConfig::default());
    let exact = Sampler::new(
        &m,
        k,
        SamplerConfig {
            dead_mode: DeadMode::Exact,
            ..SamplerConfig::default()
        },
    );
    let mut saw_deadlock = false;
    for i in 0..200 {
        let mut rng = ChaCha8Rng::seed_from_u64(i);
        match never.sample(&mut rng) {
            Err(SmcError::Deadlock { .. }) => saw_deadlock = true,
            Err(e) => panic!("{e}"),
            Ok(_) => {}
        }
        let mut rng = ChaCha8Rng::seed_from_u64(i);
        exact.sample(&mut rng).unwrap();
    }
    assert!(saw_deadlock, "seed {seed} never reached its deadlock");
}

#[test]
fn longer_runs_keep_the_verdict() {
    let m = dining_philosophers(DiningParams::new(3)).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    for text in ["F[5] eaten_1", "G[3] !eaten_2 | F[2] eaten_3", "!eaten_1 U[6] eaten_1"] {
        let phi = parse_formula(text, &m).unwrap();
        let sampler = Sampler::new(
            &m,
            phi.bound_vector(m.agent_count()),
            SamplerConfig {
                record_events: true,
                ..SamplerConfig::default()
            },
        );
        for _ in 0..50 {
            let sample = sampler.sample(&mut rng).unwrap();
            let mut events = sample.events.unwrap();
            let verdict = phi.eval_trajectory(&m, &sample.start, &events);
            let mut s = sample.end;
            for _ in 0..20 {
                let e = *enabled_events(&m, &s).choose(&mut rng).unwrap();
                s = fire(&m, &s, e).unwrap().0;
                events.push(e);
                assert_eq!(phi.eval_trajectory(&m, &sample.start, &events), verdict, "{text}");
            }
        }
    }
}

#[test]
fn clear_cases_are_decided_correctly() {
    let m = coin_game();
    let phi = parse_formula("F[7] W1", &m).unwrap();
    let cfg = SprtConfig {
        delta: 0.02,
        alpha: 0.05,
        beta: 0.05,
        ..SprtConfig::default()
    };
    let wrong = |gamma: f64, right: Verdict| {
        (0..100u64)
            .filter(|&seed| sprt_run(&m, gamma, &phi, &cfg, seed).unwrap().verdict != right)
            .count()
    };
    assert!(wrong(0.3375, Verdict::Accept) <= 10);
    assert!(wrong(0.5375, Verdict::Reject) <= 10);
}

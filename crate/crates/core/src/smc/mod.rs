//! Statistical model checking with Wald's sequential probability ratio test.
//!
//! For a threshold leaf `P>=γ [ φ ]` the test decides between
//! `H0: p >= γ + δ` and `H1: p <= γ - δ` from i.i.d. sampled trajectories.
//! Scores are kept in the log domain. Sample `ℓ` of leaf `j` is drawn from
//! its own ChaCha8 stream derived from `(seed, j, ℓ)`, so the verdict does
//! not depend on how many workers generate samples.

pub mod oracle;
mod sampler;

use std::time::Instant;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::logic::{Bltl, Pbltl};
use crate::model::DmcModel;

pub use sampler::{
    dead_agents, DeadAgents, DeadMode, Sample, Sampler, SamplerConfig, DEFAULT_DEAD_BUDGET, DEFAULT_STEP_CAP,
};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SmcError {
    #[error("reached deadlock {state}: the model must be deadlock free for sampling")]
    Deadlock { state: String },
    #[error("sample exceeded the step cap of {cap} events")]
    StepCap { cap: u64 },
    #[error("invalid configuration: {0}")]
    Config(String),
}

pub const DEFAULT_ALPHA: f64 = 0.01;
pub const DEFAULT_BETA: f64 = 0.01;
pub const DEFAULT_DELTA: f64 = 0.01;

#[derive(Debug, Clone, Serialize)]
pub struct SprtConfig {
    pub delta: f64,
    pub alpha: f64,
    pub beta: f64,
    pub max_samples: Option<u64>,
    pub seed: u64,
    /// Sampling threads; 1 runs everything on the calling thread.
    pub workers: usize,
    pub dead_mode: DeadMode,
    pub dead_budget: usize,
    pub step_cap: u64,
    /// Keep the score after every sample in the outcome.
    pub record_scores: bool,
}

impl Default for SprtConfig {
    fn default() -> SprtConfig {
        SprtConfig {
            delta: DEFAULT_DELTA,
            alpha: DEFAULT_ALPHA,
            beta: DEFAULT_BETA,
            max_samples: None,
            seed: 0,
            workers: 1,
            dead_mode: DeadMode::Never,
            dead_budget: DEFAULT_DEAD_BUDGET,
            step_cap: DEFAULT_STEP_CAP,
            record_scores: false,
        }
    }
}

impl SprtConfig {
    pub fn check(&self, gamma: f64) -> Result<(), SmcError> {
        let open = |x: f64| x > 0.0 && x < 1.0;
        if !open(gamma) {
            return Err(SmcError::Config(format!("threshold {gamma} must lie in (0, 1)")));
        }
        if !(self.delta > 0.0 && gamma - self.delta > 0.0 && gamma + self.delta < 1.0) {
            return Err(SmcError::Config(format!(
                "indifference region [{} , {}] must lie strictly inside (0, 1) with delta > 0",
                gamma - self.delta,
                gamma + self.delta
            )));
        }
        if !open(self.alpha) || !open(self.beta) {
            return Err(SmcError::Config("alpha and beta must lie in (0, 1)".to_string()));
        }
        if self.workers == 0 {
            return Err(SmcError::Config("at least one worker is required".to_string()));
        }
        Ok(())
    }

    /// `ln((1 - β) / α)`.
    pub fn log_accept(&self) -> f64 {
        ((1.0 - self.beta) / self.alpha).ln()
    }

    /// `ln(β / (1 - α))`.
    pub fn log_reject(&self) -> f64 {
        (self.beta / (1.0 - self.alpha)).ln()
    }

    fn sampler_config(&self) -> SamplerConfig {
        SamplerConfig {
            dead_mode: self.dead_mode,
            dead_budget: self.dead_budget,
            step_cap: self.step_cap,
            record_events: false,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    Accept,
    Reject,
    Inconclusive,
}

impl Verdict {
    pub fn negate(self) -> Verdict {
        match self {
            Verdict::Accept => Verdict::Reject,
            Verdict::Reject => Verdict::Accept,
            Verdict::Inconclusive => Verdict::Inconclusive,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct SprtOutcome {
    pub verdict: Verdict,
    pub gamma: f64,
    pub samples_used: u64,
    pub positives: u64,
    /// Log-likelihood ratio after the last consumed sample.
    pub final_score: f64,
    pub log_accept: f64,
    pub log_reject: f64,
    /// Events fired over the consumed samples.
    pub events_fired: u64,
    /// Samples generated, including those discarded after the decision.
    pub samples_generated: u64,
    pub dead_fallbacks: u64,
    pub elapsed_secs: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub scores: Option<Vec<f64>>,
}

/// Splits the run seed into independent per-leaf seeds.
pub fn leaf_seed(seed: u64, leaf: u64) -> u64 {
    // SplitMix64 finalizer
    let mut z = seed ^ leaf.wrapping_add(1).wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// The random stream of sample `index` under `seed`.
pub fn sample_rng(seed: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

#[derive(Debug, Clone, Copy)]
struct SampleResult {
    positive: bool,
    steps: u64,
    dead_fallbacks: u32,
}

fn run_one(sampler: &Sampler<'_>, phi: &Bltl, seed: u64, index: u64) -> Result<SampleResult, SmcError> {
    let mut rng = sample_rng(seed, index);
    let s = sampler.sample(&mut rng)?;
    Ok(SampleResult {
        positive: phi.eval(&s.projections),
        steps: s.steps,
        dead_fallbacks: s.dead_fallbacks,
    })
}

/// Runs the test for one threshold leaf using stream seed `seed`.
pub fn sprt_run(
    model: &DmcModel,
    gamma: f64,
    phi: &Bltl,
    cfg: &SprtConfig,
    seed: u64,
) -> Result<SprtOutcome, SmcError> {
    cfg.check(gamma)?;
    let started = Instant::now();
    let sampler = Sampler::new(model, phi.bound_vector(model.agent_count()), cfg.sampler_config());
    let (g_plus, g_minus) = (gamma + cfg.delta, gamma - cfg.delta);
    let inc_pos = (g_plus / g_minus).ln();
    let inc_neg = ((1.0 - g_plus) / (1.0 - g_minus)).ln();
    let (log_a, log_b) = (cfg.log_accept(), cfg.log_reject());

    let pool = if cfg.workers > 1 {
        Some(
            rayon::ThreadPoolBuilder::new()
                .num_threads(cfg.workers)
                .build()
                .map_err(|e| SmcError::Config(e.to_string()))?,
        )
    } else {
        None
    };

    let mut out = SprtOutcome {
        verdict: Verdict::Inconclusive,
        gamma,
        samples_used: 0,
        positives: 0,
        final_score: 0.0,
        log_accept: log_a,
        log_reject: log_b,
        events_fired: 0,
        samples_generated: 0,
        dead_fallbacks: 0,
        elapsed_secs: 0.0,
        scores: cfg.record_scores.then(Vec::new),
    };
    let cap = cfg.max_samples.unwrap_or(u64::MAX);
    let mut score = 0.0f64;
    let mut next = 0u64;
    let mut batch = (cfg.workers as u64) * 4;
    'outer: while next < cap {
        let end = next.saturating_add(batch).min(cap);
        let results: Vec<Result<SampleResult, SmcError>> = match &pool {
            Some(pool) => pool.install(|| {
                (next..end)
                    .into_par_iter()
                    .map(|i| run_one(&sampler, phi, seed, i))
                    .collect()
            }),
            None => (next..end).map(|i| run_one(&sampler, phi, seed, i)).collect(),
        };
        out.samples_generated += end - next;
        for r in results {
            let r = r?;
            out.samples_used += 1;
            out.events_fired += r.steps;
            out.dead_fallbacks += u64::from(r.dead_fallbacks);
            if r.positive {
                out.positives += 1;
                score += inc_pos;
            } else {
                score += inc_neg;
            }
            if let Some(s) = out.scores.as_mut() {
                s.push(score);
            }
            if score >= log_a {
                out.verdict = Verdict::Accept;
                break 'outer;
            }
            if score <= log_b {
                out.verdict = Verdict::Reject;
                break 'outer;
            }
        }
        next = end;
        batch = (batch * 2).min(4096);
    }
    out.final_score = score;
    out.elapsed_secs = started.elapsed().as_secs_f64();
    Ok(out)
}

/// Per-node result of [`check_spec`].
#[derive(Debug, Clone, Serialize)]
#[serde(tag = "node", rename_all = "lowercase")]
pub enum CheckNode {
    Leaf {
        formula: String,
        gamma: f64,
        verdict: Verdict,
        /// `None` when skipped by short-circuit evaluation.
        sprt: Option<SprtOutcome>,
    },
    Not {
        verdict: Verdict,
        inner: Box<CheckNode>,
    },
    Or {
        verdict: Verdict,
        left: Box<CheckNode>,
        right: Box<CheckNode>,
    },
    And {
        verdict: Verdict,
        left: Box<CheckNode>,
        right: Box<CheckNode>,
    },
}

impl CheckNode {
    pub fn verdict(&self) -> Verdict {
        match self {
            CheckNode::Leaf { verdict, .. }
            | CheckNode::Not { verdict, .. }
            | CheckNode::Or { verdict, .. }
            | CheckNode::And { verdict, .. } => *verdict,
        }
    }

    /// SPRT outcomes of the leaves that were run, left to right.
    pub fn outcomes(&self) -> Vec<&SprtOutcome> {
        let mut out = Vec::new();
        self.collect(&mut out);
        out
    }

    fn collect<'a>(&'a self, out: &mut Vec<&'a SprtOutcome>) {
        match self {
            CheckNode::Leaf { sprt, .. } => out.extend(sprt.iter()),
            CheckNode::Not { inner, .. } => inner.collect(out),
            CheckNode::Or { left, right, .. } | CheckNode::And { left, right, .. } => {
                left.collect(out);
                right.collect(out);
            }
        }
    }
}

fn skipped(psi: &Pbltl) -> CheckNode {
    match psi {
        Pbltl::Threshold { gamma, formula } => CheckNode::Leaf {
            formula: formula.to_string(),
            gamma: *gamma,
            verdict: Verdict::Inconclusive,
            sprt: None,
        },
        Pbltl::Not(p) => CheckNode::Not {
            verdict: Verdict::Inconclusive,
            inner: Box::new(skipped(p)),
        },
        Pbltl::Or(a, b) => CheckNode::Or {
            verdict: Verdict::Inconclusive,
            left: Box::new(skipped(a)),
            right: Box::new(skipped(b)),
        },
        Pbltl::And(a, b) => CheckNode::And {
            verdict: Verdict::Inconclusive,
            left: Box::new(skipped(a)),
            right: Box::new(skipped(b)),
        },
    }
}

fn leaf_count(psi: &Pbltl) -> u64 {
    psi.leaves().len() as u64
}

/// Decides a PBLTL formula: negation swaps leaf verdicts, disjunction and
/// conjunction short-circuit, and inconclusive leaves propagate as unknown.
pub fn check_spec(model: &DmcModel, psi: &Pbltl, cfg: &SprtConfig) -> Result<CheckNode, SmcError> {
    for (gamma, _) in psi.leaves() {
        cfg.check(gamma)?;
    }
    check_node(model, psi, cfg, 0)
}

fn check_node(model: &DmcModel, psi: &Pbltl, cfg: &SprtConfig, first_leaf: u64) -> Result<CheckNode, SmcError> {
    Ok(match psi {
        Pbltl::Threshold { gamma, formula } => {
            let outcome = sprt_run(model, *gamma, formula, cfg, leaf_seed(cfg.seed, first_leaf))?;
            CheckNode::Leaf {
                formula: formula.to_string(),
                gamma: *gamma,
                verdict: outcome.verdict,
                sprt: Some(outcome),
            }
        }
        Pbltl::Not(p) => {
            let inner = check_node(model, p, cfg, first_leaf)?;
            CheckNode::Not {
                verdict: inner.verdict().negate(),
                inner: Box::new(inner),
            }
        }
        Pbltl::Or(a, b) | Pbltl::And(a, b) => {
            let is_or = matches!(psi, Pbltl::Or(..));
            let (decisive, other) = if is_or {
                (Verdict::Accept, Verdict::Reject)
            } else {
                (Verdict::Reject, Verdict::Accept)
            };
            let left = check_node(model, a, cfg, first_leaf)?;
            let right = if left.verdict() == decisive {
                skipped(b)
            } else {
                check_node(model, b, cfg, first_leaf + leaf_count(a))?
            };
            let verdict = if left.verdict() == decisive || right.verdict() == decisive {
                decisive
            } else if left.verdict() == other && right.verdict() == other {
                other
            } else {
                Verdict::Inconclusive
            };
            let (left, right) = (Box::new(left), Box::new(right));
            if is_or {
                CheckNode::Or { verdict, left, right }
            } else {
                CheckNode::And { verdict, left, right }
            }
        }
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::benchmarks::coin_game;
    use crate::logic::{parse_formula, parse_spec};

    #[test]
    fn thresholds() {
        let cfg = SprtConfig {
            alpha: 0.05,
            beta: 0.05,
            ..SprtConfig::default()
        };
        assert!((cfg.log_accept().exp() - 19.0).abs() < 1e-9);
        assert!((cfg.log_reject().exp() - 1.0 / 19.0).abs() < 1e-12);
    }

    #[test]
    fn config_validation() {
        let cfg = SprtConfig::default();
        assert!(cfg.check(0.5).is_ok());
        assert!(cfg.check(0.99).is_err());
        assert!(cfg.check(0.0).is_err());
        let zero_workers = SprtConfig {
            workers: 0,
            ..SprtConfig::default()
        };
        assert!(zero_workers.check(0.5).is_err());
    }

    #[test]
    fn coin_game_leaf_decides_both_ways() {
        let m = coin_game();
        let phi = parse_formula("F[7] W1", &m).unwrap();
        let cfg = SprtConfig {
            delta: 0.02,
            alpha: 0.05,
            beta: 0.05,
            seed: 11,
            ..SprtConfig::default()
        };
        // the exact probability is 7/16
        let low = sprt_run(&m, 0.3375, &phi, &cfg, 1).unwrap();
        assert_eq!(low.verdict, Verdict::Accept);
        let high = sprt_run(&m, 0.5375, &phi, &cfg, 1).unwrap();
        assert_eq!(high.verdict, Verdict::Reject);
    }

    #[test]
    fn cap_gives_inconclusive() {
        let m = coin_game();
        let phi = parse_formula("F[7] W1", &m).unwrap();
        let cfg = SprtConfig {
            max_samples: Some(10),
            ..SprtConfig::default()
        };
        let out = sprt_run(&m, 0.4375, &phi, &cfg, 0).unwrap();
        assert_eq!(out.verdict, Verdict::Inconclusive);
        assert_eq!(out.samples_used, 10);
    }

    #[test]
    fn worker_count_does_not_change_the_outcome() {
        let m = coin_game();
        let phi = parse_formula("F[7] W1 & F[5] L2", &m).unwrap();
        let run = |workers| {
            let cfg = SprtConfig {
                workers,
                seed: 5,
                record_scores: true,
                ..SprtConfig::default()
            };
            sprt_run(&m, 0.2, &phi, &cfg, 3).unwrap()
        };
        let a = run(1);
        let b = run(4);
        assert_eq!(a.verdict, b.verdict);
        assert_eq!(a.samples_used, b.samples_used);
        assert_eq!(a.positives, b.positives);
        assert_eq!(a.scores, b.scores);
    }

    #[test]
    fn boolean_structure() {
        let m = coin_game();
        let cfg = SprtConfig {
            seed: 1,
            ..SprtConfig::default()
        };
        let neg = parse_spec("!P>=0.9 [ F[7] W1 ]", &m).unwrap();
        let node = check_spec(&m, &neg, &cfg).unwrap();
        assert_eq!(node.verdict(), Verdict::Accept);

        let or = parse_spec("P>=0.1 [ F[7] W1 ] | P>=0.9 [ F[7] L1 ]", &m).unwrap();
        let node = check_spec(&m, &or, &cfg).unwrap();
        assert_eq!(node.verdict(), Verdict::Accept);
        assert_eq!(node.outcomes().len(), 1);

        let and = parse_spec("P>=0.1 [ F[7] W1 ] & P>=0.9 [ F[7] L1 ]", &m).unwrap();
        let node = check_spec(&m, &and, &cfg).unwrap();
        assert_eq!(node.verdict(), Verdict::Reject);
        assert_eq!(node.outcomes().len(), 2);
    }

    #[test]
    fn leaf_seeds_differ() {
        assert_ne!(leaf_seed(1, 0), leaf_seed(1, 1));
        assert_ne!(leaf_seed(1, 0), leaf_seed(2, 0));
    }
}

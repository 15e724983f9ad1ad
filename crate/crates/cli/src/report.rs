//! Machine-readable run reports.
//!
//! Every command produces one [`Report`]. Field names are stable within a
//! `format_version`; timing values live in `timing` and in the per-test
//! `elapsed_secs` field, and are the only parts that vary between runs with
//! the same configuration.

use std::path::PathBuf;

use serde::{Deserialize, Serialize};

pub const FORMAT_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub format_version: u32,
    pub tool: String,
    pub command: String,
    pub config: Config,
    pub result: Payload,
    pub timing: Timing,
    pub warnings: Vec<String>,
    pub exit_code: i32,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Config {
    Validate {
        model: PathBuf,
        allow_idle: bool,
        exact_rational: bool,
    },
    Check {
        model: PathBuf,
        spec: SpecSource,
        alpha: f64,
        beta: f64,
        delta: f64,
        seed: u64,
        seed_generated: bool,
        max_samples: Option<u64>,
        workers: usize,
        dead_mode: String,
        dead_budget: usize,
        step_cap: u64,
        record_scores: bool,
    },
    Chain {
        model: PathBuf,
        max_states: usize,
        exact_rational: bool,
        interleaved: bool,
        export: Option<PathBuf>,
        export_format: String,
    },
    Gen {
        family: String,
        n: u32,
        id_range: Option<u32>,
        capacity: u32,
        quota: Option<u32>,
        seed: Option<u64>,
        output: Option<PathBuf>,
        spec_output: Option<PathBuf>,
        gamma: Option<f64>,
        rounds: u32,
        bound: u32,
        fraction: f64,
    },
    Oracle {
        model: PathBuf,
        depth: usize,
        exact_rational: bool,
        max_states: usize,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SpecSource {
    File(PathBuf),
    Inline(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum VerdictName {
    Accept,
    Reject,
    Inconclusive,
}

impl From<dmc_core::smc::Verdict> for VerdictName {
    fn from(v: dmc_core::smc::Verdict) -> VerdictName {
        use dmc_core::smc::Verdict;
        match v {
            Verdict::Accept => VerdictName::Accept,
            Verdict::Reject => VerdictName::Reject,
            Verdict::Inconclusive => VerdictName::Inconclusive,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Issue {
    pub kind: String,
    pub message: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelSummary {
    pub agents: usize,
    pub actions: usize,
    pub local_states: usize,
    pub rows: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Payload {
    Validate {
        valid: bool,
        model: ModelSummary,
        violations: Vec<Issue>,
        warnings: Vec<Issue>,
    },
    Check {
        verdict: VerdictName,
        tree: CheckTree,
        samples_used: u64,
        positives: u64,
        samples_generated: u64,
        events_fired: u64,
    },
    Chain {
        states: usize,
        edges: usize,
        deadlock_states: usize,
        deadlocks: Vec<String>,
        max_row_deviation: f64,
        row_stochastic: bool,
        interleaved: Option<InterleavedSummary>,
    },
    Gen {
        family: String,
        model: ModelSummary,
        metadata: serde_json::Value,
        spec: Option<String>,
    },
    Oracle {
        mode: String,
        depth: usize,
        trajectories: usize,
        distinct_traces: usize,
        failures: usize,
        max_discrepancy: f64,
        passed: bool,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "node", rename_all = "lowercase")]
pub enum CheckTree {
    Leaf {
        formula: String,
        gamma: f64,
        verdict: VerdictName,
        /// Absent when the leaf was skipped by short-circuiting.
        sprt: Option<LeafStats>,
    },
    Not {
        verdict: VerdictName,
        inner: Box<CheckTree>,
    },
    Or {
        verdict: VerdictName,
        left: Box<CheckTree>,
        right: Box<CheckTree>,
    },
    And {
        verdict: VerdictName,
        left: Box<CheckTree>,
        right: Box<CheckTree>,
    },
}

impl CheckTree {
    pub fn leaves(&self) -> Vec<&LeafStats> {
        match self {
            CheckTree::Leaf { sprt, .. } => sprt.iter().collect(),
            CheckTree::Not { inner, .. } => inner.leaves(),
            CheckTree::Or { left, right, .. } | CheckTree::And { left, right, .. } => {
                let mut v = left.leaves();
                v.extend(right.leaves());
                v
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LeafStats {
    pub seed: u64,
    pub samples_used: u64,
    pub positives: u64,
    pub final_score: f64,
    pub log_accept: f64,
    pub log_reject: f64,
    pub samples_generated: u64,
    pub events_fired: u64,
    pub dead_fallbacks: u64,
    pub elapsed_secs: f64,
    pub scores: Option<Vec<f64>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InterleavedSummary {
    pub states: usize,
    pub deadlocks: Vec<DeadlockWitness>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DeadlockWitness {
    pub state: String,
    pub events: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Timing {
    pub elapsed_secs: f64,
    /// Sampling throughput, for `check` only.
    pub events_per_sec: Option<f64>,
}

impl Report {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("reports serialize")
    }
}

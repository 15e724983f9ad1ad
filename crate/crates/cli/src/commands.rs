use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use dmc_core::benchmarks::{self, DiningParams, ItaiRodehParams};
use dmc_core::logic::parse_spec;
use dmc_core::measure::oracle_check_all;
use dmc_core::model::json::{from_json_value, to_json_string, to_json_string_pretty};
use dmc_core::model::{validate_with, ValidationOptions};
use dmc_core::prob::Weight;
use dmc_core::random::{random_model, RandomModelConfig};
use dmc_core::semantics::{build_markov_chain, count_reachable_states, find_reachable_deadlocks, MarkovChain};
use dmc_core::smc::{check_spec, leaf_seed, CheckNode, DeadMode, SprtConfig};
use dmc_core::{DmcModel, ModelError};
use log::{debug, info};
use num_rational::BigRational;

use crate::args::{ChainArgs, CheckArgs, ExportFormat, FamilyArg, GenArgs, ModelArg, OracleArgs, ValidateArgs};
use crate::error::CliError;
use crate::report::{
    CheckTree, Config, DeadlockWitness, InterleavedSummary, Issue, LeafStats, ModelSummary, Payload, Report,
    SpecSource, Timing, VerdictName, FORMAT_VERSION,
};

pub const EXIT_OK: i32 = 0;
pub const EXIT_REJECT: i32 = 1;
pub const EXIT_INCONCLUSIVE: i32 = 2;
pub const EXIT_INVALID: i32 = 3;
pub const EXIT_IO: i32 = 4;
pub const EXIT_RUNTIME: i32 = 5;

fn report(command: &str, config: Config, result: Payload, started: Instant, exit_code: i32) -> Report {
    Report {
        format_version: FORMAT_VERSION,
        tool: format!("dmc {}", env!("CARGO_PKG_VERSION")),
        command: command.to_string(),
        config,
        result,
        timing: Timing {
            elapsed_secs: started.elapsed().as_secs_f64(),
            events_per_sec: None,
        },
        warnings: Vec::new(),
        exit_code,
    }
}

fn model_path(arg: &ModelArg) -> Result<PathBuf, CliError> {
    arg.path()
        .cloned()
        .ok_or_else(|| CliError::Usage("a model file is required".into()))
}

fn read(path: &Path) -> Result<String, CliError> {
    fs::read_to_string(path).map_err(|source| CliError::Io {
        path: path.to_path_buf(),
        source,
    })
}

fn write(path: &Path, text: &str) -> Result<(), CliError> {
    fs::write(path, text).map_err(|source| CliError::Io {
        path: path.to_path_buf(),
        source,
    })
}

/// Loads a model file. Syntax and shape errors are parse errors; semantic
/// errors such as unknown state names are validation failures.
pub fn load_model(path: &Path) -> Result<DmcModel, CliError> {
    let text = read(path)?;
    let value: serde_json::Value =
        serde_json::from_str(&text).map_err(|e| CliError::Parse(format!("{}: {e}", path.display())))?;
    from_json_value(value).map_err(|e| match e {
        ModelError::Malformed(msg) => CliError::Parse(format!("{}: {msg}", path.display())),
        other => CliError::Invalid {
            message: format!("{}: {other}", path.display()),
            issues: Vec::new(),
        },
    })
}

fn summary(m: &DmcModel) -> ModelSummary {
    ModelSummary {
        agents: m.agent_count(),
        actions: m.actions().len(),
        local_states: m.agents().iter().map(|a| a.states.len()).sum(),
        rows: m.actions().iter().map(|a| a.rows.len()).sum(),
    }
}

fn issues<T: std::fmt::Display + serde::Serialize>(list: &[T]) -> Vec<Issue> {
    list.iter()
        .map(|v| Issue {
            kind: serde_json::to_value(v)
                .ok()
                .and_then(|j| j.get("kind").and_then(|k| k.as_str()).map(str::to_string))
                .unwrap_or_default(),
            message: v.to_string(),
        })
        .collect()
}

/// Rejects models with violations before any analysis runs.
fn require_valid(m: &DmcModel) -> Result<Vec<String>, CliError> {
    let r = validate_with(m, ValidationOptions::default());
    if !r.is_valid() {
        return Err(CliError::Invalid {
            message: format!("model has {} violation(s)", r.violations.len()),
            issues: issues(&r.violations),
        });
    }
    Ok(r.warnings.iter().map(|w| w.to_string()).collect())
}

pub fn validate(args: &ValidateArgs) -> Result<Report, CliError> {
    let started = Instant::now();
    let path = model_path(&args.model)?;
    let model = load_model(&path)?;
    let opts = ValidationOptions {
        idle_states_as_warnings: args.allow_idle,
        exact: args.exact_rational,
    };
    let r = validate_with(&model, opts);
    let valid = r.is_valid();
    let config = Config::Validate {
        model: path,
        allow_idle: args.allow_idle,
        exact_rational: args.exact_rational,
    };
    let payload = Payload::Validate {
        valid,
        model: summary(&model),
        violations: issues(&r.violations),
        warnings: issues(&r.warnings),
    };
    let mut out = report(
        "validate",
        config,
        payload,
        started,
        if valid { EXIT_OK } else { EXIT_INVALID },
    );
    out.warnings = r.warnings.iter().map(|w| w.to_string()).collect();
    Ok(out)
}

fn convert(node: &CheckNode, seed: u64, next_leaf: &mut u64) -> CheckTree {
    match node {
        CheckNode::Leaf {
            formula,
            gamma,
            verdict,
            sprt,
        } => {
            let leaf = *next_leaf;
            *next_leaf += 1;
            CheckTree::Leaf {
                formula: formula.clone(),
                gamma: *gamma,
                verdict: (*verdict).into(),
                sprt: sprt.as_ref().map(|o| LeafStats {
                    seed: leaf_seed(seed, leaf),
                    samples_used: o.samples_used,
                    positives: o.positives,
                    final_score: o.final_score,
                    log_accept: o.log_accept,
                    log_reject: o.log_reject,
                    samples_generated: o.samples_generated,
                    events_fired: o.events_fired,
                    dead_fallbacks: o.dead_fallbacks,
                    elapsed_secs: o.elapsed_secs,
                    scores: o.scores.clone(),
                }),
            }
        }
        CheckNode::Not { verdict, inner } => CheckTree::Not {
            verdict: (*verdict).into(),
            inner: Box::new(convert(inner, seed, next_leaf)),
        },
        CheckNode::Or { verdict, left, right } => CheckTree::Or {
            verdict: (*verdict).into(),
            left: Box::new(convert(left, seed, next_leaf)),
            right: Box::new(convert(right, seed, next_leaf)),
        },
        CheckNode::And { verdict, left, right } => CheckTree::And {
            verdict: (*verdict).into(),
            left: Box::new(convert(left, seed, next_leaf)),
            right: Box::new(convert(right, seed, next_leaf)),
        },
    }
}

pub fn check(args: &CheckArgs) -> Result<Report, CliError> {
    let started = Instant::now();
    let path = model_path(&args.model)?;
    let model = load_model(&path)?;
    let warnings = require_valid(&model)?;
    let (source, text) = match (&args.spec, &args.spec_inline) {
        (Some(p), _) => (SpecSource::File(p.clone()), read(p)?),
        (None, Some(t)) => (SpecSource::Inline(t.clone()), t.clone()),
        (None, None) => return Err(CliError::Usage("a specification is required".into())),
    };
    let psi = parse_spec(&text, &model).map_err(|e| CliError::Parse(format!("specification: {e}")))?;
    let (seed, seed_generated) = match args.seed {
        Some(s) => (s, false),
        None => (rand::random::<u64>(), true),
    };
    let dead_mode: DeadMode = args.dead_mode.into();
    let cfg = SprtConfig {
        delta: args.delta,
        alpha: args.alpha,
        beta: args.beta,
        max_samples: args.max_samples,
        seed,
        workers: args.workers.max(1),
        dead_mode,
        dead_budget: args.dead_budget,
        step_cap: args.step_cap,
        record_scores: args.record_scores,
    };
    info!("checking {} leaf test(s) with seed {seed}", psi.leaves().len());
    let sampling = Instant::now();
    let tree = check_spec(&model, &psi, &cfg).map_err(|e| match e {
        dmc_core::smc::SmcError::Config(msg) => CliError::Usage(msg),
        other => CliError::Runtime(other.to_string()),
    })?;
    let sampling_secs = sampling.elapsed().as_secs_f64();
    let verdict: VerdictName = tree.verdict().into();
    let outcomes = tree.outcomes();
    let events: u64 = outcomes.iter().map(|o| o.events_fired).sum();
    let payload = Payload::Check {
        verdict,
        tree: convert(&tree, seed, &mut 0),
        samples_used: outcomes.iter().map(|o| o.samples_used).sum(),
        positives: outcomes.iter().map(|o| o.positives).sum(),
        samples_generated: outcomes.iter().map(|o| o.samples_generated).sum(),
        events_fired: events,
    };
    let config = Config::Check {
        model: path,
        spec: source,
        alpha: cfg.alpha,
        beta: cfg.beta,
        delta: cfg.delta,
        seed,
        seed_generated,
        max_samples: cfg.max_samples,
        workers: cfg.workers,
        dead_mode: match dead_mode {
            DeadMode::Never => "never".into(),
            DeadMode::Exact => "exact".into(),
        },
        dead_budget: cfg.dead_budget,
        step_cap: cfg.step_cap,
        record_scores: cfg.record_scores,
    };
    let code = match verdict {
        VerdictName::Accept => EXIT_OK,
        VerdictName::Reject => EXIT_REJECT,
        VerdictName::Inconclusive => EXIT_INCONCLUSIVE,
    };
    let mut out = report("check", config, payload, started, code);
    out.timing.events_per_sec = (sampling_secs > 0.0).then(|| events as f64 / sampling_secs);
    out.warnings = warnings;
    Ok(out)
}

fn export_chain<W: Weight>(chain: &MarkovChain<W>, model: &DmcModel, format: ExportFormat) -> String {
    match format {
        ExportFormat::Text => chain.export_text(model),
        ExportFormat::Json => serde_json::to_string_pretty(&chain.export_json(model)).expect("chain serializes"),
        ExportFormat::Csv => {
            let mut out = String::from("src,dst,prob\n");
            for (i, row) in chain.transitions.iter().enumerate() {
                for (j, w) in row {
                    out.push_str(&format!(
                        "\"{}\",\"{}\",{}\n",
                        model.render_global(&chain.states[i]),
                        model.render_global(&chain.states[*j as usize]),
                        w.render()
                    ));
                }
            }
            out
        }
    }
}

fn chain_payload<W: Weight>(model: &DmcModel, args: &ChainArgs) -> Result<(Payload, Option<String>), CliError> {
    let chain: MarkovChain<W> =
        build_markov_chain(model, args.max_states).map_err(|e| CliError::Runtime(e.to_string()))?;
    let deadlocks: Vec<String> = chain
        .deadlock
        .iter()
        .enumerate()
        .filter(|(_, d)| **d)
        .map(|(i, _)| model.render_global(&chain.states[i]))
        .collect();
    let dev = chain.max_row_deviation();
    let export = args
        .export
        .as_ref()
        .map(|_| export_chain(&chain, model, args.export_format));
    let payload = Payload::Chain {
        states: chain.state_count(),
        edges: chain.edge_count(),
        deadlock_states: deadlocks.len(),
        deadlocks: deadlocks.into_iter().take(20).collect(),
        max_row_deviation: dev,
        row_stochastic: dev <= 1e-9,
        interleaved: None,
    };
    Ok((payload, export))
}

pub fn chain(args: &ChainArgs) -> Result<Report, CliError> {
    let started = Instant::now();
    let path = model_path(&args.model)?;
    let model = load_model(&path)?;
    let warnings = require_valid(&model)?;
    let (mut payload, export) = if args.exact_rational {
        chain_payload::<BigRational>(&model, args)?
    } else {
        chain_payload::<f64>(&model, args)?
    };
    if let (Some(p), Some(text)) = (&args.export, &export) {
        write(p, text)?;
    }
    if args.interleaved {
        let found = find_reachable_deadlocks(&model, args.max_states).map_err(|e| CliError::Runtime(e.to_string()))?;
        let states = count_reachable_states(&model, args.max_states).map_err(|e| CliError::Runtime(e.to_string()))?;
        if let Payload::Chain { interleaved, .. } = &mut payload {
            *interleaved = Some(InterleavedSummary {
                states,
                deadlocks: found
                    .iter()
                    .take(20)
                    .map(|d| DeadlockWitness {
                        state: model.render_global(&d.state),
                        events: d.witness.iter().map(|e| e.render(&model)).collect(),
                    })
                    .collect(),
            });
        }
    }
    let config = Config::Chain {
        model: path,
        max_states: args.max_states,
        exact_rational: args.exact_rational,
        interleaved: args.interleaved,
        export: args.export.clone(),
        export_format: format!("{:?}", args.export_format).to_lowercase(),
    };
    let mut out = report("chain", config, payload, started, EXIT_OK);
    out.warnings = warnings;
    Ok(out)
}

/// Builds the requested model and, if asked, the family's standard spec.
pub fn gen(args: &GenArgs) -> Result<(Report, String), CliError> {
    let started = Instant::now();
    let invalid = |e: ModelError| CliError::Usage(e.to_string());
    let (model, family, spec) = match args.family {
        FamilyArg::Coin => {
            let gamma = args.gamma.unwrap_or(0.99);
            let spec = format!("P>={gamma} [ (F[7] L1 & F[7] W2) | (F[7] W1 & F[7] L2) ]\n");
            (benchmarks::coin_game(), "coin-game", spec)
        }
        FamilyArg::ItaiRodeh => {
            let p = ItaiRodehParams {
                n: args.n,
                id_range: args.id_range.unwrap_or(args.n),
                channel_capacity: args.capacity,
            };
            let m = benchmarks::itai_rodeh(p).map_err(invalid)?;
            (
                m,
                "itai-rodeh",
                benchmarks::leader_spec(&p, args.rounds, args.gamma.unwrap_or(0.99)),
            )
        }
        FamilyArg::Dining => {
            let p = DiningParams {
                n: args.n,
                quota: args.quota,
            };
            let m = benchmarks::dining_philosophers(p).map_err(invalid)?;
            let gamma = args.gamma.unwrap_or(0.95);
            let spec = match args.quota {
                Some(_) => benchmarks::quota_spec(args.bound, gamma),
                None => benchmarks::fraction_spec(args.n, args.fraction, args.bound, gamma),
            };
            (m, "dining-philosophers", spec)
        }
        FamilyArg::Random => {
            let seed = args.seed.unwrap_or(0);
            let m = random_model(seed, &RandomModelConfig::default());
            let first = m.atomic_props().next().map(|(ap, _)| ap.to_string());
            let gamma = args.gamma.unwrap_or(0.5);
            let spec = match first {
                Some(ap) => format!("P>={gamma} [ F[3] {ap} ]\n"),
                None => format!("P>={gamma} [ true ]\n"),
            };
            (m, "random", spec)
        }
    };
    debug!("generated {family} with {} agents", model.agent_count());
    let text = if args.pretty {
        to_json_string_pretty(&model)
    } else {
        to_json_string(&model)
    };
    if let Some(p) = &args.output {
        write(p, &text)?;
    }
    let spec_written = match &args.spec_output {
        Some(p) => {
            write(p, &spec)?;
            Some(spec)
        }
        None => None,
    };
    let config = Config::Gen {
        family: family.to_string(),
        n: args.n,
        id_range: args.id_range,
        capacity: args.capacity,
        quota: args.quota,
        seed: args.seed,
        output: args.output.clone(),
        spec_output: args.spec_output.clone(),
        gamma: args.gamma,
        rounds: args.rounds,
        bound: args.bound,
        fraction: args.fraction,
    };
    let payload = Payload::Gen {
        family: family.to_string(),
        model: summary(&model),
        metadata: serde_json::to_value(model.metadata()).expect("metadata serializes"),
        spec: spec_written,
    };
    Ok((report("gen", config, payload, started, EXIT_OK), text))
}

fn oracle_payload<W: Weight>(model: &DmcModel, args: &OracleArgs, mode: &str) -> Result<Payload, CliError> {
    let chain: MarkovChain<W> =
        build_markov_chain(model, args.max_states).map_err(|e| CliError::Runtime(e.to_string()))?;
    let s = oracle_check_all(model, &chain, args.depth).map_err(|e| CliError::Runtime(e.to_string()))?;
    Ok(Payload::Oracle {
        mode: mode.to_string(),
        depth: args.depth,
        trajectories: s.trajectories,
        distinct_traces: s.distinct_traces,
        failures: s.failures,
        max_discrepancy: s.max_discrepancy,
        passed: s.failures == 0,
    })
}

pub fn oracle(args: &OracleArgs) -> Result<Report, CliError> {
    let started = Instant::now();
    let path = model_path(&args.model)?;
    let model = load_model(&path)?;
    let warnings = require_valid(&model)?;
    let payload = if args.exact_rational {
        oracle_payload::<BigRational>(&model, args, "rational")?
    } else {
        oracle_payload::<f64>(&model, args, "float")?
    };
    let passed = matches!(payload, Payload::Oracle { passed: true, .. });
    let config = Config::Oracle {
        model: path,
        depth: args.depth,
        exact_rational: args.exact_rational,
        max_states: args.max_states,
    };
    let mut out = report(
        "oracle",
        config,
        payload,
        started,
        if passed { EXIT_OK } else { EXIT_REJECT },
    );
    out.warnings = warnings;
    Ok(out)
}

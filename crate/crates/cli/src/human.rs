//! Plain-text rendering of reports.

use std::fmt::Write;

use crate::report::{CheckTree, Config, Payload, Report};

fn clip(s: &str, max: usize) -> String {
    let flat = s.split_whitespace().collect::<Vec<_>>().join(" ");
    match flat.char_indices().nth(max) {
        Some((cut, _)) => format!("{} ... ({} chars)", &flat[..cut], flat.len()),
        None => flat,
    }
}

fn tree(out: &mut String, t: &CheckTree, indent: usize) {
    let pad = "  ".repeat(indent);
    match t {
        CheckTree::Leaf {
            formula,
            gamma,
            verdict,
            sprt,
        } => {
            let _ = write!(out, "{pad}P>={gamma} [ {} ]: {verdict:?}", clip(formula, 120));
            match sprt {
                Some(s) => {
                    let _ = writeln!(
                        out,
                        " ({} samples, {} positive, score {:.3} in [{:.3}, {:.3}])",
                        s.samples_used, s.positives, s.final_score, s.log_reject, s.log_accept
                    );
                }
                None => out.push_str(" (skipped)\n"),
            }
        }
        CheckTree::Not { verdict, inner } => {
            let _ = writeln!(out, "{pad}not: {verdict:?}");
            tree(out, inner, indent + 1);
        }
        CheckTree::Or { verdict, left, right } | CheckTree::And { verdict, left, right } => {
            let op = if matches!(t, CheckTree::Or { .. }) { "or" } else { "and" };
            let _ = writeln!(out, "{pad}{op}: {verdict:?}");
            tree(out, left, indent + 1);
            tree(out, right, indent + 1);
        }
    }
}

pub fn render(r: &Report) -> String {
    let mut out = String::new();
    match &r.result {
        Payload::Validate {
            valid,
            model,
            violations,
            warnings,
        } => {
            let _ = writeln!(
                out,
                "{}: {} agents, {} actions, {} local states, {} rows",
                if *valid { "ok" } else { "invalid" },
                model.agents,
                model.actions,
                model.local_states,
                model.rows
            );
            for v in violations {
                let _ = writeln!(out, "violation: {}", v.message);
            }
            for w in warnings {
                let _ = writeln!(out, "warning: {}", w.message);
            }
        }
        Payload::Check {
            verdict,
            tree: t,
            samples_used,
            ..
        } => {
            let seed = match &r.config {
                Config::Check { seed, .. } => *seed,
                _ => 0,
            };
            let _ = writeln!(out, "verdict: {verdict:?} ({samples_used} samples, seed {seed})");
            tree(&mut out, t, 1);
            if let Some(eps) = r.timing.events_per_sec {
                let _ = writeln!(out, "throughput: {eps:.0} events/s");
            }
        }
        Payload::Chain {
            states,
            edges,
            deadlock_states,
            deadlocks,
            max_row_deviation,
            row_stochastic,
            interleaved,
        } => {
            let _ = writeln!(
                out,
                "chain: {states} states, {edges} edges, {deadlock_states} deadlock state(s)"
            );
            let _ = writeln!(
                out,
                "row-stochastic: {} (max deviation {max_row_deviation:e})",
                if *row_stochastic { "yes" } else { "no" }
            );
            for d in deadlocks {
                let _ = writeln!(out, "deadlock: {d}");
            }
            if let Some(i) = interleaved {
                let _ = writeln!(
                    out,
                    "interleaved: {} states, {} reachable deadlock(s)",
                    i.states,
                    i.deadlocks.len()
                );
                for d in &i.deadlocks {
                    let _ = writeln!(out, "  {} after {}", d.state, d.events.join(" "));
                }
            }
        }
        Payload::Gen {
            family, model, spec, ..
        } => {
            let _ = writeln!(
                out,
                "{family}: {} agents, {} actions, {} local states, {} rows",
                model.agents, model.actions, model.local_states, model.rows
            );
            if let Some(s) = spec {
                let _ = writeln!(out, "spec: {}", clip(s, 120));
            }
        }
        Payload::Oracle {
            mode,
            depth,
            trajectories,
            distinct_traces,
            failures,
            max_discrepancy,
            passed,
        } => {
            let _ = writeln!(
                out,
                "{}: {trajectories} trajectories up to depth {depth}, {distinct_traces} traces, {failures} failure(s), max discrepancy {max_discrepancy:e} ({mode})",
                if *passed { "pass" } else { "FAIL" }
            );
        }
    }
    out
}

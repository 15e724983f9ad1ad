use std::fmt;

use num_rational::BigRational;
use num_traits::{One, Zero};
use serde::Serialize;

use super::{AgentId, DmcModel, LocalState};

/// Distribution sums in float mode must be within this distance of 1.
pub const SUM_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct ValidationOptions {
    /// Report local states with an empty `act(s)` as warnings instead of
    /// violations.
    pub idle_states_as_warnings: bool,
    /// Check distribution sums exactly instead of within [`SUM_TOLERANCE`].
    pub exact: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Violation {
    /// `|act(s)| > 1`.
    Nondeterminism {
        agent: String,
        state: String,
        actions: Vec<String>,
    },
    /// `act(s)` is empty.
    IdleState {
        agent: String,
        state: String,
    },
    DistributionSum {
        action: String,
        from: String,
        sum: String,
    },
    ProbabilityRange {
        action: String,
        from: String,
        target: String,
        prob: String,
    },
    EnabledWithoutDistribution {
        action: String,
        state: String,
    },
    DistributionNotEnabled {
        action: String,
        state: String,
    },
    DuplicateRow {
        action: String,
        state: String,
    },
    DuplicateTarget {
        action: String,
        from: String,
        target: String,
    },
    SharedProposition {
        ap: String,
        agents: Vec<String>,
    },
    EmptyEnablingSet {
        action: String,
    },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::Nondeterminism { agent, state, actions } => write!(
                f,
                "determinacy violated at agent `{agent}`, state `{state}`: compatible actions {actions:?}"
            ),
            Violation::IdleState { agent, state } => {
                write!(f, "agent `{agent}`, state `{state}` enables no action")
            }
            Violation::DistributionSum { action, from, sum } => {
                write!(f, "distribution of action `{action}` at {from} sums to {sum}")
            }
            Violation::ProbabilityRange {
                action,
                from,
                target,
                prob,
            } => write!(
                f,
                "probability {prob} of `{action}` from {from} to {target} is outside [0, 1]"
            ),
            Violation::EnabledWithoutDistribution { action, state } => {
                write!(
                    f,
                    "action `{action}` is enabled at {state} but has no distribution there"
                )
            }
            Violation::DistributionNotEnabled { action, state } => {
                write!(
                    f,
                    "action `{action}` has a distribution at {state} but is not enabled there"
                )
            }
            Violation::DuplicateRow { action, state } => {
                write!(f, "action `{action}` has two distributions at {state}")
            }
            Violation::DuplicateTarget { action, from, target } => {
                write!(f, "action `{action}` lists target {target} twice from {from}")
            }
            Violation::SharedProposition { ap, agents } => {
                write!(f, "atomic proposition `{ap}` belongs to several agents {agents:?}")
            }
            Violation::EmptyEnablingSet { action } => {
                write!(f, "action `{action}` is never enabled")
            }
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
    pub warnings: Vec<Violation>,
}

impl ValidationReport {
    pub fn is_valid(&self) -> bool {
        self.violations.is_empty()
    }
}

pub fn validate(model: &DmcModel) -> ValidationReport {
    validate_with(model, ValidationOptions::default())
}

pub fn validate_with(model: &DmcModel, opts: ValidationOptions) -> ValidationReport {
    let mut report = ValidationReport::default();

    for agent in model.agent_ids() {
        let info = model.agent(agent);
        for (j, state) in info.states.iter().enumerate() {
            let ls = LocalState { agent, index: j as u32 };
            let acts = model.act(agent, ls).expect("own state");
            match acts.len() {
                1 => {}
                0 => {
                    let v = Violation::IdleState {
                        agent: info.name.clone(),
                        state: state.clone(),
                    };
                    if opts.idle_states_as_warnings {
                        report.warnings.push(v);
                    } else {
                        report.violations.push(v);
                    }
                }
                _ => report.violations.push(Violation::Nondeterminism {
                    agent: info.name.clone(),
                    state: state.clone(),
                    actions: acts.iter().map(|a| model.action(*a).name.clone()).collect(),
                }),
            }
        }
    }

    for action in model.actions() {
        let render = |t: &[u32]| model.render_tuple(&action.loc, t);
        if action.enabled.is_empty() {
            report.warnings.push(Violation::EmptyEnablingSet {
                action: action.name.clone(),
            });
        }
        for v in &action.enabled {
            if action.row_of(v).is_none() {
                report.violations.push(Violation::EnabledWithoutDistribution {
                    action: action.name.clone(),
                    state: render(v),
                });
            }
        }
        for (i, row) in action.rows.iter().enumerate() {
            let from = render(&row.from);
            if action.row_of(&row.from) != Some(i as u32) {
                report.violations.push(Violation::DuplicateRow {
                    action: action.name.clone(),
                    state: from.clone(),
                });
            }
            if !action.is_declared_enabled(&row.from) {
                report.violations.push(Violation::DistributionNotEnabled {
                    action: action.name.clone(),
                    state: from.clone(),
                });
            }
            let mut targets: Vec<&[u32]> = Vec::with_capacity(row.outcomes.len());
            for o in &row.outcomes {
                let p = o.prob.exact();
                if p < num_rational::Ratio::from_integer(0) || p > num_rational::Ratio::from_integer(1) {
                    report.violations.push(Violation::ProbabilityRange {
                        action: action.name.clone(),
                        from: from.clone(),
                        target: render(&o.target),
                        prob: o.prob.canonical(),
                    });
                }
                if targets.contains(&&*o.target) {
                    report.violations.push(Violation::DuplicateTarget {
                        action: action.name.clone(),
                        from: from.clone(),
                        target: render(&o.target),
                    });
                }
                targets.push(&o.target);
            }
            if opts.exact {
                let sum = row
                    .outcomes
                    .iter()
                    .fold(BigRational::zero(), |acc, o| acc + o.prob.to_big());
                if !sum.is_one() {
                    report.violations.push(Violation::DistributionSum {
                        action: action.name.clone(),
                        from,
                        sum: sum.to_string(),
                    });
                }
            } else {
                let sum: f64 = row.outcomes.iter().map(|o| o.prob.value()).sum();
                if (sum - 1.0).abs() > SUM_TOLERANCE {
                    report.violations.push(Violation::DistributionSum {
                        action: action.name.clone(),
                        from,
                        sum: sum.to_string(),
                    });
                }
            }
        }
    }

    for (ap, a, b) in model.ap_conflicts() {
        let name = |x: &AgentId| model.agent(*x).name.clone();
        report.violations.push(Violation::SharedProposition {
            ap: ap.clone(),
            agents: vec![name(a), name(b)],
        });
    }

    report
}

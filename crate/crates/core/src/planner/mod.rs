//! Plan-space search: establishing open conditions, resolving threats, and
//! the best-first loop that drives them.

mod establish;
mod search;
mod threats;

pub use establish::{establish, establish_precondition, establish_unknown};
pub use search::{plan, rank, SearchConfig, SearchOutcome, SearchResult, SearchStats};
pub use threats::{detect_unsafe_links, resolve, ThreatKind, UnsafeLink};

use crate::contingency::{is_consistent, propagate};
use crate::plan::{Plan, StepKind};

/// Re-derives labels after a modification and enforces the decision
/// orderings they imply. `None` when the plan became a dead end.
pub(crate) fn finalize(mut plan: Plan) -> Option<Plan> {
    propagate(&mut plan);
    if !is_consistent(&plan) {
        return None;
    }
    let decisions: Vec<_> = plan
        .step_ids()
        .filter_map(|d| match &plan.step(d).kind {
            StepKind::Decision { source } => Some((d, source.clone())),
            _ => None,
        })
        .collect();
    for (d, source) in decisions {
        let dependents: Vec<_> = plan
            .step_ids()
            .filter(|&t| {
                let s = plan.step(t);
                t != d
                    && !matches!(s.kind, StepKind::Start | StepKind::Goal { .. })
                    && s.labels.negative.contains_key(&source)
            })
            .collect();
        for t in dependents {
            if !plan.ordering.precedes(d, t) && !plan.order(d, t) {
                return None;
            }
        }
    }
    Some(plan)
}

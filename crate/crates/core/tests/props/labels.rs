//! Label propagation and label-set properties.
#![allow(dead_code)]

use contplan::contingency::{propagate, propagate_shuffled};
use contplan::labels::{contingencies_over, LabelSet, Registry};
use contplan::plan::Plan;
use contplan::syntax::Symbol;
use proptest::prelude::*;
use proptest::test_runner::TestCaseError;
use rand::rngs::StdRng;
use rand::SeedableRng;

use crate::common;

fn snapshot(plan: &Plan) -> Vec<LabelSet> {
    plan.steps
        .iter()
        .map(|s| s.labels.clone())
        .chain(plan.effects.iter().map(|e| e.labels.clone()))
        .chain(plan.open.iter().map(|o| o.labels.clone()))
        .collect()
}

pub fn walk() -> impl Strategy<Value = Plan> {
    (0..common::FIXTURES.len(), 0..30usize, any::<u64>()).prop_map(|(f, depth, seed)| {
        let (d, p) = common::load(common::FIXTURES[f]);
        common::random_walk(&d, &p, depth, seed)
    })
}

pub fn idempotent(plan: &Plan) -> Result<(), TestCaseError> {
    let mut once = plan.clone();
    propagate(&mut once);
    let mut twice = once.clone();
    propagate(&mut twice);
    prop_assert_eq!(snapshot(&once), snapshot(&twice));
    // Search nodes are always left at the fixpoint.
    prop_assert_eq!(snapshot(plan), snapshot(&once));
    Ok(())
}

pub fn confluent(plan: &Plan, order: u64) -> Result<(), TestCaseError> {
    let mut fixed = plan.clone();
    propagate(&mut fixed);
    let mut shuffled = plan.clone();
    propagate_shuffled(&mut shuffled, &mut StdRng::seed_from_u64(order));
    prop_assert_eq!(snapshot(&fixed), snapshot(&shuffled));
    Ok(())
}

pub fn contain_seeds(plan: &Plan) -> Result<(), TestCaseError> {
    for s in &plan.steps {
        for (src, outs) in &s.seed.negative {
            prop_assert!(outs.is_subset(&s.labels.negative[src]));
        }
    }
    Ok(())
}

pub fn label_set() -> impl Strategy<Value = LabelSet> {
    let side = prop::collection::vec((0..3usize, 0..3usize), 0..4);
    (side.clone(), side).prop_map(|(pos, neg)| {
        let mut l = LabelSet::default();
        for (s, o) in pos {
            l.add_positive(&Symbol::new(&format!("S{s}")), &Symbol::new(&format!("O{o}")));
        }
        for (s, o) in neg {
            l.add_negative(&Symbol::new(&format!("S{s}")), &Symbol::new(&format!("O{o}")));
        }
        l
    })
}

/// Required: every positive source takes one of its listed outcomes.
/// Forbidden: some negative source takes a listed outcome. Checked
/// against a direct reading over all full assignments.
pub fn classification(l: &LabelSet) -> Result<(), TestCaseError> {
    let registry: Registry = (0..3)
        .map(|s| {
            (
                Symbol::new(&format!("S{s}")),
                (0..3).map(|o| Symbol::new(&format!("O{o}"))).collect(),
            )
        })
        .collect();
    let names: Vec<Symbol> = registry.keys().cloned().collect();
    let mut clash = false;
    for g in contingencies_over(&names, &registry) {
        let req = l.positive.iter().all(|(s, outs)| outs.contains(&g[s]));
        let forb = l.negative.iter().any(|(s, outs)| outs.contains(&g[s]));
        prop_assert_eq!(l.required(&g), req);
        prop_assert_eq!(l.forbidden(&g), forb);
        clash |= req && forb;
    }
    // Consistent: no contingency is both required and forbidden.
    prop_assert_eq!(l.is_consistent(&registry), !clash);
    Ok(())
}

pub fn merge(a: &LabelSet, b: &LabelSet) -> Result<(), TestCaseError> {
    let mut ab = a.clone();
    ab.merge(b);
    let mut ba = b.clone();
    ba.merge(a);
    prop_assert_eq!(&ab, &ba);
    let mut again = ab.clone();
    prop_assert!(!again.merge(b));
    prop_assert_eq!(again, ab);
    Ok(())
}

//! Plan document round trip and normal-form properties.
#![allow(dead_code)]

use std::collections::BTreeMap;

use contplan::document::{normalize, DocStepKind, PlanDocument};
use contplan::labels::{LabelMap, LabelSet};
use contplan::syntax::Symbol;
use proptest::prelude::*;
use proptest::test_runner::TestCaseError;
use rand::rngs::StdRng;
use rand::seq::SliceRandom;
use rand::SeedableRng;

use crate::common;

pub fn doc() -> impl Strategy<Value = PlanDocument> {
    (0..common::FIXTURES.len(), 0..40usize, any::<u64>()).prop_map(|(f, depth, seed)| {
        let (d, p) = common::load(common::FIXTURES[f]);
        PlanDocument::from_plan(&common::random_walk(&d, &p, depth, seed))
    })
}

fn rename_map(m: &LabelMap, names: &BTreeMap<Symbol, Symbol>) -> LabelMap {
    m.iter()
        .map(|(s, o)| (names.get(s).cloned().unwrap_or_else(|| s.clone()), o.clone()))
        .collect()
}

fn rename_labels(l: &LabelSet, names: &BTreeMap<Symbol, Symbol>) -> LabelSet {
    LabelSet {
        positive: rename_map(&l.positive, names),
        negative: rename_map(&l.negative, names),
    }
}

/// Renumbers steps with a random permutation and gives operator-minted
/// sources fresh names.
fn scramble(doc: &PlanDocument, seed: u64) -> PlanDocument {
    let mut rng = StdRng::seed_from_u64(seed);
    let mut numbers: Vec<usize> = doc.steps.iter().map(|s| s.number).collect();
    numbers.shuffle(&mut rng);
    let mut perm: BTreeMap<usize, usize> = doc.steps.iter().map(|s| s.number).zip(numbers).collect();
    perm.insert(0, 0);
    let names: BTreeMap<Symbol, Symbol> = doc
        .sources
        .iter()
        .filter(|s| s.origin != 0)
        .enumerate()
        .map(|(i, s)| (s.name.clone(), Symbol::new(&format!("ZZ{}", 97 - i))))
        .collect();

    let mut out = doc.clone();
    for s in &mut out.sources {
        s.origin = perm[&s.origin];
        if let Some(n) = names.get(&s.name) {
            s.name = n.clone();
        }
    }
    for s in &mut out.steps {
        s.number = perm[&s.number];
        s.created = 1000 - s.created;
        s.labels = rename_labels(&s.labels, &names);
        if let DocStepKind::Decision { source } = &mut s.kind {
            if let Some(n) = names.get(source) {
                *source = n.clone();
            }
        }
        for r in &mut s.rules {
            if let Some(n) = names.get(&r.outcome) {
                r.outcome = n.clone();
            }
        }
        for l in &mut s.links {
            l.producer = perm[&l.producer];
            l.negative = rename_map(&l.negative, &names);
        }
    }
    out.steps.sort_by_key(|s| s.number);
    for g in &mut out.goals {
        g.labels = rename_labels(&g.labels, &names);
        for l in &mut g.links {
            l.producer = perm[&l.producer];
            l.negative = rename_map(&l.negative, &names);
        }
    }
    out.goals.reverse();
    out.order = out.order.iter().map(|&(a, b)| (perm[&a], perm[&b])).collect();
    out
}

pub fn round_trip(d: &PlanDocument) -> Result<(), TestCaseError> {
    let text = d.render();
    let back = PlanDocument::parse(&text).unwrap();
    prop_assert_eq!(back.render(), text.clone());
    let again = PlanDocument::parse(&back.render()).unwrap();
    prop_assert_eq!(again, back);
    Ok(())
}

pub fn renaming_invariant(d: &PlanDocument, seed: u64) -> Result<(), TestCaseError> {
    let s = scramble(d, seed);
    prop_assert_eq!(normalize(&s), normalize(d));
    // The scrambled text still parses back to itself.
    let back = PlanDocument::parse(&s.render()).unwrap();
    prop_assert_eq!(normalize(&back), normalize(d));
    Ok(())
}

pub fn sees_label_changes(d: &PlanDocument, pick: prop::sample::Index) -> Result<(), TestCaseError> {
    if d.steps.is_empty() {
        return Ok(());
    }
    let mut changed = d.clone();
    let i = pick.index(changed.steps.len());
    changed.steps[i]
        .labels
        .add_negative(&Symbol::new("EXTRA"), &Symbol::new("X"));
    prop_assert_ne!(normalize(&changed), normalize(d));
    Ok(())
}

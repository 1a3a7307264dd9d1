use std::collections::{BTreeMap, BTreeSet};

use crate::labels::{contingencies_over, Contingency, LabelSet};
use crate::plan::{Consumer, EffectId, LinkCondition, LinkId, Plan, Producer};
use crate::syntax::{Literal, Symbol};

use super::finalize;

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum ThreatKind {
    /// The link can fail in these contingencies.
    Ordinary { at_risk: Vec<Contingency> },
    /// The clobber is a direct effect of `outcome` of `source` and the link
    /// only serves other outcomes of that source; the decision rules for
    /// `guarded` must rule the clobbered state out.
    RuleAugmentation {
        source: Symbol,
        outcome: Symbol,
        guarded: Vec<Symbol>,
    },
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct UnsafeLink {
    pub link: LinkId,
    pub clobber: EffectId,
    pub clobber_condition: Literal,
    pub kind: ThreatKind,
}

/// Labels of whatever the link supports, plus negatives recorded on the
/// link itself.
fn consumer_labels(plan: &Plan, link: LinkId) -> LabelSet {
    let l = &plan.links[link.0];
    let mut labels = match l.consumer {
        Consumer::Step(t) => plan.step(t).labels.clone(),
        Consumer::Secondary(f) => plan.effect(f).labels.clone(),
        Consumer::Preserve(_) => LabelSet {
            positive: l.seed.positive.clone(),
            negative: LabelSet::default().negative,
        },
    };
    labels.merge_negative(&l.seed.negative);
    labels
}

fn clobbers(plan: &Plan, q: &Literal, cond: &Literal) -> bool {
    if cond.atom.know_if {
        !q.atom.know_if && plan.bindings.unify_atoms(&q.atom, &cond.atom.fact()).is_some()
    } else {
        q.positive != cond.positive && plan.bindings.unify_atoms(&q.atom, &cond.atom).is_some()
    }
}

pub fn detect_unsafe_links(plan: &Plan) -> Vec<UnsafeLink> {
    let mut out = Vec::new();
    for (li, link) in plan.links.iter().enumerate() {
        let (Producer::Effect(p), LinkCondition::Lit(cond)) = (link.producer, &link.condition) else {
            continue;
        };
        let lo = plan.effect(p).step;
        let hi = plan.consumer_step(link.consumer);
        let consumer_effect = match link.consumer {
            Consumer::Secondary(f) | Consumer::Preserve(f) => Some(f),
            Consumer::Step(_) => None,
        };
        let mut cl: Option<LabelSet> = None;
        for (ei, e) in plan.effects.iter().enumerate() {
            let id = EffectId(ei);
            if id == p || Some(id) == consumer_effect {
                continue;
            }
            if !plan.ordering.can_occur_between(e.step, lo, hi) {
                continue;
            }
            let Some(q) = e.post.iter().find(|q| clobbers(plan, q, cond)) else {
                continue;
            };
            let cl = cl.get_or_insert_with(|| consumer_labels(plan, LinkId(li)));
            let sources: Vec<Symbol> = cl.sources().union(&e.labels.sources()).cloned().collect();
            let at_risk: Vec<Contingency> = contingencies_over(&sources, &plan.sources)
                .into_iter()
                .filter(|g| cl.required(g) && !cl.forbidden(g) && !e.labels.forbidden(g))
                .collect();
            let kind = if !at_risk.is_empty() {
                ThreatKind::Ordinary { at_risk }
            } else if let Some((s, o)) = &e.unknown {
                let guarded: Vec<Symbol> = cl
                    .positive
                    .get(s)
                    .map(|outs| outs.iter().filter(|x| *x != o).cloned().collect())
                    .unwrap_or_default();
                let open = !cl.negative.get(s).is_some_and(|n| n.contains(o));
                if guarded.is_empty() || !open {
                    continue;
                }
                ThreatKind::RuleAugmentation {
                    source: s.clone(),
                    outcome: o.clone(),
                    guarded,
                }
            } else {
                continue;
            };
            out.push(UnsafeLink {
                link: LinkId(li),
                clobber: id,
                clobber_condition: q.clone(),
                kind,
            });
        }
    }
    out
}

/// Outcomes per source appearing in a set of contingencies.
fn project(at_risk: &[Contingency]) -> BTreeMap<Symbol, BTreeSet<Symbol>> {
    let mut out: BTreeMap<Symbol, BTreeSet<Symbol>> = BTreeMap::new();
    for g in at_risk {
        for (s, o) in g {
            out.entry(s.clone()).or_default().insert(o.clone());
        }
    }
    out
}

fn forbid_consumer(plan: &mut Plan, link: LinkId, source: &Symbol, outcomes: &BTreeSet<Symbol>) {
    let consumer = plan.links[link.0].consumer;
    for o in outcomes {
        plan.links[link.0].seed.add_negative(source, o);
        match consumer {
            Consumer::Step(t) => {
                plan.steps[t.0].seed.add_negative(source, o);
            }
            Consumer::Secondary(f) => {
                plan.effects[f.0].seed.add_negative(source, o);
            }
            Consumer::Preserve(_) => {}
        }
    }
}

/// Orders the clobbering step between the link's endpoints.
fn confine(plan: &mut Plan, u: &UnsafeLink) -> bool {
    let link = &plan.links[u.link.0];
    let lo = plan.producer_step(link.producer);
    let hi = plan.consumer_step(link.consumer);
    let mid = plan.effect(u.clobber).step;
    (plan.ordering.precedes(lo, mid) || plan.order(lo, mid)) && (plan.ordering.precedes(mid, hi) || plan.order(mid, hi))
}

/// Every way of removing the threat, each as a new plan.
pub fn resolve(plan: &Plan, u: &UnsafeLink) -> Vec<Plan> {
    let link = plan.links[u.link.0].clone();
    let lo = plan.producer_step(link.producer);
    let hi = plan.consumer_step(link.consumer);
    let clobber_step = plan.effect(u.clobber).step;
    let mut out = Vec::new();

    let at_risk = match &u.kind {
        ThreatKind::RuleAugmentation {
            source,
            outcome,
            guarded,
        } => {
            let mut child = plan.clone();
            forbid_consumer(&mut child, u.link, source, &BTreeSet::from([outcome.clone()]));
            for g in guarded {
                child.augment_rule(source, g, &u.clobber_condition.negate());
            }
            if confine(&mut child, u) {
                out.extend(finalize(child));
            }
            return out;
        }
        ThreatKind::Ordinary { at_risk } => at_risk.clone(),
    };

    let LinkCondition::Lit(cond) = &link.condition else {
        return out;
    };
    let protected = if cond.atom.know_if {
        cond.atom.fact()
    } else {
        cond.atom.clone()
    };
    for b in plan.bindings.separation_choices(&u.clobber_condition.atom, &protected) {
        let mut child = plan.clone();
        child.bindings = b;
        out.extend(finalize(child));
    }

    let per_source = project(&at_risk);
    for (s, outs) in &per_source {
        let mut child = plan.clone();
        for o in outs {
            child.steps[clobber_step.0].seed.add_negative(s, o);
        }
        if confine(&mut child, u) {
            out.extend(finalize(child));
        }
    }
    for (s, outs) in &per_source {
        let mut child = plan.clone();
        forbid_consumer(&mut child, u.link, s, outs);
        if confine(&mut child, u) {
            out.extend(finalize(child));
        }
    }
    let secondary = plan.effect(u.clobber).secondary.clone();
    for l in secondary {
        let mut child = plan.clone();
        let seed = LabelSet {
            positive: per_source.clone(),
            ..Default::default()
        };
        child.add_open(l.negate(), Consumer::Preserve(u.clobber), seed);
        if confine(&mut child, u) {
            out.extend(finalize(child));
        }
    }

    let mut demoted = plan.clone();
    if demoted.order(clobber_step, lo) {
        out.extend(finalize(demoted));
    }
    let mut promoted = plan.clone();
    if promoted.order(hi, clobber_step) {
        out.extend(finalize(promoted));
    }
    out
}

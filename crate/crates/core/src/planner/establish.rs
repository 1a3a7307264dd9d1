use std::collections::BTreeSet;

use crate::labels::{contingencies_over, LabelMap, LabelSet};
use crate::plan::{Consumer, EffectId, Link, LinkCondition, Plan, Producer, StepKind};
use crate::syntax::{Domain, Literal, Symbol};

use super::finalize;

/// Children of the plan that establish open condition `index`.
pub fn establish(plan: &Plan, domain: &Domain, index: usize) -> Vec<Plan> {
    establish_precondition(plan, domain, index)
}

fn same_shape(a: &Literal, b: &Literal) -> bool {
    a.positive == b.positive
        && a.atom.pred == b.atom.pred
        && a.atom.know_if == b.atom.know_if
        && a.atom.args.len() == b.atom.args.len()
}

/// Reuse an existing effect or add a new step whose effect establishes the
/// open condition.
pub fn establish_precondition(plan: &Plan, domain: &Domain, index: usize) -> Vec<Plan> {
    let oc = plan.open[index].clone();
    let target = plan.consumer_step(oc.consumer);
    let mut base = plan.clone();
    base.open.remove(index);
    let mut children = Vec::new();

    let used = plan.used_effects();
    for (i, e) in plan.effects.iter().enumerate() {
        let id = EffectId(i);
        if e.step == target || plan.ordering.precedes(target, e.step) {
            continue;
        }
        let mut wanted = oc.labels.clone();
        if let Some((src, o)) = &e.unknown {
            if !wanted.positive.contains_key(src) {
                wanted.add_positive(src, o);
            }
        }
        if forbidden_where_required(&wanted, &e.labels, plan) {
            continue;
        }
        if !e.post.iter().any(|q| same_shape(q, &oc.condition)) {
            continue;
        }
        if let Some(child) = link_from(
            base.clone(),
            id,
            &oc.condition,
            oc.consumer,
            &oc.seed,
            &oc.labels.positive,
        ) {
            children.push(child);
        }
        if used.contains(&id) && !e.free_vars.is_empty() {
            let mut c = base.clone();
            let clone = c.clone_effect(id);
            if let Some(child) = link_from(c, clone, &oc.condition, oc.consumer, &oc.seed, &oc.labels.positive) {
                children.push(child);
            }
        }
    }

    for schema in &domain.operators {
        for (j, spec) in schema.effects.iter().enumerate() {
            if !spec.post.iter().any(|q| same_shape(q, &oc.condition)) {
                continue;
            }
            let mut c = base.clone();
            let (_, effects) = c.instantiate(schema);
            if let Some(child) = link_from(c, effects[j], &oc.condition, oc.consumer, &oc.seed, &oc.labels.positive) {
                children.push(child);
            }
        }
    }
    children
}

/// Some contingency requires the open condition yet forbids the effect.
fn forbidden_where_required(open: &LabelSet, effect: &LabelSet, plan: &Plan) -> bool {
    if effect.negative.is_empty() {
        return false;
    }
    let sources: Vec<Symbol> = open.sources().union(&effect.sources()).cloned().collect();
    contingencies_over(&sources, &plan.sources)
        .iter()
        .any(|g| open.required(g) && effect.forbidden(g))
}

/// Links `effect` to the consumer through one of its postconditions. Each
/// matching postcondition would give the same link, so the first that
/// unifies is taken.
fn link_from(
    mut plan: Plan,
    effect: EffectId,
    cond: &Literal,
    consumer: Consumer,
    seed: &LabelSet,
    branch: &LabelMap,
) -> Option<Plan> {
    let e = plan.effect(effect).clone();
    let bindings = e.post.iter().find_map(|q| plan.bindings.unify(q, cond))?;
    plan.bindings = bindings;
    if !plan.order(e.step, plan.consumer_step(consumer)) {
        return None;
    }
    plan.links.push(Link {
        producer: Producer::Effect(effect),
        condition: LinkCondition::Lit(cond.clone()),
        consumer,
        seed: seed.clone(),
    });
    if !e.opened {
        plan.effects[effect.0].opened = true;
        for l in &e.secondary {
            plan.add_open(l.clone(), Consumer::Secondary(effect), LabelSet::default());
        }
    }
    if let Some((s, o)) = &e.unknown {
        if !establish_unknown(&mut plan, effect, s, o, cond, consumer, branch) {
            return None;
        }
    }
    finalize(plan)
}

/// Handles the unknown precondition of an uncertain effect that was just
/// used to establish `cond` for `consumer`: splits the branch if needed,
/// finds or adds the decision step for `source`, extends its rule for
/// `outcome`, and posts the knowledge goal. `branch` holds the positive
/// labels of the open condition being established. Returns `false` when the
/// branch already commits to another outcome of `source`.
pub fn establish_unknown(
    plan: &mut Plan,
    effect: EffectId,
    source: &Symbol,
    outcome: &Symbol,
    cond: &Literal,
    consumer: Consumer,
    branch: &LabelMap,
) -> bool {
    match branch.get(source) {
        Some(allowed) => {
            if allowed.len() != 1 || !allowed.contains(outcome) {
                return false;
            }
        }
        None => {
            let reached = reachable_goals(plan, consumer);
            for g in &reached {
                plan.steps[g.0].seed.add_positive(source, outcome);
            }
            let others: Vec<Symbol> = plan.sources[source].iter().filter(|o| *o != outcome).cloned().collect();
            for other in others {
                let mut seed = LabelSet {
                    positive: branch.clone(),
                    ..Default::default()
                };
                seed.positive.insert(source.clone(), BTreeSet::from([other.clone()]));
                plan.add_goal_copy(seed);
            }
        }
    }
    let d = match plan.decision_for(source) {
        Some(d) => d,
        None => {
            let d = plan.add_decision(source);
            let origin = plan.source_origin[source];
            if origin != crate::plan::START && !plan.order(origin, d) {
                return false;
            }
            d
        }
    };
    plan.augment_rule(source, outcome, cond);
    if !plan.ordering.precedes(d, plan.consumer_step(consumer)) && !plan.order(d, plan.consumer_step(consumer)) {
        return false;
    }
    let exists = plan
        .links
        .iter()
        .any(|l| l.producer == Producer::Decision(d) && l.consumer == Consumer::Secondary(effect));
    if !exists {
        plan.links.push(Link {
            producer: Producer::Decision(d),
            condition: LinkCondition::Unknown {
                source: source.clone(),
                outcome: outcome.clone(),
            },
            consumer: Consumer::Secondary(effect),
            seed: LabelSet::default(),
        });
    }
    true
}

/// Goal copies the consumer contributes to through chains of links.
fn reachable_goals(plan: &Plan, consumer: Consumer) -> Vec<crate::ordering::StepId> {
    let mut out = Vec::new();
    let mut seen = BTreeSet::new();
    let mut stack = vec![consumer];
    while let Some(c) = stack.pop() {
        if !seen.insert(c) {
            continue;
        }
        let effects: Vec<EffectId> = match c {
            Consumer::Step(t) => match plan.step(t).kind {
                StepKind::Goal { .. } => {
                    out.push(t);
                    continue;
                }
                StepKind::Decision { .. } => continue,
                _ => plan.step(t).effects.clone(),
            },
            Consumer::Secondary(f) => vec![f],
            Consumer::Preserve(_) => continue,
        };
        for l in &plan.links {
            if let Producer::Effect(e) = l.producer {
                if effects.contains(&e) {
                    stack.push(l.consumer);
                }
            }
        }
    }
    out
}

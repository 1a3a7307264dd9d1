//! Label propagation over a plan, consistency, and per-contingency
//! classification of steps.

use rand::seq::SliceRandom;
use rand::Rng;

use crate::labels::{enumerate_contingencies, Contingency, Execution, LabelMap, LabelSet};
use crate::ordering::StepId;
use crate::plan::{Consumer, EffectId, Plan, Producer};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Task {
    Step(usize),
    Effect(usize),
    Open(usize),
}

fn consumer_positive(plan: &Plan, c: Consumer, seed: &LabelSet) -> LabelMap {
    match c {
        Consumer::Step(t) => plan.step(t).labels.positive.clone(),
        Consumer::Secondary(f) => plan.effect(f).labels.positive.clone(),
        Consumer::Preserve(_) => seed.positive.clone(),
    }
}

fn apply(plan: &mut Plan, task: Task) -> bool {
    match task {
        Task::Effect(i) => {
            let id = EffectId(i);
            let mut labels = plan.effects[i].labels.clone();
            let mut changed = false;
            for l in &plan.links {
                if l.producer == Producer::Effect(id) {
                    let pos = consumer_positive(plan, l.consumer, &l.seed);
                    changed |= labels.merge_positive(&pos);
                }
                if l.consumer == Consumer::Secondary(id) {
                    if let Producer::Effect(f) = l.producer {
                        changed |= labels.merge_negative(&plan.effect(f).labels.negative);
                    }
                }
            }
            let step = plan.effects[i].step;
            changed |= labels.merge_negative(&plan.step(step).labels.negative);
            plan.effects[i].labels = labels;
            changed
        }
        Task::Step(i) => {
            let id = StepId(i);
            let step = &plan.steps[i];
            let mut labels = step.labels.clone();
            let mut changed = false;
            let mut own = step.introduces.clone();
            if let crate::plan::StepKind::Decision { source } = &step.kind {
                own.push(source.clone());
            }
            for &e in &step.effects {
                changed |= labels.merge_positive(&plan.effect(e).labels.positive_without(&own));
            }
            for l in &plan.links {
                match (l.producer, l.consumer) {
                    (Producer::Decision(d), Consumer::Secondary(f)) if d == id => {
                        changed |= labels.merge_positive(&plan.effect(f).labels.positive_without(&own));
                    }
                    (Producer::Effect(f), Consumer::Step(t)) if t == id => {
                        changed |= labels.merge_negative(&plan.effect(f).labels.negative);
                    }
                    _ => {}
                }
            }
            plan.steps[i].labels = labels;
            changed
        }
        Task::Open(i) => {
            let oc = &plan.open[i];
            let pos = consumer_positive(plan, oc.consumer, &oc.seed);
            let mut labels = oc.labels.clone();
            let changed = labels.merge_positive(&pos);
            plan.open[i].labels = labels;
            changed
        }
    }
}

fn reset(plan: &mut Plan) -> Vec<Task> {
    let mut tasks = Vec::new();
    for (i, s) in plan.steps.iter_mut().enumerate() {
        s.labels = s.seed.clone();
        tasks.push(Task::Step(i));
    }
    for (i, e) in plan.effects.iter_mut().enumerate() {
        e.labels = e.seed.clone();
        tasks.push(Task::Effect(i));
    }
    for (i, o) in plan.open.iter_mut().enumerate() {
        o.labels = o.seed.clone();
        tasks.push(Task::Open(i));
    }
    tasks
}

/// Recomputes every label from the seeds as the least fixpoint of the
/// inheritance rules.
pub fn propagate(plan: &mut Plan) {
    let tasks = reset(plan);
    loop {
        let mut changed = false;
        for &t in &tasks {
            changed |= apply(plan, t);
        }
        if !changed {
            break;
        }
    }
}

/// Same fixpoint, visiting rules in a random order each round.
pub fn propagate_shuffled(plan: &mut Plan, rng: &mut impl Rng) {
    let mut tasks = reset(plan);
    loop {
        tasks.shuffle(rng);
        let mut changed = false;
        for &t in &tasks {
            changed |= apply(plan, t);
        }
        if !changed {
            break;
        }
    }
}

/// Every step, every effect that supports a link, and every open condition
/// has a consistent label set.
pub fn is_consistent(plan: &Plan) -> bool {
    let used = plan.used_effects();
    plan.steps.iter().all(|s| s.labels.is_consistent(&plan.sources))
        && used.iter().all(|&e| plan.effect(e).labels.is_consistent(&plan.sources))
        && plan.open.iter().all(|o| o.labels.is_consistent(&plan.sources))
}

/// Full cross product over the plan's registered sources.
pub fn plan_contingencies(plan: &Plan) -> Vec<Contingency> {
    enumerate_contingencies(&plan.sources)
}

pub fn executable_in(plan: &Plan, step: StepId, g: &Contingency) -> Execution {
    plan.step(step).labels.classify(g)
}

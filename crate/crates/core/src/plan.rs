//! The partial plan: steps, effect instances, causal links, open conditions,
//! decision rules, bindings and ordering.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use crate::bindings::Bindings;
use crate::labels::{LabelSet, Registry};
use crate::ordering::{Ordering, StepId};
use crate::syntax::{Condition, Literal, OperatorSchema, Problem, Symbol, Term, Var};

#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Debug)]
pub struct EffectId(pub usize);

#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Debug)]
pub struct LinkId(pub usize);

impl fmt::Display for EffectId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "e{}", self.0)
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum StepKind {
    Start,
    /// One copy of the overall goal; copy 0 is the original.
    Goal {
        copy: usize,
    },
    Action {
        schema: Symbol,
        args: Vec<Term>,
    },
    Decision {
        source: Symbol,
    },
}

#[derive(Clone, Debug)]
pub struct Step {
    pub kind: StepKind,
    pub precondition: Vec<Literal>,
    pub effects: Vec<EffectId>,
    /// Sources minted when this step was instantiated.
    pub introduces: Vec<Symbol>,
    /// Order of creation among action and decision steps, starting at 1.
    pub created: usize,
    pub seed: LabelSet,
    pub labels: LabelSet,
}

impl Step {
    pub fn is_goal(&self) -> bool {
        matches!(self.kind, StepKind::Goal { .. })
    }

    pub fn is_decision(&self) -> bool {
        matches!(self.kind, StepKind::Decision { .. })
    }
}

#[derive(Clone, Debug)]
pub struct Effect {
    pub step: StepId,
    /// Non-unknown secondary preconditions, flattened.
    pub secondary: Vec<Literal>,
    /// The outcome this effect depends on, if uncertain.
    pub unknown: Option<(Symbol, Symbol)>,
    pub post: Vec<Literal>,
    /// Variables that occur only in this effect; a clone renames them.
    pub free_vars: Vec<Var>,
    /// Whether the secondary preconditions have been posted as subgoals.
    pub opened: bool,
    pub seed: LabelSet,
    pub labels: LabelSet,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Consumer {
    /// Enabling precondition of a step.
    Step(StepId),
    /// Secondary precondition of an effect.
    Secondary(EffectId),
    /// Negated secondary precondition of an effect, keeping it from firing.
    Preserve(EffectId),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Producer {
    Effect(EffectId),
    /// A decision step "supplies" the unknown precondition of an uncertain
    /// effect it discriminates.
    Decision(StepId),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum LinkCondition {
    Lit(Literal),
    Unknown { source: Symbol, outcome: Symbol },
}

#[derive(Clone, Debug)]
pub struct Link {
    pub producer: Producer,
    pub condition: LinkCondition,
    pub consumer: Consumer,
    /// Positive seeds for preservation links; negative seeds added when a
    /// threat to this link is disabled.
    pub seed: LabelSet,
}

#[derive(Clone, Debug)]
pub struct OpenCondition {
    /// Creation sequence; the search establishes the oldest first.
    pub seq: usize,
    pub condition: Literal,
    pub consumer: Consumer,
    pub seed: LabelSet,
    pub labels: LabelSet,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DecisionRule {
    pub outcome: Symbol,
    pub antecedent: Vec<Literal>,
}

#[derive(Clone, Debug)]
pub struct Plan {
    pub steps: Vec<Step>,
    pub effects: Vec<Effect>,
    pub links: Vec<Link>,
    pub open: Vec<OpenCondition>,
    pub bindings: Bindings,
    pub ordering: Ordering,
    pub rules: BTreeMap<Symbol, Vec<DecisionRule>>,
    pub sources: Registry,
    /// Step whose instantiation minted each source.
    pub source_origin: BTreeMap<Symbol, StepId>,
    pub goal: Vec<Literal>,
    pub next_var: u32,
    pub next_seq: usize,
    pub next_created: usize,
}

pub const START: StepId = StepId(0);

impl Plan {
    pub fn step(&self, id: StepId) -> &Step {
        &self.steps[id.0]
    }

    pub fn effect(&self, id: EffectId) -> &Effect {
        &self.effects[id.0]
    }

    pub fn step_ids(&self) -> impl Iterator<Item = StepId> {
        (0..self.steps.len()).map(StepId)
    }

    pub fn goal_steps(&self) -> impl Iterator<Item = StepId> + '_ {
        self.step_ids().filter(|&s| self.step(s).is_goal())
    }

    pub fn decision_for(&self, source: &Symbol) -> Option<StepId> {
        self.step_ids()
            .find(|&s| matches!(&self.step(s).kind, StepKind::Decision { source: d } if d == source))
    }

    /// The step an open condition or link ultimately serves.
    pub fn consumer_step(&self, c: Consumer) -> StepId {
        match c {
            Consumer::Step(s) => s,
            Consumer::Secondary(e) | Consumer::Preserve(e) => self.effect(e).step,
        }
    }

    pub fn producer_step(&self, p: Producer) -> StepId {
        match p {
            Producer::Effect(e) => self.effect(e).step,
            Producer::Decision(d) => d,
        }
    }

    /// Effects that produce at least one link.
    pub fn used_effects(&self) -> BTreeSet<EffectId> {
        self.links
            .iter()
            .filter_map(|l| match l.producer {
                Producer::Effect(e) => Some(e),
                Producer::Decision(_) => None,
            })
            .collect()
    }

    pub fn fresh_var(&mut self, v: &Var) -> Var {
        self.next_var += 1;
        Var {
            name: v.name.clone(),
            id: self.next_var,
        }
    }

    fn add_step(&mut self, kind: StepKind, precondition: Vec<Literal>) -> StepId {
        let id = self.ordering.add_step();
        debug_assert_eq!(id.0, self.steps.len());
        let created = match kind {
            StepKind::Action { .. } | StepKind::Decision { .. } => {
                self.next_created += 1;
                self.next_created
            }
            _ => 0,
        };
        self.steps.push(Step {
            kind,
            precondition,
            effects: Vec::new(),
            introduces: Vec::new(),
            created,
            seed: LabelSet::default(),
            labels: LabelSet::default(),
        });
        id
    }

    fn add_effect(&mut self, step: StepId, mut effect: Effect) -> EffectId {
        let id = EffectId(self.effects.len());
        if let Some((s, o)) = &effect.unknown {
            for other in self.sources.get(s).into_iter().flatten() {
                if other != o {
                    effect.seed.add_negative(s, other);
                }
            }
            effect.labels = effect.seed.clone();
        }
        self.effects.push(effect);
        self.steps[step.0].effects.push(id);
        id
    }

    pub fn add_open(&mut self, condition: Literal, consumer: Consumer, seed: LabelSet) {
        self.next_seq += 1;
        self.open.push(OpenCondition {
            seq: self.next_seq,
            condition,
            consumer,
            labels: seed.clone(),
            seed,
        });
    }

    /// Orders `before < after`; `false` on a cycle.
    pub fn order(&mut self, before: StepId, after: StepId) -> bool {
        if before == after {
            return false;
        }
        match self.ordering.add_precedence(before, after) {
            Some(o) => {
                self.ordering = o;
                true
            }
            None => false,
        }
    }

    /// Adds a fresh copy of the overall goal with the given positive seed.
    pub fn add_goal_copy(&mut self, seed: LabelSet) -> StepId {
        let copy = self.goal_steps().count();
        let mut renaming: BTreeMap<Var, Var> = BTreeMap::new();
        let goal: Vec<Literal> = self.goal.clone();
        let lits: Vec<Literal> = goal
            .iter()
            .map(|l| {
                l.map_terms(&mut |t| match t {
                    Term::Var(v) => {
                        if !renaming.contains_key(v) {
                            let fresh = self.fresh_var(v);
                            renaming.insert(v.clone(), fresh);
                        }
                        Term::Var(renaming[v].clone())
                    }
                    c => c.clone(),
                })
            })
            .collect();
        let id = self.add_step(StepKind::Goal { copy }, lits.clone());
        self.steps[id.0].seed = seed.clone();
        self.steps[id.0].labels = seed;
        for s in self.step_ids().collect::<Vec<_>>() {
            if !self.step(s).is_goal() {
                self.order(s, id);
            }
        }
        for l in lits {
            self.add_open(l, Consumer::Step(id), LabelSet::default());
        }
        id
    }

    /// Orders a new non-goal step after start and before every goal copy.
    fn frame(&mut self, id: StepId) {
        if id != START {
            self.order(START, id);
        }
        for g in self.goal_steps().collect::<Vec<_>>() {
            self.order(id, g);
        }
    }

    pub fn add_decision(&mut self, source: &Symbol) -> StepId {
        let id = self.add_step(StepKind::Decision { source: source.clone() }, Vec::new());
        self.frame(id);
        let rules = self.sources[source]
            .iter()
            .map(|o| DecisionRule {
                outcome: o.clone(),
                antecedent: Vec::new(),
            })
            .collect();
        self.rules.insert(source.clone(), rules);
        id
    }

    /// Instantiates a schema as a new step. Returns the step and its effects
    /// in schema order.
    pub fn instantiate(&mut self, schema: &OperatorSchema) -> (StepId, Vec<EffectId>) {
        let mut renaming: BTreeMap<Var, Term> = BTreeMap::new();
        let created = self.next_created + 1;
        let mut minted = Vec::new();
        let declared = schema.sources();
        let several = declared.len() > 1;
        for (i, (v, outcomes)) in declared.into_iter().enumerate() {
            let name = if several {
                Symbol::new(&format!("{}{}S{}", schema.name, created, i + 1))
            } else {
                Symbol::new(&format!("{}{}S", schema.name, created))
            };
            self.sources.insert(name.clone(), outcomes);
            renaming.insert(v, Term::Const(name.clone()));
            minted.push(name);
        }
        let args: Vec<Term> = schema
            .params
            .iter()
            .map(|p| self.rename_term(&mut renaming, &Term::Var(p.clone())))
            .collect();
        let pre: Vec<Literal> = schema
            .precondition
            .literals()
            .iter()
            .map(|l| self.rename_literal(&mut renaming, l))
            .collect();
        let id = self.add_step(
            StepKind::Action {
                schema: schema.name.clone(),
                args,
            },
            pre.clone(),
        );
        for s in &minted {
            self.source_origin.insert(s.clone(), id);
        }
        self.steps[id.0].introduces = minted;
        self.frame(id);
        let mut effects = Vec::new();
        for spec in &schema.effects {
            let secondary: Vec<Literal> = spec
                .secondary
                .literals()
                .iter()
                .map(|l| self.rename_literal(&mut renaming, l))
                .collect();
            let post: Vec<Literal> = spec
                .post
                .iter()
                .map(|l| self.rename_literal(&mut renaming, l))
                .collect();
            let unknown = spec.secondary.unknowns().into_iter().next().map(|(src, o)| {
                match self.rename_term(&mut renaming, &src) {
                    Term::Const(c) => (c, o),
                    Term::Var(v) => (v.name, o),
                }
            });
            let free_vars = schema
                .free_effect_vars(spec)
                .iter()
                .filter_map(|v| renaming.get(v).and_then(Term::as_var).cloned())
                .collect();
            let e = self.add_effect(
                id,
                Effect {
                    step: id,
                    secondary,
                    unknown,
                    post,
                    free_vars,
                    opened: false,
                    seed: LabelSet::default(),
                    labels: LabelSet::default(),
                },
            );
            effects.push(e);
        }
        for l in pre {
            self.add_open(l, Consumer::Step(id), LabelSet::default());
        }
        (id, effects)
    }

    fn rename_term(&mut self, renaming: &mut BTreeMap<Var, Term>, t: &Term) -> Term {
        match t {
            Term::Var(v) => {
                if let Some(r) = renaming.get(v) {
                    return r.clone();
                }
                let fresh = Term::Var(self.fresh_var(v));
                renaming.insert(v.clone(), fresh.clone());
                fresh
            }
            c => c.clone(),
        }
    }

    fn rename_literal(&mut self, renaming: &mut BTreeMap<Var, Term>, l: &Literal) -> Literal {
        let terms: Vec<Term> = l.atom.args.iter().map(|t| self.rename_term(renaming, t)).collect();
        let mut it = terms.into_iter();
        l.map_terms(&mut |_| it.next().unwrap())
    }

    /// A copy of `e` on the same step with its free variables renamed apart.
    pub fn clone_effect(&mut self, e: EffectId) -> EffectId {
        let orig = self.effects[e.0].clone();
        let mut renaming: BTreeMap<Var, Var> = BTreeMap::new();
        for v in &orig.free_vars {
            let fresh = self.fresh_var(v);
            renaming.insert(v.clone(), fresh);
        }
        let mut f = |t: &Term| match t {
            Term::Var(v) => Term::Var(renaming.get(v).cloned().unwrap_or_else(|| v.clone())),
            c => c.clone(),
        };
        let effect = Effect {
            step: orig.step,
            secondary: orig.secondary.iter().map(|l| l.map_terms(&mut f)).collect(),
            unknown: orig.unknown.clone(),
            post: orig.post.iter().map(|l| l.map_terms(&mut f)).collect(),
            free_vars: renaming.values().cloned().collect(),
            opened: false,
            seed: LabelSet::default(),
            labels: LabelSet::default(),
        };
        self.add_effect(orig.step, effect)
    }

    /// Conjoins `cond` into the rule for `outcome` of `source` and posts the
    /// matching knowledge goal on the decision step. Idempotent.
    pub fn augment_rule(&mut self, source: &Symbol, outcome: &Symbol, cond: &Literal) {
        let Some(d) = self.decision_for(source) else { return };
        let resolved = self.bindings.resolve_literal(cond);
        let rules = self.rules.get_mut(source).expect("decision without rules");
        let rule = rules
            .iter_mut()
            .find(|r| &r.outcome == outcome)
            .expect("outcome not declared");
        if !rule
            .antecedent
            .iter()
            .any(|l| self.bindings.resolve_literal(l) == resolved)
        {
            rule.antecedent.push(cond.clone());
        }
        let goal = Literal::pos(cond.atom.know_if());
        let rg = self.bindings.resolve_literal(&goal);
        let already = self
            .step(d)
            .precondition
            .iter()
            .any(|l| self.bindings.resolve_literal(l) == rg);
        if !already {
            self.steps[d.0].precondition.push(goal.clone());
            self.add_open(goal, Consumer::Step(d), LabelSet::default());
        }
    }
}

/// The plan with a start step carrying the initial state and one goal step
/// whose preconditions are the goal conjuncts.
pub fn initial_plan(problem: &Problem) -> Plan {
    let mut plan = Plan {
        steps: Vec::new(),
        effects: Vec::new(),
        links: Vec::new(),
        open: Vec::new(),
        bindings: Bindings::new(),
        ordering: Ordering::new(),
        rules: BTreeMap::new(),
        sources: Registry::new(),
        source_origin: BTreeMap::new(),
        goal: problem.goal.literals(),
        next_var: 0,
        next_seq: 0,
        next_created: 0,
    };
    let start = plan.add_step(StepKind::Start, Vec::new());
    for g in &problem.uncertain {
        plan.sources.insert(g.source.clone(), g.outcome_names());
        plan.source_origin.insert(g.source.clone(), start);
        plan.steps[start.0].introduces.push(g.source.clone());
    }
    if !problem.known.is_empty() {
        plan.add_effect(
            start,
            Effect {
                step: start,
                secondary: Vec::new(),
                unknown: None,
                post: problem.known.clone(),
                free_vars: Vec::new(),
                opened: true,
                seed: LabelSet::default(),
                labels: LabelSet::default(),
            },
        );
    }
    for g in &problem.uncertain {
        for (o, lits) in &g.outcomes {
            if lits.is_empty() {
                continue;
            }
            plan.add_effect(
                start,
                Effect {
                    step: start,
                    secondary: Vec::new(),
                    unknown: Some((g.source.clone(), o.clone())),
                    post: lits.clone(),
                    free_vars: Vec::new(),
                    opened: true,
                    seed: LabelSet::default(),
                    labels: LabelSet::default(),
                },
            );
        }
    }
    plan.add_goal_copy(LabelSet::default());
    plan
}

/// Secondary preconditions as a condition, for display.
pub fn effect_condition(e: &Effect) -> Condition {
    let mut parts: Vec<Condition> = e.secondary.iter().cloned().map(Condition::Lit).collect();
    if let Some((s, o)) = &e.unknown {
        parts.push(Condition::Unknown {
            source: Term::Const(s.clone()),
            outcome: o.clone(),
        });
    }
    match parts.len() {
        0 => Condition::True,
        1 => parts.pop().unwrap(),
        _ => Condition::And(parts),
    }
}

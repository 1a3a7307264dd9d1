//! Brute-force execution oracle. Runs a plan document against every
//! assignment of outcomes to its sources and a sample of linearizations,
//! simulating the agent: actions fire by their schema semantics, decisions
//! pick the first rule whose antecedent holds, and steps are skipped unless
//! their labels make them required under what the agent has decided so far.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

use crate::document::{DocStepKind, PlanDocument};
use crate::error::{Error, Result};
use crate::labels::{Contingency, LabelSet, Registry};
use crate::syntax::{Atom, Condition, Domain, Literal, OperatorSchema, Problem, Symbol, Term, Var};

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct WorldState {
    pub facts: BTreeSet<Atom>,
    /// Facts whose truth value the agent has observed.
    pub known: BTreeSet<Atom>,
}

impl WorldState {
    pub fn holds(&self, lit: &Literal) -> bool {
        let truth = if lit.atom.know_if {
            self.known.contains(&lit.atom.fact())
        } else {
            self.facts.contains(&lit.atom)
        };
        truth == lit.positive
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Verdict {
    Success,
    PreconditionFailure {
        step: usize,
    },
    ForbiddenStep {
        step: usize,
    },
    NoRuleMatched {
        step: usize,
    },
    /// The step's labels depend on a source no decision step ever settles.
    Undecidable {
        step: usize,
        source: Symbol,
    },
    GoalUnsatisfied,
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Verdict::Success => write!(f, "success"),
            Verdict::PreconditionFailure { step } => write!(f, "precondition-failure({step})"),
            Verdict::ForbiddenStep { step } => write!(f, "forbidden-step({step})"),
            Verdict::NoRuleMatched { step } => write!(f, "no-rule-matched({step})"),
            Verdict::Undecidable { step, source } => write!(f, "undecidable({step}, {source})"),
            Verdict::GoalUnsatisfied => write!(f, "goal-unsatisfied"),
        }
    }
}

#[derive(Clone, Debug)]
pub struct Trace {
    pub contingency: Contingency,
    pub seed: u64,
    /// Steps actually executed, in order.
    pub executed: Vec<usize>,
    pub decisions: BTreeMap<Symbol, Symbol>,
    pub verdict: Verdict,
}

#[derive(Clone, Debug, Default)]
pub struct ValidationReport {
    pub trials: Vec<Trace>,
}

impl ValidationReport {
    pub fn is_sound(&self) -> bool {
        self.trials.iter().all(|t| t.verdict == Verdict::Success)
    }

    pub fn first_failure(&self) -> Option<&Trace> {
        self.trials.iter().find(|t| t.verdict != Verdict::Success)
    }

    pub fn summary(&self) -> String {
        let ok = self.trials.iter().filter(|t| t.verdict == Verdict::Success).count();
        let mut s = format!(
            "{}: {ok}/{} trials succeeded\n",
            if self.is_sound() { "sound" } else { "unsound" },
            self.trials.len()
        );
        if let Some(t) = self.first_failure() {
            s.push_str(&format!(
                "counterexample: {} seed {} executed {:?} -> {}\n",
                show_contingency(&t.contingency),
                t.seed,
                t.executed,
                t.verdict
            ));
        }
        s
    }

    /// One tab-separated row per trial.
    pub fn table(&self) -> String {
        let mut s = String::from("contingency\tseed\tverdict\n");
        for t in &self.trials {
            s.push_str(&format!(
                "{}\t{}\t{}\n",
                show_contingency(&t.contingency),
                t.seed,
                t.verdict
            ));
        }
        s
    }
}

fn show_contingency(g: &Contingency) -> String {
    if g.is_empty() {
        return "-".into();
    }
    g.iter().map(|(s, o)| format!("{s}={o}")).collect::<Vec<_>>().join(",")
}

/// A total order of the document's steps (start and goals excluded). Seed 0
/// gives the canonical order: lowest-numbered ready step first. Other seeds
/// pick uniformly among the ready steps at each point.
pub fn linearize(doc: &PlanDocument, seed: u64) -> Vec<usize> {
    let nums: Vec<usize> = doc.steps.iter().map(|s| s.number).collect();
    let mut preds: BTreeMap<usize, BTreeSet<usize>> = nums.iter().map(|&n| (n, BTreeSet::new())).collect();
    let mut add = |a: usize, b: usize| {
        if a != b && a != 0 && preds.contains_key(&a) {
            if let Some(p) = preds.get_mut(&b) {
                p.insert(a);
            }
        }
    };
    for &(a, b) in &doc.order {
        add(a, b);
    }
    for s in &doc.steps {
        for l in &s.links {
            add(l.producer, s.number);
        }
    }
    let mut rng = StdRng::seed_from_u64(seed);
    let mut done: BTreeSet<usize> = BTreeSet::new();
    let mut out = Vec::with_capacity(nums.len());
    while out.len() < nums.len() {
        let ready: Vec<usize> = nums
            .iter()
            .copied()
            .filter(|n| !done.contains(n) && preds[n].iter().all(|p| done.contains(p)))
            .collect();
        let Some(&first) = ready.first() else {
            // Cyclic orderings cannot be executed; keep what we have.
            break;
        };
        let pick = if seed == 0 {
            first
        } else {
            ready[rng.gen_range(0..ready.len())]
        };
        done.insert(pick);
        out.push(pick);
    }
    out
}

/// What the validator needs about one step, resolved against the domain.
enum Exec<'a> {
    Action {
        schema: &'a OperatorSchema,
        binding: BTreeMap<Var, Term>,
    },
    Decision {
        source: Symbol,
    },
}

struct Context<'a> {
    doc: &'a PlanDocument,
    problem: &'a Problem,
    registry: Registry,
    decided_by: BTreeMap<Symbol, usize>,
    steps: BTreeMap<usize, Exec<'a>>,
    constants: Vec<Symbol>,
}

impl<'a> Context<'a> {
    fn new(doc: &'a PlanDocument, problem: &'a Problem, domain: &'a Domain) -> Result<Self> {
        let mut registry = Registry::new();
        for s in &doc.sources {
            registry.insert(s.name.clone(), s.outcomes.clone());
        }
        for g in &problem.uncertain {
            registry.entry(g.source.clone()).or_insert_with(|| g.outcome_names());
        }
        let mut decided_by = BTreeMap::new();
        let mut steps = BTreeMap::new();
        let mut constants = BTreeSet::new();
        for step in &doc.steps {
            match &step.kind {
                DocStepKind::Decision { source } => {
                    decided_by.insert(source.clone(), step.number);
                    steps.insert(step.number, Exec::Decision { source: source.clone() });
                }
                DocStepKind::Action { name, args } => {
                    let schema = domain
                        .operator(name)
                        .ok_or_else(|| Error::UnknownOperator(name.to_string()))?;
                    if schema.params.len() != args.len() {
                        return Err(Error::Mismatch(format!(
                            "step {}: {name} takes {} arguments",
                            step.number,
                            schema.params.len()
                        )));
                    }
                    let mut binding = BTreeMap::new();
                    for (p, a) in schema.params.iter().zip(args) {
                        if !a.is_ground() {
                            return Err(Error::Mismatch(format!(
                                "step {}: argument {a} is not ground",
                                step.number
                            )));
                        }
                        binding.insert(p.clone(), a.clone());
                    }
                    let mut minted: Vec<&Symbol> = doc
                        .sources
                        .iter()
                        .filter(|s| s.origin == step.number)
                        .map(|s| &s.name)
                        .collect();
                    minted.sort();
                    let declared = schema.sources();
                    if minted.len() != declared.len() {
                        return Err(Error::Mismatch(format!(
                            "step {}: {name} introduces {} sources, document lists {}",
                            step.number,
                            declared.len(),
                            minted.len()
                        )));
                    }
                    for ((v, _), s) in declared.into_iter().zip(minted) {
                        binding.insert(v, Term::Const(s.clone()));
                    }
                    for a in args {
                        if let Term::Const(c) = a {
                            constants.insert(c.clone());
                        }
                    }
                    steps.insert(step.number, Exec::Action { schema, binding });
                }
            }
        }
        for l in problem.known.iter().chain(
            problem
                .uncertain
                .iter()
                .flat_map(|g| g.outcomes.iter().flat_map(|(_, ls)| ls)),
        ) {
            for t in &l.atom.args {
                if let Term::Const(c) = t {
                    constants.insert(c.clone());
                }
            }
        }
        Ok(Context {
            doc,
            problem,
            registry,
            decided_by,
            steps,
            constants: constants.into_iter().collect(),
        })
    }

    fn initial_state(&self, gamma: &Contingency) -> WorldState {
        let mut st = WorldState::default();
        let mut apply = |l: &Literal| {
            if l.positive {
                st.facts.insert(l.atom.clone());
            } else {
                st.facts.remove(&l.atom);
            }
        };
        self.problem.known.iter().for_each(&mut apply);
        for g in &self.problem.uncertain {
            if let Some((_, lits)) = g.outcomes.iter().find(|(o, _)| gamma.get(&g.source) == Some(o)) {
                lits.iter().for_each(&mut apply);
            }
        }
        st
    }

    /// Required/forbidden under the agent's decisions, falling back to the
    /// true outcome for sources not yet decided. `Err` names a source that
    /// no decision step settles.
    fn classify(
        &self,
        labels: &LabelSet,
        gamma: &Contingency,
        decided: &BTreeMap<Symbol, Symbol>,
    ) -> std::result::Result<(bool, bool), Symbol> {
        let mut view = Contingency::new();
        for s in labels.sources() {
            if !self.decided_by.contains_key(&s) {
                return Err(s);
            }
            let v = decided.get(&s).or_else(|| gamma.get(&s)).cloned();
            if let Some(v) = v {
                view.insert(s, v);
            }
        }
        Ok((labels.required(&view), labels.forbidden(&view)))
    }

    fn execute(&self, gamma: &Contingency, order: &[usize], seed: u64) -> Trace {
        let mut st = self.initial_state(gamma);
        let mut decided: BTreeMap<Symbol, Symbol> = BTreeMap::new();
        let mut executed = Vec::new();
        let finish = |verdict, executed, decided| Trace {
            contingency: gamma.clone(),
            seed,
            executed,
            decisions: decided,
            verdict,
        };
        for &n in order {
            let step = self
                .doc
                .steps
                .iter()
                .find(|s| s.number == n)
                .expect("order lists document steps");
            let (required, forbidden) = match self.classify(&step.labels, gamma, &decided) {
                Ok(c) => c,
                Err(source) => return finish(Verdict::Undecidable { step: n, source }, executed, decided),
            };
            if required && forbidden {
                return finish(Verdict::ForbiddenStep { step: n }, executed, decided);
            }
            if !required || forbidden {
                continue;
            }
            executed.push(n);
            match &self.steps[&n] {
                Exec::Decision { source } => {
                    // The agent can only test what it has observed.
                    let fired = step.rules.iter().find(|r| {
                        r.antecedent
                            .iter()
                            .all(|l| st.known.contains(&l.atom.fact()) && st.holds(l))
                    });
                    match fired {
                        Some(r) => {
                            decided.insert(source.clone(), r.outcome.clone());
                        }
                        None => return finish(Verdict::NoRuleMatched { step: n }, executed, decided),
                    }
                }
                Exec::Action { schema, binding } => {
                    let pre = schema.precondition.literals();
                    if !pre.iter().all(|l| st.holds(&ground(l, binding))) {
                        return finish(Verdict::PreconditionFailure { step: n }, executed, decided);
                    }
                    st = self.apply(schema, binding, &st, gamma);
                }
            }
        }
        let verdict = if self.goal_holds(&st) {
            Verdict::Success
        } else {
            Verdict::GoalUnsatisfied
        };
        finish(verdict, executed, decided)
    }

    /// Fires every effect whose secondary precondition holds in `st`, over
    /// all values of the effect's free variables; deletions before additions.
    fn apply(
        &self,
        schema: &OperatorSchema,
        binding: &BTreeMap<Var, Term>,
        st: &WorldState,
        gamma: &Contingency,
    ) -> WorldState {
        let mut adds = Vec::new();
        let mut dels = Vec::new();
        let mut observed = Vec::new();
        for eff in &schema.effects {
            let free: Vec<Var> = schema.free_effect_vars(eff).into_iter().collect();
            for values in assignments(free.len(), &self.constants) {
                let mut b = binding.clone();
                for (v, c) in free.iter().zip(values) {
                    b.insert(v.clone(), Term::Const(c));
                }
                let fires = eff.secondary.leaves().iter().all(|c| match c {
                    Condition::Lit(l) => st.holds(&ground(l, &b)),
                    Condition::Unknown { source, outcome } => match subst(source, &b) {
                        Term::Const(s) => gamma.get(&s) == Some(outcome),
                        Term::Var(_) => false,
                    },
                    _ => true,
                });
                if !fires {
                    continue;
                }
                for l in &eff.post {
                    let g = ground(l, &b);
                    if g.atom.know_if {
                        observed.push(g.atom.fact());
                    } else if g.positive {
                        adds.push(g.atom);
                    } else {
                        dels.push(g.atom);
                    }
                }
            }
        }
        let mut next = st.clone();
        for a in dels {
            next.facts.remove(&a);
        }
        for a in adds {
            next.facts.insert(a);
        }
        next.known.extend(observed);
        next
    }

    /// Goal variables are existential.
    fn goal_holds(&self, st: &WorldState) -> bool {
        let lits = self.problem.goal.literals();
        let vars: Vec<Var> = self.problem.goal.vars().into_iter().collect();
        assignments(vars.len(), &self.constants).into_iter().any(|values| {
            let b: BTreeMap<Var, Term> = vars.iter().cloned().zip(values.into_iter().map(Term::Const)).collect();
            lits.iter().all(|l| st.holds(&ground(l, &b)))
        })
    }
}

fn subst(t: &Term, b: &BTreeMap<Var, Term>) -> Term {
    match t {
        Term::Var(v) => b.get(v).cloned().unwrap_or_else(|| t.clone()),
        Term::Const(_) => t.clone(),
    }
}

fn ground(l: &Literal, b: &BTreeMap<Var, Term>) -> Literal {
    l.map_terms(&mut |t| subst(t, b))
}

fn assignments(n: usize, universe: &[Symbol]) -> Vec<Vec<Symbol>> {
    let mut out = vec![Vec::new()];
    for _ in 0..n {
        out = out
            .into_iter()
            .flat_map(|prefix| {
                universe.iter().map(move |c| {
                    let mut p = prefix.clone();
                    p.push(c.clone());
                    p
                })
            })
            .collect();
    }
    out
}

/// Runs every contingency over the canonical order plus `samples` seeded
/// random linearizations (seeds `seed+1 ..= seed+samples`).
pub fn validate(
    doc: &PlanDocument,
    problem: &Problem,
    domain: &Domain,
    samples: usize,
    seed: u64,
) -> Result<ValidationReport> {
    let ctx = Context::new(doc, problem, domain)?;
    let names: Vec<Symbol> = ctx.registry.keys().cloned().collect();
    let contingencies = crate::labels::contingencies_over(&names, &ctx.registry);
    let mut seeds = vec![0u64];
    seeds.extend((1..=samples as u64).map(|k| seed.wrapping_add(k).max(1)));
    let orders: Vec<(u64, Vec<usize>)> = seeds.into_iter().map(|s| (s, linearize(doc, s))).collect();
    let mut report = ValidationReport::default();
    for gamma in &contingencies {
        for (s, order) in &orders {
            report.trials.push(ctx.execute(gamma, order, *s));
        }
    }
    Ok(report)
}

/// The document with step `n` removed, along with its links and orderings.
pub fn delete_step(doc: &PlanDocument, n: usize) -> PlanDocument {
    let mut out = doc.clone();
    out.steps.retain(|s| s.number != n);
    for s in &mut out.steps {
        s.links.retain(|l| l.producer != n);
    }
    for g in &mut out.goals {
        g.links.retain(|l| l.producer != n);
    }
    out.order.retain(|&(a, b)| a != n && b != n);
    out
}

#[derive(Clone, Debug, Default)]
pub struct MutationReport {
    pub total: usize,
    pub killed: usize,
    /// Step numbers whose deletion went unnoticed.
    pub survivors: Vec<usize>,
}

impl MutationReport {
    pub fn kill_rate(&self) -> f64 {
        if self.total == 0 {
            1.0
        } else {
            self.killed as f64 / self.total as f64
        }
    }
}

/// Deletes each non-start step in turn; a mutant is killed when validation
/// reports it unsound or rejects it outright.
pub fn mutation_test(
    doc: &PlanDocument,
    problem: &Problem,
    domain: &Domain,
    samples: usize,
    seed: u64,
) -> MutationReport {
    let mut r = MutationReport::default();
    for s in &doc.steps {
        r.total += 1;
        let mutant = delete_step(doc, s.number);
        match validate(&mutant, problem, domain, samples, seed) {
            Ok(rep) if rep.is_sound() => r.survivors.push(s.number),
            _ => r.killed += 1,
        }
    }
    r
}

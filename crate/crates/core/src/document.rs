//! Text form of a finished plan: rendering, parsing, and a normal form for
//! comparing plans up to step numbering and generated names.
//!
//! ```text
//! Initial: (AT START)
//! When [TRAFFICOS: BAD] (TRAFFIC-BAD)
//! Source: TRAFFICOS 0 (GOOD BAD)
//!
//! Step 1 (2): (TAKE-WESTERN)
//!   YES: [TRAFFICOS: GOOD]
//!   NO : [TRAFFICOS: BAD]
//!   0 -> (NOT (TRAFFIC-BAD))  NO : [TRAFFICOS: BAD]
//!
//! Order: 1<2
//! Goal: (AT EVANSTON)
//!
//! GOAL
//!   YES: [TRAFFICOS: GOOD]
//!   1 -> (AT EVANSTON)
//!
//! Complete!
//! ```

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;

use crate::error::{Error, Result};
use crate::labels::{Brackets, LabelMap, LabelSet};
use crate::ordering::StepId;
use crate::plan::{Consumer, DecisionRule, Plan, Producer, StepKind, START};
use crate::syntax::{parse_condition, parse_literals, Condition, Literal, Symbol, Term};

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum DocStepKind {
    Action { name: Symbol, args: Vec<Term> },
    Decision { source: Symbol },
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum LinkTarget {
    Enabling,
    /// Secondary precondition of the step's effect with these postconditions.
    Secondary(Vec<Literal>),
    /// Negated secondary precondition of the effect with these postconditions.
    Preserve(Vec<Literal>),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DocLink {
    /// Step number of the producer; 0 is the start step.
    pub producer: usize,
    pub condition: Literal,
    pub target: LinkTarget,
    pub negative: LabelMap,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DocStep {
    pub number: usize,
    pub created: usize,
    pub kind: DocStepKind,
    pub labels: LabelSet,
    pub rules: Vec<DecisionRule>,
    pub links: Vec<DocLink>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DocGoal {
    pub labels: LabelSet,
    pub links: Vec<DocLink>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DocSource {
    pub name: Symbol,
    /// Step number that minted the source; 0 for the initial state.
    pub origin: usize,
    pub outcomes: Vec<Symbol>,
}

#[derive(Clone, Debug, PartialEq, Eq, Default)]
pub struct PlanDocument {
    pub known: Vec<Literal>,
    pub uncertain: Vec<(Symbol, Symbol, Vec<Literal>)>,
    pub sources: Vec<DocSource>,
    pub steps: Vec<DocStep>,
    pub order: Vec<(usize, usize)>,
    pub goal: Vec<Literal>,
    pub goals: Vec<DocGoal>,
    pub complete: bool,
}

impl PlanDocument {
    /// Snapshot of a plan with steps numbered in topological order.
    pub fn from_plan(plan: &Plan) -> PlanDocument {
        let b = &plan.bindings;
        let order: Vec<StepId> = plan
            .ordering
            .topological_order()
            .into_iter()
            .filter(|&s| s != START && !plan.step(s).is_goal())
            .collect();
        let mut number: BTreeMap<StepId, usize> = BTreeMap::new();
        number.insert(START, 0);
        for (i, &s) in order.iter().enumerate() {
            number.insert(s, i + 1);
        }

        let mut doc = PlanDocument {
            complete: plan.open.is_empty() && crate::planner::detect_unsafe_links(plan).is_empty(),
            goal: plan.goal.clone(),
            ..Default::default()
        };
        for &e in &plan.step(START).effects {
            let eff = plan.effect(e);
            match &eff.unknown {
                None => doc.known.extend(eff.post.iter().cloned()),
                Some((s, o)) => doc.uncertain.push((s.clone(), o.clone(), eff.post.clone())),
            }
        }
        for (name, outcomes) in &plan.sources {
            let origin = plan.source_origin.get(name).copied().unwrap_or(START);
            doc.sources.push(DocSource {
                name: name.clone(),
                origin: number.get(&origin).copied().unwrap_or(0),
                outcomes: outcomes.clone(),
            });
        }

        let links_into = |t: StepId| -> Vec<DocLink> {
            let mut out = Vec::new();
            for l in &plan.links {
                let Producer::Effect(p) = l.producer else { continue };
                let crate::plan::LinkCondition::Lit(cond) = &l.condition else {
                    continue;
                };
                let target = match l.consumer {
                    Consumer::Step(s) if s == t => LinkTarget::Enabling,
                    Consumer::Secondary(f) if plan.effect(f).step == t => {
                        LinkTarget::Secondary(plan.effect(f).post.iter().map(|x| b.resolve_literal(x)).collect())
                    }
                    Consumer::Preserve(f) if plan.effect(f).step == t => {
                        LinkTarget::Preserve(plan.effect(f).post.iter().map(|x| b.resolve_literal(x)).collect())
                    }
                    _ => continue,
                };
                let mut negative = plan.effect(p).labels.negative.clone();
                let mut extra = LabelSet::default();
                extra.merge_negative(&l.seed.negative);
                merge_into(&mut negative, &extra.negative);
                out.push(DocLink {
                    producer: number[&plan.effect(p).step],
                    condition: b.resolve_literal(cond),
                    target,
                    negative,
                });
            }
            out
        };

        for &s in &order {
            let step = plan.step(s);
            let (kind, rules) = match &step.kind {
                StepKind::Action { schema, args } => (
                    DocStepKind::Action {
                        name: schema.clone(),
                        args: args.iter().map(|t| b.resolve(t)).collect(),
                    },
                    Vec::new(),
                ),
                StepKind::Decision { source } => (
                    DocStepKind::Decision { source: source.clone() },
                    plan.rules[source]
                        .iter()
                        .map(|r| DecisionRule {
                            outcome: r.outcome.clone(),
                            antecedent: dedup(r.antecedent.iter().map(|l| b.resolve_literal(l)).collect()),
                        })
                        .collect(),
                ),
                _ => unreachable!("start and goal steps are not numbered"),
            };
            doc.steps.push(DocStep {
                number: number[&s],
                created: step.created,
                kind,
                labels: step.labels.clone(),
                rules,
                links: links_into(s),
            });
        }
        let mut pairs = BTreeSet::new();
        for &(a, c) in plan.ordering.pairs() {
            if let (Some(&x), Some(&y)) = (number.get(&a), number.get(&c)) {
                if x != 0 {
                    pairs.insert((x, y));
                }
            }
        }
        doc.order = pairs.into_iter().collect();
        for g in plan.goal_steps() {
            doc.goals.push(DocGoal {
                labels: plan.step(g).labels.clone(),
                links: links_into(g),
            });
        }
        doc
    }

    pub fn render(&self) -> String {
        let mut s = String::new();
        if !self.known.is_empty() {
            let _ = writeln!(s, "Initial: {}", join(&self.known));
        }
        for (src, o, lits) in &self.uncertain {
            let _ = writeln!(s, "When [{src}: {o}] {}", join(lits));
        }
        for src in &self.sources {
            let outs: Vec<&str> = src.outcomes.iter().map(Symbol::as_str).collect();
            let _ = writeln!(s, "Source: {} {} ({})", src.name, src.origin, outs.join(" "));
        }
        for step in &self.steps {
            s.push('\n');
            let head = match &step.kind {
                DocStepKind::Action { name, args } => {
                    let mut h = format!("({name}");
                    for a in args {
                        let _ = write!(h, " {a}");
                    }
                    h.push(')');
                    h
                }
                DocStepKind::Decision { source } => format!("(DECIDE {source})"),
            };
            let _ = writeln!(s, "Step {} ({}): {head}", step.number, step.created);
            render_labels(&mut s, &step.labels);
            for r in &step.rules {
                let mut ante = String::from("(AND");
                for l in &r.antecedent {
                    let _ = write!(ante, " {l}");
                }
                let source = match &step.kind {
                    DocStepKind::Decision { source } => source,
                    _ => unreachable!(),
                };
                let _ = writeln!(s, "  {ante} T) => [{source}: {}]", r.outcome);
            }
            for l in &step.links {
                render_link(&mut s, l);
            }
        }
        s.push('\n');
        if !self.order.is_empty() {
            let pairs: Vec<String> = self.order.iter().map(|(a, b)| format!("{a}<{b}")).collect();
            let _ = writeln!(s, "Order: {}", pairs.join(" "));
        }
        let goal = Condition::from_literals(self.goal.clone());
        let _ = writeln!(s, "Goal: {goal}");
        for g in &self.goals {
            s.push('\n');
            s.push_str("GOAL\n");
            render_labels(&mut s, &g.labels);
            for l in &g.links {
                render_link(&mut s, l);
            }
        }
        s.push('\n');
        s.push_str(if self.complete { "Complete!\n" } else { "Incomplete\n" });
        s
    }

    pub fn parse(text: &str) -> Result<PlanDocument> {
        let mut doc = PlanDocument::default();
        let mut block = Block::None;
        for (i, raw) in text.lines().enumerate() {
            let line_no = i + 1;
            let err = |msg: &str| Error::Document {
                line: line_no,
                msg: msg.to_string(),
            };
            let wrap = |e: Error| Error::Document {
                line: line_no,
                msg: e.to_string(),
            };
            let line = raw.trim();
            if line.is_empty() {
                continue;
            }
            if let Some(rest) = line.strip_prefix("Initial:") {
                doc.known = parse_literals(rest).map_err(wrap)?;
            } else if let Some(rest) = line.strip_prefix("When ") {
                let (labels, rest) = split_brackets(rest).ok_or_else(|| err("malformed label"))?;
                let mut it = labels.into_iter();
                let (src, outs) = it.next().ok_or_else(|| err("missing label"))?;
                let o = outs.into_iter().next().ok_or_else(|| err("empty label"))?;
                doc.uncertain.push((src, o, parse_literals(rest).map_err(wrap)?));
            } else if let Some(rest) = line.strip_prefix("Source:") {
                let (head, outs) = rest.split_once('(').ok_or_else(|| err("missing outcome list"))?;
                let mut words = head.split_whitespace();
                let name = words.next().ok_or_else(|| err("missing source name"))?;
                let origin = words
                    .next()
                    .and_then(|w| w.parse().ok())
                    .ok_or_else(|| err("missing source origin"))?;
                doc.sources.push(DocSource {
                    name: Symbol::new(name),
                    origin,
                    outcomes: outs.trim_end_matches(')').split_whitespace().map(Symbol::new).collect(),
                });
            } else if let Some(rest) = line.strip_prefix("Step ") {
                let (nums, head) = rest.split_once(':').ok_or_else(|| err("malformed step line"))?;
                let (n, c) = nums.split_once('(').ok_or_else(|| err("missing creation number"))?;
                let number = n.trim().parse().map_err(|_| err("bad step number"))?;
                let created = c
                    .trim()
                    .trim_end_matches(')')
                    .parse()
                    .map_err(|_| err("bad creation number"))?;
                let form = crate::sexpr::read_one(head).map_err(wrap)?;
                let items = form.as_list().ok_or_else(|| err("step must be a list"))?;
                let name = items
                    .first()
                    .and_then(|x| x.as_atom())
                    .ok_or_else(|| err("missing step name"))?;
                let args: Vec<Term> = items[1..]
                    .iter()
                    .map(|x| x.as_atom().map(Term::parse).ok_or_else(|| err("bad argument")))
                    .collect::<Result<_>>()?;
                let kind = if name.eq_ignore_ascii_case("DECIDE") && args.len() == 1 {
                    match &args[0] {
                        Term::Const(source) => DocStepKind::Decision { source: source.clone() },
                        Term::Var(_) => return Err(err("decision on a variable")),
                    }
                } else {
                    DocStepKind::Action {
                        name: Symbol::new(name),
                        args,
                    }
                };
                doc.steps.push(DocStep {
                    number,
                    created,
                    kind,
                    labels: LabelSet::default(),
                    rules: Vec::new(),
                    links: Vec::new(),
                });
                block = Block::Step;
            } else if let Some(rest) = line.strip_prefix("Order:") {
                for pair in rest.split_whitespace() {
                    let (a, b) = pair.split_once('<').ok_or_else(|| err("malformed ordering"))?;
                    let a = a.parse().map_err(|_| err("bad ordering step"))?;
                    let b = b.parse().map_err(|_| err("bad ordering step"))?;
                    doc.order.push((a, b));
                }
            } else if let Some(rest) = line.strip_prefix("Goal:") {
                doc.goal = parse_condition(rest).map_err(wrap)?.literals();
                block = Block::None;
            } else if line == "GOAL" {
                doc.goals.push(DocGoal {
                    labels: LabelSet::default(),
                    links: Vec::new(),
                });
                block = Block::Goal;
            } else if line == "Complete!" {
                doc.complete = true;
            } else if line == "Incomplete" {
                doc.complete = false;
            } else if let Some(rest) = line.strip_prefix("YES:") {
                let labels = parse_brackets(rest).ok_or_else(|| err("malformed label"))?;
                current_labels(&mut doc, &block)
                    .ok_or_else(|| err("label outside a block"))?
                    .positive = labels;
            } else if let Some(rest) = line.strip_prefix("NO :") {
                let labels = parse_brackets(rest).ok_or_else(|| err("malformed label"))?;
                current_labels(&mut doc, &block)
                    .ok_or_else(|| err("label outside a block"))?
                    .negative = labels;
            } else if line.contains(" => ") {
                let (ante, out) = line.split_once(" => ").unwrap();
                let ante = ante.trim();
                let inner = ante
                    .strip_prefix("(AND")
                    .and_then(|x| x.strip_suffix("T)"))
                    .ok_or_else(|| err("malformed rule"))?;
                let labels = parse_brackets(out).ok_or_else(|| err("malformed rule outcome"))?;
                let outcome = labels
                    .into_values()
                    .next()
                    .and_then(|o| o.into_iter().next())
                    .ok_or_else(|| err("rule without outcome"))?;
                let Some(step) = doc.steps.last_mut().filter(|_| matches!(block, Block::Step)) else {
                    return Err(err("rule outside a step"));
                };
                step.rules.push(DecisionRule {
                    outcome,
                    antecedent: parse_literals(inner).map_err(wrap)?,
                });
            } else if line.contains(" -> ") {
                let link = parse_link(line).map_err(|m| err(&m))?;
                match block {
                    Block::Step => doc.steps.last_mut().unwrap().links.push(link),
                    Block::Goal => doc.goals.last_mut().unwrap().links.push(link),
                    Block::None => return Err(err("link outside a block")),
                }
            } else {
                return Err(err(&format!("unrecognized line `{line}`")));
            }
        }
        Ok(doc)
    }

    pub fn source(&self, name: &Symbol) -> Option<&DocSource> {
        self.sources.iter().find(|s| &s.name == name)
    }

    pub fn decisions(&self) -> impl Iterator<Item = &DocStep> {
        self.steps
            .iter()
            .filter(|s| matches!(s.kind, DocStepKind::Decision { .. }))
    }
}

enum Block {
    None,
    Step,
    Goal,
}

fn current_labels<'a>(doc: &'a mut PlanDocument, block: &Block) -> Option<&'a mut LabelSet> {
    match block {
        Block::Step => doc.steps.last_mut().map(|s| &mut s.labels),
        Block::Goal => doc.goals.last_mut().map(|g| &mut g.labels),
        Block::None => None,
    }
}

fn merge_into(into: &mut LabelMap, from: &LabelMap) {
    for (s, outs) in from {
        into.entry(s.clone()).or_default().extend(outs.iter().cloned());
    }
}

fn dedup(lits: Vec<Literal>) -> Vec<Literal> {
    let mut out: Vec<Literal> = Vec::new();
    for l in lits {
        if !out.contains(&l) {
            out.push(l);
        }
    }
    out
}

fn join(lits: &[Literal]) -> String {
    lits.iter().map(|l| l.to_string()).collect::<Vec<_>>().join(" ")
}

fn render_labels(s: &mut String, labels: &LabelSet) {
    if !labels.positive.is_empty() {
        let _ = writeln!(s, "  YES: {}", Brackets(&labels.positive));
    }
    if !labels.negative.is_empty() {
        let _ = writeln!(s, "  NO : {}", Brackets(&labels.negative));
    }
}

fn render_link(s: &mut String, l: &DocLink) {
    let _ = write!(s, "  {} -> {}", l.producer, l.condition);
    match &l.target {
        LinkTarget::Enabling => {}
        LinkTarget::Secondary(post) => {
            let _ = write!(s, " :for {}", join(post));
        }
        LinkTarget::Preserve(post) => {
            let _ = write!(s, " :preserve {}", join(post));
        }
    }
    if !l.negative.is_empty() {
        let _ = write!(s, "  NO : {}", Brackets(&l.negative));
    }
    s.push('\n');
}

fn parse_link(line: &str) -> std::result::Result<DocLink, String> {
    let (body, negative) = match line.split_once("  NO : ") {
        Some((b, n)) => (b, parse_brackets(n).ok_or("malformed link label")?),
        None => (line, LabelMap::new()),
    };
    let (producer, rest) = body.split_once(" -> ").ok_or("malformed link")?;
    let producer = producer.trim().parse().map_err(|_| "bad producer number")?;
    let (cond, target) = if let Some((c, post)) = rest.split_once(" :for ") {
        (
            c,
            LinkTarget::Secondary(parse_literals(post).map_err(|e| e.to_string())?),
        )
    } else if let Some((c, post)) = rest.split_once(" :preserve ") {
        (
            c,
            LinkTarget::Preserve(parse_literals(post).map_err(|e| e.to_string())?),
        )
    } else {
        (rest, LinkTarget::Enabling)
    };
    let mut lits = parse_literals(cond).map_err(|e| e.to_string())?;
    if lits.len() != 1 {
        return Err("a link carries exactly one condition".into());
    }
    Ok(DocLink {
        producer,
        condition: lits.remove(0),
        target,
        negative,
    })
}

/// Parses `[S: a b][T: c]`.
pub fn parse_brackets(text: &str) -> Option<LabelMap> {
    let mut out = LabelMap::new();
    let mut rest = text.trim();
    while !rest.is_empty() {
        let inner = rest.strip_prefix('[')?;
        let (body, tail) = inner.split_once(']')?;
        let (src, outs) = body.split_once(':')?;
        let set: BTreeSet<Symbol> = outs.split_whitespace().map(Symbol::new).collect();
        if set.is_empty() {
            return None;
        }
        out.entry(Symbol::new(src.trim())).or_default().extend(set);
        rest = tail.trim_start();
    }
    Some(out)
}

/// Leading `[S: o]` labels followed by free text.
fn split_brackets(text: &str) -> Option<(LabelMap, &str)> {
    let end = text.rfind(']')?;
    Some((parse_brackets(&text[..=end])?, &text[end + 1..]))
}

/// Unbound variable names in order of first appearance.
fn rename_vars(text: &str) -> String {
    let mut names: BTreeMap<String, String> = BTreeMap::new();
    let mut out = String::new();
    let mut chars = text.chars().peekable();
    while let Some(c) = chars.next() {
        if c == '?' {
            let mut name = String::new();
            while let Some(&n) = chars.peek() {
                if n.is_whitespace() || n == '(' || n == ')' {
                    break;
                }
                name.push(n);
                chars.next();
            }
            let k = names.len();
            let canon = names.entry(name).or_insert_with(|| format!("V{k}"));
            out.push('?');
            out.push_str(canon);
        } else {
            out.push(c);
        }
    }
    out
}

/// Canonical text of a plan document: invariant under step numbering,
/// creation order, ordering constraints, generated source names and
/// variable names.
///
/// Steps are coloured by their content and refined by the colours of the
/// steps they exchange links with, the goal blocks they support and the
/// steps that mint the sources their labels mention. Remaining ties are
/// broken every possible way and the smallest rendering wins.
pub fn normalize(doc: &PlanDocument) -> String {
    // Sources minted by operators are renamed after their step.
    let minted: BTreeMap<Symbol, usize> = doc
        .sources
        .iter()
        .filter(|s| s.origin != 0)
        .map(|s| (s.name.clone(), s.origin))
        .collect();
    let mut colour: BTreeMap<usize, String> = BTreeMap::new();
    colour.insert(0, "START".into());
    for s in &doc.steps {
        colour.insert(s.number, head_name(s));
    }
    canonical(doc, &minted, colour)
}

fn head_name(s: &DocStep) -> String {
    match &s.kind {
        DocStepKind::Action { name, .. } => name.to_string(),
        DocStepKind::Decision { .. } => "DECIDE".into(),
    }
}

/// Refines `colour` until stable; colours are rewritten to short ids.
fn refine(
    doc: &PlanDocument,
    minted: &BTreeMap<Symbol, usize>,
    mut colour: BTreeMap<usize, String>,
) -> BTreeMap<usize, String> {
    let mut classes = 0;
    loop {
        let src = |s: &Symbol| match minted.get(s) {
            Some(n) => format!("<{}>", colour[n]),
            None => s.to_string(),
        };
        let num = |n: usize| colour.get(&n).cloned().unwrap_or_else(|| "?".into());
        let mut next: BTreeMap<usize, String> = BTreeMap::new();
        next.insert(0, "START".into());
        for s in &doc.steps {
            let mut uses: Vec<String> = doc
                .steps
                .iter()
                .flat_map(|t| {
                    t.links
                        .iter()
                        .filter(|l| l.producer == s.number)
                        .map(|l| format!("{}->{}", l.condition, colour[&t.number]))
                })
                .chain(doc.goals.iter().flat_map(|g| {
                    g.links
                        .iter()
                        .filter(|l| l.producer == s.number)
                        .map(|l| format!("{}->goal{}", l.condition, labels_text(&g.labels, &src)))
                }))
                .collect();
            uses.sort();
            let own: Vec<String> = minted
                .iter()
                .filter(|(_, &n)| n == s.number)
                .map(|(name, _)| {
                    let deciders: Vec<String> = doc
                        .steps
                        .iter()
                        .filter(|d| matches!(&d.kind, DocStepKind::Decision { source } if source == name))
                        .map(|d| colour[&d.number].clone())
                        .collect();
                    deciders.join("/")
                })
                .collect();
            let text = format!(
                "{}|{}|{}|{}",
                colour[&s.number],
                step_text(s, &src, &num, true),
                uses.join(","),
                own.join(",")
            );
            next.insert(s.number, rename_vars(&text));
        }
        let mut distinct: Vec<&String> = next.values().collect();
        distinct.sort();
        distinct.dedup();
        let count = distinct.len();
        let ids: BTreeMap<usize, String> = next
            .iter()
            .map(|(&k, v)| {
                let i = distinct.binary_search(&v).unwrap();
                (k, if k == 0 { "START".to_string() } else { format!("c{i}") })
            })
            .collect();
        colour = ids;
        if count == classes {
            return colour;
        }
        classes = count;
    }
}

fn canonical(doc: &PlanDocument, minted: &BTreeMap<Symbol, usize>, colour: BTreeMap<usize, String>) -> String {
    let colour = refine(doc, minted, colour);
    let mut members: BTreeMap<&String, Vec<usize>> = BTreeMap::new();
    for (&n, c) in &colour {
        if n != 0 {
            members.entry(c).or_default().push(n);
        }
    }
    match members.values().find(|v| v.len() > 1) {
        None => {
            let mut ranked: Vec<&DocStep> = doc.steps.iter().collect();
            ranked.sort_by(|a, b| colour[&a.number].cmp(&colour[&b.number]));
            let mut canon: BTreeMap<usize, usize> = BTreeMap::new();
            canon.insert(0, 0);
            for (i, s) in ranked.iter().enumerate() {
                canon.insert(s.number, i + 1);
            }
            render_canonical(doc, minted, &ranked, &canon)
        }
        Some(tied) => tied
            .iter()
            .map(|&n| {
                let mut c = colour.clone();
                let v = c.get_mut(&n).unwrap();
                v.push('*');
                canonical(doc, minted, c)
            })
            .min()
            .unwrap(),
    }
}

fn render_canonical(
    doc: &PlanDocument,
    minted: &BTreeMap<Symbol, usize>,
    ranked: &[&DocStep],
    canon: &BTreeMap<usize, usize>,
) -> String {
    let step_name = |n: usize| -> String {
        doc.steps
            .iter()
            .find(|s| s.number == n)
            .map(|s| match &s.kind {
                DocStepKind::Action { name, .. } => name.to_string(),
                DocStepKind::Decision { source } => format!("DECIDE-{source}"),
            })
            .unwrap_or_else(|| "START".into())
    };
    // Index among the sources minted by the same step, when there are several.
    let suffix = |s: &Symbol, n: usize| -> String {
        let mut same: Vec<&Symbol> = minted.iter().filter(|(_, &m)| m == n).map(|(k, _)| k).collect();
        same.sort();
        if same.len() > 1 {
            (same.iter().position(|k| *k == s).unwrap() + 1).to_string()
        } else {
            String::new()
        }
    };
    let src_name = |s: &Symbol| -> String {
        match minted.get(s) {
            Some(&n) => format!("{}{}S{}", step_name(n), canon[&n], suffix(s, n)),
            None => s.to_string(),
        }
    };
    let num = |n: usize| canon.get(&n).map(|c| c.to_string()).unwrap_or_else(|| format!("#{n}"));

    let mut out = String::new();
    let mut known: Vec<String> = doc.known.iter().map(|l| l.to_string()).collect();
    known.sort();
    let _ = writeln!(out, "initial {}", known.join(" "));
    let mut uncertain: Vec<String> = doc
        .uncertain
        .iter()
        .map(|(s, o, l)| {
            let mut ls: Vec<String> = l.iter().map(|x| x.to_string()).collect();
            ls.sort();
            format!("when {} {o} {}", src_name(s), ls.join(" "))
        })
        .collect();
    uncertain.sort();
    for u in uncertain {
        let _ = writeln!(out, "{u}");
    }
    let mut sources: Vec<String> = doc
        .sources
        .iter()
        .map(|s| {
            let mut outs: Vec<&str> = s.outcomes.iter().map(Symbol::as_str).collect();
            outs.sort();
            format!("source {} {}", src_name(&s.name), outs.join(" "))
        })
        .collect();
    sources.sort();
    for s in sources {
        let _ = writeln!(out, "{s}");
    }
    for s in ranked {
        let _ = writeln!(out, "step {} {}", num(s.number), step_text(s, &src_name, &num, true));
    }
    let mut goals: Vec<String> = doc
        .goals
        .iter()
        .map(|g| {
            let mut links: Vec<String> = g.links.iter().map(|l| link_text(l, &src_name, &num)).collect();
            links.sort();
            format!("goal {} {}", labels_text(&g.labels, &src_name), links.join(" "))
        })
        .collect();
    goals.sort();
    for g in goals {
        let _ = writeln!(out, "{g}");
    }
    let _ = writeln!(out, "{}", if doc.complete { "complete" } else { "incomplete" });
    rename_vars(&out)
}

fn labels_text(l: &LabelSet, src: &dyn Fn(&Symbol) -> String) -> String {
    format!("yes{} no{}", map_text(&l.positive, src), map_text(&l.negative, src))
}

fn map_text(m: &LabelMap, src: &dyn Fn(&Symbol) -> String) -> String {
    let mut parts: Vec<String> = m
        .iter()
        .map(|(s, outs)| {
            let o: Vec<&str> = outs.iter().map(Symbol::as_str).collect();
            format!("[{}: {}]", src(s), o.join(" "))
        })
        .collect();
    parts.sort();
    parts.concat()
}

fn link_text(l: &DocLink, src: &dyn Fn(&Symbol) -> String, num: &dyn Fn(usize) -> String) -> String {
    let target = match &l.target {
        LinkTarget::Enabling => String::new(),
        LinkTarget::Secondary(p) => {
            let mut v: Vec<String> = p.iter().map(|x| x.to_string()).collect();
            v.sort();
            format!(" for {}", v.join(" "))
        }
        LinkTarget::Preserve(p) => {
            let mut v: Vec<String> = p.iter().map(|x| x.to_string()).collect();
            v.sort();
            format!(" preserve {}", v.join(" "))
        }
    };
    format!(
        "{{{}->{}{} no{}}}",
        num(l.producer),
        l.condition,
        target,
        map_text(&l.negative, src)
    )
}

fn step_text(s: &DocStep, src: &dyn Fn(&Symbol) -> String, num: &dyn Fn(usize) -> String, with_links: bool) -> String {
    let head = match &s.kind {
        DocStepKind::Action { name, args } => {
            let a: Vec<String> = args.iter().map(|t| t.to_string()).collect();
            format!("({name}{}{})", if a.is_empty() { "" } else { " " }, a.join(" "))
        }
        DocStepKind::Decision { source } => format!("(DECIDE {})", src(source)),
    };
    let mut rules: Vec<String> = s
        .rules
        .iter()
        .map(|r| {
            let mut a: Vec<String> = r.antecedent.iter().map(|l| l.to_string()).collect();
            a.sort();
            a.dedup();
            format!("{}<=({})", r.outcome, a.join(" "))
        })
        .collect();
    rules.sort();
    let mut text = format!("{head} {} rules[{}]", labels_text(&s.labels, src), rules.join(" "));
    if with_links {
        let mut links: Vec<String> = s.links.iter().map(|l| link_text(l, src, num)).collect();
        links.sort();
        let _ = write!(text, " links[{}]", links.join(" "));
    } else {
        let mut conds: Vec<String> = s.links.iter().map(|l| l.condition.to_string()).collect();
        conds.sort();
        let _ = write!(text, " needs[{}]", conds.join(" "));
    }
    // drop variable identity from colours
    if !with_links {
        text = rename_vars(&text);
    }
    text
}

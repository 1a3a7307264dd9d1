//! Terms, literals, conditions and operator schemas, plus the reader and
//! printer for domain and problem files.
//!
//! Symbols are case-insensitive and stored upper-cased, so `(on ?x b)` and
//! `(ON ?X B)` denote the same literal.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::sexpr::{self, Pos, Sexp};

#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Symbol(Arc<str>);

impl Symbol {
    pub fn new(name: &str) -> Self {
        Symbol(Arc::from(name.to_ascii_uppercase()))
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl fmt::Debug for Symbol {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl fmt::Display for Symbol {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl From<&str> for Symbol {
    fn from(s: &str) -> Self {
        Symbol::new(s)
    }
}

/// A variable. Schema variables carry `id == 0`; instantiation renames them
/// apart by assigning fresh ids.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Var {
    pub name: Symbol,
    pub id: u32,
}

impl Var {
    pub fn new(name: &str) -> Self {
        Var {
            name: Symbol::new(name.trim_start_matches('?')),
            id: 0,
        }
    }
}

impl fmt::Debug for Var {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

impl fmt::Display for Var {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.id == 0 {
            write!(f, "?{}", self.name)
        } else {
            write!(f, "?{}-{}", self.name, self.id)
        }
    }
}

#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Term {
    Var(Var),
    Const(Symbol),
}

impl Term {
    pub fn parse(text: &str) -> Self {
        if let Some(name) = text.strip_prefix('?') {
            Term::Var(Var::new(name))
        } else {
            Term::Const(Symbol::new(text))
        }
    }

    pub fn as_var(&self) -> Option<&Var> {
        match self {
            Term::Var(v) => Some(v),
            Term::Const(_) => None,
        }
    }

    pub fn is_ground(&self) -> bool {
        matches!(self, Term::Const(_))
    }
}

impl fmt::Debug for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Term::Var(v) => write!(f, "{v}"),
            Term::Const(c) => write!(f, "{c}"),
        }
    }
}

/// `pred(args)`, or `know-if(pred(args))` when `know_if` is set.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Atom {
    pub pred: Symbol,
    pub args: Vec<Term>,
    pub know_if: bool,
}

impl Atom {
    pub fn new(pred: &str, args: &[&str]) -> Self {
        Atom {
            pred: Symbol::new(pred),
            args: args.iter().map(|a| Term::parse(a)).collect(),
            know_if: false,
        }
    }

    /// The knowledge goal `know-if(self)`.
    pub fn know_if(&self) -> Atom {
        Atom {
            know_if: true,
            ..self.clone()
        }
    }

    /// The fact a knowledge atom is about.
    pub fn fact(&self) -> Atom {
        Atom {
            know_if: false,
            ..self.clone()
        }
    }

    pub fn is_ground(&self) -> bool {
        self.args.iter().all(Term::is_ground)
    }

    pub fn map_terms(&self, f: &mut impl FnMut(&Term) -> Term) -> Atom {
        Atom {
            pred: self.pred.clone(),
            args: self.args.iter().map(&mut *f).collect(),
            know_if: self.know_if,
        }
    }

    fn fmt_fact(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}", self.pred)?;
        for a in &self.args {
            write!(f, " {a}")?;
        }
        f.write_str(")")
    }
}

impl fmt::Debug for Atom {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

impl fmt::Display for Atom {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.know_if {
            f.write_str("(KNOW-IF ")?;
            self.fmt_fact(f)?;
            f.write_str(")")
        } else {
            self.fmt_fact(f)
        }
    }
}

#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Literal {
    pub positive: bool,
    pub atom: Atom,
}

impl Literal {
    pub fn pos(atom: Atom) -> Self {
        Literal { positive: true, atom }
    }

    pub fn neg(atom: Atom) -> Self {
        Literal { positive: false, atom }
    }

    pub fn negate(&self) -> Literal {
        Literal {
            positive: !self.positive,
            atom: self.atom.clone(),
        }
    }

    pub fn is_ground(&self) -> bool {
        self.atom.is_ground()
    }

    pub fn map_terms(&self, f: &mut impl FnMut(&Term) -> Term) -> Literal {
        Literal {
            positive: self.positive,
            atom: self.atom.map_terms(f),
        }
    }

    pub fn vars(&self) -> impl Iterator<Item = &Var> {
        self.atom.args.iter().filter_map(Term::as_var)
    }
}

impl fmt::Debug for Literal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

impl fmt::Display for Literal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.positive {
            write!(f, "{}", self.atom)
        } else {
            write!(f, "(NOT {})", self.atom)
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Condition {
    True,
    Lit(Literal),
    And(Vec<Condition>),
    /// Marker of an uncertain context: holds iff `source` resolves to `outcome`.
    Unknown {
        source: Term,
        outcome: Symbol,
    },
}

impl Condition {
    /// Flattens nested conjunctions into their leaves, dropping `True`.
    pub fn leaves(&self) -> Vec<Condition> {
        let mut out = Vec::new();
        self.collect_leaves(&mut out);
        out
    }

    fn collect_leaves(&self, out: &mut Vec<Condition>) {
        match self {
            Condition::True => {}
            Condition::And(parts) => parts.iter().for_each(|p| p.collect_leaves(out)),
            leaf => out.push(leaf.clone()),
        }
    }

    pub fn literals(&self) -> Vec<Literal> {
        self.leaves()
            .into_iter()
            .filter_map(|c| match c {
                Condition::Lit(l) => Some(l),
                _ => None,
            })
            .collect()
    }

    pub fn unknowns(&self) -> Vec<(Term, Symbol)> {
        self.leaves()
            .into_iter()
            .filter_map(|c| match c {
                Condition::Unknown { source, outcome } => Some((source, outcome)),
                _ => None,
            })
            .collect()
    }

    pub fn contains_unknown(&self) -> bool {
        !self.unknowns().is_empty()
    }

    pub fn from_literals(lits: Vec<Literal>) -> Condition {
        match lits.len() {
            0 => Condition::True,
            1 => Condition::Lit(lits.into_iter().next().unwrap()),
            _ => Condition::And(lits.into_iter().map(Condition::Lit).collect()),
        }
    }

    pub fn map_terms(&self, f: &mut impl FnMut(&Term) -> Term) -> Condition {
        match self {
            Condition::True => Condition::True,
            Condition::Lit(l) => Condition::Lit(l.map_terms(f)),
            Condition::And(parts) => Condition::And(parts.iter().map(|p| p.map_terms(f)).collect()),
            Condition::Unknown { source, outcome } => Condition::Unknown {
                source: f(source),
                outcome: outcome.clone(),
            },
        }
    }

    fn vars_into(&self, out: &mut BTreeSet<Var>) {
        match self {
            Condition::True => {}
            Condition::Lit(l) => out.extend(l.vars().cloned()),
            Condition::And(parts) => parts.iter().for_each(|p| p.vars_into(out)),
            Condition::Unknown { source, .. } => {
                if let Term::Var(v) = source {
                    out.insert(v.clone());
                }
            }
        }
    }

    pub fn vars(&self) -> BTreeSet<Var> {
        let mut out = BTreeSet::new();
        self.vars_into(&mut out);
        out
    }
}

impl fmt::Display for Condition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Condition::True => f.write_str("(AND)"),
            Condition::Lit(l) => write!(f, "{l}"),
            Condition::And(parts) => {
                f.write_str("(AND")?;
                for p in parts {
                    write!(f, " {p}")?;
                }
                f.write_str(")")
            }
            Condition::Unknown { source, outcome } => write!(f, "(:UNKNOWN {source} {outcome})"),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct EffectSpec {
    pub secondary: Condition,
    pub post: Vec<Literal>,
}

impl EffectSpec {
    pub fn is_uncertain(&self) -> bool {
        self.secondary.contains_unknown()
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct OperatorSchema {
    pub name: Symbol,
    pub params: Vec<Var>,
    pub precondition: Condition,
    pub effects: Vec<EffectSpec>,
}

impl OperatorSchema {
    /// Uncertainty-source variables with the outcomes the schema declares for
    /// each, in first-use order.
    pub fn sources(&self) -> Vec<(Var, Vec<Symbol>)> {
        let mut out: Vec<(Var, Vec<Symbol>)> = Vec::new();
        for eff in &self.effects {
            for (source, outcome) in eff.secondary.unknowns() {
                let Term::Var(v) = source else { continue };
                match out.iter_mut().find(|(s, _)| *s == v) {
                    Some((_, outs)) => {
                        if !outs.contains(&outcome) {
                            outs.push(outcome);
                        }
                    }
                    None => out.push((v, vec![outcome])),
                }
            }
        }
        out
    }

    /// Variables used by effects that are neither parameters nor uncertainty
    /// sources.
    pub fn free_effect_vars(&self, effect: &EffectSpec) -> BTreeSet<Var> {
        let sources: BTreeSet<Var> = self.sources().into_iter().map(|(v, _)| v).collect();
        let mut vars = effect.secondary.vars();
        for l in &effect.post {
            vars.extend(l.vars().cloned());
        }
        vars.retain(|v| !self.params.contains(v) && !sources.contains(v));
        vars
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Domain {
    pub name: Symbol,
    pub operators: Vec<OperatorSchema>,
}

impl Domain {
    pub fn operator(&self, name: &Symbol) -> Option<&OperatorSchema> {
        self.operators.iter().find(|o| &o.name == name)
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct UncertainGroup {
    pub source: Symbol,
    pub outcomes: Vec<(Symbol, Vec<Literal>)>,
}

impl UncertainGroup {
    pub fn outcome_names(&self) -> Vec<Symbol> {
        self.outcomes.iter().map(|(o, _)| o.clone()).collect()
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Problem {
    pub name: Symbol,
    pub domain: Option<Symbol>,
    pub known: Vec<Literal>,
    pub uncertain: Vec<UncertainGroup>,
    pub goal: Condition,
}

// ---------------------------------------------------------------------------
// Reading

fn err(pos: Pos, msg: impl Into<String>) -> Error {
    Error::Parse { pos, msg: msg.into() }
}

fn keyword(s: &Sexp) -> Option<String> {
    s.as_atom().map(|a| a.trim_start_matches(':').to_ascii_uppercase())
}

fn list<'a>(s: &'a Sexp, what: &str) -> Result<&'a [Sexp]> {
    s.as_list()
        .ok_or_else(|| err(s.pos(), format!("expected {what}, found atom `{s}`")))
}

fn atom<'a>(s: &'a Sexp, what: &str) -> Result<&'a str> {
    s.as_atom()
        .ok_or_else(|| err(s.pos(), format!("expected {what}, found list")))
}

fn read_term(s: &Sexp) -> Result<Term> {
    let a = atom(s, "a term")?;
    if a.starts_with(':') || a == "?" {
        return Err(err(s.pos(), format!("`{a}` is not a term")));
    }
    Ok(Term::parse(a))
}

fn read_atom(s: &Sexp, allow_know_if: bool) -> Result<(bool, Atom)> {
    let items = list(s, "an atomic formula")?;
    let head = items.first().ok_or_else(|| err(s.pos(), "empty formula"))?;
    let pred = atom(head, "a predicate")?;
    if pred.starts_with('?') || pred.starts_with(':') {
        return Err(err(head.pos(), format!("`{pred}` is not a predicate")));
    }
    if pred.eq_ignore_ascii_case("know-if") {
        if !allow_know_if {
            return Err(err(s.pos(), "know-if may not be nested"));
        }
        if items.len() != 2 {
            return Err(err(s.pos(), "know-if takes exactly one condition"));
        }
        // know-if of a negated fact is the same knowledge goal
        let (_, inner) = read_literal_inner(&items[1], false)?;
        return Ok((true, inner.know_if()));
    }
    let args = items[1..].iter().map(read_term).collect::<Result<Vec<_>>>()?;
    Ok((
        true,
        Atom {
            pred: Symbol::new(pred),
            args,
            know_if: false,
        },
    ))
}

fn read_literal_inner(s: &Sexp, allow_know_if: bool) -> Result<(bool, Atom)> {
    if let Some(head) = s.head() {
        if head == "NOT" || head == ":NOT" {
            let items = s.as_list().unwrap();
            if items.len() != 2 {
                return Err(err(s.pos(), ":not takes exactly one literal"));
            }
            let (_, a) = read_atom(&items[1], allow_know_if)?;
            if a.know_if {
                return Err(err(s.pos(), "negated know-if is not allowed"));
            }
            return Ok((false, a));
        }
    }
    read_atom(s, allow_know_if)
}

fn read_literal(s: &Sexp) -> Result<Literal> {
    let (positive, atom) = read_literal_inner(s, true)?;
    Ok(Literal { positive, atom })
}

fn read_condition(s: &Sexp, allow_unknown: bool) -> Result<Condition> {
    match s.head().as_deref() {
        Some("AND" | ":AND") => {
            let parts = s.as_list().unwrap()[1..]
                .iter()
                .map(|p| read_condition(p, allow_unknown))
                .collect::<Result<Vec<_>>>()?;
            Ok(if parts.is_empty() {
                Condition::True
            } else {
                Condition::And(parts)
            })
        }
        Some(":UNKNOWN" | "UNKNOWN") => {
            if !allow_unknown {
                return Err(err(
                    s.pos(),
                    ":unknown may only appear in an effect's secondary precondition",
                ));
            }
            let items = s.as_list().unwrap();
            if items.len() != 3 {
                return Err(err(s.pos(), ":unknown takes a source and an outcome"));
            }
            let source = read_term(&items[1])?;
            let outcome = atom(&items[2], "an outcome symbol")?;
            if outcome.starts_with('?') {
                return Err(err(items[2].pos(), "outcome must be a constant symbol"));
            }
            Ok(Condition::Unknown {
                source,
                outcome: Symbol::new(outcome),
            })
        }
        Some(":WHEN" | "WHEN") => Err(err(s.pos(), ":when is only allowed in effects")),
        Some(_) => Ok(Condition::Lit(read_literal(s)?)),
        None if s.is_atom("T") => Ok(Condition::True),
        None => Err(err(s.pos(), format!("expected a condition, found `{s}`"))),
    }
}

fn read_postconditions(s: &Sexp) -> Result<Vec<Literal>> {
    match s.head().as_deref() {
        Some("AND" | ":AND") => s.as_list().unwrap()[1..].iter().map(read_literal).collect(),
        Some(":WHEN" | "WHEN") => Err(err(s.pos(), "nested :when is not allowed")),
        _ => Ok(vec![read_literal(s)?]),
    }
}

fn read_effects(s: &Sexp, out: &mut Vec<EffectSpec>, plain: &mut Vec<Literal>) -> Result<()> {
    match s.head().as_deref() {
        Some("AND" | ":AND") => {
            for part in &s.as_list().unwrap()[1..] {
                read_effects(part, out, plain)?;
            }
            Ok(())
        }
        Some(":WHEN" | "WHEN") => {
            let items = s.as_list().unwrap();
            let (cond, body) = match items.len() {
                3 => (&items[1], &items[2]),
                4 if items[2].is_atom(":effect") => (&items[1], &items[3]),
                _ => {
                    return Err(err(
                        s.pos(),
                        ":when takes a condition and an effect, optionally separated by :effect",
                    ))
                }
            };
            let secondary = read_condition(cond, true)?;
            let post = read_postconditions(body)?;
            if post.is_empty() {
                return Err(err(body.pos(), "an effect needs at least one postcondition"));
            }
            out.push(EffectSpec { secondary, post });
            Ok(())
        }
        _ => {
            plain.push(read_literal(s)?);
            Ok(())
        }
    }
}

/// Pulls `:key value` pairs out of a flat property list.
fn plist<'a>(items: &'a [Sexp], allowed: &[&str]) -> Result<BTreeMap<String, &'a Sexp>> {
    let mut out = BTreeMap::new();
    let mut i = 0;
    while i < items.len() {
        let key = keyword(&items[i])
            .filter(|_| items[i].as_atom().is_some_and(|a| a.starts_with(':')))
            .ok_or_else(|| err(items[i].pos(), format!("expected a keyword, found `{}`", items[i])))?;
        if !allowed.contains(&key.as_str()) {
            return Err(err(
                items[i].pos(),
                format!("unexpected keyword :{}", key.to_lowercase()),
            ));
        }
        let value = items
            .get(i + 1)
            .ok_or_else(|| err(items[i].pos(), format!("missing value for :{}", key.to_lowercase())))?;
        if out.insert(key.clone(), value).is_some() {
            return Err(err(items[i].pos(), format!("duplicate :{}", key.to_lowercase())));
        }
        i += 2;
    }
    Ok(out)
}

fn read_action(form: &Sexp) -> Result<OperatorSchema> {
    let items = list(form, "an action")?;
    let name_sexp = items.get(1).ok_or_else(|| err(form.pos(), "action without a name"))?;
    // both `(:action name ...)` and `(:action (name ?a ?b) ...)` are accepted
    let (name, mut params, props) = match name_sexp {
        Sexp::Atom(n, _) => (Symbol::new(n), Vec::new(), &items[2..]),
        Sexp::List(parts, p) => {
            let n = parts.first().ok_or_else(|| err(*p, "empty action head"))?;
            let params = parts[1..]
                .iter()
                .map(|t| match read_term(t)? {
                    Term::Var(v) => Ok(v),
                    Term::Const(c) => Err(err(t.pos(), format!("parameter `{c}` must be a variable"))),
                })
                .collect::<Result<Vec<_>>>()?;
            (Symbol::new(atom(n, "an action name")?), params, &items[2..])
        }
    };
    let props = plist(props, &["PARAMETERS", "PRECONDITION", "EFFECT"])?;
    if let Some(ps) = props.get("PARAMETERS") {
        for t in list(ps, "a parameter list")? {
            match read_term(t)? {
                Term::Var(v) => params.push(v),
                Term::Const(c) => return Err(err(t.pos(), format!("parameter `{c}` must be a variable"))),
            }
        }
    }
    let precondition = match props.get("PRECONDITION") {
        Some(p) => read_condition(p, false)?,
        None => Condition::True,
    };
    let mut effects = Vec::new();
    let mut plain = Vec::new();
    if let Some(e) = props.get("EFFECT") {
        read_effects(e, &mut effects, &mut plain)?;
    }
    if !plain.is_empty() {
        effects.insert(
            0,
            EffectSpec {
                secondary: Condition::True,
                post: plain,
            },
        );
    }
    Ok(OperatorSchema {
        name,
        params,
        precondition,
        effects,
    })
}

fn read_define(text: &str, kind: &str) -> Result<(Symbol, Vec<Sexp>)> {
    let _ = text;
    let form = sexpr::read_one(text)?;
    let items = list(&form, "a (define ...) form")?.to_vec();
    if items.first().map(|h| h.is_atom("define")) != Some(true) {
        return Err(err(form.pos(), "expected (define ...)"));
    }
    let header = items
        .get(1)
        .ok_or_else(|| err(form.pos(), format!("missing ({kind} <name>)")))?;
    let hs = list(header, "a header")?;
    if hs.len() != 2 || !hs[0].is_atom(kind) {
        return Err(err(header.pos(), format!("expected ({kind} <name>)")));
    }
    Ok((Symbol::new(atom(&hs[1], "a name")?), items[2..].to_vec()))
}

/// Parses a domain file and checks every schema.
pub fn parse_domain(text: &str) -> Result<Domain> {
    let (name, body) = read_define(text, "domain")?;
    let mut operators = Vec::new();
    for form in &body {
        match form.head().as_deref() {
            Some(":ACTION") => operators.push(read_action(form)?),
            Some(":REQUIREMENTS" | ":PREDICATES" | ":CONSTANTS") => {}
            _ => return Err(err(form.pos(), format!("unexpected domain form `{form}`"))),
        }
    }
    let mut seen = BTreeSet::new();
    for op in &operators {
        if !seen.insert(op.name.clone()) {
            return Err(Error::Schema {
                schema: op.name.to_string(),
                rule: "duplicate operator name".into(),
            });
        }
        if let Some(rule) = validate_schema(op).into_iter().next() {
            return Err(Error::Schema {
                schema: op.name.to_string(),
                rule,
            });
        }
    }
    Ok(Domain { name, operators })
}

/// Parses a problem file.
pub fn parse_problem(text: &str) -> Result<Problem> {
    let (name, body) = read_define(text, "problem")?;
    let perr = |msg: String| Error::Problem {
        problem: name.to_string(),
        msg,
    };
    let mut domain = None;
    let mut known = Vec::new();
    let mut uncertain: Vec<UncertainGroup> = Vec::new();
    let mut goal = None;
    for form in &body {
        let items = list(form, "a problem section")?;
        match form.head().as_deref() {
            Some(":DOMAIN") => {
                domain = Some(Symbol::new(atom(
                    items.get(1).ok_or_else(|| err(form.pos(), "missing domain name"))?,
                    "a domain name",
                )?))
            }
            Some(":INIT") => {
                for lit in &items[1..] {
                    let l = read_literal(lit)?;
                    if !l.is_ground() {
                        return Err(perr(format!("initial literal {l} is not ground")));
                    }
                    known.push(l);
                }
            }
            Some(":UNCERTAIN") => {
                let source = Symbol::new(atom(
                    items.get(1).ok_or_else(|| err(form.pos(), "missing source name"))?,
                    "a source name",
                )?);
                if uncertain.iter().any(|g| g.source == source) {
                    return Err(perr(format!("duplicate uncertainty source {source}")));
                }
                let mut outcomes: Vec<(Symbol, Vec<Literal>)> = Vec::new();
                for branch in &items[2..] {
                    let parts = list(branch, "an outcome (<name> <literal>...)")?;
                    let oname = Symbol::new(atom(
                        parts.first().ok_or_else(|| err(branch.pos(), "empty outcome"))?,
                        "an outcome name",
                    )?);
                    if outcomes.iter().any(|(o, _)| *o == oname) {
                        return Err(perr(format!("duplicate outcome {oname} in group {source}")));
                    }
                    let mut lits = Vec::new();
                    for lit in &parts[1..] {
                        let l = read_literal(lit)?;
                        if !l.is_ground() {
                            return Err(perr(format!("initial literal {l} is not ground")));
                        }
                        lits.push(l);
                    }
                    outcomes.push((oname, lits));
                }
                if outcomes.len() < 2 {
                    return Err(perr(format!("group {source} needs at least two outcomes")));
                }
                uncertain.push(UncertainGroup { source, outcomes });
            }
            Some(":GOAL") => {
                let g = items.get(1).ok_or_else(|| err(form.pos(), "missing goal"))?;
                goal = Some(read_condition(g, false)?);
            }
            _ => return Err(err(form.pos(), format!("unexpected problem form `{form}`"))),
        }
    }
    Ok(Problem {
        name: name.clone(),
        domain,
        known,
        uncertain,
        goal: goal.ok_or_else(|| perr("missing :goal".into()))?,
    })
}

/// Checks the structural rules every schema must satisfy. Returns one message
/// per violated rule; an empty list means the schema is valid.
pub fn validate_schema(schema: &OperatorSchema) -> Vec<String> {
    let mut out = Vec::new();
    if schema.precondition.contains_unknown() {
        out.push("unknown in enabling precondition".to_string());
    }
    let mut seen_params = BTreeSet::new();
    for p in &schema.params {
        if !seen_params.insert(p) {
            out.push(format!("duplicate parameter {p}"));
        }
    }
    let mut source_vars = BTreeSet::new();
    for eff in &schema.effects {
        if eff.post.is_empty() {
            out.push("effect without postconditions".to_string());
        }
        for (src, _) in eff.secondary.unknowns() {
            match src {
                Term::Var(v) => {
                    if schema.params.contains(&v) {
                        out.push(format!("uncertainty source shadows parameter {v}"));
                    }
                    source_vars.insert(v);
                }
                Term::Const(c) => out.push(format!("uncertainty source {c} must be a variable")),
            }
        }
        if eff.secondary.unknowns().len() > 1 {
            out.push("effect depends on more than one unknown atom".to_string());
        }
        for l in &eff.post {
            if l.atom.know_if && !l.positive {
                out.push("negated know-if postcondition".to_string());
            }
        }
    }
    for (src, outcomes) in schema.sources() {
        if outcomes.len() < 2 {
            out.push(format!("uncertainty source {src} declares fewer than two outcomes"));
        }
    }
    // mutual exclusion: one effect per (source, outcome, context)
    let mut seen: Vec<(Term, Symbol, Vec<Condition>)> = Vec::new();
    for eff in &schema.effects {
        let context: Vec<Condition> = eff
            .secondary
            .leaves()
            .into_iter()
            .filter(|c| !matches!(c, Condition::Unknown { .. }))
            .collect();
        for (src, outcome) in eff.secondary.unknowns() {
            let key = (src.clone(), outcome.clone(), context.clone());
            if seen.contains(&key) {
                out.push(format!("duplicate outcome {outcome} for source {src}"));
            } else {
                seen.push(key);
            }
        }
    }
    let mut allowed: BTreeSet<Var> = schema.params.iter().cloned().collect();
    allowed.extend(source_vars.iter().cloned());
    for eff in &schema.effects {
        for l in &eff.post {
            allowed.extend(l.vars().cloned());
        }
    }
    let mut used = schema.precondition.vars();
    for eff in &schema.effects {
        used.extend(eff.secondary.vars());
    }
    for v in used.difference(&allowed) {
        out.push(format!("unbound variable {v}"));
    }
    out
}

/// Reads a whitespace-separated sequence of literals, e.g. `(on a b) (not (clear c))`.
pub fn parse_literals(text: &str) -> Result<Vec<Literal>> {
    sexpr::read_all(text)?.iter().map(read_literal).collect()
}

/// Reads one condition without `:unknown` atoms.
pub fn parse_condition(text: &str) -> Result<Condition> {
    read_condition(&sexpr::read_one(text)?, false)
}

// ---------------------------------------------------------------------------
// Printing

fn cond_to_sexp(c: &Condition) -> String {
    match c {
        Condition::True => "(:and)".into(),
        Condition::Lit(l) => lit_to_sexp(l),
        Condition::And(parts) => {
            let inner: Vec<String> = parts.iter().map(cond_to_sexp).collect();
            format!("(:and {})", inner.join(" "))
        }
        Condition::Unknown { source, outcome } => format!("(:unknown {source} {outcome})"),
    }
}

fn lit_to_sexp(l: &Literal) -> String {
    if l.positive {
        l.atom.to_string()
    } else {
        format!("(:not {})", l.atom)
    }
}

fn lits_to_sexp(lits: &[Literal]) -> String {
    if lits.len() == 1 {
        lit_to_sexp(&lits[0])
    } else {
        let inner: Vec<String> = lits.iter().map(lit_to_sexp).collect();
        format!("(:and {})", inner.join(" "))
    }
}

/// Renders a domain in the surface syntax accepted by [`parse_domain`].
pub fn domain_to_string(domain: &Domain) -> String {
    let mut s = format!("(define (domain {})\n", domain.name);
    for op in &domain.operators {
        s.push_str(&format!("  (:action {}\n", op.name));
        let params: Vec<String> = op.params.iter().map(|p| p.to_string()).collect();
        s.push_str(&format!("    :parameters ({})\n", params.join(" ")));
        s.push_str(&format!("    :precondition {}\n", cond_to_sexp(&op.precondition)));
        let effs: Vec<String> = op
            .effects
            .iter()
            .map(|e| match e.secondary {
                Condition::True => lits_to_sexp(&e.post),
                ref sec => format!("(:when {} :effect {})", cond_to_sexp(sec), lits_to_sexp(&e.post)),
            })
            .collect();
        s.push_str(&format!("    :effect (:and {}))\n", effs.join("\n                  ")));
    }
    s.push_str(")\n");
    s
}

/// Renders a problem in the surface syntax accepted by [`parse_problem`].
pub fn problem_to_string(problem: &Problem) -> String {
    let mut s = format!("(define (problem {})\n", problem.name);
    if let Some(d) = &problem.domain {
        s.push_str(&format!("  (:domain {d})\n"));
    }
    let init: Vec<String> = problem.known.iter().map(lit_to_sexp).collect();
    s.push_str(&format!("  (:init {})\n", init.join(" ")));
    for g in &problem.uncertain {
        s.push_str(&format!("  (:uncertain {}", g.source));
        for (o, lits) in &g.outcomes {
            let ls: Vec<String> = lits.iter().map(lit_to_sexp).collect();
            s.push_str(&format!("\n    ({o} {})", ls.join(" ")));
        }
        s.push_str(")\n");
    }
    s.push_str(&format!("  (:goal {}))\n", cond_to_sexp(&problem.goal)));
    s
}

#[cfg(test)]
mod tests {
    use super::*;

    const FIG1: &str = "
    (define (domain vending)
      (:action make-selection
        :parameters (?machine ?selection)
        :precondition (:and (money-entered ?machine) (plugged-in ?machine))
        :effect (:and
          (:when (available ?machine ?selection)
             :effect (:and (dispensed ?selection) (:not (money-entered ?machine))))
          (:when (:not (available ?machine ?selection))
             :effect (another-selection-indicator-on ?machine)))))";

    const FIG2: &str = "
    (define (domain faulty-vending)
      (:action enter-selection
        :parameters (?machine)
        :precondition (:and (money-entered ?machine) (plugged-in ?machine))
        :effect (:and
          (:when (:and (available ?machine ?selection) (:unknown ?ok T))
             :effect (dispensed ?selection))
          (:when (:and (available ?machine ?selection) (:unknown ?ok F))
             :effect (:not (dispensed ?selection)))
          (:when (available ?machine ?selection)
             :effect (:not (money-entered ?machine)))
          (:when (:not (available ?machine ?selection))
             :effect (another-selection-indicator-on ?machine)))))";

    const FIG10: &str = "
    (define (domain coin)
      (:action toss-coin
        :parameters (?coin ?agent)
        :precondition (holding ?agent ?coin)
        :effect (:and
          (:when (:unknown ?U H) :effect (:and (flat ?coin) (heads ?coin)))
          (:when (:unknown ?U T) :effect (:and (flat ?coin) (tails ?coin)))
          (:when (:unknown ?U E) :effect (on-edge ?coin)))))";

    #[test]
    fn parses_vending_machine_schema() {
        let d = parse_domain(FIG1).unwrap();
        let op = &d.operators[0];
        assert_eq!(op.name.as_str(), "MAKE-SELECTION");
        assert_eq!(op.params.len(), 2);
        assert_eq!(op.precondition.literals().len(), 2);
        assert_eq!(op.effects.len(), 2);
        for e in &op.effects {
            assert_eq!(e.secondary.leaves().len(), 1);
        }
    }

    #[test]
    fn parses_faulty_machine_with_unknowns() {
        let d = parse_domain(FIG2).unwrap();
        let op = &d.operators[0];
        assert_eq!(op.effects.len(), 4);
        let unknowns: Vec<_> = op.effects.iter().flat_map(|e| e.secondary.unknowns()).collect();
        assert_eq!(
            unknowns,
            vec![
                (Term::parse("?ok"), Symbol::new("T")),
                (Term::parse("?ok"), Symbol::new("F"))
            ]
        );
        assert!(validate_schema(op).is_empty());
    }

    #[test]
    fn parses_coin_toss_with_three_outcomes() {
        let d = parse_domain(FIG10).unwrap();
        let op = &d.operators[0];
        assert_eq!(op.effects.len(), 3);
        let sources = op.sources();
        assert_eq!(sources.len(), 1);
        assert_eq!(sources[0].0, Var::new("U"));
        let outs: Vec<&str> = sources[0].1.iter().map(Symbol::as_str).collect();
        assert_eq!(outs, ["H", "T", "E"]);
    }

    #[test]
    fn source_shadowing_parameter_is_diagnosed() {
        let mut op = parse_domain(FIG10).unwrap().operators.remove(0);
        op.params.push(Var::new("U"));
        let diags = validate_schema(&op);
        assert!(
            diags.iter().any(|d| d.contains("uncertainty source shadows parameter")),
            "{diags:?}"
        );
    }

    #[test]
    fn duplicate_outcome_is_diagnosed() {
        let mut op = parse_domain(FIG10).unwrap().operators.remove(0);
        op.effects[1].secondary = op.effects[0].secondary.clone();
        let diags = validate_schema(&op);
        assert!(diags.iter().any(|d| d.contains("duplicate outcome")), "{diags:?}");
    }

    #[test]
    fn unknown_in_precondition_is_rejected() {
        let text = "(define (domain d) (:action a :parameters () :precondition (:unknown ?u X) :effect (p)))";
        assert!(parse_domain(text).is_err());
        let goal = "(define (problem p) (:init (a)) (:goal (:unknown ?u X)))";
        assert!(parse_problem(goal).is_err());
    }

    #[test]
    fn unbound_variable_is_diagnosed() {
        let text = "(define (domain d) (:action a :parameters (?x) :precondition (q ?y) :effect (p ?x)))";
        match parse_domain(text) {
            Err(Error::Schema { rule, .. }) => assert!(rule.contains("unbound variable ?Y")),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn nested_know_if_is_rejected() {
        let text = "(define (domain d) (:action a :parameters () :effect (know-if (know-if (p)))))";
        assert!(parse_domain(text).is_err());
    }

    #[test]
    fn know_if_of_negation_normalizes() {
        let text = "(define (domain d) (:action a :parameters () :effect (know-if (not (p)))))";
        let d = parse_domain(text).unwrap();
        assert_eq!(d.operators[0].effects[0].post[0].to_string(), "(KNOW-IF (P))");
    }

    #[test]
    fn bomb_problem_groups() {
        let text = "(define (problem bomb)
            (:init (at package-1 rug) (at package-2 rug))
            (:uncertain unkos (o1 (contains package-1 bomb)) (o2 (contains package-2 bomb)))
            (:goal (disarmed bomb)))";
        let p = parse_problem(text).unwrap();
        assert_eq!(p.known.len(), 2);
        assert_eq!(p.uncertain.len(), 1);
        assert_eq!(p.uncertain[0].source.as_str(), "UNKOS");
        assert_eq!(p.uncertain[0].outcomes[0].1[0].to_string(), "(CONTAINS PACKAGE-1 BOMB)");
        assert_eq!(p.goal.to_string(), "(DISARMED BOMB)");
    }

    #[test]
    fn certainty_only_problem() {
        let p = parse_problem("(define (problem p) (:init (a)) (:goal (a)))").unwrap();
        assert!(p.uncertain.is_empty());
    }

    #[test]
    fn problem_errors() {
        let dup = "(define (problem p) (:init) (:uncertain s (x (a)) (x (b))) (:goal (a)))";
        assert!(matches!(parse_problem(dup), Err(Error::Problem { .. })));
        let nonground = "(define (problem p) (:init (a ?x)) (:goal (a b)))";
        assert!(matches!(parse_problem(nonground), Err(Error::Problem { .. })));
        let single = "(define (problem p) (:init) (:uncertain s (x (a))) (:goal (a)))";
        assert!(parse_problem(single).is_err());
    }

    #[test]
    fn printing_round_trips_examples() {
        for text in [FIG1, FIG2, FIG10] {
            let d = parse_domain(text).unwrap();
            let again = parse_domain(&domain_to_string(&d)).unwrap();
            assert_eq!(d, again);
        }
    }
}

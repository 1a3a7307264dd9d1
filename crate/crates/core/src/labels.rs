//! Positive and negative contingency labels.
//!
//! A positive label `[S: a b]` says an element is required when source `S`
//! resolves to `a` or `b`; labels over different sources are conjoined. A
//! negative label says the element must not occur in those outcomes.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use crate::syntax::Symbol;

/// Declared outcomes per source, in declaration order.
pub type Registry = BTreeMap<Symbol, Vec<Symbol>>;

/// A total assignment of one outcome to each source under consideration.
pub type Contingency = BTreeMap<Symbol, Symbol>;

pub type LabelMap = BTreeMap<Symbol, BTreeSet<Symbol>>;

#[derive(Clone, Debug, Default, PartialEq, Eq, Hash)]
pub struct LabelSet {
    pub positive: LabelMap,
    pub negative: LabelMap,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Execution {
    Required,
    Forbidden,
    Optional,
}

fn merge(into: &mut LabelMap, from: &LabelMap) -> bool {
    let mut changed = false;
    for (s, outs) in from {
        let entry = into.entry(s.clone()).or_default();
        for o in outs {
            changed |= entry.insert(o.clone());
        }
    }
    changed
}

impl LabelSet {
    pub fn is_empty(&self) -> bool {
        self.positive.is_empty() && self.negative.is_empty()
    }

    pub fn add_positive(&mut self, s: &Symbol, o: &Symbol) -> bool {
        self.positive.entry(s.clone()).or_default().insert(o.clone())
    }

    pub fn add_negative(&mut self, s: &Symbol, o: &Symbol) -> bool {
        self.negative.entry(s.clone()).or_default().insert(o.clone())
    }

    pub fn merge_positive(&mut self, from: &LabelMap) -> bool {
        merge(&mut self.positive, from)
    }

    pub fn merge_negative(&mut self, from: &LabelMap) -> bool {
        merge(&mut self.negative, from)
    }

    pub fn merge(&mut self, other: &LabelSet) -> bool {
        let a = self.merge_positive(&other.positive);
        let b = self.merge_negative(&other.negative);
        a || b
    }

    /// Positive labels with the given sources dropped.
    pub fn positive_without(&self, drop: &[Symbol]) -> LabelMap {
        self.positive
            .iter()
            .filter(|(s, _)| !drop.contains(s))
            .map(|(s, o)| (s.clone(), o.clone()))
            .collect()
    }

    /// Sources a contingency must assign for the labels to be decided.
    pub fn sources(&self) -> BTreeSet<Symbol> {
        self.positive.keys().chain(self.negative.keys()).cloned().collect()
    }

    /// Every positive source is assigned one of its listed outcomes. A source
    /// the contingency does not assign fails the test.
    pub fn required(&self, g: &Contingency) -> bool {
        self.positive
            .iter()
            .all(|(s, outs)| g.get(s).is_some_and(|o| outs.contains(o)))
    }

    pub fn forbidden(&self, g: &Contingency) -> bool {
        self.negative
            .iter()
            .any(|(s, outs)| g.get(s).is_some_and(|o| outs.contains(o)))
    }

    pub fn classify(&self, g: &Contingency) -> Execution {
        if self.forbidden(g) {
            Execution::Forbidden
        } else if self.required(g) {
            Execution::Required
        } else {
            Execution::Optional
        }
    }

    /// No contingency over the mentioned sources is both required and
    /// forbidden.
    pub fn is_consistent(&self, registry: &Registry) -> bool {
        if self.negative.is_empty() {
            return true;
        }
        let sources: Vec<Symbol> = self.sources().into_iter().collect();
        !contingencies_over(&sources, registry)
            .iter()
            .any(|g| self.required(g) && self.forbidden(g))
    }
}

/// Cross product of the outcomes of the given sources. Sources missing from
/// the registry are skipped.
pub fn contingencies_over(sources: &[Symbol], registry: &Registry) -> Vec<Contingency> {
    let mut out = vec![Contingency::new()];
    for s in sources {
        let Some(outcomes) = registry.get(s) else { continue };
        let mut next = Vec::with_capacity(out.len() * outcomes.len());
        for g in &out {
            for o in outcomes {
                let mut g2 = g.clone();
                g2.insert(s.clone(), o.clone());
                next.push(g2);
            }
        }
        out = next;
    }
    out
}

/// All contingencies over every registered source.
pub fn enumerate_contingencies(registry: &Registry) -> Vec<Contingency> {
    let sources: Vec<Symbol> = registry.keys().cloned().collect();
    contingencies_over(&sources, registry)
}

/// Renders a label map as `[S: a b][T: c]`.
pub struct Brackets<'a>(pub &'a LabelMap);

impl fmt::Display for Brackets<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (s, outs) in self.0 {
            write!(f, "[{s}:")?;
            for o in outs {
                write!(f, " {o}")?;
            }
            f.write_str("]")?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sym(s: &str) -> Symbol {
        Symbol::new(s)
    }

    fn registry() -> Registry {
        let mut r = Registry::new();
        r.insert(sym("S"), vec![sym("O1"), sym("O2")]);
        r.insert(sym("T"), vec![sym("X"), sym("Y")]);
        r
    }

    #[test]
    fn same_outcome_both_ways_is_inconsistent() {
        let mut l = LabelSet::default();
        l.add_positive(&sym("S"), &sym("O1"));
        l.add_negative(&sym("S"), &sym("O1"));
        assert!(!l.is_consistent(&registry()));
    }

    #[test]
    fn disjoint_outcomes_are_consistent() {
        let mut l = LabelSet::default();
        l.add_positive(&sym("S"), &sym("O1"));
        l.add_negative(&sym("S"), &sym("O2"));
        assert!(l.is_consistent(&registry()));
    }

    #[test]
    fn independent_negative_source_is_inconsistent() {
        let mut l = LabelSet::default();
        l.add_positive(&sym("S"), &sym("O1"));
        l.add_negative(&sym("T"), &sym("X"));
        // brute force over the 2x2 grid
        let grid = enumerate_contingencies(&registry());
        assert_eq!(grid.len(), 4);
        let clash = grid.iter().filter(|g| l.required(g) && l.forbidden(g)).count();
        assert_eq!(clash, 1);
        assert!(!l.is_consistent(&registry()));
    }

    #[test]
    fn classification() {
        let mut l = LabelSet::default();
        l.add_positive(&sym("S"), &sym("O1"));
        l.add_negative(&sym("S"), &sym("O2"));
        let g = |o: &str| Contingency::from([(sym("S"), sym(o))]);
        assert_eq!(l.classify(&g("O1")), Execution::Required);
        assert_eq!(l.classify(&g("O2")), Execution::Forbidden);
        let mut only_pos = LabelSet::default();
        only_pos.add_positive(&sym("S"), &sym("O1"));
        assert_eq!(only_pos.classify(&g("O2")), Execution::Optional);
    }

    #[test]
    fn bracket_rendering() {
        let mut l = LabelSet::default();
        l.add_positive(&sym("S"), &sym("O2"));
        l.add_positive(&sym("S"), &sym("O1"));
        l.add_positive(&sym("T"), &sym("X"));
        assert_eq!(Brackets(&l.positive).to_string(), "[S: O1 O2][T: X]");
    }
}

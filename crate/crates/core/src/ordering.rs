//! Partial order over plan steps.

use std::collections::BTreeSet;
use std::fmt;

#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Debug)]
pub struct StepId(pub usize);

impl fmt::Display for StepId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// Explicit precedence pairs plus their transitive closure, kept as one
/// bitset row per step.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Ordering {
    pairs: BTreeSet<(StepId, StepId)>,
    reach: Vec<Vec<u64>>,
}

fn words(n: usize) -> usize {
    n.div_ceil(64)
}

impl Ordering {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn len(&self) -> usize {
        self.reach.len()
    }

    pub fn is_empty(&self) -> bool {
        self.reach.is_empty()
    }

    /// Makes room for a new step and returns its id.
    pub fn add_step(&mut self) -> StepId {
        let id = self.reach.len();
        let w = words(id + 1);
        for row in &mut self.reach {
            row.resize(w, 0);
        }
        self.reach.push(vec![0; w]);
        StepId(id)
    }

    fn get(&self, a: StepId, b: StepId) -> bool {
        self.reach[a.0][b.0 / 64] >> (b.0 % 64) & 1 == 1
    }

    fn set(&mut self, a: StepId, b: StepId) {
        self.reach[a.0][b.0 / 64] |= 1 << (b.0 % 64);
    }

    /// Strict precedence entailed by the recorded pairs.
    pub fn precedes(&self, a: StepId, b: StepId) -> bool {
        self.get(a, b)
    }

    /// Adds `before < after`; `None` if that would close a cycle.
    pub fn add_precedence(&self, before: StepId, after: StepId) -> Option<Ordering> {
        if before == after || self.get(after, before) {
            return None;
        }
        let mut out = self.clone();
        out.pairs.insert((before, after));
        if self.get(before, after) {
            return Some(out);
        }
        let n = self.len();
        let preds: Vec<StepId> = (0..n)
            .map(StepId)
            .filter(|&x| x == before || self.get(x, before))
            .collect();
        let succs: Vec<StepId> = (0..n)
            .map(StepId)
            .filter(|&y| y == after || self.get(after, y))
            .collect();
        for &x in &preds {
            for &y in &succs {
                out.set(x, y);
            }
        }
        Some(out)
    }

    /// True unless `s <= lo` or `hi <= s` is entailed.
    pub fn can_occur_between(&self, s: StepId, lo: StepId, hi: StepId) -> bool {
        !(s == lo || self.get(s, lo) || s == hi || self.get(hi, s))
    }

    pub fn pairs(&self) -> impl Iterator<Item = &(StepId, StepId)> {
        self.pairs.iter()
    }

    /// Kahn's algorithm, always taking the smallest ready id.
    pub fn topological_order(&self) -> Vec<StepId> {
        self.linearize_with(|ready| ready[0])
    }

    /// Kahn's algorithm with a caller-chosen ready step at every turn.
    pub fn linearize_with(&self, mut pick: impl FnMut(&[StepId]) -> StepId) -> Vec<StepId> {
        let n = self.len();
        let mut indeg = vec![0usize; n];
        for &(_, b) in &self.pairs {
            indeg[b.0] += 1;
        }
        let mut ready: Vec<StepId> = (0..n).filter(|&i| indeg[i] == 0).map(StepId).collect();
        let mut out = Vec::with_capacity(n);
        while !ready.is_empty() {
            ready.sort();
            let s = pick(&ready);
            ready.retain(|&r| r != s);
            out.push(s);
            for &(a, b) in &self.pairs {
                if a == s {
                    indeg[b.0] -= 1;
                    if indeg[b.0] == 0 {
                        ready.push(b);
                    }
                }
            }
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn with_steps(n: usize) -> Ordering {
        let mut o = Ordering::new();
        for _ in 0..n {
            o.add_step();
        }
        o
    }

    #[test]
    fn two_cycle_is_rejected() {
        let o = with_steps(2).add_precedence(StepId(0), StepId(1)).unwrap();
        assert!(o.add_precedence(StepId(1), StepId(0)).is_none());
    }

    #[test]
    fn transitivity() {
        let o = with_steps(3)
            .add_precedence(StepId(0), StepId(1))
            .unwrap()
            .add_precedence(StepId(1), StepId(2))
            .unwrap();
        assert!(o.precedes(StepId(0), StepId(2)));
        assert!(!o.precedes(StepId(2), StepId(0)));
        assert!(o.add_precedence(StepId(2), StepId(0)).is_none());
    }

    #[test]
    fn can_occur_between_cases() {
        let o = with_steps(4)
            .add_precedence(StepId(0), StepId(1))
            .unwrap()
            .add_precedence(StepId(1), StepId(2))
            .unwrap();
        assert!(o.can_occur_between(StepId(3), StepId(0), StepId(2)));
        assert!(!o.can_occur_between(StepId(0), StepId(0), StepId(2)));
        assert!(o.can_occur_between(StepId(1), StepId(0), StepId(2)));
        assert!(!o.can_occur_between(StepId(0), StepId(1), StepId(2)));
    }

    #[test]
    fn rows_grow_past_one_word() {
        let mut o = with_steps(70);
        o = o.add_precedence(StepId(0), StepId(69)).unwrap();
        o = o.add_precedence(StepId(69), StepId(68)).unwrap();
        assert!(o.precedes(StepId(0), StepId(68)));
        let order = o.topological_order();
        let pos = |s: usize| order.iter().position(|x| x.0 == s).unwrap();
        assert!(pos(0) < pos(69) && pos(69) < pos(68));
    }
}

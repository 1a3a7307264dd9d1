//! Codesignation and non-codesignation constraints over plan variables.

use std::collections::BTreeMap;

use crate::syntax::{Atom, Literal, Symbol, Term, Var};

/// Union-find over variables, a constant per class, and a list of pairs that
/// must not codesignate. Values are cheap to clone; every operation returns
/// a new store and leaves the receiver untouched.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Bindings {
    parent: BTreeMap<Var, Var>,
    value: BTreeMap<Var, Symbol>,
    neq: Vec<(Term, Term)>,
}

impl Bindings {
    pub fn new() -> Self {
        Self::default()
    }

    fn find(&self, v: &Var) -> Var {
        let mut cur = v;
        while let Some(p) = self.parent.get(cur) {
            cur = p;
        }
        cur.clone()
    }

    /// The constant a term is bound to, or the representative of its class.
    pub fn resolve(&self, t: &Term) -> Term {
        match t {
            Term::Const(_) => t.clone(),
            Term::Var(v) => {
                let root = self.find(v);
                match self.value.get(&root) {
                    Some(c) => Term::Const(c.clone()),
                    None => Term::Var(root),
                }
            }
        }
    }

    pub fn resolve_atom(&self, a: &Atom) -> Atom {
        a.map_terms(&mut |t| self.resolve(t))
    }

    pub fn resolve_literal(&self, l: &Literal) -> Literal {
        l.map_terms(&mut |t| self.resolve(t))
    }

    /// True when the constraints force `a` and `b` to denote the same object.
    pub fn codesignates(&self, a: &Term, b: &Term) -> bool {
        self.resolve(a) == self.resolve(b)
    }

    fn join(&mut self, a: &Term, b: &Term) -> bool {
        match (self.resolve(a), self.resolve(b)) {
            (Term::Const(x), Term::Const(y)) => x == y,
            (Term::Var(x), Term::Const(c)) | (Term::Const(c), Term::Var(x)) => {
                self.value.insert(x, c);
                true
            }
            (Term::Var(x), Term::Var(y)) => {
                if x != y {
                    self.parent.insert(x, y);
                }
                true
            }
        }
    }

    fn respects_neq(&self) -> bool {
        self.neq.iter().all(|(a, b)| !self.codesignates(a, b))
    }

    /// Extends the store so that each pair of terms codesignates.
    pub fn unify_terms<'a>(&self, pairs: impl IntoIterator<Item = (&'a Term, &'a Term)>) -> Option<Bindings> {
        let mut out = self.clone();
        for (a, b) in pairs {
            if !out.join(a, b) {
                return None;
            }
        }
        out.respects_neq().then_some(out)
    }

    /// Most general extension making two atoms equal, ignoring polarity.
    pub fn unify_atoms(&self, a: &Atom, b: &Atom) -> Option<Bindings> {
        if a.pred != b.pred || a.know_if != b.know_if || a.args.len() != b.args.len() {
            return None;
        }
        self.unify_terms(a.args.iter().zip(&b.args))
    }

    /// Most general extension making two literals equal, polarity included.
    pub fn unify(&self, a: &Literal, b: &Literal) -> Option<Bindings> {
        if a.positive != b.positive {
            return None;
        }
        self.unify_atoms(&a.atom, &b.atom)
    }

    /// Adds `a != b`. Fails if they already codesignate.
    pub fn forbid(&self, a: &Term, b: &Term) -> Option<Bindings> {
        if self.codesignates(a, b) {
            return None;
        }
        let mut out = self.clone();
        let pair = (a.clone(), b.clone());
        let flipped = (b.clone(), a.clone());
        if !out.neq.contains(&pair) && !out.neq.contains(&flipped) {
            out.neq.push(pair);
        }
        Some(out)
    }

    /// One alternative store per argument position whose codesignation is not
    /// yet entailed, each forbidding that position from matching. Empty when
    /// the atoms already denote the same ground fact.
    pub fn separation_choices(&self, threat: &Atom, protected: &Atom) -> Vec<Bindings> {
        let mut out = Vec::new();
        let mut seen: Vec<(Term, Term)> = Vec::new();
        for (a, b) in threat.args.iter().zip(&protected.args) {
            let key = (self.resolve(a), self.resolve(b));
            if key.0 == key.1 || seen.contains(&key) || seen.contains(&(key.1.clone(), key.0.clone())) {
                continue;
            }
            seen.push(key);
            if let Some(b) = self.forbid(a, b) {
                out.push(b);
            }
        }
        out
    }

    /// Non-codesignation constraints as stored.
    pub fn inequalities(&self) -> &[(Term, Term)] {
        &self.neq
    }
}

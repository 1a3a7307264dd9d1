//! Binding-store and ordering-store properties against brute-force oracles.
#![allow(dead_code)]

use contplan::syntax::{Atom, Literal, Term};
use contplan::{Bindings, Ordering, StepId};
use proptest::prelude::*;
use proptest::test_runner::TestCaseError;

const VARS: [&str; 4] = ["?a", "?b", "?c", "?d"];
const CONSTS: [&str; 4] = ["A", "B", "C", "D"];

#[derive(Clone, Debug)]
pub enum Op {
    Eq(usize, usize),
    Neq(usize, usize),
}

fn term(i: usize) -> Term {
    if i < 4 {
        Term::parse(VARS[i])
    } else {
        Term::parse(CONSTS[i - 4])
    }
}

pub fn op() -> impl Strategy<Value = Op> {
    (any::<bool>(), 0..8usize, 0..8usize).prop_map(|(eq, a, b)| if eq { Op::Eq(a, b) } else { Op::Neq(a, b) })
}

/// Satisfiable when some assignment of the four variables to the named
/// constants plus four spare objects meets every constraint.
fn satisfiable(ops: &[Op]) -> bool {
    let universe = 8usize;
    let value = |assign: &[usize; 4], i: usize| if i < 4 { assign[i] } else { i - 4 };
    for code in 0..universe.pow(4) {
        let assign = [code % 8, code / 8 % 8, code / 64 % 8, code / 512 % 8];
        let ok = ops.iter().all(|op| match *op {
            Op::Eq(a, b) => value(&assign, a) == value(&assign, b),
            Op::Neq(a, b) => value(&assign, a) != value(&assign, b),
        });
        if ok {
            return true;
        }
    }
    false
}

fn codesignation_matrix(b: &Bindings) -> Vec<bool> {
    let mut out = Vec::new();
    for i in 0..8 {
        for j in 0..8 {
            out.push(b.codesignates(&term(i), &term(j)));
        }
    }
    out
}

pub fn bindings(ops: Vec<Op>) -> Result<(), TestCaseError> {
    let mut store = Bindings::new();
    let mut accepted: Vec<Op> = Vec::new();
    for op in ops {
        let next = match op {
            Op::Eq(a, b) => store.unify_terms([(&term(a), &term(b))]),
            Op::Neq(a, b) => store.forbid(&term(a), &term(b)),
        };
        let mut trial = accepted.clone();
        trial.push(op.clone());
        prop_assert_eq!(next.is_some(), satisfiable(&trial), "op {:?} after {:?}", op, accepted);
        if let Some(n) = next {
            store = n;
            accepted = trial;
        }
    }
    Ok(())
}

pub fn unify_commutes(prefix: Vec<Op>, xs: Vec<usize>, ys: Vec<usize>) -> Result<(), TestCaseError> {
    let mut store = Bindings::new();
    for op in prefix {
        let next = match op {
            Op::Eq(a, b) => store.unify_terms([(&term(a), &term(b))]),
            Op::Neq(a, b) => store.forbid(&term(a), &term(b)),
        };
        if let Some(n) = next {
            store = n;
        }
    }
    let mk = |ix: &[usize]| {
        Literal::pos(Atom {
            pred: "P".into(),
            args: ix.iter().map(|&i| term(i)).collect(),
            know_if: false,
        })
    };
    let (a, b) = (mk(&xs), mk(&ys));
    let ab = store.unify(&a, &b);
    let ba = store.unify(&b, &a);
    prop_assert_eq!(ab.is_some(), ba.is_some());
    if let (Some(x), Some(y)) = (ab, ba) {
        prop_assert_eq!(codesignation_matrix(&x), codesignation_matrix(&y));
    }
    Ok(())
}

pub fn pairs() -> impl Strategy<Value = Vec<(usize, usize)>> {
    prop::collection::vec((0..8usize, 0..8usize), 1..20)
}

pub fn ordering(pairs: Vec<(usize, usize)>) -> Result<(), TestCaseError> {
    let mut o = Ordering::new();
    for _ in 0..8 {
        o.add_step();
    }
    let mut kept: Vec<(usize, usize)> = Vec::new();
    for (a, b) in pairs {
        let mut trial = kept.clone();
        trial.push((a, b));
        let next = o.add_precedence(StepId(a), StepId(b));
        prop_assert_eq!(next.is_some(), acyclic(&trial));
        if let Some(n) = next {
            o = n;
            kept = trial;
        }
    }
    for a in 0..8 {
        for b in 0..8 {
            prop_assert_eq!(o.precedes(StepId(a), StepId(b)), reachable(&kept, a, b));
        }
    }
    let order = o.topological_order();
    prop_assert_eq!(order.len(), 8);
    for &(a, b) in &kept {
        let pa = order.iter().position(|s| s.0 == a).unwrap();
        let pb = order.iter().position(|s| s.0 == b).unwrap();
        prop_assert!(pa < pb);
    }
    Ok(())
}

fn reachable(pairs: &[(usize, usize)], from: usize, to: usize) -> bool {
    let mut stack: Vec<usize> = pairs.iter().filter(|p| p.0 == from).map(|p| p.1).collect();
    let mut seen = [false; 8];
    while let Some(x) = stack.pop() {
        if x == to {
            return true;
        }
        if !seen[x] {
            seen[x] = true;
            stack.extend(pairs.iter().filter(|p| p.0 == x).map(|p| p.1));
        }
    }
    false
}

fn acyclic(pairs: &[(usize, usize)]) -> bool {
    (0..8).all(|s| !reachable(pairs, s, s))
}

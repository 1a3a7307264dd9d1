//! Sussman anomaly against a hand-coded blocks-world oracle.

mod common;

use std::collections::{BTreeMap, BTreeSet, VecDeque};

use contplan::document::{DocStepKind, PlanDocument};
use contplan::planner::{plan, SearchConfig};

const BLOCKS: [&str; 3] = ["A", "B", "C"];

/// Position of each block: `None` is the table.
type World = [Option<usize>; 3];

fn clear(w: &World, x: usize) -> bool {
    !w.contains(&Some(x))
}

fn index(name: &str) -> Option<usize> {
    BLOCKS.iter().position(|b| b.eq_ignore_ascii_case(name))
}

/// Ground moves `(block, from, to)`; `to == None` puts it on the table.
fn moves(w: &World) -> Vec<(usize, Option<usize>, Option<usize>)> {
    let mut out = Vec::new();
    for x in 0..3 {
        if !clear(w, x) {
            continue;
        }
        if w[x].is_some() {
            out.push((x, w[x], None));
        }
        for y in 0..3 {
            if y != x && clear(w, y) {
                out.push((x, w[x], Some(y)));
            }
        }
    }
    out
}

fn goal(w: &World) -> bool {
    w[0] == Some(1) && w[1] == Some(2)
}

const INIT: World = [None, None, Some(0)];

/// Shortest plan length over the full state space, if any.
fn shortest() -> Option<usize> {
    let mut seen = BTreeSet::from([INIT]);
    let mut queue = VecDeque::from([(INIT, 0)]);
    while let Some((w, d)) = queue.pop_front() {
        if goal(&w) {
            return Some(d);
        }
        for (x, _, to) in moves(&w) {
            let mut n = w;
            n[x] = to;
            if seen.insert(n) {
                queue.push_back((n, d + 1));
            }
        }
    }
    None
}

/// Applies one plan step, checking it is legal in the oracle.
fn step(w: &World, name: &str, args: &[String]) -> Option<World> {
    let block = |s: &str| {
        if s.eq_ignore_ascii_case("TABLE") {
            Some(None)
        } else {
            index(s).map(Some)
        }
    };
    let (x, from, to) = match name {
        "STACK" => (index(&args[0])?, block(&args[1])?, Some(index(&args[2])?)),
        "UNSTACK-TO-TABLE" => (index(&args[0])?, Some(index(&args[1])?), None),
        _ => return None,
    };
    let legal = w[x] == from && clear(w, x) && to.is_none_or(|y| y != x && clear(w, y));
    legal.then(|| {
        let mut n = *w;
        n[x] = to;
        n
    })
}

/// Every topological order of the document's steps.
fn linearizations(doc: &PlanDocument) -> Vec<Vec<usize>> {
    let nums: Vec<usize> = doc.steps.iter().map(|s| s.number).collect();
    let mut before: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
    for &(a, b) in &doc.order {
        if a != 0 && nums.contains(&b) {
            before.entry(b).or_default().push(a);
        }
    }
    fn go(nums: &[usize], before: &BTreeMap<usize, Vec<usize>>, done: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if done.len() == nums.len() {
            out.push(done.clone());
            return;
        }
        for &n in nums {
            let ready = !done.contains(&n)
                && before
                    .get(&n)
                    .is_none_or(|bs| bs.iter().all(|b| done.contains(b) || !nums.contains(b)));
            if ready {
                done.push(n);
                go(nums, before, done, out);
                done.pop();
            }
        }
    }
    let mut out = Vec::new();
    go(&nums, &before, &mut Vec::new(), &mut out);
    out
}

#[test]
fn sussman_plan_has_no_decisions_and_works_in_the_oracle() {
    let (domain, problem) = common::load("sussman");
    assert!(problem.uncertain.is_empty());
    let optimum = shortest().expect("oracle finds the goal reachable");
    assert_eq!(optimum, 3);

    let result = plan(&problem, &domain, &SearchConfig::default());
    let found = result.plan().expect("planner finds a plan");
    let doc = PlanDocument::from_plan(found);
    assert!(doc.sources.is_empty());
    assert_eq!(doc.decisions().count(), 0);
    assert!(doc.steps.len() >= optimum);

    let orders = linearizations(&doc);
    assert!(!orders.is_empty());
    for order in orders {
        let mut w = INIT;
        for n in &order {
            let s = doc.steps.iter().find(|s| s.number == *n).unwrap();
            let DocStepKind::Action { name, args } = &s.kind else {
                panic!("decision step {n}");
            };
            let args: Vec<String> = args.iter().map(|a| a.to_string()).collect();
            w = step(&w, name.as_str(), &args).unwrap_or_else(|| panic!("step {n} illegal in order {order:?}"));
        }
        assert!(goal(&w), "order {order:?} misses the goal");
    }
}

use std::cmp::Reverse;
use std::collections::BinaryHeap;

use rand::rngs::StdRng;
use rand::seq::SliceRandom;
use rand::SeedableRng;

use crate::plan::{initial_plan, Plan};
use crate::syntax::{Domain, Problem};

use super::{detect_unsafe_links, establish, finalize, resolve, UnsafeLink};

#[derive(Clone, Debug)]
pub struct SearchConfig {
    pub node_budget: usize,
    pub contingency_weight: f64,
    /// Zero keeps children in generation order; anything else shuffles them.
    pub seed: u64,
}

impl Default for SearchConfig {
    fn default() -> Self {
        SearchConfig {
            node_budget: 50_000,
            contingency_weight: 1.0,
            seed: 0,
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct SearchStats {
    pub expanded: usize,
    pub generated: usize,
    pub peak_queue: usize,
}

#[derive(Clone, Debug)]
pub enum SearchOutcome {
    Complete(Box<Plan>),
    BudgetExhausted,
    SearchSpaceExhausted,
}

#[derive(Clone, Debug)]
pub struct SearchResult {
    pub outcome: SearchOutcome,
    pub stats: SearchStats,
}

impl SearchResult {
    pub fn plan(&self) -> Option<&Plan> {
        match &self.outcome {
            SearchOutcome::Complete(p) => Some(p),
            _ => None,
        }
    }
}

/// Steps plus flaws plus a charge per source of uncertainty.
pub fn rank(plan: &Plan, unsafe_links: usize, config: &SearchConfig) -> f64 {
    (plan.steps.len() + plan.open.len() + unsafe_links) as f64 + config.contingency_weight * plan.sources.len() as f64
}

struct Node {
    plan: Plan,
    unsafe_links: Vec<UnsafeLink>,
}

pub fn plan(problem: &Problem, domain: &Domain, config: &SearchConfig) -> SearchResult {
    let mut stats = SearchStats::default();
    let mut rng = StdRng::seed_from_u64(config.seed);
    let mut nodes: Vec<Option<Node>> = Vec::new();
    let mut queue: BinaryHeap<Reverse<(i64, usize)>> = BinaryHeap::new();

    let push = |plan: Plan, nodes: &mut Vec<Option<Node>>, queue: &mut BinaryHeap<_>| {
        let unsafe_links = detect_unsafe_links(&plan);
        let r = rank(&plan, unsafe_links.len(), config);
        let key = (r * 1000.0).round() as i64;
        queue.push(Reverse((key, nodes.len())));
        nodes.push(Some(Node { plan, unsafe_links }));
    };

    let Some(root) = finalize(initial_plan(problem)) else {
        return SearchResult {
            outcome: SearchOutcome::SearchSpaceExhausted,
            stats,
        };
    };
    push(root, &mut nodes, &mut queue);
    stats.generated = 1;

    while let Some(Reverse((_, idx))) = queue.pop() {
        let node = nodes[idx].take().expect("node popped twice");
        if node.unsafe_links.is_empty() && node.plan.open.is_empty() {
            return SearchResult {
                outcome: SearchOutcome::Complete(Box::new(node.plan)),
                stats,
            };
        }
        if stats.expanded >= config.node_budget {
            return SearchResult {
                outcome: SearchOutcome::BudgetExhausted,
                stats,
            };
        }
        stats.expanded += 1;
        let mut children = if let Some(u) = node.unsafe_links.first() {
            resolve(&node.plan, u)
        } else {
            let oldest = (0..node.plan.open.len())
                .min_by_key(|&i| node.plan.open[i].seq)
                .expect("incomplete plan without flaws");
            establish(&node.plan, domain, oldest)
        };
        if config.seed != 0 {
            children.shuffle(&mut rng);
        }
        stats.generated += children.len();
        for child in children {
            push(child, &mut nodes, &mut queue);
        }
        stats.peak_queue = stats.peak_queue.max(queue.len());
    }
    SearchResult {
        outcome: SearchOutcome::SearchSpaceExhausted,
        stats,
    }
}

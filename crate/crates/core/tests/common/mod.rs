#![allow(dead_code)]

use contplan::plan::{initial_plan, Plan};
use contplan::planner::{detect_unsafe_links, establish, resolve};
use contplan::syntax::{parse_domain, parse_problem, Domain, Problem};
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

pub const FIXTURES: [&str; 8] = [
    "evanston",
    "bomb",
    "package",
    "package2",
    "coin-flat",
    "coin-heads",
    "door",
    "sussman",
];

pub fn read(name: &str, ext: &str) -> String {
    let root = concat!(env!("CARGO_MANIFEST_DIR"), "/../../fixtures");
    std::fs::read_to_string(format!("{root}/{name}.{ext}")).unwrap()
}

pub fn load(name: &str) -> (Domain, Problem) {
    (
        parse_domain(&read(name, "domain")).unwrap(),
        parse_problem(&read(name, "problem")).unwrap(),
    )
}

/// Children of a plan under the planner's flaw choice.
pub fn children(plan: &Plan, domain: &Domain) -> Vec<Plan> {
    if let Some(u) = detect_unsafe_links(plan).first() {
        resolve(plan, u)
    } else if let Some(i) = (0..plan.open.len()).min_by_key(|&i| plan.open[i].seq) {
        establish(plan, domain, i)
    } else {
        Vec::new()
    }
}

/// A random descent of at most `depth` refinements from the initial plan.
pub fn random_walk(domain: &Domain, problem: &Problem, depth: usize, seed: u64) -> Plan {
    let mut rng = StdRng::seed_from_u64(seed);
    let mut plan = initial_plan(problem);
    for _ in 0..depth {
        let kids = children(&plan, domain);
        if kids.is_empty() {
            break;
        }
        let k = rng.gen_range(0..kids.len());
        plan = kids.into_iter().nth(k).unwrap();
    }
    plan
}

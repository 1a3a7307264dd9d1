mod props {
    pub mod constraints;
}

use props::constraints::*;
use proptest::prelude::*;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(300))]

    #[test]
    fn bindings_match_brute_force(ops in prop::collection::vec(op(), 1..8)) {
        bindings(ops)?;
    }

    #[test]
    fn unify_is_commutative(
        prefix in prop::collection::vec(op(), 0..5),
        xs in prop::collection::vec(0..8usize, 2),
        ys in prop::collection::vec(0..8usize, 2),
    ) {
        unify_commutes(prefix, xs, ys)?;
    }

    #[test]
    fn ordering_matches_cycle_oracle(p in pairs()) {
        ordering(p)?;
    }
}

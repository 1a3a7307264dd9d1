mod common;
mod props {
    pub mod documents;
}

use props::documents::*;
use proptest::prelude::*;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(250))]

    #[test]
    fn render_parse_round_trip(d in doc()) {
        round_trip(&d)?;
    }

    #[test]
    fn normal_form_ignores_numbering_and_minted_names(d in doc(), seed in any::<u64>()) {
        renaming_invariant(&d, seed)?;
    }

    #[test]
    fn normal_form_sees_label_changes(d in doc(), pick in any::<prop::sample::Index>()) {
        sees_label_changes(&d, pick)?;
    }
}

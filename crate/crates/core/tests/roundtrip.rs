mod common;

use colweb::formula::{negate, parse_formula, pretty, skeleton};
use common::*;
use proptest::prelude::*;

proptest! {
    #[test]
    fn pretty_then_parse_is_identity(seed in any::<u64>(), ops in 0u8..3) {
        let mut r = rng(seed);
        let g = gen_formula(&mut r, &atom_names("x", 4), 4, ops);
        let text = pretty(&g);
        let back = parse_formula(&text).unwrap();
        prop_assert_eq!(pretty(&back), text);
    }

    #[test]
    fn negation_is_an_involution(seed in any::<u64>()) {
        let mut r = rng(seed);
        let g = gen_formula(&mut r, &atom_names("y", 3), 4, 2);
        prop_assert_eq!(negate(&negate(&g)), g.clone());
        prop_assert_eq!(skeleton(&skeleton(&g)), skeleton(&g));
    }
}

#[test]
fn corpus_round_trips() {
    for s in CORPUS {
        let g = f(s);
        assert_eq!(f(&pretty(&g)), g, "{s}");
    }
}

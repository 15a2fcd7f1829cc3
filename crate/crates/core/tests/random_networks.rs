mod common;

use cait_core::reduction::validate;
use cait_core::{canonicalize, parse_network, print_network};
use proptest::prelude::*;

#[test]
fn generated_networks_are_well_formed() {
    let u = common::universe();
    for seed in 0..300 {
        let net = common::random_network(seed);
        validate(&net, &u).unwrap_or_else(|e| panic!("seed {seed}: {e}\n{}", print_network(&net)));
        for node in &net.nodes {
            node.process.check_time_guarded().unwrap();
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn print_then_parse_is_identity(seed in any::<u64>()) {
        let u = common::universe();
        let net = common::random_network(seed);
        let text = print_network(&net);
        let back = parse_network(&text, &u).unwrap();
        prop_assert_eq!(&back, &net, "{}", text);
    }

    #[test]
    fn canonicalize_is_idempotent(seed in any::<u64>()) {
        let net = common::random_network(seed);
        let once = canonicalize(&net);
        prop_assert_eq!(canonicalize(&once), once);
    }
}


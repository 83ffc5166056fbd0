mod common;

use common::{max_abs_diff, oracle_sparams, random_network};
use dualband::sim::assemble_sparams;
use proptest::prelude::*;
use rand::SeedableRng;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn nodal_assembly_matches_oracle(seed in any::<u64>()) {
        let mut rng = rand::rngs::StdRng::seed_from_u64(seed);
        let (net, f) = random_network(&mut rng);
        let s = assemble_sparams(&net, f).unwrap();
        prop_assert!(!s.perturbed);
        let reference = oracle_sparams(&net, f);
        let err = max_abs_diff(&s.data, &reference);
        prop_assert!(err < 1e-10, "error {err:e}");
    }

    #[test]
    fn random_networks_are_reciprocal_and_passive(seed in any::<u64>()) {
        let mut rng = rand::rngs::StdRng::seed_from_u64(seed);
        let (net, f) = random_network(&mut rng);
        let s = assemble_sparams(&net, f).unwrap();
        prop_assert!(s.max_asymmetry() < 1e-9);
        prop_assert!(s.max_singular_value() <= 1.0 + 1e-9);
    }
}

use proptest::prelude::*;

use longcycle::digraph::{giant_component, sample_colored, ModelParams};
use longcycle::exact::OracleLimits;
use longcycle::harness::{exact_in_k1, phi_components};
use longcycle::packing::EligibilityMode;
use longcycle::peel::peel;
use longcycle::rng::Seed;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(400))]

    /// No cycle inside K1 can beat |K1| minus the upper packing deficit.
    #[test]
    fn exact_cycle_respects_phi_bound(n in 5usize..=15, c in 2.0f64..12.0, seed in any::<u64>()) {
        let c = c.min(n as f64 - 1.0);
        let cd = sample_colored(&ModelParams::new(n, c).unwrap(), Seed(seed));
        let k1 = giant_component(&cd.union_view());
        prop_assume!(k1.len() >= 2);
        let pr = peel(&cd, &k1);
        let phi: usize = phi_components(&cd, &pr, EligibilityMode::Upper).unwrap().iter().map(|p| p.phi).sum();
        let exact = exact_in_k1(&cd, &k1, OracleLimits::default()).unwrap();
        prop_assert!(exact + phi <= k1.len(), "exact {} phi {} k1 {}", exact, phi, k1.len());
    }
}

//! Randomized algebraic laws for the series kernel and toric data.

mod support;

use proptest::prelude::*;

use support::*;
use toric_disc::toric::ToricCYData;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn ring_laws_hold(a in raw_terms(), b in raw_terms(), c in raw_terms()) {
        ring_laws(&a, &b, &c)?;
    }

    #[test]
    fn invert_round_trips(u in unit_terms()) {
        invert_round_trip(&u)?;
    }

    #[test]
    fn exp_and_log_are_inverse(t in tail_terms()) {
        exp_log_round_trips(&t)?;
    }

    #[test]
    fn truncation_is_monotone(a in raw_terms(), b in unit_terms(), t in tail_terms()) {
        truncation_monotonicity(&a, &b, &t)?;
    }

    #[test]
    fn substitution_is_a_homomorphism(a in raw_terms(), b in raw_terms(), d in tail_terms()) {
        substitution_homomorphism(&a, &b, &d)?;
    }
}

fn local_f0() -> (Vec<Vec<i64>>, Vec<usize>) {
    (vec![vec![0, 0], vec![1, 0], vec![0, 1], vec![-1, 0], vec![0, -1]], vec![0, 1, 2])
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    /// Relabelling the points permutes the pairing and leaves every
    /// intersection number with an effective class unchanged.
    #[test]
    fn toric_permutation_covariance(perm in Just((0..5usize).collect::<Vec<_>>()).prop_shuffle()) {
        let (points, sigma) = local_f0();
        let d = ToricCYData::build(points.clone(), sigma.clone()).unwrap();
        // new index of old point i is perm[i]
        let mut new_points = vec![Vec::new(); 5];
        for (i, p) in points.iter().enumerate() {
            new_points[perm[i]] = p.clone();
        }
        let new_sigma: Vec<usize> = sigma.iter().map(|&s| perm[s]).collect();
        let e = ToricCYData::build(new_points, new_sigma).unwrap();
        prop_assert_eq!(e.n_generators(), d.n_generators());
        for (k, &gi) in d.generators().iter().enumerate() {
            let k2 = e.generator_position(perm[gi]).unwrap();
            for i in 0..5 {
                prop_assert_eq!(d.pairing(i, k), e.pairing(perm[i], k2));
            }
        }
        for class in d.enumerate_effective(3) {
            let mut moved = vec![0u32; class.len()];
            for (k, &gi) in d.generators().iter().enumerate() {
                moved[e.generator_position(perm[gi]).unwrap()] = class[k];
            }
            for i in 0..5 {
                prop_assert_eq!(d.pair_class(i, &class), e.pair_class(perm[i], &moved));
            }
        }
    }
}

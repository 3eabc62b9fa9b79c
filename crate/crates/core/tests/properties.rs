use optiplace::flow::random_placement;
use optiplace::optimality::certify_bearings;
use optiplace::{
    construct, irregularity, lower_bound, objective, optimality_error, transform_placement, CoefficientSequence,
    OrthogonalTransform, Permutation, SensorKind, SensorSpec, SignPattern,
};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn coeffs(d: usize) -> impl Strategy<Value = CoefficientSequence> {
    prop::collection::vec(0.05f64..20.0, d..d + 7).prop_map(|v| CoefficientSequence::new(v).unwrap())
}

/// Range-only specs whose coefficients are exactly `c`.
fn range_only(c: &CoefficientSequence) -> Vec<SensorSpec> {
    c.values().iter().map(|&ci| SensorSpec::new(SensorKind::RangeOnly, 1.0 / ci, 1.0).unwrap()).collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn constructions_attain_the_bound(d in 2usize..=3, seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let n = d + (seed % 5) as usize;
        let values: Vec<f64> = (0..n).map(|_| rand::Rng::random_range(&mut rng, 0.1..5.0)).collect();
        let c = CoefficientSequence::new(values).unwrap();
        let built = construct(&c, d).unwrap();
        prop_assert!(built.certificate.verdict);
        let cert = certify_bearings(&c, built.placement.bearings(), 1e-8).unwrap();
        prop_assert!(cert.verdict, "{:?}", cert);
        prop_assert!((cert.objective - lower_bound(&c, d).unwrap()).abs() <= 1e-8 * cert.objective.max(1.0));
    }

    #[test]
    fn objective_never_beats_the_bound(c in coeffs(3), seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let pl = random_placement(3, &vec![1.0; c.len()], &mut rng).unwrap();
        let g = optiplace::frame_operator(&c, pl.bearings()).unwrap();
        let beta = lower_bound(&c, 3).unwrap();
        prop_assert!(objective(&g) >= beta * (1.0 - 1e-12));
        prop_assert!(optimality_error(&pl, &range_only(&c)).unwrap() >= -1e-9 * beta.max(1.0));
    }

    #[test]
    fn irregularity_partition_is_consistent(c in coeffs(3)) {
        let r = irregularity(&c, 3).unwrap();
        prop_assert!(r.k0 < 3);
        prop_assert_eq!(r.dominant.len() + r.residual.len(), c.len());
        let sq = c.squares();
        let rest: f64 = r.residual.iter().map(|&i| sq[i]).sum();
        // The largest residual term is regular for the remaining dimensions.
        let top = r.residual.iter().map(|&i| sq[i]).fold(0.0, f64::max);
        prop_assert!(top <= rest / (3 - r.k0) as f64 * (1.0 + 1e-9));
        for &i in &r.dominant {
            prop_assert!(sq[i] >= top);
        }
    }

    #[test]
    fn error_is_invariant_under_isometries(c in coeffs(3), seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let n = c.len();
        let pl = random_placement(3, &vec![1.0; n], &mut rng).unwrap();
        let u = OrthogonalTransform::random(3, &mut rng);
        let signs = SignPattern::new((0..n).map(|i| if (seed >> i) & 1 == 0 { 1 } else { -1 }).collect()).unwrap();
        let moved = transform_placement(&pl, &u, &signs, &Permutation::identity(n)).unwrap();
        let specs = range_only(&c);
        let a = optimality_error(&pl, &specs).unwrap();
        let b = optimality_error(&moved, &specs).unwrap();
        prop_assert!((a - b).abs() <= 1e-10 * lower_bound(&c, 3).unwrap().max(1.0));
    }
}

use proptest::prelude::*;

use tiltlab::exact::{detailed_balance_defect, ExactLaw};
use tiltlab::stats::{ks_distance, ks_dominance};
use tiltlab::{
    curved_max, plain_max, BoundaryData, ChainState, Coupling, CurvedProfile, EmpiricalSummary, FloorCeiling,
    HeatBathKernel, PathEnsemble, Profile, RngStream, TiltedEnsembleSpec,
};

fn grid(t_n: i64, resolution: u32) -> Vec<f64> {
    (-t_n..=t_n).map(|k| k as f64 / resolution as f64).collect()
}

fn path_strategy() -> impl Strategy<Value = (Vec<f64>, Vec<f64>)> {
    (1i64..20, 1u32..16).prop_flat_map(|(t_n, n)| {
        let times = grid(t_n, n);
        let len = times.len();
        (Just(times), prop::collection::vec(-3.0f64..5.0, len))
    })
}

fn sample_strategy() -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec((-20i32..20).prop_map(|k| k as f64 * 0.25), 1..60)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn rescaling_composes(
        (times, heights) in path_strategy(),
        g1 in 0.2f64..5.0,
        g2 in 0.2f64..5.0,
    ) {
        let p = PathEnsemble::new(times, 1, heights).unwrap();
        let once = p.rescale(g1 * g2).unwrap();
        let twice = p.rescale(g1).unwrap().rescale(g2).unwrap();
        for (a, b) in once.heights().iter().zip(twice.heights()) {
            prop_assert!((a - b).abs() <= 1e-12 * (1.0 + a.abs()));
        }
        for (a, b) in once.times().iter().zip(twice.times()) {
            prop_assert!((a - b).abs() <= 1e-12 * (1.0 + a.abs()));
        }
        let back = p.rescale(g1).unwrap().rescale(1.0 / g1).unwrap();
        for (a, b) in back.heights().iter().zip(p.heights()) {
            prop_assert!((a - b).abs() <= 1e-12 * (1.0 + a.abs()));
        }
    }

    #[test]
    fn rescaling_moves_the_maximum_by_the_root(
        (times, heights) in path_strategy(),
        gamma in 0.2f64..5.0,
    ) {
        let p = PathEnsemble::new(times, 1, heights).unwrap();
        let m = plain_max(p.path(0));
        let r = p.rescale(gamma).unwrap();
        prop_assert!((plain_max(r.path(0)) - m / gamma.sqrt()).abs() < 1e-12 * (1.0 + m.abs()));
    }

    #[test]
    fn curved_max_shifts_with_the_path(
        (times, heights) in path_strategy(),
        alpha in 0.05f64..0.45,
        c in -3.0f64..3.0,
    ) {
        let phi = CurvedProfile::new(alpha, &times).unwrap();
        let lifted: Vec<f64> = heights.iter().map(|h| h + c).collect();
        let excess = heights
            .iter()
            .zip(phi.values())
            .map(|(h, f)| h - f)
            .fold(f64::NEG_INFINITY, f64::max);
        let xi = curved_max(&lifted, &phi).unwrap();
        prop_assert!((xi - (excess + c).max(0.0)).abs() < 1e-12);
        // the lift dominates the path and is the least such
        prop_assert!(lifted.iter().zip(phi.values()).all(|(h, f)| xi + f >= h - 1e-12));
        prop_assert!(xi == 0.0 || lifted.iter().zip(phi.values()).any(|(h, f)| (xi + f - h).abs() < 1e-12));
    }

    #[test]
    fn curved_max_is_monotone(
        (times, heights) in path_strategy(),
        bumps in prop::collection::vec(0.0f64..2.0, 41),
        alpha in 0.05f64..0.45,
    ) {
        let phi = CurvedProfile::new(alpha, &times).unwrap();
        let higher: Vec<f64> = heights.iter().zip(&bumps).map(|(h, b)| h + b).collect();
        prop_assert!(curved_max(&heights, &phi).unwrap() <= curved_max(&higher, &phi).unwrap());
        prop_assert!(curved_max(&heights, &phi).unwrap() <= plain_max(&heights).max(0.0));
    }

    #[test]
    fn ks_distance_is_a_metric(a in sample_strategy(), b in sample_strategy(), c in sample_strategy()) {
        let (a, b, c) = (
            EmpiricalSummary::new(a).unwrap(),
            EmpiricalSummary::new(b).unwrap(),
            EmpiricalSummary::new(c).unwrap(),
        );
        let ab = ks_distance(&a, &b);
        prop_assert_eq!(ks_distance(&a, &a), 0.0);
        prop_assert_eq!(ab, ks_distance(&b, &a));
        prop_assert!((0.0..=1.0).contains(&ab));
        prop_assert!(ab <= ks_distance(&a, &c) + ks_distance(&c, &b) + 1e-12);
        let one_sided = ks_dominance(&a, &b).statistic;
        prop_assert!(one_sided <= ab + 1e-12 && one_sided >= 0.0);
    }

    #[test]
    fn shifted_samples_dominate(a in sample_strategy(), s in 0.0f64..3.0) {
        let up: Vec<f64> = a.iter().map(|x| x + s).collect();
        let (lo, up) = (EmpiricalSummary::new(a).unwrap(), EmpiricalSummary::new(up).unwrap());
        prop_assert_eq!(ks_dominance(&lo, &up).statistic, 0.0);
    }
}

fn small_spec(n: usize, t_n: i64, resolution: u32, a: f64, lambda: f64) -> TiltedEnsembleSpec {
    TiltedEnsembleSpec::geometric(n, t_n as f64 / resolution as f64, a, lambda, resolution)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn coupled_chains_stay_ordered(
        n in 1usize..4,
        t_n in 2i64..12,
        resolution in 1u32..10,
        a in 0.2f64..3.0,
        extra in 0.0f64..2.0,
        lambda in 1.0f64..3.0,
        floor in 0.0f64..0.8,
        seed in any::<u64>(),
    ) {
        let upper = small_spec(n, t_n, resolution, a, lambda);
        let mut lower = small_spec(n, t_n, resolution, a + extra, lambda);
        lower.floor = None;
        let mut upper = upper;
        upper.floor = Some(FloorCeiling::constant(floor));
        let coupling = Coupling::new(&lower, &upper).unwrap();
        let mut cs = coupling.start(RngStream::new(seed, 0), None).unwrap();
        for _ in 0..20_000 {
            prop_assert!(coupling.step(&mut cs).is_ok());
        }
        prop_assert!(cs.lower.below(&cs.upper));
    }

    #[test]
    fn chains_stay_admissible(
        n in 1usize..4,
        t_n in 1i64..10,
        resolution in 1u32..10,
        a in 0.2f64..3.0,
        lambda in 1.0f64..3.0,
        seed in any::<u64>(),
    ) {
        let spec = small_spec(n, t_n, resolution, a, lambda);
        let kernel = HeatBathKernel::new(&spec).unwrap();
        let mut state = ChainState::new(&kernel, kernel.minimal_config().unwrap(), RngStream::new(seed, 3)).unwrap();
        for j in 0..5_000 {
            kernel.step(&mut state);
            if j % 97 == 0 {
                prop_assert!(kernel.model().admits(&state.ens).is_ok());
            }
        }
        prop_assert!(kernel.model().admits(&state.ens).is_ok());
        // parity at the centre is fixed by the path index
        let c = state.ens.sites() / 2;
        for i in 0..n {
            prop_assert_eq!((state.ens.get(i, c) - (n - 1 - i) as i32).rem_euclid(2), 0);
        }
    }

    #[test]
    fn detailed_balance_on_random_instances(
        two in any::<bool>(),
        t_n in 1i64..3,
        resolution in 1u32..5,
        a in 0.1f64..4.0,
        lambda in 1.0f64..3.0,
        lift in 0i32..2,
        tilted in any::<bool>(),
    ) {
        let sqrt_n = (resolution as f64).sqrt();
        let ends: Vec<i32> = if two { vec![3 + 2 * lift, 1] } else { vec![1 + 2 * lift] };
        let x: Vec<f64> = ends.iter().map(|&w| w as f64 / sqrt_n).collect();
        let mut spec = small_spec(ends.len(), t_n, resolution, a, lambda);
        spec.boundary = BoundaryData::Fixed { left: x.clone(), right: x };
        if tilted {
            spec.tilts = Some(
                (0..ends.len())
                    .map(|i| Profile::Power { offset: a, scale: i as f64 + 0.5, alpha: 1.0 })
                    .collect(),
            );
        }
        let kernel = HeatBathKernel::new(&spec).unwrap();
        let law = ExactLaw::new(kernel.model()).unwrap();
        let (defect, _) = detailed_balance_defect(&kernel, &law).unwrap();
        prop_assert!(defect < 1e-12, "defect {}", defect);
    }
}

use std::sync::Arc;

use cascol::dynamics::{
    cascade_growth, delta_matrix, drift, euler_step, expected_cascade_size, q_vector, PaletteConfig, TuningParams,
    TypeDistribution,
};
use cascol::process::{
    complete_remainder, gen_regular_graph, run_phase1, tidy_to_proper, Color, ColoringState, KeyedRng,
    PermutedPalette, Randomness,
};
use proptest::prelude::*;

fn configs() -> impl Strategy<Value = PaletteConfig> {
    prop_oneof![Just((4, 3)), Just((6, 4)), Just((5, 4)), Just((3, 2)), Just((5, 3))]
        .prop_map(|(r, p)| PaletteConfig::new(r, p).unwrap())
}

/// A distribution with total mass in `(0, 1]` and some mass on positive degrees.
fn distributions() -> impl Strategy<Value = TypeDistribution> {
    configs().prop_flat_map(|cfg| {
        (prop::collection::vec(0.0f64..1.0, cfg.num_types()), 0.05f64..=1.0).prop_filter_map(
            "no degree-weighted mass",
            move |(raw, mass)| {
                let total: f64 = raw.iter().sum();
                let z = TypeDistribution::from_vec(cfg, raw.iter().map(|x| x / total * mass).collect()).ok()?;
                q_vector(&z).ok().map(|_| z)
            },
        )
    })
}

fn subcritical() -> impl Strategy<Value = TypeDistribution> {
    distributions().prop_filter("supercritical", |z| cascade_growth(z).unwrap() < 0.999)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(500))]

    #[test]
    fn q_is_normalized(z in distributions()) {
        let q = q_vector(&z).unwrap();
        prop_assert!((q.total_mass() - 1.0).abs() <= 1e-12);
        prop_assert!(q.as_slice().iter().all(|&x| x >= 0.0));
    }

    #[test]
    fn growth_is_bounded(z in distributions()) {
        let cfg = z.cfg();
        let g = cascade_growth(&z).unwrap();
        prop_assert!(g >= 0.0);
        prop_assert!(g <= 2.0 / cfg.p as f64 * (cfg.r as f64 - 1.0) + 1e-12);
    }

    #[test]
    fn rows_sum_to_minus_cascade_size(z in subcritical()) {
        let m = delta_matrix(&z).unwrap();
        for s in z.cfg().types() {
            let size = expected_cascade_size(&z, s).unwrap();
            prop_assert!((m.row_sum(s) + size).abs() <= 1e-10, "row {s}: {} vs {size}", m.row_sum(s));
        }
    }

    #[test]
    fn drift_total_is_weighted_cascade_mass(z in subcritical(), w in 0.0f64..4.0) {
        let cfg = z.cfg();
        let params = TuningParams::new(cfg, vec![w; cfg.num_types()], 0.01).unwrap();
        let f = drift(&z, &params).unwrap();
        let expected: f64 = cfg.types().map(|s| w * z.get(s) * expected_cascade_size(&z, s).unwrap()).sum();
        prop_assert!((f.iter().sum::<f64>() + expected).abs() <= 1e-10 * (1.0 + expected));
    }

    #[test]
    fn formulas_are_deterministic(z in subcritical()) {
        let params = TuningParams::standard(z.cfg(), 0.01).unwrap();
        let a = euler_step(&z, &params).unwrap();
        let b = euler_step(&z, &params).unwrap();
        prop_assert_eq!(a.z, b.z);
        prop_assert_eq!(a.clamped, b.clamped);
        prop_assert_eq!(delta_matrix(&z).unwrap(), delta_matrix(&z).unwrap());
    }
}

fn run_all<R: Randomness>(graph: &Arc<cascol::process::Graph>, params: &TuningParams, modified: bool, rng: &R) -> ColoringState {
    let mut state = ColoringState::new(graph.clone(), params.cfg()).unwrap();
    run_phase1(&mut state, params, 60, modified, rng).unwrap();
    state.check_invariants().unwrap();
    complete_remainder(&mut state, rng).unwrap();
    tidy_to_proper(&mut state, rng).unwrap();
    state
}

fn relabel(color: Color, perm: &[u32]) -> Color {
    match color {
        Color::Palette(c) => Color::Palette(perm[c as usize] as u8),
        other => other,
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn process_is_deterministic(seed in any::<u64>(), graph_seed in any::<u64>(), modified in any::<bool>()) {
        let cfg = PaletteConfig::new(4, 3).unwrap();
        let graph = Arc::new(gen_regular_graph(600, 4, graph_seed).unwrap());
        let params = TuningParams::standard(cfg, 0.2).unwrap();
        let a = run_all(&graph, &params, modified, &KeyedRng::new(seed));
        let b = run_all(&graph, &params, modified, &KeyedRng::new(seed));
        prop_assert_eq!(a.colors(), b.colors());
        prop_assert!(a.verify_proper().is_empty());
    }

    #[test]
    fn palette_relabeling_commutes(
        seed in any::<u64>(),
        graph_seed in any::<u64>(),
        perm in Just(vec![0u32, 1, 2, 3]).prop_shuffle(),
        modified in any::<bool>(),
    ) {
        let cfg = PaletteConfig::new(6, 4).unwrap();
        let graph = Arc::new(gen_regular_graph(400, 6, graph_seed).unwrap());
        let params = TuningParams::standard(cfg, 0.2).unwrap();
        let base = run_all(&graph, &params, modified, &KeyedRng::new(seed));
        let permuted = run_all(&graph, &params, modified, &PermutedPalette::new(KeyedRng::new(seed), &perm));
        let expected: Vec<Color> = base.colors().into_iter().map(|c| relabel(c, &perm)).collect();
        prop_assert_eq!(permuted.colors(), expected);
    }
}

use epb_core::bounds::{
    fractional_packing, independence_number, lovasz_theta, Certificate, PSD_TOLERANCE,
    THETA_TOLERANCE,
};
use epb_core::events::{are_exclusive, close_event, Event, ObservableId, Outcome, Registry};
use epb_core::graph::{from_adjacency, ExclusivityGraph};
use epb_core::proof::sum_identity_residual;
use epb_core::scenario::{
    chsh_functional, primed, product_behavior, random_chsh_behavior, Behavior,
};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn outcome() -> impl Strategy<Value = Outcome> {
    prop_oneof![Just(Outcome::Plus), Just(Outcome::Minus)]
}

/// A raw assignment over the two-copy registry; may be contradictory.
fn raw_assignment() -> impl Strategy<Value = Vec<(ObservableId, Outcome)>> {
    let n = Registry::two_copy_chsh().len();
    prop::collection::vec((0..n).prop_map(ObservableId), 0..6)
        .prop_flat_map(|ids| {
            let len = ids.len();
            (Just(ids), prop::collection::vec(outcome(), len))
        })
        .prop_map(|(ids, outs)| ids.into_iter().zip(outs).collect())
}

fn event() -> impl Strategy<Value = Event> {
    raw_assignment().prop_filter_map("contradictory", |a| {
        close_event(&Registry::two_copy_chsh(), &a).ok()
    })
}

fn graph(max_n: usize) -> impl Strategy<Value = ExclusivityGraph> {
    (1..=max_n)
        .prop_flat_map(|n| {
            let pairs = n * (n - 1) / 2;
            (
                Just(n),
                prop::collection::vec(any::<bool>(), pairs),
                prop::collection::vec(0.1f64..3.0, n),
            )
        })
        .prop_map(|(n, mask, weights)| {
            let edges: Vec<_> = (0..n)
                .flat_map(|i| (i + 1..n).map(move |j| (i, j)))
                .zip(mask)
                .filter_map(|(e, keep)| keep.then_some(e))
                .collect();
            from_adjacency(n, &edges, weights).unwrap()
        })
}

fn behavior() -> impl Strategy<Value = Behavior> {
    any::<u64>().prop_map(|seed| random_chsh_behavior(&mut ChaCha8Rng::seed_from_u64(seed)))
}

fn bounds(g: &ExclusivityGraph) -> (f64, f64, f64) {
    (
        independence_number(g).unwrap().value,
        lovasz_theta(g).unwrap().value,
        fractional_packing(g).unwrap().value,
    )
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn closure_is_idempotent(e in event()) {
        prop_assert_eq!(e.close().unwrap(), e);
    }

    #[test]
    fn closure_contains_the_assignment(a in raw_assignment()) {
        if let Ok(e) = close_event(&Registry::two_copy_chsh(), &a) {
            for (id, o) in a {
                prop_assert_eq!(e.get(id), Some(o));
            }
        }
    }

    #[test]
    fn exclusivity_is_symmetric_and_irreflexive(e1 in event(), e2 in event()) {
        prop_assert_eq!(are_exclusive(&e1, &e2), are_exclusive(&e2, &e1));
        prop_assert!(!are_exclusive(&e1, &e1));
    }

    #[test]
    fn equivalent_events_have_the_same_exclusions(a in raw_assignment(), e3 in event()) {
        let r = Registry::two_copy_chsh();
        let mut reversed = a.clone();
        reversed.reverse();
        if let (Ok(e1), Ok(e2)) = (close_event(&r, &a), close_event(&r, &reversed)) {
            prop_assert_eq!(&e1, &e2);
            prop_assert_eq!(are_exclusive(&e1, &e3), are_exclusive(&e2, &e3));
        }
    }

    #[test]
    fn chsh_value_is_in_range(b in behavior()) {
        let s = chsh_functional(&b).unwrap();
        prop_assert!((0.0..=4.0).contains(&s));
    }

    #[test]
    fn product_marginals_recover_the_factors(b1 in behavior(), b2 in behavior()) {
        let joint = product_behavior(&b1, &b2).unwrap();
        for (c1, p1) in b1.contexts() {
            for (c2, p2) in b2.contexts() {
                let key = [c1[0].clone(), c1[1].clone(), primed(&c2[0]), primed(&c2[1])];
                let probs = joint.context(&key).unwrap();
                for x in 0..4 {
                    let first: f64 = (0..4).map(|y| probs[4 * x + y]).sum();
                    let second: f64 = (0..4).map(|y| probs[4 * y + x]).sum();
                    prop_assert!((first - p1[x]).abs() <= 1e-12);
                    prop_assert!((second - p2[x]).abs() <= 1e-12);
                }
            }
        }
    }

    #[test]
    fn sum_identity_holds(b in behavior()) {
        prop_assert!(sum_identity_residual(&b).unwrap() <= 1e-9);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn sandwich(g in graph(9)) {
        let (alpha, theta, packing) = bounds(&g);
        prop_assert!(alpha <= theta + THETA_TOLERANCE, "{alpha} > {theta}");
        prop_assert!(theta <= packing + THETA_TOLERANCE, "{theta} > {packing}");
    }

    #[test]
    fn vertex_order_does_not_matter(g in graph(8), seed in any::<u64>()) {
        use rand::seq::SliceRandom;
        let mut order: Vec<usize> = (0..g.len()).collect();
        order.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
        let h = g.permuted(&order).unwrap();
        let (a1, t1, p1) = bounds(&g);
        let (a2, t2, p2) = bounds(&h);
        prop_assert!((a1 - a2).abs() <= 1e-9);
        prop_assert!((t1 - t2).abs() <= THETA_TOLERANCE);
        prop_assert!((p1 - p2).abs() <= 1e-7);
    }

    #[test]
    fn adding_an_edge_never_raises_a_bound(g in graph(8), pick in any::<prop::sample::Index>()) {
        let n = g.len();
        let missing: Vec<_> = (0..n)
            .flat_map(|i| (i + 1..n).map(move |j| (i, j)))
            .filter(|&(i, j)| !g.is_edge(i, j))
            .collect();
        prop_assume!(!missing.is_empty());
        let mut edges = g.edges();
        edges.push(missing[pick.index(missing.len())]);
        let h = from_adjacency(n, &edges, g.weights().to_vec()).unwrap();
        let (a1, t1, p1) = bounds(&g);
        let (a2, t2, p2) = bounds(&h);
        prop_assert!(a2 <= a1 + 1e-9);
        prop_assert!(t2 <= t1 + THETA_TOLERANCE);
        prop_assert!(p2 <= p1 + 1e-7);
    }

    #[test]
    fn bounds_scale_with_weights(g in graph(8), c in 0.25f64..4.0) {
        let scaled = g.with_weights(g.weights().iter().map(|w| w * c).collect()).unwrap();
        let (a1, t1, p1) = bounds(&g);
        let (a2, t2, p2) = bounds(&scaled);
        prop_assert!((a2 - c * a1).abs() <= 1e-9 * (1.0 + a2));
        prop_assert!((t2 - c * t1).abs() <= THETA_TOLERANCE * (1.0 + t2));
        prop_assert!((p2 - c * p1).abs() <= 1e-7 * (1.0 + p2));
    }

    #[test]
    fn certificates_check_out(g in graph(10)) {
        for report in [independence_number(&g).unwrap(), fractional_packing(&g).unwrap(), lovasz_theta(&g).unwrap()] {
            prop_assert!(report.verify(&g).is_ok(), "{:?}", report.method);
            match &report.certificate {
                Certificate::LpAssignment { clique_duals, bound_duals, .. } => {
                    let dual: f64 = clique_duals.iter().chain(bound_duals).sum();
                    prop_assert!((dual - report.value).abs() <= 1e-7 * (1.0 + report.value));
                }
                Certificate::SdpMatrix { min_eigenvalue, .. } => {
                    prop_assert!(*min_eigenvalue >= -PSD_TOLERANCE);
                }
                Certificate::IndependentSet { vertices, .. } => {
                    for (k, &u) in vertices.iter().enumerate() {
                        for &v in &vertices[k + 1..] {
                            prop_assert!(!g.is_edge(u, v));
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn reports_are_deterministic(g in graph(8)) {
        for (a, b) in [
            (independence_number(&g).unwrap(), independence_number(&g).unwrap()),
            (fractional_packing(&g).unwrap(), fractional_packing(&g).unwrap()),
            (lovasz_theta(&g).unwrap(), lovasz_theta(&g).unwrap()),
        ] {
            prop_assert_eq!(&a.fingerprint, &b.fingerprint);
            prop_assert_eq!(a.value.to_bits(), b.value.to_bits());
        }
    }
}

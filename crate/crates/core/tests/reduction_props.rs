use drqa_core::dimred::{classical_mds, reduce, smacof, Method, ReductionRequest, SmacofInit, SmacofParams, Transform};
use drqa_core::geometry::euclidean_distances;
use drqa_core::manifolds::{generate, ManifoldShape, ManifoldSpec};
use drqa_core::Configuration;
use proptest::prelude::*;

fn points(n: usize, m: usize) -> impl Strategy<Value = Configuration> {
    prop::collection::vec(-10.0f64..10.0, n * m).prop_map(move |v| Configuration::from_flat(n, m, v).unwrap())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn classical_mds_ignores_rigid_motion(c in points(12, 2), angle in 0.0f64..6.28, t in -20.0f64..20.0) {
        let moved = Configuration::from_flat(12, 2, (0..12).flat_map(|i| {
            let (x, y) = (c.get(i, 0), c.get(i, 1));
            [x * angle.cos() - y * angle.sin() + t, x * angle.sin() + y * angle.cos() - t]
        }).collect()).unwrap();
        let a = classical_mds(&euclidean_distances(&c, 2.0).unwrap(), 2).unwrap();
        let b = classical_mds(&euclidean_distances(&moved, 2.0).unwrap(), 2).unwrap();
        let (da, db) = (euclidean_distances(&a.embedding, 2.0).unwrap(), euclidean_distances(&b.embedding, 2.0).unwrap());
        for (x, y) in da.values().iter().zip(db.values()) {
            prop_assert!((x - y).abs() < 1e-8);
        }
    }

    #[test]
    fn smacof_stress_never_increases(c in points(15, 4), seed in 0u64..1000, ordinal in any::<bool>()) {
        let params = SmacofParams {
            transform: if ordinal { Transform::Ordinal } else { Transform::Ratio },
            init: SmacofInit::Random,
            max_iter: 200,
            ..Default::default()
        };
        let r = smacof(&euclidean_distances(&c, 2.0).unwrap(), 2, None, &params, seed).unwrap();
        let h = &r.diagnostics.smacof().unwrap().stress_history;
        for w in h.windows(2) {
            prop_assert!(w[1] <= w[0] * (1.0 + 1e-9) + 1e-12, "{} -> {}", w[0], w[1]);
        }
    }
}

#[test]
fn every_method_keeps_item_order_and_labels() {
    let c = generate(&ManifoldSpec::new(ManifoldShape::SwissRoll, 120, 3)).unwrap();
    let labels: Vec<String> = (0..120).map(|i| format!("p{i}")).collect();
    let c = c.with_labels(labels.clone()).unwrap();
    for name in Method::NAMES {
        let r = reduce(&c, &ReductionRequest::new(Method::from_name(name).unwrap(), 2).with_seed(1)).unwrap();
        assert_eq!(r.embedding.n(), 120, "{name}");
        assert_eq!(r.embedding.dim(), 2, "{name}");
        assert_eq!(r.embedding.labels(), Some(&labels[..]), "{name}");
        assert!(r.embedding.values().iter().all(|v| v.is_finite()), "{name}");
    }
}

#[test]
fn reductions_are_deterministic() {
    let c = generate(&ManifoldSpec::new(ManifoldShape::TorusRandom, 100, 9)).unwrap();
    for name in Method::NAMES {
        let req = ReductionRequest::new(Method::from_name(name).unwrap(), 2).with_seed(4);
        assert_eq!(reduce(&c, &req).unwrap(), reduce(&c, &req).unwrap(), "{name}");
    }
}

use proptest::prelude::*;

use topomargin::metrics::{
    component_distance, diagram_distance, distance_matrix, truncation_value, DistanceMode, WeightVector,
};
use topomargin::persistence::{Bar, PersistenceDiagram};

fn bars() -> impl Strategy<Value = Vec<Bar>> {
    prop::collection::vec((0.0f64..5.0, 0.0f64..3.0), 0..6)
        .prop_map(|v| v.into_iter().map(|(b, p)| Bar::new(b, b + p)).collect())
}

fn diagram() -> impl Strategy<Value = PersistenceDiagram> {
    (bars(), bars(), bars()).prop_map(|(a, b, c)| PersistenceDiagram {
        id: "d".into(),
        bars: [a, b, c],
    })
}

fn weights() -> impl Strategy<Value = WeightVector> {
    (0.0f64..1.0, 0.0f64..1.0, 0.0f64..1.0).prop_map(|(a, b, c)| WeightVector([a, b, c]))
}

const HD: DistanceMode = DistanceMode::Hausdorff;
const MP: DistanceMode = DistanceMode::MaxPairwise;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn hausdorff_triangle_inequality(x in diagram(), y in diagram(), z in diagram(), w in weights()) {
        let xy = diagram_distance(&x, &y, &w, HD);
        let yz = diagram_distance(&y, &z, &w, HD);
        let xz = diagram_distance(&x, &z, &w, HD);
        prop_assert!(xz <= xy + yz + 1e-9 * (1.0 + xz));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn hausdorff_identity_and_symmetry(x in diagram(), y in diagram(), w in weights()) {
        prop_assert_eq!(diagram_distance(&x, &x, &w, HD), 0.0);
        prop_assert_eq!(diagram_distance(&x, &y, &w, HD), diagram_distance(&y, &x, &w, HD));
        prop_assert!(diagram_distance(&x, &y, &w, HD) >= 0.0);
    }

    #[test]
    fn max_pairwise_symmetry(x in diagram(), y in diagram(), w in weights()) {
        prop_assert_eq!(diagram_distance(&x, &y, &w, MP), diagram_distance(&y, &x, &w, MP));
    }

    #[test]
    fn scaling(x in diagram(), y in diagram(), w in weights(), s in 0.1f64..10.0) {
        for mode in [HD, MP] {
            let d = diagram_distance(&x, &y, &w, mode);
            let ds = diagram_distance(&x.scaled(s), &y.scaled(s), &w, mode);
            prop_assert!((ds - s * d).abs() <= 1e-9 * (1.0 + ds));
        }
    }

    // For one-point sets the augmented Hausdorff distance is the smaller of
    // the point-to-point and the farther point-to-diagonal distance.
    #[test]
    fn single_points(b1 in 0.0f64..5.0, p1 in 0.0f64..3.0, b2 in 0.0f64..5.0, p2 in 0.0f64..3.0) {
        let (x, y) = (Bar::new(b1, b1 + p1), Bar::new(b2, b2 + p2));
        let direct = ((b1 - b2).powi(2) + (p1 + b1 - p2 - b2).powi(2)).sqrt();
        let expected = direct.min(p1.max(p2) / 2f64.sqrt());
        let got = component_distance(&[x], &[y], HD);
        prop_assert!((got - expected).abs() <= 1e-12 * (1.0 + expected));
        prop_assert!((component_distance(&[x], &[y], MP) - direct).abs() <= 1e-12 * (1.0 + direct));
    }
}

#[test]
fn max_pairwise_is_not_a_metric() {
    let x = PersistenceDiagram {
        id: "x".into(),
        bars: [vec![Bar::new(0.0, 1.0), Bar::new(0.0, 3.0)], vec![], vec![]],
    };
    let w = WeightVector([1.0, 0.0, 0.0]);
    assert!(diagram_distance(&x, &x, &w, MP) > 0.0);
    assert_eq!(diagram_distance(&x, &x, &w, HD), 0.0);
    let dm = distance_matrix(&[x.clone(), x], &w, MP);
    assert!(dm.get(0, 0) > 0.0);
}

#[test]
fn empty_component_uses_diagonal() {
    let a = [Bar::new(1.0, 3.0), Bar::new(0.0, 0.5)];
    let d = component_distance(&a, &[], HD);
    assert!((d - 2.0 / 2f64.sqrt()).abs() < 1e-12);
    assert_eq!(component_distance(&[], &[], MP), 0.0);
}

#[test]
fn matrix_is_symmetric_with_zero_diagonal() {
    let ds: Vec<PersistenceDiagram> = (0..5)
        .map(|i| PersistenceDiagram {
            id: format!("d{i}"),
            bars: [vec![Bar::new(0.0, i as f64)], vec![Bar::new(0.5, 0.5 + 0.3 * i as f64)], vec![]],
        })
        .collect();
    let dm = distance_matrix(&ds, &WeightVector::default(), HD);
    for i in 0..5 {
        assert_eq!(dm.get(i, i), 0.0);
        for j in 0..5 {
            assert_eq!(dm.get(i, j), dm.get(j, i));
        }
    }
    assert!(dm.to_csv().starts_with("id,d0,d1"));
}

#[test]
fn truncation_value_rules() {
    let d = PersistenceDiagram {
        id: "d".into(),
        bars: [vec![Bar::new(0.0, f64::INFINITY), Bar::new(0.0, 2.0)], vec![], vec![]],
    };
    assert!((truncation_value([&d]) - 2.2).abs() < 1e-12);
    let only_inf = PersistenceDiagram {
        id: "e".into(),
        bars: [vec![Bar::new(0.0, f64::INFINITY)], vec![], vec![]],
    };
    assert_eq!(truncation_value([&only_inf]), 1.0);
}

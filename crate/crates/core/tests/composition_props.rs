use std::collections::BTreeMap;

use proptest::prelude::*;
use uslh_core::compose::*;
use uslh_core::stats::{aggregate_groups, Group};

type Composite = fn(f64, f64, f64, &Alpha) -> uslh_core::Result<f64>;

fn alpha() -> impl Strategy<Value = Alpha> {
    (0.0f64..1.0, 0.0f64..1.0, 0.0f64..1.0)
        .prop_filter("non-zero mass", |(a, b, c)| a + b + c > 1e-6)
        .prop_map(|(a, b, c)| {
            let s = a + b + c;
            // the last coefficient absorbs rounding so the sum is exactly representable
            let (a, b) = (a / s, b / s);
            Alpha::new(a, b, (1.0 - a - b).max(0.0)).unwrap()
        })
}

fn unit() -> impl Strategy<Value = f64> {
    0.0f64..=1.0
}

proptest! {
    #[test]
    fn composites_stay_in_unit_interval(su in unit(), ss in unit(), sl in unit(), a in alpha()) {
        for v in [usl_h(su, ss, sl, &a), usl_h_full(su, ss, sl, &a), usl_a(su, ss, sl, &a)] {
            let v = v.unwrap();
            prop_assert!((0.0..=1.0 + 1e-12).contains(&v));
        }
        for k in MeanKind::ALL {
            let v = composite_mean(su, ss, sl, k).unwrap();
            prop_assert!((0.0..=1.0 + 1e-12).contains(&v));
        }
    }

    #[test]
    fn composites_are_monotone(su in unit(), ss in unit(), sl in unit(), d in 0.0f64..1.0, which in 0usize..3, a in alpha()) {
        let mut hi = [su, ss, sl];
        hi[which] = (hi[which] + d).min(1.0);
        let f: [Composite; 3] = [usl_h, usl_h_full, usl_a];
        for g in f {
            prop_assert!(g(hi[0], hi[1], hi[2], &a).unwrap() >= g(su, ss, sl, &a).unwrap() - 1e-15);
        }
    }

    #[test]
    fn hierarchy_gates(su in unit(), sl in unit(), ss in unit(), a in alpha()) {
        prop_assert_eq!(usl_h(su, 0.0, sl, &a).unwrap(), a.values()[0] * su);
        prop_assert_eq!(usl_h_full(0.0, ss, sl, &a).unwrap(), 0.0);
        let gap = usl_a(su, ss, sl, &a).unwrap() - usl_h(su, ss, sl, &a).unwrap();
        prop_assert!((gap - a.values()[2] * sl * (1.0 - ss)).abs() < 1e-12);
    }

    #[test]
    fn normalizer_maps_into_unit_interval(values in prop::collection::vec(-50.0f64..50.0, 1..30), probe in -100.0f64..100.0) {
        let n = Normalizer::fit([("m", values.as_slice())]).unwrap();
        let v = n.normalize("m", probe).unwrap();
        prop_assert!((0.0..=1.0).contains(&v));
        let lo = values.iter().copied().fold(f64::INFINITY, f64::min);
        let hi = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        if lo < hi {
            prop_assert_eq!(n.normalize("m", lo).unwrap(), 0.0);
            prop_assert_eq!(n.normalize("m", hi).unwrap(), 1.0);
        } else {
            prop_assert_eq!(v, 0.5);
        }
    }

    #[test]
    fn weights_text_round_trips(a in alpha(), lo in -10.0f64..0.0, hi in 0.0f64..10.0, b in 0.0f64..1.0) {
        let beta = Beta::new(BTreeMap::from([("x".to_string(), b), ("y".to_string(), 1.0 - b)]));
        prop_assume!(beta.is_ok());
        let w = CompositionWeights {
            alpha: a,
            beta: Some(beta.unwrap()),
            normalizer: Normalizer::from_bounds(BTreeMap::from([("m".to_string(), (lo, hi))])).unwrap(),
        };
        let back: CompositionWeights = w.to_text().parse().unwrap();
        prop_assert_eq!(back, w);
    }
}

#[test]
fn binary_groups_order_under_equal_alpha() {
    let a = Alpha::equal();
    let patterns = [
        (0, 0, 0),
        (0, 0, 1),
        (1, 0, 0),
        (1, 0, 1),
        (1, 1, 0),
        (1, 1, 1),
    ];
    let scored: Vec<((u8, u8, u8), [f64; 1])> = patterns
        .iter()
        .map(|&(u, s, l)| {
            (
                (u, s, l),
                [usl_h(f64::from(u), f64::from(s), f64::from(l), &a).unwrap()],
            )
        })
        .collect();
    let groups = aggregate_groups(scored.iter().map(|(p, v)| (*p, &v[..])));
    let mean = |g: Group| groups[&g].means[0];
    assert_eq!(mean(Group::G1), 0.0);
    assert_eq!(mean(Group::G2), 1.0 / 3.0);
    assert_eq!(mean(Group::G3), mean(Group::G2));
    assert_eq!(mean(Group::G4), 2.0 / 3.0);
    assert_eq!(mean(Group::G5), 1.0);
}

#[test]
fn out_of_range_inputs_are_rejected() {
    let a = Alpha::equal();
    assert!(usl_h(1.2, 0.5, 0.5, &a).is_err());
    assert!(usl_a(0.5, -0.1, 0.5, &a).is_err());
    assert!(usl_h_full(0.5, 0.5, f64::NAN, &a).is_err());
    assert!(Alpha::new(0.5, 0.5, 0.5).is_err());
    assert!(Alpha::new(-0.1, 0.6, 0.5).is_err());
}

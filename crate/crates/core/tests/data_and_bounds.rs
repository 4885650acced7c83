//! Dataset round trips and bound-calculator properties.

use pairstream::bounds::{
    auc_rademacher_bound, empirical_rademacher_mc, metric_rademacher_bound, mkl_rademacher_bound, AucVariant,
    BoundInputs, LinearL2Class, MetricVariant, MklVariant,
};
use pairstream::data::{normalize_features, parse_libsvm, split, write_libsvm, Normalization, ParseOptions, SplitSpec};
use pairstream::{Dataset, LabeledPoint, RandomSource};
use proptest::prelude::*;

fn arb_dataset() -> impl Strategy<Value = Dataset> {
    (1usize..6, 1usize..30).prop_flat_map(|(d, m)| {
        proptest::collection::vec(
            (
                proptest::collection::vec(prop_oneof![Just(0.0), -1e3f64..1e3], d),
                any::<bool>(),
            ),
            m,
        )
        .prop_map(move |rows| {
            let points = rows
                .into_iter()
                .map(|(x, pos)| LabeledPoint::new(x, if pos { 1.0 } else { -1.0 }).unwrap())
                .collect();
            Dataset::new("prop", d, points).unwrap()
        })
    })
}

fn unit_sample(rng: &mut RandomSource, n: usize, d: usize) -> Vec<LabeledPoint> {
    (0..n)
        .map(|_| {
            let x: Vec<f64> = (0..d).map(|_| rng.uniform() - 0.5).collect();
            let norm = x.iter().map(|v| v * v).sum::<f64>().sqrt();
            LabeledPoint::new(x.iter().map(|v| v / norm).collect(), rng.sign()).unwrap()
        })
        .collect()
}

#[test]
fn mc_estimate_below_table_bound() {
    let mut rng = RandomSource::new(1);
    let sample = unit_sample(&mut rng, 100, 5);
    let est = empirical_rademacher_mc(LinearL2Class { radius: 1.0 }, &sample, 100_000, &mut rng).unwrap();
    let bound = auc_rademacher_bound(AucVariant::LqBall, &BoundInputs { n: 100, ..Default::default() }).unwrap();
    assert_eq!(bound, 0.2);
    assert!(est.mean <= bound + 3.0 * est.std_error, "{est:?}");
}

#[test]
fn mc_estimate_scales_with_radius() {
    let mut rng = RandomSource::new(2);
    let sample = unit_sample(&mut rng, 30, 3);
    let a = empirical_rademacher_mc(LinearL2Class { radius: 1.0 }, &sample, 2000, &mut RandomSource::new(9)).unwrap();
    let b = empirical_rademacher_mc(LinearL2Class { radius: 2.0 }, &sample, 2000, &mut RandomSource::new(9)).unwrap();
    assert!((b.mean - 2.0 * a.mean).abs() <= 1e-12);
}

proptest! {
    #[test]
    fn libsvm_round_trip(ds in arb_dataset()) {
        let text = write_libsvm(&ds);
        let back = parse_libsvm(&text, &ParseOptions { name: ds.name.clone(), ..Default::default() }).unwrap();
        prop_assert_eq!(back.dimension, ds.dimension);
        prop_assert_eq!(back.points, ds.points);
    }

    #[test]
    fn split_is_a_partition(ds in arb_dataset(), frac in 0.05f64..0.95, seed in any::<u64>()) {
        let spec = SplitSpec { train_fraction: frac, ..Default::default() };
        match split(&ds, &spec, &mut RandomSource::new(seed)) {
            Ok((train, test)) => {
                prop_assert_eq!(train.len() + test.len(), ds.len());
                let key = |p: &LabeledPoint| format!("{:?}", p);
                let mut all: Vec<String> = train.points.iter().chain(&test.points).map(key).collect();
                let mut orig: Vec<String> = ds.points.iter().map(key).collect();
                all.sort();
                orig.sort();
                prop_assert_eq!(all, orig);
            }
            Err(_) => {
                let k = (frac * ds.len() as f64).floor() as usize;
                prop_assert!(ds.len() < 2 || k == 0 || k == ds.len());
            }
        }
    }

    #[test]
    fn normalized_norms_at_most_one(ds in arb_dataset()) {
        let out = normalize_features(&ds, Normalization::UnitL2);
        for (p, q) in out.points.iter().zip(&ds.points) {
            prop_assert!(p.norm() <= 1.0 + 1e-12);
            prop_assert_eq!(p.label, q.label);
        }
    }

    #[test]
    fn bounds_halve_when_n_quadruples(n in 1usize..100_000, d in 2usize..500, xp in 0.01f64..10.0, w in 0.01f64..10.0, p in 1.01f64..8.0) {
        let q = p / (p - 1.0);
        let a = BoundInputs { n, d, x_p: xp, x_2: xp, x_inf: xp, w_norm: w, p, q, ..Default::default() };
        let b = BoundInputs { n: 4 * n, ..a };
        let close = |x: f64, y: f64| (x - 2.0 * y).abs() <= 1e-12 * x.abs().max(1.0);
        for v in AucVariant::ALL {
            prop_assert!(close(auc_rademacher_bound(v, &a).unwrap(), auc_rademacher_bound(v, &b).unwrap()));
        }
        for v in MetricVariant::ALL {
            prop_assert!(close(metric_rademacher_bound(v, &a).unwrap(), metric_rademacher_bound(v, &b).unwrap()));
        }
        for v in MklVariant::ALL {
            prop_assert!(close(mkl_rademacher_bound(v, &a).unwrap(), mkl_rademacher_bound(v, &b).unwrap()));
        }
    }
}

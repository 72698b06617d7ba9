use proptest::prelude::*;

use eds_core::datagen::*;
use eds_core::dataset::{sidecar_path, Dataset, DatasetMeta};

fn mean_std(v: impl Iterator<Item = f64> + Clone) -> (f64, f64) {
    let n = v.clone().count() as f64;
    let m = v.clone().sum::<f64>() / n;
    (m, (v.map(|x| (x - m) * (x - m)).sum::<f64>() / n).sqrt())
}

fn dataset_strategy() -> impl Strategy<Value = Dataset> {
    (1usize..4, 1usize..3, 3usize..60).prop_flat_map(|(n, m, rows)| {
        prop::collection::vec(prop::collection::vec(-1e3..1e3f64, n + m), rows).prop_map(
            move |raw| {
                let mut d = Dataset::new(n, m);
                for r in raw {
                    d.push(&r[..n], &r[n..]).unwrap();
                }
                d
            },
        )
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn standardized_columns_have_zero_mean_unit_std(d in dataset_strategy()) {
        let Ok((s, _)) = standardize(&d) else { return Ok(()) };
        for j in 0..s.feature_dim() {
            let (m, sd) = mean_std(s.feature_column(j));
            prop_assert!(m.abs() < 1e-9 && (sd - 1.0).abs() < 1e-9);
        }
        for j in 0..s.label_dim() {
            let (m, sd) = mean_std(s.label_column(j));
            prop_assert!(m.abs() < 1e-9 && (sd - 1.0).abs() < 1e-9);
        }
    }

    #[test]
    fn standardization_round_trips(d in dataset_strategy()) {
        let Ok((s, p)) = standardize(&d) else { return Ok(()) };
        let back = p.invert(&s);
        for ((x, y), (bx, by)) in d.rows().zip(back.rows()) {
            for (a, b) in x.iter().chain(y).zip(bx.iter().chain(by)) {
                prop_assert!((a - b).abs() <= 1e-9 * a.abs().max(1.0));
            }
        }
        for (x, _) in d.rows().take(5) {
            let r = p.raw_features(&p.scaled_features(x));
            for (a, b) in x.iter().zip(&r) {
                prop_assert!((a - b).abs() <= 1e-9 * a.abs().max(1.0));
            }
        }
    }

    #[test]
    fn csv_text_round_trip_is_bit_exact(d in dataset_strategy()) {
        let mut buf = Vec::new();
        d.write_csv(&mut buf).unwrap();
        prop_assert_eq!(Dataset::read_csv(buf.as_slice()).unwrap(), d);
    }

    #[test]
    fn generators_are_deterministic_per_seed(seed in 0u64..1000) {
        let specs = [
            GeneratorSpec::Motivation { n_samples: 50 },
            GeneratorSpec::MotivationNoisy { n_samples: 50, noise_std: 0.1 },
            GeneratorSpec::Lorenz(LorenzParams { n_inits: 2, horizon: 1.0, ..Default::default() }),
            GeneratorSpec::Rectangles { n_samples: 50, params: RectangleParams::default() },
        ];
        for s in &specs {
            let a = s.generate(seed).unwrap();
            prop_assert_eq!(&a, &s.generate(seed).unwrap());
            prop_assert_ne!(&a, &s.generate(seed + 1).unwrap());
        }
    }
}

#[test]
fn lorenz_trajectories_follow_rk4() {
    let p = LorenzParams {
        n_inits: 3,
        ..Default::default()
    };
    let d = gen_lorenz(&p, 11).unwrap();
    let per = p.states_per_trajectory();
    assert_eq!(d.len(), 3 * per);
    for t in 0..3 {
        let start = d.x(t * per);
        let path = integrate(|s| p.rhs(s), start, p.dt, per - 1).unwrap();
        for (k, s) in path.iter().enumerate() {
            assert_eq!(d.x(t * per + k), s.as_slice());
            assert_eq!(d.y(t * per + k), p.rhs(s).as_slice());
        }
        assert!(start.iter().all(|v| (-10.0..=10.0).contains(v)));
    }
}

#[test]
fn dataset_and_sidecar_survive_disk() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("motivation.csv");
    let spec = GeneratorSpec::Motivation { n_samples: 200 };
    let d = spec.generate(3).unwrap();
    d.save_csv(&path).unwrap();
    let (_, params) = standardize(&d).unwrap();
    let meta = DatasetMeta {
        format_version: eds_core::FORMAT_VERSION,
        generator: spec.name().into(),
        seed: 3,
        params: serde_json::to_value(&spec).unwrap(),
        rows: d.len(),
        feature_dim: 2,
        label_dim: 1,
        standardization: Some(params),
        run: None,
    };
    let side = sidecar_path(&path);
    assert_eq!(side.file_name().unwrap(), "motivation.json");
    meta.save(&side).unwrap();
    assert_eq!(Dataset::load_csv(&path).unwrap(), d);
    let back = DatasetMeta::load(&side).unwrap();
    assert_eq!(back, meta);
    let regenerated: GeneratorSpec = serde_json::from_value(back.params).unwrap();
    assert_eq!(regenerated.generate(back.seed).unwrap(), d);
    assert!(Dataset::load_csv(&dir.path().join("missing.csv")).unwrap_err().is_io());
}

#[test]
fn rectangle_oracle_sees_curvature() {
    let spec = GeneratorSpec::Rectangles {
        n_samples: 10,
        params: RectangleParams::default(),
    };
    let oracle = spec.oracle(None);
    let x = [10.0, 20.0, 100.0, 150.0];
    assert!(oracle.norm_at(&x) > 0.0);
}

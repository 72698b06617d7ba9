use criterion::{criterion_group, criterion_main, BatchSize, Criterion};
use std::hint::black_box;

use eds_core::datagen::{gen_lorenz, gen_motivation, standardize, LorenzParams};
use eds_core::dataset::Dataset;
use eds_core::eds::{data_bbox, run_eds, EdsConfig};
use eds_core::geometry::Triangulation;
use eds_core::sysid::{lasso_fit, LassoConfig, PolyLibrary};

fn motivation(n: usize) -> Dataset {
    standardize(&gen_motivation(n, 7)).unwrap().0
}

fn seeded(data: &Dataset) -> Triangulation {
    let seed: [&[f64]; 3] = [&[-9.0, -9.0], &[9.0, -9.0], &[0.0, 9.0]];
    Triangulation::new(&seed, &data_bbox(data)).unwrap()
}

fn geometry(c: &mut Criterion) {
    let data = motivation(2000);
    c.bench_function("insert 2000 points", |b| {
        b.iter_batched(
            || seeded(&data),
            |mut t| {
                for (x, _) in data.rows() {
                    t.insert(x).unwrap();
                }
                t
            },
            BatchSize::LargeInput,
        )
    });

    let mut t = seeded(&data);
    for (x, _) in data.rows() {
        t.insert(x).unwrap();
    }
    let queries = motivation(1000);
    c.bench_function("locate 1000 points", |b| {
        b.iter(|| {
            for (x, _) in queries.rows() {
                black_box(t.locate(x).unwrap());
            }
        })
    });
}

fn curation(c: &mut Criterion) {
    let data = motivation(5000);
    let config = EdsConfig {
        seed: 7,
        ..EdsConfig::default()
    };
    let mut group = c.benchmark_group("eds");
    group.sample_size(10);
    group.bench_function("motivation 5000 rows", |b| {
        b.iter(|| run_eds(black_box(&data), &config).unwrap())
    });
    group.finish();
}

fn lasso(c: &mut Criterion) {
    let params = LorenzParams {
        n_inits: 2,
        ..LorenzParams::default()
    };
    let data = standardize(&gen_lorenz(&params, 1).unwrap()).unwrap().0;
    let library = PolyLibrary::new(3, 2);
    let config = LassoConfig::default();
    let mut group = c.benchmark_group("lasso");
    group.sample_size(10);
    group.bench_function(format!("lorenz {} rows", data.len()), |b| {
        b.iter(|| lasso_fit(&library, black_box(&data), &config).unwrap())
    });
    group.finish();
}

criterion_group!(benches, geometry, curation, lasso);
criterion_main!(benches);

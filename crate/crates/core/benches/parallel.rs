use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use std::hint::black_box;

use crossdim::{
    realize_batch, sampled_gain, CrossVec, Execution, LinSys, Mat, MuSchedule, Target,
    TransientScenario,
};

fn modes() -> [(&'static str, Execution); 2] {
    [("sequential", Execution::Sequential), ("parallel", Execution::Parallel)]
}

fn gain(c: &mut Criterion) {
    let a = Mat::from_rows(&[[1.0, 0.0, -1.0, 0.0], [0.0, -1.0, 0.0, 1.0]]).unwrap();
    let mut group = c.benchmark_group("sampled_gain");
    for (name, exec) in modes() {
        group.bench_function(BenchmarkId::new(name, 4000), |b| {
            b.iter(|| sampled_gain(black_box(&a), 1..=24, 4000, 7, exec).unwrap())
        });
    }
    group.finish();
}

fn scenarios(count: usize) -> Vec<TransientScenario> {
    let s1 = LinSys::continuous(
        Mat::from_rows(&[[0.0, 1.0], [0.0, 0.0]]).unwrap(),
        Mat::from_rows(&[[0.0], [1.0]]).unwrap(),
    )
    .unwrap();
    let s2 = LinSys::continuous(
        Mat::from_rows(&[[0.0, 0.0, 1.0], [0.0, 0.0, 0.0], [0.0, 1.0, 0.0]]).unwrap(),
        Mat::from_rows(&[[0.0], [1.0], [0.0]]).unwrap(),
    )
    .unwrap();
    (0..count)
        .map(|k| {
            let s = 1.0 + k as f64 / count as f64;
            TransientScenario::new(
                s1.clone(),
                s2.clone(),
                0.0,
                1.0,
                MuSchedule::Constant(0.5),
                CrossVec::from_slice(&[s, -s]).unwrap(),
                Target::Explicit(CrossVec::from_slice(&[1.0, 1.0, 2.0, 2.0, s, s]).unwrap()),
            )
            .unwrap()
        })
        .collect()
}

fn batch(c: &mut Criterion) {
    let batch = scenarios(16);
    let mut group = c.benchmark_group("realize_batch");
    group.sample_size(10);
    for (name, exec) in modes() {
        group.bench_function(BenchmarkId::new(name, batch.len()), |b| {
            b.iter(|| realize_batch(black_box(&batch), exec))
        });
    }
    group.finish();
}

criterion_group!(benches, gain, batch);
criterion_main!(benches);

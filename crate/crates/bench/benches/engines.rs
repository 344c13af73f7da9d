use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use everwill::harness::{check_invariants, load_config_str, run_history};
use everwill::{golden_step, good_step, primitive_step, reciprocity_audit, AuditOptions};

fn steps(c: &mut Criterion) {
    let mut group = c.benchmark_group("step");
    for n in [5, 20] {
        let mut p = everwill_bench::primitive(n, 3);
        group.bench_with_input(BenchmarkId::new("primitive", n), &n, |b, _| {
            b.iter(|| primitive_step(&p.society, black_box(&p.state), p.will.as_mut(), &mut p.streams).unwrap())
        });
        let mut g = everwill_bench::good(n, 3);
        group.bench_with_input(BenchmarkId::new("good", n), &n, |b, _| {
            b.iter(|| good_step(&g.society, black_box(&g.state), g.will.as_mut(), &mut g.streams).unwrap())
        });
        let mut gl = everwill_bench::golden(n, 3, 4 * n);
        group.bench_with_input(BenchmarkId::new("golden", n), &n, |b, _| {
            b.iter(|| {
                golden_step(&gl.society, &gl.roster, black_box(&gl.state), gl.will.as_mut(), &mut gl.streams).unwrap()
            })
        });
    }
    group.finish();
}

fn audit(c: &mut Criterion) {
    let (society, roster, history) = everwill_bench::golden_history(everwill_bench::golden(3, 2, 12), 1000);
    c.bench_function("reciprocity_audit/1000", |b| {
        b.iter(|| reciprocity_audit(&society, &roster, black_box(&history), &AuditOptions::default()).unwrap())
    });

    let config = load_config_str(
        r#"{"model":"golden","society":{"generate":{"persons":3,"estate":2}},
            "strategy":{"name":"bernoulli"},"steps":1000,"seed":1,"audit":true}"#,
        None,
    )
    .unwrap();
    let (log, _) = run_history(&config).unwrap();
    c.bench_function("check_invariants/golden/1000", |b| {
        b.iter(|| check_invariants(black_box(&log)).unwrap())
    });
}

criterion_group!(benches, steps, audit);
criterion_main!(benches);

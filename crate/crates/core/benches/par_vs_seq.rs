//! Throughput of the frequency sweep with the rayon map against the
//! sequential map, on a small dyadic range.

use criterion::{criterion_group, criterion_main, Criterion};
use hecke_resonance::afe::{afe_central_value, AfeConfig};
use hecke_resonance::chars::make_characters;
use hecke_resonance::exec::{map_collect, map_collect_seq, pairwise_sum};
use hecke_resonance::field::build_field;

fn sweep(c: &mut Criterion) {
    let ctx = build_field(-1).unwrap();
    let cfg = AfeConfig::default();
    let ells: Vec<i64> = (64..=128).map(|k| 4 * k).collect();

    let eval = |ell: i64| {
        let xi = &make_characters(&ctx, ell)[0];
        afe_central_value(xi, &ctx, &cfg).unwrap()
    };

    let mut group = c.benchmark_group("l_sweep_x256");
    group.sample_size(10);
    group.bench_function("parallel_map", |b| {
        b.iter(|| {
            let vals = map_collect(ells.clone(), eval);
            pairwise_sum(&vals)
        })
    });
    group.bench_function("sequential_map", |b| {
        b.iter(|| {
            let vals = map_collect_seq(ells.clone(), eval);
            pairwise_sum(&vals)
        })
    });
    group.finish();
}

criterion_group!(benches, sweep);
criterion_main!(benches);

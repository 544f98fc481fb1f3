use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion, Throughput};
use essop_bench::lfsr_vector;
use essop_core::{encode, f_scale, outer_product, shift_pack, unit_cell_multiply, Binary16Value, LfsrState, OuterProductJob};

fn lfsr(c: &mut Criterion) {
    let mut g = c.benchmark_group("lfsr");
    g.throughput(Throughput::Elements(1024));
    g.bench_function("next_word_x1024", |b| {
        let mut rng = LfsrState::seed(0xACE1).unwrap();
        b.iter(|| {
            let mut acc = 0u16;
            for _ in 0..1024 {
                acc ^= rng.next_word();
            }
            black_box(acc)
        })
    });
    g.finish();
}

fn encoding(c: &mut Criterion) {
    let mut g = c.benchmark_group("encode");
    for m in [16usize, 256, 2048] {
        g.bench_with_input(BenchmarkId::from_parameter(m), &m, |b, &m| {
            let x = Binary16Value::from_f64(0.6);
            b.iter(|| {
                let mut rng = LfsrState::seed(0xACE1).unwrap();
                black_box(encode(black_box(x), 0, &mut rng, m).unwrap())
            })
        });
    }
    g.finish();
}

fn unit_cell(c: &mut Criterion) {
    let scale = f_scale(0, 0, 16).unwrap();
    c.bench_function("shift_pack/all_counts_2048", |b| {
        b.iter(|| {
            for count in 0..=2048u32 {
                black_box(shift_pack(0, black_box(count), scale).unwrap());
            }
        })
    });
    let a = encode(Binary16Value::from_f64(0.6), 0, &mut LfsrState::seed(1).unwrap(), 16).unwrap();
    let d = encode(Binary16Value::from_f64(-0.7), 0, &mut LfsrState::seed(2).unwrap(), 16).unwrap();
    c.bench_function("unit_cell_multiply/m16", |b| b.iter(|| black_box(unit_cell_multiply(&a, &d, scale).unwrap())));
}

fn outer(c: &mut Criterion) {
    let mut g = c.benchmark_group("outer_product");
    g.sample_size(20);
    for (n, m) in [(64usize, 16usize), (256, 8), (256, 16)] {
        let job = OuterProductJob::new(lfsr_vector(n, 0x1111), lfsr_vector(n, 0x2222), m, 0xACE1, 0x1234);
        g.throughput(Throughput::Elements((n * n) as u64));
        g.bench_with_input(BenchmarkId::new(format!("{n}x{n}"), m), &job, |b, job| {
            b.iter(|| black_box(outer_product(job).unwrap()))
        });
    }
    g.finish();
}

criterion_group!(benches, lfsr, encoding, unit_cell, outer);
criterion_main!(benches);

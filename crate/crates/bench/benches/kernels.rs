use std::path::Path;

use criterion::{black_box, criterion_group, criterion_main, BenchmarkId, Criterion};
use mis_lab::{
    hist_k, mis_entropy, surface_correction, BigUint, LatticeBox, LnContext, MisSpec, MultiplierVector, Sft2dSpec,
    SubshiftSpec, System,
};

fn golden_mean_2_3() -> MisSpec {
    MisSpec::new(MultiplierVector::new(vec![2, 3]).unwrap(), SubshiftSpec::golden_mean())
}

fn power_box(n: u32) -> LatticeBox {
    LatticeBox::new(vec![BigUint::from(2u32).pow(n), BigUint::from(3u32).pow(n)]).unwrap()
}

fn sft(name: &str) -> Sft2dSpec {
    let path = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs").join(name);
    match mis_lab::parse_config(path).unwrap().system().unwrap() {
        System::Sft2d(s) => s,
        System::Mis(_) => panic!("{name} is not a 2-d configuration"),
    }
}

fn histograms(c: &mut Criterion) {
    let p = MultiplierVector::new(vec![2, 3]).unwrap();
    let mut g = c.benchmark_group("hist_k");
    for n in [10, 100, 1000] {
        let bx = power_box(n);
        g.bench_with_input(BenchmarkId::from_parameter(n), &bx, |b, bx| b.iter(|| hist_k(black_box(bx), &p)));
    }
    g.finish();
}

fn word_logs(c: &mut Criterion) {
    let gm = SubshiftSpec::golden_mean();
    let mut g = c.benchmark_group("word_logs");
    for len in [64, 512] {
        g.bench_with_input(BenchmarkId::from_parameter(len), &len, |b, &len| {
            b.iter(|| gm.word_logs(len, 256).unwrap())
        });
    }
    g.finish();
}

fn logarithm(c: &mut Criterion) {
    let num = BigUint::from(1_000_003u32);
    let den = BigUint::from(999_983u32);
    let mut g = c.benchmark_group("ln_ratio");
    for prec in [128, 1024, 4096] {
        let ctx = LnContext::new(prec);
        g.bench_with_input(BenchmarkId::from_parameter(prec), &ctx, |b, ctx| {
            b.iter(|| ctx.ln_ratio(black_box(&num), black_box(&den)))
        });
    }
    g.finish();
}

fn entropy(c: &mut Criterion) {
    let mis = golden_mean_2_3();
    c.bench_function("mis_entropy_1e-15", |b| b.iter(|| mis_entropy(&mis, 1e-15).unwrap()));
}

fn surface(c: &mut Criterion) {
    let mis = golden_mean_2_3();
    let mut g = c.benchmark_group("surface_correction");
    g.sample_size(10);
    for n in [10, 50] {
        let bx = power_box(n);
        let prec = 64 + 4 * (2 * n + 4 * n);
        g.bench_with_input(BenchmarkId::from_parameter(n), &bx, |b, bx| {
            b.iter(|| surface_correction(&mis, bx, prec).unwrap())
        });
    }
    g.finish();
}

fn sft_counts(c: &mut Criterion) {
    let diag = sft("sft2d_single_or_diagonal.json");
    let mut g = c.benchmark_group("sft2d");
    g.bench_function("box_8x8", |b| b.iter(|| diag.box_pattern_count(8, 8, 1 << 20).unwrap()));
    g.bench_function("frame_8x8_i2", |b| b.iter(|| diag.frame_count(8, 8, 2, 1 << 20).unwrap()));
    g.finish();
}

criterion_group!(benches, histograms, word_logs, logarithm, entropy, surface, sft_counts);
criterion_main!(benches);

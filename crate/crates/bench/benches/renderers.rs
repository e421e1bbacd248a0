use criterion::{black_box, criterion_group, criterion_main, BenchmarkId, Criterion};

use objrender::engine::EngineOptions;
use objrender::geometry::{Direction3, Vec3};
use objrender::renderers::{
    ambi_gains, ambi_mm_decode, default_control_points, pm_fir, render_block, vbap_gains, DrivingFunction,
    RenderState, SpeakerDrive, DEFAULT_BETA, PM_FIR_TAPS, SPEED_OF_SOUND,
};
use objrender::{render, Rulebook, SelectionTable};
use objrender_bench::{noise, ring, ring_positions, short_demo, SAMPLE_RATE};

fn vbap(c: &mut Criterion) {
    let speakers = ring(8);
    c.bench_function("vbap_8_ring", |b| {
        b.iter(|| vbap_gains(black_box(&Direction3::horizontal(37.0)), &speakers).unwrap())
    });
}

fn ambisonics(c: &mut Criterion) {
    let mut group = c.benchmark_group("ambi");
    for order in [1u32, 3] {
        let speakers = ring(2 * order as usize + 2);
        group.bench_with_input(BenchmarkId::new("decode", order), &order, |b, &n| {
            b.iter(|| ambi_mm_decode(black_box(&speakers), n).unwrap())
        });
        let dec = ambi_mm_decode(&speakers, order).unwrap();
        group.bench_with_input(BenchmarkId::new("gains", order), &order, |b, &n| {
            b.iter(|| ambi_gains(&dec, black_box(&Direction3::horizontal(-50.0)), n))
        });
    }
    group.finish();
}

fn pressure_matching(c: &mut Criterion) {
    let speakers = ring_positions(5, 2.0);
    let control = default_control_points();
    c.bench_function("pm_fir_5", |b| {
        b.iter(|| {
            pm_fir(
                &speakers,
                &control,
                black_box(Vec3::new(3.0, 1.0, 0.0)),
                DEFAULT_BETA,
                SPEED_OF_SOUND,
                SAMPLE_RATE,
                PM_FIR_TAPS,
            )
            .unwrap()
        })
    });
}

fn block(c: &mut Criterion) {
    let x = noise(1024, 1);
    let fir = noise(PM_FIR_TAPS, 2);
    let drive = DrivingFunction {
        speakers: (0..5)
            .map(|i| SpeakerDrive {
                gain: 0.5,
                delay_s: i as f64 * 1e-3,
                filter: (i % 2 == 0).then(|| fir.clone()),
            })
            .collect(),
    };
    let mut state = RenderState::new(&drive, SAMPLE_RATE, 1024);
    c.bench_function("render_block_5ch_1024", |b| {
        b.iter(|| render_block(black_box(&x), &drive, &mut state).unwrap())
    });
}

fn engine(c: &mut Criterion) {
    let (scene, file) = short_demo(1.0);
    let rules = Rulebook::builtin();
    let table = SelectionTable::builtin();
    let opts = EngineOptions::default();
    let mut group = c.benchmark_group("engine");
    group.sample_size(10);
    group.bench_function("demo_1s", |b| b.iter(|| render(&scene, &file, &rules, &table, &opts).unwrap()));
    group.finish();
}

criterion_group!(benches, vbap, ambisonics, pressure_matching, block, engine);
criterion_main!(benches);
